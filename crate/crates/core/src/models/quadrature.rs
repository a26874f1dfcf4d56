//! Quadrature rules for averaging over a Lorentzian (Cauchy) distribution.
//!
//! Two rules are provided. [`tangent_lorentzian`] maps the real line to a
//! finite interval with `q = γ tan θ` and applies Gauss–Legendre; it works for
//! any integrand but converges only algebraically once the integrand
//! oscillates. [`wrapped_lorentzian`] exploits integrands that are periodic
//! in `q`: folding the density onto one period gives a smooth periodic
//! weight, and the trapezoid rule on it converges geometrically.

use crate::error::{Error, Result};

/// Nodes and weights; the weights of a probability rule sum to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Quadrature {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl Quadrature {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `Σ w_i f(q_i)` with pairwise summation.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        let terms: Vec<f64> = self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&q, &w)| w * f(q))
            .collect();
        pairwise_sum(&terms)
    }
}

/// Sum with `O(log n)` error growth.
pub fn pairwise_sum(xs: &[f64]) -> f64 {
    if xs.len() <= 8 {
        return xs.iter().sum();
    }
    let (a, b) = xs.split_at(xs.len() / 2);
    pairwise_sum(a) + pairwise_sum(b)
}

/// `n`-point Gauss–Legendre rule on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> Quadrature {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre(n, x);
        if d != 0.0 {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    Quadrature { nodes, weights }
}

fn legendre(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Lorentzian of half-width `gamma` through `q = γ tan θ` and an `n`-point
/// Gauss–Legendre rule in `θ`.
pub fn tangent_lorentzian(gamma: f64, n: usize) -> Result<Quadrature> {
    if !(gamma > 0.0) || n == 0 {
        return Err(Error::InvalidParameters(
            "need gamma > 0 and at least one node".into(),
        ));
    }
    let gl = gauss_legendre(n);
    let half_pi = std::f64::consts::FRAC_PI_2;
    Ok(Quadrature {
        nodes: gl
            .nodes
            .iter()
            .map(|&x| gamma * (half_pi * x).tan())
            .collect(),
        weights: gl.weights.iter().map(|w| w / 2.0).collect(),
    })
}

/// Lorentzian of half-width `gamma` folded onto `[0, period)`:
///
/// `Σ_m γ/π / ((q + mP)² + γ²) = sinh a / (P (cosh a − cos(2πq/P)))`,
/// `a = 2πγ/P`, sampled by the `n`-point trapezoid rule. Exact for integrands
/// with period `P` whose Fourier modes stay below `n`, up to `e^{-a n}`.
pub fn wrapped_lorentzian(gamma: f64, period: f64, n: usize) -> Result<Quadrature> {
    if !(gamma > 0.0) || !(period > 0.0) || !period.is_finite() || n == 0 {
        return Err(Error::InvalidParameters(
            "need gamma > 0, a finite period > 0 and nodes".into(),
        ));
    }
    let tau = std::f64::consts::TAU;
    let a = tau * gamma / period;
    // sinh a / (cosh a − cos φ) written to stay finite for large a
    let weight = |phi: f64| {
        let e = (-a).exp();
        (1.0 - e * e) / (1.0 + e * e - 2.0 * e * phi.cos())
    };
    let nodes: Vec<f64> = (0..n).map(|k| k as f64 * period / n as f64).collect();
    let weights = nodes
        .iter()
        .map(|&q| weight(tau * q / period) / n as f64)
        .collect();
    Ok(Quadrature { nodes, weights })
}

/// Largest `h` such that every value is an integer multiple of it, found by
/// rationalizing with denominators up to `10⁴`.
pub fn commensurate_step(values: &[f64]) -> Option<f64> {
    const MAX_DENOMINATOR: u64 = 10_000;
    if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return None;
    }
    'den: for den in 1..=MAX_DENOMINATOR {
        let mut g = 0u64;
        for &v in values {
            let scaled = v * den as f64;
            let k = scaled.round();
            if (scaled - k).abs() > 1e-9 * scaled.abs().max(1.0) || k > 1e15 {
                continue 'den;
            }
            g = gcd(g, k as u64);
        }
        return (g > 0).then(|| g as f64 / den as f64);
    }
    None
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}
