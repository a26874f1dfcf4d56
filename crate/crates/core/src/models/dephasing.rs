//! Qubit dephased by a static Lorentzian-distributed field, probed by a
//! `σ_x` measurement at time `s`.
//!
//! Conditioned on the field value `q` the qubit evolves under
//! `u_q(τ) = exp(−i g q τ σ_z / 2)`; `q` has density `γ/π / (q² + γ²)`.
//! Averaging gives coherence decay `e^{−Γτ}` with `Γ = gγ`, but the averaged
//! dynamics is not divisible once an intermediate measurement correlates the
//! system with the field: after a non-selective `σ_x` measurement at `s` the
//! `x` component revives instead of continuing to decay.

use num_complex::Complex;

use super::quadrature::{commensurate_step, tangent_lorentzian, wrapped_lorentzian, Quadrature};
use crate::channel::Superoperator;
use crate::error::{Error, Result};
use crate::linalg::{c, pauli_x, pauli_z, tensor_product, ComplexMatrix, DensityMatrix};
use crate::process::{DilatedProcess, MarkovProcess, TimeGrid};

/// Exponent `(n − M) a` the wrapped rule must reach: aliasing error is of
/// order `e^{−25} ≈ 10⁻¹¹`.
pub const MIN_RESOLUTION: f64 = 25.0;
/// Largest wrapped rule built automatically.
pub const MAX_NODES: usize = 1 << 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DephasingModelParams {
    /// Coupling between qubit and field.
    pub g: f64,
    /// Half-width of the Lorentzian field distribution.
    pub gamma: f64,
    /// Time of the `σ_x` measurement.
    pub s: f64,
    /// Initial Bloch `x` component (the state starts on the `x` axis).
    pub x0: f64,
}

impl DephasingModelParams {
    pub fn new(g: f64, gamma: f64, s: f64, x0: f64) -> Result<Self> {
        let ok = g.is_finite()
            && g >= 0.0
            && gamma.is_finite()
            && gamma > 0.0
            && s.is_finite()
            && s >= 0.0;
        if !ok || !(x0.abs() <= 1.0) {
            return Err(Error::InvalidParameters(format!(
                "need g >= 0, gamma > 0, s >= 0, |x0| <= 1; got g={g}, gamma={gamma}, s={s}, x0={x0}"
            )));
        }
        Ok(Self { g, gamma, s, x0 })
    }

    /// Decay rate `Γ = gγ` of the unmeasured coherence.
    pub fn rate(&self) -> f64 {
        self.g * self.gamma
    }

    pub fn initial_state(&self) -> DensityMatrix {
        DensityMatrix::from_bloch(self.x0, 0., 0.).expect("|x0| <= 1")
    }
}

impl Default for DephasingModelParams {
    fn default() -> Self {
        Self {
            g: 1.0,
            gamma: 1.0,
            s: 1.0,
            x0: 1.0,
        }
    }
}

/// Closed-form `x(t)` with the `σ_x` measurement at `s`:
///
/// * `t < s`: `x₀ e^{−Γt}`;
/// * `s ≤ t < 2s`: `(x₀/2)(e^{−Γt} + e^{−Γ(2s−t)})`;
/// * `t > 2s`: `(x₀/2) e^{−Γt}(1 + e^{2Γs})`.
///
/// The two branches around `2s` are written separately and `t = 2s` itself
/// is rejected; [`one_sided_limits`] gives the values approaching it.
pub fn dephased_trajectory_exact(p: &DephasingModelParams, t: f64) -> Result<f64> {
    check_time(t)?;
    let (gm, s, x0) = (p.rate(), p.s, p.x0);
    if t < s {
        Ok(x0 * (-gm * t).exp())
    } else if t < 2.0 * s {
        Ok(0.5 * x0 * ((-gm * t).exp() + (gm * (t - 2.0 * s)).exp()))
    } else if t > 2.0 * s {
        Ok(0.5 * x0 * (-gm * t).exp() * (1.0 + (2.0 * gm * s).exp()))
    } else {
        Err(Error::SingularTime { t, s })
    }
}

/// Limits of [`dephased_trajectory_exact`] as `t → 2s` from below and above.
/// Both equal `(x₀/2)(1 + e^{−2Γs})`.
pub fn one_sided_limits(p: &DephasingModelParams) -> (f64, f64) {
    let (gm, s, x0) = (p.rate(), p.s, p.x0);
    let below = 0.5 * x0 * ((-2.0 * gm * s).exp() + 1.0);
    let above = 0.5 * x0 * (-2.0 * gm * s).exp() * (1.0 + (2.0 * gm * s).exp());
    (below, above)
}

/// `x(t)` predicted if the dynamics were divisible and undisturbed by the
/// measurement: `x₀ e^{−Γt}`.
pub fn ncgd_prediction(p: &DephasingModelParams, t: f64) -> f64 {
    p.x0 * (-p.rate() * t).exp()
}

fn field_unitary(g: f64, q: f64, tau: f64) -> ComplexMatrix {
    let phi = 0.5 * g * q * tau;
    ComplexMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
        Complex::from_polar(1.0, -phi),
        Complex::from_polar(1.0, phi),
    ]))
}

fn dephase_x(rho: &ComplexMatrix) -> ComplexMatrix {
    let x = pauli_x::<f64>();
    (rho + &x * rho * &x) * c(0.5, 0.)
}

fn check_time(t: f64) -> Result<()> {
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "time must be finite and non-negative, got {t}"
        )));
    }
    Ok(())
}

/// Unmeasured reduced dynamics in closed form:
/// `ρ(t) = ½(1+e^{−Γt}) ρ₀ + ½(1−e^{−Γt}) σ_z ρ₀ σ_z`.
pub fn dephasing_reduced_state(
    p: &DephasingModelParams,
    rho0: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    check_time(t)?;
    if rho0.dim() != 2 {
        return Err(Error::Dimension(format!(
            "expected a qubit state, got dimension {}",
            rho0.dim()
        )));
    }
    let e = (-p.rate() * t).exp();
    let z = pauli_z::<f64>();
    let m =
        rho0.matrix() * c(0.5 * (1.0 + e), 0.) + &z * rho0.matrix() * &z * c(0.5 * (1.0 - e), 0.);
    DensityMatrix::with_tolerance(m, 1e-12)
}

/// State at `t` for a fixed field value `q`. With `intervene`, the `σ_x`
/// measurement is applied at `s` (if `t ≥ s`).
pub fn conditional_state(
    p: &DephasingModelParams,
    q: f64,
    rho0: &ComplexMatrix,
    t: f64,
    intervene: bool,
) -> ComplexMatrix {
    if !intervene || t < p.s {
        let u = field_unitary(p.g, q, t);
        return &u * rho0 * u.adjoint();
    }
    let u1 = field_unitary(p.g, q, p.s);
    let mid = dephase_x(&(&u1 * rho0 * u1.adjoint()));
    let u2 = field_unitary(p.g, q, t - p.s);
    &u2 * mid * u2.adjoint()
}

/// Field average of [`conditional_state`] under `rule`: the trace over the
/// environment reduces to a classical mixture because the coupling is
/// diagonal in `q`.
pub fn quadrature_oracle(
    p: &DephasingModelParams,
    rho0: &DensityMatrix,
    t: f64,
    intervene: bool,
    rule: &Quadrature,
) -> Result<ComplexMatrix> {
    check_time(t)?;
    let mut acc = ComplexMatrix::zeros(2, 2);
    for (&q, &w) in rule.nodes.iter().zip(&rule.weights) {
        acc += conditional_state(p, q, rho0.matrix(), t, intervene) * c(w, 0.);
    }
    Ok(acc)
}

/// How the field average is discretized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureScheme {
    /// `q = γ tan θ` with Gauss–Legendre in `θ`.
    Tangent { node_count: usize },
    /// Trapezoid rule on the Lorentzian folded onto one period of the
    /// dynamics (see [`wrapped_rule`]).
    Wrapped { node_count: usize },
}

/// Smallest node count accepted by [`QuadratureScheme::rule`].
pub const MIN_NODES: usize = 64;

impl QuadratureScheme {
    /// Rule for averaging the dynamics up to time `t`.
    pub fn rule(&self, p: &DephasingModelParams, t: f64) -> Result<Quadrature> {
        match *self {
            QuadratureScheme::Tangent { node_count } if node_count >= MIN_NODES => {
                tangent_lorentzian(p.gamma, node_count)
            }
            QuadratureScheme::Wrapped { node_count } if node_count >= MIN_NODES => {
                if p.g == 0.0 {
                    return Ok(Quadrature {
                        nodes: vec![0.0],
                        weights: vec![1.0],
                    });
                }
                let h = common_step(p, t)?;
                wrapped_lorentzian(p.gamma, std::f64::consts::TAU / (p.g * h), node_count)
            }
            _ => Err(Error::InvalidParameters(format!(
                "need at least {MIN_NODES} quadrature nodes"
            ))),
        }
    }
}

fn common_step(p: &DephasingModelParams, t: f64) -> Result<f64> {
    let values: Vec<f64> = [p.s, t].into_iter().filter(|&v| v > 0.0).collect();
    if values.is_empty() {
        return Ok(1.0);
    }
    commensurate_step(&values).ok_or_else(|| {
        Error::InvalidParameters(format!("s = {} and t = {t} have no common step", p.s))
    })
}

/// Wrapped-Lorentzian rule exact (to `e^{−25}`) for the dynamics up to `t`.
///
/// The conditional dynamics is periodic in `q` with period `2π/(g h)`, `h`
/// the common step of `s` and `t`; the node count is chosen so the highest
/// Fourier mode `max(s, t)/h` is resolved.
pub fn wrapped_rule(p: &DephasingModelParams, t: f64) -> Result<Quadrature> {
    if p.g == 0.0 {
        return Ok(Quadrature {
            nodes: vec![0.0],
            weights: vec![1.0],
        });
    }
    let h = common_step(p, t)?;
    let a = p.g * p.gamma * h;
    let modes = (p.s.max(t) / h).ceil() + 1.0;
    let n = (modes + MIN_RESOLUTION / a).ceil().max(MIN_NODES as f64);
    if !(n <= MAX_NODES as f64) {
        return Err(Error::InvalidParameters(format!(
            "wrapped rule needs {n} nodes (step {h}, decay per step {a:e})"
        )));
    }
    QuadratureScheme::Wrapped {
        node_count: n as usize,
    }
    .rule(p, t)
}

/// State at `t` with the `σ_x` measurement at `s`, averaged with
/// [`wrapped_rule`].
pub fn measured_state(p: &DephasingModelParams, t: f64) -> Result<DensityMatrix> {
    let rho = quadrature_oracle(p, &p.initial_state(), t, true, &wrapped_rule(p, t)?)?;
    DensityMatrix::with_tolerance(rho, 1e-9)
}

/// Matrix of the dephasing Lindbladian `ρ ↦ (Γ/2)(σ_z ρ σ_z − ρ)`.
pub fn lindblad_generator(rate: f64) -> ComplexMatrix {
    let z = pauli_z::<f64>();
    let id = ComplexMatrix::identity(4, 4);
    (tensor_product(&z, &z) - id) * c(0.5 * rate, 0.)
}

/// `e^{τL}` for the dephasing Lindbladian.
pub fn semigroup_step(rate: f64, tau: f64) -> Result<Superoperator> {
    let m = (lindblad_generator(rate) * c(tau, 0.)).exp();
    Superoperator::new(2, 2, m, true, true)
}

/// Integrates `dρ/dt = L ρ` with classical RK4 in `steps` steps.
pub fn master_equation_rk4(rho0: &ComplexMatrix, rate: f64, t: f64, steps: usize) -> ComplexMatrix {
    let z = pauli_z::<f64>();
    let l = |r: &ComplexMatrix| (&z * r * &z - r) * c(0.5 * rate, 0.);
    let h = t / steps as f64;
    let hc = c(h, 0.);
    let mut rho = rho0.clone();
    for _ in 0..steps {
        let k1 = l(&rho);
        let k2 = l(&(&rho + &k1 * c(h / 2.0, 0.)));
        let k3 = l(&(&rho + &k2 * c(h / 2.0, 0.)));
        let k4 = l(&(&rho + &k3 * hc));
        rho += (k1 + k2 * c(2., 0.) + k3 * c(2., 0.) + k4) * c(h / 6.0, 0.);
    }
    rho
}

/// The Markov family the averaged unmeasured dynamics would have if it were
/// divisible: dephasing semigroup steps between consecutive grid times.
pub fn semigroup_process(p: &DephasingModelParams, grid: TimeGrid) -> Result<MarkovProcess> {
    let maps = grid
        .times()
        .windows(2)
        .map(|w| semigroup_step(p.rate(), w[1] - w[0]))
        .collect::<Result<Vec<_>>>()?;
    MarkovProcess::new(p.initial_state(), maps, grid)
}

/// Finite dilation: the field is replaced by `n_env` wrapped-rule nodes held
/// in a classical mixture, each coupled to the qubit by its own `u_q`.
/// Exact (to the rule's aliasing error) at every grid time because all
/// increments are multiples of the grid's common step.
pub fn discretized_dilation(
    p: &DephasingModelParams,
    grid: TimeGrid,
    n_env: usize,
) -> Result<DilatedProcess> {
    if p.g == 0.0 {
        return Err(Error::InvalidParameters("a dilation needs g > 0".into()));
    }
    let times = grid.times();
    let h = commensurate_step(times)
        .ok_or_else(|| Error::InvalidParameters("grid times have no common step".into()))?;
    let a = p.g * p.gamma * h;
    let modes = (times[times.len() - 1] - times[0]) / h;
    if (n_env as f64 - modes) * a < MIN_RESOLUTION {
        return Err(Error::InvalidParameters(format!(
            "{n_env} environment levels resolve only e^-{:.1}",
            (n_env as f64 - modes) * a
        )));
    }
    let rule = wrapped_lorentzian(p.gamma, std::f64::consts::TAU / (p.g * h), n_env)?;
    let total: f64 = rule.weights.iter().sum();
    let env = ComplexMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
        n_env,
        rule.weights.iter().map(|w| c(w / total, 0.)),
    ));
    let initial =
        DensityMatrix::with_tolerance(tensor_product(p.initial_state().matrix(), &env), 1e-9)?;
    let unitaries = times
        .windows(2)
        .map(|w| {
            let mut u = ComplexMatrix::zeros(2 * n_env, 2 * n_env);
            for (k, &q) in rule.nodes.iter().enumerate() {
                let uq = field_unitary(p.g, q, w[1] - w[0]);
                for i in 0..2 {
                    for j in 0..2 {
                        u[(i * n_env + k, j * n_env + k)] = uq[(i, j)];
                    }
                }
            }
            u
        })
        .collect();
    DilatedProcess::new(2, n_env, initial, unitaries, grid)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub x_exact: f64,
    pub x_ncgd: f64,
}

/// Samples `x(t)` and the divisible prediction on `0, dt, 2dt, … ≤ t_max`.
///
/// Times are `k / m` when `dt = 1/m` for an integer `m`, so grid points such
/// as `2s` are hit exactly. There the trajectory takes its (common) limit.
pub fn trajectory(p: &DephasingModelParams, t_max: f64, dt: f64) -> Result<Vec<TrajectoryRow>> {
    if !(dt > 0.0) || !(t_max >= 0.0) || !t_max.is_finite() {
        return Err(Error::InvalidParameters(format!(
            "need dt > 0 and t_max >= 0, got dt={dt}, t_max={t_max}"
        )));
    }
    let inv = 1.0 / dt;
    let per_unit = ((inv - inv.round()).abs() < 1e-9 * inv).then(|| inv.round());
    let count = (t_max / dt + 1e-9).floor() as usize + 1;
    (0..count)
        .map(|k| {
            let t = match per_unit {
                Some(m) => k as f64 / m,
                None => k as f64 * dt,
            };
            let x_exact = match dephased_trajectory_exact(p, t) {
                Err(Error::SingularTime { .. }) => one_sided_limits(p).0,
                other => other?,
            };
            Ok(TrajectoryRow {
                t,
                x_exact,
                x_ncgd: ncgd_prediction(p, t),
            })
        })
        .collect()
}

/// Bloch `x` component `tr(σ_x ρ)`.
pub fn bloch_x(rho: &ComplexMatrix) -> f64 {
    (rho[(0, 1)] + rho[(1, 0)]).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;

    #[test]
    fn closed_form_values() {
        let p = DephasingModelParams::default();
        let e = |x: f64| x.exp();
        assert!(
            (dephased_trajectory_exact(&p, 3.0).unwrap() - 0.5 * (e(-1.) + e(-3.))).abs() < 1e-15
        );
        assert!((ncgd_prediction(&p, 3.0) - e(-3.)).abs() < 1e-16);
        assert!((ncgd_prediction(&p, 1.0) - e(-1.)).abs() < 1e-16);
        assert!(matches!(
            dephased_trajectory_exact(&p, 2.0),
            Err(Error::SingularTime { .. })
        ));
        assert!(dephased_trajectory_exact(&p, -0.1).is_err());
    }

    #[test]
    fn limits_at_twice_s_agree_with_nearby_values() {
        let p = DephasingModelParams::new(1.3, 0.7, 0.9, 0.8).unwrap();
        let (below, above) = one_sided_limits(&p);
        assert!((below - above).abs() < 1e-15);
        let eps = 1e-7;
        assert!((dephased_trajectory_exact(&p, 1.8 - eps).unwrap() - below).abs() < 1e-6);
        assert!((dephased_trajectory_exact(&p, 1.8 + eps).unwrap() - above).abs() < 1e-6);
    }

    /// The hyperbolic form with `sinh[Γ(t−2s)]/sign(t−2s)`, taken literally,
    /// agrees with the exponential branches for `t ≥ s`.
    #[test]
    fn hyperbolic_form_matches_both_branches() {
        let p = DephasingModelParams::new(0.8, 1.5, 1.1, 0.6).unwrap();
        let (gm, s, x0) = (p.rate(), p.s, p.x0);
        for k in 0..=60 {
            let t = s + k as f64 * 0.05;
            if (t - 2.0 * s).abs() < 1e-12 {
                continue;
            }
            let u = gm * (t - 2.0 * s);
            let hyperbolic = 0.5 * x0 * (u.cosh() + (gm * t).cosh())
                - 0.5 * x0 * ((gm * t).sinh() + u.sinh() / u.signum());
            let got = dephased_trajectory_exact(&p, t).unwrap();
            assert!((got - hyperbolic).abs() < 1e-13, "t={t}");
        }
    }

    #[test]
    fn quadrature_matches_closed_form() {
        let p = DephasingModelParams::default();
        for t in [0.5, 1.0, 1.5, 2.5, 3.0, 4.0] {
            let rho = measured_state(&p, t).unwrap();
            let x = bloch_x(rho.matrix());
            assert!(
                (x - dephased_trajectory_exact(&p, t).unwrap()).abs() < 1e-10,
                "t={t}"
            );
        }
        let x2 = bloch_x(measured_state(&p, 2.0).unwrap().matrix());
        assert!((x2 - one_sided_limits(&p).0).abs() < 1e-10);
    }

    #[test]
    fn unmeasured_oracle_matches_channel() {
        let p = DephasingModelParams::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let rho0 = DensityMatrix::from_bloch(0.3, 0.5, -0.4).unwrap();
        for t in [0.5, 1.0, 3.0] {
            let rule = QuadratureScheme::Wrapped { node_count: 256 }
                .rule(&p, t)
                .unwrap();
            let oracle = quadrature_oracle(&p, &rho0, t, false, &rule).unwrap();
            let closed = dephasing_reduced_state(&p, &rho0, t).unwrap();
            assert!(max_abs_diff(&oracle, closed.matrix()) < 1e-12, "t={t}");
        }
        let at_zero = dephasing_reduced_state(&p, &rho0, 0.0).unwrap();
        assert!(max_abs_diff(at_zero.matrix(), rho0.matrix()) < 1e-16);
    }

    #[test]
    fn measurement_at_start_does_not_change_decay() {
        let p = DephasingModelParams::new(1.0, 1.0, 0.0, 0.7).unwrap();
        for t in [0.3, 1.0, 2.5] {
            assert!(
                (dephased_trajectory_exact(&p, t).unwrap() - ncgd_prediction(&p, t)).abs() < 1e-15
            );
        }
    }

    #[test]
    fn zero_coupling_leaves_dephased_state() {
        let p = DephasingModelParams::new(1e-9, 1.0, 1.0, 1.0).unwrap();
        let rho0 = DensityMatrix::from_bloch(0.6, 0.2, 0.3).unwrap();
        let rule = QuadratureScheme::Tangent { node_count: 2000 }
            .rule(&p, 2.0)
            .unwrap();
        let out = quadrature_oracle(&p, &rho0, 2.0, true, &rule).unwrap();
        let expected = dephase_x(rho0.matrix());
        assert!(max_abs_diff(&out, &expected) < 1e-6);
    }

    #[test]
    fn semigroup_agrees_with_rk4_and_decay() {
        let rate = 0.8;
        let rho0 = DensityMatrix::from_bloch(0.6, -0.3, 0.5)
            .unwrap()
            .into_matrix();
        for t in [0.1, 1.0, 3.0, 6.25] {
            let exact = semigroup_step(rate, t).unwrap().apply(&rho0).unwrap();
            let rk = master_equation_rk4(&rho0, rate, t, 2000);
            assert!(max_abs_diff(&exact, &rk) < 1e-9);
            let p = DephasingModelParams::new(1.0, rate, 1.0, 1.0).unwrap();
            let closed =
                dephasing_reduced_state(&p, &DensityMatrix::new(rho0.clone()).unwrap(), t).unwrap();
            assert!(max_abs_diff(&exact, closed.matrix()) < 1e-12);
            assert!((bloch_x(&exact) - 0.6 * (-rate * t).exp()).abs() < 1e-12);
        }
    }

    #[test]
    fn dilation_reproduces_unmeasured_decay() {
        let p = DephasingModelParams::default();
        let grid = TimeGrid::new(vec![0., 1., 2., 3.]).unwrap();
        let dil = discretized_dilation(&p, grid, 32).unwrap();
        assert_eq!(dil.dim_e(), 32);
        let mk = crate::process::markov_from_dilation(&dil).unwrap();
        for (k, m) in mk.maps().iter().enumerate() {
            let expected = semigroup_step(p.rate(), 1.0).unwrap();
            assert!(m.distance(&expected).unwrap() < 1e-9, "step {}", k + 1);
        }
        assert!(discretized_dilation(&p, TimeGrid::new(vec![0., 1., 2., 3.]).unwrap(), 8).is_err());
    }

    #[test]
    fn trajectory_grid() {
        let p = DephasingModelParams::default();
        let rows = trajectory(&p, 5.0, 0.01).unwrap();
        assert_eq!(rows.len(), 501);
        assert_eq!(rows[200].t, 2.0);
        assert_eq!(rows[300].t, 3.0);
        assert!((rows[200].x_exact - one_sided_limits(&p).0).abs() < 1e-15);
    }

    #[test]
    fn invalid_parameters() {
        assert!(DephasingModelParams::new(-1., 1., 1., 1.).is_err());
        assert!(DephasingModelParams::new(1., 0., 1., 1.).is_err());
        assert!(DephasingModelParams::new(1., 1., 1., 1.5).is_err());
    }
}
