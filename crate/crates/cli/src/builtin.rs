//! Models that can be checked without an input file.

use qclassical::io::{ExpectedDoc, LoadedProcess};
use qclassical::models::counterexamples::build_counterexample;
use qclassical::models::dephasing::{discretized_dilation, DephasingModelParams};
use qclassical::{Observable, PreparationSet, TimeGrid};

pub const NAMES: [&str; 4] = [
    "counterexample-1",
    "counterexample-2",
    "counterexample-3",
    "appendix-a",
];

/// Environment levels of the discretized field in `appendix-a`.
const FIELD_LEVELS: usize = 32;

pub fn lookup(name: &str) -> Option<qclassical::Result<LoadedProcess>> {
    match name {
        "counterexample-1" => Some(counterexample(1)),
        "counterexample-2" => Some(counterexample(2)),
        "counterexample-3" => Some(counterexample(3)),
        "appendix-a" => Some(dephasing()),
        _ => None,
    }
}

pub fn counterexample(id: usize) -> qclassical::Result<LoadedProcess> {
    let ce = build_counterexample(id)?;
    Ok(LoadedProcess {
        process: ce.process,
        observable: ce.observable,
        preparations: ce.preparations,
        expected: Some(ExpectedDoc {
            classical: Some(ce.expected.classical),
            incoherent: Some(ce.expected.incoherent),
            invertible: ce.expected.invertible,
            ..ExpectedDoc::default()
        }),
    })
}

/// The qubit dephased by a Lorentzian field (g = γ = s = x₀ = 1), sampled at
/// times 0..=3 with the field discretized, measured in `σ_x`.
///
/// Its averaged dynamics satisfies NCGD, yet intervening at `s` changes the
/// later coherence, so it is not incoherent.
fn dephasing() -> qclassical::Result<LoadedProcess> {
    let p = DephasingModelParams::default();
    let grid = TimeGrid::new(vec![0., 1., 2., 3.])?;
    let process = discretized_dilation(&p, grid, FIELD_LEVELS)?;
    Ok(LoadedProcess {
        process: process.into(),
        observable: Observable::sigma_x(),
        preparations: PreparationSet::spanning(2),
        expected: Some(ExpectedDoc {
            incoherent: Some(false),
            ncgd: Some(true),
            ..ExpectedDoc::default()
        }),
    })
}
