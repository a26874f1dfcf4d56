//! JSON documents for processes, channels, observables and verdicts.
//!
//! Complex numbers are `[re, im]` pairs and matrices nested row-major arrays.
//! Parsing is strict (unknown fields are rejected) and floats round-trip
//! bit-exactly. Semantic errors carry the path of the offending node, e.g.
//! `maps[1].matrix`.

use serde::{Deserialize, Serialize};

use crate::channel::{Intervention, Observable, Outcome, Superoperator};
use crate::check::{PreparationSet, Verdict, WitnessValue};
use crate::error::Error;
use crate::linalg::{self, ComplexMatrix, DensityMatrix};
use crate::process::{DilatedProcess, MarkovProcess, Process, TimeGrid};

pub type MatrixDoc = Vec<Vec<[f64; 2]>>;

#[derive(Debug, thiserror::Error)]
pub enum LoadError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Invalid { path: String, source: Error },
}

impl From<serde_json::Error> for LoadError {
    fn from(e: serde_json::Error) -> Self {
        LoadError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}

fn at(path: impl Into<String>) -> impl FnOnce(Error) -> LoadError {
    let path = path.into();
    move |source| LoadError::Invalid { path, source }
}

pub fn matrix_to_doc(m: &ComplexMatrix) -> MatrixDoc {
    (0..m.nrows())
        .map(|i| {
            (0..m.ncols())
                .map(|j| [m[(i, j)].re, m[(i, j)].im])
                .collect()
        })
        .collect()
}

pub fn matrix_from_doc(doc: &MatrixDoc) -> crate::Result<ComplexMatrix> {
    let rows = doc.len();
    let cols = doc.first().map_or(0, Vec::len);
    if rows == 0 || cols == 0 {
        return Err(Error::Dimension("empty matrix".into()));
    }
    if let Some(i) = doc.iter().position(|r| r.len() != cols) {
        return Err(Error::Dimension(format!(
            "row {i} has {} entries, row 0 has {cols}",
            doc[i].len()
        )));
    }
    Ok(ComplexMatrix::from_fn(rows, cols, |i, j| {
        linalg::c(doc[i][j][0], doc[i][j][1])
    }))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuperoperatorDoc {
    pub dim_in: usize,
    pub dim_out: usize,
    pub matrix: MatrixDoc,
    pub cp: bool,
    pub tp: bool,
}

impl SuperoperatorDoc {
    pub fn from_model(s: &Superoperator) -> Self {
        Self {
            dim_in: s.dim_in(),
            dim_out: s.dim_out(),
            matrix: matrix_to_doc(s.matrix()),
            cp: s.is_flagged_cp(),
            tp: s.is_flagged_tp(),
        }
    }

    /// Builds the map; flags claimed `true` are verified.
    pub fn to_model(&self, path: &str) -> Result<Superoperator, LoadError> {
        let m = matrix_from_doc(&self.matrix).map_err(at(format!("{path}.matrix")))?;
        let s = Superoperator::new(self.dim_in, self.dim_out, m, self.cp, self.tp)
            .map_err(at(format!("{path}.matrix")))?;
        let tol = 1e-9;
        if self.cp && !s.is_cp(tol) {
            return Err(at(path)(Error::InvalidChannel(format!(
                "flagged CP but Choi matrix has eigenvalue {:e}",
                s.choi_min_eigenvalue()
            ))));
        }
        if self.tp && !s.is_tp(tol) {
            return Err(at(path)(Error::InvalidChannel(format!(
                "flagged TP but trace defect is {:e}",
                s.trace_defect()
            ))));
        }
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutcomeDoc {
    pub eigenvalue: f64,
    pub projector: MatrixDoc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableDoc {
    pub outcomes: Vec<OutcomeDoc>,
}

impl ObservableDoc {
    pub fn from_model(o: &Observable) -> Self {
        Self {
            outcomes: o
                .outcomes()
                .iter()
                .map(|x| OutcomeDoc {
                    eigenvalue: x.eigenvalue,
                    projector: matrix_to_doc(&x.projector),
                })
                .collect(),
        }
    }

    pub fn to_model(&self, path: &str) -> Result<Observable, LoadError> {
        let outcomes = self
            .outcomes
            .iter()
            .enumerate()
            .map(|(r, o)| {
                let projector = matrix_from_doc(&o.projector)
                    .map_err(at(format!("{path}.outcomes[{r}].projector")))?;
                Ok(Outcome {
                    eigenvalue: o.eigenvalue,
                    projector,
                })
            })
            .collect::<Result<Vec<_>, LoadError>>()?;
        Observable::new(outcomes).map_err(at(path))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum InterventionDoc {
    Identity,
    Map { map: SuperoperatorDoc },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PreparationsDoc {
    Single {
        intervention: InterventionDoc,
    },
    /// The built-in spanning set of replacement channels.
    Spanning,
    BasisSpanning {
        maps: Vec<SuperoperatorDoc>,
    },
    AllDiagonal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessKind {
    Dilated,
    Markov,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Dims {
    pub system: usize,
    #[serde(default = "one")]
    pub environment: usize,
}

fn one() -> usize {
    1
}

/// Verdicts a document expects, keyed by check name.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExpectedDoc {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classical: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub incoherent: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ncgd: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub invertible: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eq12: Option<bool>,
}

impl ExpectedDoc {
    pub fn get(&self, check: &str) -> Option<bool> {
        match check {
            "classical" => self.classical,
            "incoherent" => self.incoherent,
            "ncgd" => self.ncgd,
            "invertible" => self.invertible,
            "eq12" => self.eq12,
            _ => None,
        }
    }
}

/// A process with the observable and preparations to check it against.
///
/// `observables` holds exactly one observable, measured at every grid time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProcessDocument {
    #[serde(rename = "type")]
    pub kind: ProcessKind,
    pub dims: Dims,
    pub times: Vec<f64>,
    pub initial_state: MatrixDoc,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitaries: Option<Vec<MatrixDoc>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub maps: Option<Vec<SuperoperatorDoc>>,
    pub observables: Vec<ObservableDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preparations: Option<PreparationsDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expected: Option<ExpectedDoc>,
}

/// A validated [`ProcessDocument`].
#[derive(Debug, Clone, PartialEq)]
pub struct LoadedProcess {
    pub process: Process,
    pub observable: Observable,
    pub preparations: PreparationSet,
    pub expected: Option<ExpectedDoc>,
}

impl ProcessDocument {
    pub fn from_json(text: &str) -> Result<Self, LoadError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("documents serialize")
    }

    pub fn from_model(
        process: &Process,
        observable: &Observable,
        preparations: &PreparationSet,
        expected: Option<ExpectedDoc>,
    ) -> Self {
        let (kind, dims, initial, unitaries, maps) = match process {
            Process::Dilated(p) => (
                ProcessKind::Dilated,
                Dims {
                    system: p.dim_s(),
                    environment: p.dim_e(),
                },
                p.initial().matrix(),
                Some(p.unitaries().iter().map(matrix_to_doc).collect()),
                None,
            ),
            Process::Markov(p) => (
                ProcessKind::Markov,
                Dims {
                    system: p.dim_s(),
                    environment: 1,
                },
                p.initial().matrix(),
                None,
                Some(p.maps().iter().map(SuperoperatorDoc::from_model).collect()),
            ),
        };
        let intervention = |i: &Intervention| match i {
            Intervention::Map(m) => InterventionDoc::Map {
                map: SuperoperatorDoc::from_model(m),
            },
            _ => InterventionDoc::Identity,
        };
        let preparations = match preparations {
            PreparationSet::Single(i) => PreparationsDoc::Single {
                intervention: intervention(i),
            },
            p if *p == PreparationSet::spanning(process.dim_s()) => PreparationsDoc::Spanning,
            PreparationSet::BasisSpanning(ps) => PreparationsDoc::BasisSpanning {
                maps: ps
                    .iter()
                    .filter_map(|i| match i {
                        Intervention::Map(m) => Some(SuperoperatorDoc::from_model(m)),
                        _ => None,
                    })
                    .collect(),
            },
            PreparationSet::AllDiagonal => PreparationsDoc::AllDiagonal,
        };
        Self {
            kind,
            dims,
            times: process.grid().times().to_vec(),
            initial_state: matrix_to_doc(initial),
            unitaries,
            maps,
            observables: vec![ObservableDoc::from_model(observable)],
            preparations: Some(preparations),
            expected,
        }
    }

    pub fn load(&self) -> Result<LoadedProcess, LoadError> {
        let Dims {
            system: ds,
            environment: de,
        } = self.dims;
        if ds == 0 || de == 0 {
            return Err(at("dims")(Error::Dimension(
                "dimensions must be positive".into(),
            )));
        }
        let grid = TimeGrid::new(self.times.clone()).map_err(at("times"))?;
        let initial = matrix_from_doc(&self.initial_state).map_err(at("initial_state"))?;
        let n = ds * de;
        if initial.shape() != (n, n) {
            return Err(at("initial_state")(Error::Dimension(format!(
                "expected {n}x{n}, got {}x{}",
                initial.nrows(),
                initial.ncols()
            ))));
        }
        let initial = DensityMatrix::new(initial).map_err(at("initial_state"))?;

        let process: Process = match self.kind {
            ProcessKind::Dilated => {
                if self.maps.is_some() {
                    return Err(at("maps")(Error::InvalidParameters(
                        "a dilated process takes `unitaries`".into(),
                    )));
                }
                let docs = self
                    .unitaries
                    .as_ref()
                    .ok_or_else(|| at("unitaries")(Error::InvalidParameters("missing".into())))?;
                let mut us = Vec::with_capacity(docs.len());
                for (k, d) in docs.iter().enumerate() {
                    let path = format!("unitaries[{k}]");
                    let u = matrix_from_doc(d).map_err(at(path.clone()))?;
                    if u.shape() != (n, n) {
                        return Err(at(path)(Error::Dimension(format!(
                            "expected {n}x{n}, got {}x{}",
                            u.nrows(),
                            u.ncols()
                        ))));
                    }
                    let defect = linalg::unitarity_defect(&u);
                    if defect > 1e-10 {
                        return Err(at(path)(Error::NotUnitary { deviation: defect }));
                    }
                    us.push(u);
                }
                DilatedProcess::new(ds, de, initial, us, grid)
                    .map_err(at("unitaries"))?
                    .into()
            }
            ProcessKind::Markov => {
                if self.unitaries.is_some() {
                    return Err(at("unitaries")(Error::InvalidParameters(
                        "a Markov process takes `maps`".into(),
                    )));
                }
                if de != 1 {
                    return Err(at("dims.environment")(Error::Dimension(
                        "a Markov process has no environment".into(),
                    )));
                }
                let docs = self
                    .maps
                    .as_ref()
                    .ok_or_else(|| at("maps")(Error::InvalidParameters("missing".into())))?;
                let mut maps = Vec::with_capacity(docs.len());
                for (k, d) in docs.iter().enumerate() {
                    let path = format!("maps[{k}]");
                    if d.dim_in != ds || d.dim_out != ds {
                        return Err(at(path)(Error::Dimension(format!(
                            "map is {}->{}, system dimension is {ds}",
                            d.dim_in, d.dim_out
                        ))));
                    }
                    let m = d.to_model(&path)?;
                    if !m.is_flagged_cp() || !m.is_flagged_tp() {
                        return Err(at(path)(Error::InvalidChannel(
                            "Markov maps must be flagged CP and TP".into(),
                        )));
                    }
                    maps.push(m);
                }
                MarkovProcess::new(initial, maps, grid)
                    .map_err(at("maps"))?
                    .into()
            }
        };

        if self.observables.len() != 1 {
            return Err(at("observables")(Error::InvalidObservable(format!(
                "expected exactly one observable, got {}",
                self.observables.len()
            ))));
        }
        let observable = self.observables[0].to_model("observables[0]")?;
        if observable.dim() != ds {
            return Err(at("observables[0]")(Error::Dimension(format!(
                "observable acts on dimension {}, system has {ds}",
                observable.dim()
            ))));
        }

        let prep_map = |doc: &SuperoperatorDoc, path: String| -> Result<Intervention, LoadError> {
            if doc.dim_in != ds || doc.dim_out != ds {
                return Err(at(path)(Error::Dimension(format!(
                    "preparation must act on dimension {ds}"
                ))));
            }
            let m = doc.to_model(&path)?;
            if !m.is_flagged_tp() {
                return Err(at(path)(Error::InvalidChannel(
                    "preparations must be trace preserving".into(),
                )));
            }
            Ok(Intervention::Map(m))
        };
        let preparations = match &self.preparations {
            None
            | Some(PreparationsDoc::Single {
                intervention: InterventionDoc::Identity,
            }) => PreparationSet::Single(Intervention::Identity),
            Some(PreparationsDoc::Single {
                intervention: InterventionDoc::Map { map },
            }) => PreparationSet::Single(prep_map(map, "preparations.intervention.map".into())?),
            Some(PreparationsDoc::Spanning) => PreparationSet::spanning(ds),
            Some(PreparationsDoc::BasisSpanning { maps }) => {
                let set = PreparationSet::BasisSpanning(
                    maps.iter()
                        .enumerate()
                        .map(|(k, m)| prep_map(m, format!("preparations.maps[{k}]")))
                        .collect::<Result<_, _>>()?,
                );
                let rho_s = match &process {
                    Process::Dilated(p) => p.marginals().0,
                    Process::Markov(p) => p.initial().matrix().clone(),
                };
                set.check_spanning(&rho_s).map_err(at("preparations"))?;
                set
            }
            Some(PreparationsDoc::AllDiagonal) => {
                if self.kind != ProcessKind::Markov {
                    return Err(at("preparations")(Error::Unsupported(
                        "diagonal preparations need a Markov process".into(),
                    )));
                }
                PreparationSet::AllDiagonal
            }
        };

        Ok(LoadedProcess {
            process,
            observable,
            preparations,
            expected: self.expected,
        })
    }
}

/// Serialized form of a [`Verdict`]; the witness is present iff the check
/// failed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerdictDoc {
    pub check: String,
    pub holds: bool,
    pub tolerance: f64,
    pub max_violation: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<WitnessDoc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WitnessDoc {
    pub pattern: Vec<String>,
    pub reference: Vec<String>,
    pub lhs: ValueDoc,
    pub rhs: ValueDoc,
    pub distance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub preparation: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ValueDoc {
    Scalar(f64),
    Matrix(MatrixDoc),
}

impl From<&Verdict> for VerdictDoc {
    fn from(v: &Verdict) -> Self {
        let value = |w: &WitnessValue| match w {
            WitnessValue::Scalar(x) => ValueDoc::Scalar(*x),
            WitnessValue::Matrix(m) => ValueDoc::Matrix(matrix_to_doc(m)),
        };
        Self {
            check: v.check.clone(),
            holds: v.holds,
            tolerance: v.tolerance,
            max_violation: v.max_violation,
            witness: v.witness.as_ref().map(|w| WitnessDoc {
                pattern: w.pattern.clone(),
                reference: w.reference.clone(),
                lhs: value(&w.lhs),
                rhs: value(&w.rhs),
                distance: w.distance,
                preparation: w.preparation,
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::counterexamples::build_counterexample;

    #[test]
    fn counterexamples_round_trip() {
        for id in 1..=3 {
            let ce = build_counterexample(id).unwrap();
            let doc =
                ProcessDocument::from_model(&ce.process, &ce.observable, &ce.preparations, None);
            let text = doc.to_json();
            let back = ProcessDocument::from_json(&text).unwrap();
            assert_eq!(back, doc);
            let loaded = back.load().unwrap();
            assert_eq!(loaded.process, ce.process);
            assert_eq!(loaded.observable, ce.observable);
            assert_eq!(loaded.preparations, ce.preparations);
        }
    }

    #[test]
    fn syntax_errors_carry_position() {
        let err = ProcessDocument::from_json("{\n  \"type\": \"markov\",\n  oops\n}").unwrap_err();
        match err {
            LoadError::Syntax { line, column, .. } => assert_eq!((line, column), (3, 3)),
            other => panic!("{other}"),
        }
        assert!(matches!(
            ProcessDocument::from_json(r#"{"type":"markov","extra":1}"#),
            Err(LoadError::Syntax { .. })
        ));
    }

    #[test]
    fn dimension_errors_carry_path() {
        let ce = build_counterexample(2).unwrap();
        let mut doc =
            ProcessDocument::from_model(&ce.process, &ce.observable, &ce.preparations, None);
        doc.maps.as_mut().unwrap()[1].matrix.pop();
        match doc.load().unwrap_err() {
            LoadError::Invalid {
                path,
                source: Error::Dimension(_),
            } => assert_eq!(path, "maps[1].matrix"),
            other => panic!("{other}"),
        }
    }

    #[test]
    fn ragged_matrix_rejected() {
        let doc: MatrixDoc = vec![vec![[1., 0.], [0., 0.]], vec![[0., 0.]]];
        assert!(matches!(matrix_from_doc(&doc), Err(Error::Dimension(_))));
    }

    #[test]
    fn false_cp_claim_rejected() {
        let transpose =
            Superoperator::<f64>::from_linear_map(2, 2, false, true, |m| m.transpose()).unwrap();
        let mut doc = SuperoperatorDoc::from_model(&transpose);
        assert!(doc.to_model("m").is_ok());
        doc.cp = true;
        assert!(matches!(doc.to_model("m"), Err(LoadError::Invalid { .. })));
    }
}
