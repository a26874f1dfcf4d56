use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::ValueEnum;
use serde::Serialize;

use qclassical::check::{
    check_classicality_set, check_eq12_family, check_incoherence, check_invertibility, check_ncgd,
    check_theorem_pipeline, PipelineReport,
};
use qclassical::fuzz::{run_fuzz, FuzzClass};
use qclassical::io::{LoadError, LoadedProcess, ProcessDocument, VerdictDoc};
use qclassical::models::dephasing::{trajectory, DephasingModelParams};
use qclassical::process::markov_from_dilation;
use qclassical::{MarkovProcess, Process};

use crate::builtin;
use crate::output::{json_lines, write_atomic};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, ValueEnum)]
pub enum Check {
    Classical,
    Incoherent,
    Ncgd,
    Invertible,
    Eq12,
    Pipeline,
}

impl Check {
    fn name(self) -> &'static str {
        match self {
            Check::Classical => "classical",
            Check::Incoherent => "incoherent",
            Check::Ncgd => "ncgd",
            Check::Invertible => "invertible",
            Check::Eq12 => "eq12",
            Check::Pipeline => "pipeline",
        }
    }
}

#[derive(Debug)]
pub struct Options {
    pub output: Option<PathBuf>,
    pub tolerance: f64,
    pub checks: Option<Vec<Check>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    Mismatch,
    InputError,
}

impl From<Status> for ExitCode {
    fn from(s: Status) -> Self {
        ExitCode::from(match s {
            Status::Ok => 0,
            Status::Mismatch => 1,
            Status::InputError => 2,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{path}: {source}")]
    Read {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Load { path: String, source: LoadError },
    #[error("{0}")]
    Core(#[from] qclassical::Error),
    #[error("writing {path}: {source}")]
    Write {
        path: String,
        source: std::io::Error,
    },
    #[error("{0}")]
    Usage(String),
}

type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Serialize)]
#[serde(untagged)]
enum ReportLine {
    Verdict(VerdictDoc),
    Pipeline(PipelineDoc),
}

#[derive(Debug, Serialize)]
struct PipelineDoc {
    check: &'static str,
    holds: bool,
    tolerance: f64,
    violations: usize,
    non_degenerate: bool,
    markov: bool,
    invertible: Option<bool>,
    ncgd: Option<bool>,
    classical: Vec<bool>,
    incoherent: Vec<bool>,
    classical_all_preparations: bool,
    incoherent_all_preparations: bool,
    incoherent_diagonal: Option<bool>,
    implications: Vec<ImplicationDoc>,
}

#[derive(Debug, Serialize)]
struct ImplicationDoc {
    name: &'static str,
    premises_met: usize,
    violated: bool,
}

impl PipelineDoc {
    fn new(r: PipelineReport, tolerance: f64) -> Self {
        Self {
            check: "pipeline",
            holds: r.violations() == 0,
            tolerance,
            violations: r.violations(),
            non_degenerate: r.non_degenerate,
            markov: r.markov,
            invertible: r.invertible,
            ncgd: r.ncgd,
            classical: r.classical,
            incoherent: r.incoherent,
            classical_all_preparations: r.classical_all_preparations,
            incoherent_all_preparations: r.incoherent_all_preparations,
            incoherent_diagonal: r.incoherent_diagonal,
            implications: r
                .implications
                .into_iter()
                .map(|i| ImplicationDoc {
                    name: i.name,
                    premises_met: i.premises_met,
                    violated: i.violated,
                })
                .collect(),
        }
    }
}

pub fn check(input: &str, opts: &Options) -> CliResult<Status> {
    let loaded = match builtin::lookup(input) {
        Some(model) => model?,
        None if !Path::new(input).exists() => {
            return Err(CliError::Usage(format!(
                "{input}: no such file or built-in model ({})",
                builtin::NAMES.join(", ")
            )))
        }
        None => load_file(Path::new(input))?,
    };
    evaluate(&loaded, opts)
}

pub fn counterexample(which: usize, export: Option<&Path>, opts: &Options) -> CliResult<Status> {
    let loaded = builtin::counterexample(which)?;
    if let Some(path) = export {
        let doc = ProcessDocument::from_model(
            &loaded.process,
            &loaded.observable,
            &loaded.preparations,
            loaded.expected,
        );
        let mut text = doc.to_json();
        text.push('\n');
        write_atomic(Some(path), &text).map_err(|source| CliError::Write {
            path: path.display().to_string(),
            source,
        })?;
    }
    evaluate(&loaded, opts)
}

fn load_file(path: &Path) -> CliResult<LoadedProcess> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.display().to_string(),
        source,
    })?;
    let load = |source| CliError::Load {
        path: path.display().to_string(),
        source,
    };
    ProcessDocument::from_json(&text)
        .and_then(|doc| doc.load())
        .map_err(load)
}

/// Requested checks in canonical order; by default classicality,
/// incoherence and whatever the document has expectations for.
fn selected(loaded: &LoadedProcess, opts: &Options) -> BTreeSet<Check> {
    match &opts.checks {
        Some(list) => list.iter().copied().collect(),
        None => {
            let mut set = BTreeSet::from([Check::Classical, Check::Incoherent]);
            if let Some(e) = &loaded.expected {
                for c in [Check::Ncgd, Check::Invertible, Check::Eq12] {
                    if e.get(c.name()).is_some() {
                        set.insert(c);
                    }
                }
            }
            set
        }
    }
}

/// The Markov family of a process: its own maps, or those reconstructed from
/// a dilation with a product initial state.
fn markov_family(process: &Process) -> CliResult<std::borrow::Cow<'_, MarkovProcess>> {
    Ok(match process {
        Process::Markov(m) => std::borrow::Cow::Borrowed(m),
        Process::Dilated(d) => std::borrow::Cow::Owned(markov_from_dilation(d)?),
    })
}

fn evaluate(loaded: &LoadedProcess, opts: &Options) -> CliResult<Status> {
    let tol = opts.tolerance;
    let (process, obs, preps) = (&loaded.process, &loaded.observable, &loaded.preparations);
    let mut lines = Vec::new();
    let mut status = Status::Ok;
    for check in selected(loaded, opts) {
        let verdict = match check {
            Check::Classical => check_classicality_set(process, obs, preps, tol)?,
            Check::Incoherent => check_incoherence(process, obs, preps, tol)?,
            Check::Ncgd => check_ncgd(&*markov_family(process)?, obs, tol)?,
            Check::Invertible => check_invertibility(&*markov_family(process)?)?,
            Check::Eq12 => check_eq12_family(&*markov_family(process)?, obs, tol)?,
            Check::Pipeline => {
                let report = check_theorem_pipeline(process, obs, preps, tol)?;
                let doc = PipelineDoc::new(report, tol);
                if !doc.holds {
                    eprintln!("pipeline: {} implication(s) violated", doc.violations);
                    status = Status::Mismatch;
                }
                lines.push(ReportLine::Pipeline(doc));
                continue;
            }
        };
        let expected = loaded.expected.and_then(|e| e.get(check.name()));
        if let Some(e) = expected.filter(|&e| e != verdict.holds) {
            eprintln!("{}: expected {e}, got {}", check.name(), verdict.holds);
            status = Status::Mismatch;
        }
        lines.push(ReportLine::Verdict(VerdictDoc::from(&verdict)));
    }
    emit(opts.output.as_deref(), &json_lines(&lines))?;
    Ok(status)
}

fn emit(path: Option<&Path>, text: &str) -> CliResult<()> {
    write_atomic(path, text).map_err(|source| CliError::Write {
        path: path.map_or("stdout".into(), |p| p.display().to_string()),
        source,
    })
}

pub fn dephasing_model(
    g: f64,
    gamma: f64,
    s: f64,
    x0: f64,
    t_max: f64,
    dt: f64,
    output: Option<&Path>,
) -> CliResult<Status> {
    let p = DephasingModelParams::new(g, gamma, s, x0)?;
    let rows = trajectory(&p, t_max, dt)?;
    let mut csv = String::from("t,x_exact,x_ncgd\n");
    for r in rows {
        csv.push_str(&format!("{},{},{}\n", r.t, r.x_exact, r.x_ncgd));
    }
    emit(output, &csv)?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
struct FuzzDoc {
    class: &'static str,
    seed: u64,
    instances: usize,
    skipped: usize,
    premises_met: usize,
    violations: usize,
    first_violation: Option<usize>,
}

pub fn fuzz(seed: u64, count: usize, opts: &Options) -> CliResult<Status> {
    if let Some(checks) = &opts.checks {
        if checks.iter().any(|&c| c != Check::Pipeline) {
            return Err(CliError::Usage(
                "fuzz only supports --checks pipeline".into(),
            ));
        }
    }
    let mut lines = Vec::new();
    let mut status = Status::Ok;
    for class in FuzzClass::ALL {
        let r = run_fuzz(class, seed, count, opts.tolerance)?;
        if r.violations > 0 {
            eprintln!(
                "{}: {} violation(s), first at instance {:?}",
                class.name(),
                r.violations,
                r.first_violation
            );
            status = Status::Mismatch;
        }
        lines.push(FuzzDoc {
            class: class.name(),
            seed: r.seed,
            instances: r.instances,
            skipped: r.skipped,
            premises_met: r.premises_met,
            violations: r.violations,
            first_violation: r.first_violation,
        });
    }
    emit(opts.output.as_deref(), &json_lines(&lines))?;
    Ok(status)
}
