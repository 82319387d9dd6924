//! Experiment runner: every (algorithm × function × seed) cell of a config,
//! executed on a bounded worker pool, persisted as trace files and reduced
//! to summary, rank and signed-rank tables.
//!
//! Run `k` of every algorithm uses seed `base_seed + k`, and the benchmark
//! shift for a (function, seed) pair is derived from that seed, so runs are
//! paired across algorithms.

pub mod convergence;
pub mod report;
pub mod trace_file;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::benchmarks::{by_name, random_offset, shift, BenchmarkSpec};
use crate::config::{resolve, AlgorithmSettings, ParamMap};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, RngStream};
pub use convergence::{convergence, resample, ConvergenceTable, MedianSeries};
pub use report::{fmt_sci, Report, ReportFormat};
pub use trace_file::{load_dir, CellStatus, TraceFile};

/// Largest per-coordinate shift, as a fraction of the half-range.
pub const SHIFT_FRACTION: f64 = 0.2;
pub const TRACE_DIR: &str = "traces";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    /// D = 10, 10 runs.
    Desk,
    /// D = 50, 25 runs.
    Paper,
}

impl Profile {
    pub fn dimension(&self) -> usize {
        match self {
            Profile::Desk => 10,
            Profile::Paper => 50,
        }
    }

    pub fn runs(&self) -> usize {
        match self {
            Profile::Desk => 10,
            Profile::Paper => 25,
        }
    }
}

impl FromStr for Profile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "desk" => Ok(Profile::Desk),
            "paper" => Ok(Profile::Paper),
            other => Err(Error::Config(format!(
                "unknown profile '{other}' (desk|paper)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgorithmEntry {
    pub name: String,
    /// Distinguishes two entries of the same algorithm; defaults to `name`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(default)]
    pub params: ParamMap,
}

impl AlgorithmEntry {
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            label: None,
            params: ParamMap::new(),
        }
    }

    pub fn label(&self) -> &str {
        self.label.as_deref().unwrap_or(&self.name)
    }
}

/// Experiment description as read from a TOML file. Missing `dimension` and
/// `runs` come from the profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub algorithms: Vec<AlgorithmEntry>,
    pub functions: Vec<String>,
    pub dimension: Option<usize>,
    pub runs: Option<usize>,
    pub budget_multiplier: Option<u64>,
    pub base_seed: Option<u64>,
    pub parallelism: Option<usize>,
    pub output_dir: Option<PathBuf>,
    pub reference: Option<String>,
    pub shift: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub algorithms: Vec<AlgorithmEntry>,
    pub functions: Vec<String>,
    pub dimension: usize,
    pub runs: usize,
    /// `nfe_max = budget_multiplier × dimension`.
    pub budget_multiplier: u64,
    pub base_seed: u64,
    pub parallelism: usize,
    pub output_dir: PathBuf,
    /// Algorithm label every other algorithm is tested against.
    pub reference: Option<String>,
    /// Randomly translate each benchmark per (function, seed).
    pub shift: bool,
}

impl ExperimentConfig {
    pub fn from_file(file: ExperimentFile, profile: Profile) -> Result<Self> {
        let config = Self {
            algorithms: file.algorithms,
            functions: file.functions,
            dimension: file.dimension.unwrap_or(profile.dimension()),
            runs: file.runs.unwrap_or(profile.runs()),
            budget_multiplier: file.budget_multiplier.unwrap_or(3000),
            base_seed: file.base_seed.unwrap_or(0),
            parallelism: file.parallelism.unwrap_or(1),
            output_dir: file.output_dir.unwrap_or_else(|| PathBuf::from("results")),
            reference: file.reference,
            shift: file.shift.unwrap_or(true),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_toml(text: &str, profile: Profile) -> Result<Self> {
        let file: ExperimentFile =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        Self::from_file(file, profile)
    }

    pub fn load(path: &Path, profile: Profile) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text, profile)
    }

    pub fn nfe_max(&self) -> u64 {
        self.budget_multiplier * self.dimension as u64
    }

    /// The reference label: explicit, else `hms-os` when present.
    pub fn reference_label(&self) -> Option<String> {
        self.reference.clone().or_else(|| {
            self.algorithms
                .iter()
                .find(|a| a.label() == "hms-os")
                .map(|a| a.label().to_string())
        })
    }

    /// Resolves every name; nothing runs until this passes.
    pub fn resolved_algorithms(&self) -> Result<Vec<(String, AlgorithmSettings)>> {
        self.algorithms
            .iter()
            .map(|a| {
                let mut s = resolve(&a.name, &a.params)?;
                s.set_nfe_max(self.nfe_max());
                Ok((a.label().to_string(), s))
            })
            .collect()
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.algorithms.is_empty() || self.functions.is_empty() {
            return fail("need at least one algorithm and one function".into());
        }
        if self.dimension < 2 {
            return fail(format!(
                "dimension must be at least 2, got {}",
                self.dimension
            ));
        }
        if self.runs == 0 || self.parallelism == 0 || self.budget_multiplier == 0 {
            return fail("runs, parallelism and budget_multiplier must be positive".into());
        }
        let mut labels: Vec<&str> = self.algorithms.iter().map(|a| a.label()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return fail("algorithm labels must be unique".into());
        }
        let mut fns = self.functions.clone();
        fns.sort_unstable();
        if fns.windows(2).any(|w| w[0] == w[1]) {
            return fail("functions must be unique".into());
        }
        for f in &self.functions {
            by_name(f, self.dimension)?;
        }
        if let Some(r) = &self.reference {
            if !self.algorithms.iter().any(|a| a.label() == r) {
                return fail(format!("reference '{r}' is not one of the algorithms"));
            }
        }
        for label in labels {
            if label.contains("__") || label.contains('/') {
                return fail(format!("label '{label}' may not contain '__' or '/'"));
            }
        }
        self.resolved_algorithms().map(|_| ())
    }

    /// SHA-256 over the canonical JSON of everything that affects results
    /// (worker count and output location excluded).
    pub fn fingerprint(&self) -> Result<String> {
        #[derive(Serialize)]
        struct Canonical<'a> {
            algorithms: Vec<(String, String, ParamMap)>,
            functions: &'a [String],
            dimension: usize,
            runs: usize,
            budget_multiplier: u64,
            base_seed: u64,
            reference: Option<String>,
            shift: bool,
        }
        let algorithms = self
            .algorithms
            .iter()
            .zip(self.resolved_algorithms()?)
            .map(|(a, (label, s))| (label, a.name.clone(), s.params()))
            .collect();
        let canonical = Canonical {
            algorithms,
            functions: &self.functions,
            dimension: self.dimension,
            runs: self.runs,
            budget_multiplier: self.budget_multiplier,
            base_seed: self.base_seed,
            reference: self.reference_label(),
            shift: self.shift,
        };
        let json = serde_json::to_vec(&canonical).map_err(|e| Error::Config(e.to_string()))?;
        Ok(hex::encode(Sha256::digest(&json)))
    }

    pub fn trace_dir(&self) -> PathBuf {
        self.output_dir.join(TRACE_DIR)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Cell {
    algorithm: usize,
    function: usize,
    run: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutcome {
    pub cells: usize,
    pub failed: usize,
    pub report: Report,
    pub written: Vec<PathBuf>,
}

/// The benchmark instance a cell with this seed optimizes: the named
/// function, shifted by an offset drawn from a stream derived from the seed
/// and the function name when `shifted`.
pub fn cell_problem(
    function: &str,
    dimension: usize,
    seed: u64,
    shifted: bool,
) -> Result<BenchmarkSpec> {
    let spec = by_name(function, dimension)?;
    if !shifted {
        return Ok(spec);
    }
    let mut rng = RngStream::new(derive_seed(seed, function));
    let offset = random_offset(&spec, SHIFT_FRACTION, &mut rng);
    shift(&spec, &offset)
}

/// Runs one cell and returns its persisted form. Evaluator failures and
/// panics become `status=failed`.
fn run_cell(
    config: &ExperimentConfig,
    settings: &[(String, AlgorithmSettings)],
    fingerprint: &str,
    reference: &Option<String>,
    cell: Cell,
) -> TraceFile {
    let (label, algorithm) = &settings[cell.algorithm];
    let function = &config.functions[cell.function];
    let seed = config.base_seed.wrapping_add(cell.run as u64);

    let outcome = catch_unwind(AssertUnwindSafe(|| -> Result<_> {
        let spec = cell_problem(function, config.dimension, seed, config.shift)?;
        let problem = spec.to_problem();
        let trace = algorithm.run(&problem, seed)?;
        Ok((trace, spec.optimum_value))
    }));

    let mut file = TraceFile {
        fingerprint: fingerprint.to_string(),
        algorithm: label.clone(),
        algorithm_index: cell.algorithm,
        function: function.clone(),
        function_index: cell.function,
        reference: reference.clone(),
        dimension: config.dimension,
        seed,
        nfe_max: config.nfe_max(),
        optimum_value: 0.0,
        status: CellStatus::Failed {
            message: String::new(),
        },
        records: Vec::new(),
    };
    match outcome {
        Ok(Ok((trace, optimum))) => {
            file.optimum_value = optimum;
            file.status = CellStatus::Ok {
                final_error: trace.final_value() - optimum,
            };
            file.records = trace.records;
        }
        Ok(Err(e)) => {
            file.status = CellStatus::Failed {
                message: e.to_string(),
            }
        }
        Err(_) => {
            file.status = CellStatus::Failed {
                message: "optimizer panicked".into(),
            }
        }
    }
    file
}

/// Executes every cell, writes one trace per cell under
/// `output_dir/traces`, then the CSV and JSON reports under `output_dir`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    use rayon::prelude::*;

    config.validate()?;
    let settings = config.resolved_algorithms()?;
    let fingerprint = config.fingerprint()?;
    let reference = config.reference_label();
    let trace_dir = config.trace_dir();
    std::fs::create_dir_all(&trace_dir)?;

    let cells: Vec<Cell> = (0..config.algorithms.len())
        .flat_map(|a| {
            (0..config.functions.len()).flat_map(move |f| {
                (0..config.runs).map(move |r| Cell {
                    algorithm: a,
                    function: f,
                    run: r,
                })
            })
        })
        .collect();

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.parallelism)
        .build()
        .map_err(|e| Error::Config(format!("cannot build worker pool: {e}")))?;
    let results: Vec<Result<bool>> = pool.install(|| {
        cells
            .par_iter()
            .map(|&cell| {
                let file = run_cell(config, &settings, &fingerprint, &reference, cell);
                file.write_atomic(&trace_dir)?;
                Ok(file.final_error().is_none())
            })
            .collect()
    });
    let mut failed = 0;
    for r in results {
        if r? {
            failed += 1;
        }
    }

    let (report, written) = report_from_dir(&trace_dir, &config.output_dir)?;
    Ok(ExperimentOutcome {
        cells: cells.len(),
        failed,
        report,
        written,
    })
}

/// Rebuilds the reports from a trace directory and writes both the CSV
/// tables and the JSON mirror into `out_dir`.
pub fn report_from_dir(trace_dir: &Path, out_dir: &Path) -> Result<(Report, Vec<PathBuf>)> {
    let traces = load_dir(trace_dir)?;
    let report = Report::from_traces(&traces)?;
    let mut written = report.write(out_dir, ReportFormat::Csv)?;
    written.extend(report.write(out_dir, ReportFormat::Json)?);
    Ok((report, written))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
functions = ["sphere", "rastrigin"]
dimension = 2
runs = 3
budget_multiplier = 100
base_seed = 5

[[algorithms]]
name = "hms-os"

[[algorithms]]
name = "hms"
params = { c = 1.0, m_high = 4 }
"#;

    #[test]
    fn parses_and_fills_profile_defaults() {
        let c = ExperimentConfig::from_toml(SMALL, Profile::Desk).unwrap();
        assert_eq!(c.nfe_max(), 200);
        assert_eq!(c.parallelism, 1);
        assert_eq!(c.reference_label().as_deref(), Some("hms-os"));
        let bare = "functions = [\"sphere\"]\n[[algorithms]]\nname = \"gwo\"\n";
        let d = ExperimentConfig::from_toml(bare, Profile::Desk).unwrap();
        assert_eq!((d.dimension, d.runs, d.nfe_max()), (10, 10, 30_000));
        let p = ExperimentConfig::from_toml(bare, Profile::Paper).unwrap();
        assert_eq!((p.dimension, p.runs), (50, 25));
    }

    #[test]
    fn unknown_names_rejected_up_front() {
        let bad_fn = SMALL.replace("\"rastrigin\"", "\"f7\"");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad_fn, Profile::Desk),
            Err(Error::Config(_))
        ));
        let bad_alg = SMALL.replace("name = \"hms\"", "name = \"woa\"");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad_alg, Profile::Desk),
            Err(Error::Config(_))
        ));
        let bad_key = format!("{SMALL}\ncolour = 1\n");
        assert!(matches!(
            ExperimentConfig::from_toml(&bad_key, Profile::Desk),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn fingerprint_ignores_parallelism() {
        let a = ExperimentConfig::from_toml(SMALL, Profile::Desk).unwrap();
        let mut b = a.clone();
        b.parallelism = 8;
        b.output_dir = PathBuf::from("elsewhere");
        assert_eq!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
        b.base_seed = 6;
        assert_ne!(a.fingerprint().unwrap(), b.fingerprint().unwrap());
    }
}
