//! Summary, rank and signed-rank tables computed from persisted traces.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::trace_file::{write_atomic, TraceFile};
use crate::error::{Error, Result};
use crate::stats::{mean, sample_std, summarize, wilcoxon_signed_rank, CellErrors, WilcoxonResult};

/// Formats like C's `%.6e` (`1.234568e-05`, `-2.000000e+00`).
pub fn fmt_sci(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    // -0.0 prints as "-0.000000e+00" otherwise
    let x = if x == 0.0 { 0.0 } else { x };
    let s = format!("{x:.6e}");
    let (mantissa, exp) = s.split_once('e').expect("LowerExp always has an exponent");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".to_string(), fmt_sci)
}

/// The value a reader of the CSV sees, so JSON and CSV agree exactly.
fn rounded(x: Option<f64>) -> Option<f64> {
    x.map(|v| fmt_sci(v).parse().unwrap_or(v))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellSummary {
    pub function: String,
    pub algorithm: String,
    pub runs: usize,
    pub failed: usize,
    pub mean_error: Option<f64>,
    pub std_error: Option<f64>,
    pub rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RankRow {
    pub algorithm: String,
    pub average_rank: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonRow {
    pub reference: String,
    pub algorithm: String,
    /// (function, seed) pairs where both runs succeeded.
    pub pairs: usize,
    pub result: Option<WilcoxonResult>,
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub algorithms: Vec<String>,
    pub functions: Vec<String>,
    pub reference: Option<String>,
    pub summary: Vec<CellSummary>,
    pub ranks: Vec<RankRow>,
    pub wilcoxon: Vec<WilcoxonRow>,
    pub warnings: Vec<String>,
}

fn ordered_names(traces: &[TraceFile], key: impl Fn(&TraceFile) -> (usize, &str)) -> Vec<String> {
    let mut pairs: Vec<(usize, String)> = traces
        .iter()
        .map(|t| {
            let (i, n) = key(t);
            (i, n.to_string())
        })
        .collect();
    pairs.sort();
    pairs.dedup();
    pairs.into_iter().map(|(_, n)| n).collect()
}

impl Report {
    /// Builds every table from the traces alone.
    pub fn from_traces(traces: &[TraceFile]) -> Result<Self> {
        if traces.is_empty() {
            return Err(Error::Report("no traces to report on".into()));
        }
        let algorithms = ordered_names(traces, |t| (t.algorithm_index, t.algorithm.as_str()));
        let functions = ordered_names(traces, |t| (t.function_index, t.function.as_str()));
        let reference = traces.iter().find_map(|t| t.reference.clone());
        let mut warnings = Vec::new();

        let errors_of = |algorithm: &str, function: &str| -> (Vec<f64>, usize) {
            let mut ok = Vec::new();
            let mut failed = 0;
            for t in traces
                .iter()
                .filter(|t| t.algorithm == algorithm && t.function == function)
            {
                match t.final_error() {
                    Some(e) => ok.push(e),
                    None => failed += 1,
                }
            }
            (ok, failed)
        };

        // Ranks only over functions where every algorithm has a result.
        let mut complete = Vec::new();
        for f in &functions {
            let cells: Vec<CellErrors> = algorithms
                .iter()
                .map(|a| CellErrors {
                    algorithm: a.clone(),
                    function: f.clone(),
                    errors: errors_of(a, f).0,
                })
                .collect();
            if cells.iter().all(|c| !c.errors.is_empty()) {
                complete.extend(cells);
            } else {
                warnings.push(format!(
                    "function '{f}' has an algorithm without successful runs; excluded from ranks"
                ));
            }
        }
        let ranked = if complete.is_empty() {
            None
        } else {
            Some(summarize(&complete)?)
        };

        let mut summary = Vec::new();
        for f in &functions {
            for a in &algorithms {
                let (ok, failed) = errors_of(a, f);
                if failed > 0 {
                    warnings.push(format!("{failed} failed run(s) for '{a}' on '{f}'"));
                }
                let rank = ranked.as_ref().and_then(|s| {
                    s.rows
                        .iter()
                        .find(|r| &r.algorithm == a && &r.function == f)
                        .map(|r| r.rank)
                });
                summary.push(CellSummary {
                    function: f.clone(),
                    algorithm: a.clone(),
                    runs: ok.len(),
                    failed,
                    mean_error: rounded((!ok.is_empty()).then(|| mean(&ok))),
                    std_error: rounded(sample_std(&ok)),
                    rank,
                });
            }
        }
        let ranks = algorithms
            .iter()
            .map(|a| RankRow {
                algorithm: a.clone(),
                average_rank: rounded(ranked.as_ref().and_then(|s| {
                    s.average_ranks
                        .iter()
                        .find(|(n, _)| n == a)
                        .map(|(_, r)| *r)
                })),
            })
            .collect();

        let mut wilcoxon = Vec::new();
        if let Some(reference) = &reference {
            for a in algorithms.iter().filter(|a| *a != reference) {
                let (mut xs, mut ys) = (Vec::new(), Vec::new());
                for t in traces.iter().filter(|t| &t.algorithm == reference) {
                    let partner = traces.iter().find(|o| {
                        &o.algorithm == a && o.function == t.function && o.seed == t.seed
                    });
                    if let (Some(x), Some(y)) =
                        (t.final_error(), partner.and_then(TraceFile::final_error))
                    {
                        xs.push(x);
                        ys.push(y);
                    }
                }
                let (result, note) = match wilcoxon_signed_rank(&xs, &ys) {
                    Ok(mut r) => {
                        r.w_statistic = rounded(Some(r.w_statistic)).unwrap();
                        r.p_value = rounded(Some(r.p_value)).unwrap();
                        (Some(r), None)
                    }
                    Err(e) => (None, Some(e.to_string())),
                };
                wilcoxon.push(WilcoxonRow {
                    reference: reference.clone(),
                    algorithm: a.clone(),
                    pairs: xs.len(),
                    result,
                    note,
                });
            }
        }

        Ok(Self {
            algorithms,
            functions,
            reference,
            summary,
            ranks,
            wilcoxon,
            warnings,
        })
    }

    pub fn summary_csv(&self) -> String {
        let mut s = String::from("function,algorithm,runs,failed,mean_error,std_error,rank\n");
        for r in &self.summary {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.function,
                r.algorithm,
                r.runs,
                r.failed,
                fmt_opt(r.mean_error),
                fmt_opt(r.std_error),
                fmt_opt(r.rank)
            );
        }
        s
    }

    pub fn ranks_csv(&self) -> String {
        let mut s = String::from("algorithm,average_rank\n");
        for r in &self.ranks {
            let _ = writeln!(s, "{},{}", r.algorithm, fmt_opt(r.average_rank));
        }
        s
    }

    pub fn wilcoxon_csv(&self) -> String {
        let mut s =
            String::from("reference,algorithm,pairs,n_effective,w_statistic,p_value,method\n");
        for r in &self.wilcoxon {
            match &r.result {
                Some(w) => {
                    let _ = writeln!(
                        s,
                        "{},{},{},{},{},{},{}",
                        r.reference,
                        r.algorithm,
                        r.pairs,
                        w.n_effective,
                        fmt_sci(w.w_statistic),
                        fmt_sci(w.p_value),
                        w.method.as_str()
                    );
                }
                None => {
                    let _ = writeln!(
                        s,
                        "{},{},{},n/a,n/a,n/a,n/a",
                        r.reference, r.algorithm, r.pairs
                    );
                }
            }
        }
        s
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    /// Writes `summary.csv`, `ranks.csv`, `wilcoxon.csv` or `report.json`
    /// into `dir`, returning the paths written.
    pub fn write(&self, dir: &Path, format: ReportFormat) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let files: Vec<(&str, String)> = match format {
            ReportFormat::Csv => vec![
                ("summary.csv", self.summary_csv()),
                ("ranks.csv", self.ranks_csv()),
                ("wilcoxon.csv", self.wilcoxon_csv()),
            ],
            ReportFormat::Json => vec![("report.json", self.to_json())],
        };
        let mut written = Vec::new();
        for (name, body) in files {
            let path = dir.join(name);
            write_atomic(&path, body.as_bytes())?;
            written.push(path);
        }
        Ok(written)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::trace_file::CellStatus;

    #[test]
    fn printf_style_scientific() {
        assert_eq!(fmt_sci(0.0), "0.000000e+00");
        assert_eq!(fmt_sci(1.0), "1.000000e+00");
        assert_eq!(fmt_sci(-2.5), "-2.500000e+00");
        assert_eq!(fmt_sci(1.234_567_89e-5), "1.234568e-05");
        assert_eq!(fmt_sci(6.02e23), "6.020000e+23");
        assert_eq!(fmt_sci(1e-300), "1.000000e-300");
        assert_eq!(fmt_sci(-0.0), "0.000000e+00");
    }

    fn trace(alg: &str, ai: usize, f: &str, fi: usize, seed: u64, err: Option<f64>) -> TraceFile {
        TraceFile {
            fingerprint: "x".into(),
            algorithm: alg.into(),
            algorithm_index: ai,
            function: f.into(),
            function_index: fi,
            reference: Some("a".into()),
            dimension: 2,
            seed,
            nfe_max: 100,
            optimum_value: 0.0,
            status: match err {
                Some(e) => CellStatus::Ok { final_error: e },
                None => CellStatus::Failed {
                    message: "x".into(),
                },
            },
            records: vec![],
        }
    }

    #[test]
    fn single_run_std_is_flagged() {
        let r = Report::from_traces(&[
            trace("a", 0, "f", 0, 1, Some(1.0)),
            trace("b", 1, "f", 0, 1, Some(2.0)),
        ])
        .unwrap();
        assert!(r
            .summary_csv()
            .contains("f,a,1,0,1.000000e+00,n/a,1.000000e+00"));
        assert_eq!(
            r.ranks_csv(),
            "algorithm,average_rank\na,1.000000e+00\nb,2.000000e+00\n"
        );
        assert!(r.wilcoxon[0].result.is_none());
    }

    #[test]
    fn failed_cells_are_reported_not_fatal() {
        let r = Report::from_traces(&[
            trace("a", 0, "f", 0, 1, Some(1.0)),
            trace("b", 1, "f", 0, 1, None),
            trace("a", 0, "g", 1, 1, Some(1.0)),
            trace("b", 1, "g", 1, 1, Some(0.5)),
        ])
        .unwrap();
        let fb = r
            .summary
            .iter()
            .find(|c| c.function == "f" && c.algorithm == "b")
            .unwrap();
        assert_eq!(
            (fb.runs, fb.failed, fb.mean_error, fb.rank),
            (0, 1, None, None)
        );
        assert_eq!(r.ranks[1].average_rank, Some(1.0));
        assert!(!r.warnings.is_empty());
    }
}
