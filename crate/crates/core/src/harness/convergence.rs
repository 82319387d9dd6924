//! Convergence curves: per-seed step functions and their median on a common
//! evaluation grid.

use std::fmt::Write as _;
use std::path::Path;

use super::report::fmt_sci;
use super::trace_file::{write_atomic, TraceFile};
use crate::error::Result;
use crate::population::TraceRecord;

/// Best value known at `nfe`: the last record at or before it. `None`
/// before the first record.
pub fn resample(records: &[TraceRecord], nfe: u64) -> Option<f64> {
    let idx = records.partition_point(|r| r.nfe <= nfe);
    (idx > 0).then(|| records[idx - 1].best_value)
}

fn median(values: &mut [f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    Some(if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MedianSeries {
    pub algorithm: String,
    /// One entry per grid point.
    pub values: Vec<Option<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub function: String,
    pub grid: Vec<u64>,
    /// Selected successful traces, in (algorithm, seed) order.
    pub traces: Vec<TraceFile>,
    pub medians: Vec<MedianSeries>,
    pub warnings: Vec<String>,
}

/// Collects the traces of `function` for `algorithms` (all algorithms when
/// empty) and builds medians on `grid_points` evenly spaced evaluation
/// counts up to the budget.
pub fn convergence(
    traces: &[TraceFile],
    function: &str,
    algorithms: &[String],
    grid_points: usize,
) -> ConvergenceTable {
    let mut warnings = Vec::new();
    let mut names: Vec<(usize, String)> = traces
        .iter()
        .filter(|t| t.function == function)
        .map(|t| (t.algorithm_index, t.algorithm.clone()))
        .collect();
    names.sort();
    names.dedup();
    let selected: Vec<String> = if algorithms.is_empty() {
        names.into_iter().map(|(_, n)| n).collect()
    } else {
        algorithms.to_vec()
    };

    let mut chosen = Vec::new();
    for a in &selected {
        let mut cell: Vec<&TraceFile> = traces
            .iter()
            .filter(|t| &t.algorithm == a && t.function == function)
            .collect();
        cell.sort_by_key(|t| t.seed);
        for t in cell.iter().filter(|t| t.final_error().is_none()) {
            warnings.push(format!("failed cell: {a} on {function} seed {}", t.seed));
        }
        let ok: Vec<&TraceFile> = cell
            .into_iter()
            .filter(|t| t.final_error().is_some())
            .collect();
        if ok.is_empty() {
            warnings.push(format!(
                "missing cell: no successful traces for {a} on {function}"
            ));
        }
        chosen.extend(ok.into_iter().cloned());
    }

    let nfe_max = chosen.iter().map(|t| t.nfe_max).max().unwrap_or(0);
    let points = grid_points.max(1) as u64;
    let grid: Vec<u64> = if nfe_max == 0 {
        Vec::new()
    } else {
        (1..=points).map(|i| nfe_max * i / points).collect()
    };

    let medians = selected
        .iter()
        .map(|a| {
            let series: Vec<&TraceFile> = chosen.iter().filter(|t| &t.algorithm == a).collect();
            let values = grid
                .iter()
                .map(|&g| {
                    let mut at: Vec<f64> = series
                        .iter()
                        .filter_map(|t| resample(&t.records, g))
                        .collect();
                    median(&mut at)
                })
                .collect();
            MedianSeries {
                algorithm: a.clone(),
                values,
            }
        })
        .collect();

    ConvergenceTable {
        function: function.to_string(),
        grid,
        traces: chosen,
        medians,
        warnings,
    }
}

impl ConvergenceTable {
    pub fn median_of(&self, algorithm: &str) -> Option<&MedianSeries> {
        self.medians.iter().find(|m| m.algorithm == algorithm)
    }

    /// Long-format CSV: one `trace` row per record and one `median` row per
    /// grid point. Warnings go first as `#` comment lines.
    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        for w in &self.warnings {
            let _ = writeln!(s, "# warning: {w}");
        }
        s.push_str("kind,algorithm,seed,nfe,best_value\n");
        for t in &self.traces {
            for r in &t.records {
                let _ = writeln!(
                    s,
                    "trace,{},{},{},{}",
                    t.algorithm,
                    t.seed,
                    r.nfe,
                    fmt_sci(r.best_value)
                );
            }
        }
        for m in &self.medians {
            for (g, v) in self.grid.iter().zip(&m.values) {
                let value = v.map(fmt_sci).unwrap_or_default();
                let _ = writeln!(s, "median,{},,{},{}", m.algorithm, g, value);
            }
        }
        s
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent)?;
        }
        write_atomic(path, self.to_csv().as_bytes())
    }
}
