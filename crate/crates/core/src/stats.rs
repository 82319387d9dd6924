//! Summary statistics, per-function ranking and the Wilcoxon signed-rank
//! test.

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::error::{check_dimension, Error, Result};

/// Final errors of every run of one algorithm on one function.
#[derive(Debug, Clone, PartialEq)]
pub struct CellErrors {
    pub algorithm: String,
    pub function: String,
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    pub algorithm: String,
    pub function: String,
    pub runs: usize,
    pub mean_error: f64,
    /// Sample standard deviation; `None` for a single run.
    pub std_error: Option<f64>,
    /// Rank among algorithms on this function by mean error, ties averaged.
    pub rank: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
    /// Mean rank over functions, in first-appearance order of algorithms.
    pub average_ranks: Vec<(String, f64)>,
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Sample standard deviation (n - 1 denominator); `None` below two values.
pub fn sample_std(xs: &[f64]) -> Option<f64> {
    if xs.len() < 2 {
        return None;
    }
    let m = mean(xs);
    let ss: f64 = xs.iter().map(|x| (x - m) * (x - m)).sum();
    Some((ss / (xs.len() - 1) as f64).sqrt())
}

/// 1-based ranks of `values` in ascending order; tied values share the
/// average of the positions they occupy.
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

fn first_appearance<'a>(items: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut seen: Vec<String> = Vec::new();
    for s in items {
        if !seen.iter().any(|x| x == s) {
            seen.push(s.to_string());
        }
    }
    seen
}

/// Per-cell mean/std, per-function ranks and per-algorithm average ranks.
///
/// Rows come out grouped by function, then algorithm, both in
/// first-appearance order. Every (function, algorithm) pair must be present
/// with at least one error.
pub fn summarize(cells: &[CellErrors]) -> Result<Summary> {
    let functions = first_appearance(cells.iter().map(|c| c.function.as_str()));
    let algorithms = first_appearance(cells.iter().map(|c| c.algorithm.as_str()));
    let mut rows = Vec::new();
    let mut rank_sums = vec![0.0; algorithms.len()];

    for function in &functions {
        let mut means = Vec::with_capacity(algorithms.len());
        for algorithm in &algorithms {
            let cell = cells
                .iter()
                .find(|c| &c.function == function && &c.algorithm == algorithm)
                .filter(|c| !c.errors.is_empty())
                .ok_or_else(|| {
                    Error::Report(format!(
                        "no runs for algorithm '{algorithm}' on function '{function}'"
                    ))
                })?;
            means.push((cell, mean(&cell.errors)));
        }
        let ranks = average_ranks(&means.iter().map(|(_, m)| *m).collect::<Vec<_>>());
        for (i, ((cell, m), rank)) in means.into_iter().zip(ranks).enumerate() {
            rank_sums[i] += rank;
            rows.push(SummaryRow {
                algorithm: cell.algorithm.clone(),
                function: cell.function.clone(),
                runs: cell.errors.len(),
                mean_error: m,
                std_error: sample_std(&cell.errors),
                rank,
            });
        }
    }
    let average_ranks = algorithms
        .into_iter()
        .zip(rank_sums)
        .map(|(a, s)| (a, s / functions.len() as f64))
        .collect();
    Ok(Summary {
        rows,
        average_ranks,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WilcoxonMethod {
    Exact,
    NormalApproximation,
}

impl WilcoxonMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            WilcoxonMethod::Exact => "exact",
            WilcoxonMethod::NormalApproximation => "normal-approximation",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilcoxonResult {
    /// Pairs left after dropping zero differences.
    pub n_effective: usize,
    /// The smaller of the positive and negative rank sums.
    pub w_statistic: f64,
    /// Two-sided.
    pub p_value: f64,
    pub method: WilcoxonMethod,
}

/// Largest effective sample size handled by the exact null distribution.
pub const EXACT_LIMIT: usize = 25;
pub const MIN_EFFECTIVE: usize = 5;

struct SignedRanks {
    ranks: Vec<f64>,
    positive: Vec<bool>,
    tie_sizes: Vec<usize>,
}

fn signed_ranks(x: &[f64], y: &[f64]) -> Result<SignedRanks> {
    check_dimension(x.len(), y.len())?;
    let diffs: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    if diffs.len() < MIN_EFFECTIVE {
        return Err(Error::InsufficientData(format!(
            "signed-rank test needs at least {MIN_EFFECTIVE} non-zero differences, got {}",
            diffs.len()
        )));
    }
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    let ranks = average_ranks(&abs);
    let mut sorted = abs.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_sizes = Vec::new();
    let mut i = 0;
    while i < sorted.len() {
        let j = sorted[i..].iter().take_while(|v| **v == sorted[i]).count();
        if j > 1 {
            tie_sizes.push(j);
        }
        i += j;
    }
    Ok(SignedRanks {
        ranks,
        positive: diffs.iter().map(|d| *d > 0.0).collect(),
        tie_sizes,
    })
}

impl SignedRanks {
    fn rank_sums(&self) -> (f64, f64) {
        let total: f64 = self.ranks.iter().sum();
        let plus: f64 = self
            .ranks
            .iter()
            .zip(&self.positive)
            .filter(|(_, p)| **p)
            .map(|(r, _)| r)
            .sum();
        (plus, total - plus)
    }

    /// Null distribution of the positive rank sum, in half-rank units, built
    /// by adding one rank at a time; the same counts as enumerating every
    /// sign assignment.
    fn exact_p(&self, statistic: f64) -> f64 {
        let doubled: Vec<usize> = self
            .ranks
            .iter()
            .map(|r| (2.0 * r).round() as usize)
            .collect();
        let max: usize = doubled.iter().sum();
        let mut counts = vec![0.0f64; max + 1];
        counts[0] = 1.0;
        let mut reach = 0;
        for &r in &doubled {
            for s in (0..=reach).rev() {
                if counts[s] != 0.0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let threshold = (2.0 * statistic).round() as usize;
        let tail: f64 = counts[..=threshold].iter().sum();
        let total = 2f64.powi(self.ranks.len() as i32);
        (2.0 * tail / total).min(1.0)
    }

    fn normal_p(&self, plus: f64) -> f64 {
        let n = self.ranks.len() as f64;
        let mu = n * (n + 1.0) / 4.0;
        let ties: f64 = self.tie_sizes.iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = n * (n + 1.0) * (2.0 * n + 1.0) / 24.0 - ties / 48.0;
        if var <= 0.0 {
            return 1.0;
        }
        let z = ((plus - mu).abs() - 0.5).max(0.0) / var.sqrt();
        erfc(z / std::f64::consts::SQRT_2).min(1.0)
    }
}

/// Two-sided paired signed-rank test; exact for up to [`EXACT_LIMIT`]
/// effective pairs, normal approximation above.
pub fn wilcoxon_signed_rank(x: &[f64], y: &[f64]) -> Result<WilcoxonResult> {
    let method = if signed_ranks(x, y)?.ranks.len() <= EXACT_LIMIT {
        WilcoxonMethod::Exact
    } else {
        WilcoxonMethod::NormalApproximation
    };
    wilcoxon_signed_rank_with(x, y, method)
}

/// Signed-rank test with a forced method.
pub fn wilcoxon_signed_rank_with(
    x: &[f64],
    y: &[f64],
    method: WilcoxonMethod,
) -> Result<WilcoxonResult> {
    let sr = signed_ranks(x, y)?;
    let (plus, minus) = sr.rank_sums();
    let w = plus.min(minus);
    let p_value = match method {
        WilcoxonMethod::Exact => {
            if sr.ranks.len() > 60 {
                return Err(Error::Parameter(format!(
                    "exact signed-rank distribution limited to 60 pairs, got {}",
                    sr.ranks.len()
                )));
            }
            sr.exact_p(w)
        }
        WilcoxonMethod::NormalApproximation => sr.normal_p(plus),
    };
    Ok(WilcoxonResult {
        n_effective: sr.ranks.len(),
        w_statistic: w,
        p_value,
        method,
    })
}
