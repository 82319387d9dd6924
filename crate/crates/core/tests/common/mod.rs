//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use hmsos_core::benchmarks::BenchmarkSpec;
use hmsos_core::ObjectiveProblem;

// ---------------------------------------------------------------------------
// Gamma oracle: shift the argument above 20, then the asymptotic Stirling
// series for ln Γ.

pub fn ln_gamma_stirling(z: f64) -> f64 {
    let mut shift = 0.0;
    let mut z = z;
    while z < 20.0 {
        shift += z.ln();
        z += 1.0;
    }
    let inv = 1.0 / z;
    let inv2 = inv * inv;
    let series = inv
        * (1.0 / 12.0
            - inv2 * (1.0 / 360.0 - inv2 * (1.0 / 1260.0 - inv2 * (1.0 / 1680.0 - inv2 / 1188.0))));
    (z - 0.5) * z.ln() - z + 0.5 * (2.0 * std::f64::consts::PI).ln() + series - shift
}

pub fn sigma_u_oracle(beta: f64) -> f64 {
    use std::f64::consts::PI;
    let ln_num = ln_gamma_stirling(1.0 + beta) + (PI * beta / 2.0).sin().ln();
    let ln_den = ln_gamma_stirling((1.0 + beta) / 2.0) + beta.ln() + (beta - 1.0) / 2.0 * 2f64.ln();
    ((ln_num - ln_den) / beta).exp()
}

/// Every assignment of `n` points to `k` non-empty labelled clusters.
pub fn best_partition(points: &[Vec<f64>], k: usize) -> (f64, Vec<usize>) {
    let n = points.len();
    let mut labels = vec![0usize; n];
    let mut best = (f64::INFINITY, Vec::new());
    loop {
        let mut sizes = vec![0usize; k];
        for &l in &labels {
            sizes[l] += 1;
        }
        if sizes.iter().all(|&s| s > 0) {
            let dim = points[0].len();
            let mut wcss = 0.0;
            for c in 0..k {
                let members: Vec<&Vec<f64>> = points
                    .iter()
                    .zip(&labels)
                    .filter(|(_, l)| **l == c)
                    .map(|(p, _)| p)
                    .collect();
                for j in 0..dim {
                    let m = members.iter().map(|p| p[j]).sum::<f64>() / members.len() as f64;
                    wcss += members.iter().map(|p| (p[j] - m).powi(2)).sum::<f64>();
                }
            }
            if wcss < best.0 {
                best = (wcss, labels.clone());
            }
        }
        // odometer
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

/// Naive O(n²) averaged ranks of |d|.
pub fn naive_ranks(abs: &[f64]) -> Vec<f64> {
    abs.iter()
        .map(|a| {
            let below = abs.iter().filter(|b| *b < a).count() as f64;
            let equal = abs.iter().filter(|b| *b == a).count() as f64;
            below + (equal + 1.0) / 2.0
        })
        .collect()
}

pub fn enumerated_p(x: &[f64], y: &[f64]) -> (f64, f64) {
    let d: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| a - b)
        .filter(|d| *d != 0.0)
        .collect();
    let ranks = naive_ranks(&d.iter().map(|v| v.abs()).collect::<Vec<_>>());
    let plus: f64 = ranks
        .iter()
        .zip(&d)
        .filter(|(_, d)| **d > 0.0)
        .map(|(r, _)| r)
        .sum();
    let total: f64 = ranks.iter().sum();
    let t = plus.min(total - plus);
    let n = d.len();
    let mut at_most = 0u64;
    for mask in 0u64..(1 << n) {
        let s: f64 = (0..n)
            .filter(|i| mask & (1 << i) != 0)
            .map(|i| ranks[i])
            .sum();
        if s <= t + 1e-9 {
            at_most += 1;
        }
    }
    (t, (2.0 * at_most as f64 / 2f64.powi(n as i32)).min(1.0))
}

/// Wraps a benchmark so every evaluator call is counted.
pub fn counting(spec: &BenchmarkSpec) -> (ObjectiveProblem, Arc<AtomicU64>) {
    let calls = Arc::new(AtomicU64::new(0));
    let c = calls.clone();
    let inner = spec.clone();
    let problem = ObjectiveProblem::new(
        spec.name.clone(),
        spec.bounds.clone(),
        move |x: &[f64]| {
            c.fetch_add(1, Ordering::Relaxed);
            inner.evaluate(x)
        },
    )
    .with_optimum(spec.optimum_value);
    (problem, calls)
}
