//! Classic analytic test functions with known minima.

use std::f64::consts::{E, PI};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dimension, Error, Result};
use crate::population::{Evaluator, ObjectiveProblem, SearchBounds};
use crate::rng::Draws;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    Unimodal,
    Multimodal,
    HybridLike,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Unimodal => "unimodal",
            Family::Multimodal => "multimodal",
            Family::HybridLike => "hybrid-like",
        })
    }
}

#[derive(Clone)]
pub struct BenchmarkSpec {
    pub name: String,
    pub family: Family,
    pub bounds: SearchBounds,
    pub optimum_value: f64,
    pub optimum_position: Option<Vec<f64>>,
    evaluator: Evaluator,
}

impl fmt::Debug for BenchmarkSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BenchmarkSpec")
            .field("name", &self.name)
            .field("family", &self.family)
            .field("dimension", &self.dimension())
            .field("optimum_value", &self.optimum_value)
            .field("optimum_position", &self.optimum_position)
            .finish_non_exhaustive()
    }
}

impl BenchmarkSpec {
    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn evaluate(&self, x: &[f64]) -> f64 {
        (self.evaluator)(x)
    }

    pub fn to_problem(&self) -> ObjectiveProblem {
        ObjectiveProblem::from_arc(
            self.name.clone(),
            self.bounds.clone(),
            self.evaluator.clone(),
        )
        .with_optimum(self.optimum_value)
    }
}

pub const NAMES: [&str; 10] = [
    "sphere",
    "bent-cigar",
    "sum-of-different-powers",
    "rosenbrock",
    "rastrigin",
    "ackley",
    "griewank",
    "schwefel",
    "levy",
    "rastrigin-sphere-mix",
];

const SCHWEFEL_ARGMIN: f64 = 420.968_746_359_982;
const SCHWEFEL_OFFSET: f64 = 418.982_887_272_433_7;

pub fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

pub fn bent_cigar(x: &[f64]) -> f64 {
    x[0] * x[0] + 1e6 * x[1..].iter().map(|v| v * v).sum::<f64>()
}

/// `sum |x_i|^(i+1)` with `i` counted from 1.
pub fn sum_of_different_powers(x: &[f64]) -> f64 {
    x.iter()
        .enumerate()
        .map(|(i, v)| v.abs().powi(i as i32 + 2))
        .sum()
}

pub fn rosenbrock(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

pub fn rastrigin(x: &[f64]) -> f64 {
    10.0 * x.len() as f64
        + x.iter()
            .map(|v| v * v - 10.0 * (2.0 * PI * v).cos())
            .sum::<f64>()
}

pub fn ackley(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let sq = x.iter().map(|v| v * v).sum::<f64>() / n;
    let cs = x.iter().map(|v| (2.0 * PI * v).cos()).sum::<f64>() / n;
    -20.0 * (-0.2 * sq.sqrt()).exp() - cs.exp() + 20.0 + E
}

pub fn griewank(x: &[f64]) -> f64 {
    let sum = x.iter().map(|v| v * v).sum::<f64>() / 4000.0;
    let prod: f64 = x
        .iter()
        .enumerate()
        .map(|(i, v)| (v / ((i + 1) as f64).sqrt()).cos())
        .product();
    1.0 + sum - prod
}

/// Schwefel 2.26, shifted so that the minimum value is zero.
///
/// Outside `[-500, 500]` a coordinate is folded back into the box and
/// charged a quadratic penalty, so a shifted instance cannot drop below
/// its optimum by wandering past the original domain.
pub fn schwefel(x: &[f64]) -> f64 {
    let d = x.len() as f64;
    let term = |v: f64| {
        if v.abs() <= 500.0 {
            v * v.abs().sqrt().sin()
        } else {
            let folded = v.signum() * (500.0 - v.abs() % 500.0);
            let excess = v.abs() - 500.0;
            folded * folded.abs().sqrt().sin() - excess * excess / (10_000.0 * d)
        }
    };
    SCHWEFEL_OFFSET * d - x.iter().map(|v| term(*v)).sum::<f64>()
}

pub fn levy(x: &[f64]) -> f64 {
    let w: Vec<f64> = x.iter().map(|v| 1.0 + (v - 1.0) / 4.0).collect();
    let d = w.len();
    let head = (PI * w[0]).sin().powi(2);
    let body: f64 = w[..d - 1]
        .iter()
        .map(|wi| (wi - 1.0).powi(2) * (1.0 + 10.0 * (PI * wi + 1.0).sin().powi(2)))
        .sum();
    let tail = (w[d - 1] - 1.0).powi(2) * (1.0 + (2.0 * PI * w[d - 1]).sin().powi(2));
    head + body + tail
}

/// Internal offset of the Rastrigin/Sphere mix.
fn mix_offset(dimension: usize) -> Vec<f64> {
    (0..dimension)
        .map(|j| if j % 2 == 0 { 1.5 } else { -2.0 })
        .collect()
}

/// `0.7 rastrigin(z) + 0.3 sphere(z)` with `z = x - o`.
fn rastrigin_sphere_mix(x: &[f64], offset: &[f64]) -> f64 {
    let z: Vec<f64> = x.iter().zip(offset).map(|(a, b)| a - b).collect();
    0.7 * rastrigin(&z) + 0.3 * sphere(&z)
}

fn build(
    name: &str,
    family: Family,
    dimension: usize,
    (lo, hi): (f64, f64),
    optimum_position: Vec<f64>,
    f: Evaluator,
) -> Result<BenchmarkSpec> {
    Ok(BenchmarkSpec {
        name: name.to_string(),
        family,
        bounds: SearchBounds::uniform(dimension, lo, hi)?,
        optimum_value: 0.0,
        optimum_position: Some(optimum_position),
        evaluator: f,
    })
}

/// Looks a benchmark up by name.
pub fn by_name(name: &str, dimension: usize) -> Result<BenchmarkSpec> {
    if dimension < 2 {
        return Err(Error::Parameter(format!(
            "benchmark dimension must be at least 2, got {dimension}"
        )));
    }
    let d = dimension;
    let zeros = vec![0.0; d];
    use Family::*;
    match name {
        "sphere" => build(name, Unimodal, d, (-100.0, 100.0), zeros, Arc::new(sphere)),
        "bent-cigar" => build(
            name,
            Unimodal,
            d,
            (-100.0, 100.0),
            zeros,
            Arc::new(bent_cigar),
        ),
        "sum-of-different-powers" => build(
            name,
            Unimodal,
            d,
            (-1.0, 1.0),
            zeros,
            Arc::new(sum_of_different_powers),
        ),
        "rosenbrock" => build(
            name,
            Multimodal,
            d,
            (-5.0, 10.0),
            vec![1.0; d],
            Arc::new(rosenbrock),
        ),
        "rastrigin" => build(
            name,
            Multimodal,
            d,
            (-5.12, 5.12),
            zeros,
            Arc::new(rastrigin),
        ),
        "ackley" => build(
            name,
            Multimodal,
            d,
            (-32.768, 32.768),
            zeros,
            Arc::new(ackley),
        ),
        "griewank" => build(
            name,
            Multimodal,
            d,
            (-600.0, 600.0),
            zeros,
            Arc::new(griewank),
        ),
        "schwefel" => build(
            name,
            Multimodal,
            d,
            (-500.0, 500.0),
            vec![SCHWEFEL_ARGMIN; d],
            Arc::new(schwefel),
        ),
        "levy" => build(
            name,
            Multimodal,
            d,
            (-10.0, 10.0),
            vec![1.0; d],
            Arc::new(levy),
        ),
        "rastrigin-sphere-mix" => {
            let offset = mix_offset(d);
            let o = offset.clone();
            build(
                name,
                HybridLike,
                d,
                (-5.12, 5.12),
                offset,
                Arc::new(move |x: &[f64]| rastrigin_sphere_mix(x, &o)),
            )
        }
        _ => Err(Error::Config(format!(
            "unknown benchmark function '{name}'"
        ))),
    }
}

/// The full stand-in suite at `dimension`.
pub fn suite(dimension: usize) -> Result<Vec<BenchmarkSpec>> {
    NAMES.iter().map(|n| by_name(n, dimension)).collect()
}

/// Translates the function: `f'(x) = f(x - offset)`.
pub fn shift(spec: &BenchmarkSpec, offset: &[f64]) -> Result<BenchmarkSpec> {
    check_dimension(spec.dimension(), offset.len())?;
    let (lower, upper) = (spec.bounds.lower(), spec.bounds.upper());
    for (j, o) in offset.iter().enumerate() {
        let half = (upper[j] - lower[j]) / 2.0;
        if !o.is_finite() || o.abs() > half {
            return Err(Error::Parameter(format!(
                "shift {o} at coordinate {j} exceeds half the bound range ({half})"
            )));
        }
    }
    let optimum_position = match &spec.optimum_position {
        Some(p) => {
            let moved: Vec<f64> = p.iter().zip(offset).map(|(a, b)| a + b).collect();
            if !spec.bounds.contains(&moved) {
                return Err(Error::Parameter(format!(
                    "shift moves the optimum of '{}' outside the bounds",
                    spec.name
                )));
            }
            Some(moved)
        }
        None => None,
    };
    let inner = spec.evaluator.clone();
    let offset = offset.to_vec();
    Ok(BenchmarkSpec {
        name: spec.name.clone(),
        family: spec.family,
        bounds: spec.bounds.clone(),
        optimum_value: spec.optimum_value,
        optimum_position,
        evaluator: Arc::new(move |x: &[f64]| {
            let z: Vec<f64> = x.iter().zip(&offset).map(|(a, b)| a - b).collect();
            inner(&z)
        }),
    })
}

/// Draws an offset of at most `fraction` of the half-range per coordinate,
/// narrowed so the shifted optimum stays inside the box.
pub fn random_offset<R: Draws + ?Sized>(
    spec: &BenchmarkSpec,
    fraction: f64,
    rng: &mut R,
) -> Vec<f64> {
    let (lower, upper) = (spec.bounds.lower(), spec.bounds.upper());
    (0..spec.dimension())
        .map(|j| {
            let reach = fraction * (upper[j] - lower[j]) / 2.0;
            let (mut lo, mut hi) = (-reach, reach);
            if let Some(p) = &spec.optimum_position {
                lo = lo.max(lower[j] - p[j]);
                hi = hi.min(upper[j] - p[j]);
            }
            lo + rng.uniform() * (hi - lo)
        })
        .collect()
}
