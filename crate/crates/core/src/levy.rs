//! Levy-flight steps for mental search (Mantegna's construction).

use std::f64::consts::PI;

use crate::error::{check_dimension, Error, Result};
use crate::rng::Draws;

/// Constant step scale multiplying every Levy step.
pub const STEP_SCALE: f64 = 0.01;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Gamma function via the Lanczos approximation (g = 7, 9 terms), with the
/// reflection formula below 1/2.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        PI / ((PI * x).sin() * gamma(1.0 - x))
    } else {
        let x = x - 1.0;
        let mut acc = LANCZOS_COEFFS[0];
        for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
            acc += c / (x + i as f64);
        }
        let t = x + LANCZOS_G + 0.5;
        (2.0 * PI).sqrt() * t.powf(x + 0.5) * (-t).exp() * acc
    }
}

fn check_beta(beta: f64) -> Result<()> {
    if beta > 0.0 && beta < 2.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "beta must lie in (0, 2), got {beta}"
        )))
    }
}

/// Standard deviation of the numerator draw `u` in Mantegna's algorithm.
pub fn sigma_u(beta: f64) -> Result<f64> {
    check_beta(beta)?;
    let num = gamma(1.0 + beta) * (PI * beta / 2.0).sin();
    let den = gamma((1.0 + beta) / 2.0) * beta * 2f64.powf((beta - 1.0) / 2.0);
    Ok((num / den).powf(1.0 / beta))
}

/// Linear budget decay `2 - 2 nfe / nfe_max`, floored at zero once the
/// budget is overshot.
pub fn decay_factor(nfe: u64, nfe_max: u64) -> Result<f64> {
    if nfe_max == 0 {
        return Err(Error::Parameter("nfe_max must be positive".into()));
    }
    Ok((2.0 - 2.0 * nfe as f64 / nfe_max as f64).max(0.0))
}

/// Validated stability exponent with its cached `sigma_u`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyParams {
    beta: f64,
    sigma_u: f64,
}

impl LevyParams {
    pub fn new(beta: f64) -> Result<Self> {
        Ok(Self {
            beta,
            sigma_u: sigma_u(beta)?,
        })
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn sigma_u(&self) -> f64 {
        self.sigma_u
    }

    pub fn scale(&self) -> f64 {
        STEP_SCALE
    }

    /// One Mantegna ratio `u / v^(1/beta)`, drawing `u` then `v`.
    ///
    /// `v^(1/beta)` is taken as `sign(v) |v|^(1/beta)`. A draw of exactly
    /// `v = 0` yields a zero step.
    pub fn sample<R: Draws + ?Sized>(&self, rng: &mut R) -> f64 {
        let u = self.sigma_u * rng.standard_normal();
        let v = rng.standard_normal();
        if v == 0.0 {
            return 0.0;
        }
        u / (v.signum() * v.abs().powf(1.0 / self.beta))
    }
}

/// New point `x + decay * 0.01 * (u / v^(1/beta)) * (x - x_star)`, with an
/// independent `(u, v)` pair per coordinate. The result is not clamped.
pub fn levy_step<R: Draws + ?Sized>(
    x: &[f64],
    x_star: &[f64],
    params: &LevyParams,
    nfe: u64,
    nfe_max: u64,
    rng: &mut R,
) -> Result<Vec<f64>> {
    check_dimension(x.len(), x_star.len())?;
    let decay = decay_factor(nfe, nfe_max)?;
    Ok(x.iter()
        .zip(x_star)
        .map(|(xi, si)| {
            let ratio = params.sample(rng);
            let diff = xi - si;
            if diff == 0.0 || decay == 0.0 {
                *xi
            } else {
                xi + decay * STEP_SCALE * ratio * diff
            }
        })
        .collect())
}
