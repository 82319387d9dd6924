//! Standard human mental search (HMS): Levy-flight mental search around each
//! bid, k-means grouping in search space, and movement towards the best bid
//! of the winning group.
//!
//! Draw order per iteration, all from the run's single stream:
//!
//! 1. for each bid in index order: `q` (one integer draw), `beta` (one
//!    uniform), then for each of the `q` candidates and each coordinate a
//!    `(u, v)` normal pair;
//! 2. k-means++ seeding for search-space grouping;
//! 3. for each bid in index order, one uniform `r` per coordinate.
//!
//! Initialization draws bid by bid, coordinate by coordinate, before the
//! first iteration.

use crate::clustering::{winner_cluster_search_space, KMeansOptions};
use crate::error::{Error, Result};
use crate::levy::{levy_step, LevyParams};
use crate::population::{init_population, Bid, Ledger, ObjectiveProblem, Population, RunTrace};
use crate::rng::{Draws, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct HmsConfig {
    pub n_pop: usize,
    /// Number of search-space clusters.
    pub k_search: usize,
    /// Movement coefficient.
    pub c: f64,
    pub m_low: usize,
    pub m_high: usize,
    /// Interval the per-bid stability exponent is drawn from.
    pub beta_range: (f64, f64),
    pub nfe_max: u64,
}

impl Default for HmsConfig {
    fn default() -> Self {
        Self {
            n_pop: 50,
            k_search: 5,
            c: 1.0,
            m_low: 2,
            m_high: 5,
            beta_range: (0.3, 1.99),
            nfe_max: 30_000,
        }
    }
}

impl HmsConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::Config(msg));
        if self.n_pop < 2 {
            return fail(format!("n_pop must be at least 2, got {}", self.n_pop));
        }
        if self.k_search == 0 || self.k_search > self.n_pop {
            return fail(format!(
                "k_search must lie in [1, n_pop], got {}",
                self.k_search
            ));
        }
        if self.m_low == 0 || self.m_low > self.m_high {
            return fail(format!(
                "need 1 <= m_low <= m_high, got m_low={} m_high={}",
                self.m_low, self.m_high
            ));
        }
        if !self.c.is_finite() {
            return fail("movement coefficient must be finite".into());
        }
        let (lo, hi) = self.beta_range;
        if !(lo > 0.0 && lo <= hi && hi < 2.0) {
            return fail(format!(
                "beta_range must satisfy 0 < low <= high < 2, got ({lo}, {hi})"
            ));
        }
        if self.nfe_max == 0 {
            return fail("nfe_max must be positive".into());
        }
        Ok(())
    }
}

/// Uniform integer in `[m_low, m_high]`.
pub fn draw_q<R: Draws + ?Sized>(m_low: usize, m_high: usize, rng: &mut R) -> usize {
    rng.int_inclusive(m_low, m_high)
}

/// Draws `beta` for this bid, generates `q` clamped Levy candidates around
/// `bid` relative to `x_star`, evaluates all of them and keeps the best one
/// only if it strictly improves on `bid`.
///
/// The decay factor is taken from the ledger's evaluation count when the
/// batch starts.
pub fn mental_search<R: Draws + ?Sized>(
    bid: &Bid,
    x_star: &[f64],
    q: usize,
    beta_range: (f64, f64),
    problem: &ObjectiveProblem,
    ledger: &mut Ledger,
    rng: &mut R,
) -> Result<Bid> {
    if q == 0 {
        return Err(Error::Parameter("mental search needs q >= 1".into()));
    }
    let (lo, hi) = beta_range;
    let params = LevyParams::new(lo + rng.uniform() * (hi - lo))?;
    let nfe = ledger.nfe();
    let nfe_max = ledger.nfe_max();
    let bounds = problem.bounds();

    let mut candidates = Vec::with_capacity(q);
    for _ in 0..q {
        let mut position = levy_step(&bid.position, x_star, &params, nfe, nfe_max, rng)?;
        bounds.clamp_in_place(&mut position);
        candidates.push(position);
    }
    let mut best: Option<Bid> = None;
    for position in candidates {
        let candidate = ledger.evaluate(problem, position)?;
        if best.as_ref().is_none_or(|b| candidate.value < b.value) {
            best = Some(candidate);
        }
    }
    let best = best.expect("q >= 1");
    Ok(if best.value < bid.value {
        best
    } else {
        bid.clone()
    })
}

/// `x_i <- x_i + c (r ∘ W - x_i)` with a fresh `r` per coordinate per bid,
/// then clamping and a full re-evaluation (`n_pop` evaluations).
pub fn movement_standard<R: Draws + ?Sized>(
    population: &mut Population,
    w: &[f64],
    c: f64,
    problem: &ObjectiveProblem,
    rng: &mut R,
) -> Result<()> {
    let bounds = problem.bounds();
    for bid in &mut population.bids {
        for (x, wj) in bid.position.iter_mut().zip(w) {
            let r = rng.uniform();
            *x += c * (r * wj - *x);
        }
        bounds.clamp_in_place(&mut bid.position);
        bid.evaluated = false;
    }
    population.evaluate(problem)
}

/// Runs standard HMS seeded with `seed`.
pub fn run_hms(problem: &ObjectiveProblem, config: &HmsConfig, seed: u64) -> Result<RunTrace> {
    run_hms_with(problem, config, &mut RngStream::new(seed))
}

/// Runs standard HMS drawing from `rng`.
pub fn run_hms_with<R: Draws + ?Sized>(
    problem: &ObjectiveProblem,
    config: &HmsConfig,
    rng: &mut R,
) -> Result<RunTrace> {
    config.validate()?;
    let grouping = KMeansOptions::default();
    let mut population = init_population(problem, config.n_pop, config.nfe_max, rng)?;
    let mut trace = RunTrace::start(&population);

    while population.nfe() <= config.nfe_max {
        for i in 0..population.len() {
            let q = draw_q(config.m_low, config.m_high, rng);
            let x_star = population.best().position.clone();
            let updated = mental_search(
                &population.bids[i],
                &x_star,
                q,
                config.beta_range,
                problem,
                &mut population.ledger,
                rng,
            )?;
            population.bids[i] = updated;
        }

        let winner =
            winner_cluster_search_space(&population.bids, config.k_search, &grouping, rng)?;
        movement_standard(
            &mut population,
            &winner.bid.position,
            config.c,
            problem,
            rng,
        )?;
        trace.record(&population);
    }
    Ok(trace)
}
