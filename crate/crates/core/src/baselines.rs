//! Comparison optimizers: global-best PSO and the grey wolf optimizer.
//!
//! Both schedule their control parameter on the fraction of the evaluation
//! budget spent, not on the iteration count, so budgets line up with HMS.

use crate::error::{Error, Result};
use crate::population::{init_population, Bid, ObjectiveProblem, Population, RunTrace};
use crate::rng::{Draws, RngStream};

fn budget_fraction(nfe: u64, nfe_max: u64) -> f64 {
    (nfe as f64 / nfe_max as f64).clamp(0.0, 1.0)
}

/// Inertia weight decaying linearly from 1 at `nfe = 0` to 0 at the budget.
pub fn inertia(nfe: u64, nfe_max: u64) -> f64 {
    1.0 - budget_fraction(nfe, nfe_max)
}

/// GWO coefficient `a`, linear from 2 to 0 over the budget.
pub fn gwo_a(nfe: u64, nfe_max: u64) -> f64 {
    2.0 * (1.0 - budget_fraction(nfe, nfe_max))
}

#[derive(Debug, Clone, PartialEq)]
pub struct PsoConfig {
    pub n_pop: usize,
    pub c1: f64,
    pub c2: f64,
    pub nfe_max: u64,
}

impl Default for PsoConfig {
    fn default() -> Self {
        Self {
            n_pop: 50,
            c1: 2.0,
            c2: 2.0,
            nfe_max: 30_000,
        }
    }
}

impl PsoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pop < 2 {
            return Err(Error::Config(format!(
                "n_pop must be at least 2, got {}",
                self.n_pop
            )));
        }
        if !(self.c1 >= 0.0 && self.c2 >= 0.0 && self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::Config(
                "PSO coefficients must be finite and non-negative".into(),
            ));
        }
        if self.nfe_max == 0 {
            return Err(Error::Config("nfe_max must be positive".into()));
        }
        Ok(())
    }
}

/// Particle state for global-best PSO.
#[derive(Debug, Clone)]
pub struct Swarm {
    pub population: Population,
    pub velocities: Vec<Vec<f64>>,
    pub personal_best: Vec<Bid>,
}

impl Swarm {
    /// Zero initial velocities; personal bests start at the initial positions.
    pub fn new(population: Population) -> Self {
        let dim = population.bids.first().map_or(0, Bid::dimension);
        Self {
            velocities: vec![vec![0.0; dim]; population.len()],
            personal_best: population.bids.clone(),
            population,
        }
    }

    /// One synchronous update:
    ///
    /// `v <- w v + c1 r1 (p_best - x) + c2 r2 (g_best - x)`, `x <- x + v`
    ///
    /// with `(r1, r2)` drawn per coordinate. Velocities are limited to the
    /// box width per coordinate; positions are clamped, then all particles
    /// are re-evaluated.
    pub fn step<R: Draws + ?Sized>(
        &mut self,
        c1: f64,
        c2: f64,
        problem: &ObjectiveProblem,
        rng: &mut R,
    ) -> Result<()> {
        let w = inertia(self.population.nfe(), self.population.nfe_max());
        let global = self.population.best().position.clone();
        let bounds = problem.bounds();
        for ((bid, vel), pbest) in self
            .population
            .bids
            .iter_mut()
            .zip(&mut self.velocities)
            .zip(&self.personal_best)
        {
            for j in 0..vel.len() {
                let r1 = rng.uniform();
                let r2 = rng.uniform();
                let x = bid.position[j];
                let vmax = bounds.upper()[j] - bounds.lower()[j];
                vel[j] =
                    (w * vel[j] + c1 * r1 * (pbest.position[j] - x) + c2 * r2 * (global[j] - x))
                        .clamp(-vmax, vmax);
                bid.position[j] = x + vel[j];
            }
            bounds.clamp_in_place(&mut bid.position);
            bid.evaluated = false;
        }
        self.population.evaluate(problem)?;
        for (pbest, bid) in self.personal_best.iter_mut().zip(&self.population.bids) {
            if bid.value < pbest.value {
                *pbest = bid.clone();
            }
        }
        Ok(())
    }
}

pub fn run_pso(problem: &ObjectiveProblem, config: &PsoConfig, seed: u64) -> Result<RunTrace> {
    config.validate()?;
    let mut rng = RngStream::new(seed);
    let population = init_population(problem, config.n_pop, config.nfe_max, &mut rng)?;
    let mut trace = RunTrace::start(&population);
    let mut swarm = Swarm::new(population);
    while swarm.population.nfe() <= config.nfe_max {
        swarm.step(config.c1, config.c2, problem, &mut rng)?;
        trace.record(&swarm.population);
    }
    Ok(trace)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GwoConfig {
    pub n_pop: usize,
    pub nfe_max: u64,
}

impl Default for GwoConfig {
    fn default() -> Self {
        Self {
            n_pop: 50,
            nfe_max: 30_000,
        }
    }
}

impl GwoConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_pop < 2 {
            return Err(Error::Config(format!(
                "n_pop must be at least 2, got {}",
                self.n_pop
            )));
        }
        if self.nfe_max == 0 {
            return Err(Error::Config("nfe_max must be positive".into()));
        }
        Ok(())
    }
}

/// Wolf pack with the three best positions seen so far as leaders.
#[derive(Debug, Clone)]
pub struct Pack {
    pub population: Population,
    /// Alpha, beta, delta.
    pub leaders: [Bid; 3],
}

impl Pack {
    pub fn new(population: Population) -> Self {
        let mut sorted = population.bids.clone();
        sorted.sort_by(|a, b| a.value.total_cmp(&b.value));
        let pick = |i: usize| sorted[i.min(sorted.len() - 1)].clone();
        let leaders = [pick(0), pick(1), pick(2)];
        Self {
            population,
            leaders,
        }
    }

    fn offer(&mut self, bid: &Bid) {
        if bid.value < self.leaders[0].value {
            self.leaders[2] = self.leaders[1].clone();
            self.leaders[1] = self.leaders[0].clone();
            self.leaders[0] = bid.clone();
        } else if bid.value < self.leaders[1].value {
            self.leaders[2] = self.leaders[1].clone();
            self.leaders[1] = bid.clone();
        } else if bid.value < self.leaders[2].value {
            self.leaders[2] = bid.clone();
        }
    }

    /// One encircling update. For each wolf and coordinate, and each leader
    /// `L` in (alpha, beta, delta) order, draws `r1, r2` and forms
    /// `A = 2 a r1 - a`, `C = 2 r2`, `X_L = L - A |C L - x|`; the new
    /// coordinate is the mean of the three `X_L`.
    pub fn step<R: Draws + ?Sized>(
        &mut self,
        problem: &ObjectiveProblem,
        rng: &mut R,
    ) -> Result<()> {
        let a = gwo_a(self.population.nfe(), self.population.nfe_max());
        let bounds = problem.bounds();
        for bid in &mut self.population.bids {
            for j in 0..bid.position.len() {
                let x = bid.position[j];
                let mut sum = 0.0;
                for leader in &self.leaders {
                    let r1 = rng.uniform();
                    let r2 = rng.uniform();
                    let big_a = 2.0 * a * r1 - a;
                    let big_c = 2.0 * r2;
                    let l = leader.position[j];
                    sum += l - big_a * (big_c * l - x).abs();
                }
                bid.position[j] = sum / 3.0;
            }
            bounds.clamp_in_place(&mut bid.position);
            bid.evaluated = false;
        }
        self.population.evaluate(problem)?;
        let bids = self.population.bids.clone();
        for bid in &bids {
            self.offer(bid);
        }
        Ok(())
    }
}

pub fn run_gwo(problem: &ObjectiveProblem, config: &GwoConfig, seed: u64) -> Result<RunTrace> {
    config.validate()?;
    let mut rng = RngStream::new(seed);
    let population = init_population(problem, config.n_pop, config.nfe_max, &mut rng)?;
    let mut trace = RunTrace::start(&population);
    let mut pack = Pack::new(population);
    while pack.population.nfe() <= config.nfe_max {
        pack.step(problem, &mut rng)?;
        trace.record(&pack.population);
    }
    Ok(trace)
}
