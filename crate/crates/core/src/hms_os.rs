//! HMS-OS: HMS with grouping in both search and objective space and a
//! rank-proportional number of mental searches per bid.
//!
//! The two modifications are independent flags, which gives the ablation
//! variants:
//!
//! | `adaptive_count` | `dual_clustering` | variant        |
//! |------------------|-------------------|----------------|
//! | true             | true              | HMS-OS         |
//! | true             | false             | HMS-OS-V1      |
//! | false            | true              | HMS-OS-V2      |
//! | false            | false             | standard HMS   |
//!
//! Draw order follows [`crate::hms`]; with adaptive counts the per-bid `q`
//! draw is skipped, and with dual clustering the objective-space k-means
//! seeding follows the search-space seeding. When `independent_r` is set the
//! second movement term draws its own `r` vector right after the first.

use crate::clustering::{best_objective_centroid, winner_cluster_search_space, KMeansOptions};
use crate::error::{Error, Result};
use crate::hms::{draw_q, mental_search, movement_standard, HmsConfig};
use crate::population::{init_population, Bid, ObjectiveProblem, Population, RunTrace};
use crate::rng::{Draws, RngStream};

#[derive(Debug, Clone, PartialEq)]
pub struct HmsOsConfig {
    /// `base.c` is unused; the standard movement uses `c1`.
    pub base: HmsConfig,
    pub k_objective: usize,
    pub c1: f64,
    pub c2: f64,
    pub adaptive_count: bool,
    pub dual_clustering: bool,
    /// Draw separate `r` vectors for the two movement terms.
    pub independent_r: bool,
}

impl Default for HmsOsConfig {
    fn default() -> Self {
        Self {
            base: HmsConfig {
                m_high: 10,
                ..HmsConfig::default()
            },
            k_objective: 10,
            c1: 1.5,
            c2: 1.5,
            adaptive_count: true,
            dual_clustering: true,
            independent_r: false,
        }
    }
}

impl HmsOsConfig {
    /// Adaptive counts only.
    pub fn v1() -> Self {
        Self {
            dual_clustering: false,
            c1: 1.0,
            ..Self::default()
        }
    }

    /// Dual clustering only.
    pub fn v2() -> Self {
        Self {
            adaptive_count: false,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let base = HmsConfig {
            c: self.c1,
            ..self.base.clone()
        };
        base.validate()?;
        if self.k_objective == 0 || self.k_objective > self.base.n_pop {
            return Err(Error::Config(format!(
                "k_objective must lie in [1, n_pop], got {}",
                self.k_objective
            )));
        }
        if !(self.c1.is_finite() && self.c2.is_finite()) {
            return Err(Error::Config("c1 and c2 must be finite".into()));
        }
        Ok(())
    }
}

/// `m_low + round((n_pop - rank + 1) / n_pop * (m_high - m_low))`, rounding
/// half away from zero. Rank 1 is the best bid.
pub fn adaptive_count(rank: usize, n_pop: usize, m_low: usize, m_high: usize) -> Result<usize> {
    if rank == 0 || rank > n_pop {
        return Err(Error::Parameter(format!(
            "rank must lie in [1, {n_pop}], got {rank}"
        )));
    }
    if m_low > m_high {
        return Err(Error::Parameter(format!(
            "m_low {m_low} exceeds m_high {m_high}"
        )));
    }
    let share = (n_pop - rank + 1) as f64 / n_pop as f64;
    Ok(m_low + (share * (m_high - m_low) as f64).round() as usize)
}

/// 1-based ranks by ascending value, ties broken by index.
pub fn rank_population(bids: &[Bid]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..bids.len()).collect();
    order.sort_by(|&a, &b| bids[a].value.total_cmp(&bids[b].value));
    let mut ranks = vec![0; bids.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// `x_i <- x_i + c1 r ∘ (W - x_i) + c2 r ∘ (x_bar - x_i)`, clamped and
/// re-evaluated. One `r` vector per bid feeds both terms unless
/// `independent_r` is set.
#[allow(clippy::too_many_arguments)]
pub fn movement_dual<R: Draws + ?Sized>(
    population: &mut Population,
    w: &[f64],
    x_bar: &[f64],
    c1: f64,
    c2: f64,
    independent_r: bool,
    problem: &ObjectiveProblem,
    rng: &mut R,
) -> Result<()> {
    let bounds = problem.bounds();
    let dim = problem.dimension();
    let mut r1 = vec![0.0; dim];
    let mut r2 = vec![0.0; dim];
    for bid in &mut population.bids {
        r1.iter_mut().for_each(|r| *r = rng.uniform());
        if independent_r {
            r2.iter_mut().for_each(|r| *r = rng.uniform());
        } else {
            r2.copy_from_slice(&r1);
        }
        for j in 0..dim {
            let x = bid.position[j];
            bid.position[j] = x + c1 * r1[j] * (w[j] - x) + c2 * r2[j] * (x_bar[j] - x);
        }
        bounds.clamp_in_place(&mut bid.position);
        bid.evaluated = false;
    }
    population.evaluate(problem)
}

pub fn run_hms_os(problem: &ObjectiveProblem, config: &HmsOsConfig, seed: u64) -> Result<RunTrace> {
    run_hms_os_with(problem, config, &mut RngStream::new(seed))
}

pub fn run_hms_os_with<R: Draws + ?Sized>(
    problem: &ObjectiveProblem,
    config: &HmsOsConfig,
    rng: &mut R,
) -> Result<RunTrace> {
    config.validate()?;
    let base = &config.base;
    let grouping = KMeansOptions::default();
    let mut population = init_population(problem, base.n_pop, base.nfe_max, rng)?;
    let mut trace = RunTrace::start(&population);

    while population.nfe() <= base.nfe_max {
        let counts = if config.adaptive_count {
            rank_population(&population.bids)
                .into_iter()
                .map(|rank| adaptive_count(rank, base.n_pop, base.m_low, base.m_high))
                .collect::<Result<Vec<_>>>()?
        } else {
            Vec::new()
        };

        for i in 0..population.len() {
            // counts is empty unless adaptive
            let q = match counts.get(i) {
                Some(&q) => q,
                None => draw_q(base.m_low, base.m_high, rng),
            };
            let x_star = population.best().position.clone();
            let updated = mental_search(
                &population.bids[i],
                &x_star,
                q,
                base.beta_range,
                problem,
                &mut population.ledger,
                rng,
            )?;
            population.bids[i] = updated;
        }

        let winner = winner_cluster_search_space(&population.bids, base.k_search, &grouping, rng)?;
        if config.dual_clustering {
            let x_bar =
                best_objective_centroid(&population.bids, config.k_objective, &grouping, rng)?;
            movement_dual(
                &mut population,
                &winner.bid.position,
                &x_bar,
                config.c1,
                config.c2,
                config.independent_r,
                problem,
                rng,
            )?;
        } else {
            movement_standard(
                &mut population,
                &winner.bid.position,
                config.c1,
                problem,
                rng,
            )?;
        }
        trace.record(&population);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::population::{Ledger, SearchBounds};

    struct Constant(f64);

    impl Draws for Constant {
        fn uniform(&mut self) -> f64 {
            self.0
        }
        fn standard_normal(&mut self) -> f64 {
            0.0
        }
        fn int_inclusive(&mut self, low: usize, _high: usize) -> usize {
            low
        }
    }

    fn sphere(dim: usize) -> ObjectiveProblem {
        ObjectiveProblem::new(
            "sphere",
            SearchBounds::uniform(dim, -5.0, 5.0).unwrap(),
            |x: &[f64]| x.iter().map(|v| v * v).sum(),
        )
    }

    fn population(bids: &[&[f64]], p: &ObjectiveProblem) -> Population {
        let mut ledger = Ledger::new(1000).unwrap();
        let bids = bids
            .iter()
            .map(|x| ledger.evaluate(p, x.to_vec()).unwrap())
            .collect();
        Population { bids, ledger }
    }

    #[test]
    fn adaptive_count_examples() {
        assert_eq!(adaptive_count(1, 50, 2, 10).unwrap(), 10);
        assert_eq!(adaptive_count(50, 50, 2, 10).unwrap(), 2);
        assert_eq!(adaptive_count(25, 50, 2, 10).unwrap(), 6);
    }

    #[test]
    fn adaptive_count_rounds_half_away_from_zero() {
        // (4 - 3 + 1) / 4 * 1 = 0.5
        assert_eq!(adaptive_count(3, 4, 0, 1).unwrap(), 1);
    }

    #[test]
    fn adaptive_count_rank_errors() {
        assert!(matches!(
            adaptive_count(0, 50, 2, 10),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            adaptive_count(51, 50, 2, 10),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn rank_examples() {
        let b = |v: f64| Bid::evaluated(vec![0.0], v);
        assert_eq!(rank_population(&[b(3.0), b(1.0), b(2.0)]), vec![3, 1, 2]);
        assert_eq!(rank_population(&[b(1.0), b(1.0), b(1.0)]), vec![1, 2, 3]);
        assert_eq!(
            rank_population(&[b(0.0), b(1.0), b(2.0), b(3.0)]),
            vec![1, 2, 3, 4]
        );
    }

    #[test]
    fn dual_zero_coefficients_keep_positions() {
        let p = sphere(2);
        let mut pop = population(&[&[1.0, 2.0], &[-3.0, 0.5]], &p);
        let before = pop.positions();
        movement_dual(
            &mut pop,
            &[0.0, 0.0],
            &[4.0, 4.0],
            0.0,
            0.0,
            false,
            &p,
            &mut RngStream::new(3),
        )
        .unwrap();
        assert_eq!(pop.positions(), before);
    }

    #[test]
    fn dual_coincident_points_stay() {
        let p = sphere(2);
        let mut pop = population(&[&[1.0, -1.0]], &p);
        movement_dual(
            &mut pop,
            &[1.0, -1.0],
            &[1.0, -1.0],
            1.5,
            1.5,
            false,
            &p,
            &mut RngStream::new(3),
        )
        .unwrap();
        assert_eq!(pop.bids[0].position, vec![1.0, -1.0]);
    }

    #[test]
    fn dual_pull_to_w() {
        let p = sphere(2);
        let mut pop = population(&[&[1.0, 2.0], &[-3.0, 0.5]], &p);
        movement_dual(
            &mut pop,
            &[0.25, -0.5],
            &[4.0, 4.0],
            1.0,
            0.0,
            false,
            &p,
            &mut Constant(1.0),
        )
        .unwrap();
        assert!(pop.bids.iter().all(|b| b.position == vec![0.25, -0.5]));
    }

    #[test]
    fn independent_r_consumes_twice() {
        struct Counting(usize);
        impl Draws for Counting {
            fn uniform(&mut self) -> f64 {
                self.0 += 1;
                0.5
            }
            fn standard_normal(&mut self) -> f64 {
                0.0
            }
            fn int_inclusive(&mut self, low: usize, _: usize) -> usize {
                low
            }
        }
        let p = sphere(3);
        let mut pop = population(&[&[1.0, 2.0, 3.0], &[0.0, 0.0, 1.0]], &p);
        let mut shared = Counting(0);
        movement_dual(
            &mut pop,
            &[0.0; 3],
            &[0.0; 3],
            1.0,
            1.0,
            false,
            &p,
            &mut shared,
        )
        .unwrap();
        assert_eq!(shared.0, 6);
        let mut separate = Counting(0);
        movement_dual(
            &mut pop,
            &[0.0; 3],
            &[0.0; 3],
            1.0,
            1.0,
            true,
            &p,
            &mut separate,
        )
        .unwrap();
        assert_eq!(separate.0, 12);
    }

    #[test]
    fn variant_defaults() {
        let full = HmsOsConfig::default();
        assert!(full.adaptive_count && full.dual_clustering);
        assert_eq!(
            (
                full.base.k_search,
                full.k_objective,
                full.base.m_low,
                full.base.m_high
            ),
            (5, 10, 2, 10)
        );
        assert_eq!((full.c1, full.c2), (1.5, 1.5));
        let v1 = HmsOsConfig::v1();
        assert!(v1.adaptive_count && !v1.dual_clustering);
        let v2 = HmsOsConfig::v2();
        assert!(!v2.adaptive_count && v2.dual_clustering);
    }

    #[test]
    fn init_only_trace() {
        let config = HmsOsConfig {
            base: HmsConfig {
                nfe_max: 10,
                m_high: 10,
                ..HmsConfig::default()
            },
            ..HmsOsConfig::default()
        };
        let trace = run_hms_os(&sphere(3), &config, 4).unwrap();
        assert_eq!(trace.records.len(), 1);
    }

    #[test]
    fn k_objective_above_population_rejected() {
        let config = HmsOsConfig {
            k_objective: 60,
            ..HmsOsConfig::default()
        };
        assert!(matches!(config.validate(), Err(Error::Config(_))));
    }
}
