//! Candidate solutions, search boxes, problems and the evaluation ledger
//! shared by every optimizer in the crate.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{check_dimension, Error, Result};
use crate::rng::Draws;

/// A candidate solution ("bid") with its cached objective value.
#[derive(Debug, Clone, PartialEq)]
pub struct Bid {
    pub position: Vec<f64>,
    pub value: f64,
    pub evaluated: bool,
}

impl Bid {
    /// An unevaluated bid at `position`.
    pub fn new(position: Vec<f64>) -> Self {
        Self {
            position,
            value: f64::INFINITY,
            evaluated: false,
        }
    }

    pub fn evaluated(position: Vec<f64>, value: f64) -> Self {
        Self {
            position,
            value,
            evaluated: true,
        }
    }

    pub fn dimension(&self) -> usize {
        self.position.len()
    }
}

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchBounds {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBounds {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        check_dimension(lower.len(), upper.len())?;
        if lower.is_empty() {
            return Err(Error::Config(
                "bounds must have at least one coordinate".into(),
            ));
        }
        for (j, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Config(format!(
                    "invalid bounds at coordinate {j}: lower {lo} must be below upper {hi}"
                )));
            }
        }
        Ok(Self { lower, upper })
    }

    /// The same interval `[lower, upper]` on every coordinate.
    pub fn uniform(dimension: usize, lower: f64, upper: f64) -> Result<Self> {
        Self::new(vec![lower; dimension], vec![upper; dimension])
    }

    pub fn dimension(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn contains(&self, position: &[f64]) -> bool {
        position.len() == self.dimension()
            && position
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(x, (lo, hi))| *lo <= *x && *x <= *hi)
    }

    /// Draws a point coordinate-wise uniformly inside the box.
    pub fn sample<R: Draws + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.lower
            .iter()
            .zip(&self.upper)
            .map(|(lo, hi)| lo + rng.uniform() * (hi - lo))
            .collect()
    }

    /// In-place variant of [`clamp_to_bounds`] for callers that already
    /// checked the length.
    pub(crate) fn clamp_in_place(&self, position: &mut [f64]) {
        for ((x, lo), hi) in position.iter_mut().zip(&self.lower).zip(&self.upper) {
            *x = x.max(*lo).min(*hi);
        }
    }
}

/// Coordinate-wise projection onto the box.
pub fn clamp_to_bounds(position: &[f64], bounds: &SearchBounds) -> Result<Vec<f64>> {
    check_dimension(bounds.dimension(), position.len())?;
    let mut out = position.to_vec();
    bounds.clamp_in_place(&mut out);
    Ok(out)
}

pub type Evaluator = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A black-box minimization problem.
#[derive(Clone)]
pub struct ObjectiveProblem {
    name: String,
    bounds: SearchBounds,
    evaluator: Evaluator,
    optimum_value: Option<f64>,
}

impl ObjectiveProblem {
    pub fn new(
        name: impl Into<String>,
        bounds: SearchBounds,
        evaluator: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            bounds,
            evaluator: Arc::new(evaluator),
            optimum_value: None,
        }
    }

    pub fn from_arc(name: impl Into<String>, bounds: SearchBounds, evaluator: Evaluator) -> Self {
        Self {
            name: name.into(),
            bounds,
            evaluator,
            optimum_value: None,
        }
    }

    pub fn with_optimum(mut self, value: f64) -> Self {
        self.optimum_value = Some(value);
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dimension(&self) -> usize {
        self.bounds.dimension()
    }

    pub fn bounds(&self) -> &SearchBounds {
        &self.bounds
    }

    pub fn optimum_value(&self) -> Option<f64> {
        self.optimum_value
    }

    pub fn evaluator(&self) -> &Evaluator {
        &self.evaluator
    }

    /// Raw evaluator call; does not touch any ledger.
    pub fn value_at(&self, position: &[f64]) -> f64 {
        (self.evaluator)(position)
    }
}

impl fmt::Debug for ObjectiveProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ObjectiveProblem")
            .field("name", &self.name)
            .field("dimension", &self.dimension())
            .field("optimum_value", &self.optimum_value)
            .finish_non_exhaustive()
    }
}

/// Evaluation budget and best-so-far bookkeeping.
///
/// Every objective evaluation in an optimizer goes through
/// [`Ledger::evaluate`], so `nfe` always equals the number of evaluator calls.
#[derive(Debug, Clone)]
pub struct Ledger {
    nfe: u64,
    nfe_max: u64,
    best: Option<Bid>,
}

impl Ledger {
    pub fn new(nfe_max: u64) -> Result<Self> {
        if nfe_max == 0 {
            return Err(Error::Parameter("nfe_max must be positive".into()));
        }
        Ok(Self {
            nfe: 0,
            nfe_max,
            best: None,
        })
    }

    pub fn nfe(&self) -> u64 {
        self.nfe
    }

    pub fn nfe_max(&self) -> u64 {
        self.nfe_max
    }

    /// Best bid seen so far, if anything has been evaluated.
    pub fn best(&self) -> Option<&Bid> {
        self.best.as_ref()
    }

    /// Evaluates `position`, charges one evaluation and updates best-so-far.
    pub fn evaluate(&mut self, problem: &ObjectiveProblem, position: Vec<f64>) -> Result<Bid> {
        let value = problem.value_at(&position);
        self.nfe += 1;
        if !value.is_finite() {
            return Err(Error::NonFinite { value, position });
        }
        let bid = Bid::evaluated(position, value);
        self.observe(&bid);
        Ok(bid)
    }

    /// Offers an already-evaluated bid as a best-so-far candidate.
    pub fn observe(&mut self, bid: &Bid) {
        debug_assert!(bid.evaluated);
        match &self.best {
            Some(best) if best.value <= bid.value => {}
            _ => self.best = Some(bid.clone()),
        }
    }
}

/// The working set of bids plus its ledger.
#[derive(Debug, Clone)]
pub struct Population {
    pub bids: Vec<Bid>,
    pub ledger: Ledger,
}

impl Population {
    pub fn len(&self) -> usize {
        self.bids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bids.is_empty()
    }

    pub fn nfe(&self) -> u64 {
        self.ledger.nfe()
    }

    pub fn nfe_max(&self) -> u64 {
        self.ledger.nfe_max()
    }

    /// Best bid found so far.
    ///
    /// # Panics
    /// If nothing has been evaluated yet; [`init_population`] always
    /// evaluates.
    pub fn best(&self) -> &Bid {
        self.ledger.best().expect("population has no evaluated bid")
    }

    pub fn values(&self) -> Vec<f64> {
        self.bids.iter().map(|b| b.value).collect()
    }

    pub fn positions(&self) -> Vec<Vec<f64>> {
        self.bids.iter().map(|b| b.position.clone()).collect()
    }

    /// Evaluates every bid whose `evaluated` flag is false, in index order.
    pub fn evaluate(&mut self, problem: &ObjectiveProblem) -> Result<()> {
        for bid in &mut self.bids {
            if !bid.evaluated {
                *bid = self
                    .ledger
                    .evaluate(problem, std::mem::take(&mut bid.position))?;
            }
        }
        Ok(())
    }
}

/// Draws `n_pop` bids uniformly in the problem box (bid by bid, coordinate
/// by coordinate) and evaluates them.
pub fn init_population<R: Draws + ?Sized>(
    problem: &ObjectiveProblem,
    n_pop: usize,
    nfe_max: u64,
    rng: &mut R,
) -> Result<Population> {
    if n_pop < 2 {
        return Err(Error::Parameter(format!(
            "n_pop must be at least 2, got {n_pop}"
        )));
    }
    let bids = (0..n_pop)
        .map(|_| Bid::new(problem.bounds().sample(rng)))
        .collect();
    let mut population = Population {
        bids,
        ledger: Ledger::new(nfe_max)?,
    };
    population.evaluate(problem)?;
    Ok(population)
}

/// One point of a convergence record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub nfe: u64,
    pub best_value: f64,
}

/// Outcome of one seeded optimizer run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunTrace {
    pub records: Vec<TraceRecord>,
    pub best: Bid,
    pub nfe: u64,
}

impl RunTrace {
    pub(crate) fn start(population: &Population) -> Self {
        let mut trace = Self {
            records: Vec::new(),
            best: population.best().clone(),
            nfe: population.nfe(),
        };
        trace.record(population);
        trace
    }

    pub(crate) fn record(&mut self, population: &Population) {
        self.best = population.best().clone();
        self.nfe = population.nfe();
        self.records.push(TraceRecord {
            nfe: self.nfe,
            best_value: self.best.value,
        });
    }

    pub fn final_value(&self) -> f64 {
        self.best.value
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn sphere(dim: usize, lo: f64, hi: f64) -> ObjectiveProblem {
        ObjectiveProblem::new(
            "sphere",
            SearchBounds::uniform(dim, lo, hi).unwrap(),
            |x: &[f64]| x.iter().map(|v| v * v).sum(),
        )
    }

    #[test]
    fn clamp_examples() {
        let b2 = SearchBounds::uniform(2, -1.0, 1.0).unwrap();
        assert_eq!(clamp_to_bounds(&[1.5, -2.0], &b2).unwrap(), vec![1.0, -1.0]);
        assert_eq!(clamp_to_bounds(&[0.3, 0.7], &b2).unwrap(), vec![0.3, 0.7]);
        let b3 = SearchBounds::uniform(3, 0.0, 1.0).unwrap();
        assert_eq!(
            clamp_to_bounds(&[-5.0, 0.0, 5.0], &b3).unwrap(),
            vec![0.0, 0.0, 1.0]
        );
    }

    #[test]
    fn clamp_length_mismatch() {
        let b2 = SearchBounds::uniform(2, -1.0, 1.0).unwrap();
        assert_eq!(
            clamp_to_bounds(&[0.0, 0.0, 0.0], &b2),
            Err(Error::Dimension {
                expected: 2,
                actual: 3
            })
        );
    }

    #[test]
    fn bounds_reject_inverted() {
        assert!(matches!(
            SearchBounds::new(vec![0.0, 1.0], vec![1.0, 1.0]),
            Err(Error::Config(_))
        ));
        assert!(SearchBounds::new(vec![2.0], vec![1.0]).is_err());
    }

    #[test]
    fn init_population_in_box() {
        let p = sphere(2, -1.0, 1.0);
        let pop = init_population(&p, 4, 100, &mut RngStream::new(3)).unwrap();
        assert_eq!(pop.len(), 4);
        assert_eq!(pop.nfe(), 4);
        for bid in &pop.bids {
            assert!(bid.evaluated);
            assert!(p.bounds().contains(&bid.position));
        }
        let min = pop.values().into_iter().fold(f64::INFINITY, f64::min);
        assert_eq!(pop.best().value, min);
    }

    #[test]
    fn init_population_deterministic() {
        let p = sphere(3, -5.0, 5.0);
        let a = init_population(&p, 10, 100, &mut RngStream::new(11)).unwrap();
        let b = init_population(&p, 10, 100, &mut RngStream::new(11)).unwrap();
        assert_eq!(a.bids, b.bids);
    }

    #[test]
    fn init_population_rejects_small() {
        let p = sphere(2, -1.0, 1.0);
        assert!(matches!(
            init_population(&p, 1, 100, &mut RngStream::new(0)),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn evaluate_counts_only_fresh_bids() {
        let calls = Arc::new(AtomicUsize::new(0));
        let c = calls.clone();
        let p = ObjectiveProblem::new(
            "counting",
            SearchBounds::uniform(2, -1.0, 1.0).unwrap(),
            move |x: &[f64]| {
                c.fetch_add(1, Ordering::SeqCst);
                x.iter().map(|v| v * v).sum()
            },
        );
        let mut pop = Population {
            bids: vec![
                Bid::new(vec![0.0, 0.0]),
                Bid::new(vec![0.5, 0.5]),
                Bid::new(vec![1.0, 0.0]),
            ],
            ledger: Ledger::new(10).unwrap(),
        };
        pop.evaluate(&p).unwrap();
        assert_eq!(pop.nfe(), 3);
        assert_eq!(pop.bids[0].value, 0.0);
        assert_eq!(pop.best().position, vec![0.0, 0.0]);
        pop.evaluate(&p).unwrap();
        assert_eq!(pop.nfe(), 3);
        assert_eq!(calls.load(Ordering::SeqCst), 3);
    }

    #[test]
    fn non_finite_value_aborts_with_position() {
        let p = ObjectiveProblem::new(
            "bad",
            SearchBounds::uniform(1, -1.0, 1.0).unwrap(),
            |x: &[f64]| if x[0] > 0.0 { f64::NAN } else { 0.0 },
        );
        let mut ledger = Ledger::new(5).unwrap();
        match ledger.evaluate(&p, vec![0.5]) {
            Err(Error::NonFinite { position, .. }) => assert_eq!(position, vec![0.5]),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn ledger_best_is_monotone() {
        let p = sphere(1, -10.0, 10.0);
        let mut ledger = Ledger::new(10).unwrap();
        let mut last = f64::INFINITY;
        for x in [3.0, 1.0, 2.0, -0.5, 4.0] {
            ledger.evaluate(&p, vec![x]).unwrap();
            let best = ledger.best().unwrap().value;
            assert!(best <= last);
            last = best;
        }
        assert_eq!(last, 0.25);
    }

    #[test]
    fn problem_types_are_send_sync() {
        fn assert_send_sync<T: Send + Sync>() {}
        assert_send_sync::<ObjectiveProblem>();
        assert_send_sync::<Population>();
        assert_send_sync::<RunTrace>();
    }
}
