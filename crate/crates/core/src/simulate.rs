//! Monte-Carlo blind search, local descent and blind-seeded descent, on
//! concrete landscapes and on abstract class models.
//!
//! Every cost evaluation counts as one trial, rejected neighbours
//! included. A run given a start point or level does not pay for it.

use std::fmt::Write as _;

use rand::Rng;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::analysis::SeedThreshold;
use crate::empirical::Landscape;
use crate::model::{ClassModel, ModelError};
use crate::rng::{self, SimRng};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("no point with cost {level} found to start from")]
    NoStartAtLevel { level: u64 },
    #[error("cannot aggregate an empty list of traces")]
    EmptyInput,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// When a proposed neighbour replaces the current point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum AcceptRule {
    /// Only strictly better neighbours.
    #[default]
    Strict,
    /// Equal or better neighbours.
    Plateau,
}

impl AcceptRule {
    #[inline]
    pub fn accepts(&self, new: u64, old: u64) -> bool {
        match self {
            AcceptRule::Strict => new < old,
            AcceptRule::Plateau => new <= old,
        }
    }
}

impl std::str::FromStr for AcceptRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "strict" => Ok(Self::Strict),
            "plateau" => Ok(Self::Plateau),
            other => Err(format!("unknown acceptance rule '{other}' (strict|plateau)")),
        }
    }
}

/// Something local search can run on.
pub trait SearchSpace: Sync {
    type State: Clone + Send;

    fn random_state(&self, rng: &mut SimRng) -> Self::State;
    fn cost(&self, s: &Self::State) -> u64;
    /// Draws a uniformly random neighbour: its move handle and cost.
    fn propose(&self, s: &Self::State, cost: u64, rng: &mut SimRng) -> (usize, u64);
    fn apply(&self, s: &mut Self::State, mv: usize);
    /// Whether any neighbour of `s` would be accepted.
    fn can_move(&self, s: &Self::State, cost: u64, rule: AcceptRule) -> bool;
    /// Consecutive rejections after which [`SearchSpace::can_move`] is consulted.
    fn stuck_check_after(&self) -> u64;
    /// A state with cost `level`, found by rejection sampling unless overridden.
    /// The draws are not charged as trials.
    fn state_at_level(&self, level: u64, rng: &mut SimRng, max_draws: u64) -> Option<Self::State> {
        (0..max_draws).map(|_| self.random_state(rng)).find(|s| self.cost(s) == level)
    }
}

impl<L: Landscape> SearchSpace for L {
    type State = L::Point;

    fn random_state(&self, rng: &mut SimRng) -> L::Point {
        self.random_point(rng)
    }

    fn cost(&self, s: &L::Point) -> u64 {
        Landscape::cost(self, s)
    }

    #[inline]
    fn propose(&self, s: &L::Point, cost: u64, rng: &mut SimRng) -> (usize, u64) {
        let idx = rng.random_range(0..self.neighbour_count());
        (idx, self.neighbour_cost(s, cost, idx))
    }

    fn apply(&self, s: &mut L::Point, mv: usize) {
        self.apply_neighbour(s, mv);
    }

    fn can_move(&self, s: &L::Point, cost: u64, rule: AcceptRule) -> bool {
        (0..self.neighbour_count()).any(|i| rule.accepts(self.neighbour_cost(s, cost, i), cost))
    }

    fn stuck_check_after(&self) -> u64 {
        self.neighbour_count() as u64
    }
}

/// Draws next levels from the rows of a class model's kernel.
#[derive(Debug, Clone)]
pub struct KernelSampler {
    rows: Vec<WeightedAliasIndex<f64>>,
}

impl KernelSampler {
    pub fn new(model: &ClassModel) -> Result<Self, SimError> {
        let rows = model
            .kernel
            .rows()
            .iter()
            .enumerate()
            .map(|(k, r)| {
                WeightedAliasIndex::new(r.clone())
                    .map_err(|e| SimError::Invalid(format!("row {k} cannot be sampled: {e}")))
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { rows })
    }

    #[inline]
    pub fn sample(&self, k: usize, rng: &mut SimRng) -> usize {
        self.rows[k].sample(rng)
    }
}

/// One draw from `pn(k, ·)`.
pub fn sample_kernel(model: &ClassModel, k: usize, rng: &mut SimRng) -> Result<usize, SimError> {
    if k > model.k_max() {
        return Err(SimError::Invalid(format!("level {k} above k_max {}", model.k_max())));
    }
    let row = WeightedAliasIndex::new(model.kernel.row(k).to_vec())
        .map_err(|e| SimError::Invalid(format!("row {k} cannot be sampled: {e}")))?;
    Ok(row.sample(rng))
}

/// A class model as a search space: states are cost levels, points are
/// drawn from `p` and neighbours from `pn(k, ·)`.
#[derive(Debug, Clone)]
pub struct AbstractSpace {
    k_max: usize,
    blind: WeightedAliasIndex<f64>,
    kernel: KernelSampler,
    /// `pn(k,j) > 0` for some `j < k`.
    can_improve: Vec<bool>,
}

impl AbstractSpace {
    pub fn new(model: &ClassModel) -> Result<Self, SimError> {
        let blind = WeightedAliasIndex::new(model.dist.probs().to_vec())
            .map_err(|e| SimError::Invalid(format!("p cannot be sampled: {e}")))?;
        let n = model.k_max();
        Ok(Self {
            k_max: n,
            blind,
            kernel: KernelSampler::new(model)?,
            can_improve: (0..=n).map(|k| model.kernel.row(k)[..k].iter().any(|&v| v > 0.0)).collect(),
        })
    }
}

impl SearchSpace for AbstractSpace {
    type State = usize;

    fn random_state(&self, rng: &mut SimRng) -> usize {
        self.blind.sample(rng)
    }

    fn cost(&self, s: &usize) -> u64 {
        *s as u64
    }

    #[inline]
    fn propose(&self, s: &usize, _cost: u64, rng: &mut SimRng) -> (usize, u64) {
        let j = self.kernel.sample(*s, rng);
        (j, j as u64)
    }

    fn apply(&self, s: &mut usize, mv: usize) {
        *s = mv;
    }

    fn can_move(&self, s: &usize, _cost: u64, _rule: AcceptRule) -> bool {
        // A plateau move inside one level leaves the state unchanged, so it
        // cannot rescue a level without improving neighbours.
        self.can_improve[*s]
    }

    fn stuck_check_after(&self) -> u64 {
        1
    }

    fn state_at_level(&self, level: u64, _rng: &mut SimRng, _max_draws: u64) -> Option<usize> {
        (level as usize <= self.k_max).then_some(level as usize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Phase {
    Blind,
    Descent,
}

impl Phase {
    fn name(&self) -> &'static str {
        match self {
            Phase::Blind => "blind",
            Phase::Descent => "descent",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Outcome {
    /// A point at or below the target cost was found.
    Reached,
    /// The trial cap ran out first.
    CapExceeded,
    /// Descent sits where no neighbour is acceptable.
    Stuck,
}

/// A visited point: the trial that evaluated it and its cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TraceStep {
    pub phase: Phase,
    pub trial: u64,
    pub fitness: u64,
}

/// One run. `steps` lists the start point and every accepted point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trace {
    pub seed: u64,
    pub trials: u64,
    pub terminal: u64,
    pub outcome: Outcome,
    pub steps: Vec<TraceStep>,
}

impl Trace {
    /// Fitness of the accepted points, in order.
    pub fn fitness(&self) -> Vec<u64> {
        self.steps.iter().map(|s| s.fitness).collect()
    }
}

/// Draws a search start point.
#[derive(Debug, Clone)]
pub enum Start<S> {
    Point(S),
    /// Any point at this cost; free of charge.
    Level(u64),
    /// A uniformly random point, charged as one trial.
    Random,
}

/// Budget for finding a start point at a given level by rejection sampling.
pub const START_DRAWS: u64 = 10_000_000;

/// Blind search: uniform samples until one costs at most `target`.
pub fn run_blind<S: SearchSpace>(space: &S, target: u64, seed: u64, cap: u64) -> Result<Trace, SimError> {
    if cap == 0 {
        return Err(SimError::Invalid("cap must be at least 1".into()));
    }
    let mut r = rng::stream(seed, 0);
    let mut best = u64::MAX;
    let mut steps = Vec::new();
    for trial in 1..=cap {
        let c = space.cost(&space.random_state(&mut r));
        if c < best {
            best = c;
            steps.push(TraceStep { phase: Phase::Blind, trial, fitness: c });
        }
        if c <= target {
            return Ok(Trace { seed, trials: trial, terminal: c, outcome: Outcome::Reached, steps });
        }
    }
    Ok(Trace { seed, trials: cap, terminal: best, outcome: Outcome::CapExceeded, steps })
}

/// Continues descent from `state`; trials already spent are `trials`.
#[allow(clippy::too_many_arguments)]
fn descend<S: SearchSpace>(
    space: &S,
    mut state: S::State,
    mut cost: u64,
    rule: AcceptRule,
    target: u64,
    cap: u64,
    mut trials: u64,
    steps: &mut Vec<TraceStep>,
    r: &mut SimRng,
) -> (u64, u64, Outcome) {
    let check = space.stuck_check_after().max(1);
    let mut rejected = 0u64;
    while cost > target {
        if trials >= cap {
            return (trials, cost, Outcome::CapExceeded);
        }
        if rejected == check && !space.can_move(&state, cost, rule) {
            return (trials, cost, Outcome::Stuck);
        }
        let (mv, c) = space.propose(&state, cost, r);
        trials += 1;
        if rule.accepts(c, cost) {
            space.apply(&mut state, mv);
            cost = c;
            rejected = 0;
            steps.push(TraceStep { phase: Phase::Descent, trial: trials, fitness: c });
        } else {
            rejected += 1;
        }
    }
    (trials, cost, Outcome::Reached)
}

/// First-improvement descent: random neighbours are evaluated one at a
/// time and accepted under `rule`, until the cost is at most `target`,
/// the cap is hit, or no neighbour is acceptable.
pub fn run_descent<S: SearchSpace>(
    space: &S,
    start: Start<S::State>,
    rule: AcceptRule,
    target: u64,
    seed: u64,
    cap: u64,
) -> Result<Trace, SimError> {
    let mut r = rng::stream(seed, 0);
    let (state, spent) = match start {
        Start::Point(p) => (p, 0),
        Start::Level(l) => (
            space
                .state_at_level(l, &mut r, START_DRAWS)
                .ok_or(SimError::NoStartAtLevel { level: l })?,
            0,
        ),
        Start::Random => (space.random_state(&mut r), 1),
    };
    let cost = space.cost(&state);
    let mut steps = vec![TraceStep { phase: Phase::Descent, trial: spent, fitness: cost }];
    let (trials, terminal, outcome) = descend(space, state, cost, rule, target, cap, spent, &mut steps, &mut r);
    Ok(Trace { seed, trials, terminal, outcome, steps })
}

/// Blind sampling until a cost accepted by `threshold_rule` for
/// `threshold` (or the target itself) turns up, then descent from there.
/// Both phases share the trial count and the cap.
#[allow(clippy::too_many_arguments)]
pub fn run_seeded<S: SearchSpace>(
    space: &S,
    threshold: u64,
    threshold_rule: SeedThreshold,
    rule: AcceptRule,
    target: u64,
    seed: u64,
    cap: u64,
) -> Result<Trace, SimError> {
    if threshold < 1 {
        return Err(SimError::Invalid("threshold must be at least 1".into()));
    }
    if cap == 0 {
        return Err(SimError::Invalid("cap must be at least 1".into()));
    }
    let mut r = rng::stream(seed, 0);
    let mut steps = Vec::new();
    let mut best = u64::MAX;
    for trial in 1..=cap {
        let s = space.random_state(&mut r);
        let c = space.cost(&s);
        if c < best {
            best = c;
            steps.push(TraceStep { phase: Phase::Blind, trial, fitness: c });
        }
        if c <= target || threshold_rule.accepts(c, threshold) {
            let (trials, terminal, outcome) = descend(space, s, c, rule, target, cap, trial, &mut steps, &mut r);
            return Ok(Trace { seed, trials, terminal, outcome, steps });
        }
    }
    Ok(Trace { seed, trials: cap, terminal: best, outcome: Outcome::CapExceeded, steps })
}

/// Runs `n` independent runs in parallel; run `i` gets seed
/// `derive_seed(master, i)`, so results do not depend on the thread count.
pub fn run_many<F>(n: usize, master: u64, run: F) -> Result<Vec<Trace>, SimError>
where
    F: Fn(u64) -> Result<Trace, SimError> + Sync,
{
    (0..n as u64).into_par_iter().map(|i| run(rng::derive_seed(master, i))).collect()
}

/// Summary statistics of trial counts.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub runs: usize,
    pub mean: f64,
    /// Standard error of the mean; 0 for a single run.
    pub std_err: f64,
    pub min: u64,
    pub q25: u64,
    pub median: u64,
    pub q75: u64,
    pub max: u64,
    /// Fraction of runs that reached the target.
    pub success: f64,
    pub stuck: f64,
}

impl Aggregate {
    /// `|mean − expected| ≤ z·SE`.
    pub fn within(&self, expected: f64, z: f64) -> bool {
        (self.mean - expected).abs() <= z * self.std_err
    }

    pub fn to_csv(&self) -> String {
        format!(
            "runs,mean,std_err,min,q25,median,q75,max,success,stuck\n{},{},{},{},{},{},{},{},{},{}\n",
            self.runs,
            self.mean,
            self.std_err,
            self.min,
            self.q25,
            self.median,
            self.q75,
            self.max,
            self.success,
            self.stuck
        )
    }
}

/// Nearest-rank quantile of sorted values.
fn quantile(sorted: &[u64], q: f64) -> u64 {
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

pub fn aggregate(traces: &[Trace]) -> Result<Aggregate, SimError> {
    if traces.is_empty() {
        return Err(SimError::EmptyInput);
    }
    let n = traces.len();
    let mut counts: Vec<u64> = traces.iter().map(|t| t.trials).collect();
    counts.sort_unstable();
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n as f64;
    let std_err = if n > 1 {
        let var = counts.iter().map(|&c| (c as f64 - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        (var / n as f64).sqrt()
    } else {
        0.0
    };
    let frac = |o: Outcome| traces.iter().filter(|t| t.outcome == o).count() as f64 / n as f64;
    Ok(Aggregate {
        runs: n,
        mean,
        std_err,
        min: counts[0],
        q25: quantile(&counts, 0.25),
        median: quantile(&counts, 0.5),
        q75: quantile(&counts, 0.75),
        max: counts[n - 1],
        success: frac(Outcome::Reached),
        stuck: frac(Outcome::Stuck),
    })
}

/// `run_id,phase,trial_index,fitness` rows for the accepted points.
pub fn traces_csv(traces: &[Trace]) -> String {
    let mut out = String::from("run_id,phase,trial_index,fitness\n");
    for (i, t) in traces.iter().enumerate() {
        for s in &t.steps {
            let _ = writeln!(out, "{i},{},{},{}", s.phase.name(), s.trial, s.fitness);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::{blind_seeded_steps, steps};
    use crate::benchmarks::{benchmark_model, build_counts_class, build_uniform, CountsClassSpec};
    use crate::empirical::gen_tsp;
    use crate::model::FitnessDistribution;

    fn table6() -> ClassModel {
        build_counts_class(&CountsClassSpec::table6(&[3.0, 2.5, 1.5, 0.5])).unwrap().model
    }

    #[test]
    fn degenerate_row_always_same_level() {
        let d = FitnessDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let k = crate::model::NeighborKernel::new(vec![vec![1.0, 0.0, 0.0]; 3]).unwrap();
        let m = ClassModel::from_kernel(d, k).unwrap();
        let mut r = rng::stream(1, 0);
        for _ in 0..100 {
            assert_eq!(sample_kernel(&m, 2, &mut r).unwrap(), 0);
        }
    }

    #[test]
    fn kernel_draws_pass_chi_square() {
        let m = table6();
        let s = KernelSampler::new(&m).unwrap();
        let mut r = rng::stream(7, 0);
        let n = 1_000_000;
        let k = 3;
        let mut hist = vec![0u64; m.k_max() + 1];
        for _ in 0..n {
            hist[s.sample(k, &mut r)] += 1;
        }
        let row = m.kernel.row(k);
        let mut chi = 0.0;
        let mut dof = 0;
        for (j, &c) in hist.iter().enumerate() {
            if row[j] > 0.0 {
                let e = row[j] * n as f64;
                chi += (c as f64 - e).powi(2) / e;
                dof += 1;
            } else {
                assert_eq!(c, 0);
            }
        }
        // 0.01 critical values of chi-square for 1..=10 degrees of freedom.
        let crit = [6.63, 9.21, 11.34, 13.28, 15.09, 16.81, 18.48, 20.09, 21.67, 23.21];
        assert!(chi < crit[dof - 2], "chi2 {chi} with {} dof", dof - 1);
    }

    #[test]
    fn same_seed_same_draws() {
        let m = table6();
        let mut a = rng::stream(3, 0);
        let mut b = rng::stream(3, 0);
        for _ in 0..50 {
            assert_eq!(sample_kernel(&m, 4, &mut a).unwrap(), sample_kernel(&m, 4, &mut b).unwrap());
        }
    }

    #[test]
    fn blind_to_worst_cost_takes_one_trial() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let t = run_blind(&space, 9, 1, 10).unwrap();
        assert_eq!(t.trials, 1);
        assert_eq!(t.outcome, Outcome::Reached);
    }

    #[test]
    fn descent_from_zero_is_free() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let t = run_descent(&space, Start::Level(0), AcceptRule::Strict, 0, 1, 10).unwrap();
        assert_eq!(t.trials, 0);
        assert_eq!(t.fitness(), vec![0]);
    }

    #[test]
    fn threshold_one_is_blind_search() {
        let space = AbstractSpace::new(&table6()).unwrap();
        for seed in 0..20 {
            let s = run_seeded(&space, 1, SeedThreshold::Below, AcceptRule::Strict, 0, seed, 1_000_000).unwrap();
            let b = run_blind(&space, 0, seed, 1_000_000).unwrap();
            assert_eq!(s.trials, b.trials);
        }
    }

    #[test]
    fn threshold_above_worst_starts_descent_at_once() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let t = run_seeded(&space, 100, SeedThreshold::Below, AcceptRule::Strict, 0, 4, 1_000_000).unwrap();
        assert_eq!(t.steps[0].trial, 1);
        assert!(t.steps.iter().skip(1).all(|s| s.phase == Phase::Descent));
    }

    #[test]
    fn accepted_fitness_strictly_decreases() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let t = run_descent(&space, Start::Level(4), AcceptRule::Strict, 0, 9, 1_000_000).unwrap();
        assert!(t.fitness().windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn blind_mean_matches_inverse_p0() {
        let m = table6();
        let space = AbstractSpace::new(&m).unwrap();
        let traces = run_many(20_000, 5, |s| run_blind(&space, 0, s, u64::MAX)).unwrap();
        let agg = aggregate(&traces).unwrap();
        assert!(agg.within(1.0 / m.dist.p(0), 3.0), "{agg:?}");
    }

    #[test]
    fn descent_mean_matches_steps() {
        let m = table6();
        let space = AbstractSpace::new(&m).unwrap();
        let expected = steps(&m, 4).unwrap().at(4);
        let traces =
            run_many(10_000, 11, |s| run_descent(&space, Start::Level(4), AcceptRule::Strict, 0, s, u64::MAX)).unwrap();
        let agg = aggregate(&traces).unwrap();
        assert!(agg.within(expected, 3.0), "{agg:?} vs {expected}");
        assert_eq!(agg.success, 1.0);
    }

    #[test]
    fn seeded_mean_matches_blsteps() {
        let m = benchmark_model(&build_uniform(), 5).unwrap();
        let space = AbstractSpace::new(&m).unwrap();
        let expected = blind_seeded_steps(&m, 20, SeedThreshold::AtMost).unwrap();
        let traces = run_many(10_000, 2, |s| {
            run_seeded(&space, 20, SeedThreshold::AtMost, AcceptRule::Strict, 0, s, u64::MAX)
        })
        .unwrap();
        let agg = aggregate(&traces).unwrap();
        assert!(agg.within(expected, 3.0), "{agg:?} vs {expected}");
    }

    #[test]
    fn runs_are_deterministic() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let f = |s| run_descent(&space, Start::Level(4), AcceptRule::Strict, 0, s, 10_000);
        assert_eq!(run_many(50, 3, f).unwrap(), run_many(50, 3, f).unwrap());
    }

    #[test]
    fn aggregate_conventions() {
        assert_eq!(aggregate(&[]), Err(SimError::EmptyInput));
        let t = Trace { seed: 0, trials: 7, terminal: 0, outcome: Outcome::Reached, steps: vec![] };
        let one = aggregate(std::slice::from_ref(&t)).unwrap();
        assert_eq!((one.mean, one.std_err), (7.0, 0.0));
        let two = aggregate(&[t.clone(), t]).unwrap();
        assert_eq!(two.std_err, 0.0);
    }

    #[test]
    fn concrete_descent_ends_reached_stuck_or_capped() {
        let t = gen_tsp(10, 20, 4).unwrap();
        for seed in 0..10 {
            let tr = run_descent(&t, Start::Random, AcceptRule::Strict, 0, seed, 5_000).unwrap();
            assert!(tr.fitness().windows(2).all(|w| w[1] < w[0]));
            // No tour costs 0, so the run ends in a local optimum.
            assert_eq!(tr.outcome, Outcome::Stuck);
            let p = tr.steps.last().unwrap().fitness;
            assert_eq!(tr.terminal, p);
        }
    }

    #[test]
    fn plateau_rule_accepts_equal_cost() {
        assert!(AcceptRule::Plateau.accepts(5, 5));
        assert!(!AcceptRule::Strict.accepts(5, 5));
        let t = gen_tsp(8, 2, 1).unwrap();
        let tr = run_descent(&t, Start::Random, AcceptRule::Plateau, 0, 3, 2_000).unwrap();
        assert!(tr.fitness().windows(2).all(|w| w[1] <= w[0]));
        assert_ne!(tr.outcome, Outcome::Reached);
    }

    #[test]
    fn traces_csv_has_header_and_rows() {
        let space = AbstractSpace::new(&table6()).unwrap();
        let t = run_seeded(&space, 3, SeedThreshold::Below, AcceptRule::Strict, 0, 1, 100_000).unwrap();
        let csv = traces_csv(std::slice::from_ref(&t));
        assert!(csv.starts_with("run_id,phase,trial_index,fitness\n"));
        assert_eq!(csv.lines().count(), 1 + t.steps.len());
    }
}
