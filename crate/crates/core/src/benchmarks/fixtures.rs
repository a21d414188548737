//! Counter-example fixtures: each drops exactly one hypothesis of the
//! main improvement theorem, and neighbourhood search then does worse
//! than blind search at level 25.
//!
//! All rows other than row 25 are blind rows (`pn = p`).

use serde::Serialize;

use crate::model::{ClassModel, FitnessDistribution, NeighborKernel};
use crate::numeric::leq;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Counterexample {
    NonMonotoneP,
    NonNsfWeights,
    NonNormal,
    SameCostOnly,
}

impl Counterexample {
    pub const ALL: [Counterexample; 4] = [
        Counterexample::NonMonotoneP,
        Counterexample::NonNsfWeights,
        Counterexample::NonNormal,
        Counterexample::SameCostOnly,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Counterexample::NonMonotoneP => "non-monotone-p",
            Counterexample::NonNsfWeights => "non-nsf-weights",
            Counterexample::NonNormal => "non-normal",
            Counterexample::SameCostOnly => "same-cost-only",
        }
    }
}

/// The four hypotheses of the improvement theorem at a level `k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Hypothesis {
    /// `k ≤ k_ge`: `p` is non-decreasing from the optimum up to at least `2k`.
    GoodEnough,
    /// NSF at `k` over every cost distance.
    Nsf,
    /// Improving neighbours at least as likely as their weighted share.
    Normal,
    /// `pn(k,k) ≤ p(k)` or `r̄(k) ≥ 1`.
    SameCostBound,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct HypothesisReport {
    pub good_enough: bool,
    pub nsf: bool,
    pub normal: bool,
    pub same_cost_bound: bool,
}

impl HypothesisReport {
    pub fn holds(&self, h: Hypothesis) -> bool {
        match h {
            Hypothesis::GoodEnough => self.good_enough,
            Hypothesis::Nsf => self.nsf,
            Hypothesis::Normal => self.normal,
            Hypothesis::SameCostBound => self.same_cost_bound,
        }
    }

    /// The hypotheses that fail.
    pub fn failing(&self) -> Vec<Hypothesis> {
        [Hypothesis::GoodEnough, Hypothesis::Nsf, Hypothesis::Normal, Hypothesis::SameCostBound]
            .into_iter()
            .filter(|&h| !self.holds(h))
            .collect()
    }
}

/// Evaluates the theorem's hypotheses for `model` at level `k`.
pub fn hypotheses(model: &ClassModel, k: usize) -> HypothesisReport {
    let same_cost = leq(model.kernel.pn(k, k as isize), model.dist.p(k))
        || model.weights.average(k).map(|r| r >= 1.0).unwrap_or(false);
    HypothesisReport {
        good_enough: k <= model.dist.good_enough_cost(),
        nsf: model.weights.check_nsf_all(k).holds,
        normal: model.check_normal(k).map(|v| v.holds).unwrap_or(false),
        same_cost_bound: same_cost,
    }
}

/// A fixture with its expected outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct Fixture {
    pub id: Counterexample,
    pub model: ClassModel,
    pub k: usize,
    pub violates: Hypothesis,
    /// `p^<(k)`, blind improvement probability.
    pub expected_blind: f64,
    /// `pn^<(k)`, neighbourhood improvement probability.
    pub expected_nbr: f64,
}

const K: usize = 25;

pub fn build_counterexample(id: Counterexample) -> Fixture {
    let n = 100;
    let probs = match id {
        Counterexample::NonMonotoneP => {
            let mut v = vec![1.0 / 200.0; n + 1];
            v[0] = 0.5;
            v
        }
        _ => vec![1.0 / 101.0; n + 1],
    };
    let dist = FitnessDistribution::new(probs).expect("fixture distribution");
    let mut rows = vec![dist.probs().to_vec(); n + 1];
    let mut row = vec![0.0; n + 1];
    let (violates, expected_blind, expected_nbr) = match id {
        Counterexample::NonMonotoneP => {
            row[K - 1] = 0.5;
            row[K + 1] = 0.5;
            (Hypothesis::GoodEnough, 0.5 + 24.0 / 200.0, 0.5)
        }
        Counterexample::NonNsfWeights => {
            // Every neighbour 26 levels worse: r(25,26) = 101 beats r(25,25) = 0.
            row[K + 26] = 1.0;
            (Hypothesis::Nsf, 25.0 / 101.0, 0.0)
        }
        Counterexample::NonNormal => {
            // All δ = 1 mass on the worsening side.
            row[K + 1] = 1.0;
            (Hypothesis::Normal, 25.0 / 101.0, 0.0)
        }
        Counterexample::SameCostOnly => {
            row[K] = 1.0;
            (Hypothesis::SameCostBound, 25.0 / 101.0, 0.0)
        }
    };
    rows[K] = row;
    let kernel = NeighborKernel::new(rows).expect("fixture kernel");
    let model = ClassModel::from_kernel(dist, kernel).expect("fixture model");
    Fixture { id, model, k: K, violates, expected_blind, expected_nbr }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn each_fixture_fails_exactly_its_hypothesis() {
        for id in Counterexample::ALL {
            let f = build_counterexample(id);
            let h = hypotheses(&f.model, f.k);
            assert_eq!(h.failing(), vec![f.violates], "{}", id.name());
        }
    }

    #[test]
    fn fixture_probabilities() {
        for id in Counterexample::ALL {
            let f = build_counterexample(id);
            let blind = f.model.dist.blind_improve_prob(f.k);
            let nbr = f.model.kernel.improve_prob(f.k);
            assert!((blind - f.expected_blind).abs() < 1e-12, "{}", id.name());
            assert!((nbr - f.expected_nbr).abs() < 1e-12, "{}", id.name());
            assert!(nbr < blind);
        }
    }

    #[test]
    fn fixture_weights() {
        let nm = build_counterexample(Counterexample::NonMonotoneP);
        assert!((nm.model.weights.weight(25, 1).unwrap() - 100.0).abs() < 1e-9);
        let nn = build_counterexample(Counterexample::NonNsfWeights);
        assert!((nn.model.weights.weight(25, 26).unwrap() - 101.0).abs() < 1e-9);
        let same = build_counterexample(Counterexample::SameCostOnly);
        assert!((same.model.same_cost_ratio(25).unwrap() - 101.0).abs() < 1e-9);
        assert_eq!(same.model.weights.weight(25, 0), Some(1.0));
        let nonnormal = build_counterexample(Counterexample::NonNormal);
        assert!((nonnormal.model.weights.weight(25, 1).unwrap() - 50.5).abs() < 1e-9);
    }
}
