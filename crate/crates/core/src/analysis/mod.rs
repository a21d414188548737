//! Expected-value machinery: one-step expected improvements, the expected
//! number of local-descent steps (general and uniform-`p` forms), blind
//! search, blind-seeded descent and the switch-point study.

mod falsify;

pub use falsify::{falsify_weights, FalsifyConfig, FalsifyReport, FalsifyViolation};

use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

use crate::model::{ClassModel, FitnessDistribution, ModelError, NeighborKernel, NsfWeightTable};
use crate::numeric::sum;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalysisError {
    #[error("p(0) = 0: blind search never reaches the optimum")]
    NoOptimumMass,
    #[error("level {level} has zero improvement probability; the optimum is unreachable")]
    Unreachable { level: usize },
    #[error("no probability mass below cost {k}")]
    NoMassBelow { k: usize },
    #[error("cost {k} outside 0..={k_max}")]
    OutOfRange { k: usize, k_max: usize },
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Bench(#[from] crate::benchmarks::BenchError),
}

/// Which search the one-step expectation describes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchMode {
    Blind,
    Neighbourhood,
}

/// `e_imp(k) = Σ_{k'<k} p(k')·(k−k')` (blind) or
/// `en_imp(k) = Σ_{k'<k} pn(k,k')·(k−k')` (neighbourhood).
pub fn expected_one_step_improvement(model: &ClassModel, k: usize, mode: SearchMode) -> f64 {
    let k = k.min(model.k_max());
    sum((0..k).map(|j| {
        let prob = match mode {
            SearchMode::Blind => model.dist.p(j),
            SearchMode::Neighbourhood => model.kernel.pn(k, j as isize),
        };
        prob * (k - j) as f64
    }))
}

/// `blind = 1/p(0)`.
pub fn blind_steps(dist: &FitnessDistribution) -> Result<f64, AnalysisError> {
    let p0 = dist.p(0);
    if p0 > 0.0 {
        Ok(1.0 / p0)
    } else {
        Err(AnalysisError::NoOptimumMass)
    }
}

/// Expected steps of local descent from every level `0..=k0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepsProfile {
    pub values: Vec<f64>,
    /// Expected steps of blind search; infinite when `p(0) = 0`.
    pub blind: f64,
    pub k0: usize,
}

impl StepsProfile {
    pub fn at(&self, k: usize) -> f64 {
        self.values[k]
    }

    /// `k,steps,blind` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,steps,blind\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{k},{v},{}", self.blind);
        }
        out
    }

    /// Two whitespace-separated columns, `k steps(k)`, no header.
    pub fn to_dat(&self) -> String {
        to_dat(self.values.iter().enumerate().map(|(k, &v)| (k as f64, v)))
    }
}

/// Formats `(x, y)` pairs as a two-column plot file.
pub fn to_dat<I: IntoIterator<Item = (f64, f64)>>(points: I) -> String {
    let mut out = String::new();
    for (x, y) in points {
        let _ = writeln!(out, "{x} {y}");
    }
    out
}

/// `steps(0) = 0`, `steps(j) = (1 + Σ_{i<j} pn(j,i)·steps(i)) / pn^<(j)`.
pub fn steps_kernel(kernel: &NeighborKernel, k0: usize) -> Result<Vec<f64>, AnalysisError> {
    if k0 > kernel.k_max() {
        return Err(AnalysisError::OutOfRange { k: k0, k_max: kernel.k_max() });
    }
    let mut values = Vec::with_capacity(k0 + 1);
    values.push(0.0);
    for j in 1..=k0 {
        let row = kernel.row(j);
        let imp = sum(row[..j].iter().copied());
        if imp <= 0.0 {
            return Err(AnalysisError::Unreachable { level: j });
        }
        let acc = sum((1..j).map(|i| row[i] * values[i]));
        values.push((1.0 + acc) / imp);
    }
    Ok(values)
}

/// Local-descent expectations for the class model up to level `k0`.
pub fn steps(model: &ClassModel, k0: usize) -> Result<StepsProfile, AnalysisError> {
    let values = steps_kernel(&model.kernel, k0)?;
    let blind = blind_steps(&model.dist).unwrap_or(f64::INFINITY);
    Ok(StepsProfile { values, blind, k0 })
}

/// The steps recursion when every level has probability `p`, so
/// `pn(j,i) = r(j, j−i)·p`. The profile's `blind` is `1/p`.
pub fn steps_uniform(weights: &NsfWeightTable, p: f64, k0: usize) -> Result<StepsProfile, AnalysisError> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(AnalysisError::Invalid(format!("p must be positive, got {p}")));
    }
    if k0 > weights.k_max() {
        return Err(AnalysisError::OutOfRange { k: k0, k_max: weights.k_max() });
    }
    let r = |j: usize, d: usize| weights.weight(j, d).unwrap_or(0.0);
    let mut values = vec![0.0];
    for j in 1..=k0 {
        let imp = p * sum((1..=j).map(|d| r(j, d)));
        if imp <= 0.0 {
            return Err(AnalysisError::Unreachable { level: j });
        }
        let acc = sum((1..j).map(|i| p * r(j, j - i) * values[i]));
        values.push((1.0 + acc) / imp);
    }
    Ok(StepsProfile { values, blind: 1.0 / p, k0 })
}

/// When blind seeding hands over to descent.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SeedThreshold {
    /// Stop sampling at a cost strictly below the threshold.
    #[default]
    Below,
    /// Stop sampling at a cost no worse than the threshold.
    AtMost,
}

impl SeedThreshold {
    /// Highest cost that ends the blind phase for threshold `k`.
    pub fn last_accepted(&self, k: usize) -> Option<usize> {
        match self {
            SeedThreshold::Below => k.checked_sub(1),
            SeedThreshold::AtMost => Some(k),
        }
    }

    pub fn accepts(&self, cost: u64, threshold: u64) -> bool {
        match self {
            SeedThreshold::Below => cost < threshold,
            SeedThreshold::AtMost => cost <= threshold,
        }
    }
}

impl std::str::FromStr for SeedThreshold {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "below" => Ok(Self::Below),
            "at-most" | "atmost" => Ok(Self::AtMost),
            other => Err(format!("unknown seed threshold '{other}' (below|at-most)")),
        }
    }
}

fn blsteps_from(dist: &FitnessDistribution, values: &[f64], top: usize, k: usize) -> Result<f64, AnalysisError> {
    let mass = dist.blind_improve_prob(top + 1);
    if mass <= 0.0 {
        return Err(AnalysisError::NoMassBelow { k });
    }
    let acc = sum((1..=top).map(|i| dist.p(i) * values[i]));
    Ok((1.0 + acc) / mass)
}

/// Expected trials of blind search seeding local descent, in closed form:
/// with `T` the highest cost that ends the blind phase,
/// `blsteps(k) = (1 + Σ_{i=1..T} p(i)·steps(i)) / Σ_{i=0..T} p(i)`.
pub fn blind_seeded_steps(model: &ClassModel, k: usize, rule: SeedThreshold) -> Result<f64, AnalysisError> {
    let top = rule.last_accepted(k).ok_or(AnalysisError::NoMassBelow { k })?;
    if top > model.k_max() {
        return Err(AnalysisError::OutOfRange { k, k_max: model.k_max() });
    }
    let values = steps_kernel(&model.kernel, top)?;
    blsteps_from(&model.dist, &values, top, k)
}

/// Result of the switch-point study.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SwitchPoint {
    /// Threshold minimising the seeded expectation (ties go to the larger threshold).
    pub argmin: usize,
    pub min_steps: f64,
    /// Smallest `k` at which blind one-step improvement exceeds the neighbourhood's.
    pub candidate: Option<usize>,
    /// `(k, blsteps(k))` for `k = 1..=k_hi`.
    pub profile: Vec<(usize, f64)>,
}

pub fn switch_point(model: &ClassModel, k_hi: usize, rule: SeedThreshold) -> Result<SwitchPoint, AnalysisError> {
    if k_hi == 0 || k_hi > model.k_max() {
        return Err(AnalysisError::OutOfRange { k: k_hi, k_max: model.k_max() });
    }
    let top = rule.last_accepted(k_hi).unwrap_or(0);
    let values = steps_kernel(&model.kernel, top)?;
    let mut profile = Vec::with_capacity(k_hi);
    for k in 1..=k_hi {
        let t = rule.last_accepted(k).unwrap_or(0);
        profile.push((k, blsteps_from(&model.dist, &values, t, k)?));
    }
    let (mut argmin, mut min_steps) = profile[0];
    for &(k, v) in &profile[1..] {
        if v <= min_steps * (1.0 + 1e-12) {
            argmin = k;
            min_steps = min_steps.min(v);
        }
    }
    let candidate = (1..=k_hi).find(|&k| {
        expected_one_step_improvement(model, k, SearchMode::Blind)
            - expected_one_step_improvement(model, k, SearchMode::Neighbourhood)
            > 0.0
    });
    Ok(SwitchPoint { argmin, min_steps, candidate, profile })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::benchmarks::{build_counts_class, CountsClassSpec};
    use crate::model::{kernel_from_weights, SameCostRule};

    fn uniform(n: usize) -> FitnessDistribution {
        FitnessDistribution::new(vec![1.0 / (n + 1) as f64; n + 1]).unwrap()
    }

    #[test]
    fn one_step_improvement_at_zero() {
        let m = kernel_from_weights(&uniform(20), 3, SameCostRule::MatchP).unwrap();
        assert_eq!(expected_one_step_improvement(&m, 0, SearchMode::Blind), 0.0);
        assert_eq!(expected_one_step_improvement(&m, 0, SearchMode::Neighbourhood), 0.0);
        // Blind oracle: Σ_{j<5} (5−j)/21 = 15/21.
        let e = expected_one_step_improvement(&m, 5, SearchMode::Blind);
        assert!((e - 15.0 / 21.0).abs() < 1e-15);
    }

    #[test]
    fn blind_steps_cases() {
        assert_eq!(blind_steps(&FitnessDistribution::new(vec![1.0]).unwrap()).unwrap(), 1.0);
        let d = FitnessDistribution::new(vec![0.0, 1.0]).unwrap();
        assert_eq!(blind_steps(&d), Err(AnalysisError::NoOptimumMass));
    }

    #[test]
    fn unit_weights_give_blind() {
        let c = build_counts_class(&CountsClassSpec::table5(&[1.0; 4])).unwrap();
        let s = steps(&c.model, 4).unwrap();
        for k in 1..=4 {
            assert!((s.at(k) / 500_000.0 - 1.0).abs() < 1e-12, "k={k}");
        }
        assert_eq!(s.at(0), 0.0);
    }

    #[test]
    fn steps_uniform_base_cases() {
        let w = NsfWeightTable::from_profile(10, &[4.0, 3.5, 3.0, 0.5]).unwrap();
        let s = steps_uniform(&w, 1e-3, 4).unwrap();
        assert!((s.at(1) - 1.0 / (4.0 * 1e-3)).abs() < 1e-9);
        // Hand-unrolled oracle for k = 2..4.
        let p = 1e-3;
        let s1 = 1.0 / (4.0 * p);
        let s2 = (1.0 + 4.0 * p * s1) / (p * 7.5);
        let s3 = (1.0 + 3.5 * p * s1 + 4.0 * p * s2) / (p * 10.5);
        let s4 = (1.0 + 3.0 * p * s1 + 3.5 * p * s2 + 4.0 * p * s3) / (p * 11.0);
        assert!((s.at(2) - s2).abs() < 1e-9);
        assert!((s.at(3) - s3).abs() < 1e-9);
        assert!((s.at(4) - s4).abs() < 1e-9);
        let ones = NsfWeightTable::constant(10, 1.0).unwrap();
        let s = steps_uniform(&ones, 0.01, 7).unwrap();
        for k in 1..=7 {
            assert!((s.at(k) - 100.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unreachable_level_aborts() {
        let d = FitnessDistribution::new(vec![0.5, 0.5]).unwrap();
        let k = NeighborKernel::new(vec![vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let m = crate::model::ClassModel::from_kernel(d, k).unwrap();
        assert_eq!(steps(&m, 1), Err(AnalysisError::Unreachable { level: 1 }));
        let w = NsfWeightTable::constant(3, 0.0).unwrap();
        assert!(steps_uniform(&w, 0.1, 2).is_err());
    }

    #[test]
    fn seeded_steps_degenerate_cases() {
        let d = FitnessDistribution::new(vec![1.0, 0.0, 0.0]).unwrap();
        let m = kernel_from_weights(&d, 2, SameCostRule::MatchP).unwrap();
        assert_eq!(blind_seeded_steps(&m, 1, SeedThreshold::Below).unwrap(), 1.0);
        assert!(blind_seeded_steps(&m, 0, SeedThreshold::Below).is_err());
    }

    #[test]
    fn switch_point_without_interior_minimum() {
        // pn = p everywhere: seeding never helps, the curve is flat.
        let d = uniform(40);
        let m = kernel_from_weights(&d, 40, SameCostRule::Weighted).unwrap();
        let sp = switch_point(&m, 20, SeedThreshold::Below).unwrap();
        assert_eq!(sp.argmin, 20);
        assert!((sp.min_steps - 41.0).abs() < 1e-9);
    }

    #[test]
    fn profile_formats() {
        let p = StepsProfile { values: vec![0.0, 2.5], blind: 4.0, k0: 1 };
        assert_eq!(p.to_csv(), "k,steps,blind\n0,0,4\n1,2.5,4\n");
        assert_eq!(p.to_dat(), "0 0\n1 2.5\n");
    }
}
