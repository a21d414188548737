//! Problem classes given by point counts per cost level plus an NSF
//! weight per cost distance.
//!
//! Levels `0..size` carry `counts[i] / total`; whatever the counts leave
//! over sits on one implicit worst level `size`. Kernel rows up to the
//! evaluation level `K = size div 2` use `pn(k,k) = p(k)` and
//! `pn(k,k±δ) = r_δ·p(k±δ)` for `δ ≤ K`. Their leftover mass is spread
//! over the levels further than `K` above `k`, in proportion to `p`; for
//! row `K` that is exactly the implicit worst level, so its uniform
//! leftover weight is the quantity that must not exceed `r_K`. Rows above
//! `K` are never read by the steps recursion and default to the blind row.

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::model::{ClassModel, FitnessDistribution, NeighborKernel};
use crate::numeric::{sum, SLACK};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsClassSpec {
    /// Number of listed cost levels, starting at the optimum. Odd.
    pub size: usize,
    pub counts: Vec<u64>,
    /// Number of points in the whole search space.
    pub total: u64,
    /// `r(_, δ)` for `δ = 1..=size div 2`.
    pub weights: Vec<f64>,
}

pub const TABLE5_COUNTS: [u64; 9] = [1, 5, 25, 125, 625, 3125, 15625, 78125, 390625];
pub const TABLE6_COUNTS: [u64; 9] = [1, 2, 3, 4, 5, 6, 7, 8, 1];

impl CountsClassSpec {
    pub fn new(counts: Vec<u64>, total: u64, weights: Vec<f64>) -> Self {
        Self { size: counts.len(), counts, total, weights }
    }

    /// The geometric class of the first software experiment (`5^i` points at level `i`).
    pub fn table5(weights: &[f64]) -> Self {
        Self::new(TABLE5_COUNTS.to_vec(), 500_000, weights.to_vec())
    }

    /// The small class whose blind expectation is 100 steps.
    pub fn table6(weights: &[f64]) -> Self {
        Self::new(TABLE6_COUNTS.to_vec(), 100, weights.to_vec())
    }

    /// `K = size div 2`, the level at which steps are evaluated.
    pub fn eval_level(&self) -> usize {
        self.size / 2
    }

    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::Spec(m));
        if self.size < 3 || self.size.is_multiple_of(2) {
            return bad(format!("size must be odd and at least 3, got {}", self.size));
        }
        if self.counts.len() != self.size {
            return bad(format!("{} counts for size {}", self.counts.len(), self.size));
        }
        if let Some(i) = self.counts.iter().position(|&c| c == 0) {
            return bad(format!("count at level {i} is zero"));
        }
        let listed: u64 = self.counts.iter().sum();
        if listed > self.total {
            return bad(format!("counts sum to {listed}, more than total {}", self.total));
        }
        if self.weights.len() != self.eval_level() {
            return bad(format!(
                "{} weights given, expected size div 2 = {}",
                self.weights.len(),
                self.eval_level()
            ));
        }
        if let Some(w) = self.weights.iter().find(|w| !(w.is_finite() && **w >= 0.0)) {
            return bad(format!("invalid weight {w}"));
        }
        if self.weights.windows(2).any(|w| w[1] > w[0]) {
            return bad(format!("weights must be non-increasing: {:?}", self.weights));
        }
        Ok(())
    }

    /// `p` over levels `0..=size`, the last being the implicit worst level.
    pub fn probabilities(&self) -> Vec<f64> {
        let t = self.total as f64;
        let listed: u64 = self.counts.iter().sum();
        let mut p: Vec<f64> = self.counts.iter().map(|&c| c as f64 / t).collect();
        p.push((self.total - listed) as f64 / t);
        p
    }
}

/// A built counts class.
#[derive(Debug, Clone, PartialEq)]
pub struct CountsClass {
    pub spec: CountsClassSpec,
    pub model: ClassModel,
    pub eval_level: usize,
    /// Uniform weight carried by the leftover mass of each row `0..=K`.
    pub leftover_weights: Vec<f64>,
}

/// Leftover mass `1 − p(k) − Σ_{δ≤K} r_δ·(p(k+δ)+p(k−δ))` for rows `0..=K`.
pub fn row_leftovers(p: &[f64], weights: &[f64]) -> Vec<f64> {
    let kk = weights.len();
    let at = |i: isize| if i < 0 { 0.0 } else { p.get(i as usize).copied().unwrap_or(0.0) };
    (0..=kk)
        .map(|k| {
            let used = sum((1..=kk).map(|d| {
                weights[d - 1] * (at(k as isize + d as isize) + at(k as isize - d as isize))
            }));
            1.0 - p[k] - used
        })
        .collect()
}

/// Checks that the weights leave a non-negative, placeable leftover in
/// every row up to `K` and that row `K`'s leftover weight stays within the
/// last listed weight. Returns the leftover weight per row.
pub(crate) fn feasibility(p: &[f64], weights: &[f64]) -> Result<Vec<f64>, BenchError> {
    let kk = weights.len();
    let size = p.len() - 1;
    let leftovers = row_leftovers(p, weights);
    let mut pp = Vec::with_capacity(kk + 1);
    for (k, &left) in leftovers.iter().enumerate() {
        if left < -SLACK {
            return Err(BenchError::TotalTooLow { level: k, excess: -left });
        }
        let tail = sum(p[(k + kk + 1).min(size + 1)..].iter().copied());
        let w = if tail > 0.0 {
            left.max(0.0) / tail
        } else if left <= SLACK {
            0.0
        } else {
            return Err(BenchError::NoTailMass { level: k, leftover: left });
        };
        pp.push(w);
    }
    let last = weights[kk - 1];
    if pp[kk] > last + SLACK * (1.0 + last) {
        return Err(BenchError::LastWeightTooLow { required: pp[kk], last });
    }
    Ok(pp)
}

pub fn build_counts_class(spec: &CountsClassSpec) -> Result<CountsClass, BenchError> {
    spec.validate()?;
    let p = spec.probabilities();
    let kk = spec.eval_level();
    let size = spec.size;
    let pp = feasibility(&p, &spec.weights)?;
    let mut rows = Vec::with_capacity(size + 1);
    for k in 0..=size {
        if k > kk {
            rows.push(p.clone());
            continue;
        }
        let mut row = vec![0.0; size + 1];
        row[k] = p[k];
        for d in 1..=kk {
            row[k + d] = spec.weights[d - 1] * p[k + d];
            if d <= k {
                row[k - d] = spec.weights[d - 1] * p[k - d];
            }
        }
        for t in k + kk + 1..=size {
            row[t] = pp[k] * p[t];
        }
        rows.push(row);
    }
    let dist = FitnessDistribution::new(p)?;
    let kernel = NeighborKernel::new(rows)?;
    let model = ClassModel::from_kernel(dist, kernel)?;
    Ok(CountsClass { spec: spec.clone(), model, eval_level: kk, leftover_weights: pp })
}
