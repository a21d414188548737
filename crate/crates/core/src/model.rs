//! The abstract objects of the theory: fitness distributions `p(k)`,
//! neighbourhood kernels `pn(k1, k2)` and NSF weights `r(k, δ)`, together
//! with the derived improvement probabilities and the predicates
//! (normal, boosting, NSF, full NSF) that the theorems are stated over.
//!
//! Costs are minimised and the optimum is normalised to level 0. Every
//! probability lookup outside `0..=k_max` yields 0.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::numeric::{geq, sum, NORM_TOL};

/// Errors raised while constructing or querying model objects.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("distribution has no cost levels")]
    Empty,
    #[error("invalid probability {value} at cost {k}")]
    BadProbability { k: usize, value: f64 },
    #[error("probabilities sum to {sum}, expected 1 within {NORM_TOL}")]
    NotNormalized { sum: f64 },
    #[error("kernel shape mismatch: {detail}")]
    Shape { detail: String },
    #[error("kernel row {k} sums to {sum}, expected 1 within {NORM_TOL}")]
    RowNotNormalized { k: usize, sum: f64 },
    #[error("invalid NSF weight r({k},{delta}) = {value}")]
    BadWeight { k: usize, delta: usize, value: f64 },
    #[error("inconsistent model at k={k}, delta={delta}: pn mass {lhs} but r*p = {rhs}")]
    Inconsistent { k: usize, delta: usize, lhs: f64, rhs: f64 },
    #[error("average NSF weight is undefined at k = 0")]
    ZeroLevel,
    #[error("no defined NSF weight at k={0}")]
    NoDefinedWeights(usize),
    #[error("neighbour bound must be at least 1")]
    ZeroBound,
    #[error("no probability mass within bound {bound} around cost {k}")]
    DegenerateBound { k: usize, bound: usize },
    #[error("cost {k} outside 0..={k_max}")]
    OutOfRange { k: usize, k_max: usize },
    #[error("malformed model document: {0}")]
    Format(String),
}

/// `p(k)`: the probability that a uniformly random point of the class has cost `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessDistribution {
    probs: Vec<f64>,
}

impl FitnessDistribution {
    /// Validates and wraps a probability vector indexed by cost `0..=k_max`.
    pub fn new(probs: Vec<f64>) -> Result<Self, ModelError> {
        if probs.is_empty() {
            return Err(ModelError::Empty);
        }
        for (k, &v) in probs.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::BadProbability { k, value: v });
            }
        }
        let s = sum(probs.iter().copied());
        if (s - 1.0).abs() > NORM_TOL {
            return Err(ModelError::NotNormalized { sum: s });
        }
        Ok(Self { probs })
    }

    /// Normalises non-negative masses (counts, unnormalised weights) into a distribution.
    pub fn from_masses(masses: &[f64]) -> Result<Self, ModelError> {
        if masses.is_empty() {
            return Err(ModelError::Empty);
        }
        for (k, &v) in masses.iter().enumerate() {
            if !(v.is_finite() && v >= 0.0) {
                return Err(ModelError::BadProbability { k, value: v });
            }
        }
        let total = sum(masses.iter().copied());
        if total <= 0.0 {
            return Err(ModelError::NotNormalized { sum: total });
        }
        Self::new(masses.iter().map(|m| m / total).collect())
    }

    pub fn k_max(&self) -> usize {
        self.probs.len() - 1
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    /// `p(k)`, zero beyond `k_max`.
    pub fn p(&self, k: usize) -> f64 {
        self.probs.get(k).copied().unwrap_or(0.0)
    }

    /// `p(k)` for a possibly negative cost; zero outside the range.
    pub fn p_at(&self, k: isize) -> f64 {
        if k < 0 {
            0.0
        } else {
            self.p(k as usize)
        }
    }

    /// `p(k+δ) + p(k−δ)`, the ± shorthand.
    pub fn p_pm(&self, k: usize, delta: usize) -> f64 {
        self.p(k + delta) + self.p_at(k as isize - delta as isize)
    }

    /// `k_mod`: the largest `k` with `p` non-decreasing on `0..=k`, i.e. the
    /// worst cost below which probabilities only shrink toward the optimum.
    pub fn modal_cost(&self) -> usize {
        let mut k = 0;
        while k < self.k_max() && self.probs[k] <= self.probs[k + 1] {
            k += 1;
        }
        k
    }

    /// `k_ge = floor(k_mod / 2)`.
    pub fn good_enough_cost(&self) -> usize {
        self.modal_cost() / 2
    }

    /// `p^<(k) = Σ_{δ=1..k} p(k−δ)`.
    pub fn blind_improve_prob(&self, k: usize) -> f64 {
        sum(self.probs[..k.min(self.probs.len())].iter().copied())
    }

    /// `p^>(k) = Σ_{δ=1..k_max−k} p(k+δ)`.
    pub fn blind_worsen_prob(&self, k: usize) -> f64 {
        if k >= self.k_max() {
            0.0
        } else {
            sum(self.probs[k + 1..].iter().copied())
        }
    }
}

/// Good-enough level when the optimum is not normalised to zero: halfway
/// between the optimum and the modal cost, rounded down.
pub fn midpoint_good_enough(optimum: u64, modal: u64) -> u64 {
    (optimum + modal) / 2
}

/// `pn(k1, ·)` rows: the cost distribution of a uniformly random neighbour
/// of a point with cost `k1`.
#[derive(Debug, Clone, PartialEq)]
pub struct NeighborKernel {
    rows: Vec<Vec<f64>>,
}

impl NeighborKernel {
    pub fn new(rows: Vec<Vec<f64>>) -> Result<Self, ModelError> {
        let n = rows.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        for (k, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(ModelError::Shape {
                    detail: format!("row {k} has {} entries, expected {n}", row.len()),
                });
            }
            for &v in row {
                if !(v.is_finite() && v >= 0.0) {
                    return Err(ModelError::BadProbability { k, value: v });
                }
            }
            let s = sum(row.iter().copied());
            if (s - 1.0).abs() > NORM_TOL {
                return Err(ModelError::RowNotNormalized { k, sum: s });
            }
        }
        Ok(Self { rows })
    }

    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    pub fn row(&self, k: usize) -> &[f64] {
        &self.rows[k]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    /// `pn(k1, k2)`, zero outside the range.
    pub fn pn(&self, k1: usize, k2: isize) -> f64 {
        if k2 < 0 || k1 > self.k_max() {
            return 0.0;
        }
        self.rows[k1].get(k2 as usize).copied().unwrap_or(0.0)
    }

    /// `pn^<(k) = Σ_{δ=1..k} pn(k, k−δ)`.
    pub fn improve_prob(&self, k: usize) -> f64 {
        sum(self.rows[k][..k].iter().copied())
    }

    /// `pn^>(k)`: mass on strictly worse levels.
    pub fn worsen_prob(&self, k: usize) -> f64 {
        sum(self.rows[k][k + 1..].iter().copied())
    }
}

/// `r(k, δ)` for `k, δ ∈ 0..=k_max`. `None` marks a weight that is
/// undefined because `p(k+δ) + p(k−δ) = 0`; such entries are skipped by
/// averages and NSF checks. `r(k, 0)` is fixed at 1 by convention.
#[derive(Debug, Clone, PartialEq)]
pub struct NsfWeightTable {
    rows: Vec<Vec<Option<f64>>>,
}

/// Outcome of one per-δ comparison inside a predicate check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeltaCheck {
    pub delta: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Per-δ results plus their conjunction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Verdict {
    pub checks: Vec<DeltaCheck>,
    pub holds: bool,
}

impl Verdict {
    fn from_checks(checks: Vec<DeltaCheck>) -> Self {
        let holds = checks.iter().all(|c| c.holds);
        Self { checks, holds }
    }

    /// The δ values whose comparison failed.
    pub fn failures(&self) -> Vec<usize> {
        self.checks.iter().filter(|c| !c.holds).map(|c| c.delta).collect()
    }
}

impl NsfWeightTable {
    /// Builds a table from `rows[k][δ]`; every row must have `k_max + 1`
    /// entries. The δ = 0 entry is overwritten with 1.
    pub fn new(mut rows: Vec<Vec<Option<f64>>>) -> Result<Self, ModelError> {
        let n = rows.len();
        if n == 0 {
            return Err(ModelError::Empty);
        }
        for (k, row) in rows.iter_mut().enumerate() {
            if row.len() != n {
                return Err(ModelError::Shape {
                    detail: format!("weight row {k} has {} entries, expected {n}", row.len()),
                });
            }
            row[0] = Some(1.0);
            for (delta, w) in row.iter().enumerate() {
                if let Some(v) = *w {
                    if !(v.is_finite() && v >= 0.0) {
                        return Err(ModelError::BadWeight { k, delta, value: v });
                    }
                }
            }
        }
        Ok(Self { rows })
    }

    pub fn from_fn(
        k_max: usize,
        mut f: impl FnMut(usize, usize) -> Option<f64>,
    ) -> Result<Self, ModelError> {
        let rows = (0..=k_max)
            .map(|k| (0..=k_max).map(|d| if d == 0 { Some(1.0) } else { f(k, d) }).collect())
            .collect();
        Self::new(rows)
    }

    /// `r(k, δ) = c` everywhere.
    pub fn constant(k_max: usize, c: f64) -> Result<Self, ModelError> {
        Self::from_fn(k_max, |_, _| Some(c))
    }

    /// Level-independent weights: `r(k, δ) = profile[δ−1]`, zero past the profile.
    pub fn from_profile(k_max: usize, profile: &[f64]) -> Result<Self, ModelError> {
        Self::from_fn(k_max, |_, d| Some(profile.get(d - 1).copied().unwrap_or(0.0)))
    }

    pub fn k_max(&self) -> usize {
        self.rows.len() - 1
    }

    /// `r(k, δ)`; `None` when undefined or out of range.
    pub fn weight(&self, k: usize, delta: usize) -> Option<f64> {
        self.rows.get(k).and_then(|r| r.get(delta).copied().flatten())
    }

    pub fn row(&self, k: usize) -> &[Option<f64>] {
        &self.rows[k]
    }

    /// `r̄(k)`: mean of the defined weights `r(k,1)..r(k,k)`.
    pub fn average(&self, k: usize) -> Result<f64, ModelError> {
        if k == 0 {
            return Err(ModelError::ZeroLevel);
        }
        let defined: Vec<f64> = (1..=k).filter_map(|d| self.weight(k, d)).collect();
        if defined.is_empty() {
            return Err(ModelError::NoDefinedWeights(k));
        }
        Ok(sum(defined.iter().copied()) / defined.len() as f64)
    }

    /// NSF(k): `r(k,δ) ≥ r(k,δ+1)` for every δ in `1..k−1` where both are defined.
    pub fn check_nsf(&self, k: usize) -> Verdict {
        let mut checks = Vec::new();
        for delta in 1..k {
            if let (Some(a), Some(b)) = (self.weight(k, delta), self.weight(k, delta + 1)) {
                checks.push(DeltaCheck { delta, lhs: a, rhs: b, holds: geq(a, b) });
            }
        }
        Verdict::from_checks(checks)
    }

    /// NSF over every δ the table defines at level `k` (not just `δ < k`).
    /// The strengthened form the level-`k` lemmas rely on.
    pub fn check_nsf_all(&self, k: usize) -> Verdict {
        let mut checks = Vec::new();
        for delta in 1..self.k_max() {
            if let (Some(a), Some(b)) = (self.weight(k, delta), self.weight(k, delta + 1)) {
                checks.push(DeltaCheck { delta, lhs: a, rhs: b, holds: geq(a, b) });
            }
        }
        Verdict::from_checks(checks)
    }

    /// Full NSF from `k0`: NSF(k) for all `k ≤ k0`, and weights never grow
    /// as the level worsens: `r(k1,δ) ≤ r(k2,δ)` for `δ ≤ k2 < k1 ≤ k0`.
    pub fn check_full_nsf(&self, k0: usize) -> bool {
        let k0 = k0.min(self.k_max());
        if !(2..=k0).all(|k| self.check_nsf(k).holds) {
            return false;
        }
        for k1 in 2..=k0 {
            for k2 in 1..k1 {
                for delta in 1..=k2 {
                    if let (Some(hi), Some(lo)) = (self.weight(k1, delta), self.weight(k2, delta)) {
                        if !geq(lo, hi) {
                            return false;
                        }
                    }
                }
            }
        }
        true
    }
}

/// How `kernel_from_weights` treats neighbours of equal cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SameCostRule {
    /// `pn(k,k) = p(k)`; the remaining mass is spread over the bound.
    #[default]
    MatchP,
    /// `pn(k,k) = 0`; all mass goes to other levels within the bound.
    Zero,
    /// The same-cost level is weighted like any other level in the
    /// window: `pn(k,j) = p(j) / Σ_{|j'−k|≤b} p(j')` for every `|j−k| ≤ b`.
    /// This is the convention that reproduces the published benchmark tables.
    Weighted,
}

impl std::str::FromStr for SameCostRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "match-p" => Ok(Self::MatchP),
            "zero" => Ok(Self::Zero),
            "weighted" => Ok(Self::Weighted),
            other => Err(format!("unknown same-cost rule '{other}' (match-p|zero|weighted)")),
        }
    }
}

/// Selects the improving (`pbr^<`) or worsening (`pbr^>`) side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Improving,
    Worsening,
}

/// A problem class: distribution, kernel and NSF weights, mutually consistent.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassModel {
    pub dist: FitnessDistribution,
    pub kernel: NeighborKernel,
    pub weights: NsfWeightTable,
}

/// Combined-sides ratio `(pn(k,k+δ)+pn(k,k−δ)) / (p(k+δ)+p(k−δ))`.
pub fn combined_ratio(dist: &FitnessDistribution, kernel: &NeighborKernel, k: usize, delta: usize) -> Option<f64> {
    let den = dist.p_pm(k, delta);
    if den > 0.0 {
        let num = kernel.pn(k, (k + delta) as isize) + kernel.pn(k, k as isize - delta as isize);
        Some(num / den)
    } else {
        None
    }
}

impl ClassModel {
    /// Wraps the three parts after checking
    /// `pn(k,k+δ)+pn(k,k−δ) = r(k,δ)·(p(k+δ)+p(k−δ))` wherever the right side is defined.
    pub fn new(
        dist: FitnessDistribution,
        kernel: NeighborKernel,
        weights: NsfWeightTable,
    ) -> Result<Self, ModelError> {
        let n = dist.k_max();
        if kernel.k_max() != n || weights.k_max() != n {
            return Err(ModelError::Shape {
                detail: format!(
                    "k_max differs: dist {n}, kernel {}, weights {}",
                    kernel.k_max(),
                    weights.k_max()
                ),
            });
        }
        for k in 0..=n {
            for delta in 1..=n {
                let den = dist.p_pm(k, delta);
                if den <= 0.0 {
                    continue;
                }
                let lhs = kernel.pn(k, (k + delta) as isize) + kernel.pn(k, k as isize - delta as isize);
                let r = weights.weight(k, delta).ok_or(ModelError::BadWeight {
                    k,
                    delta,
                    value: f64::NAN,
                })?;
                let rhs = r * den;
                if (lhs - rhs).abs() > NORM_TOL {
                    return Err(ModelError::Inconsistent { k, delta, lhs, rhs });
                }
            }
        }
        Ok(Self { dist, kernel, weights })
    }

    /// Derives the weight table from the kernel with the combined-sides ratio.
    pub fn from_kernel(dist: FitnessDistribution, kernel: NeighborKernel) -> Result<Self, ModelError> {
        let n = dist.k_max();
        if kernel.k_max() != n {
            return Err(ModelError::Shape {
                detail: format!("k_max differs: dist {n}, kernel {}", kernel.k_max()),
            });
        }
        let weights = NsfWeightTable::from_fn(n, |k, d| combined_ratio(&dist, &kernel, k, d))?;
        Ok(Self { dist, kernel, weights })
    }

    pub fn k_max(&self) -> usize {
        self.dist.k_max()
    }

    fn check_k(&self, k: usize) -> Result<(), ModelError> {
        if k > self.k_max() {
            Err(ModelError::OutOfRange { k, k_max: self.k_max() })
        } else {
            Ok(())
        }
    }

    /// `pbr^<(k) = Σ_{δ=1..k} p(k−δ)·r(k,δ)` or the mirrored `pbr^>(k)`.
    pub fn weighted_prob(&self, k: usize, side: Side) -> f64 {
        match side {
            Side::Improving => sum((1..=k).map(|d| {
                self.dist.p(k - d) * self.weights.weight(k, d).unwrap_or(0.0)
            })),
            Side::Worsening => sum((1..=self.k_max().saturating_sub(k)).map(|d| {
                self.dist.p(k + d) * self.weights.weight(k, d).unwrap_or(0.0)
            })),
        }
    }

    /// `pbr^<(k)`.
    pub fn weighted_improve_prob(&self, k: usize) -> f64 {
        self.weighted_prob(k, Side::Improving)
    }

    /// `pn(k,k) / p(k)`: the effective weight on the same-cost level, which
    /// the table itself pins to 1.
    pub fn same_cost_ratio(&self, k: usize) -> Option<f64> {
        let p = self.dist.p(k);
        (p > 0.0).then(|| self.kernel.pn(k, k as isize) / p)
    }

    /// Normality at `k`: `pn(k,k−δ) ≥ r(k,δ)·p(k−δ)` for each δ in `1..=k`
    /// with a defined weight.
    pub fn check_normal(&self, k: usize) -> Result<Verdict, ModelError> {
        self.check_k(k)?;
        let mut checks = Vec::new();
        for delta in 1..=k {
            if let Some(r) = self.weights.weight(k, delta) {
                let lhs = self.kernel.pn(k, (k - delta) as isize);
                let rhs = r * self.dist.p(k - delta);
                checks.push(DeltaCheck { delta, lhs, rhs, holds: geq(lhs, rhs) });
            }
        }
        Ok(Verdict::from_checks(checks))
    }

    /// Boosting at `k`: the strict form of normality over δ with `p(k−δ) > 0`.
    pub fn check_boosting(&self, k: usize) -> Result<bool, ModelError> {
        self.check_k(k)?;
        Ok((1..=k).filter(|&d| self.dist.p(k - d) > 0.0).all(|d| {
            let r = self.weights.weight(k, d).unwrap_or(0.0);
            self.kernel.pn(k, (k - d) as isize) > r * self.dist.p(k - d)
        }))
    }

    /// Serialises to the JSON model document. Numbers carry 17 significant
    /// digits so a round trip is exact.
    pub fn to_json(&self) -> String {
        fn num(out: &mut String, v: f64) {
            if v == 0.0 {
                out.push('0');
            } else {
                let _ = write!(out, "{:.16e}", v);
            }
        }
        let n = self.k_max();
        let mut out = String::new();
        let _ = write!(out, "{{\n  \"k_max\": {n},\n  \"probs\": [");
        for (i, &p) in self.dist.probs().iter().enumerate() {
            if i > 0 {
                out.push_str(", ");
            }
            num(&mut out, p);
        }
        out.push_str("],\n  \"weights\": {");
        for k in 0..=n {
            let _ = write!(out, "{}\n    \"{k}\": [", if k > 0 { "," } else { "" });
            for (d, w) in self.weights.row(k).iter().enumerate() {
                if d > 0 {
                    out.push_str(", ");
                }
                match w {
                    Some(v) => num(&mut out, *v),
                    None => out.push_str("null"),
                }
            }
            out.push(']');
        }
        out.push_str("\n  },\n  \"rows\": [");
        for k in 0..=n {
            out.push_str(if k > 0 { ",\n    [" } else { "\n    [" });
            for (j, &v) in self.kernel.row(k).iter().enumerate() {
                if j > 0 {
                    out.push_str(", ");
                }
                num(&mut out, v);
            }
            out.push(']');
        }
        out.push_str("\n  ]\n}\n");
        out
    }

    /// Parses a document written by [`ClassModel::to_json`] and revalidates it.
    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        #[derive(Deserialize)]
        struct Doc {
            k_max: usize,
            probs: Vec<f64>,
            weights: BTreeMap<String, Vec<Option<f64>>>,
            rows: Vec<Vec<f64>>,
        }
        let doc: Doc = serde_json::from_str(text).map_err(|e| ModelError::Format(e.to_string()))?;
        if doc.probs.len() != doc.k_max + 1 {
            return Err(ModelError::Format(format!(
                "k_max {} but {} probabilities",
                doc.k_max,
                doc.probs.len()
            )));
        }
        let mut wrows = vec![vec![None; doc.k_max + 1]; doc.k_max + 1];
        for (key, row) in doc.weights {
            let k: usize = key.parse().map_err(|_| ModelError::Format(format!("bad weight key '{key}'")))?;
            if k > doc.k_max || row.len() != doc.k_max + 1 {
                return Err(ModelError::Format(format!("bad weight row '{key}'")));
            }
            wrows[k] = row;
        }
        let dist = FitnessDistribution::new(doc.probs)?;
        let kernel = NeighborKernel::new(doc.rows)?;
        let weights = NsfWeightTable::new(wrows)?;
        Self::new(dist, kernel, weights)
    }
}

/// Builds a banded benchmark kernel: within distance `bound` of `k` the
/// neighbour probabilities are proportional to `p`, beyond it they vanish.
/// `rule` fixes the same-cost entry; see [`SameCostRule`].
pub fn kernel_from_weights(
    dist: &FitnessDistribution,
    bound: usize,
    rule: SameCostRule,
) -> Result<ClassModel, ModelError> {
    if bound == 0 {
        return Err(ModelError::ZeroBound);
    }
    let n = dist.k_max();
    let mut rows = vec![vec![0.0; n + 1]; n + 1];
    let mut wrows = vec![vec![None; n + 1]; n + 1];
    for k in 0..=n {
        let band = sum((1..=bound).map(|d| dist.p_pm(k, d)));
        let pk = dist.p(k);
        // With an empty band only a row whose mass can sit on `k` itself survives.
        let (same, c) = match rule {
            SameCostRule::MatchP if band > 0.0 => (pk, (1.0 - pk) / band),
            SameCostRule::MatchP if pk >= 1.0 - NORM_TOL => (1.0, 0.0),
            SameCostRule::Zero if band > 0.0 => (0.0, 1.0 / band),
            SameCostRule::Weighted if band + pk > 0.0 => {
                let c = 1.0 / (band + pk);
                (c * pk, c)
            }
            _ => return Err(ModelError::DegenerateBound { k, bound }),
        };
        rows[k][k] = same;
        for d in 1..=n {
            if dist.p_pm(k, d) > 0.0 {
                wrows[k][d] = Some(if d <= bound { c } else { 0.0 });
            }
            if d <= bound {
                if k + d <= n {
                    rows[k][k + d] = c * dist.p(k + d);
                }
                if d <= k {
                    rows[k][k - d] = c * dist.p(k - d);
                }
            }
        }
    }
    ClassModel::new(dist.clone(), NeighborKernel::new(rows)?, NsfWeightTable::new(wrows)?)
}
