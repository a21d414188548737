//! Analytic model of degree-regular random 2-SAT under single-variable flips.
//!
//! The cost is the number of false clauses. A point with cost `k` out of
//! `m` clauses is modelled as having each clause false with probability
//! `k/m`, independently. Flipping a variable touches each of its
//! `occurrences` clauses: a false clause always becomes true (−1), a true
//! clause becomes false with probability `f` (+1) and otherwise stays true.
//! The neighbour cost change is the sum of those independent terms.

use serde::{Deserialize, Serialize};

use super::BenchError;
use crate::model::{ClassModel, FitnessDistribution, NeighborKernel};
use crate::numeric::{ln_choose, sum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Sat2Spec {
    pub n_vars: usize,
    pub n_clauses: usize,
    pub clause_len: usize,
    pub occurrences_per_var: usize,
}

impl Default for Sat2Spec {
    fn default() -> Self {
        Self { n_vars: 50, n_clauses: 100, clause_len: 2, occurrences_per_var: 4 }
    }
}

impl Sat2Spec {
    pub fn validate(&self) -> Result<(), BenchError> {
        if self.n_vars == 0 || self.clause_len == 0 || self.occurrences_per_var == 0 {
            return Err(BenchError::Spec("all Sat2Spec fields must be positive".into()));
        }
        if self.n_clauses * self.clause_len != self.n_vars * self.occurrences_per_var {
            return Err(BenchError::Spec(format!(
                "{} clauses of length {} cannot give {} variables {} occurrences each",
                self.n_clauses, self.clause_len, self.n_vars, self.occurrences_per_var
            )));
        }
        if self.clause_len > self.n_vars {
            return Err(BenchError::Spec("clause longer than the variable count".into()));
        }
        Ok(())
    }

    /// Probability that a uniformly random assignment falsifies one clause.
    pub fn clause_false_prob(&self) -> f64 {
        0.5f64.powi(self.clause_len as i32)
    }
}

/// Probability that flipping one of its variables falsifies a true clause.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum SatFlipRule {
    /// Of the `2^L − 1` satisfying literal patterns exactly one has the
    /// flipped literal as its only true literal: `f = 1/(2^L − 1)` (1/3 for 2-SAT).
    #[default]
    OneThird,
    /// `f = 1/2`, the coarser estimate; kept for sensitivity studies.
    OneHalf,
}

impl SatFlipRule {
    pub fn falsify_prob(&self, clause_len: usize) -> f64 {
        match self {
            SatFlipRule::OneThird => 1.0 / (2f64.powi(clause_len as i32) - 1.0),
            SatFlipRule::OneHalf => 0.5,
        }
    }
}

impl std::str::FromStr for SatFlipRule {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1/3" | "third" | "one-third" => Ok(Self::OneThird),
            "1/2" | "half" | "one-half" => Ok(Self::OneHalf),
            other => Err(format!("unknown flip rule '{other}' (1/3|1/2)")),
        }
    }
}

/// Distribution of the cost change of one flip at cost `k`, indexed by
/// `δ + occurrences` for `δ ∈ −occ..=occ`. Sums to one; no range clipping.
pub fn flip_delta_distribution(spec: &Sat2Spec, rule: SatFlipRule, k: usize) -> Vec<f64> {
    let occ = spec.occurrences_per_var;
    let pk = k as f64 / spec.n_clauses as f64;
    let f = rule.falsify_prob(spec.clause_len);
    let step = [pk, (1.0 - pk) * (1.0 - f), (1.0 - pk) * f];
    // dist[i] is P(change = i − occ)
    let mut dist = vec![0.0; 2 * occ + 1];
    dist[occ] = 1.0;
    for _ in 0..occ {
        let mut next = vec![0.0; 2 * occ + 1];
        for (i, &v) in dist.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            if i > 0 {
                next[i - 1] += v * step[0];
            }
            next[i] += v * step[1];
            if i + 1 < next.len() {
                next[i + 1] += v * step[2];
            }
        }
        dist = next;
    }
    dist
}

/// Analytic 2-SAT class: binomial cost distribution and the flip kernel.
///
/// Near the ends of the range the independence model puts a little mass
/// on impossible costs (below 0 or above `m`); rows are renormalised over
/// the feasible levels there. For the 50/100/2/4 class this only touches
/// rows `k < 4` and `k > 96`.
pub fn build_sat2_analytic(spec: &Sat2Spec, rule: SatFlipRule) -> Result<ClassModel, BenchError> {
    spec.validate()?;
    let m = spec.n_clauses;
    let q = spec.clause_false_prob();
    let probs: Vec<f64> = (0..=m)
        .map(|c| {
            (ln_choose(m as u64, c as u64) + c as f64 * q.ln() + (m - c) as f64 * (1.0 - q).ln()).exp()
        })
        .collect();
    let dist = FitnessDistribution::from_masses(&probs)?;
    let occ = spec.occurrences_per_var as isize;
    let mut rows = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let deltas = flip_delta_distribution(spec, rule, k);
        let mut row = vec![0.0; m + 1];
        for (i, &v) in deltas.iter().enumerate() {
            let target = k as isize + i as isize - occ;
            if (0..=m as isize).contains(&target) {
                row[target as usize] += v;
            }
        }
        let s = sum(row.iter().copied());
        row.iter_mut().for_each(|v| *v /= s);
        rows.push(row);
    }
    Ok(ClassModel::from_kernel(dist, NeighborKernel::new(rows)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// The six case groups written out for four occurrences, as an
    /// independent oracle for the convolution.
    fn explicit_row(k: usize, f: f64) -> [f64; 9] {
        let p = k as f64 / 100.0;
        let npf = (1.0 - p) * f;
        let npt = (1.0 - p) * (1.0 - f);
        let mut r = [0.0; 9];
        r[0] = p.powi(4);
        r[1] = 4.0 * p.powi(3) * npt;
        r[2] = 6.0 * p * p * npt * npt + 4.0 * p.powi(3) * npf;
        r[3] = 4.0 * p * npt.powi(3) + 12.0 * p * p * npt * npf;
        r[4] = npt.powi(4) + 12.0 * p * npt * npt * npf + 6.0 * p * p * npf * npf;
        r[5] = 4.0 * npt.powi(3) * npf + 12.0 * p * npt * npf * npf;
        r[6] = 6.0 * npt * npt * npf * npf + 4.0 * p * npf.powi(3);
        r[7] = 4.0 * npt * npf.powi(3);
        r[8] = npf.powi(4);
        r
    }

    #[test]
    fn convolution_matches_case_analysis() {
        let spec = Sat2Spec::default();
        for rule in [SatFlipRule::OneThird, SatFlipRule::OneHalf] {
            let f = rule.falsify_prob(2);
            for k in [0, 7, 20, 55, 100] {
                let got = flip_delta_distribution(&spec, rule, k);
                let want = explicit_row(k, f);
                for i in 0..9 {
                    assert!((got[i] - want[i]).abs() < 1e-15, "k={k} i={i}");
                }
            }
        }
    }

    #[test]
    fn interior_rows_need_no_renormalisation() {
        let spec = Sat2Spec::default();
        let m = build_sat2_analytic(&spec, SatFlipRule::OneThird).unwrap();
        for k in 4..=96 {
            let d = flip_delta_distribution(&spec, SatFlipRule::OneThird, k);
            for (i, &v) in d.iter().enumerate() {
                let t = (k + i) as isize - 4;
                assert!((m.kernel.pn(k, t) - v).abs() < 1e-15);
            }
            let band: f64 = (0..=8).map(|i| m.kernel.pn(k, (k + i) as isize - 4)).sum();
            assert!((band - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn distribution_peak() {
        let m = build_sat2_analytic(&Sat2Spec::default(), SatFlipRule::OneThird).unwrap();
        assert_eq!(m.dist.modal_cost(), 25);
        assert_eq!(m.dist.good_enough_cost(), 12);
        for k in 0..=100 {
            for d in 5..=100 {
                assert_eq!(m.kernel.pn(k, k as isize + d), 0.0);
                assert_eq!(m.kernel.pn(k, k as isize - d), 0.0);
            }
        }
    }

    #[test]
    fn spec_consistency() {
        let bad = Sat2Spec { n_vars: 50, n_clauses: 99, clause_len: 2, occurrences_per_var: 4 };
        assert!(bad.validate().is_err());
        let three = Sat2Spec { n_vars: 30, n_clauses: 40, clause_len: 3, occurrences_per_var: 4 };
        assert!(build_sat2_analytic(&three, SatFlipRule::OneThird).is_ok());
        assert!((SatFlipRule::OneThird.falsify_prob(3) - 1.0 / 7.0).abs() < 1e-15);
    }
}
