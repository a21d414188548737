//! Exhaustive grid search for weight vectors that contradict the claim
//! that NSF weights noticeably above one make descent beat blind search.
//!
//! Candidates are non-increasing vectors `r_1 ≥ … ≥ r_K` on the grid
//! `{resolution·i} ∩ [epsilon, r_max]`, kept only when they pass the same
//! feasibility test as [`build_counts_class`](crate::benchmarks::build_counts_class).
//! A violation is a candidate with `r_1 > 1 + epsilon` whose expected
//! descent from level `K` is no better than blind search.

use rayon::prelude::*;
use serde::Serialize;

use super::AnalysisError;
use crate::benchmarks::CountsClassSpec;
use crate::numeric::{sum, SLACK};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FalsifyConfig {
    pub resolution: f64,
    pub epsilon: f64,
    pub r_max: f64,
    /// Fraction of each combined weight placed on the improving side.
    /// 1 gives normal neighbourhoods; smaller values break normality.
    pub improving_share: f64,
}

impl Default for FalsifyConfig {
    fn default() -> Self {
        Self { resolution: 0.25, epsilon: 0.05, r_max: 100.0, improving_share: 1.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsifyViolation {
    pub weights: Vec<f64>,
    pub steps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FalsifyReport {
    pub blind: f64,
    /// Grid vectors passing the row-`K` mass bound.
    pub evaluated: u64,
    /// Of those, vectors passing the full feasibility test.
    pub feasible: u64,
    pub violations: Vec<FalsifyViolation>,
}

struct Search<'a> {
    p: &'a [f64],
    grid: &'a [f64],
    /// `p(K+δ) + p(K−δ)` for δ = 1..=K (index δ−1).
    coef: Vec<f64>,
    blind: f64,
    cfg: FalsifyConfig,
}

#[derive(Default)]
struct Tally {
    evaluated: u64,
    feasible: u64,
    violations: Vec<FalsifyViolation>,
}

impl Search<'_> {
    /// Descent expectation from `K` with improving entries `share·r_δ·p(k−δ)`.
    fn steps(&self, w: &[f64]) -> f64 {
        let kk = w.len();
        let mut s = vec![0.0; kk + 1];
        for j in 1..=kk {
            let pn = |i: usize| self.cfg.improving_share * w[j - i - 1] * self.p[i];
            let imp = sum((0..j).map(pn));
            let acc = sum((1..j).map(|i| pn(i) * s[i]));
            s[j] = (1.0 + acc) / imp;
        }
        s[kk]
    }

    fn leaf(&self, w: &[f64], t: &mut Tally) {
        t.evaluated += 1;
        if crate::benchmarks::counts::feasibility(self.p, w).is_err() {
            return;
        }
        t.feasible += 1;
        if w[0] > 1.0 + self.cfg.epsilon {
            let s = self.steps(w);
            if s >= self.blind * (1.0 - SLACK) {
                t.violations.push(FalsifyViolation { weights: w.to_vec(), steps: s });
            }
        }
    }

    /// Fills `w[delta-1]` and everything left of it. `used` is the row-`K`
    /// mass already committed by positions right of `delta`.
    fn fill(&self, w: &mut Vec<f64>, delta: usize, lo: usize, used: f64, t: &mut Tally) {
        if delta == 0 {
            self.leaf(w, t);
            return;
        }
        // Cheapest completion: every remaining weight equal to this one.
        let rest: f64 = self.coef[..delta].iter().sum();
        for gi in lo..self.grid.len() {
            let v = self.grid[gi];
            if used + v * rest > 1.0 + SLACK {
                break;
            }
            w[delta - 1] = v;
            self.fill(w, delta - 1, gi, used + v * self.coef[delta - 1], t);
        }
    }
}

pub fn falsify_weights(spec: &CountsClassSpec, cfg: &FalsifyConfig) -> Result<FalsifyReport, AnalysisError> {
    if !(cfg.resolution > 0.0) || !(cfg.r_max >= cfg.epsilon) {
        return Err(AnalysisError::Invalid(format!(
            "need resolution > 0 and r_max ≥ epsilon, got {cfg:?}"
        )));
    }
    if !(cfg.improving_share > 0.0 && cfg.improving_share <= 1.0) {
        return Err(AnalysisError::Invalid("improving_share must lie in (0, 1]".into()));
    }
    // Validate everything except the weights, which the search supplies.
    let mut probe = spec.clone();
    probe.weights = vec![1.0; spec.eval_level()];
    probe.validate()?;
    let p = probe.probabilities();
    let kk = spec.eval_level();
    if p[0] <= 0.0 {
        return Err(AnalysisError::NoOptimumMass);
    }
    let n_max = (cfg.r_max / cfg.resolution + 1e-9).floor() as usize;
    let grid: Vec<f64> = (1..=n_max)
        .map(|i| i as f64 * cfg.resolution)
        .filter(|&v| v >= cfg.epsilon - 1e-12)
        .collect();
    let coef: Vec<f64> = (1..=kk).map(|d| p[kk + d] + p[kk - d]).collect();
    let search = Search { p: &p, grid: &grid, coef, blind: 1.0 / p[0], cfg: *cfg };
    let base = p[kk];
    let rest_all: f64 = search.coef.iter().sum();

    // Partition on the last weight; each worker owns its slice of the grid.
    let parts: Vec<Tally> = (0..grid.len())
        .into_par_iter()
        .map(|gi| {
            let mut t = Tally::default();
            let v = grid[gi];
            if base + v * rest_all > 1.0 + SLACK {
                return t;
            }
            let mut w = vec![0.0; kk];
            w[kk - 1] = v;
            search.fill(&mut w, kk - 1, gi, base + v * search.coef[kk - 1], &mut t);
            t
        })
        .collect();
    let mut report = FalsifyReport { blind: search.blind, evaluated: 0, feasible: 0, violations: Vec::new() };
    for t in parts {
        report.evaluated += t.evaluated;
        report.feasible += t.feasible;
        report.violations.extend(t.violations);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_config() {
        let spec = CountsClassSpec::table6(&[1.0; 4]);
        let cfg = FalsifyConfig { resolution: 0.0, ..Default::default() };
        assert!(falsify_weights(&spec, &cfg).is_err());
        let cfg = FalsifyConfig { improving_share: 0.0, ..Default::default() };
        assert!(falsify_weights(&spec, &cfg).is_err());
    }

    #[test]
    fn coarse_grid_on_table6_matches_brute_force() {
        let spec = CountsClassSpec::table6(&[1.0; 4]);
        let cfg = FalsifyConfig { resolution: 0.5, epsilon: 0.05, r_max: 6.0, improving_share: 1.0 };
        let report = falsify_weights(&spec, &cfg).unwrap();
        // Brute force over the whole 12^4 grid with no pruning.
        let grid: Vec<f64> = (1..=12).map(|i| i as f64 * 0.5).collect();
        let p = spec.probabilities();
        let mut feasible = 0;
        for &a in &grid {
            for &b in grid.iter().filter(|&&b| b <= a) {
                for &c in grid.iter().filter(|&&c| c <= b) {
                    for &d in grid.iter().filter(|&&d| d <= c) {
                        if crate::benchmarks::counts::feasibility(&p, &[a, b, c, d]).is_ok() {
                            feasible += 1;
                        }
                    }
                }
            }
        }
        assert_eq!(report.feasible, feasible);
        assert!(report.feasible > 0);
        assert!(report.violations.is_empty());
    }

    #[test]
    fn non_normal_variant_finds_violations() {
        let spec = CountsClassSpec::table6(&[1.0; 4]);
        let cfg = FalsifyConfig { resolution: 0.25, epsilon: 0.05, r_max: 10.0, improving_share: 0.5 };
        let report = falsify_weights(&spec, &cfg).unwrap();
        assert!(!report.violations.is_empty());
        assert!(report.violations.iter().all(|v| v.weights[0] > 1.05 && v.steps >= report.blind * (1.0 - 1e-12)));
    }
}
