//! NSF verdict tables over a range of cost levels, for census estimates
//! and analytic models alike.

use std::fmt::Write as _;

use serde::Serialize;

use super::CensusReport;
use crate::model::ClassModel;
use crate::numeric::{geq, sum};

/// Level-indexed `p` and `pn` tables. Level 0 is the lowest level held.
pub trait LevelTables {
    fn k_max(&self) -> usize;
    fn p(&self, k: usize) -> f64;
    /// `pn(k, j)`, or `None` when row `k` is not known.
    fn pn(&self, k: usize, j: isize) -> Option<f64>;
    /// The cost a level stands for.
    fn label(&self, k: usize) -> u64;
    /// Lowest level with positive probability.
    fn optimum(&self) -> usize;

    /// Combined-sides `r(k,δ)`; `None` when the denominator vanishes or the row is unknown.
    fn ratio(&self, k: usize, delta: usize) -> Option<f64> {
        let below = if delta <= k { self.p(k - delta) } else { 0.0 };
        let den = self.p(k + delta) + below;
        if den <= 0.0 {
            return None;
        }
        let num = self.pn(k, (k + delta) as isize)? + self.pn(k, k as isize - delta as isize)?;
        Some(num / den)
    }
}

impl LevelTables for CensusReport {
    fn k_max(&self) -> usize {
        CensusReport::k_max(self)
    }
    fn p(&self, k: usize) -> f64 {
        CensusReport::p(self, k)
    }
    fn pn(&self, k: usize, j: isize) -> Option<f64> {
        CensusReport::pn(self, k, j)
    }
    fn label(&self, k: usize) -> u64 {
        self.raw(k)
    }
    fn optimum(&self) -> usize {
        self.optimum_level()
    }
}

impl LevelTables for ClassModel {
    fn k_max(&self) -> usize {
        self.dist.k_max()
    }
    fn p(&self, k: usize) -> f64 {
        self.dist.p(k)
    }
    fn pn(&self, k: usize, j: isize) -> Option<f64> {
        (k <= self.dist.k_max()).then(|| self.kernel.pn(k, j))
    }
    fn label(&self, k: usize) -> u64 {
        k as u64
    }
    fn optimum(&self) -> usize {
        self.dist.probs().iter().position(|&p| p > 0.0).unwrap_or(0)
    }
    fn ratio(&self, k: usize, delta: usize) -> Option<f64> {
        self.weights.weight(k, delta)
    }
}

/// One `(k, δ)` verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairVerdict {
    pub delta: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Verdicts at one surveyed level. `δ` runs over `1..=k−optimum`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsfRow {
    pub level: usize,
    pub cost: u64,
    /// `r(k,δ)` for δ = 1, 2, ….
    pub weights: Vec<Option<f64>>,
    /// One-sided `pn(k,k−δ)/p(k−δ)`, for diagnostics.
    pub improve_ratio: Vec<Option<f64>>,
    /// One-sided `pn(k,k+δ)/p(k+δ)`, for diagnostics.
    pub worsen_ratio: Vec<Option<f64>>,
    /// `pn(k,k−δ) ≥ r(k,δ)·p(k−δ)`.
    pub normal: Vec<PairVerdict>,
    /// `r(k,δ) ≥ r(k,δ+1)`.
    pub monotone: Vec<PairVerdict>,
    pub rbar: Option<f64>,
    pub p_improve: f64,
    pub pn_improve: f64,
    pub pbr_improve: f64,
    /// `pbr^<(k) ≥ r̄(k)·p^<(k)`.
    pub lemma4: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NsfReport {
    pub rows: Vec<NsfRow>,
    /// Requested levels with no neighbourhood row.
    pub missing: Vec<usize>,
    pub normal_pairs: usize,
    pub normal_holds: usize,
    pub monotone_pairs: usize,
    pub monotone_holds: usize,
    pub lemma4_all: bool,
    pub rbar_gt1_all: bool,
}

impl NsfReport {
    pub fn normal_fraction(&self) -> f64 {
        fraction(self.normal_holds, self.normal_pairs)
    }

    pub fn monotone_fraction(&self) -> f64 {
        fraction(self.monotone_holds, self.monotone_pairs)
    }

    /// Failing `(cost, δ)` monotonicity pairs.
    pub fn monotone_failures(&self) -> Vec<(u64, usize)> {
        self.rows
            .iter()
            .flat_map(|r| r.monotone.iter().filter(|v| !v.holds).map(move |v| (r.cost, v.delta)))
            .collect()
    }

    /// Failing `(cost, δ)` normality pairs.
    pub fn normal_failures(&self) -> Vec<(u64, usize)> {
        self.rows
            .iter()
            .flat_map(|r| r.normal.iter().filter(|v| !v.holds).map(move |v| (r.cost, v.delta)))
            .collect()
    }

    /// Per-level summary: `cost,rbar,p_improve,pn_improve,pbr_improve,lemma4,normal_ok,monotone_ok`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cost,rbar,p_improve,pn_improve,pbr_improve,lemma4,normal_ok,monotone_ok\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.cost,
                r.rbar.map_or(String::new(), |v| v.to_string()),
                r.p_improve,
                r.pn_improve,
                r.pbr_improve,
                r.lemma4,
                r.normal.iter().all(|v| v.holds),
                r.monotone.iter().all(|v| v.holds)
            );
        }
        out
    }

    /// Pair table: `cost,delta,r,pn_down,r_p_down,normal,monotone`.
    pub fn pairs_csv(&self) -> String {
        let mut out = String::from("cost,delta,r,pn_down,r_p_down,normal,monotone\n");
        for r in &self.rows {
            for (i, w) in r.weights.iter().enumerate() {
                let delta = i + 1;
                let nv = r.normal.iter().find(|v| v.delta == delta);
                let mv = r.monotone.iter().find(|v| v.delta == delta);
                let _ = writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.cost,
                    delta,
                    w.map_or(String::new(), |v| v.to_string()),
                    nv.map_or(String::new(), |v| v.lhs.to_string()),
                    nv.map_or(String::new(), |v| v.rhs.to_string()),
                    nv.map_or(String::new(), |v| v.holds.to_string()),
                    mv.map_or(String::new(), |v| v.holds.to_string())
                );
            }
        }
        out
    }
}

fn fraction(a: usize, b: usize) -> f64 {
    if b == 0 {
        1.0
    } else {
        a as f64 / b as f64
    }
}

fn row_for<T: LevelTables + ?Sized>(t: &T, k: usize) -> Option<NsfRow> {
    t.pn(k, k as isize)?;
    let opt = t.optimum();
    let span = k.saturating_sub(opt);
    let weights: Vec<Option<f64>> = (1..=span).map(|d| t.ratio(k, d)).collect();
    let one_side = |j: usize| {
        let p = t.p(j);
        (p > 0.0).then(|| t.pn(k, j as isize).unwrap_or(0.0) / p)
    };
    let improve_ratio = (1..=span).map(|d| one_side(k - d)).collect();
    let worsen_ratio = (1..=span).map(|d| one_side(k + d)).collect();
    let normal = weights
        .iter()
        .enumerate()
        .filter_map(|(i, w)| {
            let d = i + 1;
            let lhs = t.pn(k, (k - d) as isize).unwrap_or(0.0);
            let rhs = (*w)? * t.p(k - d);
            Some(PairVerdict { delta: d, lhs, rhs, holds: geq(lhs, rhs) })
        })
        .collect();
    let monotone = weights
        .windows(2)
        .enumerate()
        .filter_map(|(i, w)| {
            let (a, b) = (w[0]?, w[1]?);
            Some(PairVerdict { delta: i + 1, lhs: a, rhs: b, holds: geq(a, b) })
        })
        .collect();
    let defined: Vec<f64> = weights.iter().flatten().copied().collect();
    let rbar = (!defined.is_empty()).then(|| sum(defined.iter().copied()) / defined.len() as f64);
    let p_improve = sum((0..k).map(|j| t.p(j)));
    let pn_improve = sum((0..k).map(|j| t.pn(k, j as isize).unwrap_or(0.0)));
    let pbr_improve = sum(weights.iter().enumerate().map(|(i, w)| w.unwrap_or(0.0) * t.p(k - i - 1)));
    let lemma4 = rbar.is_some_and(|rb| geq(pbr_improve, rb * p_improve));
    Some(NsfRow {
        level: k,
        cost: t.label(k),
        weights,
        improve_ratio,
        worsen_ratio,
        normal,
        monotone,
        rbar,
        p_improve,
        pn_improve,
        pbr_improve,
        lemma4,
    })
}

/// Verdicts for the levels `lo..=hi` (clamped to the table).
pub fn nsf_table<T: LevelTables + ?Sized>(t: &T, lo: usize, hi: usize) -> NsfReport {
    let mut rows = Vec::new();
    let mut missing = Vec::new();
    for k in lo..=hi.min(t.k_max()) {
        match row_for(t, k) {
            Some(r) => rows.push(r),
            None => missing.push(k),
        }
    }
    let count = |f: fn(&NsfRow) -> &Vec<PairVerdict>| {
        let all: usize = rows.iter().map(|r| f(r).len()).sum();
        let ok: usize = rows.iter().map(|r| f(r).iter().filter(|v| v.holds).count()).sum();
        (all, ok)
    };
    let (normal_pairs, normal_holds) = count(|r| &r.normal);
    let (monotone_pairs, monotone_holds) = count(|r| &r.monotone);
    let lemma4_all = !rows.is_empty() && rows.iter().all(|r| r.lemma4);
    let rbar_gt1_all = !rows.is_empty() && rows.iter().all(|r| r.rbar.is_some_and(|v| v > 1.0));
    NsfReport {
        rows,
        missing,
        normal_pairs,
        normal_holds,
        monotone_pairs,
        monotone_holds,
        lemma4_all,
        rbar_gt1_all,
    }
}

/// Census verdicts for the raw costs `k_lo..=k_hi`.
pub fn nsf_report(report: &CensusReport, k_lo: u64, k_hi: u64) -> NsfReport {
    let lo = k_lo.saturating_sub(report.offset) as usize;
    let hi = match k_hi.checked_sub(report.offset) {
        Some(h) => h as usize,
        None => return nsf_table(report, 1, 0),
    };
    nsf_table(report, lo, hi)
}

/// Model verdicts for the levels `k_lo..=k_hi`.
pub fn nsf_report_model(model: &ClassModel, k_lo: usize, k_hi: usize) -> NsfReport {
    nsf_table(model, k_lo, k_hi)
}
