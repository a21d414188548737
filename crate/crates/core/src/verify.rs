//! Randomised property suites standing in for the proofs.
//!
//! Each property draws models that satisfy its hypotheses (checked with the
//! library's own predicates, never assumed from the generator) and counts
//! models whose conclusion fails by more than a relative `1e-9`.

use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analysis::{blind_seeded_steps, blind_steps, steps, steps_uniform, SeedThreshold};
use crate::benchmarks::{build_counterexample, hypotheses, Counterexample, Hypothesis};
use crate::model::{ClassModel, FitnessDistribution, NeighborKernel, NsfWeightTable, Side};
use crate::numeric::{geq, leq_rel, sum};
use crate::rng::{self, SimRng};

/// Relative tolerance on every conclusion.
pub const REL_TOL: f64 = 1e-9;

/// Generation attempts per model before a slot counts as skipped.
const ATTEMPTS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Property {
    Lemma1,
    Lemma2,
    Lemma3,
    Lemma4,
    Theorem1,
    StrictImprovement,
    Lemma5,
    StepsUpperBound,
    FixedCount,
    Monotonicity,
    Theorem2,
    Theorem3,
}

impl Property {
    pub const ALL: [Property; 12] = [
        Property::Lemma1,
        Property::Lemma2,
        Property::Lemma3,
        Property::Lemma4,
        Property::Theorem1,
        Property::StrictImprovement,
        Property::Lemma5,
        Property::StepsUpperBound,
        Property::FixedCount,
        Property::Monotonicity,
        Property::Theorem2,
        Property::Theorem3,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Property::Lemma1 => "lemma1",
            Property::Lemma2 => "lemma2",
            Property::Lemma3 => "lemma3",
            Property::Lemma4 => "lemma4",
            Property::Theorem1 => "theorem1",
            Property::StrictImprovement => "strict",
            Property::Lemma5 => "lemma5",
            Property::StepsUpperBound => "steps-upper-bound",
            Property::FixedCount => "fixed-count",
            Property::Monotonicity => "monotonicity",
            Property::Theorem2 => "theorem2",
            Property::Theorem3 => "theorem3",
        }
    }

    fn check(&self, r: &mut SimRng) -> Check {
        match self {
            Property::Lemma1 => lemma1(r),
            Property::Lemma2 => lemma2(r),
            Property::Lemma3 => lemma3(r),
            Property::Lemma4 => lemma4(r),
            Property::Theorem1 => theorem1(r),
            Property::StrictImprovement => strict(r),
            Property::Lemma5 => lemma5(r),
            Property::StepsUpperBound => steps_upper_bound(r),
            Property::FixedCount => fixed_count(r),
            Property::Monotonicity => monotonicity(r),
            Property::Theorem2 => theorem2(r),
            Property::Theorem3 => theorem3(r),
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Property {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Property::ALL
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Property::ALL.iter().map(|p| p.name()).collect();
                format!("unknown property '{s}' ({})", names.join("|"))
            })
    }
}

/// Outcome of one generated model.
#[derive(Debug, Clone, PartialEq)]
enum Check {
    /// The draw did not meet the hypotheses.
    Skip,
    /// `excess` is the relative amount by which the conclusion was missed (≤ 0 when it holds).
    Done { excess: f64, detail: String },
}

fn rel_excess(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs) / rhs.abs().max(lhs.abs()).max(f64::MIN_POSITIVE)
}

/// `lhs ≤ rhs` at the suite tolerance.
fn claim_leq(lhs: f64, rhs: f64, what: impl FnOnce() -> String) -> Check {
    let excess = rel_excess(lhs, rhs);
    let detail = if leq_rel(lhs, rhs, REL_TOL) { String::new() } else { what() };
    Check::Done { excess, detail }
}

fn merge(checks: impl IntoIterator<Item = Check>) -> Check {
    let mut worst = Check::Skip;
    for c in checks {
        match (&worst, &c) {
            (_, Check::Skip) => {}
            (Check::Skip, _) => worst = c,
            (Check::Done { excess: a, detail: da }, Check::Done { excess: b, detail: db }) => {
                let failing_first = da.is_empty() && !db.is_empty();
                if failing_first || (da.is_empty() == db.is_empty() && b > a) {
                    worst = c;
                }
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyReport {
    pub name: &'static str,
    /// Models that met the hypotheses and were checked.
    pub models: usize,
    pub violations: usize,
    /// Slots where no draw met the hypotheses within the attempt budget.
    pub skipped: usize,
    /// Largest relative excess seen (negative when every conclusion held with room).
    pub worst_excess: f64,
    pub first_violation: Option<String>,
}

impl PropertyReport {
    pub fn passed(&self) -> bool {
        self.violations == 0 && self.models > 0
    }
}

/// Checks `n` models for one property. Model `i` draws from stream `i` of a
/// seed derived from `seed` and the property, so the report does not depend
/// on the thread count.
pub fn run_property(prop: Property, n: usize, seed: u64) -> PropertyReport {
    let base = rng::derive_seed(seed, prop as u64);
    let results: Vec<Check> = (0..n as u64)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(base, i);
            (0..ATTEMPTS)
                .map(|_| prop.check(&mut r))
                .find(|c| *c != Check::Skip)
                .unwrap_or(Check::Skip)
        })
        .collect();
    let mut rep = PropertyReport {
        name: prop.name(),
        models: 0,
        violations: 0,
        skipped: 0,
        worst_excess: f64::NEG_INFINITY,
        first_violation: None,
    };
    for c in results {
        match c {
            Check::Skip => rep.skipped += 1,
            Check::Done { excess, detail } => {
                rep.models += 1;
                rep.worst_excess = rep.worst_excess.max(excess);
                if !detail.is_empty() {
                    rep.violations += 1;
                    rep.first_violation.get_or_insert(detail);
                }
            }
        }
    }
    rep
}

/// Every property with `n` models each.
pub fn run_all(n: usize, seed: u64) -> Vec<PropertyReport> {
    Property::ALL.iter().map(|&p| run_property(p, n, seed)).collect()
}

/// The counter-example fixtures against the hypotheses of the improvement theorem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FixtureReport {
    pub name: &'static str,
    pub violates: Hypothesis,
    pub failing: Vec<Hypothesis>,
    pub p_improve: f64,
    pub pn_improve: f64,
    /// Fails exactly its designated hypothesis and neighbourhood search loses.
    pub ok: bool,
}

pub fn fixture_reports() -> Vec<FixtureReport> {
    Counterexample::ALL
        .iter()
        .map(|&id| {
            let f = build_counterexample(id);
            let failing = hypotheses(&f.model, f.k).failing();
            let p_improve = f.model.dist.blind_improve_prob(f.k);
            let pn_improve = f.model.kernel.improve_prob(f.k);
            FixtureReport {
                name: id.name(),
                violates: f.violates,
                ok: failing == vec![f.violates] && pn_improve < p_improve,
                failing,
                p_improve,
                pn_improve,
            }
        })
        .collect()
}

// ---------------------------------------------------------------- generators

/// A class model and the level its hypotheses concern.
#[derive(Debug, Clone)]
pub struct LevelModel {
    pub model: ClassModel,
    pub k: usize,
}

/// How the same-cost mass `pn(k,k)` of the studied row is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SameCost {
    /// `pn(k,k) ≤ p(k)`.
    AtMostP,
    /// Anything, but scaled so that `r̄(k) ≥ 1`.
    RbarAtLeastOne,
    /// Anything.
    Free,
}

/// Non-increasing profile `g(1..=n)` (index 0 unused), `g(1) > 0`, with
/// plateaus and an optional cut to zero.
fn decreasing_profile(r: &mut SimRng, n: usize) -> Vec<f64> {
    let mut g = vec![1.0; n + 1];
    g[1] = r.random_range(0.2..3.0);
    let cut = r.random_bool(0.3).then(|| r.random_range(1..=n));
    for d in 2..=n {
        g[d] = if cut.is_some_and(|c| d > c) {
            0.0
        } else if r.random_bool(0.3) {
            g[d - 1]
        } else {
            g[d - 1] * r.random_range(0.3..1.0)
        };
    }
    g
}

/// Positive masses, non-decreasing up to `k_mod` and falling right after it.
fn modal_masses(r: &mut SimRng, k_max: usize, k_mod: usize) -> Vec<f64> {
    let mut m = vec![0.0; k_max + 1];
    m[0] = r.random_range(0.05..1.0);
    for i in 1..=k_mod {
        m[i] = if r.random_bool(0.2) { m[i - 1] } else { m[i - 1] * r.random_range(1.0..1.6) };
    }
    for i in k_mod + 1..=k_max {
        let hi = if i == k_mod + 1 { 0.99 } else { 1.0 };
        m[i] = m[k_mod] * r.random_range(0.01..hi);
    }
    m
}

/// Fills `row` (the kernel row of level `k`) from combined masses
/// `c(δ) = s·g(δ)·(p(k+δ)+p(k−δ))`. A normal split gives the improving side
/// at least `s·g(δ)·p(k−δ)`; otherwise the split is arbitrary.
fn split_row(r: &mut SimRng, p: &[f64], k: usize, s: f64, g: &[f64], normal: bool, row: &mut [f64]) {
    let n = p.len() - 1;
    for d in 1..=n {
        let w = s * g[d];
        let lower = if d <= k { p[k - d] } else { 0.0 };
        let upper = if k + d <= n { p[k + d] } else { 0.0 };
        let c = w * (lower + upper);
        if c == 0.0 {
            continue;
        }
        let lo = if d > k {
            0.0
        } else if k + d > n {
            c
        } else if normal {
            w * lower + r.random::<f64>() * w * upper
        } else {
            r.random::<f64>() * c
        };
        if d <= k {
            row[k - d] = lo;
        }
        if k + d <= n {
            row[k + d] = c - lo;
        }
    }
}

fn combined(p: &[f64], k: usize, d: usize) -> f64 {
    let n = p.len() - 1;
    (if d <= k { p[k - d] } else { 0.0 }) + (if k + d <= n { p[k + d] } else { 0.0 })
}

/// A model whose studied level satisfies GE (`k ≤ k_mod/2`) and NSF over
/// every δ; every other row is blind (`pn(j,·) = p`). With `shuffle` the
/// weight profile is permuted, giving rows outside the NSF hypothesis.
pub fn gen_level_model(r: &mut SimRng, same: SameCost, normal: bool, shuffle: bool) -> Option<LevelModel> {
    let k_max = r.random_range(4..=40);
    let k_mod = r.random_range(2..=k_max);
    let k = r.random_range(1..=k_mod / 2);
    let dist = FitnessDistribution::from_masses(&modal_masses(r, k_max, k_mod)).ok()?;
    let p = dist.probs().to_vec();
    let mut g = decreasing_profile(r, k_max);
    if shuffle {
        g[1..].shuffle(r);
    }
    let big_g = sum((1..=k_max).map(|d| g[d] * combined(&p, k, d)));
    if big_g <= 0.0 {
        return None;
    }
    let (s, same_mass) = match same {
        SameCost::AtMostP => {
            let pkk = p[k] * r.random::<f64>();
            ((1.0 - pkk) / big_g, pkk)
        }
        SameCost::RbarAtLeastOne => {
            let mean_g = sum((1..=k).map(|d| g[d])) / k as f64;
            let (lo, hi) = (1.0 / mean_g, 1.0 / big_g);
            if !(mean_g > 0.0 && lo <= hi) {
                return None;
            }
            let s = lo + r.random::<f64>() * (hi - lo);
            (s, (1.0 - s * big_g).max(0.0))
        }
        SameCost::Free => {
            let s = r.random::<f64>() / big_g;
            (s, 1.0 - s * big_g)
        }
    };
    let mut rows = vec![p.clone(); k_max + 1];
    rows[k] = vec![0.0; k_max + 1];
    rows[k][k] = same_mass;
    split_row(r, &p, k, s, &g, normal, &mut rows[k]);
    let kernel = NeighborKernel::new(rows).ok()?;
    let model = ClassModel::from_kernel(dist, kernel).ok()?;
    Some(LevelModel { model, k })
}

/// A model with full NSF from its level `k`, `p(i) ≥ p(0)` for `i ≤ k`, and
/// normal rows everywhere. Weights are `r(j,δ) = m_j·g_j(δ)` where `m_j`
/// and `g_j(δ)` never grow with `j` and each `g_j` is non-increasing in δ.
pub fn gen_full_nsf_model(r: &mut SimRng) -> Option<LevelModel> {
    let k_max = r.random_range(3..=30);
    let k = r.random_range(1..=k_max);
    let mut masses: Vec<f64> = (0..=k_max).map(|_| r.random_range(0.05..1.0)).collect();
    let floor = masses[..=k].iter().copied().fold(f64::INFINITY, f64::min);
    masses[0] = floor * if r.random_bool(0.2) { 1.0 } else { r.random_range(0.05..1.0) };
    let dist = FitnessDistribution::from_masses(&masses).ok()?;
    let p = dist.probs().to_vec();
    let scale = if r.random_bool(0.2) { 1.0 } else { r.random_range(0.3..1.0) };
    let mut g = decreasing_profile(r, k_max);
    let mut m = f64::INFINITY;
    let mut rows = vec![vec![0.0; k_max + 1]; k_max + 1];
    for j in 0..=k_max {
        if j > 0 && r.random_bool(0.5) {
            let h = decreasing_profile(r, k_max);
            let top = h[1];
            for d in 1..=k_max {
                g[d] *= (h[d] / top).min(1.0);
            }
        }
        let big_g = sum((1..=k_max).map(|d| g[d] * combined(&p, j, d)));
        if big_g <= 0.0 {
            return None;
        }
        m = m.min(scale / big_g);
        rows[j][j] = (1.0 - m * big_g).max(0.0);
        split_row(r, &p, j, m, &g, true, &mut rows[j]);
    }
    let kernel = NeighborKernel::new(rows).ok()?;
    let model = ClassModel::from_kernel(dist, kernel).ok()?;
    Some(LevelModel { model, k })
}

/// A weight table with full NSF from its top level, for the uniform-`p`
/// recursion. Each entry is at most its left and upper neighbours.
pub fn gen_full_nsf_table(r: &mut SimRng) -> NsfWeightTable {
    let k_max = r.random_range(1..=30);
    let mut rows = vec![vec![None; k_max + 1]; k_max + 1];
    let mut prev: Vec<f64> = vec![];
    for j in 1..=k_max {
        let mut row = vec![0.0f64; j + 1];
        for d in 1..=j {
            let mut bound = if d == 1 { r.random_range(0.1..4.0) } else { row[d - 1] };
            if d < j {
                bound = bound.min(prev[d]);
            }
            row[d] = if r.random_bool(0.3) { bound } else { bound * r.random_range(0.3..1.0) };
        }
        for d in 1..=j {
            rows[j][d] = Some(row[d]);
        }
        prev = row;
    }
    NsfWeightTable::new(rows).expect("generated weights are finite and non-negative")
}

fn scaled(t: &NsfWeightTable, s: f64) -> NsfWeightTable {
    NsfWeightTable::from_fn(t.k_max(), |k, d| if d == 0 { Some(1.0) } else { t.weight(k, d).map(|w| w * s) })
        .expect("scaled weights stay valid")
}

// ---------------------------------------------------------------- level-k properties

struct LevelSums {
    p_lo: f64,
    p_hi: f64,
    pbr_lo: f64,
    pbr_hi: f64,
    rbar: f64,
}

fn level_sums(m: &ClassModel, k: usize) -> Option<LevelSums> {
    Some(LevelSums {
        p_lo: m.dist.blind_improve_prob(k),
        p_hi: m.dist.blind_worsen_prob(k),
        pbr_lo: m.weighted_prob(k, Side::Improving),
        pbr_hi: m.weighted_prob(k, Side::Worsening),
        rbar: m.weights.average(k).ok()?,
    })
}

/// The two Lemma 2 conclusions, used as hypotheses by Lemmas 1, 3 and 4.
fn lemma2_conclusions(s: &LevelSums) -> bool {
    geq(s.pbr_lo, s.rbar * s.p_lo) && geq(s.rbar * s.p_hi, s.pbr_hi)
}

/// Draws for Lemmas 1, 3 and 4: half from the NSF generator, half with
/// shuffled profiles; the hypotheses are checked directly either way.
fn draw_for_ratio_lemmas(r: &mut SimRng, same: SameCost) -> Option<(LevelModel, LevelSums)> {
    let shuffle = r.random_bool(0.5);
    let lm = gen_level_model(r, same, false, shuffle)?;
    let s = level_sums(&lm.model, lm.k)?;
    lemma2_conclusions(&s).then_some((lm, s))
}

fn lemma1(r: &mut SimRng) -> Check {
    let Some((lm, s)) = draw_for_ratio_lemmas(r, SameCost::Free) else { return Check::Skip };
    if !(s.pbr_hi > 0.0 && s.p_hi > 0.0) {
        return Check::Skip;
    }
    let lhs = s.p_lo / s.p_hi;
    let rhs = s.pbr_lo / s.pbr_hi;
    claim_leq(lhs, rhs, || format!("k={} p</p>={lhs} > pbr</pbr>={rhs}", lm.k))
}

fn lemma2(r: &mut SimRng) -> Check {
    let Some(lm) = gen_level_model(r, SameCost::Free, false, false) else { return Check::Skip };
    let (m, k) = (&lm.model, lm.k);
    if !(k <= m.dist.good_enough_cost() && m.weights.check_nsf_all(k).holds) {
        return Check::Skip;
    }
    let Some(s) = level_sums(m, k) else { return Check::Skip };
    merge([
        claim_leq(s.rbar * s.p_lo, s.pbr_lo, || format!("k={k} pbr<={} < rbar·p<={}", s.pbr_lo, s.rbar * s.p_lo)),
        claim_leq(s.pbr_hi, s.rbar * s.p_hi, || format!("k={k} pbr>={} > rbar·p>={}", s.pbr_hi, s.rbar * s.p_hi)),
    ])
}

fn lemma3(r: &mut SimRng) -> Check {
    let Some((lm, s)) = draw_for_ratio_lemmas(r, SameCost::AtMostP) else { return Check::Skip };
    let (m, k) = (&lm.model, lm.k);
    if !(m.kernel.pn(k, k as isize) <= m.dist.p(k)) {
        return Check::Skip;
    }
    claim_leq(s.p_lo, s.pbr_lo, || format!("k={k} pbr<={} < p<={}", s.pbr_lo, s.p_lo))
}

fn lemma4(r: &mut SimRng) -> Check {
    let Some((lm, s)) = draw_for_ratio_lemmas(r, SameCost::RbarAtLeastOne) else { return Check::Skip };
    if s.rbar < 1.0 {
        return Check::Skip;
    }
    claim_leq(s.p_lo, s.pbr_lo, || format!("k={} pbr<={} < p<={}", lm.k, s.pbr_lo, s.p_lo))
}

/// GE, NSF over all δ, normal; returns the model if they hold.
fn theorem1_hypotheses(lm: &LevelModel) -> bool {
    let (m, k) = (&lm.model, lm.k);
    k <= m.dist.good_enough_cost()
        && m.weights.check_nsf_all(k).holds
        && m.check_normal(k).is_ok_and(|v| v.holds)
}

fn theorem1(r: &mut SimRng) -> Check {
    let same = if r.random_bool(0.5) { SameCost::AtMostP } else { SameCost::RbarAtLeastOne };
    let Some(lm) = gen_level_model(r, same, true, false) else { return Check::Skip };
    if !theorem1_hypotheses(&lm) {
        return Check::Skip;
    }
    let (m, k) = (&lm.model, lm.k);
    let pkk_ok = m.kernel.pn(k, k as isize) <= m.dist.p(k);
    let rbar_ok = m.weights.average(k).is_ok_and(|v| v >= 1.0);
    if !(pkk_ok || rbar_ok) {
        return Check::Skip;
    }
    let (pn_lo, p_lo) = (m.kernel.improve_prob(k), m.dist.blind_improve_prob(k));
    claim_leq(p_lo, pn_lo, || format!("k={k} pn<={pn_lo} < p<={p_lo}"))
}

fn strict(r: &mut SimRng) -> Check {
    let Some(lm) = gen_level_model(r, SameCost::AtMostP, true, false) else { return Check::Skip };
    if !theorem1_hypotheses(&lm) {
        return Check::Skip;
    }
    let (m, k) = (&lm.model, lm.k);
    let hyp = m.kernel.pn(k, k as isize) <= m.dist.p(k)
        && m.weights.weight(k, 1).is_some_and(|w| w > 1.0)
        && m.k_max() > m.dist.modal_cost();
    if !hyp {
        return Check::Skip;
    }
    let (pn_lo, p_lo) = (m.kernel.improve_prob(k), m.dist.blind_improve_prob(k));
    let detail = if pn_lo > p_lo { String::new() } else { format!("k={k} pn<={pn_lo} not > p<={p_lo}") };
    Check::Done { excess: rel_excess(p_lo, pn_lo), detail }
}

// ---------------------------------------------------------------- uniform-p properties

/// A full-NSF table, a level, and the table scaled so `r̄(k) ≥ 1`.
fn table_with_rbar_one(r: &mut SimRng) -> Option<(NsfWeightTable, usize)> {
    let t = gen_full_nsf_table(r);
    let k = r.random_range(1..=t.k_max());
    let rbar = t.average(k).ok()?;
    if rbar <= 0.0 {
        return None;
    }
    let s = if rbar >= 1.0 && r.random_bool(0.5) {
        1.0
    } else if r.random_bool(0.3) {
        1.0 / rbar
    } else {
        r.random_range(1.0..2.0) / rbar
    };
    let t = scaled(&t, s);
    (t.check_full_nsf(k) && t.average(k).ok()? >= 1.0).then_some((t, k))
}

fn uniform_p(r: &mut SimRng) -> f64 {
    10f64.powf(r.random_range(-5.0..-1.0))
}

fn lemma5(r: &mut SimRng) -> Check {
    let Some((t, k)) = table_with_rbar_one(r) else { return Check::Skip };
    let p = uniform_p(r);
    let Ok(prof) = steps_uniform(&t, p, k) else { return Check::Skip };
    let v = prof.at(k);
    claim_leq(v, 1.0 / p, || format!("k={k} steps_u={v} > 1/p={}", 1.0 / p))
}

fn steps_upper_bound(r: &mut SimRng) -> Check {
    let Some((t, k)) = table_with_rbar_one(r) else { return Check::Skip };
    let p = uniform_p(r);
    let pbr = p * sum((1..=k).map(|d| t.weight(k, d).unwrap_or(0.0)));
    if pbr <= 0.0 {
        return Check::Skip;
    }
    let v = k as f64 / pbr;
    claim_leq(v, 1.0 / p, || format!("k={k} k/pbr<={v} > 1/p={}", 1.0 / p))
}

fn fixed_count(r: &mut SimRng) -> Check {
    let t = gen_full_nsf_table(r);
    let n = t.k_max();
    if !t.check_full_nsf(n) {
        return Check::Skip;
    }
    let p = uniform_p(r);
    let Ok(prof) = steps_uniform(&t, p, n) else { return Check::Skip };
    merge((1..=n).map(|k| {
        let pbr = p * sum((1..=k).map(|d| t.weight(k, d).unwrap_or(0.0)));
        let bound = k as f64 / pbr;
        let v = prof.at(k);
        claim_leq(v, bound, || format!("k={k} steps_u={v} > k/pbr<={bound}"))
    }))
}

fn monotonicity(r: &mut SimRng) -> Check {
    let t = gen_full_nsf_table(r);
    let n = t.k_max();
    if !t.check_full_nsf(n) {
        return Check::Skip;
    }
    let p = uniform_p(r);
    let Ok(prof) = steps_uniform(&t, p, n) else { return Check::Skip };
    merge((1..=n).map(|k| {
        let (a, b) = (prof.at(k - 1), prof.at(k));
        claim_leq(a, b, || format!("steps_u({})={a} > steps_u({k})={b}", k - 1))
    }))
}

// ---------------------------------------------------------------- descent theorems

/// Full NSF from `k`, `r̄(k) ≥ 1`, `p(i) ≥ p(0)` for `i ≤ k`, normal rows up to `k`.
fn theorem2_hypotheses(lm: &LevelModel) -> bool {
    let (m, k) = (&lm.model, lm.k);
    let p0 = m.dist.p(0);
    p0 > 0.0
        && (0..=k).all(|i| m.dist.p(i) >= p0)
        && m.weights.average(k).is_ok_and(|v| v >= 1.0)
        && m.weights.check_full_nsf(k)
        && (1..=k).all(|j| m.check_normal(j).is_ok_and(|v| v.holds))
}

fn theorem2(r: &mut SimRng) -> Check {
    let Some(lm) = gen_full_nsf_model(r) else { return Check::Skip };
    if !theorem2_hypotheses(&lm) {
        return Check::Skip;
    }
    let (m, k) = (&lm.model, lm.k);
    let (Ok(prof), Ok(blind)) = (steps(m, k), blind_steps(&m.dist)) else { return Check::Skip };
    let v = prof.at(k);
    claim_leq(v, blind, || format!("k={k} steps={v} > blind={blind}"))
}

fn theorem3(r: &mut SimRng) -> Check {
    let Some(lm) = gen_full_nsf_model(r) else { return Check::Skip };
    if !theorem2_hypotheses(&lm) {
        return Check::Skip;
    }
    let (m, k) = (&lm.model, lm.k);
    let Ok(blind) = blind_steps(&m.dist) else { return Check::Skip };
    merge([SeedThreshold::Below, SeedThreshold::AtMost].map(|rule| {
        match blind_seeded_steps(m, k, rule) {
            Ok(v) => claim_leq(v, blind, || format!("k={k} {rule:?} blsteps={v} > blind={blind}")),
            Err(_) => Check::Skip,
        }
    }))
}
