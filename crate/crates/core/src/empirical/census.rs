//! Exhaustive and sampled landscape censuses.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{EmpiricalError, Exhaustive, Landscape};
use crate::model::{midpoint_good_enough, FitnessDistribution, ModelError};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleMode {
    Exhaustive,
    Sampled,
}

/// The cost level whose neighbourhoods a sampled census surveys.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Target {
    /// Halfway between the sampled minimum and the sampled mode.
    Midpoint,
    /// An explicit raw cost.
    Cost(u64),
}

/// Histograms over raw costs, merged by summation.
struct RawCounts {
    p: Vec<u64>,
    pn: Vec<Option<Vec<u64>>>,
    evaluations: u64,
}

impl RawCounts {
    fn new(bound: u64) -> Self {
        let n = bound as usize + 1;
        Self { p: vec![0; n], pn: vec![None; n], evaluations: 0 }
    }

    fn survey<L: Landscape>(&mut self, land: &L, pt: &L::Point, cost: u64) {
        let n = self.p.len();
        let row = self.pn[cost as usize].get_or_insert_with(|| vec![0; n]);
        for idx in 0..land.neighbour_count() {
            row[land.neighbour_cost(pt, cost, idx) as usize] += 1;
        }
        self.evaluations += land.neighbour_count() as u64;
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.p.iter_mut().zip(&other.p) {
            *a += b;
        }
        for (a, b) in self.pn.iter_mut().zip(other.pn) {
            match (a.as_mut(), b) {
                (Some(x), Some(y)) => x.iter_mut().zip(&y).for_each(|(u, v)| *u += v),
                (None, Some(y)) => *a = Some(y),
                _ => {}
            }
        }
        self.evaluations += other.evaluations;
        self
    }
}

/// Estimated `p̂` and `p̂n` for a class of instances. Costs are stored as
/// levels relative to `offset`, the lowest cost observed anywhere in the
/// census (a surveyed point or one of its neighbours).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CensusReport {
    pub mode: SampleMode,
    pub instances: usize,
    pub offset: u64,
    /// Points per level.
    pub p_counts: Vec<u64>,
    /// Neighbour counts per level for each surveyed level.
    pub pn_counts: BTreeMap<usize, Vec<u64>>,
    pub points: u64,
    /// Cost evaluations performed, neighbours included.
    pub evaluations: u64,
    /// Raw cost whose neighbourhood was surveyed (sampled mode only).
    pub target: Option<u64>,
}

impl CensusReport {
    fn from_raw(raw: RawCounts, mode: SampleMode, instances: usize, target: Option<u64>) -> Self {
        let used = |i: usize| raw.p[i] > 0 || raw.pn.iter().flatten().any(|r| r[i] > 0);
        let lo = (0..raw.p.len()).find(|&i| used(i)).unwrap_or(0);
        let hi = (0..raw.p.len()).rev().find(|&i| used(i)).unwrap_or(lo);
        let p_counts = raw.p[lo..=hi].to_vec();
        let pn_counts = raw
            .pn
            .iter()
            .enumerate()
            .filter_map(|(c, r)| r.as_ref().map(|r| (c - lo, r[lo..=hi].to_vec())))
            .collect();
        Self {
            mode,
            instances,
            offset: lo as u64,
            points: p_counts.iter().sum(),
            p_counts,
            pn_counts,
            evaluations: raw.evaluations,
            target,
        }
    }

    pub fn k_max(&self) -> usize {
        self.p_counts.len() - 1
    }

    pub fn raw(&self, level: usize) -> u64 {
        self.offset + level as u64
    }

    pub fn level(&self, raw: u64) -> Option<usize> {
        raw.checked_sub(self.offset).map(|l| l as usize).filter(|&l| l <= self.k_max())
    }

    /// `p̂(level)`.
    pub fn p(&self, level: usize) -> f64 {
        self.p_counts.get(level).map_or(0.0, |&c| c as f64 / self.points as f64)
    }

    pub fn p_hat(&self) -> Result<FitnessDistribution, ModelError> {
        FitnessDistribution::from_masses(&self.p_counts.iter().map(|&c| c as f64).collect::<Vec<_>>())
    }

    /// `p̂n(k, j)` for a surveyed level `k`.
    pub fn pn(&self, k: usize, j: isize) -> Option<f64> {
        let row = self.pn_counts.get(&k)?;
        let total: u64 = row.iter().sum();
        if j < 0 || total == 0 {
            return Some(0.0);
        }
        Some(row.get(j as usize).map_or(0.0, |&c| c as f64 / total as f64))
    }

    /// Lowest level holding a surveyed point.
    pub fn optimum_level(&self) -> usize {
        self.p_counts.iter().position(|&c| c > 0).unwrap_or(0)
    }

    /// Most populated level; ties go to the larger level.
    pub fn modal_level(&self) -> usize {
        let max = self.p_counts.iter().copied().max().unwrap_or(0);
        self.p_counts.iter().rposition(|&c| c == max).unwrap_or(0)
    }

    /// Good-enough level halfway between optimum and mode.
    pub fn ge_level(&self) -> usize {
        midpoint_good_enough(self.optimum_level() as u64, self.modal_level() as u64) as usize
    }

    /// Levels `k` in `(optimum, mode]` where `p̂(k−1) > p̂(k)`, i.e. where the
    /// histogram fails to fall toward the optimum.
    pub fn inversions(&self) -> Vec<usize> {
        (self.optimum_level() + 1..=self.modal_level())
            .filter(|&k| self.p_counts[k - 1] > self.p_counts[k])
            .collect()
    }

    /// Per-level table: raw cost, count, `p̂`, and where surveyed the
    /// blind and neighbourhood improvement probabilities.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("cost,count,p_hat,p_improve,pn_improve\n");
        let mut below = 0.0;
        for k in 0..=self.k_max() {
            let pn = self.pn_counts.get(&k).map(|_| {
                (0..k).map(|j| self.pn(k, j as isize).unwrap_or(0.0)).sum::<f64>()
            });
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                self.raw(k),
                self.p_counts[k],
                self.p(k),
                below,
                pn.map_or(String::new(), |v| v.to_string())
            );
            below += self.p(k);
        }
        out
    }

    /// `cost p̂(cost)` for levels with points.
    pub fn p_dat(&self) -> String {
        crate::analysis::to_dat(
            (0..=self.k_max())
                .filter(|&k| self.p_counts[k] > 0)
                .map(|k| (self.raw(k) as f64, self.p(k))),
        )
    }

    /// `cost p̂n^<(cost)` for surveyed levels.
    pub fn nbr_improve_dat(&self) -> String {
        crate::analysis::to_dat(self.pn_counts.keys().map(|&k| {
            let v: f64 = (0..k).map(|j| self.pn(k, j as isize).unwrap_or(0.0)).sum();
            (self.raw(k) as f64, v)
        }))
    }
}

/// Pools the full landscapes of `instances`: every point is visited and
/// every neighbour of every point evaluated.
pub fn census_exhaustive<L: Exhaustive>(instances: &[L]) -> Result<CensusReport, EmpiricalError> {
    if instances.is_empty() {
        return Err(EmpiricalError::Invalid("no instances".into()));
    }
    if let Some(big) = instances.iter().find(|i| !i.enumerable()) {
        return Err(EmpiricalError::TooLarge { size: big.space_size() });
    }
    let bound = instances.iter().map(|i| i.cost_bound()).max().unwrap_or(0);
    let jobs: Vec<(usize, usize)> = instances
        .iter()
        .enumerate()
        .flat_map(|(i, inst)| (0..inst.partitions()).map(move |p| (i, p)))
        .collect();
    let raw = jobs
        .par_iter()
        .fold(
            || RawCounts::new(bound),
            |mut acc, &(i, part)| {
                let inst = &instances[i];
                inst.visit_partition(part, &mut |pt| {
                    let c = inst.cost(pt);
                    acc.p[c as usize] += 1;
                    acc.evaluations += 1;
                    acc.survey(inst, pt, c);
                });
                acc
            },
        )
        .reduce(|| RawCounts::new(bound), RawCounts::merge);
    Ok(CensusReport::from_raw(raw, SampleMode::Exhaustive, instances.len(), None))
}

fn share(n: u64, parts: usize, i: usize) -> u64 {
    n / parts as u64 + u64::from((i as u64) < n % parts as u64)
}

/// Two-pass sampled census. Pass one draws `n_samples` uniform points
/// (split evenly over the instances) for `p̂`; pass two draws a fresh
/// `n_samples` and surveys the full neighbourhood of each point that lands
/// on the target cost. Instance `i` uses streams `2i` and `2i+1` of `seed`.
pub fn census_sampled<L: Landscape>(
    instances: &[L],
    n_samples: u64,
    target: Target,
    seed: u64,
) -> Result<CensusReport, EmpiricalError> {
    if instances.is_empty() || n_samples == 0 {
        return Err(EmpiricalError::Invalid("need at least one instance and one sample".into()));
    }
    let bound = instances.iter().map(|i| i.cost_bound()).max().unwrap_or(0);
    let m = instances.len();
    let first = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, 2 * i as u64);
            let mut acc = RawCounts::new(bound);
            for _ in 0..share(n_samples, m, i) {
                let pt = instances[i].random_point(&mut r);
                acc.p[instances[i].cost(&pt) as usize] += 1;
            }
            acc.evaluations = share(n_samples, m, i);
            acc
        })
        .reduce(|| RawCounts::new(bound), RawCounts::merge);
    let target_raw = match target {
        Target::Cost(c) => c,
        Target::Midpoint => {
            let lo = first.p.iter().position(|&c| c > 0).unwrap_or(0) as u64;
            let max = first.p.iter().copied().max().unwrap_or(0);
            let mode = first.p.iter().rposition(|&c| c == max).unwrap_or(0) as u64;
            midpoint_good_enough(lo, mode)
        }
    };
    if target_raw > bound {
        return Err(EmpiricalError::NoPointsAtTarget { target: target_raw });
    }
    let second = (0..m)
        .into_par_iter()
        .map(|i| {
            let mut r = rng::stream(seed, 2 * i as u64 + 1);
            let mut acc = RawCounts::new(bound);
            let inst = &instances[i];
            for _ in 0..share(n_samples, m, i) {
                let pt = inst.random_point(&mut r);
                if inst.cost(&pt) == target_raw {
                    acc.survey(inst, &pt, target_raw);
                }
            }
            acc.evaluations += share(n_samples, m, i);
            acc
        })
        .reduce(|| RawCounts::new(bound), RawCounts::merge);
    if second.pn[target_raw as usize].is_none() {
        return Err(EmpiricalError::NoPointsAtTarget { target: target_raw });
    }
    let raw = RawCounts { p: first.p, pn: second.pn, evaluations: first.evaluations + second.evaluations };
    Ok(CensusReport::from_raw(raw, SampleMode::Sampled, m, Some(target_raw)))
}

/// Cost changes of one random flip (neighbour) from uniformly sampled
/// points lying at a given cost.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FlipExperiment {
    pub level: u64,
    pub samples: u64,
    /// Uniform draws made to find those points.
    pub draws: u64,
    /// Counts per cost change.
    pub counts: BTreeMap<i64, u64>,
}

impl FlipExperiment {
    pub fn freq(&self, delta: i64) -> f64 {
        self.counts.get(&delta).copied().unwrap_or(0) as f64 / self.samples as f64
    }

    /// Wilson score interval for the probability of change `delta` at the
    /// two-sided normal quantile `z` (2.5758 for 99%).
    pub fn wilson(&self, delta: i64, z: f64) -> (f64, f64) {
        let n = self.samples as f64;
        let p = self.freq(delta);
        let denom = 1.0 + z * z / n;
        let centre = (p + z * z / (2.0 * n)) / denom;
        let half = z * (p * (1.0 - p) / n + z * z / (4.0 * n * n)).sqrt() / denom;
        (centre - half, centre + half)
    }
}

/// Rejection-samples `n_samples` points at cost `level` (split over the
/// instances, stream `i` for instance `i`) and applies one uniformly random
/// neighbour move to each.
pub fn flip_experiment<L: Landscape>(
    instances: &[L],
    level: u64,
    n_samples: u64,
    seed: u64,
) -> Result<FlipExperiment, EmpiricalError> {
    if instances.is_empty() || n_samples == 0 {
        return Err(EmpiricalError::Invalid("need at least one instance and one sample".into()));
    }
    let m = instances.len();
    let parts: Vec<(u64, u64, BTreeMap<i64, u64>)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let inst = &instances[i];
            let want = share(n_samples, m, i);
            let cap = want.saturating_mul(100_000).max(1_000_000);
            let mut r = rng::stream(seed, i as u64);
            let (mut got, mut draws, mut counts) = (0u64, 0u64, BTreeMap::new());
            while got < want && draws < cap {
                draws += 1;
                let pt = inst.random_point(&mut r);
                if inst.cost(&pt) != level {
                    continue;
                }
                let idx = r.random_range(0..inst.neighbour_count());
                let delta = inst.neighbour_cost(&pt, level, idx) as i64 - level as i64;
                *counts.entry(delta).or_insert(0) += 1;
                got += 1;
            }
            (got, draws, counts)
        })
        .collect();
    let mut exp = FlipExperiment { level, samples: 0, draws: 0, counts: BTreeMap::new() };
    for (got, draws, counts) in parts {
        exp.samples += got;
        exp.draws += draws;
        for (d, c) in counts {
            *exp.counts.entry(d).or_insert(0) += c;
        }
    }
    if exp.samples == 0 {
        return Err(EmpiricalError::NoPointsAtTarget { target: level });
    }
    Ok(exp)
}
