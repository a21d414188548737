//! Degree-regular random CNF instances (2-SAT by default) and the
//! single-variable flip neighbourhood. Cost is the number of false clauses.

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;

use super::{EmpiricalError, Exhaustive, Landscape};
use crate::benchmarks::Sat2Spec;
use crate::rng;

/// Assignments of up to this many variables are enumerated exhaustively.
pub const SAT_ENUM_LIMIT: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Literal {
    pub var: u32,
    pub negated: bool,
}

impl Literal {
    #[inline]
    fn value(&self, bits: &[u64]) -> bool {
        let v = self.var as usize;
        ((bits[v / 64] >> (v % 64)) & 1 == 1) != self.negated
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sat2Instance {
    n_vars: usize,
    clauses: Vec<Vec<Literal>>,
    /// Clauses containing each variable.
    occ: Vec<Vec<u32>>,
    seed: u64,
}

const REPAIR_ROUNDS: usize = 50;

/// Configuration-model construction: `occurrences` stubs per variable are
/// shuffled and cut into clauses; clauses with a repeated variable, or the
/// same variable set as another clause, are repaired by random stub swaps.
/// Literal polarities are fair coin flips.
pub fn gen_sat2(spec: &Sat2Spec, seed: u64) -> Result<Sat2Instance, EmpiricalError> {
    spec.validate().map_err(|e| EmpiricalError::Invalid(e.to_string()))?;
    let mut r = rng::stream(seed, 0);
    let l = spec.clause_len;
    for _ in 0..REPAIR_ROUNDS {
        let mut stubs: Vec<u32> = (0..spec.n_vars as u32)
            .flat_map(|v| std::iter::repeat_n(v, spec.occurrences_per_var))
            .collect();
        stubs.shuffle(&mut r);
        if repair(&mut stubs, l, &mut r) {
            let clauses = stubs
                .chunks(l)
                .map(|c| c.iter().map(|&var| Literal { var, negated: r.random() }).collect())
                .collect();
            return Sat2Instance::new(spec.n_vars, clauses, seed);
        }
    }
    Err(EmpiricalError::ConstructionFailed { seed, rounds: REPAIR_ROUNDS })
}

fn clause_key(chunk: &[u32]) -> Option<Vec<u32>> {
    let mut k = chunk.to_vec();
    k.sort_unstable();
    if k.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some(k)
    }
}

/// Swaps stubs until every clause is valid and distinct; false if it gives up.
fn repair<R: Rng>(stubs: &mut [u32], l: usize, r: &mut R) -> bool {
    let m = stubs.len() / l;
    for _ in 0..200 * m {
        let mut seen = HashSet::with_capacity(m);
        let bad = (0..m).find(|&c| match clause_key(&stubs[c * l..(c + 1) * l]) {
            Some(k) => !seen.insert(k),
            None => true,
        });
        let Some(c) = bad else { return true };
        let a = c * l + r.random_range(0..l);
        let b = r.random_range(0..stubs.len());
        stubs.swap(a, b);
    }
    false
}

impl Sat2Instance {
    /// Wraps explicit clauses, checking variable indices and clause validity.
    pub fn new(n_vars: usize, clauses: Vec<Vec<Literal>>, seed: u64) -> Result<Self, EmpiricalError> {
        let mut occ = vec![Vec::new(); n_vars];
        for (ci, c) in clauses.iter().enumerate() {
            if c.is_empty() {
                return Err(EmpiricalError::Invalid(format!("clause {ci} is empty")));
            }
            let vars: Vec<u32> = c.iter().map(|l| l.var).collect();
            if clause_key(&vars).is_none() {
                return Err(EmpiricalError::Invalid(format!("clause {ci} repeats a variable")));
            }
            for lit in c {
                let v = lit.var as usize;
                if v >= n_vars {
                    return Err(EmpiricalError::Invalid(format!("variable {} out of range", v + 1)));
                }
                occ[v].push(ci as u32);
            }
        }
        Ok(Self { n_vars, clauses, occ, seed })
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn clauses(&self) -> &[Vec<Literal>] {
        &self.clauses
    }

    /// Number of clauses each variable occurs in.
    pub fn occurrences(&self, var: usize) -> usize {
        self.occ[var].len()
    }

    fn words(&self) -> usize {
        self.n_vars.div_ceil(64)
    }

    #[inline]
    fn clause_false(&self, ci: usize, bits: &[u64]) -> bool {
        !self.clauses[ci].iter().any(|l| l.value(bits))
    }

    /// Number of false clauses under the bit-packed assignment.
    pub fn unsat_count(&self, bits: &[u64]) -> u64 {
        (0..self.clauses.len()).filter(|&c| self.clause_false(c, bits)).count() as u64
    }

    /// DIMACS-style text: a `c seed` comment, the `p cnf` header and one
    /// zero-terminated clause per line (variables numbered from 1).
    pub fn to_dimacs(&self) -> String {
        let mut out = format!("c seed {}\np cnf {} {}\n", self.seed, self.n_vars, self.clauses.len());
        for c in &self.clauses {
            for l in c {
                let v = l.var as i64 + 1;
                out.push_str(&format!("{} ", if l.negated { -v } else { v }));
            }
            out.push_str("0\n");
        }
        out
    }

    pub fn parse_dimacs(text: &str) -> Result<Self, EmpiricalError> {
        let mut seed = 0;
        let mut header: Option<(usize, usize)> = None;
        let mut clauses = Vec::new();
        let mut current = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('c') {
                let mut it = rest.split_whitespace();
                if it.next() == Some("seed") {
                    if let Some(s) = it.next().and_then(|s| s.parse().ok()) {
                        seed = s;
                    }
                }
                continue;
            }
            if let Some(rest) = line.strip_prefix('p') {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 3 || f[0] != "cnf" {
                    return Err(EmpiricalError::Parse(format!("bad header '{line}'")));
                }
                let n = f[1].parse().map_err(|e| EmpiricalError::Parse(format!("vars: {e}")))?;
                let m = f[2].parse().map_err(|e| EmpiricalError::Parse(format!("clauses: {e}")))?;
                header = Some((n, m));
                continue;
            }
            for tok in line.split_whitespace() {
                let v: i64 = tok.parse().map_err(|e| EmpiricalError::Parse(format!("literal '{tok}': {e}")))?;
                if v == 0 {
                    clauses.push(std::mem::take(&mut current));
                } else {
                    current.push(Literal { var: (v.unsigned_abs() - 1) as u32, negated: v < 0 });
                }
            }
        }
        let (n, m) = header.ok_or_else(|| EmpiricalError::Parse("missing 'p cnf' header".into()))?;
        if !current.is_empty() {
            return Err(EmpiricalError::Parse("last clause not terminated by 0".into()));
        }
        if clauses.len() != m {
            return Err(EmpiricalError::Parse(format!("header says {m} clauses, found {}", clauses.len())));
        }
        Self::new(n, clauses, seed)
    }
}

impl Landscape for Sat2Instance {
    type Point = Vec<u64>;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<u64> {
        let mut bits: Vec<u64> = (0..self.words()).map(|_| rng.random()).collect();
        let tail = self.n_vars % 64;
        if tail != 0 {
            *bits.last_mut().expect("at least one word") &= (1u64 << tail) - 1;
        }
        bits
    }

    fn cost(&self, p: &Vec<u64>) -> u64 {
        self.unsat_count(p)
    }

    fn cost_bound(&self) -> u64 {
        self.clauses.len() as u64
    }

    fn neighbour_count(&self) -> usize {
        self.n_vars
    }

    fn neighbour_cost(&self, p: &Vec<u64>, cost: u64, idx: usize) -> u64 {
        let mut c = cost as i64;
        for &ci in &self.occ[idx] {
            let clause = &self.clauses[ci as usize];
            let before = !clause.iter().any(|l| l.value(p));
            let after = !clause.iter().any(|l| l.value(p) != (l.var as usize == idx));
            c += after as i64 - before as i64;
        }
        c as u64
    }

    fn apply_neighbour(&self, p: &mut Vec<u64>, idx: usize) {
        p[idx / 64] ^= 1 << (idx % 64);
    }
}

impl Exhaustive for Sat2Instance {
    fn space_size(&self) -> u128 {
        1u128 << self.n_vars.min(127)
    }

    fn enumerable(&self) -> bool {
        self.n_vars <= SAT_ENUM_LIMIT
    }

    fn partitions(&self) -> usize {
        1 << self.n_vars.min(4)
    }

    /// Partition `part` fixes the lowest `log2(partitions)` variables.
    fn visit_partition(&self, part: usize, f: &mut dyn FnMut(&Vec<u64>)) {
        let fixed = self.n_vars.min(4);
        let free = self.n_vars - fixed;
        let mut bits = vec![0u64; self.words()];
        for hi in 0..(1u64 << free) {
            bits[0] = (hi << fixed) | part as u64;
            f(&bits);
        }
    }
}
