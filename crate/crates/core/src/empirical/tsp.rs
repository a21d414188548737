//! Random symmetric TSP instances and the 2-opt neighbourhood.

use rand::Rng;

use super::{EmpiricalError, Exhaustive, Landscape};
use crate::rng;

/// A symmetric TSP with integer edge lengths in `1..=max_edge`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TspInstance {
    n: usize,
    max_edge: u32,
    seed: u64,
    dist: Vec<u32>,
    /// 2-opt moves as tour-position pairs `(i, j)`: reverse `tour[i+1..=j]`.
    moves: Vec<(u16, u16)>,
}

/// Canonical-tour enumeration is capped at ten cities (181440 tours).
pub const TSP_ENUM_LIMIT: usize = 10;

fn two_opt_moves(n: usize) -> Vec<(u16, u16)> {
    let mut moves = Vec::with_capacity(n * (n - 3) / 2);
    for i in 0..n - 2 {
        for j in i + 2..n {
            // Edges (t0,t1) and (t_{n-1},t0) share city t0.
            if i == 0 && j == n - 1 {
                continue;
            }
            moves.push((i as u16, j as u16));
        }
    }
    moves
}

/// Draws a random instance; entries are uniform on `1..=max_edge`.
pub fn gen_tsp(n: usize, max_edge: u32, seed: u64) -> Result<TspInstance, EmpiricalError> {
    if n < 4 {
        return Err(EmpiricalError::Invalid(format!("TSP needs at least 4 cities, got {n}")));
    }
    if max_edge < 1 {
        return Err(EmpiricalError::Invalid("max_edge must be at least 1".into()));
    }
    let mut r = rng::stream(seed, 0);
    let mut lower = Vec::with_capacity(n * (n - 1) / 2);
    for i in 1..n {
        for _ in 0..i {
            lower.push(r.random_range(1..=max_edge));
        }
    }
    TspInstance::from_lower(n, max_edge, seed, &lower)
}

impl TspInstance {
    /// Builds an instance from the row-major lower triangle `d(1,0), d(2,0), d(2,1), …`.
    pub fn from_lower(n: usize, max_edge: u32, seed: u64, lower: &[u32]) -> Result<Self, EmpiricalError> {
        if n < 4 {
            return Err(EmpiricalError::Invalid(format!("TSP needs at least 4 cities, got {n}")));
        }
        if lower.len() != n * (n - 1) / 2 {
            return Err(EmpiricalError::Invalid(format!(
                "{} lower-triangle entries for {n} cities",
                lower.len()
            )));
        }
        if let Some(&bad) = lower.iter().find(|&&d| d < 1 || d > max_edge) {
            return Err(EmpiricalError::Invalid(format!("edge length {bad} outside 1..={max_edge}")));
        }
        let mut dist = vec![0u32; n * n];
        let mut it = lower.iter();
        for i in 1..n {
            for j in 0..i {
                let d = *it.next().expect("length checked");
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        Ok(Self { n, max_edge, seed, dist, moves: two_opt_moves(n) })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_edge(&self) -> u32 {
        self.max_edge
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    #[inline]
    pub fn d(&self, a: usize, b: usize) -> u32 {
        self.dist[a * self.n + b]
    }

    /// Sum of successive distances including the closing edge.
    pub fn tour_cost(&self, tour: &[usize]) -> u64 {
        let n = tour.len();
        (0..n).map(|i| self.d(tour[i], tour[(i + 1) % n]) as u64).sum()
    }

    /// The 2-opt moves as position pairs; `n(n−3)/2` of them.
    pub fn moves(&self) -> &[(u16, u16)] {
        &self.moves
    }

    /// Cost change of reversing `tour[i+1..=j]`.
    #[inline]
    pub fn two_opt_delta(&self, tour: &[usize], i: usize, j: usize) -> i64 {
        let n = tour.len();
        let (a, b, c, d) = (tour[i], tour[i + 1], tour[j], tour[(j + 1) % n]);
        self.d(a, c) as i64 + self.d(b, d) as i64 - self.d(a, b) as i64 - self.d(c, d) as i64
    }

    /// Every tour one 2-opt move away from `tour`.
    pub fn two_opt_neighbors(&self, tour: &[usize]) -> Vec<Vec<usize>> {
        self.moves
            .iter()
            .map(|&(i, j)| {
                let mut t = tour.to_vec();
                t[i as usize + 1..=j as usize].reverse();
                t
            })
            .collect()
    }

    /// Plain-text form: header `n max_edge seed`, then row `i` of the lower
    /// triangle (`d(i,0) … d(i,i−1)`) on each following line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {}\n", self.n, self.max_edge, self.seed);
        for i in 1..self.n {
            let row: Vec<String> = (0..i).map(|j| self.d(i, j).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, EmpiricalError> {
        let mut tokens = text.split_whitespace();
        let mut next = |what: &str| {
            tokens
                .next()
                .ok_or_else(|| EmpiricalError::Parse(format!("missing {what}")))
        };
        let n: usize = next("n")?.parse().map_err(|e| EmpiricalError::Parse(format!("n: {e}")))?;
        let max_edge: u32 = next("max_edge")?.parse().map_err(|e| EmpiricalError::Parse(format!("max_edge: {e}")))?;
        let seed: u64 = next("seed")?.parse().map_err(|e| EmpiricalError::Parse(format!("seed: {e}")))?;
        let count = n.saturating_sub(1) * n / 2;
        let mut lower = Vec::with_capacity(count);
        for k in 0..count {
            let tok = next("distance")?;
            lower.push(tok.parse().map_err(|e| EmpiricalError::Parse(format!("entry {k}: {e}")))?);
        }
        if tokens.next().is_some() {
            return Err(EmpiricalError::Parse("trailing data after matrix".into()));
        }
        Self::from_lower(n, max_edge, seed, &lower)
    }
}

impl Landscape for TspInstance {
    type Point = Vec<usize>;

    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<usize> {
        let mut t: Vec<usize> = (0..self.n).collect();
        // Fisher–Yates on positions 1.. keeps city 0 first.
        for i in (2..self.n).rev() {
            let j = rng.random_range(1..=i);
            t.swap(i, j);
        }
        t
    }

    fn cost(&self, p: &Vec<usize>) -> u64 {
        self.tour_cost(p)
    }

    fn cost_bound(&self) -> u64 {
        self.n as u64 * self.max_edge as u64
    }

    fn neighbour_count(&self) -> usize {
        self.moves.len()
    }

    #[inline]
    fn neighbour_cost(&self, p: &Vec<usize>, cost: u64, idx: usize) -> u64 {
        let (i, j) = self.moves[idx];
        (cost as i64 + self.two_opt_delta(p, i as usize, j as usize)) as u64
    }

    fn apply_neighbour(&self, p: &mut Vec<usize>, idx: usize) {
        let (i, j) = self.moves[idx];
        p[i as usize + 1..=j as usize].reverse();
    }
}

impl Exhaustive for TspInstance {
    fn space_size(&self) -> u128 {
        (1..self.n as u128).product::<u128>() / 2
    }

    fn enumerable(&self) -> bool {
        self.n <= TSP_ENUM_LIMIT
    }

    fn partitions(&self) -> usize {
        self.n - 1
    }

    /// Partition `part` holds the tours whose second city is `part + 1`.
    /// A tour is canonical when city 0 comes first and its second city is
    /// smaller than its last, so each undirected cycle appears once.
    fn visit_partition(&self, part: usize, f: &mut dyn FnMut(&Vec<usize>)) {
        let n = self.n;
        let second = part + 1;
        let mut tour = Vec::with_capacity(n);
        tour.push(0);
        tour.push(second);
        tour.extend((1..n).filter(|&c| c != second));
        // Heap's algorithm over positions 2..n.
        let m = n - 2;
        let mut c = vec![0usize; m];
        if tour[1] < tour[n - 1] {
            f(&tour);
        }
        let mut i = 1;
        while i < m {
            if c[i] < i {
                if i % 2 == 0 {
                    tour.swap(2, 2 + i);
                } else {
                    tour.swap(2 + c[i], 2 + i);
                }
                if tour[1] < tour[n - 1] {
                    f(&tour);
                }
                c[i] += 1;
                i = 1;
            } else {
                c[i] = 0;
                i += 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn generation_is_deterministic_and_valid() {
        let a = gen_tsp(10, 20, 42).unwrap();
        let b = gen_tsp(10, 20, 42).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, gen_tsp(10, 20, 43).unwrap());
        for i in 0..10 {
            assert_eq!(a.d(i, i), 0);
            for j in 0..10 {
                assert_eq!(a.d(i, j), a.d(j, i));
                if i != j {
                    assert!((1..=20).contains(&a.d(i, j)));
                }
            }
        }
        assert!(gen_tsp(3, 20, 1).is_err());
        assert!(gen_tsp(5, 0, 1).is_err());
    }

    #[test]
    fn neighbour_counts() {
        for n in [4, 5, 10, 100] {
            let t = gen_tsp(n, 50, 1).unwrap();
            assert_eq!(t.moves().len(), n * (n - 3) / 2);
        }
    }

    #[test]
    fn neighbours_are_distinct_cycles() {
        let t = gen_tsp(8, 20, 3).unwrap();
        let tour: Vec<usize> = (0..8).collect();
        let canon = |v: &Vec<usize>| {
            let p = v.iter().position(|&c| c == 0).unwrap();
            let mut r: Vec<usize> = v[p..].iter().chain(v[..p].iter()).copied().collect();
            if r[1] > r[7] {
                r[1..].reverse();
            }
            r
        };
        let nb: HashSet<Vec<usize>> = t.two_opt_neighbors(&tour).iter().map(canon).collect();
        assert_eq!(nb.len(), 8 * 5 / 2);
        assert!(!nb.contains(&canon(&tour)));
    }

    #[test]
    fn delta_matches_full_evaluation() {
        let t = gen_tsp(12, 30, 9).unwrap();
        let mut r = rng::stream(1, 1);
        for _ in 0..50 {
            let tour = t.random_point(&mut r);
            let c = t.tour_cost(&tour);
            for (idx, nb) in t.two_opt_neighbors(&tour).iter().enumerate() {
                assert_eq!(t.neighbour_cost(&tour, c, idx), t.tour_cost(nb));
            }
        }
    }

    #[test]
    fn canonical_enumeration_counts() {
        let t = gen_tsp(7, 10, 5).unwrap();
        let mut seen = HashSet::new();
        for part in 0..t.partitions() {
            t.visit_partition(part, &mut |tour| {
                assert_eq!(tour[0], 0);
                assert!(seen.insert(tour.clone()));
            });
        }
        assert_eq!(seen.len() as u128, t.space_size());
        assert_eq!(seen.len(), 360);
    }

    #[test]
    fn text_round_trip() {
        let t = gen_tsp(6, 9, 11).unwrap();
        let back = TspInstance::parse(&t.to_text()).unwrap();
        assert_eq!(back, t);
        assert!(TspInstance::parse("4 5 1\n1\n2 3\n").is_err());
        assert!(TspInstance::parse("4 5 1\n1\n2 3\n4 9 1\n").is_err());
    }
}
