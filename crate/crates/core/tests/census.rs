//! Censuses checked against direct enumeration of every tour.

use nsf_core::empirical::{census_exhaustive, gen_tsp, TspInstance};

/// Every permutation of `1..n` after city 0 (both orientations included).
fn all_tours(n: usize) -> Vec<Vec<usize>> {
    fn extend(prefix: &mut Vec<usize>, rest: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if rest.is_empty() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..rest.len() {
            let c = rest.remove(i);
            prefix.push(c);
            extend(prefix, rest, out);
            prefix.pop();
            rest.insert(i, c);
        }
    }
    let mut out = Vec::new();
    extend(&mut vec![0], &mut (1..n).collect(), &mut out);
    out
}

/// Cost histogram and 2-opt neighbour histograms by brute force; each
/// undirected tour appears twice, which halves out of every ratio.
fn brute_force(insts: &[TspInstance]) -> (Vec<u64>, Vec<Vec<u64>>) {
    let top = insts.iter().map(|t| t.n() as u64 * t.max_edge() as u64).max().unwrap() as usize;
    let mut p = vec![0u64; top + 1];
    let mut pn = vec![vec![0u64; top + 1]; top + 1];
    for t in insts {
        for tour in all_tours(t.n()) {
            let c = t.tour_cost(&tour) as usize;
            p[c] += 1;
            for nb in t.two_opt_neighbors(&tour) {
                pn[c][t.tour_cost(&nb) as usize] += 1;
            }
        }
    }
    (p, pn)
}

#[test]
fn exhaustive_census_matches_brute_force() {
    let insts: Vec<TspInstance> = (0..3).map(|i| gen_tsp(7, 9, 40 + i).unwrap()).collect();
    let r = census_exhaustive(&insts).unwrap();
    let (p, pn) = brute_force(&insts);
    assert_eq!(r.points, 3 * 360);
    let total: u64 = p.iter().sum();
    assert_eq!(total, 2 * r.points);
    for level in 0..=r.k_max() {
        let raw = r.raw(level) as usize;
        assert!((r.p(level) - p[raw] as f64 / total as f64).abs() < 1e-12, "p at cost {raw}");
        let row_total: u64 = pn[raw].iter().sum();
        for j in 0..=r.k_max() {
            let got = r.pn(level, j as isize);
            if row_total == 0 {
                assert!(got.is_none());
                continue;
            }
            let want = pn[raw][r.raw(j) as usize] as f64 / row_total as f64;
            assert!((got.unwrap() - want).abs() < 1e-12, "pn({raw}, {})", r.raw(j));
        }
    }
}
