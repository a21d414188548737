//! Published benchmark values, for discrepancy reports.
//!
//! Values are as printed (two or three significant figures), so a relative
//! difference of about 1% is rounding.

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    /// `p^<(k)`.
    BlindImprove,
    /// `pn^<(k)` at bound `b`.
    NbrImprove,
    /// `e_imp(k)`.
    BlindOneStep,
    /// `en_imp(k)` at bound `b`.
    NbrOneStep,
    /// `steps(k)` at bound `b`.
    Steps,
    /// `blsteps(k)` at bound `b`.
    Seeded,
    /// `blind = 1/p(0)` as printed beside a table.
    Blind,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cell {
    pub table: u8,
    pub class: &'static str,
    pub quantity: Quantity,
    pub k: Option<usize>,
    pub b: Option<usize>,
    pub value: f64,
}

const BOUNDS: [usize; 5] = [1, 5, 10, 50, 200];

fn row_b(out: &mut Vec<Cell>, table: u8, class: &'static str, q: Quantity, k: usize, vals: [f64; 5]) {
    for (b, v) in BOUNDS.into_iter().zip(vals) {
        out.push(Cell { table, class, quantity: q, k: Some(k), b: Some(b), value: v });
    }
}

fn row_k(out: &mut Vec<Cell>, table: u8, class: &'static str, q: Quantity, b: Option<usize>, ks: &[usize], vals: &[f64]) {
    for (&k, &v) in ks.iter().zip(vals) {
        out.push(Cell { table, class, quantity: q, k: Some(k), b, value: v });
    }
}

fn blind(out: &mut Vec<Cell>, table: u8, class: &'static str, v: f64) {
    out.push(Cell { table, class, quantity: Quantity::Blind, k: None, b: None, value: v });
}

pub fn cells() -> Vec<Cell> {
    use Quantity::*;
    let mut c = Vec::new();
    // Improvement probabilities at k = 50.
    for (class, blind_v, row) in [
        ("uniform", 0.25, [0.33, 0.45, 0.48, 0.49, 0.25]),
        ("linear", 0.16, [0.33, 0.44, 0.45, 0.33, 0.16]),
        ("exponential", 0.06, [0.34, 0.43, 0.37, 0.12, 0.06]),
    ] {
        c.push(Cell { table: 3, class, quantity: BlindImprove, k: Some(50), b: None, value: blind_v });
        row_b(&mut c, 3, class, NbrImprove, 50, row);
    }
    // One-step expected improvement at k = 30.
    c.push(Cell { table: 4, class: "uniform", quantity: BlindOneStep, k: Some(30), b: None, value: 2.32 });
    row_b(&mut c, 4, "uniform", NbrOneStep, 30, [0.33, 1.36, 2.61, 5.81, 2.32]);
    // Descent steps from several starting costs, b = 5.
    let k8 = [50, 30, 10, 2];
    for (class, bl, vals) in [
        ("uniform", 200.0, [41.9, 27.3, 12.5, 7.5]),
        ("linear", 10000.0, [70.7, 54.7, 36.6, 25.5]),
        ("steep-linear", 50000.0, [158.0, 142.0, 123.0, 112.0]),
        ("exponential", 1.6e60, [5.9e10, 5.9e10, 5.9e10, 4.3e10]),
    ] {
        blind(&mut c, 8, class, bl);
        row_k(&mut c, 8, class, Steps, Some(5), &k8, &vals);
    }
    // steps(50) against the bound.
    for (class, bl, vals) in [
        ("uniform", 200.0, [150.0, 41.9, 29.9, 55.5, 200.0]),
        ("linear", 10000.0, [164.0, 70.7, 36.6, 1400.0, 10000.0]),
        ("steep-linear", 50000.0, [176.0, 158.0, 373.0, 6728.0, 50000.0]),
        ("exponential", 1.6e60, [39140.0, 5.9e10, 2.5e17, 1.4e48, 1.6e60]),
    ] {
        blind(&mut c, 9, class, bl);
        row_b(&mut c, 9, class, Steps, 50, vals);
    }
    // One-step improvement by starting cost, b = 5.
    let k10 = [50, 30, 20, 10, 2];
    row_k(&mut c, 10, "uniform", BlindOneStep, None, &k10, &[6.37, 2.32, 1.05, 0.275, 0.015]);
    row_k(&mut c, 10, "uniform", NbrOneStep, Some(5), &k10, &[1.36, 1.36, 1.36, 1.36, 0.27]);
    // Blind-seeded descent, b = 5.
    let k11 = [50, 30, 20, 10, 5];
    for (class, bl, vals) in [
        ("uniform", 200.0, [27.4, 22.6, 21.9, 26.8, 39.8]),
        ("linear", 10100.0, [65.2, 67.7, 87.7, 213.0, 657.0]),
        ("steep-linear", 50500.0, [152.0, 155.0, 175.0, 302.0, 778.0]),
        ("exponential", 1.5e60, [6.9e12, 1.8e25, 7.6e33, 1.2e45, 2.3e52]),
    ] {
        blind(&mut c, 11, class, bl);
        row_k(&mut c, 11, class, Seeded, Some(5), &k11, &vals);
    }
    c
}

/// Published cells matching a computed quantity.
pub fn lookup(class: &str, quantity: Quantity, k: Option<usize>, b: Option<usize>) -> Vec<Cell> {
    cells()
        .into_iter()
        .filter(|c| c.class == class && c.quantity == quantity && c.k == k && c.b == b)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shared_cells_agree_across_tables() {
        let a = lookup("uniform", Quantity::Steps, Some(50), Some(5));
        assert_eq!(a.len(), 2);
        assert!(a.iter().all(|c| c.value == 41.9));
        assert_eq!(lookup("uniform", Quantity::Blind, None, None).len(), 3);
    }
}
