//! Small numeric helpers shared by every module: tolerances and
//! compensated summation.

/// Tolerance used when checking that probability vectors sum to one.
pub const NORM_TOL: f64 = 1e-9;

/// Slack allowed in inequality checks (`a >= b` passes when `a >= b - SLACK`).
pub const SLACK: f64 = 1e-12;

/// Neumaier-compensated sum.
///
/// The exponential benchmark mixes probabilities spanning sixty orders of
/// magnitude, so naive left-to-right accumulation loses the small terms.
pub fn sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut total = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = total + v;
        if total.abs() >= v.abs() {
            comp += (total - t) + v;
        } else {
            comp += (v - t) + total;
        }
        total = t;
    }
    total + comp
}

/// `a >= b` with the shared inequality slack, scaled for large magnitudes.
pub fn geq(a: f64, b: f64) -> bool {
    a >= b - SLACK * (1.0 + b.abs())
}

/// `a <= b` with the shared inequality slack.
pub fn leq(a: f64, b: f64) -> bool {
    geq(b, a)
}

/// Relative comparison `a <= b * (1 + rel)`, used by the property suites.
pub fn leq_rel(a: f64, b: f64, rel: f64) -> bool {
    a <= b + rel * b.abs().max(a.abs()) + f64::MIN_POSITIVE
}

/// Natural log of the binomial coefficient C(n, k).
pub fn ln_choose(n: u64, k: u64) -> f64 {
    if k > n {
        return f64::NEG_INFINITY;
    }
    let k = k.min(n - k);
    // Direct sum of logs is exact enough for n in the hundreds.
    (0..k).map(|i| ((n - i) as f64).ln() - ((i + 1) as f64).ln()).sum()
}
