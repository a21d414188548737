//! Monte-Carlo search against the analytic expectations.

use nsf_core::analysis::{blind_seeded_steps, blind_steps, steps, SeedThreshold};
use nsf_core::benchmarks::{build_counts_class, CountsClassSpec, TABLE6_COUNTS};
use nsf_core::model::ClassModel;
use nsf_core::simulate::{aggregate, run_blind, run_descent, run_many, run_seeded, AbstractSpace, AcceptRule, Start};

const RUNS: usize = 4000;
const CAP: u64 = u64::MAX;

fn counts_fixtures() -> Vec<CountsClassSpec> {
    let mut v: Vec<CountsClassSpec> = [[1.0, 1.0, 1.0, 1.0], [2.0, 1.0, 1.0, 1.0], [3.0, 2.0, 1.0, 0.7], [3.0, 2.5, 1.5, 0.5]]
        .iter()
        .map(|w| CountsClassSpec::new(TABLE6_COUNTS.to_vec(), 100, w.to_vec()))
        .collect();
    v.push(CountsClassSpec::new(vec![1, 10, 10, 10, 20, 20, 10, 10, 1], 100, vec![1.1, 1.0, 1.0, 0.8]));
    v.push(CountsClassSpec::new(vec![1, 1, 10, 10, 10, 10, 10, 10, 1], 70, vec![1.4, 1.0, 1.0, 0.5]));
    v.push(CountsClassSpec::new(vec![1, 10, 10, 10, 1], 35, vec![1.1, 0.8]));
    v
}

#[test]
fn descent_means_converge_to_steps_on_counts_fixtures() {
    for (i, spec) in counts_fixtures().iter().enumerate() {
        let c = build_counts_class(spec).unwrap();
        let k = c.eval_level;
        let expected = steps(&c.model, k).unwrap().at(k);
        let space = AbstractSpace::new(&c.model).unwrap();
        let traces =
            run_many(RUNS, 100 + i as u64, |s| run_descent(&space, Start::Level(k as u64), AcceptRule::Strict, 0, s, CAP))
                .unwrap();
        let agg = aggregate(&traces).unwrap();
        assert!(agg.within(expected, 3.0), "fixture {i}: mean {} ± {} vs {expected}", agg.mean, agg.std_err);
        assert_eq!(agg.success, 1.0);
    }
}

#[test]
fn blind_mean_converges_to_inverse_optimum_probability() {
    let c = build_counts_class(&CountsClassSpec::new(TABLE6_COUNTS.to_vec(), 100, vec![1.0; 4])).unwrap();
    let space = AbstractSpace::new(&c.model).unwrap();
    let traces = run_many(RUNS, 7, |s| run_blind(&space, 0, s, CAP)).unwrap();
    let agg = aggregate(&traces).unwrap();
    let expected = blind_steps(&c.model.dist).unwrap();
    assert_eq!(expected, 100.0);
    assert!(agg.within(expected, 3.0), "mean {} ± {}", agg.mean, agg.std_err);
}

/// Under the hypotheses of the descent theorem, neither descent nor seeded
/// descent is slower than blind search beyond sampling noise (one-sided, 1%).
#[test]
fn descent_does_not_lose_to_blind_under_the_hypotheses() {
    const Z_ONE_SIDED_99: f64 = 2.326;
    let c = build_counts_class(&CountsClassSpec::new(TABLE6_COUNTS.to_vec(), 100, vec![3.0, 2.5, 1.5, 0.5])).unwrap();
    let m: &ClassModel = &c.model;
    let k = c.eval_level;
    assert!(m.weights.check_full_nsf(k));
    assert!(m.weights.average(k).unwrap() >= 1.0);
    let space = AbstractSpace::new(m).unwrap();
    let blind = aggregate(&run_many(RUNS, 11, |s| run_blind(&space, 0, s, CAP)).unwrap()).unwrap();
    let descent = aggregate(
        &run_many(RUNS, 12, |s| run_descent(&space, Start::Level(k as u64), AcceptRule::Strict, 0, s, CAP)).unwrap(),
    )
    .unwrap();
    let seeded = aggregate(
        &run_many(RUNS, 13, |s| run_seeded(&space, k as u64, SeedThreshold::AtMost, AcceptRule::Strict, 0, s, CAP))
            .unwrap(),
    )
    .unwrap();
    for (name, a) in [("descent", &descent), ("seeded", &seeded)] {
        let se = (a.std_err.powi(2) + blind.std_err.powi(2)).sqrt();
        assert!(a.mean - blind.mean <= Z_ONE_SIDED_99 * se, "{name} mean {} vs blind {}", a.mean, blind.mean);
    }
    let expected = blind_seeded_steps(m, k, SeedThreshold::AtMost).unwrap();
    assert!(seeded.within(expected, 3.0), "seeded mean {} vs {expected}", seeded.mean);
}
