//! Named problem classes: the synthetic benchmarks (uniform, linear,
//! steep linear, exponential), counts-based classes, the analytic 2-SAT
//! class and the four counter-example fixtures.

pub(crate) mod counts;
mod fixtures;
mod sat2;

pub use counts::{build_counts_class, row_leftovers, CountsClass, CountsClassSpec, TABLE5_COUNTS, TABLE6_COUNTS};
pub use fixtures::{build_counterexample, hypotheses, Counterexample, Fixture, Hypothesis, HypothesisReport};
pub use sat2::{build_sat2_analytic, flip_delta_distribution, Sat2Spec, SatFlipRule};

use thiserror::Error;

use crate::model::{kernel_from_weights, ClassModel, FitnessDistribution, ModelError, SameCostRule};
use crate::numeric::ln_choose;

/// Worst cost of the synthetic benchmarks.
pub const BENCH_K_MAX: usize = 200;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BenchError {
    #[error("invalid class specification: {0}")]
    Spec(String),
    /// The weights put more than all the probability mass on neighbours.
    #[error("total_too_low: row {level} needs {excess} more mass than is available")]
    TotalTooLow { level: usize, excess: f64 },
    /// Leftover mass at the evaluation level would need a weight larger than the last listed one.
    #[error("last_NSFWeight_too_low: leftover weight {required} exceeds last weight {last}")]
    LastWeightTooLow { required: f64, last: f64 },
    /// Leftover mass but no worse level to put it on.
    #[error("row {level} has leftover mass {leftover} but no worse level to hold it")]
    NoTailMass { level: usize, leftover: f64 },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Index convention for the linear benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LinearMode {
    /// `p(i) ∝ 100 − |100 − i|`, so `p(0) = 0`.
    Table2,
    /// `p(i) ∝ 101 − |100 − i|`, shifted so the optimum is reachable.
    #[default]
    PositiveOptimum,
}

/// Index convention for the exponential benchmark.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ExponentialMode {
    /// `p(i) ∝ C(200, i+1)`.
    Table2,
    /// `p(i) = C(200, i) / 2^200`, so blind search needs `2^200` draws.
    #[default]
    IndexZero,
}

/// The synthetic benchmark classes over costs `0..=200`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Benchmark {
    Uniform,
    Linear(LinearMode),
    SteepLinear,
    Exponential(ExponentialMode),
}

impl Benchmark {
    pub fn name(&self) -> &'static str {
        match self {
            Benchmark::Uniform => "uniform",
            Benchmark::Linear(_) => "linear",
            Benchmark::SteepLinear => "steep-linear",
            Benchmark::Exponential(_) => "exponential",
        }
    }

    pub fn distribution(&self) -> FitnessDistribution {
        match *self {
            Benchmark::Uniform => build_uniform(),
            Benchmark::Linear(m) => build_linear(m),
            Benchmark::SteepLinear => build_steep_linear(),
            Benchmark::Exponential(m) => build_exponential(m),
        }
    }

    /// The banded benchmark model with neighbour cost distance at most `bound`.
    pub fn model(&self, bound: usize) -> Result<ClassModel, ModelError> {
        benchmark_model(&self.distribution(), bound)
    }
}

impl std::str::FromStr for Benchmark {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Benchmark::Uniform),
            "linear" => Ok(Benchmark::Linear(LinearMode::default())),
            "linear-table2" => Ok(Benchmark::Linear(LinearMode::Table2)),
            "steep-linear" => Ok(Benchmark::SteepLinear),
            "exponential" => Ok(Benchmark::Exponential(ExponentialMode::default())),
            "exponential-table2" => Ok(Benchmark::Exponential(ExponentialMode::Table2)),
            other => Err(format!(
                "unknown benchmark '{other}' (uniform|linear|linear-table2|steep-linear|exponential|exponential-table2)"
            )),
        }
    }
}

fn from_masses(masses: Vec<f64>) -> FitnessDistribution {
    FitnessDistribution::from_masses(&masses).expect("benchmark masses are positive")
}

/// Every cost `0..=200` equally likely. With 201 levels each has
/// probability 1/201 (the nominal 1/200 does not normalise).
pub fn build_uniform() -> FitnessDistribution {
    from_masses(vec![1.0; BENCH_K_MAX + 1])
}

pub fn build_linear(mode: LinearMode) -> FitnessDistribution {
    let shift = match mode {
        LinearMode::Table2 => 100.0,
        LinearMode::PositiveOptimum => 101.0,
    };
    from_masses((0..=BENCH_K_MAX).map(|i| shift - (100.0 - i as f64).abs()).collect())
}

/// Linear with five times the slope, shifted by one so `p(0) = 1/50201`.
pub fn build_steep_linear() -> FitnessDistribution {
    from_masses((0..=BENCH_K_MAX).map(|i| 5.0 * (100.0 - (100.0 - i as f64).abs()) + 1.0).collect())
}

pub fn build_exponential(mode: ExponentialMode) -> FitnessDistribution {
    let off = match mode {
        ExponentialMode::Table2 => 1,
        ExponentialMode::IndexZero => 0,
    };
    // Scale by C(200,100) before exponentiating to keep everything near 1.
    let peak = ln_choose(200, 100);
    from_masses(
        (0..=BENCH_K_MAX as u64)
            .map(|i| {
                let l = ln_choose(200, i + off);
                if l.is_finite() {
                    (l - peak).exp()
                } else {
                    0.0
                }
            })
            .collect(),
    )
}

/// The benchmark kernel: neighbours within `bound` cost levels, probabilities
/// proportional to `p` inside the window (the same-cost level included).
pub fn benchmark_model(dist: &FitnessDistribution, bound: usize) -> Result<ClassModel, ModelError> {
    kernel_from_weights(dist, bound, SameCostRule::Weighted)
}
