//! Concrete instances and landscape censuses.
//!
//! A census visits points of one or more instances (every point, or a
//! uniform sample), records the cost histogram `p̂`, and for surveyed cost
//! levels the cost histogram of all their neighbours `p̂n`. NSF weights
//! `r̂` and the predicates of the theory are then evaluated on those
//! estimates exactly as on an analytic model.

mod census;
mod nsf;
mod sat;
mod tsp;

pub use census::{census_exhaustive, census_sampled, flip_experiment, CensusReport, FlipExperiment, SampleMode, Target};
pub use nsf::{nsf_report, nsf_report_model, nsf_table, LevelTables, NsfReport, NsfRow, PairVerdict};
pub use sat::{gen_sat2, Literal, Sat2Instance, SAT_ENUM_LIMIT};
pub use tsp::{gen_tsp, TspInstance, TSP_ENUM_LIMIT};

use rand::Rng;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EmpiricalError {
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("search space of {size} points exceeds the exhaustive-enumeration limit")]
    TooLarge { size: u128 },
    #[error("no sampled point had cost {target}; increase the sample count or pick another level")]
    NoPointsAtTarget { target: u64 },
    #[error("instance construction failed after {rounds} rounds with seed {seed}; retry with another seed")]
    ConstructionFailed { seed: u64, rounds: usize },
}

/// A search space with integer costs and an indexed neighbourhood.
pub trait Landscape: Sync {
    type Point: Clone + Send;

    /// A uniformly random point.
    fn random_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Self::Point;

    fn cost(&self, p: &Self::Point) -> u64;

    /// Upper bound on any cost, used to size histograms.
    fn cost_bound(&self) -> u64;

    /// Neighbourhood size; neighbours are indexed `0..neighbour_count()`.
    fn neighbour_count(&self) -> usize;

    /// Cost of neighbour `idx` of `p`, given `p`'s own cost.
    fn neighbour_cost(&self, p: &Self::Point, cost: u64, idx: usize) -> u64;

    /// Moves `p` to its neighbour `idx`.
    fn apply_neighbour(&self, p: &mut Self::Point, idx: usize);
}

/// A landscape whose points can be listed, split into partitions that
/// can be visited independently.
pub trait Exhaustive: Landscape {
    fn space_size(&self) -> u128;
    fn enumerable(&self) -> bool;
    fn partitions(&self) -> usize;
    fn visit_partition(&self, part: usize, f: &mut dyn FnMut(&Self::Point));
}
