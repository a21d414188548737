//! Analytic and empirical tools for asking when neighbourhood search and
//! local descent beat blind random sampling.
//!
//! The crate is organised around a *problem class*: a fitness
//! distribution `p(k)` over integer costs (optimum 0), a neighbourhood
//! kernel `pn(k1, k2)`, and the NSF ("neighbours have similar fitness")
//! weights `r(k, δ)` tying the two together.
//!
//! * [`model`] — the three objects, improvement probabilities and predicates.
//! * [`benchmarks`] — named classes and counter-example fixtures.
//! * [`analysis`] — expected-steps recursions, seeding and the grid falsifier.
//! * [`empirical`] — TSP / 2-SAT instances and landscape censuses.
//! * [`simulate`] — Monte-Carlo blind search and local descent.
//! * [`verify`] — randomised property suites for the lemmas and theorems.

pub mod analysis;
pub mod benchmarks;
pub mod empirical;
pub mod model;
pub mod numeric;
pub mod rng;
pub mod simulate;
pub mod verify;
