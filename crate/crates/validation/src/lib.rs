//! Holds the acceptance suite in `tests/acceptance.rs`. It is kept apart
//! from `nsf-core` so that cargo runs it after the core test targets; an
//! unmet criterion then does not stop the other suites from running.
