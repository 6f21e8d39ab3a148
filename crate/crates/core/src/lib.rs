//! Anytime optimization of ground logic programs with weak constraints.
//!
//! The crate is organized bottom-up:
//!
//! - [`model`]: programs, interpretations, reducts, stability and costs.
//! - [`textio`]: the ground text dialect and WCNF input.
//! - [`oracle`]: assumption-based stable model search (enumeration and CDCL).
//! - [`relax`]: weak-constraint relaxation and level compilation.
//! - [`optimize`]: model-guided and core-guided search with core shrinking.
//! - [`report`]: anytime events, the error estimate, statistics and benchmarks.
//! - [`random`]: seeded instance generation for tests and benchmarks.
//! - [`cli`]: the command-line front end.

pub mod cli;
pub mod model;
pub mod optimize;
pub mod oracle;
pub mod random;
pub mod relax;
pub mod report;
pub mod textio;
