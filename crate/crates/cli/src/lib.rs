//! Scenario-driven front end for the critical-point verifier.
//!
//! The binary reads a TOML scenario, dispatches to one of three
//! pipelines (arrangement, hypersurface, characteristic-class sweep),
//! and emits a report whose verdict is the conjunction of named
//! integer identities. The library half exists so the pipelines can be
//! driven in-process by the test suites.

pub mod pipeline;
pub mod report;
pub mod scenario;
