//! Simultaneous testing of M hypotheses and their alternatives with
//! three-decision output: each couple is classified as significantly true
//! (D1), significantly false (D2) or left in the uncertainty zone (D3).
//!
//! The crate provides the domain types ([`family`]), the single-step
//! Bonferroni-type procedures ([`procedures`]), a generic closed-testing
//! engine over intersections of hypotheses and alternatives ([`closure`]),
//! Gaussian and correlation models producing complementary p-values
//! ([`models`]), and Monte Carlo verification of familywise error control
//! and the risk decomposition ([`risk`]).

pub mod closure;
pub mod error;
pub mod family;
pub mod models;
pub mod normal;
pub mod procedures;
pub mod risk;
pub mod rng;

pub use error::{Error, Result};
pub use family::{
    partition_from_decisions, Decision, DecisionVector, FamilyStructure, HypothesisFamily,
    PValuePair, PartitionSets, TruthAssignment,
};
pub use procedures::{
    bauer_bonferroni, calibrate, fwer_violation, single_step, CalibrationKind, Complementarity,
    ThreeWayThresholds,
};
