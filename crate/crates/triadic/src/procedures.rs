//! Single-step simultaneous testing procedures.
//!
//! Rejection is strict everywhere: a hypothesis is rejected when its p-value
//! falls strictly below the calibrated threshold, and equality keeps the
//! conservative decision. The two calibrations are alpha/M and the exact
//! level 1 - (1 - alpha)^(1/M) for independent p-values.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{Decision, DecisionVector, HypothesisFamily, PartitionSets, TruthAssignment};

/// How the per-test level alpha(M) is derived from the familywise level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationKind {
    /// alpha(M) = alpha / M; valid without any dependence assumption.
    Bonferroni,
    /// alpha(M) = 1 - (1 - alpha)^(1/M); exact under independent p-values.
    IndependentExact,
}

impl CalibrationKind {
    pub fn per_test_level(&self, alpha: f64, m: usize) -> f64 {
        match self {
            CalibrationKind::Bonferroni => alpha / m as f64,
            CalibrationKind::IndependentExact => 1.0 - (1.0 - alpha).powf(1.0 / m as f64),
        }
    }
}

/// A familywise level together with its per-test calibration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub kind: CalibrationKind,
    pub alpha: f64,
    pub m: usize,
}

impl Calibration {
    pub fn new(kind: CalibrationKind, alpha: f64, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::DegenerateFamily);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidLevel { alpha });
        }
        Ok(Self { kind, alpha, m })
    }

    /// The per-test level alpha(M).
    pub fn value(&self) -> f64 {
        self.kind.per_test_level(self.alpha, self.m)
    }

    pub fn thresholds(&self) -> Result<ThreeWayThresholds> {
        ThreeWayThresholds::new(self.value())
    }
}

/// The pair (alpha(M), 1 - alpha(M)) splitting [0, 1] into the rejection,
/// uncertainty and acceptance bands of the three-decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThreeWayThresholds {
    lower: f64,
    upper: f64,
}

impl ThreeWayThresholds {
    /// Requires 0 < lower < 1/2 so that the uncertainty band is non-empty;
    /// upper is 1 - lower by construction.
    pub fn new(lower: f64) -> Result<Self> {
        if !(lower > 0.0 && lower < 1.0) {
            return Err(Error::InvalidLevel { alpha: lower });
        }
        if lower >= 0.5 {
            return Err(Error::ThresholdAboveHalf { threshold: lower });
        }
        Ok(Self {
            lower,
            upper: 1.0 - lower,
        })
    }

    pub fn lower(&self) -> f64 {
        self.lower
    }

    pub fn upper(&self) -> f64 {
        self.upper
    }
}

/// Computes the three-way thresholds for a familywise level.
pub fn calibrate(kind: CalibrationKind, alpha: f64, m: usize) -> Result<ThreeWayThresholds> {
    Calibration::new(kind, alpha, m)?.thresholds()
}

/// Whether non-complementary p-value pairs are allowed through the
/// three-decision classification.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Complementarity {
    /// Refuse families with any non-complementary pair.
    Required,
    /// Accept them; the alternative side is then tested on p_k directly.
    Overridden,
}

/// The Bonferroni-type procedure at level alpha: rejects h_i when
/// p_h < alpha/M and k_i when the complementary evidence falls below
/// alpha/M, returning the resulting index-set partition.
pub fn bauer_bonferroni(family: &HypothesisFamily, alpha: f64) -> Result<PartitionSets> {
    bauer_bonferroni_with(family, alpha, Complementarity::Required)
}

pub fn bauer_bonferroni_with(
    family: &HypothesisFamily,
    alpha: f64,
    policy: Complementarity,
) -> Result<PartitionSets> {
    let m = family.m();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidLevel { alpha });
    }
    if policy == Complementarity::Required {
        family.require_complementary()?;
    }
    let threshold = alpha / m as f64;
    let mut u_bar = BTreeSet::new();
    let mut l = BTreeSet::new();
    for (i, pair) in family.pairs().iter().enumerate() {
        if pair.p_h() < threshold {
            u_bar.insert(i);
        }
        let reject_alternative = match policy {
            Complementarity::Required => pair.p_h() > 1.0 - threshold,
            Complementarity::Overridden => pair.p_k() < threshold,
        };
        if reject_alternative {
            l.insert(i);
        }
    }
    Ok(PartitionSets::from_rejections(m, u_bar, l))
}

/// The single-step three-decision rule: D2 when p_h < lower, D1 when
/// p_h > upper, D3 when p_h sits inside [lower, upper].
pub fn single_step(
    family: &HypothesisFamily,
    thresholds: &ThreeWayThresholds,
) -> Result<DecisionVector> {
    single_step_with(family, thresholds, Complementarity::Required)
}

pub fn single_step_with(
    family: &HypothesisFamily,
    thresholds: &ThreeWayThresholds,
    policy: Complementarity,
) -> Result<DecisionVector> {
    if policy == Complementarity::Required {
        family.require_complementary()?;
    }
    family
        .pairs()
        .iter()
        .enumerate()
        .map(|(i, pair)| {
            let reject_h = pair.p_h() < thresholds.lower();
            let reject_k = match policy {
                Complementarity::Required => pair.p_h() > thresholds.upper(),
                Complementarity::Overridden => pair.p_k() < thresholds.lower(),
            };
            match (reject_h, reject_k) {
                (true, true) => Err(Error::InternalInconsistency { couple: i + 1 }),
                (true, false) => Ok(Decision::SignificantlyFalse),
                (false, true) => Ok(Decision::SignificantlyTrue),
                (false, false) => Ok(Decision::Uncertain),
            }
        })
        .collect::<Result<Vec<Decision>>>()
        .map(DecisionVector::new)
}

/// True when the decision vector commits at least one familywise error:
/// a true hypothesis rejected (D2) or a true alternative rejected (D1).
pub fn fwer_violation(d: &DecisionVector, truth: &TruthAssignment) -> Result<bool> {
    if d.len() != truth.m() {
        return Err(Error::LengthMismatch {
            left: d.len(),
            right: truth.m(),
        });
    }
    Ok(d.iter().enumerate().any(|(i, decision)| {
        match decision {
            // rejecting the alternative is an error when the alternative holds
            Decision::SignificantlyTrue => !truth.hypothesis_true(i),
            // rejecting the hypothesis is an error when the hypothesis holds
            Decision::SignificantlyFalse => truth.hypothesis_true(i),
            Decision::Uncertain => false,
        }
    }))
}
