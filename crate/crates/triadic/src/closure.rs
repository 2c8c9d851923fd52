//! Closed testing over intersections of hypotheses and alternatives.
//!
//! An intersection H_{J1,J2} conjoins the hypotheses indexed by J1 with the
//! alternatives indexed by J2 (disjoint sets; overlapping ones are empty).
//! The local test is of union-intersection type: it rejects when the smallest
//! constituent p-value falls strictly below a threshold that depends only on
//! |J1 u J2|. An individual claim is rejected iff every non-empty
//! intersection containing it is locally rejected.
//!
//! For free-combination families this closure collapses to the single-step
//! rule with per-test level alpha(M); `verify_theorem_equivalence` checks
//! that collapse by brute force on random complementary p-vectors. The
//! nested two-couple procedure derived by hand for one-sided normal means
//! (where free combination fails) is encoded explicitly in
//! [`NestedClosureProcedure`].

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{
    Decision, DecisionVector, FamilyStructure, HypothesisFamily, PValuePair,
};
use crate::models::NestedNormalModel;
use crate::normal::std_normal_quantile;
use crate::procedures::{calibrate, single_step, CalibrationKind, ThreeWayThresholds};
use crate::rng;

/// Largest family size for which closure enumeration (3^M intersections) runs.
pub const CLOSURE_LIMIT: usize = 12;

/// Resample band around thresholds when drawing random p-vectors, so
/// measure-zero ties never decide an equivalence check.
const TIE_BAND: f64 = 1e-9;

/// Which side of a couple an intersection must contain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Hypothesis,
    Alternative,
}

/// The intersection of the hypotheses in `j1` with the alternatives in `j2`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntersectionHypothesis {
    j1: BTreeSet<usize>,
    j2: BTreeSet<usize>,
}

impl IntersectionHypothesis {
    pub fn new(j1: BTreeSet<usize>, j2: BTreeSet<usize>) -> Result<Self> {
        if !j1.is_disjoint(&j2) {
            return Err(Error::OverlappingIndexSets);
        }
        Ok(Self { j1, j2 })
    }

    pub fn j1(&self) -> &BTreeSet<usize> {
        &self.j1
    }

    pub fn j2(&self) -> &BTreeSet<usize> {
        &self.j2
    }

    /// |J1 u J2|.
    pub fn size(&self) -> usize {
        self.j1.len() + self.j2.len()
    }
}

/// Level schedule of the union-intersection local tests: intersection size
/// |J1 u J2| = k is tested at level alpha(k). Schedules must be
/// non-increasing in k, which makes alpha(M) the binding level of the
/// closure.
#[derive(Debug, Clone, PartialEq)]
pub struct LocalTestRule {
    kind: ScheduleKind,
}

#[derive(Debug, Clone, PartialEq)]
enum ScheduleKind {
    Bonferroni { alpha: f64 },
    Independent { alpha: f64 },
    Explicit { table: Vec<f64> },
}

impl LocalTestRule {
    /// alpha(k) = alpha / k.
    pub fn bonferroni(alpha: f64) -> Result<Self> {
        Self::check_level(alpha)?;
        Ok(Self {
            kind: ScheduleKind::Bonferroni { alpha },
        })
    }

    /// alpha(k) = 1 - (1 - alpha)^(1/k).
    pub fn independent(alpha: f64) -> Result<Self> {
        Self::check_level(alpha)?;
        Ok(Self {
            kind: ScheduleKind::Independent { alpha },
        })
    }

    /// Explicit table: `table[k - 1]` is the level for intersections of size k.
    pub fn explicit(table: Vec<f64>) -> Result<Self> {
        if table.is_empty() {
            return Err(Error::DegenerateFamily);
        }
        for &v in &table {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange {
                    what: "schedule level",
                    value: v,
                });
            }
        }
        if table.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::ScheduleNotMonotone);
        }
        Ok(Self {
            kind: ScheduleKind::Explicit { table },
        })
    }

    fn check_level(alpha: f64) -> Result<()> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidLevel { alpha });
        }
        Ok(())
    }

    /// The level for intersections of `size` components.
    pub fn threshold(&self, size: usize) -> f64 {
        assert!(size >= 1, "intersection size must be positive");
        match &self.kind {
            ScheduleKind::Bonferroni { alpha } => {
                CalibrationKind::Bonferroni.per_test_level(*alpha, size)
            }
            ScheduleKind::Independent { alpha } => {
                CalibrationKind::IndependentExact.per_test_level(*alpha, size)
            }
            ScheduleKind::Explicit { table } => {
                assert!(
                    size <= table.len(),
                    "schedule table covers sizes 1..={}, asked for {size}",
                    table.len()
                );
                table[size - 1]
            }
        }
    }

    /// Ensures the schedule covers intersections up to size `m`.
    fn check_covers(&self, m: usize) -> Result<()> {
        if let ScheduleKind::Explicit { table } = &self.kind {
            if table.len() < m {
                return Err(Error::LengthMismatch {
                    left: table.len(),
                    right: m,
                });
            }
        }
        Ok(())
    }
}

/// All non-empty intersections of a family, optionally restricted to those
/// containing one side of one couple. Enumeration walks the 3^M assignments
/// of each index to J1, J2 or neither.
pub fn enumerate_intersections(
    family: &HypothesisFamily,
    containing: Option<(usize, Side)>,
) -> Result<Vec<IntersectionHypothesis>> {
    let m = family.m();
    if m > CLOSURE_LIMIT {
        return Err(Error::SizeLimitExceeded {
            m,
            limit: CLOSURE_LIMIT,
        });
    }
    if let Some((index, _)) = containing {
        if index >= m {
            return Err(Error::InvalidConfiguration(format!(
                "couple index {index} out of range for a family of {m}"
            )));
        }
    }
    let mut out = Vec::new();
    let total = 3usize.pow(m as u32);
    for code in 1..total {
        let mut j1 = BTreeSet::new();
        let mut j2 = BTreeSet::new();
        let mut rest = code;
        for i in 0..m {
            match rest % 3 {
                1 => {
                    j1.insert(i);
                }
                2 => {
                    j2.insert(i);
                }
                _ => {}
            }
            rest /= 3;
        }
        if j1.is_empty() && j2.is_empty() {
            continue;
        }
        let keep = match containing {
            None => true,
            Some((index, Side::Hypothesis)) => j1.contains(&index),
            Some((index, Side::Alternative)) => j2.contains(&index),
        };
        if keep && family.is_feasible(&j1, &j2) {
            out.push(IntersectionHypothesis { j1, j2 });
        }
    }
    Ok(out)
}

/// Union-intersection local test: rejects iff the minimum of the hypothesis
/// p-values over J1 and the alternative p-values over J2 falls strictly
/// below the schedule level for this intersection's size.
pub fn local_test(
    intersection: &IntersectionHypothesis,
    family: &HypothesisFamily,
    rule: &LocalTestRule,
) -> bool {
    let m = family.m();
    assert!(
        intersection.j1.iter().all(|&i| i < m) && intersection.j2.iter().all(|&i| i < m),
        "intersection references couples outside the family"
    );
    let level = rule.threshold(intersection.size());
    let pairs = family.pairs();
    intersection.j1.iter().any(|&i| pairs[i].p_h() < level)
        || intersection.j2.iter().any(|&i| pairs[i].p_k() < level)
}

#[derive(Debug, Clone, Copy)]
struct MaskedIntersection {
    h_mask: u32,
    k_mask: u32,
    size: usize,
}

/// Precomputed closure enumeration for one family structure, reusable across
/// many p-value assignments.
#[derive(Debug, Clone)]
pub struct ClosureEngine {
    m: usize,
    intersections: Vec<MaskedIntersection>,
    /// Positions of the intersections whose J1 (resp. J2) contains index i,
    /// smallest intersections first so accepted singletons short-circuit.
    containing_h: Vec<Vec<u32>>,
    containing_k: Vec<Vec<u32>>,
}

impl ClosureEngine {
    pub fn new(family: &HypothesisFamily) -> Result<Self> {
        let m = family.m();
        let all = enumerate_intersections(family, None)?;
        let mut intersections = Vec::with_capacity(all.len());
        for inter in &all {
            let mut h_mask = 0u32;
            let mut k_mask = 0u32;
            for &i in inter.j1() {
                h_mask |= 1 << i;
            }
            for &i in inter.j2() {
                k_mask |= 1 << i;
            }
            intersections.push(MaskedIntersection {
                h_mask,
                k_mask,
                size: inter.size(),
            });
        }
        let mut order: Vec<u32> = (0..intersections.len() as u32).collect();
        order.sort_by_key(|&t| intersections[t as usize].size);
        let mut containing_h = vec![Vec::new(); m];
        let mut containing_k = vec![Vec::new(); m];
        for &t in &order {
            let inter = intersections[t as usize];
            for i in 0..m {
                if inter.h_mask & (1 << i) != 0 {
                    containing_h[i].push(t);
                }
                if inter.k_mask & (1 << i) != 0 {
                    containing_k[i].push(t);
                }
            }
        }
        Ok(Self {
            m,
            intersections,
            containing_h,
            containing_k,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Number of non-empty intersections.
    pub fn intersection_count(&self) -> usize {
        self.intersections.len()
    }

    fn locally_rejected(&self, t: u32, p_h: &[f64], p_k: &[f64], levels: &[f64]) -> bool {
        let inter = self.intersections[t as usize];
        let level = levels[inter.size - 1];
        let mut mask = inter.h_mask;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            if p_h[i] < level {
                return true;
            }
            mask &= mask - 1;
        }
        let mut mask = inter.k_mask;
        while mask != 0 {
            let i = mask.trailing_zeros() as usize;
            if p_k[i] < level {
                return true;
            }
            mask &= mask - 1;
        }
        false
    }

    /// Runs the closure over the given p-value pairs.
    pub fn decide(&self, pairs: &[PValuePair], rule: &LocalTestRule) -> Result<DecisionVector> {
        if pairs.len() != self.m {
            return Err(Error::LengthMismatch {
                left: pairs.len(),
                right: self.m,
            });
        }
        rule.check_covers(self.m)?;
        let p_h: Vec<f64> = pairs.iter().map(PValuePair::p_h).collect();
        let p_k: Vec<f64> = pairs.iter().map(PValuePair::p_k).collect();
        let levels: Vec<f64> = (1..=self.m).map(|k| rule.threshold(k)).collect();
        let mut decisions = Vec::with_capacity(self.m);
        for i in 0..self.m {
            let h_rejected = self.containing_h[i]
                .iter()
                .all(|&t| self.locally_rejected(t, &p_h, &p_k, &levels));
            let k_rejected = self.containing_k[i]
                .iter()
                .all(|&t| self.locally_rejected(t, &p_h, &p_k, &levels));
            decisions.push(match (h_rejected, k_rejected) {
                (true, true) => return Err(Error::InternalInconsistency { couple: i + 1 }),
                (true, false) => Decision::SignificantlyFalse,
                (false, true) => Decision::SignificantlyTrue,
                (false, false) => Decision::Uncertain,
            });
        }
        Ok(DecisionVector::new(decisions))
    }
}

/// Closure decision for a family: each couple is classified D2 / D1 / D3
/// according to whether its hypothesis, its alternative, or neither is
/// rejected by the closed test.
pub fn closed_test(family: &HypothesisFamily, rule: &LocalTestRule) -> Result<DecisionVector> {
    ClosureEngine::new(family)?.decide(family.pairs(), rule)
}

/// Outcome of the closure-vs-single-step equivalence check.
#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceReport {
    pub m: usize,
    pub trials: u64,
    pub mismatches: u64,
    pub first_mismatch: Option<EquivalenceMismatch>,
}

#[derive(Debug, Clone, Serialize)]
pub struct EquivalenceMismatch {
    pub trial: u64,
    pub p_h: Vec<f64>,
    pub closure: DecisionVector,
    pub single_step: DecisionVector,
}

/// Brute-force check that the closure collapses to the single-step rule on a
/// free-combination family: draws `trials` random complementary p-vectors
/// (resampling any coordinate that lands within 1e-9 of a schedule level or
/// its complement) and compares the two decision paths.
pub fn verify_theorem_equivalence(
    family: &HypothesisFamily,
    rule: &LocalTestRule,
    trials: u64,
    seed: u64,
) -> Result<EquivalenceReport> {
    if !family.is_free_combination_structure() {
        return Err(Error::NotFreeCombination);
    }
    family.require_complementary()?;
    let m = family.m();
    rule.check_covers(m)?;
    let engine = ClosureEngine::new(family)?;
    let thresholds = ThreeWayThresholds::new(rule.threshold(m))?;

    let mut avoid = Vec::with_capacity(2 * m);
    for k in 1..=m {
        avoid.push(rule.threshold(k));
        avoid.push(1.0 - rule.threshold(k));
    }

    let mut mismatches = 0u64;
    let mut first_mismatch = None;
    let mut pairs = Vec::with_capacity(m);
    for trial in 0..trials {
        pairs.clear();
        for i in 0..m {
            let mut attempt = 0u64;
            let p = loop {
                let u = rng::unit_uniform(seed, trial, attempt * m as u64 + i as u64);
                if avoid.iter().all(|&a| (u - a).abs() > TIE_BAND) {
                    break u;
                }
                attempt += 1;
            };
            pairs.push(PValuePair::complementary(p)?);
        }
        let closure_d = engine.decide(&pairs, rule)?;
        let trial_family = HypothesisFamily::free_combination(pairs.clone())?;
        let single_d = single_step(&trial_family, &thresholds)?;
        if closure_d != single_d {
            mismatches += 1;
            if first_mismatch.is_none() {
                first_mismatch = Some(EquivalenceMismatch {
                    trial,
                    p_h: pairs.iter().map(PValuePair::p_h).collect(),
                    closure: closure_d,
                    single_step: single_d,
                });
            }
        }
    }
    Ok(EquivalenceReport {
        m,
        trials,
        mismatches,
        first_mismatch,
    })
}

/// The closure procedure for two nested one-sided couples h_i: theta >= theta_i
/// vs k_i: theta < theta_i (theta1 < theta2), written out test by test:
///
/// * reject h_1 iff sqrt(n) (xbar - theta1) < -c_{alpha/2}
/// * reject k_1 iff sqrt(n) (xbar - theta1) >  c_alpha
/// * reject h_2 iff sqrt(n) (xbar - theta2) < -c_alpha
/// * reject k_2 iff sqrt(n) (xbar - theta2) >  c_{alpha/2}
///
/// where c_p is the upper-p standard normal quantile. The outer tests run at
/// the tighter level because the nesting leaves them with two-element
/// intersections to clear, while the inner ones coincide with single tests.
#[derive(Debug, Clone, Copy)]
pub struct NestedClosureProcedure {
    alpha: f64,
    c_alpha: f64,
    c_half_alpha: f64,
}

impl NestedClosureProcedure {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidLevel { alpha });
        }
        Ok(Self {
            alpha,
            c_alpha: std_normal_quantile(1.0 - alpha)?,
            c_half_alpha: std_normal_quantile(1.0 - alpha / 2.0)?,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Upper-alpha standard normal quantile.
    pub fn c_alpha(&self) -> f64 {
        self.c_alpha
    }

    /// Upper-alpha/2 standard normal quantile.
    pub fn c_half_alpha(&self) -> f64 {
        self.c_half_alpha
    }

    pub fn decide(&self, xbar: f64, n: u64, theta1: f64, theta2: f64) -> Result<DecisionVector> {
        if theta1 >= theta2 {
            return Err(Error::InvalidOrdering { theta1, theta2 });
        }
        if n == 0 {
            return Err(Error::InsufficientSamples {
                required: 1,
                actual: 0,
            });
        }
        let sqrt_n = (n as f64).sqrt();
        let z1 = sqrt_n * (xbar - theta1);
        let z2 = sqrt_n * (xbar - theta2);
        let tests = [
            (z1 < -self.c_half_alpha, z1 > self.c_alpha),
            (z2 < -self.c_alpha, z2 > self.c_half_alpha),
        ];
        tests
            .iter()
            .enumerate()
            .map(|(i, &(reject_h, reject_k))| match (reject_h, reject_k) {
                (true, true) => Err(Error::InternalInconsistency { couple: i + 1 }),
                (true, false) => Ok(Decision::SignificantlyFalse),
                (false, true) => Ok(Decision::SignificantlyTrue),
                (false, false) => Ok(Decision::Uncertain),
            })
            .collect::<Result<Vec<Decision>>>()
            .map(DecisionVector::new)
    }
}

/// Closure decision for the nested two-couple problem at one sample mean.
pub fn counterexample_procedure(
    xbar: f64,
    n: u64,
    theta1: f64,
    theta2: f64,
    alpha: f64,
) -> Result<DecisionVector> {
    NestedClosureProcedure::new(alpha)?.decide(xbar, n, theta1, theta2)
}

/// One grid point of the closure-vs-Bonferroni comparison.
#[derive(Debug, Clone, Serialize)]
pub struct GridComparison {
    pub xbar: f64,
    pub closure: DecisionVector,
    pub bonferroni: DecisionVector,
    pub agree: bool,
}

/// Where the nested closure procedure and the Bonferroni procedure disagree.
///
/// On the standardized scale z = sqrt(n) (xbar - theta_i), couple 1 disagrees
/// exactly on (c_alpha, c_{alpha/2}] (the closure already rejects k_1 there)
/// and couple 2 mirrors it on [-c_{alpha/2}, -c_alpha). Interval endpoints
/// are stored as (open, closed) for couple 1 and (closed, open) for couple 2.
#[derive(Debug, Clone, Serialize)]
pub struct DisagreementReport {
    pub alpha: f64,
    pub n: u64,
    pub theta1: f64,
    pub theta2: f64,
    pub c_alpha: f64,
    pub c_half_alpha: f64,
    /// z-scale disagreement band for couple 1: open at c_alpha, closed at
    /// c_{alpha/2}.
    pub standardized_band: (f64, f64),
    /// xbar-scale band for couple 1: (theta1 + c_alpha/sqrt(n), theta1 + c_{alpha/2}/sqrt(n)].
    pub xbar_band_couple1: (f64, f64),
    /// xbar-scale band for couple 2: [theta2 - c_{alpha/2}/sqrt(n), theta2 - c_alpha/sqrt(n)).
    pub xbar_band_couple2: (f64, f64),
    pub points: Vec<GridComparison>,
    pub disagreement_count: usize,
}

/// Compares the nested closure procedure against the Bonferroni procedure on
/// the same one-sided p-values over a grid of sample means.
pub fn counterexample_vs_bonferroni(
    grid: &[f64],
    n: u64,
    theta1: f64,
    theta2: f64,
    alpha: f64,
) -> Result<DisagreementReport> {
    let procedure = NestedClosureProcedure::new(alpha)?;
    if theta1 >= theta2 {
        return Err(Error::InvalidOrdering { theta1, theta2 });
    }
    if n == 0 {
        return Err(Error::InsufficientSamples {
            required: 1,
            actual: 0,
        });
    }
    let model = NestedNormalModel::new(theta1, n, theta1, theta2)?;
    let bonferroni_thresholds = calibrate(CalibrationKind::Bonferroni, alpha, 2)?;
    let mut points = Vec::with_capacity(grid.len());
    let mut disagreement_count = 0;
    for &xbar in grid {
        let closure = procedure.decide(xbar, n, theta1, theta2)?;
        let bonferroni = single_step(&model.family_at(xbar)?, &bonferroni_thresholds)?;
        let agree = closure == bonferroni;
        if !agree {
            disagreement_count += 1;
        }
        points.push(GridComparison {
            xbar,
            closure,
            bonferroni,
            agree,
        });
    }
    let sqrt_n = (n as f64).sqrt();
    Ok(DisagreementReport {
        alpha,
        n,
        theta1,
        theta2,
        c_alpha: procedure.c_alpha(),
        c_half_alpha: procedure.c_half_alpha(),
        standardized_band: (procedure.c_alpha(), procedure.c_half_alpha()),
        xbar_band_couple1: (
            theta1 + procedure.c_alpha() / sqrt_n,
            theta1 + procedure.c_half_alpha() / sqrt_n,
        ),
        xbar_band_couple2: (
            theta2 - procedure.c_half_alpha() / sqrt_n,
            theta2 - procedure.c_alpha() / sqrt_n,
        ),
        points,
        disagreement_count,
    })
}

/// Builds the nested two-couple family structure used in tests and by the
/// command-line front end: feasible unless the intersection asks for the
/// second hypothesis together with the first alternative.
pub fn nested_structure() -> FamilyStructure {
    FamilyStructure::Oracle(std::sync::Arc::new(|j1: &BTreeSet<usize>, j2: &BTreeSet<usize>| {
        !(j1.contains(&1) && j2.contains(&0))
    }))
}
