//! Additive loss, its three-term decomposition, and Monte Carlo estimation
//! of familywise error, expected uncertainty-zone size and risk.
//!
//! Losses per couple: wrongly rejecting the hypothesis costs a + l, leaving
//! it undecided under a true alternative costs b, wrongly rejecting the
//! alternative costs c + b, and leaving it undecided under a true hypothesis
//! costs l; correct significant decisions are free. In identity mode
//! (a = c, b = l, a + b = 1) the total collapses per replicate to
//! (#directional errors) + b |G|, and that identity is checked exactly, not
//! within a tolerance.

use rayon::prelude::*;
use serde::Serialize;

use crate::closure::NestedClosureProcedure;
use crate::error::{Error, Result};
use crate::family::{Decision, DecisionVector, TruthAssignment};
use crate::models::{
    gaussian_means_pvalues, simulate_sample_means, GaussianMeansModel, NestedNormalModel,
};
use crate::procedures::{calibrate, single_step, CalibrationKind, ThreeWayThresholds};

/// Replicates per deterministic accumulation chunk. Chunk boundaries are
/// fixed so sums are bit-identical for any worker count.
const CHUNK: u64 = 4096;

/// The four loss coefficients: a and b for wrongly rejecting / accepting a
/// hypothesis, c and l for wrongly rejecting / accepting an alternative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LossSpec {
    a: f64,
    b: f64,
    c: f64,
    l: f64,
}

impl LossSpec {
    pub fn new(a: f64, b: f64, c: f64, l: f64) -> Result<Self> {
        for (what, v) in [("a", a), ("b", b), ("c", c), ("l", l)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::DomainError { what, value: v });
            }
        }
        // normalize -0.0 so value equality below implies bit equality
        Ok(Self {
            a: a + 0.0,
            b: b + 0.0,
            c: c + 0.0,
            l: l + 0.0,
        })
    }

    /// Identity-mode spec with the given uncertainty penalty b: a = c = 1 - b
    /// and l = b, so a + b = 1 holds exactly in floating point.
    pub fn identity(b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&b) {
            return Err(Error::ProbabilityOutOfRange { what: "b", value: b });
        }
        Self::new(1.0 - b, b, 1.0 - b, b)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn l(&self) -> f64 {
        self.l
    }

    /// a = c, b = l and a + b = 1, all as exact float identities; the
    /// decomposition check relies on them holding without rounding slack.
    pub fn is_identity_mode(&self) -> bool {
        self.a == self.c && self.b == self.l && self.a + self.b == 1.0
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct CellCounts {
    h_rejected: u64,
    h_undecided: u64,
    k_rejected: u64,
    k_undecided: u64,
}

impl CellCounts {
    fn directional(&self) -> u64 {
        self.h_rejected + self.k_rejected
    }

    fn uncertain(&self) -> u64 {
        self.h_undecided + self.k_undecided
    }
}

fn cell_counts(truth: &TruthAssignment, d: &DecisionVector) -> Result<CellCounts> {
    if truth.m() != d.len() {
        return Err(Error::LengthMismatch {
            left: truth.m(),
            right: d.len(),
        });
    }
    let mut counts = CellCounts::default();
    for (i, decision) in d.iter().enumerate() {
        if truth.hypothesis_true(i) {
            match decision {
                Decision::SignificantlyFalse => counts.h_rejected += 1,
                Decision::Uncertain => counts.h_undecided += 1,
                Decision::SignificantlyTrue => {}
            }
        } else {
            match decision {
                Decision::SignificantlyTrue => counts.k_rejected += 1,
                Decision::Uncertain => counts.k_undecided += 1,
                Decision::SignificantlyFalse => {}
            }
        }
    }
    Ok(counts)
}

fn loss_from_counts(counts: &CellCounts, spec: &LossSpec) -> f64 {
    let directional = (counts.h_rejected as f64) * (spec.a + spec.l)
        + (counts.k_rejected as f64) * (spec.c + spec.b);
    // When the two undecided penalties coincide the cells are merged before
    // multiplying, which keeps the identity-mode decomposition an exact
    // floating-point identity rather than an up-to-rounding one.
    let undecided = if spec.l == spec.b {
        (counts.uncertain() as f64) * spec.b
    } else {
        (counts.h_undecided as f64) * spec.l + (counts.k_undecided as f64) * spec.b
    };
    directional + undecided
}

/// Additive loss of a decision vector under the given truth.
pub fn loss(truth: &TruthAssignment, d: &DecisionVector, spec: &LossSpec) -> Result<f64> {
    Ok(loss_from_counts(&cell_counts(truth, d)?, spec))
}

/// Verifies the per-replicate identity
/// `loss = #directional errors + b * |G|` for every supplied replicate.
/// Requires identity mode; the comparison is exact.
pub fn decomposition_check(
    replicates: &[(TruthAssignment, DecisionVector)],
    spec: &LossSpec,
) -> Result<bool> {
    if !spec.is_identity_mode() {
        return Err(Error::IdentityModeRequired);
    }
    for (truth, d) in replicates {
        let counts = cell_counts(truth, d)?;
        let w = loss_from_counts(&counts, spec);
        let collapsed = counts.directional() as f64 + spec.b * (counts.uncertain() as f64);
        if w != collapsed {
            return Ok(false);
        }
    }
    Ok(true)
}

/// A model the Monte Carlo driver can simulate.
#[derive(Debug, Clone)]
pub enum McModel {
    GaussianMeans(GaussianMeansModel),
    Nested(NestedNormalModel),
}

impl McModel {
    pub fn m(&self) -> usize {
        match self {
            McModel::GaussianMeans(m) => m.m(),
            McModel::Nested(_) => 2,
        }
    }

    pub fn truth(&self) -> TruthAssignment {
        match self {
            McModel::GaussianMeans(m) => m.truth(),
            McModel::Nested(m) => m.truth(),
        }
    }
}

/// Which procedure the Monte Carlo driver applies to each replicate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum McProcedure {
    /// The single-step three-decision rule at the given calibration.
    SingleStep {
        calibration: CalibrationKind,
        alpha: f64,
    },
    /// The explicit nested closure procedure; requires a nested model.
    NestedClosure { alpha: f64 },
}

/// A point estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_error: f64,
}

/// Monte Carlo estimates of the directional error sums, E(|G|), risk and
/// the familywise error probability. The directional sums and the familywise
/// indicator are reported separately: the former add per-couple error
/// probabilities, the latter is the probability that any error occurs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskReport {
    pub m: usize,
    pub replicates: u64,
    pub directional_h: Estimate,
    pub directional_k: Estimate,
    pub expected_g: Estimate,
    pub risk: Estimate,
    pub fwer: Estimate,
    /// Some(true) when identity mode held and every replicate satisfied the
    /// exact loss decomposition; None outside identity mode.
    pub decomposition_exact: Option<bool>,
}

#[derive(Debug, Clone, Copy)]
struct Accumulator {
    count: u64,
    loss_sum: f64,
    loss_sq: f64,
    g_sum: f64,
    g_sq: f64,
    dh_sum: f64,
    dh_sq: f64,
    dk_sum: f64,
    dk_sq: f64,
    fwer_count: u64,
    decomposition_ok: bool,
}

impl Accumulator {
    fn new() -> Self {
        Self {
            count: 0,
            loss_sum: 0.0,
            loss_sq: 0.0,
            g_sum: 0.0,
            g_sq: 0.0,
            dh_sum: 0.0,
            dh_sq: 0.0,
            dk_sum: 0.0,
            dk_sq: 0.0,
            fwer_count: 0,
            decomposition_ok: true,
        }
    }

    fn push(&mut self, w: f64, counts: &CellCounts, identity_exact: bool) {
        let g = counts.uncertain() as f64;
        let dh = counts.h_rejected as f64;
        let dk = counts.k_rejected as f64;
        self.count += 1;
        self.loss_sum += w;
        self.loss_sq += w * w;
        self.g_sum += g;
        self.g_sq += g * g;
        self.dh_sum += dh;
        self.dh_sq += dh * dh;
        self.dk_sum += dk;
        self.dk_sq += dk * dk;
        if counts.directional() > 0 {
            self.fwer_count += 1;
        }
        self.decomposition_ok &= identity_exact;
    }

    fn merge(mut self, other: Self) -> Self {
        self.count += other.count;
        self.loss_sum += other.loss_sum;
        self.loss_sq += other.loss_sq;
        self.g_sum += other.g_sum;
        self.g_sq += other.g_sq;
        self.dh_sum += other.dh_sum;
        self.dh_sq += other.dh_sq;
        self.dk_sum += other.dk_sum;
        self.dk_sq += other.dk_sq;
        self.fwer_count += other.fwer_count;
        self.decomposition_ok &= other.decomposition_ok;
        self
    }

    fn estimate(&self, sum: f64, sq: f64) -> Estimate {
        let n = self.count as f64;
        let mean = sum / n;
        let std_error = if self.count > 1 {
            let var = ((sq - n * mean * mean) / (n - 1.0)).max(0.0);
            (var / n).sqrt()
        } else {
            0.0
        };
        Estimate {
            value: mean,
            std_error,
        }
    }

    fn binomial_estimate(&self, successes: u64) -> Estimate {
        let n = self.count as f64;
        let p = successes as f64 / n;
        Estimate {
            value: p,
            std_error: (p * (1.0 - p) / n).sqrt(),
        }
    }
}

enum PreparedProcedure {
    SingleStep(ThreeWayThresholds),
    NestedClosure(NestedClosureProcedure),
}

/// Simulates `replicates` draws from the model, applies the procedure and
/// accumulates loss, |G|, directional errors and the familywise indicator.
/// Deterministic for a fixed seed, independent of the rayon worker count.
pub fn monte_carlo_risk(
    model: &McModel,
    procedure: &McProcedure,
    spec: &LossSpec,
    replicates: u64,
    seed: u64,
) -> Result<RiskReport> {
    if replicates == 0 {
        return Err(Error::InvalidConfiguration(
            "replicates must be at least 1".into(),
        ));
    }
    let truth = model.truth();
    let identity_mode = spec.is_identity_mode();
    let prepared = match (procedure, model) {
        (
            McProcedure::SingleStep { calibration, alpha },
            _,
        ) => PreparedProcedure::SingleStep(calibrate(*calibration, *alpha, model.m())?),
        (McProcedure::NestedClosure { alpha }, McModel::Nested(_)) => {
            PreparedProcedure::NestedClosure(NestedClosureProcedure::new(*alpha)?)
        }
        (McProcedure::NestedClosure { .. }, McModel::GaussianMeans(_)) => {
            return Err(Error::InvalidConfiguration(
                "the nested closure procedure requires the nested model".into(),
            ))
        }
    };

    let run_one = |replicate: u64| -> Result<(f64, CellCounts, bool)> {
        let decisions = match (model, &prepared) {
            (McModel::GaussianMeans(gm), PreparedProcedure::SingleStep(thresholds)) => {
                let means = simulate_sample_means(gm, seed, replicate);
                let family = gaussian_means_pvalues(gm, &means)?;
                single_step(&family, thresholds)?
            }
            (McModel::Nested(nm), PreparedProcedure::SingleStep(thresholds)) => {
                let xbar = nm.simulate_mean(seed, replicate);
                single_step(&nm.family_at(xbar)?, thresholds)?
            }
            (McModel::Nested(nm), PreparedProcedure::NestedClosure(proc)) => {
                let xbar = nm.simulate_mean(seed, replicate);
                proc.decide(xbar, nm.n(), nm.theta1(), nm.theta2())?
            }
            (McModel::GaussianMeans(_), PreparedProcedure::NestedClosure(_)) => unreachable!(),
        };
        let counts = cell_counts(&truth, &decisions)?;
        let w = loss_from_counts(&counts, spec);
        let identity_exact = !identity_mode
            || w == counts.directional() as f64 + spec.b * (counts.uncertain() as f64);
        Ok((w, counts, identity_exact))
    };

    let chunks = replicates.div_ceil(CHUNK);
    let partials: Vec<Accumulator> = (0..chunks)
        .into_par_iter()
        .map(|chunk| -> Result<Accumulator> {
            let mut acc = Accumulator::new();
            let start = chunk * CHUNK;
            let end = (start + CHUNK).min(replicates);
            for replicate in start..end {
                let (w, counts, identity_exact) = run_one(replicate)?;
                acc.push(w, &counts, identity_exact);
            }
            Ok(acc)
        })
        .collect::<Result<Vec<_>>>()?;
    let total = partials
        .into_iter()
        .fold(Accumulator::new(), Accumulator::merge);

    Ok(RiskReport {
        m: model.m(),
        replicates,
        directional_h: total.estimate(total.dh_sum, total.dh_sq),
        directional_k: total.estimate(total.dk_sum, total.dk_sq),
        expected_g: total.estimate(total.g_sum, total.g_sq),
        risk: total.estimate(total.loss_sum, total.loss_sq),
        fwer: total.binomial_estimate(total.fwer_count),
        decomposition_exact: if identity_mode {
            Some(total.decomposition_ok)
        } else {
            None
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::Decision::{
        SignificantlyFalse as D2, SignificantlyTrue as D1, Uncertain as D3,
    };

    #[test]
    fn loss_table_cells() {
        let spec = LossSpec::new(0.6, 0.4, 0.6, 0.4).unwrap();
        let h_true = TruthAssignment::from_flags(&[true]).unwrap();
        let k_true = TruthAssignment::from_flags(&[false]).unwrap();
        // correct significant decision is free
        assert_eq!(
            loss(&h_true, &DecisionVector::new(vec![D1]), &spec).unwrap(),
            0.0
        );
        // rejecting a true hypothesis costs a + l = 1
        assert_eq!(
            loss(&h_true, &DecisionVector::new(vec![D2]), &spec).unwrap(),
            1.0
        );
        // leaving a true alternative undecided costs b
        assert_eq!(
            loss(&k_true, &DecisionVector::new(vec![D3]), &spec).unwrap(),
            0.4
        );
        assert_eq!(
            loss(&k_true, &DecisionVector::new(vec![D2]), &spec).unwrap(),
            0.0
        );
        assert_eq!(
            loss(&k_true, &DecisionVector::new(vec![D1]), &spec).unwrap(),
            1.0
        );
    }

    #[test]
    fn loss_is_additive() {
        let spec = LossSpec::identity(0.3).unwrap();
        let truth = TruthAssignment::from_flags(&[true, true, false]).unwrap();
        let d = DecisionVector::new(vec![D2, D3, D3]);
        // 1.0 (false rejection) + 0.3 (h undecided) + 0.3 (k undecided)
        assert_eq!(loss(&truth, &d, &spec).unwrap(), 1.6);
    }

    #[test]
    fn zero_b_reduces_to_directional_errors() {
        let spec = LossSpec::identity(0.0).unwrap();
        let truth = TruthAssignment::from_flags(&[true, false, true]).unwrap();
        let d = DecisionVector::new(vec![D2, D1, D3]);
        assert_eq!(loss(&truth, &d, &spec).unwrap(), 2.0);
    }

    #[test]
    fn decomposition_holds_exactly() {
        let spec = LossSpec::identity(0.3).unwrap();
        let truth = TruthAssignment::from_flags(&[true, true, false]).unwrap();
        let d = DecisionVector::new(vec![D2, D3, D3]);
        assert!(decomposition_check(&[(truth, d)], &spec).unwrap());
    }

    #[test]
    fn decomposition_requires_identity_mode() {
        let spec = LossSpec::new(0.5, 0.5, 0.4, 0.5).unwrap();
        assert!(matches!(
            decomposition_check(&[], &spec),
            Err(Error::IdentityModeRequired)
        ));
    }

    #[test]
    fn loss_spec_validation() {
        assert!(matches!(
            LossSpec::new(-0.1, 0.0, 0.0, 0.0),
            Err(Error::DomainError { .. })
        ));
        assert!(matches!(
            LossSpec::identity(1.5),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(LossSpec::identity(0.5).unwrap().is_identity_mode());
        assert!(!LossSpec::new(0.5, 0.5, 0.4, 0.5).unwrap().is_identity_mode());
    }

    fn boundary_model(m: usize) -> McModel {
        McModel::GaussianMeans(
            GaussianMeansModel::with_zero_boundary(vec![0.0; m], 1).unwrap(),
        )
    }

    #[test]
    fn deep_interior_is_all_significant() {
        let model = McModel::GaussianMeans(
            GaussianMeansModel::with_zero_boundary(vec![-10.0; 3], 1).unwrap(),
        );
        let procedure = McProcedure::SingleStep {
            calibration: CalibrationKind::Bonferroni,
            alpha: 0.05,
        };
        let spec = LossSpec::identity(0.5).unwrap();
        let report = monte_carlo_risk(&model, &procedure, &spec, 500, 9).unwrap();
        // p_h sits at 1 - Phi(-10 + noise), far above the D1 threshold
        assert_eq!(report.fwer.value, 0.0);
        assert_eq!(report.expected_g.value, 0.0);
        assert_eq!(report.risk.value, 0.0);
        assert_eq!(report.decomposition_exact, Some(true));
    }

    #[test]
    fn single_replicate_risk_equals_its_loss() {
        let model = boundary_model(4);
        let procedure = McProcedure::SingleStep {
            calibration: CalibrationKind::Bonferroni,
            alpha: 0.05,
        };
        let spec = LossSpec::identity(0.25).unwrap();
        let report = monte_carlo_risk(&model, &procedure, &spec, 1, 123).unwrap();

        let gm = GaussianMeansModel::with_zero_boundary(vec![0.0; 4], 1).unwrap();
        let means = simulate_sample_means(&gm, 123, 0);
        let family = gaussian_means_pvalues(&gm, &means).unwrap();
        let thresholds = calibrate(CalibrationKind::Bonferroni, 0.05, 4).unwrap();
        let d = single_step(&family, &thresholds).unwrap();
        let w = loss(&gm.truth(), &d, &spec).unwrap();
        assert_eq!(report.risk.value, w);
        assert_eq!(report.risk.std_error, 0.0);
    }

    #[test]
    fn boundary_fwer_stays_under_alpha_band() {
        let model = boundary_model(2);
        let procedure = McProcedure::SingleStep {
            calibration: CalibrationKind::Bonferroni,
            alpha: 0.05,
        };
        let spec = LossSpec::identity(0.5).unwrap();
        let report = monte_carlo_risk(&model, &procedure, &spec, 20_000, 31).unwrap();
        assert!(report.fwer.value <= 0.05 + 3.0 * report.fwer.std_error);
        assert_eq!(report.decomposition_exact, Some(true));
    }

    #[test]
    fn reports_are_seed_deterministic() {
        let model = boundary_model(3);
        let procedure = McProcedure::SingleStep {
            calibration: CalibrationKind::Bonferroni,
            alpha: 0.05,
        };
        let spec = LossSpec::identity(0.5).unwrap();
        let a = monte_carlo_risk(&model, &procedure, &spec, 10_000, 77).unwrap();
        let b = monte_carlo_risk(&model, &procedure, &spec, 10_000, 77).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn reports_do_not_depend_on_worker_count() {
        let model = boundary_model(3);
        let procedure = McProcedure::SingleStep {
            calibration: CalibrationKind::Bonferroni,
            alpha: 0.05,
        };
        let spec = LossSpec::identity(0.5).unwrap();
        let single = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| monte_carlo_risk(&model, &procedure, &spec, 9_000, 5).unwrap());
        let several = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| monte_carlo_risk(&model, &procedure, &spec, 9_000, 5).unwrap());
        assert_eq!(single, several);
    }

    #[test]
    fn nested_closure_requires_nested_model() {
        let model = boundary_model(2);
        let procedure = McProcedure::NestedClosure { alpha: 0.05 };
        let spec = LossSpec::identity(0.5).unwrap();
        assert!(matches!(
            monte_carlo_risk(&model, &procedure, &spec, 10, 0),
            Err(Error::InvalidConfiguration(_))
        ));
    }

    #[test]
    fn nested_closure_runs_on_nested_model() {
        let nested = NestedNormalModel::new(0.5, 1, 0.0, 1.0).unwrap();
        let model = McModel::Nested(nested);
        let spec = LossSpec::identity(0.5).unwrap();
        let report = monte_carlo_risk(
            &model,
            &McProcedure::NestedClosure { alpha: 0.05 },
            &spec,
            5_000,
            13,
        )
        .unwrap();
        assert!(report.fwer.value <= 0.05 + 3.0 * report.fwer.std_error);
    }
}
