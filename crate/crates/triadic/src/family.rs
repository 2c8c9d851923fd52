//! Domain types for hypothesis/alternative couples.
//!
//! A family is M couples (h_i, k_i), each carrying the pair of p-values
//! (p_h, p_k), plus a structure describing which intersections of hypotheses
//! and alternatives are non-empty. All types are immutable value objects;
//! indices are 0-based internally and converted to 1-based at I/O boundaries.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};

/// |p_h + p_k - 1| tolerance under which a pair counts as complementary.
pub const COMPLEMENTARITY_TOL: f64 = 1e-12;

/// Largest family size for which the exhaustive free-combination check runs.
pub const FREE_COMBINATION_LIMIT: usize = 24;

/// One couple's evidence: the p-values of its hypothesis and alternative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PValuePair {
    p_h: f64,
    p_k: f64,
}

impl PValuePair {
    /// Builds a pair, checking both values lie in [0, 1].
    pub fn new(p_h: f64, p_k: f64) -> Result<Self> {
        for (what, v) in [("p_h", p_h), ("p_k", p_k)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::ProbabilityOutOfRange { what, value: v });
            }
        }
        Ok(Self { p_h, p_k })
    }

    /// Builds the complementary pair (p_h, 1 - p_h).
    pub fn complementary(p_h: f64) -> Result<Self> {
        Self::new(p_h, 1.0 - p_h)
    }

    pub fn p_h(&self) -> f64 {
        self.p_h
    }

    pub fn p_k(&self) -> f64 {
        self.p_k
    }

    /// True when p_h + p_k = 1 within [`COMPLEMENTARITY_TOL`].
    pub fn is_complementary(&self) -> bool {
        (self.p_h + self.p_k - 1.0).abs() <= COMPLEMENTARITY_TOL
    }
}

/// Feasibility oracle: given disjoint index sets (J1, J2), reports whether
/// the intersection of {h_i : i in J1} and {k_j : j in J2} is non-empty.
pub type FeasibilityOracle = Arc<dyn Fn(&BTreeSet<usize>, &BTreeSet<usize>) -> bool + Send + Sync>;

/// How hypotheses and alternatives combine across couples.
#[derive(Clone)]
pub enum FamilyStructure {
    /// Every truth pattern is realizable; all disjoint intersections are
    /// non-empty.
    FreeCombination,
    /// Arbitrary structure described by a feasibility oracle. The oracle is
    /// only ever consulted on disjoint index sets.
    Oracle(FeasibilityOracle),
}

impl fmt::Debug for FamilyStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FamilyStructure::FreeCombination => f.write_str("FreeCombination"),
            FamilyStructure::Oracle(_) => f.write_str("Oracle(..)"),
        }
    }
}

/// M couples plus the structure of their intersections.
#[derive(Debug, Clone)]
pub struct HypothesisFamily {
    pairs: Vec<PValuePair>,
    structure: FamilyStructure,
}

impl HypothesisFamily {
    pub fn new(pairs: Vec<PValuePair>, structure: FamilyStructure) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::DegenerateFamily);
        }
        Ok(Self { pairs, structure })
    }

    /// Family with free-combination structure.
    pub fn free_combination(pairs: Vec<PValuePair>) -> Result<Self> {
        Self::new(pairs, FamilyStructure::FreeCombination)
    }

    pub fn m(&self) -> usize {
        self.pairs.len()
    }

    pub fn pairs(&self) -> &[PValuePair] {
        &self.pairs
    }

    pub fn structure(&self) -> &FamilyStructure {
        &self.structure
    }

    pub fn is_free_combination_structure(&self) -> bool {
        matches!(self.structure, FamilyStructure::FreeCombination)
    }

    pub fn all_complementary(&self) -> bool {
        self.pairs.iter().all(PValuePair::is_complementary)
    }

    /// 0-based indices of pairs violating complementarity.
    pub fn non_complementary_indices(&self) -> Vec<usize> {
        self.pairs
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.is_complementary())
            .map(|(i, _)| i)
            .collect()
    }

    /// Error for the first non-complementary pair, if any.
    pub(crate) fn require_complementary(&self) -> Result<()> {
        match self.non_complementary_indices().first() {
            None => Ok(()),
            Some(&i) => Err(Error::ComplementarityViolation {
                couple: i + 1,
                sum: self.pairs[i].p_h() + self.pairs[i].p_k(),
            }),
        }
    }

    /// Consults the structure on disjoint (J1, J2).
    pub fn is_feasible(&self, j1: &BTreeSet<usize>, j2: &BTreeSet<usize>) -> bool {
        debug_assert!(j1.is_disjoint(j2), "oracle consulted on overlapping sets");
        match &self.structure {
            FamilyStructure::FreeCombination => true,
            FamilyStructure::Oracle(oracle) => oracle(j1, j2),
        }
    }
}

/// Per-couple label of the three-decision rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Decision {
    /// D1: significant decision that the alternative is false, i.e. the
    /// hypothesis is true.
    #[serde(rename = "D1")]
    SignificantlyTrue,
    /// D2: significant decision that the hypothesis is false.
    #[serde(rename = "D2")]
    SignificantlyFalse,
    /// D3: both the hypothesis and the alternative are accepted.
    #[serde(rename = "D3")]
    Uncertain,
}

impl Decision {
    pub fn label(&self) -> &'static str {
        match self {
            Decision::SignificantlyTrue => "D1",
            Decision::SignificantlyFalse => "D2",
            Decision::Uncertain => "D3",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "D1" => Some(Decision::SignificantlyTrue),
            "D2" => Some(Decision::SignificantlyFalse),
            "D3" => Some(Decision::Uncertain),
            _ => None,
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One decision per couple.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DecisionVector(Vec<Decision>);

impl DecisionVector {
    pub fn new(decisions: Vec<Decision>) -> Self {
        Self(decisions)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Decision {
        self.0[i]
    }

    pub fn iter(&self) -> impl Iterator<Item = Decision> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Decision] {
        &self.0
    }

    /// Size of the uncertainty zone G.
    pub fn uncertain_count(&self) -> usize {
        self.0
            .iter()
            .filter(|d| matches!(d, Decision::Uncertain))
            .count()
    }
}

impl FromIterator<Decision> for DecisionVector {
    fn from_iter<T: IntoIterator<Item = Decision>>(iter: T) -> Self {
        Self(iter.into_iter().collect())
    }
}

/// The index sets U, U-bar, L, L-bar and G = U \ L.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartitionSets {
    m: usize,
    u: BTreeSet<usize>,
    u_bar: BTreeSet<usize>,
    l: BTreeSet<usize>,
    l_bar: BTreeSet<usize>,
    g: BTreeSet<usize>,
}

impl PartitionSets {
    /// Builds the five sets from the rejected-hypothesis set U-bar and the
    /// rejected-alternative set L; the rest follow by complement and
    /// difference, so the type invariants hold by construction.
    pub fn from_rejections(m: usize, u_bar: BTreeSet<usize>, l: BTreeSet<usize>) -> Self {
        debug_assert!(u_bar.iter().all(|&i| i < m));
        debug_assert!(l.iter().all(|&i| i < m));
        let u: BTreeSet<usize> = (0..m).filter(|i| !u_bar.contains(i)).collect();
        let l_bar: BTreeSet<usize> = (0..m).filter(|i| !l.contains(i)).collect();
        let g: BTreeSet<usize> = u.difference(&l).copied().collect();
        Self {
            m,
            u,
            u_bar,
            l,
            l_bar,
            g,
        }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Hypotheses accepted.
    pub fn u(&self) -> &BTreeSet<usize> {
        &self.u
    }

    /// Hypotheses rejected (significant falsehood conclusions).
    pub fn u_bar(&self) -> &BTreeSet<usize> {
        &self.u_bar
    }

    /// Alternatives rejected (significant truth conclusions).
    pub fn l(&self) -> &BTreeSet<usize> {
        &self.l
    }

    /// Alternatives accepted.
    pub fn l_bar(&self) -> &BTreeSet<usize> {
        &self.l_bar
    }

    /// Uncertainty zone G = U \ L.
    pub fn g(&self) -> &BTreeSet<usize> {
        &self.g
    }

    /// True when L is contained in U, so U-bar, L and G split the indices
    /// into three disjoint parts.
    pub fn is_coherent(&self) -> bool {
        self.l.is_subset(&self.u)
    }
}

/// Which couples have a true hypothesis (the rest have a true alternative).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TruthAssignment {
    m: usize,
    true_hypotheses: BTreeSet<usize>,
}

impl TruthAssignment {
    /// Truth pattern from the set of indices whose hypothesis is true.
    pub fn new(m: usize, true_hypotheses: BTreeSet<usize>) -> Result<Self> {
        if m == 0 {
            return Err(Error::DegenerateFamily);
        }
        if true_hypotheses.iter().any(|&i| i >= m) {
            return Err(Error::InvalidTruthAssignment);
        }
        Ok(Self {
            m,
            true_hypotheses,
        })
    }

    /// Validates that the two sets partition {0..m-1} before constructing.
    pub fn from_sets(
        m: usize,
        true_hypotheses: BTreeSet<usize>,
        true_alternatives: BTreeSet<usize>,
    ) -> Result<Self> {
        let disjoint = true_hypotheses.is_disjoint(&true_alternatives);
        let complete = true_hypotheses.len() + true_alternatives.len() == m
            && true_hypotheses
                .union(&true_alternatives)
                .all(|&i| i < m);
        if !disjoint || !complete {
            return Err(Error::InvalidTruthAssignment);
        }
        Self::new(m, true_hypotheses)
    }

    /// Truth pattern from per-couple flags (`true` means the hypothesis holds).
    pub fn from_flags(flags: &[bool]) -> Result<Self> {
        let set = flags
            .iter()
            .enumerate()
            .filter(|(_, &t)| t)
            .map(|(i, _)| i)
            .collect();
        Self::new(flags.len(), set)
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn hypothesis_true(&self, i: usize) -> bool {
        self.true_hypotheses.contains(&i)
    }

    pub fn true_hypotheses(&self) -> &BTreeSet<usize> {
        &self.true_hypotheses
    }

    pub fn true_alternatives(&self) -> BTreeSet<usize> {
        (0..self.m)
            .filter(|i| !self.true_hypotheses.contains(i))
            .collect()
    }
}

/// Exhaustively checks the free-combination condition: for every subset P of
/// the couple indices, the intersection of the hypotheses in P with the
/// alternatives outside P must be non-empty.
pub fn is_free_combination(family: &HypothesisFamily) -> Result<bool> {
    let m = family.m();
    if m > FREE_COMBINATION_LIMIT {
        return Err(Error::SizeLimitExceeded {
            m,
            limit: FREE_COMBINATION_LIMIT,
        });
    }
    if family.is_free_combination_structure() {
        return Ok(true);
    }
    for pattern in 0u64..(1u64 << m) {
        let mut j1 = BTreeSet::new();
        let mut j2 = BTreeSet::new();
        for i in 0..m {
            if pattern & (1 << i) != 0 {
                j1.insert(i);
            } else {
                j2.insert(i);
            }
        }
        if !family.is_feasible(&j1, &j2) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Reads the index-set partition off a decision vector:
/// L = {i : D1}, U-bar = {i : D2}, G = {i : D3}.
pub fn partition_from_decisions(d: &DecisionVector) -> PartitionSets {
    let mut u_bar = BTreeSet::new();
    let mut l = BTreeSet::new();
    for (i, decision) in d.iter().enumerate() {
        match decision {
            Decision::SignificantlyTrue => {
                l.insert(i);
            }
            Decision::SignificantlyFalse => {
                u_bar.insert(i);
            }
            Decision::Uncertain => {}
        }
    }
    PartitionSets::from_rejections(d.len(), u_bar, l)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(items: &[usize]) -> BTreeSet<usize> {
        items.iter().copied().collect()
    }

    #[test]
    fn pair_rejects_out_of_range_values() {
        assert!(matches!(
            PValuePair::new(1.2, 0.5),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(matches!(
            PValuePair::new(0.5, -0.1),
            Err(Error::ProbabilityOutOfRange { .. })
        ));
        assert!(PValuePair::new(0.0, 1.0).is_ok());
    }

    #[test]
    fn complementary_constructor_is_flagged() {
        let p = PValuePair::complementary(0.3).unwrap();
        assert!(p.is_complementary());
        let q = PValuePair::new(0.3, 0.3).unwrap();
        assert!(!q.is_complementary());
    }

    #[test]
    fn free_combination_structure_is_free() {
        let pairs = vec![PValuePair::complementary(0.5).unwrap(); 3];
        let family = HypothesisFamily::free_combination(pairs).unwrap();
        assert!(is_free_combination(&family).unwrap());
    }

    #[test]
    fn nested_oracle_fails_free_combination() {
        // Two nested one-sided couples: h_i holds for theta >= theta_i with
        // theta_1 < theta_2, so h_2 and k_1 cannot hold together.
        let oracle: FeasibilityOracle =
            Arc::new(|j1, j2| !(j1.contains(&1) && j2.contains(&0)));
        let pairs = vec![PValuePair::complementary(0.5).unwrap(); 2];
        let family =
            HypothesisFamily::new(pairs, FamilyStructure::Oracle(oracle)).unwrap();
        assert!(!is_free_combination(&family).unwrap());
    }

    #[test]
    fn singleton_oracle_family_is_free() {
        let oracle: FeasibilityOracle = Arc::new(|_, _| true);
        let pairs = vec![PValuePair::complementary(0.2).unwrap()];
        let family =
            HypothesisFamily::new(pairs, FamilyStructure::Oracle(oracle)).unwrap();
        assert!(is_free_combination(&family).unwrap());
    }

    #[test]
    fn free_combination_respects_size_limit() {
        let oracle: FeasibilityOracle = Arc::new(|_, _| true);
        let pairs = vec![PValuePair::complementary(0.5).unwrap(); 25];
        let family =
            HypothesisFamily::new(pairs, FamilyStructure::Oracle(oracle)).unwrap();
        assert!(matches!(
            is_free_combination(&family),
            Err(Error::SizeLimitExceeded { m: 25, limit: 24 })
        ));
    }

    #[test]
    fn partition_maps_labels_directly() {
        let d = DecisionVector::new(vec![
            Decision::SignificantlyTrue,
            Decision::SignificantlyFalse,
            Decision::Uncertain,
        ]);
        let p = partition_from_decisions(&d);
        assert_eq!(p.l(), &set(&[0]));
        assert_eq!(p.u_bar(), &set(&[1]));
        assert_eq!(p.g(), &set(&[2]));
        assert_eq!(p.u(), &set(&[0, 2]));
        assert!(p.is_coherent());
    }

    #[test]
    fn all_uncertain_partition() {
        let d = DecisionVector::new(vec![Decision::Uncertain; 4]);
        let p = partition_from_decisions(&d);
        assert_eq!(p.g().len(), 4);
        assert_eq!(p.u().len(), 4);
        assert!(p.l().is_empty());
    }

    #[test]
    fn all_rejected_partition() {
        let d = DecisionVector::new(vec![Decision::SignificantlyFalse; 4]);
        let p = partition_from_decisions(&d);
        assert_eq!(p.u_bar().len(), 4);
        assert!(p.g().is_empty());
        assert!(p.l().is_empty());
    }

    #[test]
    fn truth_assignment_must_partition() {
        assert!(TruthAssignment::from_sets(2, set(&[0]), set(&[1])).is_ok());
        assert!(matches!(
            TruthAssignment::from_sets(2, set(&[0]), set(&[0])),
            Err(Error::InvalidTruthAssignment)
        ));
        assert!(matches!(
            TruthAssignment::from_sets(2, set(&[0]), set(&[])),
            Err(Error::InvalidTruthAssignment)
        ));
        let t = TruthAssignment::from_flags(&[true, false]).unwrap();
        assert!(t.hypothesis_true(0));
        assert!(!t.hypothesis_true(1));
        assert_eq!(t.true_alternatives(), set(&[1]));
    }
}
