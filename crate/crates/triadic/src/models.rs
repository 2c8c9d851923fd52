//! Statistical models that generate complementary p-value pairs.
//!
//! Simulation draws the sample mean directly from its Normal(theta, 1/n)
//! distribution through the inverse CDF, one counter-based stream per
//! (seed, replicate, coordinate), so results are bit-identical regardless of
//! evaluation order.

use crate::error::{Error, Result};
use crate::family::{FamilyStructure, HypothesisFamily, PValuePair, TruthAssignment};
use crate::normal::{std_normal_cdf, std_normal_quantile};
use crate::rng;

/// Fisher z-values are clamped to this magnitude so |r| = 1 stays finite.
pub const ATANH_CLAMP: f64 = 18.0;

/// Independent Gaussian coordinates x_i ~ N(theta_i, 1/n), testing the
/// one-sided couples h_i: theta_i <= b_i vs k_i: theta_i > b_i. Free
/// combination holds by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMeansModel {
    theta: Vec<f64>,
    n: u64,
    null_boundary: Vec<f64>,
}

impl GaussianMeansModel {
    pub fn new(theta: Vec<f64>, n: u64, null_boundary: Vec<f64>) -> Result<Self> {
        if theta.is_empty() {
            return Err(Error::DegenerateFamily);
        }
        if theta.len() != null_boundary.len() {
            return Err(Error::LengthMismatch {
                left: theta.len(),
                right: null_boundary.len(),
            });
        }
        if n == 0 {
            return Err(Error::InsufficientSamples {
                required: 1,
                actual: 0,
            });
        }
        Ok(Self {
            theta,
            n,
            null_boundary,
        })
    }

    /// Boundaries all zero: h_i is theta_i <= 0.
    pub fn with_zero_boundary(theta: Vec<f64>, n: u64) -> Result<Self> {
        let m = theta.len();
        Self::new(theta, n, vec![0.0; m])
    }

    pub fn m(&self) -> usize {
        self.theta.len()
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn null_boundary(&self) -> &[f64] {
        &self.null_boundary
    }

    /// Truth pattern from the parameters; theta_i = b_i counts as a true
    /// hypothesis (closed null).
    pub fn truth(&self) -> TruthAssignment {
        let flags: Vec<bool> = self
            .theta
            .iter()
            .zip(&self.null_boundary)
            .map(|(&t, &b)| t <= b)
            .collect();
        TruthAssignment::from_flags(&flags).expect("model is non-empty")
    }
}

/// Sample means for one replicate, coordinate i drawn as
/// theta_i + quantile(u_{seed,replicate,i}) / sqrt(n).
pub fn simulate_sample_means(model: &GaussianMeansModel, seed: u64, replicate: u64) -> Vec<f64> {
    let sd = 1.0 / (model.n as f64).sqrt();
    model
        .theta
        .iter()
        .enumerate()
        .map(|(i, &theta)| {
            let u = rng::unit_uniform(seed, replicate, i as u64);
            let z = std_normal_quantile(u).expect("unit_uniform stays inside (0, 1)");
            theta + sd * z
        })
        .collect()
}

/// One-sided p-values for observed sample means: large means are evidence
/// against h_i, so p_h = 1 - Phi(sqrt(n) (xbar_i - b_i)) and p_k is its
/// complement. The family carries free-combination structure.
pub fn gaussian_means_pvalues(
    model: &GaussianMeansModel,
    sample_means: &[f64],
) -> Result<HypothesisFamily> {
    if sample_means.len() != model.m() {
        return Err(Error::LengthMismatch {
            left: sample_means.len(),
            right: model.m(),
        });
    }
    let sqrt_n = (model.n as f64).sqrt();
    let pairs = sample_means
        .iter()
        .zip(&model.null_boundary)
        .map(|(&xbar, &b)| {
            let phi = std_normal_cdf(sqrt_n * (xbar - b));
            PValuePair::new(1.0 - phi, phi)
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisFamily::free_combination(pairs)
}

/// A single N(theta, 1) sample of size n, testing the nested one-sided
/// couples h_i: theta >= theta_i vs k_i: theta < theta_i with
/// theta1 < theta2. Free combination fails here: h_2 and k_1 are
/// incompatible.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NestedNormalModel {
    theta: f64,
    n: u64,
    theta1: f64,
    theta2: f64,
}

impl NestedNormalModel {
    pub fn new(theta: f64, n: u64, theta1: f64, theta2: f64) -> Result<Self> {
        if theta1 >= theta2 {
            return Err(Error::InvalidOrdering { theta1, theta2 });
        }
        if n == 0 {
            return Err(Error::InsufficientSamples {
                required: 1,
                actual: 0,
            });
        }
        Ok(Self {
            theta,
            n,
            theta1,
            theta2,
        })
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn theta1(&self) -> f64 {
        self.theta1
    }

    pub fn theta2(&self) -> f64 {
        self.theta2
    }

    /// h_i: theta >= theta_i, with equality counting as true.
    pub fn truth(&self) -> TruthAssignment {
        TruthAssignment::from_flags(&[self.theta >= self.theta1, self.theta >= self.theta2])
            .expect("two couples")
    }

    /// The replicate's sample mean, drawn from N(theta, 1/n).
    pub fn simulate_mean(&self, seed: u64, replicate: u64) -> f64 {
        let u = rng::unit_uniform(seed, replicate, 0);
        let z = std_normal_quantile(u).expect("unit_uniform stays inside (0, 1)");
        self.theta + z / (self.n as f64).sqrt()
    }

    /// Family holding the two p-value pairs at `xbar`, with the nested
    /// feasibility oracle attached.
    pub fn family_at(&self, xbar: f64) -> Result<HypothesisFamily> {
        let pairs = nested_pvalues(self, xbar).to_vec();
        HypothesisFamily::new(pairs, nested_feasibility())
    }
}

/// Feasibility oracle of the nested two-couple problem: only the
/// intersection of h_2 with k_1 is empty.
pub fn nested_feasibility() -> FamilyStructure {
    FamilyStructure::Oracle(std::sync::Arc::new(|j1, j2| {
        !(j1.contains(&1) && j2.contains(&0))
    }))
}

/// One-sided p-values for the nested couples: small means are evidence
/// against h_i: theta >= theta_i, so p_h,i = Phi(sqrt(n) (xbar - theta_i)).
pub fn nested_pvalues(model: &NestedNormalModel, xbar: f64) -> [PValuePair; 2] {
    let sqrt_n = (model.n as f64).sqrt();
    let pair = |threshold: f64| {
        let phi = std_normal_cdf(sqrt_n * (xbar - threshold));
        PValuePair::new(phi, 1.0 - phi).expect("CDF values lie in [0, 1]")
    };
    [pair(model.theta1), pair(model.theta2)]
}

/// Column pairs (i, j) with i < j in the order the edge family uses.
pub fn edge_index_pairs(columns: usize) -> Vec<(usize, usize)> {
    let mut pairs = Vec::with_capacity(columns * columns.saturating_sub(1) / 2);
    for i in 0..columns {
        for j in (i + 1)..columns {
            pairs.push((i, j));
        }
    }
    pairs
}

/// Fisher-transform edge test for one correlation: h: rho <= rho0 vs
/// k: rho > rho0, with atanh values clamped to +-18 so |r| = 1 stays finite.
pub fn fisher_edge_pvalue(r: f64, n_observations: usize, rho0: f64) -> Result<PValuePair> {
    if !(0.0..1.0).contains(&rho0) {
        return Err(Error::DomainError {
            what: "rho0",
            value: rho0,
        });
    }
    if n_observations < 4 {
        return Err(Error::InsufficientSamples {
            required: 4,
            actual: n_observations,
        });
    }
    let clamp = |z: f64| z.clamp(-ATANH_CLAMP, ATANH_CLAMP);
    let z_r = clamp(r.clamp(-1.0, 1.0).atanh());
    let z_0 = clamp(rho0.atanh());
    let stat = ((n_observations - 3) as f64).sqrt() * (z_r - z_0);
    let phi = std_normal_cdf(stat);
    PValuePair::new(1.0 - phi, phi)
}

/// Edge family over all column pairs of a data matrix (rows are
/// observations): one couple per pair (i, j), i < j, in the order given by
/// [`edge_index_pairs`]. The free-combination structure is declared, not
/// verified.
pub fn correlation_edge_pvalues(data: &[Vec<f64>], rho0: f64) -> Result<HypothesisFamily> {
    let n = data.len();
    if n < 4 {
        return Err(Error::InsufficientSamples {
            required: 4,
            actual: n,
        });
    }
    let p = data[0].len();
    for row in data {
        if row.len() != p {
            return Err(Error::LengthMismatch {
                left: row.len(),
                right: p,
            });
        }
    }
    if p < 2 {
        return Err(Error::DegenerateFamily);
    }
    let means: Vec<f64> = (0..p)
        .map(|j| data.iter().map(|row| row[j]).sum::<f64>() / n as f64)
        .collect();
    let mut sq_norms = vec![0.0; p];
    for (j, sq) in sq_norms.iter_mut().enumerate() {
        *sq = data.iter().map(|row| (row[j] - means[j]).powi(2)).sum();
    }
    for (j, &sq) in sq_norms.iter().enumerate() {
        if sq == 0.0 {
            return Err(Error::DegenerateColumn { index: j });
        }
    }
    let pairs = edge_index_pairs(p)
        .into_iter()
        .map(|(i, j)| {
            let cross: f64 = data
                .iter()
                .map(|row| (row[i] - means[i]) * (row[j] - means[j]))
                .sum();
            let r = cross / (sq_norms[i] * sq_norms[j]).sqrt();
            fisher_edge_pvalue(r, n, rho0)
        })
        .collect::<Result<Vec<_>>>()?;
    HypothesisFamily::free_combination(pairs)
}

/// Kolmogorov-Smirnov statistic against Uniform(0, 1). Sorts in place.
pub fn ks_uniform_statistic(samples: &mut [f64]) -> f64 {
    samples.sort_by(|a, b| a.partial_cmp(b).expect("p-values are not NaN"));
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let upper = (i as f64 + 1.0) / n - x;
            let lower = x - i as f64 / n;
            upper.max(lower)
        })
        .fold(0.0, f64::max)
}
