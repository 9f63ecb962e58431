//! Bayesian linear-regression output head with Thompson sampling.
//!
//! Each action owns an independent Gaussian posterior over its output weights
//! `w_a`, obtained from the conjugate update under an isotropic prior
//! `N(0, prior_variance · I)` and known observation noise. Action-value means
//! and spreads are then estimated from a finite number of posterior draws.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, invalid, Error, Result};

/// Jitter added to the diagonal when a covariance fails to factorise.
pub const CHOLESKY_JITTER: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlrPrior {
    pub weight_dim: usize,
    pub prior_variance: f64,
    pub noise_variance: f64,
}

impl Default for BlrPrior {
    fn default() -> Self {
        Self {
            weight_dim: 1,
            prior_variance: 1.0,
            noise_variance: 1.0,
        }
    }
}

impl BlrPrior {
    pub fn new(weight_dim: usize, prior_variance: f64, noise_variance: f64) -> Result<Self> {
        let prior = Self {
            weight_dim,
            prior_variance,
            noise_variance,
        };
        prior.validate()?;
        Ok(prior)
    }

    pub fn validate(&self) -> Result<()> {
        if self.weight_dim == 0 {
            return Err(invalid("weight_dim must be positive"));
        }
        for (name, v) in [
            ("prior_variance", self.prior_variance),
            ("noise_variance", self.noise_variance),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(invalid(format!("{name} must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Per-action Gaussian posterior over output weights.
#[derive(Debug, Clone, PartialEq)]
pub struct BlrPosterior {
    prior: BlrPrior,
    means: Vec<DVector<f64>>,
    covariances: Vec<DMatrix<f64>>,
    /// Lower factors with `L Lᵀ = Σ`, used for sampling.
    factors: Vec<DMatrix<f64>>,
}

/// Sample mean and standard deviation of the action values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionStats {
    pub mu: Vec<f64>,
    pub sigma: Vec<f64>,
}

/// Cholesky factor of a symmetric positive semi-definite matrix.
///
/// Pivots that vanish (relative to the matrix scale) produce a zero column,
/// so rank-deficient covariances such as the zero matrix still factor.
/// Returns `None` for matrices that are not PSD.
pub fn psd_cholesky(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let n = a.nrows();
    if a.ncols() != n {
        return None;
    }
    let scale = (0..n).map(|i| a[(i, i)].abs()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-13 * scale;
    let mut l = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d > eps {
            let pivot = d.sqrt();
            l[(j, j)] = pivot;
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                l[(i, j)] = s / pivot;
            }
        } else if d >= -eps {
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s -= l[(i, k)] * l[(j, k)];
                }
                if s.abs() > 1e-9 * scale.sqrt() {
                    return None;
                }
            }
        } else {
            return None;
        }
    }
    Some(l)
}

fn sampling_factor(cov: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if let Some(l) = psd_cholesky(cov) {
        return Ok(l);
    }
    let n = cov.nrows();
    let jittered = cov + DMatrix::<f64>::identity(n, n) * CHOLESKY_JITTER;
    psd_cholesky(&jittered).ok_or_else(|| {
        Error::Numerical("posterior covariance is not positive semi-definite".into())
    })
}

impl BlrPosterior {
    /// Posterior with no observations: zero mean, `prior_variance · I`.
    pub fn from_prior(prior: BlrPrior, n_actions: usize) -> Result<Self> {
        prior.validate()?;
        let f = prior.weight_dim;
        let cov = DMatrix::<f64>::identity(f, f) * prior.prior_variance;
        let factor = DMatrix::<f64>::identity(f, f) * prior.prior_variance.sqrt();
        Ok(Self {
            prior,
            means: vec![DVector::zeros(f); n_actions],
            covariances: vec![cov; n_actions],
            factors: vec![factor; n_actions],
        })
    }

    /// Assemble a posterior from explicit moments.
    pub fn from_parts(
        prior: BlrPrior,
        means: Vec<DVector<f64>>,
        covariances: Vec<DMatrix<f64>>,
    ) -> Result<Self> {
        prior.validate()?;
        let f = prior.weight_dim;
        if means.len() != covariances.len() {
            return Err(invalid("one mean and one covariance per action"));
        }
        if means.iter().any(|m| m.len() != f)
            || covariances.iter().any(|c| c.nrows() != f || c.ncols() != f)
        {
            return Err(invalid(format!("moments must have dimension {f}")));
        }
        let factors = covariances.iter().map(sampling_factor).collect::<Result<_>>()?;
        Ok(Self {
            prior,
            means,
            covariances,
            factors,
        })
    }

    pub fn prior(&self) -> &BlrPrior {
        &self.prior
    }

    pub fn n_actions(&self) -> usize {
        self.means.len()
    }

    pub fn mean(&self, action: usize) -> &DVector<f64> {
        &self.means[action]
    }

    pub fn covariance(&self, action: usize) -> &DMatrix<f64> {
        &self.covariances[action]
    }

    /// Replace the means while keeping the covariances.
    pub fn set_means(&mut self, means: Vec<DVector<f64>>) -> Result<()> {
        if means.len() != self.means.len()
            || means.iter().any(|m| m.len() != self.prior.weight_dim)
        {
            return Err(invalid("replacement means have the wrong shape"));
        }
        self.means = means;
        Ok(())
    }

    /// `sqrt(φᵀ Σ_a φ)`, the exact predictive spread of `w_aᵀφ`.
    pub fn predictive_sd(&self, action: usize, phi: &[f64]) -> f64 {
        let phi = DVector::from_column_slice(phi);
        (phi.dot(&(&self.covariances[action] * &phi))).max(0.0).sqrt()
    }

    fn check_action(&self, action: usize) -> Result<()> {
        if action >= self.means.len() {
            return Err(invalid(format!(
                "action {action} out of range for {} actions",
                self.means.len()
            )));
        }
        Ok(())
    }

    fn check_phi(&self, phi: &[f64]) -> Result<()> {
        if phi.len() != self.prior.weight_dim {
            return Err(invalid(format!(
                "feature length {} does not match weight_dim {}",
                phi.len(),
                self.prior.weight_dim
            )));
        }
        ensure_finite(phi, "phi")
    }
}

/// Conjugate batch update from `(action, features)` observations and targets.
///
/// For action `a` with design matrix `X_a` and targets `y_a`:
/// `Σ_a = (X_aᵀX_a / σ² + I / σ_p²)⁻¹` and `m_a = Σ_a X_aᵀ y_a / σ²`.
/// Actions without observations keep the prior.
pub fn blr_update(
    prior: BlrPrior,
    n_actions: usize,
    features: &[(usize, Vec<f64>)],
    targets: &[f64],
) -> Result<BlrPosterior> {
    prior.validate()?;
    if features.len() != targets.len() {
        return Err(invalid(format!(
            "{} feature rows but {} targets",
            features.len(),
            targets.len()
        )));
    }
    let f = prior.weight_dim;
    let mut gram = vec![DMatrix::<f64>::zeros(f, f); n_actions];
    let mut moment = vec![DVector::<f64>::zeros(f); n_actions];
    let mut seen = vec![false; n_actions];
    for ((action, x), &y) in features.iter().zip(targets) {
        let a = *action;
        if a >= n_actions {
            return Err(invalid(format!("action {a} out of range for {n_actions} actions")));
        }
        if x.len() != f {
            return Err(invalid(format!("feature row of length {} (expected {f})", x.len())));
        }
        ensure_finite(x, "features")?;
        if !y.is_finite() {
            return Err(Error::Numerical(format!("target {y} is not finite")));
        }
        seen[a] = true;
        let g = &mut gram[a];
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0.0 {
                continue;
            }
            for (j, &xj) in x.iter().enumerate() {
                g[(i, j)] += xi * xj;
            }
            moment[a][i] += xi * y;
        }
    }

    let mut posterior = BlrPosterior::from_prior(prior, n_actions)?;
    let noise = prior.noise_variance;
    for a in 0..n_actions {
        if !seen[a] {
            continue;
        }
        let mut precision = &gram[a] / noise;
        for i in 0..f {
            precision[(i, i)] += 1.0 / prior.prior_variance;
        }
        let chol = precision.clone().cholesky().ok_or_else(|| {
            Error::Numerical(format!("precision matrix of action {a} is not positive definite"))
        })?;
        let mut cov = chol.inverse();
        // exact symmetry
        for i in 0..f {
            for j in (i + 1)..f {
                let s = 0.5 * (cov[(i, j)] + cov[(j, i)]);
                cov[(i, j)] = s;
                cov[(j, i)] = s;
            }
        }
        let factor = match cov.clone().cholesky() {
            Some(c) => c.l(),
            None => {
                let jittered = &cov + DMatrix::<f64>::identity(f, f) * CHOLESKY_JITTER;
                jittered.cholesky().map(|c| c.l()).ok_or_else(|| {
                    Error::Numerical(format!("posterior covariance of action {a} is not SPD"))
                })?
            }
        };
        posterior.means[a] = &cov * &moment[a] / noise;
        posterior.covariances[a] = cov;
        posterior.factors[a] = factor;
    }
    Ok(posterior)
}

/// One draw `m_a + L_a z` with `z ~ N(0, I)`.
pub fn thompson_sample<R: Rng + ?Sized>(
    posterior: &BlrPosterior,
    action: usize,
    rng: &mut R,
) -> Result<DVector<f64>> {
    posterior.check_action(action)?;
    let f = posterior.prior.weight_dim;
    let z = DVector::<f64>::from_iterator(f, (0..f).map(|_| rng.sample(StandardNormal)));
    Ok(&posterior.means[action] + &posterior.factors[action] * z)
}

/// Posterior-mean action value `m_aᵀφ`.
pub fn q_value(posterior: &BlrPosterior, action: usize, phi: &[f64]) -> Result<f64> {
    posterior.check_action(action)?;
    posterior.check_phi(phi)?;
    Ok(posterior.means[action].as_slice().iter().zip(phi).map(|(m, p)| m * p).sum())
}

/// Sample mean and unbiased sample spread of `w_{a,i}ᵀφ` over `n_samples`
/// Thompson draws per action.
///
/// Draws consume the generator exactly as repeated [`thompson_sample`] calls
/// would (action-major, `weight_dim` normals per draw); the projection is
/// computed as `m_aᵀφ + zᵀ(L_aᵀφ)` to avoid forming each weight vector.
pub fn action_stats<R: Rng + ?Sized>(
    posterior: &BlrPosterior,
    phi: &[f64],
    n_samples: usize,
    rng: &mut R,
) -> Result<ActionStats> {
    if n_samples < 2 {
        return Err(invalid("at least two samples are needed for a variance"));
    }
    posterior.check_phi(phi)?;
    let f = posterior.prior.weight_dim;
    let phi_vec = DVector::from_column_slice(phi);
    let mut mu = Vec::with_capacity(posterior.n_actions());
    let mut sigma = Vec::with_capacity(posterior.n_actions());
    let mut draws = vec![0.0; n_samples];
    for a in 0..posterior.n_actions() {
        let centre = posterior.means[a].dot(&phi_vec);
        let projected = posterior.factors[a].tr_mul(&phi_vec);
        for q in draws.iter_mut() {
            let mut noise = 0.0;
            for k in 0..f {
                let z: f64 = rng.sample(StandardNormal);
                noise += z * projected[k];
            }
            *q = centre + noise;
        }
        let mean = draws.iter().sum::<f64>() / n_samples as f64;
        let var = draws.iter().map(|q| (q - mean) * (q - mean)).sum::<f64>()
            / (n_samples - 1) as f64;
        mu.push(mean);
        sigma.push(var.sqrt());
    }
    Ok(ActionStats { mu, sigma })
}
