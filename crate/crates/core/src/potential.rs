//! The learnable adjusted Schrödinger potential.
//!
//! The potential is a K-component Gaussian mixture
//! v(y) = Σ_k α_k N(y; r_k, ε S_k) with diagonal S_k. Against the OU
//! transition kernel, every quantity the dual objective needs comes in
//! closed form:
//!
//! * the normalizing constant c(x) = ∫ e^{y·a(x)} v(y) dy with
//!   a(x) = m_T(x) / (ε σ_T²), which is a weighted sum of Gaussian
//!   moment-generating factors
//!   α̃_k(x) = α_k exp(r_k·a + ε/2 · aᵀ S_k a);
//! * the conditional coupling π(y | x), again a Gaussian mixture with
//!   weights α̃_k(x)/c(x), means r_k + S_k m_T(x)/σ_T², covariances ε S_k;
//! * the exact gradient of the empirical dual loss
//!   mean_j log c(Z_j) - mean_i log v(Y_i).
//!
//! All densities are handled in log space; mixture weights live as softmax
//! logits and diagonal scales as log-values so the parameter space is
//! unconstrained.

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::data::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::{self, logsumexp};
use crate::ou::OUParams;
use crate::rng::rng_from_seed;

/// Mixture parameters θ = {(logit α_k, r_k, diag S_k)}.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialModel {
    d: usize,
    k: usize,
    eps: f64,
    /// K logits; weights are their softmax.
    weights_logits: Vec<f64>,
    /// K × d component means, row-major.
    means: Vec<f64>,
    /// K × d logs of the S_k diagonals, row-major.
    log_diag: Vec<f64>,
}

/// Gradient of the dual loss, shaped like the model parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct PotentialGrad {
    pub weights_logits: Vec<f64>,
    pub means: Vec<f64>,
    pub log_diag: Vec<f64>,
}

impl PotentialGrad {
    fn zeros(k: usize, d: usize) -> Self {
        Self {
            weights_logits: vec![0.0; k],
            means: vec![0.0; k * d],
            log_diag: vec![0.0; k * d],
        }
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out =
            Vec::with_capacity(self.weights_logits.len() + self.means.len() + self.log_diag.len());
        out.extend_from_slice(&self.weights_logits);
        out.extend_from_slice(&self.means);
        out.extend_from_slice(&self.log_diag);
        out
    }
}

impl PotentialModel {
    pub fn new(
        d: usize,
        eps: f64,
        weights_logits: Vec<f64>,
        means: Vec<f64>,
        log_diag: Vec<f64>,
    ) -> Result<Self> {
        let k = weights_logits.len();
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter("K and d must be at least 1".into()));
        }
        if eps <= 0.0 || !eps.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "eps must be positive, got {eps}"
            )));
        }
        if means.len() != k * d || log_diag.len() != k * d {
            return Err(Error::InvalidParameter(format!(
                "parameter shapes must be K={k} logits and K*d={} means/log_diag entries",
                k * d
            )));
        }
        for (i, v) in weights_logits
            .iter()
            .chain(means.iter())
            .chain(log_diag.iter())
            .enumerate()
        {
            if !v.is_finite() {
                return Err(Error::NonFinite {
                    context: "model parameters",
                    index: i,
                });
            }
        }
        Ok(Self {
            d,
            k,
            eps,
            weights_logits,
            means,
            log_diag,
        })
    }

    /// Default initialization: zero logits, unit diagonals, means drawn
    /// from the Gaussian fit of a target batch (mean + cov^{1/2} ξ).
    pub fn init_from_target(
        k: usize,
        eps: f64,
        target_batch: &PointCloud,
        seed: u64,
    ) -> Result<Self> {
        let d = target_batch.dim();
        let rows: Vec<&[f64]> = target_batch.rows().collect();
        let (mu, cov) = linalg::mean_and_cov(&rows, d);
        let factor = linalg::cholesky_psd(&cov, d)?;
        let mut rng = rng_from_seed(seed);
        let mut means = Vec::with_capacity(k * d);
        for _ in 0..k {
            let noise: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
            let shaped = linalg::lower_tri_matvec(&factor, d, &noise);
            means.extend(mu.iter().zip(shaped.iter()).map(|(m, z)| m + z));
        }
        Self::new(d, eps, vec![0.0; k], means, vec![0.0; k * d])
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn weights_logits(&self) -> &[f64] {
        &self.weights_logits
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn log_diag(&self) -> &[f64] {
        &self.log_diag
    }

    pub fn mean_of(&self, k: usize) -> &[f64] {
        &self.means[k * self.d..(k + 1) * self.d]
    }

    pub fn log_diag_of(&self, k: usize) -> &[f64] {
        &self.log_diag[k * self.d..(k + 1) * self.d]
    }

    /// Normalized mixture weights α = softmax(logits).
    pub fn weights(&self) -> Vec<f64> {
        linalg::softmax(&self.weights_logits)
    }

    /// Total number of scalar parameters.
    pub fn param_len(&self) -> usize {
        self.k + 2 * self.k * self.d
    }

    /// Copy parameters into a flat buffer (logits, means, log_diag).
    pub fn write_params(&self, out: &mut [f64]) {
        let (k, kd) = (self.k, self.k * self.d);
        out[..k].copy_from_slice(&self.weights_logits);
        out[k..k + kd].copy_from_slice(&self.means);
        out[k + kd..k + 2 * kd].copy_from_slice(&self.log_diag);
    }

    /// Replace parameters from a flat buffer laid out as in [`Self::write_params`].
    pub fn read_params(&mut self, params: &[f64]) {
        let (k, kd) = (self.k, self.k * self.d);
        self.weights_logits.copy_from_slice(&params[..k]);
        self.means.copy_from_slice(&params[k..k + kd]);
        self.log_diag.copy_from_slice(&params[k + kd..k + 2 * kd]);
    }

    fn check_point(&self, y: &[f64]) -> Result<()> {
        if y.len() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: y.len(),
            });
        }
        if let Some(i) = y.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: "input point",
                index: i,
            });
        }
        Ok(())
    }

    fn check_compatible(&self, ou: &OUParams) -> Result<()> {
        if ou.d() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: ou.d(),
            });
        }
        if ou.eps != self.eps {
            return Err(Error::InvalidParameter(format!(
                "eps mismatch between potential ({}) and reference process ({})",
                self.eps, ou.eps
            )));
        }
        Ok(())
    }

    /// Per-component log terms of log v(y): log α_k + log N(y; r_k, ε S_k).
    fn log_v_terms(&self, y: &[f64]) -> Vec<f64> {
        let log_alpha = self.log_weights();
        let half_log_2pi = 0.5 * (2.0 * std::f64::consts::PI).ln();
        (0..self.k)
            .map(|k| {
                let r = self.mean_of(k);
                let u = self.log_diag_of(k);
                let mut quad = 0.0;
                let mut log_det = 0.0;
                for i in 0..self.d {
                    let var = self.eps * u[i].exp();
                    log_det += (self.eps.ln()) + u[i];
                    quad += (y[i] - r[i]) * (y[i] - r[i]) / var;
                }
                log_alpha[k] - (self.d as f64) * half_log_2pi - 0.5 * log_det - 0.5 * quad
            })
            .collect()
    }

    fn log_weights(&self) -> Vec<f64> {
        let lse = logsumexp(&self.weights_logits);
        self.weights_logits.iter().map(|l| l - lse).collect()
    }

    /// log v(y): the mixture log-density of the adjusted potential.
    pub fn log_v(&self, y: &[f64]) -> Result<f64> {
        self.check_point(y)?;
        Ok(logsumexp(&self.log_v_terms(y)))
    }

    /// The exponent tilt a(x) = m_T(x) / (ε σ_T²) together with
    /// m_T(x) / σ_T², which the conditional means use directly.
    fn tilt(&self, ou: &OUParams, x: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
        let kernel = ou.kernel_at(ou.horizon)?;
        if kernel.sigma2_t <= 0.0 {
            return Err(Error::DegenerateKernel { t: ou.horizon });
        }
        let mean_end = ou.mean_t(&kernel, x)?;
        let shift: Vec<f64> = mean_end.iter().map(|v| v / kernel.sigma2_t).collect();
        let a: Vec<f64> = shift.iter().map(|v| v / self.eps).collect();
        Ok((a, shift))
    }

    /// Per-component log terms of log c(x):
    /// log α_k + r_k·a + (ε/2) aᵀ S_k a.
    fn log_c_terms(&self, a: &[f64]) -> Vec<f64> {
        let log_alpha = self.log_weights();
        (0..self.k)
            .map(|k| {
                let r = self.mean_of(k);
                let u = self.log_diag_of(k);
                let linear = linalg::dot(r, a);
                let quad: f64 = (0..self.d).map(|i| u[i].exp() * a[i] * a[i]).sum();
                log_alpha[k] + linear + 0.5 * self.eps * quad
            })
            .collect()
    }

    /// log c(x) = log ∫ e^{y·a(x)} v(y) dy, the exact Gaussian integral.
    pub fn log_c(&self, ou: &OUParams, x: &[f64]) -> Result<f64> {
        self.check_compatible(ou)?;
        self.check_point(x)?;
        let (a, _) = self.tilt(ou, x)?;
        Ok(logsumexp(&self.log_c_terms(&a)))
    }

    /// The exact conditional coupling π(· | x) as a Gaussian mixture.
    pub fn conditional(&self, ou: &OUParams, x: &[f64]) -> Result<ConditionalMixture> {
        self.check_compatible(ou)?;
        self.check_point(x)?;
        let (a, shift) = self.tilt(ou, x)?;
        let terms = self.log_c_terms(&a);
        let log_c = logsumexp(&terms);
        let tilde_weights: Vec<f64> = terms.iter().map(|t| (t - log_c).exp()).collect();
        let mut cond_means = Vec::with_capacity(self.k * self.d);
        let mut cond_vars = Vec::with_capacity(self.k * self.d);
        for k in 0..self.k {
            let r = self.mean_of(k);
            let u = self.log_diag_of(k);
            for i in 0..self.d {
                let s = u[i].exp();
                cond_means.push(r[i] + s * shift[i]);
                cond_vars.push(self.eps * s);
            }
        }
        Ok(ConditionalMixture {
            x: x.to_vec(),
            d: self.d,
            tilde_weights,
            cond_means,
            cond_vars,
            log_c,
        })
    }

    /// Empirical dual loss mean_j log c(Z_j) − mean_i log v(Y_i).
    pub fn empirical_loss(
        &self,
        ou: &OUParams,
        batch_z: &PointCloud,
        batch_y: &PointCloud,
    ) -> Result<f64> {
        Ok(self.loss_inner(ou, batch_z, batch_y, false)?.0)
    }

    /// Loss together with its exact analytic gradient.
    pub fn loss_and_grad(
        &self,
        ou: &OUParams,
        batch_z: &PointCloud,
        batch_y: &PointCloud,
    ) -> Result<(f64, PotentialGrad)> {
        let (loss, grad) = self.loss_inner(ou, batch_z, batch_y, true)?;
        Ok((loss, grad.expect("gradient requested")))
    }

    #[allow(clippy::needless_range_loop)] // parallel K- and d-indexed blocks
    fn loss_inner(
        &self,
        ou: &OUParams,
        batch_z: &PointCloud,
        batch_y: &PointCloud,
        with_grad: bool,
    ) -> Result<(f64, Option<PotentialGrad>)> {
        self.check_compatible(ou)?;
        if batch_z.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: batch_z.dim(),
            });
        }
        if batch_y.dim() != self.d {
            return Err(Error::DimensionMismatch {
                expected: self.d,
                got: batch_y.dim(),
            });
        }
        let n_z = batch_z.len() as f64;
        let n_y = batch_y.len() as f64;
        let mut grad = with_grad.then(|| PotentialGrad::zeros(self.k, self.d));

        // Source side: mean_j log c(Z_j). Responsibilities w_k(z) drive the
        // gradient: d log c / d logit_q = w_q - α_q, d/d r_ki = w_k a_i,
        // d/d u_ki = w_k (ε/2) a_i² s_ki.
        let mut loss_c = 0.0;
        for (j, z) in batch_z.rows().enumerate() {
            let (a, _) = self.tilt(ou, z)?;
            let terms = self.log_c_terms(&a);
            let log_c = logsumexp(&terms);
            if !log_c.is_finite() {
                return Err(Error::NonFinite {
                    context: "log_c over source batch",
                    index: j,
                });
            }
            loss_c += log_c;
            if let Some(g) = grad.as_mut() {
                for k in 0..self.k {
                    let w = (terms[k] - log_c).exp() / n_z;
                    g.weights_logits[k] += w;
                    let u = self.log_diag_of(k);
                    for i in 0..self.d {
                        g.means[k * self.d + i] += w * a[i];
                        g.log_diag[k * self.d + i] += w * 0.5 * self.eps * a[i] * a[i] * u[i].exp();
                    }
                }
            }
        }
        loss_c /= n_z;

        // Target side: -mean_i log v(Y_i) with responsibilities ρ_k(y):
        // d log v / d logit_q = ρ_q - α_q, d/d r_ki = ρ_k (y_i - r_ki)/(ε s_ki),
        // d/d u_ki = ρ_k ((y_i - r_ki)²/(ε s_ki) - 1)/2.
        let mut loss_v = 0.0;
        for (idx, y) in batch_y.rows().enumerate() {
            let terms = self.log_v_terms(y);
            let log_v = logsumexp(&terms);
            if !log_v.is_finite() {
                return Err(Error::NonFinite {
                    context: "log_v over target batch",
                    index: idx,
                });
            }
            loss_v += log_v;
            if let Some(g) = grad.as_mut() {
                for k in 0..self.k {
                    let rho = (terms[k] - log_v).exp() / n_y;
                    g.weights_logits[k] -= rho;
                    let r = self.mean_of(k);
                    let u = self.log_diag_of(k);
                    for i in 0..self.d {
                        let var = self.eps * u[i].exp();
                        let centered = y[i] - r[i];
                        g.means[k * self.d + i] -= rho * centered / var;
                        g.log_diag[k * self.d + i] -= rho * 0.5 * (centered * centered / var - 1.0);
                    }
                }
            }
        }
        loss_v /= n_y;

        // The α_q terms of the two softmax-through-log-weight paths cancel
        // (both sides carry -α_q once per averaged sample), so the logits
        // gradient above is already complete.
        Ok((loss_c - loss_v, grad))
    }
}

/// The conditional law π(· | x): an x-dependent Gaussian mixture.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalMixture {
    pub x: Vec<f64>,
    d: usize,
    /// Normalized weights α̃_k(x) / c(x).
    pub tilde_weights: Vec<f64>,
    /// K × d conditional component means.
    pub cond_means: Vec<f64>,
    /// K × d diagonal conditional variances (= ε S_k).
    pub cond_vars: Vec<f64>,
    /// log c(x).
    pub log_c: f64,
}

impl ConditionalMixture {
    pub fn d(&self) -> usize {
        self.d
    }

    pub fn k(&self) -> usize {
        self.tilde_weights.len()
    }

    pub fn mean_of(&self, k: usize) -> &[f64] {
        &self.cond_means[k * self.d..(k + 1) * self.d]
    }

    pub fn var_of(&self, k: usize) -> &[f64] {
        &self.cond_vars[k * self.d..(k + 1) * self.d]
    }

    /// Draw n i.i.d. points; deterministic for a given seed.
    pub fn sample(&self, n: usize, seed: u64) -> Result<PointCloud> {
        if n == 0 {
            return Err(Error::EmptyInput("requested zero conditional samples"));
        }
        let mut rng = rng_from_seed(seed);
        let mut data = Vec::with_capacity(n * self.d);
        for _ in 0..n {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut pick = self.k() - 1;
            for (k, w) in self.tilde_weights.iter().enumerate() {
                acc += w;
                if u < acc {
                    pick = k;
                    break;
                }
            }
            let mean = self.mean_of(pick);
            let var = self.var_of(pick);
            for i in 0..self.d {
                let z: f64 = rng.sample(StandardNormal);
                data.push(mean[i] + var[i].sqrt() * z);
            }
        }
        PointCloud::new(self.d, data, "conditional")
    }
}
