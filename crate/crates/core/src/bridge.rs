//! Sampling from the learned coupling and its time marginals.
//!
//! Endpoints come straight from the conditional mixture. Intermediate
//! times use the OU bridge posterior, pinning each new knot on the
//! previous knot and the sampled endpoint — the learned process is an
//! h-transform of the reference, and h-transforms share the reference's
//! bridges, so this is exact and free of discretization error.
//!
//! An independent route simulates the controlled SDE with the analytic
//! drift b(m - x) + grad_scale · ∇ log ν_t(x); the two routes are checked
//! against each other in the test suites.

use std::io::Write;

use rand::Rng as _;
use rand_distr::StandardNormal;

use crate::data::PointCloud;
use crate::error::{Error, Result};
use crate::linalg::logsumexp;
use crate::ou::OUParams;
use crate::potential::PotentialModel;
use crate::rng::{self, rng_from_seed};

/// A single sampled path on a time grid over [0, T].
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    times: Vec<f64>,
    /// Row-major (knot, dimension) storage.
    points: Vec<f64>,
    d: usize,
}

impl Trajectory {
    pub fn new(times: Vec<f64>, points: Vec<f64>, d: usize) -> Result<Self> {
        if times.len() < 2 || points.len() != times.len() * d {
            return Err(Error::InvalidParameter(
                "trajectory needs at least two knots and matching point storage".into(),
            ));
        }
        if times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "trajectory times must be strictly increasing".into(),
            ));
        }
        Ok(Self { times, points, d })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    pub fn point(&self, knot: usize) -> &[f64] {
        &self.points[knot * self.d..(knot + 1) * self.d]
    }
}

/// For each source point, draw one endpoint from the conditional coupling.
/// Returns the aligned (X, Y) clouds.
pub fn sample_pairs(
    model: &PotentialModel,
    ou: &OUParams,
    source: &PointCloud,
    seed: u64,
) -> Result<(PointCloud, PointCloud)> {
    if source.is_empty() {
        return Err(Error::EmptyInput("source cloud"));
    }
    let d = source.dim();
    let mut ys = Vec::with_capacity(source.len() * d);
    for (idx, x) in source.rows().enumerate() {
        let cond = model.conditional(ou, x)?;
        let y = cond.sample(1, rng::derive_indexed(seed, "pair", idx as u64))?;
        ys.extend_from_slice(y.row(0));
    }
    let y_cloud = PointCloud::new(d, ys, "coupled")?;
    Ok((source.clone(), y_cloud))
}

/// Sample one path of the learned process at `n_knots` uniform times:
/// endpoint first from the conditional mixture, then sequential Markov
/// pinning of the interior knots through the OU bridge posterior.
pub fn sample_trajectory(
    model: &PotentialModel,
    ou: &OUParams,
    x0: &[f64],
    n_knots: usize,
    seed: u64,
) -> Result<Trajectory> {
    if n_knots < 2 {
        return Err(Error::InvalidParameter(
            "a trajectory needs at least 2 knots".into(),
        ));
    }
    let d = ou.d();
    let horizon = ou.horizon;
    let cond = model.conditional(ou, x0)?;
    let endpoint_cloud = cond.sample(1, rng::derive_seed(seed, "endpoint"))?;
    let endpoint = endpoint_cloud.row(0).to_vec();

    let times: Vec<f64> = (0..n_knots)
        .map(|i| horizon * i as f64 / (n_knots - 1) as f64)
        .collect();
    let mut points = Vec::with_capacity(n_knots * d);
    points.extend_from_slice(x0);

    let mut rng = rng_from_seed(rng::derive_seed(seed, "interior"));
    let mut current = x0.to_vec();
    let mut current_time = 0.0;
    for &t in times.iter().take(n_knots - 1).skip(1) {
        // The process is time-homogeneous: the bridge from (current_time,
        // current) to (T, endpoint) restated on the remaining horizon.
        let remaining = ou.with_horizon(horizon - current_time);
        let (mean, var) = remaining.bridge_posterior(t - current_time, &current, &endpoint)?;
        let sd = var.sqrt();
        current = mean
            .iter()
            .map(|&mu| mu + sd * rng.sample::<f64, _>(StandardNormal))
            .collect();
        current_time = t;
        points.extend_from_slice(&current);
    }
    points.extend_from_slice(&endpoint);
    Trajectory::new(times, points, d)
}

/// Batch of trajectories, one per source row, each with its own derived
/// seed so batches parallelize without sharing RNG state.
pub fn sample_trajectories(
    model: &PotentialModel,
    ou: &OUParams,
    source: &PointCloud,
    n_knots: usize,
    seed: u64,
) -> Result<Vec<Trajectory>> {
    source
        .rows()
        .enumerate()
        .map(|(i, x0)| {
            sample_trajectory(
                model,
                ou,
                x0,
                n_knots,
                rng::derive_indexed(seed, "trajectory", i as u64),
            )
        })
        .collect()
}

/// Drift of the controlled process at (t, x):
/// b(m - x) + grad_scale · ∇ log ν_t(x), where
/// ν_t(x) = ∫ ν_T(y) q_{T-t}(y | x) dy is the time-evolved potential.
///
/// The h-transform-consistent gradient scale is ε; passing 1 gives the
/// unscaled reading. Valid for 0 ≤ t < T — the gradient blows up at the
/// pinned terminal time.
///
/// With a mixture potential the convolution is a Gaussian integral per
/// component: for s = T - t and diagonal scales s_ki,
///   A_ki = (1/s_ki + 1/σ_s² - 1/σ_T²) / ε,
///   h_ki(x) = (r_ki/s_ki + m_s(x)_i/σ_s²) / ε,
/// and ∇ log ν_t(x) = e^{-bs}/(ε σ_s²) · (Σ_k ω_k(x) A_k⁻¹ h_k(x) - m_s(x))
/// with softmax weights ω_k over the per-component log-masses.
pub fn drift_field(
    model: &PotentialModel,
    ou: &OUParams,
    grad_scale: f64,
    t: f64,
    x: &[f64],
) -> Result<Vec<f64>> {
    let d = ou.d();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if !(0.0..ou.horizon).contains(&t) {
        return Err(Error::TimeOutOfRange {
            t,
            horizon: ou.horizon,
        });
    }
    if model.eps() != ou.eps || model.d() != d {
        return Err(Error::InvalidParameter(
            "potential and reference process disagree on eps or dimension".into(),
        ));
    }
    let eps = ou.eps;
    let s = ou.horizon - t;
    let kern_s = ou.kernel_at(s)?;
    let kern_end = ou.kernel_at(ou.horizon)?;
    let sigma2_s = kern_s.sigma2_t;
    let sigma2_end = kern_end.sigma2_t;
    let m_s = ou.mean_t(&kern_s, x)?;
    // 1/σ_s² - 1/σ_T² ≥ 0 because σ² is nondecreasing in time.
    let beta = 1.0 / sigma2_s - 1.0 / sigma2_end;

    let k = model.k();
    let mut log_mass = Vec::with_capacity(k);
    // Σ_i A_ki⁻¹ h_ki per component, kept for the gradient.
    let mut shifted = vec![0.0; k * d];
    let log_weights: Vec<f64> = {
        let lse = logsumexp(model.weights_logits());
        model.weights_logits().iter().map(|l| l - lse).collect()
    };
    for comp in 0..k {
        let r = model.mean_of(comp);
        let u = model.log_diag_of(comp);
        let mut log_term = log_weights[comp];
        for i in 0..d {
            let scale = u[i].exp();
            let a_ki = (1.0 / scale + beta) / eps;
            let h_ki = (r[i] / scale + m_s[i] / sigma2_s) / eps;
            shifted[comp * d + i] = h_ki / a_ki;
            // ½ h²/A - ½ r²/(ε s) - ½ ln(ε s A)
            log_term += 0.5 * h_ki * h_ki / a_ki
                - 0.5 * r[i] * r[i] / (eps * scale)
                - 0.5 * (eps * scale * a_ki).ln();
        }
        log_mass.push(log_term);
    }
    let lse = logsumexp(&log_mass);
    let prefactor = kern_s.mean_coeff / (eps * sigma2_s);

    let mut drift = Vec::with_capacity(d);
    for i in 0..d {
        let mut weighted = 0.0;
        for comp in 0..k {
            weighted += (log_mass[comp] - lse).exp() * shifted[comp * d + i];
        }
        let score = prefactor * (weighted - m_s[i]);
        drift.push(ou.b * (ou.m[i] - x[i]) + grad_scale * score);
    }
    Ok(drift)
}

/// Write trajectories as CSV with columns t, x_1..x_d, trajectory_id.
pub fn write_trajectories_csv<W: Write>(paths: &[Trajectory], out: &mut W) -> Result<()> {
    let d = paths.first().map(|p| p.dim()).unwrap_or(0);
    let names: Vec<String> = (1..=d).map(|i| format!("x_{i}")).collect();
    writeln!(out, "t,{},trajectory_id", names.join(","))?;
    for (id, path) in paths.iter().enumerate() {
        for (knot, &t) in path.times().iter().enumerate() {
            let cells: Vec<String> = path.point(knot).iter().map(|v| format!("{v}")).collect();
            writeln!(out, "{t},{},{id}", cells.join(","))?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (PotentialModel, OUParams) {
        let eps = 0.5;
        let ou = OUParams::isotropic(0.4, 0.2, eps, 1.0, 2).unwrap();
        let model = PotentialModel::new(
            2,
            eps,
            vec![0.1, -0.4],
            vec![1.0, 0.5, -1.0, -0.5],
            vec![-0.2, 0.1, 0.0, -0.5],
        )
        .unwrap();
        (model, ou)
    }

    #[test]
    fn pairs_align_with_source_and_are_deterministic() {
        let (model, ou) = setup();
        let source = PointCloud::new(2, vec![0.0, 0.0, 1.0, -1.0, 0.5, 0.5], "src").unwrap();
        let (x1, y1) = sample_pairs(&model, &ou, &source, 77).unwrap();
        let (_, y2) = sample_pairs(&model, &ou, &source, 77).unwrap();
        assert_eq!(x1.as_flat(), source.as_flat());
        assert_eq!(y1.as_flat(), y2.as_flat());
        assert_eq!(y1.len(), source.len());
    }

    #[test]
    fn near_degenerate_components_pin_pairs_to_conditional_means() {
        let eps = 0.5;
        let ou = OUParams::isotropic(0.0, 0.0, eps, 1.0, 1).unwrap();
        let model = PotentialModel::new(1, eps, vec![0.0], vec![2.0], vec![-500.0]).unwrap();
        let source = PointCloud::new(1, vec![0.3, -0.7], "src").unwrap();
        let (_, y) = sample_pairs(&model, &ou, &source, 5).unwrap();
        for (x, yv) in source.rows().zip(y.rows()) {
            let cond = model.conditional(&ou, x).unwrap();
            assert!((yv[0] - cond.mean_of(0)[0]).abs() < 1e-80);
        }
    }

    #[test]
    fn two_knot_trajectory_is_just_the_pair() {
        let (model, ou) = setup();
        let path = sample_trajectory(&model, &ou, &[0.2, -0.1], 2, 3).unwrap();
        assert_eq!(path.len(), 2);
        assert_eq!(path.point(0), &[0.2, -0.1]);
        assert_eq!(path.times(), &[0.0, 1.0]);
    }

    #[test]
    fn trajectory_endpoints_are_pinned_and_grid_uniform() {
        let (model, ou) = setup();
        let path = sample_trajectory(&model, &ou, &[0.2, -0.1], 6, 42).unwrap();
        assert_eq!(path.len(), 6);
        assert_eq!(path.point(0), &[0.2, -0.1]);
        for (i, &t) in path.times().iter().enumerate() {
            assert!((t - i as f64 * 0.2).abs() < 1e-15);
        }
        // Same seed, same path; endpoint equals the conditional draw.
        let again = sample_trajectory(&model, &ou, &[0.2, -0.1], 6, 42).unwrap();
        assert_eq!(path, again);
    }

    #[test]
    fn neutral_potential_leaves_pure_ou_drift() {
        // With r = 0 and S = σ_T² I the adjusted potential corresponds to a
        // constant Schrödinger potential, so the drift correction vanishes.
        let eps = 0.5;
        let ou = OUParams::isotropic(0.7, 0.3, eps, 1.0, 2).unwrap();
        let sigma2_end = ou.kernel_at(1.0).unwrap().sigma2_t;
        let model = PotentialModel::new(
            2,
            eps,
            vec![0.0],
            vec![0.0, 0.0],
            vec![sigma2_end.ln(), sigma2_end.ln()],
        )
        .unwrap();
        for &t in &[0.0, 0.3, 0.9] {
            for &x in &[[0.4, -1.0], [2.0, 0.0]] {
                let drift = drift_field(&model, &ou, eps, t, &x).unwrap();
                for i in 0..2 {
                    let pure = ou.b * (ou.m[i] - x[i]);
                    assert!(
                        (drift[i] - pure).abs() < 1e-3,
                        "t={t}, x={x:?}, dim {i}: {} vs {pure}",
                        drift[i]
                    );
                }
            }
        }
    }

    #[test]
    fn drift_rejects_terminal_time() {
        let (model, ou) = setup();
        assert!(drift_field(&model, &ou, 0.5, 1.0, &[0.0, 0.0]).is_err());
        assert!(drift_field(&model, &ou, 0.5, -0.1, &[0.0, 0.0]).is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let (model, ou) = setup();
        let source = PointCloud::new(2, vec![0.0, 0.0, 1.0, 1.0], "src").unwrap();
        let paths = sample_trajectories(&model, &ou, &source, 3, 1).unwrap();
        let mut buf = Vec::new();
        write_trajectories_csv(&paths, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,x_1,x_2,trajectory_id");
        assert_eq!(lines.count(), 6);
        assert!(text.lines().last().unwrap().ends_with(",1"));
    }
}
