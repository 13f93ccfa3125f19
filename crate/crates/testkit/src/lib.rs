//! Independent numerical oracles backing the test and acceptance suites.
//!
//! Everything in this crate deliberately avoids the closed forms and code
//! paths of the main library: integrals are done by quadrature, optimal
//! transport by an assignment solver, sums by compensated accumulation.
//! Tests compare the fast implementations against these slow routes.

/// Compensated (Kahan-Babuska) summation.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            c += (sum - t) + v;
        } else {
            c += (v - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// Mean of a slice via compensated summation.
pub fn mean(values: &[f64]) -> f64 {
    assert!(!values.is_empty());
    kahan_sum(values.iter().copied()) / values.len() as f64
}

/// Unbiased sample variance via compensated summation.
pub fn variance(values: &[f64]) -> f64 {
    assert!(values.len() > 1);
    let m = mean(values);
    kahan_sum(values.iter().map(|v| (v - m) * (v - m))) / (values.len() - 1) as f64
}

/// log(sum(exp(terms))) by direct summation around the maximum.
pub fn naive_logsumexp(terms: &[f64]) -> f64 {
    let max = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + kahan_sum(terms.iter().map(|t| (t - max).exp())).ln()
}

/// Central finite difference of `f` along coordinate `i` at `x`.
pub fn central_diff(f: &mut dyn FnMut(&[f64]) -> f64, x: &[f64], i: usize, h: f64) -> f64 {
    let mut xp = x.to_vec();
    let mut xm = x.to_vec();
    xp[i] += h;
    xm[i] -= h;
    (f(&xp) - f(&xm)) / (2.0 * h)
}

/// Gauss-Hermite nodes and weights for ∫ f(t) e^{-t²} dt ≈ Σ w_j f(t_j).
///
/// Newton iteration on the Hermite recurrence, nodes in ascending order.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    // pim4 = 1/pi^{1/4}, the normalization of the orthonormal Hermite functions.
    let pim4 = 0.751_125_544_464_943_f64;
    let m = n.div_ceil(2);
    let mut z = 0.0_f64;
    for i in 0..m {
        // Initial guesses for the roots (largest first), from the standard
        // asymptotic expansions.
        z = match i {
            0 => (2.0 * n as f64 + 1.0).sqrt() - 1.85575 * (2.0 * n as f64 + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * (n as f64).powf(0.426) / z,
            2 => 1.86 * z - 0.86 * nodes[n - 1],
            3 => 1.91 * z - 0.91 * nodes[n - 2],
            _ => 2.0 * z - nodes[n - i + 1],
        };
        let mut pp = 0.0;
        for _ in 0..100 {
            // Evaluate the orthonormal Hermite polynomial of degree n at z
            // by upward recurrence; p2/p3 trail by one and two degrees.
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * n as f64).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 {
                break;
            }
        }
        nodes[n - 1 - i] = z;
        nodes[i] = -z;
        weights[n - 1 - i] = 2.0 / (pp * pp);
        weights[i] = weights[n - 1 - i];
    }
    (nodes, weights)
}

/// log ∫ e^{a·y} N(y; mu, var) dy by adaptive Gauss-Hermite quadrature.
///
/// Substituting y = mu + sqrt(2 var) t turns the integral into
/// (1/√π) ∫ e^{a(mu + sqrt(2 var) t)} e^{-t²} dt. Node count doubles until
/// two successive estimates agree to 1e-12 relative. Accumulation happens
/// in log space so large exponents cannot overflow.
pub fn log_integral_exp_linear_gaussian(a: f64, mu: f64, var: f64) -> f64 {
    assert!(var > 0.0, "degenerate Gaussian in quadrature oracle");
    let scale = (2.0 * var).sqrt();
    let mut prev = f64::NAN;
    let mut n = 32;
    loop {
        let (nodes, weights) = gauss_hermite(n);
        let terms: Vec<f64> = nodes
            .iter()
            .zip(weights.iter())
            .filter(|(_, &w)| w > 0.0)
            .map(|(&t, &w)| w.ln() + a * (mu + scale * t))
            .collect();
        let estimate = naive_logsumexp(&terms) - 0.5 * std::f64::consts::PI.ln();
        if prev.is_finite() && (estimate - prev).abs() <= 1e-12 * estimate.abs().max(1.0) {
            return estimate;
        }
        prev = estimate;
        n *= 2;
        assert!(
            n <= 4096,
            "Gauss-Hermite oracle failed to converge (a={a}, mu={mu}, var={var})"
        );
    }
}

/// log ∫ N(y; mu, var) dy over the whole line — sanity form of the above.
pub fn log_gaussian_mass(mu: f64, var: f64) -> f64 {
    log_integral_exp_linear_gaussian(0.0, mu, var)
}

/// Minimum-cost perfect assignment on a square cost matrix (Hungarian
/// algorithm with potentials, O(n³)). Returns the optimal total cost.
///
/// `cost[i][j]` is the cost of assigning row i to column j.
pub fn assignment_cost(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    assert!(n > 0 && cost.iter().all(|row| row.len() == n));
    const INF: f64 = f64::INFINITY;
    // 1-based arrays with a virtual 0 row/column, per the classic formulation.
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    let mut matched_row = vec![0usize; n + 1]; // matched_row[j] = row assigned to column j
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        matched_row[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![INF; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = matched_row[j0];
            let mut delta = INF;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[matched_row[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if matched_row[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            matched_row[j0] = matched_row[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut total = 0.0;
    for j in 1..=n {
        total += cost[matched_row[j] - 1][j - 1];
    }
    total
}

/// Exact 1-D optimal transport cost between equal-size point sets under
/// |x - y|, solved as an assignment problem. Independent of any sorting
/// shortcut.
pub fn ot_1d_by_assignment(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|&x| b.iter().map(|&y| (x - y).abs()).collect())
        .collect();
    assignment_cost(&cost) / a.len() as f64
}
