//! Finite-difference derivatives of sampled densities, used by the
//! monotonicity checks.

use crate::grid::Density;

/// Fornberg's finite-difference weights: `w[d][j]` approximates the `d`-th
/// derivative at `z` from samples at `x[j]`, for `d = 0 ..= max_order`.
pub fn fornberg_weights(z: f64, x: &[f64], max_order: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut c = vec![vec![0.0; n]; max_order + 1];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = x[0] - z;
    for i in 1..n {
        let mn = i.min(max_order);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = x[i] - z;
        for j in 0..i {
            let c3 = x[i] - x[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// Number of nodes in the one-sided stencil at `x = 0`.
pub const BOUNDARY_STENCIL: usize = 9;

/// `y^{(order)}(0)` from a one-sided stencil over the first nodes.
pub fn derivative_at_zero(y: &Density, order: usize) -> f64 {
    let h = y.grid().spacing();
    let nodes: Vec<f64> = (0..BOUNDARY_STENCIL).map(|i| i as f64).collect();
    let w = fornberg_weights(0.0, &nodes, order);
    let scale = h.powi(order as i32);
    w[order]
        .iter()
        .zip(y.values())
        .map(|(c, v)| c * v)
        .sum::<f64>()
        / scale
}

/// Smallest value of `(−1)^m Δ^m y_i / h^m` over all nodes where the forward
/// difference fits. Complete monotonicity up to order `m` means this is `>= 0`.
pub fn min_signed_forward_difference(y: &Density, m: usize) -> f64 {
    let h = y.grid().spacing();
    let mut diff = y.values().to_vec();
    for _ in 0..m {
        diff = diff.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let sign = if m.is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = h.powi(m as i32);
    diff.iter()
        .map(|d| sign * d / scale)
        .fold(f64::INFINITY, f64::min)
}

/// Both sides of the derivative-at-zero recurrence linking `next = T(prev)`:
///
/// ```text
/// (−1)^m next^{(m)}(0) = (1/m) Σ_{k<m} [(−1)^k prev^{(k)}(0)] [(−1)^{m−1−k} prev^{(m−1−k)}(0)]
/// ```
///
/// Returns `(lhs, rhs)`.
pub fn zero_derivative_recurrence(prev: &Density, next: &Density, m: usize) -> (f64, f64) {
    assert!(m >= 1, "recurrence starts at m = 1");
    let sign = |k: usize| if k.is_multiple_of(2) { 1.0 } else { -1.0 };
    let signed: Vec<f64> = (0..m)
        .map(|k| sign(k) * derivative_at_zero(prev, k))
        .collect();
    let rhs = (0..m).map(|k| signed[k] * signed[m - 1 - k]).sum::<f64>() / m as f64;
    let lhs = sign(m) * derivative_at_zero(next, m);
    (lhs, rhs)
}
