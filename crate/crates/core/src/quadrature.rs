//! Composite quadrature on uniformly spaced samples.
//!
//! Each interval `[x_k, x_{k+1}]` of a run is integrated exactly for the
//! polynomial through the nearest `min(m, 6)` nodes of the run, centred where
//! possible. Runs of up to 6 nodes therefore reduce to the closed
//! Newton–Cotes rules (trapezoid, Simpson, 3/8, Boole, 6 point), and longer
//! runs get a sixth-order rule whose weights are exactly 1 away from the ends
//! and [`END_WEIGHTS`] at both ends once the run has [`LONG_RUN`] nodes.
//!
//! The same panels drive [`integral`], [`tail_integrals`] and the per-length
//! weights used by the autoconvolution, so every integral in the crate shares
//! one set of weights.

/// Widest stencil used by a panel.
const STENCIL: usize = 6;

/// Runs at least this long have the fixed end weights.
pub const LONG_RUN: usize = 12;

/// End weights of the rule once a run has at least [`LONG_RUN`] nodes.
pub const END_WEIGHTS: [f64; 6] = [
    459.0 / 1440.0,
    1982.0 / 1440.0,
    944.0 / 1440.0,
    1746.0 / 1440.0,
    1333.0 / 1440.0,
    1456.0 / 1440.0,
];

/// `PANELS[s - 2][o]`: weights over the stencil of `s` nodes for the interval
/// starting at stencil node `o`.
const PANELS: [&[&[f64]]; 5] = [
    &[&[0.5, 0.5]],
    &[
        &[5.0 / 12.0, 8.0 / 12.0, -1.0 / 12.0],
        &[-1.0 / 12.0, 8.0 / 12.0, 5.0 / 12.0],
    ],
    &[
        &[9.0 / 24.0, 19.0 / 24.0, -5.0 / 24.0, 1.0 / 24.0],
        &[-1.0 / 24.0, 13.0 / 24.0, 13.0 / 24.0, -1.0 / 24.0],
        &[1.0 / 24.0, -5.0 / 24.0, 19.0 / 24.0, 9.0 / 24.0],
    ],
    &[
        &[251.0 / 720.0, 646.0 / 720.0, -264.0 / 720.0, 106.0 / 720.0, -19.0 / 720.0],
        &[-19.0 / 720.0, 346.0 / 720.0, 456.0 / 720.0, -74.0 / 720.0, 11.0 / 720.0],
        &[11.0 / 720.0, -74.0 / 720.0, 456.0 / 720.0, 346.0 / 720.0, -19.0 / 720.0],
        &[-19.0 / 720.0, 106.0 / 720.0, -264.0 / 720.0, 646.0 / 720.0, 251.0 / 720.0],
    ],
    &[
        &[
            475.0 / 1440.0,
            1427.0 / 1440.0,
            -798.0 / 1440.0,
            482.0 / 1440.0,
            -173.0 / 1440.0,
            27.0 / 1440.0,
        ],
        &[
            -27.0 / 1440.0,
            637.0 / 1440.0,
            1022.0 / 1440.0,
            -258.0 / 1440.0,
            77.0 / 1440.0,
            -11.0 / 1440.0,
        ],
        &[
            11.0 / 1440.0,
            -93.0 / 1440.0,
            802.0 / 1440.0,
            802.0 / 1440.0,
            -93.0 / 1440.0,
            11.0 / 1440.0,
        ],
        &[
            -11.0 / 1440.0,
            77.0 / 1440.0,
            -258.0 / 1440.0,
            1022.0 / 1440.0,
            637.0 / 1440.0,
            -27.0 / 1440.0,
        ],
        &[
            27.0 / 1440.0,
            -173.0 / 1440.0,
            482.0 / 1440.0,
            -798.0 / 1440.0,
            1427.0 / 1440.0,
            475.0 / 1440.0,
        ],
    ],
];

/// Integral of the interpolating polynomial over panel `k` (between nodes `k`
/// and `k + 1`) of a run of `m` nodes, as `(first_node, weights)`.
fn panel(k: usize, m: usize) -> (usize, &'static [f64]) {
    debug_assert!(m >= 2 && k + 1 < m);
    let s = m.min(STENCIL);
    let start = k.saturating_sub(STENCIL / 2 - 1).min(m - s);
    (start, PANELS[s - 2][k - start])
}

/// Unit-spacing weights for a run of `m` nodes.
pub fn run_weights(m: usize) -> Vec<f64> {
    let mut w = vec![0.0; m];
    if m < 2 {
        return w;
    }
    for k in 0..m - 1 {
        let (start, coeffs) = panel(k, m);
        for (t, c) in coeffs.iter().enumerate() {
            w[start + t] += c;
        }
    }
    w
}

/// Weight of node `j` in a run of `m >= LONG_RUN` nodes (unit spacing).
#[inline]
pub fn long_run_weight(j: usize, m: usize) -> f64 {
    debug_assert!(m >= LONG_RUN && j < m);
    let e = END_WEIGHTS.len();
    if j < e {
        END_WEIGHTS[j]
    } else if j >= m - e {
        END_WEIGHTS[m - 1 - j]
    } else {
        1.0
    }
}

/// Weights for a run of `m` nodes with spacing `h`.
pub fn weights(m: usize, h: f64) -> Vec<f64> {
    run_weights(m).into_iter().map(|w| w * h).collect()
}

/// ∫ over the full run of samples.
pub fn integral(values: &[f64], h: f64) -> f64 {
    integral_with(values, h, |_, v| v)
}

/// ∫ of `f(i, values[i])` over the run.
pub fn integral_with<F: Fn(usize, f64) -> f64>(values: &[f64], h: f64, f: F) -> f64 {
    let m = values.len();
    if m < 2 {
        return 0.0;
    }
    let small = if m < LONG_RUN { run_weights(m) } else { Vec::new() };
    let mut acc = 0.0;
    for (j, &v) in values.iter().enumerate() {
        let w = if m >= LONG_RUN {
            long_run_weight(j, m)
        } else {
            small[j]
        };
        acc += w * f(j, v);
    }
    acc * h
}

/// `out[i] = ∫ from node i to the last node`, accumulated right to left one
/// panel at a time. `out[0]` equals [`integral`] up to rounding.
pub fn tail_integrals(values: &[f64], h: f64) -> Vec<f64> {
    let m = values.len();
    let mut out = vec![0.0; m];
    if m < 2 {
        return out;
    }
    let mut acc = 0.0;
    for k in (0..m - 1).rev() {
        let (start, coeffs) = panel(k, m);
        let piece: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(t, c)| c * values[start + t])
            .sum();
        acc += piece * h;
        out[k] = acc;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: &[f64], b: &[f64]) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() < 1e-14)
    }

    #[test]
    fn short_runs_reduce_to_newton_cotes() {
        assert_eq!(run_weights(1), vec![0.0]);
        assert_eq!(run_weights(2), vec![0.5, 0.5]);
        assert!(close(&run_weights(3), &[1.0 / 3.0, 4.0 / 3.0, 1.0 / 3.0]));
        assert!(close(&run_weights(4), &[3.0 / 8.0, 9.0 / 8.0, 9.0 / 8.0, 3.0 / 8.0]));
        let boole: Vec<f64> = [7.0, 32.0, 12.0, 32.0, 7.0].iter().map(|w| w * 4.0 / 90.0).collect();
        assert!(close(&run_weights(5), &boole));
        let six: Vec<f64> = [19.0, 75.0, 50.0, 50.0, 75.0, 19.0]
            .iter()
            .map(|w| w * 5.0 / 288.0)
            .collect();
        assert!(close(&run_weights(6), &six));
    }

    #[test]
    fn panels_integrate_their_stencil_exactly() {
        for (si, table) in PANELS.iter().enumerate() {
            let s = si + 2;
            for (o, w) in table.iter().enumerate() {
                for p in 0..s as i32 {
                    let exact = ((o + 1) as f64).powi(p + 1) / (p + 1) as f64
                        - (o as f64).powi(p + 1) / (p + 1) as f64;
                    let q: f64 = w.iter().enumerate().map(|(t, c)| c * (t as f64).powi(p)).sum();
                    assert!((q - exact).abs() < 1e-12, "s={s} o={o} p={p}");
                }
            }
        }
    }

    #[test]
    fn long_runs_have_unit_interior_and_fixed_ends() {
        for m in LONG_RUN..60 {
            let w = run_weights(m);
            for j in 0..m {
                assert!((w[j] - long_run_weight(j, m)).abs() < 1e-14, "m={m} j={j}");
            }
            let total: f64 = w.iter().sum();
            assert!((total - (m - 1) as f64).abs() < 1e-12);
        }
        let w = run_weights(LONG_RUN - 1);
        assert!((w[5] - 1.0).abs() > 1e-3);
    }

    #[test]
    fn exact_for_quintics() {
        let f = |x: f64| 2.0 - x + 0.5 * x * x - 0.25 * x.powi(3) + 0.1 * x.powi(5);
        let antider = |x: f64| {
            2.0 * x - x * x / 2.0 + x.powi(3) / 6.0 - x.powi(4) / 16.0 + x.powi(6) / 60.0
        };
        for m in 6..40 {
            let h = 0.137;
            let vals: Vec<f64> = (0..m).map(|i| f(i as f64 * h)).collect();
            let b = (m - 1) as f64 * h;
            let exact = antider(b);
            assert!((integral(&vals, h) - exact).abs() < 1e-11 * exact.abs().max(1.0), "m={m}");
            let tails = tail_integrals(&vals, h);
            for (i, t) in tails.iter().enumerate() {
                let want = exact - antider(i as f64 * h);
                assert!((t - want).abs() < 1e-10 * exact.abs().max(1.0), "m={m} i={i}");
            }
        }
    }

    #[test]
    fn tail_at_zero_matches_full_integral() {
        let vals: Vec<f64> = (0..101).map(|i| (-(i as f64) * 0.1).exp()).collect();
        let t = tail_integrals(&vals, 0.1);
        assert!((t[0] - integral(&vals, 0.1)).abs() < 1e-14);
        assert_eq!(t[100], 0.0);
    }

    #[test]
    fn sixth_order_on_exponential() {
        let err = |m: usize| {
            let h = 4.0 / (m - 1) as f64;
            let vals: Vec<f64> = (0..m).map(|i| (-(i as f64) * h).exp()).collect();
            (integral(&vals, h) - (1.0 - (-4.0f64).exp())).abs()
        };
        let order = (err(33) / err(65)).log2();
        assert!(order > 5.5, "order {order}");
    }
}
