//! The wealth-exchange operator
//!
//! ```text
//! (Ty)(x) = ∫_x^∞ dr ∫_0^1 du y(ur) y((1−u)r) = ∫_x^∞ (y∗y)(r) / r dr
//! ```
//!
//! applied to sampled densities. The autoconvolution `(y∗y)(r)` is evaluated
//! on the doubled grid `[0, 2 x_max]` (a density truncated at `x_max` convolves
//! to support `[0, 2 x_max]`), divided by `r`, and integrated from the right.

use std::fmt;
use std::str::FromStr;

use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Density;
use crate::quadrature;

/// Largest mass beyond `x_max` tolerated during iteration.
pub const MAX_MASS_DEFECT: f64 = 1e-6;
/// Step used for the finite-difference derivative of the characteristic function.
pub const ODE_FD_STEP: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConvolutionMethod {
    Direct,
    #[default]
    Fft,
}

impl fmt::Display for ConvolutionMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConvolutionMethod::Direct => "direct",
            ConvolutionMethod::Fft => "fft",
        })
    }
}

impl FromStr for ConvolutionMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "direct" => Ok(ConvolutionMethod::Direct),
            "fft" => Ok(ConvolutionMethod::Fft),
            other => Err(format!("unknown convolution method `{other}` (direct|fft)")),
        }
    }
}

/// `(y∗y)(r_k)` for `r_k = k h`, `k = 0 ..= 2(n−1)`.
///
/// Entry `k` integrates `s ↦ y(s) y(r_k − s)` over `[max(0, r_k − x_max),
/// min(r_k, x_max)]` with the crate's quadrature rule for that run length.
/// Entries `1..ORIGIN_NODES`, whose runs are too short for that rule, are
/// integrated exactly for the quintic interpolant of `y` on the first six
/// nodes instead.
pub fn autoconvolve(y: &Density, method: ConvolutionMethod) -> Vec<f64> {
    let v = y.values();
    let raw = match method {
        ConvolutionMethod::Direct => raw_convolution_direct(v),
        ConvolutionMethod::Fft => raw_convolution_fft(v),
    };
    let h = y.grid().spacing();
    let mut conv = apply_end_weights(v, raw, h);
    refine_origin(v, &mut conv, h);
    conv
}

const ORIGIN_NODES: usize = 4;
const ORIGIN_STENCIL: usize = 6;

/// Six-point Gauss–Legendre rule on `[−1, 1]`, exact to degree 11.
const GAUSS_NODES: [f64; 6] = [
    -0.932_469_514_203_152_1,
    -0.661_209_386_466_264_5,
    -0.238_619_186_083_196_9,
    0.238_619_186_083_196_9,
    0.661_209_386_466_264_5,
    0.932_469_514_203_152_1,
];
const GAUSS_WEIGHTS: [f64; 6] = [
    0.171_324_492_379_170_4,
    0.360_761_573_048_138_6,
    0.467_913_934_572_691_0,
    0.467_913_934_572_691_0,
    0.360_761_573_048_138_6,
    0.171_324_492_379_170_4,
];

fn refine_origin(v: &[f64], conv: &mut [f64], h: f64) {
    if v.len() < ORIGIN_STENCIL {
        return;
    }
    let stencil: Vec<f64> = (0..ORIGIN_STENCIL).map(|i| i as f64).collect();
    let interp = |s: f64| -> f64 {
        crate::derivatives::fornberg_weights(s, &stencil, 0)[0]
            .iter()
            .zip(v)
            .map(|(w, y)| w * y)
            .sum()
    };
    for (k, c) in conv.iter_mut().enumerate().take(ORIGIN_NODES).skip(1) {
        let half = k as f64 / 2.0;
        *c = h * half
            * GAUSS_NODES
                .iter()
                .zip(GAUSS_WEIGHTS)
                .map(|(t, w)| {
                    let s = half * (1.0 + t);
                    w * interp(s) * interp(k as f64 - s)
                })
                .sum::<f64>();
    }
}

/// Plain sums `S_k = Σ_j y_j y_{k−j}`.
fn raw_convolution_direct(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    (0..2 * n - 1)
        .map(|k| {
            let lo = k.saturating_sub(n - 1);
            let hi = k - lo;
            (lo..=hi).map(|j| v[j] * v[k - j]).sum()
        })
        .collect()
}

fn raw_convolution_fft(v: &[f64]) -> Vec<f64> {
    let n = v.len();
    let len = (2 * n - 1).next_power_of_two();
    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(len);
    let inverse = planner.plan_fft_inverse(len);
    let mut buf: Vec<Complex64> = v
        .iter()
        .map(|&x| Complex64::new(x, 0.0))
        .chain(std::iter::repeat(Complex64::new(0.0, 0.0)))
        .take(len)
        .collect();
    forward.process(&mut buf);
    for z in buf.iter_mut() {
        *z = *z * *z;
    }
    inverse.process(&mut buf);
    let scale = 1.0 / len as f64;
    buf[..2 * n - 1].iter().map(|z| z.re * scale).collect()
}

/// Turns plain sums into quadrature values by correcting the end weights of
/// each run (the products are symmetric about the run's midpoint).
fn apply_end_weights(v: &[f64], raw: Vec<f64>, h: f64) -> Vec<f64> {
    let n = v.len();
    raw.into_iter()
        .enumerate()
        .map(|(k, s)| {
            let lo = k.saturating_sub(n - 1);
            let hi = k - lo;
            let m = hi - lo + 1;
            if m >= quadrature::LONG_RUN {
                let mut corr = 0.0;
                for (t, w) in quadrature::END_WEIGHTS.iter().enumerate() {
                    corr += (w - 1.0) * v[lo + t] * v[hi - t];
                }
                h * (s + 2.0 * corr)
            } else {
                let w = quadrature::run_weights(m);
                h * (lo..=hi).map(|j| w[j - lo] * v[j] * v[k - j]).sum::<f64>()
            }
        })
        .collect()
}

/// One application of the operator.
pub fn apply_t(y: &Density, method: ConvolutionMethod) -> Density {
    let grid = *y.grid();
    let h = grid.spacing();
    let conv = autoconvolve(y, method);
    let y0 = y.values()[0];
    let integrand: Vec<f64> = conv
        .iter()
        .enumerate()
        .map(|(k, c)| if k == 0 { y0 * y0 } else { c / (k as f64 * h) })
        .collect();
    let tails = quadrature::tail_integrals(&integrand, h);
    // rounding in the FFT and the signed panel weights can leave values at
    // the 1e-17 level below zero far out in the tail
    let values = tails[..grid.n_points()]
        .iter()
        .map(|t| t.max(0.0))
        .collect();
    Density::from_parts(grid, values)
}

/// Diagnostics for one iterate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IterationReport {
    pub step: usize,
    pub norm: f64,
    pub mean: f64,
    pub mass_defect: f64,
    pub dist_to_target: f64,
    pub step_delta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub steps: usize,
    pub method: ConvolutionMethod,
    /// Stop once successive iterates are closer than this in L1.
    pub early_stop: Option<f64>,
}

impl IterationConfig {
    pub fn new(steps: usize, method: ConvolutionMethod) -> Self {
        Self {
            steps,
            method,
            early_stop: None,
        }
    }
}

/// Iterates together with their per-step reports; `densities[0]` is the
/// initial condition and `reports[i]` describes `densities[i + 1]`.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub target: Density,
    pub densities: Vec<Density>,
    pub reports: Vec<IterationReport>,
}

/// Unit-mass exponential whose mean matches the normalized mean of `y0`.
pub fn matching_exponential(y0: &Density) -> Result<Density> {
    let norm = y0.quad_norm();
    let mean = y0.quad_mean()?;
    Density::exponential(*y0.grid(), norm / mean)
}

pub fn run_iteration(y0: &Density, config: &IterationConfig) -> Result<Trajectory> {
    if config.steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            value: 0.0,
            reason: "must be positive",
        });
    }
    let target = matching_exponential(y0)?;
    let mut densities = vec![y0.clone()];
    let mut reports = Vec::with_capacity(config.steps);
    for step in 1..=config.steps {
        let prev = densities.last().expect("nonempty");
        let next = apply_t(prev, config.method);
        let moments = next.moments();
        if !(moments.mass_defect <= MAX_MASS_DEFECT) {
            return Err(Error::DomainTooSmall {
                step,
                mass_defect: moments.mass_defect,
            });
        }
        let report = IterationReport {
            step,
            norm: moments.norm,
            mean: moments.mean,
            mass_defect: moments.mass_defect,
            dist_to_target: next.l1_distance(&target)?,
            step_delta: next.l1_distance(prev)?,
        };
        densities.push(next);
        reports.push(report);
        if config.early_stop.is_some_and(|tol| report.step_delta < tol) {
            break;
        }
    }
    Ok(Trajectory {
        target,
        densities,
        reports,
    })
}

/// `n_steps` applications of the operator, one report per step.
pub fn iterate_t(
    y0: &Density,
    n_steps: usize,
    method: ConvolutionMethod,
) -> Result<Vec<IterationReport>> {
    Ok(run_iteration(y0, &IterationConfig::new(n_steps, method))?.reports)
}

/// `T^n y` without diagnostics.
pub fn apply_t_n(y: &Density, n: usize, method: ConvolutionMethod) -> Density {
    (0..n).fold(y.clone(), |acc, _| apply_t(&acc, method))
}

/// ȳ(p) = ∫ e^{ipx} y(x) dx over the grid.
pub fn characteristic_function(y: &Density, p_values: &[f64]) -> Vec<Complex64> {
    let grid = *y.grid();
    let h = grid.spacing();
    p_values
        .iter()
        .map(|&p| {
            let re = quadrature::integral_with(y.values(), h, |i, v| v * (p * grid.node(i)).cos());
            let im = quadrature::integral_with(y.values(), h, |i, v| v * (p * grid.node(i)).sin());
            Complex64::new(re, im)
        })
        .collect()
}

/// |ȳ + p ȳ′ − ȳ²| at each `p`, with ȳ′ by central differences of step `dp`.
/// Fixed points of the operator make this vanish.
pub fn fixed_point_ode_residual_with_step(y: &Density, p_values: &[f64], dp: f64) -> Vec<f64> {
    p_values
        .iter()
        .map(|&p| {
            let phi = characteristic_function(y, &[p - dp, p, p + dp]);
            let deriv = (phi[2] - phi[0]) / (2.0 * dp);
            (phi[1] + deriv * p - phi[1] * phi[1]).norm()
        })
        .collect()
}

pub fn fixed_point_ode_residual(y: &Density, p_values: &[f64]) -> Vec<f64> {
    fixed_point_ode_residual_with_step(y, p_values, ODE_FD_STEP)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn grid40() -> Grid {
        Grid::new(4097, 40.0).unwrap()
    }

    #[test]
    fn autoconvolution_of_exponential() {
        let g = grid40();
        let y = Density::exponential(g, 1.0).unwrap();
        for method in [ConvolutionMethod::Direct, ConvolutionMethod::Fft] {
            let c = autoconvolve(&y, method);
            assert_eq!(c.len(), 2 * 4097 - 1);
            let k = 4096 / 40; // r = 1.0 exactly? 1/h = 102.4, use nearest node
            let r = k as f64 * g.spacing();
            assert!((c[k] - r * (-r).exp()).abs() < 1e-6);
            assert!(c[0].abs() < 1e-15);
        }
    }

    #[test]
    fn autoconvolution_of_box() {
        let g = Grid::new(4097, 4.0).unwrap();
        let y = Density::from_fn(g, |x| if x <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        let c = autoconvolve(&y, ConvolutionMethod::Direct);
        // r = 0.5 is node 512
        assert!((c[512] - 0.5).abs() < 2.0 * g.spacing());
    }

    #[test]
    fn methods_agree() {
        let g = grid40();
        let y = Density::from_fn(g, |x| 0.5 * (-x).exp() + 0.5 * x * x * (-x).exp() / 2.0).unwrap();
        let a = autoconvolve(&y, ConvolutionMethod::Direct);
        let b = autoconvolve(&y, ConvolutionMethod::Fft);
        let worst = a.iter().zip(&b).map(|(p, q)| (p - q).abs()).fold(0.0, f64::max);
        assert!(worst <= 1e-10, "{worst}");
    }

    #[test]
    fn exponential_is_fixed() {
        let g = grid40();
        let y = Density::exponential(g, 1.0).unwrap();
        let ty = apply_t(&y, ConvolutionMethod::Fft);
        assert!(ty.l1_distance(&y).unwrap() <= 1e-6);
    }

    #[test]
    fn zero_maps_to_zero() {
        let z = Density::zeros(grid40());
        assert_eq!(apply_t(&z, ConvolutionMethod::Fft), z);
        assert_eq!(apply_t(&z, ConvolutionMethod::Direct), z);
    }

    #[test]
    fn gamma_first_iterate_at_zero() {
        let g = grid40();
        let y = Density::from_fn(g, |x| x * (-x).exp()).unwrap();
        let ty = apply_t(&y, ConvolutionMethod::Fft);
        assert!((ty.values()[0] - 1.0 / 3.0).abs() < 1e-6, "{}", ty.values()[0]);
    }

    #[test]
    fn iteration_rejects_zero_steps_and_zero_density() {
        let g = grid40();
        let y = Density::exponential(g, 1.0).unwrap();
        assert!(iterate_t(&y, 0, ConvolutionMethod::Fft).is_err());
        assert!(matches!(
            iterate_t(&Density::zeros(g), 3, ConvolutionMethod::Fft),
            Err(Error::DegenerateDensity)
        ));
    }

    #[test]
    fn iteration_flags_domain_overflow() {
        // flat density reaching the domain end: the tail cannot be estimated
        let g = Grid::new(257, 4.0).unwrap();
        let y = Density::from_fn(g, |_| 0.25).unwrap();
        assert!(matches!(
            iterate_t(&y, 2, ConvolutionMethod::Fft),
            Err(Error::DomainTooSmall { step: 1, .. })
        ));
    }

    #[test]
    fn early_stop_ends_fixed_point_runs() {
        let y = Density::exponential(grid40(), 1.0).unwrap();
        let config = IterationConfig {
            steps: 10,
            method: ConvolutionMethod::Fft,
            early_stop: Some(1e-6),
        };
        let t = run_iteration(&y, &config).unwrap();
        assert_eq!(t.reports.len(), 1);
        assert_eq!(t.densities.len(), 2);
    }

    #[test]
    fn method_parses() {
        assert_eq!("fft".parse::<ConvolutionMethod>(), Ok(ConvolutionMethod::Fft));
        assert_eq!("direct".parse::<ConvolutionMethod>(), Ok(ConvolutionMethod::Direct));
        assert!("spectral".parse::<ConvolutionMethod>().is_err());
    }
}
