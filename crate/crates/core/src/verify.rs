//! Property suite for the operator: each check reports its measured value
//! against a threshold.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::derivatives::{min_signed_forward_difference, zero_derivative_recurrence};
use crate::error::{Error, Result};
use crate::grid::{Density, Grid, DEFAULT_POINTS};
use crate::operator::{apply_t, apply_t_n, fixed_point_ode_residual, ConvolutionMethod};
use crate::samples::{near_exponential, random_density, random_grid, random_pdf, random_pdf_pair};

pub const DEFAULT_SEED: u64 = 20_240_601;
pub const DEFAULT_SAMPLES: usize = 50;

pub const FIXED_POINT_TOL: f64 = 1e-6;
pub const NORM_SQUARING_TOL: f64 = 1e-7;
pub const MEAN_DRIFT_TOL: f64 = 1e-5;
pub const LIPSCHITZ_BOUND: f64 = 2.0 + 1e-6;
pub const NON_VACUITY_RATIO: f64 = 1.0;
pub const TRICHOTOMY_TOL: f64 = 1e-6;
pub const TRICHOTOMY_STEPS: u32 = 5;
pub const TRICHOTOMY_NORMS: [f64; 3] = [0.9, 1.0, 1.1];
pub const FIXED_POINT_ALPHAS: [f64; 3] = [0.5, 1.0, 2.0];
pub const ODE_FIXED_POINT_TOL: f64 = 1e-4;
pub const ODE_TRIANGLE_MIN: f64 = 1e-2;
pub const ODE_PROBES: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];
pub const CYCLE_RETURN_TOL: f64 = 1e-4;
pub const CYCLE_MOVE_MIN: f64 = 1e-3;
pub const MONOTONE_TOL: f64 = 1e-6;
pub const MONOTONE_ORDERS: usize = 3;
pub const RECURRENCE_TOL: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Passes when `measured <= threshold`.
    AtMost,
    /// Passes when `measured >= threshold`.
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PropertyResult {
    pub name: String,
    pub measured: f64,
    pub threshold: f64,
    pub comparison: Comparison,
    pub passed: bool,
    pub detail: String,
}

impl PropertyResult {
    fn new(name: &str, measured: f64, threshold: f64, comparison: Comparison, detail: String) -> Self {
        let passed = match comparison {
            Comparison::AtMost => measured <= threshold,
            Comparison::AtLeast => measured >= threshold,
        };
        PropertyResult {
            name: name.to_string(),
            measured,
            threshold,
            comparison,
            passed,
            detail,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyConfig {
    pub n_points: usize,
    pub method: ConvolutionMethod,
    pub seed: u64,
    pub samples: usize,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        VerifyConfig {
            n_points: DEFAULT_POINTS,
            method: ConvolutionMethod::Fft,
            seed: DEFAULT_SEED,
            samples: DEFAULT_SAMPLES,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyReport {
    pub config: VerifyConfig,
    pub properties: Vec<PropertyResult>,
    pub all_passed: bool,
}

impl VerifyReport {
    pub fn failures(&self) -> impl Iterator<Item = &PropertyResult> {
        self.properties.iter().filter(|p| !p.passed)
    }
}

/// Independent generator for property `index`.
fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn check_fixed_point(cfg: &VerifyConfig) -> Result<PropertyResult> {
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for alpha in FIXED_POINT_ALPHAS {
        let grid = Grid::new(cfg.n_points, 40.0 / alpha)?;
        let y = Density::exponential(grid, alpha)?;
        let d = apply_t(&y, cfg.method).l1_distance(&y)?;
        parts.push(format!("alpha={alpha}: {d:.3e}"));
        worst = worst.max(d);
    }
    Ok(PropertyResult::new(
        "fixed_point",
        worst,
        FIXED_POINT_TOL,
        Comparison::AtMost,
        parts.join("; "),
    ))
}

pub fn check_norm_squaring(cfg: &VerifyConfig) -> Result<PropertyResult> {
    let grid = random_grid(cfg.n_points)?;
    let mut rng = stream(cfg.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.samples {
        let y = random_density(&mut rng, grid)?;
        let n = y.quad_norm();
        worst = worst.max((apply_t(&y, cfg.method).quad_norm() - n * n).abs());
    }
    Ok(PropertyResult::new(
        "norm_squaring",
        worst,
        NORM_SQUARING_TOL,
        Comparison::AtMost,
        format!("max |‖Ty‖ − ‖y‖²| over {} densities", cfg.samples),
    ))
}

pub fn check_mean_conservation(cfg: &VerifyConfig) -> Result<PropertyResult> {
    let grid = random_grid(cfg.n_points)?;
    let mut rng = stream(cfg.seed, 1);
    let mut worst: f64 = 0.0;
    for _ in 0..cfg.samples {
        let y = random_density(&mut rng, grid)?.normalized()?;
        let m = y.quad_mean()?;
        let tm = apply_t(&y, cfg.method).quad_mean()?;
        worst = worst.max(((tm - m) / m).abs());
    }
    Ok(PropertyResult::new(
        "mean_conservation",
        worst,
        MEAN_DRIFT_TOL,
        Comparison::AtMost,
        format!("max relative mean drift over {} PDFs", cfg.samples),
    ))
}

fn lipschitz_ratios(cfg: &VerifyConfig) -> Result<Vec<f64>> {
    let grid = random_grid(cfg.n_points)?;
    let mut rng = stream(cfg.seed, 2);
    let mut ratios = Vec::with_capacity(cfg.samples);
    for i in 0..cfg.samples {
        let (y, w) = random_pdf_pair(&mut rng, grid, i)?;
        let before = y.l1_distance(&w)?;
        if before > 0.0 {
            let after = apply_t(&y, cfg.method).l1_distance(&apply_t(&w, cfg.method))?;
            ratios.push(after / before);
        }
    }
    Ok(ratios)
}

/// The bound and its non-vacuity share one set of pairs.
pub fn check_lipschitz(cfg: &VerifyConfig) -> Result<[PropertyResult; 2]> {
    let ratios = lipschitz_ratios(cfg)?;
    let max = ratios.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let detail = format!("{} pairs, ratio range [{min:.4}, {max:.4}]", ratios.len());
    Ok([
        PropertyResult::new("lipschitz_bound", max, LIPSCHITZ_BOUND, Comparison::AtMost, detail.clone()),
        PropertyResult::new(
            "lipschitz_non_vacuity",
            max,
            NON_VACUITY_RATIO,
            Comparison::AtLeast,
            detail,
        ),
    ])
}

pub fn check_norm_trichotomy(cfg: &VerifyConfig) -> Result<PropertyResult> {
    let grid = random_grid(cfg.n_points)?;
    let mut rng = stream(cfg.seed, 3);
    let base = random_pdf(&mut rng, grid)?;
    let mut worst: f64 = 0.0;
    let mut parts = Vec::new();
    for c in TRICHOTOMY_NORMS {
        let y0 = base.normalized()?.scale(c)?;
        let n0 = y0.quad_norm();
        let mut y = y0;
        for k in 1..=TRICHOTOMY_STEPS {
            y = apply_t(&y, cfg.method);
            let expected = n0.powi(1 << k);
            worst = worst.max(((y.quad_norm() - expected) / expected).abs());
        }
        parts.push(format!("‖y0‖={c}: ‖T^5 y0‖={:.6}", y.quad_norm()));
    }
    Ok(PropertyResult::new(
        "norm_trichotomy",
        worst,
        TRICHOTOMY_TOL,
        Comparison::AtMost,
        parts.join("; "),
    ))
}

pub fn check_ode_residuals(cfg: &VerifyConfig) -> Result<[PropertyResult; 2]> {
    let grid = Grid::new(cfg.n_points, 40.0)?;
    let exp = Density::exponential(grid, 1.0)?;
    let fixed = fixed_point_ode_residual(&exp, &ODE_PROBES)
        .into_iter()
        .fold(0.0, f64::max);
    let tri = Density::triangle(grid, 1.0)?;
    let tri_res = fixed_point_ode_residual(&tri, &[1.0])[0];
    Ok([
        PropertyResult::new(
            "ode_residual_fixed_point",
            fixed,
            ODE_FIXED_POINT_TOL,
            Comparison::AtMost,
            format!("max over p in {ODE_PROBES:?}"),
        ),
        PropertyResult::new(
            "ode_residual_non_fixed_point",
            tri_res,
            ODE_TRIANGLE_MIN,
            Comparison::AtLeast,
            "triangle, p = 1".to_string(),
        ),
    ])
}

pub fn check_no_two_cycles(cfg: &VerifyConfig) -> Result<PropertyResult> {
    let grid = random_grid(cfg.n_points)?;
    let mut rng = stream(cfg.seed, 4);
    let mut violations = 0usize;
    let mut closest_return = f64::INFINITY;
    for i in 0..cfg.samples {
        let y = if i % 2 == 0 {
            random_pdf(&mut rng, grid)?
        } else {
            near_exponential(&mut rng, grid)?
        };
        let ty = apply_t(&y, cfg.method);
        let moved = ty.l1_distance(&y)?;
        let back = apply_t(&ty, cfg.method).l1_distance(&y)?;
        if moved >= CYCLE_MOVE_MIN {
            closest_return = closest_return.min(back);
            if back < CYCLE_RETURN_TOL {
                violations += 1;
            }
        }
    }
    Ok(PropertyResult::new(
        "no_two_cycles",
        violations as f64,
        0.0,
        Comparison::AtMost,
        format!("smallest l1(T²y, y) among moving samples: {closest_return:.3e}"),
    ))
}

/// `T^3` of the triangle and the fixed point, the densities checked for
/// monotone derivatives.
fn monotone_subjects(cfg: &VerifyConfig) -> Result<Vec<(&'static str, Density, Density)>> {
    let grid = Grid::new(cfg.n_points, 40.0)?;
    let exp = Density::exponential(grid, 1.0)?;
    let tri2 = apply_t_n(&Density::triangle(grid, 1.0)?, 2, cfg.method);
    let tri3 = apply_t(&tri2, cfg.method);
    Ok(vec![
        ("fixed point", exp.clone(), apply_t(&exp, cfg.method)),
        ("T^3 triangle", tri2, tri3),
    ])
}

pub fn check_monotone_derivatives(cfg: &VerifyConfig) -> Result<[PropertyResult; 2]> {
    let mut worst_sign = f64::INFINITY;
    let mut worst_rec: f64 = 0.0;
    let mut parts = Vec::new();
    for (label, prev, next) in monotone_subjects(cfg)? {
        for m in 1..=MONOTONE_ORDERS {
            worst_sign = worst_sign.min(min_signed_forward_difference(&next, m));
            let (lhs, rhs) = zero_derivative_recurrence(&prev, &next, m);
            let rel = ((lhs - rhs) / rhs).abs();
            worst_rec = worst_rec.max(rel);
            parts.push(format!("{label} m={m}: {lhs:.6} vs {rhs:.6}"));
        }
    }
    Ok([
        PropertyResult::new(
            "complete_monotonicity",
            worst_sign,
            -MONOTONE_TOL,
            Comparison::AtLeast,
            format!("min (−1)^m Δ^m y / h^m for m ≤ {MONOTONE_ORDERS}"),
        ),
        PropertyResult::new(
            "zero_derivative_recurrence",
            worst_rec,
            RECURRENCE_TOL,
            Comparison::AtMost,
            parts.join("; "),
        ),
    ])
}

/// Runs every property. Convergence speed is not part of the suite.
pub fn run_all(cfg: &VerifyConfig) -> Result<VerifyReport> {
    if cfg.samples == 0 {
        return Err(Error::InvalidParameter {
            name: "samples",
            value: 0.0,
            reason: "must be >= 1",
        });
    }
    let mut properties = vec![
        check_fixed_point(cfg)?,
        check_norm_squaring(cfg)?,
        check_mean_conservation(cfg)?,
    ];
    properties.extend(check_lipschitz(cfg)?);
    properties.push(check_norm_trichotomy(cfg)?);
    properties.extend(check_ode_residuals(cfg)?);
    properties.push(check_no_two_cycles(cfg)?);
    properties.extend(check_monotone_derivatives(cfg)?);
    let all_passed = properties.iter().all(|p| p.passed);
    Ok(VerifyReport {
        config: *cfg,
        properties,
        all_passed,
    })
}
