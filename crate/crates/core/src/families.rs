//! Analytic densities with closed-form first iterates.
//!
//! All four families have unit mass on `[0, ∞)`:
//!
//! * `exponential(α)`: `α e^{−αx}`, a fixed point of the operator;
//! * `gamma(α, n)`: `α^{n+1} x^n e^{−αx} / n!`;
//! * `two_exponential_mix(α, β)`: `(α e^{−αx} + β e^{−βx}) / 2`;
//! * `epsilon_mix(ε, α, n)`: `(1 − ε) α e^{−αx} + ε α^{n+1} x^n e^{−αx} / n!`.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Density, Grid};
use crate::special::{
    exp_integral_e1, factorial, gamma_half_integer, ln_factorial, ln_gamma_half_integer,
    ln_upper_incomplete_gamma, scaled_upper_incomplete_gamma, upper_incomplete_gamma,
};

/// Largest shape index accepted.
pub const MAX_SHAPE: u32 = 80;
/// Above this shape index prefactors go through logarithms.
const DIRECT_SHAPE_LIMIT: u32 = 20;
/// Parameter lattice swept by [`lattice`].
pub const LATTICE_ALPHA: [f64; 3] = [0.5, 1.0, 2.0];
pub const LATTICE_BETA: [f64; 2] = [1.5, 3.0];
pub const LATTICE_SHAPE: [u32; 4] = [0, 1, 2, 5];
pub const LATTICE_EPSILON: [f64; 3] = [0.25, 0.5, 0.75];
/// Below this starting distance a family is already at the fixed point.
pub const DEGENERATE_DISTANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Exponential { alpha: f64 },
    Gamma { alpha: f64, n: u32 },
    TwoExponentialMix { alpha: f64, beta: f64 },
    EpsilonMix { epsilon: f64, alpha: f64, n: u32 },
}

impl fmt::Display for FamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            FamilySpec::Exponential { alpha } => write!(f, "exponential(alpha={alpha})"),
            FamilySpec::Gamma { alpha, n } => write!(f, "gamma(alpha={alpha}, n={n})"),
            FamilySpec::TwoExponentialMix { alpha, beta } => {
                write!(f, "mix(alpha={alpha}, beta={beta})")
            }
            FamilySpec::EpsilonMix { epsilon, alpha, n } => {
                write!(f, "epsmix(epsilon={epsilon}, alpha={alpha}, n={n})")
            }
        }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if value > 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must be finite and > 0",
        })
    }
}

fn shape(n: u32) -> Result<()> {
    if n <= MAX_SHAPE {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
            reason: "shape index above 80",
        })
    }
}

/// `α^{n+1} x^n e^{−αx} / n!`.
fn gamma_pdf(alpha: f64, n: u32, x: f64) -> f64 {
    if x == 0.0 {
        return if n == 0 { alpha } else { 0.0 };
    }
    if n <= DIRECT_SHAPE_LIMIT {
        alpha.powi(n as i32 + 1) / factorial(n) * x.powi(n as i32) * (-alpha * x).exp()
    } else {
        ((n + 1) as f64 * alpha.ln() + n as f64 * x.ln() - alpha * x - ln_factorial(n)).exp()
    }
}

/// First iterate of the gamma family:
/// `α √π / (2^{2n+1} n! Γ(n+3/2)) · Γ(2n+1, αx)`.
fn gamma_first_iterate(alpha: f64, n: u32, x: f64) -> Result<f64> {
    let s = 2 * n + 1;
    if n <= DIRECT_SHAPE_LIMIT {
        let pref = alpha * PI.sqrt()
            / (2f64.powi(s as i32) * factorial(n) * gamma_half_integer(n + 1));
        Ok(pref * upper_incomplete_gamma(s, alpha * x)?)
    } else {
        let ln_pref = alpha.ln() + 0.5 * PI.ln()
            - s as f64 * 2f64.ln()
            - ln_factorial(n)
            - ln_gamma_half_integer(n + 1);
        Ok((ln_pref + ln_upper_incomplete_gamma(s, alpha * x)?).exp())
    }
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            FamilySpec::Exponential { alpha } => positive("alpha", alpha),
            FamilySpec::Gamma { alpha, n } => {
                positive("alpha", alpha)?;
                shape(n)
            }
            FamilySpec::TwoExponentialMix { alpha, beta } => {
                positive("alpha", alpha)?;
                positive("beta", beta)?;
                if alpha == beta {
                    return Err(Error::InvalidParameter {
                        name: "beta",
                        value: beta,
                        reason: "must differ from alpha",
                    });
                }
                Ok(())
            }
            FamilySpec::EpsilonMix { epsilon, alpha, n } => {
                if !(0.0..=1.0).contains(&epsilon) {
                    return Err(Error::InvalidParameter {
                        name: "epsilon",
                        value: epsilon,
                        reason: "must lie in [0, 1]",
                    });
                }
                positive("alpha", alpha)?;
                shape(n)
            }
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            FamilySpec::Exponential { .. } => "exponential",
            FamilySpec::Gamma { .. } => "gamma",
            FamilySpec::TwoExponentialMix { .. } => "mix",
            FamilySpec::EpsilonMix { .. } => "epsmix",
        }
    }

    /// Pointwise density; assumes a validated spec.
    pub fn pdf(&self, x: f64) -> f64 {
        match *self {
            FamilySpec::Exponential { alpha } => alpha * (-alpha * x).exp(),
            FamilySpec::Gamma { alpha, n } => gamma_pdf(alpha, n, x),
            FamilySpec::TwoExponentialMix { alpha, beta } => {
                0.5 * (alpha * (-alpha * x).exp() + beta * (-beta * x).exp())
            }
            FamilySpec::EpsilonMix { epsilon, alpha, n } => {
                (1.0 - epsilon) * alpha * (-alpha * x).exp() + epsilon * gamma_pdf(alpha, n, x)
            }
        }
    }

    /// Pointwise first iterate from the closed forms.
    pub fn first_iterate(&self, x: f64) -> Result<f64> {
        match *self {
            FamilySpec::Exponential { .. } => Err(Error::NoClosedForm("exponential")),
            FamilySpec::Gamma { alpha, n } => gamma_first_iterate(alpha, n, x),
            FamilySpec::TwoExponentialMix { alpha, beta } => {
                let e1_gap = if x == 0.0 {
                    // Γ(0, βx) − Γ(0, αx) → ln(α/β) as x → 0
                    (alpha / beta).ln()
                } else {
                    exp_integral_e1(beta * x)? - exp_integral_e1(alpha * x)?
                };
                Ok(0.25
                    * (alpha * (-alpha * x).exp()
                        + beta * (-beta * x).exp()
                        + 2.0 * alpha * beta / (alpha - beta) * e1_gap))
            }
            FamilySpec::EpsilonMix { epsilon, alpha, n } => {
                let z = alpha * x;
                let cross = 2.0 * (1.0 - epsilon) / factorial(n + 1)
                    * scaled_upper_incomplete_gamma(n + 1, z)?;
                let self_term = if n <= DIRECT_SHAPE_LIMIT {
                    epsilon * PI.sqrt() / (4f64.powi(n as i32) * factorial(n))
                        / (2.0 * gamma_half_integer(n + 1))
                        * scaled_upper_incomplete_gamma(2 * n + 1, z)?
                } else {
                    let ln_pref = 0.5 * PI.ln()
                        - n as f64 * 4f64.ln()
                        - ln_factorial(n)
                        - 2f64.ln()
                        - ln_gamma_half_integer(n + 1);
                    epsilon * (ln_pref + z + ln_upper_incomplete_gamma(2 * n + 1, z)?).exp()
                };
                let bracket = 1.0 + epsilon * (epsilon - 2.0 + cross + self_term);
                Ok(alpha * bracket * (-z).exp())
            }
        }
    }

    /// Parameters as `name=value` pairs joined by `;`.
    pub fn params(&self) -> String {
        match *self {
            FamilySpec::Exponential { alpha } => format!("alpha={alpha}"),
            FamilySpec::Gamma { alpha, n } => format!("alpha={alpha};n={n}"),
            FamilySpec::TwoExponentialMix { alpha, beta } => format!("alpha={alpha};beta={beta}"),
            FamilySpec::EpsilonMix { epsilon, alpha, n } => {
                format!("epsilon={epsilon};alpha={alpha};n={n}")
            }
        }
    }

    /// Closed-form mean.
    pub fn mean(&self) -> f64 {
        match *self {
            FamilySpec::Exponential { alpha } => 1.0 / alpha,
            FamilySpec::Gamma { alpha, n } => (n + 1) as f64 / alpha,
            FamilySpec::TwoExponentialMix { alpha, beta } => 0.5 * (1.0 / alpha + 1.0 / beta),
            FamilySpec::EpsilonMix { epsilon, alpha, n } => (1.0 + epsilon * n as f64) / alpha,
        }
    }

    /// Default grid: 4097 nodes over 40 means.
    pub fn default_grid(&self) -> Result<Grid> {
        self.validate()?;
        Grid::for_mean(self.mean())
    }
}

pub fn sample_family(spec: &FamilySpec, grid: &Grid) -> Result<Density> {
    spec.validate()?;
    Density::from_fn(*grid, |x| spec.pdf(x))
}

pub fn family_mean(spec: &FamilySpec) -> Result<f64> {
    spec.validate()?;
    Ok(spec.mean())
}

pub fn closed_form_t(spec: &FamilySpec, grid: &Grid) -> Result<Density> {
    spec.validate()?;
    let values = grid
        .nodes()
        .map(|x| spec.first_iterate(x))
        .collect::<Result<Vec<_>>>()?;
    Density::new(*grid, values)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub d_before: f64,
    pub d_after: f64,
    pub contracted: bool,
    /// The family is already at the fixed point (`d_before` ≈ 0), so strict
    /// contraction is not expected.
    pub degenerate: bool,
}

/// Distances to the mean-matched exponential before and after one step.
pub fn contraction_check(spec: &FamilySpec, grid: &Grid) -> Result<ContractionReport> {
    let y = sample_family(spec, grid)?;
    let target = Density::exponential(*grid, 1.0 / spec.mean())?;
    let image = match spec {
        FamilySpec::Exponential { .. } => y.clone(),
        _ => closed_form_t(spec, grid)?,
    };
    let d_before = y.l1_distance(&target)?;
    let d_after = image.l1_distance(&target)?;
    Ok(ContractionReport {
        d_before,
        d_after,
        contracted: d_after < d_before,
        degenerate: d_before <= DEGENERATE_DISTANCE,
    })
}

/// The fixed parameter lattice: gamma(α, n), mix(α, β), epsmix(ε, α, n).
pub fn lattice() -> Vec<FamilySpec> {
    let mut out = Vec::new();
    for &alpha in &LATTICE_ALPHA {
        for &n in &LATTICE_SHAPE {
            out.push(FamilySpec::Gamma { alpha, n });
        }
    }
    for &alpha in &LATTICE_ALPHA {
        for &beta in &LATTICE_BETA {
            out.push(FamilySpec::TwoExponentialMix { alpha, beta });
        }
    }
    for &epsilon in &LATTICE_EPSILON {
        for &alpha in &LATTICE_ALPHA {
            for &n in &LATTICE_SHAPE {
                out.push(FamilySpec::EpsilonMix { epsilon, alpha, n });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sample_examples() {
        let g = Grid::new(4097, 40.0).unwrap();
        let e = sample_family(&FamilySpec::Exponential { alpha: 1.0 }, &g).unwrap();
        assert_eq!(e.values()[0], 1.0);
        let gamma = FamilySpec::Gamma { alpha: 2.0, n: 1 };
        assert_eq!(gamma.pdf(0.0), 0.0);
        assert!((gamma.pdf(0.5) - 2.0 / std::f64::consts::E).abs() < 1e-15);
        // the mode at n/alpha is a maximum
        assert!(gamma.pdf(0.5) > gamma.pdf(0.49) && gamma.pdf(0.5) > gamma.pdf(0.51));
        let collapsed = sample_family(&FamilySpec::EpsilonMix { epsilon: 0.0, alpha: 1.5, n: 3 }, &g)
            .unwrap();
        let expo = sample_family(&FamilySpec::Exponential { alpha: 1.5 }, &g).unwrap();
        assert_eq!(collapsed, expo);
    }

    #[test]
    fn validation() {
        let g = Grid::new(100, 10.0).unwrap();
        for bad in [
            FamilySpec::Exponential { alpha: 0.0 },
            FamilySpec::Gamma { alpha: -1.0, n: 1 },
            FamilySpec::Gamma { alpha: 1.0, n: 81 },
            FamilySpec::TwoExponentialMix { alpha: 1.0, beta: 1.0 },
            FamilySpec::TwoExponentialMix { alpha: 1.0, beta: 0.0 },
            FamilySpec::EpsilonMix { epsilon: 1.5, alpha: 1.0, n: 1 },
            FamilySpec::EpsilonMix { epsilon: -0.1, alpha: 1.0, n: 1 },
        ] {
            assert!(sample_family(&bad, &g).is_err(), "{bad}");
        }
    }

    #[test]
    fn means() {
        assert_eq!(family_mean(&FamilySpec::Gamma { alpha: 2.0, n: 1 }).unwrap(), 1.0);
        assert_eq!(
            family_mean(&FamilySpec::EpsilonMix { epsilon: 0.5, alpha: 1.0, n: 2 }).unwrap(),
            2.0
        );
        let near = FamilySpec::TwoExponentialMix { alpha: 1.0, beta: 1.0 + 1e-9 };
        let m = family_mean(&near).unwrap();
        assert!((m - 0.5 * (1.0 + 1.0 / (1.0 + 1e-9))).abs() < 1e-15);
        let g = near.default_grid().unwrap();
        let sampled = sample_family(&near, &g).unwrap().quad_mean().unwrap();
        assert!((sampled - m).abs() < 1e-6);
    }

    #[test]
    fn closed_form_examples() {
        let g = Grid::new(4097, 40.0).unwrap();
        let gamma = FamilySpec::Gamma { alpha: 1.0, n: 1 };
        assert!((gamma.first_iterate(0.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);

        let (a, b) = (1.0, 3.0);
        let mix = FamilySpec::TwoExponentialMix { alpha: a, beta: b };
        let limit = 0.25 * (a + b + 2.0 * a * b / (a - b) * (a / b).ln());
        assert_eq!(mix.first_iterate(0.0).unwrap(), limit);
        assert!((mix.first_iterate(1e-8).unwrap() - limit).abs() < 1e-6);

        for alpha in [0.5, 2.0] {
            for n in [0, 1, 5] {
                let eps = closed_form_t(&FamilySpec::EpsilonMix { epsilon: 1.0, alpha, n }, &g).unwrap();
                let gam = closed_form_t(&FamilySpec::Gamma { alpha, n }, &g).unwrap();
                let gap = eps
                    .values()
                    .iter()
                    .zip(gam.values())
                    .map(|(p, q)| (p - q).abs())
                    .fold(0.0, f64::max);
                assert!(gap < 1e-12, "alpha={alpha} n={n} gap={gap}");
            }
        }
        assert!(matches!(
            closed_form_t(&FamilySpec::Exponential { alpha: 1.0 }, &g),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn large_shape_uses_log_path_consistently() {
        // n = 20 and 21 straddle the switch; both must stay normalized
        for n in [20, 21, 40] {
            let spec = FamilySpec::Gamma { alpha: 1.0, n };
            let g = spec.default_grid().unwrap();
            let y = sample_family(&spec, &g).unwrap();
            assert!((y.quad_norm() - 1.0).abs() < 1e-8, "n={n}");
            let ty = closed_form_t(&spec, &g).unwrap();
            assert!((ty.quad_norm() - 1.0).abs() < 1e-6, "n={n}");
        }
    }

    #[test]
    fn contraction_examples() {
        for spec in [
            FamilySpec::Gamma { alpha: 2.0, n: 1 },
            FamilySpec::TwoExponentialMix { alpha: 1.0, beta: 3.0 },
        ] {
            let r = contraction_check(&spec, &spec.default_grid().unwrap()).unwrap();
            assert!(r.contracted && !r.degenerate, "{spec}: {r:?}");
        }
        let e = FamilySpec::Exponential { alpha: 1.3 };
        let r = contraction_check(&e, &e.default_grid().unwrap()).unwrap();
        assert_eq!((r.d_before, r.d_after), (0.0, 0.0));
        assert!(r.degenerate && !r.contracted);
    }

    #[test]
    fn lattice_has_expected_size() {
        assert_eq!(lattice().len(), 12 + 6 + 36);
        assert!(lattice().iter().all(|s| s.validate().is_ok()));
    }
}
