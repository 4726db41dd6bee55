//! Uniform grids on `[0, x_max]` and densities sampled on them.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature;

/// Smallest grid the quadrature and truncation diagnostics accept.
pub const MIN_POINTS: usize = 16;
/// Default number of nodes (a power of two plus one).
pub const DEFAULT_POINTS: usize = 4097;
/// Default domain length in units of the initial mean.
pub const DEFAULT_MEANS_PER_DOMAIN: f64 = 40.0;
/// Largest acceptable ratio of the last node value to the peak value.
/// Tail values below this fraction of the peak are treated as rounding.
const ROUNDING_TAIL: f64 = 1e-13;

pub const TAIL_EPSILON: f64 = 1e-8;

/// Uniform discretization of `[0, x_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    n_points: usize,
    x_max: f64,
}

impl Grid {
    pub fn new(n_points: usize, x_max: f64) -> Result<Self> {
        if n_points < MIN_POINTS || !(x_max > 0.0) || !x_max.is_finite() {
            return Err(Error::InvalidGrid { n_points, x_max });
        }
        Ok(Self { n_points, x_max })
    }

    /// Grid covering `40 * mean` with the default resolution.
    pub fn for_mean(mean: f64) -> Result<Self> {
        Self::new(DEFAULT_POINTS, DEFAULT_MEANS_PER_DOMAIN * mean)
    }

    pub fn n_points(&self) -> usize {
        self.n_points
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn spacing(&self) -> f64 {
        self.x_max / (self.n_points - 1) as f64
    }

    /// Node `i`; node 0 is exactly 0 and the last node is exactly `x_max`.
    pub fn node(&self, i: usize) -> f64 {
        (i as f64 / (self.n_points - 1) as f64) * self.x_max
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(move |i| self.node(i))
    }

    pub(crate) fn ensure_same(&self, other: &Grid) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::GridMismatch {
                left: self.to_string(),
                right: other.to_string(),
            })
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Grid({} points on [0, {}])", self.n_points, self.x_max)
    }
}

/// Nonnegative function sampled at the nodes of a [`Grid`].
#[derive(Debug, Clone, PartialEq)]
pub struct Density {
    grid: Grid,
    values: Vec<f64>,
}

/// Norm, mean and truncation diagnostics of a density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentSummary {
    pub norm: f64,
    pub mean: f64,
    pub mass_defect: f64,
}

impl Density {
    pub fn new(grid: Grid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n_points() {
            return Err(Error::LengthMismatch {
                expected: grid.n_points(),
                actual: values.len(),
            });
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(v.is_finite() && **v >= 0.0))
        {
            return Err(Error::InvalidDensityValue { index, value });
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` at every node. Negative or non-finite samples are rejected.
    pub fn from_fn<F: Fn(f64) -> f64>(grid: Grid, f: F) -> Result<Self> {
        let values = grid.nodes().map(f).collect();
        Self::new(grid, values)
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n_points()],
        }
    }

    /// Trusted constructor for values already known to be valid.
    pub(crate) fn from_parts(grid: Grid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.n_points());
        debug_assert!(values.iter().all(|v| *v >= 0.0 && v.is_finite()));
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        if !(c >= 0.0) || !c.is_finite() {
            return Err(Error::InvalidParameter {
                name: "scale",
                value: c,
                reason: "must be finite and >= 0",
            });
        }
        Ok(Self::from_parts(
            self.grid,
            self.values.iter().map(|v| v * c).collect(),
        ))
    }

    /// Rescaled to unit quadrature norm.
    pub fn normalized(&self) -> Result<Self> {
        let norm = self.quad_norm();
        if !(norm > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        self.scale(1.0 / norm)
    }

    /// ‖y‖ = ∫ y dx over `[0, x_max]`.
    pub fn quad_norm(&self) -> f64 {
        quadrature::integral(&self.values, self.grid.spacing())
    }

    /// ⟨y⟩ = ∫ x y dx (not divided by the norm).
    pub fn quad_mean(&self) -> Result<f64> {
        if self.quad_norm() <= 0.0 {
            return Err(Error::DegenerateDensity);
        }
        Ok(self.first_moment())
    }

    fn first_moment(&self) -> f64 {
        let g = self.grid;
        quadrature::integral_with(&self.values, g.spacing(), |i, v| g.node(i) * v)
    }

    /// ∫ |y − w| dx.
    pub fn l1_distance(&self, other: &Density) -> Result<f64> {
        self.grid.ensure_same(&other.grid)?;
        let diff: Vec<f64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .collect();
        Ok(quadrature::integral(&diff, self.grid.spacing()))
    }

    /// Estimated mass beyond `x_max`, from an exponential fitted by least
    /// squares to `ln y` over the last tenth of the nodes.
    ///
    /// Returns infinity when the tail does not decay, since the mass beyond
    /// the domain is then unbounded as far as the samples can tell.
    pub fn tail_mass_estimate(&self) -> f64 {
        let n = self.values.len();
        let last = self.values[n - 1];
        if last <= 0.0 {
            return 0.0;
        }
        let start = n - (n / 10).max(2);
        let (mut sx, mut sy, mut sxx, mut sxy, mut count) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in start..n {
            let v = self.values[i];
            if v > 0.0 {
                let x = self.grid.node(i);
                let ly = v.ln();
                sx += x;
                sy += ly;
                sxx += x * x;
                sxy += x * ly;
                count += 1.0;
            }
        }
        let denom = count * sxx - sx * sx;
        let slope = (count * sxy - sx * sy) / denom;
        if count >= 2.0 && slope < 0.0 {
            return last / -slope;
        }
        // A flat or rising tail at rounding level is what the FFT leaves past
        // the support of a compactly supported iterate.
        let peak = self.values.iter().fold(0.0f64, |a, &b| a.max(b));
        let tail_max = self.values[start..].iter().fold(0.0f64, |a, &b| a.max(b));
        if tail_max <= ROUNDING_TAIL * peak {
            0.0
        } else {
            f64::INFINITY
        }
    }

    pub fn moments(&self) -> MomentSummary {
        let norm = self.quad_norm();
        MomentSummary {
            norm,
            mean: if norm > 0.0 { self.first_moment() } else { 0.0 },
            mass_defect: self.tail_mass_estimate(),
        }
    }

    /// Ratio of the last node value to the peak value (0 for the zero density).
    pub fn tail_ratio(&self) -> f64 {
        let max = self.values.iter().cloned().fold(0.0, f64::max);
        if max == 0.0 {
            0.0
        } else {
            self.values[self.values.len() - 1] / max
        }
    }

    /// Whether the last node is small enough relative to the peak.
    pub fn truncation_healthy(&self) -> bool {
        self.tail_ratio() <= TAIL_EPSILON
    }

    /// Linear interpolation between nodes; zero outside `[0, x_max]`.
    pub fn interpolate(&self, x: f64) -> f64 {
        if !(x >= 0.0) || x > self.grid.x_max() {
            return 0.0;
        }
        let t = x / self.grid.spacing();
        let i = (t.floor() as usize).min(self.values.len() - 2);
        let frac = t - i as f64;
        self.values[i] * (1.0 - frac) + self.values[i + 1] * frac
    }

    /// Exponential `alpha e^{-alpha x}` on `grid`.
    pub fn exponential(grid: Grid, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::InvalidParameter {
                name: "alpha",
                value: alpha,
                reason: "must be > 0",
            });
        }
        Density::from_fn(grid, |x| alpha * (-alpha * x).exp())
    }

    /// Symmetric triangle on `[0, 2 * mean]`, rescaled to unit quadrature
    /// mass (the kinks are generally off-node).
    pub fn triangle(grid: Grid, mean: f64) -> Result<Self> {
        if !(mean > 0.0) || !mean.is_finite() {
            return Err(Error::InvalidParameter {
                name: "mean",
                value: mean,
                reason: "must be > 0",
            });
        }
        let peak = 1.0 / mean;
        let raw = Density::from_fn(grid, |x| {
            let t = x / mean;
            if t <= 1.0 {
                peak * t
            } else if t < 2.0 {
                peak * (2.0 - t)
            } else {
                0.0
            }
        })?;
        raw.normalized()
    }
}
