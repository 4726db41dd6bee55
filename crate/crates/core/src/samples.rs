//! Seeded random densities for the property suite.
//!
//! Densities are mixtures of gamma shapes `x^n e^{−αx}` whose tails are
//! resolved on `[0, 40]`, so that truncation stays far below the tolerances
//! of the checks.

use rand::Rng;

use crate::error::Result;
use crate::families::FamilySpec;
use crate::grid::{Density, Grid};

/// Domain of the random densities.
pub const RANDOM_X_MAX: f64 = 40.0;

fn gamma_component<R: Rng>(rng: &mut R, mean_range: (f64, f64), shape_max: u32) -> FamilySpec {
    let n = rng.random_range(0..=shape_max);
    let mean = rng.random_range(mean_range.0..mean_range.1);
    FamilySpec::Gamma {
        alpha: (n + 1) as f64 / mean,
        n,
    }
}

/// Unit-mass mixture of one to three gamma shapes with component means in
/// `[0.5, 1]` and shape index at most 3.
pub fn random_pdf<R: Rng>(rng: &mut R, grid: Grid) -> Result<Density> {
    let k = rng.random_range(1..=3);
    let parts: Vec<(f64, FamilySpec)> = (0..k)
        .map(|_| (rng.random_range(0.1..1.0), gamma_component(rng, (0.5, 1.0), 3)))
        .collect();
    mixture(grid, &parts)
}

/// Random PDF scaled to a norm drawn from `[0.25, 2]`.
pub fn random_density<R: Rng>(rng: &mut R, grid: Grid) -> Result<Density> {
    let norm = rng.random_range(0.25..=2.0);
    random_pdf(rng, grid)?.scale(norm)
}

/// A pair of PDFs. Even draws are independent; odd draws move a fraction of
/// the first density's mass into a far, narrow bump, the kind of perturbation
/// the operator stretches most.
pub fn random_pdf_pair<R: Rng>(rng: &mut R, grid: Grid, index: usize) -> Result<(Density, Density)> {
    let y = random_pdf(rng, grid)?;
    if index.is_multiple_of(2) {
        return Ok((y, random_pdf(rng, grid)?));
    }
    let eta = rng.random_range(0.05..0.3);
    let far = gamma_component(rng, (4.0, 8.0), 8);
    let bump = mixture(grid, &[(1.0, far)])?;
    let w = Density::new(
        grid,
        y.values()
            .iter()
            .zip(bump.values())
            .map(|(a, b)| (1.0 - eta) * a + eta * b)
            .collect(),
    )?;
    Ok((y, w))
}

/// Exponential with mean 1 perturbed by a small gamma admixture.
pub fn near_exponential<R: Rng>(rng: &mut R, grid: Grid) -> Result<Density> {
    let eta = 10f64.powf(rng.random_range(-4.0..-1.0));
    mixture(
        grid,
        &[
            (1.0 - eta, FamilySpec::Exponential { alpha: 1.0 }),
            (eta, gamma_component(rng, (0.5, 1.5), 3)),
        ],
    )
}

fn mixture(grid: Grid, parts: &[(f64, FamilySpec)]) -> Result<Density> {
    let total: f64 = parts.iter().map(|(w, _)| w).sum();
    Density::from_fn(grid, |x| {
        parts.iter().map(|(w, s)| w / total * s.pdf(x)).sum()
    })
}

/// Grid used for randomized checks at `n_points` resolution.
pub fn random_grid(n_points: usize) -> Result<Grid> {
    Grid::new(n_points, RANDOM_X_MAX)
}
