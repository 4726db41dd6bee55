//! Discrete random-exchange market: pairs of agents pool their money and
//! split it at a uniformly random fraction.
//!
//! Randomness comes from ChaCha8 seeded through `seed_from_u64`. Independent
//! replicas use the same seed with distinct ChaCha stream ids, so a run is
//! fully identified by `(seed, stream)`.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Density;

#[derive(Debug, Clone)]
pub enum InitialMoney {
    /// Every agent starts with the same amount.
    Equal(f64),
    /// Agents draw their money from a sampled density by inverse CDF.
    FromDensity(Density),
}

#[derive(Debug, Clone)]
pub struct AgentEnsemble {
    money: Vec<f64>,
    total: f64,
    seed: u64,
    stream: u64,
    transactions_done: u64,
    rng: ChaCha8Rng,
}

impl AgentEnsemble {
    pub fn new(n_agents: usize, initial: &InitialMoney, seed: u64) -> Result<Self> {
        Self::with_stream(n_agents, initial, seed, 0)
    }

    /// Ensemble drawing from ChaCha stream `stream`; use distinct streams for
    /// replicas sharing a seed.
    pub fn with_stream(
        n_agents: usize,
        initial: &InitialMoney,
        seed: u64,
        stream: u64,
    ) -> Result<Self> {
        if n_agents < 2 {
            return Err(Error::TooFewAgents(n_agents));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(stream);
        let money = match initial {
            InitialMoney::Equal(m0) => {
                if !(*m0 > 0.0) || !m0.is_finite() {
                    return Err(Error::InvalidParameter {
                        name: "m0",
                        value: *m0,
                        reason: "must be finite and > 0",
                    });
                }
                vec![*m0; n_agents]
            }
            InitialMoney::FromDensity(density) => {
                let sampler = InverseCdf::new(density)?;
                (0..n_agents).map(|_| sampler.sample(&mut rng)).collect()
            }
        };
        let total = money.iter().sum();
        Ok(Self {
            money,
            total,
            seed,
            stream,
            transactions_done: 0,
            rng,
        })
    }

    /// Rebuilds an ensemble from a money snapshot (no RNG history).
    pub fn from_money(money: Vec<f64>, seed: u64) -> Result<Self> {
        if money.len() < 2 {
            return Err(Error::TooFewAgents(money.len()));
        }
        if let Some((i, &m)) = money
            .iter()
            .enumerate()
            .find(|(_, m)| !(m.is_finite() && **m >= 0.0))
        {
            return Err(Error::InvalidDensityValue { index: i, value: m });
        }
        let total = money.iter().sum();
        Ok(Self {
            money,
            total,
            seed,
            stream: 0,
            transactions_done: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
        })
    }

    pub fn money(&self) -> &[f64] {
        &self.money
    }

    pub fn n_agents(&self) -> usize {
        self.money.len()
    }

    /// Total money at construction time.
    pub fn initial_total(&self) -> f64 {
        self.total
    }

    /// Total money now, summed afresh.
    pub fn current_total(&self) -> f64 {
        self.money.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.current_total() / self.money.len() as f64
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn transactions_done(&self) -> u64 {
        self.transactions_done
    }

    /// One exchange with a given split fraction: agent `i` receives
    /// `eps · (m_i + m_j)` and agent `j` the remainder.
    pub fn exchange(&mut self, i: usize, j: usize, eps: f64) {
        let pooled = self.money[i] + self.money[j];
        let share = eps * pooled;
        self.money[i] = share;
        self.money[j] = pooled - share;
    }

    /// `count` random exchanges between distinct, uniformly chosen agents.
    pub fn run_transactions(&mut self, count: u64) {
        let n = self.money.len();
        for _ in 0..count {
            let i = self.rng.random_range(0..n);
            let mut j = self.rng.random_range(0..n - 1);
            if j >= i {
                j += 1;
            }
            let eps: f64 = self.rng.sample(Open01);
            self.exchange(i, j, eps);
        }
        self.transactions_done += count;
    }
}

/// Inverse-CDF sampler over the piecewise-linear interpolant of a density.
struct InverseCdf<'a> {
    density: &'a Density,
    cdf: Vec<f64>,
}

impl<'a> InverseCdf<'a> {
    fn new(density: &'a Density) -> Result<Self> {
        let h = density.grid().spacing();
        let v = density.values();
        let mut cdf = Vec::with_capacity(v.len());
        let mut acc = 0.0;
        cdf.push(0.0);
        for w in v.windows(2) {
            acc += 0.5 * h * (w[0] + w[1]);
            cdf.push(acc);
        }
        if !(acc > 0.0) {
            return Err(Error::DegenerateDensity);
        }
        for c in cdf.iter_mut() {
            *c /= acc;
        }
        Ok(Self { density, cdf })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        // first cell whose right edge reaches u
        let cell = self.cdf.partition_point(|&c| c < u).clamp(1, self.cdf.len() - 1) - 1;
        let h = self.density.grid().spacing();
        let (a, b) = (self.density.values()[cell], self.density.values()[cell + 1]);
        let mass = self.cdf[cell + 1] - self.cdf[cell];
        let x0 = self.density.grid().node(cell);
        if mass <= 0.0 {
            return x0;
        }
        // solve a t + (b − a) t² / (2h) = q · (a + b) h / 2 for t in [0, h]
        let q = ((u - self.cdf[cell]) / mass).clamp(0.0, 1.0);
        let target = q * 0.5 * (a + b) * h;
        let slope = (b - a) / h;
        let t = if slope.abs() < 1e-12 * (a + b).max(f64::MIN_POSITIVE) / h {
            target / a.max(f64::MIN_POSITIVE)
        } else {
            let disc = (a * a + 2.0 * slope * target).max(0.0);
            2.0 * target / (a + disc.sqrt())
        };
        x0 + t.clamp(0.0, h)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramEstimate {
    pub bin_edges: Vec<f64>,
    pub densities: Vec<f64>,
    pub n_samples: usize,
    /// Agents at or beyond the last edge (excluded from `densities`).
    pub overflow: usize,
}

impl HistogramEstimate {
    pub fn bin_width(&self) -> f64 {
        self.bin_edges[1] - self.bin_edges[0]
    }

    /// Σ density · width, i.e. the in-range fraction of samples.
    pub fn total_mass(&self) -> f64 {
        self.densities.iter().sum::<f64>() * self.bin_width()
    }

    /// L1 distance to a reference density, sampled at bin centres, plus the
    /// mismatch between the overflow fraction and the reference's mass beyond
    /// the last edge.
    pub fn l1_to(&self, reference: &Density) -> f64 {
        let width = self.bin_width();
        let m_max = *self.bin_edges.last().expect("edges");
        let in_range: f64 = self
            .densities
            .iter()
            .enumerate()
            .map(|(b, d)| (d - reference.interpolate((b as f64 + 0.5) * width)).abs() * width)
            .sum();
        let grid = reference.grid();
        let h = grid.spacing();
        let start = ((m_max / h).ceil() as usize).min(grid.n_points() - 1);
        let ref_beyond = crate::quadrature::integral(&reference.values()[start..], h)
            + reference.tail_mass_estimate();
        let overflow_fraction = self.overflow as f64 / self.n_samples as f64;
        in_range + (overflow_fraction - ref_beyond).abs()
    }
}

pub fn histogram(ens: &AgentEnsemble, n_bins: usize, m_max: f64) -> Result<HistogramEstimate> {
    if n_bins < 2 {
        return Err(Error::InvalidParameter {
            name: "n_bins",
            value: n_bins as f64,
            reason: "need at least 2 bins",
        });
    }
    if !(m_max > 0.0) || !m_max.is_finite() {
        return Err(Error::InvalidParameter {
            name: "m_max",
            value: m_max,
            reason: "must be finite and > 0",
        });
    }
    let width = m_max / n_bins as f64;
    let mut counts = vec![0usize; n_bins];
    let mut overflow = 0;
    for &m in ens.money() {
        if m > m_max {
            overflow += 1;
        } else {
            let b = ((m / width) as usize).min(n_bins - 1);
            counts[b] += 1;
        }
    }
    let n_samples = ens.n_agents();
    let norm = n_samples as f64 * width;
    Ok(HistogramEstimate {
        bin_edges: (0..=n_bins).map(|b| b as f64 * width).collect(),
        densities: counts.iter().map(|&c| c as f64 / norm).collect(),
        n_samples,
        overflow,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentialFit {
    pub beta_hat: f64,
    pub ks_statistic: f64,
    pub n_samples: usize,
}

/// Maximum-likelihood exponential rate `N / Σ m_i` and the Kolmogorov–Smirnov
/// distance `sup |F_emp − F_fit|` (both one-sided gaps, including left limits
/// at the jumps of the empirical CDF).
pub fn fit_exponential(ens: &AgentEnsemble) -> Result<ExponentialFit> {
    let total = ens.current_total();
    if !(total > 0.0) {
        return Err(Error::DegenerateEnsemble);
    }
    let n = ens.n_agents();
    let beta_hat = n as f64 / total;
    let mut sorted = ens.money().to_vec();
    sorted.sort_by(f64::total_cmp);
    let nf = n as f64;
    let ks_statistic = sorted
        .iter()
        .enumerate()
        .map(|(i, &m)| {
            let f = -(-beta_hat * m).exp_m1();
            let above = (i + 1) as f64 / nf - f;
            let below = f - i as f64 / nf;
            above.max(below)
        })
        .fold(0.0, f64::max);
    Ok(ExponentialFit {
        beta_hat,
        ks_statistic,
        n_samples: n,
    })
}

/// Fit result as written to disk.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitRecord {
    pub beta_hat: f64,
    pub ks_statistic: f64,
    pub n_samples: usize,
    pub transactions_done: u64,
    pub seed: u64,
}

impl FitRecord {
    pub fn new(fit: &ExponentialFit, ens: &AgentEnsemble) -> Self {
        Self {
            beta_hat: fit.beta_hat,
            ks_statistic: fit.ks_statistic,
            n_samples: fit.n_samples,
            transactions_done: ens.transactions_done(),
            seed: ens.seed(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    #[test]
    fn equal_initialization() {
        let e = AgentEnsemble::new(4, &InitialMoney::Equal(1.0), 1).unwrap();
        assert_eq!(e.money(), &[1.0; 4]);
        assert_eq!(e.initial_total(), 4.0);
        assert!(matches!(
            AgentEnsemble::new(1, &InitialMoney::Equal(1.0), 1),
            Err(Error::TooFewAgents(1))
        ));
        assert!(AgentEnsemble::new(4, &InitialMoney::Equal(0.0), 1).is_err());
    }

    #[test]
    fn forced_split() {
        let mut e = AgentEnsemble::new(2, &InitialMoney::Equal(1.0), 1).unwrap();
        e.exchange(0, 1, 0.25);
        let mut m = e.money().to_vec();
        m.sort_by(f64::total_cmp);
        assert_eq!(m, vec![0.5, 1.5]);
    }

    #[test]
    fn density_initialization_matches_mean() {
        let g = Grid::new(4097, 40.0).unwrap();
        let y = Density::exponential(g, 1.0).unwrap();
        let e = AgentEnsemble::new(100_000, &InitialMoney::FromDensity(y), 3).unwrap();
        let mean = e.mean();
        assert!((0.99..=1.01).contains(&mean), "{mean}");
        assert!(e.money().iter().all(|&m| (0.0..=40.0).contains(&m)));
        let zero = Density::zeros(g);
        assert!(matches!(
            AgentEnsemble::new(10, &InitialMoney::FromDensity(zero), 3),
            Err(Error::DegenerateDensity)
        ));
    }

    #[test]
    fn transactions_conserve_and_count() {
        let mut e = AgentEnsemble::new(1000, &InitialMoney::Equal(2.0), 9).unwrap();
        e.run_transactions(50_000);
        assert_eq!(e.transactions_done(), 50_000);
        let drift = (e.current_total() - e.initial_total()).abs() / e.initial_total();
        assert!(drift < 1e-12);
        assert!(e.money().iter().all(|&m| m >= 0.0));
    }

    #[test]
    fn same_seed_same_ensemble() {
        let mut a = AgentEnsemble::new(500, &InitialMoney::Equal(1.0), 42).unwrap();
        let mut b = AgentEnsemble::new(500, &InitialMoney::Equal(1.0), 42).unwrap();
        a.run_transactions(10_000);
        b.run_transactions(4_000);
        b.run_transactions(6_000);
        assert_eq!(a.money(), b.money());
        let mut c = AgentEnsemble::with_stream(500, &InitialMoney::Equal(1.0), 42, 1).unwrap();
        c.run_transactions(10_000);
        assert_ne!(a.money(), c.money());
    }

    #[test]
    fn point_mass_histogram_and_fit() {
        let e = AgentEnsemble::new(10, &InitialMoney::Equal(1.0), 0).unwrap();
        for bins in [2, 3, 7, 10] {
            let h = histogram(&e, bins, 2.0).unwrap();
            let nonzero: Vec<_> = h.densities.iter().filter(|d| **d > 0.0).collect();
            assert_eq!(nonzero.len(), 1);
            assert!((h.total_mass() - 1.0).abs() < 1e-12);
            assert_eq!(h.overflow, 0);
        }
        assert!(histogram(&e, 1, 2.0).is_err());
        assert!(histogram(&e, 10, 0.0).is_err());
        let h = histogram(&e, 10, 0.5).unwrap();
        assert_eq!(h.overflow, 10);

        let fit = fit_exponential(&e).unwrap();
        assert_eq!(fit.beta_hat, 1.0);
        let expected = 1.0 - (-1.0f64).exp();
        assert!((fit.ks_statistic - expected).abs() < 1e-12, "{}", fit.ks_statistic);
    }

    #[test]
    fn fit_of_exponential_sample() {
        let g = Grid::new(4097, 20.0).unwrap();
        let y = Density::exponential(g, 2.0).unwrap();
        let e = AgentEnsemble::new(100_000, &InitialMoney::FromDensity(y), 11).unwrap();
        let fit = fit_exponential(&e).unwrap();
        // 3σ band for the MLE: β (1 ± 3/√N)
        let band = 2.0 * 3.0 / (100_000f64).sqrt();
        assert!((fit.beta_hat - 2.0).abs() < band, "{}", fit.beta_hat);
        assert!((fit.beta_hat * e.mean() - 1.0).abs() < 1e-12);
        assert!(fit.ks_statistic < 0.01);
    }

    #[test]
    fn degenerate_ensemble() {
        let e = AgentEnsemble::from_money(vec![0.0; 5], 0).unwrap();
        assert!(matches!(fit_exponential(&e), Err(Error::DegenerateEnsemble)));
        assert!(AgentEnsemble::from_money(vec![1.0], 0).is_err());
        assert!(AgentEnsemble::from_money(vec![1.0, -1.0], 0).is_err());
    }
}
