//! Brute-force reference computations shared by the integration tests.
#![allow(dead_code)]

use viboost_core::hypotheses::{build_stumps, Dataset, StumpSpace};
use viboost_core::numerics::ln_beta;
use viboost_core::vlog::VLogParams;

/// Trapezoid `log ∫ exp(unnorm_log_density)` over `[lo, hi]`.
pub fn trapezoid_log_normalizer(p: &VLogParams, lo: f64, hi: f64, step: f64) -> f64 {
    let n = ((hi - lo) / step).round() as usize;
    let peak = (0..=n)
        .map(|i| p.unnorm_log_density(lo + step * i as f64))
        .fold(f64::NEG_INFINITY, f64::max);
    let mut acc = 0.0;
    for i in 0..=n {
        let w = if i == 0 || i == n { 0.5 } else { 1.0 };
        acc += w * (p.unnorm_log_density(lo + step * i as f64) - peak).exp();
    }
    peak + (acc * step).ln()
}

/// Tabulated CDF on a uniform grid, integrated with the trapezoid rule.
pub struct GridCdf {
    lo: f64,
    step: f64,
    values: Vec<f64>,
}

impl GridCdf {
    pub fn new(p: &VLogParams, lo: f64, hi: f64, step: f64) -> Self {
        let n = ((hi - lo) / step).round() as usize;
        let dens: Vec<f64> = (0..=n).map(|i| p.unnorm_log_density(lo + step * i as f64).exp()).collect();
        let mut values = Vec::with_capacity(n + 1);
        let mut acc = 0.0;
        values.push(0.0);
        for i in 1..=n {
            acc += 0.5 * step * (dens[i - 1] + dens[i]);
            values.push(acc);
        }
        let total = acc;
        values.iter_mut().for_each(|v| *v /= total);
        Self { lo, step, values }
    }

    pub fn eval(&self, z: f64) -> f64 {
        let pos = (z - self.lo) / self.step;
        if pos <= 0.0 {
            return 0.0;
        }
        let i = pos.floor() as usize;
        if i + 1 >= self.values.len() {
            return 1.0;
        }
        let t = pos - i as f64;
        self.values[i] * (1.0 - t) + self.values[i + 1] * t
    }
}

/// Two-sided Kolmogorov–Smirnov statistic.
pub fn ks_statistic(mut samples: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    samples.sort_by(f64::total_cmp);
    let n = samples.len() as f64;
    samples
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let f = cdf(z);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}

/// Fixed six-example, three-stump problem.
pub fn micro_instance() -> (Dataset, StumpSpace) {
    let xs = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
    let ys = vec![-1, -1, 1, -1, 1, 1];
    let data = Dataset::from_flat(1, xs, ys).unwrap();
    let full = build_stumps(&data).unwrap();
    // thresholds 2.5, 3.5 and 4.5
    let space = full.restrict(&[2, 3, 4]).unwrap();
    (data, space)
}

/// Exact posterior over the type selectors of the full noise model.
pub struct Enumeration {
    /// `P(w | y)` indexed by the bit mask of `w` (bit n set ⇔ w_n = 1).
    pub probs: Vec<f64>,
    pub mean_theta: f64,
}

/// Enumerate every `w ∈ {0,1}^N`. `θ` and `ξ` are integrated in closed form;
/// the weights `c ∈ ℝ^M` on a uniform grid over `[−half_width, half_width]^M`.
pub fn enumerate_posterior(
    labels: &[i8],
    rows: &[Vec<i8>],
    mu0: f64,
    mu0_prime: f64,
    zeta: [f64; 2],
    half_width: f64,
    step: f64,
) -> Enumeration {
    let n = labels.len();
    let m = rows.len();
    let configs = 1usize << n;
    let prior = VLogParams::symmetric(mu0).unwrap();
    let log_prior_norm = ln_beta(mu0, mu0);
    let points = ((2.0 * half_width) / step).round() as usize + 1;
    let grid: Vec<f64> = (0..points).map(|i| -half_width + step * i as f64).collect();
    let prior_w: Vec<f64> = grid
        .iter()
        .map(|&c| (prior.unnorm_log_density(c) - log_prior_norm).exp() * step)
        .collect();

    // I(S) = ∫ prior(c) Π_{n ∈ S} σ(y_n Σ c_m f_m(x_n)) dc for every subset S
    let mut integral = vec![0.0; configs];
    let mut idx = vec![0usize; m];
    let mut prod = vec![0.0; configs];
    loop {
        let mut weight = 1.0;
        for &i in &idx {
            weight *= prior_w[i];
        }
        let lik: Vec<f64> = (0..n)
            .map(|k| {
                let score: f64 = (0..m).map(|j| grid[idx[j]] * f64::from(rows[j][k])).sum();
                1.0 / (1.0 + (-f64::from(labels[k]) * score).exp())
            })
            .collect();
        prod[0] = 1.0;
        for mask in 1..configs {
            let low = mask.trailing_zeros() as usize;
            prod[mask] = prod[mask & (mask - 1)] * lik[low];
        }
        for mask in 0..configs {
            integral[mask] += weight * prod[mask];
        }
        let mut j = 0;
        loop {
            if j == m {
                break;
            }
            idx[j] += 1;
            if idx[j] < points {
                break;
            }
            idx[j] = 0;
            j += 1;
        }
        if j == m {
            break;
        }
    }

    let mut unnorm = vec![0.0; configs];
    for mask in 0..configs {
        let ones = mask.count_ones() as f64;
        let (mut w1, mut w2) = (mu0_prime, mu0_prime);
        for k in 0..n {
            if mask & (1 << k) == 0 {
                if labels[k] > 0 {
                    w2 += 1.0;
                } else {
                    w1 += 1.0;
                }
            }
        }
        let theta_part = ln_beta(zeta[0] + ones, zeta[1] + n as f64 - ones) - ln_beta(zeta[0], zeta[1]);
        let xi_part = ln_beta(w1, w2) - ln_beta(mu0_prime, mu0_prime);
        unnorm[mask] = (theta_part + xi_part).exp() * integral[mask];
    }
    let total: f64 = unnorm.iter().sum();
    let probs: Vec<f64> = unnorm.iter().map(|v| v / total).collect();
    let z0 = zeta[0] + zeta[1] + n as f64;
    let mean_theta = probs
        .iter()
        .enumerate()
        .map(|(mask, p)| p * (zeta[0] + mask.count_ones() as f64) / z0)
        .sum();
    Enumeration { probs, mean_theta }
}
