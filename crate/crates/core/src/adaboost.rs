//! AdaBoost over a stump space, with optional prior smoothing of the weights.

use crate::error::{Error, Result};
use crate::hypotheses::{Dataset, Ensemble, StumpSpace};
use crate::numerics::log_sum_exp;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaConfig {
    pub rounds: usize,
    /// 0 gives classic AdaBoost.
    pub smoothing_mu0: f64,
    pub tau: f64,
}

impl Default for AdaConfig {
    fn default() -> Self {
        Self {
            rounds: 100,
            smoothing_mu0: 0.0,
            tau: 1.0,
        }
    }
}

impl AdaConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::Domain("rounds must be at least 1".into()));
        }
        if !(self.smoothing_mu0 >= 0.0) || !self.smoothing_mu0.is_finite() {
            return Err(Error::Domain(format!("smoothing_mu0 must be ≥ 0, got {}", self.smoothing_mu0)));
        }
        if !(self.tau > 0.0) || !self.tau.is_finite() {
            return Err(Error::Domain(format!("tau must be positive, got {}", self.tau)));
        }
        Ok(())
    }
}

/// `(1/2τ) log((μ₀/Z + 1 − ε) / (μ₀/Z + ε))`.
pub fn smoothed_alpha(eps: f64, z: f64, mu0: f64, tau: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::Domain(format!("weighted error must lie in [0, 1], got {eps}")));
    }
    if !(z > 0.0) {
        return Err(Error::Domain(format!("Z must be positive, got {z}")));
    }
    smoothed_alpha_ratio(eps, mu0 / z, tau)
}

/// Same as [`smoothed_alpha`] with the ratio `μ₀/Z` supplied directly, which
/// lets callers form it in log space.
pub fn smoothed_alpha_ratio(eps: f64, ratio: f64, tau: f64) -> Result<f64> {
    if !(ratio >= 0.0) {
        return Err(Error::Domain(format!("μ₀/Z must be ≥ 0, got {ratio}")));
    }
    if !(tau > 0.0) {
        return Err(Error::Domain(format!("tau must be positive, got {tau}")));
    }
    if ratio == 0.0 && (eps == 0.0 || eps == 1.0) {
        return Err(Error::DegenerateWeight { eps });
    }
    Ok(((ratio + 1.0 - eps).ln() - (ratio + eps).ln()) / (2.0 * tau))
}

/// Per-round record of an AdaBoost run.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaRound {
    pub stump: usize,
    pub alpha: f64,
    pub weighted_error: f64,
    /// `Σ_n exp(−τ y_n H(x_n))` after committing the round.
    pub exp_loss: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdaOutcome {
    pub ensemble: Ensemble,
    pub stages: Vec<(f64, usize)>,
    pub rounds: Vec<AdaRound>,
    pub margins: Vec<f64>,
}

/// Log of the unnormalized example weights `−τ y_n H(x_n)`.
fn log_weights(labels: &[i8], margins: &[f64], tau: f64) -> Vec<f64> {
    labels.iter().zip(margins).map(|(&y, &h)| -tau * f64::from(y) * h).collect()
}

/// Run AdaBoost: pick the stump of least weighted error, weight it with
/// [`smoothed_alpha`], and reweight examples by `exp(−τ y_n H(x_n))`.
pub fn run_adaboost(data: &Dataset, space: &StumpSpace, cfg: &AdaConfig) -> Result<AdaOutcome> {
    cfg.validate()?;
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    if space.n() != data.n() {
        return Err(Error::Precondition("stump space was built on a different dataset".into()));
    }
    let labels = data.labels();
    let mut margins = vec![0.0; data.n()];
    let mut stages = Vec::with_capacity(cfg.rounds);
    let mut rounds = Vec::with_capacity(cfg.rounds);
    let mut ensemble = Ensemble::default();
    for _ in 0..cfg.rounds {
        let lw = log_weights(labels, &margins, cfg.tau);
        let log_z = log_sum_exp(lw.iter().copied());
        let d: Vec<f64> = lw.iter().map(|v| (v - log_z).exp()).collect();
        let errors = space.weighted_errors(labels, &d);
        let mut best = 0;
        for (m, &e) in errors.iter().enumerate() {
            if e < errors[best] {
                best = m;
            }
        }
        let eps = errors[best].clamp(0.0, 1.0);
        let ratio = if cfg.smoothing_mu0 == 0.0 {
            0.0
        } else {
            (cfg.smoothing_mu0.ln() - log_z).min(700.0).exp()
        };
        let alpha = smoothed_alpha_ratio(eps, ratio, cfg.tau)?;
        for (h, &p) in margins.iter_mut().zip(space.row(best)) {
            *h += alpha * f64::from(p);
        }
        let exp_loss = log_sum_exp(log_weights(labels, &margins, cfg.tau)).exp();
        stages.push((alpha, best));
        ensemble.stages.push((alpha, space.stumps()[best]));
        rounds.push(AdaRound {
            stump: best,
            alpha,
            weighted_error: eps,
            exp_loss,
        });
    }
    Ok(AdaOutcome {
        ensemble,
        stages,
        rounds,
        margins,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::build_stumps;

    #[test]
    fn alpha_examples() {
        for mu0 in [0.0, 1.0, 5.0] {
            assert_eq!(smoothed_alpha(0.5, 3.0, mu0, 1.0).unwrap(), 0.0);
        }
        assert!((smoothed_alpha(0.25, 1.0, 0.0, 1.0).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-15);
        assert!((smoothed_alpha(0.25, 1.0, 1.0, 1.0).unwrap() - 0.168236).abs() < 1e-6);
    }

    #[test]
    fn alpha_errors() {
        assert!(matches!(smoothed_alpha(0.0, 1.0, 0.0, 1.0), Err(Error::DegenerateWeight { .. })));
        assert!(matches!(smoothed_alpha(1.0, 1.0, 0.0, 1.0), Err(Error::DegenerateWeight { .. })));
        assert!(smoothed_alpha(0.0, 1.0, 1.0, 1.0).unwrap().is_finite());
        assert!(smoothed_alpha(1.2, 1.0, 1.0, 1.0).is_err());
        assert!(smoothed_alpha(0.2, 0.0, 1.0, 1.0).is_err());
        assert!(smoothed_alpha(0.2, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn separable_pair() {
        let d = Dataset::from_flat(1, vec![-1.0, 1.0], vec![-1, 1]).unwrap();
        let space = build_stumps(&d).unwrap();
        let cfg = AdaConfig {
            rounds: 1,
            smoothing_mu0: 1.0,
            tau: 1.0,
        };
        let out = run_adaboost(&d, &space, &cfg).unwrap();
        assert_eq!(out.ensemble.error(&d), 0.0);
        let classic = AdaConfig { smoothing_mu0: 0.0, ..cfg };
        assert!(matches!(run_adaboost(&d, &space, &classic), Err(Error::DegenerateWeight { .. })));
    }

    #[test]
    fn hand_traced_three_rounds() {
        // x = 1..4, y = (+1, −1, +1, +1). Stumps: θ=0 (all +1), 1.5, 2.5, 3.5.
        let d = Dataset::from_flat(1, vec![1.0, 2.0, 3.0, 4.0], vec![1, -1, 1, 1]).unwrap();
        let space = build_stumps(&d).unwrap();
        let thresholds: Vec<f64> = space.stumps().iter().map(|s| s.threshold).collect();
        assert_eq!(thresholds, vec![0.0, 1.5, 2.5, 3.5]);
        let out = run_adaboost(
            &d,
            &space,
            &AdaConfig {
                rounds: 3,
                smoothing_mu0: 0.0,
                tau: 1.0,
            },
        )
        .unwrap();
        // Round 1: uniform d; errors (1/4, 1/2, 1/4, 1/2) → stump 0, α = ½ log 3.
        // Weights become (1,3,1,1)/6 after normalization.
        // Round 2: errors (1/2, 2/3, 1/6, 1/3) → stump 2, α = ½ log 5.
        assert_eq!(out.rounds[0].stump, 0);
        assert!((out.rounds[0].alpha - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert_eq!(out.rounds[1].stump, 2);
        assert!((out.rounds[1].weighted_error - 1.0 / 6.0).abs() < 1e-12);
        assert!((out.rounds[1].alpha - 0.5 * 5f64.ln()).abs() < 1e-12);
        // Z_t = 2√(ε(1−ε)) per round, so Σ e^{−yH} = 4·Π Z_t.
        let mut expected = 4.0;
        for r in &out.rounds {
            expected *= 2.0 * (r.weighted_error * (1.0 - r.weighted_error)).sqrt();
            assert!((r.exp_loss - expected).abs() < 1e-12);
        }
        // Round 3 by hand: d ∝ e^{−yH} with H after two rounds.
        let a1 = 0.5 * 3f64.ln();
        let a2 = 0.5 * 5f64.ln();
        let h: [f64; 4] = [a1 - a2, a1 - a2, a1 + a2, a1 + a2];
        let y: [f64; 4] = [1.0, -1.0, 1.0, 1.0];
        let w: Vec<f64> = h.iter().zip(&y).map(|(h, y)| (-y * h).exp()).collect();
        let total: f64 = w.iter().sum();
        let rows = [[1, 1, 1, 1], [-1, 1, 1, 1], [-1, -1, 1, 1], [-1, -1, -1, 1]];
        let errs: Vec<f64> = rows
            .iter()
            .map(|r| (0..4).filter(|&i| f64::from(r[i]) != y[i]).map(|i| w[i] / total).sum::<f64>())
            .collect();
        let best = (0..4).fold(0, |b, m| if errs[m] < errs[b] { m } else { b });
        assert_eq!(out.rounds[2].stump, best);
        assert!((out.rounds[2].weighted_error - errs[best]).abs() < 1e-12);
    }
}
