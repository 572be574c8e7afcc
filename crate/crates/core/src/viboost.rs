//! VIBoost: stagewise variational inference over a stump ensemble with a
//! latent true/noisy type for every label.
//!
//! Each stage picks the stump whose v-Log weight posterior has the largest
//! modal magnitude, then alternates the weight, noise-grade, type-selector
//! and type-prior updates before committing the weight to the ensemble.

use crate::adaboost::smoothed_alpha_ratio;
use crate::error::{Error, Result};
use crate::hypotheses::{Dataset, Ensemble, StumpSpace};
use crate::numerics::{ln_gamma, log1pexp, log_sum_exp, psi, sigmoid, QuadratureConfig, GOLDEN_TOL};
use crate::vlog::VLogParams;

/// How the stage weight is read off its v-Log posterior.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AlphaRule {
    /// Closed-form tail approximation with the configured τ.
    Approximate,
    /// Golden-section mode of the exact posterior.
    Exact,
}

#[derive(Debug, Clone, PartialEq)]
pub struct VIConfig {
    pub mu0: f64,
    pub mu0_prime: f64,
    pub zeta: [f64; 2],
    pub tau: f64,
    pub rounds: usize,
    /// Inner loop stops once the ELBO gains less than this.
    pub inner_tol: f64,
    pub inner_max: usize,
    pub elbo_enabled: bool,
    /// Inner iterations per stage when the ELBO is not tracked.
    pub fixed_inner: usize,
    pub alpha_rule: AlphaRule,
    pub init_phi: f64,
    pub init_omega: [f64; 2],
    pub init_eta: [f64; 2],
    pub quadrature: QuadratureConfig,
}

impl Default for VIConfig {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            mu0_prime: 1.0,
            zeta: [1.0, 1.0],
            tau: 1.0,
            rounds: 100,
            inner_tol: 1e-6,
            inner_max: 50,
            elbo_enabled: false,
            fixed_inner: 5,
            alpha_rule: AlphaRule::Approximate,
            init_phi: 1.0,
            init_omega: [1.0, 1.0],
            init_eta: [1.0, 1.0],
            quadrature: QuadratureConfig::default(),
        }
    }
}

impl VIConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("mu0", self.mu0),
            ("mu0_prime", self.mu0_prime),
            ("zeta1", self.zeta[0]),
            ("zeta2", self.zeta[1]),
            ("tau", self.tau),
            ("omega1", self.init_omega[0]),
            ("omega2", self.init_omega[1]),
            ("eta1", self.init_eta[0]),
            ("eta2", self.init_eta[1]),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.rounds < 1 || self.inner_max < 1 || self.fixed_inner < 1 {
            return Err(Error::Domain("rounds, inner_max and fixed_inner must be at least 1".into()));
        }
        if !(0.0..=1.0).contains(&self.init_phi) {
            return Err(Error::Domain(format!("init_phi must lie in [0, 1], got {}", self.init_phi)));
        }
        if !self.inner_tol.is_finite() {
            return Err(Error::Domain("inner_tol must be finite".into()));
        }
        self.quadrature.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostState {
    /// `H(x_n)` on the training examples.
    pub margins: Vec<f64>,
    /// Committed `(α_t, stump index)` pairs.
    pub stages: Vec<(f64, usize)>,
    /// Posterior probability that each label is a true label.
    pub phi: Vec<f64>,
    pub omega: [f64; 2],
    pub eta: [f64; 2],
    pub elbo_trace: Vec<f64>,
}

impl BoostState {
    pub fn new(n: usize, cfg: &VIConfig) -> Self {
        Self {
            margins: vec![0.0; n],
            stages: Vec::new(),
            phi: vec![cfg.init_phi; n],
            omega: cfg.init_omega,
            eta: cfg.init_eta,
            elbo_trace: Vec::new(),
        }
    }

    /// Add `α·h` to the ensemble.
    pub fn commit(&mut self, alpha: f64, h: usize, space: &StumpSpace) {
        for (m, &p) in self.margins.iter_mut().zip(space.row(h)) {
            *m += alpha * f64::from(p);
        }
        self.stages.push((alpha, h));
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseReport {
    pub snr: f64,
    pub noise_grade: f64,
    pub per_example_true_prob: Vec<f64>,
    pub elbo_trace: Vec<f64>,
}

/// `snr = η₁/η₂`, `noise_grade = log(ω₂/ω₁)`.
pub fn noise_report(state: &BoostState) -> NoiseReport {
    NoiseReport {
        snr: state.eta[0] / state.eta[1],
        noise_grade: (state.omega[1] / state.omega[0]).ln(),
        per_example_true_prob: state.phi.clone(),
        elbo_trace: state.elbo_trace.clone(),
    }
}

/// Stage posterior of the new weight from raw pieces: slopes
/// `[+1, −1, −y_n h_n]`, knots `[0, 0, −H_n h_n]`, multiplicities `[μ₀, μ₀, φ_n]`.
pub fn stage_vlog_params_from(labels: &[i8], row: &[i8], margins: &[f64], phi: &[f64], mu0: f64) -> Result<VLogParams> {
    let n = labels.len();
    let mut slopes = Vec::with_capacity(n + 2);
    let mut knots = Vec::with_capacity(n + 2);
    let mut mus = Vec::with_capacity(n + 2);
    slopes.extend([1.0, -1.0]);
    knots.extend([0.0, 0.0]);
    mus.extend([mu0, mu0]);
    for i in 0..n {
        let h = f64::from(row[i]);
        slopes.push(-f64::from(labels[i]) * h);
        // written so that a zero margin gives +0.0
        knots.push(if margins[i] == 0.0 { 0.0 } else { -margins[i] * h });
        mus.push(phi[i]);
    }
    VLogParams::new(slopes, knots, mus)
}

pub fn stage_vlog_params(state: &BoostState, h: usize, data: &Dataset, space: &StumpSpace, cfg: &VIConfig) -> Result<VLogParams> {
    check_index(h, space)?;
    stage_vlog_params_from(data.labels(), space.row(h), &state.margins, &state.phi, cfg.mu0)
}

fn check_index(h: usize, space: &StumpSpace) -> Result<()> {
    if h >= space.len() {
        return Err(Error::Index { index: h, len: space.len() });
    }
    Ok(())
}

/// `(log Z, d)` with `Z = Σ φ_n e^{−τ y_n H_n}` and `d_n` its normalized terms.
fn example_distribution(labels: &[i8], margins: &[f64], phi: &[f64], tau: f64) -> (f64, Vec<f64>) {
    let lw: Vec<f64> = labels
        .iter()
        .zip(margins)
        .zip(phi)
        .map(|((&y, &h), &p)| p.ln() - tau * f64::from(y) * h)
        .collect();
    let log_z = log_sum_exp(lw.iter().copied());
    if log_z == f64::NEG_INFINITY {
        return (log_z, vec![0.0; lw.len()]);
    }
    let d = lw.iter().map(|v| (v - log_z).exp()).collect();
    (log_z, d)
}

/// Approximate stage weight of every stump, through the weighted-error form
/// `(1/2τ) log((μ₀/Z + 1 − ε) / (μ₀/Z + ε))`.
pub fn candidate_alphas(state: &BoostState, data: &Dataset, space: &StumpSpace, cfg: &VIConfig) -> Vec<f64> {
    let (log_z, d) = example_distribution(data.labels(), &state.margins, &state.phi, cfg.tau);
    if log_z == f64::NEG_INFINITY {
        return vec![0.0; space.len()];
    }
    let ratio = (cfg.mu0.ln() - log_z).min(700.0).exp();
    space
        .weighted_errors(data.labels(), &d)
        .into_iter()
        .map(|eps| smoothed_alpha_ratio(eps.clamp(0.0, 1.0), ratio, cfg.tau).unwrap_or(0.0))
        .collect()
}

/// Index of the stump with the largest `|α|`; ties go to the lowest index.
pub fn select_classifier(state: &BoostState, data: &Dataset, space: &StumpSpace, cfg: &VIConfig) -> Result<usize> {
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    let alphas = candidate_alphas(state, data, space, cfg);
    let mut best = 0;
    for (m, a) in alphas.iter().enumerate() {
        if a.abs() > alphas[best].abs() {
            best = m;
        }
    }
    Ok(best)
}

fn stage_alpha(params: &VLogParams, cfg: &VIConfig) -> Result<f64> {
    match cfg.alpha_rule {
        AlphaRule::Approximate => params.mode_approx(cfg.tau),
        AlphaRule::Exact => params.mode_exact(GOLDEN_TOL),
    }
}

/// One pass of the four coordinate updates for stump `h`; returns the stage weight.
pub fn vi_inner_iteration(
    state: &mut BoostState,
    h: usize,
    data: &Dataset,
    space: &StumpSpace,
    cfg: &VIConfig,
) -> Result<f64> {
    let params = stage_vlog_params(state, h, data, space, cfg)?;
    let alpha = stage_alpha(&params, cfg)?;

    let labels = data.labels();
    state.omega = omega_update(labels, &state.phi, cfg.mu0_prime);
    let row = space.row(h);
    for i in 0..labels.len() {
        let margin = state.margins[i] + alpha * f64::from(row[i]);
        state.phi[i] = sigmoid(type_log_odds(labels[i], margin, state.omega, state.eta));
    }
    state.eta = eta_update(&state.phi, cfg.zeta);
    Ok(alpha)
}

/// `Σ_{y=−1}(1 − φ_n)` and `Σ_{y=+1}(1 − φ_n)`.
fn noisy_mass(labels: &[i8], phi: &[f64]) -> (f64, f64) {
    let (mut s_neg, mut s_pos) = (0.0, 0.0);
    for (&y, &p) in labels.iter().zip(phi) {
        if y > 0 {
            s_pos += 1.0 - p;
        } else {
            s_neg += 1.0 - p;
        }
    }
    (s_neg, s_pos)
}

/// Noise-grade update `ω = μ₀′ + (Σ_{y=−1}(1−φ), Σ_{y=+1}(1−φ))`.
pub fn omega_update(labels: &[i8], phi: &[f64], mu0_prime: f64) -> [f64; 2] {
    let (s_neg, s_pos) = noisy_mass(labels, phi);
    [mu0_prime + s_neg, mu0_prime + s_pos]
}

/// Type-prior update `η = (ζ₁ + Σφ, ζ₂ + Σ(1−φ))`.
pub fn eta_update(phi: &[f64], zeta: [f64; 2]) -> [f64; 2] {
    let true_mass: f64 = phi.iter().sum();
    [zeta[0] + true_mass, zeta[1] + (phi.len() as f64 - true_mass)]
}

/// `log κ_n`, the log-odds that label `y` with ensemble margin `margin` is a true label.
pub fn type_log_odds(y: i8, margin: f64, omega: [f64; 2], eta: [f64; 2]) -> f64 {
    let [w1, w2] = omega;
    let noise_term = if y > 0 { psi(w2) } else { psi(w1) };
    psi(eta[0]) - psi(eta[1]) + psi(w1 + w2) - noise_term - log1pexp(-f64::from(y) * margin)
}

fn xlogx(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x * x.ln()
    }
}

/// Evidence lower bound of the current variational state for stage stump `h`,
/// up to an additive constant. The weight factor enters through the log
/// normalizer of its stage posterior, so the value does not depend on α.
pub fn elbo(state: &BoostState, h: usize, data: &Dataset, space: &StumpSpace, cfg: &VIConfig) -> Result<f64> {
    check_index(h, space)?;
    elbo_from(data.labels(), space.row(h), state, cfg)
}

/// [`elbo`] with the labels and the stage stump's predictions supplied directly.
pub fn elbo_from(labels: &[i8], row: &[i8], state: &BoostState, cfg: &VIConfig) -> Result<f64> {
    let params = stage_vlog_params_from(labels, row, &state.margins, &state.phi, cfg.mu0)?;
    let log_b = params.log_normalizer(&cfg.quadrature)?;

    let n = labels.len() as f64;
    let [w1, w2] = state.omega;
    let [e1, e2] = state.eta;
    let (w0, e0) = (w1 + w2, e1 + e2);
    let mp = cfg.mu0_prime;
    let [z1, z2] = cfg.zeta;

    let omega_part = ln_gamma(w1) + ln_gamma(w2) - ln_gamma(w0) + (w0 - 2.0 * mp) * psi(w0)
        - (w1 - mp) * psi(w1)
        - (w2 - mp) * psi(w2);
    let eta_part = ln_gamma(e1) + ln_gamma(e2) - ln_gamma(e0) + (e0 - z1 - z2) * psi(e0)
        - (e1 - z1) * psi(e1)
        - (e2 - z2) * psi(e2);

    let entropy: f64 = -state.phi.iter().map(|&p| xlogx(p) + xlogx(1.0 - p)).sum::<f64>();
    let true_mass: f64 = state.phi.iter().sum();
    let type_part = -n * psi(e0) + psi(e1) * true_mass + psi(e2) * (n - true_mass);

    let (s_neg, s_pos) = noisy_mass(labels, &state.phi);
    let noise_part = -psi(w0) * (s_neg + s_pos) + psi(w1) * s_neg + psi(w2) * s_pos;

    Ok(log_b + omega_part + eta_part + entropy + type_part + noise_part)
}

/// What happened in one boosting round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundSummary {
    pub stump: usize,
    pub alpha: f64,
    pub inner_iterations: usize,
    /// ELBO before the first inner iteration followed by the value after each one.
    pub elbo: Vec<f64>,
    pub snr: f64,
    pub noise_grade: f64,
    pub train_error: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoostOutcome {
    pub ensemble: Ensemble,
    pub report: NoiseReport,
    pub state: BoostState,
    pub rounds: Vec<RoundSummary>,
}

fn train_error(margins: &[f64], labels: &[i8]) -> f64 {
    let wrong = margins
        .iter()
        .zip(labels)
        .filter(|(&h, &y)| (if h >= 0.0 { 1 } else { -1 }) != y)
        .count();
    wrong as f64 / labels.len() as f64
}

/// Run VIBoost for `cfg.rounds` stages with warm-started variational parameters.
pub fn run(data: &Dataset, space: &StumpSpace, cfg: &VIConfig) -> Result<BoostOutcome> {
    cfg.validate()?;
    if space.is_empty() {
        return Err(Error::EmptySpace);
    }
    if space.n() != data.n() {
        return Err(Error::Precondition("stump space was built on a different dataset".into()));
    }
    let mut state = BoostState::new(data.n(), cfg);
    let mut ensemble = Ensemble::default();
    let mut rounds = Vec::with_capacity(cfg.rounds);

    for _ in 0..cfg.rounds {
        let h = select_classifier(&state, data, space, cfg)?;
        let mut alpha = 0.0;
        let mut trace = Vec::new();
        let mut iterations = 0;
        if cfg.elbo_enabled {
            let mut previous = elbo(&state, h, data, space, cfg)?;
            trace.push(previous);
            for _ in 0..cfg.inner_max {
                alpha = vi_inner_iteration(&mut state, h, data, space, cfg)?;
                iterations += 1;
                let current = elbo(&state, h, data, space, cfg)?;
                trace.push(current);
                if current - previous < cfg.inner_tol {
                    break;
                }
                previous = current;
            }
        } else {
            for _ in 0..cfg.fixed_inner {
                alpha = vi_inner_iteration(&mut state, h, data, space, cfg)?;
                iterations += 1;
            }
        }
        state.commit(alpha, h, space);
        state.elbo_trace.extend_from_slice(&trace);
        ensemble.stages.push((alpha, space.stumps()[h]));
        let report = noise_report(&state);
        rounds.push(RoundSummary {
            stump: h,
            alpha,
            inner_iterations: iterations,
            elbo: trace,
            snr: report.snr,
            noise_grade: report.noise_grade,
            train_error: train_error(&state.margins, data.labels()),
        });
    }
    Ok(BoostOutcome {
        ensemble,
        report: noise_report(&state),
        state,
        rounds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypotheses::build_stumps;
    use crate::numerics::ln_beta;
    use crate::vlog::two_term_expectations;

    fn line(xs: &[f64], ys: &[i8]) -> (Dataset, StumpSpace) {
        let d = Dataset::from_flat(1, xs.to_vec(), ys.to_vec()).unwrap();
        let s = build_stumps(&d).unwrap();
        (d, s)
    }

    #[test]
    fn stage_params_examples() {
        let p = stage_vlog_params_from(&[1, -1], &[1, -1], &[0.0, 0.0], &[1.0, 1.0], 1.0).unwrap();
        assert_eq!(p.slopes(), &[1.0, -1.0, -1.0, -1.0]);
        assert_eq!(p.knots(), &[0.0; 4]);
        assert_eq!(p.multiplicities(), &[1.0; 4]);
        let empty = stage_vlog_params_from(&[], &[], &[], &[], 2.0).unwrap();
        assert_eq!(empty, VLogParams::symmetric(2.0).unwrap());
        let q = stage_vlog_params_from(&[1, 1, -1], &[-1, 1, 1], &[0.3, -2.0, 1.0], &[0.2, 0.5, 0.9], 3.0).unwrap();
        assert_eq!(&q.slopes()[..2], &[1.0, -1.0]);
        assert_eq!(&q.knots()[..2], &[0.0, 0.0]);
        assert_eq!(&q.knots()[2..], &[0.3, 2.0, -1.0]);
    }

    #[test]
    fn selection_prefers_smaller_error() {
        // stump errors under uniform d: 0.4, 0.2, 0.4, 0.2, 0.4
        let (d, space) = line(&[1.0, 2.0, 3.0, 4.0, 5.0], &[-1, 1, -1, 1, 1]);
        let cfg = VIConfig::default();
        let state = BoostState::new(5, &cfg);
        assert_eq!(select_classifier(&state, &d, &space, &cfg).unwrap(), 1);
        let (d, space) = line(&[1.0, 2.0, 3.0, 4.0], &[-1, -1, 1, 1]);
        let state = BoostState::new(4, &cfg);
        let h = select_classifier(&state, &d, &space, &cfg).unwrap();
        assert_eq!(space.stumps()[h].threshold, 2.5);
    }

    #[test]
    fn kappa_example() {
        let lk = type_log_odds(1, 0.0, [1.0, 1.0], [1.0, 1.0]);
        assert!((lk - (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!((lk.exp() - std::f64::consts::E / 2.0).abs() < 1e-12);
        assert!((sigmoid(lk) - 0.57611).abs() < 1e-5);
    }

    #[test]
    fn omega_eta_examples() {
        let w = omega_update(&[1, -1, 1], &[0.5, 0.5, 1.0], 1.0);
        assert_eq!(w, [1.5, 1.5]);
        assert_eq!(eta_update(&[0.5, 0.5, 1.0], [1.0, 1.0]), [3.0, 2.0]);
    }

    #[test]
    fn report_examples() {
        let cfg = VIConfig::default();
        let mut st = BoostState::new(2, &cfg);
        let r = noise_report(&st);
        assert_eq!((r.snr, r.noise_grade), (1.0, 0.0));
        st.eta = [3.0, 2.0];
        st.omega = [1.0, 3.0];
        let r = noise_report(&st);
        assert_eq!(r.snr, 1.5);
        assert!((r.noise_grade - 3f64.ln()).abs() < 1e-15);
    }

    fn trapezoid_log_normalizer(p: &VLogParams) -> f64 {
        let h = 1e-3;
        let n = 120_000;
        let mut acc = 0.0;
        for i in 0..=n {
            let z = -60.0 + h * i as f64;
            let w = if i == 0 || i == n { 0.5 } else { 1.0 };
            acc += w * p.unnorm_log_density(z).exp();
        }
        (acc * h).ln()
    }

    // Expected log joint minus expected log q, summed factor by factor.
    fn itemized_elbo(labels: &[i8], row: &[i8], st: &BoostState, cfg: &VIConfig) -> f64 {
        let p = stage_vlog_params_from(labels, row, &st.margins, &st.phi, cfg.mu0).unwrap();
        let weight_part = trapezoid_log_normalizer(&p);
        let (e_pos, e_neg) = two_term_expectations(st.omega[0], st.omega[1]).unwrap();
        let (mut s_neg, mut s_pos) = (0.0, 0.0);
        for (&y, &f) in labels.iter().zip(&st.phi) {
            if y > 0 { s_pos += 1.0 - f } else { s_neg += 1.0 - f }
        }
        let xi_part = (st.omega[0] - cfg.mu0_prime - s_neg) * e_pos
            + (st.omega[1] - cfg.mu0_prime - s_pos) * e_neg
            + ln_beta(st.omega[0], st.omega[1]);
        let e0 = st.eta[0] + st.eta[1];
        let e_log_theta = psi(st.eta[0]) - psi(e0);
        let e_log_rest = psi(st.eta[1]) - psi(e0);
        let t: f64 = st.phi.iter().sum();
        let n = st.phi.len() as f64;
        let theta_part = (cfg.zeta[0] + t - st.eta[0]) * e_log_theta
            + (cfg.zeta[1] + n - t - st.eta[1]) * e_log_rest
            + ln_beta(st.eta[0], st.eta[1]);
        let entropy: f64 = st
            .phi
            .iter()
            .map(|&f| {
                let a = if f > 0.0 { f * f.ln() } else { 0.0 };
                let b = if f < 1.0 { (1.0 - f) * (1.0 - f).ln() } else { 0.0 };
                -(a + b)
            })
            .sum();
        weight_part + xi_part + theta_part + entropy
    }

    #[test]
    fn elbo_micro_instance() {
        let cfg = VIConfig::default();
        let mut st = BoostState::new(1, &cfg);
        st.phi = vec![0.5];
        let got = elbo_from(&[1], &[1], &st, &cfg).unwrap();
        let want = itemized_elbo(&[1], &[1], &st, &cfg);
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn elbo_general_state() {
        let cfg = VIConfig {
            mu0: 1.7,
            mu0_prime: 0.6,
            zeta: [2.0, 0.5],
            ..VIConfig::default()
        };
        let st = BoostState {
            margins: vec![0.4, -1.2, 2.0, 0.0],
            stages: vec![],
            phi: vec![0.9, 0.0, 1.0, 0.3],
            omega: [1.3, 2.9],
            eta: [4.1, 1.6],
            elbo_trace: vec![],
        };
        let labels = [1, -1, -1, 1];
        let row = [1, 1, -1, -1];
        let got = elbo_from(&labels, &row, &st, &cfg).unwrap();
        let want = itemized_elbo(&labels, &row, &st, &cfg);
        assert!((got - want).abs() < 1e-7, "{got} vs {want}");
    }

    #[test]
    fn entropy_vanishes_for_hard_types() {
        let cfg = VIConfig::default();
        let mut st = BoostState::new(2, &cfg);
        st.phi = vec![1.0, 0.0];
        assert!(elbo_from(&[1, -1], &[1, 1], &st, &cfg).unwrap().is_finite());
    }

    #[test]
    fn inner_iteration_invariants() {
        let (d, space) = line(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[-1, 1, -1, 1, 1, 1]);
        let cfg = VIConfig::default();
        let mut st = BoostState::new(6, &cfg);
        for h in [0, 2, 3] {
            vi_inner_iteration(&mut st, h, &d, &space, &cfg).unwrap();
            assert!(st.phi.iter().all(|&p| p > 0.0 && p < 1.0));
            assert!((st.eta[0] + st.eta[1] - 8.0).abs() < 1e-12);
        }
    }

    #[test]
    fn separable_data_is_fit() {
        let (d, space) = line(&[-3.0, -2.0, -1.0, 1.0, 2.0, 3.0], &[-1, -1, -1, 1, 1, 1]);
        let cfg = VIConfig {
            rounds: 3,
            ..VIConfig::default()
        };
        let out = run(&d, &space, &cfg).unwrap();
        assert_eq!(out.ensemble.error(&d), 0.0);
        assert_eq!(out.state.stages.len(), 3);
        for i in 0..d.n() {
            let m = crate::hypotheses::ensemble_margin(&out.state.stages, &space, i).unwrap();
            assert!((m - out.state.margins[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn elbo_loop_records_traces() {
        let (d, space) = line(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0], &[-1, 1, -1, 1, 1, 1]);
        let cfg = VIConfig {
            rounds: 2,
            elbo_enabled: true,
            ..VIConfig::default()
        };
        let out = run(&d, &space, &cfg).unwrap();
        for r in &out.rounds {
            assert_eq!(r.elbo.len(), r.inner_iterations + 1);
            assert!(r.inner_iterations >= 1 && r.inner_iterations <= cfg.inner_max);
        }
        assert_eq!(out.report.elbo_trace.len(), out.rounds.iter().map(|r| r.elbo.len()).sum::<usize>());
    }

    #[test]
    fn exact_rule_runs() {
        let (d, space) = line(&[1.0, 2.0, 3.0, 4.0], &[-1, 1, -1, 1]);
        let cfg = VIConfig {
            rounds: 2,
            alpha_rule: AlphaRule::Exact,
            ..VIConfig::default()
        };
        assert!(run(&d, &space, &cfg).is_ok());
    }

    #[test]
    fn config_validation() {
        assert!(VIConfig::default().validate().is_ok());
        assert!(VIConfig { mu0: 0.0, ..VIConfig::default() }.validate().is_err());
        assert!(VIConfig { rounds: 0, ..VIConfig::default() }.validate().is_err());
        assert!(VIConfig { init_phi: 1.5, ..VIConfig::default() }.validate().is_err());
    }
}
