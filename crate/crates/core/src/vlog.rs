//! The Versatile Logistic (v-Log) distribution.
//!
//! A v-Log with slope vector β, knot vector γ and multiplicity vector μ has
//! unnormalized density `prod_k (1 + exp[β_k (z − γ_k)])^{−μ_k}`. The
//! density is log-concave, so it is unimodal whenever it is normalizable,
//! and it is conjugate to the binary-logistic label model.

use rand::Rng;
use rand_distr::{Beta, Distribution, Exp1};

use crate::error::{Error, Result};
use crate::numerics::{
    golden_section_min, integrate_real_line, log1pexp, log_sum_exp, psi, sigmoid, Bracket, QuadratureConfig,
    GOLDEN_TOL,
};

/// Slope/knot/multiplicity parameters of a v-Log distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct VLogParams {
    slopes: Vec<f64>,
    knots: Vec<f64>,
    multiplicities: Vec<f64>,
}

/// One binary-logistic observation: `p(y | z) = 1 / (1 + exp[−y·slope·(z − knot)])`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BLogObservation {
    pub y: i8,
    pub slope: f64,
    pub knot: f64,
}

impl BLogObservation {
    pub fn new(y: i8, slope: f64, knot: f64) -> Result<Self> {
        if y != 1 && y != -1 {
            return Err(Error::Domain(format!("label must be ±1, got {y}")));
        }
        Ok(Self { y, slope, knot })
    }

    /// Log-likelihood of the label at `z`.
    pub fn log_likelihood(&self, z: f64) -> f64 {
        -log1pexp(-f64::from(self.y) * self.slope * (z - self.knot))
    }
}

impl VLogParams {
    pub fn new(slopes: Vec<f64>, knots: Vec<f64>, multiplicities: Vec<f64>) -> Result<Self> {
        let k = slopes.len();
        if knots.len() != k || multiplicities.len() != k {
            return Err(Error::InvalidParams(format!(
                "length mismatch: {} slopes, {} knots, {} multiplicities",
                k,
                knots.len(),
                multiplicities.len()
            )));
        }
        if k < 2 {
            return Err(Error::InvalidParams(format!("need at least two terms, got {k}")));
        }
        if multiplicities.iter().any(|&m| !(m >= 0.0) || !m.is_finite()) {
            return Err(Error::InvalidParams("multiplicities must be finite and nonnegative".into()));
        }
        if slopes.iter().chain(knots.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidParams("slopes and knots must be finite".into()));
        }
        Ok(Self {
            slopes,
            knots,
            multiplicities,
        })
    }

    /// `v-Log(slope·[+1, −1], [knot, knot], [mu_pos, mu_neg])`.
    pub fn two_term(slope: f64, knot: f64, mu_pos: f64, mu_neg: f64) -> Result<Self> {
        Self::new(vec![slope, -slope], vec![knot, knot], vec![mu_pos, mu_neg])
    }

    /// The symmetric prior `v-Log([+1, −1], [0, 0], [mu, mu])`.
    pub fn symmetric(mu: f64) -> Result<Self> {
        Self::two_term(1.0, 0.0, mu, mu)
    }

    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    pub fn knots(&self) -> &[f64] {
        &self.knots
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn len(&self) -> usize {
        self.slopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slopes.is_empty()
    }

    fn terms(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.slopes
            .iter()
            .zip(&self.knots)
            .zip(&self.multiplicities)
            .map(|((&b, &g), &m)| (b, g, m))
    }

    /// Normalizable iff some positive slope and some negative slope both
    /// carry strictly positive multiplicity.
    pub fn is_valid(&self) -> bool {
        let pos = self.terms().any(|(b, _, m)| b > 0.0 && m > 0.0);
        let neg = self.terms().any(|(b, _, m)| b < 0.0 && m > 0.0);
        pos && neg
    }

    fn require_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidParams(
                "density is not normalizable: needs positive and negative slopes with positive multiplicity".into(),
            ))
        }
    }

    /// `−Σ_k μ_k log(1 + exp[β_k (z − γ_k)])`.
    pub fn unnorm_log_density(&self, z: f64) -> f64 {
        -self
            .terms()
            .filter(|&(_, _, m)| m != 0.0)
            .map(|(b, g, m)| m * log1pexp(b * (z - g)))
            .sum::<f64>()
    }

    /// Derivative of the negative log-density.
    pub fn neg_log_density_slope(&self, z: f64) -> f64 {
        self.terms().map(|(b, g, m)| m * b * sigmoid(b * (z - g))).sum()
    }

    /// Second derivative of the negative log-density (always ≥ 0).
    pub fn neg_log_density_curvature(&self, z: f64) -> f64 {
        self.terms()
            .map(|(b, g, m)| {
                let t = b * (z - g);
                m * b * b * sigmoid(t) * sigmoid(-t)
            })
            .sum()
    }

    /// Conjugate update with independent binary-logistic observations:
    /// appends `−y_n·slope_n` to the slopes, `knot_n` to the knots and a unit
    /// multiplicity for each observation.
    pub fn posterior_update(&self, obs: &[BLogObservation]) -> VLogParams {
        let mut out = self.clone();
        out.slopes.extend(obs.iter().map(|o| -f64::from(o.y) * o.slope));
        out.knots.extend(obs.iter().map(|o| o.knot));
        out.multiplicities.extend(std::iter::repeat_n(1.0, obs.len()));
        out
    }

    /// Bracket the mode by doubling `[−r, r]` until the slope of the
    /// negative log-density changes sign.
    fn mode_bracket(&self) -> Result<Bracket> {
        let mut r = 1.0;
        while self.neg_log_density_slope(-r) >= 0.0 || self.neg_log_density_slope(r) <= 0.0 {
            r *= 2.0;
            if r > 1e15 {
                return Err(Error::Bracket { lo: -r, hi: r });
            }
        }
        Bracket::new(-r, r)
    }

    /// The unique mode, found by golden-section search on the negative log-density.
    pub fn mode_exact(&self, tol: f64) -> Result<f64> {
        self.require_valid()?;
        if self.neg_log_density_slope(0.0) == 0.0 {
            return Ok(0.0);
        }
        let bracket = self.mode_bracket()?;
        golden_section_min(|z| -self.unnorm_log_density(z), bracket, tol)
    }

    /// Closed-form modal estimate obtained by replacing each
    /// `log(1 + e^{β_k(z − γ_k)})` with the one-sided tail `e^{τβ_k(z − γ_k)}`.
    ///
    /// Requires all slopes carrying multiplicity to share one magnitude.
    pub fn mode_approx(&self, tau: f64) -> Result<f64> {
        if !(tau > 0.0) {
            return Err(Error::Precondition(format!("tau must be positive, got {tau}")));
        }
        let active: Vec<(f64, f64, f64)> = self.terms().filter(|&(_, _, m)| m > 0.0).collect();
        let beta = active.first().map(|t| t.0.abs()).unwrap_or(0.0);
        if !(beta > 0.0) || active.iter().any(|t| (t.0.abs() - beta).abs() > 1e-12) {
            return Err(Error::Precondition("mode_approx needs slopes of one common magnitude".into()));
        }
        let scale = tau * beta;
        let log_neg = log_sum_exp(active.iter().filter(|t| t.0 < 0.0).map(|&(_, g, m)| m.ln() + scale * g));
        let log_pos = log_sum_exp(active.iter().filter(|t| t.0 > 0.0).map(|&(_, g, m)| m.ln() - scale * g));
        if log_neg == f64::NEG_INFINITY || log_pos == f64::NEG_INFINITY {
            return Err(Error::Precondition("both slope signs need positive total multiplicity".into()));
        }
        Ok((log_neg - log_pos) / (2.0 * scale))
    }

    /// `log ∫ exp(unnorm_log_density(z)) dz`.
    ///
    /// The integrand is translated to the mode so it peaks at exactly 1,
    /// then integrated with the arctan substitution.
    pub fn log_normalizer(&self, cfg: &QuadratureConfig) -> Result<f64> {
        let mode = self.mode_exact(GOLDEN_TOL)?;
        let peak = self.unnorm_log_density(mode);
        let integral = integrate_real_line(|z| (self.unnorm_log_density(z + mode) - peak).exp(), cfg)?;
        Ok(peak + integral.ln())
    }

    /// `Some((slope, knot, mu_pos, mu_neg))` when this is a two-term v-Log with
    /// opposite slopes of equal magnitude and a shared knot.
    pub fn as_two_term(&self) -> Option<(f64, f64, f64, f64)> {
        if self.len() != 2 || self.knots[0] != self.knots[1] || self.slopes[0] != -self.slopes[1] {
            return None;
        }
        let (b, g) = (self.slopes[0], self.knots[0]);
        let (m0, m1) = (self.multiplicities[0], self.multiplicities[1]);
        if b > 0.0 {
            Some((b, g, m0, m1))
        } else if b < 0.0 {
            Some((-b, g, m1, m0))
        } else {
            None
        }
    }

    /// Draw one value.
    ///
    /// The two-term shared-knot case is sampled exactly through the Beta
    /// transform; everything else goes through a slice sampler started at the mode.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<f64> {
        self.require_valid()?;
        if let Some((slope, knot, mu_pos, mu_neg)) = self.as_two_term() {
            let beta = Beta::new(mu_pos, mu_neg).map_err(|e| Error::InvalidParams(e.to_string()))?;
            loop {
                let z = beta_transform(beta.sample(rng), slope, knot);
                if z.is_finite() {
                    return Ok(z);
                }
            }
        }
        let mut sampler = SliceSampler::at_mode(self.clone())?;
        for _ in 0..SLICE_WARMUP {
            sampler.step(rng);
        }
        Ok(sampler.step(rng))
    }
}

/// Map `v ∈ (0, 1)` to `knot + log(1/v − 1) / slope`, carrying a
/// `Beta(μ₁, μ₂)` variate to a `v-Log(slope·[+1,−1], knot, [μ₁, μ₂])` variate.
pub fn beta_transform(v: f64, slope: f64, knot: f64) -> f64 {
    knot + ((1.0 - v).ln() - v.ln()) / slope
}

/// `(E log(1 + e^Z), E log(1 + e^{−Z}))` for `Z ~ v-Log([+1,−1], [0,0], [ω₁, ω₂])`,
/// i.e. `(ψ(ω₀) − ψ(ω₁), ψ(ω₀) − ψ(ω₂))` with `ω₀ = ω₁ + ω₂`.
pub fn two_term_expectations(omega1: f64, omega2: f64) -> Result<(f64, f64)> {
    if !(omega1 > 0.0 && omega2 > 0.0) || !omega1.is_finite() || !omega2.is_finite() {
        return Err(Error::Domain(format!("expected positive multiplicities, got ({omega1}, {omega2})")));
    }
    let total = psi(omega1 + omega2);
    Ok((total - psi(omega1), total - psi(omega2)))
}

const SLICE_WARMUP: usize = 24;

/// Univariate slice sampler (stepping out + shrinkage) over a v-Log.
///
/// The target is log-concave, so every slice is a single interval and the
/// stepping-out procedure always terminates.
#[derive(Debug, Clone)]
pub struct SliceSampler {
    params: VLogParams,
    current: f64,
    width: f64,
}

impl SliceSampler {
    /// Start at `x` with a step width adapted to the local curvature.
    pub fn new(params: VLogParams, x: f64) -> Result<Self> {
        params.require_valid()?;
        let width = width_for(params.neg_log_density_curvature(x));
        Ok(Self {
            params,
            current: x,
            width,
        })
    }

    /// Start at the exact mode.
    pub fn at_mode(params: VLogParams) -> Result<Self> {
        let mode = params.mode_exact(GOLDEN_TOL)?;
        Self::new(params, mode)
    }

    pub fn current(&self) -> f64 {
        self.current
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        self.current = slice_step(&self.params, self.current, self.width, rng);
        self.current
    }
}

fn width_for(curvature: f64) -> f64 {
    (2.5 / curvature.sqrt()).clamp(1e-3, 1e3)
}

/// One slice-sampling transition from `x`; leaves the v-Log invariant.
pub fn slice_step<R: Rng + ?Sized>(params: &VLogParams, x: f64, width: f64, rng: &mut R) -> f64 {
    let log_f = |z: f64| params.unnorm_log_density(z);
    let e: f64 = Exp1.sample(rng);
    let level = log_f(x) - e;
    let mut left = x - width * rng.random::<f64>();
    let mut right = left + width;
    let mut step = width;
    while log_f(left) > level {
        left -= step;
        step *= 2.0;
    }
    step = width;
    while log_f(right) > level {
        right += step;
        step *= 2.0;
    }
    loop {
        let candidate = left + (right - left) * rng.random::<f64>();
        if log_f(candidate) > level {
            return candidate;
        }
        if candidate < x {
            left = candidate;
        } else {
            right = candidate;
        }
        if right - left < 1e-14 * (1.0 + x.abs()) {
            return x;
        }
    }
}

/// Slice-sampling transition with the step width adapted to the curvature at `x`.
pub fn slice_step_auto<R: Rng + ?Sized>(params: &VLogParams, x: f64, rng: &mut R) -> f64 {
    slice_step(params, x, width_for(params.neg_log_density_curvature(x)), rng)
}
