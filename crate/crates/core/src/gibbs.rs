//! Gibbs sampler for the full noise model on very small problems.
//!
//! Every weight `c_m` is updated by one slice-sampling step on its v-Log
//! full conditional, the noise grade `ξ` is drawn exactly through the Beta
//! transform, and the type selectors and type prior are conjugate draws.

use std::io::Write;

use rand::Rng;
use rand_distr::{Beta, Distribution};

use crate::error::{Error, Result};
use crate::hypotheses::{Dataset, StumpSpace};
use crate::numerics::sigmoid;
use crate::vlog::{slice_step_auto, VLogParams};

/// Largest problem the sampler accepts through [`GibbsProblem::from_space`].
pub const MAX_EXAMPLES: usize = 20;
pub const MAX_CLASSIFIERS: usize = 10;

/// Labels plus the prediction rows `f_m(x_n)` of every base classifier.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsProblem {
    labels: Vec<i8>,
    rows: Vec<Vec<i8>>,
}

impl GibbsProblem {
    pub fn new(labels: Vec<i8>, rows: Vec<Vec<i8>>) -> Result<Self> {
        if labels.iter().any(|&y| y != 1 && y != -1) {
            return Err(Error::Dataset("labels must be ±1".into()));
        }
        for r in &rows {
            if r.len() != labels.len() || r.iter().any(|&v| v != 1 && v != -1) {
                return Err(Error::Dataset("prediction rows must be ±1 and match the labels".into()));
            }
        }
        Ok(Self { labels, rows })
    }

    /// Problem over a full stump space, refused beyond 20 examples or 10 stumps.
    pub fn from_space(data: &Dataset, space: &StumpSpace) -> Result<Self> {
        if data.n() > MAX_EXAMPLES || space.len() > MAX_CLASSIFIERS {
            return Err(Error::Precondition(format!(
                "Gibbs sampling is limited to N ≤ {MAX_EXAMPLES} and M ≤ {MAX_CLASSIFIERS}, got N = {}, M = {}",
                data.n(),
                space.len()
            )));
        }
        if space.n() != data.n() {
            return Err(Error::Precondition("stump space was built on a different dataset".into()));
        }
        Self::new(data.labels().to_vec(), (0..space.len()).map(|m| space.row(m).to_vec()).collect())
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn labels(&self) -> &[i8] {
        &self.labels
    }

    pub fn row(&self, m: usize) -> &[i8] {
        &self.rows[m]
    }

    /// `Σ_m c_m f_m(x_n)`.
    pub fn score(&self, c: &[f64], n: usize) -> f64 {
        self.rows.iter().zip(c).map(|(r, &cm)| cm * f64::from(r[n])).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GibbsHyper {
    pub mu0: f64,
    pub mu0_prime: f64,
    pub zeta: [f64; 2],
}

impl Default for GibbsHyper {
    fn default() -> Self {
        Self {
            mu0: 1.0,
            mu0_prime: 1.0,
            zeta: [1.0, 1.0],
        }
    }
}

impl GibbsHyper {
    pub fn validate(&self) -> Result<()> {
        for v in [self.mu0, self.mu0_prime, self.zeta[0], self.zeta[1]] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Domain(format!("hyperparameters must be positive, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState {
    pub c: Vec<f64>,
    pub xi: f64,
    pub w: Vec<u8>,
    pub theta: f64,
}

impl GibbsState {
    /// `c = 0`, `ξ = 0`, every label true, `θ = 1/2`.
    pub fn initial(problem: &GibbsProblem) -> Self {
        Self {
            c: vec![0.0; problem.m()],
            xi: 0.0,
            w: vec![1; problem.n()],
            theta: 0.5,
        }
    }

    fn check(&self, problem: &GibbsProblem) -> Result<()> {
        if self.c.len() != problem.m() || self.w.len() != problem.n() {
            return Err(Error::Precondition("state does not match the problem size".into()));
        }
        if !(0.0..=1.0).contains(&self.theta) || self.w.iter().any(|&w| w > 1) {
            return Err(Error::Precondition("θ must lie in [0, 1] and w must be binary".into()));
        }
        Ok(())
    }
}

/// Full conditional of `c_i`: slopes `[+1, −1, −y_n f_i(x_n)]`, knots
/// `[0, 0, −f̃_i(x_n) f_i(x_n)]`, multiplicities `[μ₀, μ₀, w_n]`, where
/// `f̃_i = Σ_{m≠i} c_m f_m`.
pub fn conditional_c(i: usize, state: &GibbsState, problem: &GibbsProblem, mu0: f64) -> Result<VLogParams> {
    if i >= problem.m() {
        return Err(Error::Index { index: i, len: problem.m() });
    }
    let n = problem.n();
    let row = problem.row(i);
    let mut slopes = vec![1.0, -1.0];
    let mut knots = vec![0.0, 0.0];
    let mut mus = vec![mu0, mu0];
    for k in 0..n {
        let f = f64::from(row[k]);
        let rest = problem.score(&state.c, k) - state.c[i] * f;
        slopes.push(-f64::from(problem.labels()[k]) * f);
        knots.push(if rest == 0.0 { 0.0 } else { -rest * f });
        mus.push(f64::from(state.w[k]));
    }
    VLogParams::new(slopes, knots, mus)
}

/// `(ω₁, ω₂)` of the noise-grade conditional `v-Log(ū, 0, [ω₁, ω₂])`.
pub fn conditional_xi(state: &GibbsState, problem: &GibbsProblem, mu0_prime: f64) -> (f64, f64) {
    let (mut neg, mut pos) = (mu0_prime, mu0_prime);
    for (&y, &w) in problem.labels().iter().zip(&state.w) {
        let noisy = f64::from(1 - w);
        if y > 0 {
            pos += noisy;
        } else {
            neg += noisy;
        }
    }
    (neg, pos)
}

/// `P(w = 1 | rest)` for a label `y` with ensemble score `score`.
pub fn conditional_w(y: i8, score: f64, xi: f64, theta: f64) -> f64 {
    let y = f64::from(y);
    let t = theta * sigmoid(y * score);
    let f = (1.0 - theta) * sigmoid(y * xi);
    if t + f == 0.0 {
        0.5
    } else {
        t / (t + f)
    }
}

/// Beta parameters of the type-prior conditional.
pub fn conditional_theta(w: &[u8], zeta: [f64; 2]) -> (f64, f64) {
    let ones = w.iter().filter(|&&v| v == 1).count() as f64;
    (zeta[0] + ones, zeta[1] + (w.len() as f64 - ones))
}

/// One systematic scan: every `c_i`, then `ξ`, every `w_n`, then `θ`.
pub fn gibbs_sweep<R: Rng + ?Sized>(
    state: &GibbsState,
    problem: &GibbsProblem,
    hyper: &GibbsHyper,
    rng: &mut R,
) -> Result<GibbsState> {
    state.check(problem)?;
    let mut next = state.clone();
    for i in 0..problem.m() {
        let cond = conditional_c(i, &next, problem, hyper.mu0)?;
        next.c[i] = slice_step_auto(&cond, next.c[i], rng);
    }
    let (w1, w2) = conditional_xi(&next, problem, hyper.mu0_prime);
    next.xi = VLogParams::two_term(1.0, 0.0, w1, w2)?.sample(rng)?;
    for k in 0..problem.n() {
        let p = conditional_w(problem.labels()[k], problem.score(&next.c, k), next.xi, next.theta);
        next.w[k] = u8::from(rng.random::<f64>() < p);
    }
    let (a, b) = conditional_theta(&next.w, hyper.zeta);
    next.theta = Beta::new(a, b)
        .map_err(|e| Error::InvalidParams(e.to_string()))?
        .sample(rng);
    Ok(next)
}

/// Retained states of a chain.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsTrace {
    pub samples: Vec<GibbsState>,
    pub burnin: usize,
    pub thin: usize,
}

impl GibbsTrace {
    fn mean_of(&self, f: impl Fn(&GibbsState) -> f64) -> f64 {
        self.samples.iter().map(f).sum::<f64>() / self.samples.len() as f64
    }

    pub fn mean_theta(&self) -> f64 {
        self.mean_of(|s| s.theta)
    }

    pub fn mean_xi(&self) -> f64 {
        self.mean_of(|s| s.xi)
    }

    /// Posterior probability that each label is true.
    pub fn mean_w(&self) -> Vec<f64> {
        let n = self.samples.first().map_or(0, |s| s.w.len());
        (0..n).map(|k| self.mean_of(|s| f64::from(s.w[k]))).collect()
    }

    pub fn mean_c(&self) -> Vec<f64> {
        let m = self.samples.first().map_or(0, |s| s.c.len());
        (0..m).map(|i| self.mean_of(|s| s.c[i])).collect()
    }

    /// One CSV row per retained sweep: `sweep,theta,xi,c_0..,w_0..`.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        let m = self.samples.first().map_or(0, |s| s.c.len());
        let n = self.samples.first().map_or(0, |s| s.w.len());
        let mut header = vec!["sweep".to_string(), "theta".into(), "xi".into()];
        header.extend((0..m).map(|i| format!("c_{i}")));
        header.extend((0..n).map(|k| format!("w_{k}")));
        writeln!(out, "{}", header.join(","))?;
        for (j, s) in self.samples.iter().enumerate() {
            let sweep = self.burnin + (j + 1) * self.thin;
            let mut cells = vec![sweep.to_string(), s.theta.to_string(), s.xi.to_string()];
            cells.extend(s.c.iter().map(|v| v.to_string()));
            cells.extend(s.w.iter().map(|v| v.to_string()));
            writeln!(out, "{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Run `iters` sweeps from [`GibbsState::initial`], keeping every `thin`-th
/// state after the first `burnin`.
pub fn run_gibbs<R: Rng + ?Sized>(
    problem: &GibbsProblem,
    hyper: &GibbsHyper,
    iters: usize,
    burnin: usize,
    thin: usize,
    rng: &mut R,
) -> Result<GibbsTrace> {
    run_gibbs_from(GibbsState::initial(problem), problem, hyper, iters, burnin, thin, rng)
}

pub fn run_gibbs_from<R: Rng + ?Sized>(
    start: GibbsState,
    problem: &GibbsProblem,
    hyper: &GibbsHyper,
    iters: usize,
    burnin: usize,
    thin: usize,
    rng: &mut R,
) -> Result<GibbsTrace> {
    hyper.validate()?;
    if iters <= burnin {
        return Err(Error::Precondition(format!("iters ({iters}) must exceed burnin ({burnin})")));
    }
    if thin < 1 {
        return Err(Error::Precondition("thin must be at least 1".into()));
    }
    start.check(problem)?;
    let mut state = start;
    let mut samples = Vec::with_capacity((iters - burnin) / thin);
    for it in 1..=iters {
        state = gibbs_sweep(&state, problem, hyper, rng)?;
        if it > burnin && (it - burnin) % thin == 0 {
            samples.push(state.clone());
        }
    }
    Ok(GibbsTrace { samples, burnin, thin })
}
