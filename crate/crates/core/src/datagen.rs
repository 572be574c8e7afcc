//! Synthetic data: the two-type label process, the step dataset, the
//! Long-Servedio construction, a sparse-text stand-in, and the mixture to
//! binary-asymmetric-channel mapping.

use std::fmt;
use std::sync::Arc;

use rand::seq::index::sample;
use rand::Rng;

use crate::error::{Error, Result};
use crate::hypotheses::Dataset;
use crate::numerics::sigmoid;

/// Label corruption as a three-way mixture: keep (ρ₁), invert (ρ₂), or
/// replace with a Bernoulli(r) draw (ρ₃).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseMixture {
    rho: [f64; 3],
    r: f64,
}

impl NoiseMixture {
    pub fn new(rho: [f64; 3], r: f64) -> Result<Self> {
        if rho.iter().any(|&p| !(p >= 0.0)) || (rho.iter().sum::<f64>() - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("ρ must be a probability vector, got {rho:?}")));
        }
        if !(0.0..=1.0).contains(&r) {
            return Err(Error::Domain(format!("r must lie in [0, 1], got {r}")));
        }
        Ok(Self { rho, r })
    }

    pub fn rho(&self) -> [f64; 3] {
        self.rho
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// `P(Y = y | V = v)` straight from the mixture description.
    pub fn conditional(&self, y: i8, v: i8) -> f64 {
        let [keep, invert, bern] = self.rho;
        let p_plus = bern * self.r;
        let p_minus = bern * (1.0 - self.r);
        match (y == v, y > 0) {
            (true, true) => keep + p_plus,
            (true, false) => keep + p_minus,
            (false, true) => invert + p_plus,
            (false, false) => invert + p_minus,
        }
    }
}

/// The same corruption written as "keep with probability θ, otherwise draw
/// +1 with probability s", together with its crossover probabilities
/// `a = P(Y=−1 | V=+1)` and `b = P(Y=+1 | V=−1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquivalentChannel {
    pub theta: f64,
    pub s: f64,
    pub a: f64,
    pub b: f64,
}

impl EquivalentChannel {
    /// `P(Y = y | V = v)` under the type-prior form.
    pub fn conditional(&self, y: i8, v: i8) -> f64 {
        let noisy = if y > 0 { self.s } else { 1.0 - self.s };
        let keep = if y == v { self.theta } else { 0.0 };
        keep + (1.0 - self.theta) * noisy
    }
}

/// Map a mixture to its equivalent type-prior channel.
///
/// Inversion-dominant mixtures (ρ₁ < ρ₂) would need θ < 0 and are rejected.
/// When θ = 1 the noisy branch never fires and `s` is reported as 1/2.
pub fn mixture_to_channel(m: &NoiseMixture) -> Result<EquivalentChannel> {
    let [keep, invert, bern] = m.rho;
    if keep < invert {
        return Err(Error::Domain(format!(
            "ρ₁ = {keep} < ρ₂ = {invert}: inversion-dominant noise has no type-prior form"
        )));
    }
    let theta = 2.0 * keep + bern - 1.0;
    let denom = 2.0 - 2.0 * keep - bern;
    let s = if denom > 0.0 {
        (1.0 - keep - bern * (1.0 - m.r)) / denom
    } else {
        0.5
    };
    Ok(EquivalentChannel {
        theta,
        s,
        a: invert + bern * (1.0 - m.r),
        b: invert + bern * m.r,
    })
}

/// `(1 + θ) / (1 − θ)`; infinite at θ = 1.
pub fn expected_snr(theta: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Domain(format!("θ must lie in [0, 1], got {theta}")));
    }
    if theta == 1.0 {
        return Ok(f64::INFINITY);
    }
    Ok((1.0 + theta) / (1.0 - theta))
}

/// Log-odds `F(x)` of a true label. Values may be ±∞ for deterministic labels.
#[derive(Clone)]
pub enum LogOdds {
    /// `+∞` when `x[0] > at`, `−∞` when `x[0] < at`, 0 at the boundary.
    Step { at: f64 },
    /// `slope·x[0] + intercept`.
    Linear { slope: f64, intercept: f64 },
    Constant(f64),
    Custom(Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>),
}

impl fmt::Debug for LogOdds {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Step { at } => write!(f, "Step {{ at: {at} }}"),
            Self::Linear { slope, intercept } => write!(f, "Linear {{ slope: {slope}, intercept: {intercept} }}"),
            Self::Constant(v) => write!(f, "Constant({v})"),
            Self::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl LogOdds {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Self::Step { at } => {
                if x[0] > *at {
                    f64::INFINITY
                } else if x[0] < *at {
                    f64::NEG_INFINITY
                } else {
                    0.0
                }
            }
            Self::Linear { slope, intercept } => slope * x[0] + intercept,
            Self::Constant(v) => *v,
            Self::Custom(f) => f(x),
        }
    }
}

/// Inputs of the label generator: instances, true-label log-odds `F`,
/// noise grade `ξ` and type prior `θ`.
#[derive(Debug, Clone)]
pub struct GenSpec {
    pub domain: Vec<Vec<f64>>,
    pub log_odds: LogOdds,
    pub noise_grade: f64,
    pub type_prior: f64,
}

impl GenSpec {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.type_prior) {
            return Err(Error::Domain(format!("type prior must lie in [0, 1], got {}", self.type_prior)));
        }
        if self.noise_grade.is_nan() {
            return Err(Error::Domain("noise grade is NaN".into()));
        }
        if self.domain.is_empty() {
            return Err(Error::Domain("domain is empty".into()));
        }
        Ok(())
    }
}

/// Draw `+1` with log-odds `f`; infinite log-odds give deterministic labels.
fn draw_label<R: Rng + ?Sized>(f: f64, rng: &mut R) -> i8 {
    let positive = if f == f64::INFINITY {
        true
    } else if f == f64::NEG_INFINITY {
        false
    } else {
        rng.random::<f64>() < sigmoid(f)
    };
    if positive {
        1
    } else {
        -1
    }
}

/// For each instance draw `w ~ Bernoulli(θ)`, then a label with log-odds
/// `F(x)` when `w = 1` or `ξ` when `w = 0`. The draws of `w` are recorded.
pub fn generate_labels<R: Rng + ?Sized>(spec: &GenSpec, rng: &mut R) -> Result<Dataset> {
    spec.validate()?;
    let mut labels = Vec::with_capacity(spec.domain.len());
    let mut types = Vec::with_capacity(spec.domain.len());
    for x in &spec.domain {
        let w = rng.random::<f64>() < spec.type_prior;
        let f = if w { spec.log_odds.eval(x) } else { spec.noise_grade };
        if f.is_nan() {
            return Err(Error::Domain("log-odds evaluated to NaN".into()));
        }
        labels.push(draw_label(f, rng));
        types.push(u8::from(w));
    }
    Dataset::from_rows(&spec.domain, labels)?.with_true_types(types)
}

/// `{−99, −97, …, 99}`.
pub fn step_domain() -> Vec<Vec<f64>> {
    (0..100).map(|i| vec![-99.0 + 2.0 * f64::from(i)]).collect()
}

/// The step problem: deterministic sign labels for true types, `ξ = log 3` for noisy ones.
pub fn step_spec(theta: f64) -> GenSpec {
    GenSpec {
        domain: step_domain(),
        log_odds: LogOdds::Step { at: 0.0 },
        noise_grade: 3f64.ln(),
        type_prior: theta,
    }
}

pub fn make_step_dataset<R: Rng + ?Sized>(theta: f64, rng: &mut R) -> Result<Dataset> {
    generate_labels(&step_spec(theta), rng)
}

/// Number of "core" coordinates in the Long-Servedio instance.
pub const LS_CORE: usize = 11;
/// Core coordinates set to +1 in a penalizer.
pub const LS_PENALIZER_CORE: usize = 6;
/// Fraction of the wing block set to +1 in a penalizer.
pub const LS_PENALIZER_WING: f64 = 0.3;

/// Long-Servedio style instance over `{−1, +1}^{2n+11}`, clean label always +1.
///
/// Each example is one of three kinds:
/// * large-margin (probability 1/4): every coordinate +1;
/// * puller (1/4): the 11 core coordinates −1, the `2n` wing coordinates +1;
/// * penalizer (1/2): 6 random core coordinates and 30% of random wing
///   coordinates +1, the rest −1.
///
/// Every coordinate agrees with the label more than half of the time, so each
/// single-coordinate stump is a weak learner. Labels are then flipped
/// independently with probability `noise_level`; true types record which
/// labels survived.
pub fn make_long_servedio<R: Rng + ?Sized>(n: usize, noise_level: f64, count: usize, rng: &mut R) -> Result<Dataset> {
    if n < 1 {
        return Err(Error::Domain("n must be at least 1".into()));
    }
    if !(0.0..0.5).contains(&noise_level) {
        return Err(Error::Domain(format!("noise level must lie in [0, 0.5), got {noise_level}")));
    }
    if count < 1 {
        return Err(Error::Domain("count must be at least 1".into()));
    }
    let wing = 2 * n;
    let d = LS_CORE + wing;
    let wing_on = ((LS_PENALIZER_WING * wing as f64).round() as usize).clamp(1, wing);
    let mut features = Vec::with_capacity(count * d);
    let mut labels = Vec::with_capacity(count);
    let mut types = Vec::with_capacity(count);
    for _ in 0..count {
        let u: f64 = rng.random();
        let mut row = vec![-1.0; d];
        if u < 0.25 {
            row.iter_mut().for_each(|v| *v = 1.0);
        } else if u < 0.5 {
            row[LS_CORE..].iter_mut().for_each(|v| *v = 1.0);
        } else {
            for j in sample(rng, LS_CORE, LS_PENALIZER_CORE) {
                row[j] = 1.0;
            }
            for j in sample(rng, wing, wing_on) {
                row[LS_CORE + j] = 1.0;
            }
        }
        features.extend_from_slice(&row);
        let flipped = rng.random::<f64>() < noise_level;
        labels.push(if flipped { -1 } else { 1 });
        types.push(u8::from(!flipped));
    }
    Dataset::from_flat(d, features, labels)?.with_true_types(types)
}

/// Synthetic stand-in for a small document collection with present/absent
/// word features in `{−1, +1}`.
///
/// Each document picks a class ±1. A tenth of the vocabulary is indicative of
/// each class; indicative words of the document's class appear with
/// probability 0.3, every other word with probability 0.02. Labels are then
/// flipped with probability `flip`.
pub fn make_sparse_text<R: Rng + ?Sized>(docs: usize, vocab: usize, flip: f64, rng: &mut R) -> Result<Dataset> {
    if docs < 1 || vocab < 20 {
        return Err(Error::Domain("need at least one document and a vocabulary of 20 words".into()));
    }
    if !(0.0..=1.0).contains(&flip) {
        return Err(Error::Domain(format!("flip probability must lie in [0, 1], got {flip}")));
    }
    let block = vocab / 10;
    let mut features = Vec::with_capacity(docs * vocab);
    let mut labels = Vec::with_capacity(docs);
    let mut types = Vec::with_capacity(docs);
    for _ in 0..docs {
        let class: i8 = if rng.random::<bool>() { 1 } else { -1 };
        let own = if class > 0 { 0..block } else { block..2 * block };
        for j in 0..vocab {
            let p = if own.contains(&j) { 0.3 } else { 0.02 };
            features.push(if rng.random::<f64>() < p { 1.0 } else { -1.0 });
        }
        let flipped = rng.random::<f64>() < flip;
        labels.push(if flipped { -class } else { class });
        types.push(u8::from(!flipped));
    }
    Dataset::from_flat(vocab, features, labels)?.with_true_types(types)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn channel_examples() {
        let c = mixture_to_channel(&NoiseMixture::new([1.0, 0.0, 0.0], 0.3).unwrap()).unwrap();
        assert_eq!(c.theta, 1.0);
        let c = mixture_to_channel(&NoiseMixture::new([0.0, 0.0, 1.0], 0.3).unwrap()).unwrap();
        assert_eq!(c.theta, 0.0);
        assert!((c.s - 0.3).abs() < 1e-15);
        let c = mixture_to_channel(&NoiseMixture::new([0.5, 0.1, 0.4], 0.25).unwrap()).unwrap();
        assert!((c.theta - 0.4).abs() < 1e-15);
        assert!((c.s - 1.0 / 3.0).abs() < 1e-15);
        assert!((c.a - 0.4).abs() < 1e-15);
        assert!((c.b - 0.2).abs() < 1e-15);
    }

    #[test]
    fn inversion_dominant_rejected() {
        let m = NoiseMixture::new([0.1, 0.5, 0.4], 0.5).unwrap();
        assert!(mixture_to_channel(&m).is_err());
        assert!(NoiseMixture::new([0.5, 0.5, 0.5], 0.5).is_err());
        assert!(NoiseMixture::new([0.5, 0.5, 0.0], 1.5).is_err());
    }

    #[test]
    fn snr_examples() {
        assert_eq!(expected_snr(0.0).unwrap(), 1.0);
        assert!((expected_snr(0.5).unwrap() - 3.0).abs() < 1e-15);
        assert!((expected_snr(0.9).unwrap() - 19.0).abs() < 1e-12);
        assert_eq!(expected_snr(1.0).unwrap(), f64::INFINITY);
        assert!(expected_snr(-0.1).is_err());
    }

    #[test]
    fn pure_noise_with_infinite_grade() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let spec = GenSpec {
            noise_grade: f64::INFINITY,
            type_prior: 0.0,
            ..step_spec(0.0)
        };
        let d = generate_labels(&spec, &mut rng).unwrap();
        assert!(d.labels().iter().all(|&y| y == 1));
        assert!(d.true_types().unwrap().iter().all(|&w| w == 0));
    }

    #[test]
    fn noiseless_step_is_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let d = make_step_dataset(1.0, &mut rng).unwrap();
        assert_eq!(d.n(), 100);
        for i in 0..100 {
            let x = d.value(i, 0);
            assert_eq!(x, -99.0 + 2.0 * i as f64);
            assert_eq!(d.labels()[i], if x > 0.0 { 1 } else { -1 });
        }
        assert_eq!(d.labels().iter().filter(|&&y| y > 0).count(), 50);
    }

    #[test]
    fn noisy_grade_frequency() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let spec = GenSpec {
            domain: vec![vec![0.0]; 100_000],
            log_odds: LogOdds::Constant(0.0),
            noise_grade: 3f64.ln(),
            type_prior: 0.0,
        };
        let d = generate_labels(&spec, &mut rng).unwrap();
        let p = d.labels().iter().filter(|&&y| y > 0).count() as f64 / 1e5;
        let sd = (0.75f64 * 0.25 / 1e5).sqrt();
        assert!((p - 0.75).abs() < 3.0 * sd, "{p}");
    }

    #[test]
    fn pure_noise_step_count() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let total: usize = (0..200)
            .map(|_| make_step_dataset(0.0, &mut rng).unwrap().labels().iter().filter(|&&y| y > 0).count())
            .sum();
        let mean = total as f64 / 200.0;
        // binomial(100, 0.75): sd of the mean over 200 sets ≈ 0.31
        assert!((mean - 75.0).abs() < 1.0, "{mean}");
    }

    #[test]
    fn long_servedio_shape_and_weak_learnability() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let d = make_long_servedio(10, 0.0, 10_000, &mut rng).unwrap();
        assert_eq!(d.d(), 31);
        assert_eq!(d.n(), 10_000);
        for j in 0..d.d() {
            let wrong = (0..d.n()).filter(|&i| d.value(i, j) < 0.0).count();
            assert!((wrong as f64 / d.n() as f64) < 0.5, "coordinate {j}");
        }
        assert_eq!(make_long_servedio(10, 0.2, 1200, &mut rng).unwrap().n(), 1200);
        assert!(make_long_servedio(0, 0.2, 10, &mut rng).is_err());
        assert!(make_long_servedio(10, 0.5, 10, &mut rng).is_err());
        assert!(make_long_servedio(10, 0.2, 0, &mut rng).is_err());
    }

    #[test]
    fn long_servedio_flip_rate() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let d = make_long_servedio(10, 0.2, 20_000, &mut rng).unwrap();
        let flipped = d.labels().iter().filter(|&&y| y < 0).count() as f64 / 20_000.0;
        assert!((flipped - 0.2).abs() < 3.0 * (0.16f64 / 20_000.0).sqrt());
    }

    #[test]
    fn sparse_text_shape() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let d = make_sparse_text(145, 500, 0.1, &mut rng).unwrap();
        assert_eq!((d.n(), d.d()), (145, 500));
        assert!((0..d.n()).all(|i| d.row(i).iter().all(|&v| v == 1.0 || v == -1.0)));
    }
}
