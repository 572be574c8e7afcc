//! Scalar special functions, 1-D minimization and real-line quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// Tolerances for [`integrate_real_line`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 1e-8,
            max_subdivisions: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain("quadrature tolerances must be positive".into()));
        }
        if self.max_subdivisions < 1 {
            return Err(Error::Domain("max_subdivisions must be at least 1".into()));
        }
        Ok(())
    }
}

/// Closed search interval with `lo < hi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bracket {
    lo: f64,
    hi: f64,
}

impl Bracket {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
            return Err(Error::Domain(format!("bracket requires lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Self { lo, hi })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }
}

/// Default absolute tolerance for golden-section searches.
pub const GOLDEN_TOL: f64 = 1e-8;

/// `log(1 + e^z)` without overflow: `log(1 + e^{-|z|}) + max(z, 0)`.
#[inline]
pub fn log1pexp(z: f64) -> f64 {
    (-z.abs()).exp().ln_1p() + z.max(0.0)
}

/// Logistic function `1 / (1 + e^{-z})`.
#[inline]
pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `log(sum_i e^{x_i})`; returns `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let values: Vec<f64> = values.into_iter().collect();
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + values.iter().map(|v| (v - max).exp()).sum::<f64>().ln()
}

/// Natural log of the gamma function for `x > 0`.
#[inline]
pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

/// `log B(a, b) = log Γ(a) + log Γ(b) − log Γ(a + b)`.
#[inline]
pub fn ln_beta(a: f64, b: f64) -> f64 {
    ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b)
}

/// Digamma function ψ(x) for `x > 0`.
///
/// Shifts the argument up to `x >= 6` with ψ(x) = ψ(x+1) − 1/x and then
/// evaluates the asymptotic Bernoulli series through the x^-14 term.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    Ok(psi(x))
}

pub(crate) fn psi(mut x: f64) -> f64 {
    debug_assert!(x > 0.0);
    let mut shift = 0.0;
    while x < 6.0 {
        shift += 1.0 / x;
        x += 1.0;
    }
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    // Bernoulli coefficients B_2k / 2k for k = 1..7
    let series = inv2
        * (1.0 / 12.0
            - inv2
                * (1.0 / 120.0
                    - inv2
                        * (1.0 / 252.0
                            - inv2
                                * (1.0 / 240.0
                                    - inv2 * (1.0 / 132.0 - inv2 * (691.0 / 32760.0 - inv2 / 12.0))))));
    x.ln() - 0.5 * inv - series - shift
}

const INV_PHI: f64 = 0.618_033_988_749_894_9;

/// Golden-section search for the minimizer of a unimodal `f` on `bracket`.
///
/// The returned point is within `tol` of the minimizer. An interior probe
/// that exceeds both current endpoint values means `f` is not unimodal on
/// the bracket and is reported as [`Error::Bracket`].
pub fn golden_section_min<F: FnMut(f64) -> f64>(mut f: F, bracket: Bracket, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain(format!("tolerance must be positive, got {tol}")));
    }
    let (mut a, mut b) = (bracket.lo, bracket.hi);
    let (mut fa, mut fb) = (f(a), f(b));
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    // Slack absorbs rounding once the bracket sits on the flat bottom.
    let bad = |fa: f64, fb: f64, probe: f64| {
        let cap = fa.max(fb);
        probe > cap + 1e-12 * (1.0 + cap.abs())
    };
    if bad(fa, fb, fc) || bad(fa, fb, fd) {
        return Err(Error::Bracket { lo: a, hi: b });
    }
    while (b - a) > 2.0 * tol {
        if fc <= fd {
            b = d;
            fb = fd;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
            if bad(fa, fb, fc) {
                return Err(Error::Bracket { lo: a, hi: b });
            }
        } else {
            a = c;
            fa = fc;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
            if bad(fa, fb, fd) {
                return Err(Error::Bracket { lo: a, hi: b });
            }
        }
        // Interval has shrunk below representable spacing.
        if c <= a || d >= b || c >= d {
            break;
        }
    }
    Ok(0.5 * (a + b))
}

#[derive(Debug, Clone, Copy)]
struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    flm: f64,
    fm: f64,
    frm: f64,
    fb: f64,
    estimate: f64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Panel {}

impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn panel<F: FnMut(f64) -> f64>(h: &mut F, a: f64, b: f64, fa: f64, fm: f64, fb: f64) -> Panel {
    let m = 0.5 * (a + b);
    let flm = h(0.5 * (a + m));
    let frm = h(0.5 * (m + b));
    let coarse = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    let fine = (b - a) / 12.0 * (fa + 4.0 * flm + 2.0 * fm + 4.0 * frm + fb);
    Panel {
        a,
        b,
        fa,
        flm,
        fm,
        frm,
        fb,
        estimate: fine + (fine - coarse) / 15.0,
        error: (fine - coarse).abs() / 15.0,
    }
}

/// Globally adaptive Simpson quadrature of `h` over the finite interval `[lo, hi]`.
pub fn integrate_interval<F: FnMut(f64) -> f64>(mut h: F, lo: f64, hi: f64, cfg: &QuadratureConfig) -> Result<f64> {
    cfg.validate()?;
    const INITIAL_PANELS: usize = 16;
    let mut heap = BinaryHeap::with_capacity(4 * INITIAL_PANELS);
    let width = (hi - lo) / INITIAL_PANELS as f64;
    let mut left_val = h(lo);
    for i in 0..INITIAL_PANELS {
        let a = lo + width * i as f64;
        let b = if i + 1 == INITIAL_PANELS { hi } else { a + width };
        let fm = h(0.5 * (a + b));
        let fb = h(b);
        heap.push(panel(&mut h, a, b, left_val, fm, fb));
        left_val = fb;
    }
    let sums = |heap: &BinaryHeap<Panel>| heap.iter().fold((0.0, 0.0), |(t, e), p| (t + p.estimate, e + p.error));
    let (mut total, mut err) = sums(&heap);
    let mut subdivisions = 0usize;
    loop {
        if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
            // running sums drift; confirm with an exact pass
            (total, err) = sums(&heap);
            if err <= cfg.abs_tol.max(cfg.rel_tol * total.abs()) {
                return Ok(total);
            }
        }
        if subdivisions >= cfg.max_subdivisions {
            return Err(Error::Quadrature { subdivisions });
        }
        let worst = heap.pop().expect("panels are never exhausted");
        let m = 0.5 * (worst.a + worst.b);
        let left = panel(&mut h, worst.a, m, worst.fa, worst.flm, worst.fm);
        let right = panel(&mut h, m, worst.b, worst.fm, worst.frm, worst.fb);
        total += left.estimate + right.estimate - worst.estimate;
        err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        subdivisions += 1;
    }
}

/// Integral of `g` over the whole real line.
///
/// Uses the substitution z = tan u, integrating `g(tan u) sec²u` over
/// (−π/2, π/2); the transformed integrand is taken as 0 at the endpoints.
pub fn integrate_real_line<G: FnMut(f64) -> f64>(mut g: G, cfg: &QuadratureConfig) -> Result<f64> {
    let transformed = |u: f64| {
        if u.abs() >= FRAC_PI_2 {
            return 0.0;
        }
        let (s, c) = u.sin_cos();
        let sec2 = 1.0 / (c * c);
        if !sec2.is_finite() {
            return 0.0;
        }
        let value = g(s / c) * sec2;
        if value.is_finite() {
            value
        } else {
            0.0
        }
    };
    integrate_interval(transformed, -FRAC_PI_2, FRAC_PI_2, cfg)
}
