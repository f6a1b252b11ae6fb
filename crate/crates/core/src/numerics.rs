//! Special functions and adaptive quadrature shared by both payoff engines.
//!
//! Everything here is pure and reentrant. Poisson tails/pmfs are computed via
//! the regularized incomplete gamma function (series for small arguments,
//! Lentz continued fraction otherwise); the normal CDF goes through a rational
//! erfc approximation. `integrate` is an adaptive Gauss-Kronrod (G7, K15)
//! scheme with a worst-interval-first refinement queue.

use crate::error::{Error, Result};
use std::collections::BinaryHeap;

/// Controls for the adaptive quadrature used by the payoff engines.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureSpec {
    /// Target absolute error for each integral.
    pub tolerance: f64,
    /// Budget of interval bisections before giving up.
    pub max_subdivisions: u32,
    /// Integrands are truncated this many standard deviations out.
    pub truncation_sigmas: f64,
}

impl QuadratureSpec {
    pub fn new(tolerance: f64, max_subdivisions: u32, truncation_sigmas: f64) -> Result<Self> {
        if !(tolerance > 0.0) {
            return Err(Error::Domain("quadrature tolerance must be positive".into()));
        }
        if max_subdivisions < 1 {
            return Err(Error::Domain("need at least one subdivision".into()));
        }
        if !(truncation_sigmas >= 6.0) {
            return Err(Error::Domain("truncation must be at least 6 sigma".into()));
        }
        Ok(Self { tolerance, max_subdivisions, truncation_sigmas })
    }
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        Self { tolerance: 1e-10, max_subdivisions: 2000, truncation_sigmas: 10.0 }
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(z: f64) -> f64 {
    if z < 0.5 {
        // reflection; only reached for arguments below 1/2
        let pi = std::f64::consts::PI;
        return (pi / (pi * z).sin()).ln() - ln_gamma(1.0 - z);
    }
    let z = z - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

// ln(1 + d) - d without cancellation for small d.
fn ln1pmx(d: f64) -> f64 {
    if d.abs() > 0.5 {
        return d.ln_1p() - d;
    }
    let mut sum = 0.0;
    let mut power = d * d;
    let mut j = 2.0;
    let mut sign = -1.0;
    loop {
        let term = sign * power / j;
        sum += term;
        if term.abs() < 1e-18 * sum.abs().max(1e-300) || j > 200.0 {
            return sum;
        }
        power *= d;
        j += 1.0;
        sign = -sign;
    }
}

// lnGamma(a) - (a - 1/2) ln a + a - ln(2 pi)/2, the Stirling series tail.
fn stirling_remainder(a: f64) -> f64 {
    let i = 1.0 / a;
    let i2 = i * i;
    i * (1.0 / 12.0 - i2 * (1.0 / 360.0 - i2 * (1.0 / 1260.0 - i2 / 1680.0)))
}

// a ln x - x - lnGamma(a), regrouped through Stirling for large a: the
// direct form cancels catastrophically when x is near a and both are large.
fn ln_poisson_core(a: f64, x: f64) -> f64 {
    if a < 30.0 {
        return a * x.ln() - x - ln_gamma(a);
    }
    let d = x / a - 1.0;
    a * ln1pmx(d) + 0.5 * (a / (2.0 * std::f64::consts::PI)).ln() - stirling_remainder(a)
}

/// Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0.
fn reg_lower_gamma(a: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let log_prefix = ln_poisson_core(a, x);
    if x < a + 1.0 {
        // series expansion around x = 0
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut k = 1.0;
        while term.abs() > sum.abs() * 1e-17 {
            term *= x / (a + k);
            sum += term;
            k += 1.0;
            if k > 1e7 {
                break;
            }
        }
        (sum.ln() + log_prefix).exp()
    } else {
        // Lentz continued fraction for the upper function Q(a, x)
        let tiny = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / tiny;
        let mut d = 1.0 / b;
        let mut h = d;
        let mut i = 1.0;
        loop {
            let an = -i * (i - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < tiny {
                d = tiny;
            }
            c = b + an / c;
            if c.abs() < tiny {
                c = tiny;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-16 || i > 1e7 {
                break;
            }
            i += 1.0;
        }
        1.0 - (log_prefix.exp() * h).min(1.0)
    }
}

/// Pr[Poisson(lambda) >= m]. Equals the regularized lower incomplete gamma
/// P(m, lambda) for m >= 1 and is 1 for m = 0.
pub fn poisson_tail(lambda: f64, m: u64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("poisson_tail: lambda {lambda} must be nonneg")));
    }
    if m == 0 {
        return Ok(1.0);
    }
    Ok(reg_lower_gamma(m as f64, lambda).clamp(0.0, 1.0))
}

/// Pr[Poisson(lambda) = m], computed in log space.
pub fn poisson_pmf(lambda: f64, m: u64) -> Result<f64> {
    if !(lambda >= 0.0) {
        return Err(Error::Domain(format!("poisson_pmf: lambda {lambda} must be nonneg")));
    }
    if lambda == 0.0 {
        return Ok(if m == 0 { 1.0 } else { 0.0 });
    }
    if m == 0 {
        return Ok((-lambda).exp());
    }
    let m_f = m as f64;
    Ok(ln_poisson_core(m_f, lambda).exp() / m_f)
}

// Rational erfc approximation (Cody), three regions, |error| well under 1e-14.
const ERF_A: [f64; 4] = [
    3.161_123_743_870_565_6e0,
    1.138_641_541_510_501_56e2,
    3.774_852_376_853_020_2e2,
    3.209_377_589_138_469_47e3,
];
const ERF_A4: f64 = 1.857_777_061_846_031_53e-1;
const ERF_B: [f64; 4] = [
    2.360_129_095_234_412_09e1,
    2.440_246_379_344_441_73e2,
    1.282_616_526_077_372_28e3,
    2.844_236_833_439_170_62e3,
];
const ERFC_C: [f64; 8] = [
    5.641_884_969_886_700_89e-1,
    8.883_149_794_388_375_94e0,
    6.611_919_063_714_162_95e1,
    2.986_351_381_974_001_31e2,
    8.819_522_212_417_690_9e2,
    1.712_047_612_634_070_58e3,
    2.051_078_377_826_071_47e3,
    1.230_339_354_797_997_25e3,
];
const ERFC_C8: f64 = 2.153_115_354_744_038_46e-8;
const ERFC_D: [f64; 8] = [
    1.574_492_611_070_983_47e1,
    1.176_939_508_913_124_99e2,
    5.371_811_018_620_098_58e2,
    1.621_389_574_566_690_19e3,
    3.290_799_235_733_459_63e3,
    4.362_619_090_143_247_16e3,
    3.439_367_674_143_721_64e3,
    1.230_339_354_803_749_42e3,
];
const ERFC_P: [f64; 5] = [
    3.053_266_349_612_323_44e-1,
    3.603_448_999_498_044_39e-1,
    1.257_817_261_112_292_46e-1,
    1.608_378_514_874_227_66e-2,
    6.587_491_615_298_378_03e-4,
];
const ERFC_P5: f64 = 1.631_538_713_730_209_78e-2;
const ERFC_Q: [f64; 5] = [
    2.568_520_192_289_822_42e0,
    1.872_952_849_923_460_47e0,
    5.279_051_029_514_284_12e-1,
    6.051_834_131_244_131_91e-2,
    2.335_204_976_268_691_85e-3,
];
const INV_SQRT_PI: f64 = 5.641_895_835_477_562_9e-1;

fn erfc(x: f64) -> f64 {
    let y = x.abs();
    let result = if y <= 0.46875 {
        let ysq = if y > 1e-300 { y * y } else { 0.0 };
        let mut num = ERF_A4 * ysq;
        let mut den = ysq;
        for i in 0..3 {
            num = (num + ERF_A[i]) * ysq;
            den = (den + ERF_B[i]) * ysq;
        }
        // this region computes erf directly
        return 1.0 - x * (num + ERF_A[3]) / (den + ERF_B[3]);
    } else if y <= 4.0 {
        let mut num = ERFC_C8 * y;
        let mut den = y;
        for i in 0..7 {
            num = (num + ERFC_C[i]) * y;
            den = (den + ERFC_D[i]) * y;
        }
        let r = (num + ERFC_C[7]) / (den + ERFC_D[7]);
        let ysq = (y * 16.0).trunc() / 16.0;
        let del = (y - ysq) * (y + ysq);
        (-ysq * ysq).exp() * (-del).exp() * r
    } else if y < 26.6 {
        let ysq = 1.0 / (y * y);
        let mut num = ERFC_P5 * ysq;
        let mut den = ysq;
        for i in 0..4 {
            num = (num + ERFC_P[i]) * ysq;
            den = (den + ERFC_Q[i]) * ysq;
        }
        let mut r = ysq * (num + ERFC_P[4]) / (den + ERFC_Q[4]);
        r = (INV_SQRT_PI - r) / y;
        let yt = (y * 16.0).trunc() / 16.0;
        let del = (y - yt) * (y + yt);
        (-yt * yt).exp() * (-del).exp() * r
    } else {
        0.0
    };
    if x < 0.0 {
        2.0 - result
    } else {
        result
    }
}

/// Standard normal CDF with absolute error below 1e-14.
pub fn normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * std::f64::consts::FRAC_1_SQRT_2)
}

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Standard normal density.
pub fn normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() * INV_SQRT_2PI
}

/// Result of an adaptive integration: the value and an error estimate.
#[derive(Debug, Clone, Copy)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
}

// Kronrod 15-point abscissae (positive half) and weights, with the embedded
// 7-point Gauss weights on the odd-index nodes plus the center.
const XGK: [f64; 8] = [
    0.991455371120813,
    0.949107912342759,
    0.864864423359769,
    0.741531185599394,
    0.586087235467691,
    0.405845151377397,
    0.207784955007898,
    0.0,
];
const WGK: [f64; 8] = [
    0.022935322010529,
    0.063092092629979,
    0.104790010322250,
    0.140653259715525,
    0.169004726639267,
    0.190350578064785,
    0.204432940075298,
    0.209482141084728,
];
const WG: [f64; 4] = [
    0.129484966168870,
    0.279705391489277,
    0.381830050505119,
    0.417959183673469,
];

fn gk15<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> (f64, f64) {
    let half = 0.5 * (hi - lo);
    let center = 0.5 * (lo + hi);
    let fc = f(center);
    let mut resk = WGK[7] * fc;
    let mut resg = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        resk += WGK[j] * (f1 + f2);
        if j % 2 == 1 {
            resg += WG[j / 2] * (f1 + f2);
        }
    }
    let value = resk * half;
    let err = ((resk - resg) * half).abs().max(value.abs() * 1e-15);
    (value, err)
}

struct Segment {
    err: f64,
    lo: f64,
    hi: f64,
    val: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err && self.lo == other.lo
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // worst error first; ties broken by position for determinism
        self.err
            .total_cmp(&other.err)
            .then_with(|| other.lo.total_cmp(&self.lo))
    }
}

/// Adaptive panel quadrature of `f` over [lo, hi].
///
/// The interval starts as eight equal panels (so narrow spikes inside wide
/// truncated domains are not stepped over) and the panel with the largest
/// error estimate is bisected until the total estimated absolute error is at
/// or below `spec.tolerance`. Exhausting the subdivision budget is an error
/// carrying the best estimate.
pub fn integrate<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Quadrature> {
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::Domain(format!("bad integration interval [{lo}, {hi}]")));
    }
    let mut heap = BinaryHeap::new();
    let mut total_err = 0.0;
    let init = 8usize;
    for i in 0..init {
        let a = lo + (hi - lo) * i as f64 / init as f64;
        let b = lo + (hi - lo) * (i + 1) as f64 / init as f64;
        let (val, err) = gk15(&f, a, b);
        if !val.is_finite() {
            return Err(Error::Domain("integrand is not finite".into()));
        }
        total_err += err;
        heap.push(Segment { err, lo: a, hi: b, val });
    }
    let mut splits = 0u32;
    while total_err > spec.tolerance {
        if splits >= spec.max_subdivisions {
            let estimate = drain_sum(heap).0;
            return Err(Error::Quadrature { estimate, error: total_err });
        }
        let worst = heap.pop().expect("queue cannot be empty");
        total_err -= worst.err;
        let mid = 0.5 * (worst.lo + worst.hi);
        for (a, b) in [(worst.lo, mid), (mid, worst.hi)] {
            let (val, err) = gk15(&f, a, b);
            if !val.is_finite() {
                return Err(Error::Domain("integrand is not finite".into()));
            }
            total_err += err;
            heap.push(Segment { err, lo: a, hi: b, val });
        }
        splits += 1;
    }
    let (value, error) = drain_sum(heap);
    Ok(Quadrature { value, error })
}

fn drain_sum(heap: BinaryHeap<Segment>) -> (f64, f64) {
    // summing left to right keeps the result independent of refinement order
    let mut segs: Vec<Segment> = heap.into_vec();
    segs.sort_by(|a, b| a.lo.total_cmp(&b.lo));
    let mut value = 0.0;
    let mut error = 0.0;
    for s in &segs {
        value += s.val;
        error += s.err;
    }
    (value, error)
}
