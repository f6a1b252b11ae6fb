//! Payoffs for the continuous limit of the game.
//!
//! A player at deviation x clears bin i at time x_i/p_i + Z_i/sqrt(p_i) with
//! the Z_i standard normal and shared between players, so head-to-head
//! payoffs again reduce to the distribution of the bin cleared last under the
//! componentwise-max deviation.

use crate::error::{Error, Result};
use crate::game::{Deviation, DieSpec, MixedStrategy, PureStrategy, Scale};
use crate::numerics::{integrate, normal_cdf, normal_pdf, QuadratureSpec};
use dashmap::DashMap;
use once_cell::sync::Lazy;
use rayon::prelude::*;

/// A race between k bins with Gaussian clearance times centered at m_i/p_i.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianRace {
    die: DieSpec,
    m: Vec<f64>,
}

impl GaussianRace {
    pub fn new(die: DieSpec, m: Vec<f64>) -> Result<Self> {
        if m.len() != die.k() {
            return Err(Error::DimensionMismatch { expected: die.k(), got: m.len() });
        }
        if m.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("race coordinates must be finite".into()));
        }
        let m = m.into_iter().map(|v| v + 0.0).collect();
        Ok(Self { die, m })
    }

    /// The race induced by two deviations: componentwise max. The sum of the
    /// max may exceed zero; that is expected.
    pub fn from_deviations(x: &Deviation, y: &Deviation, d: &DieSpec) -> Result<Self> {
        check_pair(x, y, d)?;
        let m = x
            .coords()
            .iter()
            .zip(y.coords())
            .map(|(&a, &b)| a.max(b))
            .collect();
        Self::new(d.clone(), m)
    }

    pub fn die(&self) -> &DieSpec {
        &self.die
    }

    pub fn m(&self) -> &[f64] {
        &self.m
    }

    pub fn k(&self) -> usize {
        self.m.len()
    }
}

pub use crate::discrete::LastBinDistribution;

static CONTINUOUS_CACHE: Lazy<DashMap<Vec<u64>, (Vec<f64>, f64)>> = Lazy::new(DashMap::new);

fn continuous_cache_key(race: &GaussianRace, spec: &QuadratureSpec) -> Vec<u64> {
    let mut key = Vec::with_capacity(2 * race.k() + 2);
    key.push(spec.tolerance.to_bits());
    key.push(spec.truncation_sigmas.to_bits());
    for (&p, &m) in race.die().probs().iter().zip(race.m()) {
        key.push(p.to_bits());
        key.push(m.to_bits());
    }
    key
}

/// Pr[I = j] for the Gaussian race, with the summed quadrature error.
///
/// Coordinate j integrates sqrt(p_j) phi(sqrt(p_j)(t - c_j)) times the
/// product over other bins of Phi(sqrt(p_l)(t - c_l)), where c_i = m_i/p_i.
/// The line is truncated `truncation_sigmas` standard deviations beyond the
/// extreme centers.
pub fn last_bin_continuous_with_error(
    race: &GaussianRace,
    spec: &QuadratureSpec,
) -> Result<(LastBinDistribution, f64)> {
    let key = continuous_cache_key(race, spec);
    if let Some(hit) = CONTINUOUS_CACHE.get(&key) {
        let (probs, err) = hit.value().clone();
        return Ok((LastBinDistribution::new(probs)?, err));
    }
    let k = race.k();
    let p = race.die().probs();
    let centers: Vec<f64> = race.m().iter().zip(p).map(|(&m, &pi)| m / pi).collect();
    let sigmas: Vec<f64> = p.iter().map(|&pi| 1.0 / pi.sqrt()).collect();
    let sigma_max = sigmas.iter().copied().fold(0.0, f64::max);
    let c_min = centers.iter().copied().fold(f64::INFINITY, f64::min);
    let c_max = centers.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let global_lo = c_min - spec.truncation_sigmas * sigma_max;
    let global_hi = c_max + spec.truncation_sigmas * sigma_max;
    // the density factor for coordinate j is negligible past 12 sigma_j, so
    // each coordinate integrates over its own slice of the global window
    let local = spec.truncation_sigmas.max(12.0);
    let mut probs = vec![0.0; k];
    let mut total_err = 0.0;
    for j in 0..k {
        let lo = global_lo.max(centers[j] - local * sigmas[j]);
        let hi = global_hi.min(centers[j] + local * sigmas[j]);
        let root_pj = p[j].sqrt();
        let q = integrate(
            |t| {
                let mut v = root_pj * normal_pdf(root_pj * (t - centers[j]));
                for l in 0..k {
                    if l != j {
                        v *= normal_cdf((t - centers[l]) * p[l].sqrt());
                    }
                }
                v
            },
            lo,
            hi,
            spec,
        )?;
        probs[j] = q.value;
        total_err += q.error;
    }
    let dist = LastBinDistribution::new(probs)?;
    CONTINUOUS_CACHE.insert(key, (dist.probs().to_vec(), total_err));
    Ok((dist, total_err))
}

pub fn last_bin_continuous(race: &GaussianRace, spec: &QuadratureSpec) -> Result<LastBinDistribution> {
    last_bin_continuous_with_error(race, spec).map(|(d, _)| d)
}

fn check_pair(x: &Deviation, y: &Deviation, d: &DieSpec) -> Result<()> {
    if x.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: x.k() });
    }
    if y.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: y.k() });
    }
    Ok(())
}

fn lex_less(a: &[f64], b: &[f64]) -> bool {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            std::cmp::Ordering::Less => return true,
            std::cmp::Ordering::Greater => return false,
            std::cmp::Ordering::Equal => {}
        }
    }
    false
}

fn beats_canonical(
    lo: &Deviation,
    hi: &Deviation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let race = GaussianRace::from_deviations(lo, hi, d)?;
    let (dist, err) = last_bin_continuous_with_error(&race, spec)?;
    let mut s = 0.0;
    for j in 0..lo.k() {
        let (a, b) = (lo.coords()[j], hi.coords()[j]);
        // coordinate ties are exact equality of stored values by design:
        // grids produce identical floats and the half-weighting is part of
        // the payoff definition
        if a < b {
            s += dist.probs()[j];
        } else if a == b {
            s += 0.5 * dist.probs()[j];
        }
    }
    Ok((s, err))
}

/// K(x, y) on the half-difference scale [-1/2, 1/2], plus the quadrature
/// error estimate. Antisymmetric exactly: payoff(x,y) == -payoff(y,x).
pub fn payoff_continuous_with_error(
    x: &Deviation,
    y: &Deviation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_pair(x, y, d)?;
    if x == y {
        return Ok((0.0, 0.0));
    }
    if lex_less(x.coords(), y.coords()) {
        let (s, err) = beats_canonical(x, y, d, spec)?;
        Ok((s - 0.5, err))
    } else {
        let (s, err) = beats_canonical(y, x, d, spec)?;
        Ok((-(s - 0.5), err))
    }
}

pub fn payoff_continuous(x: &Deviation, y: &Deviation, d: &DieSpec, spec: &QuadratureSpec) -> Result<f64> {
    payoff_continuous_with_error(x, y, d, spec).map(|(v, _)| v)
}

/// K(alpha, y): the weight-averaged payoff of a continuous mixed strategy
/// against a pure deviation. Support points are evaluated in parallel but
/// summed in support order, so results do not depend on the thread count.
pub fn payoff_mixed_with_error(
    alpha: &MixedStrategy,
    y: &Deviation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    if alpha.scale() != Scale::Continuous {
        return Err(Error::InvalidStrategy("payoff_mixed needs a continuous-scale strategy".into()));
    }
    let terms: Result<Vec<(f64, f64)>> = alpha
        .entries()
        .par_iter()
        .map(|(s, w)| {
            let PureStrategy::Deviation(x) = s else {
                return Err(Error::InvalidStrategy("continuous strategy holds a token entry".into()));
            };
            let (v, e) = payoff_continuous_with_error(x, y, d, spec)?;
            Ok((w * v, w * e))
        })
        .collect();
    let mut value = 0.0;
    let mut error = 0.0;
    for (v, e) in terms? {
        value += v;
        error += e;
    }
    Ok((value, error))
}

pub fn payoff_mixed(alpha: &MixedStrategy, y: &Deviation, d: &DieSpec, spec: &QuadratureSpec) -> Result<f64> {
    payoff_mixed_with_error(alpha, y, d, spec).map(|(v, _)| v)
}
