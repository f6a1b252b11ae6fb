//! Exact probabilities for the n-token game.
//!
//! Under Poissonization each bin's clearance time is an independent
//! Gamma(M_i) variable scaled by 1/p_i, so the distribution of the last bin
//! cleared reduces to one-dimensional integrals of Poisson densities against
//! Poisson tails. Payoffs follow from the ownership rule: the player who
//! allocated more to the last-cleared bin loses, ties split evenly.

use crate::error::{Error, Result};
use crate::game::{DieSpec, TokenAllocation};
use crate::numerics::{integrate, poisson_pmf, poisson_tail, QuadratureSpec};
use dashmap::DashMap;
use once_cell::sync::Lazy;

/// A race between k bins: bin i holds M_i tokens and is hit at rate p_i.
///
/// The all-zero race is not representable: with no tokens anywhere the game
/// is over at time zero and no bin is cleared last.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonRace {
    die: DieSpec,
    counts: Vec<u64>,
}

impl PoissonRace {
    pub fn new(die: DieSpec, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != die.k() {
            return Err(Error::DimensionMismatch { expected: die.k(), got: counts.len() });
        }
        if counts.iter().all(|&m| m == 0) {
            return Err(Error::Domain("race needs at least one token".into()));
        }
        Ok(Self { die, counts })
    }

    /// The race induced by two same-scale allocations: componentwise max.
    pub fn from_allocations(a: &TokenAllocation, b: &TokenAllocation, d: &DieSpec) -> Result<Self> {
        check_pair(a, b, d)?;
        let m = a
            .counts()
            .iter()
            .zip(b.counts())
            .map(|(&x, &y)| x.max(y))
            .collect();
        Self::new(d.clone(), m)
    }

    pub fn die(&self) -> &DieSpec {
        &self.die
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn k(&self) -> usize {
        self.counts.len()
    }
}

/// Distribution of the index of the bin cleared last.
#[derive(Debug, Clone, PartialEq)]
pub struct LastBinDistribution {
    probs: Vec<f64>,
}

impl LastBinDistribution {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        let mut probs = probs;
        for p in &mut probs {
            if *p < 0.0 {
                if *p < -1e-12 {
                    return Err(Error::Domain(format!("negative last-bin probability {p}")));
                }
                *p = 0.0;
            }
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Domain(format!("last-bin probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }
}

// Races recur constantly during matrix builds and best-response scans, and
// distinct races are far rarer than payoff pairs; memoize on the race.
static DISCRETE_CACHE: Lazy<DashMap<Vec<u64>, (Vec<f64>, f64)>> = Lazy::new(DashMap::new);

fn discrete_cache_key(race: &PoissonRace, spec: &QuadratureSpec) -> Vec<u64> {
    let mut key = Vec::with_capacity(2 * race.k() + 2);
    key.push(spec.tolerance.to_bits());
    key.push(spec.truncation_sigmas.to_bits());
    for (&p, &m) in race.die().probs().iter().zip(race.counts()) {
        key.push(p.to_bits());
        key.push(m);
    }
    key
}

/// Pr[I = j] for each bin j, with the summed quadrature error estimate.
///
/// Coordinate j is p_j * integral of pmf(p_j t, M_j - 1) times the product
/// over other bins of Pr[Poisson(p_l t) >= M_l]. Bins with M_j = 0 clear at
/// time zero and get probability 0.
pub fn last_bin_discrete_with_error(
    race: &PoissonRace,
    spec: &QuadratureSpec,
) -> Result<(LastBinDistribution, f64)> {
    let key = discrete_cache_key(race, spec);
    if let Some(hit) = DISCRETE_CACHE.get(&key) {
        let (probs, err) = hit.value().clone();
        return Ok((LastBinDistribution { probs }, err));
    }
    let k = race.k();
    let p = race.die().probs();
    let m = race.counts();
    let mut probs = vec![0.0; k];
    let mut total_err = 0.0;
    for j in 0..k {
        if m[j] == 0 {
            continue;
        }
        let pj = p[j];
        let mj = m[j];
        // the pmf factor is the Gamma(M_j)/p_j clearance density in t; all
        // its mass sits within 12 sigma (plus an absolute margin) of the mode
        let mode = (mj as f64 - 1.0).max(0.0);
        let spread = 12.0 * (mj as f64).sqrt() + 30.0;
        let lo = ((mode - spread) / pj).max(0.0);
        let hi = (mode + spread) / pj;
        let q = integrate(
            |t| {
                let mut v = pj * poisson_pmf(pj * t, mj - 1).expect("rate is nonnegative");
                for l in 0..k {
                    if l != j {
                        v *= poisson_tail(p[l] * t, m[l]).expect("rate is nonnegative");
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
    DISCRETE_CACHE.insert(key, (dist.probs.clone(), total_err));
    Ok((dist, total_err))
}

pub fn last_bin_discrete(race: &PoissonRace, spec: &QuadratureSpec) -> Result<LastBinDistribution> {
    last_bin_discrete_with_error(race, spec).map(|(d, _)| d)
}

fn check_pair(a: &TokenAllocation, b: &TokenAllocation, d: &DieSpec) -> Result<()> {
    if a.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: a.k() });
    }
    if b.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: b.k() });
    }
    if a.n() != b.n() {
        return Err(Error::InvalidAllocation(format!(
            "players must place the same token total; got {} and {}",
            a.n(),
            b.n()
        )));
    }
    Ok(())
}

// Win probability of the lexicographically smaller allocation. Evaluating
// every pair in one fixed orientation makes the complement and the negation
// in beats/payoff exact rather than within quadrature error.
fn beats_canonical(
    lo: &TokenAllocation,
    hi: &TokenAllocation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    let race = PoissonRace::from_allocations(lo, hi, d)?;
    let (dist, err) = last_bin_discrete_with_error(&race, spec)?;
    let mut s = 0.0;
    for j in 0..lo.k() {
        if lo.counts()[j] < hi.counts()[j] {
            s += dist.probs()[j];
        } else if lo.counts()[j] == hi.counts()[j] {
            s += 0.5 * dist.probs()[j];
        }
    }
    Ok((s, err))
}

/// Pr[a wins against b], ties half-weighted: the owner of the last-cleared
/// bin (whoever allocated more there) loses. Satisfies
/// beats(a,b) + beats(b,a) == 1 exactly.
pub fn beats_discrete(
    a: &TokenAllocation,
    b: &TokenAllocation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<f64> {
    check_pair(a, b, d)?;
    if a == b {
        return Ok(0.5);
    }
    if a.counts() < b.counts() {
        Ok(beats_canonical(a, b, d, spec)?.0)
    } else {
        Ok(1.0 - beats_canonical(b, a, d, spec)?.0)
    }
}

/// K_n(a, b) = beats(a, b) - 1/2, in [-1/2, 1/2], with the quadrature error
/// estimate. Antisymmetric exactly: payoff(a,b) == -payoff(b,a) bitwise.
pub fn payoff_discrete_with_error(
    a: &TokenAllocation,
    b: &TokenAllocation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(f64, f64)> {
    check_pair(a, b, d)?;
    if a == b {
        return Ok((0.0, 0.0));
    }
    if a.counts() < b.counts() {
        let (s, err) = beats_canonical(a, b, d, spec)?;
        Ok((s - 0.5, err))
    } else {
        let (s, err) = beats_canonical(b, a, d, spec)?;
        Ok((-(s - 0.5), err))
    }
}

pub fn payoff_discrete(
    a: &TokenAllocation,
    b: &TokenAllocation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<f64> {
    payoff_discrete_with_error(a, b, d, spec).map(|(v, _)| v)
}

/// K_n(alpha, b): the weight-averaged payoff of a discrete mixed strategy
/// against a pure allocation. Support points are evaluated in parallel but
/// summed in support order, so results do not depend on the thread count.
pub fn payoff_mixed_discrete(
    alpha: &crate::game::MixedStrategy,
    b: &TokenAllocation,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<f64> {
    use rayon::prelude::*;
    if !matches!(alpha.scale(), crate::game::Scale::Discrete { .. }) {
        return Err(Error::InvalidStrategy("payoff_mixed_discrete needs a discrete-scale strategy".into()));
    }
    let terms: Result<Vec<f64>> = alpha
        .entries()
        .par_iter()
        .map(|(s, w)| {
            let crate::game::PureStrategy::Tokens(a) = s else {
                return Err(Error::InvalidStrategy("discrete strategy holds a deviation entry".into()));
            };
            Ok(w * payoff_discrete(a, b, d, spec)?)
        })
        .collect();
    Ok(terms?.into_iter().sum())
}

/// Analytic bound 1/sqrt(2 pi M_i) on the probability that the last bin
/// changes when bin i gains one token.
pub fn change_probability_bound(race: &PoissonRace, i: usize) -> Result<f64> {
    if i >= race.k() {
        return Err(Error::DimensionMismatch { expected: race.k(), got: i });
    }
    if race.counts()[i] == 0 {
        return Err(Error::Domain("change bound needs M_i >= 1".into()));
    }
    Ok(1.0 / (2.0 * std::f64::consts::PI * race.counts()[i] as f64).sqrt())
}

/// Second difference of Pr[I = j] in the token counts:
/// Pr[M] - Pr[M + e_h] - Pr[M + e_i] + Pr[M + e_h + e_i], the local-flatness
/// quantity. Four last-bin evaluations.
pub fn second_difference(
    race: &PoissonRace,
    h: usize,
    i: usize,
    j: usize,
    spec: &QuadratureSpec,
) -> Result<f64> {
    let k = race.k();
    if h >= k || i >= k || j >= k {
        return Err(Error::DimensionMismatch { expected: k, got: h.max(i).max(j) });
    }
    let bump = |up: &[usize]| -> Result<f64> {
        let mut counts = race.counts().to_vec();
        for &b in up {
            counts[b] += 1;
        }
        let shifted = PoissonRace::new(race.die().clone(), counts)?;
        Ok(last_bin_discrete(&shifted, spec)?.probs()[j])
    };
    Ok(bump(&[])? - bump(&[h])? - bump(&[i])? + bump(&[h, i])?)
}
