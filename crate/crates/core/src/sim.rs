//! Monte Carlo oracle for both engines: simulates actual die sequences on
//! the token scale and shared standard-normal races on the continuous scale.
//!
//! Trials are split into fixed-size chunks, each driven by its own ChaCha
//! stream derived from (seed, chunk index), and the integer counts merge by
//! summation, so results are identical across runs and thread counts.

use crate::continuous::GaussianRace;
use crate::discrete::{LastBinDistribution, PoissonRace};
use crate::error::{Error, Result};
use crate::game::{DieSpec, PureStrategy, Scale};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

const CHUNK: u64 = 8192;

/// Trial count, master seed, and the scale being simulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub trials: u64,
    pub seed: u64,
    pub scale: Scale,
}

impl SimConfig {
    pub fn new(trials: u64, seed: u64, scale: Scale) -> Result<Self> {
        if trials < 1 {
            return Err(Error::Domain("need at least one trial".into()));
        }
        Ok(Self { trials, seed, scale })
    }
}

/// Outcome counts of a head-to-head simulation. Wins and ties sum to the
/// trial count; ties are raw (no coin flip applied). `overflows` counts
/// trials that hit the roll cap and were recorded as ties; it stays zero in
/// practice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct MatchCounts {
    pub wins_a: u64,
    pub wins_b: u64,
    pub ties: u64,
    pub overflows: u64,
}

impl MatchCounts {
    fn merge(self, other: Self) -> Self {
        Self {
            wins_a: self.wins_a + other.wins_a,
            wins_b: self.wins_b + other.wins_b,
            ties: self.ties + other.ties,
            overflows: self.overflows + other.overflows,
        }
    }
}

fn chunk_rng(seed: u64, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk);
    rng
}

fn chunk_bounds(trials: u64) -> Vec<(u64, u64)> {
    let chunks = trials.div_ceil(CHUNK);
    (0..chunks)
        .map(|c| (c, (trials - c * CHUNK).min(CHUNK)))
        .collect()
}

fn sample_bin(cumulative: &[f64], rng: &mut ChaCha8Rng) -> usize {
    let r: f64 = rng.random();
    for (j, &c) in cumulative.iter().enumerate() {
        if r < c {
            return j;
        }
    }
    cumulative.len() - 1
}

fn cumulative_probs(d: &DieSpec) -> Vec<f64> {
    let mut acc = 0.0;
    d.probs()
        .iter()
        .map(|&p| {
            acc += p;
            acc
        })
        .collect()
}

/// Plays `trials` games between two pure strategies under a shared die.
///
/// Discrete scale: each roll knocks one token from both players' copies of
/// the rolled bin; whoever clears first wins, simultaneous clears tie.
/// Continuous scale: one shared normal vector per trial decides both
/// clearance times; the smaller time wins, exact equality ties.
pub fn simulate_match(
    a: &PureStrategy,
    b: &PureStrategy,
    d: &DieSpec,
    config: &SimConfig,
) -> Result<MatchCounts> {
    if a.scale() != b.scale() {
        return Err(Error::InvalidStrategy("players must share a scale".into()));
    }
    if a.scale() != config.scale {
        return Err(Error::InvalidStrategy("config scale does not match the strategies".into()));
    }
    if a.k() != d.k() || b.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: a.k().max(b.k()) });
    }
    match (a, b) {
        (PureStrategy::Tokens(a), PureStrategy::Tokens(b)) => simulate_match_discrete(a.counts(), b.counts(), d, config),
        (PureStrategy::Deviation(x), PureStrategy::Deviation(y)) => simulate_match_continuous(x.coords(), y.coords(), d, config),
        _ => unreachable!("scales already checked"),
    }
}

fn simulate_match_discrete(a: &[u64], b: &[u64], d: &DieSpec, config: &SimConfig) -> Result<MatchCounts> {
    let n: u64 = a.iter().sum();
    let cap = (100.0 * n as f64 / d.min_p()).ceil() as u64;
    let cumulative = cumulative_probs(d);
    let counts = chunk_bounds(config.trials)
        .par_iter()
        .map(|&(chunk, len)| {
            let mut rng = chunk_rng(config.seed, chunk);
            let mut out = MatchCounts::default();
            let mut rem_a = a.to_vec();
            let mut rem_b = b.to_vec();
            for _ in 0..len {
                rem_a.copy_from_slice(a);
                rem_b.copy_from_slice(b);
                let mut left_a: u64 = n;
                let mut left_b: u64 = n;
                let mut rolls: u64 = 0;
                loop {
                    if rolls >= cap {
                        out.ties += 1;
                        out.overflows += 1;
                        break;
                    }
                    let j = sample_bin(&cumulative, &mut rng);
                    rolls += 1;
                    if rem_a[j] > 0 {
                        rem_a[j] -= 1;
                        left_a -= 1;
                    }
                    if rem_b[j] > 0 {
                        rem_b[j] -= 1;
                        left_b -= 1;
                    }
                    match (left_a == 0, left_b == 0) {
                        (true, true) => {
                            out.ties += 1;
                            break;
                        }
                        (true, false) => {
                            out.wins_a += 1;
                            break;
                        }
                        (false, true) => {
                            out.wins_b += 1;
                            break;
                        }
                        (false, false) => {}
                    }
                }
            }
            out
        })
        .reduce(MatchCounts::default, MatchCounts::merge);
    Ok(counts)
}

fn simulate_match_continuous(x: &[f64], y: &[f64], d: &DieSpec, config: &SimConfig) -> Result<MatchCounts> {
    let k = d.k();
    let centers_x: Vec<f64> = x.iter().zip(d.probs()).map(|(&v, &p)| v / p).collect();
    let centers_y: Vec<f64> = y.iter().zip(d.probs()).map(|(&v, &p)| v / p).collect();
    let sigmas: Vec<f64> = d.probs().iter().map(|&p| 1.0 / p.sqrt()).collect();
    let counts = chunk_bounds(config.trials)
        .par_iter()
        .map(|&(chunk, len)| {
            let mut rng = chunk_rng(config.seed, chunk);
            let mut out = MatchCounts::default();
            for _ in 0..len {
                let mut t_x = f64::NEG_INFINITY;
                let mut t_y = f64::NEG_INFINITY;
                for i in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    t_x = t_x.max(centers_x[i] + sigmas[i] * z);
                    t_y = t_y.max(centers_y[i] + sigmas[i] * z);
                }
                if t_x < t_y {
                    out.wins_a += 1;
                } else if t_y < t_x {
                    out.wins_b += 1;
                } else {
                    out.ties += 1;
                }
            }
            out
        })
        .reduce(MatchCounts::default, MatchCounts::merge);
    Ok(counts)
}

/// Empirical last-bin frequencies for the token-scale race.
pub fn simulate_last_bin_discrete(race: &PoissonRace, config: &SimConfig) -> Result<LastBinDistribution> {
    let d = race.die();
    let n: u64 = race.counts().iter().sum();
    let cap = (100.0 * n as f64 / d.min_p()).ceil() as u64;
    let cumulative = cumulative_probs(d);
    let k = race.k();
    let hits = chunk_bounds(config.trials)
        .par_iter()
        .map(|&(chunk, len)| {
            let mut rng = chunk_rng(config.seed, chunk);
            let mut hits = vec![0u64; k];
            let mut rem = race.counts().to_vec();
            for _ in 0..len {
                rem.copy_from_slice(race.counts());
                let mut bins_left = rem.iter().filter(|&&m| m > 0).count();
                let mut rolls: u64 = 0;
                loop {
                    if rolls >= cap {
                        // unreachable in practice; charge the first loaded bin
                        let j = rem.iter().position(|&m| m > 0).unwrap_or(0);
                        hits[j] += 1;
                        break;
                    }
                    let j = sample_bin(&cumulative, &mut rng);
                    rolls += 1;
                    if rem[j] > 0 {
                        rem[j] -= 1;
                        if rem[j] == 0 {
                            bins_left -= 1;
                            if bins_left == 0 {
                                hits[j] += 1;
                                break;
                            }
                        }
                    }
                }
            }
            hits
        })
        .reduce(
            || vec![0u64; k],
            |mut acc, h| {
                for (a, b) in acc.iter_mut().zip(h) {
                    *a += b;
                }
                acc
            },
        );
    let total: u64 = hits.iter().sum();
    LastBinDistribution::new(hits.iter().map(|&h| h as f64 / total as f64).collect())
}

/// Empirical last-bin frequencies for the Gaussian race; argmax ties go to
/// the lowest index.
pub fn simulate_last_bin_continuous(race: &GaussianRace, config: &SimConfig) -> Result<LastBinDistribution> {
    let d = race.die();
    let k = race.k();
    let centers: Vec<f64> = race.m().iter().zip(d.probs()).map(|(&m, &p)| m / p).collect();
    let sigmas: Vec<f64> = d.probs().iter().map(|&p| 1.0 / p.sqrt()).collect();
    let hits = chunk_bounds(config.trials)
        .par_iter()
        .map(|&(chunk, len)| {
            let mut rng = chunk_rng(config.seed, chunk);
            let mut hits = vec![0u64; k];
            for _ in 0..len {
                let mut best = f64::NEG_INFINITY;
                let mut arg = 0usize;
                for i in 0..k {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let t = centers[i] + sigmas[i] * z;
                    if t > best {
                        best = t;
                        arg = i;
                    }
                }
                hits[arg] += 1;
            }
            hits
        })
        .reduce(
            || vec![0u64; k],
            |mut acc, h| {
                for (a, b) in acc.iter_mut().zip(h) {
                    *a += b;
                }
                acc
            },
        );
    let total: u64 = hits.iter().sum();
    LastBinDistribution::new(hits.iter().map(|&h| h as f64 / total as f64).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{Deviation, TokenAllocation};

    fn tokens(xi: &[u64]) -> PureStrategy {
        PureStrategy::Tokens(TokenAllocation::new(xi.to_vec()).unwrap())
    }

    fn devs(x: &[f64]) -> PureStrategy {
        PureStrategy::Deviation(Deviation::new(x.to_vec()).unwrap())
    }

    #[test]
    fn config_validation() {
        assert!(SimConfig::new(0, 1, Scale::Continuous).is_err());
        assert!(SimConfig::new(1, 1, Scale::Continuous).is_ok());
    }

    #[test]
    fn identical_strategies_always_tie() {
        let d = DieSpec::uniform(2);
        let c = SimConfig::new(5000, 7, Scale::Discrete { n: 4 }).unwrap();
        let out = simulate_match(&tokens(&[2, 2]), &tokens(&[2, 2]), &d, &c).unwrap();
        assert_eq!(out.ties, 5000);
        assert_eq!(out.wins_a + out.wins_b, 0);

        let c = SimConfig::new(5000, 7, Scale::Continuous).unwrap();
        let x = devs(&[0.2, -0.2]);
        let out = simulate_match(&x, &x, &d, &c).unwrap();
        assert_eq!(out.ties, 5000);
    }

    #[test]
    fn deterministic_across_runs_and_thread_counts() {
        let d = DieSpec::uniform(2);
        let c = SimConfig::new(30_000, 42, Scale::Discrete { n: 2 }).unwrap();
        let a = tokens(&[2, 0]);
        let b = tokens(&[1, 1]);
        let r1 = simulate_match(&a, &b, &d, &c).unwrap();
        let r2 = simulate_match(&a, &b, &d, &c).unwrap();
        assert_eq!(r1, r2);
        for threads in [1usize, 3] {
            let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
            let r = pool.install(|| simulate_match(&a, &b, &d, &c).unwrap());
            assert_eq!(r, r1);
        }
    }

    #[test]
    fn swapped_arguments_swap_counts() {
        let d = DieSpec::uniform(2);
        let c = SimConfig::new(20_000, 99, Scale::Discrete { n: 2 }).unwrap();
        let a = tokens(&[2, 0]);
        let b = tokens(&[1, 1]);
        let fwd = simulate_match(&a, &b, &d, &c).unwrap();
        let rev = simulate_match(&b, &a, &d, &c).unwrap();
        assert_eq!(fwd.wins_a, rev.wins_b);
        assert_eq!(fwd.wins_b, rev.wins_a);
        assert_eq!(fwd.ties, rev.ties);
    }

    #[test]
    fn match_frequency_agrees_with_exact_value() {
        let d = DieSpec::uniform(2);
        let trials = 200_000u64;
        let c = SimConfig::new(trials, 5, Scale::Discrete { n: 2 }).unwrap();
        let out = simulate_match(&tokens(&[2, 0]), &tokens(&[1, 1]), &d, &c).unwrap();
        let freq = out.wins_a as f64 / trials as f64;
        let sigma = (0.25 * 0.75 / trials as f64).sqrt();
        assert!((freq - 0.25).abs() < 4.0 * sigma, "freq {freq}");
        assert_eq!(out.overflows, 0);
    }

    #[test]
    fn last_bin_discrete_frequencies() {
        let d = DieSpec::uniform(2);
        let race = PoissonRace::new(d, vec![2, 1]).unwrap();
        let trials = 200_000u64;
        let c = SimConfig::new(trials, 11, Scale::Discrete { n: 3 }).unwrap();
        let l = simulate_last_bin_discrete(&race, &c).unwrap();
        let sigma = (0.75 * 0.25 / trials as f64).sqrt();
        assert!((l.probs()[0] - 0.75).abs() < 4.0 * sigma);
    }

    #[test]
    fn last_bin_continuous_frequencies() {
        let d = DieSpec::uniform(3);
        let race = GaussianRace::new(d, vec![0.0, 0.0, 0.0]).unwrap();
        let trials = 200_000u64;
        let c = SimConfig::new(trials, 13, Scale::Continuous).unwrap();
        let l = simulate_last_bin_continuous(&race, &c).unwrap();
        let third = 1.0 / 3.0;
        let sigma = (third * (1.0 - third) / trials as f64).sqrt();
        for &p in l.probs() {
            assert!((p - third).abs() < 4.0 * sigma);
        }
    }

    #[test]
    fn mismatched_scales_rejected() {
        let d = DieSpec::uniform(2);
        let c = SimConfig::new(10, 1, Scale::Discrete { n: 2 }).unwrap();
        assert!(simulate_match(&tokens(&[2, 0]), &devs(&[0.1, -0.1]), &d, &c).is_err());
        let c2 = SimConfig::new(10, 1, Scale::Continuous).unwrap();
        assert!(simulate_match(&tokens(&[2, 0]), &tokens(&[1, 1]), &d, &c2).is_err());
    }
}
