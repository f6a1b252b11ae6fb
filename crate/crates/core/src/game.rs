//! Domain types for the game: dice, allocations, deviations, mixed strategies,
//! and the pure-strategy transforms (overplay, undercut, rounding, the uniform
//! simplex strategy).
//!
//! The two scales:
//! * discrete: `n` tokens placed into `k` bins (`TokenAllocation`);
//! * continuous: a zero-sum real vector measuring the sqrt(n)-scaled
//!   deviation from the proportional allocation (`Deviation`).

use crate::error::{Error, Result};
use std::collections::HashSet;
use std::fmt::Write as _;

/// A `k`-sided die with positive face probabilities summing to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DieSpec {
    probs: Vec<f64>,
}

impl DieSpec {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if probs.len() < 2 {
            return Err(Error::InvalidDie(format!("need k >= 2 bins, got {}", probs.len())));
        }
        if probs.iter().any(|&p| !(p > 0.0) || !p.is_finite()) {
            return Err(Error::InvalidDie("every probability must be positive and finite".into()));
        }
        let sum = kahan_sum(&probs);
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidDie(format!("probabilities sum to {sum}, not 1")));
        }
        Ok(Self { probs })
    }

    /// Fair die with `k` faces.
    pub fn uniform(k: usize) -> Self {
        Self::new(vec![1.0 / k as f64; k]).expect("uniform die is always valid")
    }

    pub fn k(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn min_p(&self) -> f64 {
        self.probs.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// A placement of `n` tokens into `k` bins.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TokenAllocation {
    xi: Vec<u64>,
}

impl TokenAllocation {
    pub fn new(xi: Vec<u64>) -> Result<Self> {
        if xi.len() < 2 {
            return Err(Error::InvalidAllocation(format!("need k >= 2 bins, got {}", xi.len())));
        }
        if xi.iter().sum::<u64>() == 0 {
            return Err(Error::InvalidAllocation("token count n must be positive".into()));
        }
        Ok(Self { xi })
    }

    pub fn counts(&self) -> &[u64] {
        &self.xi
    }

    pub fn n(&self) -> u64 {
        self.xi.iter().sum()
    }

    pub fn k(&self) -> usize {
        self.xi.len()
    }
}

/// A zero-sum real vector on the continuous (deviation) scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Deviation {
    x: Vec<f64>,
}

impl Deviation {
    pub fn new(x: Vec<f64>) -> Result<Self> {
        if x.len() < 2 {
            return Err(Error::InvalidDeviation(format!("need k >= 2 coordinates, got {}", x.len())));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDeviation("coordinates must be finite".into()));
        }
        let sum = kahan_sum(&x);
        if sum.abs() > 1e-9 {
            return Err(Error::InvalidDeviation(format!("coordinates sum to {sum}, not 0")));
        }
        // adding 0.0 maps -0.0 to +0.0 so equal coordinates are bitwise equal
        let x = x.into_iter().map(|v| v + 0.0).collect();
        Ok(Self { x })
    }

    pub fn coords(&self) -> &[f64] {
        &self.x
    }

    pub fn k(&self) -> usize {
        self.x.len()
    }
}

/// Scale marker shared by strategies, grids, and simulation configs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scale {
    Discrete { n: u64 },
    Continuous,
}

/// A single playable strategy on either scale.
#[derive(Debug, Clone, PartialEq)]
pub enum PureStrategy {
    Tokens(TokenAllocation),
    Deviation(Deviation),
}

impl PureStrategy {
    pub fn scale(&self) -> Scale {
        match self {
            PureStrategy::Tokens(a) => Scale::Discrete { n: a.n() },
            PureStrategy::Deviation(_) => Scale::Continuous,
        }
    }

    pub fn k(&self) -> usize {
        match self {
            PureStrategy::Tokens(a) => a.k(),
            PureStrategy::Deviation(x) => x.k(),
        }
    }

    pub(crate) fn fingerprint(&self) -> Vec<u64> {
        match self {
            PureStrategy::Tokens(a) => {
                let mut v = vec![0u64];
                v.extend_from_slice(a.counts());
                v
            }
            PureStrategy::Deviation(x) => {
                let mut v = vec![1u64];
                v.extend(x.coords().iter().map(|c| c.to_bits()));
                v
            }
        }
    }
}

/// A finitely supported probability mixture of pure strategies, all sharing
/// one scale and dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedStrategy {
    entries: Vec<(PureStrategy, f64)>,
    scale: Scale,
}

impl MixedStrategy {
    pub fn new(entries: Vec<(PureStrategy, f64)>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidStrategy("support must be nonempty".into()));
        }
        let scale = entries[0].0.scale();
        let k = entries[0].0.k();
        let mut seen = HashSet::with_capacity(entries.len());
        for (s, w) in &entries {
            if s.scale() != scale {
                return Err(Error::InvalidStrategy("support entries mix scales".into()));
            }
            if s.k() != k {
                return Err(Error::InvalidStrategy("support entries mix dimensions".into()));
            }
            if !(*w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidStrategy(format!("weight {w} must be positive")));
            }
            if !seen.insert(s.fingerprint()) {
                return Err(Error::InvalidStrategy("support entries must be pairwise distinct".into()));
            }
        }
        let total = kahan_sum_iter(entries.iter().map(|(_, w)| *w));
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidStrategy(format!("weights sum to {total}, not 1")));
        }
        Ok(Self { entries, scale })
    }

    pub fn point_mass(s: PureStrategy) -> Self {
        Self::new(vec![(s, 1.0)]).expect("a point mass is always valid")
    }

    pub fn uniform(support: Vec<PureStrategy>) -> Result<Self> {
        let w = 1.0 / support.len() as f64;
        Self::new(support.into_iter().map(|s| (s, w)).collect())
    }

    pub fn entries(&self) -> &[(PureStrategy, f64)] {
        &self.entries
    }

    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn k(&self) -> usize {
        self.entries[0].0.k()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Serializes to the strategy text format: a header `scale k [n]`, then
    /// one `weight v_1 ... v_k` line per support point.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.scale {
            Scale::Discrete { n } => {
                let _ = writeln!(out, "discrete {} {}", self.k(), n);
            }
            Scale::Continuous => {
                let _ = writeln!(out, "continuous {}", self.k());
            }
        }
        for (s, w) in &self.entries {
            let _ = write!(out, "{w}");
            match s {
                PureStrategy::Tokens(a) => {
                    for c in a.counts() {
                        let _ = write!(out, " {c}");
                    }
                }
                PureStrategy::Deviation(x) => {
                    for c in x.coords() {
                        let _ = write!(out, " {c}");
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Parses the strategy text format. Weights must sum to 1 within 1e-9 and
    /// are renormalized to machine precision on load.
    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines
            .next()
            .ok_or_else(|| Error::Parse("empty strategy file".into()))?;
        let mut head = header.split_whitespace();
        let scale_word = head.next().ok_or_else(|| Error::Parse("missing scale".into()))?;
        let k: usize = head
            .next()
            .ok_or_else(|| Error::Parse("missing bin count".into()))?
            .parse()
            .map_err(|e| Error::Parse(format!("bad bin count: {e}")))?;
        let scale = match scale_word {
            "discrete" => {
                let n: u64 = head
                    .next()
                    .ok_or_else(|| Error::Parse("discrete header needs a token count".into()))?
                    .parse()
                    .map_err(|e| Error::Parse(format!("bad token count: {e}")))?;
                Scale::Discrete { n }
            }
            "continuous" => Scale::Continuous,
            other => return Err(Error::Parse(format!("unknown scale `{other}`"))),
        };
        if head.next().is_some() {
            return Err(Error::Parse("trailing tokens in header".into()));
        }
        let mut entries = Vec::new();
        for (idx, line) in lines.enumerate() {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != k + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected weight plus {k} coordinates, got {} fields",
                    idx + 2,
                    fields.len()
                )));
            }
            let w: f64 = fields[0]
                .parse()
                .map_err(|e| Error::Parse(format!("line {}: bad weight: {e}", idx + 2)))?;
            let strategy = match scale {
                Scale::Discrete { n } => {
                    let mut xi = Vec::with_capacity(k);
                    for f in &fields[1..] {
                        xi.push(
                            f.parse::<u64>()
                                .map_err(|e| Error::Parse(format!("line {}: bad count: {e}", idx + 2)))?,
                        );
                    }
                    let a = TokenAllocation::new(xi)?;
                    if a.n() != n {
                        return Err(Error::Parse(format!(
                            "line {}: allocation sums to {}, header says {n}",
                            idx + 2,
                            a.n()
                        )));
                    }
                    PureStrategy::Tokens(a)
                }
                Scale::Continuous => {
                    let mut x = Vec::with_capacity(k);
                    for f in &fields[1..] {
                        x.push(
                            f.parse::<f64>()
                                .map_err(|e| Error::Parse(format!("line {}: bad coordinate: {e}", idx + 2)))?,
                        );
                    }
                    PureStrategy::Deviation(Deviation::new(x)?)
                }
            };
            entries.push((strategy, w));
        }
        let total = kahan_sum_iter(entries.iter().map(|(_, w)| *w));
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::Parse(format!("weights sum to {total}, not 1")));
        }
        for e in &mut entries {
            e.1 /= total;
        }
        Self::new(entries)
    }
}

fn kahan_sum(values: &[f64]) -> f64 {
    kahan_sum_iter(values.iter().copied())
}

fn kahan_sum_iter<I: Iterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// How far an allocation overshoots the proportional schedule in its worst
/// bin: max_i(xi_i / p_i - n). Nonnegative for every allocation; zero exactly
/// when xi = n p.
pub fn overplay(a: &TokenAllocation, d: &DieSpec) -> Result<f64> {
    if a.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: a.k() });
    }
    let n = a.n() as f64;
    let worst = a
        .counts()
        .iter()
        .zip(d.probs())
        .map(|(&xi, &p)| xi as f64 / p - n)
        .fold(f64::NEG_INFINITY, f64::max);
    // mathematically >= 0; clamp the roundoff dip at the proportional point
    Ok(worst.max(0.0))
}

/// The delta-undercut of `x`: the uniform k-point mixture whose i-th entry
/// raises coordinate i by (k-1) delta and lowers every other coordinate by
/// delta. Each support point still sums to zero and the mixture's mean is `x`.
pub fn undercut(x: &Deviation, delta: f64) -> Result<MixedStrategy> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(Error::Domain(format!("undercut delta {delta} must be positive")));
    }
    let k = x.k();
    let mut support = Vec::with_capacity(k);
    for i in 0..k {
        let coords: Vec<f64> = x
            .coords()
            .iter()
            .enumerate()
            .map(|(j, &v)| if j == i { v + (k - 1) as f64 * delta } else { v - delta })
            .collect();
        support.push(PureStrategy::Deviation(Deviation::new(coords)?));
    }
    MixedStrategy::uniform(support)
}

/// Rounds a deviation onto the `n`-token scale: targets p_i n + x_i sqrt(n),
/// floored, with the leftover tokens assigned by largest remainder (ties to
/// the lowest bin index). Errors if any target is negative.
pub fn round_deviation(x: &Deviation, n: u64, d: &DieSpec) -> Result<TokenAllocation> {
    if x.k() != d.k() {
        return Err(Error::DimensionMismatch { expected: d.k(), got: x.k() });
    }
    if n == 0 {
        return Err(Error::Domain("token count n must be positive".into()));
    }
    let root_n = (n as f64).sqrt();
    let k = x.k();
    let mut base = Vec::with_capacity(k);
    let mut rem = Vec::with_capacity(k);
    for i in 0..k {
        let target = d.probs()[i] * n as f64 + x.coords()[i] * root_n;
        if target < 0.0 {
            return Err(Error::Domain(format!(
                "deviation pushes bin {i} to {target} tokens, below zero"
            )));
        }
        let f = target.floor();
        base.push(f as u64);
        rem.push(target - f);
    }
    let assigned: u64 = base.iter().sum();
    if assigned > n {
        // only reachable through roundoff on integer-valued targets
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| rem[a].total_cmp(&rem[b]).then(a.cmp(&b)));
        let mut excess = assigned - n;
        let mut cursor = 0usize;
        while excess > 0 && cursor < 64 * k {
            let i = order[cursor % k];
            if base[i] > 0 {
                base[i] -= 1;
                excess -= 1;
            }
            cursor += 1;
        }
        if excess > 0 {
            return Err(Error::Domain("rounding could not reach the token total".into()));
        }
    } else {
        let mut leftover = n - assigned;
        let mut order: Vec<usize> = (0..k).collect();
        order.sort_by(|&a, &b| rem[b].total_cmp(&rem[a]).then(a.cmp(&b)));
        let mut cursor = 0usize;
        while leftover > 0 {
            base[order[cursor % k]] += 1;
            cursor += 1;
            leftover -= 1;
        }
    }
    TokenAllocation::new(base)
}

/// Default lattice resolution for [`uniform_simplex_strategy`]: fine enough
/// that the reference payoff sits well inside its tolerance, small enough to
/// evaluate in seconds on one core.
pub const DEFAULT_SIMPLEX_RESOLUTION: u32 = 121;

/// Quadrature stand-in for the uniform distribution over the simplex slice
/// {x : sum x_i = 0, x_i >= -b}: the centroid lattice at resolution `r` with
/// equal weights. Coordinates are b (k a_j - (r-1)) / r over compositions `a`
/// of r-1 into k parts, so the integer numerator makes lattice coordinates
/// (zero in particular) exact. For k=3 the node count is r(r+1)/2 and r=1 is
/// the single centroid (0,...,0).
pub fn uniform_simplex_strategy(b: f64, r: u32, k: usize) -> Result<MixedStrategy> {
    if !(b > 0.0) || !b.is_finite() {
        return Err(Error::Domain(format!("bound {b} must be positive")));
    }
    if k < 2 {
        return Err(Error::Domain(format!("need k >= 2 bins, got {k}")));
    }
    if r < 1 {
        return Err(Error::Domain("resolution must be at least 1".into()));
    }
    let total = (r - 1) as i64;
    let mut support = Vec::new();
    let mut composition = vec![0i64; k];
    build_simplex_nodes(&mut composition, 0, total, b, r as i64, k, &mut support)?;
    MixedStrategy::uniform(support)
}

fn build_simplex_nodes(
    composition: &mut [i64],
    pos: usize,
    remaining: i64,
    b: f64,
    r: i64,
    k: usize,
    out: &mut Vec<PureStrategy>,
) -> Result<()> {
    if pos == k - 1 {
        composition[k - 1] = remaining;
        let coords: Vec<f64> = composition
            .iter()
            .map(|&a| b * (k as i64 * a - (r - 1)) as f64 / r as f64)
            .collect();
        out.push(PureStrategy::Deviation(Deviation::new(coords)?));
        return Ok(());
    }
    for a in 0..=remaining {
        composition[pos] = a;
        build_simplex_nodes(composition, pos + 1, remaining - a, b, r, k, out)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dev(coords: &[f64]) -> Deviation {
        Deviation::new(coords.to_vec()).unwrap()
    }

    #[test]
    fn die_validation() {
        assert!(DieSpec::new(vec![1.0]).is_err());
        assert!(DieSpec::new(vec![0.5, 0.5, 0.1]).is_err());
        assert!(DieSpec::new(vec![0.0, 1.0]).is_err());
        assert!(DieSpec::new(vec![-0.5, 1.5]).is_err());
        let d = DieSpec::uniform(3);
        assert_eq!(d.k(), 3);
        assert!((d.min_p() - 1.0 / 3.0).abs() < 1e-15);
        assert!(DieSpec::new(vec![0.3, 0.7]).is_ok());
    }

    #[test]
    fn allocation_validation() {
        assert!(TokenAllocation::new(vec![5]).is_err());
        assert!(TokenAllocation::new(vec![0, 0]).is_err());
        let a = TokenAllocation::new(vec![2, 0, 3]).unwrap();
        assert_eq!(a.n(), 5);
        assert_eq!(a.k(), 3);
    }

    #[test]
    fn deviation_validation() {
        assert!(Deviation::new(vec![0.1]).is_err());
        assert!(Deviation::new(vec![0.1, 0.1]).is_err());
        assert!(Deviation::new(vec![f64::NAN, 0.0]).is_err());
        let x = dev(&[0.3, -0.1, -0.2]);
        assert_eq!(x.k(), 3);
    }

    #[test]
    fn negative_zero_is_normalized() {
        let x = Deviation::new(vec![-0.0, 0.0, 0.0]).unwrap();
        assert_eq!(x.coords()[0].to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn overplay_examples() {
        let u3 = DieSpec::uniform(3);
        let a = TokenAllocation::new(vec![60, 60, 60]).unwrap();
        assert!(overplay(&a, &u3).unwrap().abs() < 1e-9);
        let a = TokenAllocation::new(vec![58, 58, 64]).unwrap();
        assert!((overplay(&a, &u3).unwrap() - 12.0).abs() < 1e-9);
        let half = DieSpec::uniform(2);
        let a = TokenAllocation::new(vec![12, 0]).unwrap();
        assert_eq!(overplay(&a, &half).unwrap(), 12.0);
        let wide = TokenAllocation::new(vec![12, 0, 0, 0]).unwrap();
        assert!(overplay(&wide, &u3).is_err());
    }

    #[test]
    fn undercut_examples() {
        let m = undercut(&dev(&[0.0, 0.0, 0.0]), 0.1).unwrap();
        assert_eq!(m.len(), 3);
        let expect = [[0.2, -0.1, -0.1], [-0.1, 0.2, -0.1], [-0.1, -0.1, 0.2]];
        for ((s, w), e) in m.entries().iter().zip(expect.iter()) {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
            let PureStrategy::Deviation(x) = s else { panic!("wrong scale") };
            for (a, b) in x.coords().iter().zip(e.iter()) {
                assert!((a - b).abs() < 1e-15);
            }
        }

        let m = undercut(&dev(&[1.0, -1.0]), 0.5).unwrap();
        let expect = [[1.5, -1.5], [0.5, -0.5]];
        for ((s, _), e) in m.entries().iter().zip(expect.iter()) {
            let PureStrategy::Deviation(x) = s else { panic!("wrong scale") };
            for (a, b) in x.coords().iter().zip(e.iter()) {
                assert!((a - b).abs() < 1e-15);
            }
        }

        assert!(undercut(&dev(&[0.0, 0.0]), 0.0).is_err());
    }

    #[test]
    fn undercut_mean_is_identity() {
        let x = dev(&[0.25, -0.05, -0.2]);
        let m = undercut(&x, 0.07).unwrap();
        for i in 0..3 {
            let mean: f64 = m
                .entries()
                .iter()
                .map(|(s, w)| {
                    let PureStrategy::Deviation(d) = s else { panic!() };
                    w * d.coords()[i]
                })
                .sum();
            assert!((mean - x.coords()[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn round_deviation_examples() {
        let u3 = DieSpec::uniform(3);
        let a = round_deviation(&dev(&[0.0, 0.0, 0.0]), 180, &u3).unwrap();
        assert_eq!(a.counts(), &[60, 60, 60]);

        let half = DieSpec::uniform(2);
        let a = round_deviation(&dev(&[0.5, -0.5]), 100, &half).unwrap();
        assert_eq!(a.counts(), &[55, 45]);

        // boundary point of the >= 58 chips-per-bin region at n = 180
        let a = round_deviation(&dev(&[-1.0 / 6.0, -1.0 / 6.0, 1.0 / 3.0]), 180, &u3).unwrap();
        assert_eq!(a.n(), 180);
        assert_eq!(*a.counts().iter().min().unwrap(), 58);

        assert!(round_deviation(&dev(&[-2.0, 2.0]), 4, &half).is_err());
    }

    #[test]
    fn round_deviation_ties_to_lowest_index() {
        let u3 = DieSpec::uniform(3);
        // all three remainders equal; the single leftover token goes to bin 0
        let a = round_deviation(&dev(&[0.0, 0.0, 0.0]), 181, &u3).unwrap();
        assert_eq!(a.counts(), &[61, 60, 60]);
        // two leftover tokens go to bins 0 and 1
        let b = round_deviation(&dev(&[0.0, 0.0, 0.0]), 182, &u3).unwrap();
        assert_eq!(b.counts(), &[61, 61, 60]);
    }

    #[test]
    fn simplex_strategy_basics() {
        let m = uniform_simplex_strategy(1.0 / 6.0, 1, 3).unwrap();
        assert_eq!(m.len(), 1);
        let PureStrategy::Deviation(x) = &m.entries()[0].0 else { panic!() };
        assert_eq!(x.coords(), &[0.0, 0.0, 0.0]);

        for r in [2u32, 4, 7, 13] {
            let m = uniform_simplex_strategy(1.0 / 6.0, r, 3).unwrap();
            assert_eq!(m.len(), (r * (r + 1) / 2) as usize);
            for (s, w) in m.entries() {
                assert!((w - 1.0 / m.len() as f64).abs() < 1e-15);
                let PureStrategy::Deviation(x) = s else { panic!() };
                for &c in x.coords() {
                    assert!(c >= -1.0 / 6.0 - 1e-15);
                }
            }
        }

        // r = 1 mod 3 puts a node exactly at the origin
        let m = uniform_simplex_strategy(1.0 / 6.0, 7, 3).unwrap();
        let hit = m.entries().iter().any(|(s, _)| {
            let PureStrategy::Deviation(x) = s else { return false };
            x.coords().iter().all(|&c| c == 0.0)
        });
        assert!(hit);

        let m = uniform_simplex_strategy(0.5, 3, 2).unwrap();
        assert_eq!(m.len(), 3);

        assert!(uniform_simplex_strategy(0.0, 3, 3).is_err());
        assert!(uniform_simplex_strategy(0.5, 3, 1).is_err());
    }

    #[test]
    fn mixed_strategy_validation() {
        let p = PureStrategy::Deviation(dev(&[0.1, -0.1]));
        let q = PureStrategy::Deviation(dev(&[0.2, -0.2]));
        assert!(MixedStrategy::new(vec![]).is_err());
        assert!(MixedStrategy::new(vec![(p.clone(), 0.5), (p.clone(), 0.5)]).is_err());
        assert!(MixedStrategy::new(vec![(p.clone(), 0.7), (q.clone(), 0.7)]).is_err());
        assert!(MixedStrategy::new(vec![(p.clone(), 1.5), (q.clone(), -0.5)]).is_err());
        let tok = PureStrategy::Tokens(TokenAllocation::new(vec![1, 1]).unwrap());
        assert!(MixedStrategy::new(vec![(p.clone(), 0.5), (tok, 0.5)]).is_err());
        let m = MixedStrategy::new(vec![(p, 0.25), (q, 0.75)]).unwrap();
        assert_eq!(m.scale(), Scale::Continuous);
        assert_eq!(m.k(), 2);
    }

    #[test]
    fn large_uniform_weight_sum_passes() {
        let support: Vec<PureStrategy> = (0..16471)
            .map(|i| PureStrategy::Deviation(dev(&[i as f64 * 1e-6, -(i as f64) * 1e-6])))
            .collect();
        assert!(MixedStrategy::uniform(support).is_ok());
    }

    #[test]
    fn text_roundtrip_continuous() {
        let m = uniform_simplex_strategy(1.0 / 6.0, 5, 3).unwrap();
        let text = m.to_text();
        let back = MixedStrategy::from_text(&text).unwrap();
        assert_eq!(m, back);
        assert!(text.starts_with("continuous 3\n"));
    }

    #[test]
    fn text_roundtrip_discrete() {
        let a = PureStrategy::Tokens(TokenAllocation::new(vec![60, 60, 60]).unwrap());
        let b = PureStrategy::Tokens(TokenAllocation::new(vec![58, 58, 64]).unwrap());
        let m = MixedStrategy::new(vec![(a, 0.25), (b, 0.75)]).unwrap();
        let text = m.to_text();
        assert!(text.starts_with("discrete 3 180\n"));
        let back = MixedStrategy::from_text(&text).unwrap();
        assert_eq!(m, back);
    }

    #[test]
    fn text_rejects_bad_input() {
        assert!(MixedStrategy::from_text("").is_err());
        assert!(MixedStrategy::from_text("triangular 3\n1 0 0 0\n").is_err());
        assert!(MixedStrategy::from_text("continuous 3\n0.9 0 0 0\n").is_err());
        assert!(MixedStrategy::from_text("discrete 3 180\n1 60 60\n").is_err());
        assert!(MixedStrategy::from_text("discrete 3 180\n1 60 60 61\n").is_err());
        // weights slightly off still load (renormalized), beyond 1e-9 they fail
        let ok = "continuous 2\n0.5000000002 0.1 -0.1\n0.4999999998 0.2 -0.2\n";
        assert!(MixedStrategy::from_text(ok).is_ok());
        let bad = "continuous 2\n0.51 0.1 -0.1\n0.5 0.2 -0.2\n";
        assert!(MixedStrategy::from_text(bad).is_err());
    }
}
