//! Equilibrium machinery: bounded strategy grids, payoff matrices with a
//! persistent cache, fictitious play with an exploitability certificate,
//! best responses, kappa, and the marginal-spacing diagnostic.

use crate::continuous::{payoff_continuous, payoff_mixed};
use crate::discrete::{payoff_discrete, payoff_mixed_discrete};
use crate::error::{Error, Result};
use crate::game::{overplay, Deviation, DieSpec, MixedStrategy, PureStrategy, Scale, TokenAllocation};
use crate::numerics::QuadratureSpec;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

/// A finite, deterministically ordered set of pure strategies on one scale.
#[derive(Debug, Clone, PartialEq)]
pub struct StrategyGrid {
    scale: Scale,
    points: Vec<PureStrategy>,
    spacing: f64,
    bound: f64,
}

impl StrategyGrid {
    pub fn scale(&self) -> Scale {
        self.scale
    }

    pub fn points(&self) -> &[PureStrategy] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Lattice spacing: h on the continuous scale, 1 on the token scale.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    /// Per-coordinate lower bound B (continuous) or the overplay cap
    /// (discrete) the grid was built with.
    pub fn bound(&self) -> f64 {
        self.bound
    }
}

/// The overplay cap of the no-optimal-strategy bound:
/// (3 sqrt(3 + sqrt 5) sqrt(k n) + 1) / min_i p_i. Allocations overplaying
/// beyond it lose to the proportional schedule, so restricting searches to it
/// loses nothing.
pub fn theorem_overplay_bound(n: u64, d: &DieSpec) -> f64 {
    let kn = d.k() as f64 * n as f64;
    (3.0 * (3.0 + 5.0f64.sqrt()).sqrt() * kn.sqrt() + 1.0) / d.min_p()
}

/// Zero-sum lattice with spacing `h`: every point has coordinates
/// (a_i - m) h with a_i nonnegative integers summing to k m, where
/// m = round(B / h). Coordinates therefore range over [-B', (k-1) B'] for the
/// snapped bound B' = m h, and lattice coordinates are bitwise-reproducible
/// floats (integer times h), so equal coordinates across points compare
/// equal exactly. Lexicographic order in `a`.
pub fn build_grid_continuous(d: &DieSpec, h: f64, bound: f64) -> Result<StrategyGrid> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(Error::Domain(format!("grid spacing {h} must be positive")));
    }
    if !(bound > 0.0) || !bound.is_finite() {
        return Err(Error::Domain(format!("grid bound {bound} must be positive")));
    }
    let k = d.k();
    let m = (bound / h).round() as i64;
    let mut points = Vec::new();
    let mut composition = vec![0i64; k];
    enumerate_compositions(&mut composition, 0, k as i64 * m, &mut |a| {
        let coords: Vec<f64> = a.iter().map(|&ai| (ai - m) as f64 * h).collect();
        points.push(PureStrategy::Deviation(Deviation::new(coords)?));
        Ok(())
    })?;
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(StrategyGrid { scale: Scale::Continuous, points, spacing: h, bound: m as f64 * h })
}

/// All allocations of `n` tokens whose overplay stays within `max_overplay`
/// (the theorem bound when absent), in lexicographic order.
pub fn build_grid_discrete(d: &DieSpec, n: u64, max_overplay: Option<f64>) -> Result<StrategyGrid> {
    if n < 1 {
        return Err(Error::Domain("token count n must be positive".into()));
    }
    let cap = match max_overplay {
        Some(b) if !(b >= 0.0) => return Err(Error::Domain(format!("overplay cap {b} must be nonnegative"))),
        Some(b) => b,
        None => theorem_overplay_bound(n, d),
    };
    let k = d.k();
    let mut points = Vec::new();
    let mut composition = vec![0i64; k];
    enumerate_compositions(&mut composition, 0, n as i64, &mut |a| {
        let xi: Vec<u64> = a.iter().map(|&v| v as u64).collect();
        let alloc = TokenAllocation::new(xi)?;
        if overplay(&alloc, d)? <= cap + 1e-9 {
            points.push(PureStrategy::Tokens(alloc));
        }
        Ok(())
    })?;
    if points.is_empty() {
        return Err(Error::EmptyGrid);
    }
    Ok(StrategyGrid { scale: Scale::Discrete { n }, points, spacing: 1.0, bound: cap })
}

fn enumerate_compositions(
    slots: &mut [i64],
    pos: usize,
    remaining: i64,
    emit: &mut dyn FnMut(&[i64]) -> Result<()>,
) -> Result<()> {
    if pos == slots.len() - 1 {
        slots[pos] = remaining;
        return emit(slots);
    }
    for v in 0..=remaining {
        slots[pos] = v;
        enumerate_compositions(slots, pos + 1, remaining - v, emit)?;
    }
    Ok(())
}

/// The payoff of every ordered grid pair, row player first. Antisymmetric
/// with zero diagonal exactly by construction.
#[derive(Debug, Clone, PartialEq)]
pub struct PayoffMatrix {
    grid: StrategyGrid,
    entries: Vec<f64>,
}

impl PayoffMatrix {
    pub fn grid(&self) -> &StrategyGrid {
        &self.grid
    }

    pub fn size(&self) -> usize {
        self.grid.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.size() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.size();
        &self.entries[i * n..(i + 1) * n]
    }

    /// Checks antisymmetry within 1e-9 and a zero diagonal.
    pub fn validate(&self) -> Result<()> {
        let n = self.size();
        for i in 0..n {
            if self.at(i, i) != 0.0 {
                return Err(Error::Domain(format!("diagonal entry {i} is {}", self.at(i, i))));
            }
            for j in (i + 1)..n {
                if (self.at(i, j) + self.at(j, i)).abs() > 1e-9 {
                    return Err(Error::Domain(format!("entries ({i},{j}) break antisymmetry")));
                }
            }
        }
        Ok(())
    }
}

fn pair_payoff(a: &PureStrategy, b: &PureStrategy, d: &DieSpec, spec: &QuadratureSpec) -> Result<f64> {
    match (a, b) {
        (PureStrategy::Tokens(a), PureStrategy::Tokens(b)) => payoff_discrete(a, b, d, spec),
        (PureStrategy::Deviation(x), PureStrategy::Deviation(y)) => payoff_continuous(x, y, d, spec),
        _ => Err(Error::InvalidStrategy("mixed scales in one grid".into())),
    }
}

/// Evaluates the payoff of every upper-triangle pair in parallel and fills
/// the lower triangle with exact negations.
pub fn build_matrix(grid: &StrategyGrid, d: &DieSpec, spec: &QuadratureSpec) -> Result<PayoffMatrix> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    let n = grid.len();
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect();
    let values: Result<Vec<f64>> = pairs
        .par_iter()
        .map(|&(i, j)| pair_payoff(&grid.points()[i], &grid.points()[j], d, spec))
        .collect();
    let values = values?;
    let mut entries = vec![0.0; n * n];
    for (&(i, j), &v) in pairs.iter().zip(&values) {
        entries[i * n + j] = v;
        entries[j * n + i] = -v;
    }
    Ok(PayoffMatrix { grid: grid.clone(), entries })
}

#[derive(Serialize, Deserialize, PartialEq, Debug)]
struct CacheHeader {
    format: u32,
    scale: String,
    n: Option<u64>,
    k: usize,
    spacing_bits: u64,
    bound_bits: u64,
    grid_len: usize,
    die_bits: Vec<u64>,
    tolerance_bits: u64,
    payload_len: u64,
    sha256_hex: String,
}

fn cache_header(grid: &StrategyGrid, d: &DieSpec, spec: &QuadratureSpec, payload: &[u8]) -> CacheHeader {
    let (scale, n) = match grid.scale() {
        Scale::Discrete { n } => ("discrete".to_string(), Some(n)),
        Scale::Continuous => ("continuous".to_string(), None),
    };
    CacheHeader {
        format: 1,
        scale,
        n,
        k: d.k(),
        spacing_bits: grid.spacing().to_bits(),
        bound_bits: grid.bound().to_bits(),
        grid_len: grid.len(),
        die_bits: d.probs().iter().map(|p| p.to_bits()).collect(),
        tolerance_bits: spec.tolerance.to_bits(),
        payload_len: payload.len() as u64,
        sha256_hex: hex_digest(payload),
    }
}

fn hex_digest(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest {
        let _ = std::fmt::Write::write_fmt(&mut out, format_args!("{b:02x}"));
    }
    out
}

/// Writes the upper triangle with a JSON header keyed by die, grid
/// parameters, and quadrature tolerance, plus a payload hash.
pub fn save_matrix(matrix: &PayoffMatrix, d: &DieSpec, spec: &QuadratureSpec, path: &Path) -> Result<()> {
    let n = matrix.size();
    let mut payload = Vec::with_capacity(n * (n - 1) / 2 * 8);
    for i in 0..n {
        for j in (i + 1)..n {
            payload.extend_from_slice(&matrix.at(i, j).to_le_bytes());
        }
    }
    let header = cache_header(matrix.grid(), d, spec, &payload);
    let mut bytes = serde_json::to_vec(&header).map_err(|e| Error::Parse(e.to_string()))?;
    bytes.push(b'\n');
    bytes.extend_from_slice(&payload);
    std::fs::write(path, bytes)?;
    Ok(())
}

/// Reads a matrix back, refusing files keyed by different parameters
/// (CacheMismatch) or failing the integrity hash (CacheCorrupt).
pub fn load_matrix(grid: &StrategyGrid, d: &DieSpec, spec: &QuadratureSpec, path: &Path) -> Result<PayoffMatrix> {
    let bytes = std::fs::read(path)?;
    let split = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| Error::CacheCorrupt("missing header line".into()))?;
    let header: CacheHeader = serde_json::from_slice(&bytes[..split])
        .map_err(|e| Error::CacheCorrupt(format!("unreadable header: {e}")))?;
    let payload = &bytes[split + 1..];
    let expected = cache_header(grid, d, spec, payload);
    if header.format != expected.format
        || header.scale != expected.scale
        || header.n != expected.n
        || header.k != expected.k
        || header.spacing_bits != expected.spacing_bits
        || header.bound_bits != expected.bound_bits
        || header.grid_len != expected.grid_len
        || header.die_bits != expected.die_bits
        || header.tolerance_bits != expected.tolerance_bits
    {
        return Err(Error::CacheMismatch(
            "cache file was built with different die, grid, or tolerance parameters".into(),
        ));
    }
    if header.payload_len != payload.len() as u64 || header.sha256_hex != expected.sha256_hex {
        return Err(Error::CacheCorrupt("payload does not match its integrity hash".into()));
    }
    let n = grid.len();
    let mut entries = vec![0.0; n * n];
    let mut cursor = 0usize;
    for i in 0..n {
        for j in (i + 1)..n {
            let v = f64::from_le_bytes(payload[cursor..cursor + 8].try_into().expect("length checked"));
            entries[i * n + j] = v;
            entries[j * n + i] = -v;
            cursor += 8;
        }
    }
    Ok(PayoffMatrix { grid: grid.clone(), entries })
}

/// A solved strategy with its certificate. `exploitability` is the payoff of
/// the opponent's best grid response against the strategy (nonnegative up to
/// roundoff); `checkpoints` records (iteration, exploitability) each time the
/// running best improved, so it is nonincreasing by construction.
#[derive(Debug, Clone)]
pub struct SolveResult {
    pub strategy: MixedStrategy,
    pub exploitability: f64,
    pub value_estimate: f64,
    pub iterations: u64,
    pub converged: bool,
    pub checkpoints: Vec<(u64, f64)>,
}

fn mat_vec(matrix: &PayoffMatrix, weights: &[f64]) -> Vec<f64> {
    let n = matrix.size();
    (0..n)
        .into_par_iter()
        .map(|i| {
            let row = matrix.row(i);
            let mut acc = 0.0;
            for j in 0..n {
                let w = weights[j];
                if w != 0.0 {
                    acc += row[j] * w;
                }
            }
            acc
        })
        .collect()
}

fn argmax(values: &[f64]) -> (usize, f64) {
    let mut arg = 0usize;
    let mut best = values[0];
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > best {
            best = v;
            arg = i;
        }
    }
    (arg, best)
}

// Fictitious-play averages carry a dusting of weight over every grid point
// (the uniform start plus rare best responses). Dropping support points in
// ascending weight order while the certificate still holds shrinks the
// strategy to its effective support; the scan stops at the first refused
// drop and never empties the support.
fn greedy_cleanup(matrix: &PayoffMatrix, sigma: &mut [f64], epsilon: f64) {
    let mut support: Vec<usize> = (0..sigma.len()).filter(|&i| sigma[i] > 0.0).collect();
    if support.len() <= 1 {
        return;
    }
    support.sort_by(|&a, &b| sigma[a].total_cmp(&sigma[b]).then(a.cmp(&b)));
    let mut u = mat_vec(matrix, sigma);
    let mut mass: f64 = sigma.iter().sum();
    let mut live = support.len();
    for &cand in &support {
        if live == 1 {
            break;
        }
        let w = sigma[cand];
        let row = matrix.row(cand);
        // removing cand: u_i loses P[i][cand] w, and P[i][cand] = -row[i]
        let trial_mass = mass - w;
        let mut top = f64::NEG_INFINITY;
        for i in 0..u.len() {
            let v = u[i] + row[i] * w;
            if v > top {
                top = v;
            }
        }
        if top / trial_mass <= epsilon {
            for i in 0..u.len() {
                u[i] += row[i] * w;
            }
            mass = trial_mass;
            sigma[cand] = 0.0;
            live -= 1;
        } else {
            break;
        }
    }
    for v in sigma.iter_mut() {
        *v /= mass;
    }
}

fn strategy_from_weights(grid: &StrategyGrid, weights: &[f64]) -> Result<MixedStrategy> {
    let total: f64 = weights.iter().sum();
    let entries: Vec<(PureStrategy, f64)> = grid
        .points()
        .iter()
        .zip(weights)
        .filter(|(_, &w)| w > 0.0)
        .map(|(p, &w)| (p.clone(), w / total))
        .collect();
    MixedStrategy::new(entries)
}

/// Fictitious play on an antisymmetric payoff matrix, from the uniform
/// strategy, best-responding to the running average each iteration.
///
/// Stops once the running-best exploitability reaches `epsilon` (converged)
/// or the iteration budget runs out (flagged, not an error). When the target
/// was met by the untouched uniform start it is returned as is; otherwise the
/// best iterate is pruned by the greedy cleanup before the final certificate
/// is recomputed from scratch.
pub fn fictitious_play(matrix: &PayoffMatrix, epsilon: f64, max_iterations: u64) -> Result<SolveResult> {
    if !(epsilon >= 0.0) {
        return Err(Error::Domain(format!("target exploitability {epsilon} must be nonnegative")));
    }
    if max_iterations < 1 {
        return Err(Error::Domain("need at least one iteration".into()));
    }
    matrix.validate()?;
    let n = matrix.size();
    let mut counts = vec![1.0 / n as f64; n];
    let mut mass = 1.0f64;
    let mut u = mat_vec(matrix, &counts);
    let mut best_exploit = f64::INFINITY;
    let mut best_counts = counts.clone();
    let mut best_mass = mass;
    let mut checkpoints: Vec<(u64, f64)> = Vec::new();
    let mut iterations = 0u64;
    let mut converged = false;
    let mut br_steps = 0u64;
    for t in 1..=max_iterations {
        iterations = t;
        let (br, top) = argmax(&u);
        let exploit = top / mass;
        if exploit < best_exploit {
            best_exploit = exploit;
            best_counts.copy_from_slice(&counts);
            best_mass = mass;
            checkpoints.push((t, exploit));
        }
        if best_exploit <= epsilon {
            converged = true;
            break;
        }
        counts[br] += 1.0;
        mass += 1.0;
        br_steps += 1;
        if br_steps % 4096 == 0 {
            // periodic refresh clears incremental-update drift
            u = mat_vec(matrix, &counts);
        } else {
            let row = matrix.row(br);
            for (ui, &ri) in u.iter_mut().zip(row) {
                *ui -= ri;
            }
        }
    }
    let mut sigma: Vec<f64> = best_counts.iter().map(|c| c / best_mass).collect();
    if br_steps > 0 {
        greedy_cleanup(matrix, &mut sigma, epsilon);
    }
    let u_final = mat_vec(matrix, &sigma);
    let (_, upper) = argmax(&u_final);
    // the guaranteed payoff of sigma is the exact negation of the best
    // response payoff (antisymmetric matrix), so the certified value interval
    // is [-upper, upper] and its midpoint is the value estimate
    let lower = -upper;
    let exploitability = upper;
    let value_estimate = 0.5 * (lower + upper);
    converged = converged && exploitability <= epsilon + 1e-9;
    Ok(SolveResult {
        strategy: strategy_from_weights(matrix.grid(), &sigma)?,
        exploitability,
        value_estimate,
        iterations,
        converged,
        checkpoints,
    })
}

/// The grid strategy minimizing `alpha`'s expected payoff, ties broken by
/// grid order, together with that minimum (kappa on this grid).
pub fn best_response(
    alpha: &MixedStrategy,
    grid: &StrategyGrid,
    d: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<(PureStrategy, f64)> {
    if grid.is_empty() {
        return Err(Error::EmptyGrid);
    }
    if alpha.scale() != grid.scale() {
        return Err(Error::InvalidStrategy("strategy and grid scales differ".into()));
    }
    let values: Result<Vec<f64>> = grid
        .points()
        .par_iter()
        .map(|y| match y {
            PureStrategy::Tokens(b) => payoff_mixed_discrete(alpha, b, d, spec),
            PureStrategy::Deviation(yd) => payoff_mixed(alpha, yd, d, spec),
        })
        .collect();
    let values = values?;
    let mut arg = 0usize;
    let mut best = values[0];
    for (j, &v) in values.iter().enumerate().skip(1) {
        if v < best {
            best = v;
            arg = j;
        }
    }
    Ok((grid.points()[arg].clone(), best))
}

/// kappa_n: the worst-case payoff of a discrete mixed strategy against the
/// best allocation in the overplay-bounded response set. Always <= 0, since
/// the responder can mirror any support point.
pub fn kappa(alpha: &MixedStrategy, d: &DieSpec, spec: &QuadratureSpec) -> Result<f64> {
    let Scale::Discrete { n } = alpha.scale() else {
        return Err(Error::InvalidStrategy("kappa needs a discrete-scale strategy".into()));
    };
    let grid = build_grid_discrete(d, n, None)?;
    Ok(best_response(alpha, &grid, d, spec)?.1)
}

/// Pr[|x_i - y_i| <= delta] for independent draws x, y from `alpha`; the
/// atomless-marginals diagnostic. Exact sum over support pairs.
pub fn marginal_spacing(alpha: &MixedStrategy, coordinate: usize, delta: f64) -> Result<f64> {
    if coordinate >= alpha.k() {
        return Err(Error::DimensionMismatch { expected: alpha.k(), got: coordinate });
    }
    if !(delta >= 0.0) {
        return Err(Error::Domain(format!("spacing window {delta} must be nonnegative")));
    }
    let coord = |s: &PureStrategy| -> f64 {
        match s {
            PureStrategy::Tokens(a) => a.counts()[coordinate] as f64,
            PureStrategy::Deviation(x) => x.coords()[coordinate],
        }
    };
    let entries = alpha.entries();
    let mut total = 0.0;
    for (s, ws) in entries {
        let vs = coord(s);
        for (t, wt) in entries {
            if (vs - coord(t)).abs() <= delta {
                total += ws * wt;
            }
        }
    }
    Ok(total)
}
