//! End-to-end acceptance checks. Each test prints one verdict line
//! (`ACCEPTANCE <n> (<name>): PASS|FAIL - details`) and fails the build when
//! its criterion is not met; run with `-- --nocapture` to see the lines for
//! passing criteria too.

use std::sync::OnceLock;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use knockdown::solver::{build_grid_continuous, build_grid_discrete, build_matrix, fictitious_play};
use knockdown::{
    beats_discrete, kappa, last_bin_continuous, last_bin_discrete, overplay, payoff_continuous,
    payoff_discrete, payoff_mixed, second_difference, simulate_last_bin_continuous,
    simulate_last_bin_discrete, uniform_simplex_strategy, Deviation, DieSpec, GaussianRace,
    MixedStrategy, PoissonRace, PureStrategy, QuadratureSpec, Scale, SimConfig, SolveResult,
    TokenAllocation, DEFAULT_SIMPLEX_RESOLUTION,
};

fn report(criterion: u32, name: &str, pass: bool, details: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("ACCEPTANCE {criterion} ({name}): {verdict} - {details}");
    assert!(pass, "acceptance criterion {criterion} ({name}) failed: {details}");
}

fn spec() -> QuadratureSpec {
    QuadratureSpec::default()
}

#[test]
fn criterion_01_reference_mixed_payoff() {
    let d = DieSpec::uniform(3);
    let origin = Deviation::new(vec![0.0, 0.0, 0.0]).unwrap();
    let target = -0.0101219;
    let mut errs = Vec::new();
    let mut final_value = 0.0;
    for r in [31, 61, DEFAULT_SIMPLEX_RESOLUTION] {
        let alpha = uniform_simplex_strategy(1.0 / 6.0, r, 3).unwrap();
        let v = payoff_mixed(&alpha, &origin, &d, &spec()).unwrap();
        errs.push((v - target).abs());
        final_value = v;
    }
    let converging = errs[0] > errs[1] && errs[1] > errs[2];
    let within = errs[2] <= 5e-4;
    report(
        1,
        "reference mixed payoff",
        converging && within,
        &format!(
            "payoff at r={} is {final_value:.7} vs {target} (errors {:.2e} > {:.2e} > {:.2e}, tolerance 5e-4)",
            DEFAULT_SIMPLEX_RESOLUTION, errs[0], errs[1], errs[2]
        ),
    );
}

/// Uniform mixture over the 28 allocations of 180 tokens with at least 58
/// per bin.
fn conservative_180() -> MixedStrategy {
    let mut support = Vec::new();
    for a in 58..=64u64 {
        for b in 58..=(180 - a - 58) {
            let c = 180 - a - b;
            if c >= 58 {
                support.push(PureStrategy::Tokens(TokenAllocation::new(vec![a, b, c]).unwrap()));
            }
        }
    }
    assert_eq!(support.len(), 28);
    MixedStrategy::uniform(support).unwrap()
}

#[test]
fn criterion_02_conservative_kappa_180() {
    let d = DieSpec::uniform(3);
    let k = kappa(&conservative_180(), &d, &spec()).unwrap();
    let target = -0.0165257;
    let pass = (k - target).abs() <= 1e-3;
    report(
        2,
        "conservative kappa at n=180",
        pass,
        &format!("kappa = {k:.7} vs {target} +/- 1e-3"),
    );
}

#[test]
fn criterion_03_point_mass_kappa_180() {
    let d = DieSpec::uniform(3);
    let alpha = MixedStrategy::point_mass(PureStrategy::Tokens(
        TokenAllocation::new(vec![60, 60, 60]).unwrap(),
    ));
    let k = kappa(&alpha, &d, &spec()).unwrap();
    let target = -0.0920653;
    let pass = (k - target).abs() <= 1e-3;
    report(
        3,
        "point-mass kappa at n=180",
        pass,
        &format!("kappa = {k:.7} vs {target} +/- 1e-3"),
    );
}

#[test]
fn criterion_04_undercut_payoff_limit() {
    let d = DieSpec::uniform(3);
    let origin = Deviation::new(vec![0.0, 0.0, 0.0]).unwrap();
    let limit = -1.0 / 6.0;
    let mut values = Vec::new();
    for eps in [0.1, 0.05, 0.025] {
        let y = Deviation::new(vec![-eps, -eps, 2.0 * eps]).unwrap();
        values.push(payoff_continuous(&origin, &y, &d, &spec()).unwrap());
    }
    let at_zero = payoff_continuous(&origin, &origin, &d, &spec()).unwrap();
    let decreasing = values[0] > values[1] && values[1] > values[2] && values[2] > limit;
    let distance = (values[2] - limit).abs();
    let close = distance <= 0.02;
    let zero_exact = at_zero == 0.0;
    report(
        4,
        "undercut payoff limit",
        decreasing && close && zero_exact,
        &format!(
            "payoffs {:.7}, {:.7}, {:.7} decreasing toward -1/6 ({decreasing}), |K(eps=0.025) + 1/6| = {distance:.4} vs 0.02 ({close}), K at eps=0 is {at_zero} ({zero_exact})",
            values[0], values[1], values[2]
        ),
    );
}

#[test]
fn criterion_05_simulator_agreement() {
    let trials = 1_000_000u64;
    let q = spec();
    let mut worst: f64 = 0.0;
    let mut cases = 0;

    let discrete: Vec<(Vec<f64>, Vec<u64>)> = vec![
        (vec![0.5, 0.5], vec![1, 1]),
        (vec![0.5, 0.5], vec![2, 1]),
        (vec![1.0 / 3.0; 3], vec![1, 1, 1]),
        (vec![1.0 / 3.0; 3], vec![3, 2, 2]),
        (vec![0.3, 0.7], vec![5, 1]),
        (vec![1.0 / 3.0; 3], vec![5, 5, 5]),
    ];
    for (i, (p, m)) in discrete.iter().enumerate() {
        let die = DieSpec::new(p.clone()).unwrap();
        let race = PoissonRace::new(die, m.clone()).unwrap();
        let exact = last_bin_discrete(&race, &q).unwrap();
        let n = m.iter().sum();
        let config = SimConfig::new(trials, 52_000 + i as u64, Scale::Discrete { n }).unwrap();
        let emp = simulate_last_bin_discrete(&race, &config).unwrap();
        for j in 0..p.len() {
            let sigma = (exact.probs()[j] * (1.0 - exact.probs()[j]) / trials as f64).sqrt();
            let z = (emp.probs()[j] - exact.probs()[j]).abs() / sigma.max(1e-12);
            worst = worst.max(z);
        }
        if m == &vec![2, 1] {
            assert!((exact.probs()[0] - 0.75).abs() < 1e-9);
        }
        cases += 1;
    }

    let continuous: Vec<(Vec<f64>, Vec<f64>)> = vec![
        (vec![1.0 / 3.0; 3], vec![0.0, 0.0, 0.0]),
        (vec![1.0 / 3.0; 3], vec![0.2, -0.1, -0.1]),
        (vec![0.5, 0.5], vec![0.3, -0.3]),
        (vec![0.2, 0.3, 0.5], vec![0.4, 0.1, -0.5]),
    ];
    for (i, (p, m)) in continuous.iter().enumerate() {
        let die = DieSpec::new(p.clone()).unwrap();
        let race = GaussianRace::new(die, m.clone()).unwrap();
        let exact = last_bin_continuous(&race, &q).unwrap();
        let config = SimConfig::new(trials, 91_000 + i as u64, Scale::Continuous).unwrap();
        let emp = simulate_last_bin_continuous(&race, &config).unwrap();
        for j in 0..p.len() {
            let sigma = (exact.probs()[j] * (1.0 - exact.probs()[j]) / trials as f64).sqrt();
            let z = (emp.probs()[j] - exact.probs()[j]).abs() / sigma.max(1e-12);
            worst = worst.max(z);
        }
        cases += 1;
    }

    report(
        5,
        "simulator agreement",
        worst <= 4.0 && cases == 10,
        &format!("{cases} cases at 1e6 trials, worst deviation {worst:.2} sigma vs 4 sigma"),
    );
}

/// Largest-remainder apportionment of n tokens over sampled fractions.
fn random_allocation(rng: &mut ChaCha8Rng, n: u64, k: usize) -> TokenAllocation {
    let fracs: Vec<f64> = (0..k).map(|_| rng.random::<f64>() + 0.01).collect();
    let total: f64 = fracs.iter().sum();
    let targets: Vec<f64> = fracs.iter().map(|f| f / total * n as f64).collect();
    let mut xi: Vec<u64> = targets.iter().map(|t| t.floor() as u64).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| {
        let ra = targets[a] - targets[a].floor();
        let rb = targets[b] - targets[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut left = n - xi.iter().sum::<u64>();
    for &i in order.iter().cycle() {
        if left == 0 {
            break;
        }
        xi[i] += 1;
        left -= 1;
    }
    TokenAllocation::new(xi).unwrap()
}

fn random_mixed(rng: &mut ChaCha8Rng, n: u64, k: usize) -> MixedStrategy {
    let mut entries = Vec::new();
    let mut seen = std::collections::HashSet::new();
    let size = rng.random_range(1..=4usize);
    for _ in 0..size {
        let a = random_allocation(rng, n, k);
        if seen.insert(a.counts().to_vec()) {
            entries.push((PureStrategy::Tokens(a), rng.random::<f64>() + 0.1));
        }
    }
    let total: f64 = entries.iter().map(|e| e.1).sum();
    for e in &mut entries {
        e.1 /= total;
    }
    MixedStrategy::new(entries).unwrap()
}

#[test]
fn criterion_06_payoff_property_suite() {
    let q = spec();
    let mut rng = ChaCha8Rng::seed_from_u64(600);
    let mut worst_antisym: f64 = 0.0;
    let mut worst_norm: f64 = 0.0;
    let mut beats_exact = true;

    for _ in 0..20 {
        let die = {
            let raw: Vec<f64> = (0..3).map(|_| rng.random::<f64>() + 0.05).collect();
            let t: f64 = raw.iter().sum();
            DieSpec::new(raw.iter().map(|w| w / t).collect()).unwrap()
        };
        let n = rng.random_range(2..=6u64);
        let a = random_allocation(&mut rng, n, 3);
        let b = random_allocation(&mut rng, n, 3);
        let kab = payoff_discrete(&a, &b, &die, &q).unwrap();
        let kba = payoff_discrete(&b, &a, &die, &q).unwrap();
        worst_antisym = worst_antisym.max((kab + kba).abs());
        beats_exact &= beats_discrete(&a, &b, &die, &q).unwrap()
            + beats_discrete(&b, &a, &die, &q).unwrap()
            == 1.0;
        let race = PoissonRace::new(die, a.counts().to_vec()).unwrap();
        let l = last_bin_discrete(&race, &q).unwrap();
        worst_norm = worst_norm.max((l.probs().iter().sum::<f64>() - 1.0).abs());
    }

    let u3 = DieSpec::uniform(3);
    let mut worst_kappa = f64::NEG_INFINITY;
    for _ in 0..50 {
        let n = rng.random_range(2..=5u64);
        let alpha = random_mixed(&mut rng, n, 3);
        worst_kappa = worst_kappa.max(kappa(&alpha, &u3, &q).unwrap());
    }

    let pass = worst_antisym <= 1e-9 && worst_norm <= 1e-9 && beats_exact && worst_kappa <= 1e-9;
    report(
        6,
        "payoff property suite",
        pass,
        &format!(
            "antisymmetry {worst_antisym:.1e} vs 1e-9, normalization {worst_norm:.1e} vs 1e-9, beats complement exact: {beats_exact}, max kappa over 50 mixed strategies {worst_kappa:.1e} vs 1e-9"
        ),
    );
}

#[test]
fn criterion_07_local_flatness_scaling() {
    let d = DieSpec::uniform(3);
    let q = spec();
    let mut scaled = Vec::new();
    for n in [100u64, 400, 1600] {
        let third = n / 3;
        let m = vec![third, third, n - 2 * third];
        let race = PoissonRace::new(d.clone(), m).unwrap();
        let mut max_abs: f64 = 0.0;
        for (h, i) in [(0usize, 1usize), (0, 2), (1, 2)] {
            for j in 0..3 {
                let sd = second_difference(&race, h, i, j, &q).unwrap();
                max_abs = max_abs.max(sd.abs());
            }
        }
        scaled.push(max_abs * n as f64);
    }
    let spread = scaled.iter().cloned().fold(f64::MIN, f64::max)
        / scaled.iter().cloned().fold(f64::MAX, f64::min);
    report(
        7,
        "local flatness scaling",
        spread <= 1.5,
        &format!(
            "n * max second difference = {:.5}, {:.5}, {:.5} at n = 100, 400, 1600; spread factor {spread:.3} vs 1.5",
            scaled[0], scaled[1], scaled[2]
        ),
    );
}

#[test]
fn criterion_08_overplay_domination() {
    let d = DieSpec::uniform(3);
    let q = spec();
    let n = 100u64;
    let base = TokenAllocation::new(vec![34, 33, 33]).unwrap();
    let min_p = 1.0 / 3.0;
    let mut pass = true;
    let mut lines = Vec::new();
    for (w, eta) in [(2.0, vec![69u64, 16, 15]), (3.0, vec![86, 7, 7])] {
        let gap_needed = w * (3.0 * n as f64).sqrt() / min_p;
        let eta = TokenAllocation::new(eta).unwrap();
        let gap = overplay(&eta, &d).unwrap() - overplay(&base, &d).unwrap();
        assert!(gap >= gap_needed, "construction broke: gap {gap} < {gap_needed}");
        let beat = beats_discrete(&eta, &base, &d, &q).unwrap();
        let bound = 1.0 / (w * w);
        pass &= beat < bound;
        lines.push(format!("w={w}: beat probability {beat:.2e} vs 1/w^2 = {bound:.3}"));
    }
    report(8, "overplay domination", pass, &lines.join("; "));
}

struct SolveArtifacts {
    result: SolveResult,
    bound: f64,
}

static SOLVE: OnceLock<SolveArtifacts> = OnceLock::new();

fn shared_solve() -> &'static SolveArtifacts {
    SOLVE.get_or_init(|| {
        let d = DieSpec::uniform(3);
        let grid = build_grid_continuous(&d, 0.05, 0.6).unwrap();
        let matrix = build_matrix(&grid, &d, &spec()).unwrap();
        let result = fictitious_play(&matrix, 0.005, 100_000).unwrap();
        SolveArtifacts { result, bound: grid.bound() }
    })
}

#[test]
fn criterion_09_solver_equilibrium() {
    let solved = shared_solve();
    let exploit_ok = solved.result.exploitability <= 0.02;
    let value_ok = solved.result.value_estimate.abs() <= 0.005;

    let d2 = DieSpec::new(vec![1.0 / 3.0, 2.0 / 3.0]).unwrap();
    let grid2 = build_grid_discrete(&d2, 20, None).unwrap();
    let matrix2 = build_matrix(&grid2, &d2, &spec()).unwrap();
    let result2 = fictitious_play(&matrix2, 0.005, 100_000).unwrap();
    let median_pure = result2.strategy.entries().len() == 1
        && matches!(
            &result2.strategy.entries()[0].0,
            PureStrategy::Tokens(a) if a.counts() == [7, 13]
        );

    report(
        9,
        "solver equilibrium",
        exploit_ok && value_ok && median_pure,
        &format!(
            "k=3 exploitability {:.5} vs 0.02, value {:.5} vs 0.005; k=2 n=20 support {} entries, binomial-median pure (7,13): {median_pure}",
            solved.result.exploitability,
            solved.result.value_estimate,
            result2.strategy.entries().len()
        ),
    );
}

#[test]
fn criterion_10_solved_support_bounds() {
    let solved = shared_solve();
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (point, _) in solved.result.strategy.entries() {
        let PureStrategy::Deviation(x) = point else { panic!("continuous support expected") };
        for &c in x.coords() {
            lo = lo.min(c);
            hi = hi.max(c);
        }
    }
    let pass = lo >= -0.35 && hi <= 0.40;
    report(
        10,
        "solved support bounds",
        pass,
        &format!(
            "support coordinates span [{lo:.2}, {hi:.2}] vs [-0.35, 0.40] (grid box bound {:.2})",
            solved.bound
        ),
    );
}
