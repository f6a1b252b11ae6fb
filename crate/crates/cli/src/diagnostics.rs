//! `diagnostics`: numeric bound checks with printed margins. Exits 3 when a
//! bound is violated.

use std::path::{Path, PathBuf};
use std::time::Instant;

use knockdown::{
    beats_discrete, change_probability_bound, last_bin_discrete, marginal_spacing, overplay,
    payoff_continuous, payoff_mixed, second_difference, undercut, Deviation, DieSpec, Error,
    MixedStrategy, PoissonRace, QuadratureSpec, Result, TokenAllocation,
};
use serde_json::json;

use crate::manifest;
use crate::parse;
use crate::{EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CheckArg {
    All,
    Flatness,
    Overplay,
    ChangeBound,
    Undercut,
    Spacing,
}

#[derive(clap::Args)]
pub struct DiagnosticsArgs {
    #[arg(long, value_enum, default_value = "all")]
    check: CheckArg,

    /// Die probabilities (default: uniform over 3 bins)
    #[arg(long)]
    p: Option<String>,

    /// Strategy file for the spacing check
    #[arg(long)]
    strategy: Option<PathBuf>,

    /// Lattice spacing h the spacing check scales its deltas from
    #[arg(long, default_value_t = 0.05)]
    spacing: f64,

    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

struct Verdict {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn report(verdicts: &mut Vec<Verdict>, name: &'static str, passed: bool, detail: String) {
    println!("{name}: {} - {detail}", if passed { "ok" } else { "VIOLATED" });
    verdicts.push(Verdict { name, passed, detail });
}

/// Largest-remainder apportionment of n tokens proportional to the die.
fn proportional(die: &DieSpec, n: u64) -> TokenAllocation {
    let targets: Vec<f64> = die.probs().iter().map(|p| p * n as f64).collect();
    let mut xi: Vec<u64> = targets.iter().map(|t| t.floor() as u64).collect();
    let mut order: Vec<usize> = (0..die.k()).collect();
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

fn check_flatness(die: &DieSpec, spec: &QuadratureSpec, verdicts: &mut Vec<Verdict>) -> Result<()> {
    if die.k() != 3 {
        return Err(Error::Domain("flatness check is defined for k = 3".into()));
    }
    let mut scaled = Vec::new();
    for n in [100u64, 400] {
        let race = PoissonRace::new(die.clone(), proportional(die, n).counts().to_vec())?;
        let mut max_abs: f64 = 0.0;
        for (h, i) in [(0usize, 1usize), (0, 2), (1, 2)] {
            for j in 0..3 {
                max_abs = max_abs.max(second_difference(&race, h, i, j, spec)?.abs());
            }
        }
        scaled.push(max_abs * n as f64);
    }
    let ratio = scaled[1] / scaled[0];
    report(
        verdicts,
        "flatness",
        ratio <= 1.5 && scaled[0] / scaled[1] <= 1.5,
        format!(
            "n * max second difference = {:.5} at n=100, {:.5} at n=400; ratio {ratio:.3} vs 1.5",
            scaled[0], scaled[1]
        ),
    );
    Ok(())
}

fn check_overplay(die: &DieSpec, spec: &QuadratureSpec, verdicts: &mut Vec<Verdict>) -> Result<()> {
    if die.k() != 3 {
        return Err(Error::Domain("overplay check is defined for k = 3".into()));
    }
    let n = 100u64;
    let base = proportional(die, n);
    for (w, eta) in [(2.0, vec![69u64, 16, 15]), (3.0, vec![86, 7, 7])] {
        let eta = TokenAllocation::new(eta)?;
        let gap = overplay(&eta, die)? - overplay(&base, die)?;
        let needed = w * (3.0 * n as f64).sqrt() / die.min_p();
        if gap < needed {
            return Err(Error::Domain(format!(
                "constructed overplay gap {gap:.1} is below {needed:.1}; use a die closer to uniform"
            )));
        }
        let beat = beats_discrete(&eta, &base, die, spec)?;
        let bound = 1.0 / (w * w);
        report(
            verdicts,
            "overplay",
            beat < bound,
            format!("w={w}: beat probability {beat:.2e} vs 1/w^2 = {bound:.3}"),
        );
    }
    Ok(())
}

fn check_change_bound(
    die: &DieSpec,
    spec: &QuadratureSpec,
    verdicts: &mut Vec<Verdict>,
) -> Result<()> {
    let race = PoissonRace::new(die.clone(), proportional(die, 100).counts().to_vec())?;
    let before = last_bin_discrete(&race, spec)?;
    let mut worst: f64 = 0.0;
    for i in 0..die.k() {
        let bound = change_probability_bound(&race, i)?;
        let mut bumped = race.counts().to_vec();
        bumped[i] += 1;
        let after = last_bin_discrete(&PoissonRace::new(die.clone(), bumped)?, spec)?;
        let change = before
            .probs()
            .iter()
            .zip(after.probs())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0f64, f64::max);
        worst = worst.max(change / bound);
    }
    report(
        verdicts,
        "change-bound",
        worst <= 1.0,
        format!("max |change| / bound = {worst:.3} vs 1.0"),
    );
    Ok(())
}

fn check_undercut(die: &DieSpec, spec: &QuadratureSpec, verdicts: &mut Vec<Verdict>) -> Result<()> {
    if die.k() != 3 {
        return Err(Error::Domain("undercut check is defined for k = 3".into()));
    }
    let pairs = [
        (vec![0.3, -0.1, -0.2], vec![-0.2, 0.25, -0.05]),
        (vec![0.25, -0.05, -0.2], vec![-0.15, 0.2, -0.05]),
    ];
    for (xv, yv) in pairs {
        let x = Deviation::new(xv)?;
        let y = Deviation::new(yv)?;
        let deficit = |delta: f64| -> Result<f64> {
            let mixed = undercut(&x, delta)?;
            Ok((payoff_mixed(&mixed, &y, die, spec)? - payoff_continuous(&x, &y, die, spec)?).abs())
        };
        let fitted = deficit(0.05)? / (0.05 * 0.05);
        let mut passed = true;
        let mut ratios = Vec::new();
        for delta in [0.025, 0.0125] {
            let c = deficit(delta)? / (delta * delta);
            ratios.push(format!("{c:.4} at delta={delta}"));
            passed &= c <= 2.0 * fitted;
        }
        report(
            verdicts,
            "undercut",
            passed,
            format!("|error|/delta^2 fitted {fitted:.4}, then {} (limit 2x fit)", ratios.join(", ")),
        );
    }
    Ok(())
}

fn check_spacing(
    args: &DiagnosticsArgs,
    verdicts: &mut Vec<Verdict>,
) -> Result<()> {
    let Some(path) = &args.strategy else {
        return Err(Error::Parse("spacing check needs --strategy <file>".into()));
    };
    let alpha = MixedStrategy::from_text(&std::fs::read_to_string(path)?)?;
    let h = args.spacing;
    for i in 0..alpha.k() {
        let mut ratios = Vec::new();
        for delta in [2.0 * h, 4.0 * h, 8.0 * h] {
            ratios.push(marginal_spacing(&alpha, i, delta)? / delta);
        }
        let spread = ratios.iter().cloned().fold(f64::MIN, f64::max)
            / ratios.iter().cloned().fold(f64::MAX, f64::min).max(1e-300);
        report(
            verdicts,
            "spacing",
            spread <= 3.0,
            format!(
                "coordinate {i}: spacing(delta)/delta = {:.3}, {:.3}, {:.3}; spread {spread:.2} vs 3",
                ratios[0], ratios[1], ratios[2]
            ),
        );
    }
    Ok(())
}

pub fn run(args: &DiagnosticsArgs, out_dir: &Path) -> Result<u8> {
    let started = Instant::now();
    let die = match &args.p {
        Some(p) => parse::die(p)?,
        None => DieSpec::uniform(3),
    };
    let spec = QuadratureSpec::new(args.tolerance, 2000, 10.0)?;
    let mut verdicts = Vec::new();

    if matches!(args.check, CheckArg::All | CheckArg::Flatness) {
        check_flatness(&die, &spec, &mut verdicts)?;
    }
    if matches!(args.check, CheckArg::All | CheckArg::Overplay) {
        check_overplay(&die, &spec, &mut verdicts)?;
    }
    if matches!(args.check, CheckArg::All | CheckArg::ChangeBound) {
        check_change_bound(&die, &spec, &mut verdicts)?;
    }
    if matches!(args.check, CheckArg::All | CheckArg::Undercut) {
        check_undercut(&die, &spec, &mut verdicts)?;
    }
    if args.check == CheckArg::Spacing || (args.check == CheckArg::All && args.strategy.is_some()) {
        check_spacing(args, &mut verdicts)?;
    }

    let all_passed = verdicts.iter().all(|v| v.passed);
    manifest::write(
        out_dir,
        "diagnostics",
        json!({
            "p": args.p,
            "strategy": args.strategy.as_ref().map(|p| p.display().to_string()),
            "spacing": args.spacing,
            "tolerance": args.tolerance,
            "verdicts": verdicts
                .iter()
                .map(|v| json!({ "name": v.name, "passed": v.passed, "detail": v.detail }))
                .collect::<Vec<_>>(),
        }),
        None,
        started,
        vec![],
    )?;
    Ok(if all_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
