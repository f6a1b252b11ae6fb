//! `remark42`: recompute the four reference numbers and check each against
//! its target and tolerance. Exits 3 if any check fails.

use std::path::Path;
use std::time::Instant;

use knockdown::{
    kappa, payoff_continuous, payoff_mixed, uniform_simplex_strategy, Deviation, DieSpec,
    MixedStrategy, PureStrategy, QuadratureSpec, Result, TokenAllocation,
    DEFAULT_SIMPLEX_RESOLUTION,
};
use serde_json::json;

use crate::manifest;
use crate::{EXIT_CHECK_FAILED, EXIT_OK};

#[derive(Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SkipArg {
    Discrete,
    Continuous,
}

#[derive(clap::Args)]
pub struct Remark42Args {
    /// Lattice resolution for the reference mixed strategy
    #[arg(long, default_value_t = DEFAULT_SIMPLEX_RESOLUTION)]
    resolution: u32,

    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,

    /// Skip the discrete or the continuous half of the checks
    #[arg(long, value_enum)]
    skip: Option<SkipArg>,
}

struct Check {
    label: &'static str,
    value: f64,
    target: f64,
    tolerance: f64,
}

impl Check {
    fn passed(&self) -> bool {
        (self.value - self.target).abs() <= self.tolerance
    }
}

pub fn run(args: &Remark42Args, out_dir: &Path) -> Result<u8> {
    let started = Instant::now();
    let spec = QuadratureSpec::new(args.tolerance, 2000, 10.0)?;
    let d = DieSpec::uniform(3);
    let origin = Deviation::new(vec![0.0, 0.0, 0.0])?;
    let mut checks = Vec::new();

    if args.skip != Some(SkipArg::Continuous) {
        let alpha = uniform_simplex_strategy(1.0 / 6.0, args.resolution, 3)?;
        checks.push(Check {
            label: "continuous mixed payoff vs (0,0,0)",
            value: payoff_mixed(&alpha, &origin, &d, &spec)?,
            target: -0.0101219,
            tolerance: 5e-4,
        });
        let eps = 0.025;
        let undercut = Deviation::new(vec![-eps, -eps, 2.0 * eps])?;
        checks.push(Check {
            label: "continuous naive payoff at eps=0.025",
            value: payoff_continuous(&origin, &undercut, &d, &spec)?,
            target: -1.0 / 6.0,
            tolerance: 0.02,
        });
    }

    if args.skip != Some(SkipArg::Discrete) {
        let mut support = Vec::new();
        for a in 58..=64u64 {
            for b in 58..=(180 - a - 58) {
                let c = 180 - a - b;
                if c >= 58 {
                    support.push(PureStrategy::Tokens(TokenAllocation::new(vec![a, b, c])?));
                }
            }
        }
        let conservative = MixedStrategy::uniform(support)?;
        checks.push(Check {
            label: "conservative kappa at n=180",
            value: kappa(&conservative, &d, &spec)?,
            target: -0.0165257,
            tolerance: 1e-3,
        });
        let naive = MixedStrategy::point_mass(PureStrategy::Tokens(TokenAllocation::new(vec![
            60, 60, 60,
        ])?));
        checks.push(Check {
            label: "point-mass kappa at n=180",
            value: kappa(&naive, &d, &spec)?,
            target: -0.0920653,
            tolerance: 1e-3,
        });
    }

    let mut all_passed = true;
    for c in &checks {
        let verdict = if c.passed() { "PASS" } else { "FAIL" };
        all_passed &= c.passed();
        println!(
            "{:<40} {:>12.7}  target {:>12.7} +/- {:.1e}  {verdict}",
            c.label, c.value, c.target, c.tolerance
        );
    }

    manifest::write(
        out_dir,
        "remark42",
        json!({
            "resolution": args.resolution,
            "tolerance": args.tolerance,
            "skip": args.skip.map(|s| if s == SkipArg::Discrete { "discrete" } else { "continuous" }),
            "checks": checks
                .iter()
                .map(|c| json!({
                    "label": c.label,
                    "value": c.value,
                    "target": c.target,
                    "tolerance": c.tolerance,
                    "passed": c.passed(),
                }))
                .collect::<Vec<_>>(),
        }),
        None,
        started,
        vec![],
    )?;
    Ok(if all_passed { EXIT_OK } else { EXIT_CHECK_FAILED })
}
