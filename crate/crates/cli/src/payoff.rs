//! `payoff`: exact payoff between two strategies with its quadrature error.

use std::path::Path;
use std::time::Instant;

use knockdown::{
    payoff_continuous_with_error, payoff_discrete_with_error, PureStrategy, QuadratureSpec, Result,
};
use serde_json::json;

use crate::manifest;
use crate::parse::{self, ScaleArg};
use crate::EXIT_OK;

#[derive(clap::Args)]
pub struct PayoffArgs {
    /// Token counts (discrete) or deviation coordinates (continuous)
    #[arg(long, value_enum)]
    scale: ScaleArg,

    /// Die probabilities, e.g. 1/3,1/3,1/3
    #[arg(long)]
    p: String,

    /// Token budget; only checked against the strategies (discrete scale)
    #[arg(long)]
    n: Option<u64>,

    /// First strategy: inline values or @file
    #[arg(long)]
    a: String,

    /// Second strategy: inline values or @file
    #[arg(long)]
    b: String,

    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,
}

pub fn run(args: &PayoffArgs, out_dir: &Path) -> Result<u8> {
    let started = Instant::now();
    let die = parse::die(&args.p)?;
    let alpha = parse::strategy(&args.a, args.scale, args.n)?;
    let beta = parse::strategy(&args.b, args.scale, args.n)?;
    let spec = QuadratureSpec::new(args.tolerance, 2000, 10.0)?;

    let mut value = 0.0;
    let mut error = 0.0;
    for (x, wx) in alpha.entries() {
        for (y, wy) in beta.entries() {
            let (v, e) = match (x, y) {
                (PureStrategy::Tokens(a), PureStrategy::Tokens(b)) => {
                    payoff_discrete_with_error(a, b, &die, &spec)?
                }
                (PureStrategy::Deviation(a), PureStrategy::Deviation(b)) => {
                    payoff_continuous_with_error(a, b, &die, &spec)?
                }
                _ => unreachable!("strategy loading enforces one scale"),
            };
            value += wx * wy * v;
            error += wx * wy * e;
        }
    }

    println!("payoff = {value:.7} (quadrature error <= {error:.1e})");
    manifest::write(
        out_dir,
        "payoff",
        json!({
            "scale": if args.scale == ScaleArg::Discrete { "discrete" } else { "continuous" },
            "p": args.p,
            "n": args.n,
            "a": args.a,
            "b": args.b,
            "tolerance": args.tolerance,
        }),
        None,
        started,
        vec![],
    )?;
    Ok(EXIT_OK)
}
