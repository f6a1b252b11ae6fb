//! `simulate`: Monte Carlo head-to-head match counts under a shared die.

use std::path::Path;
use std::time::Instant;

use knockdown::{simulate_match, Error, PureStrategy, Result, Scale, SimConfig};
use serde_json::json;

use crate::manifest;
use crate::parse::{self, ScaleArg};
use crate::EXIT_OK;

#[derive(clap::Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum)]
    scale: ScaleArg,

    /// Die probabilities, e.g. 1/2,1/2
    #[arg(long)]
    p: String,

    /// First pure strategy (inline values)
    #[arg(long)]
    a: String,

    /// Second pure strategy (inline values)
    #[arg(long)]
    b: String,

    #[arg(long, default_value_t = 1_000_000)]
    trials: u64,

    #[arg(long, default_value_t = 0)]
    seed: u64,
}

pub fn run(args: &SimulateArgs, out_dir: &Path) -> Result<u8> {
    let started = Instant::now();
    let die = parse::die(&args.p)?;
    let alpha = parse::strategy(&args.a, args.scale, None)?;
    let beta = parse::strategy(&args.b, args.scale, None)?;
    let [a, b] = [&alpha, &beta].map(|m| {
        if m.entries().len() == 1 {
            Ok(m.entries()[0].0.clone())
        } else {
            Err(Error::InvalidStrategy("simulate takes pure strategies only".into()))
        }
    });
    let (a, b) = (a?, b?);
    let scale = match (&a, args.scale) {
        (PureStrategy::Tokens(t), ScaleArg::Discrete) => {
            Scale::Discrete { n: t.counts().iter().sum() }
        }
        _ => Scale::Continuous,
    };
    let config = SimConfig::new(args.trials, args.seed, scale)?;
    let counts = simulate_match(&a, &b, &die, &config)?;

    let t = args.trials as f64;
    println!("wins_a = {} ({:.5})", counts.wins_a, counts.wins_a as f64 / t);
    println!("wins_b = {} ({:.5})", counts.wins_b, counts.wins_b as f64 / t);
    println!("ties   = {} ({:.5})", counts.ties, counts.ties as f64 / t);
    if counts.overflows > 0 {
        println!("overflows = {} (counted as ties)", counts.overflows);
    }
    let empirical = (counts.wins_a as f64 + 0.5 * counts.ties as f64) / t - 0.5;
    println!("empirical payoff = {empirical:.5}");

    manifest::write(
        out_dir,
        "simulate",
        json!({
            "scale": if args.scale == ScaleArg::Discrete { "discrete" } else { "continuous" },
            "p": args.p,
            "a": args.a,
            "b": args.b,
            "trials": args.trials,
            "wins_a": counts.wins_a,
            "wins_b": counts.wins_b,
            "ties": counts.ties,
            "overflows": counts.overflows,
        }),
        Some(args.seed),
        started,
        vec![],
    )?;
    Ok(EXIT_OK)
}
