//! `solve`: build a lattice grid and payoff matrix, run fictitious play, and
//! write the solved strategy as text, CSV, and (k=3) a ternary heatmap.

use std::path::{Path, PathBuf};
use std::time::Instant;

use knockdown::solver::{build_grid_continuous, build_grid_discrete, build_matrix, load_matrix, save_matrix};
use knockdown::{
    fictitious_play, DieSpec, PayoffMatrix, PureStrategy, QuadratureSpec, Result, Scale,
    StrategyGrid,
};
use serde_json::json;

use crate::manifest;
use crate::parse::{self, ScaleArg};
use crate::svg;
use crate::{EXIT_BUDGET, EXIT_OK};

#[derive(clap::Args)]
pub struct SolveArgs {
    #[arg(long, value_enum)]
    scale: ScaleArg,

    /// Die probabilities, e.g. 1/3,1/3,1/3
    #[arg(long)]
    p: String,

    /// Token budget (discrete scale)
    #[arg(long)]
    n: Option<u64>,

    /// Lattice spacing h (continuous scale)
    #[arg(long, default_value_t = 0.05)]
    spacing: f64,

    /// Per-coordinate lower bound B of the grid box (continuous scale)
    #[arg(long, default_value_t = 0.6)]
    bound: f64,

    /// Overplay cap for the discrete grid (default: the no-optimal-strategy
    /// theorem bound)
    #[arg(long)]
    max_overplay: Option<f64>,

    /// Target exploitability
    #[arg(long, default_value_t = 0.005)]
    epsilon: f64,

    #[arg(long, default_value_t = 100_000)]
    max_iterations: u64,

    /// Quadrature tolerance
    #[arg(long, default_value_t = 1e-10)]
    tolerance: f64,

    /// Payoff matrix cache file: loaded when its key matches, rebuilt and
    /// saved otherwise
    #[arg(long)]
    cache: Option<PathBuf>,
}

fn obtain_matrix(
    args: &SolveArgs,
    grid: &StrategyGrid,
    die: &DieSpec,
    spec: &QuadratureSpec,
) -> Result<PayoffMatrix> {
    let Some(path) = &args.cache else {
        return build_matrix(grid, die, spec);
    };
    if path.exists() {
        match load_matrix(grid, die, spec, path) {
            Ok(matrix) => {
                println!("loaded payoff matrix from {}", path.display());
                return Ok(matrix);
            }
            Err(e) => println!("cache at {} not usable ({e}); rebuilding", path.display()),
        }
    }
    let matrix = build_matrix(grid, die, spec)?;
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    save_matrix(&matrix, die, spec, path)?;
    println!("saved payoff matrix to {}", path.display());
    Ok(matrix)
}

/// Deviation-scale coordinates of a support point; token allocations are
/// mapped through (xi - p n) / sqrt(n) so both scales plot alike.
fn plot_coords(point: &PureStrategy, die: &DieSpec) -> Vec<f64> {
    match point {
        PureStrategy::Deviation(x) => x.coords().to_vec(),
        PureStrategy::Tokens(a) => {
            let n: u64 = a.counts().iter().sum();
            let sqrt_n = (n as f64).sqrt();
            a.counts()
                .iter()
                .zip(die.probs())
                .map(|(&xi, &p)| (xi as f64 - p * n as f64) / sqrt_n)
                .collect()
        }
    }
}

pub fn run(args: &SolveArgs, out_dir: &Path) -> Result<u8> {
    let started = Instant::now();
    let die = parse::die(&args.p)?;
    let spec = QuadratureSpec::new(args.tolerance, 2000, 10.0)?;
    let grid = match args.scale {
        ScaleArg::Discrete => {
            let n = args.n.ok_or_else(|| {
                knockdown::Error::Parse("--n is required on the discrete scale".into())
            })?;
            build_grid_discrete(&die, n, args.max_overplay)?
        }
        ScaleArg::Continuous => build_grid_continuous(&die, args.spacing, args.bound)?,
    };
    println!("grid: {} strategies", grid.len());

    let matrix = obtain_matrix(args, &grid, &die, &spec)?;
    let result = fictitious_play(&matrix, args.epsilon, args.max_iterations)?;
    println!(
        "exploitability = {:.6} after {} iterations ({})",
        result.exploitability,
        result.iterations,
        if result.converged { "converged" } else { "budget exhausted" }
    );
    println!("value estimate = {:.6}", result.value_estimate);
    println!("support size = {}", result.strategy.entries().len());

    std::fs::create_dir_all(out_dir)?;
    let mut outputs = Vec::new();

    let text_path = out_dir.join("strategy.txt");
    std::fs::write(&text_path, result.strategy.to_text())?;
    outputs.push("strategy.txt".to_string());

    let k = die.k();
    let mut csv = String::new();
    for i in 1..=k {
        csv.push_str(&format!("x{i},"));
    }
    csv.push_str("weight\n");
    for (point, weight) in result.strategy.entries() {
        match point {
            PureStrategy::Tokens(a) => {
                for c in a.counts() {
                    csv.push_str(&format!("{c},"));
                }
            }
            PureStrategy::Deviation(x) => {
                for c in x.coords() {
                    csv.push_str(&format!("{c},"));
                }
            }
        }
        csv.push_str(&format!("{weight}\n"));
    }
    let csv_path = out_dir.join("strategy.csv");
    std::fs::write(&csv_path, csv)?;
    outputs.push("strategy.csv".to_string());

    if k == 3 {
        let entries: Vec<(Vec<f64>, f64)> = result
            .strategy
            .entries()
            .iter()
            .map(|(point, w)| (plot_coords(point, &die), *w))
            .collect();
        let (bound, step) = match grid.scale() {
            Scale::Continuous => (grid.bound(), grid.spacing()),
            Scale::Discrete { n } => {
                let sqrt_n = (n as f64).sqrt();
                let widest = entries
                    .iter()
                    .flat_map(|(c, _)| c.iter().map(|v| -v))
                    .fold(0.0f64, f64::max);
                (widest + 1.0 / sqrt_n, 1.0 / sqrt_n)
            }
        };
        let svg_path = out_dir.join("heatmap.svg");
        std::fs::write(&svg_path, svg::ternary_heatmap(&entries, bound, step))?;
        outputs.push("heatmap.svg".to_string());
    }

    for name in &outputs {
        println!("wrote {}", out_dir.join(name).display());
    }
    manifest::write(
        out_dir,
        "solve",
        json!({
            "scale": if args.scale == ScaleArg::Discrete { "discrete" } else { "continuous" },
            "p": args.p,
            "n": args.n,
            "spacing": args.spacing,
            "bound": args.bound,
            "max_overplay": args.max_overplay,
            "epsilon": args.epsilon,
            "max_iterations": args.max_iterations,
            "tolerance": args.tolerance,
            "cache": args.cache.as_ref().map(|p| p.display().to_string()),
            "grid_size": grid.len(),
            "exploitability": result.exploitability,
            "value_estimate": result.value_estimate,
            "iterations": result.iterations,
            "converged": result.converged,
        }),
        None,
        started,
        outputs,
    )?;
    Ok(if result.converged { EXIT_OK } else { EXIT_BUDGET })
}
