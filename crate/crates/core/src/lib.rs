//! Exact payoff engines, a Monte Carlo oracle, and an equilibrium solver for
//! the two-player Knock 'em Down game.
//!
//! A die with face probabilities p repeatedly knocks one token from each
//! player's copy of the rolled bin; whoever clears their tokens first wins.
//! The crate computes exact win probabilities and payoffs on two scales:
//! the n-token game via Poissonized Gamma races ([`discrete`]) and its
//! Gaussian limit on the sqrt(n) deviation scale ([`continuous`]). The
//! [`sim`] module provides an independent simulation oracle, and [`solver`]
//! searches bounded strategy grids for near-optimal mixed strategies with
//! certified exploitability.

pub mod continuous;
pub mod discrete;
pub mod error;
pub mod game;
pub mod numerics;
pub mod sim;
pub mod solver;

pub use error::{Error, Result};
pub use game::{
    overplay, round_deviation, undercut, uniform_simplex_strategy, Deviation, DieSpec,
    MixedStrategy, PureStrategy, Scale, TokenAllocation, DEFAULT_SIMPLEX_RESOLUTION,
};
pub use numerics::{integrate, normal_cdf, normal_pdf, poisson_pmf, poisson_tail, Quadrature, QuadratureSpec};

pub use continuous::{
    last_bin_continuous, last_bin_continuous_with_error, payoff_continuous,
    payoff_continuous_with_error, payoff_mixed, payoff_mixed_with_error, GaussianRace,
};
pub use discrete::{
    beats_discrete, change_probability_bound, last_bin_discrete, last_bin_discrete_with_error,
    payoff_discrete, payoff_discrete_with_error, payoff_mixed_discrete, second_difference,
    LastBinDistribution, PoissonRace,
};
pub use sim::{
    simulate_last_bin_continuous, simulate_last_bin_discrete, simulate_match, MatchCounts,
    SimConfig,
};
pub use solver::{
    best_response, build_grid_continuous, build_grid_discrete, build_matrix, fictitious_play,
    kappa, load_matrix, marginal_spacing, save_matrix, theorem_overplay_bound, PayoffMatrix,
    SolveResult, StrategyGrid,
};
