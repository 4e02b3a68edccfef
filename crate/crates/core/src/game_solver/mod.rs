//! Exact solution of the discrete game with geometric stopping.

mod dpp;
mod grid;
mod lp;
mod solve;

pub use dpp::{
    dpp_inner, dpp_inner_dual, dpp_saddle, nature_payoff, player_payoff, MixedNature, MixedPlayer,
    StoppingParam, SubsetCosts,
};
pub use grid::{BoundaryRule, ValueGrid, GRID_FORMAT_VERSION};
pub use solve::{
    dpp_residual, rescaled_value, solve, solve_underline_u, solve_vdelta, Dynamics, Solution,
    SolveOptions,
};
