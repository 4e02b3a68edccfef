//! Numerical laboratory for prediction with expert advice under geometric
//! stopping.
//!
//! * [`closed_form`]: exact limit value functions for three and four experts,
//!   their derivatives, and the comb strategy.
//! * [`game_solver`]: value iteration for the discrete game with a small LP
//!   for the minimax step.
//! * [`game_sim`]: Monte Carlo simulation of the discrete game.
//! * [`rbm_sim`]: pushed-Euler simulation of the obliquely reflected Brownian
//!   motion and its discounted local-time functionals.
//! * [`verify`]: residual checks for every identity the closed forms satisfy.

pub mod closed_form;
pub mod error;
pub mod game_sim;
pub mod game_solver;
pub mod rbm_sim;
pub mod exec;
pub mod rng;
pub mod sampling;
pub mod verify;

pub use error::{Error, Result};
pub use exec::Exec;
