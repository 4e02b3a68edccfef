//! Closed-form value functions and strategy maps.

mod functions;
mod state;
mod strategy;
mod u4;

pub use functions::{
    boundary_initial_conditions, f_fn, h_fn, r1_fn, r2_fn, u3, v1_fn, v2_fn, v2d, v2d_raw, v3,
    v3_raw, v_tilde, w2_gap, w3_gaps, SINGULAR_EPS, U3_ORIGIN, U4_ORIGIN,
};
pub use state::{phi, rank, ExpertSubset, GapVector, RankedState, RegretState, MAX_EXPERTS};
pub use strategy::{comb_pair, comb_set, comb_set_array, hamiltonian_argmax};
pub use u4::{
    origin_hessian, taylor_u4_origin, u4, u4_array, u4_derivatives, u4_grad, u4_hess, Mat4,
};
pub(crate) use state::rank_perm;
