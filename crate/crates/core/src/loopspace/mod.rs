//! Forms on the discretized free loop space and the Bismut–Chern character.

pub mod bch;
pub mod equivariant;
pub mod forms;

pub use bch::{
    bch_loop_deloop, bch_loop_deloop_ordered, bch_ode, ch_constant_loops, loop_deloop_trace, BChResult, BChRoute, Order,
};
pub use equivariant::{
    contract_velocity, equivariant_residual, equivariant_residual_of, exterior_derivative_fd, BchForm, LoopForm,
    LOOP_FD_STEP,
};
pub use forms::{hat_eval, hat_eval_with, tilde_eval};
