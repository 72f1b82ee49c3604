//! Calculus on `ℝ¹|¹_cs` and super parallel transport along the super loops
//! `slev` and `lev∘p`.

pub mod calculus;
pub mod pullback;
pub mod super_transport;

pub use calculus::{mu, op_d, op_dcs, op_q, Polynomial, SuperPoint, Superfunction, MAX_DEGREE};
pub use pullback::{
    levp_pair_dcs_oneform, slev_pair_dcs_oneform, slev_pullback_element, slev_pullback_function, theta_times,
    with_theta,
};
pub use super_transport::{
    body_nodes, combined_ode_residual, combined_residual, dcs_residual, glue_super, levp_residual, rechart_super,
    sp_levp, sp_slev, sp_slev_segment, Route, SuperPropagator, SuperTransport,
};
