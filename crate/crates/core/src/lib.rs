//! Certified bounds on steady-state observables of Lindblad master equations.
//!
//! Steady-state moments `⟨P⟩` of Pauli strings satisfy the linear equations
//! `⟨L†(P)⟩ = 0` and the positivity of moment matrices and reduced density
//! matrices. Minimizing and maximizing an observable over these conditions
//! gives an interval guaranteed to contain its value in every steady state.
//!
//! The pipeline is [`lindblad::LindbladModel`] → [`relax::assemble`] →
//! [`solver::certify_interval`]; [`oracle`] supplies exact dense answers for
//! small systems.

pub mod cli;
pub mod constraints;
pub mod dense;
pub mod lindblad;
pub mod models;
pub mod oracle;
pub mod pauli;
pub mod relax;
pub mod solver;
