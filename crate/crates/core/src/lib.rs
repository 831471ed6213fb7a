//! Lie point-symmetry classification and equivalence transformation for the
//! Marguerre shallow-shell equations, with finite-difference Newton solvers
//! for the shell system and its nonhomogeneous von Kármán form.

pub mod expr;
pub mod geometry;
pub mod symmetry;
pub mod solver;
pub mod equivalence;
pub mod verify;
pub mod cli;
