//! Exact computations in twisted Ringel–Hall algebras of acyclic quivers over
//! small prime fields.

pub mod cli;
pub mod ffrep;
pub mod hall;
pub mod identities;
pub mod laurent;
pub mod quiver;
pub mod uminus;
