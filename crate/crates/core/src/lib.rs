//! Exact-arithmetic engine for the Painlevé analysis of the generalized
//! Hénon–Heiles system: dominant balances and resonances, Laurent/Puiseux
//! series solutions built by coefficient recursion, independent residual
//! oracles, closed-form comparisons, and rigorous convergence certificates.

pub mod cbig;
pub mod error;
pub mod field;
pub mod gauss;
pub mod painleve;
pub mod recursion;
pub mod parampoly;
pub mod rat;
pub mod series;
pub mod verify;

pub use error::Error;
