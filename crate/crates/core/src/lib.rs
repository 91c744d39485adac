//! Seasonally forced model of the sugarcane borer and two parasitoids: one
//! attacking the borer's eggs, one attacking its larvae.
//!
//! - [`model`]: parameters, state and right-hand side
//! - [`equilibria`]: closed-form fixed points and the dimensionless indices
//! - [`stability`]: Jacobian, Routh-Hurwitz verdicts, Hopf point in `alpha`
//! - [`integrate`]: RK4 and Dormand-Prince integration
//! - [`analysis`]: extrema, Lyapunov exponents, attractor classification, sweeps

pub mod analysis;
pub mod equilibria;
pub mod error;
pub mod integrate;
pub mod linalg;
pub mod model;
pub mod stability;

pub use analysis::{
    classify_attractor, largest_lyapunov, sweep, AttractorSpec, AttractorSummary, Classification,
    ExtremaSet, LyapunovSpec, SweepParam, SweepResult, SweepSpec,
};
pub use equilibria::{EquilibriumLabel, EquilibriumReport, Stability};
pub use error::{Error, Result};
pub use integrate::{integrate, integrate_discard_transient, IntegrationSettings, Method, Trajectory};
pub use model::{ModelParameters, StateVector};
