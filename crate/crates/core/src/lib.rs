//! Spectral Galerkin simulation of the stochastic porous medium equation
//!
//! ```text
//! dX = (L Ψ(X) + Φ(X)) dt + Q dW   on (0, 1), X = 0 on the boundary
//! ```
//!
//! with its a-priori decay and contraction bounds and an ensemble harness
//! for invariant-measure diagnostics.

pub mod basis;
pub mod bounds;
pub mod ergodic;
pub mod model;
pub mod noise;
pub mod rng;
pub mod solver;

pub use basis::{OperatorSpec, SpectralField};
pub use model::{AssumptionConstants, NonlinearitySpec, Phi, Psi, Verdict};
pub use noise::{NoiseProfile, NoiseSpec, NoiseTrace};
pub use bounds::{BoundParams, RateFit};
pub use ergodic::{EnsembleConfig, ErgodicReport, Functional};
pub use rng::StreamKey;
pub use solver::{
    coupled_simulate, simulate, BlowUp, GalerkinState, GalerkinSystem, InitialCondition, Scheme,
    SimConfig, SimError, TrajectoryRecord,
};
