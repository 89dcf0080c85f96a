//! Viscous shock profiles and Evans-function spectral stability for planar
//! viscoelastic systems.
//!
//! The crate is organized around the pipeline that takes a pair of endstates
//! and a wave speed to a stability verdict:
//!
//! - [`model`]: elastic potentials, viscosity tensors, fluxes, characteristics
//! - [`equilibria`]: Rankine-Hugoniot endstate solvers and shock typing
//! - [`profile`]: traveling-wave profiles of the reduced gradient flow
//! - [`evans`]: the first-order Evans systems, Kato transport of analytic
//!   bases, and continuous-orthogonalization (polar coordinate) integration
//! - [`contour`]: semicircular contours, winding numbers, and verdicts
//! - [`pipeline`]: single-case orchestration shared by the CLI and benches

pub mod contour;
pub mod equilibria;
pub mod error;
pub mod evans;
pub mod export;
pub mod linalg;
pub mod model;
pub mod ode;
pub mod pipeline;
pub mod profile;

pub use contour::{AsymptoticFit, ContourReport, ContourSpec, Verdict};
pub use equilibria::{EquilibriumInfo, MorseClass, ShockCandidate, ShockClass};
pub use error::{CoreError, Result};
pub use evans::{AnalyticBasisState, EvansSystem, Side, SubspaceFrame};
pub use model::{CharacteristicData, ElasticPotential, ModelVariant, StateV, VariantTag, ViscosityKind};
pub use profile::{PhiPotential, ProfileGrid, ProfileOptions};

/// Complex scalar used throughout the Evans machinery.
pub type C64 = num_complex::Complex<f64>;
