//! Replicator dynamics for binary-opinion coordination games.
//!
//! The crate builds payoff matrices for the agreement (`BSO`) and
//! disagreement (`BDO`) games, optionally extended with an equivocator
//! opinion and a preference bonus, then analyses the replicator equation
//! `dx_i/dt = x_i (f_i - phi)` they induce:
//!
//! * [`model`]: payoff matrices and declarative [`ModelSpec`]s
//! * [`dynamics`]: fitness, the vector field, RK4 integration on the simplex
//! * [`equilibria`]: fixed-point enumeration, Jacobians, stability
//! * [`tables`]: per-model fixed-point tables with existence conditions
//! * [`sweep`]: parameter sweeps and fixed-point loci
//! * [`phase`]: basins of attraction, sampled phase fields, ternary coordinates
//! * [`stochastic`]: a finite-population imitation process for cross-checks
//! * [`export`] and [`svg`]: CSV/JSON/SVG writers
//!
//! ```
//! use replicator_core::{build, enumerate_fixed_points, ModelSpec};
//!
//! let game = build(&ModelSpec::bso()).unwrap();
//! let points = enumerate_fixed_points(&game, 1e-9).unwrap();
//! assert_eq!(points.len(), 3);
//! ```

pub mod dynamics;
pub mod equilibria;
pub mod error;
pub mod export;
mod linalg;
pub mod model;
pub mod phase;
pub mod stochastic;
pub mod svg;
pub mod sweep;
pub mod tables;

pub use dynamics::{
    average_fitness, converge, fitness, integrate, replicator_field, SimplexState, Trajectory,
};
pub use equilibria::{
    classify, eigen_spectrum, enumerate_fixed_points, jacobian, Complex64, FixedPoint, Stability,
};
pub use error::{Error, Result};
pub use model::{build, similarity, BaseGame, ModelSpec, OpinionLabel, PayoffMatrix, Preference};
pub use phase::{basins, phase_field, to_ternary, BasinMap};
pub use stochastic::{ImitationProcess, Population};
pub use sweep::{sweep, SweepResult};
pub use tables::{table_report, ExistenceCondition, TableRow};

// The guide's code listings are compiled and run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/models.md")]
    mod models {}
    #[doc = include_str!("../../../book/src/dynamics.md")]
    mod dynamics {}
    #[doc = include_str!("../../../book/src/fixed-points.md")]
    mod fixed_points {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/tables.md")]
    mod tables {}
    #[doc = include_str!("../../../book/src/phase-portraits.md")]
    mod phase_portraits {}
    #[doc = include_str!("../../../book/src/stochastic.md")]
    mod stochastic {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
    #[doc = include_str!("../../../README.md")]
    mod readme {}
}
