//! Numerical laboratory for a two-species free boundary problem in which one
//! species disperses nonlocally (convolution kernel) and the other locally
//! (Laplacian), both confined to a habitat `[g(t), h(t)]` whose ends move with
//! a Stefan-type gradient term plus a nonlocal outward flux.
//!
//! - [`kernel`]: dispersal kernels, tail masses, grid convolutions.
//! - [`model`]: reactions, parameter regimes, a-priori bounds, coexistence states.
//! - [`eigen`]: principal eigenvalue of the nonlocal operator and the critical length.
//! - [`solver`]: front-fixing IMEX integrator and the fixed-domain nonlocal logistic run.
//! - [`classify`]: spreading/vanishing verdicts, threshold scans, super-solutions, sweeps.

pub mod classify;
pub mod eigen;
pub mod error;
pub mod kernel;
pub mod linalg;
pub mod model;
pub mod solver;

pub use classify::{classify, Certificate, Classification, ClassifyOptions, Verdict};
pub use eigen::{critical_length, lambda_p, CriticalLength, EigenProblem, EigenResult};
pub use error::{Error, Result};
pub use kernel::{Kernel, KernelFamily};
pub use model::{InitialData, InteractionKind, ModelParams, SolutionBounds};
pub use solver::{run, RunControl, State, TimeStep, Trajectory};
