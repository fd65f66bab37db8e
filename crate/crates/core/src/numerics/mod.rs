//! Numeric foundations: special functions, Gauss-Hermite rules, Newton
//! solvers, statistical distances, and the generated capacity-fit
//! constants that every closed-form evaluation depends on.

pub mod capacity_fit;
pub mod generated;
pub mod hermite;
pub mod solver;
pub mod special;
pub mod stats;

pub use capacity_fit::{fit_capacity_coefficients, CapacityFit, FIT_ERROR_BOUND};
pub use hermite::{gauss_hermite_rule, QuadratureRule, MAX_ORDER};
pub use solver::{newton_system, solve_2x2_nonlinear, NewtonSolution};
pub use special::{craig_q, erf, erfc, erfcx, normal_cdf, softplus};
pub use stats::{adaptive_simpson, ks_statistic};
