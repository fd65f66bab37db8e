//! Generated numeric constants. Do not edit by hand: regenerate with
//! `mi constants --write <path>` and commit the result.

/// aᵢ for the exponential-sum capacity fit (i = 1..8).
pub const CAPACITY_FIT_COEFFICIENTS: [f64; 8] = [
    9.999964233140919e-1,
    -4.998740374982228e-1,
    3.3179818001406824e-1,
    -2.4073041042775697e-1,
    1.676470071291576e-1,
    -9.532135865626637e-2,
    3.608374341906183e-2,
    -6.452398758120488e-3,
];

/// Maximum absolute error of the fit over the verification grid.
pub const CAPACITY_FIT_MAX_ABS_ERROR: f64 = 3.2103349978385154e-8;

/// Checksums of the default order-500 Gauss-Hermite rule.
pub const GH500_WEIGHT_SUM: f64 = 1.7724538509055152e0;
pub const GH500_NODE_ABS_SUM: f64 = 6.704822307920343e3;
pub const GH500_MAX_NODE: f64 = 3.105074638009002e1;
