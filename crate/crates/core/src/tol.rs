//! Numerical tolerances shared by every module.

/// Primal feasibility of points against `Gᵀx ≤ g`, `Hᵀx = h`.
pub const FEAS: f64 = 1e-9;
/// Relative pivot threshold for rank decisions.
pub const RANK_REL: f64 = 1e-10;
/// Infinity-norm distance under which two points are the same vertex.
pub const DEDUP: f64 = 1e-7;
/// Sign decisions on Rayleigh quotients `dᵀQd`.
pub const CURVATURE: f64 = 1e-9;
/// Relative tolerance for `ℓ*_R = ℓ*`.
pub const EXACTNESS_REL: f64 = 1e-7;
/// Simplex pivot threshold.
pub const PIVOT: f64 = 1e-10;
/// Certificate checks on LP outcomes.
pub const CERT: f64 = 1e-8;
