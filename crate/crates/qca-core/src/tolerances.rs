//! Centralized numeric tolerances.
//!
//! Every validity check and property test reads from this table so the whole
//! workspace has a single tuning point.

/// Elementwise bound for exact algebraic identities: unitarity defects,
/// Hermiticity defects, and closed-form expressions compared term by term.
pub const ALGEBRAIC: f64 = 1e-12;

/// Bound for factorization reconstructions (`U·D·V` against the original
/// matrix) and for orthogonality defects of computed factors.
pub const RECONSTRUCTION: f64 = 1e-10;

/// Residual bound when a characteristic polynomial is evaluated at computed
/// eigenvalues, and for eigenvalue multiset comparisons.
pub const EIGEN_RESIDUAL: f64 = 1e-9;

/// Trace-preservation defect bound: `‖Σ Eᵢ†Eᵢ − 𝟙‖_max`.
pub const TRACE_PRESERVING: f64 = 1e-10;

/// Smallest acceptable eigenvalue of matrices that are positive semidefinite
/// by construction (Choi matrices, density matrices). Eigensolvers produce
/// tiny negatives for rank-deficient inputs.
pub const PSD_FLOOR: f64 = -1e-10;

/// Radicands of closed-form square roots are clamped to zero when negative by
/// no more than this; exactly degenerate parameter sets underflow slightly.
pub const RADICAND_CLAMP: f64 = 1e-12;

/// Absolute tolerance for singular-value degeneracy checks (`D11` vs `D22`).
pub const DEGENERACY: f64 = 1e-10;

/// Bloch vectors of physical states may exceed unit norm by at most this.
pub const UNIT_BALL: f64 = 1e-9;

/// Default tolerance for parameter-pattern matching (`|ξ|`, `|α−β|`, `|α−γ|`).
pub const PARAM_PATTERN: f64 = 1e-12;
