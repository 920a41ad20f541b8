//! Default tolerances shared by verifiers and tests.

/// Exact algebraic identities.
pub const EXACT: f64 = 1e-12;
/// Monte-Carlo comass bound slack.
pub const COMASS: f64 = 1e-9;
/// Stenzel Lagrangian and special defects on totally geodesic inputs.
pub const STENZEL: f64 = 1e-8;
/// Finite-difference versus analytic oracles.
pub const FD_ORACLE: f64 = 1e-6;
/// Decomposition of η onto its two closed-form 2-forms.
pub const ETA_DECOMPOSITION: f64 = 1e-9;
/// Automatic vanishing of φ(E₁,E₂,F_j).
pub const AUTOMATIC: f64 = 1e-10;
/// Frame orthonormality.
pub const FRAME: f64 = 1e-10;
/// Symmetry of second fundamental form coefficients.
pub const SYMMETRY: f64 = 1e-8;
/// Holomorphic volume route agreement.
pub const VOLUME_ROUTES: f64 = 1e-9;
