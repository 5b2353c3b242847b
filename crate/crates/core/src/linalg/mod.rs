//! Dense linear algebra generic over [`Real`](crate::scalar::Real), exact
//! rational kernels, polynomial roots and the semidefinite feasibility engine.

mod dense;
mod eigen;
mod exact;
mod factor;
mod roots;
pub mod sdp;

pub use dense::Mat;
pub use eigen::{eigh, eigvalsh, is_psd, min_eigenvalue, numerical_rank, SymEigen};
pub use exact::{is_psd_exact, ldl_psd, solve_consistent, Ldl};
pub use factor::{cholesky, cholesky_solve, lower_inverse, lstsq, min_norm_lstsq, solve_lower, solve_lower_t, spd_inverse, Qr};
pub use roots::poly_roots;
pub use sdp::{solve_feasibility, FarkasWitness, SdpDiagnostics, SdpOptions, SdpOutcome, SdpProblem};

/// Symmetric binary64 matrix.
pub type SymMatrix = Mat<f64>;
