//! Small dense linear algebra: complex QR and SVD, Grassmannian frames, and
//! exact elimination over fields.

pub mod exact;
pub mod matrix;
pub mod qr;
pub mod subspace;
pub mod svd;

pub use exact::{solve_exact, ExactField, ExactMatrix, ExactSolution, GaussianRational, Gf};
pub use matrix::ComplexMatrix;
pub use qr::{qr, qr_unchecked};
pub use subspace::{principal_angle, SubspaceFrame};
pub use svd::{svd, ProductSvd, Svd};
