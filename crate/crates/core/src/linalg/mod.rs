//! Small dense and sparse linear algebra kernels.

mod band;
mod sparse;
mod svd;

pub use band::BandLu;
pub use sparse::{reverse_cuthill_mckee, CsrMatrix};
pub use svd::jacobi_singular_values;
