//! First-order stabilization-free virtual elements on polygonal meshes.
//!
//! The discrete diffusion operator is built from the L2 projection of
//! gradients onto gradients of harmonic polynomials of degree `ell + 1`.
//! Choosing `2 * ell + 2 >= N_E - 1` on every cell with `N_E` vertices makes
//! the local form coercive with no stabilization term. A standard
//! dofi-dofi stabilized VEM is provided alongside for comparison.
//!
//! Module map:
//!
//! - [`mesh`]: polygonal meshes, generators, the polygon catalog, text I/O.
//! - [`poly`]: bivariate polynomials, harmonic bases, benchmark coefficients.
//! - [`quadrature`]: Gauss-Legendre and polygon rules.
//! - [`projectors`]: the energy projector onto P1, the harmonic-gradient
//!   projector and the projection onto constants, from vertex values only.
//! - [`element`]: local matrices for both methods and the degree rule.
//! - [`system`]: global sparse assembly, Dirichlet elimination, direct solve.
//! - [`analysis`]: singular-value audit, error norms, rate fitting.

pub mod analysis;
pub mod element;
pub mod geometry;
pub mod linalg;
pub mod mesh;
pub mod poly;
pub mod projectors;
pub mod quadrature;
pub mod rng;
pub mod system;

pub use element::{ell_rule, Diffusion, Method, ProblemSpec};
pub use geometry::Point;
pub use mesh::PolyMesh;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("topology error: {0}")]
    Topology(String),
    #[error("index error: {0}")]
    Index(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("numerical error: {0}")]
    Numerical(String),
    #[error("singular system: {0}")]
    Singular(String),
    #[error("element {element}: {source}")]
    Element {
        element: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("missing exact solution")]
    MissingExactSolution,
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
