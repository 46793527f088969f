//! Global assembly over a mesh, Dirichlet elimination and the direct solve.
//!
//! Local matrices are built in parallel and scattered serially in cell
//! order, so the assembled system does not depend on the thread count.

use std::io::Write;

use rayon::prelude::*;

use crate::element::{local_matrices, AssemblyOptions, LocalElementMatrices, Method, ProblemSpec};
use crate::linalg::{reverse_cuthill_mckee, BandLu, CsrMatrix};
use crate::mesh::PolyMesh;
use crate::{Error, Result};

/// Pivots at or below this fraction of the largest entry count as zero.
pub const PIVOT_REL_TOL: f64 = 1e-13;
/// Relative residual above which a solve is logged as inaccurate.
pub const RESIDUAL_WARN: f64 = 1e-10;

/// Boundary data.
#[derive(Debug, Clone, PartialEq)]
pub enum Dirichlet {
    Homogeneous,
    /// Values at every mesh vertex; only boundary entries are read.
    Values(Vec<f64>),
}

/// Reduced system on the interior vertices.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// `free_index[v]` is the reduced index of vertex `v`, `None` on the boundary.
    pub free_index: Vec<Option<usize>>,
    /// Reduced index to vertex.
    pub free_vertices: Vec<usize>,
    /// Full vertex vector carrying the boundary values.
    pub boundary_values: Vec<f64>,
    pub method: Method,
    /// Harmonic degree used on each cell (`None` for the stabilized method).
    pub ells: Vec<Option<usize>>,
    /// Cells whose data integrals used a quadrature degree below the data degree.
    pub underresolved_cells: usize,
}

impl GlobalSystem {
    pub fn num_free(&self) -> usize {
        self.free_vertices.len()
    }
}

/// Nodal values of the discrete solution.
#[derive(Debug, Clone)]
pub struct DiscreteSolution {
    /// One value per mesh vertex.
    pub values: Vec<f64>,
    pub method: Method,
    pub ells: Vec<Option<usize>>,
    /// `|A x - b| / |b|` of the reduced system (0 for an empty or zero system).
    pub residual: f64,
    /// Smallest pivot magnitude of the factorization.
    pub min_pivot: Option<f64>,
}

/// Homogeneous Dirichlet assembly with the degree rule shifted by `ell_offset`.
pub fn assemble(mesh: &PolyMesh, spec: &ProblemSpec, method: Method, ell_offset: i32) -> Result<GlobalSystem> {
    let opts = AssemblyOptions {
        ell_offset,
        ..AssemblyOptions::default()
    };
    assemble_with(mesh, spec, method, &opts, &Dirichlet::Homogeneous)
}

/// Builds every local matrix of the mesh; errors carry the cell index.
pub fn local_blocks(
    mesh: &PolyMesh,
    spec: &ProblemSpec,
    method: Method,
    opts: &AssemblyOptions,
) -> Result<Vec<LocalElementMatrices>> {
    let results: Vec<Result<LocalElementMatrices>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            local_matrices(c, &mesh.cell_polygon(c), spec, method, opts).map_err(|e| Error::Element {
                element: c,
                source: Box::new(e),
            })
        })
        .collect();
    results.into_iter().collect()
}

pub fn assemble_with(
    mesh: &PolyMesh,
    spec: &ProblemSpec,
    method: Method,
    opts: &AssemblyOptions,
    dirichlet: &Dirichlet,
) -> Result<GlobalSystem> {
    let nv = mesh.num_vertices();
    let mut boundary_values = vec![0.0; nv];
    if let Dirichlet::Values(g) = dirichlet {
        if g.len() != nv {
            return Err(Error::InvalidParameter(format!(
                "{} boundary values for {nv} vertices",
                g.len()
            )));
        }
        for &b in mesh.boundary_vertices() {
            boundary_values[b] = g[b];
        }
    }
    let mask = mesh.is_boundary_mask();
    let mut free_index = vec![None; nv];
    let mut free_vertices = Vec::new();
    for v in 0..nv {
        if !mask[v] {
            free_index[v] = Some(free_vertices.len());
            free_vertices.push(v);
        }
    }
    let blocks = local_blocks(mesh, spec, method, opts)?;
    let nf = free_vertices.len();
    let mut triplets = Vec::new();
    let mut rhs = vec![0.0; nf];
    let mut ells = Vec::with_capacity(blocks.len());
    let mut underresolved_cells = 0;
    for (cell, block) in mesh.cells().iter().zip(&blocks) {
        ells.push(block.ell);
        underresolved_cells += usize::from(block.underresolved);
        let a = block.total();
        for (i, &vi) in cell.iter().enumerate() {
            let Some(ri) = free_index[vi] else { continue };
            rhs[ri] += block.load[i];
            for (j, &vj) in cell.iter().enumerate() {
                match free_index[vj] {
                    Some(rj) => triplets.push((ri, rj, a[(i, j)])),
                    None => rhs[ri] -= a[(i, j)] * boundary_values[vj],
                }
            }
        }
    }
    if underresolved_cells > 0 {
        log::warn!("{underresolved_cells} cells integrated data below its polynomial degree");
    }
    Ok(GlobalSystem {
        matrix: CsrMatrix::from_triplets(nf, nf, &triplets),
        rhs,
        free_index,
        free_vertices,
        boundary_values,
        method,
        ells,
        underresolved_cells,
    })
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Sparse direct solve (reverse Cuthill-McKee ordering, banded LU with
/// partial pivoting) and scatter to all vertices.
pub fn solve(system: &GlobalSystem) -> Result<DiscreteSolution> {
    let nf = system.num_free();
    let mut values = system.boundary_values.clone();
    let bnorm = norm(&system.rhs);
    if nf == 0 || bnorm == 0.0 {
        return Ok(DiscreteSolution {
            values,
            method: system.method,
            ells: system.ells.clone(),
            residual: 0.0,
            min_pivot: None,
        });
    }
    let perm = reverse_cuthill_mckee(&system.matrix);
    let lu = BandLu::factor(&system.matrix, &perm, PIVOT_REL_TOL)?;
    let x = lu.solve(&system.rhs);
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("solution contains non-finite values".into()));
    }
    let ax = system.matrix.matvec(&x);
    let r: Vec<f64> = ax.iter().zip(&system.rhs).map(|(a, b)| a - b).collect();
    let residual = norm(&r) / bnorm;
    if residual > RESIDUAL_WARN {
        log::warn!("relative residual {residual:.3e} exceeds {RESIDUAL_WARN:.0e}");
    }
    for (k, &v) in system.free_vertices.iter().enumerate() {
        values[v] = x[k];
    }
    Ok(DiscreteSolution {
        values,
        method: system.method,
        ells: system.ells.clone(),
        residual,
        min_pivot: Some(lu.min_pivot()),
    })
}

/// Writes `vertex_index,x,y,u_h` rows.
pub fn write_solution_csv(mesh: &PolyMesh, solution: &DiscreteSolution, mut out: impl Write) -> Result<()> {
    writeln!(out, "vertex_index,x,y,u_h")?;
    for (i, (p, u)) in mesh.vertices().iter().zip(&solution.values).enumerate() {
        writeln!(out, "{i},{:.16e},{:.16e},{:.16e}", p[0], p[1], u)?;
    }
    Ok(())
}
