//! Polygonal meshes of planar domains.
//!
//! A [`PolyMesh`] is immutable once built; every constructor runs the full
//! topology check, so downstream code can assume counter-clockwise simple
//! cells and a conforming edge structure.

mod catalog;
mod generate;
mod io;
mod quality;

use std::collections::{BTreeSet, HashMap};

pub use catalog::{catalog_polygons, CatalogPolygon, PolygonKind};
pub use generate::{generate_distorted_grid, generate_voronoi, voronoi_from_seeds};
pub use io::{read_mesh, write_mesh};
pub use quality::{quality_report, MeshQualityReport};

use crate::geometry::{self, Point};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PolyMesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    boundary: Vec<usize>,
}

impl PolyMesh {
    /// Builds a mesh and derives the boundary vertices from the boundary edges.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        let boundary = check_topology(&vertices, &cells)?;
        Ok(Self {
            vertices,
            cells,
            boundary,
        })
    }

    /// Builds a mesh with an explicit boundary list, which must match the
    /// vertices on boundary edges.
    pub fn with_boundary(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let derived = check_topology(&vertices, &cells)?;
        let mut given = boundary.clone();
        if let Some(&bad) = given.iter().find(|&&b| b >= vertices.len()) {
            return Err(Error::Index(format!(
                "boundary vertex {bad} out of range ({} vertices)",
                vertices.len()
            )));
        }
        given.sort_unstable();
        given.dedup();
        if given != derived {
            return Err(Error::Topology(format!(
                "boundary list ({} vertices) does not match the vertices on boundary edges ({})",
                given.len(),
                derived.len()
            )));
        }
        Ok(Self {
            vertices,
            cells,
            boundary,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    /// Boundary vertex indices in the order they were supplied.
    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn is_boundary_mask(&self) -> Vec<bool> {
        let mut mask = vec![false; self.vertices.len()];
        for &b in &self.boundary {
            mask[b] = true;
        }
        mask
    }

    /// Coordinates of cell `c` in CCW order.
    pub fn cell_polygon(&self, c: usize) -> Vec<Point> {
        self.cells[c].iter().map(|&v| self.vertices[v]).collect()
    }

    pub fn cell_area(&self, c: usize) -> f64 {
        geometry::signed_area(&self.cell_polygon(c))
    }

    pub fn total_area(&self) -> f64 {
        (0..self.cells.len()).map(|c| self.cell_area(c)).sum()
    }

    /// Number of distinct undirected edges.
    pub fn num_edges(&self) -> usize {
        let mut set = BTreeSet::new();
        for cell in &self.cells {
            for k in 0..cell.len() {
                let (a, b) = (cell[k], cell[(k + 1) % cell.len()]);
                set.insert((a.min(b), a.max(b)));
            }
        }
        set.len()
    }

    /// `V - E + F`; equals 1 for a simply connected domain.
    pub fn euler_characteristic(&self) -> i64 {
        self.num_vertices() as i64 - self.num_edges() as i64 + self.num_cells() as i64
    }

    /// Same mesh with the cells listed in a different order.
    pub fn permute_cells(&self, order: &[usize]) -> Result<Self> {
        let cells = order.iter().map(|&c| self.cells[c].clone()).collect();
        Self::with_boundary(self.vertices.clone(), cells, self.boundary.clone())
    }
}

/// Validates cells and returns the sorted boundary vertex set.
fn check_topology(vertices: &[Point], cells: &[Vec<usize>]) -> Result<Vec<usize>> {
    let nv = vertices.len();
    if cells.is_empty() {
        return Err(Error::Topology("mesh has no cells".into()));
    }
    let mut used = vec![false; nv];
    let mut directed: HashMap<(usize, usize), usize> = HashMap::new();
    for (c, cell) in cells.iter().enumerate() {
        if cell.len() < 3 {
            return Err(Error::Topology(format!("cell {c} has {} vertices", cell.len())));
        }
        for &v in cell {
            if v >= nv {
                return Err(Error::Index(format!(
                    "cell {c} references vertex {v}, mesh has {nv} vertices"
                )));
            }
            used[v] = true;
        }
        let poly: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
        if !geometry::is_simple(&poly) {
            return Err(Error::Topology(format!("cell {c} is not a simple polygon")));
        }
        if geometry::signed_area(&poly) <= 0.0 {
            return Err(Error::Topology(format!("cell {c} is not counter-clockwise")));
        }
        for k in 0..cell.len() {
            let e = (cell[k], cell[(k + 1) % cell.len()]);
            if let Some(other) = directed.insert(e, c) {
                return Err(Error::Topology(format!(
                    "edge {}-{} used with the same orientation by cells {other} and {c}",
                    e.0, e.1
                )));
            }
        }
    }
    if let Some(v) = used.iter().position(|u| !u) {
        return Err(Error::Topology(format!("vertex {v} belongs to no cell")));
    }
    let mut boundary = BTreeSet::new();
    for &(a, b) in directed.keys() {
        if !directed.contains_key(&(b, a)) {
            boundary.insert(a);
            boundary.insert(b);
        }
    }
    Ok(boundary.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> PolyMesh {
        PolyMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 1, 2, 3]],
        )
        .unwrap()
    }

    #[test]
    fn single_square() {
        let m = unit_square();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.boundary_vertices(), &[0, 1, 2, 3]);
        assert_eq!(m.euler_characteristic(), 1);
    }

    #[test]
    fn clockwise_cell_rejected() {
        let err = PolyMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![vec![0, 3, 2, 1]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Topology(_)), "{err}");
    }

    #[test]
    fn out_of_range_index() {
        let err = PolyMesh::new(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]], vec![vec![0, 1, 5]])
            .unwrap_err();
        assert!(matches!(err, Error::Index(_)));
    }

    #[test]
    fn non_manifold_edge_rejected() {
        // two triangles stacked on the same side of edge 0-1
        let err = PolyMesh::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, 1.0], [0.5, 0.5]],
            vec![vec![0, 1, 2], vec![0, 1, 3]],
        )
        .unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }

    #[test]
    fn wrong_boundary_list_rejected() {
        let m = unit_square();
        let err = PolyMesh::with_boundary(m.vertices.clone(), m.cells.clone(), vec![0, 1, 2])
            .unwrap_err();
        assert!(matches!(err, Error::Topology(_)));
    }
}
