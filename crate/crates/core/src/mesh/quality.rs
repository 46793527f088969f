use super::PolyMesh;
use crate::geometry;

/// Per-cell size and edge-ratio metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MeshQualityReport {
    /// `h_E`, the largest vertex-to-vertex distance of each cell.
    pub diameters: Vec<f64>,
    /// Shortest edge over diameter, per cell.
    pub edge_ratios: Vec<f64>,
    /// `max h_E`
    pub h: f64,
    /// `min` of the edge ratios.
    pub kappa: f64,
}

/// Diameters and edge ratios. Star-shapedness is not checked.
pub fn quality_report(mesh: &PolyMesh) -> MeshQualityReport {
    let mut diameters = Vec::with_capacity(mesh.num_cells());
    let mut edge_ratios = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        let d = geometry::diameter(&poly);
        let min_edge = geometry::edges(&poly)
            .iter()
            .map(|e| e.length)
            .fold(f64::INFINITY, f64::min);
        diameters.push(d);
        edge_ratios.push(min_edge / d);
    }
    let h = diameters.iter().copied().fold(0.0, f64::max);
    let kappa = edge_ratios.iter().copied().fold(f64::INFINITY, f64::min);
    MeshQualityReport {
        diameters,
        edge_ratios,
        h,
        kappa,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_distorted_grid;

    #[test]
    fn uniform_grid() {
        let q = quality_report(&generate_distorted_grid(2, 0.0, 0).unwrap());
        assert!((q.h - 0.5 * 2f64.sqrt()).abs() < 1e-15);
        for r in &q.edge_ratios {
            assert!((r - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        }
    }

    #[test]
    fn single_square() {
        let q = quality_report(&generate_distorted_grid(1, 0.0, 0).unwrap());
        assert_eq!(q.diameters, vec![2f64.sqrt()]);
    }

    #[test]
    fn distorted_grid_has_positive_kappa() {
        let q = quality_report(&generate_distorted_grid(8, 0.3, 42).unwrap());
        assert!(q.kappa > 0.0 && q.h > 0.0);
    }
}
