use sfvem::geometry::{is_simple, signed_area};
use sfvem::mesh::{generate_distorted_grid, generate_voronoi, quality_report, PolyMesh};

fn check_invariants(mesh: &PolyMesh) {
    assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    assert_eq!(mesh.euler_characteristic(), 1);
    for c in 0..mesh.num_cells() {
        let poly = mesh.cell_polygon(c);
        assert!(signed_area(&poly) > 0.0, "cell {c} not counter-clockwise");
        assert!(is_simple(&poly), "cell {c} self-intersects");
    }
    let mask = mesh.is_boundary_mask();
    for (v, p) in mesh.vertices().iter().enumerate() {
        let on_edge = p[0].abs() < 1e-14 || p[1].abs() < 1e-14 || (p[0] - 1.0).abs() < 1e-14 || (p[1] - 1.0).abs() < 1e-14;
        assert_eq!(mask[v], on_edge, "vertex {v} at {p:?}");
    }
}

#[test]
fn distorted_grids_tile_the_square() {
    for (n, delta, seed) in [(1, 0.0, 0), (4, 0.3, 1), (16, 0.45, 2)] {
        let mesh = generate_distorted_grid(n, delta, seed).unwrap();
        assert_eq!(mesh.num_cells(), n * n);
        assert_eq!(mesh.num_vertices(), (n + 1) * (n + 1));
        check_invariants(&mesh);
    }
}

#[test]
fn voronoi_meshes_tile_the_square() {
    for (seeds, lloyd, seed, distortion) in [(16, 3, 5, 0.0), (64, 3, 42, 0.25)] {
        let mesh = generate_voronoi(seeds, lloyd, seed, distortion).unwrap();
        assert_eq!(mesh.num_cells(), seeds);
        check_invariants(&mesh);
        assert!(quality_report(&mesh).kappa > 0.0);
    }
}

#[test]
fn generators_are_seeded() {
    let a = generate_voronoi(40, 2, 9, 0.2).unwrap();
    let b = generate_voronoi(40, 2, 9, 0.2).unwrap();
    assert_eq!(a.to_text(), b.to_text());
    let c = generate_distorted_grid(6, 0.3, 9).unwrap();
    let d = generate_distorted_grid(6, 0.3, 10).unwrap();
    assert_ne!(c.to_text(), d.to_text());
}

#[test]
fn text_round_trip_is_lossless() {
    let mesh = generate_voronoi(30, 1, 3, 0.1).unwrap();
    let back = PolyMesh::from_text(&mesh.to_text()).unwrap();
    assert_eq!(back.vertices(), mesh.vertices());
    assert_eq!(back.cells(), mesh.cells());
    assert_eq!(back.boundary_vertices(), mesh.boundary_vertices());
}

#[test]
fn refinement_halves_h() {
    let h: Vec<f64> = [8, 16, 32]
        .iter()
        .map(|&n| quality_report(&generate_distorted_grid(n, 0.3, 42).unwrap()).h)
        .collect();
    for w in h.windows(2) {
        let r = w[0] / w[1];
        assert!((1.6..2.5).contains(&r), "ratio {r}");
    }
}
