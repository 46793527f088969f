use sfvem::analysis::{fit_rates, run_level, spectral_audit_vertices};
use sfvem::element::{AssemblyOptions, Diffusion, Method, ProblemSpec};
use sfvem::mesh::{catalog_polygons, generate_distorted_grid, generate_voronoi};
use sfvem::poly::{poisson_bubble, Poly2};
use sfvem::ell_rule;

#[test]
fn bubble_converges_at_optimal_rates() {
    let spec = poisson_bubble().unwrap();
    let records: Vec<_> = [4, 8, 16, 32]
        .iter()
        .map(|&n| {
            let mesh = generate_distorted_grid(n, 0.3, 42).unwrap();
            run_level(n, &mesh, &spec, &[Method::Sfvem, Method::Vem], &AssemblyOptions::default()).unwrap()
        })
        .collect();
    for (m, r) in fit_rates(&records).unwrap() {
        assert!((1.7..2.4).contains(&r.alpha0), "{}: alpha0 {}", m.name(), r.alpha0);
        assert!((0.85..1.3).contains(&r.alpha1), "{}: alpha1 {}", m.name(), r.alpha1);
    }
}

#[test]
fn voronoi_quadratic_solution_converges() {
    let u = Poly2::from_terms(&[(2, 0, 1.0), (1, 1, -0.5), (0, 2, 2.0), (1, 0, 0.3)]);
    let k = Diffusion::new([[2.0, 0.3], [0.3, 1.0]]);
    let beta = [Poly2::constant(1.0), Poly2::constant(-0.5)];
    let spec = ProblemSpec::manufactured(k, beta, Poly2::constant(1.5), u).unwrap();
    let records: Vec<_> = [6, 12, 24]
        .iter()
        .map(|&n| {
            let mesh = generate_voronoi(n * n, 3, 11, 0.0).unwrap();
            run_level(n, &mesh, &spec, &[Method::Sfvem], &AssemblyOptions::default()).unwrap()
        })
        .collect();
    let (_, r) = fit_rates(&records).unwrap()[0];
    assert!(r.alpha1 > 0.8, "alpha1 {}", r.alpha1);
    assert!(r.alpha0 > 1.6, "alpha0 {}", r.alpha0);
}

#[test]
fn audit_ratios_are_similarity_invariant() {
    let (s, c) = 0.7f64.sin_cos();
    for poly in catalog_polygons() {
        let ell = ell_rule(poly.n_e(), 0);
        let a = spectral_audit_vertices("ref", &poly.vertices, ell).unwrap();
        let moved: Vec<[f64; 2]> = poly
            .vertices
            .iter()
            .map(|p| [1e-3 * (c * p[0] - s * p[1]) + 5.0, 1e-3 * (s * p[0] + c * p[1]) - 2.0])
            .collect();
        let b = spectral_audit_vertices("moved", &moved, ell).unwrap();
        let rel = (a.sigma_r_over_max() - b.sigma_r_over_max()).abs() / a.sigma_r_over_max();
        assert!(rel < 1e-9, "{}: {rel:e}", poly.name);
        assert!(b.sigma_min_over_max() < 1e-11);
    }
}

#[test]
fn degree_below_rule_loses_rank() {
    for poly in catalog_polygons().into_iter().filter(|p| p.n_e() >= 4) {
        let a = spectral_audit_vertices(&poly.name, &poly.vertices, ell_rule(poly.n_e(), -1)).unwrap();
        assert!(!a.rule_compliant());
        assert!(a.sigma_r_over_max() < 1e-11, "{} N={}", poly.name, poly.n_e());
    }
}

#[test]
fn higher_degree_stays_stable() {
    for poly in catalog_polygons() {
        for offset in 1..=2 {
            let a = spectral_audit_vertices(&poly.name, &poly.vertices, ell_rule(poly.n_e(), offset)).unwrap();
            assert!(a.is_stable(), "{} offset {offset}", poly.name);
        }
    }
}
