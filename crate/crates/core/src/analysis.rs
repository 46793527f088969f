//! Measurement tools: singular values of local stiffness matrices, relative
//! error norms against an exact solution, and convergence-rate fitting.

use std::io::Write;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::element::{sfvem_local, AssemblyOptions, Method, ProblemSpec};
use crate::geometry::Point;
use crate::linalg::jacobi_singular_values;
use crate::mesh::{quality_report, CatalogPolygon, PolyMesh};
use crate::projectors::{nabla_matrix, ElementGeometry};
use crate::quadrature::polygon_rule;
use crate::system::{assemble_with, solve, DiscreteSolution, Dirichlet};
use crate::{ell_rule, Error, Result};

/// Relative tolerance of the Jacobi iteration used by the audit.
pub const SVD_TOL: f64 = 1e-14;
/// `sigma_r / sigma_max` below this counts as a lost rank.
pub const STABILITY_THRESHOLD: f64 = 1e-8;
/// `sigma_min / sigma_max` above this means constants are not in the kernel.
pub const KERNEL_THRESHOLD: f64 = 1e-11;

/// Singular values of the unweighted local diffusion matrix of one polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralAudit {
    pub name: String,
    pub n_e: usize,
    pub ell: usize,
    /// Descending.
    pub singular_values: Vec<f64>,
    pub sigma_min: f64,
    /// Second smallest singular value.
    pub sigma_r: f64,
    pub sigma_max: f64,
}

impl SpectralAudit {
    pub fn sigma_r_over_max(&self) -> f64 {
        self.sigma_r / self.sigma_max
    }

    pub fn sigma_min_over_max(&self) -> f64 {
        self.sigma_min / self.sigma_max
    }

    /// Whether `ell` satisfies the degree rule for this vertex count.
    pub fn rule_compliant(&self) -> bool {
        self.ell >= ell_rule(self.n_e, 0)
    }

    /// One-dimensional kernel made of constants and a detached `sigma_r`.
    pub fn is_stable(&self) -> bool {
        self.sigma_min_over_max() <= KERNEL_THRESHOLD && self.sigma_r_over_max() >= STABILITY_THRESHOLD
    }
}

pub fn spectral_audit(polygon: &CatalogPolygon, ell: usize) -> Result<SpectralAudit> {
    spectral_audit_vertices(&polygon.name, &polygon.vertices, ell)
}

pub fn spectral_audit_vertices(name: &str, vertices: &[Point], ell: usize) -> Result<SpectralAudit> {
    let spec = ProblemSpec::poisson(crate::poly::Poly2::zero())?;
    let local = sfvem_local(0, vertices, &spec, ell, &AssemblyOptions::default())?;
    let sv = jacobi_singular_values(&local.a_diff, SVD_TOL)?;
    let n = sv.len();
    Ok(SpectralAudit {
        name: name.to_string(),
        n_e: vertices.len(),
        ell,
        sigma_min: sv[n - 1],
        sigma_r: sv[n - 2],
        sigma_max: sv[0],
        singular_values: sv,
    })
}

/// Relative errors of the energy projection of a discrete solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `|u - Pi u_h|_0 / |u|_0`
    pub e0: f64,
    /// `|K^{1/2} grad(u - Pi u_h)|_0 / |K^{1/2} grad u|_0`
    pub e1: f64,
    /// Set when a denominator vanished; the affected norm is then absolute.
    pub zero_reference: bool,
}

/// Raw squared integrals of one cell: `|u - Pi u_h|^2`, `|u|^2`, and the
/// weighted gradient counterparts.
fn cell_error_integrals(
    polygon: &[Point],
    values: &[f64],
    spec: &ProblemSpec,
    quad_degree: Option<usize>,
) -> Result<[f64; 4]> {
    let exact = spec.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    let geom = ElementGeometry::new(polygon)?;
    let coeffs = nabla_matrix(&geom) * DVector::from_column_slice(values);
    let frame = geom.frame();
    let g = [coeffs[1] / frame.scale, coeffs[2] / frame.scale];
    let du = exact.u.degree();
    let degree = quad_degree.unwrap_or(2 * du.max(1));
    let rule = polygon_rule(polygon, degree)?;
    let k = spec.diffusion;
    let mut out = [0.0; 4];
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        let q = frame.local(p);
        let u = exact.u.eval(p);
        let proj = coeffs[0] + coeffs[1] * q[0] + coeffs[2] * q[1];
        let grad = [exact.grad[0].eval(p), exact.grad[1].eval(p)];
        let diff = [grad[0] - g[0], grad[1] - g[1]];
        let kd = k.apply(diff);
        let kg = k.apply(grad);
        out[0] += w * (u - proj) * (u - proj);
        out[1] += w * u * u;
        out[2] += w * (kd[0] * diff[0] + kd[1] * diff[1]);
        out[3] += w * (kg[0] * grad[0] + kg[1] * grad[1]);
    }
    Ok(out)
}

/// Relative `e0`, `e1` of the cellwise energy projection of `solution`.
pub fn error_norms(
    mesh: &PolyMesh,
    solution: &DiscreteSolution,
    spec: &ProblemSpec,
    quad_degree: Option<usize>,
) -> Result<ErrorNorms> {
    if spec.exact.is_none() {
        return Err(Error::MissingExactSolution);
    }
    if solution.values.len() != mesh.num_vertices() {
        return Err(Error::InvalidParameter(format!(
            "solution has {} values for {} vertices",
            solution.values.len(),
            mesh.num_vertices()
        )));
    }
    let per_cell: Vec<Result<[f64; 4]>> = (0..mesh.num_cells())
        .into_par_iter()
        .map(|c| {
            let values: Vec<f64> = mesh.cells()[c].iter().map(|&v| solution.values[v]).collect();
            cell_error_integrals(&mesh.cell_polygon(c), &values, spec, quad_degree).map_err(|e| {
                Error::Element {
                    element: c,
                    source: Box::new(e),
                }
            })
        })
        .collect();
    let mut sums = [0.0; 4];
    for r in per_cell {
        let v = r?;
        for k in 0..4 {
            sums[k] += v[k];
        }
    }
    let mut zero_reference = false;
    let mut ratio = |num: f64, den: f64| {
        if den > 0.0 {
            (num / den).sqrt()
        } else {
            zero_reference = true;
            num.sqrt()
        }
    };
    let e0 = ratio(sums[0], sums[1]);
    let e1 = ratio(sums[2], sums[3]);
    Ok(ErrorNorms { e0, e1, zero_reference })
}

/// Errors of one method at one refinement level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MethodErrors {
    pub e0: f64,
    pub e1: f64,
    pub residual: f64,
}

/// One refinement level of a convergence study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRecord {
    pub level: usize,
    pub h: f64,
    pub ndof: usize,
    pub sfvem: Option<MethodErrors>,
    pub vem: Option<MethodErrors>,
}

impl ConvergenceRecord {
    pub fn errors(&self, method: Method) -> Option<MethodErrors> {
        match method {
            Method::Sfvem => self.sfvem,
            Method::Vem => self.vem,
        }
    }

    /// VEM over SFVEM, for `e0` and `e1`.
    pub fn ratios(&self) -> Option<(f64, f64)> {
        let (s, v) = (self.sfvem?, self.vem?);
        Some((v.e0 / s.e0, v.e1 / s.e1))
    }
}

/// Solves `spec` on `mesh` with each method and measures the errors. The
/// boundary data come from the exact solution.
pub fn run_level(
    level: usize,
    mesh: &PolyMesh,
    spec: &ProblemSpec,
    methods: &[Method],
    opts: &AssemblyOptions,
) -> Result<ConvergenceRecord> {
    let exact = spec.exact.as_ref().ok_or(Error::MissingExactSolution)?;
    let g: Vec<f64> = mesh.vertices().iter().map(|&p| exact.u.eval(p)).collect();
    let dirichlet = Dirichlet::Values(g);
    let mut record = ConvergenceRecord {
        level,
        h: quality_report(mesh).h,
        ndof: mesh.num_vertices() - mesh.boundary_vertices().len(),
        sfvem: None,
        vem: None,
    };
    for &method in methods {
        let system = assemble_with(mesh, spec, method, opts, &dirichlet)?;
        let sol = solve(&system)?;
        let norms = error_norms(mesh, &sol, spec, opts.quad_degree)?;
        let errs = MethodErrors {
            e0: norms.e0,
            e1: norms.e1,
            residual: sol.residual,
        };
        match method {
            Method::Sfvem => record.sfvem = Some(errs),
            Method::Vem => record.vem = Some(errs),
        }
    }
    Ok(record)
}

/// Least-squares slope of `log e` against `log h`.
pub fn fit_slope(h: &[f64], e: &[f64]) -> Result<f64> {
    if h.len() != e.len() {
        return Err(Error::InvalidParameter("mismatched series lengths".into()));
    }
    if h.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "rate fitting needs at least 2 levels, got {}",
            h.len()
        )));
    }
    if h.iter().chain(e).any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("rate fitting needs positive finite data".into()));
    }
    let xs: Vec<f64> = h.iter().map(|v| v.ln()).collect();
    let ys: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all levels share the same h".into()));
    }
    Ok(sxy / sxx)
}

/// Fitted `(alpha0, alpha1)` of one method.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rates {
    pub alpha0: f64,
    pub alpha1: f64,
}

/// Rates per method present in every record.
pub fn fit_rates(records: &[ConvergenceRecord]) -> Result<Vec<(Method, Rates)>> {
    if records.len() < 2 {
        return Err(Error::InvalidParameter(format!(
            "rate fitting needs at least 2 levels, got {}",
            records.len()
        )));
    }
    let h: Vec<f64> = records.iter().map(|r| r.h).collect();
    let mut out = Vec::new();
    for method in [Method::Sfvem, Method::Vem] {
        let errs: Option<Vec<MethodErrors>> = records.iter().map(|r| r.errors(method)).collect();
        if let Some(errs) = errs {
            let e0: Vec<f64> = errs.iter().map(|e| e.e0).collect();
            let e1: Vec<f64> = errs.iter().map(|e| e.e1).collect();
            out.push((
                method,
                Rates {
                    alpha0: fit_slope(&h, &e0)?,
                    alpha1: fit_slope(&h, &e1)?,
                },
            ));
        }
    }
    Ok(out)
}

pub const AUDIT_CSV_HEADER: &str = "name,N_E,ell_E,sigma_min,sigma_r,sigma_max,sigma_r_over_max";
pub const CONVERGENCE_CSV_HEADER: &str = "level,h,ndof,e0_sfvem,e1_sfvem,e0_vem,e1_vem,ratio_e0,ratio_e1";

pub fn write_audit_row(mut out: impl Write, a: &SpectralAudit) -> Result<()> {
    writeln!(
        out,
        "{},{},{},{:.16e},{:.16e},{:.16e},{:.16e}",
        a.name,
        a.n_e,
        a.ell,
        a.sigma_min,
        a.sigma_r,
        a.sigma_max,
        a.sigma_r_over_max()
    )?;
    Ok(())
}

fn opt_field(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.16e}")).unwrap_or_default()
}

/// Writes one convergence row; columns of a method that was not run stay empty.
pub fn write_convergence_row(mut out: impl Write, r: &ConvergenceRecord) -> Result<()> {
    let ratios = r.ratios();
    writeln!(
        out,
        "{},{:.16e},{},{},{},{},{},{},{}",
        r.level,
        r.h,
        r.ndof,
        opt_field(r.sfvem.map(|e| e.e0)),
        opt_field(r.sfvem.map(|e| e.e1)),
        opt_field(r.vem.map(|e| e.e0)),
        opt_field(r.vem.map(|e| e.e1)),
        opt_field(ratios.map(|x| x.0)),
        opt_field(ratios.map(|x| x.1)),
    )?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::generate_distorted_grid;
    use crate::poly::{exact_from, Poly2};

    #[test]
    fn synthetic_rates() {
        let h = [0.5, 0.25, 0.125, 0.0625];
        let e2: Vec<f64> = h.iter().map(|x| 3.0 * x * x).collect();
        let e1: Vec<f64> = h.iter().map(|x| 0.7 * x).collect();
        assert!((fit_slope(&h, &e2).unwrap() - 2.0).abs() < 1e-12);
        assert!((fit_slope(&h, &e1).unwrap() - 1.0).abs() < 1e-12);
        assert!(fit_slope(&h[..1], &e1[..1]).is_err());
    }

    #[test]
    fn fit_rates_needs_two_records() {
        let r = ConvergenceRecord {
            level: 4,
            h: 0.25,
            ndof: 9,
            sfvem: None,
            vem: None,
        };
        assert!(fit_rates(&[r]).is_err());
    }

    #[test]
    fn interpolant_of_linear_has_no_error() {
        let mesh = generate_distorted_grid(4, 0.3, 1).unwrap();
        let u = Poly2::linear(0.5, 1.0, -2.0);
        let mut spec = ProblemSpec::poisson(Poly2::zero()).unwrap();
        spec.exact = Some(exact_from(u.clone()));
        let sol = DiscreteSolution {
            values: mesh.vertices().iter().map(|&p| u.eval(p)).collect(),
            method: Method::Sfvem,
            ells: vec![],
            residual: 0.0,
            min_pivot: None,
        };
        let n = error_norms(&mesh, &sol, &spec, None).unwrap();
        assert!(n.e0 <= 1e-12 && n.e1 <= 1e-12, "{n:?}");
        assert!(!n.zero_reference);
    }

    #[test]
    fn zero_over_zero_is_flagged() {
        let mesh = generate_distorted_grid(2, 0.0, 1).unwrap();
        let mut spec = ProblemSpec::poisson(Poly2::zero()).unwrap();
        spec.exact = Some(exact_from(Poly2::zero()));
        let sol = DiscreteSolution {
            values: vec![0.0; mesh.num_vertices()],
            method: Method::Vem,
            ells: vec![],
            residual: 0.0,
            min_pivot: None,
        };
        let n = error_norms(&mesh, &sol, &spec, None).unwrap();
        assert_eq!((n.e0, n.e1), (0.0, 0.0));
        assert!(n.zero_reference);
    }

    #[test]
    fn missing_exact_solution() {
        let mesh = generate_distorted_grid(2, 0.0, 1).unwrap();
        let spec = ProblemSpec::poisson(Poly2::zero()).unwrap();
        let sol = DiscreteSolution {
            values: vec![0.0; 9],
            method: Method::Vem,
            ells: vec![],
            residual: 0.0,
            min_pivot: None,
        };
        assert!(matches!(error_norms(&mesh, &sol, &spec, None), Err(Error::MissingExactSolution)));
    }

    #[test]
    fn square_audit_matches_eigendecomposition() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let a = spectral_audit_vertices("square", &sq, 1).unwrap();
        let spec = ProblemSpec::poisson(Poly2::zero()).unwrap();
        let m = sfvem_local(0, &sq, &spec, 1, &AssemblyOptions::default()).unwrap();
        let mut eig: Vec<f64> = m.a_diff.symmetric_eigen().eigenvalues.iter().map(|x| x.abs()).collect();
        eig.sort_by(|a, b| b.total_cmp(a));
        assert!((a.sigma_r - eig[2]).abs() <= 1e-12 * a.sigma_max);
        assert!(a.is_stable() && a.rule_compliant());
    }

    #[test]
    fn csv_rows() {
        let r = ConvergenceRecord {
            level: 8,
            h: 0.125,
            ndof: 49,
            sfvem: Some(MethodErrors {
                e0: 1e-3,
                e1: 1e-2,
                residual: 0.0,
            }),
            vem: None,
        };
        let mut buf = Vec::new();
        write_convergence_row(&mut buf, &r).unwrap();
        let line = String::from_utf8(buf).unwrap();
        assert_eq!(line.trim_end().split(',').count(), 9);
        assert!(line.ends_with(",,,,\n"));
    }
}
