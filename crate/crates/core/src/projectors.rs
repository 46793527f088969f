//! Computable projections of a virtual function from its vertex values.
//!
//! Everything here only evaluates the function on the element boundary,
//! where it is piecewise linear:
//!
//! - [`nabla_projection`]: energy projection onto P1, i.e. the affine
//!   polynomial with `grad = (1/|E|) int_{dE} v n` and the same boundary
//!   mean as `v`;
//! - [`hgrad_projection`]: L2 projection of `grad v` onto gradients of the
//!   harmonic basis, solving `G d = b` with `G_ij = <grad h_j, grad h_i>_E`
//!   and `b_i = <v, dh_i/dn>_{dE}`;
//! - [`pi0_projection`]: the cell mean, which equals the mean of the energy
//!   projection for the enhanced space.

use nalgebra::{DMatrix, DVector};

use crate::geometry::{self, Edge, Point};
use crate::poly::{HarmonicBasis, ScaledFrame};
use crate::quadrature::{self, gauss_legendre, nodes_for_degree};
use crate::{Error, Result};

/// Eigenvalue ratio below which the Gram system is pseudo-inverted.
pub const GRAM_RCOND: f64 = 1e-12;

/// Precomputed geometric data of one polygonal cell.
#[derive(Debug, Clone)]
pub struct ElementGeometry {
    pub vertices: Vec<Point>,
    pub edges: Vec<Edge>,
    pub area: f64,
    pub centroid: Point,
    pub diameter: f64,
    pub perimeter: f64,
}

impl ElementGeometry {
    pub fn new(vertices: &[Point]) -> Result<Self> {
        if vertices.len() < 3 {
            return Err(Error::Geometry(format!("element with {} vertices", vertices.len())));
        }
        let area = geometry::signed_area(vertices);
        let diameter = geometry::diameter(vertices);
        if !(area > 1e-14 * diameter * diameter) {
            return Err(Error::Geometry(format!(
                "degenerate element: area {area:.3e}, diameter {diameter:.3e}"
            )));
        }
        Ok(Self {
            vertices: vertices.to_vec(),
            edges: geometry::edges(vertices),
            area,
            centroid: geometry::centroid(vertices),
            diameter,
            perimeter: geometry::perimeter(vertices),
        })
    }

    pub fn n(&self) -> usize {
        self.vertices.len()
    }

    /// Frame centred at the centroid with the diameter as length scale.
    pub fn frame(&self) -> ScaledFrame {
        ScaledFrame::new(self.centroid, self.diameter)
    }
}

/// Vertex values of a function on one element.
#[derive(Debug, Clone)]
pub struct ElementDofs {
    pub element: usize,
    pub vertices: Vec<Point>,
    pub values: Vec<f64>,
}

impl ElementDofs {
    pub fn new(element: usize, vertices: Vec<Point>, values: Vec<f64>) -> Result<Self> {
        if vertices.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "{} dof values for {} vertices",
                values.len(),
                vertices.len()
            )));
        }
        Ok(Self {
            element,
            vertices,
            values,
        })
    }

    /// Samples `f` at the vertices.
    pub fn sample(element: usize, vertices: &[Point], f: impl Fn(Point) -> f64) -> Self {
        Self {
            element,
            vertices: vertices.to_vec(),
            values: vertices.iter().map(|&p| f(p)).collect(),
        }
    }
}

/// Energy projection onto P1 in the scaled monomials `{1, x^, y^}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NablaProjection {
    pub frame: ScaledFrame,
    pub coeffs: [f64; 3],
}

impl NablaProjection {
    pub fn eval(&self, p: Point) -> f64 {
        let q = self.frame.local(p);
        self.coeffs[0] + self.coeffs[1] * q[0] + self.coeffs[2] * q[1]
    }

    pub fn gradient(&self) -> [f64; 2] {
        [self.coeffs[1] / self.frame.scale, self.coeffs[2] / self.frame.scale]
    }
}

/// `3 x N` matrix mapping vertex values to the scaled P1 coefficients of
/// the energy projection.
pub fn nabla_matrix(geom: &ElementGeometry) -> DMatrix<f64> {
    let n = geom.n();
    let h = geom.diameter;
    let xc = geom.centroid;
    // boundary first moment of (x - xc)
    let mut moment = [0.0, 0.0];
    for e in &geom.edges {
        let mid = [0.5 * (e.start[0] + e.end[0]), 0.5 * (e.start[1] + e.end[1])];
        moment[0] += e.length * (mid[0] - xc[0]);
        moment[1] += e.length * (mid[1] - xc[1]);
    }
    let mut m = DMatrix::zeros(3, n);
    for a in 0..n {
        let prev = &geom.edges[(a + n - 1) % n];
        let next = &geom.edges[a];
        let g = [
            (prev.length * prev.normal[0] + next.length * next.normal[0]) / (2.0 * geom.area),
            (prev.length * prev.normal[1] + next.length * next.normal[1]) / (2.0 * geom.area),
        ];
        let boundary_integral = 0.5 * (prev.length + next.length);
        let c = (boundary_integral - g[0] * moment[0] - g[1] * moment[1]) / geom.perimeter;
        m[(0, a)] = c;
        m[(1, a)] = h * g[0];
        m[(2, a)] = h * g[1];
    }
    m
}

pub fn nabla_projection(dofs: &ElementDofs) -> Result<NablaProjection> {
    let geom = ElementGeometry::new(&dofs.vertices)?;
    let m = nabla_matrix(&geom);
    let c = &m * DVector::from_column_slice(&dofs.values);
    Ok(NablaProjection {
        frame: geom.frame(),
        coeffs: [c[0], c[1], c[2]],
    })
}

/// Cell mean of the function: the mean of its energy projection.
pub fn pi0_projection(dofs: &ElementDofs, nabla: &NablaProjection) -> f64 {
    nabla.eval(geometry::centroid(&dofs.vertices))
}

/// Row vector mapping vertex values to the cell mean.
pub fn pi0_row(geom: &ElementGeometry, nabla: &DMatrix<f64>) -> DVector<f64> {
    // the frame is centred at the centroid, so the mean is the constant coefficient
    debug_assert_eq!(geom.frame().center, geom.centroid);
    nabla.row(0).transpose()
}

/// How the harmonic Gram matrix is integrated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GramMode {
    /// `<h_j, dh_i/dn>` on the edges with `ell + 1` Gauss nodes each.
    Boundary,
    /// `<grad h_j, grad h_i>` with a polygon rule of degree `2 ell`.
    Area,
}

/// Symmetric Gram matrix of the harmonic gradients on `polygon`.
pub fn hgrad_gram(polygon: &[Point], basis: &HarmonicBasis, mode: GramMode) -> Result<DMatrix<f64>> {
    let m = basis.size();
    let mut g = DMatrix::zeros(m, m);
    let mut grads = vec![[0.0; 2]; m];
    match mode {
        GramMode::Boundary => {
            let rule = gauss_legendre(basis.ell + 1)?;
            for e in geometry::edges(polygon) {
                for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
                    let s = 0.5 * (t + 1.0);
                    let p = [
                        e.start[0] + s * (e.end[0] - e.start[0]),
                        e.start[1] + s * (e.end[1] - e.start[1]),
                    ];
                    let vals = basis.values(p);
                    basis.gradients_into(p, &mut grads);
                    let wl = 0.5 * w * e.length;
                    for i in 0..m {
                        let dn = wl * geometry::dot(grads[i], e.normal);
                        for j in 0..m {
                            g[(i, j)] += vals[j] * dn;
                        }
                    }
                }
            }
        }
        GramMode::Area => {
            let rule = quadrature::polygon_rule(polygon, 2 * basis.ell)?;
            for (&p, &w) in rule.points.iter().zip(&rule.weights) {
                basis.gradients_into(p, &mut grads);
                for i in 0..m {
                    for j in 0..m {
                        g[(i, j)] += w * geometry::dot(grads[i], grads[j]);
                    }
                }
            }
        }
    }
    let sym: DMatrix<f64> = (&g + g.transpose()) * 0.5;
    if sym.iter().any(|v| !v.is_finite()) {
        return Err(Error::Numerical("non-finite harmonic Gram matrix".into()));
    }
    Ok(sym)
}

/// `m x N` matrix of boundary moments `b_{i,a} = <phi_a, dh_i/dn>_{dE}`,
/// `phi_a` being the hat function of vertex `a` on the boundary.
pub fn hgrad_rhs_matrix(geom: &ElementGeometry, basis: &HarmonicBasis) -> Result<DMatrix<f64>> {
    let m = basis.size();
    let n = geom.n();
    let rule = gauss_legendre(nodes_for_degree(basis.ell + 1))?;
    let mut b = DMatrix::zeros(m, n);
    let mut grads = vec![[0.0; 2]; m];
    for (k, e) in geom.edges.iter().enumerate() {
        let (a, c) = (k, (k + 1) % n);
        for (&t, &w) in rule.nodes.iter().zip(&rule.weights) {
            let s = 0.5 * (t + 1.0);
            let p = [
                e.start[0] + s * (e.end[0] - e.start[0]),
                e.start[1] + s * (e.end[1] - e.start[1]),
            ];
            basis.gradients_into(p, &mut grads);
            let wl = 0.5 * w * e.length;
            for i in 0..m {
                let dn = wl * geometry::dot(grads[i], e.normal);
                b[(i, a)] += (1.0 - s) * dn;
                b[(i, c)] += s * dn;
            }
        }
    }
    Ok(b)
}

/// How the Gram system was solved.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GramSolve {
    Cholesky,
    /// Eigenvalue ratio fell below [`GRAM_RCOND`]; an SVD pseudo-inverse
    /// was used instead.
    PseudoInverse { rcond: f64 },
}

/// Harmonic-gradient projector of one element in matrix form.
#[derive(Debug, Clone)]
pub struct HGradOperator {
    pub basis: HarmonicBasis,
    pub gram: DMatrix<f64>,
    /// boundary moments, `m x N`
    pub rhs: DMatrix<f64>,
    /// `G^{-1} rhs`: coefficients of the projected gradient of each hat function
    pub projector: DMatrix<f64>,
    pub solve: GramSolve,
}

/// Solves `gram * X = rhs`, by Cholesky when well conditioned.
pub fn solve_gram(gram: &DMatrix<f64>, rhs: &DMatrix<f64>) -> Result<(DMatrix<f64>, GramSolve)> {
    let eig = gram.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let lmin = eig.eigenvalues.iter().fold(f64::INFINITY, |a, &b| a.min(b));
    if !(lmax > 0.0) || !lmax.is_finite() {
        return Err(Error::Geometry(format!(
            "harmonic Gram matrix has no positive spectrum (largest eigenvalue {lmax:.3e})"
        )));
    }
    let rcond = lmin / lmax;
    if rcond >= GRAM_RCOND {
        if let Some(ch) = gram.clone().cholesky() {
            return Ok((ch.solve(rhs), GramSolve::Cholesky));
        }
    }
    log::warn!("harmonic Gram matrix nearly singular (eigenvalue ratio {rcond:.3e}); using pseudo-inverse");
    let cutoff = GRAM_RCOND * lmax;
    let mut x = DMatrix::zeros(gram.ncols(), rhs.ncols());
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > cutoff {
            let v = eig.eigenvectors.column(k);
            let coeff = (v.transpose() * rhs) / lam;
            x += v * coeff;
        }
    }
    Ok((x, GramSolve::PseudoInverse { rcond }))
}

pub fn hgrad_operator(geom: &ElementGeometry, basis: &HarmonicBasis) -> Result<HGradOperator> {
    let gram = hgrad_gram(&geom.vertices, basis, GramMode::Boundary)?;
    let rhs = hgrad_rhs_matrix(geom, basis)?;
    let (projector, solve) = solve_gram(&gram, &rhs)?;
    Ok(HGradOperator {
        basis: *basis,
        gram,
        rhs,
        projector,
        solve,
    })
}

/// Projected gradient `sum_j d_j grad h_j` of one function.
#[derive(Debug, Clone)]
pub struct HGradProjection {
    pub basis: HarmonicBasis,
    pub coeffs: DVector<f64>,
    pub gram: DMatrix<f64>,
    /// boundary moments `<v, dh_i/dn>` the coefficients were solved from
    pub moments: DVector<f64>,
}

impl HGradProjection {
    pub fn field_at(&self, p: Point) -> [f64; 2] {
        let g = self.basis.gradients(p);
        let mut out = [0.0, 0.0];
        for (d, gi) in self.coeffs.iter().zip(&g) {
            out[0] += d * gi[0];
            out[1] += d * gi[1];
        }
        out
    }

    /// Squared L2 norm of the projected field, `d^T G d`.
    pub fn norm_squared(&self) -> f64 {
        self.coeffs.dot(&(&self.gram * &self.coeffs))
    }
}

pub fn hgrad_projection(dofs: &ElementDofs, basis: &HarmonicBasis) -> Result<HGradProjection> {
    let geom = ElementGeometry::new(&dofs.vertices)?;
    let op = hgrad_operator(&geom, basis)?;
    let v = DVector::from_column_slice(&dofs.values);
    Ok(HGradProjection {
        basis: *basis,
        coeffs: &op.projector * &v,
        moments: &op.rhs * &v,
        gram: op.gram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::harmonic_basis;

    fn square() -> Vec<Point> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn linear_function_is_reproduced() {
        let poly = vec![[0.1, 0.0], [1.2, 0.3], [0.9, 1.1], [0.2, 0.8], [-0.2, 0.4]];
        let f = |p: Point| 2.0 * p[0] + 3.0 * p[1] - 1.0;
        let dofs = ElementDofs::sample(0, &poly, f);
        let pr = nabla_projection(&dofs).unwrap();
        for &p in &poly {
            assert!((pr.eval(p) - f(p)).abs() < 1e-13);
        }
        let g = pr.gradient();
        assert!((g[0] - 2.0).abs() < 1e-13 && (g[1] - 3.0).abs() < 1e-13);
    }

    #[test]
    fn constant_function() {
        let dofs = ElementDofs::sample(0, &square(), |_| 1.0);
        let pr = nabla_projection(&dofs).unwrap();
        assert!((pr.coeffs[0] - 1.0).abs() < 1e-15);
        assert!(pr.coeffs[1].abs() < 1e-15 && pr.coeffs[2].abs() < 1e-15);
        assert!((pi0_projection(&dofs, &pr) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn x_squared_on_unit_square() {
        // boundary trace of x^2 is piecewise linear interpolation of vertex values
        // 0,1,1,0 → gradient (1/|E|) int v n = (1, 0); x - 1/2 + c with
        // c = int v / |dE| - int (x - 1/2) / |dE| = (0 + 1 + 1 + 0)/2 /4 ... = 0.5
        let dofs = ElementDofs::sample(0, &square(), |p| p[0] * p[0]);
        let pr = nabla_projection(&dofs).unwrap();
        let g = pr.gradient();
        assert!((g[0] - 1.0).abs() < 1e-15 && g[1].abs() < 1e-15);
        // int_{dE} v = 0.5 (bottom) + 1 (right) + 0.5 (top) + 0 (left) = 2
        // int_{dE} (x - 1/2) = 0 + 0.5 + 0 - 0.5 = 0
        let c_expected = 2.0 / 4.0 - 0.0;
        assert!((pr.eval([0.5, 0.5]) - c_expected).abs() < 1e-15);
    }

    #[test]
    fn pi0_of_x_on_square() {
        let dofs = ElementDofs::sample(0, &square(), |p| p[0]);
        let pr = nabla_projection(&dofs).unwrap();
        assert!((pi0_projection(&dofs, &pr) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn ell0_gram_on_square_is_scaled_identity() {
        let geom = ElementGeometry::new(&square()).unwrap();
        let b = harmonic_basis(geom.frame(), 0);
        let g = hgrad_gram(&geom.vertices, &b, GramMode::Boundary).unwrap();
        let d = geom.area / (geom.diameter * geom.diameter);
        assert!((g[(0, 0)] - d).abs() < 1e-15 && (g[(1, 1)] - d).abs() < 1e-15);
        assert!(g[(0, 1)].abs() < 1e-15);
    }

    #[test]
    fn gram_modes_agree() {
        let poly = vec![[0.0, 0.0], [2.0, 0.2], [2.5, 1.5], [1.0, 2.2], [-0.3, 1.0]];
        let geom = ElementGeometry::new(&poly).unwrap();
        for ell in 0..6 {
            let b = harmonic_basis(geom.frame(), ell);
            let gb = hgrad_gram(&poly, &b, GramMode::Boundary).unwrap();
            let ga = hgrad_gram(&poly, &b, GramMode::Area).unwrap();
            for i in 0..b.size() {
                for j in 0..b.size() {
                    let scale = (ga[(i, i)] * ga[(j, j)]).sqrt();
                    assert!((gb[(i, j)] - ga[(i, j)]).abs() <= 1e-12 * scale, "ell {ell} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn linear_dofs_project_onto_first_pair() {
        let poly = vec![[0.0, 0.0], [1.0, 0.1], [1.2, 1.0], [0.1, 0.9]];
        let geom = ElementGeometry::new(&poly).unwrap();
        let b = harmonic_basis(geom.frame(), 2);
        let dofs = ElementDofs::sample(0, &poly, |p| 0.7 * p[0] - 1.3 * p[1] + 4.0);
        let pr = hgrad_projection(&dofs, &b).unwrap();
        assert!((pr.coeffs[0] - 0.7 * geom.diameter).abs() < 1e-12);
        assert!((pr.coeffs[1] + 1.3 * geom.diameter).abs() < 1e-12);
        for k in 2..b.size() {
            assert!(pr.coeffs[k].abs() < 1e-12, "{k}: {}", pr.coeffs[k]);
        }
    }

    #[test]
    fn constant_dofs_project_to_zero() {
        let geom = ElementGeometry::new(&square()).unwrap();
        let b = harmonic_basis(geom.frame(), 1);
        let dofs = ElementDofs::sample(0, &square(), |_| 3.0);
        let pr = hgrad_projection(&dofs, &b).unwrap();
        assert!(pr.coeffs.amax() < 1e-14);
    }

    #[test]
    fn orthogonality_residual_on_square() {
        let geom = ElementGeometry::new(&square()).unwrap();
        let b = harmonic_basis(geom.frame(), 1);
        let re_z2 = b.to_poly2(2);
        let dofs = ElementDofs::sample(0, &square(), |p| re_z2.eval(p));
        let pr = hgrad_projection(&dofs, &b).unwrap();
        let ga = hgrad_gram(&square(), &b, GramMode::Area).unwrap();
        let r = &ga * &pr.coeffs - &pr.moments;
        assert!(r.amax() <= 1e-12 * pr.moments.amax().max(1.0));
    }

    #[test]
    fn degenerate_element_rejected() {
        let sliver = [[0.0, 0.0], [1.0, 0.0], [2.0, 1e-16]];
        assert!(ElementGeometry::new(&sliver).is_err());
    }

    #[test]
    fn pseudo_inverse_fallback() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let rhs = DMatrix::from_row_slice(2, 1, &[2.0, 2.0]);
        let (x, how) = solve_gram(&g, &rhs).unwrap();
        assert!(matches!(how, GramSolve::PseudoInverse { .. }));
        assert!((x[(0, 0)] - 1.0).abs() < 1e-12 && (x[(1, 0)] - 1.0).abs() < 1e-12);
    }
}
