//! Problem coefficients, the degree rule and local element matrices for the
//! stabilization-free method and the stabilized comparator.

use nalgebra::{DMatrix, DVector};

use crate::geometry::Point;
use crate::poly::{harmonic_basis, Poly2};
use crate::projectors::{self, ElementGeometry, GramSolve};
use crate::quadrature::polygon_rule;
use crate::{Error, Result};

/// Constant symmetric positive definite diffusion tensor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Diffusion(pub [[f64; 2]; 2]);

impl Diffusion {
    pub fn new(k: [[f64; 2]; 2]) -> Self {
        Self(k)
    }

    pub fn identity() -> Self {
        Self([[1.0, 0.0], [0.0, 1.0]])
    }

    pub fn scalar(c: f64) -> Self {
        Self([[c, 0.0], [0.0, c]])
    }

    /// `Some(c)` when the tensor is exactly `c I`.
    pub fn isotropic(&self) -> Option<f64> {
        let k = self.0;
        (k[0][1] == 0.0 && k[1][0] == 0.0 && k[0][0] == k[1][1]).then_some(k[0][0])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let k = self.0;
        let mean = 0.5 * (k[0][0] + k[1][1]);
        let half_diff = 0.5 * (k[0][0] - k[1][1]);
        let r = half_diff.hypot(k[0][1]);
        // the small one through the determinant to keep relative accuracy
        let big = mean + r;
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        [det / big, big]
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        let k = self.0;
        [k[0][0] * v[0] + k[0][1] * v[1], k[1][0] * v[0] + k[1][1] * v[1]]
    }

    /// Symmetric square root.
    pub fn sqrt(&self) -> [[f64; 2]; 2] {
        let k = self.0;
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        let s = det.max(0.0).sqrt();
        let t = (self.trace() + 2.0 * s).sqrt();
        [
            [(k[0][0] + s) / t, k[0][1] / t],
            [k[1][0] / t, (k[1][1] + s) / t],
        ]
    }

    pub fn validate(&self) -> Result<()> {
        let k = self.0;
        if k.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("diffusion tensor is not finite".into()));
        }
        let scale = k.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
        if (k[0][1] - k[1][0]).abs() > 1e-14 * scale {
            return Err(Error::InvalidParameter("diffusion tensor is not symmetric".into()));
        }
        let [lo, hi] = self.eigenvalues();
        if !(lo > 0.0 && hi > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "diffusion tensor is not positive definite (eigenvalues {lo:.3e}, {hi:.3e})"
            )));
        }
        Ok(())
    }
}

/// Closed form of the exact solution and its gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactSolution {
    pub u: Poly2,
    pub grad: [Poly2; 2],
}

/// Parameters of the anisotropic benchmark a problem was built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchmarkParams {
    pub theta: f64,
    pub r1: f64,
    pub r2: f64,
}

/// Coefficients of `-div(K grad u) + beta . grad u + gamma u = f` on the unit
/// square with Dirichlet boundary data.
#[derive(Debug, Clone)]
pub struct ProblemSpec {
    pub diffusion: Diffusion,
    pub advection: [Poly2; 2],
    pub reaction: Poly2,
    pub source: Poly2,
    pub exact: Option<ExactSolution>,
    pub benchmark: Option<BenchmarkParams>,
}

impl ProblemSpec {
    pub fn new(diffusion: Diffusion, advection: [Poly2; 2], reaction: Poly2, source: Poly2) -> Result<Self> {
        let spec = Self {
            diffusion,
            advection: [advection[0].trimmed(), advection[1].trimmed()],
            reaction: reaction.trimmed(),
            source: source.trimmed(),
            exact: None,
            benchmark: None,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Poisson problem `-lap u = f`.
    pub fn poisson(source: Poly2) -> Result<Self> {
        Self::new(Diffusion::identity(), [Poly2::zero(), Poly2::zero()], Poly2::zero(), source)
    }

    /// Builds `f` from the exact solution `u` by symbolic differentiation.
    pub fn manufactured(diffusion: Diffusion, advection: [Poly2; 2], reaction: Poly2, u: Poly2) -> Result<Self> {
        let k = diffusion.0;
        let [ux, uy] = u.gradient();
        let uxx = ux.dx();
        let uxy = ux.dy();
        let uyy = uy.dy();
        let div_flux = &(&uxx.scale(k[0][0]) + &uxy.scale(k[0][1] + k[1][0])) + &uyy.scale(k[1][1]);
        let transport = &(&advection[0] * &ux) + &(&advection[1] * &uy);
        let source = &(&transport - &div_flux) + &(&reaction * &u);
        let mut spec = Self::new(diffusion, advection, reaction, source)?;
        let u = u.trimmed();
        spec.exact = Some(ExactSolution {
            grad: [ux.trimmed(), uy.trimmed()],
            u,
        });
        Ok(spec)
    }

    pub fn has_advection(&self) -> bool {
        !(self.advection[0].is_zero() && self.advection[1].is_zero())
    }

    /// Checks the tensor, `div beta = 0` and `gamma >= 0` on a sample grid of
    /// the unit square.
    pub fn validate(&self) -> Result<()> {
        self.diffusion.validate()?;
        let div = &self.advection[0].dx() + &self.advection[1].dy();
        let grads = [
            self.advection[0].dx(),
            self.advection[0].dy(),
            self.advection[1].dx(),
            self.advection[1].dy(),
        ];
        let samples: Vec<Point> = (0..=20)
            .flat_map(|i| (0..=20).map(move |j| [i as f64 / 20.0, j as f64 / 20.0]))
            .collect();
        let scale = samples
            .iter()
            .flat_map(|&p| grads.iter().map(move |g| g.eval(p).abs()))
            .fold(0.0f64, f64::max);
        let reaction_scale = samples.iter().fold(0.0f64, |m, &p| m.max(self.reaction.eval(p).abs()));
        for &p in &samples {
            let d = div.eval(p);
            if d.abs() > 1e-9 * scale.max(f64::MIN_POSITIVE) && d.abs() > 0.0 {
                return Err(Error::InvalidParameter(format!(
                    "advection field is not divergence free: div = {d:.3e} at ({}, {})",
                    p[0], p[1]
                )));
            }
            let g = self.reaction.eval(p);
            if g < -1e-12 * reaction_scale {
                return Err(Error::InvalidParameter(format!(
                    "reaction coefficient is negative ({g:.3e}) at ({}, {})",
                    p[0], p[1]
                )));
            }
        }
        Ok(())
    }

    /// Total degree of the integrands that only involve problem data.
    fn data_degrees(&self) -> (usize, Option<usize>, usize) {
        let beta = self
            .has_advection()
            .then(|| self.advection[0].degree().max(self.advection[1].degree()));
        (self.source.degree(), beta, self.reaction.degree())
    }
}

/// Discretization selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Stabilization-free method with harmonic gradient projection.
    Sfvem,
    /// Standard method with the dofi-dofi stabilization.
    Vem,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Sfvem => "sfvem",
            Method::Vem => "vem",
        }
    }
}

/// Knobs shared by both local builders.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssemblyOptions {
    /// Added to the degree rule; negative values are allowed for experiments.
    pub ell_offset: i32,
    /// Fixed polygon quadrature degree. `None` integrates every data term exactly.
    pub quad_degree: Option<usize>,
    /// Multiplier on the dofi-dofi scaling `trace(K) / 2`.
    pub stab_scale: f64,
}

impl Default for AssemblyOptions {
    fn default() -> Self {
        Self {
            ell_offset: 0,
            quad_degree: None,
            stab_scale: 1.0,
        }
    }
}

/// Smallest `ell >= 0` with `2 ell + 2 >= n - 1`, shifted by `offset` and
/// clamped at zero.
pub fn ell_rule(n_vertices: usize, offset: i32) -> usize {
    let base = n_vertices.saturating_sub(2) / 2;
    (base as i64 + offset as i64).max(0) as usize
}

/// Local blocks of one element. Rows index test functions, columns trial
/// functions, both in the element's vertex order.
#[derive(Debug, Clone)]
pub struct LocalElementMatrices {
    pub element: usize,
    pub method: Method,
    /// Harmonic degree parameter; `None` for the stabilized method.
    pub ell: Option<usize>,
    pub a_diff: DMatrix<f64>,
    pub a_adv: DMatrix<f64>,
    pub a_reac: DMatrix<f64>,
    pub load: DVector<f64>,
    /// Harmonic gradient coefficients of each hat function, `(2 ell + 2) x N`.
    pub hgrad: Option<DMatrix<f64>>,
    /// Scaled P1 coefficients of the energy projection, `3 x N`.
    pub nabla: DMatrix<f64>,
    /// Cell-mean row.
    pub pi0: DVector<f64>,
    pub gram_solve: Option<GramSolve>,
    /// Polygon quadrature degree used for data integrals.
    pub quad_degree: usize,
    /// Set when a fixed quadrature degree is below what the data needs.
    pub underresolved: bool,
}

impl LocalElementMatrices {
    /// `A_diff + A_adv + A_reac`.
    pub fn total(&self) -> DMatrix<f64> {
        &self.a_diff + &self.a_adv + &self.a_reac
    }
}

struct DataIntegrals {
    source: f64,
    reaction: f64,
    /// `int beta` for the stabilized method, `int beta . grad h_k` otherwise
    advection: Option<DVector<f64>>,
    /// `int K grad h_i . grad h_j` when K is anisotropic
    weighted_gram: Option<DMatrix<f64>>,
    degree: usize,
    underresolved: bool,
}

fn data_integrals(
    geom: &ElementGeometry,
    spec: &ProblemSpec,
    ell: Option<usize>,
    opts: &AssemblyOptions,
) -> Result<DataIntegrals> {
    let (deg_f, deg_beta, deg_gamma) = spec.data_degrees();
    let basis = ell.map(|l| harmonic_basis(geom.frame(), l));
    let anisotropic = basis.is_some() && spec.diffusion.isotropic().is_none();
    let mut needed = deg_f.max(deg_gamma);
    if let Some(db) = deg_beta {
        needed = needed.max(db + ell.unwrap_or(0));
    }
    if let (true, Some(l)) = (anisotropic, ell) {
        needed = needed.max(2 * l);
    }
    let degree = opts.quad_degree.unwrap_or(needed);
    let rule = polygon_rule(&geom.vertices, degree)?;
    let m = basis.map_or(0, |b| b.size());
    let mut source = 0.0;
    let mut reaction = 0.0;
    let mut adv = deg_beta.map(|_| DVector::zeros(if basis.is_some() { m } else { 2 }));
    let mut wgram = anisotropic.then(|| DMatrix::zeros(m, m));
    let has_reaction = !spec.reaction.is_zero();
    let mut grads = vec![[0.0; 2]; m];
    for (&p, &w) in rule.points.iter().zip(&rule.weights) {
        source += w * spec.source.eval(p);
        if has_reaction {
            reaction += w * spec.reaction.eval(p);
        }
        if let Some(b) = &basis {
            b.gradients_into(p, &mut grads);
        }
        if let Some(a) = adv.as_mut() {
            let beta = [spec.advection[0].eval(p), spec.advection[1].eval(p)];
            if basis.is_some() {
                for (k, g) in grads.iter().enumerate() {
                    a[k] += w * (beta[0] * g[0] + beta[1] * g[1]);
                }
            } else {
                a[0] += w * beta[0];
                a[1] += w * beta[1];
            }
        }
        if let Some(mk) = wgram.as_mut() {
            for j in 0..m {
                let kg = spec.diffusion.apply(grads[j]);
                for i in 0..m {
                    mk[(i, j)] += w * (kg[0] * grads[i][0] + kg[1] * grads[i][1]);
                }
            }
        }
    }
    let weighted_gram = wgram.map(|g: DMatrix<f64>| (&g + g.transpose()) * 0.5);
    Ok(DataIntegrals {
        source,
        reaction,
        advection: adv,
        weighted_gram,
        degree,
        underresolved: degree < needed,
    })
}

/// Stabilization-free local matrices with harmonic degree `ell`.
pub fn sfvem_local(
    element: usize,
    polygon: &[Point],
    spec: &ProblemSpec,
    ell: usize,
    opts: &AssemblyOptions,
) -> Result<LocalElementMatrices> {
    let geom = ElementGeometry::new(polygon)?;
    let n = geom.n();
    let basis = harmonic_basis(geom.frame(), ell);
    let op = projectors::hgrad_operator(&geom, &basis)?;
    let nabla = projectors::nabla_matrix(&geom);
    let pi0 = projectors::pi0_row(&geom, &nabla);
    let data = data_integrals(&geom, spec, Some(ell), opts)?;

    let p = &op.projector;
    let a_diff = match (&data.weighted_gram, spec.diffusion.isotropic()) {
        (Some(mk), _) => p.transpose() * mk * p,
        // the boundary Gram matrix is exact for the unweighted form
        (None, Some(c)) => (p.transpose() * &op.gram * p) * c,
        (None, None) => unreachable!("anisotropic tensor always gets a weighted Gram matrix"),
    };
    let a_diff = 0.5 * (&a_diff + a_diff.transpose());
    let a_adv = match &data.advection {
        Some(a) => &pi0 * (a.transpose() * p),
        None => DMatrix::zeros(n, n),
    };
    let a_reac = (&pi0 * pi0.transpose()) * data.reaction;
    let load = &pi0 * data.source;
    Ok(LocalElementMatrices {
        element,
        method: Method::Sfvem,
        ell: Some(ell),
        a_diff,
        a_adv,
        a_reac,
        load,
        hgrad: Some(op.projector),
        nabla,
        pi0,
        gram_solve: Some(op.solve),
        quad_degree: data.degree,
        underresolved: data.underresolved,
    })
}

/// Standard local matrices: energy-projection consistency plus dofi-dofi
/// stabilization scaled by `stab_scale * trace(K) / 2`.
pub fn standard_vem_local(
    element: usize,
    polygon: &[Point],
    spec: &ProblemSpec,
    opts: &AssemblyOptions,
) -> Result<LocalElementMatrices> {
    let geom = ElementGeometry::new(polygon)?;
    let n = geom.n();
    let nabla = projectors::nabla_matrix(&geom);
    let pi0 = projectors::pi0_row(&geom, &nabla);
    let data = data_integrals(&geom, spec, None, opts)?;
    let h = geom.diameter;

    // physical gradients of the projected hat functions, 2 x N
    let grads = nabla.rows(1, 2) / h;
    let k = DMatrix::from_row_slice(2, 2, &[
        spec.diffusion.0[0][0],
        spec.diffusion.0[0][1],
        spec.diffusion.0[1][0],
        spec.diffusion.0[1][1],
    ]);
    let consistency = (grads.transpose() * &k * &grads) * geom.area;

    // dof values of the projection: D * nabla, with D_a = [1, x^_a, y^_a]
    let frame = geom.frame();
    let d = DMatrix::from_fn(n, 3, |a, c| {
        let q = frame.local(geom.vertices[a]);
        [1.0, q[0], q[1]][c]
    });
    let remainder = DMatrix::identity(n, n) - &d * &nabla;
    let tau = opts.stab_scale * spec.diffusion.trace() / 2.0;
    let stab = (remainder.transpose() * &remainder) * tau;
    let a_diff = consistency + stab;
    let a_diff = 0.5 * (&a_diff + a_diff.transpose());

    let a_adv = match &data.advection {
        Some(b) => &pi0 * (b.transpose() * &grads),
        None => DMatrix::zeros(n, n),
    };
    let a_reac = (&pi0 * pi0.transpose()) * data.reaction;
    let load = &pi0 * data.source;
    Ok(LocalElementMatrices {
        element,
        method: Method::Vem,
        ell: None,
        a_diff,
        a_adv,
        a_reac,
        load,
        hgrad: None,
        nabla,
        pi0,
        gram_solve: None,
        quad_degree: data.degree,
        underresolved: data.underresolved,
    })
}

/// Dispatches on `method`, choosing `ell` from the degree rule.
pub fn local_matrices(
    element: usize,
    polygon: &[Point],
    spec: &ProblemSpec,
    method: Method,
    opts: &AssemblyOptions,
) -> Result<LocalElementMatrices> {
    match method {
        Method::Sfvem => sfvem_local(element, polygon, spec, ell_rule(polygon.len(), opts.ell_offset), opts),
        Method::Vem => standard_vem_local(element, polygon, spec, opts),
    }
}
