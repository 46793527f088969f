//! Bivariate polynomials, scaled harmonic bases and the anisotropic benchmark.
//!
//! [`Poly2`] is a dense coefficient table used to carry the coefficient
//! fields of a problem exactly, so the manufactured source term is built by
//! symbolic differentiation rather than finite differences.
//!
//! [`HarmonicBasis`] holds the functions `Re(z^k), Im(z^k)` for `k = 1..=ell+1`
//! with `z = ((x - xc) + i (y - yc)) / h`. These span the harmonic polynomials
//! of degree `ell + 1` modulo constants, which is all the gradient projector
//! needs; no zero-mean normalization is applied.

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::element::{Diffusion, ExactSolution, ProblemSpec};
use crate::geometry::Point;
use crate::Result;

/// Dense polynomial in `x, y` with total degree at most `degree`, expanded
/// about `center`.
///
/// Coefficient of `(x - cx)^a (y - cy)^b` is stored at `a * (degree + 1) + b`;
/// slots with `a + b > degree` stay zero. Expanding about a point inside the
/// region of interest keeps coefficients small for bump-like polynomials,
/// which matters once degrees reach the thirties. Binary operations keep the
/// centre of the operand with the larger storage degree (the left one on
/// ties) and re-expand the other.
#[derive(Debug, Clone)]
pub struct Poly2 {
    degree: usize,
    center: Point,
    coeffs: Vec<f64>,
}

impl Poly2 {
    pub fn zero() -> Self {
        Self::with_degree(0)
    }

    fn with_degree(degree: usize) -> Self {
        Self::with_degree_about(degree, [0.0, 0.0])
    }

    fn with_degree_about(degree: usize, center: Point) -> Self {
        Self {
            degree,
            center,
            coeffs: vec![0.0; (degree + 1) * (degree + 1)],
        }
    }

    pub fn constant(c: f64) -> Self {
        Self::monomial(0, 0, c)
    }

    /// `c * x^a * y^b`
    pub fn monomial(a: usize, b: usize, c: f64) -> Self {
        let mut p = Self::with_degree(a + b);
        p.set(a, b, c);
        p
    }

    pub fn x() -> Self {
        Self::monomial(1, 0, 1.0)
    }

    pub fn y() -> Self {
        Self::monomial(0, 1, 1.0)
    }

    /// Affine polynomial `c + gx * x + gy * y`.
    pub fn linear(c: f64, gx: f64, gy: f64) -> Self {
        let mut p = Self::with_degree(1);
        p.set(0, 0, c);
        p.set(1, 0, gx);
        p.set(0, 1, gy);
        p
    }

    /// Builds a polynomial from `(a, b, coefficient)` triples; repeated
    /// exponents accumulate.
    pub fn from_terms(terms: &[(usize, usize, f64)]) -> Self {
        let degree = terms.iter().map(|&(a, b, _)| a + b).max().unwrap_or(0);
        let mut p = Self::with_degree(degree);
        for &(a, b, c) in terms {
            let old = p.coeff(a, b);
            p.set(a, b, old + c);
        }
        p
    }

    #[inline]
    fn slot(&self, a: usize, b: usize) -> usize {
        a * (self.degree + 1) + b
    }

    /// Expansion point.
    pub fn center(&self) -> Point {
        self.center
    }

    /// Same polynomial expanded about `center`.
    pub fn recentered(&self, center: Point) -> Self {
        if center == self.center {
            return self.clone();
        }
        let d = self.degree;
        let shift = [center[0] - self.center[0], center[1] - self.center[1]];
        // binomial table
        let mut binom = vec![vec![0.0; d + 1]; d + 1];
        for n in 0..=d {
            binom[n][0] = 1.0;
            for k in 1..=n {
                binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0.0 };
            }
        }
        let pow = |base: f64, e: usize| base.powi(e as i32);
        let mut out = Self::with_degree_about(d, center);
        for (a, b, c) in self.terms() {
            for i in 0..=a {
                let cx = c * binom[a][i] * pow(shift[0], a - i);
                if cx == 0.0 {
                    continue;
                }
                for j in 0..=b {
                    let s = out.slot(i, j);
                    out.coeffs[s] += cx * binom[b][j] * pow(shift[1], b - j);
                }
            }
        }
        out
    }

    /// Coefficient of `(x - cx)^a (y - cy)^b` (zero outside the stored range).
    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[self.slot(a, b)]
        }
    }

    fn set(&mut self, a: usize, b: usize, c: f64) {
        debug_assert!(a + b <= self.degree);
        let s = self.slot(a, b);
        self.coeffs[s] = c;
    }

    /// Storage bound on the total degree.
    pub fn capacity_degree(&self) -> usize {
        self.degree
    }

    /// Exact total degree (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        let mut best = 0;
        for a in 0..=self.degree {
            for b in 0..=self.degree - a {
                if self.coeff(a, b) != 0.0 {
                    best = best.max(a + b);
                }
            }
        }
        best
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Iterator over non-zero `(a, b, c)` terms.
    pub fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |a| {
            (0..=self.degree - a).filter_map(move |b| {
                let c = self.coeff(a, b);
                (c != 0.0).then_some((a, b, c))
            })
        })
    }

    /// Nested Horner evaluation.
    pub fn eval(&self, p: Point) -> f64 {
        let d = self.degree;
        let (x, y) = (p[0] - self.center[0], p[1] - self.center[1]);
        let mut acc = 0.0;
        for a in (0..=d).rev() {
            let row = &self.coeffs[a * (d + 1)..a * (d + 1) + (d - a + 1)];
            let mut inner = 0.0;
            for &c in row.iter().rev() {
                inner = inner * y + c;
            }
            acc = acc * x + inner;
        }
        acc
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            degree: self.degree,
            center: self.center,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn dx(&self) -> Self {
        let d = self.degree.max(1) - 1;
        let mut out = Self::with_degree_about(d, self.center);
        for (a, b, c) in self.terms() {
            if a > 0 {
                out.set(a - 1, b, c * a as f64);
            }
        }
        out
    }

    pub fn dy(&self) -> Self {
        let d = self.degree.max(1) - 1;
        let mut out = Self::with_degree_about(d, self.center);
        for (a, b, c) in self.terms() {
            if b > 0 {
                out.set(a, b - 1, c * b as f64);
            }
        }
        out
    }

    pub fn gradient(&self) -> [Poly2; 2] {
        [self.dx(), self.dy()]
    }

    pub fn laplacian(&self) -> Self {
        &self.dx().dx() + &self.dy().dy()
    }

    /// `p(y, x)`
    pub fn swap_xy(&self) -> Self {
        let mut out = Self::with_degree_about(self.degree, [self.center[1], self.center[0]]);
        for (a, b, c) in self.terms() {
            out.set(b, a, c);
        }
        out
    }

    /// Copy with storage shrunk to the exact degree, which makes evaluation cheaper.
    pub fn trimmed(&self) -> Self {
        let d = self.degree();
        let mut out = Self::with_degree_about(d, self.center);
        for (a, b, c) in self.terms() {
            out.set(a, b, c);
        }
        out
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0, |m, c| m.max(c.abs()))
    }

    fn dominant_center(&self, other: &Self) -> Point {
        if self.degree >= other.degree {
            self.center
        } else {
            other.center
        }
    }

    fn combine(&self, other: &Self, sign: f64) -> Self {
        let center = self.dominant_center(other);
        let lhs = self.recentered(center);
        let other = other.recentered(center);
        let d = lhs.degree.max(other.degree);
        let mut out = Self::with_degree_about(d, center);
        for (a, b, c) in lhs.terms() {
            out.set(a, b, c);
        }
        for (a, b, c) in other.terms() {
            let old = out.coeff(a, b);
            out.set(a, b, old + sign * c);
        }
        out
    }
}

impl PartialEq for Poly2 {
    fn eq(&self, other: &Self) -> bool {
        let other = other.recentered(self.center);
        let d = self.degree.max(other.degree);
        (0..=d).all(|a| (0..=d - a).all(|b| self.coeff(a, b) == other.coeff(a, b)))
    }
}

impl Add for &Poly2 {
    type Output = Poly2;
    fn add(self, rhs: &Poly2) -> Poly2 {
        self.combine(rhs, 1.0)
    }
}

impl Sub for &Poly2 {
    type Output = Poly2;
    fn sub(self, rhs: &Poly2) -> Poly2 {
        self.combine(rhs, -1.0)
    }
}

impl Mul for &Poly2 {
    type Output = Poly2;
    fn mul(self, rhs: &Poly2) -> Poly2 {
        let center = self.dominant_center(rhs);
        let lhs = self.recentered(center);
        let rhs = rhs.recentered(center);
        let mut out = Poly2::with_degree_about(lhs.degree + rhs.degree, center);
        for (a, b, c) in lhs.terms() {
            for (p, q, e) in rhs.terms() {
                let s = out.slot(a + p, b + q);
                out.coeffs[s] += c * e;
            }
        }
        out
    }
}

impl Neg for &Poly2 {
    type Output = Poly2;
    fn neg(self) -> Poly2 {
        self.scale(-1.0)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for Poly2 {
            type Output = Poly2;
            fn $m(self, rhs: Poly2) -> Poly2 {
                (&self).$m(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

/// Translation and scale used to evaluate element-local bases.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledFrame {
    pub center: Point,
    pub scale: f64,
}

impl ScaledFrame {
    pub fn new(center: Point, scale: f64) -> Self {
        assert!(scale > 0.0, "frame scale must be positive, got {scale}");
        Self { center, scale }
    }

    #[inline]
    pub fn local(&self, p: Point) -> Point {
        [
            (p[0] - self.center[0]) / self.scale,
            (p[1] - self.center[1]) / self.scale,
        ]
    }
}

/// Harmonic basis `h_{2k-1} = Re z^k`, `h_{2k} = Im z^k`, `k = 1..=ell+1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HarmonicBasis {
    pub frame: ScaledFrame,
    pub ell: usize,
}

/// Builds the harmonic basis of degree `ell + 1` on `frame`.
pub fn harmonic_basis(frame: ScaledFrame, ell: usize) -> HarmonicBasis {
    HarmonicBasis { frame, ell }
}

impl HarmonicBasis {
    /// Number of basis functions, `2 * ell + 2`.
    pub fn size(&self) -> usize {
        2 * self.ell + 2
    }

    fn zhat(&self, p: Point) -> Complex64 {
        let q = self.frame.local(p);
        Complex64::new(q[0], q[1])
    }

    /// Values of every basis function at `p`.
    pub fn values(&self, p: Point) -> Vec<f64> {
        let z = self.zhat(p);
        let mut out = Vec::with_capacity(self.size());
        let mut zk = Complex64::new(1.0, 0.0);
        for _ in 0..=self.ell {
            zk *= z;
            out.push(zk.re);
            out.push(zk.im);
        }
        out
    }

    /// Gradients of every basis function at `p`.
    pub fn gradients(&self, p: Point) -> Vec<[f64; 2]> {
        let mut out = vec![[0.0; 2]; self.size()];
        self.gradients_into(p, &mut out);
        out
    }

    /// Allocation-free form of [`gradients`](Self::gradients).
    pub fn gradients_into(&self, p: Point, out: &mut [[f64; 2]]) {
        let z = self.zhat(p);
        let inv_h = 1.0 / self.frame.scale;
        let mut zk1 = Complex64::new(1.0, 0.0); // z^(k-1)
        for k in 1..=self.ell + 1 {
            let s = k as f64 * inv_h;
            out[2 * k - 2] = [s * zk1.re, -s * zk1.im];
            out[2 * k - 1] = [s * zk1.im, s * zk1.re];
            zk1 *= z;
        }
    }

    /// Expands basis member `i` (0-based) into monomial form in global coordinates.
    pub fn to_poly2(&self, i: usize) -> Poly2 {
        assert!(i < self.size());
        let h = self.frame.scale;
        let xs = Poly2::linear(-self.frame.center[0] / h, 1.0 / h, 0.0);
        let ys = Poly2::linear(-self.frame.center[1] / h, 0.0, 1.0 / h);
        let (mut re, mut im) = (Poly2::constant(1.0), Poly2::zero());
        for _ in 0..=i / 2 {
            let nre = &(&re * &xs) - &(&im * &ys);
            let nim = &(&re * &ys) + &(&im * &xs);
            re = nre;
            im = nim;
        }
        if i % 2 == 0 {
            re
        } else {
            im
        }
    }
}

/// Free function form of [`HarmonicBasis::gradients`].
pub fn harmonic_gradients(basis: &HarmonicBasis, point: Point) -> Vec<[f64; 2]> {
    basis.gradients(point)
}

/// Expansion point used for the benchmark polynomials.
pub const BENCHMARK_CENTER: Point = [0.5, 0.5];

/// `x` and `y` expanded about [`BENCHMARK_CENTER`].
fn centered_xy() -> (Poly2, Poly2) {
    (Poly2::x().recentered(BENCHMARK_CENTER), Poly2::y().recentered(BENCHMARK_CENTER))
}

/// `t^4 (r - t) (1 - t)^4`
fn bump(r: f64, var: &Poly2) -> Poly2 {
    let one_minus = &Poly2::constant(1.0) - var;
    let t2 = var * var;
    let t4 = &t2 * &t2;
    let o2 = &one_minus * &one_minus;
    let o4 = &o2 * &o2;
    let r_minus = &Poly2::constant(r) - var;
    &(&t4 * &r_minus) * &o4
}

/// First advection component of the benchmark,
/// `250000 x^4 y^3 (r1 - x)(1 - x)^4 [4 r2 (1 - 5y + 9y^2 - 7y^3 + 2y^4) - 5y + 24y^2 - 42y^3 + 32y^4 - 9y^5]`,
/// which factors as `250000 P(x; r1) P'(y; r2)` with `P(t; r) = t^4 (r - t)(1 - t)^4`.
pub fn benchmark_beta1(r1: f64, r2: f64) -> Poly2 {
    let (x, y) = centered_xy();
    (&bump(r1, &x) * &bump(r2, &y).dy()).scale(250000.0)
}

/// Second advection component, `-beta1(y, x)` with the two shape
/// parameters exchanged so that the pair is divergence free.
pub fn benchmark_beta2(r1: f64, r2: f64) -> Poly2 {
    -&benchmark_beta1(r2, r1).swap_xy()
}

/// Rotated anisotropic tensor `G(theta) diag(1, ratio) G(theta)^T`.
pub fn rotated_tensor(theta: f64, ratio: f64) -> Diffusion {
    let (s, c) = theta.sin_cos();
    let k11 = c * c + ratio * s * s;
    let k22 = s * s + ratio * c * c;
    let k12 = c * s * (1.0 - ratio);
    Diffusion::new([[k11, k12], [k12, k22]])
}

/// Anisotropy ratio of the benchmark tensor.
pub const BENCHMARK_ANISOTROPY: f64 = 1.0e-9;

/// Advection-diffusion-reaction benchmark on the unit square with exact
/// solution `u = beta1`.
pub fn build_benchmark_coefficients(r1: f64, r2: f64, theta: f64) -> Result<ProblemSpec> {
    let beta1 = benchmark_beta1(r1, r2);
    let beta2 = benchmark_beta2(r1, r2);
    let (x, y) = centered_xy();
    let gamma = &(&x * &(&Poly2::constant(1.0) - &x)) * &(&y * &(&Poly2::constant(1.0) - &y));
    let k = rotated_tensor(theta, BENCHMARK_ANISOTROPY);
    let mut spec = ProblemSpec::manufactured(k, [beta1.clone(), beta2], gamma, beta1)?;
    spec.benchmark = Some(crate::element::BenchmarkParams { theta, r1, r2 });
    Ok(spec)
}

/// `u = x(1-x)y(1-y)` with `K = I`, no advection or reaction.
pub fn poisson_bubble() -> Result<ProblemSpec> {
    let (x, y) = centered_xy();
    let u = &(&x * &(&Poly2::constant(1.0) - &x)) * &(&y * &(&Poly2::constant(1.0) - &y));
    ProblemSpec::manufactured(
        Diffusion::identity(),
        [Poly2::zero(), Poly2::zero()],
        Poly2::zero(),
        u,
    )
}

/// Exact-solution record from a polynomial.
pub fn exact_from(u: Poly2) -> ExactSolution {
    let grad = u.gradient();
    ExactSolution { u, grad }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lcg(state: &mut u64) -> f64 {
        *state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        (*state >> 11) as f64 / (1u64 << 53) as f64
    }

    #[test]
    fn ell0_unit_frame_is_x_and_y() {
        let b = harmonic_basis(ScaledFrame::new([0.0, 0.0], 1.0), 0);
        assert_eq!(b.size(), 2);
        assert_eq!(b.to_poly2(0), Poly2::x());
        assert_eq!(b.values([0.3, -0.7]), vec![0.3, -0.7]);
    }

    #[test]
    fn ell1_unit_frame() {
        let b = harmonic_basis(ScaledFrame::new([0.0, 0.0], 1.0), 1);
        let p = [0.4, 1.3];
        let v = b.values(p);
        assert_eq!(v.len(), 4);
        assert!((v[2] - (0.4 * 0.4 - 1.3 * 1.3)).abs() < 1e-15);
        assert!((v[3] - 2.0 * 0.4 * 1.3).abs() < 1e-15);
        let h3 = b.to_poly2(2);
        assert_eq!(h3.coeff(2, 0), 1.0);
        assert_eq!(h3.coeff(0, 2), -1.0);
        assert_eq!(b.to_poly2(3).coeff(1, 1), 2.0);
    }

    #[test]
    fn basis_members_are_harmonic_and_have_exact_degree() {
        let b = harmonic_basis(ScaledFrame::new([0.3, -0.2], 0.7), 6);
        for i in 0..b.size() {
            let p = b.to_poly2(i);
            assert_eq!(p.degree(), i / 2 + 1);
            let lap = p.laplacian();
            assert!(lap.max_abs_coeff() <= 1e-10 * p.max_abs_coeff(), "member {i}");
        }
    }

    #[test]
    fn finite_difference_laplacian_vanishes() {
        let mut s = 17u64;
        for ell in 0..6 {
            let scale = 0.5;
            let b = harmonic_basis(ScaledFrame::new([0.1, 0.2], scale), ell);
            for _ in 0..5 {
                let p = [0.1 + scale * (lcg(&mut s) - 0.5), 0.2 + scale * (lcg(&mut s) - 0.5)];
                let d = 1e-4 * scale;
                let c = b.values(p);
                let xp = b.values([p[0] + d, p[1]]);
                let xm = b.values([p[0] - d, p[1]]);
                let yp = b.values([p[0], p[1] + d]);
                let ym = b.values([p[0], p[1] - d]);
                for i in 0..b.size() {
                    let lap = (xp[i] + xm[i] + yp[i] + ym[i] - 4.0 * c[i]) / (d * d);
                    assert!(lap.abs() <= 1e-6 / (scale * scale), "ell {ell} i {i}: {lap}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_central_differences() {
        let mut s = 5u64;
        let b = harmonic_basis(ScaledFrame::new([0.5, 0.5], 0.3), 4);
        for _ in 0..10 {
            let p = [lcg(&mut s), lcg(&mut s)];
            let g = b.gradients(p);
            let d = 1e-6;
            let xp = b.values([p[0] + d, p[1]]);
            let xm = b.values([p[0] - d, p[1]]);
            let yp = b.values([p[0], p[1] + d]);
            let ym = b.values([p[0], p[1] - d]);
            for i in 0..b.size() {
                let fd = [(xp[i] - xm[i]) / (2.0 * d), (yp[i] - ym[i]) / (2.0 * d)];
                let norm = g[i][0].hypot(g[i][1]).max(1e-3);
                assert!((fd[0] - g[i][0]).abs() <= 1e-7 * norm, "{i}");
                assert!((fd[1] - g[i][1]).abs() <= 1e-7 * norm, "{i}");
            }
        }
    }

    #[test]
    fn first_gradients_are_constant_and_quadratic_ones_vanish_at_center() {
        let f = ScaledFrame::new([0.2, 0.9], 0.25);
        let b = harmonic_basis(f, 1);
        let g = b.gradients([7.0, -3.0]);
        assert_eq!(g[0], [4.0, 0.0]);
        assert_eq!(g[1], [0.0, 4.0]);
        let g = b.gradients(f.center);
        assert_eq!(g[2], [0.0, 0.0]);
        assert_eq!(g[3], [0.0, 0.0]);
    }

    #[test]
    fn poly_derivative_rules() {
        let p = Poly2::monomial(3, 2, 1.5);
        assert_eq!(p.dx(), Poly2::monomial(2, 2, 4.5));
        assert_eq!(p.dy().coeff(3, 1), 3.0);
        assert!(Poly2::constant(2.0).dx().is_zero());
    }

    #[test]
    fn product_rule_pointwise() {
        let mut s = 99u64;
        for _ in 0..20 {
            let mut rnd = || lcg(&mut s) * 2.0 - 1.0;
            let p = Poly2::from_terms(&[(0, 0, rnd()), (2, 1, rnd()), (1, 3, rnd()), (4, 0, rnd())]);
            let q = Poly2::from_terms(&[(1, 0, rnd()), (0, 2, rnd()), (3, 3, rnd())]);
            let pt = [rnd(), rnd()];
            let lhs = (&p * &q).dx().eval(pt);
            let rhs = p.dx().eval(pt) * q.eval(pt) + p.eval(pt) * q.dx().eval(pt);
            assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
            assert!(((&p * &q).eval(pt) - p.eval(pt) * q.eval(pt)).abs() <= 1e-13);
        }
    }

    #[test]
    fn beta1_has_degree_17_and_boundary_zeros() {
        let b1 = benchmark_beta1(0.9, 0.3);
        assert_eq!(b1.degree(), 17);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            assert!(b1.eval([0.0, t]).abs() < 1e-12);
            assert!(b1.eval([1.0, t]).abs() < 1e-12);
            assert!(b1.eval([t, 0.0]).abs() < 1e-12);
            assert!(b1.eval([t, 1.0]).abs() < 1e-12);
        }
    }

    #[test]
    fn benchmark_advection_is_divergence_free() {
        let b1 = benchmark_beta1(0.9, 0.3);
        let b2 = benchmark_beta2(0.9, 0.3);
        // symbolic
        let div = &b1.dx() + &b2.dy();
        assert!(div.max_abs_coeff() <= 1e-9 * b1.max_abs_coeff());
        let mut s = 3u64;
        let gmax = (0..400)
            .map(|i| {
                let p = [(i % 20) as f64 / 19.0, (i / 20) as f64 / 19.0];
                b1.dx().eval(p).abs().max(b1.dy().eval(p).abs())
            })
            .fold(0.0, f64::max);
        for _ in 0..20 {
            let p = [lcg(&mut s), lcg(&mut s)];
            let d = b1.dx().eval(p) + b2.dy().eval(p);
            assert!(d.abs() <= 1e-9 * gmax, "{d}");
        }
    }

    #[test]
    fn beta1_factored_form() {
        // expanded form of the bracket against the factored construction
        let (r1, r2) = (0.9, 0.3);
        let b1 = benchmark_beta1(r1, r2);
        let x = Poly2::x();
        let y = Poly2::y();
        let x4 = &(&x * &x) * &(&x * &x);
        let omx = &Poly2::constant(1.0) - &x;
        let omx4 = &(&omx * &omx) * &(&omx * &omx);
        let y3 = &(&y * &y) * &y;
        let bracket = Poly2::from_terms(&[
            (0, 0, 4.0 * r2),
            (0, 1, -20.0 * r2 - 5.0),
            (0, 2, 36.0 * r2 + 24.0),
            (0, 3, -28.0 * r2 - 42.0),
            (0, 4, 8.0 * r2 + 32.0),
            (0, 5, -9.0),
        ]);
        let f = (&(&(&x4 * &(&Poly2::constant(r1) - &x)) * &omx4) * &(&y3 * &bracket)).scale(250000.0);
        for i in 0..=10 {
            for j in 0..=10 {
                let p = [i as f64 / 10.0, j as f64 / 10.0];
                assert!((b1.eval(p) - f.eval(p)).abs() <= 1e-7, "{p:?}");
            }
        }
    }

    #[test]
    fn benchmark_source_consistent() {
        let spec = build_benchmark_coefficients(0.9, 0.3, std::f64::consts::FRAC_PI_6).unwrap();
        let ex = spec.exact.as_ref().unwrap();
        let p = [0.37, 0.61];
        let k = spec.diffusion.0;
        let h = 1e-4;
        let u = |q: Point| ex.u.eval(q);
        let uxx = (u([p[0] + h, p[1]]) - 2.0 * u(p) + u([p[0] - h, p[1]])) / (h * h);
        let uyy = (u([p[0], p[1] + h]) - 2.0 * u(p) + u([p[0], p[1] - h])) / (h * h);
        let uxy = (u([p[0] + h, p[1] + h]) - u([p[0] + h, p[1] - h]) - u([p[0] - h, p[1] + h])
            + u([p[0] - h, p[1] - h]))
            / (4.0 * h * h);
        let ux = ex.grad[0].eval(p);
        let uy = ex.grad[1].eval(p);
        let f = -(k[0][0] * uxx + 2.0 * k[0][1] * uxy + k[1][1] * uyy)
            + spec.advection[0].eval(p) * ux
            + spec.advection[1].eval(p) * uy
            + spec.reaction.eval(p) * u(p);
        let fs = spec.source.eval(p);
        assert!((f - fs).abs() <= 1e-5 * fs.abs().max(1.0), "{f} vs {fs}");
    }

    #[test]
    fn rotated_tensor_eigenvalues() {
        let k = rotated_tensor(0.3, 1e-9).0;
        let tr = k[0][0] + k[1][1];
        let det = k[0][0] * k[1][1] - k[0][1] * k[1][0];
        assert!((tr - (1.0 + 1e-9)).abs() < 1e-15);
        assert!((det - 1e-9).abs() < 1e-15);
    }
}
