//! Gauss-Legendre edge rules and polygon rules built from collapsed
//! (Duffy) tensor rules on a fan sub-triangulation.

use crate::geometry::{self, Point};
use crate::{Error, Result};

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl EdgeRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrates `f` over `[a, b]`.
    pub fn integrate<F: Fn(f64) -> f64>(&self, a: f64, b: f64, f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self
            .nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(mid + half * t))
            .sum::<f64>()
    }
}

const NEWTON_MAX_ITERS: usize = 100;
const NEWTON_TOL: f64 = 1e-15;

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, x);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// `n`-point Gauss-Legendre rule; nodes are found by Newton iteration from
/// Chebyshev-type initial guesses and returned in ascending order.
pub fn gauss_legendre(n: usize) -> Result<EdgeRule> {
    if n == 0 {
        return Err(Error::InvalidParameter("Gauss-Legendre rule needs n >= 1".into()));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut converged = false;
        let mut dp = 0.0;
        for _ in 0..NEWTON_MAX_ITERS {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Numerical(format!(
                "Gauss-Legendre Newton iteration did not converge (n = {n}, root {i})"
            )));
        }
        // refresh the derivative at the converged node
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    Ok(EdgeRule { nodes, weights })
}

/// Gauss nodes needed to integrate a univariate polynomial of `degree` exactly.
pub fn nodes_for_degree(degree: usize) -> usize {
    (degree + 2) / 2
}

/// Integral of `f` along the segment `a -> b` with an `n`-point rule.
pub fn edge_integral<F: Fn(Point) -> f64>(a: Point, b: Point, f: F, n: usize) -> Result<f64> {
    let rule = gauss_legendre(n)?;
    Ok(edge_integral_with(&rule, a, b, f))
}

/// Same as [`edge_integral`] with a prebuilt rule.
pub fn edge_integral_with<F: Fn(Point) -> f64>(rule: &EdgeRule, a: Point, b: Point, f: F) -> f64 {
    let len = geometry::dist(a, b);
    let s = rule.integrate(0.0, 1.0, |t| f([a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]));
    s * len
}

/// Points and weights integrating over one polygon.
#[derive(Debug, Clone)]
pub struct PolygonRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl PolygonRule {
    pub fn integrate<F: FnMut(Point) -> f64>(&self, mut f: F) -> f64 {
        self.points
            .iter()
            .zip(&self.weights)
            .map(|(&p, &w)| w * f(p))
            .sum()
    }

    pub fn total_weight(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Collapsed tensor rule on the reference triangle `{(0,0), (1,0), (0,1)}`,
/// exact for total degree `degree`. Entries are `(xi, eta, weight)`.
fn reference_triangle(degree: usize) -> Result<Vec<(f64, f64, f64)>> {
    // x = u (1 - v), y = u v with Jacobian u: the u-direction carries one
    // extra degree.
    let gu = gauss_legendre(nodes_for_degree(degree + 1))?;
    let gv = gauss_legendre(nodes_for_degree(degree))?;
    let mut out = Vec::with_capacity(gu.len() * gv.len());
    for (&tu, &wu) in gu.nodes.iter().zip(&gu.weights) {
        let u = 0.5 * (tu + 1.0);
        for (&tv, &wv) in gv.nodes.iter().zip(&gv.weights) {
            let v = 0.5 * (tv + 1.0);
            out.push((u * (1.0 - v), u * v, 0.25 * wu * wv * u));
        }
    }
    Ok(out)
}

fn triangles_for(polygon: &[Point]) -> Result<Vec<[Point; 3]>> {
    let n = polygon.len();
    if n < 3 {
        return Err(Error::Geometry(format!("polygon with {n} vertices")));
    }
    if n == 3 {
        return Ok(vec![[polygon[0], polygon[1], polygon[2]]]);
    }
    let c = geometry::vertex_average(polygon);
    let fan: Vec<[Point; 3]> = (0..n).map(|i| [c, polygon[i], polygon[(i + 1) % n]]).collect();
    let fan_ok = fan.iter().all(|t| geometry::signed_area(t) > 0.0);
    if fan_ok {
        return Ok(fan);
    }
    let ears = geometry::ear_clip(polygon).ok_or_else(|| {
        Error::Geometry("polygon is not simple: fan and ear-clipping triangulation both failed".into())
    })?;
    Ok(ears
        .into_iter()
        .map(|t| [polygon[t[0]], polygon[t[1]], polygon[t[2]]])
        .collect())
}

/// Quadrature over a simple CCW polygon, exact for polynomials of total
/// degree `degree`.
pub fn polygon_rule(polygon: &[Point], degree: usize) -> Result<PolygonRule> {
    let tris = triangles_for(polygon)?;
    let reference = reference_triangle(degree)?;
    let mut points = Vec::with_capacity(tris.len() * reference.len());
    let mut weights = Vec::with_capacity(tris.len() * reference.len());
    for [a, b, c] in tris {
        let e1 = geometry::sub(b, a);
        let e2 = geometry::sub(c, a);
        let jac = geometry::cross(e1, e2);
        for &(xi, eta, w) in &reference {
            points.push([a[0] + xi * e1[0] + eta * e2[0], a[1] + xi * e1[1] + eta * e2[1]]);
            weights.push(w * jac);
        }
    }
    Ok(PolygonRule { points, weights, degree })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_point_rule_is_midpoint() {
        let r = gauss_legendre(1).unwrap();
        assert_eq!(r.nodes, vec![0.0]);
        assert_eq!(r.weights, vec![2.0]);
    }

    #[test]
    fn two_point_rule() {
        let r = gauss_legendre(2).unwrap();
        let x = 1.0 / 3f64.sqrt();
        assert!((r.nodes[0] + x).abs() < 1e-15 && (r.nodes[1] - x).abs() < 1e-15);
        assert!((r.weights[0] - 1.0).abs() < 1e-15 && (r.weights[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn five_point_rule_moments() {
        let r = gauss_legendre(5).unwrap();
        assert!(r.integrate(-1.0, 1.0, |x| x.powi(9)).abs() <= 1e-15);
        assert!((r.integrate(-1.0, 1.0, |x| x.powi(8)) - 2.0 / 9.0).abs() <= 1e-14);
    }

    #[test]
    fn weights_sum_and_exactness() {
        for n in 1..=30 {
            let r = gauss_legendre(n).unwrap();
            let s: f64 = r.weights.iter().sum();
            assert!((s - 2.0).abs() < 1e-13, "n={n}");
            for p in 0..2 * n {
                let exact = if p % 2 == 1 { 0.0 } else { 2.0 / (p as f64 + 1.0) };
                let q = r.integrate(-1.0, 1.0, |x| x.powi(p as i32));
                assert!((q - exact).abs() < 1e-13, "n={n} p={p}");
            }
        }
    }

    #[test]
    fn zero_nodes_rejected() {
        assert!(gauss_legendre(0).is_err());
    }

    #[test]
    fn node_count_law() {
        // degree ell+1 integrand -> ceil((ell+2)/2); degree 2 ell + 1 -> ell + 1
        for ell in 0..12 {
            assert_eq!(nodes_for_degree(ell + 1), (ell + 2).div_ceil(2));
            assert_eq!(nodes_for_degree(2 * ell + 1), ell + 1);
        }
    }

    #[test]
    fn edge_integrals() {
        let l = edge_integral([0.0, 0.0], [3.0, 4.0], |_| 1.0, 1).unwrap();
        assert!((l - 5.0).abs() < 1e-15);
        let m = edge_integral([0.0, 0.0], [1.0, 0.0], |p| p[0], 1).unwrap();
        assert_eq!(m, 0.5);
        let c = edge_integral([0.0, 0.0], [1.0, 0.0], |p| p[0].powi(3), 2).unwrap();
        assert!((c - 0.25).abs() < 1e-15);
    }

    #[test]
    fn polygon_rules_on_simple_shapes() {
        let sq = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]];
        let r0 = polygon_rule(&sq, 0).unwrap();
        assert!((r0.integrate(|_| 1.0) - 1.0).abs() < 1e-15);
        let r4 = polygon_rule(&sq, 4).unwrap();
        assert!((r4.integrate(|p| p[0] * p[0] * p[1] * p[1]) - 1.0 / 9.0).abs() < 1e-14);
        let hex: Vec<Point> = (0..6)
            .map(|k| {
                let t = std::f64::consts::PI * k as f64 / 3.0;
                [t.cos(), t.sin()]
            })
            .collect();
        let rh = polygon_rule(&hex, 0).unwrap();
        assert!((rh.integrate(|_| 1.0) - 1.5 * 3f64.sqrt()).abs() < 1e-13);
    }

    #[test]
    fn non_star_polygon_uses_ear_clipping() {
        // comb-like polygon whose vertex average does not see all edges
        let poly = [
            [0.0, 0.0],
            [3.0, 0.0],
            [3.0, 3.0],
            [2.0, 3.0],
            [2.0, 0.2],
            [1.0, 0.2],
            [1.0, 3.0],
            [0.0, 3.0],
        ];
        let r = polygon_rule(&poly, 2).unwrap();
        let area = geometry::signed_area(&poly);
        assert!((r.total_weight() - area).abs() < 1e-13 * area);
        assert!(r.weights.iter().all(|&w| w > 0.0));
    }

    #[test]
    fn self_intersecting_polygon_is_rejected() {
        let bow = [[0.0, 0.0], [1.0, 1.0], [1.0, 0.0], [0.0, 1.0]];
        assert!(polygon_rule(&bow, 1).is_err());
    }
}
