//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use sfvem::Point;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `int_P x^p y^q dA` by Green's theorem, summed edge by edge in closed form.
/// Exact for any simple counter-clockwise polygon.
pub fn monomial_integral(poly: &[Point], p: usize, q: usize) -> f64 {
    // p! q! / (p + q + 2)!
    let lead = 1.0 / ((p + q + 1) as f64 * (p + q + 2) as f64 * binom(p + q, p));
    let n = poly.len();
    let mut total = 0.0;
    for i in 0..n {
        let [x0, y0] = poly[i];
        let [x1, y1] = poly[(i + 1) % n];
        let cross = x0 * y1 - x1 * y0;
        let mut s = 0.0;
        for k in 0..=p {
            for l in 0..=q {
                s += binom(k + l, l)
                    * binom(p + q - k - l, q - l)
                    * x0.powi(k as i32)
                    * x1.powi((p - k) as i32)
                    * y0.powi(l as i32)
                    * y1.powi((q - l) as i32);
            }
        }
        total += cross * s;
    }
    lead * total
}

/// Scale for relative comparisons: `|P| max|x|^p max|y|^q` bounds the
/// magnitude of the integral even when it cancels to zero.
pub fn monomial_scale(poly: &[Point], p: usize, q: usize) -> f64 {
    let mx = poly.iter().fold(0.0f64, |m, v| m.max(v[0].abs()));
    let my = poly.iter().fold(0.0f64, |m, v| m.max(v[1].abs()));
    monomial_integral(poly, 0, 0).abs() * mx.powi(p as i32) * my.powi(q as i32)
}

/// Minimal degree with `2 ell + 2 >= n - 1`, listed by hand.
pub const DEGREE_TABLE: [(usize, usize); 16] = [
    (3, 0),
    (4, 1),
    (5, 1),
    (6, 2),
    (7, 2),
    (8, 3),
    (9, 3),
    (10, 4),
    (11, 4),
    (12, 5),
    (13, 5),
    (14, 6),
    (15, 6),
    (16, 7),
    (17, 7),
    (18, 8),
];
