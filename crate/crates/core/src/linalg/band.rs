use super::sparse::CsrMatrix;
use crate::{Error, Result};

/// Banded LU factorization with partial pivoting of a symmetrically permuted
/// sparse matrix.
///
/// Row `r` stores columns `r - kl ..= r + ku + kl`; the extra `kl`
/// super-diagonals hold the fill created by row interchanges.
#[derive(Debug, Clone)]
pub struct BandLu {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    band: Vec<f64>,
    pivots: Vec<usize>,
    /// `perm[new] = old`
    perm: Vec<usize>,
    min_pivot: f64,
}

impl BandLu {
    /// Factors `P A P^T` where `perm[new] = old`. Fails when a pivot falls
    /// to `rel_tol * max|a_ij|` or below.
    pub fn factor(a: &CsrMatrix, perm: &[usize], rel_tol: f64) -> Result<Self> {
        let n = a.nrows;
        assert_eq!(a.ncols, n);
        assert_eq!(perm.len(), n);
        let mut inv = vec![0usize; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let (mut kl, mut ku) = (0usize, 0usize);
        for r in 0..n {
            for (c, _) in a.row(r) {
                let (i, j) = (inv[r], inv[c]);
                if i > j {
                    kl = kl.max(i - j);
                } else {
                    ku = ku.max(j - i);
                }
            }
        }
        let width = 2 * kl + ku + 1;
        let mut lu = Self {
            n,
            kl,
            ku,
            width,
            band: vec![0.0; n * width],
            pivots: vec![0; n],
            perm: perm.to_vec(),
            min_pivot: f64::INFINITY,
        };
        for r in 0..n {
            for (c, v) in a.row(r) {
                let k = lu.slot(inv[r], inv[c]);
                lu.band[k] += v;
            }
        }
        let scale = a.max_abs();
        lu.eliminate(rel_tol * scale)?;
        Ok(lu)
    }

    #[inline]
    fn slot(&self, r: usize, c: usize) -> usize {
        debug_assert!(c + self.kl >= r && c + self.kl - r < self.width);
        r * self.width + (c + self.kl - r)
    }

    fn eliminate(&mut self, tol: f64) -> Result<()> {
        let n = self.n;
        let reach = self.ku + self.kl;
        for k in 0..n {
            let last_row = (k + self.kl).min(n - 1);
            let mut p = k;
            let mut best = self.band[self.slot(k, k)].abs();
            for r in k + 1..=last_row {
                let v = self.band[self.slot(r, k)].abs();
                if v > best {
                    best = v;
                    p = r;
                }
            }
            self.min_pivot = self.min_pivot.min(best);
            if best <= tol || !best.is_finite() {
                return Err(Error::Singular(format!(
                    "pivot {best:.3e} at step {k} of {n} (threshold {tol:.3e}); check that \
                     every cell satisfies the degree rule and the mesh is not degenerate"
                )));
            }
            self.pivots[k] = p;
            let last_col = (k + reach).min(n - 1);
            if p != k {
                for c in k..=last_col {
                    let (i, j) = (self.slot(k, c), self.slot(p, c));
                    self.band.swap(i, j);
                }
            }
            let piv = self.band[self.slot(k, k)];
            for r in k + 1..=last_row {
                let s = self.slot(r, k);
                let l = self.band[s] / piv;
                self.band[s] = l;
                if l == 0.0 {
                    continue;
                }
                for c in k + 1..=last_col {
                    let src = self.band[self.slot(k, c)];
                    let dst = self.slot(r, c);
                    self.band[dst] -= l * src;
                }
            }
        }
        Ok(())
    }

    /// Smallest pivot magnitude met during elimination.
    pub fn min_pivot(&self) -> f64 {
        self.min_pivot
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Solves `A x = b` in the original numbering.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.pivots[k];
            if p != k {
                y.swap(k, p);
            }
            let yk = y[k];
            for r in k + 1..=(k + self.kl).min(n.saturating_sub(1)) {
                y[r] -= self.band[self.slot(r, k)] * yk;
            }
        }
        let reach = self.ku + self.kl;
        for k in (0..n).rev() {
            let mut s = y[k];
            for c in k + 1..=(k + reach).min(n - 1) {
                s -= self.band[self.slot(k, c)] * y[c];
            }
            y[k] = s / self.band[self.slot(k, k)];
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::reverse_cuthill_mckee;

    #[test]
    fn solves_nonsymmetric_system_needing_pivoting() {
        // zero leading diagonal forces an interchange
        let t = vec![
            (0, 1, 2.0),
            (0, 0, 0.0),
            (1, 0, 1.0),
            (1, 1, 1.0),
            (1, 2, 3.0),
            (2, 1, -1.0),
            (2, 2, 4.0),
            (2, 3, 1.0),
            (3, 2, 2.0),
            (3, 3, 5.0),
        ];
        let a = CsrMatrix::from_triplets(4, 4, &t);
        let x_true = [1.0, -2.0, 0.5, 3.0];
        let b = a.matvec(&x_true);
        let perm: Vec<usize> = (0..4).collect();
        let lu = BandLu::factor(&a, &perm, 1e-14).unwrap();
        let x = lu.solve(&b);
        for (u, v) in x.iter().zip(&x_true) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn matches_dense_solve_on_random_sparse() {
        let n = 30;
        let mut t = Vec::new();
        let mut s = 7u64;
        let mut rnd = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
            (s >> 33) as f64 / (1u64 << 31) as f64 - 0.5
        };
        for i in 0..n {
            t.push((i, i, 4.0 + rnd()));
            for j in [i + 3, i + 7] {
                if j < n {
                    t.push((i, j, rnd()));
                    t.push((j, i, rnd()));
                }
            }
        }
        let a = CsrMatrix::from_triplets(n, n, &t);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let perm = reverse_cuthill_mckee(&a);
        let x = BandLu::factor(&a, &perm, 1e-14).unwrap().solve(&b);
        let dense = a.to_dense().lu().solve(&nalgebra::DVector::from_vec(b)).unwrap();
        for i in 0..n {
            assert!((x[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn singular_matrix_reports_pivot() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (0, 1, 1.0), (1, 0, 1.0), (1, 1, 1.0)]);
        let err = BandLu::factor(&a, &[0, 1], 1e-13).unwrap_err();
        assert!(matches!(err, Error::Singular(ref m) if m.contains("pivot")));
    }
}
