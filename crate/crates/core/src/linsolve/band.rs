//! Band factorizations on a reverse Cuthill–McKee reordering.

use super::{reverse_cuthill_mckee, CsrMatrix, Scalar};
use crate::error::{invalid, Error, Result};
use std::ops::Mul;

struct Reordered<T> {
    perm: Vec<usize>,
    matrix: CsrMatrix<T>,
}

fn reorder<T: Scalar>(a: &CsrMatrix<T>) -> Result<Reordered<T>> {
    if a.nrows() != a.ncols() {
        return Err(invalid(format!("square matrix required, got {}x{}", a.nrows(), a.ncols())));
    }
    let perm = reverse_cuthill_mckee(&a.symmetric_pattern());
    let matrix = a.permute_symmetric(&perm)?;
    Ok(Reordered { perm, matrix })
}

/// LU factorization with partial (row) pivoting restricted to the band,
/// stored LAPACK-`gbtrf` style: `U` has upper bandwidth `kl + ku`.
#[derive(Debug, Clone)]
pub struct BandLu<T> {
    n: usize,
    kl: usize,
    ku: usize,
    width: usize,
    perm: Vec<usize>,
    piv: Vec<usize>,
    band: Vec<T>,
}

impl<T: Scalar> BandLu<T> {
    pub fn factor(a: &CsrMatrix<T>) -> Result<Self> {
        let Reordered { perm, matrix } = reorder(a)?;
        let n = matrix.nrows();
        let (kl, ku) = matrix.bandwidths();
        let width = 2 * kl + ku + 1;
        let mut lu = BandLu {
            n,
            kl,
            ku,
            width,
            perm,
            piv: vec![0; n],
            band: vec![T::zero(); n * width],
        };
        let mut scale: f64 = 0.0;
        for (i, j, v) in matrix.triplets() {
            let idx = lu.idx(i, j);
            lu.band[idx] = v;
            scale = scale.max(v.modulus());
        }
        if scale == 0.0 && n > 0 {
            return Err(Error::Singular { pivot: 0, size: n });
        }
        let tiny = scale * f64::EPSILON * 4.0;

        for k in 0..n {
            let last_row = (k + kl).min(n - 1);
            let last_col = (k + kl + ku).min(n - 1);
            let mut p = k;
            let mut best = lu.band[lu.idx(k, k)].modulus();
            for i in k + 1..=last_row {
                let m = lu.band[lu.idx(i, k)].modulus();
                if m > best {
                    best = m;
                    p = i;
                }
            }
            if best <= tiny {
                return Err(Error::Singular { pivot: k, size: n });
            }
            lu.piv[k] = p;
            if p != k {
                for c in k..=last_col {
                    let (ik, ip) = (lu.idx(k, c), lu.idx(p, c));
                    lu.band.swap(ik, ip);
                }
            }
            let pivot = lu.band[lu.idx(k, k)];
            for i in k + 1..=last_row {
                let ik = lu.idx(i, k);
                let l = lu.band[ik] / pivot;
                lu.band[ik] = l;
                if l != T::zero() {
                    let row_k = lu.idx(k, k + 1);
                    let row_i = lu.idx(i, k + 1);
                    for off in 0..last_col - k {
                        let u = lu.band[row_k + off];
                        lu.band[row_i + off] -= l * u;
                    }
                }
            }
        }
        Ok(lu)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j + self.kl >= i && j <= i + self.kl + self.ku);
        i * self.width + (j + self.kl - i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Lower and upper bandwidth of the reordered matrix.
    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<T> = self.perm.iter().map(|&old| b[old]).collect();
        for k in 0..n {
            let p = self.piv[k];
            if p != k {
                x.swap(k, p);
            }
            let xk = x[k];
            if xk != T::zero() {
                for i in k + 1..=(k + self.kl).min(n - 1) {
                    x[i] -= self.band[self.idx(i, k)] * xk;
                }
            }
        }
        for k in (0..n).rev() {
            let mut s = x[k];
            for c in k + 1..=(k + self.kl + self.ku).min(n - 1) {
                s -= self.band[self.idx(k, c)] * x[c];
            }
            x[k] = s / self.band[self.idx(k, k)];
        }
        let mut out = vec![T::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

/// Cholesky factorization `P A P^T = L L^T` of a real symmetric positive
/// definite matrix in lower band storage.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    bw: usize,
    perm: Vec<usize>,
    band: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &CsrMatrix<f64>) -> Result<Self> {
        let Reordered { perm, matrix } = reorder(a)?;
        let n = matrix.nrows();
        let (kl, ku) = matrix.bandwidths();
        let bw = kl.max(ku);
        let mut ch = BandCholesky { n, bw, perm, band: vec![0.0; n * (bw + 1)] };
        for (i, j, v) in matrix.triplets() {
            if j <= i {
                let idx = ch.idx(i, j);
                ch.band[idx] = v;
            }
        }
        for j in 0..n {
            for i in j..(j + bw + 1).min(n) {
                let k0 = i.saturating_sub(bw);
                let mut s = ch.band[ch.idx(i, j)];
                for k in k0..j {
                    s -= ch.band[ch.idx(i, k)] * ch.band[ch.idx(j, k)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NotSpd { pivot: j, size: n });
                    }
                    let idx = ch.idx(j, j);
                    ch.band[idx] = s.sqrt();
                } else {
                    let d = ch.band[ch.idx(j, j)];
                    let idx = ch.idx(i, j);
                    ch.band[idx] = s / d;
                }
            }
        }
        Ok(ch)
    }

    #[inline]
    fn idx(&self, i: usize, j: usize) -> usize {
        debug_assert!(j <= i && i - j <= self.bw);
        i * (self.bw + 1) + (j + self.bw - i)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidth(&self) -> usize {
        self.bw
    }

    /// Solves `A x = b` for real or complex right-hand sides.
    pub fn solve<U>(&self, b: &[U]) -> Vec<U>
    where
        U: Scalar + Mul<f64, Output = U>,
    {
        assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<U> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let mut s = x[i];
            for k in i.saturating_sub(self.bw)..i {
                s -= x[k] * self.band[self.idx(i, k)];
            }
            x[i] = s * (1.0 / self.band[self.idx(i, i)]);
        }
        for i in (0..n).rev() {
            let mut s = x[i];
            for k in i + 1..(i + self.bw + 1).min(n) {
                s -= x[k] * self.band[self.idx(k, i)];
            }
            x[i] = s * (1.0 / self.band[self.idx(i, i)]);
        }
        let mut out = vec![U::zero(); n];
        for (new, &old) in self.perm.iter().enumerate() {
            out[old] = x[new];
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linsolve::TripletBuilder;
    use crate::C64;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual<T: Scalar>(a: &CsrMatrix<T>, x: &[T], b: &[T]) -> f64
    where
        T: Mul<T, Output = T>,
    {
        let ax = a.mul_vec(x);
        ax.iter().zip(b).map(|(p, q)| (*p - *q).modulus().powi(2)).sum::<f64>().sqrt()
    }

    fn norm<T: Scalar>(v: &[T]) -> f64 {
        v.iter().map(|x| x.modulus().powi(2)).sum::<f64>().sqrt()
    }

    #[test]
    fn lu_identity() {
        let a = CsrMatrix::<f64>::identity(4);
        let lu = BandLu::factor(&a).unwrap();
        assert_eq!(lu.solve(&[1.0, -2.0, 3.0, 0.5]), vec![1.0, -2.0, 3.0, 0.5]);
    }

    #[test]
    fn lu_needs_pivoting() {
        let a = CsrMatrix::from_dense_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]);
        let lu = BandLu::factor(&a).unwrap();
        assert_eq!(lu.solve(&[3.0, 7.0]), vec![7.0, 3.0]);
    }

    #[test]
    fn lu_detects_singularity() {
        let a = CsrMatrix::from_dense_rows(&[vec![1.0, 2.0], vec![2.0, 4.0]]);
        assert!(matches!(BandLu::factor(&a), Err(Error::Singular { .. })));
    }

    #[test]
    fn lu_random_complex_symmetric_shifted() {
        // 200x200 sparse complex-symmetric with a -i mass-like shift
        let n = 200;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut b = TripletBuilder::new(n, n);
        for i in 0..n {
            b.push(i, i, C64::new(2.0 + rng.random::<f64>(), -1.0));
            for _ in 0..3 {
                let j = rng.random_range(0..n);
                if j != i {
                    let v = C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5);
                    b.push(i, j, v);
                    b.push(j, i, v);
                }
            }
        }
        let a = b.build();
        let rhs: Vec<C64> = (0..n).map(|i| C64::new((i as f64).sin(), 1.0)).collect();
        let lu = BandLu::factor(&a).unwrap();
        let x = lu.solve(&rhs);
        let bound = 1e-10 * (a.frobenius_norm() * norm(&x) + norm(&rhs));
        assert!(residual(&a, &x, &rhs) <= bound);
    }

    #[test]
    fn cholesky_diagonal_halves() {
        let mut b = TripletBuilder::new(3, 3);
        for i in 0..3 {
            b.push(i, i, 2.0);
        }
        let ch = BandCholesky::factor(&b.build()).unwrap();
        let x = ch.solve(&[2.0, 4.0, -6.0]);
        for (a, b) in x.iter().zip([1.0, 2.0, -3.0]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn cholesky_random_gram() {
        let n = 40;
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random::<f64>() - 0.5).collect()).collect();
        let mut rows = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..n {
                rows[i][j] = (0..n).map(|k| g[k][i] * g[k][j]).sum::<f64>() + if i == j { 1.0 } else { 0.0 };
            }
        }
        let a = CsrMatrix::from_dense_rows(&rows);
        let rhs: Vec<f64> = (0..n).map(|i| (i as f64 * 0.3).cos()).collect();
        let x = BandCholesky::factor(&a).unwrap().solve(&rhs);
        assert!(residual(&a, &x, &rhs) <= 1e-12 * (a.frobenius_norm() * norm(&x) + norm(&rhs)));
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let a = CsrMatrix::from_dense_rows(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(BandCholesky::factor(&a), Err(Error::NotSpd { .. })));
    }
}
