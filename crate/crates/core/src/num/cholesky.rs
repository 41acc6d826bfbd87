//! Hermitian positive-definite solves via Cholesky factorization.
//!
//! The matrices here are small (U x U regularized Gram matrices, U <= 16 at
//! desk scale), so a dense LL^H factorization with forward/back substitution
//! is all that is needed.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Dense Hermitian matrix, row-major full storage. Hermitian symmetry is
/// enforced at construction.
#[derive(Debug, Clone)]
pub struct HermitianMatrix {
    n: usize,
    data: Vec<Complex64>,
}

impl HermitianMatrix {
    /// Builds from row-major entries, symmetrizing as (A + A^H)/2 so the
    /// Hermitian invariant holds exactly.
    pub fn from_rows(n: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::LengthMismatch {
                context: "HermitianMatrix::from_rows",
                expected: n * n,
                got: data.len(),
            });
        }
        let mut m = Self { n, data };
        for i in 0..n {
            for j in 0..i {
                let avg = 0.5 * (m.data[i * n + j] + m.data[j * n + i].conj());
                m.data[i * n + j] = avg;
                m.data[j * n + i] = avg.conj();
            }
            let d = m.data[i * n + i];
            m.data[i * n + i] = Complex64::new(d.re, 0.0);
        }
        Ok(m)
    }

    pub fn identity(n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            data[i * n + i] = Complex64::new(1.0, 0.0);
        }
        Self { n, data }
    }

    /// Regularized Gram matrix H^H H + reg I from a B x U channel block
    /// (row-major, rows = receive antennas).
    pub fn gram_regularized(h: &[Complex64], rows: usize, cols: usize, reg: f64) -> Result<Self> {
        if h.len() != rows * cols {
            return Err(Error::LengthMismatch {
                context: "gram_regularized",
                expected: rows * cols,
                got: h.len(),
            });
        }
        let mut data = vec![Complex64::new(0.0, 0.0); cols * cols];
        for i in 0..cols {
            for j in i..cols {
                let mut acc = Complex64::new(0.0, 0.0);
                for r in 0..rows {
                    acc += h[r * cols + i].conj() * h[r * cols + j];
                }
                data[i * cols + j] = acc;
                data[j * cols + i] = acc.conj();
            }
        }
        for i in 0..cols {
            data[i * cols + i] += reg;
        }
        Ok(Self { n: cols, data })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.data[i * self.n + j]
    }

    /// Dense matrix-vector product (used by tests and residual checks).
    pub fn matvec(&self, x: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        (0..n)
            .map(|i| {
                let mut acc = Complex64::new(0.0, 0.0);
                for j in 0..n {
                    acc += self.data[i * n + j] * x[j];
                }
                acc
            })
            .collect()
    }

    /// Lower-triangular Cholesky factor A = L L^H. Fails with a
    /// non-positive pivot when A is not positive definite.
    pub fn cholesky(&self) -> Result<CholeskyFactor> {
        let n = self.n;
        let mut l = vec![Complex64::new(0.0, 0.0); n * n];
        for j in 0..n {
            let mut d = self.data[j * n + j].re;
            for k in 0..j {
                d -= l[j * n + k].norm_sqr();
            }
            if d <= 0.0 || !d.is_finite() {
                return Err(Error::NotPositiveDefinite { pivot: j });
            }
            let dj = d.sqrt();
            l[j * n + j] = Complex64::new(dj, 0.0);
            for i in (j + 1)..n {
                let mut acc = self.data[i * n + j];
                for k in 0..j {
                    acc -= l[i * n + k] * l[j * n + k].conj();
                }
                l[i * n + j] = acc / dj;
            }
        }
        Ok(CholeskyFactor { n, l })
    }

    /// Convenience: factor and solve A x = b.
    pub fn solve(&self, b: &[Complex64]) -> Result<Vec<Complex64>> {
        if b.len() != self.n {
            return Err(Error::LengthMismatch {
                context: "HermitianMatrix::solve",
                expected: self.n,
                got: b.len(),
            });
        }
        Ok(self.cholesky()?.solve(b))
    }
}

/// Lower-triangular factor of a Hermitian positive-definite matrix.
#[derive(Debug, Clone)]
pub struct CholeskyFactor {
    n: usize,
    l: Vec<Complex64>,
}

impl CholeskyFactor {
    /// Solves A x = b given A = L L^H.
    pub fn solve(&self, b: &[Complex64]) -> Vec<Complex64> {
        let n = self.n;
        debug_assert_eq!(b.len(), n);
        // forward: L y = b
        let mut y = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                let lik = self.l[i * n + k];
                y[i] = y[i] - lik * y[k];
            }
            y[i] /= self.l[i * n + i].re;
        }
        // backward: L^H x = y
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                let lki = self.l[k * n + i].conj();
                y[i] = y[i] - lki * y[k];
            }
            y[i] /= self.l[i * n + i].re;
        }
        y
    }

    /// Diagonal of A^{-1}: (A^{-1})_{uu} = || L^{-1} e_u ||^2.
    pub fn inverse_diagonal(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n];
        let mut z = vec![Complex64::new(0.0, 0.0); n];
        for u in 0..n {
            for zi in z.iter_mut() {
                *zi = Complex64::new(0.0, 0.0);
            }
            z[u] = Complex64::new(1.0, 0.0);
            // forward solve L z = e_u; entries before u stay zero
            for i in u..n {
                for k in u..i {
                    let lik = self.l[i * n + k];
                    z[i] = z[i] - lik * z[k];
                }
                z[i] /= self.l[i * n + i].re;
            }
            out[u] = z[u..].iter().map(|x| x.norm_sqr()).sum();
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rand_vec(n: usize, seed: u64) -> Vec<Complex64> {
        let mut state = seed.wrapping_mul(0x9e3779b97f4a7c15).wrapping_add(1);
        let mut next = || {
            state = state
                .wrapping_mul(6364136223846793005)
                .wrapping_add(1442695040888963407);
            (state >> 11) as f64 / (1u64 << 53) as f64 - 0.5
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    /// Random SPD matrix M^H M + I.
    fn random_spd(u: usize, seed: u64) -> HermitianMatrix {
        let m = rand_vec(u * u, seed);
        HermitianMatrix::gram_regularized(&m, u, u, 1.0).unwrap()
    }

    /// Gauss-Jordan dense inverse, the general-purpose oracle.
    fn dense_inverse(a: &HermitianMatrix) -> Vec<Complex64> {
        let n = a.dim();
        let mut aug = vec![Complex64::new(0.0, 0.0); n * 2 * n];
        for i in 0..n {
            for j in 0..n {
                aug[i * 2 * n + j] = a.get(i, j);
            }
            aug[i * 2 * n + n + i] = Complex64::new(1.0, 0.0);
        }
        for col in 0..n {
            // partial pivot
            let mut piv = col;
            for r in col + 1..n {
                if aug[r * 2 * n + col].norm() > aug[piv * 2 * n + col].norm() {
                    piv = r;
                }
            }
            if piv != col {
                for j in 0..2 * n {
                    aug.swap(col * 2 * n + j, piv * 2 * n + j);
                }
            }
            let d = aug[col * 2 * n + col];
            for j in 0..2 * n {
                aug[col * 2 * n + j] /= d;
            }
            for r in 0..n {
                if r == col {
                    continue;
                }
                let f = aug[r * 2 * n + col];
                for j in 0..2 * n {
                    let v = aug[col * 2 * n + j];
                    aug[r * 2 * n + j] -= f * v;
                }
            }
        }
        let mut inv = vec![Complex64::new(0.0, 0.0); n * n];
        for i in 0..n {
            for j in 0..n {
                inv[i * n + j] = aug[i * 2 * n + n + j];
            }
        }
        inv
    }

    #[test]
    fn identity_solve_returns_rhs() {
        let a = HermitianMatrix::identity(4);
        let b = rand_vec(4, 11);
        let x = a.solve(&b).unwrap();
        for (xi, bi) in x.iter().zip(&b) {
            assert!((xi - bi).norm() < 1e-14);
        }
    }

    #[test]
    fn diagonal_solve() {
        let a = HermitianMatrix::from_rows(
            2,
            vec![
                Complex64::new(2.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(0.0, 0.0),
                Complex64::new(4.0, 0.0),
            ],
        )
        .unwrap();
        let x = a
            .solve(&[Complex64::new(2.0, 0.0), Complex64::new(8.0, 0.0)])
            .unwrap();
        assert!((x[0] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
        assert!((x[1] - Complex64::new(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn residual_small_on_random_spd_u8() {
        let a = random_spd(8, 5);
        let b = rand_vec(8, 17);
        let x = a.solve(&b).unwrap();
        let r = a.matvec(&x);
        let num: f64 = r
            .iter()
            .zip(&b)
            .map(|(ri, bi)| (ri - bi).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = b.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        assert!(num / den < 1e-10, "residual {num}/{den}");
    }

    #[test]
    fn matches_dense_inverse_oracle_up_to_u16() {
        for u in [2usize, 5, 8, 16] {
            let a = random_spd(u, u as u64 + 31);
            let inv = dense_inverse(&a);
            let b = rand_vec(u, 99 + u as u64);
            let x = a.solve(&b).unwrap();
            for i in 0..u {
                let mut want = Complex64::new(0.0, 0.0);
                for j in 0..u {
                    want += inv[i * u + j] * b[j];
                }
                assert!(
                    (x[i] - want).norm() < 1e-9 * want.norm().max(1.0),
                    "u={u} i={i}"
                );
            }
        }
    }

    #[test]
    fn inverse_diagonal_matches_oracle() {
        let a = random_spd(6, 77);
        let d = a.cholesky().unwrap().inverse_diagonal();
        let inv = dense_inverse(&a);
        for i in 0..6 {
            assert!((d[i] - inv[i * 6 + i].re).abs() < 1e-10);
            assert!(inv[i * 6 + i].im.abs() < 1e-10);
        }
    }

    #[test]
    fn non_positive_definite_is_rejected() {
        let a = HermitianMatrix::from_rows(
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(2.0, 0.0),
                Complex64::new(1.0, 0.0),
            ],
        )
        .unwrap();
        assert!(matches!(
            a.cholesky(),
            Err(Error::NotPositiveDefinite { pivot: 1 })
        ));
    }
}
