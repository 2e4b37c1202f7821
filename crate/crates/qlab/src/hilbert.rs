//! Dense complex linear algebra: matrices, tensor products, Hermitian
//! eigendecomposition, and linear solves.
//!
//! Everything here targets the small dimensions of the rest of the crate
//! (a few to a few dozen basis states), so the algorithms are chosen for
//! robustness over asymptotics: cyclic Jacobi rotations for the Hermitian
//! eigenproblem and partial-pivot LU for general solves, plus a factored
//! Thomas path for the tridiagonal systems of the time stepper.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::tol;

/// Inner product `sum conj(a_i) b_i` of two equal-length slices.
pub fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Squared Euclidean norm `sum |a_i|^2`.
pub fn norm_sq(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Dense row-major complex matrix with checked arithmetic.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

impl ComplexMatrix {
    /// Builds a matrix from row-major entries, rejecting length mismatches
    /// and non-finite components.
    pub fn new(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::InvalidArgument {
                reason: format!(
                    "entry count {} does not match {rows}x{cols}",
                    entries.len()
                ),
            });
        }
        for (k, z) in entries.iter().enumerate() {
            if !z.re.is_finite() || !z.im.is_finite() {
                return Err(Error::NonFiniteEntry {
                    row: k / cols,
                    col: k % cols,
                });
            }
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    /// Real matrix lifted to complex, row-major.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::new(
            rows,
            cols,
            entries.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        )
    }

    /// Column vector from a slice of amplitudes.
    pub fn column(v: &[Complex64]) -> Self {
        Self {
            rows: v.len(),
            cols: 1,
            entries: v.to_vec(),
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    /// Matrix product; dimensions are checked, not assumed.
    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        if self.cols != rhs.rows {
            return Err(Error::ShapeMismatch {
                op: "mul",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let mut out = ComplexMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let aik = self[(i, k)];
                if aik == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..rhs.cols {
                    out[(i, j)] += aik * rhs[(k, j)];
                }
            }
        }
        Ok(out)
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "add", |a, b| a + b)
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.zip_with(rhs, "sub", |a, b| a - b)
    }

    fn zip_with(
        &self,
        rhs: &ComplexMatrix,
        op: &'static str,
        f: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<ComplexMatrix> {
        if self.rows != rhs.rows || self.cols != rhs.cols {
            return Err(Error::ShapeMismatch {
                op,
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: rhs.rows,
                right_cols: rhs.cols,
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(&rhs.entries)
            .map(|(&a, &b)| f(a, b))
            .collect();
        Ok(ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries,
        })
    }

    pub fn scale(&self, z: Complex64) -> ComplexMatrix {
        ComplexMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|&e| e * z).collect(),
        }
    }

    /// Conjugate transpose.
    pub fn dagger(&self) -> ComplexMatrix {
        ComplexMatrix::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// Kronecker product with the left factor as the slow index: entry
    /// `(i*b.rows + k, j*b.cols + l)` is `a[i][j] * b[k][l]`. Every
    /// multi-particle basis in the crate derives from this one convention.
    pub fn kron(&self, b: &ComplexMatrix) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(self.rows * b.rows, self.cols * b.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let aij = self[(i, j)];
                for k in 0..b.rows {
                    for l in 0..b.cols {
                        out[(i * b.rows + k, j * b.cols + l)] = aij * b[(k, l)];
                    }
                }
            }
        }
        out
    }

    pub fn trace(&self) -> Complex64 {
        debug_assert!(self.is_square());
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    /// Largest entry magnitude.
    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, rhs: &ComplexMatrix) -> f64 {
        debug_assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.entries
            .iter()
            .zip(&rhs.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Max deviation from Hermiticity, `max |A - A^dagger|`.
    pub fn hermiticity_deviation(&self) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    /// Commutator `AB - BA`.
    pub fn commutator(&self, rhs: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.mul(rhs)?.sub(&rhs.mul(self)?)
    }

    /// Applies the matrix to a vector of amplitudes.
    pub fn apply(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.cols {
            return Err(Error::ShapeMismatch {
                op: "apply",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: v.len(),
                right_cols: 1,
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let row = &self.entries[i * self.cols..(i + 1) * self.cols];
            out[i] = row.iter().zip(v).map(|(&a, &x)| a * x).sum();
        }
        Ok(out)
    }

    pub fn col_vec(&self, j: usize) -> Vec<Complex64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Full eigendecomposition of a Hermitian matrix by cyclic complex
    /// Jacobi rotations. Eigenvalues come out ascending; each eigenvector's
    /// first nonzero component is made real and positive so fixtures are
    /// reproducible.
    pub fn hermitian_eig(&self) -> Result<EigenDecomposition> {
        if !self.is_square() {
            return Err(Error::InvalidArgument {
                reason: format!("eigendecomposition needs a square matrix, got {}x{}", self.rows, self.cols),
            });
        }
        let dev = self.hermiticity_deviation();
        let scale = self.max_abs().max(1.0);
        if dev > tol::VALIDATION * scale.max(1.0) && dev > tol::VALIDATION {
            return Err(Error::NotHermitian { deviation: dev });
        }

        let n = self.rows;
        let mut a = self.clone();
        // symmetrize exactly so rounding in the input cannot bias rotations
        for i in 0..n {
            a[(i, i)] = Complex64::new(a[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let avg = (a[(i, j)] + a[(j, i)].conj()) * 0.5;
                a[(i, j)] = avg;
                a[(j, i)] = avg.conj();
            }
        }
        let mut v = ComplexMatrix::identity(n);

        const MAX_SWEEPS: usize = 100;
        let stop = 1e-15 * scale;
        let mut converged = n < 2;
        for _ in 0..MAX_SWEEPS {
            let mut off: f64 = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(a[(p, q)].norm());
                }
            }
            if off <= stop {
                converged = true;
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[(p, q)];
                    let amag = apq.norm();
                    if amag <= stop * 1e-2 {
                        continue;
                    }
                    let phase = apq / amag; // e^{i phi}
                    let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * amag);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + theta.hypot(1.0))
                    } else {
                        -1.0 / (-theta + theta.hypot(1.0))
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    let se_m = phase.conj() * s; // s e^{-i phi}
                    let se_p = phase * s; // s e^{+i phi}

                    // rows p, q of U^dagger A
                    for j in 0..n {
                        let apj = a[(p, j)];
                        let aqj = a[(q, j)];
                        a[(p, j)] = apj * c - aqj * se_p;
                        a[(q, j)] = apj * s + aqj * c * phase;
                    }
                    // columns p, q of (U^dagger A) U, and accumulate V U
                    for i in 0..n {
                        let aip = a[(i, p)];
                        let aiq = a[(i, q)];
                        a[(i, p)] = aip * c - aiq * se_m;
                        a[(i, q)] = aip * s + aiq * c * phase.conj();
                        let vip = v[(i, p)];
                        let viq = v[(i, q)];
                        v[(i, p)] = vip * c - viq * se_m;
                        v[(i, q)] = vip * s + viq * c * phase.conj();
                    }
                    a[(p, q)] = Complex64::new(0.0, 0.0);
                    a[(q, p)] = Complex64::new(0.0, 0.0);
                }
            }
        }
        if !converged {
            return Err(Error::InvalidArgument {
                reason: "Jacobi eigensolver did not converge".into(),
            });
        }

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
        let eigenvalues: Vec<f64> = order.iter().map(|&i| a[(i, i)].re).collect();
        let mut vectors = ComplexMatrix::from_fn(n, n, |i, j| v[(i, order[j])]);

        for j in 0..n {
            let k = (0..n).find(|&i| vectors[(i, j)].norm() > 1e-8);
            if let Some(k) = k {
                let z = vectors[(k, j)];
                let fix = z.conj() / z.norm();
                for i in 0..n {
                    vectors[(i, j)] *= fix;
                }
            }
        }

        Ok(EigenDecomposition {
            eigenvalues,
            eigenvectors: vectors,
        })
    }

    /// Solves `A x = b` by partial-pivot LU; `b` may carry several
    /// right-hand-side columns.
    pub fn solve(&self, b: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !self.is_square() {
            return Err(Error::InvalidArgument {
                reason: format!("solve needs a square matrix, got {}x{}", self.rows, self.cols),
            });
        }
        if b.rows != self.rows {
            return Err(Error::ShapeMismatch {
                op: "solve",
                left_rows: self.rows,
                left_cols: self.cols,
                right_rows: b.rows,
                right_cols: b.cols,
            });
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut x = b.clone();
        for k in 0..n {
            let (piv_row, piv_mag) = (k..n)
                .map(|i| (i, a[(i, k)].norm()))
                .max_by(|l, r| l.1.total_cmp(&r.1))
                .unwrap();
            if piv_mag <= tol::SINGULAR_PIVOT {
                return Err(Error::Singular {
                    pivot: piv_mag,
                    step: k,
                });
            }
            if piv_row != k {
                for j in 0..n {
                    let tmp = a[(k, j)];
                    a[(k, j)] = a[(piv_row, j)];
                    a[(piv_row, j)] = tmp;
                }
                for j in 0..x.cols {
                    let tmp = x[(k, j)];
                    x[(k, j)] = x[(piv_row, j)];
                    x[(piv_row, j)] = tmp;
                }
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let factor = a[(i, k)] / pivot;
                if factor == Complex64::new(0.0, 0.0) {
                    continue;
                }
                a[(i, k)] = Complex64::new(0.0, 0.0);
                for j in (k + 1)..n {
                    let akj = a[(k, j)];
                    a[(i, j)] -= factor * akj;
                }
                for j in 0..x.cols {
                    let xkj = x[(k, j)];
                    x[(i, j)] -= factor * xkj;
                }
            }
        }
        for j in 0..x.cols {
            for i in (0..n).rev() {
                let mut acc = x[(i, j)];
                for k in (i + 1)..n {
                    acc -= a[(i, k)] * x[(k, j)];
                }
                x[(i, j)] = acc / a[(i, i)];
            }
        }
        Ok(x)
    }

    /// One-norm condition estimate `||A||_1 ||A^-1||_1`, computed by an
    /// explicit inverse solve; intended for the small moment systems where
    /// the cost is irrelevant.
    pub fn condition_estimate(&self) -> Result<f64> {
        let inv = self.solve(&ComplexMatrix::identity(self.rows))?;
        Ok(self.one_norm() * inv.one_norm())
    }

    fn one_norm(&self) -> f64 {
        (0..self.cols)
            .map(|j| (0..self.rows).map(|i| self[(i, j)].norm()).sum())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

/// Spectral data of a Hermitian matrix: ascending eigenvalues and the
/// matching orthonormal eigenvector columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// The identity basis, for callers that want "this matrix's own index
    /// labels" as the pointer basis.
    pub fn standard_basis(dim: usize) -> Self {
        Self {
            eigenvalues: (0..dim).map(|i| i as f64).collect(),
            eigenvectors: ComplexMatrix::identity(dim),
        }
    }

    pub fn eigenvector(&self, j: usize) -> Vec<Complex64> {
        self.eigenvectors.col_vec(j)
    }

    /// Rebuilds `sum_i lambda_i v_i v_i^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.eigenvalues.iter().enumerate() {
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] +=
                        self.eigenvectors[(i, k)] * self.eigenvectors[(j, k)].conj() * lambda;
                }
            }
        }
        out
    }

    /// Coordinates of `m` in this basis: `V^dagger m V`.
    pub fn to_basis(&self, m: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.eigenvectors.dagger().mul(m)?.mul(&self.eigenvectors)
    }

    /// Amplitudes of `v` in this basis: `V^dagger v`.
    pub fn project(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.eigenvectors.dagger().apply(v)
    }

    /// Worst orthonormality defect `max |V^dagger V - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self
            .eigenvectors
            .dagger()
            .mul(&self.eigenvectors)
            .expect("square");
        gram.max_abs_diff(&ComplexMatrix::identity(n))
    }
}

/// Factored Thomas solver for a fixed tridiagonal matrix, reusable across
/// many right-hand sides (the time stepper calls it once per step).
#[derive(Debug, Clone)]
pub struct TridiagonalSolver {
    sub: Vec<Complex64>,
    inv_den: Vec<Complex64>,
    sup_mod: Vec<Complex64>,
}

impl TridiagonalSolver {
    /// `sub` and `sup` have length `n - 1`, `diag` length `n`.
    pub fn new(sub: &[Complex64], diag: &[Complex64], sup: &[Complex64]) -> Result<Self> {
        let n = diag.len();
        if sub.len() + 1 != n || sup.len() + 1 != n || n == 0 {
            return Err(Error::InvalidArgument {
                reason: "tridiagonal bands have inconsistent lengths".into(),
            });
        }
        let mut inv_den = Vec::with_capacity(n);
        let mut sup_mod = Vec::with_capacity(n - 1);
        let mut den = diag[0];
        for i in 0..n {
            if i > 0 {
                den = diag[i] - sub[i - 1] * sup_mod[i - 1];
            }
            if den.norm() <= tol::SINGULAR_PIVOT {
                return Err(Error::Singular {
                    pivot: den.norm(),
                    step: i,
                });
            }
            let inv = Complex64::new(1.0, 0.0) / den;
            inv_den.push(inv);
            if i + 1 < n {
                sup_mod.push(sup[i] * inv);
            }
        }
        Ok(Self {
            sub: sub.to_vec(),
            inv_den,
            sup_mod,
        })
    }

    pub fn solve(&self, rhs: &[Complex64], out: &mut Vec<Complex64>) {
        let n = self.inv_den.len();
        debug_assert_eq!(rhs.len(), n);
        out.clear();
        out.push(rhs[0] * self.inv_den[0]);
        for i in 1..n {
            let prev = out[i - 1];
            out.push((rhs[i] - self.sub[i - 1] * prev) * self.inv_den[i]);
        }
        for i in (0..n - 1).rev() {
            let next = out[i + 1];
            out[i] -= self.sup_mod[i] * next;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn pauli_x() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    pub(crate) fn pauli_y() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)]).unwrap()
    }

    pub(crate) fn pauli_z() -> ComplexMatrix {
        ComplexMatrix::new(2, 2, vec![c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)]).unwrap()
    }

    fn random_matrix(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.next_f64() * 2.0 - 1.0, rng.next_f64() * 2.0 - 1.0)
        })
    }

    fn random_hermitian(n: usize, rng: &mut CounterRng) -> ComplexMatrix {
        let m = random_matrix(n, rng);
        m.add(&m.dagger()).unwrap().scale(c(0.5, 0.0))
    }

    #[test]
    fn identity_is_neutral_for_mul() {
        let mut rng = CounterRng::new(1);
        let x = random_matrix(2, &mut rng);
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(i2.mul(&x).unwrap(), x);
    }

    #[test]
    fn pauli_product_xy_is_i_z() {
        // sigma_x sigma_y = i sigma_z, multiplied out by hand
        let expect = pauli_z().scale(c(0.0, 1.0));
        let got = pauli_x().mul(&pauli_y()).unwrap();
        assert!(got.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn row_times_column_of_ones_is_two() {
        let row = ComplexMatrix::new(1, 2, vec![c(1., 0.), c(1., 0.)]).unwrap();
        let col = ComplexMatrix::new(2, 1, vec![c(1., 0.), c(1., 0.)]).unwrap();
        let s = row.mul(&col).unwrap();
        assert_eq!(s[(0, 0)], c(2.0, 0.0));
    }

    #[test]
    fn mul_rejects_shape_mismatch() {
        let a = ComplexMatrix::zeros(2, 3);
        let b = ComplexMatrix::zeros(2, 3);
        assert!(matches!(a.mul(&b), Err(Error::ShapeMismatch { .. })));
    }

    #[test]
    fn new_rejects_non_finite() {
        let r = ComplexMatrix::new(1, 1, vec![c(f64::NAN, 0.0)]);
        assert!(matches!(r, Err(Error::NonFiniteEntry { .. })));
    }

    #[test]
    fn dagger_is_an_involution() {
        let mut rng = CounterRng::new(2);
        let a = random_matrix(4, &mut rng);
        assert!(a.dagger().dagger().max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn dagger_fixes_real_symmetric() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, -3.0]).unwrap();
        assert!(a.dagger().max_abs_diff(&a) == 0.0);
    }

    #[test]
    fn dagger_conjugates_and_transposes() {
        let a = ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., 1.), c(0., 0.), c(0., 0.)]).unwrap();
        let expect =
            ComplexMatrix::new(2, 2, vec![c(0., 0.), c(0., 0.), c(0., -1.), c(0., 0.)]).unwrap();
        assert_eq!(a.dagger(), expect);
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert!(i2.kron(&i2).max_abs_diff(&ComplexMatrix::identity(4)) == 0.0);
    }

    #[test]
    fn kron_basis_ordering_up_down() {
        // |up> kron |down> lands on the second slot of {uu, ud, du, dd}
        let up = ComplexMatrix::column(&[c(1., 0.), c(0., 0.)]);
        let down = ComplexMatrix::column(&[c(0., 0.), c(1., 0.)]);
        let v = up.kron(&down);
        let expect = [c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)];
        for (i, e) in expect.iter().enumerate() {
            assert_eq!(v[(i, 0)], *e);
        }
    }

    #[test]
    fn kron_zz_negates_singlet() {
        let s = 0.5_f64.sqrt();
        let singlet = vec![c(0., 0.), c(s, 0.), c(-s, 0.), c(0., 0.)];
        let zz = pauli_z().kron(&pauli_z());
        let out = zz.apply(&singlet).unwrap();
        for (a, b) in out.iter().zip(&singlet) {
            assert!((a + b).norm() < 1e-15);
        }
    }

    #[test]
    fn eig_sigma_z() {
        let eig = pauli_z().hermitian_eig().unwrap();
        assert!((eig.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((eig.eigenvalues[1] - 1.0).abs() < 1e-14);
        // ascending order puts e2 first, e1 second
        assert!((eig.eigenvectors[(1, 0)].re - 1.0).abs() < 1e-14);
        assert!((eig.eigenvectors[(0, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_spin_three_halves_jx_top_vector() {
        // J_x for j = 3/2 in the m = 3/2..-3/2 basis; its top eigenvector is
        // (1, sqrt3, sqrt3, 1) / (2 sqrt2)
        let r3 = 3.0_f64.sqrt();
        #[rustfmt::skip]
        let jx = ComplexMatrix::from_real(4, 4, &[
            0.0,      r3 / 2.0, 0.0,      0.0,
            r3 / 2.0, 0.0,      1.0,      0.0,
            0.0,      1.0,      0.0,      r3 / 2.0,
            0.0,      0.0,      r3 / 2.0, 0.0,
        ])
        .unwrap();
        let eig = jx.hermitian_eig().unwrap();
        let expect = [-1.5, -0.5, 0.5, 1.5];
        for (got, want) in eig.eigenvalues.iter().zip(expect) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
        let norm = 1.0 / (2.0 * 2.0_f64.sqrt());
        let top = [norm, r3 * norm, r3 * norm, norm];
        for (i, want) in top.iter().enumerate() {
            let z = eig.eigenvectors[(i, 3)];
            assert!((z.re - want).abs() < 1e-12 && z.im.abs() < 1e-12);
        }
    }

    #[test]
    fn eig_reconstructs_random_hermitian() {
        let mut rng = CounterRng::new(3);
        let a = random_hermitian(6, &mut rng);
        let eig = a.hermitian_eig().unwrap();
        assert!(eig.reconstruct().max_abs_diff(&a) < 1e-9);
        assert!(eig.orthonormality_defect() < 1e-10);
        // residual A v = lambda v per column
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            let v = eig.eigenvector(j);
            let av = a.apply(&v).unwrap();
            let worst = av
                .iter()
                .zip(&v)
                .map(|(l, r)| (l - r * lambda).norm())
                .fold(0.0, f64::max);
            assert!(worst < 1e-10);
        }
    }

    #[test]
    fn eig_rejects_non_hermitian() {
        let a = ComplexMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(a.hermitian_eig(), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn solve_identity_returns_rhs() {
        let b = ComplexMatrix::from_real(3, 1, &[1.0, -2.0, 0.5]).unwrap();
        let x = ComplexMatrix::identity(3).solve(&b).unwrap();
        assert!(x.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn solve_vandermonde_round_trip() {
        // nodes 1, 2 with frequencies (0.25, 0.75): build the moments
        // forward, solve back
        let v = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 1.0, 4.0]).unwrap();
        let p = [0.25, 0.75];
        let rhs = ComplexMatrix::from_real(
            2,
            1,
            &[p[0] + 2.0 * p[1], p[0] + 4.0 * p[1]],
        )
        .unwrap();
        let x = v.solve(&rhs).unwrap();
        assert!((x[(0, 0)].re - 0.25).abs() < 1e-12);
        assert!((x[(1, 0)].re - 0.75).abs() < 1e-12);
    }

    #[test]
    fn solve_reports_singular() {
        let a = ComplexMatrix::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        let b = ComplexMatrix::from_real(2, 1, &[1.0, 1.0]).unwrap();
        match a.solve(&b) {
            Err(Error::Singular { pivot, .. }) => assert!(pivot <= tol::SINGULAR_PIVOT),
            other => panic!("expected singular error, got {other:?}"),
        }
    }

    #[test]
    fn tridiagonal_matches_dense_solve() {
        let n = 8;
        let mut rng = CounterRng::new(9);
        let sub: Vec<Complex64> = (0..n - 1).map(|_| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).collect();
        let sup: Vec<Complex64> = (0..n - 1).map(|_| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).collect();
        let diag: Vec<Complex64> = (0..n).map(|_| c(rng.next_f64() + 2.0, rng.next_f64())).collect();
        let rhs: Vec<Complex64> = (0..n).map(|_| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5)).collect();

        let mut dense = ComplexMatrix::zeros(n, n);
        for i in 0..n {
            dense[(i, i)] = diag[i];
            if i + 1 < n {
                dense[(i + 1, i)] = sub[i];
                dense[(i, i + 1)] = sup[i];
            }
        }
        let x_dense = dense.solve(&ComplexMatrix::column(&rhs)).unwrap();
        let solver = TridiagonalSolver::new(&sub, &diag, &sup).unwrap();
        let mut x = Vec::new();
        solver.solve(&rhs, &mut x);
        for i in 0..n {
            assert!((x[i] - x_dense[(i, 0)]).norm() < 1e-10);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn prop_eig_reconstruction(seed in 0u64..500, n in 2usize..7) {
            let mut rng = CounterRng::new(seed);
            let a = random_hermitian(n, &mut rng);
            let eig = a.hermitian_eig().unwrap();
            prop_assert!(eig.reconstruct().max_abs_diff(&a) < 1e-9);
            prop_assert!(eig.orthonormality_defect() < 1e-10);
        }

        #[test]
        fn prop_kron_mixed_product(seed in 0u64..500) {
            let mut rng = CounterRng::new(seed);
            let a = random_matrix(2, &mut rng);
            let b = random_matrix(3, &mut rng);
            let c_ = random_matrix(2, &mut rng);
            let d = random_matrix(3, &mut rng);
            let lhs = a.kron(&b).mul(&c_.kron(&d)).unwrap();
            let rhs = a.mul(&c_).unwrap().kron(&b.mul(&d).unwrap());
            prop_assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }

        #[test]
        fn prop_trace_is_cyclic(seed in 0u64..500, n in 2usize..6) {
            let mut rng = CounterRng::new(seed);
            let a = random_matrix(n, &mut rng);
            let b = random_matrix(n, &mut rng);
            let ab = a.mul(&b).unwrap().trace();
            let ba = b.mul(&a).unwrap().trace();
            prop_assert!((ab - ba).norm() < 1e-10);
        }

        #[test]
        fn prop_solve_residual(seed in 0u64..500, n in 2usize..8) {
            let mut rng = CounterRng::new(seed);
            // diagonally shifted random matrix keeps the condition number low
            let mut a = random_matrix(n, &mut rng);
            for i in 0..n {
                a[(i, i)] += c(n as f64, 0.0);
            }
            if a.condition_estimate().unwrap() >= 1e6 {
                return Ok(());
            }
            let b = ComplexMatrix::from_fn(n, 1, |_, _| c(rng.next_f64() - 0.5, rng.next_f64() - 0.5));
            let x = a.solve(&b).unwrap();
            let r = a.mul(&x).unwrap().sub(&b).unwrap();
            let bmax = b.max_abs().max(1e-300);
            prop_assert!(r.max_abs() / bmax <= 1e-9);
        }
    }
}
