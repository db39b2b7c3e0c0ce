//! Dense complex linear algebra for 2×2 and 4×4 matrices.
//!
//! Everything here is sized for one or two qubits. Storage is a fixed
//! 16-entry array so matrices are `Copy` and never allocate.
//!
//! The eigensolver is a cyclic complex Jacobi iteration for Hermitian
//! matrices. Singular values come from a one-sided Jacobi sweep built on the
//! same 2×2 rotation, so no general non-symmetric eigensolver exists anywhere
//! in the crate.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Maximum |h - h†| entry accepted as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Jacobi stops once the off-diagonal Frobenius norm is below this.
pub const JACOBI_OFF_TOL: f64 = 1e-14;
pub const JACOBI_MAX_SWEEPS: usize = 100;
/// Eigenvalues in `[-PSD_CLAMP, 0)` are floating-point dust.
pub const PSD_CLAMP: f64 = 1e-10;
/// Eigenvalues below `-PSD_REJECT` make a matrix non-PSD.
pub const PSD_REJECT: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// A dense `dim × dim` complex matrix with `dim` ∈ {2, 4}, row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: [C64; 16],
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  [")?;
            for j in 0..self.dim {
                let z = self.get(i, j);
                write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
            }
            writeln!(f, " ]")?;
        }
        Ok(())
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 4 {
        Ok(())
    } else {
        Err(Error::invalid(format!("matrix dimension must be 2 or 4, got {dim}")))
    }
}

impl ComplexMatrix {
    /// # Panics
    /// If `dim` is not 2 or 4.
    pub fn zeros(dim: usize) -> Self {
        assert!(dim == 2 || dim == 4, "matrix dimension must be 2 or 4, got {dim}");
        ComplexMatrix { dim, data: [ZERO; 16] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m.set(i, i, ONE);
        }
        m
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        check_dim(dim)?;
        let mut m = Self::zeros(dim);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != dim {
                return Err(Error::invalid(format!(
                    "row {i} has {} entries, expected {dim}",
                    row.len()
                )));
            }
            for (j, &z) in row.iter().enumerate() {
                if !z.re.is_finite() || !z.im.is_finite() {
                    return Err(Error::invalid(format!("entry ({i},{j}) is not finite")));
                }
                m.set(i, j, z);
            }
        }
        Ok(m)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows.iter().map(|r| r.iter().map(|&x| re(x)).collect()).collect();
        Self::from_rows(&rows)
    }

    pub fn diag(values: &[C64]) -> Result<Self> {
        check_dim(values.len())?;
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m.set(i, i, v);
        }
        Ok(m)
    }

    pub fn diag_real(values: &[f64]) -> Result<Self> {
        let v: Vec<C64> = values.iter().map(|&x| re(x)).collect();
        Self::diag(&v)
    }

    /// `|v⟩⟨v|` for a 2- or 4-component vector.
    pub fn outer(v: &[C64]) -> Result<Self> {
        check_dim(v.len())?;
        let mut m = Self::zeros(v.len());
        for i in 0..v.len() {
            for j in 0..v.len() {
                m.set(i, j, v[i] * v[j].conj());
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> C64 {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i * self.dim + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, z: C64) {
        debug_assert!(i < self.dim && j < self.dim);
        self.data[i * self.dim + j] = z;
    }

    pub fn rows(&self) -> Vec<Vec<C64>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.get(i, j)).collect()).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self.get(i, j)).collect()
    }

    fn entries(&self) -> &[C64] {
        &self.data[..self.dim * self.dim]
    }

    fn map(&self, f: impl Fn(C64) -> C64) -> Self {
        let mut out = *self;
        for z in out.data[..self.dim * self.dim].iter_mut() {
            *z = f(*z);
        }
        out
    }

    fn same_dim(&self, other: &Self, op: &str) -> Result<()> {
        if self.dim == other.dim {
            Ok(())
        } else {
            Err(Error::invalid(format!(
                "{op}: dimension mismatch ({} vs {})",
                self.dim, other.dim
            )))
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        self.same_dim(other, "matmul")?;
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a == ZERO {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * other.get(k, j);
                }
            }
        }
        Ok(out)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_dim(other, "add")?;
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a += *b;
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.same_dim(other, "sub")?;
        let mut out = *self;
        for (a, b) in out.data.iter_mut().zip(other.data.iter()) {
            *a -= *b;
        }
        Ok(out)
    }

    pub fn scale(&self, s: C64) -> Self {
        self.map(|z| z * s)
    }

    pub fn scale_real(&self, s: f64) -> Self {
        self.map(|z| z * s)
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j).conj());
            }
        }
        out
    }

    /// Entrywise complex conjugate (not transposed).
    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn transpose(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    /// Kronecker product of two 2×2 matrices, `(a⊗b)[2i+k][2j+l] = a[i][j]·b[k][l]`.
    pub fn kron(a: &Self, b: &Self) -> Result<Self> {
        if a.dim != 2 || b.dim != 2 {
            return Err(Error::invalid(format!(
                "kron expects two 2x2 matrices, got {}x{} and {}x{}",
                a.dim, a.dim, b.dim, b.dim
            )));
        }
        let mut out = Self::zeros(4);
        for i in 0..2 {
            for j in 0..2 {
                for k in 0..2 {
                    for l in 0..2 {
                        out.set(2 * i + k, 2 * j + l, a.get(i, j) * b.get(k, l));
                    }
                }
            }
        }
        Ok(out)
    }

    /// Largest entrywise modulus.
    pub fn max_abs(&self) -> f64 {
        self.entries().iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest entrywise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.entries()
            .iter()
            .zip(other.entries())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries().iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// max |h - h†| over all entries.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    /// `(h + h†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = *self;
        for i in 0..n {
            for j in 0..n {
                out.set(i, j, (self.get(i, j) + self.get(j, i).conj()) * 0.5);
            }
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.entries().iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    fn off_diagonal_norm(&self) -> f64 {
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    s += self.get(i, j).norm_sqr();
                }
            }
        }
        s.sqrt()
    }

    /// Right-multiply columns `p`, `q` by the 2×2 block `g`.
    fn rotate_columns(&mut self, p: usize, q: usize, g: &[C64; 4]) {
        for k in 0..self.dim {
            let xp = self.get(k, p);
            let xq = self.get(k, q);
            self.set(k, p, xp * g[0] + xq * g[2]);
            self.set(k, q, xp * g[1] + xq * g[3]);
        }
    }

    /// Left-multiply rows `p`, `q` by the adjoint of the 2×2 block `g`.
    fn rotate_rows_adjoint(&mut self, p: usize, q: usize, g: &[C64; 4]) {
        for k in 0..self.dim {
            let xp = self.get(p, k);
            let xq = self.get(q, k);
            self.set(p, k, g[0].conj() * xp + g[2].conj() * xq);
            self.set(q, k, g[1].conj() * xp + g[3].conj() * xq);
        }
    }
}

impl Add for ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("add: dimension mismatch")
    }
}

impl Sub for ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> Self {
        self.try_sub(&rhs).expect("sub: dimension mismatch")
    }
}

impl Mul for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> Self {
        self.matmul(&rhs).expect("mul: dimension mismatch")
    }
}

impl Mul<C64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: C64) -> Self {
        self.scale(rhs)
    }
}

impl Mul<f64> for ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: f64) -> Self {
        self.scale_real(rhs)
    }
}

impl Neg for ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> Self {
        self.scale_real(-1.0)
    }
}

/// Unitary 2×2 block `[g00 g01; g10 g11]` that diagonalizes the Hermitian
/// block `[app apq; conj(apq) aqq]` by congruence `g† A g`.
fn jacobi_rotation(app: f64, aqq: f64, apq: C64) -> [C64; 4] {
    let r = apq.norm();
    let phase = if r > 0.0 { apq / r } else { ONE };
    // Removing the phase leaves a real symmetric block with off-diagonal r.
    let theta = 0.5 * (2.0 * r).atan2(aqq - app);
    let (s, co) = theta.sin_cos();
    let ph = phase.conj();
    [re(co), re(s), ph * (-s), ph * co]
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `i` is the eigenvector for `values[i]`.
    pub vectors: ComplexMatrix,
}

impl HermitianEigen {
    /// Σ λᵢ vᵢvᵢ† with the eigenvalues passed through `f`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.vectors.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.values.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vi = self.vectors.get(i, k) * w;
                for j in 0..n {
                    let z = out.get(i, j) + vi * self.vectors.get(j, k).conj();
                    out.set(i, j, z);
                }
            }
        }
        out
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }
}

/// Cyclic Jacobi eigendecomposition of a Hermitian matrix.
pub fn hermitian_eigen(h: &ComplexMatrix) -> Result<HermitianEigen> {
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::invalid(format!(
            "hermitian_eigen: input is not Hermitian (max |h - h†| = {err:e})"
        )));
    }
    if !h.is_finite() {
        return Err(Error::invalid("hermitian_eigen: non-finite entry"));
    }
    let n = h.dim();
    let mut a = h.hermitian_part();
    let mut v = ComplexMatrix::identity(n);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if a.off_diagonal_norm() < JACOBI_OFF_TOL {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a.get(p, q);
                if apq.norm() == 0.0 {
                    continue;
                }
                let g = jacobi_rotation(a.get(p, p).re, a.get(q, q).re, apq);
                a.rotate_columns(p, q, &g);
                a.rotate_rows_adjoint(p, q, &g);
                a.set(p, q, ZERO);
                a.set(q, p, ZERO);
                for i in [p, q] {
                    let d = a.get(i, i).re;
                    a.set(i, i, re(d));
                }
                v.rotate_columns(p, q, &g);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a.get(i, i).re.total_cmp(&a.get(j, j).re));
    let values = order.iter().map(|&i| a.get(i, i).re).collect();
    let mut vectors = ComplexMatrix::zeros(n);
    for (dst, &src) in order.iter().enumerate() {
        for i in 0..n {
            vectors.set(i, dst, v.get(i, src));
        }
    }
    Ok(HermitianEigen { values, vectors })
}

/// Hermitian PSD square root. Eigenvalues down to `-PSD_REJECT` are clamped
/// to zero; anything more negative is an error.
pub fn psd_sqrt(h: &ComplexMatrix) -> Result<ComplexMatrix> {
    let eig = hermitian_eigen(h)?;
    if eig.min() < -PSD_REJECT {
        return Err(Error::NotPsd { min_eigenvalue: eig.min() });
    }
    Ok(eig.reconstruct_with(|lam| lam.max(0.0).sqrt()))
}

/// Singular values in descending order, by one-sided (Hestenes) Jacobi.
///
/// Column pairs are orthogonalized with the Hermitian Jacobi rotation of
/// their 2×2 Gram block; the singular values are the final column norms.
/// Small singular values come out with absolute accuracy ~ε‖a‖ instead of
/// the √ε one gets from square-rooting eigenvalues of a·a†.
pub fn singular_values(a: &ComplexMatrix) -> Vec<f64> {
    let n = a.dim();
    let mut w = *a;
    for _ in 0..JACOBI_MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let (mut alpha, mut beta, mut gamma) = (0.0, 0.0, ZERO);
                for k in 0..n {
                    let x = w.get(k, p);
                    let y = w.get(k, q);
                    alpha += x.norm_sqr();
                    beta += y.norm_sqr();
                    gamma += x.conj() * y;
                }
                if gamma.norm() <= f64::EPSILON * (alpha * beta).sqrt() || gamma.norm() == 0.0 {
                    continue;
                }
                rotated = true;
                let g = jacobi_rotation(alpha, beta, gamma);
                w.rotate_columns(p, q, &g);
            }
        }
        if !rotated {
            break;
        }
    }
    let mut s: Vec<f64> = (0..n)
        .map(|j| (0..n).map(|i| w.get(i, j).norm_sqr()).sum::<f64>().sqrt())
        .collect();
    s.sort_by(|x, y| y.total_cmp(x));
    s
}

/// Pauli matrices and ladder operators in the `{|+⟩, |−⟩}` basis
/// (excited state first).
pub mod pauli {
    use super::*;

    pub fn identity() -> ComplexMatrix {
        ComplexMatrix::identity(2)
    }

    pub fn x() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]).unwrap()
    }

    pub fn y() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, c(0.0, -1.0)], vec![c(0.0, 1.0), ZERO]]).unwrap()
    }

    pub fn z() -> ComplexMatrix {
        ComplexMatrix::diag_real(&[1.0, -1.0]).unwrap()
    }

    /// σ₋ = |−⟩⟨+|, lowers the excited state.
    pub fn lower() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ZERO], vec![ONE, ZERO]]).unwrap()
    }

    /// σ₊ = |+⟩⟨−|.
    pub fn raise() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[vec![ZERO, ONE], vec![ZERO, ZERO]]).unwrap()
    }

    /// σ_y ⊗ σ_y, the spin-flip operator.
    pub fn yy() -> ComplexMatrix {
        ComplexMatrix::kron(&y(), &y()).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_matrix(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            for j in 0..dim {
                m.set(i, j, c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
            }
        }
        m
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> ComplexMatrix {
        random_matrix(rng, dim).hermitian_part()
    }

    /// Cofactor-expansion determinant, independent of the eigensolver.
    fn det(m: &ComplexMatrix) -> C64 {
        fn rec(rows: &[Vec<C64>]) -> C64 {
            let n = rows.len();
            if n == 1 {
                return rows[0][0];
            }
            let mut total = ZERO;
            for col in 0..n {
                let minor: Vec<Vec<C64>> = rows[1..]
                    .iter()
                    .map(|r| r.iter().enumerate().filter(|(j, _)| *j != col).map(|(_, z)| *z).collect())
                    .collect();
                let sign = if col % 2 == 0 { 1.0 } else { -1.0 };
                total += rows[0][col] * rec(&minor) * sign;
            }
            total
        }
        rec(&m.rows())
    }

    #[test]
    fn kron_identity_and_paulis() {
        let i4 = ComplexMatrix::kron(&pauli::identity(), &pauli::identity()).unwrap();
        assert_eq!(i4, ComplexMatrix::identity(4));

        let zz = ComplexMatrix::kron(&pauli::z(), &pauli::z()).unwrap();
        assert_eq!(zz, ComplexMatrix::diag_real(&[1.0, -1.0, -1.0, 1.0]).unwrap());

        // σy⊗σy: anti-diagonal (−1, 1, 1, −1), read from row 0 down.
        let yy = pauli::yy();
        let mut expected = ComplexMatrix::zeros(4);
        for (i, v) in [-1.0, 1.0, 1.0, -1.0].into_iter().enumerate() {
            expected.set(i, 3 - i, re(v));
        }
        assert_eq!(yy, expected);
    }

    #[test]
    fn kron_rejects_4x4() {
        let e = ComplexMatrix::kron(&ComplexMatrix::identity(4), &pauli::z());
        assert!(matches!(e, Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn dimension_checks() {
        assert!(ComplexMatrix::identity(2).matmul(&ComplexMatrix::identity(4)).is_err());
        assert!(ComplexMatrix::identity(2).try_add(&ComplexMatrix::identity(4)).is_err());
        assert!(ComplexMatrix::from_real_rows(&[vec![1.0; 3], vec![1.0; 3], vec![1.0; 3]]).is_err());
        assert!(ComplexMatrix::from_rows(&[vec![c(f64::NAN, 0.0), ZERO], vec![ZERO, ZERO]]).is_err());
    }

    #[test]
    fn kron_is_bilinear() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let a = random_matrix(&mut rng, 2);
            let b = random_matrix(&mut rng, 2);
            let cc = random_matrix(&mut rng, 2);
            let alpha = c(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
            let lhs = ComplexMatrix::kron(&(a * alpha + b), &cc).unwrap();
            let rhs = ComplexMatrix::kron(&a, &cc).unwrap() * alpha + ComplexMatrix::kron(&b, &cc).unwrap();
            assert!(lhs.max_abs_diff(&rhs) < 1e-12);
        }
    }

    #[test]
    fn trace_adjoint_basics() {
        assert_eq!(ComplexMatrix::identity(4).trace(), re(4.0));
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 4);
            let b = random_matrix(&mut rng, 4);
            assert_eq!(a.adjoint().adjoint(), a);
            assert!(((a * b).trace() - (b * a).trace()).norm() < 1e-13);
        }
    }

    #[test]
    fn eigen_of_simple_matrices() {
        let e = hermitian_eigen(&pauli::z()).unwrap();
        assert_eq!(e.values, vec![-1.0, 1.0]);
        let e = hermitian_eigen(&ComplexMatrix::diag_real(&[4.0, 1.0, 0.0, 9.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![0.0, 1.0, 4.0, 9.0]);
    }

    #[test]
    fn eigen_rejects_non_hermitian() {
        let m = ComplexMatrix::from_real_rows(&[vec![0.0, 1.0], vec![0.0, 0.0]]).unwrap();
        assert!(matches!(hermitian_eigen(&m), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn eigen_random_hermitian_properties() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..200 {
            let h = random_hermitian(&mut rng, 4);
            let e = hermitian_eigen(&h).unwrap();
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
            // reconstruction
            assert!(e.reconstruct_with(|x| x).max_abs_diff(&h) < 1e-9);
            // H v = λ v
            for k in 0..4 {
                let vk = e.vectors.column(k);
                for i in 0..4 {
                    let hv: C64 = (0..4).map(|j| h.get(i, j) * vk[j]).sum();
                    assert!((hv - vk[i] * e.values[k]).norm() < 1e-10);
                }
            }
            // orthonormal columns
            let gram = e.vectors.adjoint() * e.vectors;
            assert!(gram.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-10);
            // trace and determinant
            let sum: f64 = e.values.iter().sum();
            assert!((sum - h.trace().re).abs() < 1e-10);
            let prod: f64 = e.values.iter().product();
            let d = det(&h);
            assert!(d.im.abs() < 1e-10);
            assert!((prod - d.re).abs() <= 1e-9 * d.re.abs().max(1e-3));
        }
    }

    #[test]
    fn eigen_handles_degenerate_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = hermitian_eigen(&random_hermitian(&mut rng, 4)).unwrap().vectors;
        let d = ComplexMatrix::diag_real(&[2.0, 2.0, -1.0, -1.0]).unwrap();
        let h = u * d * u.adjoint();
        let e = hermitian_eigen(&h.hermitian_part()).unwrap();
        for (got, want) in e.values.iter().zip([-1.0, -1.0, 2.0, 2.0]) {
            assert!((got - want).abs() < 1e-12);
        }
    }

    #[test]
    fn psd_sqrt_examples() {
        assert!(psd_sqrt(&ComplexMatrix::identity(4)).unwrap().max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
        let s = psd_sqrt(&ComplexMatrix::diag_real(&[4.0, 1.0, 0.0, 9.0]).unwrap()).unwrap();
        assert!(s.max_abs_diff(&ComplexMatrix::diag_real(&[2.0, 1.0, 0.0, 3.0]).unwrap()) < 1e-15);
        let v = [c(0.5, 0.0), c(0.0, 0.5), c(-0.5, 0.0), c(0.5, 0.0)];
        let p = ComplexMatrix::outer(&v).unwrap();
        assert!(psd_sqrt(&p).unwrap().max_abs_diff(&p) < 1e-7);
    }

    #[test]
    fn psd_sqrt_rejects_negative() {
        let m = ComplexMatrix::diag_real(&[1.0, -1e-6]).unwrap();
        assert!(matches!(psd_sqrt(&m), Err(Error::NotPsd { .. })));
        // dust is clamped
        let m = ComplexMatrix::diag_real(&[1.0, -1e-11]).unwrap();
        let s = psd_sqrt(&m).unwrap();
        assert_eq!(s.get(1, 1), ZERO);
    }

    #[test]
    fn psd_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..100 {
            let g = random_matrix(&mut rng, 4);
            let h = (g * g.adjoint()).hermitian_part();
            let s = psd_sqrt(&h).unwrap();
            assert!(s.is_hermitian(1e-12));
            assert!((s * s).max_abs_diff(&h) < 1e-9);
        }
    }

    #[test]
    fn singular_values_match_eigen_of_gram() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for _ in 0..100 {
            let a = random_matrix(&mut rng, 4);
            let s = singular_values(&a);
            let e = hermitian_eigen(&(a * a.adjoint()).hermitian_part()).unwrap();
            let mut from_eig: Vec<f64> = e.values.iter().map(|x| x.max(0.0).sqrt()).collect();
            from_eig.reverse();
            for (x, y) in s.iter().zip(&from_eig) {
                assert!((x - y).abs() < 1e-7, "{s:?} vs {from_eig:?}");
            }
        }
    }

    #[test]
    fn singular_values_of_rank_one_are_clean() {
        let v = [c(0.3, 0.1), c(-0.2, 0.4), c(0.5, -0.1), c(0.1, 0.2)];
        let w = [c(0.1, 0.0), c(0.7, -0.3), c(0.2, 0.2), c(-0.4, 0.1)];
        let mut a = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                a.set(i, j, v[i] * w[j].conj());
            }
        }
        let s = singular_values(&a);
        let nv: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let nw: f64 = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((s[0] - nv * nw).abs() < 1e-15);
        assert!(s[1..].iter().all(|&x| x < 1e-15), "{s:?}");
    }
}
