//! Dense complex linear algebra for small density matrices.

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix. Row-major is only the on-disk convention; storage is nalgebra's.
pub type ComplexMatrix = DMatrix<Complex64>;

pub(crate) const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub(crate) const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub(crate) const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn identity(d: usize) -> ComplexMatrix {
    ComplexMatrix::identity(d, d)
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// max |m_jk - conj(m_kj)|.
pub fn hermiticity_residual(m: &ComplexMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0_f64;
    for j in 0..n {
        for k in j..n {
            worst = worst.max((m[(j, k)] - m[(k, j)].conj()).norm());
        }
    }
    worst
}

/// Eigenvalues of the Hermitian part `(m + m†)/2`, ascending.
pub fn hermitian_eigenvalues(m: &ComplexMatrix) -> Vec<f64> {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn min_eigenvalue(m: &ComplexMatrix) -> f64 {
    hermitian_eigenvalues(m)
        .first()
        .copied()
        .unwrap_or(f64::NAN)
}

/// `Re tr(a b)` without forming the product.
pub fn re_trace_product(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    let n = a.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        for k in 0..n {
            let x = a[(j, k)];
            let y = b[(k, j)];
            acc += x.re * y.re - x.im * y.im;
        }
    }
    acc
}

/// Orthonormal (Hilbert-Schmidt) basis of traceless Hermitian d×d matrices:
/// generalized Gell-Mann matrices scaled so that `tr(G_a G_b) = δ_ab`.
///
/// Order: symmetric off-diagonal, antisymmetric off-diagonal (both over `j < k`
/// row-major), then the `d - 1` diagonal generators.
pub fn traceless_basis(d: usize) -> Vec<ComplexMatrix> {
    let mut basis = Vec::with_capacity(d * d - 1);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for j in 0..d {
        for k in (j + 1)..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = Complex64::new(s, 0.0);
            g[(k, j)] = Complex64::new(s, 0.0);
            basis.push(g);
        }
    }
    for j in 0..d {
        for k in (j + 1)..d {
            let mut g = ComplexMatrix::zeros(d, d);
            g[(j, k)] = Complex64::new(0.0, -s);
            g[(k, j)] = Complex64::new(0.0, s);
            basis.push(g);
        }
    }
    for l in 1..d {
        let norm = 1.0 / ((l * (l + 1)) as f64).sqrt();
        let mut g = ComplexMatrix::zeros(d, d);
        for m in 0..l {
            g[(m, m)] = Complex64::new(norm, 0.0);
        }
        g[(l, l)] = Complex64::new(-(l as f64) * norm, 0.0);
        basis.push(g);
    }
    basis
}

/// `(1/2) log det(J Jᵀ)` for an `m × n` matrix with `m ≤ n`, accumulated in the
/// log domain from the diagonal of the QR factor of `Jᵀ`. Rank deficiency gives `-∞`.
pub fn half_log_det_gram(jac: &DMatrix<f64>) -> f64 {
    let (m, n) = jac.shape();
    if m == 0 {
        return 0.0;
    }
    if m > n || jac.iter().any(|v| !v.is_finite()) {
        return f64::NEG_INFINITY;
    }
    let qr = jac.transpose().qr();
    let r = qr.r();
    let scale = jac.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut acc = 0.0;
    for i in 0..m {
        let rii = r[(i, i)].abs();
        if rii <= scale * 1e-14 {
            return f64::NEG_INFINITY;
        }
        acc += rii.ln();
    }
    acc
}

/// Kronecker product in the usual row-major block convention.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}
