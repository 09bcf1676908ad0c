//! Density matrices and the unconstrained angle/phase chart the sampler moves on.
//!
//! A state is built from a lower-triangular factor `A` with `ρ = A A†`. The
//! `d(d+1)/2` entry moduli of `A` (diagonal first, then the strictly-lower entries
//! row by row) are hyperspherical coordinates of a point on the unit sphere, driven
//! by `nt = d(d+1)/2 - 1` angles. Each strictly-lower entry also carries a phase,
//! giving `nf = d(d-1)/2` phases. `Σ|A_jk|² = 1`, so `tr ρ = 1` by construction and
//! every real input is a valid chart point.

use num_complex::Complex64;
use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix, ZERO};

pub const HERMITIAN_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-12;
pub const PSD_TOL: f64 = -1e-10;

/// A validated density matrix: Hermitian, unit trace, positive semidefinite.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    matrix: ComplexMatrix,
}

impl DensityMatrix {
    /// Validates `matrix` against the density-matrix invariants.
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        check_density(&matrix)?;
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is a density matrix by construction.
    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(d: usize) -> Self {
        let m = ComplexMatrix::identity(d, d) * Complex64::new(1.0 / d as f64, 0.0);
        Self { matrix: m }
    }

    /// Projector onto a (not necessarily normalized) pure state.
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        let norm2: f64 = psi.iter().map(|c| c.norm_sqr()).sum();
        if norm2 <= 0.0 || !norm2.is_finite() {
            return Err(Error::NonFinite("pure state normalization"));
        }
        let d = psi.len();
        let m = ComplexMatrix::from_fn(d, d, |j, k| psi[j] * psi[k].conj() / norm2);
        Ok(Self { matrix: m })
    }

    pub fn d(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        linalg::min_eigenvalue(&self.matrix)
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        purity(self)
    }

    /// Re-checks every invariant.
    pub fn validate(&self) -> Result<()> {
        check_density(&self.matrix)
    }

    /// `U ρ U†`.
    pub fn conjugated_by(&self, unitary: &ComplexMatrix) -> Self {
        Self {
            matrix: unitary * &self.matrix * unitary.adjoint(),
        }
    }

    /// `ρ_a ⊗ ρ_b`.
    pub fn tensor(&self, other: &DensityMatrix) -> Self {
        Self {
            matrix: linalg::kron(&self.matrix, &other.matrix),
        }
    }
}

fn check_density(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.iter().any(|c| !c.re.is_finite() || !c.im.is_finite()) {
        return Err(Error::NonFinite("density matrix entries"));
    }
    let herm = linalg::hermiticity_residual(m);
    if herm > HERMITIAN_TOL {
        return Err(Error::NotHermitian(herm));
    }
    let tr = m.trace().re;
    if (tr - 1.0).abs() > TRACE_TOL {
        return Err(Error::InvalidTrace(tr));
    }
    let min_ev = linalg::min_eigenvalue(m);
    if min_ev < PSD_TOL {
        return Err(Error::NotPositive(min_ev));
    }
    Ok(())
}

/// `tr ρ²`.
pub fn purity(rho: &DensityMatrix) -> f64 {
    rho.matrix.iter().map(|c| c.norm_sqr()).sum()
}

/// Expectation values of the Pauli operators for a qubit state.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BlochVector {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl BlochVector {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        let r2 = x * x + y * y + z * z;
        if !r2.is_finite() {
            return Err(Error::NonFinite("Bloch vector"));
        }
        if r2 > 1.0 + 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "Bloch vector length {} exceeds one",
                r2.sqrt()
            )));
        }
        Ok(Self { x, y, z })
    }

    pub fn norm_sqr(&self) -> f64 {
        self.x * self.x + self.y * self.y + self.z * self.z
    }

    /// `(1 + xσx + yσy + zσz)/2`.
    pub fn to_state(&self) -> DensityMatrix {
        let h = 0.5;
        let m = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(h * (1.0 + self.z), 0.0),
                Complex64::new(h * self.x, -h * self.y),
                Complex64::new(h * self.x, h * self.y),
                Complex64::new(h * (1.0 - self.z), 0.0),
            ],
        );
        DensityMatrix::from_matrix_unchecked(m)
    }
}

pub fn qubit_to_bloch(rho: &DensityMatrix) -> Result<BlochVector> {
    if rho.d() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            found: rho.d(),
        });
    }
    let m = rho.matrix();
    Ok(BlochVector {
        x: 2.0 * m[(1, 0)].re,
        y: 2.0 * m[(1, 0)].im,
        z: (m[(0, 0)] - m[(1, 1)]).re,
    })
}

/// Point in the unconstrained chart: `nt` angles and `nf` phases.
#[derive(Clone, Debug, PartialEq)]
pub struct StateParams {
    d: usize,
    pub theta: Vec<f64>,
    pub phi: Vec<f64>,
}

/// `(nt, nf)` for dimension `d`.
pub fn param_counts(d: usize) -> (usize, usize) {
    (d * (d + 1) / 2 - 1, d * (d - 1) / 2)
}

/// Matrix position of the `i`-th modulus: diagonal entries first, then the
/// strictly-lower entries in row-major order.
fn modulus_position(d: usize, i: usize) -> (usize, usize) {
    if i < d {
        return (i, i);
    }
    let mut k = i - d;
    for row in 1..d {
        if k < row {
            return (row, k);
        }
        k -= row;
    }
    unreachable!("modulus index {i} out of range for d = {d}")
}

impl StateParams {
    pub fn new(d: usize, theta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidConfig("dimension must be at least 1".into()));
        }
        let (nt, nf) = param_counts(d);
        if theta.len() != nt {
            return Err(Error::LengthMismatch {
                what: "theta",
                expected: nt,
                found: theta.len(),
            });
        }
        if phi.len() != nf {
            return Err(Error::LengthMismatch {
                what: "phi",
                expected: nf,
                found: phi.len(),
            });
        }
        Ok(Self { d, theta, phi })
    }

    /// Splits a flat `[theta..., phi...]` vector.
    pub fn from_flat(d: usize, x: &[f64]) -> Result<Self> {
        let (nt, nf) = param_counts(d);
        if x.len() != nt + nf {
            return Err(Error::LengthMismatch {
                what: "parameter vector",
                expected: nt + nf,
                found: x.len(),
            });
        }
        Self::new(d, x[..nt].to_vec(), x[nt..].to_vec())
    }

    pub fn to_flat(&self) -> Vec<f64> {
        let mut v = self.theta.clone();
        v.extend_from_slice(&self.phi);
        v
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn nt(&self) -> usize {
        self.theta.len()
    }

    pub fn nf(&self) -> usize {
        self.phi.len()
    }

    /// `nt + nf = d² - 1`.
    pub fn num(&self) -> usize {
        self.theta.len() + self.phi.len()
    }

    /// Chart point whose moduli are `moduli / |moduli|`.
    pub fn from_moduli(d: usize, moduli: &[f64], phi: Vec<f64>) -> Result<Self> {
        let m = d * (d + 1) / 2;
        if moduli.len() != m {
            return Err(Error::LengthMismatch {
                what: "moduli",
                expected: m,
                found: moduli.len(),
            });
        }
        let mut theta = Vec::with_capacity(m - 1);
        for i in 0..m.saturating_sub(1) {
            let tail: f64 = moduli[i + 1..].iter().map(|u| u * u).sum::<f64>().sqrt();
            if i + 2 == m {
                theta.push(moduli[m - 1].atan2(moduli[m - 2]));
            } else {
                theta.push(tail.atan2(moduli[i]));
            }
        }
        Self::new(d, theta, phi)
    }

    /// All moduli equal and all phases zero. Interior of the chart and full rank,
    /// used as the default chain start.
    pub fn balanced(d: usize) -> Self {
        let m = d * (d + 1) / 2;
        Self::from_moduli(d, &vec![1.0; m], vec![0.0; d * (d - 1) / 2])
            .expect("balanced moduli have the right length")
    }

    /// Preimage of `I/d`: balanced diagonal, zero off-diagonal moduli. This sits on
    /// a coordinate singularity of the phases (the Jacobian vanishes there).
    pub fn maximally_mixed(d: usize) -> Self {
        let m = d * (d + 1) / 2;
        let mut moduli = vec![0.0; m];
        moduli[..d].iter_mut().for_each(|u| *u = 1.0);
        Self::from_moduli(d, &moduli, vec![0.0; d * (d - 1) / 2])
            .expect("moduli have the right length")
    }

    /// Angles and phases drawn uniformly from `[0, 2π)`.
    pub fn random<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Self {
        let (nt, nf) = param_counts(d);
        let tau = std::f64::consts::TAU;
        let theta = (0..nt).map(|_| rng.random::<f64>() * tau).collect();
        let phi = (0..nf).map(|_| rng.random::<f64>() * tau).collect();
        Self { d, theta, phi }
    }

    /// Hyperspherical moduli `u_0..u_{M-1}` (signed), `Σ u² = 1`.
    pub fn moduli(&self) -> Vec<f64> {
        let m = self.theta.len() + 1;
        let mut u = Vec::with_capacity(m);
        let mut sin_prod = 1.0;
        for &t in &self.theta {
            u.push(sin_prod * t.cos());
            sin_prod *= t.sin();
        }
        u.push(sin_prod);
        u
    }

    /// `∂u_i/∂θ_j` as a row per angle, without dividing by `sin θ`.
    fn moduli_derivatives(&self) -> Vec<Vec<f64>> {
        let m = self.theta.len() + 1;
        let sines: Vec<f64> = self.theta.iter().map(|t| t.sin()).collect();
        let cosines: Vec<f64> = self.theta.iter().map(|t| t.cos()).collect();
        let mut out = vec![vec![0.0; m]; m - 1];
        for (j, row) in out.iter_mut().enumerate() {
            let prefix: f64 = sines[..j].iter().product();
            row[j] = -prefix * sines[j];
            // u_i for i > j carries sin θ_j; differentiate that factor.
            let mut partial = prefix * cosines[j];
            for i in (j + 1)..m {
                let last = if i + 1 == m { 1.0 } else { cosines[i] };
                row[i] = partial * last;
                if i + 1 < m {
                    partial *= sines[i];
                }
            }
        }
        out
    }
}

/// Lower-triangular factor `A`; `tr(A A†) = 1`.
pub fn params_to_factor(params: &StateParams) -> ComplexMatrix {
    let d = params.d;
    let u = params.moduli();
    let mut a = ComplexMatrix::from_element(d, d, ZERO);
    for (i, &ui) in u.iter().enumerate() {
        let (r, c) = modulus_position(d, i);
        a[(r, c)] = if i < d {
            Complex64::new(ui, 0.0)
        } else {
            Complex64::from_polar(ui, params.phi[i - d])
        };
    }
    a
}

/// `ρ = A A†` for the chart point.
pub fn params_to_state(params: &StateParams) -> DensityMatrix {
    let a = params_to_factor(params);
    let mut rho = &a * a.adjoint();
    symmetrize(&mut rho);
    DensityMatrix::from_matrix_unchecked(rho)
}

fn symmetrize(m: &mut ComplexMatrix) {
    let n = m.nrows();
    for j in 0..n {
        m[(j, j)].im = 0.0;
        for k in (j + 1)..n {
            let avg = (m[(j, k)] + m[(k, j)].conj()) * 0.5;
            m[(j, k)] = avg;
            m[(k, j)] = avg.conj();
        }
    }
}

/// Partials `∂ρ/∂x_j` over the flat parameter vector (angles, then phases).
/// Each partial is Hermitian and traceless.
pub fn state_gradient(params: &StateParams) -> Vec<ComplexMatrix> {
    let d = params.d;
    let a = params_to_factor(params);
    let a_adj = a.adjoint();
    let u = params.moduli();
    let du = params.moduli_derivatives();
    let mut out = Vec::with_capacity(params.num());

    let mut da = ComplexMatrix::from_element(d, d, ZERO);
    for row in &du {
        da.fill(ZERO);
        for (i, &v) in row.iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            let (r, c) = modulus_position(d, i);
            da[(r, c)] = if i < d {
                Complex64::new(v, 0.0)
            } else {
                Complex64::from_polar(v, params.phi[i - d])
            };
        }
        out.push(hermitian_product_sum(&da, &a_adj));
    }
    for (k, &ph) in params.phi.iter().enumerate() {
        da.fill(ZERO);
        let i = d + k;
        let (r, c) = modulus_position(d, i);
        da[(r, c)] = Complex64::new(0.0, 1.0) * Complex64::from_polar(u[i], ph);
        out.push(hermitian_product_sum(&da, &a_adj));
    }
    out
}

/// `X + X†` with `X = dA · A†`.
fn hermitian_product_sum(da: &ComplexMatrix, a_adj: &ComplexMatrix) -> ComplexMatrix {
    let x = da * a_adj;
    let mut out = &x + x.adjoint();
    symmetrize(&mut out);
    out
}

/// Per-angle exponents `(a_l, b_l)` such that the chart's volume factor (the
/// Jacobian of the map from angles/phases to orthonormal coordinates of trace-one
/// Hermitian matrices) is `const · Π_l |sin θ_l|^{a_l} |cos θ_l|^{b_l}`.
///
/// The factor combines the complex Cholesky Jacobian `Π |a_ii|^{2(d-i)-1}`
/// (0-based `i`), one `|u_k|` per polar off-diagonal entry, and the hyperspherical
/// surface element. It is independent of the phases.
fn chart_exponents(d: usize) -> (Vec<f64>, Vec<f64>) {
    let m = d * (d + 1) / 2;
    let weight = |i: usize| -> f64 {
        if i < d {
            (2 * (d - i) - 1) as f64
        } else {
            1.0
        }
    };
    let mut a = vec![0.0; m - 1];
    let mut b = vec![0.0; m - 1];
    for l in 0..m - 1 {
        a[l] = ((l + 1)..m).map(weight).sum::<f64>();
        if l + 2 < m {
            a[l] += (m - 2 - l) as f64;
        }
        b[l] = weight(l);
    }
    (a, b)
}

fn chart_log_constant(d: usize) -> f64 {
    let ln2 = std::f64::consts::LN_2;
    let off = (d * (d - 1) / 2) as f64;
    (d as f64) * ln2 + off * ln2 - ln2 + 0.5 * (d as f64).ln()
}

/// Closed-form `log |det ∂c/∂x|`, where `c` are the coordinates of `ρ` in the
/// orthonormal traceless basis of [`linalg::traceless_basis`].
pub fn chart_log_jacobian(params: &StateParams) -> f64 {
    if params.d == 1 {
        return 0.0;
    }
    let (a, b) = chart_exponents(params.d);
    let mut acc = chart_log_constant(params.d);
    for (l, &t) in params.theta.iter().enumerate() {
        if a[l] != 0.0 {
            acc += a[l] * t.sin().abs().ln();
        }
        if b[l] != 0.0 {
            acc += b[l] * t.cos().abs().ln();
        }
    }
    if acc.is_nan() {
        f64::NEG_INFINITY
    } else {
        acc
    }
}

/// Gradient of [`chart_log_jacobian`] over the flat parameter vector (phase
/// components are identically zero).
pub fn chart_log_jacobian_grad(params: &StateParams) -> Vec<f64> {
    let mut g = vec![0.0; params.num()];
    if params.d == 1 {
        return g;
    }
    let (a, b) = chart_exponents(params.d);
    for (l, &t) in params.theta.iter().enumerate() {
        let (s, c) = t.sin_cos();
        g[l] = a[l] * c / s - b[l] * s / c;
    }
    g
}

/// Numerical Jacobian `∂c_a/∂x_j` in the orthonormal traceless basis.
pub fn coordinate_jacobian(
    partials: &[ComplexMatrix],
    basis: &[ComplexMatrix],
) -> nalgebra::DMatrix<f64> {
    nalgebra::DMatrix::from_fn(basis.len(), partials.len(), |a, j| {
        linalg::re_trace_product(&basis[a], &partials[j])
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y, pauli_z, traceless_basis};
    use crate::rng::chain_rng;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn counts_follow_dimension() {
        for d in 1..=8 {
            let (nt, nf) = param_counts(d);
            assert_eq!(nt + nf, d * d - 1);
        }
        assert!(StateParams::new(2, vec![0.0], vec![0.0]).is_err());
        assert!(StateParams::new(2, vec![0.0, 0.0], vec![]).is_err());
    }

    #[test]
    fn pole_gives_first_diagonal_entry() {
        let p = StateParams::new(2, vec![0.0, 0.0], vec![0.0]).unwrap();
        let a = params_to_factor(&p);
        assert_eq!(a[(0, 0)], Complex64::new(1.0, 0.0));
        assert_eq!(a[(1, 1)], ZERO);
        assert_eq!(a[(1, 0)], ZERO);
        assert_eq!(a[(0, 1)], ZERO);
        let rho = params_to_state(&p);
        assert!(close(rho.matrix()[(0, 0)].re, 1.0, 1e-15));
        assert!(rho.matrix()[(1, 1)].norm() < 1e-15);
    }

    #[test]
    fn balanced_diagonal_gives_maximally_mixed() {
        let p = StateParams::maximally_mixed(2);
        let a = params_to_factor(&p);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert!(close(a[(0, 0)].re, s, 1e-15) && close(a[(1, 1)].re, s, 1e-15));
        let rho = params_to_state(&p);
        let diff = rho.matrix() - DensityMatrix::maximally_mixed(2).matrix();
        assert!(diff.iter().all(|c| c.norm() < 1e-15));
    }

    #[test]
    fn d3_factor_shape() {
        let mut rng = chain_rng(11, 0);
        let p = StateParams::random(3, &mut rng);
        let a = params_to_factor(&p);
        for r in 0..3 {
            for c in (r + 1)..3 {
                assert_eq!(a[(r, c)], ZERO);
            }
            assert_eq!(a[(r, r)].im, 0.0);
        }
        let nonzero = a.iter().filter(|c| c.norm() > 0.0).count();
        assert_eq!(nonzero, 6);
        let phased = [(1, 0), (2, 0), (2, 1)]
            .iter()
            .filter(|&&(r, c)| a[(r, c)].im != 0.0)
            .count();
        assert_eq!(phased, 3);
        let tr: f64 = a.iter().map(|c| c.norm_sqr()).sum();
        assert!(close(tr, 1.0, 1e-14));
    }

    #[test]
    fn from_moduli_round_trips() {
        let mut rng = chain_rng(3, 0);
        for d in 2..=4 {
            let p = StateParams::random(d, &mut rng);
            let u = p.moduli();
            let q = StateParams::from_moduli(d, &u, p.phi.clone()).unwrap();
            for (x, y) in q.moduli().iter().zip(&u) {
                assert!(close(*x, *y, 1e-12));
            }
        }
    }

    #[test]
    fn purity_examples() {
        for d in 1..=5 {
            assert!(close(
                DensityMatrix::maximally_mixed(d).purity(),
                1.0 / d as f64,
                1e-15
            ));
        }
        let psi = [Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)];
        assert!(close(
            DensityMatrix::pure(&psi).unwrap().purity(),
            1.0,
            1e-15
        ));
        let b = BlochVector::new(0.3, -0.2, 0.5).unwrap();
        assert!(close(
            b.to_state().purity(),
            (1.0 + b.norm_sqr()) / 2.0,
            1e-15
        ));
    }

    #[test]
    fn bloch_examples() {
        let b = qubit_to_bloch(&DensityMatrix::maximally_mixed(2)).unwrap();
        assert_eq!((b.x, b.y, b.z), (0.0, 0.0, 0.0));
        let up = DensityMatrix::pure(&[Complex64::new(1.0, 0.0), ZERO]).unwrap();
        let b = qubit_to_bloch(&up).unwrap();
        assert!(close(b.z, 1.0, 1e-15) && b.x == 0.0 && b.y == 0.0);
        let plus =
            DensityMatrix::pure(&[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]).unwrap();
        let b = qubit_to_bloch(&plus).unwrap();
        assert!(close(b.x, 1.0, 1e-15) && close(b.y, 0.0, 1e-15) && close(b.z, 0.0, 1e-15));
        assert!(qubit_to_bloch(&DensityMatrix::maximally_mixed(3)).is_err());
    }

    #[test]
    fn bloch_matches_pauli_traces() {
        let mut rng = chain_rng(5, 0);
        for _ in 0..50 {
            let rho = params_to_state(&StateParams::random(2, &mut rng));
            let b = qubit_to_bloch(&rho).unwrap();
            let m = rho.matrix();
            assert!(close(
                b.x,
                crate::linalg::re_trace_product(m, &pauli_x()),
                1e-14
            ));
            assert!(close(
                b.y,
                crate::linalg::re_trace_product(m, &pauli_y()),
                1e-14
            ));
            assert!(close(
                b.z,
                crate::linalg::re_trace_product(m, &pauli_z()),
                1e-14
            ));
            let back = b.to_state();
            let diff = back.matrix() - m;
            assert!(diff.iter().all(|c| c.norm() < 1e-12));
        }
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let mut m = DensityMatrix::maximally_mixed(2).into_matrix();
        m[(0, 1)] = Complex64::new(0.1, 0.0);
        assert!(matches!(
            DensityMatrix::new(m.clone()),
            Err(Error::NotHermitian(_))
        ));
        m[(1, 0)] = Complex64::new(0.1, 0.0);
        assert!(DensityMatrix::new(m.clone()).is_ok());
        m[(0, 0)] = Complex64::new(0.7, 0.0);
        assert!(matches!(
            DensityMatrix::new(m.clone()),
            Err(Error::InvalidTrace(_))
        ));
        let neg = ComplexMatrix::from_row_slice(
            2,
            2,
            &[
                Complex64::new(1.2, 0.0),
                ZERO,
                ZERO,
                Complex64::new(-0.2, 0.0),
            ],
        );
        assert!(matches!(
            DensityMatrix::new(neg),
            Err(Error::NotPositive(_))
        ));
    }

    #[test]
    fn gradient_partials_are_traceless_and_hermitian() {
        let mut rng = chain_rng(8, 0);
        for d in 2..=4 {
            let p = StateParams::random(d, &mut rng);
            for g in state_gradient(&p) {
                assert!(g.trace().norm() < 1e-14);
                assert!(crate::linalg::hermiticity_residual(&g) < 1e-15);
            }
        }
    }

    fn fd_partials(p: &StateParams, h: f64) -> Vec<ComplexMatrix> {
        let x = p.to_flat();
        (0..x.len())
            .map(|j| {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[j] += h;
                xm[j] -= h;
                let rp = params_to_state(&StateParams::from_flat(p.d(), &xp).unwrap());
                let rm = params_to_state(&StateParams::from_flat(p.d(), &xm).unwrap());
                (rp.matrix() - rm.matrix()) / Complex64::new(2.0 * h, 0.0)
            })
            .collect()
    }

    fn max_rel_dev(analytic: &[ComplexMatrix], fd: &[ComplexMatrix]) -> f64 {
        analytic
            .iter()
            .zip(fd)
            .map(|(a, f)| {
                let scale = f.iter().map(|c| c.norm()).fold(0.0, f64::max).max(1e-3);
                (a - f).iter().map(|c| c.norm()).fold(0.0, f64::max) / scale
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn gradient_at_pole_is_finite_and_matches_differences() {
        let p = StateParams::new(2, vec![0.0, 0.0], vec![0.0]).unwrap();
        let g = state_gradient(&p);
        assert!(g
            .iter()
            .all(|m| m.iter().all(|c| c.re.is_finite() && c.im.is_finite())));
        assert!(max_rel_dev(&g, &fd_partials(&p, 1e-5)) < 1e-6);
    }

    #[test]
    fn gradient_matches_finite_differences_d3() {
        let mut rng = chain_rng(21, 0);
        for _ in 0..20 {
            let p = StateParams::random(3, &mut rng);
            assert!(max_rel_dev(&state_gradient(&p), &fd_partials(&p, 1e-5)) < 1e-6);
        }
    }

    #[test]
    fn closed_form_chart_jacobian_matches_numerical_log_det() {
        let mut rng = chain_rng(4, 0);
        for d in 2..=5 {
            let basis = traceless_basis(d);
            for _ in 0..10 {
                let p = StateParams::random(d, &mut rng);
                let jac = coordinate_jacobian(&state_gradient(&p), &basis);
                let numeric = crate::linalg::half_log_det_gram(&jac);
                let closed = chart_log_jacobian(&p);
                assert!(
                    (numeric - closed).abs() < 1e-8 * closed.abs().max(1.0),
                    "d={d}: numeric {numeric} closed {closed}"
                );
            }
        }
    }

    #[test]
    fn chart_jacobian_vanishes_at_maximally_mixed_preimage() {
        assert_eq!(
            chart_log_jacobian(&StateParams::maximally_mixed(3)),
            f64::NEG_INFINITY
        );
        assert!(chart_log_jacobian(&StateParams::balanced(3)).is_finite());
    }
}
