//! Built-in measurements, the Born rule, and constraint audits on probability vectors.

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, pauli_x, pauli_y, pauli_z, ComplexMatrix};
use crate::state::DensityMatrix;

/// Absolute tolerance of every audited η and δ term.
pub const AUDIT_TOL: f64 = 1e-10;

/// Names accepted by [`Povm::by_name`], in catalog order.
pub const CATALOG: [&str; 9] = [
    "tetrahedron",
    "pauli",
    "trine",
    "anti-trine",
    "crosshair",
    "qutrit-sic",
    "2tthd",
    "tat",
    "bb84",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Completeness {
    Ic,
    Nic,
}

impl fmt::Display for Completeness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Completeness::Ic => "IC",
            Completeness::Nic => "NIC",
        })
    }
}

/// Which audit rule applies to a POVM's probability vectors.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConstraintRule {
    /// η(p_k), δ(Σp − 1), η(1/3 − Σp²)
    Tetrahedron,
    /// δ(p_k + p_{k+3} − 1/3), η(p_k), η(1/9 − Σ(p_l − p_{l+3})²)
    Pauli,
    /// η(p_k), δ(Σp − 1), η(1/2 − Σp²); shared by trine and anti-trine
    Trine,
    /// δ(p_k + p_{k+2} − 1/2), η(p_k), η(1/4 − (p_1 − p_3)² − (p_2 − p_4)²)
    Crosshair,
    /// η(p_k), δ(Σp − 1), distance from the affine hull of the Born image
    AffineHull,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PovmFamily {
    Tetrahedron,
    Pauli,
    Trine,
    AntiTrine,
    Crosshair,
    QutritSic,
    Product,
}

#[derive(Debug)]
struct PovmInner {
    name: String,
    family: PovmFamily,
    d: usize,
    outcomes: Vec<ComplexMatrix>,
    completeness: Completeness,
    indep_dim: usize,
    rule: ConstraintRule,
    independent: Vec<usize>,
    offset: Vec<f64>,
    hull: DMatrix<f64>,
}

/// A measurement: `K` positive outcome operators summing to the identity.
///
/// Cheap to clone; the outcome operators and the precomputed Born-map geometry are
/// shared.
#[derive(Clone, Debug)]
pub struct Povm(Arc<PovmInner>);

impl Povm {
    fn build(
        name: &str,
        family: PovmFamily,
        outcomes: Vec<ComplexMatrix>,
        rule: ConstraintRule,
    ) -> Self {
        let d = outcomes[0].nrows();
        let basis = linalg::traceless_basis(d);
        let k = outcomes.len();
        let born = DMatrix::from_fn(k, basis.len(), |i, j| {
            linalg::re_trace_product(&outcomes[i], &basis[j])
        });
        let offset = outcomes.iter().map(|o| o.trace().re / d as f64).collect();
        let independent = independent_rows(&born, 1e-9);
        let indep_dim = independent.len();
        let hull = range_basis(&born, 1e-10);
        let completeness = if indep_dim == d * d - 1 {
            Completeness::Ic
        } else {
            Completeness::Nic
        };
        Povm(Arc::new(PovmInner {
            name: name.to_string(),
            family,
            d,
            outcomes,
            completeness,
            indep_dim,
            rule,
            independent,
            offset,
            hull,
        }))
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "tetrahedron" | "tthd" => Ok(make_tetrahedron()),
            "pauli" => Ok(make_pauli()),
            "trine" => Ok(make_trine()),
            "anti-trine" | "antitrine" => Ok(make_anti_trine()),
            "crosshair" | "cross" => Ok(make_crosshair()),
            "qutrit-sic" | "sic" => Ok(make_qutrit_sic()),
            "2tthd" => Ok(tensor_povm_named(
                &make_tetrahedron(),
                &make_tetrahedron(),
                "2tthd",
            )),
            "tat" => Ok(tensor_povm_named(&make_trine(), &make_anti_trine(), "tat")),
            "bb84" => Ok(tensor_povm_named(
                &make_crosshair(),
                &make_crosshair(),
                "bb84",
            )),
            _ => Err(Error::UnknownPovm(name.to_string())),
        }
    }

    pub fn name(&self) -> &str {
        &self.0.name
    }

    pub fn family(&self) -> PovmFamily {
        self.0.family
    }

    pub fn d(&self) -> usize {
        self.0.d
    }

    /// Number of outcomes `K`.
    pub fn len(&self) -> usize {
        self.0.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.outcomes.is_empty()
    }

    pub fn outcomes(&self) -> &[ComplexMatrix] {
        &self.0.outcomes
    }

    pub fn completeness(&self) -> Completeness {
        self.0.completeness
    }

    pub fn is_ic(&self) -> bool {
        self.0.completeness == Completeness::Ic
    }

    /// Number of independent probability coordinates.
    pub fn indep_dim(&self) -> usize {
        self.0.indep_dim
    }

    /// Outcome indices used as independent coordinates (first maximal independent
    /// set in outcome order).
    pub fn independent_coordinates(&self) -> &[usize] {
        &self.0.independent
    }

    pub fn constraint_rule(&self) -> ConstraintRule {
        self.0.rule
    }

    /// max entry of `|Σ_k Π_k − I|`.
    pub fn completeness_residual(&self) -> f64 {
        let d = self.d();
        let mut sum = ComplexMatrix::zeros(d, d);
        for o in self.outcomes() {
            sum += o;
        }
        (sum - linalg::identity(d))
            .iter()
            .map(|c| c.norm())
            .fold(0.0, f64::max)
    }

    /// Smallest eigenvalue over all outcome operators.
    pub fn min_outcome_eigenvalue(&self) -> f64 {
        self.outcomes()
            .iter()
            .map(linalg::min_eigenvalue)
            .fold(f64::INFINITY, f64::min)
    }

    /// Euclidean distance of `p` from the affine hull of the Born image.
    pub fn hull_distance(&self, p: &[f64]) -> f64 {
        let inner = &self.0;
        let v = DMatrix::from_iterator(p.len(), 1, p.iter().zip(&inner.offset).map(|(a, b)| a - b));
        let proj = &inner.hull * (inner.hull.transpose() * &v);
        (v - proj).norm()
    }
}

impl PartialEq for Povm {
    fn eq(&self, other: &Self) -> bool {
        self.0.name == other.0.name && self.0.outcomes == other.0.outcomes
    }
}

/// Greedy selection of linearly independent rows (modified Gram-Schmidt).
fn independent_rows(m: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    let mut kept: Vec<nalgebra::DVector<f64>> = Vec::new();
    let mut idx = Vec::new();
    for i in 0..m.nrows() {
        let mut r = m.row(i).transpose().into_owned();
        let norm0 = r.norm();
        if norm0 == 0.0 {
            continue;
        }
        for q in &kept {
            let c = q.dot(&r);
            r -= q * c;
        }
        let n = r.norm();
        if n > tol * norm0 {
            kept.push(r / n);
            idx.push(i);
        }
    }
    idx
}

/// Orthonormal basis of the column space, from the SVD.
fn range_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors requested");
    let smax = svd.singular_values.iter().copied().fold(0.0, f64::max);
    let cols: Vec<usize> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s > tol * smax.max(1.0))
        .map(|(i, _)| i)
        .collect();
    DMatrix::from_fn(m.nrows(), cols.len(), |r, c| u[(r, cols[c])])
}

/// `α(1 + n·σ)`.
fn qubit_effect(alpha: f64, n: [f64; 3]) -> ComplexMatrix {
    let c = |v: f64| Complex64::new(v, 0.0);
    (linalg::identity(2) + pauli_x() * c(n[0]) + pauli_y() * c(n[1]) + pauli_z() * c(n[2]))
        * c(alpha)
}

/// Four-outcome symmetric measurement of minimal qubit tomography.
pub fn make_tetrahedron() -> Povm {
    let s = 1.0 / 3f64.sqrt();
    let dirs = [
        [1.0, -1.0, -1.0],
        [-1.0, 1.0, -1.0],
        [-1.0, -1.0, 1.0],
        [1.0, 1.0, 1.0],
    ];
    let outcomes = dirs
        .iter()
        .map(|v| qubit_effect(0.25, [v[0] * s, v[1] * s, v[2] * s]))
        .collect();
    Povm::build(
        "tetrahedron",
        PovmFamily::Tetrahedron,
        outcomes,
        ConstraintRule::Tetrahedron,
    )
}

/// Six outcomes: `(1 ± σ_x)/6`, `(1 ± σ_y)/6`, `(1 ± σ_z)/6` ordered `+x, +y, +z, −x, −y, −z`.
pub fn make_pauli() -> Povm {
    let dirs = [
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
        [0.0, 0.0, 1.0],
        [-1.0, 0.0, 0.0],
        [0.0, -1.0, 0.0],
        [0.0, 0.0, -1.0],
    ];
    let outcomes = dirs.iter().map(|&v| qubit_effect(1.0 / 6.0, v)).collect();
    Povm::build("pauli", PovmFamily::Pauli, outcomes, ConstraintRule::Pauli)
}

fn trine_with_sign(sign: f64, name: &str, family: PovmFamily) -> Povm {
    let h = 3f64.sqrt() / 2.0;
    let dirs = [
        [0.0, 0.0, sign],
        [sign * h, 0.0, -sign * 0.5],
        [-sign * h, 0.0, -sign * 0.5],
    ];
    let outcomes = dirs.iter().map(|&v| qubit_effect(1.0 / 3.0, v)).collect();
    Povm::build(name, family, outcomes, ConstraintRule::Trine)
}

/// Three outcomes in the x–z plane; blind to `y`.
pub fn make_trine() -> Povm {
    trine_with_sign(1.0, "trine", PovmFamily::Trine)
}

/// The trine with the signs of `x` and `z` flipped.
pub fn make_anti_trine() -> Povm {
    trine_with_sign(-1.0, "anti-trine", PovmFamily::AntiTrine)
}

/// `(1 ± σ_z)/4` and `(1 ± σ_x)/4`, ordered `+z, +x, −z, −x`.
pub fn make_crosshair() -> Povm {
    let dirs = [
        [0.0, 0.0, 1.0],
        [1.0, 0.0, 0.0],
        [0.0, 0.0, -1.0],
        [-1.0, 0.0, 0.0],
    ];
    let outcomes = dirs.iter().map(|&v| qubit_effect(0.25, v)).collect();
    Povm::build(
        "crosshair",
        PovmFamily::Crosshair,
        outcomes,
        ConstraintRule::Crosshair,
    )
}

/// The nine unnormalized SIC vectors for a qutrit (columns), squared norm 2 each.
pub fn qutrit_sic_vectors() -> Vec<[Complex64; 3]> {
    let one = Complex64::new(1.0, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    let w = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
    let wc = w.conj();
    vec![
        [one, w, zero],
        [one, wc, zero],
        [one, one, zero],
        [zero, one, w],
        [zero, one, wc],
        [zero, one, one],
        [w, zero, one],
        [wc, zero, one],
        [one, zero, one],
    ]
}

/// Qutrit SIC: `Π_k = |c_k⟩⟨c_k| / 6`.
pub fn make_qutrit_sic() -> Povm {
    let outcomes = qutrit_sic_vectors()
        .iter()
        .map(|c| ComplexMatrix::from_fn(3, 3, |j, k| c[j] * c[k].conj() / 6.0))
        .collect();
    Povm::build(
        "qutrit-sic",
        PovmFamily::QutritSic,
        outcomes,
        ConstraintRule::AffineHull,
    )
}

/// `Π_{jk} = Π_j ⊗ Π_k`, `j` outer.
pub fn tensor_povm(a: &Povm, b: &Povm) -> Povm {
    let name = format!("{}*{}", a.name(), b.name());
    tensor_povm_named(a, b, &name)
}

pub fn tensor_povm_named(a: &Povm, b: &Povm, name: &str) -> Povm {
    let mut outcomes = Vec::with_capacity(a.len() * b.len());
    for pa in a.outcomes() {
        for pb in b.outcomes() {
            outcomes.push(linalg::kron(pa, pb));
        }
    }
    Povm::build(
        name,
        PovmFamily::Product,
        outcomes,
        ConstraintRule::AffineHull,
    )
}

/// `n`-fold tensor power of the tetrahedron (IC on `d = 2^n`), named `"{n}tthd"`.
pub fn tetrahedron_power(n: usize) -> Povm {
    let t = make_tetrahedron();
    if n <= 1 {
        return t;
    }
    let mut acc = t.clone();
    for _ in 2..n {
        acc = tensor_povm(&acc, &t);
    }
    tensor_povm_named(&acc, &t, &format!("{n}tthd"))
}

/// Outcome probabilities, one entry per outcome.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbVector(Vec<f64>);

impl ProbVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("probability vector"));
        }
        if let Some((i, &v)) = values.iter().enumerate().find(|(_, &v)| v < -1e-14) {
            return Err(Error::InvalidWeight { index: i, value: v });
        }
        let s: f64 = values.iter().sum();
        if (s - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidTrace(s));
        }
        Ok(Self(values))
    }

    pub(crate) fn from_vec_unchecked(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Deref for ProbVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// `p_k = tr(Π_k ρ)`.
pub fn born_probabilities(povm: &Povm, rho: &DensityMatrix) -> Result<ProbVector> {
    if povm.d() != rho.d() {
        return Err(Error::DimensionMismatch {
            expected: povm.d(),
            found: rho.d(),
        });
    }
    let p = povm
        .outcomes()
        .iter()
        .map(|o| linalg::re_trace_product(o, rho.matrix()))
        .collect();
    Ok(ProbVector::from_vec_unchecked(p))
}

#[derive(Clone, Debug, PartialEq)]
pub struct Violation {
    pub label: String,
    pub magnitude: f64,
}

/// Outcome of auditing one probability vector.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ConstraintReport {
    pub violations: Vec<Violation>,
}

impl ConstraintReport {
    pub fn satisfied(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn worst(&self) -> f64 {
        self.violations
            .iter()
            .map(|v| v.magnitude)
            .fold(0.0, f64::max)
    }

    fn eta(&mut self, label: impl Into<String>, arg: f64) {
        if !(arg >= -AUDIT_TOL) {
            self.violations.push(Violation {
                label: label.into(),
                magnitude: if arg.is_nan() { f64::INFINITY } else { -arg },
            });
        }
    }

    fn delta(&mut self, label: impl Into<String>, arg: f64) {
        if !(arg.abs() <= AUDIT_TOL) {
            self.violations.push(Violation {
                label: label.into(),
                magnitude: if arg.is_nan() {
                    f64::INFINITY
                } else {
                    arg.abs()
                },
            });
        }
    }
}

/// Evaluates the POVM's constraint factor on `p`.
pub fn audit_probabilities(povm: &Povm, p: &[f64]) -> Result<ConstraintReport> {
    if p.len() != povm.len() {
        return Err(Error::LengthMismatch {
            what: "probability vector",
            expected: povm.len(),
            found: p.len(),
        });
    }
    let mut rep = ConstraintReport::default();
    for (k, &pk) in p.iter().enumerate() {
        rep.eta(format!("η(p{})", k + 1), pk);
    }
    let sum: f64 = p.iter().sum();
    let sq: f64 = p.iter().map(|v| v * v).sum();
    match povm.constraint_rule() {
        ConstraintRule::Tetrahedron => {
            rep.delta("δ(Σp−1)", sum - 1.0);
            rep.eta("η(1/3−Σp²)", 1.0 / 3.0 - sq);
        }
        ConstraintRule::Trine => {
            rep.delta("δ(Σp−1)", sum - 1.0);
            rep.eta("η(1/2−Σp²)", 0.5 - sq);
        }
        ConstraintRule::Pauli => {
            for k in 0..3 {
                rep.delta(
                    format!("δ(p{}+p{}−1/3)", k + 1, k + 4),
                    p[k] + p[k + 3] - 1.0 / 3.0,
                );
            }
            let s: f64 = (0..3).map(|l| (p[l] - p[l + 3]).powi(2)).sum();
            rep.eta("η(1/9−Σ(p_l−p_{l+3})²)", 1.0 / 9.0 - s);
        }
        ConstraintRule::Crosshair => {
            for k in 0..2 {
                rep.delta(
                    format!("δ(p{}+p{}−1/2)", k + 1, k + 3),
                    p[k] + p[k + 2] - 0.5,
                );
            }
            let s = (p[0] - p[2]).powi(2) + (p[1] - p[3]).powi(2);
            rep.eta("η(1/4−(p1−p3)²−(p2−p4)²)", 0.25 - s);
        }
        ConstraintRule::AffineHull => {
            rep.delta("δ(Σp−1)", sum - 1.0);
            let dist = povm.hull_distance(p);
            rep.eta("affine hull distance", -dist);
        }
    }
    Ok(rep)
}
