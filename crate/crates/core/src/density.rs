//! Prior densities on probability space and their pull-back to the state chart.
//!
//! The chain moves on chart coordinates `x`. In IC mode its log target is
//! `log w(p(x)) + ½ log det(J Jᵀ)` with `J = ∂p_sel/∂x` over the POVM's independent
//! outcome coordinates. In NIC mode the reference measure is the flat measure on
//! state space, so the Jacobian is taken with respect to orthonormal coordinates of
//! `ρ` instead, while `w` still sees the NIC probabilities. Everything is in the log
//! domain so high dimensions do not underflow.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, ComplexMatrix};
use crate::povm::{born_probabilities, Povm};
use crate::state::{
    chart_log_jacobian, chart_log_jacobian_grad, coordinate_jacobian, params_to_state,
    state_gradient, StateParams,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PriorKind {
    Primitive,
    Jeffreys,
    Conjugate,
}

/// Unnormalized target `w(p)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TargetDensity {
    kind: PriorKind,
    beta: Option<Vec<f64>>,
}

impl TargetDensity {
    pub fn primitive() -> Self {
        Self {
            kind: PriorKind::Primitive,
            beta: None,
        }
    }

    pub fn jeffreys() -> Self {
        Self {
            kind: PriorKind::Jeffreys,
            beta: None,
        }
    }

    /// `w ∝ Π p_k^{β_k}`; every `β_k` must be finite and nonnegative.
    pub fn conjugate(beta: Vec<f64>) -> Result<Self> {
        if beta.is_empty() {
            return Err(Error::InvalidConfig(
                "conjugate prior needs at least one β".into(),
            ));
        }
        if let Some((i, &b)) = beta
            .iter()
            .enumerate()
            .find(|(_, b)| !b.is_finite() || **b < 0.0)
        {
            return Err(Error::InvalidWeight { index: i, value: b });
        }
        Ok(Self {
            kind: PriorKind::Conjugate,
            beta: Some(beta),
        })
    }

    /// Conjugate prior with every hyperparameter equal to one.
    pub fn conjugate_unit(k: usize) -> Self {
        Self {
            kind: PriorKind::Conjugate,
            beta: Some(vec![1.0; k]),
        }
    }

    /// Parses `prim`, `jeff` or `conj`; `conj` without `beta` means all ones.
    pub fn parse(token: &str, beta: Option<Vec<f64>>, k: usize) -> Result<Self> {
        let has_beta = beta.is_some();
        let t = match token.to_ascii_lowercase().as_str() {
            "prim" | "primitive" => Self::primitive(),
            "jeff" | "jeffreys" => Self::jeffreys(),
            "conj" | "conjugate" => match beta {
                Some(b) => Self::conjugate(b)?,
                None => Self::conjugate_unit(k),
            },
            other => return Err(Error::InvalidConfig(format!("unknown prior `{other}`"))),
        };
        if t.kind != PriorKind::Conjugate && has_beta {
            return Err(Error::InvalidConfig(format!(
                "β only applies to the conjugate prior, not `{token}`"
            )));
        }
        Ok(t)
    }

    pub fn kind(&self) -> PriorKind {
        self.kind
    }

    pub fn beta(&self) -> Option<&[f64]> {
        self.beta.as_deref()
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            PriorKind::Primitive => "prim",
            PriorKind::Jeffreys => "jeff",
            PriorKind::Conjugate => "conj",
        }
    }

    /// Exponent of `p_k` in `w`; zero for the primitive prior.
    pub fn exponent(&self, k: usize) -> f64 {
        match self.kind {
            PriorKind::Primitive => 0.0,
            PriorKind::Jeffreys => -0.5,
            PriorKind::Conjugate => self.beta.as_ref().map_or(0.0, |b| b[k]),
        }
    }
}

impl fmt::Display for TargetDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `log w(p)`, unnormalized. Any zero (or negative) probability under a nonzero
/// exponent gives `-∞`.
pub fn log_prior(target: &TargetDensity, p: &[f64]) -> f64 {
    if target.kind == PriorKind::Primitive {
        return 0.0;
    }
    let mut acc = 0.0;
    for (k, &pk) in p.iter().enumerate() {
        let e = target.exponent(k);
        if e == 0.0 {
            continue;
        }
        if !(pk > 0.0) {
            return f64::NEG_INFINITY;
        }
        acc += e * pk.ln();
    }
    acc
}

/// `∂ log w / ∂p_k`.
pub fn grad_log_prior(target: &TargetDensity, p: &[f64]) -> Result<Vec<f64>> {
    p.iter()
        .enumerate()
        .map(|(k, &pk)| {
            let e = target.exponent(k);
            if e == 0.0 {
                Ok(0.0)
            } else if pk > 0.0 {
                Ok(e / pk)
            } else {
                Err(Error::ZeroProbability { index: k })
            }
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PullbackMode {
    /// Uniform reference measure on the POVM's own probability coordinates.
    IcExact,
    /// Flat reference measure on state space; needs fiber weights afterwards to
    /// target `w` on probability space.
    NicStateSpace,
}

impl fmt::Display for PullbackMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PullbackMode::IcExact => "ic-exact",
            PullbackMode::NicStateSpace => "nic-state-space",
        })
    }
}

/// How the log-det part of the gradient is obtained.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LogDetGradient {
    /// Closed form of the chart volume factor.
    Analytic,
    /// `tr(J⁺ ∂J/∂x_j)` with `∂J/∂x_j` from central differences of `J`.
    JacobianDifferences { step: f64 },
}

/// Target density pulled back to chart coordinates.
#[derive(Clone, Debug)]
pub struct PullbackDensity {
    povm: Povm,
    target: TargetDensity,
    mode: PullbackMode,
    basis: Vec<ComplexMatrix>,
    /// `log |det L|` of the fixed map from basis coordinates to the reference
    /// coordinates; zero in NIC-state-space mode, where that map is the identity.
    coordinate_log_det: f64,
    log_det_gradient: LogDetGradient,
}

impl PullbackDensity {
    /// IC-exact for IC POVMs, NIC-state-space otherwise.
    pub fn new(povm: Povm, target: TargetDensity) -> Result<Self> {
        let mode = if povm.is_ic() {
            PullbackMode::IcExact
        } else {
            PullbackMode::NicStateSpace
        };
        Self::with_mode(povm, target, mode)
    }

    pub fn with_mode(povm: Povm, target: TargetDensity, mode: PullbackMode) -> Result<Self> {
        if mode == PullbackMode::IcExact && !povm.is_ic() {
            return Err(Error::UnsupportedPovm(
                "IC-exact pull-back",
                povm.name().into(),
            ));
        }
        if let Some(b) = target.beta() {
            if b.len() != povm.len() {
                return Err(Error::LengthMismatch {
                    what: "conjugate β",
                    expected: povm.len(),
                    found: b.len(),
                });
            }
        }
        let basis = linalg::traceless_basis(povm.d());
        let coordinate_log_det = match mode {
            PullbackMode::IcExact => {
                let sel = povm.independent_coordinates();
                let outcomes = povm.outcomes();
                let l = DMatrix::from_fn(sel.len(), basis.len(), |i, a| {
                    linalg::re_trace_product(&outcomes[sel[i]], &basis[a])
                });
                linalg::half_log_det_gram(&l)
            }
            PullbackMode::NicStateSpace => 0.0,
        };
        if !coordinate_log_det.is_finite() {
            return Err(Error::SingularJacobian);
        }
        Ok(Self {
            povm,
            target,
            mode,
            basis,
            coordinate_log_det,
            log_det_gradient: LogDetGradient::Analytic,
        })
    }

    pub fn with_log_det_gradient(mut self, method: LogDetGradient) -> Self {
        self.log_det_gradient = method;
        self
    }

    pub fn povm(&self) -> &Povm {
        &self.povm
    }

    pub fn target(&self) -> &TargetDensity {
        &self.target
    }

    pub fn mode(&self) -> PullbackMode {
        self.mode
    }

    pub fn d(&self) -> usize {
        self.povm.d()
    }

    /// Number of chart coordinates, `d² − 1`.
    pub fn dim(&self) -> usize {
        let d = self.d();
        d * d - 1
    }

    fn check(&self, x: &StateParams) -> Result<()> {
        if x.d() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: x.d(),
            });
        }
        Ok(())
    }

    /// Jacobian of the reference coordinates with respect to `x`.
    pub fn jacobian(&self, partials: &[ComplexMatrix]) -> DMatrix<f64> {
        match self.mode {
            PullbackMode::IcExact => {
                let sel = self.povm.independent_coordinates();
                let outcomes = self.povm.outcomes();
                DMatrix::from_fn(sel.len(), partials.len(), |i, j| {
                    linalg::re_trace_product(&outcomes[sel[i]], &partials[j])
                })
            }
            PullbackMode::NicStateSpace => coordinate_jacobian(partials, &self.basis),
        }
    }

    /// `log w(p(x)) + ½ log det(J Jᵀ)`; `-∞` on zero-probability or singular points.
    ///
    /// `J` factors as the constant coordinate map times the chart Jacobian, so the
    /// log-determinant is evaluated in closed form. Forming `J` and factoring it
    /// loses all precision at d ≥ 8, where its columns span many decades.
    pub fn log_pullback(&self, x: &StateParams) -> Result<f64> {
        self.check(x)?;
        let rho = params_to_state(x);
        let p = born_probabilities(&self.povm, &rho)?;
        let lw = log_prior(&self.target, &p);
        if lw == f64::NEG_INFINITY {
            return Ok(lw);
        }
        Ok(lw + self.coordinate_log_det + chart_log_jacobian(x))
    }

    /// Gradient of [`Self::log_pullback`].
    pub fn grad_log_pullback(&self, x: &StateParams) -> Result<Vec<f64>> {
        self.check(x)?;
        let partials = state_gradient(x);
        let mut g = self.prior_gradient(x, &partials)?;
        let ld = match self.log_det_gradient {
            LogDetGradient::Analytic => chart_log_jacobian_grad(x),
            LogDetGradient::JacobianDifferences { step } => {
                self.log_det_gradient_by_differences(x, &partials, step)?
            }
        };
        for (gi, li) in g.iter_mut().zip(ld) {
            *gi += li;
        }
        if g.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularJacobian);
        }
        Ok(g)
    }

    /// Chain rule `Σ_k (∂ log w/∂p_k) tr(Π_k ∂ρ/∂x_j)`, evaluated as
    /// `tr(M ∂ρ/∂x_j)` with `M = Σ_k g_k Π_k`.
    fn prior_gradient(&self, x: &StateParams, partials: &[ComplexMatrix]) -> Result<Vec<f64>> {
        if self.target.kind() == PriorKind::Primitive {
            return Ok(vec![0.0; partials.len()]);
        }
        let rho = params_to_state(x);
        let p = born_probabilities(&self.povm, &rho)?;
        let gp = grad_log_prior(&self.target, &p)?;
        let d = self.d();
        let mut m = ComplexMatrix::zeros(d, d);
        for (o, &gk) in self.povm.outcomes().iter().zip(&gp) {
            if gk != 0.0 {
                m += o * Complex64::new(gk, 0.0);
            }
        }
        Ok(partials
            .iter()
            .map(|dr| linalg::re_trace_product(&m, dr))
            .collect())
    }

    /// `∂/∂x_j ½ log det(J Jᵀ) = tr(J⁺ ∂J/∂x_j)`, `J⁺ = Jᵀ (J Jᵀ)⁻¹`.
    fn log_det_gradient_by_differences(
        &self,
        x: &StateParams,
        partials: &[ComplexMatrix],
        step: f64,
    ) -> Result<Vec<f64>> {
        let jac = self.jacobian(partials);
        let gram = &jac * jac.transpose();
        let gram_inv = gram.try_inverse().ok_or(Error::SingularJacobian)?;
        let pinv = jac.transpose() * gram_inv;
        let flat = x.to_flat();
        let mut out = Vec::with_capacity(flat.len());
        for j in 0..flat.len() {
            let mut xp = flat.clone();
            let mut xm = flat.clone();
            xp[j] += step;
            xm[j] -= step;
            let jp = self.jacobian(&state_gradient(&StateParams::from_flat(x.d(), &xp)?));
            let jm = self.jacobian(&state_gradient(&StateParams::from_flat(x.d(), &xm)?));
            let dj = (jp - jm) / (2.0 * step);
            out.push((&pinv * dj).trace());
        }
        Ok(out)
    }
}
