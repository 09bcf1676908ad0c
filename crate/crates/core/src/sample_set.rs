//! In-memory sample sets and their metadata.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::povm::{born_probabilities, Povm, ProbVector};
use crate::state::DensityMatrix;

pub const FORMAT_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Hmc,
    Ginibre,
}

/// Flat metadata sidecar. Fields that do not apply to a set are left out.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleMeta {
    pub format_version: u32,
    pub d: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub numstep: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nt: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nf: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub num: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qvar: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nint: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stepsize: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptrate: Option<f64>,
    /// Acceptance rate of each chain when several were merged.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chain_acceptrates: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub povm: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pullback: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub thin: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub chains: Option<usize>,
    /// Name of the fiber-volume estimator behind the `_range` file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub range: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experimental: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub resampled: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

impl SampleMeta {
    pub fn new(d: usize) -> Self {
        Self {
            format_version: FORMAT_VERSION,
            d,
            method: None,
            numstep: None,
            nt: None,
            nf: None,
            num: None,
            pvar: None,
            qvar: None,
            nint: None,
            stepsize: None,
            acceptrate: None,
            chain_acceptrates: None,
            povm: None,
            prior: None,
            beta: None,
            pullback: None,
            seed: None,
            burn_in: None,
            thin: None,
            chains: None,
            range: None,
            experimental: None,
            resampled: None,
            family: None,
        }
    }
}

/// States of one dimension plus per-state purity and optional probabilities
/// and weights. All per-state lists have the same length.
#[derive(Clone, Debug)]
pub struct SampleSet {
    d: usize,
    states: Vec<DensityMatrix>,
    purity: Vec<f64>,
    probabilities: Option<Vec<ProbVector>>,
    weights: Option<Vec<f64>>,
    pub meta: SampleMeta,
}

impl SampleSet {
    pub fn new(d: usize, states: Vec<DensityMatrix>, meta: SampleMeta) -> Result<Self> {
        if let Some(s) = states.iter().find(|s| s.d() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: s.d(),
            });
        }
        if meta.d != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: meta.d,
            });
        }
        let purity = states.iter().map(DensityMatrix::purity).collect();
        Ok(Self {
            d,
            states,
            purity,
            probabilities: None,
            weights: None,
            meta,
        })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityMatrix] {
        &self.states
    }

    pub fn purity(&self) -> &[f64] {
        &self.purity
    }

    pub fn probabilities(&self) -> Option<&[ProbVector]> {
        self.probabilities.as_deref()
    }

    pub fn weights(&self) -> Option<&[f64]> {
        self.weights.as_deref()
    }

    /// Attaches Born probabilities under `povm`.
    pub fn with_probabilities(mut self, povm: &Povm) -> Result<Self> {
        let p = self
            .states
            .iter()
            .map(|s| born_probabilities(povm, s))
            .collect::<Result<Vec<_>>>()?;
        self.probabilities = Some(p);
        Ok(self)
    }

    /// Attaches per-state fiber volumes ("range").
    pub fn with_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, self.len())?;
        self.weights = Some(weights);
        Ok(self)
    }

    pub fn without_weights(mut self) -> Self {
        self.weights = None;
        self
    }

    /// Concatenates sets of one dimension; probabilities and weights survive only
    /// when every part has them. Metadata comes from the first part.
    pub fn concat(parts: Vec<SampleSet>) -> Result<Self> {
        let mut it = parts.into_iter();
        let mut out = it.next().ok_or(Error::Empty("sample sets to merge"))?;
        for part in it {
            if part.d != out.d {
                return Err(Error::DimensionMismatch {
                    expected: out.d,
                    found: part.d,
                });
            }
            out.states.extend(part.states);
            out.purity.extend(part.purity);
            out.probabilities = match (out.probabilities.take(), part.probabilities) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            };
            out.weights = match (out.weights.take(), part.weights) {
                (Some(mut a), Some(b)) => {
                    a.extend(b);
                    Some(a)
                }
                _ => None,
            };
        }
        Ok(out)
    }

    /// Copies the states at `indices`, in that order. Weights are dropped.
    pub fn select(&self, indices: &[usize]) -> Self {
        Self {
            d: self.d,
            states: indices.iter().map(|&i| self.states[i].clone()).collect(),
            purity: indices.iter().map(|&i| self.purity[i]).collect(),
            probabilities: self
                .probabilities
                .as_ref()
                .map(|p| indices.iter().map(|&i| p[i].clone()).collect()),
            weights: None,
            meta: self.meta.clone(),
        }
    }
}

/// Weights must be finite, nonnegative, one per state and not all zero.
pub fn check_weights(weights: &[f64], n: usize) -> Result<()> {
    if weights.len() != n {
        return Err(Error::WeightCountMismatch {
            expected: n,
            found: weights.len(),
        });
    }
    if let Some((i, &w)) = weights
        .iter()
        .enumerate()
        .find(|(_, w)| !w.is_finite() || **w < 0.0)
    {
        return Err(Error::InvalidWeight { index: i, value: w });
    }
    if n > 0 && weights.iter().all(|&w| w == 0.0) {
        return Err(Error::ZeroWeights);
    }
    Ok(())
}
