//! Brute-force reference samplers for single-qubit probability regions.
//!
//! Proposals come from the prior restricted to the outcome simplex (a Dirichlet
//! for the tetrahedron and trine, scaled Betas for the paired Pauli and crosshair
//! coordinates), so accepting by the explicit region test alone gives exact draws
//! from `w(p)·w_cstr(p)`. None of this shares code with the chain's density.

use rand::Rng;
use rand_distr::{Beta, Distribution, Gamma};

use crate::density::TargetDensity;
use crate::diagnostics::{ks_two_sample, KsResult};
use crate::error::{Error, Result};
use crate::povm::{born_probabilities, Povm, PovmFamily, ProbVector};
use crate::sample_set::SampleSet;

#[derive(Clone, Debug)]
pub struct OracleDraws {
    pub samples: Vec<ProbVector>,
    pub proposals: usize,
}

impl OracleDraws {
    pub fn acceptance(&self) -> f64 {
        self.samples.len() as f64 / self.proposals as f64
    }

    pub fn coordinate(&self, k: usize) -> Vec<f64> {
        self.samples.iter().map(|p| p[k]).collect()
    }
}

fn dirichlet<R: Rng + ?Sized>(alpha: &[Gamma<f64>], rng: &mut R) -> Vec<f64> {
    let g: Vec<f64> = alpha.iter().map(|a| a.sample(rng)).collect();
    let s: f64 = g.iter().sum();
    g.into_iter().map(|v| v / s).collect()
}

/// `n` exact draws of `p` for a single-qubit POVM under `prior`.
pub fn reject_sample_qubit<R: Rng + ?Sized>(
    povm: &Povm,
    prior: &TargetDensity,
    n: usize,
    rng: &mut R,
) -> Result<OracleDraws> {
    let k = povm.len();
    if let Some(b) = prior.beta() {
        if b.len() != k {
            return Err(Error::LengthMismatch {
                what: "conjugate β",
                expected: k,
                found: b.len(),
            });
        }
    }
    let shape = |i: usize| prior.exponent(i) + 1.0;
    let bad = |e: rand_distr::GammaError| Error::InvalidConfig(e.to_string());
    let mut samples = Vec::with_capacity(n);
    let mut proposals = 0;
    match povm.family() {
        PovmFamily::Tetrahedron | PovmFamily::Trine => {
            let bound = if k == 4 { 1.0 / 3.0 } else { 0.5 };
            let gammas = (0..k)
                .map(|i| Gamma::new(shape(i), 1.0).map_err(bad))
                .collect::<Result<Vec<_>>>()?;
            while samples.len() < n {
                proposals += 1;
                let p = dirichlet(&gammas, rng);
                if p.iter().map(|v| v * v).sum::<f64>() <= bound {
                    samples.push(ProbVector::from_vec_unchecked(p));
                }
            }
        }
        PovmFamily::Pauli | PovmFamily::Crosshair => {
            // outcome i pairs with i + k/2 and the pair sums to 2/k
            let half = k / 2;
            let pair = 2.0 / k as f64;
            let betas = (0..half)
                .map(|i| {
                    Beta::new(shape(i), shape(i + half))
                        .map_err(|e| Error::InvalidConfig(e.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            while samples.len() < n {
                proposals += 1;
                let u: Vec<f64> = betas.iter().map(|b| b.sample(rng)).collect();
                // Bloch components are 2u − 1 along each measured axis
                let r2: f64 = u.iter().map(|v| (2.0 * v - 1.0).powi(2)).sum();
                if r2 <= 1.0 {
                    let mut p = vec![0.0; k];
                    for (i, v) in u.iter().enumerate() {
                        p[i] = pair * v;
                        p[i + half] = pair * (1.0 - v);
                    }
                    samples.push(ProbVector::from_vec_unchecked(p));
                }
            }
        }
        _ => {
            return Err(Error::UnsupportedPovm(
                "rejection oracle",
                povm.name().into(),
            ))
        }
    }
    Ok(OracleDraws { samples, proposals })
}

/// KS test of one probability coordinate, chain against oracle.
pub fn compare_chain_to_oracle(
    set: &SampleSet,
    povm: &Povm,
    oracle: &OracleDraws,
    coordinate: usize,
    threshold: f64,
) -> Result<KsResult> {
    if set.d() != povm.d() {
        return Err(Error::DimensionMismatch {
            expected: povm.d(),
            found: set.d(),
        });
    }
    if coordinate >= povm.len() || oracle.samples.iter().any(|p| p.len() != povm.len()) {
        return Err(Error::LengthMismatch {
            what: "oracle probability vector",
            expected: povm.len(),
            found: oracle.samples.first().map_or(0, |p| p.len()),
        });
    }
    let chain = set
        .states()
        .iter()
        .map(|s| born_probabilities(povm, s).map(|p| p[coordinate]))
        .collect::<Result<Vec<_>>>()?;
    ks_two_sample(&chain, &oracle.coordinate(coordinate), threshold)
}
