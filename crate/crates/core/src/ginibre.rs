//! Direct sampling of the primitive prior through the Ginibre ensemble.
//!
//! `ρ = AA†/tr(AA†)` with `A` a square matrix of independent complex Gaussians,
//! real and imaginary parts each `N(0, 1/2)`.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::rng::{chain_rng, GINIBRE_STREAM};
use crate::sample_set::{Method, SampleMeta, SampleSet};
use crate::state::DensityMatrix;

pub fn ginibre_matrix<R: Rng + ?Sized>(d: usize, rng: &mut R) -> ComplexMatrix {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    ComplexMatrix::from_fn(d, d, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(s * re, s * im)
    })
}

/// One draw from the Hilbert-Schmidt (primitive) ensemble.
pub fn ginibre_state<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DensityMatrix {
    loop {
        let a = ginibre_matrix(d, rng);
        let mut m = &a * a.adjoint();
        let tr = m.trace().re;
        if tr > 0.0 {
            m.unscale_mut(tr);
            // exact Hermitian symmetry
            for j in 0..d {
                m[(j, j)].im = 0.0;
                for k in (j + 1)..d {
                    m[(k, j)] = m[(j, k)].conj();
                }
            }
            return DensityMatrix::from_matrix_unchecked(m);
        }
    }
}

/// `n` independent draws from the Ginibre stream of `seed`.
pub fn ginibre_sampleset(d: usize, n: usize, seed: u64) -> Result<SampleSet> {
    if d == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    if n == 0 {
        return Err(Error::InvalidConfig("need at least one draw".into()));
    }
    let mut rng = chain_rng(seed, GINIBRE_STREAM);
    let states = (0..n).map(|_| ginibre_state(d, &mut rng)).collect();
    let mut meta = SampleMeta::new(d);
    meta.method = Some(Method::Ginibre);
    meta.prior = Some("prim".into());
    meta.numstep = Some(n);
    meta.seed = Some(seed);
    SampleSet::new(d, states, meta)
}
