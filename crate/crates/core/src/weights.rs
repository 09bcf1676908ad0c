//! Fiber volumes for NIC POVMs and weighted resampling.
//!
//! A chain that targets `w(p(ρ))` over state space has `p`-marginal `w(p)·V(p)`,
//! where `V(p)` is the volume of states sharing the probabilities `p`. Importance
//! weights `1/V` turn it back into `w(p)`. `_range` files store `V` itself.

use rand::Rng;

use crate::error::{Error, Result};
use crate::ginibre::ginibre_state;
use crate::povm::{born_probabilities, Povm, PovmFamily};
use crate::rng::{chain_rng, FIBER_POOL_STREAM};
use crate::sample_set::{check_weights, SampleSet};
use crate::state::{qubit_to_bloch, DensityMatrix};

/// Length of the unmeasured `y` interval at the state's `(x, z)`.
pub fn qubit_fiber_weight(povm: &Povm, rho: &DensityMatrix) -> Result<f64> {
    match povm.family() {
        PovmFamily::Trine | PovmFamily::AntiTrine | PovmFamily::Crosshair => {}
        _ => {
            return Err(Error::UnsupportedPovm(
                "analytic qubit fiber weight",
                povm.name().into(),
            ))
        }
    }
    let b = qubit_to_bloch(rho)?;
    Ok(2.0 * (1.0 - b.x * b.x - b.z * b.z).max(0.0).sqrt())
}

/// Fiber volumes of a whole set under a single-qubit NIC POVM.
pub fn qubit_fiber_weights(povm: &Povm, set: &SampleSet) -> Result<Vec<f64>> {
    set.states()
        .iter()
        .map(|s| qubit_fiber_weight(povm, s))
        .collect()
}

/// Monte-Carlo fiber-volume estimate with its standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberEstimate {
    pub value: f64,
    pub std_error: f64,
    pub hits: usize,
    pub delta: f64,
}

/// Ginibre draws projected onto a NIC POVM's independent coordinates, sorted by
/// the first coordinate. The density of these points at `p` is proportional to
/// the fiber volume there; box counting estimates it.
#[derive(Clone, Debug)]
pub struct FiberPool {
    coords: Vec<Vec<f64>>,
    independent: Vec<usize>,
    draws: usize,
}

impl FiberPool {
    pub fn new(povm: &Povm, draws: usize, seed: u64) -> Result<Self> {
        if povm.is_ic() {
            return Err(Error::UnsupportedPovm(
                "fiber volume estimate",
                povm.name().into(),
            ));
        }
        if draws == 0 {
            return Err(Error::InvalidConfig(
                "fiber pool needs at least one draw".into(),
            ));
        }
        let independent = povm.independent_coordinates().to_vec();
        let mut rng = chain_rng(seed, FIBER_POOL_STREAM);
        let mut coords = Vec::with_capacity(draws);
        for _ in 0..draws {
            let p = born_probabilities(povm, &ginibre_state(povm.d(), &mut rng))?;
            coords.push(independent.iter().map(|&k| p[k]).collect::<Vec<f64>>());
        }
        coords.sort_by(|a, b| a[0].total_cmp(&b[0]));
        Ok(Self {
            coords,
            independent,
            draws,
        })
    }

    pub fn draws(&self) -> usize {
        self.draws
    }

    pub fn dim(&self) -> usize {
        self.independent.len()
    }

    fn count(&self, q: &[f64], delta: f64) -> usize {
        let lo = self.coords.partition_point(|c| c[0] < q[0] - delta);
        self.coords[lo..]
            .iter()
            .take_while(|c| c[0] <= q[0] + delta)
            .filter(|c| c.iter().zip(q).all(|(a, b)| (a - b).abs() <= delta))
            .count()
    }

    /// Hits in the box of half-width `delta` around `p`, divided by the draw count
    /// and the box volume.
    pub fn estimate(&self, p: &[f64], delta: f64) -> Result<FiberEstimate> {
        if !(delta > 0.0) {
            return Err(Error::InvalidConfig(
                "bin half-width must be positive".into(),
            ));
        }
        let q: Vec<f64> = self.independent.iter().map(|&k| p[k]).collect();
        let hits = self.count(&q, delta);
        if hits == 0 {
            return Err(Error::NoHits {
                draws: self.draws,
                delta,
            });
        }
        let scale = self.draws as f64 * (2.0 * delta).powi(self.dim() as i32);
        Ok(FiberEstimate {
            value: hits as f64 / scale,
            std_error: (hits as f64).sqrt() / scale,
            hits,
            delta,
        })
    }

    /// Doubles the half-width from `delta` until at least `min_hits` draws fall in
    /// the box, up to `max_delta`.
    pub fn estimate_adaptive(
        &self,
        p: &[f64],
        delta: f64,
        min_hits: usize,
        max_delta: f64,
    ) -> Result<FiberEstimate> {
        let mut dl = delta;
        loop {
            match self.estimate(p, dl) {
                Ok(e) if e.hits >= min_hits => return Ok(e),
                Ok(_) | Err(Error::NoHits { .. }) if dl * 2.0 <= max_delta => dl *= 2.0,
                Ok(_) | Err(Error::NoHits { .. }) => {
                    return Err(Error::NoHits {
                        draws: self.draws,
                        delta: dl,
                    })
                }
                Err(e) => return Err(e),
            }
        }
    }
}

/// Settings of the experimental two-qubit fiber estimator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FiberSettings {
    pub draws: usize,
    pub delta: f64,
    pub min_hits: usize,
    pub max_delta: f64,
}

impl Default for FiberSettings {
    fn default() -> Self {
        Self {
            draws: 100_000,
            delta: 0.01,
            min_hits: 16,
            max_delta: 0.64,
        }
    }
}

impl FiberSettings {
    pub fn label(&self) -> String {
        format!(
            "mc-box draws={} delta={} min_hits={} max_delta={}",
            self.draws, self.delta, self.min_hits, self.max_delta
        )
    }
}

/// Estimated fiber volumes of every state in `set`.
pub fn mc_fiber_weights(
    povm: &Povm,
    set: &SampleSet,
    settings: &FiberSettings,
    seed: u64,
) -> Result<Vec<f64>> {
    let pool = FiberPool::new(povm, settings.draws, seed)?;
    set.states()
        .iter()
        .map(|s| {
            let p = born_probabilities(povm, s)?;
            pool.estimate_adaptive(&p, settings.delta, settings.min_hits, settings.max_delta)
                .map(|e| e.value)
        })
        .collect()
}

/// Fiber volumes for any NIC POVM: analytic for one qubit, estimated for two.
pub fn fiber_weights(
    povm: &Povm,
    set: &SampleSet,
    settings: &FiberSettings,
    seed: u64,
) -> Result<Vec<f64>> {
    if povm.d() == 2 {
        qubit_fiber_weights(povm, set)
    } else {
        mc_fiber_weights(povm, set, settings, seed)
    }
}

/// Importance weights `1/V`; a zero volume gets weight zero.
pub fn range_to_importance(range: &[f64]) -> Result<Vec<f64>> {
    range
        .iter()
        .enumerate()
        .map(|(i, &v)| {
            if !v.is_finite() || v < 0.0 {
                Err(Error::InvalidWeight { index: i, value: v })
            } else if v == 0.0 {
                Ok(0.0)
            } else {
                Ok(1.0 / v)
            }
        })
        .collect()
}

/// A sample set with one importance weight per state.
#[derive(Clone, Debug)]
pub struct WeightedSampleSet {
    pub samples: SampleSet,
    pub weights: Vec<f64>,
}

impl WeightedSampleSet {
    pub fn new(samples: SampleSet, weights: Vec<f64>) -> Result<Self> {
        check_weights(&weights, samples.len())?;
        if samples.is_empty() {
            return Err(Error::Empty("weighted sample set"));
        }
        Ok(Self { samples, weights })
    }

    /// Uses `1/range` as importance weights.
    pub fn from_range(samples: SampleSet, range: &[f64]) -> Result<Self> {
        Self::new(samples, range_to_importance(range)?)
    }

    pub fn weighted_mean(&self, f: impl Fn(usize) -> f64) -> f64 {
        let total: f64 = self.weights.iter().sum();
        self.weights
            .iter()
            .enumerate()
            .map(|(i, w)| w * f(i))
            .sum::<f64>()
            / total
    }
}

/// Systematic resampling indices: one uniform offset, `n_out` evenly spaced
/// pointers into the cumulative weights.
pub fn systematic_indices<R: Rng + ?Sized>(
    weights: &[f64],
    n_out: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    check_weights(weights, weights.len())?;
    if weights.is_empty() {
        return Err(Error::Empty("weights"));
    }
    let total: f64 = weights.iter().sum();
    let u0: f64 = rng.random();
    let mut out = Vec::with_capacity(n_out);
    let mut cum = weights[0] / total;
    let mut i = 0;
    for j in 0..n_out {
        let u = (u0 + j as f64) / n_out as f64;
        while cum <= u && i + 1 < weights.len() {
            i += 1;
            cum += weights[i] / total;
        }
        // rounding in the running sum can land on a zero weight at the tail
        while weights[i] == 0.0 && i > 0 {
            i -= 1;
        }
        out.push(i);
    }
    Ok(out)
}

/// Resamples to `n_out` unweighted states.
pub fn resample<R: Rng + ?Sized>(
    ws: &WeightedSampleSet,
    n_out: usize,
    rng: &mut R,
) -> Result<SampleSet> {
    if n_out == 0 {
        return Err(Error::InvalidConfig(
            "resample size must be positive".into(),
        ));
    }
    let idx = systematic_indices(&ws.weights, n_out, rng)?;
    let mut out = ws.samples.select(&idx);
    out.meta.resampled = Some(true);
    out.meta.numstep = Some(n_out);
    Ok(out)
}
