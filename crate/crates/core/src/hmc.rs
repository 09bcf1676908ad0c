//! Plain fixed-parameter Hamiltonian Monte Carlo.
//!
//! Potential `U(q) = −log π(q)`, kinetic energy `pᵀp / (2·pvar)`, kick-drift-kick
//! leapfrog with `nint` jumps of size `qvar/nint`, full momentum refresh and a
//! Metropolis test on the total energy.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::density::PullbackDensity;
use crate::error::{Error, Result};
use crate::rng::chain_rng;
use crate::sample_set::{Method, SampleMeta, SampleSet};
use crate::state::{params_to_state, StateParams};

/// Trajectories whose energy error exceeds this are rejected outright.
pub const DIVERGENCE_THRESHOLD: f64 = 50.0;

/// A log density with gradient on flat coordinates.
pub trait LogDensity {
    fn dim(&self) -> usize;
    /// May be `-∞` outside the support.
    fn log_density(&self, q: &[f64]) -> f64;
    /// `None` where the gradient is undefined.
    fn grad_log_density(&self, q: &[f64]) -> Option<Vec<f64>>;
}

impl LogDensity for PullbackDensity {
    fn dim(&self) -> usize {
        PullbackDensity::dim(self)
    }

    fn log_density(&self, q: &[f64]) -> f64 {
        StateParams::from_flat(self.d(), q)
            .and_then(|x| self.log_pullback(&x))
            .unwrap_or(f64::NEG_INFINITY)
    }

    fn grad_log_density(&self, q: &[f64]) -> Option<Vec<f64>> {
        let x = StateParams::from_flat(self.d(), q).ok()?;
        self.grad_log_pullback(&x).ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct HmcConfig {
    pub numstep: usize,
    pub pvar: f64,
    pub qvar: f64,
    pub nint: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub seed: u64,
}

impl Default for HmcConfig {
    fn default() -> Self {
        Self {
            numstep: 1_000_000,
            pvar: 1.0,
            qvar: 0.1,
            nint: 10,
            burn_in: 1000,
            thin: 1,
            seed: 0,
        }
    }
}

impl HmcConfig {
    pub fn stepsize(&self) -> f64 {
        self.qvar / self.nint as f64
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidConfig(msg.into()));
        if !(self.pvar > 0.0 && self.pvar.is_finite()) {
            return bad("pvar must be positive");
        }
        if !(self.qvar > 0.0 && self.qvar.is_finite()) {
            return bad("qvar must be positive");
        }
        if self.nint == 0 {
            return bad("nint must be at least 1");
        }
        if self.thin == 0 {
            return bad("thin must be at least 1");
        }
        Ok(())
    }
}

/// Current position with its cached log density and gradient.
#[derive(Clone, Debug, PartialEq)]
pub struct ChainState {
    pub q: Vec<f64>,
    pub log_density: f64,
    pub grad: Vec<f64>,
}

impl ChainState {
    pub fn new<T: LogDensity + ?Sized>(target: &T, q: Vec<f64>) -> Result<Self> {
        if q.len() != target.dim() {
            return Err(Error::LengthMismatch {
                what: "chain position",
                expected: target.dim(),
                found: q.len(),
            });
        }
        let log_density = target.log_density(&q);
        if !log_density.is_finite() {
            return Err(Error::InvalidConfig(
                "initial point has zero or undefined target density".into(),
            ));
        }
        let grad = target.grad_log_density(&q).ok_or(Error::SingularJacobian)?;
        Ok(Self {
            q,
            log_density,
            grad,
        })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ChainStats {
    pub proposals: usize,
    pub accepts: usize,
    pub divergences: usize,
}

impl ChainStats {
    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepts as f64 / self.proposals as f64
        }
    }
}

/// End point of one leapfrog trajectory.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub q: Vec<f64>,
    pub p: Vec<f64>,
    pub log_density: f64,
    pub grad: Vec<f64>,
    pub divergent: bool,
}

/// `n` kick-drift-kick steps of size `eps` from `(q0, p0)`, whose gradient is `g0`.
pub fn leapfrog<T: LogDensity + ?Sized>(
    target: &T,
    q0: &[f64],
    p0: &[f64],
    g0: &[f64],
    eps: f64,
    n: usize,
    pvar: f64,
) -> Trajectory {
    let mut q = q0.to_vec();
    let mut p = p0.to_vec();
    let mut g = g0.to_vec();
    for _ in 0..n {
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi += 0.5 * eps * gi;
        }
        for (qi, pi) in q.iter_mut().zip(&p) {
            *qi += eps * pi / pvar;
        }
        match target.grad_log_density(&q) {
            Some(ng) if ng.iter().all(|v| v.is_finite()) => g = ng,
            _ => {
                return Trajectory {
                    q,
                    p,
                    log_density: f64::NEG_INFINITY,
                    grad: g,
                    divergent: true,
                }
            }
        }
        for (pi, gi) in p.iter_mut().zip(&g) {
            *pi += 0.5 * eps * gi;
        }
    }
    let log_density = target.log_density(&q);
    Trajectory {
        divergent: !log_density.is_finite(),
        q,
        p,
        log_density,
        grad: g,
    }
}

pub fn kinetic(p: &[f64], pvar: f64) -> f64 {
    p.iter().map(|v| v * v).sum::<f64>() / (2.0 * pvar)
}

/// Result of one HMC transition.
#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub accepted: bool,
    pub divergent: bool,
    /// Energy error of the proposal; `+∞` for divergent trajectories.
    pub delta_h: f64,
}

/// One HMC transition: fresh momentum, one trajectory, Metropolis test.
/// Divergent trajectories count as rejections.
pub fn hmc_step<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    state: &mut ChainState,
    cfg: &HmcConfig,
    target: &T,
    rng: &mut R,
) -> StepOutcome {
    let sd = cfg.pvar.sqrt();
    let p0: Vec<f64> = (0..state.q.len())
        .map(|_| sd * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let u: f64 = rng.random();
    let traj = leapfrog(
        target,
        &state.q,
        &p0,
        &state.grad,
        cfg.stepsize(),
        cfg.nint,
        cfg.pvar,
    );
    let h0 = -state.log_density + kinetic(&p0, cfg.pvar);
    let h1 = -traj.log_density + kinetic(&traj.p, cfg.pvar);
    let delta_h = h1 - h0;
    let divergent = traj.divergent || !delta_h.is_finite() || delta_h.abs() > DIVERGENCE_THRESHOLD;
    if divergent {
        return StepOutcome {
            accepted: false,
            divergent: true,
            delta_h: f64::INFINITY,
        };
    }
    let accepted = u < (-delta_h).exp();
    if accepted {
        state.q = traj.q;
        state.log_density = traj.log_density;
        state.grad = traj.grad;
    }
    StepOutcome {
        accepted,
        divergent: false,
        delta_h,
    }
}

/// Runs `burn_in` transitions, then `numstep·thin` more keeping every `thin`-th
/// position, and returns the kept positions with statistics of the kept phase.
pub fn sample_positions<T: LogDensity + ?Sized, R: Rng + ?Sized>(
    cfg: &HmcConfig,
    target: &T,
    init: Vec<f64>,
    rng: &mut R,
) -> Result<(Vec<Vec<f64>>, ChainStats)> {
    cfg.validate()?;
    let mut state = ChainState::new(target, init)?;
    for _ in 0..cfg.burn_in {
        hmc_step(&mut state, cfg, target, rng);
    }
    let mut stats = ChainStats::default();
    let mut out = Vec::with_capacity(cfg.numstep);
    for _ in 0..cfg.numstep {
        for _ in 0..cfg.thin {
            let o = hmc_step(&mut state, cfg, target, rng);
            stats.proposals += 1;
            stats.accepts += o.accepted as usize;
            stats.divergences += o.divergent as usize;
        }
        out.push(state.q.clone());
    }
    Ok((out, stats))
}

fn chain_meta(cfg: &HmcConfig, pd: &PullbackDensity, numstep: usize) -> SampleMeta {
    let x = StateParams::balanced(pd.d());
    let mut m = SampleMeta::new(pd.d());
    m.method = Some(Method::Hmc);
    m.numstep = Some(numstep);
    m.nt = Some(x.nt());
    m.nf = Some(x.nf());
    m.num = Some(x.num());
    m.pvar = Some(cfg.pvar);
    m.qvar = Some(cfg.qvar);
    m.nint = Some(cfg.nint);
    m.stepsize = Some(cfg.stepsize());
    m.povm = Some(pd.povm().name().to_string());
    m.prior = Some(pd.target().name().to_string());
    m.beta = pd.target().beta().map(<[f64]>::to_vec);
    m.pullback = Some(pd.mode().to_string());
    m.seed = Some(cfg.seed);
    m.burn_in = Some(cfg.burn_in);
    m.thin = Some(cfg.thin);
    m
}

fn positions_to_set(
    pd: &PullbackDensity,
    positions: &[Vec<f64>],
    meta: SampleMeta,
) -> Result<SampleSet> {
    let states = positions
        .iter()
        .map(|q| StateParams::from_flat(pd.d(), q).map(|x| params_to_state(&x)))
        .collect::<Result<Vec<_>>>()?;
    SampleSet::new(pd.d(), states, meta)?.with_probabilities(pd.povm())
}

fn one_chain(
    cfg: &HmcConfig,
    pd: &PullbackDensity,
    init: Option<&StateParams>,
    stream: u64,
) -> Result<(Vec<Vec<f64>>, ChainStats)> {
    let q0 = match init {
        Some(x) => {
            if x.d() != pd.d() {
                return Err(Error::DimensionMismatch {
                    expected: pd.d(),
                    found: x.d(),
                });
            }
            x.to_flat()
        }
        None => StateParams::balanced(pd.d()).to_flat(),
    };
    let mut rng = chain_rng(cfg.seed, stream);
    sample_positions(cfg, pd, q0, &mut rng)
}

/// One chain on stream 0 of `cfg.seed`; emits `numstep` states with their Born
/// probabilities. Defaults to the balanced-modulus starting point.
pub fn run_chain(
    cfg: &HmcConfig,
    pd: &PullbackDensity,
    init: Option<&StateParams>,
) -> Result<SampleSet> {
    let (pos, stats) = one_chain(cfg, pd, init, 0)?;
    let mut meta = chain_meta(cfg, pd, cfg.numstep);
    meta.acceptrate = Some(stats.acceptance_rate());
    positions_to_set(pd, &pos, meta)
}

/// `chains` independent chains on streams `0..chains`, run on scoped threads and
/// concatenated in stream order. `cfg.numstep` is the total, split as evenly as
/// possible. With one chain this equals [`run_chain`].
pub fn run_chains(
    cfg: &HmcConfig,
    pd: &PullbackDensity,
    init: Option<&StateParams>,
    chains: usize,
) -> Result<SampleSet> {
    if chains == 0 {
        return Err(Error::InvalidConfig("need at least one chain".into()));
    }
    if chains == 1 {
        return run_chain(cfg, pd, init);
    }
    let counts: Vec<usize> = (0..chains)
        .map(|c| cfg.numstep / chains + usize::from(c < cfg.numstep % chains))
        .collect();
    let results: Vec<Result<(Vec<Vec<f64>>, ChainStats)>> = std::thread::scope(|s| {
        let handles: Vec<_> = counts
            .iter()
            .enumerate()
            .map(|(c, &n)| {
                let cfg_c = HmcConfig {
                    numstep: n,
                    ..cfg.clone()
                };
                s.spawn(move || one_chain(&cfg_c, pd, init, c as u64))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("chain thread panicked"))
            .collect()
    });
    let mut positions = Vec::with_capacity(cfg.numstep);
    let mut rates = Vec::with_capacity(chains);
    let mut total = ChainStats::default();
    for r in results {
        let (pos, st) = r?;
        positions.extend(pos);
        rates.push(st.acceptance_rate());
        total.proposals += st.proposals;
        total.accepts += st.accepts;
    }
    let mut meta = chain_meta(cfg, pd, cfg.numstep);
    meta.acceptrate = Some(total.acceptance_rate());
    meta.chain_acceptrates = Some(rates);
    meta.chains = Some(chains);
    positions_to_set(pd, &positions, meta)
}
