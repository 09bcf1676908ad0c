//! Generation recipes for the published sample families.
//!
//! Primitive families use Ginibre draws: the primitive prior is the same for every
//! IC POVM, and for NIC POVMs it is the flat state-space measure reweighted by
//! the fiber volume. Jeffreys and conjugate families use HMC. NIC families carry
//! their fiber volumes and come with a resampled `_w` companion.

use crate::density::PriorKind::{self, Conjugate as Conj, Jeffreys as Jeff, Primitive as Prim};
use crate::density::{PullbackDensity, TargetDensity};
use crate::error::{Error, Result};
use crate::ginibre::ginibre_sampleset;
use crate::hmc::{run_chains, HmcConfig};
use crate::povm::Povm;
use crate::rng::{chain_rng, RESAMPLE_STREAM};
use crate::sample_set::SampleSet;
use crate::weights::{fiber_weights, resample, FiberSettings, WeightedSampleSet};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Family {
    pub name: &'static str,
    pub d: usize,
    pub prior: PriorKind,
    /// POVM the prior is defined on; `None` where any IC POVM gives the same prior.
    pub povm: Option<&'static str>,
    pub nic: bool,
}

const fn fam(
    name: &'static str,
    d: usize,
    prior: PriorKind,
    povm: Option<&'static str>,
    nic: bool,
) -> Family {
    Family {
        name,
        d,
        prior,
        povm,
        nic,
    }
}

pub const FAMILIES: [Family; 23] = [
    fam("1qb_IC_prim", 2, Prim, None, false),
    fam("1qb_Jeff_tthd", 2, Jeff, Some("tetrahedron"), false),
    fam("1qb_Jeff_Pauli", 2, Jeff, Some("pauli"), false),
    fam("1qb_conj_tthd", 2, Conj, Some("tetrahedron"), false),
    fam("1qb_conj_Pauli", 2, Conj, Some("pauli"), false),
    fam("1qb_NIC_prim", 2, Prim, Some("trine"), true),
    fam("1qb_Jeff_trine", 2, Jeff, Some("trine"), true),
    fam("1qb_Jeff_cross", 2, Jeff, Some("crosshair"), true),
    fam("1qb_conj_trine", 2, Conj, Some("trine"), true),
    fam("1qb_conj_cross", 2, Conj, Some("crosshair"), true),
    fam("qutrit_prim_SIC", 3, Prim, Some("qutrit-sic"), false),
    fam("qutrit_Jeff_SIC", 3, Jeff, Some("qutrit-sic"), false),
    fam("qutrit_conj_SIC", 3, Conj, Some("qutrit-sic"), false),
    fam("2qb_IC_prim", 4, Prim, None, false),
    fam("2qb_Jeff_2tthd", 4, Jeff, Some("2tthd"), false),
    fam("2qb_conj_2tthd", 4, Conj, Some("2tthd"), false),
    fam("2qb_NIC_prim", 4, Prim, Some("tat"), true),
    fam("2qb_Jeff_TAT", 4, Jeff, Some("tat"), true),
    fam("2qb_Jeff_BB84", 4, Jeff, Some("bb84"), true),
    fam("2qb_conj_TAT", 4, Conj, Some("tat"), true),
    fam("2qb_conj_BB84", 4, Conj, Some("bb84"), true),
    fam("3qb_IC_prim", 8, Prim, None, false),
    fam("4qb_IC_prim", 16, Prim, None, false),
];

pub fn family(name: &str) -> Result<&'static Family> {
    FAMILIES
        .iter()
        .find(|f| f.name.eq_ignore_ascii_case(name))
        .ok_or_else(|| Error::UnknownFamily(name.to_string()))
}

impl Family {
    pub fn uses_ginibre(&self) -> bool {
        self.prior == PriorKind::Primitive
    }

    pub fn target(&self, k: usize) -> TargetDensity {
        match self.prior {
            Prim => TargetDensity::primitive(),
            Jeff => TargetDensity::jeffreys(),
            Conj => TargetDensity::conjugate_unit(k),
        }
    }
}

#[derive(Clone, Debug)]
pub struct ReproduceOptions {
    pub n: usize,
    pub seed: u64,
    /// Tuning for HMC families; `numstep` and `seed` are taken from `n` and `seed`.
    pub hmc: HmcConfig,
    pub chains: usize,
    pub fiber: FiberSettings,
}

impl ReproduceOptions {
    pub fn new(n: usize, seed: u64) -> Self {
        Self {
            n,
            seed,
            hmc: HmcConfig::default(),
            chains: 1,
            fiber: FiberSettings::default(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Reproduction {
    /// Raw set; NIC families carry fiber volumes as weights.
    pub set: SampleSet,
    /// NIC families only: the set resampled with weights `1/volume`.
    pub resampled: Option<SampleSet>,
}

pub fn reproduce(fam: &Family, opts: &ReproduceOptions) -> Result<Reproduction> {
    if opts.n == 0 {
        return Err(Error::InvalidConfig("sample count must be positive".into()));
    }
    let povm = fam.povm.map(Povm::by_name).transpose()?;
    let mut set = if fam.uses_ginibre() {
        let mut s = ginibre_sampleset(fam.d, opts.n, opts.seed)?;
        if let Some(p) = &povm {
            s.meta.povm = Some(p.name().to_string());
            s = s.with_probabilities(p)?;
        }
        s
    } else {
        let p = povm.clone().expect("HMC families name their POVM");
        let pd = PullbackDensity::new(p.clone(), fam.target(p.len()))?;
        let cfg = HmcConfig {
            numstep: opts.n,
            seed: opts.seed,
            ..opts.hmc.clone()
        };
        run_chains(&cfg, &pd, None, opts.chains)?
    };
    set.meta.family = Some(fam.name.to_string());
    if !fam.nic {
        return Ok(Reproduction {
            set,
            resampled: None,
        });
    }
    let p = povm.expect("NIC families name their POVM");
    let range = fiber_weights(&p, &set, &opts.fiber, opts.seed)?;
    if fam.d == 2 {
        set.meta.range = Some("analytic y-interval length".into());
    } else {
        set.meta.range = Some(opts.fiber.label());
        set.meta.experimental = Some(true);
    }
    let set = set.with_weights(range.clone())?;
    let ws = WeightedSampleSet::from_range(set.clone().without_weights(), &range)?;
    let mut rng = chain_rng(opts.seed, RESAMPLE_STREAM);
    let mut resampled = resample(&ws, opts.n, &mut rng)?;
    resampled.meta.family = Some(format!("{}_w", fam.name));
    Ok(Reproduction {
        set,
        resampled: Some(resampled),
    })
}
