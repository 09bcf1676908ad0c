//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per criterion
//! and exits non-zero if any failed.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use statrs::distribution::{ChiSquared, ContinuousCDF};

use qsampling_core::density::{PullbackDensity, TargetDensity};
use qsampling_core::diagnostics::{audit_set, ks_two_sample};
use qsampling_core::error::Error;
use qsampling_core::ginibre::{ginibre_sampleset, ginibre_state};
use qsampling_core::hmc::{kinetic, leapfrog, run_chain, sample_positions, HmcConfig, LogDensity};
use qsampling_core::io::{read_set, write_set};
use qsampling_core::oracles::{compare_chain_to_oracle, reject_sample_qubit};
use qsampling_core::povm::{
    born_probabilities, make_crosshair, make_pauli, make_qutrit_sic, make_tetrahedron, make_trine,
    qutrit_sic_vectors, tetrahedron_power, Povm, CATALOG,
};
use qsampling_core::recipes::{reproduce, ReproduceOptions, FAMILIES};
use qsampling_core::rng::{chain_rng, RESAMPLE_STREAM};
use qsampling_core::sample_set::{SampleMeta, SampleSet};
use qsampling_core::state::{param_counts, BlochVector, DensityMatrix, StateParams};
use qsampling_core::weights::{qubit_fiber_weights, resample, WeightedSampleSet};

const KS: f64 = 0.02;
const N: usize = 10_000;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(t: Duration, limit: Duration) -> bool {
    t < limit
}

fn interior_point<R: Rng>(d: usize, rng: &mut R) -> StateParams {
    let (nt, nf) = param_counts(d);
    let theta = (0..nt)
        .map(|_| rng.random_range(0.1..(PI / 2.0 - 0.1)))
        .collect();
    let phi = (0..nf).map(|_| rng.random_range(0.0..TAU)).collect();
    StateParams::new(d, theta, phi).unwrap()
}

fn random_bloch<R: Rng>(rng: &mut R) -> BlochVector {
    loop {
        let v: [f64; 3] = [0, 1, 2].map(|_| rng.random_range(-1.0..1.0));
        if v.iter().map(|x| x * x).sum::<f64>() <= 1.0 {
            return BlochVector::new(v[0], v[1], v[2]).unwrap();
        }
    }
}

// 1. completeness, positivity and SIC overlaps
fn povm_algebra() -> Outcome {
    let t0 = Instant::now();
    let mut worst_res = 0.0_f64;
    let mut worst_neg = 0.0_f64;
    for name in CATALOG {
        let p = Povm::by_name(name).unwrap();
        worst_res = worst_res.max(p.completeness_residual());
        worst_neg = worst_neg.min(p.min_outcome_eigenvalue());
    }
    let vs = qutrit_sic_vectors();
    let mut worst_overlap = 0.0_f64;
    for (j, a) in vs.iter().enumerate() {
        for (k, b) in vs.iter().enumerate() {
            if j == k {
                continue;
            }
            let ip: Complex64 = a.iter().zip(b).map(|(x, y)| x.conj() * y).sum();
            let na: f64 = a.iter().map(|x| x.norm_sqr()).sum();
            let nb: f64 = b.iter().map(|x| x.norm_sqr()).sum();
            worst_overlap = worst_overlap.max((ip.norm_sqr() / (na * nb) - 0.25).abs());
        }
    }
    let t = t0.elapsed();
    outcome(
        worst_res <= 1e-12 && worst_neg >= -1e-12 && worst_overlap <= 1e-12 && within(t, Duration::from_secs(1)),
        format!("residual {worst_res:.1e}, min eigenvalue {worst_neg:.1e}, SIC overlap error {worst_overlap:.1e}, {t:.2?}"),
    )
}

// 2. Born probabilities against the closed forms
fn born_fidelity() -> Outcome {
    let t0 = Instant::now();
    let mut rng = chain_rng(2, 0);
    let (tet, pau, tri, cro) = (
        make_tetrahedron(),
        make_pauli(),
        make_trine(),
        make_crosshair(),
    );
    let s3 = 3f64.sqrt();
    let mut worst = 0.0_f64;
    for _ in 0..1000 {
        let b = random_bloch(&mut rng);
        let (x, y, z) = (b.x, b.y, b.z);
        let rho = b.to_state();
        let cases: [(&Povm, Vec<f64>); 4] = [
            (
                &tet,
                vec![
                    0.25 + (x - y - z) / (4.0 * s3),
                    0.25 + (y - z - x) / (4.0 * s3),
                    0.25 + (z - x - y) / (4.0 * s3),
                    0.25 + (x + y + z) / (4.0 * s3),
                ],
            ),
            (
                &pau,
                vec![
                    (1.0 + x) / 6.0,
                    (1.0 + y) / 6.0,
                    (1.0 + z) / 6.0,
                    (1.0 - x) / 6.0,
                    (1.0 - y) / 6.0,
                    (1.0 - z) / 6.0,
                ],
            ),
            (
                &tri,
                vec![
                    (1.0 + z) / 3.0,
                    (1.0 - z / 2.0 + s3 / 2.0 * x) / 3.0,
                    (1.0 - z / 2.0 - s3 / 2.0 * x) / 3.0,
                ],
            ),
            (
                &cro,
                vec![
                    (1.0 + z) / 4.0,
                    (1.0 + x) / 4.0,
                    (1.0 - z) / 4.0,
                    (1.0 - x) / 4.0,
                ],
            ),
        ];
        for (povm, expected) in cases {
            let p = born_probabilities(povm, &rho).unwrap();
            for (a, e) in p.iter().zip(&expected) {
                worst = worst.max((a - e).abs());
            }
        }
    }
    let t = t0.elapsed();
    outcome(
        worst <= 1e-12 && within(t, Duration::from_secs(1)),
        format!("max deviation {worst:.1e} over 1000 Bloch vectors x 4 POVMs, {t:.2?}"),
    )
}

fn audit_povms(d: usize, fam_povm: Option<&str>) -> Vec<Povm> {
    match (fam_povm, d) {
        (Some(p), _) => vec![Povm::by_name(p).unwrap()],
        (None, 2) => vec![make_tetrahedron(), make_pauli()],
        (None, 4) => vec![Povm::by_name("2tthd").unwrap()],
        (None, 8) => vec![tetrahedron_power(3)],
        (None, 16) => vec![tetrahedron_power(4)],
        _ => unreachable!(),
    }
}

// 3. every generation path yields only permissible probabilities
fn constraint_soundness() -> Outcome {
    let t0 = Instant::now();
    let mut failures = Vec::new();
    let mut audited = 0;
    for fam in &FAMILIES {
        let r = reproduce(fam, &ReproduceOptions::new(N, 3)).unwrap();
        let mut sets = vec![r.set];
        sets.extend(r.resampled);
        for povm in audit_povms(fam.d, fam.povm) {
            for s in &sets {
                let a = audit_set(s, &povm).unwrap();
                audited += a.samples;
                if a.violations > 0 {
                    failures.push(format!(
                        "{} under {}: {}",
                        fam.name,
                        povm.name(),
                        a.violations
                    ));
                }
            }
        }
    }
    outcome(
        failures.is_empty(),
        format!(
            "{audited} audited samples across {} families, violations: {}, {:.1?}",
            FAMILIES.len(),
            if failures.is_empty() {
                "none".to_string()
            } else {
                failures.join("; ")
            },
            t0.elapsed()
        ),
    )
}

// 4. analytic gradient against central differences
fn gradient_correctness() -> Outcome {
    let t0 = Instant::now();
    let mut rng = chain_rng(4, 0);
    let mut worst = 0.0_f64;
    let h = 1e-5;
    for (d, povm) in [
        (2, make_tetrahedron()),
        (3, make_qutrit_sic()),
        (4, Povm::by_name("2tthd").unwrap()),
    ] {
        for target in [
            TargetDensity::primitive(),
            TargetDensity::jeffreys(),
            TargetDensity::conjugate_unit(povm.len()),
        ] {
            let pd = PullbackDensity::new(povm.clone(), target).unwrap();
            for _ in 0..100 {
                let x = interior_point(d, &mut rng);
                let g = pd.grad_log_pullback(&x).unwrap();
                let flat = x.to_flat();
                let mut num = 0.0;
                let mut den = 0.0;
                for j in 0..flat.len() {
                    let mut up = flat.clone();
                    let mut dn = flat.clone();
                    up[j] += h;
                    dn[j] -= h;
                    let fd = (pd.log_density(&up) - pd.log_density(&dn)) / (2.0 * h);
                    num += (g[j] - fd).powi(2);
                    den += fd * fd;
                }
                worst = worst.max(num.sqrt() / den.sqrt().max(1.0));
            }
        }
    }
    let t = t0.elapsed();
    outcome(
        worst <= 1e-5 && within(t, Duration::from_secs(60)),
        format!("max relative error {worst:.1e} over 900 points (d = 2, 3, 4; prim, jeff, conj), {t:.2?}"),
    )
}

// 5. reversibility, energy-error order, volume preservation
fn integrator() -> Outcome {
    let t0 = Instant::now();
    let pd = PullbackDensity::new(make_tetrahedron(), TargetDensity::jeffreys()).unwrap();
    let mut rng = chain_rng(5, 0);
    let normal = rand_distr::StandardNormal;

    let mut rev = 0.0_f64;
    for _ in 0..100 {
        let q0 = interior_point(2, &mut rng).to_flat();
        let p0: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(normal)).collect();
        let g0 = pd.grad_log_density(&q0).unwrap();
        let f = leapfrog(&pd, &q0, &p0, &g0, 0.01, 10, 1.0);
        let back_p: Vec<f64> = f.p.iter().map(|v| -v).collect();
        let b = leapfrog(&pd, &f.q, &back_p, &f.grad, 0.01, 10, 1.0);
        for i in 0..3 {
            rev = rev.max((b.q[i] - q0[i]).abs()).max((b.p[i] + p0[i]).abs());
        }
    }

    // Median |ΔH| over unit-length trajectories started in the typical set of the
    // primitive target. The chart density is singular where a modulus vanishes, and
    // the few trajectories that approach that set dominate a mean.
    let prim = PullbackDensity::new(make_tetrahedron(), TargetDensity::primitive()).unwrap();
    let typical = chain_config(1.5, 15, 20, 5, 200);
    let (positions, _) = sample_positions(
        &typical,
        &prim,
        StateParams::balanced(2).to_flat(),
        &mut chain_rng(5, 1),
    )
    .unwrap();
    let starts: Vec<(Vec<f64>, Vec<f64>)> = positions
        .into_iter()
        .map(|q| (q, (0..3).map(|_| rng.sample::<f64, _>(normal)).collect()))
        .collect();
    let eps: [f64; 4] = [0.2, 0.1, 0.05, 0.025];
    let mut logs = Vec::new();
    for &e in &eps {
        let n = (1.0 / e).round() as usize;
        let mut dh: Vec<f64> = starts
            .iter()
            .map(|(q0, p0)| {
                let g0 = prim.grad_log_density(q0).unwrap();
                let t = leapfrog(&prim, q0, p0, &g0, e, n, 1.0);
                let h0 = -prim.log_density(q0) + kinetic(p0, 1.0);
                (-t.log_density + kinetic(&t.p, 1.0) - h0).abs()
            })
            .collect();
        dh.sort_by(f64::total_cmp);
        logs.push((e.ln(), dh[dh.len() / 2].ln()));
    }
    let mx = logs.iter().map(|v| v.0).sum::<f64>() / 4.0;
    let my = logs.iter().map(|v| v.1).sum::<f64>() / 4.0;
    let slope = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / logs.iter().map(|(x, _)| (x - mx).powi(2)).sum::<f64>();

    // determinant of the one-step map by central differences
    let mut vol = 0.0_f64;
    let h = 1e-6;
    for _ in 0..20 {
        let q0 = interior_point(2, &mut rng).to_flat();
        let p0: Vec<f64> = (0..3).map(|_| rng.sample::<f64, _>(normal)).collect();
        let step = |z: &[f64]| {
            let g = pd.grad_log_density(&z[..3]).unwrap();
            let t = leapfrog(&pd, &z[..3], &z[3..], &g, 0.01, 1, 1.0);
            [t.q, t.p].concat()
        };
        let z0 = [q0, p0].concat();
        let jac = DMatrix::from_fn(6, 6, |i, j| {
            let mut up = z0.clone();
            let mut dn = z0.clone();
            up[j] += h;
            dn[j] -= h;
            (step(&up)[i] - step(&dn)[i]) / (2.0 * h)
        });
        vol = vol.max((jac.determinant() - 1.0).abs());
    }
    let t = t0.elapsed();
    outcome(
        rev <= 1e-8
            && (1.7..=2.3).contains(&slope)
            && vol <= 1e-6
            && within(t, Duration::from_secs(60)),
        format!(
            "reversibility {rev:.1e}, energy-error slope {slope:.3}, |det - 1| {vol:.1e}, {t:.2?}"
        ),
    )
}

fn chain_config(qvar: f64, nint: usize, thin: usize, seed: u64, numstep: usize) -> HmcConfig {
    HmcConfig {
        numstep,
        qvar,
        nint,
        thin,
        burn_in: 1000,
        seed,
        ..HmcConfig::default()
    }
}

// 6. primitive-prior chains against the Ginibre ensemble
fn primitive_vs_ginibre() -> Outcome {
    let t0 = Instant::now();
    let mut parts = Vec::new();
    let mut pass = true;
    for (povm, cfg) in [
        (make_tetrahedron(), chain_config(1.5, 15, 5, 61, N)),
        (
            Povm::by_name("2tthd").unwrap(),
            chain_config(1.0, 20, 10, 62, N),
        ),
    ] {
        let pd = PullbackDensity::new(povm.clone(), TargetDensity::primitive()).unwrap();
        let chain = run_chain(&cfg, &pd, None).unwrap();
        let direct = ginibre_sampleset(povm.d(), N, 600 + povm.d() as u64).unwrap();
        let ks = ks_two_sample(chain.purity(), direct.purity(), KS).unwrap();
        pass &= ks.pass;
        parts.push(format!("d={} KS {:.4}", povm.d(), ks.statistic));
    }
    outcome(
        pass,
        format!(
            "{} (threshold {KS}, N={N} per side), {:.1?}",
            parts.join(", "),
            t0.elapsed()
        ),
    )
}

/// Chain for `povm`/`target`; NIC chains are weighted by 1/fiber and resampled to `N`.
fn target_chain(povm: &Povm, target: TargetDensity, seed: u64) -> SampleSet {
    let pd = PullbackDensity::new(povm.clone(), target).unwrap();
    if povm.is_ic() {
        return run_chain(&chain_config(1.5, 15, 5, seed, N), &pd, None).unwrap();
    }
    let raw = run_chain(&chain_config(1.5, 15, 5, seed, 4 * N), &pd, None).unwrap();
    let range = qubit_fiber_weights(povm, &raw).unwrap();
    let ws = WeightedSampleSet::from_range(raw, &range).unwrap();
    resample(&ws, N, &mut chain_rng(seed, RESAMPLE_STREAM)).unwrap()
}

// 7. non-uniform priors against rejection oracles
fn oracle_equivalence() -> Outcome {
    let t0 = Instant::now();
    let cases = [
        (make_tetrahedron(), TargetDensity::jeffreys()),
        (make_pauli(), TargetDensity::jeffreys()),
        (make_trine(), TargetDensity::conjugate_unit(3)),
        (make_crosshair(), TargetDensity::jeffreys()),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (i, (povm, target)) in cases.into_iter().enumerate() {
        let seed = 70 + i as u64;
        let chain = target_chain(&povm, target.clone(), seed);
        let oracle = reject_sample_qubit(&povm, &target, N, &mut chain_rng(seed, 1 << 40)).unwrap();
        let ks = compare_chain_to_oracle(&chain, &povm, &oracle, 0, KS).unwrap();
        pass &= ks.pass;
        parts.push(format!(
            "{} {} KS {:.4}",
            povm.name(),
            target.name(),
            ks.statistic
        ));
    }
    outcome(
        pass,
        format!("p1 marginals: {}, {:.1?}", parts.join(", "), t0.elapsed()),
    )
}

// 8. the primitive prior does not depend on the IC POVM
fn povm_equivalence() -> Outcome {
    let t0 = Instant::now();
    let a = target_chain(&make_tetrahedron(), TargetDensity::primitive(), 81);
    let b = target_chain(&make_pauli(), TargetDensity::primitive(), 82);
    let ks = ks_two_sample(a.purity(), b.purity(), KS).unwrap();
    outcome(
        ks.pass,
        format!(
            "tetrahedron vs Pauli purity KS {:.4}, {:.1?}",
            ks.statistic,
            t0.elapsed()
        ),
    )
}

// 9. trine primitive-on-p pipeline is uniform over the permissible disk
fn nic_weighting() -> Outcome {
    let t0 = Instant::now();
    let povm = make_trine();
    let pd = PullbackDensity::new(povm.clone(), TargetDensity::primitive()).unwrap();
    let raw = run_chain(&chain_config(1.5, 15, 2, 91, 1_000_000), &pd, None).unwrap();
    let range = qubit_fiber_weights(&povm, &raw).unwrap();
    let ws = WeightedSampleSet::from_range(raw, &range).unwrap();
    let n = 100_000;
    let out = resample(&ws, n, &mut chain_rng(91, RESAMPLE_STREAM)).unwrap();
    // p is affine in (x, z); cells of equal area in (r², angle)
    let (nr, na) = (10usize, 12usize);
    let mut counts = vec![0usize; nr * na];
    for p in out.probabilities().unwrap() {
        let z = 3.0 * p[0] - 1.0;
        let x = 3f64.sqrt() * (2.0 * p[1] + p[0] - 1.0);
        let r2 = (x * x + z * z).min(1.0 - 1e-15);
        let a = z.atan2(x) + PI;
        let i = (r2 * nr as f64) as usize;
        let j = ((a / TAU * na as f64) as usize).min(na - 1);
        counts[i * na + j] += 1;
    }
    let occupied = counts.iter().filter(|&&c| c > 0).count();
    let e = n as f64 / (nr * na) as f64;
    let chi2: f64 = counts
        .iter()
        .filter(|&&c| c > 0)
        .map(|&c| (c as f64 - e).powi(2) / e)
        .sum();
    let df = (occupied - 1) as f64;
    let pval = 1.0 - ChiSquared::new(df).unwrap().cdf(chi2);
    outcome(
        pval > 0.01 && occupied == nr * na,
        format!(
            "chi-square {chi2:.1} on {df} dof over {occupied} cells, p = {pval:.3} (N={n}), {:.1?}",
            t0.elapsed()
        ),
    )
}

// 10. d = 8 densities and trajectories, d = 16 Ginibre sets
fn high_dimension() -> Outcome {
    let t0 = Instant::now();
    let povm = tetrahedron_power(3);
    let mut rng = chain_rng(10, 0);
    let mut bad = 0;
    let mut divergent = 0;
    for target in [TargetDensity::primitive(), TargetDensity::jeffreys()] {
        let pd = PullbackDensity::new(povm.clone(), target).unwrap();
        for _ in 0..1000 {
            let x = StateParams::random(8, &mut rng);
            let lp = pd.log_pullback(&x).unwrap();
            let q = x.to_flat();
            let Some(g) = pd.grad_log_density(&q) else {
                bad += 1;
                continue;
            };
            let p0: Vec<f64> = (0..q.len())
                .map(|_| rng.sample::<f64, _>(rand_distr::StandardNormal))
                .collect();
            let t = leapfrog(&pd, &q, &p0, &g, 0.01, 10, 1.0);
            divergent += t.divergent as usize;
            let finite = lp.is_finite()
                && t.log_density.is_finite()
                && t.q.iter().chain(&t.p).chain(&t.grad).all(|v| v.is_finite());
            bad += !finite as usize;
        }
    }
    let set = ginibre_sampleset(16, N, 16).unwrap();
    let invalid = set
        .states()
        .iter()
        .filter(|s| {
            s.validate().is_err()
                || s.matrix()
                    .iter()
                    .any(|v| !v.re.is_finite() || !v.im.is_finite())
        })
        .count();
    outcome(
        bad == 0 && invalid == 0 && set.len() == N,
        format!(
            "d=8: {bad} non-finite of 2000 points and trajectories ({divergent} divergent); d=16 Ginibre: {invalid} invalid of {}, {:.1?}",
            set.len(),
            t0.elapsed()
        ),
    )
}

fn run_cli(dir: &Path, args: &[&str]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_qsampling"))
        .current_dir(dir)
        .args(args)
        .output()
        .map(|o| o.status.success())
        .unwrap_or(false)
}

fn tree_bytes(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

// 11. byte-identical outputs for identical seeds
fn reproducibility() -> Outcome {
    let t0 = Instant::now();
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    let mut ok = true;
    for dir in &dirs {
        let p = dir.path();
        ok &= run_cli(
            p,
            &[
                "sample",
                "--d",
                "2",
                "--povm",
                "tetrahedron",
                "--prior",
                "jeff",
                "--numstep",
                "1000",
                "--seed",
                "7",
                "--out",
                "s",
            ],
        );
        ok &= run_cli(
            p,
            &[
                "sample",
                "--d",
                "2",
                "--povm",
                "trine",
                "--prior",
                "conj",
                "--numstep",
                "1000",
                "--seed",
                "7",
                "--out",
                "nic",
            ],
        );
        ok &= run_cli(
            p,
            &[
                "direct", "--d", "3", "--n", "1000", "--seed", "7", "--out", "g",
            ],
        );
        ok &= run_cli(
            p,
            &["resample", "--in", "nic", "--n", "1000", "--seed", "7"],
        );
        for fam in &FAMILIES {
            ok &= run_cli(p, &["reproduce", fam.name, "--n", "1000", "--seed", "11"]);
        }
    }
    let (a, b) = (tree_bytes(dirs[0].path()), tree_bytes(dirs[1].path()));
    let identical = a == b;
    outcome(
        ok && identical,
        format!(
            "{} files per run, all commands succeeded: {ok}, byte-identical: {identical}, {:.1?}",
            a.len(),
            t0.elapsed()
        ),
    )
}

// 12. round trips and structured errors
fn io_round_trip() -> Outcome {
    let t0 = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut rng = chain_rng(12, 0);
    let mut exact = true;
    for d in [2usize, 3, 4, 8] {
        let states: Vec<DensityMatrix> = (0..1000).map(|_| ginibre_state(d, &mut rng)).collect();
        let set = SampleSet::new(d, states, SampleMeta::new(d)).unwrap();
        let base = dir.path().join(format!("rt{d}"));
        let paths = write_set(&set, &base, false).unwrap();
        let back = read_set(&base).unwrap();
        exact &= back.states() == set.states();
        let before = std::fs::read(&paths.re).unwrap();
        write_set(&back, &base, true).unwrap();
        exact &= std::fs::read(&paths.re).unwrap() == before;
    }

    let write = |name: &str, re: &str, im: &str| {
        let base = dir.path().join(name);
        std::fs::write(dir.path().join(format!("{name}_re.txt")), re).unwrap();
        std::fs::write(dir.path().join(format!("{name}_im.txt")), im).unwrap();
        read_set(base)
    };
    let mut errors = Vec::new();
    errors.push(matches!(
        write("short", "0.5 0 0 0.5\n0.5 0 0 0.5\n", "0 0 0 0\n"),
        Err(Error::RowCountMismatch {
            re_rows: 2,
            im_rows: 1
        })
    ));
    errors.push(matches!(
        write("nan", "0.5 x 0 0.5\n", "0 0 0 0\n"),
        Err(Error::MalformedNumber { line: 1, .. })
    ));
    errors.push(matches!(
        write("len", "0.5 0 0 0.5\n", "0 0 0\n"),
        Err(Error::RowLengthMismatch {
            row: 0,
            re_len: 4,
            im_len: 3
        })
    ));
    errors.push(matches!(
        write("psd", "0.5 0 0 0.5\n1.5 0 0 -0.5\n", "0 0 0 0\n0 0 0 0\n"),
        Err(Error::InvalidRow { row: 1, min_eigenvalue, .. }) if (min_eigenvalue + 0.5).abs() < 1e-12
    ));
    errors.push(matches!(
        write("sq", "1 0 0\n", "0 0 0\n"),
        Err(Error::NotSquare { row: 0, .. })
    ));
    std::fs::write(dir.path().join("psd_range.txt"), "1\n").unwrap();
    std::fs::write(dir.path().join("w_re.txt"), "0.5 0 0 0.5\n").unwrap();
    std::fs::write(dir.path().join("w_im.txt"), "0 0 0 0\n").unwrap();
    std::fs::write(dir.path().join("w_range.txt"), "1\n2\n").unwrap();
    errors.push(matches!(
        read_set(dir.path().join("w")),
        Err(Error::WeightCountMismatch {
            expected: 1,
            found: 2
        })
    ));
    let structured = errors.iter().all(|&e| e);
    let t = t0.elapsed();
    outcome(
        exact && structured && within(t, Duration::from_secs(60)),
        format!(
            "bit-exact round trip at d = 2, 3, 4, 8: {exact}; structured errors {}/{}, {t:.2?}",
            errors.iter().filter(|&&e| e).count(),
            errors.len()
        ),
    )
}

fn main() {
    // `cargo test -- <filter>` passes arguments; only honour `--list` politely.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [(&str, fn() -> Outcome); 12] = [
        ("POVM algebra", povm_algebra),
        ("Born-rule fidelity", born_fidelity),
        ("constraint soundness", constraint_soundness),
        ("gradient correctness", gradient_correctness),
        ("integrator", integrator),
        ("primitive prior vs Ginibre", primitive_vs_ginibre),
        ("non-uniform priors vs oracles", oracle_equivalence),
        ("POVM equivalence of the primitive prior", povm_equivalence),
        ("NIC weighting end to end", nic_weighting),
        ("high-dimension robustness", high_dimension),
        ("reproducibility", reproducibility),
        ("I/O", io_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        failed += !o.pass as usize;
        println!(
            "criterion {:>2} {}: {} ({})",
            i + 1,
            if o.pass { "PASS" } else { "FAIL" },
            name,
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failed} failed",
        criteria.len() - failed
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
