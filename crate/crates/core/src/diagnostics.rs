//! Purity statistics, two-sample KS tests and constraint audits over sets.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::povm::{audit_probabilities, born_probabilities, Povm};
use crate::sample_set::SampleSet;

pub const DEFAULT_HIST_BINS: usize = 100;
pub const DEFAULT_KS_THRESHOLD: f64 = 0.02;

#[derive(Clone, Debug, PartialEq)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<usize>,
}

impl Histogram {
    /// Equal-width bins over `[lo, hi]`; values outside are clamped into the end bins.
    pub fn new(values: &[f64], lo: f64, hi: f64, bins: usize) -> Self {
        let bins = bins.max(1);
        let mut counts = vec![0; bins];
        let width = (hi - lo) / bins as f64;
        for &v in values {
            let i = if width > 0.0 {
                ((v - lo) / width).floor().clamp(0.0, (bins - 1) as f64) as usize
            } else {
                0
            };
            counts[i] += 1;
        }
        Self { lo, hi, counts }
    }

    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = (self.hi - self.lo) / self.counts.len() as f64;
        (self.lo + i as f64 * w, self.lo + (i + 1) as f64 * w)
    }

    /// `bin_left,bin_right,count` rows with a header line.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("bin_left,bin_right,count\n");
        for (i, c) in self.counts.iter().enumerate() {
            let (l, r) = self.edges(i);
            let _ = writeln!(s, "{l:e},{r:e},{c}");
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityStats {
    pub n: usize,
    pub mean: f64,
    pub variance: f64,
    pub histogram: Histogram,
}

impl PurityStats {
    pub fn standard_error(&self) -> f64 {
        (self.variance / self.n as f64).sqrt()
    }
}

/// Mean, unbiased variance and a histogram over `[1/d, 1]`.
pub fn purity_stats(set: &SampleSet, bins: usize) -> Result<PurityStats> {
    let p = set.purity();
    if p.is_empty() {
        return Err(Error::Empty("sample set"));
    }
    let n = p.len();
    let mean = p.iter().sum::<f64>() / n as f64;
    let variance = if n > 1 {
        p.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64
    } else {
        0.0
    };
    Ok(PurityStats {
        n,
        mean,
        variance,
        histogram: Histogram::new(p, 1.0 / set.d() as f64, 1.0, bins),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct KsResult {
    pub statistic: f64,
    pub n1: usize,
    pub n2: usize,
    pub threshold: f64,
    pub pass: bool,
}

/// Exact sup-distance between the two empirical CDFs.
pub fn ks_two_sample(a: &[f64], b: &[f64], threshold: f64) -> Result<KsResult> {
    if a.is_empty() || b.is_empty() {
        return Err(Error::Empty("KS sample"));
    }
    if a.iter().chain(b).any(|v| v.is_nan()) {
        return Err(Error::NonFinite("KS sample"));
    }
    let mut x = a.to_vec();
    let mut y = b.to_vec();
    x.sort_by(f64::total_cmp);
    y.sort_by(f64::total_cmp);
    let (n1, n2) = (x.len(), y.len());
    let (mut i, mut j) = (0, 0);
    let mut stat = 0.0_f64;
    while i < n1 && j < n2 {
        let t = x[i].min(y[j]);
        while i < n1 && x[i] <= t {
            i += 1;
        }
        while j < n2 && y[j] <= t {
            j += 1;
        }
        stat = stat.max((i as f64 / n1 as f64 - j as f64 / n2 as f64).abs());
    }
    Ok(KsResult {
        statistic: stat,
        n1,
        n2,
        threshold,
        pass: stat < threshold,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct AuditSummary {
    pub samples: usize,
    pub violations: usize,
    pub worst: f64,
    /// Label of the largest violation, if any.
    pub worst_label: Option<String>,
}

/// Audits Born probabilities of every state (or the stored ones when present).
pub fn audit_set(set: &SampleSet, povm: &Povm) -> Result<AuditSummary> {
    if set.d() != povm.d() {
        return Err(Error::DimensionMismatch {
            expected: povm.d(),
            found: set.d(),
        });
    }
    let mut out = AuditSummary {
        samples: set.len(),
        violations: 0,
        worst: 0.0,
        worst_label: None,
    };
    for s in set.states() {
        let p = born_probabilities(povm, s)?;
        out.absorb(&audit_probabilities(povm, &p)?);
    }
    Ok(out)
}

/// Audits raw probability vectors, e.g. hand-built ones.
pub fn audit_vectors(vectors: &[Vec<f64>], povm: &Povm) -> Result<AuditSummary> {
    let mut out = AuditSummary {
        samples: vectors.len(),
        violations: 0,
        worst: 0.0,
        worst_label: None,
    };
    for p in vectors {
        out.absorb(&audit_probabilities(povm, p)?);
    }
    Ok(out)
}

impl AuditSummary {
    fn absorb(&mut self, report: &crate::povm::ConstraintReport) {
        if report.satisfied() {
            return;
        }
        self.violations += 1;
        for v in &report.violations {
            if v.magnitude > self.worst {
                self.worst = v.magnitude;
                self.worst_label = Some(v.label.clone());
            }
        }
    }
}
