//! Descriptive statistics and paired two-sided tests.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};
use statrs::function::erf::erfc;
use thiserror::Error;

/// Largest number of non-zero differences for which the Wilcoxon null
/// distribution is enumerated exactly; above it the normal approximation is used.
pub const WILCOXON_EXACT_MAX_N: usize = 25;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("paired samples differ in length ({a} vs {b})")]
    LengthMismatch { a: usize, b: usize },
    #[error("need at least 2 pairs, got {0}")]
    TooFewPairs(usize),
    #[error("non-finite value in paired samples")]
    NonFinite,
}

/// Mean and sample standard deviation (n − 1). The mean is undefined for an
/// empty slice, the SD for fewer than two values.
pub fn mean_sd(values: &[f64]) -> (Option<f64>, Option<f64>) {
    let n = values.len();
    if n == 0 {
        return (None, None);
    }
    let mean = values.iter().sum::<f64>() / n as f64;
    if n < 2 {
        return (Some(mean), None);
    }
    let ss: f64 = values.iter().map(|v| (v - mean).powi(2)).sum();
    (Some(mean), Some((ss / (n - 1) as f64).sqrt()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairedTest {
    PairedT,
    WilcoxonSignedRank,
}

impl PairedTest {
    pub const ALL: [PairedTest; 2] = [PairedTest::PairedT, PairedTest::WilcoxonSignedRank];
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonResult {
    pub test: PairedTest,
    pub n_pairs: usize,
    pub mean_a: f64,
    pub sd_a: f64,
    pub mean_b: f64,
    pub sd_b: f64,
    /// t for the paired t-test, W+ for Wilcoxon; `None` when degenerate.
    pub statistic: Option<f64>,
    pub p_value: f64,
}

/// Two-sided paired comparison of `a` against `b`.
///
/// Conventions: when every difference is zero the p-value is 1. For the
/// t-test, zero variance of the differences with a non-zero mean gives p = 0.
/// Wilcoxon drops zero differences and uses mid-ranks for ties; the null
/// distribution is enumerated exactly up to [`WILCOXON_EXACT_MAX_N`] non-zero
/// differences, otherwise a tie-corrected normal approximation without
/// continuity correction is used.
pub fn paired_compare(a: &[f64], b: &[f64], test: PairedTest) -> Result<ComparisonResult, StatsError> {
    if a.len() != b.len() {
        return Err(StatsError::LengthMismatch { a: a.len(), b: b.len() });
    }
    if a.len() < 2 {
        return Err(StatsError::TooFewPairs(a.len()));
    }
    if a.iter().chain(b).any(|v| !v.is_finite()) {
        return Err(StatsError::NonFinite);
    }
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let (statistic, p_value) = match test {
        PairedTest::PairedT => paired_t(&diffs),
        PairedTest::WilcoxonSignedRank => wilcoxon(&diffs),
    };
    let (mean_a, sd_a) = mean_sd(a);
    let (mean_b, sd_b) = mean_sd(b);
    Ok(ComparisonResult {
        test,
        n_pairs: a.len(),
        mean_a: mean_a.expect("n >= 2"),
        sd_a: sd_a.expect("n >= 2"),
        mean_b: mean_b.expect("n >= 2"),
        sd_b: sd_b.expect("n >= 2"),
        statistic,
        p_value: p_value.clamp(0.0, 1.0),
    })
}

fn paired_t(diffs: &[f64]) -> (Option<f64>, f64) {
    let n = diffs.len() as f64;
    let (mean, sd) = mean_sd(diffs);
    let (mean, sd) = (mean.expect("n >= 2"), sd.expect("n >= 2"));
    if sd == 0.0 {
        return (None, if mean == 0.0 { 1.0 } else { 0.0 });
    }
    let t = mean / (sd / n.sqrt());
    let dist = StudentsT::new(0.0, 1.0, n - 1.0).expect("n - 1 >= 1 degrees of freedom");
    (Some(t), 2.0 * dist.sf(t.abs()))
}

/// Mid-ranks of `values` (ascending), doubled so that they are integers.
pub(crate) fn doubled_midranks(values: &[f64]) -> Vec<u64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0u64; values.len()];
    let mut k = 0;
    while k < order.len() {
        let mut m = 1;
        while k + m < order.len() && values[order[k + m]] == values[order[k]] {
            m += 1;
        }
        // 1-based ranks k+1 ..= k+m, mean (2k + m + 1) / 2.
        let doubled = (2 * k + m + 1) as u64;
        for &idx in &order[k..k + m] {
            ranks[idx] = doubled;
        }
        k += m;
    }
    ranks
}

fn wilcoxon(diffs: &[f64]) -> (Option<f64>, f64) {
    let nonzero: Vec<f64> = diffs.iter().copied().filter(|d| *d != 0.0).collect();
    let n = nonzero.len();
    if n == 0 {
        return (None, 1.0);
    }
    let abs: Vec<f64> = nonzero.iter().map(|d| d.abs()).collect();
    let ranks = doubled_midranks(&abs);
    let total: u64 = ranks.iter().sum();
    let w_plus: u64 = nonzero.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let statistic = Some(w_plus as f64 / 2.0);

    if n <= WILCOXON_EXACT_MAX_N {
        let observed = (2 * w_plus).abs_diff(total);
        // counts[s]: sign assignments whose doubled positive-rank sum equals s.
        let mut counts = vec![0u64; total as usize + 1];
        counts[0] = 1;
        let mut reach = 0usize;
        for &r in &ranks {
            let r = r as usize;
            for s in (0..=reach).rev() {
                if counts[s] > 0 {
                    counts[s + r] += counts[s];
                }
            }
            reach += r;
        }
        let extreme: u64 = counts
            .iter()
            .enumerate()
            .filter(|&(s, _)| (2 * s as u64).abs_diff(total) >= observed)
            .map(|(_, c)| c)
            .sum();
        return (statistic, extreme as f64 / (1u64 << n) as f64);
    }

    let nf = n as f64;
    let mean = nf * (nf + 1.0) / 4.0;
    let mut tie_term = 0.0;
    let mut sorted = ranks.clone();
    sorted.sort_unstable();
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    let var = nf * (nf + 1.0) * (2.0 * nf + 1.0) / 24.0 - tie_term / 48.0;
    if var <= 0.0 {
        return (statistic, 1.0);
    }
    let z = (w_plus as f64 / 2.0 - mean) / var.sqrt();
    (statistic, erfc(z.abs() / std::f64::consts::SQRT_2))
}
