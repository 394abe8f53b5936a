use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use super::Tails;
use crate::error::{Error, Result};

/// Largest pooled sample size for which the exact null distribution is built.
pub const DEFAULT_EXACT_CAP: usize = 25;

// u64 subset counts stay exact up to C(60, 30).
const DISTRIBUTION_LIMIT: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MwuMethod {
    Normal,
    Exact,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MwuOptions {
    pub tails: Tails,
    pub continuity_correction: bool,
    pub method: MwuMethod,
    pub exact_cap: usize,
}

impl Default for MwuOptions {
    fn default() -> Self {
        MwuOptions {
            tails: Tails::One,
            continuity_correction: false,
            method: MwuMethod::Normal,
            exact_cap: DEFAULT_EXACT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MwuResult {
    /// min(U_a, U_b).
    pub u: f64,
    /// Number of (a, b) pairs with a below b, ties counting one half.
    pub u_a: f64,
    pub n_a: usize,
    pub n_b: usize,
    /// Normal score of `u_a`; negative when sample a tends to be larger.
    pub z: f64,
    /// p-value under `tails`.
    pub p: f64,
    pub p_one_sided: f64,
    pub p_two_sided: f64,
    /// |z| / sqrt(n_a + n_b).
    pub r: f64,
    pub method: MwuMethod,
    pub tails: Tails,
    pub continuity_correction: bool,
}

/// Ranks starting at 1, tied values sharing the mean of their positions.
pub fn midranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[i].total_cmp(&values[j]));
    let mut ranks = vec![0.0; values.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && values[order[end]] == values[order[start]] {
            end += 1;
        }
        // Positions start+1 ..= end share their average.
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

struct RankSummary {
    u_a: f64,
    // Σ (t³ - t) over tie groups.
    tie_term: f64,
    // Doubled midranks of the pooled sample, a first.
    doubled_ranks: Vec<usize>,
}

fn rank_summary(a: &[f64], b: &[f64]) -> RankSummary {
    let pooled: Vec<f64> = a.iter().chain(b).copied().collect();
    let ranks = midranks(&pooled);
    let n_a = a.len() as f64;
    let rank_sum_a: f64 = ranks[..a.len()].iter().sum();
    let u_a = n_a * b.len() as f64 + n_a * (n_a + 1.0) / 2.0 - rank_sum_a;

    let mut sorted = pooled.clone();
    sorted.sort_by(f64::total_cmp);
    let mut tie_term = 0.0;
    for group in sorted.chunk_by(|x, y| x == y) {
        let t = group.len() as f64;
        tie_term += t * t * t - t;
    }
    RankSummary {
        u_a,
        tie_term,
        doubled_ranks: ranks.iter().map(|r| (2.0 * r).round() as usize).collect(),
    }
}

/// U for a two-sample comparison, reported as min(U_a, U_b).
pub fn u_from_samples(sample_a: &[f64], sample_b: &[f64]) -> f64 {
    let u_a = rank_summary(sample_a, sample_b).u_a;
    let u_b = (sample_a.len() * sample_b.len()) as f64 - u_a;
    u_a.min(u_b)
}

fn check_sample(sample: &[f64], name: &'static str) -> Result<()> {
    if sample.is_empty() {
        return Err(Error::EmptySample(name));
    }
    if sample.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFiniteSample(name));
    }
    Ok(())
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn normal_score(u_a: f64, n_a: usize, n_b: usize, tie_term: f64, continuity_correction: bool) -> f64 {
    let (na, nb) = (n_a as f64, n_b as f64);
    let n = na + nb;
    let mean = na * nb / 2.0;
    let tie_adjust = if n > 1.0 { tie_term / (n * (n - 1.0)) } else { 0.0 };
    let variance = na * nb / 12.0 * ((n + 1.0) - tie_adjust);
    if variance <= 0.0 {
        return 0.0;
    }
    let mut diff = u_a - mean;
    if continuity_correction {
        diff = diff.signum() * (diff.abs() - 0.5).max(0.0);
    }
    diff / variance.sqrt()
}

fn pick(tails: Tails, one: f64, two: f64) -> f64 {
    match tails {
        Tails::One => one,
        Tails::Two => two,
    }
}

fn finish(
    u_a: f64,
    n_a: usize,
    n_b: usize,
    z: f64,
    p_one_sided: f64,
    options: &MwuOptions,
) -> MwuResult {
    let p_one_sided = p_one_sided.clamp(0.0, 1.0);
    let p_two_sided = (2.0 * p_one_sided).min(1.0);
    let u_b = (n_a * n_b) as f64 - u_a;
    MwuResult {
        u: u_a.min(u_b),
        u_a,
        n_a,
        n_b,
        z,
        p: pick(options.tails, p_one_sided, p_two_sided),
        p_one_sided,
        p_two_sided,
        r: z.abs() / ((n_a + n_b) as f64).sqrt(),
        method: options.method,
        tails: options.tails,
        continuity_correction: options.continuity_correction,
    }
}

/// Counts of subsets of `weights` with exactly `k` elements, indexed by their sum.
fn subset_sum_counts(weights: &[usize], k: usize) -> Vec<u64> {
    let max_sum: usize = weights.iter().sum();
    let mut table = vec![vec![0u64; max_sum + 1]; k + 1];
    table[0][0] = 1;
    let mut reach = 0;
    for &w in weights {
        reach += w;
        for size in (1..=k).rev() {
            let (lower, upper) = table.split_at_mut(size);
            let (prev, cur) = (&lower[size - 1], &mut upper[0]);
            for s in (w..=reach).rev() {
                cur[s] += prev[s - w];
            }
        }
    }
    table.swap_remove(k)
}

/// Exact one-sided p-value over all equally likely assignments of the pooled
/// midranks to the two groups, in the direction of the observed U: P(U_a ≤
/// observed) when sample a tends lower, P(U_a ≥ observed) otherwise. With
/// ties the null distribution need not be symmetric, so the two differ.
fn exact_one_sided(summary: &RankSummary, n_a: usize, n_b: usize) -> f64 {
    let counts = subset_sum_counts(&summary.doubled_ranks, n_a);
    let total: u64 = counts.iter().sum();
    // Doubled U_a for a subset with doubled rank sum s: 2 n_a n_b + n_a (n_a + 1) - s.
    let offset = 2 * n_a * n_b + n_a * (n_a + 1);
    let observed = (2.0 * summary.u_a).round() as usize;
    let lower = 2.0 * summary.u_a <= (n_a * n_b) as f64;
    let tail: u64 = counts
        .iter()
        .enumerate()
        .filter(|&(s, &c)| c > 0 && s <= offset)
        .filter(|&(s, _)| if lower { offset - s <= observed } else { offset - s >= observed })
        .map(|(_, &c)| c)
        .sum();
    tail as f64 / total as f64
}

pub fn mann_whitney_u(sample_a: &[f64], sample_b: &[f64], options: &MwuOptions) -> Result<MwuResult> {
    check_sample(sample_a, "a")?;
    check_sample(sample_b, "b")?;
    let (n_a, n_b) = (sample_a.len(), sample_b.len());
    if options.method == MwuMethod::Exact && n_a + n_b > options.exact_cap {
        return Err(Error::ExactCapExceeded {
            n: n_a + n_b,
            cap: options.exact_cap,
        });
    }
    let summary = rank_summary(sample_a, sample_b);
    let z = normal_score(
        summary.u_a,
        n_a,
        n_b,
        summary.tie_term,
        options.continuity_correction,
    );
    let p_one_sided = match options.method {
        MwuMethod::Normal => standard_normal().cdf(-z.abs()),
        MwuMethod::Exact => exact_one_sided(&summary, n_a, n_b),
    };
    Ok(finish(summary.u_a, n_a, n_b, z, p_one_sided, options))
}

/// The test computed from a reported U and the two group sizes alone,
/// assuming no ties.
pub fn mann_whitney_from_u(u_a: f64, n_a: usize, n_b: usize, options: &MwuOptions) -> Result<MwuResult> {
    if n_a == 0 {
        return Err(Error::EmptySample("a"));
    }
    if n_b == 0 {
        return Err(Error::EmptySample("b"));
    }
    let z = normal_score(u_a, n_a, n_b, 0.0, options.continuity_correction);
    let p_one_sided = match options.method {
        MwuMethod::Normal => standard_normal().cdf(-z.abs()),
        MwuMethod::Exact => {
            if n_a + n_b > options.exact_cap {
                return Err(Error::ExactCapExceeded {
                    n: n_a + n_b,
                    cap: options.exact_cap,
                });
            }
            let dist = exact_u_distribution(n_a, n_b)?;
            let total: u64 = dist.iter().sum();
            let u_min = u_a.min((n_a * n_b) as f64 - u_a);
            let tail: u64 = dist
                .iter()
                .enumerate()
                .filter(|&(u, _)| u as f64 <= u_min)
                .map(|(_, &c)| c)
                .sum();
            tail as f64 / total as f64
        }
    };
    Ok(finish(u_a, n_a, n_b, z, p_one_sided, options))
}

/// Tie-free null distribution of U: entry `u` counts the group assignments
/// with that U. The counts sum to C(n_a + n_b, n_a).
pub fn exact_u_distribution(n_a: usize, n_b: usize) -> Result<Vec<u64>> {
    let n = n_a + n_b;
    if n > DISTRIBUTION_LIMIT {
        return Err(Error::ExactCapExceeded {
            n,
            cap: DISTRIBUTION_LIMIT,
        });
    }
    let ranks: Vec<usize> = (1..=n).collect();
    let by_rank_sum = subset_sum_counts(&ranks, n_a);
    let offset = n_a * n_b + n_a * (n_a + 1) / 2;
    let mut dist = vec![0u64; n_a * n_b + 1];
    for (sum, &count) in by_rank_sum.iter().enumerate() {
        if count > 0 {
            dist[offset - sum] += count;
        }
    }
    Ok(dist)
}
