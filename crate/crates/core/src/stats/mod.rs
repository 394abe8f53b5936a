//! Small-sample hypothesis tests: the Mann-Whitney U test (normal
//! approximation with tie correction, or exact) and Barnard's unconditional
//! exact test for 2×2 tables.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

mod barnard;
mod mwu;

pub use barnard::{
    barnard_test, rejection_probability, wald_pooled_statistic, BarnardOptions, BarnardResult,
    DEFAULT_GRID_RESOLUTION,
};
pub use mwu::{
    exact_u_distribution, mann_whitney_from_u, mann_whitney_u, midranks, u_from_samples, MwuMethod,
    MwuOptions, MwuResult, DEFAULT_EXACT_CAP,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tails {
    One,
    Two,
}

impl FromStr for Tails {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "one" | "1" => Ok(Tails::One),
            "two" | "2" => Ok(Tails::Two),
            other => Err(format!("unknown tail convention `{other}` (expected one or two)")),
        }
    }
}

impl fmt::Display for Tails {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tails::One => "one",
            Tails::Two => "two",
        })
    }
}

/// Median of a sample; the mean of the two middle values for even sizes.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    Some(if sorted.len().is_multiple_of(2) {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    } else {
        sorted[mid]
    })
}

/// A two-group Mann-Whitney comparison together with the group summaries
/// a report prints next to it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupComparison {
    pub label_a: String,
    pub label_b: String,
    pub n_a: usize,
    pub n_b: usize,
    pub median_a: f64,
    pub median_b: f64,
    pub test: MwuResult,
}

pub fn compare_groups(
    label_a: &str,
    sample_a: &[f64],
    label_b: &str,
    sample_b: &[f64],
    options: &MwuOptions,
) -> Result<GroupComparison> {
    let test = mann_whitney_u(sample_a, sample_b, options)?;
    Ok(GroupComparison {
        label_a: label_a.to_string(),
        label_b: label_b.to_string(),
        n_a: sample_a.len(),
        n_b: sample_b.len(),
        median_a: median(sample_a).ok_or(Error::EmptySample("a"))?,
        median_b: median(sample_b).ok_or(Error::EmptySample("b"))?,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn medians() {
        assert_eq!(median(&[]), None);
        assert_eq!(median(&[3.0, 1.0, 2.0]), Some(2.0));
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), Some(2.5));
    }

    #[test]
    fn tails_parse() {
        assert_eq!("one".parse::<Tails>().unwrap(), Tails::One);
        assert_eq!("two".parse::<Tails>().unwrap(), Tails::Two);
        assert!("three".parse::<Tails>().is_err());
    }
}
