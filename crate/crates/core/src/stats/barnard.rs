use serde::{Deserialize, Serialize};

use super::Tails;
use crate::error::{Error, Result};
use crate::roles::ContingencyTable2x2;

/// Spacing of the nuisance-parameter grid: 9999 interior points.
pub const DEFAULT_GRID_RESOLUTION: f64 = 1e-4;

// Relative slack when comparing a table's statistic with the observed one,
// so that algebraically equal statistics are not split by rounding.
const TIE_SLACK: f64 = 1e-10;

const GOLDEN_ITERATIONS: usize = 80;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BarnardOptions {
    pub tails: Tails,
    pub grid_resolution: f64,
}

impl Default for BarnardOptions {
    fn default() -> Self {
        BarnardOptions {
            tails: Tails::Two,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarnardResult {
    pub table: ContingencyTable2x2,
    /// Pooled-variance score statistic of the observed table.
    pub t: f64,
    pub p: f64,
    /// Nuisance proportion at which the rejection probability peaks.
    pub nuisance_argmax: f64,
    pub grid_resolution: f64,
    pub tails: Tails,
}

fn score(x1: u64, m1: u64, x2: u64, m2: u64) -> f64 {
    let (m1f, m2f) = (m1 as f64, m2 as f64);
    let pooled = (x1 + x2) as f64 / (m1f + m2f);
    if pooled <= 0.0 || pooled >= 1.0 {
        return 0.0;
    }
    let diff = x1 as f64 / m1f - x2 as f64 / m2f;
    diff / (pooled * (1.0 - pooled) * (1.0 / m1f + 1.0 / m2f)).sqrt()
}

fn margins(table: &ContingencyTable2x2) -> Result<(u64, u64)> {
    let (m1, m2) = table.row_sums();
    if m1 == 0 || m2 == 0 {
        return Err(Error::DegenerateMargins(format!(
            "row sums {m1} and {m2} must both be positive"
        )));
    }
    Ok((m1, m2))
}

/// Difference in row proportions (first column) over its pooled standard error.
/// Tables whose pooled proportion is 0 or 1 score 0.
pub fn wald_pooled_statistic(table: &ContingencyTable2x2) -> Result<f64> {
    let (m1, m2) = margins(table)?;
    Ok(score(table.a, m1, table.c, m2))
}

/// Tables (x1, x2) at least as extreme as the observed one.
fn rejection_region(m1: u64, m2: u64, observed: f64, tails: Tails) -> Vec<(usize, usize)> {
    let slack = TIE_SLACK * observed.abs().max(1.0);
    let mut region = Vec::new();
    for x1 in 0..=m1 {
        for x2 in 0..=m2 {
            let t = score(x1, m1, x2, m2);
            let extreme = match tails {
                Tails::Two => t.abs() >= observed.abs() - slack,
                Tails::One if observed >= 0.0 => t >= observed - slack,
                Tails::One => t <= observed + slack,
            };
            if extreme {
                region.push((x1 as usize, x2 as usize));
            }
        }
    }
    region
}

struct Binomials {
    ln_choose: Vec<f64>,
    m: u64,
}

impl Binomials {
    fn new(m: u64) -> Self {
        let mut ln_fact = vec![0.0; m as usize + 1];
        for k in 1..=m as usize {
            ln_fact[k] = ln_fact[k - 1] + (k as f64).ln();
        }
        let ln_choose = (0..=m as usize)
            .map(|k| ln_fact[m as usize] - ln_fact[k] - ln_fact[m as usize - k])
            .collect();
        Binomials { ln_choose, m }
    }

    fn pmf(&self, pi: f64, out: &mut Vec<f64>) {
        let (lp, lq) = (pi.ln(), (1.0 - pi).ln());
        out.clear();
        out.extend(self.ln_choose.iter().enumerate().map(|(k, lc)| {
            let k = k as f64;
            (lc + k * lp + (self.m as f64 - k) * lq).exp()
        }));
    }
}

struct RejectionMass {
    region: Vec<(usize, usize)>,
    row1: Binomials,
    row2: Binomials,
}

impl RejectionMass {
    fn new(table: &ContingencyTable2x2, tails: Tails) -> Result<(Self, f64)> {
        let (m1, m2) = margins(table)?;
        let observed = score(table.a, m1, table.c, m2);
        let mass = RejectionMass {
            region: rejection_region(m1, m2, observed, tails),
            row1: Binomials::new(m1),
            row2: Binomials::new(m2),
        };
        Ok((mass, observed))
    }

    fn at(&self, pi: f64, buf1: &mut Vec<f64>, buf2: &mut Vec<f64>) -> f64 {
        self.row1.pmf(pi, buf1);
        self.row2.pmf(pi, buf2);
        self.region.iter().map(|&(x1, x2)| buf1[x1] * buf2[x2]).sum()
    }
}

/// Probability, at nuisance proportion `pi`, that two independent binomial
/// rows with the table's margins produce a table at least as extreme.
pub fn rejection_probability(table: &ContingencyTable2x2, tails: Tails, pi: f64) -> Result<f64> {
    let (mass, _) = RejectionMass::new(table, tails)?;
    Ok(mass.at(pi, &mut Vec::new(), &mut Vec::new()))
}

/// Barnard's unconditional test: the rejection probability maximized over
/// the nuisance proportion, first on a uniform grid and then by a
/// golden-section search in the grid cell around the best point.
pub fn barnard_test(table: &ContingencyTable2x2, options: &BarnardOptions) -> Result<BarnardResult> {
    let step = options.grid_resolution;
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidGrid(step));
    }
    let (mass, observed) = RejectionMass::new(table, options.tails)?;
    let (mut buf1, mut buf2) = (Vec::new(), Vec::new());

    let points = ((1.0 / step) - 1e-9).floor() as usize;
    let mut best = (f64::NEG_INFINITY, 0.5);
    for k in 1..=points {
        let pi = k as f64 * step;
        if pi >= 1.0 {
            break;
        }
        let p = mass.at(pi, &mut buf1, &mut buf2);
        if p > best.0 {
            best = (p, pi);
        }
    }

    let edge = f64::EPSILON.sqrt();
    let (mut lo, mut hi) = ((best.1 - step).max(edge), (best.1 + step).min(1.0 - edge));
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = hi - ratio * (hi - lo);
    let mut x2 = lo + ratio * (hi - lo);
    let mut f1 = mass.at(x1, &mut buf1, &mut buf2);
    let mut f2 = mass.at(x2, &mut buf1, &mut buf2);
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 >= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - ratio * (hi - lo);
            f1 = mass.at(x1, &mut buf1, &mut buf2);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + ratio * (hi - lo);
            f2 = mass.at(x2, &mut buf1, &mut buf2);
        }
    }
    for (p, pi) in [(f1, x1), (f2, x2)] {
        if p > best.0 {
            best = (p, pi);
        }
    }

    Ok(BarnardResult {
        table: *table,
        t: observed,
        p: best.0.clamp(0.0, 1.0),
        nuisance_argmax: best.1,
        grid_resolution: step,
        tails: options.tails,
    })
}
