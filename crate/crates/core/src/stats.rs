//! Small statistics toolkit used by the experiments.

use std::collections::HashMap;
use std::hash::Hash;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, Normal, StudentsT};

use crate::error::{Error, Result};

/// A point estimate with a two-sided confidence interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub lo: f64,
    pub hi: f64,
    pub n: u64,
    pub level: f64,
}

impl Estimate {
    /// Whether `x` lies within `k` standard errors of the mean.
    pub fn within_se(&self, x: f64, k: f64) -> bool {
        (self.mean - x).abs() <= k * self.se
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

pub fn sample_variance(xs: &[f64]) -> f64 {
    let m = mean(xs);
    xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (xs.len() as f64 - 1.0)
}

fn normal_quantile(level: f64) -> f64 {
    Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + level / 2.0)
}

fn t_quantile(level: f64, df: f64) -> f64 {
    StudentsT::new(0.0, 1.0, df).expect("df > 0").inverse_cdf(0.5 + level / 2.0)
}

/// Mean with a Student-t interval.
pub fn t_interval(xs: &[f64], level: f64) -> Result<Estimate> {
    if xs.len() < 2 {
        return Err(Error::TooShort(format!("{} observations, need 2", xs.len())));
    }
    let m = mean(xs);
    let se = (sample_variance(xs) / xs.len() as f64).sqrt();
    let h = t_quantile(level, xs.len() as f64 - 1.0) * se;
    Ok(Estimate { mean: m, se, lo: m - h, hi: m + h, n: xs.len() as u64, level })
}

/// Wilson score interval for a binomial proportion.
pub fn wilson(successes: u64, n: u64, level: f64) -> Estimate {
    let z = normal_quantile(level);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let denom = 1.0 + z * z / nf;
    let center = (p + z * z / (2.0 * nf)) / denom;
    let half = z * (p * (1.0 - p) / nf + z * z / (4.0 * nf * nf)).sqrt() / denom;
    Estimate { mean: p, se: (p * (1.0 - p) / nf).sqrt(), lo: center - half, hi: center + half, n, level }
}

/// Batch-means estimate of the mean of a correlated series.
pub fn batch_means(xs: &[f64], batches: usize, level: f64) -> Result<Estimate> {
    if batches < 2 || xs.len() < batches {
        return Err(Error::TooShort(format!("{} values for {batches} batches", xs.len())));
    }
    let b = xs.len() / batches;
    let means: Vec<f64> = (0..batches).map(|i| mean(&xs[i * b..(i + 1) * b])).collect();
    t_interval(&means, level)
}

/// Least-squares line.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LinearFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::TooShort("need at least 3 paired points".into()));
    }
    let (mx, my) = (mean(xs), mean(ys));
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
        syy += (y - my) * (y - my);
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit { slope, intercept: my - slope * mx, r_squared })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ChiSquare {
    pub statistic: f64,
    pub df: u64,
    pub p_value: f64,
    /// Categories merged into a pooled bin because of small expected counts.
    pub pooled: usize,
}

fn chi_sf(stat: f64, df: u64) -> f64 {
    if df == 0 {
        return 1.0;
    }
    ChiSquared::new(df as f64).expect("df > 0").sf(stat)
}

/// Goodness of fit of observed counts against probabilities.
///
/// Cells with expected count below 5 are pooled, starting from the rarest.
pub fn chi_square_gof(observed: &[u64], probs: &[f64]) -> Result<ChiSquare> {
    if observed.len() != probs.len() {
        return Err(Error::Domain("observed and expected lengths differ".into()));
    }
    let n: u64 = observed.iter().sum();
    let mut cells: Vec<(f64, f64)> = observed.iter().zip(probs).map(|(&o, &p)| (o as f64, p * n as f64)).collect();
    cells.sort_by(|a, b| b.1.total_cmp(&a.1));
    let (kept, pooled) = pool_tail(cells, |c| c.1);
    let stat = kept.iter().map(|&(o, e)| if e > 0.0 { (o - e) * (o - e) / e } else { 0.0 }).sum();
    let df = kept.len().saturating_sub(1) as u64;
    Ok(ChiSquare { statistic: stat, df, p_value: chi_sf(stat, df), pooled })
}

/// Pools trailing cells (sorted by decreasing size) until every cell reaches 5.
fn pool_tail<F: Fn(&(f64, f64)) -> f64>(cells: Vec<(f64, f64)>, size: F) -> (Vec<(f64, f64)>, usize) {
    let mut kept: Vec<(f64, f64)> = Vec::new();
    let mut rest = (0.0, 0.0);
    let mut pooled = 0;
    for c in cells {
        if size(&c) >= 5.0 {
            kept.push(c);
        } else {
            rest.0 += c.0;
            rest.1 += c.1;
            pooled += 1;
        }
    }
    if pooled > 0 {
        if size(&rest) >= 5.0 || kept.is_empty() {
            kept.push(rest);
        } else {
            let last = kept.last_mut().unwrap();
            last.0 += rest.0;
            last.1 += rest.1;
        }
    }
    (kept, pooled)
}

/// Two-sample chi-square test of homogeneity on categorical samples.
///
/// Categories whose smaller expected count is below 5 are pooled into one
/// bin, so sparse tails do not inflate the statistic.
pub fn chi_square_two_sample<K: Eq + Hash + Clone + Ord>(a: &HashMap<K, u64>, b: &HashMap<K, u64>) -> Result<ChiSquare> {
    let na: u64 = a.values().sum();
    let nb: u64 = b.values().sum();
    if na == 0 || nb == 0 {
        return Err(Error::TooShort("empty sample".into()));
    }
    let mut keys: Vec<&K> = a.keys().chain(b.keys()).collect();
    keys.sort();
    keys.dedup();
    let (fa, fb) = (na as f64 / (na + nb) as f64, nb as f64 / (na + nb) as f64);
    let mut cells: Vec<(f64, f64)> = keys
        .iter()
        .map(|k| (*a.get(k).unwrap_or(&0) as f64, *b.get(k).unwrap_or(&0) as f64))
        .collect();
    let small = |c: &(f64, f64)| (c.0 + c.1) * fa.min(fb);
    cells.sort_by(|x, y| small(y).total_cmp(&small(x)));
    let (kept, pooled) = pool_tail(cells, small);
    let mut stat = 0.0;
    for &(oa, ob) in &kept {
        let t = oa + ob;
        let (ea, eb) = (t * fa, t * fb);
        stat += (oa - ea) * (oa - ea) / ea + (ob - eb) * (ob - eb) / eb;
    }
    let df = kept.len().saturating_sub(1) as u64;
    Ok(ChiSquare { statistic: stat, df, p_value: chi_sf(stat, df), pooled })
}

/// Histogram of a sample.
pub fn tally<K: Eq + Hash, I: IntoIterator<Item = K>>(it: I) -> HashMap<K, u64> {
    let mut m = HashMap::new();
    for k in it {
        *m.entry(k).or_insert(0) += 1;
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn wilson_known_value() {
        // 50/100 at 95%: center 0.5, half-width 0.0961.
        let e = wilson(50, 100, 0.95);
        assert_relative_eq!(e.lo, 0.4038, epsilon = 1e-4);
        assert_relative_eq!(e.hi, 0.5962, epsilon = 1e-4);
    }

    #[test]
    fn t_interval_known_value() {
        let e = t_interval(&[1.0, 2.0, 3.0, 4.0, 5.0], 0.95).unwrap();
        assert_relative_eq!(e.mean, 3.0);
        // t_{0.975,4} = 2.776445, se = sqrt(2.5/5).
        assert_relative_eq!(e.hi - e.mean, 2.776445 * 0.5f64.sqrt(), epsilon = 1e-5);
    }

    #[test]
    fn fit_exact_line() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x + 1.0).collect();
        let f = linear_fit(&xs, &ys).unwrap();
        assert_relative_eq!(f.slope, 2.0);
        assert_relative_eq!(f.intercept, 1.0, epsilon = 1e-12);
        assert_relative_eq!(f.r_squared, 1.0);
    }

    #[test]
    fn identical_samples_pass() {
        let a = tally([1, 1, 2, 2, 3, 3].repeat(20));
        let c = chi_square_two_sample(&a, &a).unwrap();
        assert_eq!(c.statistic, 0.0);
        assert_eq!(c.p_value, 1.0);
    }

    #[test]
    fn gof_detects_bias() {
        let c = chi_square_gof(&[900, 100], &[0.5, 0.5]).unwrap();
        assert!(c.p_value < 1e-10);
        // Chi-square 0.0 with one df.
        let c = chi_square_gof(&[500, 500], &[0.5, 0.5]).unwrap();
        assert_relative_eq!(c.p_value, 1.0);
    }
}
