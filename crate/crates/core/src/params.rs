//! Constants and probability tables of the κ-Markovian peeling process.
//!
//! Everything here is derived from a single parameter κ ∈ (0, 2/27], or
//! equivalently α ∈ [2/3, 1) with α²(1−α)/2 = κ:
//!
//! * the step law `q` of the perimeter random walk (`q_1 = α`, `q_{-k}` in
//!   closed form),
//! * its drift `δ = sqrt(α(3α−2))`,
//! * the harmonic function `C̃_p` that turns the free walk into the perimeter
//!   process of the peeling (`C̃_2 = α⁻²`, `C̃_3 = α⁻³`, `C̃_p = 0` for `p ≤ 1`),
//! * the Boltzmann partition functions `Z_p`.
//!
//! [`PeelParams`] bundles all of it, immutable after construction.

pub mod exact;

use std::fmt;
use std::sync::OnceLock;

use rand::Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// The critical value κ = 2/27 (the UIPT).
pub const KAPPA_CRITICAL: f64 = 2.0 / 27.0;
/// α at the critical point.
pub const ALPHA_CRITICAL: f64 = 2.0 / 3.0;

/// Number of `q_{-k}` entries tabulated eagerly.
pub const Q_TABLE_LEN: usize = 1 << 15;
/// Default C̃ table size at the critical point, where C̃ never converges.
pub const CRITICAL_P_MAX: usize = 4096;
/// Hard cap on the C̃ table in the hyperbolic regime.
const C_TILDE_CAP: usize = 1 << 15;
/// Slack used to accept κ values that are 2/27 up to floating point rounding.
const KAPPA_SLACK: f64 = 1e-15;

/// Which side of the peeled edge a swallowing triangle bends to.
///
/// `Right` follows the hole cycle in its `next` direction, `Left` goes
/// against it. The picture is in the [`crate::map`] module docs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Side::Left => f.write_str("left"),
            Side::Right => f.write_str("right"),
        }
    }
}

/// Outcome of one peeling step on a boundary edge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Transition {
    /// The revealed triangle has a new vertex; perimeter grows by one.
    Fresh,
    /// The revealed triangle swallows `k` boundary edges on `side`.
    Swallow { side: Side, k: usize },
}

impl Transition {
    /// Perimeter increment ΔP.
    pub fn delta_perimeter(self) -> i64 {
        match self {
            Transition::Fresh => 1,
            Transition::Swallow { k, .. } => -(k as i64),
        }
    }
}

/// Returns the unique root α ∈ [2/3, 1) of α²(1−α)/2 = κ.
pub fn alpha_from_kappa(kappa: f64) -> Result<f64> {
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(Error::InvalidKappa(kappa));
    }
    if kappa > KAPPA_CRITICAL * (1.0 + KAPPA_SLACK) {
        return Err(Error::InvalidKappa(kappa));
    }
    if kappa >= KAPPA_CRITICAL * (1.0 - KAPPA_SLACK) {
        return Ok(ALPHA_CRITICAL);
    }
    let f = |a: f64| a * a * (1.0 - a) / 2.0;
    // f is strictly decreasing on [2/3, 1].
    let (mut lo, mut hi) = (ALPHA_CRITICAL, 1.0_f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > kappa {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-17 {
            break;
        }
    }
    let mut a = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = (2.0 * a - 3.0 * a * a) / 2.0;
        if d.abs() < 1e-6 {
            break;
        }
        let step = (f(a) - kappa) / d;
        let cand = a - step;
        if cand >= ALPHA_CRITICAL && cand < 1.0 {
            a = cand;
        }
    }
    Ok(a)
}

/// κ = α²(1−α)/2.
pub fn kappa_from_alpha(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    Ok(alpha * alpha * (1.0 - alpha) / 2.0)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !(alpha >= ALPHA_CRITICAL - 1e-15 && alpha < 1.0) {
        return Err(Error::Domain(format!("alpha = {alpha} outside [2/3, 1)")));
    }
    Ok(())
}

/// Drift δ = sqrt(α(3α−2)) of the perimeter walk; exactly 0 at α = 2/3.
pub fn drift(alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let s = 3.0 * alpha - 2.0;
    if s <= 0.0 {
        return Ok(0.0);
    }
    Ok((alpha * s).sqrt())
}

/// `2/α − 2`, the geometric rate of the left tail of `q`.
fn tail_rate(alpha: f64) -> f64 {
    // 1 − α is exact for α ∈ [1/2, 1]; 2/α − 2 would cancel.
    2.0 * (1.0 - alpha) / alpha
}

/// Probability `q_i` of a perimeter step `i ∈ {1, −1, −2, …}`.
pub fn q_step(i: i64, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    match i {
        1 => Ok(alpha),
        i if i <= -1 => Ok(ln_q_neg_direct((-i) as usize, alpha).exp()),
        _ => Err(Error::Domain(format!("step {i} is not in {{1, -1, -2, ...}}"))),
    }
}

/// `ln q_{-k}` from log-gamma; used past the eagerly built table.
fn ln_q_neg_direct(k: usize, alpha: f64) -> f64 {
    use statrs::function::gamma::ln_gamma;
    let kf = k as f64;
    let a = 3.0 * alpha - 2.0;
    std::f64::consts::LN_2 - kf * 4f64.ln() + ln_gamma(2.0 * kf - 1.0)
        - ln_gamma(kf)
        - ln_gamma(kf + 2.0)
        + kf * tail_rate(alpha).ln()
        + (a.max(0.0) * kf + 1.0).ln()
}

/// Tabulates `q_{-k}` for `k = 1..len` by running ratios; index 0 holds `q_{-1}`.
fn q_neg_table(alpha: f64, len: usize) -> Vec<f64> {
    let rho = tail_rate(alpha);
    let a = (3.0 * alpha - 2.0).max(0.0);
    let mut out = Vec::with_capacity(len);
    let mut q = rho * (3.0 * alpha - 1.0) / 4.0;
    for k in 1..=len {
        out.push(q);
        let kf = k as f64;
        q *= (2.0 * kf - 1.0) / (2.0 * (kf + 2.0)) * rho * (a * (kf + 1.0) + 1.0) / (a * kf + 1.0);
    }
    out
}

/// `q_{-k}/ρ^k` for `k = 1..len` (index 0 holds `k = 1`).
fn r_scaled_table(alpha: f64, len: usize) -> Vec<f64> {
    let a = (3.0 * alpha - 2.0).max(0.0);
    let mut out = Vec::with_capacity(len);
    let mut r = (3.0 * alpha - 1.0) / 4.0;
    for k in 1..=len {
        out.push(r);
        let kf = k as f64;
        r *= (2.0 * kf - 1.0) / (2.0 * (kf + 2.0)) * (a * (kf + 1.0) + 1.0) / (a * kf + 1.0);
    }
    out
}

/// Same table in log space; stays finite where the linear table underflows.
fn ln_q_neg_table(alpha: f64, len: usize) -> Vec<f64> {
    let rho = tail_rate(alpha);
    let a = (3.0 * alpha - 2.0).max(0.0);
    let mut out = Vec::with_capacity(len);
    let mut lq = (rho * (3.0 * alpha - 1.0) / 4.0).ln();
    for k in 1..=len {
        out.push(lq);
        let kf = k as f64;
        lq += ((2.0 * kf - 1.0) / (2.0 * (kf + 2.0))).ln() + rho.ln() + ((a * (kf + 1.0) + 1.0) / (a * kf + 1.0)).ln();
    }
    out
}

/// Tail masses `T_m = Σ_{k ≥ m} q_{-k}` for `m = 1..=len` (index `m − 1`), and
/// a certified bound on what was dropped past the table.
fn tail_sums(alpha: f64, q_neg: &[f64]) -> (Vec<f64>, f64) {
    let len = q_neg.len();
    let critical = 3.0 * alpha - 2.0 <= 0.0;
    let mut tails = vec![0.0; len];
    if critical {
        // Heavy k^{-3/2} tail: use the exact normalization Σ q_{-k} = 1 − α.
        let mut acc = 0.0;
        for m in 1..=len {
            tails[m - 1] = ((1.0 - alpha) - acc).max(0.0);
            acc += q_neg[m - 1];
        }
        let dropped = ((1.0 - alpha) - acc).max(0.0);
        return (tails, dropped);
    }
    // Ratios q_{-(k+1)}/q_{-k} are bounded by ρ < 1, so the remainder past the
    // table is at most q_{-len}·ρ/(1−ρ).
    let rho = tail_rate(alpha);
    let remainder = q_neg[len - 1] * rho / (1.0 - rho);
    let mut acc = remainder;
    for m in (1..=len).rev() {
        acc += q_neg[m - 1];
        tails[m - 1] = acc;
    }
    (tails, remainder)
}

/// Computes `C̃_2 … C̃_{p_max}` (index 0 holds `C̃_2`).
///
/// Uses the rearranged harmonic equation
/// `α (C̃_{p+1} − C̃_p) = Σ_k q_{-k} (C̃_p − C̃_{p-k})`, whose right-hand side is
/// a sum of non-negative terms once `C̃` is known to be non-decreasing. No
/// cancellation occurs, so the forward recursion is stable.
pub fn c_tilde_table(alpha: f64, p_max: usize) -> Result<Vec<f64>> {
    check_alpha(alpha)?;
    if p_max < 3 {
        return Err(Error::Domain(format!("p_max = {p_max} must be at least 3")));
    }
    let len = Q_TABLE_LEN.max(p_max + 2);
    let q_neg = q_neg_table(alpha, len);
    let (tails, _) = tail_sums(alpha, &q_neg);
    c_tilde_from_tables(alpha, &q_neg, &tails, p_max, false).map(|(t, _)| t)
}

/// Returns the table and whether it reached numerical convergence.
fn c_tilde_from_tables(
    alpha: f64,
    q_neg: &[f64],
    tails: &[f64],
    p_max: usize,
    stop_at_convergence: bool,
) -> Result<(Vec<f64>, bool)> {
    let mut c = Vec::with_capacity(p_max.min(4096));
    c.push(alpha.powi(-2));
    // Only terms with q_{-k} above this matter at double precision.
    let k_eff = q_neg
        .iter()
        .zip(tails)
        .position(|(_, &t)| t < 1e-24)
        .unwrap_or(q_neg.len());
    let mut converged = false;
    let mut quiet = 0usize;
    for p in 2..p_max {
        let cp = c[p - 2];
        let mut sum = 0.0;
        let kmax = (p - 2).min(k_eff);
        for k in 1..=kmax {
            // C̃_{p-k}, index p-k-2.
            sum += q_neg[k - 1] * (cp - c[p - k - 2]);
        }
        // k ≥ p − 1 reaches perimeters ≤ 1 where C̃ vanishes.
        if p - 1 <= tails.len() {
            sum += tails[p - 2] * cp;
        }
        let next = cp + sum / alpha;
        if !(next >= cp) || !next.is_finite() {
            return Err(Error::NumericalInstability { p: p + 1 });
        }
        c.push(next);
        if stop_at_convergence && p >= 256 {
            // Rounding alone keeps the increments at an ulp or so, so
            // "quiet" means a few ulps, not zero.
            if next - cp <= 4.0 * f64::EPSILON * next {
                quiet += 1;
                if quiet >= 8 {
                    converged = true;
                    break;
                }
            } else {
                quiet = 0;
            }
        }
    }
    Ok((c, converged))
}

/// Boltzmann partition function `Z_p`, from the closed form
/// `Z_p = q_{-(p-1)} / (2 β^{p-1})`.
pub fn z_partition(kappa: f64, p: usize) -> Result<f64> {
    Ok(ln_z_partition(kappa, p)?.exp())
}

/// `ln Z_p`; finite even where `Z_p` itself overflows.
pub fn ln_z_partition(kappa: f64, p: usize) -> Result<f64> {
    if kappa > KAPPA_CRITICAL * (1.0 + KAPPA_SLACK) {
        return Err(Error::Divergent(kappa));
    }
    if p < 2 {
        return Err(Error::Domain(format!("Z_p needs p >= 2, got {p}")));
    }
    let alpha = alpha_from_kappa(kappa)?;
    let beta = alpha * (1.0 - alpha) / 2.0;
    let k = p - 1;
    Ok(ln_q_neg_direct(k, alpha) - std::f64::consts::LN_2 - (k as f64) * beta.ln())
}

/// Value of a truncated series with its certified remainder bound.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct SeriesValue {
    pub value: f64,
    pub tail_bound: f64,
    pub terms: usize,
}

/// Ratio `count(n+1, p) / count(n, p)` of consecutive triangulation counts.
pub(crate) fn count_ratio(n: usize, p: usize) -> f64 {
    let (n, p) = (n as f64, p as f64);
    2.0 * (2.0 * p + 3.0 * n - 1.0) * (2.0 * p + 3.0 * n - 2.0) * (2.0 * p + 3.0 * n - 3.0)
        / ((n + 1.0) * (2.0 * p + 2.0 * n) * (2.0 * p + 2.0 * n - 1.0))
}

/// `Z_p = Σ_n count(n, p) κⁿ` summed term by term.
///
/// Terms are built by running ratios so nothing overflows. Summation stops
/// once the ratio sequence is below 1 and non-increasing from the current term
/// on (it is a rational function of n tending to 27κ/2), which makes
/// `t_n · r / (1 − r)` a valid bound for the remainder.
pub fn z_series(kappa: f64, p: usize, rel_tol: f64) -> Result<SeriesValue> {
    if kappa > KAPPA_CRITICAL * (1.0 + KAPPA_SLACK) {
        return Err(Error::Divergent(kappa));
    }
    if !(kappa > 0.0) {
        return Err(Error::InvalidKappa(kappa));
    }
    if p < 2 {
        return Err(Error::Domain(format!("Z_p needs p >= 2, got {p}")));
    }
    let limit = 27.0 * kappa / 2.0;
    if limit >= 1.0 - 1e-12 {
        return Err(Error::NotCertifiable(
            "term ratios tend to 1 at the critical point; no geometric tail bound".into(),
        ));
    }
    let count0 = crate::boltzmann::count_triangulations(0, p);
    let mut term = crate::boltzmann::biguint_to_f64(&count0);
    let mut sum = 0.0;
    let mut n = 0usize;
    loop {
        sum += term;
        let r = kappa * count_ratio(n, p);
        let r_next = kappa * count_ratio(n + 1, p);
        // Bound valid when ratios from here on are dominated by max(r, limit).
        let r_sup = r.max(limit);
        if r_sup < 1.0 && r_next <= r.max(limit) {
            let tail = term * r_sup / (1.0 - r_sup);
            if tail < rel_tol * sum {
                return Ok(SeriesValue { value: sum, tail_bound: tail, terms: n + 1 });
            }
        }
        term *= r;
        n += 1;
        if n > 10_000_000 {
            return Err(Error::NotCertifiable("series did not converge".into()));
        }
    }
}

/// Mean number of internal vertices of a Boltzmann triangulation of the
/// `(k+1)`-gon: `k(2k−1)(1−α)/((3α−2)k+1)`.
///
/// At α = 2/3 the denominator is 1 for every k and the formula stays finite.
pub fn mean_hole_volume(k: usize, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    if k < 1 {
        return Err(Error::Domain("hole size k must be >= 1".into()));
    }
    let kf = k as f64;
    let a = (3.0 * alpha - 2.0).max(0.0);
    Ok(kf * (2.0 * kf - 1.0) * (1.0 - alpha) / (a * kf + 1.0))
}

/// How `PeelParams` was specified.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum ParamSpec {
    Kappa(f64),
    Alpha(f64),
}

/// A κ value parsed from text, keeping the exact fraction when one was given.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KappaInput {
    pub value: f64,
    pub fraction: Option<(u64, u64)>,
}

impl KappaInput {
    /// Parses `"9/128"`, `"0.0735"` or `"2/27"`; fractions are range-checked
    /// exactly before conversion.
    pub fn parse(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some((num, den)) = s.split_once('/') {
            let num: u64 = num.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{s}`")))?;
            let den: u64 = den.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{s}`")))?;
            if den == 0 || num == 0 {
                return Err(Error::InvalidKappa(if den == 0 { f64::NAN } else { 0.0 }));
            }
            // κ > 2/27  ⇔  27·num > 2·den
            if 27u128 * num as u128 > 2u128 * den as u128 {
                return Err(Error::InvalidKappa(num as f64 / den as f64));
            }
            Ok(KappaInput { value: num as f64 / den as f64, fraction: Some((num, den)) })
        } else {
            let value: f64 = s.parse().map_err(|_| Error::Parse(format!("bad number `{s}`")))?;
            Ok(KappaInput { value, fraction: None })
        }
    }

    /// True when the input is exactly 2/27.
    pub fn is_critical(&self) -> bool {
        matches!(self.fraction, Some((n, d)) if 27u128 * n as u128 == 2u128 * d as u128)
    }
}

/// Truncation metadata of the tables in [`PeelParams`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Largest `k` stored in the exported `q` table.
    pub i_max: usize,
    /// Largest `p` with a tabulated `C̃_p`.
    pub p_max: usize,
    /// Bound on `Σ_{k > i_max} q_{-k}`.
    pub q_tail_bound: f64,
    /// `|α + Σ_{k ≤ table} q_{-k} − 1|`.
    pub q_normalization_residual: f64,
    /// Whether `C̃` reached its limit to double precision before `p_max`.
    pub c_tilde_converged: bool,
    /// `1/(αδ) − C̃_{p_max}` (NaN at the critical point).
    pub c_tilde_limit_gap: f64,
}

/// All κ-derived constants and tables, immutable after construction.
#[derive(Clone, Debug, Serialize)]
pub struct PeelParams {
    pub kappa: f64,
    pub alpha: f64,
    pub beta: f64,
    pub drift: f64,
    /// `q_1 = α`.
    pub q_1: f64,
    /// `q_{-1} … q_{-i_max}`.
    pub q_table: Vec<f64>,
    /// `C̃_2 … C̃_{p_max}`.
    pub c_tilde: Vec<f64>,
    /// `Z_2 … Z_{z_max}`.
    pub z_table: Vec<f64>,
    pub tolerances: Tolerances,
    #[serde(skip)]
    q_neg: Vec<f64>,
    #[serde(skip)]
    ln_q_neg: Vec<f64>,
    #[serde(skip)]
    q_cdf: Vec<f64>,
    /// `q_{-k} / ρ^k`; never underflows, used by the Boltzmann sampler.
    #[serde(skip)]
    r_scaled: Vec<f64>,
    #[serde(skip)]
    split_residuals: Vec<OnceLock<f64>>,
}

/// Perimeters whose sampler normalization is cached.
const SPLIT_CHECK_CACHE: usize = 1 << 14;

/// Largest p with a tabulated `Z_p`.
pub const Z_TABLE_MAX: usize = 64;

impl PeelParams {
    pub fn new(kappa: f64) -> Result<Self> {
        let alpha = alpha_from_kappa(kappa)?;
        Self::build(kappa, alpha, CRITICAL_P_MAX)
    }

    pub fn from_alpha(alpha: f64) -> Result<Self> {
        let kappa = kappa_from_alpha(alpha)?;
        Self::build(kappa, alpha, CRITICAL_P_MAX)
    }

    /// Builds from parsed text, keeping α = 2/3 exact for the input `2/27`.
    pub fn from_kappa_input(input: &KappaInput) -> Result<Self> {
        if input.is_critical() {
            return Self::build(KAPPA_CRITICAL, ALPHA_CRITICAL, CRITICAL_P_MAX);
        }
        Self::new(input.value)
    }

    pub fn from_spec(spec: ParamSpec) -> Result<Self> {
        match spec {
            ParamSpec::Kappa(k) => Self::new(k),
            ParamSpec::Alpha(a) => Self::from_alpha(a),
        }
    }

    /// Same as [`PeelParams::new`] with an explicit C̃ table size; only matters
    /// at the critical point.
    pub fn with_critical_p_max(kappa: f64, p_max: usize) -> Result<Self> {
        let alpha = alpha_from_kappa(kappa)?;
        Self::build(kappa, alpha, p_max)
    }

    fn build(kappa: f64, alpha: f64, critical_p_max: usize) -> Result<Self> {
        check_alpha(alpha)?;
        let drift = drift(alpha)?;
        // κ/α written through α alone, so the Boltzmann tables stay consistent
        // with the step law even when α carries rounding from κ.
        let beta = alpha * (1.0 - alpha) / 2.0;
        let critical = drift == 0.0;
        let table_len = if critical { Q_TABLE_LEN.max(critical_p_max + 2) } else { Q_TABLE_LEN };
        let q_neg = q_neg_table(alpha, table_len);
        let ln_q_neg = ln_q_neg_table(alpha, table_len);
        let (tails, dropped) = tail_sums(alpha, &q_neg);

        let mut q_cdf = Vec::with_capacity(table_len + 1);
        let mut acc = alpha;
        q_cdf.push(acc);
        for &q in &q_neg {
            acc += q;
            q_cdf.push(acc);
        }
        let q_normalization_residual = (acc + dropped - 1.0).abs();

        let (i_max, q_tail_bound) = if critical {
            (table_len, tails[table_len - 1])
        } else {
            let i = tails.iter().position(|&t| t < 1e-17).unwrap_or(table_len);
            let i_max = i.max(1);
            (i_max, if i_max < table_len { tails[i_max] } else { dropped })
        };

        let (c_tilde, converged) = if critical {
            c_tilde_from_tables(alpha, &q_neg, &tails, critical_p_max, false)?
        } else {
            c_tilde_from_tables(alpha, &q_neg, &tails, C_TILDE_CAP, true)?
        };
        let p_max = c_tilde.len() + 1;
        let c_tilde_limit_gap = if critical { f64::NAN } else { 1.0 / (alpha * drift) - c_tilde[c_tilde.len() - 1] };

        let z_table = (2..=Z_TABLE_MAX)
            .map(|p| (ln_q_neg[p - 2] - std::f64::consts::LN_2 - ((p - 1) as f64) * beta.ln()).exp())
            .collect();

        Ok(PeelParams {
            kappa,
            alpha,
            beta,
            drift,
            q_1: alpha,
            q_table: q_neg[..i_max.min(table_len)].to_vec(),
            c_tilde,
            z_table,
            tolerances: Tolerances {
                i_max,
                p_max,
                q_tail_bound,
                q_normalization_residual,
                c_tilde_converged: converged,
                c_tilde_limit_gap,
            },
            q_neg,
            ln_q_neg,
            q_cdf,
            r_scaled: r_scaled_table(alpha, table_len),
            split_residuals: (0..SPLIT_CHECK_CACHE).map(|_| OnceLock::new()).collect(),
        })
    }

    /// `q_{-k} / ρ^k` with `ρ = 2/α − 2`.
    pub(crate) fn r_scaled(&self, k: usize) -> f64 {
        match self.r_scaled.get(k - 1) {
            Some(&r) => r,
            None => (ln_q_neg_direct(k, self.alpha) - (k as f64) * tail_rate(self.alpha).ln()).exp(),
        }
    }

    /// `ρ = 2/α − 2`.
    pub(crate) fn rho(&self) -> f64 {
        tail_rate(self.alpha)
    }

    /// `|Σ (Boltzmann step probabilities at perimeter p) − 1|`, cached per p.
    pub fn boltzmann_residual(&self, p: usize) -> f64 {
        let compute = || {
            if p == 2 {
                let fresh = self.alpha * self.rho() * self.r_scaled(2) / self.r_scaled(1);
                return (fresh + 1.0 / self.z(2) - 1.0).abs();
            }
            let rp = self.r_scaled(p - 1);
            let mut s = self.alpha * self.rho() * self.r_scaled(p) / rp;
            for k in 1..=p - 2 {
                s += self.r_scaled(k) * self.r_scaled(p - 1 - k) / (2.0 * rp);
            }
            (s - 1.0).abs()
        };
        match self.split_residuals.get(p) {
            Some(cell) => *cell.get_or_init(compute),
            None => compute(),
        }
    }

    pub fn is_critical(&self) -> bool {
        self.drift == 0.0
    }

    /// `q_{-k}` for `k ≥ 1` (0 once it underflows).
    pub fn q_neg(&self, k: usize) -> f64 {
        debug_assert!(k >= 1);
        match self.q_neg.get(k - 1) {
            Some(&q) => q,
            None => self.ln_q_neg(k).exp(),
        }
    }

    /// `ln q_{-k}` for `k ≥ 1`.
    pub fn ln_q_neg(&self, k: usize) -> f64 {
        match self.ln_q_neg.get(k - 1) {
            Some(&l) => l,
            None => ln_q_neg_direct(k, self.alpha),
        }
    }

    /// `C̃_p`, zero for `p ≤ 1`; constant past `p_max` once converged.
    pub fn c_tilde(&self, p: usize) -> Result<f64> {
        if p <= 1 {
            return Ok(0.0);
        }
        match self.c_tilde.get(p - 2) {
            Some(&c) => Ok(c),
            None if self.tolerances.c_tilde_converged => Ok(self.c_tilde[self.c_tilde.len() - 1]),
            None => Err(Error::PerimeterBeyondTable { p, p_max: self.tolerances.p_max }),
        }
    }

    /// Limit of `C̃_p`, `1/(αδ)`; infinite at the critical point.
    pub fn c_tilde_limit(&self) -> f64 {
        if self.is_critical() {
            f64::INFINITY
        } else {
            1.0 / (self.alpha * self.drift)
        }
    }

    /// `Z_p` from the closed form.
    pub fn z(&self, p: usize) -> f64 {
        match self.z_table.get(p.wrapping_sub(2)) {
            Some(&z) => z,
            None => self.ln_z(p).exp(),
        }
    }

    pub fn ln_z(&self, p: usize) -> f64 {
        self.ln_q_neg(p - 1) - std::f64::consts::LN_2 - ((p - 1) as f64) * self.beta.ln()
    }

    /// Probability of `transition` when peeling a boundary edge at perimeter `p`.
    ///
    /// Swallows with `k > p − 2` have probability zero.
    pub fn peel_transition(&self, p: usize, transition: Transition) -> Result<f64> {
        if p < 2 {
            return Err(Error::Domain(format!("perimeter {p} < 2")));
        }
        let cp = self.c_tilde(p)?;
        match transition {
            Transition::Fresh => Ok(self.q_1 * self.c_tilde(p + 1)? / cp),
            Transition::Swallow { k, .. } => {
                if k == 0 || k + 2 > p {
                    return Ok(0.0);
                }
                Ok(0.5 * self.q_neg(k) * self.c_tilde(p - k)? / cp)
            }
        }
    }

    /// Draws the next transition at perimeter `p`.
    ///
    /// Consumes one uniform, plus one coin for the side of a swallow.
    pub fn sample_transition<R: Rng + ?Sized>(&self, p: usize, rng: &mut R) -> Result<Transition> {
        if p < 2 {
            return Err(Error::Domain(format!("perimeter {p} < 2")));
        }
        let mut u: f64 = rng.gen();
        let cp = self.c_tilde(p)?;
        let fresh = self.q_1 * self.c_tilde(p + 1)? / cp;
        if u < fresh {
            return Ok(Transition::Fresh);
        }
        u -= fresh;
        let mut chosen = None;
        for k in 1..=p - 2 {
            let q = self.q_neg(k);
            if q == 0.0 {
                break;
            }
            let m = q * self.c_tilde(p - k)? / cp;
            if u < m {
                chosen = Some(k);
                break;
            }
            u -= m;
        }
        let k = match chosen {
            Some(k) => k,
            None => {
                if u > 1e-9 {
                    return Err(Error::Normalization { p, residual: u });
                }
                // Rounding leftover: attribute to the last reachable swallow.
                (1..=p - 2).rev().find(|&k| self.q_neg(k) > 0.0).ok_or(Error::Normalization { p, residual: u })?
            }
        };
        let side = if rng.gen::<bool>() { Side::Right } else { Side::Left };
        Ok(Transition::Swallow { side, k })
    }

    /// Draws a free step of the walk Ξ from the law `q`.
    pub fn sample_free_step<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u: f64 = rng.gen();
        if u < self.q_1 {
            return 1;
        }
        // Smallest index with cdf > u.
        let idx = self.q_cdf.partition_point(|&c| c <= u);
        if idx < self.q_cdf.len() {
            return -(idx as i64);
        }
        // Past the table (only reachable in heavy-tailed regimes).
        let mut acc = self.q_cdf[self.q_cdf.len() - 1];
        let mut k = self.q_cdf.len();
        loop {
            acc += self.q_neg(k);
            if acc > u || k > 1 << 40 {
                return -(k as i64);
            }
            k += 1;
        }
    }

    /// `E[ΔV]` of the free volume walk, `α(2α−1)/δ`.
    pub fn volume_drift(&self) -> f64 {
        self.alpha * (2.0 * self.alpha - 1.0) / self.drift
    }

    /// Layer-time ratio `2/(α−δ)`.
    pub fn layer_time_ratio(&self) -> f64 {
        2.0 / (self.alpha - self.drift)
    }

    /// Per-layer perimeter growth `(α+δ)/(α−δ)`.
    pub fn hull_growth(&self) -> f64 {
        (self.alpha + self.drift) / (self.alpha - self.drift)
    }

    /// Hull volume-to-perimeter ratio `α(2α−1)/δ²`.
    pub fn hull_volume_ratio(&self) -> f64 {
        self.alpha * (2.0 * self.alpha - 1.0) / (self.drift * self.drift)
    }

    /// `|Σ q_i C̃_{p+i} − C̃_p| / C̃_p`.
    pub fn harmonicity_residual(&self, p: usize) -> Result<f64> {
        let cp = self.c_tilde(p)?;
        let mut s = self.q_1 * self.c_tilde(p + 1)?;
        for k in 1..=p.saturating_sub(2) {
            s += self.q_neg(k) * self.c_tilde(p - k)?;
        }
        Ok((s - cp).abs() / cp)
    }

    /// `|q_1 + Σ_{k ≤ K} q_{-k} − 1|` with K the first index whose tail bound
    /// is below `tol`.
    pub fn normalization_residual(&self) -> f64 {
        let s: f64 = self.q_1 + self.q_table.iter().sum::<f64>();
        (s - 1.0).abs()
    }

    /// `|q_1 − Σ_k k q_{-k} − δ|` over the exported table.
    pub fn drift_residual(&self) -> f64 {
        let s: f64 = self.q_table.iter().enumerate().map(|(i, q)| (i + 1) as f64 * q).sum();
        (self.q_1 - s - self.drift).abs()
    }

    /// Relative residual of `κ Z_{p+1} + Σ_{k=1}^{p-2} Z_{k+1} Z_{p-k} = Z_p`
    /// (for `p = 2` the trivial map contributes the extra `1`).
    pub fn split_identity_residual(&self, p: usize) -> f64 {
        let mut s = self.kappa * self.z(p + 1);
        if p == 2 {
            s += 1.0;
        }
        for k in 1..=p.saturating_sub(2) {
            s += self.z(k + 1) * self.z(p - k);
        }
        (s - self.z(p)).abs() / self.z(p)
    }

    /// Content digest (hex SHA-256 of the canonical JSON dump).
    pub fn digest(&self) -> String {
        let json = serde_json::to_vec(self).expect("params serialize");
        hex::encode(Sha256::digest(&json))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Loads a dump, rebuilds the tables from κ and α and checks that every
    /// exported field reproduces bit for bit.
    pub fn from_json(s: &str) -> Result<Self> {
        let rec: PeelParamsRecord = serde_json::from_str(s)?;
        let p_max = rec.tolerances.p_max;
        let rebuilt = Self::build(rec.kappa, rec.alpha, if rec.drift == 0.0 { p_max } else { CRITICAL_P_MAX })?;
        let same = rebuilt.kappa == rec.kappa
            && rebuilt.beta == rec.beta
            && rebuilt.drift == rec.drift
            && rebuilt.q_1 == rec.q_1
            && rebuilt.q_table == rec.q_table
            && rebuilt.c_tilde == rec.c_tilde
            && rebuilt.z_table == rec.z_table;
        if !same {
            return Err(Error::Invariant("parameter dump does not match a rebuild from kappa/alpha".into()));
        }
        Ok(rebuilt)
    }
}

#[derive(Deserialize)]
struct PeelParamsRecord {
    kappa: f64,
    alpha: f64,
    beta: f64,
    drift: f64,
    q_1: f64,
    q_table: Vec<f64>,
    c_tilde: Vec<f64>,
    z_table: Vec<f64>,
    tolerances: Tolerances,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_examples() {
        assert_eq!(alpha_from_kappa(2.0 / 27.0).unwrap(), 2.0 / 3.0);
        assert!((alpha_from_kappa(9.0 / 128.0).unwrap() - 0.75).abs() < 1e-14);
        assert!((alpha_from_kappa(0.0735).unwrap() - 0.70).abs() < 1e-14);
    }

    #[test]
    fn alpha_rejects_supercritical_and_nonpositive() {
        assert!(matches!(alpha_from_kappa(0.08), Err(Error::InvalidKappa(_))));
        assert!(matches!(alpha_from_kappa(0.0), Err(Error::InvalidKappa(_))));
        assert!(matches!(alpha_from_kappa(-1.0), Err(Error::InvalidKappa(_))));
    }

    #[test]
    fn drift_examples() {
        assert_eq!(drift(2.0 / 3.0).unwrap(), 0.0);
        assert_relative_eq!(drift(0.75).unwrap(), 3f64.sqrt() / 4.0, epsilon = 1e-15);
        assert_relative_eq!(drift(0.70).unwrap(), 0.07f64.sqrt(), epsilon = 1e-15);
        assert!(drift(0.5).is_err());
        assert!(drift(1.0).is_err());
    }

    #[test]
    fn q_step_examples() {
        assert_eq!(q_step(1, 0.75).unwrap(), 0.75);
        assert_relative_eq!(q_step(-1, 0.75).unwrap(), 5.0 / 24.0, epsilon = 1e-15);
        assert_relative_eq!(q_step(-2, 0.75).unwrap(), 1.0 / 36.0, epsilon = 1e-15);
        assert!(q_step(0, 0.75).is_err());
        assert!(q_step(2, 0.75).is_err());
        // deep in the tail neither overflows nor goes NaN
        let q = q_step(-10_000, 0.70).unwrap();
        assert!(q.is_finite() && q >= 0.0);
    }

    #[test]
    fn running_ratio_table_matches_log_gamma() {
        let alpha = 0.7;
        let t = q_neg_table(alpha, 400);
        for k in [1usize, 2, 3, 10, 50, 200, 400] {
            let direct = ln_q_neg_direct(k, alpha).exp();
            assert_relative_eq!(t[k - 1], direct, max_relative = 1e-11);
        }
    }

    #[test]
    fn c_tilde_examples() {
        let c = c_tilde_table(0.75, 200).unwrap();
        assert_relative_eq!(c[0], 16.0 / 9.0, epsilon = 1e-14);
        assert_relative_eq!(c[1], 64.0 / 27.0, epsilon = 1e-14);
        assert_relative_eq!(c[2], 8.0 / 3.0, epsilon = 1e-14);
        assert!((c[198] - 16.0 / (3.0 * 3f64.sqrt())).abs() < 1e-4);
    }

    #[test]
    fn z_examples() {
        assert_relative_eq!(z_partition(9.0 / 128.0, 2).unwrap(), 10.0 / 9.0, max_relative = 1e-13);
        assert_relative_eq!(z_partition(1e-9, 2).unwrap(), 1.0, max_relative = 1e-8);
        assert!(matches!(z_partition(0.08, 2), Err(Error::Divergent(_))));
    }

    #[test]
    fn z_series_partial_sums_start_with_enumeration_counts() {
        // 1 + κ + 4κ² + 24κ³ + …
        let kappa = 9.0 / 128.0;
        let mut t = 1.0;
        let mut terms = vec![t];
        for n in 0..3 {
            t *= count_ratio(n, 2);
            terms.push(t);
        }
        assert_eq!(terms, vec![1.0, 1.0, 4.0, 24.0]);
        let s = z_series(kappa, 2, 1e-12).unwrap();
        assert_relative_eq!(s.value, 10.0 / 9.0, max_relative = 1e-9);
    }

    #[test]
    fn transition_examples() {
        let pp = PeelParams::from_alpha(0.75).unwrap();
        assert_relative_eq!(pp.peel_transition(2, Transition::Fresh).unwrap(), 1.0, epsilon = 1e-14);
        assert_relative_eq!(pp.peel_transition(3, Transition::Fresh).unwrap(), 27.0 / 32.0, epsilon = 1e-14);
        let sw = pp.peel_transition(3, Transition::Swallow { side: Side::Left, k: 1 }).unwrap();
        assert_relative_eq!(27.0 / 32.0 + 2.0 * sw, 1.0, epsilon = 1e-14);
        // out-of-range swallows carry no mass
        assert_eq!(pp.peel_transition(3, Transition::Swallow { side: Side::Right, k: 2 }).unwrap(), 0.0);
        assert!(pp.peel_transition(1, Transition::Fresh).is_err());
    }

    #[test]
    fn transitions_sum_to_one() {
        for alpha in [2.0 / 3.0, 0.7, 0.75, 0.9] {
            let pp = PeelParams::from_alpha(alpha).unwrap();
            for p in [2usize, 3, 4, 7, 20, 100, 1000] {
                let mut s = pp.peel_transition(p, Transition::Fresh).unwrap();
                for k in 1..=p - 2 {
                    for side in [Side::Left, Side::Right] {
                        s += pp.peel_transition(p, Transition::Swallow { side, k }).unwrap();
                    }
                }
                assert!((s - 1.0).abs() < 1e-12, "alpha {alpha} p {p}: {s}");
            }
        }
    }

    #[test]
    fn mean_hole_volume_examples() {
        assert_relative_eq!(mean_hole_volume(1, 0.75).unwrap(), 0.2, epsilon = 1e-15);
        assert_relative_eq!(mean_hole_volume(1, 2.0 / 3.0).unwrap(), 1.0 / 3.0, epsilon = 1e-15);
        // 2·3·(1/4) / (2/4 + 1) = 1
        assert_relative_eq!(mean_hole_volume(2, 0.75).unwrap(), 1.0, epsilon = 1e-15);
        assert!(mean_hole_volume(0, 0.75).is_err());
    }

    #[test]
    fn kappa_input_parsing() {
        let k = KappaInput::parse("9/128").unwrap();
        assert_eq!(k.value, 9.0 / 128.0);
        assert!(!k.is_critical());
        assert!(KappaInput::parse("2/27").unwrap().is_critical());
        assert!(matches!(KappaInput::parse("3/40"), Err(Error::InvalidKappa(_))));
        assert!(KappaInput::parse("abc").is_err());
        let pp = PeelParams::from_kappa_input(&KappaInput::parse("2/27").unwrap()).unwrap();
        assert_eq!(pp.drift, 0.0);
    }

    #[test]
    fn json_round_trip() {
        let pp = PeelParams::new(9.0 / 128.0).unwrap();
        let js = pp.to_json().unwrap();
        let back = PeelParams::from_json(&js).unwrap();
        assert_eq!(back.to_json().unwrap(), js);
        assert_eq!(back.digest(), pp.digest());
        let tampered = js.replacen("\"beta\": 0.09375", "\"beta\": 0.1", 1);
        assert!(PeelParams::from_json(&tampered).is_err());
    }
}
