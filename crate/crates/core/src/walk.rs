//! Simple random walk on the lazily peeled map.
//!
//! The walker starts at the target of the root edge (`X_0 = 0`, `X_1 = 1`).
//! While it stands on the boundary of the explored map, the boundary edge
//! leaving its position is peeled; once its position is interior it moves
//! along a uniform outgoing half-edge. Arrivals on the boundary are the
//! pioneer points.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{ball_around, vertex_distances, CanonicalCode, HalfEdge, Triangulation, Vertex};
use crate::params::PeelParams;
use crate::peeling::{Exploration, StepRecord};
use crate::seed::{sub_seed, trial_rng, trial_seed};
use crate::stats::{batch_means, chi_square_two_sample, linear_fit, mean, t_interval, wilson, ChiSquare, Estimate, LinearFit};

/// Default cap on explored vertices for walk runs.
pub const WALK_VERTEX_BUDGET: u64 = 5_000_000;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct WalkTrace {
    /// `X_0, …, X_n`.
    pub positions: Vec<Vertex>,
    /// Half-edge taken at walk step `i` (index 0 is the root edge).
    pub steps: Vec<HalfEdge>,
    /// Whether `X_i` was on the explored boundary on arrival.
    pub pioneer: Vec<bool>,
    /// `f(k)` and `g(k)` over the combined steps `k`.
    pub f: Vec<u64>,
    pub g: Vec<u64>,
    /// Distance from `X_0` to `X_i` inside the final explored map.
    pub d: Vec<u32>,
    /// `#{X_0, …, X_i}`.
    pub range: Vec<u64>,
    /// Whether `X_0` was still on the boundary once `X_i` became interior,
    /// i.e. `X_0 ∈ ∂Hull(X_1, …, X_i)`; index 0 unused.
    pub x0_on_boundary: Vec<bool>,
    pub peel_records: Vec<StepRecord>,
    pub truncated: bool,
    #[serde(skip)]
    pub map: Option<Triangulation>,
}

impl WalkTrace {
    pub fn len(&self) -> usize {
        self.positions.len() - 1
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
    /// Number of pioneer points among `X_1, …, X_n`.
    pub fn pioneer_count(&self) -> usize {
        self.pioneer.iter().filter(|&&p| p).count()
    }
}

struct Walker<'p> {
    ex: Exploration<'p>,
    trace: WalkTrace,
}

fn walk_inner<'p, R: Rng + ?Sized>(params: &'p PeelParams, n_steps: usize, rng: &mut R, budget: u64) -> Result<Walker<'p>> {
    let mut ex = Exploration::new(params).with_vertex_budget(budget);
    let root = ex.map().root();
    let mut t = WalkTrace {
        positions: vec![0, 1],
        steps: vec![root],
        pioneer: vec![false, true],
        f: vec![0],
        g: vec![1],
        d: Vec::new(),
        range: vec![1, 2],
        x0_on_boundary: vec![false],
        peel_records: Vec::new(),
        truncated: false,
        map: None,
    };
    let mut seen = vec![false; 2];
    seen[0] = true;
    seen[1] = true;
    let mut distinct = 2u64;
    let mut x: Vertex = 1;
    let (mut f, mut g) = (0u64, 1u64);
    loop {
        if let Some(a) = ex.map().hole_out(x).filter(|_| ex.on_boundary(x)) {
            match ex.peel(a, rng) {
                Ok(_) => {}
                Err(Error::Budget(_) | Error::PerimeterBeyondTable { .. }) => {
                    t.truncated = true;
                    break;
                }
                Err(e) => return Err(e),
            }
            f += 1;
        } else {
            t.x0_on_boundary.push(ex.on_boundary(0));
            if g as usize == n_steps {
                break;
            }
            let outs: Vec<HalfEdge> = ex.map().out_half_edges(x).collect();
            let h = outs[rng.gen_range(0..outs.len())];
            x = ex.map().target(h);
            g += 1;
            t.positions.push(x);
            t.steps.push(h);
            t.pioneer.push(ex.on_boundary(x));
            if seen.len() < ex.volume() {
                seen.resize(ex.volume(), false);
            }
            if !seen[x as usize] {
                seen[x as usize] = true;
                distinct += 1;
            }
            t.range.push(distinct);
        }
        t.f.push(f);
        t.g.push(g);
    }
    t.d = t.positions.iter().map(|&v| ex.dist(v)).collect();
    t.peel_records = ex.trace().to_vec();
    Ok(Walker { ex, trace: t })
}

/// Runs the walk for `n_steps` walk steps, peeling as needed.
///
/// A budget overrun returns the trace so far with `truncated` set.
pub fn run_walk_peeling<R: Rng + ?Sized>(params: &PeelParams, n_steps: usize, rng: &mut R, vertex_budget: u64) -> Result<WalkTrace> {
    if n_steps < 1 {
        return Err(Error::Domain("walk needs at least one step".into()));
    }
    let w = walk_inner(params, n_steps, rng, vertex_budget)?;
    let mut t = w.trace;
    t.map = Some(w.ex.into_map());
    Ok(t)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedEstimate {
    /// Least-squares slope of `d(n)` over the second half.
    pub slope: f64,
    pub fit: LinearFit,
    /// Batch-means interval for the mean increment over the second half.
    pub increment: Estimate,
}

/// Speed of the hull distance, fitted over the second half of the trace.
pub fn speed_estimate(trace: &WalkTrace, level: f64) -> Result<SpeedEstimate> {
    let n = trace.len();
    if n < 1000 {
        return Err(Error::TooShort(format!("walk of {n} steps, need 1000")));
    }
    let lo = n / 2;
    let xs: Vec<f64> = (lo..=n).map(|i| i as f64).collect();
    let ys: Vec<f64> = (lo..=n).map(|i| trace.d[i] as f64).collect();
    let fit = linear_fit(&xs, &ys)?;
    let inc: Vec<f64> = (lo..n).map(|i| trace.d[i + 1] as f64 - trace.d[i] as f64).collect();
    let increment = batch_means(&inc, 20, level)?;
    Ok(SpeedEstimate { slope: fit.slope, fit, increment })
}

/// Slope of the range over the whole trace, with a batch-means interval.
pub fn range_growth(trace: &WalkTrace, level: f64) -> Result<Estimate> {
    let n = trace.len();
    let inc: Vec<f64> = (0..n).map(|i| (trace.range[i + 1] - trace.range[i]) as f64).collect();
    batch_means(&inc, 20.min(n.max(2)), level)
}

/// Peels around `center` until every vertex within explored distance
/// `r − 1` of it is interior; returns the explored distances from `center`.
pub fn peel_ball<R: Rng + ?Sized>(ex: &mut Exploration<'_>, center: Vertex, r: u32, rng: &mut R) -> Result<Vec<u32>> {
    loop {
        let dist = vertex_distances(ex.map(), center);
        let pick = ex
            .map()
            .boundary()
            .into_iter()
            .filter(|&h| dist[ex.map().origin(h) as usize] < r)
            .min_by_key(|&h| (dist[ex.map().origin(h) as usize], h));
        match pick {
            Some(h) => {
                ex.peel(h, rng)?;
            }
            None => return Ok(dist),
        }
    }
}

/// Peels around vertex 0 until the boundary is at distance at least `r`,
/// using the incrementally maintained distances.
fn peel_to_radius<R: Rng + ?Sized>(ex: &mut Exploration<'_>, r: u32, rng: &mut R) -> Result<()> {
    let mut hint: Option<HalfEdge> = None;
    while ex.min_boundary_distance() < r {
        let m = ex.min_boundary_distance();
        let map = ex.map();
        let e = match hint.filter(|&h| map.is_hole(h) && ex.dist(map.origin(h)) == m) {
            Some(h) => h,
            None => map
                .boundary()
                .into_iter()
                .find(|&h| ex.dist(map.origin(h)) == m)
                .ok_or_else(|| Error::Invariant("no boundary edge at minimum distance".into()))?,
        };
        let out = ex.peel(e, rng)?;
        hint = Some(out.rightmost);
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    /// Walk moments with hull distance at most `r0`.
    pub checked: u64,
    /// Moments where the certified distance is smaller.
    pub discrepancies: u64,
}

impl AuditReport {
    pub fn rate(&self) -> f64 {
        if self.checked == 0 {
            0.0
        } else {
            self.discrepancies as f64 / self.checked as f64
        }
    }
    pub fn merge(self, o: AuditReport) -> AuditReport {
        AuditReport { checked: self.checked + o.checked, discrepancies: self.discrepancies + o.discrepancies }
    }
}

/// A walk followed by an exact check of its small hull distances.
///
/// After the walk, the same exploration is continued by nearest-edge peeling
/// until no boundary vertex is closer than `r0` to `X_0`; explored distances
/// up to `r0` are then exact graph distances.
pub fn walk_with_audit<R: Rng + ?Sized>(
    params: &PeelParams,
    n_steps: usize,
    r0: u32,
    rng: &mut R,
    vertex_budget: u64,
) -> Result<(WalkTrace, AuditReport)> {
    let Walker { mut ex, mut trace } = walk_inner(params, n_steps, rng, vertex_budget)?;
    let mut report = AuditReport::default();
    if !trace.truncated {
        peel_to_radius(&mut ex, r0, rng)?;
        for (&v, &hd) in trace.positions.iter().zip(&trace.d) {
            if hd <= r0 {
                report.checked += 1;
                if ex.dist(v) != hd {
                    report.discrepancies += 1;
                }
            }
        }
    }
    trace.map = Some(ex.into_map());
    Ok((trace, report))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub n: usize,
    pub estimate: Estimate,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntersectionReport {
    pub checkpoints: Vec<Checkpoint>,
    pub trials: u64,
    pub discarded: u64,
    pub seeds: Vec<u64>,
}

/// Frequency of `X_0 ∈ ∂Hull(X_1, …, X_n)` at each checkpoint `n`.
pub fn intersection_experiment(
    params: &PeelParams,
    checkpoints: &[usize],
    trials: u64,
    master_seed: u64,
    level: f64,
) -> Result<IntersectionReport> {
    let n_max = *checkpoints.iter().max().ok_or_else(|| Error::Domain("no checkpoints".into()))?;
    let runs: Vec<Result<Option<Vec<bool>>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let t = run_walk_peeling(params, n_max, &mut rng, WALK_VERTEX_BUDGET)?;
            if t.truncated {
                return Ok(None);
            }
            Ok(Some(checkpoints.iter().map(|&n| t.x0_on_boundary[n]).collect()))
        })
        .collect();
    let mut hits = vec![0u64; checkpoints.len()];
    let (mut kept, mut discarded) = (0u64, 0u64);
    for r in runs {
        match r? {
            Some(v) => {
                kept += 1;
                for (h, b) in hits.iter_mut().zip(v) {
                    *h += b as u64;
                }
            }
            None => discarded += 1,
        }
    }
    let checkpoints = checkpoints.iter().zip(&hits).map(|(&n, &h)| Checkpoint { n, estimate: wilson(h, kept, level) }).collect();
    Ok(IntersectionReport {
        checkpoints,
        trials: kept,
        discarded,
        seeds: (0..trials).map(|i| trial_seed(master_seed, i)).collect(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InvDegreeReport {
    pub estimate: Estimate,
    pub trials: u64,
    /// Trials dropped because a budget or table limit was hit.
    pub discarded: u64,
    pub mean_degree: f64,
}

/// Degree of the root vertex, revealed by layered peeling.
pub fn root_degree<R: Rng + ?Sized>(params: &PeelParams, rng: &mut R, vertex_budget: u64) -> Result<usize> {
    let mut ex = Exploration::new(params).with_vertex_budget(vertex_budget).without_trace();
    let mut sel = crate::peeling::LayersSelector;
    while ex.on_boundary(0) {
        let e = crate::peeling::EdgeSelector::select(&mut sel, &ex)?;
        ex.peel(e, rng)?;
    }
    Ok(ex.map().degree(0))
}

/// Mean of `1/deg` of the root vertex over independent maps.
pub fn estimate_inv_degree(params: &PeelParams, trials: u64, master_seed: u64, level: f64, vertex_budget: u64) -> Result<InvDegreeReport> {
    let runs: Vec<Result<Option<usize>>> = (0..trials)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            match root_degree(params, &mut rng, vertex_budget) {
                Ok(d) => Ok(Some(d)),
                Err(Error::Budget(_) | Error::PerimeterBeyondTable { .. }) => Ok(None),
                Err(e) => Err(e),
            }
        })
        .collect();
    let mut inv = Vec::with_capacity(trials as usize);
    let mut degs = 0.0;
    let mut discarded = 0;
    for r in runs {
        match r? {
            Some(d) => {
                inv.push(1.0 / d as f64);
                degs += d as f64;
            }
            None => discarded += 1,
        }
    }
    let n = inv.len();
    Ok(InvDegreeReport { estimate: t_interval(&inv, level)?, trials: n as u64, discarded, mean_degree: degs / n as f64 })
}

/// Which rooted ball a stationarity sample looks at.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BallView {
    /// Around the root edge `E_0`.
    Root,
    /// Around the reversed root edge.
    Reversed,
    /// Around the walk edge `E_k = (X_k, X_{k+1})`.
    WalkStep(usize),
}

/// Canonical code of the radius-`r` ball seen from `view`, in one sample.
pub fn ball_code<R: Rng + ?Sized>(params: &PeelParams, view: BallView, r: u32, rng: &mut R, vertex_budget: u64) -> Result<CanonicalCode> {
    let (mut ex, root) = match view {
        BallView::Root | BallView::Reversed => {
            let ex = Exploration::new(params).with_vertex_budget(vertex_budget).without_trace();
            let root = ex.map().root();
            let root = if view == BallView::Reversed { ex.map().twin(root) } else { root };
            (ex, root)
        }
        BallView::WalkStep(k) => {
            let w = walk_inner(params, k + 1, rng, vertex_budget)?;
            if w.trace.truncated {
                return Err(Error::Budget("walk hit the vertex budget".into()));
            }
            let h = w.trace.steps[k];
            (w.ex, h)
        }
    };
    let center = ex.map().origin(root);
    peel_ball(&mut ex, center, r, rng)?;
    Ok(crate::map::canonical_encoding(&ball_around(ex.map(), root, r as usize)?.map))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub radius: u32,
    pub view: BallView,
    pub test: ChiSquare,
    pub trials: u64,
    pub distinct_root_balls: usize,
}

/// Compares the law of the rooted ball around `E_0` with the one seen from
/// `view`, over two independent ensembles of `trials` maps.
pub fn stationarity_test(params: &PeelParams, view: BallView, r: u32, trials: u64, master_seed: u64) -> Result<StationarityReport> {
    let sample = |v: BallView, stream: u64| -> Result<HashMap<u128, u64>> {
        let codes: Vec<Result<u128>> = (0..trials)
            .into_par_iter()
            .map(|i| {
                let mut rng = ChaCha8Rng::seed_from_u64(sub_seed(trial_seed(master_seed, i), stream));
                Ok(ball_code(params, v, r, &mut rng, WALK_VERTEX_BUDGET)?.digest128())
            })
            .collect();
        let mut m = HashMap::new();
        for c in codes {
            *m.entry(c?).or_insert(0) += 1;
        }
        Ok(m)
    };
    let a = sample(BallView::Root, 0)?;
    let b = sample(view, 1)?;
    let test = chi_square_two_sample(&a, &b)?;
    Ok(StationarityReport { radius: r, view, test, trials, distinct_root_balls: a.len() })
}

/// Speeds of several independent walks, with an interval on their mean.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpeedReport {
    pub per_walk: Vec<f64>,
    pub estimate: Estimate,
    /// Fit of the mean displacement curve over the whole horizon.
    pub mean_curve_fit: LinearFit,
    pub range_slope: f64,
    pub audit: AuditReport,
    pub truncated: u64,
    pub seeds: Vec<u64>,
}

pub fn speed_experiment(params: &PeelParams, n_steps: usize, walks: u64, audit_radius: u32, master_seed: u64, level: f64) -> Result<SpeedReport> {
    let runs: Vec<Result<(WalkTrace, AuditReport)>> = (0..walks)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let (mut t, a) = walk_with_audit(params, n_steps, audit_radius, &mut rng, WALK_VERTEX_BUDGET)?;
            t.map = None;
            t.peel_records = Vec::new();
            Ok((t, a))
        })
        .collect();
    let mut traces = Vec::new();
    let mut audit = AuditReport::default();
    let mut truncated = 0;
    for r in runs {
        let (t, a) = r?;
        if t.truncated {
            truncated += 1;
            continue;
        }
        audit = audit.merge(a);
        traces.push(t);
    }
    if traces.len() < 2 {
        return Err(Error::Budget("fewer than two walks completed".into()));
    }
    let per_walk: Vec<f64> = traces.iter().map(|t| t.d[n_steps] as f64 / n_steps as f64).collect();
    let estimate = t_interval(&per_walk, level)?;
    let grid: Vec<usize> = (0..=n_steps).step_by((n_steps / 100).max(1)).collect();
    let xs: Vec<f64> = grid.iter().map(|&i| i as f64).collect();
    let ys: Vec<f64> = grid.iter().map(|&i| mean(&traces.iter().map(|t| t.d[i] as f64).collect::<Vec<_>>())).collect();
    let mean_curve_fit = linear_fit(&xs, &ys)?;
    let range_slope = mean(&traces.iter().map(|t| t.range[n_steps] as f64 / n_steps as f64).collect::<Vec<_>>());
    Ok(SpeedReport {
        per_walk,
        estimate,
        mean_curve_fit,
        range_slope,
        audit,
        truncated,
        seeds: (0..walks).map(|i| trial_seed(master_seed, i)).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> PeelParams {
        PeelParams::new(9.0 / 128.0).unwrap()
    }

    #[test]
    fn counters_and_pioneers() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let t = run_walk_peeling(&pp, 500, &mut rng, 1_000_000).unwrap();
        assert!(!t.truncated);
        assert_eq!(t.len(), 500);
        assert!(t.pioneer[1]);
        for k in 0..t.f.len() {
            assert_eq!(t.f[k] + t.g[k], k as u64 + 1);
            if k > 0 {
                assert!(t.f[k] >= t.f[k - 1] && t.g[k] >= t.g[k - 1]);
            }
        }
        // Pioneer arrivals are exactly the arrivals followed by a peel.
        let mut arrivals_followed_by_peel = vec![false; t.positions.len()];
        for k in 1..t.f.len() {
            if t.f[k] > t.f[k - 1] {
                arrivals_followed_by_peel[t.g[k - 1] as usize] = true;
            }
        }
        assert_eq!(&arrivals_followed_by_peel[1..], &t.pioneer[1..]);
        for i in 1..t.d.len() {
            assert!(t.d[i] as usize <= i);
            assert!(t.d[i].abs_diff(t.d[i - 1]) <= 1);
        }
        t.map.as_ref().unwrap().validate().unwrap();
    }

    #[test]
    fn x0_flags_non_increasing() {
        let pp = params();
        for s in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let t = run_walk_peeling(&pp, 300, &mut rng, 1_000_000).unwrap();
            for w in t.x0_on_boundary[1..].windows(2) {
                assert!(w[0] || !w[1]);
            }
        }
    }

    #[test]
    fn speed_needs_long_trace() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let t = run_walk_peeling(&pp, 50, &mut rng, 1_000_000).unwrap();
        assert!(matches!(speed_estimate(&t, 0.99), Err(Error::TooShort(_))));
    }

    #[test]
    fn degree_at_least_two() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            assert!(root_degree(&pp, &mut rng, 1_000_000).unwrap() >= 2);
        }
    }
}
