//! The peeling engine.
//!
//! An [`Exploration`] holds the explored map `T_n` (a triangulation with one
//! hole standing for the unexplored part), distances from the root vertex
//! inside `T_n`, and the event log. Each step reveals the triangle behind a
//! boundary edge chosen by an [`EdgeSelector`], with the law
//! `q_{1,p} = α C̃_{p+1}/C̃_p` (fresh vertex) and `½ q_{-k} C̃_{p-k}/C̃_p`
//! (swallow `k` edges on either side); swallowed regions are filled with
//! independent Boltzmann triangulations.

mod export;
mod sweep;

pub use export::{read_hull_csv, read_trace_csv, write_hull_csv, write_trace_csv, HULL_SCHEMA, TRACE_SCHEMA};
pub use sweep::{sweep_layers, LayerSweep};

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::boltzmann::{fill_hole, sample_boltzmann_volume};
use crate::error::{Error, Result};
use crate::map::{HalfEdge, Triangulation, Vertex, NIL};
use crate::params::{PeelParams, Side, Transition};

/// Default cap on explored vertices.
pub const DEFAULT_VERTEX_BUDGET: u64 = 20_000_000;

/// One peeling step.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// 1-based step index `n`.
    pub step: u64,
    /// Peeled half-edge id.
    pub edge: HalfEdge,
    pub transition: Transition,
    pub delta_p: i64,
    pub delta_v: u64,
    /// Seed of the filler's generator (0 for fresh steps).
    pub filler_seed: u64,
    /// `P_n` after the step.
    pub perimeter: u64,
    /// `V_n` after the step.
    pub volume: u64,
}

/// What a step did, plus the edge the layers rule would peel next.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub record: StepRecord,
    /// Right-most boundary edge of the revealed triangle.
    pub rightmost: HalfEdge,
    /// Third vertex of the revealed triangle.
    pub apex: Vertex,
}

/// The event log of a run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PeelTrace {
    pub seed: Option<u64>,
    pub params_digest: String,
    pub records: Vec<StepRecord>,
}

/// Explored map with incremental distances from the root vertex.
#[derive(Clone)]
pub struct Exploration<'p> {
    params: &'p PeelParams,
    map: Triangulation,
    dist: Vec<u32>,
    on_boundary: Vec<bool>,
    /// Distance under which a boundary vertex is counted in `hist`.
    counted: Vec<u32>,
    hist: Vec<u64>,
    steps: u64,
    vertex_budget: u64,
    keep_trace: bool,
    trace: Vec<StepRecord>,
    last: Option<StepOutcome>,
    scratch: VecDeque<Vertex>,
    changed: Vec<Vertex>,
}

impl<'p> Exploration<'p> {
    /// Starts from the root edge `0 → 1`, seen as a 2-gon.
    pub fn new(params: &'p PeelParams) -> Self {
        let map = Triangulation::root_two_gon();
        let mut ex = Exploration {
            params,
            map,
            dist: vec![0, 1],
            on_boundary: vec![true, true],
            counted: vec![NIL, NIL],
            hist: Vec::new(),
            steps: 0,
            vertex_budget: DEFAULT_VERTEX_BUDGET,
            keep_trace: true,
            trace: Vec::new(),
            last: None,
            scratch: VecDeque::new(),
            changed: Vec::new(),
        };
        ex.recount(0);
        ex.recount(1);
        ex
    }

    pub fn with_vertex_budget(mut self, budget: u64) -> Self {
        self.vertex_budget = budget;
        self
    }

    /// Drop per-step records (keeps memory flat on long runs).
    pub fn without_trace(mut self) -> Self {
        self.keep_trace = false;
        self
    }

    pub fn params(&self) -> &'p PeelParams {
        self.params
    }
    pub fn map(&self) -> &Triangulation {
        &self.map
    }
    pub fn into_map(self) -> Triangulation {
        self.map
    }
    pub fn steps(&self) -> u64 {
        self.steps
    }
    pub fn perimeter(&self) -> usize {
        self.map.perimeter()
    }
    pub fn volume(&self) -> usize {
        self.map.vertex_count()
    }
    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }
    pub fn last(&self) -> Option<&StepOutcome> {
        self.last.as_ref()
    }
    /// Distance from vertex 0 inside the explored map.
    pub fn dist(&self, v: Vertex) -> u32 {
        self.dist[v as usize]
    }
    pub fn distances(&self) -> &[u32] {
        &self.dist
    }
    pub fn on_boundary(&self, v: Vertex) -> bool {
        self.on_boundary[v as usize]
    }
    /// Smallest distance of a boundary vertex to the root vertex.
    pub fn min_boundary_distance(&self) -> u32 {
        self.hist.iter().position(|&c| c > 0).map_or(u32::MAX, |d| d as u32)
    }
    /// Boundary vertex count at each distance.
    pub fn boundary_histogram(&self) -> &[u64] {
        &self.hist
    }

    fn recount(&mut self, v: Vertex) {
        let i = v as usize;
        let want = if self.on_boundary[i] { self.dist[i] } else { NIL };
        let had = self.counted[i];
        if want == had {
            return;
        }
        if had != NIL {
            self.hist[had as usize] -= 1;
        }
        if want != NIL {
            let w = want as usize;
            if self.hist.len() <= w {
                self.hist.resize(w + 1, 0);
            }
            self.hist[w] += 1;
        }
        self.counted[i] = want;
    }

    fn grow(&mut self) {
        let n = self.map.vertex_count();
        self.dist.resize(n, NIL);
        self.on_boundary.resize(n, false);
        self.counted.resize(n, NIL);
    }

    /// Decrease-only relaxation from `seeds`; collects changed vertices.
    fn relax(&mut self, seeds: &[Vertex]) {
        self.changed.clear();
        self.scratch.clear();
        for &s in seeds {
            if self.dist[s as usize] != NIL {
                self.scratch.push_back(s);
            }
        }
        while let Some(x) = self.scratch.pop_front() {
            let dx = self.dist[x as usize] + 1;
            for y in self.map.neighbors(x) {
                if self.dist[y as usize] > dx {
                    self.dist[y as usize] = dx;
                    self.changed.push(y);
                    self.scratch.push_back(y);
                }
            }
        }
    }

    /// Peels `edge`, drawing the event from the peeling law.
    pub fn peel<R: Rng + ?Sized>(&mut self, edge: HalfEdge, rng: &mut R) -> Result<StepOutcome> {
        if !self.map.is_hole(edge) || Some(self.map.face(edge)) != self.map.outer_hole() {
            return Err(Error::Misuse(format!("half-edge {edge} is not on the boundary")));
        }
        let p = self.map.perimeter();
        let t = self.params.sample_transition(p, rng)?;
        let seed = match t {
            Transition::Fresh => 0,
            Transition::Swallow { .. } => rng.next_u64(),
        };
        self.apply(edge, t, seed)
    }

    /// Applies a known event; used by [`Exploration::peel`] and by replay.
    pub fn apply(&mut self, edge: HalfEdge, t: Transition, filler_seed: u64) -> Result<StepOutcome> {
        if !self.map.is_hole(edge) || Some(self.map.face(edge)) != self.map.outer_hole() {
            return Err(Error::Misuse(format!("half-edge {edge} is not on the boundary")));
        }
        let u = self.map.origin(edge);
        let v = self.map.target(edge);
        let v_before = self.map.vertex_count() as u64;
        let p_before = self.map.perimeter() as i64;
        let (rightmost, apex, delta_v, seeds) = match t {
            Transition::Fresh => {
                if v_before + 1 > self.vertex_budget {
                    return Err(Error::Budget(format!("explored map exceeds {} vertices", self.vertex_budget)));
                }
                let info = self.map.attach_fresh(edge)?;
                self.grow();
                self.on_boundary[info.vertex as usize] = true;
                (info.right, info.vertex, 1u64, vec![u, v])
            }
            Transition::Swallow { side, k } => {
                let room = self.vertex_budget.saturating_sub(v_before);
                // Count-only dry run first, so a budget overrun leaves the map untouched.
                sample_boltzmann_volume(k + 1, self.params, &mut ChaCha8Rng::seed_from_u64(filler_seed), room)?;
                let info = self.map.swallow_open(edge, side, k)?;
                let mut rng = ChaCha8Rng::seed_from_u64(filler_seed);
                let n = fill_hole(&mut self.map, info.enclosed, self.params, &mut rng, room)?;
                self.grow();
                for &r in &info.removed {
                    self.on_boundary[r as usize] = false;
                }
                let mut seeds = info.removed.clone();
                seeds.push(u);
                seeds.push(v);
                seeds.push(info.apex);
                (info.outer, info.apex, n, seeds)
            }
        };
        self.relax(&seeds);
        let changed = std::mem::take(&mut self.changed);
        for &x in changed.iter().chain(seeds.iter()) {
            self.recount(x);
        }
        self.recount(apex);
        self.changed = changed;
        self.steps += 1;
        let record = StepRecord {
            step: self.steps,
            edge,
            transition: t,
            delta_p: self.map.perimeter() as i64 - p_before,
            delta_v,
            filler_seed,
            perimeter: self.map.perimeter() as u64,
            volume: self.map.vertex_count() as u64,
        };
        if self.keep_trace {
            self.trace.push(record);
        }
        let out = StepOutcome { record, rightmost, apex };
        self.last = Some(out);
        Ok(out)
    }

    /// Runs `n_steps` steps with `selector`.
    pub fn run<S: EdgeSelector + ?Sized, R: Rng + ?Sized>(&mut self, selector: &mut S, n_steps: u64, rng: &mut R) -> Result<()> {
        for _ in 0..n_steps {
            let e = selector.select(self)?;
            self.peel(e, rng)?;
        }
        Ok(())
    }

    pub fn peel_trace(&self, seed: Option<u64>) -> PeelTrace {
        PeelTrace { seed, params_digest: self.params.digest(), records: self.trace.clone() }
    }
}

/// Chooses the next boundary edge from the explored map only.
pub trait EdgeSelector {
    fn select(&mut self, ex: &Exploration<'_>) -> Result<HalfEdge>;
}

/// The layers algorithm: the two sides of the root edge first, then always
/// the right-most boundary edge of the triangle just revealed.
#[derive(Clone, Debug, Default)]
pub struct LayersSelector;

impl EdgeSelector for LayersSelector {
    fn select(&mut self, ex: &Exploration<'_>) -> Result<HalfEdge> {
        let root = ex.map().root();
        Ok(match ex.steps() {
            0 => root,
            1 => ex.map().twin(root),
            _ => ex.last().expect("a step was made").rightmost,
        })
    }
}

/// A uniformly random boundary edge, from private randomness.
#[derive(Clone, Debug)]
pub struct UniformSelector {
    rng: ChaCha8Rng,
}

impl UniformSelector {
    pub fn new(seed: u64) -> Self {
        UniformSelector { rng: ChaCha8Rng::seed_from_u64(seed) }
    }
}

impl EdgeSelector for UniformSelector {
    fn select(&mut self, ex: &Exploration<'_>) -> Result<HalfEdge> {
        let b = ex.map().boundary();
        Ok(b[self.rng.gen_range(0..b.len())])
    }
}

/// A boundary edge whose origin is closest to the root vertex.
#[derive(Clone, Debug, Default)]
pub struct NearestSelector;

impl EdgeSelector for NearestSelector {
    fn select(&mut self, ex: &Exploration<'_>) -> Result<HalfEdge> {
        let m = ex.map();
        m.boundary()
            .into_iter()
            .min_by_key(|&h| (ex.dist(m.origin(h)), h))
            .ok_or_else(|| Error::Invariant("empty boundary".into()))
    }
}

/// Wraps a closure as a selector.
pub struct FnSelector<F>(pub F);

impl<F: FnMut(&Exploration<'_>) -> Result<HalfEdge>> EdgeSelector for FnSelector<F> {
    fn select(&mut self, ex: &Exploration<'_>) -> Result<HalfEdge> {
        (self.0)(ex)
    }
}

/// `n_steps` peeling steps under `selector`.
pub fn run_algorithm<'p, S: EdgeSelector + ?Sized, R: Rng + ?Sized>(
    params: &'p PeelParams,
    selector: &mut S,
    n_steps: u64,
    rng: &mut R,
) -> Result<Exploration<'p>> {
    let mut ex = Exploration::new(params);
    ex.run(selector, n_steps, rng)?;
    Ok(ex)
}

/// `(r, τ_r, |∂B̄_r|, |B̄_r|)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HullRecord {
    pub r: u32,
    pub tau: u64,
    pub perimeter: u64,
    pub volume: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HullSeries {
    pub records: Vec<HullRecord>,
    /// Set when a budget stopped the run before `r_max`.
    pub truncated: bool,
}

impl HullSeries {
    pub fn get(&self, r: u32) -> Option<&HullRecord> {
        self.records.iter().find(|h| h.r == r)
    }
}

/// Output of [`run_layers`].
pub struct LayersRun<'p> {
    pub exploration: Exploration<'p>,
    pub hulls: HullSeries,
    /// The error that stopped the run early, if any.
    pub stopped_by: Option<Error>,
}

/// Layered peeling until the hull of radius `r_max` is complete.
///
/// `τ_r` is the first step at which every boundary vertex is at distance at
/// least `r` from the root vertex; at that time the explored map is `B̄_r`.
/// A budget overrun returns the partial series with `truncated` set.
pub fn run_layers<'p, R: Rng + ?Sized>(params: &'p PeelParams, r_max: u32, rng: &mut R, vertex_budget: u64) -> Result<LayersRun<'p>> {
    if r_max < 1 {
        return Err(Error::Domain("r_max must be >= 1".into()));
    }
    let mut ex = Exploration::new(params).with_vertex_budget(vertex_budget);
    let mut sel = LayersSelector;
    let mut hulls = HullSeries::default();
    let mut next_r = 1u32;
    let mut stopped_by = None;
    while next_r <= r_max {
        let e = sel.select(&ex)?;
        match ex.peel(e, rng) {
            Ok(_) => {}
            Err(err @ (Error::Budget(_) | Error::PerimeterBeyondTable { .. })) => {
                hulls.truncated = true;
                stopped_by = Some(err);
                break;
            }
            Err(err) => return Err(err),
        }
        while next_r <= r_max && ex.min_boundary_distance() >= next_r {
            hulls.records.push(HullRecord {
                r: next_r,
                tau: ex.steps(),
                perimeter: ex.perimeter() as u64,
                volume: ex.volume() as u64,
            });
            next_r += 1;
        }
    }
    Ok(LayersRun { exploration: ex, hulls, stopped_by })
}

/// Rescaled hull perimeters `((α−δ)/(α+δ))^r |∂B̄_r|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PiEstimate {
    pub rescaled: Vec<f64>,
    /// Last rescaled value.
    pub estimate: f64,
    /// Successive ratios minus one; tends to 0.
    pub ratio_gaps: Vec<f64>,
}

pub fn estimate_pi_kappa(series: &HullSeries, params: &PeelParams) -> Result<PiEstimate> {
    if series.records.len() < 5 {
        return Err(Error::TooShort(format!("hull series has {} records, need 5", series.records.len())));
    }
    let c = (params.alpha - params.drift) / (params.alpha + params.drift);
    let rescaled: Vec<f64> = series.records.iter().map(|h| c.powi(h.r as i32) * h.perimeter as f64).collect();
    let ratio_gaps = rescaled.windows(2).map(|w| w[1] / w[0] - 1.0).collect();
    Ok(PiEstimate { estimate: *rescaled.last().unwrap(), rescaled, ratio_gaps })
}

/// The free walks `(Ξ_n, Ω_n)`: i.i.d. `q`-steps from 2, and a volume walk
/// gaining 1 on `+1` steps and the volume of an independent Boltzmann
/// `(k+1)`-gon on `−k` steps.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct FreeWalk {
    pub xi: Vec<i64>,
    pub omega: Vec<u64>,
}

pub fn simulate_unconditioned<R: Rng + ?Sized>(params: &PeelParams, n_steps: usize, rng: &mut R) -> Result<FreeWalk> {
    let mut w = FreeWalk { xi: Vec::with_capacity(n_steps + 1), omega: Vec::with_capacity(n_steps + 1) };
    let (mut x, mut o) = (2i64, 2u64);
    w.xi.push(x);
    w.omega.push(o);
    for _ in 0..n_steps {
        let s = params.sample_free_step(rng);
        x += s;
        o += if s == 1 {
            1
        } else {
            sample_boltzmann_volume((-s) as usize + 1, params, rng, crate::boltzmann::DEFAULT_VOLUME_BUDGET)?
        };
        w.xi.push(x);
        w.omega.push(o);
    }
    Ok(w)
}

/// `Ξ_n` for a free walk started at 2 and kept only if it stays `≥ 2` for
/// `n + horizon` steps; `None` on rejection.
///
/// With positive drift the chance of a later dip below 2 decays
/// exponentially in the horizon, so a few hundred extra steps make this an
/// exact sampler of the walk conditioned to stay `≥ 2` forever, to double
/// precision.
pub fn rejection_sample_xi<R: Rng + ?Sized>(params: &PeelParams, n: usize, horizon: usize, rng: &mut R) -> Option<i64> {
    let mut x = 2i64;
    let mut at_n = 2;
    for i in 1..=n + horizon {
        x += params.sample_free_step(rng);
        if x < 2 {
            return None;
        }
        if i == n {
            at_n = x;
        }
    }
    Some(at_n)
}

/// Rebuilds the explored map from a trace.
pub fn replay(params: &PeelParams, records: &[StepRecord]) -> Result<Triangulation> {
    let mut ex = Exploration::new(params).without_trace().with_vertex_budget(u64::MAX);
    for r in records {
        let out = ex.apply(r.edge, r.transition, r.filler_seed)?;
        if out.record.perimeter != r.perimeter || out.record.volume != r.volume {
            return Err(Error::Invariant(format!("replay diverged at step {}", r.step)));
        }
    }
    Ok(ex.into_map())
}

/// Side of a swallow as a signed code: negative left, positive right.
pub fn signed_code(t: Transition) -> i64 {
    match t {
        Transition::Fresh => 1,
        Transition::Swallow { side: Side::Left, k } => -(k as i64),
        Transition::Swallow { side: Side::Right, k } => k as i64 + 1_000_000,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::map::{canonical_encoding, hull, vertex_distances};

    fn params() -> PeelParams {
        PeelParams::new(9.0 / 128.0).unwrap()
    }

    #[test]
    fn first_step_is_fresh() {
        let pp = params();
        for s in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(s);
            let ex = run_algorithm(&pp, &mut LayersSelector, 1, &mut rng).unwrap();
            assert_eq!(ex.trace()[0].transition, Transition::Fresh);
            assert_eq!(ex.perimeter(), 3);
        }
    }

    #[test]
    fn incremental_distances_match_bfs() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut sel = UniformSelector::new(8);
        let mut ex = Exploration::new(&pp);
        for _ in 0..300 {
            let e = sel.select(&ex).unwrap();
            ex.peel(e, &mut rng).unwrap();
            assert!(ex.perimeter() >= 2);
        }
        let bfs = vertex_distances(ex.map(), 0);
        assert_eq!(ex.distances(), &bfs[..]);
        let bmin = ex.map().boundary().iter().map(|&h| bfs[ex.map().origin(h) as usize]).min().unwrap();
        assert_eq!(ex.min_boundary_distance(), bmin);
        ex.map().validate().unwrap();
    }

    #[test]
    fn budget_overrun_keeps_map_valid() {
        let pp = PeelParams::from_alpha(0.7).unwrap();
        for seed in 0..20 {
            let run = run_layers(&pp, 30, &mut ChaCha8Rng::seed_from_u64(seed), 200).unwrap();
            assert!(run.hulls.truncated);
            run.exploration.map().validate().unwrap();
            assert!(run.exploration.volume() <= 200);
        }
    }

    #[test]
    fn replay_is_exact() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let ex = run_algorithm(&pp, &mut UniformSelector::new(3), 200, &mut rng).unwrap();
        let back = replay(&pp, ex.trace()).unwrap();
        assert_eq!(canonical_encoding(&back), canonical_encoding(ex.map()));
    }

    #[test]
    fn hulls_match_explored_map_at_tau() {
        let pp = PeelParams::from_alpha(0.75).unwrap();
        for seed in 0..5 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let run = run_layers(&pp, 3, &mut rng, 1_000_000).unwrap();
            let recs = &run.hulls.records;
            assert_eq!(recs.len(), 3);
            let final_map = run.exploration.map();
            for h in recs {
                let prefix = &run.exploration.trace()[..h.tau as usize];
                let at_tau = replay(&pp, prefix).unwrap();
                let cut = hull(final_map, h.r as usize).unwrap();
                assert_eq!(canonical_encoding(&cut.map), canonical_encoding(&at_tau), "seed {seed} r {}", h.r);
            }
        }
    }

    #[test]
    fn non_boundary_edge_is_misuse() {
        let pp = params();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut ex = Exploration::new(&pp);
        ex.peel(0, &mut rng).unwrap();
        assert!(matches!(ex.peel(0, &mut rng), Err(Error::Misuse(_))));
    }

    #[test]
    fn pi_estimate_needs_five_layers() {
        let pp = params();
        let s = HullSeries::default();
        assert!(matches!(estimate_pi_kappa(&s, &pp), Err(Error::TooShort(_))));
    }
}
