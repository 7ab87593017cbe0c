//! Layered peeling without the map.
//!
//! Under the layers rule the next edge is always adjacent to the previous
//! one, so the boundary can be kept as a deque of vertex distances: the
//! peeled edge runs from the back vertex to the front vertex. Fillers are
//! sampled for their volume only. Random draws are made in exactly the same
//! order as [`super::Exploration::peel`], so a seed gives the same run as
//! [`super::run_layers`], at a fraction of the memory.

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{HullRecord, HullSeries};
use crate::boltzmann::sample_boltzmann_volume;
use crate::error::{Error, Result};
use crate::params::{PeelParams, Side, Transition};

pub struct LayerSweep<'p> {
    params: &'p PeelParams,
    dist: VecDeque<u32>,
    hist: Vec<u64>,
    steps: u64,
    volume: u64,
    vertex_budget: u64,
}

impl<'p> LayerSweep<'p> {
    pub fn new(params: &'p PeelParams, vertex_budget: u64) -> Self {
        let mut s = LayerSweep { params, dist: VecDeque::from([1, 0]), hist: Vec::new(), steps: 0, volume: 2, vertex_budget };
        s.count(0, 1);
        s.count(1, 1);
        s
    }

    fn count(&mut self, d: u32, add: i64) {
        let d = d as usize;
        if self.hist.len() <= d {
            self.hist.resize(d + 1, 0);
        }
        self.hist[d] = (self.hist[d] as i64 + add) as u64;
    }

    pub fn steps(&self) -> u64 {
        self.steps
    }
    pub fn perimeter(&self) -> usize {
        self.dist.len()
    }
    pub fn volume(&self) -> u64 {
        self.volume
    }
    pub fn min_boundary_distance(&self) -> u32 {
        self.hist.iter().position(|&c| c > 0).map_or(u32::MAX, |d| d as u32)
    }

    fn set(&mut self, i: usize, d: u32) {
        let old = self.dist[i];
        self.count(old, -1);
        self.count(d, 1);
        self.dist[i] = d;
    }

    /// Relaxes along the boundary starting from positions `i` and `j`.
    fn relax_from(&mut self, seeds: [usize; 2]) {
        let n = self.dist.len();
        let mut stack: Vec<usize> = seeds.to_vec();
        while let Some(i) = stack.pop() {
            let d = self.dist[i] + 1;
            for j in [(i + 1) % n, (i + n - 1) % n] {
                if self.dist[j] > d {
                    self.set(j, d);
                    stack.push(j);
                }
            }
        }
    }

    pub fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Result<Transition> {
        if self.steps == 1 {
            // Second step peels the other side of the root edge.
            let f = self.dist.pop_front().unwrap();
            self.dist.push_back(f);
        }
        let p = self.dist.len();
        let t = self.params.sample_transition(p, rng)?;
        match t {
            Transition::Fresh => {
                if self.volume + 1 > self.vertex_budget {
                    return Err(Error::Budget(format!("explored map exceeds {} vertices", self.vertex_budget)));
                }
                let d = self.dist.front().unwrap().min(self.dist.back().unwrap()) + 1;
                self.dist.push_back(d);
                self.count(d, 1);
                self.volume += 1;
            }
            Transition::Swallow { side, k } => {
                let seed = rng.next_u64();
                for _ in 0..k {
                    let d = match side {
                        Side::Right => self.dist.pop_front(),
                        Side::Left => self.dist.pop_back(),
                    };
                    self.count(d.unwrap(), -1);
                }
                let mut frng = ChaCha8Rng::seed_from_u64(seed);
                let room = self.vertex_budget.saturating_sub(self.volume);
                self.volume += sample_boltzmann_volume(k + 1, self.params, &mut frng, room)?;
                let n = self.dist.len();
                self.relax_from([0, n - 1]);
            }
        }
        self.steps += 1;
        Ok(t)
    }
}

/// Same output as [`super::run_layers`] for the same generator state.
pub fn sweep_layers<R: Rng + ?Sized>(params: &PeelParams, r_max: u32, rng: &mut R, vertex_budget: u64) -> Result<HullSeries> {
    if r_max < 1 {
        return Err(Error::Domain("r_max must be >= 1".into()));
    }
    let mut s = LayerSweep::new(params, vertex_budget);
    let mut hulls = HullSeries::default();
    let mut next_r = 1u32;
    while next_r <= r_max {
        match s.step(rng) {
            Ok(_) => {}
            Err(Error::Budget(_) | Error::PerimeterBeyondTable { .. }) => {
                hulls.truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
        while next_r <= r_max && s.min_boundary_distance() >= next_r {
            hulls.records.push(HullRecord { r: next_r, tau: s.steps(), perimeter: s.perimeter() as u64, volume: s.volume() });
            next_r += 1;
        }
    }
    Ok(hulls)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::peeling::run_layers;

    #[test]
    fn matches_full_engine() {
        for alpha in [0.70, 0.75, 0.9] {
            let pp = PeelParams::from_alpha(alpha).unwrap();
            for seed in 0..30 {
                let mut a = ChaCha8Rng::seed_from_u64(seed);
                let mut b = ChaCha8Rng::seed_from_u64(seed);
                let full = run_layers(&pp, 5, &mut a, 2_000_000).unwrap().hulls;
                let lite = sweep_layers(&pp, 5, &mut b, 2_000_000).unwrap();
                assert_eq!(full, lite, "alpha {alpha} seed {seed}");
            }
        }
    }
}
