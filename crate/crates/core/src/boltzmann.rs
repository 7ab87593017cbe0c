//! Boltzmann triangulations of the p-gon: exact counts, brute-force
//! enumeration, and exact-law sampling.
//!
//! Both the sampler and the enumerator build maps by the same root-face
//! decomposition. The root edge of a hole of perimeter `p` is either glued to
//! a triangle with a fresh vertex (hole becomes `p + 1`), or to a triangle
//! whose apex is the `k`-th boundary vertex to its right, which splits the
//! hole into a `(k+1)`-gon and a `(p−k)`-gon. A 2-gon can also be closed as a
//! single edge. Pending holes live on an explicit stack.

use std::collections::HashMap;
use std::collections::HashSet;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::map::{canonical_encoding, CanonicalCode, HalfEdge, Triangulation};
use crate::params::{PeelParams, Side};

/// Largest normalization residual the sampler tolerates.
pub const NORMALIZATION_TOL: f64 = 1e-9;

/// Default cap on inner vertices of a single sample.
pub const DEFAULT_VOLUME_BUDGET: u64 = 50_000_000;

fn factorial(n: u64) -> BigUint {
    (2..=n).fold(BigUint::one(), |acc, i| acc * i)
}

/// Number of rooted triangulations of the p-gon with `n` inner vertices
/// (loops forbidden, multiple edges allowed, simple boundary).
///
/// For `n ≥ 1` this is the closed form
/// `(2p−3)!/((p−2)!)² · 2^{n+1} · (2p+3n−4)!/(n!(2p+2n−2)!)`.
/// For `n = 0` the maps are the triangulations of a convex polygon and the
/// count is the Catalan number `C_{p−2}`, which brute force confirms.
pub fn count_triangulations(n: usize, p: usize) -> BigUint {
    if p < 2 {
        return BigUint::zero();
    }
    let (n, p) = (n as u64, p as u64);
    if n == 0 {
        let m = p - 2;
        return factorial(2 * m) / (factorial(m + 1) * factorial(m));
    }
    let a = factorial(2 * p - 3) / (factorial(p - 2) * factorial(p - 2));
    let num = a * (BigUint::one() << (n + 1)) * factorial(2 * p + 3 * n - 4);
    num / (factorial(n) * factorial(2 * p + 2 * n - 2))
}

/// The closed form at `n = 0`, as a reduced fraction `(num, den)`.
pub fn count_formula_at_zero(p: usize) -> (BigUint, BigUint) {
    use num_integer::Integer;
    let p = p as u64;
    let num = factorial(2 * p - 3) * 2u32 * factorial(2 * p - 4);
    let den = factorial(p - 2) * factorial(p - 2) * factorial(2 * p - 2);
    let g = num.gcd(&den);
    (num / &g, den / g)
}

pub(crate) fn biguint_to_f64(x: &BigUint) -> f64 {
    x.to_f64().unwrap_or(f64::INFINITY)
}

/// Counts from the root-face decomposition alone, memoized; an oracle that
/// shares nothing with the closed form.
pub fn count_by_decomposition(n_max: usize, p_max: usize) -> HashMap<(usize, usize), BigUint> {
    // Perimeters grow by one per fresh vertex, so p + n stays bounded.
    let total = n_max + p_max;
    let mut memo: HashMap<(usize, usize), BigUint> = HashMap::new();
    for s in 2..=total {
        for n in 0..=s.saturating_sub(2) {
            let p = s - n;
            if p < 2 {
                continue;
            }
            let mut c = BigUint::zero();
            if p == 2 && n == 0 {
                c += 1u32;
            }
            if n >= 1 {
                c += memo.get(&(n - 1, p + 1)).cloned().unwrap_or_default();
            }
            for k in 1..=p.saturating_sub(2) {
                for n1 in 0..=n {
                    let a = memo.get(&(n1, k + 1)).cloned().unwrap_or_default();
                    if a.is_zero() {
                        continue;
                    }
                    let b = memo.get(&(n - n1, p - k)).cloned().unwrap_or_default();
                    c += a * b;
                }
            }
            memo.insert((n, p), c);
        }
    }
    memo.retain(|&(n, p), _| n <= n_max && p <= p_max);
    memo
}

/// Immutable table of counts for `n + p ≤ max_sum`.
#[derive(Clone, Debug)]
pub struct CountTable {
    pub max_sum: usize,
    entries: HashMap<(usize, usize), BigUint>,
}

impl CountTable {
    pub fn build(max_sum: usize) -> Self {
        let mut entries = HashMap::new();
        for p in 2..=max_sum {
            for n in 0..=max_sum - p {
                entries.insert((n, p), count_triangulations(n, p));
            }
        }
        CountTable { max_sum, entries }
    }

    pub fn get(&self, n: usize, p: usize) -> Option<&BigUint> {
        self.entries.get(&(n, p))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(usize, usize), &BigUint)> {
        self.entries.iter()
    }
}

/// One move of the root-face decomposition.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decision {
    Fresh,
    /// Apex is the `k`-th boundary vertex to the right of the root edge.
    Split(usize),
    /// Identify the two sides of a 2-gon.
    Close,
}

/// Receives the moves of a fill.
pub trait HoleSink {
    type Hole: Copy;
    fn fresh(&mut self, hole: Self::Hole) -> Result<Self::Hole>;
    /// Returns `(enclosed (k+1)-gon, remaining (p−k)-gon)`.
    fn split(&mut self, hole: Self::Hole, k: usize) -> Result<(Self::Hole, Self::Hole)>;
    fn close(&mut self, hole: Self::Hole) -> Result<()>;
}

/// Fills holes of a map in place; a hole is named by one of its half-edges.
pub struct MapSink<'a>(pub &'a mut Triangulation);

impl HoleSink for MapSink<'_> {
    type Hole = HalfEdge;
    fn fresh(&mut self, h: HalfEdge) -> Result<HalfEdge> {
        Ok(self.0.attach_fresh(h)?.right)
    }
    fn split(&mut self, h: HalfEdge, k: usize) -> Result<(HalfEdge, HalfEdge)> {
        let info = self.0.swallow_open(h, Side::Right, k)?;
        Ok((info.enclosed, info.outer))
    }
    fn close(&mut self, h: HalfEdge) -> Result<()> {
        self.0.close_two_gon(h)
    }
}

/// Tracks nothing but the number of moves; for volume-only sampling.
pub struct CountSink;

impl HoleSink for CountSink {
    type Hole = ();
    fn fresh(&mut self, _: ()) -> Result<()> {
        Ok(())
    }
    fn split(&mut self, _: (), _: usize) -> Result<((), ())> {
        Ok(((), ()))
    }
    fn close(&mut self, _: ()) -> Result<()> {
        Ok(())
    }
}

/// Draws the next move for a hole of perimeter `p`.
///
/// Probabilities: close `1/Z_2` (p = 2 only), fresh `κ Z_{p+1}/Z_p`, split `k`
/// `Z_{k+1} Z_{p−k}/Z_p`. They are evaluated through the scaled step law so
/// that no power of β is ever formed, and their sum is checked against 1.
pub fn draw_decision<R: Rng + ?Sized>(params: &PeelParams, p: usize, rng: &mut R) -> Result<Decision> {
    let residual = params.boltzmann_residual(p);
    if !(residual <= NORMALIZATION_TOL) {
        return Err(Error::Normalization { p, residual });
    }
    let mut u: f64 = rng.gen();
    let rho = params.rho();
    if p == 2 {
        let close = 1.0 / params.z(2);
        return Ok(if u < close { Decision::Close } else { Decision::Fresh });
    }
    let rp = params.r_scaled(p - 1);
    let fresh = params.alpha * rho * params.r_scaled(p) / rp;
    if u < fresh {
        return Ok(Decision::Fresh);
    }
    u -= fresh;
    // Split weights are symmetric in k <-> p−1−k; scan pairs from the ends,
    // where the mass is.
    let half = (p - 1) / 2;
    for j in 1..=half {
        let w = params.r_scaled(j) * params.r_scaled(p - 1 - j) / (2.0 * rp);
        let mirror = p - 1 - j;
        let m = if mirror == j { w } else { 2.0 * w };
        if u < m {
            if mirror == j || rng.gen::<bool>() {
                return Ok(Decision::Split(j));
            }
            return Ok(Decision::Split(mirror));
        }
        u -= m;
    }
    // Rounding leftover below the checked tolerance.
    Ok(Decision::Split(1))
}

/// Fills a hole of perimeter `p` with a Boltzmann triangulation.
///
/// Returns the number of inner vertices created. Fails with a budget error
/// once more than `budget` vertices would be needed.
pub fn fill<S: HoleSink, R: Rng + ?Sized>(
    sink: &mut S,
    root: S::Hole,
    p: usize,
    params: &PeelParams,
    rng: &mut R,
    budget: u64,
) -> Result<u64> {
    if p < 2 {
        return Err(Error::Domain(format!("hole perimeter {p} < 2")));
    }
    let mut stack = vec![(root, p)];
    let mut vertices = 0u64;
    while let Some((h, p)) = stack.pop() {
        match draw_decision(params, p, rng)? {
            Decision::Close => sink.close(h)?,
            Decision::Fresh => {
                vertices += 1;
                if vertices > budget {
                    return Err(Error::Budget(format!("Boltzmann sample exceeds {budget} vertices")));
                }
                stack.push((sink.fresh(h)?, p + 1));
            }
            Decision::Split(k) => {
                let (enc, rem) = sink.split(h, k)?;
                stack.push((rem, p - k));
                stack.push((enc, k + 1));
            }
        }
    }
    Ok(vertices)
}

/// Fills the hole of `map` containing `h` in place.
pub fn fill_hole<R: Rng + ?Sized>(
    map: &mut Triangulation,
    h: HalfEdge,
    params: &PeelParams,
    rng: &mut R,
    budget: u64,
) -> Result<u64> {
    let p = map.face_degree(map.face(h));
    fill(&mut MapSink(map), h, p, params, rng, budget)
}

/// A Boltzmann triangulation of the p-gon, as a standalone map whose only
/// hole is the outside.
pub fn sample_boltzmann<R: Rng + ?Sized>(p: usize, params: &PeelParams, rng: &mut R) -> Result<Triangulation> {
    sample_boltzmann_with_budget(p, params, rng, DEFAULT_VOLUME_BUDGET)
}

pub fn sample_boltzmann_with_budget<R: Rng + ?Sized>(
    p: usize,
    params: &PeelParams,
    rng: &mut R,
    budget: u64,
) -> Result<Triangulation> {
    let (mut t, root) = Triangulation::polygon_frame(p)?;
    fill(&mut MapSink(&mut t), root, p, params, rng, budget)?;
    Ok(t)
}

/// Inner vertex count of a Boltzmann p-gon, without building the map.
pub fn sample_boltzmann_volume<R: Rng + ?Sized>(p: usize, params: &PeelParams, rng: &mut R, budget: u64) -> Result<u64> {
    fill(&mut CountSink, (), p, params, rng, budget)
}

/// Replays a decision sequence into a fresh p-gon frame.
pub fn build_from_decisions(p: usize, decisions: &[Decision]) -> Result<Triangulation> {
    let (mut t, root) = Triangulation::polygon_frame(p)?;
    let fresh = decisions.iter().filter(|d| matches!(d, Decision::Fresh)).count();
    t.reserve(fresh, 2 * (3 * fresh + 2 * p) + 4, decisions.len() + 2);
    let mut sink = MapSink(&mut t);
    let mut stack = vec![(root, p)];
    for &d in decisions {
        let (h, q) = stack.pop().ok_or_else(|| Error::Misuse("decision sequence too long".into()))?;
        match d {
            Decision::Close if q == 2 => sink.close(h)?,
            Decision::Fresh => stack.push((sink.fresh(h)?, q + 1)),
            Decision::Split(k) if k >= 1 && k + 2 <= q => {
                let (enc, rem) = sink.split(h, k)?;
                stack.push((rem, q - k));
                stack.push((enc, k + 1));
            }
            _ => return Err(Error::Misuse(format!("decision {d:?} invalid at perimeter {q}"))),
        }
    }
    if !stack.is_empty() {
        return Err(Error::Misuse("decision sequence leaves holes open".into()));
    }
    Ok(t)
}

/// Every decision sequence that triangulates a p-gon with exactly `n` fresh
/// vertices, in lexicographic order.
fn for_each_sequence(n: usize, p: usize, f: &mut dyn FnMut(&[Decision]) -> Result<()>) -> Result<()> {
    fn rec(
        stack: &mut Vec<usize>,
        remaining: usize,
        seq: &mut Vec<Decision>,
        f: &mut dyn FnMut(&[Decision]) -> Result<()>,
    ) -> Result<()> {
        let Some(q) = stack.pop() else {
            if remaining == 0 {
                f(seq)?;
            }
            return Ok(());
        };
        if q == 2 {
            seq.push(Decision::Close);
            rec(stack, remaining, seq, f)?;
            seq.pop();
        }
        if remaining > 0 {
            stack.push(q + 1);
            seq.push(Decision::Fresh);
            rec(stack, remaining - 1, seq, f)?;
            seq.pop();
            stack.pop();
        }
        for k in 1..=q.saturating_sub(2) {
            stack.push(q - k);
            stack.push(k + 1);
            seq.push(Decision::Split(k));
            rec(stack, remaining, seq, f)?;
            seq.pop();
            stack.pop();
            stack.pop();
        }
        stack.push(q);
        Ok(())
    }
    rec(&mut vec![p], n, &mut Vec::new(), f)
}

/// All rooted triangulations of the p-gon with `n` inner vertices, without
/// duplicates (checked by canonical encoding).
pub fn enumerate_triangulations(n: usize, p: usize, max_maps: usize) -> Result<Vec<Triangulation>> {
    if p < 2 {
        return Err(Error::Domain(format!("p = {p} < 2")));
    }
    let mut seen: HashSet<CanonicalCode> = HashSet::new();
    let mut out = Vec::new();
    for_each_sequence(n, p, &mut |seq| {
        let t = build_from_decisions(p, seq)?;
        if seen.insert(canonical_encoding(&t)) {
            if out.len() >= max_maps {
                return Err(Error::Budget(format!("more than {max_maps} maps for (n, p) = ({n}, {p})")));
            }
            out.push(t);
        }
        Ok(())
    })?;
    Ok(out)
}

/// Result of a brute-force count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumerationCount {
    /// Decision sequences visited.
    pub sequences: u64,
    /// Distinct canonical encodings among them.
    pub distinct: u64,
}

/// Counts distinct maps by canonical-encoding digest without keeping them.
///
/// Every generated map is validated. Deduplication uses a 128-bit digest of
/// the encoding.
pub fn enumerate_count(n: usize, p: usize, max_maps: u64) -> Result<EnumerationCount> {
    let mut seen: HashSet<u128> = HashSet::new();
    let mut sequences = 0u64;
    for_each_sequence(n, p, &mut |seq| {
        sequences += 1;
        if sequences > max_maps {
            return Err(Error::Budget(format!("more than {max_maps} maps for (n, p) = ({n}, {p})")));
        }
        let t = build_from_decisions(p, seq)?;
        t.validate()?;
        if t.vertex_count() != n + p || t.perimeter() != p {
            return Err(Error::Invariant("enumerated map has the wrong size".into()));
        }
        seen.insert(canonical_encoding(&t).digest128());
        Ok(())
    })?;
    Ok(EnumerationCount { sequences, distinct: seen.len() as u64 })
}

/// Brute-force counts for every `(n, p)` with `n + p ≤ max_sum`, in parallel.
pub fn enumerate_all(max_sum: usize, max_maps: u64) -> Result<Vec<((usize, usize), EnumerationCount)>> {
    let mut jobs = Vec::new();
    for p in 2..=max_sum {
        for n in 0..=max_sum - p {
            jobs.push((n, p));
        }
    }
    // Largest jobs first for better load balance.
    jobs.sort_by_key(|&(n, p)| std::cmp::Reverse(count_triangulations(n, p)));
    let mut out: Vec<_> = jobs
        .par_iter()
        .map(|&(n, p)| enumerate_count(n, p, max_maps).map(|c| ((n, p), c)))
        .collect::<Result<_>>()?;
    out.sort_by_key(|&(k, _)| k);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn formula_examples() {
        assert_eq!(count_triangulations(1, 2), BigUint::from(1u32));
        assert_eq!(count_triangulations(2, 2), BigUint::from(4u32));
        assert_eq!(count_triangulations(3, 2), BigUint::from(24u32));
        assert_eq!(count_triangulations(1, 3), BigUint::from(4u32));
        assert_eq!(count_triangulations(0, 2), BigUint::from(1u32));
        assert_eq!(count_triangulations(0, 3), BigUint::from(1u32));
        assert_eq!(count_triangulations(0, 4), BigUint::from(2u32));
        assert_eq!(count_triangulations(0, 6), BigUint::from(14u32));
    }

    #[test]
    fn decomposition_matches_formula() {
        let memo = count_by_decomposition(6, 6);
        for (&(n, p), c) in &memo {
            assert_eq!(c, &count_triangulations(n, p), "(n, p) = ({n}, {p})");
        }
    }

    #[test]
    fn small_enumerations() {
        assert_eq!(enumerate_triangulations(0, 2, 10).unwrap().len(), 1);
        assert_eq!(enumerate_triangulations(0, 4, 10).unwrap().len(), 2);
        assert_eq!(enumerate_triangulations(1, 3, 10).unwrap().len(), 4);
        assert!(matches!(enumerate_triangulations(2, 4, 3), Err(Error::Budget(_))));
    }

    #[test]
    fn samples_are_valid() {
        let pp = PeelParams::new(9.0 / 128.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for p in [2usize, 3, 5, 9] {
            for _ in 0..50 {
                let t = sample_boltzmann(p, &pp, &mut rng).unwrap();
                t.validate().unwrap();
                assert_eq!(t.perimeter(), p);
            }
        }
    }

    #[test]
    fn tiny_kappa_gives_minimal_maps() {
        let pp = PeelParams::new(1e-9).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..100 {
            assert_eq!(sample_boltzmann_volume(4, &pp, &mut rng, 10).unwrap(), 0);
        }
    }

    #[test]
    fn normalization_holds_across_regimes() {
        for kappa in [1e-6, 0.03, 9.0 / 128.0, 2.0 / 27.0] {
            let pp = PeelParams::new(kappa).unwrap();
            for p in [2usize, 3, 4, 10, 100, 1000] {
                assert!(pp.boltzmann_residual(p) < 1e-12, "kappa {kappa} p {p}: {}", pp.boltzmann_residual(p));
            }
        }
    }
}
