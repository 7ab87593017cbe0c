use std::collections::VecDeque;

use super::{FaceKind, FaceRec, HalfEdge, Triangulation, Vertex, NIL};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RegionKind {
    Ball,
    Hull,
}

/// A ball or hull cut out of a larger map, rooted at the image of the root.
#[derive(Clone, Debug)]
pub struct BallHull {
    pub map: Triangulation,
    pub radius: usize,
    pub kind: RegionKind,
    /// Whether the region is the whole (hole-free) source map.
    pub exhausted: bool,
}

/// BFS distances from `src`; `u32::MAX` for unreachable vertices.
pub fn vertex_distances(t: &Triangulation, src: Vertex) -> Vec<u32> {
    let mut d = vec![NIL; t.vertex_count()];
    let mut q = VecDeque::new();
    d[src as usize] = 0;
    q.push_back(src);
    while let Some(v) = q.pop_front() {
        let dv = d[v as usize];
        for w in t.neighbors(v) {
            if d[w as usize] == NIL {
                d[w as usize] = dv + 1;
                q.push_back(w);
            }
        }
    }
    d
}

pub fn graph_distance(t: &Triangulation, u: Vertex, v: Vertex) -> usize {
    if u == v {
        return 0;
    }
    vertex_distances(t, u)[v as usize] as usize
}

/// Checks that every vertex within distance `r − 1` of the center has all its
/// faces revealed and its distance certified.
fn check_materialized(t: &Triangulation, dist: &[u32], r: usize) -> Result<()> {
    for h in t.live_half_edges() {
        if t.is_hole(h) && (dist[t.origin(h) as usize] as usize) < r {
            return Err(Error::InsufficientExploration(format!(
                "hole vertex {} at distance {} < radius {r}",
                t.origin(h),
                dist[t.origin(h) as usize]
            )));
        }
    }
    Ok(())
}

fn ball_faces(t: &Triangulation, dist: &[u32], r: usize) -> Vec<bool> {
    let mut sel = vec![false; t.faces.len()];
    for f in t.live_faces() {
        if t.face_kind(f) != FaceKind::Triangle {
            continue;
        }
        let a = t.face_rep(f);
        let near = [a, t.next(a), t.next(t.next(a))].iter().any(|&h| (dist[t.origin(h) as usize] as usize) < r);
        sel[f as usize] = near;
    }
    sel
}

/// The ball `B_r`: triangles with a vertex at distance at most `r − 1` from
/// the root's origin.
pub fn ball(t: &Triangulation, r: usize) -> Result<BallHull> {
    ball_around(t, t.root(), r)
}

/// The ball of radius `r` around the origin of `root`, rooted at `root`.
pub fn ball_around(t: &Triangulation, root: HalfEdge, r: usize) -> Result<BallHull> {
    if r < 1 {
        return Err(Error::Domain("radius must be >= 1".into()));
    }
    let dist = vertex_distances(t, t.origin(root));
    check_materialized(t, &dist, r)?;
    let sel = ball_faces(t, &dist, r);
    let exhausted = t.hole_count() == 0 && t.live_faces().all(|f| sel[f as usize]);
    let map = submap(t, &sel, root)?;
    Ok(BallHull { map, radius: r, kind: RegionKind::Ball, exhausted })
}

/// The hull `B̄_r`: the ball together with every complementary component
/// that does not reach the outer hole.
pub fn hull(t: &Triangulation, r: usize) -> Result<BallHull> {
    if r < 1 {
        return Err(Error::Domain("radius must be >= 1".into()));
    }
    let outer = t
        .outer_hole()
        .ok_or_else(|| Error::Domain("hull needs a map with an outer hole".into()))?;
    let dist = vertex_distances(t, t.origin(t.root()));
    check_materialized(t, &dist, r)?;
    let ball = ball_faces(t, &dist, r);
    // Flood the complement of the ball from the outer hole.
    let mut outside = vec![false; t.faces.len()];
    let mut stack = vec![outer];
    outside[outer as usize] = true;
    while let Some(f) = stack.pop() {
        for h in t.face_cycle(f) {
            let g = t.face(t.twin(h));
            if !ball[g as usize] && !outside[g as usize] {
                outside[g as usize] = true;
                stack.push(g);
            }
        }
    }
    let mut sel = vec![false; t.faces.len()];
    for f in t.live_faces() {
        sel[f as usize] = t.face_kind(f) == FaceKind::Triangle && !outside[f as usize];
    }
    let map = submap(t, &sel, t.root())?;
    Ok(BallHull { map, radius: r, kind: RegionKind::Hull, exhausted: false })
}

/// The submap made of the selected triangles, with every boundary cycle of
/// the selection turned into a hole.
pub(crate) fn submap(t: &Triangulation, sel: &[bool], root: HalfEdge) -> Result<Triangulation> {
    if !sel[t.face(root) as usize] && !sel[t.face(t.twin(root)) as usize] {
        return Err(Error::Domain("root edge is not in the selected region".into()));
    }
    let mut out = Triangulation::empty();
    let mut vmap = vec![NIL; t.vertex_count()];
    let mut hmap = vec![NIL; t.he.len()];
    let mut bmap = vec![NIL; t.he.len()]; // hole half-edge created opposite h
    let mut fmap = vec![NIL; t.faces.len()];

    let mut sel_faces: Vec<u32> = t.live_faces().filter(|&f| sel[f as usize]).collect();
    sel_faces.sort_unstable();
    for &f in &sel_faces {
        let nf = out.new_face(FaceKind::Triangle);
        out.faces[nf as usize] = FaceRec { kind: FaceKind::Triangle, degree: 3, rep: NIL };
        fmap[f as usize] = nf;
    }
    let vid = |out: &mut Triangulation, vmap: &mut Vec<u32>, v: Vertex| -> Vertex {
        if vmap[v as usize] == NIL {
            vmap[v as usize] = out.new_vertex();
        }
        vmap[v as usize]
    };
    for &f in &sel_faces {
        for h in t.face_cycle(f) {
            let o = vid(&mut out, &mut vmap, t.origin(h));
            hmap[h as usize] = out.new_he(o, fmap[f as usize]);
        }
    }
    for &f in &sel_faces {
        let cyc = t.face_cycle(f);
        out.faces[fmap[f as usize] as usize].rep = hmap[cyc[0] as usize];
        for &h in &cyc {
            out.link(hmap[h as usize], hmap[t.next(h) as usize]);
            let tw = t.twin(h);
            if sel[t.face(tw) as usize] {
                out.he[hmap[h as usize] as usize].twin = hmap[tw as usize];
            }
        }
    }
    // Boundary half-edges: selected h whose twin is outside.
    let boundary: Vec<HalfEdge> = sel_faces
        .iter()
        .flat_map(|&f| t.face_cycle(f))
        .filter(|&h| !sel[t.face(t.twin(h)) as usize])
        .collect();
    for &x in &boundary {
        let o = vmap[t.origin(t.twin(x)) as usize];
        let xb = out.new_he(o, NIL);
        out.set_twins(hmap[x as usize], xb);
        bmap[x as usize] = xb;
    }
    for &x in &boundary {
        // Turn around origin(x) through selected faces until the next exit.
        let mut y = t.prev(x);
        while sel[t.face(t.twin(y)) as usize] {
            y = t.prev(t.twin(y));
        }
        out.link(bmap[x as usize], bmap[y as usize]);
    }
    // Hole faces from the boundary cycles.
    let mut holes = 0;
    for &x in &boundary {
        let xb = bmap[x as usize];
        if out.he[xb as usize].face != NIL {
            continue;
        }
        let f = out.new_face(FaceKind::Hole);
        holes += 1;
        let mut h = xb;
        let mut deg = 0;
        loop {
            out.he[h as usize].face = f;
            deg += 1;
            h = out.he[h as usize].next;
            if h == xb {
                break;
            }
        }
        out.faces[f as usize].degree = deg;
        out.faces[f as usize].rep = xb;
        if holes == 1 {
            out.outer = f;
        }
    }
    if holes > 1 {
        out.outer = NIL;
    }
    for h in 0..out.he.len() {
        let o = out.he[h].origin as usize;
        if out.vertex_out[o] == NIL {
            out.vertex_out[o] = h as u32;
        }
    }
    out.root = if sel[t.face(root) as usize] { hmap[root as usize] } else { bmap[t.twin(root) as usize] };
    Ok(out)
}

/// `1 / (1 + sup{r : B_r(t1) ≅ B_r(t2)})`, over the radii both maps
/// materialize.
///
/// Identical exhausted maps are at distance 0. When one map runs out of
/// explored region first, the value reflects the largest radius compared,
/// which is an upper bound on the true distance.
pub fn local_distance(t1: &Triangulation, t2: &Triangulation) -> f64 {
    let mut last_equal = 0usize;
    let mut r = 1usize;
    loop {
        let (b1, b2) = match (ball(t1, r), ball(t2, r)) {
            (Ok(a), Ok(b)) => (a, b),
            _ => return 1.0 / (1.0 + last_equal as f64),
        };
        if super::canonical_encoding(&b1.map) != super::canonical_encoding(&b2.map) {
            return 1.0 / (1.0 + last_equal as f64);
        }
        if b1.exhausted && b2.exhausted {
            return 0.0;
        }
        last_equal = r;
        r += 1;
    }
}
