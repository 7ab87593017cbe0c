//! Rooted planar triangulations with holes, stored as a half-edge arena.
//!
//! Every half-edge belongs to exactly one face cycle (`next`), and faces are
//! either triangles or holes. A hole is an ordinary face whose interior is
//! still unknown, so the rotation `h ↦ next(twin(h))` around a vertex is
//! complete even on the boundary.
//!
//! # Orientation
//!
//! Peeling acts on a hole half-edge `a = u → v`. Walking the hole cycle with
//! `next` visits the boundary in a fixed direction; that direction is called
//! *right*, the opposite one *left*:
//!
//! ```text
//!            left                       right
//!   ... ── prev(a) ──> u ──── a ────> v ── next(a) ──> ...
//!                       \            /
//!                        c          b          (triangle a, b, c)
//!                          \      /
//!                             z
//! ```
//!
//! A fresh peel puts a new vertex at `z`. A right swallow of `k` picks
//! `z = target(next^k(a))`; a left swallow picks `z = origin(prev^k(a))`.
//! The edges swallowed by the triangle enclose a new hole of perimeter `k + 1`.

mod encode;
mod extract;
mod io;
mod validate;

pub use encode::{canonical_encoding, is_isomorphic_rooted, CanonicalCode};
pub use extract::{ball, ball_around, graph_distance, hull, local_distance, vertex_distances, BallHull, RegionKind};
pub use io::{read_map, write_map, MAP_FORMAT_VERSION};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::Side;

pub type HalfEdge = u32;
pub type Vertex = u32;
pub type Face = u32;

pub(crate) const NIL: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct HalfEdgeRec {
    pub twin: u32,
    pub next: u32,
    pub prev: u32,
    pub origin: u32,
    pub face: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FaceKind {
    Triangle,
    Hole,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) struct FaceRec {
    pub kind: FaceKind,
    pub degree: u32,
    /// Some half-edge of the face; `NIL` marks a freed slot.
    pub rep: u32,
}

/// Result of gluing a triangle with a new vertex.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FreshInfo {
    /// New hole half-edge `u → w`.
    pub left: HalfEdge,
    /// New hole half-edge `w → v`.
    pub right: HalfEdge,
    pub vertex: Vertex,
}

/// Result of gluing a triangle onto two boundary vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SwallowInfo {
    /// Root of the enclosed hole of perimeter `k + 1`, lying on the new edge.
    pub enclosed: HalfEdge,
    /// The new edge's half-edge on the remaining outer hole.
    pub outer: HalfEdge,
    /// Third vertex of the triangle.
    pub apex: Vertex,
    /// Boundary vertices that left the outer hole.
    pub removed: Vec<Vertex>,
}

/// A rooted triangulation with at most a few holes, in a half-edge arena.
///
/// Half-edge and face ids are stable across surgeries; slots freed by edge
/// identification go on free lists. Vertices are never removed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Triangulation {
    pub(crate) he: Vec<HalfEdgeRec>,
    pub(crate) free_he: Vec<u32>,
    pub(crate) faces: Vec<FaceRec>,
    pub(crate) free_faces: Vec<u32>,
    pub(crate) vertex_out: Vec<u32>,
    pub(crate) root: HalfEdge,
    /// The hole that stands for the unexplored part or the outside; `NIL` if none.
    pub(crate) outer: Face,
    pub(crate) live_he: usize,
    pub(crate) triangles: usize,
    pub(crate) holes: usize,
}

impl Triangulation {
    /// The single oriented edge `0 → 1`, seen as a triangulation of the 2-gon.
    pub fn root_two_gon() -> Self {
        let mut t = Triangulation::empty();
        let f = t.new_face(FaceKind::Hole);
        let v0 = t.new_vertex();
        let v1 = t.new_vertex();
        let h0 = t.new_he(v0, f);
        let h1 = t.new_he(v1, f);
        t.set_twins(h0, h1);
        t.link(h0, h1);
        t.link(h1, h0);
        t.faces[f as usize].degree = 2;
        t.faces[f as usize].rep = h0;
        t.vertex_out[v0 as usize] = h0;
        t.vertex_out[v1 as usize] = h1;
        t.root = h0;
        t.outer = f;
        t
    }

    /// Capacity hint for a map about to grow by `vertices`, `half_edges` and `faces`.
    pub fn reserve(&mut self, vertices: usize, half_edges: usize, faces: usize) {
        self.vertex_out.reserve(vertices);
        self.he.reserve(half_edges);
        self.faces.reserve(faces);
    }

    /// A `p`-cycle with an outer hole and an inner hole still to be filled.
    ///
    /// Returns the map and the inner-hole half-edge `0 → 1`, which is also the
    /// root: the finished triangulation lies on its left, the outside on its
    /// right.
    pub fn polygon_frame(p: usize) -> Result<(Self, HalfEdge)> {
        if p < 2 {
            return Err(Error::Domain(format!("polygon needs p >= 2, got {p}")));
        }
        let mut t = Triangulation::empty();
        let outer = t.new_face(FaceKind::Hole);
        let inner = t.new_face(FaceKind::Hole);
        for _ in 0..p {
            t.new_vertex();
        }
        let mut ins = Vec::with_capacity(p);
        let mut outs = Vec::with_capacity(p);
        for j in 0..p {
            let vj = j as u32;
            let vn = ((j + 1) % p) as u32;
            let i = t.new_he(vj, inner);
            let o = t.new_he(vn, outer);
            t.set_twins(i, o);
            ins.push(i);
            outs.push(o);
        }
        for j in 0..p {
            t.link(ins[j], ins[(j + 1) % p]);
            t.link(outs[(j + 1) % p], outs[j]);
            t.vertex_out[j] = ins[j];
        }
        t.faces[outer as usize].degree = p as u32;
        t.faces[outer as usize].rep = outs[0];
        t.faces[inner as usize].degree = p as u32;
        t.faces[inner as usize].rep = ins[0];
        t.root = ins[0];
        t.outer = outer;
        Ok((t, ins[0]))
    }

    fn empty() -> Self {
        Triangulation {
            he: Vec::new(),
            free_he: Vec::new(),
            faces: Vec::new(),
            free_faces: Vec::new(),
            vertex_out: Vec::new(),
            root: NIL,
            outer: NIL,
            live_he: 0,
            triangles: 0,
            holes: 0,
        }
    }

    // ---- arena plumbing ----

    fn new_vertex(&mut self) -> Vertex {
        self.vertex_out.push(NIL);
        (self.vertex_out.len() - 1) as Vertex
    }

    fn new_he(&mut self, origin: Vertex, face: Face) -> HalfEdge {
        let rec = HalfEdgeRec { twin: NIL, next: NIL, prev: NIL, origin, face };
        self.live_he += 1;
        match self.free_he.pop() {
            Some(h) => {
                self.he[h as usize] = rec;
                h
            }
            None => {
                self.he.push(rec);
                (self.he.len() - 1) as HalfEdge
            }
        }
    }

    fn free_half_edge(&mut self, h: HalfEdge) {
        let r = &mut self.he[h as usize];
        r.twin = NIL;
        r.next = NIL;
        r.prev = NIL;
        r.face = NIL;
        self.live_he -= 1;
        self.free_he.push(h);
    }

    fn new_face(&mut self, kind: FaceKind) -> Face {
        match kind {
            FaceKind::Triangle => self.triangles += 1,
            FaceKind::Hole => self.holes += 1,
        }
        let rec = FaceRec { kind, degree: 0, rep: NIL };
        match self.free_faces.pop() {
            Some(f) => {
                self.faces[f as usize] = rec;
                f
            }
            None => {
                self.faces.push(rec);
                (self.faces.len() - 1) as Face
            }
        }
    }

    fn free_face(&mut self, f: Face) {
        match self.faces[f as usize].kind {
            FaceKind::Triangle => self.triangles -= 1,
            FaceKind::Hole => self.holes -= 1,
        }
        self.faces[f as usize].rep = NIL;
        self.faces[f as usize].degree = 0;
        self.free_faces.push(f);
        if self.outer == f {
            self.outer = NIL;
        }
    }

    #[inline]
    fn link(&mut self, a: HalfEdge, b: HalfEdge) {
        self.he[a as usize].next = b;
        self.he[b as usize].prev = a;
    }

    #[inline]
    fn set_twins(&mut self, a: HalfEdge, b: HalfEdge) {
        self.he[a as usize].twin = b;
        self.he[b as usize].twin = a;
    }

    /// Redirects the root and vertex anchors away from a half-edge about to be freed.
    fn replace_refs(&mut self, old: HalfEdge, new: HalfEdge) {
        let o = self.he[old as usize].origin as usize;
        if self.vertex_out[o] == old {
            self.vertex_out[o] = new;
        }
        if self.root == old {
            self.root = new;
        }
    }

    // ---- queries ----

    #[inline]
    pub fn twin(&self, h: HalfEdge) -> HalfEdge {
        self.he[h as usize].twin
    }
    #[inline]
    pub fn next(&self, h: HalfEdge) -> HalfEdge {
        self.he[h as usize].next
    }
    #[inline]
    pub fn prev(&self, h: HalfEdge) -> HalfEdge {
        self.he[h as usize].prev
    }
    #[inline]
    pub fn origin(&self, h: HalfEdge) -> Vertex {
        self.he[h as usize].origin
    }
    #[inline]
    pub fn target(&self, h: HalfEdge) -> Vertex {
        self.he[self.he[h as usize].twin as usize].origin
    }
    #[inline]
    pub fn face(&self, h: HalfEdge) -> Face {
        self.he[h as usize].face
    }
    pub fn face_kind(&self, f: Face) -> FaceKind {
        self.faces[f as usize].kind
    }
    pub fn face_degree(&self, f: Face) -> usize {
        self.faces[f as usize].degree as usize
    }
    /// Some half-edge of face `f`.
    pub fn face_rep(&self, f: Face) -> HalfEdge {
        self.faces[f as usize].rep
    }
    pub fn is_live(&self, h: HalfEdge) -> bool {
        (h as usize) < self.he.len() && self.he[h as usize].twin != NIL
    }
    #[inline]
    pub fn is_hole(&self, h: HalfEdge) -> bool {
        self.is_live(h) && self.faces[self.he[h as usize].face as usize].kind == FaceKind::Hole
    }
    pub fn root(&self) -> HalfEdge {
        self.root
    }
    pub fn set_root(&mut self, h: HalfEdge) -> Result<()> {
        if !self.is_live(h) {
            return Err(Error::Misuse(format!("half-edge {h} is not live")));
        }
        self.root = h;
        Ok(())
    }
    pub fn outer_hole(&self) -> Option<Face> {
        (self.outer != NIL).then_some(self.outer)
    }
    pub fn vertex_count(&self) -> usize {
        self.vertex_out.len()
    }
    pub fn half_edge_count(&self) -> usize {
        self.live_he
    }
    pub fn edge_count(&self) -> usize {
        self.live_he / 2
    }
    pub fn triangle_count(&self) -> usize {
        self.triangles
    }
    pub fn hole_count(&self) -> usize {
        self.holes
    }
    /// Degree of the outer hole (0 once it is closed).
    pub fn perimeter(&self) -> usize {
        if self.outer == NIL {
            0
        } else {
            self.faces[self.outer as usize].degree as usize
        }
    }
    /// Vertices not on any hole.
    pub fn inner_vertex_count(&self) -> usize {
        let mut on = vec![false; self.vertex_count()];
        for h in self.live_half_edges() {
            if self.is_hole(h) {
                on[self.origin(h) as usize] = true;
            }
        }
        on.iter().filter(|&&b| !b).count()
    }
    /// Capacity of the half-edge arena (live or freed ids are below this).
    pub fn half_edge_capacity(&self) -> usize {
        self.he.len()
    }

    pub fn live_half_edges(&self) -> impl Iterator<Item = HalfEdge> + '_ {
        self.he.iter().enumerate().filter(|(_, r)| r.twin != NIL).map(|(i, _)| i as HalfEdge)
    }

    pub fn live_faces(&self) -> impl Iterator<Item = Face> + '_ {
        self.faces.iter().enumerate().filter(|(_, r)| r.rep != NIL).map(|(i, _)| i as Face)
    }

    /// Half-edges of the cycle of face `f`, starting at its representative.
    pub fn face_cycle(&self, f: Face) -> Vec<HalfEdge> {
        let start = self.faces[f as usize].rep;
        let mut out = Vec::with_capacity(self.faces[f as usize].degree as usize);
        let mut h = start;
        loop {
            out.push(h);
            h = self.next(h);
            if h == start || out.len() > self.he.len() {
                break;
            }
        }
        out
    }

    /// Hole half-edges of the outer hole, in `next` order.
    pub fn boundary(&self) -> Vec<HalfEdge> {
        match self.outer_hole() {
            Some(f) => self.face_cycle(f),
            None => Vec::new(),
        }
    }

    /// Outgoing half-edges of `v` in rotation order.
    pub fn out_half_edges(&self, v: Vertex) -> OutHalfEdges<'_> {
        let start = self.vertex_out[v as usize];
        OutHalfEdges { map: self, start, cur: start, done: start == NIL }
    }

    /// Number of outgoing half-edges (multi-edges counted with multiplicity).
    pub fn degree(&self, v: Vertex) -> usize {
        self.out_half_edges(v).count()
    }

    /// Some half-edge leaving `v`.
    pub fn vertex_anchor(&self, v: Vertex) -> HalfEdge {
        self.vertex_out[v as usize]
    }

    /// A hole half-edge leaving `v`, if `v` is on a hole.
    pub fn hole_out(&self, v: Vertex) -> Option<HalfEdge> {
        self.out_half_edges(v).find(|&h| self.is_hole(h))
    }

    pub fn neighbors(&self, v: Vertex) -> impl Iterator<Item = Vertex> + '_ {
        self.out_half_edges(v).map(move |h| self.target(h))
    }

    // ---- surgeries ----

    fn require_hole(&self, a: HalfEdge) -> Result<Face> {
        if !self.is_hole(a) {
            return Err(Error::Misuse(format!("half-edge {a} is not on a hole")));
        }
        Ok(self.face(a))
    }

    /// Glues a triangle with a new vertex onto the hole half-edge `a`.
    pub fn attach_fresh(&mut self, a: HalfEdge) -> Result<FreshInfo> {
        let hole = self.require_hole(a)?;
        let u = self.origin(a);
        let v = self.target(a);
        let pa = self.prev(a);
        let na = self.next(a);
        let w = self.new_vertex();
        let tri = self.new_face(FaceKind::Triangle);
        let x = self.new_he(v, tri);
        let y = self.new_he(w, tri);
        let xo = self.new_he(w, hole);
        let yo = self.new_he(u, hole);
        self.set_twins(x, xo);
        self.set_twins(y, yo);
        self.link(a, x);
        self.link(x, y);
        self.link(y, a);
        self.he[a as usize].face = tri;
        self.link(pa, yo);
        self.link(yo, xo);
        self.link(xo, na);
        let fr = &mut self.faces[tri as usize];
        fr.degree = 3;
        fr.rep = a;
        let hr = &mut self.faces[hole as usize];
        hr.degree += 1;
        hr.rep = yo;
        self.vertex_out[w as usize] = xo;
        Ok(FreshInfo { left: yo, right: xo, vertex: w })
    }

    /// Glues a triangle onto `a` whose third vertex is the `k`-th boundary
    /// vertex on `side`, leaving the enclosed `(k+1)`-gon as a new hole.
    pub fn swallow_open(&mut self, a: HalfEdge, side: Side, k: usize) -> Result<SwallowInfo> {
        let hole = self.require_hole(a)?;
        let p = self.face_degree(hole);
        if k == 0 || k + 2 > p {
            return Err(Error::SwallowOutOfRange { k, p });
        }
        let u = self.origin(a);
        let v = self.target(a);
        let tri = self.new_face(FaceKind::Triangle);
        let enc = self.new_face(FaceKind::Hole);
        let mut removed = Vec::with_capacity(k);
        let (enclosed, outer, z) = match side {
            Side::Right => {
                let mut n = self.next(a);
                let n1 = n;
                for i in 0..k {
                    removed.push(self.origin(n));
                    self.he[n as usize].face = enc;
                    if i + 1 < k {
                        n = self.next(n);
                    }
                }
                let nk = n;
                let after = self.next(nk);
                let z = self.origin(after);
                let pa = self.prev(a);
                let b = self.new_he(v, tri);
                let c = self.new_he(z, tri);
                let bo = self.new_he(z, enc);
                let co = self.new_he(u, hole);
                self.set_twins(b, bo);
                self.set_twins(c, co);
                self.link(a, b);
                self.link(b, c);
                self.link(c, a);
                self.link(nk, bo);
                self.link(bo, n1);
                self.link(pa, co);
                self.link(co, after);
                (bo, co, z)
            }
            Side::Left => {
                removed.push(u);
                let mut m = self.prev(a);
                let m1 = m;
                for i in 0..k {
                    self.he[m as usize].face = enc;
                    if i + 1 < k {
                        removed.push(self.origin(m));
                        m = self.prev(m);
                    }
                }
                let mk = m;
                let z = self.origin(mk);
                let before = self.prev(mk);
                let na = self.next(a);
                let b = self.new_he(v, tri);
                let c = self.new_he(z, tri);
                let bo = self.new_he(z, hole);
                let co = self.new_he(u, enc);
                self.set_twins(b, bo);
                self.set_twins(c, co);
                self.link(a, b);
                self.link(b, c);
                self.link(c, a);
                self.link(m1, co);
                self.link(co, mk);
                self.link(before, bo);
                self.link(bo, na);
                (co, bo, z)
            }
        };
        self.he[a as usize].face = tri;
        let fr = &mut self.faces[tri as usize];
        fr.degree = 3;
        fr.rep = a;
        let er = &mut self.faces[enc as usize];
        er.degree = (k + 1) as u32;
        er.rep = enclosed;
        let hr = &mut self.faces[hole as usize];
        hr.degree = (p - k) as u32;
        hr.rep = outer;
        Ok(SwallowInfo { enclosed, outer, apex: z, removed })
    }

    /// Fills a perimeter-2 hole with the trivial triangulation: its two sides
    /// are identified into a single edge.
    pub fn close_two_gon(&mut self, h: HalfEdge) -> Result<()> {
        let f = self.require_hole(h)?;
        if self.face_degree(f) != 2 {
            return Err(Error::Misuse(format!("hole of degree {} is not a 2-gon", self.face_degree(f))));
        }
        let t1 = h;
        let t2 = self.next(h);
        let s1 = self.twin(t1);
        let s2 = self.twin(t2);
        if s1 == t2 {
            return Err(Error::Misuse("cannot close the bare root edge".into()));
        }
        self.set_twins(s1, s2);
        self.replace_refs(t1, s2);
        self.replace_refs(t2, s1);
        self.free_half_edge(t1);
        self.free_half_edge(t2);
        self.free_face(f);
        Ok(())
    }

    /// Fills the hole containing `e1` with a copy of `filler`, a triangulation
    /// of the polygon with one hole (its outside). `filler.root()` is glued
    /// onto `e1`, with the filler's interior on the left of both.
    ///
    /// Returns the vertices created for the filler's inner vertices.
    pub fn splice_filler(&mut self, e1: HalfEdge, filler: &Triangulation) -> Result<Vec<Vertex>> {
        let hole = self.require_hole(e1)?;
        let m = self.face_degree(hole);
        if filler.hole_count() != 1 {
            return Err(Error::Misuse(format!("filler has {} holes, expected 1", filler.hole_count())));
        }
        let fp = filler.perimeter();
        if fp != m {
            return Err(Error::FillerMismatch { expected: m, got: fp });
        }
        if filler.triangle_count() == 0 {
            // Only the bare 2-gon has no triangles.
            self.close_two_gon(e1)?;
            return Ok(Vec::new());
        }
        let froot = filler.root();
        if filler.is_hole(froot) || !filler.is_hole(filler.twin(froot)) {
            return Err(Error::Misuse("filler root must be a boundary half-edge with the outside on its right".into()));
        }

        // Boundary correspondence e_j <-> f_j.
        let mut es = Vec::with_capacity(m);
        let mut fs = Vec::with_capacity(m);
        let mut e = e1;
        let mut o = filler.twin(froot);
        for j in 0..m {
            es.push(e);
            e = self.next(e);
            if j == 0 {
                fs.push(froot);
            } else {
                fs.push(filler.twin(o));
            }
            o = filler.prev(o);
        }
        simple_cycle(&fs, filler)?;

        let mut vmap = vec![NIL; filler.vertex_count()];
        for j in 0..m {
            let fv = filler.origin(fs[j]) as usize;
            let ev = self.origin(es[j]);
            if vmap[fv] != NIL && vmap[fv] != ev {
                return Err(Error::Invariant("filler boundary vertex glued twice".into()));
            }
            vmap[fv] = ev;
        }
        let mut created = Vec::new();
        for v in 0..filler.vertex_count() {
            if vmap[v] == NIL {
                let nv = self.new_vertex();
                vmap[v] = nv;
                created.push((v, nv));
            }
        }

        let mut fmap = vec![NIL; filler.faces.len()];
        for f in filler.live_faces() {
            if filler.face_kind(f) == FaceKind::Triangle {
                let nf = self.new_face(FaceKind::Triangle);
                self.faces[nf as usize].degree = 3;
                fmap[f as usize] = nf;
            }
        }
        let mut hmap = vec![NIL; filler.he.len()];
        for h in filler.live_half_edges() {
            if !filler.is_hole(h) {
                let nf = fmap[filler.face(h) as usize];
                hmap[h as usize] = self.new_he(vmap[filler.origin(h) as usize], nf);
            }
        }
        for h in filler.live_half_edges() {
            let nh = hmap[h as usize];
            if nh == NIL {
                continue;
            }
            let nn = hmap[filler.next(h) as usize];
            self.link(nh, nn);
            let ft = filler.twin(h);
            if !filler.is_hole(ft) {
                self.he[nh as usize].twin = hmap[ft as usize];
            }
            let nf = self.he[nh as usize].face as usize;
            if self.faces[nf].rep == NIL {
                self.faces[nf].rep = nh;
            }
        }
        for j in 0..m {
            let nh = hmap[fs[j] as usize];
            let outside = self.twin(es[j]);
            self.set_twins(nh, outside);
            self.replace_refs(es[j], nh);
        }
        for &(fv, nv) in &created {
            self.vertex_out[nv as usize] = hmap[filler.vertex_out[fv] as usize];
        }
        for &e in &es {
            self.free_half_edge(e);
        }
        self.free_face(hole);
        Ok(created.into_iter().map(|(_, nv)| nv).collect())
    }

    /// Swallow surgery followed by splicing `filler` into the enclosed hole.
    pub fn peel_swallow(&mut self, a: HalfEdge, side: Side, k: usize, filler: &Triangulation) -> Result<SwallowInfo> {
        let hole = self.require_hole(a)?;
        let p = self.face_degree(hole);
        if k == 0 || k + 2 > p {
            return Err(Error::SwallowOutOfRange { k, p });
        }
        if filler.perimeter() != k + 1 || filler.hole_count() != 1 {
            return Err(Error::FillerMismatch { expected: k + 1, got: filler.perimeter() });
        }
        let info = self.swallow_open(a, side, k)?;
        self.splice_filler(info.enclosed, filler)?;
        Ok(info)
    }

    /// Drops freed slots and renumbers half-edges and faces densely, keeping
    /// their relative order. Vertex ids are unchanged.
    pub fn compact(&mut self) {
        if self.free_he.is_empty() && self.free_faces.is_empty() {
            return;
        }
        let mut hmap = vec![NIL; self.he.len()];
        let mut n = 0u32;
        for (i, r) in self.he.iter().enumerate() {
            if r.twin != NIL {
                hmap[i] = n;
                n += 1;
            }
        }
        let mut fmap = vec![NIL; self.faces.len()];
        let mut nf = 0u32;
        for (i, r) in self.faces.iter().enumerate() {
            if r.rep != NIL {
                fmap[i] = nf;
                nf += 1;
            }
        }
        let he: Vec<HalfEdgeRec> = self
            .he
            .iter()
            .filter(|r| r.twin != NIL)
            .map(|r| HalfEdgeRec {
                twin: hmap[r.twin as usize],
                next: hmap[r.next as usize],
                prev: hmap[r.prev as usize],
                origin: r.origin,
                face: fmap[r.face as usize],
            })
            .collect();
        let faces: Vec<FaceRec> = self
            .faces
            .iter()
            .filter(|r| r.rep != NIL)
            .map(|r| FaceRec { rep: hmap[r.rep as usize], ..*r })
            .collect();
        for vo in self.vertex_out.iter_mut() {
            if *vo != NIL {
                *vo = hmap[*vo as usize];
            }
        }
        self.root = if self.root == NIL { NIL } else { hmap[self.root as usize] };
        self.outer = if self.outer == NIL { NIL } else { fmap[self.outer as usize] };
        self.he = he;
        self.faces = faces;
        self.free_he.clear();
        self.free_faces.clear();
    }

    /// A copy with half-edge, face and vertex ids permuted by `rng`.
    pub fn relabeled<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Triangulation {
        use rand::seq::SliceRandom;
        let mut t = self.clone();
        t.compact();
        let nh = t.he.len();
        let nf = t.faces.len();
        let nv = t.vertex_out.len();
        let mut ph: Vec<u32> = (0..nh as u32).collect();
        let mut pf: Vec<u32> = (0..nf as u32).collect();
        let mut pv: Vec<u32> = (0..nv as u32).collect();
        ph.shuffle(rng);
        pf.shuffle(rng);
        pv.shuffle(rng);
        let mut he = vec![t.he[0]; nh];
        for (i, r) in t.he.iter().enumerate() {
            he[ph[i] as usize] = HalfEdgeRec {
                twin: ph[r.twin as usize],
                next: ph[r.next as usize],
                prev: ph[r.prev as usize],
                origin: pv[r.origin as usize],
                face: pf[r.face as usize],
            };
        }
        let mut faces = t.faces.clone();
        for (i, r) in t.faces.iter().enumerate() {
            faces[pf[i] as usize] = FaceRec { rep: ph[r.rep as usize], ..*r };
        }
        let mut vo = vec![NIL; nv];
        for (i, &h) in t.vertex_out.iter().enumerate() {
            vo[pv[i] as usize] = ph[h as usize];
        }
        t.root = ph[t.root as usize];
        t.outer = if t.outer == NIL { NIL } else { pf[t.outer as usize] };
        t.he = he;
        t.faces = faces;
        t.vertex_out = vo;
        t
    }
}

fn simple_cycle(fs: &[HalfEdge], filler: &Triangulation) -> Result<()> {
    let mut seen = std::collections::HashSet::with_capacity(fs.len());
    for &f in fs {
        if !seen.insert(filler.origin(f)) {
            return Err(Error::Invariant("filler boundary is not a simple cycle".into()));
        }
    }
    Ok(())
}

/// Rotation around a vertex: `h ↦ next(twin(h))`.
pub struct OutHalfEdges<'a> {
    map: &'a Triangulation,
    start: HalfEdge,
    cur: HalfEdge,
    done: bool,
}

impl Iterator for OutHalfEdges<'_> {
    type Item = HalfEdge;
    fn next(&mut self) -> Option<HalfEdge> {
        if self.done {
            return None;
        }
        let h = self.cur;
        self.cur = self.map.next(self.map.twin(h));
        if self.cur == self.start {
            self.done = true;
        }
        Some(h)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_gon() {
        let t = Triangulation::root_two_gon();
        assert_eq!(t.vertex_count(), 2);
        assert_eq!(t.edge_count(), 1);
        assert_eq!(t.perimeter(), 2);
        t.validate().unwrap();
    }

    #[test]
    fn fresh_then_swallow() {
        let mut t = Triangulation::root_two_gon();
        let f = t.attach_fresh(t.root()).unwrap();
        assert_eq!(t.perimeter(), 3);
        assert_eq!(t.vertex_count(), 3);
        assert_eq!(t.edge_count(), 3);
        t.validate().unwrap();
        let info = t.swallow_open(f.right, Side::Right, 1).unwrap();
        assert_eq!(t.perimeter(), 2);
        assert_eq!(t.hole_count(), 2);
        t.close_two_gon(info.enclosed).unwrap();
        t.validate().unwrap();
        assert_eq!(t.edge_count(), 4);
    }

    #[test]
    fn misuse_is_reported() {
        let mut t = Triangulation::root_two_gon();
        let f = t.attach_fresh(0).unwrap();
        // 0 is now inside a triangle.
        assert!(matches!(t.attach_fresh(0), Err(Error::Misuse(_))));
        assert!(matches!(t.swallow_open(f.left, Side::Left, 2), Err(Error::SwallowOutOfRange { .. })));
        let (filler, _) = Triangulation::polygon_frame(3).unwrap();
        assert!(t.peel_swallow(f.left, Side::Left, 1, &filler).is_err());
    }

    #[test]
    fn splice_trivial_filler_matches_close() {
        let mut a = Triangulation::root_two_gon();
        let f = a.attach_fresh(0).unwrap();
        let mut b = a.clone();
        a.peel_swallow(f.right, Side::Right, 1, &Triangulation::root_two_gon()).unwrap();
        let info = b.swallow_open(f.right, Side::Right, 1).unwrap();
        b.close_two_gon(info.enclosed).unwrap();
        a.validate().unwrap();
        assert!(is_isomorphic_rooted(&a, &b));
    }
}
