use std::collections::VecDeque;

use super::{FaceKind, Triangulation, NIL};
use crate::error::{Error, Result};

fn bad(msg: String) -> Error {
    Error::Invariant(msg)
}

impl Triangulation {
    /// Full structural check of a map with at most one hole.
    ///
    /// Checks the twin involution, face cycles, absence of loops, simplicity
    /// of the hole, vertex rotations, connectivity, Euler's formula and, when
    /// there is a hole of perimeter `p` with `n` inner vertices, the edge count
    /// `3n + 2p − 3`.
    pub fn validate(&self) -> Result<()> {
        self.validate_structure()?;
        if self.holes > 1 {
            return Err(bad(format!("{} holes, expected at most one", self.holes)));
        }
        if self.holes == 1 {
            let p = self.perimeter();
            if p == 0 {
                return Err(bad("the only hole is not the outer hole".into()));
            }
            let n = self.vertex_count() - p;
            if self.edge_count() != 3 * n + 2 * p - 3 {
                return Err(bad(format!(
                    "edge count {} != 3n + 2p - 3 with n = {n}, p = {p}",
                    self.edge_count()
                )));
            }
        }
        Ok(())
    }

    /// Structural check allowing several holes (intermediate sampler states).
    pub fn validate_structure(&self) -> Result<()> {
        let nh = self.he.len();
        let mut live = 0usize;
        for (i, r) in self.he.iter().enumerate() {
            if r.twin == NIL {
                continue;
            }
            live += 1;
            let h = i as u32;
            if r.twin as usize >= nh || r.next as usize >= nh || r.prev as usize >= nh {
                return Err(bad(format!("half-edge {h} has a dangling pointer")));
            }
            if r.twin == h {
                return Err(bad(format!("half-edge {h} is its own twin")));
            }
            if self.twin(r.twin) != h {
                return Err(bad(format!("twin is not an involution at {h}")));
            }
            if self.prev(r.next) != h || self.next(r.prev) != h {
                return Err(bad(format!("next/prev mismatch at {h}")));
            }
            if self.origin(r.twin) == r.origin {
                return Err(bad(format!("loop at half-edge {h}")));
            }
            if self.origin(r.next) != self.origin(r.twin) {
                return Err(bad(format!("next of {h} does not start at its target")));
            }
            if (r.origin as usize) >= self.vertex_out.len() {
                return Err(bad(format!("origin of {h} out of range")));
            }
            let f = r.face as usize;
            if f >= self.faces.len() || self.faces[f].rep == NIL {
                return Err(bad(format!("half-edge {h} lies in a dead face")));
            }
            if self.face(r.next) != r.face {
                return Err(bad(format!("face cycle through {h} changes face")));
            }
        }
        if live != self.live_he {
            return Err(bad(format!("live half-edge count {} != {live}", self.live_he)));
        }
        if live % 2 != 0 {
            return Err(bad("odd number of half-edges".into()));
        }

        let (mut tri, mut holes, mut covered) = (0usize, 0usize, 0usize);
        // Stamp per vertex: last hole whose boundary visited it.
        let mut stamp = vec![NIL; self.vertex_count()];
        for f in self.live_faces() {
            let rec = self.faces[f as usize];
            let is_hole = rec.kind == FaceKind::Hole;
            let mut len = 0usize;
            let mut h = rec.rep;
            loop {
                if self.face(h) != f {
                    return Err(bad(format!("face {f} cycle leaves the face")));
                }
                if is_hole {
                    let o = self.origin(h) as usize;
                    if stamp[o] == f {
                        return Err(bad(format!("hole {f} boundary is not simple at vertex {o}")));
                    }
                    stamp[o] = f;
                }
                len += 1;
                h = self.next(h);
                if h == rec.rep || len > live {
                    break;
                }
            }
            if len != rec.degree as usize || h != rec.rep {
                return Err(bad(format!("face {f} degree {} but cycle length {len}", rec.degree)));
            }
            covered += len;
            if is_hole {
                holes += 1;
                if rec.degree < 2 {
                    return Err(bad(format!("hole {f} has degree {}", rec.degree)));
                }
            } else {
                tri += 1;
                if rec.degree != 3 {
                    return Err(bad(format!("triangle {f} has degree {}", rec.degree)));
                }
            }
        }
        if covered != live {
            return Err(bad("face cycles do not partition the half-edges".into()));
        }
        if tri != self.triangles || holes != self.holes {
            return Err(bad("face counters out of sync".into()));
        }
        if self.outer != NIL && (self.faces[self.outer as usize].rep == NIL || self.face_kind(self.outer) != FaceKind::Hole) {
            return Err(bad("outer face is not a live hole".into()));
        }

        // Rotations: every vertex anchored, and the rotations partition the half-edges.
        let mut rot_total = 0usize;
        for v in 0..self.vertex_count() as u32 {
            let a = self.vertex_out[v as usize];
            if a == NIL || !self.is_live(a) || self.origin(a) != v {
                return Err(bad(format!("vertex {v} has a bad anchor")));
            }
            let mut n = 0usize;
            for h in self.out_half_edges(v) {
                if self.origin(h) != v {
                    return Err(bad(format!("rotation at {v} leaves the vertex")));
                }
                n += 1;
                if n > live {
                    return Err(bad(format!("rotation at {v} does not close")));
                }
            }
            rot_total += n;
        }
        if rot_total != live {
            return Err(bad(format!("rotations cover {rot_total} of {live} half-edges (pinched vertex)")));
        }
        if self.root == NIL || !self.is_live(self.root) {
            return Err(bad("root is not live".into()));
        }

        // Connectivity.
        let mut seen = vec![false; self.vertex_count()];
        let mut q = VecDeque::new();
        seen[self.origin(self.root) as usize] = true;
        q.push_back(self.origin(self.root));
        let mut reached = 1usize;
        while let Some(v) = q.pop_front() {
            for w in self.neighbors(v) {
                if !seen[w as usize] {
                    seen[w as usize] = true;
                    reached += 1;
                    q.push_back(w);
                }
            }
        }
        if reached != self.vertex_count() {
            return Err(bad(format!("map is disconnected ({reached} of {} vertices)", self.vertex_count())));
        }

        let (v, e, f) = (self.vertex_count() as i64, (live / 2) as i64, (tri + holes) as i64);
        if v - e + f != 2 {
            return Err(bad(format!("Euler characteristic V - E + F = {} != 2", v - e + f)));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frame_is_valid_with_two_holes() {
        let (t, _) = Triangulation::polygon_frame(5).unwrap();
        t.validate_structure().unwrap();
        assert!(t.validate().is_err());
    }

    #[test]
    fn corruption_is_caught() {
        let mut t = Triangulation::root_two_gon();
        t.attach_fresh(0).unwrap();
        let mut bad = t.clone();
        bad.he[1].origin = bad.he[0].origin;
        assert!(bad.validate().is_err());
        let mut bad = t.clone();
        let n = bad.he[0].next;
        bad.he[0].next = bad.he[n as usize].next;
        assert!(bad.validate().is_err());
    }
}
