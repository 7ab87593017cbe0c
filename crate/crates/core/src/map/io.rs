//! Binary map files: one JSON header line, then little-endian `u32` triples
//! `(twin, next, origin)` per half-edge.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::{FaceKind, FaceRec, HalfEdgeRec, Triangulation, NIL};
use crate::error::{Error, Result};

pub const MAP_FORMAT_VERSION: u32 = 1;
const MAGIC: &str = "planar-peeling-map";

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    vertex_count: u32,
    half_edge_count: u32,
    perimeter: u32,
    root: u32,
    /// One half-edge per hole, the outer hole first.
    holes: Vec<u32>,
}

/// Writes a compacted copy of `t`.
pub fn write_map<W: Write>(t: &Triangulation, mut w: W) -> Result<()> {
    let mut t = t.clone();
    t.compact();
    // Smallest half-edge of each hole, so that the header is canonical.
    let rep = |f| t.face_cycle(f).into_iter().min().expect("non-empty face");
    let mut holes = Vec::new();
    if let Some(f) = t.outer_hole() {
        holes.push(rep(f));
    }
    for f in t.live_faces() {
        if t.face_kind(f) == FaceKind::Hole && Some(f) != t.outer_hole() {
            holes.push(rep(f));
        }
    }
    let header = Header {
        format: MAGIC.into(),
        version: MAP_FORMAT_VERSION,
        vertex_count: t.vertex_count() as u32,
        half_edge_count: t.he.len() as u32,
        perimeter: t.perimeter() as u32,
        root: t.root,
        holes,
    };
    serde_json::to_writer(&mut w, &header)?;
    w.write_all(b"\n")?;
    let mut buf = Vec::with_capacity(12 * t.he.len());
    for r in &t.he {
        buf.extend_from_slice(&r.twin.to_le_bytes());
        buf.extend_from_slice(&r.next.to_le_bytes());
        buf.extend_from_slice(&r.origin.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_map<R: BufRead>(mut r: R) -> Result<Triangulation> {
    let mut line = String::new();
    r.read_line(&mut line)?;
    let header: Header = serde_json::from_str(line.trim_end())?;
    if header.format != MAGIC || header.version != MAP_FORMAT_VERSION {
        return Err(Error::Parse(format!("unsupported map format {} v{}", header.format, header.version)));
    }
    let n = header.half_edge_count as usize;
    let mut raw = vec![0u8; 12 * n];
    r.read_exact(&mut raw)?;
    let word = |i: usize| u32::from_le_bytes(raw[4 * i..4 * i + 4].try_into().unwrap());
    let mut t = Triangulation::empty();
    for _ in 0..header.vertex_count {
        t.new_vertex();
    }
    for i in 0..n {
        let (twin, next, origin) = (word(3 * i), word(3 * i + 1), word(3 * i + 2));
        if twin as usize >= n || next as usize >= n || origin >= header.vertex_count {
            return Err(Error::Parse(format!("half-edge {i} points out of range")));
        }
        t.he.push(HalfEdgeRec { twin, next, prev: NIL, origin, face: NIL });
    }
    t.live_he = n;
    for i in 0..n {
        let nx = t.he[i].next as usize;
        t.he[nx].prev = i as u32;
        let o = t.he[i].origin as usize;
        if t.vertex_out[o] == NIL {
            t.vertex_out[o] = i as u32;
        }
    }
    let mut is_hole_rep = vec![false; n];
    for &h in &header.holes {
        if h as usize >= n {
            return Err(Error::Parse("hole representative out of range".into()));
        }
        is_hole_rep[h as usize] = true;
    }
    // Faces in order of their smallest half-edge, holes as declared.
    for i in 0..n {
        if t.he[i].face != NIL {
            continue;
        }
        let mut cyc = vec![i as u32];
        let mut h = t.he[i].next;
        while h != i as u32 {
            if cyc.len() > n {
                return Err(Error::Parse("next does not form cycles".into()));
            }
            cyc.push(h);
            h = t.he[h as usize].next;
        }
        let hole = cyc.iter().any(|&h| is_hole_rep[h as usize]);
        let kind = if hole { FaceKind::Hole } else { FaceKind::Triangle };
        let f = t.new_face(kind);
        t.faces[f as usize] = FaceRec { kind, degree: cyc.len() as u32, rep: cyc[0] };
        for &h in &cyc {
            t.he[h as usize].face = f;
        }
        if hole && header.holes.first().is_some_and(|&r| cyc.contains(&r)) {
            t.outer = f;
        }
    }
    t.root = header.root;
    t.validate_structure()?;
    Ok(t)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_bytes() {
        let mut t = Triangulation::root_two_gon();
        let f = t.attach_fresh(0).unwrap();
        t.attach_fresh(f.right).unwrap();
        let mut a = Vec::new();
        write_map(&t, &mut a).unwrap();
        let back = read_map(&a[..]).unwrap();
        let mut b = Vec::new();
        write_map(&back, &mut b).unwrap();
        assert_eq!(a, b);
        assert!(super::super::is_isomorphic_rooted(&t, &back));
        assert_eq!(back.perimeter(), t.perimeter());
    }

    #[test]
    fn garbage_is_rejected() {
        assert!(read_map(&b"{\"format\":\"x\"}\n"[..]).is_err());
    }
}
