use super::{HalfEdge, Triangulation, NIL};

/// Root-canonical code of a map: two maps have equal codes iff they are
/// isomorphic as rooted maps (with holes marked).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CanonicalCode(pub Vec<u32>);

impl CanonicalCode {
    /// 128-bit xxh3 hash of the code, for compact deduplication.
    pub fn digest128(&self) -> u128 {
        let bytes: Vec<u8> = self.0.iter().flat_map(|x| x.to_le_bytes()).collect();
        xxhash_rust::xxh3::xxh3_128(&bytes)
    }

    pub fn to_hex(&self) -> String {
        let bytes: Vec<u8> = self.0.iter().flat_map(|x| x.to_le_bytes()).collect();
        hex::encode(bytes)
    }
}

/// Breadth-first labelling from the root over `next` and `twin`.
///
/// Each half-edge, in label order, contributes the labels of its `next`,
/// its `twin` and its origin, and a hole bit. Labels depend only on the rooted combinatorics, so
/// the code is invariant under renumbering of ids.
pub fn canonical_encoding(t: &Triangulation) -> CanonicalCode {
    canonical_from(t, t.root())
}

pub(crate) fn canonical_from(t: &Triangulation, root: HalfEdge) -> CanonicalCode {
    let mut label = vec![NIL; t.he.len()];
    let mut order: Vec<HalfEdge> = Vec::with_capacity(t.half_edge_count());
    label[root as usize] = 0;
    order.push(root);
    let mut i = 0;
    while i < order.len() {
        let h = order[i];
        for nb in [t.next(h), t.twin(h)] {
            if label[nb as usize] == NIL {
                label[nb as usize] = order.len() as u32;
                order.push(nb);
            }
        }
        i += 1;
    }
    // Vertex labels by first appearance; they pin down identifications that
    // next/twin alone would miss (pinched boundaries of balls).
    let mut vlabel = vec![NIL; t.vertex_count()];
    let mut nv = 0u32;
    let mut code = Vec::with_capacity(1 + 4 * order.len());
    code.push(order.len() as u32);
    for &h in &order {
        let o = t.origin(h) as usize;
        if vlabel[o] == NIL {
            vlabel[o] = nv;
            nv += 1;
        }
        code.push(label[t.next(h) as usize]);
        code.push(label[t.twin(h) as usize]);
        code.push(t.is_hole(h) as u32);
        code.push(vlabel[o]);
    }
    CanonicalCode(code)
}

pub fn is_isomorphic_rooted(a: &Triangulation, b: &Triangulation) -> bool {
    a.half_edge_count() == b.half_edge_count() && canonical_encoding(a) == canonical_encoding(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn self_and_relabel() {
        let mut t = Triangulation::root_two_gon();
        let f = t.attach_fresh(0).unwrap();
        t.attach_fresh(f.left).unwrap();
        assert!(is_isomorphic_rooted(&t, &t));
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        for _ in 0..10 {
            assert!(is_isomorphic_rooted(&t, &t.relabeled(&mut rng)));
        }
    }

    #[test]
    fn two_gon_vs_triangle() {
        let t = Triangulation::root_two_gon();
        let mut s = Triangulation::root_two_gon();
        s.attach_fresh(0).unwrap();
        assert!(!is_isomorphic_rooted(&t, &s));
    }
}
