//! Explicit isomorphisms between labeled graphs, up to the sign-change group.
//!
//! Used to carry moves computed on one representative of a class over to the
//! graph actually at hand. The search prefers the identity on shared ids, so
//! edges that persist through a computation keep their identity.

use std::collections::{BTreeMap, BTreeSet};

use crate::graph::{EdgeId, EndRef, LabeledGraph, Side, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Isomorphism {
    pub vertices: BTreeMap<VertexId, VertexId>,
    /// Image edge, and whether the two ends are exchanged.
    pub edges: BTreeMap<EdgeId, (EdgeId, bool)>,
}

impl Isomorphism {
    pub fn map_vertex(&self, v: &VertexId) -> Option<&VertexId> {
        self.vertices.get(v)
    }

    pub fn map_end(&self, r: &EndRef) -> Option<EndRef> {
        self.edges.get(&r.edge).map(|(e, swapped)| EndRef {
            edge: e.clone(),
            side: if *swapped { r.side.flip() } else { r.side },
        })
    }

    pub fn map_edge(&self, e: &EdgeId) -> Option<&EdgeId> {
        self.edges.get(e).map(|(e, _)| e)
    }
}

/// Parity union-find over vertex signs: `sign(a)·sign(b) = parity`.
#[derive(Clone)]
struct Parity {
    parent: Vec<usize>,
    rel: Vec<i8>,
}

impl Parity {
    fn new(n: usize) -> Self {
        Parity { parent: (0..n).collect(), rel: vec![1; n] }
    }

    fn find(&self, mut x: usize) -> (usize, i8) {
        let mut r = 1;
        while self.parent[x] != x {
            r *= self.rel[x];
            x = self.parent[x];
        }
        (x, r)
    }

    fn union(&mut self, a: usize, b: usize, parity: i8) -> bool {
        let (ra, pa) = self.find(a);
        let (rb, pb) = self.find(b);
        if ra == rb {
            return pa * pb == parity;
        }
        self.parent[ra] = rb;
        self.rel[ra] = pa * pb * parity;
        true
    }
}

struct Search<'a> {
    a: &'a LabeledGraph,
    b: &'a LabeledGraph,
    a_vertices: Vec<VertexId>,
    b_vertices: Vec<VertexId>,
    a_edges: Vec<EdgeId>,
    b_edges: Vec<EdgeId>,
    hint_edges: &'a BTreeMap<EdgeId, EdgeId>,
}

struct State {
    vmap: Vec<Option<usize>>,
    vused: Vec<bool>,
    emap: Vec<Option<(usize, bool)>>,
    eused: Vec<bool>,
    parity: Parity,
}

impl Search<'_> {
    fn vidx(list: &[VertexId], v: &VertexId) -> usize {
        list.binary_search(v).unwrap()
    }

    fn run(&self, order: &[usize], k: usize, st: &mut State) -> bool {
        if k == order.len() {
            return true;
        }
        let ea = order[k];
        let [x0, x1] = self.a.edge(&self.a_edges[ea]).unwrap();
        let (u, w) = (Self::vidx(&self.a_vertices, &x0.vertex), Self::vidx(&self.a_vertices, &x1.vertex));

        let mut candidates: Vec<usize> = Vec::new();
        if let Some(h) = self.hint_edges.get(&self.a_edges[ea]) {
            if let Ok(i) = self.b_edges.binary_search(h) {
                candidates.push(i);
            }
        }
        for i in 0..self.b_edges.len() {
            if !candidates.contains(&i) {
                candidates.push(i);
            }
        }

        for eb in candidates {
            if st.eused[eb] {
                continue;
            }
            let [y0, y1] = self.b.edge(&self.b_edges[eb]).unwrap();
            for swapped in [false, true] {
                let (t0, t1) = if swapped { (y1, y0) } else { (y0, y1) };
                if t0.label.abs() != x0.label.abs() || t1.label.abs() != x1.label.abs() {
                    continue;
                }
                let (bu, bw) = (Self::vidx(&self.b_vertices, &t0.vertex), Self::vidx(&self.b_vertices, &t1.vertex));
                if (u == w) != (bu == bw) {
                    continue;
                }
                let saved_v = (st.vmap.clone(), st.vused.clone());
                let saved_p = st.parity.clone();
                let ok = self.bind(st, u, bu) && self.bind(st, w, bw) && {
                    let r = (t0.label.signum() * x0.label.signum()) as i8
                        * (t1.label.signum() * x1.label.signum()) as i8;
                    if u == w { r == 1 } else { st.parity.union(u, w, r) }
                };
                if ok {
                    st.eused[eb] = true;
                    st.emap[ea] = Some((eb, swapped));
                    if self.run(order, k + 1, st) {
                        return true;
                    }
                    st.eused[eb] = false;
                    st.emap[ea] = None;
                }
                st.vmap = saved_v.0;
                st.vused = saved_v.1;
                st.parity = saved_p;
            }
        }
        false
    }

    fn bind(&self, st: &mut State, va: usize, vb: usize) -> bool {
        match st.vmap[va] {
            Some(x) => x == vb,
            None => {
                if st.vused[vb] {
                    return false;
                }
                st.vmap[va] = Some(vb);
                st.vused[vb] = true;
                true
            }
        }
    }
}

/// Finds an isomorphism `a → b` up to sign changes, trying the edge pairing in
/// `hint` (and otherwise identical edge ids) first. Both graphs must be valid.
pub fn find_isomorphism_with_hint(
    a: &LabeledGraph,
    b: &LabeledGraph,
    hint: &BTreeMap<EdgeId, EdgeId>,
) -> Option<Isomorphism> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    let mut full_hint: BTreeMap<EdgeId, EdgeId> =
        a.edge_ids().filter(|e| b.has_edge(e)).map(|e| (e.clone(), e.clone())).collect();
    full_hint.extend(hint.iter().map(|(k, v)| (k.clone(), v.clone())));

    let search = Search {
        a,
        b,
        a_vertices: a.vertices().cloned().collect(),
        b_vertices: b.vertices().cloned().collect(),
        a_edges: a.edge_ids().cloned().collect(),
        b_edges: b.edge_ids().cloned().collect(),
        hint_edges: &full_hint,
    };
    let n = search.a_vertices.len();

    if search.a_edges.is_empty() {
        let mut vertices = BTreeMap::new();
        vertices.insert(search.a_vertices[0].clone(), search.b_vertices[0].clone());
        return Some(Isomorphism { vertices, edges: BTreeMap::new() });
    }

    // edges in BFS order so every edge after the first touches a bound vertex
    let mut order = Vec::new();
    let mut placed = vec![false; search.a_edges.len()];
    let mut reached: BTreeSet<VertexId> = BTreeSet::new();
    let first_v = a.edge(&search.a_edges[0]).unwrap()[0].vertex.clone();
    reached.insert(first_v);
    while order.len() < search.a_edges.len() {
        let next = (0..search.a_edges.len()).find(|&i| {
            !placed[i] && {
                let [x, y] = a.edge(&search.a_edges[i]).unwrap();
                reached.contains(&x.vertex) || reached.contains(&y.vertex)
            }
        });
        let i = next.unwrap_or_else(|| (0..placed.len()).find(|&i| !placed[i]).unwrap());
        placed[i] = true;
        let [x, y] = a.edge(&search.a_edges[i]).unwrap();
        reached.insert(x.vertex.clone());
        reached.insert(y.vertex.clone());
        order.push(i);
    }

    let mut st = State {
        vmap: vec![None; n],
        vused: vec![false; n],
        emap: vec![None; search.a_edges.len()],
        eused: vec![false; search.b_edges.len()],
        parity: Parity::new(n),
    };
    if !search.run(&order, 0, &mut st) {
        return None;
    }
    let vertices = (0..n)
        .map(|i| (search.a_vertices[i].clone(), search.b_vertices[st.vmap[i].unwrap()].clone()))
        .collect();
    let edges = (0..search.a_edges.len())
        .map(|i| {
            let (j, s) = st.emap[i].unwrap();
            (search.a_edges[i].clone(), (search.b_edges[j].clone(), s))
        })
        .collect();
    Some(Isomorphism { vertices, edges })
}

pub fn find_isomorphism(a: &LabeledGraph, b: &LabeledGraph) -> Option<Isomorphism> {
    find_isomorphism_with_hint(a, b, &BTreeMap::new())
}

/// Checks that `iso` really is an isomorphism `a → b` up to signs.
pub fn verify_isomorphism(a: &LabeledGraph, b: &LabeledGraph, iso: &Isomorphism) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    let images: BTreeSet<_> = iso.vertices.values().collect();
    if images.len() != a.vertex_count() {
        return false;
    }
    let mut sign: BTreeMap<&VertexId, i64> = BTreeMap::new();
    let mut parity_checks = Vec::new();
    for (id, ends) in a.edges() {
        let Some((img, swapped)) = iso.edges.get(id) else { return false };
        let Some(target) = b.edge(img) else { return false };
        let mut ratios = [0i64; 2];
        for side in Side::BOTH {
            let src = &ends[side.index()];
            let dst = &target[if *swapped { side.flip() } else { side }.index()];
            if iso.vertices.get(&src.vertex) != Some(&dst.vertex) || src.label.abs() != dst.label.abs() {
                return false;
            }
            ratios[side.index()] = src.label.signum() * dst.label.signum();
        }
        parity_checks.push((&ends[0].vertex, &ends[1].vertex, ratios[0] * ratios[1]));
    }
    // sign assignment σ with σ(u)σ(w) = parity for every edge
    let mut changed = true;
    if let Some(v) = a.vertices().next() {
        sign.insert(v, 1);
    }
    while changed {
        changed = false;
        for &(u, w, p) in &parity_checks {
            match (sign.get(u).copied(), sign.get(w).copied()) {
                (Some(su), Some(sw)) => {
                    if su * sw != p {
                        return false;
                    }
                }
                (Some(su), None) => {
                    sign.insert(w, su * p);
                    changed = true;
                }
                (None, Some(sw)) => {
                    sign.insert(u, sw * p);
                    changed = true;
                }
                (None, None) => {}
            }
        }
    }
    true
}
