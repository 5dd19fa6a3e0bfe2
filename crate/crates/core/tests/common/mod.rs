#![allow(dead_code)]

use gbs_deform::deformation::GeneratorBounds;
use gbs_deform::explorer::{is_rigid_conditions, RigidityStatus};
use gbs_deform::graph::{End, EndRef, LabeledGraph, Side};
use gbs_deform::moves::{self, Expansion, Move};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn nonzero(rng: &mut ChaCha8Rng, bound: i64) -> i64 {
    let x = rng.gen_range(1..=bound);
    if rng.gen_bool(0.5) {
        -x
    } else {
        x
    }
}

/// Connected graph on `n` vertices: a random spanning tree plus `extra` edges
/// (loops allowed), labels in `±[1, bound]`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, extra: usize, bound: i64) -> LabeledGraph {
    let mut g = LabeledGraph::new();
    let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
    for v in &names {
        g.add_vertex(v.as_str());
    }
    let mut k = 0;
    let mut edge = |g: &mut LabeledGraph, rng: &mut ChaCha8Rng, u: &str, w: &str| {
        g.insert_edge(format!("e{k}").as_str().into(), End::new(u, nonzero(rng, bound)), End::new(w, nonzero(rng, bound)));
        k += 1;
    };
    for i in 1..n {
        let j = rng.gen_range(0..i);
        edge(&mut g, rng, &names[j], &names[i]);
    }
    for _ in 0..extra {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        edge(&mut g, rng, &names[a], &names[b]);
    }
    g
}

/// Label drawn from a divisor-rich set, so that slides and inductions apply.
pub fn rich_label(rng: &mut ChaCha8Rng) -> i64 {
    let x = *[1, 2, 2, 3, 4, 6].choose(rng).unwrap();
    if rng.gen_bool(0.3) {
        -x
    } else {
        x
    }
}

/// Reduced graph within the generator's bounds; non-rigid in most draws.
pub fn random_reduced(rng: &mut ChaCha8Rng, bounds: &GeneratorBounds) -> LabeledGraph {
    let want_flexible = rng.gen_bool(0.8);
    loop {
        let n = rng.gen_range(1..=3);
        let extra = rng.gen_range(if n == 1 { 1 } else { 0 }..=2);
        let mut g = random_graph(rng, n, extra, 1);
        let ids: Vec<_> = g.edge_ids().cloned().collect();
        let mut relabeled = LabeledGraph::new();
        for v in g.vertices() {
            relabeled.add_vertex(v.clone());
        }
        for id in ids {
            let [a, b] = g.edge(&id).unwrap().clone();
            relabeled.insert_edge(id, End::new(a.vertex, rich_label(rng)), End::new(b.vertex, rich_label(rng)));
        }
        g = relabeled;
        let (r, _) = moves::reduce(&g).unwrap();
        if r.edge_count() == 0
            || r.vertex_count() > bounds.max_vertices
            || r.edge_count() > bounds.max_edges
            || r.max_abs_label() > bounds.max_label
        {
            continue;
        }
        let rigid = is_rigid_conditions(&r).map(|v| v.status == RigidityStatus::Rigid).unwrap_or(false);
        if !want_flexible || !rigid {
            return r;
        }
    }
}

fn divisors(n: i64) -> Vec<i64> {
    let n = n.abs();
    (1..=n).filter(|k| n % k == 0).collect()
}

/// A valid expansion of `g`: the multiplier divides some end at the chosen
/// vertex, and a random subset of the ends it divides is pulled.
pub fn random_expansion(rng: &mut ChaCha8Rng, g: &LabeledGraph) -> Expansion {
    let vertices: Vec<_> = g.vertices().cloned().collect();
    let v = vertices.choose(rng).unwrap().clone();
    let ends = g.ends_at(&v);
    let base = ends.choose(rng).map(|r| g.label(r).unwrap()).unwrap_or(1);
    let d = *divisors(base).choose(rng).unwrap() * if rng.gen_bool(0.5) { -1 } else { 1 };
    let unit = if rng.gen_bool(0.5) { -1 } else { 1 };
    let pulled: Vec<EndRef> = ends.into_iter().filter(|r| g.label(r).unwrap() % d == 0 && rng.gen_bool(0.5)).collect();
    Expansion {
        vertex: v,
        multiplier: d,
        unit,
        pulled,
        new_vertex: g.fresh_vertex_id("x"),
        new_edge: g.fresh_edge_id("y"),
        new_vertex_side: if rng.gen_bool(0.5) { Side::Zero } else { Side::One },
    }
}

/// The collapse undoing `e`.
pub fn undo(e: &Expansion) -> Move {
    Move::Collapse { end: EndRef::new(e.new_edge.clone(), e.new_vertex_side) }
}

/// Abelianization oracle, independent of the library: `Z^betti ⊕ coker(M)`
/// for the edge × vertex matrix with rows `a·x_u − b·x_w`, whose invariant
/// factors come from determinantal divisors (gcd of k×k minors).
pub fn abelian_oracle(g: &LabeledGraph) -> (usize, Vec<u64>) {
    let vs: Vec<_> = g.vertices().cloned().collect();
    let col = |v| vs.iter().position(|x| *x == v).unwrap();
    let m: Vec<Vec<i128>> = g
        .edges()
        .map(|(_, [a, b])| {
            let mut row = vec![0i128; vs.len()];
            row[col(a.vertex.clone())] += a.label as i128;
            row[col(b.vertex.clone())] -= b.label as i128;
            row
        })
        .collect();
    let betti = g.edge_count() + 1 - g.vertex_count();
    let mut divisors = vec![1i128];
    for k in 1..=m.len().min(vs.len()) {
        let d = minor_gcd(&m, k);
        if d == 0 {
            break;
        }
        divisors.push(d);
    }
    let rank_m = divisors.len() - 1;
    let torsion = divisors.windows(2).map(|w| (w[1] / w[0]) as u64).filter(|&t| t >= 2).collect();
    (betti + vs.len() - rank_m, torsion)
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    (k - 1..n)
        .flat_map(|last| {
            combinations(last, k - 1).into_iter().map(move |mut c| {
                c.push(last);
                c
            })
        })
        .collect()
}

fn minor_gcd(m: &[Vec<i128>], k: usize) -> i128 {
    let mut d = 0;
    for rows in combinations(m.len(), k) {
        for cols in combinations(m[0].len(), k) {
            let sub: Vec<Vec<i128>> = rows.iter().map(|&r| cols.iter().map(|&c| m[r][c]).collect()).collect();
            d = gcd(d, bareiss(sub));
            if d == 1 {
                return 1;
            }
        }
    }
    d
}

/// Fraction-free determinant.
fn bareiss(mut a: Vec<Vec<i128>>) -> i128 {
    let n = a.len();
    let (mut sign, mut prev) = (1, 1i128);
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}
