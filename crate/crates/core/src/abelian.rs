//! Abelianization of the fundamental group of a labeled graph, via Smith
//! normal form of the edge relation matrix.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::MoveError;
use crate::graph::{LabeledGraph, VertexId};

/// Isomorphism type of a finitely generated abelian group:
/// `Z^rank ⊕ Z/t₁ ⊕ … ⊕ Z/tₖ` with `t₁ | t₂ | … | tₖ`, every `tᵢ ≥ 2`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbelianInvariant {
    pub rank: usize,
    pub torsion: Vec<u64>,
}

/// Diagonal of the Smith normal form of `m` (invariant factors, nonnegative,
/// each dividing the next). Length is `min(rows, cols)`.
pub fn smith_diagonal(m: &[Vec<i128>]) -> Vec<i128> {
    let rows = m.len();
    let cols = m.first().map_or(0, Vec::len);
    let mut a: Vec<Vec<i128>> = m.to_vec();
    let n = rows.min(cols);

    for t in 0..n {
        // smallest nonzero entry in the remaining block
        let Some((pr, pc)) = min_nonzero(&a, t) else { break };
        a.swap(t, pr);
        for row in a.iter_mut() {
            row.swap(t, pc);
        }
        loop {
            let mut clean = true;
            let p = a[t][t];
            for i in t + 1..rows {
                let q = a[i][t] / p;
                if q != 0 {
                    for j in t..cols {
                        a[i][j] -= q * a[t][j];
                    }
                }
                if a[i][t] != 0 {
                    clean = false;
                }
            }
            for j in t + 1..cols {
                let q = a[t][j] / p;
                if q != 0 {
                    for row in a.iter_mut().skip(t) {
                        row[j] -= q * row[t];
                    }
                }
                if a[t][j] != 0 {
                    clean = false;
                }
            }
            if clean {
                // pivot must divide the rest of the block
                let bad = (t + 1..rows)
                    .flat_map(|i| (t + 1..cols).map(move |j| (i, j)))
                    .find(|&(i, j)| a[i][j] % p != 0);
                match bad {
                    None => break,
                    Some((i, _)) => {
                        for j in t..cols {
                            a[t][j] += a[i][j];
                        }
                        continue;
                    }
                }
            }
            let (pr, pc) = min_nonzero(&a, t).expect("block is nonzero");
            a.swap(t, pr);
            for row in a.iter_mut() {
                row.swap(t, pc);
            }
        }
    }
    (0..n).map(|i| a[i][i].abs()).collect()
}

fn min_nonzero(a: &[Vec<i128>], t: usize) -> Option<(usize, usize)> {
    let mut best: Option<(i128, usize, usize)> = None;
    for (i, row) in a.iter().enumerate().skip(t) {
        for (j, &x) in row.iter().enumerate().skip(t) {
            if x != 0 && best.map_or(true, |(b, _, _)| x.abs() < b) {
                best = Some((x.abs(), i, j));
            }
        }
    }
    best.map(|(_, i, j)| (i, j))
}

/// Relation matrix with one row per geometric edge and one column per vertex:
/// ends `(a at u, b at w)` give `a·x_u − b·x_w`.
pub fn relation_matrix(graph: &LabeledGraph) -> Vec<Vec<i128>> {
    let index: BTreeMap<&VertexId, usize> =
        graph.vertices().enumerate().map(|(i, v)| (v, i)).collect();
    graph
        .edges()
        .map(|(_, [a, b])| {
            let mut row = vec![0i128; index.len()];
            row[index[&a.vertex]] += i128::from(a.label);
            row[index[&b.vertex]] -= i128::from(b.label);
            row
        })
        .collect()
}

/// Abelianized fundamental group of the graph of groups.
pub fn abelianization(graph: &LabeledGraph) -> Result<AbelianInvariant, MoveError> {
    let betti = graph.betti()?;
    let m = relation_matrix(graph);
    let cols = graph.vertex_count();
    let diag = if m.is_empty() { Vec::new() } else { smith_diagonal(&m) };
    let nonzero = diag.iter().filter(|&&d| d != 0).count();
    let torsion = diag
        .iter()
        .filter(|&&d| d >= 2)
        .map(|&d| u64::try_from(d).map_err(|_| MoveError::Overflow))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(AbelianInvariant { rank: cols - nonzero + betti, torsion })
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Invariant factors from determinantal divisors: d_k = gcd of k×k minors,
    /// factor_k = d_k / d_{k−1}. Independent of the elimination above.
    fn determinantal_factors(m: &[Vec<i128>]) -> Vec<i128> {
        fn det(m: &[Vec<i128>]) -> i128 {
            let n = m.len();
            if n == 1 {
                return m[0][0];
            }
            (0..n)
                .map(|j| {
                    let minor: Vec<Vec<i128>> = m[1..]
                        .iter()
                        .map(|r| r.iter().enumerate().filter(|&(c, _)| c != j).map(|(_, &x)| x).collect())
                        .collect();
                    let s = if j % 2 == 0 { 1 } else { -1 };
                    s * m[0][j] * det(&minor)
                })
                .sum()
        }
        fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
            if k == 0 {
                return vec![vec![]];
            }
            if n < k {
                return vec![];
            }
            let mut out = subsets(n - 1, k);
            for mut s in subsets(n - 1, k - 1) {
                s.push(n - 1);
                out.push(s);
            }
            out
        }
        fn gcd(a: i128, b: i128) -> i128 {
            if b == 0 { a.abs() } else { gcd(b, a % b) }
        }
        let rows = m.len();
        let cols = m[0].len();
        let mut out = Vec::new();
        let mut prev = 1;
        for k in 1..=rows.min(cols) {
            let mut g = 0;
            for rs in subsets(rows, k) {
                for cs in subsets(cols, k) {
                    let sub: Vec<Vec<i128>> =
                        rs.iter().map(|&r| cs.iter().map(|&c| m[r][c]).collect()).collect();
                    g = gcd(g, det(&sub));
                }
            }
            if g == 0 {
                out.extend(std::iter::repeat(0).take(rows.min(cols) - k + 1));
                break;
            }
            out.push(g / prev);
            prev = g;
        }
        out
    }

    #[test]
    fn snf_matches_determinantal_divisors() {
        let cases: Vec<Vec<Vec<i128>>> = vec![
            vec![vec![-1]],
            vec![vec![-2]],
            vec![vec![-1, 0], vec![2, -2]],
            vec![vec![2, 4, 4], vec![-6, 6, 12], vec![10, -4, -16]],
            vec![vec![6, 0], vec![0, 4]],
            vec![vec![0, 0], vec![0, 0]],
            vec![vec![3, 9, 0], vec![0, 6, 12]],
        ];
        for m in cases {
            assert_eq!(smith_diagonal(&m), determinantal_factors(&m), "{m:?}");
        }
    }

    #[test]
    fn abelianization_examples() {
        let inv = abelianization(&LabeledGraph::single_loop(2, 3)).unwrap();
        assert_eq!(inv, AbelianInvariant { rank: 1, torsion: vec![] });
        let inv = abelianization(&LabeledGraph::single_loop(2, 4)).unwrap();
        assert_eq!(inv, AbelianInvariant { rank: 1, torsion: vec![2] });
        let g = LabeledGraph::from_edges(&[("l", "v", 1, "v", 2), ("e", "v", 2, "w", 2)]);
        assert_eq!(abelianization(&g).unwrap(), AbelianInvariant { rank: 1, torsion: vec![2] });
        let point = LabeledGraph::new().with_vertex("p");
        assert_eq!(abelianization(&point).unwrap(), AbelianInvariant { rank: 1, torsion: vec![] });
    }

    #[test]
    fn single_loop_torsion_formula() {
        for p in -10i64..=10 {
            for q in -10i64..=10 {
                if p == 0 || q == 0 {
                    continue;
                }
                let inv = abelianization(&LabeledGraph::single_loop(p, q)).unwrap();
                let d = (p - q).unsigned_abs();
                let m = vec![vec![i128::from(p - q)]];
                let oracle = determinantal_factors(&m)[0];
                let expected_torsion = if d >= 2 { vec![d] } else { vec![] };
                assert_eq!(inv.torsion, expected_torsion);
                // rank is 1 from the stable letter, plus 1 when p = q
                assert_eq!(inv.rank, if d == 0 { 2 } else { 1 });
                assert_eq!(oracle.unsigned_abs(), u128::from(d));
            }
        }
    }
}
