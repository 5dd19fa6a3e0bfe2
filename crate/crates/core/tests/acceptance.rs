//! Acceptance suite: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

mod common;

use std::collections::{BTreeMap, BTreeSet};
use std::time::Instant;

use gbs_deform::abelian::{abelianization, AbelianInvariant};
use gbs_deform::canon::{canonical_form, equivalent};
use gbs_deform::deformation::{random_deformation, ElementaryDeformation, GeneratorBounds};
use gbs_deform::enumerate::Bounds;
use gbs_deform::explorer::{find_path, is_rigid_conditions, is_rigid_moves, PathOutcome, RigidityStatus};
use gbs_deform::forest::Forest;
use gbs_deform::graph::{EdgeId, End, LabeledGraph};
use gbs_deform::moves::{self, Move};
use gbs_deform::whitehead::{
    deformation_to_moves_avoiding, factor_whitehead, find_whitehead_pair, Conclusion, MovePipeline,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

/// Every move application made by criteria 1–3, with the invariants of the
/// graph before and after it compared.
#[derive(Default)]
struct Ledger {
    applications: usize,
    violations: Vec<String>,
}

impl Ledger {
    /// Oracle invariants; the library's abelianization and betti must agree.
    fn invariants(&mut self, what: &str, g: &LabeledGraph) -> (usize, Vec<u64>, usize) {
        let (rank, torsion) = common::abelian_oracle(g);
        let betti = g.edge_count() + 1 - g.vertex_count();
        let lib = abelianization(g).unwrap();
        if lib != (AbelianInvariant { rank, torsion: torsion.clone() }) || g.betti().unwrap() != betti {
            self.violations.push(format!("{what}: library invariants disagree with the oracle on {g}"));
        }
        (rank, torsion, betti)
    }

    /// Replays `moves` from `start`, checking each result against `start`.
    fn replay(&mut self, what: &str, start: &LabeledGraph, moves: &[Move]) -> Result<Vec<LabeledGraph>, String> {
        let inv = self.invariants(what, start);
        let mut cur = start.clone();
        let mut out = vec![cur.clone()];
        for (i, mv) in moves.iter().enumerate() {
            cur = moves::apply(&cur, mv).map_err(|e| format!("{what}: step {i}: {e}"))?.graph;
            self.applications += 1;
            if self.invariants(what, &cur) != inv {
                self.violations.push(format!("{what}: step {i} ({}) changed the invariants", mv.kind()));
            }
            out.push(cur.clone());
        }
        Ok(out)
    }

    /// Replays `moves`, then their exact inverses in reverse order, which
    /// must restore `start` exactly.
    fn round_trip(&mut self, what: &str, start: &LabeledGraph, moves: &[Move]) -> Result<Vec<LabeledGraph>, String> {
        let graphs = self.replay(what, start, moves)?;
        let back: Vec<Move> = moves
            .iter()
            .zip(&graphs)
            .rev()
            .map(|(mv, before)| moves::inverse(before, mv))
            .collect::<Result<_, _>>()
            .map_err(|e| format!("{what}: inverse: {e}"))?;
        let undone = self.replay(&format!("{what} undone"), graphs.last().unwrap(), &back)?;
        if undone.last() != Some(start) {
            return Err(format!("{what}: inverse replay does not restore the start"));
        }
        Ok(graphs)
    }
}

fn seed_rng(tag: u64, i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(tag.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ i)
}

fn criterion_1(ledger: &mut Ledger) -> Outcome {
    let mut pass = 0;
    for i in 0..1000u64 {
        let mut rng = seed_rng(1, i);
        let n = 1 + (i as usize % 6);
        let g = common::random_graph(&mut rng, n, i as usize % 3, 12);
        let e = common::random_expansion(&mut rng, &g);
        let graphs = ledger.replay("round-trip", &g, &[Move::Expansion(e.clone()), common::undo(&e)])?;
        // the other way round: the collapse, undone by its inverse expansion
        ledger.round_trip("round-trip collapse", &graphs[1], &[common::undo(&e)])?;
        if graphs[2] == g {
            pass += 1;
        }
    }
    if pass == 1000 {
        Ok("1000/1000 expansion/collapse pairs restore the exact graph".into())
    } else {
        Err(format!("{pass}/1000 pairs restore the exact graph"))
    }
}

struct Case {
    deformation: ElementaryDeformation,
    pipeline: MovePipeline,
}

fn check_pipeline(ledger: &mut Ledger, what: &str, d: &ElementaryDeformation, p: &MovePipeline) -> Result<(), String> {
    ledger.round_trip(&format!("{what} deformation"), d.start(), d.steps())?;
    ledger.round_trip(&format!("{what} normalized"), p.normalized.start(), p.normalized.steps())?;
    for (k, wm) in p.whitehead.iter().enumerate() {
        let collapses: Vec<Move> = wm.set.iter().map(|end| Move::Collapse { end: end.clone() }).collect();
        ledger.round_trip(&format!("{what} whitehead {k} set side"), &wm.peak, &collapses)?;
        ledger.round_trip(&format!("{what} whitehead {k} single side"), &wm.peak, &[Move::Collapse { end: wm.single.clone() }])?;
        let fac = factor_whitehead(wm).map_err(|e| format!("{what}: {e}"))?;
        ledger.round_trip(&format!("{what} factorization {k}"), &fac.start, &fac.moves)?;
    }
    if let Some(m) = p.moves.iter().find(|m| m.is_elementary()) {
        return Err(format!("{what}: emitted a {}", m.kind()));
    }
    let graphs = ledger.round_trip(&format!("{what} script"), d.start(), &p.moves)?;
    if let Some(g) = graphs.iter().find(|g| !g.is_reduced()) {
        return Err(format!("{what}: unreduced intermediate {g}"));
    }
    if canonical_form(graphs.last().unwrap()).unwrap() != canonical_form(d.end()).unwrap() {
        return Err(format!("{what}: replay misses the endpoint"));
    }
    Ok(())
}

fn criterion_2(ledger: &mut Ledger, cases: &mut Vec<Case>) -> Outcome {
    let bounds = GeneratorBounds::default();
    let mut kinds: BTreeMap<&str, usize> = BTreeMap::new();
    let mut nonempty = 0;
    for i in 0..200u64 {
        let mut rng = seed_rng(2, i);
        let start = common::random_reduced(&mut rng, &bounds);
        let d = random_deformation(i, &bounds, &start, None).map_err(|e| format!("case {i}: {e}"))?;
        let p = deformation_to_moves_avoiding(&d, None).map_err(|e| format!("case {i}: {e}"))?;
        check_pipeline(ledger, &format!("case {i}"), &d, &p)?;
        nonempty += usize::from(!p.moves.is_empty());
        for m in &p.moves {
            *kinds.entry(m.kind()).or_default() += 1;
        }
        cases.push(Case { deformation: d, pipeline: p });
    }
    Ok(format!("200/200 deformations factored ({nonempty} with nonempty scripts; moves {kinds:?})"))
}

fn criterion_3(ledger: &mut Ledger, cases: &[Case]) -> Outcome {
    let mut free = 0;
    for (i, c) in cases.iter().enumerate() {
        if c.deformation.graphs().iter().all(|g| g.strict_ascending_loops().is_empty()) {
            free += 1;
            if let Some(m) = c.pipeline.moves.iter().find(|m| !matches!(m, Move::Slide(_))) {
                return Err(format!("case {i}: no strict ascending loop, yet a {} was emitted", m.kind()));
            }
        }
    }
    let bounds = GeneratorBounds::default();
    let mut slides = 0;
    for i in 0..50u64 {
        let mut rng = seed_rng(3, i);
        let start = common::random_reduced(&mut rng, &bounds);
        let tracked: EdgeId = start.edge_ids().next().unwrap().clone();
        let d = random_deformation(1000 + i, &bounds, &start, Some(&tracked)).map_err(|e| format!("tracked {i}: {e}"))?;
        if d.steps().iter().any(|m| matches!(m, Move::Collapse { end } if end.edge == tracked)) {
            return Err(format!("tracked {i}: generator collapsed the tracked edge"));
        }
        let p = deformation_to_moves_avoiding(&d, Some(&tracked)).map_err(|e| format!("tracked {i}: {e}"))?;
        check_pipeline(ledger, &format!("tracked {i}"), &d, &p)?;
        for m in &p.moves {
            if let Move::Slide(s) = m {
                slides += 1;
                if s.over.iter().any(|o| o.edge == tracked) {
                    return Err(format!("tracked {i}: slide over the tracked edge `{tracked}`"));
                }
            }
        }
    }
    Ok(format!("{free} ascending-free cases emit slides only; 50 tracked cases, {slides} slides, none over the tracked edge"))
}

fn criterion_4(ledger: &Ledger) -> Outcome {
    if !ledger.violations.is_empty() {
        return Err(format!("{} violations, first: {}", ledger.violations.len(), ledger.violations[0]));
    }
    if ledger.applications < 10_000 {
        return Err(format!("only {} move applications checked", ledger.applications));
    }
    Ok(format!("{} move applications preserve abelianization and betti (minor-gcd oracle; library agrees)", ledger.applications))
}

#[derive(Clone, Copy)]
enum Slot {
    LoopU(i64, i64),
    LoopV(i64, i64),
    Edge(i64, i64),
}

fn family() -> Vec<LabeledGraph> {
    let signed = |lo: i64| (lo..=6).flat_map(|x| [x, -x]).collect::<Vec<_>>();
    let mut loops = Vec::new();
    for a in 1..=6 {
        for &b in &signed(1) {
            // orientation swap: (a, b) ~ (|b|, sign(b)·a)
            if (a, b) <= (b.abs(), b.signum() * a) {
                loops.push((a, b));
            }
        }
    }
    let mut edges = Vec::new();
    for a in 2..=6 {
        for &b in &signed(2) {
            edges.push((a, b));
        }
    }
    let build = |slots: &[Slot]| {
        let mut g = LabeledGraph::new().with_vertex("u");
        for (k, s) in slots.iter().enumerate() {
            let id: EdgeId = format!("e{k}").as_str().into();
            let (x, a, y, b) = match *s {
                Slot::LoopU(a, b) => ("u", a, "u", b),
                Slot::LoopV(a, b) => ("v", a, "v", b),
                Slot::Edge(a, b) => ("u", a, "v", b),
            };
            g.add_vertex(x);
            g.add_vertex(y);
            g.insert_edge(id, End::new(x, a), End::new(y, b));
        }
        g
    };
    let mut out = Vec::new();
    let one: Vec<Slot> = loops.iter().map(|&(a, b)| Slot::LoopU(a, b)).collect();
    let two: Vec<Slot> = one
        .iter()
        .cloned()
        .chain(loops.iter().map(|&(a, b)| Slot::LoopV(a, b)))
        .chain(edges.iter().map(|&(a, b)| Slot::Edge(a, b)))
        .collect();
    for pool in [&one, &two] {
        let n = pool.len();
        for i in 0..n {
            out.push(build(&[pool[i]]));
            for j in i..n {
                out.push(build(&[pool[i], pool[j]]));
                for k in j..n {
                    out.push(build(&[pool[i], pool[j], pool[k]]));
                }
            }
        }
    }
    out.retain(|g| g.is_valid() && g.is_reduced() && !g.has_unit_unit_loop() && !g.is_single_ascending_loop());
    out
}

fn criterion_5() -> Outcome {
    let t = Instant::now();
    let classes: BTreeSet<_> = family().iter().map(|g| canonical_form(g).unwrap()).collect();
    let mut disagreements = Vec::new();
    let mut counts: BTreeMap<String, usize> = BTreeMap::new();
    for k in &classes {
        let g = k.representative();
        let a = is_rigid_conditions(&g).map_err(|e| e.to_string())?.status;
        let b = is_rigid_moves(&g).map_err(|e| e.to_string())?.status;
        *counts.entry(format!("{a:?}")).or_default() += 1;
        if a != b {
            disagreements.push(format!("{g}: conditions {a:?}, moves {b:?}"));
        }
    }
    let secs = t.elapsed().as_secs_f64();
    if !disagreements.is_empty() {
        return Err(format!("{} of {} classes disagree, e.g. {}", disagreements.len(), classes.len(), disagreements[0]));
    }
    if secs >= 120.0 {
        return Err(format!("agreement on {} classes but took {secs:.1}s", classes.len()));
    }
    Ok(format!("{} classes agree ({counts:?}) in {secs:.1}s", classes.len()))
}

fn criterion_6() -> Outcome {
    let l23 = LabeledGraph::single_loop(2, 3);
    for v in [is_rigid_conditions(&l23), is_rigid_moves(&l23)] {
        if v.map_err(|e| e.to_string())?.status != RigidityStatus::Rigid {
            return Err("loop (2,3) is not RIGID".into());
        }
    }
    let l24 = LabeledGraph::single_loop(2, 4);
    for v in [is_rigid_conditions(&l24), is_rigid_moves(&l24)] {
        if v.map_err(|e| e.to_string())?.status != RigidityStatus::NotRigid {
            return Err("loop (2,4) is not NOT_RIGID".into());
        }
    }
    let target = LabeledGraph::from_edges(&[("l", "v", 1, "v", 2), ("e", "v", 2, "w", 2)]);
    match find_path(&l24, &target, &Bounds::default(), 1).map_err(|e| e.to_string())? {
        PathOutcome::Found { moves, .. } if moves.len() == 1 && matches!(moves[0], Move::AMove(_)) => {}
        other => return Err(format!("loop (2,4) path: {other:?}")),
    }

    let star = LabeledGraph::from_edges(&[("e", "p", 1, "q", 2), ("e2", "p", 1, "r", 3), ("f2", "p", 1, "q", 1)]);
    let o = find_whitehead_pair(&star, &Forest::new(["e"]), &Forest::new(["e2", "f2"])).map_err(|e| e.to_string())?;
    if o.conclusion != Conclusion::Two {
        return Err(format!("star peak gives {:?}", o.conclusion));
    }
    let fac = factor_whitehead(&o.whitehead).map_err(|e| e.to_string())?;
    let end = moves::replay(&fac.start, &fac.moves).map_err(|(_, e)| e.to_string())?.pop().unwrap();
    if !(fac.moves.len() == 1 && matches!(fac.moves[0], Move::AInverse(_)) && equivalent(&end, &LabeledGraph::single_loop(3, 6)).unwrap()) {
        return Err(format!("star peak factors to {:?}", fac.moves));
    }

    let cyc = LabeledGraph::from_edges(&[("e", "v", 1, "w", 2), ("e2", "v", 3, "w", 1), ("d", "v", 6, "u", 5)]);
    let o = find_whitehead_pair(&cyc, &Forest::new(["e"]), &Forest::new(["e2"])).map_err(|e| e.to_string())?;
    let fac = factor_whitehead(&o.whitehead).map_err(|e| e.to_string())?;
    let graphs = moves::replay(&fac.start, &fac.moves).map_err(|(_, e)| e.to_string())?;
    let before = LabeledGraph::from_edges(&[("l", "a", 1, "a", 6), ("d", "a", 12, "b", 5)]);
    let after = LabeledGraph::from_edges(&[("l", "a", 1, "a", 6), ("d", "a", 6, "b", 5)]);
    let shape = matches!(fac.moves.as_slice(), [Move::Induction(_), Move::Slide(_)]);
    if !(shape && equivalent(&graphs[0], &before).unwrap() && equivalent(graphs.last().unwrap(), &after).unwrap()) {
        return Err(format!("cycle peak factors to {:?}", fac.moves));
    }
    Ok("loop (2,3) RIGID; loop (2,4) NOT_RIGID, one A-move away; A⁻¹ to loop (3,6); induction + slide 12 → 6".into())
}

fn cli(args: &[&str]) -> (i32, Vec<u8>, Vec<u8>) {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let mut argv = vec!["gbs-deform"];
    argv.extend_from_slice(args);
    let code = gbs_deform::cli::run(argv, &mut out, &mut err);
    (code, out, err)
}

fn criterion_7() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let write = |name: &str, g: &LabeledGraph| {
        let p = dir.path().join(name);
        std::fs::write(&p, gbs_deform::document::serialize_graph(g)).unwrap();
        p.to_str().unwrap().to_string()
    };
    let l24 = write("l24.json", &LabeledGraph::single_loop(2, 4));
    let mixed = write("mixed.json", &LabeledGraph::from_edges(&[("l", "v", 2, "v", 4), ("e", "v", 6, "w", 3)]));
    let exp = write("exp.json", &LabeledGraph::from_edges(&[("l", "v", 1, "v", 2), ("e", "v", 2, "w", 2)]));
    let (code, d, _) = cli(&["random-deform", &mixed, "--seed", "7"]);
    if code != 0 {
        return Err("random-deform failed".into());
    }
    let deformation = dir.path().join("d.json");
    std::fs::write(&deformation, &d).unwrap();
    let deformation = deformation.to_str().unwrap().to_string();
    let (code, script, _) = cli(&["factor", &deformation]);
    if code != 0 {
        return Err("factor failed".into());
    }
    let script_path = dir.path().join("s.json");
    std::fs::write(&script_path, &script).unwrap();
    let script_path = script_path.to_str().unwrap().to_string();

    let runs: Vec<Vec<&str>> = vec![
        vec!["validate", &mixed],
        vec!["reduce", &exp, "--trace"],
        vec!["moves", &mixed],
        vec!["apply", &mixed, &script_path, "--trace"],
        vec!["factor", &deformation, "--trace"],
        vec!["path", &l24, &exp, "--max-depth", "3"],
        vec!["orbit", &mixed, "--max-depth", "3", "--max-label", "48"],
        vec!["rigid", &mixed, "--max-depth", "2"],
        vec!["random-deform", &mixed, "--seed", "11", "--trace"],
        vec!["export-dot", &mixed],
    ];
    for args in &runs {
        let first = cli(args);
        if first.0 != 0 {
            return Err(format!("{args:?} exited {}: {}", first.0, String::from_utf8_lossy(&first.2)));
        }
        if cli(args) != first {
            return Err(format!("{args:?} is not byte-identical on re-run"));
        }
    }
    let orbit_keys = |jobs: &str| -> Result<BTreeSet<String>, String> {
        let (code, out, _) = cli(&["orbit", &mixed, "--max-depth", "4", "--max-label", "48", "--jobs", jobs]);
        if code != 0 {
            return Err("orbit failed".into());
        }
        let v: serde_json::Value = serde_json::from_slice(&out).map_err(|e| e.to_string())?;
        Ok(v["keys"].as_array().unwrap().iter().map(|k| k.as_str().unwrap().to_string()).collect())
    };
    let (one, four) = (orbit_keys("1")?, orbit_keys("4")?);
    if one != four {
        return Err(format!("orbit --jobs 4 gives {} keys, --jobs 1 gives {}", four.len(), one.len()));
    }
    Ok(format!("{} commands byte-identical on re-run; orbit --jobs 4 = --jobs 1 ({} keys)", runs.len(), one.len()))
}

fn main() {
    let mut ledger = Ledger::default();
    let mut cases = Vec::new();
    let mut failed = false;
    let mut report = |n: usize, name: &str, o: Outcome, t: Instant| {
        let secs = t.elapsed().as_secs_f64();
        match o {
            Ok(m) => println!("criterion {n} ({name}): PASS [{secs:.1}s] {m}"),
            Err(m) => {
                failed = true;
                println!("criterion {n} ({name}): FAIL [{secs:.1}s] {m}");
            }
        }
    };
    let t = Instant::now();
    report(1, "round-trip", criterion_1(&mut ledger), t);
    let t = Instant::now();
    report(2, "factorization pipeline", criterion_2(&mut ledger, &mut cases), t);
    let t = Instant::now();
    report(3, "slides only / edge avoidance", criterion_3(&mut ledger, &cases), t);
    let t = Instant::now();
    report(4, "invariant conservation", criterion_4(&ledger), t);
    let t = Instant::now();
    report(5, "rigidity cross-check", criterion_5(), t);
    let t = Instant::now();
    report(6, "golden examples", criterion_6(), t);
    let t = Instant::now();
    report(7, "determinism", criterion_7(), t);
    if failed {
        std::process::exit(1);
    }
}
