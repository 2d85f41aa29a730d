//! Acceptance run: one PASS/FAIL line per criterion, with instance counts and the
//! time limits that apply. Every corpus is seeded.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::ControlFlow;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use regtree::algebras::{recognises, rho, Reach, ReachabilityAlgebra};
use regtree::automata::{accepts, bisim_closure, brute_force_winners, check_run, compile_algebra, emit_disjunctive_formula, zielonka};
use regtree::corpus::{alphabet, enumerate_closed_systems, Gen, Shape};
use regtree::equiv::{system_key, unfold_equivalent};
use regtree::model::canon::isomorphic;
use regtree::model::expr::from_expression;
use regtree::model::ts::{decode_ts, encode_ts};
use regtree::model::{Nested, SetSystem, Sym, Target};
use regtree::monad::{atomic, flatten, hole_vertex, lift, pieces, plug, recompose, rename};
use regtree::morphism::{check_morphism, find_morphism_with, for_each_morphism, mediating, pullback, SearchMode, VertexMap};
use regtree::resolutions::{
    check_flatten_resolution, context_smallification, direct_resolutions, direct_to_flatten_resolution, for_each_direct_resolution, is_small, profile,
    smallify_flatten_resolution, yield_equal_bounded, Bounds,
};
use regtree::ya::shipped::{self, avoid, avoid_ts};
use regtree::ya::{
    build_delta, check_delta, eval_lasso, eval_word, extremal_context, mutate_component, rep_leq, universal_branch_check, validate_presentation, Presentation,
    RankedElementRep, YLabel,
};

type Outcome = Result<String, String>;

struct Criterion {
    id: usize,
    name: &'static str,
    limit: Option<Duration>,
    run: fn() -> Outcome,
}

fn main() -> ExitCode {
    let filter: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let criteria = [
        Criterion { id: 1, name: "monad laws", limit: Some(Duration::from_secs(60)), run: monad_laws },
        Criterion { id: 2, name: "pullback universality", limit: None, run: pullback_universality },
        Criterion { id: 3, name: "direct resolutions of a plugged sum", limit: Some(Duration::from_secs(1)), run: plugged_sum },
        Criterion { id: 4, name: "reachability algebra", limit: None, run: reachability },
        Criterion { id: 5, name: "profiles of the T_n family", limit: Some(Duration::from_secs(30)), run: profiles },
        Criterion { id: 6, name: "congruence suites", limit: None, run: congruences },
        Criterion { id: 7, name: "context decomposition", limit: None, run: context_decomposition },
        Criterion { id: 8, name: "smallification", limit: None, run: smallification },
        Criterion { id: 9, name: "branch semantics", limit: None, run: branch_semantics },
        Criterion { id: 10, name: "end-to-end automaton pipeline", limit: Some(Duration::from_secs(120)), run: pipeline },
        Criterion { id: 11, name: "parity game engine", limit: None, run: games },
        Criterion { id: 12, name: "delta construction", limit: None, run: delta_construction },
    ];
    let mut failed = 0;
    for c in criteria.iter().filter(|c| filter.is_none_or(|f| f == c.id)) {
        let start = Instant::now();
        let outcome = (c.run)();
        let took = start.elapsed();
        let late = c.limit.is_some_and(|l| took > l);
        let limit = c.limit.map_or(String::new(), |l| format!(" / limit {} s", l.as_secs()));
        let (ok, detail) = match outcome {
            Ok(d) if !late => (true, d),
            Ok(d) => (false, format!("{d}; over time")),
            Err(d) => (false, d),
        };
        failed += usize::from(!ok);
        println!("{} {:>2} {}: {} [{:.2} s{}]", if ok { "PASS" } else { "FAIL" }, c.id, c.name, detail, took.as_secs_f64(), limit);
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: regtree::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn sigma3() -> regtree::model::alphabet::RankedAlphabet {
    alphabet(&[("a3", 3), ("a2", 2), ("b1", 1), ("a1", 1), ("c0", 0), ("b0", 0)])
}

// 1 -----------------------------------------------------------------------------

fn monad_laws() -> Outcome {
    let mut g = Gen::new(1);
    let alpha = sigma3();
    let shape = Shape::set_system(4);
    for i in 0..1000 {
        let rank = g.between(0, 3);
        let s = g.set_system(&alpha, rank, shape);
        let unit = ok(flatten(&atomic(s.clone())))?;
        ensure(isomorphic(&unit, &s), || format!("flatten(atomic(S)) differs from S at instance {i}"))?;
        let lifted = ok(flatten(&lift(&s, |a| atomic(a.clone()))))?;
        ensure(isomorphic(&lifted, &s), || format!("flatten(lift(atomic)(S)) differs from S at instance {i}"))?;
        let s3 = g.nested3(&alpha, rank, shape, 3);
        let outer_first = ok(flatten(&ok(flatten(&s3))?))?;
        let mut flat_labels = Vec::with_capacity(s3.len());
        for v in &s3.vertices {
            flat_labels.push(ok(flatten(&v.label))?);
        }
        let inner_first = lift(&s3.map_labels(|i, _| i), |&i| flat_labels[i].clone());
        let inner_first = ok(flatten(&inner_first))?;
        ensure(isomorphic(&outer_first, &inner_first), || format!("associativity fails at instance {i}"))?;
    }
    Ok("1000 instances, three laws each, 0 failures".into())
}

// 2 -----------------------------------------------------------------------------

/// A morphic preimage of `s`: a locally surjective cover with some edges and flags dropped.
fn sub_cover(g: &mut Gen, s: &SetSystem<Sym>) -> (SetSystem<Sym>, VertexMap) {
    let (mut c, map) = g.locally_surjective_cover(s);
    if g.chance(0.5) {
        let drop: Vec<_> = c.edges.iter().copied().filter(|_| g.chance(0.2)).collect();
        for e in drop {
            c.edges.remove(&e);
        }
        for v in &mut c.vertices {
            if v.initial && g.chance(0.2) {
                v.initial = false;
            }
        }
    }
    (c, map)
}

fn pullback_universality() -> Outcome {
    let mut g = Gen::new(2);
    let alpha = alphabet(&[("a2", 2), ("a1", 1), ("c0", 0)]);
    let (mut transfers, mut searched) = (0, 0);
    for i in 0..300 {
        let (t, s, eta, s2, eta2) = loop {
            let rank = g.between(0, 1);
            let t = g.set_system(&alpha, rank, Shape::set_system(3));
            let (s, eta) = sub_cover(&mut g, &t);
            let (s2, eta2) = sub_cover(&mut g, &t);
            if s.len() <= 5 && s2.len() <= 5 {
                break (t, s, eta, s2, eta2);
            }
        };
        let pb = ok(pullback(&s, &eta, &s2, &eta2, false))?;
        let p = &pb.system;
        ensure(ok(check_morphism(p, &s, &pb.left))?.is_morphism(), || format!("left projection is not a morphism at {i}"))?;
        ensure(ok(check_morphism(p, &s2, &pb.right))?.is_morphism(), || format!("right projection is not a morphism at {i}"))?;
        let commutes = (0..p.len()).all(|v| eta[pb.left[v]] == eta2[pb.right[v]]);
        ensure(commutes, || format!("square does not commute at {i}"))?;
        // a test object Q over the square: part of a morphic preimage of P
        if !p.is_empty() {
            let (q0, pi0) = sub_cover(&mut g, p);
            let keep: Vec<bool> = (0..q0.len()).map(|v| v < 5).collect();
            let q = q0.restrict(&keep);
            let pi: VertexMap = (0..q0.len()).filter(|&v| keep[v]).map(|v| pi0[v]).collect();
            let tau: VertexMap = pi.iter().map(|&x| pb.left[x]).collect();
            let tau2: VertexMap = pi.iter().map(|&x| pb.right[x]).collect();
            ensure(ok(check_morphism(&q, &s, &tau))?.is_morphism(), || format!("test leg is not a morphism at {i}"))?;
            let mut found: Vec<VertexMap> = Vec::new();
            for_each_morphism(&q, p, SearchMode::default(), |m| {
                if m.iter().zip(&tau).all(|(&x, &y)| pb.left[x] == y) && m.iter().zip(&tau2).all(|(&x, &y)| pb.right[x] == y) {
                    found.push(m.to_vec());
                }
                ControlFlow::Continue(())
            });
            searched += 1;
            let med = mediating(&pb, &tau, &tau2);
            ensure(found.len() == 1 && med.as_ref() == Some(&found[0]), || {
                format!("instance {i}: {} mediating morphisms found, constructed {med:?}", found.len())
            })?;
        }
        if ok(check_morphism(&s, &t, &eta))?.is_locally_surjective() {
            transfers += 1;
            ensure(ok(check_morphism(p, &s2, &pb.right))?.is_locally_surjective(), || format!("local surjectivity not transferred at {i}"))?;
        }
        if ok(check_morphism(&s2, &t, &eta2))?.is_locally_surjective() {
            transfers += 1;
            ensure(ok(check_morphism(p, &s, &pb.left))?.is_locally_surjective(), || format!("local surjectivity not transferred at {i}"))?;
        }
    }
    Ok(format!("300 triples, {searched} exhaustive mediating searches, {transfers} surjectivity transfers"))
}

// 3 -----------------------------------------------------------------------------

fn e(text: &str) -> SetSystem<Sym> {
    from_expression(text, None).expect("well-formed expression")
}

fn plugged_sum() -> Outcome {
    let mut c = SetSystem::new(0);
    let h = c.add_vertex("h", Sym::hole(1), true, false);
    let b = c.add_vertex("b", Sym::new("b", 0), false, false);
    let cc = c.add_vertex("c", Sym::new("c", 0), false, false);
    c.add_edge(h, 1, b);
    c.add_edge(h, 1, cc);
    let s = e("a2(x1, x1)");
    let res = direct_resolutions(&ok(plug(&c, &s))?, Bounds::memory(0));
    let expected: BTreeSet<_> = ["a2(b,b)", "a2(b,c)", "a2(c,b)", "a2(c,c)"].iter().map(|x| system_key(&e(x)).unwrap()).collect();
    let got: BTreeSet<_> = res.keys.iter().cloned().collect();
    ensure(got == expected, || format!("{} classes, not the expected four", got.len()))?;
    let alone = direct_resolutions(&s, Bounds::memory(0));
    ensure(alone.systems.len() == 1, || format!("S alone has {} classes", alone.systems.len()))?;
    Ok("4 classes for C[S], 1 for S".into())
}

// 4 -----------------------------------------------------------------------------

/// Whether a vertex labelled `b…` is reachable from the initial vertex.
fn b_reachable(s: &SetSystem<Sym>) -> bool {
    let mut seen = vec![false; s.len()];
    let mut queue: VecDeque<usize> = s.initial().into_iter().collect();
    for &v in &queue {
        seen[v] = true;
    }
    while let Some(v) = queue.pop_front() {
        if s.vertices[v].label.name.starts_with('b') {
            return true;
        }
        for (_, t) in s.out(v) {
            if let Target::Vertex(w) = t {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    false
}

fn reachability() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b1"]);
    let value = rho(&alg, &e("a(x3, x1, x1)")).map_err(|e| e.to_string())?;
    ensure(value == Reach::set(3, [1, 3]), || format!("value of a(x3,x1,x1) is {value}"))?;
    let bottom = [Reach::bottom(0)];
    let empty = [Reach::set(0, [])];
    let check = |s: &SetSystem<Sym>| -> Result<(), String> {
        let bad = b_reachable(s);
        let by_bottom = ok(recognises(&alg, &bottom, s))?;
        let by_empty = ok(recognises(&alg, &empty, s))?;
        ensure(by_bottom == bad && by_empty == !bad, || format!("recognition disagrees with reachability on {}", s.summary()))
    };
    let mut count = 0;
    let mut failure = None;
    enumerate_closed_systems(&alphabet(&[("a2", 2), ("b1", 1), ("c0", 0)]), 4, &mut |s| {
        count += 1;
        if failure.is_none() {
            failure = check(s).err();
        }
    });
    if let Some(f) = failure {
        return Err(f);
    }
    let mut g = Gen::new(4);
    let alpha = alphabet(&[("a2", 2), ("b1", 1), ("c0", 0)]);
    for _ in 0..500 {
        check(&g.system(&alpha, 0, 8))?;
    }
    Ok(format!("{{1,3}} as expected; {count} exhaustive systems and 500 random systems agree with reachability"))
}

// 5 -----------------------------------------------------------------------------

fn t_n(n: usize) -> SetSystem<Sym> {
    let mut text = "a".to_string();
    for _ in 0..n {
        text = format!("a2({text}, x1)");
    }
    SetSystem { rank: 1, ..e(&text) }
}

fn profiles() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    let max_m = 5;
    let mut all = BTreeMap::new();
    for n in 1..=5 {
        let p = ok(profile(&alg, &t_n(n), false, false, Bounds::memory(0), max_m))?;
        ensure(p.complete, || format!("profile of T_{n} hit the enumeration limit"))?;
        all.insert(n, p.pairs);
    }
    for n in 1..=4 {
        let mut expect = BTreeSet::new();
        for m in 1..=max_m {
            for mask in 1u32..(1 << m) {
                if mask.count_ones() as usize <= n {
                    expect.insert((Reach::set(m, (1..=m).filter(|i| mask >> (i - 1) & 1 == 1)), vec![1; m]));
                }
            }
        }
        ensure(all[&n] == expect, || format!("profile of T_{n} differs from the expected set"))?;
    }
    for n in 1..=4 {
        for m in n + 1..=max_m {
            let full = (Reach::set(m, 1..=m), vec![1; m]);
            ensure(all[&m].contains(&full) && !all[&n].contains(&full), || format!("T_{m} and T_{n} are not separated at [{m}]"))?;
        }
    }
    Ok("T_1..T_4 exact for m ≤ 5; all separations found".into())
}

// 6 -----------------------------------------------------------------------------

fn congruences() -> Outcome {
    let mut g = Gen::new(6);
    let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0)]);
    let bounds = Bounds::memory(1);
    // unfold-equivalence: inner labels replaced by unfoldings, and the outer pattern unfolded
    for i in 0..200 {
        let n: Nested<Sym> = g.shaped(0, Shape::system(3), &mut |g| {
            let r = g.between(0, 2);
            g.system(&alpha, r, 3)
        });
        let inner_swapped = n.map_labels(|_, l| l.clone());
        let inner_swapped = {
            let mut x = inner_swapped;
            for v in &mut x.vertices {
                v.label = g.unfolding(&v.label).0;
            }
            x
        };
        let flat = ok(flatten(&n))?;
        ensure(ok(unfold_equivalent(&flat, &ok(flatten(&inner_swapped))?))?.holds(), || format!("inner congruence fails at {i}"))?;
        let (outer, _) = g.unfolding(&n);
        ensure(ok(unfold_equivalent(&flat, &ok(flatten(&outer))?))?.holds(), || format!("outer congruence fails at {i}"))?;
    }
    // bounded yield-equivalence: inner set-systems replaced by locally surjective covers
    let mut sizes = 0;
    for i in 0..200 {
        let (n, n2, flat, flat2) = loop {
            let n: Nested<Sym> = g.shaped(0, Shape::set_system(3), &mut |g| {
                let r = g.between(0, 2);
                g.set_system(&alpha, r, Shape::set_system(2))
            });
            let mut n2 = n.clone();
            for v in &mut n2.vertices {
                v.label = g.locally_surjective_cover(&v.label).0;
            }
            let flat = ok(flatten(&n))?;
            let flat2 = ok(flatten(&n2))?;
            if flat.len().max(flat2.len()) <= 8 {
                break (n, n2, flat, flat2);
            }
        };
        let _ = (n, n2);
        sizes += flat2.len();
        if let Some((left, w)) = ok(yield_equal_bounded(&flat, &flat2, bounds))? {
            let side = if left { "original" } else { "replaced" };
            return Err(format!("yield congruence fails at {i}: a yield of the {side} flattening is missing: {}", w.summary()));
        }
    }
    Ok(format!("200 unfold cases (inner and outer), 200 yield cases at k=1 (flattenings ≤ 8 vertices, {sizes} vertices total)"))
}

// 7 -----------------------------------------------------------------------------

fn context_decomposition() -> Outcome {
    let mut g = Gen::new(7);
    let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0), ("b0", 0)]);
    for i in 0..200 {
        let k = g.between(1, 2);
        let c = g.context(&alpha, k, Shape::set_system(4));
        let h = ok(hole_vertex(&c))?;
        let r = ok(recompose(&ok(pieces(&c))?, c.vertices[h].label.clone()))?;
        if let Some((_, w)) = ok(yield_equal_bounded(&c, &r, Bounds::memory(1)))? {
            return Err(format!("context {i} and its recomposition have different yields: {}", w.summary()));
        }
        let map = find_morphism_with(&r, &c, SearchMode { locally_surjective: true })
            .ok_or_else(|| format!("no locally surjective morphism from the recomposition at {i}"))?;
        ensure(ok(check_morphism(&r, &c, &map))?.is_locally_surjective(), || format!("found map is not locally surjective at {i}"))?;
    }
    Ok("200 contexts: bounded yields equal, recomposition morphism found".into())
}

// 8 -----------------------------------------------------------------------------

/// A closed system of set-systems in which one vertex reuses its only variable in
/// many directions and sends it to several subsystems, so that resolutions tend to
/// be large.
fn wide_nested(g: &mut Gen) -> Nested<Sym> {
    let alpha = alphabet(&[("a1", 1), ("b1", 1), ("c0", 0), ("b0", 0)]);
    let mut n: Nested<Sym> = SetSystem::new(0);
    let width = g.between(3, 5);
    let mut hub = SetSystem::new(1);
    let a = hub.add_vertex("w", Sym::new(format!("a{width}"), width), true, false);
    for d in 1..=width {
        hub.add_var_edge(a, d, 1);
    }
    let h = n.add_vertex("hub", hub, true, false);
    let leaves = g.between(2, 5);
    for j in 0..leaves {
        let inner = g.set_system(&alpha, 0, Shape { var_chance: 0.0, ..Shape::set_system(2) });
        let t = n.add_vertex(format!("t{j}"), inner, false, false);
        n.add_edge(h, 1, t);
    }
    n
}

fn smallification() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b1", "b0"]);
    // rank-1 reachability values: ⊥, ∅ and {1}
    let bound = 3;
    let mut g = Gen::new(8);
    let alpha = alphabet(&[("a5", 5), ("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0), ("b0", 0)]);
    let mut merged = 0;
    for i in 0..200 {
        let m = g.between(1, 5);
        let t = g.system(&alpha, m, 3);
        let c = g.context(&alpha, m, Shape::system(3));
        let n = g.between(1, 2);
        let sigma: Vec<usize> = (0..m).map(|_| g.between(1, n)).collect();
        let sm = ok(context_smallification(&alg, &t, &c, &sigma))?;
        let back: Vec<usize> = sm.tau.iter().map(|&k| sigma[sm.tau_prime[k - 1] - 1]).collect();
        ensure(back == sigma, || format!("σ∘τ′∘τ ≠ σ at {i}"))?;
        let small: Vec<usize> = sm.tau_prime.iter().map(|&j| sigma[j - 1]).collect();
        ensure(is_small(&small, bound), || format!("σ∘τ′ is not small at {i}"))?;
        let through: Vec<usize> = sm.tau.iter().map(|&k| sm.tau_prime[k - 1]).collect();
        let before = ok(rho(&alg, &ok(plug(&c, &t))?))?;
        let after = ok(rho(&alg, &ok(plug(&c, &ok(rename(&through, m, &t))?))?))?;
        ensure(before == after, || format!("value changes from {before} to {after} at {i}"))?;
        merged += usize::from(sm.m2 < m);
    }
    let mut shrunk = 0;
    for i in 0..100 {
        let n = if i % 2 == 0 { wide_nested(&mut g) } else { g.nested(&alpha, 0, Shape { var_chance: 0.0, ..Shape::set_system(3) }, 2) };
        let flat = ok(flatten(&n))?;
        let mut found: Vec<(SetSystem<Sym>, VertexMap)> = Vec::new();
        for_each_direct_resolution(&flat, Bounds { memory: 1, limit: 2000 }, |r, eta| {
            found.push((r.clone(), eta.to_vec()));
            ControlFlow::Continue(())
        });
        if found.is_empty() {
            continue;
        }
        let (r, eta) = if i % 4 == 0 { found.iter().max_by_key(|(r, _)| r.len()).unwrap().clone() } else { g.pick(&found).clone() };
        let rec = ok(direct_to_flatten_resolution(&n, &r, Some(&eta)))?;
        let (t2, w2) = ok(smallify_flatten_resolution(&alg, &n, &rec.system, &rec.witness))?;
        ensure(ok(check_flatten_resolution(&n, &t2, &w2))?.holds(), || format!("smallified witness invalid at {i}"))?;
        ensure(w2.sigma.iter().all(|s| is_small(s, bound)), || format!("some σ_t is still large at {i}"))?;
        let before = ok(rho(&alg, &ok(flatten(&rec.system))?))?;
        let after = ok(rho(&alg, &ok(flatten(&t2))?))?;
        let direct = ok(rho(&alg, &r))?;
        ensure(before == after && after == direct, || format!("value changes at {i}: {direct} / {before} / {after}"))?;
        shrunk += usize::from(rec.witness.sigma.iter().any(|s| !is_small(s, bound)));
    }
    Ok(format!("200 contexts ({merged} with merged directions), 100 flatten-resolutions ({shrunk} needed shrinking)"))
}

// 9 -----------------------------------------------------------------------------

/// All labels over the presentation: unary values, then terminal values.
fn labels(p: &Presentation) -> Vec<YLabel> {
    (0..p.y1.len()).map(YLabel::One).chain((0..p.y0.len()).map(YLabel::Zero)).collect()
}

/// Every branch from vertex 0, each vertex at most `reps` times on the branch; finite
/// branches at terminals, infinite ones as the lasso closed at the first repeat.
fn brute_branches(p: &Presentation, g: &SetSystem<YLabel>, reps: usize) -> Result<bool, String> {
    let succ: Vec<Vec<usize>> = (0..g.len()).map(|v| g.out(v).filter_map(|(_, t)| if let Target::Vertex(w) = t { Some(w) } else { None }).collect()).collect();
    fn walk(p: &Presentation, g: &SetSystem<YLabel>, succ: &[Vec<usize>], path: &mut Vec<usize>, reps: usize) -> Result<bool, String> {
        let v = *path.last().unwrap();
        let word: Vec<usize> = path[..path.len() - 1]
            .iter()
            .map(|&u| match g.vertices[u].label {
                YLabel::One(y) => y,
                YLabel::Zero(_) => unreachable!("terminals end branches"),
            })
            .collect();
        match g.vertices[v].label {
            YLabel::Zero(t) => Ok(p.accepting.contains(&eval_word(p, &word, t))),
            YLabel::One(_) => {
                for &w in &succ[v] {
                    if let Some(first) = path.iter().position(|&u| u == w) {
                        let ys: Vec<usize> = path
                            .iter()
                            .map(|&u| match g.vertices[u].label {
                                YLabel::One(y) => y,
                                YLabel::Zero(_) => unreachable!(),
                            })
                            .collect();
                        let value = eval_lasso(p, &ys[..first], &ys[first..]).map_err(|e| e.to_string())?;
                        if !p.accepting.contains(&value) {
                            return Ok(false);
                        }
                    }
                    if path.iter().filter(|&&u| u == w).count() < reps {
                        path.push(w);
                        let fine = walk(p, g, succ, path, reps)?;
                        path.pop();
                        if !fine {
                            return Ok(false);
                        }
                    }
                }
                Ok(true)
            }
        }
    }
    walk(p, g, &succ, &mut vec![0], reps)
}

/// Whether vertex order `0..n` is the canonical topological order of the forward
/// edges: at each step the placed vertex has the least (label, placed predecessors)
/// key among the available ones. Every isomorphism class has such an order.
fn canonical_order(n: usize, lab: &[YLabel], edges: &[(usize, usize)]) -> bool {
    let preds: Vec<Vec<usize>> = (0..n).map(|j| edges.iter().filter(|e| e.1 == j).map(|e| e.0).collect()).collect();
    for t in 1..n {
        let key = |v: usize| (lab[v], preds[v].clone());
        let available = (t..n).filter(|&v| preds[v].iter().all(|&u| u < t));
        if available.into_iter().any(|v| key(v) < key(t)) {
            return false;
        }
    }
    true
}

fn branch_graph(lab: &[YLabel], edges: &[(usize, usize)]) -> SetSystem<YLabel> {
    let mut g = SetSystem::new(0);
    for (v, &l) in lab.iter().enumerate() {
        g.add_vertex(format!("v{v}"), l, v == 0, false);
    }
    for &(u, w) in edges {
        g.add_edge(u, 1, w);
    }
    g
}

fn branch_semantics() -> Outcome {
    let p = avoid();
    let report = validate_presentation(&p);
    ensure(report.holds(), || format!("AVOID fails validation: {:?}", report.violations.first()))?;
    let labs = labels(&p);
    let reps = p.y1.len() + 1;
    let (mut acyclic, mut cyclic) = (0usize, 0usize);
    for n in 1..=6 {
        for code in 0..labs.len().pow(n as u32) {
            let lab: Vec<YLabel> = (0..n).map(|v| labs[code / labs.len().pow(v as u32) % labs.len()]).collect();
            let pairs: Vec<(usize, usize)> = (0..n).filter(|&i| matches!(lab[i], YLabel::One(_))).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
            for mask in 0u64..(1 << pairs.len()) {
                let edges: Vec<(usize, usize)> = (0..pairs.len()).filter(|k| mask >> k & 1 == 1).map(|k| pairs[k]).collect();
                if !(1..n).all(|j| edges.iter().any(|e| e.1 == j)) || !canonical_order(n, &lab, &edges) {
                    continue;
                }
                let g = branch_graph(&lab, &edges);
                acyclic += 1;
                let fast = ok(universal_branch_check(&p, &g))?.accepted;
                ensure(fast == brute_branches(&p, &g, reps)?, || format!("acyclic graph disagrees: {lab:?} {edges:?}"))?;
                // close exactly one cycle: a back edge j → i with a unique path i → j
                let mut paths = vec![vec![0u64; n]; n];
                for i in (0..n).rev() {
                    paths[i][i] = 1;
                    for &(a, b) in &edges {
                        if a == i {
                            for k in 0..n {
                                paths[i][k] += paths[b][k];
                            }
                        }
                    }
                }
                for j in (0..n).filter(|&j| matches!(lab[j], YLabel::One(_))) {
                    for i in (0..=j).filter(|&i| paths[i][j] == 1) {
                        let mut with = edges.clone();
                        with.push((j, i));
                        let g = branch_graph(&lab, &with);
                        cyclic += 1;
                        let fast = ok(universal_branch_check(&p, &g))?.accepted;
                        ensure(fast == brute_branches(&p, &g, reps)?, || format!("single-cycle graph disagrees: {lab:?} {with:?}"))?;
                    }
                }
            }
        }
    }
    // shift laws of lassos: u·(v)^ω = (u v1)·(v2…v1)^ω = (u v)·v^ω = u·(v v)^ω
    let mut lassos = 0;
    for name in shipped::NAMES {
        let q = shipped::by_name(name).expect("shipped");
        let y = q.y1.len();
        for lu in 0..=4 {
            for lv in 1..=4 {
                for code in 0..y.pow((lu + lv) as u32) {
                    let w: Vec<usize> = (0..lu + lv).map(|k| code / y.pow(k as u32) % y).collect();
                    let (u, v) = w.split_at(lu);
                    let base = ok(eval_lasso(&q, u, v))?;
                    let mut u1 = u.to_vec();
                    u1.push(v[0]);
                    let mut rot = v[1..].to_vec();
                    rot.push(v[0]);
                    let uv = [u, v].concat();
                    let vv = [v, v].concat();
                    let variants = [ok(eval_lasso(&q, &u1, &rot))?, ok(eval_lasso(&q, &uv, v))?, ok(eval_lasso(&q, u, &vv))?];
                    ensure(variants.iter().all(|&x| x == base), || format!("{name}: shift law fails for u={u:?} v={v:?}"))?;
                    lassos += 1;
                }
            }
        }
    }
    Ok(format!("AVOID valid; {acyclic} acyclic and {cyclic} single-cycle graphs (up to isomorphism) agree; {lassos} lassos shift-invariant"))
}

// 10 ----------------------------------------------------------------------------

fn pipeline() -> Outcome {
    let aut = ok(compile_algebra(&avoid()))?;
    let mut count = 0;
    let mut failure = None;
    let check = |s: &SetSystem<Sym>| -> Result<(), String> {
        let m = ok(accepts(&aut, s))?;
        ensure(m.accepted == !b_reachable(s), || format!("verdict {} on {}", m.accepted, s.summary()))?;
        if let Some(run) = &m.run {
            ensure(ok(check_run(&aut, s, run))?.ok, || format!("returned run does not check on {}", s.summary()))?;
        }
        Ok(())
    };
    let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0)]);
    enumerate_closed_systems(&alpha, 4, &mut |s| {
        count += 1;
        if failure.is_none() {
            failure = check(s).err();
        }
    });
    if let Some(f) = failure {
        return Err(f);
    }
    let mut g = Gen::new(10);
    for _ in 0..500 {
        check(&g.system(&alpha, 0, 8))?;
    }
    let max_rank = 3;
    let closed = ok(bisim_closure(&ok(compile_algebra(&avoid_ts(max_rank)))?))?;
    for i in 0..500 {
        let ts = g.transition_system(5, &["b"], 2);
        let plain = encode_ts(&ts, None);
        let twin = g.bisimilar_encoding(&ts, max_rank);
        let x = ok(accepts(&closed, &plain))?.accepted;
        let y = ok(accepts(&closed, &twin))?.accepted;
        ensure(x == y, || format!("bisimilar pair {i} gets verdicts {x} and {y}"))?;
        let decoded = ok(decode_ts(&twin))?;
        let bad = (0..decoded.len()).any(|v| decoded.props[v].contains("b")) && {
            let s = encode_ts(&decoded, None);
            b_reachable(&s.map_labels(|_, l| Sym::new(if l.name.contains('b') { "b" } else { "a" }, l.rank)))
        };
        ensure(x == !bad, || format!("pair {i}: verdict {x} but a b-state reachable is {bad}"))?;
    }
    let text = ok(emit_disjunctive_formula(&closed))?;
    let golden = include_str!("golden/avoid_ts_formula.txt");
    ensure(text == golden, || format!("formula differs from the golden file:\n{text}"))?;
    for line in text.lines() {
        template_line(line)?;
    }
    Ok(format!("{count} exhaustive + 500 random systems agree; 500 bisimilar pairs agree; formula matches golden file"))
}

/// A line `δ(ν) = D1 ∨ … ∨ Dk` whose disjuncts are `false`, `t ∧ ∀z. false`, or
/// `∃x1,…,xm. b1(x1) ∧ … ∧ bm(xm) ∧ ∀z. (b1(z) ∨ … ∨ bm(z))` up to duplicate types.
fn template_line(line: &str) -> Result<(), String> {
    let bad = || format!("line does not follow the template: {line}");
    let (head, body) = line.split_once(" = ").ok_or_else(bad)?;
    ensure(head.starts_with("δ({") && head.ends_with("})"), bad)?;
    if body == "false" {
        return Ok(());
    }
    let parts: Vec<&str> = body.split(" ∨ (").collect();
    let wrapped = parts.len() > 1;
    for part in parts {
        let d = if wrapped { unwrap_once(part.strip_prefix('(').unwrap_or(part)) } else { part };
        if d.ends_with(" ∧ ∀z. false") && !d.starts_with('∃') {
            continue;
        }
        let (binder, rest) = d.strip_prefix('∃').and_then(|r| r.split_once(". ")).ok_or_else(bad)?;
        let vars: Vec<&str> = binder.split(',').collect();
        let (exists, forall) = rest.split_once(" ∧ ∀z. ").ok_or_else(bad)?;
        let atoms: Vec<&str> = exists.split(" ∧ ").collect();
        ensure(atoms.len() == vars.len(), bad)?;
        let mut types = BTreeSet::new();
        for (atom, x) in atoms.iter().zip(&vars) {
            let ty = atom.strip_suffix(&format!("({x})")).ok_or_else(bad)?;
            types.insert(ty.to_string());
        }
        let forall = forall.strip_prefix('(').map_or(forall, unwrap_once);
        let covered: BTreeSet<String> = forall.split(" ∨ ").map(|a| a.trim_end_matches("(z)").to_string()).collect();
        ensure(covered == types, bad)?;
    }
    Ok(())
}

fn unwrap_once(s: &str) -> &str {
    s.strip_suffix(')').unwrap_or(s)
}

// 11 ----------------------------------------------------------------------------

fn games() -> Outcome {
    let mut g = Gen::new(11);
    let mut positions = 0;
    for i in 0..500 {
        let game = g.parity_game(8, 4);
        positions += game.len();
        let sol = zielonka(&game);
        let brute = brute_force_winners(&game);
        ensure(sol.winner == brute, || format!("game {i}: zielonka {:?}, brute force {:?}", sol.winner, brute))?;
    }
    Ok(format!("500 games, {positions} positions, exact agreement"))
}

// 12 ----------------------------------------------------------------------------

fn delta_construction() -> Outcome {
    let mut g = Gen::new(12);
    let (mut raised, mut widened) = (0, 0);
    let mut per_name: BTreeMap<&str, usize> = BTreeMap::new();
    for i in 0..50 {
        let name = shipped::NAMES[i % shipped::NAMES.len()];
        let p = shipped::by_name(name).expect("shipped");
        let y = p.y1.len();
        let (a, ext) = 'sample: loop {
            let k = g.between(2, 3);
            let count = g.between(1, 2);
            let tuples: Vec<Vec<usize>> = (0..count).map(|_| (0..k).map(|_| g.below(y)).collect()).collect();
            let a = RankedElementRep::meet(k, tuples);
            for _ in 0..40 {
                let t: Vec<usize> = (0..=k).map(|_| g.below(y)).collect();
                if let Ok(ext) = extremal_context(&p, &t, &a) {
                    break 'sample (a, ext);
                }
            }
        };
        *per_name.entry(name).or_default() += 1;
        ensure(ext.holds(), || format!("instance {i} ({name}): extremal context fails its checks: {ext:?}"))?;
        let out = ok(build_delta(&p, &ext.m, &a))?;
        ensure(out.holds(), || format!("instance {i} ({name}): δ fails: {out:?}"))?;
        ensure(ok(rep_leq(&p, &out.delta, &a))?, || format!("instance {i}: δ not below a"))?;
        // control: a second tuple makes the element nondeterministic
        let tuple = out.delta.decomps.iter().next().cloned().expect("δ has a tuple");
        let other: Vec<usize> = tuple.iter().map(|&x| (x + 1) % y).collect();
        let wide = RankedElementRep::meet(a.rank, [tuple.clone(), other]).with_zero(out.delta.zero);
        ensure(!ok(check_delta(&p, &ext.m, &a, &wide))?.deterministic, || format!("instance {i}: widened δ passes as deterministic"))?;
        widened += 1;
        // control: raise one component past some tuple of a; ⊑ must fail
        let raise = (0..a.rank)
            .flat_map(|j| (0..y).map(move |v| (j, v)))
            .find(|&(j, v)| v != tuple[j] && p.leq1(tuple[j], v) && a.decomps.iter().any(|c| !p.leq1(v, c[j])));
        if let Some((j, v)) = raise {
            let up = mutate_component(&out.delta, j, v);
            ensure(!ok(check_delta(&p, &ext.m, &a, &up))?.below_rep, || format!("instance {i}: raised δ still below a"))?;
            raised += 1;
        }
    }
    Ok(format!("50 instances {per_name:?} pass; controls rejected: {widened} nondeterministic, {raised} raised"))
}
