//! Small worked examples with known answers, checked end to end. The CLI `suite`
//! command runs them; so does the test suite.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::algebras::{recognises, rho, Reach, ReachabilityAlgebra};
use crate::automata::compile_algebra;
use crate::corpus::{alphabet, Gen, Shape};
use crate::equiv::{bisimilar, system_key, unfold_equivalent};
use crate::model::canon::isomorphic;
use crate::model::expr::from_expression;
use crate::model::validate::validate;
use crate::model::{Nested, SetSystem, Sym, Target, TransitionSystem};
use crate::monad::{atomic, dupname, flatten, fuproot, lift, make_context, pieces, plug, recompose, uproot};
use crate::morphism::{check_morphism, compose, find_morphism, find_morphism_with, SearchMode};
use crate::resolutions::{
    check_flatten_resolution, direct_resolutions, direct_to_flatten_resolution, is_init_yield, profile, yield_subsumed, Bounds, FlattenResolutionWitness,
};
use crate::ya::{build_delta, det_elements, shipped, LetterValue};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

type Outcome = std::result::Result<String, String>;

const CHECKS: &[(&str, fn() -> Outcome)] = &[
    ("expression a2(x1, a2(b, x2)) is a system of rank 2", nested_expression),
    ("a2(b, c) has three vertices", three_vertices),
    ("two-cycle folds onto a loop", folding),
    ("locally surjective morphisms compose", composite_cover),
    ("flatten of atomic is the identity", unit_atomic),
    ("flatten of lifted atomic is the identity", unit_lift),
    ("dupname can break the system property", dupname_not_system),
    ("flatten(fuproot N) maps onto uproot(flatten N)", fuproot_cover),
    ("plugging a rank-2 system into a 2-context", plug_rank_two),
    ("pieces recompose onto their context", recomposition),
    ("C[S] with S = a2(x1,x1) has four direct resolutions", four_resolutions),
    ("a2(x1,x1) alone has one direct resolution", one_resolution),
    ("a choice of target is a direct resolution", choice_is_resolution),
    ("locally surjective morphism gives yield equivalence", cover_yields),
    ("a2(b,c) is a flatten-resolution of C[S]", flatten_resolution),
    ("flatten-resolution recovered from a2(b,c)", recovered),
    ("closed systems: profile equals small profile", closed_profiles),
    ("profiles of T_n and their separations", t_profiles),
    ("unfold-equivalence with common folding and unfolding", common_folding),
    ("the same shapes as transition systems are bisimilar", as_transition_systems),
    ("ρ(a(x1..xk)) = {1..k}", rho_all),
    ("ρ(a(x3,x1,x1)) = {1,3}", rho_repeated),
    ("an unreachable ⊥ vertex changes nothing", rho_unreachable),
    ("P = {⊥} and P = {∅} split on reachability", reach_languages),
    ("ρ is invariant under unfolding", rho_unfold),
    ("rank 1 deterministic elements are Y1", det_rank_one),
    ("δ = a in rank 1", delta_rank_one),
    ("leaf letters get a single state", leaf_delta),
];

/// Run every example in order.
pub fn reference_checks() -> Vec<Check> {
    CHECKS
        .iter()
        .map(|&(name, run)| match run() {
            Ok(detail) => Check { name, passed: true, detail },
            Err(detail) => Check { name, passed: false, detail },
        })
        .collect()
}

fn e(text: &str) -> SetSystem<Sym> {
    from_expression(text, None).expect("well-formed expression")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn ok<T>(r: crate::Result<T>) -> std::result::Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn nested_expression() -> Outcome {
    let s = e("a2(x1, a2(b, x2))");
    ensure(s.rank == 2 && validate(&s).is_system(), || format!("got {}", s.summary()))?;
    Ok(s.summary())
}

fn three_vertices() -> Outcome {
    let s = e("a2(b, c)");
    let r = s.init_vertex();
    let named = |t: Target, name: &str| matches!(t, Target::Vertex(w) if s.vertices[w].label.name == name);
    ensure(s.len() == 3, || format!("{} vertices", s.len()))?;
    ensure(s.succ(r, 1).len() == 1 && named(s.succ(r, 1)[0], "b"), || "direction 1 does not reach b".into())?;
    ensure(s.succ(r, 2).len() == 1 && named(s.succ(r, 2)[0], "c"), || "direction 2 does not reach c".into())?;
    Ok(s.summary())
}

/// `n` unary vertices; `next[i]` is the successor of vertex `i`, vertex 0 initial.
fn unary_graph(next: &[usize]) -> SetSystem<Sym> {
    let mut s = SetSystem::new(0);
    for i in 0..next.len() {
        s.add_vertex(format!("v{i}"), Sym::new("a1", 1), i == 0, false);
    }
    for (i, &j) in next.iter().enumerate() {
        s.add_edge(i, 1, j);
    }
    s
}

// a lasso shape that unfolds both of the others, a two-cycle, a path into a loop, and the loop
fn unfold_family() -> [SetSystem<Sym>; 4] {
    [unary_graph(&[1, 2, 3, 2]), unary_graph(&[1, 0]), unary_graph(&[1, 1]), unary_graph(&[0])]
}

fn folding() -> Outcome {
    let [_, s1, _, f] = unfold_family();
    let check = ok(check_morphism(&s1, &f, &[0, 0]))?;
    ensure(check.is_locally_surjective(), || format!("{check:?}"))?;
    Ok("both vertices map to the loop vertex".into())
}

fn composite_cover() -> Outcome {
    let [_, s1, _, f] = unfold_family();
    let four = unary_graph(&[1, 2, 3, 0]);
    let m1 = [0, 1, 0, 1];
    ensure(ok(check_morphism(&four, &s1, &m1))?.is_locally_surjective(), || "four-cycle onto two-cycle".into())?;
    let m = ok(compose(&m1, &[0, 0]))?;
    ensure(ok(check_morphism(&four, &f, &m))?.is_locally_surjective(), || "composite is not locally surjective".into())?;
    Ok("four-cycle → two-cycle → loop".into())
}

fn unit_atomic() -> Outcome {
    let s = e("a2(x1, c(b + d, x2))");
    ensure(isomorphic(&ok(flatten(&atomic(s.clone())))?, &s), || "flatten(atomic S) differs from S".into())?;
    Ok(s.summary())
}

fn unit_lift() -> Outcome {
    let s = e("a2(x1, c(b + d, x2))");
    ensure(isomorphic(&ok(flatten(&lift(&s, |l| atomic(l.clone()))))?, &s), || "flatten(lift atomic S) differs from S".into())?;
    Ok(s.summary())
}

fn dupname_not_system() -> Outcome {
    let d = ok(dupname(&[1, 1], 1, &e("a1(x1)")))?;
    ensure(validate(&d).is_valid() && !validate(&d).is_system(), || "duplicated variable edge not flagged".into())?;
    let d2 = ok(dupname(&[2], 2, &e("a2(x1,x2)")))?;
    ensure(!validate(&d2).is_system(), || "missing variable edge not flagged".into())?;
    Ok("duplicate and missing successors both flagged".into())
}

fn fuproot_cover() -> Outcome {
    let alpha = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0)]);
    let mut g = Gen::new(11);
    for i in 0..200 {
        let n: Nested<Sym> = g.nested(&alpha, 0, Shape::set_system(3), 2);
        let lhs = ok(flatten(&fuproot(&n)))?;
        let rhs = uproot(&ok(flatten(&n))?);
        ensure(find_morphism_with(&lhs, &rhs, SearchMode { locally_surjective: true }).is_some(), || format!("no cover for instance {i}"))?;
    }
    Ok("200 seeded nested set-systems".into())
}

fn plug_rank_two() -> Outcome {
    let mut c = SetSystem::new(0);
    let f = c.add_vertex("f", Sym::new("f", 1), true, false);
    let h = c.add_vertex("h", Sym::hole(2), false, false);
    let b = c.add_vertex("b", Sym::new("b", 0), false, false);
    let cc = c.add_vertex("c", Sym::new("c", 0), false, false);
    c.add_edge(f, 1, h);
    c.add_edge(h, 1, b);
    c.add_edge(h, 2, cc);
    let got = ok(plug(&c, &e("a2(x2, g(x1))")))?;
    ensure(isomorphic(&got, &e("f(a2(c, g(b)))")), || format!("got {}", got.summary()))?;
    Ok(got.summary())
}

fn recomposition() -> Outcome {
    let c = ok(make_context(&[&e("f(x1)"), &e("g(x1, b + c)")], Sym::hole(1)))?;
    let p = ok(pieces(&c))?;
    let r = ok(recompose(&p, Sym::hole(1)))?;
    let map = find_morphism(&r, &c).ok_or("no morphism onto the context")?;
    ensure(ok(check_morphism(&r, &c, &map))?.is_locally_surjective(), || "morphism is not locally surjective".into())?;
    Ok(format!("{} pieces", p.parts.len()))
}

fn sum_context() -> SetSystem<Sym> {
    let mut c = SetSystem::new(0);
    let h = c.add_vertex("h", Sym::hole(1), true, false);
    let b = c.add_vertex("b", Sym::new("b", 0), false, false);
    let cc = c.add_vertex("c", Sym::new("c", 0), false, false);
    c.add_edge(h, 1, b);
    c.add_edge(h, 1, cc);
    c
}

fn four_resolutions() -> Outcome {
    let res = direct_resolutions(&ok(plug(&sum_context(), &e("a2(x1, x1)")))?, Bounds::memory(0));
    let expected: BTreeSet<_> = ["a2(b,b)", "a2(b,c)", "a2(c,b)", "a2(c,c)"].iter().map(|x| system_key(&e(x)).unwrap()).collect();
    let got: BTreeSet<_> = res.keys.iter().cloned().collect();
    ensure(got == expected, || format!("{} classes", got.len()))?;
    Ok("a2(b,b), a2(b,c), a2(c,b), a2(c,c)".into())
}

fn one_resolution() -> Outcome {
    let s = e("a2(x1, x1)");
    let res = direct_resolutions(&s, Bounds::memory(0));
    ensure(res.keys == [ok(system_key(&s))?], || format!("{} classes", res.keys.len()))?;
    Ok("S itself".into())
}

fn choice_is_resolution() -> Outcome {
    let s1 = e("a2(b + c, x1)");
    let s2 = e("a2(c, x1)");
    ensure(ok(is_init_yield(&s2, &s1))?, || "a2(c, x1) is not a yield".into())?;
    ensure(!ok(is_init_yield(&e("a2(x1, c)"), &s1))?, || "a2(x1, c) is a yield".into())?;
    Ok("a2(c, x1) among the yields of a2(b + c, x1)".into())
}

fn cover_yields() -> Outcome {
    let s = e("a2(b + c, b)");
    let mut t = s.clone();
    // a second copy of the c vertex, reached the same way
    let c = t.vertices.iter().position(|v| v.label.name == "c").unwrap();
    let c2 = t.add_vertex("c2", Sym::new("c", 0), false, false);
    t.add_edge(t.init_vertex(), 1, c2);
    let mut map: Vec<usize> = (0..s.len()).collect();
    map.push(c);
    ensure(ok(check_morphism(&t, &s, &map))?.is_locally_surjective(), || "not a cover".into())?;
    for (x, y) in [(&s, &t), (&t, &s)] {
        ensure(!ok(yield_subsumed(x, y, Bounds::memory(1)))?.is_refuted(), || "yields differ".into())?;
    }
    Ok("both inclusions hold".into())
}

fn example_nested() -> (Nested<Sym>, Nested<Sym>, FlattenResolutionWitness) {
    let mut n: Nested<Sym> = SetSystem::new(0);
    let h = n.add_vertex("h", e("a2(x1, x1)"), true, false);
    let b = n.add_vertex("b", atomic(Sym::new("b", 0)), false, false);
    let c = n.add_vertex("c", atomic(Sym::new("c", 0)), false, false);
    n.add_edge(h, 1, b);
    n.add_edge(h, 1, c);
    let mut t: Nested<Sym> = SetSystem::new(0);
    let th = t.add_vertex("t", atomic(Sym::new("a2", 2)), true, false);
    let tb = t.add_vertex("tb", atomic(Sym::new("b", 0)), false, false);
    let tc = t.add_vertex("tc", atomic(Sym::new("c", 0)), false, false);
    t.add_edge(th, 1, tb);
    t.add_edge(th, 2, tc);
    let w = FlattenResolutionWitness { delta: vec![h, b, c], sigma: vec![vec![1, 1], vec![], vec![]], gamma: vec![vec![0], vec![0], vec![0]] };
    (n, t, w)
}

fn flatten_resolution() -> Outcome {
    let (n, t, w) = example_nested();
    let report = ok(check_flatten_resolution(&n, &t, &w))?;
    ensure(report.holds(), || format!("{:?}", report.violations))?;
    Ok("δ sends the a2 vertex to the hole, σ constant".into())
}

fn recovered() -> Outcome {
    let (n, _, _) = example_nested();
    let rec = ok(direct_to_flatten_resolution(&n, &e("a2(b, c)"), None))?;
    ensure(ok(check_flatten_resolution(&n, &rec.system, &rec.witness))?.holds(), || "recovered witness fails".into())?;
    let root = rec.system.init_vertex();
    ensure(rec.witness.sigma[root] == [1, 1], || format!("σ = {:?}", rec.witness.sigma[root]))?;
    Ok("σ = [1, 1] at the root".into())
}

fn closed_profiles() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    for text in ["a2(b, c)", "a2(c, c)", "a2(b + c, c)"] {
        let s = e(text);
        let full = ok(profile(&alg, &s, false, false, Bounds::memory(1), 3))?;
        let small = ok(profile(&alg, &s, false, true, Bounds::memory(1), 3))?;
        ensure(full.pairs == small.pairs, || format!("{text}: profiles differ"))?;
        ensure(full.pairs.iter().all(|(_, sigma)| sigma.is_empty()), || format!("{text}: non-empty σ"))?;
    }
    Ok("three closed systems".into())
}

fn t_n(n: usize) -> SetSystem<Sym> {
    let mut text = "a".to_string();
    for _ in 0..n {
        text = format!("a2({text}, x1)");
    }
    SetSystem { rank: 1, ..e(&text) }
}

fn t_profiles() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    let max_m = 5;
    let mut all = Vec::new();
    for n in 1..=5 {
        all.push(ok(profile(&alg, &t_n(n), false, false, Bounds::memory(0), max_m))?.pairs);
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
        ensure(all[n - 1] == expect, || format!("profile of T_{n}"))?;
        for m in n + 1..=max_m {
            let full = (Reach::set(m, 1..=m), vec![1; m]);
            ensure(all[m - 1].contains(&full) && !all[n - 1].contains(&full), || format!("T_{m} vs T_{n}"))?;
        }
    }
    Ok("n ≤ 4, m ≤ 5".into())
}

fn common_folding() -> Outcome {
    let [u, s1, s2, f] = unfold_family();
    ensure(ok(unfold_equivalent(&s1, &s2))?.holds(), || "S1 and S2 differ".into())?;
    for (name, s) in [("S1", &s1), ("S2", &s2)] {
        ensure(find_morphism(s, &f).is_some(), || format!("{name} does not fold onto F"))?;
        ensure(find_morphism(&u, s).is_some(), || format!("U does not map onto {name}"))?;
    }
    Ok("S1 → F ← S2 and S1 ← U → S2".into())
}

fn ts_of(next: &[usize]) -> TransitionSystem {
    TransitionSystem {
        ids: (0..next.len()).map(|i| format!("s{i}")).collect(),
        props: vec![BTreeSet::new(); next.len()],
        initial: 0,
        transitions: next.iter().enumerate().map(|(i, &j)| (i, j)).collect(),
    }
}

fn as_transition_systems() -> Outcome {
    ensure(bisimilar(&ts_of(&[1, 0]), &ts_of(&[1, 1])).holds(), || "two-cycle and lasso differ".into())?;
    ensure(bisimilar(&ts_of(&[1, 2, 3, 2]), &ts_of(&[0])).holds(), || "lasso and loop differ".into())?;
    Ok("two-cycle, lasso and loop".into())
}

fn rho_all() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    for k in 1..=5 {
        let vars: Vec<String> = (1..=k).map(|i| format!("x{i}")).collect();
        let value = ok(rho(&alg, &e(&format!("a({})", vars.join(", ")))))?;
        ensure(value == Reach::set(k, 1..=k), || format!("k = {k}: {value}"))?;
    }
    Ok("k ≤ 5".into())
}

fn rho_repeated() -> Outcome {
    let value = ok(rho(&ReachabilityAlgebra::new(["b"]), &e("a(x3, x1, x1)")))?;
    ensure(value == Reach::set(3, [1, 3]), || format!("got {value}"))?;
    Ok(value.to_string())
}

fn rho_unreachable() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    let s = e("a(x1, c)");
    let mut t = s.clone();
    t.add_vertex("dead", Sym::new("b", 0), false, false);
    let (x, y) = (ok(rho(&alg, &s))?, ok(rho(&alg, &t))?);
    ensure(x == y, || format!("{x} vs {y}"))?;
    Ok(x.to_string())
}

fn reach_languages() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b"]);
    let (bottom, empty) = ([Reach::bottom(0)], [Reach::set(0, [])]);
    for (text, has_b) in [("a(c, d(b))", true), ("a(c, d(c))", false), ("a(c, d(d(b)))", true), ("b", true)] {
        let s = e(text);
        ensure(ok(recognises(&alg, &bottom, &s))? == has_b, || format!("{text} with P = {{⊥}}"))?;
        ensure(ok(recognises(&alg, &empty, &s))? == !has_b, || format!("{text} with P = {{∅}}"))?;
    }
    Ok("four systems".into())
}

fn rho_unfold() -> Outcome {
    let alg = ReachabilityAlgebra::new(["b1"]);
    let sigma = alphabet(&[("a2", 2), ("a1", 1), ("b1", 1), ("c0", 0)]);
    let mut g = Gen::new(5);
    for i in 0..100 {
        let s = g.system(&sigma, 2, 5);
        let (t, _) = g.unfolding(&s);
        ensure(ok(rho(&alg, &s))? == ok(rho(&alg, &t))?, || format!("instance {i}"))?;
    }
    Ok("100 seeded unfoldings".into())
}

fn det_rank_one() -> Outcome {
    let p = shipped::avoid();
    let els = ok(det_elements(&p, 1))?;
    ensure(els.len() == p.y1.len(), || format!("{} elements", els.len()))?;
    Ok(format!("{} elements", els.len()))
}

fn delta_rank_one() -> Outcome {
    let p = shipped::avoid();
    let a = ok(p.letter_rep("a1"))?;
    let ok_ = ok(p.one("ok"))?;
    let out = ok(build_delta(&p, &[ok_, ok_], &a))?;
    ensure(out.delta == a, || p.show_rep(&out.delta))?;
    Ok(p.show_rep(&a))
}

fn leaf_delta() -> Outcome {
    let p = shipped::avoid();
    let aut = ok(compile_algebra(&p))?;
    let got = aut.delta_zero.get("c0").ok_or("no entry for c0")?;
    let LetterValue::Leaf(t) = p.letter("c0").ok_or("no letter c0")?.value else {
        return Err("c0 is not a leaf".into());
    };
    ensure(got.len() == 1 && got.contains(&t), || format!("{got:?}"))?;
    Ok(p.y0[t].clone())
}

#[cfg(test)]
mod tests {
    #[test]
    fn every_reference_check_passes() {
        let failed: Vec<String> = super::reference_checks().into_iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.name, c.detail)).collect();
        assert!(failed.is_empty(), "{failed:#?}");
    }
}
