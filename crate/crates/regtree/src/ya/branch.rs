use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{Ranked, SetSystem, Sym, Target};

use super::presentation::Presentation;
use super::rep::RankedElementRep;

/// A vertex label of a branch graph: a unary element or a closed terminal value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum YLabel {
    One(usize),
    Zero(usize),
}

impl Ranked for YLabel {
    fn rank(&self) -> usize {
        match self {
            YLabel::One(_) => 1,
            YLabel::Zero(_) => 0,
        }
    }
}

impl std::fmt::Display for YLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            YLabel::One(y) => write!(f, "y1:{y}"),
            YLabel::Zero(t) => write!(f, "y0:{t}"),
        }
    }
}

pub fn fold(p: &Presentation, w: &[usize]) -> Option<usize> {
    w.iter().copied().reduce(|a, b| p.mul(a, b))
}

/// Value of the finite branch `w` followed by the terminal `t`.
pub fn eval_word(p: &Presentation, w: &[usize], t: usize) -> usize {
    p.act_opt(fold(p, w), t)
}

/// Value of `u v^ω`.
pub fn eval_lasso(p: &Presentation, u: &[usize], v: &[usize]) -> Result<usize> {
    let Some(e0) = fold(p, v) else {
        return input("the loop of a lasso is nonempty");
    };
    eval_lasso_values(p, fold(p, u), e0)
}

/// Value of `s·e0^ω`, checking that every cut of the loop gives the same answer.
pub fn eval_lasso_values(p: &Presentation, s: Option<usize>, e0: usize) -> Result<usize> {
    let (k, e) = p.idempotent_power(e0);
    let w = p.omega[e].ok_or_else(|| Error::Presentation(format!("omega undefined on idempotent `{}`", p.y1[e])))?;
    let mut prefix = s;
    let mut value = None;
    for j in 0..k {
        let v = p.act_opt(prefix, w);
        match value {
            None => value = Some(v),
            Some(first) if first != v => {
                return Err(Error::Presentation(format!("lasso value depends on alignment: j=0 gives `{}`, j={j} gives `{}`", p.y0[first], p.y0[v])))
            }
            Some(_) => {}
        }
        prefix = Some(p.then(prefix, e0));
    }
    Ok(value.expect("k ≥ 1"))
}

/// A branch outside `P`: the vertices of the prefix, and for infinite branches the
/// repeated cycle (starting at the last prefix vertex).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BadBranch {
    pub path: Vec<usize>,
    pub cycle: Vec<usize>,
    pub value: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BranchVerdict {
    pub accepted: bool,
    pub states: usize,
    pub witness: Option<BadBranch>,
}

type State = (usize, Option<usize>);

fn successors(g: &SetSystem<YLabel>) -> Result<Vec<Vec<usize>>> {
    let mut succ = vec![Vec::new(); g.len()];
    for e in &g.edges {
        let Target::Vertex(w) = e.tgt else {
            return input("branch graphs are closed");
        };
        if e.dir != 1 || matches!(g.vertices[e.src].label, YLabel::Zero(_)) {
            return input(format!("vertex `{}` has an edge in direction {} beyond its rank", g.vertices[e.src].id, e.dir));
        }
        succ[e.src].push(w);
    }
    Ok(succ)
}

fn trace<S: Ord + Copy>(parent: &BTreeMap<S, Option<S>>, mut s: S, vertex: impl Fn(S) -> usize) -> Vec<usize> {
    let mut out = vec![vertex(s)];
    while let Some(Some(q)) = parent.get(&s) {
        out.push(vertex(*q));
        s = *q;
    }
    out.reverse();
    out
}

/// Loop values at `v`: products along closed walks `v … v`, with parents for
/// reconstructing a walk.
fn loops(p: &Presentation, g: &SetSystem<YLabel>, succ: &[Vec<usize>], v: usize) -> BTreeMap<State, Option<State>> {
    let mut parent: BTreeMap<State, Option<State>> = BTreeMap::new();
    let YLabel::One(y) = g.vertices[v].label else { return parent };
    let mut queue = VecDeque::new();
    for &w in &succ[v] {
        if parent.insert((w, Some(y)), None).is_none() {
            queue.push_back((w, Some(y)));
        }
    }
    while let Some((w, x)) = queue.pop_front() {
        let YLabel::One(yw) = g.vertices[w].label else { continue };
        let nx = Some(p.then(x, yw));
        for &u in &succ[w] {
            if let std::collections::btree_map::Entry::Vacant(e) = parent.entry((u, nx)) {
                e.insert(Some((w, x)));
                queue.push_back((u, nx));
            }
        }
    }
    parent
}

/// Whether every maximal branch from an initial or root vertex has its value in `P`.
///
/// Works on pairs (vertex, value of the prefix before it). Finite branches end at a
/// `Y0` vertex; a `Y1` vertex without successors ends no branch. For infinite
/// branches, every loop value at a reachable pair is closed off with `omega`, which
/// covers every branch through a Ramsey factorisation.
pub fn universal_branch_check(p: &Presentation, g: &SetSystem<YLabel>) -> Result<BranchVerdict> {
    let succ = successors(g)?;
    let mut parent: BTreeMap<State, Option<State>> = BTreeMap::new();
    let mut queue = VecDeque::new();
    for (v, vert) in g.vertices.iter().enumerate() {
        if (vert.initial || vert.root) && parent.insert((v, None), None).is_none() {
            queue.push_back((v, None));
        }
    }
    let mut order = Vec::new();
    while let Some((v, s)) = queue.pop_front() {
        order.push((v, s));
        if let YLabel::One(y) = g.vertices[v].label {
            let ns = Some(p.then(s, y));
            for &w in &succ[v] {
                if let std::collections::btree_map::Entry::Vacant(e) = parent.entry((w, ns)) {
                    e.insert(Some((v, s)));
                    queue.push_back((w, ns));
                }
            }
        }
    }
    let mut loop_cache: BTreeMap<usize, BTreeMap<State, Option<State>>> = BTreeMap::new();
    for &(v, s) in &order {
        match g.vertices[v].label {
            YLabel::Zero(t) => {
                let value = p.act_opt(s, t);
                if !p.accepting.contains(&value) {
                    let path = trace(&parent, (v, s), |q| q.0);
                    return Ok(BranchVerdict { accepted: false, states: order.len(), witness: Some(BadBranch { path, cycle: vec![], value }) });
                }
            }
            YLabel::One(_) => {
                let walks = loop_cache.entry(v).or_insert_with(|| loops(p, g, &succ, v));
                let values: BTreeSet<usize> = walks.keys().filter(|(w, _)| *w == v).filter_map(|(_, x)| *x).collect();
                for e in values {
                    let value = eval_lasso_values(p, s, e)?;
                    if !p.accepting.contains(&value) {
                        let path = trace(&parent, (v, s), |q| q.0);
                        let mut cycle = vec![v];
                        cycle.extend(trace(walks, (v, Some(e)), |q| q.0));
                        cycle.pop();
                        return Ok(BranchVerdict { accepted: false, states: order.len(), witness: Some(BadBranch { path, cycle, value }) });
                    }
                }
            }
        }
    }
    Ok(BranchVerdict { accepted: true, states: order.len(), witness: None })
}

/// Expand every element vertex into its alternatives: one `Y1` vertex per tuple
/// component and one `Y0` vertex for a closed part. All alternatives inherit the
/// flags and the incoming edges of the element.
pub fn expand(p: &Presentation, g: &SetSystem<RankedElementRep>) -> Result<SetSystem<YLabel>> {
    if !g.is_closed() {
        return input("only closed compositions have a value");
    }
    let mut out = SetSystem::new(0);
    let mut entries: Vec<Vec<(usize, usize)>> = Vec::with_capacity(g.len());
    for v in &g.vertices {
        v.label.check(p)?;
        let mut mine = Vec::new();
        for (j, t) in v.label.decomps.iter().enumerate() {
            for (i, &y) in t.iter().enumerate() {
                let id = out.add_vertex(format!("{}/{j}.{}", v.id, i + 1), YLabel::One(y), v.initial, v.root);
                mine.push((id, i + 1));
            }
        }
        if let Some(c) = v.label.zero {
            let id = out.add_vertex(format!("{}/c", v.id), YLabel::Zero(c), v.initial, v.root);
            mine.push((id, 0));
        }
        entries.push(mine);
    }
    for e in &g.edges {
        let Target::Vertex(w) = e.tgt else { unreachable!("closed") };
        for &(src, dir) in &entries[e.src] {
            if dir == e.dir {
                for &(dst, _) in &entries[w] {
                    out.add_edge(src, 1, dst);
                }
            }
        }
    }
    Ok(out)
}

/// Whether the value of a closed composition of elements lies in `P`.
pub fn eval_closed_composition(p: &Presentation, g: &SetSystem<RankedElementRep>) -> Result<bool> {
    Ok(universal_branch_check(p, &expand(p, g)?)?.accepted)
}

/// Relabel a symbol-labelled system by the letters of the presentation.
pub fn letters_to_reps(p: &Presentation, s: &SetSystem<Sym>) -> Result<SetSystem<RankedElementRep>> {
    let mut labels = Vec::with_capacity(s.len());
    for v in &s.vertices {
        let r = p.letter_rep(&v.label.name)?;
        if r.rank != v.label.rank {
            return Err(Error::Rank { expected: r.rank, found: v.label.rank });
        }
        labels.push(r);
    }
    Ok(s.map_labels(|i, _| labels[i].clone()))
}

/// Acceptance of a closed symbol-labelled system by the presentation.
pub fn presentation_accepts(p: &Presentation, s: &SetSystem<Sym>) -> Result<bool> {
    eval_closed_composition(p, &letters_to_reps(p, s)?)
}

/// Small graphs checked with their start vertices initial and then as roots.
pub(crate) fn plant_invariance(p: &Presentation) -> Vec<(String, bool)> {
    let mut out = Vec::new();
    let build = |y: usize, tail: Option<usize>, root: bool| {
        let mut g = SetSystem::new(0);
        let v = g.add_vertex("v", YLabel::One(y), !root, root);
        match tail {
            Some(t) => {
                let w = g.add_vertex("w", YLabel::Zero(t), false, false);
                g.add_edge(v, 1, w);
            }
            None => g.add_edge(v, 1, v),
        }
        g
    };
    for y in 0..p.y1.len() {
        for tail in std::iter::once(None).chain((0..p.y0.len()).map(Some)) {
            let a = universal_branch_check(p, &build(y, tail, false)).map(|v| v.accepted);
            let b = universal_branch_check(p, &build(y, tail, true)).map(|v| v.accepted);
            let name = match tail {
                Some(t) => format!("{} then {}", p.y1[y], p.y0[t]),
                None => format!("{} looping", p.y1[y]),
            };
            out.push((name, a.ok() == b.ok()));
        }
    }
    out
}
