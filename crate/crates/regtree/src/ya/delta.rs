use itertools::Itertools;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::model::SetSystem;
use crate::monad::{atomic, make_context_flagged, plant, plug_at, rename, sum};
use crate::morphism::find_morphism;

use super::branch::eval_closed_composition;
use super::presentation::Presentation;
use super::rep::{rep_leq, RankedElementRep};

type Graph = SetSystem<RankedElementRep>;

fn unary_part(y: usize) -> Graph {
    atomic(RankedElementRep::unary(y))
}

fn terminal_part(t: usize) -> Graph {
    let mut g = SetSystem::new(1);
    g.add_vertex("t", RankedElementRep::leaf(t), true, false);
    g
}

/// A piece of a context: a unary element leading back into the hole, or a terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Piece {
    Unary(usize),
    Terminal(usize),
}

/// `plant(Context(S_0, …, S_k))` with one-vertex pieces, hole last.
pub fn piece_context(pieces: &[Piece]) -> Result<Graph> {
    if pieces.is_empty() {
        return input("a context needs at least its root piece");
    }
    let parts: Vec<Graph> = pieces
        .iter()
        .map(|&q| match q {
            Piece::Unary(y) => unary_part(y),
            Piece::Terminal(t) => terminal_part(t),
        })
        .collect();
    let refs: Vec<&Graph> = parts.iter().collect();
    let hole = RankedElementRep::meet(pieces.len() - 1, []);
    Ok(plant(&make_context_flagged(&refs, hole, false, false)?))
}

/// `plant(Context(s_0, …, s_k))` with unary pieces.
pub fn unary_context(s: &[usize]) -> Result<Graph> {
    piece_context(&s.iter().map(|&y| Piece::Unary(y)).collect::<Vec<_>>())
}

/// `plant(Context(s_0, …, s_k))[x]` for a rank-`k` set-system of elements.
pub fn in_unary_context(s: &[usize], x: &Graph) -> Result<Graph> {
    let c = unary_context(s)?;
    plug_at(&c, c.len() - 1, x)
}

fn accepted_in(p: &Presentation, s: &[usize], a: &RankedElementRep) -> Result<bool> {
    eval_closed_composition(p, &in_unary_context(s, &atomic(a.clone()))?)
}

fn accepted_with(p: &Presentation, pieces: &[Piece], a: &RankedElementRep) -> Result<bool> {
    let c = piece_context(pieces)?;
    eval_closed_composition(p, &plug_at(&c, c.len() - 1, &atomic(a.clone()))?)
}

/// The extremal context with its three defining properties re-checked.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Extremal {
    pub m: Vec<usize>,
    pub below_given: bool,
    pub accepted: bool,
    pub minimal: bool,
    pub candidates: usize,
}

impl Extremal {
    pub fn holds(&self) -> bool {
        self.below_given && self.accepted && self.minimal
    }
}

/// A componentwise-minimal `m ⊑ t` such that `plant(Context(m))[a]` is still accepted.
pub fn extremal_context(p: &Presentation, t: &[usize], a: &RankedElementRep) -> Result<Extremal> {
    if t.len() != a.rank + 1 {
        return Err(Error::Rank { expected: a.rank + 1, found: t.len() });
    }
    a.check(p)?;
    if let Some(&y) = t.iter().find(|&&y| y >= p.y1.len()) {
        return input(format!("context component {y} outside Y1"));
    }
    if !accepted_in(p, t, a)? {
        return Err(Error::Precondition("the given context does not accept the element".into()));
    }
    let below: Vec<Vec<usize>> = t.iter().map(|&ti| (0..p.y1.len()).filter(|&y| p.leq1(y, ti)).collect()).collect();
    let mut z: Vec<Vec<usize>> = Vec::new();
    for m in below.iter().map(|c| c.iter().copied()).multi_cartesian_product() {
        if accepted_in(p, &m, a)? {
            z.push(m);
        }
    }
    let candidates = z.len();
    let strictly_below = |x: &[usize], y: &[usize]| x != y && x.iter().zip(y).all(|(&u, &v)| p.leq1(u, v));
    let m = z.iter().find(|m| !z.iter().any(|o| strictly_below(o, m))).cloned().expect("t itself is a candidate");
    let below_given = m.iter().zip(t).all(|(&u, &v)| p.leq1(u, v));
    let accepted = accepted_in(p, &m, a)?;
    let mut minimal = true;
    'outer: for i in 0..m.len() {
        for y in 0..p.y1.len() {
            let mut w = m.clone();
            w[i] = p.meet1[m[i]][y];
            if accepted_in(p, &w, a)? && !p.leq1(m[i], y) {
                minimal = false;
                break 'outer;
            }
        }
    }
    Ok(Extremal { m, below_given, accepted, minimal, candidates })
}

/// `U_i` over the context values `m`: a root `m_0` entering `a`; every direction
/// `j` of `a` goes to an `m_j` vertex leading back to `a`, and direction `i` may
/// also leave through the variable.
pub fn u_system(m: &[usize], a: &RankedElementRep, i: usize) -> Result<Graph> {
    let k = a.rank;
    if m.len() != k + 1 || i == 0 || i > k {
        return input("U_i needs m_0..m_k and 1 ≤ i ≤ k");
    }
    let mut u = SetSystem::new(1);
    let r = u.add_vertex("m0", RankedElementRep::unary(m[0]), false, true);
    let h = u.add_vertex("a", a.clone(), true, false);
    u.add_edge(r, 1, h);
    for (j, &mj) in m.iter().enumerate().skip(1) {
        let v = u.add_vertex(format!("m{j}"), RankedElementRep::unary(mj), false, false);
        u.add_edge(h, j, v);
        u.add_edge(v, 1, h);
    }
    u.add_var_edge(h, i, 1);
    Ok(u)
}

/// How a rank-1 composition is probed: an optional unary prefix, then the element,
/// then either a unary piece looping back into the element or a terminal.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Tail {
    Loop(usize),
    Terminal(usize),
}

fn probe(s0: Option<usize>, tail: Tail, x: &Graph) -> Result<Graph> {
    let after = match tail {
        Tail::Loop(y) => unary_part(y),
        Tail::Terminal(t) => terminal_part(t),
    };
    let first = match s0 {
        Some(y) => unary_part(y),
        None => SetSystem::new(1),
    };
    let c = make_context_flagged(&[&first, &after], RankedElementRep::meet(1, []), false, s0.is_none())?;
    plug_at(&plant(&c), c.len() - 1, x)
}

fn signature(p: &Presentation, x: &Graph) -> Result<Vec<bool>> {
    let tails: Vec<Tail> = (0..p.y1.len()).map(Tail::Loop).chain((0..p.y0.len()).map(Tail::Terminal)).collect();
    let mut out = Vec::new();
    for s0 in std::iter::once(None).chain((0..p.y1.len()).map(Some)) {
        for &tail in &tails {
            out.push(eval_closed_composition(p, &probe(s0, tail, x)?)?);
        }
    }
    Ok(out)
}

/// A unary element (optionally met with a closed value) that no probe context can
/// tell apart from `x`; the least one under the order when several qualify.
pub fn match_unary(p: &Presentation, x: &Graph) -> Result<Option<(usize, Option<usize>)>> {
    let target = signature(p, x)?;
    for zero in std::iter::once(None).chain((0..p.y0.len()).map(Some)) {
        let mut hits = Vec::new();
        for y in 0..p.y1.len() {
            let cand = atomic(RankedElementRep::unary(y).with_zero(zero));
            if signature(p, &cand)? == target {
                hits.push(y);
            }
        }
        if let Some(&y) = hits.iter().find(|&&y| hits.iter().all(|&o| p.leq1(y, o))).or(hits.first()) {
            return Ok(Some((y, zero)));
        }
    }
    Ok(None)
}

/// The construction and every check made on it.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaOutcome {
    pub delta: RankedElementRep,
    #[serde(skip)]
    pub big_delta: Option<Graph>,
    pub deterministic: bool,
    /// `plant(Context(m))[δ]` accepted.
    pub accepted: bool,
    /// `plant(Context(m))[Δ]` accepted, on the set-system itself.
    pub accepted_unevaluated: bool,
    /// A morphism `plant(Context(m))[Δ] → plant(Context(m))[a]` exists.
    pub maps_onto_letter: bool,
    /// `δ ⊑ a` under the representation order.
    pub below_rep: bool,
    /// Every one-vertex-piece context accepting `δ` accepts `a`.
    pub below_contexts: bool,
    pub contexts_checked: usize,
}

impl DeltaOutcome {
    pub fn holds(&self) -> bool {
        self.deterministic && self.accepted && self.accepted_unevaluated && self.maps_onto_letter && self.below_rep && self.below_contexts
    }
}

/// Check a candidate `δ` against `a` in the context `m`.
pub fn check_delta(p: &Presentation, m: &[usize], a: &RankedElementRep, delta: &RankedElementRep) -> Result<DeltaOutcome> {
    let accepted = accepted_in(p, m, delta)?;
    let below_rep = rep_leq(p, delta, a)?;
    let mut below_contexts = true;
    let mut contexts_checked = 0;
    let all: Vec<Piece> = (0..p.y1.len()).map(Piece::Unary).chain((0..p.y0.len()).map(Piece::Terminal)).collect();
    let first: Vec<Piece> = (0..p.y1.len()).map(Piece::Unary).collect();
    let choices = std::iter::once(first).chain((0..a.rank).map(|_| all.clone()));
    for s in choices.multi_cartesian_product() {
        contexts_checked += 1;
        if accepted_with(p, &s, delta)? && !accepted_with(p, &s, a)? {
            below_contexts = false;
            break;
        }
    }
    Ok(DeltaOutcome {
        delta: delta.clone(),
        big_delta: None,
        deterministic: delta.is_deterministic(),
        accepted,
        accepted_unevaluated: true,
        maps_onto_letter: true,
        below_rep,
        below_contexts,
        contexts_checked,
    })
}

/// Build `Δ = ⊞ U_i(x_i)` and its value `δ`; for `k ≤ 1`, `δ = a`.
///
/// The value of each `U_i` is found among unary elements by probing; only the
/// initial part of `U_i` is probed, since a unary element carries no root branches.
pub fn build_delta(p: &Presentation, m: &[usize], a: &RankedElementRep) -> Result<DeltaOutcome> {
    let k = a.rank;
    if m.len() != k + 1 {
        return Err(Error::Rank { expected: k + 1, found: m.len() });
    }
    if !accepted_in(p, m, a)? {
        return Err(Error::Precondition("the context m does not accept the element".into()));
    }
    if k <= 1 {
        return check_delta(p, m, a, a);
    }
    let mut parts = Vec::with_capacity(k);
    let mut tuple = Vec::with_capacity(k);
    let mut zero: Option<usize> = None;
    for i in 1..=k {
        let u = u_system(m, a, i)?;
        let mut init_part = u.clone();
        for v in &mut init_part.vertices {
            v.root = false;
        }
        let Some((y, c)) = match_unary(p, &init_part)? else {
            return Err(Error::Presentation(format!("no unary element behaves like U_{i}")));
        };
        tuple.push(y);
        if let Some(c) = c {
            zero = Some(zero.map_or(c, |z| p.meet0[z][c]));
        }
        parts.push(rename(&[i], k, &u)?);
    }
    let refs: Vec<&Graph> = parts.iter().collect();
    let big = sum(&refs)?;
    let delta = RankedElementRep::tuple(tuple).with_zero(zero);
    let mut out = check_delta(p, m, a, &delta)?;
    let with_big = in_unary_context(m, &big)?;
    out.accepted_unevaluated = eval_closed_composition(p, &with_big)?;
    out.maps_onto_letter = find_morphism(&with_big, &in_unary_context(m, &atomic(a.clone()))?).is_some();
    out.big_delta = Some(big);
    Ok(out)
}

/// `δ` with component `i` replaced, for negative controls.
pub fn mutate_component(delta: &RankedElementRep, i: usize, y: usize) -> RankedElementRep {
    let mut t = delta.decomps.iter().next().cloned().unwrap_or_default();
    t[i] = y;
    RankedElementRep::tuple(t).with_zero(delta.zero)
}
