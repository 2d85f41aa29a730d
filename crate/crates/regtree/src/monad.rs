//! The flattening monad and the structural constructors built on it.

use std::collections::BTreeMap;

use crate::error::{input, rank_check, Error, Result};
use crate::model::{Nested, Ranked, SetSystem, Sym, Target};

/// One initial vertex labelled `a`, with `(*, i, x_i)` for every direction.
pub fn atomic<L: Ranked>(a: L) -> SetSystem<L> {
    let k = a.rank();
    let mut s = SetSystem::new(k);
    let v = s.add_vertex("*", a, true, false);
    for i in 1..=k {
        s.add_var_edge(v, i, i);
    }
    s
}

/// Apply `f` to every label (the functor action on set-systems).
pub fn lift<L, M>(s: &SetSystem<L>, f: impl Fn(&L) -> M) -> SetSystem<M> {
    s.map_labels(|_, l| f(l))
}

fn check_nested<L: Ranked>(n: &Nested<L>) -> Result<()> {
    for e in &n.edges {
        let inner = &n.vertices[e.src].label;
        if e.dir == 0 || e.dir > inner.rank {
            return input(format!("outer vertex `{}`: direction {} exceeds inner rank {}", n.vertices[e.src].id, e.dir, inner.rank));
        }
        if let Target::Var(x) = e.tgt {
            if x == 0 || x > n.rank {
                return input(format!("outer vertex `{}`: variable x{x} outside 1..{}", n.vertices[e.src].id, n.rank));
            }
        }
    }
    Ok(())
}

/// Glue a set-system of set-systems into one set-system. Vertex `(v,w)` gets id `v.w`.
pub fn flatten<L: Ranked + Clone>(n: &Nested<L>) -> Result<SetSystem<L>> {
    check_nested(n)?;
    let mut out = SetSystem::new(n.rank);
    let mut index: Vec<Vec<usize>> = Vec::with_capacity(n.len());
    for v in &n.vertices {
        let inner = &v.label;
        let ids = inner
            .vertices
            .iter()
            .map(|w| {
                let initial = v.initial && w.initial;
                let root = w.root || (v.root && w.initial);
                out.add_vertex(format!("{}.{}", v.id, w.id), w.label.clone(), initial, root)
            })
            .collect();
        index.push(ids);
    }
    let outer_adj: Vec<BTreeMap<usize, Vec<Target>>> = (0..n.len())
        .map(|v| {
            let mut m: BTreeMap<usize, Vec<Target>> = BTreeMap::new();
            for (d, t) in n.out(v) {
                m.entry(d).or_default().push(t);
            }
            m
        })
        .collect();
    for (v, vx) in n.vertices.iter().enumerate() {
        for e in &vx.label.edges {
            let src = index[v][e.src];
            match e.tgt {
                Target::Vertex(w2) => out.add_edge(src, e.dir, index[v][w2]),
                Target::Var(x) => {
                    for &t in outer_adj[v].get(&x).map(Vec::as_slice).unwrap_or(&[]) {
                        match t {
                            Target::Vertex(v2) => {
                                for w2 in n.vertices[v2].label.initial() {
                                    out.add_edge(src, e.dir, index[v2][w2]);
                                }
                            }
                            Target::Var(y) => out.add_var_edge(src, e.dir, y),
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Disjoint union of set-systems of equal rank.
pub fn sum<L: Clone>(parts: &[&SetSystem<L>]) -> Result<SetSystem<L>> {
    let Some(first) = parts.first() else {
        return input("empty sum");
    };
    let mut out = SetSystem::new(first.rank);
    for (k, p) in parts.iter().enumerate() {
        rank_check(first.rank, p.rank)?;
        append(&mut out, p, &format!("{k}:"));
    }
    Ok(out)
}

/// Copy `p` into `out` (ids prefixed), returning the position offset.
pub(crate) fn append<L: Clone>(out: &mut SetSystem<L>, p: &SetSystem<L>, prefix: &str) -> usize {
    let off = out.len();
    for v in &p.vertices {
        out.add_vertex(format!("{prefix}{}", v.id), v.label.clone(), v.initial, v.root);
    }
    for e in &p.edges {
        let tgt = match e.tgt {
            Target::Vertex(w) => Target::Vertex(w + off),
            x => x,
        };
        out.edges.insert(crate::model::Edge { src: e.src + off, dir: e.dir, tgt });
    }
    off
}

/// Variable renamings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Renaming {
    /// `σ: [m] → [n]` (stored 0-indexed by position, 1-based values): `x_k ↦ x_σ(k)`, rank m → n.
    Rename { sigma: Vec<usize>, n: usize },
    /// `σ: [m] → [n]`: `(r,i,x_j)` kept iff `(r,i,x_σ(j))` exists; rank n → m.
    Dupname { sigma: Vec<usize>, n: usize },
    /// `R ⊆ [m] × [n]`: `(r,i,x_j)` when `(k,j) ∈ R` and `(r,i,x_k)` exists; rank m → n.
    Relation { pairs: Vec<(usize, usize)>, m: usize, n: usize },
}

pub fn renamerel<L: Clone>(pairs: &[(usize, usize)], m: usize, n: usize, s: &SetSystem<L>) -> Result<SetSystem<L>> {
    rank_check(m, s.rank)?;
    if let Some(&(k, j)) = pairs.iter().find(|&&(k, j)| k == 0 || k > m || j == 0 || j > n) {
        return input(format!("relation pair ({k},{j}) outside [{m}]x[{n}]"));
    }
    let mut out = SetSystem { rank: n, vertices: s.vertices.clone(), edges: Default::default() };
    for e in &s.edges {
        match e.tgt {
            Target::Vertex(_) => {
                out.edges.insert(*e);
            }
            Target::Var(k) => {
                for &(_, j) in pairs.iter().filter(|&&(kk, _)| kk == k) {
                    out.add_var_edge(e.src, e.dir, j);
                }
            }
        }
    }
    Ok(out)
}

fn check_map(sigma: &[usize], n: usize) -> Result<()> {
    match sigma.iter().find(|&&j| j == 0 || j > n) {
        Some(j) => input(format!("map value {j} outside [{n}]")),
        None => Ok(()),
    }
}

pub fn rename<L: Clone>(sigma: &[usize], n: usize, s: &SetSystem<L>) -> Result<SetSystem<L>> {
    check_map(sigma, n)?;
    let pairs: Vec<(usize, usize)> = sigma.iter().enumerate().map(|(k, &j)| (k + 1, j)).collect();
    renamerel(&pairs, sigma.len(), n, s)
}

pub fn dupname<L: Clone>(sigma: &[usize], n: usize, s: &SetSystem<L>) -> Result<SetSystem<L>> {
    check_map(sigma, n)?;
    let pairs: Vec<(usize, usize)> = sigma.iter().enumerate().map(|(j, &k)| (k, j + 1)).collect();
    renamerel(&pairs, n, sigma.len(), s)
}

pub fn apply_renaming<L: Clone>(r: &Renaming, s: &SetSystem<L>) -> Result<SetSystem<L>> {
    match r {
        Renaming::Rename { sigma, n } => rename(sigma, *n, s),
        Renaming::Dupname { sigma, n } => dupname(sigma, *n, s),
        Renaming::Relation { pairs, m, n } => renamerel(pairs, *m, *n, s),
    }
}

/// Roots become initial, roots emptied.
pub fn uproot<L: Clone>(s: &SetSystem<L>) -> SetSystem<L> {
    let mut out = s.clone();
    for v in &mut out.vertices {
        v.initial = v.root;
        v.root = false;
    }
    out
}

/// Initial vertices become roots.
pub fn plant<L: Clone>(s: &SetSystem<L>) -> SetSystem<L> {
    let mut out = s.clone();
    for v in &mut out.vertices {
        v.root |= v.initial;
        v.initial = false;
    }
    out
}

/// Two copies of the outer system: copy 0 carries uprooted inner systems and is
/// entirely initial, copy 1 is initial on former roots; transitions land in copy 1.
///
/// Copy 1 also forgets its inner roots. Kept, they would become roots of the
/// flattening, and `uproot(flatten(N))` has none to map them to.
pub fn fuproot<L: Clone>(n: &Nested<L>) -> Nested<L> {
    let len = n.len();
    let mut out = SetSystem::new(n.rank);
    for v in &n.vertices {
        out.add_vertex(format!("0.{}", v.id), uproot(&v.label), true, false);
    }
    for v in &n.vertices {
        let mut inner = v.label.clone();
        for w in &mut inner.vertices {
            w.root = false;
        }
        out.add_vertex(format!("1.{}", v.id), inner, v.root, false);
    }
    for e in &n.edges {
        for m in 0..2 {
            match e.tgt {
                Target::Vertex(w) => out.add_edge(m * len + e.src, e.dir, len + w),
                Target::Var(y) => out.add_var_edge(m * len + e.src, e.dir, y),
            }
        }
    }
    out
}

/// The unique hole vertex of a set-context.
pub fn hole_vertex(c: &SetSystem<Sym>) -> Result<usize> {
    let holes: Vec<usize> = (0..c.len()).filter(|&v| c.vertices[v].label.is_hole()).collect();
    match holes.as_slice() {
        [h] => Ok(*h),
        [] => input("context has no hole vertex"),
        _ => input(format!("context has {} hole vertices", holes.len())),
    }
}

/// `C[S]`: flatten the context with `S` at the hole and atomic labels elsewhere.
pub fn plug(c: &SetSystem<Sym>, s: &SetSystem<Sym>) -> Result<SetSystem<Sym>> {
    let h = hole_vertex(c)?;
    rank_check(c.vertices[h].label.rank, s.rank)?;
    let nested = c.map_labels(|v, l| if v == h { s.clone() } else { atomic(l.clone()) });
    flatten(&nested)
}

/// Plug into an arbitrary vertex-labelled context whose hole is given by position.
pub fn plug_at<L: Ranked + Clone>(c: &SetSystem<L>, h: usize, s: &SetSystem<L>) -> Result<SetSystem<L>> {
    rank_check(c.vertices[h].label.rank(), s.rank)?;
    let nested = c.map_labels(|v, l| if v == h { s.clone() } else { atomic(l.clone()) });
    flatten(&nested)
}

/// `Context(S0, ..., Sn)`: disjoint union plus a hole of rank n. Variable edges
/// `(v,d,x1)` are rerouted to the hole; the hole's direction `d` feeds the initial
/// vertices of `S_d`. Only the initial vertices of `S0` stay initial.
pub fn make_context<L: Clone>(parts: &[&SetSystem<L>], hole: L) -> Result<SetSystem<L>> {
    make_context_flagged(parts, hole, false, false)
}

/// As [`make_context`], with explicit initial/root flags for the hole vertex.
pub fn make_context_flagged<L: Clone>(parts: &[&SetSystem<L>], hole: L, hole_initial: bool, hole_root: bool) -> Result<SetSystem<L>> {
    if parts.is_empty() {
        return input("a context needs at least S0");
    }
    let mut out = SetSystem::new(0);
    let mut offsets = Vec::new();
    for (i, p) in parts.iter().enumerate() {
        if p.rank != 1 {
            return Err(Error::Rank { expected: 1, found: p.rank });
        }
        let off = out.len();
        offsets.push(off);
        for v in &p.vertices {
            out.add_vertex(format!("{i}:{}", v.id), v.label.clone(), i == 0 && v.initial, v.root);
        }
    }
    let h = out.add_vertex("h", hole, hole_initial, hole_root);
    for (i, p) in parts.iter().enumerate() {
        let off = offsets[i];
        for e in &p.edges {
            match e.tgt {
                Target::Vertex(w) => out.add_edge(e.src + off, e.dir, w + off),
                Target::Var(_) => out.add_edge(e.src + off, e.dir, h),
            }
        }
        if i >= 1 {
            for s in p.initial() {
                out.add_edge(h, i, s + off);
            }
        }
    }
    Ok(out)
}

/// The pieces `P0..Pn` of a closed set-context, plus the hole's own flags.
#[derive(Clone, Debug, PartialEq)]
pub struct Pieces<L> {
    pub parts: Vec<SetSystem<L>>,
    pub hole_initial: bool,
    pub hole_root: bool,
}

pub fn pieces(c: &SetSystem<Sym>) -> Result<Pieces<Sym>> {
    let h = hole_vertex(c)?;
    pieces_at(c, h)
}

pub fn pieces_at<L: Ranked + Clone>(c: &SetSystem<L>, h: usize) -> Result<Pieces<L>> {
    if !c.is_closed() {
        return input("pieces need a closed context");
    }
    if c.out(h).any(|(_, t)| t == Target::Vertex(h)) {
        return Err(Error::Precondition("the hole vertex has a self-loop; pieces cannot express it".into()));
    }
    let n = c.vertices[h].label.rank();
    let keep: Vec<bool> = (0..c.len()).map(|v| v != h).collect();
    let mut base: SetSystem<L> = SetSystem::new(1);
    let mut pos = vec![usize::MAX; c.len()];
    for (v, vx) in c.vertices.iter().enumerate() {
        if keep[v] {
            pos[v] = base.add_vertex(vx.id.clone(), vx.label.clone(), false, vx.root);
        }
    }
    for e in &c.edges {
        if e.src == h {
            continue;
        }
        match e.tgt {
            Target::Vertex(w) if w == h => base.add_var_edge(pos[e.src], e.dir, 1),
            Target::Vertex(w) => base.add_edge(pos[e.src], e.dir, pos[w]),
            Target::Var(_) => unreachable!("closed context"),
        }
    }
    let mut parts = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let mut p = base.clone();
        let init: Vec<usize> = if i == 0 {
            c.initial().into_iter().filter(|&v| v != h).collect()
        } else {
            c.succ(h, i)
                .into_iter()
                .filter_map(|t| match t {
                    Target::Vertex(w) if w != h => Some(w),
                    _ => None,
                })
                .collect()
        };
        for v in init {
            p.vertices[pos[v]].initial = true;
        }
        parts.push(p);
    }
    Ok(Pieces { parts, hole_initial: c.vertices[h].initial, hole_root: c.vertices[h].root })
}

/// Reassemble pieces into a context (keeping the hole flags).
pub fn recompose<L: Clone>(p: &Pieces<L>, hole: L) -> Result<SetSystem<L>> {
    let refs: Vec<&SetSystem<L>> = p.parts.iter().collect();
    make_context_flagged(&refs, hole, p.hole_initial, p.hole_root)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canon::isomorphic;
    use crate::model::expr::from_expression;

    fn e(s: &str) -> SetSystem<Sym> {
        from_expression(s, None).unwrap()
    }

    #[test]
    fn atomic_is_one_vertex() {
        let a = atomic(Sym::new("a2", 2));
        assert!(isomorphic(&a, &e("a2(x1,x2)")));
        let c = atomic(Sym::new("c", 0));
        assert_eq!(c.len(), 1);
        assert!(c.is_system() && c.is_closed());
    }

    #[test]
    fn flatten_chain_by_hand() {
        // outer v1 -> v2, inner a1(x1) at v1 and closed b at v2
        let mut n: Nested<Sym> = SetSystem::new(0);
        let v1 = n.add_vertex("v1", e("a1(x1)"), true, false);
        let v2 = n.add_vertex("v2", e("b"), false, false);
        n.add_edge(v1, 1, v2);
        let f = flatten(&n).unwrap();
        assert!(isomorphic(&f, &e("a1(b)")));
    }

    #[test]
    fn unit_laws() {
        let s = e("a2(x1, c(b + d, x2))");
        assert!(isomorphic(&flatten(&atomic(s.clone())).unwrap(), &s));
        let lifted = lift(&s, |l| atomic(l.clone()));
        assert!(isomorphic(&flatten(&lifted).unwrap(), &s));
    }

    #[test]
    fn constant_rename() {
        let s = e("a2(x1,x2)");
        let r = rename(&[1, 1], 1, &s).unwrap();
        assert!(isomorphic(&r, &e("a2(x1,x1)")));
        assert_eq!(rename(&[1, 2], 2, &s).unwrap(), s);
    }

    #[test]
    fn dupname_breaks_systems() {
        // σ: [2] → [1] constant; dupname sends rank 1 to rank 2, duplicating x1.
        let s = e("a1(x1)");
        let d = dupname(&[1, 1], 1, &s).unwrap();
        assert_eq!(d.rank, 2);
        assert_eq!(d.succ(0, 1).len(), 2);
        assert!(!d.is_system());
        // σ: [1] → [2] hitting 2 only: the x1 edge has no preimage.
        let s2 = e("a2(x1,x2)");
        let d2 = dupname(&[2], 2, &s2).unwrap();
        assert_eq!(d2.succ(0, 1).len(), 0);
        assert!(!d2.is_system());
    }

    #[test]
    fn plant_and_uproot() {
        let mut s = e("a(b, c)");
        s.vertices[1].root = true;
        let up = uproot(&plant(&s));
        assert_eq!(up.initial(), vec![0, 1]);
        assert!(up.roots().is_empty());
    }

    #[test]
    fn plug_into_hole_only_context() {
        let c = atomic(Sym::hole(2));
        let s = e("a2(x2, b)");
        assert!(isomorphic(&plug(&c, &s).unwrap(), &s));
    }

    #[test]
    fn plug_sum_context() {
        let a = crate::model::RankedAlphabet::from_pairs(&[("hole", 1), ("b", 0), ("c", 0)]);
        let c = from_expression("hole(b + c)", Some(&a)).unwrap();
        let r = plug(&c, &e("a2(x1,x1)")).unwrap();
        // both directions share the single b and c vertices
        assert_eq!(r.len(), 3);
        let a = r.initial()[0];
        assert_eq!(r.succ(a, 1).len(), 2);
        assert_eq!(r.succ(a, 1), r.succ(a, 2));
    }

    #[test]
    fn context_of_rank_zero() {
        let s0 = e("f(x1)");
        let c = make_context(&[&s0], Sym::hole(0)).unwrap();
        assert!(c.is_closed());
        assert_eq!(c.vertices[hole_vertex(&c).unwrap()].label.rank, 0);
        assert_eq!(c.succ(0, 1), vec![Target::Vertex(1)]);
    }

    #[test]
    fn pieces_of_a_context() {
        let s0 = e("f(x1)");
        let s1 = e("g(x1, b)");
        let c = make_context(&[&s0, &s1], Sym::hole(1)).unwrap();
        let p = pieces(&c).unwrap();
        assert_eq!(p.parts.len(), 2);
        assert_eq!(p.parts[0].initial().len(), 1);
        assert_eq!(p.parts[0].vertices[p.parts[0].initial()[0]].label.name, "f");
        assert_eq!(p.parts[1].vertices[p.parts[1].initial()[0]].label.name, "g");
        assert!(p.parts.iter().all(|x| x.rank == 1 && x.len() == 3));
    }

    #[test]
    fn fuproot_doubles_outer_vertices() {
        let mut n: Nested<Sym> = SetSystem::new(0);
        let mut inner = e("b");
        inner.vertices[0].root = true;
        n.add_vertex("v", inner, false, true);
        let f = fuproot(&n);
        assert_eq!(f.len(), 2);
        assert!(f.vertices[0].initial && f.vertices[1].initial);
        assert!(f.vertices[0].label.vertices[0].initial);
    }
}
