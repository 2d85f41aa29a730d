//! Morphisms of set-systems: checking, search, composition, pullbacks.

use std::collections::BTreeSet;
use std::ops::ControlFlow;

use serde::Serialize;

use crate::error::{input, rank_check, Result};
use crate::model::{Ranked, SetSystem, Target};
use crate::monad::{dupname, rename};

/// A vertex map, source position to target position.
pub type VertexMap = Vec<usize>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    Label { vertex: usize },
    Initial { vertex: usize },
    Root { vertex: usize },
    Edge { src: usize, dir: usize, target: String },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum MorphismCheck {
    NotAMorphism { witness: Violation },
    Morphism,
    LocallySurjective,
}

impl MorphismCheck {
    pub fn is_morphism(&self) -> bool {
        !matches!(self, MorphismCheck::NotAMorphism { .. })
    }

    pub fn is_locally_surjective(&self) -> bool {
        matches!(self, MorphismCheck::LocallySurjective)
    }
}

fn image(t: Target, map: &[usize]) -> Target {
    match t {
        Target::Vertex(w) => Target::Vertex(map[w]),
        x => x,
    }
}

fn check_total<L, M>(s: &SetSystem<L>, t: &SetSystem<M>, map: &[usize]) -> Result<()> {
    rank_check(s.rank, t.rank)?;
    if map.len() != s.len() {
        return input(format!("map has {} entries for {} vertices", map.len(), s.len()));
    }
    if let Some(&w) = map.iter().find(|&&w| w >= t.len()) {
        return input(format!("map value {w} is not a target vertex"));
    }
    Ok(())
}

/// Classify `map` as a non-morphism (with a violated condition), a morphism, or a
/// locally surjective morphism. Labels must be preserved.
pub fn check_morphism<L: PartialEq>(s: &SetSystem<L>, t: &SetSystem<L>, map: &[usize]) -> Result<MorphismCheck> {
    check_total(s, t, map)?;
    let not = |witness| Ok(MorphismCheck::NotAMorphism { witness });
    for (v, vx) in s.vertices.iter().enumerate() {
        let w = &t.vertices[map[v]];
        if vx.label != w.label {
            return not(Violation::Label { vertex: v });
        }
        if vx.initial && !w.initial {
            return not(Violation::Initial { vertex: v });
        }
        if vx.root && !w.root {
            return not(Violation::Root { vertex: v });
        }
    }
    for e in &s.edges {
        let img = crate::model::Edge { src: map[e.src], dir: e.dir, tgt: image(e.tgt, map) };
        if !t.edges.contains(&img) {
            let target = match e.tgt {
                Target::Vertex(w) => format!("vertex {w}"),
                Target::Var(x) => format!("x{x}"),
            };
            return not(Violation::Edge { src: e.src, dir: e.dir, target });
        }
    }
    Ok(if locally_surjective(s, t, map) { MorphismCheck::LocallySurjective } else { MorphismCheck::Morphism })
}

fn locally_surjective<L>(s: &SetSystem<L>, t: &SetSystem<L>, map: &[usize]) -> bool {
    let img = |vs: Vec<usize>| vs.into_iter().map(|v| map[v]).collect::<BTreeSet<_>>();
    if img(s.initial()) != t.initial().into_iter().collect() || img(s.roots()) != t.roots().into_iter().collect() {
        return false;
    }
    (0..s.len()).all(|v| {
        let here: BTreeSet<(usize, Target)> = s.out(v).map(|(d, x)| (d, image(x, map))).collect();
        let there: BTreeSet<(usize, Target)> = t.out(map[v]).collect();
        here == there
    })
}

/// `η' ∘ η`.
pub fn compose(eta: &[usize], eta2: &[usize]) -> Result<VertexMap> {
    if let Some(&w) = eta.iter().find(|&&w| w >= eta2.len()) {
        return input(format!("maps do not chain: {w} is outside the middle system"));
    }
    Ok(eta.iter().map(|&v| eta2[v]).collect())
}

/// Search constraints.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SearchMode {
    pub locally_surjective: bool,
}

/// Visit every morphism `s → t` (in search order) until `visit` breaks.
pub fn for_each_morphism<L: PartialEq>(s: &SetSystem<L>, t: &SetSystem<L>, mode: SearchMode, mut visit: impl FnMut(&[usize]) -> ControlFlow<()>) {
    if s.rank != t.rank {
        return;
    }
    let order = search_order(s);
    let s_vars: Vec<BTreeSet<(usize, usize)>> = (0..s.len()).map(|v| vars_of(s, v)).collect();
    let t_vars: Vec<BTreeSet<(usize, usize)>> = (0..t.len()).map(|v| vars_of(t, v)).collect();
    let s_dirs: Vec<BTreeSet<usize>> = (0..s.len()).map(|v| vertex_dirs(s, v)).collect();
    let t_dirs: Vec<BTreeSet<usize>> = (0..t.len()).map(|v| vertex_dirs(t, v)).collect();
    let candidates: Vec<Vec<usize>> = (0..s.len())
        .map(|v| {
            let vx = &s.vertices[v];
            (0..t.len())
                .filter(|&w| {
                    let wx = &t.vertices[w];
                    vx.label == wx.label
                        && (!vx.initial || wx.initial)
                        && (!vx.root || wx.root)
                        && if mode.locally_surjective {
                            s_vars[v] == t_vars[w] && s_dirs[v] == t_dirs[w]
                        } else {
                            s_vars[v].is_subset(&t_vars[w]) && s_dirs[v].is_subset(&t_dirs[w])
                        }
                })
                .collect()
        })
        .collect();
    let mut map = vec![usize::MAX; s.len()];
    let mut st = Search { s, t, mode, order: &order, candidates: &candidates, map: &mut map };
    let _ = st.go(0, &mut visit);
}

fn vars_of<L>(s: &SetSystem<L>, v: usize) -> BTreeSet<(usize, usize)> {
    s.out(v)
        .filter_map(|(d, x)| match x {
            Target::Var(y) => Some((d, y)),
            _ => None,
        })
        .collect()
}

fn vertex_dirs<L>(s: &SetSystem<L>, v: usize) -> BTreeSet<usize> {
    s.out(v).filter(|(_, x)| matches!(x, Target::Vertex(_))).map(|(d, _)| d).collect()
}

/// Initial vertices first, then roots, then BFS successors, then the rest.
fn search_order<L>(s: &SetSystem<L>) -> Vec<usize> {
    let mut order = Vec::new();
    let mut seen = vec![false; s.len()];
    let mut starts = s.initial();
    starts.extend(s.roots());
    starts.extend(0..s.len());
    for st in starts {
        if seen[st] {
            continue;
        }
        seen[st] = true;
        let mut queue = std::collections::VecDeque::from([st]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for (_, t) in s.out(v) {
                if let Target::Vertex(w) = t {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
        }
    }
    order
}

struct Search<'a, L> {
    s: &'a SetSystem<L>,
    t: &'a SetSystem<L>,
    mode: SearchMode,
    order: &'a [usize],
    candidates: &'a [Vec<usize>],
    map: &'a mut Vec<usize>,
}

impl<L: PartialEq> Search<'_, L> {
    fn go(&mut self, i: usize, visit: &mut impl FnMut(&[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        if i == self.order.len() {
            if self.mode.locally_surjective && !locally_surjective(self.s, self.t, self.map) {
                return ControlFlow::Continue(());
            }
            return visit(self.map);
        }
        let v = self.order[i];
        for &w in &self.candidates[v] {
            self.map[v] = w;
            if self.consistent(v) {
                self.go(i + 1, visit)?;
            }
        }
        self.map[v] = usize::MAX;
        ControlFlow::Continue(())
    }

    // Edges between v and already-mapped vertices must land on edges.
    fn consistent(&self, v: usize) -> bool {
        let map = &self.map;
        let ok_from = |u: usize| {
            self.s.out(u).all(|(d, x)| match x {
                Target::Vertex(w) if map[w] != usize::MAX => self.t.edges.contains(&crate::model::Edge::to_vertex(map[u], d, map[w])),
                _ => true,
            })
        };
        if !ok_from(v) {
            return false;
        }
        // predecessors of v that are already mapped
        let preds_ok = self
            .order
            .iter()
            .take_while(|&&u| u != v)
            .all(|&u| self.s.out(u).all(|(d, x)| x != Target::Vertex(v) || self.t.edges.contains(&crate::model::Edge::to_vertex(map[u], d, map[v]))));
        if !preds_ok {
            return false;
        }
        if self.mode.locally_surjective && self.s.out(v).all(|(_, x)| matches!(x, Target::Vertex(w) if map[w] != usize::MAX) || matches!(x, Target::Var(_))) {
            let here: BTreeSet<(usize, Target)> = self.s.out(v).map(|(d, x)| (d, image(x, map))).collect();
            let there: BTreeSet<(usize, Target)> = self.t.out(map[v]).collect();
            return here == there;
        }
        true
    }
}

pub fn find_morphism<L: PartialEq>(s: &SetSystem<L>, t: &SetSystem<L>) -> Option<VertexMap> {
    find_morphism_with(s, t, SearchMode::default())
}

pub fn find_morphism_with<L: PartialEq>(s: &SetSystem<L>, t: &SetSystem<L>, mode: SearchMode) -> Option<VertexMap> {
    let mut found = None;
    for_each_morphism(s, t, mode, |m| {
        found = Some(m.to_vec());
        ControlFlow::Break(())
    });
    found
}

pub fn all_morphisms<L: PartialEq>(s: &SetSystem<L>, t: &SetSystem<L>) -> Vec<VertexMap> {
    let mut all = Vec::new();
    for_each_morphism(s, t, SearchMode::default(), |m| {
        all.push(m.to_vec());
        ControlFlow::Continue(())
    });
    all
}

/// The pullback of `η: S → T` and `η': S' → T`, with its two projections.
#[derive(Clone, Debug)]
pub struct Pullback<L> {
    pub system: SetSystem<L>,
    /// For each vertex of the pullback, its pair `(v, v')`.
    pub pairs: Vec<(usize, usize)>,
    pub left: VertexMap,
    pub right: VertexMap,
}

pub fn pullback<L: Clone + Ranked>(s: &SetSystem<L>, eta: &[usize], s2: &SetSystem<L>, eta2: &[usize], trim: bool) -> Result<Pullback<L>> {
    rank_check(s.rank, s2.rank)?;
    let mut p = SetSystem::new(s.rank);
    let mut pairs = Vec::new();
    let mut index = vec![vec![usize::MAX; s2.len()]; s.len()];
    for v in 0..s.len() {
        for v2 in 0..s2.len() {
            if eta[v] == eta2[v2] {
                let (a, b) = (&s.vertices[v], &s2.vertices[v2]);
                index[v][v2] = p.add_vertex(format!("({},{})", a.id, b.id), a.label.clone(), a.initial && b.initial, a.root && b.root);
                pairs.push((v, v2));
            }
        }
    }
    for (k, &(v, v2)) in pairs.iter().enumerate() {
        for (d, x) in s.out(v) {
            for (d2, x2) in s2.out(v2) {
                if d != d2 {
                    continue;
                }
                match (x, x2) {
                    (Target::Vertex(w), Target::Vertex(w2)) if index[w][w2] != usize::MAX => p.add_edge(k, d, index[w][w2]),
                    (Target::Var(y), Target::Var(y2)) if y == y2 => p.add_var_edge(k, d, y),
                    _ => {}
                }
            }
        }
    }
    let mut out = Pullback { left: pairs.iter().map(|&(v, _)| v).collect(), right: pairs.iter().map(|&(_, v)| v).collect(), system: p, pairs };
    if trim {
        let keep = out.system.reachable();
        out.system = out.system.restrict(&keep);
        let kept: Vec<usize> = (0..keep.len()).filter(|&i| keep[i]).collect();
        out.pairs = kept.iter().map(|&i| out.pairs[i]).collect();
        out.left = kept.iter().map(|&i| out.left[i]).collect();
        out.right = kept.iter().map(|&i| out.right[i]).collect();
    }
    Ok(out)
}

/// The mediating map `u ↦ (τ(u), τ'(u))` into an untrimmed pullback.
pub fn mediating<L>(pb: &Pullback<L>, tau: &[usize], tau2: &[usize]) -> Option<VertexMap> {
    tau.iter().zip(tau2).map(|(&a, &b)| pb.pairs.iter().position(|&p| p == (a, b))).collect()
}

/// Both sides of the rename/dupname transport for `σ: [m] → [n]`, `ρ: V_S → V_S'`,
/// `S` of rank m and `S'` of rank n.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Transport {
    /// ρ is a morphism `rename_σ(S) → S'`.
    pub via_rename: bool,
    /// ρ is a morphism `S → dupname_σ(S')`.
    pub via_dupname: bool,
}

pub fn rename_transport<L: Clone + PartialEq>(sigma: &[usize], rho: &[usize], s: &SetSystem<L>, s2: &SetSystem<L>) -> Result<Transport> {
    let n = s2.rank;
    let left = rename(sigma, n, s)?;
    let right = dupname(sigma, n, s2)?;
    Ok(Transport { via_rename: check_morphism(&left, s2, rho)?.is_morphism(), via_dupname: check_morphism(s, &right, rho)?.is_morphism() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::from_expression;
    use crate::model::Sym;

    fn e(s: &str) -> SetSystem<Sym> {
        from_expression(s, None).unwrap()
    }

    fn loop1() -> SetSystem<Sym> {
        let mut t = SetSystem::new(0);
        let u = t.add_vertex("u", Sym::new("a", 1), true, false);
        t.add_edge(u, 1, u);
        t
    }

    fn cycle2() -> SetSystem<Sym> {
        let mut t = SetSystem::new(0);
        let u = t.add_vertex("u", Sym::new("a", 1), true, false);
        let w = t.add_vertex("w", Sym::new("a", 1), false, false);
        t.add_edge(u, 1, w);
        t.add_edge(w, 1, u);
        t
    }

    #[test]
    fn identity_is_locally_surjective() {
        let s = e("a(x1, b(x2))");
        let id: Vec<usize> = (0..s.len()).collect();
        assert_eq!(check_morphism(&s, &s, &id).unwrap(), MorphismCheck::LocallySurjective);
    }

    #[test]
    fn folding_two_cycle() {
        let m = find_morphism(&cycle2(), &loop1()).unwrap();
        assert_eq!(m, vec![0, 0]);
        assert!(check_morphism(&cycle2(), &loop1(), &m).unwrap().is_locally_surjective());
    }

    #[test]
    fn initial_to_non_initial_is_rejected() {
        let c = cycle2();
        let r = check_morphism(&c, &c, &[1, 0]).unwrap();
        assert_eq!(r, MorphismCheck::NotAMorphism { witness: Violation::Initial { vertex: 0 } });
    }

    #[test]
    fn variable_edges_must_match() {
        let s = from_expression("f(x1)", None).unwrap();
        let t = crate::monad::rename(&[2], 2, &s).unwrap();
        let s2 = crate::monad::rename(&[1], 2, &s).unwrap();
        assert!(find_morphism(&s2, &t).is_none());
    }

    #[test]
    fn pullback_of_cycle_over_loop() {
        let c = cycle2();
        let pb = pullback(&c, &[0, 0], &c, &[0, 0], false).unwrap();
        assert_eq!(pb.system.len(), 4);
        assert_eq!(pb.system.initial().len(), 1);
        // synchronized steps: (u,u) -> (w,w), (u,w) -> (w,u)
        assert_eq!(pb.system.edges.len(), 4);
        assert!(check_morphism(&pb.system, &c, &pb.left).unwrap().is_locally_surjective());
    }

    #[test]
    fn transport_constant_map() {
        let s = e("a2(x1,x2)");
        let s2 = e("a2(x1,x1)");
        let t = rename_transport(&[1, 1], &[0], &s, &s2).unwrap();
        assert!(t.via_rename && t.via_dupname);
    }

    #[test]
    fn compose_chains() {
        assert_eq!(compose(&[1, 0], &[2, 3]).unwrap(), vec![3, 2]);
        assert!(compose(&[5], &[0]).is_err());
    }
}
