//! Seeded generators for test corpora: random set-systems, nested systems, contexts,
//! morphism-related pairs, transition systems, parity games, and an exhaustive
//! enumerator of small closed systems.
//!
//! Every generator draws only from the [`Gen`] it is given, so a seed fixes the
//! whole corpus.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::automata::{ParityGame, Player};
use crate::model::alphabet::RankedAlphabet;
use crate::model::ts::{ts_symbol, TransitionSystem};
use crate::model::{Nested, Ranked, SetSystem, Sym, Target};
use crate::morphism::VertexMap;

/// Shape knobs for random set-systems.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Shape {
    pub max_vertices: usize,
    /// One initial vertex, no roots, one target per direction.
    pub deterministic: bool,
    /// Chance that a direction may exit through a variable (when the rank allows).
    pub var_chance: f64,
}

impl Shape {
    pub fn set_system(max_vertices: usize) -> Self {
        Shape { max_vertices, deterministic: false, var_chance: 0.25 }
    }

    pub fn system(max_vertices: usize) -> Self {
        Shape { max_vertices, deterministic: true, var_chance: 0.25 }
    }
}

pub struct Gen {
    rng: ChaCha8Rng,
}

impl Gen {
    pub fn new(seed: u64) -> Self {
        Gen { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    pub fn below(&mut self, n: usize) -> usize {
        self.rng.gen_range(0..n)
    }

    pub fn between(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.gen_range(lo..=hi)
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        items.choose(&mut self.rng).expect("nonempty choice")
    }

    /// A random nonempty subset of `items`.
    pub fn nonempty_subset<T: Clone>(&mut self, items: &[T]) -> Vec<T> {
        loop {
            let out: Vec<T> = items.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect();
            if !out.is_empty() {
                return out;
            }
        }
    }

    /// A random symbol of `alphabet` of rank at most `max_rank`.
    pub fn symbol(&mut self, alphabet: &RankedAlphabet, max_rank: usize) -> Sym {
        let pool: Vec<&Sym> = alphabet.symbols.iter().filter(|s| s.rank <= max_rank).collect();
        (*self.pick(&pool)).clone()
    }

    /// A random set-system whose labels come from `label`; the skeleton follows `shape`.
    pub fn shaped<L: Ranked>(&mut self, rank: usize, shape: Shape, label: &mut dyn FnMut(&mut Gen) -> L) -> SetSystem<L> {
        let n = self.between(1, shape.max_vertices.max(1));
        let mut s = SetSystem::new(rank);
        for v in 0..n {
            let l = label(self);
            let (initial, root) = if shape.deterministic { (v == 0, false) } else { (v == 0 || self.chance(0.15), self.chance(0.1)) };
            s.add_vertex(format!("v{v}"), l, initial, root);
        }
        for v in 0..n {
            for d in 1..=s.vertices[v].label.rank() {
                let count = if shape.deterministic {
                    1
                } else {
                    match self.below(20) {
                        0 | 1 => 0,
                        2..=14 => 1,
                        _ => 2,
                    }
                };
                for _ in 0..count {
                    if rank > 0 && self.chance(shape.var_chance) {
                        let x = self.between(1, rank);
                        s.add_var_edge(v, d, x);
                    } else {
                        let w = self.below(n);
                        s.add_edge(v, d, w);
                    }
                }
            }
        }
        s
    }

    pub fn set_system(&mut self, alphabet: &RankedAlphabet, rank: usize, shape: Shape) -> SetSystem<Sym> {
        let top = alphabet.max_rank();
        self.shaped(rank, shape, &mut |g| g.symbol(alphabet, top))
    }

    /// A random system: deterministic, closed when `rank` is 0.
    pub fn system(&mut self, alphabet: &RankedAlphabet, rank: usize, max_vertices: usize) -> SetSystem<Sym> {
        self.set_system(alphabet, rank, Shape::system(max_vertices))
    }

    /// A set-system of set-systems: each outer vertex carries an inner set-system
    /// of a random rank up to `max_inner_rank`.
    pub fn nested(&mut self, alphabet: &RankedAlphabet, rank: usize, shape: Shape, max_inner_rank: usize) -> Nested<Sym> {
        self.shaped(rank, shape, &mut |g| {
            let r = g.between(0, max_inner_rank);
            g.set_system(alphabet, r, shape)
        })
    }

    /// Three levels of set-systems.
    pub fn nested3(&mut self, alphabet: &RankedAlphabet, rank: usize, shape: Shape, max_inner_rank: usize) -> SetSystem<Nested<Sym>> {
        self.shaped(rank, shape, &mut |g| {
            let r = g.between(0, max_inner_rank);
            g.nested(alphabet, r, shape, max_inner_rank)
        })
    }

    /// A closed context: a closed set-system (or system, per `shape`) in which one
    /// vertex is the hole of rank `hole_rank`. The hole never points at itself.
    pub fn context(&mut self, alphabet: &RankedAlphabet, hole_rank: usize, shape: Shape) -> SetSystem<Sym> {
        let mut c = self.set_system(alphabet, 0, Shape { var_chance: 0.0, ..shape });
        let h = self.below(c.len());
        if c.len() == 1 {
            let sym = self.symbol(alphabet, 0);
            c.add_vertex("leaf", sym, false, false);
        }
        c.vertices[h].label = Sym::hole(hole_rank);
        c.edges.retain(|e| e.src != h);
        let others: Vec<usize> = (0..c.len()).filter(|&v| v != h).collect();
        for d in 1..=hole_rank {
            let targets = if shape.deterministic { vec![*self.pick(&others)] } else { self.nonempty_subset(&others) };
            for w in targets {
                c.add_edge(h, d, w);
            }
        }
        // make sure the hole is visible from somewhere
        if !c.vertices[h].initial && !c.vertices[h].root && !c.edges.iter().any(|e| e.tgt == Target::Vertex(h)) {
            let v = *self.pick(&others);
            let dirs = c.vertices[v].label.rank;
            if dirs > 0 {
                let d = self.between(1, dirs);
                if shape.deterministic {
                    c.edges.retain(|e| !(e.src == v && e.dir == d));
                }
                c.add_edge(v, d, h);
            } else if !shape.deterministic {
                c.vertices[h].initial = true;
            }
        }
        c
    }

    /// `S'` with a locally surjective morphism `S' → S`: every vertex is copied one
    /// or two times and every copy picks a nonempty set of copies of each target.
    pub fn locally_surjective_cover<L: Clone>(&mut self, s: &SetSystem<L>) -> (SetSystem<L>, VertexMap) {
        let copies: Vec<Vec<usize>> = {
            let mut next = 0;
            (0..s.len())
                .map(|_| {
                    let k = self.between(1, 2);
                    next += k;
                    (next - k..next).collect()
                })
                .collect()
        };
        let mut out = SetSystem::new(s.rank);
        let mut map = Vec::new();
        for (v, vx) in s.vertices.iter().enumerate() {
            let init = self.flags(vx.initial, copies[v].len());
            let root = self.flags(vx.root, copies[v].len());
            for (j, _) in copies[v].iter().enumerate() {
                out.add_vertex(format!("{}.{j}", vx.id), vx.label.clone(), init[j], root[j]);
                map.push(v);
            }
        }
        for v in 0..s.len() {
            for &c in &copies[v] {
                for (d, t) in s.out(v) {
                    match t {
                        Target::Var(x) => out.add_var_edge(c, d, x),
                        Target::Vertex(w) => {
                            for c2 in self.nonempty_subset(&copies[w]) {
                                out.add_edge(c, d, c2);
                            }
                        }
                    }
                }
            }
        }
        (out, map)
    }

    fn flags(&mut self, on: bool, n: usize) -> Vec<bool> {
        if !on {
            return vec![false; n];
        }
        let mut f: Vec<bool> = (0..n).map(|_| self.chance(0.5)).collect();
        let k = self.below(n);
        f[k] = true;
        f
    }

    /// An unfolding of a system: copies of vertices, each copy picking one copy of
    /// each successor. The returned map is a morphism onto `s`.
    pub fn unfolding<L: Clone>(&mut self, s: &SetSystem<L>) -> (SetSystem<L>, VertexMap) {
        let counts: Vec<usize> = (0..s.len()).map(|_| self.between(1, 3)).collect();
        let mut first = Vec::with_capacity(s.len());
        let mut out = SetSystem::new(s.rank);
        let mut map = Vec::new();
        for (v, vx) in s.vertices.iter().enumerate() {
            first.push(out.len());
            for j in 0..counts[v] {
                out.add_vertex(format!("{}.{j}", vx.id), vx.label.clone(), vx.initial && j == 0, false);
                map.push(v);
            }
        }
        for v in 0..s.len() {
            for j in 0..counts[v] {
                for (d, t) in s.out(v) {
                    match t {
                        Target::Var(x) => out.add_var_edge(first[v] + j, d, x),
                        Target::Vertex(w) => {
                            let k = self.below(counts[w]);
                            out.add_edge(first[v] + j, d, first[w] + k);
                        }
                    }
                }
            }
        }
        (out, map)
    }

    /// A random transition system with out-degree at most `max_degree`.
    pub fn transition_system(&mut self, max_states: usize, props: &[&str], max_degree: usize) -> TransitionSystem {
        let n = self.between(1, max_states.max(1));
        let ids = (0..n).map(|v| format!("s{v}")).collect();
        let props = (0..n).map(|_| props.iter().filter(|_| self.chance(0.3)).map(|p| p.to_string()).collect()).collect();
        let mut transitions = BTreeSet::new();
        for v in 0..n {
            let k = self.between(0, max_degree.min(n));
            for _ in 0..k {
                transitions.insert((v, self.below(n)));
            }
        }
        TransitionSystem { ids, props, initial: 0, transitions }
    }

    /// A closed system over valuation symbols encoding a transition system bisimilar
    /// to `ts`: states are duplicated, and each copy lists its successors through a
    /// random surjection from up to `max_rank` children, so children repeat and move.
    pub fn bisimilar_encoding(&mut self, ts: &TransitionSystem, max_rank: usize) -> SetSystem<Sym> {
        let counts: Vec<usize> = (0..ts.len()).map(|_| self.between(1, 2)).collect();
        let mut first = Vec::with_capacity(ts.len());
        let mut total = 0;
        for &c in &counts {
            first.push(total);
            total += c;
        }
        let mut s = SetSystem::new(0);
        let mut plan = Vec::new();
        for v in 0..ts.len() {
            let succ = ts.successors(v);
            for j in 0..counts[v] {
                let k = succ.len();
                let width = if k == 0 { 0 } else { self.between(k, max_rank.max(k)) };
                let sigma = self.surjection(width, k);
                s.add_vertex(format!("{}.{j}", ts.ids[v]), ts_symbol(&ts.props[v], width), v == ts.initial && j == 0, false);
                plan.push((succ.clone(), sigma));
            }
        }
        for (u, (succ, sigma)) in plan.into_iter().enumerate() {
            for (d, &i) in sigma.iter().enumerate() {
                let w = succ[i];
                let copy = first[w] + self.below(counts[w]);
                s.add_edge(u, d + 1, copy);
            }
        }
        s
    }

    /// A uniformly shuffled surjection `[n] → [k]` (0-based values), `n ≥ k`.
    pub fn surjection(&mut self, n: usize, k: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..k).collect();
        while out.len() < n {
            out.push(self.below(k));
        }
        out.shuffle(&mut self.rng);
        out
    }

    /// A random parity game without dead ends.
    pub fn parity_game(&mut self, max_positions: usize, max_priority: usize) -> ParityGame {
        let n = self.between(1, max_positions.max(1));
        let mut g = ParityGame { owner: Vec::new(), priority: Vec::new(), moves: Vec::new(), initial: 0 };
        for _ in 0..n {
            let owner = if self.chance(0.5) { Player::Eve } else { Player::Adam };
            let pr = self.between(0, max_priority);
            g.add(owner, pr);
        }
        for v in 0..n {
            let k = self.between(1, 3.min(n));
            let mut succ: Vec<usize> = (0..k).map(|_| self.below(n)).collect();
            succ.sort_unstable();
            succ.dedup();
            g.moves[v] = succ;
        }
        g
    }
}

/// Every accessible closed system with at most `max_vertices` vertices over
/// `alphabet`, one per isomorphism class of its accessible part: vertices are
/// numbered in breadth-first discovery order from the initial vertex, directions in
/// order. Symbols of positive rank are required to exist for systems beyond one vertex.
pub fn enumerate_closed_systems(alphabet: &RankedAlphabet, max_vertices: usize, visit: &mut dyn FnMut(&SetSystem<Sym>)) {
    if max_vertices == 0 {
        return;
    }
    let mut labels: Vec<Sym> = Vec::new();
    let mut targets: Vec<Vec<usize>> = Vec::new();
    grow(alphabet, max_vertices, &mut labels, &mut targets, 1, visit);
}

/// `labels[..]` are fixed for processed vertices; `targets[v]` is complete for all
/// processed vertices. `discovered` vertices exist; the next to process is
/// `labels.len()`.
fn grow(
    alphabet: &RankedAlphabet,
    max: usize,
    labels: &mut Vec<Sym>,
    targets: &mut Vec<Vec<usize>>,
    discovered: usize,
    visit: &mut dyn FnMut(&SetSystem<Sym>),
) {
    let v = labels.len();
    if v == discovered {
        let mut s = SetSystem::new(0);
        for (i, l) in labels.iter().enumerate() {
            s.add_vertex(format!("v{i}"), l.clone(), i == 0, false);
        }
        for (i, ts) in targets.iter().enumerate() {
            for (d, &w) in ts.iter().enumerate() {
                s.add_edge(i, d + 1, w);
            }
        }
        visit(&s);
        return;
    }
    for sym in &alphabet.symbols {
        labels.push(sym.clone());
        targets.push(Vec::new());
        fill(alphabet, max, labels, targets, discovered, sym.rank, visit);
        targets.pop();
        labels.pop();
    }
}

fn fill(
    alphabet: &RankedAlphabet,
    max: usize,
    labels: &mut Vec<Sym>,
    targets: &mut Vec<Vec<usize>>,
    discovered: usize,
    rank: usize,
    visit: &mut dyn FnMut(&SetSystem<Sym>),
) {
    let v = labels.len() - 1;
    if targets[v].len() == rank {
        grow(alphabet, max, labels, targets, discovered, visit);
        return;
    }
    let fresh = if discovered < max { discovered + 1 } else { discovered };
    for w in 0..fresh {
        targets[v].push(w);
        fill(alphabet, max, labels, targets, discovered.max(w + 1), rank, visit);
        targets[v].pop();
    }
}

/// The symbols `name → rank` as an alphabet, for generators.
pub fn alphabet(pairs: &[(&str, usize)]) -> RankedAlphabet {
    RankedAlphabet::from_pairs(pairs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::equiv::{bisimilar, unfold_equivalent};
    use crate::model::canon::isomorphic;
    use crate::model::ts::decode_ts;
    use crate::morphism::check_morphism;

    fn sigma() -> RankedAlphabet {
        alphabet(&[("a2", 2), ("b1", 1), ("c0", 0)])
    }

    #[test]
    fn same_seed_same_corpus() {
        let (mut g, mut h) = (Gen::new(7), Gen::new(7));
        for _ in 0..20 {
            let a = g.set_system(&sigma(), 2, Shape::set_system(5));
            let b = h.set_system(&sigma(), 2, Shape::set_system(5));
            assert_eq!(a, b);
        }
    }

    #[test]
    fn systems_are_systems() {
        let mut g = Gen::new(1);
        for _ in 0..50 {
            assert!(g.system(&sigma(), 2, 5).is_system());
        }
    }

    #[test]
    fn covers_are_locally_surjective() {
        let mut g = Gen::new(2);
        for _ in 0..50 {
            let s = g.set_system(&sigma(), 1, Shape::set_system(4));
            let (s2, map) = g.locally_surjective_cover(&s);
            assert!(check_morphism(&s2, &s, &map).unwrap().is_locally_surjective());
        }
    }

    #[test]
    fn unfoldings_are_equivalent() {
        let mut g = Gen::new(3);
        for _ in 0..50 {
            let s = g.system(&sigma(), 1, 4);
            let (s2, map) = g.unfolding(&s);
            assert!(s2.is_system());
            assert!(check_morphism(&s2, &s, &map).unwrap().is_morphism());
            assert!(unfold_equivalent(&s, &s2).unwrap().holds());
        }
    }

    #[test]
    fn encodings_are_bisimilar() {
        let mut g = Gen::new(4);
        for _ in 0..50 {
            let ts = g.transition_system(4, &["b"], 2);
            let enc = g.bisimilar_encoding(&ts, 3);
            assert!(bisimilar(&ts, &decode_ts(&enc).unwrap()).holds());
        }
    }

    #[test]
    fn contexts_have_one_hole() {
        let mut g = Gen::new(5);
        for _ in 0..50 {
            let c = g.context(&sigma(), 2, Shape::set_system(4));
            let holes: Vec<usize> = (0..c.len()).filter(|&v| c.vertices[v].label.is_hole()).collect();
            assert_eq!(holes.len(), 1);
            assert!(c.is_closed());
            assert!(!c.out(holes[0]).any(|(_, t)| t == Target::Vertex(holes[0])));
        }
    }

    #[test]
    fn enumeration_is_up_to_isomorphism() {
        let mut all = Vec::new();
        enumerate_closed_systems(&alphabet(&[("b1", 1), ("c0", 0)]), 2, &mut |s| all.push(s.clone()));
        // c; b1 looping; b1 over c; b1 over a b1 that loops or returns
        for (i, a) in all.iter().enumerate() {
            assert!(a.is_system() && a.reachable().iter().all(|&r| r));
            for b in &all[i + 1..] {
                assert!(!isomorphic(a, b));
            }
        }
        assert_eq!(all.len(), 5);
    }
}
