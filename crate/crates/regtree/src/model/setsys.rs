use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

/// Anything that can label a vertex: it has a rank (number of directions).
pub trait Ranked {
    fn rank(&self) -> usize;
}

/// A symbol of a ranked alphabet.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Sym {
    pub name: String,
    pub rank: usize,
}

impl Sym {
    pub fn new(name: impl Into<String>, rank: usize) -> Self {
        Sym { name: name.into(), rank }
    }

    /// The hole symbol of a context of rank `k`.
    pub fn hole(k: usize) -> Self {
        Sym::new(HOLE, k)
    }

    pub fn is_hole(&self) -> bool {
        self.name == HOLE
    }
}

pub const HOLE: &str = "hole";

impl Ranked for Sym {
    fn rank(&self) -> usize {
        self.rank
    }
}

impl fmt::Display for Sym {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Target {
    Vertex(usize),
    /// Variable index, 1-based.
    Var(usize),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub src: usize,
    /// Direction, 1-based.
    pub dir: usize,
    pub tgt: Target,
}

impl Edge {
    pub fn to_vertex(src: usize, dir: usize, dst: usize) -> Self {
        Edge { src, dir, tgt: Target::Vertex(dst) }
    }

    pub fn to_var(src: usize, dir: usize, var: usize) -> Self {
        Edge { src, dir, tgt: Target::Var(var) }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Vertex<L> {
    pub id: String,
    pub label: L,
    pub initial: bool,
    pub root: bool,
}

/// A finite set-system: ranked vertex labels, direction-indexed (possibly
/// nondeterministic) edges, initial and root vertices, and variable exits.
///
/// Vertices are addressed by position; `id` is an opaque name kept for
/// traceability and serialization.
#[derive(Clone, Debug, PartialEq)]
pub struct SetSystem<L> {
    pub rank: usize,
    pub vertices: Vec<Vertex<L>>,
    pub edges: BTreeSet<Edge>,
}

impl<L: Ranked> Ranked for SetSystem<L> {
    fn rank(&self) -> usize {
        self.rank
    }
}

/// Outgoing targets of each vertex, grouped per direction (index `d-1`).
pub type Adjacency = Vec<Vec<Vec<Target>>>;

impl<L> SetSystem<L> {
    pub fn new(rank: usize) -> Self {
        SetSystem { rank, vertices: Vec::new(), edges: BTreeSet::new() }
    }

    pub fn add_vertex(&mut self, id: impl Into<String>, label: L, initial: bool, root: bool) -> usize {
        self.vertices.push(Vertex { id: id.into(), label, initial, root });
        self.vertices.len() - 1
    }

    pub fn add_edge(&mut self, src: usize, dir: usize, dst: usize) {
        self.edges.insert(Edge::to_vertex(src, dir, dst));
    }

    pub fn add_var_edge(&mut self, src: usize, dir: usize, var: usize) {
        self.edges.insert(Edge::to_var(src, dir, var));
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn label(&self, v: usize) -> &L {
        &self.vertices[v].label
    }

    pub fn initial(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.vertices[v].initial).collect()
    }

    pub fn roots(&self) -> Vec<usize> {
        (0..self.len()).filter(|&v| self.vertices[v].root).collect()
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.vertices.iter().position(|v| v.id == id)
    }

    pub fn is_closed(&self) -> bool {
        self.rank == 0
    }

    /// The set `E(v)` of `(direction, target)` pairs leaving `v`.
    pub fn out(&self, v: usize) -> impl Iterator<Item = (usize, Target)> + '_ {
        let lo = Edge { src: v, dir: 0, tgt: Target::Vertex(0) };
        self.edges.range(lo..).take_while(move |e| e.src == v).map(|e| (e.dir, e.tgt))
    }

    /// Targets of `(v, d)`.
    pub fn succ(&self, v: usize, d: usize) -> Vec<Target> {
        self.out(v).filter(|&(dd, _)| dd == d).map(|(_, t)| t).collect()
    }

    /// Relabel every vertex, keeping the shape.
    pub fn map_labels<M>(&self, mut f: impl FnMut(usize, &L) -> M) -> SetSystem<M> {
        SetSystem {
            rank: self.rank,
            vertices: self
                .vertices
                .iter()
                .enumerate()
                .map(|(i, v)| Vertex { id: v.id.clone(), label: f(i, &v.label), initial: v.initial, root: v.root })
                .collect(),
            edges: self.edges.clone(),
        }
    }

    /// Vertices reachable from initial and root vertices.
    pub fn reachable(&self) -> Vec<bool> {
        let mut seen = vec![false; self.len()];
        let mut stack: Vec<usize> = (0..self.len()).filter(|&v| self.vertices[v].initial || self.vertices[v].root).collect();
        for &v in &stack {
            seen[v] = true;
        }
        while let Some(v) = stack.pop() {
            for (_, t) in self.out(v) {
                if let Target::Vertex(w) = t {
                    if w < seen.len() && !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
        }
        seen
    }

    /// Restriction to the vertices where `keep` holds; edges into removed vertices are dropped.
    pub fn restrict(&self, keep: &[bool]) -> SetSystem<L>
    where
        L: Clone,
    {
        let mut new_index = vec![usize::MAX; self.len()];
        let mut out = SetSystem::new(self.rank);
        for (v, vx) in self.vertices.iter().enumerate() {
            if keep[v] {
                new_index[v] = out.add_vertex(vx.id.clone(), vx.label.clone(), vx.initial, vx.root);
            }
        }
        for e in &self.edges {
            if !keep[e.src] {
                continue;
            }
            match e.tgt {
                Target::Vertex(w) if keep[w] => out.add_edge(new_index[e.src], e.dir, new_index[w]),
                Target::Vertex(_) => {}
                Target::Var(x) => out.add_var_edge(new_index[e.src], e.dir, x),
            }
        }
        out
    }

    /// Drop vertices unreachable from initial and root vertices.
    pub fn trim(&self) -> SetSystem<L>
    where
        L: Clone,
    {
        self.restrict(&self.reachable())
    }

    /// Give every vertex a fresh id `prefix` + position.
    pub fn with_fresh_ids(mut self, prefix: &str) -> Self {
        for (i, v) in self.vertices.iter_mut().enumerate() {
            v.id = format!("{prefix}{i}");
        }
        self
    }
}

impl<L: Ranked> SetSystem<L> {
    /// Per-vertex, per-direction targets. Edges with an out-of-range direction are ignored.
    pub fn adjacency(&self) -> Adjacency {
        let mut adj: Adjacency = self.vertices.iter().map(|v| vec![Vec::new(); v.label.rank()]).collect();
        for e in &self.edges {
            if e.dir >= 1 && e.src < adj.len() && e.dir <= adj[e.src].len() {
                adj[e.src][e.dir - 1].push(e.tgt);
            }
        }
        adj
    }

    /// One initial vertex, no roots, exactly one edge per vertex and direction.
    pub fn is_system(&self) -> bool {
        if self.initial().len() != 1 || !self.roots().is_empty() {
            return false;
        }
        let mut counts: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for e in &self.edges {
            *counts.entry((e.src, e.dir)).or_default() += 1;
        }
        self.vertices.iter().enumerate().all(|(v, vx)| (1..=vx.label.rank()).all(|d| counts.get(&(v, d)) == Some(&1)))
            && counts.keys().all(|&(v, d)| v < self.len() && d >= 1 && d <= self.vertices[v].label.rank())
    }

    /// Successor of `(v, d)` in a system.
    pub fn step(&self, v: usize, d: usize) -> Target {
        self.succ(v, d)[0]
    }

    /// The initial vertex of a system.
    pub fn init_vertex(&self) -> usize {
        self.initial()[0]
    }
}

impl<L: fmt::Display> SetSystem<L> {
    /// A compact one-line rendering, mostly for diagnostics.
    pub fn summary(&self) -> String {
        let vs: Vec<String> = self
            .vertices
            .iter()
            .map(|v| {
                let mut flags = String::new();
                if v.initial {
                    flags.push('>');
                }
                if v.root {
                    flags.push('^');
                }
                format!("{flags}{}:{}", v.id, v.label)
            })
            .collect();
        let es: Vec<String> = self
            .edges
            .iter()
            .map(|e| match e.tgt {
                Target::Vertex(w) => format!("{}-{}->{}", self.vertices[e.src].id, e.dir, self.vertices.get(w).map_or("?", |x| &x.id)),
                Target::Var(x) => format!("{}-{}->x{}", self.vertices[e.src].id, e.dir, x),
            })
            .collect();
        format!("rank {} [{}] {{{}}}", self.rank, vs.join(" "), es.join(" "))
    }
}
