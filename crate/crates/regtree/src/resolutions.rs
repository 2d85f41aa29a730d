//! Yields, direct resolutions, resolutions with variable tracking, flatten-resolutions,
//! smallification and profiles.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::ops::ControlFlow;

use serde::Serialize;

use crate::algebras::{rho, Algebra};
use crate::equiv::{system_key, SystemKey};
use crate::error::{input, rank_check, Error, Result};
use crate::model::{Nested, Ranked, SetSystem, Sym, Target};
use crate::monad::{atomic, dupname, flatten, hole_vertex, pieces, plant, rename, uproot};
use crate::morphism::{check_morphism, find_morphism, VertexMap};

/// Enumeration bounds: resolutions remember the last `memory` vertices of the path
/// that led to them; at most `limit` candidates are produced per enumeration.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Bounds {
    pub memory: usize,
    pub limit: usize,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds { memory: 1, limit: 100_000 }
    }
}

impl Bounds {
    pub fn memory(memory: usize) -> Self {
        Bounds { memory, ..Bounds::default() }
    }
}

type State = (usize, Vec<usize>);

struct Enumerator<'a, L> {
    s: &'a SetSystem<L>,
    memory: usize,
    states: Vec<State>,
    index: HashMap<State, usize>,
    slots: Vec<(usize, usize)>,
    choice: Vec<Target>,
    produced: usize,
    limit: usize,
}

impl<'a, L: Ranked + Clone> Enumerator<'a, L> {
    fn push_state(&mut self, st: State) -> usize {
        let i = self.states.len();
        for d in 1..=self.s.vertices[st.0].label.rank() {
            self.slots.push((i, d));
        }
        self.index.insert(st.clone(), i);
        self.states.push(st);
        i
    }

    fn pop_state(&mut self) {
        let st = self.states.pop().expect("state to undo");
        self.index.remove(&st);
        let i = self.states.len();
        while self.slots.last().is_some_and(|&(j, _)| j == i) {
            self.slots.pop();
        }
    }

    fn emit(&self) -> (SetSystem<L>, VertexMap) {
        let mut out = SetSystem::new(self.s.rank);
        for (i, (v, hist)) in self.states.iter().enumerate() {
            let vx = &self.s.vertices[*v];
            let id = if hist.is_empty() {
                vx.id.clone()
            } else {
                let h: Vec<&str> = hist.iter().map(|&w| self.s.vertices[w].id.as_str()).collect();
                format!("{}@{}", vx.id, h.join("/"))
            };
            out.add_vertex(id, vx.label.clone(), i == 0, false);
        }
        for (k, &(i, d)) in self.slots.iter().enumerate() {
            match self.choice[k] {
                Target::Vertex(j) => out.add_edge(i, d, j),
                Target::Var(x) => out.add_var_edge(i, d, x),
            }
        }
        (out, self.states.iter().map(|st| st.0).collect())
    }

    fn fill(&mut self, pos: usize, visit: &mut dyn FnMut(&SetSystem<L>, &[usize]) -> ControlFlow<()>) -> ControlFlow<()> {
        if self.produced >= self.limit {
            return ControlFlow::Break(());
        }
        if pos == self.slots.len() {
            self.produced += 1;
            let (sys, proj) = self.emit();
            return visit(&sys, &proj);
        }
        let (i, d) = self.slots[pos];
        let (v, hist) = self.states[i].clone();
        for t in self.s.succ(v, d) {
            match t {
                Target::Var(x) => {
                    self.choice.push(Target::Var(x));
                    let flow = self.fill(pos + 1, visit);
                    self.choice.pop();
                    flow?;
                }
                Target::Vertex(w) => {
                    let mut h = hist.clone();
                    if self.memory > 0 {
                        h.push(v);
                        if h.len() > self.memory {
                            h.remove(0);
                        }
                    }
                    let key = (w, h);
                    let (j, created) = match self.index.get(&key) {
                        Some(&j) => (j, false),
                        None => (self.push_state(key), true),
                    };
                    self.choice.push(Target::Vertex(j));
                    let flow = self.fill(pos + 1, visit);
                    self.choice.pop();
                    if created {
                        self.pop_state();
                    }
                    flow?;
                }
            }
        }
        ControlFlow::Continue(())
    }
}

/// Visit every memory-bounded direct resolution of `s` together with its projection
/// onto `s` (a morphism). Returns false when the candidate limit cut the enumeration.
pub fn for_each_direct_resolution<L: Ranked + Clone>(
    s: &SetSystem<L>,
    bounds: Bounds,
    mut visit: impl FnMut(&SetSystem<L>, &[usize]) -> ControlFlow<()>,
) -> bool {
    let mut en = Enumerator {
        s,
        memory: bounds.memory,
        states: Vec::new(),
        index: HashMap::new(),
        slots: Vec::new(),
        choice: Vec::new(),
        produced: 0,
        limit: bounds.limit,
    };
    for v0 in s.initial() {
        en.push_state((v0, Vec::new()));
        let flow = en.fill(0, &mut visit);
        en.pop_state();
        if flow.is_break() {
            return en.produced < en.limit;
        }
    }
    true
}

/// Representatives of a set of systems up to unfold-equivalence.
#[derive(Clone, Debug)]
pub struct Classes<L> {
    pub systems: Vec<SetSystem<L>>,
    pub keys: Vec<SystemKey<L>>,
    pub candidates: usize,
    pub complete: bool,
}

impl<L: Ord> Classes<L> {
    pub fn contains_key(&self, key: &SystemKey<L>) -> bool {
        self.keys.binary_search(key).is_ok()
    }
}

/// Direct resolutions of `s` with bounded memory, one representative (the minimal
/// system) per unfold-equivalence class, sorted by canonical key.
pub fn direct_resolutions<L: Ranked + Ord + Clone>(s: &SetSystem<L>, bounds: Bounds) -> Classes<L> {
    let mut found: BTreeMap<SystemKey<L>, ()> = BTreeMap::new();
    let mut candidates = 0;
    let complete = for_each_direct_resolution(s, bounds, |t, _| {
        candidates += 1;
        found.insert(system_key(t).expect("enumerated resolutions are systems"), ());
        ControlFlow::Continue(())
    });
    let keys: Vec<SystemKey<L>> = found.into_keys().collect();
    Classes { systems: keys.iter().map(crate::equiv::key_system).collect(), keys, candidates, complete }
}

/// Init-yields and root-yields of a set-system, up to unfold-equivalence.
#[derive(Clone, Debug)]
pub struct Yields<L> {
    pub init: Classes<L>,
    /// Uprooted: the root-yields are `plant` of these.
    pub uprooted: Classes<L>,
}

impl<L: Clone> Yields<L> {
    pub fn root_yields(&self) -> Vec<SetSystem<L>> {
        self.uprooted.systems.iter().map(plant).collect()
    }
}

pub fn yields<L: Ranked + Ord + Clone>(s: &SetSystem<L>, bounds: Bounds) -> Yields<L> {
    Yields { init: direct_resolutions(s, bounds), uprooted: direct_resolutions(&uproot(s), bounds) }
}

/// A direct resolution of `s` that `t` unfolds to, with the morphisms to `t` and `s`.
#[derive(Clone, Debug)]
pub struct YieldWitness<L> {
    pub resolution: SetSystem<L>,
    pub to_yield: VertexMap,
    pub to_set_system: VertexMap,
}

/// Exact membership of a system in the init-yields of `s`: greatest relation between
/// vertices of `t` and of `s` that agrees on labels and can match every step.
pub fn init_yield_witness<L: Ranked + Clone + PartialEq>(t: &SetSystem<L>, s: &SetSystem<L>) -> Result<Option<YieldWitness<L>>> {
    if !t.is_system() {
        return Err(Error::NotSystem("candidate yield".into()));
    }
    if t.rank != s.rank {
        return Ok(None);
    }
    let mut rel: Vec<Vec<bool>> = t.vertices.iter().map(|y| s.vertices.iter().map(|v| v.label == y.label).collect()).collect();
    let matches = |rel: &Vec<Vec<bool>>, y: usize, v: usize, d: usize| -> Option<Target> {
        match t.step(y, d) {
            Target::Var(x) => s.succ(v, d).into_iter().find(|&tg| tg == Target::Var(x)),
            Target::Vertex(y2) => s.succ(v, d).into_iter().find(|&tg| matches!(tg, Target::Vertex(v2) if rel[y2][v2])),
        }
    };
    loop {
        let mut changed = false;
        for y in 0..t.len() {
            for v in 0..s.len() {
                if rel[y][v] && (1..=t.vertices[y].label.rank()).any(|d| matches(&rel, y, v, d).is_none()) {
                    rel[y][v] = false;
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let y0 = t.init_vertex();
    let Some(v0) = s.initial().into_iter().find(|&v| rel[y0][v]) else {
        return Ok(None);
    };
    let mut pairs = vec![(y0, v0)];
    let mut index = BTreeMap::from([((y0, v0), 0usize)]);
    let mut edges = Vec::new();
    let mut k = 0;
    while k < pairs.len() {
        let (y, v) = pairs[k];
        for d in 1..=t.vertices[y].label.rank() {
            let tgt = matches(&rel, y, v, d).expect("relation is a fixpoint");
            match (t.step(y, d), tgt) {
                (Target::Vertex(y2), Target::Vertex(v2)) => {
                    let next = pairs.len();
                    let j = *index.entry((y2, v2)).or_insert_with(|| {
                        pairs.push((y2, v2));
                        next
                    });
                    edges.push((k, d, Target::Vertex(j)));
                }
                (_, x) => edges.push((k, d, x)),
            }
        }
        k += 1;
    }
    let mut r = SetSystem::new(t.rank);
    for (i, &(y, v)) in pairs.iter().enumerate() {
        r.add_vertex(format!("({},{})", t.vertices[y].id, s.vertices[v].id), t.vertices[y].label.clone(), i == 0, false);
    }
    for (src, d, x) in edges {
        match x {
            Target::Vertex(j) => r.add_edge(src, d, j),
            Target::Var(x) => r.add_var_edge(src, d, x),
        }
    }
    Ok(Some(YieldWitness { resolution: r, to_yield: pairs.iter().map(|p| p.0).collect(), to_set_system: pairs.iter().map(|p| p.1).collect() }))
}

pub fn is_init_yield<L: Ranked + Clone + PartialEq>(t: &SetSystem<L>, s: &SetSystem<L>) -> Result<bool> {
    Ok(init_yield_witness(t, s)?.is_some())
}

/// Membership of a planted system in the root-yields of `s`.
pub fn is_root_yield<L: Ranked + Clone + PartialEq>(t: &SetSystem<L>, s: &SetSystem<L>) -> Result<bool> {
    is_init_yield(&uproot(t), &uproot(s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum YieldFlavor {
    Init,
    Root,
}

/// Outcome of a bounded inclusion test between yields. A refutation is definitive; the
/// other verdict only says that no counterexample exists among bounded yields.
#[derive(Clone, Debug)]
pub enum Subsumption<L> {
    Refuted { witness: SetSystem<L>, flavor: YieldFlavor },
    ConsistentUpTo { memory: usize, checked: usize, complete: bool },
}

impl<L> Subsumption<L> {
    pub fn is_refuted(&self) -> bool {
        matches!(self, Subsumption::Refuted { .. })
    }
}

/// Look for a bounded yield of `s` that is not a yield of `s2` (membership in `s2` is
/// decided exactly).
pub fn yield_subsumed<L: Ranked + Ord + Clone>(s: &SetSystem<L>, s2: &SetSystem<L>, bounds: Bounds) -> Result<Subsumption<L>> {
    rank_check(s.rank, s2.rank)?;
    let y = yields(s, bounds);
    let up2 = uproot(s2);
    for t in &y.init.systems {
        if !is_init_yield(t, s2)? {
            return Ok(Subsumption::Refuted { witness: t.clone(), flavor: YieldFlavor::Init });
        }
    }
    for t in &y.uprooted.systems {
        if !is_init_yield(t, &up2)? {
            return Ok(Subsumption::Refuted { witness: plant(t), flavor: YieldFlavor::Root });
        }
    }
    Ok(Subsumption::ConsistentUpTo {
        memory: bounds.memory,
        checked: y.init.systems.len() + y.uprooted.systems.len(),
        complete: y.init.complete && y.uprooted.complete,
    })
}

/// Bounded yield-equality: neither side refutes the other.
pub fn yield_equal_bounded<L: Ranked + Ord + Clone>(s: &SetSystem<L>, s2: &SetSystem<L>, bounds: Bounds) -> Result<Option<(bool, SetSystem<L>)>> {
    if let Subsumption::Refuted { witness, .. } = yield_subsumed(s, s2, bounds)? {
        return Ok(Some((true, witness)));
    }
    if let Subsumption::Refuted { witness, .. } = yield_subsumed(s2, s, bounds)? {
        return Ok(Some((false, witness)));
    }
    Ok(None)
}

/// A system `T` of rank m with `σ: [m] → [n]` such that `rename_σ(T)` resolves the
/// target set-system.
#[derive(Clone, Debug, PartialEq)]
pub struct Resolution<L> {
    pub system: SetSystem<L>,
    /// 1-based values, stored by position.
    pub sigma: Vec<usize>,
}

/// The morphism `rename_σ(T) → s` if `(T, σ)` resolves `s`.
pub fn resolution_witness<L: Ranked + Clone + PartialEq>(r: &Resolution<L>, s: &SetSystem<L>) -> Result<Option<VertexMap>> {
    rank_check(r.sigma.len(), r.system.rank)?;
    if !r.system.is_system() {
        return Err(Error::NotSystem("resolution".into()));
    }
    let renamed = rename(&r.sigma, s.rank, &r.system)?;
    Ok(find_morphism(&renamed, s))
}

/// Data witnessing that a system of systems `T` is a flatten-resolution of `N`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FlattenResolutionWitness {
    /// Outer vertices of `T` to outer vertices of `N`.
    pub delta: Vec<usize>,
    /// `σ_t: [rk T(t)] → [rk N(δ(t))]`, 1-based values.
    pub sigma: Vec<Vec<usize>>,
    /// `γ_t`: vertices of `T(t)` to vertices of `N(δ(t))`.
    pub gamma: Vec<VertexMap>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "kebab-case")]
pub enum FrViolation {
    NotSystemOfSystems { detail: String },
    Initial { vertex: usize },
    Resolution { vertex: usize, detail: String },
    Transition { vertex: usize, dir: usize },
    Variable { vertex: usize, dir: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct FrReport {
    pub violations: Vec<FrViolation>,
}

impl FrReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

fn check_witness_shape<L: Ranked>(n: &Nested<L>, t: &Nested<L>, w: &FlattenResolutionWitness) -> Result<()> {
    if w.delta.len() != t.len() || w.sigma.len() != t.len() || w.gamma.len() != t.len() {
        return input(format!("witness covers {}/{}/{} vertices, expected {}", w.delta.len(), w.sigma.len(), w.gamma.len(), t.len()));
    }
    for (i, &s) in w.delta.iter().enumerate() {
        if s >= n.len() {
            return input(format!("δ({i}) = {s} is not a vertex"));
        }
        let (inner, target) = (&t.vertices[i].label, &n.vertices[s].label);
        if w.sigma[i].len() != inner.rank || w.sigma[i].iter().any(|&j| j == 0 || j > target.rank) {
            return input(format!("σ_{i} is not a map [{}] → [{}]", inner.rank, target.rank));
        }
        if w.gamma[i].len() != inner.len() || w.gamma[i].iter().any(|&g| g >= target.len()) {
            return input(format!("γ_{i} is not a map between the vertex sets"));
        }
    }
    Ok(())
}

/// Verify the four defining conditions. A malformed witness is an input error; failed
/// conditions are reported.
pub fn check_flatten_resolution<L: Ranked + Clone + PartialEq>(n: &Nested<L>, t: &Nested<L>, w: &FlattenResolutionWitness) -> Result<FrReport> {
    rank_check(n.rank, t.rank)?;
    check_witness_shape(n, t, w)?;
    let mut report = FrReport::default();
    if !t.is_system() {
        report.violations.push(FrViolation::NotSystemOfSystems { detail: "outer level".into() });
        return Ok(report);
    }
    for v in t.initial() {
        if !n.vertices[w.delta[v]].initial {
            report.violations.push(FrViolation::Initial { vertex: v });
        }
    }
    for (v, vx) in t.vertices.iter().enumerate() {
        let target = &n.vertices[w.delta[v]].label;
        if !vx.label.is_system() {
            report.violations.push(FrViolation::Resolution { vertex: v, detail: "inner system expected".into() });
            continue;
        }
        let renamed = rename(&w.sigma[v], target.rank, &vx.label)?;
        let verdict = check_morphism(&renamed, target, &w.gamma[v])?;
        if !verdict.is_morphism() {
            report.violations.push(FrViolation::Resolution { vertex: v, detail: format!("{verdict:?}") });
        }
        for (i, x) in t.out(v) {
            let j = w.sigma[v][i - 1];
            let s = w.delta[v];
            match x {
                Target::Vertex(v2) => {
                    if !n.out(s).any(|e| e == (j, Target::Vertex(w.delta[v2]))) {
                        report.violations.push(FrViolation::Transition { vertex: v, dir: i });
                    }
                }
                Target::Var(y) => {
                    if !n.out(s).any(|e| e == (j, Target::Var(y))) {
                        report.violations.push(FrViolation::Variable { vertex: v, dir: i });
                    }
                }
            }
        }
    }
    Ok(report)
}

fn offsets<L>(n: &Nested<L>) -> Vec<usize> {
    let mut out = Vec::with_capacity(n.len() + 1);
    let mut acc = 0;
    out.push(0);
    for v in &n.vertices {
        acc += v.label.len();
        out.push(acc);
    }
    out
}

/// The morphism `(t, v) ↦ (δ(t), γ_t(v))` from `flatten(T)` to `flatten(N)`, verified.
pub fn flatten_resolution_to_direct<L: Ranked + Clone + PartialEq>(n: &Nested<L>, t: &Nested<L>, w: &FlattenResolutionWitness) -> Result<VertexMap> {
    let report = check_flatten_resolution(n, t, w)?;
    if !report.holds() {
        return Err(Error::Precondition(format!("invalid flatten-resolution witness: {:?}", report.violations)));
    }
    let on = offsets(n);
    let map: VertexMap =
        t.vertices.iter().enumerate().flat_map(|(v, vx)| (0..vx.label.len()).map(move |r| (v, r))).map(|(v, r)| on[w.delta[v]] + w.gamma[v][r]).collect();
    let verdict = check_morphism(&flatten(t)?, &flatten(n)?, &map)?;
    if !verdict.is_morphism() {
        return Err(Error::Precondition(format!("composed map is not a morphism: {verdict:?}")));
    }
    Ok(map)
}

/// A flatten-resolution recovered from a direct resolution `R` of `flatten(N)`.
#[derive(Clone, Debug)]
pub struct Recovered<L> {
    pub system: Nested<L>,
    pub witness: FlattenResolutionWitness,
    /// The morphism `flatten(T) → R`, `(t, r) ↦ r`: `R` unfolds to `flatten(T)`.
    pub unfolding: VertexMap,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum EdgeKind {
    Intra(usize),
    Inter(usize, usize),
    Var(usize, usize),
}

/// Split a direct resolution of a flattening back into a system of systems, giving
/// distinct directions to distinct `(outer direction, entry point)` pairs.
pub fn direct_to_flatten_resolution<L: Ranked + Clone + PartialEq>(n: &Nested<L>, r: &SetSystem<L>, eta: Option<&[usize]>) -> Result<Recovered<L>> {
    if !r.is_system() {
        return Err(Error::NotSystem("direct resolution".into()));
    }
    let flat = flatten(n)?;
    let eta: VertexMap = match eta {
        Some(m) => {
            if !check_morphism(r, &flat, m)?.is_morphism() {
                return Err(Error::Precondition("supplied map is not a morphism into the flattening".into()));
            }
            m.to_vec()
        }
        None => find_morphism(r, &flat).ok_or_else(|| Error::Precondition("not a direct resolution of the flattening".into()))?,
    };
    let on = offsets(n);
    let split = |x: usize| {
        let s = on.partition_point(|&o| o <= x) - 1;
        (s, x - on[s])
    };
    let delta: Vec<usize> = eta.iter().map(|&x| split(x).0).collect();
    let gamma: Vec<usize> = eta.iter().map(|&x| split(x).1).collect();
    let inner = |r: usize| &n.vertices[delta[r]].label;
    let mut kinds: BTreeMap<(usize, usize), EdgeKind> = BTreeMap::new();
    for rv in 0..r.len() {
        let s = delta[rv];
        let sub = inner(rv);
        for d in 1..=r.vertices[rv].label.rank() {
            let var_dirs: Vec<usize> = sub
                .out(gamma[rv])
                .filter_map(|(dd, t)| match t {
                    Target::Var(j) if dd == d => Some(j),
                    _ => None,
                })
                .collect();
            let kind = match r.step(rv, d) {
                Target::Vertex(r2) if delta[r2] == s && sub.out(gamma[rv]).any(|e| e == (d, Target::Vertex(gamma[r2]))) => EdgeKind::Intra(r2),
                Target::Vertex(r2) => {
                    let j = var_dirs
                        .iter()
                        .copied()
                        .find(|&j| n.out(s).any(|e| e == (j, Target::Vertex(delta[r2]))) && inner(r2).vertices[gamma[r2]].initial)
                        .ok_or_else(|| Error::Precondition(format!("edge from `{}` in direction {d} has no preimage", r.vertices[rv].id)))?;
                    EdgeKind::Inter(j, r2)
                }
                Target::Var(y) => {
                    let j = var_dirs
                        .iter()
                        .copied()
                        .find(|&j| n.out(s).any(|e| e == (j, Target::Var(y))))
                        .ok_or_else(|| Error::Precondition(format!("variable edge from `{}` has no preimage", r.vertices[rv].id)))?;
                    EdgeKind::Var(j, y)
                }
            };
            kinds.insert((rv, d), kind);
        }
    }
    let mut dirs: Vec<BTreeSet<(usize, Target)>> = vec![BTreeSet::new(); n.len()];
    for (&(rv, _), &k) in &kinds {
        match k {
            EdgeKind::Inter(j, r2) => {
                dirs[delta[rv]].insert((j, Target::Vertex(r2)));
            }
            EdgeKind::Var(j, y) => {
                dirs[delta[rv]].insert((j, Target::Var(y)));
            }
            EdgeKind::Intra(_) => {}
        }
    }
    let dir_of = |s: usize, key: (usize, Target)| dirs[s].iter().position(|&k| k == key).expect("direction registered") + 1;

    let entries: Vec<usize> = (0..r.len()).filter(|&rv| inner(rv).vertices[gamma[rv]].initial).collect();
    let r0 = r.init_vertex();
    if !entries.contains(&r0) {
        return Err(Error::Precondition("the initial vertex does not enter a subsystem at an initial vertex".into()));
    }
    let mut t: Nested<L> = SetSystem::new(r.rank);
    let mut witness = FlattenResolutionWitness { delta: Vec::new(), sigma: Vec::new(), gamma: Vec::new() };
    let mut members_of: Vec<Vec<usize>> = Vec::new();
    for &tv in &entries {
        let s = delta[tv];
        let members: Vec<usize> = (0..r.len()).filter(|&x| delta[x] == s).collect();
        let pos: BTreeMap<usize, usize> = members.iter().enumerate().map(|(i, &x)| (x, i)).collect();
        let mut sub = SetSystem::new(dirs[s].len());
        for &x in &members {
            sub.add_vertex(r.vertices[x].id.clone(), r.vertices[x].label.clone(), x == tv, false);
        }
        for &x in &members {
            for d in 1..=r.vertices[x].label.rank() {
                match kinds[&(x, d)] {
                    EdgeKind::Intra(x2) => sub.add_edge(pos[&x], d, pos[&x2]),
                    EdgeKind::Inter(j, x2) => sub.add_var_edge(pos[&x], d, dir_of(s, (j, Target::Vertex(x2)))),
                    EdgeKind::Var(j, y) => sub.add_var_edge(pos[&x], d, dir_of(s, (j, Target::Var(y)))),
                }
            }
        }
        t.add_vertex(r.vertices[tv].id.clone(), sub, tv == r0, false);
        witness.delta.push(s);
        witness.sigma.push(dirs[s].iter().map(|&(j, _)| j).collect());
        witness.gamma.push(members.iter().map(|&x| gamma[x]).collect());
        members_of.push(members);
    }
    let t_index: BTreeMap<usize, usize> = entries.iter().enumerate().map(|(i, &x)| (x, i)).collect();
    for (i, &tv) in entries.iter().enumerate() {
        for (k, &(_, tgt)) in dirs[delta[tv]].iter().enumerate() {
            match tgt {
                Target::Vertex(x2) => t.add_edge(i, k + 1, t_index[&x2]),
                Target::Var(y) => t.add_var_edge(i, k + 1, y),
            }
        }
    }
    let unfolding = members_of.iter().flatten().copied().collect();
    Ok(Recovered { system: t, witness, unfolding })
}

/// `|σ⁻¹(i)| ≤ bound` for every `i ∈ [n]`.
pub fn is_small(sigma: &[usize], bound: usize) -> bool {
    let mut count: BTreeMap<usize, usize> = BTreeMap::new();
    for &j in sigma {
        *count.entry(j).or_default() += 1;
    }
    count.values().all(|&c| c <= bound)
}

/// Outcome of smallification: `τ: [m] → [m']` and a section `τ': [m'] → [m]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Smallification {
    pub m2: usize,
    pub tau: Vec<usize>,
    pub tau_prime: Vec<usize>,
}

/// Merge the directions of the hole that agree both under `σ` and in the value of
/// the corresponding piece of the closed context `c`.
pub fn context_smallification<A: Algebra>(alg: &A, t: &SetSystem<Sym>, c: &SetSystem<Sym>, sigma: &[usize]) -> Result<Smallification> {
    let h = hole_vertex(c)?;
    let m = c.vertices[h].label.rank;
    rank_check(m, t.rank)?;
    rank_check(m, sigma.len())?;
    let p = pieces(c)?;
    let mut classes: Vec<(usize, A::Elem)> = Vec::new();
    let mut tau = Vec::with_capacity(m);
    let mut tau_prime = Vec::new();
    for i in 1..=m {
        let key = (sigma[i - 1], rho(alg, &p.parts[i])?);
        let k = match classes.iter().position(|c| *c == key) {
            Some(k) => k,
            None => {
                classes.push(key);
                tau_prime.push(i);
                classes.len() - 1
            }
        };
        tau.push(k + 1);
    }
    Ok(Smallification { m2: classes.len(), tau, tau_prime })
}

/// Shrink every non-small `σ_t` of a flatten-resolution of a closed `N`, preserving
/// the value of the flattening.
pub fn smallify_flatten_resolution<A: Algebra>(
    alg: &A,
    n: &Nested<Sym>,
    t: &Nested<Sym>,
    w: &FlattenResolutionWitness,
) -> Result<(Nested<Sym>, FlattenResolutionWitness)> {
    if !n.is_closed() {
        return input("smallification needs a closed system of set-systems");
    }
    let report = check_flatten_resolution(n, t, w)?;
    if !report.holds() {
        return Err(Error::Precondition(format!("invalid flatten-resolution witness: {:?}", report.violations)));
    }
    let bound = alg.carrier(1).len();
    let (mut t, mut w) = (t.clone(), w.clone());
    while let Some(u) = (0..t.len()).find(|&u| !is_small(&w.sigma[u], bound)) {
        if t.out(u).any(|(_, x)| x == Target::Vertex(u)) {
            split_self_loops(&mut t, &mut w, u);
            continue;
        }
        let inner = t.vertices[u].label.clone();
        let mut holed = t.clone();
        holed.vertices[u].label = atomic(Sym::hole(inner.rank));
        let c = flatten(&holed)?;
        let sm = context_smallification(alg, &inner, &c, &w.sigma[u])?;
        let old_out: Vec<(usize, Target)> = t.out(u).collect();
        t.edges.retain(|e| e.src != u);
        for (i, &i0) in sm.tau_prime.iter().enumerate() {
            for &(d, x) in &old_out {
                if d == i0 {
                    match x {
                        Target::Vertex(v) => t.add_edge(u, i + 1, v),
                        Target::Var(y) => t.add_var_edge(u, i + 1, y),
                    }
                }
            }
        }
        t.vertices[u].label = rename(&sm.tau, sm.m2, &inner)?;
        w.sigma[u] = sm.tau_prime.iter().map(|&i| w.sigma[u][i - 1]).collect();
    }
    Ok((t, w))
}

/// Replace the self-loops of `u` by a two-cycle through a fresh copy of `u`.
fn split_self_loops(t: &mut Nested<Sym>, w: &mut FlattenResolutionWitness, u: usize) {
    let vx = t.vertices[u].clone();
    let copy = t.add_vertex(format!("{}'", vx.id), vx.label, false, false);
    let out: Vec<(usize, Target)> = t.out(u).collect();
    t.edges.retain(|e| !(e.src == u && e.tgt == Target::Vertex(u)));
    for (d, x) in out {
        match x {
            Target::Vertex(v) if v == u => {
                t.add_edge(u, d, copy);
                t.add_edge(copy, d, u);
            }
            Target::Vertex(v) => t.add_edge(copy, d, v),
            Target::Var(y) => t.add_var_edge(copy, d, y),
        }
    }
    w.delta.push(w.delta[u]);
    w.sigma.push(w.sigma[u].clone());
    w.gamma.push(w.gamma[u].clone());
}

/// Values reached by resolutions `(T, σ)` with `σ: [m] → [n]`, `m ≤ max_m`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Profile<E: Ord> {
    pub pairs: BTreeSet<(E, Vec<usize>)>,
    pub root: bool,
    pub small: bool,
    pub memory: usize,
    pub max_m: usize,
    pub complete: bool,
}

/// Every map `[m] → [n]`, in lexicographic order.
pub fn all_maps(m: usize, n: usize) -> Vec<Vec<usize>> {
    if m == 0 {
        return vec![Vec::new()];
    }
    if n == 0 {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut cur = vec![1; m];
    loop {
        out.push(cur.clone());
        let mut i = m;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if cur[i] < n {
                cur[i] += 1;
                break;
            }
            cur[i] = 1;
        }
    }
}

/// `(T, σ)` resolves `S` iff `T` is a direct resolution of `dupname_σ(S)`; enumerate
/// those with bounded memory and collect `(ρ(T), σ)`.
pub fn profile<A: Algebra>(alg: &A, s: &SetSystem<Sym>, root: bool, small: bool, bounds: Bounds, max_m: usize) -> Result<Profile<A::Elem>> {
    let base = if root { uproot(s) } else { s.clone() };
    let bound = alg.carrier(1).len();
    let mut pairs = BTreeSet::new();
    let mut complete = true;
    for m in 0..=max_m {
        for sigma in all_maps(m, base.rank) {
            if small && !is_small(&sigma, bound) {
                continue;
            }
            let d = dupname(&sigma, base.rank, &base)?;
            let mut failure = None;
            complete &= for_each_direct_resolution(&d, bounds, |t, _| match rho(alg, t) {
                Ok(v) => {
                    pairs.insert((v, sigma.clone()));
                    ControlFlow::Continue(())
                }
                Err(e) => {
                    failure = Some(e);
                    ControlFlow::Break(())
                }
            });
            if let Some(e) = failure {
                return Err(e);
            }
        }
    }
    Ok(Profile { pairs, root, small, memory: bounds.memory, max_m, complete })
}
