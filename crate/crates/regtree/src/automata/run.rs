use std::collections::{BTreeMap, BTreeSet, VecDeque};

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{SetSystem, Sym, Target};
use crate::ya::{universal_branch_check, Presentation, YLabel};

use super::automaton::{AcceptanceSpec, Dpa, UnfoldAutomaton};
use super::game::{zielonka, ParityGame, Player};

/// What a run remembers along a branch when choosing transitions.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunMemory {
    /// Choices depend on the vertex only.
    None,
    /// `0` for the empty prefix, `y + 1` for prefix value `y` (Wilke tables).
    Prefix,
    /// The DPA state reached so far.
    Dpa,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunChoice {
    Tuple(Vec<usize>),
    Leaf(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RunEntry {
    pub vertex: usize,
    pub memory: usize,
    pub choice: RunChoice,
}

/// A run on a closed system: a transition choice per (vertex, memory) pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Run {
    pub memory: RunMemory,
    pub entries: Vec<RunEntry>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RunViolation {
    /// The choice at a vertex is not a transition of its label.
    NotInDelta { vertex: usize, memory: usize },
    /// Some branch of the run is outside the acceptance condition.
    Branch { path: Vec<usize>, cycle: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunCheck {
    pub ok: bool,
    pub violation: Option<RunViolation>,
}

fn system_check(aut: &UnfoldAutomaton, s: &SetSystem<Sym>) -> Result<()> {
    if !s.is_closed() || !s.is_system() {
        return input("runs are defined on closed systems");
    }
    for v in &s.vertices {
        if !aut.alphabet.contains(&v.label) {
            return input(format!("vertex `{}`: `{}` is not in the automaton's alphabet", v.id, v.label.name));
        }
    }
    Ok(())
}

fn child(s: &SetSystem<Sym>, v: usize, d: usize) -> usize {
    match s.step(v, d) {
        Target::Vertex(w) => w,
        Target::Var(_) => unreachable!("closed system"),
    }
}

struct MemoryRule<'a> {
    kind: RunMemory,
    aut: &'a UnfoldAutomaton,
}

impl MemoryRule<'_> {
    fn start(&self) -> usize {
        match (self.kind, &self.aut.omega) {
            (RunMemory::Dpa, AcceptanceSpec::Dpa { dpa }) => dpa.initial,
            _ => 0,
        }
    }

    fn next(&self, m: usize, x: usize) -> Result<usize> {
        match (self.kind, &self.aut.omega) {
            (RunMemory::None, _) => Ok(0),
            (RunMemory::Prefix, AcceptanceSpec::Wilke { presentation }) => Ok(presentation.then(m.checked_sub(1), x) + 1),
            (RunMemory::Dpa, AcceptanceSpec::Dpa { dpa }) => Ok(dpa.transition[m][x]),
            _ => input("the run's memory does not fit the acceptance condition"),
        }
    }
}

/// The branch graph of a run: one `Y1` vertex per (state, direction) carrying the
/// chosen component, and one `Y0` vertex per leaf state.
fn run_graph(aut: &UnfoldAutomaton, s: &SetSystem<Sym>, run: &Run) -> Result<std::result::Result<SetSystem<YLabel>, RunViolation>> {
    let rule = MemoryRule { kind: run.memory, aut };
    let choices: BTreeMap<(usize, usize), &RunChoice> = run.entries.iter().map(|e| ((e.vertex, e.memory), &e.choice)).collect();
    let mut index: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    let mut g = SetSystem::new(0);
    let start = (s.init_vertex(), rule.start());
    let mut queue = VecDeque::from([start]);
    let mut pending_edges = Vec::new();
    let mut seen = BTreeSet::from([start]);
    while let Some((v, m)) = queue.pop_front() {
        let Some(choice) = choices.get(&(v, m)) else {
            return Err(Error::Input(format!("partial run: no choice at vertex {v} with memory {m}")));
        };
        let label = &s.vertices[v].label;
        let mut mine = Vec::new();
        match choice {
            RunChoice::Leaf(t) if label.rank == 0 && aut.leaves(label).any(|x| x == t) => {
                mine.push(g.add_vertex(format!("{v}@{m}"), YLabel::Zero(*t), (v, m) == start, false));
            }
            RunChoice::Tuple(b) if label.rank > 0 && aut.tuples(label).any(|x| x == b) => {
                for (i, &x) in b.iter().enumerate() {
                    let id = g.add_vertex(format!("{v}@{m}/{}", i + 1), YLabel::One(x), (v, m) == start, false);
                    mine.push(id);
                    let next = (child(s, v, i + 1), rule.next(m, x)?);
                    pending_edges.push((id, next));
                    if seen.insert(next) {
                        queue.push_back(next);
                    }
                }
            }
            _ => return Ok(Err(RunViolation::NotInDelta { vertex: v, memory: m })),
        }
        index.insert((v, m), mine);
    }
    for (src, next) in pending_edges {
        for &dst in &index[&next] {
            g.add_edge(src, 1, dst);
        }
    }
    Ok(Ok(g))
}

/// Whether some branch of `g` read by `dpa` is bad; returns a bad branch.
fn dpa_bad_branch(dpa: &Dpa, g: &SetSystem<YLabel>) -> Option<(Vec<usize>, Vec<usize>)> {
    let mut succ = vec![Vec::new(); g.len()];
    for e in &g.edges {
        if let Target::Vertex(w) = e.tgt {
            succ[e.src].push(w);
        }
    }
    // Product states (vertex, DPA state before reading the vertex).
    let mut ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut states = Vec::new();
    let mut parent = Vec::new();
    let mut queue = VecDeque::new();
    for v in g.initial() {
        ids.insert((v, dpa.initial), states.len());
        states.push((v, dpa.initial));
        parent.push(None);
        queue.push_back(states.len() - 1);
    }
    let mut edges: Vec<(usize, usize, usize)> = Vec::new();
    while let Some(i) = queue.pop_front() {
        let (v, q) = states[i];
        match g.vertices[v].label {
            YLabel::Zero(t) => {
                if !dpa.finals[q][t] {
                    return Some((path_to(&parent, &states, i), vec![]));
                }
            }
            YLabel::One(x) => {
                let (q2, p) = dpa.step(q, x);
                for &w in &succ[v] {
                    let j = *ids.entry((w, q2)).or_insert_with(|| {
                        states.push((w, q2));
                        parent.push(Some(i));
                        queue.push_back(states.len() - 1);
                        states.len() - 1
                    });
                    edges.push((i, j, p));
                }
            }
        }
    }
    let odd: BTreeSet<usize> = edges.iter().map(|e| e.2).filter(|p| p % 2 == 1).collect();
    for p in odd {
        let mut dg: DiGraph<usize, usize> = DiGraph::new();
        let nodes: Vec<_> = (0..states.len()).map(|i| dg.add_node(i)).collect();
        for &(a, b, q) in &edges {
            if q >= p {
                dg.add_edge(nodes[a], nodes[b], q);
            }
        }
        for scc in tarjan_scc(&dg) {
            let members: BTreeSet<usize> = scc.iter().map(|&n| dg[n]).collect();
            if let Some(&(a, _, _)) = edges.iter().find(|&&(a, b, q)| q == p && members.contains(&a) && members.contains(&b)) {
                let cycle: Vec<usize> = members.iter().map(|&i| states[i].0).collect();
                return Some((path_to(&parent, &states, a), cycle));
            }
        }
    }
    None
}

fn path_to(parent: &[Option<usize>], states: &[(usize, usize)], mut i: usize) -> Vec<usize> {
    let mut out = vec![states[i].0];
    while let Some(j) = parent[i] {
        out.push(states[j].0);
        i = j;
    }
    out.reverse();
    out
}

fn branches_ok(aut: &UnfoldAutomaton, g: &SetSystem<YLabel>) -> Result<RunCheck> {
    let bad = match &aut.omega {
        AcceptanceSpec::Wilke { presentation } => universal_branch_check(presentation, g)?.witness.map(|w| (w.path, w.cycle)),
        AcceptanceSpec::Dpa { dpa } => dpa_bad_branch(dpa, g),
    };
    Ok(match bad {
        None => RunCheck { ok: true, violation: None },
        Some((path, cycle)) => RunCheck { ok: false, violation: Some(RunViolation::Branch { path, cycle }) },
    })
}

/// Local transition conditions at every reached vertex, then the branch condition.
/// Paths in a branch violation are positions in the run's branch graph.
pub fn check_run(aut: &UnfoldAutomaton, s: &SetSystem<Sym>, run: &Run) -> Result<RunCheck> {
    system_check(aut, s)?;
    match run_graph(aut, s, run)? {
        Err(v) => Ok(RunCheck { ok: false, violation: Some(v) }),
        Ok(g) => branches_ok(aut, &g),
    }
}

/// The verdict of [`accepts`], with a run when accepted.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Membership {
    pub accepted: bool,
    pub run: Option<Run>,
    /// Game positions (DPA) or strategies tried (Wilke).
    pub work: usize,
}

/// Decide whether the automaton has an accepting run on a closed system.
pub fn accepts(aut: &UnfoldAutomaton, s: &SetSystem<Sym>) -> Result<Membership> {
    system_check(aut, s)?;
    match &aut.omega {
        AcceptanceSpec::Dpa { dpa } => accepts_dpa(aut, dpa, s),
        AcceptanceSpec::Wilke { presentation } => accepts_wilke(aut, presentation, s),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
enum Pos {
    Eve(usize, usize),
    Adam(usize, usize, Vec<usize>),
    Edge(usize, usize, Vec<usize>, usize),
    Win,
    Lose,
}

fn accepts_dpa(aut: &UnfoldAutomaton, dpa: &Dpa, s: &SetSystem<Sym>) -> Result<Membership> {
    let top = dpa.priority.iter().flatten().copied().max().unwrap_or(0);
    let neutral = top + 2 - top % 2;
    let mut game = ParityGame { owner: vec![], priority: vec![], moves: vec![], initial: 0 };
    let mut ids: BTreeMap<Pos, usize> = BTreeMap::new();
    let mut queue: VecDeque<(Pos, usize)> = VecDeque::new();
    let intern = |pos: Pos, game: &mut ParityGame, ids: &mut BTreeMap<Pos, usize>, queue: &mut VecDeque<(Pos, usize)>| -> usize {
        if let Some(&i) = ids.get(&pos) {
            return i;
        }
        let (owner, prio) = match &pos {
            Pos::Eve(..) => (Player::Eve, neutral),
            Pos::Adam(..) => (Player::Adam, neutral),
            Pos::Edge(_, q, b, i) => (Player::Adam, dpa.priority[*q][b[*i]]),
            Pos::Win => (Player::Eve, 0),
            Pos::Lose => (Player::Eve, 1),
        };
        let i = game.add(owner, prio);
        ids.insert(pos.clone(), i);
        queue.push_back((pos, i));
        i
    };
    let root = intern(Pos::Eve(s.init_vertex(), dpa.initial), &mut game, &mut ids, &mut queue);
    game.initial = root;
    while let Some((pos, me)) = queue.pop_front() {
        let targets: Vec<Pos> = match &pos {
            Pos::Eve(v, q) => {
                let label = &s.vertices[*v].label;
                if label.rank == 0 {
                    let mut t: Vec<Pos> = aut.leaves(label).map(|&x| if dpa.finals[*q][x] { Pos::Win } else { Pos::Lose }).collect();
                    t.sort();
                    t.dedup();
                    t
                } else {
                    aut.tuples(label).map(|b| Pos::Adam(*v, *q, b.clone())).collect()
                }
            }
            Pos::Adam(v, q, b) => (0..b.len()).map(|i| Pos::Edge(*v, *q, b.clone(), i)).collect(),
            Pos::Edge(v, q, b, i) => vec![Pos::Eve(child(s, *v, i + 1), dpa.transition[*q][b[*i]])],
            Pos::Win | Pos::Lose => vec![pos.clone()],
        };
        let mut moves = Vec::with_capacity(targets.len());
        for t in targets {
            moves.push(intern(t, &mut game, &mut ids, &mut queue));
        }
        game.moves[me] = moves;
    }
    game.close_dead_ends();
    let sol = zielonka(&game);
    let work = game.len();
    if sol.winner[root] != Player::Eve {
        return Ok(Membership { accepted: false, run: None, work });
    }
    let back: BTreeMap<usize, &Pos> = ids.iter().map(|(p, &i)| (i, p)).collect();
    let mut entries = Vec::new();
    let mut seen = BTreeSet::from([root]);
    let mut stack = vec![root];
    while let Some(i) = stack.pop() {
        let Some(Pos::Eve(v, q)) = back.get(&i).copied() else { unreachable!("only Eve positions are stacked") };
        let chosen = sol.strategy[i].expect("winning Eve position has a move");
        match back.get(&chosen).copied() {
            Some(Pos::Adam(_, _, b)) => {
                entries.push(RunEntry { vertex: *v, memory: *q, choice: RunChoice::Tuple(b.clone()) });
                for (k, &x) in b.iter().enumerate() {
                    let next = ids[&Pos::Eve(child(s, *v, k + 1), dpa.transition[*q][x])];
                    if seen.insert(next) {
                        stack.push(next);
                    }
                }
            }
            Some(Pos::Win) => {
                let label = &s.vertices[*v].label;
                let t = aut.leaves(label).copied().find(|&t| dpa.finals[*q][t]).expect("a winning leaf value");
                entries.push(RunEntry { vertex: *v, memory: *q, choice: RunChoice::Leaf(t) });
            }
            _ => unreachable!("Eve wins only through tuples or good leaves"),
        }
    }
    entries.sort();
    Ok(Membership { accepted: true, run: Some(Run { memory: RunMemory::Dpa, entries }), work })
}

/// The componentwise-maximal tuples: with monotone tables, they dominate the others.
fn maximal(p: &Presentation, ts: Vec<Vec<usize>>) -> Vec<Vec<usize>> {
    let le = |a: &[usize], b: &[usize]| a.iter().zip(b).all(|(&x, &y)| p.leq1(x, y));
    ts.iter().filter(|t| !ts.iter().any(|o| o != *t && le(t, o))).cloned().collect()
}

struct WilkeSearch<'a> {
    aut: &'a UnfoldAutomaton,
    p: &'a Presentation,
    s: &'a SetSystem<Sym>,
    options: BTreeMap<usize, Vec<RunChoice>>,
    tried: usize,
}

impl WilkeSearch<'_> {
    fn options(&mut self, v: usize, m: usize) -> Vec<RunChoice> {
        let label = &self.s.vertices[v].label;
        if label.rank == 0 {
            // A leaf's branch is finished here: keep the accepted values only.
            let prefix = m.checked_sub(1);
            return self.aut.leaves(label).filter(|&&t| self.p.accepting.contains(&self.p.act_opt(prefix, t))).map(|&t| RunChoice::Leaf(t)).collect();
        }
        let p = self.p;
        let aut = self.aut;
        self.options.entry(v).or_insert_with(|| maximal(p, aut.tuples(label).cloned().collect()).into_iter().map(RunChoice::Tuple).collect()).clone()
    }

    fn unassigned(&self, run: &BTreeMap<(usize, usize), RunChoice>) -> Option<(usize, usize)> {
        let start = (self.s.init_vertex(), 0);
        let mut seen = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some((v, m)) = queue.pop_front() {
            match run.get(&(v, m)) {
                None => return Some((v, m)),
                Some(RunChoice::Tuple(b)) => {
                    for (i, &x) in b.iter().enumerate() {
                        let next = (child(self.s, v, i + 1), self.p.then(m.checked_sub(1), x) + 1);
                        if seen.insert(next) {
                            queue.push_back(next);
                        }
                    }
                }
                Some(RunChoice::Leaf(_)) => {}
            }
        }
        None
    }

    fn search(&mut self, run: &mut BTreeMap<(usize, usize), RunChoice>) -> Result<Option<Run>> {
        let Some((v, m)) = self.unassigned(run) else {
            self.tried += 1;
            let entries = run.iter().map(|(&(vertex, memory), c)| RunEntry { vertex, memory, choice: c.clone() }).collect();
            let candidate = Run { memory: RunMemory::Prefix, entries };
            let checked = check_run(self.aut, self.s, &candidate)?;
            return Ok(checked.ok.then_some(candidate));
        };
        for c in self.options(v, m) {
            run.insert((v, m), c);
            if let Some(found) = self.search(run)? {
                return Ok(Some(found));
            }
        }
        run.remove(&(v, m));
        Ok(None)
    }
}

fn accepts_wilke(aut: &UnfoldAutomaton, p: &Presentation, s: &SetSystem<Sym>) -> Result<Membership> {
    let mut search = WilkeSearch { aut, p, s, options: BTreeMap::new(), tried: 0 };
    let found = search.search(&mut BTreeMap::new())?;
    Ok(Membership { accepted: found.is_some(), run: found, work: search.tried })
}
