//! Unfold-equivalence of systems and bisimilarity of transition systems.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::Serialize;

use crate::error::{input, rank_check, Error, Result};
use crate::model::ts::{decode_ts, TransitionSystem};
use crate::model::{Ranked, SetSystem, Sym, Target};

/// Why two systems differ, found at the end of a direction path from the initial pair.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Distinction {
    pub path: Vec<usize>,
    pub reason: String,
}

/// A positive verdict carries a common unfolding: the product of the two systems on
/// related pairs, with both projections.
#[derive(Clone, Debug)]
pub struct CommonUnfolding<L> {
    pub system: SetSystem<L>,
    pub pairs: Vec<(usize, usize)>,
    pub left: Vec<usize>,
    pub right: Vec<usize>,
}

#[derive(Clone, Debug)]
pub enum UnfoldVerdict<L> {
    Equivalent(CommonUnfolding<L>),
    Different(Distinction),
}

impl<L> UnfoldVerdict<L> {
    pub fn holds(&self) -> bool {
        matches!(self, UnfoldVerdict::Equivalent(_))
    }
}

/// Exact decision for systems: explore the pairs reachable from the initial pair by
/// synchronized steps; equivalent iff every reached pair agrees locally.
pub fn unfold_equivalent<L: Ranked + Clone + PartialEq>(t: &SetSystem<L>, t2: &SetSystem<L>) -> Result<UnfoldVerdict<L>> {
    rank_check(t.rank, t2.rank)?;
    for (name, s) in [("left", t), ("right", t2)] {
        if !s.is_system() {
            return Err(Error::NotSystem(format!("{name} operand")));
        }
    }
    let start = (t.init_vertex(), t2.init_vertex());
    let mut index: BTreeMap<(usize, usize), usize> = BTreeMap::from([(start, 0)]);
    let mut pairs = vec![start];
    let mut paths: Vec<Vec<usize>> = vec![Vec::new()];
    let mut queue = VecDeque::from([0usize]);
    let mut steps: Vec<(usize, usize, Target)> = Vec::new();
    while let Some(k) = queue.pop_front() {
        let (v, v2) = pairs[k];
        let (l, l2) = (&t.vertices[v].label, &t2.vertices[v2].label);
        let differ = |path: &[usize], reason: String| Ok(UnfoldVerdict::Different(Distinction { path: path.to_vec(), reason }));
        if l != l2 {
            return differ(&paths[k], format!("labels differ at `{}` / `{}`", t.vertices[v].id, t2.vertices[v2].id));
        }
        for d in 1..=l.rank() {
            match (t.step(v, d), t2.step(v2, d)) {
                (Target::Var(x), Target::Var(y)) if x == y => steps.push((k, d, Target::Var(x))),
                (Target::Vertex(w), Target::Vertex(w2)) => {
                    let next = *index.entry((w, w2)).or_insert_with(|| {
                        pairs.push((w, w2));
                        let mut p = paths[k].clone();
                        p.push(d);
                        paths.push(p);
                        queue.push_back(pairs.len() - 1);
                        pairs.len() - 1
                    });
                    steps.push((k, d, Target::Vertex(next)));
                }
                (a, b) => return differ(&paths[k], format!("direction {d}: {} vs {}", show(t, a), show(t2, b))),
            }
        }
    }
    let mut system = SetSystem::new(t.rank);
    for (k, &(v, v2)) in pairs.iter().enumerate() {
        system.add_vertex(format!("({},{})", t.vertices[v].id, t2.vertices[v2].id), t.vertices[v].label.clone(), k == 0, false);
    }
    for (k, d, x) in steps {
        match x {
            Target::Vertex(w) => system.add_edge(k, d, w),
            Target::Var(y) => system.add_var_edge(k, d, y),
        }
    }
    Ok(UnfoldVerdict::Equivalent(CommonUnfolding { system, left: pairs.iter().map(|p| p.0).collect(), right: pairs.iter().map(|p| p.1).collect(), pairs }))
}

/// Target of a direction in a [`SystemKey`]: a position in BFS order, or a variable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum KeyTarget {
    Vertex(usize),
    Var(usize),
}

/// Exact invariant of a system up to unfold-equivalence: the minimal quotient read
/// off in BFS order from the initial vertex, directions taken in increasing order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SystemKey<L> {
    pub rank: usize,
    pub rows: Vec<(L, Vec<KeyTarget>)>,
}

/// Coarsest partition of the vertices of a system compatible with labels and
/// successors (Moore minimisation). Returns the block of every vertex.
pub fn unfold_classes<L: Ranked + Ord + Clone>(s: &SetSystem<L>) -> Vec<usize> {
    let labels: Vec<L> = s.vertices.iter().map(|v| v.label.clone()).collect();
    let mut block = blocks_of(&labels);
    loop {
        let sigs: Vec<(usize, Vec<KeyTarget>)> = (0..s.len())
            .map(|v| {
                let row = (1..=s.vertices[v].label.rank())
                    .map(|d| match s.step(v, d) {
                        Target::Vertex(w) => KeyTarget::Vertex(block[w]),
                        Target::Var(x) => KeyTarget::Var(x),
                    })
                    .collect();
                (block[v], row)
            })
            .collect();
        let next = blocks_of(&sigs);
        let count = |x: &[usize]| x.iter().collect::<BTreeSet<_>>().len();
        if count(&next) == count(&block) {
            return next;
        }
        block = next;
    }
}

/// Canonical key of a system; two systems are unfold-equivalent iff their keys are equal.
pub fn system_key<L: Ranked + Ord + Clone>(s: &SetSystem<L>) -> Result<SystemKey<L>> {
    if !s.is_system() {
        return Err(Error::NotSystem("canonical key".into()));
    }
    let block = unfold_classes(s);
    let mut order: BTreeMap<usize, usize> = BTreeMap::new();
    let mut reps = Vec::new();
    let start = s.init_vertex();
    order.insert(block[start], 0);
    reps.push(start);
    let mut rows = Vec::new();
    let mut k = 0;
    while k < reps.len() {
        let v = reps[k];
        let mut row = Vec::new();
        for d in 1..=s.vertices[v].label.rank() {
            row.push(match s.step(v, d) {
                Target::Var(x) => KeyTarget::Var(x),
                Target::Vertex(w) => {
                    let next = order.len();
                    let pos = *order.entry(block[w]).or_insert_with(|| {
                        reps.push(w);
                        next
                    });
                    KeyTarget::Vertex(pos)
                }
            });
        }
        rows.push((s.vertices[v].label.clone(), row));
        k += 1;
    }
    Ok(SystemKey { rank: s.rank, rows })
}

/// The minimal system of a key.
pub fn key_system<L: Clone>(key: &SystemKey<L>) -> SetSystem<L> {
    let mut out = SetSystem::new(key.rank);
    for (i, (l, _)) in key.rows.iter().enumerate() {
        out.add_vertex(format!("q{i}"), l.clone(), i == 0, false);
    }
    for (i, (_, row)) in key.rows.iter().enumerate() {
        for (d, t) in row.iter().enumerate() {
            match *t {
                KeyTarget::Vertex(w) => out.add_edge(i, d + 1, w),
                KeyTarget::Var(x) => out.add_var_edge(i, d + 1, x),
            }
        }
    }
    out
}

/// Minimal system unfold-equivalent to `s`.
pub fn minimize<L: Ranked + Ord + Clone>(s: &SetSystem<L>) -> Result<SetSystem<L>> {
    Ok(key_system(&system_key(s)?))
}

fn show<L>(s: &SetSystem<L>, t: Target) -> String {
    match t {
        Target::Vertex(w) => format!("vertex `{}`", s.vertices[w].id),
        Target::Var(x) => format!("x{x}"),
    }
}

/// A bisimulation relation, or the refinement round at which the initial states split
/// (round 0: different valuations).
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "kebab-case")]
pub enum BisimVerdict {
    Bisimilar { relation: Vec<(usize, usize)> },
    NotBisimilar { round: usize },
}

impl BisimVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, BisimVerdict::Bisimilar { .. })
    }
}

/// Signature-based partition refinement on the disjoint union.
pub fn bisimilar(a: &TransitionSystem, b: &TransitionSystem) -> BisimVerdict {
    let n = a.len();
    let total = n + b.len();
    let props = |v: usize| if v < n { &a.props[v] } else { &b.props[v - n] };
    let succ: Vec<Vec<usize>> = (0..total).map(|v| if v < n { a.successors(v) } else { b.successors(v - n).into_iter().map(|w| w + n).collect() }).collect();
    let mut block = blocks_of(&(0..total).map(props).collect::<Vec<_>>());
    let (ia, ib) = (a.initial, b.initial + n);
    let mut round = 0;
    loop {
        if block[ia] != block[ib] {
            return BisimVerdict::NotBisimilar { round };
        }
        let sigs: Vec<(usize, BTreeSet<usize>)> = (0..total).map(|v| (block[v], succ[v].iter().map(|&w| block[w]).collect())).collect();
        let next = blocks_of(&sigs);
        let count = |x: &[usize]| x.iter().collect::<BTreeSet<_>>().len();
        if count(&next) == count(&block) {
            break;
        }
        block = next;
        round += 1;
    }
    let block = &block;
    let relation = (0..n).flat_map(|v| (0..b.len()).filter(move |&w| block[v] == block[w + n]).map(move |w| (v, w))).collect();
    BisimVerdict::Bisimilar { relation }
}

fn blocks_of<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let sorted: BTreeSet<T> = keys.iter().cloned().collect();
    let index: BTreeMap<&T, usize> = sorted.iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| index[k]).collect()
}

/// Check the three clauses of a bisimulation relation.
pub fn is_bisimulation(a: &TransitionSystem, b: &TransitionSystem, r: &[(usize, usize)]) -> bool {
    let rel: BTreeSet<(usize, usize)> = r.iter().copied().collect();
    rel.contains(&(a.initial, b.initial))
        && rel.iter().all(|&(x, y)| {
            a.props[x] == b.props[y]
                && a.successors(x).iter().all(|&x2| b.successors(y).iter().any(|&y2| rel.contains(&(x2, y2))))
                && b.successors(y).iter().all(|&y2| a.successors(x).iter().any(|&x2| rel.contains(&(x2, y2))))
        })
}

/// Bisimilarity of closed systems over valuation symbols, through their decodings.
pub fn bisimilar_systems(s: &SetSystem<Sym>, s2: &SetSystem<Sym>) -> Result<BisimVerdict> {
    let a = decode_ts(s)?;
    let b = decode_ts(s2)?;
    Ok(bisimilar(&a, &b))
}

/// Unfold-equivalence lifted to set-systems that happen to be systems; anything else
/// is an input error.
pub fn unfold_equivalent_checked(t: &SetSystem<Sym>, t2: &SetSystem<Sym>) -> Result<bool> {
    if !t.is_system() || !t2.is_system() {
        return input("unfold-equivalence is decided on systems");
    }
    Ok(unfold_equivalent(t, t2)?.holds())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::from_expression;
    use crate::morphism::check_morphism;

    fn e(s: &str) -> SetSystem<Sym> {
        from_expression(s, None).unwrap()
    }

    #[test]
    fn shared_leaf_is_equivalent() {
        let tree = e("a2(b, b)");
        let mut folded = SetSystem::new(0);
        let r = folded.add_vertex("r", Sym::new("a2", 2), true, false);
        let l = folded.add_vertex("l", Sym::new("b", 0), false, false);
        folded.add_edge(r, 1, l);
        folded.add_edge(r, 2, l);
        match unfold_equivalent(&tree, &folded).unwrap() {
            UnfoldVerdict::Equivalent(cu) => {
                assert!(check_morphism(&cu.system, &tree, &cu.left).unwrap().is_morphism());
                assert!(check_morphism(&cu.system, &folded, &cu.right).unwrap().is_morphism());
            }
            UnfoldVerdict::Different(d) => panic!("{d:?}"),
        }
        let other = e("a2(b, c)");
        match unfold_equivalent(&tree, &other).unwrap() {
            UnfoldVerdict::Different(d) => assert_eq!(d.path, vec![2]),
            _ => panic!("expected a distinction"),
        }
    }

    #[test]
    fn key_identifies_unfoldings() {
        let tree = e("a2(b, b)");
        let mut folded = SetSystem::new(0);
        let r = folded.add_vertex("r", Sym::new("a2", 2), true, false);
        let l = folded.add_vertex("l", Sym::new("b", 0), false, false);
        folded.add_edge(r, 1, l);
        folded.add_edge(r, 2, l);
        assert_eq!(system_key(&tree).unwrap(), system_key(&folded).unwrap());
        assert_eq!(minimize(&tree).unwrap().len(), 2);
        assert_ne!(system_key(&tree).unwrap(), system_key(&e("a2(b, c)")).unwrap());
    }

    #[test]
    fn variable_mismatch() {
        let v = unfold_equivalent(&e("a(x1, x2)"), &e("a(x2, x1)")).unwrap();
        assert!(!v.holds());
    }

    fn ts(n: usize, tr: &[(usize, usize)], props: &[&[&str]]) -> TransitionSystem {
        TransitionSystem {
            ids: (0..n).map(|i| format!("s{i}")).collect(),
            props: props.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect(),
            initial: 0,
            transitions: tr.iter().copied().collect(),
        }
    }

    #[test]
    fn duplicated_child_is_bisimilar() {
        let a = ts(2, &[(0, 1)], &[&[], &["p"]]);
        let b = ts(3, &[(0, 1), (0, 2)], &[&[], &["p"], &["p"]]);
        match bisimilar(&a, &b) {
            BisimVerdict::Bisimilar { relation } => assert!(is_bisimulation(&a, &b, &relation)),
            v => panic!("{v:?}"),
        }
    }

    #[test]
    fn valuation_mismatch_at_start() {
        let a = ts(1, &[], &[&["p"]]);
        let b = ts(1, &[], &[&[]]);
        assert_eq!(bisimilar(&a, &b), BisimVerdict::NotBisimilar { round: 0 });
    }

    #[test]
    fn deadlock_differs_from_loop() {
        let a = ts(1, &[(0, 0)], &[&[]]);
        let b = ts(2, &[(0, 1)], &[&[], &[]]);
        assert!(!bisimilar(&a, &b).holds());
    }
}
