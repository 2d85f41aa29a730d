//! Canonical relabelling and isomorphism of set-systems.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::setsys::{Edge, SetSystem, Target};

/// Stable colour refinement: vertices get the same colour when labels, flags,
/// variable edges and (iterated) successor colours per direction agree.
pub fn refine<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K) -> Vec<usize> {
    let n = s.len();
    let base: Vec<(K, bool, bool, Vec<(usize, usize)>)> = (0..n)
        .map(|v| {
            let vars: Vec<(usize, usize)> = s
                .out(v)
                .filter_map(|(d, t)| match t {
                    Target::Var(x) => Some((d, x)),
                    _ => None,
                })
                .collect();
            let vx = &s.vertices[v];
            (key(&vx.label), vx.initial, vx.root, vars)
        })
        .collect();
    refine_from(s, rank_keys(&base))
}

/// Refine a given colouring until the number of classes stops growing.
fn refine_from<L>(s: &SetSystem<L>, mut colour: Vec<usize>) -> Vec<usize> {
    let n = s.len();
    loop {
        let sigs: Vec<(usize, Vec<(usize, usize)>)> = (0..n)
            .map(|v| {
                let mut succ: Vec<(usize, usize)> = s
                    .out(v)
                    .filter_map(|(d, t)| match t {
                        Target::Vertex(w) if w < n => Some((d, colour[w])),
                        _ => None,
                    })
                    .collect();
                succ.sort();
                (colour[v], succ)
            })
            .collect();
        let next = rank_keys(&sigs);
        let classes = |c: &[usize]| c.iter().collect::<BTreeSet<_>>().len();
        if classes(&next) == classes(&colour) {
            return next;
        }
        colour = next;
    }
}

fn rank_keys<T: Ord + Clone>(keys: &[T]) -> Vec<usize> {
    let sorted: BTreeSet<T> = keys.iter().cloned().collect();
    let index: BTreeMap<&T, usize> = sorted.iter().enumerate().map(|(i, k)| (k, i)).collect();
    keys.iter().map(|k| index[k]).collect()
}

/// A set-system relabelled into a fixed vertex order.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CanonicalForm<K> {
    pub rank: usize,
    pub labels: Vec<K>,
    pub initial: Vec<bool>,
    pub root: Vec<bool>,
    pub edges: BTreeSet<(usize, usize, Target)>,
}

/// Vertex order: BFS from initial vertices then roots, children in direction order;
/// ties among start vertices and among targets of one direction are broken by refined
/// colour (label first, then outgoing-edge multiset), then by position.
pub fn canonical_order<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K) -> Vec<usize> {
    let colour = refine(s, key);
    let n = s.len();
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut starts: Vec<usize> = (0..n).filter(|&v| s.vertices[v].initial).collect();
    starts.sort_by_key(|&v| (colour[v], v));
    let mut roots: Vec<usize> = (0..n).filter(|&v| s.vertices[v].root && !s.vertices[v].initial).collect();
    roots.sort_by_key(|&v| (colour[v], v));
    starts.extend(roots);
    let mut rest: Vec<usize> = (0..n).collect();
    rest.sort_by_key(|&v| (colour[v], v));
    starts.extend(rest);
    for start in starts {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            let mut next: Vec<(usize, usize, usize)> = s
                .out(v)
                .filter_map(|(d, t)| match t {
                    Target::Vertex(w) if w < n => Some((d, colour[w], w)),
                    _ => None,
                })
                .collect();
            next.sort();
            for (_, _, w) in next {
                if !seen[w] {
                    seen[w] = true;
                    queue.push_back(w);
                }
            }
        }
    }
    order
}

/// Exact canonical form: individualization-refinement, keeping the least form over
/// all discrete colourings reached. Interchangeable twins are branched on once.
pub fn canonical_form_by<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K + Copy) -> CanonicalForm<K> {
    let mut best = None;
    individualize(s, key, refine(s, key), &mut best);
    best.expect("at least one leaf")
}

fn individualize<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K + Copy, colour: Vec<usize>, best: &mut Option<CanonicalForm<K>>) {
    let n = s.len();
    let mut size = vec![0; n];
    for &c in &colour {
        size[c] += 1;
    }
    let Some(cell) = (0..n).find(|&c| size[c] > 1) else {
        let mut order = vec![0; n];
        for (v, &c) in colour.iter().enumerate() {
            order[c] = v;
        }
        let form = form_in_order(s, key, &order);
        if best.as_ref().is_none_or(|b| form < *b) {
            *best = Some(form);
        }
        return;
    };
    let mut tried: Vec<usize> = Vec::new();
    for v in (0..n).filter(|&v| colour[v] == cell) {
        if tried.iter().any(|&u| twins(s, u, v)) {
            continue;
        }
        tried.push(v);
        let split: Vec<usize> = (0..n).map(|w| 2 * colour[w] + usize::from(w != v)).collect();
        individualize(s, key, refine_from(s, rank_keys(&split)), best);
    }
}

/// Whether swapping `u` and `v` maps the edge set onto itself. Called on vertices of
/// one colour, so labels and flags already agree.
fn twins<L>(s: &SetSystem<L>, u: usize, v: usize) -> bool {
    let swap = |x: usize| {
        if x == u {
            v
        } else if x == v {
            u
        } else {
            x
        }
    };
    s.edges.iter().all(|e| {
        let tgt = match e.tgt {
            Target::Vertex(w) => Target::Vertex(swap(w)),
            t => t,
        };
        s.edges.contains(&Edge { src: swap(e.src), dir: e.dir, tgt })
    })
}

/// The form in BFS order: cheap, and equal forms prove isomorphism, but isomorphic
/// systems may get different forms.
fn bfs_form<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K + Copy) -> CanonicalForm<K> {
    form_in_order(s, key, &canonical_order(s, key))
}

fn form_in_order<L, K: Ord + Clone>(s: &SetSystem<L>, key: impl Fn(&L) -> K, order: &[usize]) -> CanonicalForm<K> {
    let mut pos = vec![0; s.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    CanonicalForm {
        rank: s.rank,
        labels: order.iter().map(|&v| key(&s.vertices[v].label)).collect(),
        initial: order.iter().map(|&v| s.vertices[v].initial).collect(),
        root: order.iter().map(|&v| s.vertices[v].root).collect(),
        edges: s
            .edges
            .iter()
            .map(|e| {
                let t = match e.tgt {
                    Target::Vertex(w) => Target::Vertex(pos[w]),
                    x => x,
                };
                (pos[e.src], e.dir, t)
            })
            .collect(),
    }
}

pub fn canonical_form<L: Ord + Clone>(s: &SetSystem<L>) -> CanonicalForm<L> {
    canonical_form_by(s, |l: &L| l.clone())
}

/// An isomorphism `a → b` (as a vertex map), if one exists. Exact: a backtracking
/// search over colour classes of the refined disjoint union.
pub fn isomorphism_by<L, K: Ord + Clone>(a: &SetSystem<L>, b: &SetSystem<L>, key: impl Fn(&L) -> K + Copy) -> Option<Vec<usize>> {
    if a.rank != b.rank || a.len() != b.len() || a.edges.len() != b.edges.len() {
        return None;
    }
    // Refine the disjoint union so colours are comparable across a and b.
    let n = a.len();
    let mut union: SetSystem<K> = SetSystem::new(a.rank);
    for v in a.vertices.iter().chain(b.vertices.iter()) {
        union.add_vertex(v.id.clone(), key(&v.label), v.initial, v.root);
    }
    for e in &a.edges {
        union.edges.insert(*e);
    }
    for e in &b.edges {
        let tgt = match e.tgt {
            Target::Vertex(w) => Target::Vertex(w + n),
            x => x,
        };
        union.edges.insert(super::setsys::Edge { src: e.src + n, dir: e.dir, tgt });
    }
    let colour = refine(&union, |k| k.clone());
    let mut ca: Vec<usize> = colour[..n].to_vec();
    let mut cb: Vec<usize> = colour[n..].to_vec();
    ca.sort();
    cb.sort();
    if ca != cb {
        return None;
    }
    let order = canonical_order(a, key);
    let mut map = vec![usize::MAX; n];
    let mut used = vec![false; n];
    let b_edges: BTreeSet<(usize, usize, Target)> = b.edges.iter().map(|e| (e.src, e.dir, e.tgt)).collect();
    let a_edges: BTreeSet<(usize, usize, Target)> = a.edges.iter().map(|e| (e.src, e.dir, e.tgt)).collect();
    let mut inverse = vec![usize::MAX; n];
    if search(0, &order, &colour, n, a, b, &a_edges, &b_edges, &mut map, &mut inverse, &mut used) {
        Some(map)
    } else {
        None
    }
}

#[allow(clippy::too_many_arguments)]
fn search<L>(
    i: usize,
    order: &[usize],
    colour: &[usize],
    n: usize,
    a: &SetSystem<L>,
    b: &SetSystem<L>,
    a_edges: &BTreeSet<(usize, usize, Target)>,
    b_edges: &BTreeSet<(usize, usize, Target)>,
    map: &mut [usize],
    inverse: &mut [usize],
    used: &mut [bool],
) -> bool {
    if i == order.len() {
        return true;
    }
    let v = order[i];
    for w in 0..n {
        if used[w] || colour[w + n] != colour[v] {
            continue;
        }
        map[v] = w;
        inverse[w] = v;
        used[w] = true;
        let consistent = a.out(v).all(|(d, t)| match t {
            Target::Vertex(u) if map[u] != usize::MAX => b_edges.contains(&(w, d, Target::Vertex(map[u]))),
            _ => true,
        }) && b.out(w).all(|(d, t)| match t {
            Target::Vertex(u) if inverse[u] != usize::MAX => a_edges.contains(&(v, d, Target::Vertex(inverse[u]))),
            _ => true,
        }) && order[..i].iter().all(|&p| {
            // edges from earlier vertices into v
            let dirs = |edges: &BTreeSet<(usize, usize, Target)>, src: usize, dst: usize| -> Vec<usize> {
                edges.range((src, 0, Target::Vertex(0))..(src + 1, 0, Target::Vertex(0))).filter(|x| x.2 == Target::Vertex(dst)).map(|x| x.1).collect()
            };
            dirs(a_edges, p, v) == dirs(b_edges, map[p], w)
        });
        if consistent && search(i + 1, order, colour, n, a, b, a_edges, b_edges, map, inverse, used) {
            return true;
        }
        map[v] = usize::MAX;
        inverse[w] = usize::MAX;
        used[w] = false;
    }
    false
}

pub fn isomorphic<L: Ord + Clone>(a: &SetSystem<L>, b: &SetSystem<L>) -> bool {
    isomorphic_by(a, b, |l: &L| l.clone())
}

/// Isomorphism of set-systems whose labels only need a comparison key (e.g. nested ones).
pub fn isomorphic_by<L, K: Ord + Clone>(a: &SetSystem<L>, b: &SetSystem<L>, key: impl Fn(&L) -> K + Copy) -> bool {
    bfs_form(a, key) == bfs_form(b, key) || isomorphism_by(a, b, key).is_some()
}
