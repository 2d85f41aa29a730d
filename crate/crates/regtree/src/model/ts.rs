//! Transition systems and their encoding as systems over valuation symbols `ν_n`,
//! written `{p,q}_n`.

use std::collections::BTreeSet;

use super::setsys::{SetSystem, Sym, Target};
use crate::error::{input, Result};

pub type Valuation = BTreeSet<String>;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitionSystem {
    pub ids: Vec<String>,
    pub props: Vec<Valuation>,
    pub initial: usize,
    pub transitions: BTreeSet<(usize, usize)>,
}

impl TransitionSystem {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn successors(&self, v: usize) -> Vec<usize> {
        self.transitions.range((v, 0)..(v + 1, 0)).map(|&(_, w)| w).collect()
    }

    pub fn check(&self) -> Result<()> {
        if self.initial >= self.len() {
            return input("initial state out of range");
        }
        if self.props.len() != self.len() {
            return input("one valuation per state is required");
        }
        if let Some(&(u, v)) = self.transitions.iter().find(|&&(u, v)| u >= self.len() || v >= self.len()) {
            return input(format!("transition ({u},{v}) leaves the state set"));
        }
        Ok(())
    }
}

/// The symbol `ν_n` for valuation `ν`.
pub fn ts_symbol(nu: &Valuation, n: usize) -> Sym {
    let props: Vec<&str> = nu.iter().map(String::as_str).collect();
    Sym::new(format!("{{{}}}_{n}", props.join(",")), n)
}

/// Inverse of [`ts_symbol`]; `None` for symbols outside the valuation alphabet.
pub fn parse_ts_symbol(s: &Sym) -> Option<Valuation> {
    let rest = s.name.strip_prefix('{')?;
    let (body, n) = rest.rsplit_once("}_")?;
    if n.parse::<usize>().ok()? != s.rank {
        return None;
    }
    Some(body.split(',').filter(|p| !p.is_empty()).map(str::to_string).collect())
}

/// Erase directions of a closed system over valuation symbols.
pub fn decode_ts(s: &SetSystem<Sym>) -> Result<TransitionSystem> {
    if !s.is_closed() {
        return input("decoding needs a closed system");
    }
    if !s.is_system() {
        return input("decoding needs a system");
    }
    let mut props = Vec::with_capacity(s.len());
    for v in &s.vertices {
        match parse_ts_symbol(&v.label) {
            Some(nu) => props.push(nu),
            None => return input(format!("vertex `{}`: `{}` is not a valuation symbol", v.id, v.label.name)),
        }
    }
    let transitions = s
        .edges
        .iter()
        .filter_map(|e| match e.tgt {
            Target::Vertex(w) => Some((e.src, w)),
            Target::Var(_) => None,
        })
        .collect();
    Ok(TransitionSystem { ids: s.vertices.iter().map(|v| v.id.clone()).collect(), props, initial: s.init_vertex(), transitions })
}

/// Encode with symbol rank equal to the out-degree, successors in state order.
///
/// With `padding = Some(n)`, a state of out-degree `k` gets `ν_{n·k}` and direction
/// `i + k·j` points to its `i`-th successor, for `j < n`.
pub fn encode_ts(ts: &TransitionSystem, padding: Option<usize>) -> SetSystem<Sym> {
    let factor = padding.unwrap_or(1).max(1);
    let mut s = SetSystem::new(0);
    for (v, id) in ts.ids.iter().enumerate() {
        let k = ts.successors(v).len();
        s.add_vertex(id.clone(), ts_symbol(&ts.props[v], k * factor), v == ts.initial, false);
    }
    for v in 0..ts.len() {
        let succ = ts.successors(v);
        let k = succ.len();
        for j in 0..factor {
            for (i, &w) in succ.iter().enumerate() {
                s.add_edge(v, i + 1 + k * j, w);
            }
        }
    }
    s
}

/// Maximum out-degree, the padding used by the encoding argument for bisimilar pairs.
pub fn max_out_degree(ts: &TransitionSystem) -> usize {
    (0..ts.len()).map(|v| ts.successors(v).len()).max().unwrap_or(0)
}

/// A transition system as a closed set-system with one direction per state, for
/// isomorphism testing via canonical forms.
pub fn as_graph(ts: &TransitionSystem) -> SetSystem<(Valuation, usize)> {
    let mut g = SetSystem::new(0);
    for (v, id) in ts.ids.iter().enumerate() {
        g.add_vertex(id.clone(), (ts.props[v].clone(), 1), v == ts.initial, false);
    }
    for &(u, v) in &ts.transitions {
        g.add_edge(u, 1, v);
    }
    g
}

impl super::setsys::Ranked for (Valuation, usize) {
    fn rank(&self) -> usize {
        self.1
    }
}

pub fn ts_isomorphic(a: &TransitionSystem, b: &TransitionSystem) -> bool {
    super::canon::isomorphic(&as_graph(a), &as_graph(b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ts(n: usize, init: usize, tr: &[(usize, usize)], props: &[&[&str]]) -> TransitionSystem {
        TransitionSystem {
            ids: (0..n).map(|i| format!("s{i}")).collect(),
            props: props.iter().map(|p| p.iter().map(|x| x.to_string()).collect()).collect(),
            initial: init,
            transitions: tr.iter().copied().collect(),
        }
    }

    #[test]
    fn symbol_round_trip() {
        let nu: Valuation = ["p".to_string(), "q".to_string()].into();
        let s = ts_symbol(&nu, 3);
        assert_eq!(s.name, "{p,q}_3");
        assert_eq!(parse_ts_symbol(&s), Some(nu));
        assert_eq!(parse_ts_symbol(&ts_symbol(&Valuation::new(), 0)), Some(Valuation::new()));
        assert_eq!(parse_ts_symbol(&Sym::new("a", 2)), None);
    }

    #[test]
    fn out_degree_gives_rank() {
        let t = ts(2, 0, &[(0, 1), (0, 0)], &[&[], &["p"]]);
        let s = encode_ts(&t, None);
        assert_eq!(s.vertices[0].label.rank, 2);
        assert_eq!(s.succ(0, 1), vec![Target::Vertex(0)]);
        assert_eq!(s.succ(0, 2), vec![Target::Vertex(1)]);
        assert_eq!(decode_ts(&s).unwrap(), t);
    }

    #[test]
    fn padded_encoding_decodes_to_same_system() {
        let t = ts(3, 0, &[(0, 1), (0, 2), (1, 1)], &[&["p"], &[], &["q"]]);
        let s = encode_ts(&t, Some(3));
        assert!(s.is_system());
        assert_eq!(s.vertices[0].label.rank, 6);
        assert_eq!(decode_ts(&s).unwrap(), t);
    }

    #[test]
    fn decoding_erases_duplicate_directions() {
        let mut s = SetSystem::new(0);
        let r = s.add_vertex("r", ts_symbol(&Valuation::new(), 2), true, false);
        let c = s.add_vertex("c", ts_symbol(&Valuation::new(), 0), false, false);
        s.add_edge(r, 1, c);
        s.add_edge(r, 2, c);
        let t = decode_ts(&s).unwrap();
        assert_eq!(t.transitions.len(), 1);
    }
}
