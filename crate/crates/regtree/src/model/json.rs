//! JSON documents for alphabets, set-systems (plain and nested) and transition systems.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::alphabet::RankedAlphabet;
use super::setsys::{SetSystem, Sym, Target};
use super::ts::TransitionSystem;
use crate::error::{input, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VertexDoc {
    pub id: String,
    pub label: Value,
    #[serde(default)]
    pub initial: bool,
    #[serde(default)]
    pub root: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeDoc {
    pub src: String,
    pub dir: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dst: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SystemDoc {
    pub rank: usize,
    /// Ranks of the symbols used; optional when an alphabet is supplied separately.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alphabet: Option<RankedAlphabet>,
    pub vertices: Vec<VertexDoc>,
    pub edges: Vec<EdgeDoc>,
}

fn edges_to_doc<L>(s: &SetSystem<L>) -> Vec<EdgeDoc> {
    s.edges
        .iter()
        .map(|e| {
            let src = s.vertices[e.src].id.clone();
            match e.tgt {
                Target::Vertex(w) => EdgeDoc { src, dir: e.dir, dst: Some(s.vertices[w].id.clone()), var: None },
                Target::Var(x) => EdgeDoc { src, dir: e.dir, dst: None, var: Some(x) },
            }
        })
        .collect()
}

fn vertices_to_doc<L>(s: &SetSystem<L>, label: impl Fn(&L) -> Value) -> Vec<VertexDoc> {
    s.vertices.iter().map(|v| VertexDoc { id: v.id.clone(), label: label(&v.label), initial: v.initial, root: v.root }).collect()
}

pub fn system_to_doc(s: &SetSystem<Sym>) -> SystemDoc {
    let mut used: BTreeMap<&str, usize> = BTreeMap::new();
    for v in &s.vertices {
        used.insert(&v.label.name, v.label.rank);
    }
    SystemDoc {
        rank: s.rank,
        alphabet: Some(RankedAlphabet { symbols: used.into_iter().map(|(n, r)| Sym::new(n, r)).collect() }),
        vertices: vertices_to_doc(s, |l| Value::String(l.name.clone())),
        edges: edges_to_doc(s),
    }
}

/// Build the shape of a document, labelling vertices with `label`.
fn shape_from_doc<L>(doc: &SystemDoc, mut label: impl FnMut(&VertexDoc) -> Result<L>) -> Result<SetSystem<L>> {
    let mut s = SetSystem::new(doc.rank);
    let mut index = BTreeMap::new();
    for v in &doc.vertices {
        if index.insert(v.id.clone(), s.len()).is_some() {
            return input(format!("duplicate vertex id `{}`", v.id));
        }
        let l = label(v)?;
        s.add_vertex(v.id.clone(), l, v.initial, v.root);
    }
    for (k, e) in doc.edges.iter().enumerate() {
        let Some(&src) = index.get(&e.src) else {
            return input(format!("edge {k}: unknown source vertex `{}`", e.src));
        };
        match (&e.dst, e.var) {
            (Some(dst), None) => {
                let Some(&w) = index.get(dst) else {
                    return input(format!("edge {k}: unknown target vertex `{dst}`"));
                };
                s.add_edge(src, e.dir, w);
            }
            (None, Some(x)) => s.add_var_edge(src, e.dir, x),
            _ => return input(format!("edge {k}: exactly one of `dst` and `var` is required")),
        }
    }
    Ok(s)
}

/// Symbol ranks come from `alphabet`, else from the document's own alphabet, else
/// from the largest direction used at vertices carrying that label.
pub fn system_from_doc(doc: &SystemDoc, alphabet: Option<&RankedAlphabet>) -> Result<SetSystem<Sym>> {
    let alphabet = alphabet.or(doc.alphabet.as_ref());
    let mut inferred: BTreeMap<String, usize> = BTreeMap::new();
    for v in &doc.vertices {
        let Value::String(name) = &v.label else {
            return input(format!("vertex `{}`: label must be a symbol name", v.id));
        };
        inferred.entry(name.clone()).or_insert(0);
    }
    let label_of: BTreeMap<&str, &str> = doc.vertices.iter().map(|v| (v.id.as_str(), v.label.as_str().unwrap_or_default())).collect();
    for e in &doc.edges {
        if let Some(name) = label_of.get(e.src.as_str()) {
            let r = inferred.entry(name.to_string()).or_insert(0);
            *r = (*r).max(e.dir);
        }
    }
    shape_from_doc(doc, |v| {
        let name = v.label.as_str().unwrap_or_default();
        let rank = match alphabet {
            Some(a) => match a.rank_of(name) {
                Some(r) => r,
                None => return input(format!("vertex `{}`: symbol `{name}` is not in the alphabet", v.id)),
            },
            None => inferred[name],
        };
        Ok(Sym::new(name, rank))
    })
}

/// Nested set-systems: every label is an inline system document.
pub fn nested_to_value(n: &SetSystem<SetSystem<Sym>>) -> Value {
    let doc = SystemDoc {
        rank: n.rank,
        alphabet: None,
        vertices: vertices_to_doc(n, |inner| serde_json::to_value(system_to_doc(inner)).expect("serializable")),
        edges: edges_to_doc(n),
    };
    serde_json::to_value(doc).expect("serializable")
}

pub fn nested_from_value(v: &Value, alphabet: Option<&RankedAlphabet>) -> Result<SetSystem<SetSystem<Sym>>> {
    let doc: SystemDoc = serde_json::from_value(v.clone()).map_err(|e| Error::Input(e.to_string()))?;
    shape_from_doc(&doc, |vx| {
        let inner: SystemDoc = serde_json::from_value(vx.label.clone()).map_err(|e| Error::Input(format!("vertex `{}`: inner system: {e}", vx.id)))?;
        system_from_doc(&inner, alphabet)
    })
}

pub fn system_to_json(s: &SetSystem<Sym>) -> String {
    serde_json::to_string_pretty(&system_to_doc(s)).expect("serializable")
}

pub fn system_from_json(text: &str, alphabet: Option<&RankedAlphabet>) -> Result<SetSystem<Sym>> {
    let doc: SystemDoc = serde_json::from_str(text).map_err(|e| Error::Input(format!("line {} column {}: {e}", e.line(), e.column())))?;
    system_from_doc(&doc, alphabet)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateDoc {
    pub id: String,
    #[serde(default)]
    pub props: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TsDoc {
    pub states: Vec<StateDoc>,
    pub initial: String,
    pub transitions: Vec<(String, String)>,
}

pub fn ts_to_doc(ts: &TransitionSystem) -> TsDoc {
    TsDoc {
        states: ts.ids.iter().zip(&ts.props).map(|(id, p)| StateDoc { id: id.clone(), props: p.iter().cloned().collect() }).collect(),
        initial: ts.ids[ts.initial].clone(),
        transitions: ts.transitions.iter().map(|&(u, v)| (ts.ids[u].clone(), ts.ids[v].clone())).collect(),
    }
}

pub fn ts_from_doc(doc: &TsDoc) -> Result<TransitionSystem> {
    let index: BTreeMap<&str, usize> = doc.states.iter().enumerate().map(|(i, s)| (s.id.as_str(), i)).collect();
    if index.len() != doc.states.len() {
        return input("duplicate state id");
    }
    let lookup = |id: &str| index.get(id).copied().ok_or_else(|| Error::Input(format!("unknown state `{id}`")));
    let ts = TransitionSystem {
        ids: doc.states.iter().map(|s| s.id.clone()).collect(),
        props: doc.states.iter().map(|s| s.props.iter().cloned().collect()).collect(),
        initial: lookup(&doc.initial)?,
        transitions: doc.transitions.iter().map(|(u, v)| Ok((lookup(u)?, lookup(v)?))).collect::<Result<_>>()?,
    };
    ts.check()?;
    Ok(ts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::from_expression;

    #[test]
    fn system_round_trip() {
        let s = from_expression("a(x1, c(b, x2))", None).unwrap();
        let back = system_from_json(&system_to_json(&s), None).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn ranks_can_be_inferred() {
        let text = r#"{"rank":1,"vertices":[{"id":"u","label":"f","initial":true}],"edges":[{"src":"u","dir":2,"var":1}]}"#;
        let s = system_from_json(text, None).unwrap();
        assert_eq!(s.vertices[0].label.rank, 2);
    }

    #[test]
    fn unknown_vertex_is_an_error() {
        let text = r#"{"rank":0,"vertices":[{"id":"u","label":"f"}],"edges":[{"src":"u","dir":1,"dst":"w"}]}"#;
        assert!(system_from_json(text, None).is_err());
    }
}
