use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;

use super::alphabet::RankedAlphabet;
use super::setsys::{Ranked, SetSystem, Sym, Target};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    DuplicateVertexId { id: String },
    UnknownSymbol { vertex: String, label: String },
    SymbolRankMismatch { vertex: String, label: String, declared: usize, used: usize },
    DirectionOutOfRange { vertex: String, dir: usize, rank: usize },
    VariableOutOfRange { vertex: String, dir: usize, var: usize, rank: usize },
    DanglingEdge { src: usize, dir: usize, dst: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateVertexId { id } => write!(f, "duplicate vertex id `{id}`"),
            Violation::UnknownSymbol { vertex, label } => write!(f, "vertex `{vertex}`: symbol `{label}` not in alphabet"),
            Violation::SymbolRankMismatch { vertex, label, declared, used } => {
                write!(f, "vertex `{vertex}`: symbol `{label}` has rank {declared} in the alphabet, {used} here")
            }
            Violation::DirectionOutOfRange { vertex, dir, rank } => {
                write!(f, "vertex `{vertex}`: direction {dir} exceeds symbol rank {rank}")
            }
            Violation::VariableOutOfRange { vertex, dir, var, rank } => {
                write!(f, "vertex `{vertex}` direction {dir}: variable x{var} outside 1..{rank}")
            }
            Violation::DanglingEdge { src, dir, dst } => write!(f, "edge ({src},{dir},{dst}) points to no vertex"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kind {
    SetSystem,
    System,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub violations: Vec<Violation>,
    pub kind: Kind,
    pub closed: bool,
}

impl Report {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn is_system(&self) -> bool {
        self.is_valid() && self.kind == Kind::System
    }
}

/// Every invariant violation of `s`, plus its classification.
pub fn validate<L: Ranked + fmt::Display>(s: &SetSystem<L>) -> Report {
    let mut violations = Vec::new();
    let mut ids = BTreeSet::new();
    for v in &s.vertices {
        if !ids.insert(v.id.as_str()) {
            violations.push(Violation::DuplicateVertexId { id: v.id.clone() });
        }
    }
    for e in &s.edges {
        let Some(src) = s.vertices.get(e.src) else {
            violations.push(Violation::DanglingEdge { src: e.src, dir: e.dir, dst: usize::MAX });
            continue;
        };
        let rank = src.label.rank();
        if e.dir == 0 || e.dir > rank {
            violations.push(Violation::DirectionOutOfRange { vertex: src.id.clone(), dir: e.dir, rank });
        }
        match e.tgt {
            Target::Vertex(w) if w >= s.len() => violations.push(Violation::DanglingEdge { src: e.src, dir: e.dir, dst: w }),
            Target::Var(x) if x == 0 || x > s.rank => {
                violations.push(Violation::VariableOutOfRange { vertex: src.id.clone(), dir: e.dir, var: x, rank: s.rank })
            }
            _ => {}
        }
    }
    let kind = if violations.is_empty() && s.is_system() { Kind::System } else { Kind::SetSystem };
    Report { violations, kind, closed: s.rank == 0 }
}

/// `validate` plus membership of every label in `alphabet`.
pub fn validate_in(s: &SetSystem<Sym>, alphabet: &RankedAlphabet) -> Report {
    let mut report = validate(s);
    let mut extra = Vec::new();
    let mut reported: BTreeMap<&str, ()> = BTreeMap::new();
    for v in &s.vertices {
        match alphabet.rank_of(&v.label.name) {
            None if !v.label.is_hole() => {
                if reported.insert(v.id.as_str(), ()).is_none() {
                    extra.push(Violation::UnknownSymbol { vertex: v.id.clone(), label: v.label.name.clone() });
                }
            }
            Some(r) if r != v.label.rank => {
                extra.push(Violation::SymbolRankMismatch { vertex: v.id.clone(), label: v.label.name.clone(), declared: r, used: v.label.rank })
            }
            _ => {}
        }
    }
    if !extra.is_empty() {
        report.kind = Kind::SetSystem;
    }
    report.violations.extend(extra);
    report
}
