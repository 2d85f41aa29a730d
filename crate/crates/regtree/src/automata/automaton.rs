use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::model::{RankedAlphabet, Sym};
use crate::ya::{Presentation, PresentationDoc};

/// A deterministic parity automaton on branch words. Priorities sit on transitions;
/// the least priority seen infinitely often must be even.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Dpa {
    pub states: Vec<String>,
    pub initial: usize,
    /// `transition[q][x]` for `x ∈ X1`.
    pub transition: Vec<Vec<usize>>,
    pub priority: Vec<Vec<usize>>,
    /// `finals[q][t]` for `t ∈ X0`: a finite branch ending in `t` from state `q` is good.
    pub finals: Vec<Vec<bool>>,
}

impl Dpa {
    pub fn step(&self, q: usize, x: usize) -> (usize, usize) {
        (self.transition[q][x], self.priority[q][x])
    }

    pub fn check(&self, x1: usize, x0: usize) -> Result<()> {
        let n = self.states.len();
        if self.initial >= n {
            return input("DPA initial state out of range");
        }
        let shaped = |t: &Vec<Vec<usize>>| t.len() == n && t.iter().all(|r| r.len() == x1);
        if !shaped(&self.transition) || !shaped(&self.priority) {
            return input("DPA transitions must be total over X1");
        }
        if self.transition.iter().flatten().any(|&q| q >= n) {
            return input("DPA transition to an unknown state");
        }
        if self.finals.len() != n || self.finals.iter().any(|r| r.len() != x0) {
            return input("DPA finals must cover every state and X0 value");
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AcceptanceSpec {
    Wilke { presentation: Box<Presentation> },
    Dpa { dpa: Dpa },
}

/// An unfold-automaton: per symbol of positive rank a set of `X1` tuples, per leaf
/// symbol a set of `X0` values, and an acceptance condition on branches.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct UnfoldAutomaton {
    pub x1: Vec<String>,
    pub x0: Vec<String>,
    pub alphabet: RankedAlphabet,
    pub delta_plus: BTreeMap<String, BTreeSet<Vec<usize>>>,
    pub delta_zero: BTreeMap<String, BTreeSet<usize>>,
    pub omega: AcceptanceSpec,
}

impl UnfoldAutomaton {
    pub fn check(&self) -> Result<()> {
        self.alphabet.check()?;
        for s in &self.alphabet.symbols {
            if s.rank == 0 {
                if let Some(&t) = self.delta_zero.get(&s.name).and_then(|d| d.iter().find(|&&t| t >= self.x0.len())) {
                    return input(format!("`{}`: leaf value {t} outside X0", s.name));
                }
            } else if let Some(tuples) = self.delta_plus.get(&s.name) {
                for t in tuples {
                    if t.len() != s.rank {
                        return Err(Error::Rank { expected: s.rank, found: t.len() });
                    }
                    if t.iter().any(|&x| x >= self.x1.len()) {
                        return input(format!("`{}`: tuple component outside X1", s.name));
                    }
                }
            }
        }
        for name in self.delta_plus.keys().chain(self.delta_zero.keys()) {
            if self.alphabet.get(name).is_none() {
                return input(format!("transitions for `{name}`, which is not in the alphabet"));
            }
        }
        match &self.omega {
            AcceptanceSpec::Dpa { dpa } => dpa.check(self.x1.len(), self.x0.len()),
            AcceptanceSpec::Wilke { presentation } => {
                if presentation.y1 != self.x1 || presentation.y0 != self.x0 {
                    return input("Wilke tables must be over X1 and X0");
                }
                Ok(())
            }
        }
    }

    pub fn tuples(&self, a: &Sym) -> impl Iterator<Item = &Vec<usize>> {
        self.delta_plus.get(&a.name).into_iter().flatten()
    }

    pub fn leaves(&self, a: &Sym) -> impl Iterator<Item = &usize> {
        self.delta_zero.get(&a.name).into_iter().flatten()
    }

    /// The same transitions under another acceptance condition.
    pub fn with_omega(&self, omega: AcceptanceSpec) -> Result<Self> {
        let out = UnfoldAutomaton { omega, ..self.clone() };
        out.check()?;
        Ok(out)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: AutomatonDoc = serde_json::from_str(text).map_err(|e| Error::Input(format!("automaton: {e}")))?;
        doc.resolve()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&AutomatonDoc::from(self)).expect("automaton serializes")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DeltaEntry {
    Leaf(String),
    Tuple(Vec<String>),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum OmegaDoc {
    Dpa {
        states: Vec<String>,
        initial: String,
        transition: BTreeMap<String, BTreeMap<String, String>>,
        priority: BTreeMap<String, BTreeMap<String, usize>>,
        #[serde(rename = "final")]
        finals: Vec<(String, String)>,
    },
    Wilke {
        presentation: PresentationDoc,
    },
}

/// The on-disk automaton, everything by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutomatonDoc {
    #[serde(rename = "X1")]
    pub x1: Vec<String>,
    #[serde(rename = "X0")]
    pub x0: Vec<String>,
    pub alphabet: RankedAlphabet,
    pub delta: BTreeMap<String, Vec<DeltaEntry>>,
    pub omega: OmegaDoc,
}

fn find(names: &[String], n: &str, what: &str) -> Result<usize> {
    names.iter().position(|x| x == n).ok_or_else(|| Error::Input(format!("unknown {what} `{n}`")))
}

impl AutomatonDoc {
    pub fn resolve(&self) -> Result<UnfoldAutomaton> {
        let mut delta_plus = BTreeMap::new();
        let mut delta_zero = BTreeMap::new();
        for (name, entries) in &self.delta {
            let rank = self.alphabet.rank_of(name).ok_or_else(|| Error::Input(format!("delta for unknown symbol `{name}`")))?;
            for e in entries {
                match (rank, e) {
                    (0, DeltaEntry::Leaf(t)) => {
                        delta_zero.entry(name.clone()).or_insert_with(BTreeSet::new).insert(find(&self.x0, t, "X0 value")?);
                    }
                    (n, DeltaEntry::Tuple(t)) if n > 0 => {
                        let t = t.iter().map(|x| find(&self.x1, x, "X1 value")).collect::<Result<Vec<_>>>()?;
                        delta_plus.entry(name.clone()).or_insert_with(BTreeSet::new).insert(t);
                    }
                    _ => return input(format!("`{name}`: leaf symbols take X0 names, others take tuples")),
                }
            }
        }
        let omega = match &self.omega {
            OmegaDoc::Wilke { presentation } => AcceptanceSpec::Wilke { presentation: Box::new(Presentation::from_doc(presentation)?) },
            OmegaDoc::Dpa { states, initial, transition, priority, finals } => {
                let table = |t: &BTreeMap<String, BTreeMap<String, String>>| -> Result<Vec<Vec<usize>>> {
                    states
                        .iter()
                        .map(|q| {
                            let row = t.get(q).ok_or_else(|| Error::Input(format!("DPA: no transitions for `{q}`")))?;
                            self.x1
                                .iter()
                                .map(|x| {
                                    let to = row.get(x).ok_or_else(|| Error::Input(format!("DPA: no transition ({q},{x})")))?;
                                    find(states, to, "DPA state")
                                })
                                .collect()
                        })
                        .collect()
                };
                let prio: Vec<Vec<usize>> = states
                    .iter()
                    .map(|q| {
                        self.x1
                            .iter()
                            .map(|x| priority.get(q).and_then(|r| r.get(x)).copied().ok_or_else(|| Error::Input(format!("DPA: no priority ({q},{x})"))))
                            .collect()
                    })
                    .collect::<Result<_>>()?;
                let mut fin = vec![vec![false; self.x0.len()]; states.len()];
                for (q, t) in finals {
                    fin[find(states, q, "DPA state")?][find(&self.x0, t, "X0 value")?] = true;
                }
                AcceptanceSpec::Dpa {
                    dpa: Dpa {
                        states: states.clone(),
                        initial: find(states, initial, "DPA state")?,
                        transition: table(transition)?,
                        priority: prio,
                        finals: fin,
                    },
                }
            }
        };
        let aut = UnfoldAutomaton { x1: self.x1.clone(), x0: self.x0.clone(), alphabet: self.alphabet.clone(), delta_plus, delta_zero, omega };
        aut.check()?;
        Ok(aut)
    }
}

impl From<&UnfoldAutomaton> for AutomatonDoc {
    fn from(a: &UnfoldAutomaton) -> Self {
        let mut delta = BTreeMap::new();
        for (name, ts) in &a.delta_plus {
            delta.insert(name.clone(), ts.iter().map(|t| DeltaEntry::Tuple(t.iter().map(|&x| a.x1[x].clone()).collect())).collect());
        }
        for (name, ls) in &a.delta_zero {
            delta.insert(name.clone(), ls.iter().map(|&t| DeltaEntry::Leaf(a.x0[t].clone())).collect());
        }
        let omega = match &a.omega {
            AcceptanceSpec::Wilke { presentation } => OmegaDoc::Wilke { presentation: presentation.to_doc() },
            AcceptanceSpec::Dpa { dpa } => {
                let st = &dpa.states;
                OmegaDoc::Dpa {
                    states: st.clone(),
                    initial: st[dpa.initial].clone(),
                    transition: st
                        .iter()
                        .enumerate()
                        .map(|(q, n)| (n.clone(), a.x1.iter().enumerate().map(|(x, xn)| (xn.clone(), st[dpa.transition[q][x]].clone())).collect()))
                        .collect(),
                    priority: st
                        .iter()
                        .enumerate()
                        .map(|(q, n)| (n.clone(), a.x1.iter().enumerate().map(|(x, xn)| (xn.clone(), dpa.priority[q][x])).collect()))
                        .collect(),
                    finals: st
                        .iter()
                        .enumerate()
                        .flat_map(|(q, n)| a.x0.iter().enumerate().filter(move |&(t, _)| dpa.finals[q][t]).map(move |(_, tn)| (n.clone(), tn.clone())))
                        .collect(),
                }
            }
        };
        AutomatonDoc { x1: a.x1.clone(), x0: a.x0.clone(), alphabet: a.alphabet.clone(), delta, omega }
    }
}

/// Hand translations of the shipped presentations into parity automata over the same
/// `X1`/`X0` numbering.
pub fn dpa_for(name: &str) -> Option<Dpa> {
    let names = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect::<Vec<_>>();
    Some(match name {
        // ok keeps q0 at priority 0; dead moves to the sink q1 at priority 1.
        "avoid" => Dpa {
            states: names(&["q0", "q1"]),
            initial: 0,
            transition: vec![vec![0, 1], vec![1, 1]],
            priority: vec![vec![0, 1], vec![1, 1]],
            finals: vec![vec![true, false], vec![false, false]],
        },
        // one state; `some` has priority 1, `none` priority 2.
        "finitely-many" => Dpa { states: names(&["q"]), initial: 0, transition: vec![vec![0, 0]], priority: vec![vec![2, 1]], finals: vec![vec![true, false]] },
        // count of `b` so far, capped at 2.
        "at-most-one" => Dpa {
            states: names(&["c0", "c1", "c2"]),
            initial: 0,
            transition: vec![vec![0, 1, 2], vec![1, 2, 2], vec![2, 2, 2]],
            priority: vec![vec![0, 0, 1], vec![0, 1, 1], vec![1, 1, 1]],
            finals: vec![vec![true, true, false], vec![true, false, false], vec![false, false, false]],
        },
        // whether a `b` was passed; the risky leaf is bad only afterwards.
        "guarded" => Dpa {
            states: names(&["fresh", "seen"]),
            initial: 0,
            transition: vec![vec![0, 1], vec![1, 1]],
            priority: vec![vec![0, 0], vec![0, 0]],
            finals: vec![vec![true, true, false], vec![true, false, false]],
        },
        _ => return None,
    })
}
