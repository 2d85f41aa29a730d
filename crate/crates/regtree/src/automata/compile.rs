use std::collections::{BTreeMap, BTreeSet};

use itertools::Itertools;

use crate::error::{input, Error, Result};
use crate::model::ts::{parse_ts_symbol, Valuation};
use crate::model::Sym;
use crate::ya::{validate_presentation, LetterValue, Presentation};

use super::automaton::{AcceptanceSpec, UnfoldAutomaton};

/// The unfold-automaton of a validated presentation: leaf symbols go to their value,
/// and a symbol of positive rank admits every tuple below one of its decompositions.
pub fn compile_algebra(p: &Presentation) -> Result<UnfoldAutomaton> {
    let report = validate_presentation(p);
    if let Some(v) = report.violations.first() {
        return Err(Error::Presentation(format!("{} fails at {}", v.law, v.instance)));
    }
    let mut delta_plus = BTreeMap::new();
    let mut delta_zero = BTreeMap::new();
    for l in &p.letters {
        match &l.value {
            LetterValue::Leaf(t) => {
                delta_zero.insert(l.name.clone(), BTreeSet::from([*t]));
            }
            LetterValue::Decomps(ds) => {
                let below: BTreeSet<Vec<usize>> =
                    ds.iter().flat_map(|c| c.iter().map(|&ci| (0..p.y1.len()).filter(move |&b| p.leq1(b, ci))).multi_cartesian_product()).collect();
                delta_plus.insert(l.name.clone(), below);
            }
        }
    }
    let aut = UnfoldAutomaton {
        x1: p.y1.clone(),
        x0: p.y0.clone(),
        alphabet: p.alphabet(),
        delta_plus,
        delta_zero,
        omega: AcceptanceSpec::Wilke { presentation: Box::new(p.clone()) },
    };
    aut.check()?;
    Ok(aut)
}

fn valuation_symbols(aut: &UnfoldAutomaton) -> Result<BTreeMap<(Valuation, usize), &Sym>> {
    let mut out = BTreeMap::new();
    for s in &aut.alphabet.symbols {
        let nu = parse_ts_symbol(s).ok_or_else(|| Error::Input(format!("`{}` is not a valuation symbol", s.name)))?;
        out.insert((nu, s.rank), s);
    }
    Ok(out)
}

/// All surjections `[n] → [m]`, as 1-based value lists.
pub fn surjections(n: usize, m: usize) -> Vec<Vec<usize>> {
    if m == 0 || m > n {
        return Vec::new();
    }
    (0..n).map(|_| 1..=m).multi_cartesian_product().filter(|f| (1..=m).all(|j| f.contains(&j))).collect()
}

/// Close the transitions under duplicating and permuting children: `ν_n` gets
/// `b∘σ` for every tuple `b` of `ν_m` and surjection `σ: [n] → [m]`.
pub fn bisim_closure(aut: &UnfoldAutomaton) -> Result<UnfoldAutomaton> {
    let syms = valuation_symbols(aut)?;
    let mut out = aut.clone();
    for ((nu, n), s) in &syms {
        if *n == 0 {
            continue;
        }
        let mut closed = BTreeSet::new();
        for m in 1..=*n {
            let Some(sm) = syms.get(&(nu.clone(), m)) else { continue };
            let maps = surjections(*n, m);
            for b in aut.tuples(sm) {
                for sigma in &maps {
                    closed.insert(sigma.iter().map(|&j| b[j - 1]).collect::<Vec<_>>());
                }
            }
        }
        out.delta_plus.insert(s.name.clone(), closed);
    }
    out.check()?;
    Ok(out)
}

fn disjunct(aut: &UnfoldAutomaton, b: &[usize]) -> String {
    let xs: Vec<String> = (1..=b.len()).map(|i| format!("x{i}")).collect();
    let atoms: Vec<String> = b.iter().zip(&xs).map(|(&t, x)| format!("{}({x})", aut.x1[t])).collect();
    let any: Vec<String> = b.iter().map(|&t| format!("{}(z)", aut.x1[t])).collect();
    let all = if any.len() == 1 { any[0].clone() } else { format!("({})", any.join(" ∨ ")) };
    format!("∃{}. {} ∧ ∀z. {all}", xs.join(","), atoms.join(" ∧ "))
}

/// Per valuation, the disjunctive normal form of its transitions: one line
/// `δ(ν) = …` per valuation, tuples taken up to reordering, leaves as `t ∧ ∀z. false`.
pub fn emit_disjunctive_formula(aut: &UnfoldAutomaton) -> Result<String> {
    let syms = valuation_symbols(aut)?;
    if syms.is_empty() {
        return input("the automaton has no symbols");
    }
    let valuations: BTreeSet<&Valuation> = syms.keys().map(|(nu, _)| nu).collect();
    let mut out = String::new();
    for nu in valuations {
        let mut parts = Vec::new();
        for ((_, m), s) in syms.range((nu.clone(), 0)..=(nu.clone(), usize::MAX)) {
            if *m == 0 {
                for &t in aut.leaves(s) {
                    parts.push(format!("{} ∧ ∀z. false", aut.x0[t]));
                }
                continue;
            }
            let mut seen = BTreeSet::new();
            for b in aut.tuples(s) {
                let mut key = b.clone();
                key.sort();
                if seen.insert(key.clone()) {
                    parts.push(disjunct(aut, &key));
                }
            }
        }
        let props: Vec<&str> = nu.iter().map(String::as_str).collect();
        let body = match parts.len() {
            0 => "false".to_string(),
            1 => parts.remove(0),
            _ => parts.iter().map(|p| format!("({p})")).join(" ∨ "),
        };
        out.push_str(&format!("δ({{{}}}) = {body}\n", props.join(",")));
    }
    Ok(out)
}
