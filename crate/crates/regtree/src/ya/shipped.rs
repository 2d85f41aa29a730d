//! Hand-built presentations used by tests, examples and the CLI.

use std::collections::BTreeMap;

use super::presentation::{Letter, LetterDoc, LetterValue, Presentation, PresentationDoc};

fn names(xs: &[&str]) -> Vec<String> {
    xs.iter().map(|s| s.to_string()).collect()
}

fn table(rows: &[&str], cols: &[&str], out: &[&str], f: impl Fn(usize, usize) -> usize) -> BTreeMap<String, BTreeMap<String, String>> {
    rows.iter().enumerate().map(|(i, r)| (r.to_string(), cols.iter().enumerate().map(|(j, c)| (c.to_string(), out[f(i, j)].to_string())).collect())).collect()
}

fn unary(name: &str, tuples: &[&[&str]]) -> LetterDoc {
    LetterDoc { name: name.into(), rank: tuples[0].len(), decomps: Some(tuples.iter().map(|t| names(t)).collect()), value0: None }
}

fn leaf(name: &str, v: &str) -> LetterDoc {
    LetterDoc { name: name.into(), rank: 0, decomps: None, value0: Some(v.into()) }
}

/// Letters for "no `b` anywhere" style properties: `a_n` passes `pass`, `b_n` passes
/// `fail`, and leaves `c0`/`b0`.
fn ab_letters(pass: &str, fail: &str, good_leaf: &str, bad_leaf: &str) -> Vec<LetterDoc> {
    let mut out = Vec::new();
    for (name, y) in [("a", pass), ("b", fail)] {
        for n in 1..=3 {
            let t: Vec<&str> = vec![y; n];
            out.push(unary(&format!("{name}{n}"), &[&t]));
        }
    }
    out.push(leaf("c0", good_leaf));
    out.push(leaf("b0", bad_leaf));
    out
}

/// No `b` vertex is reachable: `Y1 = {ok, dead}`, `Y0 = {acc, rej}`.
pub fn avoid() -> Presentation {
    let y1 = ["ok", "dead"];
    let y0 = ["acc", "rej"];
    let doc = PresentationDoc {
        y1: names(&y1),
        y0: names(&y0),
        product: table(&y1, &y1, &y1, |a, b| if a == 0 { b } else { 1 }),
        act: table(&y1, &y0, &y0, |a, t| if a == 0 { t } else { 1 }),
        omega: [("ok".into(), "acc".into()), ("dead".into(), "rej".into())].into(),
        meet1: table(&y1, &y1, &y1, |a, b| a.max(b)),
        meet0: table(&y0, &y0, &y0, |s, t| s.max(t)),
        leq1: Some(vec![("dead".into(), "ok".into())]),
        leq0: Some(vec![("rej".into(), "acc".into())]),
        accepting: names(&["acc"]),
        letters: ab_letters("ok", "dead", "acc", "rej"),
    };
    Presentation::from_doc(&doc).expect("well-formed")
}

/// Finitely many `b` on every branch: `Y1 = {none, some}` with `some` absorbing,
/// `omega(some) = rej`. Leaves are always accepted.
pub fn finitely_many() -> Presentation {
    let y1 = ["none", "some"];
    let y0 = ["acc", "rej"];
    let doc = PresentationDoc {
        y1: names(&y1),
        y0: names(&y0),
        product: table(&y1, &y1, &y1, |a, b| a.max(b)),
        act: table(&y1, &y0, &y0, |_, t| t),
        omega: [("none".into(), "acc".into()), ("some".into(), "rej".into())].into(),
        meet1: table(&y1, &y1, &y1, |a, b| a.max(b)),
        meet0: table(&y0, &y0, &y0, |s, t| s.max(t)),
        leq1: Some(vec![("some".into(), "none".into())]),
        leq0: Some(vec![("rej".into(), "acc".into())]),
        accepting: names(&["acc"]),
        letters: ab_letters("none", "some", "acc", "acc"),
    };
    Presentation::from_doc(&doc).expect("well-formed")
}

/// At most one `b` on every branch, counting a `b` leaf: counts capped at two.
pub fn at_most_one() -> Presentation {
    let y1 = ["zero", "one", "many"];
    let y0 = ["none", "once", "often"];
    let doc = PresentationDoc {
        y1: names(&y1),
        y0: names(&y0),
        product: table(&y1, &y1, &y1, |a, b| (a + b).min(2)),
        act: table(&y1, &y0, &y0, |a, t| (a + t).min(2)),
        omega: [("zero".into(), "none".into()), ("many".into(), "often".into())].into(),
        meet1: table(&y1, &y1, &y1, |a, b| a.max(b)),
        meet0: table(&y0, &y0, &y0, |s, t| s.max(t)),
        leq1: Some(vec![("many".into(), "one".into()), ("one".into(), "zero".into())]),
        leq0: Some(vec![("often".into(), "once".into()), ("once".into(), "none".into())]),
        accepting: names(&["none", "once"]),
        letters: ab_letters("zero", "one", "none", "once"),
    };
    Presentation::from_doc(&doc).expect("well-formed")
}

/// No `e` leaf below a `b` vertex: passing a `b` turns the risky leaf value into a
/// rejection, while every infinite branch is fine.
pub fn guarded() -> Presentation {
    let y1 = ["plain", "seen"];
    let y0 = ["acc", "risky", "rej"];
    let mut letters = ab_letters("plain", "seen", "acc", "acc");
    letters.push(leaf("e0", "risky"));
    let doc = PresentationDoc {
        y1: names(&y1),
        y0: names(&y0),
        product: table(&y1, &y1, &y1, |a, b| a.max(b)),
        act: table(&y1, &y0, &y0, |a, t| if a == 1 && t == 1 { 2 } else { t }),
        omega: [("plain".into(), "acc".into()), ("seen".into(), "acc".into())].into(),
        meet1: table(&y1, &y1, &y1, |a, b| a.max(b)),
        meet0: table(&y0, &y0, &y0, |s, t| s.max(t)),
        leq1: Some(vec![("seen".into(), "plain".into())]),
        leq0: Some(vec![("rej".into(), "risky".into()), ("risky".into(), "acc".into())]),
        accepting: names(&["acc", "risky"]),
        letters,
    };
    Presentation::from_doc(&doc).expect("well-formed")
}

/// The shipped presentations by name.
pub fn by_name(name: &str) -> Option<Presentation> {
    match name {
        "avoid" => Some(avoid()),
        "finitely-many" => Some(finitely_many()),
        "at-most-one" => Some(at_most_one()),
        "guarded" => Some(guarded()),
        _ => None,
    }
}

pub const NAMES: [&str; 4] = ["avoid", "finitely-many", "at-most-one", "guarded"];

/// AVOID over valuation symbols `{}_n` and `{b}_n` up to `max_rank`: no reachable
/// state satisfies `b`.
pub fn avoid_ts(max_rank: usize) -> Presentation {
    use crate::model::ts::ts_symbol;
    let mut p = avoid();
    p.letters.clear();
    for (props, y, t) in [(vec![], 0usize, 0usize), (vec!["b".to_string()], 1, 1)] {
        let nu = props.into_iter().collect();
        for n in 0..=max_rank {
            let name = ts_symbol(&nu, n).name;
            let value = if n == 0 { LetterValue::Leaf(t) } else { LetterValue::Decomps(vec![vec![y; n]]) };
            p.letters.push(Letter { name, rank: n, value });
        }
    }
    p
}
