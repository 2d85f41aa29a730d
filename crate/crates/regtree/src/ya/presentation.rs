use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::algebras::{LawReport, LawViolation};
use crate::error::{input, Error, Result};
use crate::model::{RankedAlphabet, Sym};

use super::rep::RankedElementRep;

/// A letter as written in a presentation file: either a leaf value or a set of
/// decompositions.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LetterDoc {
    pub name: String,
    pub rank: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub decomps: Option<Vec<Vec<String>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub value0: Option<String>,
}

type Table = BTreeMap<String, BTreeMap<String, String>>;

/// The on-disk form, everything by name.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PresentationDoc {
    #[serde(rename = "Y1")]
    pub y1: Vec<String>,
    #[serde(rename = "Y0")]
    pub y0: Vec<String>,
    pub product: Table,
    pub act: Table,
    pub omega: BTreeMap<String, String>,
    pub meet1: Table,
    pub meet0: Table,
    /// Optional declared orders as pairs `a ≤ b`; reflexive-transitive closure is taken.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leq1: Option<Vec<(String, String)>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub leq0: Option<Vec<(String, String)>>,
    #[serde(rename = "P")]
    pub accepting: Vec<String>,
    pub letters: Vec<LetterDoc>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum LetterValue {
    Leaf(usize),
    Decomps(Vec<Vec<usize>>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Letter {
    pub name: String,
    pub rank: usize,
    pub value: LetterValue,
}

/// A finite presentation with every table resolved to indices. Elements of `Y1` and
/// `Y0` are positions in `y1` and `y0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Presentation {
    pub y1: Vec<String>,
    pub y0: Vec<String>,
    /// `product[a][b]` is `a·b`, i.e. `a(b(x))`.
    pub product: Vec<Vec<usize>>,
    pub act: Vec<Vec<usize>>,
    pub omega: Vec<Option<usize>>,
    pub meet1: Vec<Vec<usize>>,
    pub meet0: Vec<Vec<usize>>,
    pub declared_leq1: Option<BTreeSet<(usize, usize)>>,
    pub declared_leq0: Option<BTreeSet<(usize, usize)>>,
    pub accepting: BTreeSet<usize>,
    pub letters: Vec<Letter>,
}

fn index_of(names: &[String], name: &str, what: &str) -> Result<usize> {
    names.iter().position(|n| n == name).ok_or_else(|| Error::Input(format!("unknown {what} element `{name}`")))
}

fn table(t: &Table, rows: &[String], cols: &[String], out: &[String], what: &str) -> Result<Vec<Vec<usize>>> {
    let mut res = Vec::with_capacity(rows.len());
    for r in rows {
        let row = t.get(r).ok_or_else(|| Error::Input(format!("{what}: missing row `{r}`")))?;
        if let Some(extra) = row.keys().find(|c| !cols.contains(c)) {
            return input(format!("{what}[{r}]: unknown column `{extra}`"));
        }
        let mut line = Vec::with_capacity(cols.len());
        for c in cols {
            let v = row.get(c).ok_or_else(|| Error::Input(format!("{what}: missing entry [{r}][{c}]")))?;
            line.push(index_of(out, v, what)?);
        }
        res.push(line);
    }
    if let Some(extra) = t.keys().find(|r| !rows.contains(r)) {
        return input(format!("{what}: unknown row `{extra}`"));
    }
    Ok(res)
}

fn unique(names: &[String], what: &str) -> Result<()> {
    let set: BTreeSet<&String> = names.iter().collect();
    if set.len() != names.len() {
        return input(format!("{what} has duplicate names"));
    }
    if names.is_empty() {
        return input(format!("{what} is empty"));
    }
    Ok(())
}

fn closure(pairs: &[(String, String)], names: &[String], what: &str) -> Result<BTreeSet<(usize, usize)>> {
    let n = names.len();
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
    }
    for (a, b) in pairs {
        rel[index_of(names, a, what)?][index_of(names, b, what)?] = true;
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if rel[i][k] && rel[k][j] {
                    rel[i][j] = true;
                }
            }
        }
    }
    Ok((0..n).flat_map(|i| (0..n).map(move |j| (i, j))).filter(|&(i, j)| rel[i][j]).collect())
}

impl Presentation {
    pub fn from_doc(doc: &PresentationDoc) -> Result<Self> {
        unique(&doc.y1, "Y1")?;
        unique(&doc.y0, "Y0")?;
        let product = table(&doc.product, &doc.y1, &doc.y1, &doc.y1, "product")?;
        let act = table(&doc.act, &doc.y1, &doc.y0, &doc.y0, "act")?;
        let meet1 = table(&doc.meet1, &doc.y1, &doc.y1, &doc.y1, "meet1")?;
        let meet0 = table(&doc.meet0, &doc.y0, &doc.y0, &doc.y0, "meet0")?;
        let mut omega = vec![None; doc.y1.len()];
        for (e, t) in &doc.omega {
            omega[index_of(&doc.y1, e, "omega")?] = Some(index_of(&doc.y0, t, "omega")?);
        }
        let declared_leq1 = doc.leq1.as_ref().map(|p| closure(p, &doc.y1, "leq1")).transpose()?;
        let declared_leq0 = doc.leq0.as_ref().map(|p| closure(p, &doc.y0, "leq0")).transpose()?;
        let accepting = doc.accepting.iter().map(|t| index_of(&doc.y0, t, "P")).collect::<Result<_>>()?;
        let mut letters = Vec::new();
        let mut seen = BTreeSet::new();
        for l in &doc.letters {
            if !seen.insert(l.name.as_str()) {
                return input(format!("letter `{}` declared twice", l.name));
            }
            let value = match (l.rank, &l.decomps, &l.value0) {
                (0, None, Some(t)) => LetterValue::Leaf(index_of(&doc.y0, t, "value0")?),
                (n, Some(ds), None) if n > 0 => {
                    if ds.is_empty() {
                        return input(format!("letter `{}` has no decompositions", l.name));
                    }
                    let mut tuples = Vec::new();
                    for d in ds {
                        if d.len() != n {
                            return input(format!("letter `{}`: tuple of length {} for rank {n}", l.name, d.len()));
                        }
                        tuples.push(d.iter().map(|y| index_of(&doc.y1, y, "decomps")).collect::<Result<Vec<_>>>()?);
                    }
                    LetterValue::Decomps(tuples)
                }
                _ => return input(format!("letter `{}`: rank 0 needs value0, positive rank needs decomps", l.name)),
            };
            letters.push(Letter { name: l.name.clone(), rank: l.rank, value });
        }
        Ok(Presentation { y1: doc.y1.clone(), y0: doc.y0.clone(), product, act, omega, meet1, meet0, declared_leq1, declared_leq0, accepting, letters })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: PresentationDoc = serde_json::from_str(text).map_err(|e| Error::Input(format!("presentation: {e}")))?;
        Self::from_doc(&doc)
    }

    pub fn to_doc(&self) -> PresentationDoc {
        let t = |m: &Vec<Vec<usize>>, rows: &[String], cols: &[String], out: &[String]| -> Table {
            rows.iter().enumerate().map(|(i, r)| (r.clone(), cols.iter().enumerate().map(|(j, c)| (c.clone(), out[m[i][j]].clone())).collect())).collect()
        };
        let pairs = |rel: &Option<BTreeSet<(usize, usize)>>, names: &[String]| {
            rel.as_ref().map(|r| r.iter().filter(|(a, b)| a != b).map(|&(a, b)| (names[a].clone(), names[b].clone())).collect())
        };
        PresentationDoc {
            y1: self.y1.clone(),
            y0: self.y0.clone(),
            product: t(&self.product, &self.y1, &self.y1, &self.y1),
            act: t(&self.act, &self.y1, &self.y0, &self.y0),
            omega: self.omega.iter().enumerate().filter_map(|(e, t)| t.map(|t| (self.y1[e].clone(), self.y0[t].clone()))).collect(),
            meet1: t(&self.meet1, &self.y1, &self.y1, &self.y1),
            meet0: t(&self.meet0, &self.y0, &self.y0, &self.y0),
            leq1: pairs(&self.declared_leq1, &self.y1),
            leq0: pairs(&self.declared_leq0, &self.y0),
            accepting: self.accepting.iter().map(|&t| self.y0[t].clone()).collect(),
            letters: self
                .letters
                .iter()
                .map(|l| match &l.value {
                    LetterValue::Leaf(t) => LetterDoc { name: l.name.clone(), rank: 0, decomps: None, value0: Some(self.y0[*t].clone()) },
                    LetterValue::Decomps(ds) => LetterDoc {
                        name: l.name.clone(),
                        rank: l.rank,
                        decomps: Some(ds.iter().map(|d| d.iter().map(|&y| self.y1[y].clone()).collect()).collect()),
                        value0: None,
                    },
                })
                .collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("presentation serializes")
    }

    pub fn one(&self, name: &str) -> Result<usize> {
        index_of(&self.y1, name, "Y1")
    }

    pub fn zero(&self, name: &str) -> Result<usize> {
        index_of(&self.y0, name, "Y0")
    }

    pub fn leq1(&self, a: usize, b: usize) -> bool {
        self.meet1[a][b] == a
    }

    pub fn leq0(&self, s: usize, t: usize) -> bool {
        self.meet0[s][t] == s
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.product[a][b]
    }

    /// Product with an optional (empty) left factor.
    pub fn then(&self, prefix: Option<usize>, b: usize) -> usize {
        prefix.map_or(b, |a| self.product[a][b])
    }

    pub fn act_opt(&self, prefix: Option<usize>, t: usize) -> usize {
        prefix.map_or(t, |a| self.act[a][t])
    }

    pub fn is_idempotent(&self, e: usize) -> bool {
        self.product[e][e] == e
    }

    /// Least `k ≥ 1` with `e0^k` idempotent, and that power.
    pub fn idempotent_power(&self, e0: usize) -> (usize, usize) {
        let mut power = e0;
        let mut k = 1;
        while !self.is_idempotent(power) {
            power = self.product[power][e0];
            k += 1;
            assert!(k <= self.y1.len() + 1, "a finite semigroup always has an idempotent power");
        }
        (k, power)
    }

    pub fn letter(&self, name: &str) -> Option<&Letter> {
        self.letters.iter().find(|l| l.name == name)
    }

    /// The element a letter stands for.
    pub fn letter_rep(&self, name: &str) -> Result<RankedElementRep> {
        let l = self.letter(name).ok_or_else(|| Error::Input(format!("no letter `{name}` in the presentation")))?;
        Ok(match &l.value {
            LetterValue::Leaf(t) => RankedElementRep::leaf(*t),
            LetterValue::Decomps(ds) => RankedElementRep::meet(l.rank, ds.iter().cloned()),
        })
    }

    pub fn alphabet(&self) -> RankedAlphabet {
        RankedAlphabet { symbols: self.letters.iter().map(|l| Sym::new(l.name.clone(), l.rank)).collect() }
    }

    /// `f`, the meet of the accepting set; `None` when `P` is empty.
    pub fn f(&self) -> Option<usize> {
        self.accepting.iter().copied().reduce(|s, t| self.meet0[s][t])
    }

    pub fn show_tuple(&self, t: &[usize]) -> String {
        let items: Vec<&str> = t.iter().map(|&y| self.y1[y].as_str()).collect();
        format!("({})", items.join(","))
    }

    pub fn show_rep(&self, r: &RankedElementRep) -> String {
        let mut parts: Vec<String> = r.decomps.iter().map(|t| self.show_tuple(t)).collect();
        if let Some(c) = r.zero {
            parts.push(self.y0[c].clone());
        }
        if parts.is_empty() {
            return format!("⊤/{}", r.rank);
        }
        format!("{}/{}", parts.join(" ⊓ "), r.rank)
    }
}

struct Report {
    inner: LawReport,
}

impl Report {
    fn check(&mut self, law: &str, ok: bool, instance: impl FnOnce() -> (String, String, String)) {
        self.inner.checked += 1;
        if !ok {
            let (instance, left, right) = instance();
            self.inner.violations.push(LawViolation { law: law.into(), instance, left, right });
        }
    }
}

fn check_semilattice(r: &mut Report, which: &str, m: &[Vec<usize>], names: &[String]) {
    let n = names.len();
    for a in 0..n {
        r.check(&format!("{which} idempotent"), m[a][a] == a, || (names[a].clone(), names[m[a][a]].clone(), names[a].clone()));
        for b in 0..n {
            r.check(&format!("{which} commutative"), m[a][b] == m[b][a], || {
                (format!("{} {}", names[a], names[b]), names[m[a][b]].clone(), names[m[b][a]].clone())
            });
            for c in 0..n {
                let (l, rr) = (m[m[a][b]][c], m[a][m[b][c]]);
                r.check(&format!("{which} associative"), l == rr, || (format!("{} {} {}", names[a], names[b], names[c]), names[l].clone(), names[rr].clone()));
            }
        }
    }
}

fn check_declared(r: &mut Report, which: &str, m: &[Vec<usize>], declared: &Option<BTreeSet<(usize, usize)>>, names: &[String]) {
    let Some(decl) = declared else { return };
    for a in 0..names.len() {
        for b in 0..names.len() {
            let derived = m[a][b] == a;
            let stated = decl.contains(&(a, b));
            r.check(&format!("{which} matches its meet"), derived == stated, || {
                (format!("{} ≤ {}", names[a], names[b]), format!("derived {derived}"), format!("declared {stated}"))
            });
        }
    }
}

/// Check every law of a presentation exhaustively over its tables.
pub fn validate_presentation(p: &Presentation) -> LawReport {
    let mut r = Report { inner: LawReport::default() };
    let (n1, n0) = (p.y1.len(), p.y0.len());
    let (y1, y0) = (&p.y1, &p.y0);
    check_semilattice(&mut r, "meet1", &p.meet1, y1);
    check_semilattice(&mut r, "meet0", &p.meet0, y0);
    check_declared(&mut r, "leq1", &p.meet1, &p.declared_leq1, y1);
    check_declared(&mut r, "leq0", &p.meet0, &p.declared_leq0, y0);
    for a in 0..n1 {
        for b in 0..n1 {
            for c in 0..n1 {
                let (l, rr) = (p.mul(p.mul(a, b), c), p.mul(a, p.mul(b, c)));
                r.check("product associative", l == rr, || (format!("{} {} {}", y1[a], y1[b], y1[c]), y1[l].clone(), y1[rr].clone()));
            }
            for t in 0..n0 {
                let (l, rr) = (p.act[p.mul(a, b)][t], p.act[a][p.act[b][t]]);
                r.check("act compatible with product", l == rr, || (format!("{} {} {}", y1[a], y1[b], y0[t]), y0[l].clone(), y0[rr].clone()));
            }
        }
    }
    // Monotonicity, one argument at a time.
    for a in 0..n1 {
        for a2 in 0..n1 {
            if a == a2 || !p.leq1(a, a2) {
                continue;
            }
            for b in 0..n1 {
                let (l, rr) = (p.mul(a, b), p.mul(a2, b));
                r.check("product monotone (left)", p.leq1(l, rr), || (format!("{} ≤ {}, right {}", y1[a], y1[a2], y1[b]), y1[l].clone(), y1[rr].clone()));
                let (l, rr) = (p.mul(b, a), p.mul(b, a2));
                r.check("product monotone (right)", p.leq1(l, rr), || (format!("left {}, {} ≤ {}", y1[b], y1[a], y1[a2]), y1[l].clone(), y1[rr].clone()));
            }
            for t in 0..n0 {
                let (l, rr) = (p.act[a][t], p.act[a2][t]);
                r.check("act monotone (left)", p.leq0(l, rr), || (format!("{} ≤ {}, on {}", y1[a], y1[a2], y0[t]), y0[l].clone(), y0[rr].clone()));
            }
            if let (true, true, Some(l), Some(rr)) = (p.is_idempotent(a), p.is_idempotent(a2), p.omega[a], p.omega[a2]) {
                r.check("omega monotone", p.leq0(l, rr), || (format!("{} ≤ {}", y1[a], y1[a2]), y0[l].clone(), y0[rr].clone()));
            }
        }
    }
    for t in 0..n0 {
        for t2 in 0..n0 {
            if t == t2 || !p.leq0(t, t2) {
                continue;
            }
            for a in 0..n1 {
                let (l, rr) = (p.act[a][t], p.act[a][t2]);
                r.check("act monotone (right)", p.leq0(l, rr), || (format!("{} on {} ≤ {}", y1[a], y0[t], y0[t2]), y0[l].clone(), y0[rr].clone()));
            }
            if p.accepting.contains(&t) {
                r.check("P upward closed", p.accepting.contains(&t2), || (format!("{} ≤ {}", y0[t], y0[t2]), y0[t].clone(), y0[t2].clone()));
            }
        }
    }
    for &s in &p.accepting {
        for &t in &p.accepting {
            let m = p.meet0[s][t];
            r.check("P closed under meet", p.accepting.contains(&m), || (format!("{} ⊓ {}", y0[s], y0[t]), y0[m].clone(), "in P".into()));
        }
    }
    for e in 0..n1 {
        if !p.is_idempotent(e) {
            continue;
        }
        match p.omega[e] {
            None => r.check("omega defined on idempotents", false, || (y1[e].clone(), "undefined".into(), "a value".into())),
            Some(w) => {
                let fixed = p.act[e][w];
                r.check("omega fixed by its idempotent", fixed == w, || (y1[e].clone(), y0[fixed].clone(), y0[w].clone()));
            }
        }
    }
    // Lasso values must not depend on where the loop is cut.
    for s in std::iter::once(None).chain((0..n1).map(Some)) {
        for e0 in 0..n1 {
            if let Err(Error::Presentation(msg)) = super::branch::eval_lasso_values(p, s, e0) {
                r.check("lasso alignment", false, || (format!("prefix {:?} loop {}", s.map(|a| &y1[a]), y1[e0]), msg, String::new()));
            } else {
                r.check("lasso alignment", true, || unreachable!());
            }
        }
    }
    for l in &p.letters {
        if let LetterValue::Decomps(ds) = &l.value {
            let mut uniq = BTreeSet::new();
            for d in ds {
                r.check("letter tuples distinct", uniq.insert(d), || (l.name.clone(), p.show_tuple(d), "duplicate".into()));
            }
        }
    }
    let plant = super::branch::plant_invariance(p);
    for (instance, ok) in plant {
        r.check("plant invariance", ok, || (instance, "initial".into(), "planted".into()));
    }
    r.inner
}
