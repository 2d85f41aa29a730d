//! Rankwise finite algebras over systems, the reachability algebra, and recognition.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::model::{Nested, Ranked, SetSystem, Sym, Target};
use crate::monad::{atomic, flatten};

/// An algebra for the system monad, materialised rank by rank.
///
/// `eval` must be a pure function of its argument: implementations are shared across
/// worker threads and must be stateless or synchronise internally.
pub trait Algebra {
    type Elem: Ranked + Clone + Ord + fmt::Debug + fmt::Display;

    /// Elements of rank `n`.
    fn carrier(&self, n: usize) -> Vec<Self::Elem>;

    /// Evaluation of a system labelled by elements.
    fn eval(&self, s: &SetSystem<Self::Elem>) -> Result<Self::Elem>;

    /// The letter map: the element a symbol stands for.
    fn letter(&self, a: &Sym) -> Result<Self::Elem>;

    /// Largest rank for which carriers are materialised.
    fn max_rank(&self) -> usize {
        6
    }
}

/// The value of a symbol-labelled system: evaluate after relabelling by the letter map.
pub fn rho<A: Algebra>(alg: &A, s: &SetSystem<Sym>) -> Result<A::Elem> {
    let mut labels = Vec::with_capacity(s.len());
    for v in &s.vertices {
        labels.push(alg.letter(&v.label)?);
    }
    alg.eval(&s.map_labels(|i, _| labels[i].clone()))
}

/// Acceptance by value: `rho(s) ∈ accepting`, for closed systems.
pub fn recognises<A: Algebra>(alg: &A, accepting: &[A::Elem], s: &SetSystem<Sym>) -> Result<bool> {
    if !s.is_closed() {
        return input("recognition is defined on closed systems");
    }
    if let Some(p) = accepting.iter().find(|p| p.rank() != 0) {
        return input(format!("accepting element {p} is not of rank 0"));
    }
    Ok(accepting.contains(&rho(alg, s)?))
}

/// Element of the reachability algebra: `None` is ⊥, otherwise the set of
/// reachable variable indices.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Reach {
    pub rank: usize,
    pub value: Option<BTreeSet<usize>>,
}

impl Reach {
    pub fn bottom(rank: usize) -> Self {
        Reach { rank, value: None }
    }

    pub fn set(rank: usize, vars: impl IntoIterator<Item = usize>) -> Self {
        Reach { rank, value: Some(vars.into_iter().collect()) }
    }

    pub fn is_bottom(&self) -> bool {
        self.value.is_none()
    }
}

impl Ranked for Reach {
    fn rank(&self) -> usize {
        self.rank
    }
}

impl fmt::Display for Reach {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.value {
            None => write!(f, "⊥/{}", self.rank),
            Some(x) => {
                let items: Vec<String> = x.iter().map(usize::to_string).collect();
                write!(f, "{{{}}}/{}", items.join(","), self.rank)
            }
        }
    }
}

/// Which variables are reachable, or ⊥ as soon as a symbol of `letters` is.
#[derive(Clone, Debug, Default)]
pub struct ReachabilityAlgebra {
    pub letters: BTreeSet<String>,
}

impl ReachabilityAlgebra {
    pub fn new<S: Into<String>>(letters: impl IntoIterator<Item = S>) -> Self {
        ReachabilityAlgebra { letters: letters.into_iter().map(Into::into).collect() }
    }
}

impl Algebra for ReachabilityAlgebra {
    type Elem = Reach;

    fn carrier(&self, n: usize) -> Vec<Reach> {
        let mut out = vec![Reach::bottom(n)];
        for mask in 0u64..(1 << n) {
            out.push(Reach::set(n, (1..=n).filter(|i| mask >> (i - 1) & 1 == 1)));
        }
        out
    }

    fn eval(&self, s: &SetSystem<Reach>) -> Result<Reach> {
        if !s.is_system() {
            return Err(Error::NotSystem("reachability evaluation".into()));
        }
        let mut seen = vec![false; s.len()];
        let start = s.init_vertex();
        seen[start] = true;
        let mut stack = vec![start];
        let mut vars = BTreeSet::new();
        while let Some(v) = stack.pop() {
            let Some(dirs) = &s.vertices[v].label.value else {
                return Ok(Reach::bottom(s.rank));
            };
            for &d in dirs {
                match s.step(v, d) {
                    Target::Var(x) => {
                        vars.insert(x);
                    }
                    Target::Vertex(w) => {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
            }
        }
        Ok(Reach::set(s.rank, vars))
    }

    fn letter(&self, a: &Sym) -> Result<Reach> {
        if a.is_hole() {
            return input("the hole symbol has no value");
        }
        Ok(if self.letters.contains(&a.name) { Reach::bottom(a.rank) } else { Reach::set(a.rank, 1..=a.rank) })
    }
}

/// One failure of an algebra law, with the offending instance rendered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LawViolation {
    pub law: String,
    pub instance: String,
    pub left: String,
    pub right: String,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct LawReport {
    pub checked: usize,
    pub violations: Vec<LawViolation>,
}

impl LawReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Check `eval ∘ atomic = id` on the carriers up to `max_rank`, and on every sample of
/// systems of systems both `eval(lift(eval)(N)) = eval(flatten(N))` and the context
/// form `eval(C[S]) = eval(C[atomic(eval(S))])` at every outer vertex.
pub fn check_algebra_laws<A: Algebra>(alg: &A, max_rank: usize, sample: &[Nested<A::Elem>]) -> Result<LawReport> {
    let mut report = LawReport::default();
    for n in 0..=max_rank.min(alg.max_rank()) {
        for a in alg.carrier(n) {
            report.checked += 1;
            let back = alg.eval(&atomic(a.clone()))?;
            if back != a {
                report.violations.push(LawViolation { law: "unit".into(), instance: format!("atomic({a})"), left: back.to_string(), right: a.to_string() });
            }
        }
    }
    for nested in sample {
        let mut inner_values = Vec::with_capacity(nested.len());
        for v in &nested.vertices {
            inner_values.push(alg.eval(&v.label)?);
        }
        let flat = alg.eval(&flatten(nested)?)?;
        let outer = alg.eval(&nested.map_labels(|i, _| inner_values[i].clone()))?;
        report.checked += 1;
        let show = || nested.map_labels(|_, l| l.summary()).summary();
        if outer != flat {
            report.violations.push(LawViolation { law: "multiplication".into(), instance: show(), left: outer.to_string(), right: flat.to_string() });
        }
        for (s, value) in inner_values.iter().enumerate() {
            let mut collapsed = nested.clone();
            collapsed.vertices[s].label = atomic(value.clone());
            let plugged = alg.eval(&flatten(&collapsed)?)?;
            report.checked += 1;
            if plugged != flat {
                report.violations.push(LawViolation {
                    law: format!("context at `{}`", nested.vertices[s].id),
                    instance: show(),
                    left: flat.to_string(),
                    right: plugged.to_string(),
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::expr::from_expression;

    #[test]
    fn variables_in_order_of_use() {
        let alg = ReachabilityAlgebra::new(["b"]);
        let s = from_expression("a(x3, x1, x1)", None).unwrap();
        assert_eq!(rho(&alg, &s).unwrap(), Reach::set(3, [1, 3]));
        let k = from_expression("a(x1, x2, x3, x4)", None).unwrap();
        assert_eq!(rho(&alg, &k).unwrap(), Reach::set(4, 1..=4));
    }

    #[test]
    fn bottom_only_when_reachable() {
        let alg = ReachabilityAlgebra::new(["b"]);
        let mut s = from_expression("a1(c)", None).unwrap();
        assert!(recognises(&alg, &[Reach::set(0, [])], &s).unwrap());
        s.add_vertex("junk", Sym::new("b", 0), false, false);
        assert!(recognises(&alg, &[Reach::set(0, [])], &s).unwrap());
        let t = from_expression("a1(b)", None).unwrap();
        assert!(recognises(&alg, &[Reach::bottom(0)], &t).unwrap());
    }

    #[test]
    fn carriers_have_powerset_size() {
        let alg = ReachabilityAlgebra::default();
        assert_eq!(alg.carrier(0).len(), 2);
        assert_eq!(alg.carrier(3).len(), 9);
    }

    #[test]
    fn open_input_is_rejected() {
        let alg = ReachabilityAlgebra::default();
        let s = from_expression("a(x1)", None).unwrap();
        assert!(recognises(&alg, &[], &s).is_err());
    }
}
