//! Expression notation for set-systems: `a2(x1, a2(b, x2))`, with `+` (or `⊞`)
//! for nondeterministic sums such as `a(b + c)`.

use super::alphabet::RankedAlphabet;
use super::setsys::{SetSystem, Sym};
use crate::error::{input, Result};

#[derive(Clone, Debug, PartialEq)]
enum Term {
    Var(usize),
    App { name: String, args: Vec<Vec<Term>>, pos: usize },
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn eat(&mut self, s: &str) -> bool {
        self.skip_ws();
        if self.src[self.pos..].starts_with(s.as_bytes()) {
            self.pos += s.len();
            true
        } else {
            false
        }
    }

    fn sum(&mut self) -> Result<Vec<Term>> {
        let mut terms = vec![self.term()?];
        while self.eat("+") || self.eat("⊞") {
            terms.push(self.term()?);
        }
        Ok(terms)
    }

    fn ident(&mut self) -> Result<(String, usize)> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() {
            let c = self.src[self.pos];
            if c.is_ascii_alphanumeric() || c == b'_' || c == b'{' || c == b'}' || (c == b',' && self.in_braces(start)) {
                self.pos += 1;
            } else {
                break;
            }
        }
        if self.pos == start {
            return input(format!("expected a symbol or variable at position {start}"));
        }
        Ok((String::from_utf8_lossy(&self.src[start..self.pos]).into_owned(), start))
    }

    // Valuation symbols such as `{p,q}_2` contain commas inside braces.
    fn in_braces(&self, start: usize) -> bool {
        let seg = &self.src[start..self.pos];
        seg.iter().filter(|&&c| c == b'{').count() > seg.iter().filter(|&&c| c == b'}').count()
    }

    fn term(&mut self) -> Result<Term> {
        let (name, pos) = self.ident()?;
        if let Some(n) = var_index(&name) {
            return Ok(Term::Var(n));
        }
        let mut args = Vec::new();
        if self.eat("(") && !self.eat(")") {
            loop {
                args.push(self.sum()?);
                if self.eat(")") {
                    break;
                }
                if !self.eat(",") {
                    self.skip_ws();
                    return input(format!("expected `,` or `)` at position {}", self.pos));
                }
            }
        }
        Ok(Term::App { name, args, pos })
    }
}

fn var_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('x')?;
    if digits.is_empty() || !digits.bytes().all(|c| c.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok().filter(|&n| n >= 1)
}

fn max_var(terms: &[Term]) -> usize {
    terms
        .iter()
        .map(|t| match t {
            Term::Var(n) => *n,
            Term::App { args, .. } => args.iter().map(|a| max_var(a)).max().unwrap_or(0),
        })
        .max()
        .unwrap_or(0)
}

fn build(t: &Term, alphabet: Option<&RankedAlphabet>, out: &mut SetSystem<Sym>) -> Result<usize> {
    let Term::App { name, args, pos } = t else {
        return input("a variable cannot stand at the top of an expression");
    };
    let rank = match alphabet {
        Some(a) => match a.rank_of(name) {
            Some(r) => r,
            None => return input(format!("unknown symbol `{name}` at position {pos}")),
        },
        None => args.len(),
    };
    if rank != args.len() {
        return input(format!("arity mismatch at position {pos}: `{name}` has rank {rank}, applied to {} arguments", args.len()));
    }
    let v = out.add_vertex(format!("v{}", out.len()), Sym::new(name.clone(), rank), false, false);
    for (d, arg) in args.iter().enumerate() {
        for sub in arg {
            match sub {
                Term::Var(x) => out.add_var_edge(v, d + 1, *x),
                app => {
                    let w = build(app, alphabet, out)?;
                    out.add_edge(v, d + 1, w);
                }
            }
        }
    }
    Ok(v)
}

/// Parse an expression into a set-system whose rank is the largest variable index used
/// (or `rank`, when given and large enough).
pub fn parse(text: &str, alphabet: Option<&RankedAlphabet>, rank: Option<usize>) -> Result<SetSystem<Sym>> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let top = p.sum()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return input(format!("trailing input at position {}", p.pos));
    }
    let used = max_var(&top);
    let rank = match rank {
        Some(r) if r < used => return input(format!("expression uses x{used} but rank {r} was requested")),
        Some(r) => r,
        None => used,
    };
    let mut out = SetSystem::new(rank);
    for t in &top {
        let v = build(t, alphabet, &mut out)?;
        out.vertices[v].initial = true;
    }
    Ok(out)
}

/// The tree-shaped system (or set-system, if sums occur) denoted by `text`.
pub fn from_expression(text: &str, alphabet: Option<&RankedAlphabet>) -> Result<SetSystem<Sym>> {
    parse(text, alphabet, None)
}
