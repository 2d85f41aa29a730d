use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::setsys::Sym;
use crate::error::{Error, Result};

/// A finite ranked alphabet with unique symbol names.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankedAlphabet {
    pub symbols: Vec<Sym>,
}

impl RankedAlphabet {
    pub fn new(symbols: impl IntoIterator<Item = Sym>) -> Result<Self> {
        let alpha = RankedAlphabet { symbols: symbols.into_iter().collect() };
        alpha.check()?;
        Ok(alpha)
    }

    /// Convenience for tests and examples: `[("a", 2), ("b", 0)]`.
    pub fn from_pairs(pairs: &[(&str, usize)]) -> Self {
        RankedAlphabet { symbols: pairs.iter().map(|&(n, r)| Sym::new(n, r)).collect() }
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeMap::new();
        for s in &self.symbols {
            if seen.insert(s.name.as_str(), s.rank).is_some() {
                return Err(Error::Input(format!("duplicate symbol name `{}`", s.name)));
            }
        }
        Ok(())
    }

    pub fn get(&self, name: &str) -> Option<&Sym> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn rank_of(&self, name: &str) -> Option<usize> {
        self.get(name).map(|s| s.rank)
    }

    pub fn of_rank(&self, n: usize) -> impl Iterator<Item = &Sym> {
        self.symbols.iter().filter(move |s| s.rank == n)
    }

    pub fn max_rank(&self) -> usize {
        self.symbols.iter().map(|s| s.rank).max().unwrap_or(0)
    }

    pub fn contains(&self, s: &Sym) -> bool {
        self.get(&s.name) == Some(s)
    }
}
