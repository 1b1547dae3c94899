use std::collections::BTreeSet;

use serde::Serialize;

/// A linear modulus `Δ(ε) = factor · ε`, read as a growth bound: when every
/// argument moves by at most `ε` in its metric, the value moves by at most
/// `Δ(ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Modulus {
    pub factor: f64,
}

impl Modulus {
    pub const fn linear(factor: f64) -> Self {
        Self { factor }
    }

    pub fn apply(self, eps: f64) -> f64 {
        self.factor * eps
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SymbolKind {
    Function,
    Relation,
    Constant,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
    pub arity: usize,
    pub modulus: Modulus,
}

impl Symbol {
    fn new(name: &str, kind: SymbolKind, arity: usize, factor: f64) -> Self {
        Self { name: name.to_string(), kind, arity, modulus: Modulus::linear(factor) }
    }
}

/// A metric signature. `oplus` and `meet` stand for the whole families
/// `⊕_{s,t}` and `∧_{s,t}` with `|s| + |t| <= 1`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Language {
    pub name: String,
    pub symbols: Vec<Symbol>,
}

impl Language {
    /// `0`, `⊕_{s,t}`, `||·||` and the distance `d`.
    pub fn banach() -> Self {
        use SymbolKind::*;
        Self {
            name: "banach".into(),
            symbols: vec![
                Symbol::new("zero", Constant, 0, 0.0),
                Symbol::new("oplus", Function, 2, 2.0),
                // The norm is 2-Lipschitz for d = ½||x - y||.
                Symbol::new("norm", Relation, 1, 2.0),
                Symbol::new("d", Relation, 2, 2.0),
            ],
        }
    }

    /// Adds `∧_{s,t}` and `|·|`.
    pub fn b_lattice() -> Self {
        use SymbolKind::*;
        let mut l = Self::banach();
        l.name = "b-lattice".into();
        l.symbols.push(Symbol::new("meet", Function, 2, 2.0));
        l.symbols.push(Symbol::new("abs", Function, 1, 1.0));
        l
    }

    /// Adds the binary predicate `||·,·||₊`.
    pub fn lp_complex() -> Self {
        let mut l = Self::b_lattice();
        l.name = "lp-complex".into();
        l.symbols.push(Symbol::new("normc", SymbolKind::Relation, 2, 4.0));
        l
    }

    pub fn with_constants<I: IntoIterator<Item = String>>(mut self, names: I) -> Self {
        for n in names {
            if !self.contains(&n) {
                self.symbols.push(Symbol {
                    name: n,
                    kind: SymbolKind::Constant,
                    arity: 0,
                    modulus: Modulus::linear(0.0),
                });
            }
        }
        self
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.iter().find(|s| s.name == name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbol(name).is_some()
    }

    pub fn is_sublanguage_of(&self, other: &Language) -> bool {
        let theirs: BTreeSet<&str> = other.symbols.iter().map(|s| s.name.as_str()).collect();
        self.symbols.iter().all(|s| theirs.contains(s.name.as_str()))
    }
}
