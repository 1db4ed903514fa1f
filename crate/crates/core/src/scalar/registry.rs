use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{parse_rational, ParseScalarError, SymScalar, Symbol};

/// Declaration of a named constant as it appears in problem files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymbolDecl {
    pub name: String,
    #[serde(flatten)]
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SymbolKind {
    /// Free symbol, assumed algebraically independent of the others.
    Transcendental { approx: f64 },
    /// Alias for `√d`, `d` a positive rational literal.
    Radical { of: String },
}

/// Names usable in scalar literals. `pi` is always present.
#[derive(Debug, Clone)]
pub struct SymbolRegistry {
    values: BTreeMap<String, SymScalar>,
    transcendental: Vec<Symbol>,
}

impl Default for SymbolRegistry {
    fn default() -> Self {
        let mut values = BTreeMap::new();
        values.insert("pi".to_string(), SymScalar::pi());
        SymbolRegistry { values, transcendental: vec![Symbol::pi()] }
    }
}

fn valid_identifier(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
        && !matches!(name, "sqrt" | "log")
}

impl SymbolRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_decls(decls: &[SymbolDecl]) -> Result<Self, ParseScalarError> {
        let mut reg = SymbolRegistry::new();
        for d in decls {
            reg.declare(d)?;
        }
        Ok(reg)
    }

    pub fn declare(&mut self, decl: &SymbolDecl) -> Result<(), ParseScalarError> {
        let name = decl.name.as_str();
        if !valid_identifier(name) {
            return Err(ParseScalarError::new(name, 0, "invalid symbol name"));
        }
        if name == "pi" {
            return match decl.kind {
                SymbolKind::Transcendental { approx } if (approx - std::f64::consts::PI).abs() < 1e-12 => Ok(()),
                _ => Err(ParseScalarError::new(name, 0, "pi is built in and cannot be redefined")),
            };
        }
        if self.values.contains_key(name) {
            return Err(ParseScalarError::new(name, 0, "duplicate symbol name"));
        }
        let value = match &decl.kind {
            SymbolKind::Transcendental { approx } => {
                if !approx.is_finite() {
                    return Err(ParseScalarError::new(name, 0, "approximation must be finite"));
                }
                let s = Symbol::new(name, *approx);
                self.transcendental.push(s.clone());
                SymScalar::symbol(s)
            }
            SymbolKind::Radical { of } => {
                let q = parse_rational(of).map_err(|e| ParseScalarError::new(of, e.column, "bad radicand"))?;
                SymScalar::sqrt_rational(&q)
                    .filter(|_| q > num_rational::BigRational::from_integer(0.into()))
                    .ok_or_else(|| ParseScalarError::new(of, 0, "radicand must be a positive rational"))?
            }
        };
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&SymScalar> {
        self.values.get(name)
    }

    pub fn transcendentals(&self) -> &[Symbol] {
        &self.transcendental
    }
}
