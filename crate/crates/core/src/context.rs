//! Symbol declarations and engine configuration.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::expr::{Atom, CoeffFn, DiffExpr, Rational, Symbol};

pub const DEFAULT_ORDER_CAP: u8 = 12;

/// How `D_t` acts on a declared coefficient function.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivativeRule {
    /// `a → a' → a'' → …`
    Primes,
    /// `D_t f` is the given expression.
    Explicit(DiffExpr),
}

/// Declared parameters, coefficient functions and unknown functions, plus
/// the jet order cap. Built-ins (`t`, `x`, `u`, `v`, `ln`) are implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    params: BTreeSet<Symbol>,
    funcs: BTreeMap<Symbol, DerivativeRule>,
    unknowns: BTreeSet<Symbol>,
    order_cap: u8,
}

impl Default for Context {
    fn default() -> Self {
        Context {
            params: BTreeSet::new(),
            funcs: BTreeMap::new(),
            unknowns: BTreeSet::new(),
            order_cap: DEFAULT_ORDER_CAP,
        }
    }
}

const RESERVED: &[&str] = &["t", "x", "u", "v", "ln"];

impl Context {
    pub fn new() -> Self {
        Context::default()
    }

    pub fn with_order_cap(mut self, cap: u8) -> Self {
        self.order_cap = cap;
        self
    }

    pub fn order_cap(&self) -> u8 {
        self.order_cap
    }

    pub fn is_declared(&self, name: &str) -> bool {
        RESERVED.contains(&name)
            || self.params.iter().any(|p| p.as_str() == name)
            || self.funcs.keys().any(|p| p.as_str() == name)
            || self.unknowns.iter().any(|p| p.as_str() == name)
    }

    fn check_fresh(&self, name: &str) -> Result<Symbol> {
        if self.is_declared(name) {
            return Err(Error::DuplicateDeclaration(name.to_string()));
        }
        Ok(Symbol::new(name))
    }

    pub fn declare_param(&mut self, name: &str) -> Result<()> {
        let s = self.check_fresh(name)?;
        self.params.insert(s);
        Ok(())
    }

    pub fn declare_func(&mut self, name: &str, rule: DerivativeRule) -> Result<()> {
        let s = self.check_fresh(name)?;
        self.funcs.insert(s, rule);
        Ok(())
    }

    /// Replaces the rule of an already declared function (used while parsing
    /// self-referential rules such as `deriv = p*f/t`).
    pub(crate) fn set_rule(&mut self, name: &str, rule: DerivativeRule) {
        if let Some(r) = self.funcs.get_mut(&Symbol::new(name)) {
            *r = rule;
        }
    }

    pub fn declare_unknown(&mut self, name: &str) -> Result<()> {
        let s = self.check_fresh(name)?;
        self.unknowns.insert(s);
        Ok(())
    }

    pub fn is_param(&self, name: &str) -> bool {
        self.params.contains(&Symbol::new(name))
    }

    pub fn is_func(&self, name: &str) -> bool {
        self.funcs.contains_key(&Symbol::new(name))
    }

    pub fn is_unknown(&self, name: &str) -> bool {
        self.unknowns.contains(&Symbol::new(name))
    }

    pub fn rule(&self, name: &str) -> Option<&DerivativeRule> {
        self.funcs.get(&Symbol::new(name))
    }

    pub fn params(&self) -> impl Iterator<Item = &Symbol> {
        self.params.iter()
    }

    /// `D_t` of a coefficient function atom.
    pub fn coeff_derivative(&self, c: &CoeffFn) -> Result<DiffExpr> {
        match self.funcs.get(&c.name) {
            Some(DerivativeRule::Explicit(rule)) if c.primes == 0 => Ok(rule.clone()),
            Some(DerivativeRule::Explicit(_)) => {
                Err(Error::Unsupported(format!("`{}` has an explicit derivative rule and cannot carry primes", c.name)))
            }
            // Undeclared functions (e.g. built programmatically) follow the prime chain.
            Some(DerivativeRule::Primes) | None => {
                Ok(DiffExpr::atom(Atom::Coeff(CoeffFn { name: c.name.clone(), primes: c.primes + 1 })))
            }
        }
    }

    /// Copy of the context with parameter `name` fixed to `value` inside every
    /// derivative rule. The parameter stays declared.
    pub fn specialize_param(&self, name: &str, value: &Rational) -> Result<Context> {
        let atom = Atom::param(name);
        let value = DiffExpr::constant(value.clone());
        let mut out = self.clone();
        for rule in out.funcs.values_mut() {
            if let DerivativeRule::Explicit(e) = rule {
                *e = e.substitute_atom(&atom, &value)?;
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duplicates_and_builtins_rejected() {
        let mut ctx = Context::new();
        ctx.declare_param("p").unwrap();
        assert_eq!(ctx.declare_func("p", DerivativeRule::Primes), Err(Error::DuplicateDeclaration("p".into())));
        assert!(ctx.declare_param("u").is_err());
        assert!(ctx.declare_param("ln").is_err());
    }

    #[test]
    fn prime_chain() {
        let mut ctx = Context::new();
        ctx.declare_func("a", DerivativeRule::Primes).unwrap();
        let d = ctx.coeff_derivative(&CoeffFn { name: "a".into(), primes: 1 }).unwrap();
        assert_eq!(d.to_string(), "a''");
    }
}
