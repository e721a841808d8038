use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use super::DiffExpr;

/// Interned-by-value identifier. Cheap to clone and safe to share across threads.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol(Arc<str>);

impl Symbol {
    pub fn new(name: &str) -> Self {
        Symbol(Arc::from(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for Symbol {
    fn from(s: &str) -> Self {
        Symbol::new(s)
    }
}

/// Independent variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Var {
    T,
    X,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::T => "t",
            Var::X => "x",
        }
    }
}

/// Dependent variables: the physical `u` and the adjoint (nonlocal) `v`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Dep {
    U,
    V,
}

impl Dep {
    pub fn name(self) -> &'static str {
        match self {
            Dep::U => "u",
            Dep::V => "v",
        }
    }
}

/// A jet coordinate `dep_{t^t x^x}`. Mixed derivatives have one canonical
/// spelling: all `t`s before all `x`s.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Jet {
    pub dep: Dep,
    pub t: u8,
    pub x: u8,
}

impl Jet {
    pub const fn new(dep: Dep, t: u8, x: u8) -> Self {
        Jet { dep, t, x }
    }

    pub const fn u(t: u8, x: u8) -> Self {
        Jet::new(Dep::U, t, x)
    }

    pub const fn v(t: u8, x: u8) -> Self {
        Jet::new(Dep::V, t, x)
    }

    pub fn order(&self) -> u32 {
        self.t as u32 + self.x as u32
    }

    pub fn bump(&self, dir: Var) -> Jet {
        match dir {
            Var::T => Jet { t: self.t + 1, ..*self },
            Var::X => Jet { x: self.x + 1, ..*self },
        }
    }
}

impl Ord for Jet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then(self.t.cmp(&other.t))
            .then(self.x.cmp(&other.x))
            .then(self.dep.cmp(&other.dep))
    }
}

impl PartialOrd for Jet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dep.name())?;
        if self.order() > 0 {
            f.write_str("_")?;
            for _ in 0..self.t {
                f.write_str("t")?;
            }
            for _ in 0..self.x {
                f.write_str("x")?;
            }
        }
        Ok(())
    }
}

/// Partial-derivative multi-index of an unknown function `φ(x, t, u)`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash)]
pub struct Partials {
    pub x: u8,
    pub t: u8,
    pub u: u8,
}

impl Partials {
    pub fn total(&self) -> u32 {
        self.x as u32 + self.t as u32 + self.u as u32
    }
}

impl Ord for Partials {
    fn cmp(&self, other: &Self) -> Ordering {
        self.total()
            .cmp(&other.total())
            .then(self.x.cmp(&other.x))
            .then(self.t.cmp(&other.t))
            .then(self.u.cmp(&other.u))
    }
}

impl PartialOrd for Partials {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A declared coefficient function of `t`, possibly differentiated
/// `primes` times (only for functions without an explicit derivative rule).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CoeffFn {
    pub name: Symbol,
    pub primes: u8,
}

/// An undetermined function of `(x, t, u)` together with a partial derivative.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct UnknownFn {
    pub name: Symbol,
    pub partials: Partials,
}

/// The variant order fixes the total atom order used for printing.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Atom {
    Indep(Var),
    Param(Symbol),
    Coeff(CoeffFn),
    Unknown(UnknownFn),
    Jet(Jet),
    Log(Box<DiffExpr>),
}

impl Atom {
    pub fn param(name: &str) -> Atom {
        Atom::Param(Symbol::new(name))
    }

    pub fn coeff(name: &str) -> Atom {
        Atom::Coeff(CoeffFn { name: Symbol::new(name), primes: 0 })
    }

    pub fn unknown(name: &str, partials: Partials) -> Atom {
        Atom::Unknown(UnknownFn { name: Symbol::new(name), partials })
    }

    pub fn as_jet(&self) -> Option<Jet> {
        match self {
            Atom::Jet(j) => Some(*j),
            _ => None,
        }
    }
}

impl From<Jet> for Atom {
    fn from(j: Jet) -> Self {
        Atom::Jet(j)
    }
}

impl From<Var> for Atom {
    fn from(v: Var) -> Self {
        Atom::Indep(v)
    }
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Indep(v) => f.write_str(v.name()),
            Atom::Param(p) => write!(f, "{p}"),
            Atom::Coeff(c) => {
                write!(f, "{}", c.name)?;
                for _ in 0..c.primes {
                    f.write_str("'")?;
                }
                Ok(())
            }
            Atom::Unknown(u) => {
                write!(f, "{}", u.name)?;
                let p = u.partials;
                if p.total() > 0 {
                    f.write_str("_")?;
                    for (n, c) in [(p.x, "x"), (p.t, "t"), (p.u, "u")] {
                        for _ in 0..n {
                            f.write_str(c)?;
                        }
                    }
                }
                Ok(())
            }
            Atom::Jet(j) => write!(f, "{j}"),
            Atom::Log(arg) => write!(f, "ln({arg})"),
        }
    }
}
