//! Total derivatives, the Euler–Lagrange operator, dependent-variable
//! substitution and reduction modulo evolution equations.

use std::collections::BTreeMap;
use std::fmt;

use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{integer, Atom, Dep, DiffExpr, Jet, UnknownFn, Var};

fn atom_total_derivative(atom: &Atom, dir: Var, ctx: &Context) -> Result<DiffExpr> {
    Ok(match atom {
        Atom::Indep(v) => {
            if *v == dir {
                DiffExpr::one()
            } else {
                DiffExpr::zero()
            }
        }
        Atom::Param(_) => DiffExpr::zero(),
        Atom::Coeff(c) => match dir {
            Var::T => ctx.coeff_derivative(c)?,
            Var::X => DiffExpr::zero(),
        },
        Atom::Unknown(f) => {
            let mut direct = f.partials;
            match dir {
                Var::T => direct.t += 1,
                Var::X => direct.x += 1,
            }
            let mut through_u = f.partials;
            through_u.u += 1;
            let direct = DiffExpr::atom(Atom::Unknown(UnknownFn { name: f.name.clone(), partials: direct }));
            let through_u = DiffExpr::atom(Atom::Unknown(UnknownFn { name: f.name.clone(), partials: through_u }));
            &direct + &(&through_u * &DiffExpr::jet(Jet::u(0, 0).bump(dir)))
        }
        Atom::Jet(j) => {
            let bumped = j.bump(dir);
            if bumped.order() > ctx.order_cap() as u32 {
                return Err(Error::OrderCap { order: bumped.order(), cap: ctx.order_cap() });
            }
            DiffExpr::jet(bumped)
        }
        Atom::Log(arg) => &total_derivative(arg, dir, ctx)? * &arg.inverse()?,
    })
}

/// Applies a derivation given by its action on atoms, using the Leibniz rule.
fn derivation(e: &DiffExpr, mut on_atom: impl FnMut(&Atom) -> Result<DiffExpr>) -> Result<DiffExpr> {
    let mut out = DiffExpr::zero();
    let mut memo: BTreeMap<&Atom, DiffExpr> = BTreeMap::new();
    for (m, q) in e.terms() {
        for (a, k) in m.factors() {
            let d = match memo.get(a) {
                Some(d) => d.clone(),
                None => {
                    let d = on_atom(a)?;
                    memo.insert(a, d.clone());
                    d
                }
            };
            if d.is_zero() {
                continue;
            }
            let rest = m.with_exponent_delta(a, -1);
            out += d.mul_monomial(&rest, &(q * integer(*k as i64)));
        }
    }
    Ok(out)
}

/// `D_t` or `D_x` of a differential function.
pub fn total_derivative(e: &DiffExpr, dir: Var, ctx: &Context) -> Result<DiffExpr> {
    derivation(e, |a| atom_total_derivative(a, dir, ctx))
}

pub fn total_derivative_n(e: &DiffExpr, dir: Var, n: u32, ctx: &Context) -> Result<DiffExpr> {
    let mut out = e.clone();
    for _ in 0..n {
        if out.is_zero() {
            break;
        }
        out = total_derivative(&out, dir, ctx)?;
    }
    Ok(out)
}

/// `D_t^t D_x^x e`.
pub fn total_derivative_multi(e: &DiffExpr, t: u32, x: u32, ctx: &Context) -> Result<DiffExpr> {
    let dx = total_derivative_n(e, Var::X, x, ctx)?;
    total_derivative_n(&dx, Var::T, t, ctx)
}

/// The coordinate a partial derivative is taken with respect to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Coordinate {
    Indep(Var),
    Jet(Jet),
}

fn atom_partial(atom: &Atom, wrt: Coordinate, ctx: &Context) -> Result<DiffExpr> {
    Ok(match (atom, wrt) {
        (Atom::Indep(v), Coordinate::Indep(w)) if *v == w => DiffExpr::one(),
        (Atom::Jet(j), Coordinate::Jet(k)) if *j == k => DiffExpr::one(),
        (Atom::Coeff(c), Coordinate::Indep(Var::T)) => ctx.coeff_derivative(c)?,
        (Atom::Unknown(f), wrt) => {
            let mut p = f.partials;
            match wrt {
                Coordinate::Indep(Var::X) => p.x += 1,
                Coordinate::Indep(Var::T) => p.t += 1,
                Coordinate::Jet(j) if j == Jet::u(0, 0) => p.u += 1,
                Coordinate::Jet(_) => return Ok(DiffExpr::zero()),
            }
            DiffExpr::atom(Atom::Unknown(UnknownFn { name: f.name.clone(), partials: p }))
        }
        (Atom::Log(arg), wrt) => {
            let d = partial(arg, wrt, ctx)?;
            if d.is_zero() {
                d
            } else {
                &d * &arg.inverse()?
            }
        }
        _ => DiffExpr::zero(),
    })
}

/// Partial derivative with respect to a jet-space coordinate. Unknown
/// functions `φ(x,t,u)` depend on `x`, `t` and `u`; coefficient functions on `t`.
pub fn partial(e: &DiffExpr, wrt: Coordinate, ctx: &Context) -> Result<DiffExpr> {
    derivation(e, |a| atom_partial(a, wrt, ctx))
}

pub fn partial_jet(e: &DiffExpr, jet: Jet, ctx: &Context) -> Result<DiffExpr> {
    partial(e, Coordinate::Jet(jet), ctx)
}

/// The Euler–Lagrange operator `δ/δdep`.
///
/// The formally infinite sum stops at the jets actually present in `e`; every
/// mixed jet contributes once with its full multi-derivative.
pub fn euler(e: &DiffExpr, dep: Dep, ctx: &Context) -> Result<DiffExpr> {
    let mut jets = e.jets_of(dep);
    if !jets.contains(&Jet::new(dep, 0, 0)) {
        jets.insert(0, Jet::new(dep, 0, 0));
    }
    let mut out = DiffExpr::zero();
    for j in jets {
        let p = partial_jet(e, j, ctx)?;
        if p.is_zero() {
            continue;
        }
        let d = total_derivative_multi(&p, j.t as u32, j.x as u32, ctx)?;
        if j.order() % 2 == 0 {
            out += d;
        } else {
            out -= &d;
        }
    }
    Ok(out)
}

/// Replaces every jet `dep_J` by `D_J(phi)`.
pub fn substitute_dependent(e: &DiffExpr, dep: Dep, phi: &DiffExpr, ctx: &Context) -> Result<DiffExpr> {
    if phi.contains_dep(dep) {
        return Err(Error::InvalidSubstitution(format!(
            "replacement for {} must not contain {} itself",
            dep.name(),
            dep.name()
        )));
    }
    let mut images: BTreeMap<Jet, DiffExpr> = BTreeMap::new();
    for j in e.jets_of(dep) {
        images.insert(j, total_derivative_multi(phi, j.t as u32, j.x as u32, ctx)?);
    }
    e.try_map_atoms(&mut |a| Ok(a.as_jet().and_then(|j| images.get(&j).cloned())))
}

/// An evolution equation `F = u_t + H(t, x, u, u_x, …) = 0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Equation {
    lhs: DiffExpr,
    solved_rhs: DiffExpr,
    order: u32,
}

impl Equation {
    /// Validates the evolutionary shape: `u_t` with coefficient exactly one,
    /// no other `t`-derivatives of `u`, and no `v`.
    pub fn new(lhs: DiffExpr) -> Result<Self> {
        if lhs.contains_dep(Dep::V) {
            return Err(Error::InvalidEquation("equation must not contain the adjoint variable v".into()));
        }
        let ut = DiffExpr::jet(Jet::u(1, 0));
        let rest = &lhs - &ut;
        let mut bad = None;
        rest.for_each_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                let mixed = j.x > 0 || j.t > 1;
                if j.t > 0 && (bad.is_none() || mixed) {
                    bad = Some(*j);
                }
            }
        });
        if let Some(j) = bad {
            return Err(if j.x > 0 || j.t > 1 {
                Error::Unsupported(format!("mixed or higher time derivative `{j}` in an evolution equation"))
            } else {
                Error::InvalidEquation(format!("`u_t` must appear exactly once with coefficient 1 in `{lhs} = 0`"))
            });
        }
        let order = lhs.max_jet_order();
        Ok(Equation { solved_rhs: -rest, lhs, order })
    }

    /// The differential function `F`.
    pub fn lhs(&self) -> &DiffExpr {
        &self.lhs
    }

    /// `−H`, the right-hand side of `u_t = −H`.
    pub fn solved_rhs(&self) -> &DiffExpr {
        &self.solved_rhs
    }

    pub fn order(&self) -> u32 {
        self.order
    }
}

impl fmt::Display for Equation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} = 0", self.lhs)
    }
}

/// `X = τ ∂_t + ξ ∂_x + η ∂_u` with coefficients depending on `(x, t, u)` only.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PointSymmetry {
    pub tau: DiffExpr,
    pub xi: DiffExpr,
    pub eta: DiffExpr,
}

impl PointSymmetry {
    pub fn new(tau: DiffExpr, xi: DiffExpr, eta: DiffExpr) -> Result<Self> {
        for (name, e) in [("tau", &tau), ("xi", &xi), ("eta", &eta)] {
            let mut offending = None;
            e.for_each_atom(&mut |a| match a {
                Atom::Jet(j) if j.dep == Dep::V || j.order() > 0 => offending = Some(a.to_string()),
                Atom::Unknown(_) => offending = Some(a.to_string()),
                _ => {}
            });
            if let Some(a) = offending {
                return Err(Error::InvalidSymmetry(format!("{name} depends on `{a}`; only x, t, u are allowed")));
            }
        }
        Ok(PointSymmetry { tau, xi, eta })
    }

    pub fn translation_x() -> Self {
        PointSymmetry { tau: DiffExpr::zero(), xi: DiffExpr::one(), eta: DiffExpr::zero() }
    }

    /// The characteristic `W = η − τ u_t − ξ u_x`.
    pub fn characteristic(&self) -> DiffExpr {
        let ut = DiffExpr::jet(Jet::u(1, 0));
        let ux = DiffExpr::jet(Jet::u(0, 1));
        &(&self.eta - &(&self.tau * &ut)) - &(&self.xi * &ux)
    }

    pub fn is_zero(&self) -> bool {
        self.tau.is_zero() && self.xi.is_zero() && self.eta.is_zero()
    }
}

impl fmt::Display for PointSymmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{ tau = {}; xi = {}; eta = {} }}", self.tau, self.xi, self.eta)
    }
}

/// Rewrites `t`-derivatives of governed dependent variables using their
/// solved forms, i.e. evaluates a differential function on solutions.
///
/// `dep_{t^m x^k}` becomes `D_x^k D_t^{m-1}(rhs)`, reduced recursively; the
/// images are cached per jet.
pub struct Reduction<'c> {
    ctx: &'c Context,
    rules: Vec<(Dep, DiffExpr)>,
    cache: BTreeMap<Jet, DiffExpr>,
}

impl<'c> Reduction<'c> {
    pub fn new(eq: &Equation, ctx: &'c Context) -> Self {
        Reduction { ctx, rules: vec![(Dep::U, eq.solved_rhs().clone())], cache: BTreeMap::new() }
    }

    /// Adds `dep_t = rhs`. The right-hand side must be free of governed
    /// `t`-derivatives so that rewriting terminates.
    pub fn with_rule(mut self, dep: Dep, rhs: DiffExpr) -> Result<Self> {
        self.rules.retain(|(d, _)| *d != dep);
        self.rules.push((dep, rhs));
        for (d, r) in &self.rules {
            if let Some(j) = self.first_governed(r) {
                return Err(Error::InvalidEquation(format!(
                    "solved form of {}_t contains the time derivative `{j}`",
                    d.name()
                )));
            }
        }
        self.cache.clear();
        Ok(self)
    }

    fn governs(&self, j: &Jet) -> bool {
        j.t > 0 && self.rules.iter().any(|(d, _)| *d == j.dep)
    }

    fn first_governed(&self, e: &DiffExpr) -> Option<Jet> {
        let mut found = None;
        e.for_each_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                if found.is_none() && self.governs(j) {
                    found = Some(*j);
                }
            }
        });
        found
    }

    pub fn reduce(&mut self, e: &DiffExpr) -> Result<DiffExpr> {
        let mut current = e.clone();
        while self.first_governed(&current).is_some() {
            current = current.try_map_atoms(&mut |a| match a {
                Atom::Jet(j) if self.governs(j) => self.image(*j).map(Some),
                _ => Ok(None),
            })?;
        }
        Ok(current)
    }

    fn image(&mut self, j: Jet) -> Result<DiffExpr> {
        if let Some(e) = self.cache.get(&j) {
            return Ok(e.clone());
        }
        let value = if j.x > 0 {
            let lower = self.image(Jet { x: j.x - 1, ..j })?;
            total_derivative(&lower, Var::X, self.ctx)?
        } else if j.t == 1 {
            let rhs = self.rules.iter().find(|(d, _)| *d == j.dep).map(|(_, r)| r.clone()).expect("governed");
            rhs
        } else {
            let lower = self.image(Jet { t: j.t - 1, ..j })?;
            let dt = total_derivative(&lower, Var::T, self.ctx)?;
            self.reduce(&dt)?
        };
        self.cache.insert(j, value.clone());
        Ok(value)
    }
}

/// Reduces `e` on solutions of `eq` (and of `v_t = adjoint_rhs` when given).
pub fn reduce_mod(e: &DiffExpr, eq: &Equation, adjoint_rhs: Option<&DiffExpr>, ctx: &Context) -> Result<DiffExpr> {
    let mut r = Reduction::new(eq, ctx);
    if let Some(k) = adjoint_rhs {
        r = r.with_rule(Dep::V, k.clone())?;
    }
    r.reduce(e)
}

/// `pr X (F)` evaluated on solutions, via the characteristic form
/// `Σ_J D_J(W) ∂F/∂u_J + τ D_t F + ξ D_x F`. Zero iff `X` is a symmetry.
pub fn prolonged_action(x: &PointSymmetry, eq: &Equation, ctx: &Context) -> Result<DiffExpr> {
    let f = eq.lhs();
    let w = x.characteristic();
    let mut out = DiffExpr::zero();
    for j in f.jets_of(Dep::U) {
        let df = partial_jet(f, j, ctx)?;
        if df.is_zero() {
            continue;
        }
        out += &total_derivative_multi(&w, j.t as u32, j.x as u32, ctx)? * &df;
    }
    out += &x.tau * &total_derivative(f, Var::T, ctx)?;
    out += &x.xi * &total_derivative(f, Var::X, ctx)?;
    reduce_mod(&out, eq, None, ctx)
}
