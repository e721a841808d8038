//! Formal Lagrangians, adjoint equations and nonlinear self-adjointness.

use std::fmt;

use crate::calculus::{euler, partial, substitute_dependent, Coordinate, Equation};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{equal, Atom, Dep, DiffExpr, Jet, Partials, Var};

/// A candidate `v = φ(x, t, u)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Substitution {
    phi: DiffExpr,
}

impl Substitution {
    pub fn new(phi: DiffExpr) -> Result<Self> {
        if phi.is_zero() {
            return Err(Error::InvalidSubstitution("phi must not vanish identically".into()));
        }
        let mut offending = None;
        phi.for_each_atom(&mut |a| match a {
            Atom::Jet(j) if j.dep == Dep::V || j.order() > 0 => offending = Some(a.to_string()),
            Atom::Unknown(_) => offending = Some(a.to_string()),
            _ => {}
        });
        if let Some(a) = offending {
            return Err(Error::InvalidSubstitution(format!("phi may depend on x, t, u only, found `{a}`")));
        }
        Ok(Substitution { phi })
    }

    pub fn phi(&self) -> &DiffExpr {
        &self.phi
    }
}

impl fmt::Display for Substitution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.phi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Classification {
    Strict,
    Quasi,
    Weak,
    Nonlinear,
    None,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Strict => "strict",
            Classification::Quasi => "quasi",
            Classification::Weak => "weak",
            Classification::Nonlinear => "nonlinear",
            Classification::None => "none",
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Which first partials of `φ` are nonzero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Dependence {
    pub u: bool,
    pub x: bool,
    pub t: bool,
}

impl fmt::Display for Dependence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<&str> = [(self.u, "phi_u"), (self.x, "phi_x"), (self.t, "phi_t")]
            .into_iter()
            .filter_map(|(b, n)| b.then_some(n))
            .collect();
        if names.is_empty() {
            f.write_str("none")
        } else {
            f.write_str(&names.join(", "))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NsaReport {
    /// The multiplier forced by the `u_t` coefficient, `−∂φ/∂u`.
    pub lambda: DiffExpr,
    /// `F*|_{v=φ} − λF`.
    pub residual: DiffExpr,
    pub holds: bool,
    pub classification: Classification,
    pub dependence: Dependence,
}

/// `L = v·F`.
pub fn formal_lagrangian(eq: &Equation) -> DiffExpr {
    &DiffExpr::jet(Jet::v(0, 0)) * eq.lhs()
}

/// `F* = δ(vF)/δu`.
pub fn adjoint_equation(eq: &Equation, ctx: &Context) -> Result<DiffExpr> {
    euler(&formal_lagrangian(eq), Dep::U, ctx)
}

/// Solved form `v_t = K` of the adjoint equation.
pub fn adjoint_solved_rhs(eq: &Equation, ctx: &Context) -> Result<DiffExpr> {
    let adj = adjoint_equation(eq, ctx)?;
    let k = &adj + &DiffExpr::jet(Jet::v(1, 0));
    if k.any_atom(|a| matches!(a, Atom::Jet(j) if j.dep == Dep::V && j.t > 0)) {
        return Err(Error::Unsupported(format!("adjoint equation `{adj} = 0` is not evolutionary in v")));
    }
    Ok(k)
}

pub fn dependence(phi: &DiffExpr, ctx: &Context) -> Result<Dependence> {
    Ok(Dependence {
        u: !partial(phi, Coordinate::Jet(Jet::u(0, 0)), ctx)?.is_zero(),
        x: !partial(phi, Coordinate::Indep(Var::X), ctx)?.is_zero(),
        t: !partial(phi, Coordinate::Indep(Var::T), ctx)?.is_zero(),
    })
}

/// Label of a substitution for which the self-adjointness identity holds.
///
/// Weak self-adjointness is reported when `φ_u ≠ 0` and at least one of
/// `φ_x`, `φ_t` is nonzero; [`Dependence`] records which.
pub fn classify_substitution(sub: &Substitution, ctx: &Context) -> Result<Classification> {
    let dep = dependence(sub.phi(), ctx)?;
    Ok(if equal(sub.phi(), &DiffExpr::jet(Jet::u(0, 0))) {
        Classification::Strict
    } else if dep.u && !dep.x && !dep.t {
        Classification::Quasi
    } else if dep.u {
        Classification::Weak
    } else {
        Classification::Nonlinear
    })
}

/// Checks `F*|_{v=φ} = λF` identically in the jet variables with the forced
/// multiplier `λ = −φ_u`.
pub fn nsa_check(eq: &Equation, sub: &Substitution, ctx: &Context) -> Result<NsaReport> {
    let adj = adjoint_equation(eq, ctx)?;
    let substituted = substitute_dependent(&adj, Dep::V, sub.phi(), ctx)?;
    let lambda = -partial(sub.phi(), Coordinate::Jet(Jet::u(0, 0)), ctx)?;
    let residual = &substituted - &(&lambda * eq.lhs());
    let holds = residual.is_zero();
    let classification = if holds { classify_substitution(sub, ctx)? } else { Classification::None };
    Ok(NsaReport { lambda, residual, holds, classification, dependence: dependence(sub.phi(), ctx)? })
}

/// Coefficient equations for an undetermined `φ(x, t, u)`.
///
/// Expands `F*|_{v=φ} + φ_u F` and collects it by monomials in `u_t` and the
/// jets of `u` of order at least one; every coefficient must vanish. Entries
/// that are rational multiples of an earlier one are dropped.
pub fn determining_system(eq: &Equation, unknown: &str, ctx: &Context) -> Result<Vec<DiffExpr>> {
    let phi = DiffExpr::atom(Atom::unknown(unknown, Partials::default()));
    let adj = adjoint_equation(eq, ctx)?;
    let phi_u = partial(&phi, Coordinate::Jet(Jet::u(0, 0)), ctx)?;
    let residual = &substitute_dependent(&adj, Dep::V, &phi, ctx)? + &(&phi_u * eq.lhs());
    let groups = residual.collect(|a| matches!(a, Atom::Jet(j) if j.dep == Dep::U && j.order() >= 1))?;
    let mut out: Vec<DiffExpr> = Vec::new();
    for (_, coefficient) in groups {
        if out.iter().all(|seen| seen.ratio_to(&coefficient).is_none()) {
            out.push(coefficient);
        }
    }
    Ok(out)
}

/// Replaces the unknown `name` and its partials `name_J` by the corresponding
/// partial derivatives of a concrete `φ(x, t, u)`.
pub fn instantiate_unknown(e: &DiffExpr, name: &str, phi: &DiffExpr, ctx: &Context) -> Result<DiffExpr> {
    e.try_map_atoms(&mut |a| match a {
        Atom::Unknown(f) if f.name.as_str() == name => {
            let mut d = phi.clone();
            let steps = [
                (f.partials.x, Coordinate::Indep(Var::X)),
                (f.partials.t, Coordinate::Indep(Var::T)),
                (f.partials.u, Coordinate::Jet(Jet::u(0, 0))),
            ];
            for (n, wrt) in steps {
                for _ in 0..n {
                    d = partial(&d, wrt, ctx)?;
                }
            }
            Ok(Some(d))
        }
        _ => Ok(None),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::context::DerivativeRule;
    use crate::expr::rational;
    use crate::parser::parse_expr;

    fn ctx() -> Context {
        let mut c = Context::new();
        for p in ["c1", "c2", "c3", "c4", "c5"] {
            c.declare_param(p).unwrap();
        }
        for f in ["a", "b", "c", "d"] {
            c.declare_func(f, DerivativeRule::Primes).unwrap();
        }
        c.declare_unknown("phi").unwrap();
        c
    }

    fn e(s: &str) -> DiffExpr {
        parse_expr(s, &ctx()).unwrap()
    }

    fn eq(s: &str) -> Equation {
        Equation::new(e(s)).unwrap()
    }

    fn sub(s: &str) -> Substitution {
        Substitution::new(e(s)).unwrap()
    }

    #[test]
    fn lagrangians() {
        assert_eq!(formal_lagrangian(&eq("u_t")), e("v*u_t"));
        assert_eq!(formal_lagrangian(&eq("u_t + u*u_xxx")), e("v*u_t + v*u*u_xxx"));
    }

    #[test]
    fn heat_adjoint() {
        assert_eq!(adjoint_equation(&eq("u_t - u_xx"), &ctx()).unwrap(), e("-v_t - v_xx"));
    }

    #[test]
    fn substitution_validation() {
        assert!(Substitution::new(DiffExpr::zero()).is_err());
        assert!(Substitution::new(e("u_x")).is_err());
        assert!(Substitution::new(e("v")).is_err());
        assert!(Substitution::new(e("phi")).is_err());
    }

    #[test]
    fn classification_labels() {
        let c = ctx();
        assert_eq!(classify_substitution(&sub("u"), &c).unwrap(), Classification::Strict);
        assert_eq!(classify_substitution(&sub("c1/u"), &c).unwrap(), Classification::Quasi);
        assert_eq!(classify_substitution(&sub("c1*x^2 + c2*x + c3"), &c).unwrap(), Classification::Nonlinear);
        assert_eq!(classify_substitution(&sub("x/u"), &c).unwrap(), Classification::Weak);
        assert_eq!(classify_substitution(&sub("a*u"), &c).unwrap(), Classification::Weak);
    }

    #[test]
    fn third_order_quasi() {
        let r = nsa_check(&eq("u_t + a*u*u_xxx + c*u^2*u_x"), &sub("c1/u + c2"), &ctx()).unwrap();
        assert!(r.holds, "residual {}", r.residual);
        assert_eq!(r.lambda, e("c1/u^2"));
        assert_eq!(r.classification, Classification::Quasi);
    }

    #[test]
    fn fifth_order_strict() {
        let r = nsa_check(&eq("u_t + d*u_xxxxx + a*u*u_xxx + 2*a*u_x*u_xx + c*u^2*u_x"), &sub("u"), &ctx()).unwrap();
        assert!(r.holds);
        assert_eq!(r.lambda, e("-1"));
        assert_eq!(r.classification, Classification::Strict);
    }

    #[test]
    fn fifth_order_refuted() {
        // F*|_{v=u} + F expanded by hand: the (b - 3a) groups vanish, leaving 3a u_x u_xx.
        let f = eq("u_t + d*u_xxxxx + a*u*u_xxx + 3*a*u_x*u_xx + c*u^2*u_x");
        let r = nsa_check(&f, &sub("u"), &ctx()).unwrap();
        assert!(!r.holds);
        assert_eq!(r.residual, e("3*a*u_x*u_xx"));
        assert_eq!(r.classification, Classification::None);
    }

    #[test]
    fn determining_system_third_order() {
        let c = ctx();
        let sys = determining_system(&eq("u_t + a*u*u_xxx"), "phi", &c).unwrap();
        let target = e("phi_x + u*phi_xu");
        let hit = sys.iter().find(|s| s.ratio_to(&target).is_some() || (*s).clone() == &e("-3*a") * &target);
        assert!(hit.is_some(), "{sys:?}");
        let inst = instantiate_unknown(&target, "phi", &e("x^3/u"), &c).unwrap();
        assert!(inst.is_zero());
    }

    #[test]
    fn ratio_detection_on_system() {
        let c = ctx();
        let sys = determining_system(&eq("u_t + d*u_xxxxx + a*u*u_xxx + b*u_x*u_xx + c*u^2*u_x"), "phi", &c).unwrap();
        for target in ["d*phi_xu", "d*phi_uu"] {
            let t = e(target);
            assert!(sys.iter().any(|s| s.ratio_to(&t).is_some()), "{target} missing");
        }
        let first = e("phi_t + d*phi_xxxxx + a*u*phi_xxx + c*u^2*phi_x");
        let factor = sys.iter().find_map(|s| s.ratio_to(&first)).unwrap();
        assert_eq!(factor, rational(-1, 1));
    }
}
