//! Conserved vectors from point symmetries of an evolution equation and its
//! formal Lagrangian, their localization through `v = φ`, density
//! normalization by integration by parts, and divergence certification.

use std::fmt;

use num_traits::{Signed, Zero};

use crate::adjoint::{adjoint_solved_rhs, formal_lagrangian, nsa_check, Substitution};
use crate::calculus::{
    partial_jet, substitute_dependent, total_derivative, total_derivative_n, Equation, PointSymmetry, Reduction,
};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{integer, Atom, Dep, DiffExpr, Jet, Monomial, Rational, Var};

/// Record of a density normalization `A⁰ = s·C⁰ − D_x h`,
/// `A¹ = reduce(s·C¹ + D_t h)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transfer {
    pub h: DiffExpr,
    pub sign: i8,
    /// `s·C¹ + D_t h` before reduction on solutions.
    pub flux_unreduced: DiffExpr,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Provenance {
    pub symmetry: Option<PointSymmetry>,
    pub substitution: Option<DiffExpr>,
    pub transfer: Option<Transfer>,
}

/// A pair `(C⁰, C¹)` with `D_t C⁰ + D_x C¹ = 0` on solutions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConservedVector {
    pub c0: DiffExpr,
    pub c1: DiffExpr,
    pub provenance: Provenance,
}

impl ConservedVector {
    pub fn new(c0: DiffExpr, c1: DiffExpr) -> Self {
        ConservedVector { c0, c1, provenance: Provenance::default() }
    }

    pub fn depends_on_v(&self) -> bool {
        self.c0.contains_dep(Dep::V) || self.c1.contains_dep(Dep::V)
    }

    /// Multiplies both components by `q`, keeping the provenance.
    pub fn scaled(&self, q: &Rational) -> Self {
        ConservedVector { c0: self.c0.scale(q), c1: self.c1.scale(q), provenance: self.provenance.clone() }
    }
}

impl fmt::Display for ConservedVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "vector {{ c0 = {}; c1 = {} }}", self.c0, self.c1)
    }
}

/// `W = η − τ u_t − ξ u_x`.
pub fn characteristic(x: &PointSymmetry) -> DiffExpr {
    x.characteristic()
}

/// Ibragimov's conserved vector for `L = vF` and a point symmetry, with `v`
/// kept symbolic.
///
/// Only Lagrangians over `u_t` and pure `x`-derivatives are handled:
/// `C⁰ = τL + W ∂L/∂u_t` and
/// `C¹ = ξL + Σ_k D_x^k(W) Σ_{m>k} (−1)^{m−k−1} D_x^{m−k−1}(∂L/∂u_{x^m})`.
pub fn ibragimov_vector(eq: &Equation, x: &PointSymmetry, ctx: &Context) -> Result<ConservedVector> {
    let l = formal_lagrangian(eq);
    let jets = l.jets_of(Dep::U);
    if let Some(j) = jets.iter().find(|j| j.t > 1 || (j.t == 1 && j.x > 0)) {
        return Err(Error::Unsupported(format!(
            "formal Lagrangian depends on the mixed derivative `{j}`; only u_t and pure x-derivatives are supported"
        )));
    }
    let top = jets.iter().filter(|j| j.t == 0).map(|j| j.x).max().unwrap_or(0) as usize;
    let w = x.characteristic();

    let c0 = &(&x.tau * &l) + &(&w * &partial_jet(&l, Jet::u(1, 0), ctx)?);

    let dl: Vec<DiffExpr> = (0..=top).map(|m| partial_jet(&l, Jet::u(0, m as u8), ctx)).collect::<Result<_>>()?;
    let mut c1 = &x.xi * &l;
    let mut dw = w;
    for k in 0..top {
        let mut bracket = DiffExpr::zero();
        for (m, dlm) in dl.iter().enumerate().skip(k + 1) {
            let steps = (m - k - 1) as u32;
            let term = total_derivative_n(dlm, Var::X, steps, ctx)?;
            if steps.is_multiple_of(2) {
                bracket += term;
            } else {
                bracket -= &term;
            }
        }
        c1 += &dw * &bracket;
        if k + 1 < top {
            dw = total_derivative(&dw, Var::X, ctx)?;
        }
    }
    Ok(ConservedVector { c0, c1, provenance: Provenance { symmetry: Some(x.clone()), ..Provenance::default() } })
}

/// Eliminates `v` through `v = φ`, refusing substitutions for which the
/// equation is not nonlinearly self-adjoint.
pub fn localize(cv: &ConservedVector, eq: &Equation, sub: &Substitution, ctx: &Context) -> Result<ConservedVector> {
    let report = nsa_check(eq, sub, ctx)?;
    if !report.holds {
        return Err(Error::InvalidSubstitution(format!(
            "equation is not self-adjoint under phi = {}; residual {}",
            sub.phi(),
            report.residual
        )));
    }
    localize_unchecked(cv, sub, ctx)
}

/// [`localize`] without the self-adjointness precondition.
pub fn localize_unchecked(cv: &ConservedVector, sub: &Substitution, ctx: &Context) -> Result<ConservedVector> {
    let c0 = substitute_dependent(&cv.c0, Dep::V, sub.phi(), ctx)?;
    let c1 = substitute_dependent(&cv.c1, Dep::V, sub.phi(), ctx)?;
    let mut provenance = cv.provenance.clone();
    provenance.substitution = Some(sub.phi().clone());
    Ok(ConservedVector { c0, c1, provenance })
}

/// `∫ w^n (ln w)^ell dw` for the cases that stay in the monomial world.
fn power_antiderivative(w: Jet, n: i32, ell: i32) -> Result<Option<DiffExpr>> {
    let wexpr = DiffExpr::jet(w);
    let lnw = DiffExpr::ln(wexpr.clone())?;
    Ok(match (n, ell) {
        (-1, 0) => Some(lnw),
        (-1, 1) => Some(lnw.pow(2)?.scale(&Rational::new(1.into(), 2.into()))),
        (n, 0) => Some(wexpr.pow(n + 1)?.scale(&Rational::new(1.into(), (n + 1).into()))),
        (n, 1) => {
            let p = wexpr.pow(n + 1)?;
            let k = integer((n + 1) as i64);
            Some(&(&p * &lnw).scale(&k.recip()) - &p.scale(&(&k * &k).recip()))
        }
        _ => None,
    })
}

/// An `h` with `q·m − D_x h` free of the highest jet of `q·m`, if the term
/// admits one of the supported integrations by parts.
fn transfer_potential(m: &Monomial, q: &Rational) -> Result<Option<DiffExpr>> {
    let mut highest: Option<u8> = None;
    let mut highest_in_log: Option<u8> = None;
    let mut has_log = false;
    for (a, _) in m.factors() {
        match a {
            Atom::Jet(j) => {
                if j.dep == Dep::V || j.t > 0 {
                    return Ok(None);
                }
                highest = highest.max(Some(j.x));
            }
            Atom::Unknown(_) => return Ok(None),
            Atom::Log(arg) => {
                has_log = true;
                let mut blocked = false;
                arg.for_each_atom(&mut |b| match b {
                    Atom::Jet(j) if j.dep == Dep::V || j.t > 0 => blocked = true,
                    Atom::Jet(j) => highest_in_log = highest_in_log.max(Some(j.x)),
                    Atom::Unknown(_) => blocked = true,
                    _ => {}
                });
                if blocked {
                    return Ok(None);
                }
            }
            _ => {}
        }
    }
    let term = DiffExpr::term(m.clone(), q.clone());
    let x = Atom::Indep(Var::X);
    match highest {
        None => {
            // f(t)·x^n with n ≠ −1 is D_x of f(t)·x^{n+1}/(n+1).
            let n = m.exponent(&x);
            if has_log || n == -1 || highest_in_log.is_some() {
                return Ok(None);
            }
            let g = term.mul_monomial(&Monomial::from_atom(x, 1), &integer((n + 1) as i64).recip());
            Ok(Some(g))
        }
        Some(0) => Ok(None),
        Some(k) => {
            let top = Atom::Jet(Jet::u(0, k));
            if m.exponent(&top) != 1 || highest_in_log.is_some_and(|h| h >= k) {
                return Ok(None);
            }
            let w = Jet::u(0, k - 1);
            let watom = Atom::Jet(w);
            let lnw = Atom::Log(Box::new(DiffExpr::jet(w)));
            let n = m.exponent(&watom);
            let ell = m.exponent(&lnw);
            for (a, _) in m.factors() {
                if let Atom::Log(arg) = a {
                    if *a != lnw && arg.any_atom(|b| *b == watom) {
                        return Ok(None);
                    }
                }
            }
            let Some(antiderivative) = power_antiderivative(w, n, ell)? else {
                return Ok(None);
            };
            let rest = Monomial::from_factors(
                m.factors().iter().filter(|(a, _)| *a != top && *a != watom && *a != lnw).cloned(),
            );
            Ok(Some(antiderivative.mul_monomial(&rest, q)))
        }
    }
}

/// Splits `c0 = rest + D_x h` by repeated monomial-wise integration by
/// parts, highest derivatives first, until a pass makes no transfer.
pub fn integrate_by_parts(c0: &DiffExpr, ctx: &Context) -> Result<(DiffExpr, DiffExpr)> {
    let mut rest = c0.clone();
    let mut h = DiffExpr::zero();
    // Every transfer strictly lowers the highest jet of the terms it produces.
    for _ in 0..=4 * (ctx.order_cap() as usize + 1) {
        let mut next = DiffExpr::zero();
        let mut progressed = false;
        let mut ordered: Vec<(&Monomial, &Rational)> = rest.terms().collect();
        ordered.sort_by_key(|(m, _)| std::cmp::Reverse(highest_x_order(m)));
        for (m, q) in ordered {
            match transfer_potential(m, q)? {
                Some(g) => {
                    let dg = total_derivative(&g, Var::X, ctx)?;
                    next += &DiffExpr::term(m.clone(), q.clone()) - &dg;
                    h += g;
                    progressed = true;
                }
                None => next.add_term(m.clone(), q.clone()),
            }
        }
        rest = next;
        if !progressed {
            break;
        }
    }
    Ok((rest, h))
}

fn highest_x_order(m: &Monomial) -> u8 {
    m.factors().iter().filter_map(|(a, _)| a.as_jet()).map(|j| j.x).max().unwrap_or(0)
}

/// Moves total `x`-derivatives out of the density into the flux and fixes
/// the overall sign so the leading density term is positive. The flux is
/// returned reduced on solutions of `eq`.
pub fn density_normalize(cv: &ConservedVector, eq: &Equation, ctx: &Context) -> Result<ConservedVector> {
    if cv.depends_on_v() {
        return Err(Error::InvalidSubstitution("conserved vector still depends on v; localize it first".into()));
    }
    let (rest, h) = integrate_by_parts(&cv.c0, ctx)?;
    let negative = rest.leading().is_some_and(|(_, q)| q.is_negative());
    let sign: i8 = if negative { -1 } else { 1 };
    let s = integer(sign as i64);
    let a0 = rest.scale(&s);
    let h = h.scale(&s);
    let flux_unreduced = &cv.c1.scale(&s) + &total_derivative(&h, Var::T, ctx)?;
    let a1 = Reduction::new(eq, ctx).reduce(&flux_unreduced)?;
    let mut provenance = cv.provenance.clone();
    provenance.transfer = Some(Transfer { h, sign, flux_unreduced });
    Ok(ConservedVector { c0: a0, c1: a1, provenance })
}

/// `D_t C⁰ + D_x C¹` reduced on solutions of `eq`, and of the adjoint
/// equation as well when `with_adjoint` is set. Zero certifies the law.
pub fn verify_divergence(cv: &ConservedVector, eq: &Equation, with_adjoint: bool, ctx: &Context) -> Result<DiffExpr> {
    let div = &total_derivative(&cv.c0, Var::T, ctx)? + &total_derivative(&cv.c1, Var::X, ctx)?;
    let mut reduction = Reduction::new(eq, ctx);
    if with_adjoint {
        reduction = reduction.with_rule(Dep::V, adjoint_solved_rhs(eq, ctx)?)?;
    }
    reduction.reduce(&div)
}

/// A localized vector is trivial when its normalized density vanishes on
/// solutions and the remaining flux is constant in `x`.
pub fn is_trivial(cv: &ConservedVector, eq: &Equation, ctx: &Context) -> Result<bool> {
    let n = density_normalize(cv, eq, ctx)?;
    let mut reduction = Reduction::new(eq, ctx);
    if !reduction.reduce(&n.c0)?.is_zero() {
        return Ok(false);
    }
    let dx = total_derivative(&n.c1, Var::X, ctx)?;
    Ok(reduction.reduce(&dx)?.is_zero())
}

/// Checks the exact transfer identities recorded by [`density_normalize`]:
/// `s·C⁰ − A⁰ = D_x h` and `A¹_raw − s·C¹ = D_t h`, plus that `A¹` is the
/// reduction of `A¹_raw`.
pub fn transfer_identities_hold(
    original: &ConservedVector,
    normalized: &ConservedVector,
    eq: &Equation,
    ctx: &Context,
) -> Result<bool> {
    let Some(t) = &normalized.provenance.transfer else {
        return Ok(false);
    };
    let s = integer(t.sign as i64);
    let lhs0 = &original.c0.scale(&s) - &normalized.c0;
    let lhs1 = &t.flux_unreduced - &original.c1.scale(&s);
    let ok0 = lhs0 == total_derivative(&t.h, Var::X, ctx)?;
    let ok1 = lhs1 == total_derivative(&t.h, Var::T, ctx)?;
    let ok2 = Reduction::new(eq, ctx).reduce(&t.flux_unreduced)? == normalized.c1;
    Ok(ok0 && ok1 && ok2 && !s.is_zero())
}
