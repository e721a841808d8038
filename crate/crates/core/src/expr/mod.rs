//! Canonical polynomial representation of differential functions.
//!
//! A [`DiffExpr`] is a finite sum of rational multiples of [`Monomial`]s,
//! where a monomial is a product of [`Atom`]s raised to nonzero integer
//! powers. Parameters live in the monomials alongside every other atom, so
//! the coefficient ring is plain `Q` and two expressions are equal exactly
//! when their term maps are equal.

mod atom;
mod raw;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

pub use atom::{Atom, CoeffFn, Dep, Jet, Partials, Symbol, UnknownFn, Var};
pub use raw::{normalize, RawExpr};

use crate::error::{Error, Result};

pub type Rational = BigRational;

pub fn rational(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn integer(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// A power product of atoms, sorted by atom, with no zero exponents.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Atom, i32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_atom(atom: Atom, exp: i32) -> Self {
        if exp == 0 {
            Monomial::one()
        } else {
            Monomial(vec![(atom, exp)])
        }
    }

    /// Builds a monomial from arbitrary factors, merging repeats.
    pub fn from_factors(factors: impl IntoIterator<Item = (Atom, i32)>) -> Self {
        let mut map: BTreeMap<Atom, i32> = BTreeMap::new();
        for (a, e) in factors {
            *map.entry(a).or_insert(0) += e;
        }
        Monomial(map.into_iter().filter(|(_, e)| *e != 0).collect())
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn factors(&self) -> &[(Atom, i32)] {
        &self.0
    }

    pub fn exponent(&self, atom: &Atom) -> i32 {
        self.0.binary_search_by(|(a, _)| a.cmp(atom)).map(|i| self.0[i].1).unwrap_or(0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j].clone());
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    let e = a[i].1 + b[j].1;
                    if e != 0 {
                        out.push((a[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Monomial(out)
    }

    pub fn inverse(&self) -> Monomial {
        Monomial(self.0.iter().map(|(a, e)| (a.clone(), -e)).collect())
    }

    /// Adds `delta` to the exponent of `atom`.
    pub fn with_exponent_delta(&self, atom: &Atom, delta: i32) -> Monomial {
        self.mul(&Monomial::from_atom(atom.clone(), delta))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (i, (a, e)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "{a}")?;
            if *e != 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// A differential function in canonical form.
///
/// Zero is the empty term map; like terms are always merged and terms are
/// kept in the fixed monomial order, so printing is deterministic.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DiffExpr {
    terms: BTreeMap<Monomial, Rational>,
}

impl DiffExpr {
    pub fn zero() -> Self {
        DiffExpr::default()
    }

    pub fn one() -> Self {
        DiffExpr::constant(Rational::one())
    }

    pub fn constant(q: Rational) -> Self {
        DiffExpr::term(Monomial::one(), q)
    }

    pub fn int(n: i64) -> Self {
        DiffExpr::constant(integer(n))
    }

    pub fn term(m: Monomial, q: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !q.is_zero() {
            terms.insert(m, q);
        }
        DiffExpr { terms }
    }

    pub fn atom(a: impl Into<Atom>) -> Self {
        DiffExpr::term(Monomial::from_atom(a.into(), 1), Rational::one())
    }

    pub fn jet(j: Jet) -> Self {
        DiffExpr::atom(j)
    }

    pub fn var(v: Var) -> Self {
        DiffExpr::atom(v)
    }

    pub fn param(name: &str) -> Self {
        DiffExpr::atom(Atom::param(name))
    }

    pub fn coeff(name: &str) -> Self {
        DiffExpr::atom(Atom::coeff(name))
    }

    /// `ln(arg)`. Arguments must be single monomials; `ln 1` folds to zero.
    pub fn ln(arg: DiffExpr) -> Result<Self> {
        if arg.is_zero() {
            return Err(Error::Unsupported("logarithm of zero".into()));
        }
        if arg.is_one() {
            return Ok(DiffExpr::zero());
        }
        if arg.len() != 1 {
            return Err(Error::Unsupported(format!(
                "logarithm of a sum `ln({arg})`; only monomial arguments are supported"
            )));
        }
        if let Some((m, q)) = arg.single_term() {
            if q.is_one() && m.factors().len() == 1 && m.factors()[0].1 == 1 {
                if let Atom::Log(_) = m.factors()[0].0 {
                    return Err(Error::Unsupported(format!("nested logarithm `ln({arg})`")));
                }
            }
        }
        Ok(DiffExpr::atom(Atom::Log(Box::new(arg))))
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|q| q.is_one())
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> + '_ {
        self.terms.iter()
    }

    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next()
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    /// The value of a constant expression (zero included).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, q) = self.terms.iter().next().unwrap();
                m.is_one().then(|| q.clone())
            }
            _ => None,
        }
    }

    pub fn add_term(&mut self, m: Monomial, q: Rational) {
        if q.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(q);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += q;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    /// `self += factor * other`.
    pub fn add_scaled(&mut self, other: &DiffExpr, factor: &Rational) {
        if factor.is_zero() {
            return;
        }
        for (m, q) in &other.terms {
            self.add_term(m.clone(), q * factor);
        }
    }

    pub fn scale(&self, q: &Rational) -> DiffExpr {
        let mut out = DiffExpr::zero();
        out.add_scaled(self, q);
        out
    }

    pub fn mul_monomial(&self, m: &Monomial, q: &Rational) -> DiffExpr {
        let mut out = DiffExpr::zero();
        if q.is_zero() {
            return out;
        }
        for (n, c) in &self.terms {
            out.add_term(n.mul(m), c * q);
        }
        out
    }

    pub fn inverse(&self) -> Result<DiffExpr> {
        match self.terms.len() {
            0 => Err(Error::DivisionByZero),
            1 => {
                let (m, q) = self.terms.iter().next().unwrap();
                Ok(DiffExpr::term(m.inverse(), q.recip()))
            }
            _ => Err(Error::NonMonomialInverse(self.to_string())),
        }
    }

    pub fn pow(&self, exp: i32) -> Result<DiffExpr> {
        if exp < 0 {
            return self.inverse()?.pow(-exp);
        }
        if let Some((m, q)) = self.single_term() {
            let factors = m.factors().iter().map(|(a, e)| (a.clone(), e * exp));
            return Ok(DiffExpr::term(Monomial::from_factors(factors), num_traits::pow(q.clone(), exp as usize)));
        }
        let mut result = DiffExpr::one();
        let mut base = self.clone();
        let mut n = exp as u32;
        while n > 0 {
            if n & 1 == 1 {
                result = &result * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        Ok(result)
    }

    /// Visits every atom, descending into logarithm arguments.
    pub fn for_each_atom(&self, f: &mut impl FnMut(&Atom)) {
        for m in self.terms.keys() {
            for (a, _) in m.factors() {
                f(a);
                if let Atom::Log(arg) = a {
                    arg.for_each_atom(f);
                }
            }
        }
    }

    pub fn any_atom(&self, mut pred: impl FnMut(&Atom) -> bool) -> bool {
        let mut found = false;
        self.for_each_atom(&mut |a| found |= pred(a));
        found
    }

    pub fn contains_dep(&self, dep: Dep) -> bool {
        self.any_atom(|a| matches!(a, Atom::Jet(j) if j.dep == dep))
    }

    /// Jets of `dep` present anywhere in the expression, in atom order.
    pub fn jets_of(&self, dep: Dep) -> Vec<Jet> {
        let mut set = std::collections::BTreeSet::new();
        self.for_each_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                if j.dep == dep {
                    set.insert(*j);
                }
            }
        });
        set.into_iter().collect()
    }

    pub fn max_jet_order(&self) -> u32 {
        let mut max = 0;
        self.for_each_atom(&mut |a| {
            if let Atom::Jet(j) = a {
                max = max.max(j.order());
            }
        });
        max
    }

    /// Rebuilds the expression with atoms replaced by `f` (`None` keeps the
    /// atom). Logarithm arguments are rewritten recursively.
    pub fn try_map_atoms<F>(&self, f: &mut F) -> Result<DiffExpr>
    where
        F: FnMut(&Atom) -> Result<Option<DiffExpr>>,
    {
        let mut out = DiffExpr::zero();
        for (m, q) in &self.terms {
            let mut kept = Vec::new();
            let mut product: Option<DiffExpr> = None;
            for (a, e) in m.factors() {
                let replacement = match a {
                    Atom::Log(arg) => {
                        let mapped = arg.try_map_atoms(f)?;
                        if &mapped == arg.as_ref() {
                            None
                        } else {
                            Some(DiffExpr::ln(mapped)?)
                        }
                    }
                    _ => f(a)?,
                };
                match replacement {
                    None => kept.push((a.clone(), *e)),
                    Some(r) => {
                        let p = r.pow(*e)?;
                        product = Some(match product {
                            None => p,
                            Some(acc) => &acc * &p,
                        });
                    }
                }
            }
            let base = Monomial::from_factors(kept);
            match product {
                None => out.add_term(base, q.clone()),
                Some(p) => {
                    for (n, c) in &p.terms {
                        out.add_term(n.mul(&base), c * q);
                    }
                }
            }
        }
        Ok(out)
    }

    /// Replaces every occurrence of `atom` (outside logarithms too) by `value`.
    pub fn substitute_atom(&self, atom: &Atom, value: &DiffExpr) -> Result<DiffExpr> {
        self.try_map_atoms(&mut |a| Ok((a == atom).then(|| value.clone())))
    }

    /// Groups terms by their power product over the selected atoms.
    ///
    /// Returns `(key, coefficient)` pairs in key order; the coefficients are
    /// free of selected atoms and `Σ key·coefficient` reconstructs `self`.
    pub fn collect(&self, selected: impl Fn(&Atom) -> bool) -> Result<Vec<(Monomial, DiffExpr)>> {
        let mut groups: BTreeMap<Monomial, DiffExpr> = BTreeMap::new();
        for (m, q) in &self.terms {
            let mut key = Vec::new();
            let mut rest = Vec::new();
            for (a, e) in m.factors() {
                if selected(a) {
                    if *e < 0 {
                        return Err(Error::Collect(format!("`{a}` occurs with negative exponent {e}")));
                    }
                    key.push((a.clone(), *e));
                } else {
                    if let Atom::Log(arg) = a {
                        if arg.any_atom(&selected) {
                            return Err(Error::Collect(format!("selected atom inside `{a}`")));
                        }
                    }
                    rest.push((a.clone(), *e));
                }
            }
            groups.entry(Monomial::from_factors(key)).or_default().add_term(Monomial::from_factors(rest), q.clone());
        }
        Ok(groups.into_iter().filter(|(_, c)| !c.is_zero()).collect())
    }

    /// If `other = q * self` for a nonzero rational `q`, returns `q`.
    pub fn ratio_to(&self, other: &DiffExpr) -> Option<Rational> {
        let (m, q) = self.leading()?;
        let factor = other.terms.get(m)? / q;
        (self.scale(&factor) == *other).then_some(factor)
    }

    pub fn to_raw(&self) -> RawExpr {
        let terms = self
            .terms
            .iter()
            .map(|(m, q)| {
                let mut factors = vec![RawExpr::Num(q.clone())];
                for (a, e) in m.factors() {
                    let base = match a {
                        Atom::Log(arg) => RawExpr::Ln(Box::new(arg.to_raw())),
                        _ => RawExpr::Atom(a.clone()),
                    };
                    factors.push(if *e == 1 { base } else { RawExpr::Pow(Box::new(base), *e as i64) });
                }
                RawExpr::Mul(factors)
            })
            .collect();
        RawExpr::Add(terms)
    }
}

/// Semantic equality: `a − b` normalizes to the empty sum.
pub fn equal(a: &DiffExpr, b: &DiffExpr) -> bool {
    (a - b).is_zero()
}

impl From<Rational> for DiffExpr {
    fn from(q: Rational) -> Self {
        DiffExpr::constant(q)
    }
}

impl From<Atom> for DiffExpr {
    fn from(a: Atom) -> Self {
        DiffExpr::atom(a)
    }
}

impl From<Jet> for DiffExpr {
    fn from(j: Jet) -> Self {
        DiffExpr::atom(j)
    }
}

impl Add<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn add(self, rhs: &DiffExpr) -> DiffExpr {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for DiffExpr {
    type Output = DiffExpr;
    fn add(mut self, rhs: DiffExpr) -> DiffExpr {
        self += &rhs;
        self
    }
}

impl AddAssign<&DiffExpr> for DiffExpr {
    fn add_assign(&mut self, rhs: &DiffExpr) {
        for (m, q) in &rhs.terms {
            self.add_term(m.clone(), q.clone());
        }
    }
}

impl AddAssign for DiffExpr {
    fn add_assign(&mut self, rhs: DiffExpr) {
        for (m, q) in rhs.terms {
            self.add_term(m, q);
        }
    }
}

impl Sub<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn sub(self, rhs: &DiffExpr) -> DiffExpr {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for DiffExpr {
    type Output = DiffExpr;
    fn sub(mut self, rhs: DiffExpr) -> DiffExpr {
        self -= &rhs;
        self
    }
}

impl SubAssign<&DiffExpr> for DiffExpr {
    fn sub_assign(&mut self, rhs: &DiffExpr) {
        for (m, q) in &rhs.terms {
            self.add_term(m.clone(), -q.clone());
        }
    }
}

impl Mul<&DiffExpr> for &DiffExpr {
    type Output = DiffExpr;
    fn mul(self, rhs: &DiffExpr) -> DiffExpr {
        let mut out = DiffExpr::zero();
        for (m, q) in &self.terms {
            for (n, c) in &rhs.terms {
                out.add_term(m.mul(n), q * c);
            }
        }
        out
    }
}

impl Mul for DiffExpr {
    type Output = DiffExpr;
    fn mul(self, rhs: DiffExpr) -> DiffExpr {
        &self * &rhs
    }
}

impl Neg for &DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        DiffExpr { terms: self.terms.iter().map(|(m, q)| (m.clone(), -q.clone())).collect() }
    }
}

impl Neg for DiffExpr {
    type Output = DiffExpr;
    fn neg(self) -> DiffExpr {
        -&self
    }
}

fn write_rational(f: &mut fmt::Formatter<'_>, q: &Rational) -> fmt::Result {
    if q.is_integer() {
        write!(f, "{}", q.numer())
    } else {
        write!(f, "{}/{}", q.numer(), q.denom())
    }
}

impl fmt::Display for DiffExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (i, (m, q)) in self.terms.iter().enumerate() {
            let negative = q.is_negative();
            match (i, negative) {
                (0, true) => f.write_str("-")?,
                (0, false) => {}
                (_, true) => f.write_str(" - ")?,
                (_, false) => f.write_str(" + ")?,
            }
            let magnitude = q.abs();
            if m.is_one() {
                write_rational(f, &magnitude)?;
            } else if magnitude.is_one() {
                write!(f, "{m}")?;
            } else {
                write_rational(f, &magnitude)?;
                write!(f, "*{m}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn u(x: u8) -> DiffExpr {
        DiffExpr::jet(Jet::u(0, x))
    }

    #[test]
    fn like_terms_merge() {
        let e = &(&u(0) * &u(1)) + &(&u(1) * &u(0));
        assert_eq!(e.to_string(), "2*u*u_x");
    }

    #[test]
    fn cancellation_is_empty() {
        let e = &u(0) - &u(0);
        assert!(e.is_zero());
        assert_eq!(e.to_string(), "0");
    }

    #[test]
    fn negative_powers_fold() {
        let e = &(&u(1) * &u(1)) * &u(0).inverse().unwrap();
        let (m, q) = e.single_term().unwrap();
        assert!(q.is_one());
        assert_eq!(m.exponent(&Atom::Jet(Jet::u(0, 0))), -1);
        assert_eq!(m.exponent(&Atom::Jet(Jet::u(0, 1))), 2);
        assert!((&u(0).inverse().unwrap() * &u(0)).is_one());
    }

    #[test]
    fn collect_splits_by_selected_powers() {
        let a = DiffExpr::coeff("a");
        let b = DiffExpr::coeff("b");
        let e = &(&a * &u(1).pow(2).unwrap()) + &(&b * &u(1));
        let groups = e.collect(|at| matches!(at, Atom::Jet(j) if j.order() >= 1)).unwrap();
        assert_eq!(groups.len(), 2);
        assert_eq!(groups[0].0.to_string(), "u_x");
        assert_eq!(groups[0].1, b);
        assert_eq!(groups[1].0.to_string(), "u_x^2");
        assert_eq!(groups[1].1, a);
        assert!(DiffExpr::zero().collect(|_| true).unwrap().is_empty());
    }

    #[test]
    fn collect_rejects_negative_selected() {
        let e = u(1).inverse().unwrap();
        assert!(matches!(e.collect(|a| matches!(a, Atom::Jet(_))), Err(Error::Collect(_))));
        let l = DiffExpr::ln(u(1)).unwrap();
        assert!(matches!(l.collect(|a| matches!(a, Atom::Jet(_))), Err(Error::Collect(_))));
    }

    #[test]
    fn logarithm_rules() {
        assert!(DiffExpr::ln(DiffExpr::one()).unwrap().is_zero());
        assert!(DiffExpr::ln(DiffExpr::zero()).is_err());
        assert!(DiffExpr::ln(&u(0) + &u(1)).is_err());
        let lnu = DiffExpr::ln(u(0)).unwrap();
        assert!(DiffExpr::ln(lnu.clone()).is_err());
        assert_eq!(lnu.pow(2).unwrap().to_string(), "ln(u)^2");
    }

    #[test]
    fn pow_of_sum() {
        let s = &u(0) + &DiffExpr::int(1);
        assert_eq!(s.pow(2).unwrap().to_string(), "1 + 2*u + u^2");
        assert!(s.pow(-1).is_err());
    }

    #[test]
    fn ratio_detection() {
        let e = &u(0) + &u(1);
        assert_eq!(e.ratio_to(&e.scale(&rational(-3, 2))), Some(rational(-3, 2)));
        assert_eq!(e.ratio_to(&(&u(0) - &u(1))), None);
    }
}
