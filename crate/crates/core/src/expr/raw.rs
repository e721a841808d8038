use num_rational::BigRational;

use super::{Atom, DiffExpr};
use crate::error::{Error, Result};

/// An unnormalized expression tree, as produced by the parser.
#[derive(Debug, Clone, PartialEq)]
pub enum RawExpr {
    Num(BigRational),
    Atom(Atom),
    Add(Vec<RawExpr>),
    Neg(Box<RawExpr>),
    Sub(Box<RawExpr>, Box<RawExpr>),
    Mul(Vec<RawExpr>),
    Div(Box<RawExpr>, Box<RawExpr>),
    Pow(Box<RawExpr>, i64),
    Ln(Box<RawExpr>),
}

/// Brings a raw tree into canonical form.
///
/// Fails when a jet exceeds `order_cap`, when dividing by something that is
/// not a single monomial, or on an exponent outside the `i32` range.
pub fn normalize(raw: &RawExpr, order_cap: u8) -> Result<DiffExpr> {
    Ok(match raw {
        RawExpr::Num(q) => DiffExpr::constant(q.clone()),
        RawExpr::Atom(a) => {
            if let Atom::Jet(j) = a {
                if j.order() > order_cap as u32 {
                    return Err(Error::OrderCap { order: j.order(), cap: order_cap });
                }
            }
            if let Atom::Log(arg) = a {
                return DiffExpr::ln(normalize(&arg.to_raw(), order_cap)?);
            }
            DiffExpr::atom(a.clone())
        }
        RawExpr::Add(items) => {
            let mut acc = DiffExpr::zero();
            for item in items {
                acc += normalize(item, order_cap)?;
            }
            acc
        }
        RawExpr::Neg(inner) => -normalize(inner, order_cap)?,
        RawExpr::Sub(a, b) => normalize(a, order_cap)? - normalize(b, order_cap)?,
        RawExpr::Mul(items) => {
            let mut acc = DiffExpr::one();
            for item in items {
                acc = &acc * &normalize(item, order_cap)?;
                if acc.is_zero() {
                    break;
                }
            }
            acc
        }
        RawExpr::Div(a, b) => {
            let denom = normalize(b, order_cap)?;
            &normalize(a, order_cap)? * &denom.inverse()?
        }
        RawExpr::Pow(base, exp) => {
            let exp = i32::try_from(*exp).map_err(|_| Error::Unsupported(format!("exponent {exp} is out of range")))?;
            normalize(base, order_cap)?.pow(exp)?
        }
        RawExpr::Ln(arg) => DiffExpr::ln(normalize(arg, order_cap)?)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{integer, Jet};

    fn jet(x: u8) -> RawExpr {
        RawExpr::Atom(Atom::Jet(Jet::u(0, x)))
    }

    #[test]
    fn folds_division_into_negative_powers() {
        let raw = RawExpr::Div(Box::new(RawExpr::Mul(vec![jet(1), jet(1)])), Box::new(jet(0)));
        assert_eq!(normalize(&raw, 12).unwrap().to_string(), "u^-1*u_x^2");
    }

    #[test]
    fn order_cap_is_an_error() {
        let raw = jet(13);
        assert_eq!(normalize(&raw, 12), Err(Error::OrderCap { order: 13, cap: 12 }));
    }

    #[test]
    fn division_by_sum_rejected() {
        let raw = RawExpr::Div(Box::new(jet(0)), Box::new(RawExpr::Add(vec![jet(0), RawExpr::Num(integer(1))])));
        assert!(matches!(normalize(&raw, 12), Err(Error::NonMonomialInverse(_))));
    }

    #[test]
    fn idempotent_on_canonical_form() {
        let raw =
            RawExpr::Sub(Box::new(RawExpr::Mul(vec![jet(0), jet(1)])), Box::new(RawExpr::Pow(Box::new(jet(2)), -2)));
        let once = normalize(&raw, 12).unwrap();
        let twice = normalize(&once.to_raw(), 12).unwrap();
        assert_eq!(once, twice);
    }
}
