//! Seeded random differential functions, built as source text so the parser
//! is exercised alongside the algebra.

#![allow(dead_code)]

use nsa_core::parser::parse_expr;
use nsa_core::{Context, DiffExpr};
use rand::seq::SliceRandom;
use rand::Rng;

pub const DECLARATIONS: &str = "param a;\nfunc f(t);\nfunc g(t) deriv = a*g/t;\nunknown w(x,t,u);\n";

pub fn context() -> Context {
    nsa_core::parser::parse(DECLARATIONS).unwrap().context
}

const U_ATOMS: &[&str] = &[
    "u", "u_x", "u_xx", "u_xxx", "u_t", "u_tx", "x", "t", "a", "f", "f'", "g", "ln(u)", "ln(u_x)", "w", "w_x", "w_u",
    "w_t",
];
const V_ATOMS: &[&str] = &["v", "v_x", "v_xx", "v_t", "v_tx"];
const PHI_ATOMS: &[&str] = &["x", "t", "u", "a", "f", "g", "ln(u)"];

fn coefficient<R: Rng>(rng: &mut R) -> String {
    let n = *[-3i32, -2, -1, 1, 2, 3, 5].choose(rng).unwrap();
    let d = *[1i32, 1, 1, 2, 3].choose(rng).unwrap();
    if d == 1 {
        format!("({n})")
    } else {
        format!("({n}/{d})")
    }
}

fn term<R: Rng>(rng: &mut R, atoms: &[&str], max_factors: usize, negative_powers: bool) -> String {
    let mut s = coefficient(rng);
    for _ in 0..rng.gen_range(1..=max_factors) {
        let a = atoms.choose(rng).unwrap();
        let e: i32 = if negative_powers && (*a == "u" || *a == "x" || *a == "t") && rng.gen_bool(0.25) {
            -rng.gen_range(1..=2)
        } else {
            rng.gen_range(1..=2)
        };
        s.push_str(&format!("*{a}^{e}"));
    }
    s
}

fn sum<R: Rng>(rng: &mut R, atoms: &[&str], terms: usize, max_factors: usize, negative_powers: bool) -> String {
    let n = rng.gen_range(1..=terms);
    (0..n).map(|_| term(rng, atoms, max_factors, negative_powers)).collect::<Vec<_>>().join(" + ")
}

/// Random function of `x, t, u`, jets of `u`, coefficients, logarithms and
/// an unknown `w(x,t,u)`.
pub fn random_u_expr<R: Rng>(rng: &mut R, ctx: &Context) -> DiffExpr {
    parse_expr(&sum(rng, U_ATOMS, 4, 3, true), ctx).unwrap()
}

/// Like [`random_u_expr`] with every term carrying a jet of `v`.
pub fn random_uv_expr<R: Rng>(rng: &mut R, ctx: &Context) -> DiffExpr {
    let n = rng.gen_range(1..=3);
    let text = (0..n)
        .map(|_| format!("{}*{}", term(rng, U_ATOMS, 2, true), V_ATOMS.choose(rng).unwrap()))
        .collect::<Vec<_>>()
        .join(" + ");
    parse_expr(&text, ctx).unwrap()
}

/// Nonzero function of `x, t, u` only.
pub fn random_phi<R: Rng>(rng: &mut R, ctx: &Context) -> DiffExpr {
    loop {
        let e = parse_expr(&sum(rng, PHI_ATOMS, 3, 2, true), ctx).unwrap();
        if !e.is_zero() {
            return e;
        }
    }
}
