use std::fmt::Write;

use super::{Declaration, SourceDocument, Statement};

/// Canonical text of a document; `parse(print_document(d))` reproduces `d`
/// up to warnings.
pub fn print_document(doc: &SourceDocument) -> String {
    let mut out = String::new();
    for d in &doc.declarations {
        match d {
            Declaration::Param(p) => writeln!(out, "param {p};"),
            Declaration::Func { name, rule: None } => writeln!(out, "func {name}(t);"),
            Declaration::Func { name, rule: Some(r) } => writeln!(out, "func {name}(t) deriv = {r};"),
            Declaration::Unknown(n) => writeln!(out, "unknown {n}(x,t,u);"),
        }
        .unwrap();
    }
    if !doc.declarations.is_empty() && !doc.statements.is_empty() {
        out.push('\n');
    }
    for s in &doc.statements {
        let named = |n: &Option<String>| n.as_ref().map(|n| format!(" {n}")).unwrap_or_default();
        match s {
            Statement::Equation(f) => writeln!(out, "{f} = 0;"),
            Statement::Expression(e) => writeln!(out, "{e};"),
            Statement::Symmetry { name, symmetry } => writeln!(
                out,
                "symmetry{} {{ tau = {}; xi = {}; eta = {} }}",
                named(name),
                symmetry.tau,
                symmetry.xi,
                symmetry.eta
            ),
            Statement::Substitution { name, phi } => writeln!(out, "phi{} = {phi};", named(name)),
            Statement::Vector { name, c0, c1 } => {
                writeln!(out, "vector{} {{ c0 = {c0}; c1 = {c1} }}", named(name))
            }
        }
        .unwrap();
    }
    out
}
