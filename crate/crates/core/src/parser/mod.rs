//! Text form of expressions and `.nsa` documents.
//!
//! ```text
//! expr   := term {("+" | "-") term}
//! term   := ["-"] factor {("*" | "/") factor}
//! factor := base ["^" signed-integer]
//! base   := integer | identifier ["(" "t" ")"] | jet | "ln" "(" expr ")" | "(" expr ")"
//! ```
//!
//! A document is a list of `;`-terminated declarations and statements:
//!
//! ```text
//! param p, c1;
//! func a(t);                 # a -> a' -> a'' ...
//! func A(t) deriv = a;       # explicit D_t rule
//! unknown phi(x,t,u);
//! u_t + a*u*u_xxx = 0;
//! symmetry shift { tau = 0; xi = 1; eta = 0 }
//! phi local = x/u;
//! vector expected { c0 = ln(u); c1 = u_xx }
//! ```

mod lexer;
mod print;

use num_rational::BigRational;

use crate::calculus::PointSymmetry;
use crate::context::{Context, DerivativeRule};
use crate::error::{Error, Result};
use crate::expr::{normalize, Atom, CoeffFn, DiffExpr, Jet, Partials, RawExpr, UnknownFn, Var};
use lexer::{tokenize, Tok, Token};

pub use print::print_document;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Warning {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Declaration {
    Param(String),
    Func { name: String, rule: Option<DiffExpr> },
    Unknown(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    /// `lhs = rhs`, stored as `lhs − rhs`.
    Equation(DiffExpr),
    Expression(DiffExpr),
    Symmetry {
        name: Option<String>,
        symmetry: PointSymmetry,
    },
    Substitution {
        name: Option<String>,
        phi: DiffExpr,
    },
    Vector {
        name: Option<String>,
        c0: DiffExpr,
        c1: DiffExpr,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SourceDocument {
    pub context: Context,
    pub declarations: Vec<Declaration>,
    pub statements: Vec<Statement>,
    pub warnings: Vec<Warning>,
}

impl SourceDocument {
    pub fn equations(&self) -> impl Iterator<Item = &DiffExpr> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Equation(e) => Some(e),
            _ => None,
        })
    }

    /// The left-hand differential function of the document's equation.
    pub fn equation_lhs(&self) -> Result<&DiffExpr> {
        self.equations().next().ok_or(Error::Missing { kind: "equation", name: "<any>".into() })
    }

    pub fn symmetries(&self) -> impl Iterator<Item = (Option<&str>, &PointSymmetry)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Symmetry { name, symmetry } => Some((name.as_deref(), symmetry)),
            _ => None,
        })
    }

    /// Named symmetry, or the only symmetry when `name` is `None`.
    pub fn symmetry(&self, name: Option<&str>) -> Result<&PointSymmetry> {
        let mut all = self.symmetries();
        match name {
            Some(n) => all
                .find(|(sn, _)| *sn == Some(n))
                .map(|(_, s)| s)
                .ok_or_else(|| Error::Missing { kind: "symmetry", name: n.into() }),
            None => {
                let first = all.next();
                match (first, all.next()) {
                    (Some((_, s)), None) => Ok(s),
                    _ => Err(Error::Missing { kind: "symmetry", name: "<unique>".into() }),
                }
            }
        }
    }

    pub fn substitutions(&self) -> impl Iterator<Item = (Option<&str>, &DiffExpr)> {
        self.statements.iter().filter_map(|s| match s {
            Statement::Substitution { name, phi } => Some((name.as_deref(), phi)),
            _ => None,
        })
    }

    pub fn substitution(&self, name: &str) -> Result<&DiffExpr> {
        self.substitutions()
            .find(|(n, _)| *n == Some(name))
            .map(|(_, p)| p)
            .ok_or_else(|| Error::Missing { kind: "substitution", name: name.into() })
    }

    pub fn vector(&self, name: &str) -> Result<(&DiffExpr, &DiffExpr)> {
        self.statements
            .iter()
            .find_map(|s| match s {
                Statement::Vector { name: Some(n), c0, c1 } if n == name => Some((c0, c1)),
                _ => None,
            })
            .ok_or_else(|| Error::Missing { kind: "vector", name: name.into() })
    }
}

/// Parses a whole `.nsa` document.
pub fn parse(text: &str) -> Result<SourceDocument> {
    parse_with_context(text, Context::new())
}

/// Parses a document on top of existing declarations.
pub fn parse_with_context(text: &str, context: Context) -> Result<SourceDocument> {
    let mut p = Parser::new(text)?;
    let mut doc = SourceDocument { context, declarations: Vec::new(), statements: Vec::new(), warnings: Vec::new() };
    while !p.at(&Tok::Eof) {
        p.document_item(&mut doc)?;
    }
    doc.warnings = p.warnings;
    Ok(doc)
}

/// Parses a single expression against the given declarations.
pub fn parse_expr(text: &str, ctx: &Context) -> Result<DiffExpr> {
    parse_expr_with_warnings(text, ctx).map(|(e, _)| e)
}

pub fn parse_expr_with_warnings(text: &str, ctx: &Context) -> Result<(DiffExpr, Vec<Warning>)> {
    let mut p = Parser::new(text)?;
    let raw = p.expr(ctx)?;
    p.expect(&Tok::Eof)?;
    Ok((normalize(&raw, ctx.order_cap())?, p.warnings))
}

/// Parses a symmetry given as `symmetry {…}`, `{…}` or a bare
/// `tau = …; xi = …; eta = …` list.
pub fn parse_symmetry(text: &str, ctx: &Context) -> Result<PointSymmetry> {
    let mut p = Parser::new(text)?;
    if p.at_ident("symmetry") {
        p.bump();
    }
    let braced = p.at(&Tok::LBrace);
    if braced {
        p.bump();
    }
    let end = if braced { Tok::RBrace } else { Tok::Eof };
    let fields = p.fields(ctx, &["tau", "xi", "eta"], &end)?;
    if braced {
        p.expect(&Tok::RBrace)?;
    }
    p.eat(&Tok::Semi);
    p.expect(&Tok::Eof)?;
    let [tau, xi, eta] = fields;
    PointSymmetry::new(tau, xi, eta)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
    warnings: Vec<Warning>,
}

impl Parser {
    fn new(text: &str) -> Result<Self> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, warnings: Vec::new() })
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn peek_at(&self, offset: usize) -> &Tok {
        let i = (self.pos + offset).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn at(&self, t: &Tok) -> bool {
        &self.peek().tok == t
    }

    fn at_ident(&self, name: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == name)
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos < self.toks.len() - 1 {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.at(t) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = self.peek();
        Err(Error::Syntax { line: t.line, col: t.col, msg: msg.into() })
    }

    fn expect(&mut self, t: &Tok) -> Result<Token> {
        if self.at(t) {
            Ok(self.bump())
        } else {
            self.error(format!("expected {}, found {}", t.describe(), self.peek().tok.describe()))
        }
    }

    fn ident(&mut self) -> Result<(String, Token)> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                Ok((s, self.bump()))
            }
            other => self.error(format!("expected identifier, found {}", other.describe())),
        }
    }

    fn expect_ident(&mut self, name: &str) -> Result<()> {
        if self.at_ident(name) {
            self.bump();
            Ok(())
        } else {
            self.error(format!("expected `{name}`, found {}", self.peek().tok.describe()))
        }
    }

    // ---- documents -------------------------------------------------------

    fn document_item(&mut self, doc: &mut SourceDocument) -> Result<()> {
        if self.at_ident("param") {
            self.bump();
            loop {
                let (name, _) = self.ident()?;
                doc.context.declare_param(&name)?;
                doc.declarations.push(Declaration::Param(name));
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
            self.expect(&Tok::Semi)?;
        } else if self.at_ident("func") {
            self.bump();
            let (name, _) = self.ident()?;
            self.expect(&Tok::LParen)?;
            self.expect_ident("t")?;
            self.expect(&Tok::RParen)?;
            doc.context.declare_func(&name, DerivativeRule::Primes)?;
            let mut rule = None;
            if self.at_ident("deriv") {
                self.bump();
                self.expect(&Tok::Eq)?;
                let e = self.normalized_expr(&doc.context)?;
                doc.context.set_rule(&name, DerivativeRule::Explicit(e.clone()));
                rule = Some(e);
            }
            self.expect(&Tok::Semi)?;
            doc.declarations.push(Declaration::Func { name, rule });
        } else if self.at_ident("unknown") {
            self.bump();
            let (name, _) = self.ident()?;
            self.expect(&Tok::LParen)?;
            for (i, v) in ["x", "t", "u"].iter().enumerate() {
                if i > 0 {
                    self.expect(&Tok::Comma)?;
                }
                self.expect_ident(v)?;
            }
            self.expect(&Tok::RParen)?;
            self.expect(&Tok::Semi)?;
            doc.context.declare_unknown(&name)?;
            doc.declarations.push(Declaration::Unknown(name));
        } else if self.at_ident("symmetry") && !matches!(self.peek_at(1), Tok::Eq) {
            self.bump();
            let name = self.optional_name()?;
            self.expect(&Tok::LBrace)?;
            let [tau, xi, eta] = self.fields(&doc.context, &["tau", "xi", "eta"], &Tok::RBrace)?;
            self.expect(&Tok::RBrace)?;
            self.eat(&Tok::Semi);
            let symmetry = PointSymmetry::new(tau, xi, eta)?;
            doc.statements.push(Statement::Symmetry { name, symmetry });
        } else if self.at_ident("vector") && !matches!(self.peek_at(1), Tok::Eq) {
            self.bump();
            let name = self.optional_name()?;
            self.expect(&Tok::LBrace)?;
            let [c0, c1] = self.fields(&doc.context, &["c0", "c1"], &Tok::RBrace)?;
            self.expect(&Tok::RBrace)?;
            self.eat(&Tok::Semi);
            doc.statements.push(Statement::Vector { name, c0, c1 });
        } else if self.at_ident("phi")
            && (matches!(self.peek_at(1), Tok::Eq)
                || (matches!(self.peek_at(1), Tok::Ident(_)) && matches!(self.peek_at(2), Tok::Eq)))
        {
            self.bump();
            let name = if self.at(&Tok::Eq) { None } else { Some(self.ident()?.0) };
            self.expect(&Tok::Eq)?;
            let phi = self.normalized_expr(&doc.context)?;
            self.expect(&Tok::Semi)?;
            doc.statements.push(Statement::Substitution { name, phi });
        } else {
            let lhs = self.normalized_expr(&doc.context)?;
            let stmt = if self.eat(&Tok::Eq) {
                let rhs = self.normalized_expr(&doc.context)?;
                Statement::Equation(&lhs - &rhs)
            } else {
                Statement::Expression(lhs)
            };
            self.expect(&Tok::Semi)?;
            doc.statements.push(stmt);
        }
        Ok(())
    }

    fn optional_name(&mut self) -> Result<Option<String>> {
        if let Tok::Ident(_) = self.peek().tok {
            Ok(Some(self.ident()?.0))
        } else {
            Ok(None)
        }
    }

    /// `key = expr; …` for a fixed key set. Missing keys default to zero.
    fn fields<const N: usize>(&mut self, ctx: &Context, keys: &[&str; N], end: &Tok) -> Result<[DiffExpr; N]> {
        let mut out: [Option<DiffExpr>; N] = std::array::from_fn(|_| None);
        while !self.at(end) {
            let (key, tok) = self.ident()?;
            let Some(i) = keys.iter().position(|k| *k == key) else {
                return Err(Error::Syntax {
                    line: tok.line,
                    col: tok.col,
                    msg: format!("unexpected field `{key}`, expected one of {}", keys.join(", ")),
                });
            };
            if out[i].is_some() {
                return Err(Error::Syntax { line: tok.line, col: tok.col, msg: format!("field `{key}` given twice") });
            }
            self.expect(&Tok::Eq)?;
            out[i] = Some(self.normalized_expr(ctx)?);
            if !self.eat(&Tok::Semi) {
                break;
            }
        }
        Ok(out.map(|e| e.unwrap_or_default()))
    }

    // ---- expressions -----------------------------------------------------

    fn normalized_expr(&mut self, ctx: &Context) -> Result<DiffExpr> {
        let raw = self.expr(ctx)?;
        normalize(&raw, ctx.order_cap())
    }

    fn expr(&mut self, ctx: &Context) -> Result<RawExpr> {
        let mut terms = vec![self.term(ctx)?];
        loop {
            if self.eat(&Tok::Plus) {
                terms.push(self.term(ctx)?);
            } else if self.eat(&Tok::Minus) {
                terms.push(RawExpr::Neg(Box::new(self.term(ctx)?)));
            } else {
                break;
            }
        }
        Ok(if terms.len() == 1 { terms.pop().unwrap() } else { RawExpr::Add(terms) })
    }

    fn term(&mut self, ctx: &Context) -> Result<RawExpr> {
        let negate = self.eat(&Tok::Minus);
        let mut acc = self.factor(ctx)?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.factor(ctx)?;
                acc = match acc {
                    RawExpr::Mul(mut v) => {
                        v.push(rhs);
                        RawExpr::Mul(v)
                    }
                    other => RawExpr::Mul(vec![other, rhs]),
                };
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor(ctx)?;
                acc = RawExpr::Div(Box::new(acc), Box::new(rhs));
            } else {
                break;
            }
        }
        Ok(if negate { RawExpr::Neg(Box::new(acc)) } else { acc })
    }

    fn factor(&mut self, ctx: &Context) -> Result<RawExpr> {
        let base = self.base(ctx)?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let here = self.peek().clone();
        let negative = if self.eat(&Tok::Minus) {
            true
        } else {
            self.eat(&Tok::Plus);
            false
        };
        match &self.peek().tok {
            Tok::Int(n) => {
                let n = n.clone();
                let bad = self.peek().clone();
                self.bump();
                let exp: i64 = i64::try_from(&n).map_err(|_| Error::Syntax {
                    line: bad.line,
                    col: bad.col,
                    msg: "exponent too large".into(),
                })?;
                // `u^2/3` is `(u^2)/3`; a literal exponent followed by `/` is fine,
                // but `u^(1/2)` or `u^p` is not an integer literal.
                Ok(RawExpr::Pow(Box::new(base), if negative { -exp } else { exp }))
            }
            _ => Err(Error::NonIntegerExponent { line: here.line, col: here.col }),
        }
    }

    fn base(&mut self, ctx: &Context) -> Result<RawExpr> {
        let tok = self.peek().clone();
        match &tok.tok {
            Tok::Int(n) => {
                self.bump();
                Ok(RawExpr::Num(BigRational::from_integer(n.clone())))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr(ctx)?;
                self.expect(&Tok::RParen)?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(name, &tok, ctx)
            }
            other => self.error(format!("expected an operand, found {}", other.describe())),
        }
    }

    fn skip_t_argument(&mut self) -> Result<()> {
        if self.at(&Tok::LParen) && matches!(self.peek_at(1), Tok::Ident(s) if s == "t") {
            self.bump();
            self.bump();
            self.expect(&Tok::RParen)?;
        }
        Ok(())
    }

    fn identifier(&mut self, name: &str, tok: &Token, ctx: &Context) -> Result<RawExpr> {
        let (line, col) = (tok.line, tok.col);
        match name {
            "t" => return Ok(RawExpr::Atom(Atom::Indep(Var::T))),
            "x" => return Ok(RawExpr::Atom(Atom::Indep(Var::X))),
            "u" => return Ok(RawExpr::Atom(Atom::Jet(Jet::u(0, 0)))),
            "v" => return Ok(RawExpr::Atom(Atom::Jet(Jet::v(0, 0)))),
            "ln" => {
                self.expect(&Tok::LParen)?;
                let arg = self.expr(ctx)?;
                self.expect(&Tok::RParen)?;
                return Ok(RawExpr::Ln(Box::new(arg)));
            }
            _ => {}
        }
        if ctx.is_param(name) {
            return Ok(RawExpr::Atom(Atom::param(name)));
        }
        let stripped = name.trim_end_matches('\'');
        if ctx.is_func(stripped) {
            let primes = (name.len() - stripped.len()) as u8;
            if primes > 0 && matches!(ctx.rule(stripped), Some(DerivativeRule::Explicit(_))) {
                return Err(Error::Syntax {
                    line,
                    col,
                    msg: format!("`{stripped}` has an explicit derivative rule; primes are not allowed"),
                });
            }
            self.skip_t_argument()?;
            return Ok(RawExpr::Atom(Atom::Coeff(CoeffFn { name: stripped.into(), primes })));
        }
        if ctx.is_unknown(name) {
            return Ok(RawExpr::Atom(Atom::Unknown(UnknownFn { name: name.into(), partials: Partials::default() })));
        }
        if name.contains('\'') {
            return Err(Error::Undeclared { line, col, name: stripped.to_string() });
        }
        let Some((head, sub)) = name.split_once('_') else {
            return Err(Error::Undeclared { line, col, name: name.to_string() });
        };
        match head {
            "u" | "v" => {
                let dep = if head == "u" { crate::expr::Dep::U } else { crate::expr::Dep::V };
                let (mut nt, mut nx, mut seen_x, mut reordered) = (0u32, 0u32, false, false);
                for c in sub.chars() {
                    match c {
                        't' => {
                            nt += 1;
                            reordered |= seen_x;
                        }
                        'x' => {
                            nx += 1;
                            seen_x = true;
                        }
                        _ => {
                            return Err(Error::Syntax {
                                line,
                                col,
                                msg: format!("invalid jet subscript `{sub}` (only t and x are allowed)"),
                            })
                        }
                    }
                }
                if sub.is_empty() {
                    return Err(Error::Syntax { line, col, msg: "empty jet subscript".into() });
                }
                let order = nt + nx;
                if order > ctx.order_cap() as u32 {
                    return Err(Error::OrderCap { order, cap: ctx.order_cap() });
                }
                let jet = Jet::new(dep, nt as u8, nx as u8);
                if reordered {
                    self.warnings.push(Warning {
                        line,
                        col,
                        message: format!("`{name}` read as `{jet}` (t-derivatives are written first)"),
                    });
                }
                Ok(RawExpr::Atom(Atom::Jet(jet)))
            }
            _ if ctx.is_unknown(head) => {
                let mut p = Partials::default();
                for c in sub.chars() {
                    match c {
                        'x' => p.x += 1,
                        't' => p.t += 1,
                        'u' => p.u += 1,
                        _ => {
                            return Err(Error::Syntax {
                                line,
                                col,
                                msg: format!("invalid partial-derivative subscript `{sub}`"),
                            })
                        }
                    }
                }
                Ok(RawExpr::Atom(Atom::Unknown(UnknownFn { name: head.into(), partials: p })))
            }
            _ if ctx.is_declared(head) => Err(Error::JetOnNonDependent { line, col, name: head.to_string() }),
            _ => Err(Error::Undeclared { line, col, name: name.to_string() }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::equal;

    fn ctx() -> Context {
        let mut c = Context::new();
        for p in ["p", "c1", "c2", "c3"] {
            c.declare_param(p).unwrap();
        }
        for f in ["a", "b", "c", "d"] {
            c.declare_func(f, DerivativeRule::Primes).unwrap();
        }
        c
    }

    #[test]
    fn print_of_parse_merges() {
        assert_eq!(parse_expr("u*u_x + u_x*u", &ctx()).unwrap().to_string(), "2*u*u_x");
        assert_eq!(parse_expr("0", &ctx()).unwrap().to_string(), "0");
    }

    #[test]
    fn mixed_jet_spellings_agree() {
        let (a, w) = parse_expr_with_warnings("u_xt", &ctx()).unwrap();
        let b = parse_expr("u_tx", &ctx()).unwrap();
        assert!(equal(&a, &b));
        assert_eq!(w.len(), 1);
    }

    #[test]
    fn equation_document() {
        let doc = parse(
            "func a(t); func b(t); func c(t); func d(t);\n\
             u_t + d(t)*u_xxxxx + a(t)*u*u_xxx + b(t)*u_x*u_xx + c(t)*u^2*u_x = 0;",
        )
        .unwrap();
        let f = doc.equation_lhs().unwrap();
        assert_eq!(f.len(), 5);
        assert!(f.to_string().contains("d*u_xxxxx"));
    }

    #[test]
    fn symmetry_block() {
        let doc = parse("param p; u_t = 0; symmetry { tau = 10*t; xi = 2*x; eta = -(4+5*p)*u }").unwrap();
        let s = doc.symmetry(None).unwrap();
        assert_eq!(s.tau.to_string(), "10*t");
        assert_eq!(s.xi.to_string(), "2*x");
        assert_eq!(s.eta.to_string(), "-5*p*u - 4*u");
    }

    #[test]
    fn substitution_statement() {
        let doc = parse("param c1, c2, c3;\nphi = c1*x^2 + c2*x + c3;\nphi named = x/u;").unwrap();
        let subs: Vec<_> = doc.substitutions().collect();
        assert_eq!(subs.len(), 2);
        assert_eq!(subs[0].1.to_string(), "x*c2 + x^2*c1 + c3");
        assert_eq!(doc.substitution("named").unwrap().to_string(), "x*u^-1");
    }

    #[test]
    fn self_referential_rule() {
        let doc = parse("param p; func f(t) deriv = p*f/t;").unwrap();
        match doc.context.rule("f").unwrap() {
            DerivativeRule::Explicit(e) => assert_eq!(e.to_string(), "t^-1*p*f"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn error_positions() {
        assert!(matches!(parse_expr("u + w", &ctx()), Err(Error::Undeclared { line: 1, col: 5, .. })));
        assert!(matches!(parse_expr("u^p", &ctx()), Err(Error::NonIntegerExponent { .. })));
        assert!(matches!(parse_expr("u^(2)", &ctx()), Err(Error::NonIntegerExponent { .. })));
        assert!(matches!(parse_expr("a_x", &ctx()), Err(Error::JetOnNonDependent { .. })));
        assert!(matches!(parse_expr("u_xq", &ctx()), Err(Error::Syntax { .. })));
        assert!(matches!(parse_expr("u_xxxxxxxxxxxxx", &ctx()), Err(Error::OrderCap { order: 13, cap: 12 })));
        assert!(matches!(parse_expr("u +", &ctx()), Err(Error::Syntax { line: 1, col: 4, .. })));
        assert!(matches!(parse("param p; param p;"), Err(Error::DuplicateDeclaration(_))));
    }

    #[test]
    fn symmetry_inline_forms() {
        let c = ctx();
        for text in ["tau = t; eta = -u", "{ tau = t; eta = -u }", "symmetry { tau = t; xi = 0; eta = -u; }"] {
            let s = parse_symmetry(text, &c).unwrap();
            assert_eq!(s.tau.to_string(), "t");
            assert!(s.xi.is_zero());
        }
    }
}
