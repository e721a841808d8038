//! Classified equations and worked conservation-law examples, with a
//! verifier that re-derives every recorded claim.
//!
//! Each entry is an `.nsa` source (embedded at build time) plus metadata:
//! side conditions on the coefficient functions, the expected label of the
//! self-adjointness substitution, negative controls and expected conserved
//! vectors. Expected vectors are tagged as either the published value or
//! the value certified by the divergence check.

use std::fmt;

use crate::adjoint::{nsa_check, Classification, Substitution};
use crate::calculus::{partial_jet, prolonged_action, Equation, PointSymmetry};
use crate::conslaw::{
    density_normalize, ibragimov_vector, is_trivial, localize, transfer_identities_hold, verify_divergence,
    ConservedVector,
};
use crate::context::Context;
use crate::error::{Error, Result};
use crate::expr::{Atom, DiffExpr, Jet};
use crate::parallel::{par_map, Strategy};
use crate::parser::{parse, parse_expr, SourceDocument};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EntryKind {
    Classification,
    WorkedExample,
}

/// Where an expected value comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VectorTag {
    /// Value as published. A mismatch with the tool is flagged, not failed.
    Printed,
    /// Value certified by the divergence check; must match the tool exactly.
    Verified,
}

/// Which output of the construction an expected vector is compared with.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    /// Conserved vector with `v` kept.
    Raw,
    /// After `v = φ`.
    Localized,
    /// After density normalization.
    Normalized,
}

#[derive(Debug, Clone, Copy)]
pub struct ExpectedVector {
    pub symmetry: &'static str,
    /// Name of the substitution; `None` selects the unnamed one.
    pub substitution: Option<&'static str>,
    pub stage: Stage,
    pub tag: VectorTag,
    pub c0: &'static str,
    /// `None` when only the density is recorded.
    pub c1: Option<&'static str>,
}

/// Expected label after fixing some names to values.
#[derive(Debug, Clone, Copy)]
pub struct Specialization {
    pub values: &'static [(&'static str, &'static str)],
    pub classification: Classification,
}

#[derive(Debug, Clone, Copy)]
pub struct CatalogEntry {
    pub id: &'static str,
    pub kind: EntryKind,
    pub title: &'static str,
    pub source: &'static str,
    pub side_conditions: &'static [&'static str],
    /// Label expected for the unnamed substitution.
    pub classification: Option<Classification>,
    pub specializations: &'static [Specialization],
    /// Substitutions that must be refuted.
    pub negative_phis: &'static [&'static str],
    /// Named symmetries in the source that must fail the symmetry check.
    pub non_symmetries: &'static [&'static str],
    pub vectors: &'static [ExpectedVector],
    /// Named substitutions whose vector (for the first valid symmetry) is trivial.
    pub trivial_phis: &'static [&'static str],
    /// Parameter values at which the unnamed substitution gives a trivial vector.
    pub trivial_at: &'static [(&'static str, &'static str)],
    /// Names fixed in the unnamed substitution and the value it must reduce to.
    pub rescaling: Option<(&'static [(&'static str, &'static str)], &'static str)>,
}

impl CatalogEntry {
    pub fn document(&self) -> Result<SourceDocument> {
        parse(self.source)
    }
}

const TRANSLATION: &str = "translation";

const fn classified(
    id: &'static str,
    title: &'static str,
    source: &'static str,
    side_conditions: &'static [&'static str],
    classification: Classification,
) -> CatalogEntry {
    CatalogEntry {
        id,
        kind: EntryKind::Classification,
        title,
        source,
        side_conditions,
        classification: Some(classification),
        specializations: &[],
        negative_phis: &[],
        non_symmetries: &[],
        vectors: &[],
        trivial_phis: &[],
        trivial_at: &[],
        rescaling: None,
    }
}

const fn worked(id: &'static str, title: &'static str, source: &'static str) -> CatalogEntry {
    CatalogEntry {
        id,
        kind: EntryKind::WorkedExample,
        title,
        source,
        side_conditions: &[],
        classification: None,
        specializations: &[],
        negative_phis: &[],
        non_symmetries: &[],
        vectors: &[],
        trivial_phis: &[],
        trivial_at: &[],
        rescaling: None,
    }
}

static ENTRIES: &[CatalogEntry] = &[
    CatalogEntry {
        negative_phis: &["u"],
        ..classified(
            "3-I",
            "third order, b = 3a, c != 0",
            include_str!("fixtures/3-I.nsa"),
            &["d = 0", "a != 0", "b = 3a", "c != 0"],
            Classification::Nonlinear,
        )
    },
    classified(
        "3-II",
        "third order, b = 3a, c = 0",
        include_str!("fixtures/3-II.nsa"),
        &["d = 0", "a != 0", "b = 3a", "c = 0"],
        Classification::Nonlinear,
    ),
    CatalogEntry {
        specializations: &[Specialization { values: &[("c2", "0")], classification: Classification::Quasi }],
        negative_phis: &["u"],
        ..classified(
            "3-III",
            "third order, b = 0, c != 0",
            include_str!("fixtures/3-III.nsa"),
            &["d = 0", "a != 0", "b = 0", "c != 0"],
            Classification::Quasi,
        )
    },
    CatalogEntry {
        specializations: &[Specialization {
            values: &[("c1", "0"), ("c2", "0"), ("c3", "1"), ("c4", "0"), ("c5", "0")],
            classification: Classification::Weak,
        }],
        rescaling: Some((
            &[("a", "1"), ("A", "t"), ("c1", "1"), ("c2", "0"), ("c3", "0"), ("c4", "0"), ("c5", "0")],
            "x^3/u - 6*t",
        )),
        ..classified(
            "3-IV",
            "third order, b = 0, c = 0",
            include_str!("fixtures/3-IV.nsa"),
            &["d = 0", "a != 0", "b = 0", "c = 0", "A' = a"],
            Classification::Weak,
        )
    },
    classified(
        "5-I",
        "fifth order, b != 2a, 3a",
        include_str!("fixtures/5-I.nsa"),
        &["d != 0", "b != 2a", "b != 3a"],
        Classification::Nonlinear,
    ),
    CatalogEntry {
        negative_phis: &["u"],
        ..classified(
            "5-II",
            "fifth order, b = 3a, c != 0",
            include_str!("fixtures/5-II.nsa"),
            &["d != 0", "a != 0", "b = 3a", "c != 0"],
            Classification::Nonlinear,
        )
    },
    classified(
        "5-III",
        "fifth order, b = 3a, c = 0",
        include_str!("fixtures/5-III.nsa"),
        &["d != 0", "a != 0", "b = 3a", "c = 0"],
        Classification::Nonlinear,
    ),
    CatalogEntry {
        specializations: &[Specialization {
            values: &[("c1", "1"), ("c2", "0")],
            classification: Classification::Strict,
        }],
        ..classified(
            "5-IV",
            "fifth order, b = 2a",
            include_str!("fixtures/5-IV.nsa"),
            &["d != 0", "a != 0", "b = 2a"],
            Classification::Quasi,
        )
    },
    CatalogEntry {
        specializations: &[Specialization {
            values: &[("c1", "1"), ("c2", "0")],
            classification: Classification::Strict,
        }],
        ..classified(
            "5-V",
            "fifth order, a = b = 0, c != 0",
            include_str!("fixtures/5-V.nsa"),
            &["d != 0", "a = 0", "b = 0", "c != 0"],
            Classification::Quasi,
        )
    },
    classified(
        "2-R",
        "second order, u_t + b*u_x*u_xx + c*u^2*u_x = 0",
        include_str!("fixtures/2-R.nsa"),
        &["a = 0", "d = 0"],
        Classification::Nonlinear,
    ),
    CatalogEntry {
        non_symmetries: &["perturbed"],
        vectors: &[
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Raw,
                tag: VectorTag::Printed,
                c0: "(t*u*u_xxx + t*u^2*u_x - u)*v",
                c1: None,
            },
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Raw,
                tag: VectorTag::Verified,
                c0: "(t*u*u_xxx + t^2*u^2*u_x - u)*v",
                c1: None,
            },
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Printed,
                c0: "u",
                c1: Some("t*u^3 + 2*u*u_xx - u_x^2/2"),
            },
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Verified,
                c0: "u",
                c1: Some("t*u^3/3 + u*u_xx - u_x^2/2"),
            },
        ],
        ..worked("W31", "scaling symmetry of u_t + u*u_xxx + t*u^2*u_x = 0", include_str!("fixtures/W31.nsa"))
    },
    CatalogEntry {
        vectors: &[
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Raw,
                tag: VectorTag::Printed,
                c0: "-v*u_x",
                c1: Some("v*u_t + u*u_xx*v_x - u*u_x*v_xx - 2*u_x^2*v_x"),
            },
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Localized,
                tag: VectorTag::Printed,
                c0: "-x*u_x/u",
                c1: Some("x*u_t/u + u_xx"),
            },
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Printed,
                c0: "-ln(u)",
                c1: Some("u_xx"),
            },
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Verified,
                c0: "ln(u)",
                c1: Some("u_xx"),
            },
        ],
        trivial_phis: &["one", "inverse"],
        ..worked("W32a", "translation in x for u_t + u*u_xxx = 0, v = x/u", include_str!("fixtures/W32a.nsa"))
    },
    CatalogEntry {
        vectors: &[
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Localized,
                tag: VectorTag::Printed,
                c0: "-x^3*u_x/u + 6*t*u_x",
                c1: None,
            },
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Printed,
                c0: "3*x^2*ln(u)",
                c1: Some("6*u - 6*x*u_x + 3*x^2*u_xx"),
            },
            ExpectedVector {
                symmetry: TRANSLATION,
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Verified,
                c0: "3*x^2*ln(u)",
                c1: Some("6*u - 6*x*u_x + 3*x^2*u_xx"),
            },
        ],
        ..worked("W32b", "translation in x for u_t + u*u_xxx = 0, v = x^3/u - 6t", include_str!("fixtures/W32b.nsa"))
    },
    CatalogEntry {
        vectors: &[
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Printed,
                c0: "(5*p + 2)*u",
                c1: Some("(5*p + 2)/3*f*u^3 + (5*p + 2)*u_xxxx"),
            },
            ExpectedVector {
                symmetry: "scaling",
                substitution: None,
                stage: Stage::Normalized,
                tag: VectorTag::Verified,
                c0: "(5*p + 2)*u",
                c1: Some("(5*p + 2)/3*f*u^3 + (5*p + 2)*u_xxxx"),
            },
        ],
        trivial_at: &[("p", "-2/5")],
        ..worked("W33", "scaling symmetry of u_t + u_xxxxx + t^p*u^2*u_x = 0", include_str!("fixtures/W33.nsa"))
    },
];

pub fn catalog_entries() -> &'static [CatalogEntry] {
    ENTRIES
}

pub fn entry(id: &str) -> Result<&'static CatalogEntry> {
    ENTRIES.iter().find(|e| e.id == id).ok_or_else(|| Error::UnknownEntry(id.to_string()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail,
    /// A published value disagrees with the tool; recorded, not a failure.
    Flagged,
}

impl Outcome {
    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Pass => "PASS",
            Outcome::Fail => "FAIL",
            Outcome::Flagged => "FLAG",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Claim {
    pub name: String,
    pub outcome: Outcome,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EntryReport {
    pub id: String,
    pub claims: Vec<Claim>,
}

impl EntryReport {
    pub fn passed(&self) -> bool {
        self.claims.iter().all(|c| c.outcome != Outcome::Fail)
    }

    pub fn flagged(&self) -> impl Iterator<Item = &Claim> {
        self.claims.iter().filter(|c| c.outcome == Outcome::Flagged)
    }

    pub fn claim(&self, name: &str) -> Option<&Claim> {
        self.claims.iter().find(|c| c.name == name)
    }

    fn push(&mut self, name: impl Into<String>, outcome: Outcome, detail: impl Into<String>) {
        self.claims.push(Claim { name: name.into(), outcome, detail: detail.into() });
    }

    fn check(&mut self, name: impl Into<String>, ok: bool, detail: impl Into<String>) {
        let outcome = if ok { Outcome::Pass } else { Outcome::Fail };
        self.push(name, outcome, detail);
    }

    fn record<T>(&mut self, name: &str, r: Result<T>) -> Option<T> {
        match r {
            Ok(v) => Some(v),
            Err(e) => {
                self.push(name, Outcome::Fail, format!("error: {e}"));
                None
            }
        }
    }
}

impl fmt::Display for EntryReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}: {}", self.id, if self.passed() { "ok" } else { "FAILED" })?;
        for c in &self.claims {
            writeln!(f, "  [{}] {}: {}", c.outcome.as_str(), c.name, c.detail)?;
        }
        Ok(())
    }
}

/// Replaces parameters and undifferentiated coefficient functions by values.
pub fn substitute_names(e: &DiffExpr, values: &[(&str, &str)], ctx: &Context) -> Result<DiffExpr> {
    let parsed: Vec<(&str, DiffExpr)> =
        values.iter().map(|(n, v)| Ok((*n, parse_expr(v, ctx)?))).collect::<Result<_>>()?;
    e.try_map_atoms(&mut |a| {
        let name = match a {
            Atom::Param(p) => p.as_str(),
            Atom::Coeff(c) if c.primes == 0 => c.name.as_str(),
            _ => return Ok(None),
        };
        Ok(parsed.iter().find(|(n, _)| *n == name).map(|(_, v)| v.clone()))
    })
}

struct Loaded {
    doc: SourceDocument,
    eq: Equation,
}

impl Loaded {
    fn ctx(&self) -> &Context {
        &self.doc.context
    }

    fn symmetries(&self, skip: &[&str]) -> Vec<(String, PointSymmetry)> {
        self.doc
            .symmetries()
            .filter(|(n, _)| !n.is_some_and(|n| skip.contains(&n)))
            .map(|(n, s)| (n.unwrap_or("symmetry").to_string(), s.clone()))
            .collect()
    }

    fn substitution(&self, name: Option<&str>) -> Result<Substitution> {
        let phi = match name {
            Some(n) => self.doc.substitution(n)?.clone(),
            None => self
                .doc
                .substitutions()
                .find(|(n, _)| n.is_none())
                .map(|(_, p)| p.clone())
                .ok_or(Error::Missing { kind: "substitution", name: "(unnamed)".into() })?,
        };
        Substitution::new(phi)
    }

    fn vectors(&self, symmetry: &str, phi: Option<&str>) -> Result<[ConservedVector; 3]> {
        let ctx = self.ctx();
        let x = self.doc.symmetry(Some(symmetry))?;
        let raw = ibragimov_vector(&self.eq, x, ctx)?;
        let local = localize(&raw, &self.eq, &self.substitution(phi)?, ctx)?;
        let normal = density_normalize(&local, &self.eq, ctx)?;
        Ok([raw, local, normal])
    }
}

fn load(entry: &CatalogEntry) -> Result<Loaded> {
    let doc = entry.document()?;
    let eq = Equation::new(doc.equation_lhs()?.clone())?;
    Ok(Loaded { doc, eq })
}

fn phi_label(name: Option<&str>) -> String {
    name.map(|n| format!("phi {n}")).unwrap_or_else(|| "phi".into())
}

/// Re-derives every claim recorded for the entry.
pub fn verify_entry(id: &str) -> Result<EntryReport> {
    Ok(verify(entry(id)?))
}

/// Verifies all entries, in catalog order.
pub fn verify_all(strategy: Strategy) -> Vec<EntryReport> {
    par_map(ENTRIES, strategy, verify)
}

fn verify(entry: &CatalogEntry) -> EntryReport {
    let mut report = EntryReport { id: entry.id.to_string(), claims: Vec::new() };
    let Some(loaded) = report.record("parse", load(entry)) else {
        return report;
    };
    let ctx = loaded.ctx();
    let eq = &loaded.eq;

    // Self-adjointness of every recorded substitution.
    let phis: Vec<Option<&str>> = loaded.doc.substitutions().map(|(n, _)| n).collect();
    let mut holding = Vec::new();
    for &name in &phis {
        let label = phi_label(name);
        let Some(sub) = report.record(&label, loaded.substitution(name)) else { continue };
        let Some(r) = report.record(&label, nsa_check(eq, &sub, ctx)) else { continue };
        report.check(
            format!("{label} self-adjoint"),
            r.holds,
            format!("phi = {}, lambda = {}, residual = {}", sub, r.lambda, r.residual),
        );
        let forced = partial_jet(sub.phi(), Jet::u(0, 0), ctx).map(|d| -d);
        if let Some(forced) = report.record(&label, forced) {
            report.check(format!("{label} lambda = -phi_u"), r.lambda == forced, format!("lambda = {}", r.lambda));
        }
        if name.is_none() {
            if let Some(expected) = entry.classification {
                report.check(
                    "classification",
                    r.classification == expected,
                    format!("{} (expected {}; {})", r.classification, expected, r.dependence),
                );
            }
        }
        if r.holds {
            holding.push(name);
        }
    }

    for s in entry.specializations {
        let name = format!("classification at {}", describe_values(s.values));
        let got = loaded.substitution(None).and_then(|sub| {
            let phi = substitute_names(sub.phi(), s.values, ctx)?;
            let sub = Substitution::new(phi)?;
            let r = nsa_check(eq, &sub, ctx)?;
            Ok((sub, r.classification))
        });
        if let Some((sub, c)) = report.record(&name, got) {
            report.check(name, c == s.classification, format!("phi = {sub}: {c} (expected {})", s.classification));
        }
    }

    if let Some((values, expected)) = entry.rescaling {
        let name = "time rescaling";
        let got = loaded
            .substitution(None)
            .and_then(|sub| Ok((substitute_names(sub.phi(), values, ctx)?, parse_expr(expected, ctx)?)));
        if let Some((phi, expected)) = report.record(name, got) {
            report.check(name, phi == expected, format!("phi at {} = {phi}", describe_values(values)));
        }
    }

    for &neg in entry.negative_phis {
        let name = format!("phi = {neg} refuted");
        let got = parse_expr(neg, ctx).and_then(Substitution::new).and_then(|s| nsa_check(eq, &s, ctx));
        if let Some(r) = report.record(&name, got) {
            report.check(name, !r.holds, format!("residual = {}", r.residual));
        }
    }

    // Symmetries and conserved vectors.
    for &bad in entry.non_symmetries {
        let name = format!("{bad} is not a symmetry");
        let got = loaded.doc.symmetry(Some(bad)).and_then(|x| prolonged_action(x, eq, ctx));
        if let Some(r) = report.record(&name, got) {
            report.check(name, !r.is_zero(), format!("prolonged action = {r}"));
        }
    }
    let symmetries = loaded.symmetries(entry.non_symmetries);
    for (sname, x) in &symmetries {
        let name = format!("{sname} symmetry");
        if let Some(r) = report.record(&name, prolonged_action(x, eq, ctx)) {
            report.check(name, r.is_zero(), format!("prolonged action = {r}"));
        }
        let name = format!("{sname} vector conserved with adjoint");
        let Some(raw) = report.record(&name, ibragimov_vector(eq, x, ctx)) else { continue };
        if let Some(r) = report.record(&name, verify_divergence(&raw, eq, true, ctx)) {
            report.check(name, r.is_zero(), format!("divergence = {r}"));
        }
        for &phi in &holding {
            let label = format!("{sname} vector, {}", phi_label(phi));
            let steps = loaded.substitution(phi).and_then(|sub| {
                let local = localize(&raw, eq, &sub, ctx)?;
                let normal = density_normalize(&local, eq, ctx)?;
                let d_local = verify_divergence(&local, eq, false, ctx)?;
                let d_normal = verify_divergence(&normal, eq, false, ctx)?;
                let identities = transfer_identities_hold(&local, &normal, eq, ctx)?;
                Ok((normal, d_local, d_normal, identities))
            });
            if let Some((normal, d_local, d_normal, identities)) = report.record(&label, steps) {
                report.check(
                    format!("{label} localized conserved"),
                    d_local.is_zero(),
                    format!("divergence = {d_local}"),
                );
                report.check(
                    format!("{label} normalized conserved"),
                    d_normal.is_zero(),
                    format!("{normal}, divergence = {d_normal}"),
                );
                report.check(format!("{label} transfer identities"), identities, "exact");
            }
        }
    }

    for ev in entry.vectors {
        check_expected(&mut report, &loaded, ev);
    }

    let first_symmetry = symmetries.first().map(|(n, _)| n.as_str());
    for &phi in entry.trivial_phis {
        let name = format!("{} gives a trivial vector", phi_label(Some(phi)));
        let got = first_symmetry
            .ok_or(Error::Missing { kind: "symmetry", name: "(any)".into() })
            .and_then(|s| loaded.vectors(s, Some(phi)))
            .and_then(|[_, local, normal]| Ok((is_trivial(&local, eq, ctx)?, normal)));
        if let Some((trivial, normal)) = report.record(&name, got) {
            report.check(name, trivial, format!("normalized {normal}"));
        }
    }

    if !entry.trivial_at.is_empty() {
        let name = format!("trivial at {}", describe_values(entry.trivial_at));
        let got = first_symmetry
            .ok_or(Error::Missing { kind: "symmetry", name: "(any)".into() })
            .and_then(|s| trivial_when_specialized(&loaded, s, entry.trivial_at));
        if let Some((trivial, normal)) = report.record(&name, got) {
            report.check(name, trivial, format!("normalized {normal}"));
        }
    }
    report
}

fn describe_values(values: &[(&str, &str)]) -> String {
    values.iter().map(|(n, v)| format!("{n} = {v}")).collect::<Vec<_>>().join(", ")
}

fn trivial_when_specialized(
    loaded: &Loaded,
    symmetry: &str,
    values: &[(&str, &str)],
) -> Result<(bool, ConservedVector)> {
    let mut ctx = loaded.ctx().clone();
    for (name, value) in values {
        let q = parse_expr(value, &ctx)?
            .as_constant()
            .ok_or(Error::InvalidSubstitution(format!("value of `{name}` must be a rational constant")))?;
        ctx = ctx.specialize_param(name, &q)?;
    }
    let fix = |e: &DiffExpr| substitute_names(e, values, &ctx);
    let eq = Equation::new(fix(loaded.eq.lhs())?)?;
    let x = loaded.doc.symmetry(Some(symmetry))?;
    let x = PointSymmetry::new(fix(&x.tau)?, fix(&x.xi)?, fix(&x.eta)?)?;
    let sub = Substitution::new(fix(loaded.substitution(None)?.phi())?)?;
    let local = localize(&ibragimov_vector(&eq, &x, &ctx)?, &eq, &sub, &ctx)?;
    Ok((is_trivial(&local, &eq, &ctx)?, density_normalize(&local, &eq, &ctx)?))
}

fn check_expected(report: &mut EntryReport, loaded: &Loaded, ev: &ExpectedVector) {
    let ctx = loaded.ctx();
    let tag = match ev.tag {
        VectorTag::Printed => "printed",
        VectorTag::Verified => "verified",
    };
    let stage = match ev.stage {
        Stage::Raw => "raw",
        Stage::Localized => "localized",
        Stage::Normalized => "normalized",
    };
    let name = format!("{tag} {stage} vector, {} {}", ev.symmetry, phi_label(ev.substitution));
    let got = (|| {
        let [raw, local, normal] = loaded.vectors(ev.symmetry, ev.substitution)?;
        let tool = match ev.stage {
            Stage::Raw => raw,
            Stage::Localized => local,
            Stage::Normalized => normal,
        };
        let c0 = parse_expr(ev.c0, ctx)?;
        let c1 = ev.c1.map(|s| parse_expr(s, ctx)).transpose()?;
        let divergence = match &c1 {
            Some(c1) => {
                let cv = ConservedVector::new(c0.clone(), c1.clone());
                Some(verify_divergence(&cv, &loaded.eq, cv.depends_on_v(), ctx)?)
            }
            None => None,
        };
        Ok((tool, c0, c1, divergence))
    })();
    let Some((tool, c0, c1, divergence)) = report.record(&name, got) else { return };
    let matches = tool.c0 == c0 && c1.as_ref().is_none_or(|c1| tool.c1 == *c1);
    let conserved = divergence.as_ref().is_none_or(|d| d.is_zero());
    let shown = match &c1 {
        Some(c1) => format!("({c0}, {c1})"),
        None => format!("C0 = {c0}"),
    };
    let divergence_note = divergence.map(|d| format!(", divergence = {d}")).unwrap_or_default();
    match (ev.tag, matches && conserved) {
        (_, true) => report.push(name, Outcome::Pass, format!("{shown}{divergence_note}")),
        (VectorTag::Verified, false) => report.push(
            name,
            Outcome::Fail,
            format!("expected {shown}, tool gives ({}, {}){divergence_note}", tool.c0, tool.c1),
        ),
        (VectorTag::Printed, false) => report.push(
            name,
            Outcome::Flagged,
            format!(
                "published {shown} {} the tool value ({}, {}){divergence_note}",
                if conserved { "differs from" } else { "fails the divergence check; differs from" },
                tool.c0,
                if ev.c1.is_some() { tool.c1.to_string() } else { "..".into() }
            ),
        ),
    }
}
