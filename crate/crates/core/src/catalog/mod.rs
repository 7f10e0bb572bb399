//! Built-in frame algebras and structures for the worked examples, each
//! carrying the claims it certifies.
//!
//! Entries are built on first use and cached. Every algebra of an entry
//! passes the `d∘d = 0` self-check before the entry is handed out.

mod balanced;
mod bryant_salamon;
mod flat;
mod flat_r8;
mod generic;
mod gibbons_hawking;
mod nil;
mod sphere;

use crate::check::{Ctx, Identity};
use crate::expr::Expr;
use crate::frame::json::Document;
use crate::frame::{AlgebraBuilder, Form, FrameAlgebra, FrameError, Terms, VectorField};
use crate::g2::{G2Error, G2Structure};
use crate::quotient::{GibbonsHawking, QuotientData, QuotientError};
use crate::spin7::{Spin7Error, Spin7Structure};
use crate::verify::Suite;
use serde::Serialize;
use std::collections::{BTreeMap, HashMap};
use std::sync::{Arc, Mutex, OnceLock};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("unknown catalog entry '{0}' (try `list`)")]
    UnknownId(String),
    #[error("self-check of '{id}' failed: {detail}")]
    SelfCheck { id: String, detail: String },
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    G2(#[from] G2Error),
    #[error(transparent)]
    Spin7(#[from] Spin7Error),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
}

/// Where an expected value comes from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    /// Stated in the source worked example.
    Stated,
    /// Computed here by an independent route.
    Computed,
    /// Holds by construction.
    Trivial,
}

/// A claim an entry certifies: the check id that decides it and the suite
/// that produces that check.
#[derive(Clone, Debug, Serialize)]
pub struct ExpectedClaim {
    pub suite: Suite,
    pub check: String,
    pub expected: String,
    pub provenance: Provenance,
}

type Builder = Arc<dyn Fn(&Ctx) -> Result<Vec<Identity>, CatalogError> + Send + Sync>;

/// One worked example. `alg` is the primary algebra; sample points for any
/// check on the entry are drawn from it, and every other algebra of the
/// entry shares its generators.
pub struct CatalogEntry {
    pub id: String,
    pub summary: String,
    pub alg: Arc<FrameAlgebra>,
    pub forms: BTreeMap<String, Form>,
    pub fields: BTreeMap<String, VectorField>,
    pub g2: Option<G2Structure>,
    pub spin7: Option<Spin7Structure>,
    pub quotients: Vec<(String, QuotientData)>,
    pub gh: Option<GibbonsHawking>,
    /// Expected holonomy span rank of the Spin(7) (or G2) metric.
    pub holonomy_rank: Option<usize>,
    /// Named scalar quantities for `eval`.
    pub quantities: BTreeMap<String, Expr>,
    pub claims: Vec<ExpectedClaim>,
    extra: Vec<(Suite, Builder)>,
}

impl std::fmt::Debug for CatalogEntry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "CatalogEntry({})", self.id)
    }
}

impl CatalogEntry {
    fn new(id: &str, summary: &str, alg: &Arc<FrameAlgebra>) -> Self {
        CatalogEntry {
            id: id.to_string(),
            summary: summary.to_string(),
            alg: alg.clone(),
            forms: BTreeMap::new(),
            fields: BTreeMap::new(),
            g2: None,
            spin7: None,
            quotients: Vec::new(),
            gh: None,
            holonomy_rank: None,
            quantities: BTreeMap::new(),
            claims: Vec::new(),
            extra: Vec::new(),
        }
    }

    fn form(&mut self, name: &str, f: Form) -> &mut Self {
        self.forms.insert(name.to_string(), f);
        self
    }

    fn claim(&mut self, suite: Suite, check: &str, expected: &str, provenance: Provenance) -> &mut Self {
        self.claims.push(ExpectedClaim {
            suite,
            check: check.to_string(),
            expected: expected.to_string(),
            provenance,
        });
        self
    }

    fn checks(
        &mut self,
        suite: Suite,
        f: impl Fn(&Ctx) -> Result<Vec<Identity>, CatalogError> + Send + Sync + 'static,
    ) -> &mut Self {
        self.extra.push((suite, Arc::new(f)));
        self
    }

    /// Entry-specific identities for a suite, if the entry has any.
    pub fn extra_checks(&self, suite: Suite, ctx: &Ctx) -> Option<Result<Vec<Identity>, CatalogError>> {
        let builders: Vec<&Builder> = self.extra.iter().filter(|(s, _)| *s == suite).map(|(_, b)| b).collect();
        if builders.is_empty() {
            return None;
        }
        let mut out = Vec::new();
        for b in builders {
            match b(ctx) {
                Ok(v) => out.extend(v),
                Err(e) => return Some(Err(e)),
            }
        }
        Some(Ok(out))
    }

    pub fn has_extra(&self, suite: Suite) -> bool {
        self.extra.iter().any(|(s, _)| *s == suite)
    }

    /// Every algebra the entry refers to.
    pub fn algebras(&self) -> Vec<Arc<FrameAlgebra>> {
        let mut out: Vec<Arc<FrameAlgebra>> = vec![self.alg.clone()];
        let mut push = |a: &Arc<FrameAlgebra>| {
            if !out.iter().any(|b| Arc::ptr_eq(a, b)) {
                out.push(a.clone());
            }
        };
        for f in self.forms.values() {
            push(f.alg());
        }
        if let Some(g) = &self.g2 {
            push(g.alg());
        }
        if let Some(s) = &self.spin7 {
            push(s.alg());
        }
        for (_, q) in &self.quotients {
            push(q.w());
            push(q.spin7().alg());
        }
        if let Some(gh) = &self.gh {
            push(&gh.alg);
        }
        out
    }

    /// The `d∘d = 0` check on every algebra, at eight points.
    fn self_check(&self) -> Result<(), CatalogError> {
        let points = self.alg.sample_points(8, 0)?;
        for a in self.algebras() {
            a.check_d_squared(&points, 1e-9).map_err(|e| CatalogError::SelfCheck {
                id: self.id.clone(),
                detail: e.to_string(),
            })?;
        }
        Ok(())
    }

    /// Canonical JSON of the primary algebra and named forms on it.
    pub fn export(&self) -> String {
        let forms: BTreeMap<String, Form> = self
            .forms
            .iter()
            .filter(|(_, f)| Arc::ptr_eq(f.alg(), &self.alg))
            .map(|(k, f)| (k.clone(), f.clone()))
            .collect();
        crate::frame::json::export(&self.alg, &forms)
    }
}

/// Identifiers of all entries, in listing order.
pub const IDS: [&str; 14] = [
    "flat_T7",
    "flat_T8",
    "flat_R8",
    "nil_cy",
    "balanced_b5t2_a",
    "balanced_b5t2_b",
    "balanced_second_iteration",
    "round_s7_ambient",
    "gh_flat",
    "gh_hopf",
    "bs_asd_bundle",
    "gh_link",
    "flat_r8_quotient",
    "generic_circle_bundle",
];

fn build(id: &str) -> Result<CatalogEntry, CatalogError> {
    match id {
        "flat_T7" => flat::flat_t7(),
        "flat_T8" => flat::flat_t8(),
        "flat_R8" => flat::flat_r8(),
        "nil_cy" => nil::nil_cy(),
        "balanced_b5t2_a" => balanced::variant_a(),
        "balanced_b5t2_b" => balanced::variant_b(),
        "balanced_second_iteration" => balanced::second_iteration(),
        "round_s7_ambient" => sphere::round_s7(),
        "gh_flat" => gibbons_hawking::gh_flat(),
        "gh_hopf" => gibbons_hawking::gh_hopf(),
        "bs_asd_bundle" => bryant_salamon::bs_asd_bundle(),
        "gh_link" => bryant_salamon::gh_link(),
        "flat_r8_quotient" => flat_r8::flat_r8_quotient(),
        "generic_circle_bundle" => generic::generic_circle_bundle(),
        other => Err(CatalogError::UnknownId(other.to_string())),
    }
}

type Cache = Mutex<HashMap<String, Arc<OnceLock<Result<Arc<CatalogEntry>, String>>>>>;

/// Load (building on first use) a catalog entry.
pub fn load(id: &str) -> Result<Arc<CatalogEntry>, CatalogError> {
    if !IDS.contains(&id) {
        return Err(CatalogError::UnknownId(id.to_string()));
    }
    static CACHE: OnceLock<Cache> = OnceLock::new();
    let slot = {
        let mut map = CACHE.get_or_init(Default::default).lock().expect("catalog cache poisoned");
        map.entry(id.to_string()).or_default().clone()
    };
    let res = slot.get_or_init(|| {
        build(id)
            .and_then(|e| e.self_check().map(|_| Arc::new(e)))
            .map_err(|e| e.to_string())
    });
    res.clone().map_err(|detail| CatalogError::SelfCheck {
        id: id.to_string(),
        detail,
    })
}

/// An entry for a user-supplied algebra. A 4-form named `Phi` on an 8-dim
/// algebra becomes the Spin(7)-structure and a 3-form named `phi` on a 7-dim
/// algebra the G2-structure, when they are admissible in the given coframe;
/// the summary records why a structure was skipped. All forms are kept for
/// `eval`.
pub fn from_document(name: &str, doc: Document) -> Result<CatalogEntry, CatalogError> {
    let alg = doc.algebra;
    let mut notes = Vec::new();
    let mut e = CatalogEntry::new(name, "", &alg);
    if let Some(phi) = doc.forms.get("Phi").filter(|f| f.deg() == 4 && alg.dim() == 8) {
        match Spin7Structure::new(&alg, phi.clone()) {
            Ok(s) => e.spin7 = Some(s),
            Err(err) => notes.push(format!("Phi skipped: {err}")),
        }
    }
    if let Some(phi) = doc.forms.get("phi").filter(|f| f.deg() == 3 && alg.dim() == 7) {
        match G2Structure::frame(&alg, &(0..7).collect::<Vec<_>>(), phi.clone()) {
            Ok(g) => e.g2 = Some(g),
            Err(err) => notes.push(format!("phi skipped: {err}")),
        }
    }
    e.summary = std::iter::once("user-supplied frame algebra".to_string()).chain(notes).collect::<Vec<_>>().join("; ");
    e.forms = doc.forms;
    e.self_check()?;
    Ok(e)
}

/// Labels `p0, p1, ...` or `p1, p2, ...`.
fn labels(prefix: &str, range: std::ops::Range<usize>) -> Vec<String> {
    range.map(|i| format!("{prefix}{i}")).collect()
}

/// The algebra with a new coframe element `η` at index 0 whose differential
/// is the basic 2-form `deta` of `base`; the base coframe moves to 1..n.
fn with_connection(base: &Arc<FrameAlgebra>, name: &str, eta: &str, deta: &Form) -> Result<Arc<FrameAlgebra>, FrameError> {
    let mut lab = vec![eta.to_string()];
    lab.extend(base.labels().iter().cloned());
    let shift = |t: &Terms| -> Terms { t.iter().map(|(m, c)| (m << 1, c.clone())).collect() };
    let mut b = AlgebraBuilder::with_labels(name, lab).structure_terms(0, shift(deta.terms()));
    for a in 0..base.dim() {
        b = b.structure_terms(a + 1, shift(base.structure_terms(a)));
    }
    for (s, info) in base.generators() {
        b = b.generator_terms(s.as_str(), info.positive, info.sampler.clone(), shift(&info.d));
    }
    b.build()
}

/// A form of `base` re-expressed on an algebra built by [`with_connection`].
fn lift(f: &Form, w: &Arc<FrameAlgebra>) -> Form {
    Form::from_terms(w, f.deg(), f.terms().iter().map(|(m, c)| (m << 1, c.clone())).collect())
}

/// Sum of signed basis terms, indices as given.
fn terms(alg: &Arc<FrameAlgebra>, deg: usize, t: &[(i64, &[usize])]) -> Form {
    t.iter().fold(Form::zero(alg, deg), |acc, (c, idx)| acc.add(&Form::term(alg, Expr::int(*c), idx)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_id_is_rejected() {
        assert!(matches!(load("no_such_entry"), Err(CatalogError::UnknownId(_))));
    }

    #[test]
    fn every_entry_loads_and_passes_its_self_check() {
        for id in IDS {
            let e = load(id).unwrap_or_else(|err| panic!("{id}: {err}"));
            assert_eq!(e.id, id);
        }
    }
}
