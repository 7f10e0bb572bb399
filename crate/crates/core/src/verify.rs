//! Named verification suites over catalog entries and versioned reports.

use crate::catalog::{CatalogEntry, CatalogError};
use crate::check::{Claim, Ctx, Identity, Mode};
use crate::curvature::LeviCivita;
use crate::expr::Expr;
use crate::frame::{FrameAlgebra, FrameError};
use crate::g2::{metric_matrix, G2Structure};
use crate::quotient::QuotientError;
use crate::spin7::Spin7Structure;
use serde::Serialize;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;
use thiserror::Error;

/// Version of the report layout; bump on any change to field names or nesting.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    HodgeTransfer,
    TorsionRelations,
    TorsionFreeQuotient,
    LcpQuotient,
    BalancedQuotient,
    Calabi,
    GibbonsHawking,
    RicciOracle,
    HolonomyRank,
    FlatR8,
    BryantSalamon,
    Su3Link,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::HodgeTransfer,
        Suite::TorsionRelations,
        Suite::TorsionFreeQuotient,
        Suite::LcpQuotient,
        Suite::BalancedQuotient,
        Suite::Calabi,
        Suite::GibbonsHawking,
        Suite::RicciOracle,
        Suite::HolonomyRank,
        Suite::FlatR8,
        Suite::BryantSalamon,
        Suite::Su3Link,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::HodgeTransfer => "hodge-transfer",
            Suite::TorsionRelations => "torsion-relations",
            Suite::TorsionFreeQuotient => "torsion-free-quotient",
            Suite::LcpQuotient => "lcp-quotient",
            Suite::BalancedQuotient => "balanced-quotient",
            Suite::Calabi => "calabi",
            Suite::GibbonsHawking => "gibbons-hawking",
            Suite::RicciOracle => "ricci-oracle",
            Suite::HolonomyRank => "holonomy-rank",
            Suite::FlatR8 => "flat-r8",
            Suite::BryantSalamon => "bryant-salamon",
            Suite::Su3Link => "su3-link",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        Suite::ALL
            .iter()
            .copied()
            .find(|x| x.name() == s)
            .ok_or_else(|| format!("unknown suite '{s}'"))
    }
}

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("suite '{suite}' does not apply to '{target}'")]
    NotApplicable { suite: Suite, target: String },
    #[error("no suite applies to '{0}' ({1})")]
    NothingToRun(String, String),
    #[error(transparent)]
    Catalog(#[from] CatalogError),
    #[error(transparent)]
    Quotient(#[from] QuotientError),
    #[error(transparent)]
    Frame(#[from] FrameError),
}

/// Sampling and decision settings for a run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub mode: Mode,
    pub tol: f64,
    pub points: usize,
    pub seed: u64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            mode: Mode::Auto,
            tol: 1e-9,
            points: 20,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckReport {
    pub id: String,
    pub formula: String,
    /// `exact` or `numeric`: the method that decided the check.
    pub mode: Mode,
    /// Zero for exact passes; otherwise the largest relative sampled
    /// difference (`null` when it is not finite).
    pub residual: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct SuiteReport {
    pub suite: Suite,
    pub pass: bool,
    pub checks: Vec<CheckReport>,
    pub wall_time_ms: f64,
}

/// Everything but the wall times is a function of the target and options.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub schema_version: u32,
    pub target: String,
    pub mode: Mode,
    pub seed: u64,
    pub tolerance: f64,
    pub points: usize,
    pub pass: bool,
    pub suites: Vec<SuiteReport>,
    pub wall_time_ms: f64,
}

impl VerificationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }

    pub fn check(&self, suite: Suite, id: &str) -> Option<&CheckReport> {
        self.suites
            .iter()
            .filter(|s| s.suite == suite)
            .flat_map(|s| s.checks.iter())
            .find(|c| c.id == id)
    }
}

/// Prefix quotient-derived ids with the quotient name when an entry has more
/// than one quotient.
fn tag(entry: &CatalogEntry, qname: &str, id: &str) -> String {
    if entry.quotients.len() > 1 {
        format!("{qname}.{id}")
    } else {
        id.to_string()
    }
}

fn retag(entry: &CatalogEntry, qname: &str, ids: Vec<Identity>) -> Vec<Identity> {
    ids.into_iter().map(|i| Identity::new(tag(entry, qname, &i.id), i.formula, i.claim)).collect()
}

/// Spin(7)-structures of the entry, each with the quotient it came from.
fn spin7_structures(entry: &CatalogEntry) -> Vec<(Option<&str>, &Spin7Structure)> {
    let mut out: Vec<(Option<&str>, &Spin7Structure)> = Vec::new();
    if let Some(s) = &entry.spin7 {
        out.push((None, s));
    }
    for (name, q) in &entry.quotients {
        if !out.iter().any(|(_, s)| FrameAlgebra::same(s.alg(), q.spin7().alg())) {
            out.push((Some(name.as_str()), q.spin7()));
        }
    }
    out
}

/// The G2-structure when its coframe is the whole algebra and orthonormal,
/// so that the Levi-Civita oracle sees the induced metric.
fn orthonormal_g2(entry: &CatalogEntry) -> Option<&G2Structure> {
    let g = entry.g2.as_ref()?;
    let alg = g.alg();
    let idx = g.frame_indices()?;
    if alg.dim() != 7 || idx.len() != 7 {
        return None;
    }
    let m = metric_matrix(g.phi(), idx, alg.full_mask());
    let identity = m
        .iter()
        .enumerate()
        .all(|(i, row)| row.iter().enumerate().all(|(j, x)| *x == if i == j { Expr::one() } else { Expr::zero() }));
    identity.then_some(g)
}

/// Rank of the first-order infinitesimal holonomy algebra at each sample
/// point. Pooling curvature over points is not meaningful unless the coframe
/// is parallel, so the claim is that the pointwise rank is the expected value
/// everywhere.
fn holonomy_identity(lc: &LeviCivita, expected: Option<usize>, ctx: &Ctx, id: String) -> Result<Identity, VerifyError> {
    let mut ranks = Vec::with_capacity(ctx.points.len());
    let mut stable = true;
    let diffs = lc.curvature_differentials();
    for p in &ctx.points {
        let h = lc.infinitesimal_holonomy_rank(p, &diffs).map_err(FrameError::from)?;
        stable &= h.stable;
        ranks.push(h.rank);
    }
    let (lo, hi) = (ranks.iter().min().copied().unwrap_or(0), ranks.iter().max().copied().unwrap_or(0));
    let observed = if lo == hi { format!("{lo}") } else { format!("{lo}..{hi}") };
    let (holds, formula, residual) = match expected {
        Some(n) => (
            stable && lo == n && hi == n,
            format!("span of R and ∇R has rank {n} at every point (observed {observed})"),
            ranks.iter().map(|&r| (r as f64 - n as f64).abs()).fold(0.0, f64::max),
        ),
        None => (
            stable && lo == hi,
            format!("span of R and ∇R has constant rank (observed {observed})"),
            (hi - lo) as f64,
        ),
    };
    Ok(Identity::new(id, formula, Claim::Fact { holds, residual }))
}

/// The identities a suite produces on an entry, or `None` when the suite
/// has nothing to say about it.
pub fn suite_identities(entry: &CatalogEntry, suite: Suite, ctx: &Ctx) -> Result<Option<Vec<Identity>>, VerifyError> {
    let mut out: Vec<Identity> = Vec::new();
    let mut applies = false;
    match suite {
        Suite::HodgeTransfer => {
            for (name, q) in &entry.quotients {
                applies = true;
                out.extend(retag(entry, name, q.hodge_transfer()));
            }
        }
        Suite::TorsionRelations => {
            for (name, q) in &entry.quotients {
                applies = true;
                let t = q.torsion();
                out.extend(retag(entry, name, q.torsion_relations(&t)));
                out.extend(retag(entry, name, vec![q.round_trip(ctx)?]));
            }
            if entry.quotients.is_empty() {
                if let Some(g) = &entry.g2 {
                    applies = true;
                    out.extend(g.type_identities(&g.torsion(), "g2"));
                }
                if let Some(s) = &entry.spin7 {
                    applies = true;
                    let t = s.torsion();
                    out.push(Identity::new(
                        "spin7.t5_type",
                        "∗T⁵∧Φ = 0",
                        Claim::Forms(t.t5.hodge().wedge(s.phi()), crate::frame::Form::zero(s.alg(), 7)),
                    ));
                }
            }
        }
        Suite::RicciOracle => {
            for (qname, s) in spin7_structures(entry) {
                applies = true;
                let lc = LeviCivita::new(s.alg());
                let t = s.torsion();
                let o = s.alg().clone();
                let id = |x: &str| match qname {
                    Some(n) => tag(entry, n, x),
                    None => x.to_string(),
                };
                out.push(Identity::new(
                    id("ricci.scal"),
                    "Scal = (7/2)δT¹ + (21/8)|T¹|² - ½|T⁵|²",
                    Claim::Scalars(o.clone(), lc.scalar(), s.scal_formula(&t)),
                ));
                out.push(Identity::new(
                    id("ricci.tensor"),
                    "Ric = (…)g + j(-3δ(T¹∧Φ) + 4δT⁵ - 2T¹∧∗T⁵ - (9/4)∗(T¹∧Φ)∧T¹) + ½g(·⌟∗T⁵, ·⌟∗T⁵) agrees with the Levi-Civita Ricci tensor",
                    Claim::Tensors(o.clone(), lc.ricci(), s.ricci_formula(&t)),
                ));
                out.push(Identity::new(
                    id("ricci.tensor_corrected"),
                    "Ric with mixed term +j(T¹∧∗T⁵) agrees with the Levi-Civita Ricci tensor",
                    Claim::Tensors(o, lc.ricci(), s.ricci_formula_corrected(&t)),
                ));
            }
            if let Some(g) = orthonormal_g2(entry) {
                applies = true;
                let lc = LeviCivita::new(g.alg());
                out.push(Identity::new(
                    "ricci.g2_scal",
                    "Scal = 12δτ₁ + (21/8)τ₀² + 30|τ₁|² - ½|τ₂|² - ½|τ₃|²",
                    Claim::Scalars(g.alg().clone(), lc.scalar(), g.scal_formula(&g.torsion())),
                ));
            }
            for (name, q) in entry.quotients.iter().filter(|(_, q)| q.s().is_one()) {
                let t = q.torsion();
                let mut ids = q.torsion_budget(&t);
                ids.push(q.submersion_scal(&t));
                out.extend(retag(entry, name, ids));
            }
        }
        Suite::HolonomyRank => {
            if let Some((_, s)) = spin7_structures(entry).first() {
                applies = true;
                let lc = LeviCivita::new(s.alg());
                out.push(holonomy_identity(&lc, entry.holonomy_rank, ctx, "holonomy.rank".into())?);
            } else if let Some(g) = orthonormal_g2(entry) {
                applies = true;
                let lc = LeviCivita::new(g.alg());
                out.push(holonomy_identity(&lc, entry.holonomy_rank, ctx, "holonomy.rank".into())?);
            }
        }
        _ => {}
    }
    if let Some(extra) = entry.extra_checks(suite, ctx) {
        applies = true;
        out.extend(extra?);
    }
    Ok(applies.then_some(out))
}

/// The suites with anything to check on an entry.
pub fn applicable_suites(entry: &CatalogEntry) -> Vec<Suite> {
    Suite::ALL
        .into_iter()
        .filter(|&s| match s {
            Suite::HodgeTransfer => !entry.quotients.is_empty(),
            Suite::TorsionRelations => {
                !entry.quotients.is_empty() || entry.g2.is_some() || entry.spin7.is_some()
            }
            Suite::RicciOracle => {
                !spin7_structures(entry).is_empty() || orthonormal_g2(entry).is_some() || entry.has_extra(s)
            }
            Suite::HolonomyRank => {
                !spin7_structures(entry).is_empty() || orthonormal_g2(entry).is_some() || entry.has_extra(s)
            }
            _ => entry.has_extra(s),
        })
        .collect()
}

/// Judge identities on worker threads and return reports sorted by id.
fn judge_all(ids: Vec<Identity>, ctx: &Ctx) -> Vec<CheckReport> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(ids.len().max(1));
    let chunk = ids.len().div_ceil(workers).max(1);
    let mut out: Vec<CheckReport> = std::thread::scope(|scope| {
        let handles: Vec<_> = ids
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    part.iter()
                        .map(|i| {
                            let o = ctx.judge(&i.claim);
                            CheckReport {
                                id: i.id.clone(),
                                formula: i.formula.clone(),
                                mode: o.mode,
                                residual: o.residual,
                                pass: o.pass,
                            }
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("check thread panicked")).collect()
    });
    out.sort_by(|a, b| a.id.cmp(&b.id));
    out
}

/// Run one suite on an entry.
pub fn run_suite(entry: &CatalogEntry, suite: Suite, ctx: &Ctx) -> Result<SuiteReport, VerifyError> {
    let start = Instant::now();
    let ids = suite_identities(entry, suite, ctx)?.ok_or_else(|| VerifyError::NotApplicable {
        suite,
        target: entry.id.clone(),
    })?;
    let checks = judge_all(ids, ctx);
    Ok(SuiteReport {
        suite,
        pass: checks.iter().all(|c| c.pass),
        checks,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Run the given suites (all applicable ones when `suites` is `None`).
pub fn run(entry: &CatalogEntry, suites: Option<&[Suite]>, opts: &RunOptions) -> Result<VerificationReport, VerifyError> {
    let start = Instant::now();
    let ctx = Ctx::new(&entry.alg, opts.mode, opts.tol, opts.points, opts.seed)?;
    let chosen: Vec<Suite> = match suites {
        Some(s) => s.to_vec(),
        None => applicable_suites(entry),
    };
    if chosen.is_empty() {
        return Err(VerifyError::NothingToRun(entry.id.clone(), entry.summary.clone()));
    }
    let reports = chosen
        .iter()
        .map(|&s| run_suite(entry, s, &ctx))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(VerificationReport {
        schema_version: REPORT_SCHEMA_VERSION,
        target: entry.id.clone(),
        mode: opts.mode,
        seed: opts.seed,
        tolerance: opts.tol,
        points: opts.points,
        pass: reports.iter().all(|r| r.pass),
        suites: reports,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("no-such-suite".parse::<Suite>().is_err());
    }

    #[test]
    fn inapplicable_suite_is_an_error() {
        let e = catalog::load("gh_flat").unwrap();
        let err = run(&e, Some(&[Suite::FlatR8]), &RunOptions::default()).unwrap_err();
        assert!(matches!(err, VerifyError::NotApplicable { .. }));
    }

    #[test]
    fn report_is_sorted_and_deterministic() {
        let e = catalog::load("flat_T8").unwrap();
        let opts = RunOptions::default();
        let a = run(&e, Some(&[Suite::TorsionRelations]), &opts).unwrap();
        let b = run(&e, Some(&[Suite::TorsionRelations]), &opts).unwrap();
        let ids: Vec<&str> = a.suites[0].checks.iter().map(|c| c.id.as_str()).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        assert_eq!(ids, sorted);
        let strip = |r: &VerificationReport| {
            r.suites[0].checks.iter().map(|c| (c.id.clone(), c.pass, c.residual.to_bits())).collect::<Vec<_>>()
        };
        assert_eq!(strip(&a), strip(&b));
    }

    #[test]
    fn check_ids_are_unique_per_suite() {
        for id in catalog::IDS {
            let e = catalog::load(id).unwrap();
            let ctx = Ctx::new(&e.alg, Mode::Auto, 1e-9, 2, 0).unwrap();
            for s in applicable_suites(&e) {
                if matches!(s, Suite::RicciOracle | Suite::HolonomyRank) {
                    continue;
                }
                let ids = suite_identities(&e, s, &ctx).unwrap().unwrap();
                let mut names: Vec<&str> = ids.iter().map(|i| i.id.as_str()).collect();
                names.sort();
                let n = names.len();
                names.dedup();
                assert_eq!(n, names.len(), "{id} {s}");
            }
        }
    }
}
