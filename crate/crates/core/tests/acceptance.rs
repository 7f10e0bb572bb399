//! Acceptance runner: one PASS/FAIL line per criterion, with pinned
//! tolerances. Built with `harness = false` so the lines always reach the
//! `cargo test` output.
//!
//! A stated value that does not hold is printed as FAIL on its criterion
//! line. Such a failure is expected and listed in `KNOWN`; the run exits
//! non-zero only on an unexpected outcome (a new failure, or a known
//! discrepancy that starts to pass). With `--ignored` or
//! `--include-ignored` the stated values are enforced as well, so that run
//! fails for as long as any discrepancy remains.

mod support;

use spinq::catalog::{self, CatalogEntry, IDS};
use spinq::check::{Ctx, Mode};
use spinq::spin7::TorsionClass;
use spinq::verify::{self, CheckReport, RunOptions, Suite, VerificationReport};
use std::collections::{BTreeMap, BTreeSet};
use std::sync::OnceLock;
use std::time::Instant;

const TOL: f64 = 1e-9;
const POINTS: usize = 20;
const SEED: u64 = 0;
const HOLONOMY_POINTS: usize = 10;
const PROPERTY_CASES: u32 = 100;
const HODGE_BUDGET_S: f64 = 10.0;
const NIL_CY_BUDGET_S: f64 = 60.0;

/// Stated values that do not hold. Each failing check is paired with the
/// passing check that carries the corrected statement.
const KNOWN: [(&str, &str, &str); 9] = [
    ("balanced_b5t2_a", "rel.l_map", "rel.l_map_corrected"),
    ("balanced_b5t2_b", "rel.l_map", "rel.l_map_corrected"),
    ("balanced_second_iteration", "rel.l_map", "rel.l_map_corrected"),
    ("gh_link", "link.domega_minus", "link.domega_minus_w2"),
    ("gh_link", "link.scal", "link.scal_levi_civita"),
    ("bs_asd_bundle", "gh.smoothed_closed", "bs.smooth.closed"),
    ("flat_r8_quotient", "fr8.tau_h", "fr8.tau_h_corrected"),
    ("generic_circle_bundle", "rel.l_map", "rel.l_map_corrected"),
    ("generic_circle_bundle", "ricci.tensor", "ricci.tensor_corrected"),
];

fn known(entry: &str, check: &str) -> Option<&'static str> {
    KNOWN.iter().find(|k| k.0 == entry && k.1 == check).map(|k| k.2)
}

fn opts(mode: Mode, points: usize) -> RunOptions {
    RunOptions {
        mode,
        tol: TOL,
        points,
        seed: SEED,
    }
}

/// Full default runs of every catalog entry, shared by the criteria.
fn reports() -> &'static BTreeMap<String, VerificationReport> {
    static CELL: OnceLock<BTreeMap<String, VerificationReport>> = OnceLock::new();
    CELL.get_or_init(|| {
        IDS.iter()
            .map(|id| {
                let e = catalog::load(id).expect("catalog entry builds");
                (id.to_string(), verify::run(&e, None, &opts(Mode::Auto, POINTS)).expect("entry runs"))
            })
            .collect()
    })
}

fn suite_ms(r: &VerificationReport, suite: Suite) -> f64 {
    r.suites.iter().filter(|s| s.suite == suite).map(|s| s.wall_time_ms).sum()
}

/// Outcome of one criterion.
#[derive(Default)]
struct Verdict {
    checked: usize,
    failed: Vec<String>,
    notes: Vec<String>,
    problems: Vec<String>,
    strict: bool,
}

impl Verdict {
    fn new(strict: bool) -> Self {
        Verdict {
            strict,
            ..Default::default()
        }
    }

    fn problem(&mut self, msg: String) {
        self.failed.push(msg.clone());
        self.problems.push(msg);
    }

    /// Record a check that must pass (and, if `exact`, be decided exactly
    /// with zero residual), allowing for the known discrepancies.
    fn require(&mut self, entry: &str, r: &VerificationReport, suite: Suite, id: &str, exact: bool) {
        self.checked += 1;
        let Some(c) = r.check(suite, id) else {
            self.problem(format!("{entry}: {} has no check {id}", suite.name()));
            return;
        };
        let ok = c.pass && (!exact || (c.mode == Mode::Exact && c.residual == 0.0));
        match known(entry, id) {
            Some(fix) => {
                if ok {
                    self.problem(format!("{entry}/{id} now passes; KNOWN is out of date"));
                    return;
                }
                let msg = format!("{entry}/{id} ({})", residual(c));
                if self.strict {
                    self.problems.push(msg.clone());
                }
                self.failed.push(msg);
                match r.check(suite, fix) {
                    Some(f) if f.pass => {
                        let note = format!("{fix} passes");
                        if !self.notes.contains(&note) {
                            self.notes.push(note);
                        }
                    }
                    _ => self.problem(format!("{entry}/{fix} should pass")),
                }
            }
            None if !ok => {
                let how = if c.pass { "not exact".to_string() } else { residual(c) };
                self.problem(format!("{entry}/{id} ({how})"));
            }
            None => {}
        }
    }

    fn require_suite(&mut self, entry: &str, r: &VerificationReport, suite: Suite, exact: bool) {
        let ids: Vec<String> = r
            .suites
            .iter()
            .filter(|s| s.suite == suite)
            .flat_map(|s| s.checks.iter().map(|c| c.id.clone()))
            .collect();
        if ids.is_empty() {
            self.problem(format!("{entry}: {} did not run", suite.name()));
        }
        for id in ids {
            self.require(entry, r, suite, &id, exact);
        }
    }

    fn fact(&mut self, holds: bool, what: String) {
        self.checked += 1;
        if !holds {
            self.problem(what);
        }
    }

    fn pass(&self) -> bool {
        self.failed.is_empty()
    }
}

fn residual(c: &CheckReport) -> String {
    format!("{} residual {:.3e}", c.mode, c.residual)
}

fn criterion_1(v: &mut Verdict) {
    let mut ms = 0.0;
    for id in ["flat_T8", "nil_cy", "balanced_b5t2_a", "balanced_b5t2_b", "balanced_second_iteration"] {
        let e = catalog::load(id).unwrap();
        let r = verify::run(&e, Some(&[Suite::HodgeTransfer]), &opts(Mode::Exact, POINTS)).unwrap();
        ms += suite_ms(&r, Suite::HodgeTransfer);
        v.require_suite(id, &r, Suite::HodgeTransfer, true);
    }
    let e = catalog::load("bs_asd_bundle").unwrap();
    let r = verify::run(&e, Some(&[Suite::HodgeTransfer]), &opts(Mode::Numeric, POINTS)).unwrap();
    ms += suite_ms(&r, Suite::HodgeTransfer);
    v.require_suite("bs_asd_bundle", &r, Suite::HodgeTransfer, false);
    v.fact(ms < HODGE_BUDGET_S * 1e3, format!("runtime {:.1} s", ms / 1e3));
    v.notes.push(format!("runtime {:.2} s < {HODGE_BUDGET_S} s", ms / 1e3));
}

fn criterion_2(v: &mut Verdict) {
    let mut skipped = Vec::new();
    for (id, r) in reports() {
        if r.suites.iter().any(|s| s.suite == Suite::TorsionRelations) {
            v.require_suite(id, r, Suite::TorsionRelations, false);
        } else {
            skipped.push(id.as_str());
        }
    }
    v.notes.push(format!("not applicable: {}", skipped.join(", ")));
}

fn criterion_3(v: &mut Verdict) {
    let start = Instant::now();
    let e = catalog::load("nil_cy").unwrap();
    let r = &reports()["nil_cy"];
    v.require("nil_cy", r, Suite::TorsionFreeQuotient, "tf.dPhi", true);
    v.require_suite("nil_cy", r, Suite::TorsionFreeQuotient, false);
    v.require_suite("nil_cy", r, Suite::RicciOracle, false);
    let h = verify::run(&e, Some(&[Suite::HolonomyRank]), &opts(Mode::Auto, HOLONOMY_POINTS)).unwrap();
    v.require("nil_cy", &h, Suite::HolonomyRank, "holonomy.rank", false);
    if let Some(c) = h.check(Suite::HolonomyRank, "holonomy.rank") {
        v.notes.push(c.formula.clone());
    }
    let secs = (r.wall_time_ms + start.elapsed().as_secs_f64() * 1e3) / 1e3;
    v.fact(secs < NIL_CY_BUDGET_S, format!("runtime {secs:.1} s"));
    v.notes.push(format!("runtime {secs:.2} s < {NIL_CY_BUDGET_S} s"));
}

fn criterion_4(v: &mut Verdict) {
    for id in ["balanced_b5t2_a", "balanced_b5t2_b", "balanced_second_iteration"] {
        let r = &reports()[id];
        v.require(id, r, Suite::BalancedQuotient, "bal.t1", true);
        v.require(id, r, Suite::BalancedQuotient, "bal.deta7", true);
    }
}

fn criterion_5(v: &mut Verdict) {
    let id = "round_s7_ambient";
    let r = &reports()[id];
    for check in [
        "euler.lcp.t5",
        "euler.lcp.f_constant",
        "hopf.tau0",
        "hopf.tau3",
        "hopf.dtau1",
        "hopf.tau1",
        "hopf.tau2",
    ] {
        v.require(id, r, Suite::LcpQuotient, check, false);
    }
}

fn torsion_class(e: &CatalogEntry) -> TorsionClass {
    let s = e.spin7.as_ref().or(e.quotients.first().map(|q| q.1.spin7())).expect("a Spin(7)-structure");
    let ctx = Ctx::new(s.alg(), Mode::Auto, TOL, POINTS, SEED).unwrap();
    s.classify(&s.torsion(), &ctx)
}

fn criterion_6(v: &mut Verdict) {
    let mut classes = BTreeSet::new();
    for id in ["flat_T8", "nil_cy", "balanced_b5t2_a", "round_s7_ambient"] {
        let r = &reports()[id];
        v.require(id, r, Suite::RicciOracle, "ricci.scal", false);
        v.require(id, r, Suite::RicciOracle, "ricci.tensor", false);
        classes.insert(torsion_class(&catalog::load(id).unwrap()).to_string());
    }
    let id = "generic_circle_bundle";
    let r = &reports()[id];
    v.require(id, r, Suite::RicciOracle, "ricci.scal", false);
    v.require(id, r, Suite::RicciOracle, "ricci.tensor", false);
    classes.insert(torsion_class(&catalog::load(id).unwrap()).to_string());
    v.fact(classes.len() == 4, format!("torsion classes covered: {classes:?}"));
    v.notes.push(format!("classes {}", classes.into_iter().collect::<Vec<_>>().join("/")));

    let mut s1 = Vec::new();
    for (id, r) in reports() {
        if r.check(Suite::RicciOracle, "submersion.scal").is_some() {
            s1.push(id.as_str());
            for check in ["budget.norm_t1", "budget.norm_t5", "budget.delta_t1", "submersion.scal"] {
                v.require(id, r, Suite::RicciOracle, check, false);
            }
        }
    }
    v.notes.push(format!("budget and submersion on s ≡ 1: {}", s1.join(", ")));
}

fn criterion_7(v: &mut Verdict) {
    let bs = &reports()["bs_asd_bundle"];
    for check in ["bs.smooth.closed", "bs.smooth.coclosed", "gh.closed", "gh.smoothed_closed"] {
        v.require("bs_asd_bundle", bs, Suite::BryantSalamon, check, false);
    }
    let link = &reports()["gh_link"];
    for check in ["link.domega", "link.domega_minus", "link.extra_norm", "link.scal"] {
        v.require("gh_link", link, Suite::Su3Link, check, false);
    }
}

fn criterion_8(v: &mut Verdict) {
    let id = "flat_r8_quotient";
    let r = &reports()[id];
    v.fact(r.points == POINTS, format!("{id} sampled {} points", r.points));
    for check in ["fr8.lie_x", "fr8.phi", "fr8.H", "fr8.dxi", "fr8.g_omega", "fr8.J", "fr8.tau_h", "fr8.tau_v"] {
        v.require(id, r, Suite::FlatR8, check, false);
    }
}

fn criterion_9(v: &mut Verdict) {
    let hopf = &reports()["gh_hopf"];
    v.require("gh_hopf", hopf, Suite::GibbonsHawking, "gh.monopole", false);
    v.require("gh_hopf", hopf, Suite::GibbonsHawking, "gh_hopf.gamma_closed", false);
    v.require("gh_hopf", hopf, Suite::GibbonsHawking, "gh_hopf.gamma3_display", true);
    v.require("gh_hopf", hopf, Suite::GibbonsHawking, "gh_hopf.gamma_expansion", true);
    v.require("gh_flat", &reports()["gh_flat"], Suite::GibbonsHawking, "gh.orthonormal", true);
}

fn criterion_10(v: &mut Verdict) {
    for (group, what, outcome) in support::run_all(PROPERTY_CASES) {
        v.checked += 1;
        if let Err(e) = outcome {
            v.problem(format!("{group} on {what}: {e}"));
        }
    }
    v.notes.push(format!("{PROPERTY_CASES} cases each"));
}

/// Every claim an entry certifies is decided by a check of its suite, and
/// passes unless it is a known discrepancy.
fn claims_coverage(v: &mut Verdict) {
    for (id, r) in reports() {
        let e = catalog::load(id).unwrap();
        for c in &e.claims {
            v.require(id, r, c.suite, &c.check, false);
        }
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let strict = args.iter().any(|a| a == "--ignored" || a == "--include-ignored");
    let criteria: [(&str, &str, fn(&mut Verdict)); 11] = [
        ("1", "Hodge transfer", criterion_1),
        ("2", "torsion relations", criterion_2),
        ("3", "torsion-free quotient", criterion_3),
        ("4", "balanced lifts", criterion_4),
        ("5", "LCP quotients", criterion_5),
        ("6", "Ricci oracle", criterion_6),
        ("7", "Bryant-Salamon and GH link", criterion_7),
        ("8", "flat R⁸", criterion_8),
        ("9", "Gibbons-Hawking", criterion_9),
        ("10", "property suites", criterion_10),
        ("claims", "catalog claims", claims_coverage),
    ];
    println!("acceptance: tol {TOL:e}, {POINTS} points, seed {SEED}{}", if strict { ", strict" } else { "" });
    let mut problems = Vec::new();
    for (n, name, f) in criteria {
        let mut v = Verdict::new(strict);
        f(&mut v);
        let status = if v.pass() { "PASS" } else { "FAIL" };
        let mut line = format!("criterion {n:>2} {status} {name}: {} checks", v.checked);
        if !v.failed.is_empty() {
            line.push_str(&format!("; failing: {}", v.failed.join("; ")));
        }
        if !v.notes.is_empty() {
            line.push_str(&format!(" [{}]", v.notes.join("; ")));
        }
        println!("{line}");
        problems.extend(v.problems);
    }
    if problems.is_empty() {
        println!("acceptance: every outcome as expected ({} known discrepancies)", KNOWN.len());
    } else {
        for p in &problems {
            println!("acceptance: unexpected: {p}");
        }
        std::process::exit(1);
    }
}
