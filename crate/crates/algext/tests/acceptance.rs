//! The acceptance suite: one test per shipped criterion, each printing a
//! single pass/fail line. Every tolerance is pinned inside the criterion
//! drivers; budgets come from the defaults (the `ALGEXT_BUDGET_OVERRIDE`
//! environment variable can scale budgets for CI, never tolerances).

use algext::config::Budgets;
use algext::experiments::run_criterion;

fn check(id: &str) {
    let budgets = Budgets::default().with_env_override();
    let report = run_criterion(id, budgets).expect("criterion must run");
    let verdict = if report.pass { "PASS" } else { "FAIL" };
    println!("ACCEPT {} {}: {verdict} ({} rows)", report.id, report.name, report.rows.len());
    if !report.pass {
        for row in report.rows.iter().filter(|r| !r.pass) {
            println!("  FAIL {} metric={} bound={} [{}]", row.label, row.metric, row.bound, row.mode);
        }
    }
    assert!(report.pass, "criterion {id} failed");
}

#[test]
fn c01_gabidulin_rank_bound() {
    check("c01");
}

#[test]
fn c02_fourier_norms() {
    check("c02");
}

#[test]
fn c03_biased_source_extraction() {
    check("c03");
}

#[test]
fn c04_mod_m_floor() {
    check("c04");
}

#[test]
fn c05_seeded_rank_extractor() {
    check("c05");
}

#[test]
fn c06_rank_extractor_fibers() {
    check("c06");
}

#[test]
fn c07_point_count_bounds() {
    check("c07");
}

#[test]
fn c08_bombieri_empirical() {
    check("c08");
}

#[test]
fn c09_ext11_end_to_end() {
    check("c09");
}

#[test]
fn c10_composition_smoke() {
    check("c10");
}

#[test]
fn c11_min_entropy_floor() {
    check("c11");
}

#[test]
fn c12_affine_extractor() {
    check("c12");
}

#[test]
fn c13_weil_bound() {
    check("c13");
}

#[test]
fn c14_xor_lemma_consistency() {
    check("c14");
}
