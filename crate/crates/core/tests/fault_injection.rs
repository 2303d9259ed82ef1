//! Every verifier check passes on a clean run and fails once its paired
//! corruption is applied.

mod common;

use std::sync::OnceLock;

use common::{explore_bundle, injections, strict_bundle, Bundle, Metric};
use lightsp::verify::{run_check, VerifyOptions, ANY_CHECKS, STRICT_CHECKS};

fn strict() -> &'static (Bundle, Metric) {
    static B: OnceLock<(Bundle, Metric)> = OnceLock::new();
    B.get_or_init(strict_bundle)
}

fn explore() -> &'static (Bundle, Metric) {
    static B: OnceLock<(Bundle, Metric)> = OnceLock::new();
    B.get_or_init(explore_bundle)
}

#[test]
fn every_check_has_an_injection() {
    let names: Vec<&str> = injections().iter().map(|i| i.0).collect();
    for check in ANY_CHECKS.iter().chain(STRICT_CHECKS) {
        assert!(names.contains(check), "no injection for {check}");
    }
}

#[test]
fn clean_runs_pass_every_hard_check() {
    let opts = VerifyOptions::default();
    for (b, m) in [strict(), explore()] {
        let rep = lightsp::verify_all(b, m, &opts);
        assert!(rep.passed(), "{}", rep.table());
    }
}

#[test]
fn each_injection_trips_its_check() {
    let opts = VerifyOptions::default();
    let mut missed = Vec::new();
    for (name, needs_explore, inject) in injections() {
        let (clean, m) = if needs_explore { explore() } else { strict() };
        assert!(!run_check(name, clean, m, &opts).unwrap().failed(), "{name} fails on the clean run");
        let mut b = clean.clone();
        inject(&mut b, m);
        let r = run_check(name, &b, m, &opts).unwrap();
        if !(r.failed() && r.hard) {
            missed.push(name);
        }
    }
    assert!(missed.is_empty(), "injections not caught: {missed:?}");
}

#[test]
fn strict_checks_are_soft_in_explore_mode() {
    let (clean, m) = explore();
    let mut b = clean.clone();
    b.counters.large[0] = 5;
    let r = run_check("ctr_large", &b, m, &VerifyOptions::default()).unwrap();
    assert!(r.failed() && !r.hard);
}
