//! One test per acceptance criterion. Each writes its verdict and measured
//! numbers to stderr (bypassing output capture) before asserting.

use std::io::Write;

use layerheat_harness::checks::{by_id, run_check};

fn criterion(id: &str) {
    let check = by_id(id).expect("known criterion");
    let outcome = run_check(check);
    let report = outcome.report();
    let mut err = std::io::stderr().lock();
    writeln!(err, "{report}").expect("stderr");
    assert!(outcome.passed(), "{report}");
}

#[test]
fn criterion_01_two_layer_eigenvalue_approximations() {
    criterion("1");
}

#[test]
fn criterion_02_freezing_slab_reference_run() {
    criterion("2");
}

#[test]
fn criterion_03_closed_form_kernels() {
    criterion("3");
}

#[test]
fn criterion_04_density_against_finite_differences() {
    criterion("4");
}

#[test]
fn criterion_05_constant_interface_identities() {
    criterion("5");
}

#[test]
fn criterion_06_three_layer_determinant_zeros() {
    criterion("6");
}

#[test]
fn criterion_07_eigenbasis_orthogonality() {
    criterion("7");
}

#[test]
fn criterion_08_flat_medium_reductions() {
    criterion("8");
}

#[test]
fn criterion_09_volterra_convergence() {
    criterion("9");
}

#[test]
fn criterion_10_linear_interface_routes() {
    criterion("10");
}

#[test]
fn criterion_11_branch_cut_sifting() {
    criterion("11");
}
