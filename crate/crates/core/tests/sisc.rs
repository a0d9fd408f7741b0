use asl_sisc::noisy_sim::{BitErrorProfile, ErrorPmf};
use asl_sisc::sisc::{
    check_sparsity_condition, fuse, fuse_wrapping, lattice_mass, pmf_sparsity, FusionParams,
};

fn wrap(v: i64, l: u32) -> i64 {
    let m = v.rem_euclid(1 << l);
    if m >= 1 << (l - 1) {
        m - (1 << l)
    } else {
        m
    }
}

#[test]
fn fusion_recovers_every_small_case() {
    let params = FusionParams::new(8, 4).unwrap();
    assert_eq!(params.step(), 64);
    let mut cases = 0;
    for y_o in -100..=100i64 {
        for eta in [0, 64, -64, 128, -128] {
            for e in -31..=31 {
                let exact = fuse(y_o + eta, y_o + e, &params);
                assert_eq!(exact.y_hat, y_o);
                assert_eq!(exact.eta_hat, eta);
                let hw = fuse_wrapping(wrap(y_o + eta, 8), wrap(y_o + e, 8), &params);
                assert_eq!(hw.y_hat, y_o, "y_o {y_o} eta {eta} e {e}");
                cases += 1;
            }
        }
    }
    assert_eq!(cases, 201 * 5 * 63);
}

#[test]
fn estimator_error_of_half_a_step_breaks_fusion() {
    let params = FusionParams::new(8, 4).unwrap();
    // y_a - y_e = -e, and halfway rounds up: e = +32 is still recovered,
    // e = -32 is not.
    assert_eq!(fuse(10, 10 + 32, &params).y_hat, 10);
    assert_eq!(fuse(10, 10 - 32, &params).y_hat, 10 - 64);
}

#[test]
fn peak_count_sets_the_quantum() {
    assert_eq!(FusionParams::new(16, 1).unwrap().step(), 1 << 16);
    assert_eq!(FusionParams::new(16, 5).unwrap().step(), 1 << 13);
    assert_eq!(FusionParams::new(21, 32).unwrap().step(), 1 << 16);
    assert!(FusionParams::new(8, 0).is_err());
    assert!(FusionParams::new(2, 16).is_err());
    assert!(FusionParams::new(63, 2).is_err());
}

#[test]
fn sparsity_diagnostics_on_a_lattice_pmf() {
    let mut pmf = ErrorPmf::new(8);
    for (v, n) in [(0, 70), (64, 20), (-128, 8), (3, 2)] {
        for _ in 0..n {
            pmf.record(v);
        }
    }
    let r = pmf_sparsity(&pmf, 0.05);
    assert_eq!(r.peaks, vec![-128, 0, 64]);
    assert_eq!(r.min_separation, Some(64));
    assert!((r.tail_mass - 0.02).abs() < 1e-12);
    assert!(r.is_sparse(&FusionParams::new(8, 4).unwrap()));
    assert!(!r.is_sparse(&FusionParams::new(8, 2).unwrap()));
    assert!((lattice_mass(&pmf, 64) - 0.98).abs() < 1e-12);
}

#[test]
fn bit_rate_condition_needs_a_clear_gap() {
    let counts = [1, 2, 1, 3, 40, 50];
    let pass =
        check_sparsity_condition(&BitErrorProfile::from_counts(&counts, 1000), 2, 10.0).unwrap();
    assert!(pass.pass);
    assert!((pass.margin - 40.0 / 3.0).abs() < 1e-12);
    let fail =
        check_sparsity_condition(&BitErrorProfile::from_counts(&counts, 1000), 3, 10.0).unwrap();
    assert!(!fail.pass);
    assert!(
        check_sparsity_condition(&BitErrorProfile::from_counts(&counts, 1000), 6, 10.0).is_err()
    );
}
