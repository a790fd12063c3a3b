//! End-to-end runs of the compatibility checkers on the bundled models:
//! the suspension and the product must pass every criterion, the warped
//! plane must fail the two that detect non-projectable metrics, and both
//! execution modes must produce bit-identical reports.

use foliage_core::criteria::{
    check_biconditional, check_lewis, check_orthogonal_transport, check_projectability,
    check_totally_geodesic, check_transversal_completeness, SamplingPlan,
};
use foliage_core::metric::{Axis, Domain, MetricField};
use foliage_core::model::{FoliationModel, IntMat2, SuspensionModel};
use foliage_core::report::{Tolerance, Verdict};
use foliage_core::ExecMode;
use nalgebra::DMatrix;

fn suspension() -> FoliationModel {
    SuspensionModel::new(IntMat2::new(2, 1, 1, 1), 1.0)
        .unwrap()
        .into_model()
}

fn minkowski_product() -> FoliationModel {
    let leaf = MetricField::new(
        Domain::new(vec![
            Axis::Line { sample_lo: -1.0, sample_hi: 1.0 },
            Axis::Line { sample_lo: -1.0, sample_hi: 1.0 },
        ]),
        |_| DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]),
    );
    let trans = MetricField::new(
        Domain::new(vec![Axis::Periodic { period: 1.0 }]),
        |_| DMatrix::identity(1, 1),
    );
    FoliationModel::product("minkowski-product", &leaf, &trans).unwrap()
}

#[test]
fn the_suspension_passes_every_checker() {
    let m = suspension();
    let plan = SamplingPlan::new(7, 24);
    let tol = Tolerance::default();

    let reports = [
        check_orthogonal_transport(&m, plan, 2.0, 1e-3, tol),
        check_lewis(&m, plan, tol),
        check_projectability(&m, plan, tol),
        check_totally_geodesic(&m, plan, 8, 2.0, 1e-3, tol),
        check_transversal_completeness(&m, plan, 20.0, 1e-2),
    ];
    for rep in &reports {
        assert!(
            rep.passed(),
            "{} should pass on the suspension: {}",
            rep.check,
            rep.summary_line()
        );
        assert!(rep.sample_count >= 24, "{}", rep.check);
    }

    let bi = check_biconditional(&m, plan, 2.0, 1e-3, tol);
    assert!(bi.agree);
    assert!(bi.leaf_nondegenerate);
    assert!(bi.orthogonal.passed() && bi.lewis.passed());
    let collapsed = bi.as_check_report();
    assert!(collapsed.passed(), "{}", collapsed.summary_line());
    assert_eq!(collapsed.check, "biconditional");
}

#[test]
fn the_flat_product_passes_every_checker() {
    let m = minkowski_product();
    let plan = SamplingPlan::new(3, 16);
    let tol = Tolerance::default();

    assert!(check_orthogonal_transport(&m, plan, 2.0, 1e-3, tol).passed());
    assert!(check_lewis(&m, plan, tol).passed());
    assert!(check_projectability(&m, plan, tol).passed());
    assert!(check_totally_geodesic(&m, plan, 8, 2.0, 1e-3, tol).passed());
    assert!(check_transversal_completeness(&m, plan, 20.0, 1e-2).passed());
    assert!(check_biconditional(&m, plan, 2.0, 1e-3, tol).agree);
}

#[test]
fn the_warped_plane_fails_both_detectors_in_agreement() {
    let m = FoliationModel::warped_counterexample();
    let plan = SamplingPlan::new(11, 24);
    let tol = Tolerance::default();

    // The transverse coefficient e^{2x} changes along leaves; its leafwise
    // derivative is 2 e^{2x} ≥ 2 on x ≥ 0, far above any tolerance.
    let lewis = check_lewis(&m, plan, tol);
    assert_eq!(lewis.verdict, Verdict::Fail, "{}", lewis.summary_line());
    assert!(lewis.max_residual >= 1.0, "residual {}", lewis.max_residual);
    let witness = lewis
        .samples
        .iter()
        .max_by(|a, b| a.value.total_cmp(&b.value))
        .unwrap();
    assert!(
        witness.location[0] >= 0.0,
        "largest violation should sit at x ≥ 0, got {:?}",
        witness.location
    );

    // A leaf-orthogonal frame drifts measurably within unit parameter time.
    let orth = check_orthogonal_transport(&m, plan, 1.0, 1e-3, tol);
    assert_eq!(orth.verdict, Verdict::Fail, "{}", orth.summary_line());
    assert!(orth.max_residual > 1e-2, "residual {}", orth.max_residual);

    // Both sides of the equivalence fail, so the equivalence itself holds.
    let bi = check_biconditional(&m, plan, 1.0, 1e-3, tol);
    assert!(bi.agree);
    assert!(!bi.orthogonal.passed());
    assert!(!bi.lewis.passed());
    let collapsed = bi.as_check_report();
    assert!(collapsed.passed(), "{}", collapsed.summary_line());
}

#[test]
fn the_projectability_probe_rejects_the_warped_plane() {
    let m = FoliationModel::warped_counterexample();
    let rep = check_projectability(&m, SamplingPlan::new(11, 24), Tolerance::default());
    assert_eq!(rep.verdict, Verdict::Fail, "{}", rep.summary_line());
}

#[test]
fn sequential_and_parallel_runs_are_bit_identical() {
    let m = suspension();
    let tol = Tolerance::default();
    let seq = check_orthogonal_transport(
        &m,
        SamplingPlan::new(42, 32).with_mode(ExecMode::Sequential),
        1.5,
        1e-3,
        tol,
    );
    let par = check_orthogonal_transport(
        &m,
        SamplingPlan::new(42, 32).with_mode(ExecMode::Parallel),
        1.5,
        1e-3,
        tol,
    );
    assert_eq!(seq.sample_count, par.sample_count);
    for (a, b) in seq.samples.iter().zip(&par.samples) {
        assert_eq!(a.index, b.index);
        assert_eq!(a.value.to_bits(), b.value.to_bits(), "sample {}", a.index);
        for (x, y) in a.location.iter().zip(&b.location) {
            assert_eq!(x.to_bits(), y.to_bits());
        }
    }
    assert_eq!(seq.to_csv(), par.to_csv());
    assert_eq!(seq.summary_line(), par.summary_line());
}
