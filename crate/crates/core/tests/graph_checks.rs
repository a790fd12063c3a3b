//! Pair-space (holonomy groupoid) invariants at scale: exact groupoid
//! arithmetic over many random elements, the block form of the induced
//! metric, the deck isometry, and the leaf geometry of the covering.

use foliage_core::graph::{
    check_graph_metric, check_prs_axioms, GraphLeaf, GraphMetricFault, GraphModel, GraphPoint,
    Side,
};
use foliage_core::criteria::SamplingPlan;
use foliage_core::error::Error;
use foliage_core::model::{FoliationModel, IntMat2, SuspensionModel};
use foliage_core::report::Tolerance;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn graph_model() -> GraphModel {
    let s = SuspensionModel::new(IntMat2::new(2, 1, 1, 1), 1.0).unwrap();
    GraphModel::build(s.as_model()).unwrap()
}

/// Random groupoid element with a bounded winding so compositions stay
/// well inside the exact-integer range.
fn random_element<R: Rng + ?Sized>(gm: &GraphModel, rng: &mut R) -> GraphPoint {
    let x = [rng.gen::<f64>(), rng.gen::<f64>(), rng.gen::<f64>()];
    let z = gm.unit(&x).unwrap();
    // Push the target winding directly on canonical coordinates.
    match z {
        GraphPoint::Suspension { u, t, tp_whole, tp_frac } => GraphPoint::Suspension {
            u,
            t,
            tp_whole: tp_whole + rng.gen_range(-4i64..=4),
            tp_frac,
        },
        other => other,
    }
}

/// A second element composable after `z1`: its source is `z1`'s target.
fn follower<R: Rng + ?Sized>(gm: &GraphModel, z1: &GraphPoint, rng: &mut R) -> GraphPoint {
    let tgt = gm.project(z1, Side::Second);
    let z = gm.unit(&tgt).unwrap();
    match z {
        GraphPoint::Suspension { u, t, tp_whole, tp_frac } => GraphPoint::Suspension {
            u,
            t,
            tp_whole: tp_whole + rng.gen_range(-4i64..=4),
            tp_frac,
        },
        other => other,
    }
}

#[test]
fn groupoid_laws_hold_bitwise_over_a_thousand_triples() {
    let gm = graph_model();
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    for trial in 0..1000 {
        let z1 = random_element(&gm, &mut rng);
        let z2 = follower(&gm, &z1, &mut rng);
        let z3 = follower(&gm, &z2, &mut rng);

        let left = gm.compose(&gm.compose(&z1, &z2).unwrap(), &z3).unwrap();
        let right = gm.compose(&z1, &gm.compose(&z2, &z3).unwrap()).unwrap();
        assert_eq!(left, right, "associativity broke at trial {trial}");

        // Units absorb on both sides.
        let src = gm.project(&z1, Side::First);
        let tgt = gm.project(&z1, Side::Second);
        assert_eq!(gm.compose(&gm.unit(&src).unwrap(), &z1).unwrap(), z1);
        assert_eq!(gm.compose(&z1, &gm.unit(&tgt).unwrap()).unwrap(), z1);

        // z z⁻¹ is the unit at the source, exactly.
        let inv = gm.inverse(&z1);
        assert_eq!(gm.compose(&z1, &inv).unwrap(), gm.unit(&src).unwrap());
    }
}

#[test]
fn the_induced_metric_is_the_exact_fiber_block_plus_identity() {
    let gm = graph_model();
    let expected = DMatrix::from_row_slice(
        4,
        4,
        &[
            -2.0, 1.0, 0.0, 0.0, //
            1.0, 2.0, 0.0, 0.0, //
            0.0, 0.0, 1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0,
        ],
    );
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..1000 {
        let z = random_element(&gm, &mut rng);

        // The metric field of the pair space is the fiber block plus the
        // identity, with no numerical slack at any point or winding.
        let field = gm.as_model().metric.eval(&gm.coords(&z));
        assert_eq!(field, expected, "at {:?}", z);

        // Assembling the same matrix from the defining splitting routes
        // through linear solves; it may carry dust at the last digit but
        // the two leaf directions stay exactly orthogonal.
        let d = gm.induced_metric_matrix(&z).unwrap();
        assert!((&d - &expected).amax() <= 1e-12, "at {:?}", z);
        assert_eq!(d[(2, 3)], 0.0);
        assert_eq!(d[(3, 2)], 0.0);

        let e2 = gm.decompose_tangent(&z, &DVector::from_column_slice(&[0.0, 0.0, 1.0, 0.0]));
        let e3 = gm.decompose_tangent(&z, &DVector::from_column_slice(&[0.0, 0.0, 0.0, 1.0]));
        let cross = gm
            .induced_metric_d(&z, &e2.unwrap(), &e3.unwrap())
            .unwrap();
        assert_eq!(cross, 0.0);
    }
}

#[test]
fn long_windings_stay_exact_on_the_closed_leaf_cover() {
    let gm = graph_model();
    // Over the fixed fiber point every winding count closes; t′ advances
    // by exactly the whole winding even at ±30 (entries stay far below
    // the integer-exact range of f64).
    for w in (-30i64..=30).step_by(5) {
        let z = gm.graph_point(&[0.0, 0.0, 0.25], w, &[0.0, 0.0, 0.25]).unwrap();
        match z {
            GraphPoint::Suspension { tp_whole, tp_frac, .. } => {
                assert_eq!(tp_whole, w);
                assert_eq!(tp_frac, 0.25);
                assert_eq!(z.t_prime(), w as f64 + 0.25);
            }
            _ => panic!("wrong variant"),
        }
        assert_eq!(gm.holonomy_class(&z).unwrap(), w);
    }
}

#[test]
fn the_diagonal_deck_action_is_an_exact_isometry() {
    let gm = graph_model();
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..100 {
        let z = random_element(&gm, &mut rng);
        for k in -2i32..=2 {
            assert_eq!(gm.deck_pullback_defect(&z, k), 0.0, "k={k} at {:?}", z);
        }
    }
}

#[test]
fn the_metric_is_recovered_from_its_characterizing_properties() {
    let gm = graph_model();
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for _ in 0..100 {
        let z = random_element(&gm, &mut rng);
        let direct = gm.induced_metric_matrix(&z).unwrap();
        let rebuilt = gm.reconstructed_metric_matrix(&z).unwrap();
        let gap = (&direct - &rebuilt).amax();
        assert!(gap < 1e-10, "reconstruction gap {gap} at {:?}", z);
    }
}

#[test]
fn leaf_geometry_of_the_covering() {
    let gm = graph_model();
    // Open base leaf: the graph leaf is a plane.
    assert_eq!(
        gm.leaf_structure(&[0.3141592653589793, 0.5772156649015329, 0.0])
            .unwrap(),
        GraphLeaf::Plane
    );
    // Fixed point: ℤ-cover of the closed leaf, deck shift one winding.
    assert_eq!(
        gm.leaf_structure(&[0.0, 0.0, 0.0]).unwrap(),
        GraphLeaf::Cylinder { deck_shift: 1 }
    );
    // Period-3 orbit: deck shift three windings.
    assert_eq!(
        gm.leaf_structure(&[0.5, 0.5, 0.0]).unwrap(),
        GraphLeaf::Cylinder { deck_shift: 3 }
    );
}

#[test]
fn non_projectable_bases_are_refused() {
    let warped = FoliationModel::warped_counterexample();
    match GraphModel::build(&warped) {
        Err(Error::NotPseudoRiemannian { residual }) => {
            assert!(residual > 1e-4, "refusal should cite the residual");
        }
        other => panic!("expected a refusal, got {:?}", other.map(|g| g.dim())),
    }
}

#[test]
fn fault_injection_is_detected_by_the_right_projection() {
    let gm = graph_model();
    let plan = SamplingPlan::new(7, 32);
    let tol = Tolerance::default();

    let clean1 = check_prs_axioms(&gm, Side::First, plan, tol, GraphMetricFault::None);
    let clean2 = check_prs_axioms(&gm, Side::Second, plan, tol, GraphMetricFault::None);
    assert!(clean1.passed() && clean2.passed());
    assert!(clean1.max_residual < 1e-10 && clean2.max_residual < 1e-10);

    let fault = GraphMetricFault::SecondVertical(1e-2);
    let broken = check_prs_axioms(&gm, Side::First, plan, tol, fault);
    let spared = check_prs_axioms(&gm, Side::Second, plan, tol, fault);
    assert!(!broken.passed(), "{}", broken.summary_line());
    assert!(spared.passed(), "{}", spared.summary_line());

    let whole = check_graph_metric(&gm, plan, tol);
    assert!(whole.passed(), "{}", whole.summary_line());
}
