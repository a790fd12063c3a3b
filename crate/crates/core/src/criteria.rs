//! Numeric verdict engines for metric/foliation compatibility.
//!
//! Each checker samples a model deterministically (per-sample ChaCha
//! streams), measures a scale-normalized residual, and folds the batch into
//! a [`CheckReport`]. Residuals are normalized so that rescaling the metric
//! by a positive constant never changes a verdict:
//! scalar-product residuals divide by the metric max-norm and by Euclidean
//! lengths of the probe vectors (the indefinite metric itself cannot
//! normalize null directions).

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::exec::{run_batch, ExecMode};
use crate::metric::{
    basis_vector, integrate_geodesic_partial, GeodesicState, FD_STEP,
};
use crate::model::{FoliationModel, SplitBasis};
use crate::report::{CheckReport, ResidualSample, Tolerance, Verdict};

/// Deterministic per-sample generator: same `(seed, index)` gives the same
/// stream regardless of execution mode or thread count.
pub fn sample_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

/// How many samples to draw, from which seed, and on which executor.
#[derive(Debug, Clone, Copy)]
pub struct SamplingPlan {
    pub seed: u64,
    pub count: usize,
    pub mode: ExecMode,
}

impl SamplingPlan {
    pub fn new(seed: u64, count: usize) -> Self {
        SamplingPlan { seed, count, mode: ExecMode::auto() }
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Uniform direction on the Euclidean unit sphere (Box-Muller normals,
/// normalized).
pub fn random_unit_vector<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> DVector<f64> {
    loop {
        let mut v = DVector::zeros(dim);
        for i in 0..dim {
            let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let u2: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
            v[i] = (-2.0 * u1.ln()).sqrt() * u2.cos();
        }
        let n = v.norm();
        if n > 1e-6 {
            return v / n;
        }
    }
}

pub(crate) fn assemble(
    check: &str,
    tol: Tolerance,
    outcomes: Vec<Result<ResidualSample, Error>>,
) -> CheckReport {
    let mut samples = Vec::with_capacity(outcomes.len());
    for o in outcomes {
        match o {
            Ok(s) => samples.push(s),
            Err(e) => {
                return CheckReport::degenerate(check, tol, format!("precondition failed: {e}"))
            }
        }
    }
    CheckReport::from_samples(check, tol, samples)
}

// ---------------------------------------------------------------------------
// Orthogonal-geodesic transport

/// Launch geodesics orthogonal to the leaves and verify they stay
/// orthogonal to every leaf they meet.
///
/// Residual per geodesic: max over the trajectory of
/// `|g(γ̇, e_a)| / (‖g‖_max · |γ̇|₂)` over the unit leaf-coordinate vectors
/// `e_a`. Domain exit truncates a probe but keeps its residual.
pub fn check_orthogonal_transport(
    model: &FoliationModel,
    plan: SamplingPlan,
    s_max: f64,
    step: f64,
    tol: Tolerance,
) -> CheckReport {
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let start_pos = model.sample_point(&mut rng);
        let (_tf, m_basis) = model.splitting(&start_pos)?;
        let coeff = random_unit_vector(&mut rng, m_basis.len());
        let mut v: DVector<f64> = DVector::zeros(model.dim());
        for (j, b) in m_basis.iter().enumerate() {
            v += b * coeff[j];
        }
        let vn = v.norm();
        if vn < 1e-9 {
            return Err(Error::InvalidDecomposition(
                "orthogonal direction collapsed".into(),
            ));
        }
        v /= vn;
        let start = GeodesicState { position: start_pos.clone(), velocity: v };
        let (trace, stop) = integrate_geodesic_partial(&model.metric, start, s_max, step);
        if let Some(e @ Error::DegenerateMetric { .. }) = stop {
            return Err(e);
        }
        let mut worst = 0.0f64;
        for st in &trace.states {
            worst = worst.max(orthogonality_residual(model, st));
        }
        Ok(ResidualSample { index: i, location: start_pos, value: worst })
    });
    assemble("orthogonal-transport", tol, outcomes)
}

fn orthogonality_residual(model: &FoliationModel, st: &GeodesicState) -> f64 {
    let g = model.metric.eval(&st.position);
    let scale = g.amax().max(f64::MIN_POSITIVE);
    let vnorm = st.velocity.norm().max(f64::MIN_POSITIVE);
    let n = model.dim();
    let mut worst = 0.0f64;
    for &a in &model.leaf_axes {
        let mut ip = 0.0;
        for k in 0..n {
            ip += g[(a, k)] * st.velocity[k];
        }
        worst = worst.max(ip.abs() / (scale * vnorm));
    }
    worst
}

// ---------------------------------------------------------------------------
// Symmetric-product criterion

/// Geodesic invariance of the orthogonal distribution via the symmetric
/// product: for the projected transverse frame `{X_α}`, the leafwise
/// component of `½(∇_{X_α} X_β + ∇_{X_β} X_α)` must vanish.
pub fn check_lewis(model: &FoliationModel, plan: SamplingPlan, tol: Tolerance) -> CheckReport {
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let p = model.sample_point(&mut rng);
        lewis_residual_at(model, &p)
            .map(|value| ResidualSample { index: i, location: p.clone(), value })
    });
    assemble("lewis", tol, outcomes)
}

fn frame_partials(
    model: &FoliationModel,
    p: &[f64],
    axes: &[usize],
) -> Result<Vec<Vec<DVector<f64>>>, Error> {
    // dframe[k][alpha] = d X_alpha / d x^{axes[k]} by central differences.
    axes.iter()
        .map(|&k| {
            let h = FD_STEP * p[k].abs().max(1.0);
            let mut pp = p.to_vec();
            let mut pm = p.to_vec();
            pp[k] += h;
            pm[k] -= h;
            let fp = model.orthogonal_frame(&pp)?;
            let fm = model.orthogonal_frame(&pm)?;
            Ok(fp
                .iter()
                .zip(fm.iter())
                .map(|(a, b)| (a - b) / (2.0 * h))
                .collect())
        })
        .collect()
}

fn lewis_residual_at(model: &FoliationModel, p: &[f64]) -> Result<f64, Error> {
    let n = model.dim();
    let frame = model.orthogonal_frame(p)?;
    let gamma = model.metric.christoffel(p)?;
    let all_axes: Vec<usize> = (0..n).collect();
    let dframe = frame_partials(model, p, &all_axes)?;
    let splitter = SplitBasis::at(model, p)?;

    let q = frame.len();
    let mut worst = 0.0f64;
    for alpha in 0..q {
        for beta in alpha..q {
            let x = &frame[alpha];
            let y = &frame[beta];
            // ∇_X Y + ∇_Y X = X^k ∂_k Y + Y^k ∂_k X + 2 Γ(X, Y).
            let mut s: DVector<f64> = DVector::zeros(n);
            for k in 0..n {
                s += &dframe[k][beta] * x[k];
                s += &dframe[k][alpha] * y[k];
            }
            for k in 0..n {
                s[k] += 2.0 * (x.transpose() * &gamma[k] * y)[(0, 0)];
            }
            s *= 0.5;
            let leafwise = splitter.leafwise_norm(&s)?;
            let denom = (x.norm() * y.norm()).max(f64::MIN_POSITIVE);
            worst = worst.max(leafwise / denom);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Transverse projectability

/// Block form of the metric in adapted coordinates: the transverse block
/// must be constant along leaf directions and the mixed block must vanish.
pub fn check_projectability(
    model: &FoliationModel,
    plan: SamplingPlan,
    tol: Tolerance,
) -> CheckReport {
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let p = model.sample_point(&mut rng);
        projectability_residual_at(model, &p)
            .map(|value| ResidualSample { index: i, location: p.clone(), value })
    });
    assemble("projectability", tol, outcomes)
}

fn projectability_residual_at(model: &FoliationModel, p: &[f64]) -> Result<f64, Error> {
    let g = model.metric.eval_checked(p)?;
    let scale = g.amax();
    let mut worst = 0.0f64;
    for &a in &model.leaf_axes {
        let d = model.metric.partial(p, a);
        for &de in &model.transverse_axes {
            for &ep in &model.transverse_axes {
                worst = worst.max(d[(de, ep)].abs() / scale);
            }
        }
    }
    for &a in &model.leaf_axes {
        for &de in &model.transverse_axes {
            worst = worst.max(g[(a, de)].abs() / scale);
        }
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Totally geodesic leaves

/// Two agreeing sub-checks that the leaves are totally geodesic:
/// (i) the Lie derivative of the metric along orthogonal-frame fields has
/// no leafwise-leafwise component, and (ii) geodesics launched tangent to a
/// leaf keep their velocity leafwise.
pub fn check_totally_geodesic(
    model: &FoliationModel,
    plan: SamplingPlan,
    n_geodesics: usize,
    s_max: f64,
    step: f64,
    tol: Tolerance,
) -> CheckReport {
    let lie = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let p = model.sample_point(&mut rng);
        lie_derivative_residual_at(model, &p)
            .map(|value| ResidualSample { index: i, location: p.clone(), value })
    });
    let geo = run_batch(plan.mode, n_geodesics, |j| {
        let mut rng = sample_rng(plan.seed, plan.count + j);
        let p = model.sample_point(&mut rng);
        leafwise_geodesic_residual(model, &mut rng, &p, s_max, step)
            .map(|value| ResidualSample { index: plan.count + j, location: p.clone(), value })
    });

    let lie_max = lie
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|s| s.value))
        .fold(0.0f64, f64::max);
    let geo_max = geo
        .iter()
        .filter_map(|r| r.as_ref().ok().map(|s| s.value))
        .fold(0.0f64, f64::max);

    let mut outcomes = lie;
    outcomes.extend(geo);
    assemble("totally-geodesic", tol, outcomes).with_note(format!(
        "sub-residuals: lie-derivative {:.3e}, leafwise-geodesic {:.3e}",
        lie_max, geo_max
    ))
}

fn lie_derivative_residual_at(model: &FoliationModel, p: &[f64]) -> Result<f64, Error> {
    let n = model.dim();
    let frame = model.orthogonal_frame(p)?;
    let g = model.metric.eval_checked(p)?;
    let scale = g.amax();
    let gparts: Vec<DMatrix<f64>> = (0..n).map(|k| model.metric.partial(p, k)).collect();
    // fparts[k][alpha] = derivative of X_alpha along the k-th leaf axis.
    let fparts = frame_partials(model, p, &model.leaf_axes)?;

    let mut worst = 0.0f64;
    for (alpha, x) in frame.iter().enumerate() {
        let xnorm = x.norm().max(f64::MIN_POSITIVE);
        for (ai, &a) in model.leaf_axes.iter().enumerate() {
            for (bi, &b) in model.leaf_axes.iter().enumerate() {
                // (L_X g)(∂_a, ∂_b)
                //   = X^k ∂_k g_ab + g(∂_a X, ∂_b) + g(∂_a, ∂_b X).
                let mut val = 0.0;
                for k in 0..n {
                    val += x[k] * gparts[k][(a, b)];
                }
                let da = &fparts[ai][alpha];
                let db = &fparts[bi][alpha];
                for k in 0..n {
                    val += g[(k, b)] * da[k] + g[(a, k)] * db[k];
                }
                worst = worst.max(val.abs() / (scale * xnorm));
            }
        }
    }
    Ok(worst)
}

fn leafwise_geodesic_residual<R: Rng + ?Sized>(
    model: &FoliationModel,
    rng: &mut R,
    p: &[f64],
    s_max: f64,
    step: f64,
) -> Result<f64, Error> {
    let n = model.dim();
    let coeff = random_unit_vector(rng, model.leaf_dim());
    let mut v: DVector<f64> = DVector::zeros(n);
    for (j, &a) in model.leaf_axes.iter().enumerate() {
        v += basis_vector(n, a) * coeff[j];
    }
    let start = GeodesicState { position: p.to_vec(), velocity: v };
    let (trace, stop) = integrate_geodesic_partial(&model.metric, start, s_max, step);
    if let Some(e @ Error::DegenerateMetric { .. }) = stop {
        return Err(e);
    }
    let mut worst = 0.0f64;
    for st in &trace.states {
        let splitter = SplitBasis::at(model, &st.position)?;
        let ortho = splitter.orthogonal_norm(&st.velocity)?;
        worst = worst.max(ortho / st.velocity.norm().max(f64::MIN_POSITIVE));
    }
    Ok(worst)
}

// ---------------------------------------------------------------------------
// Transversal completeness

/// Desk-scale completeness probe: orthogonal geodesics must reach the
/// parameter horizon in both directions without leaving the domain or
/// blowing up. Residual is 0 for a surviving probe and 1 otherwise.
pub fn check_transversal_completeness(
    model: &FoliationModel,
    plan: SamplingPlan,
    s_horizon: f64,
    step: f64,
) -> CheckReport {
    let tol = Tolerance::strict(0.5);
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let p = model.sample_point(&mut rng);
        let (_tf, m_basis) = model.splitting(&p)?;
        let coeff = random_unit_vector(&mut rng, m_basis.len());
        let mut v: DVector<f64> = DVector::zeros(model.dim());
        for (j, b) in m_basis.iter().enumerate() {
            v += b * coeff[j];
        }
        v = v.normalize();
        let mut value = 0.0;
        for dir in [1.0, -1.0] {
            let start = GeodesicState {
                position: p.clone(),
                velocity: &v * dir,
            };
            let v0 = start.velocity.norm();
            let (trace, stop) = integrate_geodesic_partial(&model.metric, start, s_horizon, step);
            let blown = trace
                .states
                .iter()
                .any(|st| !st.velocity.norm().is_finite() || st.velocity.norm() > 1e6 * v0);
            if stop.is_some() || blown {
                value = 1.0;
            }
        }
        Ok(ResidualSample { index: i, location: p, value })
    });
    assemble("transversal-completeness", tol, outcomes)
}

// ---------------------------------------------------------------------------
// The biconditional

/// Joint verdict of the orthogonal-transport checker against the
/// symmetric-product criterion plus leaf nondegeneracy: the two sides must
/// agree (both pass or both fail) on every well-posed model.
#[derive(Debug, Clone)]
pub struct BiconditionalReport {
    pub orthogonal: CheckReport,
    pub lewis: CheckReport,
    pub leaf_nondegenerate: bool,
    pub agree: bool,
}

pub fn check_biconditional(
    model: &FoliationModel,
    plan: SamplingPlan,
    s_max: f64,
    step: f64,
    tol: Tolerance,
) -> BiconditionalReport {
    let orthogonal = check_orthogonal_transport(model, plan, s_max, step, tol);
    let lewis = check_lewis(model, plan, tol);
    let leaf_nondegenerate = {
        let probes = run_batch(plan.mode, plan.count.min(64), |i| {
            let mut rng = sample_rng(plan.seed, i);
            let p = model.sample_point(&mut rng);
            model.splitting(&p).is_ok()
        });
        probes.into_iter().all(|ok| ok)
    };
    let lhs = orthogonal.passed();
    let rhs = lewis.passed() && leaf_nondegenerate;
    let undecided = orthogonal.verdict == Verdict::Degenerate
        || lewis.verdict == Verdict::Degenerate;
    let agree = !undecided && lhs == rhs;
    BiconditionalReport {
        orthogonal,
        lewis,
        leaf_nondegenerate,
        agree,
    }
}

impl BiconditionalReport {
    /// Collapse to a single report: residual 0 when the two sides agree.
    pub fn as_check_report(&self) -> CheckReport {
        let undecided = self.orthogonal.verdict == Verdict::Degenerate
            || self.lewis.verdict == Verdict::Degenerate;
        if undecided {
            return CheckReport::degenerate(
                "biconditional",
                Tolerance::strict(0.5),
                "a side of the equivalence was degenerate",
            );
        }
        let value = if self.agree { 0.0 } else { 1.0 };
        CheckReport::from_samples(
            "biconditional",
            Tolerance::strict(0.5),
            vec![ResidualSample { index: 0, location: Vec::new(), value }],
        )
        .with_note(format!(
            "orthogonal-transport {} vs symmetric-product {} with leaf nondegeneracy {}",
            self.orthogonal.verdict,
            self.lewis.verdict,
            if self.leaf_nondegenerate { "ok" } else { "violated" }
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Axis, Domain, MetricField};
    use crate::model::{IntMat2, SuspensionModel};

    fn suspension() -> SuspensionModel {
        SuspensionModel::new(IntMat2::new(2, 1, 1, 1), 1.0).unwrap()
    }

    fn plan(count: usize) -> SamplingPlan {
        SamplingPlan::new(42, count)
    }

    #[test]
    fn suspension_keeps_orthogonal_geodesics_orthogonal() {
        let s = suspension();
        let rep = check_orthogonal_transport(
            s.as_model(),
            plan(10),
            2.0,
            1e-2,
            Tolerance::default(),
        );
        assert!(rep.passed(), "{}", rep.summary_line());
        assert!(rep.max_residual < 1e-12);
    }

    #[test]
    fn warped_model_fails_orthogonal_transport() {
        let m = FoliationModel::warped_counterexample();
        let rep = check_orthogonal_transport(&m, plan(5), 1.0, 1e-3, Tolerance::default());
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!(rep.max_residual > 1e-2, "{}", rep.summary_line());
    }

    #[test]
    fn suspension_satisfies_the_symmetric_product_criterion() {
        let s = suspension();
        let rep = check_lewis(s.as_model(), plan(20), Tolerance::default());
        assert!(rep.passed(), "{}", rep.summary_line());
    }

    #[test]
    fn warped_model_fails_the_symmetric_product_criterion() {
        let m = FoliationModel::warped_counterexample();
        let rep = check_lewis(&m, plan(20), Tolerance::default());
        assert_eq!(rep.verdict, Verdict::Fail);
        // Sampled at x >= 0, the leafwise defect is e^{2x} >= 1.
        assert!(rep.max_residual >= 1.0, "{}", rep.summary_line());
    }

    #[test]
    fn projectability_matches_the_block_structure() {
        let s = suspension();
        let rep = check_projectability(s.as_model(), plan(20), Tolerance::default());
        assert!(rep.passed());
        assert!(rep.max_residual < 1e-12);

        let w = FoliationModel::warped_counterexample();
        let rep = check_projectability(&w, plan(20), Tolerance::default());
        assert_eq!(rep.verdict, Verdict::Fail);
    }

    #[test]
    fn both_control_models_have_totally_geodesic_leaves() {
        let s = suspension();
        let rep = check_totally_geodesic(
            s.as_model(),
            plan(10),
            5,
            2.0,
            1e-2,
            Tolerance::default(),
        );
        assert!(rep.passed(), "{}", rep.summary_line());

        let w = FoliationModel::warped_counterexample();
        let rep =
            check_totally_geodesic(&w, plan(10), 5, 1.0, 1e-2, Tolerance::default());
        assert!(rep.passed(), "{}", rep.summary_line());
    }

    #[test]
    fn completeness_passes_on_the_suspension_and_fails_on_a_cut_box() {
        let s = suspension();
        let rep = check_transversal_completeness(s.as_model(), plan(5), 10.0, 1e-2);
        assert!(rep.passed(), "{}", rep.summary_line());

        let leaf = MetricField::new(
            Domain::new(vec![Axis::Line { sample_lo: -1.0, sample_hi: 1.0 }]),
            |_| DMatrix::identity(1, 1),
        );
        let cut = MetricField::new(
            Domain::new(vec![Axis::Interval { lo: -0.5, hi: 0.5 }]),
            |_| DMatrix::identity(1, 1),
        );
        let m = FoliationModel::product("cut-box", &leaf, &cut).unwrap();
        let rep = check_transversal_completeness(&m, plan(5), 10.0, 1e-2);
        assert_eq!(rep.verdict, Verdict::Fail, "{}", rep.summary_line());
    }

    #[test]
    fn biconditional_agrees_on_positive_and_negative_controls() {
        let s = suspension();
        let rep = check_biconditional(s.as_model(), plan(10), 2.0, 1e-2, Tolerance::default());
        assert!(rep.agree);
        assert!(rep.orthogonal.passed() && rep.lewis.passed());
        assert!(rep.as_check_report().passed());

        let w = FoliationModel::warped_counterexample();
        let rep = check_biconditional(&w, plan(10), 1.0, 1e-2, Tolerance::default());
        assert!(rep.agree, "both sides should fail together");
        assert_eq!(rep.orthogonal.verdict, Verdict::Fail);
        assert_eq!(rep.lewis.verdict, Verdict::Fail);
        assert!(rep.as_check_report().passed());
    }

    #[test]
    fn reports_are_identical_across_execution_modes_and_reruns() {
        let s = suspension();
        let a = check_orthogonal_transport(
            s.as_model(),
            plan(8).with_mode(ExecMode::Parallel),
            1.0,
            1e-2,
            Tolerance::default(),
        );
        let b = check_orthogonal_transport(
            s.as_model(),
            plan(8).with_mode(ExecMode::Sequential),
            1.0,
            1e-2,
            Tolerance::default(),
        );
        let c = check_orthogonal_transport(
            s.as_model(),
            plan(8).with_mode(ExecMode::Parallel),
            1.0,
            1e-2,
            Tolerance::default(),
        );
        assert_eq!(a, b);
        assert_eq!(a, c);
        assert_eq!(a.to_csv(), b.to_csv());
    }

    #[test]
    fn metric_rescaling_never_changes_verdicts() {
        for c in [0.25, 3.0, 40.0] {
            let w = FoliationModel::warped_counterexample();
            let mut scaled = w.clone();
            scaled.metric = MetricField::new(
                w.metric.domain().clone(),
                move |x: &[f64]| {
                    DMatrix::from_row_slice(
                        2,
                        2,
                        &[c, 0.0, 0.0, c * (2.0 * x[0]).exp()],
                    )
                },
            );
            let base = check_projectability(&w, plan(10), Tolerance::default());
            let re = check_projectability(&scaled, plan(10), Tolerance::default());
            assert_eq!(base.verdict, re.verdict);

            let base = check_orthogonal_transport(&w, plan(4), 1.0, 1e-2, Tolerance::default());
            let re =
                check_orthogonal_transport(&scaled, plan(4), 1.0, 1e-2, Tolerance::default());
            assert_eq!(base.verdict, re.verdict);
        }
    }
}
