//! Coordinate-chart metric fields, Christoffel symbols, geodesics and
//! signature bookkeeping.
//!
//! A [`MetricField`] evaluates a symmetric matrix `g(x)` on a box-like
//! [`Domain`]. Derivatives come either from an analytic closure supplied by
//! the model or from central finite differences. Everything downstream
//! (parallel transport, holonomy, graph metrics) is built on these pieces.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::{Error, Result};

/// Relative determinant threshold below which a metric counts as degenerate.
pub const DEGENERACY_REL: f64 = 1e-10;
/// Relative eigenvalue threshold below which a direction counts as null.
pub const NULL_REL: f64 = 1e-10;
/// Default finite-difference step scale.
pub const FD_STEP: f64 = 1e-6;
/// Default geodesic integrator step.
pub const DEFAULT_STEP: f64 = 1e-3;

/// One coordinate axis of a chart domain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Axis {
    /// Bounded open interval; trajectories may not leave it.
    Interval { lo: f64, hi: f64 },
    /// Circle coordinate of the given period; values wrap.
    Periodic { period: f64 },
    /// Unbounded affine coordinate; the bounds only steer random sampling.
    Line { sample_lo: f64, sample_hi: f64 },
}

impl Axis {
    /// Whether `x` is an admissible coordinate value on this axis.
    pub fn contains(&self, x: f64) -> bool {
        match *self {
            Axis::Interval { lo, hi } => x >= lo && x <= hi,
            Axis::Periodic { .. } | Axis::Line { .. } => x.is_finite(),
        }
    }

    /// Canonical representative: periodic axes wrap into `[0, period)`.
    pub fn wrap(&self, x: f64) -> f64 {
        match *self {
            Axis::Periodic { period } => x.rem_euclid(period),
            _ => x,
        }
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            Axis::Interval { lo, hi } => rng.gen_range(lo..hi),
            Axis::Periodic { period } => rng.gen_range(0.0..period),
            Axis::Line { sample_lo, sample_hi } => rng.gen_range(sample_lo..sample_hi),
        }
    }
}

/// Product of axes describing where a metric field lives.
#[derive(Debug, Clone, PartialEq)]
pub struct Domain {
    pub axes: Vec<Axis>,
}

impl Domain {
    pub fn new(axes: Vec<Axis>) -> Self {
        Domain { axes }
    }

    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// All coordinates admissible (interval axes within bounds).
    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.axes.len() && self.axes.iter().zip(x).all(|(a, &v)| a.contains(v))
    }

    /// Index of the first axis violated by `x`, if any.
    pub fn violated_axis(&self, x: &[f64]) -> Option<usize> {
        self.axes
            .iter()
            .zip(x)
            .position(|(a, &v)| !a.contains(v))
    }

    /// Wrap periodic coordinates to canonical representatives.
    pub fn wrap(&self, x: &[f64]) -> Vec<f64> {
        self.axes.iter().zip(x).map(|(a, &v)| a.wrap(v)).collect()
    }

    /// Draw a uniform random point (periodic axes over one period,
    /// line axes over their sampling window).
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        self.axes.iter().map(|a| a.sample(rng)).collect()
    }
}

type EvalFn = dyn Fn(&[f64]) -> DMatrix<f64> + Send + Sync;
type DerivFn = dyn Fn(&[f64], usize) -> DMatrix<f64> + Send + Sync;

/// A symmetric bilinear form field on a chart domain.
#[derive(Clone)]
pub struct MetricField {
    dim: usize,
    domain: Domain,
    eval: Arc<EvalFn>,
    deriv: Option<Arc<DerivFn>>,
}

impl std::fmt::Debug for MetricField {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("MetricField")
            .field("dim", &self.dim)
            .field("domain", &self.domain)
            .field("analytic_deriv", &self.deriv.is_some())
            .finish()
    }
}

impl MetricField {
    pub fn new<F>(domain: Domain, eval: F) -> Self
    where
        F: Fn(&[f64]) -> DMatrix<f64> + Send + Sync + 'static,
    {
        MetricField {
            dim: domain.dim(),
            domain,
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    /// Attach an analytic partial-derivative closure `(x, k) -> d g / d x^k`.
    pub fn with_deriv<F>(mut self, deriv: F) -> Self
    where
        F: Fn(&[f64], usize) -> DMatrix<f64> + Send + Sync + 'static,
    {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn domain(&self) -> &Domain {
        &self.domain
    }

    pub fn has_analytic_deriv(&self) -> bool {
        self.deriv.is_some()
    }

    /// Evaluate `g` at `x` (periodic coordinates wrapped first).
    pub fn eval(&self, x: &[f64]) -> DMatrix<f64> {
        let w = self.domain.wrap(x);
        (self.eval)(&w)
    }

    /// Evaluate and fail if the matrix is degenerate at scale.
    pub fn eval_checked(&self, x: &[f64]) -> Result<DMatrix<f64>> {
        let g = self.eval(x);
        let scale = g.amax();
        let det = g.determinant();
        if scale == 0.0 || det.abs() < DEGENERACY_REL * scale.powi(self.dim as i32) {
            return Err(Error::DegenerateMetric {
                location: x.to_vec(),
                det,
            });
        }
        Ok(g)
    }

    /// Partial derivative of `g` in direction `k`; analytic if supplied,
    /// otherwise central finite differences with a coordinate-scaled step.
    pub fn partial(&self, x: &[f64], k: usize) -> DMatrix<f64> {
        if let Some(d) = &self.deriv {
            let w = self.domain.wrap(x);
            return d(&w, k);
        }
        let h = FD_STEP * x[k].abs().max(1.0);
        let mut xp = x.to_vec();
        let mut xm = x.to_vec();
        xp[k] += h;
        xm[k] -= h;
        (self.eval(&xp) - self.eval(&xm)) / (2.0 * h)
    }

    /// Christoffel symbols of the Levi-Civita connection at `x`.
    ///
    /// Returned as one matrix per upper index `k` with entries
    /// `gamma[k][(i, j)]`.
    pub fn christoffel(&self, x: &[f64]) -> Result<Vec<DMatrix<f64>>> {
        let n = self.dim;
        let g = self.eval_checked(x)?;
        let ginv = g.clone().try_inverse().ok_or(Error::DegenerateMetric {
            location: x.to_vec(),
            det: g.determinant(),
        })?;
        let parts: Vec<DMatrix<f64>> = (0..n).map(|k| self.partial(x, k)).collect();
        let mut gamma = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..=i {
                    let mut s = 0.0;
                    for l in 0..n {
                        s += ginv[(k, l)] * (parts[i][(j, l)] + parts[j][(i, l)] - parts[l][(i, j)]);
                    }
                    let v = 0.5 * s;
                    gamma[k][(i, j)] = v;
                    gamma[k][(j, i)] = v;
                }
            }
        }
        Ok(gamma)
    }

    /// Scalar product `g_x(u, v)`.
    pub fn scalar_product(&self, x: &[f64], u: &DVector<f64>, v: &DVector<f64>) -> f64 {
        let g = self.eval(x);
        (u.transpose() * g * v)[(0, 0)]
    }

    /// Squared length `g_x(v, v)`; negative for timelike directions.
    pub fn quadratic_form(&self, x: &[f64], v: &DVector<f64>) -> f64 {
        self.scalar_product(x, v, v)
    }

    /// Eigenvalue-count signature of `g` at `x`.
    pub fn signature_of(&self, x: &[f64]) -> Signature {
        let g = self.eval(x);
        signature_of_matrix(&g)
    }
}

/// Counts of positive, negative and (numerically) zero eigenvalues.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Signature {
    pub plus: usize,
    pub minus: usize,
    pub null: usize,
}

impl Signature {
    pub fn is_nondegenerate(&self) -> bool {
        self.null == 0
    }

    /// Exactly one negative direction and no null ones.
    pub fn is_lorentzian(&self) -> bool {
        self.minus == 1 && self.null == 0
    }

    pub fn is_riemannian(&self) -> bool {
        self.minus == 0 && self.null == 0
    }
}

impl std::fmt::Display for Signature {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}, {})", self.plus, self.minus)?;
        if self.null > 0 {
            write!(f, " with {} null", self.null)?;
        }
        Ok(())
    }
}

/// Signature of an explicit symmetric matrix with a scale-aware null cut.
pub fn signature_of_matrix(g: &DMatrix<f64>) -> Signature {
    let sym = (g + g.transpose()) * 0.5;
    let eig = sym.symmetric_eigen();
    let max_abs = eig.eigenvalues.iter().fold(0.0f64, |m, &e| m.max(e.abs()));
    let cut = NULL_REL * max_abs;
    let mut sig = Signature {
        plus: 0,
        minus: 0,
        null: 0,
    };
    for &e in eig.eigenvalues.iter() {
        if e > cut {
            sig.plus += 1;
        } else if e < -cut {
            sig.minus += 1;
        } else {
            sig.null += 1;
        }
    }
    sig
}

/// Basis of the `g`-orthogonal complement of `span` inside the full tangent
/// space at `x`.
///
/// Fails with [`Error::DegenerateRestriction`] when `g` restricted to `span`
/// is singular, in which case the complement would intersect the span.
pub fn orthogonal_complement(
    metric: &MetricField,
    x: &[f64],
    span: &[DVector<f64>],
) -> Result<Vec<DVector<f64>>> {
    let n = metric.dim();
    let g = metric.eval_checked(x)?;
    let p = span.len();
    if p == 0 {
        return Ok((0..n).map(|i| basis_vector(n, i)).collect());
    }
    // Gram matrix of the span: must be nonsingular for a clean splitting.
    let mut gram = DMatrix::zeros(p, p);
    for (i, u) in span.iter().enumerate() {
        for (j, v) in span.iter().enumerate() {
            gram[(i, j)] = (u.transpose() * &g * v)[(0, 0)];
        }
    }
    let gram_scale = gram.amax().max(f64::MIN_POSITIVE);
    let gram_det = gram.determinant();
    if gram_det.abs() < DEGENERACY_REL * gram_scale.powi(p as i32) {
        return Err(Error::DegenerateRestriction { det: gram_det });
    }
    // w is orthogonal to the span iff (S^T g) w = 0.
    let mut constraint = DMatrix::zeros(p, n);
    for (i, u) in span.iter().enumerate() {
        let row = u.transpose() * &g;
        constraint.set_row(i, &row.row(0));
    }
    null_space(&constraint, n - p)
}

/// Orthonormal-ish basis of the kernel of `m` via SVD, expecting `expect`
/// dimensions.
pub(crate) fn null_space(m: &DMatrix<f64>, expect: usize) -> Result<Vec<DVector<f64>>> {
    let n = m.ncols();
    // Pad with zero rows to a square matrix: the thin SVD only returns
    // min(rows, cols) right singular vectors, and we need all n of them.
    let mut sq = DMatrix::zeros(n.max(m.nrows()), n);
    sq.view_mut((0, 0), (m.nrows(), n)).copy_from(m);
    let svd = sq.svd(false, true);
    let vt = svd.v_t.as_ref().expect("svd requested v_t");
    let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let cut = (NULL_REL * smax).max(1e-300);
    let mut basis = Vec::new();
    for i in 0..n {
        let s = if i < svd.singular_values.len() {
            svd.singular_values[i]
        } else {
            0.0
        };
        if s <= cut {
            basis.push(vt.row(i).transpose());
        }
    }
    if basis.len() != expect {
        return Err(Error::InvalidDecomposition(format!(
            "kernel dimension {} (expected {})",
            basis.len(),
            expect
        )));
    }
    Ok(basis)
}

/// Position/velocity pair for geodesic integration.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicState {
    pub position: Vec<f64>,
    pub velocity: DVector<f64>,
}

impl GeodesicState {
    pub fn new(position: Vec<f64>, velocity: Vec<f64>) -> Self {
        GeodesicState {
            position,
            velocity: DVector::from_vec(velocity),
        }
    }

    /// Kinetic energy `g(v, v)`; conserved along geodesics.
    pub fn energy(&self, metric: &MetricField) -> f64 {
        metric.quadratic_form(&self.position, &self.velocity)
    }
}

/// Sampled geodesic: states at uniform parameter steps.
#[derive(Debug, Clone)]
pub struct GeodesicTrace {
    pub params: Vec<f64>,
    pub states: Vec<GeodesicState>,
}

impl GeodesicTrace {
    pub fn final_state(&self) -> &GeodesicState {
        self.states.last().expect("trace holds at least the start")
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

fn geodesic_accel(metric: &MetricField, pos: &[f64], vel: &DVector<f64>) -> Result<DVector<f64>> {
    let gamma = metric.christoffel(pos)?;
    let n = metric.dim();
    let mut acc = DVector::zeros(n);
    for k in 0..n {
        acc[k] = -(vel.transpose() * &gamma[k] * vel)[(0, 0)];
    }
    Ok(acc)
}

fn rk4_step(metric: &MetricField, state: &GeodesicState, h: f64) -> Result<GeodesicState> {
    let n = metric.dim();
    let pos = DVector::from_vec(state.position.clone());
    let vel = state.velocity.clone();

    let k1p = vel.clone();
    let k1v = geodesic_accel(metric, pos.as_slice(), &vel)?;

    let p2 = &pos + &k1p * (h / 2.0);
    let v2 = &vel + &k1v * (h / 2.0);
    let k2p = v2.clone();
    let k2v = geodesic_accel(metric, p2.as_slice(), &v2)?;

    let p3 = &pos + &k2p * (h / 2.0);
    let v3 = &vel + &k2v * (h / 2.0);
    let k3p = v3.clone();
    let k3v = geodesic_accel(metric, p3.as_slice(), &v3)?;

    let p4 = &pos + &k3p * h;
    let v4 = &vel + &k3v * h;
    let k4p = v4.clone();
    let k4v = geodesic_accel(metric, p4.as_slice(), &v4)?;

    let new_pos = &pos + (k1p + k2p * 2.0 + k3p * 2.0 + k4p) * (h / 6.0);
    let new_vel = &vel + (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
    let mut position = vec![0.0; n];
    position.copy_from_slice(new_pos.as_slice());
    Ok(GeodesicState {
        position,
        velocity: new_vel,
    })
}

/// Integrate the geodesic equation with classical fixed-step RK4, keeping
/// whatever prefix of the trajectory stays valid.
///
/// Coordinates stay unwrapped (periodic axes accumulate winding); the metric
/// wraps internally on evaluation. Returns the integrated trace together
/// with the error that stopped it early, if any.
pub fn integrate_geodesic_partial(
    metric: &MetricField,
    start: GeodesicState,
    s_end: f64,
    step: f64,
) -> (GeodesicTrace, Option<Error>) {
    assert!(step > 0.0, "step must be positive");
    assert!(s_end >= 0.0, "parameter horizon must be nonnegative");
    let n_steps = (s_end / step).round() as usize;
    let h = if n_steps > 0 { s_end / n_steps as f64 } else { step };
    let mut params = Vec::with_capacity(n_steps + 1);
    let mut states = Vec::with_capacity(n_steps + 1);
    params.push(0.0);
    states.push(start);
    for i in 0..n_steps {
        let next = match rk4_step(metric, states.last().unwrap(), h) {
            Ok(s) => s,
            Err(e) => return (GeodesicTrace { params, states }, Some(e)),
        };
        let s = (i + 1) as f64 * h;
        if let Some(axis) = metric.domain().violated_axis(&next.position) {
            return (
                GeodesicTrace { params, states },
                Some(Error::DomainExit { s, axis }),
            );
        }
        params.push(s);
        states.push(next);
    }
    (GeodesicTrace { params, states }, None)
}

/// Like [`integrate_geodesic_partial`] but failing outright when the
/// trajectory leaves a bounded interval axis or hits a degenerate metric.
pub fn integrate_geodesic(
    metric: &MetricField,
    start: GeodesicState,
    s_end: f64,
    step: f64,
) -> Result<GeodesicTrace> {
    let (trace, stop) = integrate_geodesic_partial(metric, start, s_end, step);
    match stop {
        None => Ok(trace),
        Some(e) => Err(e),
    }
}

/// Integrate at `step` and `step / 2` and report the endpoint discrepancy —
/// a cheap Richardson-style consistency check of the integrator.
pub fn integrate_geodesic_verified(
    metric: &MetricField,
    start: GeodesicState,
    s_end: f64,
    step: f64,
) -> Result<(GeodesicTrace, f64)> {
    let coarse = integrate_geodesic(metric, start.clone(), s_end, step)?;
    let fine = integrate_geodesic(metric, start, s_end, step / 2.0)?;
    let pc = DVector::from_vec(coarse.final_state().position.clone());
    let pf = DVector::from_vec(fine.final_state().position.clone());
    let disc = (pc - pf).norm() + (&coarse.final_state().velocity - &fine.final_state().velocity).norm();
    Ok((coarse, disc))
}

/// Maximum drift of `g(v, v)` along a trace, relative to the trace's
/// largest energy magnitude (or absolute when that is tiny).
pub fn energy_drift(metric: &MetricField, trace: &GeodesicTrace) -> f64 {
    let energies: Vec<f64> = trace.states.iter().map(|s| s.energy(metric)).collect();
    let e0 = energies[0];
    let scale = energies.iter().fold(0.0f64, |m, &e| m.max(e.abs())).max(1.0);
    energies
        .iter()
        .map(|e| (e - e0).abs() / scale)
        .fold(0.0, f64::max)
}

/// Standard basis vector `e_i` of dimension `n`.
pub fn basis_vector(n: usize, i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(n);
    v[i] = 1.0;
    v
}

/// Block-diagonal assembly `a ⊕ b`.
pub fn block_diag(a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let (ra, ca) = a.shape();
    let (rb, cb) = b.shape();
    let mut out = DMatrix::zeros(ra + rb, ca + cb);
    out.view_mut((0, 0), (ra, ca)).copy_from(a);
    out.view_mut((ra, ca), (rb, cb)).copy_from(b);
    out
}
