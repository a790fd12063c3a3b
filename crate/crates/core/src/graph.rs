//! Pair groupoid of leaf-connected points — "the graph of the foliation" —
//! for the bundled models: canonical cover representatives, groupoid
//! operations, the two canonical projections, the induced pair metric, and
//! submersion / foliation checkers built on top of it.
//!
//! Representation is model-specific rather than abstract path classes: the
//! mapping-torus pair space is `(𝕋² × ℝ_t × ℝ_{t'}) / ℤ` under the diagonal
//! deck action `n·(u, t, t') = (Aⁿu, t+n, t'+n)`, reduced so `t ∈ [0, 1)`
//! and with the integer part of `t'` stored exactly; plain models reduce to
//! ordinary pairs of leaf positions over shared transverse coordinates.
//! Construction is gated on the compatibility checkers, which keeps the
//! pair space inside the regime where it is a Hausdorff manifold.

use std::fmt;

use nalgebra::{DMatrix, DVector};

use crate::criteria::{
    assemble, check_orthogonal_transport, check_projectability,
    check_transversal_completeness, random_unit_vector, sample_rng, SamplingPlan,
};
use crate::error::{Error, Result};
use crate::exec::run_batch;
use crate::holonomy::transfer;
use crate::holonomy::HorizontalCurve;
use crate::holonomy::LeafPath;
use crate::metric::{
    basis_vector, energy_drift, integrate_geodesic_partial, null_space, signature_of_matrix,
    Axis, Domain, GeodesicState, MetricField, Signature, DEGENERACY_REL,
};
use crate::model::{
    torus_dist, AdaptedChart, FoliationModel, IntMat2, LeafClass, SplitBasis, Topology,
};
use crate::report::{CheckReport, ResidualSample, Tolerance, Verdict};

/// Matching tolerance for composability and leaf-membership decisions.
pub const ENDPOINT_TOL: f64 = 1e-9;
/// Deck powers searched when identifying which germ connects two points.
const WINDING_SEARCH_BOUND: i32 = 16;
/// Sampling used by the construction gate.
const GATE_SEED: u64 = 11;
const GATE_SAMPLES: usize = 32;

// ---------------------------------------------------------------------------
// Points

/// A point of the pair space: two points on a common leaf together with the
/// germ class of a leafwise path between them, stored as a canonical
/// representative.
#[derive(Debug, Clone, PartialEq)]
pub enum GraphPoint {
    /// Mapping-torus representative `(u, t, t')` with `t ∈ [0, 1)`; the
    /// first endpoint is `π(u, t)`, the second `π(u, t')`, and the integer
    /// part of `t'` is kept exact so groupoid arithmetic never rounds.
    Suspension {
        u: [f64; 2],
        t: f64,
        tp_whole: i64,
        tp_frac: f64,
    },
    /// Plain-model pair: leaf coordinates of both endpoints over shared
    /// transverse coordinates (trivial germs only).
    Product {
        first_leaf: Vec<f64>,
        second_leaf: Vec<f64>,
        transverse: Vec<f64>,
    },
}

impl GraphPoint {
    /// Second leaf parameter `t' = whole + frac` as a float.
    pub fn t_prime(&self) -> f64 {
        match self {
            GraphPoint::Suspension { tp_whole, tp_frac, .. } => *tp_whole as f64 + tp_frac,
            GraphPoint::Product { .. } => 0.0,
        }
    }

    /// Coordinate-wise closeness of canonical representatives (torus
    /// distance on fiber coordinates).
    pub fn approx_eq(&self, other: &GraphPoint, tol: f64) -> bool {
        match (self, other) {
            (
                GraphPoint::Suspension { u: u1, t: t1, tp_whole: w1, tp_frac: f1 },
                GraphPoint::Suspension { u: u2, t: t2, tp_whole: w2, tp_frac: f2 },
            ) => {
                torus_dist(u1[0], u2[0]) < tol
                    && torus_dist(u1[1], u2[1]) < tol
                    && (t1 - t2).abs() < tol
                    && ((*w1 as f64 + f1) - (*w2 as f64 + f2)).abs() < tol
            }
            (
                GraphPoint::Product { first_leaf: a1, second_leaf: b1, transverse: c1 },
                GraphPoint::Product { first_leaf: a2, second_leaf: b2, transverse: c2 },
            ) => {
                let close = |x: &Vec<f64>, y: &Vec<f64>| {
                    x.iter().zip(y).all(|(p, q)| (p - q).abs() < tol)
                };
                close(a1, a2) && close(b1, b2) && close(c1, c2)
            }
            _ => false,
        }
    }
}

impl fmt::Display for GraphPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphPoint::Suspension { u, t, tp_whole, tp_frac } => write!(
                f,
                "(u=({:.6}, {:.6}), t={:.6}, t'={:.6})",
                u[0],
                u[1],
                t,
                *tp_whole as f64 + tp_frac
            ),
            GraphPoint::Product { first_leaf, second_leaf, transverse } => write!(
                f,
                "(first={:?}, second={:?}, transverse={:?})",
                first_leaf, second_leaf, transverse
            ),
        }
    }
}

/// Which canonical projection of the pair space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    First,
    Second,
}

impl Side {
    pub fn label(&self) -> &'static str {
        match self {
            Side::First => "first",
            Side::Second => "second",
        }
    }
}

/// Splitting of a pair-space tangent vector into the fiber direction of the
/// first projection, the shared normal directions, and the fiber direction
/// of the second projection. Components are full-dimension vectors.
#[derive(Debug, Clone)]
pub struct GraphTangent {
    /// Component killed by the first projection's differential.
    pub first_vertical: DVector<f64>,
    /// Component pushing into the orthogonal distribution on both sides.
    pub normal: DVector<f64>,
    /// Component killed by the second projection's differential.
    pub second_vertical: DVector<f64>,
}

impl GraphTangent {
    pub fn total(&self) -> DVector<f64> {
        &self.first_vertical + &self.normal + &self.second_vertical
    }
}

/// Classification of a leaf of the induced foliation on the pair space.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphLeaf {
    /// Full product of the base leaf with itself (trivial identification).
    Plane,
    /// Quotient of the product of a closed leaf with itself by the diagonal
    /// shift `(t, t') ↦ (t + shift, t' + shift)`.
    Cylinder { deck_shift: u32 },
}

impl fmt::Display for GraphLeaf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GraphLeaf::Plane => write!(f, "plane"),
            GraphLeaf::Cylinder { deck_shift } => write!(f, "cylinder(shift={deck_shift})"),
        }
    }
}

/// Perturbation hook for negative tests: adds an offset to the diagonal of
/// one block of the candidate pair metric before the submersion axioms run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphMetricFault {
    None,
    /// Perturb the block tangent to the first projection's fibers.
    FirstVertical(f64),
    /// Perturb the transverse block.
    Normal(f64),
    /// Perturb the block tangent to the second projection's fibers.
    SecondVertical(f64),
}

// ---------------------------------------------------------------------------
// The pair-space model

#[derive(Debug, Clone)]
enum GraphKind {
    Suspension { a: IntMat2 },
    Product { leaf_dim: usize, codim: usize },
}

/// The pair space of a foliated model, as a foliated model of its own plus
/// exact groupoid structure.
#[derive(Debug, Clone)]
pub struct GraphModel {
    base: FoliationModel,
    model: FoliationModel,
    kind: GraphKind,
}

impl GraphModel {
    /// Build the pair space of `base`.
    ///
    /// Construction is refused (`NotPseudoRiemannian`) when the transverse
    /// metric block fails to be projectable along leaves, since outside
    /// that regime the pair space need not be a Hausdorff manifold with a
    /// well-defined induced metric.
    pub fn build(base: &FoliationModel) -> Result<GraphModel> {
        let gate = check_projectability(
            base,
            SamplingPlan::new(GATE_SEED, GATE_SAMPLES),
            Tolerance::default(),
        );
        if !gate.passed() {
            return Err(Error::NotPseudoRiemannian { residual: gate.max_residual });
        }
        match &base.topology {
            Topology::Suspension { a } => Ok(Self::build_suspension(base, *a)),
            Topology::Plain => Self::build_product(base),
            Topology::SuspensionGraph { .. } => Err(Error::InvalidDecomposition(
                "the base model is already a pair space".into(),
            )),
        }
    }

    fn build_suspension(base: &FoliationModel, a: IntMat2) -> GraphModel {
        let domain = Domain::new(vec![
            Axis::Periodic { period: 1.0 },
            Axis::Periodic { period: 1.0 },
            Axis::Line { sample_lo: 0.0, sample_hi: 1.0 },
            Axis::Line { sample_lo: -1.0, sample_hi: 1.0 },
        ]);
        let bm = base.metric.clone();
        let eval = move |x: &[f64]| {
            let g = bm.eval(&[x[0], x[1], 0.0]);
            let mut out = DMatrix::identity(4, 4);
            for i in 0..2 {
                for j in 0..2 {
                    out[(i, j)] = g[(i, j)];
                }
            }
            out
        };
        let bm2 = base.metric.clone();
        let deriv = move |x: &[f64], k: usize| {
            let mut out = DMatrix::zeros(4, 4);
            if k < 2 {
                let d = bm2.partial(&[x[0], x[1], 0.0], k);
                for i in 0..2 {
                    for j in 0..2 {
                        out[(i, j)] = d[(i, j)];
                    }
                }
            }
            out
        };
        let metric = MetricField::new(domain, eval).with_deriv(deriv);

        let mut atlas = Vec::new();
        for &cu1 in &[0.0, 0.5] {
            for &cu2 in &[0.0, 0.5] {
                for &ct in &[0.0, 0.5] {
                    for &ctp in &[-1.0, -0.5, 0.0, 0.5, 1.0] {
                        atlas.push(AdaptedChart {
                            center: vec![cu1, cu2, ct, ctp],
                            half_size: 0.45,
                        });
                    }
                }
            }
        }

        let model = FoliationModel {
            name: format!("graph({})", base.name),
            metric,
            leaf_axes: vec![2, 3],
            transverse_axes: vec![0, 1],
            topology: Topology::SuspensionGraph { a },
            atlas,
        };
        GraphModel { base: base.clone(), model, kind: GraphKind::Suspension { a } }
    }

    fn build_product(base: &FoliationModel) -> Result<GraphModel> {
        let p = base.leaf_dim();
        let n = base.dim();
        let q = n - p;
        let ordered = base.leaf_axes.iter().copied().eq(0..p)
            && base.transverse_axes.iter().copied().eq(p..n);
        if !ordered {
            return Err(Error::InvalidDecomposition(
                "pair construction needs leaf-block-first coordinates".into(),
            ));
        }

        let mut axes: Vec<Axis> = base.metric.domain().axes[..p].to_vec();
        axes.extend_from_slice(&base.metric.domain().axes[..p]);
        axes.extend_from_slice(&base.metric.domain().axes[p..]);
        let domain = Domain::new(axes);

        let bm = base.metric.clone();
        let eval = move |c: &[f64]| {
            let mut x: Vec<f64> = c[..p].to_vec();
            x.extend_from_slice(&c[2 * p..]);
            let mut y: Vec<f64> = c[p..2 * p].to_vec();
            y.extend_from_slice(&c[2 * p..]);
            let gx = bm.eval(&x);
            let gy = bm.eval(&y);
            let m = 2 * p + q;
            let mut out = DMatrix::zeros(m, m);
            for i in 0..p {
                for j in 0..p {
                    out[(i, j)] = gx[(i, j)];
                    out[(p + i, p + j)] = gy[(i, j)];
                }
            }
            for d in 0..q {
                for e in 0..q {
                    out[(2 * p + d, 2 * p + e)] = gx[(p + d, p + e)];
                }
                for i in 0..p {
                    out[(i, 2 * p + d)] = gx[(i, p + d)];
                    out[(2 * p + d, i)] = gx[(p + d, i)];
                    out[(p + i, 2 * p + d)] = gy[(i, p + d)];
                    out[(2 * p + d, p + i)] = gy[(p + d, i)];
                }
            }
            out
        };
        let metric = MetricField::new(domain, eval);
        let atlas = vec![whole_domain_chart(metric.domain())];
        let model = FoliationModel {
            name: format!("graph({})", base.name),
            metric,
            leaf_axes: (0..2 * p).collect(),
            transverse_axes: (2 * p..2 * p + q).collect(),
            topology: Topology::Plain,
            atlas,
        };
        Ok(GraphModel {
            base: base.clone(),
            model,
            kind: GraphKind::Product { leaf_dim: p, codim: q },
        })
    }

    /// The pair space as a foliated model: leaves are pairs confined to one
    /// base leaf, transverse directions are the shared normal ones.
    pub fn as_model(&self) -> &FoliationModel {
        &self.model
    }

    pub fn base(&self) -> &FoliationModel {
        &self.base
    }

    /// Dimension of the pair space (twice the base dimension minus the
    /// codimension).
    pub fn dim(&self) -> usize {
        self.model.dim()
    }

    fn monodromy(&self) -> IntMat2 {
        match &self.kind {
            GraphKind::Suspension { a } => *a,
            GraphKind::Product { .. } => {
                unreachable!("plain pair spaces carry no monodromy")
            }
        }
    }

    // -- construction of points ---------------------------------------------

    /// The pair point joining `x` to `y` through the `k`-th germ class of
    /// leafwise paths.
    ///
    /// `k` must be 0 unless the common leaf is closed with nontrivial germ
    /// classes; points on different leaves are rejected.
    pub fn graph_point(&self, x: &[f64], k: i64, y: &[f64]) -> Result<GraphPoint> {
        match &self.kind {
            GraphKind::Suspension { a } => {
                let nx = self.base.normalize(x);
                let ny = self.base.normalize(y);
                let mut matches: Vec<i64> = Vec::new();
                for m in -WINDING_SEARCH_BOUND..=WINDING_SEARCH_BOUND {
                    let v = a.pow(-m).apply_f([nx[0], nx[1]]);
                    if torus_dist(v[0], ny[0]) < ENDPOINT_TOL
                        && torus_dist(v[1], ny[1]) < ENDPOINT_TOL
                    {
                        matches.push(m as i64);
                    }
                }
                if matches.is_empty() {
                    return Err(Error::LeafMismatch);
                }
                // A unique match with a trivial class index needs no leaf
                // classification; this keeps long-period closed orbits
                // usable as long as their germ is unambiguous.
                let whole = if k == 0 && matches.len() == 1 {
                    matches[0]
                } else {
                    match self.base.classify_leaf(&nx)? {
                        LeafClass::Generic => {
                            if k != 0 {
                                return Err(Error::NoSuchLoopClass { class: k });
                            }
                            matches[0]
                        }
                        LeafClass::Periodic { period } => {
                            let m0 = matches
                                .iter()
                                .copied()
                                .find(|&m| m >= 0)
                                .expect("a closed orbit always matches a nonnegative power");
                            m0 + k * period as i64
                        }
                    }
                };
                Ok(GraphPoint::Suspension {
                    u: [nx[0], nx[1]],
                    t: nx[2],
                    tp_whole: whole,
                    tp_frac: ny[2],
                })
            }
            GraphKind::Product { leaf_dim, .. } => {
                let p = *leaf_dim;
                let nx = self.base.normalize(x);
                let ny = self.base.normalize(y);
                let gap = self
                    .base
                    .transverse_axes
                    .iter()
                    .map(|&ax| self.base_axis_dist(ax, nx[ax], ny[ax]))
                    .fold(0.0f64, f64::max);
                if gap > ENDPOINT_TOL {
                    return Err(Error::LeafMismatch);
                }
                if k != 0 {
                    return Err(Error::NoSuchLoopClass { class: k });
                }
                Ok(GraphPoint::Product {
                    first_leaf: nx[..p].to_vec(),
                    second_leaf: ny[..p].to_vec(),
                    transverse: nx[p..].to_vec(),
                })
            }
        }
    }

    /// Unit element at `x`: the trivial germ from `x` to itself.
    pub fn unit(&self, x: &[f64]) -> Result<GraphPoint> {
        self.graph_point(x, 0, x)
    }

    fn base_axis_dist(&self, axis: usize, a: f64, b: f64) -> f64 {
        match self.base.metric.domain().axes[axis] {
            Axis::Periodic { period } => {
                let d = (a - b).rem_euclid(period);
                d.min(period - d)
            }
            _ => (a - b).abs(),
        }
    }

    fn base_point_gap(&self, a: &[f64], b: &[f64]) -> f64 {
        (0..a.len())
            .map(|i| self.base_axis_dist(i, a[i], b[i]))
            .fold(0.0, f64::max)
    }

    // -- groupoid structure -------------------------------------------------

    /// Partial multiplication: the second endpoint of `z1` must match the
    /// first endpoint of `z2`; germ classes concatenate.
    pub fn compose(&self, z1: &GraphPoint, z2: &GraphPoint) -> Result<GraphPoint> {
        let mid1 = self.project(z1, Side::Second);
        let mid2 = self.project(z2, Side::First);
        let gap = self.base_point_gap(&mid1, &mid2);
        if gap > ENDPOINT_TOL {
            return Err(Error::EndpointMismatch { gap });
        }
        match (z1, z2) {
            (
                GraphPoint::Suspension { u, t, tp_whole: w1, .. },
                GraphPoint::Suspension { tp_whole: w2, tp_frac: f2, .. },
            ) => Ok(GraphPoint::Suspension {
                u: *u,
                t: *t,
                tp_whole: w1 + w2,
                tp_frac: *f2,
            }),
            (
                GraphPoint::Product { first_leaf, transverse, .. },
                GraphPoint::Product { second_leaf, .. },
            ) => Ok(GraphPoint::Product {
                first_leaf: first_leaf.clone(),
                second_leaf: second_leaf.clone(),
                transverse: transverse.clone(),
            }),
            _ => Err(Error::LeafMismatch),
        }
    }

    /// Groupoid inverse: swap the endpoints and reverse the germ.
    pub fn inverse(&self, z: &GraphPoint) -> GraphPoint {
        match z {
            GraphPoint::Suspension { u, t, tp_whole, tp_frac } => {
                let a = self.monodromy();
                let v = a.pow(-(*tp_whole as i32)).apply_f(*u);
                GraphPoint::Suspension {
                    u: [v[0].rem_euclid(1.0), v[1].rem_euclid(1.0)],
                    t: *tp_frac,
                    tp_whole: -tp_whole,
                    tp_frac: *t,
                }
            }
            GraphPoint::Product { first_leaf, second_leaf, transverse } => {
                GraphPoint::Product {
                    first_leaf: second_leaf.clone(),
                    second_leaf: first_leaf.clone(),
                    transverse: transverse.clone(),
                }
            }
        }
    }

    /// Germ-class index of `z` relative to the base germ joining its
    /// endpoints (0 on open leaves and plain models).
    pub fn holonomy_class(&self, z: &GraphPoint) -> Result<i64> {
        match z {
            GraphPoint::Product { .. } => Ok(0),
            GraphPoint::Suspension { u, tp_whole, .. } => {
                match self.base.classify_leaf(&[u[0], u[1], 0.0])? {
                    LeafClass::Generic => Ok(0),
                    LeafClass::Periodic { period } => Ok(tp_whole.div_euclid(period as i64)),
                }
            }
        }
    }

    // -- projections and coordinates ----------------------------------------

    /// Canonical projection to a base point.
    pub fn project(&self, z: &GraphPoint, side: Side) -> Vec<f64> {
        match z {
            GraphPoint::Suspension { u, t, tp_whole, tp_frac } => match side {
                Side::First => vec![u[0], u[1], *t],
                Side::Second => {
                    let a = self.monodromy();
                    let v = a.pow(-(*tp_whole as i32)).apply_f(*u);
                    vec![v[0].rem_euclid(1.0), v[1].rem_euclid(1.0), *tp_frac]
                }
            },
            GraphPoint::Product { first_leaf, second_leaf, transverse } => {
                let leaf = match side {
                    Side::First => first_leaf,
                    Side::Second => second_leaf,
                };
                leaf.iter().chain(transverse.iter()).copied().collect()
            }
        }
    }

    /// Differential of a canonical projection at `z`, applied to a
    /// pair-space tangent vector in chart coordinates.
    pub fn pushforward(&self, z: &GraphPoint, v: &DVector<f64>, side: Side) -> DVector<f64> {
        match (&self.kind, z) {
            (GraphKind::Suspension { a }, GraphPoint::Suspension { tp_whole, .. }) => match side
            {
                Side::First => DVector::from_vec(vec![v[0], v[1], v[2]]),
                Side::Second => {
                    let m = a.pow(-(*tp_whole as i32));
                    let w = m.apply_f([v[0], v[1]]);
                    DVector::from_vec(vec![w[0], w[1], v[3]])
                }
            },
            (GraphKind::Product { leaf_dim, codim }, GraphPoint::Product { .. }) => {
                let (p, q) = (*leaf_dim, *codim);
                let lo = match side {
                    Side::First => 0,
                    Side::Second => p,
                };
                let mut out = DVector::zeros(p + q);
                for i in 0..p {
                    out[i] = v[lo + i];
                }
                for d in 0..q {
                    out[p + d] = v[2 * p + d];
                }
                out
            }
            _ => panic!("pair point does not belong to this model"),
        }
    }

    /// Chart coordinates of `z` in the pair-space model.
    pub fn coords(&self, z: &GraphPoint) -> Vec<f64> {
        match z {
            GraphPoint::Suspension { u, t, tp_whole, tp_frac } => {
                vec![u[0], u[1], *t, *tp_whole as f64 + tp_frac]
            }
            GraphPoint::Product { first_leaf, second_leaf, transverse } => first_leaf
                .iter()
                .chain(second_leaf.iter())
                .chain(transverse.iter())
                .copied()
                .collect(),
        }
    }

    /// Canonical point of arbitrary pair-space chart coordinates (reduces
    /// through the diagonal deck action; idempotent on canonical data).
    pub fn point_from_coords(&self, c: &[f64]) -> GraphPoint {
        match &self.kind {
            GraphKind::Suspension { a } => {
                let n = c[2].floor();
                let u = a.pow(-(n as i32)).apply_f([c[0], c[1]]);
                let tp = c[3] - n;
                let w = tp.floor();
                GraphPoint::Suspension {
                    u: [u[0].rem_euclid(1.0), u[1].rem_euclid(1.0)],
                    t: c[2] - n,
                    tp_whole: w as i64,
                    tp_frac: tp - w,
                }
            }
            GraphKind::Product { leaf_dim, .. } => {
                let p = *leaf_dim;
                let mut x: Vec<f64> = c[..p].to_vec();
                x.extend_from_slice(&c[2 * p..]);
                let mut y: Vec<f64> = c[p..2 * p].to_vec();
                y.extend_from_slice(&c[2 * p..]);
                let nx = self.base.normalize(&x);
                let ny = self.base.normalize(&y);
                GraphPoint::Product {
                    first_leaf: nx[..p].to_vec(),
                    second_leaf: ny[..p].to_vec(),
                    transverse: nx[p..].to_vec(),
                }
            }
        }
    }

    // -- tangent splitting --------------------------------------------------

    /// Basis of the first projection's fiber directions.
    pub fn first_vertical_basis(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        match &self.kind {
            GraphKind::Suspension { .. } => vec![basis_vector(n, 3)],
            GraphKind::Product { leaf_dim, .. } => {
                (*leaf_dim..2 * leaf_dim).map(|i| basis_vector(n, i)).collect()
            }
        }
    }

    /// Basis of the second projection's fiber directions.
    pub fn second_vertical_basis(&self) -> Vec<DVector<f64>> {
        let n = self.dim();
        match &self.kind {
            GraphKind::Suspension { .. } => vec![basis_vector(n, 2)],
            GraphKind::Product { leaf_dim, .. } => {
                (0..*leaf_dim).map(|i| basis_vector(n, i)).collect()
            }
        }
    }

    /// Basis of the normal directions at `z`: vectors whose pushforwards
    /// land in the orthogonal distribution on both sides, computed from the
    /// two pushforward constraints.
    pub fn normal_basis(&self, z: &GraphPoint) -> Result<Vec<DVector<f64>>> {
        let x = self.project(z, Side::First);
        let y = self.project(z, Side::Second);
        let sx = SplitBasis::at(&self.base, &x)?;
        let sy = SplitBasis::at(&self.base, &y)?;
        let n = self.dim();
        let ld = self.base.leaf_dim();
        let mut constraint = DMatrix::zeros(2 * ld, n);
        for i in 0..n {
            let e = basis_vector(n, i);
            let c1 = sx.coefficients(&self.pushforward(z, &e, Side::First))?;
            let c2 = sy.coefficients(&self.pushforward(z, &e, Side::Second))?;
            for a in 0..ld {
                constraint[(a, i)] = c1[a];
                constraint[(ld + a, i)] = c2[a];
            }
        }
        null_space(&constraint, n - 2 * ld)
    }

    /// Split a pair-space tangent vector into its three components; the
    /// reassembled sum matches the input to solver accuracy.
    pub fn decompose_tangent(&self, z: &GraphPoint, v: &DVector<f64>) -> Result<GraphTangent> {
        let b1 = self.first_vertical_basis();
        let bn = self.normal_basis(z)?;
        let b2 = self.second_vertical_basis();
        let n = self.dim();
        let mut m = DMatrix::zeros(n, n);
        for (i, col) in b1.iter().chain(bn.iter()).chain(b2.iter()).enumerate() {
            m.set_column(i, col);
        }
        let lu = m.full_piv_lu();
        let c = lu.solve(v).ok_or_else(|| {
            Error::InvalidDecomposition("pair-space tangent basis is singular".into())
        })?;
        let mut first_vertical: DVector<f64> = DVector::zeros(n);
        let mut normal: DVector<f64> = DVector::zeros(n);
        let mut second_vertical: DVector<f64> = DVector::zeros(n);
        for (i, b) in b1.iter().enumerate() {
            first_vertical += b * c[i];
        }
        for (i, b) in bn.iter().enumerate() {
            normal += b * c[b1.len() + i];
        }
        for (i, b) in b2.iter().enumerate() {
            second_vertical += b * c[b1.len() + bn.len() + i];
        }
        Ok(GraphTangent { first_vertical, normal, second_vertical })
    }

    fn validate_tangent(&self, z: &GraphPoint, t: &GraphTangent) -> Result<()> {
        let scale = (t.first_vertical.norm() + t.normal.norm() + t.second_vertical.norm())
            .max(f64::MIN_POSITIVE);
        let tol = 1e-9 * scale;
        if self.pushforward(z, &t.first_vertical, Side::First).norm() > tol {
            return Err(Error::InvalidDecomposition(
                "first component survives the first projection".into(),
            ));
        }
        if self.pushforward(z, &t.second_vertical, Side::Second).norm() > tol {
            return Err(Error::InvalidDecomposition(
                "second component survives the second projection".into(),
            ));
        }
        let x = self.project(z, Side::First);
        let y = self.project(z, Side::Second);
        let sx = SplitBasis::at(&self.base, &x)?;
        let sy = SplitBasis::at(&self.base, &y)?;
        if sx.leafwise_norm(&self.pushforward(z, &t.normal, Side::First))? > tol
            || sy.leafwise_norm(&self.pushforward(z, &t.normal, Side::Second))? > tol
        {
            return Err(Error::InvalidDecomposition(
                "normal component has a leafwise shadow".into(),
            ));
        }
        Ok(())
    }

    // -- induced metric -----------------------------------------------------

    /// Induced pair metric: the first projection's pullback on the whole
    /// vector plus the second projection's pullback on the first-vertical
    /// component.
    pub fn induced_metric_d(
        &self,
        z: &GraphPoint,
        xt: &GraphTangent,
        yt: &GraphTangent,
    ) -> Result<f64> {
        self.validate_tangent(z, xt)?;
        self.validate_tangent(z, yt)?;
        let x = self.project(z, Side::First);
        let y = self.project(z, Side::Second);
        let gx = self.base.metric.eval_checked(&x)?;
        let gy = self.base.metric.eval_checked(&y)?;
        let p1x = self.pushforward(z, &xt.total(), Side::First);
        let p1y = self.pushforward(z, &yt.total(), Side::First);
        let p2x1 = self.pushforward(z, &xt.first_vertical, Side::Second);
        let p2y1 = self.pushforward(z, &yt.first_vertical, Side::Second);
        Ok(quad(&gx, &p1x, &p1y) + quad(&gy, &p2x1, &p2y1))
    }

    /// The same metric written out per component pair; must agree with
    /// [`Self::induced_metric_d`] identically.
    pub fn expanded_metric_d(
        &self,
        z: &GraphPoint,
        xt: &GraphTangent,
        yt: &GraphTangent,
    ) -> Result<f64> {
        let x = self.project(z, Side::First);
        let y = self.project(z, Side::Second);
        let gx = self.base.metric.eval_checked(&x)?;
        let gy = self.base.metric.eval_checked(&y)?;
        let term2 = quad(
            &gx,
            &self.pushforward(z, &xt.second_vertical, Side::First),
            &self.pushforward(z, &yt.second_vertical, Side::First),
        );
        let termn = quad(
            &gx,
            &self.pushforward(z, &xt.normal, Side::First),
            &self.pushforward(z, &yt.normal, Side::First),
        );
        let term1 = quad(
            &gy,
            &self.pushforward(z, &xt.first_vertical, Side::Second),
            &self.pushforward(z, &yt.first_vertical, Side::Second),
        );
        Ok(term2 + termn + term1)
    }

    /// Matrix of the induced metric on the coordinate frame at `z`,
    /// computed through the tangent splitting.
    pub fn induced_metric_matrix(&self, z: &GraphPoint) -> Result<DMatrix<f64>> {
        let n = self.dim();
        let parts: Vec<GraphTangent> = (0..n)
            .map(|i| self.decompose_tangent(z, &basis_vector(n, i)))
            .collect::<Result<_>>()?;
        let mut out = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i..n {
                let v = self.induced_metric_d(z, &parts[i], &parts[j])?;
                out[(i, j)] = v;
                out[(j, i)] = v;
            }
        }
        Ok(out)
    }

    /// Reconstruct the pair metric at `z` purely from its characterizing
    /// properties — both projections pseudo-Riemannian submersions and the
    /// two vertical distributions orthogonal — and return its coordinate
    /// matrix. Agreement with the constructed metric verifies uniqueness.
    pub fn reconstructed_metric_matrix(&self, z: &GraphPoint) -> Result<DMatrix<f64>> {
        let x = self.project(z, Side::First);
        let y = self.project(z, Side::Second);
        let gx = self.base.metric.eval_checked(&x)?;
        let gy = self.base.metric.eval_checked(&y)?;
        let b1 = self.first_vertical_basis();
        let bn = self.normal_basis(z)?;
        let b2 = self.second_vertical_basis();
        let n = self.dim();
        let all: Vec<DVector<f64>> =
            b1.iter().chain(bn.iter()).chain(b2.iter()).cloned().collect();
        let k1 = b1.len();
        let kn = bn.len();
        // Block form in the split basis, assembled from the three
        // characterizing properties.
        let mut block = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let (bi, bj) = (&all[i], &all[j]);
                let in1 = |r: usize| r < k1;
                let inn = |r: usize| r >= k1 && r < k1 + kn;
                let in2 = |r: usize| r >= k1 + kn;
                block[(i, j)] = if in1(i) && in1(j) || in1(i) && inn(j) || inn(i) && in1(j) {
                    // The second projection is isometric on the complement
                    // of its fibers, which contains these directions.
                    quad(
                        &gy,
                        &self.pushforward(z, bi, Side::Second),
                        &self.pushforward(z, bj, Side::Second),
                    )
                } else if in1(i) && in2(j) || in2(i) && in1(j) {
                    // The two vertical distributions are orthogonal.
                    0.0
                } else {
                    // Remaining pairs avoid the first projection's fibers,
                    // where that projection is isometric.
                    quad(
                        &gx,
                        &self.pushforward(z, bi, Side::First),
                        &self.pushforward(z, bj, Side::First),
                    )
                };
            }
        }
        // Transform from the split basis to coordinates: d(X, Y) = cᵀ B c
        // with c the split-basis coefficients of X.
        let mut bmat = DMatrix::zeros(n, n);
        for (i, col) in all.iter().enumerate() {
            bmat.set_column(i, col);
        }
        let binv = bmat
            .try_inverse()
            .ok_or_else(|| Error::InvalidDecomposition("split basis is singular".into()))?;
        Ok(binv.transpose() * block * binv)
    }

    /// Pullback defect of the pair metric under the `k`-th diagonal deck
    /// transformation (0 for plain pairs, which have no deck action).
    pub fn deck_pullback_defect(&self, z: &GraphPoint, k: i32) -> f64 {
        match &self.kind {
            GraphKind::Product { .. } => 0.0,
            GraphKind::Suspension { a } => {
                let zc = self.coords(z);
                let moved = self.model.deck_apply(&zc, k);
                let d0 = self.model.metric.eval(&zc);
                let d1 = self.model.metric.eval(&moved);
                let mut j = DMatrix::identity(4, 4);
                let ak = a.pow(k).to_dmatrix();
                for r in 0..2 {
                    for c in 0..2 {
                        j[(r, c)] = ak[(r, c)];
                    }
                }
                let pb = j.transpose() * d1 * j;
                (&pb - &d0).amax() / d0.amax().max(f64::MIN_POSITIVE)
            }
        }
    }

    // -- leaf structure -----------------------------------------------------

    /// Structure of the pair-space leaf over the base leaf through `x`:
    /// the full product for open leaves (and plain models), the quotient
    /// cylinder with its exact deck shift for closed leaves.
    pub fn leaf_structure(&self, x: &[f64]) -> Result<GraphLeaf> {
        match &self.kind {
            GraphKind::Product { .. } => Ok(GraphLeaf::Plane),
            GraphKind::Suspension { .. } => match self.base.classify_leaf(x)? {
                LeafClass::Generic => Ok(GraphLeaf::Plane),
                LeafClass::Periodic { period } => {
                    Ok(GraphLeaf::Cylinder { deck_shift: period })
                }
            },
        }
    }
}

fn quad(g: &DMatrix<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    (a.transpose() * g * b)[(0, 0)]
}

fn whole_domain_chart(domain: &Domain) -> AdaptedChart {
    let center: Vec<f64> = domain
        .axes
        .iter()
        .map(|a| match *a {
            Axis::Interval { lo, hi } => 0.5 * (lo + hi),
            Axis::Periodic { period } => 0.5 * period,
            Axis::Line { sample_lo, sample_hi } => 0.5 * (sample_lo + sample_hi),
        })
        .collect();
    let half = domain
        .axes
        .iter()
        .map(|a| match *a {
            Axis::Interval { lo, hi } => 0.5 * (hi - lo),
            Axis::Periodic { period } => 0.5 * period,
            Axis::Line { sample_lo, sample_hi } => 1.0 + 0.5 * (sample_hi - sample_lo),
        })
        .fold(f64::INFINITY, f64::min);
    AdaptedChart { center, half_size: half }
}

fn apply_fault(d: &mut DMatrix<f64>, kind: &GraphKind, fault: GraphMetricFault) {
    let (axes, eps): (Vec<usize>, f64) = match (fault, kind) {
        (GraphMetricFault::None, _) => (Vec::new(), 0.0),
        (GraphMetricFault::FirstVertical(e), GraphKind::Suspension { .. }) => (vec![3], e),
        (GraphMetricFault::Normal(e), GraphKind::Suspension { .. }) => (vec![0, 1], e),
        (GraphMetricFault::SecondVertical(e), GraphKind::Suspension { .. }) => (vec![2], e),
        (GraphMetricFault::FirstVertical(e), GraphKind::Product { leaf_dim, .. }) => {
            ((*leaf_dim..2 * leaf_dim).collect(), e)
        }
        (GraphMetricFault::Normal(e), GraphKind::Product { leaf_dim, codim }) => {
            ((2 * leaf_dim..2 * leaf_dim + codim).collect(), e)
        }
        (GraphMetricFault::SecondVertical(e), GraphKind::Product { leaf_dim, .. }) => {
            ((0..*leaf_dim).collect(), e)
        }
    };
    for ax in axes {
        d[(ax, ax)] += eps;
    }
}

fn worst(a: Verdict, b: Verdict) -> Verdict {
    use Verdict::*;
    match (a, b) {
        (Degenerate, _) | (_, Degenerate) => Degenerate,
        (Fail, _) | (_, Fail) => Fail,
        _ => Pass,
    }
}

// ---------------------------------------------------------------------------
// Checkers

/// Induced-metric consistency at sampled pair points: the splitting-based
/// evaluation matches the constructed block metric, the definition matches
/// its expanded form, the two vertical distributions are orthogonal, the
/// characterization-based reconstruction agrees, the diagonal deck action
/// is isometric, and the signature is as expected.
pub fn check_graph_metric(gm: &GraphModel, plan: SamplingPlan, tol: Tolerance) -> CheckReport {
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let coords = gm.as_model().sample_point(&mut rng);
        let z = gm.point_from_coords(&coords);
        let zc = gm.coords(&z);
        let built = gm.as_model().metric.eval_checked(&zc)?;
        let scale = built.amax().max(f64::MIN_POSITIVE);

        let computed = gm.induced_metric_matrix(&z)?;
        let r_matrix = (&computed - &built).amax() / scale;

        let n = gm.dim();
        let parts: Vec<GraphTangent> = (0..n)
            .map(|k| gm.decompose_tangent(&z, &basis_vector(n, k)))
            .collect::<Result<_>>()?;
        let mut r_expand = 0.0f64;
        for a in 0..n {
            for b in a..n {
                let d1 = gm.induced_metric_d(&z, &parts[a], &parts[b])?;
                let d2 = gm.expanded_metric_d(&z, &parts[a], &parts[b])?;
                r_expand = r_expand.max((d1 - d2).abs() / scale);
            }
        }

        let mut r_orth = 0.0f64;
        for v1 in gm.first_vertical_basis() {
            for v2 in gm.second_vertical_basis() {
                r_orth = r_orth.max(quad(&built, &v1, &v2).abs() / scale);
            }
        }

        let rebuilt = gm.reconstructed_metric_matrix(&z)?;
        let r_unique = (&rebuilt - &built).amax() / scale;

        let mut r_deck = 0.0f64;
        for k in -2..=2 {
            r_deck = r_deck.max(gm.deck_pullback_defect(&z, k));
        }

        let sig = signature_of_matrix(&built);
        let sig_ok = match gm.kind {
            GraphKind::Suspension { .. } => sig == Signature { plus: 3, minus: 1, null: 0 },
            GraphKind::Product { .. } => sig.null == 0,
        };
        let r_sig = if sig_ok { 0.0 } else { 1.0 };

        let value = r_matrix
            .max(r_expand)
            .max(r_orth)
            .max(r_unique)
            .max(r_deck)
            .max(r_sig);
        Ok(ResidualSample { index: i, location: zc, value })
    });
    assemble("graph-metric", tol, outcomes)
}

/// Pseudo-Riemannian submersion axioms for one canonical projection at
/// sampled pair points: (a) the differential is onto, (b) the fiber metric
/// is nondegenerate, (c) scalar products of vectors normal to the fibers
/// are preserved. `fault` perturbs the candidate metric for negative tests.
pub fn check_prs_axioms(
    gm: &GraphModel,
    side: Side,
    plan: SamplingPlan,
    tol: Tolerance,
    fault: GraphMetricFault,
) -> CheckReport {
    let name = format!("prs-axioms-{}", side.label());
    let outcomes = run_batch(plan.mode, plan.count, |i| {
        let mut rng = sample_rng(plan.seed, i);
        let coords = gm.as_model().sample_point(&mut rng);
        let z = gm.point_from_coords(&coords);
        let zc = gm.coords(&z);
        let mut d = gm.as_model().metric.eval_checked(&zc)?;
        apply_fault(&mut d, &gm.kind, fault);
        let scale = d.amax().max(f64::MIN_POSITIVE);
        let n = gm.dim();
        let nb = gm.base.dim();

        // (a) surjectivity of the differential.
        let mut jac = DMatrix::zeros(nb, n);
        for k in 0..n {
            jac.set_column(k, &gm.pushforward(&z, &basis_vector(n, k), side));
        }
        let svd = jac.svd(false, false);
        let smax = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
        let rank = svd
            .singular_values
            .iter()
            .filter(|&&s| s > 1e-12 * smax.max(1.0))
            .count();
        let r_rank: f64 = if rank == nb { 0.0 } else { 1.0 };

        // (b) nondegenerate fiber metric.
        let fiber = match side {
            Side::First => gm.first_vertical_basis(),
            Side::Second => gm.second_vertical_basis(),
        };
        let fd = fiber.len();
        let mut gram = DMatrix::zeros(fd, fd);
        for (r, br) in fiber.iter().enumerate() {
            for (c, bc) in fiber.iter().enumerate() {
                gram[(r, c)] = quad(&d, br, bc);
            }
        }
        let r_fiber = if gram.determinant().abs() > DEGENERACY_REL * scale.powi(fd as i32) {
            0.0
        } else {
            1.0
        };

        // (c) scalar products on the normal space push down unchanged.
        let mut constraint = DMatrix::zeros(fd, n);
        for (r, br) in fiber.iter().enumerate() {
            let row = br.transpose() * &d;
            constraint.set_row(r, &row.row(0));
        }
        let normal = null_space(&constraint, n - fd)?;
        let g_side = gm.base.metric.eval_checked(&gm.project(&z, side))?;
        let mut r_push = 0.0f64;
        for (ai, na) in normal.iter().enumerate() {
            for nb2 in normal.iter().skip(ai) {
                let lhs = quad(&d, na, nb2);
                let rhs = quad(
                    &g_side,
                    &gm.pushforward(&z, na, side),
                    &gm.pushforward(&z, nb2, side),
                );
                let denom = scale * na.norm().max(1e-12) * nb2.norm().max(1e-12);
                r_push = r_push.max((lhs - rhs).abs() / denom);
            }
        }

        let value = r_rank.max(r_fiber).max(r_push);
        Ok(ResidualSample { index: i, location: zc, value })
    });
    assemble(&name, tol, outcomes)
}

/// Leaf structure of the pair space at canonical probes: open base leaves
/// give full product leaves, closed ones give cylinders whose deck shift
/// equals the leaf period; the leaf block of the pair metric is the flat
/// one on suspension pairs, block-diagonal on products.
pub fn check_leaf_structure(gm: &GraphModel, tol: Tolerance) -> CheckReport {
    let mut samples = Vec::new();
    let mut notes = Vec::new();
    let mut push = |idx: usize, loc: Vec<f64>, value: f64| {
        samples.push(ResidualSample { index: idx, location: loc, value });
    };

    match &gm.kind {
        GraphKind::Suspension { .. } => {
            let probes: [(Vec<f64>, GraphLeaf); 3] = [
                (
                    vec![std::f64::consts::SQRT_2 - 1.0, 3f64.sqrt() - 1.0, 0.3],
                    GraphLeaf::Plane,
                ),
                (vec![0.0, 0.0, 0.0], GraphLeaf::Cylinder { deck_shift: 1 }),
                (vec![0.5, 0.5, 0.0], GraphLeaf::Cylinder { deck_shift: 3 }),
            ];
            for (i, (x, expected)) in probes.iter().enumerate() {
                let got = match gm.leaf_structure(x) {
                    Ok(l) => l,
                    Err(e) => {
                        return CheckReport::degenerate(
                            "leaf-structure",
                            tol,
                            format!("classification failed: {e}"),
                        )
                    }
                };
                let class_ok = got == *expected;
                notes.push(format!("leaf over {:?}: {}", x, got));
                push(3 * i, x.clone(), if class_ok { 0.0 } else { 1.0 });

                // Leaf block of the pair metric must be the flat one.
                let zc = vec![x[0], x[1], x[2], x[2] + 0.4];
                let d = gm.as_model().metric.eval(&zc);
                let mut flat = 0.0f64;
                for (r, &ar) in gm.as_model().leaf_axes.iter().enumerate() {
                    for (c, &ac) in gm.as_model().leaf_axes.iter().enumerate() {
                        let want = if r == c { 1.0 } else { 0.0 };
                        flat = flat.max((d[(ar, ac)] - want).abs());
                    }
                }
                push(3 * i + 1, zc.clone(), flat);

                // Closed leaves: one trip around the base leaf lifts to a
                // deck shift by exactly the period.
                if let GraphLeaf::Cylinder { deck_shift } = got {
                    let z0 = match gm.graph_point(x, 0, x) {
                        Ok(z) => z,
                        Err(e) => {
                            return CheckReport::degenerate(
                                "leaf-structure",
                                tol,
                                format!("pair point failed: {e}"),
                            )
                        }
                    };
                    let z1 = match gm.graph_point(x, 1, x) {
                        Ok(z) => z,
                        Err(e) => {
                            return CheckReport::degenerate(
                                "leaf-structure",
                                tol,
                                format!("pair point failed: {e}"),
                            )
                        }
                    };
                    let (w0, w1) = match (&z0, &z1) {
                        (
                            GraphPoint::Suspension { tp_whole: w0, .. },
                            GraphPoint::Suspension { tp_whole: w1, .. },
                        ) => (*w0, *w1),
                        _ => unreachable!("suspension pair points"),
                    };
                    let shift_residual = ((w1 - w0) - deck_shift as i64).abs() as f64;
                    push(3 * i + 2, x.clone(), shift_residual);
                }
            }
        }
        GraphKind::Product { leaf_dim, .. } => {
            let p = *leaf_dim;
            let mut rng = sample_rng(7, 0);
            let x = gm.base.sample_point(&mut rng);
            let got = match gm.leaf_structure(&x) {
                Ok(l) => l,
                Err(e) => {
                    return CheckReport::degenerate(
                        "leaf-structure",
                        tol,
                        format!("classification failed: {e}"),
                    )
                }
            };
            notes.push(format!("leaf over {:?}: {}", x, got));
            push(0, x.clone(), if got == GraphLeaf::Plane { 0.0 } else { 1.0 });
            // Product pair leaves split into the two factors: no cross
            // terms between the first and second leaf blocks.
            let z = match gm.unit(&x) {
                Ok(z) => z,
                Err(e) => {
                    return CheckReport::degenerate(
                        "leaf-structure",
                        tol,
                        format!("pair point failed: {e}"),
                    )
                }
            };
            let d = gm.as_model().metric.eval(&gm.coords(&z));
            let mut cross = 0.0f64;
            for r in 0..p {
                for c in p..2 * p {
                    cross = cross.max(d[(r, c)].abs());
                }
            }
            push(1, gm.coords(&z), cross / d.amax().max(f64::MIN_POSITIVE));
        }
    }

    let mut rep = CheckReport::from_samples("leaf-structure", tol, samples);
    for n in notes {
        rep = rep.with_note(n);
    }
    rep
}

/// Bundle check for the induced foliation of the pair space: dimension
/// count, projectability of the pair metric, orthogonal transport and
/// completeness of normal geodesics, and round-trip transfer of horizontal
/// curves along leafwise paths. Construction refusal (a base that is not
/// pseudo-Riemannian) is reported as degenerate.
pub fn check_graph_foliation(
    base: &FoliationModel,
    plan: SamplingPlan,
    tol: Tolerance,
) -> CheckReport {
    let gm = match GraphModel::build(base) {
        Ok(g) => g,
        Err(e) => {
            return CheckReport::degenerate(
                "graph-foliation",
                tol,
                format!("pair-space construction refused: {e}"),
            )
        }
    };
    let expected_dim = 2 * base.dim() - base.codim();
    let dim_ok = gm.dim() == expected_dim;

    let proj = check_projectability(gm.as_model(), plan, tol);
    let orth = check_orthogonal_transport(gm.as_model(), plan, 5.0, 1e-3, tol);
    let comp_plan = SamplingPlan { count: plan.count.min(16), ..plan };
    let comp = check_transversal_completeness(gm.as_model(), comp_plan, 100.0, 1e-2);

    let extra_plan = SamplingPlan { count: plan.count.min(16), ..plan };
    let outcomes = run_batch(extra_plan.mode, extra_plan.count, |i| {
        let mut rng = sample_rng(plan.seed ^ 0x9e3779b9, i);
        let coords = gm.as_model().sample_point(&mut rng);
        let z = gm.point_from_coords(&coords);
        let zc = gm.coords(&z);

        // Normal geodesics reach a long horizon with conserved energy.
        let nb = gm.normal_basis(&z)?;
        let coeff = random_unit_vector(&mut rng, nb.len());
        let mut v: DVector<f64> = DVector::zeros(gm.dim());
        for (j, b) in nb.iter().enumerate() {
            v += b * coeff[j];
        }
        v = v.normalize();
        let start = GeodesicState { position: zc.clone(), velocity: v };
        let (trace, stop) =
            integrate_geodesic_partial(&gm.as_model().metric, start, 100.0, 1e-2);
        let r_complete = if stop.is_some() { 1.0 } else { energy_drift(&gm.as_model().metric, &trace) };

        // Transfer a horizontal probe along a leafwise path and back.
        let dir: DVector<f64> = {
            let c = random_unit_vector(&mut rng, nb.len());
            let mut d: DVector<f64> = DVector::zeros(gm.dim());
            for (j, b) in nb.iter().enumerate() {
                d += b * c[j];
            }
            d.normalize()
        };
        let dirv: Vec<f64> = dir.iter().copied().collect();
        let sigma = HorizontalCurve::ray(&zc, &dirv, 0.02, 4);
        let mut away = zc.clone();
        for (j, &ax) in gm.as_model().leaf_axes.iter().enumerate() {
            away[ax] += if j == 0 { 1.2 } else { -0.7 };
        }
        let h = LeafPath::new(vec![zc.clone(), away.clone()]);
        let moved = transfer(gm.as_model(), &sigma, &h)?;
        let mut back_end = moved.start().to_vec();
        for &ax in &gm.as_model().leaf_axes {
            back_end[ax] -= away[ax] - zc[ax];
        }
        let h_back = LeafPath::new(vec![moved.start().to_vec(), back_end]);
        let restored = transfer(gm.as_model(), &moved, &h_back)?;
        let r_transfer = restored.max_distance(&sigma, gm.as_model());

        Ok(ResidualSample {
            index: i,
            location: zc,
            value: r_complete.max(r_transfer),
        })
    });
    let bundle = assemble("graph-foliation", tol, outcomes);

    let mut verdict = bundle.verdict;
    for sub in [&proj, &orth, &comp] {
        verdict = worst(verdict, sub.verdict);
    }
    if !dim_ok {
        verdict = worst(verdict, Verdict::Fail);
    }
    let max_residual = [
        bundle.max_residual,
        proj.max_residual,
        orth.max_residual,
        comp.max_residual,
        if dim_ok { 0.0 } else { 1.0 },
    ]
    .into_iter()
    .fold(0.0f64, f64::max);

    let mut rep = bundle;
    rep.verdict = verdict;
    rep.max_residual = max_residual;
    rep.notes.push(format!(
        "dimension {} (expected {})",
        gm.dim(),
        expected_dim
    ));
    rep.notes.push(proj.summary_line());
    rep.notes.push(orth.summary_line());
    rep.notes.push(comp.summary_line());
    rep
}
