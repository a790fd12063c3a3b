//! Holonomy along leaf paths, transfer of horizontal curves along vertical
//! ones, and exact holonomy groups for the bundled models.
//!
//! Paths are piecewise-linear in cover coordinates. For the suspension a
//! leaf path only moves the `t` coordinate; every time it crosses an
//! integer `t` value the adapted charts change by one application of the
//! monodromy matrix, which is how both the transverse-disk transport and
//! the curve transfer accumulate their exact integer matrix powers.

use nalgebra::DVector;

use crate::criteria::assemble;
use crate::error::{Error, Result};
use crate::model::{
    torus_dist, FoliationModel, IntMat2, LeafClass, SplitBasis, Topology,
};
use crate::report::{CheckReport, ResidualSample, Tolerance};

/// Default transverse-disk radius for sampled holonomy maps.
pub const DISK_RADIUS_DEFAULT: f64 = 0.05;
/// Smallest disk radius tried before giving up.
pub const DISK_RADIUS_MIN: f64 = 1e-4;
/// Agreement tolerance between sampled and exact disk maps.
pub const DISK_TOL: f64 = 1e-6;
/// Chart half-size of the suspension atlas; transported disks must stay
/// inside it.
const CHART_HALF: f64 = 0.45;
/// One positive winding of a suspension leaf contributes this power of the
/// monodromy matrix to the transverse germ (from the identification
/// `(u, 1) ~ (A⁻¹ u, 0)`).
pub const GERM_POWER_PER_WINDING: i64 = -1;

// ---------------------------------------------------------------------------
// Paths

/// Piecewise-linear path in cover coordinates staying inside one leaf:
/// segments may move leaf coordinates only.
#[derive(Debug, Clone, PartialEq)]
pub struct LeafPath {
    pub vertices: Vec<Vec<f64>>,
}

impl LeafPath {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        assert!(vertices.len() >= 2, "a path needs at least two vertices");
        LeafPath { vertices }
    }

    /// Straight leafwise run advancing the suspension coordinate `t` by
    /// `winding` from `start` (cover coordinates).
    pub fn winding(start: &[f64], winding: f64) -> Self {
        let mut end = start.to_vec();
        let t_axis = end.len() - 1;
        end[t_axis] += winding;
        LeafPath { vertices: vec![start.to_vec(), end] }
    }

    pub fn start(&self) -> &[f64] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[f64] {
        self.vertices.last().expect("nonempty")
    }

    pub fn reversed(&self) -> LeafPath {
        let mut vertices = self.vertices.clone();
        vertices.reverse();
        LeafPath { vertices }
    }

    /// Join two paths whose cover endpoints coincide.
    pub fn concat(&self, other: &LeafPath) -> Result<LeafPath> {
        let gap: f64 = self
            .end()
            .iter()
            .zip(other.start())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if gap > 1e-9 {
            return Err(Error::EndpointMismatch { gap });
        }
        let mut vertices = self.vertices.clone();
        vertices.extend(other.vertices.iter().skip(1).cloned());
        Ok(LeafPath { vertices })
    }
}

/// Piecewise-linear curve in cover coordinates whose tangents lie in the
/// orthogonal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct HorizontalCurve {
    pub vertices: Vec<Vec<f64>>,
}

impl HorizontalCurve {
    pub fn new(vertices: Vec<Vec<f64>>) -> Self {
        assert!(!vertices.is_empty(), "a curve needs at least one vertex");
        HorizontalCurve { vertices }
    }

    /// Straight horizontal segment from `start` along `direction`
    /// (which must lie in the orthogonal distribution), sampled at
    /// `segments + 1` vertices.
    pub fn ray(start: &[f64], direction: &[f64], length: f64, segments: usize) -> Self {
        let mut vertices = Vec::with_capacity(segments + 1);
        for i in 0..=segments {
            let s = length * i as f64 / segments as f64;
            vertices.push(
                start
                    .iter()
                    .zip(direction)
                    .map(|(p, d)| p + s * d)
                    .collect(),
            );
        }
        HorizontalCurve { vertices }
    }

    pub fn start(&self) -> &[f64] {
        &self.vertices[0]
    }

    pub fn end(&self) -> &[f64] {
        self.vertices.last().expect("nonempty")
    }

    /// Largest pointwise distance to another curve with the same number of
    /// vertices, comparing canonical representatives on the model.
    pub fn max_distance(&self, other: &HorizontalCurve, model: &FoliationModel) -> f64 {
        assert_eq!(self.vertices.len(), other.vertices.len());
        let mut worst = 0.0f64;
        for (a, b) in self.vertices.iter().zip(&other.vertices) {
            let na = model.normalize(a);
            let nb = model.normalize(b);
            let d = na
                .iter()
                .zip(&nb)
                .enumerate()
                .map(|(i, (x, y))| match model.metric.domain().axes[i] {
                    crate::metric::Axis::Periodic { .. } => torus_dist(*x, *y),
                    _ => (x - y).abs(),
                })
                .fold(0.0f64, f64::max);
            worst = worst.max(d);
        }
        worst
    }
}

fn validate_leaf_path(model: &FoliationModel, path: &LeafPath) -> Result<()> {
    for (i, pair) in path.vertices.windows(2).enumerate() {
        let drift: f64 = model
            .transverse_axes
            .iter()
            .map(|&ax| (pair[1][ax] - pair[0][ax]).abs())
            .fold(0.0, f64::max);
        if drift > 1e-9 {
            return Err(Error::PathLeavesLeaf { segment: i, drift });
        }
    }
    Ok(())
}

fn validate_horizontal(model: &FoliationModel, curve: &HorizontalCurve) -> Result<()> {
    for (i, pair) in curve.vertices.windows(2).enumerate() {
        let delta = DVector::from_iterator(
            model.dim(),
            pair[1].iter().zip(&pair[0]).map(|(b, a)| b - a),
        );
        let norm = delta.norm();
        if norm < 1e-15 {
            continue;
        }
        let mid: Vec<f64> = pair[0]
            .iter()
            .zip(&pair[1])
            .map(|(a, b)| 0.5 * (a + b))
            .collect();
        let splitter = SplitBasis::at(model, &mid)?;
        let residual = splitter.leafwise_norm(&delta)? / norm;
        if residual > 1e-8 {
            return Err(Error::NotHorizontal { segment: i, residual });
        }
    }
    Ok(())
}

/// Integer `t`-crossings (+1 per upward crossing, −1 per downward) along a
/// monotone run from `t0` to `t1`, in traversal order.
///
/// The chart index is `floor(t)`, so upward runs cross at integers in
/// `(t0, t1]` and downward runs at integers in `(t1, t0]`; with these
/// half-open conventions crossing counts telescope over subdivided runs
/// and cancel exactly on reversals.
fn crossings(t0: f64, t1: f64) -> Vec<i32> {
    let mut out = Vec::new();
    if t1 > t0 {
        let mut m = t0.floor() as i64 + 1;
        while (m as f64) <= t1 {
            out.push(1);
            m += 1;
        }
    } else {
        let mut m = t0.floor() as i64;
        while (m as f64) > t1 {
            out.push(-1);
            m -= 1;
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Holonomy maps

/// Exact description of a transverse-disk map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExactDiskMap {
    Identity,
    /// Offset `δ ↦ Aᵏ δ` on transverse cover coordinates.
    MatrixPower { a: IntMat2, k: i64 },
}

impl ExactDiskMap {
    pub fn apply(&self, offset: &[f64]) -> Vec<f64> {
        match self {
            ExactDiskMap::Identity => offset.to_vec(),
            ExactDiskMap::MatrixPower { a, k } => {
                let m = a.pow(*k as i32);
                let v = m.apply_f([offset[0], offset[1]]);
                vec![v[0], v[1]]
            }
        }
    }

    pub fn power(&self) -> i64 {
        match self {
            ExactDiskMap::Identity => 0,
            ExactDiskMap::MatrixPower { k, .. } => *k,
        }
    }
}

/// Sampled local diffeomorphism of a transverse disk, with the exact
/// integer-matrix form alongside when the model provides one.
#[derive(Debug, Clone)]
pub struct HolonomyMap {
    /// Canonical representative of the path's start point.
    pub source: Vec<f64>,
    /// Canonical representative of the path's end point.
    pub target: Vec<f64>,
    pub radius: f64,
    /// Pairs (disk offset at the source, transported offset at the target),
    /// in transverse cover coordinates.
    pub samples: Vec<(Vec<f64>, Vec<f64>)>,
    pub exact: Option<ExactDiskMap>,
    pub tolerance: f64,
}

impl HolonomyMap {
    /// Power of the monodromy matrix realizing this map, when exact.
    pub fn germ_power(&self) -> Option<i64> {
        self.exact.map(|e| e.power())
    }

    /// Largest deviation of the sampled transport from the exact map.
    pub fn max_exact_deviation(&self) -> Option<f64> {
        let exact = self.exact?;
        Some(
            self.samples
                .iter()
                .map(|(src, img)| {
                    let want = exact.apply(src);
                    img.iter()
                        .zip(&want)
                        .map(|(a, b)| (a - b).abs())
                        .fold(0.0f64, f64::max)
                })
                .fold(0.0, f64::max),
        )
    }

    /// Whether another map agrees with this one on the shared sampled disk.
    pub fn agrees_with(&self, other: &HolonomyMap, tol: f64) -> bool {
        if self.samples.len() != other.samples.len() {
            return false;
        }
        self.samples.iter().zip(&other.samples).all(|(a, b)| {
            a.0.iter().zip(&b.0).all(|(x, y)| (x - y).abs() < tol)
                && a.1.iter().zip(&b.1).all(|(x, y)| (x - y).abs() < tol)
        })
    }
}

/// Deterministic disk sample offsets: the center plus spokes at two radii.
fn disk_offsets(codim: usize, radius: f64) -> Vec<Vec<f64>> {
    let mut out = vec![vec![0.0; codim]];
    match codim {
        1 => {
            for r in [0.5 * radius, radius] {
                out.push(vec![r]);
                out.push(vec![-r]);
            }
        }
        2 => {
            for r in [0.5 * radius, radius] {
                for i in 0..8 {
                    let phi = std::f64::consts::TAU * i as f64 / 8.0;
                    out.push(vec![r * phi.cos(), r * phi.sin()]);
                }
            }
        }
        _ => {
            for r in [0.5 * radius, radius] {
                for i in 0..codim {
                    let mut v = vec![0.0; codim];
                    v[i] = r;
                    out.push(v.clone());
                    v[i] = -r;
                    out.push(v);
                }
            }
        }
    }
    out
}

/// Transport a transverse disk along a leaf path by chaining adapted
/// charts; returns the sampled map plus its exact integer form.
///
/// If the transported disk stops fitting inside a chart the radius is
/// halved and the walk restarts, failing only below [`DISK_RADIUS_MIN`].
pub fn holonomy_along(model: &FoliationModel, path: &LeafPath) -> Result<HolonomyMap> {
    validate_leaf_path(model, path)?;
    let mut radius = DISK_RADIUS_DEFAULT;
    loop {
        match chain_disk(model, path, radius) {
            Ok(map) => return Ok(map),
            Err(Error::DiskTooLarge { .. }) if radius / 2.0 >= DISK_RADIUS_MIN => {
                radius /= 2.0;
            }
            Err(e) => return Err(e),
        }
    }
}

fn chain_disk(model: &FoliationModel, path: &LeafPath, radius: f64) -> Result<HolonomyMap> {
    let codim = model.codim();
    let offsets = disk_offsets(codim, radius);
    let mut images: Vec<Vec<f64>> = offsets.clone();
    let mut power: i64 = 0;

    match &model.topology {
        Topology::Plain => {
            // Chart transitions of a plain model do not move transverse
            // coordinates, so the chained disk map is the identity.
        }
        Topology::Suspension { a } | Topology::SuspensionGraph { a } => {
            let t_axis = model.leaf_axes[0];
            for pair in path.vertices.windows(2) {
                for step in crossings(pair[0][t_axis], pair[1][t_axis]) {
                    // Crossing t = m upward re-expresses the fiber through
                    // one application of the inverse monodromy.
                    let m = a.pow(if step > 0 {
                        GERM_POWER_PER_WINDING as i32
                    } else {
                        -GERM_POWER_PER_WINDING as i32
                    });
                    power += if step > 0 {
                        GERM_POWER_PER_WINDING
                    } else {
                        -GERM_POWER_PER_WINDING
                    };
                    for img in &mut images {
                        let v = m.apply_f([img[0], img[1]]);
                        img[0] = v[0];
                        img[1] = v[1];
                        let norm = (v[0] * v[0] + v[1] * v[1]).sqrt();
                        if norm >= CHART_HALF {
                            return Err(Error::DiskTooLarge { radius });
                        }
                    }
                }
            }
        }
    }

    let exact = match &model.topology {
        Topology::Plain => Some(ExactDiskMap::Identity),
        Topology::Suspension { a } | Topology::SuspensionGraph { a } => {
            Some(ExactDiskMap::MatrixPower { a: *a, k: power })
        }
    };
    Ok(HolonomyMap {
        source: model.normalize(path.start()),
        target: model.normalize(path.end()),
        radius,
        samples: offsets.into_iter().zip(images).collect(),
        exact,
        tolerance: DISK_TOL,
    })
}

// ---------------------------------------------------------------------------
// Transfer along vertical paths

/// Transfer a horizontal curve along a vertical (leafwise) path: build the
/// vertical-horizontal homotopy step by step and return its far edge.
///
/// The two paths must share their origin and keep their respective types
/// (horizontal tangents, leafwise motion); violations surface as errors
/// rather than silently wrong curves.
pub fn transfer(
    model: &FoliationModel,
    sigma: &HorizontalCurve,
    h: &LeafPath,
) -> Result<HorizontalCurve> {
    validate_horizontal(model, sigma)?;
    validate_leaf_path(model, h)?;
    let so = model.normalize(sigma.start());
    let ho = model.normalize(h.start());
    let gap = so
        .iter()
        .zip(&ho)
        .enumerate()
        .map(|(i, (a, b))| match model.metric.domain().axes[i] {
            crate::metric::Axis::Periodic { .. } => torus_dist(*a, *b),
            _ => (a - b).abs(),
        })
        .fold(0.0f64, f64::max);
    if gap > 1e-9 {
        return Err(Error::OriginMismatch { gap });
    }

    match &model.topology {
        Topology::Plain => {
            // Horizontal lift along a product-like vertical path: the
            // transverse trace is unchanged, the leaf coordinates follow
            // the path's endpoint.
            let end = h.end();
            let vertices = sigma
                .vertices
                .iter()
                .map(|v| {
                    let mut w = v.clone();
                    for &ax in &model.leaf_axes {
                        w[ax] = end[ax];
                    }
                    w
                })
                .collect();
            Ok(HorizontalCurve { vertices })
        }
        Topology::Suspension { a } | Topology::SuspensionGraph { a } => {
            let t_axis = model.leaf_axes[0];
            // Chain the re-chartings at each integer crossing of `t`: one
            // application of the monodromy to the whole transverse trace
            // per crossing, accumulating the net deck power.
            let mut vertices: Vec<Vec<f64>> = sigma.vertices.clone();
            let mut net: i64 = 0;
            for pair in h.vertices.windows(2) {
                for step in crossings(pair[0][t_axis], pair[1][t_axis]) {
                    let m = a.pow(if step > 0 {
                        GERM_POWER_PER_WINDING as i32
                    } else {
                        -GERM_POWER_PER_WINDING as i32
                    });
                    net += step as i64;
                    for v in &mut vertices {
                        let u = m.apply_f([v[0], v[1]]);
                        if !u[0].is_finite() || !u[1].is_finite() {
                            return Err(Error::TransferBreakdown {
                                parameter: pair[1][t_axis],
                                reason: "transverse trace diverged".into(),
                            });
                        }
                        v[0] = u[0];
                        v[1] = u[1];
                    }
                }
            }
            // Express the far edge in the chart the accumulated deck power
            // normalizes into: leaf coordinates drop by `net`.
            let end = h.end();
            for v in &mut vertices {
                for &ax in &model.leaf_axes {
                    v[ax] = end[ax] - net as f64;
                }
            }
            Ok(HorizontalCurve { vertices })
        }
    }
}

// ---------------------------------------------------------------------------
// Loop classes and groups

/// A loop class on a leaf: the `k`-th power of the leaf's fundamental
/// cycle (only closed leaves have nontrivial classes).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HolonomyClass {
    pub leaf: LeafClass,
    pub k: i64,
}

impl HolonomyClass {
    pub fn trivial(leaf: LeafClass) -> Self {
        HolonomyClass { leaf, k: 0 }
    }

    /// Compose loop classes on the same leaf (integer addition).
    pub fn compose(&self, other: &HolonomyClass) -> Result<HolonomyClass> {
        if self.leaf != other.leaf {
            return Err(Error::LeafMismatch);
        }
        Ok(HolonomyClass { leaf: self.leaf, k: self.k + other.k })
    }

    pub fn inverse(&self) -> HolonomyClass {
        HolonomyClass { leaf: self.leaf, k: -self.k }
    }
}

/// A representative vertical loop of the `k`-th class based at the
/// canonical representative of `p`'s leaf point.
pub fn class_representative(
    model: &FoliationModel,
    p: &[f64],
    k: i64,
) -> Result<(HolonomyClass, LeafPath)> {
    let class = model.classify_leaf(p)?;
    let base = model.normalize(p);
    match class {
        LeafClass::Generic => {
            if k != 0 {
                return Err(Error::NoSuchLoopClass { class: k });
            }
            Ok((HolonomyClass::trivial(class), LeafPath::winding(&base, 0.0)))
        }
        LeafClass::Periodic { period } => {
            let winding = match &model.topology {
                Topology::Plain => {
                    // Closed plain leaves wind through their periodic leaf
                    // axis; the cycle length is the axis period.
                    k as f64
                }
                _ => (period as i64 * k) as f64,
            };
            let path = match &model.topology {
                Topology::Plain => {
                    let ax = model
                        .leaf_axes
                        .iter()
                        .copied()
                        .find(|&ax| {
                            matches!(
                                model.metric.domain().axes[ax],
                                crate::metric::Axis::Periodic { .. }
                            )
                        })
                        .ok_or(Error::NoSuchLoopClass { class: k })?;
                    let period = match model.metric.domain().axes[ax] {
                        crate::metric::Axis::Periodic { period } => period,
                        _ => unreachable!(),
                    };
                    let mut end = base.clone();
                    end[ax] += winding * period;
                    LeafPath::new(vec![base.clone(), end])
                }
                _ => LeafPath::winding(&base, winding),
            };
            Ok((HolonomyClass { leaf: class, k }, path))
        }
    }
}

/// Action of a loop class on a horizontal curve: transfer along a
/// representative loop.
pub fn m_holonomy_action(
    model: &FoliationModel,
    k: i64,
    sigma: &HorizontalCurve,
) -> Result<HorizontalCurve> {
    let (_, path) = class_representative(model, sigma.start(), k)?;
    transfer(model, sigma, &path)
}

/// Holonomy group of the leaf through `p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum HolonomyGroup {
    Trivial,
    /// Infinite cyclic, generated by the germ of `generator` on a
    /// transverse disk.
    InfiniteCyclic { generator: ExactDiskMap },
}

pub fn holonomy_group(model: &FoliationModel, p: &[f64]) -> Result<HolonomyGroup> {
    match &model.topology {
        Topology::Plain => Ok(HolonomyGroup::Trivial),
        Topology::Suspension { a } | Topology::SuspensionGraph { a } => {
            match model.classify_leaf(p)? {
                LeafClass::Generic => Ok(HolonomyGroup::Trivial),
                LeafClass::Periodic { period } => Ok(HolonomyGroup::InfiniteCyclic {
                    generator: ExactDiskMap::MatrixPower {
                        a: *a,
                        k: GERM_POWER_PER_WINDING * period as i64,
                    },
                }),
            }
        }
    }
}

/// Disk-scale agreement between the germ of a generator loop and the
/// linear action extracted from transferring a horizontal probe along the
/// same loop. Returns the max discrepancy over probe directions.
pub fn germ_transfer_discrepancy(model: &FoliationModel, p: &[f64]) -> Result<f64> {
    let class = model.classify_leaf(p)?;
    let base = model.normalize(p);
    let k = match class {
        LeafClass::Generic => return Ok(0.0),
        LeafClass::Periodic { .. } => 1,
    };
    let (_, path) = class_representative(model, &base, k)?;
    let germ = holonomy_along(model, &path)?;

    let eps = 0.01;
    let mut worst = 0.0f64;
    for &ax in &model.transverse_axes {
        let mut dir = vec![0.0; model.dim()];
        dir[ax] = 1.0;
        let probe = HorizontalCurve::ray(&base, &dir, eps, 4);
        let moved = transfer(model, &probe, &path)?;
        for (src, img) in probe.vertices.iter().zip(&moved.vertices) {
            // Offsets relative to the transported base point.
            let delta_src: Vec<f64> = model
                .transverse_axes
                .iter()
                .map(|&a| src[a] - probe.vertices[0][a])
                .collect();
            let delta_img: Vec<f64> = model
                .transverse_axes
                .iter()
                .map(|&a| img[a] - moved.vertices[0][a])
                .collect();
            let want = match germ.exact {
                Some(e) => e.apply(&delta_src),
                None => delta_src.clone(),
            };
            for (x, y) in delta_img.iter().zip(&want) {
                worst = worst.max((x - y).abs());
            }
        }
    }
    Ok(worst)
}

/// Holonomy-exactness criterion on canonical loops.
///
/// For suspension-type models, walks the closed leaf over the origin with
/// windings −2..2 and records, per winding: the deviation of the sampled
/// disk transport from the exact monodromy power the winding convention
/// predicts, and the deviation of the transfer action on horizontal probes
/// from that same exact map. Plain models use an in-leaf round trip whose
/// holonomy and transfer action must both be the identity.
pub fn check_holonomy(model: &FoliationModel, tol: Tolerance) -> CheckReport {
    let paths: Vec<(Vec<f64>, LeafPath, i64)> = match &model.topology {
        Topology::Plain => {
            let base = model.atlas[0].center.clone();
            let mut away = base.clone();
            for &ax in &model.leaf_axes {
                away[ax] += 0.3;
            }
            vec![(
                base.clone(),
                LeafPath::new(vec![base.clone(), away, base]),
                0,
            )]
        }
        Topology::Suspension { .. } => (-2..=2)
            .map(|k| {
                let origin = vec![0.0; model.dim()];
                (
                    origin.clone(),
                    LeafPath::winding(&origin, k as f64),
                    GERM_POWER_PER_WINDING * k,
                )
            })
            .collect(),
        Topology::SuspensionGraph { .. } => (-2..=2)
            .map(|k| {
                // The closed pair-space loop over the origin moves both
                // leaf parameters together (the diagonal deck direction).
                let origin = vec![0.0; model.dim()];
                let mut end = origin.clone();
                for &ax in &model.leaf_axes {
                    end[ax] += k as f64;
                }
                (
                    origin.clone(),
                    LeafPath::new(vec![origin, end]),
                    GERM_POWER_PER_WINDING * k,
                )
            })
            .collect(),
    };

    let mut outcomes: Vec<Result<ResidualSample>> = Vec::new();
    for (base, path, expected_power) in paths.iter() {
        let germ = outcomes.len();
        let map = match holonomy_along(model, path) {
            Ok(m) => m,
            Err(e) => {
                outcomes.push(Err(e));
                continue;
            }
        };
        let exact = match map.exact {
            Some(e) if e.power() == *expected_power => e,
            _ => {
                outcomes.push(Ok(ResidualSample {
                    index: germ,
                    location: base.clone(),
                    value: 1.0,
                }));
                continue;
            }
        };
        outcomes.push(Ok(ResidualSample {
            index: germ,
            location: base.clone(),
            value: map.max_exact_deviation().unwrap_or(1.0),
        }));

        // Transfer the same loop past a horizontal probe in each transverse
        // coordinate direction; the induced action must be the same germ.
        let eps = 0.01;
        let mut worst = 0.0f64;
        let mut failed = None;
        for &ax in &model.transverse_axes {
            let mut dir = vec![0.0; model.dim()];
            dir[ax] = 1.0;
            let probe = HorizontalCurve::ray(base, &dir, eps, 4);
            let moved = match transfer(model, &probe, path) {
                Ok(m) => m,
                Err(e) => {
                    failed = Some(e);
                    break;
                }
            };
            for (src, img) in probe.vertices.iter().zip(&moved.vertices) {
                let delta_src: Vec<f64> = model
                    .transverse_axes
                    .iter()
                    .map(|&a| src[a] - probe.vertices[0][a])
                    .collect();
                let delta_img: Vec<f64> = model
                    .transverse_axes
                    .iter()
                    .map(|&a| img[a] - moved.vertices[0][a])
                    .collect();
                let want = exact.apply(&delta_src);
                for (x, y) in delta_img.iter().zip(&want) {
                    worst = worst.max((x - y).abs());
                }
            }
        }
        outcomes.push(match failed {
            Some(e) => Err(e),
            None => Ok(ResidualSample {
                index: germ + 1,
                location: base.clone(),
                value: worst,
            }),
        });
    }
    assemble("holonomy", tol, outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{Axis, Domain, MetricField};
    use crate::model::SuspensionModel;
    use nalgebra::DMatrix;

    fn suspension() -> SuspensionModel {
        SuspensionModel::new(IntMat2::new(2, 1, 1, 1), 1.0).unwrap()
    }

    fn torus_product() -> FoliationModel {
        let leaf = MetricField::new(
            Domain::new(vec![Axis::Periodic { period: 1.0 }]),
            |_| DMatrix::identity(1, 1),
        );
        let trans = MetricField::new(
            Domain::new(vec![Axis::Periodic { period: 1.0 }]),
            |_| DMatrix::identity(1, 1),
        );
        FoliationModel::product("torus-product", &leaf, &trans).unwrap()
    }

    #[test]
    fn winding_once_gives_the_inverse_monodromy_germ() {
        let s = suspension();
        let m = s.as_model();
        let path = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        let map = holonomy_along(m, &path).unwrap();
        assert_eq!(map.germ_power(), Some(-1));
        assert!(map.max_exact_deviation().unwrap() < 1e-12);
        // Spot-check one sampled pair against the inverse matrix.
        let ainv = IntMat2::new(2, 1, 1, 1).inverse();
        let (src, img) = &map.samples[1];
        let want = ainv.apply_f([src[0], src[1]]);
        assert!((img[0] - want[0]).abs() < 1e-12);
        assert!((img[1] - want[1]).abs() < 1e-12);
    }

    #[test]
    fn winding_twice_squares_the_germ() {
        let s = suspension();
        let m = s.as_model();
        let once = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        let twice = once.concat(&LeafPath::winding(&[0.0, 0.0, 1.0], 1.0)).unwrap();
        let map = holonomy_along(m, &twice).unwrap();
        assert_eq!(map.germ_power(), Some(-2));
        assert!(map.max_exact_deviation().unwrap() < 1e-10);
    }

    #[test]
    fn reverse_path_inverts_the_germ() {
        let s = suspension();
        let m = s.as_model();
        let path = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        let forward = holonomy_along(m, &path).unwrap();
        let back = holonomy_along(m, &path.reversed()).unwrap();
        assert_eq!(forward.germ_power(), Some(-1));
        assert_eq!(back.germ_power(), Some(1));
        // Round trip is the identity on every sample.
        let round = path.concat(&path.reversed()).unwrap();
        let id = holonomy_along(m, &round).unwrap();
        assert_eq!(id.germ_power(), Some(0));
        for (src, img) in &id.samples {
            for (a, b) in src.iter().zip(img) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn contractible_wiggle_has_identity_holonomy() {
        let s = suspension();
        let m = s.as_model();
        let path = LeafPath::new(vec![
            vec![0.3, 0.4, 0.2],
            vec![0.3, 0.4, 0.45],
            vec![0.3, 0.4, 0.1],
            vec![0.3, 0.4, 0.2],
        ]);
        let map = holonomy_along(m, &path).unwrap();
        assert_eq!(map.germ_power(), Some(0));
        assert!(map.max_exact_deviation().unwrap() == 0.0);
    }

    #[test]
    fn deep_windings_shrink_then_reject_the_disk() {
        let s = suspension();
        let m = s.as_model();
        // Winding 3 stretches past the default disk, forcing a shrink.
        let map = holonomy_along(m, &LeafPath::winding(&[0.0, 0.0, 0.0], 3.0)).unwrap();
        assert!(map.radius < DISK_RADIUS_DEFAULT);
        assert_eq!(map.germ_power(), Some(-3));
        // Winding 12 cannot fit at any admissible radius.
        let err = holonomy_along(m, &LeafPath::winding(&[0.0, 0.0, 0.0], 12.0));
        assert!(matches!(err, Err(Error::DiskTooLarge { .. })));
    }

    #[test]
    fn sideways_paths_are_rejected() {
        let s = suspension();
        let m = s.as_model();
        let path = LeafPath::new(vec![vec![0.0, 0.0, 0.0], vec![0.1, 0.0, 1.0]]);
        assert!(matches!(
            holonomy_along(m, &path),
            Err(Error::PathLeavesLeaf { segment: 0, .. })
        ));
    }

    #[test]
    fn plain_models_have_identity_holonomy() {
        let m = torus_product();
        // Loop once around the closed leaf.
        let path = LeafPath::new(vec![vec![0.2, 0.7], vec![1.2, 0.7]]);
        let map = holonomy_along(&m, &path).unwrap();
        assert_eq!(map.exact, Some(ExactDiskMap::Identity));
        assert!(map.max_exact_deviation().unwrap() == 0.0);
        assert_eq!(holonomy_group(&m, &[0.2, 0.7]).unwrap(), HolonomyGroup::Trivial);
    }

    #[test]
    fn transfer_twists_the_transverse_trace_by_the_germ() {
        let s = suspension();
        let m = s.as_model();
        let sigma = HorizontalCurve::ray(&[0.0, 0.0, 0.0], &[1.0, 0.5, 0.0], 0.04, 4);
        let loop1 = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        let moved = transfer(m, &sigma, &loop1).unwrap();
        let ainv = IntMat2::new(2, 1, 1, 1).inverse();
        for (src, img) in sigma.vertices.iter().zip(&moved.vertices) {
            let want = ainv.apply_f([src[0], src[1]]);
            assert!((img[0] - want[0]).abs() < 1e-12);
            assert!((img[1] - want[1]).abs() < 1e-12);
            // The far edge is expressed back in the base chart.
            assert!(img[2].abs() < 1e-12);
        }
    }

    #[test]
    fn transfer_along_a_constant_path_is_the_identity() {
        let s = suspension();
        let m = s.as_model();
        let sigma = HorizontalCurve::ray(&[0.1, 0.2, 0.3], &[0.0, 1.0, 0.0], 0.05, 3);
        let constant = LeafPath::winding(&[0.1, 0.2, 0.3], 0.0);
        let moved = transfer(m, &sigma, &constant).unwrap();
        assert!(moved.max_distance(&sigma, m) < 1e-12);
    }

    #[test]
    fn transfer_on_products_translates_the_curve() {
        let m = torus_product();
        let sigma = HorizontalCurve::ray(&[0.2, 0.1], &[0.0, 1.0], 0.2, 4);
        let h = LeafPath::new(vec![vec![0.2, 0.1], vec![0.55, 0.1]]);
        let moved = transfer(&m, &sigma, &h).unwrap();
        for (src, img) in sigma.vertices.iter().zip(&moved.vertices) {
            assert!((img[0] - 0.55).abs() < 1e-12);
            assert!((img[1] - src[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn mismatched_origins_and_sideways_curves_fail() {
        let s = suspension();
        let m = s.as_model();
        let sigma = HorizontalCurve::ray(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 0.05, 2);
        let away = LeafPath::winding(&[0.3, 0.3, 0.0], 1.0);
        assert!(matches!(
            transfer(m, &sigma, &away),
            Err(Error::OriginMismatch { .. })
        ));
        let tilted = HorizontalCurve::ray(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.7], 0.05, 2);
        let loop1 = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        assert!(matches!(
            transfer(m, &tilted, &loop1),
            Err(Error::NotHorizontal { .. })
        ));
    }

    #[test]
    fn holonomy_criterion_passes_on_the_bundled_models() {
        let tol = crate::report::Tolerance { pass: 1e-6, fail: 1e-3 };
        let s = suspension();
        let rep = check_holonomy(s.as_model(), tol);
        assert!(rep.passed(), "{}", rep.summary_line());
        // Five windings, each contributing a germ and a transfer sample.
        assert_eq!(rep.sample_count, 10);

        let prep = check_holonomy(&torus_product(), tol);
        assert!(prep.passed(), "{}", prep.summary_line());

        let gm = crate::graph::GraphModel::build(s.as_model()).unwrap();
        let grep = check_holonomy(gm.as_model(), tol);
        assert!(grep.passed(), "{}", grep.summary_line());
    }

    #[test]
    fn class_action_composes_and_inverts() {
        let s = suspension();
        let m = s.as_model();
        let sigma = HorizontalCurve::ray(&[0.0, 0.0, 0.0], &[1.0, 0.0, 0.0], 0.03, 3);
        let plus = m_holonomy_action(m, 2, &sigma).unwrap();
        let restored = m_holonomy_action(m, -2, &plus).unwrap();
        assert!(restored.max_distance(&sigma, m) < 1e-8);
        let unchanged = m_holonomy_action(m, 0, &sigma).unwrap();
        assert!(unchanged.max_distance(&sigma, m) < 1e-12);
    }

    #[test]
    fn loop_classes_add_like_integers() {
        let leaf = LeafClass::Periodic { period: 1 };
        let a = HolonomyClass { leaf, k: 1 };
        let b = HolonomyClass { leaf, k: 2 };
        assert_eq!(a.compose(&b).unwrap().k, 3);
        assert_eq!(a.compose(&a.inverse()).unwrap().k, 0);
        let other = HolonomyClass { leaf: LeafClass::Generic, k: 0 };
        assert!(a.compose(&other).is_err());
    }

    #[test]
    fn holonomy_groups_of_the_suspension_leaves() {
        let s = suspension();
        let m = s.as_model();
        match holonomy_group(m, &[0.0, 0.0, 0.5]).unwrap() {
            HolonomyGroup::InfiniteCyclic { generator } => {
                assert_eq!(generator.power(), -1);
            }
            other => panic!("expected infinite cyclic, got {other:?}"),
        }
        match holonomy_group(m, &[0.5, 0.5, 0.0]).unwrap() {
            HolonomyGroup::InfiniteCyclic { generator } => {
                assert_eq!(generator.power(), -3);
            }
            other => panic!("expected infinite cyclic, got {other:?}"),
        }
        let irr = [std::f64::consts::SQRT_2 - 1.0, 0.3, 0.1];
        assert_eq!(holonomy_group(m, &irr).unwrap(), HolonomyGroup::Trivial);
        // Nontrivial classes on a simply connected leaf do not exist.
        let sigma = HorizontalCurve::ray(&irr, &[1.0, 0.0, 0.0], 0.03, 2);
        assert!(matches!(
            m_holonomy_action(m, 1, &sigma),
            Err(Error::NoSuchLoopClass { class: 1 })
        ));
    }

    #[test]
    fn germ_and_transfer_actions_agree() {
        let s = suspension();
        let m = s.as_model();
        assert!(germ_transfer_discrepancy(m, &[0.0, 0.0, 0.0]).unwrap() < 1e-6);
        assert!(germ_transfer_discrepancy(m, &[0.5, 0.5, 0.0]).unwrap() < 1e-6);
        let irr = [std::f64::consts::SQRT_2 - 1.0, 0.0, 0.0];
        assert_eq!(germ_transfer_discrepancy(m, &irr).unwrap(), 0.0);
    }

    #[test]
    fn homotopic_representatives_act_identically() {
        let s = suspension();
        let m = s.as_model();
        let sigma = HorizontalCurve::ray(&[0.0, 0.0, 0.0], &[0.7, 0.7, 0.0], 0.04, 4);
        // Straight generator vs a wiggly homotopic representative
        // (advance 2, back off 1).
        let straight = LeafPath::winding(&[0.0, 0.0, 0.0], 1.0);
        let wiggly = LeafPath::new(vec![
            vec![0.0, 0.0, 0.0],
            vec![0.0, 0.0, 2.0],
            vec![0.0, 0.0, 1.0],
        ]);
        let a = transfer(m, &sigma, &straight).unwrap();
        let b = transfer(m, &sigma, &wiggly).unwrap();
        assert!(a.max_distance(&b, m) < 1e-9);
    }
}
