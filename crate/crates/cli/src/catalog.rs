//! Registry of runnable checks: stable kebab-case names, one-line
//! descriptions, and the dispatch into the core checkers.

use anyhow::{bail, Result};
use foliage_core::criteria::{
    check_biconditional, check_lewis, check_orthogonal_transport, check_projectability,
    check_totally_geodesic, check_transversal_completeness, SamplingPlan,
};
use foliage_core::graph::{
    check_graph_foliation, check_graph_metric, check_leaf_structure, check_prs_axioms,
    GraphMetricFault, Side,
};
use foliage_core::holonomy::check_holonomy;
use foliage_core::model::deck_group_relations;
use foliage_core::report::{CheckReport, ResidualSample, Tolerance};

use crate::config::{RunnerModel, SamplingConfig};

/// Every check the runner knows how to execute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CheckName {
    OrthogonalTransport,
    Lewis,
    Projectability,
    TotallyGeodesic,
    TransversalCompleteness,
    Biconditional,
    DeckRelations,
    Holonomy,
    GraphMetric,
    PrsAxiomsFirst,
    PrsAxiomsSecond,
    LeafStructure,
    GraphFoliation,
}

pub const ALL_CHECKS: [CheckName; 13] = [
    CheckName::OrthogonalTransport,
    CheckName::Lewis,
    CheckName::Projectability,
    CheckName::TotallyGeodesic,
    CheckName::TransversalCompleteness,
    CheckName::Biconditional,
    CheckName::DeckRelations,
    CheckName::Holonomy,
    CheckName::GraphMetric,
    CheckName::PrsAxiomsFirst,
    CheckName::PrsAxiomsSecond,
    CheckName::LeafStructure,
    CheckName::GraphFoliation,
];

impl CheckName {
    pub fn id(&self) -> &'static str {
        match self {
            CheckName::OrthogonalTransport => "orthogonal-transport",
            CheckName::Lewis => "lewis",
            CheckName::Projectability => "projectability",
            CheckName::TotallyGeodesic => "totally-geodesic",
            CheckName::TransversalCompleteness => "transversal-completeness",
            CheckName::Biconditional => "biconditional",
            CheckName::DeckRelations => "deck-relations",
            CheckName::Holonomy => "holonomy",
            CheckName::GraphMetric => "graph-metric",
            CheckName::PrsAxiomsFirst => "prs-axioms-first",
            CheckName::PrsAxiomsSecond => "prs-axioms-second",
            CheckName::LeafStructure => "leaf-structure",
            CheckName::GraphFoliation => "graph-foliation",
        }
    }

    pub fn describe(&self) -> &'static str {
        match self {
            CheckName::OrthogonalTransport => {
                "leaf-orthogonality is preserved along leafwise geodesics"
            }
            CheckName::Lewis => {
                "leafwise derivatives of the transverse metric block vanish"
            }
            CheckName::Projectability => {
                "the transverse metric varies only across leaves"
            }
            CheckName::TotallyGeodesic => {
                "leaves are totally geodesic in the ambient metric"
            }
            CheckName::TransversalCompleteness => {
                "transverse geodesics extend to the full horizon"
            }
            CheckName::Biconditional => {
                "transport preservation agrees with the derivative criterion"
            }
            CheckName::DeckRelations => {
                "deck transformations satisfy the conjugation relations"
            }
            CheckName::Holonomy => {
                "loop germs match the exact monodromy powers and probe transfer"
            }
            CheckName::GraphMetric => {
                "the pair-space metric has the exact block form"
            }
            CheckName::PrsAxiomsFirst => {
                "the first projection is a pseudo-Riemannian submersion"
            }
            CheckName::PrsAxiomsSecond => {
                "the second projection is a pseudo-Riemannian submersion"
            }
            CheckName::LeafStructure => {
                "pair-space leaves are flat planes or cylinders as classified"
            }
            CheckName::GraphFoliation => {
                "the pair space carries a complete orthogonally-split foliation"
            }
        }
    }

    /// Whether the check needs a pair-space model rather than a plain one.
    pub fn needs_graph(&self) -> bool {
        matches!(
            self,
            CheckName::GraphMetric
                | CheckName::PrsAxiomsFirst
                | CheckName::PrsAxiomsSecond
                | CheckName::LeafStructure
        )
    }
}

pub fn parse_check(name: &str) -> Result<CheckName> {
    for c in ALL_CHECKS {
        if c.id() == name {
            return Ok(c);
        }
    }
    bail!(
        "unknown check `{name}`; known checks: {}",
        ALL_CHECKS.map(|c| c.id()).join(", ")
    );
}

/// Execute one check against a configured model. Mismatched model kinds
/// produce a degenerate report rather than an error so expectation
/// matching stays uniform.
pub fn run_check(
    check: CheckName,
    model: &RunnerModel,
    sampling: &SamplingConfig,
    tol: Tolerance,
) -> CheckReport {
    let plan = SamplingPlan::new(sampling.seed, sampling.count);
    let plain = model.as_plain();
    match check {
        CheckName::OrthogonalTransport => {
            check_orthogonal_transport(plain, plan, sampling.s_max, sampling.step, tol)
        }
        CheckName::Lewis => check_lewis(plain, plan, tol),
        CheckName::Projectability => check_projectability(plain, plan, tol),
        CheckName::TotallyGeodesic => check_totally_geodesic(
            plain,
            plan,
            sampling.geodesics,
            sampling.s_max,
            sampling.step,
            tol,
        ),
        CheckName::TransversalCompleteness => {
            check_transversal_completeness(plain, plan, sampling.horizon, sampling.step)
        }
        CheckName::Biconditional => {
            check_biconditional(plain, plan, sampling.s_max, sampling.step, tol)
                .as_check_report()
        }
        CheckName::Holonomy => check_holonomy(plain, tol),
        CheckName::DeckRelations => match model.as_suspension() {
            Some(s) => deck_relations_report(s, tol),
            None => CheckReport::degenerate(
                check.id(),
                tol,
                "deck relations are defined only for the suspension",
            ),
        },
        CheckName::GraphMetric => match model.as_graph() {
            Some(g) => check_graph_metric(g, plan, tol),
            None => needs_graph_report(check, tol),
        },
        CheckName::PrsAxiomsFirst => match model.as_graph() {
            Some(g) => check_prs_axioms(g, Side::First, plan, tol, GraphMetricFault::None),
            None => needs_graph_report(check, tol),
        },
        CheckName::PrsAxiomsSecond => match model.as_graph() {
            Some(g) => check_prs_axioms(g, Side::Second, plan, tol, GraphMetricFault::None),
            None => needs_graph_report(check, tol),
        },
        CheckName::LeafStructure => match model.as_graph() {
            Some(g) => check_leaf_structure(g, tol),
            None => needs_graph_report(check, tol),
        },
        CheckName::GraphFoliation => {
            // Builds the pair space itself, so it runs on the base model.
            let base = match model.as_graph() {
                Some(g) => g.base(),
                None => plain,
            };
            check_graph_foliation(base, plan, tol)
        }
    }
}

fn needs_graph_report(check: CheckName, tol: Tolerance) -> CheckReport {
    CheckReport::degenerate(
        check.id(),
        tol,
        "this check needs `kind = \"suspension-graph\"`",
    )
}

/// Exact integer verification of the two conjugation identities, reported
/// in the common residual format (0 when a relation holds, 1 when not).
fn deck_relations_report(s: &foliage_core::model::SuspensionModel, _tol: Tolerance) -> CheckReport {
    let rel = deck_group_relations(s);
    let mut samples = Vec::new();
    for (i, (got, want)) in rel.conjugates.iter().zip(&rel.expected).enumerate() {
        samples.push(ResidualSample {
            index: i,
            location: vec![i as f64],
            value: if got == want { 0.0 } else { 1.0 },
        });
    }
    samples.push(ResidualSample {
        index: 2,
        location: vec![2.0],
        value: if rel.translations_commute { 0.0 } else { 1.0 },
    });
    CheckReport::from_samples("deck-relations", Tolerance::strict(0.5), samples)
        .with_note("conjugates of the unit translations and their commutator, exact integers")
}
