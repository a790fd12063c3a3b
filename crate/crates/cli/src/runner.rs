//! Execute a scenario: build the model once, run every requested check
//! (concurrently — they only share the model immutably), and collect the
//! reports in declared order for deterministic output.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use foliage_core::report::CheckReport;

use crate::catalog::{parse_check, run_check};
use crate::config::{Expect, ScenarioConfig};

#[derive(Debug)]
pub struct CheckOutcome {
    pub name: String,
    pub expect: Expect,
    pub report: CheckReport,
}

impl CheckOutcome {
    pub fn matched(&self) -> bool {
        self.expect.matches(self.report.verdict)
    }
}

#[derive(Debug)]
pub struct RunSummary {
    pub outcomes: Vec<CheckOutcome>,
}

impl RunSummary {
    pub fn all_matched(&self) -> bool {
        self.outcomes.iter().all(CheckOutcome::matched)
    }

    /// Human-readable block: one line per check plus an overall line.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            let mark = if o.matched() { "ok" } else { "MISMATCH" };
            writeln!(
                out,
                "[{mark}] {} (expected {})",
                o.report.summary_line(),
                o.expect.label()
            )
            .unwrap();
        }
        writeln!(
            out,
            "overall: {}",
            if self.all_matched() { "PASS" } else { "FAIL" }
        )
        .unwrap();
        out
    }

    /// Machine-readable twin of [`Self::text`]. Field order is fixed and
    /// nothing environment-dependent is included, so two runs with the
    /// same configuration emit identical bytes.
    pub fn toml(&self) -> String {
        let mut out = String::new();
        writeln!(out, "[run]").unwrap();
        writeln!(out, "all_matched = {}", self.all_matched()).unwrap();
        for o in &self.outcomes {
            writeln!(out).unwrap();
            writeln!(out, "[[results]]").unwrap();
            writeln!(out, "check = \"{}\"", o.report.check).unwrap();
            writeln!(out, "verdict = \"{}\"", o.report.verdict).unwrap();
            writeln!(out, "expected = \"{}\"", o.expect.label()).unwrap();
            writeln!(out, "matched = {}", o.matched()).unwrap();
            if o.report.max_residual.is_nan() {
                writeln!(out, "max_residual = \"none\"").unwrap();
            } else {
                writeln!(out, "max_residual = {:e}", o.report.max_residual).unwrap();
            }
            writeln!(out, "samples = {}", o.report.sample_count).unwrap();
            for note in &o.report.notes {
                writeln!(out, "# {}", note.replace('\n', " ")).unwrap();
            }
        }
        out
    }

    /// Write summary.txt, summary.toml, and one CSV per check into `dir`.
    pub fn write_into(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)
            .with_context(|| format!("could not create {}", dir.display()))?;
        fs::write(dir.join("summary.txt"), self.text())?;
        fs::write(dir.join("summary.toml"), self.toml())?;
        for o in &self.outcomes {
            fs::write(dir.join(format!("{}.csv", o.name)), o.report.to_csv())?;
        }
        Ok(())
    }
}

/// Run every check in the scenario. Checks are independent given the
/// immutable model, so they run on scoped threads; results land in the
/// declared order regardless of completion order, and a single caller
/// writes all output afterwards.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<RunSummary> {
    let model = cfg.build_model()?;
    let tol = cfg.tolerances.as_tolerance();
    let sampling = cfg.sampling;

    let checks: Vec<_> = cfg
        .checks
        .iter()
        .map(|req| parse_check(&req.name).map(|c| (req, c)))
        .collect::<Result<_>>()?;

    let mut reports: Vec<Option<CheckReport>> = Vec::new();
    reports.resize_with(checks.len(), || None);
    std::thread::scope(|scope| {
        for (slot, (_, check)) in reports.iter_mut().zip(&checks) {
            let model = &model;
            let check = *check;
            scope.spawn(move || {
                *slot = Some(run_check(check, model, &sampling, tol));
            });
        }
    });

    let outcomes = checks
        .into_iter()
        .zip(reports)
        .map(|((req, check), report)| CheckOutcome {
            name: check.id().to_string(),
            expect: req.expect,
            report: report.expect("every scoped check thread fills its slot"),
        })
        .collect();
    Ok(RunSummary { outcomes })
}
