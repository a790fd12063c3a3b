//! Check verdicts, residual tables, and their text/CSV serializations.

use std::fmt;

/// Outcome of a numeric check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    /// Max residual below the pass tolerance.
    Pass,
    /// Max residual above the fail tolerance.
    Fail,
    /// Precondition failed, or the residual fell in the gray zone between
    /// the tolerances.
    Degenerate,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
            Verdict::Degenerate => write!(f, "DEGENERATE"),
        }
    }
}

/// Two-sided tolerance: residuals below `pass` succeed, above `fail` fail,
/// anything in between is flagged instead of silently classified.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub pass: f64,
    pub fail: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { pass: 1e-8, fail: 1e-4 }
    }
}

impl Tolerance {
    /// Single-threshold tolerance with no gray zone.
    pub fn strict(t: f64) -> Self {
        Tolerance { pass: t, fail: t }
    }

    /// Keep the default ratio between pass and fail around a new pass level.
    pub fn at(pass: f64) -> Self {
        Tolerance { pass, fail: pass * 1e4 }
    }

    pub fn verdict(&self, max_residual: f64) -> Verdict {
        if max_residual < self.pass {
            Verdict::Pass
        } else if max_residual > self.fail {
            Verdict::Fail
        } else {
            Verdict::Degenerate
        }
    }
}

/// One residual measurement, tagged with its sample index and the chart
/// location it was taken at.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSample {
    pub index: usize,
    pub location: Vec<f64>,
    pub value: f64,
}

/// Full result of one checker run.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckReport {
    pub check: String,
    pub verdict: Verdict,
    pub max_residual: f64,
    pub tolerance: Tolerance,
    pub sample_count: usize,
    pub samples: Vec<ResidualSample>,
    pub notes: Vec<String>,
}

impl CheckReport {
    /// Build a report from collected residual samples; the verdict follows
    /// the tolerance applied to the max residual.
    pub fn from_samples(
        check: impl Into<String>,
        tolerance: Tolerance,
        samples: Vec<ResidualSample>,
    ) -> CheckReport {
        let max_residual = samples.iter().map(|s| s.value).fold(0.0f64, f64::max);
        let verdict = tolerance.verdict(max_residual);
        let mut notes = Vec::new();
        if verdict == Verdict::Degenerate {
            notes.push(format!(
                "max residual {:e} lies between pass {:e} and fail {:e}",
                max_residual, tolerance.pass, tolerance.fail
            ));
        }
        CheckReport {
            check: check.into(),
            verdict,
            max_residual,
            tolerance,
            sample_count: samples.len(),
            samples,
            notes,
        }
    }

    /// Report for a check whose preconditions failed; carries no residuals.
    pub fn degenerate(
        check: impl Into<String>,
        tolerance: Tolerance,
        reason: impl Into<String>,
    ) -> CheckReport {
        CheckReport {
            check: check.into(),
            verdict: Verdict::Degenerate,
            max_residual: f64::NAN,
            tolerance,
            sample_count: 0,
            samples: Vec::new(),
            notes: vec![reason.into()],
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> CheckReport {
        self.notes.push(note.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }

    /// Single human-readable line.
    pub fn summary_line(&self) -> String {
        if self.max_residual.is_nan() {
            format!(
                "{}: {} ({})",
                self.check,
                self.verdict,
                self.notes.first().map(String::as_str).unwrap_or("no data")
            )
        } else {
            format!(
                "{}: {} (max residual {:.3e}, {} samples, pass < {:.1e})",
                self.check, self.verdict, self.max_residual, self.sample_count, self.tolerance.pass
            )
        }
    }

    /// Flat CSV of all residual samples; location columns are padded to the
    /// widest sample.
    pub fn to_csv(&self) -> String {
        let loc_width = self
            .samples
            .iter()
            .map(|s| s.location.len())
            .max()
            .unwrap_or(0);
        let mut out = String::from("check,sample_index");
        for i in 0..loc_width {
            out.push_str(&format!(",loc{i}"));
        }
        out.push_str(",residual\n");
        for s in &self.samples {
            out.push_str(&self.check);
            out.push_str(&format!(",{}", s.index));
            for i in 0..loc_width {
                match s.location.get(i) {
                    Some(v) => out.push_str(&format!(",{v}")),
                    None => out.push(','),
                }
            }
            out.push_str(&format!(",{:e}\n", s.value));
        }
        out
    }
}

impl fmt::Display for CheckReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.summary_line())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(i: usize, v: f64) -> ResidualSample {
        ResidualSample { index: i, location: vec![0.1 * i as f64, 0.2], value: v }
    }

    #[test]
    fn verdict_tracks_the_tolerance_bands() {
        let tol = Tolerance::default();
        assert_eq!(tol.verdict(1e-9), Verdict::Pass);
        assert_eq!(tol.verdict(1e-6), Verdict::Degenerate);
        assert_eq!(tol.verdict(1e-3), Verdict::Fail);
        assert_eq!(Tolerance::strict(0.5).verdict(1.0), Verdict::Fail);
        assert_eq!(Tolerance::strict(0.5).verdict(0.0), Verdict::Pass);
    }

    #[test]
    fn report_aggregates_the_max_residual() {
        let rep = CheckReport::from_samples(
            "demo",
            Tolerance::default(),
            vec![sample(0, 1e-12), sample(1, 3e-10), sample(2, 2e-11)],
        );
        assert_eq!(rep.verdict, Verdict::Pass);
        assert_eq!(rep.max_residual, 3e-10);
        assert_eq!(rep.sample_count, 3);
        assert!(rep.passed());
    }

    #[test]
    fn gray_zone_reports_carry_a_warning_note() {
        let rep =
            CheckReport::from_samples("demo", Tolerance::default(), vec![sample(0, 1e-6)]);
        assert_eq!(rep.verdict, Verdict::Degenerate);
        assert!(!rep.notes.is_empty());
    }

    #[test]
    fn csv_has_one_row_per_sample() {
        let rep = CheckReport::from_samples(
            "demo",
            Tolerance::default(),
            vec![sample(0, 1e-12), sample(1, 5e-13)],
        );
        let csv = rep.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 3);
        assert_eq!(lines[0], "check,sample_index,loc0,loc1,residual");
        assert!(lines[1].starts_with("demo,0,0,0.2,"));
    }

    #[test]
    fn degenerate_report_prints_its_reason() {
        let rep = CheckReport::degenerate("demo", Tolerance::default(), "null span");
        assert!(rep.summary_line().contains("null span"));
        assert!(!rep.passed());
    }
}
