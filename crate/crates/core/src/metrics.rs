//! Absolute percentage error and the comparison of simulated speeds against
//! published reference values.

use crate::error::{Error, Result};
use crate::pipe_geometry::TRACK_NAMES;
use crate::references::{self, Cited};
use crate::traversal::TraversalLog;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// `|observed − theoretical| / |theoretical| × 100`.
pub fn ape(observed: f64, theoretical: f64) -> Result<f64> {
    if theoretical == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((observed - theoretical).abs() / theoretical.abs() * 100.0)
}

/// Published bounds are quoted to one decimal place, so an APE is compared at
/// that precision.
pub fn within_bound(ape_pct: f64, bound_pct: f64) -> bool {
    (ape_pct * 10.0).round() / 10.0 <= bound_pct + 1e-12
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub label: String,
    pub unit: String,
    pub observed: f64,
    pub theoretical: f64,
    pub ape_pct: f64,
}

impl Comparison {
    pub fn new(
        label: impl Into<String>,
        unit: impl Into<String>,
        observed: f64,
        theoretical: f64,
    ) -> Result<Self> {
        Ok(Self {
            label: label.into(),
            unit: unit.into(),
            observed,
            theoretical,
            ape_pct: ape(observed, theoretical)?,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub mu_deg: f64,
    pub section: String,
    pub track: String,
    /// Simulated track speed (mm/s).
    pub theoretical_mm_s: f64,
    /// Published simulation value (mm/s).
    pub reference_mm_s: f64,
    pub ape_pct: f64,
    pub bound_pct: f64,
    pub within_bound: bool,
    pub citation: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RangeRow {
    pub mu_deg: f64,
    pub track: String,
    pub theoretical_mm_s: f64,
    pub min_mm_s: f64,
    pub max_mm_s: f64,
    pub contained: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PaperReport {
    pub table_version: String,
    pub rows: Vec<ReportRow>,
    pub ranges: Vec<RangeRow>,
    pub passed: bool,
}

impl PaperReport {
    pub fn violations(&self) -> impl Iterator<Item = &ReportRow> {
        self.rows.iter().filter(|r| !r.within_bound)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "reference table v{}", self.table_version);
        let _ = writeln!(
            out,
            "{:>6}  {:<8}  {:<5}  {:>10}  {:>10}  {:>7}  {:>6}  {:<4}  reference",
            "mu", "section", "track", "sim mm/s", "ref mm/s", "APE %", "bound", "ok"
        );
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{:>6.1}  {:<8}  {:<5}  {:>10.3}  {:>10.3}  {:>7.3}  {:>6.1}  {:<4}  {}",
                r.mu_deg,
                r.section,
                r.track,
                r.theoretical_mm_s,
                r.reference_mm_s,
                r.ape_pct,
                r.bound_pct,
                if r.within_bound { "yes" } else { "NO" },
                r.citation
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(
            out,
            "{:>6}  {:<5}  {:>10}  {:>15}  inside",
            "mu", "track", "sim mm/s", "plotted range"
        );
        for r in &self.ranges {
            let _ = writeln!(
                out,
                "{:>6.1}  {:<5}  {:>10.3}  {:>15}  {}",
                r.mu_deg,
                r.track,
                r.theoretical_mm_s,
                format!("{:.2}-{:.2}", r.min_mm_s, r.max_mm_s),
                if r.contained { "yes" } else { "NO" }
            );
        }
        let _ = writeln!(out);
        let _ = writeln!(out, "result: {}", if self.passed { "PASS" } else { "FAIL" });
        out
    }
}

/// Mean track speeds over the sampled rows whose section matches `bend`.
fn mean_speeds(log: &TraversalLog, bend: bool) -> Result<[f64; 3]> {
    let kind = if bend { "bend" } else { "straight" };
    let is_kind = |section: usize| {
        log.summary
            .sections
            .iter()
            .find(|t| t.index == section)
            .is_some_and(|t| t.kind == kind)
    };
    let mut sum = [0.0; 3];
    let mut count = 0usize;
    for row in log.rows.iter().filter(|row| is_kind(row.section)) {
        for (acc, v) in sum.iter_mut().zip(row.track_speeds_mm_s) {
            *acc += v;
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::config(
            "logs",
            format!(
                "run at mu = {}° has no samples in a {kind} section",
                log.summary.mu_deg
            ),
        ));
    }
    Ok(sum.map(|s| s / count as f64))
}

fn row(
    mu_deg: f64,
    section: &str,
    track: usize,
    simulated: f64,
    reference: &Cited,
    bound: &Cited,
) -> Result<ReportRow> {
    let ape_pct = ape(reference.value, simulated)?;
    Ok(ReportRow {
        mu_deg,
        section: section.to_string(),
        track: TRACK_NAMES[track].to_string(),
        theoretical_mm_s: simulated,
        reference_mm_s: reference.value,
        ape_pct,
        bound_pct: bound.value,
        within_bound: within_bound(ape_pct, bound.value),
        citation: format!("{} (bound: {})", reference.citation, bound.citation),
    })
}

/// Compares runs at mu = 0°, 30° and 60° with the published straight and
/// bend speeds and their APE bounds.
pub fn paper_report(logs: &[TraversalLog]) -> Result<PaperReport> {
    let mut rows = Vec::new();
    let mut ranges = Vec::new();
    for reference in &references::ORIENTATIONS {
        let mu = reference.mu_deg;
        let log = logs
            .iter()
            .find(|log| (log.summary.mu_deg - mu).abs() < 1e-9)
            .ok_or(Error::MissingScenario(mu))?;

        let straight = mean_speeds(log, false)?;
        for (track, &speed) in straight.iter().enumerate() {
            rows.push(row(
                mu,
                "straight",
                track,
                speed,
                &reference.straight_speed,
                &references::STRAIGHT_APE_BOUND,
            )?);
        }

        let bend = mean_speeds(log, true)?;
        for (track, &speed) in bend.iter().enumerate() {
            rows.push(row(
                mu,
                "bend",
                track,
                speed,
                &reference.bend_speeds[track],
                &reference.bend_ape_bound,
            )?);
            let (min, max) = reference.bend_ranges[track];
            ranges.push(RangeRow {
                mu_deg: mu,
                track: TRACK_NAMES[track].to_string(),
                theoretical_mm_s: speed,
                min_mm_s: min,
                max_mm_s: max,
                contained: (min..=max).contains(&speed),
            });
        }
    }
    let passed = rows.iter().all(|r| r.within_bound) && ranges.iter().all(|r| r.contained);
    Ok(PaperReport {
        table_version: references::TABLE_VERSION.to_string(),
        rows,
        ranges,
        passed,
    })
}
