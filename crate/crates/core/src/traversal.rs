//! Quasi-static traversal of a pipe network.
//!
//! The robot center follows the centerline at the nominal speed. Track speeds
//! are piecewise constant: they are set by the speed law from the section the
//! center is in, and a step that crosses a section boundary is split exactly
//! at the boundary. The center starts `L_R / 2` into the network and stops
//! `L_R / 2` before its end.

use crate::error::{Error, Result};
use crate::geartrain::{equal_load_output_speed, GearParams};
use crate::pipe_geometry::{track_path_length, Orientation, PipeNetwork};
use crate::references;
use crate::speed_law::{DifferentialLaw, SpeedContext, TrackSpeedLaw};
use crate::units::rim_speed_mm_s;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

pub const DEFAULT_DT_S: f64 = 1e-3;
pub const DEFAULT_SAMPLE_S: f64 = 0.1;

pub const CSV_HEADER: &str =
    "t_s,s_mm,section,v_tA_mms,v_tB_mms,v_tC_mms,d_A_mm,d_B_mm,d_C_mm,comp_A_mm,comp_B_mm,comp_C_mm";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RobotConfig {
    pub length_mm: f64,
    pub sprocket_diameter_mm: f64,
    pub input_rpm: f64,
    pub spring_preload_mm: f64,
    pub bend_extra_compression_mm: f64,
    pub max_compression_mm: f64,
    /// Module length used for the asymmetric tilt limit.
    pub module_length_mm: f64,
}

impl Default for RobotConfig {
    fn default() -> Self {
        Self {
            length_mm: 200.0,
            sprocket_diameter_mm: 80.0,
            input_rpm: 120.0,
            spring_preload_mm: 1.25,
            bend_extra_compression_mm: 1.5,
            max_compression_mm: 16.0,
            module_length_mm: 200.0,
        }
    }
}

impl RobotConfig {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("robot.length_mm", self.length_mm),
            ("robot.sprocket_diameter_mm", self.sprocket_diameter_mm),
            ("robot.spring_preload_mm", self.spring_preload_mm),
            ("robot.max_compression_mm", self.max_compression_mm),
            ("robot.module_length_mm", self.module_length_mm),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::config(field, "must be a positive number"));
            }
        }
        if !(self.input_rpm.is_finite() && self.input_rpm >= 0.0) {
            return Err(Error::config(
                "robot.input_rpm",
                "must be a non-negative number",
            ));
        }
        if !(self.bend_extra_compression_mm.is_finite() && self.bend_extra_compression_mm >= 0.0) {
            return Err(Error::config(
                "robot.bend_extra_compression_mm",
                "must be a non-negative number",
            ));
        }
        if self.spring_preload_mm > self.max_compression_mm {
            return Err(Error::config(
                "robot.spring_preload_mm",
                format!("exceeds max compression of {} mm", self.max_compression_mm),
            ));
        }
        if self.spring_preload_mm + self.bend_extra_compression_mm > self.max_compression_mm {
            return Err(Error::config(
                "robot.bend_extra_compression_mm",
                format!(
                    "preload plus bend compression exceeds max compression of {} mm",
                    self.max_compression_mm
                ),
            ));
        }
        Ok(())
    }
}

/// Robot center speed (mm/s): sprocket rim speed at the equal-load output speed.
pub fn nominal_speed(config: &RobotConfig, params: &GearParams) -> f64 {
    rim_speed_mm_s(
        equal_load_output_speed(params, config.input_rpm),
        config.sprocket_diameter_mm,
    )
}

/// Tilt (degrees) of a module whose front end is fully compressed while the
/// rear end is fully extended.
pub fn asym_tilt_limit(config: &RobotConfig) -> f64 {
    config
        .max_compression_mm
        .atan2(config.module_length_mm)
        .to_degrees()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraversalState {
    pub time_s: f64,
    /// Arc position of the robot center along the centerline (mm).
    pub s_mm: f64,
    pub section: usize,
    pub track_speeds_mm_s: [f64; 3],
    pub distances_mm: [f64; 3],
    pub compressions_mm: [f64; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: TraversalState,
    /// Set when the step reached the end of the robot path.
    pub end_of_network: bool,
    /// (section index entered, time) for each boundary crossed during the step.
    pub crossings: Vec<(usize, f64)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SectionTiming {
    pub index: usize,
    pub label: String,
    pub kind: String,
    pub enter_s: f64,
    pub exit_s: f64,
}

/// The published distance/time figures next to the ones this model predicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeReference {
    pub stated_robot_path_mm: f64,
    pub estimate_path_mm: f64,
    pub estimate_speed_mm_s: f64,
    pub estimate_time_s: f64,
    pub note: String,
}

impl TimeReference {
    fn published() -> Self {
        Self {
            stated_robot_path_mm: references::STATED_ROBOT_PATH_MM.value,
            estimate_path_mm: references::TIME_ESTIMATE_PATH_MM.value,
            estimate_speed_mm_s: references::TIME_ESTIMATE_SPEED_MM_S.value,
            estimate_time_s: references::TOTAL_TIME_S.value,
            note: "the published robot path (network length minus L_R) and the path used in the published \
                   total-time estimate disagree; total_time_s follows the L_R/2 end-correction rule"
                .to_string(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub law: String,
    pub mu_deg: f64,
    pub completed: bool,
    pub nominal_speed_mm_s: f64,
    pub centerline_length_mm: f64,
    pub path_start_mm: f64,
    pub path_end_mm: f64,
    pub effective_path_mm: f64,
    pub total_time_s: f64,
    pub predicted_time_s: f64,
    pub track_distance_mm: [f64; 3],
    pub expected_track_path_mm: [f64; 3],
    /// Track distance minus geometric path; positive means drag, negative slip.
    pub signed_slip_mm: [f64; 3],
    pub sections: Vec<SectionTiming>,
    pub reference: TimeReference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraversalLog {
    pub rows: Vec<TraversalState>,
    pub summary: Summary,
}

impl TraversalLog {
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.rows.len() * 120 + CSV_HEADER.len() + 1);
        out.push_str(CSV_HEADER);
        out.push('\n');
        for row in &self.rows {
            let _ = write!(out, "{:.6},{:.6},{}", row.time_s, row.s_mm, row.section);
            for value in row
                .track_speeds_mm_s
                .iter()
                .chain(&row.distances_mm)
                .chain(&row.compressions_mm)
            {
                let _ = write!(out, ",{value:.6}");
            }
            out.push('\n');
        }
        out
    }

    /// Parses rows written by [`TraversalLog::to_csv`].
    pub fn rows_from_csv(text: &str) -> Result<Vec<TraversalState>> {
        let mut lines = text.lines();
        match lines.next() {
            Some(header) if header.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::config(
                    "csv",
                    format!("expected header `{CSV_HEADER}`"),
                ))
            }
        }
        let mut rows = Vec::new();
        for (n, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let bad = |what: &str| Error::config(format!("csv line {}", n + 2), what.to_string());
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != 12 {
                return Err(bad("expected 12 fields"));
            }
            let num = |i: usize| {
                fields[i]
                    .trim()
                    .parse::<f64>()
                    .map_err(|_| bad("not a number"))
            };
            let triple = |i: usize| -> Result<[f64; 3]> { Ok([num(i)?, num(i + 1)?, num(i + 2)?]) };
            rows.push(TraversalState {
                time_s: num(0)?,
                s_mm: num(1)?,
                section: fields[2]
                    .trim()
                    .parse()
                    .map_err(|_| bad("section is not an index"))?,
                track_speeds_mm_s: triple(3)?,
                distances_mm: triple(6)?,
                compressions_mm: triple(9)?,
            });
        }
        Ok(rows)
    }
}

/// A prepared traversal: network, pose, drivetrain and speed law, with the
/// per-section track speeds evaluated once up front.
pub struct Traversal<'a> {
    network: &'a PipeNetwork,
    orientation: Orientation,
    config: &'a RobotConfig,
    law_name: &'static str,
    bounds: Vec<(f64, f64)>,
    section_speeds: Vec<[f64; 3]>,
    nominal: f64,
    start_s: f64,
    end_s: f64,
}

impl<'a> Traversal<'a> {
    pub fn new(
        network: &'a PipeNetwork,
        orientation: Orientation,
        config: &'a RobotConfig,
        params: &GearParams,
        law: &dyn TrackSpeedLaw,
    ) -> Result<Self> {
        config.validate()?;
        params.validate()?;
        let ctx = SpeedContext {
            params,
            input_rpm: config.input_rpm,
            sprocket_diameter_mm: config.sprocket_diameter_mm,
            orientation: &orientation,
            pipe: &network.spec,
        };
        let section_speeds = network
            .sections
            .iter()
            .map(|section| law.track_speeds(&ctx, section))
            .collect::<Result<Vec<_>>>()?;

        let total = network.total_length_mm();
        let start_s = config.length_mm / 2.0;
        let end_s = total - config.length_mm / 2.0;
        if end_s < start_s {
            return Err(Error::config(
                "robot.length_mm",
                format!(
                    "robot ({} mm) is longer than the network ({total} mm)",
                    config.length_mm
                ),
            ));
        }
        let nominal = nominal_speed(config, params);
        if end_s > start_s && (nominal.is_nan() || nominal <= 0.0) {
            return Err(Error::config(
                "robot.input_rpm",
                "must be positive to traverse a non-empty path",
            ));
        }
        Ok(Self {
            network,
            orientation,
            config,
            law_name: law.name(),
            bounds: network.section_bounds(),
            section_speeds,
            nominal,
            start_s,
            end_s,
        })
    }

    pub fn nominal_speed(&self) -> f64 {
        self.nominal
    }

    /// Centerline interval covered by the robot center.
    pub fn path(&self) -> (f64, f64) {
        (self.start_s, self.end_s)
    }

    pub fn section_speeds(&self) -> &[[f64; 3]] {
        &self.section_speeds
    }

    pub fn initial_state(&self) -> TraversalState {
        let section = self.network.section_index_at(self.start_s);
        let mut state = TraversalState {
            time_s: 0.0,
            s_mm: self.start_s,
            section,
            track_speeds_mm_s: self.section_speeds[section],
            distances_mm: [0.0; 3],
            compressions_mm: [0.0; 3],
        };
        state.compressions_mm = compression_profile(&state, self.network, self.config);
        state
    }

    pub fn is_finished(&self, state: &TraversalState) -> bool {
        state.s_mm >= self.end_s
    }

    /// Advances `state` by `dt_s`, splitting the step at section boundaries.
    pub fn step(&self, state: &TraversalState, dt_s: f64) -> Result<StepOutcome> {
        if !(dt_s.is_finite() && dt_s >= 0.0) {
            return Err(Error::config("dt", "must be a non-negative number"));
        }
        let mut next = state.clone();
        let mut crossings = Vec::new();
        if self.is_finished(&next) {
            return Ok(StepOutcome {
                state: next,
                end_of_network: true,
                crossings,
            });
        }

        let mut remaining = dt_s;
        let mut end_of_network = false;
        while remaining > 0.0 {
            let section = next.section;
            let stop = self.bounds[section].1.min(self.end_s);
            let time_to_stop = (stop - next.s_mm) / self.nominal;
            if remaining < time_to_stop {
                self.advance(&mut next, remaining);
                break;
            }
            self.advance(&mut next, time_to_stop);
            next.s_mm = stop;
            remaining -= time_to_stop;
            if stop >= self.end_s {
                end_of_network = true;
                break;
            }
            next.section += 1;
            crossings.push((next.section, next.time_s));
        }

        next.track_speeds_mm_s = self.section_speeds[next.section];
        next.compressions_mm = compression_profile(&next, self.network, self.config);
        Ok(StepOutcome {
            state: next,
            end_of_network,
            crossings,
        })
    }

    fn advance(&self, state: &mut TraversalState, dt_s: f64) {
        let speeds = self.section_speeds[state.section];
        state.time_s += dt_s;
        state.s_mm += self.nominal * dt_s;
        for (d, v) in state.distances_mm.iter_mut().zip(speeds) {
            *d += v * dt_s;
        }
    }

    /// Steps until the end of the path, sampling every `sample_s` seconds.
    /// `sample_s` must be a whole multiple of `dt_s`.
    pub fn run(&self, dt_s: f64, sample_s: f64) -> Result<TraversalLog> {
        if !(dt_s.is_finite() && dt_s > 0.0) {
            return Err(Error::config("dt", "must be a positive number"));
        }
        if !(sample_s.is_finite() && sample_s >= dt_s) {
            return Err(Error::config(
                "sample",
                "sampling interval must be at least dt",
            ));
        }
        let stride = (sample_s / dt_s).round();
        if (stride * dt_s - sample_s).abs() > 1e-9 * sample_s {
            return Err(Error::config(
                "sample",
                "sampling interval must be a whole multiple of dt",
            ));
        }
        let stride = stride as u64;

        let mut state = self.initial_state();
        let mut rows = vec![state.clone()];
        let mut entered = vec![None; self.bounds.len()];
        let mut exited = vec![None; self.bounds.len()];
        entered[state.section] = Some(0.0);

        let mut steps: u64 = 0;
        let mut done = self.is_finished(&state);
        while !done {
            let outcome = self.step(&state, dt_s)?;
            steps += 1;
            for (section, t) in outcome.crossings {
                exited[section - 1] = Some(t);
                entered[section] = Some(t);
            }
            state = outcome.state;
            done = outcome.end_of_network;
            if steps.is_multiple_of(stride) || done {
                let last_time = rows.last().map_or(f64::NEG_INFINITY, |r| r.time_s);
                if state.time_s > last_time {
                    rows.push(state.clone());
                }
            }
        }
        exited[state.section] = Some(state.time_s);

        let sections = self
            .network
            .sections
            .iter()
            .enumerate()
            .filter_map(|(index, section)| {
                Some(SectionTiming {
                    index,
                    label: section.label().to_string(),
                    kind: section.kind().to_string(),
                    enter_s: entered[index]?,
                    exit_s: exited[index]?,
                })
            })
            .collect();

        let expected =
            expected_track_paths(self.network, &self.orientation, self.start_s, self.end_s)?;
        let effective = self.end_s - self.start_s;
        let summary = Summary {
            law: self.law_name.to_string(),
            mu_deg: self.orientation.mu_deg,
            completed: true,
            nominal_speed_mm_s: self.nominal,
            centerline_length_mm: self.network.total_length_mm(),
            path_start_mm: self.start_s,
            path_end_mm: self.end_s,
            effective_path_mm: effective,
            total_time_s: state.time_s,
            predicted_time_s: if effective > 0.0 {
                effective / self.nominal
            } else {
                0.0
            },
            track_distance_mm: state.distances_mm,
            expected_track_path_mm: expected,
            signed_slip_mm: [0, 1, 2].map(|i| state.distances_mm[i] - expected[i]),
            sections,
            reference: TimeReference::published(),
        };
        Ok(TraversalLog { rows, summary })
    }
}

/// Advances one step with the differential speed law.
pub fn step(
    state: &TraversalState,
    dt_s: f64,
    network: &PipeNetwork,
    orientation: Orientation,
    config: &RobotConfig,
    params: &GearParams,
) -> Result<StepOutcome> {
    Traversal::new(network, orientation, config, params, &DifferentialLaw)?.step(state, dt_s)
}

/// Runs a full traversal with the differential speed law.
pub fn run(
    network: &PipeNetwork,
    orientation: Orientation,
    config: &RobotConfig,
    params: &GearParams,
    dt_s: f64,
    sample_s: f64,
) -> Result<TraversalLog> {
    run_with_law(
        network,
        orientation,
        config,
        params,
        &DifferentialLaw,
        dt_s,
        sample_s,
    )
}

pub fn run_with_law(
    network: &PipeNetwork,
    orientation: Orientation,
    config: &RobotConfig,
    params: &GearParams,
    law: &dyn TrackSpeedLaw,
    dt_s: f64,
    sample_s: f64,
) -> Result<TraversalLog> {
    Traversal::new(network, orientation, config, params, law)?.run(dt_s, sample_s)
}

/// Spring compression of modules A, B, C for the section the center is in.
pub fn compression_profile(
    state: &TraversalState,
    network: &PipeNetwork,
    config: &RobotConfig,
) -> [f64; 3] {
    let mut compression = config.spring_preload_mm;
    if network.sections[state.section].is_bend() {
        compression += config.bend_extra_compression_mm;
    }
    [compression.clamp(0.0, config.max_compression_mm); 3]
}

/// Geometric wall path of each track while the center moves from `from_s` to
/// `to_s`, summed section by section from the arc-length law.
pub fn expected_track_paths(
    network: &PipeNetwork,
    orientation: &Orientation,
    from_s: f64,
    to_s: f64,
) -> Result<[f64; 3]> {
    let mut total = [0.0; 3];
    for (section, (start, end)) in network.sections.iter().zip(network.section_bounds()) {
        let covered = (end.min(to_s) - start.max(from_s)).max(0.0);
        if covered == 0.0 {
            continue;
        }
        let fraction = covered / section.length_mm();
        for (track, sum) in total.iter_mut().enumerate() {
            *sum += fraction * track_path_length(section, orientation, &network.spec, track)?;
        }
    }
    Ok(total)
}

/// Per-track signed deviation of travelled distance from the geometric path.
pub fn signed_slip(
    log: &TraversalLog,
    network: &PipeNetwork,
    orientation: &Orientation,
) -> Result<[f64; 3]> {
    if !log.summary.completed {
        return Err(Error::IncompleteLog);
    }
    let expected = expected_track_paths(
        network,
        orientation,
        log.summary.path_start_mm,
        log.summary.path_end_mm,
    )?;
    let travelled = log.rows.last().map_or([0.0; 3], |row| row.distances_mm);
    Ok([0, 1, 2].map(|i| travelled[i] - expected[i]))
}

/// Per-track slip magnitude (mm).
pub fn slip_metric(
    log: &TraversalLog,
    network: &PipeNetwork,
    orientation: &Orientation,
) -> Result<[f64; 3]> {
    Ok(signed_slip(log, network, orientation)?.map(f64::abs))
}
