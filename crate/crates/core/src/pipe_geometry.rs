//! Pipe networks and the per-track speed and path-length laws.
//!
//! Bends are planar. A track sitting at angle `a` from the bend plane (measured
//! towards the inside of the bend) runs on a circle of radius `R − r cos a`, so in
//! a bend its required speed is `v (R − r cos a) / R`. Module A sits at `mu`,
//! B at `mu + 120°`, C at `mu + 240°`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Angular offsets of modules A, B, C around the pipe axis (degrees).
pub const MODULE_OFFSETS_DEG: [f64; 3] = [0.0, 120.0, 240.0];

pub const TRACK_NAMES: [&str; 3] = ["A", "B", "C"];

/// Section lengths and bore of the published test network.
pub mod paper {
    pub const VERTICAL_MM: f64 = 550.0;
    pub const ELBOW_CENTERLINE_MM: f64 = 657.83;
    pub const HORIZONTAL_MM: f64 = 350.0;
    pub const U_BEND_CENTERLINE_MM: f64 = 1315.66;
    pub const FINAL_HORIZONTAL_MM: f64 = 150.0;
    pub const TOTAL_MM: f64 = 3023.49;
    /// Bore radius obtained by inverting the bend speed law against the
    /// published inner-track speed (33.69 mm/s at a nominal 50.24 mm/s).
    pub const INNER_RADIUS_MM: f64 = 137.95;

    /// Bend radius implied by the elbow centerline length over 90°.
    pub fn bend_radius_mm() -> f64 {
        ELBOW_CENTERLINE_MM / std::f64::consts::FRAC_PI_2
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PipeSpec {
    pub inner_radius_mm: f64,
}

impl PipeSpec {
    pub fn new(inner_radius_mm: f64) -> Result<Self> {
        if !(inner_radius_mm.is_finite() && inner_radius_mm > 0.0) {
            return Err(Error::config(
                "pipe.inner_radius_mm",
                "must be a positive number",
            ));
        }
        Ok(Self { inner_radius_mm })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Section {
    Straight {
        length_mm: f64,
        label: String,
    },
    Bend {
        radius_mm: f64,
        sweep_deg: f64,
        label: String,
    },
}

impl Section {
    pub fn straight(length_mm: f64, label: impl Into<String>) -> Self {
        Section::Straight {
            length_mm,
            label: label.into(),
        }
    }

    pub fn bend(radius_mm: f64, sweep_deg: f64, label: impl Into<String>) -> Self {
        Section::Bend {
            radius_mm,
            sweep_deg,
            label: label.into(),
        }
    }

    /// Centerline length (mm).
    pub fn length_mm(&self) -> f64 {
        match self {
            Section::Straight { length_mm, .. } => *length_mm,
            Section::Bend {
                radius_mm,
                sweep_deg,
                ..
            } => radius_mm * sweep_deg.to_radians(),
        }
    }

    pub fn label(&self) -> &str {
        match self {
            Section::Straight { label, .. } | Section::Bend { label, .. } => label,
        }
    }

    pub fn is_bend(&self) -> bool {
        matches!(self, Section::Bend { .. })
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Section::Straight { .. } => "straight",
            Section::Bend { .. } => "bend",
        }
    }

    fn validate(&self, index: usize, spec: &PipeSpec) -> Result<()> {
        match self {
            Section::Straight { length_mm, .. } => {
                if !(length_mm.is_finite() && *length_mm > 0.0) {
                    return Err(Error::config(
                        format!("sections[{index}].length_mm"),
                        "must be a positive number",
                    ));
                }
            }
            Section::Bend {
                radius_mm,
                sweep_deg,
                ..
            } => {
                if !(sweep_deg.is_finite() && *sweep_deg > 0.0 && *sweep_deg <= 360.0) {
                    return Err(Error::config(
                        format!("sections[{index}].sweep_deg"),
                        "must lie in (0, 360]",
                    ));
                }
                if !radius_mm.is_finite() {
                    return Err(Error::config(
                        format!("sections[{index}].radius_mm"),
                        "must be a number",
                    ));
                }
                check_bend(*radius_mm, spec.inner_radius_mm)?;
            }
        }
        Ok(())
    }
}

fn check_bend(bend_radius: f64, pipe_radius: f64) -> Result<()> {
    // Written so that NaN fails too.
    if pipe_radius.is_nan()
        || bend_radius.is_nan()
        || pipe_radius <= 0.0
        || bend_radius <= pipe_radius
    {
        return Err(Error::Geometry(format!(
            "bend radius must exceed pipe radius (R = {bend_radius} mm, r = {pipe_radius} mm)"
        )));
    }
    Ok(())
}

/// Insertion roll of the robot: angle of module A from the bend plane.
///
/// Any finite angle is accepted. Angles that differ by 120° describe the same
/// physical pose with the module labels rotated.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orientation {
    pub mu_deg: f64,
}

impl Orientation {
    pub fn new(mu_deg: f64) -> Result<Self> {
        if !mu_deg.is_finite() {
            return Err(Error::config("mu_deg", "must be a finite angle"));
        }
        Ok(Self { mu_deg })
    }

    /// Angle of each track from the bend plane (degrees).
    pub fn track_angles_deg(&self) -> [f64; 3] {
        MODULE_OFFSETS_DEG.map(|offset| self.mu_deg + offset)
    }

    /// `mu` reduced to the symmetry period [0°, 120°).
    pub fn canonical_mu_deg(&self) -> f64 {
        self.mu_deg.rem_euclid(120.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PipeNetwork {
    pub spec: PipeSpec,
    pub sections: Vec<Section>,
}

impl PipeNetwork {
    pub fn new(spec: PipeSpec, sections: Vec<Section>) -> Result<Self> {
        PipeSpec::new(spec.inner_radius_mm)?;
        if sections.is_empty() {
            return Err(Error::config(
                "sections",
                "network needs at least one section",
            ));
        }
        for (index, section) in sections.iter().enumerate() {
            section.validate(index, &spec)?;
        }
        Ok(Self { spec, sections })
    }

    pub fn total_length_mm(&self) -> f64 {
        self.sections.iter().map(Section::length_mm).sum()
    }

    /// Centerline arc position (mm) where each section starts and ends.
    pub fn section_bounds(&self) -> Vec<(f64, f64)> {
        let mut start = 0.0;
        self.sections
            .iter()
            .map(|section| {
                let end = start + section.length_mm();
                let bounds = (start, end);
                start = end;
                bounds
            })
            .collect()
    }

    /// Section containing arc position `s`. A boundary belongs to the section
    /// that starts there; positions past the end map to the last section.
    pub fn section_index_at(&self, s: f64) -> usize {
        let bounds = self.section_bounds();
        bounds
            .iter()
            .position(|&(_, end)| s < end)
            .unwrap_or(bounds.len() - 1)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let descriptor: NetworkDescriptor = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            Error::config(path, e.into_inner().to_string())
        })?;
        descriptor.into_network()
    }

    /// Fixed-layout descriptor JSON with every length printed to 2 decimals.
    pub fn to_json(&self) -> String {
        let mut out = String::new();
        out.push_str("{\n");
        let _ = writeln!(
            out,
            "  \"pipe\": {{\"inner_radius_mm\": {:.2}}},",
            self.spec.inner_radius_mm
        );
        out.push_str("  \"sections\": [\n");
        let last = self.sections.len().saturating_sub(1);
        for (i, section) in self.sections.iter().enumerate() {
            let body = match section {
                Section::Straight { length_mm, label } => format!(
                    "{{\"type\": \"straight\", \"length_mm\": {length_mm:.2}, \"label\": {}}}",
                    json_string(label)
                ),
                Section::Bend {
                    radius_mm,
                    sweep_deg,
                    label,
                } => format!(
                    "{{\"type\": \"bend\", \"radius_mm\": {radius_mm:.2}, \"sweep_deg\": {sweep_deg:.2}, \"label\": {}}}",
                    json_string(label)
                ),
            };
            let sep = if i == last { "" } else { "," };
            let _ = writeln!(out, "    {body}{sep}");
        }
        out.push_str("  ]\n}\n");
        out
    }
}

fn json_string(s: &str) -> String {
    serde_json::to_string(s).expect("string serialization cannot fail")
}

/// Serde mirror of the network descriptor file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkDescriptor {
    pub pipe: PipeSpec,
    pub sections: Vec<SectionDescriptor>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SectionKind {
    Straight,
    Bend,
}

/// One entry of `sections`. Straights use `length_mm`; bends use `radius_mm`
/// and `sweep_deg`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SectionDescriptor {
    #[serde(rename = "type")]
    pub kind: SectionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub length_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius_mm: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_deg: Option<f64>,
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub label: String,
}

impl SectionDescriptor {
    fn into_section(self, index: usize) -> Result<Section> {
        let required = |value: Option<f64>, field: &str| {
            value
                .ok_or_else(|| Error::config(format!("sections[{index}].{field}"), "missing field"))
        };
        let misplaced = |value: Option<f64>, field: &str, kind: &str| match value {
            Some(_) => Err(Error::config(
                format!("sections[{index}].{field}"),
                format!("not allowed on a {kind} section"),
            )),
            None => Ok(()),
        };
        match self.kind {
            SectionKind::Straight => {
                misplaced(self.radius_mm, "radius_mm", "straight")?;
                misplaced(self.sweep_deg, "sweep_deg", "straight")?;
                Ok(Section::straight(
                    required(self.length_mm, "length_mm")?,
                    self.label,
                ))
            }
            SectionKind::Bend => {
                misplaced(self.length_mm, "length_mm", "bend")?;
                Ok(Section::bend(
                    required(self.radius_mm, "radius_mm")?,
                    required(self.sweep_deg, "sweep_deg")?,
                    self.label,
                ))
            }
        }
    }
}

impl NetworkDescriptor {
    pub fn into_network(self) -> Result<PipeNetwork> {
        let sections = self
            .sections
            .into_iter()
            .enumerate()
            .map(|(index, s)| s.into_section(index))
            .collect::<Result<Vec<_>>>()?;
        PipeNetwork::new(self.pipe, sections)
    }
}

impl From<&PipeNetwork> for NetworkDescriptor {
    fn from(network: &PipeNetwork) -> Self {
        Self {
            pipe: network.spec,
            sections: network
                .sections
                .iter()
                .map(|s| match s.clone() {
                    Section::Straight { length_mm, label } => SectionDescriptor {
                        kind: SectionKind::Straight,
                        length_mm: Some(length_mm),
                        radius_mm: None,
                        sweep_deg: None,
                        label,
                    },
                    Section::Bend {
                        radius_mm,
                        sweep_deg,
                        label,
                    } => SectionDescriptor {
                        kind: SectionKind::Bend,
                        length_mm: None,
                        radius_mm: Some(radius_mm),
                        sweep_deg: Some(sweep_deg),
                        label,
                    },
                })
                .collect(),
        }
    }
}

/// Speed of a track at `track_angle_deg` from the bend plane inside a bend.
pub fn bend_track_speed(
    nominal_speed: f64,
    bend_radius: f64,
    pipe_radius: f64,
    track_angle_deg: f64,
) -> Result<f64> {
    check_bend(bend_radius, pipe_radius)?;
    Ok(nominal_speed * bend_factor(bend_radius, pipe_radius, track_angle_deg))
}

fn bend_factor(bend_radius: f64, pipe_radius: f64, track_angle_deg: f64) -> f64 {
    (bend_radius - pipe_radius * track_angle_deg.to_radians().cos()) / bend_radius
}

/// Required track speed divided by the nominal speed, per track.
pub fn track_speed_ratios(
    section: &Section,
    orientation: &Orientation,
    spec: &PipeSpec,
) -> Result<[f64; 3]> {
    match section {
        Section::Straight { .. } => Ok([1.0; 3]),
        Section::Bend { radius_mm, .. } => {
            check_bend(*radius_mm, spec.inner_radius_mm)?;
            Ok(orientation
                .track_angles_deg()
                .map(|angle| bend_factor(*radius_mm, spec.inner_radius_mm, angle)))
        }
    }
}

/// No-slip track speeds (mm/s) for a section at the given nominal speed.
pub fn track_speeds(
    nominal_speed: f64,
    section: &Section,
    orientation: &Orientation,
    spec: &PipeSpec,
) -> Result<[f64; 3]> {
    match section {
        Section::Straight { .. } => Ok([nominal_speed; 3]),
        Section::Bend { radius_mm, .. } => {
            let angles = orientation.track_angles_deg();
            let mut out = [0.0; 3];
            for (speed, angle) in out.iter_mut().zip(angles) {
                *speed = bend_track_speed(nominal_speed, *radius_mm, spec.inner_radius_mm, angle)?;
            }
            Ok(out)
        }
    }
}

/// Length of the wall path followed by one track through a whole section.
pub fn track_path_length(
    section: &Section,
    orientation: &Orientation,
    spec: &PipeSpec,
    track_index: usize,
) -> Result<f64> {
    assert!(track_index < 3, "track index must be 0, 1 or 2");
    match section {
        Section::Straight { length_mm, .. } => Ok(*length_mm),
        Section::Bend {
            radius_mm,
            sweep_deg,
            ..
        } => {
            check_bend(*radius_mm, spec.inner_radius_mm)?;
            let angle = orientation.track_angles_deg()[track_index].to_radians();
            Ok(sweep_deg.to_radians() * (radius_mm - spec.inner_radius_mm * angle.cos()))
        }
    }
}

/// The published five-section test network: vertical climb, 90° elbow,
/// horizontal run, 180° U-bend, short horizontal run.
pub fn paper_network() -> PipeNetwork {
    let radius = paper::bend_radius_mm();
    let sections = vec![
        Section::straight(paper::VERTICAL_MM, "vertical"),
        Section::bend(radius, 90.0, "elbow-90"),
        Section::straight(paper::HORIZONTAL_MM, "horizontal"),
        Section::bend(radius, 180.0, "u-bend-180"),
        Section::straight(paper::FINAL_HORIZONTAL_MM, "horizontal-final"),
    ];
    PipeNetwork::new(
        PipeSpec {
            inner_radius_mm: paper::INNER_RADIUS_MM,
        },
        sections,
    )
    .expect("published network is valid")
}
