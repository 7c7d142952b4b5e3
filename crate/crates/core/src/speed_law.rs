//! Track speed laws: how the drivetrain turns a section's geometry into the
//! three track speeds. Laws are registered by name and picked at run time.

use crate::error::{Error, Result};
use crate::geartrain::{distribute_speeds, GearParams};
use crate::pipe_geometry::{track_speed_ratios, Orientation, PipeSpec, Section};
use crate::units::rim_speed_mm_s;
use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub const DEFAULT_LAW: &str = "differential";

/// Everything a law may look at besides the section itself.
#[derive(Clone, Copy, Debug)]
pub struct SpeedContext<'a> {
    pub params: &'a GearParams,
    pub input_rpm: f64,
    pub sprocket_diameter_mm: f64,
    pub orientation: &'a Orientation,
    pub pipe: &'a PipeSpec,
}

pub trait TrackSpeedLaw: Send + Sync {
    fn name(&self) -> &'static str;

    fn description(&self) -> &'static str;

    /// Track rim speeds (mm/s) for A, B, C while the robot center is in `section`.
    fn track_speeds(&self, ctx: &SpeedContext<'_>, section: &Section) -> Result<[f64; 3]>;
}

impl fmt::Debug for dyn TrackSpeedLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("TrackSpeedLaw")
            .field("name", &self.name())
            .finish()
    }
}

/// Three-output open differential: outputs follow the load each track sees,
/// which for a no-slip track is its geometric speed demand.
#[derive(Clone, Copy, Debug, Default)]
pub struct DifferentialLaw;

impl TrackSpeedLaw for DifferentialLaw {
    fn name(&self) -> &'static str {
        "differential"
    }

    fn description(&self) -> &'static str {
        "three-output open differential; output speeds track the geometric demand of each track"
    }

    fn track_speeds(&self, ctx: &SpeedContext<'_>, section: &Section) -> Result<[f64; 3]> {
        let ratios = track_speed_ratios(section, ctx.orientation, ctx.pipe)?;
        let outputs = distribute_speeds(ctx.params, ctx.input_rpm, ratios)?;
        Ok(outputs.map(|rpm| rim_speed_mm_s(rpm, ctx.sprocket_diameter_mm)))
    }
}

/// Baseline without differential action: all three tracks are forced to the
/// equal-load speed everywhere, so bends produce slip and drag.
#[derive(Clone, Copy, Debug, Default)]
pub struct LockedLaw;

impl TrackSpeedLaw for LockedLaw {
    fn name(&self) -> &'static str {
        "locked"
    }

    fn description(&self) -> &'static str {
        "rigidly coupled outputs; every track runs at the equal-load speed"
    }

    fn track_speeds(&self, ctx: &SpeedContext<'_>, section: &Section) -> Result<[f64; 3]> {
        // Geometry is still validated so both laws reject the same networks.
        track_speed_ratios(section, ctx.orientation, ctx.pipe)?;
        let outputs = distribute_speeds(ctx.params, ctx.input_rpm, [1.0; 3])?;
        Ok(outputs.map(|rpm| rim_speed_mm_s(rpm, ctx.sprocket_diameter_mm)))
    }
}

#[derive(Clone, Default)]
pub struct LawRegistry {
    laws: BTreeMap<&'static str, Arc<dyn TrackSpeedLaw>>,
}

impl LawRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registry holding the differential and locked laws.
    pub fn builtin() -> Self {
        let mut registry = Self::new();
        registry.register(Arc::new(DifferentialLaw));
        registry.register(Arc::new(LockedLaw));
        registry
    }

    /// Adds `law`, returning any law previously registered under the same name.
    pub fn register(&mut self, law: Arc<dyn TrackSpeedLaw>) -> Option<Arc<dyn TrackSpeedLaw>> {
        self.laws.insert(law.name(), law)
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn TrackSpeedLaw>> {
        self.laws.get(name).cloned().ok_or_else(|| {
            Error::config(
                "law",
                format!(
                    "unknown speed law `{name}` (known: {})",
                    self.names().join(", ")
                ),
            )
        })
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.laws.keys().copied().collect()
    }

    pub fn iter(&self) -> impl Iterator<Item = &Arc<dyn TrackSpeedLaw>> {
        self.laws.values()
    }
}

impl fmt::Debug for LawRegistry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(self.laws.keys()).finish()
    }
}
