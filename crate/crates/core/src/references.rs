//! Published reference values the simulator is compared against.
//!
//! All externally reported numbers live here, each with a citation string, so
//! every comparison can be traced back to the value it checks.

/// Bumped whenever a value or citation in this table changes.
pub const TABLE_VERSION: &str = "1";

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Cited {
    pub value: f64,
    pub citation: &'static str,
}

const fn cited(value: f64, citation: &'static str) -> Cited {
    Cited { value, citation }
}

/// Reported multibody-simulation results for one insertion orientation.
#[derive(Clone, Copy, Debug)]
pub struct OrientationReference {
    pub mu_deg: f64,
    /// Common speed of all tracks in straight sections (mm/s).
    pub straight_speed: Cited,
    /// Average track speeds in bends, tracks A, B, C (mm/s).
    pub bend_speeds: [Cited; 3],
    /// Reported APE bound for the bend comparison (percent).
    pub bend_ape_bound: Cited,
    /// Min/max of the plotted bend speeds per track (mm/s).
    pub bend_ranges: [(f64, f64); 3],
}

/// Reported APE bound for straight sections (percent).
pub const STRAIGHT_APE_BOUND: Cited = cited(2.2, "straight sections: APE below 2.2%");

pub const ORIENTATIONS: [OrientationReference; 3] = [
    OrientationReference {
        mu_deg: 0.0,
        straight_speed: cited(50.03, "straight-section track speed, mu = 0°"),
        bend_speeds: [
            cited(33.62, "bend average, inner module A, mu = 0°"),
            cited(58.7, "bend average, outer module B, mu = 0°"),
            cited(57.8, "bend average, outer module C, mu = 0°"),
        ],
        bend_ape_bound: cited(1.2, "bend APE, mu = 0°"),
        bend_ranges: [(30.0, 37.25), (52.0, 60.0), (52.0, 60.0)],
    },
    OrientationReference {
        mu_deg: 30.0,
        straight_speed: cited(50.22, "straight-section track speed, mu = 30°"),
        bend_speeds: [
            cited(37.3, "bend average, module A, mu = 30°"),
            cited(63.8, "bend average, module B, mu = 30°"),
            cited(50.3, "bend average, module C, mu = 30°"),
        ],
        bend_ape_bound: cited(3.8, "bend APE, mu = 30°"),
        bend_ranges: [(32.5, 40.0), (60.0, 75.0), (49.0, 52.0)],
    },
    OrientationReference {
        mu_deg: 60.0,
        straight_speed: cited(51.36, "straight-section track speed, mu = 60°"),
        bend_speeds: [
            cited(40.2, "bend average, module A, mu = 60°"),
            cited(68.5, "bend average, module B, mu = 60°"),
            cited(41.3, "bend average, module C, mu = 60°"),
        ],
        bend_ape_bound: cited(2.5, "bend APE, mu = 60°"),
        bend_ranges: [(32.5, 48.0), (62.0, 75.0), (32.5, 48.0)],
    },
];

/// Published theoretical bend speeds at mu = 0° (tracks A, B, C; mm/s).
pub const THEORY_BEND_SPEEDS_MU0: [Cited; 3] = [
    cited(33.69, "theoretical inner-track bend speed, mu = 0°"),
    cited(58.51, "theoretical outer-track bend speed, mu = 0°"),
    cited(58.51, "theoretical outer-track bend speed, mu = 0°"),
];

/// Output speed under equal load at 120 rpm input (rpm).
pub const EQUAL_LOAD_OUTPUT_RPM: Cited =
    cited(12.0, "output speed under equal loading at 120 rpm input");

/// Robot path after subtracting the full robot length from the network length.
pub const STATED_ROBOT_PATH_MM: Cited = cited(2823.49, "robot path D_R = D_pipe - L_R");
/// Path length used in the published total-time estimate.
pub const TIME_ESTIMATE_PATH_MM: Cited = cited(3016.49, "path used in the total-time estimate");
/// Speed used in the published total-time estimate (mm/s).
pub const TIME_ESTIMATE_SPEED_MM_S: Cited = cited(50.24, "speed used in the total-time estimate");
/// Published total traversal time (s).
pub const TOTAL_TIME_S: Cited = cited(60.04, "total traversal time estimate");
/// Reported end of the vertical climb (s).
pub const VERTICAL_LEG_END_S: Cited = cited(9.0, "vertical climb window ends at 9 s");

pub fn orientation(mu_deg: f64) -> Option<&'static OrientationReference> {
    ORIENTATIONS
        .iter()
        .find(|r| (r.mu_deg - mu_deg).abs() < 1e-9)
}
