//! Closed-form kinematics and torque distribution of the three-output open
//! differential.
//!
//! Layout: the input `U` drives three ring gears `R1..R3` of the two-output
//! differentials through a `1/k` reduction. Each two-output differential splits
//! its ring speed over two side gears (`S1,S2`, `S3,S4`, `S5,S6`). Every side gear
//! is rigidly meshed with one side gear of a two-input differential:
//!
//! ```text
//! S1-S7   S3-S8   S5-S11   S2-S12   S4-S9   S6-S10
//! ```
//!
//! The two-input differentials average `S7,S8` / `S9,S10` / `S11,S12` onto their
//! rings `R4..R6`, which drive the outputs `O1..O3` through the factor `j`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Gear ratios and side-gear inertias of the differential.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GearParams {
    /// Input-to-ring reduction: ring speed = input speed / k.
    pub k: f64,
    /// Ring-to-output factor: output speed = j * ring speed of R4..R6.
    pub j: f64,
    /// Side-gear inertias I1..I6.
    pub inertias: [f64; 6],
}

impl Default for GearParams {
    fn default() -> Self {
        Self {
            k: 20.0,
            j: 2.0,
            inertias: [0.0; 6],
        }
    }
}

impl GearParams {
    pub fn new(k: f64, j: f64, inertias: [f64; 6]) -> Result<Self> {
        let params = Self { k, j, inertias };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.k.is_finite() && self.k > 0.0) {
            return Err(Error::config("gear.k", "must be a positive number"));
        }
        if !(self.j.is_finite() && self.j > 0.0) {
            return Err(Error::config("gear.j", "must be a positive number"));
        }
        for (i, inertia) in self.inertias.iter().enumerate() {
            if !(inertia.is_finite() && *inertia >= 0.0) {
                return Err(Error::config(
                    format!("gear.inertias[{i}]"),
                    "must be a non-negative number",
                ));
            }
        }
        Ok(())
    }
}

/// Speeds (rpm) of every shaft of the differential at one instant.
///
/// `ring_speeds[0..3]` are R1..R3, `ring_speeds[3..6]` are R4..R6;
/// `side_speeds[n]` is side gear S(n+1).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OodState {
    pub input_speed: f64,
    pub ring_speeds: [f64; 6],
    pub side_speeds: [f64; 12],
    pub output_speeds: [f64; 3],
}

/// Rigidly meshed side-gear pairs, zero-based: (two-output side, two-input side).
pub const SIDE_GEAR_PAIRS: [(usize, usize); 6] = [(0, 6), (2, 7), (4, 10), (1, 11), (3, 8), (5, 9)];

/// Side gears (zero-based) of each two-output differential, by ring R1..R3.
const TWO_OUTPUT_SIDES: [(usize, usize); 3] = [(0, 1), (2, 3), (4, 5)];

/// Side gears (zero-based) of each two-input differential, by ring R4..R6.
const TWO_INPUT_SIDES: [(usize, usize); 3] = [(6, 7), (8, 9), (10, 11)];

impl OodState {
    /// Builds the consistent state for a given set of output speeds.
    ///
    /// Output speeds must already satisfy the sum invariant
    /// `O1 + O2 + O3 = 3 j input / k`. The remaining freedom (one internal degree
    /// of freedom) is fixed by choosing the side-gear speeds of the two-output
    /// differentials closest, in the least-squares sense, to their ring speed.
    pub fn from_outputs(params: &GearParams, input_speed: f64, outputs: [f64; 3]) -> Self {
        let ring = ring_speed(params, input_speed);
        let [a, _, d] = outputs.map(|o| o / params.j);

        // S1 is the free parameter; the others follow from the averaging constraints.
        let s1 = ring + 2.0 * (a - d) / 3.0;
        let s2 = 2.0 * ring - s1;
        let s3 = 2.0 * a - s1;
        let s4 = 2.0 * ring - s3;
        let s5 = s1 + 2.0 * d - 2.0 * ring;
        let s6 = 2.0 * ring - s5;

        let mut side_speeds = [0.0; 12];
        side_speeds[..6].copy_from_slice(&[s1, s2, s3, s4, s5, s6]);
        for (od, id) in SIDE_GEAR_PAIRS {
            side_speeds[id] = side_speeds[od];
        }

        let mut ring_speeds = [ring; 6];
        for (n, (p, q)) in TWO_INPUT_SIDES.iter().enumerate() {
            ring_speeds[3 + n] = (side_speeds[*p] + side_speeds[*q]) / 2.0;
        }

        Self {
            input_speed,
            ring_speeds,
            side_speeds,
            output_speeds: outputs,
        }
    }
}

/// Input torque and side-gear angular accelerations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct LoadCase {
    /// Input torque (N·mm).
    pub input_torque: f64,
    /// Angular accelerations (rad/s²) of side gears S7..S12.
    pub side_accelerations: [f64; 6],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorqueBreakdown {
    pub output_torques: [f64; 3],
    /// Inertial torque subtracted from each output, before division by `j`.
    pub inertial_terms: [f64; 3],
}

/// Speed shared by the three ring gears R1..R3.
pub fn ring_speed(params: &GearParams, input_speed: f64) -> f64 {
    input_speed / params.k
}

/// Speed of each output when all three outputs carry equal load.
pub fn equal_load_output_speed(params: &GearParams, input_speed: f64) -> f64 {
    params.j * input_speed / params.k
}

/// Output torques including the side-gear inertia terms.
///
/// The inertia/acceleration products are paired as `I1·a7 + I3·a8`,
/// `I4·a9 + I6·a10` and `I2·a12 + I5·a11`.
pub fn output_torques(params: &GearParams, load: &LoadCase) -> TorqueBreakdown {
    let i = &params.inertias;
    let a = &load.side_accelerations;
    let inertial_terms = [
        i[0] * a[0] + i[2] * a[1],
        i[3] * a[2] + i[5] * a[3],
        i[1] * a[5] + i[4] * a[4],
    ];
    let share = params.k * load.input_torque / (3.0 * params.j);
    TorqueBreakdown {
        output_torques: inertial_terms.map(|term| share - term / params.j),
        inertial_terms,
    }
}

/// Constraint violation of one two-output differential:
/// `ring − k_local (side_a + side_b) / 2`.
pub fn two_output_residual(ring_speed: f64, side_a: f64, side_b: f64, k_local: f64) -> f64 {
    ring_speed - k_local * (side_a + side_b) / 2.0
}

/// Splits the input over the three outputs in proportion to `demand_ratios`.
///
/// Each ratio is the track speed required by the geometry divided by the
/// nominal speed. The sum of the returned speeds is always `3 j input / k`.
pub fn distribute_speeds(
    params: &GearParams,
    input_speed: f64,
    demand_ratios: [f64; 3],
) -> Result<[f64; 3]> {
    for (index, &value) in demand_ratios.iter().enumerate() {
        if !(value.is_finite() && value > 0.0) {
            return Err(Error::NonPositiveRatio { index, value });
        }
    }
    let equal = equal_load_output_speed(params, input_speed);
    let total: f64 = demand_ratios.iter().sum();
    Ok(demand_ratios.map(|ratio| equal * 3.0 * ratio / total))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
}

/// Every kinematic constraint of the differential evaluated on `state`.
pub fn verify_state(params: &GearParams, state: &OodState) -> Vec<Residual> {
    let mut out = Vec::with_capacity(18);
    let mut push = |name: String, value: f64| out.push(Residual { name, value });

    for n in 0..3 {
        push(
            format!("R{} = input/k", n + 1),
            state.ring_speeds[n] - ring_speed(params, state.input_speed),
        );
    }
    for (n, (p, q)) in TWO_OUTPUT_SIDES.iter().enumerate() {
        push(
            format!("R{} = mean(S{}, S{})", n + 1, p + 1, q + 1),
            two_output_residual(
                state.ring_speeds[n],
                state.side_speeds[*p],
                state.side_speeds[*q],
                1.0,
            ),
        );
    }
    for (od, id) in SIDE_GEAR_PAIRS {
        push(
            format!("S{} = S{}", od + 1, id + 1),
            state.side_speeds[od] - state.side_speeds[id],
        );
    }
    for (n, (p, q)) in TWO_INPUT_SIDES.iter().enumerate() {
        push(
            format!("R{} = mean(S{}, S{})", n + 4, p + 1, q + 1),
            two_output_residual(
                state.ring_speeds[3 + n],
                state.side_speeds[*p],
                state.side_speeds[*q],
                1.0,
            ),
        );
    }
    for n in 0..3 {
        push(
            format!("O{} = j * R{}", n + 1, n + 4),
            state.output_speeds[n] - params.j * state.ring_speeds[3 + n],
        );
    }
    out
}
