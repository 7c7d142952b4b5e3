use oodsim::geartrain::{
    distribute_speeds, equal_load_output_speed, output_torques, verify_state, GearParams, LoadCase,
    OodState,
};
use oodsim::metrics::ape;
use oodsim::pipe_geometry::{
    bend_track_speed, paper_network, track_path_length, track_speeds, Orientation, PipeNetwork,
    PipeSpec, Section,
};
use oodsim::traversal::{run, slip_metric, RobotConfig};
use proptest::prelude::*;

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

fn gear() -> impl Strategy<Value = GearParams> {
    (0.5f64..50.0, 0.5f64..5.0).prop_map(|(k, j)| GearParams::new(k, j, [0.0; 6]).unwrap())
}

fn ratio() -> impl Strategy<Value = f64> {
    0.05f64..3.0
}

/// (R, r) with R > r.
fn bend_geometry() -> impl Strategy<Value = (f64, f64)> {
    (1.0f64..500.0, 0.01f64..0.99).prop_map(|(r, frac)| (r / frac, r))
}

proptest! {
    #[test]
    fn outputs_sum_to_three_equal_shares(params in gear(), input in -500.0f64..500.0, r in [ratio(), ratio(), ratio()]) {
        let out = distribute_speeds(&params, input, r).unwrap();
        let expected = 3.0 * params.j * input / params.k;
        prop_assert!((out.iter().sum::<f64>() - expected).abs() <= 1e-9 * expected.abs().max(1e-9));
    }

    #[test]
    fn equal_ratios_give_equal_load_speed(params in gear(), input in -500.0f64..500.0, a in ratio()) {
        let out = distribute_speeds(&params, input, [a; 3]).unwrap();
        let equal = equal_load_output_speed(&params, input);
        for o in out {
            prop_assert!(rel_close(o, equal, 1e-12) || (o - equal).abs() < 1e-12);
        }
    }

    #[test]
    fn equal_ratios_pairwise_give_identical_outputs(params in gear(), input in 0.0f64..500.0, a in ratio(), b in ratio(), slot in 0usize..3) {
        let mut r = [a; 3];
        r[slot] = b;
        let out = distribute_speeds(&params, input, r).unwrap();
        let others: Vec<f64> = (0..3).filter(|&i| i != slot).map(|i| out[i]).collect();
        prop_assert_eq!(others[0], others[1]);
    }

    #[test]
    fn distribution_is_linear_in_input(params in gear(), input in 1.0f64..500.0, c in -10.0f64..10.0, r in [ratio(), ratio(), ratio()]) {
        let base = distribute_speeds(&params, input, r).unwrap();
        let scaled = distribute_speeds(&params, c * input, r).unwrap();
        for (s, b) in scaled.iter().zip(base) {
            prop_assert!((s - c * b).abs() <= 1e-12 * (c * b).abs().max(1.0));
        }
    }

    #[test]
    fn constructed_states_satisfy_every_constraint(params in gear(), input in -500.0f64..500.0, r in [ratio(), ratio(), ratio()]) {
        let out = distribute_speeds(&params, input, r).unwrap();
        let state = OodState::from_outputs(&params, input, out);
        let scale = input.abs().max(1.0) * params.j.max(1.0) / params.k.min(1.0);
        for residual in verify_state(&params, &state) {
            prop_assert!(residual.value.abs() <= 1e-12 * scale, "{} = {}", residual.name, residual.value);
        }
    }

    #[test]
    fn torque_sum_matches_term_by_term_substitution(
        k in 0.5f64..50.0, j in 0.5f64..5.0, inertias in prop::array::uniform6(0.0f64..10.0),
        tau in -100.0f64..100.0, acc in prop::array::uniform6(-100.0f64..100.0),
    ) {
        let params = GearParams::new(k, j, inertias).unwrap();
        let load = LoadCase { input_torque: tau, side_accelerations: acc };
        let t = output_torques(&params, &load);
        // acc[n] is the acceleration of side gear S(7+n)
        let [i1, i2, i3, i4, i5, i6] = inertias;
        let [a7, a8, a9, a10, a11, a12] = acc;
        let all_products = i1 * a7 + i3 * a8 + i4 * a9 + i6 * a10 + i2 * a12 + i5 * a11;
        let expected = k * tau / j - all_products / j;
        let sum: f64 = t.output_torques.iter().sum();
        prop_assert!((sum - expected).abs() <= 1e-9 * expected.abs().max(1.0));
    }

    #[test]
    fn bend_speeds_sum_to_three_nominal((big_r, small_r) in bend_geometry(), v in 0.0f64..200.0, mu in -360.0f64..360.0) {
        let section = Section::bend(big_r, 90.0, "");
        let speeds = track_speeds(v, &section, &Orientation::new(mu).unwrap(), &PipeSpec::new(small_r).unwrap()).unwrap();
        prop_assert!((speeds.iter().sum::<f64>() - 3.0 * v).abs() <= 1e-9 * v.max(1e-9));
    }

    #[test]
    fn every_track_takes_the_same_time_through_a_bend((big_r, small_r) in bend_geometry(), sweep in 1.0f64..360.0, mu in 0.0f64..120.0) {
        let section = Section::bend(big_r, sweep, "");
        let spec = PipeSpec::new(small_r).unwrap();
        let orientation = Orientation::new(mu).unwrap();
        let v = 50.0;
        let speeds = track_speeds(v, &section, &orientation, &spec).unwrap();
        let times: Vec<f64> = (0..3)
            .map(|i| track_path_length(&section, &orientation, &spec, i).unwrap() / speeds[i])
            .collect();
        for t in &times {
            prop_assert!(rel_close(*t, times[0], 1e-9));
            prop_assert!(rel_close(*t, section.length_mm() / v, 1e-9));
        }
    }

    #[test]
    fn rolling_by_120_degrees_relabels_tracks((big_r, small_r) in bend_geometry(), mu in 0.0f64..120.0) {
        let section = Section::bend(big_r, 90.0, "");
        let spec = PipeSpec::new(small_r).unwrap();
        let mut a = track_speeds(50.0, &section, &Orientation::new(mu).unwrap(), &spec).unwrap();
        let mut b = track_speeds(50.0, &section, &Orientation::new(mu + 120.0).unwrap(), &spec).unwrap();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(b) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn widest_track_circle_is_fastest_and_longest((big_r, small_r) in bend_geometry(), mu in 0.0f64..120.0) {
        let section = Section::bend(big_r, 90.0, "");
        let spec = PipeSpec::new(small_r).unwrap();
        let orientation = Orientation::new(mu).unwrap();
        let radii = orientation.track_angles_deg().map(|a| big_r - small_r * a.to_radians().cos());
        let widest = (0..3).max_by(|&i, &j| radii[i].total_cmp(&radii[j])).unwrap();
        let runner_up = (0..3).filter(|&i| i != widest).map(|i| radii[i]).fold(f64::MIN, f64::max);
        prop_assume!(radii[widest] - runner_up > 1e-6 * big_r);
        let speeds = track_speeds(50.0, &section, &orientation, &spec).unwrap();
        for i in (0..3).filter(|&i| i != widest) {
            prop_assert!(speeds[widest] > speeds[i]);
            prop_assert!(
                track_path_length(&section, &orientation, &spec, widest).unwrap()
                    > track_path_length(&section, &orientation, &spec, i).unwrap()
            );
        }
    }

    #[test]
    fn bend_speed_stays_between_inner_and_outer_wall((big_r, small_r) in bend_geometry(), v in 0.0f64..200.0, angle in -720.0f64..720.0) {
        let s = bend_track_speed(v, big_r, small_r, angle).unwrap();
        let lo = v * (big_r - small_r) / big_r;
        let hi = v * (big_r + small_r) / big_r;
        prop_assert!(s >= lo - 1e-9 && s <= hi + 1e-9);
    }

    #[test]
    fn ape_is_scale_and_sign_invariant(
        a in -1e3f64..1e3,
        b in (1e-3f64..1e3, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }),
        c in (1e-3f64..1e3, any::<bool>()).prop_map(|(m, neg)| if neg { -m } else { m }),
    ) {
        let base = ape(a, b).unwrap();
        let tol = 1e-9 * base.max(1.0);
        prop_assert!((ape(-a, -b).unwrap() - base).abs() <= tol);
        prop_assert!((ape(c * a, c * b).unwrap() - base).abs() <= tol);
    }

    #[test]
    fn network_descriptor_round_trips(
        r in 1.0f64..100.0,
        layout in prop::collection::vec((any::<bool>(), 1.1f64..5.0, 1.0f64..360.0), 1..6),
    ) {
        let sections = layout
            .into_iter()
            .map(|(bend, size, sweep)| if bend { Section::bend(r * size, sweep, "b") } else { Section::straight(r * size, "s") })
            .collect();
        let net = PipeNetwork::new(PipeSpec::new(r).unwrap(), sections).unwrap();
        let text = net.to_json();
        let back = PipeNetwork::from_json(&text).unwrap();
        prop_assert_eq!(back.sections.len(), net.sections.len());
        prop_assert_eq!(back.to_json(), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    #[test]
    fn default_runs_do_not_slip_at_any_orientation(mu in 0.0f64..120.0) {
        let net = paper_network();
        let orientation = Orientation::new(mu).unwrap();
        let log = run(&net, orientation, &RobotConfig::default(), &GearParams::default(), 1e-3, 0.1).unwrap();
        let slip = slip_metric(&log, &net, &orientation).unwrap();
        for (s, path) in slip.iter().zip(log.summary.expected_track_path_mm) {
            prop_assert!(*s < 1e-6 * path, "slip {s} on path {path}");
        }
        for row in &log.rows {
            let center = row.s_mm - log.summary.path_start_mm;
            let sum: f64 = row.distances_mm.iter().sum();
            prop_assert!((sum - 3.0 * center).abs() < 1e-6 * center.max(1.0));
        }
    }
}

#[test]
fn halving_dt_barely_moves_results() {
    let net = paper_network();
    let orientation = Orientation::new(30.0).unwrap();
    let config = RobotConfig::default();
    let params = GearParams::default();
    let coarse = run(&net, orientation, &config, &params, 2e-3, 0.1).unwrap();
    let fine = run(&net, orientation, &config, &params, 1e-3, 0.1).unwrap();
    let bound = 2.0 * 2e-3 * coarse.summary.nominal_speed_mm_s;
    assert!((coarse.summary.total_time_s - fine.summary.total_time_s).abs() < 2e-3);
    for i in 0..3 {
        let delta = (coarse.summary.track_distance_mm[i] - fine.summary.track_distance_mm[i]).abs();
        assert!(delta < bound, "track {i}: {delta}");
    }
}

#[test]
fn identical_inputs_give_identical_logs() {
    let net = paper_network();
    let orientation = Orientation::new(60.0).unwrap();
    let a = run(
        &net,
        orientation,
        &RobotConfig::default(),
        &GearParams::default(),
        1e-3,
        0.1,
    )
    .unwrap();
    let b = run(
        &net,
        orientation,
        &RobotConfig::default(),
        &GearParams::default(),
        1e-3,
        0.1,
    )
    .unwrap();
    assert_eq!(a.to_csv(), b.to_csv());
    assert_eq!(a, b);
}

#[test]
fn sampled_rows_are_strictly_time_ordered_and_monotone() {
    let net = paper_network();
    let log = run(
        &net,
        Orientation::new(0.0).unwrap(),
        &RobotConfig::default(),
        &GearParams::default(),
        1e-3,
        0.1,
    )
    .unwrap();
    for pair in log.rows.windows(2) {
        assert!(pair[1].time_s > pair[0].time_s);
        assert!(pair[1].s_mm >= pair[0].s_mm);
        for i in 0..3 {
            assert!(pair[1].distances_mm[i] >= pair[0].distances_mm[i]);
        }
    }
}
