use pssc_core::plant::metrics::segments;
use pssc_core::plant::rcci::{surrogate_rcci_step, RcciInput, RcciOperatingPoint};
use pssc_core::plant::scenarios;
use pssc_core::plant::sim::{invariant_set_for, simulate_with};
use pssc_core::polytope::invariant::tracking_invariant_set;
use pssc_core::*;

#[test]
fn traces_have_one_record_per_cycle() {
    for name in scenarios::NAMES {
        let cfg = scenarios::builtin(name).unwrap();
        let trace = simulate(&cfg).unwrap();
        assert_eq!(trace.records.len(), cfg.cycles, "{name}");
        assert!(trace.records.windows(2).all(|w| w[1].k == w[0].k + 1));
    }
}

/// Divergence detector: no state leaves ten times the constraint box.
#[test]
fn shipped_scenarios_stay_bounded() {
    for name in scenarios::NAMES {
        let mut cfg = scenarios::builtin(name).unwrap();
        let (lo, hi) = cfg.sets.states.bounding_box().unwrap().unwrap();
        let t = invariant_set_for(&cfg).unwrap();
        for controller in [ControllerKind::Pssc, ControllerKind::Dsmc] {
            cfg.controller = controller;
            let trace = simulate_with(&cfg, Some(t.clone())).unwrap();
            for r in &trace.records {
                let dx = &r.x_true - &cfg.state_offset;
                for i in 0..dx.len() {
                    assert!(
                        dx[i] <= 10.0 * hi[i] && dx[i] >= 10.0 * lo[i],
                        "{name}: {dx}"
                    );
                }
            }
        }
    }
}

#[test]
fn pssc_inputs_are_never_clipped() {
    for name in ["fig2", "fig3", "fig4a", "fig4b"] {
        let cfg = scenarios::builtin(name).unwrap();
        let metrics = trace_metrics(&simulate(&cfg).unwrap());
        assert_eq!(metrics.saturation_cycles, 0, "{name}");
        assert_eq!(metrics.fallback_cycles, 0, "{name}");
    }
}

#[test]
fn fig4b_holds_imep_while_ca50_steps() {
    let cfg = scenarios::fig4b();
    let trace = simulate(&cfg).unwrap();
    let ca50_ref: Vec<f64> = trace.records.iter().map(|r| r.y_ref[0]).collect();
    assert_eq!(ca50_ref[40], 6.0);
    assert_eq!(ca50_ref[39], 10.0);
    let metrics = trace_metrics(&trace);
    let imep = metrics.output("IMEP").unwrap();
    assert!(imep.mean_abs_error < 10.0);
    let ca50 = metrics.output("CA50").unwrap();
    assert!(ca50.steady_state_error() < 0.5);
}

#[test]
fn dsmc_tracks_fig2_references_on_the_linear_plant() {
    let mut cfg = scenarios::fig2();
    cfg.plant = PlantKind::Linear;
    cfg.controller = ControllerKind::Dsmc;
    let trace = simulate(&cfg).unwrap();
    let imep: Vec<f64> = trace.records.iter().map(|r| r.y_ref[1]).collect();
    for (start, end) in segments(&imep) {
        let last = &trace.records[end - 1];
        assert!(
            (&last.y_true - &last.y_ref).amax() < 1e-3,
            "segment at {start}"
        );
    }
}

#[test]
fn seed_only_changes_noisy_runs() {
    let mut nominal = scenarios::fig4a();
    let a = simulate(&nominal).unwrap();
    nominal.seed = 99;
    let b = simulate(&nominal).unwrap();
    assert_eq!(a.records, b.records);

    let mut noisy = scenarios::fig5();
    let a = simulate(&noisy).unwrap();
    noisy.seed += 1;
    let b = simulate(&noisy).unwrap();
    assert_ne!(a.records, b.records);
}

#[test]
fn csv_round_trips_measured_outputs() {
    let cfg = scenarios::fig5();
    let trace = simulate(&cfg).unwrap();
    let csv = trace.to_csv_string().unwrap();
    let mut reader = csv::Reader::from_reader(csv.as_bytes());
    let header = reader.headers().unwrap().clone();
    let expected = [
        "k",
        "x1",
        "x2",
        "x3",
        "x4",
        "x1_est",
        "x2_est",
        "x3_est",
        "x4_est",
        "CA50",
        "IMEP",
        "CA50_ref",
        "IMEP_ref",
        "CA50_virt",
        "IMEP_virt",
        "SOI",
        "FQ",
        "s1",
        "s2",
        "xi1",
        "xi2",
        "status",
        "solve_ms",
    ];
    assert_eq!(header.iter().collect::<Vec<_>>(), expected);
    for (row, rec) in reader.records().zip(&trace.records) {
        let row = row.unwrap();
        let imep: f64 = row[10].parse().unwrap();
        assert_eq!(imep.to_bits(), rec.y_meas[1].to_bits());
        assert_eq!(&row[21], "optimal");
    }
}

#[test]
fn surrogate_reports_envelope_violation_in_simulation() {
    let mut cfg = scenarios::fig2();
    cfg.controller = ControllerKind::Dsmc;
    cfg.initial_state[3] = -600.0;
    assert!(matches!(simulate(&cfg), Err(Error::OutOfEnvelope(_))));
}

#[test]
fn surrogate_physical_interface() {
    let op = RcciOperatingPoint::default();
    let input = RcciInput {
        soi: -60.0,
        fq: 26.0,
    };
    let (next, y) =
        surrogate_rcci_step(&op.nominal_state(), &input, &op, Some([1.0, -2.0])).unwrap();
    assert_eq!(y, [next.ca50 + 1.0, next.imep - 2.0]);
    assert!(next.imep > 500.0);
    assert!(next.ca50 < 8.0 + 0.25 * 2.0);
}

/// Pushing an active facet of T outward yields a point that some iterate
/// of `A_eq` carries out of `W_eq`.
#[test]
fn invariant_set_maximality_witness() {
    for cfg in [scenarios::scalar_demo(), scenarios::double_integrator()] {
        let design = build_sliding_design(&cfg.model, &cfg.alpha, &cfg.beta).unwrap();
        let t = tracking_invariant_set(
            &cfg.model,
            &design,
            &cfg.sets,
            &InvariantSetConfig::default(),
        )
        .unwrap();
        let (center, _) = t.t.chebyshev_center().unwrap().unwrap();
        let mut witnessed = 0;
        for i in 0..t.t.num_rows() {
            let normal = t.t.f().row(i).transpose();
            // Boundary point on facet i along the normal from the center.
            let reach = t.t.g()[i] - normal.dot(&center);
            let mut w = &center + &normal * (reach + 1e-3);
            if t.w_eq.max_violation(&w) > 0.0 {
                witnessed += 1;
                continue;
            }
            let mut left = false;
            for _ in 0..=t.iterations + 1 {
                w = &t.a_eq * &w;
                if t.w_eq.max_violation(&w) > 1e-12 {
                    left = true;
                    break;
                }
            }
            if left {
                witnessed += 1;
            }
        }
        assert!(witnessed > 0, "{}", cfg.name);
    }
}
