use nalgebra::SymmetricEigen;
use proptest::prelude::*;
use pssc_core::linalg::spectral_radius;
use pssc_core::model::default_beta;
use pssc_core::plant::scenarios;
use pssc_core::qp::{solve_qp, QpProblem};
use pssc_core::sliding::{second_order_value, sliding_value};
use pssc_core::*;

fn matrix(rows: usize, cols: usize, scale: f64) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-scale..scale, rows * cols)
        .prop_map(move |v| DMatrix::from_row_slice(rows, cols, &v))
}

fn vector(len: usize, scale: f64) -> impl Strategy<Value = DVector<f64>> {
    prop::collection::vec(-scale..scale, len).prop_map(DVector::from_vec)
}

fn random_model() -> impl Strategy<Value = LtiModel> {
    (2usize..=4, 1usize..=2).prop_flat_map(|(n, m)| {
        (matrix(n, n, 0.6), matrix(n, m, 1.0), matrix(m, n, 1.0))
            .prop_map(|(a, b, c)| LtiModel::new(a, b, c).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Any design that builds satisfies its defining identities.
    #[test]
    fn sliding_design_identities(model in random_model()) {
        let m = model.m();
        let d: Vec<usize> = match (0..m).map(|i| relative_degree(&model, i)).collect() {
            Ok(d) => d,
            Err(_) => return Ok(()),
        };
        let alpha: Vec<Vec<f64>> = d
            .iter()
            .map(|&di| {
                let mut a = vec![0.0; di];
                a[di - 1] = 1.0;
                for (j, slot) in a.iter_mut().enumerate().take(di - 1) {
                    *slot = 0.1 * (j + 1) as f64;
                }
                a
            })
            .collect();
        let beta = default_beta(m);
        let design = match build_sliding_design(&model, &alpha, &beta) {
            Ok(design) => design,
            Err(_) => return Ok(()),
        };
        let g = design.g();
        let gb = g * model.b();
        let k_expected = -(gb.clone().try_inverse().unwrap() * (g * model.a() + &beta * g));
        let scale = 1.0 + k_expected.amax();
        prop_assert!((design.k() - &k_expected).amax() < 1e-9 * scale);
        let mut h = DMatrix::zeros(m, m);
        for (i, a) in alpha.iter().enumerate() {
            h[(i, i)] = a.iter().sum::<f64>();
        }
        prop_assert!((design.h_tilde() - &h).amax() == 0.0);
        let l_expected = gb.try_inverse().unwrap() * (DMatrix::identity(m, m) + &beta) * &h;
        prop_assert!((design.l() - &l_expected).amax() < 1e-9 * (1.0 + l_expected.amax()));
        prop_assert!(spectral_radius(design.beta()).unwrap() < 1.0);
        let closed = model.a() + model.b() * design.k();
        prop_assert!(spectral_radius(&closed).unwrap() < 1.0);
    }

    /// `xi = s(k+1) + beta s(k)` along any trajectory.
    #[test]
    fn second_order_value_is_definitional(
        x0 in vector(4, 50.0),
        x1 in vector(4, 50.0),
        h in vector(2, 10.0),
    ) {
        let model = pssc_core::plant::rcci::linear_model();
        let design = build_sliding_design(&model, &[vec![1.0], vec![1.0]], &default_beta(2)).unwrap();
        let s0 = sliding_value(&design, &x0, &h);
        let s1 = sliding_value(&design, &x1, &h);
        let xi = second_order_value(&design, &s1, &s0);
        prop_assert_eq!(xi, &s1 + design.beta() * &s0);
        prop_assert_eq!(s0, design.g() * &x0 - &h);
    }

    /// Every Optimal return satisfies the KKT conditions, each checked here
    /// from scratch.
    #[test]
    fn qp_optimal_is_kkt(
        m in matrix(5, 5, 1.0),
        q in vector(5, 5.0),
        f in matrix(8, 5, 1.0),
        slack in prop::collection::vec(0.0..1.0, 8),
        z0 in vector(5, 1.0),
        e in matrix(1, 5, 1.0),
    ) {
        let p = m.transpose() * &m + DMatrix::identity(5, 5) * 0.1;
        let g = &f * &z0 + DVector::from_vec(slack);
        let h = &e * &z0;
        let prob = QpProblem::new(p.clone(), q.clone(), f.clone(), g.clone(), e.clone(), h.clone()).unwrap();
        let sol = solve_qp(&prob, None).unwrap();
        prop_assert_eq!(sol.status, QpStatus::Optimal);
        let z = &sol.z;
        let stationarity = &p * z + &q + f.transpose() * &sol.duals_in + e.transpose() * &sol.duals_eq;
        let scale = 1.0 + q.amax() + (&p * z).amax();
        prop_assert!(stationarity.amax() <= 1e-6 * scale);
        let residual = &f * z - &g;
        prop_assert!(residual.max() <= 1e-6 * (1.0 + g.amax()));
        prop_assert!((&e * z - &h).amax() <= 1e-6 * (1.0 + h.amax()));
        prop_assert!(sol.duals_in.min() >= -1e-6);
        for i in 0..g.len() {
            prop_assert!((sol.duals_in[i] * residual[i]).abs() <= 1e-6 * scale);
        }
        prop_assert!(sol.kkt_residual <= 1e-6);
    }

    /// The Joseph-form covariance stays symmetric PSD.
    #[test]
    fn kalman_covariance_stays_psd(
        lq in matrix(4, 4, 1.0),
        lr in matrix(2, 2, 1.0),
        ys in prop::collection::vec(vector(2, 100.0), 1..30),
    ) {
        let model = pssc_core::plant::rcci::linear_model();
        let q = &lq * lq.transpose();
        let r = &lr * lr.transpose() + DMatrix::identity(2, 2) * 1e-3;
        let mut kf = KalmanFilter::new(&model, q, r, DVector::zeros(4), DMatrix::identity(4, 4)).unwrap();
        for y in &ys {
            kf.update(y).unwrap();
            let p = kf.covariance();
            prop_assert!((p - p.transpose()).amax() == 0.0);
            let min = SymmetricEigen::new(p.clone()).eigenvalues.min();
            prop_assert!(min >= -1e-9 * (1.0 + p.amax()));
            kf.predict(&DVector::zeros(2));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// From any state in the feasible region the applied input lies in U,
    /// the plan respects X and ends in T.
    #[test]
    fn pssc_plan_is_admissible(
        x in vector(4, 1.0),
        r in vector(2, 1.0),
    ) {
        let cfg = scenarios::fig3();
        let design = build_sliding_design(&cfg.model, &cfg.alpha, &cfg.beta).unwrap();
        let mut ctrl = PsscController::new(cfg.model.clone(), design, cfg.sets.clone(), cfg.pssc.clone()).unwrap();
        let x0 = x.component_mul(&DVector::from_column_slice(&scenarios::STATE_HALF_WIDTHS)) * 0.5;
        let r = r.component_mul(&DVector::from_column_slice(&[10.0, 300.0]));
        let res = ctrl.step(&x0, &r).unwrap();
        if res.status == StepStatus::Optimal {
            prop_assert!(cfg.sets.inputs.contains_with_tol(&res.u_applied, 1e-6));
            for u in &res.predicted_inputs {
                prop_assert!(cfg.sets.inputs.contains_with_tol(u, 1e-6));
            }
            let horizon = res.predicted_states.len() - 1;
            for xj in &res.predicted_states[1..horizon] {
                prop_assert!(cfg.sets.states.contains_with_tol(xj, 1e-6));
            }
            let terminal = DVector::from_iterator(
                6,
                res.predicted_states[horizon].iter().chain(res.y_virtual.iter()).copied(),
            );
            prop_assert!(ctrl.invariant_set().t.max_violation(&terminal) < 1e-6);
        }
    }
}
