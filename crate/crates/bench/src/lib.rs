//! Fixtures shared by the benchmarks.

use pssc_core::plant::scenarios;
use pssc_core::qp::QpProblem;
use pssc_core::{build_sliding_design, DMatrix, DVector, PsscController, SimConfig};

/// PSSC controller of the RCCI scenario with reduced fuel authority.
pub fn rcci_controller() -> (SimConfig, PsscController) {
    let cfg = scenarios::fig3();
    let design = build_sliding_design(&cfg.model, &cfg.alpha, &cfg.beta).expect("valid design");
    let ctrl = PsscController::new(
        cfg.model.clone(),
        design,
        cfg.sets.clone(),
        cfg.pssc.clone(),
    )
    .expect("controller builds");
    (cfg, ctrl)
}

/// Strictly convex box-constrained QP of size `n` with about half the
/// bounds active at the optimum.
pub fn box_qp(n: usize) -> QpProblem {
    let mut p = DMatrix::from_fn(n, n, |i, j| 1.0 / (1.0 + (i as f64 - j as f64).abs()));
    p += DMatrix::identity(n, n) * n as f64;
    let q = DVector::from_fn(n, |i, _| if i % 2 == 0 { -3.0 * n as f64 } else { 0.5 });
    let mut f = DMatrix::zeros(2 * n, n);
    for i in 0..n {
        f[(2 * i, i)] = 1.0;
        f[(2 * i + 1, i)] = -1.0;
    }
    let g = DVector::from_element(2 * n, 1.0);
    QpProblem::new(p, q, f, g, DMatrix::zeros(0, n), DVector::zeros(0)).expect("valid QP")
}
