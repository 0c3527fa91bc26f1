//! Discrete Kalman filter for output-feedback operation.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::LtiModel;

#[derive(Debug, Clone, PartialEq)]
pub struct KalmanFilter {
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    c: DMatrix<f64>,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
    x_hat: DVector<f64>,
    p_cov: DMatrix<f64>,
    innovation: DVector<f64>,
    gain: DMatrix<f64>,
}

fn check_psd(name: &str, m: &DMatrix<f64>) -> Result<()> {
    let scale = linalg::max_abs(m).max(1.0);
    if !linalg::is_symmetric(m, 1e-12 * scale) {
        return Err(Error::InvalidConfig(format!("{name} must be symmetric")));
    }
    let min = SymmetricEigen::new(m.clone())
        .eigenvalues
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min);
    if min < -1e-10 * scale {
        return Err(Error::InvalidConfig(format!(
            "{name} must be positive semidefinite (min eigenvalue {min:e})"
        )));
    }
    Ok(())
}

impl KalmanFilter {
    pub fn new(
        model: &LtiModel,
        q: DMatrix<f64>,
        r: DMatrix<f64>,
        x0: DVector<f64>,
        p0: DMatrix<f64>,
    ) -> Result<Self> {
        let n = model.n();
        let m = model.m();
        for (context, found, expected) in [
            ("process noise covariance", q.shape(), (n, n)),
            ("measurement noise covariance", r.shape(), (m, m)),
            ("initial covariance", p0.shape(), (n, n)),
        ] {
            if found != expected {
                return Err(Error::DimensionMismatch {
                    context,
                    expected: expected.0,
                    found: found.0,
                });
            }
        }
        if x0.len() != n {
            return Err(Error::DimensionMismatch {
                context: "initial estimate",
                expected: n,
                found: x0.len(),
            });
        }
        check_psd("Q", &q)?;
        check_psd("R", &r)?;
        check_psd("P0", &p0)?;
        Ok(Self {
            a: model.a().clone(),
            b: model.b().clone(),
            c: model.c().clone(),
            q,
            r,
            x_hat: x0,
            p_cov: p0,
            innovation: DVector::zeros(m),
            gain: DMatrix::zeros(n, m),
        })
    }

    pub fn x_hat(&self) -> &DVector<f64> {
        &self.x_hat
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.p_cov
    }

    /// Innovation of the last update.
    pub fn innovation(&self) -> &DVector<f64> {
        &self.innovation
    }

    /// Gain of the last update.
    pub fn gain(&self) -> &DMatrix<f64> {
        &self.gain
    }

    /// `x <- A x + B u`, `P <- A P A' + Q`.
    pub fn predict(&mut self, u: &DVector<f64>) {
        self.x_hat = &self.a * &self.x_hat + &self.b * u;
        self.p_cov = &self.a * &self.p_cov * self.a.transpose() + &self.q;
        linalg::symmetrize(&mut self.p_cov);
    }

    /// Measurement update with the Joseph-form covariance.
    pub fn update(&mut self, y: &DVector<f64>) -> Result<()> {
        if y.len() != self.c.nrows() {
            return Err(Error::DimensionMismatch {
                context: "measurement",
                expected: self.c.nrows(),
                found: y.len(),
            });
        }
        let n = self.x_hat.len();
        let pct = &self.p_cov * self.c.transpose();
        let s = &self.c * &pct + &self.r;
        let s_inv = s.clone().cholesky().map(|ch| ch.inverse()).or_else(|| {
            (linalg::condition_number(&s) < 1e14)
                .then(|| s.clone().try_inverse())
                .flatten()
        });
        let s_inv = s_inv.ok_or(Error::SingularInnovation)?;
        let gain = pct * s_inv;
        let innovation = y - &self.c * &self.x_hat;
        self.x_hat += &gain * &innovation;
        let i_kc = DMatrix::identity(n, n) - &gain * &self.c;
        self.p_cov = &i_kc * &self.p_cov * i_kc.transpose() + &gain * &self.r * gain.transpose();
        linalg::symmetrize(&mut self.p_cov);
        self.innovation = innovation;
        self.gain = gain;
        Ok(())
    }
}
