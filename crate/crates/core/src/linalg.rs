//! Small dense linear-algebra helpers shared by the design, set and solver code.

use nalgebra::{Complex, DMatrix, DVector, Schur, QR, SVD};

use crate::error::{Error, Result};

/// Eigenvalues of a general square matrix (real Schur form).
pub fn eigenvalues(m: &DMatrix<f64>) -> Result<Vec<Complex<f64>>> {
    if m.nrows() != m.ncols() {
        return Err(Error::DimensionMismatch {
            context: "eigenvalues (square matrix)",
            expected: m.nrows(),
            found: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = Schur::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::IllConditioned("Schur decomposition did not converge".into()))?;
    Ok(schur.complex_eigenvalues().iter().copied().collect())
}

pub fn spectral_radius(m: &DMatrix<f64>) -> Result<f64> {
    Ok(eigenvalues(m)?.iter().map(|z| z.norm()).fold(0.0, f64::max))
}

/// 2-norm condition number; `f64::INFINITY` for singular matrices.
pub fn condition_number(m: &DMatrix<f64>) -> f64 {
    let sv = SVD::new(m.clone(), false, false).singular_values;
    let max = sv.iter().copied().fold(0.0, f64::max);
    let min = sv.iter().copied().fold(f64::INFINITY, f64::min);
    if min <= 0.0 || !min.is_finite() {
        f64::INFINITY
    } else {
        max / min
    }
}

pub fn matrix_power(m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let mut out = DMatrix::identity(m.nrows(), m.ncols());
    for _ in 0..k {
        out = &out * m;
    }
    out
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn vmax_abs(v: &DVector<f64>) -> f64 {
    v.iter().fold(0.0, |acc, x| acc.max(x.abs()))
}

/// Full orthogonal factorisation of the row space of `rows` (w x nu):
/// returns `(q, r)` with `q` square (nu x nu) and `rows^T = q[:, ..w] * r`.
/// The trailing `nu - w` columns of `q` span the null space of `rows` when
/// the rows are linearly independent.
pub fn row_space_factor(rows: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>) {
    let w = rows.nrows();
    let nu = rows.ncols();
    if w == 0 {
        return (DMatrix::identity(nu, nu), DMatrix::zeros(0, 0));
    }
    let mut padded = DMatrix::zeros(nu, nu.max(w));
    padded
        .view_mut((0, 0), (nu, w))
        .copy_from(&rows.transpose());
    let qr = QR::new(padded);
    let q = qr.q();
    let r = qr.r();
    let r = r.view((0, 0), (w.min(nu), w)).into_owned();
    (q, r)
}

/// Symmetrise in place: `(m + m^T) / 2`.
pub fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

pub fn is_symmetric(m: &DMatrix<f64>, tol: f64) -> bool {
    if m.nrows() != m.ncols() {
        return false;
    }
    let scale = max_abs(m).max(1.0);
    for i in 0..m.nrows() {
        for j in 0..i {
            if (m[(i, j)] - m[(j, i)]).abs() > tol * scale {
                return false;
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spectral_radius_of_rotation_scaled() {
        let m = DMatrix::from_row_slice(2, 2, &[0.0, -0.5, 0.5, 0.0]);
        assert!((spectral_radius(&m).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn row_space_factor_gives_null_space() {
        let rows = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let (q, r) = row_space_factor(&rows);
        assert_eq!(q.shape(), (3, 3));
        let z = q.columns(1, 2);
        assert!((&rows * z).abs().max() < 1e-12);
        let recon = q.columns(0, 1) * &r;
        assert!((recon - rows.transpose()).abs().max() < 1e-12);
    }

    #[test]
    fn condition_number_singular() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(condition_number(&m) > 1e12);
    }
}
