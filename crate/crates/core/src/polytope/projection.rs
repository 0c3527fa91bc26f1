//! Fourier-Motzkin elimination.

use nalgebra::{DMatrix, DVector};

use super::Polyhedron;
use crate::error::{Error, Result};

const COEFF_TOL: f64 = 1e-12;

pub(super) fn project(p: &Polyhedron, keep: &[usize], cap: usize) -> Result<Polyhedron> {
    let dim = p.dim();
    if keep.is_empty() {
        return Err(Error::InvalidConfig(
            "projection needs at least one coordinate".into(),
        ));
    }
    if let Some(&bad) = keep.iter().find(|&&i| i >= dim) {
        return Err(Error::DimensionMismatch {
            context: "projection coordinate",
            expected: dim,
            found: bad,
        });
    }
    if p.is_certified_empty() {
        return Ok(Polyhedron::empty(keep.len()));
    }

    // Working columns track which original coordinate each column holds.
    let mut columns: Vec<usize> = (0..dim).collect();
    let mut current = p.minimize()?;
    if current.is_certified_empty() {
        return Ok(Polyhedron::empty(keep.len()));
    }
    loop {
        let candidates: Vec<usize> = (0..columns.len())
            .filter(|c| !keep.contains(&columns[*c]))
            .collect();
        if candidates.is_empty() {
            break;
        }
        // Eliminate the coordinate with the fewest generated rows.
        let col = *candidates
            .iter()
            .min_by_key(|&&c| {
                let (pos, neg) = sign_counts(current.f(), c);
                pos * neg
            })
            .expect("nonempty candidates");
        current = eliminate(&current, col, cap)?;
        columns.remove(col);
        if current.is_certified_empty() {
            return Ok(Polyhedron::empty(keep.len()));
        }
    }

    let order: Vec<usize> = keep
        .iter()
        .map(|k| columns.iter().position(|c| c == k).expect("kept column"))
        .collect();
    let f = current.f().select_columns(order.iter());
    Polyhedron::new(f, current.g().clone())
}

fn sign_counts(f: &DMatrix<f64>, col: usize) -> (usize, usize) {
    let pos = f.column(col).iter().filter(|v| **v > COEFF_TOL).count();
    let neg = f.column(col).iter().filter(|v| **v < -COEFF_TOL).count();
    (pos, neg)
}

fn eliminate(p: &Polyhedron, col: usize, cap: usize) -> Result<Polyhedron> {
    let f = p.f();
    let g = p.g();
    let width = f.ncols() - 1;
    let mut zero = Vec::new();
    let mut pos = Vec::new();
    let mut neg = Vec::new();
    for i in 0..f.nrows() {
        let a = f[(i, col)];
        if a > COEFF_TOL {
            pos.push(i);
        } else if a < -COEFF_TOL {
            neg.push(i);
        } else {
            zero.push(i);
        }
    }
    let total = zero.len() + pos.len() * neg.len();
    if total > cap {
        return Err(Error::ProjectionBlowup { rows: total, cap });
    }

    let drop_col = |row: DVector<f64>| -> Vec<f64> {
        row.iter()
            .enumerate()
            .filter(|(j, _)| *j != col)
            .map(|(_, v)| *v)
            .collect()
    };
    let mut rows: Vec<f64> = Vec::with_capacity(total * width);
    let mut offsets = Vec::with_capacity(total);
    for &i in &zero {
        rows.extend(drop_col(f.row(i).transpose()));
        offsets.push(g[i]);
    }
    for &i in &pos {
        let ai = f[(i, col)];
        for &j in &neg {
            let aj = -f[(j, col)];
            let combined = f.row(i).transpose() / ai + f.row(j).transpose() / aj;
            rows.extend(drop_col(combined));
            offsets.push(g[i] / ai + g[j] / aj);
        }
    }
    let reduced = Polyhedron::new(
        DMatrix::from_row_slice(offsets.len(), width, &rows),
        DVector::from_vec(offsets),
    )?;
    reduced.minimize()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    #[test]
    fn box_projects_to_interval() {
        let b = Polyhedron::from_box(&[-1.0, -1.0], &[1.0, 1.0]).unwrap();
        let z = b.project(&[0]).unwrap();
        let (lo, hi) = z.bounding_box().unwrap().unwrap();
        assert!((lo[0] + 1.0).abs() < 1e-12 && (hi[0] - 1.0).abs() < 1e-12);
        assert_eq!(z.num_rows(), 2);
    }

    #[test]
    fn simplex_projects_to_unit_interval() {
        let p = Polyhedron::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 1.0, -1.0, 0.0, 0.0, -1.0]),
            v(&[1.0, 0.0, 0.0]),
        )
        .unwrap();
        let z = p.project(&[0]).unwrap();
        let (lo, hi) = z.bounding_box().unwrap().unwrap();
        assert!(lo[0].abs() < 1e-12 && (hi[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn keep_order_is_respected() {
        let b = Polyhedron::from_box(&[0.0, 10.0, 20.0], &[1.0, 11.0, 21.0]).unwrap();
        let z = b.project(&[2, 0]).unwrap();
        assert!(z.contains(&v(&[20.5, 0.5])));
        assert!(!z.contains(&v(&[0.5, 20.5])));
    }

    #[test]
    fn blowup_reported() {
        // A many-faced polygon lifted so that eliminating y pairs every face.
        let k = 40;
        let mut f = Vec::new();
        let mut g = Vec::new();
        for i in 0..k {
            let t = i as f64 / k as f64 * std::f64::consts::TAU;
            f.extend([t.cos(), t.sin()]);
            g.push(1.0);
        }
        let p = Polyhedron::new(DMatrix::from_row_slice(k, 2, &f), DVector::from_vec(g)).unwrap();
        assert!(matches!(
            p.project_with_cap(&[0], 10),
            Err(Error::ProjectionBlowup { cap: 10, .. })
        ));
        let z = p.project(&[0]).unwrap();
        let (lo, hi) = z.bounding_box().unwrap().unwrap();
        assert!((hi[0] - 1.0).abs() < 1e-9 && (lo[0] + 1.0).abs() < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        /// A query point lies in the projection iff some lifting is feasible.
        #[test]
        fn projection_matches_lifting_lp(
            normals in prop::collection::vec((-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64), 8),
            queries in prop::collection::vec((-2.0..2.0f64, -2.0..2.0f64), 60),
        ) {
            let mut f = Vec::new();
            let mut g = Vec::new();
            for (a, b, c) in &normals {
                f.extend([*a, *b, *c]);
                g.push(1.0);
            }
            // Bounding box keeps the set compact.
            for i in 0..3 {
                for s in [1.0, -1.0] {
                    let mut row = [0.0; 3];
                    row[i] = s;
                    f.extend(row);
                    g.push(1.5);
                }
            }
            let rows = g.len();
            let p = Polyhedron::new(DMatrix::from_row_slice(rows, 3, &f), DVector::from_vec(g)).unwrap();
            let z = p.project(&[0, 1]).unwrap();
            for (x, y) in queries {
                // Lifting LP: is {t : F [x, y, t] <= g} nonempty?
                let a = p.f().column(2).into_owned();
                let b = p.g() - p.f().column(0) * x - p.f().column(1) * y;
                let lifted = crate::lp::feasible_point(&DMatrix::from_column_slice(rows, 1, a.as_slice()), &b).unwrap().is_some();
                let slack = z.max_violation(&v(&[x, y]));
                if slack.abs() < 1e-7 {
                    continue;
                }
                prop_assert_eq!(z.contains(&v(&[x, y])), lifted);
            }
        }
    }
}
