//! Polyhedra in H-representation, `{w : F w <= g}`.
//!
//! Rows are stored with unit Euclidean norm. Zero rows are dropped on
//! construction; a zero row with a negative offset marks the set empty.

pub mod invariant;
mod projection;
pub mod sample;

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lp::{self, LinearProgram, LpOutcome};

/// Absolute membership tolerance on normalized rows.
pub const CONTAINS_TOL: f64 = 1e-9;
/// Rows whose norm falls below this are treated as zero.
const ZERO_ROW_TOL: f64 = 1e-12;
/// Default cap on intermediate rows during Fourier-Motzkin elimination.
pub const DEFAULT_PROJECTION_CAP: usize = 20_000;

fn redundancy_tol(g: f64) -> f64 {
    1e-9 * g.abs().max(1.0)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Polyhedron {
    f: DMatrix<f64>,
    g: DVector<f64>,
    empty: bool,
}

impl Polyhedron {
    /// `{w : F w <= g}` with rows normalized.
    pub fn new(f: DMatrix<f64>, g: DVector<f64>) -> Result<Self> {
        if f.nrows() != g.len() {
            return Err(Error::DimensionMismatch {
                context: "polyhedron offsets",
                expected: f.nrows(),
                found: g.len(),
            });
        }
        if f.iter().any(|v| !v.is_finite()) || g.iter().any(|v| v.is_nan()) {
            return Err(Error::InvalidModel("non-finite polyhedron data".into()));
        }
        let p = f.ncols();
        let mut rows = Vec::with_capacity(f.nrows());
        let mut offsets = Vec::with_capacity(f.nrows());
        let mut empty = false;
        for i in 0..f.nrows() {
            let row = f.row(i);
            let norm = row.norm();
            if norm <= ZERO_ROW_TOL {
                if g[i] < -CONTAINS_TOL {
                    empty = true;
                }
                continue;
            }
            if g[i] == f64::INFINITY {
                continue;
            }
            // Rows that are already unit length stay bitwise unchanged.
            let norm = if (norm - 1.0).abs() <= 4.0 * f64::EPSILON {
                1.0
            } else {
                norm
            };
            rows.extend(row.iter().map(|v| v / norm));
            offsets.push(g[i] / norm);
        }
        let r = offsets.len();
        Ok(Self {
            f: DMatrix::from_row_slice(r, p, &rows),
            g: DVector::from_vec(offsets),
            empty,
        })
    }

    /// All of `R^p`.
    pub fn universe(p: usize) -> Self {
        Self {
            f: DMatrix::zeros(0, p),
            g: DVector::zeros(0),
            empty: false,
        }
    }

    /// A certified-empty set in `R^p`.
    pub fn empty(p: usize) -> Self {
        Self {
            f: DMatrix::zeros(0, p),
            g: DVector::zeros(0),
            empty: true,
        }
    }

    /// Axis-aligned box. Infinite bounds produce no row.
    pub fn from_box(lower: &[f64], upper: &[f64]) -> Result<Self> {
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch {
                context: "box bounds",
                expected: lower.len(),
                found: upper.len(),
            });
        }
        let p = lower.len();
        let mut f = Vec::new();
        let mut g = Vec::new();
        for i in 0..p {
            if lower[i].is_nan() || upper[i].is_nan() || lower[i] >= upper[i] {
                return Err(Error::EmptyBox { index: i });
            }
            if upper[i].is_finite() {
                let mut row = vec![0.0; p];
                row[i] = 1.0;
                f.extend(row);
                g.push(upper[i]);
            }
            if lower[i].is_finite() {
                let mut row = vec![0.0; p];
                row[i] = -1.0;
                f.extend(row);
                g.push(-lower[i]);
            }
        }
        Self::new(
            DMatrix::from_row_slice(g.len(), p, &f),
            DVector::from_vec(g),
        )
    }

    pub fn dim(&self) -> usize {
        self.f.ncols()
    }

    pub fn num_rows(&self) -> usize {
        self.f.nrows()
    }

    pub fn f(&self) -> &DMatrix<f64> {
        &self.f
    }

    pub fn g(&self) -> &DVector<f64> {
        &self.g
    }

    /// True when emptiness has been certified (by construction or LP).
    pub fn is_certified_empty(&self) -> bool {
        self.empty
    }

    /// Decides emptiness with an LP.
    pub fn is_empty(&self) -> Result<bool> {
        if self.empty {
            return Ok(true);
        }
        Ok(lp::feasible_point(&self.f, &self.g)?.is_none())
    }

    fn check_dim(&self, p: usize, context: &'static str) -> Result<()> {
        if self.dim() != p {
            return Err(Error::DimensionMismatch {
                context,
                expected: self.dim(),
                found: p,
            });
        }
        Ok(())
    }

    /// Row-stacks two descriptions without removing redundancy.
    pub fn stack(&self, other: &Polyhedron) -> Result<Polyhedron> {
        self.check_dim(other.dim(), "intersected polyhedron")?;
        let p = self.dim();
        let r = self.num_rows() + other.num_rows();
        let mut f = DMatrix::zeros(r, p);
        f.view_mut((0, 0), (self.num_rows(), p)).copy_from(&self.f);
        f.view_mut((self.num_rows(), 0), (other.num_rows(), p))
            .copy_from(&other.f);
        let mut g = DVector::zeros(r);
        g.rows_mut(0, self.num_rows()).copy_from(&self.g);
        g.rows_mut(self.num_rows(), other.num_rows())
            .copy_from(&other.g);
        Ok(Polyhedron {
            f,
            g,
            empty: self.empty || other.empty,
        })
    }

    pub fn intersect(&self, other: &Polyhedron) -> Result<Polyhedron> {
        self.stack(other)?.minimize()
    }

    /// Removes duplicate and redundant rows and certifies emptiness.
    ///
    /// A row counts as redundant when the others imply it up to
    /// `1e-9 max(1, |g_i|)`.
    pub fn minimize(&self) -> Result<Polyhedron> {
        if self.empty {
            return Ok(Polyhedron::empty(self.dim()));
        }
        let deduped = self.dedup();
        if deduped.num_rows() == 0 {
            return Ok(deduped);
        }
        if lp::feasible_point(&deduped.f, &deduped.g)?.is_none() {
            return Ok(Polyhedron::empty(self.dim()));
        }
        let r = deduped.num_rows();
        let mut keep = vec![true; r];
        for i in 0..r {
            keep[i] = false;
            let others: Vec<usize> = (0..r).filter(|&j| keep[j]).collect();
            let (f, g) = deduped.select(&others);
            let row = deduped.f.row(i).transpose();
            let redundant = match lp::support(&f, &g, &row)? {
                Some(value) => value <= deduped.g[i] + redundancy_tol(deduped.g[i]),
                None => true,
            };
            keep[i] = !redundant;
        }
        let kept: Vec<usize> = (0..r).filter(|&j| keep[j]).collect();
        let (f, g) = deduped.select(&kept);
        Ok(Polyhedron { f, g, empty: false })
    }

    fn select(&self, rows: &[usize]) -> (DMatrix<f64>, DVector<f64>) {
        let f = self.f.select_rows(rows.iter());
        let g = DVector::from_iterator(rows.len(), rows.iter().map(|&i| self.g[i]));
        (f, g)
    }

    /// Merges parallel rows, keeping the tightest offset.
    fn dedup(&self) -> Polyhedron {
        let mut kept: Vec<usize> = Vec::new();
        let mut offsets: Vec<f64> = Vec::new();
        'rows: for i in 0..self.num_rows() {
            for (slot, &j) in kept.iter().enumerate() {
                if (self.f.row(i) - self.f.row(j)).amax() < 1e-12 {
                    offsets[slot] = offsets[slot].min(self.g[i]);
                    continue 'rows;
                }
            }
            kept.push(i);
            offsets.push(self.g[i]);
        }
        Polyhedron {
            f: self.f.select_rows(kept.iter()),
            g: DVector::from_vec(offsets),
            empty: self.empty,
        }
    }

    /// `F w <= g + 1e-9`.
    pub fn contains(&self, w: &DVector<f64>) -> bool {
        self.contains_with_tol(w, CONTAINS_TOL)
    }

    pub fn contains_with_tol(&self, w: &DVector<f64>, tol: f64) -> bool {
        if self.empty || w.len() != self.dim() {
            return false;
        }
        let fw = &self.f * w;
        fw.iter().zip(self.g.iter()).all(|(a, b)| *a <= b + tol)
    }

    /// `F w < g - margin` on every row.
    pub fn contains_strictly(&self, w: &DVector<f64>, margin: f64) -> bool {
        self.contains_with_tol(w, -margin) && !self.empty
    }

    /// Largest violation `max_i (F_i w - g_i)`, `-inf` for the universe.
    pub fn max_violation(&self, w: &DVector<f64>) -> f64 {
        let fw = &self.f * w;
        fw.iter()
            .zip(self.g.iter())
            .map(|(a, b)| a - b)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// `inner ⊆ self`, one LP per row of `self`.
    pub fn contains_set(&self, inner: &Polyhedron) -> Result<bool> {
        self.check_dim(inner.dim(), "containment operand")?;
        if inner.is_empty()? {
            return Ok(true);
        }
        if self.empty {
            return Ok(false);
        }
        for i in 0..self.num_rows() {
            let row = self.f.row(i).transpose();
            match lp::support(&inner.f, &inner.g, &row)? {
                Some(v) if v <= self.g[i] + redundancy_tol(self.g[i]) => {}
                Some(_) => return Ok(false),
                None => {}
            }
        }
        Ok(true)
    }

    /// Mutual containment.
    pub fn set_equals(&self, other: &Polyhedron) -> Result<bool> {
        Ok(self.contains_set(other)? && other.contains_set(self)?)
    }

    /// Supremum of `direction . w` over the set; `None` if empty.
    pub fn support(&self, direction: &DVector<f64>) -> Result<Option<f64>> {
        if self.empty {
            return Ok(None);
        }
        lp::support(&self.f, &self.g, direction)
    }

    /// Tight bounding box, or `None` when the set is empty or unbounded.
    pub fn bounding_box(&self) -> Result<Option<(DVector<f64>, DVector<f64>)>> {
        let p = self.dim();
        let mut lower = DVector::zeros(p);
        let mut upper = DVector::zeros(p);
        for i in 0..p {
            let mut e = DVector::zeros(p);
            e[i] = 1.0;
            let (Some(hi), Some(lo)) = (self.support(&e)?, self.support(&-&e)?) else {
                return Ok(None);
            };
            if !hi.is_finite() || !lo.is_finite() {
                return Ok(None);
            }
            upper[i] = hi;
            lower[i] = -lo;
        }
        Ok(Some((lower, upper)))
    }

    /// Per-coordinate bounds when every row is axis-aligned; missing sides
    /// are infinite.
    pub fn box_bounds(&self) -> Result<(DVector<f64>, DVector<f64>)> {
        let p = self.dim();
        let mut lower = DVector::from_element(p, f64::NEG_INFINITY);
        let mut upper = DVector::from_element(p, f64::INFINITY);
        for i in 0..self.num_rows() {
            let row = self.f.row(i);
            let nonzero: Vec<usize> = (0..p).filter(|&j| row[j].abs() > ZERO_ROW_TOL).collect();
            let [j] = nonzero[..] else {
                return Err(Error::NonBoxInputSet);
            };
            let bound = self.g[i] / row[j];
            if row[j] > 0.0 {
                upper[j] = upper[j].min(bound);
            } else {
                lower[j] = lower[j].max(bound);
            }
        }
        Ok((lower, upper))
    }

    /// Center and radius of the largest inscribed ball; `None` if empty.
    /// The radius is capped at `1e6` so unbounded sets still return a point.
    pub fn chebyshev_center(&self) -> Result<Option<(DVector<f64>, f64)>> {
        if self.empty {
            return Ok(None);
        }
        let p = self.dim();
        let r = self.num_rows();
        let mut a = DMatrix::zeros(r + 2, p + 1);
        let mut b = DVector::zeros(r + 2);
        a.view_mut((0, 0), (r, p)).copy_from(&self.f);
        for i in 0..r {
            a[(i, p)] = 1.0;
            b[i] = self.g[i];
        }
        a[(r, p)] = -1.0;
        a[(r + 1, p)] = 1.0;
        b[r + 1] = 1e6;
        let mut c = DVector::zeros(p + 1);
        c[p] = -1.0;
        match lp::solve(&LinearProgram::new(c, a, b))? {
            LpOutcome::Optimal { z, .. } => Ok(Some((z.rows(0, p).into_owned(), z[p]))),
            _ => Ok(None),
        }
    }

    /// `{w : M w ∈ self}` for a `dim x q` matrix `M`.
    pub fn preimage(&self, m: &DMatrix<f64>) -> Result<Polyhedron> {
        if m.nrows() != self.dim() {
            return Err(Error::DimensionMismatch {
                context: "preimage map rows",
                expected: self.dim(),
                found: m.nrows(),
            });
        }
        let mut out = Polyhedron::new(&self.f * m, self.g.clone())?;
        out.empty |= self.empty;
        Ok(out)
    }

    /// `{w : w + d ∈ self}`.
    pub fn translate(&self, d: &DVector<f64>) -> Result<Polyhedron> {
        self.check_dim(d.len(), "translation")?;
        Ok(Polyhedron {
            f: self.f.clone(),
            g: &self.g - &self.f * d,
            empty: self.empty,
        })
    }

    /// `{lambda w : w ∈ self}` for `lambda > 0`.
    pub fn scale(&self, lambda: f64) -> Polyhedron {
        Polyhedron {
            f: self.f.clone(),
            g: &self.g * lambda,
            empty: self.empty,
        }
    }

    /// Fourier-Motzkin projection onto the coordinates in `keep` (in that
    /// order), with redundancy removal after every elimination.
    pub fn project(&self, keep: &[usize]) -> Result<Polyhedron> {
        projection::project(self, keep, DEFAULT_PROJECTION_CAP)
    }

    pub fn project_with_cap(&self, keep: &[usize], cap: usize) -> Result<Polyhedron> {
        projection::project(self, keep, cap)
    }

    /// Plain-text form: a header comment, then one row per line with the
    /// coefficients followed by the offset.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "# dim {} rows {}", self.dim(), self.num_rows());
        if self.empty {
            let _ = writeln!(out, "# empty");
        }
        for i in 0..self.num_rows() {
            let mut line: Vec<String> = self.f.row(i).iter().map(|v| format!("{v:e}")).collect();
            line.push(format!("{:e}", self.g[i]));
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    /// Parses [`Polyhedron::to_text`] output. `dim` is needed when there
    /// are no rows.
    pub fn from_text(text: &str, dim: usize) -> Result<Polyhedron> {
        let mut data = Vec::new();
        let mut rows = 0;
        let mut empty = false;
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                empty |= comment.trim() == "empty";
                continue;
            }
            let values: Vec<f64> = line
                .split_whitespace()
                .map(|t| t.parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            if values.len() != dim + 1 {
                return Err(Error::Parse(format!(
                    "line {}: expected {} numbers, found {}",
                    lineno + 1,
                    dim + 1,
                    values.len()
                )));
            }
            data.extend(values);
            rows += 1;
        }
        let all = DMatrix::from_row_slice(rows, dim + 1, &data);
        let mut out = Polyhedron::new(
            all.columns(0, dim).into_owned(),
            all.column(dim).into_owned(),
        )?;
        out.empty |= empty;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> DVector<f64> {
        DVector::from_column_slice(x)
    }

    fn unit_box(p: usize) -> Polyhedron {
        Polyhedron::from_box(&vec![-1.0; p], &vec![1.0; p]).unwrap()
    }

    #[test]
    fn from_box_examples() {
        let b = Polyhedron::from_box(&[-1.0], &[1.0]).unwrap();
        assert_eq!(b.f(), &DMatrix::from_row_slice(2, 1, &[1.0, -1.0]));
        assert_eq!(b.g(), &v(&[1.0, 1.0]));
        let inputs = Polyhedron::from_box(&[-60.0, 15.0], &[-20.0, 40.0]).unwrap();
        assert_eq!(inputs.num_rows(), 4);
        assert_eq!(
            Polyhedron::from_box(&[0.0, 1.0], &[1.0, 1.0]),
            Err(Error::EmptyBox { index: 1 })
        );
    }

    #[test]
    fn intersect_examples() {
        let b = unit_box(2);
        assert!(b.intersect(&b).unwrap().set_equals(&b).unwrap());
        assert_eq!(b.intersect(&b).unwrap().num_rows(), 4);

        let half = Polyhedron::new(DMatrix::from_row_slice(1, 2, &[1.0, 0.0]), v(&[0.0])).unwrap();
        let cut = b.intersect(&half).unwrap();
        let (lo, hi) = cut.bounding_box().unwrap().unwrap();
        assert!((hi - v(&[0.0, 1.0])).amax() < 1e-12);
        assert!((lo - v(&[-1.0, -1.0])).amax() < 1e-12);

        let far = Polyhedron::from_box(&[2.0, 2.0], &[3.0, 3.0]).unwrap();
        let none = b.intersect(&far).unwrap();
        assert!(none.is_certified_empty());
    }

    #[test]
    fn minimize_examples() {
        let p =
            Polyhedron::new(DMatrix::from_row_slice(2, 1, &[1.0, 1.0]), v(&[1.0, 2.0])).unwrap();
        let m = p.minimize().unwrap();
        assert_eq!(m.num_rows(), 1);
        assert_eq!(m.g()[0], 1.0);
        assert_eq!(unit_box(3).minimize().unwrap().num_rows(), 6);
        // Row scaled by 2 is the same half-space after normalization.
        let q =
            Polyhedron::new(DMatrix::from_row_slice(2, 1, &[2.0, 1.0]), v(&[2.0, 1.0])).unwrap();
        assert_eq!(q.minimize().unwrap().num_rows(), 1);
    }

    #[test]
    fn contains_examples() {
        let b = unit_box(2);
        assert!(b.contains(&v(&[0.0, 0.0])));
        assert!(!b.contains(&v(&[2.0, 0.0])));
        assert!(b.contains(&v(&[1.0, 1.0])));
        assert!(!b.contains_strictly(&v(&[1.0, 0.0]), 1e-9));
    }

    #[test]
    fn box_bounds_and_chebyshev() {
        let b = Polyhedron::from_box(&[-1.0, 0.0], &[3.0, f64::INFINITY]).unwrap();
        let (lo, hi) = b.box_bounds().unwrap();
        assert_eq!(lo, v(&[-1.0, 0.0]));
        assert_eq!(hi, v(&[3.0, f64::INFINITY]));
        assert!(b.bounding_box().unwrap().is_none());

        let (c, r) = unit_box(2).chebyshev_center().unwrap().unwrap();
        assert!(c.amax() < 1e-9);
        assert!((r - 1.0).abs() < 1e-9);
    }

    #[test]
    fn text_round_trip() {
        let p = Polyhedron::new(
            DMatrix::from_row_slice(3, 2, &[1.0, 0.3, -0.2, 1.0, -1.0, -1.0]),
            v(&[1.0, 0.7, 2.0 / 3.0]),
        )
        .unwrap();
        let back = Polyhedron::from_text(&p.to_text(), 2).unwrap();
        assert_eq!(back, p);
        assert!(Polyhedron::from_text("1 2\n", 2).is_err());
        let e = Polyhedron::empty(3);
        assert_eq!(Polyhedron::from_text(&e.to_text(), 3).unwrap(), e);
    }

    #[test]
    fn preimage_and_translate() {
        let b = unit_box(1);
        let pre = b
            .preimage(&DMatrix::from_row_slice(1, 2, &[1.0, 1.0]))
            .unwrap();
        assert!(pre.contains(&v(&[0.5, 0.5])));
        assert!(!pre.contains(&v(&[1.0, 0.5])));
        let t = b.translate(&v(&[1.0])).unwrap();
        assert!(t.contains(&v(&[-2.0])));
        assert!(!t.contains(&v(&[0.5])));
    }

    /// Brute-force oracle: row i is redundant iff dropping it alone leaves
    /// the set unchanged.
    fn redundant_rows_oracle(p: &Polyhedron) -> Vec<bool> {
        (0..p.num_rows())
            .map(|i| {
                let others: Vec<usize> = (0..p.num_rows()).filter(|&j| j != i).collect();
                let (f, g) = p.select(&others);
                match lp::support(&f, &g, &p.f().row(i).transpose()).unwrap() {
                    Some(s) => s <= p.g()[i] + 1e-9,
                    None => true,
                }
            })
            .collect()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn minimize_preserves_membership(
            angles in prop::collection::vec(0.0..std::f64::consts::TAU, 10),
            offsets in prop::collection::vec(0.2..2.0f64, 10),
            points in prop::collection::vec((-3.0..3.0f64, -3.0..3.0f64), 200),
        ) {
            let mut f = Vec::new();
            for a in &angles {
                f.extend([a.cos(), a.sin()]);
            }
            let p = Polyhedron::new(DMatrix::from_row_slice(10, 2, &f), DVector::from_vec(offsets)).unwrap();
            let m = p.minimize().unwrap();
            for (x, y) in points {
                let w = v(&[x, y]);
                // Points right on a face may flip within tolerance; skip them.
                if p.max_violation(&w).abs() < 1e-7 {
                    continue;
                }
                prop_assert_eq!(p.contains(&w), m.contains(&w));
            }
            // Every kept row is irredundant and every dropped row was
            // redundant in the original set (no ties among distinct angles).
            let oracle = redundant_rows_oracle(&p);
            let irredundant = oracle.iter().filter(|r| !**r).count();
            prop_assert_eq!(m.num_rows(), irredundant);
            prop_assert!(redundant_rows_oracle(&m).iter().all(|r| !*r));
        }
    }
}
