//! Random points inside bounded polyhedra, for validation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use super::Polyhedron;
use crate::error::{Error, Result};

/// Uniform samples from the bounding box, filtered by membership.
///
/// Gives up after `max_draws` draws and returns what it has.
pub fn rejection<R: Rng + ?Sized>(
    p: &Polyhedron,
    rng: &mut R,
    count: usize,
    max_draws: usize,
) -> Result<Vec<DVector<f64>>> {
    let (lo, hi) = p
        .bounding_box()?
        .ok_or_else(|| Error::InvalidConfig("sampling needs a bounded nonempty set".into()))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..max_draws {
        if out.len() == count {
            break;
        }
        let w = DVector::from_iterator(
            p.dim(),
            (0..p.dim()).map(|i| {
                if hi[i] > lo[i] {
                    rng.random_range(lo[i]..=hi[i])
                } else {
                    lo[i]
                }
            }),
        );
        if p.contains(&w) {
            out.push(w);
        }
    }
    Ok(out)
}

/// Hit-and-run chain started at the Chebyshev center. Every `thin`-th point
/// is kept. The chain mixes toward the uniform distribution on the set.
pub fn hit_and_run<R: Rng + ?Sized>(
    p: &Polyhedron,
    rng: &mut R,
    count: usize,
    thin: usize,
) -> Result<Vec<DVector<f64>>> {
    let (mut w, _) = p
        .chebyshev_center()?
        .ok_or_else(|| Error::InvalidConfig("sampling needs a nonempty set".into()))?;
    let dim = p.dim();
    let f = p.f();
    let g = p.g();
    let mut out = Vec::with_capacity(count);
    let mut step = 0usize;
    while out.len() < count {
        let dir = DVector::from_iterator(dim, (0..dim).map(|_| StandardNormal.sample(rng)));
        let dir: DVector<f64> = dir.normalize();
        let fd = f * &dir;
        let slack = g - f * &w;
        let mut t_max = f64::INFINITY;
        let mut t_min = f64::NEG_INFINITY;
        for i in 0..f.nrows() {
            let s = slack[i].max(0.0);
            if fd[i] > 1e-14 {
                t_max = t_max.min(s / fd[i]);
            } else if fd[i] < -1e-14 {
                t_min = t_min.max(s / fd[i]);
            }
        }
        if !t_max.is_finite() || !t_min.is_finite() {
            return Err(Error::InvalidConfig("sampling needs a bounded set".into()));
        }
        if t_max > t_min {
            let t = rng.random_range(t_min..=t_max);
            w += dir * t;
        }
        step += 1;
        if step % thin.max(1) == 0 {
            out.push(w.clone());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn samples_are_members() {
        let b = Polyhedron::from_box(&[-1.0, 0.0, 2.0], &[1.0, 0.5, 3.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for w in hit_and_run(&b, &mut rng, 500, 3).unwrap() {
            assert!(b.contains(&w));
        }
        let pts = rejection(&b, &mut rng, 100, 1000).unwrap();
        assert_eq!(pts.len(), 100);
        assert!(pts.iter().all(|w| b.contains(w)));
    }

    #[test]
    fn hit_and_run_spreads_over_the_box() {
        let b = Polyhedron::from_box(&[0.0], &[1.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let pts = hit_and_run(&b, &mut rng, 4000, 1).unwrap();
        let mean = pts.iter().map(|w| w[0]).sum::<f64>() / pts.len() as f64;
        assert!((mean - 0.5).abs() < 0.03);
    }
}
