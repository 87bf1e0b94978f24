//! Seeded instance generators. All randomness comes from `ChaCha8Rng`
//! seeded with `seed_from_u64`, so output is stable across platforms.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::metric::{build_strict_hst, FiniteMetric, MetricSpace, PlaneMetric};
use crate::model::Instance;
use crate::reductions::PermitInstance;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Demand sequence of length `n` over `points` locations: each location
/// once in order when `n == points`, otherwise uniform with replacement.
fn demand_sequence(r: &mut ChaCha8Rng, points: usize, n: usize) -> Vec<usize> {
    if n == points {
        (0..n).collect()
    } else {
        (0..n).map(|_| r.gen_range(0..points)).collect()
    }
}

/// Strict α-HST with `n` demands at uniformly random leaves.
pub fn hst(alpha: f64, fanouts: &[usize], n: usize, f: f64, seed: u64) -> Result<Instance> {
    let h = build_strict_hst(alpha, fanouts)?;
    let leaves = h.tree().num_leaves();
    let mut r = rng(seed);
    let demands = (0..n).map(|_| r.gen_range(0..leaves)).collect();
    Instance::new(MetricSpace::Hst(h), f, demands)
}

/// `points` uniform points in `[0, side)²` and `n` demands over them.
pub fn plane_uniform(points: usize, n: usize, side: f64, f: f64, seed: u64) -> Result<Instance> {
    if points == 0 {
        return Err(Error::Parameter("need at least one point".into()));
    }
    let mut r = rng(seed);
    let coords = (0..points).map(|_| [r.gen_range(0.0..side), r.gen_range(0.0..side)]).collect();
    let demands = demand_sequence(&mut r, points, n);
    Instance::new(MetricSpace::Plane(PlaneMetric::new(coords)), f, demands)
}

/// Like [`plane_uniform`] on the segment `[0, side)` of the x-axis.
pub fn line_uniform(points: usize, n: usize, side: f64, f: f64, seed: u64) -> Result<Instance> {
    if points == 0 {
        return Err(Error::Parameter("need at least one point".into()));
    }
    let mut r = rng(seed);
    let coords = (0..points).map(|_| [r.gen_range(0.0..side), 0.0]).collect();
    let demands = demand_sequence(&mut r, points, n);
    Instance::new(MetricSpace::Plane(PlaneMetric::new(coords)), f, demands)
}

/// Shortest-path metric of a complete graph with integer weights in
/// `1..=max_w`.
pub fn finite(points: usize, n: usize, max_w: u32, f: f64, seed: u64) -> Result<Instance> {
    if points == 0 || max_w == 0 {
        return Err(Error::Parameter("need at least one point and a positive weight range".into()));
    }
    let mut r = rng(seed);
    let mut d = vec![vec![0.0; points]; points];
    for i in 0..points {
        for j in i + 1..points {
            let w = r.gen_range(1..=max_w) as f64;
            d[i][j] = w;
            d[j][i] = w;
        }
    }
    for k in 0..points {
        for i in 0..points {
            for j in 0..points {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                }
            }
        }
    }
    let demands = demand_sequence(&mut r, points, n);
    Instance::new(MetricSpace::Finite(FiniteMetric::new(d)?), f, demands)
}

/// Normal-form permit instance: `c_t = 3^t`, `d_1 ∈ {1, 2}`, each later
/// duration 2 or 3 times the previous, one or two top windows, and up to
/// `max_driving` distinct driving days in random arrival order.
pub fn permit(k: usize, max_driving: usize, seed: u64) -> Result<PermitInstance> {
    if k == 0 {
        return Err(Error::Parameter("need at least one permit type".into()));
    }
    let mut r = rng(seed);
    let c: Vec<f64> = (0..k).map(|t| 3f64.powi(t as i32)).collect();
    let mut d = vec![r.gen_range(1..=2usize)];
    for t in 1..k {
        let ratio = r.gen_range(2..=3usize);
        d.push(d[t - 1] * ratio);
    }
    let top = r.gen_range(1..=2usize);
    let horizon = d[k - 1] * top;
    let count = r.gen_range(0..=max_driving.min(horizon));
    let mut days: Vec<usize> = (0..horizon).collect();
    days.shuffle(&mut r);
    days.truncate(count);
    let p = PermitInstance { num_types: k, c, d, horizon, driving: days };
    p.check_normal_form()?;
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::validate_metric;

    #[test]
    fn generated_metrics_are_valid() {
        for seed in 0..50 {
            for inst in [
                hst(2.0, &[3, 3], 9, 1.0, seed).unwrap(),
                plane_uniform(8, 8, 10.0, 1.0, seed).unwrap(),
                line_uniform(5, 12, 10.0, 1.0, seed).unwrap(),
                finite(7, 7, 10, 1.0, seed).unwrap(),
            ] {
                assert!(validate_metric(&inst.metric.to_matrix()).unwrap().is_empty());
                assert!(inst.check().is_ok());
            }
        }
    }

    #[test]
    fn hst_demands_at_leaves() {
        let inst = hst(2.0, &[3, 3], 9, 1.0, 7).unwrap();
        assert_eq!(inst.n(), 9);
        assert!(inst.demands.iter().all(|&p| p < 9));
    }

    #[test]
    fn permit_normal_form() {
        for seed in 0..100 {
            let p = permit(3, 14, seed).unwrap();
            assert_eq!(p.c, vec![1.0, 3.0, 9.0]);
            assert!(p.driving.len() <= 14);
            p.check_normal_form().unwrap();
        }
    }

    #[test]
    fn seeds_are_stable() {
        assert_eq!(plane_uniform(6, 6, 1.0, 1.0, 3).unwrap(), plane_uniform(6, 6, 1.0, 1.0, 3).unwrap());
        assert_ne!(plane_uniform(6, 6, 1.0, 1.0, 3).unwrap(), plane_uniform(6, 6, 1.0, 1.0, 4).unwrap());
    }
}
