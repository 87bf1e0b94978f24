//! Randomized memoryless clustering.
//!
//! An uncovered demand `u` opens `C(u, 2^k f)` independently with
//! probability `2^-k` for every `k = 0..=1 + ⌈log₂ n⌉`. The radius-`f`
//! cluster always opens and covers `u`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::metric::MetricSpace;
use crate::model::{Cluster, OpenedAt, Center};
use crate::online::{is_covered, OnlineClusterer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HorizonMode {
    /// the number of demands is known in advance
    Known(usize),
    /// estimate `n̂ = 2, 4, 8, …`, doubled whenever exceeded
    Doubling,
}

/// `⌈log₂ n⌉` for `n >= 1`.
pub fn ceil_log2(n: usize) -> u32 {
    if n <= 1 {
        0
    } else {
        usize::BITS - (n - 1).leading_zeros()
    }
}

/// Largest menu index `1 + ⌈log₂ n⌉`.
pub fn top_level(n: usize) -> u32 {
    1 + ceil_log2(n.max(1))
}

/// Expected opening cost of one uncovered arrival:
/// `Σ_{k=0}^{top} 2^-k (2^k + 1) f`.
pub fn expected_cost_per_uncovered(n: usize, f: f64) -> f64 {
    (0..=top_level(n)).map(|k| (1.0 + 0.5f64.powi(k as i32)) * f).sum()
}

pub struct SimpleSumRad<'a> {
    metric: &'a MetricSpace,
    f: f64,
    mode: HorizonMode,
    estimate: usize,
    seen: usize,
    rng: ChaCha8Rng,
    clusters: Vec<Cluster>,
}

impl<'a> SimpleSumRad<'a> {
    pub fn new(metric: &'a MetricSpace, f: f64, mode: HorizonMode, seed: u64) -> Self {
        let estimate = match mode {
            HorizonMode::Known(n) => n.max(1),
            HorizonMode::Doubling => 2,
        };
        SimpleSumRad {
            metric,
            f,
            mode,
            estimate,
            seen: 0,
            rng: ChaCha8Rng::seed_from_u64(seed),
            clusters: Vec::new(),
        }
    }

    /// Current value of `n` used for the radius menu.
    pub fn horizon(&self) -> usize {
        self.estimate
    }
}

impl OnlineClusterer for SimpleSumRad<'_> {
    fn name(&self) -> &'static str {
        "simple"
    }

    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>> {
        let j = self.seen;
        self.seen += 1;
        if self.mode == HorizonMode::Doubling {
            while self.seen > self.estimate {
                self.estimate *= 2;
            }
        }
        if is_covered(self.metric, &self.clusters, point) {
            return Ok(Vec::new());
        }
        let mut opened = Vec::new();
        for k in 0..=top_level(self.estimate) {
            if k == 0 || self.rng.gen_bool(0.5f64.powi(k as i32)) {
                let c = Cluster::new(Center::Point(point), self.f * 2f64.powi(k as i32), OpenedAt::Demand(j));
                opened.push(c);
            }
        }
        self.clusters.extend_from_slice(&opened);
        Ok(opened)
    }

    fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    fn opening_cost(&self) -> f64 {
        self.f
    }

    fn is_deterministic(&self) -> bool {
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PlaneMetric;

    fn far_apart(n: usize) -> MetricSpace {
        MetricSpace::Plane(PlaneMetric::new((0..n).map(|i| [1e6 * i as f64, 0.0]).collect()))
    }

    #[test]
    fn menu_size() {
        assert_eq!(top_level(1), 1);
        assert_eq!(top_level(2), 2);
        assert_eq!(top_level(4), 3);
        assert_eq!(top_level(5), 4);
        assert_eq!(top_level(16), 5);
    }

    #[test]
    fn radius_f_always_opens() {
        let m = far_apart(50);
        let mut alg = SimpleSumRad::new(&m, 1.0, HorizonMode::Known(50), 3);
        for p in 0..50 {
            let c = alg.on_demand(p).unwrap();
            assert_eq!(c[0].radius, 1.0);
            assert_eq!(c[0].center, Center::Point(p));
            assert!(c.iter().all(|c| c.radius <= 2f64.powi(top_level(50) as i32)));
        }
    }

    #[test]
    fn radius_4f_frequency_for_n2() {
        let m = far_apart(1);
        let trials = 10_000;
        let mut hits = 0;
        for s in 0..trials {
            let mut alg = SimpleSumRad::new(&m, 1.0, HorizonMode::Known(2), s);
            let c = alg.on_demand(0).unwrap();
            assert!(c.iter().all(|c| [1.0, 2.0, 4.0].contains(&c.radius)));
            hits += c.iter().filter(|c| c.radius == 4.0).count();
        }
        let freq = hits as f64 / trials as f64;
        assert!((freq - 0.25).abs() <= 0.02, "{freq}");
    }

    #[test]
    fn same_seed_same_clusters() {
        let m = far_apart(10);
        let run = |seed| {
            let mut alg = SimpleSumRad::new(&m, 1.0, HorizonMode::Doubling, seed);
            for p in 0..10 {
                alg.on_demand(p).unwrap();
            }
            alg.clusters().to_vec()
        };
        assert_eq!(run(9), run(9));
    }

    #[test]
    fn doubling_estimate() {
        let m = far_apart(9);
        let mut alg = SimpleSumRad::new(&m, 1.0, HorizonMode::Doubling, 0);
        let mut seen = Vec::new();
        for p in 0..9 {
            alg.on_demand(p).unwrap();
            seen.push(alg.horizon());
        }
        assert_eq!(seen, vec![2, 2, 4, 4, 8, 8, 8, 8, 16]);
    }

    #[test]
    fn expected_cost_formula() {
        // n = 2: (1+1) + (1+1/2) + (1+1/4)
        assert!((expected_cost_per_uncovered(2, 1.0) - 4.75).abs() < 1e-12);
        for n in [2usize, 4, 8, 16, 1024] {
            assert!(expected_cost_per_uncovered(n, 1.0) <= 4.0 + (n as f64).log2());
        }
    }
}
