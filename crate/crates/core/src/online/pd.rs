//! Primal-dual online clustering.
//!
//! Each uncovered demand gets dual value `f`; covered demands get `0`. The
//! algorithm then looks for the largest level `k` (radius `r_k = 2^k f`,
//! `r_{-1} = 0`) at which some candidate center `z` has a tight dual
//! constraint containing the new demand, and opens `C(z, 3 r_k)`. Since
//! every dual is `0` or `f`, tightness at `(z, k)` means exactly
//! `1 + 2^k` positive-dual demands within `r_k` of `z` (one for `k = -1`),
//! so all tightness tests are integer comparisons.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::plane::critical_centers;
use crate::metric::MetricSpace;
use crate::model::{Center, Cluster, OpenedAt};
use crate::online::{is_covered, OnlineClusterer};
use crate::approx_le;

/// Where the tightness search looks for centers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CenterPolicy {
    /// every point of the metric
    AllPoints,
    /// demand locations seen so far
    Demands,
    /// plane only: every point of the plane, through the critical centers
    /// of the positive-dual demands
    Continuous,
}

impl CenterPolicy {
    pub fn default_for(metric: &MetricSpace) -> CenterPolicy {
        if metric.is_plane() {
            CenterPolicy::Continuous
        } else {
            CenterPolicy::AllPoints
        }
    }
}

/// Radius of level `k >= -1`.
pub fn level_radius(k: i32, f: f64) -> f64 {
    if k < 0 {
        0.0
    } else {
        f * 2f64.powi(k)
    }
}

/// Dual capacity of level `k` in units of `f`: `(f + r_k)/f`.
pub fn level_capacity(k: i32) -> u64 {
    if k < 0 {
        1
    } else {
        1 + (1u64 << k)
    }
}

/// `⌊log₂ n⌋` for `n >= 1`.
pub fn floor_log2(n: usize) -> i32 {
    debug_assert!(n >= 1);
    (usize::BITS - 1 - n.leading_zeros()) as i32
}

/// The tight constraint behind an opened cluster.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TightCore {
    pub center: Center,
    pub level: i32,
    pub demand: usize,
}

/// Snapshot of the dual solution.
#[derive(Clone, Debug, PartialEq)]
pub struct DualState {
    /// `a_j` for every demand so far
    pub a: Vec<f64>,
    /// every candidate `(z, k)` currently tight
    pub tight: Vec<(Center, i32)>,
}

/// A dual constraint whose left side exceeds `f + r_k`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DualViolation {
    pub center: Center,
    pub level: i32,
    pub load: f64,
    pub capacity: f64,
}

pub struct PdSumRad<'a> {
    metric: &'a MetricSpace,
    f: f64,
    policy: CenterPolicy,
    demands: Vec<usize>,
    positive: Vec<bool>,
    clusters: Vec<Cluster>,
    cores: Vec<TightCore>,
    last_dual: Option<f64>,
}

impl<'a> PdSumRad<'a> {
    pub fn new(metric: &'a MetricSpace, f: f64) -> Self {
        Self::with_policy(metric, f, CenterPolicy::default_for(metric))
    }

    pub fn with_policy(metric: &'a MetricSpace, f: f64, policy: CenterPolicy) -> Self {
        assert!(
            policy != CenterPolicy::Continuous || metric.is_plane(),
            "continuous centers need a plane metric"
        );
        PdSumRad {
            metric,
            f,
            policy,
            demands: Vec::new(),
            positive: Vec::new(),
            clusters: Vec::new(),
            cores: Vec::new(),
            last_dual: None,
        }
    }

    pub fn policy(&self) -> CenterPolicy {
        self.policy
    }

    pub fn duals(&self) -> Vec<f64> {
        self.positive.iter().map(|&p| if p { self.f } else { 0.0 }).collect()
    }

    /// `Σ_j a_j`.
    pub fn dual_sum(&self) -> f64 {
        self.positive.iter().filter(|&&p| p).count() as f64 * self.f
    }

    pub fn cores(&self) -> &[TightCore] {
        &self.cores
    }

    pub fn demands(&self) -> &[usize] {
        &self.demands
    }

    fn positive_points(&self) -> impl Iterator<Item = usize> + '_ {
        self.demands.iter().zip(&self.positive).filter(|(_, &p)| p).map(|(&u, _)| u)
    }

    fn load(&self, z: &Center, r: f64) -> u64 {
        self.positive_points()
            .filter(|&u| approx_le(self.metric.center_dist(z, u), r))
            .count() as u64
    }

    /// Candidate centers for radius `r`, in tie-breaking order.
    fn candidates(&self, r: f64) -> Vec<Center> {
        candidate_centers(self.metric, self.policy, &self.demands, &self.positive, r)
    }

    pub fn dual_state(&self) -> DualState {
        let n = self.demands.len().max(1);
        let mut tight = Vec::new();
        for k in -1..=floor_log2(n) {
            let r = level_radius(k, self.f);
            for z in self.candidates(r) {
                if self.load(&z, r) == level_capacity(k) {
                    tight.push((z, k));
                }
            }
        }
        DualState { a: self.duals(), tight }
    }

    /// Every violated dual constraint over the candidate centers.
    pub fn dual_violations(&self) -> Vec<DualViolation> {
        dual_violations(self.metric, self.f, self.policy, &self.demands, &self.duals())
    }

    /// Positive-dual demands lying in the tight cores of two opened clusters
    /// of the same level, as `(demand, level)`.
    pub fn core_overlaps(&self) -> Vec<(usize, i32)> {
        let mut out = Vec::new();
        for (j, (&u, &pos)) in self.demands.iter().zip(&self.positive).enumerate() {
            if !pos {
                continue;
            }
            let mut levels: Vec<i32> = self
                .cores
                .iter()
                .filter(|c| approx_le(self.metric.center_dist(&c.center, u), level_radius(c.level, self.f)))
                .map(|c| c.level)
                .collect();
            levels.sort_unstable();
            for w in levels.windows(2) {
                if w[0] == w[1] {
                    out.push((j, w[0]));
                }
            }
        }
        out.dedup();
        out
    }
}

pub(crate) fn candidate_centers(
    metric: &MetricSpace,
    policy: CenterPolicy,
    demands: &[usize],
    positive: &[bool],
    r: f64,
) -> Vec<Center> {
    match policy {
        CenterPolicy::AllPoints => (0..metric.len()).map(Center::Point).collect(),
        CenterPolicy::Demands => {
            let mut pts: Vec<usize> = demands.to_vec();
            pts.sort_unstable();
            pts.dedup();
            pts.into_iter().map(Center::Point).collect()
        }
        CenterPolicy::Continuous => {
            let plane = metric.as_plane().expect("continuous policy on a plane");
            let mut pts: Vec<usize> = demands
                .iter()
                .zip(positive)
                .filter(|(_, &p)| p)
                .map(|(&u, _)| u)
                .collect();
            pts.sort_unstable();
            pts.dedup();
            let coords: Vec<[f64; 2]> = pts.iter().map(|&u| plane.coords[u]).collect();
            let mut out: Vec<Center> = pts.into_iter().map(Center::Point).collect();
            out.extend(critical_centers(&coords, r).into_iter().skip(coords.len()).map(Center::Coord));
            out
        }
    }
}

/// Checks `Σ_{j: d(u_j, z) <= r_k} a_j <= f + r_k` for every candidate
/// center and every level `k` in `-1..=⌊log₂ n⌋` (higher levels cannot be
/// violated by `n` demands of value `f`). Duals need not be `0` or `f`.
pub fn dual_violations(
    metric: &MetricSpace,
    f: f64,
    policy: CenterPolicy,
    demands: &[usize],
    duals: &[f64],
) -> Vec<DualViolation> {
    let n = demands.len();
    if n == 0 {
        return Vec::new();
    }
    let positive: Vec<bool> = duals.iter().map(|&a| a > 0.0).collect();
    let total: f64 = duals.iter().sum();
    let top = floor_log2(n).max(((total / f).max(1.0)).log2().ceil() as i32);
    let mut out = Vec::new();
    for k in -1..=top {
        let r = level_radius(k, f);
        let capacity = f + r;
        for z in candidate_centers(metric, policy, demands, &positive, r) {
            let load: f64 = demands
                .iter()
                .zip(duals)
                .filter(|(&u, &a)| a != 0.0 && approx_le(metric.center_dist(&z, u), r))
                .map(|(_, &a)| a)
                .sum();
            if !approx_le(load, capacity) {
                out.push(DualViolation { center: z, level: k, load, capacity });
            }
        }
    }
    out
}

impl OnlineClusterer for PdSumRad<'_> {
    fn name(&self) -> &'static str {
        "pd"
    }

    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>> {
        let j = self.demands.len();
        self.demands.push(point);
        if is_covered(self.metric, &self.clusters, point) {
            self.positive.push(false);
            self.last_dual = Some(0.0);
            return Ok(Vec::new());
        }
        self.positive.push(true);
        self.last_dual = Some(self.f);

        for k in (-1..=floor_log2(j + 1)).rev() {
            let r = level_radius(k, self.f);
            let cap = level_capacity(k);
            let hit = self
                .candidates(r)
                .into_iter()
                .find(|z| approx_le(self.metric.center_dist(z, point), r) && self.load(z, r) == cap);
            if let Some(z) = hit {
                let c = Cluster::new(z, 3.0 * r, OpenedAt::Demand(j));
                self.cores.push(TightCore { center: z, level: k, demand: j });
                self.clusters.push(c);
                return Ok(vec![c]);
            }
        }
        Err(Error::Invariant(format!("pd: no tight constraint for uncovered demand {j}")))
    }

    fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    fn opening_cost(&self) -> f64 {
        self.f
    }

    fn last_dual(&self) -> Option<f64> {
        self.last_dual
    }
}
