//! Instances, clusters and solutions.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{validate_metric, MetricSpace};
use crate::{approx_le, EPS};

/// Where a cluster is centered: a point of the metric, or (plane only) an
/// arbitrary coordinate.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Center {
    Point(usize),
    Coord([f64; 2]),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum OfflineTag {
    #[serde(rename = "offline")]
    Offline,
}

/// Demand index that caused a cluster to open, or `"offline"`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OpenedAt {
    Demand(usize),
    Offline(OfflineTag),
}

impl OpenedAt {
    pub const OFFLINE: OpenedAt = OpenedAt::Offline(OfflineTag::Offline);
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cluster {
    pub center: Center,
    pub radius: f64,
    pub opened_at: OpenedAt,
}

impl Cluster {
    pub fn new(center: Center, radius: f64, opened_at: OpenedAt) -> Self {
        Cluster { center, radius, opened_at }
    }

    pub fn at(point: usize, radius: f64, demand: usize) -> Self {
        Cluster::new(Center::Point(point), radius, OpenedAt::Demand(demand))
    }

    pub fn cost(&self, f: f64) -> f64 {
        f + self.radius
    }
}

/// `d(center, p) <= radius`, boundary inclusive.
pub fn covers(metric: &MetricSpace, c: &Cluster, p: usize) -> bool {
    approx_le(metric.center_dist(&c.center, p), c.radius)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Instance {
    pub metric: MetricSpace,
    pub f: f64,
    pub demands: Vec<usize>,
}

impl Instance {
    pub fn new(metric: MetricSpace, f: f64, demands: Vec<usize>) -> Result<Self> {
        let inst = Instance { metric, f, demands };
        inst.check()?;
        Ok(inst)
    }

    /// Checks `f > 0` and that every demand names a point.
    pub fn check(&self) -> Result<()> {
        if !(self.f > 0.0) || !self.f.is_finite() {
            return Err(Error::Parameter(format!("opening cost must be > 0, got {}", self.f)));
        }
        let n = self.metric.len();
        if let Some(&bad) = self.demands.iter().find(|&&p| p >= n) {
            return Err(Error::Structural(format!("demand at point {bad}, metric has {n} points")));
        }
        Ok(())
    }

    /// `check` plus a full metric validation.
    pub fn validate(&self) -> Result<()> {
        self.check()?;
        let v = validate_metric(&self.metric.to_matrix())?;
        if !v.is_empty() {
            return Err(Error::Structural(format!("metric has {} violations", v.len())));
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.demands.len()
    }

    /// Demand points with duplicates removed, in first-arrival order.
    pub fn distinct_demands(&self) -> Vec<usize> {
        let mut seen = vec![false; self.metric.len()];
        self.demands
            .iter()
            .copied()
            .filter(|&p| !std::mem::replace(&mut seen[p], true))
            .collect()
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Solution {
    pub clusters: Vec<Cluster>,
    /// demand index -> cluster index
    pub assignment: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct SolutionJson {
    clusters: Vec<Cluster>,
    #[serde(default)]
    assignment: Vec<usize>,
    cost: f64,
}

impl Solution {
    pub fn cost(&self, f: f64) -> f64 {
        solution_cost(self, f)
    }

    /// Every demand is covered by the cluster it is assigned to.
    pub fn check_feasible(&self, inst: &Instance) -> Result<()> {
        if self.assignment.len() != inst.n() {
            return Err(Error::Mismatch(format!(
                "{} assignments for {} demands",
                self.assignment.len(),
                inst.n()
            )));
        }
        for (j, (&p, &c)) in inst.demands.iter().zip(&self.assignment).enumerate() {
            let cl = self
                .clusters
                .get(c)
                .ok_or_else(|| Error::Structural(format!("demand {j} assigned to missing cluster {c}")))?;
            if cl.radius < 0.0 || !inst.metric.contains_center(&cl.center) {
                return Err(Error::Structural(format!("cluster {c} is malformed")));
            }
            if !covers(&inst.metric, cl, p) {
                return Err(Error::Invariant(format!("demand {j} not covered by its cluster {c}")));
            }
        }
        Ok(())
    }

    /// Assigns each demand to the first cluster covering it.
    pub fn assign(inst: &Instance, clusters: Vec<Cluster>) -> Result<Solution> {
        let assignment = inst
            .demands
            .iter()
            .enumerate()
            .map(|(j, &p)| {
                clusters
                    .iter()
                    .position(|c| covers(&inst.metric, c, p))
                    .ok_or_else(|| Error::Invariant(format!("demand {j} is not covered")))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Solution { clusters, assignment })
    }

    pub fn to_json(&self, f: f64) -> serde_json::Value {
        serde_json::to_value(SolutionJson {
            clusters: self.clusters.clone(),
            assignment: self.assignment.clone(),
            cost: self.cost(f),
        })
        .expect("solution serializes")
    }

    pub fn from_json(v: serde_json::Value) -> serde_json::Result<Solution> {
        let s: SolutionJson = serde_json::from_value(v)?;
        Ok(Solution { clusters: s.clusters, assignment: s.assignment })
    }
}

/// Total cost `Σ (f + r)`.
pub fn solution_cost(s: &Solution, f: f64) -> f64 {
    s.clusters.iter().map(|c| c.cost(f)).sum()
}

/// Smallest `k >= 0` with `2^k f >= r`.
pub fn pow2_level(r: f64, f: f64) -> u32 {
    let target = r - EPS * r.max(1.0);
    let mut k = 0u32;
    while f * 2f64.powi(k as i32) < target {
        k += 1;
    }
    k
}

/// Replaces every `C(v, r)` by `C(v, 2^k f)` with `k = max(⌈log₂(r/f)⌉, 0)`.
pub fn round_radii_pow2(s: &Solution, f: f64) -> Solution {
    let clusters = s
        .clusters
        .iter()
        .map(|c| Cluster { radius: f * 2f64.powi(pow2_level(c.radius, f) as i32), ..*c })
        .collect();
    Solution { clusters, assignment: s.assignment.clone() }
}
