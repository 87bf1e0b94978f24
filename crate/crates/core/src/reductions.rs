//! Interval parking permit and its correspondence with clustering on trees.
//!
//! A type-`t` permit window (0-based types) maps to a level-`t+1` tree node
//! whose subtree leaves are the window's days. Edge lengths are chosen so
//! that the cluster at that node reaching its leaves costs exactly `c_t`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{LevelTree, MetricSpace, TreeNode};
use crate::model::{Center, Cluster, Instance, OpenedAt, Solution};
use crate::approx_le;

/// Interval parking-permit instance. Type `t` has cost `c[t]` and
/// duration `d[t]`; its windows tile the horizon as `[w·d[t], (w+1)·d[t])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PermitInstance {
    #[serde(rename = "K")]
    pub num_types: usize,
    pub c: Vec<f64>,
    pub d: Vec<usize>,
    pub horizon: usize,
    /// driving days in arrival order (not necessarily chronological)
    pub driving: Vec<usize>,
}

/// One purchased permit: a type and the index of its window.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Permit {
    pub ptype: usize,
    pub window: usize,
}

impl PermitInstance {
    pub fn num_types(&self) -> usize {
        self.num_types
    }

    pub fn windows(&self, t: usize) -> usize {
        self.horizon / self.d[t]
    }

    /// Checks the nested-window structure.
    pub fn check_laminar(&self) -> Result<()> {
        let k = self.num_types;
        if k == 0 || self.c.len() != k || self.d.len() != k {
            return Err(Error::Structural(format!(
                "K = {k} with {} costs and {} durations",
                self.c.len(),
                self.d.len()
            )));
        }
        if self.d[0] == 0 {
            return Err(Error::Structural("durations must be positive".into()));
        }
        for t in 1..k {
            if self.d[t] < self.d[t - 1] || self.d[t] % self.d[t - 1] != 0 {
                return Err(Error::Structural(format!("d[{}] = {} does not nest d[{}] = {}", t, self.d[t], t - 1, self.d[t - 1])));
            }
        }
        if self.horizon == 0 || self.horizon % self.d[k - 1] != 0 {
            return Err(Error::Structural(format!(
                "horizon {} is not a multiple of the top duration {}",
                self.horizon,
                self.d[k - 1]
            )));
        }
        if let Some(&day) = self.driving.iter().find(|&&x| x >= self.horizon) {
            return Err(Error::Structural(format!("driving day {day} beyond horizon {}", self.horizon)));
        }
        if self.c.iter().any(|&c| !(c > 0.0) || !c.is_finite()) {
            return Err(Error::Structural("permit costs must be positive".into()));
        }
        Ok(())
    }

    /// `c_1 = 1` and `c_k >= 3 c_{k-1}`, on top of [`check_laminar`](Self::check_laminar).
    pub fn check_normal_form(&self) -> Result<()> {
        self.check_laminar()?;
        if self.c[0] != 1.0 {
            return Err(Error::NormalForm(format!("c_1 = {} != 1", self.c[0])));
        }
        for t in 1..self.num_types {
            if self.c[t] < 3.0 * self.c[t - 1] {
                return Err(Error::NormalForm(format!(
                    "c_{} = {} < 3 c_{} = {}",
                    t + 1,
                    self.c[t],
                    t,
                    3.0 * self.c[t - 1]
                )));
            }
        }
        Ok(())
    }

    pub fn covers(&self, p: &Permit, day: usize) -> bool {
        day / self.d[p.ptype] == p.window
    }

    pub fn check_purchases(&self, purchases: &[Permit]) -> Result<()> {
        for p in purchases {
            if p.ptype >= self.num_types || p.window >= self.windows(p.ptype) {
                return Err(Error::Mismatch(format!("permit {p:?} does not exist")));
            }
        }
        Ok(())
    }

    pub fn is_feasible(&self, purchases: &[Permit]) -> bool {
        self.driving.iter().all(|&day| purchases.iter().any(|p| self.covers(p, day)))
    }

    pub fn purchase_cost(&self, purchases: &[Permit]) -> f64 {
        purchases.iter().map(|p| self.c[p.ptype]).sum()
    }
}

/// The clustering instance built from a permit instance, with the data
/// needed to map solutions back and forth.
#[derive(Clone, Debug)]
pub struct PermitReduction {
    pub permit: PermitInstance,
    pub instance: Instance,
    /// set when several top-level windows hang under an extra root
    pub super_root: bool,
}

/// Builds the tree instance: one leaf per day, one level-`t+1` node per
/// type-`t` window, edge `c_1 − 1 = 0` at level 1 and `c_t − c_{t−1}`
/// above, `f = 1`, one demand per driving day in arrival order.
///
/// When the horizon holds `m > 1` top windows they are joined under an
/// extra root at edge length `m·c_K`, far enough that no cross-window
/// cluster is ever worth buying.
pub fn permit_to_cluster(p: &PermitInstance) -> Result<PermitReduction> {
    p.check_normal_form()?;
    let k = p.num_types;
    let mut fanouts = vec![p.d[0]];
    let mut edges = vec![p.c[0] - 1.0];
    for t in 1..k {
        fanouts.push(p.d[t] / p.d[t - 1]);
        edges.push(p.c[t] - p.c[t - 1]);
    }
    let top = p.windows(k - 1);
    let super_root = top > 1;
    if super_root {
        fanouts.push(top);
        edges.push(top as f64 * p.c[k - 1]);
    }
    let tree = LevelTree::new(fanouts, edges)?;
    let instance = Instance::new(MetricSpace::Tree(tree), 1.0, p.driving.clone())?;
    Ok(PermitReduction { permit: p.clone(), instance, super_root })
}

/// Canonical form of a cluster on a reduction tree.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Canonical {
    /// covers no leaf
    Drop,
    /// `C(v, depth(v))` at a node of level >= 1, i.e. one permit
    Node(TreeNode),
    /// the extra root, covering every leaf
    Root,
}

impl PermitReduction {
    pub fn tree(&self) -> &LevelTree {
        self.instance.metric.as_tree().expect("reduction metric is a tree")
    }

    pub fn canonical_cluster(&self, c: Canonical) -> Option<Cluster> {
        let t = self.tree();
        let node = match c {
            Canonical::Drop => return None,
            Canonical::Node(v) => v,
            Canonical::Root => t.root(),
        };
        Some(Cluster::new(Center::Point(t.id(node)), t.depth(node.level), OpenedAt::OFFLINE))
    }

    fn permit_node(&self, p: &Permit) -> TreeNode {
        TreeNode { level: p.ptype + 1, index: p.window }
    }

    /// See [`canonicalize_cluster`].
    pub fn canonicalize(&self, c: &Cluster) -> Result<Canonical> {
        canonicalize_cluster(self, c)
    }

    /// Maps a feasible cluster solution to permits of no greater total cost.
    pub fn cluster_sol_to_permit_sol(&self, s: &Solution) -> Result<Vec<Permit>> {
        if s.assignment.len() != self.instance.n() && !s.assignment.is_empty() {
            return Err(Error::Mismatch(format!(
                "solution assigns {} demands, instance has {}",
                s.assignment.len(),
                self.instance.n()
            )));
        }
        let mut out = BTreeSet::new();
        for c in &s.clusters {
            match self.canonicalize(c)? {
                Canonical::Drop => {}
                Canonical::Node(v) => {
                    out.insert(Permit { ptype: v.level - 1, window: v.index });
                }
                Canonical::Root => {
                    let top = self.permit.num_types - 1;
                    out.extend((0..self.permit.windows(top)).map(|w| Permit { ptype: top, window: w }));
                }
            }
        }
        Ok(out.into_iter().collect())
    }

    /// Opens `C(v_t, c_t − 1)` for every purchased permit.
    pub fn permit_sol_to_cluster_sol(&self, purchases: &[Permit]) -> Result<Solution> {
        self.permit.check_purchases(purchases)?;
        let t = self.tree();
        let clusters = purchases
            .iter()
            .map(|p| {
                let v = self.permit_node(p);
                Cluster::new(Center::Point(t.id(v)), t.depth(v.level), OpenedAt::OFFLINE)
            })
            .collect();
        Solution::assign(&self.instance, clusters)
    }
}

/// Re-roots `c` at the highest ancestor level `m` of its center `v` with
/// `2·depth(m) − depth(v) <= r` and shrinks the radius to `depth(m)`. Leaf
/// coverage is unchanged and the cost does not increase. A radius below
/// `depth(v)` reaches no leaf and the cluster is dropped.
pub fn canonicalize_cluster(red: &PermitReduction, c: &Cluster) -> Result<Canonical> {
    let t = red.tree();
    let id = match c.center {
        Center::Point(z) if z < t.num_nodes() => z,
        other => return Err(Error::Mismatch(format!("center {other:?} is not a node of the reduction tree"))),
    };
    let v = t.node(id);
    let r = c.radius;
    if !approx_le(t.depth(v.level), r) {
        return Ok(Canonical::Drop);
    }
    let mut m = v.level;
    while m < t.height() && approx_le(2.0 * t.depth(m + 1) - t.depth(v.level), r) {
        m += 1;
    }
    // leaves hang at distance 0 below level-1 nodes, so m >= 1 here
    let m = m.max(1);
    if red.super_root && m == t.height() {
        return Ok(Canonical::Root);
    }
    Ok(Canonical::Node(t.ancestor(v, m)))
}

/// Reverse construction: the permit instance of a strict
/// α-HST with leaf demands and `f = 1`. Type `t` (for level `t`) costs
/// `(α^t + α − 2)/(α − 1)` and lasts `∏_{j<=t} n_j` days.
pub fn hst_to_permit(inst: &Instance) -> Result<PermitInstance> {
    let hst = match &inst.metric {
        MetricSpace::Hst(h) => h,
        other => return Err(Error::Parameter(format!("expected a strict HST, got a {} metric", other.kind()))),
    };
    if inst.f != 1.0 {
        return Err(Error::Parameter(format!("opening cost must be 1, got {}", inst.f)));
    }
    let tree = hst.tree();
    if let Some(&p) = inst.demands.iter().find(|&&p| p >= tree.num_leaves()) {
        return Err(Error::Parameter(format!("demand at non-leaf node {p}")));
    }
    let alpha = hst.alpha();
    let k = hst.levels();
    let c = (0..=k)
        .map(|t| (alpha.powi(t as i32) + alpha - 2.0) / (alpha - 1.0))
        .collect();
    let mut d = vec![1usize];
    for t in 0..k {
        d.push(d[t] * tree.fanouts()[t]);
    }
    Ok(PermitInstance {
        num_types: k + 1,
        c,
        d,
        horizon: tree.num_leaves(),
        driving: inst.demands.clone(),
    })
}
