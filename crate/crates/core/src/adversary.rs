//! Lower-bound adversary for deterministic algorithms on ternary strict
//! α-HSTs and on their planar embedding.
//!
//! Each demand goes to the leftmost leaf not yet covered by the algorithm.
//! When everything is covered early, the last location is repeated until
//! `3^K` demands have arrived, which leaves the optimum unchanged.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::{build_strict_hst, embed_ternary_hst, LevelTree, MetricSpace, PlaneMetric, TreeNode};
use crate::metric::embed::distortion_closed_form;
use crate::model::{covers, Cluster, Instance};
use crate::offline::{max_exact_n, optimum};
use crate::online::{AlgorithmKind, OnlineClusterer};

/// Builds a fresh algorithm for the adversary's metric (`f = 1`).
pub trait ClustererFactory {
    fn make<'m>(&self, metric: &'m MetricSpace) -> Box<dyn OnlineClusterer + 'm>;
}

impl ClustererFactory for AlgorithmKind {
    fn make<'m>(&self, metric: &'m MetricSpace) -> Box<dyn OnlineClusterer + 'm> {
        self.build(metric, 1.0, Some(metric.len()), 0)
    }
}

impl<F> ClustererFactory for F
where
    F: for<'m> Fn(&'m MetricSpace) -> Box<dyn OnlineClusterer + 'm>,
{
    fn make<'m>(&self, metric: &'m MetricSpace) -> Box<dyn OnlineClusterer + 'm> {
        self(metric)
    }
}

/// How the optimum in a transcript was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptKind {
    Exact,
    Structural,
}

/// Which optimum to use.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AdversaryOpt {
    /// exact when the distinct demand count fits the DP, else structural
    Auto,
    Exact,
    Structural,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryStep {
    pub point: usize,
    /// repeated location after every leaf was covered
    pub padding: bool,
    pub uncovered: bool,
    pub opened: Vec<Cluster>,
    pub open_clusters: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub measured_ratio: f64,
    pub floor: f64,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryTranscript {
    pub setting: String,
    pub algorithm: String,
    pub alpha: f64,
    #[serde(rename = "K")]
    pub k: usize,
    pub n: usize,
    pub instance: Instance,
    pub steps: Vec<AdversaryStep>,
    pub alg_cost: f64,
    pub opt_cost: f64,
    pub opt_kind: OptKind,
    /// `min_k c_k · (active level-k subtrees)`
    pub structural_bound: f64,
    /// distortion of the embedding, plane setting only
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub distortion: Option<f64>,
    pub certificate: Certificate,
}

impl AdversaryTranscript {
    pub fn demands(&self) -> Vec<usize> {
        self.steps.iter().map(|s| s.point).collect()
    }
}

/// `(K+1) / (α + α/(3−α))`.
pub fn ratio_floor(alpha: f64, k: usize) -> f64 {
    (k as f64 + 1.0) / (alpha + alpha / (3.0 - alpha))
}

pub fn lb_certificate(t: &AdversaryTranscript) -> Certificate {
    certificate(t.alpha, t.k, t.alg_cost, t.opt_cost)
}

fn certificate(alpha: f64, k: usize, alg: f64, opt: f64) -> Certificate {
    let measured_ratio = alg / opt;
    let floor = ratio_floor(alpha, k);
    Certificate { measured_ratio, floor, holds: measured_ratio >= floor }
}

/// Upper bound on the optimum for demands at leaves of `tree` (`f = 1`):
/// opening `C(v, depth(level))` at every active level-`k` node is feasible.
pub fn structural_opt_bound(tree: &LevelTree, leaves: &[usize]) -> f64 {
    (0..=tree.height())
        .map(|k| {
            let mut active: Vec<usize> = leaves
                .iter()
                .map(|&l| tree.ancestor(TreeNode { level: 0, index: l }, k).index)
                .collect();
            active.sort_unstable();
            active.dedup();
            (1.0 + tree.depth(k)) * active.len() as f64
        })
        .fold(f64::INFINITY, f64::min)
}

fn battle<'a>(
    metric: &'a MetricSpace,
    leaves: usize,
    alg: &mut (dyn OnlineClusterer + 'a),
) -> Result<Vec<AdversaryStep>> {
    if !alg.is_deterministic() {
        return Err(Error::Parameter(format!("{} is randomized; the adversary needs a deterministic algorithm", alg.name())));
    }
    let mut steps = Vec::with_capacity(leaves);
    let mut next = 0usize;
    let mut last = 0usize;
    for _ in 0..leaves {
        while next < leaves && alg.clusters().iter().any(|c| covers(metric, c, next)) {
            next += 1;
        }
        let padding = next == leaves;
        let point = if padding { last } else { next };
        let uncovered = !alg.clusters().iter().any(|c| covers(metric, c, point));
        let opened = alg.on_demand(point)?;
        last = point;
        steps.push(AdversaryStep { point, padding, uncovered, opened, open_clusters: alg.clusters().len() });
    }
    Ok(steps)
}

fn settle_opt(inst: &Instance, structural: f64, mode: AdversaryOpt) -> Result<(f64, OptKind)> {
    let distinct = inst.distinct_demands().len();
    let exact = match mode {
        AdversaryOpt::Exact => true,
        AdversaryOpt::Structural => false,
        AdversaryOpt::Auto => distinct <= max_exact_n(),
    };
    if exact {
        Ok((optimum(inst)?.cost, OptKind::Exact))
    } else {
        Ok((structural, OptKind::Structural))
    }
}

/// Plays the adversary against `make(metric)` on the ternary strict α-HST
/// of height `k` (`3^k` leaves, `f = 1`).
pub fn run_hst_adversary(factory: &dyn ClustererFactory, alpha: f64, k: usize, mode: AdversaryOpt) -> Result<AdversaryTranscript> {
    if !(2.0..3.0).contains(&alpha) {
        return Err(Error::Parameter(format!("alpha must lie in [2, 3), got {alpha}")));
    }
    if k == 0 {
        return Err(Error::Parameter("the tree needs at least one level".into()));
    }
    let hst = build_strict_hst(alpha, &vec![3; k])?;
    let tree = hst.tree().clone();
    let leaves = tree.num_leaves();
    let metric = MetricSpace::Hst(hst);
    let (steps, name, alg_cost) = {
        let mut alg = factory.make(&metric);
        let steps = battle(&metric, leaves, alg.as_mut())?;
        (steps, alg.name().to_string(), alg.cost())
    };
    let demands: Vec<usize> = steps.iter().map(|s| s.point).collect();
    let structural_bound = structural_opt_bound(&tree, &demands);
    let instance = Instance::new(metric, 1.0, demands)?;
    let (opt_cost, opt_kind) = settle_opt(&instance, structural_bound, mode)?;
    Ok(AdversaryTranscript {
        setting: "hst".into(),
        algorithm: name,
        alpha,
        k,
        n: leaves,
        instance,
        steps,
        alg_cost,
        opt_cost,
        opt_kind,
        structural_bound,
        distortion: None,
        certificate: certificate(alpha, k, alg_cost, opt_cost),
    })
}

/// The same adversary on the planar images of the `3^k` leaves of the
/// embedded ternary HST of height `k`.
pub fn run_plane_adversary(factory: &dyn ClustererFactory, alpha: f64, k: usize, mode: AdversaryOpt) -> Result<AdversaryTranscript> {
    if k == 0 {
        return Err(Error::Parameter("the tree needs at least one level".into()));
    }
    let (hst, emb) = embed_ternary_hst(alpha, k - 1)?;
    let tree = hst.tree().clone();
    let leaves = tree.num_leaves();
    let metric = MetricSpace::Plane(PlaneMetric::new(emb.coords[..leaves].to_vec()));
    let (steps, name, alg_cost) = {
        let mut alg = factory.make(&metric);
        let steps = battle(&metric, leaves, alg.as_mut())?;
        (steps, alg.name().to_string(), alg.cost())
    };
    let demands: Vec<usize> = steps.iter().map(|s| s.point).collect();
    let structural_bound = structural_opt_bound(&tree, &demands);
    let instance = Instance::new(metric, 1.0, demands)?;
    let (opt_cost, opt_kind) = settle_opt(&instance, structural_bound, mode)?;
    Ok(AdversaryTranscript {
        setting: "plane".into(),
        algorithm: name,
        alpha,
        k,
        n: leaves,
        instance,
        steps,
        alg_cost,
        opt_cost,
        opt_kind,
        structural_bound,
        distortion: Some(distortion_closed_form(alpha, k - 1)),
        certificate: certificate(alpha, k, alg_cost, opt_cost),
    })
}

/// Floor transferred to the plane: `floor / (2 D)`.
pub fn plane_floor(alpha: f64, k: usize) -> f64 {
    ratio_floor(alpha, k) / (2.0 * distortion_closed_form(alpha, k.saturating_sub(1)))
}
