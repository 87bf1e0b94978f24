//! Online clusterers and the run transcript.

pub mod adapters;
pub mod naive;
pub mod pd;
pub mod simple;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::model::{covers, Cluster, Instance};

pub use adapters::{FixedRadiusAdapter, FlexibleAdapter, GreedyFlexible, NearestFixedRadius};
pub use naive::NaiveBaseline;
pub use pd::{CenterPolicy as PdCenters, PdSumRad};
pub use simple::{SimpleSumRad, HorizonMode};

/// An algorithm for the fixed-cluster model: clusters are opened with
/// irrevocable center and radius, and every demand must be covered when
/// `on_demand` returns.
pub trait OnlineClusterer {
    fn name(&self) -> &'static str;

    /// Handles the next demand and returns the clusters it opened.
    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>>;

    /// All clusters opened so far, in opening order.
    fn clusters(&self) -> &[Cluster];

    fn opening_cost(&self) -> f64;

    fn cost(&self) -> f64 {
        let f = self.opening_cost();
        self.clusters().iter().map(|c| c.cost(f)).sum()
    }

    fn is_deterministic(&self) -> bool {
        true
    }

    /// Dual value set for the last demand, for primal-dual algorithms.
    fn last_dual(&self) -> Option<f64> {
        None
    }
}

pub(crate) fn is_covered(metric: &MetricSpace, clusters: &[Cluster], p: usize) -> bool {
    clusters.iter().any(|c| covers(metric, c, p))
}

/// Algorithms selectable by name.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AlgorithmKind {
    Pd,
    Simple,
    Naive,
    FixedRadiusAdapter,
    FlexibleAdapter,
}

impl AlgorithmKind {
    pub const DETERMINISTIC: [AlgorithmKind; 4] = [
        AlgorithmKind::Pd,
        AlgorithmKind::Naive,
        AlgorithmKind::FixedRadiusAdapter,
        AlgorithmKind::FlexibleAdapter,
    ];

    pub fn parse(s: &str) -> Option<AlgorithmKind> {
        Some(match s {
            "pd" => AlgorithmKind::Pd,
            "simple" => AlgorithmKind::Simple,
            "naive" => AlgorithmKind::Naive,
            "fixed-radius-adapter" => AlgorithmKind::FixedRadiusAdapter,
            "flexible-adapter" => AlgorithmKind::FlexibleAdapter,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            AlgorithmKind::Pd => "pd",
            AlgorithmKind::Simple => "simple",
            AlgorithmKind::Naive => "naive",
            AlgorithmKind::FixedRadiusAdapter => "fixed-radius-adapter",
            AlgorithmKind::FlexibleAdapter => "flexible-adapter",
        }
    }

    /// `n` is the number of demands for algorithms that need it; `None`
    /// selects the doubling estimate where applicable.
    pub fn build<'a>(
        self,
        metric: &'a MetricSpace,
        f: f64,
        n: Option<usize>,
        seed: u64,
    ) -> Box<dyn OnlineClusterer + 'a> {
        match self {
            AlgorithmKind::Pd => Box::new(PdSumRad::new(metric, f)),
            AlgorithmKind::Simple => {
                let mode = n.map_or(HorizonMode::Doubling, HorizonMode::Known);
                Box::new(SimpleSumRad::new(metric, f, mode, seed))
            }
            AlgorithmKind::Naive => Box::new(NaiveBaseline::new(metric, f)),
            AlgorithmKind::FixedRadiusAdapter => {
                Box::new(FixedRadiusAdapter::new(metric, f, NearestFixedRadius::new(metric, f, f)))
            }
            AlgorithmKind::FlexibleAdapter => {
                Box::new(FlexibleAdapter::new(metric, f, GreedyFlexible::new(metric, f)))
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub demand: usize,
    pub point: usize,
    /// covered on arrival (nothing opened)
    pub covered: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dual: Option<f64>,
    pub opened: Vec<Cluster>,
    pub running_cost: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunTranscript {
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub seed: Option<u64>,
    pub instance: Instance,
    pub steps: Vec<StepRecord>,
    pub cost: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub dual_sum: Option<f64>,
}

impl RunTranscript {
    pub fn clusters(&self) -> Vec<Cluster> {
        self.steps.iter().flat_map(|s| s.opened.iter().copied()).collect()
    }
}

/// Feeds every demand of `inst` to `alg`, checking after each one that the
/// demand is covered and that earlier clusters are unchanged.
pub fn run_online(alg: &mut dyn OnlineClusterer, inst: &Instance, seed: Option<u64>) -> Result<RunTranscript> {
    let mut steps = Vec::with_capacity(inst.n());
    let mut before: Vec<Cluster> = alg.clusters().to_vec();
    let mut dual_sum = None;
    for (j, &p) in inst.demands.iter().enumerate() {
        let opened = alg.on_demand(p)?;
        let now = alg.clusters();
        if now.len() != before.len() + opened.len() || now[..before.len()] != before[..] {
            return Err(Error::Invariant(format!("{}: opened clusters changed at demand {j}", alg.name())));
        }
        if !is_covered(&inst.metric, now, p) {
            return Err(Error::Invariant(format!("{}: demand {j} left uncovered", alg.name())));
        }
        before = now.to_vec();
        let dual = alg.last_dual();
        if let Some(a) = dual {
            *dual_sum.get_or_insert(0.0) += a;
        }
        steps.push(StepRecord {
            demand: j,
            point: p,
            covered: opened.is_empty(),
            dual,
            opened,
            running_cost: alg.cost(),
        });
    }
    Ok(RunTranscript {
        algorithm: alg.name().to_string(),
        seed,
        instance: inst.clone(),
        steps,
        cost: alg.cost(),
        dual_sum,
    })
}
