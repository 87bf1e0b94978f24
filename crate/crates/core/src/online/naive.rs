//! Opens a radius-0 cluster at every uncovered demand.

use crate::error::Result;
use crate::metric::MetricSpace;
use crate::model::Cluster;
use crate::online::{is_covered, OnlineClusterer};

pub struct NaiveBaseline<'a> {
    metric: &'a MetricSpace,
    f: f64,
    seen: usize,
    clusters: Vec<Cluster>,
}

impl<'a> NaiveBaseline<'a> {
    pub fn new(metric: &'a MetricSpace, f: f64) -> Self {
        NaiveBaseline { metric, f, seen: 0, clusters: Vec::new() }
    }
}

impl OnlineClusterer for NaiveBaseline<'_> {
    fn name(&self) -> &'static str {
        "naive"
    }

    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>> {
        let j = self.seen;
        self.seen += 1;
        if is_covered(self.metric, &self.clusters, point) {
            return Ok(Vec::new());
        }
        let c = Cluster::at(point, 0.0, j);
        self.clusters.push(c);
        Ok(vec![c])
    }

    fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    fn opening_cost(&self) -> f64 {
        self.f
    }
}
