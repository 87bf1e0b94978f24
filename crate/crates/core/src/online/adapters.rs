//! Adapters turning algorithms for the fixed-radius and flexible-cluster
//! models into algorithms for the fixed-cluster model, plus one toy inner
//! algorithm per model.
//!
//! In the fixed-radius model a cluster's radius is fixed when it opens but
//! its center may move. In the flexible model a cluster is just a set of
//! demands and costs `f + rad(C)`, where `rad` is the radius of the
//! smallest enclosing ball.

use crate::error::{Error, Result};
use crate::metric::plane::minimum_enclosing_circle;
use crate::metric::MetricSpace;
use crate::model::{Center, Cluster, OpenedAt};
use crate::online::{is_covered, OnlineClusterer};
use crate::approx_le;

/// Radius of the smallest ball containing `pts`: centers range over the
/// whole plane for plane metrics and over the metric points otherwise.
pub fn set_radius(metric: &MetricSpace, pts: &[usize]) -> f64 {
    if pts.is_empty() {
        return 0.0;
    }
    if let Some(plane) = metric.as_plane() {
        let coords: Vec<_> = pts.iter().map(|&p| plane.coords[p]).collect();
        return minimum_enclosing_circle(&coords).map_or(0.0, |c| c.radius);
    }
    (0..metric.len())
        .map(|z| pts.iter().map(|&p| metric.dist(z, p)).fold(0.0, f64::max))
        .fold(f64::INFINITY, f64::min)
}

/// Largest pairwise distance.
pub fn set_diameter(metric: &MetricSpace, pts: &[usize]) -> f64 {
    let mut d: f64 = 0.0;
    for (i, &a) in pts.iter().enumerate() {
        for &b in &pts[i + 1..] {
            d = d.max(metric.dist(a, b));
        }
    }
    d
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum FixedRadiusAction {
    /// the demand joins existing group `g`
    Join(usize),
    /// the demand opens a new group of the given radius
    Open { radius: f64 },
}

/// An online algorithm for the fixed-radius model.
pub trait FixedRadiusClusterer {
    fn assign(&mut self, point: usize) -> FixedRadiusAction;
    fn cost(&self) -> f64;
}

/// Joins the group whose first demand is nearest among those that can take
/// the demand without exceeding their radius, else opens a group of
/// radius `r`.
pub struct NearestFixedRadius<'a> {
    metric: &'a MetricSpace,
    f: f64,
    radius: f64,
    groups: Vec<Vec<usize>>,
}

impl<'a> NearestFixedRadius<'a> {
    pub fn new(metric: &'a MetricSpace, f: f64, radius: f64) -> Self {
        NearestFixedRadius { metric, f, radius, groups: Vec::new() }
    }
}

impl FixedRadiusClusterer for NearestFixedRadius<'_> {
    fn assign(&mut self, point: usize) -> FixedRadiusAction {
        let mut best: Option<(f64, usize)> = None;
        for (g, pts) in self.groups.iter().enumerate() {
            let mut with = pts.clone();
            with.push(point);
            if !approx_le(set_radius(self.metric, &with), self.radius) {
                continue;
            }
            let d = self.metric.dist(pts[0], point);
            if best.map_or(true, |(bd, _)| d < bd) {
                best = Some((d, g));
            }
        }
        match best {
            Some((_, g)) => {
                self.groups[g].push(point);
                FixedRadiusAction::Join(g)
            }
            None => {
                self.groups.push(vec![point]);
                FixedRadiusAction::Open { radius: self.radius }
            }
        }
    }

    fn cost(&self) -> f64 {
        self.groups.len() as f64 * (self.f + self.radius)
    }
}

/// Opens `C(u, 2r)` whenever the inner algorithm opens a radius-`r` group
/// at demand `u`.
pub struct FixedRadiusAdapter<'a, A> {
    metric: &'a MetricSpace,
    f: f64,
    inner: A,
    seen: usize,
    clusters: Vec<Cluster>,
}

impl<'a, A: FixedRadiusClusterer> FixedRadiusAdapter<'a, A> {
    pub fn new(metric: &'a MetricSpace, f: f64, inner: A) -> Self {
        FixedRadiusAdapter { metric, f, inner, seen: 0, clusters: Vec::new() }
    }

    pub fn inner_cost(&self) -> f64 {
        self.inner.cost()
    }
}

impl<A: FixedRadiusClusterer> OnlineClusterer for FixedRadiusAdapter<'_, A> {
    fn name(&self) -> &'static str {
        "fixed-radius-adapter"
    }

    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>> {
        let j = self.seen;
        self.seen += 1;
        match self.inner.assign(point) {
            FixedRadiusAction::Open { radius } => {
                let c = Cluster::at(point, 2.0 * radius, j);
                self.clusters.push(c);
                Ok(vec![c])
            }
            FixedRadiusAction::Join(g) => {
                let c = self
                    .clusters
                    .get(g)
                    .ok_or_else(|| Error::Invariant(format!("inner joined unknown group {g}")))?;
                if !is_covered(self.metric, std::slice::from_ref(c), point) {
                    return Err(Error::Invariant(format!("demand {j} escapes its doubled cluster")));
                }
                Ok(Vec::new())
            }
        }
    }

    fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    fn opening_cost(&self) -> f64 {
        self.f
    }
}

/// An online algorithm for the flexible-cluster model. `assign` returns
/// the group index; an index equal to the previous group count opens a new
/// group.
pub trait FlexibleClusterer {
    fn assign(&mut self, point: usize) -> usize;
    fn groups(&self) -> &[Vec<usize>];
    fn cost(&self) -> f64;
}

/// Joins the group whose radius grows least, if that growth is at most `f`;
/// otherwise opens a new group.
pub struct GreedyFlexible<'a> {
    metric: &'a MetricSpace,
    f: f64,
    groups: Vec<Vec<usize>>,
    radii: Vec<f64>,
}

impl<'a> GreedyFlexible<'a> {
    pub fn new(metric: &'a MetricSpace, f: f64) -> Self {
        GreedyFlexible { metric, f, groups: Vec::new(), radii: Vec::new() }
    }
}

impl FlexibleClusterer for GreedyFlexible<'_> {
    fn assign(&mut self, point: usize) -> usize {
        let mut best: Option<(f64, f64, usize)> = None;
        for (g, pts) in self.groups.iter().enumerate() {
            let mut with = pts.clone();
            with.push(point);
            let r = set_radius(self.metric, &with);
            let growth = r - self.radii[g];
            if best.map_or(true, |(bg, _, _)| growth < bg) {
                best = Some((growth, r, g));
            }
        }
        match best {
            Some((growth, r, g)) if growth <= self.f => {
                self.groups[g].push(point);
                self.radii[g] = r;
                g
            }
            _ => {
                self.groups.push(vec![point]);
                self.radii.push(0.0);
                self.groups.len() - 1
            }
        }
    }

    fn groups(&self) -> &[Vec<usize>] {
        &self.groups
    }

    fn cost(&self) -> f64 {
        self.groups.len() as f64 * self.f + self.radii.iter().sum::<f64>()
    }
}

/// Cost paid by the adapter for one inner group.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GroupReport {
    pub group: usize,
    pub cost: f64,
    pub diameter: f64,
    pub rings: usize,
}

impl GroupReport {
    pub fn bound(&self, f: f64) -> f64 {
        (2.0 * f).max(5.0 * self.diameter)
    }
}

/// Keeps nested rings `C(û, 2^k f)` around the first demand `û` of every
/// inner group, opening a larger ring when an assigned demand escapes.
pub struct FlexibleAdapter<'a, A> {
    metric: &'a MetricSpace,
    f: f64,
    inner: A,
    seen: usize,
    clusters: Vec<Cluster>,
    /// per group: first demand point, largest ring level, cluster indices
    rings: Vec<(usize, u32, Vec<usize>)>,
}

impl<'a, A: FlexibleClusterer> FlexibleAdapter<'a, A> {
    pub fn new(metric: &'a MetricSpace, f: f64, inner: A) -> Self {
        FlexibleAdapter { metric, f, inner, seen: 0, clusters: Vec::new(), rings: Vec::new() }
    }

    pub fn inner_cost(&self) -> f64 {
        self.inner.cost()
    }

    pub fn group_reports(&self) -> Vec<GroupReport> {
        self.rings
            .iter()
            .zip(self.inner.groups())
            .enumerate()
            .map(|(g, ((_, _, idx), pts))| GroupReport {
                group: g,
                cost: idx.iter().map(|&i| self.clusters[i].cost(self.f)).sum(),
                diameter: set_diameter(self.metric, pts),
                rings: idx.len(),
            })
            .collect()
    }

    fn open_ring(&mut self, g: usize, k: u32, j: usize) -> Cluster {
        let center = self.rings[g].0;
        let c = Cluster::new(Center::Point(center), self.f * 2f64.powi(k as i32), OpenedAt::Demand(j));
        self.rings[g].1 = k;
        self.rings[g].2.push(self.clusters.len());
        self.clusters.push(c);
        c
    }
}

impl<A: FlexibleClusterer> OnlineClusterer for FlexibleAdapter<'_, A> {
    fn name(&self) -> &'static str {
        "flexible-adapter"
    }

    fn on_demand(&mut self, point: usize) -> Result<Vec<Cluster>> {
        let j = self.seen;
        self.seen += 1;
        let g = self.inner.assign(point);
        if g == self.rings.len() {
            self.rings.push((point, 0, Vec::new()));
            return Ok(vec![self.open_ring(g, 0, j)]);
        }
        let &(center, level, _) = self
            .rings
            .get(g)
            .ok_or_else(|| Error::Invariant(format!("inner returned unknown group {g}")))?;
        let d = self.metric.dist(center, point);
        if approx_le(d, self.f * 2f64.powi(level as i32)) {
            return Ok(Vec::new());
        }
        let k = crate::model::pow2_level(d, self.f);
        Ok(vec![self.open_ring(g, k, j)])
    }

    fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    fn opening_cost(&self) -> f64 {
        self.f
    }
}
