//! Exact offline optima: candidate enumeration plus a bitmask set-cover DP,
//! the power-of-two restricted optimum, and the interval parking-permit DP.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::metric::plane::{critical_centers, minimum_enclosing_circle, Point2};
use crate::model::{Center, Cluster, Instance, OpenedAt, Solution};
use crate::reductions::PermitInstance;
use crate::approx_le;

/// Default cap on distinct demand locations for the subset DP.
pub const DEFAULT_MAX_N: usize = 20;
const HARD_MAX_N: usize = 40;

/// DP cap, overridable through `RADII_MAX_N`.
pub fn max_exact_n() -> usize {
    std::env::var("RADII_MAX_N")
        .ok()
        .and_then(|v| v.parse().ok())
        .map(|n: usize| n.min(HARD_MAX_N))
        .unwrap_or(DEFAULT_MAX_N)
}

/// Which centers candidate clusters may use.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CenterPolicy {
    /// every point of the metric
    AllPoints,
    /// only demand locations
    DemandCenters,
    /// plane only: minimum enclosing circles of demand subsets
    ExactPlane,
}

impl CenterPolicy {
    /// Exact policy for the metric kind.
    pub fn exact_for(inst: &Instance) -> CenterPolicy {
        if inst.metric.is_plane() {
            CenterPolicy::ExactPlane
        } else {
            CenterPolicy::AllPoints
        }
    }
}

/// A potential offline cluster. `covered` is a bitmask over the distinct
/// demand locations of the instance, in first-arrival order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CandidateCluster {
    pub center: Center,
    pub radius: f64,
    pub covered: u64,
    pub cost: f64,
}

fn check_size(m: usize, limit: usize) -> Result<()> {
    if m > limit {
        Err(Error::Size { n: m, limit })
    } else {
        Ok(())
    }
}

fn coverage(inst: &Instance, locs: &[usize], center: &Center, radius: f64) -> u64 {
    locs.iter()
        .enumerate()
        .filter(|(_, &p)| approx_le(inst.metric.center_dist(center, p), radius))
        .fold(0u64, |m, (b, _)| m | (1 << b))
}

/// Keeps the cheapest candidate per coverage set (first one on ties),
/// dropping candidates that cover nothing. Output order follows first
/// appearance.
fn dedup(cands: impl IntoIterator<Item = CandidateCluster>) -> Vec<CandidateCluster> {
    let mut slot: HashMap<u64, usize> = HashMap::new();
    let mut out: Vec<CandidateCluster> = Vec::new();
    for c in cands {
        if c.covered == 0 {
            continue;
        }
        match slot.get(&c.covered) {
            Some(&i) if out[i].cost <= c.cost => {}
            Some(&i) => out[i] = c,
            None => {
                slot.insert(c.covered, out.len());
                out.push(c);
            }
        }
    }
    out
}

fn demand_coords(inst: &Instance, locs: &[usize]) -> Result<Vec<Point2>> {
    let plane = inst
        .metric
        .as_plane()
        .ok_or_else(|| Error::Parameter("exact-plane mode needs a plane metric".into()))?;
    Ok(locs.iter().map(|&p| plane.coords[p]).collect())
}

/// Enumerates coverage-distinct candidate clusters. Radii are `0` and the
/// distances from the center to each demand; in exact-plane mode every
/// minimum enclosing circle of at most three demands (which are all the
/// enclosing circles of arbitrary demand subsets).
pub fn enumerate_candidates(inst: &Instance, policy: CenterPolicy) -> Result<Vec<CandidateCluster>> {
    let locs = inst.distinct_demands();
    check_size(locs.len(), max_exact_n())?;
    let f = inst.f;
    let mut raw = Vec::new();
    match policy {
        CenterPolicy::AllPoints | CenterPolicy::DemandCenters => {
            let centers: Vec<usize> = if policy == CenterPolicy::AllPoints {
                (0..inst.metric.len()).collect()
            } else {
                locs.clone()
            };
            for z in centers {
                let center = Center::Point(z);
                let mut radii: Vec<f64> = std::iter::once(0.0)
                    .chain(locs.iter().map(|&p| inst.metric.dist(z, p)))
                    .collect();
                radii.sort_by(f64::total_cmp);
                radii.dedup();
                for r in radii {
                    raw.push(CandidateCluster { center, radius: r, covered: coverage(inst, &locs, &center, r), cost: f + r });
                }
            }
        }
        CenterPolicy::ExactPlane => {
            let pts = demand_coords(inst, &locs)?;
            let m = pts.len();
            let mut push = |subset: &[Point2]| {
                let c = minimum_enclosing_circle(subset).expect("non-empty subset");
                let center = Center::Coord(c.center);
                raw.push(CandidateCluster {
                    center,
                    radius: c.radius,
                    covered: coverage(inst, &locs, &center, c.radius),
                    cost: f + c.radius,
                });
            };
            for i in 0..m {
                push(&[pts[i]]);
                for j in i + 1..m {
                    push(&[pts[i], pts[j]]);
                    for k in j + 1..m {
                        push(&[pts[i], pts[j], pts[k]]);
                    }
                }
            }
        }
    }
    Ok(dedup(raw))
}

/// Candidates restricted to radii `{0} ∪ {2^k f}`. On the plane every disk
/// center is allowed, realized through the critical centers of each radius.
pub fn pow2_candidates(inst: &Instance) -> Result<Vec<CandidateCluster>> {
    let locs = inst.distinct_demands();
    check_size(locs.len(), max_exact_n())?;
    let f = inst.f;
    let mut diam: f64 = 0.0;
    for &a in &locs {
        for &b in &locs {
            diam = diam.max(inst.metric.dist(a, b));
        }
    }
    let mut radii = vec![0.0];
    let mut r = f;
    loop {
        radii.push(r);
        if r >= diam {
            break;
        }
        r *= 2.0;
    }
    let mut raw = Vec::new();
    if inst.metric.is_plane() {
        let pts = demand_coords(inst, &locs)?;
        for &r in &radii {
            for c in critical_centers(&pts, r) {
                let center = Center::Coord(c);
                raw.push(CandidateCluster { center, radius: r, covered: coverage(inst, &locs, &center, r), cost: f + r });
            }
        }
    } else {
        for z in 0..inst.metric.len() {
            let center = Center::Point(z);
            for &r in &radii {
                raw.push(CandidateCluster { center, radius: r, covered: coverage(inst, &locs, &center, r), cost: f + r });
            }
        }
    }
    Ok(dedup(raw))
}

/// Drops candidates whose coverage is contained in a no-more-expensive one.
fn prune_dominated(cands: &[CandidateCluster]) -> Vec<CandidateCluster> {
    let mut sorted: Vec<CandidateCluster> = cands.to_vec();
    // larger coverage first, then cheaper
    sorted.sort_by(|a, b| {
        b.covered
            .count_ones()
            .cmp(&a.covered.count_ones())
            .then(a.cost.total_cmp(&b.cost))
    });
    let mut kept: Vec<CandidateCluster> = Vec::new();
    for c in sorted {
        let dominated = kept
            .iter()
            .any(|k| k.covered & c.covered == c.covered && k.cost <= c.cost);
        if !dominated {
            kept.push(c);
        }
    }
    kept
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptResult {
    pub cost: f64,
    pub solution: Solution,
}

/// Minimum-cost cover of all demand locations by `candidates`:
/// `best[S] = min over c covering min(S) of cost(c) + best[S \ covered(c)]`.
pub fn exact_opt(inst: &Instance, candidates: &[CandidateCluster]) -> Result<OptResult> {
    let locs = inst.distinct_demands();
    let m = locs.len();
    check_size(m, max_exact_n())?;
    if m == 0 {
        return Ok(OptResult { cost: 0.0, solution: Solution::default() });
    }
    let cands = prune_dominated(candidates);
    let mut by_loc: Vec<Vec<usize>> = vec![Vec::new(); m];
    for (i, c) in cands.iter().enumerate() {
        for (b, list) in by_loc.iter_mut().enumerate() {
            if c.covered >> b & 1 == 1 {
                list.push(i);
            }
        }
    }
    if let Some(b) = by_loc.iter().position(|l| l.is_empty()) {
        return Err(Error::Invariant(format!("no candidate covers demand location {}", locs[b])));
    }
    let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };
    let states = 1usize << m;
    let mut best = vec![f64::INFINITY; states];
    let mut choice = vec![u32::MAX; states];
    best[0] = 0.0;
    for s in 1..states {
        let low = (s as u64).trailing_zeros() as usize;
        let mut b = f64::INFINITY;
        let mut arg = u32::MAX;
        for &ci in &by_loc[low] {
            let c = &cands[ci];
            let rest = (s as u64 & !c.covered) as usize;
            let v = c.cost + best[rest];
            if v < b {
                b = v;
                arg = ci as u32;
            }
        }
        best[s] = b;
        choice[s] = arg;
    }

    let mut chosen = Vec::new();
    let mut s = full;
    while s != 0 {
        let c = cands[choice[s as usize] as usize];
        chosen.push(c);
        s &= !c.covered;
    }
    let clusters: Vec<Cluster> = chosen
        .iter()
        .map(|c| Cluster::new(c.center, c.radius, OpenedAt::OFFLINE))
        .collect();
    let loc_bit: HashMap<usize, usize> = locs.iter().enumerate().map(|(b, &p)| (p, b)).collect();
    let assignment = inst
        .demands
        .iter()
        .map(|p| {
            let b = loc_bit[p];
            chosen.iter().position(|c| c.covered >> b & 1 == 1).expect("cover is complete")
        })
        .collect();
    Ok(OptResult { cost: best[full as usize], solution: Solution { clusters, assignment } })
}

/// Exact optimum with the metric kind's exact center policy.
pub fn optimum(inst: &Instance) -> Result<OptResult> {
    let cands = enumerate_candidates(inst, CenterPolicy::exact_for(inst))?;
    exact_opt(inst, &cands)
}

/// Optimum with radii restricted to `{0} ∪ {2^k f : k >= 0}`.
pub fn exact_opt_pow2(inst: &Instance) -> Result<OptResult> {
    let cands = pow2_candidates(inst)?;
    exact_opt(inst, &cands)
}

/// Optimal purchase cost for an interval permit instance by a bottom-up DP
/// over the window tree: a driving day is `+∞` on its own, a window costs
/// `min(c_type, Σ children)`.
pub fn permit_opt(p: &PermitInstance) -> Result<f64> {
    p.check_laminar()?;
    // window index -> value, only windows holding a driving day
    let mut level: BTreeMap<usize, f64> = p.driving.iter().map(|&d| (d, f64::INFINITY)).collect();
    let mut span = 1usize;
    for t in 0..p.num_types() {
        let ratio = p.d[t] / span;
        span = p.d[t];
        let mut next: BTreeMap<usize, f64> = BTreeMap::new();
        for (&w, &v) in &level {
            let e = next.entry(w / ratio).or_insert(0.0);
            *e += v; // INFINITY + x saturates
        }
        for v in next.values_mut() {
            *v = v.min(p.c[t]);
        }
        level = next;
    }
    Ok(level.values().sum())
}
