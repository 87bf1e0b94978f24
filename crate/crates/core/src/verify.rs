//! Replays saved instances and transcripts against every invariant that
//! applies to them.

use serde::Serialize;
use serde_json::Value;

use crate::adversary::{lb_certificate, AdversaryTranscript};
use crate::error::{Error, Result};
use crate::fractional::{phased_frac, run_frac, FracTranscript};
use crate::metric::validate_metric;
use crate::model::{covers, Cluster, Instance, Solution};
use crate::offline::{exact_opt, exact_opt_pow2, max_exact_n, optimum, permit_opt, enumerate_candidates, CenterPolicy};
use crate::online::pd::{dual_violations, CenterPolicy as PdCenters};
use crate::online::{run_online, AlgorithmKind, RunTranscript};
use crate::reductions::{permit_to_cluster, PermitInstance};
use crate::{approx_le, EPS};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct VerifyReport {
    pub subject: String,
    pub checks: Vec<Check>,
}

impl VerifyReport {
    fn new(subject: &str) -> Self {
        VerifyReport { subject: subject.into(), checks: Vec::new() }
    }

    fn push(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.into(), passed, detail: detail.into() });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    /// `0` when every check passed, `1` otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }
}

/// Anything `verify` accepts.
#[derive(Clone, Debug)]
pub enum Subject {
    Instance(Instance),
    Run(RunTranscript),
    Frac(FracTranscript),
    Adversary(Box<AdversaryTranscript>),
    Permit(PermitInstance),
}

/// Recognizes the document kind by its fields.
pub fn parse_subject(v: Value) -> Result<Subject> {
    let has = |k: &str| v.get(k).is_some();
    let bad = |e: serde_json::Error| Error::Structural(format!("unreadable input: {e}"));
    if has("setting") {
        Ok(Subject::Adversary(Box::new(serde_json::from_value(v).map_err(bad)?)))
    } else if has("audit") {
        Ok(Subject::Frac(serde_json::from_value(v).map_err(bad)?))
    } else if has("steps") {
        Ok(Subject::Run(serde_json::from_value(v).map_err(bad)?))
    } else if has("driving") {
        Ok(Subject::Permit(serde_json::from_value(v).map_err(bad)?))
    } else if has("metric") {
        Ok(Subject::Instance(serde_json::from_value(v).map_err(bad)?))
    } else {
        Err(Error::Structural("input is not an instance, transcript or permit instance".into()))
    }
}

pub fn verify(subject: &Subject) -> Result<VerifyReport> {
    match subject {
        Subject::Instance(i) => verify_instance(i),
        Subject::Run(t) => verify_run(t),
        Subject::Frac(t) => verify_frac(t),
        Subject::Adversary(t) => verify_adversary(t),
        Subject::Permit(p) => verify_permit(p),
    }
}

fn metric_checks(r: &mut VerifyReport, inst: &Instance) -> Result<()> {
    let v = validate_metric(&inst.metric.to_matrix())?;
    r.push("metric", v.is_empty(), format!("{} violations", v.len()));
    let ok = inst.check();
    r.push("instance", ok.is_ok(), ok.err().map_or(String::new(), |e| e.to_string()));
    Ok(())
}

pub fn verify_instance(inst: &Instance) -> Result<VerifyReport> {
    let mut r = VerifyReport::new("instance");
    metric_checks(&mut r, inst)?;
    if inst.distinct_demands().len() <= max_exact_n() {
        let opt = optimum(inst)?;
        let pow2 = exact_opt_pow2(inst)?;
        let feasible = opt.solution.check_feasible(inst);
        r.push("opt-feasible", feasible.is_ok(), format!("cost {}", opt.cost));
        r.push(
            "pow2-opt-factor",
            approx_le(opt.cost, pow2.cost) && approx_le(pow2.cost, 2.0 * opt.cost),
            format!("opt {} pow2 {}", opt.cost, pow2.cost),
        );
    }
    Ok(r)
}

pub fn verify_run(t: &RunTranscript) -> Result<VerifyReport> {
    let mut r = VerifyReport::new(&format!("{} transcript", t.algorithm));
    let inst = &t.instance;
    metric_checks(&mut r, inst)?;
    let f = inst.f;

    let mut open: Vec<Cluster> = Vec::new();
    let mut uncovered_at = Vec::new();
    let mut coverage_ok = true;
    let mut cost_ok = true;
    let mut order_ok = t.steps.len() == inst.n();
    for (j, s) in t.steps.iter().enumerate() {
        order_ok &= s.demand == j && inst.demands.get(j) == Some(&s.point);
        let before = open.iter().any(|c| covers(&inst.metric, c, s.point));
        uncovered_at.push(!before);
        if s.covered != s.opened.is_empty() {
            coverage_ok = false;
        }
        open.extend_from_slice(&s.opened);
        coverage_ok &= open.iter().any(|c| covers(&inst.metric, c, s.point));
        let running: f64 = open.iter().map(|c| c.cost(f)).sum();
        cost_ok &= (running - s.running_cost).abs() <= EPS * running.max(1.0);
    }
    r.push("demand-order", order_ok, format!("{} steps", t.steps.len()));
    r.push("coverage", coverage_ok, "every demand covered after its step");
    let total: f64 = open.iter().map(|c| c.cost(f)).sum();
    cost_ok &= (total - t.cost).abs() <= EPS * total.max(1.0);
    r.push("cost", cost_ok, format!("recomputed {total}, recorded {}", t.cost));

    if t.algorithm == "pd" {
        let duals: Vec<f64> = t.steps.iter().map(|s| s.dual.unwrap_or(f64::NAN)).collect();
        let values_ok = duals.iter().zip(&uncovered_at).all(|(&a, &u)| a == if u { f } else { 0.0 });
        r.push("dual-values", values_ok, "a_j = f exactly when u_j arrives uncovered");
        let policy = PdCenters::default_for(&inst.metric);
        let mut feasible = true;
        let mut first = String::new();
        for j in 1..=duals.len() {
            let v = dual_violations(&inst.metric, f, policy, &inst.demands[..j], &duals[..j]);
            if let Some(x) = v.first() {
                feasible = false;
                first = format!("after demand {}: level {} load {} > {}", j - 1, x.level, x.load, x.capacity);
                break;
            }
        }
        r.push("dual-feasibility", feasible, first);
        let sum: f64 = duals.iter().sum();
        let recorded = t.dual_sum.unwrap_or(f64::NAN);
        r.push("dual-sum", (sum - recorded).abs() <= EPS * sum.max(1.0), format!("{sum} vs {recorded}"));
        let n = inst.n().max(1) as f64;
        let bound = 3.0 * (2.0 + n.log2()) * sum;
        r.push("primal-dual-bound", approx_le(t.cost, bound), format!("cost {} <= {bound}", t.cost));
        if inst.distinct_demands().len() <= max_exact_n() {
            let pow2 = exact_opt_pow2(inst)?.cost;
            r.push("weak-duality-pow2", approx_le(sum, pow2), format!("dual sum {sum} <= {pow2}"));
        }
    }

    if let Some(kind) = AlgorithmKind::parse(&t.algorithm) {
        if kind != AlgorithmKind::Simple || t.seed.is_some() {
            let mut alg = kind.build(&inst.metric, f, Some(inst.n()), t.seed.unwrap_or(0));
            let again = run_online(alg.as_mut(), inst, t.seed)?;
            r.push("replay", again.steps == t.steps && again.cost == t.cost, "rerun reproduces the transcript");
        }
    }
    if inst.distinct_demands().len() <= max_exact_n() {
        let opt = optimum(inst)?.cost;
        r.push("opt-lower-bound", approx_le(opt, t.cost), format!("opt {opt} <= cost {}", t.cost));
    }
    Ok(r)
}

pub fn verify_frac(t: &FracTranscript) -> Result<VerifyReport> {
    let mut r = VerifyReport::new(&format!("{} transcript", t.algorithm));
    let a = &t.audit;
    r.push("step1-identity", a.step1_failures == 0, format!("{} failures", a.step1_failures));
    r.push("step2-identity", a.step2_failures == 0, format!("{} failures", a.step2_failures));
    r.push("loop-guard", a.guard_failures == 0, format!("{} failures", a.guard_failures));
    let covered = t.steps.iter().all(|s| s.f_after >= 1.0 - EPS) && a.coverage_failures == 0;
    r.push("coverage", covered, "F_j >= 1 after every demand");
    let monotone = t.steps.windows(2).all(|w| w[1].running_cost >= w[0].running_cost);
    r.push("cost-monotone", monotone, "running cost never decreases");
    if let Some(inst) = &t.instance {
        metric_checks(&mut r, inst)?;
        let again = if t.algorithm == "frac-phased" {
            phased_frac(&inst.metric, inst.f, &inst.demands, t.mode)?
        } else {
            run_frac(&inst.metric, inst.f, &inst.demands, t.mode)?
        };
        r.push(
            "replay",
            again.steps == t.steps && again.cost == t.cost,
            "rerun reproduces the transcript",
        );
    }
    Ok(r)
}

pub fn verify_adversary(t: &AdversaryTranscript) -> Result<VerifyReport> {
    let mut r = VerifyReport::new(&format!("{} adversary transcript", t.algorithm));
    let inst = &t.instance;
    metric_checks(&mut r, inst)?;
    r.push("demand-count", t.steps.len() <= 3usize.pow(t.k as u32), format!("{} demands", t.steps.len()));
    let mut open: Vec<Cluster> = Vec::new();
    let mut fresh = true;
    let mut padding_seen = false;
    for s in &t.steps {
        let before = open.iter().any(|c| covers(&inst.metric, c, s.point));
        if s.padding {
            padding_seen = true;
        } else {
            fresh &= !before && !padding_seen;
        }
        open.extend_from_slice(&s.opened);
    }
    r.push("uncovered-arrivals", fresh, "every non-padding demand was uncovered");
    let total: f64 = open.iter().map(|c| c.cost(inst.f)).sum();
    r.push("alg-cost", (total - t.alg_cost).abs() <= EPS * total.max(1.0), format!("{total} vs {}", t.alg_cost));
    r.push("opt-vs-structural", approx_le(t.opt_cost, t.structural_bound), format!("{} <= {}", t.opt_cost, t.structural_bound));
    let c = lb_certificate(t);
    r.push("certificate", c.holds, format!("ratio {} >= floor {}", c.measured_ratio, c.floor));
    Ok(r)
}

pub fn verify_permit(p: &PermitInstance) -> Result<VerifyReport> {
    let mut r = VerifyReport::new("permit instance");
    let nf = p.check_normal_form();
    r.push("normal-form", nf.is_ok(), nf.as_ref().err().map_or(String::new(), |e| e.to_string()));
    if nf.is_err() {
        return Ok(r);
    }
    let red = permit_to_cluster(p)?;
    metric_checks(&mut r, &red.instance)?;
    let popt = permit_opt(p)?;
    if red.instance.distinct_demands().len() <= max_exact_n() {
        let cands = enumerate_candidates(&red.instance, CenterPolicy::AllPoints)?;
        let copt = exact_opt(&red.instance, &cands)?;
        r.push("opt-equality", (popt - copt.cost).abs() <= EPS * popt.max(1.0), format!("permit {popt} cluster {}", copt.cost));
        let permits = red.cluster_sol_to_permit_sol(&copt.solution)?;
        let mapped = p.purchase_cost(&permits);
        r.push(
            "cluster-to-permit",
            p.is_feasible(&permits) && approx_le(mapped, copt.cost),
            format!("cost {} -> {mapped}", copt.cost),
        );
        let back: Solution = red.permit_sol_to_cluster_sol(&permits)?;
        let bc = back.cost(1.0);
        r.push(
            "permit-to-cluster",
            back.check_feasible(&red.instance).is_ok() && (bc - mapped).abs() <= EPS * bc.max(1.0),
            format!("cost {mapped} -> {bc}"),
        );
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{MetricSpace, PlaneMetric};

    fn pd_transcript() -> RunTranscript {
        let m = MetricSpace::Plane(PlaneMetric::new(vec![[0.0, 0.0], [1.0, 0.0]]));
        let inst = Instance::new(m, 1.0, vec![0, 1]).unwrap();
        let mut alg = AlgorithmKind::Pd.build(&inst.metric, 1.0, None, 0);
        run_online(alg.as_mut(), &inst, None).unwrap()
    }

    #[test]
    fn valid_pd_transcript_passes() {
        let r = verify_run(&pd_transcript()).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
        assert_eq!(r.exit_code(), 0);
    }

    #[test]
    fn corrupted_dual_fails() {
        let mut t = pd_transcript();
        t.steps[1].dual = Some(2.0);
        let r = verify_run(&t).unwrap();
        assert_eq!(r.exit_code(), 1);
        assert!(r.checks.iter().any(|c| c.name == "dual-feasibility" && !c.passed));
    }

    #[test]
    fn permit_round_trip() {
        let p = crate::generate::permit(3, 10, 4).unwrap();
        let r = verify_permit(&p).unwrap();
        assert!(r.passed(), "{:?}", r.checks);
    }

    #[test]
    fn recognizes_documents() {
        let t = serde_json::to_value(pd_transcript()).unwrap();
        assert!(matches!(parse_subject(t).unwrap(), Subject::Run(_)));
        let p = serde_json::to_value(crate::generate::permit(2, 4, 0).unwrap()).unwrap();
        assert!(matches!(parse_subject(p).unwrap(), Subject::Permit(_)));
        assert!(parse_subject(serde_json::json!({"x": 1})).is_err());
    }
}
