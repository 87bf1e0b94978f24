//! Batch experiments: competitive ratios against exact optima, written as
//! CSV with per-(instance, algorithm) mean and standard-error rows.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::adversary::structural_opt_bound;
use crate::error::{Error, Result};
use crate::fractional::{phased_frac, run_frac, FracMode};
use crate::generate;
use crate::model::Instance;
use crate::offline::{exact_opt_pow2, max_exact_n, optimum};
use crate::online::{run_online, AlgorithmKind};
use crate::par;

pub const CSV_HEADER: [&str; 9] =
    ["instance_id", "n", "algorithm", "seed", "alg_cost", "opt_cost", "ratio", "bound", "bound_ok"];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptMode {
    /// exact optimum over unrestricted radii
    Exact,
    /// exact optimum over radii `{0} ∪ {2^k f}`
    Pow2,
    /// `min_k c_k · active_k` upper bound, tree metrics with leaf demands
    Structural,
}

impl OptMode {
    pub fn parse(s: &str) -> Option<OptMode> {
        Some(match s {
            "exact" => OptMode::Exact,
            "pow2" => OptMode::Pow2,
            "structural" => OptMode::Structural,
            _ => return None,
        })
    }
}

/// The optimum (or bound) used as the ratio denominator.
pub fn opt_value(inst: &Instance, mode: OptMode) -> Result<f64> {
    match mode {
        OptMode::Exact => Ok(optimum(inst)?.cost),
        OptMode::Pow2 => Ok(exact_opt_pow2(inst)?.cost),
        OptMode::Structural => {
            let tree = inst
                .metric
                .as_tree()
                .filter(|_| inst.f == 1.0)
                .ok_or_else(|| Error::Parameter("structural bound needs a tree metric and f = 1".into()))?;
            if inst.demands.iter().any(|&p| p >= tree.num_leaves()) {
                return Err(Error::Parameter("structural bound needs leaf demands".into()));
            }
            Ok(structural_opt_bound(tree, &inst.demands))
        }
    }
}

/// Algorithms runnable in a batch.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BatchAlgorithm {
    Online(AlgorithmKind),
    Frac,
    FracPhased,
}

impl BatchAlgorithm {
    pub fn parse(s: &str) -> Option<BatchAlgorithm> {
        match s {
            "frac" => Some(BatchAlgorithm::Frac),
            "frac-phased" => Some(BatchAlgorithm::FracPhased),
            other => AlgorithmKind::parse(other).map(BatchAlgorithm::Online),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BatchAlgorithm::Online(k) => k.name(),
            BatchAlgorithm::Frac => "frac",
            BatchAlgorithm::FracPhased => "frac-phased",
        }
    }

    fn randomized(self) -> bool {
        self == BatchAlgorithm::Online(AlgorithmKind::Simple)
    }
}

/// Instance source for a batch, generated from `seed + index`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum GeneratorConfig {
    Hst { alpha: f64, fanouts: Vec<usize>, n: usize, #[serde(default = "one")] f: f64 },
    PlaneUniform { points: usize, n: usize, #[serde(default = "ten")] side: f64, #[serde(default = "one")] f: f64 },
    LineUniform { points: usize, n: usize, #[serde(default = "ten")] side: f64, #[serde(default = "one")] f: f64 },
    Finite { points: usize, n: usize, #[serde(default = "ten_u32")] max_w: u32, #[serde(default = "one")] f: f64 },
}

fn one() -> f64 {
    1.0
}
fn ten() -> f64 {
    10.0
}
fn ten_u32() -> u32 {
    10
}

impl GeneratorConfig {
    pub fn generate(&self, seed: u64) -> Result<Instance> {
        match self {
            GeneratorConfig::Hst { alpha, fanouts, n, f } => generate::hst(*alpha, fanouts, *n, *f, seed),
            GeneratorConfig::PlaneUniform { points, n, side, f } => generate::plane_uniform(*points, *n, *side, *f, seed),
            GeneratorConfig::LineUniform { points, n, side, f } => generate::line_uniform(*points, *n, *side, *f, seed),
            GeneratorConfig::Finite { points, n, max_w, f } => generate::finite(*points, *n, *max_w, *f, seed),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub generator: GeneratorConfig,
    pub instances: usize,
    pub algorithms: Vec<String>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_opt")]
    pub opt_mode: OptMode,
}

fn default_trials() -> usize {
    1
}
fn default_opt() -> OptMode {
    OptMode::Exact
}

impl ExperimentConfig {
    pub fn build_instances(&self) -> Result<Vec<(String, Instance)>> {
        (0..self.instances)
            .map(|i| {
                let s = self.seed + i as u64;
                Ok((format!("{i}"), self.generator.generate(s)?))
            })
            .collect()
    }

    pub fn parsed_algorithms(&self) -> Result<Vec<BatchAlgorithm>> {
        self.algorithms
            .iter()
            .map(|a| BatchAlgorithm::parse(a).ok_or_else(|| Error::Parameter(format!("unknown algorithm {a}"))))
            .collect()
    }
}

/// One CSV row. Aggregate rows carry `"mean"` or `"stderr"` as the seed.
#[derive(Clone, Debug, PartialEq)]
pub struct BatchRow {
    pub instance_id: String,
    pub n: usize,
    pub algorithm: String,
    pub seed: String,
    pub alg_cost: f64,
    pub opt_cost: f64,
    pub ratio: f64,
    pub bound: Option<f64>,
    pub bound_ok: Option<bool>,
}

/// `3(2 + log₂ n)` for pd, `2(5 + log₂ n)` for simple.
pub fn ratio_bound(alg: BatchAlgorithm, n: usize) -> Option<f64> {
    let lg = (n.max(1) as f64).log2();
    match alg {
        BatchAlgorithm::Online(AlgorithmKind::Pd) => Some(3.0 * (2.0 + lg)),
        BatchAlgorithm::Online(AlgorithmKind::Simple) => Some(2.0 * (5.0 + lg)),
        _ => None,
    }
}

/// Least-squares `y = a + b x`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<(f64, f64)> {
    let n = xs.len() as f64;
    if xs.len() < 2 || xs.len() != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let b = sxy / sxx;
    Some((my - b * mx, b))
}

/// Mean and standard error of the mean.
pub fn mean_stderr(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

struct Run {
    cost: f64,
    ok: bool,
}

fn run_one(inst: &Instance, alg: BatchAlgorithm, seed: u64) -> Result<Run> {
    match alg {
        BatchAlgorithm::Online(kind) => {
            let mut a = kind.build(&inst.metric, inst.f, Some(inst.n()), seed);
            let t = run_online(a.as_mut(), inst, Some(seed))?;
            Ok(Run { cost: t.cost, ok: true })
        }
        BatchAlgorithm::Frac => {
            let t = run_frac(&inst.metric, inst.f, &inst.demands, FracMode::Float)?;
            Ok(Run { cost: t.cost, ok: t.audit.ok() })
        }
        BatchAlgorithm::FracPhased => {
            let t = phased_frac(&inst.metric, inst.f, &inst.demands, FracMode::Float)?;
            Ok(Run { cost: t.cost, ok: t.audit.ok() })
        }
    }
}

/// Runs every algorithm on every instance (`trials` seeds for randomized
/// ones, seed `seed + trial`) and returns rows in instance, algorithm,
/// seed order followed by aggregates.
pub fn run_batch(
    instances: &[(String, Instance)],
    algorithms: &[BatchAlgorithm],
    trials: usize,
    seed: u64,
    opt_mode: OptMode,
) -> Result<Vec<BatchRow>> {
    if opt_mode != OptMode::Structural {
        if let Some((id, inst)) = instances.iter().find(|(_, i)| i.distinct_demands().len() > max_exact_n()) {
            return Err(Error::Parameter(format!(
                "instance {id}: {} distinct demands exceed the exact limit {}",
                inst.distinct_demands().len(),
                max_exact_n()
            )));
        }
    }
    let opts: Vec<f64> = par::map(instances, |(_, inst)| opt_value(inst, opt_mode)).into_iter().collect::<Result<_>>()?;

    let mut jobs = Vec::new();
    for (ii, _) in instances.iter().enumerate() {
        for &alg in algorithms {
            let count = if alg.randomized() { trials.max(1) } else { 1 };
            for t in 0..count {
                jobs.push((ii, alg, seed + t as u64));
            }
        }
    }
    let runs: Vec<Run> = par::map(&jobs, |&(ii, alg, s)| run_one(&instances[ii].1, alg, s))
        .into_iter()
        .collect::<Result<_>>()?;

    let mut rows: Vec<BatchRow> = jobs
        .iter()
        .zip(&runs)
        .map(|(&(ii, alg, s), run)| {
            let (id, inst) = &instances[ii];
            let ratio = run.cost / opts[ii];
            let bound = ratio_bound(alg, inst.n());
            let bound_ok = match alg {
                BatchAlgorithm::Frac => Some(run.ok),
                BatchAlgorithm::FracPhased => None,
                _ => bound.map(|b| ratio <= b),
            };
            BatchRow {
                instance_id: id.clone(),
                n: inst.n(),
                algorithm: alg.name().to_string(),
                seed: s.to_string(),
                alg_cost: run.cost,
                opt_cost: opts[ii],
                ratio,
                bound,
                bound_ok,
            }
        })
        .collect();

    // frac rows: fitted ratio trend against log₂ log₂ n
    let (xs, ys): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter(|r| r.algorithm == "frac" && r.n >= 4)
        .map(|r| ((r.n as f64).log2().log2(), r.ratio))
        .unzip();
    if let Some((a, b)) = fit_line(&xs, &ys) {
        for r in rows.iter_mut().filter(|r| r.algorithm == "frac") {
            r.bound = Some(a + b * (r.n.max(4) as f64).log2().log2());
        }
    }

    let mut out = Vec::with_capacity(rows.len());
    let mut i = 0;
    while i < rows.len() {
        let mut j = i;
        while j < rows.len() && rows[j].instance_id == rows[i].instance_id && rows[j].algorithm == rows[i].algorithm {
            j += 1;
        }
        out.extend_from_slice(&rows[i..j]);
        if j - i > 1 {
            let costs: Vec<f64> = rows[i..j].iter().map(|r| r.alg_cost).collect();
            let ratios: Vec<f64> = rows[i..j].iter().map(|r| r.ratio).collect();
            let (mc, sc) = mean_stderr(&costs);
            let (mr, sr) = mean_stderr(&ratios);
            let base = &rows[i];
            out.push(BatchRow {
                seed: "mean".into(),
                alg_cost: mc,
                ratio: mr,
                bound_ok: base.bound.map(|b| mr + 3.0 * sr <= b),
                ..base.clone()
            });
            out.push(BatchRow {
                seed: "stderr".into(),
                alg_cost: sc,
                ratio: sr,
                bound_ok: None,
                ..base.clone()
            });
        }
        i = j;
    }
    Ok(out)
}

/// Writes `# radii <version>`, the fixed header, then the rows.
pub fn write_csv<W: Write>(mut w: W, rows: &[BatchRow]) -> Result<()> {
    let io = |e: std::io::Error| Error::Structural(format!("write failed: {e}"));
    writeln!(w, "# radii {}", env!("CARGO_PKG_VERSION")).map_err(io)?;
    let mut c = csv::Writer::from_writer(w);
    let csv_err = |e: csv::Error| Error::Structural(format!("write failed: {e}"));
    c.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        c.write_record([
            r.instance_id.clone(),
            r.n.to_string(),
            r.algorithm.clone(),
            r.seed.clone(),
            r.alg_cost.to_string(),
            r.opt_cost.to_string(),
            r.ratio.to_string(),
            r.bound.map_or(String::new(), |b| b.to_string()),
            r.bound_ok.map_or(String::new(), |b| b.to_string()),
        ])
        .map_err(csv_err)?;
    }
    c.flush().map_err(io)?;
    Ok(())
}
