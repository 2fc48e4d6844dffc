use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::Experiment;
use super::HarnessError;
use crate::bounds::{self, InstanceSummary};
use crate::env::Environment;
use crate::policy::{Agent, PolicyKind};
use crate::spread::SpreadPmf;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub t: usize,
    pub pseudo_regret: f64,
    pub arm_pulls: Vec<u64>,
}

/// Pseudo-regret and pull counts of one seeded run, recorded every `stride`
/// rounds (and at the horizon).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretTrace {
    pub policy: String,
    pub seed: u64,
    pub config_hash: String,
    pub stride: usize,
    pub points: Vec<TracePoint>,
}

impl RegretTrace {
    pub fn final_point(&self) -> Option<&TracePoint> {
        self.points.last()
    }

    /// Pseudo-regret at the last recorded round.
    pub fn pseudo_regret(&self, instance: &InstanceSummary<f64>) -> f64 {
        self.final_point()
            .map(|p| bounds::pseudo_regret(&p.arm_pulls, instance))
            .unwrap_or(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Asymptotic lower-bound coefficient on `R_T / ln T` (constant in t).
    LowerRate,
    /// Upper bound on pseudo-regret after t rounds.
    UpperRegret,
}

impl BoundKind {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundKind::LowerRate => "lower_rate",
            BoundKind::UpperRegret => "upper_regret",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub t: usize,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundCurve {
    /// `config` for the configured PMF, `uniform` for the alpha-smooth one.
    pub pmf: String,
    pub bound_kind: BoundKind,
    /// Set when the lower bound degenerated (optimal mean at the global cap).
    #[serde(default)]
    pub vacuous: bool,
    pub points: Vec<BoundPoint>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryPoint {
    pub t: usize,
    pub mean: f64,
    pub stddev: f64,
}

/// Mean and sample standard deviation of pseudo-regret across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegretSummary {
    pub policy: String,
    pub config_hash: String,
    pub runs: usize,
    pub points: Vec<SummaryPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub schema: String,
    pub config_hash: String,
    pub traces: Vec<RegretTrace>,
    pub bounds: Vec<BoundCurve>,
    #[serde(default)]
    pub summaries: Vec<RegretSummary>,
}

/// One run of `policy` against the environment seeded with `seed`.
pub fn run_single(exp: &Experiment, policy: PolicyKind, seed: u64) -> Result<RegretTrace, HarnessError> {
    let instance = &exp.instance;
    let summary = InstanceSummary::from_instance(instance)?;
    let mut env = Environment::new(instance.clone(), exp.pmf.clone(), seed)?;
    let mut agent = Agent::new(
        policy,
        exp.pmf.clone(),
        instance.partition(),
        instance.arm_caps(),
        seed,
    )?;
    let horizon = instance.horizon();
    let mut points = Vec::with_capacity(horizon / exp.stride + 1);
    for t in 1..=horizon {
        let arm = agent.choose(t)?;
        agent.record_pull(t, arm)?;
        env.pull(t, arm)?;
        let observations = env.observe_round(t)?;
        agent.update(t, &observations)?;
        if t % exp.stride == 0 || t == horizon {
            let pulls = agent.state().pull_counts().to_vec();
            points.push(TracePoint {
                t,
                pseudo_regret: bounds::pseudo_regret(&pulls, &summary),
                arm_pulls: pulls,
            });
        }
    }
    Ok(RegretTrace {
        policy: policy.name().to_string(),
        seed,
        config_hash: exp.config_hash.clone(),
        stride: exp.stride,
        points,
    })
}

/// Bound curves over the recorded rounds: for the configured PMF, and for the
/// uniform PMF when `tp-ucb-fr` is among the policies.
pub fn bound_curves(exp: &Experiment, ts: &[usize]) -> Result<Vec<BoundCurve>, HarnessError> {
    let summary = InstanceSummary::from_instance(&exp.instance)?;
    let mut pmfs = vec![("config", exp.pmf.clone())];
    if exp.policies.contains(&PolicyKind::TpUcbFr) && !exp.pmf.is_uniform() {
        pmfs.push(("uniform", SpreadPmf::uniform(exp.pmf.alpha())?));
    }
    let mut curves = Vec::new();
    for (label, pmf) in pmfs {
        let lower = bounds::lower_bound_rate(&summary, &pmf)?;
        curves.push(BoundCurve {
            pmf: label.to_string(),
            bound_kind: BoundKind::LowerRate,
            vacuous: lower.vacuous,
            points: ts
                .iter()
                .map(|&t| BoundPoint {
                    t,
                    value: lower.coefficient,
                })
                .collect(),
        });
        let upper = ts
            .iter()
            .filter(|&&t| t >= 2)
            .map(|&t| {
                Ok(BoundPoint {
                    t,
                    value: bounds::upper_bound_regret(&summary, &pmf, t)?,
                })
            })
            .collect::<Result<Vec<_>, HarnessError>>()?;
        curves.push(BoundCurve {
            pmf: label.to_string(),
            bound_kind: BoundKind::UpperRegret,
            vacuous: false,
            points: upper,
        });
    }
    Ok(curves)
}

/// Runs every (policy, seed) pair. Any failing run fails the experiment.
pub fn run_experiment(exp: &Experiment) -> Result<ExperimentOutput, HarnessError> {
    let jobs: Vec<(PolicyKind, u64)> = exp
        .policies
        .iter()
        .flat_map(|&p| exp.seeds.iter().map(move |&s| (p, s)))
        .collect();
    let traces = jobs
        .par_iter()
        .map(|&(p, s)| run_single(exp, p, s))
        .collect::<Result<Vec<_>, _>>()?;

    let ts: Vec<usize> = traces
        .first()
        .map(|tr| tr.points.iter().map(|p| p.t).collect())
        .unwrap_or_default();
    let bounds = bound_curves(exp, &ts)?;

    let mut summaries = Vec::new();
    if exp.seeds.len() >= 2 {
        for p in &exp.policies {
            let group: Vec<RegretTrace> = traces
                .iter()
                .filter(|tr| tr.policy == p.name())
                .cloned()
                .collect();
            summaries.push(aggregate(&group)?);
        }
    }
    Ok(ExperimentOutput {
        schema: super::SCHEMA.to_string(),
        config_hash: exp.config_hash.clone(),
        traces,
        bounds,
        summaries,
    })
}

/// Pointwise mean and sample standard deviation across the traces of one
/// policy. Traces must share policy, config hash and recorded rounds.
pub fn aggregate(traces: &[RegretTrace]) -> Result<RegretSummary, HarnessError> {
    let agg = |msg: String| HarnessError::Aggregation(msg);
    let first = match traces {
        [] | [_] => return Err(agg(format!("need at least 2 traces, got {}", traces.len()))),
        [first, ..] => first,
    };
    for tr in &traces[1..] {
        if tr.policy != first.policy {
            return Err(agg(format!("mixed policies `{}` and `{}`", first.policy, tr.policy)));
        }
        if tr.config_hash != first.config_hash {
            return Err(agg(format!(
                "traces come from different configs ({} vs {})",
                first.config_hash, tr.config_hash
            )));
        }
        let same_rounds = tr.stride == first.stride
            && tr.points.len() == first.points.len()
            && tr.points.iter().zip(&first.points).all(|(a, b)| a.t == b.t);
        if !same_rounds {
            return Err(agg(format!(
                "seed {} records different rounds than seed {}",
                tr.seed, first.seed
            )));
        }
    }
    let n = traces.len() as f64;
    let points = (0..first.points.len())
        .map(|i| {
            let mean = traces.iter().map(|tr| tr.points[i].pseudo_regret).sum::<f64>() / n;
            let var = traces
                .iter()
                .map(|tr| (tr.points[i].pseudo_regret - mean).powi(2))
                .sum::<f64>()
                / (n - 1.0);
            SummaryPoint {
                t: first.points[i].t,
                mean,
                stddev: var.sqrt(),
            }
        })
        .collect();
    Ok(RegretSummary {
        policy: first.policy.clone(),
        config_hash: first.config_hash.clone(),
        runs: traces.len(),
        points,
    })
}
