//! Replicated experiments and two-model comparisons.

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ModelParams;
use crate::decompose::decompose;
use crate::error::{Error, Result};
use crate::models::ModelSpec;
use crate::multigraph::{connected_components, Multigraph};
use crate::observables::{
    is_metric, observe, DiameterMode, ObservableRecord, ObserveOptions, METRICS,
};
use crate::stats::{ks_two_sample, summarize, KsOutcome, Summary, KS_MIN_SAMPLE};
use crate::stream;

pub const REPORT_VERSION: &str = "1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub model_a: ModelSpec,
    pub model_b: Option<ModelSpec>,
    pub replicas: usize,
    pub seed: u64,
    pub metrics: Vec<String>,
    /// Drop whole-graph replicas whose largest component is not the unique
    /// component with size in [εn, 4εn].
    #[serde(default)]
    pub strict_regime: bool,
    /// Worker cap; `None` uses every core. Never affects results.
    #[serde(default, skip_serializing)]
    pub jobs: Option<usize>,
    /// Use the double-sweep lower bound instead of the exact diameter.
    #[serde(default)]
    pub fast_diameter: bool,
}

impl ExperimentConfig {
    pub fn new(model_a: ModelSpec, replicas: usize, seed: u64, metrics: &[&str]) -> Self {
        ExperimentConfig {
            model_a,
            model_b: None,
            replicas,
            seed,
            metrics: metrics.iter().map(|m| m.to_string()).collect(),
            strict_regime: false,
            jobs: None,
            fast_diameter: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicas == 0 {
            return Err(Error::Config("replicas must be at least 1".into()));
        }
        if self.metrics.is_empty() {
            return Err(Error::Config("at least one metric is required".into()));
        }
        if let Some(bad) = self.metrics.iter().find(|m| !is_metric(m)) {
            return Err(Error::Config(format!(
                "unknown metric {bad:?}; expected one of {}",
                METRICS.join(", ")
            )));
        }
        if self.jobs == Some(0) {
            return Err(Error::Config("jobs must be at least 1".into()));
        }
        self.model_a.validate()?;
        if let Some(b) = &self.model_b {
            b.validate()?;
        }
        Ok(())
    }

    fn observe_options(&self) -> ObserveOptions {
        let mut o = ObserveOptions::for_metrics(&self.metrics);
        if self.fast_diameter && o.diameter == DiameterMode::Exact {
            o.diameter = DiameterMode::Fast;
        }
        o
    }
}

/// Model echo with its resolved analytic constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResolvedModel {
    #[serde(flatten)]
    pub spec: ModelSpec,
    pub p: f64,
    /// Absent when ε ≤ 0.
    pub params: Option<ModelParams>,
    pub warnings: Vec<String>,
}

impl ResolvedModel {
    pub fn new(spec: ModelSpec) -> Self {
        ResolvedModel {
            spec,
            p: spec.p(),
            params: spec.params().ok(),
            warnings: spec.warnings(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub model_a: ResolvedModel,
    pub model_b: Option<ResolvedModel>,
    pub replicas: usize,
    pub seed: u64,
    pub metrics: Vec<String>,
    pub strict_regime: bool,
    pub fast_diameter: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmReport {
    /// Replica index of each record.
    pub replicas: Vec<usize>,
    pub records: Vec<ObservableRecord>,
    /// Regime flag per record, for whole-graph models.
    pub in_regime: Vec<Option<bool>>,
    pub summary: BTreeMap<String, Summary>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub struct Excluded {
    pub a: usize,
    pub b: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timing {
    pub total_seconds: f64,
    pub replica_seconds_a: Vec<f64>,
    pub replica_seconds_b: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub version: String,
    pub config: ConfigEcho,
    pub model_a: ArmReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub model_b: Option<ArmReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tests: Option<BTreeMap<String, KsOutcome>>,
    pub excluded: Excluded,
    pub notes: Vec<String>,
    pub timing: Timing,
}

impl ExperimentReport {
    /// JSON with the timing block zeroed; stable across reruns.
    pub fn deterministic_json(&self) -> Result<String> {
        let mut copy = self.clone();
        copy.timing = Timing::default();
        Ok(serde_json::to_string_pretty(&copy)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per replica per model.
    pub fn to_csv(&self) -> String {
        let mut out = format!("model,replica,{}\n", ObservableRecord::CSV_HEADER);
        let mut arm = |label: &str, a: &ArmReport| {
            for (i, r) in a.replicas.iter().zip(&a.records) {
                out.push_str(&format!("{label},{i},{}\n", r.csv_row()));
            }
        };
        arm("a", &self.model_a);
        if let Some(b) = &self.model_b {
            arm("b", b);
        }
        out
    }
}

struct ReplicaOutcome {
    record: ObservableRecord,
    in_regime: Option<bool>,
    seconds: f64,
}

/// Whether the largest of the component sizes is the unique one in
/// [εn, 4εn].
fn regime_event(g: &Multigraph, spec: &ModelSpec) -> (Vec<usize>, bool) {
    let label = connected_components(g);
    let count = label.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; count];
    for &l in &label {
        sizes[l] += 1;
    }
    let best = (0..count).fold(0, |best, l| if sizes[l] > sizes[best] { l } else { best });
    let lo = spec.eps * spec.n as f64;
    let hi = 4.0 * lo;
    let in_range = |s: usize| (s as f64) >= lo && (s as f64) <= hi;
    let ok = count > 0
        && in_range(sizes[best])
        && (0..count).filter(|&l| in_range(sizes[l])).count() == 1;
    let giant = if count == 0 {
        Vec::new()
    } else {
        (0..g.vertex_count())
            .filter(|&v| label[v] == best)
            .collect()
    };
    (giant, ok)
}

/// Sample, extract the giant for whole-graph models, decompose, observe.
pub fn run_replica(
    spec: &ModelSpec,
    tag: &str,
    seed: u64,
    index: usize,
    options: &ObserveOptions,
) -> Result<(ObservableRecord, Option<bool>)> {
    let mut rng = stream::derive(seed, tag, index as u64);
    let sample = spec.sample(&mut rng)?;
    let (graph, in_regime) = if spec.kind.is_whole_graph() {
        let (giant, ok) = regime_event(&sample.graph, spec);
        (sample.graph.induced_subgraph(&giant), Some(ok))
    } else {
        (sample.graph, None)
    };
    let d = decompose(&graph)?;
    let record = observe(&graph, &d, options, &mut rng)?;
    Ok((record, in_regime))
}

fn run_arm(
    config: &ExperimentConfig,
    spec: &ModelSpec,
    arm: &str,
) -> Result<(ArmReport, usize, Vec<f64>)> {
    let tag = format!("{arm}:{}", spec.kind);
    let options = config.observe_options();
    let results: Vec<Result<ReplicaOutcome>> = (0..config.replicas)
        .into_par_iter()
        .map(|i| {
            let start = Instant::now();
            let (record, in_regime) =
                run_replica(spec, &tag, config.seed, i, &options).map_err(|e| Error::Replica {
                    index: i,
                    source: Box::new(e),
                })?;
            Ok(ReplicaOutcome {
                record,
                in_regime,
                seconds: start.elapsed().as_secs_f64(),
            })
        })
        .collect();
    let mut report = ArmReport {
        replicas: Vec::new(),
        records: Vec::new(),
        in_regime: Vec::new(),
        summary: BTreeMap::new(),
    };
    let mut excluded = 0;
    let mut seconds = Vec::with_capacity(config.replicas);
    for (i, r) in results.into_iter().enumerate() {
        let r = r?;
        seconds.push(r.seconds);
        if config.strict_regime && r.in_regime == Some(false) {
            excluded += 1;
            continue;
        }
        report.replicas.push(i);
        report.records.push(r.record);
        report.in_regime.push(r.in_regime);
    }
    for m in &config.metrics {
        if let Some(s) = summarize(&metric_values(&report.records, m)) {
            report.summary.insert(m.clone(), s);
        }
    }
    Ok((report, excluded, seconds))
}

/// Measured values of `metric` across records, skipping unmeasured ones.
pub fn metric_values(records: &[ObservableRecord], metric: &str) -> Vec<f64> {
    records.iter().filter_map(|r| r.metric(metric)).collect()
}

/// Runs every replica of both arms and assembles the report.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentReport> {
    config.validate()?;
    let start = Instant::now();
    let run = || -> Result<_> {
        let a = run_arm(config, &config.model_a, "a")?;
        let b = match &config.model_b {
            Some(spec) => Some(run_arm(config, spec, "b")?),
            None => None,
        };
        Ok((a, b))
    };
    let ((arm_a, excluded_a, secs_a), b) = match config.jobs {
        Some(jobs) => rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::Config(format!("cannot start worker pool: {e}")))?
            .install(run)?,
        None => run()?,
    };
    let mut notes = vec![
        "cross-model tolerances are calibration choices; p-values are raw and uncorrected"
            .to_string(),
    ];
    let mut tests = None;
    let mut excluded = Excluded {
        a: excluded_a,
        b: 0,
    };
    let mut secs_b = Vec::new();
    let model_b = b.map(|(arm_b, excluded_b, s)| {
        excluded.b = excluded_b;
        secs_b = s;
        let mut t = BTreeMap::new();
        for m in &config.metrics {
            let xs = metric_values(&arm_a.records, m);
            let ys = metric_values(&arm_b.records, m);
            if xs.len() >= KS_MIN_SAMPLE && ys.len() >= KS_MIN_SAMPLE {
                if let Ok(outcome) = ks_two_sample(&xs, &ys) {
                    t.insert(m.clone(), outcome);
                }
            } else {
                notes.push(format!(
                    "{m}: fewer than {KS_MIN_SAMPLE} values in an arm, no KS test"
                ));
            }
        }
        tests = Some(t);
        arm_b
    });
    if config.fast_diameter && config.metrics.iter().any(|m| m == "diameter") {
        notes.push("diameter values are double-sweep lower bounds".into());
    }
    Ok(ExperimentReport {
        version: REPORT_VERSION.into(),
        config: ConfigEcho {
            model_a: ResolvedModel::new(config.model_a),
            model_b: config.model_b.map(ResolvedModel::new),
            replicas: config.replicas,
            seed: config.seed,
            metrics: config.metrics.clone(),
            strict_regime: config.strict_regime,
            fast_diameter: config.fast_diameter,
        },
        model_a: arm_a,
        model_b,
        tests,
        excluded,
        notes,
        timing: Timing {
            total_seconds: start.elapsed().as_secs_f64(),
            replica_seconds_a: secs_a,
            replica_seconds_b: secs_b,
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelKind;

    #[test]
    fn single_replica_summary_equals_record() {
        let spec = ModelSpec::with_p(ModelKind::Gnp, 10, 0.05);
        let config = ExperimentConfig::new(spec, 1, 3, &["component_size"]);
        let r = run_experiment(&config).unwrap();
        assert_eq!(r.model_a.records.len(), 1);
        let s = &r.model_a.summary["component_size"];
        let v = r.model_a.records[0].component_size as f64;
        assert_eq!((s.mean, s.min, s.max, s.median), (v, v, v, v));
        assert!(r.tests.is_none());
    }

    #[test]
    fn deterministic_across_jobs() {
        let spec = ModelSpec::new(ModelKind::Gnp, 2000, 0.3);
        let mut config = ExperimentConfig::new(spec, 6, 9, &["core_size", "diameter"]);
        config.model_b = Some(ModelSpec::new(ModelKind::PoissonCloning, 2000, 0.3));
        config.jobs = Some(1);
        let one = run_experiment(&config)
            .unwrap()
            .deterministic_json()
            .unwrap();
        config.jobs = Some(3);
        let three = run_experiment(&config)
            .unwrap()
            .deterministic_json()
            .unwrap();
        assert_eq!(one, three);
        assert!(one.contains("\"tests\""));
    }

    #[test]
    fn rejects_bad_config() {
        let spec = ModelSpec::new(ModelKind::Gnp, 100, 0.1);
        assert!(matches!(
            run_experiment(&ExperimentConfig::new(spec, 1, 0, &["nope"])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_experiment(&ExperimentConfig::new(spec, 0, 0, &["core_size"])),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_experiment(&ExperimentConfig::new(spec, 1, 0, &[])),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn strict_regime_counts_exclusions() {
        // far below criticality the largest component is tiny
        let spec = ModelSpec::new(ModelKind::Gnp, 500, 0.01);
        let mut config = ExperimentConfig::new(spec, 5, 1, &["component_size"]);
        config.strict_regime = true;
        let r = run_experiment(&config).unwrap();
        assert_eq!(r.excluded.a + r.model_a.records.len(), 5);
        let csv = r.to_csv();
        assert_eq!(csv.lines().count(), r.model_a.records.len() + 1);
    }
}
