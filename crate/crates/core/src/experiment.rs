//! Config-driven experiments behind the `bai` binary.
//!
//! A run is described by an [`ExperimentConfig`] read from TOML; command
//! line flags override individual fields. Every renderer returns the whole
//! output document as a string. CSV output starts with a `# config: {...}`
//! comment line holding the resolved config as JSON. JSON output carries it
//! under `"config"`. Real numbers in CSV use 17 significant digits; JSON
//! uses the shortest representation that round-trips exactly.
//!
//! ```toml
//! policies = ["successive-rejects", "uniform"]
//! instance = [0.0, 0.0, 0.5]
//! horizons = [30, 60, 90]
//! reps = 100000
//! seed = 7
//!
//! [dp]
//! quadrature_order = 16
//!
//! [[states]]
//! label = "symmetric"
//! means = [0.0, 0.0]
//! counts = [1, 1]
//! budget = 2
//!
//! [[w_states]]
//! horizon = 9
//! c_u = 3.0
//! n12 = 2
//! budget = 3
//!
//! [event]
//! horizons = [11, 101]
//! c_u = 2.0
//! delta_g = 0.5
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bellman::{exact_loss, BellmanResult, DpConfig};
use crate::error::{Error, Result};
use crate::model::{Arm, BeliefState, Instance, PriorMode, Seed};
use crate::policies::{policy_by_name, POLICY_NAMES};
use crate::simulate::{self, bayesian_regret, frequentist_regret, ArmPrior, MonteCarlo};

/// EBI entries closer than this are reported as equal.
pub const EBI_EQUAL_TOLERANCE: f64 = 1e-10;

// Streams of consecutive event horizons start this far apart.
const STREAM_STRIDE: u64 = 1 << 40;

/// Per-arm Gaussian prior for Bayesian regret curves.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriorSpec {
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl PriorSpec {
    pub fn arms(&self) -> Result<Vec<ArmPrior>> {
        if self.means.len() != self.variances.len() {
            return Err(Error::Config(format!(
                "prior has {} means but {} variances",
                self.means.len(),
                self.variances.len()
            )));
        }
        self.means
            .iter()
            .zip(&self.variances)
            .map(|(&m, &v)| ArmPrior::new(m, v))
            .collect()
    }
}

/// A belief state to probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StateSpec {
    #[serde(default)]
    pub label: String,
    pub means: Vec<f64>,
    pub counts: Vec<u32>,
    pub budget: usize,
}

/// A starvation state to probe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WStateSpec {
    pub horizon: usize,
    pub c_u: f64,
    pub n12: u32,
    pub budget: usize,
}

/// Event-probe grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EventSpec {
    pub horizons: Vec<usize>,
    pub c_u: f64,
    pub delta_g: f64,
}

fn default_reps() -> u64 {
    10_000
}

fn one() -> usize {
    1
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub policies: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<Instance>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub prior: Option<PriorSpec>,
    #[serde(default)]
    pub horizons: Vec<usize>,
    #[serde(default = "default_reps")]
    pub reps: u64,
    #[serde(default)]
    pub seed: u64,
    /// Worker threads; results do not depend on it, so it is left out of
    /// the provenance header.
    #[serde(default = "one", skip_serializing)]
    pub workers: usize,
    #[serde(default)]
    pub prior_mode: PriorMode,
    #[serde(default)]
    pub dp: DpConfig,
    /// Output file; stdout when absent. Not part of the provenance header.
    #[serde(default, skip_serializing)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub states: Vec<StateSpec>,
    #[serde(default)]
    pub w_states: Vec<WStateSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub event: Option<EventSpec>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            policies: Vec::new(),
            instance: None,
            prior: None,
            horizons: Vec::new(),
            reps: default_reps(),
            seed: 0,
            workers: 1,
            prior_mode: PriorMode::default(),
            dp: DpConfig::default(),
            out: None,
            states: Vec::new(),
            w_states: Vec::new(),
            event: None,
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Resolved config as one line of JSON.
    pub fn provenance(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }

    fn check_common(&self) -> Result<()> {
        if self.reps == 0 {
            return Err(Error::Config("reps must be at least 1".into()));
        }
        if self.workers == 0 {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        self.dp.validate()
    }

    fn check_regret(&self) -> Result<()> {
        self.check_common()?;
        if self.policies.is_empty() {
            return Err(Error::Config("no policies given".into()));
        }
        for name in &self.policies {
            if !POLICY_NAMES.contains(&name.as_str()) {
                return Err(Error::UnknownPolicy(name.clone()));
            }
        }
        match (&self.instance, &self.prior) {
            (Some(_), Some(_)) => {
                return Err(Error::Config("give either an instance or a prior, not both".into()))
            }
            (None, None) => return Err(Error::Config("an instance or a prior is required".into())),
            _ => {}
        }
        check_grid(&self.horizons, "horizons")
    }
}

fn check_grid(grid: &[usize], what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config(format!("{what} must not be empty")));
    }
    if grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::Config(format!("{what} must be strictly ascending")));
    }
    Ok(())
}

/// Formats a real with 17 significant digits.
pub fn fmt_real(x: f64) -> String {
    format!("{x:.16e}")
}

fn csv_document(cfg: &ExperimentConfig, header: &[&str], rows: Vec<Vec<String>>) -> Result<String> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    writer.write_record(header).map_err(|e| Error::Io(e.to_string()))?;
    for row in rows {
        writer.write_record(&row).map_err(|e| Error::Io(e.to_string()))?;
    }
    let body = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    let body = String::from_utf8(body).expect("csv output is utf-8");
    Ok(format!("# config: {}\n{body}", cfg.provenance()))
}

/// One row per (policy, T): `policy,T,reps,regret_mean,regret_se,seed,status`.
///
/// With an `instance` the regret is frequentist, with a `prior` Bayesian.
/// Every row uses the same seed. Rows a policy cannot run (capacity,
/// arity) keep empty numbers and the error in `status`.
pub fn regret_curve(cfg: &ExperimentConfig) -> Result<String> {
    cfg.check_regret()?;
    let prior = cfg.prior.as_ref().map(PriorSpec::arms).transpose()?;
    let mc = MonteCarlo::new(cfg.reps, Seed::new(cfg.seed, 0))
        .workers(cfg.workers)
        .prior_mode(cfg.prior_mode.clone());
    let mut rows = Vec::new();
    for name in &cfg.policies {
        let policy = policy_by_name(name, &cfg.dp)?;
        for &horizon in &cfg.horizons {
            let estimate = match (&cfg.instance, &prior) {
                (Some(instance), _) => frequentist_regret(policy.as_ref(), instance, horizon, &mc),
                (None, Some(prior)) => bayesian_regret(policy.as_ref(), prior, horizon, &mc),
                (None, None) => unreachable!("checked above"),
            };
            let row = match estimate {
                Ok(r) => vec![
                    name.clone(),
                    horizon.to_string(),
                    r.reps.to_string(),
                    fmt_real(r.mean),
                    fmt_real(r.std_error),
                    cfg.seed.to_string(),
                    "ok".into(),
                ],
                Err(err @ (Error::Capacity { .. } | Error::UnsupportedArity { .. } | Error::InvalidBudget(_))) => vec![
                    name.clone(),
                    horizon.to_string(),
                    cfg.reps.to_string(),
                    String::new(),
                    String::new(),
                    cfg.seed.to_string(),
                    format!("error: {err}"),
                ],
                Err(err) => return Err(err),
            };
            rows.push(row);
        }
    }
    csv_document(
        cfg,
        &["policy", "T", "reps", "regret_mean", "regret_se", "seed", "status"],
        rows,
    )
}

/// Starvation-specific part of a probe record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WStateInfo {
    pub horizon: usize,
    pub c_u: f64,
    pub n12: u32,
    /// `B_3 < min(B_1, B_2)`.
    pub arm3_below_others: bool,
}

/// One probed state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRecord {
    pub label: String,
    pub means: Vec<f64>,
    pub counts: Vec<u32>,
    pub budget: usize,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss_one_fewer: Option<f64>,
    pub arm_losses: Vec<f64>,
    pub ebi: Vec<f64>,
    pub chosen_arm: Option<Arm>,
    pub quadrature_order: usize,
    pub nodes_evaluated: u64,
    /// All EBI entries agree within [`EBI_EQUAL_TOLERANCE`]; absent at budget 0.
    pub ebi_equal_within_tolerance: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub w_state: Option<WStateInfo>,
}

impl ProbeRecord {
    fn new(label: String, means: Vec<f64>, counts: Vec<u32>, budget: usize, dp: &DpConfig) -> Self {
        ProbeRecord {
            label,
            means,
            counts,
            budget,
            status: "ok".into(),
            error: None,
            loss: None,
            loss_one_fewer: None,
            arm_losses: Vec::new(),
            ebi: Vec::new(),
            chosen_arm: None,
            quadrature_order: dp.quadrature_order,
            nodes_evaluated: 0,
            ebi_equal_within_tolerance: None,
            w_state: None,
        }
    }

    fn fill(&mut self, outcome: Result<BellmanResult>) {
        match outcome {
            Ok(r) => {
                self.loss = Some(r.loss);
                self.loss_one_fewer = r.loss_one_fewer;
                self.ebi_equal_within_tolerance = (!r.ebi.is_empty()).then(|| {
                    let hi = r.ebi.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let lo = r.ebi.iter().copied().fold(f64::INFINITY, f64::min);
                    hi - lo <= EBI_EQUAL_TOLERANCE
                });
                self.arm_losses = r.arm_losses;
                self.ebi = r.ebi;
                self.chosen_arm = r.chosen_arm;
                self.nodes_evaluated = r.nodes_evaluated;
            }
            Err(err) => {
                self.status = "error".into();
                self.error = Some(err.to_string());
            }
        }
    }
}

#[derive(Serialize)]
struct ProbeDocument<'a> {
    config: &'a ExperimentConfig,
    probes: Vec<ProbeRecord>,
}

/// Solves every configured state and starvation state. Failures are
/// recorded per state.
pub fn ebi_probe_records(cfg: &ExperimentConfig) -> Result<Vec<ProbeRecord>> {
    cfg.check_common()?;
    if cfg.states.is_empty() && cfg.w_states.is_empty() {
        return Err(Error::Config("no states or w_states to probe".into()));
    }
    let mut records = Vec::new();
    for (i, s) in cfg.states.iter().enumerate() {
        let label = if s.label.is_empty() { format!("state-{}", i + 1) } else { s.label.clone() };
        let mut rec = ProbeRecord::new(label, s.means.clone(), s.counts.clone(), s.budget, &cfg.dp);
        let horizon = s.counts.iter().map(|&n| n as usize).sum::<usize>() + s.budget;
        rec.fill(
            BeliefState::from_means(&s.means, &s.counts, horizon)
                .and_then(|b| exact_loss(&b, s.budget, &cfg.dp)),
        );
        records.push(rec);
    }
    for w in &cfg.w_states {
        let label = format!("w-state T={} C_U={} n12={}", w.horizon, w.c_u, w.n12);
        match simulate::construct_w_state(w.horizon, w.c_u, w.n12) {
            Ok(belief) => {
                let means: Vec<f64> = belief
                    .arms()
                    .iter()
                    .map(|a| a.empirical_mean().unwrap_or(0.0))
                    .collect();
                let counts: Vec<u32> = belief.arms().iter().map(|a| a.pulls()).collect();
                let mut rec = ProbeRecord::new(label, means, counts, w.budget, &cfg.dp);
                rec.fill(exact_loss(&belief, w.budget, &cfg.dp));
                let below = rec.ebi.len() == 3 && rec.ebi[2] < rec.ebi[0].min(rec.ebi[1]);
                rec.w_state = Some(WStateInfo {
                    horizon: w.horizon,
                    c_u: w.c_u,
                    n12: w.n12,
                    arm3_below_others: below,
                });
                records.push(rec);
            }
            Err(err) => {
                let mut rec = ProbeRecord::new(label, Vec::new(), Vec::new(), w.budget, &cfg.dp);
                rec.fill(Err(err));
                records.push(rec);
            }
        }
    }
    Ok(records)
}

/// JSON document with the config and one record per probed state.
pub fn ebi_probe(cfg: &ExperimentConfig) -> Result<String> {
    let probes = ebi_probe_records(cfg)?;
    let mut text = serde_json::to_string_pretty(&ProbeDocument { config: cfg, probes })
        .map_err(|e| Error::Io(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

/// Event-probe CSV: four rows per horizon (underestimation exact;
/// closeness, drift with the stated constant 4 and with 3 by Monte Carlo).
pub fn event_probe(cfg: &ExperimentConfig) -> Result<String> {
    cfg.check_common()?;
    let spec = cfg
        .event
        .as_ref()
        .ok_or_else(|| Error::Config("an [event] section is required".into()))?;
    check_grid(&spec.horizons, "event horizons")?;
    let mut rows = Vec::new();
    for (i, &horizon) in spec.horizons.iter().enumerate() {
        let seed = Seed::new(cfg.seed, i as u64 * STREAM_STRIDE);
        let r = simulate::event_probes(horizon, spec.c_u, spec.delta_g, cfg.reps, seed, cfg.workers)?;
        let lead = |event: &str| {
            vec![
                event.to_string(),
                horizon.to_string(),
                fmt_real(spec.c_u),
                fmt_real(spec.delta_g),
            ]
        };
        let mut row = lead("underestimation");
        row.extend([
            String::new(),
            "exact".into(),
            fmt_real(r.underestimation.probability),
            fmt_real(r.underestimation.log_probability),
            String::new(),
            fmt_real(r.underestimation.bound),
            fmt_real(r.underestimation.log_bound),
            r.underestimation.holds.to_string(),
        ]);
        rows.push(row);
        for (event, probe) in [
            ("close", &r.close),
            ("drift", &r.drift),
            ("drift-proof-constant", &r.drift_tight),
        ] {
            let mut row = lead(event);
            row.extend([
                cfg.reps.to_string(),
                "monte-carlo".into(),
                fmt_real(probe.probability),
                fmt_real(probe.probability.ln()),
                fmt_real(probe.std_error),
                fmt_real(probe.bound),
                fmt_real(probe.bound.ln()),
                probe.holds.to_string(),
            ]);
            rows.push(row);
        }
    }
    csv_document(
        cfg,
        &[
            "event",
            "T",
            "c_u",
            "delta_g",
            "reps",
            "kind",
            "probability",
            "log_probability",
            "std_error",
            "bound",
            "log_bound",
            "pass",
        ],
        rows,
    )
}

/// Writes `text` to `path`, or stdout when `path` is `None`.
pub fn emit(text: &str, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn regret_cfg() -> ExperimentConfig {
        ExperimentConfig::from_toml_str(
            r#"
            policies = ["successive-rejects", "uniform"]
            instance = [0.0, 0.0, 0.5]
            horizons = [30, 60]
            reps = 300
            seed = 9
            "#,
        )
        .unwrap()
    }

    #[test]
    fn regret_curve_shape_and_determinism() {
        let cfg = regret_cfg();
        let a = regret_curve(&cfg).unwrap();
        let lines: Vec<&str> = a.lines().collect();
        assert!(lines[0].starts_with("# config: {"));
        assert_eq!(lines[1], "policy,T,reps,regret_mean,regret_se,seed,status");
        assert_eq!(lines.len(), 2 + 4);
        assert!(!a.contains('\r'));
        let mut four = cfg.clone();
        four.workers = 4;
        assert_eq!(a, regret_curve(&four).unwrap());
    }

    #[test]
    fn capacity_is_reported_per_row() {
        let mut cfg = regret_cfg();
        cfg.policies = vec!["bayes-optimal".into()];
        cfg.instance = Some(Instance::new(vec![0.0, 0.5]).unwrap());
        cfg.horizons = vec![4, 30];
        cfg.reps = 50;
        let text = regret_curve(&cfg).unwrap();
        let rows: Vec<&str> = text.lines().skip(2).collect();
        assert!(rows[0].ends_with(",ok"), "{}", rows[0]);
        assert!(rows[1].contains("error: exact recursion capacity exceeded"), "{}", rows[1]);
    }

    #[test]
    fn config_validation() {
        let mut cfg = regret_cfg();
        cfg.horizons = vec![60, 30];
        assert!(matches!(regret_curve(&cfg), Err(Error::Config(_))));
        let mut cfg = regret_cfg();
        cfg.policies.push("thompson".into());
        assert!(matches!(regret_curve(&cfg), Err(Error::UnknownPolicy(_))));
        assert!(ExperimentConfig::from_toml_str("bogus = 1").is_err());
    }

    #[test]
    fn ebi_probe_examples() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            [[states]]
            label = "symmetric"
            means = [0.0, 0.0]
            counts = [1, 1]
            budget = 2

            [[states]]
            label = "terminal"
            means = [0.0, 0.3]
            counts = [2, 1]
            budget = 0

            [[states]]
            label = "too-deep"
            means = [0.0, 0.3]
            counts = [2, 1]
            budget = 9

            [[w_states]]
            horizon = 9
            c_u = 3.0
            n12 = 2
            budget = 2
            "#,
        )
        .unwrap();
        let recs = ebi_probe_records(&cfg).unwrap();
        assert_eq!(recs[0].ebi_equal_within_tolerance, Some(true));
        assert!(recs[1].loss.is_some() && recs[1].ebi.is_empty());
        assert_eq!(recs[2].status, "error");
        assert!(recs[3].w_state.as_ref().unwrap().arm3_below_others);
        let doc: serde_json::Value = serde_json::from_str(&ebi_probe(&cfg).unwrap()).unwrap();
        assert_eq!(doc["probes"].as_array().unwrap().len(), 4);
        assert_eq!(doc["config"]["dp"]["quadrature_order"], 16);
    }

    #[test]
    fn event_probe_rows() {
        let cfg = ExperimentConfig::from_toml_str(
            r#"
            reps = 2000
            [event]
            horizons = [11, 21]
            c_u = 2.0
            delta_g = 0.5
            "#,
        )
        .unwrap();
        let text = event_probe(&cfg).unwrap();
        assert_eq!(text.lines().count(), 2 + 8);
        let first = text.lines().nth(2).unwrap();
        assert!(first.starts_with("underestimation,11,") && first.ends_with(",true"));
    }
}
