//! Flat run configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::generator::{preset, BucketMetric, DatasetKind, GenParams};
use crate::llm::{ModelConfig, RetryPolicy};
use crate::logic_verifier::FolBudget;
use crate::pipeline::PipelineConfig;
use crate::vocabulary::{VocabMode, VocabParams};

/// Every key is optional; unset keys take the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    // Dataset source: an existing dataset file, or generation parameters.
    pub dataset: Option<PathBuf>,
    pub kind: Option<String>,
    pub grammar_file: Option<PathBuf>,
    pub preset: Option<String>,
    pub depth: Option<usize>,
    pub branching: Option<usize>,
    pub sample_count: Option<usize>,
    pub metric: Option<String>,
    pub batches: Option<usize>,
    pub ksat_width: Option<usize>,
    pub seed: u64,
    pub gzip: bool,

    // Vocabulary.
    pub num_propositions: Option<usize>,
    pub num_predicates: Option<usize>,
    pub num_objects: Option<usize>,
    pub min_arity: Option<usize>,
    pub max_arity: Option<usize>,
    pub free_variable_prob: Option<f64>,
    pub alphabet_size: Option<usize>,
    pub vocab_seed: Option<u64>,

    // Model access.
    pub endpoint: String,
    pub model: String,
    /// Several models sharing the endpoint; overrides `model`.
    pub models: Vec<String>,
    pub temperature: Option<f64>,
    pub max_tokens: Option<u32>,
    pub timeout_secs: Option<u64>,
    pub max_attempts: Option<u32>,
    pub backoff_base_ms: Option<u64>,
    pub api_key_env: Option<String>,
    pub max_concurrent: Option<usize>,
    pub requests_per_minute: Option<f64>,
    pub audit_log: Option<PathBuf>,

    // Pipeline.
    pub shots: u8,
    pub rounds: usize,
    pub workers: usize,
    pub token_budget: Option<usize>,
    pub fol_max_model_size: Option<usize>,
    pub fol_max_proof_steps: Option<usize>,
    pub fol_timeout_secs: Option<f64>,

    // Outputs and analysis.
    pub output_dir: PathBuf,
    pub report_metric: Option<String>,
    /// Evaluation results the judge task draws its pairs from.
    pub judge_source: Option<PathBuf>,
    pub score_table: Option<PathBuf>,
    /// Buckets above this value are left out of per-model scores.
    pub complexity_cutoff: Option<f64>,
    pub strict_power: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            dataset: None,
            kind: None,
            grammar_file: None,
            preset: None,
            depth: None,
            branching: None,
            sample_count: None,
            metric: None,
            batches: None,
            ksat_width: None,
            seed: 0,
            gzip: false,
            num_propositions: None,
            num_predicates: None,
            num_objects: None,
            min_arity: None,
            max_arity: None,
            free_variable_prob: None,
            alphabet_size: None,
            vocab_seed: None,
            endpoint: "mock".into(),
            model: "perfect-oracle".into(),
            models: Vec::new(),
            temperature: None,
            max_tokens: None,
            timeout_secs: None,
            max_attempts: None,
            backoff_base_ms: None,
            api_key_env: None,
            max_concurrent: None,
            requests_per_minute: None,
            audit_log: None,
            shots: 0,
            rounds: 1,
            workers: 0,
            token_budget: None,
            fol_max_model_size: None,
            fol_max_proof_steps: None,
            fol_timeout_secs: None,
            output_dir: PathBuf::from("out"),
            report_metric: None,
            judge_source: None,
            score_table: None,
            complexity_cutoff: None,
            strict_power: false,
        }
    }
}

impl RunConfig {
    /// Reads a `.json` file as JSON and anything else as TOML. Relative
    /// paths inside the file are resolved against its directory.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        let mut cfg: RunConfig = if path.extension().is_some_and(|e| e == "json") {
            serde_json::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
        } else {
            toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?
        };
        if let Some(base) = path.parent() {
            cfg.resolve_paths(base);
        }
        Ok(cfg)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        for p in [&mut self.dataset, &mut self.grammar_file, &mut self.audit_log, &mut self.judge_source, &mut self.score_table]
            .into_iter()
            .flatten()
        {
            fix(p);
        }
        fix(&mut self.output_dir);
    }

    pub fn generates(&self) -> bool {
        self.kind.is_some() || self.grammar_file.is_some()
    }

    /// Exactly one dataset source must be configured.
    pub fn check_source(&self) -> Result<(), HarnessError> {
        match (self.dataset.is_some(), self.generates()) {
            (true, true) => Err(HarnessError::Config("set either `dataset` or generation keys (`kind`/`grammar_file`), not both".into())),
            (false, false) => Err(HarnessError::Config("no dataset source: set `dataset` or `kind`".into())),
            _ => Ok(()),
        }
    }

    pub fn dataset_kind(&self) -> Result<DatasetKind, HarnessError> {
        match (&self.kind, &self.grammar_file) {
            (Some(k), _) => k.parse().map_err(|e: crate::generator::GenError| HarnessError::Config(e.to_string())),
            (None, Some(_)) => Ok(DatasetKind::Custom),
            (None, None) => Err(HarnessError::Config("`kind` is not set".into())),
        }
    }

    pub fn gen_params(&self) -> Result<(GenParams, usize), HarnessError> {
        let (mut gp, mut batches) = match &self.preset {
            Some(name) => preset(name).ok_or_else(|| HarnessError::Config(format!("unknown preset `{name}`")))?,
            None => (GenParams::desk(), 10),
        };
        gp.depth = self.depth.unwrap_or(gp.depth);
        gp.n = self.branching.unwrap_or(gp.n);
        gp.sample_count = self.sample_count.unwrap_or(gp.sample_count);
        gp.ksat_width = self.ksat_width.unwrap_or(gp.ksat_width);
        gp.seed = self.seed;
        if let Some(m) = &self.metric {
            gp.metric = m.parse().map_err(|e: crate::generator::GenError| HarnessError::Config(e.to_string()))?;
        }
        batches = self.batches.unwrap_or(batches);
        gp.validate().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok((gp, batches))
    }

    pub fn vocab_params(&self, kind: DatasetKind) -> VocabParams {
        let d = VocabParams::default();
        VocabParams {
            num_propositions: self.num_propositions.unwrap_or(d.num_propositions),
            num_predicates: self.num_predicates.unwrap_or(d.num_predicates),
            num_objects: self.num_objects.unwrap_or(d.num_objects),
            min_arity: self.min_arity.unwrap_or(d.min_arity),
            max_arity: self.max_arity.unwrap_or(d.max_arity),
            free_variable_prob: self.free_variable_prob.unwrap_or(d.free_variable_prob),
            alphabet_size: self.alphabet_size.unwrap_or(d.alphabet_size),
            mode: if kind == DatasetKind::FolEnglish { VocabMode::English } else { VocabMode::Synthetic },
            seed: self.vocab_seed.unwrap_or(self.seed),
        }
    }

    pub fn model_names(&self) -> Vec<String> {
        if self.models.is_empty() {
            vec![self.model.clone()]
        } else {
            self.models.clone()
        }
    }

    pub fn model_config(&self, name: &str) -> ModelConfig {
        let d = ModelConfig::default();
        let r = RetryPolicy::default();
        ModelConfig {
            endpoint: self.endpoint.clone(),
            model: name.to_string(),
            temperature: self.temperature.unwrap_or(d.temperature),
            max_tokens: self.max_tokens.unwrap_or(d.max_tokens),
            timeout_secs: self.timeout_secs.unwrap_or(d.timeout_secs),
            retry: RetryPolicy {
                max_attempts: self.max_attempts.unwrap_or(r.max_attempts),
                backoff_base_ms: self.backoff_base_ms.unwrap_or(r.backoff_base_ms),
                ..r
            },
            api_key_env: self.api_key_env.clone().unwrap_or(d.api_key_env),
            max_concurrent: self.max_concurrent.unwrap_or(d.max_concurrent),
            requests_per_minute: self.requests_per_minute,
            audit_log: self.audit_log.clone(),
        }
    }

    pub fn pipeline_config(&self) -> Result<PipelineConfig, HarnessError> {
        if self.shots != 0 && self.shots != 2 {
            return Err(HarnessError::Config(format!("shots must be 0 or 2, got {}", self.shots)));
        }
        if self.rounds == 0 {
            return Err(HarnessError::Config("rounds must be at least 1".into()));
        }
        let b = FolBudget::default();
        let d = PipelineConfig::default();
        Ok(PipelineConfig {
            n: self.rounds,
            shots: self.shots,
            workers: self.workers,
            token_budget: self.token_budget.unwrap_or(d.token_budget),
            fol_budget: FolBudget {
                max_model_size: self.fol_max_model_size.unwrap_or(b.max_model_size),
                max_proof_steps: self.fol_max_proof_steps.unwrap_or(b.max_proof_steps),
                timeout: self.fol_timeout_secs.map(Duration::from_secs_f64).unwrap_or(b.timeout),
            },
        })
    }

    pub fn report_metric(&self) -> Result<Option<BucketMetric>, HarnessError> {
        self.report_metric
            .as_ref()
            .map(|m| m.parse().map_err(|e: crate::generator::GenError| HarnessError::Config(e.to_string())))
            .transpose()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_flat_toml() {
        let cfg: RunConfig = toml::from_str(
            "kind = \"pl\"\npreset = \"tiny\"\nseed = 7\nmodel = \"negation-dropper\"\nshots = 2\nmax_attempts = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.dataset_kind().unwrap(), DatasetKind::Pl);
        let (gp, batches) = cfg.gen_params().unwrap();
        assert_eq!((gp.depth, gp.seed, batches), (6, 7, 2));
        assert_eq!(cfg.model_config("x").retry.max_attempts, 5);
        assert!(cfg.check_source().is_ok());
    }

    #[test]
    fn rejects_unknown_keys_and_double_sources() {
        assert!(toml::from_str::<RunConfig>("colour = 1\n").is_err());
        let cfg = RunConfig { dataset: Some("d.jsonl".into()), kind: Some("pl".into()), ..Default::default() };
        assert!(cfg.check_source().is_err());
        assert!(RunConfig::default().check_source().is_err());
        assert!(RunConfig { shots: 1, ..Default::default() }.pipeline_config().is_err());
    }
}
