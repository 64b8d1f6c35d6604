//! `tmeval` command-line interface.

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use tmeval_core::harness::{self, HarnessError, Outcome, RunConfig};
use tmeval_core::logic_verifier::{logic_equivalent, FolBudget};
use tmeval_core::parsing::{parse_logic_exact, parse_regex_exact, LogicMode};
use tmeval_core::regex_verifier::regex_equivalent;
use tmeval_core::vocabulary::alphabet;

#[derive(Parser)]
#[command(name = "tmeval", version, about = "Truth-maintenance evaluation of language models on formal syntax")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a dataset and its manifest.
    Generate {
        #[command(flatten)]
        common: Common,
        /// Regenerate from an existing manifest instead of a config.
        #[arg(long, conflicts_with = "config")]
        manifest: Option<PathBuf>,
    },
    /// Run informalize/autoformalize rounds and write results and reports.
    Evaluate(Common),
    /// Ask models whether verified pairs are equivalent and score them.
    Judge(Common),
    /// Correlate per-model scores with an external score table.
    Correlate(Common),
    /// Rebuild reports from stored results.
    Report(Common),
    /// Check two expressions for equivalence with the formal verifiers.
    Verify {
        #[arg(long, value_enum)]
        lang: Lang,
        first: String,
        second: String,
        /// Alphabet size for regexes.
        #[arg(long, default_value_t = 2)]
        alphabet: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Lang {
    Pl,
    Fol,
    Regex,
}

#[derive(Args)]
struct Common {
    /// TOML (or .json) configuration file with flat keys.
    #[arg(long, short)]
    config: Option<PathBuf>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Dataset kind to generate: ksat, pl, fol_synthetic, fol_english, regex.
    #[arg(long)]
    kind: Option<String>,
    #[arg(long)]
    preset: Option<String>,
    #[arg(long)]
    dataset: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Model name; repeat for several.
    #[arg(long = "model")]
    models: Vec<String>,
    #[arg(long)]
    endpoint: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    judge_source: Option<PathBuf>,
    #[arg(long)]
    score_table: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<RunConfig, HarnessError> {
        let mut cfg = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        if let Some(v) = &self.output_dir {
            cfg.output_dir = v.clone();
        }
        if let Some(v) = &self.kind {
            cfg.kind = Some(v.clone());
        }
        if let Some(v) = &self.preset {
            cfg.preset = Some(v.clone());
        }
        if let Some(v) = &self.dataset {
            cfg.dataset = Some(v.clone());
        }
        if let Some(v) = self.seed {
            cfg.seed = v;
        }
        if !self.models.is_empty() {
            cfg.models = self.models.clone();
        }
        if let Some(v) = &self.endpoint {
            cfg.endpoint = v.clone();
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = &self.judge_source {
            cfg.judge_source = Some(v.clone());
        }
        if let Some(v) = &self.score_table {
            cfg.score_table = Some(v.clone());
        }
        Ok(cfg)
    }
}

fn finish(result: Result<Outcome, HarnessError>) -> ExitCode {
    match result {
        Ok(outcome) => {
            for n in &outcome.notes {
                println!("{n}");
            }
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.transport_failures > 0 {
                eprintln!("warning: {} request(s) failed in transport", outcome.transport_failures);
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn verify(lang: Lang, first: &str, second: &str, alphabet_size: usize) -> Result<()> {
    let verdict = match lang {
        Lang::Pl | Lang::Fol => {
            let mode = if matches!(lang, Lang::Pl) { LogicMode::Pl } else { LogicMode::Fol };
            let a = parse_logic_exact(first, mode, None).map_err(|e| anyhow!("first expression: {e}"))?;
            let b = parse_logic_exact(second, mode, None).map_err(|e| anyhow!("second expression: {e}"))?;
            logic_equivalent(&a, &b, &FolBudget::default())
        }
        Lang::Regex => {
            let sigma = alphabet(alphabet_size);
            let a = parse_regex_exact(first, &sigma).map_err(|e| anyhow!("first expression: {e}"))?;
            let b = parse_regex_exact(second, &sigma).map_err(|e| anyhow!("second expression: {e}"))?;
            regex_equivalent(&a, &b, &sigma)
        }
    };
    println!("{}", serde_json::to_string_pretty(&verdict).context("serializing verdict")?);
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let run = |common: &Common, f: fn(&RunConfig) -> Result<Outcome, HarnessError>| finish(common.load().and_then(|c| f(&c)));
    match cli.command {
        Command::Generate { common, manifest: Some(m) } => {
            let out = common.output_dir.clone().unwrap_or_else(|| PathBuf::from("out"));
            finish(harness::cmd_regenerate(&m, &out))
        }
        Command::Generate { common, manifest: None } => run(&common, harness::cmd_generate),
        Command::Evaluate(c) => run(&c, harness::cmd_evaluate),
        Command::Judge(c) => run(&c, harness::cmd_judge),
        Command::Correlate(c) => run(&c, harness::cmd_correlate),
        Command::Report(c) => run(&c, harness::cmd_report),
        Command::Verify { lang, first, second, alphabet } => match verify(lang, &first, &second, alphabet) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(1)
            }
        },
    }
}
