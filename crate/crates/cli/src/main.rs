use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use nudgeopt_core::experiment::{
    configure_threads, load_config, load_or_default, run_eval, run_generate, run_rl, run_select,
    run_train, EffectSource, EvalCommandConfig, Format, RlCommandConfig, SelectCommandConfig,
    TrainCommandConfig,
};
use nudgeopt_core::survey_data::synthetic::SyntheticGenConfig;
use nudgeopt_core::Error;

#[derive(Parser)]
#[command(
    name = "nudgeopt",
    version,
    about = "Barrier prediction and intervention learning experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file; flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Report format: csv or json.
    #[arg(long, global = true, default_value = "csv")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Write a synthetic barrier survey, intervention survey and ground truth.
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        records: Option<usize>,
    },
    /// Train the one-vs-rest SVM and cross-validate it.
    TrainSvm {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Train the MLP ranker and cross-validate it.
    TrainMlp {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        train: TrainArgs,
    },
    /// Cross-validated PR curves and classification report against the top-k baseline.
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: Option<PathBuf>,
        /// Registered model name; repeat to compare several.
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long)]
        baseline_k: Option<usize>,
        /// Leave out the baseline.
        #[arg(long, conflicts_with = "baseline_k")]
        no_baseline: bool,
    },
    /// Train the SARSA agent against simulated respondents.
    Rl {
        #[command(flatten)]
        common: Common,
        /// Response model: deterministic or stochastic.
        #[arg(long)]
        human: Option<String>,
        /// Condition the agent on the respondent's demographic cell.
        #[arg(long)]
        aware: bool,
        #[arg(long)]
        episodes: Option<usize>,
        /// Use the demographic-contrastive effect table.
        #[arg(long, conflicts_with_all = ["effect_table", "survey"])]
        contrastive: bool,
        #[arg(long, conflicts_with = "survey")]
        effect_table: Option<PathBuf>,
        /// Intervention survey to measure effects from.
        #[arg(long)]
        survey: Option<PathBuf>,
    },
    /// Rank barriers for profiles and choose interventions.
    Select {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        profiles: Option<PathBuf>,
        #[arg(long)]
        model: Option<PathBuf>,
        #[arg(long)]
        interventions: Option<PathBuf>,
        #[arg(long)]
        map: Option<PathBuf>,
        #[arg(long)]
        limit: Option<usize>,
    },
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: Option<PathBuf>,
    /// Registered model name.
    #[arg(long)]
    model: Option<String>,
    /// Skip cross-validation.
    #[arg(long)]
    no_cv: bool,
}

fn train(
    command: &str,
    default_model: &str,
    common: &Common,
    args: &TrainArgs,
) -> Result<(), Error> {
    let mut cfg: TrainCommandConfig = match &common.config {
        Some(p) => load_config(p)?,
        None => TrainCommandConfig {
            model: default_model.into(),
            ..Default::default()
        },
    };
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(d) = &args.data {
        cfg.data.barrier_survey = d.clone();
    }
    if let Some(m) = &args.model {
        cfg.model = m.clone();
    }
    if args.no_cv {
        cfg.cross_validate = false;
    }
    run_train(command, &cfg, &common.out, common.format).map(drop)
}

fn run(cli: Cli) -> Result<PathBuf, Error> {
    configure_threads()?;
    match cli.command {
        Command::Generate { common, records } => {
            let mut cfg: SyntheticGenConfig = load_or_default(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(n) = records {
                cfg.n_records = n;
            }
            run_generate(&cfg, &common.out, common.format)?;
            Ok(common.out)
        }
        Command::TrainSvm {
            common,
            train: args,
        } => {
            train("train-svm", "svm", &common, &args)?;
            Ok(common.out)
        }
        Command::TrainMlp {
            common,
            train: args,
        } => {
            train("train-mlp", "mlp", &common, &args)?;
            Ok(common.out)
        }
        Command::Eval {
            common,
            data,
            models,
            baseline_k,
            no_baseline,
        } => {
            let mut cfg: EvalCommandConfig = load_or_default(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(d) = data {
                cfg.data.barrier_survey = d;
            }
            if !models.is_empty() {
                cfg.models = models;
            }
            if baseline_k.is_some() {
                cfg.baseline_k = baseline_k;
            }
            if no_baseline {
                cfg.baseline_k = None;
            }
            run_eval(&cfg, &common.out, common.format)?;
            Ok(common.out)
        }
        Command::Rl {
            common,
            human,
            aware,
            episodes,
            contrastive,
            effect_table,
            survey,
        } => {
            let mut cfg: RlCommandConfig = load_or_default(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(h) = human {
                cfg.human = h;
            }
            if aware {
                cfg.agent_aware = true;
            }
            if let Some(e) = episodes {
                cfg.episodes = e;
            }
            if contrastive {
                cfg.source = EffectSource::Contrastive;
            }
            if let Some(path) = effect_table {
                cfg.source = EffectSource::Table { path };
            }
            if let Some(path) = survey {
                cfg.source = EffectSource::Survey {
                    path,
                    schema: Default::default(),
                    scale: Default::default(),
                    n_interventions: nudgeopt_core::survey_data::DEFAULT_INTERVENTIONS,
                };
            }
            let (_, summary) = run_rl(&cfg, &common.out, common.format)?;
            println!(
                "final mean reward {:.4} ({:.1}% of best reachable {:.4})",
                summary.tail_mean,
                100.0 * summary.tail_ratio,
                summary.target
            );
            Ok(common.out)
        }
        Command::Select {
            common,
            profiles,
            model,
            interventions,
            map,
            limit,
        } => {
            let mut cfg: SelectCommandConfig = load_or_default(common.config.as_deref())?;
            if let Some(s) = common.seed {
                cfg.seed = s;
            }
            if let Some(p) = profiles {
                cfg.profiles = p;
            }
            if let Some(m) = model {
                cfg.model = m;
            }
            if let Some(i) = interventions {
                cfg.interventions = i;
            }
            if map.is_some() {
                cfg.map = map;
            }
            if let Some(l) = limit {
                cfg.limit = l;
            }
            run_select(&cfg, &common.out, common.format)?;
            Ok(common.out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(out) => {
            println!("wrote {}", out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error[{}]: {e}", e.kind());
            ExitCode::FAILURE
        }
    }
}
