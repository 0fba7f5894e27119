//! `marx`: build policy abstractions, check temporal task queries against
//! them, explain infeasible queries, and serve the same over HTTP.

pub mod http;
pub mod render;

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use marx_core::abstraction::{build_mmdp, summarize_plan};
use marx_core::envsim::{load_environment, load_policy, EnvConfig, Environment, Policy};
use marx_core::fixtures::write_fixture_files;
use marx_core::service::{answer_query, parse_valid_query, RunConfig, Workspace};
use marx_core::Mmdp;

/// Exit code for success (and feasible queries).
pub const EXIT_OK: i32 = 0;
/// Exit code for infeasible queries, after printing explanations.
pub const EXIT_INFEASIBLE: i32 = 1;
/// Exit code for usage and runtime errors.
pub const EXIT_ERROR: i32 = 2;

const QUERY_GRAMMAR: &str = "\
Query grammar:
  query := item ( \"->\" item )*
  item  := task \":\" agent ( \",\" agent )*
Example: \"fire:r2,r3 -> victim:r1,r3\" (fire by r2 and r3 together, later
victim by r1 and r3). Each task appears at most once; coalitions are exact.";

#[derive(Parser, Debug)]
#[command(
    name = "marx",
    version,
    about = "Check and explain temporal task queries over multi-agent policies"
)]
#[command(after_help = QUERY_GRAMMAR)]
pub struct Cli {
    /// Run configuration file (JSON)
    #[arg(long, global = true, env = "MARX_CONFIG")]
    pub config: Option<PathBuf>,

    /// Output format
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample the policy and save its abstraction
    Abstract {
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        policy: Option<PathBuf>,
        #[arg(long)]
        episodes: Option<usize>,
        #[arg(long)]
        max_steps: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Where to write the abstraction
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the summarized plan of an abstraction
    Plan {
        #[arg(long)]
        mmdp: PathBuf,
    },
    /// Check a query; if infeasible, try guided rollouts (needs a policy)
    /// and explain
    #[command(after_help = QUERY_GRAMMAR)]
    Check {
        #[arg(long)]
        mmdp: PathBuf,
        #[arg(long)]
        query: String,
        /// Policy used for guided rollouts; without it no rollouts run
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Environment for rollouts; defaults to the one embedded in the abstraction
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        rollout_num: Option<usize>,
        #[arg(long)]
        depth_limit: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        /// Write the abstraction back after rollouts
        #[arg(long)]
        update: bool,
    },
    /// Explain a query against the abstraction as is (no rollouts)
    #[command(after_help = QUERY_GRAMMAR)]
    Explain {
        #[arg(long)]
        mmdp: PathBuf,
        #[arg(long)]
        query: String,
    },
    /// Serve the JSON API
    Serve {
        #[arg(long, default_value = "127.0.0.1:8080")]
        addr: String,
        #[arg(long)]
        env: Option<PathBuf>,
        #[arg(long)]
        policy: Option<PathBuf>,
        /// Abstraction cache file
        #[arg(long)]
        mmdp: Option<PathBuf>,
    },
    /// Write the bundled example scenes as JSON files
    Fixtures {
        #[arg(long)]
        out: PathBuf,
    },
}

/// Parses `args` and runs the command, printing to stdout/stderr. Returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let informational =
                matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion);
            let _ = e.print();
            if informational {
                return EXIT_OK;
            }
            eprintln!("\n{QUERY_GRAMMAR}");
            return EXIT_ERROR;
        }
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_ERROR
        }
    }
}

fn base_config(cli: &Cli) -> anyhow::Result<RunConfig> {
    Ok(match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    })
}

fn load_env(path: &Path) -> anyhow::Result<Box<dyn Environment>> {
    Ok(load_environment(EnvConfig::load(path)?)?)
}

fn emit(cli: &Cli, text: impl FnOnce() -> String, doc: impl FnOnce() -> serde_json::Value) {
    match cli.format {
        Format::Text => print!("{}", text()),
        Format::Structured => println!(
            "{}",
            serde_json::to_string_pretty(&doc()).expect("document serializes")
        ),
    }
}

fn execute(cli: &Cli) -> anyhow::Result<i32> {
    let mut config = base_config(cli)?;
    match &cli.command {
        Command::Abstract {
            env,
            policy,
            episodes,
            max_steps,
            seed,
            out,
        } => {
            let env_path = env.clone().or(config.env_config.clone()).ok_or_else(|| {
                anyhow::anyhow!("--env (or envConfig in the config file) is required")
            })?;
            let policy_path = policy.clone().or(config.policy.clone()).ok_or_else(|| {
                anyhow::anyhow!("--policy (or policy in the config file) is required")
            })?;
            config.episodes = episodes.unwrap_or(config.episodes);
            config.max_steps = max_steps.unwrap_or(config.max_steps);
            config.seed = seed.unwrap_or(config.seed);
            config.validate()?;
            let env = load_env(&env_path)?;
            let policy = load_policy(&policy_path, env.as_ref())?;
            let start = std::time::Instant::now();
            let mmdp = build_mmdp(
                env.as_ref(),
                policy.as_ref(),
                config.episodes,
                config.max_steps,
                config.seed,
            )?;
            let ms = start.elapsed().as_secs_f64() * 1e3;
            mmdp.save(out)?;
            emit(
                cli,
                || {
                    format!(
                        "sampled {} episodes: {} states, {} transitions ({ms:.0} ms) -> {}\n",
                        config.episodes,
                        mmdp.num_states(),
                        mmdp.num_transitions(),
                        out.display()
                    )
                },
                || {
                    json!({
                        "path": out,
                        "episodes": config.episodes,
                        "numStates": mmdp.num_states(),
                        "numTransitions": mmdp.num_transitions(),
                        "abstractionMs": ms,
                    })
                },
            );
            Ok(EXIT_OK)
        }
        Command::Plan { mmdp } => {
            let mmdp = Mmdp::load(mmdp)?;
            let domain = mmdp.domain();
            let plan = summarize_plan(&mmdp)?;
            emit(
                cli,
                || plan.render_table(&domain) + "\n",
                || render::plan_document(&plan, &domain),
            );
            Ok(EXIT_OK)
        }
        Command::Check {
            mmdp: mmdp_path,
            query,
            policy,
            env,
            rollout_num,
            depth_limit,
            seed,
            update,
        } => {
            let mut mmdp = Mmdp::load(mmdp_path)?;
            let domain = mmdp.domain();
            let query = parse_valid_query(query, &domain)?;
            config.rollout_num = rollout_num.unwrap_or(config.rollout_num);
            config.depth_limit = depth_limit.unwrap_or(config.depth_limit);
            config.seed = seed.unwrap_or(config.seed);
            config.validate()?;

            let env: Option<Box<dyn Environment>> =
                match env.as_ref().or(config.env_config.as_ref()) {
                    Some(path) => Some(load_env(path)?),
                    None => mmdp
                        .env_config()
                        .cloned()
                        .map(load_environment)
                        .transpose()?,
                };
            let policy: Option<Box<dyn Policy>> =
                match (&env, policy.as_ref().or(config.policy.as_ref())) {
                    (Some(env), Some(path)) => Some(load_policy(path, env.as_ref())?),
                    (None, Some(_)) => anyhow::bail!("rollouts need an environment: pass --env"),
                    _ => None,
                };
            let sampler = env.as_deref().zip(policy.as_deref());
            let answer = answer_query(&mut mmdp, sampler, &query, &config)?;
            if *update && answer.rollout.is_some() {
                mmdp.save(mmdp_path)?;
            }
            emit(
                cli,
                || render::answer_text(&answer, &mmdp, &domain),
                || answer.to_document(&mmdp, &domain),
            );
            Ok(if answer.is_feasible() {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            })
        }
        Command::Explain { mmdp, query } => {
            let mut mmdp = Mmdp::load(mmdp)?;
            let domain = mmdp.domain();
            let query = parse_valid_query(query, &domain)?;
            config.rollout_num = 0;
            let answer = answer_query(&mut mmdp, None, &query, &config)?;
            emit(
                cli,
                || render::answer_text(&answer, &mmdp, &domain),
                || answer.to_document(&mmdp, &domain),
            );
            Ok(if answer.is_feasible() {
                EXIT_OK
            } else {
                EXIT_INFEASIBLE
            })
        }
        Command::Serve {
            addr,
            env,
            policy,
            mmdp,
        } => {
            if let Some(p) = env {
                config.env_config = Some(p.clone());
            }
            if let Some(p) = policy {
                config.policy = Some(p.clone());
            }
            if let Some(p) = mmdp {
                config.mmdp_cache_path = Some(p.clone());
            }
            let workspace = Workspace::open(config)?;
            serve(addr, workspace)?;
            Ok(EXIT_OK)
        }
        Command::Fixtures { out } => {
            std::fs::create_dir_all(out)?;
            let written = write_fixture_files(out)?;
            emit(
                cli,
                || {
                    written
                        .iter()
                        .map(|p| format!("wrote {}\n", p.display()))
                        .collect()
                },
                || json!({ "written": written }),
            );
            Ok(EXIT_OK)
        }
    }
}

fn serve(addr: &str, workspace: Workspace) -> anyhow::Result<()> {
    let _ = tracing_subscriber::fmt()
        .with_env_filter(
            tracing_subscriber::EnvFilter::try_from_default_env()
                .unwrap_or_else(|_| tracing_subscriber::EnvFilter::new("info")),
        )
        .try_init();
    let runtime = tokio::runtime::Builder::new_multi_thread()
        .enable_all()
        .build()?;
    runtime.block_on(async {
        let listener = tokio::net::TcpListener::bind(addr).await?;
        tracing::info!(
            "serving {} states on http://{}",
            workspace.mmdp.num_states(),
            listener.local_addr()?
        );
        let app = http::router(http::AppState::new(workspace));
        axum::serve(listener, app)
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await?;
        Ok(())
    })
}
