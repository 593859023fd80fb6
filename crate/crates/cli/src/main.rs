//! Command-line front end: load or synthesize a run configuration, apply
//! flag overrides, execute, and write CSV.

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use srlaser_cli::config::{emit_config, parse_config, Method, RunConfig};
use srlaser_cli::presets::{self, Preset, PresetOptions, PresetPlan};
use srlaser_cli::{compare, csvout, sweep, CliFail};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "srlaser",
    version,
    about = "Steady-state superradiance / laser crossover sweeps"
)]
struct Cli {
    /// Worker threads for the stochastic backends (never affects results).
    /// Overrides the SRLASER_THREADS environment variable.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct PresetArgs {
    /// Built-in parameter set: fig1, fig2, fig3, or fig4.
    #[arg(long)]
    preset: Option<String>,
    /// Crossover parameter for fig1/fig2 presets.
    #[arg(long)]
    xi: Option<f64>,
    /// fig2 only: fixed-dephasing variant (t2_inv = 99.8).
    #[arg(long)]
    dashed: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run one sweep and emit CSV.
    Run {
        /// Config file path; mutually exclusive with --preset.
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        preset: PresetArgs,
        /// Override the solver method.
        #[arg(long)]
        method: Option<String>,
        /// Override the RNG seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output path; `-` or absence falls back to the config's `out`,
        /// then stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run two configs on a shared grid and emit joined ratio columns.
    Compare {
        #[arg(long)]
        config_a: Option<PathBuf>,
        #[arg(long)]
        config_b: Option<PathBuf>,
        /// Paired preset (fig3 is the only one).
        #[arg(long)]
        preset: Option<String>,
        /// Override both configs' seeds.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print a preset's config text, derivation comments included.
    PrintConfig {
        #[command(flatten)]
        preset: PresetArgs,
    },
}

fn parse_preset(name: &str) -> Result<Preset, CliFail> {
    Preset::parse(name).ok_or_else(|| {
        CliFail::Config(format!(
            "unknown preset `{name}` (expected fig1, fig2, fig3, or fig4)"
        ))
    })
}

fn load_config(path: &PathBuf) -> Result<RunConfig, CliFail> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliFail::Io(format!("reading {}: {e}", path.display())))?;
    parse_config(&text)
}

/// Apply flag overrides and re-validate through the emit/parse round trip
/// so an override can never produce a config the loader would reject.
fn finalize(mut cfg: RunConfig, method: &Option<String>, seed: Option<u64>) -> Result<RunConfig, CliFail> {
    if let Some(name) = method {
        cfg.method = Method::parse(name).ok_or_else(|| {
            CliFail::Config(format!(
                "unknown method `{name}` (expected analytic, meanfield, langevin, su4-det, su4-mc, or bruteforce)"
            ))
        })?;
    }
    if let Some(s) = seed {
        cfg.seed = s;
    }
    parse_config(&emit_config(&cfg))
}

fn init_threads(flag: Option<usize>) -> Result<(), CliFail> {
    let from_env = match std::env::var("SRLASER_THREADS") {
        Ok(v) => Some(v.parse::<usize>().map_err(|_| {
            CliFail::Config(format!("SRLASER_THREADS must be a positive integer, got `{v}`"))
        })?),
        Err(_) => None,
    };
    let Some(k) = flag.or(from_env) else {
        return Ok(());
    };
    if k == 0 {
        return Err(CliFail::Config("thread count must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(k)
        .build_global()
        .map_err(|e| CliFail::Config(format!("thread pool: {e}")))
}

fn write_out(text: &str, flag_out: Option<PathBuf>, cfg_out: Option<&String>) -> Result<(), CliFail> {
    let dest = flag_out.or_else(|| cfg_out.map(PathBuf::from));
    match dest {
        Some(path) => std::fs::write(&path, text)
            .map_err(|e| CliFail::Io(format!("writing {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliFail> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::Run {
            config,
            preset,
            method,
            seed,
            out,
        } => {
            let cfg = match (&config, &preset.preset) {
                (Some(_), Some(_)) => {
                    return Err(CliFail::Config("--config and --preset are mutually exclusive".into()))
                }
                (None, None) => {
                    return Err(CliFail::Config("one of --config or --preset is required".into()))
                }
                (Some(path), None) => {
                    if preset.xi.is_some() || preset.dashed {
                        return Err(CliFail::Config(
                            "--xi/--dashed only apply together with --preset".into(),
                        ));
                    }
                    load_config(path)?
                }
                (None, Some(name)) => {
                    let p = parse_preset(name)?;
                    let opts = PresetOptions {
                        xi: preset.xi,
                        dashed: preset.dashed,
                    };
                    match presets::plan(p, &opts)? {
                        PresetPlan::Single(cfg) => cfg,
                        PresetPlan::Pair(..) => {
                            return Err(CliFail::Config(
                                "preset fig3 is a paired comparison; use the compare subcommand".into(),
                            ))
                        }
                    }
                }
            };
            let cfg = finalize(cfg, &method, seed)?;
            let result = sweep::run_sweep(&cfg)?;
            let text = csvout::render(&result);
            write_out(&text, out, cfg.out.as_ref())
        }
        Command::Compare {
            config_a,
            config_b,
            preset,
            seed,
            out,
        } => {
            let (cfg_a, cfg_b) = match (&config_a, &config_b, &preset) {
                (Some(a), Some(b), None) => (load_config(a)?, load_config(b)?),
                (None, None, Some(name)) => {
                    let p = parse_preset(name)?;
                    match presets::plan(p, &PresetOptions::default())? {
                        PresetPlan::Pair(a, b) => (a, b),
                        PresetPlan::Single(_) => {
                            return Err(CliFail::Config(format!(
                                "preset {name} is a single run; compare needs the paired preset fig3 \
                                 or explicit --config-a/--config-b"
                            )))
                        }
                    }
                }
                _ => {
                    return Err(CliFail::Config(
                        "compare needs either --config-a and --config-b, or --preset fig3".into(),
                    ))
                }
            };
            let cfg_a = finalize(cfg_a, &None, seed)?;
            let cfg_b = finalize(cfg_b, &None, seed)?;
            let text = compare::compare(&cfg_a, &cfg_b)?;
            write_out(&text, out, None)
        }
        Command::PrintConfig { preset } => {
            let Some(name) = &preset.preset else {
                return Err(CliFail::Config("print-config requires --preset".into()));
            };
            let p = parse_preset(name)?;
            let opts = PresetOptions {
                xi: preset.xi,
                dashed: preset.dashed,
            };
            for text in presets::config_texts(p, &opts)? {
                print!("{text}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            // clap exits 2 by default, which this tool reserves for
            // numerical failure; usage problems are config errors.
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
