use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};

use hbf_bm::beam_mgmt::sweep_sequence;
use hbf_bm::channel::{draw_channel, export_channel};
use hbf_bm::codebook::{azimuth_grid, export_codebook, horizon_gain_db, HierarchicalCodebook};
use hbf_bm::io::{config_to_toml, emit_results, load_config};
use hbf_bm::sim::{run_monte_carlo, trial_rng, SimConfig};

#[derive(Parser)]
#[command(name = "hbf-bm", version, about = "Flat-top-beam codebooks and uplink beam management")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build, dump or list the hierarchical codebook.
    Codebook {
        #[command(subcommand)]
        action: CodebookAction,
    },
    /// Run the Monte Carlo grid and write CSVs plus a manifest.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the angle sweeping order (1-based) around index `nu`.
    SweepTrace {
        #[arg(long)]
        nu: usize,
        #[arg(long)]
        card: usize,
    },
    /// Channel realizations.
    Channel {
        #[command(subcommand)]
        action: ChannelAction,
    },
    /// Print the default configuration as TOML.
    DefaultConfig,
}

#[derive(Subcommand)]
enum CodebookAction {
    /// Write the codebook as JSON (stdout unless --out is given).
    Build {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Horizon gain of every beam as CSV: level,index,azimuth_deg,gain_db.
    Export {
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Azimuth samples over [-90°, 90°].
        #[arg(long, default_value_t = 361)]
        points: usize,
    },
    /// One line per beam: level, index, centre angle and child set.
    Inspect {
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ChannelAction {
    /// Draw one realization and dump its paths as JSON.
    Draw {
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn config_or_default(path: Option<&Path>) -> hbf_bm::Result<SimConfig> {
    path.map_or_else(|| Ok(SimConfig::default()), load_config)
}

fn emit(text: &str, out: Option<&Path>) -> hbf_bm::Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| hbf_bm::Error::Io {
            path: p.to_path_buf(),
            source: e,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            match stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()) {
                // a closed pipe (`| head`) is the reader's choice, not a failure
                Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(hbf_bm::Error::Io {
                    path: "<stdout>".into(),
                    source: e,
                }),
                _ => Ok(()),
            }
        }
    }
}

fn pattern_csv(cb: &HierarchicalCodebook, points: usize) -> String {
    let grid = azimuth_grid(points);
    let mut out = String::from("level,index,azimuth_deg,gain_db\n");
    for beam in cb.beams() {
        let gains = horizon_gain_db(cb.geometry(), &beam.weights, &grid);
        for (psi, g) in grid.iter().zip(gains) {
            out.push_str(&format!(
                "{},{},{:.6},{:.6}\n",
                beam.level,
                beam.index + 1,
                psi.to_degrees(),
                g
            ));
        }
    }
    out
}

fn inspect(cb: &HierarchicalCodebook) -> String {
    let mut out = String::new();
    for level in cb.levels() {
        for (k, beam) in level.beams.iter().enumerate() {
            let kind = match beam.width_param {
                None => "dft".to_string(),
                Some(a) => format!("ftb a={a}"),
            };
            let children = level
                .children
                .get(k)
                .map(|c| {
                    let list: Vec<String> = c.iter().map(|i| (i + 1).to_string()).collect();
                    format!(" children=[{}]", list.join(","))
                })
                .unwrap_or_default();
            out.push_str(&format!(
                "level={} index={} azimuth_deg={:.2} active={} {kind}{children}\n",
                beam.level,
                beam.index + 1,
                beam.center_azimuth.to_degrees(),
                beam.weights.active_count()
            ));
        }
    }
    out.push_str(&format!("total={}\n", cb.total_beams()));
    out
}

fn run(cli: Cli) -> hbf_bm::Result<()> {
    match cli.command {
        Command::Codebook { action } => match action {
            CodebookAction::Build { config, out } => {
                let cb = config_or_default(config.as_deref())?.build_codebook()?;
                emit(&export_codebook(&cb), out.as_deref())
            }
            CodebookAction::Export {
                config,
                out,
                points,
            } => {
                let cb = config_or_default(config.as_deref())?.build_codebook()?;
                emit(&pattern_csv(&cb, points), out.as_deref())
            }
            CodebookAction::Inspect { config } => {
                let cb = config_or_default(config.as_deref())?.build_codebook()?;
                emit(&inspect(&cb), None)
            }
        },
        Command::Simulate { config, out } => {
            let cfg = load_config(&config)?;
            let start = Instant::now();
            let records = run_monte_carlo(&cfg)?;
            let manifest = emit_results(&records, &out, &cfg, start.elapsed().as_secs_f64())?;
            for f in manifest.outputs {
                println!("{}", out.join(f).display());
            }
            Ok(())
        }
        Command::SweepTrace { nu, card } => {
            let seq: Vec<String> = sweep_sequence(card, nu)?
                .into_iter()
                .map(|k| k.to_string())
                .collect();
            emit(&format!("{}\n", seq.join(" ")), None)
        }
        Command::Channel {
            action: ChannelAction::Draw { seed, config, out },
        } => {
            let cfg = config_or_default(config.as_deref())?;
            let mut rng = trial_rng(seed, 0);
            let ch = draw_channel(&cfg.channel, &cfg.array.bs()?, &cfg.array.ue()?, &mut rng)?;
            emit(&export_channel(&ch), out.as_deref())
        }
        Command::DefaultConfig => emit(&config_to_toml(&SimConfig::default()), None),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}: {}", e.kind(), e.to_string().replace('\n', " "));
            ExitCode::FAILURE
        }
    }
}
