use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use uavplace_core::channel::{self, ChannelParams, LinkThresholds, REFERENCE_ALTITUDE, REFERENCE_GROUND_RADIUS};
use uavplace_core::exact::{export_ilp, ConnectivityForm};
use uavplace_core::harness::{emit_results, load_sweep_input, run_sweep, run_trial_with, summary_csv, TrialOptions};
use uavplace_core::netgraph::build_graph;
use uavplace_core::plan::{load_plan, verify_plan, AlgorithmTag};
use uavplace_core::scenario::{load_scenario, save_scenario, ScenarioConfig};
use uavplace_core::{Error, Result};

#[derive(Parser)]
#[command(name = "uavplace", version, about = "Plan UAV base station placements with connected backhaul")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Form {
    Flow,
    Subtour,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a clustered-user scenario file.
    Generate {
        /// JSON scenario recipe; defaults apply to missing fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        users: Option<usize>,
        /// Side of a square area in metres.
        #[arg(long)]
        area: Option<f64>,
        #[arg(long)]
        backhaul_snr: Option<f64>,
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Run one algorithm on a scenario and write the plan.
    Plan {
        scenario: PathBuf,
        #[arg(long, short, default_value = "proposed")]
        algorithm: String,
        /// Seed for the random baseline; defaults to the scenario seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Run a parameter sweep from a spec or manifest file.
    Sweep {
        spec: PathBuf,
        #[arg(long, short)]
        out: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        reps: Option<usize>,
        /// Worker threads; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Report the ground radius, backhaul radius and best altitude.
    Radii {
        /// JSON channel parameters; suburban defaults otherwise.
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long, default_value_t = 4.0)]
        access_snr: f64,
        #[arg(long, default_value_t = 15.0)]
        backhaul_snr: f64,
        #[arg(long, default_value_t = REFERENCE_ALTITUDE)]
        altitude: f64,
        #[arg(long, default_value_t = 100.0)]
        h_min: f64,
        #[arg(long, default_value_t = 20_000.0)]
        h_max: f64,
    },
    /// Write the integer program of a scenario in LP format.
    ExportIlp {
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "flow")]
        form: Form,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
    /// Check a plan against its scenario.
    Verify { scenario: PathBuf, plan: PathBuf },
    /// Dump the deployment graph as an edge list.
    Graph {
        scenario: PathBuf,
        #[arg(long, short)]
        out: Option<PathBuf>,
    },
}

fn write_output(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => Ok(fs::write(p, text)?),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { config, seed, users, area, backhaul_snr, out } => {
            let mut cfg: ScenarioConfig = match config {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => ScenarioConfig::default(),
            };
            if let Some(n) = users {
                cfg.n_users = n;
            }
            if let Some(side) = area {
                cfg.area_width = side;
                cfg.area_height = side;
            }
            if let Some(snr) = backhaul_snr {
                cfg.thresholds.backhaul_snr_min = snr;
            }
            let scenario = cfg.generate(seed)?;
            save_scenario(&scenario, &out)?;
            eprintln!(
                "{} ground nodes, {} candidates -> {}",
                scenario.nodes.len(),
                scenario.candidates.len(),
                out.display()
            );
        }
        Command::Plan { scenario, algorithm, seed, format, out } => {
            let scenario = load_scenario(scenario)?;
            let tag: AlgorithmTag = algorithm.parse()?;
            let mut opts = TrialOptions::for_scenario(&scenario);
            if let Some(s) = seed {
                opts.random_seed = s;
            }
            let plan = run_trial_with(&scenario, tag, &opts)?;
            let text = match format {
                Format::Json => plan.to_json()? + "\n",
                Format::Csv => {
                    let mut s = String::from("candidate_id,x,y,h,fixed\n");
                    for &k in &plan.selected {
                        let c = &scenario.candidates[k];
                        s += &format!("{},{},{},{},{}\n", c.id, c.x, c.y, c.h, plan.fixed.contains(&k));
                    }
                    s
                }
            };
            write_output(out.as_deref(), &text)?;
            eprintln!("{}: {} UAVs in {:.3} s", plan.algorithm_tag, plan.len(), plan.runtime);
        }
        Command::Sweep { spec, out, seed, reps, workers, format } => {
            let mut spec = load_sweep_input(spec)?;
            if let Some(s) = seed {
                spec.base_seed = s;
            }
            if let Some(r) = reps {
                spec.repetitions = r;
            }
            spec.validate()?;
            let result = run_sweep(&spec, workers)?;
            let files = emit_results(&result, &out)?;
            if let Format::Json = format {
                fs::write(out.join("result.json"), serde_json::to_string_pretty(&result)? + "\n")?;
            }
            print!("{}", summary_csv(&result));
            eprintln!("wrote {}", files.summary_csv.display());
        }
        Command::Radii { params, access_snr, backhaul_snr, altitude, h_min, h_max } => {
            let params: ChannelParams = match params {
                Some(p) => serde_json::from_str(&fs::read_to_string(p)?)?,
                None => ChannelParams::suburban(),
            };
            let thresholds = LinkThresholds::new(access_snr, backhaul_snr);
            let at_altitude = channel::coverage_radii(&params, &thresholds, altitude)?;
            let best = channel::optimal_altitude(&params, &thresholds, h_min, h_max)?;
            let report = json!({
                "backhaul_radius": at_altitude.backhaul_radius,
                "at_altitude": at_altitude,
                "optimal": best,
                "preset": { "altitude": REFERENCE_ALTITUDE, "ground_radius": REFERENCE_GROUND_RADIUS },
            });
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::ExportIlp { scenario, form, out } => {
            let scenario = load_scenario(scenario)?;
            let form = match form {
                Form::Flow => ConnectivityForm::Flow,
                Form::Subtour => ConnectivityForm::Subtour,
            };
            write_output(out.as_deref(), &export_ilp(&build_graph(&scenario), form)?)?;
        }
        Command::Verify { scenario, plan } => {
            let scenario = load_scenario(scenario)?;
            let plan = load_plan(plan)?;
            let report = verify_plan(&build_graph(&scenario), &plan);
            print!("{report}");
            if !report.passed() {
                let names: Vec<&str> = report.failures().iter().map(|c| c.name).collect();
                return Err(Error::Invariant(format!("plan failed checks: {}", names.join(", "))));
            }
        }
        Command::Graph { scenario, out } => {
            let graph = build_graph(&load_scenario(scenario)?);
            let mut buf = Vec::new();
            graph.write_edge_list(&mut buf)?;
            write_output(out.as_deref(), &String::from_utf8_lossy(&buf))?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{}", json!({ "error": e.category(), "message": e.to_string() }));
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
