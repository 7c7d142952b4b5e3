//! Command-line front end.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (config, flags,
//! missing scenario), 3 impossible geometry, 4 reference bound violated.

use crate::error::{Error, Result};
use crate::geartrain::{
    distribute_speeds, equal_load_output_speed, verify_state, GearParams, OodState,
};
use crate::metrics::paper_report;
use crate::pipe_geometry::TRACK_NAMES;
use crate::scenario::{Scenario, PAPER_PRESET};
use crate::speed_law::LawRegistry;
use crate::traversal::{asym_tilt_limit, Summary, Traversal, TraversalLog};
use crate::units::rim_speed_mm_s;
use clap::{Parser, Subcommand, ValueEnum};
use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_GEOMETRY: i32 = 3;
pub const EXIT_BOUND: i32 = 4;

pub const OUT_DIR_ENV: &str = "OODSIM_OUT_DIR";
const DEFAULT_OUT_ROOT: &str = "oodsim-out";
pub const CSV_FILE: &str = "timeseries.csv";
pub const SUMMARY_FILE: &str = "summary.json";

#[derive(Debug, Parser)]
#[command(
    name = "oodsim",
    version,
    about = "Three-output open differential pipe-climber simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Traverse a pipe network and write the time series and summary.
    Simulate {
        /// Built-in scenario.
        #[arg(long, conflicts_with = "config", value_parser = [PAPER_PRESET])]
        preset: Option<String>,
        /// Scenario config file (JSON).
        #[arg(long)]
        config: Option<PathBuf>,
        /// Insertion orientation in degrees; repeat to run several concurrently.
        #[arg(long, allow_negative_numbers = true)]
        mu: Vec<f64>,
        /// Track speed law (see `oodsim laws`).
        #[arg(long)]
        law: Option<String>,
        /// Integration step (ms).
        #[arg(long)]
        dt_ms: Option<f64>,
        /// Sampling interval of the time series (ms); a whole multiple of the step.
        #[arg(long)]
        sample_ms: Option<f64>,
        /// Output directory; defaults to $OODSIM_OUT_DIR/mu_<mu>.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Print the fully resolved config and exit.
        #[arg(long)]
        dump_config: bool,
    },
    /// Output speeds of the differential for given demand ratios.
    Geartrain {
        #[arg(long, default_value_t = 120.0)]
        input_rpm: f64,
        #[arg(long, default_value_t = 20.0)]
        k: f64,
        #[arg(long, default_value_t = 2.0)]
        j: f64,
        /// Three comma-separated demand ratios (track speed / nominal speed).
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        ratios: Option<Vec<f64>>,
        /// Also print sprocket rim speeds.
        #[arg(long)]
        rim: bool,
        /// Sprocket diameter (mm) for rim speeds.
        #[arg(long, default_value_t = 80.0)]
        ds: f64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Compare runs at mu = 0, 30 and 60 degrees with the published values.
    Report {
        #[arg(required = true)]
        run_dirs: Vec<PathBuf>,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
    },
    /// Print a network descriptor.
    Network {
        #[arg(long, conflicts_with = "config", value_parser = [PAPER_PRESET])]
        preset: Option<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// List the registered track speed laws.
    Laws,
}

pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Io { .. } => EXIT_IO,
        Error::Geometry(_) => EXIT_GEOMETRY,
        Error::NonPositiveRatio { .. }
        | Error::Config { .. }
        | Error::IncompleteLog
        | Error::ZeroReference
        | Error::MissingScenario(_) => EXIT_INPUT,
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(code) => code,
        Err(err) => {
            let _ = writeln!(stderr, "error: {err}");
            exit_code(&err)
        }
    }
}

fn execute(command: Command, stdout: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Simulate {
            preset,
            config,
            mu,
            law,
            dt_ms,
            sample_ms,
            out,
            format,
            dump_config,
        } => {
            let mut scenario = load_scenario(preset.as_deref(), config.as_deref())?;
            if let Some(law) = law {
                scenario.law = law;
            }
            if let Some(dt) = dt_ms {
                scenario.dt_ms = dt;
            }
            if let Some(sample) = sample_ms {
                scenario.sample_ms = sample;
            }
            if let Some(first) = mu.first() {
                scenario.mu_deg = *first;
            }
            scenario.validate()?;
            LawRegistry::builtin().get(&scenario.law)?;
            if dump_config {
                emit(stdout, &scenario.to_json())?;
                return Ok(EXIT_OK);
            }
            cmd_simulate(&scenario, &mu, out, format, stdout)
        }
        Command::Geartrain {
            input_rpm,
            k,
            j,
            ratios,
            rim,
            ds,
            format,
        } => cmd_geartrain(input_rpm, k, j, ratios, rim, ds, format, stdout),
        Command::Report { run_dirs, format } => cmd_report(&run_dirs, format, stdout),
        Command::Network { preset, config } => {
            let scenario = load_scenario(preset.as_deref(), config.as_deref())?;
            emit(stdout, &scenario.build_network()?.to_json())?;
            Ok(EXIT_OK)
        }
        Command::Laws => {
            let registry = LawRegistry::builtin();
            let mut text = String::new();
            for law in registry.iter() {
                let _ = writeln!(text, "{:<14} {}", law.name(), law.description());
            }
            emit(stdout, &text)?;
            Ok(EXIT_OK)
        }
    }
}

fn emit(stdout: &mut dyn Write, text: &str) -> Result<()> {
    stdout
        .write_all(text.as_bytes())
        .map_err(|e| Error::io("writing to stdout", e))
}

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::io(format!("reading {}", path.display()), e))
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).map_err(|e| Error::io(format!("writing {}", path.display()), e))
}

fn load_scenario(preset: Option<&str>, config: Option<&Path>) -> Result<Scenario> {
    match (preset, config) {
        (_, Some(path)) => Scenario::from_json(&read_file(path)?),
        (Some(name), None) => Ok(Scenario::preset(name)),
        (None, None) => Ok(Scenario::default()),
    }
}

fn mu_dir_name(mu: f64) -> String {
    format!("mu_{mu}")
}

/// Runs the scenario once per requested orientation (concurrently when more
/// than one) and writes `timeseries.csv` and `summary.json` for each.
pub fn cmd_simulate(
    scenario: &Scenario,
    mus: &[f64],
    out: Option<PathBuf>,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let network = scenario.build_network()?;
    let registry = LawRegistry::builtin();
    let law = registry.get(&scenario.law)?;
    let mus: Vec<f64> = if mus.is_empty() {
        vec![scenario.mu_deg]
    } else {
        mus.to_vec()
    };

    let base = out.or_else(|| scenario.out_dir.clone());
    let dir_for = |mu: f64| match (&base, mus.len()) {
        (Some(dir), 1) => dir.clone(),
        (Some(dir), _) => dir.join(mu_dir_name(mu)),
        (None, _) => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_ROOT))
            .join(mu_dir_name(mu)),
    };

    let run_one = |mu: f64| -> Result<TraversalLog> {
        let mut s = scenario.clone();
        s.mu_deg = mu;
        let orientation = s.orientation()?;
        let traversal = Traversal::new(&network, orientation, &s.robot, &s.gear, law.as_ref())?;
        traversal.run(s.dt_ms * 1e-3, s.sample_ms * 1e-3)
    };
    let logs: Vec<Result<TraversalLog>> = std::thread::scope(|scope| {
        let handles: Vec<_> = mus
            .iter()
            .map(|&mu| scope.spawn(move || run_one(mu)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    });

    for (mu, log) in mus.iter().zip(logs) {
        let log = log?;
        let dir = dir_for(*mu);
        std::fs::create_dir_all(&dir)
            .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        let csv = log.to_csv();
        let summary =
            serde_json::to_string_pretty(&log.summary).expect("summary serializes to JSON") + "\n";
        write_file(&dir.join(CSV_FILE), &csv)?;
        write_file(&dir.join(SUMMARY_FILE), &summary)?;
        match format {
            Format::Text => emit(stdout, &summary_text(&log.summary, scenario, &dir))?,
            Format::Json => emit(stdout, &summary)?,
            Format::Csv => emit(stdout, &csv)?,
        }
    }
    Ok(EXIT_OK)
}

fn summary_text(summary: &Summary, scenario: &Scenario, dir: &Path) -> String {
    let mut t = String::new();
    let _ = writeln!(t, "law {}, mu = {}°", summary.law, summary.mu_deg);
    let _ = writeln!(
        t,
        "nominal speed      {:.3} mm/s",
        summary.nominal_speed_mm_s
    );
    let _ = writeln!(
        t,
        "robot path         {:.2} mm of {:.2} mm centerline",
        summary.effective_path_mm, summary.centerline_length_mm
    );
    let _ = writeln!(
        t,
        "total time         {:.3} s (path / speed = {:.3} s)",
        summary.total_time_s, summary.predicted_time_s
    );
    let r = &summary.reference;
    let _ = writeln!(
        t,
        "published estimate {:.2} s = {:.2} mm / {:.2} mm/s (stated robot path {:.2} mm)",
        r.estimate_time_s, r.estimate_path_mm, r.estimate_speed_mm_s, r.stated_robot_path_mm
    );
    let _ = writeln!(
        t,
        "tilt limit         {:.2}°",
        asym_tilt_limit(&scenario.robot)
    );
    let _ = writeln!(t, "sections:");
    for s in &summary.sections {
        let _ = writeln!(
            t,
            "  {:>2} {:<18} {:<8} {:>8.3} s -> {:>8.3} s",
            s.index, s.label, s.kind, s.enter_s, s.exit_s
        );
    }
    let _ = writeln!(t, "tracks:            distance    geometric       slip");
    for (i, name) in TRACK_NAMES.iter().enumerate() {
        let _ = writeln!(
            t,
            "  {name}            {:>12.3} {:>12.3} {:>10.3e}",
            summary.track_distance_mm[i],
            summary.expected_track_path_mm[i],
            summary.signed_slip_mm[i]
        );
    }
    let _ = writeln!(t, "written to {}", dir.display());
    t
}

#[allow(clippy::too_many_arguments)]
pub fn cmd_geartrain(
    input_rpm: f64,
    k: f64,
    j: f64,
    ratios: Option<Vec<f64>>,
    rim: bool,
    ds: f64,
    format: Format,
    stdout: &mut dyn Write,
) -> Result<i32> {
    let params = GearParams::new(k, j, [0.0; 6])?;
    if !input_rpm.is_finite() {
        return Err(Error::config("input-rpm", "must be a number"));
    }
    if !(ds.is_finite() && ds > 0.0) {
        return Err(Error::config("ds", "must be a positive number"));
    }
    let outputs = match ratios {
        Some(r) => {
            let r: [f64; 3] = r
                .try_into()
                .map_err(|_| Error::config("ratios", "expected exactly three values"))?;
            distribute_speeds(&params, input_rpm, r)?
        }
        None => [equal_load_output_speed(&params, input_rpm); 3],
    };
    let rims = outputs.map(|rpm| rim_speed_mm_s(rpm, ds));
    let state = OodState::from_outputs(&params, input_rpm, outputs);
    let worst = verify_state(&params, &state)
        .iter()
        .map(|r| r.value.abs())
        .fold(0.0, f64::max);

    let text = match format {
        Format::Json => {
            let value = serde_json::json!({
                "input_rpm": input_rpm,
                "k": k,
                "j": j,
                "output_rpm": outputs,
                "rim_mm_s": rims,
                "sprocket_diameter_mm": ds,
                "max_residual_rpm": worst,
            });
            serde_json::to_string_pretty(&value).expect("json value serializes") + "\n"
        }
        Format::Csv => {
            let mut t = String::from("output,rpm,rim_mm_s\n");
            for i in 0..3 {
                let _ = writeln!(t, "O{},{:.6},{:.6}", i + 1, outputs[i], rims[i]);
            }
            t
        }
        Format::Text => {
            let mut t = String::new();
            let _ = writeln!(
                t,
                "{:<6} {:>10}{}",
                "output",
                "rpm",
                if rim { "   rim mm/s" } else { "" }
            );
            for i in 0..3 {
                let _ = write!(t, "{:<6} {:>10.4}", format!("O{}", i + 1), outputs[i]);
                if rim {
                    let _ = write!(t, " {:>10.3}", rims[i]);
                }
                t.push('\n');
            }
            let _ = writeln!(t, "sum    {:>10.4}", outputs.iter().sum::<f64>());
            let _ = writeln!(t, "max kinematic residual {worst:.3e} rpm");
            t
        }
    };
    emit(stdout, &text)?;
    Ok(EXIT_OK)
}

/// Loads a run directory written by `simulate`.
pub fn load_run(dir: &Path) -> Result<TraversalLog> {
    let summary_text = read_file(&dir.join(SUMMARY_FILE))?;
    let summary: Summary = serde_json::from_str(&summary_text)
        .map_err(|e| Error::config(dir.join(SUMMARY_FILE).display().to_string(), e.to_string()))?;
    let rows = TraversalLog::rows_from_csv(&read_file(&dir.join(CSV_FILE))?)?;
    Ok(TraversalLog { rows, summary })
}

pub fn cmd_report(run_dirs: &[PathBuf], format: Format, stdout: &mut dyn Write) -> Result<i32> {
    let logs = run_dirs
        .iter()
        .map(|d| load_run(d))
        .collect::<Result<Vec<_>>>()?;
    let report = paper_report(&logs)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Text | Format::Csv => report.to_text(),
    };
    emit(stdout, &text)?;
    Ok(if report.passed { EXIT_OK } else { EXIT_BOUND })
}
