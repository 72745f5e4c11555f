use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pfdsim::config::Calibration;
use pfdsim::devices::CornerName;
use pfdsim::engine::{Integrator, TransientResult};
use pfdsim::experiments::{self as exp, Bench, DesignPoint, ExperimentReport, SweepMetrics};
use pfdsim::netlist::OutputStage;
use pfdsim::report::{generate_report, ReportFile};
use pfdsim::Error;

mod plot;

const EXIT_USAGE: u8 = 1;
const EXIT_SOLVER: u8 = 2;
const EXIT_ASSERTION: u8 = 3;

/// Transistor-level characterization of a 16-FET phase frequency detector.
///
/// All numeric flags are in SI base units (m, s, Hz).
#[derive(Debug, Parser)]
#[command(name = "pfdsim", version, arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Single offset run; writes waveforms and the measured decision.
    #[command(allow_negative_numbers = true)]
    Transient {
        #[command(flatten)]
        common: Common,
        /// Simulated periods (ignored when --t-stop is given).
        #[arg(long, default_value_t = exp::DEFAULT_PERIODS)]
        periods: usize,
        /// Simulated duration (s).
        #[arg(long)]
        t_stop: Option<f64>,
    },
    /// Smallest resolvable offset, by bisection over both polarities.
    #[command(allow_negative_numbers = true)]
    Deadzone {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = exp::DEAD_ZONE_TOL)]
        tol: f64,
        #[arg(long, default_value_t = exp::DEAD_ZONE_BRACKET.0)]
        search_lo: f64,
        #[arg(long, default_value_t = exp::DEAD_ZONE_BRACKET.1)]
        search_hi: f64,
    },
    /// Offset of half a period; checks the steady-state decision.
    #[command(allow_negative_numbers = true)]
    Halfperiod {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = exp::HALF_PERIOD_PERIODS)]
        periods: usize,
    },
    /// Highest frequency at which a fixed relative offset is resolved.
    #[command(allow_negative_numbers = true)]
    Fmax {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = exp::FMAX_OFFSET_FRACTION)]
        offset_fraction: f64,
        #[arg(long, default_value_t = exp::FMAX_BRACKET.0)]
        f_lo: f64,
        #[arg(long, default_value_t = exp::FMAX_BRACKET.1)]
        f_hi: f64,
        #[arg(long, default_value_t = exp::FMAX_TOL_REL)]
        tol_rel: f64,
    },
    /// Reference and feedback at different frequencies.
    #[command(allow_negative_numbers = true)]
    Mismatch {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 1e9)]
        f_ref: f64,
        #[arg(long, default_value_t = 0.8e9)]
        f_fb: f64,
        /// Simulated reference periods.
        #[arg(long, default_value_t = exp::HALF_PERIOD_PERIODS)]
        periods: usize,
    },
    /// Linear width sweep (offset defaults to a quarter period).
    #[command(allow_negative_numbers = true)]
    SweepWidth {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = exp::WIDTH_SWEEP.0)]
        w_lo: f64,
        #[arg(long, default_value_t = exp::WIDTH_SWEEP.1)]
        w_hi: f64,
        #[arg(long, default_value_t = exp::WIDTH_SWEEP.2)]
        steps: usize,
        #[command(flatten)]
        searches: Searches,
    },
    /// One run per process corner; every corner must decide correctly.
    #[command(allow_negative_numbers = true)]
    Corners {
        #[command(flatten)]
        common: Common,
        /// Comma-separated corner names.
        #[arg(long, value_delimiter = ',', default_values_t = CornerName::ALL)]
        corners: Vec<CornerName>,
        #[command(flatten)]
        searches: Searches,
    },
    /// Summary table over report.json files written by earlier runs.
    Report {
        /// report.json files or directories containing one.
        #[arg(long = "input", required = true, num_args = 1..)]
        inputs: Vec<PathBuf>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
}

#[derive(Debug, Args)]
struct Common {
    /// Transistor width (m).
    #[arg(long, default_value_t = 260e-9)]
    width: f64,
    /// Transistor length (m).
    #[arg(long, default_value_t = 100e-9)]
    length: f64,
    #[arg(long, default_value_t = CornerName::Tt)]
    corner: CornerName,
    /// Input frequency (Hz).
    #[arg(long, default_value_t = exp::DEFAULT_FREQUENCY)]
    freq: f64,
    /// Signed input offset (s); positive means A leads.
    #[arg(long, allow_hyphen_values = true)]
    offset: Option<f64>,
    /// Base time step (s).
    #[arg(long)]
    dt: Option<f64>,
    /// `trap` or `be`.
    #[arg(long, default_value = "trap")]
    integrator: Integrator,
    /// `input-gated` or `cross-coupled`.
    #[arg(long, default_value = "input-gated")]
    output_stage: OutputStage,
    /// Device calibration file.
    #[arg(long)]
    params: Option<PathBuf>,
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also write SVG plots.
    #[arg(long)]
    plot: bool,
    /// Worker threads for sweeps and searches.
    #[arg(long)]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct Searches {
    /// Also measure f_max for every row.
    #[arg(long)]
    with_fmax: bool,
    /// Also measure the dead zone for every row.
    #[arg(long)]
    with_deadzone: bool,
}

impl Searches {
    fn metrics(&self) -> SweepMetrics {
        SweepMetrics {
            dead_zone: self.with_deadzone,
            f_max: self.with_fmax,
        }
    }
}

/// Resolved inputs shared by every experiment subcommand.
struct Setup {
    bench: Bench,
    point: DesignPoint,
    out: PathBuf,
    plot: bool,
}

impl Common {
    fn setup(&self, default_offset: f64) -> pfdsim::Result<Setup> {
        let cal = match &self.params {
            Some(path) => Calibration::load(path)?,
            None => Calibration::default(),
        };
        let bench = Bench {
            integrator: self.integrator,
            output_stage: self.output_stage,
            dt: self.dt,
            ..Bench::new(cal)
        };
        bench.validate()?;
        let point = DesignPoint {
            width: self.width,
            length: self.length,
            corner: bench.cal.corner(self.corner),
            frequency: self.freq,
            offset: self.offset.unwrap_or(default_offset),
        };
        point.validate()?;
        if let Some(jobs) = self.jobs {
            exp::set_jobs(jobs)?;
        }
        Ok(Setup {
            bench,
            point,
            out: self.out.clone(),
            plot: self.plot,
        })
    }
}

enum Failure {
    Usage(String),
    Solver(String),
    Assertion(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_solver_failure() {
            Failure::Solver(e.to_string())
        } else if matches!(e, Error::Assertion(_) | Error::NoLockWindow(_)) {
            Failure::Assertion(e.to_string())
        } else {
            Failure::Usage(e.to_string())
        }
    }
}

type CliResult = Result<(), Failure>;

fn positive(name: &str, v: f64) -> pfdsim::Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "{name} must be > 0 (got {v:e})"
        )))
    }
}

fn write(dir: &Path, name: &str, contents: &str) -> pfdsim::Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Writes `report.json` and `summary.txt`, and echoes the summary.
fn write_reports(
    dir: &Path,
    experiment: &str,
    reports: Vec<ExperimentReport>,
    details: serde_json::Value,
) -> pfdsim::Result<()> {
    let summary = generate_report(&[(experiment.to_string(), reports.clone())])?;
    let file = ReportFile {
        experiment: experiment.to_string(),
        reports,
        details,
    };
    write(dir, "report.json", &file.to_json()?)?;
    let text = summary.to_text();
    write(dir, "summary.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn write_waves(s: &Setup, result: &TransientResult) -> pfdsim::Result<()> {
    write(&s.out, "waves.csv", &result.to_csv())?;
    if s.plot {
        write(&s.out, "plot_waves.svg", &plot::waveforms(result)?)?;
    }
    Ok(())
}

fn assertion(ok: bool, message: String) -> CliResult {
    if ok {
        Ok(())
    } else {
        Err(Failure::Assertion(message))
    }
}

fn run(command: Command) -> CliResult {
    match command {
        Command::Transient {
            common,
            periods,
            t_stop,
        } => {
            let mut s = common.setup(exp::DEFAULT_OFFSET)?;
            if let Some(t) = t_stop {
                positive("t_stop", t)?;
            }
            s.bench.t_stop = t_stop;
            let n = match t_stop {
                Some(t) => (t * s.point.frequency).ceil() as usize,
                None => periods,
            };
            let (report, result) = exp::run_offset_experiment_with_waves(&s.bench, &s.point, n)?;
            write_waves(&s, &result)?;
            write_reports(&s.out, "transient", vec![report], serde_json::Value::Null)?;
        }
        Command::Deadzone {
            common,
            tol,
            search_lo,
            search_hi,
        } => {
            let s = common.setup(exp::DEFAULT_OFFSET)?;
            let dz = exp::measure_dead_zone(&s.bench, &s.point, search_lo, search_hi, tol)?;
            let mut report = exp::run_offset_experiment(&s.bench, &s.point, exp::DEFAULT_PERIODS)?;
            report.dead_zone = Some(dz.value);
            write_reports(&s.out, "deadzone", vec![report], json!(dz))?;
        }
        Command::Halfperiod { common, periods } => {
            let s = common.setup(exp::DEFAULT_OFFSET)?;
            let (hp, result) = exp::half_period_test(&s.bench, &s.point, periods)?;
            write_waves(&s, &result)?;
            let stable = hp.stable;
            let checked = hp.checked_periods;
            write_reports(&s.out, "halfperiod", vec![hp.report.clone()], json!(hp))?;
            assertion(
                stable,
                format!("decision not stable over the last {checked} periods"),
            )?;
        }
        Command::Fmax {
            common,
            offset_fraction,
            f_lo,
            f_hi,
            tol_rel,
        } => {
            let s = common.setup(exp::DEFAULT_OFFSET)?;
            let found =
                exp::measure_fmax(&s.bench, &s.point, offset_fraction, f_lo, f_hi, tol_rel)?;
            let point = DesignPoint {
                frequency: found.value,
                offset: offset_fraction / found.value,
                ..s.point
            };
            let mut report = exp::run_offset_experiment(&s.bench, &point, exp::DEFAULT_PERIODS)?;
            report.f_max = Some(found.value);
            write_reports(&s.out, "fmax", vec![report], json!(found))?;
        }
        Command::Mismatch {
            common,
            f_ref,
            f_fb,
            periods,
        } => {
            let s = common.setup(0.0)?;
            let (mm, result) =
                exp::frequency_mismatch_test(&s.bench, &s.point, f_ref, f_fb, periods)?;
            write_waves(&s, &result)?;
            let consistent = mm.consistent;
            let message = format!(
                "UP high time {:e} s, DN high time {:e} s",
                mm.up_high_time, mm.dn_high_time
            );
            write_reports(&s.out, "mismatch", vec![mm.report.clone()], json!(mm))?;
            assertion(consistent, message)?;
        }
        Command::SweepWidth {
            common,
            w_lo,
            w_hi,
            steps,
            searches,
        } => {
            let s = common.setup(0.25 / common.freq)?;
            let rows = exp::width_sweep(&s.bench, w_lo, w_hi, steps, &s.point, searches.metrics())?;
            if s.plot {
                for (name, svg) in plot::width_plots(&rows) {
                    write(&s.out, &name, &svg)?;
                }
            }
            write_reports(&s.out, "sweep-width", rows, serde_json::Value::Null)?;
        }
        Command::Corners {
            common,
            corners,
            searches,
        } => {
            let s = common.setup(exp::DEFAULT_OFFSET)?;
            let rows = exp::corner_reports(&s.bench, &corners, &s.point, searches.metrics())?;
            if s.plot {
                write(&s.out, "plot_corners.svg", &plot::corner_plot(&rows))?;
            }
            write_reports(&s.out, "corners", rows.clone(), serde_json::Value::Null)?;
            exp::check_decisions(&rows)?;
        }
        Command::Report { inputs, out } => {
            let mut tables = Vec::new();
            for input in inputs {
                let path = if input.is_dir() {
                    input.join("report.json")
                } else {
                    input
                };
                let text = fs::read_to_string(&path)
                    .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
                let file = ReportFile::from_json(&text).map_err(|e| {
                    Failure::Usage(format!("{} is not a report file: {e}", path.display()))
                })?;
                tables.push((file.experiment, file.reports));
            }
            let summary = generate_report(&tables)?;
            write(&out, "report.json", &summary.to_json()?)?;
            let text = summary.to_text();
            write(&out, "summary.txt", &text)?;
            print!("{text}");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = e.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    eprint!("{}", e.render());
                    ExitCode::from(EXIT_USAGE)
                }
            };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Solver(m)) => {
            eprintln!("solver failure: {m}");
            ExitCode::from(EXIT_SOLVER)
        }
        Err(Failure::Assertion(m)) => {
            eprintln!("experiment failed: {m}");
            ExitCode::from(EXIT_ASSERTION)
        }
    }
}
