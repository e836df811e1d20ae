//! Argument parsing and the `simulate` / `validate` commands.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use contingo_core::{run_simulation, scenario_compare, SimulationSummary};

use crate::input::{parse_inputs, ConfigOverrides, InputBundle, InputPaths};
use crate::output::{write_atomic, Format, Table};
use crate::plot;
use crate::report::{human_report, machine_report, Analysis, ScenarioStats};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Monte Carlo cost-contingency estimation for project schedules.
#[derive(Debug, Parser)]
#[command(name = "contingo", version)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate the project and write the report and plot data.
    Simulate(SimulateArgs),
    /// Check the input documents and report every problem found.
    Validate(InputArgs),
}

#[derive(Debug, Args)]
pub struct InputArgs {
    /// Project network document (JSON).
    #[arg(long)]
    pub project: PathBuf,
    /// Risk register document (JSON).
    #[arg(long)]
    pub risks: PathBuf,
    /// Qualitative level scales document (JSON).
    #[arg(long)]
    pub scales: PathBuf,
    /// Optional settings document (JSON); flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub inputs: InputArgs,
    /// Number of Monte Carlo runs [default: 10000].
    #[arg(long)]
    pub iterations: Option<u64>,
    /// Master seed; each run derives its own stream from it [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Reserve percentiles, comma separated [default: 70,80,90].
    #[arg(long, value_delimiter = ',')]
    pub percentiles: Option<Vec<f64>>,
    /// Also report a reserve of this percentage of the planned cost.
    #[arg(long)]
    pub benchmark_percentage: Option<f64>,
    /// Also report reserves against the planned cost truncated to whole units.
    #[arg(long)]
    pub whole_unit_reference: bool,
    /// Also simulate the aleatoric-only scenario and write paired outputs.
    #[arg(long)]
    pub compare_aleatoric: bool,
    /// Output directory (created if missing).
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads [default: all cores].
    #[arg(long, env = "CONTINGO_WORKERS")]
    pub workers: Option<usize>,
    /// Machine-readable output format.
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    /// Histogram bin count [default: Sturges' rule].
    #[arg(long)]
    pub bins: Option<usize>,
}

impl SimulateArgs {
    fn overrides(&self) -> ConfigOverrides {
        ConfigOverrides {
            iterations: self.iterations,
            seed: self.seed,
            workers: self.workers,
            percentiles: self.percentiles.clone(),
            benchmark_percentage: self.benchmark_percentage,
            whole_unit_reference: self.whole_unit_reference.then_some(true),
        }
    }
}

fn paths(args: &InputArgs) -> InputPaths {
    InputPaths {
        project: args.project.clone(),
        risks: args.risks.clone(),
        scales: args.scales.clone(),
        config: args.config.clone(),
    }
}

/// Runs the tool and returns the process exit status.
pub fn run_cli<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(text.as_bytes())
            } else {
                stdout.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match cli.command {
        Command::Validate(args) => validate(&args, stdout, stderr),
        Command::Simulate(args) => simulate(&args, stdout, stderr),
    }
}

fn load(paths: &InputPaths, overrides: &ConfigOverrides, stderr: &mut dyn Write) -> Option<InputBundle> {
    match parse_inputs(paths, overrides) {
        Ok(bundle) => Some(bundle),
        Err(diagnostics) => {
            for d in &diagnostics {
                let _ = writeln!(stderr, "{d}");
            }
            let _ = writeln!(stderr, "{} problem(s) found", diagnostics.len());
            None
        }
    }
}

fn validate(args: &InputArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    match load(&paths(args), &ConfigOverrides::default(), stderr) {
        Some(b) => {
            let _ = writeln!(
                stdout,
                "ok: {} activities, {} risks",
                b.network.activities.len(),
                b.register.risks.len()
            );
            EXIT_OK
        }
        None => EXIT_FAILURE,
    }
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32 {
    let Some(bundle) = load(&paths(&args.inputs), &args.overrides(), stderr) else {
        return EXIT_FAILURE;
    };
    match execute(&bundle, args) {
        Ok((report, written)) => {
            let _ = stdout.write_all(report.as_bytes());
            let _ = writeln!(stdout);
            for p in written {
                let _ = writeln!(stdout, "wrote {}", p.display());
            }
            EXIT_OK
        }
        Err(message) => {
            let _ = writeln!(stderr, "error: {message}");
            EXIT_FAILURE
        }
    }
}

/// Simulates, analyses and writes every output; returns the human report and
/// the written paths.
fn execute(bundle: &InputBundle, args: &SimulateArgs) -> Result<(String, Vec<PathBuf>), String> {
    let config = &bundle.settings.simulation;
    let request = &bundle.settings.contingency;
    let (aleatoric, full): (Option<SimulationSummary>, SimulationSummary) = if args.compare_aleatoric {
        let (a, f) = scenario_compare(&bundle.network, &bundle.register, config).map_err(|e| e.to_string())?;
        (Some(a), f)
    } else {
        (
            None,
            run_simulation(&bundle.network, &bundle.register, config).map_err(|e| e.to_string())?,
        )
    };
    let analysis = Analysis::new(&full, aleatoric.as_ref(), request).map_err(|e| e.to_string())?;

    fs::create_dir_all(&args.out).map_err(|e| format!("cannot create {}: {e}", args.out.display()))?;
    let mut writer = Writer {
        dir: &args.out,
        format: args.format,
        written: Vec::new(),
    };
    let human = human_report(&analysis);
    writer.write("report.txt", &human)?;
    writer.write(
        &format!("report.{}", args.format.extension()),
        &machine_report(&analysis, args.format),
    )?;

    let metadata = analysis.metadata();
    let full_meta = metadata.with("scenario", "full register");
    writer.data(
        "",
        &scenario_tables(&analysis.full, &full, args.bins, &request.percentiles),
        &full_meta,
    )?;
    if let (Some(stats), Some(summary)) = (&analysis.aleatoric, &aleatoric) {
        let meta = metadata.with("scenario", "aleatoric only");
        writer.data(
            "aleatoric_",
            &scenario_tables(stats, summary, args.bins, &request.percentiles),
            &meta,
        )?;
        let comparison = plot::comparison_table(stats, &analysis.full, &request.percentiles);
        writer.data(
            "",
            &[("comparison", comparison)],
            &metadata.with("scenario", "aleatoric only vs full register"),
        )?;
    }
    Ok((human, writer.written))
}

fn scenario_tables(
    stats: &ScenarioStats,
    summary: &SimulationSummary,
    bins: Option<usize>,
    requested: &[f64],
) -> Vec<(&'static str, Table)> {
    vec![
        ("histogram", plot::histogram_table(&stats.costs, bins)),
        ("ecdf", plot::ecdf_table(stats)),
        ("scatter", plot::scatter_table(summary)),
        ("percentiles", plot::percentile_table(stats, requested)),
    ]
}

struct Writer<'a> {
    dir: &'a Path,
    format: Format,
    written: Vec<PathBuf>,
}

impl Writer<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), String> {
        let path = self.dir.join(name);
        write_atomic(&path, contents).map_err(|e| e.to_string())?;
        self.written.push(path);
        Ok(())
    }

    fn data(
        &mut self,
        prefix: &str,
        tables: &[(&'static str, Table)],
        metadata: &crate::output::Metadata,
    ) -> Result<(), String> {
        for (name, table) in tables {
            let file = format!("{prefix}{name}.{}", self.format.extension());
            self.write(&file, &table.render(self.format, metadata))?;
        }
        Ok(())
    }
}
