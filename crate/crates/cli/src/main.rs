use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rtm_core::geometry::{Point, SurfaceProfile};
use rtm_core::verify::report_table;

use rtm_cli::commands;
use rtm_cli::config::{parse_regime, Overrides, Preset, RunConfig};
use rtm_cli::exit::{CliError, EXIT_SOLVER};
use rtm_cli::selftest::{full_suite, quick_suite, DeskScale};

/// Rough-surface scattering and reverse-time-migration imaging.
#[derive(Parser)]
#[command(name = "rtm", version)]
struct Cli {
    /// Run configuration (TOML with [surface], [medium], [acquisition], [solver], [imaging], [noise]).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Input RTMD data file.
    #[arg(long, global = true)]
    data: Option<PathBuf>,
    /// Output file.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Acquisition regime, overriding the configuration.
    #[arg(long, global = true, value_parser = ["near", "far"])]
    regime: Option<String>,
    /// Worker threads (results do not depend on it).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Noise seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Parameter preset applied before the configuration file.
    #[arg(long, global = true, value_parser = ["desk-scale", "paper-scale"], default_value = "desk-scale")]
    preset: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Level {
    Quick,
    Full,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize scattering data and write an RTMD file.
    Forward,
    /// Evaluate the indicator for RTMD data and write an RTMG grid.
    Image {
        /// Also write a 16-bit PGM rendering.
        #[arg(long)]
        pgm: Option<PathBuf>,
    },
    /// Run the built-in identity checks.
    Selftest {
        #[arg(value_enum, default_value = "quick")]
        level: Level,
    },
    /// Render an RTMG grid as a 16-bit PGM.
    Render {
        /// Input RTMG grid.
        #[arg(long)]
        grid: PathBuf,
        /// Draw this built-in profile (f1, f2, f3) over the image.
        #[arg(long)]
        profile: Option<String>,
    },
    /// Evaluate a background Green's function at one point.
    Greens {
        /// Field point x1,x2.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        at: Point,
        /// Source point y1,y2.
        #[arg(long, value_parser = parse_point, allow_hyphen_values = true)]
        source: Point,
        /// Use the flat-surface closed form instead of the Γ_R background.
        #[arg(long)]
        flat: bool,
    },
}

fn parse_point(s: &str) -> Result<Point, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected x1,x2 but got {s:?}"));
    }
    let v = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok([v(parts[0])?, v(parts[1])?])
}

fn required(p: &Option<PathBuf>, flag: &str) -> Result<PathBuf, CliError> {
    p.clone().ok_or_else(|| CliError::config(format!("missing required flag --{flag}")))
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let preset = Preset::parse(&cli.preset).expect("clap restricts the preset names");
    let overrides = Overrides { regime: cli.regime.as_deref().and_then(parse_regime), seed: cli.seed };
    RunConfig::resolve(preset, cli.config.as_deref(), &overrides)
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let mut out = std::io::stdout().lock();
    let w = |e: std::io::Error| CliError::io(format!("cannot write to stdout: {e}"));
    match &cli.command {
        Command::Forward => {
            let output = required(&cli.out, "out")?;
            let cfg = resolve(cli)?;
            write!(out, "{}", cfg.provenance()).map_err(w)?;
            commands::forward(&cfg, &output, &mut out)?;
        }
        Command::Image { pgm } => {
            let output = required(&cli.out, "out")?;
            let data_path = required(&cli.data, "data")?;
            let cfg = resolve(cli)?;
            write!(out, "{}", cfg.provenance()).map_err(w)?;
            let data = commands::load_data(&data_path)?;
            let img = commands::image(&cfg, &data)?;
            commands::write_grid_file(&img.grid, &output)?;
            writeln!(out, "wrote {}", output.display()).map_err(w)?;
            writeln!(out, "summary: {}", img.summary).map_err(w)?;
            if let Some(path) = pgm {
                match commands::render(&img.grid, None) {
                    Ok(bytes) => {
                        commands::write_bytes(&bytes, path)?;
                        writeln!(out, "wrote {}", path.display()).map_err(w)?;
                    }
                    Err(e) => writeln!(out, "render skipped: {e}").map_err(w)?,
                }
            }
        }
        Command::Selftest { level } => {
            let reports = match level {
                Level::Quick => quick_suite()?,
                Level::Full => full_suite(&DeskScale::default())?,
            };
            write!(out, "{}", report_table(&reports)).map_err(w)?;
            for r in &reports {
                writeln!(out, "{}", r.summary_line()).map_err(w)?;
            }
            if reports.iter().any(|r| !r.pass) {
                return Ok(EXIT_SOLVER);
            }
        }
        Command::Render { grid, profile } => {
            let output = required(&cli.out, "out")?;
            writeln!(out, "grid = {}\nout = {}\nprofile = {}", grid.display(), output.display(), profile.as_deref().unwrap_or("-"))
                .map_err(w)?;
            let overlay = match profile.as_deref() {
                None => None,
                Some("f1") => Some(SurfaceProfile::f1()),
                Some("f2") => Some(SurfaceProfile::f2()),
                Some("f3") => Some(SurfaceProfile::f3()),
                Some(p) => return Err(CliError::config(format!("unknown overlay profile {p:?}; expected f1, f2 or f3"))),
            };
            let g = commands::read_grid_file(grid)?;
            let bytes = commands::render(&g, overlay.as_ref())?;
            commands::write_bytes(&bytes, &output)?;
            writeln!(out, "wrote {}", output.display()).map_err(w)?;
        }
        Command::Greens { at, source, flat } => {
            let cfg = resolve(cli)?;
            write!(out, "{}", cfg.provenance()).map_err(w)?;
            commands::greens(&cfg, *flat, *at, *source, &mut out)?;
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: cannot set up {n} threads: {e}");
            return ExitCode::from(2);
        }
    }
    match run(&cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code as u8)
        }
    }
}
