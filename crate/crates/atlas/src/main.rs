use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, ValueEnum};
use varifold_atlas::core_algorithms::varifold::Varifold;
use varifold_atlas::export::{arrangement_svg, to_obj};
use varifold_atlas::pipeline::{self, Built};
use varifold_atlas::{AtlasError, Config, Result, RunReport};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Command {
    Arrange,
    Enumerate,
    Build,
    Verify,
}

/// Stable minimal surfaces spanned by two families of planar curves.
#[derive(Parser, Debug)]
#[command(name = "varifold-atlas", version)]
struct Cli {
    command: Command,
    /// JSON configuration file.
    config: PathBuf,
    /// Write an SVG render of the arrangement.
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Directory for the report, OBJ meshes and relaxation logs.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
    /// Build only this varifold (enumeration index).
    #[arg(long, value_name = "K", conflicts_with = "all")]
    varifold: Option<usize>,
    /// Build every varifold (the default for build and verify).
    #[arg(long)]
    all: bool,
    /// Also write per-iteration relaxation CSV files.
    #[arg(long)]
    csv: bool,
    /// Check a previously written report against the configuration.
    #[arg(long, value_name = "REPORT")]
    replay: Option<PathBuf>,
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| AtlasError::io(path, e))
}

fn stem(p: &Path) -> String {
    p.file_stem().map_or_else(|| "config".into(), |s| s.to_string_lossy().into_owned())
}

fn export(cli: &Cli, dir: &Path, report: &mut RunReport, built: &[(usize, Built)]) -> Result<()> {
    let name = stem(&cli.config);
    let entries = report.varifolds.as_mut().expect("enumerated");
    for (k, b) in built {
        for (c, m) in b.meshes.iter().enumerate() {
            let file = format!("{name}_{k}_{c}.obj");
            write(&dir.join(&file), &to_obj(m))?;
            if let Some(comp) = entries[*k].build.as_mut().and_then(|r| r.components.get_mut(c)) {
                comp.obj = Some(file);
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<RunReport> {
    let start = Instant::now();
    pipeline::init_threads()?;
    let cfg = Config::load(&cli.config)?;
    let (arr, mut report) = pipeline::arrange(&cfg)?;
    if let Some(path) = &cli.svg {
        let labels = cli.varifold.map(|k| varifold_at(&arr, k)).transpose()?;
        write(path, &arrangement_svg(&arr, labels.as_ref()))?;
    }
    let out = cli.out.clone().or_else(|| (cli.command == Command::Build).then(|| PathBuf::from(".")));
    if let Some(dir) = &out {
        fs::create_dir_all(dir).map_err(|e| AtlasError::io(dir, e))?;
    }
    if cli.command != Command::Arrange {
        let vs = pipeline::enumerate(&arr, &mut report)?;
        if matches!(cli.command, Command::Build | Command::Verify) {
            let selection: Vec<usize> = match cli.varifold {
                Some(k) => vec![k],
                None => (0..vs.len()).collect(),
            };
            let built = pipeline::build(&cfg, &arr, &vs, &selection, &mut report)?;
            if cli.csv {
                let dir = out.as_deref().unwrap_or(Path::new("."));
                let name = stem(&cli.config);
                for (k, b) in &built {
                    for (c, csv) in b.relax_csv.iter().enumerate() {
                        write(&dir.join(format!("{name}_{k}_{c}_relax.csv")), csv)?;
                    }
                }
            }
            if let Some(dir) = &out {
                export(cli, dir, &mut report, &built)?;
            }
            for (k, b) in &built {
                if let Some(e) = &b.report.error {
                    eprintln!("varifold {k}: build failed: {e}");
                }
            }
            if cli.command == Command::Verify {
                pipeline::verify(&cfg, &arr, &vs, &mut report);
            } else {
                for (k, b) in &built {
                    let failed = b.report.error.is_some() || b.report.components.iter().any(|c| c.error.is_some());
                    report.checks.push(varifold_atlas::report::Check::new(
                        "build",
                        !failed,
                        format!("varifold {k}"),
                    ));
                }
            }
        }
        if let Some(path) = &cli.replay {
            let text = fs::read_to_string(path).map_err(|e| AtlasError::io(path, e))?;
            let saved = RunReport::from_json(&text).map_err(|e| AtlasError::Config(format!("{}: {e}", path.display())))?;
            report.checks.extend(pipeline::replay(&arr, &saved));
        }
    }
    report.timing.total_seconds = start.elapsed().as_secs_f64();
    if let Some(dir) = &out {
        write(&dir.join(format!("{}_report.json", stem(&cli.config))), &report.to_json())?;
    }
    Ok(report)
}

fn varifold_at(arr: &varifold_atlas::core_algorithms::arrangement::Arrangement, k: usize) -> Result<Varifold> {
    let vs = varifold_atlas::core_algorithms::varifold::enumerate_varifolds(arr);
    vs.get(k).cloned().ok_or_else(|| AtlasError::Config(format!("varifold {k} does not exist ({} enumerated)", vs.len())))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            // A closed pipe (e.g. `| head`) is not an error.
            let _ = writeln!(std::io::stdout().lock(), "{}", report.to_json());
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for n in &report.notices {
                eprintln!("notice: {n}");
            }
            for c in report.failures() {
                eprintln!("FAIL {}: {}", c.name, c.detail);
            }
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
