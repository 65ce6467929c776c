use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use xlab_cli::config::{ConfigFile, Family};
use xlab_cli::error::{CliError, CliResult};
use xlab_cli::{experiment, output, verify};
use xlab_core::tgx;

#[derive(Parser)]
#[command(name = "xlab", version, about = "X-state entanglement experiments")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a state family and record entanglement, purity and rank.
    Scatter(Common),
    /// Run a conversion campaign of random two-qubit states to X form.
    Convert(Common),
    /// Print the TGX mask for subsystem dimensions such as 2x3 or 2x2x2.
    Mask(Common),
    /// Tabulate the MEMS entanglement-purity boundary.
    MemsCurve(Common),
    /// Run the invariant and acceptance checks.
    Verify(Common),
}

#[derive(Args, Clone)]
struct Common {
    /// JSON file with any of the flags below; explicit flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// 2x2 or 2x3 (mask accepts any dims, e.g. 2x2x2).
    #[arg(long)]
    system: Option<String>,
    /// general, x, lx, tgx, mems or h.
    #[arg(long)]
    family: Option<String>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Concurrence acceptance window for conversions.
    #[arg(long)]
    tol: Option<f64>,
    /// Maximum candidates per conversion.
    #[arg(long)]
    budget: Option<usize>,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// SVG plot path (scatter and mems-curve).
    #[arg(long)]
    plot: Option<PathBuf>,
    /// csv or json (mask: ascii or json).
    #[arg(long)]
    format: Option<String>,
    /// Worker threads.
    #[arg(long, env = "XLAB_THREADS")]
    threads: Option<usize>,
}

struct Resolved {
    file: ConfigFile,
    system_text: Option<String>,
}

impl Common {
    fn resolve(&self, any_dims: bool) -> CliResult<Resolved> {
        let base = match &self.config {
            Some(p) => ConfigFile::load(p)?,
            None => ConfigFile::default(),
        };
        let system = match (&self.system, any_dims) {
            (Some(s), false) => Some(s.parse()?),
            (Some(s), true) => s.parse().ok(),
            (None, _) => None,
        };
        let family = self.family.as_deref().map(str::parse::<Family>).transpose()?;
        let flags = ConfigFile {
            system,
            family,
            rank: self.rank,
            samples: self.samples,
            seed: self.seed,
            tol: self.tol,
            budget: self.budget,
            threads: self.threads,
            out: self.out.as_ref().map(|p| p.display().to_string()),
            plot: self.plot.as_ref().map(|p| p.display().to_string()),
            format: self.format.clone(),
        };
        Ok(Resolved { file: base.overlay(flags), system_text: self.system.clone() })
    }
}

enum Format {
    Csv,
    Json,
}

fn data_format(file: &ConfigFile) -> CliResult<Format> {
    match file.format.as_deref().unwrap_or("csv") {
        "csv" => Ok(Format::Csv),
        "json" => Ok(Format::Json),
        f => Err(CliError::Config(format!("unknown format '{f}', expected csv or json"))),
    }
}

fn path_of(s: &Option<String>) -> Option<&Path> {
    s.as_deref().map(Path::new)
}

fn init_threads(file: &ConfigFile) -> CliResult<()> {
    if let Some(n) = file.threads {
        if n == 0 {
            return Err(CliError::Config("threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    Ok(())
}

fn scatter(r: Resolved) -> CliResult<u8> {
    let cfg = r.file.experiment()?;
    let recs = experiment::run_scatter(&cfg)?;
    let text = match data_format(&r.file)? {
        Format::Csv => output::records_csv(&recs)?,
        Format::Json => output::records_json(&recs)?,
    };
    output::write_text(path_of(&r.file.out), &text)?;
    if let Some(plot) = path_of(&r.file.plot) {
        output::write_text(Some(plot), &output::scatter_svg(&recs, cfg.system)?)?;
    }
    Ok(0)
}

fn convert(r: Resolved) -> CliResult<u8> {
    let mut file = r.file;
    file.samples = file.samples.or(Some(1000));
    let cfg = file.experiment()?;
    let campaign = experiment::run_conversion_campaign(&cfg)?;
    let text = match data_format(&file)? {
        Format::Csv => output::conversion_csv(&campaign.records)?,
        Format::Json => serde_json::to_string_pretty(&campaign).expect("campaign serializes") + "\n",
    };
    output::write_text(path_of(&file.out), &text)?;
    let s = &campaign.summary;
    eprintln!(
        "{}/{} converted, max |dC| {:.3e}, max anti-X {:.3e}, max attempts {}",
        s.successes, s.samples, s.max_delta_c, s.max_anti_x, s.max_attempts
    );
    for f in &s.failures {
        eprintln!("failed: sample {} seed {} rank {} best |dC| {:.3e} after {} attempts", f.sample_index, f.seed, f.rank, f.best_delta_c, f.attempts);
    }
    Ok(if s.failures.is_empty() { 0 } else { 2 })
}

fn parse_dims(text: &str) -> CliResult<Vec<usize>> {
    text.split('x')
        .map(|d| d.trim().parse::<usize>().map_err(|_| CliError::Config(format!("bad dims '{text}'"))))
        .collect()
}

fn mask(r: Resolved) -> CliResult<u8> {
    let dims = parse_dims(r.system_text.as_deref().unwrap_or("2x2"))?;
    let m = tgx::tgx_mask(&dims)?;
    let text = match r.file.format.as_deref().unwrap_or("ascii") {
        "ascii" => m.to_ascii(),
        "json" => {
            let pairs: Vec<[usize; 2]> = m.pairs().into_iter().map(|(i, j)| [i, j]).collect();
            serde_json::to_string(&serde_json::json!({ "dims": dims, "n": m.n(), "pairs": pairs })).expect("json") + "\n"
        }
        f => return Err(CliError::Config(format!("unknown mask format '{f}', expected ascii or json"))),
    };
    output::write_text(path_of(&r.file.out), &text)?;
    Ok(0)
}

fn mems_curve(r: Resolved) -> CliResult<u8> {
    let system = r.file.system.unwrap_or(xlab_cli::System::TwoQubit);
    let n = r.file.samples.unwrap_or(output::BOUNDARY_POINTS);
    if n == 0 {
        return Err(CliError::Config("samples must be at least 1".into()));
    }
    let curve = output::boundary_curve(system, n);
    let text = match data_format(&r.file)? {
        Format::Csv => output::curve_csv(&curve)?,
        Format::Json => {
            let pts: Vec<serde_json::Value> =
                curve.iter().map(|(p, e)| serde_json::json!({ "purity": p, "entanglement": e })).collect();
            serde_json::to_string_pretty(&pts).expect("json") + "\n"
        }
    };
    output::write_text(path_of(&r.file.out), &text)?;
    if let Some(plot) = path_of(&r.file.plot) {
        let recs: Vec<experiment::SampleRecord> = curve
            .iter()
            .enumerate()
            .map(|(i, &(p, e))| experiment::SampleRecord { entanglement: e, purity: p, rank: 0, family: "mems".into(), sample_index: i as u64 })
            .collect();
        output::write_text(Some(plot), &output::scatter_svg(&recs, system)?)?;
    }
    Ok(0)
}

fn run_verify() -> CliResult<u8> {
    let mut all = true;
    for check in verify::library_checks() {
        let o = check();
        println!("{}", o.line());
        all &= o.passed;
    }
    let exe = std::env::current_exe().map_err(|e| CliError::io("current executable", e))?;
    let o = verify::determinism(&exe);
    println!("{}", o.line());
    all &= o.passed;
    Ok(if all { 0 } else { 2 })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = (|| {
        let (common, cmd): (&Common, fn(Resolved) -> CliResult<u8>) = match &cli.command {
            Cmd::Scatter(c) => (c, scatter),
            Cmd::Convert(c) => (c, convert),
            Cmd::Mask(c) => (c, mask),
            Cmd::MemsCurve(c) => (c, mems_curve),
            Cmd::Verify(c) => (c, |_| run_verify()),
        };
        let resolved = common.resolve(matches!(cli.command, Cmd::Mask(_)))?;
        init_threads(&resolved.file)?;
        cmd(resolved)
    })();
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("xlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
