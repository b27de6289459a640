use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};

use projlink::cli::{load_config, run, Command, JobConfig};
use projlink::fs::C64;
use projlink::io;

/// Projective linking numbers, minimal bounding mass and hull estimates for
/// curves in CP^n.
#[derive(Parser, Debug)]
#[command(name = "projlink", version)]
struct Cli {
    /// Start from this job config (JSON); flags override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Print the effective config as JSON and exit.
    #[arg(long, global = true)]
    print_config: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Projective winding number of a curve against a section.
    Wind(Common),
    /// Projective linking number through a chain file or a cone.
    Link(Common),
    /// Affine linking number and the relation to the projective one.
    AffineLink(Common),
    /// Mass of a holomorphic chain.
    Mass(Common),
    /// Smallest eigenvalue of dd^C u + ω for u = log‖σ‖^{1/ℓ}.
    Defect(Common),
    /// Best-constant estimates and hull membership verdicts.
    Hull(Common),
    /// Infimum of reduced winding numbers and the minimal-mass estimate.
    Criterion(Common),
    /// Consistency checks on a curve/chain pair, or the bundled suite.
    Verify(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    #[arg(long)]
    curve: Option<PathBuf>,
    #[arg(long)]
    section: Option<PathBuf>,
    #[arg(long)]
    chain: Option<PathBuf>,
    /// Homogeneous coordinates, comma separated, e.g. `1,0.5-0.2i,0`.
    #[arg(long, value_parser = parse_point)]
    point: Option<Point>,
    /// Cone apex for `link`, same format as `--point`.
    #[arg(long, value_parser = parse_point)]
    apex: Option<Point>,
    /// Output directory for records, CSV and SVG.
    #[arg(long, short)]
    out: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Degrees as `a..=b`, `a..b` or a comma list.
    #[arg(long, value_parser = parse_degrees)]
    degrees: Option<Degrees>,
    /// Random restarts per degree (`criterion`) or starts per degree (`hull`).
    #[arg(long)]
    restarts: Option<usize>,
    /// Mass bound to test with `criterion`.
    #[arg(long)]
    lambda: Option<f64>,
    /// Grid points per side for `hull`.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    extent: Option<f64>,
    /// Write an SVG heat map for `hull` grids.
    #[arg(long)]
    svg: bool,
    /// Reduced `verify` battery.
    #[arg(long)]
    quick: bool,
    /// Minimum FS norm of the normalized section on the curve.
    #[arg(long)]
    clearance: Option<f64>,
    /// Newton seeds per chart axis.
    #[arg(long)]
    newton_grid: Option<usize>,
}

#[derive(Clone, Debug)]
struct Point(Vec<C64>);

#[derive(Clone, Debug)]
struct Degrees(Vec<u32>);

fn parse_point(s: &str) -> Result<Point, String> {
    s.split(',')
        .map(|p| C64::from_str(p.trim()).map_err(|e| format!("`{p}`: {e}")))
        .collect::<Result<_, _>>()
        .map(Point)
}

fn parse_degrees(s: &str) -> Result<Degrees, String> {
    let num = |t: &str| t.trim().parse::<u32>().map_err(|e| format!("`{t}`: {e}"));
    let d: Vec<u32> = if let Some((a, b)) = s.split_once("..=") {
        (num(a)?..=num(b)?).collect()
    } else if let Some((a, b)) = s.split_once("..") {
        (num(a)?..num(b)?).collect()
    } else {
        s.split(',').map(num).collect::<Result<_, _>>()?
    };
    Ok(Degrees(d))
}

fn apply(cfg: &mut JobConfig, command: Command, c: Common) {
    cfg.command = command;
    macro_rules! set {
        ($dst:expr, $src:expr) => {
            if let Some(v) = $src {
                $dst = v;
            }
        };
    }
    if c.curve.is_some() {
        cfg.curve = c.curve;
    }
    if c.section.is_some() {
        cfg.section = c.section;
    }
    if c.chain.is_some() {
        cfg.chain = c.chain;
    }
    if let Some(Point(p)) = c.point {
        cfg.point = Some(p);
    }
    if let Some(Point(p)) = c.apex {
        cfg.apex = Some(p);
    }
    if c.lambda.is_some() {
        cfg.lambda = c.lambda;
    }
    if c.threads.is_some() {
        cfg.threads = c.threads;
    }
    set!(cfg.output, c.out);
    if let Some(seed) = c.seed {
        cfg.seed = seed;
        cfg.criterion.seed = seed;
        cfg.hull.options.seed = seed;
        cfg.verify.seed = seed;
    }
    if let Some(Degrees(d)) = c.degrees {
        cfg.criterion.degrees = d.clone();
        cfg.hull.degrees = d;
    }
    if let Some(r) = c.restarts {
        cfg.criterion.restarts = r;
        cfg.hull.options.starts = r;
    }
    set!(cfg.hull.grid, c.grid);
    set!(cfg.hull.extent, c.extent);
    cfg.hull.svg |= c.svg;
    cfg.verify.quick |= c.quick;
    if let Some(e) = c.clearance {
        cfg.quadrature.clearance = e;
        cfg.criterion.clearance = e;
        cfg.defect.clearance = e;
    }
    set!(cfg.intersection.grid, c.newton_grid);
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let mut cfg = match &cli.config {
        Some(p) => match load_config(p) {
            Ok(c) => c,
            Err(e) => {
                eprintln!("config: [{}] {e}", e.kind());
                return ExitCode::from(1);
            }
        },
        None => JobConfig::default(),
    };
    let (command, common) = match cli.command {
        Cmd::Wind(c) => (Command::Wind, c),
        Cmd::Link(c) => (Command::Link, c),
        Cmd::AffineLink(c) => (Command::AffineLink, c),
        Cmd::Mass(c) => (Command::Mass, c),
        Cmd::Defect(c) => (Command::Defect, c),
        Cmd::Hull(c) => (Command::Hull, c),
        Cmd::Criterion(c) => (Command::Criterion, c),
        Cmd::Verify(c) => (Command::Verify, c),
    };
    apply(&mut cfg, command, common);
    if cli.print_config {
        print!("{}", io::to_canonical_json(&cfg));
        return ExitCode::SUCCESS;
    }
    let outcome = run(&cfg);
    if outcome.exit_code == 0 {
        println!("{}", outcome.summary);
    } else {
        eprintln!("{}", outcome.summary);
    }
    if let Some(record) = outcome.artifacts.first() {
        eprintln!("record: {}", record.display());
    }
    ExitCode::from(outcome.exit_code as u8)
}
