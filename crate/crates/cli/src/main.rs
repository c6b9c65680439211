//! `slt`: generate instances, build shallow-light trees, verify and render them.
//!
//! Exit codes: 0 on success, 1 when a construction constraint fails or a
//! verified tree exceeds the stretch bound, 2 on I/O, parse or file
//! validation errors.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use slt_core::core2d::{core_slt, DEFAULT_LAMBDA};
use slt_core::io::{from_json, to_canonical_json, PointsFile, TreeFile};
use slt_core::metrics::SltReport;
use slt_core::pipeline::{assemble_slt, PipelineOptions, DEFAULT_GAMMA};
use slt_core::pyramid::build_pyramid_core_on;
use slt_core::{generate, render, PointCloud, SltError};

const DEFAULT_EPS: f64 = 0.04;

#[derive(Parser)]
#[command(name = "slt", version, about = "Euclidean Steiner shallow-light trees")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a point set.
    Gen(GenArgs),
    /// Build a tree over a point set.
    Build(BuildArgs),
    /// Measure a tree against its point set; fails if the stretch exceeds 1 + eps.
    Verify(VerifyArgs),
    /// Render a planar tree or point set, or the unfolded surfaces of a
    /// higher-dimensional one, as SVG.
    Render(RenderArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Circle,
    Grid,
    Random,
    Core,
}

#[derive(Args)]
struct GenArgs {
    #[arg(value_enum)]
    kind: Kind,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Point count; base points for `core`, grid points for `grid`.
    #[arg(long)]
    n: Option<usize>,
    /// Dimension; a circle is embedded by zero-padding and a random rotation.
    #[arg(long)]
    dim: Option<usize>,
    #[arg(long, env = "SLT_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Method {
    Folding,
    Core2d,
    Pyramid,
}

#[derive(Args)]
struct BuildArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Method::Folding)]
    method: Method,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    chord_shortcut: bool,
    /// Tree file; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Also write the build report here.
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    tree: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    /// Report file; standard output if omitted.
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RenderArgs {
    /// Tree or points file.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = DEFAULT_EPS)]
    eps: f64,
    #[arg(long, default_value_t = DEFAULT_GAMMA)]
    gamma: f64,
    #[arg(long, default_value_t = DEFAULT_LAMBDA)]
    lambda: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

enum Failure {
    Constraint(String),
    Io(String),
}

impl From<SltError> for Failure {
    fn from(e: SltError) -> Self {
        match e {
            SltError::Format(_) => Failure::Io(e.to_string()),
            _ => Failure::Constraint(e.to_string()),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> CliResult<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Io(format!("{}: {e}", p.display()))),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| Failure::Io(e.to_string())),
    }
}

fn read_points(path: &Path) -> CliResult<PointCloud> {
    let file: PointsFile =
        from_json(&read(path)?).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
    file.to_cloud()
        .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn gen(a: &GenArgs) -> CliResult<()> {
    let pts = match a.kind {
        Kind::Circle => {
            let c = generate::circle(a.eps)?;
            match a.dim {
                Some(d) if d != 2 => generate::embed(&c, d, a.seed)?,
                _ => c,
            }
        }
        Kind::Grid => generate::grid(a.dim.unwrap_or(3), a.n.unwrap_or(64), a.eps)?,
        Kind::Random => generate::random(a.dim.unwrap_or(2), a.n.unwrap_or(50), a.seed)?,
        Kind::Core => {
            if a.dim.is_some_and(|d| d != 2) {
                return Err(Failure::Constraint("core instances are planar".into()));
            }
            generate::core(a.eps, a.n.unwrap_or(16))?
        }
    };
    write_out(
        a.output.as_deref(),
        &to_canonical_json(&PointsFile::from_cloud(&pts))?,
    )
}

fn build(a: &BuildArgs) -> CliResult<()> {
    let pts = read_points(&a.input)?;
    let (tree, report) = match a.method {
        Method::Folding => {
            let opts = PipelineOptions {
                gamma: a.gamma,
                lambda: a.lambda,
                chord_shortcut: a.chord_shortcut,
            };
            let b = assemble_slt(&pts, a.eps, &opts)?;
            (b.tree, b.report)
        }
        Method::Core2d => core_slt(&pts, a.eps, a.lambda)?,
        Method::Pyramid => {
            let pc = build_pyramid_core_on(&pts, a.eps, a.lambda)?;
            (pc.tree, pc.report)
        }
    };
    write_out(
        a.output.as_deref(),
        &to_canonical_json(&TreeFile::from_graph(&tree))?,
    )?;
    if let Some(p) = &a.report {
        write_out(Some(p), &to_canonical_json(&report)?)?;
    }
    Ok(())
}

fn verify(a: &VerifyArgs) -> CliResult<bool> {
    let pts = read_points(&a.input)?;
    let tree_file: TreeFile = from_json(&read(&a.tree)?)
        .map_err(|e| Failure::Io(format!("{}: {e}", a.tree.display())))?;
    let tree = tree_file
        .to_graph()
        .map_err(|e| Failure::Io(format!("{}: {e}", a.tree.display())))?;
    let matches = tree.input_count() == pts.len()
        && tree.root() == pts.root()
        && pts
            .points()
            .iter()
            .enumerate()
            .all(|(i, p)| tree.point(i) == p);
    if !matches {
        return Err(Failure::Io(
            "tree input vertices do not match the point set".into(),
        ));
    }
    let report = SltReport::measure(&tree, "verify", a.eps)?;
    write_out(a.output.as_deref(), &to_canonical_json(&report)?)?;
    Ok(report.within_stretch())
}

fn render(a: &RenderArgs) -> CliResult<()> {
    let text = read(&a.input)?;
    let value: serde_json::Value =
        from_json(&text).map_err(|e| Failure::Io(format!("{}: {e}", a.input.display())))?;
    let pts = if value.get("edges").is_some() {
        let tree = from_json::<TreeFile>(&text)
            .and_then(|t| t.to_graph())
            .map_err(|e| Failure::Io(format!("{}: {e}", a.input.display())))?;
        if tree.point(tree.root()).dim() == 2 {
            return write_out(a.output.as_deref(), &render::svg_tree(&tree)?);
        }
        let inputs = (0..tree.input_count())
            .map(|v| tree.point(v).clone())
            .collect();
        PointCloud::new(inputs, tree.root())?
    } else {
        let pts = read_points(&a.input)?;
        if pts.dim() == 2 {
            return write_out(a.output.as_deref(), &render::svg_points(&pts)?);
        }
        pts
    };
    let opts = PipelineOptions {
        gamma: a.gamma,
        lambda: a.lambda,
        chord_shortcut: false,
    };
    let b = assemble_slt(&pts, a.eps, &opts)?;
    write_out(a.output.as_deref(), &render::svg_gadgets(&b))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Gen(a) => gen(a).map(|_| true),
        Command::Build(a) => build(a).map(|_| true),
        Command::Verify(a) => verify(a),
        Command::Render(a) => render(a).map(|_| true),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("error: max stretch exceeds 1 + eps");
            ExitCode::from(1)
        }
        Err(Failure::Constraint(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
