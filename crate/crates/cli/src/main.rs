use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hextop::export::{svg_document, RenderSpec};
use hextop::{Error, RunConfig};

/// Compliance topology optimization on honeycomb meshes.
#[derive(Debug, Parser)]
#[command(name = "hextop", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Optimize a design and write history.csv, density.csv and design.svg.
    Run(RunArgs),
    /// Write the node and element tables of a mesh as CSV to stdout.
    Mesh {
        #[arg(long)]
        hnex: usize,
        #[arg(long)]
        hney: usize,
    },
    /// Write the 12x12 element stiffness matrix as CSV to stdout.
    K0 {
        /// Poisson's ratio, in [0, 0.5).
        #[arg(long, default_value_t = 0.3)]
        nu: f64,
    },
}

/// Values are checked together after parsing so that every violated
/// constraint is reported at once. Flags override `--config`.
#[derive(Debug, Args)]
struct RunArgs {
    /// Built-in problem: mbb, multiload2, multiload4, passive or custom.
    #[arg(long)]
    problem: Option<String>,
    /// Elements along x, >= 1.
    #[arg(long)]
    hnex: Option<String>,
    /// Elements along y, >= 1.
    #[arg(long)]
    hney: Option<String>,
    /// Filter radius > 0: a number, `sqrt3` or `<k>*sqrt3`.
    #[arg(long)]
    rfill: Option<String>,
    /// Volume fraction in (0, 1].
    #[arg(long)]
    volfrac: Option<String>,
    /// SIMP penalty, >= 1.
    #[arg(long)]
    penal: Option<String>,
    /// Filter: 0 none, 1 sensitivity, 2 density.
    #[arg(long)]
    ft: Option<String>,
    /// Poisson's ratio in [0, 0.5) [default: 0.3].
    #[arg(long)]
    nu: Option<String>,
    /// OC move limit in (0, 1] [default: 0.2].
    #[arg(long = "move")]
    move_limit: Option<String>,
    /// Iteration cap, >= 1 [default: 200].
    #[arg(long)]
    maxiter: Option<String>,
    /// Stop when the largest design change drops below this [default: 0.01].
    #[arg(long)]
    change_tol: Option<String>,
    /// Problem definition file for `--problem custom`.
    #[arg(long)]
    problem_file: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Flat `key = value` file using the long flag names as keys.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Only print the final summary line.
    #[arg(long, short)]
    quiet: bool,
}

impl RunArgs {
    fn to_config(&self) -> Result<RunConfig, Error> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_file(path)?;
        }
        let flags = [
            ("problem", &self.problem),
            ("hnex", &self.hnex),
            ("hney", &self.hney),
            ("rfill", &self.rfill),
            ("volfrac", &self.volfrac),
            ("penal", &self.penal),
            ("ft", &self.ft),
            ("nu", &self.nu),
            ("move", &self.move_limit),
            ("maxiter", &self.maxiter),
            ("change-tol", &self.change_tol),
        ];
        let mut errs = Vec::new();
        for (key, value) in flags {
            if let Some(v) = value {
                if let Err(Error::Config(e)) = cfg.set(key, v) {
                    errs.extend(e);
                }
            }
        }
        if let Some(p) = &self.problem_file {
            cfg.problem_file = Some(p.clone());
        }
        if let Some(o) = &self.output {
            cfg.output = o.clone();
        }
        if let Err(Error::Config(e)) = cfg.validate() {
            errs.extend(e);
        }
        if errs.is_empty() {
            Ok(cfg)
        } else {
            Err(Error::Config(errs))
        }
    }
}

/// Writes all outputs into a scratch directory inside `dir`, then moves
/// them into place, so a failed run never leaves partial files behind.
fn write_outputs(dir: &Path, files: &[(&str, String)]) -> Result<(), Error> {
    let io = |path: &Path, e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    };
    fs::create_dir_all(dir).map_err(|e| io(dir, e))?;
    let scratch = tempfile::Builder::new()
        .prefix(".hextop-")
        .tempdir_in(dir)
        .map_err(|e| io(dir, e))?;
    for (name, body) in files {
        let path = scratch.path().join(name);
        fs::write(&path, body).map_err(|e| io(&path, e))?;
    }
    for (name, _) in files {
        let target = dir.join(name);
        fs::rename(scratch.path().join(name), &target).map_err(|e| io(&target, e))?;
    }
    Ok(())
}

fn run(args: &RunArgs) -> Result<(), Error> {
    let cfg = args.to_config()?;
    let quiet = args.quiet;
    let out = hextop::run(&cfg, |rec| {
        if !quiet {
            println!("{}", rec.log_line());
        }
    })?;
    let state = &out.state;
    let svg = svg_document(&out.mesh, &state.xphys, &RenderSpec::new("design.svg"))?;
    write_outputs(
        &cfg.output,
        &[
            ("history.csv", hextop::export::history_csv(&state.history)),
            ("density.csv", hextop::export::density_csv(&out.mesh, &state.xphys)?),
            ("design.svg", svg),
        ],
    )?;
    let vol = state.xphys.iter().sum::<f64>() / state.xphys.len() as f64;
    println!("final obj={:.4} vol={:.4} iters={}", state.c, vol, state.iteration);
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => run(args),
        Command::Mesh { hnex, hney } => hextop::MeshSpec::new(*hnex, *hney)
            .and_then(hextop::build_mesh)
            .map(|m| print!("{}", m.to_csv())),
        Command::K0 { nu } => hextop::wachspress_k0(*nu).map(|k| print!("{}", k.to_csv())),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
