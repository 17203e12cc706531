use clap::{Args, Parser, Subcommand};
use scfie::config::Overrides;
use scfie::{run_convergence, run_nearfield, run_selftest, run_separation_sweep, run_solve, Error, Scenario, SelftestOptions};
use std::path::PathBuf;
use std::process::ExitCode;

/// Exterior Helmholtz scattering with smoothed combined field integral
/// equations.
#[derive(Parser)]
#[command(name = "scfie", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one scenario and write the far field, density and a report.
    Solve {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Far-field errors over a list of grid sizes, or over separations of
    /// the close kite pair.
    Converge {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Nodes per curve, comma separated and increasing.
        #[arg(long, value_delimiter = ',')]
        n_list: Option<Vec<usize>>,
        #[arg(long)]
        reference_multiplier: Option<usize>,
        /// Run the separation sweep over these distances instead.
        #[arg(long, value_delimiter = ',')]
        separations: Option<Vec<f64>>,
    },
    /// Sample the field on a Cartesian grid.
    Nearfield {
        config: PathBuf,
        #[command(flatten)]
        common: Common,
        /// Grid size as NXxNY, e.g. 200x150.
        #[arg(long, value_parser = parse_resolution)]
        resolution: Option<(usize, usize)>,
        /// xmin,xmax,ymin,ymax
        #[arg(long, value_delimiter = ',', num_args = 4)]
        bbox: Option<Vec<f64>>,
        /// Use the plain potential instead of the smoothed one.
        #[arg(long)]
        plain: bool,
        /// Add the incident field.
        #[arg(long)]
        total: bool,
    },
    /// Run the invariant suites.
    Selftest,
}

/// Flags that override scenario keys.
#[derive(Args)]
struct Common {
    /// Nodes per curve.
    #[arg(long)]
    n: Option<usize>,
    /// TR, MK, KR6 or KR10.
    #[arg(long)]
    method: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    k: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    eta: Option<f64>,
    /// dirichlet or neumann.
    #[arg(long)]
    bc: Option<String>,
    /// smoothed or classic.
    #[arg(long)]
    formulation: Option<String>,
    #[arg(long)]
    mesh_p: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    prefix: Option<String>,
}

impl Common {
    fn overrides(self) -> Overrides {
        Overrides {
            n: self.n,
            method: self.method,
            k: self.k,
            eta: self.eta,
            bc: self.bc,
            formulation: self.formulation,
            mesh_p: self.mesh_p,
            gmres_tol: self.tol,
            out_dir: self.out_dir,
            prefix: self.prefix,
            ..Overrides::default()
        }
    }
}

fn parse_resolution(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once(['x', 'X']).ok_or("expected NXxNY")?;
    Ok((a.trim().parse().map_err(|e| format!("{e}"))?, b.trim().parse().map_err(|e| format!("{e}"))?))
}

fn configure_threads() -> Result<(), Error> {
    let Ok(v) = std::env::var("SCFIE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::Config(format!("SCFIE_THREADS must be a positive integer, got '{v}'")))?;
    // Fails only if a pool already exists, which cannot happen this early.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    Ok(())
}

fn run(cli: Cli) -> Result<bool, Error> {
    configure_threads()?;
    match cli.command {
        Command::Solve { config, common } => {
            let sc = Scenario::load(&config, &common.overrides())?;
            let out = run_solve(&sc)?;
            println!(
                "{} {} N={}: {} iterations, residual {:.3e}",
                sc.problem(),
                sc.method,
                sc.n,
                out.solved.report.iterations,
                out.solved.report.final_residual()
            );
            if let Some(e) = out.exact_error {
                println!("far-field error against the exact solution: {e:.3e}");
            }
            print_files(&out.files);
        }
        Command::Converge { config, common, n_list, reference_multiplier, separations } => {
            let ov = Overrides { n_list, reference_multiplier, separations, ..common.overrides() };
            let sc = Scenario::load(&config, &ov)?;
            if !sc.convergence.separations.is_empty() && sc.pair_separation.is_some() {
                let (rows, path) = run_separation_sweep(&sc)?;
                for r in &rows {
                    println!("d={:.1e} eps={:.3e} iterations={}", r.param, r.eps_inf, r.iterations);
                }
                print_files(&[path]);
            } else {
                let out = run_convergence(&sc)?;
                for r in &out.rows {
                    println!("N={} eps={:.3e} iterations={}", r.param, r.eps_inf, r.iterations);
                }
                println!("slope {:.3} (reference: {})", out.slope, out.reference);
                print_files(&out.files);
            }
        }
        Command::Nearfield { config, common, resolution, bbox, plain, total } => {
            let bbox = bbox.map(|b| [b[0], b[1], b[2], b[3]]);
            let ov = Overrides { resolution, bbox, plain, total, ..common.overrides() };
            let sc = Scenario::load(&config, &ov)?;
            let out = run_nearfield(&sc)?;
            println!("{} samples, {} masked", out.grid.values.len(), out.grid.masked_count());
            if let Some(e) = out.max_error {
                println!("max error against the exact field: {e:.3e}");
            }
            print_files(&out.files);
        }
        Command::Selftest => {
            let results = run_selftest(&SelftestOptions::default());
            for r in &results {
                println!("{r}");
            }
            return Ok(results.iter().all(|r| r.passed));
        }
    }
    Ok(true)
}

fn print_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
