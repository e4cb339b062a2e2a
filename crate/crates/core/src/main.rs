use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use discrete_willmore::energy::{all_energies, bending_energy, energy_csv};
use discrete_willmore::generators::{
    augment_protected_with_retry, counterexample_cylinder, icosphere, restricted_delaunay, theta_grid, AugmentOptions,
    CounterexampleSpec, RestrictedOptions, ThetaGridSpec,
};
use discrete_willmore::harness::{
    certify, load_mesh, parse_surface, rows_to_csv, run_convergence, save_mesh, verify_lemmas_with, CertifyOptions,
    ExperimentKind, ExperimentSpec, HarnessError,
};
use discrete_willmore::mesh::build_adjacency;
use discrete_willmore::surfaces::AnalyticSurface;

#[derive(Parser)]
#[command(name = "dw", version, about = "Discrete bending energy, mesh certificates and convergence sweeps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Icosphere,
    ThetaGrid,
    Counterexample,
    Protected,
}

#[derive(Subcommand)]
enum Command {
    /// Build a mesh and write it as OFF, with a JSON sidecar of parameters.
    Generate {
        kind: Kind,
        /// Output OFF path; the sidecar goes next to it with extension .json.
        #[arg(short, long)]
        output: PathBuf,
        /// Icosphere subdivision level.
        #[arg(long, default_value_t = 3)]
        level: u32,
        /// Surface (graph for theta-grid, any for protected).
        #[arg(long)]
        surface: Option<String>,
        #[arg(long, default_value_t = 0.1)]
        theta: f64,
        /// Lattice spacing (theta-grid) or covering radius (protected).
        #[arg(long)]
        eps: Option<f64>,
        /// eps = 2^-j when --eps is absent; also the strip refinement.
        #[arg(long, default_value_t = 4)]
        j: u32,
        /// Counterexample columns factor, s = 2π/m.
        #[arg(long, default_value_t = 16)]
        m: u32,
        #[arg(long, default_value_t = 0.5)]
        delta: f64,
    },
    /// Print the energies of a mesh.
    Energy {
        mesh: PathBuf,
        /// Per-edge breakdown CSV.
        #[arg(long)]
        breakdown: Option<PathBuf>,
    },
    /// Check ζ-regularity, Delaunay and protection; exit 1 on failure.
    Certify {
        mesh: PathBuf,
        #[arg(long)]
        surface: String,
        #[arg(long)]
        zeta: Option<f64>,
        #[arg(long)]
        protect: Option<f64>,
        /// Write the Delaunay violations as CSV.
        #[arg(long)]
        violations: Option<PathBuf>,
        /// Write the report as JSON.
        #[arg(long)]
        json: Option<PathBuf>,
    },
    /// Run the experiment described by a key=value config file.
    Converge {
        #[arg(long)]
        config: PathBuf,
        /// CSV output; overrides the config's `output`, stdout if neither.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Randomized checks of the traversal identities and the bound.
    VerifyLemmas {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Scale of the bound's right-hand side (values below 1 must fail).
        #[arg(long, default_value_t = 1.0)]
        rhs_scale: f64,
    },
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    fs::write(path, text).map_err(|e| HarnessError::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn surface_arg(s: Option<&str>, default: &str) -> Result<AnalyticSurface, HarnessError> {
    parse_surface(s.unwrap_or(default))
}

/// `Ok(true)` when every check passed.
fn generate(kind: Kind, output: &Path, args: GenArgs) -> Result<bool, HarnessError> {
    let eps = args.eps.unwrap_or_else(|| (-(args.j as f64)).exp2());
    let (mesh, params) = match kind {
        Kind::Icosphere => (icosphere(args.level), json!({ "kind": "icosphere", "level": args.level })),
        Kind::ThetaGrid => {
            let surface = surface_arg(args.surface.as_deref(), "graph:a=0.05,c=-0.05")?;
            let AnalyticSurface::Graph { h, domain } = surface else {
                return Err(HarnessError::Config("theta-grid needs a graph surface".into()));
            };
            let spec = ThetaGridSpec::new(h, domain, eps, args.theta);
            (theta_grid(&spec)?, json!({ "kind": "theta_grid", "spec": spec }))
        }
        Kind::Counterexample => {
            let spec = CounterexampleSpec::new(args.m, args.j)?;
            let params = json!({ "kind": "counterexample", "m": spec.m, "j": spec.j, "s": spec.s(), "eps": spec.eps() });
            (counterexample_cylinder(&spec)?, params)
        }
        Kind::Protected => {
            let surface = surface_arg(args.surface.as_deref(), "sphere")?;
            let aug = augment_protected_with_retry(&[], &surface, &AugmentOptions::new(eps, args.delta))?;
            let mesh = restricted_delaunay(&aug.points, &surface, &RestrictedOptions::default())?;
            let params = json!({
                "kind": "protected", "surface": surface, "eps": eps, "delta": args.delta,
                "c_used": aug.c_used, "target_margin": aug.target_margin,
            });
            (mesh, params)
        }
    };
    save_mesh(output, &mesh)?;
    let sidecar = json!({
        "generator": params,
        "vertices": mesh.num_vertices(),
        "triangles": mesh.num_triangles(),
    });
    write(&output.with_extension("json"), &serde_json::to_string_pretty(&sidecar).expect("json"))?;
    println!("wrote {} ({} vertices, {} triangles)", output.display(), mesh.num_vertices(), mesh.num_triangles());
    Ok(true)
}

struct GenArgs {
    level: u32,
    surface: Option<String>,
    theta: f64,
    eps: Option<f64>,
    j: u32,
    m: u32,
    delta: f64,
}

fn energy(mesh: &Path, breakdown: Option<&Path>) -> Result<bool, HarnessError> {
    let m = load_mesh(mesh)?;
    let e = all_energies(&m)?;
    println!("E = {}", e.bending);
    println!("E_SN = {}", e.seung_nelson);
    println!("E_GHDS = {}", e.ghds);
    println!("E_B = {}", e.bobenko.map_or("n/a".into(), |b| b.to_string()));
    if let Some(path) = breakdown {
        let adj = build_adjacency(&m)?;
        write(path, &energy_csv(&bending_energy(&m, &adj)?))?;
    }
    Ok(true)
}

fn run_certify(
    mesh: &Path,
    surface: &AnalyticSurface,
    options: CertifyOptions,
    violations: Option<&Path>,
    json_out: Option<&Path>,
) -> Result<bool, HarnessError> {
    let m = load_mesh(mesh)?;
    let r = certify(&m, surface, &options)?;
    print!("{}", r.to_kv());
    if let Some(p) = violations {
        write(p, &r.quality.violations_csv())?;
    }
    if let Some(p) = json_out {
        write(p, &serde_json::to_string_pretty(&r).expect("json"))?;
    }
    Ok(r.passed)
}

fn lemmas(seed: u64, trials: usize, rhs_scale: f64) -> Result<bool, HarnessError> {
    let r = verify_lemmas_with(seed, trials, rhs_scale)?;
    print!("{}", r.to_kv());
    Ok(r.passed())
}

fn converge(config: &Path, output: Option<&Path>) -> Result<bool, HarnessError> {
    let text = fs::read_to_string(config).map_err(|e| HarnessError::Io {
        path: config.to_path_buf(),
        source: e,
    })?;
    let spec = ExperimentSpec::parse(&text)?;
    match spec.kind {
        ExperimentKind::Converge | ExperimentKind::Counterexample => {
            let rows = run_convergence(&spec)?;
            let csv = rows_to_csv(&rows)?;
            match output.or(spec.output.as_deref()) {
                Some(p) => {
                    write(p, &csv)?;
                    let sidecar = json!({ "experiment": spec, "rows": rows.len() });
                    write(&p.with_extension("json"), &serde_json::to_string_pretty(&sidecar).expect("json"))?;
                }
                None => print!("{csv}"),
            }
            Ok(rows.iter().all(|r| r.is_ok()))
        }
        ExperimentKind::Certify => {
            let options = CertifyOptions {
                zeta: spec.zeta,
                protect: spec.protect,
            };
            let mesh = spec.mesh.as_deref().expect("validated");
            run_certify(mesh, &spec.surface.expect("validated"), options, None, None)
        }
        ExperimentKind::Energy => energy(spec.mesh.as_deref().expect("validated"), output.or(spec.output.as_deref())),
        ExperimentKind::VerifyLemmas => lemmas(spec.seed, spec.trials, 1.0),
    }
}

fn run(cli: Cli) -> Result<bool, HarnessError> {
    match cli.command {
        Command::Generate {
            kind,
            output,
            level,
            surface,
            theta,
            eps,
            j,
            m,
            delta,
        } => generate(
            kind,
            &output,
            GenArgs {
                level,
                surface,
                theta,
                eps,
                j,
                m,
                delta,
            },
        ),
        Command::Energy { mesh, breakdown } => energy(&mesh, breakdown.as_deref()),
        Command::Certify {
            mesh,
            surface,
            zeta,
            protect,
            violations,
            json,
        } => run_certify(
            &mesh,
            &parse_surface(&surface)?,
            CertifyOptions { zeta, protect },
            violations.as_deref(),
            json.as_deref(),
        ),
        Command::Converge { config, output } => converge(&config, output.as_deref()),
        Command::VerifyLemmas { seed, trials, rhs_scale } => lemmas(seed, trials, rhs_scale),
    }
}

fn main() -> ExitCode {
    if let Ok(n) = std::env::var("DW_THREADS") {
        match n.parse::<usize>() {
            Ok(n) if n > 0 => {
                let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
            }
            _ => {
                eprintln!("dw: DW_THREADS must be a positive integer, got {n:?}");
                return ExitCode::from(2);
            }
        }
    }
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("dw: {e}");
            ExitCode::from(2)
        }
    }
}
