//! Command-line driver: reference tables, droplet energies, constrained
//! minimization, mass sweeps, and stability/minimality probes, all from
//! reproducible JSON configs with hash-stamped outputs.

mod config;
mod io;
mod svg;

use std::fmt;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use clap::{Parser, Subcommand};
use serde::Serialize;

use droplet_core::asymptotics::{self, PerturbationFamily, SweepRecord};
use droplet_core::container::Container;
use droplet_core::energy::gauss_energy;
use droplet_core::minimize::{
    almost_minimality_probe, default_seeds, minimize, minimize_seed, MinimizeConfig,
    MinimizeResult,
};
use droplet_core::sessile::CapGeometry;

use config::RunConfig;

/// Failures mapped to exit codes: bad inputs exit 2, `--strict`
/// non-convergence exits 3.
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Strict(String),
}

pub type CliResult<T> = Result<T, CliError>;

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) | CliError::Strict(m) => write!(f, "{m}"),
        }
    }
}

impl From<droplet_core::Error> for CliError {
    fn from(e: droplet_core::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

const VERSION_LINE: &str = concat!(env!("CARGO_PKG_VERSION"), " (config-schema 1)");

#[derive(Parser)]
#[command(
    name = "droplet",
    version = VERSION_LINE,
    about = "Sessile-droplet reference data and planar capillary minimization"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Exact half-space cap quantities over a grid of adhesion coefficients
    Reference {
        /// Ambient dimension, at least 2
        #[arg(long)]
        n: usize,
        /// Grid A:B:STEPS over the open interval (-1, 1); STEPS rows
        #[arg(long, value_name = "A:B:STEPS", allow_hyphen_values = true)]
        tau_grid: TauGrid,
        /// Output CSV with columns tau,V,A,A0,psi,psi_prime,phi
        #[arg(long)]
        out: PathBuf,
    },
    /// Free/wetted/bulk energy of a droplet polygon in a container
    Energy {
        #[arg(long)]
        config: PathBuf,
        /// Droplet CSV with columns x,y,contact,param
        #[arg(long)]
        droplet: PathBuf,
        /// Output JSON (defaults to outputs.result in the config)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Minimize the droplet energy at the config's fixed area
    Minimize {
        #[arg(long)]
        config: PathBuf,
        /// Minimizer polygon CSV (defaults to outputs.droplet in the config)
        #[arg(long)]
        out_droplet: Option<PathBuf>,
        /// Run summary JSON (defaults to outputs.result in the config)
        #[arg(long)]
        out_result: Option<PathBuf>,
        /// Optional picture of the droplet in its container
        #[arg(long)]
        svg: Option<PathBuf>,
        /// Exit 3 when the best run did not converge
        #[arg(long)]
        strict: bool,
        /// Worker threads over seeds; the result is thread-count independent
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Warm-started minimization over the config's descending mass list
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV (defaults to outputs.table in the config)
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 3 when any mass did not converge
        #[arg(long)]
        strict: bool,
    },
    /// Quadratic stability ratios of perturbed ideal caps
    Stability {
        #[arg(long, allow_negative_numbers = true)]
        tau: f64,
        /// Family spec: stretch:MIN:MAX or bump:MIN:MAX
        #[arg(long)]
        family: FamilySpec,
        #[arg(long, default_value_t = 16)]
        samples: usize,
        /// Polygon resolution of the reference cap
        #[arg(long, default_value_t = 512)]
        segments: usize,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Output JSON; always printed to stdout as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Empirical almost-minimality constant of a minimize result
    Probe {
        /// A JSON file written by `minimize --out-result`
        #[arg(long)]
        result: PathBuf,
        #[arg(long)]
        trials: usize,
        /// Perturbation ball radius; defaults to 0.3 sqrt(area)
        #[arg(long)]
        rho0: Option<f64>,
        #[arg(long, default_value_t = 0)]
        rng_seed: u64,
        /// Output JSON; always printed to stdout as well
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                CliError::Validation(_) => 2,
                CliError::Strict(_) => 3,
            })
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.cmd {
        Cmd::Reference { n, tau_grid, out } => cmd_reference(n, &tau_grid, &out),
        Cmd::Energy {
            config,
            droplet,
            out,
        } => cmd_energy(&config, &droplet, out),
        Cmd::Minimize {
            config,
            out_droplet,
            out_result,
            svg,
            strict,
            jobs,
        } => cmd_minimize(&config, out_droplet, out_result, svg, strict, jobs),
        Cmd::Sweep {
            config,
            out,
            strict,
        } => cmd_sweep(&config, out, strict),
        Cmd::Stability {
            tau,
            family,
            samples,
            segments,
            rng_seed,
            out,
        } => cmd_stability(tau, family.0, samples, segments, rng_seed, out),
        Cmd::Probe {
            result,
            trials,
            rho0,
            rng_seed,
            out,
        } => cmd_probe(&result, trials, rho0, rng_seed, out),
    }
}

// ---------------------------------------------------------------------------
// argument types

#[derive(Clone, Debug)]
struct TauGrid {
    a: f64,
    b: f64,
    steps: usize,
}

impl TauGrid {
    fn values(&self) -> impl Iterator<Item = f64> + '_ {
        let span = self.b - self.a;
        (0..self.steps).map(move |i| {
            if self.steps == 1 {
                self.a
            } else {
                self.a + span * i as f64 / (self.steps - 1) as f64
            }
        })
    }
}

impl FromStr for TauGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{s}': expected A:B:STEPS"));
        }
        let a: f64 = parts[0].parse().map_err(|_| format!("bad A '{}'", parts[0]))?;
        let b: f64 = parts[1].parse().map_err(|_| format!("bad B '{}'", parts[1]))?;
        let steps: usize = parts[2]
            .parse()
            .map_err(|_| format!("bad STEPS '{}'", parts[2]))?;
        if steps == 0 {
            return Err("STEPS must be at least 1".into());
        }
        if !(a.is_finite() && b.is_finite() && a <= b) {
            return Err(format!("need finite A <= B, got {a}:{b}"));
        }
        if !(a > -1.0 && b < 1.0) {
            return Err(format!("tau grid [{a}, {b}] must stay inside (-1, 1)"));
        }
        Ok(TauGrid { a, b, steps })
    }
}

#[derive(Clone, Debug)]
struct FamilySpec(PerturbationFamily);

impl FromStr for FamilySpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("'{s}': expected stretch:MIN:MAX or bump:MIN:MAX"));
        }
        let lo: f64 = parts[1].parse().map_err(|_| format!("bad MIN '{}'", parts[1]))?;
        let hi: f64 = parts[2].parse().map_err(|_| format!("bad MAX '{}'", parts[2]))?;
        match parts[0] {
            "stretch" => Ok(FamilySpec(PerturbationFamily::Stretch {
                lambda_min: lo,
                lambda_max: hi,
            })),
            "bump" => Ok(FamilySpec(PerturbationFamily::Bump {
                amp_min: lo,
                amp_max: hi,
            })),
            other => Err(format!("unknown family '{other}', expected stretch or bump")),
        }
    }
}

// ---------------------------------------------------------------------------
// commands

#[derive(Serialize)]
struct ReferenceArgs {
    cmd: &'static str,
    n: usize,
    tau_grid: [f64; 2],
    steps: usize,
}

fn cmd_reference(n: usize, grid: &TauGrid, out: &Path) -> CliResult<()> {
    let hash = io::config_hash(&ReferenceArgs {
        cmd: "reference",
        n,
        tau_grid: [grid.a, grid.b],
        steps: grid.steps,
    });
    let mut s = format!("# config {hash} rng_seed 0\n");
    s.push_str("tau,V,A,A0,psi,psi_prime,phi\n");
    for tau in grid.values() {
        let scal = CapGeometry::new(n, tau)?.scalars();
        s.push_str(&format!(
            "{tau},{},{},{},{},{},{}\n",
            scal.volume, scal.lateral_area, scal.base_area, scal.psi, scal.psi_prime, scal.phi
        ));
    }
    io::write_atomic(out, s.as_bytes())?;
    println!("wrote {} ({} rows)", out.display(), grid.steps);
    Ok(())
}

fn cmd_energy(config: &Path, droplet: &Path, out: Option<PathBuf>) -> CliResult<()> {
    let rc = RunConfig::load(config)?;
    let c = rc.build_container()?;
    let d = io::read_droplet_csv(droplet, &c)?;
    let breakdown = gauss_energy(&d, &c)?;
    let file = io::EnergyFile {
        schema_version: config::SCHEMA_VERSION,
        config_hash: rc.hash(),
        rng_seed: rc.rng_seed,
        area: d.area(),
        diameter: d.diameter(),
        breakdown,
    };
    let json = io::to_json(&file);
    if let Some(p) = out.or(rc.outputs.result.clone()) {
        io::write_atomic(&p, json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}

fn cmd_minimize(
    config: &Path,
    out_droplet: Option<PathBuf>,
    out_result: Option<PathBuf>,
    svg_out: Option<PathBuf>,
    strict: bool,
    jobs: usize,
) -> CliResult<()> {
    let rc = RunConfig::load(config)?;
    let c = rc.build_container()?;
    let cfg = rc.build_minimize(None)?;
    let r = multistart(&c, &cfg, jobs)?;
    let hash = rc.hash();
    let out_droplet = resolve_out(out_droplet, &rc.outputs.droplet, "--out-droplet")?;
    let out_result = resolve_out(out_result, &rc.outputs.result, "--out-result")?;
    io::write_droplet_csv(&out_droplet, &r.droplet, &hash, rc.rng_seed)?;
    let file = io::ResultFile {
        schema_version: config::SCHEMA_VERSION,
        config_hash: hash.clone(),
        rng_seed: rc.rng_seed,
        config: rc.clone(),
        result: io::MinimizeJson::from_result(&r),
    };
    io::write_atomic(&out_result, io::to_json(&file).as_bytes())?;
    if let Some(p) = svg_out.or(rc.outputs.svg.clone()) {
        io::write_atomic(&p, svg::droplet_svg(&c, &r.droplet, &hash, rc.rng_seed).as_bytes())?;
    }
    println!(
        "energy {} area {} iterations {} converged {} (seed {})",
        r.energy.total,
        r.droplet.area(),
        r.iterations,
        r.converged,
        r.seed_index
    );
    if strict && !r.converged {
        return Err(CliError::Strict(format!(
            "not converged after {} iterations",
            r.iterations
        )));
    }
    Ok(())
}

fn cmd_sweep(config: &Path, out: Option<PathBuf>, strict: bool) -> CliResult<()> {
    let rc = RunConfig::load(config)?;
    let c = rc.build_container()?;
    if rc.masses.is_empty() {
        return Err(CliError::Validation("masses list in config is empty".into()));
    }
    let cfg = rc.build_minimize(Some(rc.masses[0]))?;
    let records = asymptotics::sweep(&c, &rc.masses, &cfg)?;
    let out = resolve_out(out, &rc.outputs.table, "--out")?;
    io::write_atomic(&out, sweep_csv(&records, &rc.hash(), rc.rng_seed).as_bytes())?;
    for r in &records {
        println!(
            "m {} gamma {} normalized {} converged {}",
            r.m, r.gamma, r.normalized_gamma, r.converged
        );
    }
    println!("wrote {} ({} records)", out.display(), records.len());
    if strict {
        if let Some(r) = records.iter().find(|r| !r.converged) {
            return Err(CliError::Strict(format!("mass {} did not converge", r.m)));
        }
    }
    Ok(())
}

fn sweep_csv(records: &[SweepRecord], hash: &str, rng_seed: u64) -> String {
    let mut s = format!("# config {hash} rng_seed {rng_seed}\n");
    s.push_str("m,gamma,normalized_gamma,p_m_x,p_m_y,sigma_gap,diameter,hd_blowup,young_max,converged\n");
    for r in records {
        s.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            r.m,
            r.gamma,
            r.normalized_gamma,
            r.p_m.x,
            r.p_m.y,
            r.sigma_gap,
            r.diameter,
            r.hd_blowup,
            r.young_max,
            r.converged
        ));
    }
    s
}

#[derive(Serialize)]
struct StabilityArgs {
    cmd: &'static str,
    tau: f64,
    family: PerturbationFamily,
    samples: usize,
    segments: usize,
    rng_seed: u64,
}

fn cmd_stability(
    tau: f64,
    family: PerturbationFamily,
    samples: usize,
    segments: usize,
    rng_seed: u64,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let outcome = asymptotics::stability_probe(tau, &family, samples, segments, rng_seed)?;
    let file = io::StabilityFile {
        schema_version: config::SCHEMA_VERSION,
        config_hash: io::config_hash(&StabilityArgs {
            cmd: "stability",
            tau,
            family,
            samples,
            segments,
            rng_seed,
        }),
        rng_seed,
        tau,
        family,
        samples,
        segments,
        outcome,
    };
    let json = io::to_json(&file);
    if let Some(p) = out {
        io::write_atomic(&p, json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}

fn cmd_probe(
    result: &Path,
    trials: usize,
    rho0: Option<f64>,
    rng_seed: u64,
    out: Option<PathBuf>,
) -> CliResult<()> {
    let text = std::fs::read_to_string(result)
        .map_err(|e| CliError::Validation(format!("{}: {e}", result.display())))?;
    let file: io::ResultFile = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("{}: {e}", result.display())))?;
    let c = file.config.build_container()?;
    let r = file.result.to_result()?;
    let rho0 = rho0.unwrap_or(0.3 * r.droplet.area().sqrt());
    let lambda_hat = almost_minimality_probe(&r, &c, trials, rho0, rng_seed)?;
    let probe = io::ProbeFile {
        schema_version: config::SCHEMA_VERSION,
        config_hash: file.config_hash,
        rng_seed,
        trials,
        rho0,
        lambda_hat,
    };
    let json = io::to_json(&probe);
    if let Some(p) = out {
        io::write_atomic(&p, json.as_bytes())?;
    }
    print!("{json}");
    Ok(())
}

// ---------------------------------------------------------------------------
// helpers

fn resolve_out(
    flag: Option<PathBuf>,
    fallback: &Option<PathBuf>,
    name: &str,
) -> CliResult<PathBuf> {
    flag.or_else(|| fallback.clone()).ok_or_else(|| {
        CliError::Validation(format!(
            "{name} missing (no flag and no matching outputs entry in the config)"
        ))
    })
}

/// Multi-start search, optionally fanned out over worker threads. Reduction
/// is index-ordered with the same tie-breaking as the sequential run, so the
/// winner does not depend on the thread count.
fn multistart(c: &Container, cfg: &MinimizeConfig, jobs: usize) -> CliResult<MinimizeResult> {
    let seeds = if cfg.seeds.is_empty() {
        default_seeds(c, cfg.m)
    } else {
        cfg.seeds.clone()
    };
    let workers = jobs.max(1).min(seeds.len());
    if workers <= 1 {
        return Ok(minimize(c, cfg)?);
    }
    let next = AtomicUsize::new(0);
    let slots: Vec<Mutex<Option<droplet_core::Result<MinimizeResult>>>> =
        seeds.iter().map(|_| Mutex::new(None)).collect();
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                if i >= seeds.len() {
                    break;
                }
                let r = minimize_seed(c, cfg, &seeds[i], i);
                *slots[i].lock().unwrap() = Some(r);
            });
        }
    });
    let mut best: Option<MinimizeResult> = None;
    let mut last_err: Option<droplet_core::Error> = None;
    for slot in slots {
        match slot.into_inner().unwrap().expect("every seed ran") {
            Ok(r) => {
                let better = match &best {
                    None => true,
                    Some(b) => r.energy.total < b.energy.total - 1e-9,
                };
                if better {
                    best = Some(r);
                }
            }
            Err(e) => last_err = Some(e),
        }
    }
    match best {
        Some(r) => Ok(r),
        None => Err(last_err
            .map(CliError::from)
            .unwrap_or_else(|| CliError::Validation("no seed produced a droplet".into()))),
    }
}
