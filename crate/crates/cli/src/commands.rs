use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use dhm_core::conserved::decay_profile;
use dhm_core::fields::{action, el_residual, energy, field_scale};
use dhm_core::solver::{solve, Termination};
use dhm_core::{DhmError, MapField, TwistedSpinorField};
use serde::Serialize;

use crate::config::{ConfigError, RunConfig, MAX_GRID};
use crate::fieldfile::{read_pair, write_pair, FieldFile, FieldFileError, FieldKind};
use crate::report::{finite, Envelope};
use crate::{scenario, verify};

#[derive(Debug, Parser)]
#[command(name = "dhm", version, about = "Dirac-harmonic maps on discrete charts")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Clone, Default)]
pub struct Common {
    /// Configuration file (`key = value` with `[section]` headers).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Grid size (overrides `[chart] n`).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Seed (overrides `seed`).
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write an exact solution (or other scenario fields) and a summary.
    Exact {
        #[command(flatten)]
        common: Common,
        /// Also summarise the scenario at 2n and 4n.
        #[arg(long)]
        resolution_sweep: bool,
    },
    /// Run the identity suite at n and 2n and exit nonzero on any failure.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Add a third level at 4n.
        #[arg(long)]
        resolution_sweep: bool,
        /// Directory holding phi.dhm and psi.dhm at the coarse resolution.
        #[arg(long, requires = "fine", conflicts_with = "config")]
        coarse: Option<PathBuf>,
        /// Directory holding phi.dhm and psi.dhm at twice the coarse resolution.
        #[arg(long, requires = "coarse")]
        fine: Option<PathBuf>,
    },
    /// Relax the scenario fields with the coupled flow.
    Flow {
        #[command(flatten)]
        common: Common,
    },
    /// Tabulate decay quantities and the growth function over radii.
    Probe {
        #[command(flatten)]
        common: Common,
        /// Directory holding phi.dhm and psi.dhm.
        #[arg(long)]
        fields: PathBuf,
    },
    /// Print the header and value ranges of a field file.
    Dump { file: PathBuf },
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(#[from] ConfigError),
    #[error("usage: {0}")]
    Usage(String),
    #[error("{}: {}", .0.code(), .0)]
    FieldFile(#[from] FieldFileError),
    #[error("{0}")]
    Core(#[from] DhmError),
    #[error("{0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    VerifyFailed(String),
    #[error("flow diverged at iteration {0}")]
    Diverged(usize),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::VerifyFailed(_) => 1,
            CliError::Config(_) | CliError::Usage(_) => 2,
            CliError::Diverged(_) => 3,
            CliError::FieldFile(_) => 4,
            CliError::Core(_) | CliError::Io(_) => 5,
        }
    }
}

fn load_config(common: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read config {}: {e}", path.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    if let Some(n) = common.grid {
        if !(8..=MAX_GRID).contains(&n) {
            return Err(CliError::Usage(format!("--grid {n} outside [8, {MAX_GRID}]")));
        }
        cfg.chart.n = n;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(out) = &common.out {
        cfg.output_dir = Some(out.clone());
    }
    Ok(cfg)
}

fn out_dir(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    let dir = cfg.output_dir.clone().unwrap_or_else(|| PathBuf::from("dhm-out"));
    std::fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn level_sizes(n: usize, levels: usize) -> Result<Vec<usize>, CliError> {
    let sizes: Vec<usize> = (0..levels).map(|l| n << l).collect();
    if *sizes.last().unwrap() > MAX_GRID {
        return Err(CliError::Usage(format!("finest level {} exceeds {MAX_GRID}", sizes.last().unwrap())));
    }
    Ok(sizes)
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Exact { common, resolution_sweep } => cmd_exact(&common, resolution_sweep),
        Command::Verify { common, resolution_sweep, coarse, fine } => {
            cmd_verify(&common, resolution_sweep, coarse.as_deref().zip(fine.as_deref()))
        }
        Command::Flow { common } => cmd_flow(&common),
        Command::Probe { common, fields } => cmd_probe(&common, &fields),
        Command::Dump { file } => cmd_dump(&file),
    }
}

// ------------------------------------------------------------------ exact

#[derive(Debug, Serialize)]
struct LevelSummary {
    n: usize,
    h: f64,
    action: Option<f64>,
    energy: Option<f64>,
    dirichlet: Option<f64>,
    map_residual_sup: Option<f64>,
    map_residual_l2: Option<f64>,
    spinor_residual_sup: Option<f64>,
    spinor_residual_l2: Option<f64>,
    normal_defect_sup: Option<f64>,
    map_scale: Option<f64>,
    spinor_scale: Option<f64>,
}

fn summarize(phi: &MapField, psi: &TwistedSpinorField) -> Result<LevelSummary, CliError> {
    let r = el_residual(phi, psi)?;
    let fs = field_scale(phi, psi);
    Ok(LevelSummary {
        n: phi.chart().n(),
        h: phi.chart().h(),
        action: finite(action(phi, psi)?),
        energy: finite(energy(phi, psi, None)?),
        dirichlet: finite(phi.dirichlet_energy()),
        map_residual_sup: finite(r.map.sup),
        map_residual_l2: finite(r.map.l2),
        spinor_residual_sup: finite(r.spinor.sup),
        spinor_residual_l2: finite(r.spinor.l2),
        normal_defect_sup: finite(r.normal.sup),
        map_scale: finite(fs.map),
        spinor_scale: finite(fs.spinor),
    })
}

#[derive(Debug, Serialize)]
struct ExactResult {
    scenario: &'static str,
    files: [&'static str; 2],
    levels: Vec<LevelSummary>,
}

fn cmd_exact(common: &Common, sweep: bool) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dir = out_dir(&cfg)?;
    let sizes = level_sizes(cfg.chart.n, if sweep { 3 } else { 1 })?;
    let mut levels = Vec::new();
    for (l, &n) in sizes.iter().enumerate() {
        let (phi, psi) = scenario::build(&cfg, n)?;
        if l == 0 {
            write_pair(&dir, &phi, &psi)?;
        }
        levels.push(summarize(&phi, &psi)?);
    }
    let result = ExactResult { scenario: cfg.scenario.kind.as_str(), files: ["phi.dhm", "psi.dhm"], levels };
    let env = Envelope::new("exact", &cfg, result);
    env.write(&dir.join("summary.json"))?;
    print!("{}", env.to_json());
    Ok(())
}

// ------------------------------------------------------------------ verify

fn cmd_verify(common: &Common, sweep: bool, files: Option<(&Path, &Path)>) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let pairs = match files {
        Some((coarse, fine)) => {
            let a = read_pair(&coarse.join("phi.dhm"), &coarse.join("psi.dhm"))?;
            let b = read_pair(&fine.join("phi.dhm"), &fine.join("psi.dhm"))?;
            let (ca, cb) = (a.0.chart(), b.0.chart());
            let compatible = ca.topology() == cb.topology()
                && ca.grid().side() == cb.grid().side()
                && ca.window() == cb.window()
                && a.0.target() == b.0.target()
                && cb.n() == 2 * ca.n();
            if !compatible {
                return Err(CliError::Usage(format!(
                    "incompatible charts: the fine fields must share topology, side, window and target and have twice the \
                     resolution ({} and {})",
                    ca.n(),
                    cb.n()
                )));
            }
            vec![a, b]
        }
        None => level_sizes(cfg.chart.n, if sweep { 3 } else { 2 })?
            .into_iter()
            .map(|n| scenario::build(&cfg, n))
            .collect::<Result<_, _>>()?,
    };
    let report = verify::run(&pairs, cfg.seed);
    let failed: Vec<&str> = report.identities.iter().filter(|r| !r.pass).map(|r| r.name).collect();
    let env = Envelope::new("verify", &cfg, report);
    if let Some(dir) = &cfg.output_dir {
        std::fs::create_dir_all(dir)?;
        env.write(&dir.join("verify.json"))?;
    }
    print!("{}", env.to_json());
    if failed.is_empty() {
        Ok(())
    } else {
        Err(CliError::VerifyFailed(failed.join(", ")))
    }
}

// ------------------------------------------------------------------ flow

#[derive(Debug, Serialize)]
struct FlowResult {
    termination: &'static str,
    iterations: usize,
    dt: f64,
    initial_combined_residual: Option<f64>,
    final_combined_residual: Option<f64>,
    reduction: Option<f64>,
    final_action: Option<f64>,
    final_energy: Option<f64>,
    final_dirichlet: Option<f64>,
    dirichlet_monotone: bool,
    files: [&'static str; 3],
}

pub const TRACE_HEADER: &str =
    "iteration,action,energy,dirichlet,map_residual,spinor_residual,combined_residual,singular_value,spinor_l4";

fn cmd_flow(common: &Common) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let dir = out_dir(&cfg)?;
    let (phi, psi) = scenario::build(&cfg, cfg.chart.n)?;
    let sc = scenario::solver_config(&cfg, phi.chart());
    let out = solve(&phi, &psi, &sc)?;
    let trace = &out.report.trace;
    let mut csv = String::from(TRACE_HEADER);
    csv.push('\n');
    for r in trace {
        let sv = r.singular_value.map_or(String::new(), |v| v.to_string());
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{}",
            r.iteration,
            r.action,
            r.energy,
            r.dirichlet,
            r.map_residual,
            r.spinor_residual,
            r.combined_residual(),
            sv,
            r.spinor_l4
        )
        .unwrap();
    }
    std::fs::write(dir.join("trace.csv"), csv)?;
    write_pair(&dir, &out.phi, &out.psi)?;
    let first = trace.first().map(|r| r.combined_residual());
    let last = trace.last().map(|r| r.combined_residual());
    let result = FlowResult {
        termination: out.report.termination.as_str(),
        iterations: out.report.iterations,
        dt: sc.dt,
        initial_combined_residual: first.and_then(finite),
        final_combined_residual: last.and_then(finite),
        reduction: first.zip(last).and_then(|(a, b)| finite(a / b)),
        final_action: trace.last().and_then(|r| finite(r.action)),
        final_energy: trace.last().and_then(|r| finite(r.energy)),
        final_dirichlet: trace.last().and_then(|r| finite(r.dirichlet)),
        dirichlet_monotone: trace.windows(2).all(|w| w[1].dirichlet <= w[0].dirichlet),
        files: ["phi.dhm", "psi.dhm", "trace.csv"],
    };
    let env = Envelope::new("flow", &cfg, result);
    env.write(&dir.join("flow.json"))?;
    print!("{}", env.to_json());
    match out.report.termination {
        Termination::Diverged => Err(CliError::Diverged(out.report.iterations)),
        _ => Ok(()),
    }
}

// ------------------------------------------------------------------ probe

pub const PROBE_HEADER: &str =
    "r,dphi_r,psi_r_half,dpsi_r_three_halves,annulus_energy,map_energy_2r,spinor_energy_2r,map_ratio,spinor_ratio,growth";

fn default_radii(phi: &MapField) -> Vec<f64> {
    let chart = phi.chart();
    let h = chart.h();
    let outer = match chart.topology() {
        dhm_core::Topology::Disk => 1.0 - 4.0 * h,
        dhm_core::Topology::Torus => chart.window().unwrap_or(0.5 * chart.grid().side() - 4.0 * h),
    };
    (1..=9).map(|k| outer * k as f64 / 10.0).filter(|r| *r >= 4.0 * h).collect()
}

fn cmd_probe(common: &Common, fields: &Path) -> Result<(), CliError> {
    let cfg = load_config(common)?;
    let (phi, psi) = read_pair(&fields.join("phi.dhm"), &fields.join("psi.dhm"))?;
    let radii = cfg.probe_radii.clone().unwrap_or_else(|| default_radii(&phi));
    let rows = decay_profile(&phi, &psi, &radii)?;
    let mut csv = String::from(PROBE_HEADER);
    csv.push('\n');
    for r in &rows {
        writeln!(
            csv,
            "{},{},{},{},{},{},{},{},{},{}",
            r.r, r.dphi, r.psi, r.dpsi, r.annulus_energy, r.map_energy_2r, r.spinor_energy_2r, r.map_ratio, r.spinor_ratio, r.growth
        )
        .unwrap();
    }
    match &cfg.output_dir {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            std::fs::write(dir.join("probe.csv"), &csv)?;
        }
        None => print!("{csv}"),
    }
    Ok(())
}

// ------------------------------------------------------------------ dump

#[derive(Debug, Serialize)]
struct DumpResult {
    kind: &'static str,
    topology: &'static str,
    target: String,
    n: usize,
    side: f64,
    window: Option<f64>,
    ambient_dim: usize,
    components: usize,
    values: usize,
    min: Option<f64>,
    max: Option<f64>,
}

fn cmd_dump(file: &Path) -> Result<(), CliError> {
    let f = FieldFile::read(file)?;
    let h = &f.header;
    let (min, max) = f.payload.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let d = DumpResult {
        kind: match h.kind {
            FieldKind::Map => "map",
            FieldKind::Spinor => "spinor",
        },
        topology: match h.topology {
            dhm_core::Topology::Torus => "torus",
            dhm_core::Topology::Disk => "disk",
        },
        target: match h.target {
            dhm_core::TargetGeometry::Sphere { n } => format!("sphere({n})"),
            dhm_core::TargetGeometry::Flat { k } => format!("flat({k})"),
        },
        n: h.n,
        side: h.side,
        window: h.window,
        ambient_dim: h.k,
        components: h.components(),
        values: f.payload.len(),
        min: finite(min),
        max: finite(max),
    };
    println!("{}", serde_json::to_string_pretty(&d).expect("plain data serializes"));
    Ok(())
}
