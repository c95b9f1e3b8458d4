//! The `qgraph-loc` command line: one subcommand per diagnostic plus
//! `run` for config-driven batches. Every diagnostic writes CSV rows, a
//! JSON summary, and a manifest into the output directory; assertable
//! checks drive the exit code (report-only estimators never fail a run).
//!
//! Exit codes: 0 all assertable checks passed, 1 assertion failure,
//! 2 config error, 3 solver/runtime failure.

use crate::assembly::Mesh;
use crate::config::{DiagnosticSpec, ExperimentConfig};
use crate::diagnostics as diag;
use crate::diagnostics::OperatorFactory;
use crate::error::{ConfigError, DiagnosticsError, SolveError};
use crate::geometry::{self, BoxSpec};
use crate::random::{sample_omega, trial_seed, InteractionSpec, PotentialLaw};
use crate::report::{fmt_f64, param_hash, ReportWriter};
use crate::schedule;
use clap::{Parser, Subcommand};
use serde_json::json;
use std::path::PathBuf;

#[derive(Parser, Debug)]
#[command(
    name = "qgraph-loc",
    version,
    about = "Finite-volume spectral diagnostics for multi-particle random quantum graphs"
)]
struct Cli {
    /// Base seed for all randomized diagnostics.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Monte Carlo trials.
    #[arg(long, global = true)]
    trials: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Worker pool size (0 = available parallelism). QGRAPH_THREADS
    /// overrides.
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Particle count n.
    #[arg(long, global = true)]
    n: Option<u32>,
    /// Lattice dimension d.
    #[arg(long, global = true)]
    d: Option<u32>,
    /// Mesh subdivisions per unit edge.
    #[arg(long, global = true)]
    m: Option<u32>,
    #[arg(long, global = true)]
    q_minus: Option<f64>,
    #[arg(long, global = true)]
    q_plus: Option<f64>,
    /// Interaction amplitude.
    #[arg(long, global = true)]
    u0: Option<f64>,
    /// Interaction range.
    #[arg(long, global = true)]
    r0: Option<u64>,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Execute a batch of diagnostics from a TOML or JSON config.
    Run { config: PathBuf },
    /// Exhaustive combinatorial checks and complex dumps.
    Geometry {
        /// counts | separability | cluster | all
        #[arg(long, default_value = "all")]
        check: String,
        /// Center bound for the exhaustive separability grid.
        #[arg(long)]
        limit: Option<i64>,
        /// Dump the complex of Λ_l as JSON (uses --n/--d/--m).
        #[arg(long)]
        dump_l: Option<u32>,
    },
    /// Multiscale schedule table with feasibility checks.
    Schedule {
        #[arg(long)]
        l0: u64,
        #[arg(long, default_value_t = 4)]
        k: usize,
        /// Decay budget p1, or "auto" for the smallest feasible value.
        #[arg(long, default_value = "auto")]
        p1: String,
    },
    /// Assemble the pencil on Λ_L(0) and report its shape.
    Assemble {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        export_triplets: bool,
        #[arg(long)]
        export_omega: bool,
    },
    /// Lowest eigenpairs.
    Spectrum {
        #[arg(long)]
        l: u32,
        #[arg(long, default_value_t = 5)]
        k: usize,
    },
    /// One Green's-function cell block.
    Green {
        #[arg(long)]
        l: u32,
        #[arg(long)]
        energy: f64,
        #[arg(long, value_delimiter = ',')]
        x: Vec<i64>,
        #[arg(long, value_delimiter = ',')]
        y: Vec<i64>,
    },
    /// Combes-Thomas sweep (assertable: 100% of cases must pass).
    CtCheck {
        #[arg(long, default_value_t = 8)]
        l: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0.25, 0.5])]
        etas: Vec<f64>,
    },
    /// Davies-Gaffney sweep (assertable: 100% of cases must pass).
    DgCheck {
        #[arg(long, default_value_t = 8)]
        l: u32,
        #[arg(long, value_delimiter = ',', default_values_t = [0.5, 1.0, 2.0])]
        t_grid: Vec<f64>,
    },
    /// One-volume Wegner estimator over an ε sweep.
    Wegner1 {
        #[arg(long, default_value_t = 4)]
        l: u32,
        #[arg(long, default_value_t = 0.5)]
        energy: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.04, 0.02, 0.01])]
        eps: Vec<f64>,
    },
    /// Two-volume Wegner estimator on a separable pair.
    Wegner2 {
        #[arg(long, default_value_t = 2)]
        l: u32,
        #[arg(long, default_value_t = 0.05)]
        eps: f64,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0, 3.0])]
        interval: Vec<f64>,
    },
    /// Lifshitz scarcity estimator over a grid of half-sides.
    Lifshitz {
        #[arg(long, value_delimiter = ',', default_values_t = [1, 2, 3, 4, 5])]
        l_grid: Vec<u64>,
        #[arg(long, default_value_t = 0.5)]
        b: f64,
    },
    /// Initial-length-scale gap event at base scale L0.
    Ils {
        #[arg(long, default_value_t = 9)]
        l0: u64,
        /// Also run the direct grid scan for the singularity event.
        #[arg(long)]
        scan: bool,
    },
    /// Two-cube DS pair-singularity estimator (report only).
    Ds {
        #[arg(long, default_value_t = 8)]
        l: u32,
        #[arg(long)]
        mass: Option<f64>,
    },
    /// Geometric resolvent inequality audit (empirical constants).
    GriAudit {
        #[arg(long, default_value_t = 8)]
        l: u32,
        #[arg(long, default_value_t = 16)]
        big_l: u32,
        #[arg(long, default_value_t = -0.5)]
        energy: f64,
        #[arg(long, default_value_t = 1.0)]
        s: f64,
    },
    /// Eigenfunction decay-mass fits.
    MassFit {
        #[arg(long, default_value_t = 100)]
        l: u32,
        #[arg(long, default_value_t = 5)]
        count: usize,
        /// Fit the synthetic e^{-|x|} field instead of eigenfunctions.
        #[arg(long)]
        synthetic: bool,
    },
    /// Dynamical moment across box sizes.
    DynMoment {
        #[arg(long, value_delimiter = ',', default_values_t = [20, 40, 80])]
        l_grid: Vec<u32>,
        #[arg(long, default_value_t = 2.0)]
        s: f64,
    },
    /// Cheeger gap of the Kirchhoff Laplacian (assertable).
    Cheeger {
        #[arg(long, default_value_t = 5)]
        l: u64,
    },
}

pub fn main() {
    let code = run_from_args(std::env::args_os());
    std::process::exit(code);
}

pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(CliError::Config(e)) => {
            eprintln!("config error: {e}");
            2
        }
        Err(CliError::Runtime(msg)) => {
            eprintln!("error: {msg}");
            3
        }
    }
}

#[derive(Debug)]
enum CliError {
    Config(ConfigError),
    Runtime(String),
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        Self::Config(e)
    }
}
impl From<DiagnosticsError> for CliError {
    fn from(e: DiagnosticsError) -> Self {
        Self::Runtime(e.to_string())
    }
}
impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        Self::Runtime(e.to_string())
    }
}
impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        Self::Runtime(format!("io: {e}"))
    }
}
impl From<crate::error::AssembleError> for CliError {
    fn from(e: crate::error::AssembleError) -> Self {
        Self::Runtime(e.to_string())
    }
}
impl From<crate::error::GeometryError> for CliError {
    fn from(e: crate::error::GeometryError) -> Self {
        Self::Runtime(e.to_string())
    }
}
impl From<crate::error::RandomError> for CliError {
    fn from(e: crate::error::RandomError) -> Self {
        Self::Runtime(e.to_string())
    }
}

fn dispatch(cli: Cli) -> Result<bool, CliError> {
    // effective config: file (for run) or defaults, plus global overrides
    let mut cfg = ExperimentConfig::default();
    if let Command::Run { config } = &cli.cmd {
        cfg = ExperimentConfig::load(config)?;
    }
    if let Some(n) = cli.n {
        cfg.model.n = n;
    }
    if let Some(d) = cli.d {
        cfg.model.d = d;
    }
    if let Some(m) = cli.m {
        cfg.mesh.m = m;
    }
    if let Some(q) = cli.q_minus {
        cfg.model.law.q_minus = q;
    }
    if let Some(q) = cli.q_plus {
        cfg.model.law.q_plus = q;
    }
    if let Some(u0) = cli.u0 {
        cfg.model.interaction.u0 = u0;
    }
    if let Some(r0) = cli.r0 {
        cfg.model.interaction.r0 = r0;
    }
    if let Some(s) = cli.seed {
        cfg.run.seed = s;
    }
    if let Some(t) = cli.trials {
        cfg.run.trials = t;
    }
    if let Some(t) = cli.threads {
        cfg.run.threads = t;
    }
    if let Some(o) = cli.out {
        cfg.output.dir = o;
    }
    if let Ok(t) = std::env::var("QGRAPH_THREADS") {
        if let Ok(t) = t.parse() {
            cfg.run.threads = t;
        }
    }
    cfg.validate()?;

    let spec = match cli.cmd {
        Command::Run { .. } => None,
        Command::Geometry {
            check,
            limit,
            dump_l,
        } => Some(match check.as_str() {
            "counts" | "separability" | "cluster" | "all" => DiagnosticSpec::Geometry {
                exhaustive_limit: limit,
                dump_complex_l: dump_l,
            },
            other => {
                return Err(ConfigError::Invalid {
                    field: "--check".into(),
                    message: format!("unknown geometry check {other}"),
                }
                .into())
            }
        }),
        Command::Schedule { l0, k, p1 } => {
            let p1 = if p1 == "auto" {
                None
            } else {
                Some(p1.parse::<f64>().map_err(|_| ConfigError::Invalid {
                    field: "--p1".into(),
                    message: format!("expected a number or 'auto', got {p1}"),
                })?)
            };
            Some(DiagnosticSpec::Schedule { l0, k, p1 })
        }
        Command::Assemble {
            l,
            export_triplets,
            export_omega,
        } => Some(DiagnosticSpec::Assemble {
            l,
            export_triplets,
            export_omega,
        }),
        Command::Spectrum { l, k } => Some(DiagnosticSpec::Spectrum { l, k }),
        Command::Green { l, energy, x, y } => Some(DiagnosticSpec::Green { l, energy, x, y }),
        Command::CtCheck { l, etas } => Some(DiagnosticSpec::CtCheck {
            l,
            etas,
            trials: None,
        }),
        Command::DgCheck { l, t_grid } => Some(DiagnosticSpec::DgCheck {
            l,
            t_grid,
            trials: None,
        }),
        Command::Wegner1 { l, energy, eps } => Some(DiagnosticSpec::Wegner1 {
            l,
            energy,
            eps,
            trials: None,
        }),
        Command::Wegner2 { l, eps, interval } => {
            if interval.len() != 2 {
                return Err(ConfigError::Invalid {
                    field: "--interval".into(),
                    message: "expected lo,hi".into(),
                }
                .into());
            }
            Some(DiagnosticSpec::Wegner2 {
                l,
                eps,
                interval: (interval[0], interval[1]),
                trials: None,
            })
        }
        Command::Lifshitz { l_grid, b } => Some(DiagnosticSpec::Lifshitz {
            l_grid,
            b,
            trials: None,
        }),
        Command::Ils { l0, scan } => Some(DiagnosticSpec::Ils {
            l0,
            scan,
            trials: None,
        }),
        Command::Ds { l, mass } => Some(DiagnosticSpec::Ds {
            l,
            mass: mass.unwrap_or_else(|| (l as f64).powf(-0.25) / 3.0),
            trials: None,
        }),
        Command::GriAudit { l, big_l, energy, s } => Some(DiagnosticSpec::GriAudit {
            l,
            big_l,
            energy,
            s,
        }),
        Command::MassFit { l, count, synthetic } => Some(DiagnosticSpec::MassFit {
            l,
            count,
            synthetic,
        }),
        Command::DynMoment { l_grid, s } => Some(DiagnosticSpec::DynMoment { l_grid, s }),
        Command::Cheeger { l } => Some(DiagnosticSpec::Cheeger { l }),
    };

    let writer = ReportWriter::new(&cfg.output.dir)?;
    let specs: Vec<DiagnosticSpec> = match spec {
        Some(s) => vec![s],
        None => cfg.diagnostic.clone(),
    };
    let threads = cfg.run.threads;
    diag::with_pool(threads, || {
        let mut all_pass = true;
        for s in &specs {
            let outcome = execute(&cfg, s, &writer)?;
            println!("{}", outcome.line);
            if outcome.assertable && !outcome.passed {
                all_pass = false;
            }
        }
        Ok(all_pass)
    })
}

struct Outcome {
    assertable: bool,
    passed: bool,
    line: String,
}

impl Outcome {
    fn report(line: String) -> Self {
        Self {
            assertable: false,
            passed: true,
            line,
        }
    }
    fn check(passed: bool, line: String) -> Self {
        Self {
            assertable: true,
            passed,
            line,
        }
    }
}

fn law_of(cfg: &ExperimentConfig) -> Result<PotentialLaw, CliError> {
    Ok(PotentialLaw::new(
        cfg.model.law.kind,
        cfg.model.law.q_minus,
        cfg.model.law.q_plus,
    )?)
}

fn interaction_of(cfg: &ExperimentConfig) -> Result<InteractionSpec, CliError> {
    Ok(InteractionSpec::new(
        cfg.model.interaction.u0,
        cfg.model.interaction.r0,
        cfg.model.interaction.kernel,
    )?)
}

fn centered_cube(cfg: &ExperimentConfig, l: u32) -> Result<BoxSpec, CliError> {
    let nd = (cfg.model.n * cfg.model.d) as usize;
    Ok(BoxSpec::cube(
        vec![0i64; nd],
        l,
        cfg.model.n as usize,
        cfg.model.d as usize,
    )?)
}

/// Default cell pairs along the all-ones direction at cell distances >= 1.
fn diagonal_pairs(cfg: &ExperimentConfig, l: u32, offsets: &[i64]) -> Vec<(Vec<i64>, Vec<i64>)> {
    let nd = (cfg.model.n * cfg.model.d) as usize;
    offsets
        .iter()
        .filter(|&&k| k < l as i64)
        .map(|&k| (vec![0i64; nd], vec![k; nd]))
        .collect()
}

fn ceiling_of(cfg: &ExperimentConfig) -> f64 {
    cfg.model.n as f64 * cfg.model.law.q_minus + 64.0
}

fn execute(
    cfg: &ExperimentConfig,
    spec: &DiagnosticSpec,
    writer: &ReportWriter,
) -> Result<Outcome, CliError> {
    let name = spec.name();
    let params = json!({
        "spec": spec,
        "model": cfg.model,
        "mesh": cfg.mesh,
        "run": { "seed": cfg.run.seed, "trials": cfg.run.trials },
    });
    let hash = param_hash(&params);
    let seed = cfg.run.seed;
    let mesh = Mesh::new(cfg.mesh.m).map_err(|e| CliError::Runtime(e.to_string()))?;

    match spec {
        DiagnosticSpec::Geometry {
            exhaustive_limit,
            dump_complex_l,
        } => run_geometry(cfg, writer, name, &hash, params, *exhaustive_limit, *dump_complex_l),
        DiagnosticSpec::Schedule { l0, k, p1 } => {
            run_schedule(cfg, writer, name, &hash, params, *l0, *k, *p1)
        }
        DiagnosticSpec::Assemble {
            l,
            export_triplets,
            export_omega,
        } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let omega = sample_omega(&law, &edges, seed)?;
            let op = crate::assembly::assemble(&cube, &omega, &inter, mesh)?;
            let asym = op.a.max_asymmetry().max(op.b.max_asymmetry());
            let mut outputs = Vec::new();
            if *export_omega {
                let rows: Vec<Vec<String>> = omega
                    .to_csv_rows()
                    .into_iter()
                    .map(|(addr, v)| vec![addr, fmt_f64(v)])
                    .collect();
                outputs.push(writer.write_csv(
                    "omega",
                    &hash,
                    "omega-replay",
                    &["edge", "value"],
                    &rows,
                )?);
            }
            if *export_triplets {
                for (label, mat) in [("A", &op.a), ("B", &op.b)] {
                    let rows: Vec<Vec<String>> = mat
                        .triplets()
                        .into_iter()
                        .map(|(i, j, v)| vec![i.to_string(), j.to_string(), fmt_f64(v)])
                        .collect();
                    outputs.push(writer.write_csv(
                        &format!("{name}-{label}"),
                        &hash,
                        "coo-triplets",
                        &["row", "col", "value"],
                        &rows,
                    )?);
                }
            }
            let summary = json!({
                "dofs": op.dofs(),
                "nnz_a": op.a.nnz(),
                "nnz_b": op.b.nnz(),
                "w_min": op.meta.w_min,
                "max_asymmetry": asym,
            });
            outputs.push(writer.write_summary(name, &hash, &summary)?);
            writer.write_manifest(name, &hash, params, seed, &outputs)?;
            Ok(Outcome::check(
                asym == 0.0,
                format!(
                    "assemble: {} DOFs, nnz(A) = {}, symmetric = {}",
                    op.dofs(),
                    op.a.nnz(),
                    asym == 0.0
                ),
            ))
        }
        DiagnosticSpec::Spectrum { l, k } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let omega = sample_omega(&law, &edges, seed)?;
            let op = crate::assembly::assemble(&cube, &omega, &inter, mesh)?;
            let res = crate::spectral::lowest_eigs(&op, *k, crate::spectral::EIG_TOL, seed)?;
            let rows: Vec<Vec<String>> = res
                .eigenvalues
                .iter()
                .zip(&res.residual_norms)
                .enumerate()
                .map(|(j, (e, r))| vec![(j + 1).to_string(), fmt_f64(*e), fmt_f64(*r)])
                .collect();
            let csv =
                writer.write_csv(name, &hash, "eigenpairs", &["j", "energy", "residual"], &rows)?;
            let ok = res
                .residual_norms
                .iter()
                .all(|&r| r <= crate::spectral::EIG_TOL);
            let summary = json!({ "eigenvalues": res.eigenvalues, "residuals_ok": ok });
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            Ok(Outcome::check(
                ok,
                format!(
                    "spectrum: E1 = {:.6}, {} pairs, residuals ok = {ok}",
                    res.eigenvalues[0],
                    res.eigenvalues.len()
                ),
            ))
        }
        DiagnosticSpec::Green { l, energy, x, y } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let omega = sample_omega(&law, &edges, seed)?;
            let op = crate::assembly::assemble(&cube, &omega, &inter, mesh)?;
            let ctx =
                crate::spectral::ResolventContext::new(&op, *energy, ceiling_of(cfg), seed, 1e-12)?;
            let fwd = ctx.block_norm(x, y)?;
            let bwd = ctx.block_norm(y, x)?;
            let bound = 1.0 / ctx.dist;
            let sym_ok = (fwd.norm - bwd.norm).abs() <= 1e-8 * (1.0 + fwd.norm);
            let bound_ok = fwd.norm <= bound + 1e-9;
            let summary = json!({
                "energy": energy, "norm": fwd.norm, "norm_swapped": bwd.norm,
                "spectral_dist": ctx.dist, "resolvent_bound": bound,
                "swap_symmetric": sym_ok, "within_resolvent_bound": bound_ok,
            });
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::check(
                sym_ok && bound_ok,
                format!(
                    "green: |G({x:?},{y:?};{energy})| = {:.6e} (bound {:.3e})",
                    fwd.norm, bound
                ),
            ))
        }
        DiagnosticSpec::CtCheck { l, etas, trials } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let pairs = diagonal_pairs(cfg, *l, &[3, 4, 5, 6, 7]);
            let mut rows = Vec::new();
            let mut pass = 0u64;
            let mut total = 0u64;
            for t in 0..trials {
                let omega = sample_omega(&law, &edges, trial_seed(seed, t))?;
                let factory = OperatorFactory {
                    omega: &omega,
                    interaction: inter,
                    mesh,
                };
                for &eta in etas {
                    let cases = diag::verify_combes_thomas(&factory, &cube, eta, &pairs, t)?;
                    for c in cases {
                        total += 1;
                        if c.pass {
                            pass += 1;
                        }
                        rows.push(vec![
                            t.to_string(),
                            fmt_f64(eta),
                            fmt_f64(c.delta),
                            fmt_f64(c.measured),
                            fmt_f64(c.bound),
                            (c.pass as u8).to_string(),
                        ]);
                    }
                }
            }
            let csv = writer.write_csv(
                name,
                &hash,
                "ct-cases",
                &["trial", "eta", "delta", "measured", "bound", "pass"],
                &rows,
            )?;
            let summary =
                json!({ "cases": total, "passed": pass, "pass_rate": pass as f64 / total as f64 });
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            Ok(Outcome::check(
                pass == total,
                format!("ct-check: pass-rate {pass}/{total}"),
            ))
        }
        DiagnosticSpec::DgCheck { l, t_grid, trials } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let pairs = diagonal_pairs(cfg, *l, &[3, 4, 5]);
            let mut rows = Vec::new();
            let mut pass = 0u64;
            let mut total = 0u64;
            for t in 0..trials {
                let omega = sample_omega(&law, &edges, trial_seed(seed, t))?;
                let factory = OperatorFactory {
                    omega: &omega,
                    interaction: inter,
                    mesh,
                };
                let cases = diag::verify_davies_gaffney(&factory, &cube, t_grid, &pairs, t)?;
                for c in cases {
                    total += 1;
                    if c.pass {
                        pass += 1;
                    }
                    rows.push(vec![
                        t.to_string(),
                        fmt_f64(c.t),
                        fmt_f64(c.delta),
                        fmt_f64(c.measured),
                        fmt_f64(c.error_bound),
                        fmt_f64(c.rhs),
                        (c.pass as u8).to_string(),
                    ]);
                }
            }
            let csv = writer.write_csv(
                name,
                &hash,
                "dg-cases",
                &["trial", "t", "delta", "measured", "err", "rhs", "pass"],
                &rows,
            )?;
            let summary = json!({ "cases": total, "passed": pass });
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            Ok(Outcome::check(
                pass == total,
                format!("dg-check: pass-rate {pass}/{total}"),
            ))
        }
        DiagnosticSpec::Wegner1 {
            l,
            energy,
            eps,
            trials,
        } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let mut rows = Vec::new();
            let mut results = Vec::new();
            for &e in eps {
                let r = diag::mc_wegner_one(&law, &inter, mesh, &cube, *energy, e, trials, seed)?;
                rows.push(vec![
                    fmt_f64(e),
                    r.estimate.successes.to_string(),
                    trials.to_string(),
                    fmt_f64(r.estimate.p_hat),
                    fmt_f64(r.estimate.wilson_lo),
                    fmt_f64(r.estimate.wilson_hi),
                    fmt_f64(r.rhs_factor),
                    fmt_f64(r.ratio),
                ]);
                results.push(r);
            }
            let slope = loglog_slope(
                &results.iter().map(|r| r.eps).collect::<Vec<_>>(),
                &results.iter().map(|r| r.estimate.p_hat).collect::<Vec<_>>(),
            );
            let csv = writer.write_csv(
                name,
                &hash,
                "wegner1",
                &[
                    "eps",
                    "successes",
                    "trials",
                    "p_hat",
                    "wilson_lo",
                    "wilson_hi",
                    "rhs_factor",
                    "ratio",
                ],
                &rows,
            )?;
            let summary = json!({ "results": results, "loglog_slope": slope });
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            Ok(Outcome::report(format!(
                "wegner1: E = {energy}, slope = {}",
                slope
                    .map(|s| format!("{s:.3}"))
                    .unwrap_or_else(|| "n/a".into())
            )))
        }
        DiagnosticSpec::Wegner2 {
            l,
            eps,
            interval,
            trials,
        } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let (u, v) = diag::separable_pair_centers(
                cfg.model.n as usize,
                cfg.model.d as usize,
                *l as u64,
                inter.r0,
            );
            let a = BoxSpec::cube(u, *l, cfg.model.n as usize, cfg.model.d as usize)?;
            let b = BoxSpec::cube(v, *l, cfg.model.n as usize, cfg.model.d as usize)?;
            let r = diag::mc_wegner_two(&law, &inter, mesh, &a, &b, *interval, *eps, trials, seed)?;
            let sj = writer.write_summary(name, &hash, &r)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::report(format!(
                "wegner2: p_hat = {:.5} (ratio {:.3e})",
                r.estimate.p_hat, r.ratio
            )))
        }
        DiagnosticSpec::Lifshitz { l_grid, b, trials } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let r = diag::mc_lifshitz(
                &law,
                &inter,
                mesh,
                cfg.model.n,
                cfg.model.d,
                l_grid,
                *b,
                trials,
                seed,
            )?;
            let rows: Vec<Vec<String>> = r
                .cells
                .iter()
                .map(|c| {
                    vec![
                        c.l.to_string(),
                        c.n_l.to_string(),
                        fmt_f64(c.threshold),
                        c.estimate.successes.to_string(),
                        trials.to_string(),
                        fmt_f64(c.estimate.p_hat),
                        fmt_f64(c.neg_log_p),
                    ]
                })
                .collect();
            let csv = writer.write_csv(
                name,
                &hash,
                "lifshitz",
                &[
                    "l",
                    "n_l",
                    "threshold",
                    "successes",
                    "trials",
                    "p_hat",
                    "neg_log_p",
                ],
                &rows,
            )?;
            let sj = writer.write_summary(name, &hash, &r)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            Ok(Outcome::report(format!(
                "lifshitz: gamma_hat = {}",
                r.gamma_hat
                    .map(|g| format!("{g:.4}"))
                    .unwrap_or_else(|| "n/a".into())
            )))
        }
        DiagnosticSpec::Ils { l0, scan, trials } => {
            let trials = trials.unwrap_or(cfg.run.trials);
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let r = diag::mc_ils(
                &law,
                &inter,
                mesh,
                cfg.model.n,
                cfg.model.d,
                *l0,
                trials,
                seed,
                *scan,
            )?;
            let sj = writer.write_summary(name, &hash, &r)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::report(format!(
                "ils: L0 = {l0}, gap p_hat = {:.5}",
                r.gap_estimate.p_hat
            )))
        }
        DiagnosticSpec::Ds { l, mass, trials } => {
            let trials = trials.unwrap_or(cfg.run.trials.min(200));
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let n = cfg.model.n as usize;
            let d = cfg.model.d as usize;
            let (u, v) = diag::separable_pair_centers(n, d, *l as u64, inter.r0);
            let a = BoxSpec::cube(u, *l, n, d)?;
            let b = BoxSpec::cube(v, *l, n, d)?;
            let nq = cfg.model.n as f64 * law.q_minus;
            let eps0 = 0.5 * (*l as f64).powf(-0.5);
            let p1 = schedule::min_feasible_p1(cfg.model.n, cfg.model.d);
            let target = (*l as f64).powf(-2.0 * p1);
            let r = diag::mc_ds(
                &law,
                &inter,
                mesh,
                &a,
                &b,
                *mass,
                (nq - 0.5, nq + eps0),
                target,
                trials,
                seed,
            )?;
            let sj = writer.write_summary(name, &hash, &r)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::report(format!(
                "ds: p_hat = {:.5}, target bound = {:.3e}",
                r.estimate.p_hat, r.target_bound
            )))
        }
        DiagnosticSpec::GriAudit { l, big_l, energy, s } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let small = centered_cube(cfg, *l)?;
            let big = centered_cube(cfg, *big_l)?;
            let edges = diag::edges_of_box(&big);
            let omega = sample_omega(&law, &edges, seed)?;
            let factory = OperatorFactory {
                omega: &omega,
                interaction: inter,
                mesh,
            };
            let nd = (cfg.model.n * cfg.model.d) as usize;
            let u = vec![0i64; nd];
            let y = vec![*big_l as i64 - 1; nd];
            let g2 =
                diag::verify_gri2(&factory, &small, &big, *energy, &u, &y, ceiling_of(cfg), seed)?;
            let mut summary = json!({ "gri2": g2 });
            if cfg.model.n >= 2 {
                let n = cfg.model.n as usize;
                let d = cfg.model.d as usize;
                let far = 3 * (2 * *l as i64 + inter.r0 as i64);
                let mut center = vec![0i64; n * d];
                for j in 1..n {
                    center[j * d..(j + 1) * d]
                        .iter_mut()
                        .for_each(|c| *c = far * j as i64);
                }
                let pi_cube = BoxSpec::cube(center.clone(), *l, n, d)?;
                let pi_edges = diag::edges_of_box(&pi_cube);
                let pi_omega = sample_omega(&law, &pi_edges, seed)?;
                let pi_factory = OperatorFactory {
                    omega: &pi_omega,
                    interaction: inter,
                    mesh,
                };
                let mut x = center.clone();
                let mut yy = center.clone();
                x[d..2 * d].iter_mut().for_each(|c| *c -= 2);
                yy[d..2 * d].iter_mut().for_each(|c| *c += 2);
                let g3 = diag::verify_gri3(
                    &pi_factory,
                    &pi_cube,
                    *energy,
                    &x,
                    &yy,
                    *s,
                    law.q_minus,
                    ceiling_of(cfg),
                    seed,
                )?;
                summary["gri3"] = serde_json::to_value(&g3).unwrap();
            }
            let sj = writer.write_summary(name, &hash, &summary)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::report(format!(
                "gri-audit: empirical C = {:.4e}",
                g2.empirical_c
            )))
        }
        DiagnosticSpec::MassFit { l, count, synthetic } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let cube = centered_cube(cfg, *l)?;
            let edges = diag::edges_of_box(&cube);
            let omega = sample_omega(&law, &edges, seed)?;
            let op = crate::assembly::assemble(&cube, &omega, &inter, mesh)?;
            let fits = if *synthetic {
                let v: Vec<f64> = (0..op.dofs())
                    .map(|i| (-op.dofmap.position_sup_norm(i)).exp())
                    .collect();
                vec![diag::mass_fit_vector(&op, &v)?]
            } else {
                let res =
                    crate::spectral::lowest_eigs(&op, *count, crate::spectral::EIG_TOL, seed)?;
                diag::eigenfunction_mass(
                    &op,
                    res.eigenvalues[0] - 1e-12,
                    res.eigenvalues[count - 1] + 1e-12,
                    seed,
                )?
            };
            let rows: Vec<Vec<String>> = fits
                .iter()
                .map(|f| {
                    vec![
                        f.eigenvalue
                            .map(fmt_f64)
                            .unwrap_or_else(|| "synthetic".into()),
                        fmt_f64(f.m_hat),
                        fmt_f64(f.r2),
                        f.points.to_string(),
                    ]
                })
                .collect();
            let csv = writer.write_csv(
                name,
                &hash,
                "mass-fit",
                &["eigenvalue", "m_hat", "r2", "points"],
                &rows,
            )?;
            let sj = writer.write_summary(name, &hash, &fits)?;
            writer.write_manifest(name, &hash, params, seed, &[csv, sj])?;
            let m0 = fits[0].m_hat;
            Ok(Outcome::report(format!("mass-fit: m_hat[0] = {m0:.4}")))
        }
        DiagnosticSpec::DynMoment { l_grid, s } => {
            let law = law_of(cfg)?;
            let inter = interaction_of(cfg)?;
            let mut rows = Vec::new();
            for &l in l_grid {
                let cube = centered_cube(cfg, l)?;
                let edges = diag::edges_of_box(&cube);
                let omega = sample_omega(&law, &edges, seed)?;
                let op = crate::assembly::assemble(&cube, &omega, &inter, mesh)?;
                let res = crate::spectral::lowest_eigs(&op, 5, crate::spectral::EIG_TOL, seed)?;
                let cells = vec![vec![0i64; (cfg.model.n * cfg.model.d) as usize]];
                let moment = crate::spectral::dyn_moment(
                    &op,
                    res.eigenvalues[0] - 1e-12,
                    res.eigenvalues[4] + 1e-12,
                    &cells,
                    *s,
                    |_| 1.0,
                    seed,
                )?;
                rows.push(vec![l.to_string(), fmt_f64(*s), fmt_f64(moment)]);
            }
            let csv = writer.write_csv(name, &hash, "dyn-moment", &["l", "s", "moment"], &rows)?;
            writer.write_manifest(name, &hash, params, seed, &[csv])?;
            Ok(Outcome::report("dyn-moment: written".into()))
        }
        DiagnosticSpec::Cheeger { l } => {
            let rep = diag::cheeger_gap_check(cfg.model.d, *l, mesh)?;
            let sj = writer.write_summary(name, &hash, &rep)?;
            writer.write_manifest(name, &hash, params, seed, &[sj])?;
            Ok(Outcome::check(
                rep.pass && rep.e1.abs() <= 1e-10,
                format!(
                    "cheeger: d = {}, l = {l}, E2 = {:.6e} >= {:.3e}: {}",
                    cfg.model.d,
                    rep.e2,
                    rep.threshold,
                    if rep.pass { "pass" } else { "FAIL" }
                ),
            ))
        }
    }
}

fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(&x, &y)| x > 0.0 && y > 0.0)
        .map(|(&x, &y)| (x.ln(), y.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    (denom > 0.0).then(|| (n * sxy - sx * sy) / denom)
}

#[allow(clippy::too_many_arguments)]
fn run_geometry(
    cfg: &ExperimentConfig,
    writer: &ReportWriter,
    name: &str,
    hash: &str,
    params: serde_json::Value,
    limit: Option<i64>,
    dump_l: Option<u32>,
) -> Result<Outcome, CliError> {
    let mut pass = true;
    let mut notes = Vec::new();

    // counts: enumeration vs formula for d <= 3, L <= 3
    let mut count_cases = 0u64;
    for d in 1..=3usize {
        for l in 1..=3u32 {
            let u = vec![0i64; d];
            let got = geometry::enumerate_edges(&u, l, d).len() as u128;
            let want = geometry::count_edges(d as u32, l as u64)?;
            count_cases += 1;
            if got != want {
                pass = false;
                notes.push(format!("edge count mismatch d={d} L={l}"));
            }
        }
    }

    // separability: the sufficient conditions imply the definitional
    // predicates on the exhaustive grid, and separable FI pairs are
    // completely separated
    let bound = limit.unwrap_or(12);
    let l = 2u32;
    let r0 = cfg.model.interaction.r0.max(1);
    let mut sep_cases = 0u64;
    for u1 in -bound..=bound {
        for u2 in -bound..=bound {
            let a = BoxSpec::cube(vec![u1, u2], l, 2, 1)?;
            for v1 in -bound..=bound {
                for v2 in -bound..=bound {
                    let b = BoxSpec::cube(vec![v1, v2], l, 2, 1)?;
                    let rep = geometry::separability(&a, &b, r0)?;
                    sep_cases += 1;
                    if geometry::sufficient_preseparable(&a.center, &b.center, l as u64, 2, 1)
                        && rep.pre_separable.is_none()
                    {
                        pass = false;
                        notes.push(format!("pre-separability broken at ({u1},{u2}),({v1},{v2})"));
                    }
                    if geometry::sufficient_separable(&a.center, &b.center, l as u64, r0, 2, 1)
                        && !rep.separable
                    {
                        pass = false;
                        notes.push(format!("separability broken at ({u1},{u2}),({v1},{v2})"));
                    }
                    if rep.separable && !rep.completely_separated {
                        use geometry::Interactivity::Fi;
                        let fi = geometry::classify_interactive(&a, r0)? == Fi
                            && geometry::classify_interactive(&b, r0)? == Fi;
                        if fi {
                            pass = false;
                            notes.push(format!(
                                "separable FI pair not completely separated at ({u1},{u2}),({v1},{v2})"
                            ));
                        }
                    }
                }
            }
        }
    }

    // cluster clauses on seeded random inputs (asserted inside
    // cluster_cubes; violations surface as errors)
    let mut cluster_cases = 0u64;
    let mut s = cfg.run.seed;
    let mut rnd = move || {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1);
        (s >> 33) as i64
    };
    for _ in 0..1000 {
        let d = 1 + (rnd() % 2) as usize;
        let n = 1 + (rnd() % 2) as usize;
        let k = 1 + (rnd() % 6) as usize;
        let side = 1 + (rnd() % 6) as u64;
        let centers: Vec<Vec<i64>> = (0..k)
            .map(|_| (0..n * d).map(|_| rnd() % 121 - 60).collect())
            .collect();
        cluster_cases += 1;
        if let Err(e) = geometry::cluster_cubes(&centers, side, n * d) {
            pass = false;
            notes.push(format!("cluster clause violation: {e}"));
        }
    }

    let mut outputs = Vec::new();
    if let Some(dl) = dump_l {
        let spec = BoxSpec::cube(
            vec![0i64; (cfg.model.n * cfg.model.d) as usize],
            dl,
            cfg.model.n as usize,
            cfg.model.d as usize,
        )?;
        let cubes = geometry::enumerate_cubes(&spec);
        let dofs = geometry::glue_box(&spec, cfg.mesh.m);
        let shared = (0..dofs.len())
            .filter(|&i| {
                dofs.cubes
                    .iter()
                    .filter(|c| dofs.cube_local_to_global(c).contains(&i))
                    .count()
                    > 1
            })
            .count();
        let dump = json!({
            "box": spec,
            "cube_count": cubes.len(),
            "cubes": cubes
                .iter()
                .map(|c| c.edges.iter().map(|e| e.address()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
            "dof_count": dofs.len(),
            "shared_dof_count": shared,
        });
        outputs.push(writer.write_summary("complex-dump", hash, &dump)?);
    }

    let summary = json!({
        "pass": pass,
        "count_cases": count_cases,
        "separability_cases": sep_cases,
        "cluster_cases": cluster_cases,
        "notes": notes,
    });
    outputs.push(writer.write_summary(name, hash, &summary)?);
    writer.write_manifest(name, hash, params, cfg.run.seed, &outputs)?;
    Ok(Outcome::check(
        pass,
        format!(
            "geometry: {} (counts {count_cases}, separability {sep_cases}, cluster {cluster_cases})",
            if pass { "pass" } else { "FAIL" }
        ),
    ))
}

#[allow(clippy::too_many_arguments)]
fn run_schedule(
    cfg: &ExperimentConfig,
    writer: &ReportWriter,
    name: &str,
    hash: &str,
    params: serde_json::Value,
    l0: u64,
    k: usize,
    p1: Option<f64>,
) -> Result<Outcome, CliError> {
    let p1 = p1.unwrap_or_else(|| schedule::min_feasible_p1(cfg.model.n, cfg.model.d));
    let built = schedule::build_schedule(
        cfg.model.n,
        cfg.model.d,
        p1,
        l0,
        k,
        cfg.model.interaction.r0,
        cfg.model.law.q_minus,
    );
    match built {
        Ok(s) => {
            let mut rows = Vec::new();
            println!("k | L_k | m_Lk | r_{{1,Lk}}");
            for (i, l) in s.lengths.iter().enumerate() {
                println!("{i} | {l} | {:.6e} | {}", s.masses[i], s.r_nl[0][i]);
                rows.push(vec![
                    i.to_string(),
                    l.to_string(),
                    fmt_f64(s.masses[i]),
                    s.r_nl[0][i].to_string(),
                ]);
            }
            for c in &s.checks {
                println!(
                    "check: {} -> {}",
                    c.name,
                    if c.ok { "ok" } else { "violated" }
                );
            }
            let csv =
                writer.write_csv(name, hash, "schedule", &["k", "L_k", "m_Lk", "r_1Lk"], &rows)?;
            let sj = writer.write_summary(name, hash, &s)?;
            writer.write_manifest(name, hash, params, cfg.run.seed, &[csv, sj])?;
            Ok(Outcome::report(format!(
                "schedule: p1 = {p1}, L = {:?}",
                s.lengths_u64()
            )))
        }
        Err(e) => {
            let summary = json!({ "feasible": false, "error": e.to_string(), "p1": p1 });
            let sj = writer.write_summary(name, hash, &summary)?;
            writer.write_manifest(name, hash, params, cfg.run.seed, &[sj])?;
            Ok(Outcome::check(false, format!("schedule: infeasible ({e})")))
        }
    }
}
