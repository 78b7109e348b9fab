//! Command-line entry point.
//!
//! Exit codes: 0 when every check in the report passes, 1 when a check or a
//! numerical invariant fails, 2 for usage errors (bad flags, unreadable or
//! invalid config and snapshot inputs).

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::checks::{
    gradient_fd_check, hessian_fd_check, hessian_symmetry_check, refinement_ratios,
    weitzenbock_study,
};
use crate::error::{Error, Result};
use crate::fields::{Chirality, Configuration, SpinorField};
use crate::flow::{
    classify_critical_point, descend, CriticalPointClass, FlowStatus, REDUCIBLE_TOL,
};
use crate::functional::{monopole_residual_norm_sqr, sw_eval, sw_gradient, weitzenbock_rhs};
use crate::hessian::{reducible_blocks, HessianOperator, TangentVector, DENSE_CAP};
use crate::hodge::{betti_1, hodge_split, jacobian_coordinates};
use crate::io::config::{KgSpec, OperatorChoice, RunConfig};
use crate::io::report::{
    energy_json, flow_json, jacobian_json, spectral_json, Check, Json, Report,
};
use crate::io::snapshot::{load_snapshot, save_snapshot};
use crate::lattice::d_star;
use crate::spectral::{
    dense_spectrum, lanczos_lowest, morse_index, reducible_kernel, spectrum_bounded_below_check,
};

/// Environment variable that overrides the configured output directory.
pub const OUT_DIR_ENV: &str = "SWMORSE_OUT_DIR";

#[derive(Parser, Debug)]
#[command(
    name = "swmorse",
    version,
    about = "Lattice Seiberg-Witten functional on the flat 4-torus"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone, Default)]
pub struct Common {
    /// TOML run configuration.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Sites per axis.
    #[arg(long)]
    pub n: Option<usize>,
    /// Lattice spacing.
    #[arg(long)]
    pub h: Option<f64>,
    /// Six even flux integers, planes 01,02,03,12,13,23.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub flux: Option<Vec<i64>>,
    /// Constant scalar-curvature value k_g.
    #[arg(long, allow_hyphen_values = true)]
    pub kg: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Snapshot directory holding the input configuration.
    #[arg(long)]
    pub snapshot: Option<PathBuf>,
    /// Output directory; beats the environment override and the config.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Zero threshold for eigenvalue counts.
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum OperatorArg {
    Spinor,
    Gauge,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Energy breakdown of a configuration.
    Eval {
        #[command(flatten)]
        common: Common,
    },
    /// Central finite differences of the energy against the gradient.
    GradCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        fd_step: Option<f64>,
        #[arg(long, default_value_t = 1e-6)]
        tol: f64,
    },
    /// Hessian symmetry and agreement with the derivative of the gradient.
    HessianCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100)]
        pairs: usize,
        #[arg(long, default_value_t = 1e-11)]
        sym_tol: f64,
        #[arg(long, default_value_t = 1e-5)]
        fd_tol: f64,
    },
    /// Lowest eigenvalues of L_A or of the gauge block at a reducible point.
    Spectrum {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        operator: Option<OperatorArg>,
        #[arg(long)]
        count: Option<usize>,
    },
    /// Morse index and kernel accounting of a reducible point.
    Index {
        #[command(flatten)]
        common: Common,
        /// Fail unless the index equals this value.
        #[arg(long)]
        expect: Option<usize>,
    },
    /// Hodge splitting, b1 and Jacobian-torus coordinates.
    Hodge {
        #[command(flatten)]
        common: Common,
    },
    /// Gradient descent followed by classification of the end point.
    Flow {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_iters: Option<usize>,
        #[arg(long)]
        step: Option<f64>,
        #[arg(long)]
        grad_tol: Option<f64>,
        #[arg(long)]
        regauge_every: Option<usize>,
    },
    /// Refinement study of the Weitzenböck identity.
    IdentityCheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
        #[arg(long)]
        length: Option<f64>,
        #[arg(long)]
        min_ratio: Option<f64>,
    },
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Eval { common }
            | Command::GradCheck { common, .. }
            | Command::HessianCheck { common, .. }
            | Command::Spectrum { common, .. }
            | Command::Index { common, .. }
            | Command::Hodge { common }
            | Command::Flow { common, .. }
            | Command::IdentityCheck { common, .. } => common,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Eval { .. } => "eval",
            Command::GradCheck { .. } => "grad-check",
            Command::HessianCheck { .. } => "hessian-check",
            Command::Spectrum { .. } => "spectrum",
            Command::Index { .. } => "index",
            Command::Hodge { .. } => "hodge",
            Command::Flow { .. } => "flow",
            Command::IdentityCheck { .. } => "identity-check",
        }
    }
}

/// Errors caused by the invocation rather than by the numerics.
fn is_usage_error(e: &Error) -> bool {
    matches!(
        e,
        Error::Config(_)
            | Error::Manifest(_)
            | Error::SnapshotVersion { .. }
            | Error::Checksum(_)
            | Error::Io(_)
            | Error::Bundle(_)
            | Error::InvalidLattice(_)
            | Error::Shape(_)
            | Error::DimensionCap { .. }
    )
}

/// Parse `args`, run the command and return the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let name = cli.command.name();
    match run(&cli.command) {
        Ok((report, dir)) => match report.write(&dir) {
            Ok(path) => {
                print_summary(&report, &path);
                if report.passed() {
                    0
                } else {
                    1
                }
            }
            Err(e) => {
                eprintln!("swmorse {name}: cannot write report: {e}");
                2
            }
        },
        Err(e) => {
            eprintln!("swmorse {name}: {e}");
            if is_usage_error(&e) {
                2
            } else {
                1
            }
        }
    }
}

fn print_summary(report: &Report, path: &Path) {
    println!("{:<40} {}", "command", report.command);
    if let Json::Obj(pairs) = &report.results {
        for (k, v) in pairs {
            match v {
                Json::Num(x) => println!("{k:<40} {x:.10e}"),
                Json::Int(i) => println!("{k:<40} {i}"),
                Json::Str(s) => println!("{k:<40} {s}"),
                Json::Bool(b) => println!("{k:<40} {b}"),
                _ => {}
            }
        }
    }
    for c in &report.checks {
        let mark = if c.passed { "PASS" } else { "FAIL" };
        println!(
            "{mark} {:<35} value {:.3e} limit {:.3e}",
            c.name, c.value, c.limit
        );
    }
    println!("{:<40} {}", "report", path.display());
}

fn resolve_config(common: &Common) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(n) = common.n {
        cfg.lattice.n = n;
    }
    if let Some(h) = common.h {
        cfg.lattice.h = h;
    }
    if let Some(flux) = &common.flux {
        cfg.bundle.flux = flux
            .clone()
            .try_into()
            .map_err(|_| Error::Config(format!("--flux needs 6 integers, got {}", flux.len())))?;
    }
    if let Some(kg) = common.kg {
        cfg.bundle.kg = KgSpec::Constant(kg);
    }
    if let Some(seed) = common.seed {
        cfg.run.seed = seed;
    }
    if let Some(s) = &common.snapshot {
        cfg.run.snapshot = Some(s.clone());
    }
    if let Some(t) = common.tau {
        cfg.run.tau = Some(t);
    }
    Ok(cfg)
}

fn output_dir(common: &Common, cfg: &RunConfig) -> PathBuf {
    if let Some(out) = &common.out {
        return out.clone();
    }
    if let Some(env) = std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(env);
    }
    cfg.run
        .output_dir
        .clone()
        .unwrap_or_else(|| PathBuf::from("swmorse-out"))
}

/// The snapshot when one is given, otherwise `(a = 0, φ = 0)` on the configured bundle.
fn base_configuration(cfg: &RunConfig) -> Result<Configuration> {
    match &cfg.run.snapshot {
        Some(dir) => load_snapshot(dir),
        None => Ok(Configuration::reducible_zero(cfg.bundle()?)),
    }
}

fn inputs_json(cfg: &RunConfig, c: Option<&Configuration>) -> Json {
    let (n, h, flux, kg_min, kg_max) = match c {
        Some(c) => {
            let kg = c.bundle.kg().values();
            (
                c.lattice().n(),
                c.lattice().spacing(),
                c.bundle.flux(),
                kg.iter().copied().fold(f64::INFINITY, f64::min),
                kg.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            )
        }
        None => (
            cfg.lattice.n,
            cfg.lattice.h,
            cfg.bundle.flux,
            f64::NAN,
            f64::NAN,
        ),
    };
    Json::obj([
        ("n", Json::Int(n as i64)),
        ("h", Json::Num(h)),
        (
            "flux",
            Json::Arr(flux.iter().map(|m| Json::Int(*m)).collect()),
        ),
        ("kg_min", Json::Num(kg_min)),
        ("kg_max", Json::Num(kg_max)),
        ("seed", Json::Int(cfg.run.seed as i64)),
        ("from_snapshot", Json::Bool(cfg.run.snapshot.is_some())),
    ])
}

fn with_extra(base: Json, extra: Vec<(&str, Json)>) -> Json {
    match base {
        Json::Obj(mut pairs) => {
            pairs.extend(extra.into_iter().map(|(k, v)| (k.to_string(), v)));
            Json::Obj(pairs)
        }
        other => other,
    }
}

pub fn run(command: &Command) -> Result<(Report, PathBuf)> {
    let common = command.common();
    let mut cfg = resolve_config(common)?;
    let out = output_dir(common, &cfg);
    let name = command.name();
    let report = match command {
        Command::Eval { .. } => cmd_eval(&cfg)?,
        Command::GradCheck {
            samples,
            fd_step,
            tol,
            ..
        } => {
            if let Some(s) = samples {
                cfg.run.samples = *s;
            }
            if let Some(s) = fd_step {
                cfg.run.fd_step = *s;
            }
            cmd_grad_check(&cfg, *tol)?
        }
        Command::HessianCheck {
            pairs,
            sym_tol,
            fd_tol,
            ..
        } => cmd_hessian_check(&cfg, *pairs, *sym_tol, *fd_tol)?,
        Command::Spectrum {
            operator, count, ..
        } => {
            if let Some(op) = operator {
                cfg.run.operator = match op {
                    OperatorArg::Spinor => OperatorChoice::Spinor,
                    OperatorArg::Gauge => OperatorChoice::Gauge,
                };
            }
            if let Some(k) = count {
                cfg.run.eigen_count = *k;
            }
            cmd_spectrum(&cfg)?
        }
        Command::Index { expect, .. } => cmd_index(&cfg, *expect)?,
        Command::Hodge { .. } => cmd_hodge(&cfg)?,
        Command::Flow {
            max_iters,
            step,
            grad_tol,
            regauge_every,
            ..
        } => {
            if let Some(v) = max_iters {
                cfg.flow.max_iters = *v;
            }
            if let Some(v) = step {
                cfg.flow.step = *v;
            }
            if let Some(v) = grad_tol {
                cfg.flow.grad_tol = *v;
            }
            if let Some(v) = regauge_every {
                cfg.flow.regauge_every = *v;
            }
            cmd_flow(&cfg, &out)?
        }
        Command::IdentityCheck {
            sizes,
            length,
            min_ratio,
            ..
        } => {
            if let Some(s) = sizes {
                cfg.identity.sizes = s.clone();
            }
            if let Some(l) = length {
                cfg.identity.length = *l;
            }
            if let Some(r) = min_ratio {
                cfg.identity.min_ratio = *r;
            }
            cmd_identity(&cfg)?
        }
    };
    debug_assert_eq!(report.command, name);
    Ok((report, out))
}

fn cmd_eval(cfg: &RunConfig) -> Result<Report> {
    let c = base_configuration(cfg)?;
    let e = sw_eval(&c);
    let results = with_extra(
        energy_json(&e),
        vec![
            (
                "monopole_residual_norm_sqr",
                Json::Num(monopole_residual_norm_sqr(&c)),
            ),
            ("weitzenbock_rhs", Json::Num(weitzenbock_rhs(&c))),
            ("grad_norm", Json::Num(sw_gradient(&c).norm())),
            ("phi_norm", Json::Num(c.phi.norm())),
        ],
    );
    let checks = vec![Check::at_most(
        "energy_is_finite",
        if e.total.is_finite() { 0.0 } else { 1.0 },
        0.0,
    )];
    Ok(Report::new(
        "eval",
        inputs_json(cfg, Some(&c)),
        results,
        checks,
    ))
}

fn cmd_grad_check(cfg: &RunConfig, tol: f64) -> Result<Report> {
    let bundle = cfg.bundle()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let mut errors = Vec::with_capacity(cfg.run.samples);
    for _ in 0..cfg.run.samples {
        let c = Configuration::random(bundle.clone(), cfg.run.amp_a, cfg.run.amp_phi, &mut rng);
        errors.push(gradient_fd_check(&c, cfg.run.fd_step, 4, &mut rng));
    }
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let inputs = with_extra(
        inputs_json(cfg, None),
        vec![
            ("samples", Json::Int(cfg.run.samples as i64)),
            ("fd_step", Json::Num(cfg.run.fd_step)),
        ],
    );
    let results = Json::obj([
        ("max_relative_error", Json::Num(worst)),
        ("relative_errors", Json::nums(&errors)),
    ]);
    Ok(Report::new(
        "grad-check",
        inputs,
        results,
        vec![Check::at_most("fd_gradient_relative_error", worst, tol)],
    ))
}

fn cmd_hessian_check(cfg: &RunConfig, pairs: usize, sym_tol: f64, fd_tol: f64) -> Result<Report> {
    let bundle = cfg.bundle()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
    let c = Configuration::random(bundle, cfg.run.amp_a, cfg.run.amp_phi, &mut rng);
    let op = HessianOperator::new(&c);
    let sym = hessian_symmetry_check(&op, pairs, &mut rng)?;
    let mut fd_worst: f64 = 0.0;
    for _ in 0..cfg.run.samples {
        let t = TangentVector::random(c.lattice(), 1.0, &mut rng);
        fd_worst = fd_worst.max(hessian_fd_check(&c, &t, cfg.run.fd_step)?);
    }
    let inputs = with_extra(
        inputs_json(cfg, Some(&c)),
        vec![
            ("pairs", Json::Int(pairs as i64)),
            ("fd_samples", Json::Int(cfg.run.samples as i64)),
        ],
    );
    let results = Json::obj([
        ("symmetry_defect", Json::Num(sym)),
        ("fd_relative_error", Json::Num(fd_worst)),
    ]);
    let checks = vec![
        Check::at_most("symmetry_defect", sym, sym_tol),
        Check::at_most("fd_of_gradient", fd_worst, fd_tol),
    ];
    Ok(Report::new("hessian-check", inputs, results, checks))
}

fn cmd_spectrum(cfg: &RunConfig) -> Result<Report> {
    let c = base_configuration(cfg)?;
    let blocks = reducible_blocks(&HessianOperator::new(&c))?;
    let (label, dim) = match cfg.run.operator {
        OperatorChoice::Spinor => ("spinor", blocks.spinor_dim()),
        OperatorChoice::Gauge => ("gauge", blocks.gauge_dim()),
    };
    let apply = |x: &[f64]| match cfg.run.operator {
        OperatorChoice::Spinor => blocks.spinor_block_real(x),
        OperatorChoice::Gauge => blocks.gauge_block_real(x),
    };
    let k = cfg.run.eigen_count.clamp(1, dim);
    let mut report = if dim <= DENSE_CAP {
        dense_spectrum(apply, dim, cfg.run.tau)?
    } else {
        lanczos_lowest(apply, dim, k, 1e-10, cfg.run.tau)?
    };
    report.eigenvalues.truncate(k);
    report.residuals.truncate(k);
    let worst_residual = report
        .residuals
        .iter()
        .zip(&report.eigenvalues)
        .map(|(r, l)| r / l.abs().max(1.0))
        .fold(0.0, f64::max);
    let inputs = with_extra(
        inputs_json(cfg, Some(&c)),
        vec![
            ("operator", Json::str(label)),
            ("count", Json::Int(k as i64)),
        ],
    );
    let results = with_extra(
        Json::obj([("lowest", Json::Num(report.eigenvalues[0]))]),
        vec![("spectrum", spectral_json(&report))],
    );
    Ok(Report::new(
        "spectrum",
        inputs,
        results,
        vec![Check::at_most("eigenpair_residual", worst_residual, 1e-8)],
    ))
}

fn cmd_index(cfg: &RunConfig, expect: Option<usize>) -> Result<Report> {
    let c = base_configuration(cfg)?;
    let report = morse_index(&c, cfg.run.tau)?;
    let kernel = reducible_kernel(&c, cfg.run.tau)?;
    let bound = spectrum_bounded_below_check(&c, cfg.run.eigen_count)?;
    let results = Json::obj([
        ("morse_index", Json::Int(report.morse_index as i64)),
        ("spinor_kernel_dim", Json::Int(kernel.spinor as i64)),
        ("gauge_slice_kernel_dim", Json::Int(kernel.gauge as i64)),
        ("total_kernel_dim", Json::Int(kernel.total() as i64)),
        ("lower_bound", Json::Num(bound)),
        ("zero_threshold", Json::Num(report.zero_threshold)),
        ("spectrum", spectral_json(&report)),
    ]);
    let mut checks = vec![Check::at_least(
        "lowest_above_bound",
        report.eigenvalues[0] - bound,
        -1e-10,
    )];
    if let Some(e) = expect {
        checks.push(Check::equals("morse_index", report.morse_index, e));
    }
    Ok(Report::new(
        "index",
        inputs_json(cfg, Some(&c)),
        results,
        checks,
    ))
}

fn cmd_hodge(cfg: &RunConfig) -> Result<Report> {
    let c = match &cfg.run.snapshot {
        Some(_) => base_configuration(cfg)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
            let mut c = Configuration::random(cfg.bundle()?, cfg.run.amp_a, 0.0, &mut rng);
            c.phi = SpinorField::zeros(c.lattice(), Chirality::Plus);
            c
        }
    };
    let lat = c.lattice();
    let split = hodge_split(&c.a)?;
    let reassembly = split.reassemble().sub(&c.a)?.norm() / c.a.norm().max(1e-300);
    let ortho = split.orthogonality_defect();
    let coclosed = d_star(&split.coexact)?.max_abs();
    let mut results = vec![
        ("orthogonality_defect", Json::Num(ortho)),
        ("reassembly_error", Json::Num(reassembly)),
        ("coexact_divergence", Json::Num(coclosed)),
        ("exact_norm", Json::Num(split.exact.norm())),
        ("coexact_norm", Json::Num(split.coexact.norm())),
        ("harmonic_norm", Json::Num(split.harmonic.norm())),
    ];
    let mut checks = vec![
        Check::at_most("orthogonality", ortho, 1e-10),
        Check::at_most("reassembly", reassembly, 1e-10),
    ];
    if lat.num_edges() <= DENSE_CAP {
        let b1 = betti_1(lat)?;
        results.push(("betti_1", Json::Int(b1 as i64)));
        checks.push(Check::equals("betti_1", b1, 4));
    }
    let mut reduced = c.clone();
    if c.phi.norm() <= REDUCIBLE_TOL {
        reduced.phi = SpinorField::zeros(lat, Chirality::Plus);
        results.push(("projected_phi_norm", Json::Num(c.phi.norm())));
    }
    match jacobian_coordinates(&reduced) {
        Ok(p) => results.push(("jacobian_coordinates", jacobian_json(&p))),
        Err(e) => results.push(("jacobian_coordinates_unavailable", Json::str(e.to_string()))),
    }
    Ok(Report::new(
        "hodge",
        inputs_json(cfg, Some(&c)),
        Json::obj(results),
        checks,
    ))
}

fn cmd_flow(cfg: &RunConfig, out: &Path) -> Result<Report> {
    let start = match &cfg.run.snapshot {
        Some(dir) => load_snapshot(dir)?,
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.run.seed);
            Configuration::random(cfg.bundle()?, cfg.run.amp_a, cfg.run.amp_phi, &mut rng)
        }
    };
    let params = cfg.flow_params();
    let trace = descend(&start, &params)?;
    let class = match trace.status {
        FlowStatus::Converged => classify_critical_point(&trace.terminal, cfg.run.tau)?,
        _ => CriticalPointClass::NotCritical,
    };
    save_snapshot(&trace.terminal, &out.join("flow-terminal"))?;
    let monotone = trace
        .records
        .windows(2)
        .filter(|w| w[1].energy > w[0].energy)
        .count();
    let last = trace.last();
    let mut results = vec![
        ("status", Json::str(trace.status.name())),
        ("classification", Json::str(class.name())),
        ("terminal_energy", Json::Num(last.energy)),
        ("terminal_grad_norm", Json::Num(last.grad_norm)),
        ("terminal_phi_norm", Json::Num(last.phi_norm)),
    ];
    match class {
        CriticalPointClass::ReducibleIndexed(k) => {
            results.push(("morse_index", Json::Int(k as i64)))
        }
        CriticalPointClass::ReducibleDegenerate { kernel_dim } => {
            results.push(("kernel_dim", Json::Int(kernel_dim as i64)))
        }
        _ => {}
    }
    results.push(("trace", flow_json(&trace)));
    let inputs = with_extra(
        inputs_json(cfg, Some(&start)),
        vec![
            ("step", Json::Num(params.step)),
            ("max_iters", Json::Int(params.max_iters as i64)),
            ("grad_tol", Json::Num(params.grad_tol)),
            ("regauge_every", Json::Int(params.regauge_every as i64)),
        ],
    );
    let checks = vec![
        Check::equals("energy_increases", monotone, 0),
        Check::at_most(
            "not_diverged",
            if trace.status == FlowStatus::Diverged {
                1.0
            } else {
                0.0
            },
            0.0,
        ),
    ];
    Ok(Report::new("flow", inputs, Json::obj(results), checks))
}

fn cmd_identity(cfg: &RunConfig) -> Result<Report> {
    let rows = weitzenbock_study(&cfg.identity.sizes, cfg.identity.length)?;
    let ratios = refinement_ratios(&rows);
    let table = Json::Arr(
        rows.iter()
            .map(|r| {
                Json::obj([
                    ("n", Json::Int(r.n as i64)),
                    ("h", Json::Num(r.h)),
                    ("energy", Json::Num(r.energy)),
                    ("rhs", Json::Num(r.rhs)),
                    ("defect", Json::Num(r.defect)),
                ])
            })
            .collect(),
    );
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let inputs = Json::obj([
        (
            "sizes",
            Json::Arr(
                cfg.identity
                    .sizes
                    .iter()
                    .map(|n| Json::Int(*n as i64))
                    .collect(),
            ),
        ),
        ("length", Json::Num(cfg.identity.length)),
        ("min_ratio", Json::Num(cfg.identity.min_ratio)),
    ]);
    let results = Json::obj([
        ("worst_ratio", Json::Num(worst)),
        ("ratios", Json::nums(&ratios)),
        ("rows", table),
    ]);
    let checks = ratios
        .iter()
        .enumerate()
        .map(|(i, r)| Check::at_least(&format!("refinement_ratio_{i}"), *r, cfg.identity.min_ratio))
        .collect();
    Ok(Report::new("identity-check", inputs, results, checks))
}
