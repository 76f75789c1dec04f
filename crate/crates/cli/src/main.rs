//! `mcd`: maximum-confidence discrimination from the command line.
//!
//! Exit codes: 0 success, 1 sequence deviation above tolerance, 2 parse or
//! usage error, 3 validation error, 4 solver stall, 5 direct-mode dimension cap,
//! 6 certificate not certified or rejected.

use std::fmt::Write as _;
use std::io::IsTerminal;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use mcd_core::confidence::MEASUREMENT_TOL;
use mcd_core::io::{self, Certificate, FactorizationDocument, SCHEMA};
use mcd_core::optimizer::{lower_bound, MAX_ITER};
use mcd_core::sequence::{sequence_p_g, DIRECT_DIM_CAP, SEQUENCE_TOL};
use mcd_core::{
    baseline_mcm_measurement, certify, certify_pair, max_confidence, random_ensemble, support_projector,
    tensor, Ens, Error, Mode, SolverOptions, Tolerances,
};

#[derive(Parser)]
#[command(name = "mcd", version, about = "Maximum-confidence state and sequence discrimination")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Largest accepted duality gap.
    #[arg(long, global = true)]
    tol_gap: Option<f64>,
    /// Largest accepted complementary slackness residual.
    #[arg(long, global = true)]
    tol_slack: Option<f64>,
    /// Relative eigenvalue cut for ranks, supports and kernels.
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    /// Newton step cap of each barrier solve.
    #[arg(long, global = true, default_value_t = MAX_ITER)]
    max_iter: usize,
    /// Output file for the command's document.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Subcommand)]
enum Command {
    /// Maximum confidences C_x with projector ranks and witness residuals.
    Confidence {
        ensemble: PathBuf,
        /// Outcome to report (1-based); all outcomes when omitted.
        #[arg(long)]
        x: Option<usize>,
    },
    /// Certified optimal success probability among maximum-confidence measurements.
    Optimize { ensemble: PathBuf },
    /// Per-step and joint success probabilities of a sequence of ensembles.
    Sequence {
        #[arg(required = true)]
        ensembles: Vec<PathBuf>,
        #[arg(long, default_value_t = Mode::Both)]
        mode: Mode,
        #[arg(long, default_value_t = DIRECT_DIM_CAP)]
        dim_cap: usize,
    },
    /// Writes a random valid ensemble.
    Random {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        rank: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Rechecks a stored certificate against an ensemble without re-solving.
    Certify { ensemble: PathBuf, certificate: PathBuf },
}

enum Failure {
    Core(Error),
    Rejected(String),
    Deviation(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Deviation(_) => 1,
            Failure::Rejected(_) => 6,
            Failure::Core(e) => match e {
                Error::Parse { .. } | Error::Io(_) => 2,
                Error::InvalidEnsemble(_)
                | Error::NotHermitian { .. }
                | Error::NotPsd { .. }
                | Error::NotSquare { .. }
                | Error::NonFinite
                | Error::DimMismatch { .. }
                | Error::BadRank { .. }
                | Error::IndexOutOfRange { .. } => 3,
                Error::SolverStall { .. } => 4,
                Error::DimCapExceeded { .. } => 5,
                _ => 1,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Rejected(m) | Failure::Deviation(m) => m.clone(),
        }
    }
}

struct Style {
    color: bool,
}

impl Style {
    fn detect() -> Self {
        Self {
            color: std::env::var_os("MCD_NO_COLOR").is_none() && std::io::stdout().is_terminal(),
        }
    }

    fn verdict(&self, ok: bool) -> String {
        let (word, code) = if ok { ("PASS", "32") } else { ("FAIL", "31") };
        if self.color {
            format!("\x1b[1;{code}m{word}\x1b[0m")
        } else {
            word.to_string()
        }
    }
}

struct Ctx {
    common: Common,
    style: Style,
}

impl Ctx {
    fn tolerances(&self) -> Tolerances {
        let mut t = Tolerances::default();
        if let Some(v) = self.common.tol_gap {
            t.gap = v;
        }
        if let Some(v) = self.common.tol_slack {
            t.slack = v;
        }
        if let Some(v) = self.common.tol_rank {
            t.rank = v;
        }
        t
    }

    fn solver(&self) -> SolverOptions {
        let t = self.tolerances();
        SolverOptions {
            tol: t.gap,
            max_iter: self.common.max_iter,
            rank_tol: t.rank,
            ..SolverOptions::default()
        }
    }

    fn header(&self, command: &str, t: &Tolerances) -> String {
        format!(
            "# mcd {command}  tol-gap={:e} tol-slack={:e} tol-rank={:e} feasibility={:e} membership={:e} max-iter={}\n",
            t.gap, t.slack, t.rank, t.feasibility, t.membership, self.common.max_iter
        )
    }

    /// Prints `text` or `doc` per `--format`, writing `doc` to `--out` if given.
    fn emit(&self, text: String, doc: String) -> Result<(), Failure> {
        if let Some(path) = &self.common.out {
            std::fs::write(path, &doc).map_err(Error::from)?;
        }
        match self.common.format {
            Format::Text => print!("{text}"),
            Format::Json => print!("{doc}"),
        }
        Ok(())
    }
}

fn tolerances_json(t: &Tolerances) -> serde_json::Value {
    serde_json::to_value(t).expect("tolerances serialize")
}

fn to_document(v: serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(&v).expect("report serializes");
    s.push('\n');
    s
}

fn cmd_confidence(ctx: &Ctx, path: &Path, x: Option<usize>) -> Result<(), Failure> {
    let e: Ens = io::load_ensemble(path)?;
    let t = ctx.tolerances();
    let outcomes: Vec<usize> = match x {
        Some(x) if x == 0 || x > e.len() => {
            return Err(Error::IndexOutOfRange { index: x, n: e.len() }.into())
        }
        Some(x) => vec![x - 1],
        None => (0..e.len()).collect(),
    };
    let rho0 = e.average_state();
    let mut summary = Vec::new();
    let mut detail = String::new();
    let mut rows = Vec::new();
    for &i in &outcomes {
        let r = max_confidence(&e, i)?;
        let norm = rho0.inner(&r.witness) - 1.0;
        let conf = e.prior(i) * e.state(i).inner(&r.witness) - r.raw_value;
        summary.push(format!("C_{} = {:.6}", i + 1, r.value));
        let _ = writeln!(
            detail,
            "  x={}: rank Pi = {}, rank Pi_perp = {}, witness residuals Tr(rho0 E*) - 1 = {:.1e}, eta Tr(rho E*) - C = {:.1e}",
            i + 1,
            r.pi_support.rank,
            r.pi_kernel.rank,
            norm,
            conf
        );
        rows.push(json!({
            "outcome": i + 1,
            "value": r.value,
            "raw_value": r.raw_value,
            "support_rank": r.pi_support.rank,
            "kernel_rank": r.pi_kernel.rank,
            "witness_norm_residual": norm,
            "witness_confidence_residual": conf,
        }));
    }
    let text = format!("{}{}\n{detail}", ctx.header("confidence", &t), summary.join(", "));
    let doc = to_document(json!({
        "schema": SCHEMA,
        "kind": "confidence-report",
        "tolerances": tolerances_json(&t),
        "confidences": rows,
    }));
    ctx.emit(text, doc)
}

fn default_certificate_path(input: &Path) -> PathBuf {
    let stem = input.file_stem().and_then(|s| s.to_str()).unwrap_or("ensemble");
    input.with_file_name(format!("{stem}.certificate.json"))
}

fn cmd_optimize(ctx: &Ctx, path: &Path) -> Result<(), Failure> {
    let e: Ens = io::load_ensemble(path)?;
    let t = ctx.tolerances();
    let cert = certify(&e, &ctx.solver(), &t)?;
    let stored = Certificate::from(&cert);
    let doc = io::certificate_to_json(&stored);
    let out = ctx.common.out.clone().unwrap_or_else(|| default_certificate_path(path));
    std::fs::write(&out, &doc).map_err(Error::from)?;

    let mut text = ctx.header("optimize", &t);
    let _ = writeln!(text, "p_G = {:.6}", cert.primal.value);
    let _ = writeln!(text, "q_G = {:.6}", cert.dual.value);
    let _ = writeln!(text, "gap = {:.3e}", cert.gap);
    let slack: Vec<String> = cert
        .slackness
        .iter()
        .enumerate()
        .map(|(k, r)| match k {
            0 => format!("Tr(M_? H) = {r:.1e}"),
            _ => format!("M_{k} = {r:.1e}"),
        })
        .collect();
    let _ = writeln!(text, "slackness: {}", slack.join(", "));
    let _ = writeln!(text, "lambda/n bound = {:.6}", lower_bound(&e));
    match baseline_mcm_measurement(&e) {
        Ok(m) => {
            let _ = writeln!(text, "baseline success = {:.6}", m.success_probability(&e));
        }
        Err(err) => {
            let _ = writeln!(text, "baseline success = n/a ({err})");
        }
    }
    let _ = writeln!(
        text,
        "Newton steps: primal {}, dual {}",
        cert.primal.newton_steps, cert.dual.newton_steps
    );
    let _ = writeln!(
        text,
        "certificate: {} ({})",
        ctx.style.verdict(cert.certified),
        out.display()
    );
    match ctx.common.format {
        Format::Text => print!("{text}"),
        Format::Json => print!("{doc}"),
    }
    if cert.certified {
        Ok(())
    } else {
        Err(Failure::Rejected(format!(
            "not certified: gap {:e}, worst slackness {:e}",
            cert.gap,
            cert.max_slackness()
        )))
    }
}

fn cmd_sequence(ctx: &Ctx, paths: &[PathBuf], mode: Mode, dim_cap: usize) -> Result<(), Failure> {
    let steps = paths
        .iter()
        .map(io::load_ensemble::<f64>)
        .collect::<Result<Vec<_>, _>>()?;
    let seq = tensor(&steps)?;
    let t = ctx.tolerances();
    let report = sequence_p_g(&seq, mode, dim_cap, &ctx.solver(), &t)?;

    let mut text = ctx.header("sequence", &t);
    let _ = writeln!(
        text,
        "mode {mode}, L = {}, joint dim {}, deviation tol {:e}",
        seq.len(),
        seq.joint_dim(),
        SEQUENCE_TOL
    );
    if mode.product() {
        let _ = writeln!(text, "step  dim  n  p_G");
        for (l, (e, v)) in steps.iter().zip(&report.steps).enumerate() {
            let _ = writeln!(text, "{:>4}  {:>3}  {}  {:.6}", l + 1, e.dim(), e.len(), v);
        }
    }
    if let Some(p) = report.product {
        let _ = writeln!(text, "product {p:.6}");
    }
    if let Some(d) = report.direct {
        let _ = writeln!(text, "direct {d:.6}");
    }
    let within = report.within(SEQUENCE_TOL);
    if let Some(dev) = report.deviation() {
        let _ = writeln!(text, "deviation {dev:.3e} {}", ctx.style.verdict(within));
    }
    let _ = writeln!(text, "certified {}", ctx.style.verdict(report.certified));
    let doc = io::factorization_to_json(&FactorizationDocument {
        quantity: "p_g".into(),
        tolerance: SEQUENCE_TOL,
        tolerances: t,
        report: report.clone(),
    });
    ctx.emit(text, doc)?;
    if !within {
        return Err(Failure::Deviation(format!(
            "deviation {:e} exceeds {:e}",
            report.deviation().unwrap_or(f64::NAN),
            SEQUENCE_TOL
        )));
    }
    if !report.certified {
        return Err(Failure::Rejected("a solve was not certified".into()));
    }
    Ok(())
}

fn cmd_random(ctx: &Ctx, dim: usize, n: usize, rank: usize, seed: u64) -> Result<(), Failure> {
    let e: Ens = random_ensemble(dim, n, rank, seed)?;
    e.ensure_valid()?;
    let rho0_rank = support_projector(&e.average_state(), ctx.tolerances().rank)?.rank;
    let doc = io::ensemble_to_json(&e);
    match &ctx.common.out {
        Some(path) => {
            io::save_ensemble(&e, path)?;
            let text = format!(
                "wrote {}: dim {dim}, n {n}, rank {rank}, seed {seed}, rank rho0 = {rho0_rank}{}\n",
                path.display(),
                if rho0_rank == dim { " (full rank)" } else { "" }
            );
            if ctx.common.format == Format::Text {
                print!("{text}");
            } else {
                print!("{doc}");
            }
        }
        None => print!("{doc}"),
    }
    Ok(())
}

fn cmd_certify(ctx: &Ctx, ensemble: &Path, certificate: &Path) -> Result<(), Failure> {
    let e: Ens = io::load_ensemble(ensemble)?;
    let cert: Certificate<f64> = io::load_certificate(certificate)?;
    let mut t = cert.tolerances;
    if let Some(v) = ctx.common.tol_gap {
        t.gap = v;
    }
    if let Some(v) = ctx.common.tol_slack {
        t.slack = v;
    }
    if let Some(v) = ctx.common.tol_rank {
        t.rank = v;
    }
    let report = certify_pair(&e, &cert.measurement, &cert.h, &t)?;

    let mut text = ctx.header("certify", &t);
    let _ = writeln!(
        text,
        "p = {:.6}, q = {:.6}, gap = {:.3e}",
        report.primal_value, report.dual_value, report.gap
    );
    for c in &report.checks {
        let _ = writeln!(
            text,
            "{:<22} {:.3e} <= {:.1e}  {}",
            c.name,
            c.value,
            c.tol,
            ctx.style.verdict(c.passed)
        );
    }
    let failed: Vec<&str> = report.failed().map(|c| c.name).collect();
    let doc = to_document(json!({
        "schema": SCHEMA,
        "kind": "certify-report",
        "tolerances": tolerances_json(&t),
        "measurement_tol": MEASUREMENT_TOL,
        "primal_value": report.primal_value,
        "dual_value": report.dual_value,
        "gap": report.gap,
        "slackness": report.slackness,
        "checks": report.checks.iter().map(|c| json!({
            "name": c.name,
            "value": c.value,
            "tol": c.tol,
            "passed": c.passed,
        })).collect::<Vec<_>>(),
        "passed": failed.is_empty(),
    }));
    ctx.emit(text, doc)?;
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Rejected(format!("certificate rejected: {}", failed.join(", "))))
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let ctx = Ctx {
        common: cli.common,
        style: Style::detect(),
    };
    match &cli.command {
        Command::Confidence { ensemble, x } => cmd_confidence(&ctx, ensemble, *x),
        Command::Optimize { ensemble } => cmd_optimize(&ctx, ensemble),
        Command::Sequence {
            ensembles,
            mode,
            dim_cap,
        } => cmd_sequence(&ctx, ensembles, *mode, *dim_cap),
        Command::Random { dim, n, rank, seed } => cmd_random(&ctx, *dim, *n, *rank, *seed),
        Command::Certify {
            ensemble,
            certificate,
        } => cmd_certify(&ctx, ensemble, certificate),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("mcd: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
