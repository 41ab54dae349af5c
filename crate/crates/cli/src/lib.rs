//! Command-line frontend: parses a [`RunSpec`], runs the mapped certification
//! and writes a JSON or CSV report.
//!
//! Exit codes: 0 all certified, 1 a refutation was found, 2 inconclusive,
//! 3 input error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use nalgebra::DMatrix;

use noncurv_core::algebra::{build_g2, build_so, build_sp, build_spin7_prime, build_su, MatrixLieAlgebra};
use noncurv_core::certify::{
    fatness_margin, first_refuted, hom_constant, infinitesimal_check, min_curvature, theorem_ex_sweep,
    wallach_positivity, wedge_constant, Certificate, CertificateKind, OptimizerConfig, Status,
};
use noncurv_core::curvature::{k_direct, seeded_invariant_map, Deformation};
use noncurv_core::homogeneous::{catalog_keys, chain_by_key, Chain, Part, CHAIN_TOL};
use noncurv_core::report::{emit_report, Format};
use noncurv_core::series::series_general;
use noncurv_core::{Error, Result};

pub const EXIT_CERTIFIED: i32 = 0;
pub const EXIT_REFUTED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

/// Tolerance of `verify-series`.
const SERIES_TOL: f64 = 1e-8;
const DEFAULT_SCAN: [f64; 8] = [-1.0, -0.5, 0.0, 0.1, 0.25, 0.3, 0.35, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyAlgebra,
    VerifySeries,
    Certify,
    Scan,
    Constants,
    Fatness,
    Wallach,
    Infinitesimal,
    SweepEx,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiSpec {
    /// `Ψ = P_m`; `identity-m` is accepted as an alias.
    ProjM,
    /// Random invariant map on `m` of spectral norm 1, seeded by the run seed.
    RandomM,
    /// Text file: dimension on the first line, then the symmetric matrix.
    File(PathBuf),
}

impl PsiSpec {
    pub fn label(&self) -> String {
        match self {
            PsiSpec::ProjM => "proj-m".into(),
            PsiSpec::RandomM => "random-m".into(),
            PsiSpec::File(p) => format!("file:{}", p.display()),
        }
    }
}

/// A fully resolved invocation.
#[derive(Debug, Clone, PartialEq)]
pub struct RunSpec {
    pub command: Command,
    pub chain_key: Option<String>,
    pub psi: PsiSpec,
    pub t_values: Vec<f64>,
    pub config: OptimizerConfig,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub dump: bool,
}

#[derive(Debug, Parser)]
#[command(name = "noncurv", version, about = "Curvature certification for homogeneous metrics")]
struct Cli {
    #[command(subcommand)]
    command: Sub,
}

#[derive(Debug, Subcommand)]
enum Sub {
    /// Residuals of the base algebras, or of one chain.
    VerifyAlgebra(CommonArgs),
    /// Curvature series against the curvature oracle on random planes.
    VerifySeries(CommonArgs),
    /// Minimum curvature at each t.
    Certify(CommonArgs),
    /// Minimum curvature over a t grid.
    Scan(CommonArgs),
    /// Bracket and wedge constants.
    Constants(CommonArgs),
    /// Fatness margin.
    Fatness(CommonArgs),
    /// Normalized curvature along P_m for a fat bundle of symmetric pairs.
    Wallach(CommonArgs),
    /// Third derivative at commuting planes.
    Infinitesimal(CommonArgs),
    /// Left-invariant curvature of planes in p for a map on m.
    SweepEx(CommonArgs),
}

#[derive(Debug, Args)]
struct CommonArgs {
    /// Catalog key of the chain.
    #[arg(long)]
    chain: Option<String>,
    /// proj-m, identity-m, random-m or file.
    #[arg(long, default_value = "proj-m")]
    psi: String,
    /// Matrix file for `--psi file`.
    #[arg(long)]
    psi_file: Option<PathBuf>,
    /// Parameter values; repeatable or comma separated.
    #[arg(long = "t", value_delimiter = ',', allow_hyphen_values = true)]
    t: Vec<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    starts: Option<usize>,
    #[arg(long)]
    max_iters: Option<usize>,
    #[arg(long)]
    stop_tol: Option<f64>,
    #[arg(long)]
    penalty_weight: Option<f64>,
    #[arg(long)]
    grad_step: Option<f64>,
    /// json or csv.
    #[arg(long, default_value = "json")]
    format: String,
    /// Report path; stdout when absent.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Print the structure constants (verify-algebra).
    #[arg(long)]
    dump: bool,
}

/// Parses command-line arguments (including the program name) into a spec.
/// `seed_env` is the value of `NONCURV_SEED`, which overrides `--seed`.
pub fn parse_spec<I, T>(args: I, seed_env: Option<&str>) -> std::result::Result<RunSpec, clap::Error>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(args)?;
    let (command, a) = match cli.command {
        Sub::VerifyAlgebra(a) => (Command::VerifyAlgebra, a),
        Sub::VerifySeries(a) => (Command::VerifySeries, a),
        Sub::Certify(a) => (Command::Certify, a),
        Sub::Scan(a) => (Command::Scan, a),
        Sub::Constants(a) => (Command::Constants, a),
        Sub::Fatness(a) => (Command::Fatness, a),
        Sub::Wallach(a) => (Command::Wallach, a),
        Sub::Infinitesimal(a) => (Command::Infinitesimal, a),
        Sub::SweepEx(a) => (Command::SweepEx, a),
    };
    let invalid = |msg: String| clap::Error::raw(clap::error::ErrorKind::InvalidValue, msg + "\n");
    let psi = match a.psi.as_str() {
        "proj-m" | "identity-m" => PsiSpec::ProjM,
        "random-m" => PsiSpec::RandomM,
        "file" => PsiSpec::File(a.psi_file.clone().ok_or_else(|| invalid("--psi file needs --psi-file".into()))?),
        other => return Err(invalid(format!("unknown --psi `{other}`"))),
    };
    if a.psi_file.is_some() && !matches!(psi, PsiSpec::File(_)) {
        return Err(invalid("--psi-file needs --psi file".into()));
    }
    let format: Format = a.format.parse().map_err(|e: Error| invalid(e.to_string()))?;
    let d = OptimizerConfig::default();
    let mut config = OptimizerConfig {
        seed: a.seed.unwrap_or(d.seed),
        starts: a.starts.unwrap_or(d.starts),
        max_iters: a.max_iters.unwrap_or(d.max_iters),
        grad_step: a.grad_step.unwrap_or(d.grad_step),
        stop_tol: a.stop_tol.unwrap_or(d.stop_tol),
        penalty_weight: a.penalty_weight.unwrap_or(d.penalty_weight),
    };
    if let Some(s) = seed_env {
        config.seed = s
            .trim()
            .parse()
            .map_err(|_| invalid(format!("NONCURV_SEED `{s}` is not an unsigned integer")))?;
    }
    if command != Command::VerifyAlgebra && a.chain.is_none() {
        return Err(clap::Error::raw(
            clap::error::ErrorKind::MissingRequiredArgument,
            "--chain is required\n",
        ));
    }
    Ok(RunSpec {
        command,
        chain_key: a.chain,
        psi,
        t_values: a.t,
        config,
        output: a.output,
        format,
        dump: a.dump,
    })
}

/// Reads a symmetric matrix: the dimension on the first line, then that many rows.
pub fn parse_psi_text(text: &str) -> Result<DMatrix<f64>> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let n: usize = lines
        .next()
        .ok_or_else(|| Error::Parse("empty psi file".into()))?
        .parse()
        .map_err(|_| Error::Parse("first line must be the dimension".into()))?;
    let mut m = DMatrix::zeros(n, n);
    for r in 0..n {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("expected {n} rows, got {r}")))?;
        let vals: Vec<f64> = line
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<f64>().map_err(|_| Error::Parse(format!("bad number `{s}` in row {}", r + 1))))
            .collect::<Result<_>>()?;
        if vals.len() != n {
            return Err(Error::Parse(format!("row {} has {} entries, expected {n}", r + 1, vals.len())));
        }
        for (c, v) in vals.into_iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::Parse(format!("non-finite entry in row {}", r + 1)));
            }
            m[(r, c)] = v;
        }
    }
    if lines.next().is_some() {
        return Err(Error::Parse(format!("more than {n} rows")));
    }
    let asym = (&m - m.transpose()).abs().max();
    if asym > 1e-12 * m.abs().max().max(1.0) {
        return Err(Error::Parse(format!("matrix is not symmetric (residual {asym:e})")));
    }
    Ok(m)
}

fn read_psi_file(path: &Path) -> Result<DMatrix<f64>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_psi_text(&text)
}

fn deformation(spec: &RunSpec, chain: &Chain) -> Result<Deformation> {
    match &spec.psi {
        PsiSpec::ProjM => Ok(Deformation::proj_m(chain)),
        PsiSpec::RandomM => {
            let s = seeded_invariant_map(chain, Part::M, spec.config.seed);
            Deformation::from_m_map(chain, &s, "random-m")
        }
        PsiSpec::File(p) => Deformation::from_p_matrix(chain, &read_psi_file(p)?, spec.psi.label()),
    }
}

/// The map on `m` (in the `m`-basis) for `sweep-ex`.
fn m_map(spec: &RunSpec, chain: &Chain) -> Result<DMatrix<f64>> {
    let dm = chain.part_dim(Part::M);
    match &spec.psi {
        PsiSpec::ProjM => Ok(DMatrix::identity(dm, dm)),
        PsiSpec::RandomM => Ok(seeded_invariant_map(chain, Part::M, spec.config.seed)),
        PsiSpec::File(p) => {
            let s = read_psi_file(p)?;
            if s.nrows() == dm {
                return Ok(s);
            }
            let def = Deformation::from_p_matrix(chain, &s, spec.psi.label())?;
            let m = chain.basis(Part::M);
            let sm = m.transpose() * def.psi() * &m;
            let off = (def.psi() - &m * &sm * m.transpose()).abs().max();
            if off > CHAIN_TOL {
                return Err(Error::InvalidDeformation(format!(
                    "psi must vanish on h and s (off-m residual {off:e})"
                )));
            }
            Ok(sm)
        }
    }
}

fn t_grid(spec: &RunSpec, default: &[f64]) -> Vec<f64> {
    if spec.t_values.is_empty() {
        default.to_vec()
    } else {
        spec.t_values.clone()
    }
}

fn algebra_certificate(name: &str, alg: &MatrixLieAlgebra, config: &OptimizerConfig) -> Certificate {
    let r = alg.residuals();
    let mut c = Certificate::empty(CertificateKind::AlgebraCheck, name, "none", None, config);
    c.value = r.max();
    c.status = if r.max() < CHAIN_TOL && alg.gram_is_positive_definite() {
        Status::Certified
    } else {
        Status::Refuted
    };
    c.details.insert("dim".into(), alg.dim() as f64);
    c.details.insert("closure".into(), r.closure);
    c.details.insert("jacobi".into(), r.jacobi);
    c.details.insert("ad_invariance".into(), r.ad_invariance);
    c.details.insert("orthonormality".into(), r.orthonormality);
    c
}

fn verify_algebra(spec: &RunSpec) -> Result<Vec<Certificate>> {
    let cfg = &spec.config;
    let Some(key) = &spec.chain_key else {
        let mut algs = Vec::new();
        for n in 2..=10 {
            algs.push(build_so(n)?);
        }
        for n in 2..=5 {
            algs.push(build_su(n)?);
        }
        algs.push(build_sp(2)?);
        algs.push(build_g2()?);
        algs.push(build_spin7_prime()?);
        if spec.dump {
            for a in &algs {
                eprint!("{}", a.dump_text());
            }
        }
        return Ok(algs.iter().map(|a| algebra_certificate(a.name(), a, cfg)).collect());
    };
    let nc = chain_by_key(key)?;
    let chain = &nc.chain;
    if spec.dump {
        eprint!("{}", chain.algebra().dump_text());
    }
    let mut c = algebra_certificate(key, chain.algebra(), cfg);
    let r = chain.residuals();
    for (k, v) in [
        ("chain_projectors", r.projectors),
        ("chain_h_closed", r.h_closed),
        ("chain_k_closed", r.k_closed),
        ("chain_h_preserves_m", r.h_preserves_m),
        ("chain_h_preserves_s", r.h_preserves_s),
        ("chain_k_preserves_s", r.k_preserves_s),
    ] {
        c.details.insert(k.into(), v);
        c.value = c.value.max(v);
    }
    for part in [Part::H, Part::M, Part::S] {
        c.details.insert(format!("dim_{part}"), chain.part_dim(part) as f64);
    }
    c.details.insert("symmetric_pair_residual".into(), chain.symmetric_pair_residual());
    if c.value >= CHAIN_TOL {
        c.status = Status::Refuted;
    }
    Ok(vec![c])
}

fn verify_series(spec: &RunSpec, chain: &Chain, def: &Deformation) -> Result<Vec<Certificate>> {
    let (lo, hi) = def.domain();
    let grid = t_grid(spec, &[lo.max(-2.0) * 0.9, -0.5, 0.0, 0.1, 0.2, hi.min(2.0) * 0.9]);
    let dp = chain.part_dim(Part::P);
    let samples: Vec<_> = (0..spec.config.starts)
        .map(|s| {
            let v = noncurv_core::certify::random_start(&[dp, dp], spec.config.seed, s);
            let (x, y) = (chain.from_p(&v[0]), chain.from_p(&v[1]));
            series_general(chain, def, &x, &y).map(|ser| (x, y, ser))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::new();
    for &t in &grid {
        def.check_domain(t)?;
        let mut worst = 0.0f64;
        let mut worst_pair = None;
        for (x, y, ser) in &samples {
            let k = k_direct(chain, def, t, x, y)?;
            let rel = (ser.eval(t) - k).abs() / k.abs().max(1.0);
            if worst_pair.is_none() || rel > worst {
                worst = rel;
                worst_pair = Some((x.clone(), y.clone()));
            }
        }
        let mut c = Certificate::empty(CertificateKind::SeriesCheck, chain.name(), def.label(), Some(t), &spec.config);
        c.value = worst;
        c.witness = worst_pair;
        c.status = if worst <= SERIES_TOL {
            Status::Certified
        } else {
            Status::Refuted
        };
        out.push(c);
    }
    Ok(out)
}

/// Runs the requested command and returns its certificates.
pub fn execute(spec: &RunSpec) -> Result<Vec<Certificate>> {
    spec.config.validate()?;
    if spec.command == Command::VerifyAlgebra {
        return verify_algebra(spec);
    }
    let key = spec
        .chain_key
        .as_deref()
        .ok_or_else(|| Error::Precondition("--chain is required".into()))?;
    let chain = chain_by_key(key)?.chain;
    let cfg = &spec.config;
    Ok(match spec.command {
        Command::VerifyAlgebra => unreachable!(),
        Command::VerifySeries => verify_series(spec, &chain, &deformation(spec, &chain)?)?,
        Command::Certify => {
            let def = deformation(spec, &chain)?;
            t_grid(spec, &[0.0])
                .iter()
                .map(|&t| min_curvature(&chain, &def, t, cfg))
                .collect::<Result<_>>()?
        }
        Command::Scan => {
            let def = deformation(spec, &chain)?;
            let grid = t_grid(spec, &DEFAULT_SCAN);
            let certs = grid
                .iter()
                .map(|&t| min_curvature(&chain, &def, t, cfg))
                .collect::<Result<Vec<_>>>()?;
            match first_refuted(&certs) {
                Some(t) => eprintln!("first refuted t = {t}"),
                None => eprintln!("no refuted t on the grid"),
            }
            certs
        }
        Command::Constants => vec![hom_constant(&chain, cfg), wedge_constant(&chain, cfg)],
        Command::Fatness => vec![fatness_margin(&chain, cfg)],
        Command::Wallach => t_grid(spec, &[0.2])
            .iter()
            .map(|&t| wallach_positivity(&chain, t, cfg))
            .collect::<Result<_>>()?,
        Command::Infinitesimal => vec![infinitesimal_check(&chain, &deformation(spec, &chain)?, cfg)?],
        Command::SweepEx => {
            let s = m_map(spec, &chain)?;
            t_grid(spec, &[0.02, 0.05])
                .iter()
                .map(|&t| theorem_ex_sweep(&chain, &s, t, cfg))
                .collect::<Result<_>>()?
        }
    })
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Certified => EXIT_CERTIFIED,
        Status::Refuted => EXIT_REFUTED,
        Status::Inconclusive => EXIT_INCONCLUSIVE,
    }
}

fn summary(c: &Certificate) -> String {
    let t = c.t.map(|t| format!(" t={t}")).unwrap_or_default();
    format!(
        "{} {}{t}: {} value={:e} (seed={} starts={} max_iters={} stop_tol={:e})",
        c.kind.as_str(),
        c.chain,
        c.status.as_str(),
        c.value,
        c.config.seed,
        c.config.starts,
        c.config.max_iters,
        c.config.stop_tol
    )
}

/// Executes a run, writes the report and returns the exit code.
pub fn run(spec: &RunSpec) -> i32 {
    let certs = match execute(spec) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INPUT;
        }
    };
    for c in &certs {
        eprintln!("{}", summary(c));
    }
    let chain = spec.chain_key.as_deref().unwrap_or("base-algebras");
    if let Err(e) = emit_report(chain, &spec.psi.label(), &certs, spec.format, spec.output.as_deref()) {
        eprintln!("error: {e}");
        return EXIT_INPUT;
    }
    exit_code(Status::combine(certs.iter().map(|c| c.status)))
}

/// Entry point shared by the binary and the tests.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let seed_env = std::env::var("NONCURV_SEED").ok();
    match parse_spec(args, seed_env.as_deref()) {
        Ok(spec) => run(&spec),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_CERTIFIED };
            let _ = e.print();
            if code == EXIT_INPUT {
                eprintln!("known chains: {}", catalog_keys().join(", "));
            }
            code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(args: &[&str]) -> std::result::Result<RunSpec, clap::Error> {
        parse_spec(std::iter::once("noncurv").chain(args.iter().copied()), None)
    }

    #[test]
    fn t_values_accept_lists_and_repeats() {
        let s = spec(&["scan", "--chain", "x", "--t", "-1,0.5", "--t", "0.25"]).unwrap();
        assert_eq!(s.t_values, vec![-1.0, 0.5, 0.25]);
        assert_eq!(s.command, Command::Scan);
        assert_eq!(s.config, OptimizerConfig::default());
    }

    #[test]
    fn identity_m_is_proj_m() {
        assert_eq!(spec(&["certify", "--chain", "x", "--psi", "identity-m"]).unwrap().psi, PsiSpec::ProjM);
        assert!(spec(&["certify", "--chain", "x", "--psi", "nope"]).is_err());
        assert!(spec(&["certify", "--chain", "x", "--psi", "file"]).is_err());
    }

    #[test]
    fn seed_override() {
        let args = ["noncurv", "certify", "--chain", "x", "--seed", "5"];
        assert_eq!(parse_spec(args, None).unwrap().config.seed, 5);
        assert_eq!(parse_spec(args, Some("9")).unwrap().config.seed, 9);
        assert!(parse_spec(args, Some("nine")).is_err());
    }

    #[test]
    fn chain_required_except_for_algebra() {
        assert!(spec(&["certify"]).is_err());
        assert!(spec(&["verify-algebra"]).unwrap().chain_key.is_none());
    }

    #[test]
    fn budget_flags() {
        let s = spec(&[
            "certify", "--chain", "x", "--starts", "3", "--max-iters", "7", "--stop-tol", "1e-6", "--penalty-weight",
            "2", "--grad-step", "0.5", "--format", "csv",
        ])
        .unwrap();
        assert_eq!((s.config.starts, s.config.max_iters), (3, 7));
        assert_eq!((s.config.stop_tol, s.config.penalty_weight, s.config.grad_step), (1e-6, 2.0, 0.5));
        assert_eq!(s.format, Format::Csv);
        assert!(spec(&["certify", "--chain", "x", "--format", "xml"]).is_err());
    }

    #[test]
    fn psi_text_parsing() {
        let m = parse_psi_text("2\n1 0.5\n0.5 -1\n").unwrap();
        assert_eq!(m[(0, 1)], 0.5);
        assert_eq!(m[(1, 1)], -1.0);
        assert!(parse_psi_text("# comment\n1\n\n3\n").is_ok());
        assert!(parse_psi_text("").is_err());
        assert!(parse_psi_text("2\n1 0\n").is_err());
        assert!(parse_psi_text("2\n1 1\n0 1\n").is_err());
        assert!(parse_psi_text("1\nx\n").is_err());
        assert!(parse_psi_text("1\n1\n2\n").is_err());
    }

    #[test]
    fn statuses_map_to_exit_codes() {
        assert_eq!(exit_code(Status::Certified), 0);
        assert_eq!(exit_code(Status::Refuted), 1);
        assert_eq!(exit_code(Status::Inconclusive), 2);
    }
}
