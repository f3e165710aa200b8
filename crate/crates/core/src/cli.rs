//! Command-line front end: subcommands, config files, output files and the run manifest.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::audit::{self, AuditConfig};
use crate::bounds::{self, BoundId};
use crate::boxes;
use crate::bv::{self, PrimeTable};
use crate::energy::{self, Backend};
use crate::error::{bail, Error, Result};
use crate::expsums::{self, RealPolynomial};
use crate::moduli::{self, Alpha, IntPolynomial, ModuliSequence};
use crate::sieve::{self, CoefficientVector, Family, PowerIterationParams};

pub const SCHEMA: &str = "v1";

#[derive(Parser, Debug)]
#[command(name = "sparse-sieve", version, about = "Large sieve, additive energy and prime-progression experiments over sparse moduli")]
#[command(args_override_self = true)]
pub struct Cli {
    /// JSON file of parameters; keys are flag names, command-line flags win.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Directory for output files.
    #[arg(long, global = true, default_value = "out")]
    pub out: PathBuf,
    #[arg(long, global = true, default_value_t = 1)]
    pub seed: u64,
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Work cap for direct evaluations.
    #[arg(long = "budget-ops", global = true)]
    pub budget_ops: Option<u128>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Generate and dump a moduli sequence or a dyadic Piatetski-Shapiro window.
    Moduli(ModuliArgs),
    /// Additive energies of a set or of a sequence prefix.
    Energy(EnergyArgs),
    /// Box congruence counts, Farey spacing and their audits.
    Boxes(BoxesArgs),
    /// Large sieve forms, optimal constants and bound audits.
    Sieve(SieveArgs),
    /// Bound exponents, crossovers, winner maps and the level function.
    Bounds(BoundsArgs),
    /// Exponential sums and cardinality audits.
    Expsums(ExpsumsArgs),
    /// Prime error terms over Piatetski-Shapiro moduli.
    Bv(BvArgs),
    /// Run the acceptance suite.
    AuditAll,
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Moduli(_) => "moduli",
            Command::Energy(_) => "energy",
            Command::Boxes(_) => "boxes",
            Command::Sieve(_) => "sieve",
            Command::Bounds(_) => "bounds",
            Command::Expsums(_) => "expsums",
            Command::Bv(_) => "bv",
            Command::AuditAll => "audit-all",
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyKind {
    Power,
    Polynomial,
    Ps,
    Explicit,
}

#[derive(Args, Debug, Serialize, Clone)]
pub struct FamilyArgs {
    #[arg(long, value_enum)]
    pub family: Option<FamilyKind>,
    /// Exponent of the power family.
    #[arg(long)]
    pub k: Option<u32>,
    /// Polynomial coefficients, constant term first, e.g. "1,1,1".
    #[arg(long)]
    pub poly: Option<String>,
    /// Piatetski-Shapiro exponent, decimal or p/q.
    #[arg(long)]
    pub alpha: Option<String>,
    /// Explicit comma-separated moduli.
    #[arg(long)]
    pub values: Option<String>,
}

impl FamilyArgs {
    fn sequence(&self, len: u64) -> Result<ModuliSequence> {
        match self.family {
            None => bail!(Validation, "--family is required"),
            Some(FamilyKind::Power) => moduli::generate_power(need(self.k, "k")?, len),
            Some(FamilyKind::Polynomial) => moduli::generate_polynomial(&need_str(&self.poly, "poly")?.parse()?, len),
            Some(FamilyKind::Ps) => moduli::generate_piatetski_shapiro(self.alpha()?, len),
            Some(FamilyKind::Explicit) => {
                let values: Vec<u128> = parse_list(need_str(&self.values, "values")?, "values")?;
                let seq = ModuliSequence::explicit(values, None)?;
                if (len as usize) > seq.len() {
                    bail!(Validation, "--q = {len} exceeds the {} explicit values", seq.len());
                }
                Ok(seq)
            }
        }
    }

    fn alpha(&self) -> Result<Alpha> {
        need_str(&self.alpha, "alpha")?.parse()
    }

    fn family(&self) -> Result<Family> {
        Ok(match self.family {
            Some(FamilyKind::Power) => Family::Monomial(need(self.k, "k")?),
            Some(FamilyKind::Polynomial) => Family::Polynomial(need_str(&self.poly, "poly")?.parse()?),
            Some(FamilyKind::Ps) => Family::PiatetskiShapiro(self.alpha()?),
            _ => bail!(Validation, "--family must be power, polynomial or ps for bound audits"),
        })
    }
}

#[derive(Args, Debug, Serialize)]
pub struct ModuliArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub fam: FamilyArgs,
    /// Number of terms.
    #[arg(long)]
    pub q: Option<u64>,
    /// Dump the window {⌊j^α⌋} ∩ [R, 2R] instead of a prefix.
    #[arg(long)]
    pub window: Option<u128>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum EnergyBackend {
    Sparse,
    Dense,
    Oracle,
}

#[derive(Args, Debug, Serialize)]
pub struct EnergyArgs {
    /// Comma-separated integers.
    #[arg(long)]
    pub set: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    pub fam: FamilyArgs,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long, value_enum, default_value = "sparse")]
    pub backend: EnergyBackend,
    /// Also write the h ↦ E⁺_h table.
    #[arg(long)]
    pub h_table: bool,
}

#[derive(Args, Debug, Serialize)]
pub struct BoxesArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub fam: FamilyArgs,
    #[arg(long)]
    pub q: Option<u64>,
    /// Farey spacing count M(𝐦; N, Q) at this N.
    #[arg(long)]
    pub spacing: Option<u128>,
    /// Box congruence `a`, with --m, --u, --v.
    #[arg(long, allow_hyphen_values = true)]
    pub a: Option<i128>,
    #[arg(long)]
    pub m: Option<u128>,
    #[arg(long)]
    pub u: Option<usize>,
    #[arg(long)]
    pub v: Option<u128>,
    /// Comma-separated N values for the spacing audit at --q.
    #[arg(long)]
    pub audit_n: Option<String>,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum SieveMode {
    Naive,
    Fast,
    Constant,
    Audit,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum CoeffKind {
    Ones,
    Random,
}

#[derive(Args, Debug, Serialize)]
pub struct SieveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub fam: FamilyArgs,
    #[arg(long, value_enum, default_value = "fast")]
    pub mode: SieveMode,
    #[arg(long)]
    pub q: Option<u64>,
    #[arg(long)]
    pub n: Option<usize>,
    /// Offset M: coefficients sit on n = M+1..M+N.
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub offset: i64,
    #[arg(long, value_enum, default_value = "random")]
    pub coeffs: CoeffKind,
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    /// Audit grid: comma-separated Q values.
    #[arg(long)]
    pub q_grid: Option<String>,
    /// Audit grid: comma-separated ν values, N = ⌈Q^ν⌉.
    #[arg(long)]
    pub nu_grid: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct BoundsArgs {
    #[arg(long)]
    pub k: Option<u32>,
    /// Solve σ, τ, λ, μ and write the winner map.
    #[arg(long)]
    pub crossovers: bool,
    /// Comma-separated ν values for the winner map (default: [k, 2k] in steps of 0.05).
    #[arg(long)]
    pub nu_grid: Option<String>,
    /// Evaluate one bound id at --nu.
    #[arg(long)]
    pub bound: Option<String>,
    #[arg(long)]
    pub nu: Option<f64>,
    /// Evaluate the level function Φ(α).
    #[arg(long)]
    pub phi: Option<String>,
    /// Check the composition identity at --k.
    #[arg(long)]
    pub compose: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, Serialize, PartialEq)]
#[serde(rename_all = "kebab-case")]
pub enum ExpMode {
    Weyl,
    WeylRhs,
    Sh,
    Divisible,
    Readings,
    CardAudit,
    VdcAudit,
}

#[derive(Args, Debug, Serialize)]
pub struct ExpsumsArgs {
    #[arg(long, value_enum)]
    pub mode: Option<ExpMode>,
    /// Real polynomial, constant term first; entries decimal or p/q.
    #[arg(long)]
    pub poly: Option<String>,
    #[arg(long)]
    pub u: Option<u64>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub t: Option<u64>,
    #[arg(long, allow_hyphen_values = true)]
    pub h: Option<i64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<u128>,
    #[arg(long)]
    pub t_grid: Option<String>,
    /// Comma-separated R values.
    #[arg(long = "R-grid")]
    #[serde(rename = "R_grid")]
    pub r_grid: Option<String>,
}

#[derive(Args, Debug, Serialize)]
pub struct BvArgs {
    #[arg(long)]
    pub alpha: Option<String>,
    /// Accepts integer or scientific notation, e.g. 1e6.
    #[arg(long)]
    pub x: Option<String>,
    /// R = ⌊x^θ⌋.
    #[arg(long = "R-exp")]
    #[serde(rename = "R_exp")]
    pub r_exp: Option<f64>,
    #[arg(long = "R")]
    #[serde(rename = "R")]
    pub r: Option<u64>,
    /// Also list primes p <= x with PS_α(p-1) >= p^θ.
    #[arg(long)]
    pub search_theta: Option<f64>,
    /// Directory for the prime table cache.
    #[arg(long)]
    pub cache: Option<PathBuf>,
}

fn need<T: Copy>(v: Option<T>, name: &str) -> Result<T> {
    v.ok_or_else(|| Error::Validation(format!("--{} is required", name.replace('_', "-"))))
}

fn need_str<'a>(v: &'a Option<String>, name: &str) -> Result<&'a str> {
    v.as_deref().ok_or_else(|| Error::Validation(format!("--{} is required", name.replace('_', "-"))))
}

fn parse_list<T: std::str::FromStr>(s: &str, name: &str) -> Result<Vec<T>> {
    let out = s
        .split(',')
        .map(|x| x.trim().parse::<T>().map_err(|_| Error::Validation(format!("--{name}: cannot parse {x:?}"))))
        .collect::<Result<Vec<_>>>()?;
    if out.is_empty() {
        bail!(Validation, "--{name}: the list is empty");
    }
    Ok(out)
}

/// Integer given plainly or in scientific notation.
fn parse_count(s: &str, name: &str) -> Result<u64> {
    if let Ok(v) = s.trim().parse::<u64>() {
        return Ok(v);
    }
    let f: f64 = s.trim().parse().map_err(|_| Error::Validation(format!("--{name}: cannot parse {s:?}")))?;
    if !(f >= 0.0 && f.fract() == 0.0 && f < 1.8e19) {
        bail!(Validation, "--{name}: {s} is not a non-negative integer");
    }
    Ok(f as u64)
}

/// Files written by one run, relative to the output directory.
struct Outputs {
    dir: PathBuf,
    files: Vec<String>,
}

impl Outputs {
    fn new(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        Ok(Outputs { dir: dir.to_path_buf(), files: Vec::new() })
    }

    fn csv(&mut self, name: &str, body: impl FnOnce(&mut dyn Write) -> Result<()>) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        writeln!(w, "# schema={SCHEMA}")?;
        body(&mut w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn json(&mut self, name: &str, v: &Value) -> Result<()> {
        let mut w = BufWriter::new(File::create(self.dir.join(name))?);
        serde_json::to_writer_pretty(&mut w, v)?;
        writeln!(w)?;
        w.flush()?;
        self.files.push(name.to_string());
        Ok(())
    }
}

/// Translates a flat JSON object into flags for the named subcommand.
fn config_flags(path: &Path) -> Result<Vec<OsString>> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    let Value::Object(map) = v else {
        bail!(Config, "{}: expected a JSON object of parameters", path.display());
    };
    let mut out = Vec::new();
    for (key, val) in map {
        if key == "config" {
            bail!(Config, "{}: nested config files are not supported", path.display());
        }
        let flag = format!("--{}", key.replace('_', "-"));
        match val {
            Value::Bool(true) => out.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Array(items) => {
                let parts: Vec<String> = items.iter().map(scalar).collect::<Result<_>>()?;
                out.push(flag.into());
                out.push(parts.join(",").into());
            }
            other => {
                out.push(flag.into());
                out.push(scalar(&other)?.into());
            }
        }
    }
    Ok(out)
}

fn scalar(v: &Value) -> Result<String> {
    match v {
        Value::String(s) => Ok(s.clone()),
        Value::Number(n) => Ok(n.to_string()),
        Value::Bool(b) => Ok(b.to_string()),
        _ => bail!(Config, "config values must be scalars or arrays of scalars, got {v}"),
    }
}

/// Parses `args` (including the program name), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    let cli = match with_config(cli, &args) {
        Ok(c) => c,
        Err(e) => return report(e),
    };
    match execute(&cli) {
        Ok(code) => code,
        Err(e) => report(e),
    }
}

fn report(e: Error) -> i32 {
    eprintln!("error: {e}");
    e.exit_code()
}

fn with_config(cli: Cli, args: &[OsString]) -> Result<Cli> {
    let Some(path) = cli.config.clone() else {
        return Ok(cli);
    };
    if matches!(cli.command, Command::AuditAll) {
        return Ok(cli);
    }
    let name = cli.command.name();
    let pos = args
        .iter()
        .position(|a| a == name)
        .ok_or_else(|| Error::Config(format!("cannot locate subcommand {name} in the arguments")))?;
    let mut merged: Vec<OsString> = args[..=pos].to_vec();
    merged.extend(config_flags(&path)?);
    merged.extend_from_slice(&args[pos + 1..]);
    Cli::try_parse_from(&merged).map_err(|e| Error::Config(format!("{}: {}", path.display(), e.to_string().trim())))
}

fn execute(cli: &Cli) -> Result<i32> {
    if let Some(n) = cli.threads {
        if n == 0 {
            bail!(Validation, "--threads must be >= 1");
        }
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let mut out = Outputs::new(&cli.out)?;
    let (params, code) = match &cli.command {
        Command::Moduli(a) => (serde_json::to_value(a)?, cmd_moduli(a, &mut out)?),
        Command::Energy(a) => (serde_json::to_value(a)?, cmd_energy(a, &mut out)?),
        Command::Boxes(a) => (serde_json::to_value(a)?, cmd_boxes(a, &mut out)?),
        Command::Sieve(a) => (serde_json::to_value(a)?, cmd_sieve(a, cli, &mut out)?),
        Command::Bounds(a) => (serde_json::to_value(a)?, cmd_bounds(a, &mut out)?),
        Command::Expsums(a) => (serde_json::to_value(a)?, cmd_expsums(a, cli, &mut out)?),
        Command::Bv(a) => (serde_json::to_value(a)?, cmd_bv(a, cli, &mut out)?),
        Command::AuditAll => cmd_audit_all(cli, &mut out)?,
    };
    let mut files = out.files.clone();
    files.push("manifest.json".into());
    let manifest = json!({
        "command": cli.command.name(),
        "params": params,
        "seed": cli.seed,
        "threads": cli.threads,
        "budget_ops": cli.budget_ops.map(|b| b.to_string()),
        "versions": { "sparse-sieve": env!("CARGO_PKG_VERSION"), "schema": SCHEMA },
        "output_files": files,
    });
    out.json("manifest.json", &manifest)?;
    Ok(code)
}

fn print_json(v: &Value) -> Result<()> {
    println!("{}", serde_json::to_string_pretty(v)?);
    Ok(())
}

fn cmd_moduli(a: &ModuliArgs, out: &mut Outputs) -> Result<i32> {
    if let Some(r) = a.window {
        let w = moduli::window(a.fam.alpha()?, r)?;
        out.csv("window.csv", |wr| {
            let mut c = csv::Writer::from_writer(wr);
            c.write_record(["j", "m_j"])?;
            for (j, m) in &w.members {
                c.write_record([j.to_string(), m.to_string()])?;
            }
            c.flush()?;
            Ok(())
        })?;
        let v = json!({ "alpha": w.alpha.to_string(), "R": r.to_string(), "size": w.len() });
        out.json("window.json", &v)?;
        print_json(&v)?;
        return Ok(0);
    }
    let seq = a.fam.sequence(need(a.q, "q")?)?;
    out.csv("moduli.csv", |w| seq.write_csv(w))?;
    let mut v = seq.to_json();
    if seq.len() >= 8 {
        v["growth_exponent"] = json!(moduli::growth_exponent(&seq)?);
    }
    if seq.len() >= 3 {
        v["convex"] = json!(moduli::is_convex(seq.values())?);
    }
    out.json("moduli.json", &v)?;
    println!("{} terms written to {}", seq.len(), out.dir.join("moduli.csv").display());
    Ok(0)
}

fn cmd_energy(a: &EnergyArgs, out: &mut Outputs) -> Result<i32> {
    let set: Vec<i128> = match (&a.set, a.fam.family) {
        (Some(s), None) => parse_list(s, "set")?,
        (None, Some(_)) => a.fam.sequence(need(a.q, "q")?)?.values().iter().map(|&m| m as i128).collect(),
        (Some(_), Some(_)) => bail!(Validation, "--set and --family are mutually exclusive"),
        (None, None) => bail!(Validation, "--set or --family is required"),
    };
    let rep = match a.backend {
        EnergyBackend::Oracle => energy::energy_oracle(&set)?,
        EnergyBackend::Sparse => energy::energy_fast(&set, Backend::Sparse)?,
        EnergyBackend::Dense => energy::energy_fast(&set, Backend::Dense)?,
    };
    if a.h_table {
        if rep.h_table.is_none() {
            bail!(Capacity, "the shift table has more than {} entries", energy::H_TABLE_MAX);
        }
        out.csv("h_table.csv", |w| rep.write_h_table_csv(w))?;
    }
    let v = rep.to_json();
    out.json("energy.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_boxes(a: &BoxesArgs, out: &mut Outputs) -> Result<i32> {
    let mut summary = serde_json::Map::new();
    if let Some(n) = a.spacing {
        let q = need(a.q, "q")?;
        let seq = a.fam.sequence(2 * q)?;
        let m = boxes::spacing_count(&seq, n, q as usize)?;
        summary.insert("spacing".into(), json!({ "Q": q, "N": n.to_string(), "M": m }));
    }
    if let Some(av) = a.a {
        let (m, u, v) = (need(a.m, "m")?, need(a.u, "u")?, need(a.v, "v")?);
        let seq = a.fam.sequence(u as u64)?;
        let t = boxes::count_box_solutions(av, m, &seq, u, v)?;
        let audit = boxes::box_audit(&seq, &[(av, m)], u, v)?;
        summary.insert("box".into(), json!({ "a": av.to_string(), "m": m.to_string(), "U": u, "V": v.to_string(), "T": t, "rhs": audit[0].rhs }));
    }
    if let Some(ns) = &a.audit_n {
        let q = need(a.q, "q")? as usize;
        let ns: Vec<u128> = parse_list(ns, "audit-n")?;
        let rows = match (a.fam.family, &a.fam.poly) {
            (Some(FamilyKind::Polynomial), Some(p)) => {
                let f: IntPolynomial = p.parse()?;
                ns.iter().map(|&n| boxes::lemma_poly_audit(&f, n, q)).collect::<Result<Vec<_>>>()?
            }
            _ => {
                let seq = a.fam.sequence(2 * q as u64)?;
                ns.iter().map(|&n| boxes::lemma_fracgen_audit(&seq, n, q)).collect::<Result<Vec<_>>>()?
            }
        };
        out.csv("spacing_audit.csv", |w| boxes::write_audit_csv(&rows, w))?;
        summary.insert("audit_rows".into(), json!(rows.len()));
    }
    if summary.is_empty() {
        bail!(Validation, "boxes needs --spacing, --a/--m/--u/--v or --audit-n");
    }
    let v = Value::Object(summary);
    out.json("boxes.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_sieve(a: &SieveArgs, cli: &Cli, out: &mut Outputs) -> Result<i32> {
    if a.mode == SieveMode::Audit {
        let fam = a.fam.family()?;
        let qs: Vec<u64> = parse_list(need_str(&a.q_grid, "q_grid")?, "q-grid")?;
        let nus: Vec<f64> = parse_list(need_str(&a.nu_grid, "nu_grid")?, "nu-grid")?;
        let grid: Vec<(u64, f64)> = nus.iter().flat_map(|&nu| qs.iter().map(move |&q| (q, nu))).collect();
        let params = PowerIterationParams { tol: a.tol, max_iter: a.max_iter, seed: cli.seed };
        let rows = sieve::bound_audit(&fam, &grid, params)?;
        out.csv("bound_audit.csv", |w| sieve::write_bound_audit_csv(&rows, w))?;
        let frozen = sieve::freeze_constants(&rows);
        let v = json!({ "frozen_constants": frozen });
        out.json("bound_audit.json", &v)?;
        print_json(&v)?;
        return Ok(0);
    }
    let q = need(a.q, "q")?;
    let n = need(a.n, "n")?;
    let seq = a.fam.sequence(q)?;
    if a.mode == SieveMode::Constant {
        let est = sieve::estimate_sieve_constant(&seq, q as usize, n, a.offset, a.tol, a.max_iter, cli.seed)?;
        out.csv("rayleigh.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["iteration", "quotient"])?;
            for (i, h) in est.history.iter().enumerate() {
                c.write_record([(i + 1).to_string(), h.to_string()])?;
            }
            c.flush()?;
            Ok(())
        })?;
        let v = json!({
            "delta_star_lower": est.delta_star_lower,
            "iterations": est.iterations,
            "converged": est.converged,
            "certificate": est.certificate,
            "points": est.points,
            "restarted": est.restarted,
            "top_node_share": est.top_node_share,
        });
        out.json("sieve_constant.json", &v)?;
        print_json(&v)?;
        return Ok(0);
    }
    let coeffs = match a.coeffs {
        CoeffKind::Ones => CoefficientVector::new(a.offset, vec![Complex64::new(1.0, 0.0); n])?,
        CoeffKind::Random => CoefficientVector::random(a.offset, n, cli.seed),
    };
    let res = match a.mode {
        SieveMode::Naive => match cli.budget_ops {
            Some(b) => sieve::sieve_sum_naive_with_budget(&coeffs, &seq, q as usize, b)?,
            None => sieve::sieve_sum_naive(&coeffs, &seq, q as usize)?,
        },
        _ => sieve::sieve_sum_fast(&coeffs, &seq, q as usize)?,
    };
    out.csv("per_modulus.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["m", "contribution"])?;
        for (m, v) in &res.per_modulus {
            c.write_record([m.to_string(), v.to_string()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    let v = json!({ "total": res.total, "norm_sq": res.norm_sq, "ratio": res.ratio });
    out.json("sieve.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_bounds(a: &BoundsArgs, out: &mut Outputs) -> Result<i32> {
    let mut summary = serde_json::Map::new();
    if let Some(p) = &a.phi {
        let alpha: Alpha = p.parse()?;
        let v = match alpha.ratio() {
            Some((p, q)) => {
                let r = bounds::phi_alpha_exact(bounds::Rational::new(p as i128, q as i128))?;
                json!({ "alpha": alpha.to_string(), "phi": bounds::rational_to_f64(&r), "exact": r.to_string() })
            }
            None => json!({ "alpha": alpha.to_string(), "phi": bounds::phi_alpha(alpha.value())? }),
        };
        summary.insert("phi".into(), v);
    }
    if let Some(b) = &a.bound {
        let id: BoundId = b.parse()?;
        let (k, nu) = (need(a.k, "k")?, need(a.nu, "nu")?);
        summary.insert("exponent".into(), json!({ "bound": id, "k": k, "nu": nu, "exponent": bounds::delta_exponent(id, k, nu)? }));
    }
    if a.compose {
        let k = need(a.k, "k")?;
        summary.insert("composition".into(), json!({ "k": k, "holds": bounds::composition_identity_check(k)? }));
    }
    if a.crossovers {
        let k = need(a.k, "k")?;
        let rep = bounds::crossover_report(k)?;
        let grid: Vec<f64> = match &a.nu_grid {
            Some(g) => parse_list(g, "nu-grid")?,
            None => (0..=20 * k).map(|i| k as f64 + i as f64 * 0.05).collect(),
        };
        let rows = bounds::winner_map(k, &grid)?;
        out.csv("winner_map.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["k", "nu", "winner", "exponent"])?;
            for r in &rows {
                c.write_record([r.k.to_string(), r.nu.to_string(), r.winner.to_string(), r.exponent.to_string()])?;
            }
            c.flush()?;
            Ok(())
        })?;
        summary.insert(
            "crossovers".into(),
            json!({
                "k": k,
                "lambda": rep.lambda,
                "mu": rep.mu,
                "mu_capped": rep.mu_capped,
                "sigma": rep.sigma,
                "tau": rep.tau,
                "window_nonempty": rep.window_nonempty(),
                "strict_window": rep.strict_window,
            }),
        );
    }
    if summary.is_empty() {
        bail!(Validation, "bounds needs --crossovers, --bound, --phi or --compose");
    }
    let v = Value::Object(summary);
    out.json("bounds.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_expsums(a: &ExpsumsArgs, cli: &Cli, out: &mut Outputs) -> Result<i32> {
    let alpha = || -> Result<Alpha> { need_str(&a.alpha, "alpha")?.parse() };
    let v = match need(a.mode, "mode")? {
        ExpMode::Weyl => {
            let f: RealPolynomial = need_str(&a.poly, "poly")?.parse()?;
            serde_json::to_value(expsums::weyl_sum(&f, need(a.u, "u")?)?)?
        }
        ExpMode::WeylRhs => {
            let f: RealPolynomial = need_str(&a.poly, "poly")?.parse()?;
            let u = need(a.u, "u")?;
            if let Some(b) = cli.budget_ops {
                let side = 2 * u as u128 - 1;
                let size = side.saturating_pow(f.degree().saturating_sub(1) as u32);
                if size > b {
                    bail!(Capacity, "Weyl lattice has {size} points, --budget-ops is {b}");
                }
            }
            let s = expsums::weyl_sum(&f, u)?;
            let rhs = expsums::weyl_bound_rhs(&f, u)?;
            json!({ "abs_sum": s.abs(), "rhs": rhs, "ratio": s.abs() / rhs })
        }
        ExpMode::Sh => {
            serde_json::to_value(expsums::sh_sum(&alpha()?, need(a.t, "t")?, need(a.h, "h")?, need(a.r, "R")?)?)?
        }
        ExpMode::Divisible => serde_json::to_value(expsums::ps_divisible_count(&alpha()?, need(a.t, "t")?, need(a.r, "R")?)?)?,
        ExpMode::Readings => serde_json::to_value(expsums::card_readings(&alpha()?, need(a.t, "t")?, need(a.r, "R")?)?)?,
        mode @ (ExpMode::CardAudit | ExpMode::VdcAudit) => {
            let ts: Vec<u64> = parse_list(need_str(&a.t_grid, "t_grid")?, "t-grid")?;
            let rs: Vec<u128> = parse_list(need_str(&a.r_grid, "R_grid")?, "R-grid")?;
            let rows = if mode == ExpMode::CardAudit {
                expsums::card_bound_audit(&alpha()?, &ts, &rs)?
            } else {
                expsums::vdc_audit(&alpha()?, &ts, &rs)?
            };
            let name = if mode == ExpMode::CardAudit { "card_audit.csv" } else { "vdc_audit.csv" };
            out.csv(name, |w| expsums::write_audit_csv(&rows, w))?;
            serde_json::to_value(expsums::freeze(&rows))?
        }
    };
    out.json("expsums.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_bv(a: &BvArgs, cli: &Cli, out: &mut Outputs) -> Result<i32> {
    let alpha: Alpha = need_str(&a.alpha, "alpha")?.parse()?;
    let x = parse_count(need_str(&a.x, "x")?, "x")?;
    let limit = cli.budget_ops.map_or(bv::X_MAX_LIMIT, |b| b.min(u64::MAX as u128) as u64);
    if x > limit {
        bail!(Capacity, "--x = {x} exceeds the prime table budget {limit}");
    }
    let table = match &a.cache {
        Some(dir) => PrimeTable::load_or_build(dir, x)?,
        None => PrimeTable::build_with_limit(x, limit)?,
    };
    let r = match (a.r, a.r_exp) {
        (Some(r), None) => r,
        (None, Some(e)) => audit::floor_power(x, e),
        (Some(_), Some(_)) => bail!(Validation, "--R and --R-exp are mutually exclusive"),
        (None, None) => bail!(Validation, "--R or --R-exp is required"),
    };
    let rep = bv::bv_sum(&table, alpha, x, r)?;
    out.csv("bv_rows.csv", |w| rep.write_csv(w))?;
    let mut v = rep.summary_json();
    if let Some(theta) = a.search_theta {
        let s = bv::shifted_prime_search(&table, &alpha, theta, x)?;
        if s.theta_exceeds_level {
            eprintln!("warning: theta = {theta} is not below the level Φ(α) for alpha = {alpha}");
        }
        out.csv("shifted_primes.csv", |w| {
            let mut c = csv::Writer::from_writer(w);
            c.write_record(["p", "ps_divisor"])?;
            for (p, d) in &s.hits {
                c.write_record([p.to_string(), d.to_string()])?;
            }
            c.flush()?;
            Ok(())
        })?;
        v["shifted_primes"] = json!(s.hits.len());
        v["theta_exceeds_level"] = json!(s.theta_exceeds_level);
    }
    out.json("bv_summary.json", &v)?;
    print_json(&v)?;
    Ok(0)
}

fn cmd_audit_all(cli: &Cli, out: &mut Outputs) -> Result<(Value, i32)> {
    let cfg: AuditConfig = match &cli.config {
        Some(p) => serde_json::from_str(&std::fs::read_to_string(p)?)
            .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?,
        None => AuditConfig::default(),
    };
    let outcomes = audit::run_all(&cfg)?;
    for o in &outcomes {
        println!("{}", o.line());
    }
    out.csv("audit.csv", |w| {
        let mut c = csv::Writer::from_writer(w);
        c.write_record(["criterion", "title", "passed", "detail"])?;
        for o in &outcomes {
            c.write_record([o.id.to_string(), o.title.to_string(), o.passed.to_string(), o.detail.clone()])?;
        }
        c.flush()?;
        Ok(())
    })?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    Ok((serde_json::to_value(&cfg)?, i32::from(failed > 0)))
}
