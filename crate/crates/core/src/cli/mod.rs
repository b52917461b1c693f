//! Command-line front end: solve → store → analyse pipelines, invariant
//! verification and plot-ready CSV/JSON output.
//!
//! Exit status: 0 success, 1 validation error, 2 numerical failure,
//! 3 invariant failure. Errors are also written to stderr as one JSON record.

pub mod config;

use std::collections::HashSet;
use std::fs::{File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use log::{info, warn};
use serde::Serialize;
use serde_json::json;

use crate::amplitude::PartialWaves;
use crate::basis::MolState;
use crate::entangle::{classify_case, decompose_product, pm_coefficients, EntangledPairState, ProductPrep};
use crate::error::{Error, Result};
use crate::tmx::{check_exchange_relation, solve_set, synthesize_unitary, SynthOptions, TMatrixSet};
use crate::vibwave::energy_scan;
use crate::xsec::{
    amplitude_set, averaging_identity_check, compare_pm, fmt_num, parity_exclusivity, report, route_deviation,
    satellite_accounting, theta_grid, write_dcs_csv, AmplitudeSet, FinalChannel, InitialSpec, Route, SatelliteMode,
    DEFAULT_PROFILE_NODES, DEFAULT_TOTAL_NODES,
};
use config::{env_overrides, RunConfig};

pub const SCAN_SCHEMA: &str = "pairscat-scan/1";
pub const VIB_SCHEMA: &str = "pairscat-vib/1";

#[derive(Parser, Debug)]
#[command(name = "pairscat", version, about = "Cross sections of identical diatom pairs in entangled initial states")]
pub struct Cli {
    /// Worker threads for parallel loops (1 keeps runs reproducible).
    #[arg(long, global = true, default_value_t = 1)]
    pub threads: usize,
    /// Omit the timestamp comment line from CSV output.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Solve the coupled equations for every J and write a T-matrix file.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write a seeded random unitary T-matrix set for the configured basis.
    Synth {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Impose the exchange relation of a symmetric potential.
        #[arg(long)]
        exchange_symmetric: bool,
        /// Real symmetric S (time-reversal-even K).
        #[arg(long)]
        real: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Differential cross sections σ(θ) as CSV.
    Dcs {
        #[command(flatten)]
        pair: PairArgs,
        /// plus, minus, pair, alpha=..,beta=.., or pm for both ± curves with d_c.
        #[arg(long, default_value = "pm")]
        initial: String,
        #[arg(long, default_value_t = DEFAULT_PROFILE_NODES)]
        nodes: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Integral cross sections as JSON.
    Total {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value = "pm")]
        initial: String,
        #[arg(long, default_value_t = DEFAULT_TOTAL_NODES)]
        nodes: usize,
    },
    /// Run the invariant battery on a T-matrix file.
    Verify {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 181)]
        n_theta: usize,
        #[arg(long, default_value_t = 8)]
        n_phi: usize,
    },
    /// Cross sections over an α × β grid for one or more energies; resumable.
    Scan {
        /// One T-matrix file per energy.
        #[arg(long = "tmx", required_unless_present = "config")]
        tmx: Vec<PathBuf>,
        /// Solve inline from a run configuration instead.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set")]
        set: Vec<String>,
        /// Energies for inline solves (cm⁻¹, comma separated).
        #[arg(long, value_delimiter = ',')]
        energies: Vec<f64>,
        #[arg(long, value_parser = parse_state)]
        a: Option<MolState>,
        #[arg(long, value_parser = parse_state)]
        b: Option<MolState>,
        #[arg(long = "final")]
        final_channel: Option<String>,
        #[arg(long, value_delimiter = ',', default_value = "0.7853981633974483")]
        alpha: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0,1.5707963267948966,3.141592653589793")]
        beta: Vec<f64>,
        #[arg(long)]
        out: PathBuf,
        /// Completed-cell manifest; defaults to <out>.manifest.
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
    /// Split a product of single-molecule superpositions into its entangled
    /// part and satellites; optionally evaluate the cross sections.
    Decompose {
        #[arg(long)]
        alpha1: f64,
        #[arg(long, default_value_t = 0.0)]
        beta1: f64,
        #[arg(long)]
        alpha2: f64,
        #[arg(long, default_value_t = 0.0)]
        beta2: f64,
        /// T-matrix file for the pair |ab⟩; enables cross sections.
        #[arg(long)]
        tmx: Option<PathBuf>,
        #[arg(long)]
        satellite_aa: Option<PathBuf>,
        #[arg(long)]
        satellite_bb: Option<PathBuf>,
        #[arg(long, value_parser = parse_state)]
        a: Option<MolState>,
        #[arg(long, value_parser = parse_state)]
        b: Option<MolState>,
        #[arg(long = "final")]
        final_channel: Option<String>,
        #[arg(long, default_value = "incoherent")]
        satellite_mode: String,
    },
    /// Collinear vibrational wavepacket scan P(E; β) as CSV.
    Vib {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
pub struct ConfigArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Override a configuration value: section.key=value (repeatable).
    #[arg(long = "set")]
    pub set: Vec<String>,
}

#[derive(Args, Debug)]
pub struct PairArgs {
    #[arg(long)]
    pub tmx: PathBuf,
    /// Molecule state a as j,m,v.
    #[arg(long, value_parser = parse_state)]
    pub a: MolState,
    /// Molecule state b as j,m,v.
    #[arg(long, value_parser = parse_state)]
    pub b: MolState,
    /// Final channel j1,v1,j2,v2 (repeatable; default elastic).
    #[arg(long = "final")]
    pub final_channel: Vec<String>,
    /// incoming, outgoing or reduced.
    #[arg(long, default_value = "incoming")]
    pub route: String,
}

fn parse_state(s: &str) -> std::result::Result<MolState, String> {
    let v: Vec<i32> = s
        .split(',')
        .map(|x| x.trim().parse::<i32>().map_err(|_| format!("{s:?} is not j,m,v")))
        .collect::<std::result::Result<_, _>>()?;
    if v.len() != 3 {
        return Err(format!("{s:?} is not j,m,v"));
    }
    let st = MolState::new(v[0], v[1], v[2]);
    st.validate().map_err(|e| e.to_string())?;
    Ok(st)
}

fn elastic(a: MolState, b: MolState) -> FinalChannel {
    FinalChannel::new(a.j, a.v, b.j, b.v)
}

fn finals(p: &PairArgs) -> Result<Vec<FinalChannel>> {
    if p.final_channel.is_empty() {
        Ok(vec![elastic(p.a, p.b)])
    } else {
        p.final_channel.iter().map(|s| s.parse()).collect()
    }
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Numerical(_) => 2,
        Error::Invariant(_) => 3,
        _ => 1,
    }
}

/// JSON error record written to stderr.
pub fn error_record(e: &Error) -> serde_json::Value {
    let mut rec = json!({ "error": e.kind(), "message": e.to_string(), "exit_code": exit_code(e) });
    if let Error::MissingEntries(keys) = e {
        rec["missing"] = json!(keys);
    }
    rec
}

fn timestamp(no_ts: bool) -> Option<String> {
    if no_ts {
        return None;
    }
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    Some(format!("unix={secs}"))
}

fn load_config(args: &ConfigArgs) -> Result<RunConfig> {
    load_config_parts(&args.config, &args.set)
}

fn load_config_parts(path: &Path, set: &[String]) -> Result<RunConfig> {
    let env = env_overrides(std::env::vars());
    RunConfig::load(path, &env, set).map(|(c, _)| c)
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    File::create(path).map(BufWriter::new).map_err(|e| Error::io(path, e))
}

fn print_json<W: Write>(out: &mut W, v: &impl Serialize) -> Result<()> {
    let s = serde_json::to_string_pretty(v).map_err(|e| Error::numerical(format!("json encoding failed: {e}")))?;
    writeln!(out, "{s}").map_err(|e| Error::io("<stdout>", e))
}

/// Parses arguments and runs; returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.threads.max(1)).build();
    let pool = match pool {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", json!({"error": "config", "message": e.to_string(), "exit_code": 1}));
            return 1;
        }
    };
    match pool.install(|| run(&cli, &mut std::io::stdout().lock())) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("{}", error_record(&e));
            exit_code(&e)
        }
    }
}

/// Runs one parsed command; the return value is the exit status for
/// commands that report pass/fail without an error.
pub fn run<W: Write>(cli: &Cli, out: &mut W) -> Result<i32> {
    let ts = timestamp(cli.no_timestamp);
    match &cli.command {
        Command::Solve { cfg, out: path } => cmd_solve(cfg, path, out),
        Command::Synth { cfg, seed, exchange_symmetric, real, out: path } => {
            let rc = load_config(cfg)?;
            let spec = rc.collision_spec(None)?;
            let set = synthesize_unitary(&spec, *seed, SynthOptions { exchange_symmetric: *exchange_symmetric, real: *real })?;
            set.save(path)?;
            print_json(out, &json!({ "written": path, "records": set.len(), "seed": seed }))?;
            Ok(0)
        }
        Command::Dcs { pair, initial, nodes, out: path } => cmd_dcs(pair, initial, *nodes, path.as_deref(), ts.as_deref(), out),
        Command::Total { pair, initial, nodes } => cmd_total(pair, initial, *nodes, out),
        Command::Verify { pair, n_theta, n_phi } => cmd_verify(pair, *n_theta, *n_phi, out),
        Command::Scan { tmx, config, set, energies, a, b, final_channel, alpha, beta, out: path, manifest } => {
            let inputs = ScanInputs {
                tmx: tmx.clone(),
                config: config.clone(),
                set: set.clone(),
                energies: energies.clone(),
                a: *a,
                b: *b,
                final_channel: final_channel.clone(),
                alpha: alpha.clone(),
                beta: beta.clone(),
            };
            let manifest = manifest.clone().unwrap_or_else(|| {
                let mut m = path.clone().into_os_string();
                m.push(".manifest");
                PathBuf::from(m)
            });
            cmd_scan(&inputs, path, &manifest, ts.as_deref(), out)
        }
        Command::Decompose { alpha1, beta1, alpha2, beta2, tmx, satellite_aa, satellite_bb, a, b, final_channel, satellite_mode } => {
            let prep = ProductPrep { alpha1: *alpha1, beta1: *beta1, alpha2: *alpha2, beta2: *beta2 };
            let d = decompose_product(&prep)?;
            let (cp, cm) = pm_coefficients(d.alpha, d.beta);
            let mut rec = json!({
                "decomposition": d,
                "norm": d.norm(),
                "pm_weights": d.pm_weights(),
                "c_plus": [cp.re, cp.im],
                "c_minus": [cm.re, cm.im],
            });
            if let Some(t) = tmx {
                let (a, b) = match (a, b) {
                    (Some(a), Some(b)) => (*a, *b),
                    _ => return Err(Error::config("--tmx needs --a and --b")),
                };
                rec["case"] = json!(classify_case(&EntangledPairState::new(a, b, d.alpha, d.beta)?));
                let set = TMatrixSet::load(t)?;
                let fin = match final_channel {
                    Some(f) => f.parse()?,
                    None => elastic(a, b),
                };
                let sa = satellite_aa.as_deref().map(TMatrixSet::load).transpose()?;
                let sb = satellite_bb.as_deref().map(TMatrixSet::load).transpose()?;
                let mode: SatelliteMode = satellite_mode.parse()?;
                let r = satellite_accounting(&set, [sa.as_ref(), sb.as_ref()], a, b, &prep, fin, mode)?;
                rec["cross_sections"] = json!(r);
            }
            print_json(out, &rec)?;
            Ok(0)
        }
        Command::Vib { cfg, out: path } => cmd_vib(cfg, path.as_deref(), ts.as_deref(), out),
    }
}

fn cmd_solve<W: Write>(cfg: &ConfigArgs, path: &Path, out: &mut W) -> Result<i32> {
    let rc = load_config(cfg)?;
    let spec = rc.collision_spec(None)?;
    let prop = rc.propagation(&spec)?;
    let model = rc.potential()?;
    info!("solving J = 0..={} at E_k = {} cm⁻¹", prop.big_j_max, spec.e_k);
    let set = solve_set(&spec, &model, &prop)?;
    let defects = set.unitarity_defects();
    let worst = defects.iter().map(|d| d.1).fold(0.0, f64::max);
    if worst > 1e-6 {
        warn!("unitarity defect {worst:.3e} exceeds 1e-6");
    }
    set.save(path)?;
    print_json(
        out,
        &json!({
            "written": path,
            "records": set.len(),
            "e_k": spec.e_k,
            "big_j_max": prop.big_j_max,
            "r_match": prop.r_match,
            "max_unitarity_defect": worst,
            "potential_hash": set.header.potential_hash,
        }),
    )?;
    Ok(0)
}

fn initial_list(initial: &str) -> Result<Vec<InitialSpec>> {
    if initial == "pm" {
        Ok(vec![InitialSpec::Plus, InitialSpec::Minus])
    } else {
        Ok(vec![initial.parse()?])
    }
}

fn cmd_dcs<W: Write>(
    p: &PairArgs,
    initial: &str,
    nodes: usize,
    path: Option<&Path>,
    ts: Option<&str>,
    out: &mut W,
) -> Result<i32> {
    let set = TMatrixSet::load(&p.tmx)?;
    let route: Route = p.route.parse()?;
    let theta = theta_grid(nodes);
    let mut reports = Vec::new();
    let mut summaries = Vec::new();
    for fin in finals(p)? {
        if initial == "pm" {
            let cmp = compare_pm(&set, p.a, p.b, fin, route, &theta)?;
            summaries.push(json!({
                "final_channel": fin.to_string(),
                "sigma_plus": cmp.plus.total_analytic,
                "sigma_minus": cmp.minus.total_analytic,
                "sigma_ref": cmp.reference.total_analytic,
                "d_c_percent": cmp.d_c,
            }));
            reports.push(cmp.plus);
            reports.push(cmp.minus);
        } else {
            for init in initial_list(initial)? {
                let amps = amplitude_set(&set, p.a, p.b, init, fin, route)?;
                let r = report(&amps, &set, init.tag(), fin, route, &theta, DEFAULT_TOTAL_NODES);
                summaries.push(json!({ "final_channel": fin.to_string(), "initial": r.initial_tag, "sigma": r.total_analytic }));
                reports.push(r);
            }
        }
    }
    let refs: Vec<_> = reports.iter().collect();
    match path {
        Some(path) => {
            let mut w = create(path)?;
            write_dcs_csv(&mut w, &refs, ts)?;
            w.flush().map_err(|e| Error::io(path, e))?;
            print_json(out, &json!({ "written": path, "summary": summaries }))?;
        }
        None => write_dcs_csv(out, &refs, ts)?,
    }
    Ok(0)
}

fn cmd_total<W: Write>(p: &PairArgs, initial: &str, nodes: usize, out: &mut W) -> Result<i32> {
    let set = TMatrixSet::load(&p.tmx)?;
    let route: Route = p.route.parse()?;
    let mut rows = Vec::new();
    for fin in finals(p)? {
        let mut totals = Vec::new();
        for init in initial_list(initial)? {
            let amps = amplitude_set(&set, p.a, p.b, init, fin, route)?;
            let t = crate::xsec::total(&amps, nodes);
            totals.push((init, amps.total_analytic()));
            rows.push(json!({
                "initial": init.tag(),
                "final_channel": fin.to_string(),
                "e_k": set.header.e_k,
                "sigma_analytic": amps.total_analytic(),
                "sigma_quadrature": t.value,
                "nodes": nodes,
                "converged": t.converged,
            }));
        }
        if initial == "pm" {
            let r = amplitude_set(&set, p.a, p.b, InitialSpec::Pair, fin, Route::Incoming)?.total_analytic();
            let d = crate::xsec::control_metric(totals[0].1, totals[1].1, r)?;
            rows.push(json!({ "final_channel": fin.to_string(), "sigma_ref": r, "d_c_percent": d }));
        }
    }
    print_json(out, &rows)?;
    Ok(0)
}

#[derive(Serialize)]
struct CheckRecord {
    name: String,
    passed: bool,
    value: f64,
    tolerance: f64,
    detail: String,
}

fn check(name: impl Into<String>, value: f64, tolerance: f64, detail: impl Into<String>) -> CheckRecord {
    CheckRecord { name: name.into(), passed: value.is_finite() && value <= tolerance, value, tolerance, detail: detail.into() }
}

fn cmd_verify<W: Write>(p: &PairArgs, n_theta: usize, n_phi: usize, out: &mut W) -> Result<i32> {
    let set = TMatrixSet::load(&p.tmx)?;
    set.validate()?;
    let mut checks = Vec::new();
    let unit = set.unitarity_defects().into_iter().fold((0.0f64, -1), |m, (j, d)| if d > m.0 { (d, j) } else { m });
    checks.push(check("unitarity", unit.0, 1e-6, format!("worst J = {}", unit.1)));
    match check_exchange_relation(&set, None, None) {
        Ok(r) => {
            let detail = r
                .worst
                .first()
                .map(|o| format!("J={} ({}|{}) rel {:.3e}", o.big_j, o.bra, o.ket, o.rel_deviation))
                .unwrap_or_default();
            checks.push(check("exchange_relation", r.max_rel_deviation, 1e-6, detail));
        }
        Err(e) => checks.push(CheckRecord {
            name: "exchange_relation".into(),
            passed: false,
            value: f64::NAN,
            tolerance: 1e-6,
            detail: e.to_string(),
        }),
    }
    let theta = theta_grid(n_theta);
    for fin in finals(p)? {
        let avg = averaging_identity_check(&set, p.a, p.b, fin, &theta)?;
        checks.push(check(
            format!("averaging_identity {fin}"),
            avg.max_deviation(),
            1e-10,
            format!("sigma_pair={:.6e} (plus+minus)/2={:.6e}", avg.total_pair, 0.5 * (avg.total_plus + avg.total_minus)),
        ));
        checks.push(check(
            format!("route_equivalence {fin}"),
            route_deviation(&set, p.a, p.b, fin, n_theta, n_phi)?,
            1e-8,
            format!("{n_theta}x{n_phi} grid"),
        ));
        checks.push(check(format!("parity_exclusivity {fin}"), parity_exclusivity(&set, p.a, p.b, fin)?, 1e-13, ""));
    }
    let passed = checks.iter().all(|c| c.passed);
    print_json(out, &json!({ "tmx": p.tmx, "passed": passed, "checks": checks }))?;
    Ok(if passed { 0 } else { 3 })
}

struct ScanInputs {
    tmx: Vec<PathBuf>,
    config: Option<PathBuf>,
    set: Vec<String>,
    energies: Vec<f64>,
    a: Option<MolState>,
    b: Option<MolState>,
    final_channel: Option<String>,
    alpha: Vec<f64>,
    beta: Vec<f64>,
}

/// Per-energy data shared by all cells.
struct EnergyBlock {
    label: String,
    e_k: f64,
    plus: AmplitudeSet,
    minus: AmplitudeSet,
    sigma_ref: f64,
}

fn scan_cell(block: &EnergyBlock, alpha: f64, beta: f64) -> Result<f64> {
    let (cp, cm) = pm_coefficients(alpha, beta);
    let waves: Vec<PartialWaves> = block
        .plus
        .waves
        .iter()
        .zip(&block.minus.waves)
        .map(|(x, y)| PartialWaves::linear_combination(&[(cp, x), (cm, y)]))
        .collect();
    let s = AmplitudeSet { waves, k: block.plus.k, k_prime: block.plus.k_prime }.total_analytic();
    if !s.is_finite() {
        return Err(Error::numerical(format!("non-finite cross section at alpha={alpha}, beta={beta}")));
    }
    Ok(s)
}

fn cell_id(label: &str, alpha: f64, beta: f64) -> String {
    format!("{label}|{}|{}", fmt_num(alpha), fmt_num(beta))
}

fn cmd_scan<W: Write>(inp: &ScanInputs, path: &Path, manifest: &Path, ts: Option<&str>, out: &mut W) -> Result<i32> {
    let mut sets: Vec<(String, TMatrixSet)> = Vec::new();
    let (mut a, mut b) = (inp.a, inp.b);
    if let Some(cfg_path) = &inp.config {
        let rc = load_config_parts(cfg_path, &inp.set)?;
        let (ca, cb) = rc.pair_states()?;
        a = a.or(Some(ca));
        b = b.or(Some(cb));
        let energies = if inp.energies.is_empty() { vec![rc.collision_spec(None)?.e_k] } else { inp.energies.clone() };
        for e in energies {
            let spec = rc.collision_spec(Some(e))?;
            let prop = rc.propagation(&spec)?;
            info!("scan: solving at E_k = {e} cm⁻¹");
            sets.push((format!("solve:E={}", fmt_num(e)), solve_set(&spec, &rc.potential()?, &prop)?));
        }
    }
    for t in &inp.tmx {
        sets.push((t.display().to_string(), TMatrixSet::load(t)?));
    }
    let (a, b) = match (a, b) {
        (Some(a), Some(b)) => (a, b),
        _ => return Err(Error::config("scan needs --a and --b (or a [collision] section)")),
    };
    let fin = match &inp.final_channel {
        Some(f) => f.parse()?,
        None => elastic(a, b),
    };
    let done: HashSet<String> = if manifest.exists() {
        let f = File::open(manifest).map_err(|e| Error::io(manifest, e))?;
        BufReader::new(f)
            .lines()
            .map_while(|l| l.ok())
            .filter_map(|l| l.strip_prefix("done ").map(str::to_string))
            .collect()
    } else {
        HashSet::new()
    };
    let fresh = !path.exists() || done.is_empty();
    let mut csv = if fresh {
        let mut w = create(path)?;
        writeln!(w, "# schema: {SCAN_SCHEMA}").map_err(|e| Error::io(path, e))?;
        if let Some(t) = ts {
            writeln!(w, "# generated: {t}").map_err(|e| Error::io(path, e))?;
        }
        writeln!(w, "source,final_channel,E_k,alpha,beta,sigma,sigma_plus,sigma_minus,sigma_ref,d_c,control_pct,status")
            .map_err(|e| Error::io(path, e))?;
        w
    } else {
        BufWriter::new(OpenOptions::new().append(true).open(path).map_err(|e| Error::io(path, e))?)
    };
    let mut man = if fresh {
        create(manifest)?
    } else {
        BufWriter::new(OpenOptions::new().append(true).open(manifest).map_err(|e| Error::io(manifest, e))?)
    };
    let (mut computed, mut skipped, mut failed) = (0usize, 0usize, 0usize);
    for (label, set) in &sets {
        let block = (|| -> Result<EnergyBlock> {
            let plus = amplitude_set(set, a, b, InitialSpec::Plus, fin, Route::Incoming)?;
            let minus = amplitude_set(set, a, b, InitialSpec::Minus, fin, Route::Incoming)?;
            let sigma_ref = amplitude_set(set, a, b, InitialSpec::Pair, fin, Route::Incoming)?.total_analytic();
            Ok(EnergyBlock { label: label.clone(), e_k: set.header.e_k, plus, minus, sigma_ref })
        })();
        for &alpha in &inp.alpha {
            for &beta in &inp.beta {
                let id = cell_id(label, alpha, beta);
                if !fresh && done.contains(&id) {
                    skipped += 1;
                    continue;
                }
                let row = match &block {
                    Ok(bk) => scan_cell(bk, alpha, beta).and_then(|s| {
                        let (sp, sm) = (bk.plus.total_analytic(), bk.minus.total_analytic());
                        let d_c = crate::xsec::control_metric(sp, sm, bk.sigma_ref)?;
                        Ok(format!(
                            "{},{},{},{},{},{},{},{},{},{},{},ok",
                            bk.label,
                            fin,
                            fmt_num(bk.e_k),
                            fmt_num(alpha),
                            fmt_num(beta),
                            fmt_num(s),
                            fmt_num(sp),
                            fmt_num(sm),
                            fmt_num(bk.sigma_ref),
                            fmt_num(d_c),
                            fmt_num(100.0 * (s - bk.sigma_ref) / bk.sigma_ref)
                        ))
                    }),
                    Err(e) => Err(Error::numerical(e.to_string())),
                };
                match row {
                    Ok(line) => {
                        writeln!(csv, "{line}").map_err(|e| Error::io(path, e))?;
                        writeln!(man, "done {id}").map_err(|e| Error::io(manifest, e))?;
                        computed += 1;
                    }
                    Err(e) => {
                        let msg = e.to_string().replace([',', '\n'], ";");
                        writeln!(csv, "{label},{fin},,{},{},,,,,,,error: {msg}", fmt_num(alpha), fmt_num(beta))
                            .map_err(|e| Error::io(path, e))?;
                        writeln!(man, "failed {id}").map_err(|e| Error::io(manifest, e))?;
                        warn!("scan cell {id} failed: {e}");
                        failed += 1;
                    }
                }
                csv.flush().map_err(|e| Error::io(path, e))?;
                man.flush().map_err(|e| Error::io(manifest, e))?;
            }
        }
    }
    print_json(out, &json!({ "written": path, "manifest": manifest, "computed": computed, "skipped": skipped, "failed": failed }))?;
    Ok(0)
}

fn cmd_vib<W: Write>(cfg: &ConfigArgs, path: Option<&Path>, ts: Option<&str>, out: &mut W) -> Result<i32> {
    let rc = load_config(cfg)?;
    let (sys, init, section) = rc.vib_system()?;
    let results = energy_scan(&sys, &init, &section.energies, &section.betas)?;
    let mut buf: Vec<u8> = Vec::new();
    let io = |e| Error::io("<vib csv>", e);
    writeln!(buf, "# schema: {VIB_SCHEMA}").map_err(io)?;
    if let Some(t) = ts {
        writeln!(buf, "# generated: {t}").map_err(io)?;
    }
    writeln!(buf, "E_k,alpha,beta,P_11,P_02,P_20,absorbed,accounting_defect").map_err(io)?;
    for r in &results {
        writeln!(
            buf,
            "{},{},{},{},{},{},{},{}",
            fmt_num(r.energy),
            fmt_num(r.alpha),
            fmt_num(r.beta),
            fmt_num(r.probability(1, 1)),
            fmt_num(r.probability(0, 2)),
            fmt_num(r.probability(2, 0)),
            fmt_num(r.absorbed),
            fmt_num(r.accounting_defect)
        )
        .map_err(io)?;
    }
    match path {
        Some(p) => {
            let mut w = create(p)?;
            w.write_all(&buf).map_err(|e| Error::io(p, e))?;
            w.flush().map_err(|e| Error::io(p, e))?;
            let worst = results.iter().map(|r| r.accounting_defect).fold(0.0, f64::max);
            print_json(out, &json!({ "written": p, "runs": results.len(), "max_accounting_defect": worst }))?;
        }
        None => out.write_all(&buf).map_err(|e| Error::io("<stdout>", e))?,
    }
    Ok(0)
}

/// Used by tests: one-element β → σ mapping over a T set.
pub fn scan_sigma(set: &TMatrixSet, a: MolState, b: MolState, fin: FinalChannel, alpha: f64, beta: f64) -> Result<f64> {
    let plus = amplitude_set(set, a, b, InitialSpec::Plus, fin, Route::Incoming)?;
    let minus = amplitude_set(set, a, b, InitialSpec::Minus, fin, Route::Incoming)?;
    let block = EnergyBlock { label: String::new(), e_k: set.header.e_k, plus, minus, sigma_ref: 0.0 };
    scan_cell(&block, alpha, beta)
}
