//! hypzeta: periodic orbits, Julia-set dimension, twisted zeta functions
//! and counting reports for hyperbolic rational maps.
//!
//! Exit codes: 0 success, 2 validation error, 3 numerical failure.
//! Errors are emitted as one JSON object on stderr.

mod manifest;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64 as C64;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

use hypzeta::coding::{CodingScheme, SymbolWord, UserMarkovConfig};
use hypzeta::counting::{count_report, psi_sum, weyl_report};
use hypzeta::fixtures;
use hypzeta::map::RationalMap;
use hypzeta::orbits::{Backend, OrbitDatabase, Tolerances, DEFAULT_DEGREE_CAP};
use hypzeta::probes::{
    cylinder_points, decay_probe, default_nli_words, doubling_probe, ncp_probe, nli_probe,
    restrict_to_piece, DoublingParams, NcpParams, NliParams,
};
use hypzeta::thermo::{equilibrium_weights, estimate_delta};
use hypzeta::transfer::leading_eigenvalue_delta;
use hypzeta::zeta::{scan_pole_real_axis, scan_rect};
use hypzeta::{Error, Result};

use manifest::{OutputSet, RunManifest};

#[derive(Parser)]
#[command(
    name = "hypzeta",
    version,
    about = "Periodic orbits, dimension and twisted zeta functions of hyperbolic rational maps"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Directory for CSV/JSON outputs and the run manifest.
    #[arg(long, global = true, default_value = "hypzeta-out")]
    out_dir: PathBuf,

    /// Worker threads (0 = all cores); results do not depend on this.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    /// Seed for sampled probes (reports are bitwise reproducible per seed).
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Clone)]
struct MapArgs {
    /// Built-in map name (z2, z2m6, z2p5, z2p2p2i) or a path to a map
    /// JSON file {"numerator": [[re,im],..], "denominator": [[re,im],..]}.
    #[arg(long)]
    map: String,

    /// Optional coding config (UserMarkov JSON); defaults to the built-in
    /// circle coding for z2 and to full-shift detection otherwise.
    #[arg(long)]
    coding: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate primitive periodic orbits and persist the database
    /// (orbits.csv + orbits.json, plus agreement.json for --backend both).
    Orbits {
        #[command(flatten)]
        map: MapArgs,
        /// Deepest period to enumerate.
        #[arg(long, default_value_t = 10)]
        nmax: usize,
        /// roots | symbolic | both.
        #[arg(long, default_value = "symbolic")]
        backend: String,
        /// Point identification tolerance (relative to the region scale).
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Estimate the Julia-set Hausdorff dimension as the pressure zero
    /// (dimension.json).
    Dimension {
        #[command(flatten)]
        map: MapArgs,
        /// Inclusive pressure-level range "lo:hi".
        #[arg(long, default_value = "6:14")]
        nrange: String,
        /// orbit | eigen | both.
        #[arg(long, default_value = "both")]
        method: String,
        /// Cylinder depth for the eigenvalue method.
        #[arg(long, default_value_t = 10)]
        depth: usize,
    },
    /// Evaluate the truncated twisted zeta function on a rectangle
    /// (scan.csv + zeta.json; the l = 0 run also scans for the real pole).
    Zeta {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 0)]
        ell: i64,
        /// Rectangle "a0,a1,b0,b1"; default brackets the dimension.
        #[arg(long)]
        rect: Option<String>,
        /// Grid step in both axes.
        #[arg(long, default_value_t = 0.01)]
        step: f64,
        #[arg(long, default_value_t = 12)]
        nmax: usize,
    },
    /// Prime-orbit counting report N_t vs Li(t^delta) (count.csv +
    /// count.json).
    Count {
        #[command(flatten)]
        map: MapArgs,
        /// "log:t0:t1:n", "lin:t0:t1:n" or "auto".
        #[arg(long, default_value = "auto")]
        tgrid: String,
        #[arg(long, default_value_t = 14)]
        nmax: usize,
    },
    /// Holonomy equidistribution: Weyl sums and optional test-function
    /// sums (weyl.csv + equidist.json [+ psi.json]).
    Equidist {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 8)]
        lmax: i64,
        #[arg(long, default_value = "auto")]
        tgrid: String,
        #[arg(long, default_value_t = 14)]
        nmax: usize,
        /// JSON file [[ell, re, im], ...] of Fourier coefficients.
        #[arg(long)]
        psi_coeffs: Option<PathBuf>,
    },
    /// Empirical probes of the transfer-operator machinery
    /// (probe_<kind>.json).
    Probe {
        #[command(subcommand)]
        which: ProbeCmd,
    },
}

#[derive(Subcommand)]
enum ProbeCmd {
    /// L2 decay rate of the normalized twisted operator.
    Decay {
        #[command(flatten)]
        map: MapArgs,
        /// Im(s); Re(s) is pinned to the dimension estimate.
        #[arg(long, default_value_t = 5.0)]
        b: f64,
        #[arg(long, default_value_t = 0)]
        ell: i64,
        #[arg(long, default_value_t = 24)]
        steps: usize,
        #[arg(long, default_value_t = 10)]
        depth: usize,
        /// Level of the equilibrium-measure approximation.
        #[arg(long, default_value_t = 10)]
        level: usize,
        #[arg(long, default_value_t = 10)]
        nmax: usize,
    },
    /// Minimum singular value of the branch-difference Jacobian.
    Nli {
        #[command(flatten)]
        map: MapArgs,
        /// Backward words as digit strings; defaults are derived from the
        /// coding.
        #[arg(long)]
        word1: Option<String>,
        #[arg(long)]
        word2: Option<String>,
        #[arg(long, default_value_t = 6)]
        n0: usize,
        #[arg(long, default_value_t = 9)]
        grid: usize,
        #[arg(long, default_value_t = 1e-5)]
        fd_step: f64,
    },
    /// Non-concentration of a cylinder near lines.
    Ncp {
        #[command(flatten)]
        map: MapArgs,
        /// Cylinder prefix as a digit string.
        #[arg(long, default_value = "0")]
        prefix: String,
        #[arg(long, default_value_t = 8)]
        directions: usize,
        /// Radii relative to the cylinder diameter, comma separated.
        #[arg(long, default_value = "0.1,0.2")]
        radii: String,
        #[arg(long, default_value_t = 24)]
        centers: usize,
    },
    /// Doubling ratios of the equilibrium measure on one piece.
    Doubling {
        #[command(flatten)]
        map: MapArgs,
        #[arg(long, default_value_t = 12)]
        level: usize,
        #[arg(long, default_value_t = 0)]
        piece: usize,
        /// Radii relative to the piece diameter, comma separated.
        #[arg(long, default_value = "0.02,0.04,0.08")]
        radii: String,
        #[arg(long, default_value_t = 48)]
        centers: usize,
    },
}

fn main() {
    let cli = Cli::parse();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .expect("thread pool");
    let code = pool.install(|| match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            let payload = serde_json::json!({
                "error": e.code(),
                "message": e.to_string(),
            });
            eprintln!("{payload}");
            if e.is_validation() {
                2
            } else {
                3
            }
        }
    });
    std::process::exit(code);
}

/// Loads a map by built-in name or file path, returning the built-in name
/// when the content matches one (so shipped config files get the bundled
/// coding automatically).
fn load_map(spec: &str) -> Result<(RationalMap, Option<&'static str>)> {
    if fixtures::NAMES.contains(&spec) {
        let name = fixtures::NAMES.iter().find(|n| **n == spec).unwrap();
        return Ok((fixtures::named_map(spec)?, Some(name)));
    }
    let text = std::fs::read_to_string(spec)
        .map_err(|e| Error::Invalid(format!("cannot read map file '{spec}': {e}")))?;
    let map = RationalMap::from_json(&text)?;
    let builtin = fixtures::NAMES
        .iter()
        .find(|name| {
            fixtures::named_map(name)
                .map(|m| m.description_hash() == map.description_hash())
                .unwrap_or(false)
        })
        .copied();
    Ok((map, builtin))
}

fn load_scheme(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
) -> Result<CodingScheme> {
    if let Some(path) = coding {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read coding file: {e}")))?;
        let config: UserMarkovConfig = serde_json::from_str(&text)?;
        let mut scheme = CodingScheme::from_user_config(&config)?;
        scheme.measure_contraction(map)?;
        return Ok(scheme);
    }
    if let Some(name) = builtin {
        return fixtures::named_coding(name);
    }
    hypzeta::coding::detect_full_shift(map)
}

fn build_db(
    map: &RationalMap,
    scheme: Option<&CodingScheme>,
    nmax: usize,
    backend: Backend,
    tol: f64,
) -> Result<OrbitDatabase> {
    let tolerances = Tolerances {
        merge_tol: tol,
        ..Tolerances::default()
    };
    OrbitDatabase::build(map, scheme, nmax, backend, DEFAULT_DEGREE_CAP, tolerances)
}

fn parse_range(text: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 2 {
        return Err(Error::Invalid(format!("range '{text}' is not 'lo:hi'")));
    }
    let lo = parts[0]
        .parse()
        .map_err(|e| Error::Invalid(format!("bad range: {e}")))?;
    let hi = parts[1]
        .parse()
        .map_err(|e| Error::Invalid(format!("bad range: {e}")))?;
    if lo == 0 || lo > hi {
        return Err(Error::Invalid(format!("range '{text}' is empty")));
    }
    Ok((lo, hi))
}

fn parse_tgrid(text: &str, db: &OrbitDatabase) -> Result<Vec<f64>> {
    if text == "auto" {
        let t_min = db
            .orbits
            .first()
            .map(|o| o.abs_multiplier * 1.05)
            .unwrap_or(2.0)
            .max(2.2);
        let t_max = db.horizon() * 0.95;
        if !(t_min < t_max) {
            return Err(Error::Invalid(
                "database too shallow for an automatic t grid".into(),
            ));
        }
        return Ok(log_grid(t_min, t_max, 50));
    }
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 4 {
        return Err(Error::Invalid(format!(
            "t grid '{text}' is not 'log:t0:t1:n' or 'lin:t0:t1:n'"
        )));
    }
    let t0: f64 = parts[1]
        .parse()
        .map_err(|e| Error::Invalid(format!("bad t grid: {e}")))?;
    let t1: f64 = parts[2]
        .parse()
        .map_err(|e| Error::Invalid(format!("bad t grid: {e}")))?;
    let n: usize = parts[3]
        .parse()
        .map_err(|e| Error::Invalid(format!("bad t grid: {e}")))?;
    if !(t0 > 0.0 && t0 < t1 && n >= 2) {
        return Err(Error::Invalid(format!("degenerate t grid '{text}'")));
    }
    match parts[0] {
        "log" => Ok(log_grid(t0, t1, n)),
        "lin" => Ok((0..n)
            .map(|k| t0 + (t1 - t0) * k as f64 / (n - 1) as f64)
            .collect()),
        other => Err(Error::Invalid(format!("unknown grid kind '{other}'"))),
    }
}

fn log_grid(t0: f64, t1: f64, n: usize) -> Vec<f64> {
    let (l0, l1) = (t0.ln(), t1.ln());
    (0..n)
        .map(|k| (l0 + (l1 - l0) * k as f64 / (n - 1) as f64).exp())
        .collect()
}

fn parse_radii(text: &str, scale: f64) -> Result<Vec<f64>> {
    text.split(',')
        .map(|p| {
            p.trim()
                .parse::<f64>()
                .map(|r| r * scale)
                .map_err(|e| Error::Invalid(format!("bad radius '{p}': {e}")))
        })
        .collect()
}

fn default_delta(db: &OrbitDatabase) -> Result<f64> {
    let hi = db.n_max;
    let lo = hi.saturating_sub(6).max(2).min(hi);
    Ok(estimate_delta(db, lo, hi)?.delta)
}

fn new_manifest(cli: &Cli, map_hash: String, tolerances: serde_json::Value) -> RunManifest {
    let mut versions = BTreeMap::new();
    versions.insert("hypzeta".to_string(), env!("CARGO_PKG_VERSION").to_string());
    RunManifest {
        command_line: std::env::args().collect(),
        map_hash,
        tolerances,
        seed: cli.seed,
        versions,
        wall_time_ms: 0,
        outputs: BTreeMap::new(),
    }
}

fn run(cli: &Cli) -> Result<()> {
    let started = Instant::now();
    let mut out = OutputSet::new(&cli.out_dir);
    let mut manifest = match &cli.command {
        Command::Orbits {
            map, nmax, backend, tol,
        } => {
            let (m, builtin) = load_map(&map.map)?;
            let mut mani = new_manifest(cli, m.description_hash(), serde_json::json!({"tol": tol}));
            cmd_orbits(&m, builtin, &map.coding, *nmax, backend, *tol, &mut out)?;
            mani.tolerances = serde_json::json!({"merge_tol": tol});
            mani
        }
        Command::Dimension {
            map, nrange, method, depth,
        } => {
            let (m, builtin) = load_map(&map.map)?;
            let mani = new_manifest(cli, m.description_hash(), serde_json::json!({}));
            cmd_dimension(&m, builtin, &map.coding, nrange, method, *depth, &mut out)?;
            mani
        }
        Command::Zeta {
            map, ell, rect, step, nmax,
        } => {
            let (m, builtin) = load_map(&map.map)?;
            let mani = new_manifest(cli, m.description_hash(), serde_json::json!({"step": step}));
            cmd_zeta(&m, builtin, &map.coding, *ell, rect, *step, *nmax, &mut out)?;
            mani
        }
        Command::Count { map, tgrid, nmax } => {
            let (m, builtin) = load_map(&map.map)?;
            let mani = new_manifest(cli, m.description_hash(), serde_json::json!({}));
            cmd_count(&m, builtin, &map.coding, tgrid, *nmax, &mut out)?;
            mani
        }
        Command::Equidist {
            map, lmax, tgrid, nmax, psi_coeffs,
        } => {
            let (m, builtin) = load_map(&map.map)?;
            let mani = new_manifest(cli, m.description_hash(), serde_json::json!({}));
            cmd_equidist(&m, builtin, &map.coding, *lmax, tgrid, *nmax, psi_coeffs, &mut out)?;
            mani
        }
        Command::Probe { which } => {
            let (m, builtin, coding) = match which {
                ProbeCmd::Decay { map, .. }
                | ProbeCmd::Nli { map, .. }
                | ProbeCmd::Ncp { map, .. }
                | ProbeCmd::Doubling { map, .. } => {
                    let (m, builtin) = load_map(&map.map)?;
                    (m, builtin, map.coding.clone())
                }
            };
            let mani = new_manifest(cli, m.description_hash(), serde_json::json!({}));
            cmd_probe(&m, builtin, &coding, which, cli.seed, &mut out)?;
            mani
        }
    };
    manifest.wall_time_ms = started.elapsed().as_millis();
    out.write_all(&mut manifest)?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_orbits(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    nmax: usize,
    backend: &str,
    tol: f64,
    out: &mut OutputSet,
) -> Result<()> {
    match backend {
        "roots" => {
            let db = build_db(map, None, nmax, Backend::Roots, tol)?;
            out.add("orbits.csv", db.to_csv().into_bytes());
            out.add("orbits.json", db.sidecar_json().into_bytes());
        }
        "symbolic" => {
            let scheme = load_scheme(map, builtin, coding)?;
            let db = build_db(map, Some(&scheme), nmax, Backend::Symbolic, tol)?;
            out.add("orbits.csv", db.to_csv().into_bytes());
            out.add("orbits.json", db.sidecar_json().into_bytes());
        }
        "both" => {
            let scheme = load_scheme(map, builtin, coding)?;
            let sym = build_db(map, Some(&scheme), nmax, Backend::Symbolic, tol)?;
            let rts = build_db(map, None, nmax, Backend::Roots, tol)?;
            let mut levels = Vec::new();
            let mut max_distance = 0.0_f64;
            for n in 1..=nmax {
                let a: Vec<_> = sym
                    .orbits_of_period(n)
                    .map(|o| o.representative)
                    .collect();
                let b: Vec<_> = rts
                    .orbits_of_period(n)
                    .map(|o| o.representative)
                    .collect();
                let d = hypzeta::orbits::hausdorff_distance(&a, &b);
                max_distance = max_distance.max(d);
                levels.push(serde_json::json!({
                    "n": n,
                    "hausdorff": d,
                    "symbolic_orbits": a.len(),
                    "roots_orbits": b.len(),
                }));
            }
            out.add("orbits.csv", sym.to_csv().into_bytes());
            out.add("orbits.json", sym.sidecar_json().into_bytes());
            let agreement = serde_json::json!({
                "levels": levels,
                "max_hausdorff": max_distance,
            });
            out.add(
                "agreement.json",
                serde_json::to_vec_pretty(&agreement)?,
            );
        }
        other => {
            return Err(Error::Invalid(format!(
                "--backend must be roots|symbolic|both, got '{other}'"
            )))
        }
    }
    Ok(())
}

fn cmd_dimension(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    nrange: &str,
    method: &str,
    depth: usize,
    out: &mut OutputSet,
) -> Result<()> {
    let (lo, hi) = parse_range(nrange)?;
    let scheme = load_scheme(map, builtin, coding)?;
    let mut report = serde_json::Map::new();
    let mut delta = None;
    if method == "orbit" || method == "both" {
        let db = build_db(map, Some(&scheme), hi, Backend::Symbolic, 1e-9)?;
        let est = estimate_delta(&db, lo, hi)?;
        delta = Some(est.delta);
        report.insert("periodic_orbit".into(), serde_json::to_value(&est)?);
        report.insert("delta".into(), serde_json::json!(est.delta));
        report.insert("per_level".into(), serde_json::to_value(&est.per_level)?);
        report.insert("uncertainty".into(), serde_json::json!(est.uncertainty));
    }
    if method == "eigen" || method == "both" {
        let eigen = leading_eigenvalue_delta(map, &scheme, depth)?;
        report.insert("leading_eigenvalue".into(), serde_json::json!(eigen));
        if let Some(d) = delta {
            report.insert("agreement".into(), serde_json::json!((d - eigen).abs()));
        } else {
            report.insert("delta".into(), serde_json::json!(eigen));
        }
    }
    if !(method == "orbit" || method == "eigen" || method == "both") {
        return Err(Error::Invalid(format!(
            "--method must be orbit|eigen|both, got '{method}'"
        )));
    }
    out.add(
        "dimension.json",
        serde_json::to_vec_pretty(&serde_json::Value::Object(report))?,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_zeta(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    ell: i64,
    rect: &Option<String>,
    step: f64,
    nmax: usize,
    out: &mut OutputSet,
) -> Result<()> {
    let scheme = load_scheme(map, builtin, coding)?;
    let db = build_db(map, Some(&scheme), nmax, Backend::Symbolic, 1e-9)?;
    let delta = default_delta(&db)?;
    let (a0, a1, b0, b1) = match rect {
        Some(text) => {
            let parts: Vec<f64> = text
                .split(',')
                .map(|p| {
                    p.trim()
                        .parse()
                        .map_err(|e| Error::Invalid(format!("bad rect: {e}")))
                })
                .collect::<Result<Vec<f64>>>()?;
            if parts.len() != 4 {
                return Err(Error::Invalid("rect must be a0,a1,b0,b1".into()));
            }
            (parts[0], parts[1], parts[2], parts[3])
        }
        None => (delta - 0.02, delta + 0.05, -10.0, 10.0),
    };
    let scan = scan_rect(&db, ell, (a0, a1), (b0, b1), step)?;
    let mut csv = String::from("a,b,ell,re_logzeta,im_logzeta,abs_zeta,valid\n");
    for row in &scan.rows {
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            row.a,
            row.b,
            row.ell,
            row.re_logzeta,
            row.im_logzeta,
            row.abs_zeta,
            if row.valid { 1 } else { 0 }
        ));
    }
    out.add("scan.csv", csv.into_bytes());

    let mut summary = serde_json::json!({
        "ell": ell,
        "delta_est": delta,
        "min_abs_zeta": scan.min_abs_zeta,
        "min_at": {"a": scan.min_at.0, "b": scan.min_at.1},
        "truncation": nmax,
    });
    if ell == 0 {
        let pole = scan_pole_real_axis(&db, a0.min(delta - 0.05), a1.max(delta + 0.05), step.min(0.005))?;
        summary["pole"] = serde_json::json!({
            "zero_location": pole.zero_location,
            "min_location": pole.min_location,
            "min_abs_inv_zeta": pole.min_abs,
        });
    }
    out.add("zeta.json", serde_json::to_vec_pretty(&summary)?);
    Ok(())
}

fn cmd_count(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    tgrid: &str,
    nmax: usize,
    out: &mut OutputSet,
) -> Result<()> {
    let scheme = load_scheme(map, builtin, coding)?;
    let db = build_db(map, Some(&scheme), nmax, Backend::Symbolic, 1e-9)?;
    let delta = default_delta(&db)?;
    let grid = parse_tgrid(tgrid, &db)?;
    let report = count_report(&db, delta, &grid)?;
    let mut csv = String::from("t,n_t,li_t_delta,rel_error,small_t\n");
    for row in &report.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            row.t,
            row.n_t,
            row.li_t_delta,
            row.rel_error,
            if row.small_t { 1 } else { 0 }
        ));
    }
    out.add("count.csv", csv.into_bytes());
    out.add(
        "count.json",
        serde_json::to_vec_pretty(&serde_json::json!({
            "delta": delta,
            "beta_hat": report.beta_hat,
            "horizon": db.horizon(),
            "n_max": nmax,
        }))?,
    );
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_equidist(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    lmax: i64,
    tgrid: &str,
    nmax: usize,
    psi_coeffs: &Option<PathBuf>,
    out: &mut OutputSet,
) -> Result<()> {
    let scheme = load_scheme(map, builtin, coding)?;
    let db = build_db(map, Some(&scheme), nmax, Backend::Symbolic, 1e-9)?;
    let grid = parse_tgrid(tgrid, &db)?;
    let report = weyl_report(&db, lmax, &grid)?;
    let mut csv = String::from("t,ell,re_pi,im_pi,normalized\n");
    for (k, &ell) in report.ells.iter().enumerate() {
        for (j, &t) in report.t_grid.iter().enumerate() {
            csv.push_str(&format!(
                "{},{},{},{},{}\n",
                t, ell, report.pi[k][j].re, report.pi[k][j].im, report.normalized[k][j]
            ));
        }
    }
    out.add("weyl.csv", csv.into_bytes());

    let t_top = *grid.last().unwrap();
    let top: Vec<serde_json::Value> = report
        .ells
        .iter()
        .enumerate()
        .map(|(k, &ell)| {
            serde_json::json!({
                "ell": ell,
                "normalized_at_top": report.normalized[k][grid.len() - 1],
            })
        })
        .collect();
    out.add(
        "equidist.json",
        serde_json::to_vec_pretty(&serde_json::json!({
            "lmax": lmax,
            "t_top": t_top,
            "top_decay": top,
        }))?,
    );

    if let Some(path) = psi_coeffs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Invalid(format!("cannot read psi coefficients: {e}")))?;
        let raw: Vec<(i64, f64, f64)> = serde_json::from_str(&text)?;
        let coeffs: Vec<(i64, C64)> = raw
            .into_iter()
            .map(|(ell, re, im)| (ell, C64::new(re, im)))
            .collect();
        let delta = default_delta(&db)?;
        let psi = psi_sum(&db, &coeffs, delta, t_top)?;
        out.add("psi.json", serde_json::to_vec_pretty(&psi)?);
    }
    Ok(())
}

fn cmd_probe(
    map: &RationalMap,
    builtin: Option<&str>,
    coding: &Option<PathBuf>,
    which: &ProbeCmd,
    seed: u64,
    out: &mut OutputSet,
) -> Result<()> {
    let scheme = load_scheme(map, builtin, coding)?;
    match which {
        ProbeCmd::Decay {
            b, ell, steps, depth, level, nmax, ..
        } => {
            let db = build_db(map, Some(&scheme), (*nmax).max(*level), Backend::Symbolic, 1e-9)?;
            let delta = default_delta(&db)?;
            let measure = equilibrium_weights(&db, map, *level, delta)?;
            let report = decay_probe(
                map,
                &scheme,
                delta,
                C64::new(delta, *b),
                *ell,
                *steps,
                *depth,
                &measure,
            )?;
            out.add("probe_decay.json", serde_json::to_vec_pretty(&report)?);
        }
        ProbeCmd::Nli {
            word1, word2, n0, grid, fd_step, ..
        } => {
            let (w1, w2) = match (word1, word2) {
                (Some(a), Some(b)) => (SymbolWord::parse(a)?, SymbolWord::parse(b)?),
                (None, None) => default_nli_words(&scheme, *n0)?,
                _ => {
                    return Err(Error::Invalid(
                        "provide both --word1 and --word2 or neither".into(),
                    ))
                }
            };
            let mut params = NliParams::with_default_grid(&scheme, w1, w2);
            params.grid_n = *grid;
            params.fd_step = *fd_step;
            let report = nli_probe(map, &scheme, &params)?;
            out.add("probe_nli.json", serde_json::to_vec_pretty(&report)?);
        }
        ProbeCmd::Ncp {
            prefix, directions, radii, centers, ..
        } => {
            let prefix: Vec<usize> = SymbolWord::parse(prefix)?.symbols().to_vec();
            // Deepen the cylinder until it has enough sample points.
            let mut depth = prefix.len() + 1;
            let points = loop {
                let pts = cylinder_points(map, &scheme, &prefix, depth)?;
                if pts.len() >= 1000 || depth > prefix.len() + 20 {
                    break pts;
                }
                depth += 1;
            };
            let diam = diameter(&points);
            let params = NcpParams {
                directions: *directions,
                radii: parse_radii(radii, diam)?,
                center_samples: *centers,
                seed,
            };
            let report = ncp_probe(&map.description_hash(), &points, &params)?;
            out.add("probe_ncp.json", serde_json::to_vec_pretty(&report)?);
        }
        ProbeCmd::Doubling {
            level, piece, radii, centers, ..
        } => {
            let db = build_db(map, Some(&scheme), *level, Backend::Symbolic, 1e-9)?;
            let delta = default_delta(&db)?;
            let measure = equilibrium_weights(&db, map, *level, delta)?;
            let restricted = restrict_to_piece(&measure, &scheme, *piece);
            let diam = diameter(&restricted.points);
            let params = DoublingParams {
                radii: parse_radii(radii, diam)?,
                center_samples: *centers,
                seed,
            };
            let report = doubling_probe(&map.description_hash(), &restricted, &params)?;
            out.add("probe_doubling.json", serde_json::to_vec_pretty(&report)?);
        }
    }
    Ok(())
}

fn diameter(points: &[C64]) -> f64 {
    let mut d = 0.0_f64;
    for (i, a) in points.iter().enumerate() {
        for b in &points[i + 1..] {
            d = d.max((a - b).norm());
        }
    }
    d
}
