//! Command-line front end: reads a structure JSON, dispatches the
//! computations, and writes deterministic CSV/JSON artifacts.
//!
//! Frequencies are reported in units of 1/d and positions in units of d;
//! `--d` rescales the output columns only. Floats are printed with 17
//! significant digits so identical inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use ptrlab::potential::SchemaError;
use ptrlab::{
    design_strengths, detect_bands, epsilon_sweep, find_ptrs, pairing_check,
    reflectionless_modes, shift_table, solve_field, symmetrizing_amplitude,
    trace_exceptional_point, transmission, Band, DesignProblem, Placement, PtrRecord, Side,
    StructureJson, StructureSpec,
};

#[derive(Parser)]
#[command(
    name = "ptrlab",
    version,
    about = "Scattering, resonances and resonance-protecting design for 1D finite periodic potentials"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Structure description (JSON).
    #[arg(long)]
    input: PathBuf,
    /// Output artifact path.
    #[arg(long)]
    out: PathBuf,
    /// Lower end of the frequency range in 1/d (for `field` without
    /// --protect: the evaluation frequency).
    #[arg(long, default_value_t = 0.2)]
    kmin: f64,
    /// Upper end of the frequency range, units of 1/d.
    #[arg(long, default_value_t = 8.0)]
    kmax: f64,
    /// Physical cell length; rescales the output columns only.
    #[arg(long, default_value_t = 1.0)]
    d: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Transmission spectrum T_N(k) on a uniform frequency grid.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Number of grid points.
        #[arg(long, default_value_t = 2000)]
        points: usize,
        /// Override the perturbation scale stored in the input.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// Perfect transmission resonances of every complete pass band in range.
    Ptrs {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Complex wave field at one frequency (--kmin) or at a resonance.
    Field {
        #[command(flatten)]
        common: CommonArgs,
        /// Evaluate at this resonance number with the symmetrizing amplitude
        /// (the resonance is searched within [kmin, kmax]).
        #[arg(long)]
        protect: Option<usize>,
        /// Incidence side.
        #[arg(long, default_value = "left")]
        side: String,
        /// Override the perturbation scale stored in the input.
        #[arg(long)]
        epsilon: Option<f64>,
    },
    /// First-order resonance shifts under the input's perturbation block.
    Shift {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Solve scatterer strengths protecting the chosen resonances.
    Design {
        #[command(flatten)]
        common: CommonArgs,
        /// Scatterer positions: centers:p,... | edges:p,... | abs:x,...
        #[arg(long)]
        positions: String,
        /// Pinned strengths, e.g. c1=12 (1-based index into --positions).
        #[arg(long)]
        fix: String,
        /// Resonance numbers to protect.
        #[arg(long)]
        protect: String,
    },
    /// Design, then tabulate shifts of every resonance (duality check).
    Pairs {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        positions: String,
        #[arg(long)]
        fix: String,
        /// Resonance number the design protects.
        #[arg(long)]
        protect: usize,
    },
    /// Reflectionless modes in the complex frequency plane.
    Modes {
        #[command(flatten)]
        common: CommonArgs,
        /// Newton seeds re+imj,... (default: the resonances of the base).
        #[arg(long)]
        seeds: Option<String>,
    },
    /// Track one transmission peak while rescaling the perturbation.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        /// Tracked resonance number.
        #[arg(long)]
        protect: usize,
        /// Log-spaced grid min:max:count.
        #[arg(long)]
        epsilon: String,
    },
    /// Continue two reflectionless eigenvalues along a symmetric sweep.
    EpTrace {
        #[command(flatten)]
        common: CommonArgs,
        /// The two seeded resonance numbers, e.g. 2,3.
        #[arg(long)]
        protect: String,
        /// Linear grid min:max:count.
        #[arg(long)]
        epsilon: String,
    },
}

enum CliError {
    Validation(String),
    Numerical(String),
}

impl CliError {
    fn validation(msg: impl Into<String>) -> Self {
        CliError::Validation(msg.into())
    }
    fn numerical(msg: impl Into<String>) -> Self {
        CliError::Numerical(msg.into())
    }
}

impl From<SchemaError> for CliError {
    fn from(e: SchemaError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ptrlab::PotentialError> for CliError {
    fn from(e: ptrlab::PotentialError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ptrlab::TransferError> for CliError {
    fn from(e: ptrlab::TransferError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ptrlab::FieldError> for CliError {
    fn from(e: ptrlab::FieldError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ptrlab::ModesError> for CliError {
    fn from(e: ptrlab::ModesError) -> Self {
        CliError::Numerical(e.to_string())
    }
}

impl From<ptrlab::PerturbError> for CliError {
    fn from(e: ptrlab::PerturbError) -> Self {
        use ptrlab::PerturbError::*;
        match &e {
            NoFixedStrength | NotSquare { .. } | BadFixedIndex(_) | NotOnLattice(_, _)
            | BadEpsilonGrid | UnknownResonance(_) | PerturbedBase | Overlay(_) => {
                CliError::Validation(e.to_string())
            }
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// 17 significant digits; '.' decimal separator; no locale dependence.
fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

fn write_artifact(path: &PathBuf, content: &str) -> Result<(), CliError> {
    fs::write(path, content)
        .map_err(|e| CliError::validation(format!("cannot write {}: {e}", path.display())))
}

fn load_spec(path: &PathBuf) -> Result<StructureSpec, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::validation(format!("cannot read {}: {e}", path.display())))?;
    Ok(StructureJson::from_str(&text)?.to_spec()?)
}

fn check_range(kmin: f64, kmax: f64) -> Result<(), CliError> {
    if !(kmin > 0.0) || !(kmax > kmin) {
        return Err(CliError::validation(format!(
            "need 0 < kmin < kmax, got [{kmin}, {kmax}]"
        )));
    }
    Ok(())
}

fn first_complete_band(spec: &StructureSpec, kmin: f64, kmax: f64) -> Result<Band, CliError> {
    check_range(kmin, kmax)?;
    detect_bands(spec.cell(), kmin, kmax)
        .into_iter()
        .find(|b| b.lo_is_edge && b.hi_is_edge)
        .ok_or_else(|| {
            CliError::numerical(format!("no complete pass band inside [{kmin}, {kmax}]"))
        })
}

fn band_records(spec: &StructureSpec, kmin: f64, kmax: f64) -> Result<Vec<PtrRecord>, CliError> {
    let band = first_complete_band(spec, kmin, kmax)?;
    Ok(find_ptrs(spec.cell(), spec.n_cells(), &band)?.records)
}

fn parse_list<T: std::str::FromStr>(text: &str, what: &str) -> Result<Vec<T>, CliError> {
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<T>()
                .map_err(|_| CliError::validation(format!("cannot parse {what} entry '{s}'")))
        })
        .collect()
}

enum PositionsArg {
    Centers(Vec<usize>),
    Edges(Vec<usize>),
    Abs(Vec<f64>),
}

fn parse_positions(text: &str) -> Result<PositionsArg, CliError> {
    let (kind, rest) = text
        .split_once(':')
        .ok_or_else(|| CliError::validation("--positions wants centers:.. | edges:.. | abs:.."))?;
    match kind {
        "centers" => Ok(PositionsArg::Centers(parse_list(rest, "--positions")?)),
        "edges" => Ok(PositionsArg::Edges(parse_list(rest, "--positions")?)),
        "abs" => Ok(PositionsArg::Abs(parse_list(rest, "--positions")?)),
        other => Err(CliError::validation(format!(
            "unknown position kind '{other}'"
        ))),
    }
}

fn resolve_positions(spec: &StructureSpec, arg: &PositionsArg) -> Result<Vec<f64>, CliError> {
    match arg {
        PositionsArg::Centers(ps) => {
            let centers = spec.cell_centers();
            ps.iter()
                .map(|&p| {
                    if p >= 1 && p <= spec.n_cells() {
                        Ok(centers[p - 1])
                    } else {
                        Err(CliError::validation(format!(
                            "center index {p} outside 1..={}",
                            spec.n_cells()
                        )))
                    }
                })
                .collect()
        }
        PositionsArg::Edges(ps) => {
            let edges = spec.cell_edges();
            ps.iter()
                .map(|&p| {
                    if p <= spec.n_cells() {
                        Ok(edges[p])
                    } else {
                        Err(CliError::validation(format!(
                            "edge index {p} outside 0..={}",
                            spec.n_cells()
                        )))
                    }
                })
                .collect()
        }
        PositionsArg::Abs(xs) => Ok(xs.clone()),
    }
}

/// Pinned strengths "c1=12,c3=-4" with 1-based indices into the positions.
fn parse_fixed(text: &str, n_positions: usize) -> Result<Vec<(usize, f64)>, CliError> {
    let mut out = Vec::new();
    for item in text.split(',') {
        let item = item.trim();
        let (name, value) = item
            .split_once('=')
            .ok_or_else(|| CliError::validation(format!("--fix entry '{item}' wants cI=value")))?;
        let idx: usize = name
            .strip_prefix('c')
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| CliError::validation(format!("--fix entry '{item}' wants cI=value")))?;
        if idx < 1 || idx > n_positions {
            return Err(CliError::validation(format!(
                "--fix index {idx} outside 1..={n_positions}"
            )));
        }
        let value: f64 = value
            .parse()
            .map_err(|_| CliError::validation(format!("cannot parse strength '{value}'")))?;
        out.push((idx - 1, value));
    }
    Ok(out)
}

/// Complex seed "re", "re+imj" or "re-imj".
fn parse_seed(text: &str) -> Result<Complex64, CliError> {
    let s = text.trim();
    if let Some(body) = s.strip_suffix('j') {
        // split at the last +/- that is not an exponent sign
        let bytes = body.as_bytes();
        for i in (1..bytes.len()).rev() {
            let c = bytes[i] as char;
            if (c == '+' || c == '-')
                && bytes[i - 1] as char != 'e'
                && bytes[i - 1] as char != 'E'
            {
                let re: f64 = body[..i]
                    .parse()
                    .map_err(|_| CliError::validation(format!("bad seed '{s}'")))?;
                let im: f64 = body[i..]
                    .parse()
                    .map_err(|_| CliError::validation(format!("bad seed '{s}'")))?;
                return Ok(Complex64::new(re, im));
            }
        }
        return Err(CliError::validation(format!("bad seed '{s}'")));
    }
    let re: f64 = s
        .parse()
        .map_err(|_| CliError::validation(format!("bad seed '{s}'")))?;
    Ok(Complex64::new(re, 0.0))
}

/// Epsilon grid "min:max:count".
fn parse_eps_grid(text: &str, log_spaced: bool) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::validation("--epsilon wants min:max:count"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::validation("bad epsilon min"))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::validation("bad epsilon max"))?;
    let count: usize = parts[2]
        .parse()
        .map_err(|_| CliError::validation("bad epsilon count"))?;
    if !(lo > 0.0) || !(hi > lo) || count < 2 {
        return Err(CliError::validation(
            "--epsilon wants 0 < min < max and count >= 2",
        ));
    }
    Ok((0..count)
        .map(|i| {
            let t = i as f64 / (count - 1) as f64;
            if log_spaced {
                lo * (hi / lo).powf(t)
            } else {
                lo + (hi - lo) * t
            }
        })
        .collect())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Spectrum {
            common,
            points,
            epsilon,
        } => {
            let mut spec = load_spec(&common.input)?;
            if let Some(eps) = epsilon {
                spec = spec.with_epsilon(eps)?;
            }
            if points < 2 {
                return Err(CliError::validation("--points must be at least 2"));
            }
            check_range(common.kmin, common.kmax)?;
            let flat = spec.flatten();
            let mut csv = String::from("k,T_N\n");
            for i in 0..points {
                let k =
                    common.kmin + (common.kmax - common.kmin) * i as f64 / (points - 1) as f64;
                let t = transmission(&flat, k);
                let _ = writeln!(csv, "{},{}", fmt_f(k / common.d), fmt_f(t));
            }
            write_artifact(&common.out, &csv)
        }

        Command::Ptrs { common } => {
            let spec = load_spec(&common.input)?;
            check_range(common.kmin, common.kmax)?;
            let complete: Vec<Band> = detect_bands(spec.cell(), common.kmin, common.kmax)
                .into_iter()
                .filter(|b| b.lo_is_edge && b.hi_is_edge)
                .collect();
            if complete.is_empty() {
                return Err(CliError::numerical(format!(
                    "no complete pass band inside [{}, {}]",
                    common.kmin, common.kmax
                )));
            }
            let flat = spec.base().flatten();
            let mut csv = String::from("band,n,phi,k,transmission\n");
            for band in &complete {
                let scan = find_ptrs(spec.cell(), spec.n_cells(), band)?;
                for rec in &scan.records {
                    let _ = writeln!(
                        csv,
                        "{},{},{},{},{}",
                        rec.band,
                        rec.n,
                        fmt_f(rec.phi),
                        fmt_f(rec.k / common.d),
                        fmt_f(transmission(&flat, rec.k))
                    );
                }
                for &k in &scan.accidental {
                    let _ = writeln!(
                        csv,
                        "{},0,nan,{},{}",
                        band.index,
                        fmt_f(k / common.d),
                        fmt_f(transmission(&flat, k))
                    );
                }
            }
            write_artifact(&common.out, &csv)
        }

        Command::Field {
            common,
            protect,
            side,
            epsilon,
        } => {
            let mut spec = load_spec(&common.input)?;
            if let Some(eps) = epsilon {
                spec = spec.with_epsilon(eps)?;
            }
            let side = match side.as_str() {
                "left" => Side::Left,
                "right" => Side::Right,
                other => {
                    return Err(CliError::validation(format!(
                        "--side wants left|right, got '{other}'"
                    )))
                }
            };
            let (freq, amplitude) = match protect {
                Some(n) => {
                    let records = band_records(&spec.base(), common.kmin, common.kmax)?;
                    let rec = records.iter().find(|r| r.n == n).ok_or_else(|| {
                        CliError::validation(format!("resonance {n} not in the first band"))
                    })?;
                    (
                        rec.k,
                        symmetrizing_amplitude(rec.k, spec.total_length(), rec.n),
                    )
                }
                None => {
                    if !(common.kmin > 0.0) {
                        return Err(CliError::validation("--kmin must be positive"));
                    }
                    (common.kmin, Complex64::new(1.0, 0.0))
                }
            };
            let field = solve_field(&spec, freq, side, amplitude);
            let mut csv = String::from("x,re_psi,im_psi,abs_psi,re_dpsi,im_dpsi\n");
            for s in field.samples() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt_f(s.x * common.d),
                    fmt_f(s.psi.re),
                    fmt_f(s.psi.im),
                    fmt_f(s.psi.norm()),
                    fmt_f(s.dpsi.re / common.d),
                    fmt_f(s.dpsi.im / common.d)
                );
            }
            write_artifact(&common.out, &csv)
        }

        Command::Shift { common } => {
            let spec = load_spec(&common.input)?;
            let base = spec.base();
            let records = band_records(&base, common.kmin, common.kmax)?;
            let table = shift_table(&base, &records, spec.perturbation())?;
            let mut csv = String::from("n,k0,re_k1,im_k1,protected\n");
            for row in &table {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{}",
                    row.n,
                    fmt_f(row.k0 / common.d),
                    fmt_f(row.k1.re / common.d),
                    fmt_f(row.k1.im / common.d),
                    row.protected
                );
            }
            write_artifact(&common.out, &csv)
        }

        Command::Design {
            common,
            positions,
            fix,
            protect,
        } => {
            let spec = load_spec(&common.input)?.base();
            let pos = resolve_positions(&spec, &parse_positions(&positions)?)?;
            let fixed = parse_fixed(&fix, pos.len())?;
            let targets: Vec<usize> = parse_list(&protect, "--protect")?;
            let records = band_records(&spec, common.kmin, common.kmax)?;
            let target_records: Vec<PtrRecord> = targets
                .iter()
                .map(|&n| {
                    records.iter().find(|r| r.n == n).copied().ok_or_else(|| {
                        CliError::validation(format!("resonance {n} not in the first band"))
                    })
                })
                .collect::<Result<_, _>>()?;
            let problem = DesignProblem {
                spec0: spec,
                targets: target_records,
                positions: pos,
                fixed,
            };
            let design = design_strengths(&problem)?;
            #[derive(serde::Serialize)]
            struct DesignOut {
                positions: Vec<f64>,
                strengths: Vec<f64>,
                fixed_indices: Vec<usize>,
                targets: Vec<usize>,
                residuals: Vec<f64>,
                condition_number: f64,
            }
            let out = DesignOut {
                positions: design.positions.iter().map(|x| x * common.d).collect(),
                strengths: design.strengths.iter().map(|c| c / common.d).collect(),
                fixed_indices: problem.fixed.iter().map(|(i, _)| i + 1).collect(),
                targets,
                residuals: design.residuals.clone(),
                condition_number: design.condition_number,
            };
            let json = serde_json::to_string_pretty(&out)
                .map_err(|e| CliError::numerical(e.to_string()))?;
            write_artifact(&common.out, &(json + "\n"))
        }

        Command::Pairs {
            common,
            positions,
            fix,
            protect,
        } => {
            let spec = load_spec(&common.input)?.base();
            let pos_arg = parse_positions(&positions)?;
            let placement = match &pos_arg {
                PositionsArg::Centers(_) => Placement::Centers,
                PositionsArg::Edges(_) => Placement::Edges,
                PositionsArg::Abs(_) => {
                    return Err(CliError::validation(
                        "pairs wants centers:.. or edges:.. positions",
                    ))
                }
            };
            let pos = resolve_positions(&spec, &pos_arg)?;
            let fixed = parse_fixed(&fix, pos.len())?;
            let records = band_records(&spec, common.kmin, common.kmax)?;
            let target = records
                .iter()
                .find(|r| r.n == protect)
                .copied()
                .ok_or_else(|| {
                    CliError::validation(format!("resonance {protect} not in the first band"))
                })?;
            let problem = DesignProblem {
                spec0: spec.clone(),
                targets: vec![target],
                positions: pos,
                fixed,
            };
            let design = design_strengths(&problem)?;
            let report = pairing_check(&spec, placement, &design, &records, protect)?;
            let mut csv = String::from("n,k0,re_k1,im_k1,protected,expected\n");
            for row in &report.rows {
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    row.n,
                    fmt_f(row.k0 / common.d),
                    fmt_f(row.k1.re / common.d),
                    fmt_f(row.k1.im / common.d),
                    row.protected,
                    row.expected
                );
            }
            write_artifact(&common.out, &csv)?;
            println!(
                "expected protected set {:?}: {}",
                report.expected_protected,
                if report.satisfied {
                    "satisfied"
                } else {
                    "violated"
                }
            );
            Ok(())
        }

        Command::Modes { common, seeds } => {
            let spec = load_spec(&common.input)?;
            let seed_list: Vec<Complex64> = match seeds {
                Some(text) => text.split(',').map(parse_seed).collect::<Result<_, _>>()?,
                None => band_records(&spec.base(), common.kmin, common.kmax)?
                    .iter()
                    .map(|r| Complex64::new(r.k, 0.0))
                    .collect(),
            };
            let scan = reflectionless_modes(&spec, &seed_list)?;
            for seed in &scan.failed_seeds {
                eprintln!("seed {seed} did not converge; skipped");
            }
            let mut csv = String::from("re_k,im_k,residual,is_real\n");
            for m in &scan.modes {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_f(m.k.re / common.d),
                    fmt_f(m.k.im / common.d),
                    fmt_f(m.residual),
                    m.is_real
                );
            }
            write_artifact(&common.out, &csv)
        }

        Command::Sweep {
            common,
            protect,
            epsilon,
        } => {
            let spec = load_spec(&common.input)?;
            let base = spec.base();
            let pert = spec.perturbation().clone();
            if pert.is_empty() {
                return Err(CliError::validation(
                    "sweep wants a perturbation block in the input",
                ));
            }
            let grid = parse_eps_grid(&epsilon, true)?;
            let records = band_records(&base, common.kmin, common.kmax)?;
            let sweep = epsilon_sweep(&base, &pert, &records, protect, &grid)?;
            let mut csv = String::from("epsilon,peak_k,peak_T,one_minus_T\n");
            for i in 0..sweep.epsilons.len() {
                let _ = writeln!(
                    csv,
                    "{},{},{},{}",
                    fmt_f(sweep.epsilons[i]),
                    fmt_f(sweep.peak_k[i] / common.d),
                    fmt_f(sweep.peak_t[i]),
                    fmt_f(1.0 - sweep.peak_t[i])
                );
            }
            write_artifact(&common.out, &csv)?;
            match sweep.fitted_slope {
                Some(slope) => println!("log-log slope of 1 - T: {slope:.6}"),
                None => println!("log-log slope of 1 - T: not enough points in fit range"),
            }
            if let Some(eps) = sweep.truncated_at {
                println!("peak lost at epsilon = {eps}");
            }
            Ok(())
        }

        Command::EpTrace {
            common,
            protect,
            epsilon,
        } => {
            let spec = load_spec(&common.input)?;
            let base = spec.base();
            let pert = spec.perturbation().clone();
            let pair: Vec<usize> = parse_list(&protect, "--protect")?;
            if pair.len() != 2 {
                return Err(CliError::validation("ep-trace wants --protect na,nb"));
            }
            let grid = parse_eps_grid(&epsilon, false)?;
            let records = band_records(&base, common.kmin, common.kmax)?;
            let seed_of = |n: usize| -> Result<Complex64, CliError> {
                records
                    .iter()
                    .find(|r| r.n == n)
                    .map(|r| Complex64::new(r.k, 0.0))
                    .ok_or_else(|| {
                        CliError::validation(format!("resonance {n} not in the first band"))
                    })
            };
            let seeds = (seed_of(pair[0])?, seed_of(pair[1])?);
            let trace = trace_exceptional_point(&base, &pert, seeds, &grid)?;
            let mut csv = String::from("epsilon,re_ka,im_ka,re_kb,im_kb,gap\n");
            for i in 0..trace.epsilons.len() {
                let (a, b) = (trace.k_a[i], trace.k_b[i]);
                let _ = writeln!(
                    csv,
                    "{},{},{},{},{},{}",
                    fmt_f(trace.epsilons[i]),
                    fmt_f(a.re / common.d),
                    fmt_f(a.im / common.d),
                    fmt_f(b.re / common.d),
                    fmt_f(b.im / common.d),
                    fmt_f((a - b).norm() / common.d)
                );
            }
            write_artifact(&common.out, &csv)?;
            match trace.coalescence_eps {
                Some(eps) => println!("coalescence at epsilon = {eps}"),
                None => println!("no coalescence in the swept range"),
            }
            if let Some(eps) = trace.lost_at {
                println!("continuation lost at epsilon = {eps}");
            }
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
