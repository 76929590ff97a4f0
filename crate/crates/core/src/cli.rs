//! Command-line front end.
//!
//! Every subcommand reads a phase matrix as JSON from `--in` or stdin and
//! writes JSON (or CSV for sampled curves) to stdout or `--out`. Verdict
//! subcommands emit a [`Report`]; with `--assert` a `fail` verdict turns
//! into exit code 1. Usage and input errors exit with 2.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::groupsim::{run_scenario, Scenario};
use crate::io::{from_json, to_json, MatrixRecord};
use crate::linalg::{self, CVector};
use crate::measure::{
    density, effect_operator, effect_norm, et_quadrature_oracle, Arc, CoherentVector, DensityMatrix,
    DiagonalState, DEFAULT_QUAD_POINTS, DEFAULT_R_MAX,
};
use crate::optimal::{
    approx_sharp_check, canonical_channel, default_recovery_depth, extremal_check, post_equiv_class,
    preclean_check, real_nonextremal_shortcut, recover_state, smear, CircleMeasure, SharpnessVerdict,
    DEFAULT_K_MAX, DEFAULT_TOL_EXTREMAL, DEFAULT_TOL_RECOVERY, DEFAULT_WINDOW,
};
use crate::phasecore::{self, u_equivalent, PhaseMatrix, DEFAULT_EPS_PSD, DEFAULT_EPS_RANK};

/// Config file looked up in the working directory when `--config` is absent.
pub const CONFIG_FILE: &str = "phaseopt.cfg";
/// Environment variable overriding the default dimension.
pub const DIM_ENV: &str = "PHASEOPT_DIM";
/// Pass threshold of `channel-identity`.
pub const CHANNEL_IDENTITY_TOL: f64 = 1e-10;
/// Pass threshold of `oracle-et`.
pub const ORACLE_TOL: f64 = 1e-6;

/// Defaults shared by the subcommands.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Config {
    pub dim: usize,
    pub eps_psd: f64,
    pub eps_rank: f64,
    pub tol_sharp: f64,
    pub tol_equiv: f64,
    pub grid: usize,
    pub recovery_depth: Option<usize>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            dim: 64,
            eps_psd: DEFAULT_EPS_PSD,
            eps_rank: DEFAULT_EPS_RANK,
            tol_sharp: crate::optimal::DEFAULT_TOL_SHARP,
            tol_equiv: crate::optimal::DEFAULT_TOL_EQUIV,
            grid: 512,
            recovery_depth: None,
        }
    }
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.parse().map_err(|_| Error::Input(format!("config key \"{key}\": cannot parse \"{value}\"")))
}

impl Config {
    /// Applies `key = value` lines; `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (number, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Input(format!("config line {}: expected key = value", number + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dim" => config.dim = parse_value(key, value)?,
                "eps_psd" => config.eps_psd = parse_value(key, value)?,
                "eps_rank" => config.eps_rank = parse_value(key, value)?,
                "tol_sharp" => config.tol_sharp = parse_value(key, value)?,
                "tol_equiv" => config.tol_equiv = parse_value(key, value)?,
                "grid" => config.grid = parse_value(key, value)?,
                "recovery_depth" => config.recovery_depth = Some(parse_value(key, value)?),
                other => return Err(Error::Input(format!("config line {}: unknown key \"{other}\"", number + 1))),
            }
        }
        config.check()?;
        Ok(config)
    }

    /// Defaults, then the config file (`explicit` or `./phaseopt.cfg` if
    /// present), then `PHASEOPT_DIM`.
    pub fn load(explicit: Option<&Path>, env_dim: Option<&str>) -> Result<Self> {
        let mut config = match explicit {
            Some(path) => Self::parse(&std::fs::read_to_string(path)?)?,
            None if Path::new(CONFIG_FILE).is_file() => Self::parse(&std::fs::read_to_string(CONFIG_FILE)?)?,
            None => Self::default(),
        };
        if let Some(dim) = env_dim {
            config.dim = parse_value(DIM_ENV, dim.trim())?;
        }
        config.check()?;
        Ok(config)
    }

    fn check(&self) -> Result<()> {
        if self.dim < 2 {
            return Err(Error::Input(format!("dim must be at least 2, got {}", self.dim)));
        }
        let tolerances =
            [("eps_psd", self.eps_psd), ("eps_rank", self.eps_rank), ("tol_sharp", self.tol_sharp), ("tol_equiv", self.tol_equiv)];
        if let Some((name, value)) = tolerances.iter().find(|(_, v)| !(*v > 0.0)) {
            return Err(Error::Input(format!("{name} must be positive, got {value}")));
        }
        if self.grid == 0 {
            return Err(Error::Input("grid must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    /// The criterion does not apply to this input; never an assertion
    /// failure.
    Inapplicable,
}

/// Output of every verdict subcommand.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub check: String,
    pub verdict: Verdict,
    pub truncation_dim: usize,
    pub tolerances: BTreeMap<String, f64>,
    pub witnesses: Value,
}

impl Report {
    fn new(check: &str, passed: bool, truncation_dim: usize, tolerances: &[(&str, f64)], witnesses: Value) -> Self {
        Self {
            check: check.into(),
            verdict: if passed { Verdict::Pass } else { Verdict::Fail },
            truncation_dim,
            tolerances: tolerances.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            witnesses,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "phaseopt", version, about = "Covariant phase observables as truncated phase matrices")]
struct Cli {
    /// key = value config file (default: ./phaseopt.cfg if present)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Default)]
struct Output {
    /// Write to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Input {
    /// Read the phase matrix from this file instead of stdin
    #[arg(long = "in")]
    input: Option<PathBuf>,
    /// Exit with status 1 when the verdict is fail
    #[arg(long)]
    assert: bool,
}

#[derive(Args, Debug)]
struct StateArgs {
    /// Density matrix JSON file
    #[arg(long, conflicts_with_all = ["number", "coherent"])]
    state: Option<PathBuf>,
    /// Number state |k⟩
    #[arg(long)]
    number: Option<usize>,
    /// Truncated coherent state, "re,im"
    #[arg(long, allow_hyphen_values = true)]
    coherent: Option<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a phase matrix
    Gen {
        #[command(subcommand)]
        kind: GenKind,
        #[command(flatten)]
        output: Output,
    },
    /// Check Hermiticity, unit diagonal, moduli and positivity
    Validate {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
    /// Outcome density on a grid over [0, 2π), as CSV
    Density {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        state: StateArgs,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Canonical effect norm of an arc across truncations, as CSV
    NormSweep {
        /// Comma-separated dimensions
        #[arg(long, default_value = "4,16,64,256")]
        dims: String,
        /// Arc "start,length"; angles accept pi, e.g. "0,pi"
        #[arg(long, default_value = "pi,pi")]
        arc: String,
        #[command(flatten)]
        output: Output,
    },
    /// Run an optimality or equivalence check
    Check {
        #[command(subcommand)]
        kind: CheckKind,
        #[command(flatten)]
        output: Output,
    },
    /// Postprocess with a measure on the circle
    Smear {
        #[command(flatten)]
        input: Input,
        /// haar | dirac:X | fejer:ORDER[@CENTRE] | atoms:X,Y,... | @file.json
        #[arg(long, allow_hyphen_values = true)]
        nu: String,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the density of E in ρ with the canonical density in Φ_E(ρ)
    ChannelIdentity {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        state: StateArgs,
        /// Random states to try when no state is given
        #[arg(long, default_value_t = 20)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        grid: Option<usize>,
        #[command(flatten)]
        output: Output,
    },
    /// Recover the generating diagonal state
    RecoverState {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        depth: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_TOL_RECOVERY)]
        tol: f64,
        #[command(flatten)]
        output: Output,
    },
    /// Compare the state-generated effect with direct displacement averaging
    OracleEt {
        /// Diagonal state, "w@s,w@s,..."
        #[arg(long, default_value = "1.0@0")]
        levels: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value = "0,pi")]
        arc: String,
        #[arg(long, default_value_t = DEFAULT_R_MAX)]
        r_max: f64,
        #[arg(long, default_value_t = DEFAULT_QUAD_POINTS)]
        quad_points: usize,
        #[arg(long)]
        assert: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Run a finite cyclic-group scenario file
    Groupsim {
        #[command(flatten)]
        input: Input,
        #[command(flatten)]
        output: Output,
    },
}

#[derive(Subcommand, Debug)]
enum GenKind {
    Canonical {
        #[arg(long)]
        dim: Option<usize>,
    },
    Chessboard {
        /// Odd-even coherence, "re,im" or "re"
        #[arg(long, allow_hyphen_values = true)]
        xi: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    State {
        /// Diagonal state, "w@s,w@s,..."
        #[arg(long)]
        levels: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    Eta {
        /// JSON array of vectors, each an array of [re, im]
        #[arg(long)]
        vectors: PathBuf,
    },
    Example4 {
        #[arg(long, default_value_t = 3)]
        n0: usize,
        #[arg(long)]
        dim: Option<usize>,
    },
    Example5 {
        #[arg(long)]
        dim: Option<usize>,
    },
}

#[derive(Subcommand, Debug)]
enum CheckKind {
    Sharp {
        #[command(flatten)]
        input: Input,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[arg(long, default_value_t = DEFAULT_K_MAX)]
        k_max: usize,
    },
    Extremal {
        #[command(flatten)]
        input: Input,
    },
    Rank {
        #[command(flatten)]
        input: Input,
    },
    Preclean {
        #[command(flatten)]
        input: Input,
    },
    Postclass {
        #[command(flatten)]
        input: Input,
        /// Second phase matrix
        #[arg(long)]
        other: PathBuf,
    },
    Uequiv {
        #[command(flatten)]
        input: Input,
        #[arg(long)]
        other: PathBuf,
    },
}

/// Parses `"w@s,w@s"` into a diagonal state; weights must sum to one.
pub fn parse_levels(text: &str) -> Result<DiagonalState> {
    let mut weights = Vec::new();
    let mut seen = Vec::new();
    for item in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (w, s) = item
            .split_once('@')
            .ok_or_else(|| Error::Input(format!("level \"{item}\" is not of the form weight@level")))?;
        let w: f64 = w.trim().parse().map_err(|_| Error::Input(format!("bad weight in \"{item}\"")))?;
        let s: usize = s.trim().parse().map_err(|_| Error::Input(format!("bad level in \"{item}\"")))?;
        if weights.len() <= s {
            weights.resize(s + 1, 0.0);
            seen.resize(s + 1, false);
        }
        if std::mem::replace(&mut seen[s], true) {
            return Err(Error::Input(format!("level {s} given twice")));
        }
        weights[s] = w;
    }
    if weights.is_empty() {
        return Err(Error::Input("no levels given".into()));
    }
    DiagonalState::new(weights)
}

/// Parses an angle: a float, optionally followed by or written as a
/// multiple of `pi` (`pi`, `0.5pi`, `pi/2`, `-pi/4`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let bad = || Error::Input(format!("cannot parse angle \"{text}\""));
    let t = text.trim();
    let (numerator, divisor) = match t.split_once('/') {
        Some((a, b)) => (a.trim(), b.trim().parse::<f64>().map_err(|_| bad())?),
        None => (t, 1.0),
    };
    let value = match numerator.strip_suffix("pi") {
        Some(factor) => {
            let factor = factor.trim().trim_end_matches('*');
            let factor = match factor {
                "" | "+" => 1.0,
                "-" => -1.0,
                f => f.parse::<f64>().map_err(|_| bad())?,
            };
            factor * PI
        }
        None => numerator.parse::<f64>().map_err(|_| bad())?,
    };
    Ok(value / divisor)
}

/// Parses `"start,length"`.
pub fn parse_arc(text: &str) -> Result<Arc> {
    let (start, length) =
        text.split_once(',').ok_or_else(|| Error::Input(format!("arc \"{text}\" is not start,length")))?;
    Arc::new(parse_angle(start)?, parse_angle(length)?)
}

/// Parses `"re,im"` or `"re"`.
pub fn parse_complex(text: &str) -> Result<Complex64> {
    let bad = || Error::Input(format!("cannot parse complex number \"{text}\""));
    let mut parts = text.split(',').map(|p| p.trim().parse::<f64>());
    let re = parts.next().ok_or_else(bad)?.map_err(|_| bad())?;
    let im = parts.next().transpose().map_err(|_| bad())?.unwrap_or(0.0);
    if parts.next().is_some() {
        return Err(bad());
    }
    Ok(Complex64::new(re, im))
}

/// Parses a circle measure description, see `smear --help`.
pub fn parse_measure(text: &str) -> Result<CircleMeasure> {
    let bad = || Error::Input(format!("unknown measure \"{text}\""));
    if text == "haar" {
        return Ok(CircleMeasure::haar());
    }
    if let Some(path) = text.strip_prefix('@') {
        return from_json(&std::fs::read_to_string(path)?);
    }
    let (kind, arg) = text.split_once(':').ok_or_else(bad)?;
    match kind {
        "dirac" => Ok(CircleMeasure::dirac(parse_angle(arg)?)),
        "fejer" => {
            let (order, centre) = arg.split_once('@').unwrap_or((arg, "0"));
            let order = order.trim().parse().map_err(|_| bad())?;
            Ok(CircleMeasure::fejer(order, parse_angle(centre)?))
        }
        "atoms" => {
            let angles = arg.split(',').map(parse_angle).collect::<Result<Vec<_>>>()?;
            CircleMeasure::uniform_atoms(&angles)
        }
        _ => Err(bad()),
    }
}

fn read_text(path: Option<&Path>, stdin: &mut dyn Read) -> Result<String> {
    match path {
        Some(p) => Ok(std::fs::read_to_string(p)?),
        None => {
            let mut text = String::new();
            stdin.read_to_string(&mut text)?;
            Ok(text)
        }
    }
}

fn read_phase(path: Option<&Path>, stdin: &mut dyn Read) -> Result<PhaseMatrix> {
    from_json(&read_text(path, stdin)?)
}

fn resolve_state(args: &StateArgs, dim: usize) -> Result<Option<DensityMatrix>> {
    if let Some(path) = &args.state {
        let rho: DensityMatrix = from_json(&std::fs::read_to_string(path)?)?;
        if rho.dim() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: rho.dim() });
        }
        return Ok(Some(rho));
    }
    if let Some(k) = args.number {
        return DensityMatrix::number_state(k, dim).map(Some);
    }
    if let Some(z) = &args.coherent {
        return Ok(Some(CoherentVector::new(parse_complex(z)?, dim)?.to_density()));
    }
    Ok(None)
}

fn gen(kind: &GenKind, config: &Config) -> Result<PhaseMatrix> {
    let dim = |d: &Option<usize>| d.unwrap_or(config.dim);
    match kind {
        GenKind::Canonical { dim: d } => PhaseMatrix::canonical(dim(d)),
        GenKind::Chessboard { xi, dim: d } => PhaseMatrix::chessboard(parse_complex(xi)?, dim(d)),
        GenKind::State { levels, dim: d } => PhaseMatrix::state_generated(&parse_levels(levels)?, dim(d)),
        GenKind::Eta { vectors } => {
            let raw: Vec<Vec<Complex64>> = from_json(&std::fs::read_to_string(vectors)?)?;
            let vectors: Vec<CVector> = raw.into_iter().map(CVector::from_vec).collect();
            PhaseMatrix::from_eta(&vectors)
        }
        GenKind::Example4 { n0, dim: d } => PhaseMatrix::example4(*n0, dim(d)),
        GenKind::Example5 { dim: d } => PhaseMatrix::example5(dim(d)),
    }
}

fn validate_report(text: &str, config: &Config) -> Result<Report> {
    let record: MatrixRecord = from_json(text)?;
    let validation = phasecore::validate(&record.to_matrix()?, config.eps_psd);
    let violations: Vec<String> = validation.violations.iter().map(|v| v.to_string()).collect();
    Ok(Report::new(
        "validate",
        validation.passed(),
        validation.dim,
        &[("eps_psd", config.eps_psd), ("structural", phasecore::STRUCTURAL_TOL)],
        json!({ "min_eigenvalue": validation.min_eigenvalue, "violations": violations }),
    ))
}

fn check(kind: &CheckKind, config: &Config, stdin: &mut dyn Read) -> Result<(Report, bool)> {
    let report = match kind {
        CheckKind::Sharp { input, window, k_max } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            let r = approx_sharp_check(&phase, *window, *k_max, config.tol_sharp)?;
            let report = Report::new(
                "sharp",
                r.verdict == SharpnessVerdict::Consistent,
                phase.dim(),
                &[("tol_sharp", config.tol_sharp)],
                serde_json::to_value(&r)?,
            );
            (report, input.assert)
        }
        CheckKind::Extremal { input } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            let eta = phase.gram_factor(config.eps_rank);
            let r = extremal_check(&eta, DEFAULT_TOL_EXTREMAL);
            let certificate = if r.extremal {
                None
            } else {
                real_nonextremal_shortcut(&phase, config.eps_rank, DEFAULT_TOL_EXTREMAL)
            };
            let report = Report::new(
                "extremal",
                r.extremal,
                phase.dim(),
                &[("eps_rank", config.eps_rank), ("tol_extremal", DEFAULT_TOL_EXTREMAL)],
                json!({ "span": r, "real_certificate": certificate }),
            );
            (report, input.assert)
        }
        CheckKind::Rank { input } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            // the rank at a single truncation says little about the limit,
            // so the growth over nested truncations is reported as well
            let mut dims: Vec<usize> = [phase.dim() / 4, phase.dim() / 2, phase.dim()]
                .into_iter()
                .filter(|&d| d >= 1)
                .collect();
            dims.dedup();
            let growth = dims
                .iter()
                .map(|&d| Ok(json!({ "dim": d, "rank": phase.truncate(d)?.rank(config.eps_rank) })))
                .collect::<Result<Vec<_>>>()?;
            let report = Report::new(
                "rank",
                true,
                phase.dim(),
                &[("eps_rank", config.eps_rank)],
                json!({ "rank": phase.rank(config.eps_rank), "growth": growth }),
            );
            (report, input.assert)
        }
        CheckKind::Preclean { input } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            let tol = config.tol_equiv;
            let r = preclean_check(&phase, tol, config.eps_rank);
            let report = Report::new(
                "preclean",
                r.n0.is_some(),
                phase.dim(),
                &[("tol_equiv", tol), ("eps_rank", config.eps_rank)],
                serde_json::to_value(&r)?,
            );
            (report, input.assert)
        }
        CheckKind::Postclass { input, other } => {
            let first = read_phase(input.input.as_deref(), stdin)?;
            let second = read_phase(Some(other), stdin)?;
            let tolerances = [("tol_sharp", config.tol_sharp), ("tol_equiv", config.tol_equiv)];
            let report = match post_equiv_class(
                &first,
                &second,
                (DEFAULT_WINDOW, DEFAULT_K_MAX, config.tol_sharp),
                config.tol_equiv,
            ) {
                Ok(x) => Report::new("postclass", x.is_some(), first.dim(), &tolerances, json!({ "translation": x })),
                Err(Error::Inapplicable(reason)) => Report {
                    verdict: Verdict::Inapplicable,
                    ..Report::new("postclass", false, first.dim(), &tolerances, json!({ "reason": reason }))
                },
                Err(e) => return Err(e),
            };
            (report, input.assert)
        }
        CheckKind::Uequiv { input, other } => {
            let first = read_phase(input.input.as_deref(), stdin)?;
            let second = read_phase(Some(other), stdin)?;
            let lambda = u_equivalent(&first, &second, config.tol_equiv)?;
            let report = Report::new(
                "uequiv",
                lambda.is_some(),
                first.dim(),
                &[("tol_equiv", config.tol_equiv)],
                json!({ "lambda": lambda }),
            );
            (report, input.assert)
        }
    };
    Ok(report)
}

fn channel_identity(
    phase: &PhaseMatrix,
    state: &StateArgs,
    samples: usize,
    seed: u64,
    grid: usize,
) -> Result<Report> {
    let dim = phase.dim();
    let states = match resolve_state(state, dim)? {
        Some(rho) => vec![rho],
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples).map(|_| DensityMatrix::random(dim, &mut rng)).collect()
        }
    };
    let canonical = PhaseMatrix::canonical(dim)?;
    let channel = canonical_channel(phase);
    let mut deviations = Vec::with_capacity(states.len());
    for rho in &states {
        let direct = density(phase, rho, grid)?;
        let through = density(&canonical, &channel.apply(rho)?, grid)?;
        deviations.push(direct.max_abs_diff(&through));
    }
    let max = deviations.iter().copied().fold(0.0, f64::max);
    Ok(Report::new(
        "channel-identity",
        max < CHANNEL_IDENTITY_TOL,
        dim,
        &[("deviation", CHANNEL_IDENTITY_TOL)],
        json!({ "states": states.len(), "grid": grid, "max_deviation": max }),
    ))
}

fn recover(phase: &PhaseMatrix, depth: Option<usize>, tol: f64, config: &Config) -> Result<Report> {
    let depth = depth
        .or(config.recovery_depth)
        .or_else(|| default_recovery_depth(phase.dim()))
        .ok_or_else(|| Error::Input(format!("dimension {} is too small for recovery", phase.dim())))?;
    let tolerances = [("tol_recovery", tol)];
    Ok(match recover_state(phase, depth, tol) {
        Ok(r) => Report::new("recover-state", true, phase.dim(), &tolerances, serde_json::to_value(&r)?),
        Err(Error::NotStateGenerated(reason)) => Report::new(
            "recover-state",
            false,
            phase.dim(),
            &tolerances,
            json!({ "depth": depth, "reason": reason }),
        ),
        Err(e) => return Err(e),
    })
}

fn oracle_et(levels: &str, dim: usize, arc: &str, r_max: f64, quad_points: usize) -> Result<Report> {
    let state = parse_levels(levels)?;
    let arc = parse_arc(arc)?;
    let oracle = et_quadrature_oracle(&state, &arc, dim, r_max, quad_points)?;
    let closed = effect_operator(&PhaseMatrix::state_generated(&state, dim)?, &arc);
    let deviation = linalg::max_abs_diff(&oracle, &closed);
    Ok(Report::new(
        "oracle-et",
        deviation < ORACLE_TOL,
        dim,
        &[("entrywise", ORACLE_TOL)],
        json!({ "max_entry_deviation": deviation, "r_max": r_max, "quad_points": quad_points }),
    ))
}

fn norm_sweep(dims: &str, arc: &str) -> Result<String> {
    let arc = parse_arc(arc)?;
    let mut out = String::from("dim,norm\n");
    for d in dims.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let dim: usize = d.parse().map_err(|_| Error::Input(format!("bad dimension \"{d}\"")))?;
        let norm = effect_norm(&PhaseMatrix::canonical(dim)?, &arc);
        out.push_str(&format!("{dim},{norm:.16e}\n"));
    }
    Ok(out)
}

fn groupsim(text: &str) -> Result<Report> {
    let scenario: Scenario = from_json(text)?;
    let r = run_scenario(&scenario)?;
    Ok(Report::new(
        "groupsim",
        r.passed,
        r.dim,
        &[("group", crate::groupsim::GROUP_TOL)],
        serde_json::to_value(&r)?,
    ))
}

/// What a subcommand produced.
enum Outcome {
    Text(String),
    Verdict { report: Report, assert: bool },
}

fn dispatch(cli: &Cli, config: &Config, stdin: &mut dyn Read) -> Result<Outcome> {
    let verdict = |report: Report, assert: bool| Ok(Outcome::Verdict { report, assert });
    match &cli.command {
        Command::Gen { kind, .. } => Ok(Outcome::Text(to_json(&gen(kind, config)?)?)),
        Command::Validate { input, .. } => {
            verdict(validate_report(&read_text(input.input.as_deref(), stdin)?, config)?, input.assert)
        }
        Command::Density { input, state, grid, .. } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            let rho = resolve_state(state, phase.dim())?
                .unwrap_or_else(|| DensityMatrix::maximally_mixed(phase.dim()));
            Ok(Outcome::Text(density(&phase, &rho, grid.unwrap_or(config.grid))?.to_csv()))
        }
        Command::NormSweep { dims, arc, .. } => Ok(Outcome::Text(norm_sweep(dims, arc)?)),
        Command::Check { kind, .. } => {
            let (report, assert) = check(kind, config, stdin)?;
            verdict(report, assert)
        }
        Command::Smear { input, nu, .. } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            Ok(Outcome::Text(to_json(&smear(&phase, &parse_measure(nu)?))?))
        }
        Command::ChannelIdentity { input, state, samples, seed, grid, .. } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            verdict(channel_identity(&phase, state, *samples, *seed, grid.unwrap_or(config.grid))?, input.assert)
        }
        Command::RecoverState { input, depth, tol, .. } => {
            let phase = read_phase(input.input.as_deref(), stdin)?;
            verdict(recover(&phase, *depth, *tol, config)?, input.assert)
        }
        Command::OracleEt { levels, dim, arc, r_max, quad_points, assert, .. } => {
            verdict(oracle_et(levels, dim.unwrap_or(12), arc, *r_max, *quad_points)?, *assert)
        }
        Command::Groupsim { input, .. } => {
            verdict(groupsim(&read_text(input.input.as_deref(), stdin)?)?, input.assert)
        }
    }
}

fn output_path(command: &Command) -> Option<&Path> {
    let out = match command {
        Command::Gen { output, .. }
        | Command::Validate { output, .. }
        | Command::Density { output, .. }
        | Command::NormSweep { output, .. }
        | Command::Check { output, .. }
        | Command::Smear { output, .. }
        | Command::ChannelIdentity { output, .. }
        | Command::RecoverState { output, .. }
        | Command::OracleEt { output, .. }
        | Command::Groupsim { output, .. } => output,
    };
    out.out.as_deref()
}

/// Runs with explicit streams; returns the exit code.
pub fn run_with<I, T>(argv: I, stdin: &mut dyn Read, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = Config::load(cli.config.as_deref(), std::env::var(DIM_ENV).ok().as_deref())
        .and_then(|config| dispatch(&cli, &config, stdin))
        .and_then(|outcome| {
            let (text, code) = match outcome {
                Outcome::Text(text) => (text, 0),
                Outcome::Verdict { report, assert } => {
                    let code = i32::from(assert && report.verdict == Verdict::Fail);
                    (to_json(&report)?, code)
                }
            };
            match output_path(&cli.command) {
                Some(path) => std::fs::write(path, &text)?,
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(code)
        });
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            2
        }
    }
}

/// Runs against the process streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    run_with(argv, &mut std::io::stdin().lock(), &mut std::io::stdout().lock(), &mut std::io::stderr().lock())
}
