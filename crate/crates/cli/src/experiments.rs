//! classify, escape-rate, frontier and gamma-cdf.

use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use rotorgw::frontier::{deepest_member_path, path_boundary_ratio, FRONTIER_CSV_HEADER};
use rotorgw::rotor_walk::ESCAPE_CSV_HEADER;
use rotorgw::srw_gamma::k_closed_form;
use rotorgw::{
    cdf_fixed_point, classify as classify_config, complete_sink, escape_count, escape_count_adaptive, frontier_step,
    k_constant, keyed_gamma_bounds, solve_hitting, AdaptiveDepth, FixedPointOptions, FrontierState, GammaBounds,
    OffspringDistribution, TreeArena,
};
use serde::Serialize;

use crate::config::{load_file, resolve_common, CommonArgs, Depth, Echo};
use crate::output::{emit, emit_summary, header, VERSION};
use crate::{CliError, Status};

/// Runs `f` on every item using `jobs` threads; results keep the input order.
pub(crate) fn par_map<T, F>(jobs: usize, items: &[u64], f: F) -> Result<Vec<T>, CliError>
where
    T: Send,
    F: Fn(u64) -> Result<T, CliError> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Failed(format!("thread pool: {e}")))?;
    pool.install(|| items.par_iter().map(|&s| f(s)).collect())
}

// ---------------------------------------------------------------- classify

#[derive(Args, Debug)]
pub struct ClassifyArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Serialize)]
struct ClassifyReport {
    version: &'static str,
    xi: String,
    q: String,
    #[serde(rename = "E_nu")]
    e_nu: f64,
    #[serde(rename = "E_nu_exact")]
    e_nu_exact: Option<String>,
    nu: Vec<f64>,
    verdict: String,
    exact: bool,
}

pub fn classify(args: ClassifyArgs) -> Result<Status, CliError> {
    let file = load_file(&args.common)?;
    let common = resolve_common(&args.common, &file, true)?;
    let c = classify_config(&common.xi, &common.q)?;
    let report = ClassifyReport {
        version: VERSION,
        xi: common.xi.describe(),
        q: common.q.describe(),
        e_nu: c.law.mean,
        e_nu_exact: c.law.exact_mean.as_ref().map(ToString::to_string),
        nu: c.law.probs.clone(),
        verdict: c.verdict.to_string(),
        exact: c.exact,
    };
    let mut text = serde_json::to_string_pretty(&report).expect("report serializes");
    text.push('\n');
    emit(common.out.as_deref(), &text)?;
    Ok(Status::Ok)
}

// ------------------------------------------------------------- escape-rate

#[derive(Args, Debug)]
pub struct EscapeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Walkers per seed.
    #[arg(long)]
    pub n: Option<u64>,
    /// `fixed:<H>` or `adaptive` (doubling from 8 until E_n moves < 0.1%).
    #[arg(long)]
    pub depth: Option<Depth>,
    /// Depth cap for the per-seed escape-probability bounds.
    #[arg(long)]
    pub gamma_depth: Option<u32>,
    /// Also write the outcome sequences, run-length encoded, to this file.
    #[arg(long)]
    pub rle: Option<PathBuf>,
}

/// Largest tree the streamed bound recursion is allowed to visit, in expectation.
const GAMMA_NODE_BUDGET: f64 = 2e7;

fn gamma_depth_within_budget(dist: &OffspringDistribution, cap: u32) -> u32 {
    let m = dist.mean();
    let (mut total, mut level, mut h) = (1.0, 1.0, 0);
    while h < cap {
        level *= m;
        if total + level > GAMMA_NODE_BUDGET {
            break;
        }
        total += level;
        h += 1;
    }
    h.max(1)
}

/// Bracket on the escape probability of the seed's tree.
#[derive(Serialize)]
struct Bounds {
    lower: f64,
    upper: f64,
    #[serde(rename = "H")]
    depth: u32,
}

impl From<GammaBounds> for Bounds {
    fn from(b: GammaBounds) -> Self {
        Self { lower: b.lower, upper: b.upper, depth: b.depth }
    }
}

#[derive(Serialize)]
struct EscapeSeed {
    seed: u64,
    #[serde(rename = "H")]
    depth: u32,
    #[serde(rename = "E_n")]
    escapes: u64,
    ratio: f64,
    /// `[H, E_n]` for every depth tried.
    history: Vec<(u32, u64)>,
    converged: bool,
    gamma: Bounds,
    #[serde(skip)]
    row: String,
    #[serde(skip)]
    rle: String,
}

#[derive(Serialize)]
struct EscapeSummary {
    version: &'static str,
    config: Echo,
    mean_ratio: f64,
    all_converged: bool,
    seeds: Vec<EscapeSeed>,
}

pub fn escape_rate(args: EscapeArgs) -> Result<Status, CliError> {
    let file = load_file(&args.common)?;
    let common = resolve_common(&args.common, &file, false)?;
    let n = args.n.or(file.n).unwrap_or(10_000);
    if n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let depth = match args.depth {
        Some(d) => d,
        None => file.depth()?.unwrap_or(Depth::Adaptive),
    };
    let gamma_cap = args.gamma_depth.or(file.gamma_depth).unwrap_or(12);
    if gamma_cap == 0 {
        return Err(CliError::Validation("--gamma-depth must be at least 1".into()));
    }
    let rle_path = args.rle.clone().or_else(|| file.rle.clone());
    let echo = Echo::new(&common).with("n", n).with("depth", depth.to_string()).with("gamma_depth", gamma_cap);

    let make = |seed: u64| TreeArena::with_matrix(common.xi.clone(), common.q.clone(), seed);
    let seeds = par_map(common.jobs, &common.seeds, |seed| {
        let (stats, history, converged) = match depth {
            Depth::Fixed(h) => {
                let stats = escape_count(&mut make(seed)?, n, h)?;
                let history = vec![(h, stats.escapes)];
                (stats, history, true)
            }
            Depth::Adaptive => {
                let r = escape_count_adaptive(|| make(seed), n, AdaptiveDepth::default())?;
                (r.stats, r.history, r.converged)
            }
        };
        let g = gamma_depth_within_budget(&common.xi, stats.depth.min(gamma_cap));
        Ok(EscapeSeed {
            seed,
            depth: stats.depth,
            escapes: stats.escapes,
            ratio: stats.ratio(),
            history,
            converged,
            gamma: keyed_gamma_bounds(&common.xi, seed, g).into(),
            row: stats.csv_row(seed),
            rle: stats.outcomes_rle(),
        })
    })?;

    let mut csv = header("escape-rate", &echo);
    csv.push_str(ESCAPE_CSV_HEADER);
    csv.push('\n');
    for s in &seeds {
        csv.push_str(&s.row);
        csv.push('\n');
    }
    emit(common.out.as_deref(), &csv)?;
    if let Some(path) = rle_path {
        let mut dump = header("escape-rate outcomes", &echo);
        dump.push_str("seed,H,outcomes\n");
        for s in &seeds {
            dump.push_str(&format!("{},{},{}\n", s.seed, s.depth, s.rle));
        }
        emit(Some(&path), &dump)?;
    }

    let all_converged = seeds.iter().all(|s| s.converged);
    let mean_ratio = seeds.iter().map(|s| s.ratio).sum::<f64>() / seeds.len() as f64;
    emit_summary(
        common.summary.as_deref(),
        &EscapeSummary { version: VERSION, config: echo, mean_ratio, all_converged, seeds },
    )?;
    Ok(if all_converged { Status::Ok } else { Status::NotConverged })
}

// ---------------------------------------------------------------- frontier

#[derive(Args, Debug)]
pub struct FrontierArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Particles to inject; snapshots at every power of two and at n.
    #[arg(long)]
    pub n: Option<u64>,
}

/// Snapshots are only summarised from this many particles on.
const SUMMARY_FROM: u64 = 1024;

#[derive(Serialize)]
struct FrontierSeed {
    seed: u64,
    /// min |F(n)|/n over snapshots with n >= 1024.
    min_size_ratio: Option<f64>,
    /// max M(n)/n over snapshots with n >= 1024.
    max_height_ratio: Option<f64>,
    /// Boundary-to-volume ratio of the root path to the deepest member at the last snapshot.
    path_boundary_ratio: Option<f64>,
    audit_holds: bool,
    #[serde(skip)]
    rows: Vec<String>,
}

#[derive(Serialize)]
struct FrontierSummary {
    version: &'static str,
    config: Echo,
    audit_holds: bool,
    seeds: Vec<FrontierSeed>,
}

fn checkpoints(n: u64) -> Vec<u64> {
    let mut out: Vec<u64> = std::iter::successors(Some(1u64), |&k| k.checked_mul(2)).take_while(|&k| k <= n).collect();
    if out.last() != Some(&n) {
        out.push(n);
    }
    out
}

fn frontier_seed(arena: &mut TreeArena, seed: u64, n: u64) -> Result<FrontierSeed, CliError> {
    let mut state = FrontierState::new();
    let mut out = FrontierSeed {
        seed,
        min_size_ratio: None,
        max_height_ratio: None,
        path_boundary_ratio: None,
        audit_holds: true,
        rows: Vec::new(),
    };
    for target in checkpoints(n) {
        while state.n < target {
            frontier_step(arena, &mut state)?;
        }
        let sol = solve_hitting(arena, &complete_sink(&state))?;
        let h_o = sol.root_value();
        let k = k_constant(arena, &sol);
        let k_closed = k_closed_form(state.realized_height, h_o);
        let nf = state.n as f64;
        let holds = (h_o - state.sink_count as f64 / nf).abs() <= k / nf + 1e-12;
        out.audit_holds &= holds;
        out.rows.push(format!("{},{seed},{h_o:.12},{k:.9},{k_closed:.9},{}", state.csv_row(), u8::from(holds)));
        if state.n >= SUMMARY_FROM {
            let size = state.size() as f64 / nf;
            let height = f64::from(state.realized_height) / nf;
            out.min_size_ratio = Some(out.min_size_ratio.map_or(size, |r| r.min(size)));
            out.max_height_ratio = Some(out.max_height_ratio.map_or(height, |r| r.max(height)));
        }
    }
    if let Some(path) = deepest_member_path(arena, &state) {
        for &x in &path {
            arena.ensure_expanded(x)?;
        }
        out.path_boundary_ratio = Some(path_boundary_ratio(arena, &path)?);
    }
    Ok(out)
}

pub fn frontier(args: FrontierArgs) -> Result<Status, CliError> {
    let file = load_file(&args.common)?;
    let common = resolve_common(&args.common, &file, false)?;
    let n = args.n.or(file.n).unwrap_or(65_536);
    if n == 0 {
        return Err(CliError::Validation("--n must be at least 1".into()));
    }
    let echo = Echo::new(&common).with("n", n);
    let seeds = par_map(common.jobs, &common.seeds, |seed| {
        let mut arena = TreeArena::with_matrix(common.xi.clone(), common.q.clone(), seed)?;
        frontier_seed(&mut arena, seed, n)
    })?;

    let mut csv = header("frontier", &echo);
    csv.push_str(FRONTIER_CSV_HEADER);
    csv.push_str(",seed,h_o,K,K_closed,audit\n");
    for s in &seeds {
        for row in &s.rows {
            csv.push_str(row);
            csv.push('\n');
        }
    }
    emit(common.out.as_deref(), &csv)?;
    let audit_holds = seeds.iter().all(|s| s.audit_holds);
    emit_summary(common.summary.as_deref(), &FrontierSummary { version: VERSION, config: echo, audit_holds, seeds })?;
    Ok(if audit_holds { Status::Ok } else { Status::CheckFailed })
}

// --------------------------------------------------------------- gamma-cdf

#[derive(Args, Debug)]
pub struct GammaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Grid cells on [0, 1].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Sup-norm change at which iteration stops.
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
}

#[derive(Serialize)]
struct GammaSummary {
    version: &'static str,
    config: Echo,
    iterations: usize,
    converged: bool,
    final_change: Option<f64>,
    mean: f64,
    median: f64,
    changes: Vec<f64>,
}

pub fn gamma_cdf(args: GammaArgs) -> Result<Status, CliError> {
    let file = load_file(&args.common)?;
    let common = resolve_common(&args.common, &file, true)?;
    let defaults = FixedPointOptions::default();
    let opts = FixedPointOptions {
        grid: args.grid.or(file.grid).unwrap_or(defaults.grid),
        tol: args.tol.or(file.tol).unwrap_or(defaults.tol),
        max_iter: args.max_iter.or(file.max_iter).unwrap_or(defaults.max_iter),
        initial: None,
    };
    if opts.grid < 2 || !opts.tol.is_finite() || opts.tol <= 0.0 || opts.max_iter == 0 {
        return Err(CliError::Validation("need --grid >= 2, --tol > 0 and --max-iter >= 1".into()));
    }
    let echo = Echo::new(&common).with("grid", opts.grid).with("tol", opts.tol).with("max_iter", opts.max_iter);
    let fp = cdf_fixed_point(&common.xi, &opts)?;

    let mut csv = header("gamma-cdf", &echo);
    csv.push_str(&fp.cdf.to_csv());
    emit(common.out.as_deref(), &csv)?;
    let summary = GammaSummary {
        version: VERSION,
        config: echo,
        iterations: fp.iterations,
        converged: fp.converged,
        final_change: fp.changes.last().copied(),
        mean: fp.cdf.mean(),
        median: fp.cdf.quantile(0.5),
        changes: fp.changes,
    };
    emit_summary(common.summary.as_deref(), &summary)?;
    Ok(if summary.converged { Status::Ok } else { Status::NotConverged })
}
