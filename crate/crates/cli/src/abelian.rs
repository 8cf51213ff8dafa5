//! abelian-check: the same particles released on the same finite tree under
//! different legal orders must stop in the same places with the same rotors.

use clap::Args;
use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;
use rotorgw::{
    run_legal_sequence, Fifo, Lifo, NodeId, OffspringDistribution, RandomScheduler, RotorSource, Scheduler, SinkSet,
    TreeArena,
};
use serde::Serialize;

use crate::config::{load_file, resolve_common, Common, CommonArgs, Echo};
use crate::experiments::par_map;
use crate::output::{emit, emit_summary, header, VERSION};
use crate::{CliError, Status};

#[derive(Args, Debug)]
pub struct AbelianArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Trials per seed.
    #[arg(long)]
    pub trials: Option<u64>,
    /// Most particles released in one trial.
    #[arg(long)]
    pub n: Option<u64>,
    /// Largest truncated tree drawn.
    #[arg(long)]
    pub max_nodes: Option<usize>,
}

/// Without `--xi` every trial draws its own law on `1..=4` and uniform
/// rotors; with it, trees follow `xi` and rotors follow `Q`.
#[derive(Clone, Copy)]
enum Source<'a> {
    Random,
    Given(&'a Common),
}

const MAX_DEGREE: u32 = 4;

fn random_law<R: Rng>(rng: &mut R) -> OffspringDistribution {
    let k_max = rng.random_range(1..=MAX_DEGREE);
    let mut probs: Vec<f64> = (0..k_max).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = probs.iter().sum();
    probs.iter_mut().for_each(|p| *p /= total);
    OffspringDistribution::new(probs).expect("normalised weights")
}

/// Draws a truncated tree with at most `max_nodes` vertices at depth `<= H`.
fn draw_tree<R: Rng>(rng: &mut R, source: Source, max_nodes: usize) -> Result<(TreeArena, u32), CliError> {
    loop {
        let mut arena = match source {
            Source::Random => TreeArena::with_rotors(random_law(rng), rng.random(), RotorSource::Explicit),
            Source::Given(c) => TreeArena::with_matrix(c.xi.clone(), c.q.clone(), rng.random())?,
        };
        let depth = rng.random_range(1..=8u32);
        let mut level = vec![0 as NodeId];
        let mut fits = true;
        for _ in 0..depth {
            let mut next = Vec::new();
            for &x in &level {
                arena.ensure_expanded(x)?;
                next.extend(arena.children(x));
            }
            if arena.len() > max_nodes {
                fits = false;
                break;
            }
            level = next;
        }
        if !fits {
            continue;
        }
        for x in 0..arena.len() as NodeId {
            if arena.depth(x) < depth {
                match source {
                    Source::Random => {
                        let d = arena.child_count(x).expect("expanded above");
                        arena.set_rotor(x, rng.random_range(0..=d))?;
                    }
                    Source::Given(_) => {
                        arena.ensure_rotor(x)?;
                    }
                }
            }
        }
        return Ok((arena, depth));
    }
}

struct Trial {
    row: String,
    agree: bool,
}

fn run_trial(seed: u64, trial: u64, source: Source, max_particles: u64, max_nodes: usize) -> Result<Trial, CliError> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed.wrapping_add(trial.wrapping_mul(0x9E37_79B9_7F4A_7C15)));
    let (arena, depth) = draw_tree(&mut rng, source, max_nodes)?;
    let interior: Vec<NodeId> = (0..arena.len() as NodeId).filter(|&x| arena.depth(x) < depth).collect();
    let particles = rng.random_range(1..=max_particles);
    let placement: Vec<(NodeId, u64)> =
        (0..particles).map(|_| (interior[rng.random_range(0..interior.len())], 1)).collect();
    let sink = SinkSet::level(depth);
    let schedulers: Vec<Box<dyn Scheduler>> = vec![
        Box::new(RandomScheduler::new(rng.random())),
        Box::new(RandomScheduler::new(rng.random())),
        Box::new(Fifo),
        Box::new(Lifo),
    ];
    let mut results = Vec::new();
    for mut scheduler in schedulers {
        let mut a = arena.clone();
        let out = run_legal_sequence(&mut a, &sink, &placement, scheduler.as_mut())?;
        results.push((out, a.rotor_snapshot()));
    }
    let agree = results[1..].iter().all(|r| r == &results[0]);
    let (first, _) = &results[0];
    let row = format!(
        "{seed},{trial},{},{depth},{particles},{},{},{},{}",
        arena.len(),
        first.at_sink,
        first.absorbed_total(),
        first.moves,
        u8::from(agree)
    );
    Ok(Trial { row, agree })
}

#[derive(Serialize)]
struct AbelianSummary {
    version: &'static str,
    config: Echo,
    trials: u64,
    disagreements: Vec<(u64, u64)>,
}

pub fn abelian_check(args: AbelianArgs) -> Result<Status, CliError> {
    let file = load_file(&args.common)?;
    let given_law = args.common.xi.is_some() || file.xi.is_some();
    let common = resolve_common(&args.common, &file, false)?;
    let trials = args.trials.or(file.trials).unwrap_or(1000);
    let max_particles = args.n.or(file.n).unwrap_or(50);
    let max_nodes = args.max_nodes.or(file.max_nodes).unwrap_or(200);
    let smallest = 1 + if given_law { common.xi.k_max() } else { MAX_DEGREE } as usize;
    if trials == 0 || max_particles == 0 || max_nodes < smallest {
        return Err(CliError::Validation(format!("need --trials >= 1, --n >= 1 and --max-nodes >= {smallest}")));
    }
    let source = if given_law { Source::Given(&common) } else { Source::Random };
    let mut echo = Echo::new(&common).with("trials", trials).with("n", max_particles).with("max_nodes", max_nodes);
    if !given_law {
        echo.xi = "random".into();
        echo.q = "random".into();
    }

    let cases: Vec<u64> = (0..common.seeds.len() as u64 * trials).collect();
    let results = par_map(common.jobs, &cases, |i| {
        let seed = common.seeds[(i / trials) as usize];
        run_trial(seed, i % trials, source, max_particles, max_nodes).map(|t| (seed, i % trials, t))
    })?;

    let mut csv = header("abelian-check", &echo);
    csv.push_str("seed,trial,nodes,depth,particles,at_sink,absorbed,moves,agree\n");
    for (_, _, t) in &results {
        csv.push_str(&t.row);
        csv.push('\n');
    }
    emit(common.out.as_deref(), &csv)?;
    let disagreements: Vec<(u64, u64)> =
        results.iter().filter(|(_, _, t)| !t.agree).map(|(s, i, _)| (*s, *i)).collect();
    let ok = disagreements.is_empty();
    emit_summary(
        common.summary.as_deref(),
        &AbelianSummary { version: VERSION, config: echo, trials: results.len() as u64, disagreements },
    )?;
    Ok(if ok { Status::Ok } else { Status::CheckFailed })
}
