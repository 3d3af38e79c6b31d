use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;

use locadapt::bench::{
    compare_csv, gen_stream, regret_curve, rounds_csv, run_hm, run_la, Comparator, RoundLog,
    TargetFunction, RNG_ALGORITHM,
};
use locadapt::format::g17;
use locadapt::net::{covering_audit, Mode};
use locadapt::pruning::{best_pruning, dimension_bound, lipschitz_bound, loss_bound, stats};
use locadapt::Error;

use crate::config::RunConfig;
use crate::Failure;

pub(crate) fn core(e: Error) -> Failure {
    match e {
        Error::Config(m) | Error::Domain(m) => Failure::Config(m),
        _ => Failure::Invariant(e.to_string()),
    }
}

/// One output file: suffix after the prefix and its contents.
pub type Artifact = (&'static str, String);

/// Everything one seed writes, computed in memory.
pub fn artifacts(cfg: &RunConfig) -> Result<Vec<Artifact>, Failure> {
    let seed = cfg.seeds[0];
    let (low, high) = cfg.target_slopes();
    let f = TargetFunction::preset(cfg.target, low, high).map_err(core)?;
    let stream = gen_stream(&cfg.stream_spec(seed), &f).map_err(core)?;
    let la_cfg = cfg.la_config().map_err(core)?;
    let log = run_la(&stream.examples, &la_cfg).map_err(core)?;
    check_invariants(cfg, &log)?;

    let eval = |x: &[f64]| f.eval(x);
    let target = Comparator::Target(&eval);
    let la_regret = regret_curve(&log, &target).map_err(core)?;

    let mut summary = cfg.echo();
    let mut note = |k: &str, v: String| {
        let _ = writeln!(summary, "# {k} = {v}");
    };
    let counts: Vec<String> = log.tree.level_counts().iter().map(|c| c.to_string()).collect();
    note("rng", RNG_ALGORITHM.into());
    note("rounds", log.horizon().to_string());
    note("cum_loss", g17(log.cum_loss()));
    note("final_regret", g17(*la_regret.last().unwrap()));
    note("nodes", log.node_count().to_string());
    note("level_counts", counts.join("/"));

    let (best, value) = best_pruning(&log.tree, &log).map_err(core)?;
    let s = stats(&log.tree, &best, &log).map_err(core)?;
    note("best_pruning", best.describe());
    note("best_pruning_loss", g17(value));
    let t = log.horizon();
    let report = match cfg.mode {
        Mode::Lipschitz => lipschitz_bound(&s, &log.schedule, t),
        Mode::Dimension => dimension_bound(&s, &log.schedule, t, cfg.cover.unwrap()),
        Mode::LocalLoss => loss_bound(&s, &log.schedule, t),
    };
    match report {
        Ok(r) => {
            let terms = [
                ("tree", r.tree),
                ("estimation", r.estimation),
                ("approximation", r.approximation),
                ("cross", r.cross),
                ("total", r.total),
            ];
            for (k, v) in terms {
                note(&format!("bound_{k}"), g17(v));
            }
        }
        Err(e) => note("bound", format!("unavailable: {e}")),
    }

    let mut files = vec![(".rounds.csv", rounds_csv(&log))];
    if cfg.baseline {
        let hm = run_hm(&stream.examples, cfg.baseline_lipschitz(), cfg.dim as u32, cfg.loss)
            .map_err(core)?;
        let hm_regret = regret_curve(&hm, &target).map_err(core)?;
        note("hm_cum_loss", g17(hm.cum_loss()));
        note("hm_final_regret", g17(*hm_regret.last().unwrap()));
        note("hm_nodes", hm.node_count().to_string());
        files.push((".hm.rounds.csv", rounds_csv(&hm)));
        files.push((
            ".compare.csv",
            compare_csv("cum_regret_la", &la_regret, "cum_regret_hm", &hm_regret),
        ));
    }
    files.push((".summary.txt", summary));
    files.push((".tree.txt", log.tree.snapshot()));
    Ok(files)
}

/// Covering, packing and path chaining; dimension mode may leave instances
/// uncovered once a level budget binds.
fn check_invariants(cfg: &RunConfig, log: &RoundLog) -> Result<(), Failure> {
    if log.horizon() != cfg.horizon {
        return Err(Failure::Invariant(format!(
            "round count: logged {} of {}",
            log.horizon(),
            cfg.horizon
        )));
    }
    let audit = covering_audit(&log.tree, log.visits(), &log.schedule);
    if !audit.broken_paths.is_empty() {
        return Err(Failure::Invariant(format!(
            "path chaining: {} rounds off a root-to-leaf chain",
            audit.broken_paths.len()
        )));
    }
    if !audit.packing_passed() {
        return Err(Failure::Invariant(format!(
            "creation-time packing: {} nodes too close to a sibling",
            audit.packing.len()
        )));
    }
    if cfg.mode != Mode::Dimension && !audit.covering_passed() {
        return Err(Failure::Invariant(format!(
            "covering: {} visits outside their ball",
            audit.covering.len()
        )));
    }
    Ok(())
}

/// Writes every artifact to a temporary name first and renames only once
/// all writes have succeeded.
pub fn write_artifacts(prefix: &str, files: &[Artifact]) -> Result<(), Failure> {
    let io = |p: &PathBuf, e: std::io::Error| Failure::Io(format!("{}: {e}", p.display()));
    let paths: Vec<(PathBuf, PathBuf)> = files
        .iter()
        .map(|(suffix, _)| {
            let target = PathBuf::from(format!("{prefix}{suffix}"));
            let tmp = PathBuf::from(format!("{prefix}{suffix}.tmp"));
            (tmp, target)
        })
        .collect();
    for ((tmp, _), (_, body)) in paths.iter().zip(files) {
        if let Err(e) = fs::write(tmp, body) {
            for (t, _) in &paths {
                let _ = fs::remove_file(t);
            }
            return Err(io(tmp, e));
        }
    }
    for (tmp, target) in &paths {
        fs::rename(tmp, target).map_err(|e| io(target, e))?;
    }
    Ok(())
}

fn run_one(cfg: &RunConfig) -> Result<(), Failure> {
    let files = artifacts(cfg)?;
    write_artifacts(&cfg.out, &files)
}

/// Runs every seed, fanning out over `jobs` threads.
pub fn run(cfg: &RunConfig) -> Result<(), Failure> {
    let runs: Vec<RunConfig> = cfg
        .prefixes()
        .into_iter()
        .map(|(seed, out)| cfg.single(seed, out))
        .collect();
    if runs.len() == 1 || cfg.jobs == 1 {
        return runs.iter().try_for_each(run_one);
    }
    let jobs = cfg.jobs.min(runs.len());
    let mut results: Vec<(usize, Result<(), Failure>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs)
            .map(|j| {
                let runs = &runs;
                scope.spawn(move || {
                    (j..runs.len())
                        .step_by(jobs)
                        .map(|i| (i, run_one(&runs[i])))
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("worker panicked"))
            .collect()
    });
    results.sort_by_key(|(i, _)| *i);
    results.into_iter().try_for_each(|(_, r)| r)
}
