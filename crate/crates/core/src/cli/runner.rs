use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use serde_json::json;

use super::config::{Experiment, RunConfig};
use super::output::{write_history, HISTORY_SCHEMA_VERSION};
use crate::fem::{NodalFunction, StructuredMesh};
use crate::optimize::{
    descend, iteration_seeds, DescentHistory, EnergyLogging, Method, RunAborted, RunOptions,
    StepRule, StepSchedule,
};
use crate::problems::{App1, App1Config, App2, App2Config, StochasticObjective};
use crate::random_field::KleSpec;
use crate::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct HistorySummary {
    pub name: String,
    pub file: PathBuf,
    pub iterations: usize,
    pub final_running_min: Option<f64>,
    pub max_iterate_norm: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunSummary {
    pub histories: Vec<HistorySummary>,
    pub manifest: PathBuf,
    /// compare-p2 only: largest nodal gap between SGD iterates and SSD with
    /// dual-norm-scaled steps.
    pub identity_max_abs_diff: Option<f64>,
}

struct Track {
    name: &'static str,
    rule: StepRule,
    method: Method,
    write: bool,
}

/// Runs one experiment and writes its histories and manifest into
/// `config.out`. Solver failures still write the partial histories and a
/// manifest with a failure status before the error is returned.
pub fn run(config: &RunConfig) -> Result<RunSummary> {
    let started = Instant::now();
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    fs::create_dir_all(&config.out)?;

    let mesh = StructuredMesh::new(config.mesh, config.mesh)?;
    let schedule = StepSchedule::new(config.t0, config.gamma)?;
    let kle = KleSpec::new(config.tau, config.alpha, config.kmax)?;
    let options = RunOptions {
        energy: (config.energy_every > 0).then_some(EnergyLogging {
            every: config.energy_every,
            samples: config.mc_samples,
        }),
        keep_iterates: config.experiment == Experiment::ComparePeq2,
    };
    let seeds = iteration_seeds(config.seed, config.iters);

    let tracks = match config.experiment {
        Experiment::App1 | Experiment::App2 => vec![Track {
            name: "ssd",
            rule: schedule.into(),
            method: Method::SteepestDescent,
            write: true,
        }],
        Experiment::ComparePeq2 => vec![
            Track {
                name: "ssd",
                rule: schedule.into(),
                method: Method::SteepestDescent,
                write: true,
            },
            Track {
                name: "sgd",
                rule: schedule.into(),
                method: Method::GradientDescent,
                write: true,
            },
            Track {
                name: "ssd_scaled",
                rule: StepRule::DualNormScaled(schedule),
                method: Method::SteepestDescent,
                write: false,
            },
        ],
    };

    let results = match config.experiment {
        Experiment::App1 => {
            let mut cfg = App1Config::new(mesh.clone());
            cfg.p = config.p;
            cfg.kle = kle;
            run_tracks(&App1::new(cfg)?, &tracks, &seeds, config.seed, &options)
        }
        Experiment::App2 | Experiment::ComparePeq2 => {
            let mut cfg = App2Config::new(mesh.clone());
            cfg.p = config.p;
            cfg.beta = config.beta;
            cfg.diffusion_kle = kle;
            cfg.source_kle = kle;
            run_tracks(&App2::new(cfg)?, &tracks, &seeds, config.seed, &options)
        }
    };

    let single = tracks.iter().filter(|t| t.write).count() == 1;
    let mut summaries = Vec::new();
    let mut failure = None;
    let mut finished = Vec::new();
    for (track, result) in tracks.iter().zip(results) {
        let (history, iterates) = match result {
            Ok((h, it)) => (h, Some(it)),
            Err(aborted) => {
                failure.get_or_insert_with(|| format!("{}: {aborted}", track.name));
                (aborted.history, None)
            }
        };
        if track.write {
            let file = if single {
                PathBuf::from("history.csv")
            } else {
                PathBuf::from(format!("{}_history.csv", track.name))
            };
            write_history(&history, BufWriter::new(File::create(config.out.join(&file))?))?;
            summaries.push(HistorySummary {
                name: track.name.to_string(),
                file,
                iterations: history.len(),
                final_running_min: history.records().last().map(|r| r.running_min),
                max_iterate_norm: history.max_iterate_norm(),
            });
        }
        finished.push((track.name, iterates));
    }

    let identity_max_abs_diff = identity_gap(&finished);
    let manifest = config.out.join("manifest.json");
    let status = failure.clone().map_or_else(|| "completed".to_string(), |f| format!("failed: {f}"));
    write_manifest(
        &manifest,
        config,
        &seeds,
        &summaries,
        identity_max_abs_diff,
        &status,
        started_unix,
        started.elapsed().as_secs_f64(),
    )?;

    if let Some(f) = failure {
        return Err(Error::InvalidArgument(format!("run failed, partial outputs written: {f}")));
    }
    Ok(RunSummary {
        histories: summaries,
        manifest,
        identity_max_abs_diff,
    })
}

type TrackResult = std::result::Result<(DescentHistory, Vec<NodalFunction>), RunAborted>;

fn run_tracks<P: StochasticObjective>(
    problem: &P,
    tracks: &[Track],
    seeds: &[u64],
    seed: u64,
    options: &RunOptions,
) -> Vec<TrackResult> {
    let u0 = NodalFunction::zeros(problem.mesh());
    tracks
        .iter()
        .map(|t| {
            descend(problem, &u0, &t.rule, t.method, seeds, seed, options)
                .map(|o| (o.history, o.iterates))
        })
        .collect()
}

fn identity_gap(finished: &[(&str, Option<Vec<NodalFunction>>)]) -> Option<f64> {
    let find = |name: &str| {
        finished
            .iter()
            .find(|(n, _)| *n == name)
            .and_then(|(_, it)| it.as_ref())
    };
    let (sgd, scaled) = (find("sgd")?, find("ssd_scaled")?);
    Some(
        sgd.iter()
            .zip(scaled)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max),
    )
}

#[allow(clippy::too_many_arguments)]
fn write_manifest(
    path: &Path,
    config: &RunConfig,
    seeds: &[u64],
    histories: &[HistorySummary],
    identity_max_abs_diff: Option<f64>,
    status: &str,
    started_unix: u64,
    wall_clock_seconds: f64,
) -> Result<()> {
    let manifest = json!({
        "library_version": env!("CARGO_PKG_VERSION"),
        "history_schema_version": HISTORY_SCHEMA_VERSION,
        "config": config,
        "rng": "ChaCha8, iteration seeds from stream 0, energy scenarios from stream 1",
        "iteration_seeds": seeds,
        "histories": histories,
        "identity_max_abs_diff": identity_max_abs_diff,
        "status": status,
        "started_unix": started_unix,
        "wall_clock_seconds": wall_clock_seconds,
    });
    let text = serde_json::to_string_pretty(&manifest)
        .map_err(|e| Error::Io(std::io::Error::other(e)))?;
    fs::write(path, text + "\n")?;
    Ok(())
}
