use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use crate::error::{Error, Result};
use crate::threshold::{
    adversary_compare, circuit_hash, coherent_collapse, fit_threshold, run_level1_concat,
    run_memory, ExperimentResult, MemoryExperiment,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Row of a memory, level-1 or sweep CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub p: f64,
    pub shots: u64,
    pub failures: u64,
    pub aborts: u64,
    pub p_logical: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub seed: u64,
    pub circuit_hash: String,
}

impl ResultRow {
    fn new(p: f64, r: &ExperimentResult, seed: u64, hash: &str) -> Self {
        Self {
            p,
            shots: r.shots,
            failures: r.failures,
            aborts: r.aborts,
            p_logical: r.p_logical,
            ci_low: r.ci_low,
            ci_high: r.ci_high,
            seed,
            circuit_hash: hash.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseRow {
    pub theta: f64,
    pub qubit: usize,
    pub shots: u64,
    pub nontrivial: u64,
    pub rate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub expected: f64,
    pub max_infidelity: f64,
    pub misplaced: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdversaryRow {
    pub p: f64,
    pub shots: u64,
    pub depolarizing_failures: u64,
    pub depolarizing_p_logical: f64,
    pub depolarizing_ci_low: f64,
    pub depolarizing_ci_high: f64,
    pub adversarial_failures: u64,
    pub adversarial_p_logical: f64,
    pub adversarial_ci_low: f64,
    pub adversarial_ci_high: f64,
    pub fallbacks: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: ExperimentConfig,
    /// Keyed by what the hash covers, e.g. `level0` or `level1`.
    pub circuit_hashes: BTreeMap<String, String>,
    pub started_unix: u64,
    pub wall_clock_seconds: f64,
    /// Every file this run wrote, the manifest excepted.
    pub files: Vec<PathBuf>,
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub manifest: RunManifest,
    pub manifest_path: PathBuf,
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(path, text + "\n")?;
    Ok(())
}

struct Progress {
    start: Instant,
    total: usize,
    done: usize,
}

impl Progress {
    fn new(total: usize) -> Self {
        Self {
            start: Instant::now(),
            total,
            done: 0,
        }
    }

    fn tick(&mut self, what: &str) {
        self.done += 1;
        let elapsed = self.start.elapsed().as_secs_f64();
        let eta = elapsed / self.done as f64 * (self.total - self.done) as f64;
        log::info!(
            "[{}/{}] {what} ({elapsed:.1} s elapsed, ETA {eta:.1} s)",
            self.done,
            self.total
        );
    }
}

/// Run batches of `cfg.shots` until `min_failures` is reached or `max_shots`
/// is spent. Later batches continue the shot index, so the tally is the same
/// as one longer run.
fn adaptive<F>(cfg: &ExperimentConfig, p: f64, mut batch: F) -> Result<ExperimentResult>
where
    F: FnMut(&MemoryExperiment) -> Result<ExperimentResult>,
{
    let mut exp = cfg.experiment(p);
    let mut total = batch(&exp)?;
    let cap = cfg.max_shots.unwrap_or(cfg.shots);
    while total.failures < cfg.min_failures && total.shots < cap {
        exp.first_shot = total.shots;
        exp.shots = cfg.shots.min(cap - total.shots);
        let more = batch(&exp)?;
        total = total.combine(&more);
        log::info!("p = {p}: {} failures after {} shots", total.failures, total.shots);
    }
    if total.failures < cfg.min_failures {
        log::warn!(
            "p = {p}: only {} failures in {} shots (wanted {})",
            total.failures,
            total.shots,
            cfg.min_failures
        );
    }
    Ok(total)
}

/// Execute `cfg` and write its results. `out_dir` overrides `cfg.output.dir`.
pub fn run_experiment(cfg: &ExperimentConfig, out_dir: Option<&Path>) -> Result<RunOutput> {
    cfg.validate()?;
    let started_unix = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let clock = Instant::now();
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| cfg.output.dir.clone());
    std::fs::create_dir_all(&dir)?;
    let name = &cfg.output.name;
    let file = |suffix: &str| dir.join(format!("{name}{suffix}"));

    let level0 = circuit_hash(0, &cfg.ec, false);
    let mut hashes = BTreeMap::new();
    let mut files = Vec::new();
    let grid = cfg.grid();
    let mut progress = Progress::new(grid.len());

    match cfg.kind {
        ExperimentKind::Memory | ExperimentKind::ThresholdSweep => {
            hashes.insert("level0".to_string(), level0.clone());
            let mut rows = Vec::new();
            let mut points = Vec::new();
            for &p in &grid {
                let r = adaptive(cfg, p, run_memory)?;
                progress.tick(&format!("p = {p}: {}/{} failures", r.failures, r.shots));
                rows.push(ResultRow::new(p, &r, cfg.seed, &level0));
                points.push((p, r));
            }
            let csv_path = file(".csv");
            write_csv(&csv_path, &rows)?;
            files.push(csv_path);
            if cfg.kind == ExperimentKind::ThresholdSweep {
                let fit = fit_threshold(&points)?;
                log::info!(
                    "fit: slope {:.3} ± {:.3}, C = {:.4e}, p_T = {:.4e} [{:.4e}, {:.4e}]",
                    fit.slope,
                    fit.slope_stderr,
                    fit.c,
                    fit.p_t,
                    fit.p_t_ci_low,
                    fit.p_t_ci_high
                );
                let fit_path = file(".fit.json");
                write_json(&fit_path, &fit)?;
                files.push(fit_path);
            }
        }
        ExperimentKind::Level1 => {
            let level1 = circuit_hash(1, &cfg.ec, cfg.level1.inner_ec_after_gates);
            hashes.insert("level0".to_string(), level0.clone());
            hashes.insert("level1".to_string(), level1.clone());
            let (mut rows, mut base) = (Vec::new(), Vec::new());
            for &p in &grid {
                let r = adaptive(cfg, p, |e| run_level1_concat(e, &cfg.level1))?;
                let b = adaptive(cfg, p, run_memory)?;
                progress.tick(&format!(
                    "p = {p}: level 1 {}/{}, single block {}/{}",
                    r.failures, r.shots, b.failures, b.shots
                ));
                rows.push(ResultRow::new(p, &r, cfg.seed, &level1));
                base.push(ResultRow::new(p, &b, cfg.seed, &level0));
            }
            let (csv_path, base_path) = (file(".csv"), file(".baseline.csv"));
            write_csv(&csv_path, &rows)?;
            write_csv(&base_path, &base)?;
            files.extend([csv_path, base_path]);
        }
        ExperimentKind::CoherentCollapse => {
            hashes.insert("level0".to_string(), level0);
            let mut progress = Progress::new(cfg.coherent.thetas.len());
            let mut rows = Vec::new();
            for &theta in &cfg.coherent.thetas {
                let c = coherent_collapse(theta, cfg.coherent.qubit, cfg.shots, cfg.seed)?;
                progress.tick(&format!(
                    "theta = {theta}: {} nontrivial of {}, expected rate {:.4}",
                    c.nontrivial.failures, c.nontrivial.shots, c.expected
                ));
                rows.push(CollapseRow {
                    theta,
                    qubit: c.qubit,
                    shots: c.nontrivial.shots,
                    nontrivial: c.nontrivial.failures,
                    rate: c.nontrivial.p_logical,
                    ci_low: c.nontrivial.ci_low,
                    ci_high: c.nontrivial.ci_high,
                    expected: c.expected,
                    max_infidelity: c.max_infidelity,
                    misplaced: c.misplaced,
                    seed: cfg.seed,
                });
            }
            let csv_path = file(".csv");
            write_csv(&csv_path, &rows)?;
            files.push(csv_path);
        }
        ExperimentKind::AdversaryCompare => {
            hashes.insert("level0".to_string(), level0);
            let mut rows = Vec::new();
            for &p in &grid {
                let c = adversary_compare(&cfg.experiment(p), cfg.noise.strategy)?;
                progress.tick(&format!(
                    "p = {p}: depolarizing {} vs adversarial {} failures",
                    c.depolarizing.failures, c.adversarial.failures
                ));
                rows.push(AdversaryRow {
                    p,
                    shots: c.adversarial.shots,
                    depolarizing_failures: c.depolarizing.failures,
                    depolarizing_p_logical: c.depolarizing.p_logical,
                    depolarizing_ci_low: c.depolarizing.ci_low,
                    depolarizing_ci_high: c.depolarizing.ci_high,
                    adversarial_failures: c.adversarial.failures,
                    adversarial_p_logical: c.adversarial.p_logical,
                    adversarial_ci_low: c.adversarial.ci_low,
                    adversarial_ci_high: c.adversarial.ci_high,
                    fallbacks: c.fallbacks,
                    seed: cfg.seed,
                });
            }
            let csv_path = file(".csv");
            write_csv(&csv_path, &rows)?;
            files.push(csv_path);
        }
    }

    let manifest = RunManifest {
        tool_version: TOOL_VERSION.into(),
        config: cfg.clone(),
        circuit_hashes: hashes,
        started_unix,
        wall_clock_seconds: clock.elapsed().as_secs_f64(),
        files,
    };
    let manifest_path = file(".manifest.json");
    write_json(&manifest_path, &manifest)?;
    Ok(RunOutput {
        manifest,
        manifest_path,
    })
}

/// Run `f` on a rayon pool of `workers` threads (`None`: rayon's default).
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None => Ok(f()),
        Some(0) => Err(Error::Configuration("--workers must be at least 1".into())),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Configuration(e.to_string()))?;
            Ok(pool.install(f))
        }
    }
}
