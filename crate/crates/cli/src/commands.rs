use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use msibm::codec::{read_calib, read_pfm, read_pfm_disparity, read_pgm_pnm};
use msibm::cost::DEFAULT_SIGMA_EPS;
use msibm::dataset::{discover_scenes, SceneFiles};
use msibm::eval::Metrics;
use msibm::{baseline_bm, evaluate, run_pipeline, GrayImage, MatchConfig, VERSION};
use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::args::{BaselineArgs, BenchArgs, Common, ComputeArgs, EvalArgs, Hierarchy, Pair, ReplayArgs};
use crate::error::CliError;
use crate::output::{
    write_json, write_manifest, write_maps, write_text, write_trace, DMaxSource, Method, Outputs,
    RunManifest, Timings, TraceDoc,
};

fn in_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T, CliError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Other(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(f))
}

fn absolute(path: &Path) -> Result<PathBuf, CliError> {
    fs::canonicalize(path).map_err(|e| CliError::io(path, e))
}

fn read_image(path: &Path) -> Result<GrayImage, CliError> {
    read_pgm_pnm(path).map_err(|e| CliError::codec(path, e))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| CliError::Decode(format!("{}: {e}", path.display())))
}

fn check_scale(scale: f64) -> Result<(), CliError> {
    if scale > 0.0 && scale.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("--scale must be positive and finite, got {scale}")))
    }
}

/// Maximum disparity from calib (explicit, or beside the left image when
/// `--dmax` is absent), else from `--dmax`.
fn resolve_d_max(pair: &Pair) -> Result<(u32, DMaxSource, Option<PathBuf>), CliError> {
    let calib = pair.calib.clone().or_else(|| {
        if pair.dmax.is_some() {
            return None;
        }
        let beside = pair.left.parent().unwrap_or(Path::new("")).join("calib.txt");
        beside.is_file().then_some(beside)
    });
    match (calib, pair.dmax) {
        (Some(path), flag) => {
            let info = read_calib(&path).map_err(|e| CliError::codec(&path, e))?;
            if let Some(d) = flag.filter(|&d| d != info.ndisp) {
                eprintln!(
                    "warning: ndisp={} from {} overrides --dmax {d}",
                    info.ndisp,
                    path.display()
                );
            }
            Ok((info.ndisp, DMaxSource::Calib, Some(absolute(&path)?)))
        }
        (None, Some(d)) => Ok((d, DMaxSource::Flag, None)),
        (None, None) => Err(CliError::Config(
            "no maximum disparity: pass --dmax or --calib, or put calib.txt beside the left image"
                .into(),
        )),
    }
}

fn config_from(d_max: u32, hierarchy: Option<&Hierarchy>, common: &Common) -> MatchConfig {
    let mut cfg = MatchConfig {
        d_max,
        base_block: common.block,
        sigma_eps: DEFAULT_SIGMA_EPS,
        sign: common.sign.into(),
        ..MatchConfig::default()
    };
    if let Some(h) = hierarchy {
        cfg.levels = h.levels;
        cfg.alpha = h.alpha;
        cfg.beta = h.beta;
    }
    cfg
}

struct Job {
    method: Method,
    left: PathBuf,
    right: PathBuf,
    calib: Option<PathBuf>,
    d_max_source: DMaxSource,
    config: MatchConfig,
    threads: Option<usize>,
}

fn run_job(job: &Job, out: &Path) -> Result<RunManifest, CliError> {
    let cfg = &job.config;
    cfg.validate()?;
    let start = Instant::now();
    let left = read_image(&job.left)?;
    let right = read_image(&job.right)?;
    let mut timings = Timings {
        decode_s: start.elapsed().as_secs_f64(),
        ..Timings::default()
    };
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let outputs = Outputs::in_dir(&absolute(out)?);
    let (w, h) = left.dims();

    let start = Instant::now();
    let (d, c, trace) = match job.method {
        Method::Msibm => {
            let run = in_pool(job.threads, || run_pipeline(&left, &right, cfg))??;
            timings.pyramid_s = run.trace.pyramid_s;
            timings.levels = run.trace.timings.clone();
            let trace = TraceDoc {
                method: Method::Msibm,
                width: w,
                height: h,
                d_max: cfg.d_max,
                total_evals: run.trace.total_evals(),
                levels: run.trace.levels.clone(),
            };
            (run.disparity, run.cost, trace)
        }
        Method::Baseline => {
            let run = in_pool(job.threads, || {
                baseline_bm(&left, &right, cfg.d_max, cfg.base_block, cfg.sign, cfg.sigma_eps)
            })??;
            let trace = TraceDoc {
                method: Method::Baseline,
                width: w,
                height: h,
                d_max: cfg.d_max,
                total_evals: run.evaluations,
                levels: Vec::new(),
            };
            (run.disparity, run.cost, trace)
        }
    };
    timings.match_s = start.elapsed().as_secs_f64();

    let start = Instant::now();
    write_maps(&outputs, &d, &c, cfg.d_max)?;
    write_trace(&outputs, &trace)?;
    timings.write_s = start.elapsed().as_secs_f64();

    let manifest = RunManifest {
        version: VERSION.to_string(),
        method: job.method,
        left: job.left.clone(),
        right: job.right.clone(),
        calib: job.calib.clone(),
        d_max_source: job.d_max_source,
        config: *cfg,
        threads: job.threads,
        levels_used: trace.levels.len().saturating_sub(1) as u32,
        timings,
        outputs,
    };
    write_manifest(&manifest)?;
    let exhaustive = (w * h) as u64 * (u64::from(cfg.d_max) + 1);
    println!(
        "{}x{} d_max={} evals={} ({:.3} of exhaustive) -> {}",
        w,
        h,
        cfg.d_max,
        trace.total_evals,
        trace.total_evals as f64 / exhaustive as f64,
        manifest.outputs.disparity_pfm.display()
    );
    Ok(manifest)
}

fn job_for(pair: &Pair, method: Method, cfg: MatchConfig, source: DMaxSource, calib: Option<PathBuf>, threads: Option<usize>) -> Result<Job, CliError> {
    Ok(Job {
        method,
        left: absolute(&pair.left)?,
        right: absolute(&pair.right)?,
        calib,
        d_max_source: source,
        config: cfg,
        threads,
    })
}

pub fn compute(a: ComputeArgs) -> Result<(), CliError> {
    let (d_max, source, calib) = resolve_d_max(&a.pair)?;
    let cfg = config_from(d_max, Some(&a.hierarchy), &a.common);
    cfg.validate()?;
    let job = job_for(&a.pair, Method::Msibm, cfg, source, calib, a.common.threads.0)?;
    run_job(&job, &a.common.out).map(drop)
}

pub fn baseline(a: BaselineArgs) -> Result<(), CliError> {
    let (d_max, source, calib) = resolve_d_max(&a.pair)?;
    let cfg = config_from(d_max, None, &a.common);
    cfg.validate()?;
    let job = job_for(&a.pair, Method::Baseline, cfg, source, calib, a.common.threads.0)?;
    run_job(&job, &a.common.out).map(drop)
}

pub fn replay(a: ReplayArgs) -> Result<(), CliError> {
    let m: RunManifest = read_json(&a.manifest)?;
    if m.version != VERSION {
        eprintln!("warning: manifest written by {}, replaying with {VERSION}", m.version);
    }
    let job = Job {
        method: m.method,
        left: m.left,
        right: m.right,
        calib: m.calib,
        d_max_source: m.d_max_source,
        config: m.config,
        threads: a.threads.map_or(m.threads, |t| t.0),
    };
    run_job(&job, &a.out).map(drop)
}

pub fn eval(a: EvalArgs) -> Result<(), CliError> {
    check_scale(a.scale)?;
    let d = read_pfm_disparity(&a.disparity).map_err(|e| CliError::codec(&a.disparity, e))?;
    let gt = read_pfm(&a.ground_truth).map_err(|e| CliError::codec(&a.ground_truth, e))?;
    let mut report = evaluate(&d, &gt, a.scale)?;
    if let Some(path) = &a.trace {
        let trace: TraceDoc = read_json(path)?;
        report = report.with_trace(trace.summary());
    }
    let out = a
        .out
        .clone()
        .unwrap_or_else(|| a.disparity.parent().unwrap_or(Path::new("")).to_path_buf());
    let out = if out.as_os_str().is_empty() { PathBuf::from(".") } else { out };
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let text = report.to_key_values();
    write_text(&out.join("eval.txt"), &text)?;
    write_text(&out.join("eval.json"), &(report.to_json() + "\n"))?;
    print!("{text}");
    Ok(())
}

/// Published reference figures, reported for comparison only.
const REFERENCE_AVERAGE_ERROR: f64 = 35.6;
const REFERENCE_RUNTIME_MIN: f64 = 2.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub scene: String,
    pub width: usize,
    pub height: usize,
    pub d_max: u32,
    pub msibm: Metrics,
    pub baseline: Metrics,
    pub msibm_evals: u64,
    pub baseline_evals: u64,
    pub eval_ratio: f64,
}

/// Arithmetic means over scene rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchAverage {
    pub scenes: usize,
    pub msibm_bad_1_0: f64,
    pub msibm_bad_2_0: f64,
    pub msibm_bad_4_0: f64,
    pub msibm_avg_abs_err: f64,
    pub baseline_bad_1_0: f64,
    pub baseline_bad_2_0: f64,
    pub baseline_bad_4_0: f64,
    pub baseline_avg_abs_err: f64,
    pub eval_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub average_error: f64,
    pub runtime_minutes: f64,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub version: String,
    pub config: MatchConfig,
    pub scale: f64,
    pub rows: Vec<BenchRow>,
    pub average: BenchAverage,
    pub reference: Reference,
}

fn average(rows: &[BenchRow]) -> BenchAverage {
    let n = rows.len() as f64;
    let mean = |f: &dyn Fn(&BenchRow) -> f64| rows.iter().map(f).sum::<f64>() / n;
    BenchAverage {
        scenes: rows.len(),
        msibm_bad_1_0: mean(&|r| r.msibm.bad_1_0),
        msibm_bad_2_0: mean(&|r| r.msibm.bad_2_0),
        msibm_bad_4_0: mean(&|r| r.msibm.bad_4_0),
        msibm_avg_abs_err: mean(&|r| r.msibm.avg_abs_err),
        baseline_bad_1_0: mean(&|r| r.baseline.bad_1_0),
        baseline_bad_2_0: mean(&|r| r.baseline.bad_2_0),
        baseline_bad_4_0: mean(&|r| r.baseline.bad_4_0),
        baseline_avg_abs_err: mean(&|r| r.baseline.avg_abs_err),
        eval_ratio: mean(&|r| r.eval_ratio),
    }
}

fn render_table(report: &BenchReport) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<16} {:>9} {:>5} | {:>7} {:>7} {:>7} {:>8} | {:>7} {:>7} {:>7} {:>8} | {:>6}",
        "scene", "size", "dmax", "bad1", "bad2", "bad4", "avgerr", "bad1", "bad2", "bad4", "avgerr", "evals"
    );
    let _ = writeln!(
        s,
        "{:<16} {:>9} {:>5} | {:^32} | {:^32} | {:>6}",
        "", "", "", "msibm", "baseline", "ratio"
    );
    let row = |s: &mut String, name: &str, size: &str, dmax: &str, v: [f64; 9]| {
        let _ = writeln!(
            s,
            "{name:<16} {size:>9} {dmax:>5} | {:>7.2} {:>7.2} {:>7.2} {:>8.3} | {:>7.2} {:>7.2} {:>7.2} {:>8.3} | {:>6.3}",
            v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7], v[8]
        );
    };
    for r in &report.rows {
        row(
            &mut s,
            &r.scene,
            &format!("{}x{}", r.width, r.height),
            &r.d_max.to_string(),
            [
                r.msibm.bad_1_0,
                r.msibm.bad_2_0,
                r.msibm.bad_4_0,
                r.msibm.avg_abs_err,
                r.baseline.bad_1_0,
                r.baseline.bad_2_0,
                r.baseline.bad_4_0,
                r.baseline.avg_abs_err,
                r.eval_ratio,
            ],
        );
    }
    let a = &report.average;
    row(
        &mut s,
        "average",
        "",
        "",
        [
            a.msibm_bad_1_0,
            a.msibm_bad_2_0,
            a.msibm_bad_4_0,
            a.msibm_avg_abs_err,
            a.baseline_bad_1_0,
            a.baseline_bad_2_0,
            a.baseline_bad_4_0,
            a.baseline_avg_abs_err,
            a.eval_ratio,
        ],
    );
    let _ = writeln!(
        s,
        "reference (published, not a threshold): average error {}, runtime about {} min",
        report.reference.average_error, report.reference.runtime_minutes
    );
    s
}

struct SceneTiming {
    msibm_s: f64,
    baseline_s: f64,
}

fn bench_scene(s: &SceneFiles, template: &MatchConfig, scale: f64) -> Result<(BenchRow, SceneTiming), CliError> {
    let left = read_image(&s.left)?;
    let right = read_image(&s.right)?;
    let gt = read_pfm(&s.ground_truth).map_err(|e| CliError::codec(&s.ground_truth, e))?;
    let calib = read_calib(&s.calib).map_err(|e| CliError::codec(&s.calib, e))?;
    let cfg = MatchConfig {
        d_max: calib.ndisp,
        ..*template
    };

    let start = Instant::now();
    let run = run_pipeline(&left, &right, &cfg)?;
    let msibm_s = start.elapsed().as_secs_f64();
    let start = Instant::now();
    let base = baseline_bm(&left, &right, cfg.d_max, cfg.base_block, cfg.sign, cfg.sigma_eps)?;
    let baseline_s = start.elapsed().as_secs_f64();

    let m = evaluate(&run.disparity, &gt, scale)?;
    let b = evaluate(&base.disparity, &gt, scale)?;
    let (w, h) = left.dims();
    let msibm_evals = run.trace.total_evals();
    Ok((
        BenchRow {
            scene: s.name.clone(),
            width: w,
            height: h,
            d_max: cfg.d_max,
            msibm: m.metrics,
            baseline: b.metrics,
            msibm_evals,
            baseline_evals: base.evaluations,
            eval_ratio: msibm_evals as f64 / base.evaluations as f64,
        },
        SceneTiming { msibm_s, baseline_s },
    ))
}

pub fn bench(a: BenchArgs) -> Result<(), CliError> {
    check_scale(a.scale)?;
    // d_max comes from each scene's calib; 1 only stands in for validation
    let template = config_from(1, Some(&a.hierarchy), &a.common);
    template.validate()?;
    let (scenes, incomplete) =
        discover_scenes(&a.dataset).map_err(|e| CliError::io(&a.dataset, e))?;
    for s in &incomplete {
        eprintln!("warning: skipping scene {}: missing {}", s.name, s.missing.join(", "));
    }
    if scenes.is_empty() {
        return Err(CliError::Other(format!(
            "no complete scenes under {}",
            a.dataset.display()
        )));
    }

    let start = Instant::now();
    let results: Vec<_> = in_pool(a.common.threads.0, || {
        scenes
            .par_iter()
            .map(|s| bench_scene(s, &template, a.scale))
            .collect()
    })?;
    let wall_s = start.elapsed().as_secs_f64();

    let mut rows = Vec::new();
    let mut timing = String::new();
    for (s, r) in scenes.iter().zip(results) {
        match r {
            Ok((row, t)) => {
                let _ = writeln!(timing, "{}.msibm_s={:.6}", s.name, t.msibm_s);
                let _ = writeln!(timing, "{}.baseline_s={:.6}", s.name, t.baseline_s);
                rows.push(row);
            }
            Err(e) => eprintln!("warning: skipping scene {}: {e}", s.name),
        }
    }
    if rows.is_empty() {
        return Err(CliError::Other("every scene failed".into()));
    }
    let _ = writeln!(timing, "total_wall_s={wall_s:.6}");

    let report = BenchReport {
        version: VERSION.to_string(),
        config: template,
        scale: a.scale,
        average: average(&rows),
        rows,
        reference: Reference {
            average_error: REFERENCE_AVERAGE_ERROR,
            runtime_minutes: REFERENCE_RUNTIME_MIN,
            note: "published figures with unspecified metric variant and hardware; not thresholds"
                .into(),
        },
    };
    let out = &a.common.out;
    fs::create_dir_all(out).map_err(|e| CliError::io(out, e))?;
    let table = render_table(&report);
    write_text(&out.join("bench.txt"), &table)?;
    write_json(&out.join("bench.json"), &report)?;
    write_text(&out.join("bench_timing.txt"), &timing)?;
    print!("{table}");
    println!("total wall time: {wall_s:.2} s");
    Ok(())
}
