//! Files written next to every disparity map.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use msibm::codec::{write_cost_pfm, write_disparity_pgm, write_pfm};
use msibm::matcher::{LevelTiming, LevelTrace};
use msibm::{CostMap, DisparityMap, MatchConfig, TraceSummary};
use serde::{Deserialize, Serialize};

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Msibm,
    Baseline,
}

/// Evaluation counters; identical for identical inputs and settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraceDoc {
    pub method: Method,
    pub width: usize,
    pub height: usize,
    pub d_max: u32,
    pub total_evals: u64,
    /// Coarsest first; empty for the baseline.
    pub levels: Vec<LevelTrace>,
}

impl TraceDoc {
    pub fn summary(&self) -> TraceSummary {
        TraceSummary {
            total_evals: self.total_evals,
            trust_fractions: self
                .levels
                .iter()
                .map(|l| (l.level, l.trust_fraction()))
                .collect(),
        }
    }

    pub fn to_key_values(&self) -> String {
        let mut s = String::new();
        let method = match self.method {
            Method::Msibm => "msibm",
            Method::Baseline => "baseline",
        };
        let _ = writeln!(s, "method={method}");
        let _ = writeln!(s, "width={}", self.width);
        let _ = writeln!(s, "height={}", self.height);
        let _ = writeln!(s, "d_max={}", self.d_max);
        let _ = writeln!(s, "total_evals={}", self.total_evals);
        let _ = writeln!(s, "levels={}", self.levels.len());
        for l in &self.levels {
            let p = format!("level{}", l.level);
            let c = &l.counts;
            let _ = writeln!(s, "{p}.size={}x{}", l.width, l.height);
            let _ = writeln!(s, "{p}.d_max={}", l.d_max);
            let _ = writeln!(s, "{p}.block={}", l.block);
            let _ = writeln!(s, "{p}.trusted_pixels={}", c.trusted_pixels);
            let _ = writeln!(s, "{p}.trust_fraction={:.6}", l.trust_fraction());
            let _ = writeln!(s, "{p}.window_evals={}", c.window_evals);
            let _ = writeln!(s, "{p}.max_window_evals={}", c.max_window_evals);
            let _ = writeln!(s, "{p}.full_search_pixels={}", c.full_search_pixels);
            let _ = writeln!(s, "{p}.full_search_evals={}", c.full_search_evals);
            let _ = writeln!(s, "{p}.refined_pixels={}", c.refined_pixels);
            let _ = writeln!(s, "{p}.refine_evals={}", c.refine_evals);
            let _ = writeln!(s, "{p}.median_candidates={}", l.median_candidates);
            let _ = writeln!(s, "{p}.median_changed={}", l.median_changed);
            let _ = writeln!(s, "{p}.total_evals={}", l.total_evals());
        }
        s
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DMaxSource {
    Flag,
    Calib,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Timings {
    pub decode_s: f64,
    pub pyramid_s: f64,
    pub levels: Vec<LevelTiming>,
    pub match_s: f64,
    pub write_s: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outputs {
    pub disparity_pfm: PathBuf,
    pub disparity_pgm: PathBuf,
    pub cost_pfm: PathBuf,
    pub trace_txt: PathBuf,
    pub trace_json: PathBuf,
    pub manifest_txt: PathBuf,
    pub manifest_json: PathBuf,
}

impl Outputs {
    pub fn in_dir(dir: &Path) -> Self {
        Self {
            disparity_pfm: dir.join("disparity.pfm"),
            disparity_pgm: dir.join("disparity.pgm"),
            cost_pfm: dir.join("cost.pfm"),
            trace_txt: dir.join("trace.txt"),
            trace_json: dir.join("trace.json"),
            manifest_txt: dir.join("manifest.txt"),
            manifest_json: dir.join("manifest.json"),
        }
    }
}

/// Everything needed to repeat a run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub version: String,
    pub method: Method,
    pub left: PathBuf,
    pub right: PathBuf,
    pub calib: Option<PathBuf>,
    pub d_max_source: DMaxSource,
    /// For the baseline only `d_max`, `base_block`, `sigma_eps` and `sign` apply.
    pub config: MatchConfig,
    /// `None` means one worker per core.
    pub threads: Option<usize>,
    pub levels_used: u32,
    pub timings: Timings,
    pub outputs: Outputs,
}

impl RunManifest {
    pub fn to_key_values(&self) -> String {
        let c = &self.config;
        let mut s = String::new();
        let _ = writeln!(s, "version={}", self.version);
        let _ = writeln!(s, "method={}", json_word(&self.method));
        let _ = writeln!(s, "left={}", self.left.display());
        let _ = writeln!(s, "right={}", self.right.display());
        if let Some(calib) = &self.calib {
            let _ = writeln!(s, "calib={}", calib.display());
        }
        let _ = writeln!(s, "d_max={}", c.d_max);
        let _ = writeln!(s, "d_max_source={}", json_word(&self.d_max_source));
        let _ = writeln!(s, "levels={}", json_word(&c.levels));
        let _ = writeln!(s, "levels_used={}", self.levels_used);
        let _ = writeln!(s, "block={}", c.base_block);
        let _ = writeln!(s, "alpha={}", c.alpha);
        let _ = writeln!(s, "beta={}", c.beta);
        let _ = writeln!(s, "sigma_eps={:e}", c.sigma_eps);
        let _ = writeln!(s, "sign={}", json_word(&c.sign));
        let threads = self.threads.map_or("auto".to_string(), |n| n.to_string());
        let _ = writeln!(s, "threads={threads}");
        let t = &self.timings;
        let _ = writeln!(s, "time.decode_s={:.6}", t.decode_s);
        let _ = writeln!(s, "time.pyramid_s={:.6}", t.pyramid_s);
        for l in &t.levels {
            let p = format!("time.level{}", l.level);
            let _ = writeln!(s, "{p}.prepare_s={:.6}", l.prepare_s);
            let _ = writeln!(s, "{p}.upsample_s={:.6}", l.upsample_s);
            let _ = writeln!(s, "{p}.match_s={:.6}", l.match_s);
            let _ = writeln!(s, "{p}.median_s={:.6}", l.median_s);
        }
        let _ = writeln!(s, "time.match_s={:.6}", t.match_s);
        let _ = writeln!(s, "time.write_s={:.6}", t.write_s);
        let o = &self.outputs;
        for (k, p) in [
            ("disparity_pfm", &o.disparity_pfm),
            ("disparity_pgm", &o.disparity_pgm),
            ("cost_pfm", &o.cost_pfm),
            ("trace_txt", &o.trace_txt),
            ("trace_json", &o.trace_json),
        ] {
            let _ = writeln!(s, "output.{k}={}", p.display());
        }
        s
    }
}

/// Compact rendering of a serde value: `"auto"` becomes `auto`,
/// `{"fixed":2}` stays JSON.
fn json_word<T: Serialize>(v: &T) -> String {
    let s = serde_json::to_string(v).expect("serializable");
    s.trim_matches('"').to_string()
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable");
    text.push('\n');
    write_text(path, &text)
}

pub fn write_maps(
    o: &Outputs,
    d: &DisparityMap,
    c: &CostMap,
    d_max: u32,
) -> Result<(), CliError> {
    write_pfm(d, &o.disparity_pfm).map_err(|e| CliError::codec(&o.disparity_pfm, e))?;
    write_disparity_pgm(d, &o.disparity_pgm, d_max, 255)
        .map_err(|e| CliError::codec(&o.disparity_pgm, e))?;
    write_cost_pfm(c, &o.cost_pfm).map_err(|e| CliError::codec(&o.cost_pfm, e))
}

pub fn write_trace(o: &Outputs, trace: &TraceDoc) -> Result<(), CliError> {
    write_text(&o.trace_txt, &trace.to_key_values())?;
    write_json(&o.trace_json, trace)
}

pub fn write_manifest(manifest: &RunManifest) -> Result<(), CliError> {
    write_text(&manifest.outputs.manifest_txt, &manifest.to_key_values())?;
    write_json(&manifest.outputs.manifest_json, manifest)
}
