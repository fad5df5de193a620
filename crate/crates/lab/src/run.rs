//! The `run`, `validate` and `report` operations behind the CLI.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use latticetherm_core::thermo::{extrapolate, Trend};
use latticetherm_core::DimensionCap;

use crate::config::{parse_config, ExperimentConfig};
use crate::error::{LabError, Result};
use crate::experiments::{execute, sign_verdict};
use crate::formats::{fmt_f64, Table};
use crate::manifest::{now_rfc3339, RunManifest, MANIFEST_FILE};

pub const DEFAULT_OUTPUT: &str = "latticetherm-out";

#[derive(Debug, Clone, Default)]
pub struct RunOptions {
    /// Overrides the config's `output`.
    pub out: Option<PathBuf>,
    /// `None` keeps the default dimension cap.
    pub cap: Option<DimensionCap>,
    /// Worker threads; `None` uses rayon's default.
    pub threads: Option<usize>,
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| LabError::io(path.display(), e))?;
    parse_config(&text)
}

/// Parses and checks a config, including the resource cap.
pub fn validate(path: &Path, cap: Option<DimensionCap>) -> Result<ExperimentConfig> {
    let cfg = load_config(path)?;
    cfg.check_cap(cap.unwrap_or_default())?;
    Ok(cfg)
}

/// Runs the experiment and writes its CSVs, summary and manifest. Returns the
/// output directory.
pub fn run(path: &Path, opts: &RunOptions) -> Result<(PathBuf, RunManifest)> {
    let cfg = load_config(path)?;
    let cap = opts.cap.unwrap_or_default();
    cfg.check_cap(cap)?;
    let out_dir = opts.out.clone().or_else(|| cfg.output.clone()).unwrap_or_else(|| PathBuf::from(DEFAULT_OUTPUT));

    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = opts.threads {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| LabError::io("thread pool", e))?;
    let started = now_rfc3339();
    let outcome = pool.install(|| execute(&cfg, cap))?;
    let finished = now_rfc3339();

    std::fs::create_dir_all(&out_dir).map_err(|e| LabError::io(out_dir.display(), e))?;
    for a in &outcome.artifacts {
        let p = out_dir.join(&a.name);
        std::fs::write(&p, &a.contents).map_err(|e| LabError::io(p.display(), e))?;
    }
    let manifest = RunManifest {
        version: env!("CARGO_PKG_VERSION").into(),
        kind: cfg.kind.name().into(),
        config_hash: cfg.hash.clone(),
        seed: cfg.seed,
        threads: pool.current_num_threads(),
        started,
        finished,
        timings: outcome.timings,
        outputs: outcome.artifacts.iter().map(|a| a.name.clone()).collect(),
        config: serde_json::from_str(&cfg.canonical).expect("canonical config is JSON"),
    };
    let p = out_dir.join(MANIFEST_FILE);
    std::fs::write(&p, manifest.to_json()).map_err(|e| LabError::io(p.display(), e))?;
    Ok((out_dir, manifest))
}

fn read_table(dir: &Path, name: &str) -> Result<Table> {
    let p = dir.join(name);
    let text = std::fs::read_to_string(&p).map_err(|_| LabError::ManifestMissing(p.clone()))?;
    Table::from_csv(&text)
}

fn num(s: &str) -> Result<f64> {
    s.parse().map_err(|_| LabError::Io(format!("not a number in results: {s}")))
}

/// Plain-text summary of a finished run.
pub fn report(manifest_path: &Path) -> Result<String> {
    let (m, dir) = RunManifest::load(manifest_path)?;
    let mut r = String::new();
    let w = &mut r;
    writeln!(w, "run of kind {} (latticetherm {})", m.kind, m.version).ok();
    writeln!(w, "config hash {}", m.config_hash).ok();
    writeln!(w, "started {} finished {}", m.started, m.finished).ok();
    writeln!(w, "threads {}", m.threads).ok();
    writeln!(w).ok();
    writeln!(w, "timings").ok();
    for t in &m.timings {
        writeln!(w, "  {:<32} {:>10.3} s", t.operation, t.seconds).ok();
    }
    for name in &m.outputs {
        if name.ends_with(".csv") {
            let table = read_table(&dir, name)?;
            if table.has_columns(&["L", "sites", "value", "bound"]) {
                thermo_section(w, name, &table)?;
            } else if table.has_columns(&["T", "observable", "value"]) {
                quench_section(w, name, &table)?;
            } else if name == "bounds.csv" {
                bounds_section(w, name, &table)?;
            }
        }
    }
    for name in m.outputs.iter().filter(|n| n.ends_with(".txt")) {
        let p = dir.join(name);
        let text = std::fs::read_to_string(&p).map_err(|_| LabError::ManifestMissing(p.clone()))?;
        writeln!(w, "\n{name}").ok();
        for line in text.lines() {
            writeln!(w, "  {line}").ok();
        }
    }
    Ok(r)
}

fn thermo_section(w: &mut String, name: &str, t: &Table) -> Result<()> {
    writeln!(w, "\n{name}").ok();
    writeln!(w, "  {:>4} {:>6} {:>24} {:>24}", "L", "sites", "value", "bound").ok();
    let mut pts = Vec::new();
    for row in &t.rows {
        writeln!(w, "  {:>4} {:>6} {:>24} {:>24}", row[0], row[1], row[2], row[3]).ok();
        pts.push((num(&row[0])?, num(&row[2])?));
    }
    let values: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let trend = Trend::of(&values);
    writeln!(w, "  trend: {}", trend.as_str()).ok();
    let verdict = if trend == Trend::StrictlyDecreasing { "decreasing" } else { "not decreasing" };
    writeln!(w, "  verdict: {verdict}").ok();
    if pts.len() >= 3 {
        if let Ok(fit) = extrapolate(&pts) {
            writeln!(w, "  fit value ~ a + b/L: a = {}, b = {}, residual = {}", fmt_f64(fit.limit), fmt_f64(fit.slope), fmt_f64(fit.residual)).ok();
        }
    }
    Ok(())
}

fn quench_section(w: &mut String, name: &str, t: &Table) -> Result<()> {
    writeln!(w, "\n{name}").ok();
    let rows: Vec<(f64, f64)> = t
        .rows
        .iter()
        .filter(|r| r[1] == "energy_psi")
        .map(|r| Ok((num(&r[0])?, num(&r[2])?)))
        .collect::<Result<_>>()?;
    let Some(&(_, e0)) = rows.iter().find(|r| r.0 == 0.0) else {
        writeln!(w, "  no T = 0 row").ok();
        return Ok(());
    };
    writeln!(w, "  {:>24} {:>24}", "T", "energy_psi gain").ok();
    let mut finite = Vec::new();
    for &(tt, e) in rows.iter().filter(|r| r.0 > 0.0) {
        writeln!(w, "  {:>24} {:>24}", fmt_f64(tt), fmt_f64(e - e0)).ok();
        if tt.is_finite() {
            finite.push(e - e0);
        }
    }
    writeln!(w, "  sign over finite T: {}", sign_verdict(finite)).ok();
    Ok(())
}

fn bounds_section(w: &mut String, name: &str, t: &Table) -> Result<()> {
    writeln!(w, "\n{name}").ok();
    let (u, l) = (t.column("upper_margin"), t.column("lower_margin"));
    let (Some(u), Some(l)) = (u, l) else { return Ok(()) };
    let mut min = f64::INFINITY;
    for row in &t.rows {
        min = min.min(num(&row[u])?).min(num(&row[l])?);
    }
    writeln!(w, "  {} perturbations, smallest margin {}", t.rows.len(), fmt_f64(min)).ok();
    Ok(())
}
