//! Executes a validated config and renders its result files.
//!
//! Independent volumes run on the rayon pool; results are collected in input
//! order and every random input is drawn from the seed before dispatch, so
//! output bytes do not depend on the thread count.

use std::time::Instant;

use latticetherm_core::dynamics::{run_quench, sandwich_bounds, QuenchExperiment, QuenchReport, SampleKind, WindowSample};
use latticetherm_core::fermion::number_interaction;
use latticetherm_core::interaction::{default_probes, hamiltonian_density_difference, physically_equivalent, Equivalence};
use latticetherm_core::thermo::{
    extrapolate, gibbs_state, relative_entropy, thermo_point, variational_gap, weak_gibbs_certificate, ExtrapolationReport,
    Trend, WindowedGibbs,
};
use latticetherm_core::{CMatrix, DensityMatrix, DimensionCap, Interaction, LatticeOperator, Point, Volume, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Kind};
use crate::error::Result;
use crate::formats::{fmt_f64, thermo_table, Table};
use crate::manifest::{timed, Timing};

/// Tolerances behind the verdict lines of the summaries.
pub const GAP_TOL: f64 = 1e-10;
pub const MARGIN_TOL: f64 = 1e-9;
pub const HIAI_PETZ_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub contents: String,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    pub timings: Vec<Timing>,
}

impl Outcome {
    fn new() -> Self {
        Self { artifacts: Vec::new(), timings: Vec::new() }
    }

    fn csv(&mut self, name: &str, table: &Table) {
        self.artifacts.push(Artifact { name: name.into(), contents: table.to_csv() });
    }

    fn text(&mut self, name: &str, summary: Summary) {
        self.artifacts.push(Artifact { name: name.into(), contents: summary.0 });
    }
}

/// `key = value` lines in insertion order.
#[derive(Debug, Default)]
pub struct Summary(String);

impl Summary {
    fn line(&mut self, key: impl AsRef<str>, value: impl AsRef<str>) {
        self.0.push_str(key.as_ref());
        self.0.push_str(" = ");
        self.0.push_str(value.as_ref());
        self.0.push('\n');
    }

    fn num(&mut self, key: impl AsRef<str>, x: f64) {
        self.line(key, fmt_f64(x));
    }

    fn fit(&mut self, prefix: &str, fit: &ExtrapolationReport) {
        self.num(format!("{prefix}.limit"), fit.limit);
        self.num(format!("{prefix}.slope"), fit.slope);
        self.num(format!("{prefix}.residual"), fit.residual);
        self.line(format!("{prefix}.trend"), fit.trend.as_str());
    }
}

fn header(cfg: &ExperimentConfig) -> Summary {
    let mut s = Summary::default();
    s.line("kind", cfg.kind.name());
    s.line("config_hash", &cfg.hash);
    s.num("beta", cfg.beta);
    s.line("dimension", cfg.dimension.to_string());
    s
}

fn sides_fit(points: &[(usize, f64)]) -> Option<ExtrapolationReport> {
    let pts: Vec<(f64, f64)> = points.iter().map(|&(l, v)| (l as f64, v)).collect();
    (pts.len() >= 3).then(|| extrapolate(&pts).ok()).flatten()
}

/// Runs `f` over the items in parallel, keeping order, and records one
/// timing per item.
fn per_volume<T: Send>(
    timings: &mut Vec<Timing>,
    label: &str,
    sides: &[usize],
    f: impl Fn(usize, usize) -> Result<T> + Sync,
) -> Result<Vec<T>> {
    let out: Vec<(T, f64)> = sides
        .par_iter()
        .enumerate()
        .map(|(i, &l)| {
            let start = Instant::now();
            f(i, l).map(|v| (v, start.elapsed().as_secs_f64()))
        })
        .collect::<Result<_>>()?;
    Ok(out
        .into_iter()
        .zip(sides)
        .map(|((v, secs), l)| {
            timings.push(Timing { operation: format!("{label} L={l}"), seconds: secs });
            v
        })
        .collect())
}

pub fn execute(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    cfg.check_cap(cap)?;
    match cfg.kind {
        Kind::Pressure => pressure(cfg, cap),
        Kind::Gibbs => gibbs(cfg, cap),
        Kind::WeakGibbs => weak_gibbs(cfg, cap),
        Kind::Equiv => equiv(cfg, cap),
        Kind::Quench | Kind::FermionQuench => quench(cfg, cap),
        Kind::Bounds => bounds(cfg, cap),
    }
}

fn cube(cfg: &ExperimentConfig, side: usize) -> Result<Volume> {
    Ok(Volume::cube(cfg.dimension, side)?)
}

fn pressure(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let points = per_volume(&mut out.timings, "thermo_point", &cfg.volumes, |_, l| {
        Ok(thermo_point(&cfg.phi, &cube(cfg, l)?, cfg.beta, cap)?)
    })?;
    // |P_Λ|/|Λ| ≤ log d + β‖Φ‖_0
    let bound = (cfg.phi.site_dim() as f64).ln() + cfg.beta * cfg.phi.br_norm(0.0);
    let rows = cfg.volumes.iter().zip(&points).map(|(&l, t)| (l, t.sites, t.pressure_per_site, bound));
    out.csv("pressure.csv", &thermo_table(rows));

    let mut thermo = Table::new(&["L", "sites", "pressure", "entropy", "energy"]);
    for (&l, t) in cfg.volumes.iter().zip(&points) {
        thermo.push(vec![
            l.to_string(),
            t.sites.to_string(),
            fmt_f64(t.pressure_per_site),
            fmt_f64(t.entropy_per_site),
            fmt_f64(t.energy_per_site),
        ]);
    }
    out.csv("thermo.csv", &thermo);

    let mut s = header(cfg);
    let series: Vec<(usize, f64)> = cfg.volumes.iter().copied().zip(points.iter().map(|t| t.pressure_per_site)).collect();
    if let Some(fit) = sides_fit(&series) {
        s.fit("pressure", &fit);
    }
    out.text("summary.txt", s);
    Ok(out)
}

/// `G G†/Tr` with `G` a random `dim × rank` matrix of random rank.
fn random_state_matrix(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let rank = rng.random_range(1..=dim);
    let g = CMatrix::from_fn(dim, rank, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    let m = &g * g.adjoint();
    let tr = m.trace().re;
    m / C64::new(tr, 0.0)
}

fn random_hermitian(rng: &mut ChaCha8Rng, dim: usize) -> CMatrix {
    let g = CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)));
    (&g + g.adjoint()) * C64::new(0.5, 0.0)
}

fn gibbs(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = cfg.phi.site_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inputs = Vec::with_capacity(cfg.volumes.len());
    for &l in &cfg.volumes {
        let dim = cube(cfg, l)?.hilbert_dim(d, cap)?;
        inputs.push((0..cfg.probes).map(|_| random_state_matrix(&mut rng, dim)).collect::<Vec<_>>());
    }
    let phi_b = cfg.phi.scaled(cfg.beta);
    let results = per_volume(&mut out.timings, "variational", &cfg.volumes, |i, l| {
        let vol = cube(cfg, l)?;
        let omega = gibbs_state(&cfg.phi, &vol, cfg.beta, cap)?;
        let gibbs_gap = variational_gap(&omega, &phi_b, cap)?;
        let mut probes = Vec::with_capacity(inputs[i].len());
        for m in &inputs[i] {
            let rho = DensityMatrix::new(LatticeOperator::hermitian(vol.clone(), d, m.clone())?)?;
            probes.push((variational_gap(&rho, &phi_b, cap)?, relative_entropy(&rho, &omega)?));
        }
        Ok((vol.len(), gibbs_gap, probes))
    })?;

    let mut details = Table::new(&["L", "sites", "probe", "gap", "relative_entropy"]);
    let mut rows = Vec::new();
    let (mut min_gap, mut max_gibbs_gap, mut max_identity) = (f64::INFINITY, 0.0f64, 0.0f64);
    for (&l, (sites, gibbs_gap, probes)) in cfg.volumes.iter().zip(&results) {
        let mut vol_min = f64::INFINITY;
        for (k, &(gap, rel)) in probes.iter().enumerate() {
            details.push(vec![l.to_string(), sites.to_string(), k.to_string(), fmt_f64(gap), fmt_f64(rel)]);
            vol_min = vol_min.min(gap);
            max_identity = max_identity.max((gap - rel).abs());
        }
        min_gap = min_gap.min(vol_min);
        max_gibbs_gap = max_gibbs_gap.max(gibbs_gap.abs());
        rows.push((l, *sites, vol_min, *gibbs_gap));
    }
    out.csv("gibbs.csv", &thermo_table(rows));
    out.csv("gibbs_probes.csv", &details);

    let mut s = header(cfg);
    s.line("seed", cfg.seed.to_string());
    s.line("probes_per_volume", cfg.probes.to_string());
    s.num("min_probe_gap", min_gap);
    s.num("max_gibbs_gap", max_gibbs_gap);
    s.num("max_gap_minus_relative_entropy", max_identity);
    let holds = min_gap >= -GAP_TOL && max_gibbs_gap <= GAP_TOL;
    s.line("verdict", if holds { "gibbs state minimizes the free energy" } else { "variational principle violated" });
    out.text("summary.txt", s);
    Ok(out)
}

fn weak_gibbs(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let psi = cfg.psi.as_ref().unwrap_or(&cfg.phi);
    let amb_side = cfg.weakgibbs_ambient();
    let ambient = cube(cfg, amb_side)?;
    let family = timed(&mut out.timings, format!("ambient gibbs L={amb_side}"), || {
        WindowedGibbs::new(psi, &ambient, cfg.beta, cap)
    })?;
    let phi_b = cfg.phi.scaled(cfg.beta);
    let records = per_volume(&mut out.timings, "certificate", &cfg.volumes, |_, l| {
        let window = ambient.centered_window(l)?;
        let cert = weak_gibbs_certificate(&phi_b, &family, &[window], cap)?;
        Ok(cert.records[0])
    })?;

    let rows = cfg.volumes.iter().zip(&records).map(|(&l, r)| (l, r.sites, r.per_site(), r.hiai_petz_bound() / r.sites as f64));
    out.csv("certificate.csv", &thermo_table(rows));
    let mut details =
        Table::new(&["L", "sites", "c", "d_lower", "d_upper", "defect", "log_ratio_min", "surface_norm"]);
    for (&l, r) in cfg.volumes.iter().zip(&records) {
        details.push(vec![
            l.to_string(),
            r.sites.to_string(),
            fmt_f64(r.c),
            fmt_f64(r.d_lower),
            fmt_f64(r.d_upper),
            fmt_f64(r.defect),
            fmt_f64(r.log_ratio_min),
            fmt_f64(r.surface_norm),
        ]);
    }
    out.csv("certificate_details.csv", &details);

    let mut s = header(cfg);
    s.line("ambient", amb_side.to_string());
    s.line("state", if cfg.psi.is_some() { "windows of gibbs(psi)" } else { "windows of gibbs(phi)" });
    let per_site: Vec<f64> = records.iter().map(|r| r.per_site()).collect();
    let decreasing = Trend::of(&per_site) == Trend::StrictlyDecreasing;
    s.line("c_per_site.verdict", if decreasing { "decreasing" } else { "not decreasing" });
    let series: Vec<(usize, f64)> = cfg.volumes.iter().copied().zip(per_site).collect();
    if let Some(fit) = sides_fit(&series) {
        s.fit("c_per_site", &fit);
    }
    let worst = records.iter().map(|r| r.log_ratio_min + r.hiai_petz_bound()).fold(f64::INFINITY, f64::min);
    s.num("hiai_petz.min_slack", worst);
    s.line("hiai_petz.verdict", if worst >= -HIAI_PETZ_TOL { "holds" } else { "violated" });
    let violations: Vec<String> = records.iter().flat_map(|r| r.violations()).collect();
    s.line("record_violations", violations.len().to_string());
    out.text("summary.txt", s);
    Ok(out)
}

fn equiv(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let psi = cfg.psi.as_ref().expect("validated: equiv has psi");
    let verdict = timed(&mut out.timings, "probe commutators", || -> Result<Equivalence> {
        let probes = default_probes(&cfg.phi, psi)?;
        Ok(physically_equivalent(&cfg.phi, psi, &probes, cfg.tolerance)?)
    })?;
    let diffs = per_volume(&mut out.timings, "density difference", &cfg.volumes, |_, l| {
        Ok(hamiltonian_density_difference(&cfg.phi, psi, &[cube(cfg, l)?], cap)?[0])
    })?;
    // ‖H_Λ(Δ)‖/|Λ| and the subtracted constant are each at most ‖Δ‖_0
    let bound = 2.0 * cfg.phi.sub(psi)?.br_norm(0.0);
    out.csv("equiv.csv", &thermo_table(cfg.volumes.iter().zip(&diffs).map(|(&l, d)| (l, d.sites, d.value, bound))));

    let mut s = header(cfg);
    s.num("tolerance", cfg.tolerance);
    match &verdict {
        Equivalence::Equivalent { max_norm } => {
            s.line("verdict", "equivalent");
            s.num("max_commutator_norm", *max_norm);
        }
        Equivalence::Inequivalent { witness, norm } => {
            s.line("verdict", "inequivalent");
            s.line("witness", witness);
            s.num("witness_norm", *norm);
        }
    }
    let values: Vec<f64> = diffs.iter().map(|d| d.value).collect();
    s.line("density_difference.trend", Trend::of(&values).as_str());
    if let Some(last) = values.last() {
        s.num("density_difference.last", *last);
    }
    out.text("summary.txt", s);
    Ok(out)
}

/// Hermitian perturbation on one site or a nearest-neighbour pair inside `vol`,
/// with operator norm `norm`.
fn random_local(rng: &mut ChaCha8Rng, vol: &Volume, site_dim: usize, norm: f64) -> Result<LatticeOperator> {
    let sites = vol.sites();
    let x = sites[rng.random_range(0..sites.len())].clone();
    let mut support = vec![x.clone()];
    if rng.random_bool(0.5) {
        let axis = rng.random_range(0..vol.dimension());
        let mut e = vec![0; vol.dimension()];
        e[axis] = 1;
        let y = x.add(&Point::new(e));
        if vol.contains(&y) {
            support.push(y);
        }
    }
    let local = Volume::from_sites(vol.dimension(), support)?;
    let dim = site_dim.pow(local.len() as u32);
    let op = LatticeOperator::hermitian(local, site_dim, random_hermitian(rng, dim))?;
    let scaled = op.scale(norm / op.operator_norm());
    Ok(scaled.embed(vol)?)
}

fn bounds(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let d = cfg.phi.site_dim();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inputs = Vec::with_capacity(cfg.volumes.len());
    for &l in &cfg.volumes {
        let vol = cube(cfg, l)?;
        vol.hilbert_dim(d, cap)?;
        let vs: Vec<LatticeOperator> =
            (0..cfg.probes).map(|_| random_local(&mut rng, &vol, d, cfg.perturbation_norm)).collect::<Result<_>>()?;
        inputs.push(vs);
    }
    let phi_b = cfg.phi.scaled(cfg.beta);
    let results = per_volume(&mut out.timings, "sandwich", &cfg.volumes, |i, l| {
        let h = phi_b.local_hamiltonian(&cube(cfg, l)?, cap)?;
        inputs[i].iter().map(|v| Ok(sandwich_bounds(&h, v)?)).collect::<Result<Vec<_>>>()
    })?;

    let mut table = Table::new(&["L", "sites", "probe", "c_v", "d_v", "upper_margin", "lower_margin"]);
    let mut min_margin = f64::INFINITY;
    for (&l, rs) in cfg.volumes.iter().zip(&results) {
        let sites = l.pow(cfg.dimension as u32);
        for (k, b) in rs.iter().enumerate() {
            table.push(vec![
                l.to_string(),
                sites.to_string(),
                k.to_string(),
                fmt_f64(b.c_v),
                fmt_f64(b.d_v),
                fmt_f64(b.upper_margin),
                fmt_f64(b.lower_margin),
            ]);
            min_margin = min_margin.min(b.upper_margin).min(b.lower_margin);
        }
    }
    out.csv("bounds.csv", &table);

    let mut s = header(cfg);
    s.line("seed", cfg.seed.to_string());
    s.line("probes_per_volume", cfg.probes.to_string());
    s.num("perturbation_norm", cfg.perturbation_norm);
    s.num("min_margin", min_margin);
    s.line("verdict", if min_margin >= -MARGIN_TOL { "holds" } else { "violated" });
    out.text("summary.txt", s);
    Ok(out)
}

fn observables(sample: &WindowSample) -> Vec<(&'static str, f64)> {
    let mut v = vec![("energy_psi", sample.energy_psi), ("energy_phi", sample.energy_phi)];
    if let Some(n) = sample.number {
        v.push(("number", n));
    }
    v.push(("entropy_density", sample.entropy_density));
    v
}

fn quench_tables(report: &QuenchReport) -> (Table, Table) {
    let mut times = Table::new(&["t", "observable", "value"]);
    for s in &report.times {
        if let SampleKind::Time(t) = s.kind {
            for (name, v) in observables(s) {
                times.push(vec![fmt_f64(t), name.into(), fmt_f64(v)]);
            }
        }
    }
    // T = 0 is the initial state, T = inf the diagonal ensemble
    let mut horizons = Table::new(&["T", "observable", "value"]);
    let mut push = |t: f64, s: &WindowSample| {
        for (name, v) in observables(s) {
            horizons.push(vec![fmt_f64(t), name.into(), fmt_f64(v)]);
        }
    };
    push(0.0, &report.initial);
    for s in &report.horizons {
        if let SampleKind::Horizon(t) = s.kind {
            push(t, s);
        }
    }
    push(f64::INFINITY, &report.diagonal);
    (times, horizons)
}

/// `positive`, `negative`, `mixed`, or `none` for an empty series.
pub fn sign_verdict(values: impl IntoIterator<Item = f64>) -> &'static str {
    let (mut pos, mut neg, mut any) = (true, true, false);
    for v in values {
        any = true;
        pos &= v > 0.0;
        neg &= v < 0.0;
    }
    match (any, pos, neg) {
        (false, _, _) => "none",
        (_, true, _) => "positive",
        (_, _, true) => "negative",
        _ => "mixed",
    }
}

fn quench(cfg: &ExperimentConfig, cap: DimensionCap) -> Result<Outcome> {
    let mut out = Outcome::new();
    let psi: Interaction = cfg.psi.clone().expect("validated: quench has psi");
    let mut exp = QuenchExperiment::new(psi, cfg.phi.clone(), cfg.ambient.unwrap_or(0), cfg.window.unwrap_or(0));
    exp.beta = cfg.beta;
    exp.times = cfg.times.clone();
    exp.horizons = cfg.horizons.clone();
    exp.method = cfg.averaging;
    exp.cap = cap;
    if cfg.kind == Kind::FermionQuench {
        exp.number = Some(number_interaction());
    }
    let report = timed(&mut out.timings, "run_quench", || run_quench(&exp))?;
    let (times, horizons) = quench_tables(&report);
    out.csv("quench_times.csv", &times);
    out.csv("quench_horizons.csv", &horizons);

    let mut s = header(cfg);
    s.line("ambient", exp.ambient_side.to_string());
    s.line("window", exp.window_side.to_string());
    s.line("averaging", match cfg.averaging {
        latticetherm_core::dynamics::CesaroMethod::ExactDephasing => "exact".to_string(),
        latticetherm_core::dynamics::CesaroMethod::Trapezoid { points: None } => "trapezoid".to_string(),
        latticetherm_core::dynamics::CesaroMethod::Trapezoid { points: Some(n) } => format!("trapezoid({n})"),
    });
    for (name, v) in observables(&report.initial) {
        s.num(format!("initial.{name}"), v);
    }
    for (name, v) in observables(&report.diagonal) {
        s.num(format!("diagonal.{name}"), v);
    }
    let gains = report.energy_psi_gain();
    for (t, g) in &gains {
        s.num(format!("gain_energy_psi.T={t}"), *g);
    }
    s.num("gain_energy_psi.T=inf", report.diagonal.energy_psi - report.initial.energy_psi);
    s.line("gain_energy_psi.sign", sign_verdict(gains.iter().map(|g| g.1)));
    if let (Some(n0), Some(n1)) = (report.initial.number, report.diagonal.number) {
        s.num("number_drift.T=inf", n1 - n0);
    }
    // fits in 1/T over the finite horizons
    if report.horizons.len() >= 3 {
        for (k, (name, _)) in observables(&report.initial).into_iter().enumerate() {
            let pts: Vec<(f64, f64)> = report
                .horizons
                .iter()
                .filter_map(|h| match h.kind {
                    SampleKind::Horizon(t) => Some((t, observables(h)[k].1)),
                    _ => None,
                })
                .collect();
            if let Ok(fit) = extrapolate(&pts) {
                s.fit(&format!("fit.{name}"), &fit);
            }
        }
    }
    out.text("quench_summary.txt", s);
    Ok(out)
}
