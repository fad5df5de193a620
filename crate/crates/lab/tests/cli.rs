use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use latticetherm_lab::formats::Table;
use latticetherm_lab::RunManifest;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_latticetherm"));
    c.env_remove("LATTICETHERM_THREADS");
    c
}

fn crate_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn recipe(name: &str) -> PathBuf {
    crate_dir().join("recipes").join(name)
}

fn run(config: &Path, out: &Path, extra: &[&str]) -> Output {
    bin().arg("run").arg("--config").arg(config).arg("--out").arg(out).args(extra).output().unwrap()
}

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn read(p: impl AsRef<Path>) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn malformed_configs_are_rejected_with_location() {
    let expected = [
        ("01_syntax", 4, "<root>"),
        ("02_missing_kind", 1, "kind"),
        ("03_unknown_kind", 2, "kind"),
        ("04_unknown_field", 5, "temperature"),
        ("05_field_of_other_kind", 5, "horizons"),
        ("06_negative_beta", 5, "beta"),
        ("07_beta_string", 5, "beta"),
        ("08_unknown_family", 3, "phi.family"),
        ("09_unknown_param", 3, "phi.params.g"),
        ("10_volumes_not_increasing", 4, "volumes[2]"),
        ("11_zero_volume", 4, "volumes[0]"),
        ("12_matrix_size", 6, "phi.terms[0].matrix"),
        ("13_not_hermitian", 6, "phi.terms[0]"),
        ("14_shape_order", 6, "phi.terms[0].shape[1]"),
        ("15_fermion_missing_mu", 3, "psi.mu"),
        ("16_fermion_quench_spin_block", 4, "phi"),
        ("17_window_margin", 5, "ambient"),
        ("18_horizons_decreasing", 7, "horizons[2]"),
        ("19_bad_averaging", 7, "averaging.method"),
        ("20_equiv_missing_psi", 1, "psi"),
    ];
    let dir = crate_dir().join("tests/malformed");
    let mut files: Vec<_> = std::fs::read_dir(&dir).unwrap().map(|e| e.unwrap().path()).collect();
    files.sort();
    assert_eq!(files.len(), expected.len());
    let out = tempfile::tempdir().unwrap();
    for (path, (stem, line, field)) in files.iter().zip(expected) {
        assert_eq!(path.file_stem().unwrap(), stem);
        for o in [
            bin().arg("validate").arg("--config").arg(path).output().unwrap(),
            run(path, &out.path().join(stem), &[]),
        ] {
            let err = stderr(&o);
            assert_eq!(o.status.code(), Some(2), "{stem}: {err}");
            assert!(err.contains(&format!("line {line},")), "{stem}: {err}");
            assert!(err.contains(&format!("field `{field}`")), "{stem}: {err}");
        }
        assert!(!out.path().join(stem).exists(), "{stem} produced output");
    }
}

#[test]
fn free_spins_have_pressure_log_two() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&recipe("pressure_free.json"), out.path(), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::from_csv(&read(out.path().join("pressure.csv"))).unwrap();
    assert!(t.has_columns(&["L", "sites", "value", "bound"]));
    assert_eq!(t.rows.len(), 3);
    for (row, l) in t.rows.iter().zip(["2", "3", "4"]) {
        assert_eq!(row[0], l);
        assert_eq!(row[2].parse::<f64>().unwrap(), std::f64::consts::LN_2);
    }
}

#[test]
fn identity_shift_is_equivalent_and_field_change_is_not() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&recipe("equiv.json"), &out.path().join("same"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read(out.path().join("same/summary.txt"));
    assert!(summary.contains("verdict = equivalent\n"), "{summary}");

    let cfg = write_config(
        out.path(),
        "diff.json",
        r#"{"kind": "equiv",
            "phi": {"family": "ising_transverse", "params": {"J": 1.0, "h": 1.0}},
            "psi": {"family": "ising_transverse", "params": {"J": 1.0, "h": 0.5}},
            "volumes": [2, 4, 8]}"#,
    );
    let o = run(&cfg, &out.path().join("diff"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary = read(out.path().join("diff/summary.txt"));
    assert!(summary.contains("verdict = inequivalent\nwitness = sigma_"), "{summary}");
    let t = Table::from_csv(&read(out.path().join("diff/equiv.csv"))).unwrap();
    assert!(t.rows.iter().all(|r| r[2].parse::<f64>().unwrap() >= 0.1));
}

#[test]
fn golden_quench_reproduces_byte_for_byte() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&recipe("quench.json"), out.path(), &["--threads", "2"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let golden = crate_dir().join("recipes/golden/quench");
    for name in ["quench_times.csv", "quench_horizons.csv", "quench_summary.txt"] {
        assert_eq!(read(out.path().join(name)), read(golden.join(name)), "{name}");
    }
    let summary = read(out.path().join("quench_summary.txt"));
    assert!(summary.contains("gain_energy_psi.sign = positive\n"));

    let report = bin().arg("report").arg(out.path()).output().unwrap();
    assert!(report.status.success(), "{}", stderr(&report));
    let text = String::from_utf8(report.stdout).unwrap();
    assert!(text.contains("energy_psi gain") && text.contains("sign over finite T: positive"), "{text}");
}

#[test]
fn randomized_runs_depend_only_on_config_and_seed() {
    let out = tempfile::tempdir().unwrap();
    let cfg = |seed: u64| {
        write_config(
            out.path(),
            &format!("g{seed}.json"),
            &format!(
                r#"{{"kind": "gibbs", "seed": {seed}, "probes": 8, "volumes": [1, 2, 3],
                    "phi": {{"family": "heisenberg", "params": {{"J": 0.7}}}}}}"#
            ),
        )
    };
    let a = run(&cfg(5), &out.path().join("a"), &["--threads", "1"]);
    let b = bin()
        .env("LATTICETHERM_THREADS", "3")
        .args(["run", "--config"])
        .arg(cfg(5))
        .arg("--out")
        .arg(out.path().join("b"))
        .output()
        .unwrap();
    let c = run(&cfg(6), &out.path().join("c"), &[]);
    for o in [&a, &b, &c] {
        assert!(o.status.success(), "{}", stderr(o));
    }
    for name in ["gibbs.csv", "gibbs_probes.csv", "summary.txt"] {
        assert_eq!(read(out.path().join("a").join(name)), read(out.path().join("b").join(name)), "{name}");
    }
    assert_ne!(read(out.path().join("a/gibbs_probes.csv")), read(out.path().join("c/gibbs_probes.csv")));
    let (ma, _) = RunManifest::load(&out.path().join("a")).unwrap();
    let (mb, _) = RunManifest::load(&out.path().join("b")).unwrap();
    assert_eq!((ma.threads, mb.threads), (1, 3));
    assert!(read(out.path().join("a/summary.txt")).contains("verdict = gibbs state minimizes the free energy"));
}

#[test]
fn manifest_lists_outputs_and_hashes_canonically() {
    let out = tempfile::tempdir().unwrap();
    let a = write_config(
        out.path(),
        "a.json",
        r#"{"kind": "pressure", "beta": 0.5, "volumes": [2, 3],
            "phi": {"family": "xxz", "params": {"J": 1.0, "Delta": 0.3}}}"#,
    );
    let b = write_config(
        out.path(),
        "b.json",
        r#"{
  "phi": {"params": {"Delta": 0.3, "J": 1.0}, "family": "xxz"},
  "volumes": [2, 3],
  "beta": 0.5,
  "kind": "pressure"
}"#,
    );
    let o = run(&a, &out.path().join("run"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let (m, dir) = RunManifest::load(&out.path().join("run/manifest.json")).unwrap();
    assert_eq!(m.kind, "pressure");
    assert_eq!(m.version, env!("CARGO_PKG_VERSION"));
    assert_eq!(m.outputs, ["pressure.csv", "thermo.csv", "summary.txt"]);
    assert!(m.outputs.iter().all(|f| dir.join(f).is_file()));
    assert_eq!(m.timings.iter().map(|t| t.operation.as_str()).collect::<Vec<_>>(), ["thermo_point L=2", "thermo_point L=3"]);
    assert!(m.started <= m.finished);

    let validate = |p: &Path| String::from_utf8(bin().arg("validate").arg("--config").arg(p).output().unwrap().stdout).unwrap();
    let (va, vb) = (validate(&a), validate(&b));
    assert_eq!(va, vb);
    assert!(va.contains(&m.config_hash), "{va}");
}

#[test]
fn volumes_beyond_the_cap_need_an_override() {
    let out = tempfile::tempdir().unwrap();
    let cfg = write_config(
        out.path(),
        "big.json",
        r#"{"kind": "quench",
            "psi": {"family": "ising_transverse", "params": {"J": 1.0, "h": 1.0}},
            "phi": {"family": "ising_transverse", "params": {"J": 1.0, "h": 0.5}},
            "ambient": 13, "window": 4, "horizons": [5.0]}"#,
    );
    let o = run(&cfg, &out.path().join("run"), &[]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("8192") && stderr(&o).contains("--cap-override"));
    let v = bin().args(["validate", "--cap-override", "8192", "--config"]).arg(&cfg).output().unwrap();
    assert!(v.status.success(), "{}", stderr(&v));
    let v = bin().args(["validate", "--cap-override", "4096", "--config"]).arg(&cfg).output().unwrap();
    assert_eq!(v.status.code(), Some(3));
}

#[test]
fn frozen_states_are_a_numerical_failure() {
    // at β = 500 the Gibbs state has eigenvalues far below the log floor
    let out = tempfile::tempdir().unwrap();
    let cfg = write_config(
        out.path(),
        "cold.json",
        r#"{"kind": "weakgibbs", "beta": 500,
            "phi": {"family": "ising_transverse", "params": {"J": 1.0, "h": 0.2}},
            "volumes": [2, 3], "ambient": 6}"#,
    );
    let o = run(&cfg, &out.path().join("run"), &[]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
    assert!(stderr(&o).contains("numerical failure"));
}

#[test]
fn reports_render_trends_and_fits() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&recipe("pressure.json"), &out.path().join("p"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let report_file = out.path().join("report.txt");
    let r = bin().arg("report").arg(out.path().join("p/manifest.json")).arg("--out").arg(&report_file).output().unwrap();
    assert!(r.status.success(), "{}", stderr(&r));
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text, read(&report_file));
    assert!(text.contains("pressure.csv") && text.contains("fit value ~ a + b/L: a = "), "{text}");

    let cfg = write_config(
        out.path(),
        "wg.json",
        r#"{"kind": "weakgibbs",
            "phi": {"family": "ising_transverse", "params": {"J": 0.3, "h": 1.2}},
            "volumes": [2, 3, 4], "ambient": 8}"#,
    );
    let o = run(&cfg, &out.path().join("wg"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(bin().arg("report").arg(out.path().join("wg")).output().unwrap().stdout).unwrap();
    let section = &text[text.find("certificate.csv").unwrap()..];
    assert!(section.contains("verdict: decreasing"), "{text}");
    assert!(text.contains("hiai_petz.verdict = holds"));
}

#[test]
fn report_needs_a_manifest() {
    let out = tempfile::tempdir().unwrap();
    let o = bin().arg("report").arg(out.path()).output().unwrap();
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("manifest missing"));

    // a manifest whose outputs were deleted is just as unusable
    let o = run(&recipe("pressure_free.json"), &out.path().join("run"), &[]);
    assert!(o.status.success());
    std::fs::remove_file(out.path().join("run/thermo.csv")).unwrap();
    let o = bin().arg("report").arg(out.path().join("run")).output().unwrap();
    assert_eq!(o.status.code(), Some(5), "{}", stderr(&o));
}

#[test]
fn fermion_and_bounds_recipes_run() {
    let out = tempfile::tempdir().unwrap();
    let o = run(&recipe("fermion_quench.json"), &out.path().join("f"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    let t = Table::from_csv(&read(out.path().join("f/quench_times.csv"))).unwrap();
    assert!(t.has_columns(&["t", "observable", "value"]));
    assert!(t.rows.iter().any(|r| r[1] == "number"));
    let summary = read(out.path().join("f/quench_summary.txt"));
    assert!(summary.contains("number_drift.T=inf = "));

    let o = run(&recipe("bounds.json"), &out.path().join("b"), &[]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(read(out.path().join("b/summary.txt")).contains("verdict = holds"));
    let t = Table::from_csv(&read(out.path().join("b/bounds.csv"))).unwrap();
    assert_eq!(t.rows.len(), 20);
}

#[test]
fn bad_thread_counts_are_usage_errors() {
    let o = bin().args(["run", "--threads", "0", "--config"]).arg(recipe("pressure_free.json")).output().unwrap();
    assert!(!o.status.success());
    let o = bin().env("LATTICETHERM_THREADS", "many").args(["run", "--config"]).arg(recipe("pressure_free.json")).output().unwrap();
    assert!(!o.status.success());
}
