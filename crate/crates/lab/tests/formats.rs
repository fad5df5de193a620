use latticetherm_core::fermion::FermionInteraction;
use latticetherm_core::{pauli, CMatrix, DimensionCap, Interaction, InteractionFamily, Point, SubsetShape, Volume, C64};
use latticetherm_lab::config::{canonical_json, config_hash};
use latticetherm_lab::formats::{fmt_f64, thermo_table, Table};
use latticetherm_lab::{interaction_from_json, interaction_to_json, parse_config, Kind, LabError};
use proptest::prelude::*;

fn bits(phi: &Interaction) -> Vec<(Vec<Vec<i64>>, Vec<u64>)> {
    phi.terms()
        .map(|(s, m)| {
            let shape = s.points().iter().map(|p| p.coords().to_vec()).collect();
            (shape, m.iter().flat_map(|z| [z.re.to_bits(), z.im.to_bits()]).collect())
        })
        .collect()
}

fn hermitian_from(entries: &[(f64, f64)], n: usize) -> CMatrix {
    let mut m = CMatrix::zeros(n, n);
    let mut k = 0;
    for i in 0..n {
        m[(i, i)] = C64::new(entries[k].0, 0.0);
        k += 1;
        for j in i + 1..n {
            m[(i, j)] = C64::new(entries[k].0, entries[k].1);
            m[(j, i)] = m[(i, j)].conj();
            k += 1;
        }
    }
    m
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn interaction_json_round_trips_bit_exactly(
        single in prop::collection::vec((prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO, prop::num::f64::NORMAL), 3),
        pair in prop::collection::vec((prop::num::f64::NORMAL, prop::num::f64::NORMAL | prop::num::f64::ZERO), 10),
        gap in 1i64..4,
        two_d in any::<bool>(),
    ) {
        // keep magnitudes where (a + a)/2 cannot overflow
        let clamp = |v: &[(f64, f64)]| -> Vec<(f64, f64)> { v.iter().map(|&(a, b)| (a % 1e300, b % 1e300)).collect() };
        let dim = if two_d { 2 } else { 1 };
        let far = if two_d { Point::new(vec![gap, -1]) } else { Point::at(gap) };
        let phi = Interaction::new(2, dim).unwrap()
            .with_term(SubsetShape::single(dim), hermitian_from(&clamp(&single), 2)).unwrap()
            .with_term(SubsetShape::normalized(vec![Point::origin(dim), far]).unwrap(), hermitian_from(&clamp(&pair), 4)).unwrap();
        let text = interaction_to_json(&phi);
        let back = interaction_from_json(&text).unwrap();
        prop_assert_eq!(bits(&back), bits(&phi));
        prop_assert_eq!(back.dimension(), dim);
        prop_assert_eq!(interaction_to_json(&back), text);
    }

    #[test]
    fn csv_floats_round_trip(x in any::<f64>().prop_filter("finite", |x| x.is_finite())) {
        let s = fmt_f64(x);
        prop_assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        let t = thermo_table([(3, 3, x, -x)]);
        let back = Table::from_csv(&t.to_csv()).unwrap();
        prop_assert_eq!(&back, &t);
    }
}

#[test]
fn builtin_families_survive_serialization() {
    for fam in [
        InteractionFamily::IsingTransverse { j: 0.3, h: 1.2 },
        InteractionFamily::Xxz { j: -1.0, delta: 0.1 },
        InteractionFamily::OnsiteField { hx: 0.1, hy: -0.2, hz: 0.3, c: 1.0 / 3.0 },
    ] {
        let phi = fam.build(1).unwrap();
        let back = interaction_from_json(&interaction_to_json(&phi)).unwrap();
        assert_eq!(back, phi);
    }
    let text = interaction_to_json(&InteractionFamily::Xy { j: 1.0 }.build(1).unwrap());
    assert!(text.starts_with("{\n  \"site_dim\": 2,\n  \"terms\": [") && text.ends_with("}\n"), "{text}");
}

#[test]
fn interaction_files_report_bad_fields() {
    let err = interaction_from_json("{\"site_dim\": 2, \"terms\": [{\"shape\": [[0]], \"matrix\": [[1, 0]]}]}").unwrap_err();
    match err {
        LabError::ConfigInvalid(d) => assert_eq!(d.field, "terms[0].matrix"),
        other => panic!("{other}"),
    }
    assert!(interaction_from_json("{\"site_dim\": 1, \"terms\": []}").is_err());
}

#[test]
fn canonical_hash_ignores_key_order_and_whitespace() {
    let a: serde_json::Value = serde_json::from_str(r#"{"b": [1, {"y": 2, "x": 1}], "a": 0.1}"#).unwrap();
    let b: serde_json::Value = serde_json::from_str("{\n \"a\" : 0.1,\n \"b\": [1, {\"x\": 1, \"y\": 2}]\n}").unwrap();
    assert_eq!(canonical_json(&a), r#"{"a":0.1,"b":[1,{"x":1,"y":2}]}"#);
    assert_eq!(config_hash(&canonical_json(&a)), config_hash(&canonical_json(&b)));
    let c: serde_json::Value = serde_json::from_str(r#"{"a": 0.2, "b": [1, {"x": 1, "y": 2}]}"#).unwrap();
    assert_ne!(config_hash(&canonical_json(&a)), config_hash(&canonical_json(&c)));
}

#[test]
fn fermion_blocks_match_the_core_construction() {
    let cfg = parse_config(
        r#"{"kind": "fermion-quench",
            "psi": {"type": "fermion", "t": [1.0, -0.2], "mu": 0.3, "V": [0.5]},
            "phi": {"type": "fermion", "t": [1.0], "mu": 0.3},
            "ambient": 9, "window": 5}"#,
    )
    .unwrap();
    assert_eq!(cfg.kind, Kind::FermionQuench);
    let want = FermionInteraction::new(vec![1.0, -0.2], 0.3, vec![0.5]).unwrap().to_interaction().unwrap();
    assert_eq!(cfg.psi.as_ref().unwrap(), &want);
    assert_eq!(cfg.phi, FermionInteraction::new(vec![1.0], 0.3, vec![]).unwrap().to_interaction().unwrap());
    // range 2 hopping needs a window of at least 5
    let err = parse_config(
        r#"{"kind": "fermion-quench",
            "psi": {"type": "fermion", "t": [1.0, 0.5], "mu": 0.0},
            "phi": {"type": "fermion", "t": [1.0], "mu": 0.0},
            "ambient": 12, "window": 4}"#,
    )
    .unwrap_err();
    assert!(matches!(err, LabError::ConfigInvalid(ref d) if d.field == "window"), "{err}");
}

#[test]
fn block_lists_are_summed() {
    let cfg = parse_config(
        r#"{"kind": "pressure", "volumes": [3],
            "phi": [{"family": "heisenberg", "params": {"J": 1.0}},
                    {"site_dim": 2, "terms": [{"shape": [[0]], "matrix": [[0.5, 0], [0, 0], [0, 0], [-0.5, 0]]}]}]}"#,
    )
    .unwrap();
    let want = InteractionFamily::Heisenberg { j: 1.0 }.build(1).unwrap().add(&Interaction::new(2, 1).unwrap().with_term(SubsetShape::single(1), pauli::sigma_z() * C64::new(0.5, 0.0)).unwrap()).unwrap();
    let vol = Volume::cube(1, 3).unwrap();
    let a = cfg.phi.local_hamiltonian(&vol, DimensionCap::default()).unwrap();
    let b = want.local_hamiltonian(&vol, DimensionCap::default()).unwrap();
    assert!(a.max_abs_diff(&b).unwrap() < 1e-15);
}

#[test]
fn defaults_and_two_dimensional_configs() {
    let cfg = parse_config(
        r#"{"kind": "weakgibbs", "dimension": 2, "volumes": [1, 2],
            "phi": {"family": "ising_transverse", "params": {"J": 0.2}}}"#,
    )
    .unwrap();
    assert_eq!((cfg.beta, cfg.seed, cfg.dimension), (1.0, 0, 2));
    // L + 2·max(m, ⌈L/2⌉) with m = 1
    assert_eq!(cfg.weakgibbs_ambient(), 4);
    assert_eq!(cfg.max_sites(), 16);
    assert!(cfg.check_cap(DimensionCap(1 << 15)).is_err());
    assert!(cfg.check_cap(DimensionCap(1 << 16)).is_ok());

    let err = parse_config(
        r#"{"kind": "pressure", "dimension": 2, "volumes": [2],
            "phi": {"site_dim": 2, "terms": [{"shape": [[0], [1]], "matrix": [[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[1,0],[0,0],[0,0],[0,0],[0,0],[1,0]]}]}}"#,
    )
    .unwrap_err();
    assert!(matches!(err, LabError::ConfigInvalid(ref d) if d.field == "phi.terms"), "{err}");
}
