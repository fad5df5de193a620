//! Acceptance suite: one PASS/FAIL line per criterion.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use latticetherm_core::dynamics::{
    conservation_audit, evolve_observable_complex, expansional, expansional_closed_form, perturbed_gibbs,
    run_quench, sandwich_bounds, EvolutionContext, QuenchExperiment,
};
use latticetherm_core::fermion::{number_conservation_audit, FermionInteraction};
use latticetherm_core::interaction::{default_probes, hamiltonian_density_difference, physically_equivalent};
use latticetherm_core::thermo::{gibbs_state, relative_entropy, variational_gap, weak_gibbs_certificate, WindowedGibbs};
use latticetherm_core::{pauli, DimensionCap, Interaction, InteractionFamily, LatticeOperator, Point, Volume, C64};
use rand::Rng;

type Outcome = Result<(bool, String), latticetherm_core::Error>;

fn cap() -> DimensionCap {
    DimensionCap::default()
}

fn ising(j: f64, h: f64) -> Interaction {
    InteractionFamily::IsingTransverse { j, h }.build(1).unwrap()
}

fn builtins() -> Vec<InteractionFamily> {
    vec![
        InteractionFamily::IsingTransverse { j: 1.0, h: 0.7 },
        InteractionFamily::Xy { j: 0.8 },
        InteractionFamily::Xxz { j: 1.0, delta: 0.5 },
        InteractionFamily::Heisenberg { j: 0.6 },
        InteractionFamily::OnsiteField { hx: 0.4, hy: -0.3, hz: 0.9, c: 0.2 },
        InteractionFamily::FermionHopping { t: 1.0, mu: 0.3 },
    ]
}

fn variational_principle() -> Outcome {
    let mut rng = common::rng(1);
    let (mut min_gap, mut max_gibbs, mut max_mismatch) = (f64::INFINITY, 0.0f64, 0.0f64);
    let mut count = 0;
    for family in builtins() {
        let phi = family.build(1)?;
        for l in 2..=4 {
            let vol = Volume::cube(1, l)?;
            let omega = gibbs_state(&phi, &vol, 1.0, cap())?;
            max_gibbs = max_gibbs.max(variational_gap(&omega, &phi, cap())?.abs());
        }
        for k in 0..1000 {
            let vol = Volume::cube(1, 2 + k % 3)?;
            let omega = gibbs_state(&phi, &vol, 1.0, cap())?;
            let mut rho = common::random_state(&mut rng, &vol);
            if k % 2 == 1 {
                // near the minimizer the gap is second order in the distance
                let eps = 10f64.powf(rng.random_range(-6.0..-1.0));
                rho = common::mix(&omega, &rho, eps);
            }
            let gap = variational_gap(&rho, &phi, cap())?;
            min_gap = min_gap.min(gap);
            max_mismatch = max_mismatch.max((gap - relative_entropy(&rho, &omega)?).abs());
            count += 1;
        }
    }
    let ok = min_gap >= -1e-10 && max_gibbs <= 1e-10 && max_mismatch <= 1e-9;
    Ok((ok, format!("{count} states: min gap {min_gap:.3e}, gap at Gibbs {max_gibbs:.1e}, |gap - S(rho|omega)| {max_mismatch:.1e}")))
}

fn conservation() -> Outcome {
    let mut exp = QuenchExperiment::new(ising(1.0, 1.0), ising(1.0, 0.5), 10, 4);
    exp.times = vec![0.0, 5.0, 10.0, 15.0, 20.0];
    let audit = conservation_audit(&exp)?;
    let (de, ds) = (audit.max_energy_drift(), audit.max_entropy_drift());

    let vol = Volume::cube(1, 8)?;
    let field = InteractionFamily::OnsiteField { hx: 0.8, hy: 0.0, hz: 0.3, c: 0.0 }.build(1)?;
    let rho0 = gibbs_state(&field, &vol, 1.0, cap())?;
    let times = [0.0, 2.5, 5.0, 10.0, 20.0];
    let mut dn = 0.0f64;
    for fint in [
        FermionInteraction::new(vec![1.0], 0.2, vec![0.5])?,
        FermionInteraction::new(vec![1.0, 0.3], -0.4, vec![])?,
    ] {
        dn = dn.max(number_conservation_audit(&fint, &vol, &rho0, &times, cap())?.max_drift());
    }
    let ok = de <= 1e-10 && ds <= 1e-10 && dn <= 1e-10;
    Ok((ok, format!("Ising L=10 energy drift {de:.1e}, entropy drift {ds:.1e}; fermion L=8 number drift {dn:.1e}")))
}

fn certificate_family() -> (Interaction, Volume, Vec<Volume>) {
    let ambient = Volume::cube(1, 10).unwrap();
    let windows = (2..=6).map(|l| ambient.centered_window(l).unwrap()).collect();
    (ising(0.3, 1.2), ambient, windows)
}

fn hiai_petz() -> Outcome {
    let (phi, ambient, windows) = certificate_family();
    let family = WindowedGibbs::new(&phi, &ambient, 1.0, cap())?;
    let cert = weak_gibbs_certificate(&phi, &family, &windows, cap())?;
    let worst = cert
        .records
        .iter()
        .map(|r| r.log_ratio_min + r.hiai_petz_bound())
        .fold(f64::INFINITY, f64::min);
    Ok((worst >= -1e-6, format!("min over L=2..6 of lambda_min(log w - log w^c) + 2|W| = {worst:.4e}")))
}

fn weak_gibbs_trend() -> Outcome {
    let (phi, ambient, windows) = certificate_family();
    let family = WindowedGibbs::new(&phi, &ambient, 1.0, cap())?;
    let cert = weak_gibbs_certificate(&phi, &family, &windows, cap())?;
    let limit = cert.trend.as_ref().map_or(f64::NAN, |t| t.limit);

    let control = WindowedGibbs::new(&ising(0.3, 0.6), &ambient, 1.0, cap())?;
    let negative = weak_gibbs_certificate(&phi, &control, &windows, cap())?;
    let neg_limit = negative.trend.as_ref().map_or(f64::NAN, |t| t.limit);

    let ok = cert.strictly_decreasing() && limit <= 0.02 && neg_limit > 0.0 && neg_limit >= 5.0 * limit.abs();
    let seq: Vec<String> = cert.per_site().iter().map(|c| format!("{c:.3e}")).collect();
    Ok((
        ok,
        format!(
            "c/|L| = [{}], fit limit {limit:.3e}, control limit {neg_limit:.3e}, |Phi|_1 = {:.3}",
            seq.join(", "),
            phi.br_norm(1.0)
        ),
    ))
}

fn equivalence() -> Outcome {
    let mut max_shift_norm = 0.0f64;
    for family in builtins() {
        let phi = family.build(1)?;
        let shifted = phi.with_onsite_constant(0.7);
        match physically_equivalent(&phi, &shifted, &default_probes(&phi, &shifted)?, 1e-12)? {
            latticetherm_core::interaction::Equivalence::Equivalent { max_norm } => {
                max_shift_norm = max_shift_norm.max(max_norm)
            }
            other => return Ok((false, format!("{} vs shift: {other:?}", family.name()))),
        }
    }
    let mut witnesses = Vec::new();
    for (a, b) in [(ising(1.0, 1.0), ising(1.0, 0.5)), (ising(0.3, 1.2), ising(0.3, 0.6))] {
        match physically_equivalent(&a, &b, &default_probes(&a, &b)?, 1e-12)? {
            latticetherm_core::interaction::Equivalence::Inequivalent { witness, .. } => witnesses.push(witness),
            other => return Ok((false, format!("field-differing pair reported {other:?}"))),
        }
    }
    let vols: Vec<Volume> = (2..=8).map(|l| Volume::cube(1, l).unwrap()).collect();
    let phi = ising(1.0, 1.0);
    let shift = hamiltonian_density_difference(&phi, &phi.with_onsite_constant(0.7), &vols, cap())?;
    let shift_max = shift.iter().map(|d| d.value).fold(0.0, f64::max);
    let inequivalent = hamiltonian_density_difference(&phi, &ising(1.0, 0.5), &vols, cap())?;
    let at8 = inequivalent.last().map_or(0.0, |d| d.value);
    let ok = max_shift_norm <= 1e-12 && shift_max <= 1e-10 && at8 >= 0.1;
    Ok((
        ok,
        format!(
            "shift commutators <= {max_shift_norm:.1e}, witnesses {witnesses:?}, density difference shift {shift_max:.1e}, inequivalent at L=8 {at8:.3}"
        ),
    ))
}

fn strict_increase() -> Outcome {
    let quench = |psi: Interaction, phi: Interaction, amb: usize| {
        let mut exp = QuenchExperiment::new(psi, phi, amb, 4);
        exp.horizons = vec![1.0, 2.0, 5.0, 10.0, 20.0];
        exp.method = latticetherm_core::dynamics::CesaroMethod::Trapezoid { points: None };
        run_quench(&exp).map(|r| r.energy_psi_gain())
    };
    let at10 = quench(ising(1.0, 1.0), ising(1.0, 0.5), 10)?;
    let at8 = quench(ising(1.0, 1.0), ising(1.0, 0.5), 8)?;
    let control = quench(ising(1.0, 1.0), ising(1.0, 1.0).with_onsite_constant(0.5), 10)?;
    let late: Vec<usize> = (0..at10.len()).filter(|&k| at10[k].0 >= 5.0).collect();
    let positive = late.iter().all(|&k| at10[k].1 > 0.0);
    let margin = late.iter().map(|&k| at10[k].1 - at8[k].1).fold(f64::INFINITY, f64::min);
    let control_max = control.iter().map(|g| g.1.abs()).fold(0.0, f64::max);
    let ok = positive && margin > 0.0 && control_max <= 1e-8;
    let gains: Vec<String> = at10.iter().map(|(t, g)| format!("T={t}: {g:.4}")).collect();
    Ok((
        ok,
        format!("gain at L=10 [{}], min margin over L=8 {margin:.2e}, control {control_max:.1e}", gains.join(", ")),
    ))
}

fn sandwich() -> Outcome {
    let mut rng = common::rng(7);
    let h = ising(1.0, 1.0).local_hamiltonian(&Volume::cube(1, 6)?, cap())?;
    let mut worst = f64::INFINITY;
    for _ in 0..10 {
        let norm = rng.random_range(0.1..1.0);
        let v = common::random_local(&mut rng, h.volume(), norm);
        let b = sandwich_bounds(&h, &v)?;
        worst = worst.min(b.upper_margin).min(b.lower_margin);
    }
    Ok((worst >= -1e-9, format!("10 perturbations on Ising L=6, min PSD margin {worst:.3e}")))
}

fn expansional_identity() -> Outcome {
    let mut rng = common::rng(8);
    let h = ising(1.0, 1.0).local_hamiltonian(&Volume::cube(1, 4)?, cap())?;
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let norm = rng.random_range(0.2..1.5);
        let v = common::random_local(&mut rng, h.volume(), norm);
        let modulus = 5.0 / v.operator_norm() * rng.random_range(0.05..1.0);
        let im = rng.random_range(-0.5f64..0.5).clamp(-modulus, modulus);
        let re = (modulus * modulus - im * im).sqrt() * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let z = C64::new(re, im);
        let diff = expansional(&h, &v, z)?.sub(&expansional_closed_form(&h, &v, z)?)?;
        worst = worst.max(diff.operator_norm());
    }
    Ok((worst <= 1e-8, format!("20 samples with |V||z| <= 5, |Im z| <= 0.5: max error {worst:.2e}")))
}

fn analyticity() -> Outcome {
    let r = 1.0;
    let phi = ising(0.02, 0.1);
    let norm = phi.br_norm(r);
    let ctx = EvolutionContext::from_interaction(&phi, &Volume::cube(1, 8)?, cap())?;
    let a = LatticeOperator::new(Volume::site(Point::at(0)), 2, pauli::sigma_x())?;
    let strip = 0.8 * r / (2.0 * norm);
    let mut worst_ratio = 0.0f64;
    for re in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        for frac in [-0.99, -0.5, 0.0, 0.5, 0.99] {
            let im: f64 = frac * strip;
            let got = evolve_observable_complex(&a, &ctx, C64::new(re, im))?.operator_norm();
            let bound = a.operator_norm() * r.exp() * r / (r - 2.0 * norm * im.abs());
            worst_ratio = worst_ratio.max(got / bound);
        }
    }
    Ok((
        norm <= r / 4.0 && worst_ratio <= 1.0,
        format!("|Phi|_1 = {norm:.4}, 25 points with |Im z| < {strip:.3}, max |alpha^z(A)|/bound {worst_ratio:.3}"),
    ))
}

fn gibbs_condition() -> Outcome {
    let phi = ising(1.0, 0.7);
    let ambient = Volume::cube(1, 8)?;
    let vol = ambient.centered_window(4)?;
    let h = phi.local_hamiltonian(&ambient, cap())?;
    let w = phi.surface_energy(&vol, &ambient, cap())?;
    let reduced = perturbed_gibbs(&h, &w.scale(-1.0))?.partial_trace(&vol)?;
    let dist = reduced.trace_distance(&gibbs_state(&phi, &vol, 1.0, cap())?)?;
    Ok((dist <= 1e-8, format!("L=4 in L_amb=8, trace distance {dist:.2e}")))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("variational principle", variational_principle),
        ("conservation", conservation),
        ("Hiai-Petz sandwich", hiai_petz),
        ("weak-Gibbs trend", weak_gibbs_trend),
        ("physical equivalence", equivalence),
        ("strict increase", strict_increase),
        ("sandwich bounds", sandwich),
        ("expansional identity", expansional_identity),
        ("analyticity bound", analyticity),
        ("Gibbs condition", gibbs_condition),
    ];
    let mut failed = 0;
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = match run() {
            Ok(r) => r,
            Err(e) => (false, format!("error: {e}")),
        };
        failed += usize::from(!ok);
        let verdict = if ok { "PASS" } else { "FAIL" };
        println!("{verdict} {:>2} {name}: {detail} [{:.1}s]", k + 1, start.elapsed().as_secs_f64());
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
