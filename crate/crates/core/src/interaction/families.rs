use super::{Interaction, SubsetShape};
use crate::fermion::FermionInteraction;
use crate::linalg::kron;
use crate::pauli;
use crate::prelude::*;

/// Built-in spin-1/2 interactions.
///
/// Couplings act on nearest-neighbour bonds `{0, e_k}` along every lattice
/// axis; fields act on single sites. Signs are as written, e.g. the Ising
/// family is `Φ({0,e_k}) = J σ^z σ^z`, `Φ({0}) = h σ^x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InteractionFamily {
    /// `J σ^zσ^z + h σ^x`.
    IsingTransverse { j: f64, h: f64 },
    /// `J (σ^xσ^x + σ^yσ^y)`.
    Xy { j: f64 },
    /// `J (σ^xσ^x + σ^yσ^y + Δ σ^zσ^z)`.
    Xxz { j: f64, delta: f64 },
    /// `J (σ^xσ^x + σ^yσ^y + σ^zσ^z)`.
    Heisenberg { j: f64 },
    /// `hx σ^x + hy σ^y + hz σ^z + c·1` on each site.
    OnsiteField { hx: f64, hy: f64, hz: f64, c: f64 },
    /// Nearest-neighbour spinless fermion hopping `t(a†_x a_{x+1} + h.c.) − μ n_x`
    /// in one dimension, through Jordan–Wigner.
    FermionHopping { t: f64, mu: f64 },
}

impl InteractionFamily {
    pub fn name(&self) -> &'static str {
        match self {
            Self::IsingTransverse { .. } => "ising_transverse",
            Self::Xy { .. } => "xy",
            Self::Xxz { .. } => "xxz",
            Self::Heisenberg { .. } => "heisenberg",
            Self::OnsiteField { .. } => "onsite_field",
            Self::FermionHopping { .. } => "fermion_hopping",
        }
    }

    /// Parameter names accepted by [`from_params`](Self::from_params), in order.
    pub fn parameter_names(name: &str) -> Option<&'static [&'static str]> {
        Some(match name {
            "ising_transverse" => &["J", "h"],
            "xy" => &["J"],
            "xxz" => &["J", "Delta"],
            "heisenberg" => &["J"],
            "onsite_field" => &["hx", "hy", "hz", "c"],
            "fermion_hopping" => &["t", "mu"],
            _ => return None,
        })
    }

    /// Named parameters; missing ones default to zero.
    pub fn params(&self) -> Vec<(&'static str, f64)> {
        match *self {
            Self::IsingTransverse { j, h } => vec![("J", j), ("h", h)],
            Self::Xy { j } => vec![("J", j)],
            Self::Xxz { j, delta } => vec![("J", j), ("Delta", delta)],
            Self::Heisenberg { j } => vec![("J", j)],
            Self::OnsiteField { hx, hy, hz, c } => vec![("hx", hx), ("hy", hy), ("hz", hz), ("c", c)],
            Self::FermionHopping { t, mu } => vec![("t", t), ("mu", mu)],
        }
    }

    /// Looks up a family by name; `get` returns a parameter value or `None`
    /// for the default of zero.
    pub fn from_params(name: &str, get: impl Fn(&str) -> Option<f64>) -> Result<Self> {
        let p = |k: &str| get(k).unwrap_or(0.0);
        let family = match name {
            "ising_transverse" => Self::IsingTransverse { j: p("J"), h: p("h") },
            "xy" => Self::Xy { j: p("J") },
            "xxz" => Self::Xxz { j: p("J"), delta: p("Delta") },
            "heisenberg" => Self::Heisenberg { j: p("J") },
            "onsite_field" => Self::OnsiteField { hx: p("hx"), hy: p("hy"), hz: p("hz"), c: p("c") },
            "fermion_hopping" => Self::FermionHopping { t: p("t"), mu: p("mu") },
            other => return Err(Error::InvalidParameter(format!("unknown interaction family '{other}'"))),
        };
        Ok(family)
    }

    /// Instantiates the family on `Z^dimension`.
    pub fn build(&self, dimension: usize) -> Result<Interaction> {
        if let Some((name, _)) = self.params().iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::InvalidParameter(format!("parameter {name} is not finite")));
        }
        let (x, y, z) = (pauli::sigma_x(), pauli::sigma_y(), pauli::sigma_z());
        let c = |v: f64| C64::new(v, 0.0);
        let mut phi = Interaction::new(2, dimension)?;
        let bonds = |phi: &mut Interaction, m: CMatrix| -> Result<()> {
            for axis in 0..dimension {
                phi.add_term(SubsetShape::bond(dimension, axis), m.clone())?;
            }
            Ok(())
        };
        let exchange = |jx: f64, jy: f64, jz: f64| {
            kron(&x, &x) * c(jx) + kron(&y, &y) * c(jy) + kron(&z, &z) * c(jz)
        };
        match *self {
            Self::IsingTransverse { j, h } => {
                bonds(&mut phi, kron(&z, &z) * c(j))?;
                phi.add_term(SubsetShape::single(dimension), x * c(h))?;
            }
            Self::Xy { j } => bonds(&mut phi, exchange(j, j, 0.0))?,
            Self::Xxz { j, delta } => bonds(&mut phi, exchange(j, j, j * delta))?,
            Self::Heisenberg { j } => bonds(&mut phi, exchange(j, j, j))?,
            Self::OnsiteField { hx, hy, hz, c: shift } => {
                let m = x * c(hx) + y * c(hy) + z * c(hz) + pauli::identity() * c(shift);
                phi.add_term(SubsetShape::single(dimension), m)?;
            }
            Self::FermionHopping { t, mu } => {
                if dimension != 1 {
                    return Err(Error::DimensionNotSupported(dimension));
                }
                return FermionInteraction::new(vec![t], mu, vec![])?.to_interaction();
            }
        }
        Ok(phi)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::{DimensionCap, Volume};

    #[test]
    fn families_round_trip_through_params() {
        let all = [
            InteractionFamily::IsingTransverse { j: 1.0, h: 0.5 },
            InteractionFamily::Xy { j: 0.3 },
            InteractionFamily::Xxz { j: 1.0, delta: 0.4 },
            InteractionFamily::Heisenberg { j: -1.0 },
            InteractionFamily::OnsiteField { hx: 0.1, hy: 0.2, hz: 0.3, c: 0.4 },
            InteractionFamily::FermionHopping { t: 1.0, mu: 0.2 },
        ];
        for fam in all {
            let params = fam.params();
            let back = InteractionFamily::from_params(fam.name(), |k| params.iter().find(|(n, _)| *n == k).map(|p| p.1)).unwrap();
            assert_eq!(back, fam);
            let names: Vec<&str> = params.iter().map(|p| p.0).collect();
            assert_eq!(InteractionFamily::parameter_names(fam.name()).unwrap(), names.as_slice());
            assert!(fam.build(1).is_ok());
        }
    }

    #[test]
    fn heisenberg_singlet_energy() {
        // two-site Heisenberg: singlet at −3J, triplet at +J
        let phi = InteractionFamily::Heisenberg { j: 1.0 }.build(1).unwrap();
        let h = phi.local_hamiltonian(&Volume::interval(0, 2).unwrap(), DimensionCap::default()).unwrap();
        let e = h.eigenvalues().unwrap();
        assert!((e[0] + 3.0).abs() < 1e-14 && (e[3] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn non_finite_parameters_rejected() {
        assert!(InteractionFamily::IsingTransverse { j: f64::NAN, h: 0.0 }.build(1).is_err());
        assert_eq!(
            InteractionFamily::FermionHopping { t: 1.0, mu: 0.0 }.build(2).unwrap_err(),
            Error::DimensionNotSupported(2)
        );
    }
}
