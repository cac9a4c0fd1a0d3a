//! Couplings between discrete measures, gluing, exact quadratic-cost optimal
//! transport and transport-dual membership.

mod dual;
mod lp;
mod simplex;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::measure::{pushforward, DiscreteMeasure, LinearMap, MeasureFile};

pub use dual::{
    dual_membership, moment_residual, DualMembership, DUAL_FEASIBILITY_TOL, DUAL_RESIDUAL_TOL,
};
pub use lp::{phase_one, PhaseOne};
pub use simplex::{w2, w2_with_cap, DEFAULT_PIVOT_CAP};

/// Row and column sums of a coupling must match the marginals to this tolerance.
pub const MARGINAL_TOL: f64 = 1e-10;
/// Total mass of a coupling must be one to this tolerance.
pub const TOTAL_MASS_TOL: f64 = 1e-12;

/// A finitely supported joint measure with marginals `mu` and `nu`, stored as
/// sparse entries `(i, j, mass)` over atom indices.
#[derive(Clone, Debug, PartialEq)]
pub struct Coupling {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    entries: Vec<(usize, usize, f64)>,
}

impl Coupling {
    /// Validates indices, positivity and both marginal constraints.
    pub fn new(
        mu: DiscreteMeasure,
        nu: DiscreteMeasure,
        entries: Vec<(usize, usize, f64)>,
    ) -> Result<Self> {
        let mut rows = vec![0.0; mu.len()];
        let mut cols = vec![0.0; nu.len()];
        for &(i, j, m) in &entries {
            if i >= mu.len() || j >= nu.len() {
                return Err(Error::InvalidArgument(format!(
                    "coupling entry ({i}, {j}) out of range for {}x{} atoms",
                    mu.len(),
                    nu.len()
                )));
            }
            if !m.is_finite() || m <= 0.0 {
                return Err(Error::NonpositiveMass { index: i, mass: m });
            }
            rows[i] += m;
            cols[j] += m;
        }
        check_marginal("row", &rows, mu.masses())?;
        check_marginal("column", &cols, nu.masses())?;
        let total: f64 = entries.iter().map(|e| e.2).sum();
        if (total - 1.0).abs() > TOTAL_MASS_TOL {
            return Err(Error::MarginalMismatch(format!(
                "total mass {total} differs from 1"
            )));
        }
        Ok(Self { mu, nu, entries })
    }

    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn entries(&self) -> &[(usize, usize, f64)] {
        &self.entries
    }

    /// Iterates `(x_i, y_j, mass)`.
    pub fn pairs(&self) -> impl Iterator<Item = (&[f64], &[f64], f64)> {
        self.entries
            .iter()
            .map(|&(i, j, m)| (self.mu.point(i), self.nu.point(j), m))
    }

    /// `sum mass * x y^T`.
    pub fn cross_moment(&self) -> Matrix {
        let mut out = Matrix::zeros(self.mu.dim(), self.nu.dim());
        for (x, y, m) in self.pairs() {
            out.add_outer(m, x, y);
        }
        out
    }

    /// Checks that this coupling's marginals are `mu` and `nu` (atomwise).
    pub fn check_marginals(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
        if !self.mu.approx_eq(mu, MARGINAL_TOL) {
            return Err(Error::MarginalMismatch(
                "first marginal of the coupling differs from the given measure".into(),
            ));
        }
        if !self.nu.approx_eq(nu, MARGINAL_TOL) {
            return Err(Error::MarginalMismatch(
                "second marginal of the coupling differs from the given measure".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn hash_into(&self, h: &mut sha2::Sha256) {
        use sha2::Digest;
        self.mu.hash_into(h);
        self.nu.hash_into(h);
        h.update((self.entries.len() as u64).to_le_bytes());
        for &(i, j, m) in &self.entries {
            h.update((i as u64).to_le_bytes());
            h.update((j as u64).to_le_bytes());
            h.update(m.to_bits().to_le_bytes());
        }
    }

    pub fn to_file(&self) -> CouplingFile {
        CouplingFile {
            mu: self.mu.to_file(),
            nu: self.nu.to_file(),
            entries: self.entries.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("coupling serializes")
    }
}

fn check_marginal(kind: &str, sums: &[f64], masses: &[f64]) -> Result<()> {
    for (idx, (s, m)) in sums.iter().zip(masses).enumerate() {
        if (s - m).abs() > MARGINAL_TOL {
            return Err(Error::MarginalMismatch(format!(
                "{kind} {idx} sums to {s}, marginal mass is {m}"
            )));
        }
    }
    Ok(())
}

/// JSON schema: `{"mu": <measure>, "nu": <measure>, "entries": [[i, j, mass], ...]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingFile {
    pub mu: MeasureFile,
    pub nu: MeasureFile,
    pub entries: Vec<(usize, usize, f64)>,
}

impl CouplingFile {
    pub fn into_coupling(self) -> Result<Coupling> {
        Coupling::new(
            self.mu.into_measure(false)?,
            self.nu.into_measure(false)?,
            self.entries,
        )
    }
}

impl Serialize for Coupling {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Coupling {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        CouplingFile::deserialize(d)?
            .into_coupling()
            .map_err(serde::de::Error::custom)
    }
}

/// Independent coupling `mu ⊗ nu`.
pub fn product_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Coupling {
    let mut entries = Vec::with_capacity(mu.len() * nu.len());
    for (i, p) in mu.masses().iter().enumerate() {
        for (j, q) in nu.masses().iter().enumerate() {
            entries.push((i, j, p * q));
        }
    }
    Coupling {
        mu: mu.clone(),
        nu: nu.clone(),
        entries,
    }
}

/// Graph coupling `(Id x T)_# mu`, pairing `x_i` with `T x_i`.
pub fn map_coupling(mu: &DiscreteMeasure, map: &LinearMap) -> Result<Coupling> {
    let nu = pushforward(mu, map)?;
    let entries = mu
        .masses()
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, i, m))
        .collect();
    Ok(Coupling {
        mu: mu.clone(),
        nu,
        entries,
    })
}

/// Index-aligned coupling `(i, i, m_i)`; requires equal atom counts and masses.
pub fn diagonal_coupling(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<Coupling> {
    if mu.len() != nu.len() {
        return Err(Error::MarginalMismatch(format!(
            "diagonal coupling needs equal atom counts, got {} and {}",
            mu.len(),
            nu.len()
        )));
    }
    let entries = mu
        .masses()
        .iter()
        .enumerate()
        .map(|(i, &m)| (i, i, m))
        .collect();
    Coupling::new(mu.clone(), nu.clone(), entries)
}

/// `sum mass * |x_i - y_j|^2`.
pub fn quadratic_cost(gamma: &Coupling) -> f64 {
    gamma
        .pairs()
        .map(|(x, y, m)| m * linalg::dist_sq(x, y))
        .sum()
}

/// Three-marginal plan over atoms of `(mu, nu, eta)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TriplePlan {
    mu: DiscreteMeasure,
    nu: DiscreteMeasure,
    eta: DiscreteMeasure,
    entries: Vec<(usize, usize, usize, f64)>,
}

impl TriplePlan {
    pub fn mu(&self) -> &DiscreteMeasure {
        &self.mu
    }

    pub fn nu(&self) -> &DiscreteMeasure {
        &self.nu
    }

    pub fn eta(&self) -> &DiscreteMeasure {
        &self.eta
    }

    pub fn entries(&self) -> &[(usize, usize, usize, f64)] {
        &self.entries
    }

    /// Iterates `(x_i, y_j, z_k, mass)`.
    pub fn triples(&self) -> impl Iterator<Item = (&[f64], &[f64], &[f64], f64)> {
        self.entries
            .iter()
            .map(|&(i, j, k, m)| (self.mu.point(i), self.nu.point(j), self.eta.point(k), m))
    }

    /// Marginal on the `(x, y)` coordinates.
    pub fn project_xy(&self) -> BTreeMap<(usize, usize), f64> {
        let mut out = BTreeMap::new();
        for &(i, j, _, m) in &self.entries {
            *out.entry((i, j)).or_insert(0.0) += m;
        }
        out
    }

    /// Marginal on the `(y, z)` coordinates.
    pub fn project_yz(&self) -> BTreeMap<(usize, usize), f64> {
        let mut out = BTreeMap::new();
        for &(_, j, k, m) in &self.entries {
            *out.entry((j, k)).or_insert(0.0) += m;
        }
        out
    }
}

/// Glues `gamma12 ∈ Γ(mu, nu)` and `gamma23 ∈ Γ(nu, eta)` along `nu` by
/// conditional independence: `pi(i, j, k) = gamma12(i, j) gamma23(j, k) / nu_j`.
pub fn glue(gamma12: &Coupling, gamma23: &Coupling) -> Result<TriplePlan> {
    if !gamma12.nu().approx_eq(gamma23.mu(), MARGINAL_TOL) {
        return Err(Error::MarginalMismatch(
            "middle marginals of the two couplings differ".into(),
        ));
    }
    let nu = gamma12.nu();
    let mut by_middle: Vec<Vec<(usize, f64)>> = vec![Vec::new(); nu.len()];
    for &(j, k, m) in gamma23.entries() {
        by_middle[j].push((k, m));
    }
    let mut entries = Vec::new();
    for &(i, j, m12) in gamma12.entries() {
        let nu_j = nu.mass(j);
        for &(k, m23) in &by_middle[j] {
            entries.push((i, j, k, m12 * m23 / nu_j));
        }
    }
    Ok(TriplePlan {
        mu: gamma12.mu().clone(),
        nu: nu.clone(),
        eta: gamma23.nu().clone(),
        entries,
    })
}
