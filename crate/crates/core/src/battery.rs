//! Randomized soundness battery: for every theorem, draw random frames and
//! perturbations, certify, and check the guarantees against the true bounds.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frame::{canonical_dual, canonical_parseval, frame_bounds, PairedMeasure};
use crate::linalg::DEFAULT_SINGULAR_TOL;
use crate::measure::DiscreteMeasure;
use crate::perturb::{Certifier, Delta, PerturbationCertificate, Theorem};
use crate::transport::{diagonal_coupling, Coupling};

/// Frames with `lambda_min` at or below this are redrawn.
pub const MIN_LOWER_BOUND: f64 = 1e-8;
/// Redraw cap before the generator gives up.
pub const MAX_REDRAWS: usize = 1000;

pub const DEFAULT_SCALES: [f64; 7] = [1e-3, 3e-3, 1e-2, 3e-2, 0.1, 0.3, 1.0];

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryConfig {
    pub seed: u64,
    /// Trials per theorem.
    pub trials: usize,
    pub dims: RangeInclusive<usize>,
    pub atoms: RangeInclusive<usize>,
    pub scales: Vec<f64>,
    pub theorems: Vec<Theorem>,
    pub singular_tol: f64,
    /// Moves every guaranteed bound 10% in the unsafe direction before
    /// validation, to check that the harness notices.
    pub corrupt: bool,
}

impl Default for BatteryConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            trials: 200,
            dims: 2..=6,
            atoms: 3..=32,
            scales: DEFAULT_SCALES.to_vec(),
            theorems: Theorem::ALL.to_vec(),
            singular_tol: DEFAULT_SINGULAR_TOL,
            corrupt: false,
        }
    }
}

impl BatteryConfig {
    pub fn check(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument(
                "trial count must be at least 1".into(),
            ));
        }
        if self.dims.is_empty() || *self.dims.start() == 0 {
            return Err(Error::InvalidArgument(
                "dimension range must be nonempty and positive".into(),
            ));
        }
        if self.atoms.is_empty() || *self.atoms.start() == 0 {
            return Err(Error::InvalidArgument(
                "atom range must be nonempty and positive".into(),
            ));
        }
        if self.scales.is_empty() || self.scales.iter().any(|s| !s.is_finite() || *s < 0.0) {
            return Err(Error::InvalidArgument(
                "scale grid must be nonempty, finite and nonnegative".into(),
            ));
        }
        if self.theorems.is_empty() {
            return Err(Error::InvalidArgument("no theorems selected".into()));
        }
        Ok(())
    }
}

/// One battery trial. Bound columns are empty when the premise fails.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialRow {
    pub theorem: Theorem,
    pub seed: u64,
    pub premise_value: f64,
    pub threshold: f64,
    pub premise_ok: bool,
    pub guaranteed_lower: Option<f64>,
    pub actual_lower: f64,
    pub lower_slack: Option<f64>,
    pub upper_slack: Option<f64>,
    pub verdict: Option<bool>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct TheoremSummary {
    pub trials: usize,
    pub premise_ok: usize,
    pub passed: usize,
    pub violations: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct BatteryReport {
    pub rows: Vec<TrialRow>,
    pub summary: BTreeMap<Theorem, TheoremSummary>,
}

impl BatteryReport {
    pub fn violations(&self) -> usize {
        self.summary.values().map(|s| s.violations).sum()
    }

    /// CSV with header `theorem,seed,premise_value,threshold,premise_ok,guaranteed_lower,actual_lower,lower_slack,verdict`.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "theorem",
            "seed",
            "premise_value",
            "threshold",
            "premise_ok",
            "guaranteed_lower",
            "actual_lower",
            "lower_slack",
            "verdict",
        ])
        .expect("in-memory csv write");
        for r in &self.rows {
            let opt = |v: Option<f64>| v.map(fmt_f64).unwrap_or_default();
            w.write_record([
                r.theorem.name().to_string(),
                r.seed.to_string(),
                fmt_f64(r.premise_value),
                fmt_f64(r.threshold),
                r.premise_ok.to_string(),
                opt(r.guaranteed_lower),
                fmt_f64(r.actual_lower),
                opt(r.lower_slack),
                r.verdict.map(|v| v.to_string()).unwrap_or_default(),
            ])
            .expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush")).expect("csv is utf-8")
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
pub fn fmt_f64(v: f64) -> String {
    let a = v.abs();
    if v == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

/// Runs every selected theorem for `trials` seeds in parallel; rows come back
/// sorted by `(theorem, seed)`.
pub fn run_battery(cfg: &BatteryConfig) -> Result<BatteryReport> {
    cfg.check()?;
    let jobs: Vec<(Theorem, u64)> = cfg
        .theorems
        .iter()
        .flat_map(|&t| (0..cfg.trials as u64).map(move |k| (t, cfg.seed.wrapping_add(k))))
        .collect();
    let mut rows = jobs
        .par_iter()
        .map(|&(t, seed)| run_trial(cfg, t, seed))
        .collect::<Result<Vec<_>>>()?;
    rows.sort_by_key(|r| (r.theorem, r.seed));

    let mut summary: BTreeMap<Theorem, TheoremSummary> = BTreeMap::new();
    for r in &rows {
        let s = summary.entry(r.theorem).or_default();
        s.trials += 1;
        if r.premise_ok {
            s.premise_ok += 1;
        }
        match r.verdict {
            Some(true) => s.passed += 1,
            Some(false) => s.violations += 1,
            None => {}
        }
    }
    Ok(BatteryReport { rows, summary })
}

fn theorem_stream(t: Theorem) -> u64 {
    Theorem::ALL.iter().position(|&x| x == t).expect("listed") as u64
}

/// Deterministic RNG for one trial.
pub fn trial_rng(theorem: Theorem, seed: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(theorem_stream(theorem));
    rng
}

fn run_trial(cfg: &BatteryConfig, theorem: Theorem, seed: u64) -> Result<TrialRow> {
    let mut rng = trial_rng(theorem, seed);
    let scale = cfg.scales[(seed.wrapping_sub(cfg.seed) % cfg.scales.len() as u64) as usize];
    let certifier = Certifier::new(cfg.singular_tol);
    let (mut cert, perturbed) = certify_random(&certifier, theorem, cfg, scale, &mut rng)?;
    if cfg.corrupt {
        cert.guaranteed_lower = cert.guaranteed_lower.map(|l| l * 1.1);
        cert.guaranteed_upper = cert.guaranteed_upper.map(|u| u * 0.9);
    }
    let actual_lower = frame_bounds(&perturbed).lower;
    let (lower_slack, upper_slack, verdict) = if cert.premise_ok {
        let report = certifier.validate(&cert, &perturbed)?;
        (
            Some(report.lower_slack),
            Some(report.upper_slack),
            Some(report.verdict),
        )
    } else {
        (None, None, None)
    };
    Ok(TrialRow {
        theorem,
        seed,
        premise_value: cert.premise_value,
        threshold: cert.premise_threshold,
        premise_ok: cert.premise_ok,
        guaranteed_lower: cert.guaranteed_lower,
        actual_lower,
        lower_slack,
        upper_slack,
        verdict,
    })
}

fn gaussian_point(rng: &mut impl Rng, dim: usize) -> Vec<f64> {
    (0..dim).map(|_| StandardNormal.sample(rng)).collect()
}

fn dirichlet_masses(rng: &mut impl Rng, k: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..k).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    raw.iter().map(|v| v / total).collect()
}

/// Gaussian atoms with Dirichlet(1) masses, redrawn until `lambda_min > 1e-8`.
pub fn random_frame(rng: &mut impl Rng, dim: usize, atoms: usize) -> Result<DiscreteMeasure> {
    for _ in 0..MAX_REDRAWS {
        let points = (0..atoms).map(|_| gaussian_point(rng, dim)).collect();
        let mu = DiscreteMeasure::new_normalized(points, dirichlet_masses(rng, atoms))?;
        if frame_bounds(&mu).lower > MIN_LOWER_BOUND {
            return Ok(mu);
        }
    }
    Err(Error::InvalidArgument(format!(
        "no frame found with {atoms} atoms in dimension {dim} after {MAX_REDRAWS} draws"
    )))
}

/// [`random_frame`] driven by a fixed seed.
pub fn seeded_frame(dim: usize, atoms: usize, seed: u64) -> Result<DiscreteMeasure> {
    if dim == 0 || atoms == 0 {
        return Err(Error::InvalidArgument("dimension and atom count must be positive".into()));
    }
    random_frame(&mut ChaCha8Rng::seed_from_u64(seed), dim, atoms)
}

/// Moves every atom by an independent `N(0, scale^2 I)` step; masses unchanged.
pub fn jitter(mu: &DiscreteMeasure, scale: f64, rng: &mut impl Rng) -> DiscreteMeasure {
    let points = mu
        .points()
        .iter()
        .map(|x| {
            x.iter()
                .map(|v| {
                    let g: f64 = StandardNormal.sample(rng);
                    v + scale * g
                })
                .collect()
        })
        .collect();
    DiscreteMeasure::new(points, mu.masses().to_vec()).expect("jitter keeps a valid measure")
}

/// Random feasible plan: northwest corner on shuffled row/column orders, mixed
/// with the product coupling at weight `mix`.
pub fn random_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    mix: f64,
    rng: &mut impl Rng,
) -> Result<Coupling> {
    use rand::seq::SliceRandom;
    let mut rows: Vec<usize> = (0..mu.len()).collect();
    let mut cols: Vec<usize> = (0..nu.len()).collect();
    rows.shuffle(rng);
    cols.shuffle(rng);
    let mut a = mu.masses().to_vec();
    let mut b = nu.masses().to_vec();
    let mut cells: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let (mut r, mut c) = (0, 0);
    while r < rows.len() && c < cols.len() {
        let (i, j) = (rows[r], cols[c]);
        let q = a[i].min(b[j]);
        if q > 0.0 {
            *cells.entry((i, j)).or_insert(0.0) += (1.0 - mix) * q;
        }
        a[i] -= q;
        b[j] -= q;
        if a[i] <= b[j] {
            r += 1;
        } else {
            c += 1;
        }
    }
    if mix > 0.0 {
        for (i, p) in mu.masses().iter().enumerate() {
            for (j, q) in nu.masses().iter().enumerate() {
                *cells.entry((i, j)).or_insert(0.0) += mix * p * q;
            }
        }
    }
    let entries = cells
        .into_iter()
        .filter(|(_, m)| *m > 0.0)
        .map(|((i, j), m)| (i, j, m))
        .collect();
    Coupling::new(mu.clone(), nu.clone(), entries)
}

/// One-dimensional frame with atoms clustered around a common center, the only
/// regime where the canonical-dual premises can hold.
fn clustered_line_frame(rng: &mut impl Rng, atoms: usize) -> Result<DiscreteMeasure> {
    let center: f64 = 0.5 + 1.5 * rng.random::<f64>();
    let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
    let points = (0..atoms)
        .map(|_| {
            let g: f64 = StandardNormal.sample(rng);
            vec![sign * center * (1.0 + 0.05 * g)]
        })
        .collect();
    DiscreteMeasure::new_normalized(points, dirichlet_masses(rng, atoms))
}

fn certify_random(
    certifier: &Certifier,
    theorem: Theorem,
    cfg: &BatteryConfig,
    scale: f64,
    rng: &mut ChaCha8Rng,
) -> Result<(PerturbationCertificate, DiscreteMeasure)> {
    let dim = rng.random_range(cfg.dims.clone());
    let atoms = rng.random_range(cfg.atoms.clone()).max(dim);

    if matches!(
        theorem,
        Theorem::CanonicalDualSigma | Theorem::CanonicalDualEpsHat
    ) {
        let mu = clustered_line_frame(rng, atoms)?;
        let center = mu.second_moment().sqrt();
        let eta = jitter(&mu, scale * center, rng);
        let cd = certifier.canonical_dual(&mu, &eta)?;
        let cert = if theorem == Theorem::CanonicalDualSigma {
            cd.sigma
        } else {
            cd.eps_hat
        };
        return Ok((cert, eta));
    }

    let mu = random_frame(rng, dim, atoms)?;
    match theorem {
        Theorem::QuadClose | Theorem::W2Openness | Theorem::Sweetie => {
            let nu = jitter(&mu, scale, rng);
            let cert = match theorem {
                Theorem::QuadClose => certifier
                    .quadclose(&mu, &nu, &diagonal_coupling(&mu, &nu)?)?
                    .with_coupling_source("diagonal"),
                Theorem::W2Openness => certifier.w2(&mu, &nu)?,
                _ => certifier.sweetie(&mu, &nu)?,
            };
            Ok((cert, nu))
        }
        Theorem::SweetieCoupling => {
            let nu = jitter(&mu, scale, rng);
            let mix = rng.random::<f64>();
            let gamma = random_coupling(&mu, &nu, mix, rng)?;
            let cert = certifier
                .sweetie_coupling(&mu, &nu, &gamma)?
                .with_coupling_source("random");
            Ok((cert, nu))
        }
        Theorem::PaleyWiener => {
            let nu = jitter(&mu, scale, rng);
            let p = PairedMeasure::new(
                mu.points().to_vec(),
                nu.points().to_vec(),
                mu.masses().to_vec(),
            )?;
            let cert = certifier.paley(&p, 0.0, 0.0, Delta::Auto)?;
            Ok((cert, p.y_marginal()))
        }
        Theorem::DualStability => {
            let (dual, gamma12) = canonical_dual(&mu)?;
            let eta = jitter(&mu, scale, rng);
            let gamma23 = diagonal_coupling(&dual, &eta)?;
            let cert = certifier
                .dual_stability(&mu, &dual, &gamma12, &eta, &gamma23)?
                .with_coupling_source("canonical-dual, diagonal");
            Ok((cert, eta))
        }
        Theorem::CouplingDualEps | Theorem::CouplingDualChi => {
            let eta = jitter(&mu, scale, rng);
            let gamma = diagonal_coupling(&mu, &eta)?;
            let cd = certifier.coupling_dual(&mu, &eta, &gamma)?;
            let cert = if theorem == Theorem::CouplingDualEps {
                cd.eps
            } else {
                cd.chi
            };
            Ok((cert.with_coupling_source("diagonal"), eta))
        }
        Theorem::ParsevalTau => {
            let parseval = canonical_parseval(&mu)?;
            let eta = jitter(&parseval, scale, rng);
            let gamma = diagonal_coupling(&mu, &eta)?;
            let cert = certifier
                .parseval_tau(&mu, &eta, &gamma)?
                .with_coupling_source("diagonal");
            Ok((cert, eta))
        }
        Theorem::CanonicalDualSigma | Theorem::CanonicalDualEpsHat => unreachable!(),
    }
}
