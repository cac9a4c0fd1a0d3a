//! Perturbation certificates: for each stability result, the premise quantity,
//! its threshold, and the frame bounds it guarantees for the perturbed measure.
//! [`validate`] compares those guarantees against the true spectral bounds.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::frame::{
    frame_bounds_with_tol, pw_delta_exact, pw_extremal_coefficients, synthesis_t, synthesis_u,
    Frame, PairedMeasure,
};
use crate::linalg::{self, Matrix, DEFAULT_SINGULAR_TOL};
use crate::measure::DiscreteMeasure;
use crate::transport::{self, glue, quadratic_cost, w2, Coupling};

/// Slack allowed when comparing guaranteed bounds with actual ones.
pub const VALIDATION_SLACK: f64 = 1e-9;
/// A falsifier counterexample must beat the inequality by more than this
/// (relative to the right-hand side when that exceeds 1).
pub const FALSIFY_MARGIN: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Theorem {
    QuadClose,
    W2Openness,
    Sweetie,
    SweetieCoupling,
    PaleyWiener,
    DualStability,
    CanonicalDualSigma,
    CanonicalDualEpsHat,
    CouplingDualEps,
    CouplingDualChi,
    ParsevalTau,
}

impl Theorem {
    pub const ALL: [Theorem; 11] = [
        Theorem::QuadClose,
        Theorem::W2Openness,
        Theorem::Sweetie,
        Theorem::SweetieCoupling,
        Theorem::PaleyWiener,
        Theorem::DualStability,
        Theorem::CanonicalDualSigma,
        Theorem::CanonicalDualEpsHat,
        Theorem::CouplingDualEps,
        Theorem::CouplingDualChi,
        Theorem::ParsevalTau,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Theorem::QuadClose => "QuadClose",
            Theorem::W2Openness => "W2Openness",
            Theorem::Sweetie => "Sweetie",
            Theorem::SweetieCoupling => "SweetieCoupling",
            Theorem::PaleyWiener => "PaleyWiener",
            Theorem::DualStability => "DualStability",
            Theorem::CanonicalDualSigma => "CanonicalDualSigma",
            Theorem::CanonicalDualEpsHat => "CanonicalDualEpsHat",
            Theorem::CouplingDualEps => "CouplingDualEps",
            Theorem::CouplingDualChi => "CouplingDualChi",
            Theorem::ParsevalTau => "ParsevalTau",
        }
    }
}

impl fmt::Display for Theorem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Theorem {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .map(|c| c.to_ascii_lowercase())
            .collect();
        Theorem::ALL
            .into_iter()
            .find(|t| t.name().to_ascii_lowercase() == key)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem '{s}'")))
    }
}

/// Whether a Paley–Wiener hypothesis was verified exactly or taken on trust.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Hypothesis {
    Exact,
    Assumed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCertificate {
    pub theorem: Theorem,
    pub premise_value: f64,
    pub premise_threshold: f64,
    pub premise_ok: bool,
    pub guaranteed_lower: Option<f64>,
    pub guaranteed_upper: Option<f64>,
    pub inputs_digest: String,
    /// Digest of the measure whose bounds are guaranteed.
    pub perturbed_digest: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling_source: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hypothesis: Option<Hypothesis>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub extras: BTreeMap<String, f64>,
}

impl PerturbationCertificate {
    fn build(
        theorem: Theorem,
        premise_value: f64,
        premise_threshold: f64,
        bounds: impl FnOnce() -> (f64, f64),
        inputs_digest: String,
        perturbed: &DiscreteMeasure,
    ) -> Self {
        let premise_ok = premise_value < premise_threshold;
        let (lower, upper) = if premise_ok {
            let (l, u) = bounds();
            (Some(l), Some(u))
        } else {
            (None, None)
        };
        Self {
            theorem,
            premise_value,
            premise_threshold,
            premise_ok,
            guaranteed_lower: lower,
            guaranteed_upper: upper,
            inputs_digest,
            perturbed_digest: perturbed.digest(),
            coupling_source: None,
            hypothesis: None,
            extras: BTreeMap::new(),
        }
    }

    fn extra(mut self, key: &str, value: f64) -> Self {
        self.extras.insert(key.to_string(), value);
        self
    }

    /// Records where the coupling came from (for example `"w2-optimal"`).
    pub fn with_coupling_source(mut self, source: impl Into<String>) -> Self {
        self.coupling_source = Some(source.into());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("certificate serializes")
    }
}

/// Both canonical-dual certificates, computed over the same product coupling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CanonicalDualCertificate {
    pub sigma: PerturbationCertificate,
    pub eps_hat: PerturbationCertificate,
}

/// Both coupling-dual certificates; `combined_lower` is the larger of the two
/// guaranteed lower bounds that hold.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingDualCertificate {
    pub eps: PerturbationCertificate,
    pub chi: PerturbationCertificate,
    pub combined_lower: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Delta {
    /// `delta = sigma_max((X - Y) D_sqrt(m))`; requires `lambda1 = lambda2 = 0`.
    Auto,
    Value(f64),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub certificate: PerturbationCertificate,
    pub actual_lower: f64,
    pub actual_upper: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
    pub verdict: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Falsification {
    Counterexample {
        w: Vec<f64>,
        lhs: f64,
        rhs: f64,
    },
    /// No violation among the sampled directions. This is not a proof.
    NotFalsified {
        trials: usize,
    },
}

impl Falsification {
    pub fn is_counterexample(&self) -> bool {
        matches!(self, Falsification::Counterexample { .. })
    }
}

struct InputsHasher(Sha256);

impl InputsHasher {
    fn new(theorem: Theorem) -> Self {
        let mut h = Sha256::new();
        h.update(theorem.name().as_bytes());
        Self(h)
    }

    fn measure(mut self, mu: &DiscreteMeasure) -> Self {
        mu.hash_into(&mut self.0);
        self
    }

    fn coupling(mut self, gamma: &Coupling) -> Self {
        gamma.hash_into(&mut self.0);
        self
    }

    fn paired(mut self, p: &PairedMeasure) -> Self {
        p.hash_into(&mut self.0);
        self
    }

    fn scalar(mut self, v: f64) -> Self {
        self.0.update(v.to_bits().to_le_bytes());
        self
    }

    fn finish(self) -> String {
        hex::encode(self.0.finalize())
    }
}

fn check_nonnegative(name: &str, v: f64) -> Result<()> {
    if !v.is_finite() || v < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "{name} must be finite and nonnegative, got {v}"
        )));
    }
    Ok(())
}

/// Certificate calculator with a configurable singularity tolerance (the
/// relative `lambda_min <= tol * lambda_max` cut-off for "not a frame").
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Certifier {
    pub singular_tol: f64,
}

impl Default for Certifier {
    fn default() -> Self {
        Self {
            singular_tol: DEFAULT_SINGULAR_TOL,
        }
    }
}

impl Certifier {
    pub fn new(singular_tol: f64) -> Self {
        Self { singular_tol }
    }

    fn frame(&self, mu: &DiscreteMeasure) -> Result<Frame> {
        Frame::with_tol(mu, self.singular_tol)
    }

    /// `lambda = sum |x - y|^2 dgamma < A` gives bounds `((sqrt A - sqrt lambda)^2, M2(nu))`.
    pub fn quadclose(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        gamma: &Coupling,
    ) -> Result<PerturbationCertificate> {
        let frame = self.frame(mu)?;
        gamma.check_marginals(mu, nu)?;
        let a = frame.lower();
        let lambda = quadratic_cost(gamma);
        let digest = InputsHasher::new(Theorem::QuadClose)
            .measure(mu)
            .measure(nu)
            .coupling(gamma)
            .finish();
        let m2 = nu.second_moment();
        Ok(PerturbationCertificate::build(
            Theorem::QuadClose,
            lambda,
            a,
            || ((a.sqrt() - lambda.sqrt()).powi(2), m2),
            digest,
            nu,
        )
        .extra("A", a)
        .extra("B", frame.upper()))
    }

    /// Openness in `W2`: the premise value is `W2^2`, compared with `A`.
    pub fn w2(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
    ) -> Result<PerturbationCertificate> {
        let frame = self.frame(mu)?;
        let (dist, _) = w2(mu, nu)?;
        let a = frame.lower();
        let digest = InputsHasher::new(Theorem::W2Openness)
            .measure(mu)
            .measure(nu)
            .finish();
        let m2 = nu.second_moment();
        Ok(PerturbationCertificate::build(
            Theorem::W2Openness,
            dist * dist,
            a,
            || ((a.sqrt() - dist).powi(2), m2),
            digest,
            nu,
        )
        .extra("A", a)
        .extra("B", frame.upper())
        .extra("w2", dist))
        .map(|c| c.with_coupling_source("w2-optimal"))
    }

    /// `R = ||S_mu - S_nu||_2 < A` gives bounds `(A - R, B + R)`.
    pub fn sweetie(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
    ) -> Result<PerturbationCertificate> {
        self.sweetie_with_r(mu, nu, None)
    }

    /// As [`Certifier::sweetie`], with an optional user-chosen `R`. The override must
    /// be at least the optimal constant, otherwise the lemma's hypothesis fails.
    pub fn sweetie_with_r(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        r_override: Option<f64>,
    ) -> Result<PerturbationCertificate> {
        let frame = self.frame(mu)?;
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: nu.dim(),
            });
        }
        let s_nu = crate::frame::frame_operator(nu);
        let diff = frame
            .certificate
            .frame_operator
            .as_matrix()
            .sub(s_nu.as_matrix())?;
        let r_opt = linalg::spectral_norm(&diff);
        let r = match r_override {
            None => r_opt,
            Some(r) => {
                check_nonnegative("R", r)?;
                if r < r_opt {
                    return Err(Error::InvalidArgument(format!(
                        "R = {r} is below the optimal constant ||S_mu - S_nu||_2 = {r_opt}"
                    )));
                }
                r
            }
        };
        let mut hasher = InputsHasher::new(Theorem::Sweetie).measure(mu).measure(nu);
        if let Some(r) = r_override {
            hasher = hasher.scalar(r);
        }
        Ok(self
            .sweetie_cert(Theorem::Sweetie, &frame, r, hasher.finish(), nu)
            .extra("R_opt", r_opt))
    }

    /// Sweetie bound with `R` computed through a coupling: the spectral norm of
    /// `sum mass (x x^T - y y^T)`. Equal to the uncoupled `R`, since both
    /// marginals are fixed.
    pub fn sweetie_coupling(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        gamma: &Coupling,
    ) -> Result<PerturbationCertificate> {
        let frame = self.frame(mu)?;
        gamma.check_marginals(mu, nu)?;
        let n = mu.dim();
        let mut diff = Matrix::zeros(n, n);
        for (x, y, m) in gamma.pairs() {
            diff.add_outer(m, x, x);
            diff.add_outer(-m, y, y);
        }
        let r = linalg::spectral_norm(&diff);
        let digest = InputsHasher::new(Theorem::SweetieCoupling)
            .measure(mu)
            .measure(nu)
            .coupling(gamma)
            .finish();
        Ok(self.sweetie_cert(Theorem::SweetieCoupling, &frame, r, digest, nu))
    }

    fn sweetie_cert(
        &self,
        theorem: Theorem,
        frame: &Frame,
        r: f64,
        digest: String,
        nu: &DiscreteMeasure,
    ) -> PerturbationCertificate {
        let (a, b) = (frame.lower(), frame.upper());
        PerturbationCertificate::build(theorem, r, a, || (a - r, b + r), digest, nu)
            .extra("A", a)
            .extra("B", b)
    }

    /// Paley–Wiener: premise `max(lambda1 + delta / sqrt A, lambda2) < 1`, lower bound
    /// `A^2 (1 - (lambda1 + delta / sqrt A))^2 / ((1 + lambda2)^2 M2(nu))`, upper `M2(nu)`.
    pub fn paley(
        &self,
        p: &PairedMeasure,
        lambda1: f64,
        lambda2: f64,
        delta: Delta,
    ) -> Result<PerturbationCertificate> {
        check_nonnegative("lambda1", lambda1)?;
        check_nonnegative("lambda2", lambda2)?;
        let mu = p.x_marginal();
        let nu = p.y_marginal();
        let frame = self.frame(&mu)?;
        let (delta, hypothesis) = match delta {
            Delta::Auto => {
                if lambda1 != 0.0 || lambda2 != 0.0 {
                    return Err(Error::AutoRequiresZeroLambdas);
                }
                (pw_delta_exact(p), Hypothesis::Exact)
            }
            Delta::Value(d) => {
                check_nonnegative("delta", d)?;
                (d, Hypothesis::Assumed)
            }
        };
        let a = frame.lower();
        let first = lambda1 + delta / a.sqrt();
        let premise = first.max(lambda2);
        let m2 = nu.second_moment();
        let digest = InputsHasher::new(Theorem::PaleyWiener)
            .paired(p)
            .scalar(lambda1)
            .scalar(lambda2)
            .scalar(delta)
            .finish();
        let mut cert = PerturbationCertificate::build(
            Theorem::PaleyWiener,
            premise,
            1.0,
            || {
                let lower = a * a * (1.0 - first).powi(2) / ((1.0 + lambda2).powi(2) * m2);
                (lower, m2)
            },
            digest,
            &nu,
        )
        .extra("A", a)
        .extra("delta", delta)
        .extra("lambda1", lambda1)
        .extra("lambda2", lambda2);
        cert.hypothesis = Some(hypothesis);
        Ok(cert)
    }

    /// Dual stability: `gamma12` witnesses `nu` as a transport dual of `mu`,
    /// `gamma23` couples `nu` to `eta`. With `sigma = sum |x - z| |y|` over the
    /// glued plan, `sigma < 1` gives lower bound `(1 - sigma)^2 / lambda_max(S_nu)`
    /// (reported; the weaker `(1 - sigma)^2 / M2(nu)` is kept in the extras) and
    /// upper bound `M2(eta)`.
    pub fn dual_stability(
        &self,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
        gamma12: &Coupling,
        eta: &DiscreteMeasure,
        gamma23: &Coupling,
    ) -> Result<PerturbationCertificate> {
        self.frame(mu)?;
        gamma12.check_marginals(mu, nu)?;
        gamma23.check_marginals(nu, eta)?;
        let residual = transport::moment_residual(gamma12);
        if residual.is_nan() || residual > transport::DUAL_RESIDUAL_TOL {
            return Err(Error::NotADualWitness {
                residual,
                tol: transport::DUAL_RESIDUAL_TOL,
            });
        }
        let plan = glue(gamma12, gamma23)?;
        let sigma: f64 = plan
            .triples()
            .map(|(x, y, z, m)| m * linalg::dist(x, z) * linalg::norm(y))
            .sum();
        let d = frame_bounds_with_tol(nu, self.singular_tol).upper;
        let m2_nu = nu.second_moment();
        let m2_eta = eta.second_moment();
        let digest = InputsHasher::new(Theorem::DualStability)
            .measure(mu)
            .measure(nu)
            .coupling(gamma12)
            .measure(eta)
            .coupling(gamma23)
            .finish();
        let mut cert = PerturbationCertificate::build(
            Theorem::DualStability,
            sigma,
            1.0,
            || ((1.0 - sigma).powi(2) / d, m2_eta),
            digest,
            eta,
        )
        .extra("D", d)
        .extra("M2_nu", m2_nu)
        .extra("witness_residual", residual);
        if cert.premise_ok {
            cert = cert
                .extra("lower_D", (1.0 - sigma).powi(2) / d)
                .extra("lower_M2", (1.0 - sigma).powi(2) / m2_nu);
        }
        Ok(cert)
    }

    /// Canonical-dual perturbation over the product `mu ⊗ eta`:
    /// `sigma_hat = sum p_i q_k |S^-1 x_i| |x_i - z_k| < 1` and
    /// `eps_hat = sum p_i q_k |x_i| |x_i - z_k| < A`, both giving lower bound
    /// `A (1 - sigma_hat)^2` and upper bound `M2(eta)`.
    pub fn canonical_dual(
        &self,
        mu: &DiscreteMeasure,
        eta: &DiscreteMeasure,
    ) -> Result<CanonicalDualCertificate> {
        let frame = self.frame(mu)?;
        if mu.dim() != eta.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: eta.dim(),
            });
        }
        let a = frame.lower();
        let (mut sigma_hat, mut eps_hat) = (0.0, 0.0);
        for (x, p) in mu.atoms() {
            let dual_norm = linalg::norm(&frame.inverse.mul_vec(x)?);
            let x_norm = linalg::norm(x);
            let spread: f64 = eta.atoms().map(|(z, q)| q * linalg::dist(x, z)).sum();
            sigma_hat += p * dual_norm * spread;
            eps_hat += p * x_norm * spread;
        }
        let m2 = eta.second_moment();
        let lower = a * (1.0 - sigma_hat).powi(2);
        let digest = |t| InputsHasher::new(t).measure(mu).measure(eta).finish();
        let source = "product";
        let sigma = PerturbationCertificate::build(
            Theorem::CanonicalDualSigma,
            sigma_hat,
            1.0,
            || (lower, m2),
            digest(Theorem::CanonicalDualSigma),
            eta,
        )
        .extra("A", a)
        .extra("eps_hat", eps_hat)
        .with_coupling_source(source);
        let eps = PerturbationCertificate::build(
            Theorem::CanonicalDualEpsHat,
            eps_hat,
            a,
            || (lower, m2),
            digest(Theorem::CanonicalDualEpsHat),
            eta,
        )
        .extra("A", a)
        .extra("sigma_hat", sigma_hat)
        .with_coupling_source(source);
        Ok(CanonicalDualCertificate {
            sigma,
            eps_hat: eps,
        })
    }

    /// Coupling-dual perturbation: `eps = sum |x| |x - z| dgamma < A` gives lower
    /// bound `(A - eps)^2 / B`; `chi = sum |S^-1 x| |x - z| dgamma < 1` gives
    /// `A^2 (1 - chi)^2 / B`. Upper bound `M2(eta)` in both.
    pub fn coupling_dual(
        &self,
        mu: &DiscreteMeasure,
        eta: &DiscreteMeasure,
        gamma: &Coupling,
    ) -> Result<CouplingDualCertificate> {
        let frame = self.frame(mu)?;
        gamma.check_marginals(mu, eta)?;
        let (a, b) = (frame.lower(), frame.upper());
        let (mut eps, mut chi) = (0.0, 0.0);
        for (x, z, m) in gamma.pairs() {
            let d = linalg::dist(x, z);
            eps += m * linalg::norm(x) * d;
            chi += m * linalg::norm(&frame.inverse.mul_vec(x)?) * d;
        }
        let m2 = eta.second_moment();
        let digest = |t| {
            InputsHasher::new(t)
                .measure(mu)
                .measure(eta)
                .coupling(gamma)
                .finish()
        };
        let eps_cert = PerturbationCertificate::build(
            Theorem::CouplingDualEps,
            eps,
            a,
            || ((a - eps).powi(2) / b, m2),
            digest(Theorem::CouplingDualEps),
            eta,
        )
        .extra("A", a)
        .extra("B", b);
        let chi_cert = PerturbationCertificate::build(
            Theorem::CouplingDualChi,
            chi,
            1.0,
            || (a * a * (1.0 - chi).powi(2) / b, m2),
            digest(Theorem::CouplingDualChi),
            eta,
        )
        .extra("A", a)
        .extra("B", b);
        let combined_lower = match (eps_cert.guaranteed_lower, chi_cert.guaranteed_lower) {
            (Some(x), Some(y)) => Some(x.max(y)),
            (x, y) => x.or(y),
        };
        Ok(CouplingDualCertificate {
            eps: eps_cert,
            chi: chi_cert,
            combined_lower,
        })
    }

    /// Parseval reconstruction: `tau = sum |x| |S^-1/2 x - z| dgamma < sqrt A` gives
    /// bounds `((sqrt A - tau)^2 / B, M2(eta))`.
    pub fn parseval_tau(
        &self,
        mu: &DiscreteMeasure,
        eta: &DiscreteMeasure,
        gamma: &Coupling,
    ) -> Result<PerturbationCertificate> {
        let frame = self.frame(mu)?;
        gamma.check_marginals(mu, eta)?;
        let (a, b) = (frame.lower(), frame.upper());
        let mut tau = 0.0;
        for (x, z, m) in gamma.pairs() {
            let px = frame.inverse_sqrt.mul_vec(x)?;
            tau += m * linalg::norm(x) * linalg::dist(&px, z);
        }
        let sqrt_a = a.sqrt();
        let m2 = eta.second_moment();
        let digest = InputsHasher::new(Theorem::ParsevalTau)
            .measure(mu)
            .measure(eta)
            .coupling(gamma)
            .finish();
        Ok(PerturbationCertificate::build(
            Theorem::ParsevalTau,
            tau,
            sqrt_a,
            || ((sqrt_a - tau).powi(2) / b, m2),
            digest,
            eta,
        )
        .extra("A", a)
        .extra("B", b))
    }

    /// Compares a certificate's guarantees with the true bounds of `perturbed`.
    pub fn validate(
        &self,
        cert: &PerturbationCertificate,
        perturbed: &DiscreteMeasure,
    ) -> Result<ValidationReport> {
        let found = perturbed.digest();
        if found != cert.perturbed_digest {
            return Err(Error::DigestMismatch {
                expected: cert.perturbed_digest.clone(),
                found,
            });
        }
        let (Some(lower), Some(upper)) = (cert.guaranteed_lower, cert.guaranteed_upper) else {
            return Err(Error::PremiseNotSatisfied);
        };
        if !cert.premise_ok {
            return Err(Error::PremiseNotSatisfied);
        }
        let actual = frame_bounds_with_tol(perturbed, self.singular_tol);
        let lower_slack = actual.lower - lower;
        let upper_slack = upper - actual.upper;
        Ok(ValidationReport {
            certificate: cert.clone(),
            actual_lower: actual.lower,
            actual_upper: actual.upper,
            lower_slack,
            upper_slack,
            verdict: lower_slack >= -VALIDATION_SLACK && upper_slack >= -VALIDATION_SLACK,
        })
    }
}

pub fn certify_quadclose(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    gamma: &Coupling,
) -> Result<PerturbationCertificate> {
    Certifier::default().quadclose(mu, nu, gamma)
}

pub fn certify_w2(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<PerturbationCertificate> {
    Certifier::default().w2(mu, nu)
}

pub fn certify_sweetie(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<PerturbationCertificate> {
    Certifier::default().sweetie(mu, nu)
}

pub fn certify_sweetie_coupling(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    gamma: &Coupling,
) -> Result<PerturbationCertificate> {
    Certifier::default().sweetie_coupling(mu, nu, gamma)
}

pub fn certify_paley(
    p: &PairedMeasure,
    lambda1: f64,
    lambda2: f64,
    delta: Delta,
) -> Result<PerturbationCertificate> {
    Certifier::default().paley(p, lambda1, lambda2, delta)
}

pub fn certify_dual_stability(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    gamma12: &Coupling,
    eta: &DiscreteMeasure,
    gamma23: &Coupling,
) -> Result<PerturbationCertificate> {
    Certifier::default().dual_stability(mu, nu, gamma12, eta, gamma23)
}

pub fn certify_canonical_dual(
    mu: &DiscreteMeasure,
    eta: &DiscreteMeasure,
) -> Result<CanonicalDualCertificate> {
    Certifier::default().canonical_dual(mu, eta)
}

pub fn certify_coupling_dual(
    mu: &DiscreteMeasure,
    eta: &DiscreteMeasure,
    gamma: &Coupling,
) -> Result<CouplingDualCertificate> {
    Certifier::default().coupling_dual(mu, eta, gamma)
}

pub fn certify_parseval_tau(
    mu: &DiscreteMeasure,
    eta: &DiscreteMeasure,
    gamma: &Coupling,
) -> Result<PerturbationCertificate> {
    Certifier::default().parseval_tau(mu, eta, gamma)
}

pub fn validate(
    cert: &PerturbationCertificate,
    perturbed: &DiscreteMeasure,
) -> Result<ValidationReport> {
    Certifier::default().validate(cert, perturbed)
}

/// Searches for `w` with `||Uw - Tw|| > lambda1 ||Uw|| + lambda2 ||Tw|| + delta ||w||_{L^2(mu)}`.
///
/// The top right singular vector of `(X - Y) D_sqrt(m)` is tried first, then
/// `trials` random directions `D_sqrt(m)^-1 g` with `g` standard Gaussian.
pub fn falsify_paley(
    p: &PairedMeasure,
    lambda1: f64,
    lambda2: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<Falsification> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    check_nonnegative("lambda1", lambda1)?;
    check_nonnegative("lambda2", lambda2)?;
    check_nonnegative("delta", delta)?;

    let check = |w: &[f64]| -> Result<Option<Falsification>> {
        let uw = synthesis_u(p, w)?;
        let tw = synthesis_t(p, w)?;
        let lhs = linalg::dist(&uw, &tw);
        let rhs = lambda1 * linalg::norm(&uw) + lambda2 * linalg::norm(&tw) + delta * p.l2_norm(w);
        if lhs > rhs + FALSIFY_MARGIN * rhs.max(1.0) {
            Ok(Some(Falsification::Counterexample {
                w: w.to_vec(),
                lhs,
                rhs,
            }))
        } else {
            Ok(None)
        }
    };

    let (_, top) = pw_extremal_coefficients(p);
    if let Some(found) = check(&top)? {
        return Ok(found);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..trials {
        let w: Vec<f64> = p
            .masses()
            .iter()
            .map(|m| {
                let g: f64 = StandardNormal.sample(&mut rng);
                g / m.sqrt()
            })
            .collect();
        let scale = p.l2_norm(&w);
        if scale == 0.0 {
            continue;
        }
        let w: Vec<f64> = w.iter().map(|v| v / scale).collect();
        if let Some(found) = check(&w)? {
            return Ok(found);
        }
    }
    Ok(Falsification::NotFalsified { trials })
}
