//! `pframe`: probabilistic frames from the command line.
//!
//! Exit codes: 0 success, 2 usage or input error, 3 not a frame,
//! 4 premise failed (or not a transport dual), 5 validation violation.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde::Serialize;

use pframe_core::battery::{self, BatteryConfig};
use pframe_core::frame::{
    canonical_dual, canonical_parseval, frame_bounds_with_tol, PairedFile, PairedMeasure,
};
use pframe_core::linalg::DEFAULT_SINGULAR_TOL;
use pframe_core::measure::{DiscreteMeasure, MeasureFile};
use pframe_core::perturb::{
    falsify_paley, Certifier, Delta, Falsification, PerturbationCertificate, Theorem,
    ValidationReport,
};
use pframe_core::transport::{
    diagonal_coupling, dual_membership, product_coupling, w2, Coupling, CouplingFile,
    DualMembership,
};
use pframe_core::Error;

const EXIT_INPUT: u8 = 2;
const EXIT_NOT_FRAME: u8 = 3;
const EXIT_PREMISE: u8 = 4;
const EXIT_VIOLATION: u8 = 5;

#[derive(Parser)]
#[command(name = "pframe", version, about = "Probabilistic frames, optimal transport and perturbation certificates")]
struct Cli {
    /// Relative singularity tolerance (lambda_min <= tol * lambda_max means "not a frame").
    #[arg(long, env = "PFRAME_TOL", global = true)]
    tol: Option<f64>,

    /// Rescale input masses that do not sum to 1 instead of rejecting them.
    #[arg(long, global = true)]
    force_normalize: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random frame (Gaussian atoms, Dirichlet masses).
    Gen {
        #[arg(long)]
        dim: usize,
        #[arg(long)]
        atoms: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the measure here and print its frame certificate; without it
        /// the measure goes to stdout and the certificate to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Frame operator, optimal bounds and classification.
    Analyze { measure: PathBuf },
    /// Canonical dual frame (S^-1)_# mu.
    Dual {
        measure: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Canonical Parseval frame (S^-1/2)_# mu.
    Parseval {
        measure: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Exact 2-Wasserstein distance.
    W2 {
        mu: PathBuf,
        nu: PathBuf,
        /// Write the optimal plan as coupling JSON.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Decide whether NU is a transport dual of MU.
    IsmemberDual {
        mu: PathBuf,
        nu: PathBuf,
        /// Write the witness coupling when NU is a member.
        #[arg(long)]
        witness: Option<PathBuf>,
    },
    /// Compute a perturbation certificate.
    ///
    /// Inputs by theorem: quadclose, w2, sweetie, sweetie-coupling: MU NU;
    /// paley: PAIRED; dual-stability: MU NU ETA; canonical-dual, coupling-dual,
    /// parseval: MU ETA.
    Certify {
        #[arg(long)]
        theorem: String,
        inputs: Vec<PathBuf>,
        /// Coupling between the first two measures (quadclose, sweetie-coupling,
        /// coupling-dual, parseval).
        #[arg(long)]
        coupling: Option<PathBuf>,
        /// Dual witness coupling of MU and NU (dual-stability).
        #[arg(long)]
        gamma12: Option<PathBuf>,
        /// Coupling of NU and ETA (dual-stability).
        #[arg(long)]
        gamma23: Option<PathBuf>,
        /// Sweetie constant override; must be at least ||S_mu - S_nu||_2.
        #[arg(long)]
        r: Option<f64>,
        /// Paley–Wiener: compute delta exactly (requires zero lambdas). Default
        /// when --delta is not given.
        #[arg(long, conflicts_with = "delta")]
        auto_delta: bool,
        #[arg(long)]
        delta: Option<f64>,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0)]
        lambda2: f64,
        /// Paley–Wiener: spot-check the hypothesis with this many random directions.
        #[arg(long)]
        falsify: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also check the guarantees against the true bounds of the perturbed measure.
        #[arg(long)]
        validate: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the randomized soundness battery and emit one CSV row per trial.
    Validate {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Trials per theorem.
        #[arg(long, default_value_t = 200)]
        trials: usize,
        /// Dimension range, e.g. "2-6" or "3".
        #[arg(long, default_value = "2-6")]
        dims: String,
        /// Atom-count range, e.g. "3-32".
        #[arg(long, default_value = "3-32")]
        atoms: String,
        /// Comma-separated perturbation scales.
        #[arg(long)]
        scales: Option<String>,
        /// Restrict to these theorems (repeatable).
        #[arg(long)]
        theorem: Vec<String>,
        /// CSV destination; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Push every guaranteed bound 10% in the unsafe direction; the run
        /// must then report violations.
        #[arg(long)]
        self_test_corrupt: bool,
    },
}

/// A failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(message: impl Into<String>) -> Self {
        Self {
            code: EXIT_INPUT,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NotAFrame { .. } | Error::SingularMatrix { .. } => EXIT_NOT_FRAME,
            _ => EXIT_INPUT,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

type CliResult = Result<u8, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let ctx = Context {
        tol: cli.tol.unwrap_or(DEFAULT_SINGULAR_TOL),
        force_normalize: cli.force_normalize,
    };
    if !(ctx.tol.is_finite() && ctx.tol > 0.0) {
        eprintln!("error: tolerance must be positive and finite, got {}", ctx.tol);
        return ExitCode::from(EXIT_INPUT);
    }
    match ctx.run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

struct Context {
    tol: f64,
    force_normalize: bool,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn parse_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = read_text(path)?;
    serde_json::from_str(&text).map_err(|e| Failure::input(format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, format!("{text}\n"))
            .map_err(|e| Failure::input(format!("{}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("output serializes")
}

/// `%.12g`-style formatting: 12 significant digits, trailing zeros dropped.
fn fmt_sig12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let exp = v.abs().log10().floor() as i32;
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let s = format!("{v:.decimals$}");
        if s.contains('.') {
            s.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            s
        }
    } else {
        let s = format!("{v:.11e}");
        let (mantissa, e) = s.split_once('e').expect("exponent form");
        let mantissa = mantissa.trim_end_matches('0').trim_end_matches('.');
        format!("{mantissa}e{e}")
    }
}

fn parse_range(text: &str, what: &str) -> Result<std::ops::RangeInclusive<usize>, Failure> {
    let bad = || Failure::input(format!("{what}: expected N or N-M, got '{text}'"));
    let (lo, hi) = match text.split_once(['-', ':']) {
        Some((a, b)) => (a.trim(), b.trim()),
        None => (text.trim(), text.trim()),
    };
    let lo: usize = lo.parse().map_err(|_| bad())?;
    let hi: usize = hi.parse().map_err(|_| bad())?;
    if lo == 0 || lo > hi {
        return Err(bad());
    }
    Ok(lo..=hi)
}

/// Which certificate(s) a `--theorem` name selects.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Selection {
    Single(Theorem),
    CanonicalDual,
    CouplingDual,
}

fn select_theorem(name: &str) -> Result<Selection, Failure> {
    let key: String = name
        .chars()
        .filter(char::is_ascii_alphanumeric)
        .map(|c| c.to_ascii_lowercase())
        .collect();
    let sel = match key.as_str() {
        "w2" => Selection::Single(Theorem::W2Openness),
        "paley" => Selection::Single(Theorem::PaleyWiener),
        "parseval" => Selection::Single(Theorem::ParsevalTau),
        "canonicaldual" | "canonicaldualsigma" | "canonicaldualepshat" => Selection::CanonicalDual,
        "couplingdual" | "couplingdualeps" | "couplingdualchi" => Selection::CouplingDual,
        _ => Selection::Single(
            name.parse::<Theorem>()
                .map_err(|_| Failure::input(format!("unknown theorem '{name}'")))?,
        ),
    };
    Ok(sel)
}

#[derive(Serialize)]
struct MembershipOutput {
    member: bool,
    phase_one_objective: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    moment_residual: Option<f64>,
}

impl Context {
    fn certifier(&self) -> Certifier {
        Certifier::new(self.tol)
    }

    fn read_measure(&self, path: &Path) -> Result<DiscreteMeasure, Failure> {
        let file: MeasureFile = parse_json(path)?;
        file.into_measure(self.force_normalize)
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn read_coupling(&self, path: &Path) -> Result<Coupling, Failure> {
        let file: CouplingFile = parse_json(path)?;
        file.into_coupling()
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn read_paired(&self, path: &Path) -> Result<PairedMeasure, Failure> {
        let file: PairedFile = parse_json(path)?;
        file.into_paired()
            .map_err(|e| Failure::input(format!("{}: {e}", path.display())))
    }

    fn run(&self, command: Command) -> CliResult {
        match command {
            Command::Gen {
                dim,
                atoms,
                seed,
                out,
            } => {
                let mu = battery::seeded_frame(dim, atoms, seed)?;
                match out {
                    Some(path) => {
                        write_or_print(Some(&path), &mu.to_json())?;
                        println!("{}", to_json(&frame_bounds_with_tol(&mu, self.tol)));
                    }
                    None => {
                        println!("{}", mu.to_json());
                        eprintln!("{}", to_json(&frame_bounds_with_tol(&mu, self.tol)));
                    }
                }
                Ok(0)
            }
            Command::Analyze { measure } => {
                let mu = self.read_measure(&measure)?;
                let cert = frame_bounds_with_tol(&mu, self.tol);
                println!("{}", to_json(&cert));
                Ok(if cert.is_frame() { 0 } else { EXIT_NOT_FRAME })
            }
            Command::Dual { measure, out } => {
                let mu = self.read_measure(&measure)?;
                self.require_frame(&mu)?;
                let (dual, _) = canonical_dual(&mu)?;
                write_or_print(out.as_deref(), &dual.to_json())?;
                Ok(0)
            }
            Command::Parseval { measure, out } => {
                let mu = self.read_measure(&measure)?;
                self.require_frame(&mu)?;
                write_or_print(out.as_deref(), &canonical_parseval(&mu)?.to_json())?;
                Ok(0)
            }
            Command::W2 { mu, nu, plan } => {
                let (mu, nu) = (self.read_measure(&mu)?, self.read_measure(&nu)?);
                let (dist, coupling) = w2(&mu, &nu)?;
                println!("{}", fmt_sig12(dist));
                if let Some(path) = plan {
                    write_or_print(Some(&path), &coupling.to_json())?;
                }
                Ok(0)
            }
            Command::IsmemberDual { mu, nu, witness } => {
                let (mu, nu) = (self.read_measure(&mu)?, self.read_measure(&nu)?);
                let result = dual_membership(&mu, &nu)?;
                let output = match &result {
                    DualMembership::Member {
                        witness: gamma,
                        moment_residual,
                        phase_one_objective,
                    } => {
                        if let Some(path) = &witness {
                            write_or_print(Some(path), &gamma.to_json())?;
                        }
                        MembershipOutput {
                            member: true,
                            phase_one_objective: *phase_one_objective,
                            moment_residual: Some(*moment_residual),
                        }
                    }
                    DualMembership::NotMember {
                        phase_one_objective,
                    } => MembershipOutput {
                        member: false,
                        phase_one_objective: *phase_one_objective,
                        moment_residual: None,
                    },
                };
                println!("{}", to_json(&output));
                Ok(if result.is_member() { 0 } else { EXIT_PREMISE })
            }
            Command::Certify {
                theorem,
                inputs,
                coupling,
                gamma12,
                gamma23,
                r,
                auto_delta,
                delta,
                lambda1,
                lambda2,
                falsify,
                seed,
                validate,
                out,
            } => {
                let opts = CertifyOptions {
                    coupling,
                    gamma12,
                    gamma23,
                    r,
                    delta: match (auto_delta, delta) {
                        (_, Some(d)) => Delta::Value(d),
                        _ => Delta::Auto,
                    },
                    lambda1,
                    lambda2,
                    falsify,
                    seed,
                };
                self.certify(&theorem, &inputs, &opts, validate, out.as_deref())
            }
            Command::Validate {
                seed,
                trials,
                dims,
                atoms,
                scales,
                theorem,
                out,
                self_test_corrupt,
            } => {
                let scales = match scales {
                    None => battery::DEFAULT_SCALES.to_vec(),
                    Some(text) => text
                        .split(',')
                        .map(|s| s.trim().parse::<f64>())
                        .collect::<Result<Vec<_>, _>>()
                        .map_err(|_| Failure::input(format!("scales: cannot parse '{text}'")))?,
                };
                let theorems = if theorem.is_empty() {
                    Theorem::ALL.to_vec()
                } else {
                    let mut list = Vec::new();
                    for name in &theorem {
                        match select_theorem(name)? {
                            Selection::Single(t) => list.push(t),
                            Selection::CanonicalDual => list.extend([
                                Theorem::CanonicalDualSigma,
                                Theorem::CanonicalDualEpsHat,
                            ]),
                            Selection::CouplingDual => {
                                list.extend([Theorem::CouplingDualEps, Theorem::CouplingDualChi])
                            }
                        }
                    }
                    list.sort();
                    list.dedup();
                    list
                };
                let cfg = BatteryConfig {
                    seed,
                    trials,
                    dims: parse_range(&dims, "dims")?,
                    atoms: parse_range(&atoms, "atoms")?,
                    scales,
                    theorems,
                    singular_tol: self.tol,
                    corrupt: self_test_corrupt,
                };
                let report = battery::run_battery(&cfg)?;
                write_or_print(out.as_deref(), report.to_csv().trim_end())?;
                for (t, s) in &report.summary {
                    eprintln!(
                        "{t}: {} trials, {} premise ok, {} passed, {} violations",
                        s.trials, s.premise_ok, s.passed, s.violations
                    );
                }
                Ok(if report.violations() == 0 {
                    0
                } else {
                    EXIT_VIOLATION
                })
            }
        }
    }

    fn require_frame(&self, mu: &DiscreteMeasure) -> Result<(), Failure> {
        let cert = frame_bounds_with_tol(mu, self.tol);
        if cert.is_frame() {
            Ok(())
        } else {
            Err(Failure {
                code: EXIT_NOT_FRAME,
                message: format!("input is not a frame (lower bound {})", cert.lower),
            })
        }
    }

    /// The given coupling file, or the index-aligned coupling when atom counts
    /// and masses agree, else the product coupling.
    fn coupling_or_default(
        &self,
        path: Option<&Path>,
        mu: &DiscreteMeasure,
        nu: &DiscreteMeasure,
    ) -> Result<(Coupling, String), Failure> {
        if let Some(p) = path {
            let gamma = self.read_coupling(p)?;
            gamma.check_marginals(mu, nu)?;
            return Ok((gamma, format!("file:{}", p.display())));
        }
        match diagonal_coupling(mu, nu) {
            Ok(g) => Ok((g, "diagonal".into())),
            Err(_) => Ok((product_coupling(mu, nu), "product".into())),
        }
    }

    fn certify(
        &self,
        name: &str,
        inputs: &[PathBuf],
        opts: &CertifyOptions,
        validate: bool,
        out: Option<&Path>,
    ) -> CliResult {
        let selection = select_theorem(name)?;
        let expected = match selection {
            Selection::Single(Theorem::PaleyWiener) => 1,
            Selection::Single(Theorem::DualStability) => 3,
            _ => 2,
        };
        if inputs.len() != expected {
            return Err(Failure::input(format!(
                "theorem '{name}' takes {expected} input file(s), got {}",
                inputs.len()
            )));
        }
        let c = self.certifier();
        let mut certs: Vec<(PerturbationCertificate, DiscreteMeasure)> = Vec::new();
        let mut extra_code = 0;
        let output: String = match selection {
            Selection::Single(Theorem::PaleyWiener) => {
                let p = self.read_paired(&inputs[0])?;
                let cert = c.paley(&p, opts.lambda1, opts.lambda2, opts.delta)?;
                if let Some(trials) = opts.falsify {
                    let delta = cert.extras["delta"];
                    match falsify_paley(&p, opts.lambda1, opts.lambda2, delta, trials, opts.seed)? {
                        Falsification::Counterexample { lhs, rhs, .. } => {
                            eprintln!(
                                "falsifier: hypothesis violated (||Uw - Tw|| = {lhs} > {rhs})"
                            );
                            extra_code = EXIT_PREMISE;
                        }
                        Falsification::NotFalsified { trials } => eprintln!(
                            "falsifier: no violation in {trials} random directions (not a proof)"
                        ),
                    }
                }
                let json = to_json(&cert);
                certs.push((cert, p.y_marginal()));
                json
            }
            Selection::Single(Theorem::DualStability) => {
                let mu = self.read_measure(&inputs[0])?;
                let nu = self.read_measure(&inputs[1])?;
                let eta = self.read_measure(&inputs[2])?;
                let (g12, src12) = match &opts.gamma12 {
                    Some(p) => (self.read_coupling(p)?, format!("file:{}", p.display())),
                    None => match dual_membership(&mu, &nu)? {
                        DualMembership::Member { witness, .. } => (witness, "lp-witness".into()),
                        DualMembership::NotMember {
                            phase_one_objective,
                        } => {
                            return Err(Failure {
                                code: EXIT_PREMISE,
                                message: format!(
                                    "second measure is not a transport dual of the first \
                                     (phase-1 objective {phase_one_objective:e})"
                                ),
                            })
                        }
                    },
                };
                let (g23, src23) = self.coupling_or_default(opts.gamma23.as_deref(), &nu, &eta)?;
                let cert = c
                    .dual_stability(&mu, &nu, &g12, &eta, &g23)?
                    .with_coupling_source(format!("gamma12: {src12}; gamma23: {src23}"));
                let json = to_json(&cert);
                certs.push((cert, eta));
                json
            }
            Selection::Single(t) => {
                let mu = self.read_measure(&inputs[0])?;
                let nu = self.read_measure(&inputs[1])?;
                let cert = match t {
                    Theorem::QuadClose => {
                        let (gamma, source) = match &opts.coupling {
                            Some(p) => (self.read_coupling(p)?, format!("file:{}", p.display())),
                            None => (w2(&mu, &nu)?.1, "w2-optimal".into()),
                        };
                        c.quadclose(&mu, &nu, &gamma)?.with_coupling_source(source)
                    }
                    Theorem::W2Openness => c.w2(&mu, &nu)?,
                    Theorem::Sweetie => c.sweetie_with_r(&mu, &nu, opts.r)?,
                    Theorem::SweetieCoupling => {
                        let (gamma, source) =
                            self.coupling_or_default(opts.coupling.as_deref(), &mu, &nu)?;
                        c.sweetie_coupling(&mu, &nu, &gamma)?.with_coupling_source(source)
                    }
                    Theorem::ParsevalTau => {
                        let (gamma, source) =
                            self.coupling_or_default(opts.coupling.as_deref(), &mu, &nu)?;
                        c.parseval_tau(&mu, &nu, &gamma)?.with_coupling_source(source)
                    }
                    other => unreachable!("{other} is handled as a pair"),
                };
                let json = to_json(&cert);
                certs.push((cert, nu));
                json
            }
            Selection::CanonicalDual => {
                let mu = self.read_measure(&inputs[0])?;
                let eta = self.read_measure(&inputs[1])?;
                let pair = c.canonical_dual(&mu, &eta)?;
                let json = to_json(&pair);
                certs.push((pair.sigma, eta.clone()));
                certs.push((pair.eps_hat, eta));
                json
            }
            Selection::CouplingDual => {
                let mu = self.read_measure(&inputs[0])?;
                let eta = self.read_measure(&inputs[1])?;
                let (gamma, source) =
                    self.coupling_or_default(opts.coupling.as_deref(), &mu, &eta)?;
                let mut pair = c.coupling_dual(&mu, &eta, &gamma)?;
                pair.eps = pair.eps.with_coupling_source(source.clone());
                pair.chi = pair.chi.with_coupling_source(source);
                let json = to_json(&pair);
                certs.push((pair.eps, eta.clone()));
                certs.push((pair.chi, eta));
                json
            }
        };

        let any_ok = certs.iter().any(|(cert, _)| cert.premise_ok);
        if validate {
            let reports: Vec<ValidationReport> = certs
                .iter()
                .filter(|(cert, _)| cert.premise_ok)
                .map(|(cert, perturbed)| c.validate(cert, perturbed))
                .collect::<Result<_, _>>()?;
            let all_pass = reports.iter().all(|r| r.verdict);
            if reports.is_empty() {
                write_or_print(out, &output)?;
            } else if reports.len() == 1 {
                write_or_print(out, &to_json(&reports[0]))?;
            } else {
                write_or_print(out, &to_json(&reports))?;
            }
            if !all_pass {
                return Ok(EXIT_VIOLATION);
            }
        } else {
            write_or_print(out, &output)?;
        }
        if !any_ok {
            return Ok(EXIT_PREMISE);
        }
        Ok(extra_code)
    }
}

struct CertifyOptions {
    coupling: Option<PathBuf>,
    gamma12: Option<PathBuf>,
    gamma23: Option<PathBuf>,
    r: Option<f64>,
    delta: Delta,
    lambda1: f64,
    lambda2: f64,
    falsify: Option<usize>,
    seed: u64,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt_sig12(std::f64::consts::FRAC_1_SQRT_2), "0.707106781187");
        assert_eq!(fmt_sig12(5.0), "5");
        assert_eq!(fmt_sig12(0.0), "0");
        assert_eq!(fmt_sig12(123456.789), "123456.789");
        assert_eq!(fmt_sig12(1.5e-7), "1.5e-7");
        assert_eq!(fmt_sig12(2.0e13), "2e13");
    }

    #[test]
    fn ranges() {
        assert_eq!(parse_range("2-6", "d").ok(), Some(2..=6));
        assert_eq!(parse_range("3", "d").ok(), Some(3..=3));
        assert!(parse_range("6-2", "d").is_err());
        assert!(parse_range("0-2", "d").is_err());
    }

    #[test]
    fn theorem_aliases() {
        assert_eq!(
            select_theorem("w2").ok(),
            Some(Selection::Single(Theorem::W2Openness))
        );
        assert_eq!(
            select_theorem("coupling-dual").ok(),
            Some(Selection::CouplingDual)
        );
        assert_eq!(
            select_theorem("Sweetie_Coupling").ok(),
            Some(Selection::Single(Theorem::SweetieCoupling))
        );
        assert!(select_theorem("bogus").is_err());
    }
}
