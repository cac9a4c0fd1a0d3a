//! Frame operators, optimal frame bounds, canonical dual and Parseval frames,
//! and the synthesis/analysis operators on paired measures.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{self, EigenDecomposition, Matrix, SymMatrix, DEFAULT_SINGULAR_TOL};
use crate::measure::{pushforward, DiscreteMeasure, LinearMap};
use crate::transport::{map_coupling, Coupling};

/// Relative tolerance for calling a frame tight: `B - A <= 1e-9 * B`.
pub const TIGHT_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    NotFrame,
    Frame,
    Tight,
    Parseval,
}

impl Classification {
    pub fn is_frame(self) -> bool {
        self != Classification::NotFrame
    }
}

/// Frame operator with its optimal bounds `A = lambda_min`, `B = lambda_max`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameCertificate {
    #[serde(rename = "S")]
    pub frame_operator: SymMatrix,
    #[serde(rename = "A")]
    pub lower: f64,
    #[serde(rename = "B")]
    pub upper: f64,
    #[serde(rename = "M2")]
    pub m2: f64,
    #[serde(rename = "class")]
    pub classification: Classification,
}

impl FrameCertificate {
    pub fn is_frame(&self) -> bool {
        self.classification.is_frame()
    }
}

/// `S = sum m_i x_i x_i^T`.
pub fn frame_operator(mu: &DiscreteMeasure) -> SymMatrix {
    let n = mu.dim();
    let mut s = Matrix::zeros(n, n);
    for (x, m) in mu.atoms() {
        s.add_outer(m, x, x);
    }
    SymMatrix::new(s).expect("frame operator of a valid measure is finite")
}

pub fn frame_bounds(mu: &DiscreteMeasure) -> FrameCertificate {
    frame_bounds_with_tol(mu, DEFAULT_SINGULAR_TOL)
}

/// Frame bounds with a custom relative singularity tolerance.
pub fn frame_bounds_with_tol(mu: &DiscreteMeasure, rel_tol: f64) -> FrameCertificate {
    analyze(mu, rel_tol).0
}

fn analyze(mu: &DiscreteMeasure, rel_tol: f64) -> (FrameCertificate, EigenDecomposition) {
    let s = frame_operator(mu);
    let eig = linalg::eigh(&s).expect("jacobi converges on frame operators");
    let lower = eig.min();
    let upper = eig.max();
    let tol = linalg::relative_tol(&eig, rel_tol);
    let classification = if lower <= tol {
        Classification::NotFrame
    } else if upper - lower <= TIGHT_TOL * upper {
        if (upper - 1.0).abs() <= TIGHT_TOL {
            Classification::Parseval
        } else {
            Classification::Tight
        }
    } else {
        Classification::Frame
    };
    let cert = FrameCertificate {
        m2: s.trace(),
        frame_operator: s,
        lower,
        upper,
        classification,
    };
    (cert, eig)
}

/// A measure known to be a frame, with `S^-1` and `S^-1/2` precomputed.
#[derive(Clone, Debug)]
pub struct Frame {
    pub certificate: FrameCertificate,
    pub inverse: SymMatrix,
    pub inverse_sqrt: SymMatrix,
}

impl Frame {
    pub fn new(mu: &DiscreteMeasure) -> Result<Self> {
        Self::with_tol(mu, DEFAULT_SINGULAR_TOL)
    }

    pub fn with_tol(mu: &DiscreteMeasure, rel_tol: f64) -> Result<Self> {
        let (certificate, eig) = analyze(mu, rel_tol);
        let tol = linalg::relative_tol(&eig, rel_tol);
        if !certificate.is_frame() {
            return Err(Error::NotAFrame {
                lower: certificate.lower,
                tol,
            });
        }
        let (inverse, inverse_sqrt) =
            linalg::inv_and_invsqrt_from(&certificate.frame_operator, &eig, tol)?;
        Ok(Self {
            certificate,
            inverse,
            inverse_sqrt,
        })
    }

    pub fn lower(&self) -> f64 {
        self.certificate.lower
    }

    pub fn upper(&self) -> f64 {
        self.certificate.upper
    }
}

/// Canonical dual `(S^-1)_# mu` together with the graph coupling `(Id x S^-1)_# mu`.
pub fn canonical_dual(mu: &DiscreteMeasure) -> Result<(DiscreteMeasure, Coupling)> {
    let frame = Frame::new(mu)?;
    let map = LinearMap::from(frame.inverse);
    let coupling = map_coupling(mu, &map)?;
    Ok((coupling.nu().clone(), coupling))
}

/// Canonical Parseval frame `(S^-1/2)_# mu`.
pub fn canonical_parseval(mu: &DiscreteMeasure) -> Result<DiscreteMeasure> {
    let frame = Frame::new(mu)?;
    pushforward(mu, &LinearMap::from(frame.inverse_sqrt))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReconstructionMode {
    /// `f = sum m_i <S^-1 f, x_i> x_i`
    Dual,
    /// `f = sum m_i <S^-1/2 f, x_i> S^-1/2 x_i`
    Parseval,
}

/// Norm of the error of reconstructing `f` from its frame coefficients.
pub fn reconstruction_residual(
    mu: &DiscreteMeasure,
    f: &[f64],
    mode: ReconstructionMode,
) -> Result<f64> {
    if f.len() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: mu.dim(),
            found: f.len(),
        });
    }
    let frame = Frame::new(mu)?;
    let mut rebuilt = vec![0.0; mu.dim()];
    match mode {
        ReconstructionMode::Dual => {
            let g = frame.inverse.mul_vec(f)?;
            for (x, m) in mu.atoms() {
                let c = m * linalg::dot(&g, x);
                rebuilt.iter_mut().zip(x).for_each(|(r, xi)| *r += c * xi);
            }
        }
        ReconstructionMode::Parseval => {
            let g = frame.inverse_sqrt.mul_vec(f)?;
            for (x, m) in mu.atoms() {
                let c = m * linalg::dot(&g, x);
                let y = frame.inverse_sqrt.mul_vec(x)?;
                rebuilt.iter_mut().zip(&y).for_each(|(r, yi)| *r += c * yi);
            }
        }
    }
    Ok(linalg::dist(f, &rebuilt))
}

/// Index-aligned atoms `(x_i, y_i, m_i)`: a coupling of its two marginals that
/// also fixes how a coefficient vector `w` acts on both measures.
#[derive(Clone, Debug, PartialEq)]
pub struct PairedMeasure {
    dim: usize,
    xs: Vec<Vec<f64>>,
    ys: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

/// JSON schema for a paired measure: `{"dim": n, "x": [[..]], "y": [[..]], "masses": [..]}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairedFile {
    pub dim: usize,
    pub x: Vec<Vec<f64>>,
    pub y: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl PairedMeasure {
    pub fn new(xs: Vec<Vec<f64>>, ys: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        if xs.len() != ys.len() {
            return Err(Error::LengthMismatch {
                expected: xs.len(),
                found: ys.len(),
            });
        }
        // Reuse the measure validation for both marginals.
        let mu = DiscreteMeasure::new(xs, masses)?;
        let nu = DiscreteMeasure::new(ys, mu.masses().to_vec())?;
        if mu.dim() != nu.dim() {
            return Err(Error::DimensionMismatch {
                expected: mu.dim(),
                found: nu.dim(),
            });
        }
        Ok(Self {
            dim: mu.dim(),
            masses: mu.masses().to_vec(),
            xs: mu.points().to_vec(),
            ys: nu.points().to_vec(),
        })
    }

    /// Pairs each atom of `mu` with its image under `f`.
    pub fn from_map(mu: &DiscreteMeasure, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<Self> {
        let ys = mu.points().iter().map(|x| f(x)).collect();
        Self::new(mu.points().to_vec(), ys, mu.masses().to_vec())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn xs(&self) -> &[Vec<f64>] {
        &self.xs
    }

    pub fn ys(&self) -> &[Vec<f64>] {
        &self.ys
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn x_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::from_parts_unchecked(self.dim, self.xs.clone(), self.masses.clone())
    }

    pub fn y_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::from_parts_unchecked(self.dim, self.ys.clone(), self.masses.clone())
    }

    /// `||w||_{L^2(mu)} = sqrt(sum m_i w_i^2)`.
    pub fn l2_norm(&self, w: &[f64]) -> f64 {
        w.iter()
            .zip(&self.masses)
            .map(|(wi, m)| m * wi * wi)
            .sum::<f64>()
            .sqrt()
    }

    /// `(X - Y) diag(sqrt m)`, whose largest singular value is the exact
    /// Paley–Wiener constant for `lambda1 = lambda2 = 0`.
    pub fn weighted_displacement(&self) -> Matrix {
        let mut d = Matrix::zeros(self.dim, self.len());
        for (j, ((x, y), m)) in self.xs.iter().zip(&self.ys).zip(&self.masses).enumerate() {
            let w = m.sqrt();
            for i in 0..self.dim {
                d[(i, j)] = (x[i] - y[i]) * w;
            }
        }
        d
    }

    pub fn to_file(&self) -> PairedFile {
        PairedFile {
            dim: self.dim,
            x: self.xs.clone(),
            y: self.ys.clone(),
            masses: Some(self.masses.clone()),
        }
    }

    pub(crate) fn hash_into(&self, h: &mut sha2::Sha256) {
        self.x_marginal().hash_into(h);
        self.y_marginal().hash_into(h);
    }
}

impl PairedFile {
    pub fn into_paired(self) -> Result<PairedMeasure> {
        let k = self.x.len();
        for p in self.x.iter().chain(&self.y) {
            if p.len() != self.dim {
                return Err(Error::DimensionMismatch {
                    expected: self.dim,
                    found: p.len(),
                });
            }
        }
        let masses = self.masses.unwrap_or_else(|| vec![1.0 / k as f64; k]);
        PairedMeasure::new(self.x, self.y, masses)
    }
}

fn weighted_sum(points: &[Vec<f64>], masses: &[f64], c: &[f64], dim: usize) -> Result<Vec<f64>> {
    if c.len() != masses.len() {
        return Err(Error::LengthMismatch {
            expected: masses.len(),
            found: c.len(),
        });
    }
    let mut out = vec![0.0; dim];
    for ((x, m), ci) in points.iter().zip(masses).zip(c) {
        let w = ci * m;
        out.iter_mut().zip(x).for_each(|(o, xi)| *o += w * xi);
    }
    Ok(out)
}

/// `U c = sum c_i m_i x_i`.
pub fn synthesis_u(p: &PairedMeasure, c: &[f64]) -> Result<Vec<f64>> {
    weighted_sum(&p.xs, &p.masses, c, p.dim)
}

/// `T c = sum c_i m_i y_i`.
pub fn synthesis_t(p: &PairedMeasure, c: &[f64]) -> Result<Vec<f64>> {
    weighted_sum(&p.ys, &p.masses, c, p.dim)
}

/// `(U^+ f)_i = <S^-1 f, x_i>`, a right inverse of [`synthesis_u`].
pub fn analysis_uplus(p: &PairedMeasure, f: &[f64]) -> Result<Vec<f64>> {
    if f.len() != p.dim {
        return Err(Error::DimensionMismatch {
            expected: p.dim,
            found: f.len(),
        });
    }
    let frame = Frame::new(&p.x_marginal())?;
    let g = frame.inverse.mul_vec(f)?;
    Ok(p.xs.iter().map(|x| linalg::dot(&g, x)).collect())
}

/// Smallest `delta` with `||U w - T w|| <= delta ||w||_{L^2(mu)}` for all `w`.
pub fn pw_delta_exact(p: &PairedMeasure) -> f64 {
    linalg::spectral_norm(&p.weighted_displacement())
}

/// Coefficient vector attaining [`pw_delta_exact`], normalized to unit
/// `L^2(mu)` norm.
pub fn pw_extremal_coefficients(p: &PairedMeasure) -> (f64, Vec<f64>) {
    let (sigma, v) = linalg::top_right_singular(&p.weighted_displacement());
    let w = v
        .iter()
        .zip(&p.masses)
        .map(|(vi, m)| vi / m.sqrt())
        .collect();
    (sigma, w)
}
