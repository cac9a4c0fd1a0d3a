//! Finitely supported probability measures on R^n.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, SymMatrix};

/// Masses may be off from summing to one by this much (relative) and still be
/// renormalized silently.
pub const NORMALIZATION_SLACK: f64 = 1e-6;

/// A finitely supported probability measure: ordered atoms `(x_i, m_i)`.
///
/// Atoms are a multiset. Equal points are never merged, since index-aligned
/// structures (couplings, paired measures) refer to atoms by position.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    points: Vec<Vec<f64>>,
    masses: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure, rescaling masses to sum to exactly one.
    ///
    /// Masses whose sum is more than `1e-6` (relative) away from one are
    /// rejected with [`Error::NotNormalized`]; see [`Self::new_normalized`].
    pub fn new(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        Self::build(points, masses, false)
    }

    /// Like [`Self::new`] but rescales any positive masses to sum to one.
    pub fn new_normalized(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<Self> {
        Self::build(points, masses, true)
    }

    /// Uniform masses on the given points.
    pub fn uniform(points: Vec<Vec<f64>>) -> Result<Self> {
        let k = points.len();
        Self::build(points, vec![1.0; k], true)
    }

    pub fn dirac(point: Vec<f64>) -> Result<Self> {
        Self::new(vec![point], vec![1.0])
    }

    fn build(points: Vec<Vec<f64>>, masses: Vec<f64>, force: bool) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::EmptySupport);
        }
        if points.len() != masses.len() {
            return Err(Error::LengthMismatch {
                expected: points.len(),
                found: masses.len(),
            });
        }
        let dim = points[0].len();
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "points must have positive dimension".into(),
            ));
        }
        for p in &points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: p.len(),
                });
            }
            if p.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite { what: "point" });
            }
        }
        for (index, &mass) in masses.iter().enumerate() {
            if !mass.is_finite() {
                return Err(Error::NonFinite { what: "mass" });
            }
            if mass <= 0.0 {
                return Err(Error::NonpositiveMass { index, mass });
            }
        }
        let sum: f64 = masses.iter().sum();
        if !force && (sum - 1.0).abs() > NORMALIZATION_SLACK {
            return Err(Error::NotNormalized { sum });
        }
        let masses = masses.into_iter().map(|m| m / sum).collect();
        Ok(Self {
            dim,
            points,
            masses,
        })
    }

    /// Internal constructor for atoms already known to be valid.
    pub(crate) fn from_parts_unchecked(
        dim: usize,
        points: Vec<Vec<f64>>,
        masses: Vec<f64>,
    ) -> Self {
        debug_assert!(points.iter().all(|p| p.len() == dim));
        Self {
            dim,
            points,
            masses,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Vec<f64>] {
        &self.points
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.points[i]
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    pub fn atoms(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points
            .iter()
            .map(Vec::as_slice)
            .zip(self.masses.iter().copied())
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `M_2 = sum m_i |x_i|^2`.
    pub fn second_moment(&self) -> f64 {
        self.atoms().map(|(x, m)| m * linalg::dot(x, x)).sum()
    }

    /// Same atoms and masses within `tol` (entrywise absolute).
    pub fn approx_eq(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        self.dim == other.dim
            && self.len() == other.len()
            && self
                .masses
                .iter()
                .zip(&other.masses)
                .all(|(a, b)| (a - b).abs() <= tol)
            && self
                .points
                .iter()
                .zip(&other.points)
                .all(|(p, q)| p.iter().zip(q).all(|(a, b)| (a - b).abs() <= tol))
    }

    /// Hex SHA-256 over the dimension and the exact bit patterns of all atoms.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        self.hash_into(&mut h);
        hex::encode(h.finalize())
    }

    pub(crate) fn hash_into(&self, h: &mut Sha256) {
        h.update((self.dim as u64).to_le_bytes());
        h.update((self.len() as u64).to_le_bytes());
        for (x, m) in self.atoms() {
            for v in x {
                h.update(v.to_bits().to_le_bytes());
            }
            h.update(m.to_bits().to_le_bytes());
        }
    }

    pub fn to_file(&self) -> MeasureFile {
        MeasureFile {
            dim: self.dim,
            points: self.points.clone(),
            masses: Some(self.masses.clone()),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file()).expect("measure serializes")
    }
}

/// JSON schema of a measure file: `{"dim": n, "points": [[...], ...], "masses": [...]}`.
/// `masses` may be omitted, meaning uniform.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MeasureFile {
    pub dim: usize,
    pub points: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub masses: Option<Vec<f64>>,
}

impl MeasureFile {
    pub fn into_measure(self, force_normalize: bool) -> Result<DiscreteMeasure> {
        let k = self.points.len();
        if let Some(p) = self.points.iter().find(|p| p.len() != self.dim) {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.len(),
            });
        }
        match self.masses {
            Some(m) => DiscreteMeasure::build(self.points, m, force_normalize),
            None => DiscreteMeasure::build(self.points, vec![1.0 / k as f64; k], force_normalize),
        }
    }
}

impl Serialize for DiscreteMeasure {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_file().serialize(s)
    }
}

impl<'de> Deserialize<'de> for DiscreteMeasure {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        MeasureFile::deserialize(d)?
            .into_measure(false)
            .map_err(serde::de::Error::custom)
    }
}

/// A linear map `R^dim_in -> R^dim_out` given by its matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearMap {
    matrix: Matrix,
}

impl LinearMap {
    pub fn new(matrix: Matrix) -> Result<Self> {
        if !matrix.is_finite() {
            return Err(Error::NonFinite { what: "linear map" });
        }
        Ok(Self { matrix })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            matrix: Matrix::identity(n),
        }
    }

    pub fn scaling(n: usize, c: f64) -> Self {
        Self {
            matrix: Matrix::identity(n).scale(c),
        }
    }

    pub fn dim_in(&self) -> usize {
        self.matrix.cols()
    }

    pub fn dim_out(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &Matrix {
        &self.matrix
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.matrix.mul_vec(x)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &LinearMap) -> Result<LinearMap> {
        Ok(LinearMap {
            matrix: self.matrix.matmul(&inner.matrix)?,
        })
    }
}

impl From<SymMatrix> for LinearMap {
    fn from(s: SymMatrix) -> Self {
        LinearMap {
            matrix: s.into_matrix(),
        }
    }
}

/// Builds a measure from points and masses; see [`DiscreteMeasure::new`].
pub fn make_measure(points: Vec<Vec<f64>>, masses: Vec<f64>) -> Result<DiscreteMeasure> {
    DiscreteMeasure::new(points, masses)
}

pub fn second_moment(mu: &DiscreteMeasure) -> f64 {
    mu.second_moment()
}

/// Image measure `T_# mu`: atoms `(T x_i, m_i)`, no merging of coincident images.
pub fn pushforward(mu: &DiscreteMeasure, map: &LinearMap) -> Result<DiscreteMeasure> {
    if map.dim_in() != mu.dim() {
        return Err(Error::DimensionMismatch {
            expected: map.dim_in(),
            found: mu.dim(),
        });
    }
    let points = mu
        .points()
        .iter()
        .map(|x| map.apply(x))
        .collect::<Result<Vec<_>>>()?;
    Ok(DiscreteMeasure::from_parts_unchecked(
        map.dim_out(),
        points,
        mu.masses().to_vec(),
    ))
}

/// Numerical rank of the support: singular values of the point matrix above
/// `tol * sigma_max`.
pub fn support_span_dim(mu: &DiscreteMeasure, tol: f64) -> usize {
    if mu.is_empty() {
        return 0;
    }
    let x = Matrix::from_rows(mu.points()).expect("points share one dimension");
    let sigmas = linalg::singular_values(&x);
    let sigma_max = sigmas.first().copied().unwrap_or(0.0);
    if sigma_max == 0.0 {
        return 0;
    }
    sigmas.iter().filter(|&&s| s > tol * sigma_max).count()
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn basis(n: usize) -> DiscreteMeasure {
        let pts = (0..n)
            .map(|i| {
                let mut e = vec![0.0; n];
                e[i] = 1.0;
                e
            })
            .collect();
        DiscreteMeasure::uniform(pts).unwrap()
    }

    pub fn mercedes() -> DiscreteMeasure {
        let h = 3f64.sqrt() / 2.0;
        DiscreteMeasure::uniform(vec![vec![1.0, 0.0], vec![-0.5, h], vec![-0.5, -h]]).unwrap()
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_point_basis_measure() {
        let mu = make_measure(vec![vec![1.0, 0.0], vec![0.0, 1.0]], vec![0.5, 0.5]).unwrap();
        assert_eq!(mu.second_moment(), 1.0);
    }

    #[test]
    fn forced_normalization_of_single_atom() {
        assert!(matches!(
            make_measure(vec![vec![1.0, 0.0]], vec![2.0]),
            Err(Error::NotNormalized { .. })
        ));
        let mu = DiscreteMeasure::new_normalized(vec![vec![1.0, 0.0]], vec![2.0]).unwrap();
        assert_eq!(mu.masses(), &[1.0]);
    }

    #[test]
    fn zero_mass_rejected() {
        assert_eq!(
            make_measure(vec![vec![1.0, 0.0]], vec![0.0]),
            Err(Error::NonpositiveMass {
                index: 0,
                mass: 0.0
            })
        );
    }

    #[test]
    fn construction_errors() {
        assert_eq!(make_measure(vec![], vec![]), Err(Error::EmptySupport));
        assert!(matches!(
            make_measure(vec![vec![1.0], vec![1.0, 2.0]], vec![0.5, 0.5]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn small_mass_error_is_renormalized() {
        let mu = make_measure(vec![vec![1.0], vec![2.0]], vec![0.5, 0.5 + 1e-9]).unwrap();
        assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(basis(4).second_moment(), 1.0);
        assert_eq!(
            DiscreteMeasure::dirac(vec![0.0, 0.0])
                .unwrap()
                .second_moment(),
            0.0
        );
        // (1/3)(1 + (1/4 + 3/4) + (1/4 + 3/4))
        assert!((mercedes().second_moment() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pushforward_examples() {
        let mu = mercedes();
        assert_eq!(pushforward(&mu, &LinearMap::identity(2)).unwrap(), mu);

        let zero = LinearMap::new(Matrix::zeros(3, 3)).unwrap();
        let img = pushforward(&basis(3), &zero).unwrap();
        assert_eq!(img.len(), 3);
        assert!(img.points().iter().all(|p| p == &vec![0.0; 3]));
        assert!(img.masses().iter().all(|&m| (m - 1.0 / 3.0).abs() < 1e-16));

        let wrong = LinearMap::identity(3);
        assert!(matches!(
            pushforward(&mu, &wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn span_dimension_examples() {
        assert_eq!(support_span_dim(&basis(5), 1e-10), 5);
        assert_eq!(
            support_span_dim(&DiscreteMeasure::dirac(vec![1.0, 0.0]).unwrap(), 1e-10),
            1
        );
        assert_eq!(support_span_dim(&mercedes(), 1e-10), 2);
        assert_eq!(
            support_span_dim(&DiscreteMeasure::dirac(vec![0.0, 0.0]).unwrap(), 1e-10),
            0
        );
    }

    #[test]
    fn json_round_trip_is_exact() {
        let mu = make_measure(
            vec![vec![0.1, 1.0 / 3.0], vec![-2.5e-17, 7.0]],
            vec![0.3, 0.7],
        )
        .unwrap();
        let text = mu.to_json();
        let back: DiscreteMeasure = serde_json::from_str(&text).unwrap();
        assert_eq!(back, mu);
    }

    #[test]
    fn json_masses_default_uniform() {
        let mu: DiscreteMeasure =
            serde_json::from_str(r#"{"dim": 1, "points": [[1.0], [2.0], [3.0]]}"#).unwrap();
        assert!(mu.masses().iter().all(|&m| (m - 1.0 / 3.0).abs() < 1e-16));
    }

    fn measure_strategy() -> impl Strategy<Value = DiscreteMeasure> {
        (1usize..5, 1usize..10).prop_flat_map(|(n, k)| {
            (
                prop::collection::vec(prop::collection::vec(-3.0f64..3.0, n), k),
                prop::collection::vec(0.01f64..1.0, k),
            )
                .prop_map(|(pts, ms)| DiscreteMeasure::new_normalized(pts, ms).unwrap())
        })
    }

    fn map_strategy(n: usize) -> impl Strategy<Value = LinearMap> {
        prop::collection::vec(-2.0f64..2.0, n * n).prop_map(move |d| {
            let rows: Vec<Vec<f64>> = d.chunks(n).map(<[f64]>::to_vec).collect();
            LinearMap::new(Matrix::from_rows(&rows).unwrap()).unwrap()
        })
    }

    proptest! {
        #[test]
        fn normalized_after_construction(mu in measure_strategy()) {
            prop_assert!((mu.total_mass() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn pushforward_composes(
            (mu, s, t) in measure_strategy().prop_flat_map(|mu| {
                let n = mu.dim();
                (Just(mu), map_strategy(n), map_strategy(n))
            })
        ) {
            let two_step = pushforward(&pushforward(&mu, &s).unwrap(), &t).unwrap();
            let one_step = pushforward(&mu, &t.compose(&s).unwrap()).unwrap();
            prop_assert!(two_step.approx_eq(&one_step, 1e-12));
            prop_assert!((two_step.total_mass() - 1.0).abs() <= 1e-12);
        }

        #[test]
        fn second_moment_scales_quadratically(mu in measure_strategy(), c in -5.0f64..5.0) {
            let scaled = pushforward(&mu, &LinearMap::scaling(mu.dim(), c)).unwrap();
            let expect = c * c * mu.second_moment();
            prop_assert!((scaled.second_moment() - expect).abs() <= 1e-10 * expect.abs().max(1e-300));
        }

        #[test]
        fn span_dim_permutation_invariant(mu in measure_strategy(), rot in 0usize..10) {
            let k = mu.len();
            let mut pts = mu.points().to_vec();
            let mut ms = mu.masses().to_vec();
            pts.rotate_left(rot % k);
            ms.rotate_left(rot % k);
            pts.reverse();
            ms.reverse();
            let permuted = DiscreteMeasure::new(pts, ms).unwrap();
            prop_assert_eq!(support_span_dim(&mu, 1e-10), support_span_dim(&permuted, 1e-10));
        }
    }
}
