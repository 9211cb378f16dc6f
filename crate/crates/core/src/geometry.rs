//! Configurations of unit vectors, Gram data, p-frame potentials, and the
//! CP¹ ↔ S² correspondence.
//!
//! A [`Configuration`] is an ordered tuple of `m` unit vectors in `F^n`
//! (`F` real or complex) stored as the rows of an `m × n` matrix. The inner
//! product is `⟨u, v⟩ = Σ_i u_i · conj(v_i)`, and the p-frame potential is
//! the pairwise sum `Σ_{i<j} |⟨v_i, v_j⟩|^p`.
//!
//! Complex dimension two has a special second life: a unit vector
//! `u = (z₁, z₂) ∈ C²` names a point of CP¹, and conjugating the quaternion
//! `q = z₁ + j·z₂` against `i` projects that point onto the unit sphere.
//! [`cp1_to_s2`] and [`s2_to_cp1`] implement the two directions; the pairwise
//! identity `|⟨u, v⟩|² = (1 + ⟨Su, Sv⟩)/2` ties sphere geometry to complex
//! coherences and is what makes the sphere constructions in
//! [`crate::constructions`] certify complex optima.

use num_complex::Complex;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::num::{cast, Scalar};

/// Norm tolerance for validating unit rows and sphere points (at double
/// precision; see [`unit_tol`] for other scalar widths).
pub const UNIT_TOL: f64 = 1e-12;

/// [`UNIT_TOL`] adapted to the scalar width: the documented `1e-12` for
/// doubles, widened to a few ulps for narrower types where normalization
/// itself cannot land that close to 1.
pub fn unit_tol<T: Scalar>() -> T {
    cast::<T>(UNIT_TOL).max(T::epsilon() * cast(16.0))
}

/// Scalar field a configuration lives over.
///
/// Real-field configurations are stored with zero imaginary parts so that a
/// single complex code path serves both; the tag gates validation, proposal
/// sampling, and serialization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FieldTag {
    #[serde(rename = "R")]
    Real,
    #[serde(rename = "C")]
    Complex,
}

impl FieldTag {
    pub fn is_real(self) -> bool {
        matches!(self, FieldTag::Real)
    }
}

impl std::fmt::Display for FieldTag {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            FieldTag::Real => "R",
            FieldTag::Complex => "C",
        })
    }
}

/// `m` unit vectors in `F^n`, the rows of an `m × n` matrix.
///
/// Invariants enforced on construction: `m, n ≥ 1`, every row has unit norm
/// within [`UNIT_TOL`], and real-field entries have exactly zero imaginary
/// part.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration<T: Scalar> {
    field: FieldTag,
    rows: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> Configuration<T> {
    pub fn new(field: FieldTag, rows: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if rows.is_empty() || rows[0].is_empty() {
            return Err(Error::bad_input("configuration needs m ≥ 1 rows and n ≥ 1 components"));
        }
        let n = rows[0].len();
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if field.is_real() {
                for (j, entry) in row.iter().enumerate() {
                    if entry.im != T::zero() {
                        return Err(Error::ImaginaryInRealField { row: i, col: j });
                    }
                }
            }
            let norm = norm(row);
            if (norm - T::one()).abs() > unit_tol::<T>() {
                return Err(Error::NonUnitRow {
                    row: i,
                    norm: norm.to_f64().unwrap_or(f64::NAN),
                    tol: unit_tol::<T>().to_f64().unwrap_or(UNIT_TOL),
                });
            }
        }
        Ok(Configuration { field, rows })
    }

    /// Builds a real-field configuration from real row entries.
    pub fn from_real(rows: Vec<Vec<T>>) -> Result<Self> {
        let rows = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| Complex::new(x, T::zero())).collect())
            .collect();
        Self::new(FieldTag::Real, rows)
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    /// Number of vectors.
    pub fn m(&self) -> usize {
        self.rows.len()
    }

    /// Ambient dimension.
    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<Complex<T>>] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> &[Complex<T>] {
        &self.rows[k]
    }

    /// Swaps in a replacement row that the caller has already normalized.
    pub(crate) fn replace_row(&mut self, k: usize, row: Vec<Complex<T>>) {
        debug_assert_eq!(row.len(), self.n());
        debug_assert!((norm(&row) - T::one()).abs() <= cast(1e-9));
        self.rows[k] = row;
    }

    pub fn potential(&self, p: T) -> T {
        potential(self, p)
    }

    pub fn gram(&self) -> GramSummary<T> {
        gram(self)
    }
}

/// Pairwise inner products of a configuration plus derived summary data.
#[derive(Debug, Clone)]
pub struct GramSummary<T: Scalar> {
    /// Full `m × m` Hermitian matrix of `⟨v_i, v_j⟩`.
    pub entries: Vec<Vec<Complex<T>>>,
    /// Moduli `|⟨v_i, v_j⟩|` for `i < j` in lexicographic pair order.
    pub offdiag_moduli: Vec<T>,
    /// Smallest pairwise modulus (zero when `m = 1`).
    pub coherence_min: T,
    /// Largest pairwise modulus (zero when `m = 1`).
    pub coherence_max: T,
    /// `(p, Σ_{i<j} |⟨v_i,v_j⟩|^p)` for the exponents requested at build time.
    pub potential_by_p: Vec<(T, T)>,
}

impl<T: Scalar> GramSummary<T> {
    /// Trace of the Gram matrix; equals `m` for valid configurations.
    pub fn trace(&self) -> T {
        self.entries.iter().enumerate().map(|(i, r)| r[i].re).sum()
    }

    /// Positive-semidefiniteness certificate via diagonally pivoted Cholesky.
    ///
    /// Runs the factorization with the largest remaining diagonal as pivot
    /// until that diagonal is no longer positive, then reports the smallest
    /// remaining diagonal entry: `0` when the factorization completes, a
    /// roundoff-sized negative for a genuine Gram matrix, and a decisively
    /// negative value for an indefinite one. A certificate ≥ −1e-9 at desk
    /// scale certifies PSD.
    pub fn psd_certificate(&self) -> T {
        let m = self.entries.len();
        let mut a = self.entries.clone();
        let mut active: Vec<usize> = (0..m).collect();
        while !active.is_empty() {
            let (pos, &piv) = active
                .iter()
                .enumerate()
                .max_by(|x, y| a[*x.1][*x.1].re.partial_cmp(&a[*y.1][*y.1].re).expect("finite"))
                .expect("nonempty");
            let d = a[piv][piv].re;
            if d <= T::zero() {
                break;
            }
            active.swap_remove(pos);
            // Schur complement of the pivot on the still-active block
            for xi in 0..active.len() {
                let i = active[xi];
                let ci = a[i][piv];
                for &j in &active[..=xi] {
                    let upd = ci * a[j][piv].conj() / d;
                    a[i][j] = a[i][j] - upd;
                    a[j][i] = a[i][j].conj();
                }
            }
        }
        active
            .iter()
            .map(|&i| a[i][i].re)
            .fold(T::zero(), T::min)
    }
}

/// `⟨u, v⟩ = Σ_i u_i · conj(v_i)`; conjugation is the identity on real data.
pub fn inner_product<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Result<Complex<T>> {
    if u.len() != v.len() {
        return Err(Error::DimensionMismatch { expected: u.len(), got: v.len() });
    }
    Ok(dot_conj(u, v))
}

#[inline]
pub(crate) fn dot_conj<T: Scalar>(u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
    let mut acc = Complex::new(T::zero(), T::zero());
    for (a, b) in u.iter().zip(v) {
        acc = acc + a * b.conj();
    }
    acc
}

pub(crate) fn norm_sq<T: Scalar>(v: &[Complex<T>]) -> T {
    v.iter().map(|z| z.norm_sqr()).sum()
}

fn norm<T: Scalar>(v: &[Complex<T>]) -> T {
    norm_sq(v).sqrt()
}

/// `v / ‖v‖`. Rejects inputs with norm below 1e-300 as degenerate.
pub fn normalize<T: Scalar>(v: &[Complex<T>]) -> Result<Vec<Complex<T>>> {
    let norm = norm(v);
    if norm <= cast(1e-300) {
        return Err(Error::ZeroNorm);
    }
    let inv = T::one() / norm;
    Ok(v.iter().map(|z| z.scale(inv)).collect())
}

/// `|z|^p` given `|z|²`, via `(|z|²)^{p/2}`.
///
/// Even integer exponents take the `powi` path so the common p = 2, 4, 6
/// cases cost a few multiplications and no transcendental call. Both the full
/// potential and the incremental delta go through here, so the two always
/// agree on the per-pair term.
#[inline]
pub(crate) fn modulus_pow<T: Scalar>(norm_sq: T, p: T) -> T {
    let half = p * cast(0.5);
    if half.fract() == T::zero() && half >= T::one() && half <= cast(32.0) {
        norm_sq.powi(half.to_i32().expect("small integral exponent"))
    } else {
        norm_sq.powf(half)
    }
}

/// p-frame potential `Σ_{i<j} |⟨v_i, v_j⟩|^p`, summed in lexicographic pair
/// order so results are bit-reproducible for a given input.
pub fn potential<T: Scalar>(config: &Configuration<T>, p: T) -> T {
    debug_assert!(p > T::zero());
    let rows = config.rows();
    let mut acc = T::zero();
    for i in 0..rows.len() {
        for j in (i + 1)..rows.len() {
            acc = acc + modulus_pow(dot_conj(&rows[i], &rows[j]).norm_sqr(), p);
        }
    }
    acc
}

/// Change in potential if row `k` were replaced by the unit vector `w`,
/// computed from the `m − 1` affected pairs only.
///
/// Agrees with a full recomputation within 1e-10 relative at desk scale; the
/// solver tracks its objective with this and periodically resynchronizes.
pub fn potential_delta<T: Scalar>(
    config: &Configuration<T>,
    p: T,
    k: usize,
    w: &[Complex<T>],
) -> Result<T> {
    let rows = config.rows();
    if k >= rows.len() {
        return Err(Error::BadIndex { index: k, bound: rows.len() });
    }
    if w.len() != config.n() {
        return Err(Error::DimensionMismatch { expected: config.n(), got: w.len() });
    }
    let mut acc = T::zero();
    for (i, row) in rows.iter().enumerate() {
        if i == k {
            continue;
        }
        acc = acc + modulus_pow(dot_conj(w, row).norm_sqr(), p)
            - modulus_pow(dot_conj(&rows[k], row).norm_sqr(), p);
    }
    Ok(acc)
}

/// Assembles the Gram matrix and its summary statistics.
pub fn gram<T: Scalar>(config: &Configuration<T>) -> GramSummary<T> {
    gram_with_potentials(config, &[])
}

/// Like [`gram`], additionally tabulating the potential at each requested
/// exponent (each entry computed exactly as [`potential`] would).
pub fn gram_with_potentials<T: Scalar>(config: &Configuration<T>, ps: &[T]) -> GramSummary<T> {
    let rows = config.rows();
    let m = rows.len();
    let mut entries = vec![vec![Complex::new(T::zero(), T::zero()); m]; m];
    let mut offdiag = Vec::with_capacity(m * (m - 1) / 2);
    for i in 0..m {
        entries[i][i] = Complex::new(norm_sq(&rows[i]), T::zero());
        for j in (i + 1)..m {
            let g = dot_conj(&rows[i], &rows[j]);
            entries[i][j] = g;
            entries[j][i] = g.conj();
            offdiag.push(g.norm());
        }
    }
    let coherence_min = offdiag.iter().copied().fold(T::infinity(), T::min);
    let coherence_max = offdiag.iter().copied().fold(T::zero(), T::max);
    GramSummary {
        entries,
        coherence_min: if offdiag.is_empty() { T::zero() } else { coherence_min },
        coherence_max,
        offdiag_moduli: offdiag,
        potential_by_p: ps.iter().map(|&p| (p, potential(config, p))).collect(),
    }
}

/// A point on the unit sphere S² ⊂ R³, coordinates `(y, z, w)`.
///
/// The first coordinate is the pole axis: [`cp1_to_s2`] sends `(1, 0)` to
/// `y = +1` and `(0, 1)` to `y = −1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct S2Point<T: Scalar> {
    pub y: T,
    pub z: T,
    pub w: T,
}

impl<T: Scalar> S2Point<T> {
    pub fn new(y: T, z: T, w: T) -> Result<Self> {
        let norm = (y * y + z * z + w * w).sqrt();
        if (norm - T::one()).abs() > unit_tol::<T>() {
            return Err(Error::NotUnit { norm: norm.to_f64().unwrap_or(f64::NAN) });
        }
        Ok(S2Point { y, z, w })
    }

    pub fn dot(&self, other: &Self) -> T {
        self.y * other.y + self.z * other.z + self.w * other.w
    }

    pub fn neg(&self) -> Self {
        S2Point { y: -self.y, z: -self.z, w: -self.w }
    }

    pub fn coords(&self) -> [T; 3] {
        [self.y, self.z, self.w]
    }
}

/// Projects a unit vector `u = (z₁, z₂) ∈ C²` to the sphere by conjugating
/// `i` with the quaternion `q = z₁ + j·z₂`:
///
/// ```text
/// S(u) = q·i·q⁻¹ = ( |z₁|² − |z₂|²,  2·Im(z₁·conj(z₂)),  −2·Re(z₁·conj(z₂)) )
/// ```
///
/// With coefficients placed to the right of `j`, unit complex scalars act on
/// `q` by right multiplication and commute with `i`, so the result is
/// invariant under `u ↦ e^{iθ}u` and depends only on the projective point.
pub fn cp1_to_s2<T: Scalar>(u: &[Complex<T>]) -> Result<S2Point<T>> {
    if u.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: u.len() });
    }
    let a = u[0].norm_sqr();
    let b = u[1].norm_sqr();
    let ns = a + b;
    let tol = cast::<T>(1e-9).max(T::epsilon() * cast(64.0));
    if (ns.sqrt() - T::one()).abs() > tol {
        return Err(Error::NotUnit { norm: ns.sqrt().to_f64().unwrap_or(f64::NAN) });
    }
    let x = u[0] * u[1].conj();
    let two = cast::<T>(2.0);
    Ok(S2Point {
        y: (a - b) / ns,
        z: two * x.im / ns,
        w: -two * x.re / ns,
    })
}

/// A right inverse of [`cp1_to_s2`]: for `s ≠ (−1,0,0)` returns the unit
/// quaternion `(i + s)/‖i + s‖` read in the `{1, j}` basis,
///
/// ```text
/// u = ( (1 + y)·i / N,  (z − w·i) / N ),   N = √(2(1 + y)),
/// ```
///
/// and `(0, 1)` at the antipode. Which phase representative comes back is a
/// section choice; downstream quantities are phase-invariant.
pub fn s2_to_cp1<T: Scalar>(s: &S2Point<T>) -> [Complex<T>; 2] {
    let one_plus = T::one() + s.y;
    if one_plus <= T::zero() {
        return [Complex::new(T::zero(), T::zero()), Complex::new(T::one(), T::zero())];
    }
    let nrm = (one_plus + one_plus).sqrt();
    [
        Complex::new(T::zero(), one_plus / nrm),
        Complex::new(s.z / nrm, -s.w / nrm),
    ]
}

// ─── serialization ───
//
// JSON layout: {"field": "R"|"C", "m": .., "n": .., "vectors": [...]} with
// complex entries as [re, im] pairs and real entries as bare numbers.
// serde_json prints shortest round-trip decimals, so finite doubles survive
// a write/read cycle bit-exactly.

#[derive(Serialize, Deserialize)]
struct RawConfiguration {
    field: FieldTag,
    m: usize,
    n: usize,
    vectors: Vec<Vec<RawEntry>>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawEntry {
    Real(f64),
    Complex([f64; 2]),
}

impl<T: Scalar> Serialize for Configuration<T> {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let to_f64 = |x: T| x.to_f64().expect("scalar convertible to f64");
        let vectors = self
            .rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|z| match self.field {
                        FieldTag::Real => RawEntry::Real(to_f64(z.re)),
                        FieldTag::Complex => RawEntry::Complex([to_f64(z.re), to_f64(z.im)]),
                    })
                    .collect()
            })
            .collect();
        RawConfiguration { field: self.field, m: self.m(), n: self.n(), vectors }
            .serialize(serializer)
    }
}

impl<'de, T: Scalar> Deserialize<'de> for Configuration<T> {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawConfiguration::deserialize(deserializer)?;
        let from = |x: f64| T::from_f64(x).ok_or_else(|| D::Error::custom("unrepresentable number"));
        let mut rows = Vec::with_capacity(raw.vectors.len());
        for row in &raw.vectors {
            let mut out = Vec::with_capacity(row.len());
            for entry in row {
                let z = match (entry, raw.field) {
                    (RawEntry::Real(x), FieldTag::Real) => Complex::new(from(*x)?, T::zero()),
                    (RawEntry::Complex([re, im]), FieldTag::Complex) => {
                        Complex::new(from(*re)?, from(*im)?)
                    }
                    (RawEntry::Real(_), FieldTag::Complex) => {
                        return Err(D::Error::custom("field C requires [re, im] entries"))
                    }
                    (RawEntry::Complex(_), FieldTag::Real) => {
                        return Err(D::Error::custom("field R forbids [re, im] entries"))
                    }
                };
                out.push(z);
            }
            rows.push(out);
        }
        let config = Configuration::new(raw.field, rows).map_err(D::Error::custom)?;
        if config.m() != raw.m || config.n() != raw.n {
            return Err(D::Error::custom(format!(
                "declared shape {}×{} does not match vectors {}×{}",
                raw.m,
                raw.n,
                config.m(),
                config.n()
            )));
        }
        Ok(config)
    }
}
