//! Exact minimizer builders: tight frames by row balancing, sphere
//! arrangements whose lifts certify the p = 4 and p = 6 plane optima, and
//! simplex complementation.
//!
//! The solver finds minima numerically; this module builds configurations
//! whose optimality is a finite calculation. Three mechanisms cover the
//! catalogued cases:
//!
//! * **Row balancing.** Any matrix can be hit with a product of real Givens
//!   rotations until every row has the same norm, without touching its
//!   column Gram ([`balance_rows`]). Applied to a stretched orthonormal
//!   block this yields unit-norm tight frames ([`tight_frame`]), the exact
//!   2-frame minimizers.
//! * **Sphere arrangements.** For vectors in C² the potential only sees
//!   sphere geometry through `|⟨u,v⟩|² = (1 + ⟨Su,Sv⟩)/2`. Arrangements with
//!   zero vector sum and column Gram `(m/3)I` ([`cosine_curve`],
//!   [`hadamard4`]) minimize the lifted 4-frame energy; antipodally
//!   symmetric ones with the same column property ([`antipodal_double`])
//!   kill the odd Gram power sums and minimize the lifted 6-frame energy.
//!   [`lift_to_cp1`] performs the lift.
//! * **Complementation.** Completing a scaled simplex to a unitary matrix
//!   and reading off the complementary block turns an `(m, n)` simplex into
//!   an `(m, m−n)` one ([`complete_simplex`]).

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    dot_conj, norm_sq, normalize, s2_to_cp1, unit_tol, Configuration, FieldTag, S2Point,
};
use crate::num::{cast, Scalar};

/// A dense `m × n` matrix over a tagged field; rows need not be unit.
///
/// This is the working type for balancing: a [`Configuration`] demands unit
/// rows, which is exactly the property balancing is used to produce.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixF<T: Scalar> {
    field: FieldTag,
    entries: Vec<Vec<Complex<T>>>,
}

impl<T: Scalar> MatrixF<T> {
    pub fn new(field: FieldTag, entries: Vec<Vec<Complex<T>>>) -> Result<Self> {
        if entries.is_empty() || entries[0].is_empty() {
            return Err(Error::bad_input("matrix needs m ≥ 1 rows and n ≥ 1 columns"));
        }
        let n = entries[0].len();
        for (i, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: row.len() });
            }
            if field.is_real() {
                for (j, z) in row.iter().enumerate() {
                    if z.im != T::zero() {
                        return Err(Error::ImaginaryInRealField { row: i, col: j });
                    }
                }
            }
        }
        Ok(MatrixF { field, entries })
    }

    pub fn from_real(rows: Vec<Vec<T>>) -> Result<Self> {
        let entries = rows
            .into_iter()
            .map(|r| r.into_iter().map(|x| Complex::new(x, T::zero())).collect())
            .collect();
        Self::new(FieldTag::Real, entries)
    }

    pub fn field(&self) -> FieldTag {
        self.field
    }

    pub fn m(&self) -> usize {
        self.entries.len()
    }

    pub fn n(&self) -> usize {
        self.entries[0].len()
    }

    pub fn entries(&self) -> &[Vec<Complex<T>>] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.entries[i]
    }

    /// Column Gram `W*W` (`n × n`, Hermitian).
    pub fn column_gram(&self) -> Vec<Vec<Complex<T>>> {
        let n = self.n();
        let mut g = vec![vec![Complex::new(T::zero(), T::zero()); n]; n];
        for row in &self.entries {
            for j in 0..n {
                for k in 0..n {
                    g[j][k] = g[j][k] + row[j].conj() * row[k];
                }
            }
        }
        g
    }

    pub fn row_norms_sq(&self) -> Vec<T> {
        self.entries.iter().map(|r| norm_sq(r)).collect()
    }

    /// Reinterprets the rows as a configuration; they must already be unit.
    pub fn into_configuration(self) -> Result<Configuration<T>> {
        Configuration::new(self.field, self.entries)
    }
}

/// Result of [`balance_rows`]: the balanced matrix and how many rotations
/// it took (at most `m − 1`, since every rotation pins one row exactly to
/// the target norm).
#[derive(Debug, Clone)]
pub struct BalancedRows<T: Scalar> {
    pub matrix: MatrixF<T>,
    pub rotations: usize,
}

/// Equalizes all row norms of `w` by left-multiplying with real Givens
/// rotations, preserving the column Gram `W*W` exactly.
///
/// Every squared row norm lands on `t = tr(WW*)/m` within `1e-12`. Each
/// iteration rotates the extreme pair of rows: with `a = ‖r_i‖²` maximal,
/// `b = ‖r_j‖²` minimal and `c = Re⟨r_i, r_j⟩`, the rotated first row has
/// squared norm
///
/// ```text
/// f(φ) = (a+b)/2 + ((a−b)/2)·cos 2φ + c·sin 2φ,
/// ```
///
/// a sinusoid whose amplitude is at least `|t − (a+b)/2|` because
/// `b ≤ t ≤ a`; solving `f(φ) = t` in closed form pins row `i` to the
/// target exactly, and a pinned row is never extreme again while any
/// unbalanced row remains. Real rotations suffice over the complex field
/// too, since only `Re⟨r_i, r_j⟩` enters the norm exchange.
pub fn balance_rows<T: Scalar>(w: &MatrixF<T>) -> Result<BalancedRows<T>> {
    let m = w.m();
    let mut rows = w.entries().to_vec();
    let total: T = rows.iter().map(|r| norm_sq(r)).sum();
    if total <= cast(1e-300) {
        return Err(Error::ZeroNorm);
    }
    let t = total / cast(m as f64);
    let eps = cast::<T>(1e-13) * t.max(T::one());
    let half = cast::<T>(0.5);

    let mut rotations = 0;
    for _ in 0..m {
        let norms: Vec<T> = rows.iter().map(|r| norm_sq(r)).collect();
        let i = (0..m).max_by(|&x, &y| norms[x].partial_cmp(&norms[y]).expect("finite")).unwrap();
        let j = (0..m).min_by(|&x, &y| norms[x].partial_cmp(&norms[y]).expect("finite")).unwrap();
        let (a, b) = (norms[i], norms[j]);
        if a <= t + eps && b >= t - eps {
            break;
        }
        let c = dot_conj(&rows[i], &rows[j]).re;
        let half_diff = (a - b) * half;
        let amp = (half_diff * half_diff + c * c).sqrt();
        if amp <= T::zero() {
            break;
        }
        let ratio = ((t - (a + b) * half) / amp).min(T::one()).max(-T::one());
        let phi = (c.atan2(half_diff) + ratio.acos()) * half;
        let (cos, sin) = (phi.cos(), phi.sin());
        for l in 0..rows[i].len() {
            let (ri, rj) = (rows[i][l], rows[j][l]);
            rows[i][l] = ri.scale(cos) + rj.scale(sin);
            rows[j][l] = rj.scale(cos) - ri.scale(sin);
        }
        rotations += 1;
    }
    debug_assert!(rows
        .iter()
        .all(|r| (norm_sq(r) - t).abs() <= cast::<T>(1e-12) * t.max(T::one())));

    Ok(BalancedRows { matrix: MatrixF { field: w.field(), entries: rows }, rotations })
}

/// Builds a unit-norm tight frame of `m` vectors in `F^n`: column Gram
/// `(m/n)·I`, hence 2-frame energy exactly `m(m−n)/(2n)`, the global
/// minimum. Construction: stretch an orthonormal block to `√(m/n)·[Iₙ; 0]`
/// and balance its rows.
pub fn tight_frame<T: Scalar>(m: usize, n: usize, field: FieldTag) -> Result<Configuration<T>> {
    if n < 1 || m < n {
        return Err(Error::bad_input(format!(
            "tight frame needs m ≥ n ≥ 1, got m={m} n={n} (for m < n use an orthonormal subset)"
        )));
    }
    let scale = cast::<T>(m as f64 / n as f64).sqrt();
    let mut entries = vec![vec![Complex::new(T::zero(), T::zero()); n]; m];
    for (i, row) in entries.iter_mut().enumerate().take(n) {
        row[i] = Complex::new(scale, T::zero());
    }
    let balanced = balance_rows(&MatrixF { field, entries })?;
    let rows = balanced
        .matrix
        .entries
        .into_iter()
        .map(|r| normalize(&r))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(field, rows)
}

/// `m` points on the unit sphere S² ⊂ R³.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct RealS2Config<T: Scalar> {
    points: Vec<S2Point<T>>,
}

impl<T: Scalar> RealS2Config<T> {
    pub fn new(points: Vec<S2Point<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::bad_input("need at least one sphere point"));
        }
        for p in &points {
            let norm = (p.y * p.y + p.z * p.z + p.w * p.w).sqrt();
            if (norm - T::one()).abs() > unit_tol::<T>() {
                return Err(Error::NotUnit { norm: norm.to_f64().unwrap_or(f64::NAN) });
            }
        }
        Ok(RealS2Config { points })
    }

    /// Reads a real 3-column configuration's rows as sphere points.
    pub fn from_unit_rows(config: &Configuration<T>) -> Result<Self> {
        if config.field() != FieldTag::Real || config.n() != 3 {
            return Err(Error::bad_input("need a real configuration with n = 3"));
        }
        let points = config
            .rows()
            .iter()
            .map(|r| S2Point::new(r[0].re, r[1].re, r[2].re))
            .collect::<Result<Vec<_>>>()?;
        Ok(RealS2Config { points })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[S2Point<T>] {
        &self.points
    }

    /// Componentwise sum of the points.
    pub fn sum(&self) -> [T; 3] {
        let mut s = [T::zero(); 3];
        for p in &self.points {
            let c = p.coords();
            for (acc, x) in s.iter_mut().zip(c) {
                *acc = *acc + x;
            }
        }
        s
    }

    /// Column Gram of the `m × 3` coordinate matrix.
    pub fn column_gram(&self) -> [[T; 3]; 3] {
        let mut g = [[T::zero(); 3]; 3];
        for p in &self.points {
            let c = p.coords();
            for j in 0..3 {
                for k in 0..3 {
                    g[j][k] = g[j][k] + c[j] * c[k];
                }
            }
        }
        g
    }

    /// Full double sum `Σ_{i,j} ⟨v_i, v_j⟩^power` over all ordered pairs,
    /// diagonal included.
    pub fn gram_power_sum(&self, power: u32) -> T {
        let mut acc = T::zero();
        for a in &self.points {
            for b in &self.points {
                acc = acc + a.dot(b).powi(power as i32);
            }
        }
        acc
    }
}

fn check_seed_matrix<T: Scalar>(w: &RealS2Config<T>, what: &str) -> Result<()> {
    let r = w.len();
    let target = cast::<T>(r as f64 / 3.0);
    let g = w.column_gram();
    for (j, grow) in g.iter().enumerate() {
        for (k, &x) in grow.iter().enumerate() {
            let want = if j == k { target } else { T::zero() };
            if (x - want).abs() > cast(1e-9) {
                return Err(Error::bad_input(format!(
                    "{what}: column Gram entry ({j},{k}) = {x} is not {want} within 1e-9"
                )));
            }
        }
    }
    Ok(())
}

/// Arranges `m ≥ 6` points on two circles of constant latitude so that the
/// vector sum is zero and the column Gram is exactly `(m/3)·I`; its lift
/// under [`lift_to_cp1`] therefore attains the minimal 4-frame energy
/// `m(m−3)/6` in C².
///
/// Split `m = n₁ + n₂` with `n₁ = ⌊m/2⌋`, and place regular polygons at
/// latitudes `y₁ = √(n₂/(3n₁))` and `y₂ = −√(n₁/(3n₂))` (the second offset
/// by half a step, giving an antiprism for even `m`). Then
///
/// * `Σ y = n₁y₁ + n₂y₂ = √(n₁n₂/3) − √(n₁n₂/3) = 0`, and polygon sums kill
///   the other two coordinates;
/// * the `y`-column norm is `n₁y₁² + n₂y₂² = m/3`, the two circle columns
///   share `(n₁(1−y₁²) + n₂(1−y₂²))/2 = m/3` each, and all frequency-1 and
///   frequency-2 circle sums vanish because `n₁, n₂ ≥ 3`.
///
/// Both circles need at least a triangle, hence `m ≥ 6`.
pub fn cosine_curve<T: Scalar>(m: usize) -> Result<RealS2Config<T>> {
    if m < 6 {
        return Err(Error::bad_input(format!("need m ≥ 6 to balance two polygons, got {m}")));
    }
    let n1 = m / 2;
    let n2 = m - n1;
    let y1 = cast::<T>(n2 as f64 / (3.0 * n1 as f64)).sqrt();
    let y2 = -cast::<T>(n1 as f64 / (3.0 * n2 as f64)).sqrt();
    let mut points = Vec::with_capacity(m);
    for (count, latitude, offset) in [(n1, y1, 0.0), (n2, y2, 1.0)] {
        let radius = (T::one() - latitude * latitude).sqrt();
        for k in 0..count {
            let angle = cast::<T>((2.0 * k as f64 + offset) * std::f64::consts::PI / count as f64);
            points.push(S2Point {
                y: latitude,
                z: radius * angle.cos(),
                w: radius * angle.sin(),
            });
        }
    }
    RealS2Config::new(points)
}

/// The regular tetrahedron: rows are the last three columns of the
/// Sylvester 4×4 sign matrix (first column all ones), scaled by `1/√3`.
/// Zero sum, column Gram `(4/3)·I`, all pairwise dots `−1/3`; its lift
/// attains the minimal 4-frame energy `2/3` for four vectors in C².
pub fn hadamard4<T: Scalar>() -> RealS2Config<T> {
    let s = T::one() / cast::<T>(3.0).sqrt();
    let signs: [[f64; 3]; 4] =
        [[1.0, 1.0, 1.0], [-1.0, 1.0, -1.0], [1.0, -1.0, -1.0], [-1.0, -1.0, 1.0]];
    let points = signs
        .iter()
        .map(|row| S2Point { y: s * cast(row[0]), z: s * cast(row[1]), w: s * cast(row[2]) })
        .collect();
    RealS2Config { points }
}

/// Doubles a seed arrangement antipodally: the output is the `r` seed
/// points followed by their negatives.
///
/// The seed must have `r ≥ 3` unit rows and column Gram `(r/3)·I` within
/// `1e-9`. Pairing every point with its negative makes all odd Gram power
/// sums vanish exactly, and together with the column property the lift
/// attains the minimal 6-frame energy `m(m−4)/8` at `m = 2r`.
pub fn antipodal_double<T: Scalar>(w: &RealS2Config<T>) -> Result<RealS2Config<T>> {
    if w.len() < 3 {
        return Err(Error::bad_input(format!("need r ≥ 3 seed points, got {}", w.len())));
    }
    check_seed_matrix(w, "antipodal_double")?;
    let mut points = w.points().to_vec();
    points.extend(w.points().iter().map(S2Point::neg));
    RealS2Config::new(points)
}

/// Builds the standard doubling seed for [`antipodal_double`] at size `r`:
/// the two-circle arrangement for `r ≥ 6`, and a balanced tight frame in R³
/// for `r ∈ {3, 4, 5}` (the doubling argument only needs unit rows with
/// column Gram `(r/3)·I`, not zero sum).
pub fn doubling_seed<T: Scalar>(r: usize) -> Result<RealS2Config<T>> {
    match r {
        0..=2 => Err(Error::bad_input(format!("need r ≥ 3, got {r}"))),
        3..=5 => RealS2Config::from_unit_rows(&tight_frame(r, 3, FieldTag::Real)?),
        _ => cosine_curve(r),
    }
}

/// Lifts sphere points to unit vectors in C² (one preimage per point, the
/// section chosen by [`s2_to_cp1`]). Pairwise, the lift `u_i` of `v_i`
/// satisfies `|⟨u_i, u_j⟩|² = (1 + ⟨v_i, v_j⟩)/2`, which converts sphere
/// Gram identities into complex coherence identities.
pub fn lift_to_cp1<T: Scalar>(config: &RealS2Config<T>) -> Result<Configuration<T>> {
    let rows = config
        .points()
        .iter()
        .map(|p| normalize(&s2_to_cp1(p)))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(FieldTag::Complex, rows)
}

/// Completes a simplex (equal pairwise coherence, tight columns) at `(m, n)`
/// to an `m × m` unitary and returns the complementary block: a simplex at
/// `(m, m−n)` with squared coherence `n/((m−n)(m−1))`.
///
/// The input must satisfy `V*V = (m/n)·I` within `1e-8` and have constant
/// off-diagonal coherence within `1e-8`. The complement block's row Gram is
/// independent of how the orthocomplement basis is chosen, so the fixed
/// deterministic completion below (Gram–Schmidt over standard basis
/// vectors, largest residual first) is canonical enough for testing.
pub fn complete_simplex<T: Scalar>(v: &Configuration<T>) -> Result<Configuration<T>> {
    let (m, n) = (v.m(), v.n());
    if m <= n {
        return Err(Error::bad_input(format!(
            "complement of an (m,n)=({m},{n}) simplex is empty; need m > n"
        )));
    }
    let tol = cast::<T>(1e-8);

    // tightness: V*V = (m/n)·I
    let ratio = cast::<T>(m as f64 / n as f64);
    for j in 0..n {
        for k in 0..n {
            let mut acc = Complex::new(T::zero(), T::zero());
            for row in v.rows() {
                acc = acc + row[j].conj() * row[k];
            }
            let want = if j == k { ratio } else { T::zero() };
            if (acc - Complex::new(want, T::zero())).norm() > tol {
                return Err(Error::bad_input(
                    "input is not a tight frame within 1e-8; cannot complete",
                ));
            }
        }
    }
    // equiangularity: constant off-diagonal coherence
    let moduli = crate::geometry::gram(v).offdiag_moduli;
    let mean = moduli.iter().copied().sum::<T>() / cast(moduli.len() as f64);
    if moduli.iter().any(|&x| (x - mean).abs() > tol) {
        return Err(Error::bad_input(
            "input coherences are not constant within 1e-8; not a simplex",
        ));
    }

    // orthonormalize the scaled columns √(n/m)·V, then extend the basis
    let zero = Complex::new(T::zero(), T::zero());
    let col_scale = (T::one() / ratio).sqrt();
    let mut basis: Vec<Vec<Complex<T>>> = Vec::with_capacity(m);
    for j in 0..n {
        let col: Vec<Complex<T>> = v.rows().iter().map(|r| r[j].scale(col_scale)).collect();
        basis.push(mgs_insert(&basis, col)?);
    }
    for _ in n..m {
        let mut best: Option<(T, Vec<Complex<T>>)> = None;
        for i in 0..m {
            let mut e = vec![zero; m];
            e[i] = Complex::new(T::one(), T::zero());
            let r = project_out(&basis, e);
            let ns = norm_sq(&r);
            if best.as_ref().is_none_or(|(b, _)| ns > *b) {
                best = Some((ns, r));
            }
        }
        let (_, residual) = best.expect("m ≥ 1 candidates");
        basis.push(mgs_insert(&basis, residual)?);
    }

    // complement rows: coordinates of each row index against the new columns
    let rows = (0..m)
        .map(|i| normalize(&basis[n..].iter().map(|col| col[i]).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    Configuration::new(v.field(), rows)
}

/// Removes the components of `v` along each (orthonormal) basis vector.
fn project_out<T: Scalar>(basis: &[Vec<Complex<T>>], mut v: Vec<Complex<T>>) -> Vec<Complex<T>> {
    for q in basis {
        let coeff = dot_conj(&v, q);
        for (x, qk) in v.iter_mut().zip(q) {
            *x = *x - coeff * qk;
        }
    }
    v
}

/// Orthogonalizes `v` against `basis` (twice, which suffices in doubles)
/// and normalizes it.
fn mgs_insert<T: Scalar>(basis: &[Vec<Complex<T>>], v: Vec<Complex<T>>) -> Result<Vec<Complex<T>>> {
    let once = project_out(basis, v);
    let twice = project_out(basis, once);
    normalize(&twice).map_err(|_| {
        Error::bad_input("completion failed: input columns are rank deficient")
    })
}
