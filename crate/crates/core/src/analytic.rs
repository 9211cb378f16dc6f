//! Exact closed-form oracles for minimal p-frame energies, simplex coherence
//! values, equidistribution moments, asymptotic leading coefficients, and
//! second-difference diagnostics.
//!
//! Everything here is exact rational arithmetic on 64-bit numerators and
//! denominators with 128-bit intermediates; overflow raises [`Error::Overflow`]
//! rather than wrapping. Converting a [`ClosedFormValue`] to `f64` for
//! comparison against solver output is the only lossy step.
//!
//! Closed forms carry a `domain_ok` flag instead of refusing out-of-range
//! input: the formula's extrapolation outside its validity range is still
//! interesting data (for instance, whether the p = 6, n = 2 energies stay on
//! the rational curve below m = 6), it just must not be used as a
//! certification target.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::Rational64;
use num_traits::ToPrimitive;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::geometry::{Configuration, GramSummary};
use crate::num::Scalar;

/// Which closed form produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ClosedForm {
    /// Minimal 2-frame energy `m(m−n)/(2n)` for `m > n`, else 0.
    P2General,
    /// Minimal 4-frame energy in the plane, `m(m−3)/6`.
    P4N2,
    /// Minimal 6-frame energy in the plane, `m(m−4)/8`.
    P6N2,
    /// Squared simplex coherence `(m−n)/(n(m−1))`.
    SimplexCoherence,
    /// Simplex coordinate moment `k!(n−1)!/(n+k−1)!`.
    Moment,
    /// Quadratic leading coefficient of the energy in `m`.
    LeadingCoeff,
}

/// An exact rational value together with whether the producing theorem
/// actually covers the requested parameters.
///
/// Invariants: the denominator is positive, and potential-type sources are
/// nonnegative whenever `domain_ok` holds (out-of-domain extrapolations may
/// go negative, which is exactly why they are flagged).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ClosedFormValue {
    value: Rational64,
    pub domain_ok: bool,
    pub source: ClosedForm,
}

impl ClosedFormValue {
    fn new(value: Rational64, domain_ok: bool, source: ClosedForm) -> Self {
        debug_assert!(*value.denom() > 0);
        debug_assert!(
            !(domain_ok && *value.numer() < 0),
            "in-domain closed forms are nonnegative"
        );
        ClosedFormValue { value, domain_ok, source }
    }

    pub fn value(&self) -> Rational64 {
        self.value
    }

    pub fn numer(&self) -> i64 {
        *self.value.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.value.denom()
    }

    /// Nearest double; the only lossy conversion in this module.
    pub fn approx(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for ClosedFormValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if *self.value.denom() == 1 {
            write!(f, "{}", self.value.numer())
        } else {
            write!(f, "{}/{}", self.value.numer(), self.value.denom())
        }
    }
}

// JSON: value as a "num/den" string plus a convenience double approximation.
#[derive(Serialize, Deserialize)]
struct RawClosedForm {
    value: String,
    approx: f64,
    domain_ok: bool,
    source: ClosedForm,
}

impl Serialize for ClosedFormValue {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        RawClosedForm {
            value: self.to_string(),
            approx: self.approx(),
            domain_ok: self.domain_ok,
            source: self.source,
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for ClosedFormValue {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = RawClosedForm::deserialize(deserializer)?;
        let (num, den) = raw.value.split_once('/').unwrap_or((raw.value.as_str(), "1"));
        let num: i64 = num.trim().parse().map_err(D::Error::custom)?;
        let den: i64 = den.trim().parse().map_err(D::Error::custom)?;
        if den <= 0 {
            return Err(D::Error::custom("rational denominator must be positive"));
        }
        Ok(ClosedFormValue {
            value: Rational64::new(num, den),
            domain_ok: raw.domain_ok,
            source: raw.source,
        })
    }
}

fn gcd128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

/// Reduces `num/den` computed in 128-bit and narrows to 64-bit, raising on
/// overflow instead of wrapping.
fn reduce(num: i128, den: i128, what: &str) -> Result<Rational64> {
    debug_assert!(den != 0);
    let sign = if (num < 0) == (den < 0) || num == 0 { 1i128 } else { -1i128 };
    let (mut un, mut ud) = (num.unsigned_abs(), den.unsigned_abs());
    let g = gcd128(un, ud);
    if g > 1 {
        un /= g;
        ud /= g;
    }
    let num = i64::try_from(sign * un as i128)
        .map_err(|_| Error::Overflow(format!("{what}: numerator exceeds 64 bits")))?;
    let den = i64::try_from(ud)
        .map_err(|_| Error::Overflow(format!("{what}: denominator exceeds 64 bits")))?;
    Ok(Rational64::new_raw(num, den))
}

fn require_at_least(name: &str, value: i64, min: i64) -> Result<()> {
    if value < min {
        return Err(Error::bad_input(format!("{name} must be ≥ {min}, got {value}")));
    }
    Ok(())
}

/// Minimal 2-frame energy: `m(m−n)/(2n)` when `m > n`, and `0` when `m ≤ n`
/// (an orthonormal subset annihilates every pair term). Valid for all
/// `m, n ≥ 1`, so `domain_ok` is always true.
pub fn exact_p2(m: i64, n: i64) -> Result<ClosedFormValue> {
    require_at_least("m", m, 1)?;
    require_at_least("n", n, 1)?;
    let value = if m > n {
        reduce(m as i128 * (m - n) as i128, 2 * n as i128, "exact_p2")?
    } else {
        Rational64::new(0, 1)
    };
    Ok(ClosedFormValue::new(value, true, ClosedForm::P2General))
}

/// Minimal 4-frame energy in the plane: `m(m−3)/6`, proved for `m = 4` and
/// `m ≥ 6`. Outside that range the formula's extrapolation is returned with
/// `domain_ok = false` (except `m ≤ 2`, where the true value is 0).
pub fn exact_p4_n2(m: i64) -> Result<ClosedFormValue> {
    require_at_least("m", m, 1)?;
    let value = if m <= 2 {
        Rational64::new(0, 1)
    } else {
        reduce(m as i128 * (m - 3) as i128, 6, "exact_p4_n2")?
    };
    Ok(ClosedFormValue::new(value, m == 4 || m >= 6, ClosedForm::P4N2))
}

/// Minimal 6-frame energy in the plane: `m(m−4)/8`, proved for even `m ≥ 6`.
/// Elsewhere the raw extrapolation comes back with `domain_ok = false`; it is
/// negative for `m < 4`, which is legitimate data for studying how early the
/// true minima join the rational curve.
pub fn exact_p6_n2(m: i64) -> Result<ClosedFormValue> {
    require_at_least("m", m, 1)?;
    let value = reduce(m as i128 * (m - 4) as i128, 8, "exact_p6_n2")?;
    Ok(ClosedFormValue::new(value, m % 2 == 0 && m >= 6, ClosedForm::P6N2))
}

/// Squared pairwise coherence of the regular simplex of `m` unit vectors in
/// dimension `n`: `(m−n)/(n(m−1))`. Negative (hence flagged) when `m < n`.
pub fn simplex_coherence_sq(m: i64, n: i64) -> Result<ClosedFormValue> {
    require_at_least("m", m, 2)?;
    require_at_least("n", n, 1)?;
    let value = reduce((m - n) as i128, n as i128 * (m - 1) as i128, "simplex_coherence_sq")?;
    Ok(ClosedFormValue::new(value, m >= n, ClosedForm::SimplexCoherence))
}

/// k-th moment of the first barycentric coordinate under the flat measure on
/// the standard simplex in `n` parts: `k!(n−1)!/(n+k−1)! = 1/C(n+k−1, k)`.
///
/// `n = 1` is rejected: the simplex degenerates to a point and the moment
/// formula's derivation needs a genuine `(n−1)`-dimensional body.
pub fn equidistribution_moment(k: i64, n: i64) -> Result<ClosedFormValue> {
    require_at_least("k", k, 1)?;
    require_at_least("n", n, 2)?;
    // accumulate Π_{i=1..k} i/(n−1+i), reducing every step to stay in range
    let mut acc = Rational64::new(1, 1);
    for i in 1..=k {
        let num = *acc.numer() as i128 * i as i128;
        let den = *acc.denom() as i128 * (n - 1 + i) as i128;
        acc = reduce(num, den, "equidistribution_moment")?;
    }
    Ok(ClosedFormValue::new(acc, true, ClosedForm::Moment))
}

/// Leading coefficient of the minimal p-frame energy as a quadratic in `m`
/// for fixed dimension: with `k = p/2`, the pair sum over `i < j` grows like
/// `(E(t₁^k)/2)·m²`, so this returns [`equidistribution_moment`]`(k, n) / 2`.
///
/// For `n = 2` this reproduces the exact leading coefficients 1/4, 1/6, 1/8
/// of the p = 2, 4, 6 formulas, which is the consistency check pinned in the
/// tests below.
pub fn asymptotic_leading_coeff(p_even: i64, n: i64) -> Result<ClosedFormValue> {
    require_at_least("p", p_even, 2)?;
    if p_even % 2 != 0 {
        return Err(Error::bad_input(format!("p must be even, got {p_even}")));
    }
    let moment = equidistribution_moment(p_even / 2, n)?;
    let value = reduce(
        *moment.value().numer() as i128,
        *moment.value().denom() as i128 * 2,
        "asymptotic_leading_coeff",
    )?;
    Ok(ClosedFormValue::new(value, true, ClosedForm::LeadingCoeff))
}

/// Axis a second-difference stencil walks along.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    AlongM,
    AlongN,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::AlongM => "m",
            Axis::AlongN => "n",
        })
    }
}

/// One centered second difference, recorded at its `(m, n)` stencil center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffCell {
    pub m: i64,
    pub n: i64,
    pub d: f64,
}

/// Second differences `f(x+1) − 2f(x) + f(x−1)` of an energy table along one
/// axis, defined only at points where all three stencil cells exist.
///
/// For the exact 2-frame energies along `m` at fixed `n` the table is the
/// constant `1/n` once the stencil sits inside `m > n`, which is the
/// discrete signature of the quadratic growth law and what the sweep
/// diagnostics compare against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DifferenceTable {
    pub axis: Axis,
    /// Cells sorted by the varying coordinate.
    pub cells: Vec<DiffCell>,
}

impl DifferenceTable {
    pub fn get(&self, m: i64, n: i64) -> Option<f64> {
        self.cells.iter().find(|c| c.m == m && c.n == n).map(|c| c.d)
    }
}

/// Builds the centered second-difference table of `values` along `axis`,
/// holding the other coordinate at `fixed`. Keys of `values` are the varying
/// coordinate and must form a contiguous integer range; fewer than three
/// points yields an empty table.
pub fn second_difference(
    values: &BTreeMap<i64, f64>,
    axis: Axis,
    fixed: i64,
) -> Result<DifferenceTable> {
    let keys: Vec<i64> = values.keys().copied().collect();
    for pair in keys.windows(2) {
        if pair[1] != pair[0] + 1 {
            return Err(Error::bad_input(format!(
                "axis values must be contiguous; gap between {} and {}",
                pair[0], pair[1]
            )));
        }
    }
    let mut cells = Vec::new();
    for w in keys.windows(3) {
        let x = w[1];
        let d = values[&w[2]] - 2.0 * values[&x] + values[&w[0]];
        let (m, n) = match axis {
            Axis::AlongM => (x, fixed),
            Axis::AlongN => (fixed, x),
        };
        cells.push(DiffCell { m, n, d });
    }
    Ok(DifferenceTable { axis, cells })
}

/// Outcome of the universal lower-bound check on 2-frame energy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WelchSlack {
    /// `potential(config, 2) − m(m−n)/(2n)` (bound clamped to 0 for `m ≤ n`).
    pub slack: f64,
    /// Whether the slack clears `−1e-9`, i.e. the bound holds to tolerance.
    pub satisfied: bool,
}

/// Checks the configuration's 2-frame energy against the universal lower
/// bound `m(m−n)/(2n)`. Every configuration of unit vectors satisfies it, so
/// a negative slack beyond rounding indicates corrupted data; a slack near
/// zero certifies a tight frame.
pub fn welch_check<T: Scalar>(config: &Configuration<T>, gram: &GramSummary<T>) -> WelchSlack {
    let p2: f64 = gram
        .offdiag_moduli
        .iter()
        .map(|x| {
            let x = x.to_f64().unwrap_or(f64::NAN);
            x * x
        })
        .sum();
    let bound = exact_p2(config.m() as i64, config.n() as i64)
        .expect("valid configuration dimensions")
        .approx();
    let slack = p2 - bound;
    WelchSlack { slack, satisfied: slack >= -1e-9 }
}
