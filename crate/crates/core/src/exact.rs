//! Exact rational scalars, closed-interval unions and piecewise-linear profiles.
//!
//! Everything here is exact. The only floating point in this module is the
//! formatting helper used at output boundaries.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Arbitrary-precision rational, always in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// `num / den` as an exact rational. Panics on a zero denominator.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"` or a finite decimal like `"0.25"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || Error::InvalidArgument(format!("not a rational number: {s:?}"));
    if let Some((int_part, frac_part)) = s.split_once('.') {
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(bad());
        }
        let negative = int_part.starts_with('-');
        let digits = format!("{}{}", int_part.trim_start_matches(['-', '+']), frac_part);
        let num: BigInt = digits.parse().map_err(|_| bad())?;
        let den = num_traits::pow(BigInt::from(10), frac_part.len());
        let r = Rational::new(num, den);
        return Ok(if negative { -r } else { r });
    }
    s.parse::<Rational>().map_err(|_| bad())
}

/// Formats a float with `sig` significant digits, trailing zeros trimmed
/// (the `%.{sig}g` convention).
pub fn sig_decimal(x: f64, sig: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sig = sig.max(1);
    let sci = format!("{:.*e}", sig - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if exp < -5 || exp >= sig as i32 {
        let mantissa = trim_zeros(mantissa);
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{mantissa}e{sign}{:02}", exp.abs())
    } else {
        let decimals = (sig as i32 - 1 - exp).max(0) as usize;
        trim_zeros(&format!("{x:.decimals$}")).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Sums rationals by pairwise reduction, which keeps intermediate
/// denominators balanced when there are many terms.
pub fn tree_sum(mut terms: Vec<Rational>) -> Rational {
    if terms.is_empty() {
        return Rational::zero();
    }
    while terms.len() > 1 {
        let mut next = Vec::with_capacity(terms.len().div_ceil(2));
        let mut it = terms.into_iter();
        while let Some(a) = it.next() {
            match it.next() {
                Some(b) => next.push(a + b),
                None => next.push(a),
            }
        }
        terms = next;
    }
    terms.pop().unwrap()
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Interval {
    lo: Rational,
    hi: Rational,
}

impl Interval {
    pub fn new(lo: Rational, hi: Rational) -> Result<Self> {
        if lo > hi {
            return Err(Error::InvertedInterval {
                lo: lo.to_string(),
                hi: hi.to_string(),
            });
        }
        Ok(Interval { lo, hi })
    }

    pub fn lo(&self) -> &Rational {
        &self.lo
    }

    pub fn hi(&self) -> &Rational {
        &self.hi
    }

    pub fn length(&self) -> Rational {
        &self.hi - &self.lo
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.lo, self.hi)
    }
}

/// A finite union of closed intervals in canonical form: sorted by `lo`,
/// separated by strictly positive gaps.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntervalUnion {
    parts: Vec<Interval>,
}

impl IntervalUnion {
    pub fn empty() -> Self {
        IntervalUnion::default()
    }

    /// Sorts and merges overlapping or touching intervals.
    pub fn normalize(mut parts: Vec<Interval>) -> Self {
        parts.sort_by(|a, b| a.lo.cmp(&b.lo).then_with(|| a.hi.cmp(&b.hi)));
        let mut merged: Vec<Interval> = Vec::with_capacity(parts.len());
        for iv in parts {
            match merged.last_mut() {
                Some(last) if iv.lo <= last.hi => {
                    if iv.hi > last.hi {
                        last.hi = iv.hi;
                    }
                }
                _ => merged.push(iv),
            }
        }
        IntervalUnion { parts: merged }
    }

    /// Builds from `(lo, hi)` pairs, rejecting any with `lo > hi`.
    pub fn from_pairs<I>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Rational, Rational)>,
    {
        let parts = pairs
            .into_iter()
            .map(|(lo, hi)| Interval::new(lo, hi))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::normalize(parts))
    }

    /// Union of `[start_k / den, (start_k + width) / den]` for integer
    /// starts on a common denominator. Sorting and merging happen on the
    /// integers; only the surviving parts become rationals.
    pub(crate) fn from_scaled_starts(
        mut starts: Vec<BigInt>,
        width: &BigInt,
        den: &BigInt,
    ) -> Self {
        starts.sort_unstable();
        let mut runs: Vec<(BigInt, BigInt)> = Vec::new();
        for s in starts {
            let e = &s + width;
            match runs.last_mut() {
                Some((_, hi)) if s <= *hi => {
                    if e > *hi {
                        *hi = e;
                    }
                }
                _ => runs.push((s, e)),
            }
        }
        let parts = runs
            .into_iter()
            .map(|(lo, hi)| Interval {
                lo: Rational::new(lo, den.clone()),
                hi: Rational::new(hi, den.clone()),
            })
            .collect();
        IntervalUnion { parts }
    }

    pub fn parts(&self) -> &[Interval] {
        &self.parts
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn measure(&self) -> Rational {
        tree_sum(self.parts.iter().map(Interval::length).collect())
    }

    pub fn union(&self, other: &IntervalUnion) -> IntervalUnion {
        let mut parts = self.parts.clone();
        parts.extend(other.parts.iter().cloned());
        Self::normalize(parts)
    }

    /// True when every part lies inside `[lo, hi]`.
    pub fn within(&self, lo: &Rational, hi: &Rational) -> bool {
        self.parts.iter().all(|p| &p.lo >= lo && &p.hi <= hi)
    }
}

impl fmt::Display for IntervalUnion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, p) in self.parts.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

/// Continuous function on `[0, 1]`, linear between breakpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PiecewiseLinearProfile {
    breakpoints: Vec<(Rational, Rational)>,
}

impl PiecewiseLinearProfile {
    pub fn new(breakpoints: Vec<(Rational, Rational)>) -> Result<Self> {
        let (first, last) = match (breakpoints.first(), breakpoints.last()) {
            (Some(f), Some(l)) if breakpoints.len() >= 2 => (f, l),
            _ => {
                return Err(Error::InvalidProfile(
                    "need at least two breakpoints".into(),
                ))
            }
        };
        if !first.0.is_zero() || !last.0.is_one() {
            return Err(Error::InvalidProfile(format!(
                "heights run from {} to {}",
                first.0, last.0
            )));
        }
        if let Some(w) = breakpoints.windows(2).find(|w| w[0].0 >= w[1].0) {
            return Err(Error::InvalidProfile(format!(
                "height {} is followed by {}",
                w[0].0, w[1].0
            )));
        }
        Ok(PiecewiseLinearProfile { breakpoints })
    }

    pub fn constant(value: Rational) -> Self {
        PiecewiseLinearProfile {
            breakpoints: vec![(Rational::zero(), value.clone()), (Rational::one(), value)],
        }
    }

    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.breakpoints
    }

    /// Exact integral over `[0, 1]` by the trapezoid rule, which is exact
    /// on each linear piece.
    pub fn integrate(&self) -> Rational {
        let two = int(2);
        let terms = self
            .breakpoints
            .windows(2)
            .map(|w| (&w[1].0 - &w[0].0) * (&w[0].1 + &w[1].1) / &two)
            .collect();
        tree_sum(terms)
    }

    /// Value at `y`, linearly interpolated. `y` is clamped to `[0, 1]`.
    pub fn eval(&self, y: &Rational) -> Rational {
        let bp = &self.breakpoints;
        let idx = bp.partition_point(|(by, _)| by <= y);
        if idx == 0 {
            return bp[0].1.clone();
        }
        if idx == bp.len() {
            return bp[bp.len() - 1].1.clone();
        }
        let (y0, v0) = &bp[idx - 1];
        let (y1, v1) = &bp[idx];
        v0 + (v1 - v0) * (y - y0) / (y1 - y0)
    }

    /// The pointwise maximum, with extra breakpoints where the two cross.
    pub fn pointwise_max(&self, other: &PiecewiseLinearProfile) -> PiecewiseLinearProfile {
        let mut ys: Vec<Rational> = self
            .breakpoints
            .iter()
            .chain(other.breakpoints.iter())
            .map(|(y, _)| y.clone())
            .collect();
        ys.sort();
        ys.dedup();
        let mut out: Vec<(Rational, Rational)> = Vec::with_capacity(ys.len() * 2);
        for (i, y) in ys.iter().enumerate() {
            let (a, b) = (self.eval(y), other.eval(y));
            if i > 0 {
                let y0 = &ys[i - 1];
                let d0 = self.eval(y0) - other.eval(y0);
                let d1 = &a - &b;
                if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive())
                {
                    let cross = y0 + (y - y0) * &d0 / (&d0 - &d1);
                    let v = self.eval(&cross);
                    out.push((cross, v));
                }
            }
            out.push((y.clone(), a.max(b)));
        }
        PiecewiseLinearProfile { breakpoints: out }
    }
}

/// `integrate_plp`: exact area under a profile.
pub fn integrate_plp(profile: &PiecewiseLinearProfile) -> Rational {
    profile.integrate()
}
