//! Base-3 digit sets: partial modified Cantor sets, trapezoid slice sets in
//! digit form, their closed-form limit measures, and the digit-swap map on
//! exact rationals.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::exact::{int, IntervalUnion, Rational};

pub const DEFAULT_DEPTH_CAP: u32 = 12;

/// Longest base-3 expansion (preperiod + period) `digit_swap_real` will build.
pub const MAX_EXPANSION_DIGITS: usize = 1 << 20;

/// Depth `n` and digit triple `(a, b, c)` generating
/// `D_n(a,b,c) = { Σ_{k=1..n} x_k / 3^k : x_k ∈ {a,b,c} }`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitSetSpec {
    pub depth: u32,
    pub digits: [Rational; 3],
    pub cap: u32,
}

impl DigitSetSpec {
    pub fn new(depth: u32, digits: [Rational; 3]) -> Result<Self> {
        let two = int(2);
        for d in &digits {
            if d.is_negative() || d > &two {
                return Err(Error::OutOfRange {
                    what: "digit",
                    value: d.to_string(),
                    range: "[0, 2]",
                });
            }
        }
        Ok(DigitSetSpec {
            depth,
            digits,
            cap: DEFAULT_DEPTH_CAP,
        })
    }

    pub fn with_cap(mut self, cap: u32) -> Self {
        self.cap = cap;
        self
    }

    /// Digits `{0, 1, t}` of the modified Cantor set `C_t`.
    pub fn cantor(depth: u32, t: &Rational) -> Result<Self> {
        Self::new(depth, [int(0), int(1), t.clone()])
    }

    fn check_cap(&self) -> Result<()> {
        if self.depth > self.cap {
            return Err(Error::DepthCap {
                depth: self.depth,
                cap: self.cap,
            });
        }
        Ok(())
    }

    /// Anchors as integers over the common denominator `3^n · D`, where `D`
    /// is the lcm of the digit denominators. Returns `(anchors, D)`.
    fn scaled_anchors(&self) -> Result<(Vec<BigInt>, BigInt)> {
        self.check_cap()?;
        let lcm = self
            .digits
            .iter()
            .fold(BigInt::one(), |acc, d| acc.lcm(d.denom()));
        let mut scaled: Vec<BigInt> = self
            .digits
            .iter()
            .map(|d| d.numer() * (&lcm / d.denom()))
            .collect();
        scaled.sort();
        scaled.dedup();
        let three = BigInt::from(3);
        let mut level = vec![BigInt::zero()];
        for _ in 0..self.depth {
            let mut next = Vec::with_capacity(level.len() * scaled.len());
            for s in &level {
                let base = s * &three;
                next.extend(scaled.iter().map(|e| &base + e));
            }
            next.sort_unstable();
            next.dedup();
            level = next;
        }
        Ok((level, lcm))
    }
}

/// Sorted distinct points of `D_n(a,b,c)`.
pub fn anchor_points(spec: &DigitSetSpec) -> Result<Vec<Rational>> {
    let (anchors, lcm) = spec.scaled_anchors()?;
    let den = lcm * num_traits::pow(BigInt::from(3), spec.depth as usize);
    Ok(anchors
        .into_iter()
        .map(|a| Rational::new(a, den.clone()))
        .collect())
}

/// `⋃_{x ∈ D_n(a,b,c)} [x, x + 3^{-n}]`.
pub fn partial_cantor(spec: &DigitSetSpec) -> Result<IntervalUnion> {
    let (anchors, lcm) = spec.scaled_anchors()?;
    let den = &lcm * num_traits::pow(BigInt::from(3), spec.depth as usize);
    Ok(IntervalUnion::from_scaled_starts(anchors, &lcm, &den))
}

fn check_unit(what: &'static str, t: &Rational) -> Result<()> {
    if t.is_negative() || t > &Rational::one() {
        return Err(Error::OutOfRange {
            what,
            value: t.to_string(),
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Digits `{0, 1+t, 2-t}`: the depth-`n` slice of the digit-swap trapezoid at height `t`.
pub fn slice_digits(depth: u32, t: &Rational) -> Result<DigitSetSpec> {
    check_unit("t", t)?;
    DigitSetSpec::new(depth, [int(0), int(1) + t, int(2) - t])
}

pub fn slice_set(depth: u32, t: &Rational) -> Result<IntervalUnion> {
    partial_cantor(&slice_digits(depth, t)?)
}

fn divisible_by_three(p: &BigInt, q: &BigInt) -> bool {
    ((p + q) % BigInt::from(3)).is_zero()
}

/// Limit measure of `C_t`: `1/q` when `t = p/q` in lowest terms has
/// `p + q ≡ 0 (mod 3)`, otherwise 0.
pub fn cantor_measure_closed(t: &Rational) -> Result<Rational> {
    if t.is_negative() {
        return Err(Error::OutOfRange {
            what: "t",
            value: t.to_string(),
            range: "t >= 0",
        });
    }
    Ok(if divisible_by_three(t.numer(), t.denom()) {
        Rational::new(BigInt::one(), t.denom().clone())
    } else {
        Rational::zero()
    })
}

/// Limit slice measure at height `t`: the slice is `(1+t)·C_{(2-t)/(1+t)}`.
pub fn slice_measure_closed(t: &Rational) -> Result<Rational> {
    check_unit("t", t)?;
    let one = Rational::one();
    let ratio = (int(2) - t) / (&one + t);
    Ok(if divisible_by_three(ratio.numer(), ratio.denom()) {
        (&one + t) / Rational::from_integer(ratio.denom().clone())
    } else {
        Rational::zero()
    })
}

/// Base-3 expansion `int_part . preperiod (period)` with no trailing run of 2s.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Ternary {
    int_part: BigInt,
    preperiod: Vec<u8>,
    period: Vec<u8>,
}

impl Ternary {
    fn of(x: &Rational) -> Result<Self> {
        let int_part = x.numer().div_floor(x.denom());
        let den = x.denom().clone();
        let mut rem = x.numer() - &int_part * &den;
        let three = BigInt::from(3);
        let mut seen: HashMap<BigInt, usize> = HashMap::new();
        let mut digits = Vec::new();
        while !seen.contains_key(&rem) {
            if digits.len() >= MAX_EXPANSION_DIGITS {
                return Err(Error::Overflow(format!("base-3 expansion of {x}")));
            }
            seen.insert(rem.clone(), digits.len());
            let scaled = &rem * &three;
            let (d, r) = scaled.div_rem(&den);
            digits.push(d.to_u8().expect("digit < 3"));
            rem = r;
        }
        let start = seen[&rem];
        let period = digits.split_off(start);
        Ok(Ternary {
            int_part,
            preperiod: digits,
            period,
        })
    }

    fn value(&self) -> Rational {
        let three = BigInt::from(3);
        let as_int = |ds: &[u8]| ds.iter().fold(BigInt::zero(), |acc, &d| acc * &three + d);
        let pre = as_int(&self.preperiod);
        let per = as_int(&self.period);
        let period_den = num_traits::pow(three.clone(), self.period.len()) - 1;
        let shift = num_traits::pow(three, self.preperiod.len());
        Rational::from_integer(self.int_part.clone())
            + (Rational::from_integer(pre) + Rational::new(per, period_den))
                / Rational::from_integer(shift)
    }

    fn window(&self, len: usize) -> String {
        let digits = self
            .preperiod
            .iter()
            .chain(self.period.iter().cycle())
            .take(len)
            .map(|d| char::from(b'0' + d));
        format!("{}.{}", self.int_part, digits.collect::<String>())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitSwap {
    pub value: Rational,
    /// The swapped expansion ends in repeating 2s, so it is not the
    /// canonical expansion of `value` and the map is not injective there.
    pub boundary: bool,
    pub input_digits: String,
    pub output_digits: String,
}

/// Exchanges base-3 digits 1 and 2 of the canonical expansion of `x`.
/// `precision` sets how many fractional digits the diagnostic strings show.
pub fn digit_swap_real(x: &Rational, precision: usize) -> Result<DigitSwap> {
    check_unit("x", x)?;
    if precision == 0 {
        return Err(Error::InvalidArgument("precision must be positive".into()));
    }
    let input = Ternary::of(x)?;
    let swap = |ds: &[u8]| ds.iter().map(|&d| (2 * d) % 3).collect::<Vec<_>>();
    let output = Ternary {
        int_part: input.int_part.clone(),
        preperiod: swap(&input.preperiod),
        period: swap(&input.period),
    };
    Ok(DigitSwap {
        value: output.value(),
        boundary: output.period.iter().all(|&d| d == 2),
        input_digits: input.window(precision),
        output_digits: output.window(precision),
    })
}
