//! Exact slices and areas of `T^n_σ`, the union of the parallelograms
//! joining bottom cell `j` to top cell `σ(j)` over the unit square.
//!
//! In units of `1/n`, the left edge of parallelogram `j` at height `y` is
//! `L_j(y) = (j - 1) + (σ(j) - j)·y` and every slice interval has width 1.
//! The slice measure is linear in `y` except where two left edges meet or
//! sit exactly one unit apart, so the area is the trapezoid rule over those
//! heights. At a height `y = a/b` all edges scaled by `b` are integers,
//! which is what the sweep below works on.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exact::{int, tree_sum, Interval, IntervalUnion, PiecewiseLinearProfile, Rational};
use crate::permutations::{composite_sigma, digit_swap_perm, CompositePlan, Permutation};

/// Largest `n` the integer sweep accepts; keeps every scaled edge well inside `i64`.
pub const MAX_N: usize = 1 << 20;

/// Breakpoints per parallel work unit in [`area`] and [`slice_profile`].
const CHUNK: usize = 8192;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrapezoidSpec {
    n: usize,
    sigma: Permutation,
}

impl TrapezoidSpec {
    pub fn new(sigma: Permutation) -> Result<Self> {
        let n = sigma.len();
        if n > MAX_N {
            return Err(Error::Overflow(format!("n = {n}")));
        }
        Ok(TrapezoidSpec { n, sigma })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn sigma(&self) -> &Permutation {
        &self.sigma
    }

    pub fn parallelograms(&self) -> impl Iterator<Item = Parallelogram> + '_ {
        self.sigma
            .image()
            .iter()
            .enumerate()
            .map(move |(i, &k)| Parallelogram {
                j: i + 1,
                k,
                n: self.n,
            })
    }
}

/// Parallelogram with bottom side `[(j-1)/n, j/n] × {0}` and top side
/// `[(k-1)/n, k/n] × {1}`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Parallelogram {
    pub j: usize,
    pub k: usize,
    pub n: usize,
}

impl Parallelogram {
    pub fn slice_at(&self, y: &Rational) -> Interval {
        let n = int(self.n as i64);
        let lo = (int(self.j as i64 - 1) + int(self.k as i64 - self.j as i64) * y) / &n;
        let hi = &lo + Rational::one() / n;
        Interval::new(lo, hi).expect("width is positive")
    }

    /// Corners in order bottom-left, bottom-right, top-right, top-left.
    pub fn corners(&self) -> [(Rational, Rational); 4] {
        let n = self.n as i64;
        let (j, k) = (self.j as i64, self.k as i64);
        let (r, z, o) = (|a: i64| Rational::new(a.into(), n.into()), int(0), int(1));
        [
            (r(j - 1), z.clone()),
            (r(j), z),
            (r(k), o.clone()),
            (r(k - 1), o),
        ]
    }
}

fn check_height(y: &Rational) -> Result<()> {
    if y.is_negative() || y > &Rational::one() {
        return Err(Error::OutOfRange {
            what: "y",
            value: y.to_string(),
            range: "[0, 1]",
        });
    }
    Ok(())
}

/// Horizontal cross-section of `T^n_σ` at height `y`.
pub fn slice(spec: &TrapezoidSpec, y: &Rational) -> Result<IntervalUnion> {
    check_height(y)?;
    // Common denominator n·q: edge j starts at (j-1)q + (σ(j)-j)p, width q.
    let (p, q) = (y.numer(), y.denom());
    let starts = spec
        .sigma
        .image()
        .iter()
        .enumerate()
        .map(|(i, &k)| BigInt::from(i) * q + BigInt::from(k as i64 - i as i64 - 1) * p)
        .collect();
    let den = q * BigInt::from(spec.n);
    Ok(IntervalUnion::from_scaled_starts(starts, q, &den))
}

/// `measure(slice(spec, y))`.
pub fn slice_measure(spec: &TrapezoidSpec, y: &Rational) -> Result<Rational> {
    Ok(slice(spec, y)?.measure())
}

/// One sampled height `a/b` with scaled union length `m`: the slice
/// measure there is `m / (n·b)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Sample {
    a: i64,
    b: i64,
    m: i64,
}

/// Reusable buffers for the breakpoint sweep of one permutation at a time.
#[derive(Debug, Default, Clone)]
pub struct SweepKernel {
    offsets: Vec<i64>,
    heights: Vec<(i64, i64)>,
    order: Vec<usize>,
    edges: Vec<i64>,
    samples: Vec<Sample>,
}

impl SweepKernel {
    pub fn new() -> Self {
        Self::default()
    }

    fn load(&mut self, image: &[usize]) {
        self.offsets.clear();
        self.offsets.extend(
            image
                .iter()
                .enumerate()
                .map(|(i, &k)| k as i64 - 1 - i as i64),
        );
        breakpoint_heights(&self.offsets, &mut self.heights);
    }

    fn sweep_all(&mut self) {
        self.samples.clear();
        sweep(
            &self.offsets,
            &self.heights,
            &mut self.order,
            &mut self.edges,
            &mut self.samples,
        );
    }

    /// Floating-point area, accurate to a few ulps; used to screen candidates.
    pub fn area_f64(&mut self, image: &[usize]) -> f64 {
        self.load(image);
        self.sweep_all();
        area_f64_from(&self.samples, image.len())
    }

    pub fn area_exact(&mut self, image: &[usize]) -> Rational {
        self.load(image);
        self.sweep_all();
        exact_area_from(&self.samples, image.len())
    }
}

/// All heights in `[0, 1]` where two left edges coincide or differ by one
/// unit, plus both ends, as reduced fractions `(a, b)` in increasing order.
fn breakpoint_heights(offsets: &[i64], out: &mut Vec<(i64, i64)>) {
    out.clear();
    out.push((0, 1));
    out.push((1, 1));
    let n = offsets.len();
    for i in 0..n {
        for j in (i + 1)..n {
            let slope = offsets[i] - offsets[j];
            if slope == 0 {
                continue;
            }
            // (i - j) + slope·y = c for c ∈ {-1, 0, 1}
            let base = (j - i) as i64;
            for c in -1..=1 {
                let (mut a, mut b) = (base + c, slope);
                if b < 0 {
                    a = -a;
                    b = -b;
                }
                if a > 0 && a < b {
                    let g = a.gcd(&b);
                    out.push((a / g, b / g));
                }
            }
        }
    }
    out.sort_unstable_by(|x, y| {
        ((x.0 as i128) * (y.1 as i128)).cmp(&((y.0 as i128) * (x.1 as i128)))
    });
    out.dedup();
}

/// Evaluates the scaled union length at each height in order, carrying
/// the edge order between heights so each re-sort is nearly linear.
fn sweep(
    offsets: &[i64],
    heights: &[(i64, i64)],
    order: &mut Vec<usize>,
    edges: &mut Vec<i64>,
    out: &mut Vec<Sample>,
) {
    let n = offsets.len();
    order.clear();
    order.extend(0..n);
    edges.clear();
    edges.resize(n, 0);
    let mut first = true;
    for &(a, b) in heights {
        for (i, e) in edges.iter_mut().enumerate() {
            *e = i as i64 * b + offsets[i] * a;
        }
        if first {
            order.sort_unstable_by_key(|&i| edges[i]);
            first = false;
        } else {
            insertion_sort_by_key(order, edges);
        }
        let mut m = b;
        for w in order.windows(2) {
            m += (edges[w[1]] - edges[w[0]]).min(b);
        }
        out.push(Sample { a, b, m });
    }
}

fn insertion_sort_by_key(order: &mut [usize], keys: &[i64]) {
    for i in 1..order.len() {
        let cur = order[i];
        let key = keys[cur];
        let mut j = i;
        while j > 0 && keys[order[j - 1]] > key {
            order[j] = order[j - 1];
            j -= 1;
        }
        order[j] = cur;
    }
}

fn area_f64_from(samples: &[Sample], n: usize) -> f64 {
    let mut total = 0.0;
    for w in samples.windows(2) {
        let (s0, s1) = (w[0], w[1]);
        let dy = s1.a as f64 / s1.b as f64 - s0.a as f64 / s0.b as f64;
        let v0 = s0.m as f64 / s0.b as f64;
        let v1 = s1.m as f64 / s1.b as f64;
        total += dy * (v0 + v1);
    }
    total / (2.0 * n as f64)
}

/// Exact trapezoid sum. Segment `(a0/b0, m0) → (a1/b1, m1)` contributes
/// `(a1·b0 - a0·b1)(m0·b1 + m1·b0) / (b0²·b1²)`, all over `2n`.
fn exact_area_from(samples: &[Sample], n: usize) -> Rational {
    let terms = samples
        .windows(2)
        .filter_map(|w| {
            let (s0, s1) = (w[0], w[1]);
            let dy = s1.a as i128 * s0.b as i128 - s0.a as i128 * s1.b as i128;
            let num = dy * (s0.m as i128 * s1.b as i128 + s1.m as i128 * s0.b as i128);
            if num == 0 {
                return None;
            }
            let den = (s0.b as i128 * s1.b as i128).pow(2);
            let g = num.gcd(&den);
            Some(Rational::new_raw(
                BigInt::from(num / g),
                BigInt::from(den / g),
            ))
        })
        .collect();
    tree_sum(terms) / int(2 * n as i64)
}

fn samples_parallel(spec: &TrapezoidSpec) -> Vec<Sample> {
    let mut kernel = SweepKernel::new();
    kernel.load(spec.sigma.image());
    let offsets = &kernel.offsets;
    if kernel.heights.len() <= CHUNK {
        kernel.sweep_all();
        return kernel.samples;
    }
    kernel
        .heights
        .par_chunks(CHUNK)
        .map(|chunk| {
            let (mut order, mut edges) = (Vec::new(), Vec::new());
            let mut out = Vec::with_capacity(chunk.len());
            sweep(offsets, chunk, &mut order, &mut edges, &mut out);
            out
        })
        .collect::<Vec<_>>()
        .concat()
}

/// Slice measure as a function of height, sampled at every breakpoint.
pub fn slice_profile(spec: &TrapezoidSpec) -> PiecewiseLinearProfile {
    let n = spec.n as i64;
    let breakpoints = samples_parallel(spec)
        .into_iter()
        .map(|s| {
            (
                Rational::new(s.a.into(), s.b.into()),
                Rational::new(s.m.into(), (n * s.b).into()),
            )
        })
        .collect();
    PiecewiseLinearProfile::new(breakpoints).expect("sweep heights span [0, 1]")
}

/// Exact two-dimensional measure of `T^n_σ`.
pub fn area(spec: &TrapezoidSpec) -> Rational {
    exact_area_from(&samples_parallel(spec), spec.n)
}

/// Midpoint-rule estimate of the area from `samples` exact slices.
pub fn area_oracle(spec: &TrapezoidSpec, samples: usize) -> Result<f64> {
    if samples < 2 {
        return Err(Error::OutOfRange {
            what: "samples",
            value: samples.to_string(),
            range: "samples >= 2",
        });
    }
    let den = BigInt::from(2 * samples);
    let measures = (0..samples)
        .into_par_iter()
        .map(|i| {
            let y = Rational::new(BigInt::from(2 * i + 1), den.clone());
            slice_measure(spec, &y).expect("midpoints lie in (0, 1)")
        })
        .collect::<Vec<_>>();
    let mean = tree_sum(measures) / int(samples as i64);
    Ok(crate::exact::to_f64(&mean))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSumTerm {
    pub exponent: u32,
    pub digit: u8,
    pub block_area: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightedSum {
    pub n: usize,
    pub digits: String,
    pub lhs: Rational,
    pub rhs: Rational,
    pub terms: Vec<WeightedSumTerm>,
}

impl WeightedSum {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Both sides of `area(T^n_{σ_n}) = (1/n) Σ x_j 3^j area(T^{3^j}_σ)`,
/// each computed by its own sweep.
pub fn weighted_sum_identity(n: usize) -> Result<WeightedSum> {
    let lhs = area(&TrapezoidSpec::new(composite_sigma(n)?)?);
    let plan = CompositePlan::new(n)?;
    let mut terms = Vec::new();
    let mut sum = Rational::zero();
    for (i, &(size, digit)) in plan.blocks.iter().enumerate() {
        if digit == 0 {
            continue;
        }
        let exponent = plan.exponent(i);
        let block_area = area(&TrapezoidSpec::new(digit_swap_perm(exponent)?)?);
        sum += int(digit as i64 * size as i64) * &block_area;
        terms.push(WeightedSumTerm {
            exponent,
            digit,
            block_area,
        });
    }
    Ok(WeightedSum {
        n,
        digits: plan.digit_string(),
        lhs,
        rhs: sum / int(n as i64),
        terms,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn spec(s: &str) -> TrapezoidSpec {
        TrapezoidSpec::new(s.parse().unwrap()).unwrap()
    }

    #[test]
    fn slice_of_the_base_pattern() {
        let u = slice(&spec("1,3,2"), &rat(1, 2)).unwrap();
        assert_eq!(
            u,
            IntervalUnion::from_pairs([(rat(0, 1), rat(1, 3)), (rat(1, 2), rat(5, 6))]).unwrap()
        );
        assert_eq!(u.measure(), rat(2, 3));
    }

    #[test]
    fn bottom_slice_tiles() {
        for s in ["1,3,2", "3,2,1", "2,4,1,3", "5,1,4,2,3"] {
            let u = slice(&spec(s), &rat(0, 1)).unwrap();
            assert_eq!(
                u,
                IntervalUnion::from_pairs([(rat(0, 1), rat(1, 1))]).unwrap()
            );
            assert_eq!(slice_measure(&spec(s), &rat(1, 1)).unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn identity_slices_are_full() {
        let id = TrapezoidSpec::new(Permutation::identity(7).unwrap()).unwrap();
        for y in [rat(0, 1), rat(1, 7), rat(3, 5), rat(1, 1)] {
            assert_eq!(slice_measure(&id, &y).unwrap(), rat(1, 1));
        }
    }

    #[test]
    fn slice_rejects_heights_outside_unit_interval() {
        assert!(slice(&spec("1,2"), &rat(-1, 3)).is_err());
        assert!(slice(&spec("1,2"), &rat(4, 3)).is_err());
    }

    #[test]
    fn profiles() {
        let p = slice_profile(&spec("1,3,2"));
        assert_eq!(
            p.breakpoints(),
            &[
                (rat(0, 1), rat(1, 1)),
                (rat(1, 2), rat(2, 3)),
                (rat(1, 1), rat(1, 1))
            ]
        );
        let p = slice_profile(&spec("1,2,3,4"));
        assert_eq!(
            p.breakpoints(),
            &[(rat(0, 1), rat(1, 1)), (rat(1, 1), rat(1, 1))]
        );
        let p = slice_profile(&spec("2,1"));
        assert_eq!(
            p.breakpoints(),
            &[
                (rat(0, 1), rat(1, 1)),
                (rat(1, 2), rat(1, 2)),
                (rat(1, 1), rat(1, 1))
            ]
        );
    }

    #[test]
    fn areas() {
        assert_eq!(area(&spec("1,3,2")), rat(5, 6));
        assert_eq!(area(&spec("1,2,3,4,5")), rat(1, 1));
        assert_eq!(area(&spec("2,1")), rat(3, 4));
        assert_eq!(area(&spec("3,2,1")), rat(2, 3));
    }

    #[test]
    fn kernel_matches_area() {
        let mut k = SweepKernel::new();
        for s in ["1,3,2", "2,1", "3,2,1", "2,4,1,3", "4,1,3,5,2"] {
            let sp = spec(s);
            assert_eq!(k.area_exact(sp.sigma().image()), area(&sp));
            assert!(
                (k.area_f64(sp.sigma().image()) - crate::exact::to_f64(&area(&sp))).abs() < 1e-14
            );
        }
    }

    #[test]
    fn profile_values_match_slices() {
        let sp = spec("4,1,3,5,2");
        for (y, v) in slice_profile(&sp).breakpoints() {
            assert_eq!(&slice_measure(&sp, y).unwrap(), v);
        }
    }

    #[test]
    fn oracle_examples() {
        let est = area_oracle(&spec("1,3,2"), 10_000).unwrap();
        assert!((est - 5.0 / 6.0).abs() < 1e-3);
        let est = area_oracle(&spec("2,1"), 10_000).unwrap();
        assert!((est - 0.75).abs() < 1e-3);
        assert_eq!(area_oracle(&spec("1,2,3"), 17).unwrap(), 1.0);
        assert!(area_oracle(&spec("1,2,3"), 1).is_err());
    }

    #[test]
    fn weighted_sum_examples() {
        let w = weighted_sum_identity(4).unwrap();
        assert_eq!(w.lhs, rat(7, 8));
        assert_eq!(w.rhs, rat(7, 8));
        let w = weighted_sum_identity(3).unwrap();
        assert_eq!((w.lhs.clone(), w.rhs.clone()), (rat(5, 6), rat(5, 6)));
        let w = weighted_sum_identity(1).unwrap();
        assert_eq!((w.lhs.clone(), w.rhs.clone()), (rat(1, 1), rat(1, 1)));
    }

    #[test]
    fn corners_of_second_parallelogram() {
        let sp = spec("1,3,2");
        let p = sp.parallelograms().nth(1).unwrap();
        assert_eq!(
            p.corners(),
            [
                (rat(1, 3), rat(0, 1)),
                (rat(2, 3), rat(0, 1)),
                (rat(1, 1), rat(1, 1)),
                (rat(2, 3), rat(1, 1))
            ]
        );
    }
}
