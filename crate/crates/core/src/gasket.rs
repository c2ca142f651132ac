//! Partial Sierpinski gaskets `𝒢_n`, their linear projections, Favard
//! length by quadrature, the slice/projection comparison, the exponential
//! integral bound, and power-law decay fits.

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::{One, Signed};
use rayon::prelude::*;
use serde::Serialize;

use crate::cantor::{partial_cantor, slice_set, DigitSetSpec};
use crate::error::{Error, Result};
use crate::exact::{int, to_f64, IntervalUnion, Rational};
use crate::quad::adaptive_simpson;

pub const DEFAULT_GASKET_CAP: u32 = 8;

/// Gap below which two projected intervals are treated as touching.
/// Scaled with the triangle size so the total spurious measure stays below 1e-12.
fn merge_tolerance(depth: u32) -> f64 {
    1e-12 / 3f64.powi(depth as i32)
}

/// Tolerance on `lhs <= rhs` in [`lemma1_check`].
pub const LEMMA1_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct GasketSpec {
    pub depth: u32,
    pub cap: u32,
}

impl GasketSpec {
    pub fn new(depth: u32) -> Result<Self> {
        GasketSpec {
            depth,
            cap: DEFAULT_GASKET_CAP,
        }
        .checked()
    }

    pub fn with_cap(depth: u32, cap: u32) -> Result<Self> {
        GasketSpec { depth, cap }.checked()
    }

    fn checked(self) -> Result<Self> {
        if self.depth > self.cap {
            return Err(Error::DepthCap {
                depth: self.depth,
                cap: self.cap,
            });
        }
        Ok(self)
    }

    /// Number of generation-`n` triangles.
    pub fn triangles(&self) -> usize {
        3usize.pow(self.depth)
    }

    /// Anchors as integer pairs over `3^n`.
    fn scaled_anchors(&self) -> Vec<(i64, i64)> {
        let mut level = vec![(0i64, 0i64)];
        for _ in 0..self.depth {
            level = level
                .iter()
                .flat_map(|&(u, v)| [(3 * u, 3 * v), (3 * u + 2, 3 * v), (3 * u, 3 * v + 2)])
                .collect();
        }
        level
    }

    fn float_anchors(&self) -> Vec<(f64, f64)> {
        let scale = 3f64.powi(self.depth as i32);
        self.scaled_anchors()
            .into_iter()
            .map(|(u, v)| (u as f64 / scale, v as f64 / scale))
            .collect()
    }
}

/// Lower-left corners of the generation-`n` triangles, each with legs `3^{-n}`.
pub fn gasket_anchors(spec: &GasketSpec) -> Vec<(Rational, Rational)> {
    let den = BigInt::from(3i64.pow(spec.depth));
    spec.scaled_anchors()
        .into_iter()
        .map(|(u, v)| {
            (
                Rational::new(u.into(), den.clone()),
                Rational::new(v.into(), den.clone()),
            )
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub enum Direction {
    /// Exact mode: the direction with `tan θ = slope`, `slope > 0`.
    Slope(Rational),
    /// Numeric mode: angle in radians.
    Angle(f64),
}

impl Direction {
    pub fn angle(&self) -> f64 {
        match self {
            Direction::Slope(s) => to_f64(s).atan(),
            Direction::Angle(a) => *a,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Projection {
    /// The projection divided by `cos θ`, i.e. the set of `u + slope·v`,
    /// with `rescale = cos θ` mapping it back.
    Exact {
        scaled: IntervalUnion,
        rescale: f64,
    },
    Numeric {
        parts: Vec<(f64, f64)>,
    },
}

impl Projection {
    pub fn measure(&self) -> f64 {
        match self {
            Projection::Exact { scaled, rescale } => rescale * to_f64(&scaled.measure()),
            Projection::Numeric { parts } => parts.iter().map(|(lo, hi)| hi - lo).sum(),
        }
    }
}

/// `proj_θ(𝒢_n)`: the union over triangles of the span of their three
/// projected vertices.
pub fn project(spec: &GasketSpec, dir: &Direction) -> Result<Projection> {
    match dir {
        Direction::Slope(s) => project_exact(spec, s),
        Direction::Angle(theta) => {
            if !theta.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "angle {theta} is not finite"
                )));
            }
            Ok(Projection::Numeric {
                parts: project_numeric(&spec.float_anchors(), spec.depth, *theta),
            })
        }
    }
}

fn project_exact(spec: &GasketSpec, slope: &Rational) -> Result<Projection> {
    if !slope.is_positive() {
        return Err(Error::OutOfRange {
            what: "slope",
            value: slope.to_string(),
            range: "slope > 0",
        });
    }
    let (p, q) = (slope.numer(), slope.denom());
    let starts = spec
        .scaled_anchors()
        .into_iter()
        .map(|(u, v)| q * BigInt::from(u) + p * BigInt::from(v))
        .collect();
    let width = p.max(q).clone();
    let den = q * BigInt::from(spec.triangles());
    let scaled = IntervalUnion::from_scaled_starts(starts, &width, &den);
    let (pf, qf) = (
        to_f64(&Rational::from_integer(p.clone())),
        to_f64(&Rational::from_integer(q.clone())),
    );
    Ok(Projection::Exact {
        scaled,
        rescale: qf / pf.hypot(qf),
    })
}

fn project_numeric(anchors: &[(f64, f64)], depth: u32, theta: f64) -> Vec<(f64, f64)> {
    let (s, c) = theta.sin_cos();
    let h = 3f64.powi(-(depth as i32));
    let lo_off = h * 0f64.min(c).min(s);
    let hi_off = h * 0f64.max(c).max(s);
    let mut spans: Vec<(f64, f64)> = anchors
        .iter()
        .map(|&(u, v)| {
            let base = u * c + v * s;
            (base + lo_off, base + hi_off)
        })
        .collect();
    spans.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    let tol = merge_tolerance(depth);
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(spans.len());
    for (lo, hi) in spans {
        match merged.last_mut() {
            Some(last) if lo <= last.1 + tol => last.1 = last.1.max(hi),
            _ => merged.push((lo, hi)),
        }
    }
    merged
}

/// `μ(proj_θ(𝒢_n))` in numeric mode.
pub fn projection_measure(spec: &GasketSpec, theta: f64) -> Result<f64> {
    Ok(project(spec, &Direction::Angle(theta))?.measure())
}

/// Midpoint-rule estimate of `(1/π) ∫_0^π μ(proj_θ(𝒢_n)) dθ`.
///
/// The gasket is symmetric in its two coordinates, so the integrand at
/// `θ` equals the one at `π/2 - θ` (mod π); for an even number of points
/// only one of each mirrored pair of nodes is evaluated.
pub fn favard(spec: &GasketSpec, quad_points: usize) -> Result<f64> {
    if quad_points < 16 {
        return Err(Error::OutOfRange {
            what: "quad_points",
            value: quad_points.to_string(),
            range: "quad_points >= 16",
        });
    }
    let anchors = spec.float_anchors();
    let m = quad_points;
    let step = PI / m as f64;
    // Node i mirrors to m/2 - 1 - i on the first half and 3m/2 - 1 - i on the second.
    let mirror = |i: usize| -> Option<usize> {
        if !m.is_multiple_of(2) {
            return None;
        }
        let half = m / 2;
        Some(if i < half {
            half - 1 - i
        } else {
            m + half - 1 - i
        })
    };
    let nodes: Vec<(usize, f64)> = (0..m)
        .filter_map(|i| match mirror(i) {
            None => Some((i, 1.0)),
            Some(j) if i < j => Some((i, 2.0)),
            Some(j) if i == j => Some((i, 1.0)),
            Some(_) => None,
        })
        .collect();
    let values: Vec<f64> = nodes
        .par_iter()
        .map(|&(i, weight)| {
            let theta = (i as f64 + 0.5) * step;
            let width: f64 = project_numeric(&anchors, spec.depth, theta)
                .iter()
                .map(|(lo, hi)| hi - lo)
                .sum();
            weight * width
        })
        .collect();
    Ok(values.iter().sum::<f64>() / m as f64)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lemma1Row {
    pub depth: u32,
    pub t: Rational,
    /// Exact measure of the depth-`n` trapezoid slice at height `t`.
    pub lhs: Rational,
    /// Exact `(1+t)·μ(C^(n)_{(2-t)/(1+t)})`, the intermediate containment bound.
    pub cantor_bound: Rational,
    /// `(1+t)·μ(proj_φ(𝒢_n))` with `φ = atan((2-t)/(1+t))`.
    pub rhs: f64,
    pub ratio: f64,
    pub ok: bool,
}

/// Compares slice measures with the scaled gasket projection at the
/// matching angle. Rows where the inequality fails are kept and marked.
pub fn lemma1_check(depth: u32, t_grid: &[Rational]) -> Result<Vec<Lemma1Row>> {
    let spec = GasketSpec::new(depth)?;
    let anchors = spec.float_anchors();
    t_grid
        .iter()
        .map(|t| {
            let lhs = slice_set(depth, t)?.measure();
            let one_plus = Rational::one() + t;
            let ratio_t = (int(2) - t) / &one_plus;
            let cantor = partial_cantor(&DigitSetSpec::cantor(depth, &ratio_t)?)?.measure();
            let cantor_bound = &one_plus * cantor;
            let phi = to_f64(&ratio_t).atan();
            let proj: f64 = project_numeric(&anchors, depth, phi)
                .iter()
                .map(|(lo, hi)| hi - lo)
                .sum();
            let rhs = to_f64(&one_plus) * proj;
            let lhs_f = to_f64(&lhs);
            Ok(Lemma1Row {
                depth,
                t: t.clone(),
                cantor_bound,
                rhs,
                ratio: lhs_f / rhs,
                ok: lhs_f <= rhs + LEMMA1_TOLERANCE,
                lhs,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Lemma2Row {
    pub n: f64,
    /// `∫_0^n e^x x^{-p} dx`.
    pub integral: f64,
    /// `integral / (e^n n^{-p})`.
    pub ratio: f64,
}

/// `∫_0^n e^{x-n} x^{-p} dx`. The `x^{-p}` singularity on `[0, 1]` is
/// removed by `u = x^{1-p}`; `[1, n]` is smooth.
fn scaled_exp_power_integral(n: f64, p: f64) -> f64 {
    let q = 1.0 - p;
    let near = |u: f64| (u.powf(1.0 / q) - n).exp() / q;
    let far = |x: f64| (x - n).exp() * x.powf(-p);
    let split = n.min(1.0);
    let head_end = split.powf(q);
    let head_scale = (split - n).exp().max(f64::MIN_POSITIVE);
    let head = adaptive_simpson(&near, 0.0, head_end, 1e-14 * head_scale);
    let tail = if n > 1.0 {
        adaptive_simpson(&far, 1.0, n, 1e-14)
    } else {
        0.0
    };
    head + tail
}

pub fn lemma2_check(p: f64, n_values: &[f64]) -> Result<Vec<Lemma2Row>> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::OutOfRange {
            what: "p",
            value: p.to_string(),
            range: "(0, 1)",
        });
    }
    n_values
        .iter()
        .map(|&n| {
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::OutOfRange {
                    what: "n",
                    value: n.to_string(),
                    range: "n > 0",
                });
            }
            let scaled = scaled_exp_power_integral(n, p);
            Ok(Lemma2Row {
                n,
                integral: scaled * n.exp(),
                ratio: scaled * n.powf(p),
            })
        })
        .collect()
}

/// Least-squares fit of `log value = log C - p log m`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub pairs: Vec<(f64, f64)>,
    pub c: f64,
    pub p: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

pub fn decay_fit(values: &[(f64, f64)]) -> Result<DecayFit> {
    if values.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "decay fit needs at least 3 pairs, got {}",
            values.len()
        )));
    }
    for &(m, v) in values {
        if v.is_nan() || v <= 0.0 {
            return Err(Error::OutOfRange {
                what: "value",
                value: v.to_string(),
                range: "value > 0",
            });
        }
        if m.is_nan() || m < 1.0 {
            return Err(Error::OutOfRange {
                what: "scale index",
                value: m.to_string(),
                range: "m >= 1",
            });
        }
    }
    let xs: Vec<f64> = values.iter().map(|&(m, _)| m.ln()).collect();
    let ys: Vec<f64> = values.iter().map(|&(_, v)| v.ln()).collect();
    let k = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / k, ys.iter().sum::<f64>() / k);
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("scale indices are all equal".into()));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(DecayFit {
        pairs: values.to_vec(),
        c: intercept.exp(),
        p: if slope == 0.0 { 0.0 } else { -slope },
        residual: (sse / k).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    #[test]
    fn anchors() {
        assert_eq!(
            gasket_anchors(&GasketSpec::new(0).unwrap()),
            vec![(int(0), int(0))]
        );
        assert_eq!(
            gasket_anchors(&GasketSpec::new(1).unwrap()),
            vec![(int(0), int(0)), (rat(2, 3), int(0)), (int(0), rat(2, 3))]
        );
        let two = gasket_anchors(&GasketSpec::new(2).unwrap());
        assert_eq!(two.len(), 9);
        assert!(two.contains(&(rat(8, 9), int(0))));
    }

    #[test]
    fn cap_enforced() {
        assert!(matches!(
            GasketSpec::new(9),
            Err(Error::DepthCap { depth: 9, cap: 8 })
        ));
        assert!(GasketSpec::with_cap(9, 10).is_ok());
    }

    #[test]
    fn unit_triangle_projections() {
        let g0 = GasketSpec::new(0).unwrap();
        let p = project(&g0, &Direction::Slope(int(1))).unwrap();
        match &p {
            Projection::Exact { scaled, .. } => {
                assert_eq!(
                    scaled,
                    &IntervalUnion::from_pairs([(int(0), int(1))]).unwrap()
                )
            }
            _ => unreachable!(),
        }
        assert!((p.measure() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-12);
        let p = project(&g0, &Direction::Angle(0.0)).unwrap();
        assert!((p.measure() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn depth_one_half_slope() {
        let g1 = GasketSpec::new(1).unwrap();
        let p = project(&g1, &Direction::Slope(rat(1, 2))).unwrap();
        assert!((p.measure() - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        // Brute-force oracle: sample each triangle densely and bucket the projections.
        let theta = 0.5f64.atan();
        let (s, c) = theta.sin_cos();
        let bins = 10_000usize;
        let (lo, hi) = (-0.1, 1.2);
        let mut hit = vec![false; bins];
        let grid = 1500;
        for (u, v) in g1.float_anchors() {
            for a in 0..=grid {
                for b in 0..=(grid - a) {
                    let x = u + a as f64 / grid as f64 / 3.0;
                    let y = v + b as f64 / grid as f64 / 3.0;
                    let z = x * c + y * s;
                    hit[((z - lo) / (hi - lo) * bins as f64) as usize] = true;
                }
            }
        }
        let est = hit.iter().filter(|&&h| h).count() as f64 * (hi - lo) / bins as f64;
        assert!((est - p.measure()).abs() < 1e-3, "{est}");
    }

    #[test]
    fn non_positive_slope_and_bad_angle_rejected() {
        let g = GasketSpec::new(1).unwrap();
        assert!(project(&g, &Direction::Slope(int(0))).is_err());
        assert!(project(&g, &Direction::Angle(f64::NAN)).is_err());
    }

    #[test]
    fn exact_and_numeric_agree() {
        for depth in 0..=5 {
            let g = GasketSpec::new(depth).unwrap();
            for s in [rat(1, 2), rat(1, 1), rat(2, 1), rat(3, 7), rat(5, 3)] {
                let e = project(&g, &Direction::Slope(s.clone())).unwrap().measure();
                let n = projection_measure(&g, to_f64(&s).atan()).unwrap();
                assert!((e - n).abs() < 1e-9, "depth {depth} slope {s}: {e} vs {n}");
            }
        }
    }

    #[test]
    fn favard_of_triangle() {
        let f = favard(&GasketSpec::new(0).unwrap(), 4096).unwrap();
        assert!((f - (2f64.sqrt() + 2.0) / PI).abs() < 5e-3);
        assert!(favard(&GasketSpec::new(0).unwrap(), 8).is_err());
    }

    #[test]
    fn favard_symmetry_reduction_is_exact() {
        // Odd point counts take the unreduced path; both must agree closely.
        let g = GasketSpec::new(3).unwrap();
        let even = favard(&g, 2000).unwrap();
        let odd = favard(&g, 2001).unwrap();
        assert!((even - odd).abs() < 1e-4);
    }

    #[test]
    fn lemma2_examples() {
        let rows = lemma2_check(0.5, &[5.0, 10.0, 20.0, 40.0]).unwrap();
        // Reference ratios from an independent scipy quad evaluation.
        let reference = [
            1.1570508894007747,
            1.0607516198580345,
            1.0271635769461136,
            1.0130009463889418,
        ];
        for (row, r) in rows.iter().zip(reference) {
            assert!((row.ratio - r).abs() < 1e-9, "{row:?}");
        }
        let small_p = lemma2_check(0.01, &[20.0]).unwrap()[0].ratio;
        assert!((small_p - 1.0).abs() < 0.1);
        assert!((small_p - 1.0005282725971134).abs() < 1e-9);
        assert!(lemma2_check(1.0, &[1.0]).is_err());
        assert!(lemma2_check(0.5, &[0.0]).is_err());
    }

    #[test]
    fn lemma2_small_n() {
        // ∫_0^{1/2} e^x x^{-1/2} dx from the series Σ (1/2)^{k+1/2} / (k! (k+1/2)).
        let series: f64 = (0..30)
            .map(|k| {
                let kf = k as f64;
                0.5f64.powf(kf + 0.5) / ((1..=k).map(|i| i as f64).product::<f64>() * (kf + 0.5))
            })
            .sum();
        let row = lemma2_check(0.5, &[0.5]).unwrap()[0];
        assert!((row.integral - series).abs() < 1e-12);
    }

    #[test]
    fn decay_fit_examples() {
        let fit = decay_fit(&[(1.0, 1.0), (2.0, 2f64.powf(-0.5)), (4.0, 0.5)]).unwrap();
        assert!((fit.p - 0.5).abs() < 1e-12);
        assert!(fit.residual < 1e-12);
        assert!((fit.c - 1.0).abs() < 1e-12);
        let fit = decay_fit(&[(1.0, 0.3), (2.0, 0.3), (5.0, 0.3)]).unwrap();
        assert_eq!(fit.p, 0.0);
        assert!(decay_fit(&[(1.0, 1.0), (2.0, 0.0), (3.0, 1.0)]).is_err());
        assert!(decay_fit(&[(1.0, 1.0), (2.0, 1.0)]).is_err());
    }

    #[test]
    fn lemma1_rows() {
        let rows = lemma1_check(1, &[int(0), int(1), rat(1, 2)]).unwrap();
        assert_eq!(rows[0].lhs, int(1));
        assert_eq!(rows[1].lhs, int(1));
        for r in &rows {
            assert!(r.lhs <= r.cantor_bound, "{r:?}");
        }
        // At t = 0 the projection at atan 2 of the depth-0 triangle has width sin φ < 1.
        let r0 = &lemma1_check(0, &[int(0)]).unwrap()[0];
        assert!((r0.rhs - 2.0 / 5f64.sqrt()).abs() < 1e-12);
        assert!(!r0.ok);
    }
}
