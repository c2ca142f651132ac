//! `α(n) = min_σ area(T^n_σ)`: exhaustive search over `Sym(n)` for small
//! `n`, seeded local search beyond that, and scans over `n`.
//!
//! Candidates are screened with the floating-point sweep and only
//! compared exactly when they come within [`SCREEN`] of the champion, so
//! reported minima and argmins are exact.

use std::cmp::Ordering;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational};
use crate::gasket::{decay_fit, DecayFit};
use crate::permutations::{
    composite_sigma, factorial, is_canonical, next_permutation, split_ranks, unrank, Permutation,
};
use crate::trapezoid::{area, SweepKernel, TrapezoidSpec};

/// Largest `n` searched exhaustively without an explicit override.
pub const EXHAUSTIVE_GUARD: usize = 10;

/// Float areas further than this above the champion are rejected without
/// an exact evaluation. The float sweep is accurate to ~1e-15.
const SCREEN: f64 = 1e-9;

/// Work units per worker in the static partition of `Sym(n)`.
const UNITS_PER_WORKER: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SearchMode {
    Exhaustive,
    Heuristic,
}

impl SearchMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            SearchMode::Exhaustive => "exhaustive",
            SearchMode::Heuristic => "heuristic",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaRecord {
    pub n: usize,
    /// Exact minimum (exhaustive) or best area found (heuristic, an upper bound).
    pub alpha: Rational,
    /// Lexicographically least permutation attaining `alpha` among those seen.
    pub argmin: Permutation,
    pub mode: SearchMode,
    pub perms_evaluated: u64,
    pub wall_time: Duration,
}

impl AlphaRecord {
    /// Equality ignoring `wall_time`.
    pub fn same_result(&self, other: &AlphaRecord) -> bool {
        AlphaRecord {
            wall_time: other.wall_time,
            ..self.clone()
        } == *other
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExhaustiveOptions {
    pub use_symmetry: bool,
    pub workers: usize,
    pub override_guard: bool,
}

impl Default for ExhaustiveOptions {
    fn default() -> Self {
        ExhaustiveOptions {
            use_symmetry: true,
            workers: 1,
            override_guard: false,
        }
    }
}

/// Running minimum ordered by (area, lexicographic image).
struct Champion {
    approx: f64,
    exact: Rational,
    image: Vec<usize>,
}

impl Champion {
    fn better_than(&self, other: &Champion) -> bool {
        match self.exact.cmp(&other.exact) {
            Ordering::Less => true,
            Ordering::Greater => false,
            Ordering::Equal => self.image < other.image,
        }
    }

    /// Offers a candidate; returns true when it became the champion.
    fn offer(
        slot: &mut Option<Champion>,
        kernel: &mut SweepKernel,
        image: &[usize],
        approx: f64,
    ) -> bool {
        if let Some(c) = slot {
            if approx > c.approx + SCREEN {
                return false;
            }
        }
        let cand = Champion {
            approx,
            exact: kernel.area_exact(image),
            image: image.to_vec(),
        };
        match slot {
            Some(c) if !cand.better_than(c) => false,
            _ => {
                *slot = Some(cand);
                true
            }
        }
    }
}

fn check_n(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            value: "0".into(),
            range: "n >= 1",
        });
    }
    Ok(())
}

/// Exact `α(n)` by enumerating `Sym(n)`. Output is independent of the
/// worker count and of `use_symmetry` (apart from `perms_evaluated`).
pub fn alpha_exhaustive(n: usize, opts: ExhaustiveOptions) -> Result<AlphaRecord> {
    check_n(n)?;
    if n > EXHAUSTIVE_GUARD && !opts.override_guard {
        return Err(Error::SearchGuard {
            n,
            guard: EXHAUSTIVE_GUARD,
        });
    }
    let start = Instant::now();
    let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    let workers = opts.workers.max(1);
    let units = split_ranks(total, workers * UNITS_PER_WORKER);

    let results: Vec<(Option<Champion>, u64)> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let mine: Vec<(u64, u64)> =
                    units.iter().copied().skip(w).step_by(workers).collect();
                scope.spawn(move || search_ranges(n, &mine, opts.use_symmetry))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("search worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;

    let mut best: Option<Champion> = None;
    let mut evaluated = 0;
    for (champ, count) in results {
        evaluated += count;
        if let Some(c) = champ {
            if best.as_ref().is_none_or(|b| c.better_than(b)) {
                best = Some(c);
            }
        }
    }
    let best = best.expect("Sym(n) has a canonical element");
    Ok(AlphaRecord {
        n,
        alpha: best.exact,
        argmin: Permutation::from_image_unchecked(best.image),
        mode: SearchMode::Exhaustive,
        perms_evaluated: evaluated,
        wall_time: start.elapsed(),
    })
}

fn search_ranges(
    n: usize,
    ranges: &[(u64, u64)],
    use_symmetry: bool,
) -> Result<(Option<Champion>, u64)> {
    let mut kernel = SweepKernel::new();
    let mut scratch = Vec::with_capacity(n);
    let mut best: Option<Champion> = None;
    let mut evaluated = 0u64;
    for &(start, count) in ranges {
        let mut image = unrank(n, start)?.image().to_vec();
        for i in 0..count {
            if i > 0 {
                next_permutation(&mut image);
            }
            if use_symmetry && !is_canonical(&image, &mut scratch) {
                continue;
            }
            evaluated += 1;
            let approx = kernel.area_f64(&image);
            Champion::offer(&mut best, &mut kernel, &image, approx);
        }
    }
    Ok((best, evaluated))
}

/// Upper bound on `α(n)` from seeded local search over adjacent
/// transpositions with random restarts. Seeds are the identity, the
/// reversal and the composite digit-swap permutation. When `n!` fits in
/// the budget every permutation is visited instead.
pub fn alpha_heuristic(n: usize, budget: u64, seed: u64) -> Result<AlphaRecord> {
    if n < 2 {
        return Err(Error::OutOfRange {
            what: "n",
            value: n.to_string(),
            range: "n >= 2",
        });
    }
    if budget == 0 {
        return Err(Error::InvalidArgument("budget must be positive".into()));
    }
    let start = Instant::now();
    let mut kernel = SweepKernel::new();
    let mut best: Option<Champion> = None;
    let mut evaluated = 0u64;

    if factorial(n).is_some_and(|f| f <= budget) {
        let mut image: Vec<usize> = (1..=n).collect();
        loop {
            evaluated += 1;
            let approx = kernel.area_f64(&image);
            Champion::offer(&mut best, &mut kernel, &image, approx);
            if !next_permutation(&mut image) {
                break;
            }
        }
    } else {
        let seeds = [
            Permutation::identity(n)?,
            Permutation::reversal(n)?,
            composite_sigma(n)?,
        ];
        for s in &seeds {
            evaluated += 1;
            let approx = kernel.area_f64(s.image());
            Champion::offer(&mut best, &mut kernel, s.image(), approx);
        }
        local_search(n, budget, seed, &mut kernel, &mut best, &mut evaluated);
    }

    let best = best.expect("at least one evaluation");
    Ok(AlphaRecord {
        n,
        alpha: best.exact,
        argmin: Permutation::from_image_unchecked(best.image),
        mode: SearchMode::Heuristic,
        perms_evaluated: evaluated,
        wall_time: start.elapsed(),
    })
}

fn local_search(
    n: usize,
    budget: u64,
    seed: u64,
    kernel: &mut SweepKernel,
    best: &mut Option<Champion>,
    evaluated: &mut u64,
) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let champion = best.as_ref().expect("seeds evaluated");
    let mut current = champion.image.clone();
    let mut current_area = champion.approx;
    let mut restarts = 0u64;

    while *evaluated < budget {
        let mut improved = false;
        let offset = rng.gen_range(0..n - 1);
        for step in 0..n - 1 {
            if *evaluated >= budget {
                return;
            }
            let i = (offset + step) % (n - 1);
            current.swap(i, i + 1);
            *evaluated += 1;
            let approx = kernel.area_f64(&current);
            Champion::offer(best, kernel, &current, approx);
            if approx < current_area - 1e-12 {
                current_area = approx;
                improved = true;
            } else {
                current.swap(i, i + 1);
            }
        }
        if improved {
            continue;
        }
        // Local optimum: restart from a perturbed champion, or every
        // fourth time from a uniformly random permutation.
        restarts += 1;
        if restarts.is_multiple_of(4) {
            current.shuffle(&mut rng);
        } else {
            current.clone_from(&best.as_ref().expect("champion").image);
            let kicks = rng.gen_range(2..=(n / 4).max(2));
            for _ in 0..kicks {
                let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
                current.swap(a, b);
            }
        }
        if *evaluated >= budget {
            return;
        }
        *evaluated += 1;
        current_area = kernel.area_f64(&current);
        Champion::offer(best, kernel, &current, current_area);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScanOptions {
    /// `n` up to this value is searched exhaustively; larger `n` heuristically.
    pub exhaustive_max: usize,
    pub use_symmetry: bool,
    pub workers: usize,
    pub budget: u64,
    pub seed: u64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            exhaustive_max: 8,
            use_symmetry: true,
            workers: 1,
            budget: 10_000,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MonotonicityViolation {
    pub n: usize,
    pub alpha_n: Rational,
    pub alpha_next: Rational,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaScan {
    pub records: Vec<AlphaRecord>,
    /// Adjacent exact pairs with `α(n+1) > α(n)`.
    pub violations: Vec<MonotonicityViolation>,
    /// `(n, α(n)·ln n)` for `n >= 2`.
    pub c_estimates: Vec<(usize, f64)>,
    /// `(n, area(T^n_{σ_n}))` for the composite construction.
    pub upper_bound: Vec<(usize, Rational)>,
    /// Fit of the upper bound against `C / (ln n)^p` over `n >= 3`.
    pub upper_bound_fit: Option<DecayFit>,
}

pub fn alpha_scan(max_n: usize, opts: ScanOptions) -> Result<AlphaScan> {
    if max_n < 2 {
        return Err(Error::OutOfRange {
            what: "max_n",
            value: max_n.to_string(),
            range: "max_n >= 2",
        });
    }
    let mut records = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let rec = if n <= opts.exhaustive_max || n == 1 {
            alpha_exhaustive(
                n,
                ExhaustiveOptions {
                    use_symmetry: opts.use_symmetry,
                    workers: opts.workers,
                    override_guard: true,
                },
            )?
        } else {
            alpha_heuristic(n, opts.budget, opts.seed)?
        };
        records.push(rec);
    }
    let violations = records
        .windows(2)
        .filter(|w| {
            w[0].mode == SearchMode::Exhaustive
                && w[1].mode == SearchMode::Exhaustive
                && w[1].alpha > w[0].alpha
        })
        .map(|w| MonotonicityViolation {
            n: w[0].n,
            alpha_n: w[0].alpha.clone(),
            alpha_next: w[1].alpha.clone(),
        })
        .collect();
    let c_estimates = records
        .iter()
        .filter(|r| r.n >= 2)
        .map(|r| (r.n, to_f64(&r.alpha) * (r.n as f64).ln()))
        .collect();
    let upper_bound = (1..=max_n)
        .map(|n| Ok((n, area(&TrapezoidSpec::new(composite_sigma(n)?)?))))
        .collect::<Result<Vec<_>>>()?;
    let fit_pairs: Vec<(f64, f64)> = upper_bound
        .iter()
        .filter(|(n, _)| *n >= 3)
        .map(|(n, a)| ((*n as f64).ln(), to_f64(a)))
        .collect();
    let upper_bound_fit = if fit_pairs.len() >= 3 {
        Some(decay_fit(&fit_pairs)?)
    } else {
        None
    };
    Ok(AlphaScan {
        records,
        violations,
        c_estimates,
        upper_bound,
        upper_bound_fit,
    })
}

/// Draws a uniformly random permutation of `{1..n}`.
pub fn random_permutation<R: Rng>(n: usize, rng: &mut R) -> Result<Permutation> {
    let mut p = Permutation::identity(n)?.image().to_vec();
    p.shuffle(rng);
    Ok(Permutation::from_image_unchecked(p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::rat;

    fn exhaustive(n: usize, sym: bool, workers: usize) -> AlphaRecord {
        alpha_exhaustive(
            n,
            ExhaustiveOptions {
                use_symmetry: sym,
                workers,
                override_guard: false,
            },
        )
        .unwrap()
    }

    #[test]
    fn small_alphas() {
        let r = exhaustive(1, true, 1);
        assert_eq!(
            (r.alpha.clone(), r.argmin.to_string()),
            (rat(1, 1), "1".into())
        );
        let r = exhaustive(2, true, 1);
        assert_eq!(
            (r.alpha.clone(), r.argmin.to_string()),
            (rat(3, 4), "2,1".into())
        );
        let r = exhaustive(3, true, 1);
        assert_eq!(
            (r.alpha.clone(), r.argmin.to_string()),
            (rat(2, 3), "3,2,1".into())
        );
    }

    #[test]
    fn symmetry_pruning_is_sound() {
        for n in 1..=6 {
            let a = exhaustive(n, true, 1);
            let b = exhaustive(n, false, 1);
            assert_eq!((a.alpha, a.argmin), (b.alpha, b.argmin), "n = {n}");
            assert!(a.perms_evaluated < b.perms_evaluated || n <= 2);
            assert_eq!(b.perms_evaluated, factorial(n).unwrap());
        }
    }

    #[test]
    fn worker_count_does_not_matter() {
        let a = exhaustive(6, true, 1);
        for w in [2, 3, 8] {
            assert!(a.same_result(&exhaustive(6, true, w)));
        }
    }

    #[test]
    fn guard() {
        let err = alpha_exhaustive(11, ExhaustiveOptions::default()).unwrap_err();
        assert!(matches!(err, Error::SearchGuard { n: 11, guard: 10 }));
        assert!(alpha_exhaustive(0, ExhaustiveOptions::default()).is_err());
    }

    #[test]
    fn heuristic_examples() {
        let r = alpha_heuristic(3, 1, 7).unwrap();
        assert!(r.alpha <= rat(2, 3));
        let r = alpha_heuristic(2, 5, 7).unwrap();
        assert_eq!(r.alpha, rat(3, 4));
        let seed_area =
            area(&TrapezoidSpec::new(crate::permutations::digit_swap_perm(2).unwrap()).unwrap());
        let r = alpha_heuristic(9, 10_000, 1).unwrap();
        assert!(r.alpha <= seed_area);
        assert_eq!(r.perms_evaluated, 10_000);
        assert!(alpha_heuristic(1, 10, 0).is_err());
    }

    #[test]
    fn heuristic_is_deterministic_per_seed() {
        let a = alpha_heuristic(12, 3000, 42).unwrap();
        let b = alpha_heuristic(12, 3000, 42).unwrap();
        assert!(a.same_result(&b));
    }

    #[test]
    fn heuristic_never_beats_exhaustive() {
        for n in 2..=7 {
            let exact = exhaustive(n, true, 2);
            let h = alpha_heuristic(n, 500, 3).unwrap();
            assert!(exact.alpha <= h.alpha, "n = {n}");
        }
    }

    #[test]
    fn scan_to_three() {
        let scan = alpha_scan(3, ScanOptions::default()).unwrap();
        let alphas: Vec<_> = scan.records.iter().map(|r| r.alpha.clone()).collect();
        assert_eq!(alphas, vec![rat(1, 1), rat(3, 4), rat(2, 3)]);
        assert!(scan.violations.is_empty());
        assert!(scan.upper_bound_fit.is_none());
    }
}
