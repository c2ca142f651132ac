//! Permutations of `{1..n}` indexing parallelogram families, and the
//! base-3 constructions built from them.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A bijection of `{1..n}` stored as its 1-based image: `image[j-1] = σ(j)`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Permutation {
    image: Vec<usize>,
}

impl Permutation {
    pub fn new(image: Vec<usize>) -> Result<Self> {
        let n = image.len();
        if n == 0 {
            return Err(Error::InvalidPermutation("empty image".into()));
        }
        let mut seen = vec![false; n];
        for &v in &image {
            if v == 0 || v > n {
                return Err(Error::InvalidPermutation(format!("{v} is not in 1..={n}")));
            }
            if std::mem::replace(&mut seen[v - 1], true) {
                return Err(Error::InvalidPermutation(format!("{v} appears twice")));
            }
        }
        Ok(Permutation { image })
    }

    pub(crate) fn from_image_unchecked(image: Vec<usize>) -> Self {
        debug_assert!(Permutation::new(image.clone()).is_ok());
        Permutation { image }
    }

    pub fn identity(n: usize) -> Result<Self> {
        check_positive(n)?;
        Ok(Permutation {
            image: (1..=n).collect(),
        })
    }

    /// `j ↦ n + 1 - j`, the discretized `x ↦ 1 - x`.
    pub fn reversal(n: usize) -> Result<Self> {
        check_positive(n)?;
        Ok(Permutation {
            image: (1..=n).rev().collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.image.len()
    }

    pub fn is_empty(&self) -> bool {
        self.image.is_empty()
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    /// `σ(j)` for 1-based `j`.
    pub fn apply(&self, j: usize) -> usize {
        self.image[j - 1]
    }

    pub fn inverse(&self) -> Permutation {
        let mut inv = vec![0; self.len()];
        for (j, &k) in self.image.iter().enumerate() {
            inv[k - 1] = j + 1;
        }
        Permutation { image: inv }
    }

    /// `r ∘ σ ∘ r` with `r` the reversal.
    pub fn mirrored(&self) -> Permutation {
        let n = self.len();
        Permutation {
            image: self.image.iter().rev().map(|&k| n + 1 - k).collect(),
        }
    }

    pub fn compose(&self, other: &Permutation) -> Result<Permutation> {
        if self.len() != other.len() {
            return Err(Error::InvalidPermutation(format!(
                "cannot compose lengths {} and {}",
                self.len(),
                other.len()
            )));
        }
        Ok(Permutation {
            image: other.image.iter().map(|&k| self.image[k - 1]).collect(),
        })
    }

    pub fn is_identity(&self) -> bool {
        self.image.iter().enumerate().all(|(j, &k)| k == j + 1)
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.image.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

impl FromStr for Permutation {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let image = s
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<usize>()
                    .map_err(|_| Error::InvalidPermutation(format!("bad entry {t:?} in {s:?}")))
            })
            .collect::<Result<Vec<_>>>()?;
        Permutation::new(image)
    }
}

impl TryFrom<String> for Permutation {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Permutation> for String {
    fn from(p: Permutation) -> String {
        p.to_string()
    }
}

fn check_positive(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::OutOfRange {
            what: "n",
            value: "0".into(),
            range: "n >= 1",
        });
    }
    Ok(())
}

pub(crate) fn pow3(m: u32) -> Result<usize> {
    3usize
        .checked_pow(m)
        .ok_or_else(|| Error::Overflow(format!("3^{m}")))
}

/// Swaps base-3 digits 1 and 2 in the low `m` digits of `x`.
fn swap_digits(mut x: usize, m: u32) -> usize {
    let mut out = 0;
    let mut place = 1;
    for _ in 0..m {
        let d = x % 3;
        out += ((2 * d) % 3) * place;
        x /= 3;
        place *= 3;
    }
    out
}

/// The permutation of `3^m` intervals obtained by mapping every base-3
/// digit `d` of `j - 1` to `2d mod 3`.
pub fn digit_swap_perm(m: u32) -> Result<Permutation> {
    let n = pow3(m)?;
    // The image vector alone would be 8·3^m bytes.
    if m > 20 {
        return Err(Error::Overflow(format!("3^{m} intervals")));
    }
    Ok(Permutation {
        image: (0..n).map(|x| swap_digits(x, m) + 1).collect(),
    })
}

/// Base-3 block layout of `n`: `digits` most significant first, `blocks`
/// as `(3^j, x_j)` from the largest size down to 1.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CompositePlan {
    pub n: usize,
    pub digits: Vec<u8>,
    pub blocks: Vec<(usize, u8)>,
}

impl CompositePlan {
    pub fn new(n: usize) -> Result<Self> {
        check_positive(n)?;
        let mut digits = Vec::new();
        let mut rest = n;
        while rest > 0 {
            digits.push((rest % 3) as u8);
            rest /= 3;
        }
        digits.reverse();
        let k = digits.len() - 1;
        let blocks = digits
            .iter()
            .enumerate()
            .map(|(i, &d)| (3usize.pow((k - i) as u32), d))
            .collect();
        Ok(CompositePlan { n, digits, blocks })
    }

    /// Exponent of the block size at position `i` of `blocks`.
    pub fn exponent(&self, i: usize) -> u32 {
        (self.digits.len() - 1 - i) as u32
    }

    pub fn digit_string(&self) -> String {
        self.digits.iter().map(|d| char::from(b'0' + d)).collect()
    }
}

/// Block-diagonal permutation: `x_k` copies of the order-`k` digit swap,
/// then `x_{k-1}` copies of order `k-1`, and so on down to fixed points.
pub fn composite_sigma(n: usize) -> Result<Permutation> {
    let plan = CompositePlan::new(n)?;
    let mut image = Vec::with_capacity(n);
    for (i, &(size, count)) in plan.blocks.iter().enumerate() {
        let m = plan.exponent(i);
        for _ in 0..count {
            let offset = image.len();
            image.extend((0..size).map(|x| offset + swap_digits(x, m) + 1));
        }
    }
    Ok(Permutation { image })
}

/// Lexicographically least of `{σ, σ⁻¹, rσr, rσ⁻¹r}`.
pub fn canonical_class(sigma: &Permutation) -> Permutation {
    let inv = sigma.inverse();
    let candidates = [sigma.mirrored(), inv.mirrored(), inv];
    let mut best = sigma.clone();
    for c in candidates {
        if c < best {
            best = c;
        }
    }
    best
}

/// True when `image` is its own class representative. Allocation-light
/// version of `canonical_class(σ) == σ` for the search loop.
pub(crate) fn is_canonical(image: &[usize], scratch: &mut Vec<usize>) -> bool {
    let n = image.len();
    scratch.clear();
    scratch.resize(n, 0);
    for (j, &k) in image.iter().enumerate() {
        scratch[k - 1] = j + 1;
    }
    // σ⁻¹
    if scratch.as_slice() < image {
        return false;
    }
    // rσ⁻¹r
    if lex_less_mapped(scratch, image) {
        return false;
    }
    // rσr
    !lex_less_mapped(image, image)
}

/// Compares `r ∘ p ∘ r` against `target` lexicographically.
fn lex_less_mapped(p: &[usize], target: &[usize]) -> bool {
    let n = p.len();
    for (i, &t) in target.iter().enumerate() {
        let v = n + 1 - p[n - 1 - i];
        if v != t {
            return v < t;
        }
    }
    false
}

pub fn factorial(n: usize) -> Option<u64> {
    (1..=n as u64).try_fold(1u64, |acc, k| acc.checked_mul(k))
}

/// The permutation of lexicographic rank `rank` (0-based) in `Sym(n)`.
pub fn unrank(n: usize, mut rank: u64) -> Result<Permutation> {
    check_positive(n)?;
    let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    if rank >= total {
        return Err(Error::OutOfRange {
            what: "rank",
            value: rank.to_string(),
            range: "rank < n!",
        });
    }
    let mut pool: Vec<usize> = (1..=n).collect();
    let mut image = Vec::with_capacity(n);
    for i in (0..n).rev() {
        let f = factorial(i).expect("smaller factorial fits");
        let idx = (rank / f) as usize;
        rank %= f;
        image.push(pool.remove(idx));
    }
    Ok(Permutation { image })
}

/// Lexicographic rank of `sigma` within `Sym(n)`.
pub fn rank(sigma: &Permutation) -> Result<u64> {
    let n = sigma.len();
    factorial(n).ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    let mut r = 0u64;
    for (i, &v) in sigma.image.iter().enumerate() {
        let smaller_later = sigma.image[i + 1..].iter().filter(|&&w| w < v).count() as u64;
        r += smaller_later * factorial(n - 1 - i).unwrap();
    }
    Ok(r)
}

/// Advances `image` to its lexicographic successor; false when it was the last.
pub fn next_permutation(image: &mut [usize]) -> bool {
    let n = image.len();
    if n < 2 {
        return false;
    }
    let mut i = n - 1;
    while i > 0 && image[i - 1] >= image[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = n - 1;
    while image[j] <= image[i - 1] {
        j -= 1;
    }
    image.swap(i - 1, j);
    image[i..].reverse();
    true
}

/// Lexicographic stream over a contiguous rank range of `Sym(n)`.
#[derive(Debug, Clone)]
pub struct LexPermutations {
    current: Vec<usize>,
    remaining: u64,
}

impl Iterator for LexPermutations {
    type Item = Permutation;

    fn next(&mut self) -> Option<Permutation> {
        if self.remaining == 0 {
            return None;
        }
        let out = Permutation {
            image: self.current.clone(),
        };
        self.remaining -= 1;
        if self.remaining > 0 {
            next_permutation(&mut self.current);
        }
        Some(out)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let r = usize::try_from(self.remaining).unwrap_or(usize::MAX);
        (r, Some(r))
    }
}

/// All of `Sym(n)` in lexicographic order.
pub fn enumerate(n: usize) -> Result<LexPermutations> {
    let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    enumerate_range(n, 0, total)
}

/// Permutations with lexicographic ranks `start .. start + count`, clipped to `n!`.
pub fn enumerate_range(n: usize, start: u64, count: u64) -> Result<LexPermutations> {
    let total = factorial(n).ok_or_else(|| Error::Overflow(format!("{n}!")))?;
    if start >= total {
        return Ok(LexPermutations {
            current: Vec::new(),
            remaining: 0,
        });
    }
    let first = unrank(n, start)?;
    Ok(LexPermutations {
        current: first.image,
        remaining: count.min(total - start),
    })
}

/// Splits `0..total` into `parts` contiguous `(start, count)` ranges.
pub fn split_ranks(total: u64, parts: usize) -> Vec<(u64, u64)> {
    let parts = parts.max(1) as u64;
    let base = total / parts;
    let extra = total % parts;
    let mut start = 0;
    (0..parts)
        .map(|i| {
            let count = base + u64::from(i < extra);
            let r = (start, count);
            start += count;
            r
        })
        .filter(|&(_, c)| c > 0)
        .collect()
}
