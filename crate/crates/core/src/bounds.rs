//! Counting formulas and lower bounds, in exact integer arithmetic.

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Exact `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> Result<BigUint> {
    if k > n {
        return Err(Error::domain("binomial", format!("k={k} exceeds n={n}")));
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        // acc = C(n, i) here, so acc * (n - i) is divisible by i + 1.
        acc = acc * (n - i) / (i + 1);
    }
    Ok(acc)
}

fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * i)
}

fn check_game(op: &'static str, n: u64, d: u64) -> Result<()> {
    if d == 0 || d > n {
        return Err(Error::domain(op, format!("need 1 <= d <= n, got n={n}, d={d}")));
    }
    Ok(())
}

/// Smallest `t` with `(d + 2)^t >= C(n, d)`.
///
/// Every query has at most `d + 2` distinguishable answers and a correct
/// strategy must separate all `C(n, d)` live sets, so no strategy can finish
/// in fewer rounds.
pub fn info_lower_bound(n: u64, d: u64) -> Result<u32> {
    check_game("info_lower_bound", n, d)?;
    let outcomes = binomial(n, d)?;
    let base = BigUint::from(d + 2);
    let mut power = BigUint::one();
    let mut t = 0;
    while power < outcomes {
        power *= &base;
        t += 1;
    }
    Ok(t)
}

/// `sum_{h=d}^{x} C(h, d) 2^(h-d) d!`: the number of red/black edge patterns
/// of length at most `x` with exactly `d` black edges whose transmitters are
/// ordered.
pub fn path_count_bound(x: u64, d: u64) -> Result<BigUint> {
    if d == 0 || x < d {
        return Err(Error::domain(
            "path_count_bound",
            format!("need x >= d >= 1, got x={x}, d={d}"),
        ));
    }
    let ordered = factorial(d);
    let mut total = BigUint::zero();
    for h in d..=x {
        total += binomial(h, d)? * (BigUint::one() << (h - d)) * &ordered;
    }
    Ok(total)
}

/// Per-path labelling factor in the path-counting bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Factor {
    /// `d!`
    Factorial,
    /// `d^d`
    Power,
}

impl Factor {
    fn value(self, d: u64) -> BigUint {
        match self {
            Factor::Factorial => factorial(d),
            Factor::Power => BigUint::from(d).pow(d as u32),
        }
    }
}

/// `C(x, d) 2^(x + 1 - d) F` for `x >= d`.
pub fn paths_upper_envelope(x: u64, d: u64, factor: Factor) -> Result<BigUint> {
    if d == 0 || x < d {
        return Err(Error::domain(
            "paths_upper_envelope",
            format!("need x >= d >= 1, got x={x}, d={d}"),
        ));
    }
    Ok(binomial(x, d)? * (BigUint::one() << (x + 1 - d)) * factor.value(d))
}

/// Smallest `x >= d` with `C(x, d) 2^(x + 1 - d) F >= C(n, d)`, found by an
/// upward scan.
pub fn claimed_bound_combinatorial(n: u64, d: u64, factor: Factor) -> Result<u64> {
    check_game("claimed_bound_combinatorial", n, d)?;
    let target = binomial(n, d)?;
    let mut x = d;
    while paths_upper_envelope(x, d, factor)? < target {
        x += 1;
    }
    Ok(x)
}

/// Fractional bits used by [`claimed_bound_analytic`]: 128 bits is about 38
/// significant decimal digits for the magnitudes involved.
pub const ANALYTIC_PRECISION_BITS: u32 = 128;

const MAX_PRECISION_BITS: u32 = 8192;

/// Smallest integer `x >= 1` with
/// `x + d lg x >= d lg n - d lg d - d lg e - d + 1`.
///
/// Both sides are evaluated in certified interval arithmetic; if an interval
/// cannot decide the comparison the precision is doubled and the test
/// repeated.
pub fn claimed_bound_analytic(n: u64, d: u64) -> Result<u64> {
    claimed_bound_analytic_with_precision(n, d, ANALYTIC_PRECISION_BITS)
}

pub fn claimed_bound_analytic_with_precision(n: u64, d: u64, bits: u32) -> Result<u64> {
    check_game("claimed_bound_analytic", n, d)?;
    if n < 2 {
        return Err(Error::domain("claimed_bound_analytic", "need n >= 2"));
    }
    let mut x = 1;
    loop {
        if analytic_holds(n, d, x, bits)? {
            return Ok(x);
        }
        x += 1;
    }
}

/// Decides the analytic inequality at `x`, refining precision on ties.
fn analytic_holds(n: u64, d: u64, x: u64, bits: u32) -> Result<bool> {
    let mut bits = bits.max(32);
    loop {
        let margin = analytic_margin(n, d, x, bits);
        if !margin.lo.is_negative() {
            return Ok(true);
        }
        if margin.hi.is_negative() {
            return Ok(false);
        }
        if bits >= MAX_PRECISION_BITS {
            return Err(Error::domain(
                "claimed_bound_analytic",
                format!("cannot separate the two sides at x={x} with {bits} bits"),
            ));
        }
        bits *= 2;
    }
}

/// `(LHS - RHS) * ln 2`, which has the sign of `LHS - RHS`:
/// `(x + d - 1) ln 2 + d ln x - d ln n + d ln d + d`.
fn analytic_margin(n: u64, d: u64, x: u64, bits: u32) -> Bracket {
    let w = bits + 16;
    let ln2 = ln2_bracket(w);
    let mut acc = ln2.scaled(x + d - 1);
    acc = acc.add(&ln_bracket(x, w, &ln2).scaled(d));
    acc = acc.sub(&ln_bracket(n, w, &ln2).scaled(d));
    acc = acc.add(&ln_bracket(d, w, &ln2).scaled(d));
    acc.add(&Bracket::exact(BigInt::from(d) << w))
}

/// A closed interval `[lo, hi] / 2^w` containing some real number.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Bracket {
    lo: BigInt,
    hi: BigInt,
}

impl Bracket {
    fn exact(v: BigInt) -> Self {
        Self { lo: v.clone(), hi: v }
    }

    fn add(&self, other: &Self) -> Self {
        Self {
            lo: &self.lo + &other.lo,
            hi: &self.hi + &other.hi,
        }
    }

    fn sub(&self, other: &Self) -> Self {
        Self {
            lo: &self.lo - &other.hi,
            hi: &self.hi - &other.lo,
        }
    }

    fn scaled(&self, k: u64) -> Self {
        Self {
            lo: &self.lo * k,
            hi: &self.hi * k,
        }
    }
}

fn div_floor(num: &BigInt, den: &BigInt) -> BigInt {
    num.div_floor(den)
}

fn div_ceil(num: &BigInt, den: &BigInt) -> BigInt {
    -((-num).div_floor(den))
}

/// `2 atanh(a / b) = ln((b + a) / (b - a))` for `0 <= a < b / 2`, as a
/// bracket at scale `2^w`.
fn two_atanh_bracket(a: u128, b: u128, w: u32) -> Bracket {
    if a == 0 {
        return Bracket::exact(BigInt::zero());
    }
    let (a, b) = (BigInt::from(a), BigInt::from(b));
    let one = BigInt::one() << w;
    let mut lo = BigInt::zero();
    let mut hi = BigInt::zero();
    // z^(2j+1) / (2j+1) with z = a/b; every term is positive, so partial sums
    // of floored terms bound from below and ceiled terms plus the tail bound
    // from above.
    let a2 = &a * &a;
    let b2 = &b * &b;
    let mut num = a.clone();
    let mut den = b.clone();
    let mut j = 0u64;
    loop {
        let k = BigInt::from(2 * j + 1);
        let scaled = &num * &one;
        let term_den = &den * &k;
        lo += div_floor(&scaled, &term_den);
        hi += div_ceil(&scaled, &term_den);
        num *= &a2;
        den *= &b2;
        j += 1;
        // Tail: sum_{i>=j} z^(2i+1)/(2i+1) <= z^(2j+1) / ((2j+1)(1 - z^2)).
        let k = BigInt::from(2 * j + 1);
        let tail_num = &num * &b2 * &one;
        let tail_den = &den * &k * (&b2 - &a2);
        let tail = div_ceil(&tail_num, &tail_den);
        if tail <= BigInt::one() {
            hi += tail;
            break;
        }
    }
    Bracket {
        lo: lo << 1,
        hi: hi << 1,
    }
}

/// `ln 2 = 2 atanh(1/3)`.
fn ln2_bracket(w: u32) -> Bracket {
    two_atanh_bracket(1, 3, w)
}

/// `ln m = k ln 2 + ln(m / 2^k)` with `2^k <= m < 2^(k+1)`.
fn ln_bracket(m: u64, w: u32, ln2: &Bracket) -> Bracket {
    debug_assert!(m >= 1);
    let k = 63 - m.leading_zeros();
    let (m, base) = (u128::from(m), 1u128 << k);
    // m / 2^k = (b + a) / (b - a) with a = m - 2^k, b = m + 2^k.
    let frac = two_atanh_bracket(m - base, m + base, w);
    ln2.scaled(u64::from(k)).add(&frac)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn big(v: u64) -> BigUint {
        BigUint::from(v)
    }

    /// Pascal's triangle, row by row.
    fn pascal(n: u64, k: u64) -> BigUint {
        let mut row = vec![BigUint::one()];
        for _ in 0..n {
            let mut next = vec![BigUint::one(); row.len() + 1];
            for i in 1..row.len() {
                next[i] = &row[i - 1] + &row[i];
            }
            row = next;
        }
        row[k as usize].clone()
    }

    #[test]
    fn binomial_examples() {
        assert_eq!(binomial(8, 2).unwrap(), big(28));
        assert_eq!(binomial(17, 0).unwrap(), big(1));
        assert_eq!(binomial(30, 15).unwrap(), big(155_117_520));
        assert_eq!(pascal(30, 15), big(155_117_520));
        assert_eq!(binomial(2, 3).unwrap_err().name(), "DomainError");
    }

    #[test]
    fn binomial_matches_pascal() {
        for n in 0..=60 {
            for k in 0..=n {
                assert_eq!(binomial(n, k).unwrap(), pascal(n, k), "C({n},{k})");
            }
        }
    }

    #[test]
    fn info_bound_examples() {
        assert_eq!(info_lower_bound(8, 2).unwrap(), 3);
        assert_eq!(info_lower_bound(5, 5).unwrap(), 0);
        assert_eq!(info_lower_bound(4, 1).unwrap(), 2);
        assert_eq!(info_lower_bound(3, 2).unwrap(), 1);
        assert!(info_lower_bound(3, 0).is_err());
        assert!(info_lower_bound(3, 4).is_err());
    }

    #[test]
    fn path_count_examples() {
        assert_eq!(path_count_bound(2, 2).unwrap(), big(2));
        assert_eq!(path_count_bound(3, 2).unwrap(), big(14));
        for d in 1..=8 {
            assert_eq!(path_count_bound(d, d).unwrap(), factorial(d));
        }
        assert!(path_count_bound(1, 2).is_err());
    }

    #[test]
    fn combinatorial_examples() {
        assert_eq!(claimed_bound_combinatorial(2, 2, Factor::Factorial).unwrap(), 2);
        assert_eq!(claimed_bound_combinatorial(8, 2, Factor::Factorial).unwrap(), 4);
        for n in 1..=300u64 {
            let x = claimed_bound_combinatorial(n, 1, Factor::Power).unwrap();
            let least = (1..).find(|&x: &u64| x << x >= n).unwrap();
            assert_eq!(x, least, "n={n}");
        }
    }

    #[test]
    fn analytic_examples() {
        assert_eq!(claimed_bound_analytic(1024, 1).unwrap(), 6);
        assert_eq!(claimed_bound_analytic(2, 1).unwrap(), 1);
        assert!(claimed_bound_analytic(2048, 1).unwrap() >= 6);
        assert!(claimed_bound_analytic(1, 1).is_err());
    }

    #[test]
    fn analytic_matches_float_away_from_ties() {
        let lg_e = std::f64::consts::LOG2_E;
        for n in 2..=400u64 {
            for d in 1..=n.min(12) {
                let (nf, df) = (n as f64, d as f64);
                let rhs = df * nf.log2() - df * df.log2() - df * lg_e - df + 1.0;
                let lhs = |x: f64| x + df * x.log2();
                let float = (1..).find(|&x| lhs(x as f64) >= rhs).unwrap();
                // Only trust the float scan when it is not borderline.
                let clear = (lhs(float as f64) - rhs).abs() > 1e-9
                    && (float == 1 || (lhs(float as f64 - 1.0) - rhs).abs() > 1e-9);
                if clear {
                    assert_eq!(claimed_bound_analytic(n, d).unwrap(), float, "n={n} d={d}");
                }
            }
        }
    }

    #[test]
    fn ln_brackets_are_tight_and_correct() {
        let w = 200;
        let ln2 = ln2_bracket(w);
        assert!(&ln2.hi - &ln2.lo < BigInt::from(1024));
        for m in [1u64, 2, 3, 7, 10, 1000, 1 << 40, u64::MAX] {
            let b = ln_bracket(m, w, &ln2);
            assert!(b.lo <= b.hi);
            let approx = (m as f64).ln();
            let scale = 2f64.powi(w as i32);
            let lo = b.lo.to_string().parse::<f64>().unwrap() / scale;
            let hi = b.hi.to_string().parse::<f64>().unwrap() / scale;
            assert!((lo - approx).abs() < 1e-12 && (hi - approx).abs() < 1e-12, "m={m}");
        }
        // ln 2 to 30 digits.
        let digits = (&ln2.lo * BigInt::from(10u64).pow(30)) >> w;
        assert_eq!(digits.to_string(), "693147180559945309417232121458");
    }

    #[test]
    fn precision_does_not_change_answers() {
        for (n, d) in [(1024, 1), (1000, 3), (77, 5), (2, 2), (4096, 7)] {
            let base = claimed_bound_analytic(n, d).unwrap();
            assert_eq!(claimed_bound_analytic_with_precision(n, d, 64).unwrap(), base);
            assert_eq!(claimed_bound_analytic_with_precision(n, d, 512).unwrap(), base);
        }
    }

    proptest! {
        #[test]
        fn binomial_symmetry_and_absorption(n in 1u64..200, k in 0u64..200) {
            prop_assume!(k <= n);
            prop_assert_eq!(binomial(n, k).unwrap(), binomial(n, n - k).unwrap());
            if k >= 1 {
                // k C(n, k) = n C(n-1, k-1)
                prop_assert_eq!(binomial(n, k).unwrap() * k, binomial(n - 1, k - 1).unwrap() * n);
            }
        }

        #[test]
        fn path_count_summation_order(x in 1u64..40, d in 1u64..10) {
            prop_assume!(d <= x);
            let backwards = (d..=x)
                .rev()
                .map(|h| pascal(h, d) * (BigUint::one() << (h - d)) * factorial(d))
                .fold(BigUint::zero(), |a, b| a + b);
            prop_assert_eq!(path_count_bound(x, d).unwrap(), backwards);
        }

        #[test]
        fn power_variant_never_exceeds_factorial(n in 1u64..5000, d in 1u64..40) {
            prop_assume!(d <= n);
            let power = claimed_bound_combinatorial(n, d, Factor::Power).unwrap();
            let fact = claimed_bound_combinatorial(n, d, Factor::Factorial).unwrap();
            prop_assert!(power <= fact);
        }
    }
}
