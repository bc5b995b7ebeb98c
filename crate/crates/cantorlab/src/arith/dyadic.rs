use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::ArithError;

/// Exact rational `numerator / 2^exponent`.
///
/// Values are kept canonical (odd numerator, or zero with exponent 0), so
/// structural equality is value equality.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigInt,
    exp: u64,
}

impl Dyadic {
    pub fn new(num: BigInt, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.canonicalize();
        d
    }

    pub fn from_int(n: i64) -> Self {
        Dyadic::new(BigInt::from(n), 0)
    }

    /// `2^{-n}`.
    pub fn pow2_neg(n: u64) -> Self {
        Dyadic { num: BigInt::one(), exp: n }
    }

    pub fn numerator(&self) -> &BigInt {
        &self.num
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    fn canonicalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(self.exp);
        if shift > 0 {
            self.num >>= shift as usize;
            self.exp -= shift;
        }
    }

    /// Idempotent normalisation, exposed for callers that assemble raw parts.
    pub fn canonical(&self) -> Self {
        Dyadic::new(self.num.clone(), self.exp)
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.num.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.num.is_negative()
    }

    pub fn abs(&self) -> Self {
        Dyadic { num: self.num.abs(), exp: self.exp }
    }

    /// Multiply by `2^k` for a signed shift `k`.
    pub fn scale_pow2(&self, k: i64) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        if k >= 0 {
            let k = k as u64;
            if k <= self.exp {
                Dyadic { num: self.num.clone(), exp: self.exp - k }
            } else {
                Dyadic { num: &self.num << ((k - self.exp) as usize), exp: 0 }
            }
        } else {
            Dyadic { num: self.num.clone(), exp: self.exp + k.unsigned_abs() }
        }
    }

    pub fn half(&self) -> Self {
        self.scale_pow2(-1)
    }

    /// Largest multiple of `2^{-i}` that is `<= self`.
    pub fn floor_to(&self, i: u64) -> Self {
        if self.exp <= i {
            return self.clone();
        }
        let shift = (self.exp - i) as usize;
        let q = self.num.div_floor(&(BigInt::one() << shift));
        Dyadic::new(q, i)
    }

    /// `⌈−log2 q⌉` for `0 < q ≤ 1`.
    pub fn ceil_neg_log2(&self) -> Result<u64, ArithError> {
        if !self.is_positive() {
            return Err(ArithError::Domain(format!("ceil_neg_log2 needs q > 0, got {self}")));
        }
        if *self > Dyadic::one() {
            return Err(ArithError::Domain(format!("ceil_neg_log2 needs q <= 1, got {self}")));
        }
        // q = n / 2^e with n odd, so 2^{b-1} <= n < 2^b.
        let b = self.num.bits();
        Ok(self.exp - (b - 1))
    }

    /// `⌊log2 q⌋` for `q > 0`, as a signed integer.
    pub fn floor_log2(&self) -> Result<i64, ArithError> {
        if !self.is_positive() {
            return Err(ArithError::Domain(format!("floor_log2 needs q > 0, got {self}")));
        }
        Ok(self.num.bits() as i64 - 1 - self.exp as i64)
    }

    pub fn to_f64(&self) -> f64 {
        let n = self.num.to_f64().unwrap_or(f64::NAN);
        n * 2f64.powi(-(self.exp.min(i32::MAX as u64) as i32))
    }

    fn aligned(a: &Dyadic, b: &Dyadic) -> (BigInt, BigInt, u64) {
        let e = a.exp.max(b.exp);
        let x = &a.num << ((e - a.exp) as usize);
        let y = &b.num << ((e - b.exp) as usize);
        (x, y, e)
    }
}

impl Zero for Dyadic {
    fn zero() -> Self {
        Dyadic { num: BigInt::zero(), exp: 0 }
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
}

impl One for Dyadic {
    fn one() -> Self {
        Dyadic { num: BigInt::one(), exp: 0 }
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.exp == other.exp {
            return self.num.cmp(&other.num);
        }
        let (x, y, _) = Dyadic::aligned(self, other);
        x.cmp(&y)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Add<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: &Dyadic) -> Dyadic {
        let (x, y, e) = Dyadic::aligned(self, rhs);
        Dyadic::new(x + y, e)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;
    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl Sub<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: &Dyadic) -> Dyadic {
        let (x, y, e) = Dyadic::aligned(self, rhs);
        Dyadic::new(x - y, e)
    }
}

impl Sub for Dyadic {
    type Output = Dyadic;
    fn sub(self, rhs: Dyadic) -> Dyadic {
        &self - &rhs
    }
}

impl Mul<&Dyadic> for &Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: &Dyadic) -> Dyadic {
        Dyadic::new(&self.num * &rhs.num, self.exp + rhs.exp)
    }
}

impl Mul for Dyadic {
    type Output = Dyadic;
    fn mul(self, rhs: Dyadic) -> Dyadic {
        &self * &rhs
    }
}

impl Neg for Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num, exp: self.exp }
    }
}

impl Neg for &Dyadic {
    type Output = Dyadic;
    fn neg(self) -> Dyadic {
        Dyadic { num: -self.num.clone(), exp: self.exp }
    }
}

impl Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl<'a> Sum<&'a Dyadic> for Dyadic {
    fn sum<I: Iterator<Item = &'a Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + x)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = ArithError;

    /// Accepts `<num>/2^<exp>`; the value is canonicalised on the way in.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (n, e) = s
            .split_once("/2^")
            .ok_or_else(|| ArithError::Parse(format!("expected <num>/2^<exp>, got {s:?}")))?;
        let num = BigInt::from_str(n).map_err(|_| ArithError::Parse(format!("bad numerator {n:?}")))?;
        let exp = e.parse::<u64>().map_err(|_| ArithError::Parse(format!("bad exponent {e:?}")))?;
        Ok(Dyadic::new(num, exp))
    }
}

impl From<i64> for Dyadic {
    fn from(n: i64) -> Self {
        Dyadic::from_int(n)
    }
}
