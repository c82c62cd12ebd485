//! Extended precision floating point built from unevaluated sums of `f64`.
//!
//! [`DoubleDouble`] carries roughly 32 significant decimal digits and
//! [`QuadDouble`] roughly 63. Both are `Copy` and implement [`Real`], the
//! scalar abstraction used by the minimax and coefficient code so that the
//! same routines run in `f64`, double-double or quad-double arithmetic.
//!
//! The limb algorithms follow the classic error-free transformations
//! (`two_sum`, `two_prod` via FMA) with the accurate addition and
//! multiplication variants; the exponent range is that of `f64`.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, DivAssign, Mul, MulAssign, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::BuraError;

/// Working precision of a computation, as selected by a digit count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Precision {
    /// IEEE double, 16 digits.
    Double,
    /// Double-double, 32 digits.
    DoubleDouble,
    /// Quad-double, 64 digits.
    QuadDouble,
}

impl Precision {
    /// Smallest backend that carries at least `digits` significant digits.
    pub fn from_digits(digits: u32) -> Result<Self, BuraError> {
        match digits {
            0..=15 => Err(BuraError::InvalidInput(format!(
                "working precision must be at least 16 digits, got {digits}"
            ))),
            16 => Ok(Precision::Double),
            17..=32 => Ok(Precision::DoubleDouble),
            33..=64 => Ok(Precision::QuadDouble),
            _ => Err(BuraError::InvalidInput(format!(
                "working precision above 64 digits is not supported, got {digits}"
            ))),
        }
    }

    pub fn digits(self) -> u32 {
        match self {
            Precision::Double => 16,
            Precision::DoubleDouble => 32,
            Precision::QuadDouble => 64,
        }
    }
}

impl fmt::Display for Precision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.digits())
    }
}

/// Real scalar used throughout the approximation code.
pub trait Real:
    Copy
    + Send
    + Sync
    + PartialOrd
    + PartialEq
    + fmt::Debug
    + fmt::Display
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + 'static
{
    /// Significant decimal digits carried.
    const DIGITS: u32;
    const PRECISION: Precision;

    fn from_f64(x: f64) -> Self;
    /// Nearest `f64` (the leading limb).
    fn to_f64(self) -> f64;
    /// Unit roundoff.
    fn epsilon() -> f64;
    /// Limbs, most significant first; trailing limbs may be zero.
    fn limbs(self) -> Vec<f64>;
    /// Rebuild from limbs; the sum is renormalized.
    fn from_limbs(limbs: &[f64]) -> Self;

    fn mul_f64(self, b: f64) -> Self {
        self * Self::from_f64(b)
    }

    fn zero() -> Self {
        Self::from_f64(0.0)
    }

    fn one() -> Self {
        Self::from_f64(1.0)
    }

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }

    /// Exact multiplication by `2^e`.
    fn ldexp(self, e: i32) -> Self;

    fn ln2() -> Self;

    fn abs(self) -> Self {
        if self.to_f64() < 0.0 || (self.to_f64() == 0.0 && self < Self::zero()) {
            -self
        } else {
            self
        }
    }

    fn is_finite(self) -> bool {
        self.to_f64().is_finite()
    }

    fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    fn recip(self) -> Self {
        Self::one() / self
    }

    fn floor(self) -> Self {
        let limbs = self.limbs();
        let mut out = vec![0.0; limbs.len()];
        for (i, &l) in limbs.iter().enumerate() {
            let fl = l.floor();
            out[i] = fl;
            if fl != l {
                break;
            }
        }
        Self::from_limbs(&out)
    }

    fn sqrt(self) -> Self {
        let a0 = self.to_f64();
        if a0 <= 0.0 {
            return if a0 == 0.0 { Self::zero() } else { Self::from_f64(f64::NAN) };
        }
        if Self::DIGITS <= 16 {
            return Self::from_f64(a0.sqrt());
        }
        // Newton on 1/sqrt(a), then one correction step on sqrt(a) itself.
        let mut x = Self::from_f64(1.0 / a0.sqrt());
        let steps = if Self::DIGITS <= 32 { 1 } else { 2 };
        for _ in 0..steps {
            let corr = Self::one() - self * x * x;
            x += (x * corr).ldexp(-1);
        }
        let y = self * x;
        y + (x * (self - y * y)).ldexp(-1)
    }

    fn exp(self) -> Self {
        let x0 = self.to_f64();
        if Self::DIGITS <= 16 {
            return Self::from_f64(x0.exp());
        }
        if x0 > 709.0 {
            return Self::from_f64(f64::INFINITY);
        }
        if x0 < -745.0 {
            return Self::zero();
        }
        if x0 == 0.0 {
            return Self::one();
        }
        let m = (x0 / std::f64::consts::LN_2).round();
        let r = self - Self::ln2().mul_f64(m);
        const SQUARINGS: i32 = 10;
        let r = r.ldexp(-SQUARINGS);
        // expm1 by Taylor series on the reduced argument.
        let eps = Self::epsilon();
        let mut term = r;
        let mut sum = r;
        let mut n = 1.0;
        loop {
            n += 1.0;
            term = term * r / Self::from_f64(n);
            sum += term;
            if term.to_f64().abs() <= eps * sum.to_f64().abs() * 1e-3 || n > 60.0 {
                break;
            }
        }
        // (1 + p)^2 - 1 = 2p + p^2 keeps the small part exact.
        for _ in 0..SQUARINGS {
            sum = sum.ldexp(1) + sum * sum;
        }
        (sum + Self::one()).ldexp(m as i32)
    }

    fn ln(self) -> Self {
        let a0 = self.to_f64();
        if a0 <= 0.0 {
            return Self::from_f64(if a0 == 0.0 { f64::NEG_INFINITY } else { f64::NAN });
        }
        if Self::DIGITS <= 16 {
            return Self::from_f64(a0.ln());
        }
        // Newton on exp(y) = a; the f64 start is good to about 1e-16 * |ln a|.
        let mut y = Self::from_f64(a0.ln());
        for _ in 0..4 {
            let corr = self * (-y).exp() - Self::one();
            y += corr;
            if corr.to_f64().abs() <= Self::epsilon().sqrt() * 1e-3 {
                break;
            }
        }
        y
    }

    /// `self^e` for `self >= 0`.
    fn powf(self, e: Self) -> Self {
        let a0 = self.to_f64();
        if a0 == 0.0 {
            return if e.to_f64() > 0.0 { Self::zero() } else { Self::from_f64(f64::INFINITY) };
        }
        if Self::DIGITS <= 16 {
            return Self::from_f64(a0.powf(e.to_f64()));
        }
        (e * self.ln()).exp()
    }

    fn powi(self, n: i32) -> Self {
        let mut base = if n < 0 { self.recip() } else { self };
        let mut k = n.unsigned_abs();
        let mut acc = Self::one();
        while k > 0 {
            if k & 1 == 1 {
                acc *= base;
            }
            base = base * base;
            k >>= 1;
        }
        acc
    }

    /// Full-precision lossless text form: limbs in shortest round-trip
    /// decimal, joined by their signs (`1e-1+5.551115123125783e-18`).
    fn to_exact_string(self) -> String {
        let limbs = self.limbs();
        let mut s = format!("{:e}", limbs[0]);
        for &l in limbs[1..].iter().filter(|l| **l != 0.0) {
            if l > 0.0 {
                s.push('+');
            }
            s.push_str(&format!("{l:e}"));
        }
        s
    }

    /// Inverse of [`Real::to_exact_string`]: every `+`/`-` separated part
    /// is one `f64` limb, so `1e-1` means the double nearest 0.1.
    fn parse_exact(s: &str) -> Result<Self, BuraError> {
        let parts = split_limbs(s.trim());
        if parts.len() > Self::PRECISION.limb_count() {
            return Err(BuraError::Parse(format!(
                "`{s}` has more limbs than {} digit precision holds",
                Self::DIGITS
            )));
        }
        let mut limbs = Vec::with_capacity(parts.len());
        for p in parts {
            limbs.push(
                p.parse::<f64>()
                    .map_err(|e| BuraError::Parse(format!("bad limb `{p}` in `{s}`: {e}")))?,
            );
        }
        Ok(Self::from_limbs(&limbs))
    }

    /// Decimal text rounded to this precision; limb sums as written by
    /// [`Real::to_exact_string`] are also accepted.
    fn parse_decimal(s: &str) -> Result<Self, BuraError> {
        if split_limbs(s.trim()).len() > 1 {
            return Self::parse_exact(s);
        }
        parse_decimal(s.trim())
    }

    /// Scientific notation with `digits` significant digits.
    fn to_sci_string(self, digits: usize) -> String {
        format_sci(self, digits)
    }
}

impl Precision {
    fn limb_count(self) -> usize {
        match self {
            Precision::Double => 1,
            Precision::DoubleDouble => 2,
            Precision::QuadDouble => 4,
        }
    }
}

fn split_limbs(s: &str) -> Vec<&str> {
    let bytes = s.as_bytes();
    let mut parts = Vec::new();
    let mut start = 0;
    for i in 1..bytes.len() {
        let c = bytes[i];
        let prev = bytes[i - 1];
        if (c == b'+' || c == b'-') && prev != b'e' && prev != b'E' {
            parts.push(&s[start..i]);
            start = i;
        }
    }
    parts.push(&s[start..]);
    parts
}

fn parse_decimal<T: Real>(s: &str) -> Result<T, BuraError> {
    let bad = || BuraError::Parse(format!("cannot parse `{s}` as a real number"));
    // Fast path for anything f64 represents exactly and for specials.
    if T::DIGITS <= 16 {
        return s.parse::<f64>().map(T::from_f64).map_err(|_| bad());
    }
    let (neg, body) = match s.as_bytes().first() {
        Some(b'-') => (true, &s[1..]),
        Some(b'+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (mant, exp) = match body.find(['e', 'E']) {
        Some(p) => (&body[..p], body[p + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (body, 0),
    };
    if mant.is_empty() {
        return Err(bad());
    }
    let mut acc = T::zero();
    let mut frac_digits = 0i32;
    let mut seen_dot = false;
    let mut any = false;
    for c in mant.chars() {
        match c {
            '0'..='9' => {
                acc = acc * T::from_f64(10.0) + T::from_f64(f64::from(c as u8 - b'0'));
                any = true;
                if seen_dot {
                    frac_digits += 1;
                }
            }
            '.' if !seen_dot => seen_dot = true,
            _ => return Err(bad()),
        }
    }
    if !any {
        return Err(bad());
    }
    let e10 = exp - frac_digits;
    let scaled = if e10 >= 0 {
        acc * T::from_f64(10.0).powi(e10)
    } else {
        acc / T::from_f64(10.0).powi(-e10)
    };
    Ok(if neg { -scaled } else { scaled })
}

fn format_sci<T: Real>(x: T, digits: usize) -> String {
    let digits = digits.max(1);
    let v = x.to_f64();
    if v == 0.0 || !v.is_finite() {
        return format!("{:.*e}", digits - 1, v);
    }
    let neg = v < 0.0;
    let ax = x.abs();
    let mut e10 = v.abs().log10().floor() as i32;
    let ten = T::from_f64(10.0);
    let mut m = if e10 >= 0 { ax / ten.powi(e10) } else { ax * ten.powi(-e10) };
    if m.to_f64() >= 10.0 {
        m /= ten;
        e10 += 1;
    } else if m.to_f64() < 1.0 {
        m *= ten;
        e10 -= 1;
    }
    let mut ds: Vec<u8> = Vec::with_capacity(digits + 1);
    for _ in 0..=digits {
        let d = m.floor();
        let di = d.to_f64().clamp(0.0, 9.0) as u8;
        ds.push(di);
        m = (m - T::from_f64(f64::from(di))) * ten;
    }
    // Round half up on the guard digit.
    let guard = ds.pop().unwrap_or(0);
    if guard >= 5 {
        let mut i = ds.len();
        loop {
            if i == 0 {
                ds.insert(0, 1);
                ds.pop();
                e10 += 1;
                break;
            }
            i -= 1;
            if ds[i] == 9 {
                ds[i] = 0;
            } else {
                ds[i] += 1;
                break;
            }
        }
    }
    let mut s = String::new();
    if neg {
        s.push('-');
    }
    s.push((b'0' + ds[0]) as char);
    if ds.len() > 1 {
        s.push('.');
        for d in &ds[1..] {
            s.push((b'0' + d) as char);
        }
    }
    s.push_str(&format!("e{e10}"));
    s
}

impl Real for f64 {
    const DIGITS: u32 = 16;
    const PRECISION: Precision = Precision::Double;

    fn from_f64(x: f64) -> Self {
        x
    }
    fn to_f64(self) -> f64 {
        self
    }
    fn epsilon() -> f64 {
        f64::EPSILON / 2.0
    }
    fn limbs(self) -> Vec<f64> {
        vec![self]
    }
    fn from_limbs(limbs: &[f64]) -> Self {
        limbs.iter().sum()
    }
    fn mul_f64(self, b: f64) -> Self {
        self * b
    }
    fn ldexp(self, e: i32) -> Self {
        self * 2f64.powi(e)
    }
    fn ln2() -> Self {
        std::f64::consts::LN_2
    }
    fn abs(self) -> Self {
        f64::abs(self)
    }
    fn floor(self) -> Self {
        f64::floor(self)
    }
}

#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

#[inline]
fn quick_two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let e = b - (s - a);
    (s, e)
}

#[inline]
fn two_prod(a: f64, b: f64) -> (f64, f64) {
    let p = a * b;
    let e = a.mul_add(b, -p);
    (p, e)
}

#[inline]
fn three_sum(a: f64, b: f64, c: f64) -> (f64, f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    let (b, c) = two_sum(t2, t3);
    (a, b, c)
}

#[inline]
fn three_sum2(a: f64, b: f64, c: f64) -> (f64, f64) {
    let (t1, t2) = two_sum(a, b);
    let (a, t3) = two_sum(c, t1);
    (a, t2 + t3)
}

/// Double-double: `hi + lo` with `|lo| <= ulp(hi)/2`.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DoubleDouble {
    hi: f64,
    lo: f64,
}

impl DoubleDouble {
    pub const fn new(hi: f64, lo: f64) -> Self {
        DoubleDouble { hi, lo }
    }

    pub fn hi(self) -> f64 {
        self.hi
    }

    pub fn lo(self) -> f64 {
        self.lo
    }

    fn mul_f64_exact(self, b: f64) -> Self {
        let (p1, p2) = two_prod(self.hi, b);
        let p2 = p2 + self.lo * b;
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl From<f64> for DoubleDouble {
    fn from(x: f64) -> Self {
        DoubleDouble { hi: x, lo: 0.0 }
    }
}

impl Add for DoubleDouble {
    type Output = Self;
    #[inline]
    fn add(self, b: Self) -> Self {
        let (s1, s2) = two_sum(self.hi, b.hi);
        let (t1, t2) = two_sum(self.lo, b.lo);
        let s2 = s2 + t1;
        let (s1, s2) = quick_two_sum(s1, s2);
        let s2 = s2 + t2;
        let (hi, lo) = quick_two_sum(s1, s2);
        DoubleDouble { hi, lo }
    }
}

impl Neg for DoubleDouble {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        DoubleDouble { hi: -self.hi, lo: -self.lo }
    }
}

impl Sub for DoubleDouble {
    type Output = Self;
    #[inline]
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for DoubleDouble {
    type Output = Self;
    #[inline]
    fn mul(self, b: Self) -> Self {
        let (p1, p2) = two_prod(self.hi, b.hi);
        let p2 = p2 + (self.hi * b.lo + self.lo * b.hi);
        let (hi, lo) = quick_two_sum(p1, p2);
        DoubleDouble { hi, lo }
    }
}

impl Div for DoubleDouble {
    type Output = Self;
    #[inline]
    fn div(self, b: Self) -> Self {
        let q1 = self.hi / b.hi;
        let r = self - b.mul_f64_exact(q1);
        let q2 = r.hi / b.hi;
        let r = r - b.mul_f64_exact(q2);
        let q3 = r.hi / b.hi;
        let (q1, q2) = quick_two_sum(q1, q2);
        DoubleDouble { hi: q1, lo: q2 } + DoubleDouble::from(q3)
    }
}

impl PartialOrd for DoubleDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match self.hi.partial_cmp(&other.hi)? {
            Ordering::Equal => self.lo.partial_cmp(&other.lo),
            o => Some(o),
        }
    }
}

/// Quad-double: four non-overlapping limbs, most significant first.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct QuadDouble([f64; 4]);

/// The widest scalar available; coefficient arithmetic happens here.
pub type Extended = QuadDouble;

fn renorm4(c0: f64, c1: f64, c2: f64, c3: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, c1, c2, c3];
    }
    let (s0, c3) = quick_two_sum(c2, c3);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);
    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
        }
    }
    [s0, s1, s2, s3]
}

fn renorm5(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> [f64; 4] {
    if !c0.is_finite() {
        return [c0, c1, c2, c3];
    }
    let (s0, c4) = quick_two_sum(c3, c4);
    let (s0, c3) = quick_two_sum(c2, s0);
    let (s0, c2) = quick_two_sum(c1, s0);
    let (c0, c1) = quick_two_sum(c0, s0);
    let (mut s0, mut s1, mut s2, mut s3) = (c0, c1, 0.0, 0.0);
    if s1 != 0.0 {
        (s1, s2) = quick_two_sum(s1, c2);
        if s2 != 0.0 {
            (s2, s3) = quick_two_sum(s2, c3);
            if s3 != 0.0 {
                s3 += c4;
            } else {
                s2 += c4;
            }
        } else {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        }
    } else {
        (s0, s1) = quick_two_sum(s0, c2);
        if s1 != 0.0 {
            (s1, s2) = quick_two_sum(s1, c3);
            if s2 != 0.0 {
                (s2, s3) = quick_two_sum(s2, c4);
            } else {
                (s1, s2) = quick_two_sum(s1, c4);
            }
        } else {
            (s0, s1) = quick_two_sum(s0, c3);
            if s1 != 0.0 {
                (s1, s2) = quick_two_sum(s1, c4);
            } else {
                (s0, s1) = quick_two_sum(s0, c4);
            }
        }
    }
    [s0, s1, s2, s3]
}

/// Adds `c` into the running pair `(a, b)`; returns a finished limb when
/// the pair overflows, otherwise zero.
#[inline]
fn quick_three_accum(a: &mut f64, b: &mut f64, c: f64) -> f64 {
    let (s, bb) = two_sum(*b, c);
    let (s, aa) = two_sum(*a, s);
    let za = aa != 0.0;
    let zb = bb != 0.0;
    if za && zb {
        *a = aa;
        *b = bb;
        return s;
    }
    if !zb {
        *b = aa;
        *a = s;
    } else {
        *a = s;
        *b = bb;
    }
    0.0
}

impl QuadDouble {
    pub const fn from_array(limbs: [f64; 4]) -> Self {
        QuadDouble(limbs)
    }

    pub fn to_array(self) -> [f64; 4] {
        self.0
    }

    fn mul_f64_exact(self, b: f64) -> Self {
        let a = &self.0;
        let (p0, q0) = two_prod(a[0], b);
        let (p1, q1) = two_prod(a[1], b);
        let (p2, q2) = two_prod(a[2], b);
        let p3 = a[3] * b;
        let s0 = p0;
        let (s1, s2) = two_sum(q0, p1);
        let (s2, q1, p2) = three_sum(s2, q1, p2);
        let (q1, q2) = three_sum2(q1, q2, p3);
        let s3 = q1;
        let s4 = q2 + p2;
        QuadDouble(renorm5(s0, s1, s2, s3, s4))
    }
}

impl From<f64> for QuadDouble {
    fn from(x: f64) -> Self {
        QuadDouble([x, 0.0, 0.0, 0.0])
    }
}

impl From<DoubleDouble> for QuadDouble {
    fn from(x: DoubleDouble) -> Self {
        QuadDouble([x.hi, x.lo, 0.0, 0.0])
    }
}

impl Add for QuadDouble {
    type Output = Self;
    fn add(self, other: Self) -> Self {
        let a = &self.0;
        let b = &other.0;
        let mut x = [0.0f64; 4];
        let (mut i, mut j, mut k) = (0usize, 0usize, 0usize);
        let next = |i: &mut usize, j: &mut usize| -> f64 {
            if *i >= 4 {
                *j += 1;
                b[*j - 1]
            } else if *j >= 4 || a[*i].abs() > b[*j].abs() {
                *i += 1;
                a[*i - 1]
            } else {
                *j += 1;
                b[*j - 1]
            }
        };
        let u0 = next(&mut i, &mut j);
        let v0 = next(&mut i, &mut j);
        let (mut u, mut v) = quick_two_sum(u0, v0);
        while k < 4 {
            if i >= 4 && j >= 4 {
                x[k] = u;
                if k < 3 {
                    k += 1;
                    x[k] = v;
                }
                break;
            }
            let t = next(&mut i, &mut j);
            let s = quick_three_accum(&mut u, &mut v, t);
            if s != 0.0 {
                x[k] = s;
                k += 1;
            }
        }
        for &ai in &a[i.min(4)..] {
            x[3] += ai;
        }
        for &bj in &b[j.min(4)..] {
            x[3] += bj;
        }
        QuadDouble(renorm4(x[0], x[1], x[2], x[3]))
    }
}

impl Neg for QuadDouble {
    type Output = Self;
    fn neg(self) -> Self {
        QuadDouble([-self.0[0], -self.0[1], -self.0[2], -self.0[3]])
    }
}

impl Sub for QuadDouble {
    type Output = Self;
    fn sub(self, b: Self) -> Self {
        self + (-b)
    }
}

impl Mul for QuadDouble {
    type Output = Self;
    fn mul(self, other: Self) -> Self {
        let a = &self.0;
        let b = &other.0;
        let (p0, q0) = two_prod(a[0], b[0]);
        let (p1, q1) = two_prod(a[0], b[1]);
        let (p2, q2) = two_prod(a[1], b[0]);
        let (p3, q3) = two_prod(a[0], b[2]);
        let (p4, q4) = two_prod(a[1], b[1]);
        let (p5, q5) = two_prod(a[2], b[0]);

        let (p1, p2, q0) = three_sum(p1, p2, q0);

        let (p2, q1, q2) = three_sum(p2, q1, q2);
        let (p3, p4, p5) = three_sum(p3, p4, p5);
        let (s0, t0) = two_sum(p2, p3);
        let (s1, t1) = two_sum(q1, p4);
        let mut s2 = q2 + p5;
        let (s1, t0) = two_sum(s1, t0);
        s2 += t0 + t1;

        let (p6, q6) = two_prod(a[0], b[3]);
        let (p7, q7) = two_prod(a[1], b[2]);
        let (p8, q8) = two_prod(a[2], b[1]);
        let (p9, q9) = two_prod(a[3], b[0]);

        let (q0, q3) = two_sum(q0, q3);
        let (q4, q5) = two_sum(q4, q5);
        let (p6, p7) = two_sum(p6, p7);
        let (p8, p9) = two_sum(p8, p9);
        let (t0, mut t1) = two_sum(q0, q4);
        t1 += q3 + q5;
        let (r0, mut r1) = two_sum(p6, p8);
        r1 += p7 + p9;
        let (q3, mut q4) = two_sum(t0, r0);
        q4 += t1 + r1;
        let (t0, mut t1) = two_sum(q3, s1);
        t1 += q4;

        t1 += a[1] * b[3] + a[2] * b[2] + a[3] * b[1] + q6 + q7 + q8 + q9 + s2;

        QuadDouble(renorm5(p0, p1, s0, t0, t1))
    }
}

impl Div for QuadDouble {
    type Output = Self;
    fn div(self, b: Self) -> Self {
        let q0 = self.0[0] / b.0[0];
        let r = self - b.mul_f64_exact(q0);
        let q1 = r.0[0] / b.0[0];
        let r = r - b.mul_f64_exact(q1);
        let q2 = r.0[0] / b.0[0];
        let r = r - b.mul_f64_exact(q2);
        let q3 = r.0[0] / b.0[0];
        let r = r - b.mul_f64_exact(q3);
        let q4 = r.0[0] / b.0[0];
        QuadDouble(renorm5(q0, q1, q2, q3, q4))
    }
}

impl PartialOrd for QuadDouble {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        for i in 0..4 {
            match self.0[i].partial_cmp(&other.0[i])? {
                Ordering::Equal => continue,
                o => return Some(o),
            }
        }
        Some(Ordering::Equal)
    }
}

macro_rules! assign_ops {
    ($t:ty) => {
        impl AddAssign for $t {
            fn add_assign(&mut self, b: Self) {
                *self = *self + b;
            }
        }
        impl SubAssign for $t {
            fn sub_assign(&mut self, b: Self) {
                *self = *self - b;
            }
        }
        impl MulAssign for $t {
            fn mul_assign(&mut self, b: Self) {
                *self = *self * b;
            }
        }
        impl DivAssign for $t {
            fn div_assign(&mut self, b: Self) {
                *self = *self / b;
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                let digits = f.precision().unwrap_or(<$t as Real>::DIGITS as usize);
                f.write_str(&format_sci(*self, digits))
            }
        }
        impl FromStr for $t {
            type Err = BuraError;
            fn from_str(s: &str) -> Result<Self, Self::Err> {
                <$t as Real>::parse_decimal(s)
            }
        }
    };
}

assign_ops!(DoubleDouble);
assign_ops!(QuadDouble);

impl Real for DoubleDouble {
    const DIGITS: u32 = 32;
    const PRECISION: Precision = Precision::DoubleDouble;

    fn from_f64(x: f64) -> Self {
        DoubleDouble::from(x)
    }
    fn to_f64(self) -> f64 {
        self.hi
    }
    fn epsilon() -> f64 {
        // 2^-104
        4.930380657631324e-32
    }
    fn limbs(self) -> Vec<f64> {
        vec![self.hi, self.lo]
    }
    fn from_limbs(limbs: &[f64]) -> Self {
        limbs.iter().fold(DoubleDouble::default(), |acc, &l| acc + DoubleDouble::from(l))
    }
    fn mul_f64(self, b: f64) -> Self {
        self.mul_f64_exact(b)
    }
    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        DoubleDouble { hi: self.hi * s, lo: self.lo * s }
    }
    fn ln2() -> Self {
        DoubleDouble { hi: std::f64::consts::LN_2, lo: 2.3190468138462996e-17 }
    }
}

impl Real for QuadDouble {
    const DIGITS: u32 = 64;
    const PRECISION: Precision = Precision::QuadDouble;

    fn from_f64(x: f64) -> Self {
        QuadDouble::from(x)
    }
    fn to_f64(self) -> f64 {
        self.0[0]
    }
    fn epsilon() -> f64 {
        // 2^-209
        1.2154326714572542e-63
    }
    fn limbs(self) -> Vec<f64> {
        self.0.to_vec()
    }
    fn from_limbs(limbs: &[f64]) -> Self {
        limbs.iter().fold(QuadDouble::default(), |acc, &l| acc + QuadDouble::from(l))
    }
    fn mul_f64(self, b: f64) -> Self {
        self.mul_f64_exact(b)
    }
    fn ldexp(self, e: i32) -> Self {
        let s = 2f64.powi(e);
        QuadDouble([self.0[0] * s, self.0[1] * s, self.0[2] * s, self.0[3] * s])
    }
    fn ln2() -> Self {
        QuadDouble([
            std::f64::consts::LN_2,
            2.3190468138462996e-17,
            5.707708438416212e-34,
            -3.5824322106018114e-50,
        ])
    }
}

/// Converts between scalar types by going through limbs.
pub fn convert<A: Real, B: Real>(x: A) -> B {
    if B::DIGITS >= A::DIGITS {
        B::from_limbs(&x.limbs())
    } else {
        // Narrowing: accumulate from the least significant limb up.
        let limbs = x.limbs();
        let mut acc = B::zero();
        for &l in limbs.iter().rev() {
            acc += B::from_f64(l);
        }
        acc
    }
}
