//! Exact arithmetic in cyclotomic fields `Q(ζ_n)`.
//!
//! Elements are stored over the power basis `{ζ^k : 0 ≤ k < φ(n)}` after
//! reduction modulo the cyclotomic polynomial `Φ_n`. The representation is
//! canonical for a fixed conductor, so equality is a coefficient comparison.
//! Mixed-conductor operations promote both operands to the lcm conductor.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock, RwLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CycloError {
    #[error("conductor must be a positive integer")]
    ZeroConductor,
    #[error("value is not rational")]
    NotRational,
    #[error("division by zero")]
    DivisionByZero,
}

/// Precomputed data for one cyclotomic field.
///
/// `powers` holds `ζ^k` for every `k` in `0..n` in the power basis, so any
/// monomial reduces with a single table lookup.
#[derive(Debug)]
pub struct Field {
    n: u32,
    phi: usize,
    poly: Vec<i64>,
    powers: Vec<i64>,
}

impl Field {
    fn build(n: u32) -> Field {
        let poly = cyclotomic_polynomial(n);
        let phi = poly.len() - 1;
        let mut powers = vec![0i64; n as usize * phi];
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for k in 0..n as usize {
            powers[k * phi..(k + 1) * phi].copy_from_slice(&cur);
            // multiply by x and reduce with the monic Φ_n
            let top = cur[phi - 1];
            for j in (1..phi).rev() {
                cur[j] = cur[j - 1] - top * poly[j];
            }
            cur[0] = -top * poly[0];
        }
        Field { n, phi, poly, powers }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    /// Degree `φ(n)` of the field over `Q`.
    pub fn degree(&self) -> usize {
        self.phi
    }

    /// Coefficients of `Φ_n`, constant term first.
    pub fn cyclotomic_poly(&self) -> &[i64] {
        &self.poly
    }

    /// `ζ^k` in the power basis; `k` is taken modulo `n`.
    pub fn power(&self, k: i64) -> &[i64] {
        let k = k.rem_euclid(self.n as i64) as usize;
        &self.powers[k * self.phi..(k + 1) * self.phi]
    }

    /// Accumulates the unreduced product of two basis vectors into `acc`
    /// (length `2φ - 1`).
    #[inline]
    pub(crate) fn mul_acc(&self, acc: &mut [i128], a: &[i64], b: &[i64]) {
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            let x = x as i128;
            for (j, &y) in b.iter().enumerate() {
                acc[i + j] += x * y as i128;
            }
        }
    }

    /// Folds an unreduced polynomial (length `2φ - 1`) back onto the basis.
    #[inline]
    pub(crate) fn reduce_acc(&self, acc: &[i128], out: &mut [i128]) {
        let phi = self.phi;
        out[..phi].copy_from_slice(&acc[..phi]);
        for (k, &c) in acc.iter().enumerate().skip(phi) {
            if c == 0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.power(k as i64)) {
                *o += c * p as i128;
            }
        }
    }
}

fn divisors(n: u32) -> Vec<u32> {
    (1..=n).filter(|d| n % d == 0).collect()
}

/// `Φ_n` by exact division of `x^n - 1` by `Φ_d` for all proper divisors `d`.
fn cyclotomic_polynomial(n: u32) -> Vec<i64> {
    fn go(n: u32, memo: &mut HashMap<u32, Vec<i64>>) -> Vec<i64> {
        if let Some(p) = memo.get(&n) {
            return p.clone();
        }
        let mut num = vec![0i64; n as usize + 1];
        num[0] = -1;
        num[n as usize] = 1;
        for d in divisors(n) {
            if d == n {
                continue;
            }
            let den = go(d, memo);
            num = div_monic(&num, &den);
        }
        memo.insert(n, num.clone());
        num
    }
    go(n, &mut HashMap::new())
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let dn = den.len() - 1;
    let mut rem = num.to_vec();
    let mut quot = vec![0i64; num.len() - dn];
    for i in (0..quot.len()).rev() {
        let c = rem[i + dn];
        quot[i] = c;
        for (j, &d) in den.iter().enumerate() {
            rem[i + j] -= c * d;
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0), "inexact cyclotomic division");
    quot
}

fn field_cache() -> &'static RwLock<HashMap<u32, Arc<Field>>> {
    static CACHE: OnceLock<RwLock<HashMap<u32, Arc<Field>>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// Shared field data for conductor `n`; built once and cached.
pub fn field(n: u32) -> Arc<Field> {
    assert!(n >= 1, "conductor must be positive");
    if let Some(f) = field_cache().read().unwrap().get(&n) {
        return f.clone();
    }
    let built = Arc::new(Field::build(n));
    field_cache()
        .write()
        .unwrap()
        .entry(n)
        .or_insert(built)
        .clone()
}

/// Euler's totient.
pub fn totient(n: u32) -> usize {
    (1..=n).filter(|k| k.gcd(&n) == 1).count()
}

/// An exact element of `Q(ζ_n)`.
#[derive(Clone, Debug)]
pub struct CycNum {
    n: u32,
    coeffs: Vec<BigRational>,
}

impl CycNum {
    pub fn zero(n: u32) -> CycNum {
        CycNum {
            n,
            coeffs: vec![BigRational::zero(); totient(n)],
        }
    }

    pub fn from_rational(q: BigRational) -> CycNum {
        CycNum {
            n: 1,
            coeffs: vec![q],
        }
    }

    pub fn from_int(k: i64) -> CycNum {
        CycNum::from_rational(BigRational::from_integer(k.into()))
    }

    pub fn from_ratio(num: i64, den: i64) -> CycNum {
        CycNum::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// `ζ_n^k`.
    pub fn zeta(n: u32, k: i64) -> CycNum {
        CycNum::from_terms(n, &[(BigRational::one(), k)]).expect("positive conductor")
    }

    /// `Σ cᵢ·ζ_n^{eᵢ}` in canonical form.
    pub fn from_terms(n: u32, terms: &[(BigRational, i64)]) -> Result<CycNum, CycloError> {
        if n == 0 {
            return Err(CycloError::ZeroConductor);
        }
        let f = field(n);
        let mut coeffs = vec![BigRational::zero(); f.degree()];
        for (c, e) in terms {
            if c.is_zero() {
                continue;
            }
            for (slot, &p) in coeffs.iter_mut().zip(f.power(*e)) {
                if p != 0 {
                    *slot += c * BigRational::from_integer(p.into());
                }
            }
        }
        Ok(CycNum { n, coeffs })
    }

    /// Builds from raw power-basis coefficients; `coeffs.len()` must be `φ(n)`.
    pub fn from_coeffs(n: u32, coeffs: Vec<BigRational>) -> CycNum {
        assert_eq!(coeffs.len(), totient(n), "coefficient vector length must be φ(n)");
        CycNum { n, coeffs }
    }

    pub fn conductor(&self) -> u32 {
        self.n
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// Re-expresses `self` in `Q(ζ_m)` for a multiple `m` of the conductor.
    pub fn promote(&self, m: u32) -> CycNum {
        assert!(m % self.n == 0, "conductor {} does not divide {}", self.n, m);
        if m == self.n {
            return self.clone();
        }
        let step = (m / self.n) as i64;
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c.clone(), k as i64 * step))
            .collect();
        CycNum::from_terms(m, &terms).unwrap()
    }

    fn common(a: &CycNum, b: &CycNum) -> (CycNum, CycNum) {
        if a.n == b.n {
            return (a.clone(), b.clone());
        }
        let m = a.n.lcm(&b.n);
        (a.promote(m), b.promote(m))
    }

    /// Galois automorphism `ζ ↦ ζ^a`, `gcd(a, n) = 1`.
    pub fn galois(&self, a: i64) -> CycNum {
        debug_assert_eq!(a.rem_euclid(self.n as i64).gcd(&(self.n as i64)), 1);
        let terms: Vec<_> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| (c.clone(), k as i64 * a))
            .collect();
        CycNum::from_terms(self.n, &terms).unwrap()
    }

    /// Complex conjugation, i.e. `ζ ↦ ζ⁻¹`.
    pub fn conj(&self) -> CycNum {
        self.galois(-1)
    }

    pub fn as_rational(&self) -> Result<BigRational, CycloError> {
        if self.coeffs[1..].iter().all(Zero::is_zero) {
            Ok(self.coeffs[0].clone())
        } else {
            Err(CycloError::NotRational)
        }
    }

    /// The value as an integer, if it is one.
    pub fn as_integer(&self) -> Option<BigInt> {
        let q = self.as_rational().ok()?;
        q.is_integer().then(|| q.to_integer())
    }

    /// Multiplicative inverse via the product of the nontrivial conjugates.
    pub fn inv(&self) -> Result<CycNum, CycloError> {
        if self.is_zero() {
            return Err(CycloError::DivisionByZero);
        }
        let n = self.n as i64;
        let mut others = CycNum::from_int(1).promote(self.n);
        for a in 2..n.max(2) {
            if a.gcd(&n) == 1 {
                others = &others * &self.galois(a);
            }
        }
        let norm = (self * &others).as_rational().expect("field norm is rational");
        Ok(others.scale(&norm.recip()))
    }

    pub fn scale(&self, q: &BigRational) -> CycNum {
        CycNum {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| c * q).collect(),
        }
    }

    pub fn pow(&self, mut e: u32) -> CycNum {
        let mut base = self.clone();
        let mut acc = CycNum::from_int(1).promote(self.n);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Floating-point value with `ζ_n = exp(2πi/n)`. Diagnostics only.
    pub fn numeric(&self) -> Complex64 {
        let mut z = Complex64::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let angle = 2.0 * std::f64::consts::PI * k as f64 / self.n as f64;
            z += Complex64::from_polar(rational_to_f64(c), angle);
        }
        z
    }

    /// Least common denominator of the coefficients.
    pub fn denominator(&self) -> BigInt {
        self.coeffs
            .iter()
            .fold(BigInt::one(), |acc, c| acc.lcm(c.denom()))
    }
}

pub(crate) fn rational_to_f64(q: &BigRational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() => a / b,
        _ => {
            // huge operands: shift both into range first
            let bits = q.numer().bits().max(q.denom().bits()) as i64 - 60;
            let shift = bits.max(0) as usize;
            let a = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let b = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            a / b
        }
    }
}

impl PartialEq for CycNum {
    fn eq(&self, other: &CycNum) -> bool {
        if self.n == other.n {
            return self.coeffs == other.coeffs;
        }
        let (a, b) = CycNum::common(self, other);
        a.coeffs == b.coeffs
    }
}

impl Eq for CycNum {}

impl<'a> Add<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn add(self, rhs: &CycNum) -> CycNum {
        if self.n != rhs.n {
            let (a, b) = CycNum::common(self, rhs);
            return &a + &b;
        }
        CycNum {
            n: self.n,
            coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn sub(self, rhs: &CycNum) -> CycNum {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a CycNum> for &'a CycNum {
    type Output = CycNum;
    fn mul(self, rhs: &CycNum) -> CycNum {
        if self.n != rhs.n {
            let (a, b) = CycNum::common(self, rhs);
            return &a * &b;
        }
        let f = field(self.n);
        let phi = f.degree();
        let mut prod = vec![BigRational::zero(); 2 * phi - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in rhs.coeffs.iter().enumerate() {
                if !b.is_zero() {
                    prod[i + j] += a * b;
                }
            }
        }
        let mut coeffs: Vec<BigRational> = prod[..phi].to_vec();
        for (k, c) in prod.iter().enumerate().skip(phi) {
            if c.is_zero() {
                continue;
            }
            for (slot, &p) in coeffs.iter_mut().zip(f.power(k as i64)) {
                if p != 0 {
                    *slot += c * BigRational::from_integer(p.into());
                }
            }
        }
        CycNum { n: self.n, coeffs }
    }
}

impl<'a> Neg for &'a CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        CycNum {
            n: self.n,
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }
}

impl Add for CycNum {
    type Output = CycNum;
    fn add(self, rhs: CycNum) -> CycNum {
        &self + &rhs
    }
}

impl Sub for CycNum {
    type Output = CycNum;
    fn sub(self, rhs: CycNum) -> CycNum {
        &self - &rhs
    }
}

impl Mul for CycNum {
    type Output = CycNum;
    fn mul(self, rhs: CycNum) -> CycNum {
        &self * &rhs
    }
}

impl Neg for CycNum {
    type Output = CycNum;
    fn neg(self) -> CycNum {
        -&self
    }
}

impl AddAssign<&CycNum> for CycNum {
    fn add_assign(&mut self, rhs: &CycNum) {
        if self.n == rhs.n {
            for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
                *a += b;
            }
        } else {
            *self = &*self + rhs;
        }
    }
}

impl From<i64> for CycNum {
    fn from(k: i64) -> CycNum {
        CycNum::from_int(k)
    }
}

/// Renders in the entry grammar: terms `c*zN^k` over the power basis.
impl fmt::Display for CycNum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            let mag = c.abs();
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            let root = match k {
                0 => None,
                1 => Some(format!("z{}", self.n)),
                _ => Some(format!("z{}^{}", self.n, k)),
            };
            match root {
                None => write!(f, "{}", mag)?,
                Some(r) if mag.is_one() => f.write_str(&r)?,
                Some(r) => write!(f, "{}*{}", mag, r)?,
            }
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    fn terms(n: u32, t: &[(i64, i64)]) -> CycNum {
        let t: Vec<_> = t.iter().map(|&(c, e)| (q(c, 1), e)).collect();
        CycNum::from_terms(n, &t).unwrap()
    }

    #[test]
    fn cyclotomic_polynomials() {
        assert_eq!(field(1).cyclotomic_poly(), &[-1, 1]);
        assert_eq!(field(4).cyclotomic_poly(), &[1, 0, 1]);
        assert_eq!(field(6).cyclotomic_poly(), &[1, -1, 1]);
        assert_eq!(field(12).cyclotomic_poly(), &[1, 0, -1, 0, 1]);
        // Φ_105 is the first with a coefficient of absolute value 2
        assert!(field(105).cyclotomic_poly().contains(&-2));
        assert_eq!(field(840).degree(), 192);
    }

    #[test]
    fn from_terms_examples() {
        assert!(terms(4, &[(1, 1), (1, 3)]).is_zero());
        assert_eq!(terms(3, &[(1, 1), (1, 2)]), CycNum::from_int(-1));
        assert!(terms(5, &[(1, 0), (1, 1), (1, 2), (1, 3), (1, 4)]).is_zero());
        assert_eq!(CycNum::from_terms(0, &[]), Err(CycloError::ZeroConductor));
        // negative exponents wrap
        assert_eq!(terms(8, &[(1, -1)]), CycNum::zeta(8, 7));
    }

    #[test]
    fn ring_examples() {
        let i = CycNum::zeta(4, 1);
        assert_eq!(&i * &i, CycNum::from_int(-1));
        let s = &CycNum::zeta(8, 1) + &CycNum::zeta(8, -1);
        assert_eq!(&s * &s, CycNum::from_int(2));
        let x = &CycNum::zeta(6, 1) + &CycNum::zeta(3, 1);
        assert_eq!(x.conductor(), 6);
        let direct = Complex64::from_polar(1.0, std::f64::consts::PI / 3.0)
            + Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        assert!((x.numeric() - direct).norm() < 1e-10);
    }

    #[test]
    fn conjugation_examples() {
        assert_eq!(CycNum::zeta(8, 1).conj(), CycNum::zeta(8, 7));
        let r = CycNum::from_ratio(3, 2);
        assert_eq!(r.conj(), r);
        assert_eq!(terms(3, &[(1, 0), (1, 1)]).conj(), terms(3, &[(1, 0), (1, 2)]));
    }

    #[test]
    fn as_rational_examples() {
        let x = terms(3, &[(1, 1), (1, 2), (2, 0)]);
        assert_eq!(x.as_rational().unwrap(), q(1, 1));
        assert_eq!(CycNum::zeta(5, 1).as_rational(), Err(CycloError::NotRational));
        let s = terms(8, &[(1, 1), (1, 7)]);
        assert_eq!((&s * &s).as_rational().unwrap(), q(2, 1));
    }

    #[test]
    fn numeric_examples() {
        let i = CycNum::zeta(4, 1).numeric();
        assert!((i - Complex64::new(0.0, 1.0)).norm() < 1e-12);
        assert_eq!(CycNum::from_ratio(-1, 2).numeric(), Complex64::new(-0.5, 0.0));
        let golden = terms(5, &[(1, 1), (1, 4)]).numeric();
        let expected = 2.0 * (72.0f64).to_radians().cos();
        assert!((golden.re - expected).abs() < 1e-10 && golden.im.abs() < 1e-10);
        assert!((golden.re - 0.618033988749895).abs() < 1e-10);
    }

    #[test]
    fn inverse() {
        let x = terms(7, &[(1, 0), (2, 1), (-3, 4)]);
        let y = x.inv().unwrap();
        assert!((&x * &y).is_one());
        assert_eq!(CycNum::zero(5).inv(), Err(CycloError::DivisionByZero));
        assert_eq!(CycNum::from_int(4).inv().unwrap(), CycNum::from_ratio(1, 4));
    }

    #[test]
    fn rendering() {
        assert_eq!(terms(8, &[(1, 1)]).to_string(), "z8");
        assert_eq!(CycNum::zero(3).to_string(), "0");
        let x = CycNum::from_terms(8, &[(q(1, 2), 1), (q(-1, 2), 3)]).unwrap();
        assert_eq!(x.to_string(), "1/2*z8 - 1/2*z8^3");
        assert_eq!(terms(3, &[(-1, 2)]).to_string(), "1 + z3");
    }
}
