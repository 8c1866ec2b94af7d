//! Exact arithmetic in cyclotomic fields `Q(ζ_N)`.
//!
//! Elements are stored in the power basis `1, ζ, …, ζ^{φ(N)-1}` as integer
//! numerators over a single positive denominator, reduced so that equal
//! values have identical representations.

use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Shared data for one cyclotomic field: the modulus `Φ_N` and the
/// power-basis expansion of every `ζ^k`, `0 ≤ k < N`.
pub struct CyclotomicCtx {
    order: usize,
    phi: usize,
    modulus: Vec<i64>,
    powers: Vec<Vec<i64>>,
    max_power_coeff: i64,
}

impl fmt::Debug for CyclotomicCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "CyclotomicCtx(N={})", self.order)
    }
}

/// Coefficients of `Φ_n`, lowest degree first.
pub fn cyclotomic_polynomial(n: usize) -> Vec<i64> {
    assert!(n >= 1);
    let mut p = vec![0i64; n + 1];
    p[0] = -1;
    p[n] = 1;
    for d in 1..n {
        if n % d == 0 {
            p = div_monic(&p, &cyclotomic_polynomial(d));
        }
    }
    p
}

fn div_monic(num: &[i64], den: &[i64]) -> Vec<i64> {
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let qd = rem.len() - 1 - dd;
    let mut quot = vec![0i64; qd + 1];
    for i in (0..=qd).rev() {
        let c = rem[i + dd];
        quot[i] = c;
        if c != 0 {
            for (j, &dj) in den.iter().enumerate() {
                rem[i + j] -= c * dj;
            }
        }
    }
    debug_assert!(rem.iter().all(|&r| r == 0));
    quot
}

impl CyclotomicCtx {
    pub fn new(order: usize) -> Result<Arc<Self>> {
        if order == 0 {
            return Err(Error::InvalidParameter("root-of-unity order must be positive".into()));
        }
        let modulus = cyclotomic_polynomial(order);
        let phi = modulus.len() - 1;
        let mut powers = Vec::with_capacity(order);
        let mut cur = vec![0i64; phi];
        cur[0] = 1;
        for _ in 0..order {
            powers.push(cur.clone());
            let lead = cur[phi - 1];
            let mut next = vec![0i64; phi];
            for i in 1..phi {
                next[i] = cur[i - 1];
            }
            if lead != 0 {
                for i in 0..phi {
                    next[i] -= lead * modulus[i];
                }
            }
            cur = next;
        }
        debug_assert!(cur[0] == 1 && cur[1..].iter().all(|&c| c == 0));
        let max_power_coeff = powers
            .iter()
            .flat_map(|r| r.iter())
            .map(|c| c.abs())
            .max()
            .unwrap_or(1);
        Ok(Arc::new(CyclotomicCtx { order, phi, modulus, powers, max_power_coeff }))
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// `φ(N)`, the dimension of the power basis.
    pub fn basis_dim(&self) -> usize {
        self.phi
    }

    pub fn modulus(&self) -> &[i64] {
        &self.modulus
    }

    /// Power-basis coefficients of `ζ^k`.
    pub fn reduce_power(&self, k: i64) -> &[i64] {
        &self.powers[k.rem_euclid(self.order as i64) as usize]
    }
}

/// An element of `Q(ζ_N)` in canonical form.
#[derive(Clone)]
pub struct Cyclotomic {
    ctx: Arc<CyclotomicCtx>,
    num: Vec<BigInt>,
    den: BigInt,
}

impl PartialEq for Cyclotomic {
    fn eq(&self, other: &Self) -> bool {
        self.ctx.order == other.ctx.order && self.den == other.den && self.num == other.num
    }
}

impl Eq for Cyclotomic {}

impl Hash for Cyclotomic {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.ctx.order.hash(state);
        self.num.hash(state);
        self.den.hash(state);
    }
}

/// `ζ_N^k` in canonical form.
pub fn zeta_pow(ctx: &Arc<CyclotomicCtx>, k: i64) -> Cyclotomic {
    Cyclotomic::zeta_pow(ctx, k)
}

impl Cyclotomic {
    fn from_parts(ctx: Arc<CyclotomicCtx>, mut num: Vec<BigInt>, mut den: BigInt) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if den.is_negative() {
            den = -den;
            for c in num.iter_mut() {
                *c = -&*c;
            }
        }
        if num.iter().all(|c| c.is_zero()) {
            den = BigInt::one();
        } else if !den.is_one() {
            let mut g = den.clone();
            for c in &num {
                if g.is_one() {
                    break;
                }
                g = g.gcd(c);
            }
            if !g.is_one() {
                for c in num.iter_mut() {
                    *c = &*c / &g;
                }
                den = den / g;
            }
        }
        Cyclotomic { ctx, num, den }
    }

    pub fn zero(ctx: &Arc<CyclotomicCtx>) -> Self {
        Cyclotomic { ctx: ctx.clone(), num: vec![BigInt::zero(); ctx.phi], den: BigInt::one() }
    }

    pub fn one(ctx: &Arc<CyclotomicCtx>) -> Self {
        Self::from_integer(ctx, 1)
    }

    pub fn from_integer(ctx: &Arc<CyclotomicCtx>, v: i64) -> Self {
        let mut num = vec![BigInt::zero(); ctx.phi];
        num[0] = BigInt::from(v);
        Cyclotomic { ctx: ctx.clone(), num, den: BigInt::one() }
    }

    pub fn from_rational(ctx: &Arc<CyclotomicCtx>, r: &BigRational) -> Self {
        let mut num = vec![BigInt::zero(); ctx.phi];
        num[0] = r.numer().clone();
        Self::from_parts(ctx.clone(), num, r.denom().clone())
    }

    pub fn zeta_pow(ctx: &Arc<CyclotomicCtx>, k: i64) -> Self {
        let num = ctx.reduce_power(k).iter().map(|&c| BigInt::from(c)).collect();
        Cyclotomic { ctx: ctx.clone(), num, den: BigInt::one() }
    }

    /// Builds `(Σ_k counts[k] ζ^k) / den` from group-ring coefficients
    /// indexed by `k mod N`.
    pub fn from_group_ring(ctx: &Arc<CyclotomicCtx>, counts: &[i64], den: BigInt) -> Self {
        let mut acc = vec![0i128; ctx.phi];
        for (k, &c) in counts.iter().enumerate() {
            if c == 0 {
                continue;
            }
            for (a, &p) in acc.iter_mut().zip(ctx.reduce_power(k as i64)) {
                *a += c as i128 * p as i128;
            }
        }
        let num = acc.into_iter().map(BigInt::from).collect();
        Self::from_parts(ctx.clone(), num, den)
    }

    /// Builds an element from rational power-basis coefficients.
    pub fn from_coefficients(ctx: &Arc<CyclotomicCtx>, coeffs: &[BigRational]) -> Result<Self> {
        if coeffs.len() != ctx.phi {
            return Err(Error::Dimension(format!(
                "expected {} coefficients, got {}",
                ctx.phi,
                coeffs.len()
            )));
        }
        let mut den = BigInt::one();
        for c in coeffs {
            den = den.lcm(c.denom());
        }
        let num = coeffs.iter().map(|c| c.numer() * (&den / c.denom())).collect();
        Ok(Self::from_parts(ctx.clone(), num, den))
    }

    pub fn ctx(&self) -> &Arc<CyclotomicCtx> {
        &self.ctx
    }

    pub fn numerators(&self) -> &[BigInt] {
        &self.num
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    pub fn coefficients(&self) -> Vec<BigRational> {
        self.num
            .iter()
            .map(|c| BigRational::new(c.clone(), self.den.clone()))
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.num.iter().all(|c| c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num[0].is_one() && self.num[1..].iter().all(|c| c.is_zero())
    }

    /// The value as a rational number, if it lies in `Q`.
    pub fn as_rational(&self) -> Option<BigRational> {
        if self.num[1..].iter().all(|c| c.is_zero()) {
            Some(BigRational::new(self.num[0].clone(), self.den.clone()))
        } else {
            None
        }
    }

    /// Complex conjugation `ζ ↦ ζ^{-1}`.
    pub fn conjugate(&self) -> Self {
        self.galois(-1)
    }

    /// The Galois automorphism `ζ ↦ ζ^k`; `k` must be prime to `N`.
    pub fn galois(&self, k: i64) -> Self {
        let n = self.ctx.order as i64;
        debug_assert!(k.rem_euclid(n).gcd(&n) == 1);
        let mut out = vec![BigInt::zero(); self.ctx.phi];
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(self.ctx.reduce_power(j as i64 * k)) {
                if p != 0 {
                    *o += c * p;
                }
            }
        }
        Self::from_parts(self.ctx.clone(), out, self.den.clone())
    }

    /// Multiplication by `ζ^k`.
    pub fn mul_zeta(&self, k: i64) -> Self {
        self * &Self::zeta_pow(&self.ctx, k)
    }

    pub fn scale_int(&self, k: &BigInt) -> Self {
        let num = self.num.iter().map(|c| c * k).collect();
        Self::from_parts(self.ctx.clone(), num, self.den.clone())
    }

    pub fn scale(&self, r: &BigRational) -> Self {
        let num = self.num.iter().map(|c| c * r.numer()).collect();
        Self::from_parts(self.ctx.clone(), num, &self.den * r.denom())
    }

    /// Maps the element into `Q(ζ_M)` for a multiple `M` of `N`.
    pub fn embed(&self, target: &Arc<CyclotomicCtx>) -> Result<Self> {
        if target.order % self.ctx.order != 0 {
            return Err(Error::InvalidParameter(format!(
                "cannot embed Q(zeta_{}) into Q(zeta_{})",
                self.ctx.order, target.order
            )));
        }
        let step = (target.order / self.ctx.order) as i64;
        let mut out = vec![BigInt::zero(); target.phi];
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(target.reduce_power(j as i64 * step)) {
                if p != 0 {
                    *o += c * p;
                }
            }
        }
        Ok(Self::from_parts(target.clone(), out, self.den.clone()))
    }

    /// Multiplicative inverse, `None` for zero.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        // Solve (num · x) = den · 1 in the power basis.
        let phi = self.ctx.phi;
        let mut m: Vec<Vec<BigRational>> = vec![vec![BigRational::zero(); phi + 1]; phi];
        let mut col = Self { ctx: self.ctx.clone(), num: self.num.clone(), den: BigInt::one() };
        let zeta = Self::zeta_pow(&self.ctx, 1);
        for j in 0..phi {
            for i in 0..phi {
                m[i][j] = BigRational::from_integer(col.num[i].clone());
            }
            if j + 1 < phi {
                col = &col * &zeta;
            }
        }
        m[0][phi] = BigRational::from_integer(self.den.clone());
        for c in 0..phi {
            let piv = (c..phi).find(|&r| !m[r][c].is_zero())?;
            m.swap(c, piv);
            let inv = m[c][c].recip();
            for k in c..=phi {
                m[c][k] = &m[c][k] * &inv;
            }
            for r in 0..phi {
                if r != c && !m[r][c].is_zero() {
                    let f = m[r][c].clone();
                    for k in c..=phi {
                        let t = &m[c][k] * &f;
                        m[r][k] -= t;
                    }
                }
            }
        }
        let coeffs: Vec<BigRational> = m.into_iter().map(|row| row[phi].clone()).collect();
        Self::from_coefficients(&self.ctx, &coeffs).ok()
    }

    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = Self::one(&self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &base;
            }
            base = &base * &base;
            e >>= 1;
        }
        acc
    }

    /// Numerical value under `ζ_N ↦ exp(2πi/N)`.
    pub fn to_complex(&self) -> (f64, f64) {
        let z = self.to_complex64();
        (z.re, z.im)
    }

    pub fn to_complex64(&self) -> Complex64 {
        let n = self.ctx.order as f64;
        let den = self.den.to_f64().unwrap_or(f64::INFINITY);
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, c) in self.num.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let v = c.to_f64().unwrap_or(f64::NAN) / den;
            acc += Complex64::from_polar(v, std::f64::consts::TAU * j as f64 / n);
        }
        acc
    }

    fn check_ctx(&self, other: &Self) {
        assert_eq!(
            self.ctx.order, other.ctx.order,
            "mixing elements of different cyclotomic fields"
        );
    }
}

fn fits_small(v: &[BigInt]) -> bool {
    v.iter().all(|c| c.bits() <= 40)
}

fn mul_numerators(ctx: &CyclotomicCtx, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
    let phi = ctx.phi;
    if phi <= 1024 && ctx.max_power_coeff < (1 << 10) && fits_small(a) && fits_small(b) {
        let a: Vec<i128> = a.iter().map(|c| c.to_i64().unwrap() as i128).collect();
        let b: Vec<i128> = b.iter().map(|c| c.to_i64().unwrap() as i128).collect();
        let mut conv = vec![0i128; 2 * phi - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                conv[i + j] += x * y;
            }
        }
        let mut out: Vec<i128> = conv[..phi].to_vec();
        for (k, &c) in conv.iter().enumerate().skip(phi) {
            if c == 0 {
                continue;
            }
            for (o, &p) in out.iter_mut().zip(&ctx.powers[k % ctx.order]) {
                *o += c * p as i128;
            }
        }
        return out.into_iter().map(BigInt::from).collect();
    }
    let mut conv = vec![BigInt::zero(); 2 * phi - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            if !y.is_zero() {
                conv[i + j] += x * y;
            }
        }
    }
    let mut out: Vec<BigInt> = conv[..phi].to_vec();
    for (k, c) in conv.iter().enumerate().skip(phi) {
        if c.is_zero() {
            continue;
        }
        for (o, &p) in out.iter_mut().zip(&ctx.powers[k % ctx.order]) {
            if p != 0 {
                *o += c * p;
            }
        }
    }
    out
}

impl<'a> Add<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn add(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check_ctx(rhs);
        if self.den == rhs.den {
            let num = self.num.iter().zip(&rhs.num).map(|(a, b)| a + b).collect();
            return Cyclotomic::from_parts(self.ctx.clone(), num, self.den.clone());
        }
        let num = self
            .num
            .iter()
            .zip(&rhs.num)
            .map(|(a, b)| a * &rhs.den + b * &self.den)
            .collect();
        Cyclotomic::from_parts(self.ctx.clone(), num, &self.den * &rhs.den)
    }
}

impl<'a> Sub<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn sub(self, rhs: &Cyclotomic) -> Cyclotomic {
        self + &(-rhs)
    }
}

impl<'a> Mul<&'a Cyclotomic> for &'a Cyclotomic {
    type Output = Cyclotomic;
    fn mul(self, rhs: &Cyclotomic) -> Cyclotomic {
        self.check_ctx(rhs);
        let num = mul_numerators(&self.ctx, &self.num, &rhs.num);
        Cyclotomic::from_parts(self.ctx.clone(), num, &self.den * &rhs.den)
    }
}

impl Neg for &Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        Cyclotomic {
            ctx: self.ctx.clone(),
            num: self.num.iter().map(|c| -c).collect(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Cyclotomic {
    type Output = Cyclotomic;
    fn neg(self) -> Cyclotomic {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr<Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic {
                (&self).$m(&rhs)
            }
        }
        impl<'a> $tr<&'a Cyclotomic> for Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: &Cyclotomic) -> Cyclotomic {
                (&self).$m(rhs)
            }
        }
        impl<'a> $tr<Cyclotomic> for &'a Cyclotomic {
            type Output = Cyclotomic;
            fn $m(self, rhs: Cyclotomic) -> Cyclotomic {
                self.$m(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl AddAssign<&Cyclotomic> for Cyclotomic {
    fn add_assign(&mut self, rhs: &Cyclotomic) {
        *self = &*self + rhs;
    }
}

impl fmt::Display for Cyclotomic {
    /// Renders the coefficient list, e.g. `[1 0 -1/2 0]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, c) in self.coefficients().iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, "]")
    }
}

impl fmt::Debug for Cyclotomic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Cyclotomic(N={}, {})", self.ctx.order, self)
    }
}

impl Serialize for Cyclotomic {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<String> = self.coefficients().iter().map(|c| c.to_string()).collect();
        v.serialize(s)
    }
}

/// An accumulator in the group ring `Z[C_N]`: integer multiplicities of
/// the powers `ζ^k`. Sums of roots of unity are collected here and only
/// converted to canonical form at the end.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ZetaSum {
    counts: Vec<i64>,
}

impl ZetaSum {
    pub fn new(order: usize) -> Self {
        ZetaSum { counts: vec![0; order] }
    }

    pub fn order(&self) -> usize {
        self.counts.len()
    }

    pub fn add(&mut self, k: u64, mult: i64) {
        let n = self.counts.len() as u64;
        self.counts[(k % n) as usize] += mult;
    }

    pub fn counts(&self) -> &[i64] {
        &self.counts
    }

    /// Representation independent of the relation `Σ_k ζ^k = 0` when `N`
    /// is prime: the coefficient of `ζ^{N-1}` is subtracted everywhere.
    pub fn normalized_prime(&self) -> Vec<i64> {
        let last = *self.counts.last().unwrap();
        self.counts.iter().map(|c| c - last).collect()
    }

    pub fn to_cyclotomic(&self, ctx: &Arc<CyclotomicCtx>, scale: &BigRational) -> Result<Cyclotomic> {
        if ctx.order % self.counts.len() != 0 {
            return Err(Error::InvalidParameter("accumulator order does not divide field order".into()));
        }
        let step = ctx.order / self.counts.len();
        let mut spread = vec![0i64; ctx.order];
        for (k, &c) in self.counts.iter().enumerate() {
            spread[k * step] += c;
        }
        let v = Cyclotomic::from_group_ring(ctx, &spread, BigInt::one());
        Ok(v.scale(scale))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_cyclotomic_polynomials() {
        assert_eq!(cyclotomic_polynomial(1), vec![-1, 1]);
        assert_eq!(cyclotomic_polynomial(4), vec![1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(6), vec![1, -1, 1]);
        assert_eq!(cyclotomic_polynomial(12), vec![1, 0, -1, 0, 1]);
        assert_eq!(cyclotomic_polynomial(60).len() - 1, 16);
        assert_eq!(cyclotomic_polynomial(168).len() - 1, 48);
    }

    #[test]
    fn inverse_roundtrip() {
        let ctx = CyclotomicCtx::new(60).unwrap();
        let a = &Cyclotomic::from_integer(&ctx, 3) + &zeta_pow(&ctx, 7);
        let b = a.inverse().unwrap();
        assert!((&a * &b).is_one());
    }
}
