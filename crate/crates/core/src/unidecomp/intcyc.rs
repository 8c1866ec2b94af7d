//! Fixed-width arithmetic in `Z[ζ_N]` for the inner loops of the
//! projector and Hom-space checks. Every operation is overflow-checked,
//! so a result is either exact or an [`Error::Overflow`].

use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::error::{Error, Result};
use crate::scalars::{Cyclotomic, CyclotomicCtx};

/// Power-basis coordinates of an algebraic integer.
pub(crate) type IntVec = Vec<i128>;

pub(crate) struct IntCyc {
    ctx: Arc<CyclotomicCtx>,
    phi: usize,
}

#[inline]
fn add(a: i128, b: i128) -> Result<i128> {
    a.checked_add(b).ok_or(Error::Overflow)
}

#[inline]
fn mul(a: i128, b: i128) -> Result<i128> {
    a.checked_mul(b).ok_or(Error::Overflow)
}

impl IntCyc {
    pub(crate) fn new(ctx: &Arc<CyclotomicCtx>) -> Self {
        IntCyc { ctx: ctx.clone(), phi: ctx.basis_dim() }
    }

    pub(crate) fn dim(&self) -> usize {
        self.phi
    }

    pub(crate) fn zero(&self) -> IntVec {
        vec![0; self.phi]
    }

    /// Numerators and the common denominator of `c`.
    pub(crate) fn split(&self, c: &Cyclotomic) -> Result<(IntVec, i128)> {
        let den = c.denominator().to_i128().ok_or(Error::Overflow)?;
        let num = c.numerators().iter().map(|v| v.to_i128().ok_or(Error::Overflow)).collect::<Result<_>>()?;
        Ok((num, den))
    }

    /// `c` itself, which must be an algebraic integer.
    pub(crate) fn integral(&self, c: &Cyclotomic) -> Result<IntVec> {
        let (num, den) = self.split(c)?;
        if den != 1 {
            return Err(Error::CheckFailed(format!("{c} is not integral in the power basis")));
        }
        Ok(num)
    }

    pub(crate) fn to_cyclotomic(&self, v: &[i128], den: i128) -> Cyclotomic {
        let coeffs: Vec<num_rational::BigRational> = v
            .iter()
            .map(|&a| num_rational::BigRational::new(BigInt::from(a), BigInt::from(den)))
            .collect();
        Cyclotomic::from_coefficients(&self.ctx, &coeffs).expect("basis length")
    }

    pub(crate) fn mul(&self, a: &[i128], b: &[i128]) -> Result<IntVec> {
        let phi = self.phi;
        let mut raw = vec![0i128; 2 * phi - 1];
        for (i, &x) in a.iter().enumerate() {
            if x == 0 {
                continue;
            }
            for (j, &y) in b.iter().enumerate() {
                if y != 0 {
                    raw[i + j] = add(raw[i + j], mul(x, y)?)?;
                }
            }
        }
        let mut out = raw[..phi].to_vec();
        for (d, &c) in raw.iter().enumerate().skip(phi) {
            if c != 0 {
                for (o, &p) in out.iter_mut().zip(self.ctx.reduce_power(d as i64)) {
                    *o = add(*o, mul(c, p as i128)?)?;
                }
            }
        }
        Ok(out)
    }

    /// `acc += k · v`.
    pub(crate) fn add_scaled(&self, acc: &mut [i128], v: &[i128], k: i128) -> Result<()> {
        for (a, &x) in acc.iter_mut().zip(v) {
            if x != 0 {
                *a = add(*a, mul(k, x)?)?;
            }
        }
        Ok(())
    }

    /// Power-basis coordinates of `Σ_k counts[k] ζ^k` (`counts` has length `N`).
    pub(crate) fn from_group_ring(&self, counts: &[i128]) -> Result<IntVec> {
        let mut out = self.zero();
        for (k, &c) in counts.iter().enumerate() {
            if c != 0 {
                for (o, &p) in out.iter_mut().zip(self.ctx.reduce_power(k as i64)) {
                    *o = add(*o, mul(c, p as i128)?)?;
                }
            }
        }
        Ok(out)
    }
}
