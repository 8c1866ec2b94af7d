//! Prime fields `F_q` and their additive characters.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalars::{CyclotomicCtx, Cyclotomic};

/// Arithmetic modulo an odd prime `q ≥ 5`. Elements are residues `0..q`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct FieldCtx {
    q: u32,
}

fn is_prime(n: u32) -> bool {
    if n < 2 {
        return false;
    }
    let mut d = 2u32;
    while d * d <= n {
        if n % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// Validates `q` and returns its field context.
pub fn field_ctx(q: u32) -> Result<FieldCtx> {
    FieldCtx::new(q)
}

impl FieldCtx {
    pub fn new(q: u32) -> Result<Self> {
        if q % 2 == 0 {
            return Err(Error::Unsupported(format!("q = {q} is even")));
        }
        if q <= 3 {
            return Err(Error::Unsupported(format!("q = {q} must be greater than 3")));
        }
        if !is_prime(q) {
            return Err(Error::Unsupported(format!("q = {q} is not prime")));
        }
        if q > 251 {
            // Exponent tables store residues in bytes.
            return Err(Error::Unsupported(format!("q = {q} exceeds the supported range")));
        }
        Ok(FieldCtx { q })
    }

    #[inline]
    pub fn q(&self) -> u32 {
        self.q
    }

    #[inline]
    pub fn reduce(&self, v: i64) -> u32 {
        v.rem_euclid(self.q as i64) as u32
    }

    #[inline]
    pub fn add(&self, a: u32, b: u32) -> u32 {
        (a + b) % self.q
    }

    #[inline]
    pub fn sub(&self, a: u32, b: u32) -> u32 {
        (a + self.q - b) % self.q
    }

    #[inline]
    pub fn neg(&self, a: u32) -> u32 {
        (self.q - a) % self.q
    }

    #[inline]
    pub fn mul(&self, a: u32, b: u32) -> u32 {
        (a * b) % self.q
    }

    pub fn pow(&self, a: u32, mut e: u64) -> u32 {
        let mut base = a % self.q;
        let mut acc = 1u32;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        acc
    }

    /// Inverse of a nonzero residue.
    pub fn inv(&self, a: u32) -> Option<u32> {
        if a % self.q == 0 {
            None
        } else {
            Some(self.pow(a, (self.q - 2) as u64))
        }
    }

    pub fn is_square(&self, a: u32) -> bool {
        a % self.q == 0 || self.pow(a, ((self.q - 1) / 2) as u64) == 1
    }

    pub fn elements(&self) -> impl Iterator<Item = u32> {
        0..self.q
    }
}

/// The character `ψ_λ(x) = ζ_q^{λx}` of the additive group of `F_q`.
#[derive(Clone, Debug)]
pub struct AdditiveCharacter {
    field: FieldCtx,
    twist: u32,
    ctx: Arc<CyclotomicCtx>,
}

impl AdditiveCharacter {
    pub fn new(field: FieldCtx, twist: i64) -> Result<Self> {
        let twist = field.reduce(twist);
        if twist == 0 {
            return Err(Error::InvalidParameter("character twist must be nonzero".into()));
        }
        let ctx = CyclotomicCtx::new(field.q() as usize)?;
        Ok(AdditiveCharacter { field, twist, ctx })
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }

    pub fn twist(&self) -> u32 {
        self.twist
    }

    /// The field `Q(ζ_q)` holding the values.
    pub fn values_ctx(&self) -> &Arc<CyclotomicCtx> {
        &self.ctx
    }

    /// Exponent `k` with `ψ(x) = ζ_q^k`.
    #[inline]
    pub fn exponent(&self, x: u32) -> u32 {
        self.field.mul(self.twist, x % self.field.q())
    }

    pub fn psi(&self, x: u32) -> Cyclotomic {
        Cyclotomic::zeta_pow(&self.ctx, self.exponent(x) as i64)
    }
}

/// `ψ_λ(x)` for the given character.
pub fn psi(chr: &AdditiveCharacter, x: u32) -> Cyclotomic {
    chr.psi(x)
}
