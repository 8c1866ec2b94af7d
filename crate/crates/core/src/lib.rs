//! Exact construction of the generalized Weil representation of the finite
//! split orthogonal group `O(2n, 2n)` over a prime field, realized through
//! the Bruhat presentation of `SL~^-(2, M_{2n}(F_q))`.

pub mod dualpair;
pub mod error;
pub mod gfq;
pub mod matalg;
pub mod scalars;
pub mod report;
pub mod slstar;
pub mod weildata;
pub mod unidecomp;
pub mod weilrep;

pub use error::{Error, Result};
pub use gfq::{field_ctx, psi, AdditiveCharacter, FieldCtx};
pub use matalg::{FqMatrix, InvolutionKind, Sign};
pub use scalars::{zeta_pow, Cyclotomic, CyclotomicCtx, ZetaSum};
pub use slstar::{GeneratorToken, GroupCtx, GroupElement, GroupTable};
