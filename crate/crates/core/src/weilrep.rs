//! The representation `(L²(M), ρ)` attached to a [`WeilDatum`].
//!
//! Operators are kept as products of monomial factors (`ρ(h_t)`, `ρ(u_s)`)
//! and Fourier factors (`ρ(w)`), and are materialized on demand as exact
//! blocks of columns. Kernel convention: `(ρ_g f)(x) = Σ_y K_g(x, y) f(y)`.

use std::sync::{Arc, Mutex};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::Pow;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::FxHashMap;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::matalg::{dot, vec_mul, FqMatrix};
use crate::report::{Check, Tally};
use crate::scalars::{Cyclotomic, CyclotomicCtx};
use crate::slstar::{evaluate_word, Census, GeneratorToken, GroupElement, GroupTable, PresentationConfig};
use crate::weildata::{ModuleSpace, WeilDatum};

/// `(M f)(x) = ζ^{phase[x]} f(perm[x])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Monomial {
    perm: Vec<u32>,
    phase: Vec<u8>,
    q: u32,
}

impl Monomial {
    pub fn identity(q: u32, dim: usize) -> Self {
        Monomial { perm: (0..dim as u32).collect(), phase: vec![0; dim], q }
    }

    pub fn new(q: u32, perm: Vec<u32>, phase: Vec<u8>) -> Result<Self> {
        if perm.len() != phase.len() {
            return Err(Error::Dimension("permutation and phase lengths differ".into()));
        }
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            let p = p as usize;
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidParameter("not a permutation".into()));
            }
        }
        if phase.iter().any(|&e| e as u32 >= q) {
            return Err(Error::InvalidParameter("phase exponent out of range".into()));
        }
        Ok(Monomial { perm, phase, q })
    }

    pub fn dim(&self) -> usize {
        self.perm.len()
    }
    pub fn perm(&self) -> &[u32] {
        &self.perm
    }
    pub fn phase(&self) -> &[u8] {
        &self.phase
    }

    pub fn is_identity(&self) -> bool {
        self.phase.iter().all(|&e| e == 0) && self.perm.iter().enumerate().all(|(i, &p)| p as usize == i)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Monomial) -> Monomial {
        let q = self.q;
        let (perm, phase) = self
            .perm
            .iter()
            .zip(&self.phase)
            .map(|(&p, &e)| {
                let p = p as usize;
                (other.perm[p], ((e as u32 + other.phase[p] as u32) % q) as u8)
            })
            .unzip();
        Monomial { perm, phase, q }
    }

    /// Inverse, which is also the adjoint.
    pub fn inverse(&self) -> Monomial {
        let q = self.q;
        let mut perm = vec![0u32; self.dim()];
        let mut phase = vec![0u8; self.dim()];
        for (x, (&p, &e)) in self.perm.iter().zip(&self.phase).enumerate() {
            perm[p as usize] = x as u32;
            phase[p as usize] = ((q - e as u32) % q) as u8;
        }
        Monomial { perm, phase, q }
    }

    /// Kernel exponent at `(x, y)`, `None` where the kernel vanishes.
    pub fn entry(&self, x: usize, y: usize) -> Option<u32> {
        (self.perm[x] as usize == y).then_some(self.phase[x] as u32)
    }
}

/// Module data shared by every character twist.
#[derive(Debug)]
pub struct RepSpace {
    module: ModuleSpace,
    q: u32,
    n: usize,
    /// `B` with `χ(p, p') = ψ(p B p'^⋄)`.
    form: FqMatrix,
    /// Row permutation turning a Fourier factor into a plain DFT.
    fourier_perm: Vec<u32>,
    /// `p B p'^⋄` for all pairs when `|M|` is small.
    form_table: Option<Vec<u8>>,
    ctx: Arc<CyclotomicCtx>,
}

impl RepSpace {
    fn new(d: &WeilDatum) -> Result<Self> {
        let module = *d.module();
        let form = d.chi_form().clone();
        let bt_inv = form
            .transpose()
            .inverse()
            .ok_or_else(|| Error::CheckFailed("chi form is degenerate".into()))?;
        let fourier_perm = module.linear_perm(&bt_inv);
        let dim = module.size();
        let form_table = (dim <= crate::weildata::TABLE_LIMIT).then(|| {
            let f = module.field();
            let rows: Vec<Vec<u32>> = (0..dim).map(|i| vec_mul(f, &module.coords(i), &form)).collect();
            let coords: Vec<Vec<u32>> = (0..dim).map(|i| module.coords(i)).collect();
            let mut t = vec![0u8; dim * dim];
            for (i, r) in rows.iter().enumerate() {
                for (j, c) in coords.iter().enumerate() {
                    t[i * dim + j] = dot(f, r, c) as u8;
                }
            }
            t
        });
        Ok(RepSpace {
            module,
            q: module.field().q(),
            n: module.n(),
            form,
            fourier_perm,
            form_table,
            ctx: d.values_ctx().clone(),
        })
    }

    pub fn dim(&self) -> usize {
        self.module.size()
    }
    pub fn q(&self) -> u32 {
        self.q
    }
    pub fn module(&self) -> &ModuleSpace {
        &self.module
    }

    /// `p_x B p_y^⋄`.
    #[inline]
    pub fn form(&self, x: usize, y: usize) -> u32 {
        match &self.form_table {
            Some(t) => t[x * self.dim() + y] as u32,
            None => {
                let f = self.module.field();
                dot(f, &vec_mul(f, &self.module.coords(x), &self.form), &self.module.coords(y))
            }
        }
    }
}

/// A factor of a Weil operator.
#[derive(Clone, Debug)]
pub enum Factor {
    Monomial(Arc<Monomial>),
    /// Kernel `c ζ^{τ p_x B p_y^⋄}` with `c = q^{-2n}`.
    Fourier { twist: u32 },
}

/// A product `k · F_1 F_2 ⋯ F_r` acting on `L²(M)`.
#[derive(Clone, Debug)]
pub struct WeilOperator {
    space: Arc<RepSpace>,
    scalar: i64,
    factors: Vec<Factor>,
}

impl WeilOperator {
    pub fn identity(space: &Arc<RepSpace>) -> Self {
        WeilOperator { space: space.clone(), scalar: 1, factors: Vec::new() }
    }

    pub fn monomial(space: &Arc<RepSpace>, m: Monomial) -> Self {
        WeilOperator { space: space.clone(), scalar: 1, factors: vec![Factor::Monomial(Arc::new(m))] }
    }

    pub fn fourier(space: &Arc<RepSpace>, twist: u32) -> Self {
        WeilOperator { space: space.clone(), scalar: 1, factors: vec![Factor::Fourier { twist }] }
    }

    pub fn space(&self) -> &Arc<RepSpace> {
        &self.space
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
    pub fn scalar(&self) -> i64 {
        self.scalar
    }
    pub fn factors(&self) -> &[Factor] {
        &self.factors
    }

    pub fn scaled(mut self, k: i64) -> Self {
        self.scalar *= k;
        self
    }

    fn push(&mut self, f: &Factor) {
        if let (Some(Factor::Monomial(a)), Factor::Monomial(b)) = (self.factors.last(), f) {
            let c = a.compose(b);
            self.factors.pop();
            if !c.is_identity() {
                self.factors.push(Factor::Monomial(Arc::new(c)));
            }
            return;
        }
        if let Factor::Monomial(b) = f {
            if b.is_identity() {
                return;
            }
        }
        self.factors.push(f.clone());
    }

    /// `self ∘ rhs`.
    pub fn then(&self, rhs: &WeilOperator) -> WeilOperator {
        let mut out = self.clone();
        out.scalar *= rhs.scalar;
        for f in &rhs.factors {
            out.push(f);
        }
        out
    }

    pub fn adjoint(&self) -> WeilOperator {
        let q = self.space.q;
        let mut out = WeilOperator::identity(&self.space).scaled(self.scalar);
        for f in self.factors.iter().rev() {
            match f {
                Factor::Monomial(m) => out.push(&Factor::Monomial(Arc::new(m.inverse()))),
                // χ is symmetric, so the adjoint only conjugates.
                Factor::Fourier { twist } => out.push(&Factor::Fourier { twist: (q - twist) % q }),
            }
        }
        out
    }

    pub fn fourier_count(&self) -> usize {
        self.factors.iter().filter(|f| matches!(f, Factor::Fourier { .. })).count()
    }

    /// The single monomial factor, if the operator has no Fourier factor.
    pub fn as_monomial(&self) -> Option<Monomial> {
        match self.factors.as_slice() {
            [] => Some(Monomial::identity(self.space.q, self.dim())),
            [Factor::Monomial(m)] => Some((**m).clone()),
            _ => None,
        }
    }

    /// `(L, τ, R)` for operators of the form `k · L F_τ R`.
    fn single_fourier(&self) -> Option<(Option<&Monomial>, u32, Option<&Monomial>)> {
        let mut left = None;
        let mut right = None;
        let mut twist = None;
        for f in &self.factors {
            match (f, twist) {
                (Factor::Monomial(m), None) => left = Some(&**m),
                (Factor::Monomial(m), Some(_)) => right = Some(&**m),
                (Factor::Fourier { twist: t }, None) => twist = Some(*t),
                (Factor::Fourier { .. }, Some(_)) => return None,
            }
        }
        twist.map(|t| (left, t, right))
    }

    /// The kernel exponents of an operator with exactly one Fourier factor.
    pub fn fourier_kernel(&self) -> Option<FourierKernel<'_>> {
        let (l, t, r) = self.single_fourier()?;
        Some(FourierKernel { inner: SingleFourier::new(&self.space, l, t, r) })
    }

    /// Kernel entry `K(x, y)` for operators with at most one Fourier factor.
    pub fn kernel_entry(&self, x: usize, y: usize) -> Result<Cyclotomic> {
        let ctx = &self.space.ctx;
        let k = Cyclotomic::from_integer(ctx, self.scalar);
        if let Some(m) = self.as_monomial() {
            return Ok(match m.entry(x, y) {
                Some(e) => k.mul_zeta(e as i64),
                None => Cyclotomic::zero(ctx),
            });
        }
        let (l, t, r) = self
            .single_fourier()
            .ok_or_else(|| Error::Unsupported("kernel entries need at most one Fourier factor".into()))?;
        let kernel = SingleFourier::new(&self.space, l, t, r);
        let c = num_rational::BigRational::new(BigInt::from(1), BigInt::from(self.space.q).pow(2 * self.space.n as u32));
        Ok(k.mul_zeta(kernel.exponent(x, y) as i64).scale(&c))
    }

    /// `self` applied to the columns of `block`.
    pub fn apply(&self, block: &DenseBlock) -> Result<DenseBlock> {
        let mut out = block.clone();
        for f in self.factors.iter().rev() {
            match f {
                Factor::Monomial(m) => out.left_monomial(m),
                Factor::Fourier { twist } => out.left_fourier(&self.space, *twist)?,
            }
        }
        out.scale_int(self.scalar)?;
        out.normalize();
        Ok(out)
    }

    /// The columns `K(·, y)` for `y` in `cols`.
    ///
    /// The rightmost factors up to the last-but-one Fourier factor are
    /// filled in from their closed-form kernel; the rest are applied.
    pub fn columns(&self, cols: &[usize]) -> Result<DenseBlock> {
        let fourier: Vec<usize> = self
            .factors
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, Factor::Fourier { .. }))
            .map(|(i, _)| i)
            .collect();
        let split = if fourier.len() >= 2 { fourier[fourier.len() - 2] + 1 } else { 0 };
        let tail = WeilOperator { space: self.space.clone(), scalar: self.scalar, factors: self.factors[split..].to_vec() };
        let mut out = tail.fill_columns(cols)?;
        for f in self.factors[..split].iter().rev() {
            match f {
                Factor::Monomial(m) => out.left_monomial(m),
                Factor::Fourier { twist } => out.left_fourier(&self.space, *twist)?,
            }
        }
        out.normalize();
        Ok(out)
    }

    /// Columns of an operator with at most one Fourier factor, written
    /// directly from its kernel.
    fn fill_columns(&self, cols: &[usize]) -> Result<DenseBlock> {
        let q = self.space.q;
        let dim = self.dim();
        let mut out = DenseBlock::zeros(q, dim, cols.len());
        if let Some(m) = self.as_monomial() {
            let inv = m.inverse();
            for (c, &y) in cols.iter().enumerate() {
                let x = inv.perm[y] as usize;
                let i = out.idx(x, m.phase[x] as usize, c);
                out.data[i] = 1;
            }
        } else {
            let (l, t, r) = self.single_fourier().expect("at most one Fourier factor");
            let kernel = SingleFourier::new(&self.space, l, t, r);
            for (c, &y) in cols.iter().enumerate() {
                for x in 0..dim {
                    let i = out.idx(x, kernel.exponent(x, y) as usize, c);
                    out.data[i] = 1;
                }
            }
            out.denom_exp = 2 * self.space.n as u32;
        }
        out.scale_int(self.scalar)?;
        out.normalize();
        Ok(out)
    }

    /// The full kernel.
    pub fn dense(&self) -> Result<DenseBlock> {
        self.columns(&(0..self.dim()).collect::<Vec<_>>())
    }

    /// Floating-point mirror of [`WeilOperator::columns`].
    pub fn columns_float(&self, cols: &[usize]) -> FloatBlock {
        let mut out = FloatBlock::unit_columns(self.dim(), cols);
        for f in self.factors.iter().rev() {
            match f {
                Factor::Monomial(m) => out.left_monomial(m),
                Factor::Fourier { twist } => out.left_fourier(&self.space, *twist),
            }
        }
        out.scale(self.scalar as f64);
        out
    }
}

/// Exponent evaluation for `L F_τ R`.
struct SingleFourier<'a> {
    space: &'a RepSpace,
    left: Option<&'a Monomial>,
    twist: u32,
    right_inv: Option<Monomial>,
}

impl<'a> SingleFourier<'a> {
    fn new(space: &'a RepSpace, left: Option<&'a Monomial>, twist: u32, right: Option<&Monomial>) -> Self {
        SingleFourier { space, left, twist, right_inv: right.map(|r| r.inverse()) }
    }

    /// `K(x,y) = c ζ^{p_L[x] + τ form(π_L x, π_R^{-1} y) + p_R[π_R^{-1} y]}`.
    #[inline]
    fn exponent(&self, x: usize, y: usize) -> u32 {
        let q = self.space.q;
        let (lx, lp) = match self.left {
            Some(l) => (l.perm[x] as usize, l.phase[x] as u32),
            None => (x, 0),
        };
        // R^{-1} has phase -p_R[π_R^{-1} y] at y.
        let (ry, rp) = match &self.right_inv {
            Some(ri) => (ri.perm[y] as usize, (q - ri.phase[y] as u32) % q),
            None => (y, 0),
        };
        (lp + self.twist * self.space.form(lx, ry) + rp) % q
    }
}

/// `K(x, y) = k q^{-2n} ζ_q^{e(x, y)}`, with `k` the operator's scalar.
pub struct FourierKernel<'a> {
    inner: SingleFourier<'a>,
}

impl FourierKernel<'_> {
    #[inline]
    pub fn exponent(&self, x: usize, y: usize) -> u32 {
        self.inner.exponent(x, y)
    }
}

/// Which kernel columns a comparison inspects.
#[derive(Clone, Debug)]
pub enum ColumnPlan {
    All,
    Sample(Vec<usize>),
}

impl ColumnPlan {
    fn columns(&self, dim: usize) -> Vec<usize> {
        match self {
            ColumnPlan::All => (0..dim).collect(),
            ColumnPlan::Sample(c) => c.clone(),
        }
    }
    pub fn is_all(&self) -> bool {
        matches!(self, ColumnPlan::All)
    }
}

/// Result of comparing two operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Comparison {
    pub equal: bool,
    /// Whether every kernel entry was compared.
    pub exhaustive: bool,
    pub mismatch: Option<(usize, usize)>,
}

/// Exact comparison of `a` and `b` on the planned columns.
pub fn compare(a: &WeilOperator, b: &WeilOperator, plan: &ColumnPlan) -> Result<Comparison> {
    let dim = a.dim();
    if let (Some(ma), Some(mb)) = (a.as_monomial(), b.as_monomial()) {
        let mismatch = if a.scalar != b.scalar {
            Some((0, 0))
        } else {
            (0..dim).find(|&x| ma.perm[x] != mb.perm[x] || ma.phase[x] != mb.phase[x]).map(|x| (x, ma.perm[x] as usize))
        };
        return Ok(Comparison { equal: mismatch.is_none(), exhaustive: true, mismatch });
    }
    if let (Some((la, ta, ra)), Some((lb, tb, rb))) = (a.single_fourier(), b.single_fourier()) {
        if a.scalar == b.scalar {
            let ka = SingleFourier::new(&a.space, la, ta, ra);
            let kb = SingleFourier::new(&b.space, lb, tb, rb);
            let cols = plan.columns(dim);
            for &y in &cols {
                for x in 0..dim {
                    if ka.exponent(x, y) != kb.exponent(x, y) {
                        return Ok(Comparison { equal: false, exhaustive: plan.is_all(), mismatch: Some((x, y)) });
                    }
                }
            }
            return Ok(Comparison { equal: true, exhaustive: plan.is_all(), mismatch: None });
        }
    }
    let cols = plan.columns(dim);
    let mut mismatch = None;
    for chunk in cols.chunks(column_chunk(a.space.q, dim)) {
        let (da, db) = (a.columns(chunk)?, b.columns(chunk)?);
        if let Some((x, c)) = da.first_difference(&db) {
            mismatch = Some((x, chunk[c]));
            break;
        }
    }
    Ok(Comparison { equal: mismatch.is_none(), exhaustive: plan.is_all(), mismatch })
}

/// Columns per dense block, keeping a block near 64 MiB.
fn column_chunk(q: u32, dim: usize) -> usize {
    let per_col = dim * q as usize * 8;
    ((64usize << 20) / per_col).max(1)
}

/// Exact unitarity test `K K^† = 1` on the planned columns.
pub fn check_unitary_on(op: &WeilOperator, plan: &ColumnPlan) -> Result<Comparison> {
    let prod = op.then(&op.adjoint());
    compare(&prod, &WeilOperator::identity(op.space()), plan)
}

/// Exact unitarity test over the full kernel.
pub fn check_unitary(op: &WeilOperator) -> Result<bool> {
    Ok(check_unitary_on(op, &ColumnPlan::All)?.equal)
}

thread_local! {
    static SCRATCH: std::cell::RefCell<Vec<i64>> = const { std::cell::RefCell::new(Vec::new()) };
}

/// A buffer of `len` entries with unspecified contents, reusing the
/// thread's spare allocation when it fits.
fn take_scratch(len: usize) -> Vec<i64> {
    let mut v = SCRATCH.with(|s| std::mem::take(&mut *s.borrow_mut()));
    if v.len() != len {
        v = vec![0; len];
    }
    v
}

fn give_scratch(v: Vec<i64>) {
    SCRATCH.with(|s| *s.borrow_mut() = v);
}

/// Columns of a kernel with entries in `q^{-e} Z[ζ_q]`.
///
/// Entry `(x, col)` is `q^{-e} Σ_j a_j ζ^j` with `a_j` stored at
/// `data[(x q + j) cols + col]`; after normalization `a_{q-1} = 0` and
/// `e` is minimal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DenseBlock {
    q: u32,
    rows: usize,
    cols: usize,
    denom_exp: u32,
    data: Vec<i64>,
}

impl DenseBlock {
    pub fn zeros(q: u32, rows: usize, cols: usize) -> Self {
        DenseBlock { q, rows, cols, denom_exp: 0, data: vec![0; rows * q as usize * cols] }
    }

    /// Column `c` is the indicator of row `cols[c]`.
    pub fn unit_columns(q: u32, rows: usize, cols: &[usize]) -> Self {
        let mut b = DenseBlock::zeros(q, rows, cols.len());
        for (c, &y) in cols.iter().enumerate() {
            let i = b.idx(y, 0, c);
            b.data[i] = 1;
        }
        b
    }

    #[inline]
    fn idx(&self, row: usize, j: usize, col: usize) -> usize {
        (row * self.q as usize + j) * self.cols + col
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
    pub fn cols(&self) -> usize {
        self.cols
    }
    /// Entries carry the common denominator `q^denominator_exp`.
    pub fn denominator_exp(&self) -> u32 {
        self.denom_exp
    }

    fn row_len(&self) -> usize {
        self.q as usize * self.cols
    }

    fn left_monomial(&mut self, m: &Monomial) {
        let q = self.q as usize;
        let rl = self.row_len();
        let cols = self.cols;
        let mut out = take_scratch(self.data.len());
        for (x, (&p, &e)) in m.perm.iter().zip(&m.phase).enumerate() {
            let src = &self.data[p as usize * rl..(p as usize + 1) * rl];
            let dst = &mut out[x * rl..(x + 1) * rl];
            for j in 0..q {
                let jj = (j + e as usize) % q;
                dst[jj * cols..(jj + 1) * cols].copy_from_slice(&src[j * cols..(j + 1) * cols]);
            }
        }
        give_scratch(std::mem::replace(&mut self.data, out));
    }

    fn max_abs(&self) -> i64 {
        self.data.iter().map(|v| v.abs()).max().unwrap_or(0)
    }

    fn left_fourier(&mut self, space: &RepSpace, twist: u32) -> Result<()> {
        if self.max_abs() > i64::MAX / (4 * self.rows as i64) {
            return Err(Error::Overflow);
        }
        let q = self.q as usize;
        let rl = self.row_len();
        let cols = self.cols;
        let mut cur = take_scratch(self.data.len());
        for (v, &src) in space.fourier_perm.iter().enumerate() {
            let s = src as usize;
            cur[v * rl..(v + 1) * rl].copy_from_slice(&self.data[s * rl..(s + 1) * rl]);
        }
        let axes = 4 * space.n;
        let mut next = std::mem::take(&mut self.data);
        for a in 0..axes {
            let stride = q.pow((axes - 1 - a) as u32);
            for base in 0..self.rows {
                if (base / stride) % q != 0 {
                    continue;
                }
                for k in 0..q {
                    let r_out = base + k * stride;
                    let out = &mut next[r_out * rl..(r_out + 1) * rl];
                    // m = 0 contributes without rotation
                    out.copy_from_slice(&cur[base * rl..(base + 1) * rl]);
                    for m in 1..q {
                        let e = (twist as usize * k * m) % q;
                        let r_in = base + m * stride;
                        let inp = &cur[r_in * rl..(r_in + 1) * rl];
                        for j in 0..q {
                            let jj = (j + e) % q;
                            let o = &mut out[jj * cols..(jj + 1) * cols];
                            let i = &inp[j * cols..(j + 1) * cols];
                            // magnitudes are bounded by the guard above
                            for (ov, iv) in o.iter_mut().zip(i) {
                                *ov = ov.wrapping_add(*iv);
                            }
                        }
                    }
                }
            }
            std::mem::swap(&mut cur, &mut next);
        }
        give_scratch(next);
        self.data = cur;
        self.denom_exp += 2 * space.n as u32;
        self.normalize();
        Ok(())
    }

    fn scale_int(&mut self, k: i64) -> Result<()> {
        if k == 1 {
            return Ok(());
        }
        for v in &mut self.data {
            *v = v.checked_mul(k).ok_or(Error::Overflow)?;
        }
        Ok(())
    }

    /// Brings entries to canonical form.
    pub fn normalize(&mut self) {
        let q = self.q as usize;
        let cols = self.cols;
        let rl = self.row_len();
        for row in self.data.chunks_mut(rl) {
            let (head, last) = row.split_at_mut((q - 1) * cols);
            for plane in head.chunks_mut(cols) {
                for (v, l) in plane.iter_mut().zip(last.iter()) {
                    *v -= l;
                }
            }
            last.iter_mut().for_each(|v| *v = 0);
        }
        // Exact division by the odd q through its inverse modulo 2^64.
        let qu = self.q as u64;
        let mut inv = 1u64;
        for _ in 0..6 {
            inv = inv.wrapping_mul(2u64.wrapping_sub(qu.wrapping_mul(inv)));
        }
        let limit = u64::MAX / qu;
        let divisible = |v: i64| v.unsigned_abs().wrapping_mul(inv) <= limit;
        while self.denom_exp > 0 && self.data.iter().all(|&v| divisible(v)) {
            for v in self.data.iter_mut() {
                let m = v.unsigned_abs().wrapping_mul(inv) as i64;
                *v = if *v < 0 { -m } else { m };
            }
            self.denom_exp -= 1;
        }
        if self.data.iter().all(|&v| v == 0) {
            self.denom_exp = 0;
        }
    }

    /// First `(row, col)` where the blocks differ.
    pub fn first_difference(&self, other: &DenseBlock) -> Option<(usize, usize)> {
        if self.rows != other.rows || self.cols != other.cols || self.q != other.q {
            return Some((0, 0));
        }
        let q = self.q as usize;
        let scale = |b: &DenseBlock, v: i64| -> i128 {
            let e = self.denom_exp.max(other.denom_exp) - b.denom_exp;
            v as i128 * (self.q as i128).pow(e)
        };
        for x in 0..self.rows {
            for c in 0..self.cols {
                for j in 0..q {
                    let i = self.idx(x, j, c);
                    if scale(self, self.data[i]) != scale(other, other.data[i]) {
                        return Some((x, c));
                    }
                }
            }
        }
        None
    }

    /// Whether column `c` is the indicator of row `rows[c]`.
    pub fn is_unit_columns(&self, rows: &[usize]) -> bool {
        *self == DenseBlock::unit_columns(self.q, self.rows, rows)
    }

    pub fn entry(&self, ctx: &Arc<CyclotomicCtx>, x: usize, c: usize) -> Cyclotomic {
        let q = self.q as usize;
        let counts: Vec<i64> = (0..q).map(|j| self.data[self.idx(x, j, c)]).collect();
        Cyclotomic::from_group_ring(ctx, &counts, BigInt::from(self.q).pow(self.denom_exp))
    }

    /// Conjugate transpose of a square block.
    pub fn adjoint(&self) -> DenseBlock {
        let q = self.q as usize;
        let mut out = DenseBlock::zeros(self.q, self.cols, self.rows);
        out.denom_exp = self.denom_exp;
        for x in 0..self.rows {
            for c in 0..self.cols {
                for j in 0..q {
                    let i = out.idx(c, (q - j) % q, x);
                    out.data[i] = self.data[self.idx(x, j, c)];
                }
            }
        }
        out.normalize();
        out
    }

    /// `{dim, denominator, entries}` with each entry a list of exact
    /// rational coefficients in the power basis of `Q(ζ_q)`.
    pub fn to_json(&self, ctx: &Arc<CyclotomicCtx>) -> Value {
        let entries: Vec<Vec<Value>> = (0..self.rows)
            .map(|x| {
                (0..self.cols)
                    .map(|c| serde_json::to_value(self.entry(ctx, x, c)).unwrap_or(Value::Null))
                    .collect()
            })
            .collect();
        json!({
            "rows": self.rows,
            "cols": self.cols,
            "q": self.q,
            "entries": entries,
        })
    }

    pub fn to_float(&self) -> FloatBlock {
        let q = self.q as usize;
        let roots: Vec<Complex64> =
            (0..q).map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / q as f64)).collect();
        let scale = (self.q as f64).powi(-(self.denom_exp as i32));
        let mut out = FloatBlock::zeros(self.rows, self.cols);
        for x in 0..self.rows {
            for c in 0..self.cols {
                let v: Complex64 = (0..q).map(|j| roots[j] * self.data[self.idx(x, j, c)] as f64).sum();
                out.data[x * self.cols + c] = v * scale;
            }
        }
        out
    }
}

/// Floating-point columns, row-major.
#[derive(Clone, Debug)]
pub struct FloatBlock {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl FloatBlock {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        FloatBlock { rows, cols, data: vec![Complex64::new(0.0, 0.0); rows * cols] }
    }

    pub fn unit_columns(rows: usize, cols: &[usize]) -> Self {
        let mut b = FloatBlock::zeros(rows, cols.len());
        for (c, &y) in cols.iter().enumerate() {
            b.data[y * cols.len() + c] = Complex64::new(1.0, 0.0);
        }
        b
    }

    pub fn get(&self, x: usize, c: usize) -> Complex64 {
        self.data[x * self.cols + c]
    }

    fn left_monomial(&mut self, m: &Monomial) {
        let cols = self.cols;
        let mut out = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (x, (&p, &e)) in m.perm.iter().zip(&m.phase).enumerate() {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * e as f64 / m.q as f64);
            let p = p as usize;
            for c in 0..cols {
                out[x * cols + c] = z * self.data[p * cols + c];
            }
        }
        self.data = out;
    }

    fn left_fourier(&mut self, space: &RepSpace, twist: u32) {
        let q = space.q as usize;
        let cols = self.cols;
        let mut cur = vec![Complex64::new(0.0, 0.0); self.data.len()];
        for (v, &s) in space.fourier_perm.iter().enumerate() {
            let s = s as usize;
            cur[v * cols..(v + 1) * cols].copy_from_slice(&self.data[s * cols..(s + 1) * cols]);
        }
        let roots: Vec<Complex64> =
            (0..q).map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / q as f64)).collect();
        let axes = 4 * space.n;
        let mut line = vec![Complex64::new(0.0, 0.0); q * cols];
        for a in 0..axes {
            let stride = q.pow((axes - 1 - a) as u32);
            for base in 0..self.rows {
                if (base / stride) % q != 0 {
                    continue;
                }
                line.iter_mut().for_each(|v| *v = Complex64::new(0.0, 0.0));
                for k in 0..q {
                    for m in 0..q {
                        let z = roots[(twist as usize * k * m) % q];
                        let r = base + m * stride;
                        for c in 0..cols {
                            line[k * cols + c] += z * cur[r * cols + c];
                        }
                    }
                }
                for k in 0..q {
                    let r = base + k * stride;
                    cur[r * cols..(r + 1) * cols].copy_from_slice(&line[k * cols..(k + 1) * cols]);
                }
            }
        }
        let c = (space.q as f64).powi(-2 * space.n as i32);
        cur.iter_mut().for_each(|v| *v *= c);
        self.data = cur;
    }

    fn scale(&mut self, k: f64) {
        self.data.iter_mut().for_each(|v| *v *= k);
    }

    /// Largest entrywise deviation.
    pub fn max_deviation(&self, other: &FloatBlock) -> f64 {
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Bound on memoized dense kernels, in bytes.
pub const MEMO_BYTES: usize = 256 << 20;

/// `ρ` for one datum: generator operators, word extension and a memo of
/// full kernels keyed by group element.
#[derive(Debug)]
pub struct WeilRep {
    datum: WeilDatum,
    space: Arc<RepSpace>,
    tokens: Mutex<FxHashMap<GeneratorToken, WeilOperator>>,
    memo: Mutex<FxHashMap<u128, Arc<DenseBlock>>>,
    memo_bytes: Mutex<usize>,
}

impl WeilRep {
    pub fn new(datum: WeilDatum) -> Result<Self> {
        let space = Arc::new(RepSpace::new(&datum)?);
        Ok(WeilRep {
            datum,
            space,
            tokens: Mutex::new(FxHashMap::default()),
            memo: Mutex::new(FxHashMap::default()),
            memo_bytes: Mutex::new(0),
        })
    }

    /// A representation sharing this one's module data under another twist.
    pub fn with_twist(&self, lambda: i64) -> Result<Self> {
        let d = WeilDatum::new(
            self.datum.group().clone(),
            crate::gfq::AdditiveCharacter::new(self.datum.field(), lambda)?,
        )?;
        Ok(WeilRep {
            datum: d,
            space: self.space.clone(),
            tokens: Mutex::new(FxHashMap::default()),
            memo: Mutex::new(FxHashMap::default()),
            memo_bytes: Mutex::new(0),
        })
    }

    pub fn datum(&self) -> &WeilDatum {
        &self.datum
    }
    pub fn space(&self) -> &Arc<RepSpace> {
        &self.space
    }
    pub fn dim(&self) -> usize {
        self.space.dim()
    }
    pub fn values_ctx(&self) -> &Arc<CyclotomicCtx> {
        &self.space.ctx
    }

    /// `ρ(h_t) f(x) = f(xt)`, `ρ(u_s) f(x) = γ(s, x) f(x)`,
    /// `ρ(w) f(x) = c Σ_y χ(x, y) f(y)`.
    pub fn generator(&self, tok: &GeneratorToken) -> Result<WeilOperator> {
        if let Some(op) = self.tokens.lock().expect("token cache").get(tok) {
            return Ok(op.clone());
        }
        crate::slstar::generator_matrix(self.datum.group(), tok)?;
        let q = self.space.q;
        let module = &self.space.module;
        let op = match tok {
            GeneratorToken::H(t) => {
                let perm = module.right_action_perm(t);
                WeilOperator::monomial(&self.space, Monomial::new(q, perm, vec![0; self.dim()])?)
            }
            GeneratorToken::U(s) => {
                let phase = self.datum.gamma_table(s);
                WeilOperator::monomial(&self.space, Monomial::new(q, (0..self.dim() as u32).collect(), phase)?)
            }
            GeneratorToken::W => WeilOperator::fourier(&self.space, self.datum.lambda()),
        };
        self.tokens.lock().expect("token cache").insert(tok.clone(), op.clone());
        Ok(op)
    }

    /// `ρ(g_1) ⋯ ρ(g_k)` for a word `g_1 ⋯ g_k`.
    pub fn word_operator(&self, word: &[GeneratorToken]) -> Result<WeilOperator> {
        let mut op = WeilOperator::identity(&self.space);
        for tok in word {
            op = op.then(&self.generator(tok)?);
        }
        Ok(op)
    }

    /// `ρ(g)`, after re-evaluating the word of `g`.
    pub fn element_operator(&self, g: &GroupElement) -> Result<WeilOperator> {
        if evaluate_word(self.datum.group(), &g.word)? != g.mat {
            return Err(Error::CheckFailed(format!("stale word for {:?}", g.mat)));
        }
        self.word_operator(&g.word)
    }

    /// The full kernel of `ρ(g)` for a tabulated element, memoized.
    pub fn element_dense(&self, table: &GroupTable, i: usize) -> Result<Arc<DenseBlock>> {
        let key = table.key(i);
        if let Some(d) = self.memo.lock().expect("memo").get(&key) {
            return Ok(d.clone());
        }
        let d = Arc::new(self.word_operator(&table.word(i))?.dense()?);
        let bytes = d.data.len() * 8;
        let mut used = self.memo_bytes.lock().expect("memo");
        if *used + bytes <= MEMO_BYTES {
            let mut memo = self.memo.lock().expect("memo");
            // first insert wins
            let entry = memo.entry(key).or_insert_with(|| d.clone()).clone();
            *used += bytes;
            return Ok(entry);
        }
        Ok(d)
    }

    /// `Ψ f(x, y) = f(x, λ y)` intertwining `self` (twist `λ_1`) with
    /// `other` (twist `λ_2`), `λ = λ_2 / λ_1`.
    pub fn psi_intertwiner(&self, other: &WeilRep) -> Result<WeilOperator> {
        let f = self.datum.field();
        let lam = f.mul(other.datum.lambda(), f.inv(self.datum.lambda()).expect("nonzero twist"));
        let m = self.space.module;
        let k = 2 * m.n();
        let mut g = FqMatrix::identity(f, 2 * k);
        for i in k..2 * k {
            g.set(i, i, lam);
        }
        let perm = m.linear_perm(&g);
        Ok(WeilOperator::monomial(&self.space, Monomial::new(f.q(), perm, vec![0; self.dim()])?))
    }
}

/// Settings for representation checks.
#[derive(Clone, Debug)]
pub struct RepCheckConfig {
    pub census: PresentationConfig,
    /// Above this dimension kernels are compared on sampled columns.
    pub full_kernel_dim: usize,
    pub sample_columns: usize,
    /// Random pairs for `ρ(g)ρ(h) = ρ(gh)`.
    pub product_pairs: usize,
    /// Random elements checked for unitarity.
    pub unitary_elements: usize,
    pub seed: u64,
}

impl Default for RepCheckConfig {
    fn default() -> Self {
        RepCheckConfig {
            census: PresentationConfig::default(),
            full_kernel_dim: 2401,
            sample_columns: 4,
            product_pairs: 1000,
            unitary_elements: 100,
            seed: 0,
        }
    }
}

impl RepCheckConfig {
    pub fn plan(&self, dim: usize, rng: &mut ChaCha8Rng) -> ColumnPlan {
        if dim <= self.full_kernel_dim {
            ColumnPlan::All
        } else {
            ColumnPlan::Sample((0..self.sample_columns).map(|_| rng.gen_range(0..dim)).collect())
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct RepReport {
    pub q: u32,
    pub n: usize,
    pub lambda: u32,
    pub dim: usize,
    pub relations: Vec<Check>,
    pub generators_unitary: Check,
    pub w_squared: Check,
    pub reflection: Check,
    pub homomorphism: Option<Check>,
    pub elements_unitary: Option<Check>,
}

impl RepReport {
    pub fn all_passed(&self) -> bool {
        crate::report::all_passed(&self.relations)
            && self.generators_unitary.passed
            && self.w_squared.passed
            && self.reflection.passed
            && self.homomorphism.as_ref().map_or(true, |c| c.passed)
            && self.elements_unitary.as_ref().map_or(true, |c| c.passed)
    }
}

fn record_cmp(t: &mut Tally, c: &Comparison, exhaustive: &mut bool, what: impl FnOnce() -> String) {
    *exhaustive &= c.exhaustive;
    t.record(c.equal, || match c.mismatch {
        Some((x, y)) => format!("{} (kernel entry {x}, {y})", what()),
        None => what(),
    });
}

/// The five relations as operator identities.
pub fn verify_rep_relations(rep: &WeilRep, census: &Census, cfg: &RepCheckConfig) -> Result<Vec<Check>> {
    let ctx = rep.datum.group();
    let field = ctx.field();
    let e = ctx.eps().value();
    let m = ctx.block_size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x7e1);
    let plan = cfg.plan(rep.dim(), &mut rng);
    let h = |t: &FqMatrix| rep.generator(&GeneratorToken::H(t.clone()));
    let u = |s: &FqMatrix| rep.generator(&GeneratorToken::U(s.clone()));
    let w = rep.generator(&GeneratorToken::W)?;

    let mut r1 = Tally::new();
    let mut ex1 = census.units_exhaustive && census.symmetric_exhaustive;
    let hs: Vec<WeilOperator> = census.units.iter().map(h).collect::<Result<_>>()?;
    let unit_pairs: Vec<(usize, usize)> = if census.units_exhaustive {
        let k = census.units.len();
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
    } else {
        let k = census.units.len();
        (0..k).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect()
    };
    for (i, j) in unit_pairs {
        let c = compare(&hs[i].then(&hs[j]), &h(&census.units[i].mul(&census.units[j]))?, &plan)?;
        record_cmp(&mut r1, &c, &mut ex1, || format!("h_t h_t' at t={:?}, t'={:?}", census.units[i], census.units[j]));
    }
    let us: Vec<WeilOperator> = census.symmetric.iter().map(u).collect::<Result<_>>()?;
    let k = census.symmetric.len();
    let sym_pairs: Vec<(usize, usize)> = if census.symmetric_exhaustive {
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
    } else {
        (0..k).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect()
    };
    for (i, j) in sym_pairs {
        let (s, s2) = (&census.symmetric[i], &census.symmetric[j]);
        let c = compare(&us[i].then(&us[j]), &u(&s.add(s2))?, &plan)?;
        record_cmp(&mut r1, &c, &mut ex1, || format!("u_s u_s' at s={s:?}, s'={s2:?}"));
    }

    let mut r2 = Tally::new();
    let mut ex2 = true;
    let c = compare(&w.then(&w), &h(&FqMatrix::scalar(field, m, e))?, &plan)?;
    record_cmp(&mut r2, &c, &mut ex2, || "w^2 = h_eps".into());

    let mut r3 = Tally::new();
    let mut ex3 = census.units_exhaustive && census.symmetric_exhaustive;
    for (t, ht) in census.units.iter().zip(&hs) {
        let ts = ctx.star(t)?;
        for (s, us_) in census.symmetric.iter().zip(&us) {
            let c = compare(&ht.then(us_), &u(&t.mul(s).mul(&ts))?.then(ht), &plan)?;
            record_cmp(&mut r3, &c, &mut ex3, || format!("h_t u_s at t={t:?}, s={s:?}"));
        }
    }

    let mut r4 = Tally::new();
    let mut ex4 = census.units_exhaustive;
    for (t, ht) in census.units.iter().zip(&hs) {
        let ts_inv = ctx.star(t)?.inverse().expect("unit");
        let c = compare(&w.then(ht), &h(&ts_inv)?.then(&w), &plan)?;
        record_cmp(&mut r4, &c, &mut ex4, || format!("w h_t at t={t:?}"));
    }

    let mut r5 = Tally::new();
    let mut ex5 = census.symmetric_exhaustive;
    for t in &census.admissible {
        let ut = u(&t.inverse().expect("unit"))?;
        let lhs = w.then(&ut).then(&w).then(&u(&t.scale(-e))?).then(&w).then(&ut);
        let c = compare(&lhs, &h(&t.scale(-e))?, &plan)?;
        record_cmp(&mut r5, &c, &mut ex5, || format!("relation 5 at t={t:?}"));
    }

    Ok(vec![
        r1.finish("1", "rho(h_t)rho(h_t') = rho(h_tt'), rho(u_s)rho(u_s') = rho(u_(s+s'))", ex1),
        r2.finish("2", "rho(w)^2 = rho(h_eps)", ex2),
        r3.finish("3", "rho(h_t)rho(u_s) = rho(u_(t s t*))rho(h_t)", ex3),
        r4.finish("4", "rho(w)rho(h_t) = rho(h_(t*^-1))rho(w)", ex4),
        r5.finish("5", "rho(w u_(t^-1) w u_(-eps t) w u_(t^-1)) = rho(h_(-eps t))", ex5),
    ])
}

/// Unitarity of every generator operator in the census.
pub fn verify_generators_unitary(rep: &WeilRep, census: &Census, cfg: &RepCheckConfig) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x0417);
    let plan = cfg.plan(rep.dim(), &mut rng);
    let mut t = Tally::new();
    let mut ex = census.units_exhaustive && census.symmetric_exhaustive;
    let toks = census
        .units
        .iter()
        .map(|a| GeneratorToken::H(a.clone()))
        .chain(census.symmetric.iter().map(|s| GeneratorToken::U(s.clone())))
        .chain(std::iter::once(GeneratorToken::W));
    for tok in toks {
        let op = rep.generator(&tok)?;
        let c = check_unitary_on(&op, &plan)?;
        record_cmp(&mut t, &c, &mut ex, || format!("rho({tok}) not unitary"));
    }
    Ok(t.finish("generators-unitary", "rho(g) rho(g)^dagger = 1 for every generator", ex))
}

/// `ρ(w)² = ρ(h_{-1})` and `ρ(h_{-1}) f(x) = f(-x)`.
pub fn verify_w_square(rep: &WeilRep, cfg: &RepCheckConfig) -> Result<(Check, Check)> {
    let ctx = rep.datum.group();
    let m = ctx.block_size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x2);
    let plan = cfg.plan(rep.dim(), &mut rng);
    let w = rep.generator(&GeneratorToken::W)?;
    let hm = rep.generator(&GeneratorToken::H(FqMatrix::scalar(ctx.field(), m, -1)))?;
    let mut t = Tally::new();
    let mut ex = true;
    let c = compare(&w.then(&w), &hm, &plan)?;
    record_cmp(&mut t, &c, &mut ex, || "rho(w)^2 != rho(h_-1)".into());
    let neg = rep.space.module.negation_perm();
    let reflect = WeilOperator::monomial(&rep.space, Monomial::new(rep.space.q, neg, vec![0; rep.dim()])?);
    let mut t2 = Tally::new();
    let c2 = compare(&hm, &reflect, &ColumnPlan::All)?;
    t2.record(c2.equal, || "rho(h_-1) is not f(x) -> f(-x)".into());
    Ok((
        t.finish("w-squared", "rho(w)^2 = rho(h_-1)", ex),
        t2.finish("reflection", "rho(h_-1) f(x) = f(-x)", true),
    ))
}

/// Above this dimension element-level checks inspect a few random kernel
/// columns per instance instead of materializing full kernels.
pub const DENSE_ELEMENT_DIM: usize = 625;

/// Columns drawn per instance above [`DENSE_ELEMENT_DIM`].
const ELEMENT_COLUMNS: usize = 4;

fn element_plan(dim: usize, rng: &mut ChaCha8Rng) -> ColumnPlan {
    if dim <= DENSE_ELEMENT_DIM {
        ColumnPlan::All
    } else {
        ColumnPlan::Sample((0..ELEMENT_COLUMNS).map(|_| rng.gen_range(0..dim)).collect())
    }
}

/// `ρ(g) ρ(h) = ρ(gh)` over random pairs of tabulated elements, comparing
/// full kernels up to [`DENSE_ELEMENT_DIM`] and random columns beyond.
pub fn verify_homomorphism(rep: &WeilRep, table: &GroupTable, pairs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    let order = table.order();
    for _ in 0..pairs {
        let (g, h) = (rng.gen_range(0..order), rng.gen_range(0..order));
        let gh = table
            .product(g, h)
            .ok_or_else(|| Error::CheckFailed("group table is not closed".into()))?;
        let rho_g = rep.word_operator(&table.word(g))?;
        if rep.dim() <= DENSE_ELEMENT_DIM {
            let left = rho_g.apply(&*rep.element_dense(table, h)?)?;
            let right = rep.element_dense(table, gh)?;
            t.record(left == *right, || format!("rho(g)rho(h) != rho(gh) at elements {g}, {h}"));
        } else {
            let plan = element_plan(rep.dim(), &mut rng);
            let left = rho_g.then(&rep.word_operator(&table.word(h))?);
            let c = compare(&left, &rep.word_operator(&table.word(gh))?, &plan)?;
            t.record(c.equal, || format!("rho(g)rho(h) != rho(gh) at elements {g}, {h}, kernel entry {:?}", c.mismatch));
        }
    }
    Ok(t.finish("homomorphism", "rho(g)rho(h) = rho(gh) on random pairs", false))
}

/// Unitarity of `ρ(g)` for random tabulated elements.
pub fn verify_elements_unitary(rep: &WeilRep, table: &GroupTable, count: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x3);
    let mut t = Tally::new();
    for _ in 0..count {
        let g = rng.gen_range(0..table.order());
        let plan = element_plan(rep.dim(), &mut rng);
        let op = rep.word_operator(&table.word(g))?;
        let c = check_unitary_on(&op, &plan)?;
        t.record(c.equal, || format!("rho of element {g} not unitary"));
    }
    Ok(t.finish("elements-unitary", "rho(g) unitary on random elements", false))
}

/// Runs the generator-level checks and, given a group table, the
/// element-level ones.
pub fn verify_representation(rep: &WeilRep, table: Option<&GroupTable>, cfg: &RepCheckConfig) -> Result<RepReport> {
    let census = Census::build(rep.datum.group(), &cfg.census)?;
    let relations = verify_rep_relations(rep, &census, cfg)?;
    let generators_unitary = verify_generators_unitary(rep, &census, cfg)?;
    let (w_squared, reflection) = verify_w_square(rep, cfg)?;
    let (homomorphism, elements_unitary) = match table {
        Some(tb) => (
            Some(verify_homomorphism(rep, tb, cfg.product_pairs, cfg.seed)?),
            Some(verify_elements_unitary(rep, tb, cfg.unitary_elements, cfg.seed)?),
        ),
        None => (None, None),
    };
    Ok(RepReport {
        q: rep.space.q,
        n: rep.space.n,
        lambda: rep.datum.lambda(),
        dim: rep.dim(),
        relations,
        generators_unitary,
        w_squared,
        reflection,
        homomorphism,
        elements_unitary,
    })
}

/// `Ψ ρ_1(g) = ρ_2(g) Ψ` for every generator in the census.
pub fn psi_equivalence(rep1: &WeilRep, rep2: &WeilRep, cfg: &RepCheckConfig) -> Result<(WeilOperator, Check)> {
    let psi = rep1.psi_intertwiner(rep2)?;
    let census = Census::build(rep1.datum.group(), &cfg.census)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x51);
    let plan = cfg.plan(rep1.dim(), &mut rng);
    let mut t = Tally::new();
    let mut ex = census.units_exhaustive && census.symmetric_exhaustive;
    let toks = census
        .units
        .iter()
        .map(|a| GeneratorToken::H(a.clone()))
        .chain(census.symmetric.iter().map(|s| GeneratorToken::U(s.clone())))
        .chain(std::iter::once(GeneratorToken::W));
    for tok in toks {
        let lhs = psi.then(&rep1.generator(&tok)?);
        let rhs = rep2.generator(&tok)?.then(&psi);
        let c = compare(&lhs, &rhs, &plan)?;
        record_cmp(&mut t, &c, &mut ex, || format!("Psi does not intertwine at {tok}"));
    }
    Ok((psi, t.finish("psi-intertwines", "Psi rho_1(g) = rho_2(g) Psi on every generator", ex)))
}

/// Floating-point mirror: largest deviation from the identities checked by
/// [`verify_rep_relations`] on generator samples, and of `ρ(w)` from
/// unitarity.
#[derive(Clone, Debug, Serialize)]
pub struct FloatMirrorReport {
    pub max_relation_error: f64,
    pub max_unitarity_error: f64,
    pub max_exact_deviation: f64,
}

pub fn float_mirror(rep: &WeilRep, cfg: &RepCheckConfig) -> Result<FloatMirrorReport> {
    let ctx = rep.datum.group();
    let census = Census::build(ctx, &cfg.census)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xf1);
    let dim = rep.dim();
    let cols: Vec<usize> = match cfg.plan(dim, &mut rng) {
        ColumnPlan::All => (0..dim).collect(),
        ColumnPlan::Sample(c) => c,
    };
    let e = ctx.eps().value();
    let w = rep.generator(&GeneratorToken::W)?;
    let mut rel: f64 = 0.0;
    for t in census.admissible.iter().take(4) {
        let ut = rep.generator(&GeneratorToken::U(t.inverse().expect("unit")))?;
        let lhs = w.then(&ut).then(&w).then(&rep.generator(&GeneratorToken::U(t.scale(-e)))?).then(&w).then(&ut);
        let rhs = rep.generator(&GeneratorToken::H(t.scale(-e)))?;
        rel = rel.max(lhs.columns_float(&cols).max_deviation(&rhs.columns_float(&cols)));
    }
    let ww = w.then(&w.adjoint()).columns_float(&cols);
    let id = FloatBlock::unit_columns(dim, &cols);
    let exact = w.columns(&cols[..cols.len().min(column_chunk(rep.space.q, dim))])?;
    let fw = w.columns_float(&cols[..exact.cols()]);
    Ok(FloatMirrorReport {
        max_relation_error: rel,
        max_unitarity_error: ww.max_deviation(&id),
        max_exact_deviation: exact.to_float().max_deviation(&fw),
    })
}
