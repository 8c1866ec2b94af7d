//! The groups `SL*^ε(2, A)` for `A = M_{2n}(F_q)`: membership, Bruhat
//! generators and relations, breadth-first enumeration with words, and the
//! isomorphism between the transpose/`+` and tilde/`-` forms.

use std::fmt;
use std::io::{Read, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustc_hash::{FxHashMap, FxHashSet};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::gfq::FieldCtx;
use crate::matalg::{
    eps_symmetric_elements, involution_apply, j_eps, standard_matrices, star2, EpsSymmetricSpace,
    FqMatrix, InvolutionKind, Sign,
};

/// Parameters of one group `SL*^ε(2, M_{2n}(F_q))`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupCtx {
    field: FieldCtx,
    n: usize,
    kind: InvolutionKind,
    eps: Sign,
    j_eps: FqMatrix,
}

impl GroupCtx {
    pub fn new(field: FieldCtx, n: usize, kind: InvolutionKind, eps: Sign) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let j_eps = j_eps(field, 2 * n, eps);
        Ok(GroupCtx { field, n, kind, eps, j_eps })
    }

    /// The orthogonal group of the construction: tilde involution, `ε = -1`.
    pub fn orthogonal(field: FieldCtx, n: usize) -> Result<Self> {
        Self::new(field, n, InvolutionKind::Tilde, Sign::Minus)
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }
    pub fn n(&self) -> usize {
        self.n
    }
    pub fn kind(&self) -> InvolutionKind {
        self.kind
    }
    pub fn eps(&self) -> Sign {
        self.eps
    }
    /// Side of the ring elements, `2n`.
    pub fn block_size(&self) -> usize {
        2 * self.n
    }
    /// Side of the group elements, `4n`.
    pub fn dim(&self) -> usize {
        4 * self.n
    }
    pub fn j_eps(&self) -> &FqMatrix {
        &self.j_eps
    }

    /// The ring involution `a ↦ a*`.
    pub fn star(&self, a: &FqMatrix) -> Result<FqMatrix> {
        involution_apply(self.kind, a)
    }

    /// The involution on `M_2(A)`.
    pub fn star2(&self, t: &FqMatrix) -> Result<FqMatrix> {
        star2(self.kind, t)
    }

    /// The matrix `S` with `G = {T : T S T^⋄ = S}`.
    pub fn gram(&self) -> FqMatrix {
        match self.kind {
            InvolutionKind::Transpose => self.j_eps.clone(),
            InvolutionKind::Tilde => {
                let sm = standard_matrices(self.n, self.field).expect("n >= 1");
                self.j_eps.mul(&sm.u)
            }
        }
    }

    pub fn symmetric_space(&self) -> Result<EpsSymmetricSpace> {
        eps_symmetric_elements(self.field, self.eps, self.kind, self.block_size())
    }

    fn header_hash(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"weil-group-table");
        h.update(self.field.q().to_le_bytes());
        h.update((self.n as u32).to_le_bytes());
        h.update([self.eps.value() as i8 as u8, self.kind.tag()]);
        h.finalize().into()
    }
}

/// A Bruhat generator `h_t`, `w` or `u_s`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub enum GeneratorToken {
    H(FqMatrix),
    W,
    U(FqMatrix),
}

impl fmt::Debug for GeneratorToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorToken::H(t) => write!(f, "h{:?}", t.data()),
            GeneratorToken::W => write!(f, "w"),
            GeneratorToken::U(s) => write!(f, "u{:?}", s.data()),
        }
    }
}

impl fmt::Display for GeneratorToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for GeneratorToken {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A group element together with a word in the generators evaluating to it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupElement {
    pub mat: FqMatrix,
    pub word: Vec<GeneratorToken>,
}

fn check_shape(ctx: &GroupCtx, t: &FqMatrix) -> Result<()> {
    if t.rows() != ctx.dim() || t.cols() != ctx.dim() || t.field() != ctx.field {
        return Err(Error::Dimension(format!(
            "expected a {0}x{0} matrix over F_{1}",
            ctx.dim(),
            ctx.field.q()
        )));
    }
    Ok(())
}

/// The block identities equivalent to membership:
/// `ab* = -εba*`, `cd* = -εdc*`, `a*c = -εc*a`, `b*d = -εd*b`,
/// `ad* + εbc* = a*d + εc*b = 1`.
pub fn membership_identities(ctx: &GroupCtx, t: &FqMatrix) -> Result<bool> {
    check_shape(ctx, t)?;
    let e = ctx.eps.value();
    let [a, b, c, d] = t.blocks();
    let (sa, sb, sc, sd) = (ctx.star(&a)?, ctx.star(&b)?, ctx.star(&c)?, ctx.star(&d)?);
    let one = FqMatrix::identity(ctx.field, ctx.block_size());
    Ok(a.mul(&sb) == b.mul(&sa).scale(-e)
        && c.mul(&sd) == d.mul(&sc).scale(-e)
        && sa.mul(&c) == sc.mul(&a).scale(-e)
        && sb.mul(&d) == sd.mul(&b).scale(-e)
        && a.mul(&sd).add(&b.mul(&sc).scale(e)) == one
        && sa.mul(&d).add(&sc.mul(&b).scale(e)) == one)
}

/// Whether `T J_ε T* = J_ε`; the block identities are evaluated as well and
/// must agree.
pub fn is_member(ctx: &GroupCtx, t: &FqMatrix) -> Result<bool> {
    check_shape(ctx, t)?;
    let direct = t.mul(&ctx.j_eps).mul(&ctx.star2(t)?) == ctx.j_eps;
    let blockwise = membership_identities(ctx, t)?;
    if direct != blockwise {
        return Err(Error::CheckFailed(format!(
            "membership tests disagree on {t:?}: equation {direct}, identities {blockwise}"
        )));
    }
    Ok(direct)
}

/// The matrix of a generator, after validating its parameter.
pub fn generator_matrix(ctx: &GroupCtx, tok: &GeneratorToken) -> Result<FqMatrix> {
    let m = ctx.block_size();
    let z = FqMatrix::zeros(ctx.field, m, m);
    let one = FqMatrix::identity(ctx.field, m);
    let check_param = |a: &FqMatrix| -> Result<()> {
        if a.rows() != m || a.cols() != m || a.field() != ctx.field {
            return Err(Error::InvalidParameter(format!("generator parameter must be {m}x{m}")));
        }
        Ok(())
    };
    match tok {
        GeneratorToken::W => Ok(ctx.j_eps.clone()),
        GeneratorToken::H(t) => {
            check_param(t)?;
            let inv = ctx
                .star(t)?
                .inverse()
                .ok_or_else(|| Error::InvalidParameter(format!("h_t needs t invertible, got {t:?}")))?;
            Ok(FqMatrix::from_blocks(t, &z, &z, &inv))
        }
        GeneratorToken::U(s) => {
            check_param(s)?;
            if ctx.star(s)? != s.scale(-ctx.eps.value()) {
                return Err(Error::InvalidParameter(format!(
                    "u_s needs s* = -eps s, got {s:?}"
                )));
            }
            Ok(FqMatrix::from_blocks(&one, s, &z, &one))
        }
    }
}

pub fn generator(ctx: &GroupCtx, tok: &GeneratorToken) -> Result<GroupElement> {
    let mat = generator_matrix(ctx, tok)?;
    Ok(GroupElement { mat, word: vec![tok.clone()] })
}

pub fn evaluate_word(ctx: &GroupCtx, word: &[GeneratorToken]) -> Result<FqMatrix> {
    let mut acc = FqMatrix::identity(ctx.field, ctx.dim());
    for tok in word {
        acc = acc.mul(&generator_matrix(ctx, tok)?);
    }
    Ok(acc)
}

/// `|GL_m(F_q)|`.
pub fn gl_order(q: u64, m: usize) -> u128 {
    let qm = (q as u128).pow(m as u32);
    (0..m).map(|i| qm - (q as u128).pow(i as u32)).product()
}

/// All invertible `m x m` matrices, in lexicographic order of entries.
pub fn enumerate_units(field: FieldCtx, m: usize) -> Vec<FqMatrix> {
    let q = field.q() as u64;
    let total = q.pow((m * m) as u32);
    let mut out = Vec::new();
    for idx in 0..total {
        let mut rest = idx;
        let mut data = vec![0u32; m * m];
        for v in data.iter_mut().rev() {
            *v = (rest % q) as u32;
            rest /= q;
        }
        let a = FqMatrix::from_residues(field, m, m, data);
        if a.is_invertible() {
            out.push(a);
        }
    }
    out
}

pub fn random_unit<R: Rng>(field: FieldCtx, m: usize, rng: &mut R) -> FqMatrix {
    loop {
        let a = FqMatrix::random(field, m, m, rng);
        if a.is_invertible() {
            return a;
        }
    }
}

/// Settings for relation checking.
#[derive(Clone, Debug)]
pub struct PresentationConfig {
    /// Parameter sets up to this size are checked exhaustively.
    pub exhaustive_limit: u128,
    /// Number of uniform samples per relation otherwise.
    pub samples: usize,
    pub seed: u64,
}

impl Default for PresentationConfig {
    fn default() -> Self {
        PresentationConfig { exhaustive_limit: 10_000, samples: 1000, seed: 0 }
    }
}

/// The parameter sets over which relations are checked.
#[derive(Clone, Debug)]
pub struct Census {
    /// `A^×`, complete or sampled.
    pub units: Vec<FqMatrix>,
    pub units_exhaustive: bool,
    pub units_total: u128,
    /// `A^s_{ε,*}`, complete or sampled.
    pub symmetric: Vec<FqMatrix>,
    pub symmetric_exhaustive: bool,
    pub symmetric_total: u128,
    /// `A^× ∩ A^s_{ε,*}`.
    pub admissible: Vec<FqMatrix>,
}

impl Census {
    pub fn build(ctx: &GroupCtx, cfg: &PresentationConfig) -> Result<Census> {
        let m = ctx.block_size();
        let field = ctx.field;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        let units_total = gl_order(field.q() as u64, m);
        let units_exhaustive = units_total <= cfg.exhaustive_limit;
        let units = if units_exhaustive {
            enumerate_units(field, m)
        } else {
            (0..cfg.samples).map(|_| random_unit(field, m, &mut rng)).collect()
        };
        let space = ctx.symmetric_space()?;
        let symmetric_total = space.cardinality() as u128;
        let (symmetric, symmetric_exhaustive) = match &space.elements {
            Some(all) if symmetric_total <= cfg.exhaustive_limit => (all.clone(), true),
            _ => ((0..cfg.samples).map(|_| space.random(&mut rng)).collect(), false),
        };
        let admissible: Vec<FqMatrix> = match space.invertible() {
            Some(all) => all,
            None => {
                let mut found = Vec::new();
                let mut tries = 0;
                while found.len() < cfg.samples && tries < 100 * cfg.samples {
                    let a = space.random(&mut rng);
                    if a.is_invertible() {
                        found.push(a);
                    }
                    tries += 1;
                }
                found
            }
        };
        Ok(Census {
            units,
            units_exhaustive,
            units_total,
            symmetric,
            symmetric_exhaustive,
            symmetric_total,
            admissible,
        })
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CensusSummary {
    pub units: u128,
    pub units_checked: usize,
    pub symmetric: u128,
    pub symmetric_checked: usize,
    pub admissible_checked: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct RelationCheck {
    pub relation: u8,
    pub statement: &'static str,
    pub instances: u64,
    pub exhaustive: bool,
    pub passed: bool,
    pub violation: Option<String>,
}

#[derive(Clone, Debug, Serialize)]
pub struct PresentationReport {
    pub q: u32,
    pub n: usize,
    pub involution: &'static str,
    pub eps: i64,
    pub census: CensusSummary,
    pub relations: Vec<RelationCheck>,
}

impl PresentationReport {
    pub fn all_passed(&self) -> bool {
        self.relations.iter().all(|r| r.passed)
    }
}

struct Tally {
    instances: u64,
    violation: Option<String>,
}

impl Tally {
    fn new() -> Self {
        Tally { instances: 0, violation: None }
    }
    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.instances += 1;
        if !ok && self.violation.is_none() {
            self.violation = Some(describe());
        }
    }
    fn finish(self, relation: u8, statement: &'static str, exhaustive: bool) -> RelationCheck {
        RelationCheck {
            relation,
            statement,
            instances: self.instances,
            exhaustive,
            passed: self.violation.is_none(),
            violation: self.violation,
        }
    }
}

/// Checks the five Bruhat relations as matrix identities.
pub fn verify_presentation(ctx: &GroupCtx, cfg: &PresentationConfig) -> Result<PresentationReport> {
    let census = Census::build(ctx, cfg)?;
    verify_presentation_with(ctx, &census)
}

pub fn verify_presentation_with(ctx: &GroupCtx, census: &Census) -> Result<PresentationReport> {
    if census.admissible.is_empty() {
        return Err(Error::InvalidParameter(
            "no invertible eps-symmetric element; relation 5 is undefined".into(),
        ));
    }
    let field = ctx.field;
    let m = ctx.block_size();
    let e = ctx.eps.value();
    let h = |t: &FqMatrix| generator_matrix(ctx, &GeneratorToken::H(t.clone()));
    let u = |s: &FqMatrix| generator_matrix(ctx, &GeneratorToken::U(s.clone()));
    let w = generator_matrix(ctx, &GeneratorToken::W)?;

    let h_mats: Vec<FqMatrix> = census.units.iter().map(h).collect::<Result<_>>()?;
    let u_mats: Vec<FqMatrix> = census.symmetric.iter().map(u).collect::<Result<_>>()?;

    // 1. h_t h_t' = h_{tt'} and u_s u_s' = u_{s+s'}.
    let mut r1 = Tally::new();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let unit_pairs: Vec<(usize, usize)> = if census.units_exhaustive {
        (0..census.units.len())
            .flat_map(|i| (0..census.units.len()).map(move |j| (i, j)))
            .collect()
    } else {
        let k = census.units.len();
        (0..k).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect()
    };
    for (i, j) in unit_pairs {
        let (t, t2) = (&census.units[i], &census.units[j]);
        let ok = h_mats[i].mul(&h_mats[j]) == h(&t.mul(t2))?;
        r1.record(ok, || format!("h_t h_t' != h_tt' at t={t:?}, t'={t2:?}"));
    }
    let sym_pairs: Vec<(usize, usize)> = if census.symmetric_exhaustive {
        let k = census.symmetric.len();
        (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).collect()
    } else {
        let k = census.symmetric.len();
        (0..k).map(|_| (rng.gen_range(0..k), rng.gen_range(0..k))).collect()
    };
    for (i, j) in sym_pairs {
        let (s, s2) = (&census.symmetric[i], &census.symmetric[j]);
        let ok = u_mats[i].mul(&u_mats[j]) == u(&s.add(s2))?;
        r1.record(ok, || format!("u_s u_s' != u_(s+s') at s={s:?}, s'={s2:?}"));
    }

    // 2. w^2 = h_ε.
    let mut r2 = Tally::new();
    let ok = w.mul(&w) == h(&FqMatrix::scalar(field, m, e))?;
    r2.record(ok, || "w^2 != h_eps".to_string());

    // 3. h_t u_s = u_{t s t*} h_t.
    let mut r3 = Tally::new();
    for (t, ht) in census.units.iter().zip(&h_mats) {
        let ts = ctx.star(t)?;
        for (s, us) in census.symmetric.iter().zip(&u_mats) {
            let ok = ht.mul(us) == u(&t.mul(s).mul(&ts))?.mul(ht);
            r3.record(ok, || format!("h_t u_s != u_(t s t*) h_t at t={t:?}, s={s:?}"));
        }
    }

    // 4. w h_t = h_{t*^{-1}} w.
    let mut r4 = Tally::new();
    for (t, ht) in census.units.iter().zip(&h_mats) {
        let ts_inv = ctx.star(t)?.inverse().expect("unit");
        let ok = w.mul(ht) == h(&ts_inv)?.mul(&w);
        r4.record(ok, || format!("w h_t != h_(t*^-1) w at t={t:?}"));
    }

    // 5. w u_{t^{-1}} w u_{-εt} w u_{t^{-1}} = h_{-εt}.
    let mut r5 = Tally::new();
    for t in &census.admissible {
        let ti = t.inverse().expect("unit");
        let ut = u(&ti)?;
        let lhs = w.mul(&ut).mul(&w).mul(&u(&t.scale(-e))?).mul(&w).mul(&ut);
        let ok = lhs == h(&t.scale(-e))?;
        r5.record(ok, || format!("relation 5 fails at t={t:?}"));
    }

    let units_ex = census.units_exhaustive;
    let sym_ex = census.symmetric_exhaustive;
    Ok(PresentationReport {
        q: field.q(),
        n: ctx.n,
        involution: ctx.kind.name(),
        eps: e,
        census: CensusSummary {
            units: census.units_total,
            units_checked: census.units.len(),
            symmetric: census.symmetric_total,
            symmetric_checked: census.symmetric.len(),
            admissible_checked: census.admissible.len(),
        },
        relations: vec![
            r1.finish(1, "h_t h_t' = h_tt', u_s u_s' = u_(s+s')", units_ex && sym_ex),
            r2.finish(2, "w^2 = h_eps", true),
            r3.finish(3, "h_t u_s = u_(t s t*) h_t", units_ex && sym_ex),
            r4.finish(4, "w h_t = h_(t*^-1) w", units_ex),
            r5.finish(5, "w u_(t^-1) w u_(-eps t) w u_(t^-1) = h_(-eps t)", sym_ex),
        ],
    })
}

/// Default cap on the number of enumerated elements.
pub const DEFAULT_BUDGET: usize = 10_000_000;

/// Packs square matrices with `(4n)^2` entries into 128-bit keys.
#[derive(Clone, Copy, Debug)]
pub struct MatrixPacker {
    dim: usize,
    bits: u32,
    field: FieldCtx,
}

impl MatrixPacker {
    pub fn new(field: FieldCtx, dim: usize) -> Result<Self> {
        let bits = 32 - (field.q() - 1).leading_zeros();
        if (dim * dim) as u32 * bits > 128 {
            return Err(Error::Unsupported(format!(
                "{dim}x{dim} matrices over F_{} do not fit a 128-bit key",
                field.q()
            )));
        }
        Ok(MatrixPacker { dim, bits, field })
    }

    #[inline]
    pub fn pack(&self, data: &[u32]) -> u128 {
        let mut k = 0u128;
        for &v in data.iter().rev() {
            k = (k << self.bits) | v as u128;
        }
        k
    }

    #[inline]
    pub fn unpack_into(&self, mut key: u128, out: &mut [u32]) {
        let mask = (1u128 << self.bits) - 1;
        for v in out.iter_mut() {
            *v = (key & mask) as u32;
            key >>= self.bits;
        }
    }

    pub fn unpack(&self, key: u128) -> FqMatrix {
        let mut data = vec![0u32; self.dim * self.dim];
        self.unpack_into(key, &mut data);
        FqMatrix::from_residues(self.field, self.dim, self.dim, data)
    }
}

/// Right multiplication by a fixed matrix, skipping its zero entries.
#[derive(Clone, Debug)]
struct SparseRight {
    dim: usize,
    q: u32,
    // per row k of the right factor: (column, value)
    rows: Vec<Vec<(usize, u32)>>,
}

impl SparseRight {
    fn new(m: &FqMatrix) -> Self {
        let rows = (0..m.rows())
            .map(|k| (0..m.cols()).filter(|&j| m.get(k, j) != 0).map(|j| (j, m.get(k, j))).collect())
            .collect();
        SparseRight { dim: m.rows(), q: m.field().q(), rows }
    }

    #[inline]
    fn apply(&self, g: &[u32], out: &mut [u32], acc: &mut [u32]) {
        let d = self.dim;
        for i in 0..d {
            acc[..d].iter_mut().for_each(|a| *a = 0);
            for k in 0..d {
                let x = g[i * d + k];
                if x == 0 {
                    continue;
                }
                for &(j, v) in &self.rows[k] {
                    acc[j] += x * v;
                }
            }
            for j in 0..d {
                out[i * d + j] = acc[j] % self.q;
            }
        }
    }
}

fn bruhat_generators(ctx: &GroupCtx) -> Result<Vec<GeneratorToken>> {
    let m = ctx.block_size();
    let units_total = gl_order(ctx.field.q() as u64, m);
    if units_total > 10_000_000 {
        return Err(Error::Unsupported("A^x too large to use every h_t as a generator".into()));
    }
    let space = ctx.symmetric_space()?;
    let Some(symmetric) = space.elements else {
        return Err(Error::Unsupported("eps-symmetric space too large to enumerate".into()));
    };
    let mut gens = vec![GeneratorToken::W];
    gens.extend(symmetric.into_iter().filter(|s| !s.is_zero()).map(GeneratorToken::U));
    gens.extend(
        enumerate_units(ctx.field, m)
            .into_iter()
            .filter(|t| !t.is_identity())
            .map(GeneratorToken::H),
    );
    Ok(gens)
}

/// The closure of the Bruhat generators, each element stored with a
/// shortest word. Element `i` equals `parent(i) · generator(via(i))`.
#[derive(Clone, Debug)]
pub struct GroupTable {
    ctx: GroupCtx,
    packer: MatrixPacker,
    generators: Vec<GeneratorToken>,
    keys: Vec<u128>,
    parent: Vec<u32>,
    via: Vec<u32>,
    index: FxHashMap<u128, u32>,
}

const NO_PARENT: u32 = u32::MAX;

/// Breadth-first closure from the identity under right multiplication by
/// every `h_t` (`t ≠ 1`), every `u_s` (`s ≠ 0`) and `w`.
pub fn enumerate_group(ctx: &GroupCtx, budget: usize) -> Result<GroupTable> {
    let generators = bruhat_generators(ctx)?;
    let packer = MatrixPacker::new(ctx.field, ctx.dim())?;
    let gen_mats: Vec<SparseRight> = generators
        .iter()
        .map(|g| generator_matrix(ctx, g).map(|m| SparseRight::new(&m)))
        .collect::<Result<_>>()?;
    let d = ctx.dim();
    let mut keys = Vec::new();
    let mut parent = Vec::new();
    let mut via = Vec::new();
    let mut index = FxHashMap::default();
    let id = packer.pack(FqMatrix::identity(ctx.field, d).data());
    keys.push(id);
    parent.push(NO_PARENT);
    via.push(NO_PARENT);
    index.insert(id, 0u32);
    let mut g = vec![0u32; d * d];
    let mut out = vec![0u32; d * d];
    let mut acc = vec![0u32; d];
    let mut head = 0;
    while head < keys.len() {
        packer.unpack_into(keys[head], &mut g);
        for (gi, gm) in gen_mats.iter().enumerate() {
            gm.apply(&g, &mut out, &mut acc);
            let k = packer.pack(&out);
            if let std::collections::hash_map::Entry::Vacant(e) = index.entry(k) {
                if keys.len() >= budget {
                    return Err(Error::BudgetExceeded { budget });
                }
                e.insert(keys.len() as u32);
                keys.push(k);
                parent.push(head as u32);
                via.push(gi as u32);
            }
        }
        head += 1;
    }
    Ok(GroupTable { ctx: ctx.clone(), packer, generators, keys, parent, via, index })
}

impl GroupTable {
    pub fn ctx(&self) -> &GroupCtx {
        &self.ctx
    }

    pub fn order(&self) -> usize {
        self.keys.len()
    }

    pub fn generators(&self) -> &[GeneratorToken] {
        &self.generators
    }

    pub fn matrix(&self, i: usize) -> FqMatrix {
        self.packer.unpack(self.keys[i])
    }

    pub fn key(&self, i: usize) -> u128 {
        self.keys[i]
    }

    pub fn packer(&self) -> &MatrixPacker {
        &self.packer
    }

    pub fn find(&self, m: &FqMatrix) -> Option<usize> {
        if m.rows() != self.ctx.dim() || m.cols() != self.ctx.dim() {
            return None;
        }
        self.index.get(&self.packer.pack(m.data())).map(|&i| i as usize)
    }

    pub fn find_key(&self, key: u128) -> Option<usize> {
        self.index.get(&key).map(|&i| i as usize)
    }

    /// Generator indices of the stored word of element `i`.
    pub fn word_indices(&self, i: usize) -> Vec<usize> {
        let mut w = Vec::new();
        let mut cur = i;
        while self.parent[cur] != NO_PARENT {
            w.push(self.via[cur] as usize);
            cur = self.parent[cur] as usize;
        }
        w.reverse();
        w
    }

    pub fn word(&self, i: usize) -> Vec<GeneratorToken> {
        self.word_indices(i).into_iter().map(|g| self.generators[g].clone()).collect()
    }

    pub fn element(&self, i: usize) -> GroupElement {
        GroupElement { mat: self.matrix(i), word: self.word(i) }
    }

    pub fn max_word_length(&self) -> usize {
        (0..self.order()).map(|i| self.word_indices(i).len()).max().unwrap_or(0)
    }

    /// Index of the product of elements `i` and `j`.
    pub fn product(&self, i: usize, j: usize) -> Option<usize> {
        self.find(&self.matrix(i).mul(&self.matrix(j)))
    }

    /// Serializes the table: header, then per element its residues and
    /// word, then a SHA-256 trailer over everything before it.
    pub fn write_to<W: Write>(&self, mut out: W) -> Result<()> {
        let mut buf = Vec::new();
        buf.extend_from_slice(CACHE_MAGIC);
        buf.extend_from_slice(&self.ctx.field.q().to_le_bytes());
        buf.extend_from_slice(&(self.ctx.n as u32).to_le_bytes());
        buf.push(self.ctx.eps.value() as i8 as u8);
        buf.push(self.ctx.kind.tag());
        buf.extend_from_slice(&(self.order() as u64).to_le_bytes());
        buf.extend_from_slice(&self.ctx.header_hash());
        buf.extend_from_slice(&(self.generators.len() as u32).to_le_bytes());
        for g in &self.generators {
            match g {
                GeneratorToken::W => buf.push(0),
                GeneratorToken::H(t) => {
                    buf.push(1);
                    buf.extend(t.data().iter().map(|&v| v as u8));
                }
                GeneratorToken::U(s) => {
                    buf.push(2);
                    buf.extend(s.data().iter().map(|&v| v as u8));
                }
            }
        }
        let mut data = vec![0u32; self.ctx.dim() * self.ctx.dim()];
        for i in 0..self.order() {
            self.packer.unpack_into(self.keys[i], &mut data);
            buf.extend(data.iter().map(|&v| v as u8));
            let w = self.word_indices(i);
            buf.extend_from_slice(&(w.len() as u16).to_le_bytes());
            for g in w {
                buf.extend_from_slice(&(g as u32).to_le_bytes());
            }
        }
        let digest: [u8; 32] = Sha256::digest(&buf).into();
        buf.extend_from_slice(&digest);
        out.write_all(&buf)?;
        Ok(())
    }

    /// Reads a table written by [`GroupTable::write_to`] for the same group
    /// parameters, verifying the checksum, the header and every word.
    pub fn read_from<R: Read>(ctx: &GroupCtx, mut input: R) -> Result<GroupTable> {
        let mut buf = Vec::new();
        input.read_to_end(&mut buf)?;
        let bad = |msg: &str| Error::Cache(msg.to_string());
        if buf.len() < 32 + CACHE_MAGIC.len() {
            return Err(bad("file truncated"));
        }
        let (body, digest) = buf.split_at(buf.len() - 32);
        let actual: [u8; 32] = Sha256::digest(body).into();
        if actual != digest {
            return Err(bad("checksum mismatch"));
        }
        let mut r = Cursor { buf: body, pos: 0 };
        if r.take(CACHE_MAGIC.len())? != CACHE_MAGIC {
            return Err(bad("not a group table"));
        }
        let q = r.u32()?;
        let n = r.u32()? as usize;
        let eps = r.u8()? as i8;
        let tag = r.u8()?;
        let order = r.u64()? as usize;
        let hh = r.take(32)?;
        if q != ctx.field.q()
            || n != ctx.n
            || eps as i64 != ctx.eps.value()
            || tag != ctx.kind.tag()
            || hh != ctx.header_hash()
        {
            return Err(bad("table was built for different group parameters"));
        }
        let m = ctx.block_size();
        let gcount = r.u32()? as usize;
        let mut generators = Vec::with_capacity(gcount);
        for _ in 0..gcount {
            let tok = match r.u8()? {
                0 => GeneratorToken::W,
                t @ (1 | 2) => {
                    let raw = r.take(m * m)?;
                    if raw.iter().any(|&v| v as u32 >= q) {
                        return Err(bad("generator residue out of range"));
                    }
                    let a = FqMatrix::from_residues(ctx.field, m, m, raw.iter().map(|&v| v as u32).collect());
                    if t == 1 {
                        GeneratorToken::H(a)
                    } else {
                        GeneratorToken::U(a)
                    }
                }
                _ => return Err(bad("unknown generator tag")),
            };
            generators.push(tok);
        }
        let gen_mats: Vec<FqMatrix> = generators
            .iter()
            .map(|g| generator_matrix(ctx, g).map_err(|e| Error::Cache(e.to_string())))
            .collect::<Result<_>>()?;
        let packer = MatrixPacker::new(ctx.field, ctx.dim())?;
        let d2 = ctx.dim() * ctx.dim();
        let mut keys = Vec::with_capacity(order);
        let mut words = Vec::with_capacity(order);
        let mut index = FxHashMap::default();
        for i in 0..order {
            let raw = r.take(d2)?;
            if raw.iter().any(|&v| v as u32 >= q) {
                return Err(bad("element residue out of range"));
            }
            let data: Vec<u32> = raw.iter().map(|&v| v as u32).collect();
            let len = r.u16()? as usize;
            let mut w = Vec::with_capacity(len);
            for _ in 0..len {
                let g = r.u32()? as usize;
                if g >= generators.len() {
                    return Err(bad("word refers to an unknown generator"));
                }
                w.push(g);
            }
            let k = packer.pack(&data);
            if index.insert(k, i as u32).is_some() {
                return Err(bad("duplicate element"));
            }
            keys.push(k);
            words.push(w);
        }
        if r.pos != body.len() {
            return Err(bad("trailing data"));
        }
        let mut parent = vec![NO_PARENT; order];
        let mut via = vec![NO_PARENT; order];
        for (i, w) in words.iter().enumerate() {
            let mut acc = FqMatrix::identity(ctx.field, ctx.dim());
            for &g in w {
                acc = acc.mul(&gen_mats[g]);
            }
            if packer.pack(acc.data()) != keys[i] {
                return Err(bad("stored word does not evaluate to its element"));
            }
            if let Some((&last, prefix)) = w.split_last() {
                let mut pm = FqMatrix::identity(ctx.field, ctx.dim());
                for &g in prefix {
                    pm = pm.mul(&gen_mats[g]);
                }
                let p = *index
                    .get(&packer.pack(pm.data()))
                    .ok_or_else(|| bad("word prefix missing from table"))?;
                parent[i] = p;
                via[i] = last as u32;
            } else if !acc.is_identity() {
                return Err(bad("empty word on a non-identity element"));
            }
        }
        Ok(GroupTable { ctx: ctx.clone(), packer, generators, keys, parent, via, index })
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(ctx: &GroupCtx, path: &Path) -> Result<GroupTable> {
        let f = std::fs::File::open(path)?;
        Self::read_from(ctx, std::io::BufReader::new(f))
    }
}

const CACHE_MAGIC: &[u8] = b"WEILGRP1";

struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, k: usize) -> Result<&'a [u8]> {
        if self.pos + k > self.buf.len() {
            return Err(Error::Cache("file truncated".into()));
        }
        let s = &self.buf[self.pos..self.pos + k];
        self.pos += k;
        Ok(s)
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }
    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
}

/// Order of the full isometry group of the split form in dimension `4n`,
/// `|O^+(4n, q)| = 2 q^{m(m-1)} (q^m - 1) ∏_{i<m} (q^{2i} - 1)` with `m = 2n`.
pub fn split_orthogonal_order(q: u64, n: usize) -> u128 {
    let m = 2 * n as u32;
    let q = q as u128;
    let mut order = 2 * q.pow(m * (m - 1)) * (q.pow(m) - 1);
    for i in 1..m {
        order *= q.pow(2 * i) - 1;
    }
    order
}

/// An orthogonal reflection in the group, when the defining form is
/// symmetric: `R = I - 2 v v^⋄ K / (v^⋄ K v)` with `K = S^{-1}`.
pub fn isometry_reflection(ctx: &GroupCtx) -> Result<Option<FqMatrix>> {
    let s = ctx.gram();
    if s.transpose() != s {
        return Ok(None);
    }
    let field = ctx.field;
    let d = ctx.dim();
    let k = s.inverse().ok_or_else(|| Error::CheckFailed("defining form is singular".into()))?;
    let mut candidates: Vec<Vec<u32>> = Vec::new();
    for i in 0..d {
        for j in i..d {
            let mut v = vec![0u32; d];
            v[i] = 1;
            if j != i {
                v[j] = 1;
            }
            candidates.push(v);
        }
    }
    for v in candidates {
        let col = FqMatrix::from_residues(field, d, 1, v.clone());
        let qv = col.transpose().mul(&k).mul(&col).get(0, 0);
        if qv == 0 {
            continue;
        }
        let coef = field.mul(2, field.inv(qv).unwrap());
        let r = FqMatrix::identity(field, d).sub(&col.mul(&col.transpose()).mul(&k).scale(coef as i64));
        if !is_member(ctx, &r)? || r.det() != field.neg(1) {
            return Err(Error::CheckFailed("constructed reflection is not an isometry".into()));
        }
        return Ok(Some(r));
    }
    Ok(None)
}

/// Explicit closure of a generating set given as matrices (no words).
pub fn closure_keys(
    ctx: &GroupCtx,
    gens: &[FqMatrix],
    budget: usize,
) -> Result<FxHashSet<u128>> {
    let packer = MatrixPacker::new(ctx.field, ctx.dim())?;
    let sparse: Vec<SparseRight> = gens.iter().map(SparseRight::new).collect();
    let d = ctx.dim();
    let mut seen = FxHashSet::default();
    let mut queue = vec![packer.pack(FqMatrix::identity(ctx.field, d).data())];
    seen.insert(queue[0]);
    let (mut g, mut out, mut acc) = (vec![0u32; d * d], vec![0u32; d * d], vec![0u32; d]);
    let mut head = 0;
    while head < queue.len() {
        packer.unpack_into(queue[head], &mut g);
        for s in &sparse {
            s.apply(&g, &mut out, &mut acc);
            let k = packer.pack(&out);
            if seen.insert(k) {
                if seen.len() > budget {
                    return Err(Error::BudgetExceeded { budget });
                }
                queue.push(k);
            }
        }
        head += 1;
    }
    Ok(seen)
}

/// The Bruhat generators together with a reflection; their closure is the
/// full isometry group of the defining form.
pub fn isometry_generators(ctx: &GroupCtx) -> Result<Vec<FqMatrix>> {
    let mut gens: Vec<FqMatrix> = bruhat_generators(ctx)?
        .iter()
        .map(|g| generator_matrix(ctx, g))
        .collect::<Result<_>>()?;
    if let Some(r) = isometry_reflection(ctx)? {
        gens.push(r);
    }
    Ok(gens)
}

/// Order of the group generated by the Bruhat generators and a reflection
/// `r`, from an enumerated table: `2|G|` when `r ∉ G` and `r` normalizes
/// `G`, otherwise an error.
pub fn isometry_group_order(table: &GroupTable) -> Result<u128> {
    let ctx = table.ctx();
    let Some(r) = isometry_reflection(ctx)? else {
        return Ok(table.order() as u128);
    };
    if table.find(&r).is_some() {
        return Ok(table.order() as u128);
    }
    let rinv = r.inverse().unwrap();
    for g in table.generators() {
        let c = r.mul(&generator_matrix(ctx, g)?).mul(&rinv);
        if table.find(&c).is_none() {
            return Err(Error::CheckFailed("reflection does not normalize the table".into()));
        }
    }
    if table.find(&r.mul(&r)).is_none() {
        return Err(Error::CheckFailed("square of the reflection lies outside the table".into()));
    }
    Ok(2 * table.order() as u128)
}

/// The isomorphism `SL_⋄^+(2, A) → SL_~^-(2, A)`, `T ↦ P T P^{-1}`.
pub fn duality_map(src: &GroupCtx, t: &FqMatrix) -> Result<FqMatrix> {
    if src.kind != InvolutionKind::Transpose || src.eps != Sign::Plus {
        return Err(Error::InvalidParameter(
            "source group must use the transpose involution with eps = +1".into(),
        ));
    }
    if !is_member(src, t)? {
        return Err(Error::InvalidParameter(format!("{t:?} is not in the source group")));
    }
    let sm = standard_matrices(src.n, src.field)?;
    let pinv = sm.p.inverse().expect("P invertible");
    if pinv != star2(InvolutionKind::Transpose, &sm.p)? {
        return Err(Error::CheckFailed("P^{-1} differs from P*".into()));
    }
    Ok(sm.p.mul(t).mul(&pinv))
}
