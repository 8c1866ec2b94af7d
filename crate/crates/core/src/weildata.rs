//! The datum `(M, α, γ, χ, c)` on `M = V²`, `V = F_q^{2n}`: its defining
//! conditions, the quadratic forms `Q_u` and their Gauss sums.
//!
//! Points of `M` are row vectors `(x, y)` and are indexed in row-major
//! lexicographic order of their `4n` coordinates.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::{AdditiveCharacter, FieldCtx};
use crate::matalg::{dot, standard_matrices, vec_mul, FqMatrix, InvolutionKind, Sign, StandardMatrices};
use crate::report::{Check, Tally};
use crate::scalars::{Cyclotomic, CyclotomicCtx, ZetaSum};
use crate::slstar::{Census, GroupCtx, PresentationConfig};

/// A point `(x, y)` of `M`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct ModulePoint {
    pub x: Vec<u32>,
    pub y: Vec<u32>,
}

impl ModulePoint {
    pub fn zero(n: usize) -> Self {
        ModulePoint { x: vec![0; 2 * n], y: vec![0; 2 * n] }
    }

    pub fn coords(&self) -> Vec<u32> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    /// `(x, y)a = (xa, ya)`.
    pub fn act(&self, field: FieldCtx, a: &FqMatrix) -> ModulePoint {
        ModulePoint { x: vec_mul(field, &self.x, a), y: vec_mul(field, &self.y, a) }
    }
}

/// The finite set `M = F_q^{4n}` with its fixed point order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModuleSpace {
    field: FieldCtx,
    n: usize,
    size: usize,
}

impl ModuleSpace {
    pub fn new(field: FieldCtx, n: usize) -> Result<Self> {
        let size = (field.q() as u128).pow(4 * n as u32);
        if size > u32::MAX as u128 {
            return Err(Error::Unsupported(format!("|M| = {size} is too large to index")));
        }
        Ok(ModuleSpace { field, n, size: size as usize })
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }
    pub fn n(&self) -> usize {
        self.n
    }
    /// `|M| = q^{4n}`.
    pub fn size(&self) -> usize {
        self.size
    }
    /// Number of coordinates, `4n`.
    pub fn coord_len(&self) -> usize {
        4 * self.n
    }

    pub fn coords_into(&self, mut idx: usize, out: &mut [u32]) {
        let q = self.field.q() as usize;
        for c in out.iter_mut().rev() {
            *c = (idx % q) as u32;
            idx /= q;
        }
    }

    pub fn coords(&self, idx: usize) -> Vec<u32> {
        let mut c = vec![0; self.coord_len()];
        self.coords_into(idx, &mut c);
        c
    }

    pub fn index_of_coords(&self, coords: &[u32]) -> usize {
        let q = self.field.q() as usize;
        coords.iter().fold(0, |acc, &c| acc * q + c as usize)
    }

    pub fn point(&self, idx: usize) -> ModulePoint {
        let c = self.coords(idx);
        let m = 2 * self.n;
        ModulePoint { x: c[..m].to_vec(), y: c[m..].to_vec() }
    }

    pub fn index(&self, p: &ModulePoint) -> usize {
        self.index_of_coords(&p.coords())
    }

    /// `perm[i]` is the index of `point(i)` times a coordinate matrix
    /// `g` acting on the full `4n`-vector.
    pub fn linear_perm(&self, g: &FqMatrix) -> Vec<u32> {
        let k = self.coord_len();
        assert_eq!((g.rows(), g.cols()), (k, k));
        let q = self.field.q();
        // Image of a point is additive: track the image coordinates while
        // walking the index order like an odometer.
        let mut perm = Vec::with_capacity(self.size);
        let mut img = vec![0u32; k];
        let mut coords = vec![0u32; k];
        for _ in 0..self.size {
            perm.push(self.index_of_coords(&img) as u32);
            // increment coords, updating img by the changed rows
            let mut pos = k;
            while pos > 0 {
                pos -= 1;
                coords[pos] += 1;
                for (j, v) in img.iter_mut().enumerate() {
                    *v = (*v + g.get(pos, j)) % q;
                }
                if coords[pos] < q {
                    break;
                }
                coords[pos] = 0;
                // q increments of row `pos` returned img to its old value
            }
        }
        perm
    }

    /// Permutation `i ↦ index(point(i) · a)` for `a ∈ A`.
    pub fn right_action_perm(&self, a: &FqMatrix) -> Vec<u32> {
        let m = 2 * self.n;
        let z = FqMatrix::zeros(self.field, m, m);
        self.linear_perm(&FqMatrix::from_blocks(a, &z, &z, a))
    }

    /// Index of `-p` for every point.
    pub fn negation_perm(&self) -> Vec<u32> {
        self.linear_perm(&FqMatrix::scalar(self.field, self.coord_len(), -1))
    }

    /// Index of `p + p'`.
    pub fn add(&self, a: usize, b: usize) -> usize {
        let f = self.field;
        let (ca, cb) = (self.coords(a), self.coords(b));
        let s: Vec<u32> = ca.iter().zip(&cb).map(|(&u, &v)| f.add(u, v)).collect();
        self.index_of_coords(&s)
    }
}

/// Cap on the total size of per-parameter `γ` tables.
const TABLE_MEMORY_LIMIT: u64 = 200_000_000;

/// Tables with `|M|²` entries are built only up to this many points.
pub const TABLE_LIMIT: usize = 2401;

/// The datum attached to `G = SL~^-(2, M_{2n}(F_q))` and a character `ψ`.
#[derive(Clone, Debug)]
pub struct WeilDatum {
    group: GroupCtx,
    character: AdditiveCharacter,
    module: ModuleSpace,
    sm: StandardMatrices,
    /// `χ(p, p') = ψ(p B p'^⋄)`.
    chi_form: FqMatrix,
    c: BigRational,
}

impl WeilDatum {
    pub fn new(group: GroupCtx, character: AdditiveCharacter) -> Result<Self> {
        if group.kind() != InvolutionKind::Tilde || group.eps() != Sign::Minus {
            return Err(Error::Unsupported(
                "the datum is defined for the tilde involution with eps = -1".into(),
            ));
        }
        if group.field() != character.field() {
            return Err(Error::InvalidParameter("character over a different field".into()));
        }
        let field = group.field();
        let n = group.n();
        let module = ModuleSpace::new(field, n)?;
        let sm = standard_matrices(n, field)?;
        // [x, z] - [y, v] with [a, b] = <a, bJ> = -a J b^⋄
        let z = FqMatrix::zeros(field, 2 * n, 2 * n);
        let chi_form = FqMatrix::from_blocks(&z, &sm.j.neg(), &sm.j, &z);
        let c = BigRational::new(BigInt::one(), BigInt::from(field.q()).pow(2 * n as u32));
        Ok(WeilDatum { group, character, module, sm, chi_form, c })
    }

    /// The datum for `(q, n)` with `ψ(x) = ζ_q^{λx}`.
    pub fn standard(q: u32, n: usize, lambda: i64) -> Result<Self> {
        let field = FieldCtx::new(q)?;
        let group = GroupCtx::orthogonal(field, n)?;
        Self::new(group, AdditiveCharacter::new(field, lambda)?)
    }

    pub fn group(&self) -> &GroupCtx {
        &self.group
    }
    pub fn character(&self) -> &AdditiveCharacter {
        &self.character
    }
    pub fn module(&self) -> &ModuleSpace {
        &self.module
    }
    pub fn field(&self) -> FieldCtx {
        self.group.field()
    }
    pub fn n(&self) -> usize {
        self.group.n()
    }
    pub fn lambda(&self) -> u32 {
        self.character.twist()
    }
    pub fn standard_matrices(&self) -> &StandardMatrices {
        &self.sm
    }
    pub fn values_ctx(&self) -> &Arc<CyclotomicCtx> {
        self.character.values_ctx()
    }
    /// `c = q^{-2n}`.
    pub fn c(&self) -> &BigRational {
        &self.c
    }
    /// Matrix `B` with `χ(p, p') = ψ(p B p'^⋄)`.
    pub fn chi_form(&self) -> &FqMatrix {
        &self.chi_form
    }

    /// `[x, y] = <x, yJ>`.
    pub fn bracket(&self, x: &[u32], y: &[u32]) -> u32 {
        let f = self.field();
        dot(f, x, &vec_mul(f, y, &self.sm.j))
    }

    /// Exponent `k` with `χ(p1, p2) = ζ_q^k`.
    pub fn chi_exponent(&self, p1: &ModulePoint, p2: &ModulePoint) -> u32 {
        let f = self.field();
        let v = f.sub(self.bracket(&p1.x, &p2.y), self.bracket(&p1.y, &p2.x));
        self.character.exponent(v)
    }

    /// `χ((x,y),(v,z)) = ψ([x,z] - [y,v])`.
    pub fn chi(&self, p1: &ModulePoint, p2: &ModulePoint) -> Cyclotomic {
        Cyclotomic::zeta_pow(self.values_ctx(), self.chi_exponent(p1, p2) as i64)
    }

    fn check_symmetric(&self, u: &FqMatrix) -> Result<()> {
        let m = 2 * self.n();
        if u.rows() != m || u.cols() != m || u.field() != self.field() {
            return Err(Error::InvalidParameter(format!("expected a {m}x{m} matrix")));
        }
        if self.group.star(u)? != *u {
            return Err(Error::InvalidParameter(format!("{u:?} is not fixed by the involution")));
        }
        Ok(())
    }

    fn check_admissible(&self, u: &FqMatrix) -> Result<()> {
        self.check_symmetric(u)?;
        if !u.is_invertible() {
            return Err(Error::InvalidParameter(format!("{u:?} is not invertible")));
        }
        Ok(())
    }

    /// Exponent of `γ(u, p)`; `u` is assumed involution-fixed.
    pub fn gamma_exponent(&self, u: &FqMatrix, p: &ModulePoint) -> u32 {
        let xu = vec_mul(self.field(), &p.x, u);
        self.character.exponent(self.bracket(&xu, &p.y))
    }

    /// `γ(u, (x,y)) = ψ([xu, y])`.
    pub fn gamma(&self, u: &FqMatrix, p: &ModulePoint) -> Result<Cyclotomic> {
        self.check_symmetric(u)?;
        Ok(Cyclotomic::zeta_pow(self.values_ctx(), self.gamma_exponent(u, p) as i64))
    }

    /// Matrix `Q` on coordinates with `[xu, y] = p Q p^⋄` (upper block form).
    fn gamma_form(&self, u: &FqMatrix) -> FqMatrix {
        let m = 2 * self.n();
        let z = FqMatrix::zeros(self.field(), m, m);
        // [xu, y] = -x u J y^⋄
        FqMatrix::from_blocks(&z, &u.mul(&self.sm.j).neg(), &z, &z)
    }

    /// `γ(u, ·)` exponents for every point, in point order.
    pub fn gamma_table(&self, u: &FqMatrix) -> Vec<u8> {
        let form = self.gamma_form(u);
        let k = self.module.coord_len();
        let mut coords = vec![0u32; k];
        let f = self.field();
        (0..self.module.size())
            .map(|i| {
                self.module.coords_into(i, &mut coords);
                let r = vec_mul(f, &coords, &form);
                self.character.exponent(dot(f, &r, &coords)) as u8
            })
            .collect()
    }

    /// `χ` exponents for all pairs, row-major, when `|M| ≤ TABLE_LIMIT`.
    pub fn chi_table(&self) -> Option<Vec<u8>> {
        let d = self.module.size();
        if d > TABLE_LIMIT {
            return None;
        }
        let rows = self.chi_rows();
        let k = self.module.coord_len();
        let q = self.field().q();
        let lam = self.lambda();
        let coords: Vec<u32> = (0..d).flat_map(|i| self.module.coords(i)).collect();
        let mut out = vec![0u8; d * d];
        for i in 0..d {
            let r = &rows[i * k..(i + 1) * k];
            for j in 0..d {
                let c = &coords[j * k..(j + 1) * k];
                let v: u32 = r.iter().zip(c).map(|(a, b)| a * b).sum::<u32>() % q;
                out[i * d + j] = (v * lam % q) as u8;
            }
        }
        Some(out)
    }

    /// For each point `p`, the row `p B` (flattened).
    fn chi_rows(&self) -> Vec<u32> {
        let f = self.field();
        let k = self.module.coord_len();
        let mut coords = vec![0u32; k];
        let mut out = Vec::with_capacity(self.module.size() * k);
        for i in 0..self.module.size() {
            self.module.coords_into(i, &mut coords);
            out.extend(vec_mul(f, &coords, &self.chi_form));
        }
        out
    }

    /// `χ` exponent for two point indices.
    pub fn chi_exponent_idx(&self, a: usize, b: usize) -> u32 {
        self.chi_exponent(&self.module.point(a), &self.module.point(b))
    }
}

/// Settings for datum and form checks.
#[derive(Clone, Debug)]
pub struct DatumCheckConfig {
    /// Conditions with at most this many instances are checked exhaustively.
    pub exhaustive_limit: u64,
    /// Sampled instances otherwise.
    pub samples: u64,
    pub seed: u64,
    /// Gauss sums evaluated when the admissible set is not swept.
    pub gauss_samples: usize,
    /// Parameter census for `A^×` and `A^s`.
    pub census: PresentationConfig,
}

impl Default for DatumCheckConfig {
    fn default() -> Self {
        DatumCheckConfig {
            exhaustive_limit: 20_000_000_000,
            samples: 1_000_000,
            seed: 0,
            gauss_samples: 8,
            census: PresentationConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GaussSumEntry {
    pub u: FqMatrix,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct DatumReport {
    pub q: u32,
    pub n: usize,
    pub lambda: u32,
    pub c: String,
    pub conditions: Vec<Check>,
    pub gauss_sums: Vec<GaussSumEntry>,
}

impl DatumReport {
    pub fn all_passed(&self) -> bool {
        crate::report::all_passed(&self.conditions)
    }
}

/// Either every index pair or a seeded uniform sample of them.
fn pairs(d: usize, limit: u64, samples: u64, rng: &mut ChaCha8Rng) -> (Vec<(usize, usize)>, bool) {
    if (d as u64) * (d as u64) <= limit {
        ((0..d).flat_map(|i| (0..d).map(move |j| (i, j))).collect(), true)
    } else {
        ((0..samples).map(|_| (rng.gen_range(0..d), rng.gen_range(0..d))).collect(), false)
    }
}

/// Checks conditions 1(a)-(c), 2(a)-(c) and 3 of the datum.
pub fn verify_data_conditions(d: &WeilDatum, cfg: &DatumCheckConfig) -> Result<DatumReport> {
    let census = Census::build(d.group(), &cfg.census)?;
    let module = d.module();
    let dsz = module.size();
    let field = d.field();
    let q = field.q();
    let eps = d.group().eps();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let table = d.chi_table();
    let chi = |a: usize, b: usize| -> u32 {
        match &table {
            Some(t) => t[a * dsz + b] as u32,
            None => d.chi_exponent_idx(a, b),
        }
    };
    let pt = |i: usize| module.point(i);
    let mut checks = Vec::new();

    // 1(a) χ(pt, p') = α(tt*) χ(p, p't*), α trivial.
    let mut t1a = Tally::new();
    let instances = census.units.len() as u64 * (dsz as u64) * (dsz as u64);
    let ex1a = instances <= cfg.exhaustive_limit && census.units_exhaustive;
    if ex1a {
        for t in &census.units {
            let pt_perm = module.right_action_perm(t);
            let ts_perm = module.right_action_perm(&d.group().star(t)?);
            for a in 0..dsz {
                let ta = pt_perm[a] as usize;
                for b in 0..dsz {
                    if chi(ta, b) != chi(a, ts_perm[b] as usize) {
                        t1a.record(false, || format!("t={t:?}, p={:?}, p'={:?}", pt(a), pt(b)));
                    }
                }
                if t1a.failed() {
                    break;
                }
            }
            t1a.record_many(dsz as u64 * dsz as u64);
        }
    } else {
        for _ in 0..cfg.samples {
            let t = &census.units[rng.gen_range(0..census.units.len())];
            let (a, b) = (pt(rng.gen_range(0..dsz)), pt(rng.gen_range(0..dsz)));
            let ok = d.chi_exponent(&a.act(field, t), &b)
                == d.chi_exponent(&a, &b.act(field, &d.group().star(t)?));
            t1a.record(ok, || format!("t={t:?}, p={a:?}, p'={b:?}"));
        }
    }
    checks.push(t1a.finish("1a", "chi(pt, p') = alpha(tt*) chi(p, p't*)", ex1a));

    // 1(b) χ(p', p) = χ(-ε p, p').
    let mut t1b = Tally::new();
    let scale = module.linear_perm(&FqMatrix::scalar(field, module.coord_len(), -eps.value()));
    let (ps, ex1b) = pairs(dsz, cfg.exhaustive_limit, cfg.samples, &mut rng);
    for (a, b) in ps {
        let ok = chi(b, a) == chi(scale[a] as usize, b);
        t1b.record(ok, || format!("p={:?}, p'={:?}", pt(a), pt(b)));
    }
    checks.push(t1b.finish("1b", "chi(p', p) = chi(-eps p, p')", ex1b));

    // 1(c) χ(·, p) ≡ 1 only for p = 0.
    let mut t1c = Tally::new();
    let ex1c = (dsz as u64) * (dsz as u64) <= cfg.exhaustive_limit;
    for b in 1..dsz {
        let witness = if ex1c {
            (0..dsz).any(|a| chi(a, b) != 0)
        } else {
            // χ(·, p) is a character of M, so it is trivial iff it is
            // trivial on the coordinate basis.
            let k = module.coord_len();
            (0..k).any(|i| {
                let mut e = vec![0u32; k];
                e[i] = 1;
                chi(module.index_of_coords(&e), b) != 0
            })
        };
        t1c.record(witness, || format!("chi(., p) trivial at p={:?}", pt(b)));
    }
    checks.push(t1c.finish("1c", "chi(p', p) = 1 for all p' implies p = 0", ex1c));

    let sym = &census.symmetric;
    let adm = &census.admissible;
    let gamma_at = |u: &FqMatrix, i: usize| d.gamma_exponent(u, &pt(i));
    let tables_fit = (sym.len() + adm.len()) as u64 * dsz as u64 <= TABLE_MEMORY_LIMIT;
    let gtabs: Vec<Vec<u8>> = if tables_fit { sym.iter().map(|s| d.gamma_table(s)).collect() } else { Vec::new() };
    let table_for = |s: &FqMatrix| -> Vec<u8> {
        match sym.iter().position(|x| x == s) {
            Some(k) => gtabs[k].clone(),
            None => d.gamma_table(s),
        }
    };
    let pick = |rng: &mut ChaCha8Rng, v: &[FqMatrix]| v[rng.gen_range(0..v.len())].clone();

    // 2(a) γ(s+s', p) = γ(s, p) γ(s', p).
    let mut t2a = Tally::new();
    let ex2a = tables_fit
        && census.symmetric_exhaustive
        && (sym.len() as u64).pow(2) * dsz as u64 <= cfg.exhaustive_limit;
    if ex2a {
        for (i, s) in sym.iter().enumerate() {
            for (j, s2) in sym.iter().enumerate() {
                let st = table_for(&s.add(s2));
                for p in 0..dsz {
                    let ok = st[p] as u32 == (gtabs[i][p] as u32 + gtabs[j][p] as u32) % q;
                    t2a.record(ok, || format!("s={s:?}, s'={s2:?}, p={:?}", pt(p)));
                }
            }
        }
    } else {
        for _ in 0..cfg.samples {
            let (s, s2, p) = (pick(&mut rng, sym), pick(&mut rng, sym), rng.gen_range(0..dsz));
            let ok = gamma_at(&s.add(&s2), p) == (gamma_at(&s, p) + gamma_at(&s2, p)) % q;
            t2a.record(ok, || format!("s={s:?}, s'={s2:?}, p={:?}", pt(p)));
        }
    }
    checks.push(t2a.finish("2a", "gamma(s+s', p) = gamma(s, p) gamma(s', p)", ex2a));

    // 2(b) γ(s, pr) = γ(r s r*, p).
    let mut t2b = Tally::new();
    let ex2b = tables_fit
        && census.units_exhaustive
        && census.symmetric_exhaustive
        && census.units.len() as u64 * sym.len() as u64 * dsz as u64 <= cfg.exhaustive_limit;
    if ex2b {
        for r in &census.units {
            let perm = module.right_action_perm(r);
            let rs = d.group().star(r)?;
            for (i, s) in sym.iter().enumerate() {
                let ct = table_for(&r.mul(s).mul(&rs));
                for p in 0..dsz {
                    let ok = gtabs[i][perm[p] as usize] == ct[p];
                    t2b.record(ok, || format!("s={s:?}, r={r:?}, p={:?}", pt(p)));
                }
            }
        }
    } else {
        for _ in 0..cfg.samples {
            let (r, s, p) = (pick(&mut rng, &census.units), pick(&mut rng, sym), pt(rng.gen_range(0..dsz)));
            let conj = r.mul(&s).mul(&d.group().star(&r)?);
            let ok = d.gamma_exponent(&s, &p.act(field, &r)) == d.gamma_exponent(&conj, &p);
            t2b.record(ok, || format!("s={s:?}, r={r:?}, p={p:?}"));
        }
    }
    checks.push(t2b.finish("2b", "gamma(s, pr) = gamma(r s r*, p)", ex2b));

    // 2(c) γ(t, p+p') = γ(t, p) γ(t, p') χ(p, p't).
    let mut t2c = Tally::new();
    let ex2c = tables_fit
        && census.symmetric_exhaustive
        && adm.len() as u64 * (dsz as u64).pow(2) <= cfg.exhaustive_limit;
    if ex2c {
        let mut sum_coords = vec![0u32; module.coord_len()];
        for t in adm {
            let gt = d.gamma_table(t);
            let tp = module.right_action_perm(t);
            for a in 0..dsz {
                let ca = module.coords(a);
                for b in 0..dsz {
                    module.coords_into(b, &mut sum_coords);
                    for (x, &u) in sum_coords.iter_mut().zip(&ca) {
                        *x = (*x + u) % q;
                    }
                    let s = module.index_of_coords(&sum_coords);
                    let rhs = (gt[a] as u32 + gt[b] as u32 + chi(a, tp[b] as usize)) % q;
                    t2c.record(gt[s] as u32 == rhs, || format!("t={t:?}, p={:?}, p'={:?}", pt(a), pt(b)));
                }
            }
        }
    } else if !adm.is_empty() {
        for _ in 0..cfg.samples {
            let t = pick(&mut rng, adm);
            let (a, b) = (rng.gen_range(0..dsz), rng.gen_range(0..dsz));
            let (pa, pb) = (pt(a), pt(b));
            let s = module.add(a, b);
            let rhs = (gamma_at(&t, a) + gamma_at(&t, b) + d.chi_exponent(&pa, &pb.act(field, &t))) % q;
            t2c.record(gamma_at(&t, s) == rhs, || format!("t={t:?}, p={pa:?}, p'={pb:?}"));
        }
    }
    checks.push(t2c.finish("2c", "gamma(t, p+p') = gamma(t, p) gamma(t, p') chi(p, p't)", ex2c));

    // 3. c² |M| = α(ε) and Σ_p γ(t, p) = α(εt)/c.
    let mut t3 = Tally::new();
    let c = d.c();
    let norm = c * c * BigRational::from_integer(BigInt::from(dsz));
    t3.record(norm.is_one(), || format!("c^2 |M| = {norm}"));
    let ex3 = census.symmetric_exhaustive && adm.len() as u64 * dsz as u64 <= cfg.exhaustive_limit;
    let gauss_params: Vec<FqMatrix> = if ex3 {
        adm.clone()
    } else {
        adm.iter().take(cfg.gauss_samples).cloned().collect()
    };
    let mut gauss_sums = Vec::new();
    for t in &gauss_params {
        let g = gauss_sum(d, t)?;
        let ok = &g * c == BigRational::one();
        t3.record(ok, || format!("sum gamma(t, .) = {g} at t={t:?}"));
        gauss_sums.push(GaussSumEntry { u: t.clone(), value: g.to_string() });
    }
    checks.push(t3.finish("3", "c^2 |M| = alpha(eps), sum_p gamma(t, p) = alpha(eps t)/c", ex3));

    Ok(DatumReport {
        q,
        n: d.n(),
        lambda: d.lambda(),
        c: c.to_string(),
        conditions: checks,
        gauss_sums,
    })
}

/// Checks `χ(p+p', r) = χ(p, r) χ(p', r)` and the same in the second
/// argument over all triples (or a sample of them).
pub fn check_chi_bi_additive(d: &WeilDatum, cfg: &DatumCheckConfig) -> Check {
    let module = d.module();
    let dsz = module.size();
    let q = d.field().q();
    let mut tally = Tally::new();
    let exhaustive = (dsz as u64).pow(3) <= cfg.exhaustive_limit && dsz <= TABLE_LIMIT;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0xb1);
    let table = d.chi_table();
    let chi = |a: usize, b: usize| match &table {
        Some(t) => t[a * dsz + b] as u32,
        None => d.chi_exponent_idx(a, b),
    };
    let mut check = |a: usize, b: usize, r: usize, s: usize| {
        let ok1 = chi(s, r) == (chi(a, r) + chi(b, r)) % q;
        let ok2 = chi(r, s) == (chi(r, a) + chi(r, b)) % q;
        tally.record(ok1 && ok2, || format!("p={a}, p'={b}, r={r}"));
    };
    if exhaustive {
        for a in 0..dsz {
            for b in 0..dsz {
                let s = module.add(a, b);
                for r in 0..dsz {
                    check(a, b, r, s);
                }
            }
        }
    } else {
        for _ in 0..cfg.samples {
            let (a, b, r) = (rng.gen_range(0..dsz), rng.gen_range(0..dsz), rng.gen_range(0..dsz));
            check(a, b, r, module.add(a, b));
        }
    }
    tally.finish("chi-bi-additive", "chi is additive in each argument", exhaustive)
}

/// `Σ_{p ∈ M} γ(u, p)`, evaluated exactly; must be rational.
pub fn gauss_sum(d: &WeilDatum, u: &FqMatrix) -> Result<BigRational> {
    d.check_admissible(u)?;
    let q = d.field().q() as usize;
    let mut acc = ZetaSum::new(q);
    for e in d.gamma_table(u) {
        acc.add(e as u64, 1);
    }
    let v = acc.to_cyclotomic(d.values_ctx(), &BigRational::one())?;
    v.as_rational()
        .ok_or_else(|| Error::CheckFailed(format!("Gauss sum at {u:?} is not rational: {v}")))
}

/// Classification of `Q_u(x, y) = [xu, y]` on `F_q^{4n}`.
#[derive(Clone, Debug, Serialize)]
pub struct QuadraticFormReport {
    pub u: FqMatrix,
    /// Gram matrix of the polar form `B(p, p') = Q(p+p') - Q(p) - Q(p')`.
    pub gram: FqMatrix,
    pub rank: usize,
    pub nondegenerate: bool,
    pub witt_index: usize,
    pub split: bool,
    pub zero_count: u64,
    pub zero_count_exhaustive: bool,
}

/// Points are counted one by one up to this many.
pub const ZERO_COUNT_LIMIT: usize = 10_000_000;

pub fn classify_quadratic_form(d: &WeilDatum, u: &FqMatrix) -> Result<QuadraticFormReport> {
    d.check_admissible(u)?;
    let f = d.field();
    let k = d.module().coord_len();
    let q_form = d.gamma_form(u);
    let qv = |v: &[u32]| dot(f, &vec_mul(f, v, &q_form), v);
    let mut gram = FqMatrix::zeros(f, k, k);
    for i in 0..k {
        for j in 0..k {
            let mut ei = vec![0u32; k];
            ei[i] = 1;
            let mut ej = vec![0u32; k];
            ej[j] = 1;
            let mut s = ei.clone();
            s[j] = f.add(s[j], 1);
            gram.set(i, j, f.sub(f.sub(qv(&s), qv(&ei)), qv(&ej)));
        }
    }
    let rank = gram.rank();
    let nondegenerate = rank == k;
    let witt_index = if nondegenerate { witt_index(&gram) } else { 0 };
    let split = nondegenerate && 2 * witt_index == k;
    let size = d.module().size();
    let (zero_count, zero_count_exhaustive) = if size <= ZERO_COUNT_LIMIT {
        let mut coords = vec![0u32; k];
        let mut count = 0u64;
        for i in 0..size {
            d.module().coords_into(i, &mut coords);
            if qv(&coords) == 0 {
                count += 1;
            }
        }
        (count, true)
    } else if nondegenerate {
        // |{Q = 0}| = q^{2m-1} ± (q^m - q^{m-1}) in dimension 2m.
        let qq = f.q() as u64;
        let m = (k / 2) as u32;
        let base = qq.pow(2 * m - 1);
        let delta = qq.pow(m) - qq.pow(m - 1);
        (if split { base + delta } else { base - delta }, false)
    } else {
        return Err(Error::CheckFailed("degenerate form too large to count".into()));
    };
    Ok(QuadraticFormReport {
        u: u.clone(),
        gram,
        rank,
        nondegenerate,
        witt_index,
        split,
        zero_count,
        zero_count_exhaustive,
    })
}

/// Witt index of the nondegenerate symmetric bilinear form with Gram
/// matrix `g`, by splitting off hyperbolic planes.
pub fn witt_index(g: &FqMatrix) -> usize {
    let f = g.field();
    let k = g.rows();
    let b = |x: &[u32], y: &[u32]| dot(f, &vec_mul(f, x, g), y);
    let lin = |coef: &[u32], vs: &[Vec<u32>]| -> Vec<u32> {
        let mut out = vec![0u32; k];
        for (c, v) in coef.iter().zip(vs) {
            for (o, &x) in out.iter_mut().zip(v) {
                *o = f.add(*o, f.mul(*c, x));
            }
        }
        out
    };
    let mut basis: Vec<Vec<u32>> = (0..k)
        .map(|i| {
            let mut e = vec![0u32; k];
            e[i] = 1;
            e
        })
        .collect();
    let mut index = 0;
    while basis.len() >= 2 {
        // An isotropic vector among combinations of the first three
        // (or two) basis vectors; any ternary form is isotropic.
        let span = basis.len().min(3);
        let q = f.q();
        let mut iso = None;
        let total = (q as usize).pow(span as u32);
        for idx in 1..total {
            let mut rest = idx;
            let coef: Vec<u32> = (0..span)
                .map(|_| {
                    let c = (rest % q as usize) as u32;
                    rest /= q as usize;
                    c
                })
                .collect();
            let v = lin(&coef, &basis[..span]);
            if v.iter().any(|&x| x != 0) && b(&v, &v) == 0 {
                iso = Some(v);
                break;
            }
        }
        let Some(v) = iso else { break };
        let Some(w0) = basis.iter().find(|w| b(&v, w) != 0).cloned() else { break };
        let inv = f.inv(b(&v, &w0)).unwrap();
        let w1: Vec<u32> = w0.iter().map(|&x| f.mul(x, inv)).collect();
        // w = w1 - (B(w1,w1)/2) v is isotropic with B(v, w) = 1.
        let half = f.mul(b(&w1, &w1), f.inv(2).unwrap());
        let w: Vec<u32> = w1.iter().zip(&v).map(|(&a, &c)| f.sub(a, f.mul(half, c))).collect();
        index += 1;
        let projected: Vec<Vec<u32>> = basis
            .iter()
            .map(|x| {
                let (bw, bv) = (b(x, &w), b(x, &v));
                x.iter()
                    .zip(v.iter().zip(&w))
                    .map(|(&a, (&vv, &ww))| f.sub(f.sub(a, f.mul(bw, vv)), f.mul(bv, ww)))
                    .collect()
            })
            .collect();
        // Keep a basis of the complement.
        let rows: Vec<i64> = projected.iter().flat_map(|r| r.iter().map(|&x| x as i64)).collect();
        let m = FqMatrix::from_vec(f, projected.len(), k, &rows).unwrap();
        let (r, piv) = m.rref();
        basis = (0..piv.len()).map(|i| r.row(i).to_vec()).collect();
    }
    index
}

/// All admissible parameters `u ∈ A^× ∩ A^s` (enumerated when small).
pub fn admissible_parameters(d: &WeilDatum, cfg: &PresentationConfig) -> Result<Vec<FqMatrix>> {
    Ok(Census::build(d.group(), cfg)?.admissible)
}

/// `Σ_p ζ^{e(p)}` over an exponent table, as an element of `Q(ζ_q)`.
pub fn exponent_sum(ctx: &Arc<CyclotomicCtx>, exps: &[u8]) -> Cyclotomic {
    let mut acc = ZetaSum::new(ctx.order());
    for &e in exps {
        acc.add(e as u64, 1);
    }
    acc.to_cyclotomic(ctx, &BigRational::one()).unwrap_or_else(|_| Cyclotomic::zero(ctx))
}
