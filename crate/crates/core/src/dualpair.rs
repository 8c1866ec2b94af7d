//! The Schrödinger model of the dual pair `(SL_2(F_q), O(2n, 2n))`.
//!
//! `W = Hom(V₁, V₂)` is the space of `2 x 4n` matrices with the form
//! `≪w₁, w₂≫ = tr(w₁ F w₂ᵗ J₂)`, polarized as `X ⊕ Y` where `X` holds the
//! matrices whose right `2 x 2n` block vanishes. The point `(x, y)` of `M`
//! is the element of `X` with rows `x` and `y`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gfq::FieldCtx;
use crate::matalg::{j_matrix, FqMatrix};
use crate::report::{Check, Tally};
use crate::slstar::{generator_matrix, Census, GeneratorToken, GroupCtx};
use crate::unidecomp::{sigma_operator, unitary_group, DecomposeConfig, UnitaryGroup};
use crate::weildata::{ModulePoint, ModuleSpace};
use crate::weilrep::{compare, ColumnPlan, Monomial, WeilOperator, WeilRep};

/// The matrices `F`, `J_{2n}`, `J₂` and the identification `X ≅ M`.
#[derive(Clone, Debug)]
pub struct DualPairCtx {
    field: FieldCtx,
    n: usize,
    f: FqMatrix,
    j2n: FqMatrix,
    j2: FqMatrix,
    module: ModuleSpace,
}

impl DualPairCtx {
    pub fn new(field: FieldCtx, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if field.q() == 2 {
            return Err(Error::Unsupported("the Cayley transform needs q odd".into()));
        }
        let m = 2 * n;
        let j2n = j_matrix(field, m);
        let z = FqMatrix::zeros(field, m, m);
        let f = FqMatrix::from_blocks(&z, &j2n, &j2n.neg(), &z);
        Ok(DualPairCtx { field, n, f, j2n, j2: j_matrix(field, 2), module: ModuleSpace::new(field, n)? })
    }

    pub fn field(&self) -> FieldCtx {
        self.field
    }
    pub fn n(&self) -> usize {
        self.n
    }
    /// `F = [[0, J_{2n}], [-J_{2n}, 0]]`.
    pub fn f(&self) -> &FqMatrix {
        &self.f
    }
    pub fn j2n(&self) -> &FqMatrix {
        &self.j2n
    }
    pub fn j2(&self) -> &FqMatrix {
        &self.j2
    }
    pub fn module(&self) -> &ModuleSpace {
        &self.module
    }
    /// `dim W = 8n`.
    pub fn w_dim(&self) -> usize {
        8 * self.n
    }

    pub fn symplectic_form(&self, w1: &FqMatrix, w2: &FqMatrix) -> Result<u32> {
        let cols = 4 * self.n;
        for w in [w1, w2] {
            if w.rows() != 2 || w.cols() != cols {
                return Err(Error::Dimension(format!("W elements are 2x{cols}, got {}x{}", w.rows(), w.cols())));
            }
        }
        Ok(w1.mul(&self.f).mul(&w2.transpose()).mul(&self.j2).trace())
    }

    /// The element `[[x, 0], [y, 0]]` of `X`.
    pub fn embed(&self, p: &ModulePoint) -> FqMatrix {
        let m = 2 * self.n;
        let mut w = FqMatrix::zeros(self.field, 2, 2 * m);
        for i in 0..m {
            w.set(0, i, p.x[i]);
            w.set(1, i, p.y[i]);
        }
        w
    }

    /// The `x` of `(x, 0) ∈ X` as a `2 x 2n` matrix.
    fn x_block(&self, p: &ModulePoint) -> FqMatrix {
        let data = p.x.iter().chain(&p.y).copied().collect();
        FqMatrix::from_residues(self.field, 2, 2 * self.n, data)
    }

    fn point_of_block(&self, x: &FqMatrix) -> ModulePoint {
        ModulePoint { x: x.row(0).to_vec(), y: x.row(1).to_vec() }
    }

    /// The `k`-th unit vector of `W`, entries in row-major order.
    pub fn basis(&self, k: usize) -> FqMatrix {
        let mut w = FqMatrix::zeros(self.field, 2, 4 * self.n);
        w.set(k / (4 * self.n), k % (4 * self.n), 1);
        w
    }

    /// `≪e_i, e_j≫` on the unit vectors of `W`.
    pub fn gram(&self) -> FqMatrix {
        let d = self.w_dim();
        let basis: Vec<FqMatrix> = (0..d).map(|k| self.basis(k)).collect();
        let mut g = FqMatrix::zeros(self.field, d, d);
        for i in 0..d {
            for j in 0..d {
                g.set(i, j, self.symplectic_form(&basis[i], &basis[j]).expect("basis shapes"));
            }
        }
        g
    }

    /// Whether the unit vector `k` lies in `X`.
    fn in_x(&self, k: usize) -> bool {
        k % (4 * self.n) < 2 * self.n
    }
}

/// `ω(g)` for a Bruhat generator: monomial for `h_a` and `u_s`, a Fourier
/// kernel for `w`.
pub enum Schrodinger {
    Monomial(WeilOperator),
    Kernel(FormKernel),
}

/// `K(x, x') = q^{-2n} ψ(B(x, x'))` for a bilinear form `B` on `X`.
#[derive(Clone, Debug)]
pub struct FormKernel {
    form: FqMatrix,
    lambda: u32,
    module: ModuleSpace,
}

impl FormKernel {
    /// Gram matrix of `B` in the coordinates `(x, y)` of `M`.
    pub fn form(&self) -> &FqMatrix {
        &self.form
    }

    /// The exponent of `ζ_q` in `q^{2n} K(x, x')`.
    pub fn exponent(&self, x: usize, y: usize) -> u32 {
        let f = self.module.field();
        let (cx, cy) = (self.module.coords(x), self.module.coords(y));
        let mut acc = 0;
        for (i, &a) in cx.iter().enumerate() {
            if a != 0 {
                for (j, &b) in cy.iter().enumerate() {
                    acc = f.add(acc, f.mul(a, f.mul(self.form.get(i, j), b)));
                }
            }
        }
        f.mul(self.lambda, acc)
    }

    /// Rows `r_x = c(x) B`, so that the exponent is `λ r_x · c(x')`.
    fn rows(&self) -> Vec<Vec<u32>> {
        let f = self.module.field();
        (0..self.module.size())
            .map(|x| crate::matalg::vec_mul(f, &self.module.coords(x), &self.form).iter().map(|&v| f.mul(self.lambda, v)).collect())
            .collect()
    }
}

/// `ω(h_a) f(x) = f(xa)`, `ω(u_s) f(x) = ψ(≪x c(-u_s), x≫) f(x)` and
/// `ω(w) f(x) = |X|^{-1/2} Σ_{x'} ψ(≪w(x), x'≫) f(x')` with `w(x) = x w^{-1}`.
pub fn schrodinger_operator(ctx: &DualPairCtx, rep: &WeilRep, tok: &GeneratorToken) -> Result<Schrodinger> {
    let group = rep.datum().group();
    if group.n() != ctx.n || group.field() != ctx.field {
        return Err(Error::Dimension("dual pair and representation disagree on (q, n)".into()));
    }
    let g = generator_matrix(group, tok)?;
    let module = ctx.module;
    let chr = rep.datum().character();
    let q = ctx.field.q();
    match tok {
        GeneratorToken::H(a) => {
            let perm = (0..module.size())
                .map(|i| {
                    let x = ctx.x_block(&module.point(i));
                    module.index(&ctx.point_of_block(&x.mul(a))) as u32
                })
                .collect();
            let m = Monomial::new(q, perm, vec![0; module.size()])?;
            Ok(Schrodinger::Monomial(WeilOperator::monomial(rep.space(), m)))
        }
        GeneratorToken::U(s) => {
            let c = cayley(ctx, s)?;
            let phase = (0..module.size())
                .map(|i| {
                    let x = ctx.embed(&module.point(i));
                    let v = ctx.symplectic_form(&x.mul(&c), &x)?;
                    Ok(chr.exponent(v) as u8)
                })
                .collect::<Result<Vec<u8>>>()?;
            let m = Monomial::new(q, (0..module.size() as u32).collect(), phase)?;
            Ok(Schrodinger::Monomial(WeilOperator::monomial(rep.space(), m)))
        }
        GeneratorToken::W => {
            let w_inv = g.inverse().ok_or_else(|| Error::CheckFailed("w is singular".into()))?;
            let k = module.coord_len();
            let unit = |i: usize| {
                let mut c = vec![0; k];
                c[i] = 1;
                let m = 2 * ctx.n;
                ModulePoint { x: c[..m].to_vec(), y: c[m..].to_vec() }
            };
            let mut form = FqMatrix::zeros(ctx.field, k, k);
            for i in 0..k {
                let wx = ctx.embed(&unit(i)).mul(&w_inv);
                for j in 0..k {
                    form.set(i, j, ctx.symplectic_form(&wx, &ctx.embed(&unit(j)))?);
                }
            }
            Ok(Schrodinger::Kernel(FormKernel { form, lambda: chr.twist(), module }))
        }
    }
}

/// `c(-u_s) = [[0, -s/2], [0, 0]]`.
pub fn cayley(ctx: &DualPairCtx, s: &FqMatrix) -> Result<FqMatrix> {
    let f = ctx.field;
    let half = f.inv(2).ok_or_else(|| Error::Unsupported("q must be odd".into()))?;
    let m = 2 * ctx.n;
    if s.rows() != m || s.cols() != m {
        return Err(Error::Dimension(format!("s must be {m}x{m}")));
    }
    let z = FqMatrix::zeros(f, m, m);
    let b = s.scale(-(half as i64));
    Ok(FqMatrix::from_blocks(&z, &b, &z, &z))
}

/// `ω(g) f(x) = f(g^{-1} x)` for `g ∈ SL_2(F_q)` acting on `x ∈ M_{2,2n}`.
pub fn sl2_operator(ctx: &DualPairCtx, rep: &WeilRep, g: &FqMatrix) -> Result<WeilOperator> {
    if g.rows() != 2 || g.cols() != 2 || g.det() != 1 {
        return Err(Error::InvalidParameter(format!("expected a 2x2 matrix of determinant 1, got {:?}", g.data())));
    }
    let inv = g.inverse().expect("determinant one");
    let module = ctx.module;
    let perm = (0..module.size())
        .map(|i| {
            let x = ctx.x_block(&module.point(i));
            module.index(&ctx.point_of_block(&inv.mul(&x))) as u32
        })
        .collect();
    let m = Monomial::new(ctx.field.q(), perm, vec![0; module.size()])?;
    Ok(WeilOperator::monomial(rep.space(), m))
}

#[derive(Clone, Debug)]
pub struct DualPairConfig {
    /// Census and unitary-group settings.
    pub decompose: DecomposeConfig,
    /// Sampled `(g, w₁, w₂)` triples for `G`-invariance.
    pub invariance_samples: usize,
    /// Longest generator word used for a sampled `g`.
    pub word_length: usize,
    /// Pairs `(g, h)` for the `SL_2` action axiom; exhaustive when `|U|²` fits.
    pub composition_pairs: usize,
    pub seed: u64,
}

impl Default for DualPairConfig {
    fn default() -> Self {
        DualPairConfig {
            decompose: DecomposeConfig::default(),
            invariance_samples: 1000,
            word_length: 8,
            composition_pairs: 20_000,
            seed: 0,
        }
    }
}

/// First kernel entry where two models differ.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Mismatch {
    pub parameter: Option<String>,
    pub row: usize,
    pub col: usize,
}

/// Agreement of `ω` and `ρ` on one family of operators.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FamilyComparison {
    pub family: String,
    pub equal: bool,
    /// Operators (or kernel identities) compared.
    pub instances: u64,
    pub exhaustive: bool,
    pub first_mismatch: Option<Mismatch>,
}

impl FamilyComparison {
    fn new(family: &str, exhaustive: bool) -> Self {
        FamilyComparison { family: family.into(), equal: true, instances: 0, exhaustive, first_mismatch: None }
    }

    fn record(&mut self, parameter: Option<String>, mismatch: Option<(usize, usize)>) {
        self.instances += 1;
        if let Some((row, col)) = mismatch {
            if self.equal {
                self.equal = false;
                self.first_mismatch = Some(Mismatch { parameter, row, col });
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct DualPairReport {
    pub q: u32,
    pub n: usize,
    pub lambda: u32,
    /// Properties of `F` and `≪·,·≫`.
    pub form: Vec<Check>,
    pub h: FamilyComparison,
    pub u: FamilyComparison,
    pub w: FamilyComparison,
    /// `χ(x, x') = ψ(≪x w^{-1}, x'≫)` at every pair.
    pub chi: FamilyComparison,
    /// `ω(g) = σ_β` for every element of the unitary group.
    pub sl2_sigma: FamilyComparison,
    pub sl2_action: Check,
}

impl DualPairReport {
    pub fn families(&self) -> [&FamilyComparison; 5] {
        [&self.h, &self.u, &self.w, &self.chi, &self.sl2_sigma]
    }

    pub fn all_passed(&self) -> bool {
        self.form.iter().all(|c| c.passed) && self.families().iter().all(|f| f.equal) && self.sl2_action.passed
    }
}

/// Checks on `F`, `≪·,·≫` and the polarization, plus `G`-invariance on samples.
pub fn verify_form(ctx: &DualPairCtx, group: &GroupCtx, census: &Census, cfg: &DualPairConfig) -> Result<Vec<Check>> {
    let field = ctx.field;
    let mut out = Vec::new();

    let mut t = Tally::new();
    let f = &ctx.f;
    t.record(f.transpose() == *f, || "F is not symmetric".into());
    t.record(f.rank() == f.rows(), || format!("rank F = {}", f.rank()));
    out.push(t.finish("F symmetric non-degenerate", "F = F^t and rank F = 4n", true));

    let g = ctx.gram();
    let d = ctx.w_dim();
    let mut t = Tally::new();
    for i in 0..d {
        for j in 0..d {
            let want = if i == j { 0 } else { field.neg(g.get(j, i)) };
            t.record(g.get(i, j) == want, || format!("Gram entry ({i}, {j}) = {}", g.get(i, j)));
        }
    }
    out.push(t.finish("form alternating", "<<e_i, e_j>> = -<<e_j, e_i>> and <<e_i, e_i>> = 0 on a basis of W", true));

    let mut t = Tally::new();
    t.record(g.rank() == d, || format!("rank of the Gram matrix is {} < {d}", g.rank()));
    out.push(t.finish("form non-degenerate", "the Gram matrix of <<.,.>> has rank 8n", true));

    let mut t = Tally::new();
    for i in 0..d {
        for j in 0..d {
            if ctx.in_x(i) == ctx.in_x(j) {
                t.record(g.get(i, j) == 0, || format!("<<e_{i}, e_{j}>> != 0 inside one polarization half"));
            }
        }
    }
    out.push(t.finish("complete polarization", "X and Y are isotropic with W = X + Y", true));

    // G-invariance on random words in the generators
    let mut tokens = vec![GeneratorToken::W];
    tokens.extend(census.units.iter().cloned().map(GeneratorToken::H));
    tokens.extend(census.symmetric.iter().cloned().map(GeneratorToken::U));
    let mats = tokens.iter().map(|t| generator_matrix(group, t)).collect::<Result<Vec<_>>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut inv = Tally::new();
    let mut alt = Tally::new();
    for k in 0..cfg.invariance_samples {
        let len = rng.gen_range(1..=cfg.word_length.max(1));
        let mut gm = FqMatrix::identity(field, 4 * ctx.n);
        for _ in 0..len {
            gm = gm.mul(&mats[rng.gen_range(0..mats.len())]);
        }
        let g_inv = gm.inverse().ok_or_else(|| Error::CheckFailed("singular group element".into()))?;
        let w1 = FqMatrix::random(field, 2, 4 * ctx.n, &mut rng);
        let w2 = FqMatrix::random(field, 2, 4 * ctx.n, &mut rng);
        let base = ctx.symplectic_form(&w1, &w2)?;
        let moved = ctx.symplectic_form(&w1.mul(&g_inv), &w2.mul(&g_inv))?;
        inv.record(base == moved, || format!("sample {k}: {base} != {moved}"));
        let back = ctx.symplectic_form(&w2, &w1)?;
        let self1 = ctx.symplectic_form(&w1, &w1)?;
        alt.record(self1 == 0 && back == field.neg(base), || format!("sample {k}: <<w,w>> = {self1}"));
    }
    out.push(alt.finish("form alternating (sampled)", "<<w, w>> = 0 and <<w1, w2>> = -<<w2, w1>>", false));
    out.push(inv.finish("G-invariance", "<<w1 g^-1, w2 g^-1>> = <<w1, w2>> for random words g", false));
    Ok(out)
}

/// Compares `ω` with `ρ` on every generator family, `χ` with the form, and
/// the `SL_2` action with `σ`.
pub fn compare_models(rep: &WeilRep, cfg: &DualPairConfig) -> Result<DualPairReport> {
    let d = rep.datum();
    if d.n() > 1 {
        return Err(Error::Unsupported(format!("the model comparison materializes q^{} kernels; only n = 1 is supported", 8 * d.n())));
    }
    let ctx = DualPairCtx::new(d.field(), d.n())?;
    let census = Census::build(d.group(), &cfg.decompose.census)?;
    let (u, _) = unitary_group(d, &census, &cfg.decompose)?;
    compare_models_with(&ctx, rep, &census, &u, cfg)
}

pub fn compare_models_with(
    ctx: &DualPairCtx,
    rep: &WeilRep,
    census: &Census,
    u: &UnitaryGroup,
    cfg: &DualPairConfig,
) -> Result<DualPairReport> {
    let d = rep.datum();
    let form = verify_form(ctx, d.group(), census, cfg)?;

    let mut h = FamilyComparison::new("h_a", census.units_exhaustive);
    for a in &census.units {
        let tok = GeneratorToken::H(a.clone());
        record_monomial(&mut h, ctx, rep, &tok)?;
    }
    let mut uf = FamilyComparison::new("u_s", census.symmetric_exhaustive);
    for s in &census.symmetric {
        let tok = GeneratorToken::U(s.clone());
        record_monomial(&mut uf, ctx, rep, &tok)?;
    }

    let kernel = match schrodinger_operator(ctx, rep, &GeneratorToken::W)? {
        Schrodinger::Kernel(k) => k,
        Schrodinger::Monomial(_) => unreachable!("w is a Fourier kernel"),
    };
    let rows = kernel.rows();
    let module = ctx.module;
    let coords: Vec<Vec<u32>> = (0..module.size()).map(|x| module.coords(x)).collect();
    let field = ctx.field;
    let exp = |x: usize, y: usize| -> u32 {
        rows[x].iter().zip(&coords[y]).fold(0, |acc, (&a, &b)| field.add(acc, field.mul(a, b)))
    };

    let rho_w = rep.generator(&GeneratorToken::W)?;
    let mut w = FamilyComparison::new("w", true);
    match rho_w.fourier_kernel() {
        // both kernels carry the factor q^{-2n} = |X|^{-1/2}
        Some(k) if rho_w.scalar() == 1 => {
            let mismatch = first_pair(module.size(), |x, y| k.exponent(x, y) == exp(x, y));
            w.record(None, mismatch);
        }
        _ => w.record(Some("rho(w) is not a single Fourier kernel with scalar 1".into()), Some((0, 0))),
    }

    let mut chi = FamilyComparison::new("chi", true);
    let mismatch = first_pair(module.size(), |x, y| d.chi_exponent_idx(x, y) == exp(x, y));
    chi.record(None, mismatch);

    let f = u.field();
    let mut sl2 = FamilyComparison::new("sl2 vs sigma", true);
    let ops = (0..u.order())
        .map(|i| sl2_operator(ctx, rep, &u.element(i).sl2_matrix(f)))
        .collect::<Result<Vec<_>>>()?;
    for (i, op) in ops.iter().enumerate() {
        let c = compare(op, &sigma_operator(rep, u, i)?, &ColumnPlan::All)?;
        sl2.record(Some(format!("{:?}", u.element(i).b)), c.mismatch);
    }

    let order = u.order();
    let exhaustive = order * order <= cfg.composition_pairs;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5eed);
    let pairs: Vec<(usize, usize)> = if exhaustive {
        (0..order).flat_map(|i| (0..order).map(move |j| (i, j))).collect()
    } else {
        (0..cfg.composition_pairs).map(|_| (rng.gen_range(0..order), rng.gen_range(0..order))).collect()
    };
    let mut act = Tally::new();
    for (i, j) in pairs {
        let lhs = ops[i].then(&ops[j]);
        let c = compare(&lhs, &ops[u.group().mul(i, j)], &ColumnPlan::All)?;
        act.record(c.equal, || format!("omega(g_{i}) omega(g_{j}) != omega(g_{i} g_{j})"));
    }
    let sl2_action = act.finish("SL_2 action", "omega(g) omega(h) = omega(gh)", exhaustive);

    Ok(DualPairReport {
        q: field.q(),
        n: ctx.n,
        lambda: d.lambda(),
        form,
        h,
        u: uf,
        w,
        chi,
        sl2_sigma: sl2,
        sl2_action,
    })
}

fn record_monomial(fam: &mut FamilyComparison, ctx: &DualPairCtx, rep: &WeilRep, tok: &GeneratorToken) -> Result<()> {
    let omega = match schrodinger_operator(ctx, rep, tok)? {
        Schrodinger::Monomial(op) => op,
        Schrodinger::Kernel(_) => unreachable!("h_a and u_s are monomial"),
    };
    let c = compare(&omega, &rep.generator(tok)?, &ColumnPlan::All)?;
    fam.record(Some(tok.to_string()), c.mismatch);
    Ok(())
}

/// The first `(x, y)` in column-major order where `ok` fails.
fn first_pair(dim: usize, ok: impl Fn(usize, usize) -> bool) -> Option<(usize, usize)> {
    (0..dim).flat_map(|y| (0..dim).map(move |x| (x, y))).find(|&(x, y)| !ok(x, y))
}

/// `G`-invariance of `≪·,·≫` for explicitly given group elements, one random
/// pair `(w₁, w₂)` per element.
pub fn verify_invariance_on(ctx: &DualPairCtx, elements: &[FqMatrix], seed: u64) -> Result<Check> {
    let field = ctx.field;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut t = Tally::new();
    for (k, g) in elements.iter().enumerate() {
        let g_inv = g.inverse().ok_or_else(|| Error::CheckFailed(format!("element {k} is singular")))?;
        let w1 = FqMatrix::random(field, 2, 4 * ctx.n, &mut rng);
        let w2 = FqMatrix::random(field, 2, 4 * ctx.n, &mut rng);
        let base = ctx.symplectic_form(&w1, &w2)?;
        let moved = ctx.symplectic_form(&w1.mul(&g_inv), &w2.mul(&g_inv))?;
        t.record(base == moved, || format!("element {k}: {base} != {moved}"));
    }
    Ok(t.finish("G-invariance (enumerated elements)", "<<w1 g^-1, w2 g^-1>> = <<w1, w2>> for group elements g", false))
}
