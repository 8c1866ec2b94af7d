//! Models of the irreducibles of `U` as left ideals `V_π = C[U]·v` with
//! `v = e_π f_λ`, and the spaces of maps `θ: M → V_π` with
//! `θ(βx) = β·θ(x)`.
//!
//! Elements of `V_π` are functions on `U`; `β` acts by left translation,
//! which only permutes values. Linear independence is certified modulo a
//! prime `ℓ ≡ 1 (mod N)`: a nonzero minor mod `ℓ` is nonzero over `Q(ζ_N)`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::report::{Check, Tally};
use crate::scalars::CyclotomicCtx;
use crate::unidecomp::dixon::{is_prime, pow_mod, primitive_root, CharacterTable};
use crate::unidecomp::group::{ConjugacyClasses, FiniteGroup, UnitaryGroup};
use crate::unidecomp::intcyc::{IntCyc, IntVec};
use crate::unidecomp::projector::Orbits;
use crate::unidecomp::DecomposeConfig;
use crate::slstar::GeneratorToken;
use crate::weilrep::WeilRep;

/// Reduction of `Z[ζ_N]` modulo a prime above `ℓ`.
struct ModReduction {
    ell: u64,
    /// Images of the power basis.
    basis: Vec<u64>,
}

impl ModReduction {
    fn new(ctx: &Arc<CyclotomicCtx>, ell: u64) -> Self {
        let n = ctx.order() as u64;
        let z = pow_mod(primitive_root(ell), (ell - 1) / n, ell);
        let basis = (0..ctx.basis_dim() as u64).map(|k| pow_mod(z, k, ell)).collect();
        ModReduction { ell, basis }
    }

    fn reduce(&self, v: &[i128]) -> u64 {
        let l = self.ell as i128;
        v.iter().zip(&self.basis).fold(0u64, |acc, (&c, &b)| {
            let c = c.rem_euclid(l) as u64;
            (acc + c * b) % self.ell
        })
    }
}

/// Primes `ℓ ≡ 1 (mod n)` above `2^20`.
fn reduction_primes(n: u64) -> impl Iterator<Item = u64> {
    let start = (1u64 << 20) / n + 1;
    (start..).map(move |k| k * n + 1).filter(|&l| is_prime(l))
}

/// Incremental row echelon form over `F_ℓ`.
struct ModEchelon {
    ell: u64,
    rows: Vec<(usize, Vec<u64>)>,
}

impl ModEchelon {
    fn new(ell: u64) -> Self {
        ModEchelon { ell, rows: Vec::new() }
    }

    /// Adds `w` if it is independent of the rows so far.
    fn insert(&mut self, mut w: Vec<u64>) -> bool {
        let p = self.ell;
        for (piv, row) in &self.rows {
            let c = w[*piv];
            if c != 0 {
                for (a, &b) in w.iter_mut().zip(row) {
                    *a = (*a + p - c * b % p) % p;
                }
            }
        }
        let Some(piv) = w.iter().position(|&a| a != 0) else {
            return false;
        };
        let inv = pow_mod(w[piv], p - 2, p);
        for a in w.iter_mut() {
            *a = *a * inv % p;
        }
        self.rows.push((piv, w));
        true
    }

    fn pivots(&self) -> Vec<usize> {
        self.rows.iter().map(|r| r.0).collect()
    }
}

/// `V_π = C[U]·v` inside the group algebra.
pub struct IrrepModel {
    pub index: usize,
    pub dim: usize,
    /// Class of the generator `g` of the cyclic subgroup `H`.
    pub cyclic_class: usize,
    pub cyclic_order: usize,
    /// `λ(g) = ζ_N^e`.
    pub lambda_exponent: u32,
    pub ell: u64,
    /// `x_i` with `{x_i·v}` a basis of `V_π`.
    pub translates: Vec<usize>,
    /// Points of `U` at which those translates are independent.
    pub pivots: Vec<usize>,
    v: Vec<IntVec>,
    red: ModReduction,
    v_mod: Vec<u64>,
}

impl IrrepModel {
    pub fn build(g: &FiniteGroup, classes: &ConjugacyClasses, table: &CharacterTable, pi: usize) -> Result<IrrepModel> {
        let ctx = table.ctx();
        let ic = IntCyc::new(ctx);
        let nn = ctx.order();
        let m = table.dims()[pi];
        // a cyclic subgroup with a character λ of multiplicity one in Res π
        let (k, e) = (0..classes.len())
            .find_map(|k| table.eigenvalues(pi, k).iter().find(|ev| ev.1 == 1).map(|ev| (k, ev.0)))
            .ok_or_else(|| Error::CheckFailed(format!("irreducible {pi} has no multiplicity-one eigenvalue")))?;
        let gen = classes.reps[k];
        let o = g.element_order(gen);
        let powers: Vec<usize> = (0..o).map(|l| g.pow(gen, l)).collect();
        let conj: Vec<IntVec> =
            table.row(pi).iter().map(|c| ic.integral(&c.conjugate())).collect::<Result<_>>()?;

        // v(y) = Σ_l conj χ(y g^{-l}) ζ^{-e l}
        let v: Vec<IntVec> = (0..g.order())
            .map(|y| {
                let mut counts = vec![0i128; nn];
                for (l, &h) in powers.iter().enumerate() {
                    let c = &conj[classes.class_of[g.mul(y, g.inv(h))]];
                    let shift = (nn - (e as usize * l) % nn) % nn;
                    for (t, &a) in c.iter().enumerate() {
                        counts[(t + shift) % nn] += a;
                    }
                }
                ic.from_group_ring(&counts)
            })
            .collect::<Result<_>>()?;

        for ell in reduction_primes(nn as u64).take(8) {
            let red = ModReduction::new(ctx, ell);
            let v_mod: Vec<u64> = v.iter().map(|c| red.reduce(c)).collect();
            let mut ech = ModEchelon::new(ell);
            let mut translates = Vec::new();
            for x in 0..g.order() {
                let xi = g.inv(x);
                let w = (0..g.order()).map(|y| v_mod[g.mul(xi, y)]).collect();
                if ech.insert(w) {
                    translates.push(x);
                    if translates.len() == m {
                        break;
                    }
                }
            }
            if translates.len() == m {
                let pivots = ech.pivots();
                return Ok(IrrepModel {
                    index: pi,
                    dim: m,
                    cyclic_class: k,
                    cyclic_order: o,
                    lambda_exponent: e,
                    ell,
                    translates,
                    pivots,
                    v,
                    red,
                    v_mod,
                });
            }
        }
        Err(Error::CheckFailed(format!("no reduction prime separates a basis of irreducible {pi}")))
    }

    /// Exact checks that `v` is a multiple of an idempotent whose left
    /// ideal affords `χ_π`. With `full` the idempotent relation is checked
    /// at every point of `U`, otherwise at the pivots.
    pub fn verify(&self, g: &FiniteGroup, classes: &ConjugacyClasses, table: &CharacterTable, full: bool) -> Result<Check> {
        let ic = IntCyc::new(table.ctx());
        let m = self.dim as i128;
        let ord = g.order();
        let mut t = Tally::new();
        // m (v * v) = |U| o v
        let points: Vec<usize> = if full { (0..ord).collect() } else { self.pivots.clone() };
        let scale = (ord * self.cyclic_order) as i128;
        for &y in &points {
            let mut acc = ic.zero();
            for z in 0..ord {
                let prod = ic.mul(&self.v[z], &self.v[g.mul(g.inv(z), y)])?;
                ic.add_scaled(&mut acc, &prod, m)?;
            }
            let mut want = ic.zero();
            ic.add_scaled(&mut want, &self.v[y], scale)?;
            t.record(acc == want, || format!("v * v is not a multiple of v at element {y}"));
        }
        // χ_V(g_k) = m/(o |C_k|) Σ_{c ∈ C_k^{-1}} v(c)
        for k in 0..classes.len() {
            let mut acc = ic.zero();
            for &c in &classes.members[classes.inverse_class[k]] {
                ic.add_scaled(&mut acc, &self.v[c], m)?;
            }
            let mut want = ic.zero();
            let chi = ic.integral(table.value(self.index, k))?;
            ic.add_scaled(&mut want, &chi, (self.cyclic_order * classes.members[k].len()) as i128)?;
            t.record(acc == want, || format!("character of the model differs from chi_{} on class {k}", self.index));
        }
        let pi = self.index;
        Ok(t.finish(
            &format!("irrep-model-{pi}"),
            &format!("C[U] v affords chi_{pi}: v is a multiple of an idempotent with the right character"),
            full,
        ))
    }

    /// `Σ_{h ∈ H} (x·v)(h^{-1} y)` modulo `ℓ`, for all `y`.
    fn averaged_mod(&self, g: &FiniteGroup, stab: &[usize], x: usize) -> Vec<u64> {
        let l = self.red.ell;
        let xi = g.inv(x);
        (0..g.order())
            .map(|y| stab.iter().fold(0, |acc, &h| (acc + self.v_mod[g.mul(xi, g.mul(g.inv(h), y))]) % l))
            .collect()
    }

    fn averaged(&self, ic: &IntCyc, g: &FiniteGroup, stab: &[usize], x: usize) -> Result<Vec<IntVec>> {
        let xi = g.inv(x);
        (0..g.order())
            .map(|y| {
                let mut acc = ic.zero();
                for &h in stab {
                    ic.add_scaled(&mut acc, &self.v[g.mul(xi, g.mul(g.inv(h), y))], 1)?;
                }
                Ok(acc)
            })
            .collect()
    }
}

/// A basis of the equivariant maps `θ: M → V_π`: for each orbit `O` with
/// representative `r` and stabilizer `H`, the maps `θ(γr) = γ·u` for `u`
/// in a basis of `V_π^H`. Each `u` is stored as the element `x` with
/// `u = Σ_{h ∈ H} h·(x·v)`.
pub struct HomSpace {
    pub index: usize,
    pub per_orbit: Vec<(usize, Vec<usize>)>,
}

impl HomSpace {
    pub fn dim(&self) -> usize {
        self.per_orbit.iter().map(|p| p.1.len()).sum()
    }

    pub fn build(
        model: &IrrepModel,
        g: &FiniteGroup,
        classes: &ConjugacyClasses,
        table: &CharacterTable,
        orbits: &Orbits,
    ) -> Result<HomSpace> {
        let ic = IntCyc::new(table.ctx());
        let mut per_orbit = Vec::new();
        for (o, stab) in orbits.stabilizers.iter().enumerate() {
            let want = fixed_dim(&ic, classes, table, model.index, stab)?;
            if want == 0 {
                continue;
            }
            let xs = if stab.len() == 1 {
                model.translates.clone()
            } else {
                let mut ech = ModEchelon::new(model.red.ell);
                let mut xs = Vec::new();
                for x in 0..g.order() {
                    if ech.insert(model.averaged_mod(g, stab, x)) {
                        xs.push(x);
                        if xs.len() == want {
                            break;
                        }
                    }
                }
                xs
            };
            if xs.len() != want {
                return Err(Error::CheckFailed(format!(
                    "orbit {o}: found {} independent fixed vectors of irreducible {}, expected {want}",
                    xs.len(),
                    model.index
                )));
            }
            per_orbit.push((o, xs));
        }
        Ok(HomSpace { index: model.index, per_orbit })
    }
}

/// `dim V_π^H = (1/|H|) Σ_{h ∈ H} χ_π(h)`.
fn fixed_dim(ic: &IntCyc, classes: &ConjugacyClasses, table: &CharacterTable, pi: usize, stab: &[usize]) -> Result<usize> {
    let mut acc = ic.zero();
    for &h in stab {
        ic.add_scaled(&mut acc, &ic.integral(table.value(pi, classes.class_of[h]))?, 1)?;
    }
    let h = stab.len() as i128;
    if acc[1..].iter().any(|&c| c != 0) || acc[0] % h != 0 || acc[0] < 0 {
        return Err(Error::CheckFailed(format!("average of chi_{pi} over a stabilizer is not a natural number")));
    }
    Ok((acc[0] / h) as usize)
}

/// `Φ = ρ̂_w θ` for one basis map `θ`, checked for `Φ(βx) = β·Φ(x)` with
/// `β` in a generating pair. Values of `Φ` lie in `V_π`, which is
/// determined by the pivots, so `Φ` is compared there.
fn closure_check(
    rep: &WeilRep,
    u: &UnitaryGroup,
    model: &IrrepModel,
    orbits: &Orbits,
    table: &CharacterTable,
    orbit: usize,
    x: usize,
    tally: &mut Tally,
) -> Result<()> {
    let g = u.group();
    let ic = IntCyc::new(table.ctx());
    let nn = table.ctx().order();
    let phi = ic.dim();
    let q = rep.space().q() as usize;
    let module = rep.datum().module();
    let gens = g.generating_pair();
    let uvec = model.averaged(&ic, g, &orbits.stabilizers[orbit], x)?;

    // evaluation points: pivots and their translates by the inverse generators
    let mut evals: Vec<usize> = model.pivots.clone();
    for &b in &gens {
        for &p in &model.pivots {
            let y = g.mul(g.inv(b), p);
            if !evals.contains(&y) {
                evals.push(y);
            }
        }
    }
    let slot = |y: usize| evals.iter().position(|&e| e == y).expect("evaluation point");

    // θ(γ_y r)(s) = u(γ_y^{-1} s), as i64 rows
    let members = &orbits.members[orbit];
    let bound: i128 = uvec.iter().flatten().map(|c| c.abs()).max().unwrap_or(0);
    if bound.checked_mul(members.len() as i128).map_or(true, |b| b > (1i128 << 60)) {
        return Err(Error::Overflow);
    }
    let theta: Vec<Vec<i64>> = members
        .iter()
        .map(|&y| {
            let gi = g.inv(orbits.transporter[y as usize] as usize);
            evals.iter().flat_map(|&s| uvec[g.mul(gi, s)].iter().map(|&c| c as i64)).collect()
        })
        .collect();

    let w = rep.generator(&GeneratorToken::W)?;
    let kernel = w.fourier_kernel().ok_or_else(|| Error::CheckFailed("rho(w) is not a Fourier operator".into()))?;
    let step = nn / q;
    let ns = evals.len();
    let width = ns * phi;
    let dim = rep.dim();
    let reduce: Vec<&[i64]> = (0..nn).map(|k| table.ctx().reduce_power(k as i64)).collect();
    let rmax = reduce.iter().flat_map(|r| r.iter()).map(|c| c.abs() as i128).max().unwrap_or(1);
    if (bound * members.len() as i128).saturating_mul(1 + nn as i128 * rmax) > (1i128 << 62) {
        return Err(Error::Overflow);
    }
    // Φ(x)(s): sum θ rows by kernel exponent, then shift by ζ_q^e and reduce
    let mut buckets = vec![0i64; q * width];
    let mut values = vec![0i64; dim * width];
    let mut buf = vec![0i64; nn];
    for xp in 0..dim {
        buckets.iter_mut().for_each(|b| *b = 0);
        for (yl, &y) in members.iter().enumerate() {
            let e = kernel.exponent(xp, y as usize) as usize;
            for (a, &b) in buckets[e * width..(e + 1) * width].iter_mut().zip(&theta[yl]) {
                *a += b;
            }
        }
        for s in 0..ns {
            buf.iter_mut().for_each(|b| *b = 0);
            for e in 0..q {
                let src = &buckets[e * width + s * phi..e * width + (s + 1) * phi];
                for (t, &c) in src.iter().enumerate() {
                    buf[(t + e * step) % nn] += c;
                }
            }
            let out = &mut values[(xp * ns + s) * phi..(xp * ns + s + 1) * phi];
            out.copy_from_slice(&buf[..phi]);
            for (k, &c) in buf.iter().enumerate().skip(phi) {
                if c != 0 {
                    for (o, &r) in out.iter_mut().zip(reduce[k]) {
                        *o += c * r;
                    }
                }
            }
        }
    }
    let value = |xp: usize, s: usize| &values[(xp * ns + s) * phi..(xp * ns + s + 1) * phi];
    for &b in &gens {
        let perm = u.element(b).action_perm(module);
        for xp in 0..dim {
            let bx = perm[xp] as usize;
            for &p in &model.pivots {
                let lhs = value(bx, slot(p));
                let rhs = value(xp, slot(g.mul(g.inv(b), p)));
                tally.record(lhs == rhs, || {
                    format!("rho(w) theta is not equivariant (irrep {}, orbit {orbit}, point {xp})", model.index)
                });
            }
        }
    }
    Ok(())
}

/// Builds the models and Hom bases for every irreducible and checks
/// `dim = n_π`, the trivial case against Burnside, and closure under `ρ(w)`.
#[allow(clippy::too_many_arguments)]
pub fn verify_hom_spaces(
    rep: &WeilRep,
    u: &UnitaryGroup,
    classes: &ConjugacyClasses,
    table: &CharacterTable,
    orbits: &Orbits,
    multiplicities: &[u64],
    perm_character: &[u64],
    cfg: &DecomposeConfig,
) -> Result<(Vec<usize>, Vec<Check>)> {
    let g = u.group();
    let full = g.order() * g.order() <= 120_000;
    let limit = cfg.hom_closure.unwrap_or(if rep.dim() <= 625 { usize::MAX } else { 1 });
    let mut models = Tally::new();
    let mut models_exhaustive = true;
    let mut dims_t = Tally::new();
    let mut closure = Tally::new();
    let mut closure_all = true;
    let mut dims = Vec::with_capacity(table.len());
    for pi in 0..table.len() {
        let model = IrrepModel::build(g, classes, table, pi)?;
        let c = model.verify(g, classes, table, full)?;
        models_exhaustive &= c.exhaustive;
        models.record(c.passed, || c.violation.clone().unwrap_or_default());
        let hom = HomSpace::build(&model, g, classes, table, orbits)?;
        let d = hom.dim();
        dims_t.record(d as u64 == multiplicities[pi], || {
            format!("dim Hom for irreducible {pi} is {d}, n_pi = {}", multiplicities[pi])
        });
        dims.push(d);
        // smallest orbits first
        let mut basis: Vec<(usize, usize)> =
            hom.per_orbit.iter().flat_map(|(o, xs)| xs.iter().map(move |&x| (*o, x))).collect();
        basis.sort_by_key(|&(o, _)| orbits.members[o].len());
        closure_all &= basis.len() <= limit;
        for &(o, x) in basis.iter().take(limit) {
            closure_check(rep, u, &model, orbits, table, o, x, &mut closure)?;
        }
    }
    // Burnside: #orbits = (1/|U|) Σ_k |C_k| fix(g_k)
    let mut tb = Tally::new();
    let burnside: u64 = classes.members.iter().zip(perm_character).map(|(c, &f)| c.len() as u64 * f).sum();
    let orbit_count = orbits.len() as u64;
    tb.record(burnside == orbit_count * g.order() as u64, || {
        format!("Burnside average {burnside}/{} but {orbit_count} orbits", g.order())
    });
    tb.record(dims[0] as u64 == orbit_count, || format!("trivial Hom space has dim {}, {orbit_count} orbits", dims[0]));
    Ok((
        dims,
        vec![
            models.finish("irrep-models", "each C[U] e_pi f_lambda affords chi_pi", models_exhaustive),
            dims_t.finish("hom-dimension", "dim of equivariant maps M -> V_pi equals n_pi", true),
            tb.finish("hom-trivial", "trivial pi: dimension = number of U-orbits = Burnside average", true),
            closure.finish(
                "hom-closure",
                "rho(w) maps each checked basis map to an equivariant map (exact)",
                closure_all,
            ),
        ],
    ))
}
