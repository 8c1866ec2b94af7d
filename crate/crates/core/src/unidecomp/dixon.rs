//! Character tables by the Burnside–Dixon method: simultaneous
//! eigenvectors of the class-multiplication matrices over `F_ℓ`,
//! `ℓ ≡ 1 (mod exponent)`, lifted to exact values in `Q(ζ_N)`.

use std::fmt::Write as _;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::report::{Check, Tally};
use crate::scalars::{Cyclotomic, CyclotomicCtx};
use crate::unidecomp::group::{ConjugacyClasses, FiniteGroup};

pub(crate) fn pow_mod(mut a: u64, mut e: u64, p: u64) -> u64 {
    let mut r = 1 % p;
    a %= p;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % p;
        }
        a = a * a % p;
        e >>= 1;
    }
    r
}

fn inv_mod(a: u64, p: u64) -> u64 {
    pow_mod(a, p - 2, p)
}

pub(crate) fn is_prime(n: u64) -> bool {
    n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

/// Primes `ℓ ≡ 1 (mod e)` with `ℓ > 2√|G|`, in increasing order.
pub fn dixon_primes(exponent: u64, group_order: u64) -> impl Iterator<Item = u64> {
    let bound = 2.0 * (group_order as f64).sqrt();
    (1..).map(move |k| k * exponent + 1).filter(move |&l| l as f64 > bound && is_prime(l))
}

pub(crate) fn primitive_root(p: u64) -> u64 {
    let mut factors = Vec::new();
    let mut m = p - 1;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p).find(|&g| factors.iter().all(|&f| pow_mod(g, (p - 1) / f, p) != 1)).expect("prime modulus")
}

/// Column basis of `{v : A v = 0}` for a square matrix over `F_p`.
fn nullspace_mod(a: &[Vec<u64>], p: u64) -> Vec<Vec<u64>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut m = a.to_vec();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(piv) = (r..rows).find(|&i| m[i][c] != 0) else { continue };
        m.swap(piv, r);
        let inv = inv_mod(m[r][c], p);
        for v in m[r].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..rows {
            if i != r && m[i][c] != 0 {
                let f = m[i][c];
                for j in 0..cols {
                    m[i][j] = (m[i][j] + p - f * m[r][j] % p) % p;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![0u64; cols];
        v[free] = 1;
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = (p - m[i][free]) % p;
        }
        basis.push(v);
    }
    basis
}

/// Matrix of `M` restricted to the invariant span of the columns `basis`.
fn restrict(m: &[Vec<u64>], basis: &[Vec<u64>], p: u64) -> Result<Vec<Vec<u64>>> {
    let r = m.len();
    let d = basis.len();
    // rows of [B | M B], reduced on the first d columns
    let mut aug: Vec<Vec<u64>> = (0..r)
        .map(|i| {
            let mut row: Vec<u64> = basis.iter().map(|b| b[i]).collect();
            for b in basis {
                row.push((0..r).map(|k| m[i][k] * b[k] % p).sum::<u64>() % p);
            }
            row
        })
        .collect();
    let mut rank = 0;
    for c in 0..d {
        let piv = (rank..r)
            .find(|&i| aug[i][c] != 0)
            .ok_or_else(|| Error::CheckFailed("dependent basis in class-algebra split".into()))?;
        aug.swap(piv, rank);
        let inv = inv_mod(aug[rank][c], p);
        for v in aug[rank].iter_mut() {
            *v = *v * inv % p;
        }
        for i in 0..r {
            if i != rank && aug[i][c] != 0 {
                let f = aug[i][c];
                for j in 0..2 * d {
                    aug[i][j] = (aug[i][j] + p - f * aug[rank][j] % p) % p;
                }
            }
        }
        rank += 1;
    }
    if aug[d..].iter().any(|row| row[d..].iter().any(|&v| v != 0)) {
        return Err(Error::CheckFailed("subspace is not invariant".into()));
    }
    // column j of the restriction is the coordinate vector of M b_j
    Ok((0..d).map(|i| (0..d).map(|j| aug[i][d + j]).collect()).collect())
}

/// Irreducible characters of a finite group.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    group_order: usize,
    class_sizes: Vec<usize>,
    class_orders: Vec<usize>,
    exponent: usize,
    ell: u64,
    ctx: Arc<CyclotomicCtx>,
    dims: Vec<usize>,
    /// `values[π][k] = χ_π(g_k)`.
    values: Vec<Vec<Cyclotomic>>,
    /// `eigen[π][k]`: pairs `(j, m)` with `ζ_N^j` an eigenvalue of
    /// multiplicity `m` of `π(g_k)`.
    eigen: Vec<Vec<Vec<(u32, u32)>>>,
}

impl CharacterTable {
    pub fn group_order(&self) -> usize {
        self.group_order
    }
    pub fn class_count(&self) -> usize {
        self.class_sizes.len()
    }
    pub fn class_sizes(&self) -> &[usize] {
        &self.class_sizes
    }
    pub fn class_orders(&self) -> &[usize] {
        &self.class_orders
    }
    pub fn exponent(&self) -> usize {
        self.exponent
    }
    /// The prime used for the modular eigenvector computation.
    pub fn ell(&self) -> u64 {
        self.ell
    }
    pub fn ctx(&self) -> &Arc<CyclotomicCtx> {
        &self.ctx
    }
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }
    pub fn len(&self) -> usize {
        self.dims.len()
    }
    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }
    pub fn value(&self, pi: usize, class: usize) -> &Cyclotomic {
        &self.values[pi][class]
    }
    pub fn row(&self, pi: usize) -> &[Cyclotomic] {
        &self.values[pi]
    }
    pub fn eigenvalues(&self, pi: usize, class: usize) -> &[(u32, u32)] {
        &self.eigen[pi][class]
    }

    /// `⟨f, g⟩ = |G|^{-1} Σ_k |C_k| f_k conj(g_k)` for class functions.
    pub fn inner(&self, f: &[Cyclotomic], g: &[Cyclotomic]) -> Cyclotomic {
        let mut acc = Cyclotomic::zero(&self.ctx);
        for ((a, b), &s) in f.iter().zip(g).zip(&self.class_sizes) {
            acc += &(a * &b.conjugate()).scale_int(&BigInt::from(s));
        }
        acc.scale(&BigRational::new(1.into(), BigInt::from(self.group_order)))
    }

    /// Row and column orthogonality, `Σ dims² = |G|`.
    pub fn verify(&self) -> Vec<Check> {
        let r = self.len();
        let mut rows = Tally::new();
        for i in 0..r {
            for j in 0..r {
                let v = self.inner(&self.values[i], &self.values[j]);
                let want = if i == j { Cyclotomic::one(&self.ctx) } else { Cyclotomic::zero(&self.ctx) };
                rows.record(v == want, || format!("<chi_{i}, chi_{j}> = {v}"));
            }
        }
        let mut cols = Tally::new();
        for k in 0..self.class_count() {
            for l in 0..self.class_count() {
                let mut acc = Cyclotomic::zero(&self.ctx);
                for row in &self.values {
                    acc += &(&row[k] * &row[l].conjugate());
                }
                let want = if k == l {
                    Cyclotomic::from_integer(&self.ctx, (self.group_order / self.class_sizes[k]) as i64)
                } else {
                    Cyclotomic::zero(&self.ctx)
                };
                cols.record(acc == want, || format!("column sum ({k}, {l}) = {acc}"));
            }
        }
        let mut sq = Tally::new();
        let s: usize = self.dims.iter().map(|d| d * d).sum();
        sq.record(s == self.group_order && r == self.class_count(), || {
            format!("sum of squared dimensions {s}, {r} irreducibles for {} classes", self.class_count())
        });
        vec![
            rows.finish("row orthogonality", "<chi_i, chi_j> = delta_ij", true),
            cols.finish("column orthogonality", "sum_i chi_i(g_k) conj chi_i(g_l) = delta_kl |C_G(g_k)|", true),
            sq.finish("sum of squares", "sum of dim^2 = |G|", true),
        ]
    }

    /// One row per irreducible; each value is its power-basis coefficient
    /// list in `Q(ζ_N)`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("irrep,dim");
        for k in 0..self.class_count() {
            let _ = write!(s, ",class{k}(size={},order={})", self.class_sizes[k], self.class_orders[k]);
        }
        s.push('\n');
        for (pi, row) in self.values.iter().enumerate() {
            let _ = write!(s, "{pi},{}", self.dims[pi]);
            for v in row {
                let coeffs: Vec<String> = v.coefficients().iter().map(|c| c.to_string()).collect();
                let _ = write!(s, ",[{}]", coeffs.join(" "));
            }
            s.push('\n');
        }
        s
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CharacterTableSummary {
    pub classes: usize,
    pub class_sizes: Vec<usize>,
    pub class_orders: Vec<usize>,
    pub exponent: usize,
    pub ell: u64,
    pub field_order: usize,
    pub dims: Vec<usize>,
}

impl From<&CharacterTable> for CharacterTableSummary {
    fn from(t: &CharacterTable) -> Self {
        CharacterTableSummary {
            classes: t.class_count(),
            class_sizes: t.class_sizes.clone(),
            class_orders: t.class_orders.clone(),
            exponent: t.exponent,
            ell: t.ell,
            field_order: t.ctx.order(),
            dims: t.dims.clone(),
        }
    }
}

/// The character table of `g`, with values in `Q(ζ_N)` for
/// `N = lcm(exponent, extra_root)`.
pub fn character_table(g: &FiniteGroup, classes: &ConjugacyClasses, extra_root: usize) -> Result<CharacterTable> {
    let e = g.exponent();
    let n = num_integer::lcm(e, extra_root.max(1));
    let ctx = CyclotomicCtx::new(n)?;
    let mut last = None;
    for ell in dixon_primes(e as u64, g.order() as u64).take(8) {
        match dixon_at(g, classes, e, ell, &ctx) {
            Ok(t) => return Ok(t),
            Err(err) => last = Some(err),
        }
    }
    Err(last.unwrap_or_else(|| Error::CheckFailed("no Dixon prime found".into())))
}

fn dixon_at(
    g: &FiniteGroup,
    classes: &ConjugacyClasses,
    e: usize,
    ell: u64,
    ctx: &Arc<CyclotomicCtx>,
) -> Result<CharacterTable> {
    let r = classes.len();
    let order = g.order();
    let sizes = classes.sizes();
    // c[i][j][k] = #{x ∈ C_i : x^{-1} z_k ∈ C_j}
    let mut c = vec![vec![vec![0u64; r]; r]; r];
    for k in 0..r {
        let z = classes.reps[k];
        for x in 0..order {
            let i = classes.class_of[x];
            let j = classes.class_of[g.mul(g.inv(x), z)];
            c[i][j][k] += 1;
        }
    }
    let mats: Vec<Vec<Vec<u64>>> =
        (0..r).map(|i| (0..r).map(|j| (0..r).map(|k| c[i][j][k] % ell).collect()).collect()).collect();

    let identity: Vec<Vec<u64>> = (0..r).map(|i| (0..r).map(|j| u64::from(i == j)).collect()).collect();
    let mut spaces = vec![identity];
    for m in &mats {
        let mut next = Vec::new();
        for basis in spaces {
            if basis.len() == 1 {
                next.push(basis);
                continue;
            }
            let a = restrict(m, &basis, ell)?;
            let d = basis.len();
            let mut found = 0;
            for lam in 0..ell {
                let shifted: Vec<Vec<u64>> = (0..d)
                    .map(|i| (0..d).map(|j| (a[i][j] + if i == j { ell - lam } else { 0 }) % ell).collect())
                    .collect();
                let ns = nullspace_mod(&shifted, ell);
                if ns.is_empty() {
                    continue;
                }
                found += ns.len();
                let sub: Vec<Vec<u64>> = ns
                    .iter()
                    .map(|coef| (0..r).map(|t| (0..d).map(|s| coef[s] * basis[s][t] % ell).sum::<u64>() % ell).collect())
                    .collect();
                next.push(sub);
            }
            if found != d {
                return Err(Error::CheckFailed(format!("class algebra does not split over F_{ell}")));
            }
        }
        spaces = next;
    }
    if spaces.iter().any(|s| s.len() != 1) || spaces.len() != r {
        return Err(Error::CheckFailed(format!("central characters not separated mod {ell}")));
    }

    let zeta = pow_mod(primitive_root(ell), (ell - 1) / e as u64, ell);
    let class_orders: Vec<usize> = classes.reps.iter().map(|&x| g.element_order(x)).collect();
    // power maps: class of g_k^l
    let power_class: Vec<Vec<usize>> = classes
        .reps
        .iter()
        .zip(&class_orders)
        .map(|(&x, &o)| {
            let mut acc = g.identity();
            (0..o)
                .map(|_| {
                    let c = classes.class_of[acc];
                    acc = g.mul(acc, x);
                    c
                })
                .collect()
        })
        .collect();

    let mut irreps = Vec::new();
    for space in spaces {
        let mut v = space.into_iter().next().expect("one vector");
        let v0 = v[0];
        if v0 == 0 {
            return Err(Error::CheckFailed("central character vanishes at the identity".into()));
        }
        let inv0 = inv_mod(v0, ell);
        for x in v.iter_mut() {
            *x = *x * inv0 % ell;
        }
        // χ(1)² = |G| / Σ_k ω_k ω_{k*} / |C_k|
        let mut s = 0u64;
        for k in 0..r {
            let kk = classes.inverse_class[k];
            s = (s + v[k] * v[kk] % ell * inv_mod(sizes[k] as u64 % ell, ell)) % ell;
        }
        if s == 0 {
            return Err(Error::CheckFailed("degenerate norm in Dixon lift".into()));
        }
        let d2 = (order as u64 % ell) * inv_mod(s, ell) % ell;
        let dim = (1..=order)
            .take_while(|d| d * d <= order)
            .find(|&d| order % d == 0 && (d * d) as u64 % ell == d2)
            .ok_or_else(|| Error::CheckFailed(format!("no degree with square {d2} mod {ell}")))?;
        let theta: Vec<u64> = (0..r)
            .map(|k| v[k] * (dim as u64 % ell) % ell * inv_mod(sizes[k] as u64 % ell, ell) % ell)
            .collect();

        let mut row = Vec::with_capacity(r);
        let mut eig = Vec::with_capacity(r);
        for k in 0..r {
            let o = class_orders[k];
            let z = pow_mod(zeta, (e / o) as u64, ell);
            let inv_o = inv_mod(o as u64 % ell, ell);
            let mut counts = vec![0i64; ctx.order()];
            let mut pairs = Vec::new();
            let mut total = 0usize;
            for j in 0..o {
                let mut acc = 0u64;
                for l in 0..o {
                    let t = theta[power_class[k][l]];
                    let root = pow_mod(z, ((o - (j * l) % o) % o) as u64, ell);
                    acc = (acc + t * root) % ell;
                }
                let mult = acc * inv_o % ell;
                if mult as usize > dim {
                    return Err(Error::CheckFailed(format!("eigenvalue multiplicity {mult} exceeds degree {dim}")));
                }
                if mult > 0 {
                    let exp = j * (ctx.order() / o);
                    counts[exp] += mult as i64;
                    pairs.push((exp as u32, mult as u32));
                    total += mult as usize;
                }
            }
            if total != dim {
                return Err(Error::CheckFailed("eigenvalue multiplicities do not sum to the degree".into()));
            }
            row.push(Cyclotomic::from_group_ring(ctx, &counts, BigInt::from(1)));
            eig.push(pairs);
        }
        irreps.push((dim, row, eig));
    }
    // trivial first, then by degree
    irreps.sort_by(|a, b| {
        let triv = |x: &(usize, Vec<Cyclotomic>, _)| !x.1.iter().all(|c| c.is_one());
        (triv(a), a.0).cmp(&(triv(b), b.0)).then_with(|| format!("{:?}", a.2).cmp(&format!("{:?}", b.2)))
    });
    let table = CharacterTable {
        group_order: order,
        class_sizes: sizes,
        class_orders,
        exponent: e,
        ell,
        ctx: ctx.clone(),
        dims: irreps.iter().map(|x| x.0).collect(),
        values: irreps.iter().map(|x| x.1.clone()).collect(),
        eigen: irreps.into_iter().map(|x| x.2).collect(),
    };
    if let Some(bad) = table.verify().into_iter().find(|c| !c.passed) {
        return Err(Error::CheckFailed(format!("{}: {:?}", bad.name, bad.violation)));
    }
    Ok(table)
}
