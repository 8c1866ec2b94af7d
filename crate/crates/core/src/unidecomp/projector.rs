//! Orbits of `U` on `M` and the isotypic projectors
//! `P_π = (m_π/|U|) Σ_β conj χ_π(β) σ_β`.
//!
//! `P_π` commutes with every `σ_γ`, so it is block diagonal over the
//! orbits and each block is fixed by its row at the orbit representative:
//! `P(γr, z) = P(r, γ^{-1} z)`. All products are computed from those rows.

use num_bigint::BigInt;
use num_rational::BigRational;
use rustc_hash::FxHashMap;

use crate::error::Result;
use crate::report::{Check, Tally};
use crate::scalars::Cyclotomic;
use crate::unidecomp::dixon::CharacterTable;
use crate::unidecomp::group::{ConjugacyClasses, PointMover, UnitaryGroup};
use crate::unidecomp::intcyc::{IntCyc, IntVec};
use crate::weildata::ModuleSpace;

/// Orbits of `U` on the points of `M`.
#[derive(Clone, Debug)]
pub struct Orbits {
    /// `members[o][0]` is the representative of orbit `o`.
    pub members: Vec<Vec<u32>>,
    pub orbit_of: Vec<u32>,
    pub local: Vec<u32>,
    /// Index of an element `γ` with `γ(rep) = x`.
    pub transporter: Vec<u32>,
    pub stabilizers: Vec<Vec<usize>>,
}

impl Orbits {
    pub fn compute(u: &UnitaryGroup, module: &ModuleSpace) -> Orbits {
        let g = u.group();
        let gens = g.generating_pair();
        let perms: Vec<Vec<u32>> = gens.iter().map(|&s| u.element(s).action_perm(module)).collect();
        let size = module.size();
        let mut orbit_of = vec![u32::MAX; size];
        let mut local = vec![0u32; size];
        let mut transporter = vec![0u32; size];
        let mut members = Vec::new();
        for start in 0..size {
            if orbit_of[start] != u32::MAX {
                continue;
            }
            let o = members.len() as u32;
            orbit_of[start] = o;
            transporter[start] = g.identity() as u32;
            let mut queue = vec![start as u32];
            let mut head = 0;
            while head < queue.len() {
                let y = queue[head] as usize;
                head += 1;
                for (&s, p) in gens.iter().zip(&perms) {
                    let z = p[y] as usize;
                    if orbit_of[z] == u32::MAX {
                        orbit_of[z] = o;
                        local[z] = queue.len() as u32;
                        transporter[z] = g.mul(s, transporter[y] as usize) as u32;
                        queue.push(z as u32);
                    }
                }
            }
            members.push(queue);
        }
        let mut mover = PointMover::new(*module);
        let stabilizers = members
            .iter()
            .map(|m| {
                let r = m[0] as usize;
                (0..u.order()).filter(|&b| mover.apply(u.element(b), r) == r).collect()
            })
            .collect();
        Orbits { members, orbit_of, local, transporter, stabilizers }
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }
    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }
    pub fn sizes(&self) -> Vec<usize> {
        self.members.iter().map(|m| m.len()).collect()
    }
}

/// Row data of one orbit block, shared by every irreducible.
struct OrbitRows {
    /// Distinct class-count vectors `c ↦ #{β ∈ C : β^{-1} r = y}`.
    palette: Vec<Vec<u32>>,
    /// Palette index of `S(r, y)` for each local `y`.
    pal: Vec<u32>,
    /// `pairs[z]`: `(a, b, count)` with `Σ_y [pal(y) = a][pal(γ_y^{-1} z) = b]`.
    pairs: Vec<Vec<(u32, u32, u32)>>,
}

fn orbit_rows(u: &UnitaryGroup, classes: &ConjugacyClasses, orbits: &Orbits, o: usize, mover: &mut PointMover) -> OrbitRows {
    let g = u.group();
    let mem = &orbits.members[o];
    let r = mem[0] as usize;
    let len = mem.len();
    let nc = classes.len();
    let mut counts = vec![vec![0u32; nc]; len];
    for b in 0..u.order() {
        let y = mover.apply(u.element(g.inv(b)), r);
        counts[orbits.local[y] as usize][classes.class_of[b]] += 1;
    }
    let mut index: FxHashMap<Vec<u32>, u32> = FxHashMap::default();
    let mut palette = Vec::new();
    let pal: Vec<u32> = counts
        .into_iter()
        .map(|c| {
            *index.entry(c.clone()).or_insert_with(|| {
                palette.push(c);
                (palette.len() - 1) as u32
            })
        })
        .collect();
    // local action of the transporters
    let k = palette.len();
    let mut cells = vec![0u32; len * k * k];
    for (yl, &y) in mem.iter().enumerate() {
        let gamma = u.element(orbits.transporter[y as usize] as usize);
        let a = pal[yl] as usize;
        for (zl, &z) in mem.iter().enumerate() {
            let img = orbits.local[mover.apply(gamma, z as usize)] as usize;
            cells[(img * k + a) * k + pal[zl] as usize] += 1;
        }
    }
    let pairs = (0..len)
        .map(|z| {
            let base = z * k * k;
            (0..k * k)
                .filter(|&i| cells[base + i] != 0)
                .map(|i| ((i / k) as u32, (i % k) as u32, cells[base + i]))
                .collect()
        })
        .collect();
    OrbitRows { palette, pal, pairs }
}

/// Exact checks on the family `{P_π}`.
#[derive(Clone, Debug)]
pub struct ProjectorChecks {
    pub idempotent: Check,
    pub orthogonal: Check,
    pub complete: Check,
    pub rank: Check,
    /// `trace(P_π)`, which is its rank.
    pub ranks: Vec<BigRational>,
}

/// Verifies idempotence, mutual orthogonality, completeness and
/// `rank P_π = n_π m_π`.
pub fn verify_projectors(
    u: &UnitaryGroup,
    classes: &ConjugacyClasses,
    table: &CharacterTable,
    orbits: &Orbits,
    module: &ModuleSpace,
    multiplicities: &[u64],
) -> Result<ProjectorChecks> {
    let ic = IntCyc::new(table.ctx());
    let r = table.len();
    let order = u.order() as i128;
    let dims: Vec<i128> = table.dims().iter().map(|&d| d as i128).collect();
    let conj: Vec<Vec<IntVec>> = (0..r)
        .map(|p| table.row(p).iter().map(|c| ic.integral(&c.conjugate())).collect::<Result<_>>())
        .collect::<Result<_>>()?;
    let mut mover = PointMover::new(*module);
    let mut idem = Tally::new();
    let mut orth = Tally::new();
    let mut comp = Tally::new();
    let mut traces = vec![Cyclotomic::zero(table.ctx()); r];
    let zero = ic.zero();
    for o in 0..orbits.len() {
        let rows = orbit_rows(u, classes, orbits, o, &mut mover);
        let len = rows.pal.len() as i128;
        // S_π(a) for every palette entry
        let vals: Vec<Vec<IntVec>> = (0..r)
            .map(|p| {
                rows.palette
                    .iter()
                    .map(|cnt| {
                        let mut v = ic.zero();
                        for (c, &k) in cnt.iter().enumerate() {
                            if k != 0 {
                                ic.add_scaled(&mut v, &conj[p][c], k as i128)?;
                            }
                        }
                        Ok(v)
                    })
                    .collect::<Result<_>>()
            })
            .collect::<Result<_>>()?;
        let k = rows.palette.len();
        for p in 0..r {
            let diag = &vals[p][rows.pal[0] as usize];
            let t = ic.to_cyclotomic(diag, 1).scale(&BigRational::new(
                BigInt::from(dims[p] * len),
                BigInt::from(order),
            ));
            traces[p] += &t;
        }
        // completeness: Σ_π m_π S_π(r, z) = |U| δ(z, r)
        for (zl, &a) in rows.pal.iter().enumerate() {
            let mut acc = ic.zero();
            for p in 0..r {
                ic.add_scaled(&mut acc, &vals[p][a as usize], dims[p])?;
            }
            let mut want = ic.zero();
            if zl == 0 {
                want[0] = order;
            }
            comp.record(acc == want, || format!("sum of projectors, orbit {o}, entry {zl}"));
        }
        for p in 0..r {
            for p2 in 0..r {
                let prods: Vec<IntVec> = (0..k * k)
                    .map(|i| ic.mul(&vals[p][i / k], &vals[p2][i % k]))
                    .collect::<Result<_>>()?;
                for (zl, cell) in rows.pairs.iter().enumerate() {
                    let mut acc = ic.zero();
                    for &(a, b, c) in cell {
                        ic.add_scaled(&mut acc, &prods[a as usize * k + b as usize], c as i128)?;
                    }
                    if p == p2 {
                        // m Σ = |U| S(r, z)
                        let lhs: IntVec = acc.iter().map(|&x| x * dims[p]).collect();
                        let mut rhs = ic.zero();
                        ic.add_scaled(&mut rhs, &vals[p][rows.pal[zl] as usize], order)?;
                        idem.record(lhs == rhs, || format!("P_{p}^2 at orbit {o}, entry {zl}"));
                    } else {
                        orth.record(acc == zero, || format!("P_{p} P_{p2} at orbit {o}, entry {zl}"));
                    }
                }
            }
        }
    }
    let mut rank = Tally::new();
    let mut ranks = Vec::with_capacity(r);
    for p in 0..r {
        let want = BigRational::from_integer(BigInt::from(multiplicities[p] * table.dims()[p] as u64));
        let got = traces[p].as_rational();
        rank.record(got.as_ref() == Some(&want), || format!("trace P_{p} = {} but n m = {want}", traces[p]));
        ranks.push(got.unwrap_or_default());
    }
    let note = "entries of the rows at orbit representatives; other rows follow by sigma-equivariance";
    Ok(ProjectorChecks {
        idempotent: idem.finish("projector idempotence", &format!("P_pi^2 = P_pi ({note})"), true),
        orthogonal: orth.finish("projector orthogonality", &format!("P_pi P_pi' = 0 for pi != pi' ({note})"), true),
        complete: comp.finish("projector completeness", &format!("sum_pi P_pi = I ({note})"), true),
        rank: rank.finish("projector rank", "rank P_pi = trace P_pi = n_pi m_pi", true),
        ranks,
    })
}
