//! The unitary group `U(γ, χ)`, its action `σ` on `L²(M)`, and the
//! decomposition of `ρ` restricted to `U × G` into isotypic pieces.

pub mod dixon;
pub mod group;
pub mod hom;
pub(crate) mod intcyc;
pub mod projector;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::matalg::FqMatrix;
use crate::report::{Check, Tally};
use crate::scalars::Cyclotomic;
use crate::slstar::{Census, GeneratorToken, PresentationConfig};
use crate::weildata::{ModuleSpace, WeilDatum};
use crate::weilrep::{compare, ColumnPlan, Monomial, RepCheckConfig, WeilOperator, WeilRep};

pub use dixon::{character_table, CharacterTable, CharacterTableSummary};
pub use group::{ConjugacyClasses, FiniteGroup, UnitaryElement, UnitaryGroup};
pub use hom::{HomSpace, IrrepModel};
pub use projector::{verify_projectors, Orbits, ProjectorChecks};

use group::PointMover;

/// Settings for the decomposition pipeline.
#[derive(Clone, Debug)]
pub struct DecomposeConfig {
    pub census: PresentationConfig,
    /// Work limit (point visits) for exhaustive scans.
    pub exhaustive_budget: u64,
    /// Points tested per candidate when the scan is sampled.
    pub point_samples: usize,
    /// Symmetric parameters tested when the scan is sampled.
    pub gamma_params: usize,
    /// Point pairs tested for `χ` invariance when sampled.
    pub pair_samples: usize,
    /// `|U| · tokens · dim` above which `σ` commutation is checked on a generating pair only.
    pub sigma_budget: u64,
    /// Hom-space maps per irreducible checked for closure under `ρ(w)`. `None` checks
    /// every map when `|M| <= 625` and one per irreducible above that.
    pub hom_closure: Option<usize>,
    /// Skip the projector and Hom checks when `|M|` is larger than this.
    pub max_points: usize,
    pub rep: RepCheckConfig,
    pub seed: u64,
}

impl Default for DecomposeConfig {
    fn default() -> Self {
        DecomposeConfig {
            census: PresentationConfig::default(),
            exhaustive_budget: 100_000_000,
            point_samples: 2048,
            gamma_params: 32,
            pair_samples: 20_000,
            sigma_budget: 400_000_000,
            hom_closure: None,
            max_points: 2401,
            rep: RepCheckConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UnitaryGroupReport {
    pub q: u32,
    pub n: usize,
    pub candidates: u64,
    pub order: usize,
    /// `q(q² - 1) = |SL_2(F_q)|`.
    pub expected_order: u64,
    pub scan_exhaustive: bool,
    pub gamma_invariance: Check,
    pub chi_invariance: Check,
    pub determinant_one: Check,
    pub a_linearity: Check,
    pub closed: Check,
}

impl UnitaryGroupReport {
    pub fn checks(&self) -> Vec<&Check> {
        vec![&self.gamma_invariance, &self.chi_invariance, &self.determinant_one, &self.a_linearity, &self.closed]
    }
}

fn chi_lookup(d: &WeilDatum) -> impl Fn(usize, usize) -> u32 + '_ {
    let table = d.chi_table();
    let dim = d.module().size();
    move |a, b| match &table {
        Some(t) => t[a * dim + b] as u32,
        None => d.chi_exponent_idx(a, b),
    }
}

/// Finds every scalar-block automorphism `β` of `M` preserving `γ(u, ·)`
/// for all `u` and `χ`, by scanning all `2 x 2` matrices.
pub fn unitary_group(d: &WeilDatum, census: &Census, cfg: &DecomposeConfig) -> Result<(UnitaryGroup, UnitaryGroupReport)> {
    let f = d.field();
    let q = f.q();
    let n = d.n();
    let module = *d.module();
    let dim = module.size();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x55);
    let candidates = (q as u64).pow(4);

    let scan_cost = candidates * dim as u64 * census.symmetric.len() as u64;
    let scan_exhaustive = census.symmetric_exhaustive && scan_cost <= cfg.exhaustive_budget;
    let params: Vec<&FqMatrix> = if scan_exhaustive {
        census.symmetric.iter().collect()
    } else {
        census.symmetric.iter().take(cfg.gamma_params).collect()
    };
    let points: Vec<usize> = if scan_exhaustive {
        (0..dim).collect()
    } else {
        (0..cfg.point_samples).map(|_| rng.gen_range(0..dim)).collect()
    };
    let tables: Vec<Vec<u8>> = params.iter().map(|u| d.gamma_table(u)).collect();
    let chi = chi_lookup(d);
    let screen: Vec<(usize, usize)> = (0..64).map(|_| (rng.gen_range(0..dim), rng.gen_range(0..dim))).collect();

    let mut mover = PointMover::new(module);
    let mut found = Vec::new();
    let mut moved = vec![0usize; points.len()];
    let mut t1 = Tally::new();
    for code in 0..candidates {
        let c = code as u32;
        let b = UnitaryElement::new(c % q, (c / q) % q, (c / (q * q)) % q, c / (q * q * q));
        if b.det(f) == 0 {
            continue;
        }
        for (m, &p) in moved.iter_mut().zip(&points) {
            *m = mover.apply(&b, p);
        }
        let gamma_ok = tables.iter().all(|t| points.iter().zip(&moved).all(|(&p, &m)| t[p] == t[m]));
        if !gamma_ok {
            continue;
        }
        if screen.iter().all(|&(x, y)| chi(mover.apply(&b, x), mover.apply(&b, y)) == chi(x, y)) {
            found.push(b);
        }
    }
    // every accepted element, on every tested point and parameter
    for b in &found {
        for (k, t) in tables.iter().enumerate() {
            for &p in &points {
                let m = mover.apply(b, p);
                t1.record(t[p] == t[m], || format!("gamma(u_{k}, beta p) != gamma(u_{k}, p) for {b:?}, point {p}"));
            }
        }
    }

    let u = UnitaryGroup::from_elements(f, n, found.clone());
    let closed = match &u {
        Ok(_) => Check {
            name: "unitary-closed".into(),
            statement: "the accepted set is closed under composition".into(),
            instances: (found.len() * found.len()) as u64,
            exhaustive: true,
            passed: true,
            violation: None,
        },
        Err(e) => Check {
            name: "unitary-closed".into(),
            statement: "the accepted set is closed under composition".into(),
            instances: 0,
            exhaustive: true,
            passed: false,
            violation: Some(e.to_string()),
        },
    };
    let u = u?;

    // χ(βp, βp') = χ(p, p')
    let mut t2 = Tally::new();
    let pair_cost = (u.order() * dim * dim) as u64;
    let chi_exhaustive = dim <= crate::weildata::TABLE_LIMIT && pair_cost <= cfg.exhaustive_budget;
    if chi_exhaustive {
        let table = d.chi_table().expect("small module");
        for b in u.elements() {
            let perm = b.action_perm(&module);
            for x in 0..dim {
                let px = perm[x] as usize;
                for y in 0..dim {
                    let ok = table[px * dim + perm[y] as usize] == table[x * dim + y];
                    t2.record(ok, || format!("chi not preserved by {b:?} at ({x}, {y})"));
                }
            }
        }
    } else {
        for _ in 0..cfg.pair_samples {
            let b = u.element(rng.gen_range(0..u.order()));
            let (x, y) = (rng.gen_range(0..dim), rng.gen_range(0..dim));
            let ok = chi(mover.apply(b, x), mover.apply(b, y)) == chi(x, y);
            t2.record(ok, || format!("chi not preserved by {b:?} at ({x}, {y})"));
        }
    }

    let expected_order = q as u64 * (q as u64 * q as u64 - 1);
    let mut t3 = Tally::new();
    for b in u.elements() {
        t3.record(b.det(f) == 1, || format!("{b:?} has determinant {}", b.det(f)));
    }
    t3.record(u.order() as u64 == expected_order, || {
        format!("found {} elements, expected {expected_order}", u.order())
    });

    let a_linearity = a_linearity_check(f, n)?;

    let report = UnitaryGroupReport {
        q,
        n,
        candidates,
        order: u.order(),
        expected_order,
        scan_exhaustive,
        gamma_invariance: t1.finish(
            "unitary-gamma",
            "gamma(u, beta p) = gamma(u, p) for accepted beta",
            scan_exhaustive,
        ),
        chi_invariance: t2.finish("unitary-chi", "chi(beta p, beta p') = chi(p, p')", chi_exhaustive),
        determinant_one: t3.finish("unitary-det", "every element has determinant 1 and |U| = q(q^2-1)", true),
        a_linearity,
        closed,
    };
    Ok((u, report))
}

/// The automorphisms of `M` commuting with the right action of every
/// matrix unit form a 4-dimensional space of scalar-block matrices.
fn a_linearity_check(f: crate::gfq::FieldCtx, n: usize) -> Result<Check> {
    let m = 2 * n;
    let big = 2 * m;
    let unknowns = big * big;
    let mut rows: Vec<u32> = Vec::new();
    let mut count = 0;
    for i0 in 0..m {
        for j0 in 0..m {
            let mut a = FqMatrix::zeros(f, m, m);
            a.set(i0, j0, 1);
            let z = FqMatrix::zeros(f, m, m);
            let da = FqMatrix::from_blocks(&a, &z, &z, &a);
            // (D β - β D)_{ij} = Σ_k D_ik β_kj - β_ik D_kj
            for i in 0..big {
                for j in 0..big {
                    let mut row = vec![0u32; unknowns];
                    for k in 0..big {
                        let dik = da.get(i, k);
                        if dik != 0 {
                            row[k * big + j] = f.add(row[k * big + j], dik);
                        }
                        let dkj = da.get(k, j);
                        if dkj != 0 {
                            row[i * big + k] = f.sub(row[i * big + k], dkj);
                        }
                    }
                    rows.extend(row);
                    count += 1;
                }
            }
        }
    }
    let sys = FqMatrix::from_residues(f, count, unknowns, rows);
    let basis = sys.nullspace();
    let mut t = Tally::new();
    t.record(basis.len() == 4, || format!("solution space has dimension {}", basis.len()));
    for v in &basis {
        let b = FqMatrix::from_residues(f, big, big, v.clone());
        let scalar_blocks = b.blocks().iter().all(|blk| {
            let c = blk.get(0, 0);
            *blk == FqMatrix::scalar(f, m, c as i64)
        });
        t.record(scalar_blocks, || format!("solution {v:?} is not scalar-block"));
    }
    Ok(t.finish(
        "unitary-a-linear",
        "A-linear endomorphisms of M are exactly the scalar-block matrices (dimension 4)",
        true,
    ))
}

/// `σ_β f(x) = f(β^{-1} x)`.
pub fn sigma_operator(rep: &WeilRep, u: &UnitaryGroup, i: usize) -> Result<WeilOperator> {
    let f = u.field();
    let inv = u.element(i).inverse(f).ok_or_else(|| Error::CheckFailed("singular unitary element".into()))?;
    let perm = inv.action_perm(rep.datum().module());
    let m = Monomial::new(f.q(), perm, vec![0; rep.dim()])?;
    Ok(WeilOperator::monomial(rep.space(), m))
}

/// Checks `σ_a σ_b = σ_{ab}` and `σ_β ρ(g) = ρ(g) σ_β` for every generator token.
pub fn verify_sigma(rep: &WeilRep, u: &UnitaryGroup, census: &Census, cfg: &DecomposeConfig) -> Result<(Check, Check)> {
    let g = u.group();
    let ops: Vec<WeilOperator> = (0..u.order()).map(|i| sigma_operator(rep, u, i)).collect::<Result<_>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5167);
    let dim = rep.dim() as u64;
    let order = u.order() as u64;

    let mut th = Tally::new();
    let hom_exhaustive = order * order * dim <= cfg.sigma_budget;
    let pairs: Vec<(usize, usize)> = if hom_exhaustive {
        (0..u.order()).flat_map(|a| (0..u.order()).map(move |b| (a, b))).collect()
    } else {
        (0..cfg.rep.product_pairs).map(|_| (rng.gen_range(0..u.order()), rng.gen_range(0..u.order()))).collect()
    };
    for (a, b) in pairs {
        let c = compare(&ops[a].then(&ops[b]), &ops[g.mul(a, b)], &ColumnPlan::All)?;
        th.record(c.equal, || format!("sigma_{a} sigma_{b} != sigma_({a}{b})"));
    }

    let toks: Vec<GeneratorToken> = census
        .units
        .iter()
        .map(|a| GeneratorToken::H(a.clone()))
        .chain(census.symmetric.iter().map(|s| GeneratorToken::U(s.clone())))
        .chain(std::iter::once(GeneratorToken::W))
        .collect();
    let plan = cfg.rep.plan(rep.dim(), &mut rng);
    let cols = match &plan {
        ColumnPlan::All => dim,
        ColumnPlan::Sample(c) => c.len() as u64,
    };
    // monomial tokens cost dim per comparison, w costs dim x cols
    let monomials = toks.len() as u64 - 1;
    let all_mono = order * monomials * dim <= cfg.sigma_budget;
    let all_w = order * dim * cols <= cfg.sigma_budget;
    let pair = g.generating_pair();
    let everyone: Vec<usize> = (0..u.order()).collect();
    let mut tc = Tally::new();
    let mut exhaustive = plan.is_all() && census.units_exhaustive && census.symmetric_exhaustive;
    for tok in &toks {
        let r = rep.generator(tok)?;
        let all = if matches!(tok, GeneratorToken::W) { all_w } else { all_mono };
        for &b in if all { &everyone } else { &pair } {
            let c = compare(&ops[b].then(&r), &r.then(&ops[b]), &plan)?;
            exhaustive &= c.exhaustive;
            tc.record(c.equal, || format!("sigma_{b} does not commute with rho({tok})"));
        }
    }
    let scope = |all: bool| if all { "every beta" } else { "a generating pair of U" };
    let statement = format!(
        "sigma_beta rho(g) = rho(g) sigma_beta: h and u tokens for {}, w for {}",
        scope(all_mono),
        scope(all_w)
    );
    Ok((
        th.finish("sigma-homomorphism", "sigma_a sigma_b = sigma_ab", hom_exhaustive),
        tc.finish(
            "sigma-commutes",
            &statement,
            exhaustive,
        ),
    ))
}

/// `#{p : β p = p}` for the class representatives, in closed form and by counting.
#[derive(Clone, Debug, Serialize)]
pub struct PermutationCharacter {
    pub values: Vec<u64>,
    pub check: Check,
}

pub fn permutation_character(u: &UnitaryGroup, classes: &ConjugacyClasses, module: &ModuleSpace) -> PermutationCharacter {
    let f = u.field();
    let q = f.q() as u64;
    let n = u.n() as u32;
    let mut mover = PointMover::new(*module);
    let mut t = Tally::new();
    let values = classes
        .reps
        .iter()
        .map(|&r| {
            let b = u.element(r);
            let g = b.sl2_matrix(f).sub(&FqMatrix::identity(f, 2));
            let kernel = 2 - g.rank() as u32;
            let closed = q.pow(2 * n * kernel);
            let counted = (0..module.size()).filter(|&p| mover.apply(b, p) == p).count() as u64;
            t.record(counted == closed, || format!("{b:?} fixes {counted} points, formula gives {closed}"));
            closed
        })
        .collect();
    PermutationCharacter {
        values,
        check: t.finish("fixed-points", "#fix(beta) = q^(2n dim ker(beta - 1))", true),
    }
}

/// `n_π = <perm char, χ_π>`, each required to be a nonnegative integer.
pub fn multiplicities(table: &CharacterTable, perm: &[u64]) -> Result<Vec<u64>> {
    let ctx = table.ctx();
    let pc: Vec<Cyclotomic> = perm.iter().map(|&v| Cyclotomic::from_integer(ctx, v as i64)).collect();
    (0..table.len())
        .map(|p| {
            let v = table.inner(&pc, table.row(p));
            let r = v.as_rational().ok_or_else(|| Error::CheckFailed(format!("n_{p} = {v} is not rational")))?;
            if !r.is_integer() || r < BigRational::zero() {
                return Err(Error::CheckFailed(format!("n_{p} = {r} is not a nonnegative integer")));
            }
            r.to_integer().to_u64().ok_or(Error::Overflow)
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct Component {
    pub index: usize,
    /// `m_π`.
    pub dim: usize,
    /// `n_π`, the dimension of `Hom_U(π, ρ)`.
    pub multiplicity: u64,
    pub projector_rank: Option<String>,
    pub hom_dim: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub q: u32,
    pub n: usize,
    pub lambda: u32,
    pub dim: usize,
    pub unitary: UnitaryGroupReport,
    pub character_table: CharacterTableSummary,
    pub table_checks: Vec<Check>,
    pub permutation_character: PermutationCharacter,
    pub orbits: Option<usize>,
    pub components: Vec<Component>,
    pub sum_check: Check,
    pub sigma: Vec<Check>,
    pub projectors: Vec<Check>,
    pub hom: Vec<Check>,
}

impl DecompositionReport {
    pub fn all_checks(&self) -> Vec<&Check> {
        let mut v = self.unitary.checks();
        v.extend(&self.table_checks);
        v.push(&self.permutation_character.check);
        v.push(&self.sum_check);
        v.extend(&self.sigma);
        v.extend(&self.projectors);
        v.extend(&self.hom);
        v
    }

    pub fn all_passed(&self) -> bool {
        self.all_checks().iter().all(|c| c.passed)
    }
}

/// Everything computed along the way, for callers that need more than the report.
pub struct Decomposition {
    pub unitary: UnitaryGroup,
    pub classes: ConjugacyClasses,
    pub table: CharacterTable,
    pub orbits: Option<Orbits>,
    pub multiplicities: Vec<u64>,
    pub report: DecompositionReport,
}

/// Runs the whole pipeline for `ρ` on `L²(M)`.
pub fn decompose(rep: &WeilRep, cfg: &DecomposeConfig) -> Result<Decomposition> {
    let d = rep.datum();
    let q = d.field().q();
    let census = Census::build(d.group(), &cfg.census)?;
    let (u, ureport) = unitary_group(d, &census, cfg)?;
    let classes = u.group().conjugacy_classes();
    let table = character_table(u.group(), &classes, q as usize)?;
    let table_checks = table.verify();
    let module = *d.module();
    let perm = permutation_character(&u, &classes, &module);
    let mults = multiplicities(&table, &perm.values)?;

    let total: u64 = mults.iter().zip(table.dims()).map(|(&n, &m)| n * m as u64).sum();
    let mut ts = Tally::new();
    ts.record(total == module.size() as u64, || format!("sum n m = {total}, |M| = {}", module.size()));
    let sum_check = ts.finish("multiplicity-sum", "sum_pi n_pi m_pi = q^(4n)", true);

    let (sh, sc) = verify_sigma(rep, &u, &census, cfg)?;
    let mut components: Vec<Component> = (0..table.len())
        .map(|p| Component { index: p, dim: table.dims()[p], multiplicity: mults[p], projector_rank: None, hom_dim: None })
        .collect();

    let (orbits, projectors, hom_checks) = if module.size() <= cfg.max_points {
        let orbits = Orbits::compute(&u, &module);
        let pc = verify_projectors(&u, &classes, &table, &orbits, &module, &mults)?;
        for (c, r) in components.iter_mut().zip(&pc.ranks) {
            c.projector_rank = Some(r.to_string());
        }
        let projectors = vec![
            pc.idempotent,
            pc.orthogonal,
            pc.complete,
            pc.rank,
            Check {
                name: "projector-commutes".into(),
                statement: "P_pi lies in the span of sigma(U), so it commutes with rho(G)".into(),
                instances: sc.instances,
                exhaustive: sc.exhaustive,
                passed: sc.passed && sh.passed,
                violation: sc.violation.clone().or_else(|| sh.violation.clone()),
            },
        ];
        let (dims, hom_checks) = hom::verify_hom_spaces(rep, &u, &classes, &table, &orbits, &mults, &perm.values, cfg)?;
        for (c, hd) in components.iter_mut().zip(dims) {
            c.hom_dim = Some(hd);
        }
        (Some(orbits), projectors, hom_checks)
    } else {
        let reason = format!("|M| = {} exceeds max_points = {}", module.size(), cfg.max_points);
        (
            None,
            vec![Check::skipped("projectors", "P_pi idempotent, orthogonal, complete", &reason)],
            vec![Check::skipped("hom-spaces", "dim Hom_U(pi, rho) = n_pi", &reason)],
        )
    };

    let report = DecompositionReport {
        q,
        n: d.n(),
        lambda: d.lambda(),
        dim: rep.dim(),
        unitary: ureport,
        character_table: CharacterTableSummary::from(&table),
        table_checks,
        permutation_character: perm,
        orbits: orbits.as_ref().map(|o| o.len()),
        components,
        sum_check,
        sigma: vec![sh, sc],
        projectors,
        hom: hom_checks,
    };
    Ok(Decomposition { unitary: u, classes, table, orbits, multiplicities: mults, report })
}
