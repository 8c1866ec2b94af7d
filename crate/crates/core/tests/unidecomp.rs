use std::collections::HashSet;
use std::sync::OnceLock;

use proptest::prelude::*;
use weil_core::slstar::{Census, PresentationConfig};
use weil_core::unidecomp::{
    character_table, decompose, dixon::dixon_primes, permutation_character, sigma_operator, unitary_group,
    Decomposition, DecomposeConfig, UnitaryElement,
};
use weil_core::weildata::WeilDatum;
use weil_core::weilrep::{compare, ColumnPlan, WeilOperator, WeilRep};
use weil_core::{field_ctx, FieldCtx};

fn rep(q: u32) -> WeilRep {
    WeilRep::new(WeilDatum::standard(q, 1, 1).unwrap()).unwrap()
}

fn sampled_census() -> PresentationConfig {
    PresentationConfig { exhaustive_limit: 100, samples: 30, seed: 3 }
}

fn run5() -> &'static (WeilRep, Decomposition) {
    static CELL: OnceLock<(WeilRep, Decomposition)> = OnceLock::new();
    CELL.get_or_init(|| {
        let r = rep(5);
        let d = decompose(&r, &DecomposeConfig::default()).unwrap();
        (r, d)
    })
}

/// Every `2 x 2` matrix of determinant one, as `(a, b, c, d)` rows.
fn sl2_oracle(q: u32) -> Vec<[u32; 4]> {
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    if (a * d + q * q - b * c) % q == 1 {
                        out.push([a, b, c, d]);
                    }
                }
            }
        }
    }
    out
}

fn mat_mul(q: u32, x: [u32; 4], y: [u32; 4]) -> [u32; 4] {
    [
        (x[0] * y[0] + x[1] * y[2]) % q,
        (x[0] * y[1] + x[1] * y[3]) % q,
        (x[2] * y[0] + x[3] * y[2]) % q,
        (x[2] * y[1] + x[3] * y[3]) % q,
    ]
}

/// Conjugacy classes of `SL_2(F_q)` by direct conjugation.
fn class_count_oracle(q: u32) -> usize {
    let g = sl2_oracle(q);
    let inv = |m: [u32; 4]| [m[3], (q - m[1]) % q, (q - m[2]) % q, m[0]];
    let mut seen = HashSet::new();
    let mut classes = 0;
    for &x in &g {
        if seen.contains(&x) {
            continue;
        }
        classes += 1;
        for &h in &g {
            seen.insert(mat_mul(q, mat_mul(q, h, x), inv(h)));
        }
    }
    classes
}

#[test]
fn unitary_group_is_sl2_at_q5() {
    let (_, d) = run5();
    let u = &d.unitary;
    assert_eq!(u.order(), sl2_oracle(5).len());
    assert_eq!(u.order(), 120);
    let f = field_ctx(5).unwrap();
    assert!(u.index_of(&UnitaryElement::identity()).is_some());
    let minus = UnitaryElement::new(4, 0, 0, 4);
    assert_eq!(minus.det(f), 1);
    assert!(u.index_of(&minus).is_some());
    for b in u.elements() {
        let m = b.sl2_matrix(f);
        assert!(sl2_oracle(5).contains(&[m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1)]));
    }
    for c in d.report.unitary.checks() {
        assert!(c.passed, "{c:?}");
    }
    assert!(d.report.unitary.scan_exhaustive);
}

#[test]
fn unitary_group_rejects_everything_else() {
    let r = rep(5);
    let census = Census::build(r.datum().group(), &PresentationConfig::default()).unwrap();
    let (u, report) = unitary_group(r.datum(), &census, &DecomposeConfig::default()).unwrap();
    assert_eq!(report.candidates, 625);
    let f = field_ctx(5).unwrap();
    let scaled = UnitaryElement::new(2, 0, 0, 2);
    assert_ne!(scaled.det(f), 1);
    assert!(u.index_of(&scaled).is_none());
    assert!(report.a_linearity.passed && report.a_linearity.instances == 5);
}

#[test]
fn classes_and_character_table_at_q5() {
    let (_, d) = run5();
    assert_eq!(d.classes.len(), class_count_oracle(5));
    assert_eq!(d.classes.len(), 9);
    assert_eq!(d.classes.sizes()[0], 1);
    for s in d.classes.sizes() {
        assert_eq!(120 % s, 0);
    }
    assert_eq!(d.classes.sizes().iter().sum::<usize>(), 120);
    let t = &d.table;
    let mut dims = t.dims().to_vec();
    dims.sort_unstable();
    assert_eq!(dims, vec![1, 2, 2, 3, 3, 4, 4, 5, 6]);
    assert_eq!(dims.iter().map(|m| m * m).sum::<usize>(), 120);
    assert!(t.row(0).iter().all(|c| c.is_one()));
    // smallest prime ≡ 1 mod 60 by trial division
    let oracle = (1..).map(|k| 60 * k + 1).find(|&l: &u64| (2..l).all(|d| l % d != 0)).unwrap();
    assert_eq!(oracle, 61);
    assert_eq!(t.exponent(), 60);
    assert_eq!(t.ell(), oracle);
    assert_eq!(dixon_primes(60, 120).next(), Some(61));
    for c in &d.report.table_checks {
        assert!(c.passed, "{c:?}");
    }
}

#[test]
fn character_table_q7() {
    let r = rep(7);
    let census = Census::build(r.datum().group(), &sampled_census()).unwrap();
    let (u, _) = unitary_group(r.datum(), &census, &DecomposeConfig::default()).unwrap();
    assert_eq!(u.order(), 336);
    let classes = u.group().conjugacy_classes();
    assert_eq!(classes.len(), class_count_oracle(7));
    let t = character_table(u.group(), &classes, 7).unwrap();
    assert_eq!(t.dims().iter().map(|m| m * m).sum::<usize>(), 336);
    assert!(t.verify().iter().all(|c| c.passed));
}

#[test]
fn permutation_character_values() {
    let (r, d) = run5();
    let module = *r.datum().module();
    let pc = permutation_character(&d.unitary, &d.classes, &module);
    assert!(pc.check.passed);
    assert_eq!(pc.values[0], 625);
    let minus = d.unitary.index_of(&UnitaryElement::new(4, 0, 0, 4)).unwrap();
    assert_eq!(pc.values[d.classes.class_of[minus]], 1);
}

#[test]
fn decomposition_q5() {
    let (_, d) = run5();
    let total: u64 = d.multiplicities.iter().zip(d.table.dims()).map(|(&n, &m)| n * m as u64).sum();
    assert_eq!(total, 625);
    for c in d.report.all_checks() {
        assert!(c.passed, "{c:?}");
    }
    for c in &d.report.components {
        assert_eq!(c.hom_dim, Some(c.multiplicity as usize));
        assert_eq!(c.projector_rank, Some((c.multiplicity * c.dim as u64).to_string()));
    }
    let sigma = &d.report.sigma[1];
    assert!(sigma.exhaustive && sigma.statement.contains("w for every beta"));
}

/// Orbits of `SL_2` on `F_q^4 = (x, y)` counted with union-find on raw coordinates.
fn orbit_count_oracle(q: u32) -> usize {
    let size = (q as usize).pow(4);
    let mut parent: Vec<usize> = (0..size).collect();
    fn find(p: &mut Vec<usize>, mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    let gens = [[1, 1, 0, 1], [0, q - 1, 1, 0]];
    for idx in 0..size {
        let c: Vec<u32> = (0..4).map(|i| (idx / (q as usize).pow(i)) as u32 % q).collect();
        for g in gens {
            // (x, y) ↦ (g11 x + g12 y, g21 x + g22 y), coordinatewise
            let img: Vec<u32> = (0..2)
                .flat_map(|j| {
                    let (x, y) = (c[j], c[2 + j]);
                    [(g[0] * x + g[1] * y) % q, (g[2] * x + g[3] * y) % q]
                })
                .collect();
            let out = [img[0], img[2], img[1], img[3]];
            let j = out.iter().enumerate().map(|(i, &v)| v as usize * (q as usize).pow(i as u32)).sum();
            let (a, b) = (find(&mut parent, idx), find(&mut parent, j));
            parent[a] = b;
        }
    }
    (0..size).filter(|&i| find(&mut parent, i) == i).count()
}

#[test]
fn trivial_hom_space_counts_orbits() {
    let (_, d) = run5();
    let oracle = orbit_count_oracle(5);
    assert_eq!(oracle, 11);
    assert_eq!(d.orbits.as_ref().unwrap().len(), oracle);
    assert_eq!(d.report.components[0].hom_dim, Some(oracle));
    assert_eq!(d.multiplicities[0], oracle as u64);
}

#[test]
fn sigma_identity_and_action() {
    let (r, d) = run5();
    let id = d.unitary.index_of(&UnitaryElement::identity()).unwrap();
    let s = sigma_operator(r, &d.unitary, id).unwrap();
    assert!(compare(&s, &WeilOperator::identity(r.space()), &ColumnPlan::All).unwrap().equal);
}

#[test]
fn decomposition_q7() {
    let r = rep(7);
    let cfg = DecomposeConfig { census: sampled_census(), ..DecomposeConfig::default() };
    let d = decompose(&r, &cfg).unwrap();
    let total: u64 = d.multiplicities.iter().zip(d.table.dims()).map(|(&n, &m)| n * m as u64).sum();
    assert_eq!(total, 2401);
    for c in d.report.all_checks() {
        assert!(c.passed, "{c:?}");
    }
    for c in &d.report.components {
        assert_eq!(c.hom_dim, Some(c.multiplicity as usize));
    }
    assert_eq!(d.orbits.as_ref().unwrap().len(), orbit_count_oracle(7));
}

fn sl2_strategy(q: u32) -> impl Strategy<Value = UnitaryElement> {
    (0..q, 0..q, 0..q, 0..q).prop_filter_map("det 1", move |(a, b, c, d)| {
        let e = UnitaryElement::new(a, b, c, d);
        (e.det(FieldCtx::new(q).unwrap()) == 1).then_some(e)
    })
}

proptest! {
    #[test]
    fn composition_matches_point_action(a in sl2_strategy(5), b in sl2_strategy(5), idx in 0usize..625) {
        let f = field_ctx(5).unwrap();
        let module = *rep(5).datum().module();
        let p = module.point(idx);
        let ab = a.compose(&b, f);
        prop_assert_eq!(ab.apply(f, &p), a.apply(f, &b.apply(f, &p)));
        let inv = a.inverse(f).unwrap();
        prop_assert_eq!(a.compose(&inv, f), UnitaryElement::identity());
    }

    #[test]
    fn sigma_is_a_homomorphism(i in 0usize..120, j in 0usize..120) {
        let (r, d) = run5();
        let u = &d.unitary;
        let lhs = sigma_operator(r, u, i).unwrap().then(&sigma_operator(r, u, j).unwrap());
        let rhs = sigma_operator(r, u, u.group().mul(i, j)).unwrap();
        prop_assert!(compare(&lhs, &rhs, &ColumnPlan::All).unwrap().equal);
    }
}
