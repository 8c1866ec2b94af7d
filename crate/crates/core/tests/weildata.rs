use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use weil_core::matalg::{vec_mul, FqMatrix};
use weil_core::weildata::{
    check_chi_bi_additive, classify_quadratic_form, gauss_sum, verify_data_conditions, witt_index,
    DatumCheckConfig, ModulePoint, WeilDatum,
};
use weil_core::{Cyclotomic, FieldCtx};

fn pt(x: &[u32], y: &[u32]) -> ModulePoint {
    ModulePoint { x: x.to_vec(), y: y.to_vec() }
}

/// `[x, y] = Σ x_i (yJ)_i` written out for `J = [[0, I],[-I, 0]]`.
fn bracket_oracle(q: u32, x: &[u32], y: &[u32]) -> u32 {
    let n = x.len() / 2;
    let mut s: i64 = 0;
    for i in 0..n {
        // (yJ)_i = -y_{n+i}, (yJ)_{n+i} = y_i
        s -= x[i] as i64 * y[n + i] as i64;
        s += x[n + i] as i64 * y[i] as i64;
    }
    s.rem_euclid(q as i64) as u32
}

#[test]
fn chi_examples() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let ctx = d.values_ctx().clone();
    let zero = pt(&[0, 0], &[0, 0]);
    let e1 = pt(&[1, 0], &[0, 0]);
    let e2y = pt(&[0, 0], &[0, 1]);
    assert!(d.chi(&e1, &zero).is_one());
    assert_eq!(d.chi(&e1, &e2y), Cyclotomic::zeta_pow(&ctx, 4));
    assert_eq!(d.bracket(&[1, 0], &[0, 1]), 4);
}

#[test]
fn chi_matches_oracle_and_is_symmetric() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let m = d.module();
    let table = d.chi_table().unwrap();
    for a in (0..m.size()).step_by(7) {
        for b in (0..m.size()).step_by(3) {
            let (p, r) = (m.point(a), m.point(b));
            let v = (bracket_oracle(5, &p.x, &r.y) + 5 - bracket_oracle(5, &p.y, &r.x)) % 5;
            assert_eq!(d.chi_exponent(&p, &r), v);
            assert_eq!(table[a * m.size() + b] as u32, v);
            assert_eq!(d.chi_exponent(&r, &p), v, "eps = -1 makes chi symmetric");
        }
    }
}

#[test]
fn gamma_examples() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let f = d.field();
    let ctx = d.values_ctx().clone();
    let i = FqMatrix::identity(f, 2);
    assert_eq!(d.gamma(&i, &pt(&[1, 0], &[0, 1])).unwrap(), Cyclotomic::zeta_pow(&ctx, 4));
    let z = FqMatrix::zeros(f, 2, 2);
    for idx in 0..d.module().size() {
        assert!(d.gamma(&z, &d.module().point(idx)).unwrap().is_one());
    }
    let not_fixed = FqMatrix::from_rows(f, &[&[1, 1], &[0, 1]]).unwrap();
    assert!(d.gamma(&not_fixed, &pt(&[1, 0], &[0, 1])).is_err());
}

#[test]
fn module_indexing_round_trips() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let m = d.module();
    assert_eq!(m.size(), 625);
    for i in 0..m.size() {
        assert_eq!(m.index(&m.point(i)), i);
    }
    assert_eq!(m.index(&pt(&[0, 0], &[0, 1])), 1);
    assert_eq!(m.index(&pt(&[1, 0], &[0, 0])), 125);
    let a = FqMatrix::from_rows(d.field(), &[&[1, 2], &[3, 1]]).unwrap();
    let perm = m.right_action_perm(&a);
    for i in (0..m.size()).step_by(11) {
        let p = m.point(i);
        let img = pt(&vec_mul(d.field(), &p.x, &a), &vec_mul(d.field(), &p.y, &a));
        assert_eq!(perm[i] as usize, m.index(&img));
    }
}

#[test]
fn all_conditions_exhaustive_q5() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let r = verify_data_conditions(&d, &DatumCheckConfig::default()).unwrap();
    assert_eq!(r.conditions.len(), 7);
    for c in &r.conditions {
        assert!(c.passed, "{c:?}");
        assert!(c.exhaustive, "{} not exhaustive", c.name);
    }
    assert_eq!(r.gauss_sums.len(), 4);
    assert!(r.gauss_sums.iter().all(|g| g.value == "25"));
    assert_eq!(r.c, "1/25");
}

#[test]
fn conditions_hold_for_twisted_character() {
    let d = WeilDatum::standard(5, 1, 3).unwrap();
    let r = verify_data_conditions(&d, &DatumCheckConfig::default()).unwrap();
    assert!(r.all_passed(), "{:?}", r.conditions);
}

#[test]
fn conditions_sampled_n2() {
    let d = WeilDatum::standard(5, 2, 1).unwrap();
    let cfg = DatumCheckConfig { samples: 2000, gauss_samples: 2, ..Default::default() };
    let r = verify_data_conditions(&d, &cfg).unwrap();
    assert!(r.all_passed(), "{:?}", r.conditions);
    assert!(r.gauss_sums.iter().all(|g| g.value == "625"));
}

#[test]
fn chi_bi_additive_q5() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let c = check_chi_bi_additive(&d, &DatumCheckConfig::default());
    assert!(c.passed && c.exhaustive);
    assert_eq!(c.instances, 625u64.pow(3));
}

#[test]
fn gauss_sums() {
    let d5 = WeilDatum::standard(5, 1, 1).unwrap();
    let f5 = d5.field();
    let g = gauss_sum(&d5, &FqMatrix::identity(f5, 2)).unwrap();
    assert_eq!(g, BigRational::from_integer(BigInt::from(25)));
    let g2 = gauss_sum(&d5, &FqMatrix::scalar(f5, 2, 2)).unwrap();
    assert_eq!(g2, BigRational::from_integer(BigInt::from(25)));
    assert!(gauss_sum(&d5, &FqMatrix::zeros(f5, 2, 2)).is_err());

    let d7 = WeilDatum::standard(7, 1, 1).unwrap();
    let g7 = gauss_sum(&d7, &FqMatrix::identity(d7.field(), 2)).unwrap();
    assert_eq!(g7, BigRational::from_integer(BigInt::from(49)));
}

/// Split and nonsplit zero counts in dimension `2m`.
fn zero_count_oracle(q: u64, m: u32, split: bool) -> u64 {
    let base = q.pow(2 * m - 1);
    let delta = q.pow(m) - q.pow(m - 1);
    if split {
        base + delta
    } else {
        base - delta
    }
}

#[test]
fn quadratic_forms_q5() {
    let d = WeilDatum::standard(5, 1, 1).unwrap();
    let f = d.field();
    assert_eq!(zero_count_oracle(5, 2, true), 145);
    let mut counts = Vec::new();
    for a in 1..5 {
        let r = classify_quadratic_form(&d, &FqMatrix::scalar(f, 2, a)).unwrap();
        assert!(r.nondegenerate && r.split && r.zero_count_exhaustive);
        assert_eq!(r.rank, 4);
        assert_eq!(r.witt_index, 2);
        counts.push(r.zero_count);
    }
    assert!(counts.iter().all(|&c| c == 145));

    let r = classify_quadratic_form(&d, &FqMatrix::identity(f, 2)).unwrap();
    let sm = d.standard_matrices();
    let z = FqMatrix::zeros(f, 2, 2);
    assert_eq!(r.gram, FqMatrix::from_blocks(&z, &sm.j.neg(), &sm.j, &z));
}

#[test]
fn quadratic_form_gram_at_identity_n2() {
    let d = WeilDatum::standard(5, 2, 1).unwrap();
    let f = d.field();
    let r = classify_quadratic_form(&d, &FqMatrix::identity(f, 4)).unwrap();
    let sm = d.standard_matrices();
    let z = FqMatrix::zeros(f, 4, 4);
    assert_eq!(r.gram, FqMatrix::from_blocks(&z, &sm.j.neg(), &sm.j, &z));
    assert!(r.split && r.witt_index == 4);
    assert_eq!(r.zero_count, zero_count_oracle(5, 4, true));
}

#[test]
fn witt_index_of_anisotropic_plane() {
    // x² - 2y² over F_5: 2 is a non-square, so the plane is anisotropic.
    let f = FieldCtx::new(5).unwrap();
    let g = FqMatrix::from_rows(f, &[&[2, 0], &[0, -4]]).unwrap();
    assert_eq!(witt_index(&g), 0);
    let h = FqMatrix::from_rows(f, &[&[0, 1], &[1, 0]]).unwrap();
    assert_eq!(witt_index(&h), 1);
    // hyperbolic plane plus an anisotropic plane
    let mut m = FqMatrix::zeros(f, 4, 4);
    m.set(0, 1, 1);
    m.set(1, 0, 1);
    m.set(2, 2, 2);
    m.set(3, 3, 1);
    assert_eq!(witt_index(&m), 1);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn twist_law_on_gamma(a in 0u32..4, b in 0u32..4, c in 0u32..4, e in 0u32..4, idx in 0usize..625) {
        let d = WeilDatum::standard(5, 1, 1).unwrap();
        let f = d.field();
        let r = FqMatrix::from_residues(f, 2, 2, vec![a + 1, b, c, e + 1]);
        prop_assume!(r.is_invertible());
        let u = FqMatrix::scalar(f, 2, 3);
        let p = d.module().point(idx);
        let conj = r.mul(&u).mul(&d.group().star(&r).unwrap());
        prop_assert_eq!(d.gamma_exponent(&u, &p.act(f, &r)), d.gamma_exponent(&conj, &p));
    }

    #[test]
    fn chi_bracket_is_antisymmetric(x in proptest::collection::vec(0u32..7, 4), y in proptest::collection::vec(0u32..7, 4)) {
        let d = WeilDatum::standard(7, 2, 1).unwrap();
        let a = d.bracket(&x, &y);
        let b = d.bracket(&y, &x);
        prop_assert_eq!((a + b) % 7, 0);
        prop_assert_eq!(a, bracket_oracle(7, &x, &y));
    }
}
