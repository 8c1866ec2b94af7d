use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use weil_core::scalars::{cyclotomic_polynomial, Cyclotomic, CyclotomicCtx, ZetaSum};
use weil_core::zeta_pow;

fn rat(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

#[test]
fn zeta_pow_examples() {
    let ctx = CyclotomicCtx::new(5).unwrap();
    assert!(zeta_pow(&ctx, 0).is_one());
    assert!(zeta_pow(&ctx, 5).is_one());
    assert!(zeta_pow(&ctx, -10).is_one());
    // ζ^4 = -1 - ζ - ζ^2 - ζ^3 modulo 1 + x + x^2 + x^3 + x^4.
    let z4 = zeta_pow(&ctx, 4);
    assert_eq!(z4.coefficients(), vec![rat(-1, 1), rat(-1, 1), rat(-1, 1), rat(-1, 1)]);
}

#[test]
fn reduction_is_idempotent() {
    for n in [1usize, 2, 5, 7, 12, 60, 168] {
        let ctx = CyclotomicCtx::new(n).unwrap();
        assert_eq!(ctx.basis_dim(), cyclotomic_polynomial(n).len() - 1);
        for k in 0..2 * n as i64 {
            let z = zeta_pow(&ctx, k);
            let coeffs = z.coefficients();
            let again = Cyclotomic::from_coefficients(&ctx, &coeffs).unwrap();
            assert_eq!(z, again);
        }
        assert!(zeta_pow(&ctx, n as i64).is_one());
    }
}

#[test]
fn conjugate_examples() {
    let ctx = CyclotomicCtx::new(5).unwrap();
    assert!(Cyclotomic::one(&ctx).conjugate().is_one());
    assert_eq!(zeta_pow(&ctx, 1).conjugate(), zeta_pow(&ctx, 4));
    let real = &zeta_pow(&ctx, 1) + &zeta_pow(&ctx, 4);
    assert_eq!(real.conjugate(), real);
}

#[test]
fn to_complex_examples() {
    let c5 = CyclotomicCtx::new(5).unwrap();
    let (re, im) = Cyclotomic::one(&c5).to_complex();
    assert_eq!((re, im), (1.0, 0.0));
    let c4 = CyclotomicCtx::new(4).unwrap();
    let (re, im) = zeta_pow(&c4, 1).to_complex();
    assert!(re.abs() < 1e-12 && (im - 1.0).abs() < 1e-12);
    let mut s = Cyclotomic::zero(&c5);
    for k in 0..5 {
        s += &zeta_pow(&c5, k);
    }
    assert!(s.is_zero());
    let (re, im) = s.to_complex();
    assert!(re.abs() < 1e-12 && im.abs() < 1e-12);
    for k in 0..5 {
        let (re, im) = zeta_pow(&c5, k).to_complex();
        assert!(((re * re + im * im).sqrt() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn root_of_unity_orthogonality() {
    for n in [5usize, 7, 12, 60] {
        let ctx = CyclotomicCtx::new(n).unwrap();
        for k in 0..=2 * n as i64 {
            let mut s = Cyclotomic::zero(&ctx);
            for j in 0..n as i64 {
                s += &zeta_pow(&ctx, j * k);
            }
            let expected = if k % n as i64 == 0 { n as i64 } else { 0 };
            assert_eq!(s, Cyclotomic::from_integer(&ctx, expected), "N={n} k={k}");
        }
    }
}

#[test]
fn zeta_sum_matches_direct_sum() {
    let ctx = CyclotomicCtx::new(7).unwrap();
    let mut acc = ZetaSum::new(7);
    let mut direct = Cyclotomic::zero(&ctx);
    for (k, m) in [(0u64, 3i64), (2, -1), (9, 4), (6, 2)] {
        acc.add(k, m);
        direct += &zeta_pow(&ctx, k as i64).scale_int(&BigInt::from(m));
    }
    let half = rat(1, 2);
    assert_eq!(acc.to_cyclotomic(&ctx, &half).unwrap(), direct.scale(&half));
}

#[test]
fn embedding_preserves_values() {
    let c5 = CyclotomicCtx::new(5).unwrap();
    let c60 = CyclotomicCtx::new(60).unwrap();
    let a = &zeta_pow(&c5, 2) + &Cyclotomic::from_rational(&c5, &rat(3, 4));
    let e = a.embed(&c60).unwrap();
    assert_eq!(e, &zeta_pow(&c60, 24) + &Cyclotomic::from_rational(&c60, &rat(3, 4)));
    let (x, y) = a.to_complex();
    let (u, v) = e.to_complex();
    assert!((x - u).abs() < 1e-12 && (y - v).abs() < 1e-12);
}

fn element(ctx: &std::sync::Arc<CyclotomicCtx>) -> impl Strategy<Value = Cyclotomic> {
    let ctx = ctx.clone();
    let phi = ctx.basis_dim();
    (prop::collection::vec(-20i64..20, phi), 1i64..6).prop_map(move |(nums, den)| {
        let coeffs: Vec<BigRational> = nums.iter().map(|&v| rat(v, den)).collect();
        Cyclotomic::from_coefficients(&ctx, &coeffs).unwrap()
    })
}

fn ctx12() -> std::sync::Arc<CyclotomicCtx> {
    CyclotomicCtx::new(12).unwrap()
}

proptest! {
    #[test]
    fn ring_axioms(a in element(&ctx12()), b in element(&ctx12()), c in element(&ctx12())) {
        prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        prop_assert_eq!(&a + &b, &b + &a);
        prop_assert_eq!(&a * &b, &b * &a);
        prop_assert!((&a - &a).is_zero());
    }

    #[test]
    fn conjugation_is_involutive_automorphism(a in element(&ctx12()), b in element(&ctx12())) {
        prop_assert_eq!(a.conjugate().conjugate(), a.clone());
        prop_assert_eq!((&a * &b).conjugate(), &a.conjugate() * &b.conjugate());
        prop_assert_eq!((&a + &b).conjugate(), &a.conjugate() + &b.conjugate());
    }

    #[test]
    fn to_complex_is_homomorphism(a in element(&ctx12()), b in element(&ctx12())) {
        let (ar, ai) = a.to_complex();
        let (br, bi) = b.to_complex();
        let (pr, pi) = (&a * &b).to_complex();
        prop_assert!((pr - (ar * br - ai * bi)).abs() < 1e-10 * (1.0 + pr.abs()));
        prop_assert!((pi - (ar * bi + ai * br)).abs() < 1e-10 * (1.0 + pi.abs()));
        let (sr, si) = (&a + &b).to_complex();
        prop_assert!((sr - ar - br).abs() < 1e-10 && (si - ai - bi).abs() < 1e-10);
    }

    #[test]
    fn inverse_is_inverse(a in element(&ctx12())) {
        prop_assume!(!a.is_zero());
        prop_assert!((&a * &a.inverse().unwrap()).is_one());
    }
}
