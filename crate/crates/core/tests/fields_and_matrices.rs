use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use weil_core::matalg::{
    dot, eps_symmetric_elements, involution_apply, standard_matrices, vec_mul, FqMatrix,
    InvolutionKind, Sign,
};
use weil_core::scalars::Cyclotomic;
use weil_core::{field_ctx, psi, zeta_pow, AdditiveCharacter, Error};

#[test]
fn field_ctx_validation() {
    assert!(field_ctx(5).is_ok());
    assert!(field_ctx(7).is_ok());
    assert!(matches!(field_ctx(4), Err(Error::Unsupported(_))));
    assert!(matches!(field_ctx(3), Err(Error::Unsupported(_))));
    assert!(matches!(field_ctx(9), Err(Error::Unsupported(_))));
    assert!(matches!(field_ctx(2), Err(Error::Unsupported(_))));
}

#[test]
fn field_inverses() {
    for q in [5, 7, 11, 13] {
        let f = field_ctx(q).unwrap();
        assert_eq!(f.inv(0), None);
        for a in 1..q {
            assert_eq!(f.mul(a, f.inv(a).unwrap()), 1);
        }
    }
}

#[test]
fn psi_examples() {
    let f = field_ctx(5).unwrap();
    let chr = AdditiveCharacter::new(f, 1).unwrap();
    assert!(psi(&chr, 0).is_one());
    assert_eq!(psi(&chr, 2), zeta_pow(chr.values_ctx(), 2));
    let mut s = Cyclotomic::zero(chr.values_ctx());
    for x in 0..5 {
        s += &psi(&chr, x);
    }
    assert!(s.is_zero());
    assert!(AdditiveCharacter::new(f, 0).is_err());
    assert!(AdditiveCharacter::new(f, 5).is_err());
}

#[test]
fn psi_is_additive_nontrivial_and_twists() {
    let f = field_ctx(5).unwrap();
    for l1 in 1..5 {
        let c1 = AdditiveCharacter::new(f, l1).unwrap();
        for x in 0..5 {
            for y in 0..5 {
                assert_eq!(psi(&c1, f.add(x, y)), &psi(&c1, x) * &psi(&c1, y));
            }
        }
        assert!((0..5).any(|x| !psi(&c1, x).is_one()));
        for l2 in 1..5 {
            let c2 = AdditiveCharacter::new(f, l2).unwrap();
            let ratio = f.mul(l2 as u32, f.inv(l1 as u32).unwrap());
            for x in 0..5 {
                assert_eq!(psi(&c2, x), psi(&c1, f.mul(ratio, x)));
            }
        }
    }
}

#[test]
fn involution_examples() {
    let f = field_ctx(5).unwrap();
    let i2 = FqMatrix::identity(f, 2);
    assert_eq!(involution_apply(InvolutionKind::Tilde, &i2).unwrap(), i2);
    for (a, b, c, d) in [(1, 2, 3, 4), (0, 1, 4, 2), (3, 3, 1, 0)] {
        let m = FqMatrix::from_rows(f, &[&[a, b], &[c, d]]).unwrap();
        let expected = FqMatrix::from_rows(f, &[&[d, -b], &[-c, a]]).unwrap();
        assert_eq!(involution_apply(InvolutionKind::Tilde, &m).unwrap(), expected);
    }
    let m = FqMatrix::from_rows(f, &[&[1, 2], &[3, 4]]).unwrap();
    let t = FqMatrix::from_rows(f, &[&[1, 3], &[2, 4]]).unwrap();
    assert_eq!(involution_apply(InvolutionKind::Transpose, &m).unwrap(), t);
    let odd = FqMatrix::identity(f, 3);
    assert!(involution_apply(InvolutionKind::Tilde, &odd).is_err());
    let rect = FqMatrix::zeros(f, 2, 3);
    assert!(involution_apply(InvolutionKind::Transpose, &rect).is_err());
}

fn all_2x2(f: weil_core::FieldCtx) -> Vec<FqMatrix> {
    let q = f.q() as i64;
    let mut out = Vec::new();
    for a in 0..q {
        for b in 0..q {
            for c in 0..q {
                for d in 0..q {
                    out.push(FqMatrix::from_rows(f, &[&[a, b], &[c, d]]).unwrap());
                }
            }
        }
    }
    out
}

#[test]
fn tilde_is_involutive_anti_automorphism_exhaustive() {
    let f = field_ctx(5).unwrap();
    let all = all_2x2(f);
    let t = |a: &FqMatrix| involution_apply(InvolutionKind::Tilde, a).unwrap();
    for a in &all {
        assert_eq!(t(&t(a)), *a);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..2000 {
        let a = FqMatrix::random(f, 2, 2, &mut rng);
        let b = FqMatrix::random(f, 2, 2, &mut rng);
        assert_eq!(t(&a.mul(&b)), t(&b).mul(&t(&a)));
    }
}

#[test]
fn involutions_sampled_at_n2() {
    let f = field_ctx(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for kind in [InvolutionKind::Transpose, InvolutionKind::Tilde] {
        let t = |a: &FqMatrix| involution_apply(kind, a).unwrap();
        for _ in 0..200 {
            let a = FqMatrix::random(f, 4, 4, &mut rng);
            let b = FqMatrix::random(f, 4, 4, &mut rng);
            assert_eq!(t(&t(&a)), a);
            assert_eq!(t(&a.mul(&b)), t(&b).mul(&t(&a)));
        }
    }
}

#[test]
fn bracket_adjoint_identities() {
    // <xa, y> = <x, y a^⋄> and [xa, y] = [x, y a~] with [x, y] = <x, yJ>.
    for n in [1usize, 2] {
        let f = field_ctx(5).unwrap();
        let sm = standard_matrices(n, f).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
        let m = 2 * n;
        let br = |x: &[u32], y: &[u32]| dot(f, x, &vec_mul(f, y, &sm.j));
        for _ in 0..300 {
            let a = FqMatrix::random(f, m, m, &mut rng);
            let x = FqMatrix::random(f, 1, m, &mut rng).data().to_vec();
            let y = FqMatrix::random(f, 1, m, &mut rng).data().to_vec();
            let at = involution_apply(InvolutionKind::Transpose, &a).unwrap();
            let atl = involution_apply(InvolutionKind::Tilde, &a).unwrap();
            assert_eq!(dot(f, &vec_mul(f, &x, &a), &y), dot(f, &x, &vec_mul(f, &y, &at)));
            assert_eq!(br(&vec_mul(f, &x, &a), &y), br(&x, &vec_mul(f, &y, &atl)));
        }
    }
}

#[test]
fn eps_symmetric_examples() {
    let f = field_ctx(5).unwrap();
    let s = eps_symmetric_elements(f, Sign::Minus, InvolutionKind::Tilde, 2).unwrap();
    let els = s.elements.clone().unwrap();
    assert_eq!(els.len(), 5);
    for e in &els {
        assert_eq!(*e, FqMatrix::scalar(f, 2, e.get(0, 0) as i64));
    }
    assert_eq!(s.invertible().unwrap().len(), 4);
    assert!(s.has_invertible);
    let sym = eps_symmetric_elements(f, Sign::Minus, InvolutionKind::Transpose, 2).unwrap();
    assert_eq!(sym.dimension(), 3);
    let anti = eps_symmetric_elements(f, Sign::Plus, InvolutionKind::Transpose, 2).unwrap();
    assert_eq!(anti.dimension(), 1);
    for e in anti.elements.unwrap() {
        assert_eq!(e.transpose(), e.neg());
    }
}

#[test]
fn eps_symmetric_dimensions_are_complementary() {
    for (q, n) in [(5u32, 1usize), (5, 2), (7, 1), (7, 2)] {
        let f = field_ctx(q).unwrap();
        let m = 2 * n;
        for kind in [InvolutionKind::Transpose, InvolutionKind::Tilde] {
            let a = eps_symmetric_elements(f, Sign::Minus, kind, m).unwrap();
            let b = eps_symmetric_elements(f, Sign::Plus, kind, m).unwrap();
            assert_eq!(a.dimension() + b.dimension(), m * m);
        }
        let fixed = eps_symmetric_elements(f, Sign::Minus, InvolutionKind::Tilde, m).unwrap();
        assert_eq!(fixed.dimension(), n * (2 * n - 1));
        assert!(fixed.has_invertible);
    }
}

#[test]
fn standard_matrix_examples() {
    let f = field_ctx(5).unwrap();
    for n in 1..=3 {
        let sm = standard_matrices(n, f).unwrap();
        assert_eq!(sm.j.inverse().unwrap(), sm.j.neg());
        assert_eq!(sm.j.transpose(), sm.j.neg());
        assert_eq!(sm.f.transpose(), sm.f);
        assert!(sm.f.mul(&sm.f).is_identity());
        let pstar = weil_core::matalg::star2(InvolutionKind::Transpose, &sm.p).unwrap();
        assert_eq!(sm.p.mul(&sm.j_plus).mul(&pstar), sm.j_minus.mul(&sm.u));
    }
    let sm = standard_matrices(1, f).unwrap();
    assert_eq!(sm.j, FqMatrix::from_rows(f, &[&[0, 1], &[-1, 0]]).unwrap());
    assert!(standard_matrices(0, f).is_err());
}

#[test]
fn matrix_algebra_basics() {
    let f = field_ctx(7).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..200 {
        let a = FqMatrix::random(f, 4, 4, &mut rng);
        let b = FqMatrix::random(f, 4, 4, &mut rng);
        let c = FqMatrix::random(f, 4, 4, &mut rng);
        assert_eq!(a.mul(&b).mul(&c), a.mul(&b.mul(&c)));
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(f.mul(a.det(), b.det()), a.mul(&b).det());
        match a.inverse() {
            Some(ai) => assert!(a.mul(&ai).is_identity() && a.det() != 0),
            None => assert_eq!(a.det(), 0),
        }
        let ns = a.nullspace();
        assert_eq!(ns.len() + a.rank(), 4);
        for v in ns {
            let col = FqMatrix::from_residues(f, 4, 1, v);
            assert!(a.mul(&col).is_zero());
        }
    }
}
