use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use weil_core::matalg::{standard_matrices, FqMatrix, InvolutionKind, Sign};
use weil_core::slstar::{
    closure_keys, duality_map, enumerate_group, evaluate_word, generator, generator_matrix,
    is_member, isometry_generators, isometry_group_order, membership_identities,
    split_orthogonal_order, verify_presentation, GroupCtx, GroupTable, PresentationConfig,
    DEFAULT_BUDGET,
};
use weil_core::{field_ctx, Error, GeneratorToken};

fn main_ctx(q: u32) -> GroupCtx {
    GroupCtx::orthogonal(field_ctx(q).unwrap(), 1).unwrap()
}

#[test]
fn membership_examples() {
    let ctx = main_ctx(5);
    let f = ctx.field();
    assert!(is_member(&ctx, &FqMatrix::identity(f, 4)).unwrap());
    assert!(is_member(&ctx, ctx.j_eps()).unwrap());
    let one = FqMatrix::identity(f, 2);
    let z = FqMatrix::zeros(f, 2, 2);
    let u_id = FqMatrix::from_blocks(&one, &one, &z, &one);
    assert!(is_member(&ctx, &u_id).unwrap());
    let s = FqMatrix::from_rows(f, &[&[0, 1], &[0, 0]]).unwrap();
    let bad = FqMatrix::from_blocks(&one, &s, &z, &one);
    assert!(!is_member(&ctx, &bad).unwrap());
    assert!(is_member(&ctx, &FqMatrix::identity(f, 3)).is_err());
}

#[test]
fn generator_examples() {
    let ctx = main_ctx(5);
    let f = ctx.field();
    let h_id = generator(&ctx, &GeneratorToken::H(FqMatrix::identity(f, 2))).unwrap();
    assert!(h_id.mat.is_identity());
    let w = generator(&ctx, &GeneratorToken::W).unwrap();
    let h_eps = generator_matrix(&ctx, &GeneratorToken::H(FqMatrix::scalar(f, 2, -1))).unwrap();
    assert_eq!(w.mat.mul(&w.mat), h_eps);
    for a in 0..5 {
        for b in 0..5 {
            let ua = generator_matrix(&ctx, &GeneratorToken::U(FqMatrix::scalar(f, 2, a))).unwrap();
            let ub = generator_matrix(&ctx, &GeneratorToken::U(FqMatrix::scalar(f, 2, b))).unwrap();
            let uab =
                generator_matrix(&ctx, &GeneratorToken::U(FqMatrix::scalar(f, 2, a + b))).unwrap();
            assert_eq!(ua.mul(&ub), uab);
        }
    }
    let singular = FqMatrix::from_rows(f, &[&[1, 2], &[2, 4]]).unwrap();
    assert!(matches!(
        generator(&ctx, &GeneratorToken::H(singular)),
        Err(Error::InvalidParameter(_))
    ));
    let nonsym = FqMatrix::from_rows(f, &[&[0, 1], &[0, 0]]).unwrap();
    assert!(matches!(generator(&ctx, &GeneratorToken::U(nonsym)), Err(Error::InvalidParameter(_))));
}

#[test]
fn presentation_q5_exhaustive() {
    let ctx = main_ctx(5);
    let rep = verify_presentation(&ctx, &PresentationConfig::default()).unwrap();
    assert!(rep.all_passed(), "{rep:?}");
    assert_eq!(rep.census.units_checked, 480);
    assert_eq!(rep.census.symmetric_checked, 5);
    assert_eq!(rep.census.admissible_checked, 4);
    assert!(rep.relations.iter().all(|r| r.exhaustive));
    assert_eq!(rep.relations[2].instances, 480 * 5);
    assert_eq!(rep.relations[3].instances, 480);
}

#[test]
fn presentation_other_forms() {
    let f = field_ctx(5).unwrap();
    for (kind, eps) in [
        (InvolutionKind::Transpose, Sign::Plus),
        (InvolutionKind::Transpose, Sign::Minus),
        (InvolutionKind::Tilde, Sign::Plus),
    ] {
        let ctx = GroupCtx::new(f, 1, kind, eps).unwrap();
        let rep = verify_presentation(&ctx, &PresentationConfig::default()).unwrap();
        assert!(rep.all_passed(), "{kind:?} {eps:?}: {rep:?}");
    }
}

#[test]
fn presentation_sampled_at_n2() {
    let ctx = GroupCtx::orthogonal(field_ctx(5).unwrap(), 2).unwrap();
    let cfg = PresentationConfig { samples: 60, ..Default::default() };
    let rep = verify_presentation(&ctx, &cfg).unwrap();
    assert!(rep.all_passed(), "{rep:?}");
    assert!(!rep.relations[3].exhaustive);
}

#[test]
fn relation_five_at_two() {
    let ctx = main_ctx(5);
    let f = ctx.field();
    let t = FqMatrix::scalar(f, 2, 2);
    let ti = t.inverse().unwrap();
    let w = GeneratorToken::W;
    let word = vec![
        w.clone(),
        GeneratorToken::U(ti.clone()),
        w.clone(),
        GeneratorToken::U(t.clone()),
        w,
        GeneratorToken::U(ti),
    ];
    let lhs = evaluate_word(&ctx, &word).unwrap();
    assert_eq!(lhs, generator_matrix(&ctx, &GeneratorToken::H(t)).unwrap());
}

fn table_q5() -> GroupTable {
    enumerate_group(&main_ctx(5), DEFAULT_BUDGET).unwrap()
}

#[test]
fn bruhat_closure_q5() {
    let table = table_q5();
    let ctx = table.ctx().clone();
    // The Bruhat generators all have determinant one, so their closure is
    // the index-two subgroup of the isometry group.
    assert_eq!(table.order(), 14400);
    assert!(table.word(0).is_empty());
    assert!(table.matrix(0).is_identity());
    assert!(table.max_word_length() <= 6);
    for i in 0..table.order() {
        let m = table.matrix(i);
        assert!(is_member(&ctx, &m).unwrap());
        assert!(membership_identities(&ctx, &m).unwrap());
        assert_eq!(evaluate_word(&ctx, &table.word(i)).unwrap(), m);
        assert_eq!(m.det(), 1);
    }
    // Closed under products and inverses.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..1000 {
        let a = rng.gen_range(0..table.order());
        let b = rng.gen_range(0..table.order());
        let ab = table.product(a, b).expect("closed under products");
        let mut word = table.word(a);
        word.extend(table.word(b));
        assert_eq!(evaluate_word(&ctx, &word).unwrap(), table.matrix(ab));
        assert!(table.find(&table.matrix(a).inverse().unwrap()).is_some());
    }
    // The full isometry group is reached once a reflection is added.
    assert_eq!(isometry_group_order(&table).unwrap(), split_orthogonal_order(5, 1));
    let full = closure_keys(&ctx, &isometry_generators(&ctx).unwrap(), DEFAULT_BUDGET).unwrap();
    assert_eq!(full.len() as u128, split_orthogonal_order(5, 1));
    assert_eq!(split_orthogonal_order(5, 1), 28800);
    assert_eq!(split_orthogonal_order(7, 1), 225792);
}

#[test]
fn membership_dual_test_on_random_non_members() {
    let ctx = main_ctx(5);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut non_members = 0;
    while non_members < 10_000 {
        let t = FqMatrix::random(ctx.field(), 4, 4, &mut rng);
        // is_member errors if the two tests disagree
        if !is_member(&ctx, &t).unwrap() {
            non_members += 1;
        }
    }
}

#[test]
fn budget_is_enforced() {
    assert!(matches!(
        enumerate_group(&main_ctx(5), 1000),
        Err(Error::BudgetExceeded { budget: 1000 })
    ));
}

#[test]
fn cache_roundtrip_and_corruption() {
    let table = table_q5();
    let mut buf = Vec::new();
    table.write_to(&mut buf).unwrap();
    let back = GroupTable::read_from(table.ctx(), &buf[..]).unwrap();
    assert_eq!(back.order(), table.order());
    for i in (0..table.order()).step_by(97) {
        assert_eq!(back.matrix(i), table.matrix(i));
        assert_eq!(back.word_indices(i), table.word_indices(i));
    }
    let mut again = Vec::new();
    back.write_to(&mut again).unwrap();
    assert_eq!(buf, again);

    let mut corrupt = buf.clone();
    let mid = corrupt.len() / 2;
    corrupt[mid] ^= 1;
    assert!(matches!(GroupTable::read_from(table.ctx(), &corrupt[..]), Err(Error::Cache(_))));
    let other = main_ctx(7);
    assert!(matches!(GroupTable::read_from(&other, &buf[..]), Err(Error::Cache(_))));
    assert!(matches!(GroupTable::read_from(table.ctx(), &buf[..10]), Err(Error::Cache(_))));
}

#[test]
fn duality_map_is_isomorphism_q5() {
    let f = field_ctx(5).unwrap();
    let src = GroupCtx::new(f, 1, InvolutionKind::Transpose, Sign::Plus).unwrap();
    let dst = main_ctx(5);
    let sm = standard_matrices(1, f).unwrap();
    assert!(duality_map(&src, &FqMatrix::identity(f, 4)).unwrap().is_identity());
    assert!(duality_map(&dst, &FqMatrix::identity(f, 4)).is_err());
    let src_keys = closure_keys(&src, &isometry_generators(&src).unwrap(), DEFAULT_BUDGET).unwrap();
    let dst_keys = closure_keys(&dst, &isometry_generators(&dst).unwrap(), DEFAULT_BUDGET).unwrap();
    assert_eq!(src_keys.len(), 28800);
    assert_eq!(dst_keys.len(), 28800);
    let packer = weil_core::slstar::MatrixPacker::new(f, 4).unwrap();
    let mut image = rustc_hash::FxHashSet::default();
    for &k in &src_keys {
        let t = packer.unpack(k);
        let img = duality_map(&src, &t).unwrap();
        assert!(is_member(&dst, &img).unwrap());
        image.insert(packer.pack(img.data()));
    }
    assert_eq!(image, dst_keys);
    let _ = sm;
    let keys: Vec<u128> = src_keys.iter().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for _ in 0..1000 {
        let a = packer.unpack(keys[rng.gen_range(0..keys.len())]);
        let b = packer.unpack(keys[rng.gen_range(0..keys.len())]);
        assert_eq!(
            duality_map(&src, &a.mul(&b)).unwrap(),
            duality_map(&src, &a).unwrap().mul(&duality_map(&src, &b).unwrap())
        );
    }
}
