use super::*;
use crate::sample::{random_series, standard_context};
use crate::scalar::BaseNumber;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const W: u32 = 8;

fn ctx1() -> Arc<AlphaContext> {
    standard_context(1)
}

fn c(ctx: &Arc<AlphaContext>, n: i64) -> SmallDenomScalar {
    SmallDenomScalar::from_i64(ctx, n)
}

#[test]
fn canonical_pair() {
    let ctx = standard_context(2);
    let b = GradedSeries::q(&ctx, W, 0).bracket(&GradedSeries::p(&ctx, W, 0));
    assert_eq!(b, GradedSeries::constant(&ctx, W, c(&ctx, 1)));
    let z = GradedSeries::q(&ctx, W, 0).bracket(&GradedSeries::p(&ctx, W, 1));
    assert!(z.is_zero());
}

#[test]
fn quadratic_part_acts_diagonally() {
    let ctx = ctx1();
    let alpha = ctx.alpha()[0].clone();
    let p = GradedSeries::p(&ctx, W, 0);
    let q = GradedSeries::q(&ctx, W, 0);
    let h0 = p.mul(&q).scale_base(&alpha);
    let p2 = p.mul(&p);
    let expect = p2.scale_base(&(&alpha * &BaseNumber::from_i64(ctx.field(), 2)));
    assert_eq!(h0.bracket(&p2), expect);
}

#[test]
fn ideal_generators_commute() {
    let ctx = standard_context(2);
    let f1 = GradedSeries::f_gen(&ctx, W, 0);
    let f2 = GradedSeries::f_gen(&ctx, W, 1);
    assert!(f1.bracket(&f2).is_zero());
}

#[test]
fn truncation_windows() {
    let ctx = ctx1();
    let p = GradedSeries::p(&ctx, W, 0);
    let q = GradedSeries::q(&ctx, W, 0);
    let s = p.pow(3).add(&p.mul(&q));
    assert_eq!(s.truncate(3, None), p.pow(3));
    assert_eq!(s.truncate(0, None), s);
    let a0 = GradedSeries::omega(&ctx, W, 0)
        .add(&GradedSeries::constant(&ctx, W, c(&ctx, 2)))
        .mul(&p.mul(&q));
    let pq2 = p.mul(&q).pow(2);
    assert_eq!(a0.add(&pq2).truncate(4, Some(6)), pq2);
}

#[test]
fn cutoff_drops_heavy_terms() {
    let ctx = ctx1();
    let p = GradedSeries::p(&ctx, 3, 0);
    assert!(p.pow(4).is_zero());
    assert_eq!(GradedSeries::tau(&ctx, 3, 0).mul(&p).order(), Some(3));
}

#[test]
fn derivation_examples() {
    let ctx = ctx1();
    let p = GradedSeries::p(&ctx, W, 0);
    let q = GradedSeries::q(&ctx, W, 0);
    let pq = p.mul(&q);
    let a0 = GradedSeries::constant(&ctx, W, c(&ctx, 2).add(&SmallDenomScalar::omega(&ctx, 0))).mul(&pq);
    let one = GradedSeries::constant(&ctx, W, c(&ctx, 1));
    let d_om = PoissonDerivation::omega_direction(0, one);
    assert_eq!(d_om.apply(&a0), pq);

    let tau = GradedSeries::tau(&ctx, W, 0);
    let v = PoissonDerivation::omega_direction(0, tau.scale_rational(&rat(2)));
    assert_eq!(v.order(), Some(2));
    assert!(v.apply(&pq.pow(2)).is_zero());

    let ell_inv = SmallDenomScalar::inv_pairing(&ctx, &[1]).unwrap();
    let gen = p.pow(3).scale(&ell_inv).scale_rational(&BigRational::new(1.into(), 3.into()));
    assert_eq!(PoissonDerivation::hamiltonian(gen).apply(&a0), p.pow(3));
}

#[test]
fn exponential_examples() {
    let ctx = ctx1();
    let p = GradedSeries::p(&ctx, W, 0);
    let q = GradedSeries::q(&ctx, W, 0);
    let pq = p.mul(&q);
    let tau = GradedSeries::tau(&ctx, W, 0);
    let a0 = GradedSeries::constant(&ctx, W, c(&ctx, 2).add(&SmallDenomScalar::omega(&ctx, 0))).mul(&pq);
    let f = a0.add(&pq.pow(2));

    let zero = PoissonDerivation::zero(&ctx, W);
    assert_eq!(zero.exp(&f).unwrap(), f);

    let v = PoissonDerivation::omega_direction(0, tau.scale_rational(&rat(2)));
    let expect = f.sub(&tau.mul(&pq).scale_rational(&rat(2)));
    assert_eq!(v.neg().exp(&f).unwrap(), expect);

    let order0 = PoissonDerivation::omega_direction(0, GradedSeries::constant(&ctx, W, c(&ctx, 1)));
    assert_eq!(order0.exp(&f).unwrap_err(), SeriesError::NonPositiveOrder(0));
}

#[test]
fn moser_examples() {
    let ctx = ctx1();
    let p = GradedSeries::p(&ctx, W, 0);
    let q = GradedSeries::q(&ctx, W, 0);
    let pq = p.mul(&q);
    let tau = GradedSeries::tau(&ctx, W, 0);
    assert_eq!(p.pow(3).add(&pq.pow(2)).moser_project(), pq.pow(2));
    assert_eq!(tau.mul(&pq).moser_project(), tau.mul(&pq));

    let m = pq.pow(2).sub(&tau.mul(&pq).scale_rational(&rat(2)));
    assert!(m.moser_linear_part().unwrap()[0].is_zero());
    assert_eq!(
        pq.moser_linear_part().unwrap()[0],
        GradedSeries::constant(&ctx, W, c(&ctx, 1))
    );
    assert!(tau.pow(2).moser_linear_part().unwrap()[0].is_zero());
    assert!(matches!(p.moser_linear_part(), Err(SeriesError::NotInMoserAlgebra(_))));
}

#[test]
fn canonical_text() {
    let ctx = standard_context(2);
    let s = GradedSeries::tau(&ctx, W, 0)
        .pow(2)
        .mul(&GradedSeries::p(&ctx, W, 0))
        .mul(&GradedSeries::q(&ctx, W, 1))
        .sub(&GradedSeries::p(&ctx, W, 1).scale_rational(&BigRational::new(1.into(), 2.into())));
    assert_eq!(s.to_canonical(), "-1/2*p2 + tau1^2*q2*p1");
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn rand_series(r: &mut ChaCha8Rng, ctx: &Arc<AlphaContext>, cutoff: u32) -> GradedSeries {
    random_series(ctx, r, cutoff, 1, 4, 5, true, true)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn jacobi_identity(seed in any::<u64>()) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let (f, g, h) = (rand_series(&mut r, &ctx, 6), rand_series(&mut r, &ctx, 6), rand_series(&mut r, &ctx, 6));
        let s = f.bracket(&g.bracket(&h))
            .add(&g.bracket(&h.bracket(&f)))
            .add(&h.bracket(&f.bracket(&g)));
        prop_assert!(s.is_zero());
    }

    #[test]
    fn bracket_is_antisymmetric_and_raises_order(seed in any::<u64>()) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let f = rand_series(&mut r, &ctx, W);
        let g = rand_series(&mut r, &ctx, W);
        let b = f.bracket(&g);
        prop_assert_eq!(b.add(&g.bracket(&f)), GradedSeries::zero(&ctx, W));
        if let (Some(of), Some(og), Some(ob)) = (f.order(), g.order(), b.order()) {
            prop_assert!(ob + 2 >= of + og);
        }
    }

    #[test]
    fn derivations_obey_leibniz(seed in any::<u64>()) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let f = rand_series(&mut r, &ctx, W);
        let g = rand_series(&mut r, &ctx, W);
        let v = PoissonDerivation::new(
            random_series(&ctx, &mut r, W, 3, 4, 3, true, true),
            vec![random_series(&ctx, &mut r, W, 1, 2, 2, true, true), GradedSeries::zero(&ctx, W)],
            vec![GradedSeries::zero(&ctx, W), random_series(&ctx, &mut r, W, 3, 4, 2, true, true)],
        );
        let lhs = v.apply(&f.mul(&g));
        let rhs = v.apply(&f).mul(&g).add(&f.mul(&v.apply(&g)));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn exponential_is_a_morphism(seed in any::<u64>()) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let f = random_series(&ctx, &mut r, W, 3, 3, 3, false, false);
        let g = random_series(&ctx, &mut r, W, 3, 3, 3, false, false);
        let v = PoissonDerivation::hamiltonian(random_series(&ctx, &mut r, W, 3, 3, 3, false, true));
        let lhs = v.exp(&f.mul(&g)).unwrap();
        let rhs = v.exp(&f).unwrap().mul(&v.exp(&g).unwrap());
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn projection_is_idempotent(seed in any::<u64>()) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let f = rand_series(&mut r, &ctx, W);
        let pf = f.moser_project();
        prop_assert!(pf.is_moser());
        prop_assert_eq!(pf.moser_project(), pf);
    }

    #[test]
    fn linear_part_kills_ideal_squares(seed in any::<u64>(), i in 0usize..2, j in 0usize..2) {
        let ctx = standard_context(2);
        let mut r = rng(seed);
        let central = random_series(&ctx, &mut r, W, 0, 2, 3, true, true).filter(|m, _| m.is_central());
        let fij = GradedSeries::f_gen(&ctx, W, i).mul(&GradedSeries::f_gen(&ctx, W, j));
        for comp in central.mul(&fij).moser_linear_part().unwrap() {
            prop_assert!(comp.is_zero());
        }
        // R₀-linearity on a generic Moser element.
        let m = random_series(&ctx, &mut r, W, 2, 4, 4, true, true).moser_project();
        let lhs = central.mul(&m).moser_linear_part().unwrap();
        let rhs = m.moser_linear_part().unwrap();
        // Components of a weight-W product only reach weight W − 2.
        for (l, x) in lhs.iter().zip(&rhs) {
            prop_assert_eq!(l.truncate(0, Some(W - 1)), central.mul(x).truncate(0, Some(W - 1)));
        }
    }
}

#[test]
fn ideal_square_membership() {
    let ctx = standard_context(2);
    let f1 = GradedSeries::f_gen(&ctx, W, 0);
    let f2 = GradedSeries::f_gen(&ctx, W, 1);
    let x = GradedSeries::p(&ctx, W, 0).mul(&GradedSeries::q(&ctx, W, 1));
    assert!(x.mul(&f1).mul(&f2).add(&GradedSeries::tau(&ctx, W, 1)).in_center_plus_ideal_square());
    assert!(!x.mul(&f1).in_center_plus_ideal_square());
    assert!(!f1.in_center_plus_ideal_square());
    assert!(f1.mul(&f1).in_center_plus_ideal_square());
}
