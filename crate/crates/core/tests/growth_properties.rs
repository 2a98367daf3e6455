use psi_core::growth::ZIGZAG_X_MAX;
use psi_core::{estimate_orders, make_zigzag, Expression, GrowthFunction, ZigzagParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn zigzag_orders_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..20 {
        let a: f64 = rng.gen_range(0.2..8.0);
        let b: f64 = rng.gen_range(0.2..8.0);
        let (ell, big_l) = (a.min(b), a.max(b).max(a.min(b) + 0.05));
        let z = make_zigzag(ZigzagParams::new(ell, big_l)).unwrap();
        let p = z.polyline().unwrap();
        assert!(p.ys.windows(2).all(|w| w[1] >= w[0]));
        let e = estimate_orders(&z, ZIGZAG_X_MAX, 8).unwrap();
        assert!((e.upper_order.value() - big_l).abs() < 2e-2, "({ell}, {big_l}): {e:?}");
        assert!((e.lower_order.value() - ell).abs() < 2e-2, "({ell}, {big_l}): {e:?}");
    }
}

#[test]
fn powers_scale_orders() {
    let z = make_zigzag(ZigzagParams::new(1.0, 3.0)).unwrap();
    let z2 = z.powered(2.0);
    for cutoff in [1e4, 1e100, 1e300] {
        let a = estimate_orders(&z, cutoff, 8).unwrap();
        let b = estimate_orders(&z2, cutoff, 8).unwrap();
        assert!((2.0 * a.upper_order.value() - b.upper_order.value()).abs() < 1e-9);
        assert!((2.0 * a.lower_order.value() - b.lower_order.value()).abs() < 1e-9);
        for (p, q) in a.trajectory.iter().zip(&b.trajectory) {
            assert!((2.0 * p.1 - q.1).abs() < 1e-9);
        }
    }

    let t = GrowthFunction::from_expr(Expression::parse("t^2*(2+sin(log(t)))").unwrap());
    let a = estimate_orders(&t, 300.0, 8).unwrap();
    let b = estimate_orders(&t.powered(2.0), 300.0, 8).unwrap();
    assert!((2.0 * a.upper_order.value() - b.upper_order.value()).abs() < 1e-9);
    assert!((2.0 * a.lower_order.value() - b.lower_order.value()).abs() < 1e-9);
}
