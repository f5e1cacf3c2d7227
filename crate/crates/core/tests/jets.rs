use funnelsim_core::Jet;
use proptest::prelude::*;

fn jet(order: usize) -> impl Strategy<Value = Jet> {
    prop::collection::vec(-3.0..3.0f64, order + 1).prop_map(|c| Jet::scalar(&c).unwrap())
}

fn close(a: &Jet, b: &Jet, tol: f64) -> bool {
    a.order() == b.order()
        && a.scalar_coeffs().iter().zip(b.scalar_coeffs()).all(|(x, y)| (x - y).abs() <= tol * (1.0 + y.abs()))
}

proptest! {
    #[test]
    fn truncation_commutes_with_arithmetic(a in jet(5), b in jet(5), k in 0usize..=5) {
        prop_assert!(close(&a.mul(&b).unwrap().truncate(k), &a.truncate(k).mul(&b.truncate(k)).unwrap(), 1e-13));
        prop_assert!(close(&a.add(&b).unwrap().truncate(k), &a.truncate(k).add(&b.truncate(k)).unwrap(), 0.0));
    }

    #[test]
    fn mixed_orders_truncate_to_the_shorter(a in jet(5), b in jet(2)) {
        prop_assert_eq!(a.add(&b).unwrap().order(), 2);
        prop_assert_eq!(a.mul(&b).unwrap().order(), 2);
    }

    #[test]
    fn product_rule_on_the_derivative(a in jet(4), b in jet(4)) {
        let lhs = a.mul(&b).unwrap().derivative().unwrap();
        let rhs = a.derivative().unwrap().mul(&b).unwrap().add(&a.mul(&b.derivative().unwrap()).unwrap()).unwrap();
        prop_assert!(close(&lhs, &rhs, 1e-12));
    }

    #[test]
    fn sqnorm_is_self_dot(x in prop::collection::vec(-2.0..2.0f64, 4), y in prop::collection::vec(-2.0..2.0f64, 4)) {
        let v = Jet::new((0..4).map(|j| vec![x[j], y[j]]).collect()).unwrap();
        let (xs, ys) = (Jet::scalar(&x).unwrap(), Jet::scalar(&y).unwrap());
        let expect = xs.mul(&xs).unwrap().add(&ys.mul(&ys).unwrap()).unwrap();
        prop_assert!(close(&v.sqnorm(), &expect, 1e-13));
    }
}

#[test]
fn reciprocal_of_one_plus_t_squared() {
    // d^j/dt^j of 1/(1 + t²) at t = 1: 1/2, −1/2, 1/2, 0, −3.
    let t = Jet::scalar(&[1.0, 1.0, 0.0, 0.0, 0.0]).unwrap();
    let g = Jet::constant(&[1.0], 4).add(&t.mul(&t).unwrap()).unwrap().reciprocal().unwrap();
    for (got, want) in g.scalar_coeffs().iter().zip([0.5, -0.5, 0.5, 0.0, -3.0]) {
        assert!((got - want).abs() < 1e-14, "{:?}", g.scalar_coeffs());
    }
}
