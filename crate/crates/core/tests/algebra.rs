use std::collections::BTreeMap;

use courant_core::algebra::{koszul, Algebra, Derivation, Element, Generator, Grade};
use courant_core::cdga::Cdga;
use courant_core::coeff::{CoefficientField, Coeff};
use courant_core::text::parse_element;
use proptest::prelude::*;

fn alg() -> Algebra {
    Algebra::new(
        CoefficientField::Rationals,
        vec![
            Generator::new("x", Grade::ZERO),
            Generator::new("y", Grade::even(2)),
            Generator::new("s", Grade::even(1)),
            Generator::new("t", Grade::new(0, 1)),
            Generator::new("u", Grade::even(-1)),
        ],
    )
    .unwrap()
}

type Terms = Vec<(i64, i64, [u32; 5])>;

fn terms() -> impl Strategy<Value = Terms> {
    prop::collection::vec((-6i64..=6, 1i64..=4, [0u32..3, 0u32..2, 0u32..2, 0u32..2, 0u32..2]), 0..5)
}

fn element(a: &Algebra, ts: &Terms) -> Element {
    let mut e = a.zero();
    for (n, d, exps) in ts {
        let mut m = a.rat(*n, *d);
        for (g, k) in exps.iter().enumerate() {
            m = &m * &a.gen(g as u32).pow(*k);
        }
        e = &e + &m;
    }
    e
}

fn sign(e: &Element, s: i64) -> Element {
    e.scale_rat(s, 1)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn graded_commutativity(x in terms(), y in terms()) {
        let a = alg();
        let (x, y) = (element(&a, &x), element(&a, &y));
        for (p, xp) in x.parity_parts().iter().enumerate() {
            for (q, yq) in y.parity_parts().iter().enumerate() {
                prop_assert_eq!(xp * yq, sign(&(yq * xp), koszul(p as u8, q as u8)));
            }
        }
    }

    #[test]
    fn associativity(x in terms(), y in terms(), z in terms()) {
        let a = alg();
        let (x, y, z) = (element(&a, &x), element(&a, &y), element(&a, &z));
        prop_assert_eq!(&(&x * &y) * &z, &x * &(&y * &z));
    }

    #[test]
    fn graded_leibniz(x in terms(), y in terms(), images in prop::collection::vec(terms(), 5), odd in any::<bool>()) {
        let a = alg();
        let (x, y) = (element(&a, &x), element(&a, &y));
        let d = if odd { 1 } else { 0 };
        // images of parity |g| + d
        let imgs: Vec<(u32, Element)> = images
            .iter()
            .enumerate()
            .map(|(g, t)| (g as u32, element(&a, t).parity_parts()[((a.parity_of(g as u32) + d) % 2) as usize].clone()))
            .collect();
        let der = Derivation::new(&a, imgs).unwrap();
        for (p, xp) in x.parity_parts().iter().enumerate() {
            let lhs = der.apply(&(xp * &y)).unwrap();
            let rhs = &(&der.apply(xp).unwrap() * &y) + &sign(&(xp * &der.apply(&y).unwrap()), koszul(d, p as u8));
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn evaluation_is_multiplicative(x in terms(), y in terms(), px in -5i64..5, py in -5i64..5) {
        let a = Algebra::new(
            CoefficientField::Rationals,
            vec![Generator::new("x", Grade::ZERO), Generator::new("y", Grade::ZERO)],
        )
        .unwrap();
        let keep = |t: &Terms| -> Terms {
            t.iter().map(|(n, d, e)| (*n, *d, [e[0], e[1] % 2, 0, 0, 0])).collect()
        };
        let el = |t: &Terms| {
            t.iter().fold(a.zero(), |acc, (n, d, e)| {
                &acc + &(&a.rat(*n, *d) * &(&a.gen(0).pow(e[0]) * &a.gen(1).pow(e[1])))
            })
        };
        let (x, y) = (el(&keep(&x)), el(&keep(&y)));
        let pt: BTreeMap<String, Coeff> =
            [("x".to_string(), Coeff::int(px)), ("y".to_string(), Coeff::int(py))].into_iter().collect();
        let ev = |e: &Element| e.evaluate_at(&pt).unwrap();
        prop_assert_eq!(ev(&(&x * &y)), &ev(&x) * &ev(&y));
    }

    #[test]
    fn rendering_parses_back(x in terms()) {
        let a = alg();
        let x = element(&a, &x);
        prop_assert_eq!(parse_element(&a, &x.render()).unwrap(), x);
    }
}

#[test]
fn shipped_models_square_to_zero() {
    for d in 1..=3 {
        assert!(Cdga::de_rham(d).check_square_zero().pass);
        assert!(Cdga::dolbeault(d).check_square_zero().pass);
    }
}

#[test]
fn odd_square_vanishes_and_koszul_sign() {
    let a = alg();
    let (s, u, x) = (a.var("s"), a.var("u"), a.var("x"));
    assert!((&s * &s).is_zero());
    assert_eq!(&s * &u, -(&u * &s));
    assert_eq!(&x * &s, &s * &x);
    assert_eq!((&s * &u).render(), "s*u");
}
