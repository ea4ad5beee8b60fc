use std::sync::Arc;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use egdef::deformation::{sd, TheoryConfig};
use egdef::group::{
    apply_scaling, bch, exp_truncated, lie_bracket, log_truncated, random_group_element, random_lie_element,
    random_point, scaling_operator, semidirect_identity, semidirect_inverse, semidirect_mul, theta, JClass,
};
use egdef::rational::{int, ratio};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn semidirect_product_is_a_group(seed in any::<u64>(), trunc in 1usize..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = random_group_element(&mut rng, trunc).unwrap();
        let b = random_group_element(&mut rng, trunc).unwrap();
        let c = random_group_element(&mut rng, trunc).unwrap();
        let ab_c = semidirect_mul(&semidirect_mul(&a, &b).unwrap(), &c).unwrap();
        let a_bc = semidirect_mul(&a, &semidirect_mul(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(ab_c, a_bc);
        let inv = semidirect_inverse(&a).unwrap();
        prop_assert_eq!(semidirect_mul(&inv, &a).unwrap(), semidirect_identity(trunc));
    }

    #[test]
    fn bch_of_commuting_elements_is_the_sum(seed in any::<u64>(), n in -4i64..=4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_lie_element(&mut rng, 4).unwrap();
        let y = x.scale(&int(n));
        prop_assert_eq!(bch(&x, &y).unwrap(), x.add(&y).unwrap());
    }

    #[test]
    fn log_inverts_exp(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_lie_element(&mut rng, 5).unwrap();
        prop_assert_eq!(log_truncated(&exp_truncated(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn bracket_is_antisymmetric(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_lie_element(&mut rng, 4).unwrap();
        let y = random_lie_element(&mut rng, 4).unwrap();
        prop_assert_eq!(lie_bracket(&x, &y).unwrap(), lie_bracket(&y, &x).unwrap().neg());
    }

    #[test]
    fn theta_is_multiplicative(seed in any::<u64>(), a in 1i64..6, b in 1i64..6) {
        let theory = Arc::new(TheoryConfig::new(1, 3, 3).unwrap().with_default_sd(sd(2)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, &theory, 2, 6).unwrap();
        let (q1, q2) = (ratio(a, b), ratio(b, a + 1));
        let lhs = theta(&q1, &theta(&q2, &p).unwrap()).unwrap();
        prop_assert_eq!(lhs, theta(&(q1 * q2), &p).unwrap());
    }

    #[test]
    fn scaling_is_linear(seed in any::<u64>(), num in -9i64..=9, den in 1i64..=4) {
        let theory = Arc::new(TheoryConfig::new(1, 3, 3).unwrap().with_default_sd(sd(2)).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = random_point(&mut rng, &theory, 2, 6).unwrap();
        let q = random_point(&mut rng, &theory, 2, 6).unwrap();
        for class in JClass::ALL {
            let op = scaling_operator(2, class, &ratio(num, den)).unwrap();
            let lhs = apply_scaling(&op, &p.add(&q).unwrap()).unwrap();
            let rhs = apply_scaling(&op, &p).unwrap().add(&apply_scaling(&op, &q).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }
}
