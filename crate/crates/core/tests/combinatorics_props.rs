use proptest::prelude::*;

use egdef::combinatorics::{
    count_multi_indices, enumerate_multi_indices, enumerate_subsets, moebius_transform, zeta_transform, IndexSet,
    SubsetFunction, SubsetMask,
};

proptest! {
    #[test]
    fn moebius_inverts_zeta(values in (1usize..=8).prop_flat_map(|n| prop::collection::vec(-50i64..50, 1 << n))) {
        let n = values.len().trailing_zeros() as usize;
        let f = SubsetFunction::from_vec(n, values).unwrap();
        prop_assert_eq!(moebius_transform(&zeta_transform(&f)), f.clone());
        prop_assert_eq!(zeta_transform(&moebius_transform(&f)), f);
    }

    #[test]
    fn complement_is_an_involution(n in 1usize..=20, bits in any::<u64>()) {
        let s = SubsetMask::from_bits(n, bits & ((1u64 << n) - 1)).unwrap();
        prop_assert_eq!(s.complement().complement(), s);
        prop_assert_eq!(s.len() + s.complement().len(), n);
    }

    #[test]
    fn multi_index_count_matches_enumeration(m in 1usize..=4, order in 0u32..=5) {
        prop_assert_eq!(enumerate_multi_indices(m, order).len() as u64, count_multi_indices(m, order as i64));
    }
}

#[test]
fn subsets_of_size_at_least_two() {
    for n in 2..=10 {
        let expected = (1usize << n) - n - 1;
        assert_eq!(enumerate_subsets(IndexSet::new(n).unwrap(), 2).len(), expected);
    }
}
