//! Property tests for pair featurization.

use std::collections::HashMap;

use proptest::prelude::*;

use poslink_core::corpus::PairExample;
use poslink_core::features::{build_dataset, pair_features, FeatureMode, TagCountVector};
use poslink_core::TagSet;

const ALL_MODES: [FeatureMode; 3] = [FeatureMode::Indicator, FeatureMode::Min, FeatureMode::Sum];

fn vector_strategy(n_tags: usize) -> impl Strategy<Value = TagCountVector> {
    prop::collection::vec(0u64..20, n_tags).prop_map(TagCountVector::from_counts)
}

proptest! {
    #[test]
    fn symmetry_bounds_and_gating(
        u in vector_strategy(8),
        v in vector_strategy(8),
        subset in prop::collection::vec(0usize..8, 1..8),
    ) {
        for mode in ALL_MODES {
            let uv = pair_features(&u, &v, &subset, mode).unwrap();
            let vu = pair_features(&v, &u, &subset, mode).unwrap();
            prop_assert_eq!(&uv, &vu, "mode {:?} not symmetric", mode);
            for value in &uv {
                prop_assert!(*value >= 0.0);
            }
        }
        let ind = pair_features(&u, &v, &subset, FeatureMode::Indicator).unwrap();
        let min = pair_features(&u, &v, &subset, FeatureMode::Min).unwrap();
        let sum = pair_features(&u, &v, &subset, FeatureMode::Sum).unwrap();
        for (k, &t) in subset.iter().enumerate() {
            prop_assert!(ind[k] == 0.0 || ind[k] == 1.0);
            prop_assert!(min[k] <= u.count(t) as f64);
            prop_assert!(min[k] <= v.count(t) as f64);
            if ind[k] == 0.0 {
                prop_assert_eq!(min[k], 0.0);
                prop_assert_eq!(sum[k], 0.0);
            }
        }
    }

    /// Row i of build_dataset equals pair_features on pair i.
    #[test]
    fn build_dataset_composes(
        vectors in prop::collection::vec(vector_strategy(5), 4..10),
        seed in 0u64..100,
    ) {
        let tagset = TagSet::new(["CC", "CD", "DT", "NN", "VB"]).unwrap();
        let by_id: HashMap<u64, TagCountVector> = vectors
            .iter()
            .cloned()
            .enumerate()
            .map(|(i, v)| (i as u64, v))
            .collect();
        let n = vectors.len() as u64;
        let mut rng = poslink_core::rng::Rng::seed_from(seed);
        let mut pairs = Vec::new();
        for _ in 0..6 {
            let u = rng.gen_range(n as usize) as u64;
            let v = (u + 1 + rng.gen_range(n as usize - 1) as u64) % n;
            if u != v {
                pairs.push(PairExample { u, v, label: Some((rng.next_u64() & 1) as u8) });
            }
        }
        let tags: Vec<String> = ["NN", "CD"].iter().map(|s| s.to_string()).collect();
        let indices = tagset.resolve(&tags).unwrap();
        for mode in ALL_MODES {
            let matrix =
                build_dataset(&pairs, &by_id, &tagset, &tags, mode, false, None).unwrap();
            prop_assert_eq!(matrix.rows.len(), pairs.len());
            for (row, pair) in matrix.rows.iter().zip(&pairs) {
                let expected =
                    pair_features(&by_id[&pair.u], &by_id[&pair.v], &indices, mode).unwrap();
                prop_assert_eq!(row, &expected);
            }
        }
    }
}
