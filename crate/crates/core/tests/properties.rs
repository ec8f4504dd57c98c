mod common;

use common::*;
use groupforge::balancing::{
    mixture_plan, subset_balanced, subset_to_ratio, upsampling_plan, upweighting_plan,
    BalancingStrategy,
};
use groupforge::group::class_imbalance_ratio;
use groupforge::metrics::{
    average_accuracy, per_group_accuracy, worst_class_accuracy, worst_group_accuracy,
    GroupAccuracies,
};
use groupforge::rng::seeded;
use groupforge::spectral::{
    covariance_of, covariance_spectrum, intra_class_rho, FeatureBank, Spectra,
};
use groupforge::{build_partition, GroupSchema, LabeledDataset, Matrix};
use proptest::prelude::*;

/// Group counts with every class nonempty.
fn counts_strategy() -> impl Strategy<Value = (GroupSchema, Vec<usize>)> {
    (1usize..4, 1usize..4)
        .prop_flat_map(|(c, s)| {
            let schema = GroupSchema::new(c + 1, s);
            (
                Just(schema),
                prop::collection::vec(0usize..60, schema.num_groups()),
            )
        })
        .prop_filter("every class nonempty", |(schema, counts)| {
            (0..schema.num_classes)
                .all(|y| schema.groups_of_class(y).map(|g| counts[g]).sum::<usize>() > 0)
        })
}

fn shuffled_dataset(schema: GroupSchema, counts: &[usize], seed: u64) -> LabeledDataset {
    use rand::seq::SliceRandom;
    let base = counts_dataset(counts, schema);
    let mut order: Vec<usize> = (0..base.len()).collect();
    order.shuffle(&mut seeded(seed));
    base.select(&order).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn partition_covers_every_example((schema, counts) in counts_strategy(), seed in 0u64..1000) {
        let data = shuffled_dataset(schema, &counts, seed);
        let p = build_partition(&data, schema).unwrap();
        prop_assert_eq!(p.group_sizes().iter().sum::<usize>(), data.len());
        prop_assert_eq!(p.class_sizes().iter().sum::<usize>(), data.len());
        prop_assert_eq!(p.group_sizes(), counts.clone());
        for g in 0..schema.num_groups() {
            let class = p.class(schema.class_of(g));
            for i in p.group(g) {
                prop_assert!(class.binary_search(i).is_ok());
                prop_assert_eq!(data.class_labels()[*i], schema.class_of(g));
            }
        }
        let again = build_partition(&data, schema).unwrap();
        prop_assert_eq!(format!("{again:?}"), format!("{p:?}"));
    }

    #[test]
    fn upsampling_matches_upweighting_in_expectation(
        (schema, counts) in counts_strategy(),
        losses_seed in 0u64..1000,
    ) {
        use rand::Rng;
        let p = partition(&counts, schema);
        let all: Vec<usize> = (0..p.num_examples()).collect();
        let up = upsampling_plan(&p, &all).unwrap();
        let w = upweighting_plan(&p).unwrap();
        let mut rng = seeded(losses_seed);
        let losses: Vec<f64> = all.iter().map(|_| rng.random_range(0.0..10.0)).collect();
        let e_up: f64 = up.active().iter().zip(up.probabilities()).map(|(&i, q)| q * losses[i]).sum();
        let e_w = w.weights().iter().zip(&losses).map(|(a, l)| a * l).sum::<f64>()
            / w.weights().iter().sum::<f64>();
        prop_assert!((e_up - e_w).abs() <= 1e-10 * e_up.abs().max(1.0));
    }

    #[test]
    fn mixture_endpoints((schema, counts) in counts_strategy(), seed in 0u64..1000) {
        let p = partition(&counts, schema);
        let sub = subset_balanced(&p, &mut seeded(seed)).unwrap();
        let mix = mixture_plan(&p, 1.0, &mut seeded(seed)).unwrap();
        prop_assert_eq!(mix.active(), &sub[..]);
        let original = class_imbalance_ratio(&p).unwrap();
        let all: Vec<usize> = (0..p.num_examples()).collect();
        prop_assert_eq!(mixture_plan(&p, original, &mut seeded(seed)).unwrap(), upsampling_plan(&p, &all).unwrap());
    }

    #[test]
    fn subsetting_is_monotone_in_ratio((schema, counts) in counts_strategy(), a in 0.0f64..1.0, b in 0.0f64..1.0, seed in 0u64..100) {
        let p = partition(&counts, schema);
        let original = class_imbalance_ratio(&p).unwrap();
        let (lo, hi) = (a.min(b), a.max(b));
        let r1 = 1.0 + lo * (original - 1.0);
        let r2 = 1.0 + hi * (original - 1.0);
        let count = |idx: &[usize]| {
            let mut c = vec![0; schema.num_classes];
            for &i in idx {
                c[p.class_of_example(i)] += 1;
            }
            c
        };
        let c1 = count(&subset_to_ratio(&p, r1, &mut seeded(seed)).unwrap());
        let c2 = count(&subset_to_ratio(&p, r2, &mut seeded(seed + 1)).unwrap());
        for y in 0..schema.num_classes {
            prop_assert!(c1[y] <= c2[y]);
        }
    }

    #[test]
    fn plans_reproduce_under_fixed_seed((schema, counts) in counts_strategy(), seed in 0u64..1000) {
        let p = partition(&counts, schema);
        for s in [
            BalancingStrategy::None,
            BalancingStrategy::Subsetting,
            BalancingStrategy::Upsampling,
            BalancingStrategy::Upweighting,
            BalancingStrategy::Mixture(1.0),
        ] {
            let a = s.resolve(&p, &mut seeded(seed)).unwrap();
            let b = s.resolve(&p, &mut seeded(seed)).unwrap();
            prop_assert_eq!(&a, &b);
            let da = a.sampling.sampler().draw(50, &mut seeded(seed));
            let db = b.sampling.sampler().draw(50, &mut seeded(seed));
            prop_assert_eq!(da, db);
        }
    }

    #[test]
    fn accuracy_ordering(
        pairs in prop::collection::vec((0usize..40, 1usize..40), 1..8),
        weights in prop::collection::vec(0.01f64..1.0, 8),
    ) {
        let total: Vec<usize> = pairs.iter().map(|&(_, t)| t).collect();
        let correct: Vec<usize> = pairs.iter().map(|&(c, t)| c.min(t)).collect();
        let acc = GroupAccuracies::new(correct, total).unwrap();
        let (wga, _) = worst_group_accuracy(&acc).unwrap();
        let best = acc.present().map(|(_, a)| a).fold(0.0, f64::max);
        let w = &weights[..acc.num_groups()];
        for avg in [average_accuracy(&acc, None).unwrap(), average_accuracy(&acc, Some(w)).unwrap()] {
            prop_assert!(wga <= avg + 1e-12 && avg <= best + 1e-12);
        }
    }

    #[test]
    fn worst_class_bounds_worst_group((schema, counts) in counts_strategy(), seed in 0u64..1000) {
        use rand::Rng;
        let data = shuffled_dataset(schema, &counts, seed);
        let p = build_partition(&data, schema).unwrap();
        let mut rng = seeded(seed);
        let preds: Vec<usize> = (0..data.len()).map(|_| rng.random_range(0..schema.num_classes)).collect();
        let (wga, _) = worst_group_accuracy(&per_group_accuracy(&preds, data.class_labels(), &p).unwrap()).unwrap();
        let (wca, _) = worst_class_accuracy(&preds, data.class_labels(), &p).unwrap();
        prop_assert!(wca >= wga - 1e-12);
    }

    #[test]
    fn worst_group_follows_permutation(
        pairs in prop::collection::vec((0usize..40, 1usize..40), 2..8),
        shift in 1usize..7,
    ) {
        let k = pairs.len();
        let total: Vec<usize> = pairs.iter().map(|&(_, t)| t).collect();
        let correct: Vec<usize> = pairs.iter().map(|&(c, t)| c.min(t)).collect();
        // perm[g] is the new id of group g
        let perm: Vec<usize> = (0..k).map(|g| (g + shift) % k).collect();
        let mut pc = vec![0; k];
        let mut pt = vec![0; k];
        for g in 0..k {
            pc[perm[g]] = correct[g];
            pt[perm[g]] = total[g];
        }
        let a = GroupAccuracies::new(correct, total).unwrap();
        let b = GroupAccuracies::new(pc, pt).unwrap();
        let (va, _) = worst_group_accuracy(&a).unwrap();
        let (vb, gb) = worst_group_accuracy(&b).unwrap();
        prop_assert_eq!(va, vb);
        let original = perm.iter().position(|&p| p == gb).unwrap();
        prop_assert_eq!(a.accuracy(original), Some(vb));
    }

    #[test]
    fn spectra_are_psd_and_trace_preserving(seed in 0u64..500, n in 2usize..40, d in 1usize..8) {
        let z = gaussian_matrix(n, d, &mut seeded(seed));
        let idx: Vec<usize> = (0..n).collect();
        let cov = covariance_of(&z, &idx).unwrap();
        let spectrum = covariance_spectrum(&cov).unwrap();
        prop_assert!(spectrum.iter().all(|&l| l >= 0.0));
        prop_assert!(spectrum.windows(2).all(|w| w[0] >= w[1]));
        let t = cov.trace();
        prop_assert!((spectrum.iter().sum::<f64>() - t).abs() <= 1e-9 * t.max(1e-300));
    }

    #[test]
    fn spectra_rotation_and_scale(seed in 0u64..500, c in 0.01f64..100.0) {
        let mut rng = seeded(seed);
        let schema = GroupSchema::new(2, 2);
        let data = random_labeled(80, 4, schema, &mut rng);
        let q = random_orthogonal(4, &mut rng);
        let rotated = data.with_features(data.features().matmul(&q.transpose())).unwrap();
        let scaled_data = data.with_features(scaled(data.features(), c)).unwrap();
        let base = Spectra::compute(&FeatureBank::new(data.clone(), schema).unwrap()).unwrap();
        let rot = Spectra::compute(&FeatureBank::new(rotated.clone(), schema).unwrap()).unwrap();
        let sc = Spectra::compute(&FeatureBank::new(scaled_data.clone(), schema).unwrap()).unwrap();
        let tb = base.top_k(4);
        let tr = rot.top_k(4);
        let ts = sc.top_k(4);
        for g in 0..4 {
            let (b, r, s) = (tb.groups[g].as_ref().unwrap(), tr.groups[g].as_ref().unwrap(), ts.groups[g].as_ref().unwrap());
            let scale = b[0].max(1.0);
            for i in 0..b.len() {
                prop_assert!((b[i] - r[i]).abs() <= 1e-8 * scale);
                prop_assert!((c * c * b[i] - s[i]).abs() <= 1e-8 * c * c * scale);
            }
        }
        let rho = intra_class_rho(&FeatureBank::new(data, schema).unwrap()).unwrap();
        let rho_r = intra_class_rho(&FeatureBank::new(rotated, schema).unwrap()).unwrap();
        let rho_s = intra_class_rho(&FeatureBank::new(scaled_data, schema).unwrap()).unwrap();
        for y in 0..2 {
            let (a, b, s) = (rho[y].unwrap(), rho_r[y].unwrap(), rho_s[y].unwrap());
            prop_assert!((a - b).abs() <= 1e-8 * a.max(1.0));
            prop_assert!((a - s).abs() <= 1e-8 * a.max(1.0));
        }
    }
}

#[test]
fn covariance_rejects_empty_index_set() {
    assert!(covariance_of(&Matrix::zeros(3, 2), &[]).is_err());
}
