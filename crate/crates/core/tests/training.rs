mod common;

use common::*;
use groupforge::balancing::BalancingStrategy;
use groupforge::model::{train, Schedule, TrainConfig};
use groupforge::rng::{seeded, stream, streams};
use groupforge::synthetic::{generate, preset, SyntheticSpec};
use groupforge::{
    build_partition, Architecture, Error, GroupSchema, LabeledDataset, Matrix, ModelParams,
};

fn config(epochs: usize, batch_size: usize, lr: f64) -> TrainConfig {
    TrainConfig {
        epochs,
        batch_size,
        lr,
        weight_decay: 1e-4,
        schedule: Schedule::Cosine,
        weighted_average: false,
    }
}

fn small_spec() -> SyntheticSpec {
    let mut spec = preset("waterbirds-like").unwrap();
    spec.m = 600;
    spec
}

/// Per-class truncation to the size of the smallest class.
fn class_balanced(data: &LabeledDataset, schema: GroupSchema) -> LabeledDataset {
    let p = build_partition(data, schema).unwrap();
    let n = *p.class_sizes().iter().min().unwrap();
    let mut keep: Vec<usize> = (0..schema.num_classes)
        .flat_map(|y| p.class(y)[..n].to_vec())
        .collect();
    keep.sort_unstable();
    data.select(&keep).unwrap()
}

#[test]
fn balanced_data_makes_strategies_equivalent() {
    let spec = preset("multinli-like").unwrap().with_size(900);
    let data = class_balanced(&generate(&spec, &mut seeded(3)).unwrap(), spec.schema);
    let test = generate(&spec.with_size(300), &mut seeded(4)).unwrap();
    let cfg = config(3, 16, 1e-2);
    let run = |s| train(&data, &test, spec.schema, s, Architecture::Linear, &cfg, 11).unwrap();
    let reference = run(BalancingStrategy::None);
    for s in [
        BalancingStrategy::Subsetting,
        BalancingStrategy::Upsampling,
        BalancingStrategy::Upweighting,
        BalancingStrategy::Mixture(1.0),
    ] {
        let out = run(s);
        assert_eq!(
            out.plan.sampling.active(),
            reference.plan.sampling.active(),
            "{s}"
        );
        assert_eq!(out.trace, reference.trace, "{s}");
        assert_eq!(out.params, reference.params, "{s}");
    }
}

#[test]
fn training_is_bit_reproducible() {
    let spec = small_spec();
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let test = generate(&spec.with_size(200), &mut seeded(2)).unwrap();
    let cfg = config(3, 32, 1e-2);
    for arch in [Architecture::Linear, Architecture::OneHidden { width: 6 }] {
        let a = train(
            &data,
            &test,
            spec.schema,
            BalancingStrategy::Mixture(2.0),
            arch,
            &cfg,
            5,
        )
        .unwrap();
        let b = train(
            &data,
            &test,
            spec.schema,
            BalancingStrategy::Mixture(2.0),
            arch,
            &cfg,
            5,
        )
        .unwrap();
        assert_eq!(a.params, b.params);
        assert_eq!(a.trace, b.trace);
        let c = train(
            &data,
            &test,
            spec.schema,
            BalancingStrategy::Mixture(2.0),
            arch,
            &cfg,
            6,
        )
        .unwrap();
        assert_ne!(a.params, c.params);
    }
}

#[test]
fn separable_data_interpolates() {
    let mut spec = small_spec();
    spec.sigma = 0.05;
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let test = generate(&spec.with_size(200), &mut seeded(2)).unwrap();
    for arch in [Architecture::Linear, Architecture::OneHidden { width: 16 }] {
        let out = train(
            &data,
            &test,
            spec.schema,
            BalancingStrategy::None,
            arch,
            &config(20, 32, 1e-2),
            0,
        )
        .unwrap();
        let last = out.trace.last().unwrap();
        assert_eq!(last.train_acc, 1.0, "{arch:?}");
        assert_eq!(last.wga, 1.0, "{arch:?}");
    }
}

#[test]
fn full_batch_loss_is_non_increasing() {
    let mut spec = small_spec();
    spec.sigma = 0.3;
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let test = generate(&spec.with_size(100), &mut seeded(2)).unwrap();
    // batch = m, but drawn with replacement, so single epochs carry sampling noise
    let cfg = TrainConfig {
        schedule: Schedule::Constant,
        ..config(60, data.len(), 1e-3)
    };
    let out = train(
        &data,
        &test,
        spec.schema,
        BalancingStrategy::None,
        Architecture::Linear,
        &cfg,
        0,
    )
    .unwrap();
    let losses: Vec<f64> = out.trace.epochs.iter().map(|r| r.train_loss).collect();
    let rises: Vec<(usize, f64)> = losses
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] > w[0] + 1e-6)
        .map(|(i, w)| (i + 1, w[1] - w[0]))
        .collect();
    assert!(losses.last().unwrap() < &losses[0]);
    let block = |k: usize| losses[k * 10..(k + 1) * 10].iter().sum::<f64>() / 10.0;
    for k in 1..6 {
        assert!(
            block(k) <= block(k - 1) + 1e-6,
            "block {k}: rises {rises:?}"
        );
    }
}

#[test]
fn exact_full_batch_gradient_descent_is_monotone() {
    // deterministic full-batch descent through the public gradient, as an oracle for
    // the sampling-free case
    use groupforge::model::{backward, AdamW, AdamWConfig};
    let mut spec = small_spec();
    spec.sigma = 0.3;
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let x = data.features();
    let xs: Vec<&[f64]> = (0..data.len()).map(|i| x.row(i)).collect();
    let ws = vec![1.0; data.len()];
    let mut params = ModelParams::init(Architecture::Linear, data.dim(), 2, &mut seeded(0));
    let mut opt = AdamW::new(
        AdamWConfig {
            lr: 1e-3,
            weight_decay: 0.0,
            ..Default::default()
        },
        &params,
    );
    let mut prev = f64::INFINITY;
    for _ in 0..100 {
        let (loss, grads) = backward(&params, &xs, data.class_labels(), &ws).unwrap();
        assert!(loss <= prev + 1e-6, "{loss} > {prev}");
        prev = loss;
        opt.step(&mut params, &grads, 1.0);
    }
}

#[test]
fn divergence_is_reported() {
    let spec = small_spec();
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let test = generate(&spec.with_size(50), &mut seeded(2)).unwrap();
    let cfg = TrainConfig {
        schedule: Schedule::Constant,
        weight_decay: 0.0,
        ..config(3, 8, 1e307)
    };
    let err = train(
        &data,
        &test,
        spec.schema,
        BalancingStrategy::None,
        Architecture::Linear,
        &cfg,
        0,
    )
    .unwrap_err();
    assert!(matches!(err, Error::Divergence { .. }), "{err}");
}

#[test]
fn spurious_shortcut_hurts_minority_groups() {
    // mu_spur > mu_core: without balancing, minority groups trail their class majority
    let spec = preset("waterbirds-like").unwrap().with_size(3000);
    let data = generate(&spec, &mut stream(0, streams::TRAIN_DATA)).unwrap();
    let test = generate(&spec.with_size(4000), &mut stream(0, streams::TEST_DATA)).unwrap();
    let p = build_partition(&test, spec.schema).unwrap();
    for seed in 0..3 {
        let out = train(
            &data,
            &test,
            spec.schema,
            BalancingStrategy::None,
            Architecture::Linear,
            &config(30, 64, 1e-2),
            seed,
        )
        .unwrap();
        let last = out.trace.last().unwrap();
        for y in 0..2 {
            let mm = groupforge::group::intra_class_min_maj(&p, y).unwrap();
            let (min, maj) = (
                last.test_groups.accuracy(mm.min).unwrap(),
                last.test_groups.accuracy(mm.maj).unwrap(),
            );
            assert!(
                min < maj,
                "seed {seed} class {y}: minority {min} vs majority {maj}"
            );
        }
    }
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    for arch in [Architecture::Linear, Architecture::OneHidden { width: 5 }] {
        let params = ModelParams::init(arch, 4, 3, &mut seeded(9));
        let path = dir.path().join("model.gfm");
        params.save(&path).unwrap();
        let back = ModelParams::load(&path).unwrap();
        assert_eq!(back, params);
        let x = gaussian_matrix(3, 4, &mut seeded(1));
        assert_eq!(back.features(&x).unwrap(), params.features(&x).unwrap());
    }
    std::fs::write(dir.path().join("bad.gfm"), b"GFM2xxxx").unwrap();
    assert!(ModelParams::load(dir.path().join("bad.gfm")).is_err());
}

#[test]
fn shape_mismatch_is_rejected() {
    let spec = small_spec();
    let data = generate(&spec, &mut seeded(1)).unwrap();
    let test =
        LabeledDataset::new(Matrix::zeros(4, 3), vec![0, 1, 0, 1], vec![0, 0, 1, 1]).unwrap();
    let err = train(
        &data,
        &test,
        spec.schema,
        BalancingStrategy::None,
        Architecture::Linear,
        &config(1, 8, 1e-3),
        0,
    );
    assert!(matches!(err, Err(Error::Shape(_))));
}
