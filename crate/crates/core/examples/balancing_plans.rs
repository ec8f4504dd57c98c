//! Active sets, draw probabilities and loss weights for each balancing strategy on
//! Waterbirds-sized group counts.

use groupforge::balancing::BalancingStrategy;
use groupforge::rng::seeded;
use groupforge::{build_partition, GroupSchema, LabeledDataset, Matrix};

fn main() -> groupforge::Result<()> {
    let schema = GroupSchema::new(2, 2);
    let counts = [3498, 184, 56, 1057];
    let mut ys = Vec::new();
    let mut ss = Vec::new();
    for (g, &c) in counts.iter().enumerate() {
        ys.extend(std::iter::repeat_n(schema.class_of(g), c));
        ss.extend(std::iter::repeat_n(schema.spurious_of(g), c));
    }
    let data = LabeledDataset::new(Matrix::zeros(ys.len(), 1), ys, ss)?;
    let partition = build_partition(&data, schema)?;
    println!(
        "class sizes {:?}, imbalance ratio {:.3}",
        partition.class_sizes(),
        partition.class_imbalance_ratio()?
    );

    for strategy in [
        BalancingStrategy::None,
        BalancingStrategy::Subsetting,
        BalancingStrategy::Upsampling,
        BalancingStrategy::Upweighting,
        BalancingStrategy::Mixture(2.0),
    ] {
        let plan = strategy.resolve(&partition, &mut seeded(0))?;
        let mut mass = [0.0; 2];
        let mut active = [0usize; 2];
        for (&i, &p) in plan
            .sampling
            .active()
            .iter()
            .zip(plan.sampling.probabilities())
        {
            mass[partition.class_of_example(i)] += p;
            active[partition.class_of_example(i)] += 1;
        }
        let weights = [
            plan.weights.weight(partition.class(0)[0]),
            plan.weights.weight(partition.class(1)[0]),
        ];
        println!(
            "{strategy:<12} active {active:?}  class draw mass [{:.3}, {:.3}]  loss weights [{:.3}, {:.3}]",
            mass[0], mass[1], weights[0], weights[1]
        );
    }

    let plan = BalancingStrategy::Upsampling.resolve(&partition, &mut seeded(0))?;
    let batch = plan.sampling.sampler().draw(32, &mut seeded(1));
    let minority = batch
        .iter()
        .filter(|&&i| partition.class_of_example(i) == 1)
        .count();
    println!("one upsampled batch of 32 holds {minority} class-1 examples");
    Ok(())
}
