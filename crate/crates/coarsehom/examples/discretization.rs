//! Greedy and equivariant discretization with verified postconditions.

use coarsehom::harness::{generate, ActionKind, ExampleSpec, Family};
use coarsehom::maps::{discretize, GreedySeed};

fn main() -> coarsehom::Result<()> {
    let spec = ExampleSpec::new(Family::LatticeZn(1), 6).with_scales(vec![0.0, 1.0, 2.0]);
    let space = generate(&spec)?.space;

    for seed in [GreedySeed::Ascending, GreedySeed::Descending] {
        let d = discretize(&space, 2, None, seed)?;
        let labels: Vec<&str> = d.chosen.members.iter().map(|&p| space.label(p)).collect();
        println!(
            "{seed:?}: chosen {labels:?} separated={} dense={} closeness={:?}",
            d.separated, d.dense, d.closeness
        );
    }

    let gen = generate(
        &ExampleSpec::new(Family::LatticeZn(1), 6)
            .with_scales(vec![0.0, 1.0, 2.0])
            .with_action(ActionKind::Reflection),
    )?;
    let d = discretize(&gen.space, 2, gen.action.as_ref(), GreedySeed::Ascending)?;
    let labels: Vec<&str> = d.chosen.members.iter().map(|&p| gen.space.label(p)).collect();
    println!("equivariant: chosen {labels:?} equivariant={}", d.equivariant);
    Ok(())
}
