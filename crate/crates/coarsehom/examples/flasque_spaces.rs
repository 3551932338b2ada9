//! Flasqueness: the ray shift passes all three conditions, the two-sided
//! shift fails eventual escape, and the chain contraction telescopes.

use coarsehom::complexes::{apply_boundary, flasque_contraction, iterate_chain, CoarseChain};
use coarsehom::harness::{flasque_tower, ExampleSpec, Family};
use coarsehom::homotopy::flasque_check;

fn main() -> coarsehom::Result<()> {
    let ray = ExampleSpec::new(Family::Ray, 16);
    let data = flasque_tower(&ray, &[16, 24], |l| (l.parse::<i64>().unwrap() + 1).to_string())?;
    let report = flasque_check(&data, 40, None)?;
    println!("ray shift closeness level: {:?}", report.closeness);
    println!("ray shift escape: {:?}", report.escape);
    println!("ray shift passes: {}", report.passes());

    let line = ExampleSpec::new(Family::LatticeZn(1), 6);
    let data = flasque_tower(&line, &[6, 9], |l| (l.parse::<i64>().unwrap() + 1).to_string())?;
    let report = flasque_check(&data, 30, None)?;
    println!("line shift escape: {:?}", report.escape);
    println!("line shift passes: {}", report.passes());

    // the contraction identity ∂s + s∂ = id − (φ^N)_* on the ray
    let space = coarsehom::harness::generate(&ExampleSpec::new(Family::Ray, 30))?.space;
    let phi: Vec<_> = space
        .points()
        .map(|p| {
            let v: i64 = space.label(p).parse().unwrap();
            space.index_of_label(&(v + 1).to_string())
        })
        .collect();
    let c = CoarseChain::generator(vec![space.index_of_label("0").unwrap()], 1);
    let s_c = flasque_contraction(&phi, &c, 25)?;
    let lhs = apply_boundary(&s_c).add(&flasque_contraction(&phi, &apply_boundary(&c), 25)?);
    let rhs = c.sub(&iterate_chain(&phi, &c, 25)?);
    println!("contraction identity holds: {}", lhs == rhs);
    Ok(())
}
