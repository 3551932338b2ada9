//! Coarse map predicates across window stages: controlledness witnesses,
//! properness by tower stability, closeness, and equivalence certificates.

use coarsehom::harness::{map_tower, ExampleSpec, Family};
use coarsehom::maps::{are_close, check_map_properties, verify_equivalence, CoarseMap};

fn main() -> coarsehom::Result<()> {
    let spec = ExampleSpec::new(Family::LatticeZn(1), 6);

    // the shift x+1 is an isometry of the line
    let shift = map_tower(&spec, &[6, 9, 12], 1, |l| {
        (l.parse::<i64>().unwrap() + 1).to_string()
    })?;
    let report = check_map_properties(&shift)?;
    println!("shift controlled witnesses: {:?}", report.controlled.per_level);
    println!("shift proper: {:?}", report.proper);

    // the constant map collapses everything and fails properness
    let constant = map_tower(&spec, &[6, 9, 12], 0, |_| "0".into())?;
    let report = check_map_properties(&constant)?;
    println!("constant proper: {:?}", report.proper);

    // closeness of id and the shift
    let id = map_tower(&spec, &[6, 9, 12], 1, |l| l.to_string())?;
    println!("id vs shift: {:?}", are_close(&id, &shift)?);

    // the even sublattice inclusion is a coarse equivalence
    let full = coarsehom::CoarseSpace::integer_line(
        -10,
        10,
        &(0..=8).map(f64::from).collect::<Vec<_>>(),
        coarsehom::Ambient::Finite,
    )?;
    let evens = full.subset_where(|l| l.parse::<i64>().unwrap() % 2 == 0);
    let (sub, back) = full.subspace(&evens);
    let incl = CoarseMap::single(sub.clone(), full.clone(), back)?;
    let round: Vec<_> = full
        .points()
        .map(|p| {
            let v: i64 = full.label(p).parse().unwrap();
            let even = if v.rem_euclid(2) == 0 { v } else { v - 1 };
            sub.index_of_label(&even.to_string()).unwrap()
        })
        .collect();
    let proj = CoarseMap::single(full, sub, round)?;
    let eq = verify_equivalence(&incl, &proj)?;
    println!(
        "even inclusion is an equivalence: {} (closeness {:?})",
        eq.is_equivalence(),
        eq.forward_then_backward_close
    );
    Ok(())
}
