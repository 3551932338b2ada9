//! Group actions on windows: the reflection passes the proper/isocoarse gate,
//! the shear (x,y) ↦ (x+1, 2y) is rejected.

use coarsehom::harness::{generate, ActionKind, ExampleSpec, Family};
use coarsehom::maps::{check_action, ActionGenerator, GroupAction, DEFAULT_WORD_CAP};

fn main() -> coarsehom::Result<()> {
    let gen = generate(&ExampleSpec::new(Family::LatticeZn(1), 6).with_action(ActionKind::Reflection))?;
    let report = check_action(gen.action.as_ref().unwrap(), &gen.space, DEFAULT_WORD_CAP)?;
    println!("reflection proper: {:?}", report.proper);
    println!("reflection isocoarse: {:?}", report.isocoarse);
    println!("gate: {}", report.passes_equivariant_gate());

    let lat = generate(&ExampleSpec::new(Family::LatticeZn(2), 6))?.space;
    let shear: Vec<_> = lat
        .points()
        .map(|p| {
            let lbl = lat.label(p);
            let inner = lbl.trim_start_matches('(').trim_end_matches(')');
            let mut it = inner.splitn(2, ',');
            let x: i64 = it.next().unwrap().parse().unwrap();
            let y: i64 = it.next().unwrap().parse().unwrap();
            lat.index_of_label(&format!("({},{})", x + 1, 2 * y))
        })
        .collect();
    let g = ActionGenerator::new("s", lat.len(), shear)?;
    let action = GroupAction::new(lat.len(), vec![g], vec![], Default::default())?;
    let report = check_action(&action, &lat, 6)?;
    println!("shear isocoarse: {:?}", report.isocoarse);
    println!("shear gate: {}", report.passes_equivariant_gate());
    Ok(())
}
