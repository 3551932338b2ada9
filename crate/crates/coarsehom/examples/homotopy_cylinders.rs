//! Cylinders over a tick grid, subdivision schedules, and the classical lift.

use coarsehom::homotopy::{
    build_cylinder, derive_schedule, lift_classical, merge_tuple, validate_homotopy,
    IntervalGrid, NeighborhoodFamily, Profile,
};
use coarsehom::space::{CoarseSpace, PointId};

fn main() -> coarsehom::Result<()> {
    let x = CoarseSpace::integer_line(-6, 6, &[0.0, 1.0, 2.0, 3.0], coarsehom::Ambient::Finite)?;
    let grid = IntervalGrid::range(0, 3)?;

    let coarse_u = NeighborhoodFamily::full(&grid, x.len());
    let cyl = build_cylinder(&x, &grid, &coarse_u, 2)?;
    println!("cylinder points: {}", cyl.space.len());
    let schedule = derive_schedule(&grid, &coarse_u, None)?;
    println!("full family schedule at point 0: {:?}", schedule.per_point[0]);

    let fine_u = NeighborhoodFamily::adjacent(&grid, x.len());
    let schedule = derive_schedule(&grid, &fine_u, None)?;
    println!("adjacent family schedule: {:?}", schedule.per_point[0]);
    let steps = merge_tuple(&schedule, &[PointId(0), PointId(1)]);
    println!("merged prism steps over an edge: {}", steps.len());

    // lift the classical shift homotopy between id and x+3
    let y = CoarseSpace::integer_line(
        -6,
        9,
        &(0..=8).map(f64::from).collect::<Vec<_>>(),
        coarsehom::Ambient::Finite,
    )?;
    let grid = IntervalGrid::range(-1, 4)?;
    let classical: Vec<Vec<PointId>> = x
        .points()
        .map(|p| {
            let v: i64 = x.label(p).parse().unwrap();
            grid.ticks
                .iter()
                .map(|&t| y.index_of_label(&(v + t.clamp(0, 3)).to_string()).unwrap())
                .collect()
        })
        .collect();
    let lift = lift_classical(
        &x,
        &y,
        &grid,
        &classical,
        &Profile::constant(x.len(), 0),
        &Profile::constant(x.len(), 3),
        2,
    )?;
    let f: Vec<PointId> = x.points().map(|p| y.index_of_label(x.label(p)).unwrap()).collect();
    let g: Vec<PointId> = x
        .points()
        .map(|p| {
            let v: i64 = x.label(p).parse().unwrap();
            y.index_of_label(&(v + 3).to_string()).unwrap()
        })
        .collect();
    let report = validate_homotopy(&lift.cylinder, &y, &lift.assignment, &f, &g, None)?;
    println!("lifted shift homotopy valid: {}", report.is_valid());
    println!("rho- class: {:?}", lift.rho_minus_class);
    Ok(())
}
