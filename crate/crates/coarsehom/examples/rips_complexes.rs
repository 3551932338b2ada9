//! Rips complexes and filtrations, with OFF and DOT export.

use coarsehom::rips::{build_filtration, build_rips, to_dot, to_off, window_pair};
use coarsehom::space::CoarseSpace;

fn main() -> coarsehom::Result<()> {
    let line = CoarseSpace::integer_line(0, 20, &[0.0, 1.0, 2.0, 3.0], coarsehom::Ambient::Finite)?;
    let all = line.subset(line.points())?;

    let cx = build_rips(&line, &all, line.chain().level(3), 3, 100_000)?;
    println!("simplex counts at scale 3: {:?}", cx.counts());

    let filt = build_filtration(&line, &all, 2, 100_000)?;
    for (n, level) in filt.levels.iter().enumerate() {
        println!("level {n}: {:?}", level.counts());
    }
    println!("filtration monotone: {}", filt.is_monotone());

    let small = build_rips(&line, &all, line.chain().level(1), 2, 100_000)?;
    println!("OFF header: {:?}", to_off(&small).lines().take(2).collect::<Vec<_>>());
    println!("DOT edges: {}", to_dot(&small, &|p| line.label(p).to_string()).lines().count());

    // window and collar inside a larger presentation
    let big = CoarseSpace::integer_line(
        -8,
        8,
        &[0.0, 1.0, 2.0, 3.0],
        coarsehom::Ambient::Window { family: "z".into(), radius: 8 },
    )?;
    let w = big.subset_where(|l| l.parse::<i64>().unwrap().abs() <= 6);
    let pair = window_pair(&big, &w, 2)?;
    let collar: Vec<&str> = pair.collar.members.iter().map(|&p| big.label(p)).collect();
    println!("collar of the radius-6 window: {collar:?}");
    Ok(())
}
