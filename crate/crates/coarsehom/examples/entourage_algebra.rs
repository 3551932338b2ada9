//! Entourage algebra on a finite presentation: composition, penumbras,
//! boundedness, products, and the excisiveness test.

use coarsehom::space::{
    check_excisive, is_bounded, penumbra, product, CoarseSpace, DEFAULT_PRODUCT_CAP,
};
use std::collections::BTreeSet;

fn main() -> coarsehom::Result<()> {
    let line = CoarseSpace::integer_line(-6, 6, &[0.0, 1.0, 2.0, 3.0], coarsehom::Ambient::Finite)?;
    println!("space: 13 points, chain depth {}", line.depth());

    let e1 = line.chain().level(1);
    let e2 = line.chain().level(2);
    println!("|E_1| = {} ordered pairs, |E_2| = {}", e1.len(), e2.len());
    println!("E_1 ∘ E_1 == E_2: {}", e1.compose(e1)? == *e2);
    println!("E_1 inverse is E_1 (symmetric): {}", e1.inverse() == *e1);

    let zero = line.index_of_label("0").unwrap();
    let ball = penumbra(e2, &BTreeSet::from([zero]));
    let labels: Vec<&str> = ball.iter().map(|&p| line.label(p)).collect();
    println!("E_2-ball around 0: {labels:?}");

    let k = line.subset_where(|l| l.parse::<i64>().unwrap().abs() <= 2);
    println!("boundedness of [-2,2]: {:?}", is_bounded(&line, &k));

    let square = product(&line, &line, DEFAULT_PRODUCT_CAP)?;
    println!("product has {} points at depth {}", square.len(), square.depth());

    let a = line.subset_where(|l| l.parse::<i64>().unwrap() <= 0);
    let b = line.subset_where(|l| l.parse::<i64>().unwrap() >= 0);
    println!("half lines excisive: {:?}", check_excisive(&line, &a, &b));

    let a2 = line.subset_where(|l| l.parse::<i64>().unwrap() <= -1);
    println!("disjoint adjacent halves: {:?}", check_excisive(&line, &a2, &b));
    Ok(())
}
