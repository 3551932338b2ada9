//! The Mayer–Vietoris sequence of the line split at zero: every node exact,
//! and the connecting map realizes H_1(line) ≅ H_0({0}).

use coarsehom::complexes::CoefficientModule;
use coarsehom::homology::mayer_vietoris;
use coarsehom::linalg::Ring;
use coarsehom::space::CoarseSpace;

fn main() -> coarsehom::Result<()> {
    let big = CoarseSpace::integer_line(
        -8,
        8,
        &[0.0, 1.0, 2.0, 3.0],
        coarsehom::Ambient::Window { family: "z".into(), radius: 8 },
    )?;
    let w = big.subset_where(|l| l.parse::<i64>().unwrap().abs() <= 6);
    let (line, _) = big.subspace(&w);
    let collar = line.subset_where(|l| l.parse::<i64>().unwrap().abs() >= 5);
    let a = line.subset_where(|l| l.parse::<i64>().unwrap() <= 0);
    let b = line.subset_where(|l| l.parse::<i64>().unwrap() >= 0);

    let coeffs = CoefficientModule::trivial(Ring::Z)?;
    let mv = mayer_vietoris(&line, &a, &b, 1, 1, &coeffs, Some(&collar), 200_000)?;

    for (name, rep) in &mv.nodes {
        println!("node {name}: exact = {}", rep.exact);
    }
    println!("H_1(X) = Z^{}", mv.h_x[1].betti());
    println!("H_0(A∩B) = Z^{}", mv.h_cap[0].betti());
    println!("∂^MV is an isomorphism: {}", mv.connecting[1].is_isomorphism());
    Ok(())
}
