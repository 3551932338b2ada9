//! Certified Smith normal form: U·M·V = S with unimodular transforms and the
//! divisibility chain, re-verified after each factorization.

use coarsehom::homology::smith_normal_form;
use coarsehom::linalg::IMat;

fn main() {
    let m = IMat::from_rows_i64(&[vec![2, 4, 4], vec![-6, 6, 12], vec![10, 4, 16]]);
    let cert = smith_normal_form(&m);
    println!("invariant factors: {:?}", cert.snf.factors);
    println!("rank: {}", cert.snf.rank);
    println!(
        "certificate: product {}, unimodular {}, divisibility {}",
        cert.product_ok, cert.unimodular_ok, cert.divisibility_ok
    );

    // the boundary matrix of a hollow triangle: one unit factor short of full
    let hollow = IMat::from_rows_i64(&[vec![-1, -1, 0], vec![1, 0, -1], vec![0, 1, 1]]);
    let cert = smith_normal_form(&hollow);
    println!("hollow triangle factors: {:?} (rank {})", cert.snf.factors, cert.snf.rank);
}
