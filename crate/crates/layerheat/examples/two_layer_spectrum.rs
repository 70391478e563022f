//! Two-layer strip eigenvalues: numeric roots against the zero- and
//! first-order approximations, with relative errors per index.

use layerheat::spectrum::{find_eigenvalues, lambda_approx, FirstOrder, LayerGrid};

fn main() -> layerheat::Result<()> {
    let (s1, s2, l1, l2) = (7.0, 0.7, 1.2, 1.0);
    let grid = LayerGrid::new(vec![0.0, l1, l1 + l2], vec![s1, s2])?;
    let roots = find_eigenvalues(&grid, 30)?;
    println!("{:>3} {:>12} {:>10} {:>10}", "n", "lambda", "err0", "err1");
    for (i, r) in roots.iter().enumerate() {
        let n = i + 1;
        let l0 = lambda_approx(s1, s2, l1, l2, n, 0, FirstOrder::Displayed)?;
        let l1st = lambda_approx(s1, s2, l1, l2, n, 1, FirstOrder::Displayed)?;
        let rel = |v: f64| (v - r.lambda).abs() / r.lambda;
        println!("{n:>3} {:>12.6} {:>10.4} {:>10.4}", r.lambda, rel(l0), rel(l1st));
    }
    Ok(())
}
