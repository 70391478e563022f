//! Sifting a smooth bump through the continuous-spectrum delta
//! representation of a three-layer line.

use layerheat::mixed::{sift, three_layer_zeros, MixedMedium};

fn main() -> layerheat::Result<()> {
    let medium = MixedMedium::three_layer(0.8, 1.5, 0.6, -0.3, 0.4)?;
    let bump = |x: f64| {
        let u = (x - 0.1) / 0.9;
        if u.abs() >= 1.0 {
            0.0
        } else {
            (1.0 - 1.0 / (1.0 - u * u)).exp()
        }
    };
    for x0 in [-0.5, -0.2, 0.05, 0.3, 0.7] {
        let v = sift(&medium, bump, (-0.8, 1.0), x0, 120.0)?;
        println!("x0 = {x0:>5.2}: sifted {v:.6}, exact {:.6}, error {:.1e}", bump(x0), (v - bump(x0)).abs());
    }
    for z in three_layer_zeros(&medium, 3)? {
        println!("determinant zero n = {:>2}: k = {:.6}", z.n, z.k);
    }
    Ok(())
}
