//! Forward and inverse oscillating transform of a smooth bump straddling the
//! interface of a two-media line.

use layerheat::oit::{oit_inverse, SampledImage, Support, TwoLayerMedium};

fn main() -> layerheat::Result<()> {
    let medium = TwoLayerMedium::new(0.2, 0.6, 1.7)?;
    let (a, b) = (-1.0, 1.8);
    let f = move |x: f64| if x <= a || x >= b { 0.0 } else { ((x - a) * (b - x)).powi(6) * (x - 0.2).powi(4) };
    let image = SampledImage::forward(f, Support { lo: a, hi: b }, &medium, 400.0, 400, 1e-13)?;
    println!("{:>8} {:>14} {:>14} {:>10}", "x", "f", "inverse", "cutoff");
    for k in 0..=14 {
        let x = a + (b - a) * k as f64 / 14.0;
        let v = oit_inverse(&image, &medium, x, 1e-6)?;
        println!("{x:>8.3} {:>14.6e} {:>14.6e} {:>10.1e}", f(x), v.value, v.truncation);
    }
    Ok(())
}
