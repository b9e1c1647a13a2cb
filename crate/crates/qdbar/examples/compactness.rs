//! Norms of the parametrix blocks `T⁽ⁿ⁻¹⁾V⁽ⁿ⁻¹⁾` decay with the mode.

use qdbar::aps::{compactness_evidence, ApsParams, ApsSystem};
use qdbar::fourier::FourierSpace;
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ws = eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        200,
    )?;
    let sp = FourierSpace::new(&ws, 16)?;
    let sys = ApsSystem::new(&sp, ApsParams::disk(0))?;
    let w0 = ws.w(0);
    println!(
        "{:>3} {:>12} {:>12} {:>12}",
        "n", "bound", "closed form", "measured"
    );
    for b in compactness_evidence(&sys, 12)? {
        let closed = 2f64.powf(-(2.0 * b.n as f64 - 1.0) / 4.0) / w0;
        println!(
            "{:>3} {:>12.6e} {:>12.6e} {:>12.6e}",
            b.n, b.stated_bound, closed, b.measured
        );
    }
    Ok(())
}
