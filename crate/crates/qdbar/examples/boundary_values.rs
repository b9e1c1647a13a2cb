//! Boundary symbols of kernel elements: they vanish at every frequency the
//! boundary condition excludes.

use qdbar::aps::{ApsParams, ApsSystem};
use qdbar::fourier::FourierSpace;
use qdbar::jacobi::End;
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ws = eval_weights(
        &WeightFamily::SigmoidAnnulus {
            rho_minus: 1.0,
            rho_plus: 2.0,
            q: 2.0,
        },
        DomainKind::Annulus,
        120,
    )?;
    let sp = FourierSpace::new(&ws, 12)?;
    let sys = ApsSystem::new(&sp, ApsParams::annulus(1, 2))?;
    for (i, k) in sys.kernel_basis().iter().enumerate() {
        let s = sys.restrict_boundary(k)?;
        let f = s.plus.first().map(|p| p.0).unwrap_or_default();
        println!(
            "kernel element {i}: band {f}, value at +inf {:.4}, at -inf {:.4}, excluded part {:.1e}",
            s.at(End::Plus, f),
            s.at(End::Minus, f),
            sys.aps_violation(&s)
        );
    }
    Ok(())
}
