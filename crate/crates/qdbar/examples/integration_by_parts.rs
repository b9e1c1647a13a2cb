//! `⟨Af, g⟩ − ⟨f, Āg⟩` equals the boundary term built from the limits of `f`
//! and `g`, and vanishes for compactly supported pairs.

use qdbar::jacobi::{pairing_residual, End, JacobiData, Op, C64};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let ws = eval_weights(
        &WeightFamily::SigmoidAnnulus {
            rho_minus: 1.0,
            rho_plus: 2.0,
            q: 2.0,
        },
        DomainKind::Annulus,
        120,
    )?;
    let data = JacobiData::for_mode(&ws, 1)?;
    let f = data.random_supported(data.domain_ref(Op::A), &mut rng);
    let g = data.random_supported(data.domain_ref(Op::Abar), &mut rng);
    let r = pairing_residual(&data, &f, &g)?;
    println!(
        "compact pair: lhs {:.3e}, residual {:.2e}",
        r.lhs,
        r.residual.norm()
    );

    let f = f.axpy(C64::new(0.7, 0.2), &data.limit_carrier(Op::A, End::Plus)?);
    let g = g.axpy(
        C64::new(-0.3, 1.1),
        &data.limit_carrier(Op::Abar, End::Minus)?,
    );
    let g = g.axpy(
        C64::new(0.5, 0.0),
        &data.limit_carrier(Op::Abar, End::Plus)?,
    );
    let r = pairing_residual(&data, &f, &g)?;
    println!(
        "pair with limits: lhs {:.6}, boundary term {:.6}, residual {:.2e}, tail {:.1e}",
        r.lhs,
        r.boundary,
        r.residual.norm(),
        r.tail
    );
    Ok(())
}
