//! Composition identities `T A = I − P` and `A T = I − P` for every boundary
//! variant of `A` and `Ā`, on the disk and on the annulus.

use qdbar::jacobi::{identity_residuals, variant_name, BoundaryVariant, JacobiData, Op};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let k_max: usize = std::env::args()
        .nth(1)
        .map(|s| s.parse())
        .transpose()?
        .unwrap_or(200);
    let cases = [
        (
            DomainKind::Disk,
            WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
        ),
        (
            DomainKind::Annulus,
            WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
        ),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for (domain, family) in cases {
        let ws = eval_weights(&family, domain, k_max)?;
        println!(
            "{} on the {domain}, window [{}, {}]",
            family.label(),
            ws.lo,
            ws.hi
        );
        for mode in [0, 3] {
            let data = JacobiData::for_mode(&ws, mode)?;
            for op in [Op::A, Op::Abar] {
                for &v in BoundaryVariant::all_for(domain) {
                    let r = identity_residuals(&data, op, v, 100, &mut rng)?;
                    println!(
                        "  mode {mode} {:<8} left {:.2e}  right {:.2e}  coker {:.2e}  tail {:.1e}",
                        variant_name(op, v),
                        r.left,
                        r.right,
                        r.cokernel_annihilated,
                        r.tail
                    );
                }
            }
        }
    }
    Ok(())
}
