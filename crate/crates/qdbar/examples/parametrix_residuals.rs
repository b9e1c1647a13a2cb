//! `QD = I − P_Ker` and `DQ = I − P_Coker` for the assembled operator, in the
//! displayed and the orthogonal form of `Q`.

use qdbar::aps::{ApsParams, ApsSystem, QForm};
use qdbar::fourier::FourierSpace;
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let ws = eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        200,
    )?;
    let disk = FourierSpace::new(&ws, 16)?;
    let ws = eval_weights(
        &WeightFamily::SigmoidAnnulus {
            rho_minus: 1.0,
            rho_plus: 2.0,
            q: 2.0,
        },
        DomainKind::Annulus,
        120,
    )?;
    let annulus = FourierSpace::new(&ws, 16)?;
    let runs = [
        (&disk, ApsParams::disk(0)),
        (&disk, ApsParams::disk(-3)),
        (&annulus, ApsParams::annulus(1, 1)),
        (&annulus, ApsParams::annulus(1, -3)),
    ];
    for (sp, p) in runs {
        let sys = ApsSystem::new(sp, p)?;
        for form in [QForm::Orthogonal, QForm::Displayed] {
            let r = sys.residuals(20, form, &mut rng)?;
            println!(
                "{:<20} {:<11} QD {:.2e}  DQ {:.2e}  Q on coker {:.2e}  tail {:.1e}",
                p.to_string(),
                format!("{form:?}"),
                r.residual_qd,
                r.residual_dq,
                r.q_on_cokernel,
                r.tail
            );
        }
    }
    Ok(())
}
