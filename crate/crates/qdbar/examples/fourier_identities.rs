//! The Fourier picture of `D`: `D(U_W*) = 1`, `D(U_W^n) = 0`, the matrix
//! commutator agreeing with the mode-wise operator, and the trace isometry.

use qdbar::fourier::{FourierSpace, HilbertElement};
use qdbar::jacobi::C64;
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let ws = eval_weights(
        &WeightFamily::GeometricDisk {
            rho_plus: 1.0,
            q: 0.5,
        },
        DomainKind::Disk,
        80,
    )?;
    let sp = FourierSpace::new(&ws, 8)?;
    let dim = sp.max_dim();
    let margin = sp.m_max;

    let x = sp.uw_star();
    let dx = sp.apply_d(&x)?;
    let scale = sp.stencil_scale(&x, false)?;
    let dm = sp.d_matrix(&x, dim)?;
    println!(
        "D(U_W*) - 1: mode-wise {:.2e}, matrix {:.2e}",
        sp.interior_diff(&dx, &sp.identity(), Some(&scale), margin, dim),
        sp.interior_diff(&dm, &sp.identity(), Some(&scale), margin, dim)
    );
    for n in 0..=6 {
        let x = sp.uw_power(n);
        let scale = sp.stencil_scale(&x, false)?;
        let dx = sp.apply_d(&x)?;
        let dm = sp.d_matrix(&x, dim)?;
        println!(
            "D(U_W^{n}): mode-wise {:.2e}, matrix {:.2e}",
            sp.interior_diff(&dx, &sp.zeros(), Some(&scale), margin, dim),
            sp.interior_diff(&dm, &sp.zeros(), Some(&scale), margin, dim)
        );
    }

    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let x: HilbertElement = sp.from_fn(|b, k| {
            if k <= sp.lo() + 40 - b.abs() {
                C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
            } else {
                C64::new(0.0, 0.0)
            }
        });
        let f = sp.norm_h_sq(&x)?;
        let t = sp.inner_trace(&x, &x, dim)?;
        worst = worst.max((f - t.re).abs() / f);
    }
    println!("isometry on 50 random elements: worst relative gap {worst:.2e}");
    Ok(())
}
