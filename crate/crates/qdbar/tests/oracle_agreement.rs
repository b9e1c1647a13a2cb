use nalgebra::DMatrix;
use qdbar::jacobi::{variant_dims, BoundaryVariant, JacobiData, Op, Parametrix, SeqVec, C64};
use qdbar::oracle::{densify, densify_variant, oracle_window, svd_dims, DenseBlock, DEFAULT_TAU};
use qdbar::weight_model::{eval_weights, DomainKind, WeightFamily, WeightSequence};

fn families() -> Vec<WeightSequence> {
    vec![
        eval_weights(
            &WeightFamily::GeometricDisk {
                rho_plus: 1.0,
                q: 0.5,
            },
            DomainKind::Disk,
            200,
        )
        .unwrap(),
        eval_weights(
            &WeightFamily::GeometricDisk {
                rho_plus: 2.0,
                q: 0.7,
            },
            DomainKind::Disk,
            200,
        )
        .unwrap(),
        eval_weights(
            &WeightFamily::SigmoidAnnulus {
                rho_minus: 1.0,
                rho_plus: 2.0,
                q: 2.0,
            },
            DomainKind::Annulus,
            120,
        )
        .unwrap(),
        eval_weights(
            &WeightFamily::SigmoidAnnulus {
                rho_minus: 0.5,
                rho_plus: 1.5,
                q: 3.0,
            },
            DomainKind::Annulus,
            120,
        )
        .unwrap(),
    ]
}

#[test]
fn svd_dims_match_table() {
    for ws in families() {
        for window in [40, 80] {
            let (lo, hi) = oracle_window(ws.domain, window);
            for mode in [0, 3] {
                let data = JacobiData::for_mode_on(&ws, mode, lo, hi).unwrap();
                for op in [Op::A, Op::Abar] {
                    for &v in BoundaryVariant::all_for(ws.domain) {
                        let want = variant_dims(ws.domain, op, v).unwrap();
                        for row_weight in [1e-2, 1.0, 1e2] {
                            let s = svd_dims(
                                &densify_variant(&data, op, v, row_weight).unwrap(),
                                DEFAULT_TAU,
                            )
                            .unwrap();
                            assert_eq!(
                                (s.dim_ker, s.dim_coker),
                                want,
                                "{} {op:?} {v:?} w={window}",
                                ws.domain
                            );
                        }
                    }
                }
            }
        }
    }
}

// (T X − (I − P)) in weighted coordinates, columns away from the truncation edges
#[test]
fn densified_left_identities() {
    for ws in families() {
        let (lo, hi) = oracle_window(ws.domain, 40);
        let data = JacobiData::for_mode_on(&ws, 1, lo, hi).unwrap();
        let n = data.len();
        for op in [Op::A, Op::Abar] {
            for &v in BoundaryVariant::all_for(ws.domain) {
                let p = Parametrix::of(op, v);
                let x = densify(&data, op).unwrap();
                let t_in = data.parametrix_input_ref(p);
                let t = DenseBlock::from_columns(n, n, "parametrix", |j| {
                    let e = SeqVec::delta(data.lo, n, t_in, data.lo + j as i64, C64::new(1.0, 0.0));
                    data.apply_parametrix(p, &e).unwrap().values
                });
                let tx = t.mul(&x).unwrap();
                let dom = data.domain_ref(op);
                let w = data.weights_of(dom).unwrap().to_vec();
                let ker = data.kernel_basis(op, v).unwrap();
                let mut expect = DMatrix::<C64>::identity(n, n);
                for kv in &ker {
                    let nrm = data.norm_sq(&kv.omega).unwrap();
                    for i in 0..n {
                        for j in 0..n {
                            expect[(i, j)] -=
                                kv.omega.values[i] * kv.omega.values[j].conj() / (w[j] * nrm);
                        }
                    }
                }
                let mut worst = 0.0f64;
                let first = if ws.domain == DomainKind::Annulus {
                    8
                } else {
                    0
                };
                for j in first..n - 8 {
                    for i in 0..n {
                        let d = (tx.entries[(i, j)] - expect[(i, j)]) * (w[j] / w[i]).sqrt();
                        worst = worst.max(d.norm());
                    }
                }
                assert!(worst <= 1e-9, "{} {op:?} {v:?}: {worst:e}", ws.domain);
            }
        }
    }
}
