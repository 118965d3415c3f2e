use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use sprc_core::cipc::coleman_forward;
use sprc_core::sprc::{
    azimuth_basis, build_basis_with, control_sample, dare_step, MIN_BASIS_PERIOD,
};
use sprc_core::sysid::{batch_solve, rls_update, DeltaBuffer, MarkovEstimate};
use sprc_core::windfield::{generate, turbulence_intensity, GridMode};

fn matrix(rows: usize, cols: usize) -> impl Strategy<Value = DMatrix<f64>> {
    prop::collection::vec(-1.0f64..1.0, rows * cols)
        .prop_map(move |v| DMatrix::from_vec(rows, cols, v))
}

fn mode() -> impl Strategy<Value = GridMode> {
    prop::sample::select(GridMode::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn rls_equals_batch_without_forgetting(
        p in 1usize..4,
        r in 1usize..3,
        l in 1usize..3,
        seed in any::<u64>(),
    ) {
        use rand::SeedableRng;
        use rand_distr::{Distribution, StandardNormal};
        let d = (r + l) * p;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut g = || -> f64 { StandardNormal.sample(&mut rng) };
        let hist: Vec<(DVector<f64>, DVector<f64>)> = (0..40 * d)
            .map(|_| (DVector::from_fn(d, |_, _| g()), DVector::from_fn(l, |_, _| g())))
            .collect();
        let mut est = MarkovEstimate::new(p, r, l, 1.0).unwrap();
        for (z, t) in &hist {
            rls_update(&mut est, z, t).unwrap();
        }
        let batch = batch_solve(&hist, 1.0).unwrap();
        let diff = (est.xi() - &batch.xi).norm();
        prop_assert!(diff <= 1e-8 * (1.0 + batch.xi.norm()), "diff {diff:e}");
    }

    #[test]
    fn uniform_basis_is_left_invertible(period in MIN_BASIS_PERIOD..260, r in 1usize..4, h in 1usize..3) {
        let b = build_basis_with(period, r, h).unwrap();
        let err = (&b.phi_pinv * &b.phi - DMatrix::identity(b.dim(), b.dim())).amax();
        prop_assert!(err < 1e-10, "err {err:e}");
    }

    #[test]
    fn azimuth_basis_is_left_invertible(
        period in 12usize..80,
        start in 0.0f64..6.28,
        span in 0.8f64..1.0,
        r in 1usize..3,
        h in 1usize..3,
    ) {
        let psi: Vec<f64> = (0..period)
            .map(|i| (start + std::f64::consts::TAU * span * i as f64 / period as f64) % std::f64::consts::TAU)
            .collect();
        let b = azimuth_basis(&psi, r, h).unwrap();
        let err = (&b.phi_pinv * &b.phi - DMatrix::identity(b.dim(), b.dim())).amax();
        prop_assert!(err < 1e-9, "err {err:e}");
    }

    #[test]
    fn riccati_iterates_stay_symmetric_psd(
        a in matrix(4, 4),
        b in matrix(4, 2),
        qf in matrix(4, 4),
        rw in 0.1f64..10.0,
    ) {
        let q = &qf * qf.transpose();
        let r = DMatrix::identity(2, 2) * rw;
        let mut p = q.clone();
        for _ in 0..20 {
            p = dare_step(&p, &a, &b, &q, &r).unwrap();
            prop_assert!((&p - p.transpose()).amax() <= 1e-12 * (1.0 + p.amax()));
            let min_eig = p.clone().symmetric_eigen().eigenvalues.min();
            prop_assert!(min_eig >= -1e-9 * (1.0 + p.norm()), "min eigenvalue {min_eig}");
        }
    }

    #[test]
    fn delta_of_periodic_signals_vanishes(
        period in 2usize..20,
        past in 1usize..6,
        shape in prop::collection::vec(-5.0f64..5.0, 40),
    ) {
        let mut buf = DeltaBuffer::new(period, past, 2, 2).unwrap();
        for k in 0..4 * (period + past) {
            let i = k % period;
            let u = DVector::from_vec(vec![shape[i], shape[i + 20]]);
            let y = DVector::from_vec(vec![shape[(i + 3) % 20], -shape[i]]);
            let k = buf.push(&u, &y).unwrap();
            if k >= period + past {
                prop_assert!(buf.regressor(k).unwrap().iter().all(|v| *v == 0.0));
            }
        }
    }

    #[test]
    fn control_sample_is_linear(
        a in prop::collection::vec(-3.0f64..3.0, 8),
        b in prop::collection::vec(-3.0f64..3.0, 8),
        psi in 0.0f64..6.3,
    ) {
        let (ta, tb) = (DVector::from_vec(a), DVector::from_vec(b));
        let lhs = control_sample(&(&ta * 2.0 + &tb), psi, 2);
        let rhs = control_sample(&ta, psi, 2) * 2.0 + control_sample(&tb, psi, 2);
        prop_assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn coleman_ignores_collective_load(m1 in -50.0f64..50.0, m2 in -50.0f64..50.0, s in -50.0f64..50.0, psi in 0.0f64..6.3) {
        let (t0, y0) = coleman_forward([m1, m2], psi);
        let (t1, y1) = coleman_forward([m1 + s, m2 + s], psi);
        prop_assert!((t0 - t1).abs() < 1e-9 && (y0 - y1).abs() < 1e-9);
    }

    #[test]
    fn generated_wind_hits_target_ti(m in mode(), speed in 3.0f64..8.0, seed in any::<u64>()) {
        let w = generate(m, speed, 30.0, 200.0, seed).unwrap();
        let ti = turbulence_intensity(&w).unwrap();
        prop_assert!((ti - m.target_ti()).abs() < 0.5, "{m}: TI {ti}");
        prop_assert!(w.samples.iter().all(|v| *v > 0.0));
        let mean = w.samples.iter().sum::<f64>() / w.len() as f64;
        prop_assert!((mean - speed).abs() < 0.01 * speed);
    }
}
