use crsing::classify;
use crsing::hull::{self, HullProblem, HullStatus};
use crsing::linalg::{self, c, RMat};
use crsing::locus;
use crsing::normal_form::{self, PreNormalForm};
use crsing::perturb::{self, QuadPerturbation};
use crsing::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random record whose (beta, gamma) rows are drawn to hit degenerate
/// classes: zero rows, proportional rows, Bishop-parabolic rows.
fn lattice_record(seed: u64, m: usize, n: usize) -> PreNormalForm {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut nf = PreNormalForm::random(m, n, 1.0, &mut rng).unwrap();
    let k = nf.codim();
    match rng.gen_range(0..4) {
        0 => {
            nf.beta_u = vec![0.0; k];
            nf.gamma_u = vec![c(0.0, 0.0); k];
        }
        1 => {
            for u in 1..k {
                let t = rng.gen_range(-2.0..2.0);
                nf.beta_u[u] = t * nf.beta_u[0];
                nf.gamma_u[u] = nf.gamma_u[0] * t;
            }
        }
        2 => {
            nf.beta_u = vec![0.0; k];
            nf.gamma_u = vec![c(0.0, 0.0); k];
            nf.beta_u[0] = 1.0;
            nf.gamma_u[0] = c(0.5, 0.0);
        }
        _ => {}
    }
    nf
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn webster_coffman_lattice(seed in any::<u64>(), dims in prop::sample::select(vec![(4usize, 5usize), (6, 7), (7, 8), (5, 7)])) {
        let nf = lattice_record(seed, dims.0, dims.1);
        let w = classify::webster_class(&nf).unwrap();
        let cf = classify::coffman_class(&nf).unwrap();
        prop_assert_eq!(w.class == 0, cf.class == 0);
        if w.class == 1 {
            prop_assert!(cf.class >= 1);
        }
        prop_assert!(cf.class <= w.class && w.class <= 2);
    }

    #[test]
    fn transversality_matches_differentiated_b(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = PreNormalForm::random(6, 7, 1.0, &mut rng).unwrap();
        let f = nf.to_embedding().unwrap();
        let h = 1e-6;
        let mut d = RMat::zeros(4, 6);
        for l in 0..6 {
            let mut xp = vec![0.0; 6];
            let mut xm = vec![0.0; 6];
            xp[l] = h;
            xm[l] = -h;
            let bp = locus::graph_b_at(&f, &xp).unwrap();
            let bm = locus::graph_b_at(&f, &xm).unwrap();
            for u in 0..2 {
                let g = (bp[u] - bm[u]) / (2.0 * h);
                d[(2 * u, l)] = g.re;
                d[(2 * u + 1, l)] = g.im;
            }
        }
        prop_assert!((&d - classify::nondeg_matrix(&nf)).amax() < 1e-6);
        let fd = linalg::numerical_rank_real(&d, 1e-6).unwrap().rank;
        prop_assert_eq!(fd, classify::transversality_test(&nf).unwrap().rank.rank);
    }

    #[test]
    fn reduction_preserves_classes(seed in any::<u64>(), dims in prop::sample::select(vec![(4usize, 5usize), (6, 7), (6, 8)])) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = PreNormalForm::random(dims.0, dims.1, 1.0, &mut rng).unwrap();
        let red = classify::coffman_reduction(&nf).unwrap();
        prop_assert!(classify::reduction_residual(&red) < 1e-9);
        prop_assert_eq!(classify::coffman_class(&red).unwrap().class, 2);
        let (a, b) = (classify::transversality_test(&nf).unwrap(), classify::transversality_test(&red).unwrap());
        prop_assert_eq!(a.holds, b.holds);
    }

    #[test]
    fn psi_surjective(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let nf = PreNormalForm::random(7, 9, 1.0, &mut rng).unwrap();
        let t = RMat::from_fn(6, 2, |_, _| rng.gen_range(-3.0..3.0));
        let q = perturb::solve_psi_target(&nf, &t).unwrap();
        prop_assert!((perturb::psi_matrix(&nf, &q) - t).amax() <= 1e-12);
    }

    #[test]
    fn cross_product_gram(seed in any::<u64>(), m in 2usize..8) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = RMat::from_fn(m - 1, m, |_, _| rng.gen_range(-1.0..1.0));
        let x = perturb::cross_product(&r).unwrap();
        prop_assert!((&r * &x).amax() <= 1e-12);
        let gram = (&r * r.transpose()).determinant();
        prop_assert!((x.norm_squared() - gram).abs() <= 1e-10 * (1.0 + gram));
    }

    #[test]
    fn omega_is_linear_in_sigma(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = RMat::from_fn(6, 7, |_, _| rng.gen_range(-1.0..1.0));
        let base = perturb::steer_tangent(&r, 1e-3).unwrap();
        for s in [1e-2, 1e-1] {
            let t = perturb::steer_tangent(&r, s).unwrap();
            let want = &base.omega_j0 * (s / 1e-3);
            prop_assert!((&t.omega_j0 - &want).norm() <= 1e-8 * want.norm());
            let want = &base.omega_k0 * (s / 1e-3);
            prop_assert!((&t.omega_k0 - &want).norm() <= 1e-8 * want.norm());
        }
    }

    #[test]
    fn hull_certificates_reverify(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = rng.gen_range(1..3);
        let k = rng.gen_range(1..12);
        let pt = |rng: &mut ChaCha8Rng| (0..n).map(|_| Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))).collect::<Vec<_>>();
        let samples: Vec<_> = (0..k).map(|_| pt(&mut rng)).collect();
        let q = pt(&mut rng);
        let cert = hull::separation_lp(&HullProblem::new(samples.clone(), q.clone(), rng.gen_range(1..4))).unwrap();
        if cert.status == HullStatus::Separated {
            prop_assert!(cert.verify(&samples, &q));
            prop_assert!(cert.value_at_query > cert.sup_on_samples);
        }
    }
}

#[test]
fn psi_matches_reextraction() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..5 {
        let nf = PreNormalForm::random(4, 5, 1.0, &mut rng).unwrap();
        let mut q = QuadPerturbation::zero(2);
        for u in 0..2 {
            q.b[u] = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
            q.c[u] = c(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        }
        let f = nf.to_embedding().unwrap();
        let g = perturb::apply_quad_perturbation(&f, &[0.0; 4], &q).unwrap();
        let re = normal_form::normal_form_at(&g, &[0.0; 4]).unwrap().coefficients;
        let psi = linalg::numerical_rank_real(&perturb::psi_matrix(&nf, &q), 1e-8).unwrap().rank;
        assert_eq!(classify::webster_class(&re).unwrap().class, psi);
    }
}

#[test]
fn hull_scan_is_monotone_in_degree() {
    let circle: Vec<Vec<Complex64>> = (0..64)
        .map(|j| vec![Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / 64.0)])
        .collect();
    let grid: Vec<Vec<Complex64>> = [0.0, 0.5, 0.9, 1.2, 1.5, 2.0].iter().map(|&r| vec![c(r, 0.0)]).collect();
    let mut prev = hull::hull_scan(&circle, &grid, 1).unwrap();
    for d in 2..5 {
        let cur = hull::hull_scan(&circle, &grid, d).unwrap();
        for (a, b) in prev.iter().zip(&cur) {
            if *a == HullStatus::Separated {
                assert_eq!(*b, HullStatus::Separated);
            }
        }
        prev = cur;
    }
    assert_eq!(&prev[..3], &[HullStatus::NotSeparated; 3]);
    assert_eq!(&prev[4..], &[HullStatus::Separated; 2]);
}

#[test]
fn torus_slice_is_separated_off_curve() {
    // (e^{it}, e^{-it}) has z1 z2 = 1; off-curve points are separated
    let curve: Vec<Vec<Complex64>> = (0..48)
        .map(|j| {
            let t = 2.0 * std::f64::consts::PI * j as f64 / 48.0;
            vec![Complex64::from_polar(1.0, t), Complex64::from_polar(1.0, -t)]
        })
        .collect();
    for q in [[c(0.0, 0.0), c(0.0, 0.0)], [c(0.5, 0.0), c(0.5, 0.0)], [c(0.2, 0.1), c(-0.3, 0.0)]] {
        let cert = hull::separation_lp(&HullProblem::new(curve.clone(), q.to_vec(), 3)).unwrap();
        assert_eq!(cert.status, HullStatus::Separated, "{q:?}");
    }
}

#[test]
fn fit_of_conj_on_arc_improves_with_degree() {
    let arc: Vec<Vec<Complex64>> = (0..80).map(|j| vec![c(j as f64 / 79.0, 0.3 * (j as f64 / 79.0).powi(2))]).collect();
    let t: Vec<Complex64> = arc.iter().map(|z| z[0].conj()).collect();
    let errs: Vec<f64> = [1, 3, 5, 7].iter().map(|&d| hull::polynomial_fit(&arc, &t, d).unwrap().sup_error).collect();
    for w in errs.windows(2) {
        assert!(w[1] < w[0], "{errs:?}");
    }
    assert!(errs[3] < 1e-3, "{errs:?}");
}
