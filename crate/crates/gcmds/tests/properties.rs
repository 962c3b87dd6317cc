use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gcmds::space::generate::{polygon, random_cloud, random_graph_metric, random_metric, random_weights, sphere_sample, torus_grid};
use gcmds::spectral::{kernel_norm, psd_project_spectrum, symmetric_eigen};
use gcmds::{
    centered_kernel, cloud_spectrum, diam_p, distortion, eigendecompose, embed, linf_distortion_bound_check,
    negative_trace, product_space, shortest_path_metric, FiniteMmSpace, Mode, PointCloud, WeightedGraph,
};

fn space(seed: u64, n: usize, weighted: bool) -> FiniteMmSpace {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let x = if seed.is_multiple_of(2) { random_metric(n, &mut rng) } else { random_graph_metric(n, 0.4, &mut rng) }.unwrap();
    if weighted {
        let w = random_weights(n, &mut rng);
        x.reweighted(w).unwrap()
    } else {
        x
    }
}

fn any_space() -> impl Strategy<Value = FiniteMmSpace> {
    (any::<u64>(), 2usize..14, any::<bool>()).prop_map(|(s, n, w)| space(s, n, w))
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sphere_samples_are_valid_and_reproducible(d in 2usize..6, n in 2usize..30, seed in any::<u64>()) {
        let x = sphere_sample(d, n, seed).unwrap();
        prop_assert!(x.dist().iter().all(|&v| (0.0..=std::f64::consts::PI).contains(&v)));
        prop_assert_eq!(x, sphere_sample(d, n, seed).unwrap());
    }

    #[test]
    fn shortest_paths_satisfy_triangle_exactly(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut edges: Vec<(usize, usize, f64)> = (1..n).map(|i| (i - 1, i, rng.random_range(1..10) as f64)).collect();
        for _ in 0..n {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            if i != j {
                edges.push((i, j, rng.random_range(1..10) as f64));
            }
        }
        let x = shortest_path_metric(&WeightedGraph::new(n, edges).unwrap()).unwrap();
        let d = x.dist();
        for i in 0..n { for j in 0..n { for k in 0..n {
            prop_assert!(d[(i, k)] <= d[(i, j)] + d[(j, k)]);
        }}}
    }

    #[test]
    fn product_distances_combine_in_l2(x in any_space(), y in any_space()) {
        let p = product_space(&x, &y).unwrap();
        let (nx, ny) = (x.n(), y.n());
        for i in 0..nx { for j in 0..ny { for i2 in 0..nx { for j2 in 0..ny {
            let want = x.dist()[(i, i2)].hypot(y.dist()[(j, j2)]);
            prop_assert!((p.dist()[(i * ny + j, i2 * ny + j2)] - want).abs() <= 1e-15 * want.max(1.0));
        }}}}
        let q = product_space(&y, &x).unwrap();
        let mut a: Vec<f64> = p.dist().iter().copied().collect();
        let mut b: Vec<f64> = q.dist().iter().copied().collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (u, v) in a.iter().zip(&b) {
            prop_assert!((u - v).abs() <= 1e-15 * u.max(1.0));
        }
    }

    #[test]
    fn trace_identity(x in any_space()) {
        let k = centered_kernel(&x, Mode::Measure);
        let tr: f64 = (0..x.n()).map(|i| x.weights()[i] * k.values()[(i, i)]).sum();
        let half = 0.5 * diam_p(&x, 2.0).powi(2);
        prop_assert!(rel_close(tr, half, 1e-10));
        let s = eigendecompose(&k, None).unwrap();
        prop_assert!(rel_close(s.eigenvalues().iter().sum::<f64>(), half, 1e-9));
    }

    #[test]
    fn product_kernel_is_additive(x in any_space(), y in any_space()) {
        let p = product_space(&x, &y).unwrap();
        let kp = centered_kernel(&p, Mode::Measure);
        let kx = centered_kernel(&x, Mode::Measure);
        let ky = centered_kernel(&y, Mode::Measure);
        let ny = y.n();
        for a in 0..p.n() { for b in 0..p.n() {
            let want = kx.values()[(a / ny, b / ny)] + ky.values()[(a % ny, b % ny)];
            prop_assert!((kp.values()[(a, b)] - want).abs() <= 1e-10 * want.abs().max(1.0));
        }}
    }

    #[test]
    fn kernel_modes_agree_on_uniform_weights(seed in any::<u64>(), n in 2usize..14) {
        let x = space(seed, n, false);
        let km = centered_kernel(&x, Mode::Matrix);
        let ku = centered_kernel(&x, Mode::Measure);
        prop_assert!((km.values() - ku.values()).amax() <= 1e-12 * km.values().amax().max(1.0));
        let row_sums = km.values() * DVector::from_element(n, 1.0);
        prop_assert!(row_sums.amax() <= 1e-12 * n as f64 * km.values().amax().max(1.0));
        let sm = eigendecompose(&km, None).unwrap();
        let su = eigendecompose(&ku, None).unwrap();
        for (a, b) in sm.eigenvalues().iter().zip(su.eigenvalues()) {
            prop_assert!((a / n as f64 - b).abs() <= 1e-12 * sm.eigenvalues()[0].abs().max(1.0));
        }
    }

    #[test]
    fn eigenpairs_are_orthonormal_with_small_residual(x in any_space(), measure in any::<bool>()) {
        let mode = if measure { Mode::Measure } else { Mode::Matrix };
        let k = centered_kernel(&x, mode);
        let s = eigendecompose(&k, None).unwrap();
        let n = x.n();
        let w = if measure { x.weights().clone() } else { DVector::from_element(n, 1.0) };
        let centering = k.effective_weights();
        let phi = s.eigenfunctions();
        let norm = s.eigenvalues().iter().fold(0.0f64, |m, l| m.max(l.abs())).max(1.0);
        for a in 0..n {
            for b in 0..n {
                let ip: f64 = (0..n).map(|i| w[i] * phi[(i, a)] * phi[(i, b)]).sum();
                let want = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - want).abs() <= 1e-9, "<{a},{b}> = {ip}");
            }
            let applied = k.values() * DVector::from_fn(n, |i, _| w[i] * phi[(i, a)]);
            let resid = (applied - s.eigenvalues()[a] * phi.column(a)).amax();
            prop_assert!(resid <= 1e-10 * norm, "residual {resid:e}");
            if s.eigenvalues()[a].abs() > s.zero_tol() {
                let mean: f64 = (0..n).map(|i| centering[i] * phi[(i, a)]).sum();
                prop_assert!(mean.abs() <= 1e-9);
            }
        }
        prop_assert!(s.eigenvalues().windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn solver_matches_nalgebra(seed in any::<u64>(), n in 1usize..30) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let sym = &a + a.transpose();
        let (vals, vecs) = symmetric_eigen(&sym).unwrap();
        let mut want: Vec<f64> = SymmetricEigen::new(sym.clone()).eigenvalues.iter().copied().collect();
        want.sort_by(f64::total_cmp);
        for (g, w) in vals.iter().zip(&want) {
            prop_assert!((g - w).abs() <= 1e-11 * want.iter().fold(1.0f64, |m, v| m.max(v.abs())));
        }
        let recon = &vecs * DMatrix::from_diagonal(&vals) * vecs.transpose();
        prop_assert!((recon - &sym).amax() <= 1e-12 * n as f64 * sym.amax().max(1.0));
    }

    #[test]
    fn full_embedding_does_not_contract(x in any_space()) {
        let s = eigendecompose(&centered_kernel(&x, Mode::Measure), None).unwrap();
        prop_assume!(s.pr() > 0);
        let e = embed(&s, s.pr()).unwrap();
        for i in 0..x.n() { for j in (i + 1)..x.n() {
            prop_assert!(e.distance(i, j) >= x.dist()[(i, j)] - 1e-9);
        }}
    }

    #[test]
    fn truncations_are_nested(x in any_space()) {
        let s = eigendecompose(&centered_kernel(&x, Mode::Measure), None).unwrap();
        let embs: Vec<_> = (1..=s.pr()).map(|k| embed(&s, k).unwrap()).collect();
        for pair in embs.windows(2) {
            for i in 0..x.n() { for j in (i + 1)..x.n() {
                prop_assert!(pair[0].distance(i, j) <= pair[1].distance(i, j) + 1e-12);
            }}
        }
    }

    #[test]
    fn squared_distortion_is_twice_negative_trace(x in any_space()) {
        let s = eigendecompose(&centered_kernel(&x, Mode::Measure), None).unwrap();
        prop_assume!(s.pr() > 0);
        let dis2 = distortion(&x, &embed(&s, s.pr()).unwrap()).powi(2);
        let tn2 = 2.0 * negative_trace(&s);
        prop_assert!((dis2 - tn2).abs() <= 1e-9 * dis2.max(tn2).max(diam_p(&x, 2.0).powi(2)));
    }

    #[test]
    fn linf_bound_holds_on_uniform_spaces(seed in any::<u64>(), n in 2usize..14) {
        let x = space(seed, n, false);
        let s = eigendecompose(&centered_kernel(&x, Mode::Matrix), None).unwrap();
        let e = embed(&s, s.pr()).unwrap();
        prop_assert!(linf_distortion_bound_check(&x, &e).unwrap().holds);
    }

    #[test]
    fn cloud_kernel_spectrum_is_covariance_spectrum(seed in any::<u64>(), n in 3usize..30, dim in 1usize..5, weighted in any::<bool>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut c = random_cloud(n, dim, &mut rng).unwrap();
        if weighted {
            c = PointCloud::new(c.points().clone(), random_weights(n, &mut rng)).unwrap();
        }
        let cov = cloud_spectrum(&c).unwrap();
        let s = eigendecompose(&centered_kernel(&c.to_space().unwrap(), Mode::Measure), None).unwrap();
        for (a, b) in cov.iter().zip(s.eigenvalues()) {
            prop_assert!((a - b).abs() <= 1e-9 * cov[0]);
        }
        prop_assert!(s.nr() == 0);
    }

    #[test]
    fn truncation_is_optimal(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = random_metric(8, &mut rng).unwrap();
        let k = centered_kernel(&x, Mode::Matrix);
        let s = eigendecompose(&k, None).unwrap();
        let rank = rng.random_range(1..=s.pr());
        let best = kernel_norm(&(k.values() - psd_project_spectrum(&s, Some(rank)).unwrap().values()), Mode::Matrix, k.weights());
        for _ in 0..20 {
            let b = DMatrix::from_fn(8, rank, |_, _| rng.random_range(-1.5..1.5));
            let other = kernel_norm(&(k.values() - &b * b.transpose()), Mode::Matrix, k.weights());
            prop_assert!(other >= best - 1e-9);
        }
    }

    #[test]
    fn projection_is_non_expansive(seed in any::<u64>(), n in 2usize..12) {
        let x1 = space(seed, n, false);
        let x2 = space(seed.wrapping_add(1), n, false);
        let k1 = centered_kernel(&x1, Mode::Matrix);
        let k2 = centered_kernel(&x2, Mode::Matrix);
        let p1 = psd_project_spectrum(&eigendecompose(&k1, None).unwrap(), None).unwrap();
        let p2 = psd_project_spectrum(&eigendecompose(&k2, None).unwrap(), None).unwrap();
        let lhs = kernel_norm(&(p1.values() - p2.values()), Mode::Matrix, k1.weights());
        let rhs = kernel_norm(&(k1.values() - k2.values()), Mode::Matrix, k1.weights());
        prop_assert!(lhs <= rhs + 1e-9);
    }
}

#[test]
fn generators_produce_valid_spaces() {
    assert!(polygon(2).is_err());
    for n in 3..20 {
        let x = polygon(n).unwrap();
        FiniteMmSpace::new(x.dist().clone(), x.weights().clone()).unwrap();
    }
    for (f, n) in [(1, 7), (2, 4), (3, 3)] {
        let x = torus_grid(f, n).unwrap();
        assert_eq!(x.n(), n.pow(f as u32));
        FiniteMmSpace::new(x.dist().clone(), x.weights().clone()).unwrap();
    }
}

#[test]
fn four_point_example() {
    let d2 = DMatrix::from_row_slice(4, 4, &[0., 1., 1., 1., 1., 0., 4., 4., 1., 4., 0., 4., 1., 4., 4., 0.]);
    let x = FiniteMmSpace::uniform(d2.map(f64::sqrt)).unwrap();
    let k = centered_kernel(&x, Mode::Matrix);
    let s = eigendecompose(&k, None).unwrap();
    let want = [2.0, 2.0, 0.0, -0.25];
    for (a, b) in s.eigenvalues().iter().zip(want) {
        assert!((a - b).abs() < 1e-12);
    }
    assert!((negative_trace(&s) - 0.25).abs() < 1e-12);
    let plus = psd_project_spectrum(&s, None).unwrap();
    assert!((kernel_norm(&(k.values() - plus.values()), Mode::Matrix, k.weights()) - 0.25).abs() < 1e-12);
    let e = embed(&s, 2).unwrap();
    for j in 1..4 {
        assert!((e.distance(0, j) - 2.0 / 3f64.sqrt()).abs() < 1e-12);
    }
    assert!((e.distance(1, 2) - 2.0).abs() < 1e-12);
    assert!(embed(&s, 3).is_err());
}
