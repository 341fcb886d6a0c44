//! GP inference checked against a dense direct-inverse oracle.
//!
//! The oracle inverts `K + sigma^2 I` explicitly with nalgebra and never
//! touches the crate's Cholesky path, so agreement is a two-route check.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use cobalt::gp::{log_marginal_likelihood, posterior, ObservationSet, PriorSampler};
use cobalt::grid::CandidateGrid;
use cobalt::kernel::{Kernel, KernelFamily};
use cobalt::surrogate::Surrogate;

/// Posterior mean/std by explicit matrix inversion, with an optional
/// constant prior mean.
fn dense_posterior(
    kernel: &Kernel,
    obs_points: &[Vec<f64>],
    values: &[f64],
    noise_variance: f64,
    prior_mean: f64,
    query: &[Vec<f64>],
) -> (Vec<f64>, Vec<f64>) {
    let n = obs_points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = kernel.eval(&obs_points[i], &obs_points[j]);
        }
        k[(i, i)] += noise_variance;
    }
    let kinv = k.try_inverse().expect("oracle inverse");
    let y = DVector::from_iterator(n, values.iter().map(|v| v - prior_mean));
    let alpha = &kinv * &y;
    let mut means = Vec::new();
    let mut stds = Vec::new();
    for q in query {
        let kx = DVector::from_iterator(n, obs_points.iter().map(|p| kernel.eval(p, q)));
        let mean = prior_mean + kx.dot(&alpha);
        let var = kernel.outputscale - (kx.transpose() * &kinv * &kx)[(0, 0)];
        means.push(mean);
        stds.push(var.max(0.0).sqrt());
    }
    (means, stds)
}

fn dense_lml(kernel: &Kernel, obs_points: &[Vec<f64>], values: &[f64], noise_variance: f64) -> f64 {
    let n = obs_points.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            k[(i, j)] = kernel.eval(&obs_points[i], &obs_points[j]);
        }
        k[(i, i)] += noise_variance;
    }
    let det = k.determinant();
    let kinv = k.try_inverse().expect("oracle inverse");
    let y = DVector::from_column_slice(values);
    let quad = (y.transpose() * &kinv * &y)[(0, 0)];
    -0.5 * quad - 0.5 * det.ln() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln()
}

fn random_kernel(rng: &mut impl Rng, dim: usize) -> Kernel {
    let family = if rng.gen_bool(0.5) {
        KernelFamily::Matern52
    } else {
        KernelFamily::SquaredExponential
    };
    let lengthscales = (0..dim).map(|_| rng.gen_range(0.3..2.0)).collect();
    Kernel::new(family, lengthscales, rng.gen_range(0.5..3.0)).unwrap()
}

#[test]
fn matern_posterior_matches_dense_oracle() {
    // 5 random points, 3 observations
    let kernel = Kernel::new(KernelFamily::Matern52, vec![0.8], 1.5).unwrap();
    let pts = vec![vec![0.1], vec![0.9], vec![0.35], vec![0.62], vec![0.77]];
    let grid = CandidateGrid::from_points(&pts);
    let obs = ObservationSet::new(vec![0, 2, 4], vec![0.5, -1.1, 0.3], 0.2).unwrap();
    let post = posterior(&kernel, &obs, &grid).unwrap();
    let obs_pts = vec![pts[0].clone(), pts[2].clone(), pts[4].clone()];
    let (mean, std) = dense_posterior(&kernel, &obs_pts, &obs.values, 0.2, 0.0, &pts);
    for i in 0..5 {
        assert!((post.mean[i] - mean[i]).abs() < 1e-8);
        assert!((post.std_dev[i] - std[i]).abs() < 1e-8);
    }
}

#[test]
fn random_small_instances_match_oracle() {
    let mut rng = cobalt::rng::stream(12345, "oracle-instances", 0);
    for _ in 0..60 {
        let dim = rng.gen_range(1..=3);
        let n_points = rng.gen_range(2..=12);
        let n_obs = rng.gen_range(1..=6.min(n_points));
        let kernel = random_kernel(&mut rng, dim);
        let pts: Vec<Vec<f64>> = (0..n_points)
            .map(|_| (0..dim).map(|_| rng.gen_range(-2.0..2.0)).collect())
            .collect();
        let grid = CandidateGrid::from_points(&pts);
        let indices: Vec<usize> = (0..n_obs).map(|_| rng.gen_range(0..n_points)).collect();
        let values: Vec<f64> = (0..n_obs).map(|_| rng.gen_range(-2.0..2.0)).collect();
        let noise = rng.gen_range(0.01..0.5);
        let obs = ObservationSet::new(indices.clone(), values.clone(), noise).unwrap();

        let post = posterior(&kernel, &obs, &grid).unwrap();
        let obs_pts: Vec<Vec<f64>> = indices.iter().map(|&i| pts[i].clone()).collect();
        let (mean, std) = dense_posterior(&kernel, &obs_pts, &values, noise, 0.0, &pts);
        for i in 0..n_points {
            assert!((post.mean[i] - mean[i]).abs() < 1e-8);
            assert!((post.std_dev[i] - std[i]).abs() < 1e-8);
        }

        let lml = log_marginal_likelihood(&kernel, &obs, &grid).unwrap();
        let oracle = dense_lml(&kernel, &obs_pts, &values, noise);
        assert!((lml - oracle).abs() < 1e-8, "lml {lml} vs oracle {oracle}");
    }
}

#[test]
fn incremental_surrogate_matches_batch_everywhere() {
    let mut rng = cobalt::rng::stream(777, "incremental", 0);
    for trial in 0..20 {
        let kernel = random_kernel(&mut rng, 1);
        let grid = Arc::new(CandidateGrid::linspace_1d(-1.0, 1.0, 30));
        let noise = rng.gen_range(0.01..0.3);
        let mut surrogate = Surrogate::new("f", kernel.clone(), noise, false, grid.clone()).unwrap();
        let mut indices = Vec::new();
        let mut values = Vec::new();
        for _ in 0..10 {
            let i = rng.gen_range(0..grid.len());
            let v = rng.gen_range(-2.0..2.0);
            surrogate.observe(i, v).unwrap();
            indices.push(i);
            values.push(v);
        }
        let inc = surrogate.posterior_std();
        let obs = ObservationSet::new(indices, values, noise).unwrap();
        let batch = posterior(&kernel, &obs, &grid).unwrap();
        let max_dmean = inc
            .mean
            .iter()
            .zip(&batch.mean)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        let max_dstd = inc
            .std_dev
            .iter()
            .zip(&batch.std_dev)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0_f64, f64::max);
        assert!(max_dmean <= 1e-10, "trial {trial}: mean drift {max_dmean}");
        assert!(max_dstd <= 1e-10, "trial {trial}: std drift {max_dstd}");
    }
}

#[test]
fn standardization_is_exact_affine_transform() {
    // De-standardized posterior must match a raw-space oracle that uses the
    // surrogate's transform as a constant prior mean and rescaled kernel.
    let grid = Arc::new(CandidateGrid::linspace_1d(0.0, 1.0, 25));
    let kernel = Kernel::new(KernelFamily::Matern52, vec![0.3], 1.0).unwrap();
    let noise = 0.04;
    let mut s = Surrogate::new("f", kernel.clone(), noise, true, grid.clone()).unwrap();
    let idx = [2usize, 7, 12, 18, 23, 5];
    let val = [130.0, 128.5, 131.2, 127.9, 129.4, 132.8];
    for (&i, &v) in idx.iter().zip(&val) {
        s.observe(i, v).unwrap();
    }
    let (shift, scale) = s.transform();
    let raw = s.posterior_raw();

    // Oracle in raw units: prior mean `shift`, kernel variance scaled by
    // `scale^2`, same noise in raw units.
    let raw_kernel = Kernel::new(
        kernel.family,
        kernel.lengthscales.clone(),
        kernel.outputscale * scale * scale,
    )
    .unwrap();
    let pts: Vec<Vec<f64>> = idx.iter().map(|&i| grid.point(i).to_vec()).collect();
    let query: Vec<Vec<f64>> = grid.points().map(<[f64]>::to_vec).collect();
    let (mean, std) = dense_posterior(&raw_kernel, &pts, &val, noise, shift, &query);
    for x in 0..grid.len() {
        assert!(
            (raw.mean[x] - mean[x]).abs() < 1e-8,
            "mean mismatch at {x}: {} vs {}",
            raw.mean[x],
            mean[x]
        );
        assert!((raw.std_dev[x] - std[x]).abs() < 1e-8);
    }
}

#[test]
fn prior_sampler_pointwise_variance_near_one() {
    // Monte-Carlo check over 200 draws on a 2000-point grid.
    let grid = CandidateGrid::linspace_1d(0.0, 100.0, 2000);
    let kernel = Kernel::new(KernelFamily::Matern52, vec![1.0], 1.0).unwrap();
    let sampler = PriorSampler::new(&kernel, &grid).unwrap();
    let draws: Vec<Vec<f64>> = (0..200).map(|s| sampler.draw(s)).collect();
    let mut mean_var = 0.0;
    for x in 0..grid.len() {
        let m = draws.iter().map(|d| d[x]).sum::<f64>() / draws.len() as f64;
        let v = draws.iter().map(|d| (d[x] - m) * (d[x] - m)).sum::<f64>() / draws.len() as f64;
        mean_var += v;
    }
    mean_var /= grid.len() as f64;
    assert!(
        (0.8..=1.2).contains(&mean_var),
        "average pointwise variance {mean_var}"
    );
}
