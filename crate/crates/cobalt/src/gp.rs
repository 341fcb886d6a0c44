//! Exact Gaussian process regression on a finite candidate grid.
//!
//! Pure operations: given a kernel and noisy observations at grid points,
//! compute the posterior mean and pointwise standard deviation at every grid
//! point, the log marginal likelihood of the observations, and draws from
//! the prior. The stateful incremental engine lives in [`crate::surrogate`].

use rand::Rng;
use rand_distr::StandardNormal;

use crate::grid::CandidateGrid;
use crate::kernel::{gram, Kernel};
use crate::linalg::CholeskyFactor;
use crate::{Error, Result};

/// Noisy observations of one function at grid indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ObservationSet {
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// Known i.i.d. Gaussian noise variance for this function.
    pub noise_variance: f64,
}

impl ObservationSet {
    pub fn new(indices: Vec<usize>, values: Vec<f64>, noise_variance: f64) -> Result<Self> {
        if indices.len() != values.len() {
            return Err(Error::Contract(
                "observation indices and values must have equal length".into(),
            ));
        }
        if !(noise_variance > 0.0) {
            return Err(Error::Contract("noise variance must be positive".into()));
        }
        Ok(ObservationSet {
            indices,
            values,
            noise_variance,
        })
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// Posterior mean and standard deviation per grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorTable {
    pub mean: Vec<f64>,
    pub std_dev: Vec<f64>,
    pub iteration: usize,
}

fn obs_coords(obs: &ObservationSet, grid: &CandidateGrid) -> Result<Vec<Vec<f64>>> {
    let mut pts = Vec::with_capacity(obs.len());
    for &i in &obs.indices {
        if i >= grid.len() {
            return Err(Error::Contract(format!(
                "observation index {i} outside grid of size {}",
                grid.len()
            )));
        }
        pts.push(grid.point(i).to_vec());
    }
    Ok(pts)
}

/// Exact GP posterior over the grid under a zero prior mean.
///
/// With no observations this is the prior: zero mean, `sqrt(outputscale)`
/// standard deviation everywhere.
pub fn posterior(kernel: &Kernel, obs: &ObservationSet, grid: &CandidateGrid) -> Result<PosteriorTable> {
    posterior_named(kernel, obs, grid, "gp")
}

pub(crate) fn posterior_named(
    kernel: &Kernel,
    obs: &ObservationSet,
    grid: &CandidateGrid,
    function: &str,
) -> Result<PosteriorTable> {
    let n = obs.len();
    let m = grid.len();
    if n == 0 {
        return Ok(PosteriorTable {
            mean: vec![0.0; m],
            std_dev: vec![kernel.outputscale.sqrt(); m],
            iteration: 0,
        });
    }
    let pts = obs_coords(obs, grid)?;
    let mut k_obs = gram(kernel, &pts, &pts)?;
    for i in 0..n {
        k_obs.set(i, i, k_obs.get(i, i) + obs.noise_variance);
    }
    let (l, _) = CholeskyFactor::factor(&k_obs, function)?;
    let alpha = l.solve(&obs.values);
    let mut mean = Vec::with_capacity(m);
    let mut std_dev = Vec::with_capacity(m);
    let mut kx = vec![0.0; n];
    for x in grid.points() {
        for (j, p) in pts.iter().enumerate() {
            kx[j] = kernel.eval(p, x);
        }
        let mu = kx.iter().zip(&alpha).map(|(a, b)| a * b).sum::<f64>();
        let v = l.solve_lower(&kx);
        let var = kernel.outputscale - v.iter().map(|t| t * t).sum::<f64>();
        mean.push(mu);
        std_dev.push(var.max(0.0).sqrt());
    }
    Ok(PosteriorTable {
        mean,
        std_dev,
        iteration: n,
    })
}

/// Log evidence of the observations under `N(0, K + sigma^2 I)`.
pub fn log_marginal_likelihood(kernel: &Kernel, obs: &ObservationSet, grid: &CandidateGrid) -> Result<f64> {
    let pts = obs_coords(obs, grid)?;
    log_marginal_likelihood_coords(kernel, &pts, &obs.values, obs.noise_variance)
}

/// Same as [`log_marginal_likelihood`] but with explicit coordinates.
pub fn log_marginal_likelihood_coords(
    kernel: &Kernel,
    points: &[Vec<f64>],
    values: &[f64],
    noise_variance: f64,
) -> Result<f64> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Contract("log marginal likelihood needs observations".into()));
    }
    let mut k = gram(kernel, points, points)?;
    for i in 0..n {
        k.set(i, i, k.get(i, i) + noise_variance);
    }
    let (l, _) = CholeskyFactor::factor(&k, "lml")?;
    let w = l.solve_lower(values);
    let quad = w.iter().map(|v| v * v).sum::<f64>();
    Ok(-0.5 * quad - 0.5 * l.log_det() - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln())
}

/// Factored prior covariance over a grid, reusable across seeds.
pub struct PriorSampler {
    chol: CholeskyFactor,
    n: usize,
}

impl PriorSampler {
    pub fn new(kernel: &Kernel, grid: &CandidateGrid) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Contract("prior sampling needs a nonempty grid".into()));
        }
        let pts = grid.to_point_vecs();
        let k = gram(kernel, &pts, &pts)?;
        let (chol, _) = CholeskyFactor::factor(&k, "prior")?;
        Ok(PriorSampler { chol, n: grid.len() })
    }

    /// One zero-mean draw, deterministic per seed.
    pub fn draw(&self, seed: u64) -> Vec<f64> {
        let mut rng = crate::rng::stream(seed, "prior-draw", 0);
        let z: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        self.chol.mul_lower(&z)
    }
}

/// One draw from `N(0, Gram(grid) + jitter)`, deterministic per seed.
pub fn sample_prior(kernel: &Kernel, grid: &CandidateGrid, seed: u64) -> Result<Vec<f64>> {
    Ok(PriorSampler::new(kernel, grid)?.draw(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernel::KernelFamily;

    fn unit_kernel() -> Kernel {
        Kernel::new(KernelFamily::SquaredExponential, vec![1.0], 1.0).unwrap()
    }

    #[test]
    fn single_observation_closed_form() {
        // k(x0,x0)=1, sigma^2=1: mean = y/2, var = 1 - 1/2
        let grid = CandidateGrid::linspace_1d(0.0, 1.0, 2);
        let obs = ObservationSet::new(vec![0], vec![3.0], 1.0).unwrap();
        let post = posterior(&unit_kernel(), &obs, &grid).unwrap();
        assert!((post.mean[0] - 1.5).abs() < 1e-12);
        assert!((post.std_dev[0] - 0.5_f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_observations_gives_prior() {
        let k = Kernel::new(KernelFamily::Matern52, vec![1.0], 4.0).unwrap();
        let grid = CandidateGrid::linspace_1d(0.0, 1.0, 5);
        let obs = ObservationSet::new(vec![], vec![], 0.1).unwrap();
        let post = posterior(&k, &obs, &grid).unwrap();
        assert!(post.mean.iter().all(|&m| m == 0.0));
        assert!(post.std_dev.iter().all(|&s| s == 2.0));
    }

    #[test]
    fn lml_univariate_closed_forms() {
        let grid = CandidateGrid::linspace_1d(0.0, 1.0, 2);
        let obs0 = ObservationSet::new(vec![0], vec![0.0], 1.0).unwrap();
        let lml0 = log_marginal_likelihood(&unit_kernel(), &obs0, &grid).unwrap();
        assert!((lml0 - (-1.2655121234846454)).abs() < 1e-12);

        let obs2 = ObservationSet::new(vec![0], vec![2.0], 1.0).unwrap();
        let lml2 = log_marginal_likelihood(&unit_kernel(), &obs2, &grid).unwrap();
        assert!((lml2 - (-2.2655121234846454)).abs() < 1e-12);
    }

    #[test]
    fn prior_sample_deterministic_per_seed() {
        let k = Kernel::new(KernelFamily::Matern52, vec![0.5], 1.0).unwrap();
        let grid = CandidateGrid::linspace_1d(0.0, 1.0, 20);
        let a = sample_prior(&k, &grid, 42).unwrap();
        let b = sample_prior(&k, &grid, 42).unwrap();
        assert_eq!(a, b);
        let c = sample_prior(&k, &grid, 43).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn prior_sample_outputscale_scaling_exact() {
        let grid = CandidateGrid::linspace_1d(0.0, 1.0, 30);
        let k1 = Kernel::new(KernelFamily::Matern52, vec![0.5], 1.0).unwrap();
        let k4 = Kernel::new(KernelFamily::Matern52, vec![0.5], 4.0).unwrap();
        let a = sample_prior(&k1, &grid, 9).unwrap();
        let b = sample_prior(&k4, &grid, 9).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!((2.0 * x).to_bits(), y.to_bits());
        }
    }

    #[test]
    fn posterior_variance_never_exceeds_prior() {
        let k = Kernel::new(KernelFamily::Matern52, vec![0.7], 2.0).unwrap();
        let grid = CandidateGrid::linspace_1d(-1.0, 1.0, 40);
        let obs = ObservationSet::new(vec![3, 17, 30], vec![0.5, -0.2, 1.0], 0.05).unwrap();
        let post = posterior(&k, &obs, &grid).unwrap();
        for s in post.std_dev {
            assert!(s * s <= 2.0 + 1e-10);
        }
    }
}
