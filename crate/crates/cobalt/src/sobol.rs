//! Base-2 Sobol sequence (up to 5 dimensions) with seeded digital-shift
//! scrambling, for low-discrepancy candidate grids.
//!
//! Direction numbers are the standard Joe–Kuo values for the first five
//! dimensions. A digital shift XORs every point of one dimension with a
//! fixed random word, which relocates the points while preserving the
//! dyadic stratification: among the first `2^m` points, every dyadic bin
//! of width `2^-m` in every dimension still holds exactly one point.

use rand::RngCore;

const BITS: u32 = 32;

struct Dimension {
    degree: usize,
    poly: u32,
    minit: &'static [u32],
}

/// Joe–Kuo primitive polynomials and initial direction numbers, dims 2..=5.
const DIMS: [Dimension; 4] = [
    Dimension { degree: 1, poly: 0, minit: &[1] },
    Dimension { degree: 2, poly: 1, minit: &[1, 3] },
    Dimension { degree: 3, poly: 1, minit: &[1, 3, 1] },
    Dimension { degree: 3, poly: 2, minit: &[1, 1, 1] },
];

fn direction_numbers(dim: usize) -> Vec<u32> {
    let l = BITS as usize;
    let mut v = vec![0u32; l + 1];
    if dim == 0 {
        for j in 1..=l {
            v[j] = 1 << (BITS - j as u32);
        }
        return v;
    }
    let d = &DIMS[dim - 1];
    let s = d.degree;
    for j in 1..=s.min(l) {
        v[j] = d.minit[j - 1] << (BITS - j as u32);
    }
    for j in (s + 1)..=l {
        v[j] = v[j - s] ^ (v[j - s] >> s);
        for k in 1..s {
            if (d.poly >> (s - 1 - k)) & 1 == 1 {
                v[j] ^= v[j - k];
            }
        }
    }
    v
}

/// Generate `n` points in `[0,1)^dim`, `dim <= 5`, scrambled per seed.
pub fn sobol_points(dim: usize, n: usize, seed: u64) -> Vec<Vec<f64>> {
    assert!(dim >= 1 && dim <= 5, "direction numbers cover dims 1..=5");
    let dirs: Vec<Vec<u32>> = (0..dim).map(direction_numbers).collect();
    let mut rng = crate::rng::stream(seed, "sobol-shift", 0);
    let shifts: Vec<u32> = (0..dim).map(|_| rng.next_u32()).collect();

    let mut state = vec![0u32; dim];
    let mut out = Vec::with_capacity(n);
    let scale = 1.0 / (1u64 << BITS) as f64;
    for i in 0..n {
        let point: Vec<f64> = state
            .iter()
            .zip(&shifts)
            .map(|(&x, &sh)| f64::from(x ^ sh) * scale)
            .collect();
        out.push(point);
        // lowest zero bit of i (1-based) selects the next direction number
        let c = (i as u32).trailing_ones() as usize + 1;
        for (x, v) in state.iter_mut().zip(&dirs) {
            *x ^= v[c];
        }
    }
    out
}

/// Scale `[0,1)` points into a box given by per-dimension `(lo, hi)` bounds.
pub fn scale_to_box(points: &[Vec<f64>], bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    points
        .iter()
        .map(|p| {
            p.iter()
                .zip(bounds)
                .map(|(&u, &(lo, hi))| lo + u * (hi - lo))
                .collect()
        })
        .collect()
}
