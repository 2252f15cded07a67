//! Independent reference implementations used by the tests. Nothing here
//! calls into the code paths it is used to check.
#![allow(dead_code)]

/// Row-major coordinates of `index` in a grid with `dims`.
pub fn coords(dims: &[usize], mut index: usize) -> Vec<usize> {
    let mut out = vec![0; dims.len()];
    for axis in (0..dims.len()).rev() {
        out[axis] = index % dims[axis];
        index /= dims[axis];
    }
    out
}

pub fn linear(dims: &[usize], coords: &[usize]) -> usize {
    coords.iter().zip(dims).fold(0, |acc, (&c, &d)| acc * d + c)
}

/// Dense circular convolution with the truncated isotropic Gaussian sampled
/// directly on the d-dimensional offset cube `[-R, R]^d`, `R = ceil(3σ)`,
/// normalized over the cube.
pub fn dense_gaussian_convolution(dims: &[usize], values: &[f64], sigma: f64) -> Vec<f64> {
    let radius = (3.0 * sigma).ceil() as i64;
    let rank = dims.len();
    let full = [dims[0], dims[1], if rank == 3 { dims[2] } else { 1 }];
    let span = |axis: usize| if axis < rank { -radius..=radius } else { 0..=0 };
    let mut kernel: Vec<([i64; 3], f64)> = Vec::new();
    for a in span(0) {
        for b in span(1) {
            for c in span(2) {
                let r2 = (a * a + b * b + c * c) as f64;
                kernel.push(([a, b, c], (-r2 / (2.0 * sigma * sigma)).exp()));
            }
        }
    }
    let z: f64 = kernel.iter().map(|(_, w)| w).sum();
    let mut out = vec![0.0; values.len()];
    for x in 0..full[0] {
        for y in 0..full[1] {
            for t in 0..full[2] {
                let mut acc = 0.0;
                for (off, w) in &kernel {
                    let sx = (x as i64 - off[0]).rem_euclid(full[0] as i64) as usize;
                    let sy = (y as i64 - off[1]).rem_euclid(full[1] as i64) as usize;
                    let st = (t as i64 - off[2]).rem_euclid(full[2] as i64) as usize;
                    acc += w / z * values[(sx * full[1] + sy) * full[2] + st];
                }
                out[(x * full[1] + y) * full[2] + t] = acc;
            }
        }
    }
    out
}

/// Step-by-step transliteration of the greedy mask-set algorithm.
///
/// `omega` lists positions as (x, y) = (row, col). Returns K matrices with
/// 1 = visible, 0 = masked.
pub fn greedy_mask_sets(
    k: usize,
    n1: usize,
    n2: usize,
    delta: usize,
    w: [f64; 4],
    omega: &[(usize, usize)],
    gamma: f64,
) -> Vec<Vec<Vec<u8>>> {
    // Initialize M^i <- 0
    let mut m = vec![vec![vec![0u8; n2]; n1]; k];
    // V <- γ N1 N2, as a whole number of patches
    let v = (gamma * (n1 * n2) as f64 + 1e-9).floor() as usize;
    let h = (delta / 2) as i64;
    for &(x, y) in omega {
        let mut lambda = f64::INFINITY;
        let mut i_hat: i64 = -1;
        for i in 0..k {
            let sum: usize = m[i].iter().flatten().map(|&b| b as usize).sum();
            if sum >= v {
                continue;
            }
            // local window U centered at (x, y), zero outside the grid
            let mut u = vec![vec![0u8; delta]; delta];
            for a in 0..delta {
                for b in 0..delta {
                    let gx = x as i64 + a as i64 - h;
                    let gy = y as i64 + b as i64 - h;
                    if gx >= 0 && gy >= 0 && (gx as usize) < n1 && (gy as usize) < n2 {
                        u[a][b] = m[i][gx as usize][gy as usize];
                    }
                }
            }
            let c = h as usize;
            let mut d1 = 0u32;
            let mut d2 = 0u32;
            let mut d3 = 0u32;
            let mut d4 = 0u32;
            for j in 0..delta {
                if j == c {
                    continue;
                }
                d1 += u[c][j] as u32;
                d2 += u[j][c] as u32;
                d3 += u[j][j] as u32;
                d4 += u[j][delta - 1 - j] as u32;
            }
            let s = w[0] * d1 as f64 + w[1] * d2 as f64 + w[2] * d3 as f64 + w[3] * d4 as f64;
            if s < lambda {
                lambda = s;
                i_hat = i as i64;
            }
        }
        for i in 0..k {
            m[i][x][y] = if i as i64 == i_hat { 1 } else { 0 };
        }
    }
    m
}

/// Mean distance from each point to its nearest other point.
pub fn mean_nearest_neighbor(points: &[(usize, usize)]) -> f64 {
    let mut total = 0.0;
    for (i, a) in points.iter().enumerate() {
        let mut best = f64::INFINITY;
        for (j, b) in points.iter().enumerate() {
            if i != j {
                let dx = a.0 as f64 - b.0 as f64;
                let dy = a.1 as f64 - b.1 as f64;
                best = best.min((dx * dx + dy * dy).sqrt());
            }
        }
        total += best;
    }
    total / points.len() as f64
}

/// Fraction of DFT coefficients (DC excluded, radius ≤ 1/2) in the low, mid
/// and high bands, counted by enumeration.
pub fn flat_band_proportions(dims: &[usize]) -> [f64; 3] {
    let total: usize = dims.iter().product();
    let mut counts = [0usize; 3];
    for i in 1..total {
        let c = coords(dims, i);
        let r2: f64 = c
            .iter()
            .zip(dims)
            .map(|(&k, &n)| {
                let s = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
                (s / n as f64).powi(2)
            })
            .sum();
        let r = r2.sqrt();
        if r > 0.5 {
            continue;
        }
        let band = if r < 1.0 / 6.0 {
            0
        } else if r < 1.0 / 3.0 {
            1
        } else {
            2
        };
        counts[band] += 1;
    }
    let n: usize = counts.iter().sum();
    counts.map(|c| c as f64 / n as f64)
}
