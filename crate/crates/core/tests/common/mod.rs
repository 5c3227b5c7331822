//! Independent reference implementations used by the integration tests.
#![allow(dead_code)]

use entcost::entropy::SMOOTHING_SLACK;
use entcost::qmat::{CMatrix, DensityMatrix};
use nalgebra::{Complex, DMatrix};
use num_complex::Complex64;

pub fn to_nalgebra(m: &CMatrix) -> DMatrix<Complex<f64>> {
    DMatrix::from_fn(m.rows(), m.cols(), |r, c| m[(r, c)])
}

/// Eigenvalues of the (non-Hermitian) product `ρ ρ̃` read off a complex Schur form.
pub fn spin_flip_product_eigenvalues(rho: &DensityMatrix) -> Vec<Complex64> {
    let m = to_nalgebra(rho.mat());
    let y = DMatrix::from_row_slice(
        2,
        2,
        &[Complex::new(0.0, 0.0), Complex::new(0.0, -1.0), Complex::new(0.0, 1.0), Complex::new(0.0, 0.0)],
    );
    let yy = y.kronecker(&y);
    let flipped = &yy * m.conjugate() * &yy;
    let (_, t) = (&m * flipped).schur().unpack();
    (0..4).map(|i| t[(i, i)]).collect()
}

/// Wootters concurrence from the real parts of the `ρρ̃` spectrum.
///
/// Rank-deficient inputs leave exact zeros in the spectrum that surface as ±1e-17
/// complex noise; anything below 1e-13 of the largest modulus counts as zero.
pub fn reference_concurrence(rho: &DensityMatrix) -> f64 {
    let spectrum = spin_flip_product_eigenvalues(rho);
    let scale = spectrum.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut lambda: Vec<f64> =
        spectrum.iter().map(|z| if z.norm() <= 1e-13 * scale { 0.0 } else { z.re.max(0.0) }).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    let s: Vec<f64> = lambda.iter().map(|l| l.sqrt()).collect();
    (s[0] - s[1] - s[2] - s[3]).max(0.0)
}

pub fn reference_binary_entropy(p: f64) -> f64 {
    [p, 1.0 - p].iter().filter(|&&x| x > 0.0).map(|&x| -x * x.log2()).sum()
}

pub fn reference_eof(rho: &DensityMatrix) -> f64 {
    let c = reference_concurrence(rho);
    reference_binary_entropy(0.5 + 0.5 * (1.0 - c * c).max(0.0).sqrt())
}

/// Smooth `H₀^ε(X|Y)` by enumerating every kept subset of every column.
pub fn brute_force_smooth_h0(columns: &[Vec<f64>], eps: f64) -> f64 {
    let atoms: Vec<Vec<f64>> = columns.iter().map(|c| c.iter().copied().filter(|&w| w > 0.0).collect()).collect();
    let mut best = usize::MAX;
    let mut found = false;
    let mut masks = vec![0usize; atoms.len()];
    loop {
        let removed: f64 = atoms
            .iter()
            .zip(&masks)
            .map(|(col, &mask)| {
                col.iter().enumerate().filter(|(i, _)| mask & (1 << i) == 0).map(|(_, w)| w).sum::<f64>()
            })
            .sum();
        if removed <= eps + SMOOTHING_SLACK {
            let support = masks.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0);
            best = best.min(support);
            found = true;
        }
        // odometer over per-column masks
        let mut k = 0;
        loop {
            if k == masks.len() {
                return finish(found, best);
            }
            masks[k] += 1;
            if masks[k] < (1 << atoms[k].len()) {
                break;
            }
            masks[k] = 0;
            k += 1;
        }
    }
}

fn finish(found: bool, best: usize) -> f64 {
    assert!(found, "keeping everything is always feasible");
    if best == 0 {
        f64::NEG_INFINITY
    } else {
        (best as f64).log2()
    }
}
