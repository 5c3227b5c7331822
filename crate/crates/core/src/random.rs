//! Seeded random states, unitaries and channels.
//!
//! All generators take an explicit RNG. [`stream_rng`] derives independent
//! ChaCha streams from a `(seed, index)` pair so parallel restarts stay
//! reproducible regardless of scheduling.

use num_complex::Complex64;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channels::KrausChannel;
use crate::qmat::{CMatrix, DensityMatrix, PureState};

pub type SeededRng = ChaCha8Rng;

pub fn seeded_rng(seed: u64) -> SeededRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// RNG for the `index`-th independent stream under `seed`.
pub fn stream_rng(seed: u64, index: u64) -> SeededRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    let data = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    CMatrix::new(rows, cols, data).expect("gaussian entries are finite")
}

/// `rows x cols` matrix with orthonormal columns (`rows >= cols`), Haar distributed.
///
/// Gram-Schmidt on a complex Ginibre matrix; the implicit R factor has a positive
/// diagonal, which is what makes the result Haar.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMatrix {
    assert!(rows >= cols, "isometry needs rows >= cols");
    loop {
        let g = gaussian_matrix(rows, cols, rng);
        let mut q = CMatrix::zeros(rows, cols);
        let mut ok = true;
        for j in 0..cols {
            let mut v = g.column(j);
            // two passes keep orthogonality at machine precision
            for _ in 0..2 {
                for k in 0..j {
                    let proj: Complex64 = (0..rows).map(|r| q[(r, k)].conj() * v[r]).sum();
                    for r in 0..rows {
                        v[r] -= proj * q[(r, k)];
                    }
                }
            }
            let norm = crate::qmat::vec_norm(&v);
            if norm < 1e-10 {
                ok = false;
                break;
            }
            for r in 0..rows {
                q[(r, j)] = v[r] / norm;
            }
        }
        if ok {
            return q;
        }
    }
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMatrix {
    random_isometry(d, d, rng)
}

pub fn random_pure<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> PureState {
    let total: usize = dims.iter().product();
    let v = (0..total).map(|_| gaussian_complex(rng)).collect();
    PureState::normalized(dims.to_vec(), v).expect("gaussian vector is nonzero")
}

/// Random state of rank at most `rank`, `G G† / tr(G G†)` with Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rank: usize, rng: &mut R) -> DensityMatrix {
    let total: usize = dims.iter().product();
    let g = gaussian_matrix(total, rank.max(1), rng);
    let w = &g * &g.adjoint();
    let tr = w.trace().re;
    DensityMatrix::new(dims.to_vec(), w.scale_real(1.0 / tr).hermitian_part()).expect("Wishart matrix is a valid state")
}

/// Random channel with `n_kraus` operators, cut from a Haar isometry `d_in -> d_out * n_kraus`.
/// Needs `d_out * n_kraus >= d_in`.
pub fn random_channel<R: Rng + ?Sized>(d_in: usize, d_out: usize, n_kraus: usize, rng: &mut R) -> KrausChannel {
    let v = random_isometry(d_out * n_kraus, d_in, rng);
    let kraus = (0..n_kraus)
        .map(|k| {
            let mut m = CMatrix::zeros(d_out, d_in);
            for r in 0..d_out {
                for c in 0..d_in {
                    m[(r, c)] = v[(k * d_out + r, c)];
                }
            }
            m
        })
        .collect();
    KrausChannel::new(d_in, d_out, kraus).expect("isometry blocks are complete")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn isometry_columns_are_orthonormal() {
        let mut rng = seeded_rng(7);
        let q = random_isometry(6, 4, &mut rng);
        let gram = &q.adjoint() * &q;
        assert!(gram.max_abs_diff(&CMatrix::identity(4)) < 1e-12);
    }

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a: u64 = stream_rng(3, 1).random();
        let b: u64 = stream_rng(3, 1).random();
        let c: u64 = stream_rng(3, 2).random();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn random_density_has_requested_rank() {
        let mut rng = seeded_rng(1);
        let rho = random_density(&[2, 2], 2, &mut rng);
        assert_eq!(rho.rank(), 2);
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }
}
