//! Search over pure-state decompositions of a fixed mixed state.
//!
//! Every size-`m` decomposition of `ρ = Σ_j λ_j |e_j><e_j|` (rank `r`) arises as
//! `|ψ̃_i> = Σ_j U_ij √λ_j |e_j>` for an `m x r` isometry `U`. We write
//! `U = W₀ · G₁ ⋯ G_K · E` where `W₀` is the starting unitary of a restart, each
//! `G_k` a Givens rotation with phase on one coordinate pair of `ℂ^m`, and `E`
//! keeps the first `r` columns. The rotation angles and phases are the search
//! coordinates.
//!
//! Local descent is coordinate-wise golden-section search. Walking the rotations in
//! order lets each 1-D evaluation touch only the two affected rows of `G_k`, so one
//! objective call costs `O(m · dim)` plus the branch entropies.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::qmat::{herm_eigvals, numerical_rank, CMatrix, DensityMatrix};
use crate::random::{random_unitary, stream_rng};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Options shared by the decomposition searches.
#[derive(Debug, Clone, PartialEq)]
pub struct SearchOptions {
    /// Decomposition size; defaults to `min(rank², 2·rank)`.
    pub max_items: Option<usize>,
    /// Number of restarts. Restart 0 starts from the spectral ensemble, the rest
    /// from Haar-random unitaries drawn from stream `(seed, index)`.
    pub restarts: usize,
    pub seed: u64,
    /// Convergence tolerance on the objective.
    pub tol: f64,
    /// Upper limit on coordinate sweeps per restart.
    pub max_sweeps: usize,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_items: None, restarts: 20, seed: 0, tol: 1e-7, max_sweeps: 60 }
    }
}

pub fn default_items(rank: usize) -> usize {
    (rank * rank).min(2 * rank)
}

/// Scaled eigenvectors `√λ_j e_j` of a bipartite state.
#[derive(Debug, Clone)]
pub(crate) struct Ensemble {
    pub da: usize,
    pub db: usize,
    pub rank: usize,
    /// `rank x (da·db)`, row-major.
    scaled: Vec<Complex64>,
}

impl Ensemble {
    pub fn new(rho: &DensityMatrix) -> Result<Self> {
        let [da, db] = rho.dims()[..] else {
            return Err(Error::InvalidSubsystem(format!("expected a bipartite state, got dims {:?}", rho.dims())));
        };
        let eig = rho.eig();
        let rank = numerical_rank(&eig.values);
        let dim = da * db;
        let mut scaled = Vec::with_capacity(rank * dim);
        for j in 0..rank {
            let w = eig.values[j].max(0.0).sqrt();
            scaled.extend((0..dim).map(|d| eig.vectors[(d, j)] * w));
        }
        Ok(Self { da, db, rank, scaled })
    }

    pub fn dim(&self) -> usize {
        self.da * self.db
    }

    /// `U F` for an `m x rank` matrix `U`, as `m` unnormalized vectors.
    fn vectors(&self, u: &CMatrix) -> Vec<Complex64> {
        mat_times_rows(u, &self.scaled, self.dim())
    }
}

/// `a (n x k)` times row-major `rows (k x dim)`.
fn mat_times_rows(a: &CMatrix, rows: &[Complex64], dim: usize) -> Vec<Complex64> {
    let mut out = vec![ZERO; a.rows() * dim];
    for i in 0..a.rows() {
        let dst = &mut out[i * dim..(i + 1) * dim];
        for j in 0..a.cols() {
            let c = a[(i, j)];
            if c == ZERO {
                continue;
            }
            for (o, x) in dst.iter_mut().zip(&rows[j * dim..(j + 1) * dim]) {
                *o += c * x;
            }
        }
    }
    out
}

/// Objective over a list of unnormalized branch vectors `ψ̃_i`.
pub(crate) trait Objective: Sync {
    fn eval(&self, vectors: &[Complex64]) -> f64;
}

/// `Σ_i p_i H(A)_{ψ_i}` with `p_i = ‖ψ̃_i‖²`.
pub(crate) struct AverageEntanglement {
    pub da: usize,
    pub db: usize,
}

impl Objective for AverageEntanglement {
    fn eval(&self, vectors: &[Complex64]) -> f64 {
        let dim = self.da * self.db;
        vectors.chunks_exact(dim).map(|v| branch_entropy_unnormalized(v, self.da, self.db)).sum()
    }
}

/// `p H(tr_B ψψ† / p)` for an unnormalized `ψ` with `p = ‖ψ‖²`, in bits.
pub(crate) fn branch_entropy_unnormalized(v: &[Complex64], da: usize, db: usize) -> f64 {
    let p: f64 = v.iter().map(Complex64::norm_sqr).sum();
    if p <= 0.0 {
        return 0.0;
    }
    let mu = reduced_spectrum(v, da, db);
    let s: f64 = mu.iter().filter(|&&m| m > 0.0).map(|&m| -m * m.log2()).sum();
    (s + p * p.log2()).max(0.0)
}

/// Eigenvalues of the reduced operator of `ψψ†` on the smaller factor.
pub(crate) fn reduced_spectrum(v: &[Complex64], da: usize, db: usize) -> Vec<f64> {
    // σ = M M† (da ≤ db) or Mᵀ M̄ (otherwise); both share the nonzero spectrum
    let (small, large, at) = if da <= db {
        (da, db, Box::new(move |s: usize, l: usize| s * db + l) as Box<dyn Fn(usize, usize) -> usize>)
    } else {
        (db, da, Box::new(move |s: usize, l: usize| l * db + s) as Box<dyn Fn(usize, usize) -> usize>)
    };
    if small == 1 {
        return vec![v.iter().map(Complex64::norm_sqr).sum()];
    }
    if small == 2 {
        let mut a = 0.0;
        let mut d = 0.0;
        let mut b = ZERO;
        for l in 0..large {
            let x = v[at(0, l)];
            let y = v[at(1, l)];
            a += x.norm_sqr();
            d += y.norm_sqr();
            b += x * y.conj();
        }
        let half = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        return vec![(half + disc).max(0.0), (half - disc).max(0.0)];
    }
    let mut sigma = CMatrix::zeros(small, small);
    for s1 in 0..small {
        for s2 in s1..small {
            let z: Complex64 = (0..large).map(|l| v[at(s1, l)] * v[at(s2, l)].conj()).sum();
            sigma[(s1, s2)] = z;
            sigma[(s2, s1)] = z.conj();
        }
    }
    herm_eigvals(&sigma).expect("Gram matrix is Hermitian").into_iter().map(|l| l.max(0.0)).collect()
}

#[derive(Clone, Copy)]
struct Rotation([Complex64; 4]);

impl Rotation {
    fn new(theta: f64, phi: f64) -> Self {
        let (s, c) = theta.sin_cos();
        let e = Complex64::from_polar(1.0, phi);
        Self([Complex64::new(c, 0.0), -e * s, e.conj() * s, Complex64::new(c, 0.0)])
    }

    /// Rows `p, q` of `x` become `G [x_p; x_q]`.
    fn apply_left(&self, p: usize, q: usize, x: &mut CMatrix) {
        let [g00, g01, g10, g11] = self.0;
        for c in 0..x.cols() {
            let (xp, xq) = (x[(p, c)], x[(q, c)]);
            x[(p, c)] = g00 * xp + g01 * xq;
            x[(q, c)] = g10 * xp + g11 * xq;
        }
    }

    /// Columns `p, q` of `l` become `[l_p, l_q] G`.
    fn apply_right(&self, p: usize, q: usize, l: &mut CMatrix) {
        let [g00, g01, g10, g11] = self.0;
        for r in 0..l.rows() {
            let (lp, lq) = (l[(r, p)], l[(r, q)]);
            l[(r, p)] = lp * g00 + lq * g10;
            l[(r, q)] = lp * g01 + lq * g11;
        }
    }
}

/// `W₀ · G₁ ⋯ G_K · E` with two parameters per rotation.
struct GivensChain {
    r: usize,
    base: CMatrix,
    pairs: Vec<(usize, usize)>,
    params: Vec<f64>,
}

impl GivensChain {
    fn new(base: CMatrix, r: usize) -> Self {
        let m = base.rows();
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|p| ((p + 1)..m).map(move |q| (p, q))).collect();
        let params = vec![0.0; 2 * pairs.len()];
        Self { r, base, pairs, params }
    }

    fn m(&self) -> usize {
        self.base.rows()
    }

    fn rotation(&self, k: usize) -> Rotation {
        Rotation::new(self.params[2 * k], self.params[2 * k + 1])
    }

    fn selector(&self) -> CMatrix {
        let mut e = CMatrix::zeros(self.m(), self.r);
        for j in 0..self.r {
            e[(j, j)] = Complex64::new(1.0, 0.0);
        }
        e
    }

    fn isometry(&self) -> CMatrix {
        let mut x = self.selector();
        for k in (0..self.pairs.len()).rev() {
            let (p, q) = self.pairs[k];
            self.rotation(k).apply_left(p, q, &mut x);
        }
        &self.base * &x
    }

    /// One pass over all coordinates; returns the objective after the pass.
    fn sweep(&mut self, ens: &Ensemble, obj: &dyn Objective, mut current: f64) -> f64 {
        let n_pairs = self.pairs.len();
        let dim = ens.dim();
        // suffix[k] = G_k ⋯ G_K E
        let mut suffix = vec![self.selector(); n_pairs + 1];
        for k in (0..n_pairs).rev() {
            let mut s = suffix[k + 1].clone();
            let (p, q) = self.pairs[k];
            self.rotation(k).apply_left(p, q, &mut s);
            suffix[k] = s;
        }
        let mut left = self.base.clone();
        let mut scratch = vec![ZERO; self.m() * dim];
        for k in 0..n_pairs {
            let (p, q) = self.pairs[k];
            let rf = mat_times_rows(&suffix[k + 1], &ens.scaled, dim);
            let full = mat_times_rows(&left, &rf, dim);
            let rp = &rf[p * dim..(p + 1) * dim];
            let rq = &rf[q * dim..(q + 1) * dim];
            let a = left.column(p);
            let b = left.column(q);
            let mut base = full;
            for i in 0..self.m() {
                for d in 0..dim {
                    base[i * dim + d] -= a[i] * rp[d] + b[i] * rq[d];
                }
            }
            let mut eval = |theta: f64, phi: f64| -> f64 {
                let [g00, g01, g10, g11] = Rotation::new(theta, phi).0;
                for i in 0..a.len() {
                    for d in 0..dim {
                        let top = g00 * rp[d] + g01 * rq[d];
                        let bottom = g10 * rp[d] + g11 * rq[d];
                        scratch[i * dim + d] = base[i * dim + d] + a[i] * top + b[i] * bottom;
                    }
                }
                obj.eval(&scratch)
            };

            let (theta, phi) = (self.params[2 * k], self.params[2 * k + 1]);
            let (theta, v) = golden_section(|t| eval(t, phi), theta, PI / 2.0, current);
            current = v;
            let (phi, v) = golden_section(|f| eval(theta, f), phi, PI, current);
            current = v;
            self.params[2 * k] = theta;
            self.params[2 * k + 1] = phi;
            self.rotation(k).apply_right(p, q, &mut left);
        }
        current
    }
}

/// Minimizes `f` on `[center - half_width, center + half_width]`, never returning
/// a point worse than `center` (whose value is `f_center`).
fn golden_section(mut f: impl FnMut(f64) -> f64, center: f64, half_width: f64, f_center: f64) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (center - half_width, center + half_width);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    while b - a > 1e-8 {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
    }
    let (x, fx) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    if fx < f_center {
        (x, fx)
    } else {
        (center, f_center)
    }
}

/// Outcome of one restart.
#[derive(Debug, Clone)]
pub(crate) struct Candidate {
    pub value: f64,
    /// `m` unnormalized branch vectors, row-major.
    pub vectors: Vec<Complex64>,
    /// The branch vectors the restart started from.
    pub start: Vec<Complex64>,
}

#[derive(Debug, Clone)]
pub(crate) struct SearchOutcome {
    pub candidates: Vec<Candidate>,
    pub best: usize,
    pub converged: bool,
}

pub(crate) fn minimize(ens: &Ensemble, items: usize, obj: &dyn Objective, opts: &SearchOptions) -> SearchOutcome {
    let restarts = opts.restarts.max(1);
    let candidates: Vec<Candidate> = (0..restarts)
        .into_par_iter()
        .map(|i| {
            let base = if i == 0 {
                CMatrix::identity(items)
            } else {
                let mut rng = stream_rng(opts.seed, i as u64);
                random_unitary(items, &mut rng)
            };
            run_restart(ens, base, obj, opts)
        })
        .collect();

    let best_upto = |n: usize| candidates[..n].iter().map(|c| c.value).fold(f64::INFINITY, f64::min);
    let best = candidates
        .iter()
        .enumerate()
        .min_by(|x, y| x.1.value.total_cmp(&y.1.value).then(x.0.cmp(&y.0)))
        .map(|(i, _)| i)
        .expect("at least one restart");
    let converged = restarts >= 2 && best_upto(restarts - 1) - best_upto(restarts) <= opts.tol;
    SearchOutcome { candidates, best, converged }
}

fn run_restart(ens: &Ensemble, base: CMatrix, obj: &dyn Objective, opts: &SearchOptions) -> Candidate {
    let mut chain = GivensChain::new(base, ens.rank);
    let start = ens.vectors(&chain.isometry());
    let mut value = obj.eval(&start);
    if !chain.pairs.is_empty() {
        for _ in 0..opts.max_sweeps.max(1) {
            let next = chain.sweep(ens, obj, value);
            let gain = value - next;
            value = next;
            if gain <= opts.tol * 1e-2 {
                break;
            }
        }
    }
    let vectors = ens.vectors(&chain.isometry());
    // re-evaluate on the assembled isometry rather than trusting the incremental value
    let value = obj.eval(&vectors);
    Candidate { value, vectors, start }
}
