//! Entropies in bits: von Neumann, Shannon, and the alternative max-entropy `H₀`
//! (log-rank) with its smooth variants on classical and classical-quantum states.
//!
//! Smoothing cost model: for states diagonal in a common basis, zeroing an
//! eigenvalue (or a probability atom) `λ` moves the state by exactly `λ` in trace
//! distance, and only zeroing can lower a support size. The smooth entropy is
//! therefore the log of the smallest per-column support `s` such that the mass
//! outside the `s` largest atoms of every column, summed over columns, fits in
//! the budget.

use std::collections::HashMap;
use std::io::Read;

use crate::error::{Error, Result};
use crate::qmat::{self, CMatrix, DensityMatrix};

/// Slack added to the smoothing budget when comparing accumulated float masses.
pub const SMOOTHING_SLACK: f64 = 1e-12;

fn log2(x: f64) -> f64 {
    x.log2()
}

/// `-Σ p log p`, with `0 log 0 = 0`.
pub fn shannon(probs: &[f64]) -> f64 {
    // adding 0.0 turns the -0.0 of a point mass into 0.0
    probs.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.log2()).sum::<f64>() + 0.0
}

pub fn binary_h(p: f64) -> f64 {
    shannon(&[p, 1.0 - p])
}

pub fn von_neumann(rho: &DensityMatrix) -> f64 {
    let eig: Vec<f64> = rho.eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
    shannon(&eig)
}

/// `H(A|B) = H(AB) - H(B)` for a bipartite state.
pub fn cond_von_neumann(rho: &DensityMatrix) -> Result<f64> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidSubsystem(format!(
            "conditional entropy needs a bipartite state, got dims {:?}",
            rho.dims()
        )));
    }
    let b = rho.partial_trace(&[1])?;
    Ok(von_neumann(rho) - von_neumann(&b))
}

/// `log₂ rank(ρ)` under the shared rank threshold.
pub fn h0(rho: &DensityMatrix) -> f64 {
    log2_support(rho.rank())
}

fn log2_support(s: usize) -> f64 {
    if s == 0 {
        f64::NEG_INFINITY
    } else {
        log2(s as f64)
    }
}

/// Nonnegative, possibly subnormalized joint weights `P(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassicalJoint {
    nx: usize,
    ny: usize,
    // row-major: weights[x * ny + y]
    weights: Vec<f64>,
}

impl ClassicalJoint {
    pub fn new(nx: usize, ny: usize, weights: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 || weights.len() != nx * ny {
            return Err(Error::DimensionMismatch(format!(
                "{nx}x{ny} table needs {} weights, got {}",
                nx * ny,
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !w.is_finite() || **w < 0.0) {
            return Err(Error::OutOfRange(format!("weight {w} must be finite and nonnegative")));
        }
        let total: f64 = weights.iter().sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidTrace(total));
        }
        Ok(Self { nx, ny, weights })
    }

    /// Builds a table from columns `P(·, y)`.
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let ny = columns.len();
        let nx = columns.first().map_or(0, Vec::len);
        if columns.iter().any(|c| c.len() != nx) {
            return Err(Error::DimensionMismatch("columns differ in length".into()));
        }
        let mut weights = vec![0.0; nx * ny];
        for (y, col) in columns.iter().enumerate() {
            for (x, &w) in col.iter().enumerate() {
                weights[x * ny + y] = w;
            }
        }
        Self::new(nx, ny, weights)
    }

    /// Reads CSV rows `x,y,p` with header. Labels are arbitrary strings, indexed in
    /// order of first appearance; absent pairs have weight zero.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(|e| Error::OutOfRange(format!("csv header: {e}")))?.clone();
        if headers.iter().collect::<Vec<_>>() != ["x", "y", "p"] {
            return Err(Error::OutOfRange(format!(
                "csv header must be `x,y,p`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            )));
        }
        let mut xs: HashMap<String, usize> = HashMap::new();
        let mut ys: HashMap<String, usize> = HashMap::new();
        let mut atoms: HashMap<(usize, usize), f64> = HashMap::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(|e| Error::OutOfRange(format!("csv row {}: {e}", line + 1)))?;
            if rec.len() != 3 {
                return Err(Error::OutOfRange(format!("csv row {} needs 3 fields", line + 1)));
            }
            let nx = xs.len();
            let x = *xs.entry(rec[0].to_string()).or_insert(nx);
            let ny = ys.len();
            let y = *ys.entry(rec[1].to_string()).or_insert(ny);
            let p: f64 = rec[2]
                .parse()
                .map_err(|_| Error::OutOfRange(format!("csv row {}: bad weight `{}`", line + 1, &rec[2])))?;
            if atoms.insert((x, y), p).is_some() {
                return Err(Error::OutOfRange(format!(
                    "csv row {}: duplicate atom ({}, {})",
                    line + 1,
                    &rec[0],
                    &rec[1]
                )));
            }
        }
        let (nx, ny) = (xs.len(), ys.len());
        let mut weights = vec![0.0; nx * ny];
        for ((x, y), p) in atoms {
            weights[x * ny + y] = p;
        }
        Self::new(nx, ny, weights)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn weight(&self, x: usize, y: usize) -> f64 {
        self.weights[x * self.ny + y]
    }

    pub fn total(&self) -> f64 {
        self.weights.iter().sum()
    }

    pub fn column(&self, y: usize) -> Vec<f64> {
        (0..self.nx).map(|x| self.weight(x, y)).collect()
    }

    pub fn columns(&self) -> Vec<Vec<f64>> {
        (0..self.ny).map(|y| self.column(y)).collect()
    }

    /// `(P × Q)((x₁,x₂),(y₁,y₂)) = P(x₁,y₁) Q(x₂,y₂)`, first factor major.
    pub fn product(&self, other: &Self) -> Self {
        let nx = self.nx * other.nx;
        let ny = self.ny * other.ny;
        let mut weights = vec![0.0; nx * ny];
        for x1 in 0..self.nx {
            for y1 in 0..self.ny {
                let a = self.weight(x1, y1);
                if a == 0.0 {
                    continue;
                }
                for x2 in 0..other.nx {
                    for y2 in 0..other.ny {
                        weights[(x1 * other.nx + x2) * ny + y1 * other.ny + y2] = a * other.weight(x2, y2);
                    }
                }
            }
        }
        Self { nx, ny, weights }
    }

    /// `n`-fold product distribution.
    pub fn power(&self, n: usize) -> Self {
        let mut out = Self { nx: 1, ny: 1, weights: vec![1.0] };
        for _ in 0..n {
            out = out.product(self);
        }
        out
    }

    /// Shannon `H(X|Y) = H(XY) - H(Y)`.
    pub fn cond_entropy(&self) -> f64 {
        let marginal_y: Vec<f64> = (0..self.ny).map(|y| self.column(y).iter().sum()).collect();
        shannon(&self.weights) - shannon(&marginal_y)
    }
}

/// `max_y log₂ |supp P(·, y)|`, counting exactly positive entries.
pub fn classical_h0_cond(p: &ClassicalJoint) -> f64 {
    let support = (0..p.ny).map(|y| p.column(y).iter().filter(|&&w| w > 0.0).count()).max().unwrap_or(0);
    log2_support(support)
}

fn check_budget(eps: f64) -> Result<()> {
    if !(eps >= 0.0) || !eps.is_finite() {
        return Err(Error::OutOfRange(format!("smoothing budget {eps} must be finite and >= 0")));
    }
    Ok(())
}

/// Smallest common support size `s` such that truncating every column to its `s`
/// largest atoms removes at most `eps` mass in total.
pub fn min_support_within_budget(columns: &[Vec<f64>], eps: f64) -> usize {
    let tails: Vec<Vec<f64>> = columns
        .iter()
        .map(|col| {
            let mut atoms: Vec<f64> = col.iter().copied().filter(|&w| w > 0.0).collect();
            atoms.sort_by(f64::total_cmp);
            // tail[j] = mass of the j smallest atoms
            let mut tail = Vec::with_capacity(atoms.len() + 1);
            let mut acc = 0.0;
            tail.push(0.0);
            for w in atoms {
                acc += w;
                tail.push(acc);
            }
            tail
        })
        .collect();
    let max_support = tails.iter().map(|t| t.len() - 1).max().unwrap_or(0);
    let cost = |s: usize| -> f64 {
        tails
            .iter()
            .map(|t| {
                let len = t.len() - 1;
                if s >= len {
                    0.0
                } else {
                    t[len - s]
                }
            })
            .sum()
    };
    let budget = eps + SMOOTHING_SLACK;
    // cost is nonincreasing in s and cost(max_support) = 0
    let (mut lo, mut hi) = (0usize, max_support);
    while lo < hi {
        let mid = (lo + hi) / 2;
        if cost(mid) <= budget {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Exact smooth max-entropy `H₀^ε(X|Y)` over the L1 ball of nonnegative functions.
///
/// Returns `-inf` when the whole table fits in the budget (the zero function is admissible).
pub fn classical_smooth_h0_cond(p: &ClassicalJoint, eps: f64) -> Result<f64> {
    check_budget(eps)?;
    Ok(log2_support(min_support_within_budget(&p.columns(), eps)))
}

/// State classical on `B`: `ρ_AB = Σ_k p_k ρ_A^k ⊗ |k><k|`.
#[derive(Debug, Clone)]
pub struct CQState {
    branches: Vec<(f64, DensityMatrix)>,
}

impl CQState {
    /// Branch states must be normalized and share one dimension; weights positive
    /// with total at most one.
    pub fn new(branches: Vec<(f64, DensityMatrix)>) -> Result<Self> {
        let Some(first) = branches.first() else {
            return Err(Error::DimensionMismatch("a cq state needs at least one branch".into()));
        };
        let dim = first.1.dim();
        if branches.iter().any(|(_, rho)| rho.dim() != dim) {
            return Err(Error::DimensionMismatch("branch states differ in dimension".into()));
        }
        if let Some((w, _)) = branches.iter().find(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::OutOfRange(format!("branch weight {w} must be positive")));
        }
        let total: f64 = branches.iter().map(|b| b.0).sum();
        if total > 1.0 + 1e-12 {
            return Err(Error::InvalidTrace(total));
        }
        if let Some((_, rho)) = branches.iter().find(|(_, rho)| (rho.trace() - 1.0).abs() > qmat::TRACE_TOL) {
            return Err(Error::InvalidTrace(rho.trace()));
        }
        Ok(Self { branches })
    }

    pub fn branches(&self) -> &[(f64, DensityMatrix)] {
        &self.branches
    }

    /// Block-diagonal operator on `[d_A, K]`.
    pub fn block_state(&self) -> DensityMatrix {
        let da = self.branches[0].1.dim();
        let k = self.branches.len();
        let mut mat = CMatrix::zeros(da * k, da * k);
        for (idx, (w, rho)) in self.branches.iter().enumerate() {
            for a in 0..da {
                for b in 0..da {
                    mat[(a * k + idx, b * k + idx)] = rho.mat()[(a, b)] * *w;
                }
            }
        }
        DensityMatrix::from_parts_unchecked(vec![da, k], mat).expect("block shape is consistent")
    }

    /// Per-branch eigenvalues of `p_k ρ_A^k`, with those below the rank threshold set to zero.
    fn spectral_columns(&self) -> Vec<Vec<f64>> {
        self.branches
            .iter()
            .map(|(w, rho)| {
                let eig = rho.eigenvalues();
                let rank = qmat::numerical_rank(&eig);
                eig.iter().enumerate().map(|(i, &l)| if i < rank { w * l } else { 0.0 }).collect()
            })
            .collect()
    }
}

/// `H₀(A|B) = max_k H₀(A)_{ρ^k}`.
pub fn h0_cond_cq(s: &CQState) -> f64 {
    s.branches.iter().map(|(_, rho)| h0(rho)).fold(f64::NEG_INFINITY, f64::max)
}

/// Smooth `H₀^ε(A|B)` with smoothing restricted to states commuting with `ρ_AB`,
/// which reduces to the classical problem on the branch spectra.
pub fn smooth_h0_cond_cq(s: &CQState, eps: f64) -> Result<f64> {
    check_budget(eps)?;
    Ok(log2_support(min_support_within_budget(&s.spectral_columns(), eps)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AepCheck {
    /// `(1/n) H₀^ε(Xⁿ|Yⁿ)` on the product table.
    pub lhs: f64,
    /// `H(X|Y) + log₂(|X|+3) √(log₂(1/ε²)) / √n`.
    pub rhs: f64,
    pub holds: bool,
}

/// Largest product table `aep_check` will build, in bits of `nx^n · ny^n`.
pub const AEP_MAX_TABLE_BITS: f64 = 20.0;

/// Exact check of the classical asymptotic equipartition bound for `n` copies.
pub fn aep_check(p: &ClassicalJoint, eps: f64, n: usize) -> Result<AepCheck> {
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange(format!("eps = {eps} must lie in (0, 1]")));
    }
    if n == 0 {
        return Err(Error::OutOfRange("n must be at least 1".into()));
    }
    if (p.total() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidTrace(p.total()));
    }
    let bits = n as f64 * ((p.nx * p.ny) as f64).log2();
    if bits > AEP_MAX_TABLE_BITS {
        return Err(Error::TableTooLarge(format!(
            "{n}-fold product of a {}x{} table has 2^{bits:.1} atoms (limit 2^{AEP_MAX_TABLE_BITS})",
            p.nx, p.ny
        )));
    }
    let product = p.power(n);
    let lhs = classical_smooth_h0_cond(&product, eps)? / n as f64;
    let slack = log2(p.nx as f64 + 3.0) * log2(1.0 / (eps * eps)).sqrt() / (n as f64).sqrt();
    let rhs = p.cond_entropy() + slack;
    Ok(AepCheck { lhs, rhs, holds: lhs <= rhs + 1e-12 })
}
