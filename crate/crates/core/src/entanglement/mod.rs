//! Entanglement of formation, concurrence and one-shot dilution bounds.

mod search;

use num_complex::Complex64;

pub use crate::channels::max_entangled;
pub use search::{default_items, SearchOptions};

use crate::entropy::{binary_h, shannon, smooth_h0_cond_cq, CQState};
use crate::error::{Error, Result};
use crate::qmat::{
    self, herm_eigvals, root_spectrum, sigma_y, sqrt_psd, tensor, trace_norm, CMatrix, DensityMatrix, PureState,
};
use search::{minimize, AverageEntanglement, Candidate, Ensemble, Objective};

/// Largest total dimension accepted by the decomposition searches.
pub const MAX_SEARCH_DIM: usize = 36;
/// Trace distance allowed between a decomposition and its target.
pub const DECOMPOSITION_TOL: f64 = 1e-8;
/// Items lighter than this are dropped when a decomposition is assembled.
const NEGLIGIBLE_WEIGHT: f64 = 1e-14;

/// Pure-state ensemble `{p_i, ψ_i}` averaging to `target`.
#[derive(Debug, Clone)]
pub struct Decomposition {
    items: Vec<(f64, PureState)>,
    target: DensityMatrix,
}

impl Decomposition {
    pub fn new(items: Vec<(f64, PureState)>, target: DensityMatrix) -> Result<Self> {
        if items.is_empty() {
            return Err(Error::InvariantViolated("decomposition has no items".into()));
        }
        if let Some((w, _)) = items.iter().find(|(w, _)| !(*w > 0.0) || !w.is_finite()) {
            return Err(Error::OutOfRange(format!("decomposition weight {w} must be positive")));
        }
        if let Some((_, psi)) = items.iter().find(|(_, psi)| psi.dims() != target.dims()) {
            return Err(Error::DimensionMismatch(format!(
                "item dims {:?} differ from target dims {:?}",
                psi.dims(),
                target.dims()
            )));
        }
        let rank = target.rank();
        if items.len() > rank * rank {
            return Err(Error::InvariantViolated(format!("{} items exceed rank² = {}", items.len(), rank * rank)));
        }
        let d = Self { items, target };
        let dist = 0.5 * trace_norm(&(&d.mixture() - d.target.mat()))?;
        if dist > DECOMPOSITION_TOL {
            return Err(Error::InvariantViolated(format!("decomposition misses its target by {dist:.3e}")));
        }
        Ok(d)
    }

    pub fn items(&self) -> &[(f64, PureState)] {
        &self.items
    }

    pub fn target(&self) -> &DensityMatrix {
        &self.target
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// `Σ_i p_i ψ_iψ_i†`.
    pub fn mixture(&self) -> CMatrix {
        let dim = self.target.dim();
        let mut sum = CMatrix::zeros(dim, dim);
        for (w, psi) in &self.items {
            sum = &sum + &CMatrix::outer(psi.amplitudes()).scale_real(*w);
        }
        sum
    }

    /// Flagged extension `Σ_i p_i ρ_A^i ⊗ |i><i|_R`.
    pub fn to_cq_state(&self) -> Result<CQState> {
        let branches = self
            .items
            .iter()
            .map(|(w, psi)| Ok((*w, psi.density().partial_trace(&[0])?)))
            .collect::<Result<Vec<_>>>()?;
        CQState::new(branches)
    }
}

#[derive(Debug, Clone)]
pub struct EofResult {
    pub value: f64,
    pub decomposition: Decomposition,
    pub restarts_used: usize,
    pub converged: bool,
}

fn require_two_qubits(rho: &DensityMatrix) -> Result<()> {
    if rho.dims() != [2, 2] {
        return Err(Error::UnsupportedDimension(format!("expected a two-qubit state, got dims {:?}", rho.dims())));
    }
    Ok(())
}

/// Wootters concurrence, from the spectrum of `√ρ ρ̃ √ρ` (that of `ρρ̃`).
pub fn concurrence_2q(rho: &DensityMatrix) -> Result<f64> {
    require_two_qubits(rho)?;
    let yy = tensor(&sigma_y(), &sigma_y());
    let flipped = &(&yy * &rho.mat().conj()) * &yy;
    let root = sqrt_psd(rho.mat())?;
    let product = (&(&root * &flipped) * &root).hermitian_part();
    let mut lambda = herm_eigvals(&product)?;
    lambda.sort_by(|a, b| b.total_cmp(a));
    let roots = root_spectrum(&lambda);
    Ok((roots[0] - roots[1] - roots[2] - roots[3]).clamp(0.0, 1.0))
}

/// Closed form `h(½ + ½√(1 − C²))`.
pub fn eof_from_concurrence(c: f64) -> f64 {
    binary_h(0.5 + 0.5 * (1.0 - c * c).max(0.0).sqrt())
}

pub fn eof_2q(rho: &DensityMatrix) -> Result<f64> {
    Ok(eof_from_concurrence(concurrence_2q(rho)?))
}

/// Entropy of the Schmidt coefficients.
pub fn eof_pure(psi: &PureState) -> Result<f64> {
    let s = qmat::schmidt(psi)?;
    let probs: Vec<f64> = s.coefficients.iter().map(|c| c * c).collect();
    Ok(shannon(&probs))
}

/// `Σ_i p_i H(A)_{ψ_i}`, i.e. `H(A|R)` of the flagged extension.
pub fn eof_cq_conditional(d: &Decomposition) -> Result<f64> {
    d.items.iter().map(|(w, psi)| Ok(w * eof_pure(psi)?)).sum()
}

fn check_search_input(rho: &DensityMatrix) -> Result<()> {
    if rho.dims().len() != 2 {
        return Err(Error::InvalidSubsystem(format!("expected a bipartite state, got dims {:?}", rho.dims())));
    }
    if rho.dim() > MAX_SEARCH_DIM {
        return Err(Error::UnsupportedDimension(format!("total dimension {} exceeds {MAX_SEARCH_DIM}", rho.dim())));
    }
    Ok(())
}

fn resolve_items(rank: usize, opts: &SearchOptions) -> Result<usize> {
    let m = opts.max_items.unwrap_or_else(|| default_items(rank));
    if m < rank || m > rank * rank {
        return Err(Error::OutOfRange(format!("max_items {m} must lie in [{rank}, {}]", rank * rank)));
    }
    Ok(m)
}

/// The top eigenvector as a one-item decomposition of a rank-one state.
fn pure_decomposition(rho: &DensityMatrix) -> Result<Decomposition> {
    let eig = rho.eig();
    let psi = PureState::normalized(rho.dims().to_vec(), eig.vectors.column(0))?;
    Decomposition::new(vec![(1.0, psi)], rho.clone())
}

fn assemble(rho: &DensityMatrix, vectors: &[Complex64]) -> Result<Decomposition> {
    let dim = rho.dim();
    let mut items = Vec::new();
    for v in vectors.chunks_exact(dim) {
        let p: f64 = v.iter().map(Complex64::norm_sqr).sum();
        if p > NEGLIGIBLE_WEIGHT {
            items.push((p, PureState::normalized(rho.dims().to_vec(), v.to_vec())?));
        }
    }
    Decomposition::new(items, rho.clone())
}

/// Upper bound on `E_F(ρ)` by searching decompositions of size `max_items`.
///
/// Every evaluated point is a valid decomposition, so the value never undershoots
/// the true entanglement of formation.
pub fn eof_numeric(rho: &DensityMatrix, opts: &SearchOptions) -> Result<EofResult> {
    check_search_input(rho)?;
    let rank = rho.rank();
    let items = resolve_items(rank, opts)?;
    if rank == 1 {
        let decomposition = pure_decomposition(rho)?;
        let value = eof_cq_conditional(&decomposition)?;
        return Ok(EofResult { value, decomposition, restarts_used: 0, converged: true });
    }
    let ens = Ensemble::new(rho)?;
    let obj = AverageEntanglement { da: ens.da, db: ens.db };
    let outcome = minimize(&ens, items, &obj, opts);
    let decomposition = assemble(rho, &outcome.candidates[outcome.best].vectors)?;
    let value = eof_cq_conditional(&decomposition)?;
    Ok(EofResult { value, decomposition, restarts_used: opts.restarts.max(1), converged: outcome.converged })
}

/// Bracket on the one-shot entanglement cost at error `ε`.
#[derive(Debug, Clone)]
pub struct OneShotBounds {
    /// Smallest `H₀^{2√ε}(A|R)` found; heuristic, since the search is not global.
    pub lower: f64,
    /// Smallest `H₀^{ε/2}(A|R)` found, certified by `witness`.
    pub upper: f64,
    pub witness: Decomposition,
    pub lower_certified: bool,
}

/// Smooth log-rank objective of the flagged extension of one decomposition.
fn flagged_h0(d: &Decomposition, eps: f64) -> Result<f64> {
    smooth_h0_cond_cq(&d.to_cq_state()?, eps)
}

/// Searches decompositions for `min H₀^{2√ε}(A|R)` and `min H₀^{ε/2}(A|R)`.
///
/// The log-rank objective is piecewise constant, so it cannot steer a local search.
/// Both objectives are instead evaluated on one shared witness set: the spectral
/// ensemble, every restart's starting point, and every restart's entanglement of
/// formation optimum. Since `2√ε ≥ ε/2`, the lower objective never exceeds the
/// upper one on any witness.
pub fn one_shot_cost_bounds(rho: &DensityMatrix, eps: f64, opts: &SearchOptions) -> Result<OneShotBounds> {
    if !(0.0..=1.0).contains(&eps) {
        return Err(Error::OutOfRange(format!("smoothing {eps} must lie in [0, 1]")));
    }
    check_search_input(rho)?;
    let rank = rho.rank();
    let items = resolve_items(rank, opts)?;

    let mut witnesses = Vec::new();
    if rank == 1 {
        witnesses.push(pure_decomposition(rho)?);
    } else {
        let ens = Ensemble::new(rho)?;
        let obj = AverageEntanglement { da: ens.da, db: ens.db };
        let outcome = minimize(&ens, items, &obj, opts);
        for c in &outcome.candidates {
            let Candidate { vectors, start, .. } = c;
            witnesses.push(assemble(rho, start)?);
            witnesses.push(assemble(rho, vectors)?);
        }
    }

    let lower_eps = 2.0 * eps.sqrt();
    let upper_eps = eps / 2.0;
    let mut lower = f64::INFINITY;
    let mut best: Option<(f64, Decomposition)> = None;
    for w in witnesses {
        // smoothing budgets above one remove everything
        let lo = flagged_h0(&w, lower_eps.min(1.0))?;
        let hi = flagged_h0(&w, upper_eps)?;
        lower = lower.min(lo);
        if best.as_ref().is_none_or(|(v, _)| hi < *v) {
            best = Some((hi, w));
        }
    }
    let (upper, witness) = best.expect("witness set is never empty");
    Ok(OneShotBounds { lower: lower.max(0.0), upper, witness, lower_certified: false })
}

/// Average-entanglement objective exposed for tests of the search bookkeeping.
pub fn average_branch_entropy(rho: &DensityMatrix, vectors: &[Vec<Complex64>]) -> Result<f64> {
    check_search_input(rho)?;
    let (da, db) = (rho.dims()[0], rho.dims()[1]);
    let flat: Vec<Complex64> = vectors.iter().flatten().copied().collect();
    Ok(AverageEntanglement { da, db }.eval(&flat))
}
