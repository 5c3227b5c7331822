//! Quantum channels in Kraus and Choi form.
//!
//! The Choi state is normalized: `(E ⊗ I)(φ)` with `φ` maximally entangled on
//! `[dim_in, dim_in]`, stored with dims `[dim_out, dim_in]` (the channel output
//! is subsystem 0).
//!
//! Depolarizing noise is parameterized as `E(ρ) = (1 - r) ρ + r I/2`, so `r = 1`
//! is the constant channel.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmat::{self, herm_eig, herm_eigvals, trace_norm, CMatrix, DensityMatrix, PureState, PSD_TOL};
use crate::random::{random_pure, stream_rng};

/// Completeness tolerance on `Σ K†K = I`, max entry.
pub const COMPLETENESS_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct KrausChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMatrix>,
}

impl KrausChannel {
    pub fn new(dim_in: usize, dim_out: usize, kraus: Vec<CMatrix>) -> Result<Self> {
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::DimensionMismatch("channel dimensions must be positive".into()));
        }
        if kraus.is_empty() {
            return Err(Error::DimensionMismatch("a channel needs at least one Kraus operator".into()));
        }
        if let Some(k) = kraus.iter().find(|k| k.rows() != dim_out || k.cols() != dim_in) {
            return Err(Error::DimensionMismatch(format!(
                "Kraus operator is {}x{}, expected {dim_out}x{dim_in}",
                k.rows(),
                k.cols()
            )));
        }
        let mut sum = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            sum = &sum + &(&k.adjoint() * k);
        }
        let dev = sum.max_abs_diff(&CMatrix::identity(dim_in));
        if dev > COMPLETENESS_TOL {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { dim_in, dim_out, kraus })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMatrix] {
        &self.kraus
    }

    pub fn is_qubit(&self) -> bool {
        self.dim_in == 2 && self.dim_out == 2
    }

    /// Applies the channel to `rho`.
    ///
    /// If `rho` lives on exactly `dim_in`, the whole state is mapped. Otherwise
    /// its subsystem 0 must have dimension `dim_in` and the channel acts as `E ⊗ I`
    /// on it, leaving the remaining subsystems untouched.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        let dims = rho.dims();
        let (out_dims, ancilla) = if dims.len() == 1 && dims[0] == self.dim_in {
            (vec![self.dim_out], 1)
        } else if dims[0] == self.dim_in {
            let mut out = dims.to_vec();
            out[0] = self.dim_out;
            (out, dims[1..].iter().product())
        } else {
            return Err(Error::DimensionMismatch(format!(
                "channel input dimension {} does not match state dims {dims:?}",
                self.dim_in
            )));
        };
        let id = CMatrix::identity(ancilla);
        let mut out = CMatrix::zeros(self.dim_out * ancilla, self.dim_out * ancilla);
        for k in &self.kraus {
            let big = if ancilla == 1 { k.clone() } else { qmat::tensor(k, &id) };
            let term = &(&big * rho.mat()) * &big.adjoint();
            out = &out + &term;
        }
        DensityMatrix::from_parts_unchecked(out_dims, out.hermitian_part())
    }

    /// `(self - other)(rho)` as a plain operator.
    fn apply_difference(&self, other: &Self, rho: &DensityMatrix) -> Result<CMatrix> {
        Ok(self.apply(rho)?.mat() - other.apply(rho)?.mat())
    }
}

pub fn identity(d: usize) -> Result<KrausChannel> {
    KrausChannel::new(d, d, vec![CMatrix::identity(d)])
}

fn check_unit_interval(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::OutOfRange(format!("{name} = {x} must lie in [0, 1]")));
    }
    Ok(())
}

/// `E(ρ) = (1 - p) ρ + p σ_z ρ σ_z`.
pub fn dephasing(p: f64) -> Result<KrausChannel> {
    check_unit_interval("p", p)?;
    KrausChannel::new(
        2,
        2,
        vec![CMatrix::identity(2).scale_real((1.0 - p).sqrt()), qmat::sigma_z().scale_real(p.sqrt())],
    )
}

/// `E(ρ) = (1 - r) ρ + r I/2`, as the Pauli mixture `(1 - 3r/4) ρ + (r/4) Σ_j σ_j ρ σ_j`.
pub fn depolarizing(r: f64) -> Result<KrausChannel> {
    check_unit_interval("r", r)?;
    let w0 = (1.0 - 0.75 * r).sqrt();
    let w = (0.25 * r).sqrt();
    KrausChannel::new(
        2,
        2,
        vec![
            CMatrix::identity(2).scale_real(w0),
            qmat::sigma_x().scale_real(w),
            qmat::sigma_y().scale_real(w),
            qmat::sigma_z().scale_real(w),
        ],
    )
}

/// Kraus pair `E0 = diag(1, √r)`, `E1 = √(1-r) |0><1|`; `r = 1` is the identity.
pub fn amplitude_damping(r: f64) -> Result<KrausChannel> {
    check_unit_interval("r", r)?;
    let e0 = CMatrix::from_real(&[&[1.0, 0.0], &[0.0, r.sqrt()]])?;
    let e1 = CMatrix::from_real(&[&[0.0, (1.0 - r).sqrt()], &[0.0, 0.0]])?;
    KrausChannel::new(2, 2, vec![e0, e1])
}

/// Normalized Choi-Jamiolkowski state of a channel.
#[derive(Debug, Clone, PartialEq)]
pub struct ChoiState {
    dim_in: usize,
    dim_out: usize,
    state: DensityMatrix,
}

impl ChoiState {
    /// Validates positivity, unit trace and `tr_out = I/dim_in`.
    pub fn new(dim_in: usize, dim_out: usize, state: DensityMatrix) -> Result<Self> {
        if state.dims() != [dim_out, dim_in] {
            return Err(Error::DimensionMismatch(format!(
                "Choi state dims {:?}, expected [{dim_out}, {dim_in}]",
                state.dims()
            )));
        }
        let state = DensityMatrix::new(vec![dim_out, dim_in], state.into_mat())?;
        let input = state.partial_trace(&[1])?;
        let target = CMatrix::identity(dim_in).scale_real(1.0 / dim_in as f64);
        let dev = input.mat().max_abs_diff(&target);
        if dev > 1e-9 {
            return Err(Error::NotTracePreserving(dev));
        }
        Ok(Self { dim_in, dim_out, state })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn state(&self) -> &DensityMatrix {
        &self.state
    }
}

/// Maximally entangled `Σ_i |ii>/√d` on `[d, d]`.
pub fn max_entangled(d: usize) -> PureState {
    let amp = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
    let mut v = vec![Complex64::new(0.0, 0.0); d * d];
    for i in 0..d {
        v[i * d + i] = amp;
    }
    PureState::new(vec![d, d], v).expect("maximally entangled state is normalized")
}

pub fn choi(ch: &KrausChannel) -> ChoiState {
    let phi = max_entangled(ch.dim_in).density();
    let state = ch.apply(&phi).expect("maximally entangled input matches the channel");
    ChoiState { dim_in: ch.dim_in, dim_out: ch.dim_out, state }
}

/// Canonical Kraus form from the Choi eigendecomposition, one operator per nonzero eigenvalue.
pub fn kraus_from_choi(c: &ChoiState) -> Result<KrausChannel> {
    let eig = herm_eig(c.state.mat())?;
    if let Some(&min) = eig.values.last() {
        if min < -PSD_TOL {
            return Err(Error::NotPsd(min));
        }
    }
    let rank = qmat::numerical_rank(&eig.values);
    let (din, dout) = (c.dim_in, c.dim_out);
    let kraus = (0..rank)
        .map(|k| {
            let w = (eig.values[k] * din as f64).sqrt();
            let mut m = CMatrix::zeros(dout, din);
            for o in 0..dout {
                for i in 0..din {
                    m[(o, i)] = eig.vectors[(o * din + i, k)] * w;
                }
            }
            m
        })
        .collect();
    KrausChannel::new(din, dout, kraus)
}

/// PPT test on the Choi state; for qubit channels PPT is equivalent to separability.
pub fn is_entanglement_breaking_qubit(ch: &KrausChannel) -> Result<bool> {
    if !ch.is_qubit() {
        return Err(Error::UnsupportedDimension(format!(
            "PPT criterion decides separability only for qubit channels, got {}->{}",
            ch.dim_in, ch.dim_out
        )));
    }
    let pt = choi(ch).state.partial_transpose(1)?;
    let min = herm_eigvals(&pt)?.last().copied().unwrap_or(0.0);
    Ok(min >= -PSD_TOL)
}

/// Heuristic lower bound on the diamond norm `‖a - b‖_⋄`.
///
/// Evaluates `‖((a - b) ⊗ I)(ψ)‖₁` on the maximally entangled input and on one
/// locally improved random input per restart, returning the running maximum.
/// Restart `i` draws from RNG stream `(seed, i)`, so raising `restarts` never lowers
/// the result.
pub fn channel_distance_heuristic(a: &KrausChannel, b: &KrausChannel, restarts: usize, seed: u64) -> Result<f64> {
    if a.dim_in != b.dim_in || a.dim_out != b.dim_out {
        return Err(Error::DimensionMismatch("channels act on different spaces".into()));
    }
    let d = a.dim_in;
    let objective = |psi: &PureState| -> Result<f64> { trace_norm(&a.apply_difference(b, &psi.density())?) };

    let mut best = objective(&max_entangled(d))?;
    for i in 0..restarts {
        let mut rng = stream_rng(seed, i as u64);
        let mut psi = random_pure(&[d, d], &mut rng);
        let mut value = objective(&psi)?;
        let mut step = 0.5;
        for _ in 0..60 {
            let noise = random_pure(&[d, d], &mut rng);
            let trial: Vec<Complex64> =
                psi.amplitudes().iter().zip(noise.amplitudes()).map(|(x, n)| x + n * step).collect();
            let trial = PureState::normalized(vec![d, d], trial)?;
            let v = objective(&trial)?;
            if v > value {
                psi = trial;
                value = v;
            } else {
                step *= 0.85;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

/// JSON description of a channel, tagged by `"type"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum ChannelSpec {
    Identity {
        d: usize,
    },
    Dephasing {
        p: f64,
    },
    Depolarizing {
        r: f64,
    },
    AmplitudeDamping {
        r: f64,
    },
    /// Operators as row-major `[re, im]` entries.
    Kraus {
        dim_in: usize,
        dim_out: usize,
        ops: Vec<Vec<[f64; 2]>>,
    },
}

impl ChannelSpec {
    pub fn build(&self) -> Result<KrausChannel> {
        match *self {
            ChannelSpec::Identity { d } => identity(d),
            ChannelSpec::Dephasing { p } => dephasing(p),
            ChannelSpec::Depolarizing { r } => depolarizing(r),
            ChannelSpec::AmplitudeDamping { r } => amplitude_damping(r),
            ChannelSpec::Kraus { dim_in, dim_out, ref ops } => {
                let kraus = ops
                    .iter()
                    .map(|op| {
                        let data = op.iter().map(|&[re, im]| Complex64::new(re, im)).collect();
                        CMatrix::new(dim_out, dim_in, data)
                    })
                    .collect::<Result<Vec<_>>>()?;
                KrausChannel::new(dim_in, dim_out, kraus)
            }
        }
    }
}
