//! Channel-level entanglement cost bounds, noisy-storage thresholds,
//! strong-converse error bounds and proof-overhead constants.

use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

use crate::channels::{self, choi, KrausChannel};
use crate::entanglement::{concurrence_2q, eof_from_concurrence, eof_numeric, max_entangled, SearchOptions};
use crate::entropy::binary_h;
use crate::error::{Error, Result};
use crate::qmat::PureState;
use crate::random::{random_pure, stream_rng};

/// Choi concurrences at or below this are treated as zero.
pub const CONCURRENCE_FLOOR: f64 = 1e-9;
/// Choi concurrences within this of one are treated as one.
pub const CONCURRENCE_CEILING_GAP: f64 = 1e-12;
/// Allowed violation of `q_arrow ≤ ec1 ≤ q_e`.
pub const SANDWICH_SLACK: f64 = 1e-12;
/// Largest `dim_in · dim_out` accepted by [`ec1_general`].
pub const EC1_MAX_DIM: usize = 16;

fn require_qubit(ch: &KrausChannel) -> Result<()> {
    if !ch.is_qubit() {
        return Err(Error::UnsupportedDimension(format!(
            "expected a qubit channel, got {}->{}",
            ch.dim_in(),
            ch.dim_out()
        )));
    }
    Ok(())
}

/// Concurrence of the Choi state, snapped to zero below [`CONCURRENCE_FLOOR`]
/// and to one within [`CONCURRENCE_CEILING_GAP`] of it.
pub fn choi_concurrence(ch: &KrausChannel) -> Result<f64> {
    require_qubit(ch)?;
    let c = concurrence_2q(choi(ch).state())?;
    Ok(if c <= CONCURRENCE_FLOOR {
        0.0
    } else if c >= 1.0 - CONCURRENCE_CEILING_GAP {
        1.0
    } else {
        c
    })
}

/// `E_C¹` of a qubit channel, `h(½ + ½√(1 − C²))` with `C` the Choi concurrence.
pub fn ec1_qubit(ch: &KrausChannel) -> Result<f64> {
    Ok(eof_from_concurrence(choi_concurrence(ch)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ec1Estimate {
    pub value: f64,
    /// True when the value is exact; otherwise a search heuristic.
    pub certified: bool,
}

/// `max_ψ E_F((E ⊗ I)(ψ))`.
///
/// Qubit channels use the closed form, where the maximum sits at the maximally
/// entangled input. Larger channels get a seeded search over pure inputs; the
/// inner value is an upper bound and the outer maximization a lower bound, so
/// the result is flagged uncertified.
pub fn ec1_general(ch: &KrausChannel, restarts: usize, seed: u64) -> Result<Ec1Estimate> {
    if ch.is_qubit() {
        return Ok(Ec1Estimate { value: ec1_qubit(ch)?, certified: true });
    }
    let (din, dout) = (ch.dim_in(), ch.dim_out());
    if din * dout > EC1_MAX_DIM {
        return Err(Error::UnsupportedDimension(format!("channel {din}->{dout} is too large")));
    }
    let inner = SearchOptions { restarts: 4, seed, ..Default::default() };
    let objective = |psi: &PureState| -> Result<f64> { Ok(eof_numeric(&ch.apply(&psi.density())?, &inner)?.value) };

    let mut best = objective(&max_entangled(din))?;
    for i in 0..restarts {
        let mut rng = stream_rng(seed, i as u64 + 1);
        let mut psi = random_pure(&[din, din], &mut rng);
        let mut value = objective(&psi)?;
        let mut step = 0.3;
        for _ in 0..12 {
            let noise = random_pure(&[din, din], &mut rng);
            let trial = psi.amplitudes().iter().zip(noise.amplitudes()).map(|(x, n)| x + n * step).collect();
            let trial = PureState::normalized(vec![din, din], trial)?;
            let v = objective(&trial)?;
            if v > value {
                psi = trial;
                value = v;
            } else {
                step *= 0.7;
            }
        }
        best = best.max(value);
    }
    Ok(Ec1Estimate { value: best, certified: false })
}

/// Maximal storage rate `ν` permitting security.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StorageRate {
    Bounded(f64),
    /// Entanglement-breaking storage: any rate is secure.
    Unbounded,
}

impl StorageRate {
    pub fn value(self) -> f64 {
        match self {
            StorageRate::Bounded(v) => v,
            StorageRate::Unbounded => f64::INFINITY,
        }
    }
}

/// `ν_max = 1 / (2 E_C¹)`.
pub fn security_threshold(ch: &KrausChannel) -> Result<StorageRate> {
    let ec = ec1_qubit(ch)?;
    Ok(if ec == 0.0 { StorageRate::Unbounded } else { StorageRate::Bounded(1.0 / (2.0 * ec)) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CurveValue {
    Real(f64),
    Unbounded,
}

impl fmt::Display for CurveValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CurveValue::Real(v) => write!(f, "{v}"),
            CurveValue::Unbounded => f.write_str("inf"),
        }
    }
}

impl From<StorageRate> for CurveValue {
    fn from(r: StorageRate) -> Self {
        match r {
            StorageRate::Bounded(v) => CurveValue::Real(v),
            StorageRate::Unbounded => CurveValue::Unbounded,
        }
    }
}

/// One row of a parameter sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSample {
    pub param: f64,
    pub values: Vec<(&'static str, CurveValue)>,
}

impl CurveSample {
    pub fn get(&self, name: &str) -> Option<CurveValue> {
        self.values.iter().find(|(n, _)| *n == name).map(|(_, v)| *v)
    }

    /// Shortcut for finite columns.
    pub fn real(&self, name: &str) -> Option<f64> {
        match self.get(name)? {
            CurveValue::Real(v) => Some(v),
            CurveValue::Unbounded => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChannelFamily {
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
}

impl ChannelFamily {
    pub fn build(self, param: f64) -> Result<KrausChannel> {
        match self {
            ChannelFamily::Depolarizing => channels::depolarizing(param),
            ChannelFamily::Dephasing => channels::dephasing(param),
            ChannelFamily::AmplitudeDamping => channels::amplitude_damping(param),
        }
    }

    /// Column name of the family parameter.
    pub fn param_name(self) -> &'static str {
        match self {
            ChannelFamily::Dephasing => "p",
            _ => "r",
        }
    }

    /// Parameter at which the family is the identity channel.
    pub fn identity_param(self) -> f64 {
        match self {
            ChannelFamily::AmplitudeDamping => 1.0,
            _ => 0.0,
        }
    }
}

impl FromStr for ChannelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "depolarizing" => Ok(ChannelFamily::Depolarizing),
            "dephasing" => Ok(ChannelFamily::Dephasing),
            "amplitude_damping" | "amplitude-damping" => Ok(ChannelFamily::AmplitudeDamping),
            other => Err(Error::UnknownFamily(other.to_string())),
        }
    }
}

/// `n` uniform points on `[lo, hi]`.
pub fn uniform_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect(),
    }
}

/// Rows `(param, ec1, nu_max)` tracing the secure-region boundary of a family.
pub fn security_region(family: ChannelFamily, grid: &[f64]) -> Result<Vec<CurveSample>> {
    grid.par_iter()
        .map(|&param| {
            let ch = family.build(param)?;
            let ec = ec1_qubit(&ch)?;
            Ok(CurveSample {
                param,
                values: vec![("ec1", CurveValue::Real(ec)), ("nu_max", security_threshold(&ch)?.into())],
            })
        })
        .collect()
}

/// Dephasing parameters on which the capacity sandwich holds.
pub const DEPHASING_CURVE_RANGE: (f64, f64) = (0.0, 0.5);

/// Rows `(p, q_arrow, ec1, q_e)` comparing `1 − h(p) ≤ E_C¹ ≤ 1 − ½h(p/2)`.
pub fn dephasing_curves(grid: &[f64]) -> Result<Vec<CurveSample>> {
    let (lo, hi) = DEPHASING_CURVE_RANGE;
    grid.par_iter()
        .map(|&p| {
            if !(lo..=hi).contains(&p) {
                return Err(Error::OutOfRange(format!("dephasing parameter {p} outside [{lo}, {hi}]")));
            }
            let q_arrow = 1.0 - binary_h(p);
            let ec1 = ec1_qubit(&channels::dephasing(p)?)?;
            let q_e = 1.0 - 0.5 * binary_h(p / 2.0);
            if ec1 - q_arrow < -SANDWICH_SLACK || q_e - ec1 < -SANDWICH_SLACK {
                return Err(Error::InvariantViolated(format!("sandwich fails at p={p}: {q_arrow} <= {ec1} <= {q_e}")));
            }
            Ok(CurveSample {
                param: p,
                values: vec![
                    ("q_arrow", CurveValue::Real(q_arrow)),
                    ("ec1", CurveValue::Real(ec1)),
                    ("q_e", CurveValue::Real(q_e)),
                ],
            })
        })
        .collect()
}

/// Error lower bound `1 − 2^{−n(R−1)}` for rate-`R` codes over `n` noiseless qubits.
pub fn identity_error_bound(rate: f64, n: u64) -> Result<f64> {
    if !(rate >= 1.0) || !rate.is_finite() {
        return Err(Error::OutOfRange(format!("rate {rate} must be at least 1")));
    }
    Ok(1.0 - (-(n as f64) * (rate - 1.0)).exp2())
}

fn log2_simulation_error(n: u64, delta1: f64, dim_a: usize, dim_b: usize) -> f64 {
    let poly = (dim_a * dim_a) as f64 - 1.0;
    let denom = 8.0 * ((dim_b as f64) + 3.0).log2().powi(2);
    poly * ((n as f64) + 1.0).log2() - (n as f64) * delta1 * delta1 / denom
}

fn check_dims(dim_a: usize, dim_b: usize) -> Result<()> {
    if dim_a == 0 || dim_b == 0 {
        return Err(Error::OutOfRange("dimensions must be positive".into()));
    }
    Ok(())
}

/// Channel-simulation error `α_n = (n+1)^{|A|²−1} · 2^{−n δ₁² / (8 log²(|B|+3))}`.
pub fn simulation_error(n: u64, delta1: f64, dim_a: usize, dim_b: usize) -> Result<f64> {
    check_dims(dim_a, dim_b)?;
    if !(delta1 >= 0.0) || !delta1.is_finite() {
        return Err(Error::OutOfRange(format!("delta1 {delta1} must be nonnegative")));
    }
    Ok(log2_simulation_error(n, delta1, dim_a, dim_b).exp2())
}

/// Least `n ≤ limit` with `α_n < target`, scanning upward from the peak of `α_n`.
pub fn simulation_blocklength(target: f64, delta1: f64, dim_a: usize, dim_b: usize, limit: u64) -> Result<Option<u64>> {
    check_dims(dim_a, dim_b)?;
    if !(delta1 > 0.0) {
        return Err(Error::OutOfRange(format!("delta1 {delta1} must be positive")));
    }
    if !(target > 0.0) {
        return Err(Error::OutOfRange(format!("target {target} must be positive")));
    }
    let log_target = target.log2();
    Ok((0..=limit).find(|&n| log2_simulation_error(n, delta1, dim_a, dim_b) < log_target))
}

/// Blocklength beyond which `α_n` decreases: `α_{n+1} ≤ α_n` for all `n ≥ n₀`.
pub fn simulation_error_peak(delta1: f64, dim_a: usize, dim_b: usize) -> f64 {
    // d/dn log α = poly / ((n+1) ln 2) − slope vanishes at n₀ + 1 = poly / (slope ln 2)
    let poly = (dim_a * dim_a) as f64 - 1.0;
    let slope = delta1 * delta1 / (8.0 * ((dim_b as f64) + 3.0).log2().powi(2));
    (poly / (slope * std::f64::consts::LN_2) - 1.0).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConverseParams {
    pub delta1: f64,
    pub delta2: f64,
    pub dim_in: usize,
    pub dim_out: usize,
    pub n: u64,
}

impl ConverseParams {
    fn validate(&self) -> Result<()> {
        if !(self.delta1 > 0.0 && self.delta2 > self.delta1 && self.delta2.is_finite()) {
            return Err(Error::OutOfRange(format!(
                "need delta2 > delta1 > 0, got delta1={} delta2={}",
                self.delta1, self.delta2
            )));
        }
        if self.n == 0 {
            return Err(Error::OutOfRange("blocklength must be at least 1".into()));
        }
        check_dims(self.dim_in, self.dim_out)
    }

    /// Rate the bound speaks about, `ec + δ₂`.
    pub fn rate(&self, ec: f64) -> f64 {
        ec + self.delta2
    }
}

/// `1 − α_n − 2^{−n(δ₂−δ₁)/(ec+δ₁) − 1}` for codes at rate `ec + δ₂`.
///
/// Negative values are vacuous but returned unclamped.
pub fn strong_converse_error_bound(p: &ConverseParams, ec: f64) -> Result<f64> {
    p.validate()?;
    if !(ec >= 0.0) || !ec.is_finite() {
        return Err(Error::OutOfRange(format!("entanglement cost {ec} must be nonnegative")));
    }
    let alpha = simulation_error(p.n, p.delta1, p.dim_in, p.dim_out)?;
    let n = p.n as f64;
    let tail = (-n * (p.delta2 - p.delta1) / (ec + p.delta1) - 1.0).exp2();
    Ok(1.0 - alpha - tail)
}

/// A count kept as its base-2 logarithm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize)]
pub struct Log2Count(pub f64);

impl Log2Count {
    pub fn log2(self) -> f64 {
        self.0
    }

    /// Linear value; only available while it fits comfortably in 63 bits.
    pub fn linear(self) -> Option<f64> {
        (self.0 <= 63.0).then(|| self.0.exp2())
    }
}

/// Post-selection overhead `(n+1)^{|A|²−1}`.
pub fn postselection_factor(n: u64, dim_a: usize) -> Result<Log2Count> {
    check_dims(dim_a, 1)?;
    Ok(Log2Count(((dim_a * dim_a) as f64 - 1.0) * ((n as f64) + 1.0).log2()))
}

/// Size of the de Finetti decomposition index set, `(n+1)^{2|A||R|−2}`.
pub fn definetti_count(n: u64, dim_a: usize, dim_r: usize) -> Result<Log2Count> {
    check_dims(dim_a, dim_r)?;
    Ok(Log2Count((2.0 * (dim_a * dim_r) as f64 - 2.0) * ((n as f64) + 1.0).log2()))
}

/// ε-net cardinality `(2√|B|/ε + 1)^{2χ|A||B|}`.
pub fn epsnet_size(chi: usize, eps: f64, dim_a: usize, dim_b: usize) -> Result<Log2Count> {
    check_dims(dim_a, dim_b)?;
    if !(eps > 0.0 && eps <= 1.0) {
        return Err(Error::OutOfRange(format!("net accuracy {eps} must lie in (0, 1]")));
    }
    let base = 2.0 * (dim_b as f64).sqrt() / eps + 1.0;
    Ok(Log2Count(2.0 * (chi * dim_a * dim_b) as f64 * base.log2()))
}
