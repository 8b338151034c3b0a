//! Multiplier sequences, fractional differences and wbv_{q,s} norms.
//!
//! Sequence families are strategy objects behind [`MultiplierSeq`]: finite
//! tables, constants, geometric sequences, Cesaro means, oscillating
//! sequences and samples of named continuous symbols. Each family is
//! constructible from a serializable [`SeqSpec`] record, which is what the
//! CLI and report files carry.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre_rule;
use crate::special::binom_a;

/// Certified decay of |m_k - limit| used to truncate fractional differences.
#[derive(Debug, Clone, Copy)]
pub enum TailDecay {
    /// |m_k - c| <= coeff * (k+1)^{-exponent}
    Power { coeff: f64, exponent: f64 },
    /// |m_k - c| <= coeff * ratio^k, 0 < ratio < 1
    Geometric { coeff: f64, ratio: f64 },
}

/// A bounded multiplier sequence.
pub trait MultiplierSeq: Send + Sync {
    fn value(&self, k: usize) -> Complex64;

    /// sup_k |m_k| (exact for the built-in families).
    fn sup_norm(&self) -> f64;

    /// Limit of m_k as k -> infinity, when known.
    fn limit_at_infinity(&self) -> Option<Complex64>;

    /// Last index with m_k possibly nonzero, for table-kind sequences.
    fn support_bound(&self) -> Option<usize>;

    /// Optional certified decay towards the limit.
    fn tail_decay(&self) -> Option<TailDecay> {
        None
    }

    /// Serializable description of this sequence.
    fn spec(&self) -> SeqSpec;
}

/// Serializable sequence record: {kind, values | params}.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SeqSpec {
    Table { values: Vec<[f64; 2]> },
    Constant { value: f64 },
    Geometric { ratio: f64 },
    Cesaro { n: usize, nu: f64 },
    Oscillating { zeta: f64, eta: f64 },
    Sampled { function: String, params: Vec<f64> },
}

impl SeqSpec {
    /// Instantiate the described sequence.
    pub fn build(&self) -> Result<Box<dyn MultiplierSeq>> {
        match self {
            SeqSpec::Table { values } => Ok(Box::new(TableSeq::new(
                values.iter().map(|v| Complex64::new(v[0], v[1])).collect(),
            ))),
            SeqSpec::Constant { value } => Ok(Box::new(ConstantSeq { value: *value })),
            SeqSpec::Geometric { ratio } => Ok(Box::new(GeometricSeq::new(*ratio)?)),
            SeqSpec::Cesaro { n, nu } => Ok(Box::new(cesaro_seq(*n, *nu)?)),
            SeqSpec::Oscillating { zeta, eta } => Ok(Box::new(oscillating_seq(*zeta, *eta)?)),
            SeqSpec::Sampled { function, params } => {
                Ok(Box::new(sampled_seq(function, params)?))
            }
        }
    }
}

/// Names accepted by [`SeqSpec::Sampled`].
pub const SAMPLED_FUNCTIONS: [&str; 3] = ["rational-one", "rational-zero", "power-phase"];

// ---------------------------------------------------------------------------
// Families
// ---------------------------------------------------------------------------

/// Finite table; zero beyond the stored values.
#[derive(Debug, Clone)]
pub struct TableSeq {
    values: Vec<Complex64>,
}

impl TableSeq {
    pub fn new(values: Vec<Complex64>) -> Self {
        TableSeq { values }
    }

    pub fn from_real(values: &[f64]) -> Self {
        TableSeq {
            values: values.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }
}

impl MultiplierSeq for TableSeq {
    fn value(&self, k: usize) -> Complex64 {
        self.values.get(k).copied().unwrap_or(Complex64::new(0.0, 0.0))
    }

    fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }

    fn support_bound(&self) -> Option<usize> {
        Some(self.values.len().saturating_sub(1))
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Table {
            values: self.values.iter().map(|v| [v.re, v.im]).collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct ConstantSeq {
    pub value: f64,
}

impl MultiplierSeq for ConstantSeq {
    fn value(&self, _k: usize) -> Complex64 {
        Complex64::new(self.value, 0.0)
    }

    fn sup_norm(&self) -> f64 {
        self.value.abs()
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        Some(Complex64::new(self.value, 0.0))
    }

    fn support_bound(&self) -> Option<usize> {
        None
    }

    fn tail_decay(&self) -> Option<TailDecay> {
        Some(TailDecay::Geometric {
            coeff: 0.0,
            ratio: 0.5,
        })
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Constant { value: self.value }
    }
}

/// m_k = ratio^k.
#[derive(Debug, Clone)]
pub struct GeometricSeq {
    ratio: f64,
}

impl GeometricSeq {
    pub fn new(ratio: f64) -> Result<Self> {
        if !(ratio.abs() < 1.0) {
            return Err(Error::InvalidParams(format!(
                "geometric sequence needs |ratio| < 1, got {ratio}"
            )));
        }
        Ok(GeometricSeq { ratio })
    }
}

impl MultiplierSeq for GeometricSeq {
    fn value(&self, k: usize) -> Complex64 {
        Complex64::new(self.ratio.powi(k as i32), 0.0)
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }

    fn support_bound(&self) -> Option<usize> {
        None
    }

    fn tail_decay(&self) -> Option<TailDecay> {
        Some(TailDecay::Geometric {
            coeff: 1.0,
            ratio: self.ratio.abs(),
        })
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Geometric { ratio: self.ratio }
    }
}

/// Cesaro means m_{n,nu}(k) = A_{n-k}^nu / A_n^nu for 0 <= k <= n, 0 beyond.
#[derive(Debug, Clone)]
pub struct CesaroSeq {
    pub n: usize,
    pub nu: f64,
    values: Vec<f64>,
}

/// Build the Cesaro multiplier m_{n,nu}; table-kind with support n and
/// m(0) = 1 by construction.
pub fn cesaro_seq(n: usize, nu: f64) -> Result<CesaroSeq> {
    if !(nu > -1.0) {
        return Err(Error::InvalidParams(format!(
            "cesaro_seq needs nu > -1, got {nu}"
        )));
    }
    let denom = binom_a(n, nu);
    let values = (0..=n).map(|k| binom_a(n - k, nu) / denom).collect();
    Ok(CesaroSeq { n, nu, values })
}

impl MultiplierSeq for CesaroSeq {
    fn value(&self, k: usize) -> Complex64 {
        Complex64::new(self.values.get(k).copied().unwrap_or(0.0), 0.0)
    }

    fn sup_norm(&self) -> f64 {
        self.values.iter().map(|v| v.abs()).fold(0.0, f64::max)
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }

    fn support_bound(&self) -> Option<usize> {
        Some(self.n)
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Cesaro {
            n: self.n,
            nu: self.nu,
        }
    }
}

/// Closed form Delta^{s'} m_{n,nu}(k) = A_{n-k}^{nu-s'} / A_n^nu (0 for k > n);
/// the independent oracle for `frac_diff` on Cesaro sequences.
pub fn cesaro_frac_diff_closed(n: usize, nu: f64, sp: f64, k: usize) -> f64 {
    assert!(sp > 0.0, "fractional order must be positive");
    if k > n {
        return 0.0;
    }
    binom_a(n - k, nu - sp) / binom_a(n, nu)
}

/// Oscillating multiplier m(k) = k^{-zeta eta} e^{i k^eta} for k >= 1,
/// with m(0) = 0 by convention.
#[derive(Debug, Clone)]
pub struct OscillatingSeq {
    pub zeta: f64,
    pub eta: f64,
}

pub fn oscillating_seq(zeta: f64, eta: f64) -> Result<OscillatingSeq> {
    if !(zeta > 0.0 && eta > 0.0) {
        return Err(Error::InvalidParams(format!(
            "oscillating_seq needs zeta > 0 and eta > 0, got ({zeta}, {eta})"
        )));
    }
    Ok(OscillatingSeq { zeta, eta })
}

impl MultiplierSeq for OscillatingSeq {
    fn value(&self, k: usize) -> Complex64 {
        if k == 0 {
            return Complex64::new(0.0, 0.0);
        }
        let kf = k as f64;
        Complex64::from_polar(kf.powf(-self.zeta * self.eta), kf.powf(self.eta))
    }

    fn sup_norm(&self) -> f64 {
        1.0
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        Some(Complex64::new(0.0, 0.0))
    }

    fn support_bound(&self) -> Option<usize> {
        None
    }

    fn tail_decay(&self) -> Option<TailDecay> {
        Some(TailDecay::Power {
            coeff: 1.0,
            exponent: self.zeta * self.eta,
        })
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Oscillating {
            zeta: self.zeta,
            eta: self.eta,
        }
    }
}

/// Samples m_k = F(k) of a named continuous symbol.
#[derive(Clone)]
pub struct SampledSeq {
    function: String,
    params: Vec<f64>,
    f: Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
    sup: f64,
    limit: Option<Complex64>,
    tail: Option<TailDecay>,
}

/// Registry of named sampled symbols; see [`SAMPLED_FUNCTIONS`].
pub fn sampled_seq(function: &str, params: &[f64]) -> Result<SampledSeq> {
    let (f, sup, limit, tail): (
        Arc<dyn Fn(f64) -> Complex64 + Send + Sync>,
        f64,
        Option<Complex64>,
        Option<TailDecay>,
    ) = match function {
        // x/(1+x): rises to 1
        "rational-one" => (
            Arc::new(|x: f64| Complex64::new(x / (1.0 + x), 0.0)),
            1.0,
            Some(Complex64::new(1.0, 0.0)),
            Some(TailDecay::Power {
                coeff: 1.0,
                exponent: 1.0,
            }),
        ),
        // 1/(1+x): falls to 0
        "rational-zero" => (
            Arc::new(|x: f64| Complex64::new(1.0 / (1.0 + x), 0.0)),
            1.0,
            Some(Complex64::new(0.0, 0.0)),
            Some(TailDecay::Power {
                coeff: 1.0,
                exponent: 1.0,
            }),
        ),
        // x^{i tau}: unimodular, no limit; usable for Hormander-type probes
        // but not for wbv norms (differences cannot be truncated).
        "power-phase" => {
            let tau = *params.first().ok_or_else(|| {
                Error::InvalidParams("power-phase needs one parameter tau".into())
            })?;
            (
                Arc::new(move |x: f64| {
                    if x <= 0.0 {
                        Complex64::new(1.0, 0.0)
                    } else {
                        Complex64::from_polar(1.0, tau * x.ln())
                    }
                }),
                1.0,
                None,
                None,
            )
        }
        other => {
            return Err(Error::InvalidParams(format!(
                "unknown sampled function '{other}'; expected one of {SAMPLED_FUNCTIONS:?}"
            )))
        }
    };
    Ok(SampledSeq {
        function: function.to_string(),
        params: params.to_vec(),
        f,
        sup,
        limit,
        tail,
    })
}

impl MultiplierSeq for SampledSeq {
    fn value(&self, k: usize) -> Complex64 {
        (self.f)(k as f64)
    }

    fn sup_norm(&self) -> f64 {
        self.sup
    }

    fn limit_at_infinity(&self) -> Option<Complex64> {
        self.limit
    }

    fn support_bound(&self) -> Option<usize> {
        None
    }

    fn tail_decay(&self) -> Option<TailDecay> {
        self.tail
    }

    fn spec(&self) -> SeqSpec {
        SeqSpec::Sampled {
            function: self.function.clone(),
            params: self.params.clone(),
        }
    }
}

// ---------------------------------------------------------------------------
// Fractional differences
// ---------------------------------------------------------------------------

const FRAC_DIFF_J_CAP: usize = 1 << 25;

/// Delta^s m_k = sum_j A_j^{-s-1} m_{k+j} with certified absolute error <= tol.
///
/// Finitely supported sequences and integer orders are summed exactly.
/// Otherwise a known limit c is required: Delta^s annihilates constants, so
/// the sum runs over m - c and is truncated once the certified tail bound
/// (from the sequence's sup or declared tail decay) drops below tol.
pub fn frac_diff(m: &dyn MultiplierSeq, s: f64, k: usize, tol: f64) -> Result<Complex64> {
    if !(s > 0.0) {
        return Err(Error::InvalidParams(format!(
            "frac_diff needs s > 0, got {s}"
        )));
    }
    if let Some(bound) = m.support_bound() {
        if k > bound {
            return Ok(Complex64::new(0.0, 0.0));
        }
        return Ok(finite_sum(m, s, k, bound - k, Complex64::new(0.0, 0.0)));
    }
    if s.fract() == 0.0 && s <= 64.0 {
        // A_j^{-s-1} vanishes for j > s at integer order.
        return Ok(finite_sum(m, s, k, s as usize, Complex64::new(0.0, 0.0)));
    }
    let limit = m.limit_at_infinity().ok_or_else(|| {
        Error::Convergence(
            "frac_diff: sequence has no finite support and no known limit; tail cannot be certified"
                .into(),
        )
    })?;
    let sup_dev = m.sup_norm() + limit.norm();
    let mut cap = ((s as usize) + 2).max(8);
    loop {
        let bound = frac_tail_bound(m, s, k, cap, sup_dev);
        if bound <= tol {
            return Ok(finite_sum(m, s, k, cap, limit));
        }
        if cap >= FRAC_DIFF_J_CAP {
            return Err(Error::Convergence(format!(
                "frac_diff: tail bound {bound:.3e} still above tol {tol:.3e} at J = {cap}"
            )));
        }
        cap *= 2;
    }
}

fn finite_sum(m: &dyn MultiplierSeq, s: f64, k: usize, j_max: usize, limit: Complex64) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut a = 1.0; // A_j^{-s-1} by the multiplicative recurrence
    for j in 0..=j_max {
        if j > 0 {
            let jf = j as f64;
            a *= (jf - s - 1.0) / jf;
        }
        acc += (m.value(k + j) - limit) * a;
    }
    acc
}

/// Certified bound on |sum_{j>J} A_j^{-s-1} (m_{k+j} - c)|.
fn frac_tail_bound(m: &dyn MultiplierSeq, s: f64, k: usize, j_cap: usize, sup_dev: f64) -> f64 {
    let jf = j_cap as f64;
    let a_next = binom_a(j_cap + 1, -s - 1.0).abs();
    // sum_{j>J} |A_j^{-s-1}| <= |A_{J+1}| (J+2)^{s+2} (J+1)^{-s-1} / (s+1)
    let a_tail = a_next * (jf + 2.0).powf(s + 2.0) * (jf + 1.0).powf(-s - 1.0) / (s + 1.0);
    match m.tail_decay() {
        Some(TailDecay::Power { coeff, exponent }) => {
            a_tail * coeff * ((k + j_cap + 1) as f64).powf(-exponent)
        }
        Some(TailDecay::Geometric { coeff, ratio }) => {
            if coeff == 0.0 {
                0.0
            } else {
                // |A_j| is eventually decreasing, so the geometric factor rules.
                coeff * ratio.powi((k + j_cap + 1) as i32) * a_next / (1.0 - ratio)
            }
        }
        None => a_tail * sup_dev,
    }
}

// ---------------------------------------------------------------------------
// wbv norms
// ---------------------------------------------------------------------------

/// Parameters of the wbv_{q,s} norm evaluation.
#[derive(Debug, Clone, Copy)]
pub struct WbvSpec {
    /// q in [1, inf]; pass f64::INFINITY for the sup-block interpretation.
    pub q: f64,
    pub s: f64,
    /// The sup over blocks is taken for 1 <= n <= n_max.
    pub n_max: usize,
    /// Per-difference truncation tolerance.
    pub tail_tol: f64,
}

impl WbvSpec {
    pub fn new(q: f64, s: f64) -> Result<Self> {
        let spec = WbvSpec {
            q,
            s,
            n_max: 1 << 12,
            tail_tol: 1e-12,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn with_n_max(mut self, n_max: usize) -> Self {
        self.n_max = n_max.max(1);
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.q >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "wbv needs q in [1, inf], got {}",
                self.q
            )));
        }
        if !(self.s > 0.0) {
            return Err(Error::InvalidParams(format!(
                "wbv needs s > 0, got {}",
                self.s
            )));
        }
        if self.n_max < 1 {
            return Err(Error::InvalidParams("wbv needs n_max >= 1".into()));
        }
        Ok(())
    }
}

/// wbv norm value plus block-sum diagnostics.
#[derive(Debug, Clone)]
pub struct WbvReport {
    /// ||m||_infty + sup_n block(n).
    pub norm: f64,
    pub sup_norm: f64,
    /// sup_n block(n).
    pub block_term: f64,
    pub argmax_n: usize,
    /// Block values at dyadic n (and at the argmax), so callers can judge
    /// whether n_max was large enough.
    pub profile: Vec<(usize, f64)>,
    /// True when new maxima still appear in the top quarter of the n-range.
    pub saturated: bool,
}

/// The wbv_{q,s} norm ||m||_infty + sup_n (sum_{k=n}^{2n} k^{-1} |k^s Delta^s m_k|^q)^{1/q}.
///
/// Blocks start at n = 1 (the k = 0 term of the paper's display is undefined
/// and excluded); q = inf takes sup_{n<=k<=2n} |k^s Delta^s m_k|.
pub fn wbv_norm(m: &dyn MultiplierSeq, spec: &WbvSpec) -> Result<WbvReport> {
    spec.validate()?;
    let n_hi = match m.support_bound() {
        // blocks [n, 2n] with n beyond the support are identically zero
        Some(b) => spec.n_max.min(b.max(1)),
        None => spec.n_max,
    };
    let k_hi = 2 * n_hi;
    // d_k = |k^s Delta^s m_k| for k = 1..=k_hi
    let mut d = vec![0.0f64; k_hi + 1];
    for (k, slot) in d.iter_mut().enumerate().skip(1) {
        let diff = frac_diff(m, spec.s, k, spec.tail_tol)?;
        *slot = (k as f64).powf(spec.s) * diff.norm();
    }

    let block = |n: usize| -> f64 {
        if spec.q.is_infinite() {
            d[n..=(2 * n)].iter().copied().fold(0.0, f64::max)
        } else {
            let s: f64 = d[n..=(2 * n)]
                .iter()
                .enumerate()
                .map(|(i, &dk)| dk.powf(spec.q) / (n + i) as f64)
                .sum();
            s.powf(1.0 / spec.q)
        }
    };

    let mut best = 0.0;
    let mut argmax = 1;
    let mut profile = Vec::new();
    for n in 1..=n_hi {
        let b = block(n);
        if b > best {
            best = b;
            argmax = n;
        }
        if n.is_power_of_two() {
            profile.push((n, b));
        }
    }
    if !profile.iter().any(|&(n, _)| n == argmax) {
        profile.push((argmax, best));
        profile.sort_by_key(|&(n, _)| n);
    }
    let sup = m.sup_norm();
    Ok(WbvReport {
        norm: sup + best,
        sup_norm: sup,
        block_term: best,
        argmax_n: argmax,
        saturated: n_hi == spec.n_max && argmax * 4 > 3 * spec.n_max,
        profile,
    })
}

// ---------------------------------------------------------------------------
// Hormander quantity and the critical index
// ---------------------------------------------------------------------------

/// Dyadic grid 2^{j_min} .. 2^{j_max} for the Hormander sup.
#[derive(Debug, Clone, Copy)]
pub struct DyadicRange {
    pub j_min: i32,
    pub j_max: i32,
}

impl Default for DyadicRange {
    fn default() -> Self {
        DyadicRange {
            j_min: -16,
            j_max: 16,
        }
    }
}

/// B^2 = sup_x |m(x)|^2 + sup_N int_N^{2N} |m'(x)|^2 x dx over the dyadic grid,
/// each integral by Gauss-Legendre.
pub fn hormander_quantity(
    m: &dyn Fn(f64) -> Complex64,
    m_prime: &dyn Fn(f64) -> Complex64,
    range: DyadicRange,
) -> Result<f64> {
    if range.j_min > range.j_max {
        return Err(Error::InvalidParams(
            "hormander_quantity: empty dyadic range".into(),
        ));
    }
    let rule = gauss_legendre_rule(32, 0.0, 1.0)?;
    let mut sup_m2: f64 = 0.0;
    let mut sup_int: f64 = 0.0;
    for j in range.j_min..=range.j_max {
        let n = f64::powi(2.0, j);
        let mut integral = 0.0;
        for (&u, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
            let x = n * (1.0 + u); // maps [0,1] onto [N, 2N]
            sup_m2 = sup_m2.max(m(x).norm_sqr());
            integral += w * n * m_prime(x).norm_sqr() * x;
        }
        sup_int = sup_int.max(integral);
    }
    Ok(sup_m2 + sup_int)
}

/// Critical index s_c(p) = (2 alpha + 2) |1/p - 1/2|.
pub fn critical_index(alpha: f64, p: f64) -> Result<f64> {
    if !(alpha > -1.0) {
        return Err(Error::InvalidParams(format!(
            "critical_index needs alpha > -1, got {alpha}"
        )));
    }
    if !(p >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "critical_index needs p >= 1, got {p}"
        )));
    }
    Ok((2.0 * alpha + 2.0) * (1.0 / p - 0.5).abs())
}
