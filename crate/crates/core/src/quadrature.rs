//! Quadrature rules and weighted-norm computations on (0, infinity).
//!
//! Gauss rules are built from the symmetric tridiagonal Jacobi matrix
//! (eigenvalues by implicit-shift QL), refined by one or two Newton steps on
//! the recurrence-evaluated polynomial, with weights from the Christoffel
//! function. Weighted L^p norms with non-integer p fall back to composite
//! Gauss-Legendre on dyadic panels plus a closed-form tail bound driven by a
//! caller-declared decay certificate.

use std::io::Write;
use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::special::log_gamma;

const LN_2: f64 = std::f64::consts::LN_2;

// ---------------------------------------------------------------------------
// Decay certificates
// ---------------------------------------------------------------------------

/// Shape of a decay envelope: e^{-rate x} or e^{-rate x^2}.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DecayPower {
    Exp,
    Gauss,
}

/// Certified envelope |f(x)| <= bound * exp(-rate * ((x - offset)^+)^power)
/// on (0, inf). The offset carries the decay onset of functions that stay
/// O(bound) on a long initial stretch (Laguerre functions decay only past
/// their turning point).
#[derive(Debug, Clone, Copy)]
pub struct Decay {
    pub bound: f64,
    pub rate: f64,
    pub power: DecayPower,
    pub offset: f64,
}

impl Decay {
    pub fn new(bound: f64, rate: f64, power: DecayPower) -> Self {
        assert!(bound >= 0.0 && rate > 0.0, "invalid decay certificate");
        Decay {
            bound,
            rate,
            power,
            offset: 0.0,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        assert!(offset >= 0.0, "decay offset must be nonnegative");
        self.offset = offset;
        self
    }

    pub fn envelope(&self, x: f64) -> f64 {
        let u = (x - self.offset).max(0.0);
        let e = match self.power {
            DecayPower::Exp => -self.rate * u,
            DecayPower::Gauss => -self.rate * u * u,
        };
        self.bound * e.exp()
    }

    /// Envelope of |f|^p.
    pub fn pow(&self, p: f64) -> Decay {
        Decay {
            bound: self.bound.powf(p),
            rate: self.rate * p,
            power: self.power,
            offset: self.offset,
        }
    }

    pub fn scale(&self, c: f64) -> Decay {
        Decay {
            bound: self.bound * c.abs(),
            ..*self
        }
    }

    /// Envelope of a product f*g; offsets are merged conservatively to the
    /// larger one. Mixed powers are downgraded to the exponential shape
    /// using e^{-r u^2} <= e^{r/4} e^{-r u} on u >= 0.
    pub fn product(&self, other: &Decay) -> Decay {
        let offset = self.offset.max(other.offset);
        match (self.power, other.power) {
            (a, b) if a == b => Decay {
                bound: self.bound * other.bound,
                rate: self.rate + other.rate,
                power: a,
                offset,
            },
            _ => {
                let as_exp = |d: &Decay| match d.power {
                    DecayPower::Exp => (d.bound, d.rate),
                    DecayPower::Gauss => (d.bound * (d.rate / 4.0).exp(), d.rate),
                };
                let (b1, r1) = as_exp(self);
                let (b2, r2) = as_exp(other);
                Decay {
                    bound: b1 * b2,
                    rate: r1 + r2,
                    power: DecayPower::Exp,
                    offset,
                }
            }
        }
    }
}

/// Closed-form upper bound for the tail integral of env(x) x^w over (X, inf),
/// valid for X past `tail_validity`. With u = X - offset and w >= 0 the
/// weight satisfies x^w <= (X/u)^w u^w on the tail, which folds the offset
/// into the prefactor.
fn tail_bound(cert: &Decay, w: f64, x: f64) -> f64 {
    let u = x - cert.offset;
    let weight = if w >= 0.0 {
        x.powf(w) // = (x/u)^w * u^w
    } else {
        u.powf(w)
    };
    match cert.power {
        DecayPower::Exp => 2.0 * cert.bound / cert.rate * weight * (-cert.rate * u).exp(),
        DecayPower::Gauss => {
            cert.bound / cert.rate * weight / u * (-cert.rate * u * u).exp()
        }
    }
}

/// Smallest x where the closed-form tail bound is valid (the integrand's
/// envelope times x^w must be decreasing beyond it).
fn tail_validity(cert: &Decay, w: f64) -> f64 {
    let base = match cert.power {
        DecayPower::Exp => (2.0 * w.max(0.0) / cert.rate).max(1.0),
        DecayPower::Gauss => (w.max(1.0) / cert.rate).sqrt().max(1.0),
    };
    cert.offset + base
}

/// Dyadic cutoff X = 2^j with certified tail of the integral of
/// env(x) x^w below `tol`. Monotone: halving `tol` never decreases X.
pub fn tail_cutoff(cert: &Decay, w: f64, tol: f64) -> Result<f64> {
    if cert.bound == 0.0 {
        return Ok(1.0);
    }
    let validity = tail_validity(cert, w);
    for j in 0..=64i32 {
        let x = f64::powi(2.0, j);
        if x >= validity && tail_bound(cert, w, x) <= tol {
            return Ok(x);
        }
    }
    Err(Error::TailBound(format!(
        "decay certificate (bound {:.3e}, rate {:.3e}) cannot force the tail of x^{w} below {tol:.3e}",
        cert.bound, cert.rate
    )))
}

/// Dyadic head cutoff: largest eps = 2^-j with bound * eps^{w+1}/(w+1) <= tol.
fn head_cutoff(cert: &Decay, w: f64, tol: f64) -> f64 {
    if cert.bound == 0.0 {
        return 1.0;
    }
    for j in 0..=1020i32 {
        let eps = f64::powi(2.0, -j);
        if cert.bound * eps.powf(w + 1.0) / (w + 1.0) <= tol {
            return eps;
        }
    }
    f64::MIN_POSITIVE
}

// ---------------------------------------------------------------------------
// Composite panel grid for integrals of g(x) x^w dx on (0, inf)
// ---------------------------------------------------------------------------

const PANEL_NODES: usize = 32;

fn reference_gauss_legendre() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let rule = gauss_legendre_rule(PANEL_NODES, -1.0, 1.0).expect("reference rule");
        (rule.nodes, rule.weights)
    })
}

/// Nodes and weights (the x^w factor folded in) for the dyadic-panel scheme.
pub struct PanelGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Certified bound on the dropped head + tail mass.
    pub dropped: f64,
}

/// Oscillation hint for integrands built from order-lambda Laguerre
/// functions, so octave panels get subdivided where the local wavelength is
/// shorter than a 32-node panel can resolve.
#[derive(Debug, Clone, Copy)]
pub struct PanelOsc {
    pub kind: OscKind,
    /// Effective eigenvalue scale; pass 4 lambda_K for quadratic quantities
    /// (|f|^p, products), which double the frequency.
    pub lambda: f64,
}

#[derive(Debug, Clone, Copy)]
pub enum OscKind {
    /// Phase ~ sqrt(lambda x): local wavelength 2 pi sqrt(x / lambda)
    /// (the l and script-l systems).
    SqrtPhase,
    /// Phase ~ sqrt(lambda) x: wavelength 2 pi / sqrt(lambda)
    /// (the phi and psi systems, quadratic argument).
    LinearPhase,
}

impl PanelOsc {
    fn wavelength(&self, x: f64) -> f64 {
        let two_pi = std::f64::consts::TAU;
        match self.kind {
            OscKind::SqrtPhase => two_pi * (x.max(1e-30) / self.lambda).sqrt(),
            OscKind::LinearPhase => two_pi / self.lambda.sqrt(),
        }
    }

    /// Subpanels needed on [a, b] for ~3 nodes per wavelength with 32-node
    /// panels.
    fn subdivisions(&self, a: f64, b: f64) -> usize {
        let wl = self.wavelength(a).min(self.wavelength(b));
        let oscillations = (b - a) / wl;
        ((3.2 * oscillations / PANEL_NODES as f64).ceil() as usize).clamp(1, 64)
    }
}

/// Build the composite grid for integrating g(x) x^w dx when |g| obeys the
/// certificate. The head below the first panel and the tail beyond the last
/// are each certified below tol/2 and dropped.
pub fn build_panel_grid(cert: &Decay, w: f64, tol: f64) -> Result<PanelGrid> {
    build_panel_grid_with(cert, w, tol, None)
}

/// As [`build_panel_grid`], with octaves subdivided per the oscillation hint.
pub fn build_panel_grid_with(
    cert: &Decay,
    w: f64,
    tol: f64,
    osc: Option<PanelOsc>,
) -> Result<PanelGrid> {
    assert!(w > -1.0, "weight exponent must exceed -1");
    let eps = head_cutoff(cert, w, 0.5 * tol);
    let x_max = tail_cutoff(cert, w, 0.5 * tol)?;
    let j0 = eps.log2().round() as i32;
    let j1 = x_max.log2().round() as i32;
    if j0 >= j1 {
        return Ok(PanelGrid {
            nodes: Vec::new(),
            weights: Vec::new(),
            dropped: tol,
        });
    }
    let (ref_nodes, ref_weights) = reference_gauss_legendre();
    let n_panels = (j1 - j0) as usize;
    let mut nodes = Vec::with_capacity(n_panels * PANEL_NODES);
    let mut weights = Vec::with_capacity(n_panels * PANEL_NODES);
    for j in j0..j1 {
        let a = f64::powi(2.0, j);
        let b = 2.0 * a;
        let parts = osc.map(|o| o.subdivisions(a, b)).unwrap_or(1);
        let width = (b - a) / parts as f64;
        for part in 0..parts {
            let lo = a + width * part as f64;
            let mid = lo + 0.5 * width;
            let half = 0.5 * width;
            for (u, v) in ref_nodes.iter().zip(ref_weights.iter()) {
                let x = mid + half * u;
                nodes.push(x);
                weights.push(half * v * x.powf(w));
            }
        }
    }
    Ok(PanelGrid {
        nodes,
        weights,
        dropped: tol,
    })
}

/// Integral of g(x) x^w dx over (0, inf) with |g| certified by `cert`;
/// absolute error ~ tol plus panel quadrature error (negligible for smooth g).
pub fn integrate_power_weighted<F: FnMut(f64) -> f64>(
    mut g: F,
    w: f64,
    cert: &Decay,
    tol: f64,
) -> Result<f64> {
    let grid = build_panel_grid(cert, w, tol)?;
    let mut acc = 0.0;
    for (&x, &wt) in grid.nodes.iter().zip(grid.weights.iter()) {
        acc += wt * g(x);
    }
    Ok(acc)
}

pub fn integrate_power_weighted_complex<F: FnMut(f64) -> Complex64>(
    mut g: F,
    w: f64,
    cert: &Decay,
    tol: f64,
) -> Result<Complex64> {
    let grid = build_panel_grid(cert, w, tol)?;
    let mut acc = Complex64::new(0.0, 0.0);
    for (&x, &wt) in grid.nodes.iter().zip(grid.weights.iter()) {
        acc += g(x) * wt;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// Norm specifications
// ---------------------------------------------------------------------------

/// Which measure a norm integrates against.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub enum MeasureKind {
    /// Lebesgue dx; the exponent is the gamma of L^p_{v(gamma)}.
    Plain,
    /// d mu_alpha = x^{2 alpha + 1} dx; the exponent is the delta of ||.||_{p,delta}.
    MuAlpha { alpha: f64 },
}

/// Identifies a weighted L^p norm on (0, inf).
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct NormSpec {
    pub p: f64,
    pub exponent: f64,
    pub measure: MeasureKind,
}

impl NormSpec {
    /// L^p_{v(gamma)} norm against x^gamma dx; needs gamma > -1, p >= 1.
    pub fn plain(p: f64, gamma: f64) -> Result<Self> {
        let spec = NormSpec {
            p,
            exponent: gamma,
            measure: MeasureKind::Plain,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// ||.||_{p,delta} against x^{2 delta} d mu_alpha; needs 2 delta + 2 alpha + 1 > -1.
    pub fn mu_alpha(p: f64, delta: f64, alpha: f64) -> Result<Self> {
        let spec = NormSpec {
            p,
            exponent: delta,
            measure: MeasureKind::MuAlpha { alpha },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p >= 1.0) {
            return Err(Error::InvalidParams(format!(
                "norm requires p >= 1, got {}",
                self.p
            )));
        }
        if !(self.weight_exponent() > -1.0) {
            return Err(Error::InvalidParams(format!(
                "effective weight exponent {} must exceed -1",
                self.weight_exponent()
            )));
        }
        Ok(())
    }

    /// The power w in the unified representation integral |f|^p x^w dx.
    pub fn weight_exponent(&self) -> f64 {
        match self.measure {
            MeasureKind::Plain => self.exponent,
            MeasureKind::MuAlpha { alpha } => 2.0 * self.exponent + 2.0 * alpha + 1.0,
        }
    }
}

/// Weighted L^p norm of f with relative error ~ tol, by the composite
/// panel scheme with the certified tail dropped.
pub fn weighted_norm<F: FnMut(f64) -> Complex64>(
    f: F,
    cert: &Decay,
    spec: &NormSpec,
    tol: f64,
) -> Result<f64> {
    weighted_norm_with(f, cert, spec, tol, None)
}

/// As [`weighted_norm`], with an oscillation hint for expansion-built
/// integrands.
pub fn weighted_norm_with<F: FnMut(f64) -> Complex64>(
    mut f: F,
    cert: &Decay,
    spec: &NormSpec,
    tol: f64,
    osc: Option<PanelOsc>,
) -> Result<f64> {
    spec.validate()?;
    let w = spec.weight_exponent();
    let p = spec.p;
    let cert_p = cert.pow(p);
    let run = |f: &mut F, target: f64| -> Result<f64> {
        let grid = build_panel_grid_with(&cert_p, w, target, osc)?;
        let mut acc = 0.0;
        for (&x, &wt) in grid.nodes.iter().zip(grid.weights.iter()) {
            acc += wt * f(x).norm().powf(p);
        }
        Ok(acc)
    };
    let i1 = run(&mut f, tol)?;
    if i1 <= 0.0 {
        return Ok(0.0);
    }
    let integral = if i1 < 1.0 {
        // Re-run with the absolute target matched to the observed magnitude
        // so the tolerance is honored relatively.
        let target = (tol * i1).max(1e-300);
        run(&mut f, target)?
    } else {
        i1
    };
    Ok(integral.powf(1.0 / p))
}

// ---------------------------------------------------------------------------
// Gauss rules
// ---------------------------------------------------------------------------

/// What the weights of a rule absorb.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WeightConvention {
    /// Weights integrate against x^alpha e^{-x} dx on (0, inf).
    LaguerreAlpha { alpha: f64 },
    /// Weights integrate against dx on [a, b].
    Interval { a: f64, b: f64 },
}

/// A Gauss rule with a declared exactness degree.
#[derive(Debug, Clone)]
pub struct QuadRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// For Laguerre rules only: weights with the e^{+x_i} factor reinstated,
    /// so sum_i scaled_weights[i] h(x_i) ~ integral of h(x) x^alpha dx for h
    /// in the polynomial-times-e^{-x} class. These stay O(1) even where the
    /// plain weights underflow. Empty for interval rules.
    pub scaled_weights: Vec<f64>,
    /// Polynomial degree integrated exactly.
    pub exactness: usize,
    pub convention: WeightConvention,
}

impl QuadRule {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Sum of w_i f(x_i).
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.weights.iter())
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Laguerre rules: sum of scaled_weights_i h(x_i) ~ integral h(x) x^alpha dx.
    pub fn integrate_scaled<F: FnMut(f64) -> f64>(&self, mut h: F) -> f64 {
        self.nodes
            .iter()
            .zip(self.scaled_weights.iter())
            .map(|(&x, &w)| w * h(x))
            .sum()
    }

    /// Node,weight CSV rows for external verification.
    pub fn write_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "node,weight")?;
        for (x, w) in self.nodes.iter().zip(self.weights.iter()) {
            writeln!(out, "{x:?},{w:?}")?;
        }
        Ok(())
    }

    fn validate(&self, total_mass: f64) -> Result<()> {
        for pair in self.nodes.windows(2) {
            if !(pair[0] < pair[1]) {
                return Err(Error::Quadrature("nodes not strictly increasing".into()));
            }
        }
        let sum: f64 = self.weights.iter().sum();
        if !((sum - total_mass).abs() <= 1e-12 * total_mass.abs().max(1.0)) {
            return Err(Error::Quadrature(format!(
                "weight sum {sum} deviates from total mass {total_mass}"
            )));
        }
        Ok(())
    }
}

/// Gauss-Laguerre rule: exact for q(x) x^alpha e^{-x} dx, deg q <= 2N-1.
pub fn gauss_laguerre_rule(n: usize, alpha: f64) -> Result<QuadRule> {
    if n == 0 || n > 512 {
        return Err(Error::InvalidParams(format!(
            "gauss_laguerre_rule requires 1 <= N <= 512, got {n}"
        )));
    }
    if !(alpha > -1.0) {
        return Err(Error::InvalidParams(format!(
            "gauss_laguerre_rule requires alpha > -1, got {alpha}"
        )));
    }
    let mut diag: Vec<f64> = (0..n).map(|k| 2.0 * k as f64 + alpha + 1.0).collect();
    let mut off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| {
            let kk = (k + 1) as f64;
            (kk * (kk + alpha)).sqrt()
        })
        .collect();
    tridiag_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|a, b| a.partial_cmp(b).unwrap());

    let mass = log_gamma(alpha + 1.0)?.exp();
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    let mut scaled = Vec::with_capacity(n);
    for &ev in diag.iter() {
        let mut x = ev.max(f64::MIN_POSITIVE);
        // Two Newton steps on the damped orthonormal polynomial; the common
        // binary scale cancels in the ratio, so this is overflow-free for
        // every node of every admissible N.
        for _ in 0..2 {
            let scan = laguerre_ortho_scan(n, alpha, x);
            let deriv = ((n as f64 - 0.5 * x) * scan.q_n
                - ((n as f64) * (n as f64 + alpha)).sqrt() * scan.q_nm1)
                / x;
            if deriv != 0.0 {
                let step = scan.q_n / deriv;
                if step.abs() < 0.5 * x {
                    x -= step;
                }
            }
        }
        let scan = laguerre_ortho_scan(n, alpha, x);
        // Christoffel weight: w = 1 / sum_{k<n} P_k(x)^2 with P orthonormal
        // against x^alpha e^{-x} dx; the scan carries sum q_k^2 = e^{-x} sum P_k^2.
        let ln_sum_q2 = scan.sum_q2_mant.ln() + scan.sum_q2_exp as f64 * LN_2;
        let w_scaled = (-ln_sum_q2).exp();
        let w_plain = (-ln_sum_q2 - x).exp();
        nodes.push(x);
        weights.push(w_plain);
        scaled.push(w_scaled);
    }
    let rule = QuadRule {
        nodes,
        weights,
        scaled_weights: scaled,
        exactness: 2 * n - 1,
        convention: WeightConvention::LaguerreAlpha { alpha },
    };
    rule.validate(mass)?;
    Ok(rule)
}

/// Gauss-Legendre rule on [a, b], exact for polynomials of degree <= 2N-1.
pub fn gauss_legendre_rule(n: usize, a: f64, b: f64) -> Result<QuadRule> {
    if n == 0 {
        return Err(Error::InvalidParams("gauss_legendre_rule needs N >= 1".into()));
    }
    if !(a < b) {
        return Err(Error::InvalidParams(format!(
            "gauss_legendre_rule needs a < b, got [{a}, {b}]"
        )));
    }
    let mut diag = vec![0.0; n];
    let mut off: Vec<f64> = (0..n.saturating_sub(1))
        .map(|k| {
            let kk = (k + 1) as f64;
            kk / (4.0 * kk * kk - 1.0).sqrt()
        })
        .collect();
    tridiag_eigenvalues(&mut diag, &mut off)?;
    diag.sort_by(|x, y| x.partial_cmp(y).unwrap());

    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut nodes = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &ev in diag.iter() {
        let mut t = ev.clamp(-1.0, 1.0);
        for _ in 0..2 {
            let (pn, pnm1) = legendre_pair(n, t);
            let denom = t * t - 1.0;
            if denom == 0.0 {
                break;
            }
            let deriv = n as f64 * (t * pn - pnm1) / denom;
            if deriv != 0.0 {
                t -= pn / deriv;
            }
        }
        let (_, pnm1) = legendre_pair(n, t);
        // w = 2 (1 - t^2) / (N P_{N-1}(t))^2, the derivative-free form.
        let w = 2.0 * (1.0 - t * t) / (n as f64 * pnm1).powi(2);
        nodes.push(mid + half * t);
        weights.push(half * w);
    }
    let rule = QuadRule {
        nodes,
        weights,
        scaled_weights: Vec::new(),
        exactness: 2 * n - 1,
        convention: WeightConvention::Interval { a, b },
    };
    rule.validate(b - a)?;
    Ok(rule)
}

fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    if n == 0 {
        return (1.0, 0.0);
    }
    let mut prev = 1.0;
    let mut cur = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * cur - kf * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    (cur, prev)
}

struct LaguerreScan {
    /// sum_{k<n} q_k(x)^2 as mant * 2^exp (q_k = e^{-x/2} P_k, P orthonormal).
    sum_q2_mant: f64,
    sum_q2_exp: i64,
    /// q_n and q_{n-1} in a common (dropped) binary scale.
    q_n: f64,
    q_nm1: f64,
}

/// One pass of the damped orthonormal Laguerre recurrence with dynamic
/// rescaling, so nodes up to ~4N+2alpha+2 are handled without overflow or
/// underflow for N <= 512.
fn laguerre_ortho_scan(n: usize, alpha: f64, x: f64) -> LaguerreScan {
    let ln_q0 = -0.5 * x - 0.5 * log_gamma(alpha + 1.0).expect("alpha > -1");
    let e0 = (ln_q0 / LN_2).floor();
    let mut scale_exp = e0 as i64; // true q = q * 2^scale_exp
    let mut q = (ln_q0 - e0 * LN_2).exp();
    let mut q_prev = 0.0;
    let mut sum_mant = 0.0f64;
    // running sum of true q_k^2 = sum_mant * 2^{2 scale_exp}
    for k in 0..n {
        sum_mant += q * q;
        let kf = k as f64;
        let b_next = ((kf + 1.0) * (kf + 1.0 + alpha)).sqrt();
        let b_prev = if k == 0 { 0.0 } else { (kf * (kf + alpha)).sqrt() };
        let next = ((2.0 * kf + alpha + 1.0 - x) * q - b_prev * q_prev) / b_next;
        q_prev = q;
        q = next;
        let mag = q.abs().max(q_prev.abs());
        if mag > 1e150 {
            q *= 2f64.powi(-512);
            q_prev *= 2f64.powi(-512);
            scale_exp += 512;
            sum_mant *= 2f64.powi(-1024);
        } else if mag < 1e-150 && mag > 0.0 && sum_mant < 1e150 {
            q *= 2f64.powi(512);
            q_prev *= 2f64.powi(512);
            scale_exp -= 512;
            sum_mant = (sum_mant * 2f64.powi(512)) * 2f64.powi(512);
        }
    }
    // Normalize the mantissa so its log is well-conditioned.
    let mut exp2 = 2 * scale_exp;
    if sum_mant > 0.0 {
        let adj = sum_mant.log2().floor();
        sum_mant *= 2f64.powf(-adj);
        exp2 += adj as i64;
    }
    LaguerreScan {
        sum_q2_mant: sum_mant,
        sum_q2_exp: exp2,
        q_n: q,
        q_nm1: q_prev,
    }
}

/// Implicit-shift QL for a symmetric tridiagonal matrix; eigenvalues land in
/// `d`. Reports failure instead of spinning when an eigenvalue refuses to
/// converge.
fn tridiag_eigenvalues(d: &mut [f64], off: &mut [f64]) -> Result<()> {
    let n = d.len();
    if n <= 1 {
        return Ok(());
    }
    let mut e = vec![0.0; n];
    e[..n - 1].copy_from_slice(off);
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 50 {
                return Err(Error::Quadrature(
                    "tridiagonal QL did not converge within 50 sweeps".into(),
                ));
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c) = (1.0, 1.0);
            let mut p = 0.0;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if i == l {
                    d[l] -= p;
                    e[l] = g;
                    e[m] = 0.0;
                }
            }
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Weighted Hardy inequality
// ---------------------------------------------------------------------------

/// Both sides of the weighted Hardy inequality
/// (int_0^inf (int_x^inf f)^p x^delta dx)^{1/p}
///   <= p/(delta+1) (int_0^inf (y f(y))^p y^delta dy)^{1/p}.
#[derive(Debug, Clone, Copy)]
pub struct HardyCheck {
    pub lhs: f64,
    /// The bare right-hand integral, without the constant.
    pub rhs: f64,
    /// The sharp constant p/(delta+1).
    pub constant: f64,
}

/// Evaluate both sides of the weighted Hardy inequality for nonnegative f.
/// The inner primitive F(x) = int_x^inf f is accumulated over the outer
/// nodes from the far end inward, so each segment is integrated once.
pub fn hardy_check<F: Fn(f64) -> f64>(
    f: F,
    cert: &Decay,
    p: f64,
    delta: f64,
    tol: f64,
) -> Result<HardyCheck> {
    if !(p >= 1.0) {
        return Err(Error::InvalidParams(format!("hardy_check needs p >= 1, got {p}")));
    }
    if !(delta > -1.0) {
        return Err(Error::InvalidParams(format!(
            "hardy_check needs delta > -1, got {delta}"
        )));
    }
    // rhs: (y f(y))^p y^delta = f^p y^{p+delta}
    let cert_p = cert.pow(p);
    let rhs_int = integrate_power_weighted(|x| f(x).powf(p), p + delta, &cert_p, tol)?;
    if !rhs_int.is_finite() {
        return Err(Error::Divergent("hardy_check: right side diverges".into()));
    }

    // Envelope for F(x) = int_x^inf f.
    let cert_big = match cert.power {
        DecayPower::Exp => Decay::new(cert.bound / cert.rate, cert.rate, DecayPower::Exp),
        DecayPower::Gauss => {
            let head = (std::f64::consts::PI / (4.0 * cert.rate)).sqrt() * cert.rate.exp();
            Decay::new(cert.bound * head.max(0.5 / cert.rate), cert.rate, DecayPower::Gauss)
        }
    };
    let outer = build_panel_grid(&cert_big.pow(p), delta, tol)?;
    if outer.nodes.is_empty() {
        return Ok(HardyCheck {
            lhs: 0.0,
            rhs: rhs_int.max(0.0).powf(1.0 / p),
            constant: p / (delta + 1.0),
        });
    }

    // F on the outer nodes, far end first.
    let seg_rule = gauss_legendre_rule(16, -1.0, 1.0)?;
    let segment = |a: f64, b: f64| -> f64 {
        let mid = 0.5 * (a + b);
        let half = 0.5 * (b - a);
        seg_rule
            .nodes
            .iter()
            .zip(seg_rule.weights.iter())
            .map(|(&u, &w)| w * f(mid + half * u))
            .sum::<f64>()
            * half
    };
    let x_far = tail_cutoff(cert, 0.0, (tol * 1e-3).max(1e-300))?;
    let n_outer = outer.nodes.len();
    let mut big_f = vec![0.0; n_outer];
    let mut acc = 0.0;
    let mut upper = x_far.max(outer.nodes[n_outer - 1]);
    // a few dyadic segments from the last node out to the far cutoff
    {
        let mut hi = upper;
        let last = outer.nodes[n_outer - 1];
        while hi > last * 1.0001 {
            let lo = (0.5 * hi).max(last);
            acc += segment(lo, hi);
            hi = lo;
        }
        upper = last;
    }
    for i in (0..n_outer).rev() {
        let x = outer.nodes[i];
        if x < upper {
            acc += segment(x, upper);
            upper = x;
        }
        big_f[i] = acc;
    }

    let lhs_int: f64 = outer
        .weights
        .iter()
        .zip(big_f.iter())
        .map(|(&w, &ff)| w * ff.powf(p))
        .sum();
    if !lhs_int.is_finite() {
        return Err(Error::Divergent("hardy_check: left side diverges".into()));
    }
    Ok(HardyCheck {
        lhs: lhs_int.max(0.0).powf(1.0 / p),
        rhs: rhs_int.max(0.0).powf(1.0 / p),
        constant: p / (delta + 1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn laguerre_rule_single_node() {
        for &alpha in &[0.0, 0.5, 2.5] {
            let rule = gauss_laguerre_rule(1, alpha).unwrap();
            assert_abs_diff_eq!(rule.nodes[0], alpha + 1.0, epsilon = 1e-12);
            let mass = log_gamma(alpha + 1.0).unwrap().exp();
            assert_relative_eq!(rule.weights[0], mass, max_relative = 1e-12);
        }
    }

    #[test]
    fn laguerre_rule_two_nodes_alpha_zero() {
        let rule = gauss_laguerre_rule(2, 0.0).unwrap();
        let s = 2f64.sqrt();
        assert_abs_diff_eq!(rule.nodes[0], 2.0 - s, epsilon = 1e-13);
        assert_abs_diff_eq!(rule.nodes[1], 2.0 + s, epsilon = 1e-13);
        assert_abs_diff_eq!(rule.weights[0], (2.0 + s) / 4.0, epsilon = 1e-13);
        assert_abs_diff_eq!(rule.weights[1], (2.0 - s) / 4.0, epsilon = 1e-13);
    }

    #[test]
    fn laguerre_rule_exactness_cubic() {
        // integral of x^3 e^{-x} = Gamma(4) = 6 with just two nodes
        let rule = gauss_laguerre_rule(2, 0.0).unwrap();
        let integral = rule.integrate(|x| x * x * x);
        assert_abs_diff_eq!(integral, 6.0, epsilon = 1e-13);
    }

    #[test]
    fn laguerre_rule_moments_general_alpha() {
        let alpha = 1.5;
        let rule = gauss_laguerre_rule(8, alpha).unwrap();
        // integral x^m x^alpha e^{-x} = Gamma(m + alpha + 1)
        for m in 0..=15usize {
            let expect = log_gamma(m as f64 + alpha + 1.0).unwrap().exp();
            let got = rule.integrate(|x| x.powi(m as i32));
            assert_relative_eq!(got, expect, max_relative = 1e-12);
        }
    }

    #[test]
    fn laguerre_rule_scaled_weights_consistent() {
        let rule = gauss_laguerre_rule(16, 0.5).unwrap();
        for (i, (&x, &w)) in rule.nodes.iter().zip(rule.weights.iter()).enumerate() {
            assert_relative_eq!(rule.scaled_weights[i], w * x.exp(), max_relative = 1e-11);
            assert!(rule.scaled_weights[i] > 0.0);
        }
        let _ = rule.nodes; // ordering checked in constructor
    }

    #[test]
    fn laguerre_rule_large_n_does_not_blow_up() {
        let rule = gauss_laguerre_rule(512, 0.0).unwrap();
        assert_eq!(rule.len(), 512);
        assert!(rule.scaled_weights.iter().all(|w| w.is_finite() && *w > 0.0));
        let sum: f64 = rule.weights.iter().sum();
        assert_relative_eq!(sum, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn legendre_rule_classic_two_point() {
        let rule = gauss_legendre_rule(2, -1.0, 1.0).unwrap();
        let s = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(rule.nodes[0], -s, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.nodes[1], s, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights[0], 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(rule.weights[1], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn legendre_rule_unit_interval() {
        let rule = gauss_legendre_rule(2, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(rule.integrate(|y| y * y), 1.0 / 3.0, epsilon = 1e-14);
        for n in [1usize, 3, 7, 40] {
            let r = gauss_legendre_rule(n, -2.5, 4.0).unwrap();
            assert_abs_diff_eq!(r.integrate(|_| 1.0), 6.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn legendre_rule_high_degree_polynomial() {
        let n = 24;
        let rule = gauss_legendre_rule(n, 0.0, 2.0).unwrap();
        // degree 2n-1 polynomial integrated exactly
        let d = (2 * n - 1) as i32;
        let got = rule.integrate(|x| x.powi(d));
        let expect = 2f64.powi(d + 1) / (d as f64 + 1.0);
        assert_relative_eq!(got, expect, max_relative = 1e-12);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(gauss_laguerre_rule(0, 0.0).is_err());
        assert!(gauss_laguerre_rule(600, 0.0).is_err());
        assert!(gauss_laguerre_rule(4, -1.0).is_err());
        assert!(gauss_legendre_rule(3, 1.0, 1.0).is_err());
    }

    #[test]
    fn weighted_norm_exponential_examples() {
        // ||e^{-x/2}||_{L^2(dx)} = 1
        let cert = Decay::new(1.0, 0.5, DecayPower::Exp);
        let spec = NormSpec::plain(2.0, 0.0).unwrap();
        let n = weighted_norm(
            |x| Complex64::new((-0.5 * x).exp(), 0.0),
            &cert,
            &spec,
            1e-11,
        )
        .unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-10);

        // ||e^{-x}||_{L^1(x dx)} = Gamma(2) = 1
        let cert = Decay::new(1.0, 1.0, DecayPower::Exp);
        let spec = NormSpec::plain(1.0, 1.0).unwrap();
        let n = weighted_norm(|x| Complex64::new((-x).exp(), 0.0), &cert, &spec, 1e-11).unwrap();
        assert_relative_eq!(n, 1.0, max_relative = 1e-10);
    }

    #[test]
    fn weighted_norm_gaussian_and_mu_alpha() {
        // ||e^{-x^2/2}||_{2,0} with alpha = 0: integral e^{-x^2} x dx = 1/2
        let cert = Decay::new(1.0, 0.5, DecayPower::Gauss);
        let spec = NormSpec::mu_alpha(2.0, 0.0, 0.0).unwrap();
        let n = weighted_norm(
            |x| Complex64::new((-0.5 * x * x).exp(), 0.0),
            &cert,
            &spec,
            1e-11,
        )
        .unwrap();
        assert_relative_eq!(n, 0.5f64.sqrt(), max_relative = 1e-10);
    }

    #[test]
    fn weighted_norm_homogeneous() {
        let cert = Decay::new(3.0, 0.5, DecayPower::Exp);
        let spec = NormSpec::plain(3.0, 0.25).unwrap();
        let f = |x: f64| Complex64::new((-0.5 * x).exp() * (1.0 + x.sin()), 0.0);
        let n1 = weighted_norm(f, &cert, &spec, 1e-11).unwrap();
        let c = -7.25;
        let n2 = weighted_norm(|x| f(x) * c, &cert.scale(c), &spec, 1e-11).unwrap();
        assert_relative_eq!(n2, c.abs() * n1, max_relative = 1e-12);
    }

    #[test]
    fn tail_cutoff_monotone_in_tol() {
        let cert = Decay::new(2.0, 0.25, DecayPower::Exp);
        let mut tol = 1e-2;
        let mut prev = 0.0;
        while tol > 1e-14 {
            let x = tail_cutoff(&cert, 1.5, tol).unwrap();
            assert!(x >= prev, "X_max shrank as tol tightened");
            prev = x;
            tol *= 0.5;
        }
        let gauss = Decay::new(5.0, 0.25, DecayPower::Gauss);
        let mut tol = 1e-2;
        let mut prev = 0.0;
        while tol > 1e-14 {
            let x = tail_cutoff(&gauss, 2.0, tol).unwrap();
            assert!(x >= prev);
            prev = x;
            tol *= 0.5;
        }
    }

    #[test]
    fn hardy_exponential_equality_case() {
        // f = e^{-y}, p = 1, delta = 0: both sides equal 1.
        let cert = Decay::new(1.0, 1.0, DecayPower::Exp);
        let h = hardy_check(|y| (-y).exp(), &cert, 1.0, 0.0, 1e-10).unwrap();
        assert_relative_eq!(h.lhs, 1.0, max_relative = 1e-8);
        assert_relative_eq!(h.rhs, 1.0, max_relative = 1e-8);
        assert_abs_diff_eq!(h.constant, 1.0);
        assert!(h.lhs <= h.constant * h.rhs + 1e-8);
    }

    #[test]
    fn hardy_zero_function() {
        let cert = Decay::new(0.0, 1.0, DecayPower::Exp);
        let h = hardy_check(|_| 0.0, &cert, 2.0, 0.5, 1e-10).unwrap();
        assert_eq!(h.lhs, 0.0);
        assert_eq!(h.rhs, 0.0);
    }

    #[test]
    fn hardy_p2_delta1_closed_form() {
        // f = e^{-y}: lhs = (int e^{-2x} x dx)^{1/2} = 1/2,
        // rhs = (int y^3 e^{-2y} dy)^{1/2} = (6/16)^{1/2}.
        let cert = Decay::new(1.0, 1.0, DecayPower::Exp);
        let h = hardy_check(|y| (-y).exp(), &cert, 2.0, 1.0, 1e-10).unwrap();
        assert_relative_eq!(h.lhs, 0.5, max_relative = 1e-7);
        assert_relative_eq!(h.rhs, 0.375f64.sqrt(), max_relative = 1e-7);
        assert!(h.lhs <= h.constant * h.rhs + 1e-9);
    }

    #[test]
    fn quadrule_csv_layout() {
        let rule = gauss_legendre_rule(2, -1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        rule.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "node,weight");
        assert_eq!(lines.count(), 2);
    }
}
