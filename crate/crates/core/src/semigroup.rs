//! Poisson semigroup on the psi system, square functions g_sigma and
//! g_lambda^*, twisted and Euclidean translations/convolutions, the
//! homogeneous comparison kernel, and the multiplier kernel d_sM.
//!
//! Everything runs on alpha >= 0, where |L_k^alpha(u) e^{-u/2}| <= A_k^alpha
//! gives certified series truncations and the translation kernels are
//! contractions.

use std::sync::OnceLock;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expansion::Expansion;
use crate::quadrature::{
    build_panel_grid, gauss_legendre_rule, Decay, DecayPower, QuadRule,
};
use crate::sequences::MultiplierSeq;
use crate::special::{bessel_normalized, binom_a, log_gamma, theta_distance};
use crate::systems::{eigenvalue, system, Family};

fn gamma(x: f64) -> f64 {
    log_gamma(x).expect("positive argument").exp()
}

/// Constant c_alpha of the kernel series p_t and d_sM, calibrated so that
/// f x p_t reproduces P^t f under the twisted convolution in d mu_alpha:
/// the product formula tau_x psi_k(y) = psi_k(x) psi_k(y) / psi_k(0) pins
/// c_alpha = 2 / Gamma(alpha+1).
pub fn kernel_constant(alpha: f64) -> f64 {
    2.0 / gamma(alpha + 1.0)
}

/// A function handle together with its certified decay envelope.
pub struct CertifiedFn<'a> {
    pub f: &'a dyn Fn(f64) -> f64,
    pub decay: Decay,
}

/// Numerically scanned envelope sup |f| e^{+rate x^power} over [0, x_hi],
/// padded with a safety margin. For callers that cannot state a closed-form
/// certificate.
pub fn scan_envelope<F: Fn(f64) -> f64>(f: F, rate: f64, power: DecayPower, x_hi: f64) -> Decay {
    let n = 3000;
    let mut best: f64 = 0.0;
    for i in 0..=n {
        let x = x_hi * i as f64 / n as f64;
        let growth = match power {
            DecayPower::Exp => rate * x,
            DecayPower::Gauss => rate * x * x,
        };
        best = best.max(f(x).abs() * growth.exp());
    }
    Decay::new(best.max(f64::MIN_POSITIVE) * 1.3, rate, power)
}

// ---------------------------------------------------------------------------
// Certified truncation of the kernel series
// ---------------------------------------------------------------------------

const SERIES_K_CAP: usize = 1 << 21;

/// Smallest K with
///   c_alpha sup|m| sum_{k>K} lambda_k^s A_k^alpha r^{lambda_k} <= tol,
/// using the geometric domination of the summands past K. Requires
/// alpha >= 0 (so |L_k^alpha(u) e^{-u/2}| <= A_k^alpha) and 0 < r < 1.
fn series_truncation(alpha: f64, s: f64, r: f64, sup_m: f64, tol: f64) -> Result<usize> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "kernel series need alpha >= 0, got {alpha}"
        )));
    }
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParams(format!(
            "kernel series need 0 < r < 1, got {r}"
        )));
    }
    if sup_m == 0.0 {
        return Ok(0);
    }
    let prefactor = kernel_constant(alpha) * sup_m * r.powf(2.0 * alpha + 2.0);
    let mut k = 8usize;
    loop {
        let lam = eigenvalue(alpha, k + 1);
        let rho = (1.0 + 4.0 / lam).powf(s) * (1.0 + alpha / (k as f64 + 2.0)) * r.powi(4);
        if rho < 1.0 {
            let b = lam.powf(s)
                * binom_a(k + 1, alpha)
                * (4.0 * (k as f64 + 1.0) * r.ln()).exp();
            let tail = prefactor * b / (1.0 - rho);
            if tail <= tol {
                return Ok(k);
            }
        }
        if k >= SERIES_K_CAP {
            return Err(Error::Truncation(format!(
                "kernel series: tail cannot be certified below {tol:.3e} (r = {r}, s = {s})"
            )));
        }
        k *= 2;
    }
}

/// sum_{k<=k_max} coeff(k) L_k^alpha(y^2) e^{-y^2/2}.
fn damped_series<C: FnMut(usize) -> Complex64>(
    alpha: f64,
    y: f64,
    k_max: usize,
    mut coeff: C,
) -> Complex64 {
    let u = y * y;
    let damp = (-0.5 * u).exp();
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..=k_max {
        acc += coeff(k) * (cur * damp);
        let kf = k as f64;
        let next = ((2.0 * kf + alpha + 1.0 - u) * cur - (kf + alpha) * prev) / (kf + 1.0);
        prev = cur;
        cur = next;
    }
    acc
}

// ---------------------------------------------------------------------------
// Poisson semigroup
// ---------------------------------------------------------------------------

/// Resolved evaluation state for the Poisson kernel at one time t.
#[derive(Debug, Clone)]
pub struct PoissonState {
    pub alpha: f64,
    pub t: f64,
    pub tail_tol: f64,
    truncation: usize,
}

impl PoissonState {
    pub fn new(alpha: f64, t: f64, tail_tol: f64) -> Result<Self> {
        if !(t > 0.0) {
            return Err(Error::InvalidParams(format!(
                "poisson state needs t > 0, got {t}"
            )));
        }
        let r = (-t).exp();
        let truncation = series_truncation(alpha, 0.0, r, 1.0, tail_tol)?;
        Ok(PoissonState {
            alpha,
            t,
            tail_tol,
            truncation,
        })
    }

    pub fn r(&self) -> f64 {
        (-self.t).exp()
    }

    pub fn truncation(&self) -> usize {
        self.truncation
    }
}

/// Poisson kernel p_t(y) = c_alpha sum_k e^{-t lambda_k} L_k^alpha(y^2) e^{-y^2/2},
/// truncated with certified tail below the state's tail tolerance.
pub fn poisson_kernel(state: &PoissonState, y: f64) -> Result<f64> {
    if !(y >= 0.0) {
        return Err(Error::Domain(format!("poisson_kernel needs y >= 0, got {y}")));
    }
    let ln_r = -state.t;
    let value = damped_series(state.alpha, y, state.truncation, |k| {
        Complex64::new((eigenvalue(state.alpha, k) * ln_r).exp(), 0.0)
    });
    Ok(kernel_constant(state.alpha) * value.re)
}

/// Poisson means on the coefficient side: c_k -> e^{-t lambda_k} c_k.
pub fn poisson_means(e: &Expansion, t: f64) -> Result<Expansion> {
    if e.tag().family != Family::Psi {
        return Err(Error::InvalidParams(format!(
            "poisson_means acts on psi expansions, got {}",
            e.tag()
        )));
    }
    if !(t >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "poisson_means needs t >= 0, got {t}"
        )));
    }
    let alpha = e.tag().alpha;
    let coeffs = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| c * (-t * eigenvalue(alpha, k)).exp())
        .collect();
    Expansion::new(e.tag(), coeffs)
}

// ---------------------------------------------------------------------------
// g_sigma square functions
// ---------------------------------------------------------------------------

/// g_sigma(f)(x) for a finite psi expansion, by termwise integration:
/// g_sigma^2 = Gamma(2 sigma) sum_{j,k} (lambda_j lambda_k)^sigma c_j conj(c_k)
///             psi_j(x) psi_k(x) (lambda_j + lambda_k)^{-2 sigma}.
pub fn g_sigma(e: &Expansion, sigma: f64, x: f64) -> Result<f64> {
    if e.tag().family != Family::Psi {
        return Err(Error::InvalidParams(format!(
            "g_sigma acts on psi expansions, got {}",
            e.tag()
        )));
    }
    if !(sigma >= 1.0) {
        return Err(Error::InvalidParams(format!(
            "g_sigma needs sigma >= 1, got {sigma}"
        )));
    }
    let sys = system(e.tag());
    sys.check_point(x)?;
    let mut basis = Vec::new();
    sys.eval_into(e.degree(), x, &mut basis);
    let alpha = e.tag().alpha;
    let g2 = gamma(2.0 * sigma);
    let mut acc = 0.0;
    for (j, cj) in e.coeffs().iter().enumerate() {
        if cj.norm_sqr() == 0.0 {
            continue;
        }
        let lj = eigenvalue(alpha, j);
        for (k, ck) in e.coeffs().iter().enumerate() {
            if ck.norm_sqr() == 0.0 {
                continue;
            }
            let lk = eigenvalue(alpha, k);
            let weight = (lj * lk).powf(sigma) / (lj + lk).powf(2.0 * sigma);
            acc += (cj * ck.conj()).re * basis[j] * basis[k] * weight;
        }
    }
    Ok((g2 * acc).max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// Translations and convolutions
// ---------------------------------------------------------------------------

fn theta_rule() -> &'static QuadRule {
    static RULE: OnceLock<QuadRule> = OnceLock::new();
    RULE.get_or_init(|| {
        gauss_legendre_rule(128, 0.0, std::f64::consts::PI).expect("theta rule")
    })
}

fn wallis_constant(alpha: f64) -> f64 {
    gamma(alpha + 1.0) / (std::f64::consts::PI.sqrt() * gamma(alpha + 0.5))
}

/// Generalized Euclidean translation
/// tau^E_x f(y) = c_alpha int_0^pi f((x,y)_theta) sin(theta)^{2 alpha} d theta,
/// normalized so tau^E_x 1 = 1.
pub fn euclidean_translate<F: Fn(f64) -> f64>(f: F, x: f64, y: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "euclidean_translate needs alpha >= 0, got {alpha}"
        )));
    }
    let c = wallis_constant(alpha);
    let rule = theta_rule();
    let mut acc = 0.0;
    for (&theta, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let d = theta_distance(x, y, theta);
        acc += w * f(d) * theta.sin().powf(2.0 * alpha);
    }
    Ok(c * acc)
}

/// Twisted generalized translation: the Euclidean one with the normalized
/// Bessel factor J_{alpha-1/2}(x y sin theta) in the integrand. Bessel
/// accuracy errors (x y beyond the documented range) surface unchanged.
pub fn twisted_translate<F: Fn(f64) -> f64>(
    f: F,
    x: f64,
    y: f64,
    alpha: f64,
    tol: f64,
) -> Result<f64> {
    if !(alpha >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "twisted_translate needs alpha >= 0, got {alpha}"
        )));
    }
    let beta = alpha - 0.5;
    let c = wallis_constant(alpha);
    let rule = theta_rule();
    let mut acc = 0.0;
    for (&theta, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
        let d = theta_distance(x, y, theta);
        let kern = bessel_normalized(beta, (x * y * theta.sin()).abs(), tol)?.value;
        acc += w * f(d) * kern * theta.sin().powf(2.0 * alpha);
    }
    Ok(c * acc)
}

/// Twisted generalized convolution
/// f x g(x) = int_0^inf tau_x f(y) g(y) d mu_alpha(y),
/// outer integral on dyadic panels with the certified tail dropped.
pub fn twisted_convolve(
    f: &CertifiedFn<'_>,
    g: &CertifiedFn<'_>,
    x: f64,
    alpha: f64,
    tol: f64,
) -> Result<f64> {
    // |tau_x f| <= tau^E_x |f| <= sup|f| = f.decay.bound, so g's envelope
    // scaled by that bound certifies the outer tail.
    let joint = g.decay.scale(f.decay.bound);
    let grid = build_panel_grid(&joint, 2.0 * alpha + 1.0, tol)?;
    // Nodes whose certified contribution cannot reach the tolerance are
    // skipped, which also keeps the Bessel argument inside its sweet spot.
    let skip = tol * 1e-3 / grid.nodes.len().max(1) as f64;
    let mut acc = 0.0;
    for (&y, &w) in grid.nodes.iter().zip(grid.weights.iter()) {
        let gy = (g.f)(y);
        if (w * gy).abs() * f.decay.bound <= skip {
            continue;
        }
        acc += w * gy * twisted_translate(&*f.f, x, y, alpha, tol * 0.1)?;
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// g_lambda^* function
// ---------------------------------------------------------------------------

/// Dilation-invariant kernel K(y) = (1+y^2)^{-lambda} on (R_+, d mu_alpha).
#[derive(Debug, Clone)]
pub struct GLambdaKernel {
    pub alpha: f64,
    pub lambda: f64,
    /// integral of K d mu_alpha, finite iff lambda > alpha + 1.
    pub l1_mass: f64,
}

impl GLambdaKernel {
    pub fn new(alpha: f64, lambda: f64) -> Result<Self> {
        if !(alpha >= 0.0) {
            return Err(Error::InvalidParams(format!(
                "g_lambda kernel needs alpha >= 0, got {alpha}"
            )));
        }
        if !(lambda > alpha + 1.0) {
            return Err(Error::InvalidParams(format!(
                "K = (1+y^2)^(-lambda) is not in L^1(d mu_alpha) for lambda = {lambda} <= alpha + 1 = {}",
                alpha + 1.0
            )));
        }
        // mass on [0, U] by panels plus the closed-form algebraic tail
        let mut mass = 0.0;
        let rule = gauss_legendre_rule(32, 0.0, 1.0)?;
        let mut lo = 0.0f64;
        let mut hi = 1.0f64;
        let u_max = 2.0f64.powi(26);
        while lo < u_max {
            for (&u, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
                let y = lo + (hi - lo) * u;
                mass += w
                    * (hi - lo)
                    * (1.0 + y * y).powf(-lambda)
                    * y.powf(2.0 * alpha + 1.0);
            }
            lo = hi;
            hi *= 2.0;
        }
        let tail = u_max.powf(2.0 * alpha + 2.0 - 2.0 * lambda) / (2.0 * lambda - 2.0 * alpha - 2.0);
        Ok(GLambdaKernel {
            alpha,
            lambda,
            l1_mass: mass + tail,
        })
    }

    pub fn kernel(&self, y: f64) -> f64 {
        (1.0 + y * y).powf(-self.lambda)
    }
}

/// Integration grid for g_lambda^*.
#[derive(Debug, Clone)]
pub struct GStarGrid {
    /// Dyadic panels in t = |log r|, accumulating at r = 1.
    pub t_panels: usize,
    pub nodes_per_panel: usize,
    /// Tail tolerance of the dilation-variable integral.
    pub u_tol: f64,
    pub theta_nodes: usize,
}

impl Default for GStarGrid {
    fn default() -> Self {
        GStarGrid {
            t_panels: 14,
            nodes_per_panel: 16,
            u_tol: 1e-6,
            theta_nodes: 96,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct GStarValue {
    pub value: f64,
    /// Difference against a half-resolution pass.
    pub err_estimate: f64,
}

/// g_lambda^*(f)(x) for a finite psi expansion:
/// g^2(x) = int_0^1 K_{|log r|} * |d_1 u(., r)|^2 (x) |log r| dr/r,
/// evaluated in t = |log r| with the convolution written in the
/// dilation-normalized variable, so the kernel concentration at r -> 1
/// costs no resolution.
pub fn g_lambda_star(
    e: &Expansion,
    kern: &GLambdaKernel,
    x: f64,
    grid: &GStarGrid,
) -> Result<GStarValue> {
    if e.tag().family != Family::Psi {
        return Err(Error::InvalidParams(format!(
            "g_lambda_star acts on psi expansions, got {}",
            e.tag()
        )));
    }
    if (e.tag().alpha - kern.alpha).abs() > 1e-12 {
        return Err(Error::InvalidParams(
            "expansion and kernel carry different alpha".into(),
        ));
    }
    if e.coeff_norm() == 0.0 {
        return Ok(GStarValue {
            value: 0.0,
            err_estimate: 0.0,
        });
    }
    let full = g_star_pass(e, kern, x, grid)?;
    let coarse_grid = GStarGrid {
        t_panels: grid.t_panels,
        nodes_per_panel: (grid.nodes_per_panel / 2).max(4),
        u_tol: grid.u_tol * 10.0,
        theta_nodes: (grid.theta_nodes / 2).max(16),
    };
    let coarse = g_star_pass(e, kern, x, &coarse_grid)?;
    Ok(GStarValue {
        value: full,
        err_estimate: (full - coarse).abs(),
    })
}

fn g_star_pass(e: &Expansion, kern: &GLambdaKernel, x: f64, grid: &GStarGrid) -> Result<f64> {
    let alpha = kern.alpha;
    let sys = system(e.tag());
    let lambda0 = eigenvalue(alpha, 0);

    // sup_z |d_1 u(z, r)| <= D r^{lambda_0} with D from the basis envelopes.
    let d_bound: f64 = e
        .coeffs()
        .iter()
        .enumerate()
        .map(|(k, c)| eigenvalue(alpha, k) * c.norm() * sys.basis_decay(k).bound)
        .sum();

    // T such that the tail of t * mass * D^2 e^{-2 lambda_0 t} is negligible.
    let mut t_max = 1.0f64;
    let budget = 1e-9 * kern.l1_mass * d_bound * d_bound;
    while t_max < 64.0 {
        let tail = kern.l1_mass
            * d_bound
            * d_bound
            * (-2.0 * lambda0 * t_max).exp()
            * (t_max / (2.0 * lambda0) + 1.0 / (4.0 * lambda0 * lambda0));
        if tail <= budget.max(1e-300) {
            break;
        }
        t_max *= 2.0;
    }

    // U with the algebraic kernel tail below u_tol relative to the mass.
    let mut u_max = 4.0f64;
    while u_max < 2.0f64.powi(30) {
        let tail = u_max.powf(2.0 * alpha + 2.0 - 2.0 * kern.lambda)
            / (2.0 * kern.lambda - 2.0 * alpha - 2.0);
        if tail <= grid.u_tol * kern.l1_mass {
            break;
        }
        u_max *= 2.0;
    }

    let node_rule = gauss_legendre_rule(grid.nodes_per_panel, 0.0, 1.0)?;
    let theta = gauss_legendre_rule(grid.theta_nodes, 0.0, std::f64::consts::PI)?;
    let c_w = wallis_constant(alpha);
    let k_deg = e.degree();
    let mut basis = Vec::new();

    // h_t at a point z: |sum_k lambda_k c_k r^{lambda_k} psi_k(z)|^2, with the
    // r-dependent coefficient vector prepared per t node.
    let mut scaled: Vec<Complex64> = vec![Complex64::new(0.0, 0.0); k_deg + 1];

    // Dyadic t panels [t_max 2^{-j-1}, t_max 2^{-j}] plus the head [0, ...].
    let mut panels: Vec<(f64, f64)> = Vec::new();
    let mut hi = t_max;
    for _ in 0..grid.t_panels - 1 {
        panels.push((0.5 * hi, hi));
        hi *= 0.5;
    }
    panels.push((0.0, hi));

    let mut total = 0.0;
    for &(t_lo, t_hi) in &panels {
        for (&un, &uw) in node_rule.nodes.iter().zip(node_rule.weights.iter()) {
            let t = t_lo + (t_hi - t_lo) * un;
            if t <= 0.0 {
                continue;
            }
            let w_t = uw * (t_hi - t_lo) * t; // the |log r| dr/r factor in t
            for (k, c) in e.coeffs().iter().enumerate() {
                scaled[k] = c * (eigenvalue(alpha, k) * (-t)).exp() * eigenvalue(alpha, k);
            }
            let sqrt_t = t.sqrt();
            // K_t * h (x) = int K(u) u^{2a+1} tau^E_{sqrt(t) u} h(x) du
            let mut conv = 0.0;
            let mut lo = 0.0f64;
            let mut panel_hi = 1.0f64.min(u_max);
            loop {
                for (&vn, &vw) in node_rule.nodes.iter().zip(node_rule.weights.iter()) {
                    let u = lo + (panel_hi - lo) * vn;
                    let ku = kern.kernel(u) * u.powf(2.0 * alpha + 1.0);
                    if ku == 0.0 {
                        continue;
                    }
                    // tau^E_{sqrt(t) u} h (x)
                    let w_pt = sqrt_t * u;
                    let mut tr = 0.0;
                    for (&th, &tw) in theta.nodes.iter().zip(theta.weights.iter()) {
                        let z = theta_distance(w_pt, x, th);
                        sys.eval_into(k_deg, z, &mut basis);
                        let mut d1 = Complex64::new(0.0, 0.0);
                        for (c, &b) in scaled.iter().zip(basis.iter()) {
                            d1 += c * b;
                        }
                        tr += tw * d1.norm_sqr() * th.sin().powf(2.0 * alpha);
                    }
                    conv += vw * (panel_hi - lo) * ku * c_w * tr;
                }
                if panel_hi >= u_max {
                    break;
                }
                lo = panel_hi;
                panel_hi = (2.0 * panel_hi).min(u_max);
            }
            total += w_t * conv;
        }
    }
    Ok(total.max(0.0).sqrt())
}

// ---------------------------------------------------------------------------
// The homogeneous comparison kernel of the weighted transference step
// ---------------------------------------------------------------------------

/// theta-integral int_0^pi (x,y)_theta^{-(2 alpha + 2)} sin(theta)^{2 alpha} d theta,
/// with panels accumulating at theta = 0 where the integrand peaks for x ~ y.
pub fn lemma23_theta_integral(x: f64, y: f64, alpha: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidParams(
            "theta integral needs x, y > 0".into(),
        ));
    }
    if x == y {
        return Err(Error::Divergent(
            "theta integral diverges on the diagonal x = y".into(),
        ));
    }
    let peak = ((x - y).abs() / (x * y).sqrt()).max(1e-9);
    let depth = ((std::f64::consts::PI / peak).log2().ceil() as i32 + 14).clamp(16, 64);
    let rule = gauss_legendre_rule(24, 0.0, 1.0)?;
    let power = -(2.0 * alpha + 2.0);
    let mut acc = 0.0;
    let mut hi = std::f64::consts::PI;
    for _ in 0..depth {
        let lo = 0.5 * hi;
        for (&u, &w) in rule.nodes.iter().zip(rule.weights.iter()) {
            let theta = lo + (hi - lo) * u;
            acc += w
                * (hi - lo)
                * theta_distance(x, y, theta).powf(power)
                * theta.sin().powf(2.0 * alpha);
        }
        hi = lo;
    }
    // analytic head: (x,y)_theta ~ |x-y| for theta << peak scale
    let eps = hi;
    acc += eps.powf(2.0 * alpha + 1.0) / (2.0 * alpha + 1.0) * (x - y).abs().powf(power);
    Ok(acc)
}

/// Kernel of the weighted comparison lemma,
/// K(x,y) = |1 - (x/y)^{2 delta/p}| int_0^pi (x,y)_theta^{-(2a+2)} sin^{2a} theta d theta;
/// the prefactor vanishes on the diagonal, where the kernel is defined as 0.
pub fn lemma23_kernel(x: f64, y: f64, alpha: f64, delta: f64, p: f64) -> Result<f64> {
    if !(x > 0.0 && y > 0.0) {
        return Err(Error::InvalidParams("lemma23_kernel needs x, y > 0".into()));
    }
    if x == y {
        return Ok(0.0);
    }
    let prefactor = (1.0 - (x / y).powf(2.0 * delta / p)).abs();
    if prefactor == 0.0 {
        return Ok(0.0);
    }
    Ok(prefactor * lemma23_theta_integral(x, y, alpha)?)
}

// ---------------------------------------------------------------------------
// The multiplier kernel d_sM
// ---------------------------------------------------------------------------

/// d_sM(y, r) = Gamma(alpha+1) sum_k lambda_k^s m_k r^{lambda_k} L_k^alpha(y^2) e^{-y^2/2},
/// truncated with certified tail <= tol. Complex-valued for complex m.
pub fn ds_m(
    m: &dyn MultiplierSeq,
    s: f64,
    r: f64,
    y: f64,
    alpha: f64,
    tol: f64,
) -> Result<Complex64> {
    if !(s >= 0.0) {
        return Err(Error::InvalidParams(format!("ds_m needs s >= 0, got {s}")));
    }
    let k_max = series_truncation(alpha, s, r, m.sup_norm(), tol)?;
    let ln_r = r.ln();
    let value = damped_series(alpha, y, k_max, |k| {
        let lam = eigenvalue(alpha, k);
        m.value(k) * lam.powf(s) * (lam * ln_r).exp()
    });
    Ok(value * kernel_constant(alpha))
}

/// sup_y |d_sM(y, r)| (1-r)^{s+alpha+1} / (r^{2 alpha+2} sup|m|) over a y-grid;
/// the quantity the sup-norm kernel estimate declares bounded in r.
pub fn prop31_sup_ratio(
    m: &dyn MultiplierSeq,
    s: f64,
    r: f64,
    alpha: f64,
    y_hi: f64,
    n_grid: usize,
    tol: f64,
) -> Result<f64> {
    let mut sup = 0.0f64;
    for i in 0..=n_grid {
        let y = y_hi * i as f64 / n_grid as f64;
        sup = sup.max(ds_m(m, s, r, y, alpha, tol)?.norm());
    }
    Ok(sup * (1.0 - r).powf(s + alpha + 1.0) / (r.powf(2.0 * alpha + 2.0) * m.sup_norm()))
}

/// int |y^s d_sM(y,r)|^2 d mu_alpha (1-r)^{s+alpha+1} / (r^{4 alpha+4} ||m||_{2,s}^2);
/// the weighted-L^2 companion ratio.
pub fn prop31_weighted_ratio(
    m: &dyn MultiplierSeq,
    wbv_norm_value: f64,
    s: f64,
    r: f64,
    alpha: f64,
    tol: f64,
) -> Result<f64> {
    // |d_sM| <= c_alpha sup|m| sum lambda^s A_k r^{lambda_k} =: bound, decaying
    // like e^{-y^2/2}; scan the envelope for the integral cutoff.
    let cert = scan_envelope(
        |y| ds_m(m, s, r, y, alpha, tol).map(|v| v.norm()).unwrap_or(0.0),
        0.25,
        DecayPower::Gauss,
        12.0,
    );
    let w = 2.0 * s + 2.0 * alpha + 1.0;
    // the kernel carries modes up to the certified truncation; resolve them
    let k_eff = series_truncation(alpha, s, r, m.sup_norm(), tol)?;
    let osc = crate::quadrature::PanelOsc {
        kind: crate::quadrature::OscKind::LinearPhase,
        lambda: 4.0 * eigenvalue(alpha, k_eff),
    };
    let mut acc = 0.0;
    let grid = crate::quadrature::build_panel_grid_with(&cert.pow(2.0), w, tol, Some(osc))?;
    for (&y, &wt) in grid.nodes.iter().zip(grid.weights.iter()) {
        acc += wt * ds_m(m, s, r, y, alpha, tol)?.norm_sqr();
    }
    Ok(acc * (1.0 - r).powf(s + alpha + 1.0)
        / (r.powf(4.0 * alpha + 4.0) * wbv_norm_value * wbv_norm_value))
}
