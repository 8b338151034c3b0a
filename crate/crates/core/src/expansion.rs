//! Analysis and synthesis in the four systems, multiplier application,
//! transplantation, multiplier-space parameter arithmetic and the
//! projection-formula checker.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::{
    build_panel_grid_with, gauss_laguerre_rule, gauss_legendre_rule, weighted_norm_with, Decay,
    NormSpec, OscKind, PanelOsc,
};
use crate::sequences::MultiplierSeq;
use crate::special::{laguerre_poly, log_gamma};
use crate::systems::{system, Family, SystemTag};

/// A finite coefficient vector c_0..c_K in a tagged orthonormal system; the
/// artifact's canonical function representation. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct Expansion {
    tag: SystemTag,
    coeffs: Vec<Complex64>,
}

impl Expansion {
    pub fn new(tag: SystemTag, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidParams(
                "an expansion needs at least one coefficient".into(),
            ));
        }
        Ok(Expansion { tag, coeffs })
    }

    pub fn from_real(tag: SystemTag, coeffs: &[f64]) -> Result<Self> {
        Expansion::new(
            tag,
            coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect(),
        )
    }

    /// Unit coefficient vector e_k of length k_max+1.
    pub fn unit(tag: SystemTag, k: usize, k_max: usize) -> Result<Self> {
        if k > k_max {
            return Err(Error::InvalidParams(format!(
                "unit index {k} exceeds k_max {k_max}"
            )));
        }
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k_max + 1];
        coeffs[k] = Complex64::new(1.0, 0.0);
        Expansion::new(tag, coeffs)
    }

    pub fn tag(&self) -> SystemTag {
        self.tag
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Highest retained index K.
    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Euclidean norm of the coefficient vector; equals the L^2 norm of the
    /// synthesized function under the tag's measure, by orthonormality.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|c| c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Decay envelope of the synthesized function: sum of |c_k| times the
    /// per-basis envelopes (all same shape within a family).
    pub fn decay(&self) -> Decay {
        let sys = system(self.tag);
        let template = sys.basis_decay(0);
        let mut bound = 0.0;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm() > 0.0 {
                bound += c.norm() * sys.basis_decay(k).bound;
            }
        }
        Decay::new(bound.max(f64::MIN_POSITIVE), template.rate, template.power)
    }

    pub fn to_json(&self) -> String {
        let record = ExpansionRecord {
            family: self.tag.family,
            alpha: self.tag.alpha,
            coeffs: self.coeffs.iter().map(|c| [c.re, c.im]).collect(),
        };
        serde_json::to_string_pretty(&record).expect("expansion serialization")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: ExpansionRecord = serde_json::from_str(text)
            .map_err(|e| Error::Report(format!("bad expansion JSON: {e}")))?;
        let tag = SystemTag::new(record.family, record.alpha)?;
        Expansion::new(
            tag,
            record
                .coeffs
                .iter()
                .map(|c| Complex64::new(c[0], c[1]))
                .collect(),
        )
    }

    /// k,re,im rows.
    pub fn write_coeffs_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(out, "k,re,im")?;
        for (k, c) in self.coeffs.iter().enumerate() {
            writeln!(out, "{k},{:?},{:?}", c.re, c.im)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct ExpansionRecord {
    family: Family,
    alpha: f64,
    coeffs: Vec<[f64; 2]>,
}

/// Pointwise value sum_k c_k basis_k(x) with compensated summation.
pub fn synthesize(e: &Expansion, x: f64) -> Result<Complex64> {
    let sys = system(e.tag);
    sys.check_point(x)?;
    let mut basis = Vec::with_capacity(e.coeffs.len());
    sys.eval_into(e.degree(), x, &mut basis);
    let mut sum = Complex64::new(0.0, 0.0);
    let mut comp = Complex64::new(0.0, 0.0);
    for (c, &b) in e.coeffs.iter().zip(basis.iter()) {
        let y = c * b - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Coefficients a_k = <f, basis_k> under the tag's measure, each within tol.
///
/// The l system uses exact-class Gauss-Laguerre (node count ramped until two
/// successive rules agree below tol); the other systems go through the
/// composite dyadic-panel scheme with the joint decay certificate.
pub fn analyze<F: Fn(f64) -> Complex64>(
    f: F,
    cert: &Decay,
    tag: SystemTag,
    k_max: usize,
    tol: f64,
) -> Result<Expansion> {
    let sys = system(tag);
    match tag.family {
        Family::L => analyze_gauss_laguerre(&f, tag, k_max, tol),
        _ => {
            let worst = (0..=k_max)
                .map(|k| sys.basis_decay(k).bound)
                .fold(0.0, f64::max);
            let mut joint = cert.product(&sys.basis_decay(k_max));
            joint.bound = cert.bound * worst;
            let grid = build_panel_grid_with(
                &joint,
                sys.weight_exponent(),
                tol,
                Some(oscillation_hint(tag, k_max)),
            )?;
            let mut coeffs = vec![Complex64::new(0.0, 0.0); k_max + 1];
            let mut basis = Vec::new();
            for (&x, &w) in grid.nodes.iter().zip(grid.weights.iter()) {
                if sys.check_point(x).is_err() {
                    continue;
                }
                let fx = f(x) * w;
                sys.eval_into(k_max, x, &mut basis);
                for (c, &b) in coeffs.iter_mut().zip(basis.iter()) {
                    *c += fx * b;
                }
            }
            Expansion::new(tag, coeffs)
        }
    }
}

fn analyze_gauss_laguerre<F: Fn(f64) -> Complex64>(
    f: &F,
    tag: SystemTag,
    k_max: usize,
    tol: f64,
) -> Result<Expansion> {
    let sys = system(tag);
    let mut n = (k_max + 1).max(48);
    let mut prev: Option<Vec<Complex64>> = None;
    loop {
        let rule = gauss_laguerre_rule(n.min(512), tag.alpha)?;
        let mut coeffs = vec![Complex64::new(0.0, 0.0); k_max + 1];
        let mut basis = Vec::new();
        for (i, &x) in rule.nodes.iter().enumerate() {
            let fx = f(x) * rule.scaled_weights[i];
            sys.eval_into(k_max, x, &mut basis);
            for (c, &b) in coeffs.iter_mut().zip(basis.iter()) {
                *c += fx * b;
            }
        }
        if let Some(p) = prev {
            let diff = p
                .iter()
                .zip(coeffs.iter())
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            if diff <= tol || n >= 512 {
                if diff > tol {
                    return Err(Error::Quadrature(format!(
                        "analyze: Gauss-Laguerre coefficients still moving by {diff:.3e} at N = 512"
                    )));
                }
                return Expansion::new(tag, coeffs);
            }
        }
        prev = Some(coeffs);
        n += n / 2 + 16;
    }
}

/// Coefficient-wise product m_k c_k; tag unchanged.
pub fn apply_multiplier(m: &dyn MultiplierSeq, e: &Expansion) -> Expansion {
    let coeffs = e
        .coeffs
        .iter()
        .enumerate()
        .map(|(k, c)| m.value(k) * c)
        .collect();
    Expansion {
        tag: e.tag,
        coeffs,
    }
}

/// Transplantation T_beta^alpha on the script-l system: the coefficient
/// vector is carried over unchanged and retagged with the new parameter.
/// The operator's analytic content (norm behavior across p, delta) is what
/// the probe experiments measure.
pub fn transplant(e: &Expansion, alpha: f64) -> Result<Expansion> {
    if e.tag.family != Family::ScriptL {
        return Err(Error::InvalidParams(format!(
            "transplant acts on script-l expansions, got {}",
            e.tag
        )));
    }
    let tag = SystemTag::new(Family::ScriptL, alpha)?;
    Ok(Expansion {
        tag,
        coeffs: e.coeffs.clone(),
    })
}

/// Oscillation hint matching a family at truncation K: quadratic-argument
/// systems oscillate uniformly, the others with the sqrt-phase law; the
/// factor 4 covers squared quantities.
pub fn oscillation_hint(tag: SystemTag, k_max: usize) -> PanelOsc {
    let kind = match tag.family {
        Family::Phi | Family::Psi => OscKind::LinearPhase,
        Family::L | Family::ScriptL => OscKind::SqrtPhase,
    };
    PanelOsc {
        kind,
        lambda: 4.0 * crate::systems::eigenvalue(tag.alpha, k_max),
    }
}

/// Weighted norm of the synthesized function, using the expansion's own
/// decay certificate and oscillation-matched panels.
pub fn expansion_norm(e: &Expansion, spec: &NormSpec, tol: f64) -> Result<f64> {
    let cert = e.decay();
    weighted_norm_with(
        |x| synthesize(e, x).unwrap_or(Complex64::new(0.0, 0.0)),
        &cert,
        spec,
        tol,
        Some(oscillation_hint(e.tag(), e.degree())),
    )
}

// ---------------------------------------------------------------------------
// Multiplier-space parameter arithmetic
// ---------------------------------------------------------------------------

/// Parameters (alpha, p, gamma) of the multiplier space M^p_{alpha,gamma},
/// under the standing assumption -1 < gamma < p(alpha+1) - 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSpaceParams {
    pub alpha: f64,
    pub p: f64,
    pub gamma: f64,
}

impl MultiplierSpaceParams {
    pub fn new(alpha: f64, p: f64, gamma: f64) -> Result<Self> {
        let params = MultiplierSpaceParams { alpha, p, gamma };
        params.validate()?;
        Ok(params)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > -1.0) {
            return Err(Error::InvalidParams(format!(
                "multiplier space needs alpha > -1, got {}",
                self.alpha
            )));
        }
        if !(self.p > 1.0 && self.p.is_finite()) {
            return Err(Error::InvalidParams(format!(
                "multiplier space needs 1 < p < inf, got {}",
                self.p
            )));
        }
        if !(self.gamma > -1.0 && self.gamma < self.p * (self.alpha + 1.0) - 1.0) {
            return Err(Error::InvalidParams(format!(
                "standing assumption violated: need -1 < gamma < p(alpha+1)-1, got gamma = {} with alpha = {}, p = {}",
                self.gamma, self.alpha, self.p
            )));
        }
        Ok(())
    }

    pub fn p_conjugate(&self) -> f64 {
        self.p / (self.p - 1.0)
    }
}

/// Named parameter transforms and admissible-range tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SpaceRequest {
    /// M^p_{alpha,gamma} = M^{p'}_{alpha, alpha p' - gamma p'/p}.
    Dual,
    /// script-L multiplier space: gamma -> gamma + alpha p/2.
    ScriptShift,
    /// phi multiplier space: gamma -> gamma + alpha p/2 + p/4 - 1/2.
    PhiShift,
    /// Weight window of the wbv embedding theorem:
    /// (alpha+1) max(-p/2, -1) < gamma - alpha < (alpha+1) min(p/2, p-1), alpha >= 0.
    Thm11Range,
    /// Transplantation window with epsilon = min(alpha, beta):
    /// -1 < delta < p-1 when epsilon >= 0, widened/narrowed by epsilon p/2 otherwise.
    Thm41Range { beta: f64, delta: f64 },
    /// Unweighted-end window (2 alpha+2)/(alpha+2) < p < (2 alpha+2)/alpha.
    LepRange,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SpaceAnswer {
    Params(MultiplierSpaceParams),
    Membership(bool),
}

pub fn space_arithmetic(
    params: &MultiplierSpaceParams,
    request: &SpaceRequest,
) -> Result<SpaceAnswer> {
    params.validate()?;
    let (alpha, p, gamma) = (params.alpha, params.p, params.gamma);
    match *request {
        SpaceRequest::Dual => {
            let pc = params.p_conjugate();
            let gamma_d = alpha * pc - gamma * pc / p;
            Ok(SpaceAnswer::Params(MultiplierSpaceParams::new(
                alpha, pc, gamma_d,
            )?))
        }
        SpaceRequest::ScriptShift => Ok(SpaceAnswer::Params(MultiplierSpaceParams::new(
            alpha,
            p,
            gamma + alpha * p / 2.0,
        )?)),
        SpaceRequest::PhiShift => Ok(SpaceAnswer::Params(MultiplierSpaceParams::new(
            alpha,
            p,
            gamma + alpha * p / 2.0 + p / 4.0 - 0.5,
        )?)),
        SpaceRequest::Thm11Range => {
            let d = gamma - alpha;
            let lo = (alpha + 1.0) * (-p / 2.0).max(-1.0);
            let hi = (alpha + 1.0) * (p / 2.0).min(p - 1.0);
            Ok(SpaceAnswer::Membership(alpha >= 0.0 && lo < d && d < hi))
        }
        SpaceRequest::Thm41Range { beta, delta } => {
            if !(beta > -1.0) {
                return Err(Error::InvalidParams(format!(
                    "thm41-range needs beta > -1, got {beta}"
                )));
            }
            let eps = alpha.min(beta);
            let (lo, hi) = if eps >= 0.0 {
                (-1.0, p - 1.0)
            } else {
                (-1.0 - eps * p / 2.0, p - 1.0 + eps * p / 2.0)
            };
            Ok(SpaceAnswer::Membership(lo < delta && delta < hi))
        }
        SpaceRequest::LepRange => {
            if alpha < 0.0 {
                return Ok(SpaceAnswer::Membership(false));
            }
            let lo = (2.0 * alpha + 2.0) / (alpha + 2.0);
            let hi = if alpha == 0.0 {
                f64::INFINITY
            } else {
                (2.0 * alpha + 2.0) / alpha
            };
            Ok(SpaceAnswer::Membership(lo < p && p < hi))
        }
    }
}

// ---------------------------------------------------------------------------
// Projection formula
// ---------------------------------------------------------------------------

/// Both routes of the projection identity
/// L_k^{mu+nu}(x) = Gamma(k+mu+nu+1)/(Gamma(nu) Gamma(k+mu+1))
///                    int_0^1 y^mu (1-y)^{nu-1} L_k^mu(y x) dy.
#[derive(Debug, Clone, Copy)]
pub struct ProjectionCheck {
    /// Left side by the polynomial recurrence.
    pub lhs: f64,
    /// Right side by quadrature (endpoint singularities removed by
    /// substitution).
    pub rhs: f64,
}

pub fn projection_formula_check(k: usize, mu: f64, nu: f64, x: f64) -> Result<ProjectionCheck> {
    if !(mu > -1.0) {
        return Err(Error::InvalidParams(format!(
            "projection formula needs mu > -1, got {mu}"
        )));
    }
    if !(nu > 0.0) {
        return Err(Error::InvalidParams(format!(
            "projection formula needs nu > 0, got {nu}"
        )));
    }
    let lhs = laguerre_poly(k, mu + nu, x);

    // Split at 1/2 and handle each endpoint power in its own variable:
    // the left half carries y^mu, the right half (in t = 1-y) carries t^{nu-1}.
    let left = power_piece(mu, |t| (1.0 - t).powf(nu - 1.0) * laguerre_poly(k, mu, t * x))?;
    let right = power_piece(nu - 1.0, |t| {
        (1.0 - t).powf(mu) * laguerre_poly(k, mu, (1.0 - t) * x)
    })?;

    let front = (log_gamma(k as f64 + mu + nu + 1.0)? - log_gamma(nu)?
        - log_gamma(k as f64 + mu + 1.0)?)
    .exp();
    Ok(ProjectionCheck {
        lhs,
        rhs: front * (left + right),
    })
}

/// int_0^{1/2} t^a g(t) dt for a > -1 and g analytic on [0, 1/2].
///
/// Negative a is removed exactly by t = v^{1/(a+1)} (for a = nu - 1 this is
/// the y = 1 - u^{1/nu} endpoint substitution); fractional positive a gets
/// dyadic panels accumulating at 0; integer a is already polynomial-class.
fn power_piece<G: Fn(f64) -> f64>(a: f64, g: G) -> Result<f64> {
    let rule = gauss_legendre_rule(32, 0.0, 1.0)?;
    let apply = |lo: f64, hi: f64, h: &dyn Fn(f64) -> f64| -> f64 {
        let span = hi - lo;
        rule.nodes
            .iter()
            .zip(rule.weights.iter())
            .map(|(&u, &w)| w * span * h(lo + span * u))
            .sum()
    };
    if a < 0.0 {
        let q = 1.0 / (a + 1.0);
        let v_hi = 0.5f64.powf(a + 1.0);
        Ok(apply(0.0, v_hi, &|v: f64| g(v.powf(q))) / (a + 1.0))
    } else if a.fract() == 0.0 {
        Ok(apply(0.0, 0.5, &|t: f64| t.powi(a as i32) * g(t)))
    } else {
        let mut acc = 0.0;
        for j in 1..=48i32 {
            let hi = f64::powi(2.0, -j);
            acc += apply(0.5 * hi, hi, &|t: f64| t.powf(a) * g(t));
        }
        Ok(acc)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::DecayPower;
    use crate::sequences::{cesaro_seq, ConstantSeq, TableSeq};
    use crate::special::binom_a;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn tag(family: Family, alpha: f64) -> SystemTag {
        SystemTag::new(family, alpha).unwrap()
    }

    #[test]
    fn analyze_recovers_basis_functions() {
        // f = basis_3 must come back as the unit vector e_3 in every family.
        for family in [Family::L, Family::ScriptL, Family::Phi, Family::Psi] {
            let t = tag(family, 0.5);
            let sys = system(t);
            let cert = sys.basis_decay(3);
            let e = analyze(
                |x| Complex64::new(sys.eval(3, x).unwrap_or(0.0), 0.0),
                &cert,
                t,
                6,
                1e-10,
            )
            .unwrap();
            for (k, c) in e.coeffs().iter().enumerate() {
                let expect = if k == 3 { 1.0 } else { 0.0 };
                assert_abs_diff_eq!(c.re, expect, epsilon = 1e-8);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn analyze_exponential_examples() {
        // e^{-x/2} = l_0^0
        let t = tag(Family::L, 0.0);
        let cert = Decay::new(1.0, 0.25, DecayPower::Exp);
        let e = analyze(
            |x| Complex64::new((-0.5 * x).exp(), 0.0),
            &cert,
            t,
            4,
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(e.coeffs()[0].re, 1.0, epsilon = 1e-10);
        for k in 1..=4 {
            assert_abs_diff_eq!(e.coeffs()[k].re, 0.0, epsilon = 1e-10);
        }

        // x e^{-x/2} = (L_0 - L_1) e^{-x/2} -> coefficients (1, -1, 0, ...)
        let cert = Decay::new(1.5, 0.25, DecayPower::Exp);
        let e = analyze(
            |x| Complex64::new(x * (-0.5 * x).exp(), 0.0),
            &cert,
            t,
            4,
            1e-11,
        )
        .unwrap();
        assert_abs_diff_eq!(e.coeffs()[0].re, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e.coeffs()[1].re, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(e.coeffs()[2].re, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn synthesize_edge_cases() {
        let t = tag(Family::L, 0.0);
        let e0 = Expansion::unit(t, 0, 3).unwrap();
        assert_abs_diff_eq!(synthesize(&e0, 0.0).unwrap().re, 1.0, epsilon = 1e-14);
        let zero = Expansion::from_real(t, &[0.0, 0.0]).unwrap();
        assert_eq!(synthesize(&zero, 1.3).unwrap().norm(), 0.0);
    }

    #[test]
    fn analyze_synthesize_round_trip() {
        // fixed pseudo-random coefficients, K = 16
        let t = tag(Family::L, 1.0);
        let mut coeffs = Vec::new();
        let mut state = 0x9e3779b97f4a7c15u64;
        for _ in 0..17 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1);
            let u = (state >> 11) as f64 / (1u64 << 53) as f64;
            coeffs.push(Complex64::new(2.0 * u - 1.0, 0.5 - u * u));
        }
        let e = Expansion::new(t, coeffs).unwrap();
        let cert = e.decay();
        let back = analyze(|x| synthesize(&e, x).unwrap(), &cert, t, 16, 1e-10).unwrap();
        for (a, b) in e.coeffs().iter().zip(back.coeffs().iter()) {
            assert_abs_diff_eq!((a - b).norm(), 0.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn multiplier_application() {
        let t = tag(Family::L, 0.0);
        let e = Expansion::from_real(t, &[1.0, 1.0, 1.0]).unwrap();
        let same = apply_multiplier(&ConstantSeq { value: 1.0 }, &e);
        assert_eq!(same, e);

        let proj = apply_multiplier(&TableSeq::from_real(&[1.0]), &e);
        assert_eq!(proj.coeffs()[0].re, 1.0);
        assert_eq!(proj.coeffs()[1].norm(), 0.0);

        let ces = apply_multiplier(&cesaro_seq(2, 1.0).unwrap(), &e);
        assert_abs_diff_eq!(ces.coeffs()[0].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ces.coeffs()[1].re, 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ces.coeffs()[2].re, 1.0 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn transplant_is_coefficient_transfer() {
        let t = tag(Family::ScriptL, 2.0);
        let e = Expansion::from_real(t, &[0.3, -1.0, 0.7]).unwrap();
        let same = transplant(&e, 2.0).unwrap();
        assert_eq!(same.coeffs(), e.coeffs());
        let moved = transplant(&e, 0.0).unwrap();
        let back = transplant(&moved, 2.0).unwrap();
        assert_eq!(back.coeffs(), e.coeffs());
        assert_eq!(back.tag(), e.tag());

        let l_tagged = Expansion::from_real(tag(Family::L, 1.0), &[1.0]).unwrap();
        assert!(transplant(&l_tagged, 0.0).is_err());
    }

    #[test]
    fn transplant_parseval_ratio_is_one() {
        // p = 2, delta = 0: both systems are orthonormal in L^2(dx).
        let e_beta = Expansion::from_real(tag(Family::ScriptL, 2.0), &[0.5, -0.2, 0.9, 0.1])
            .unwrap();
        let e_alpha = transplant(&e_beta, 0.0).unwrap();
        let spec = NormSpec::plain(2.0, 0.0).unwrap();
        let na = expansion_norm(&e_alpha, &spec, 1e-10).unwrap();
        let nb = expansion_norm(&e_beta, &spec, 1e-10).unwrap();
        assert_relative_eq!(na / nb, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn space_arithmetic_dual() {
        let params = MultiplierSpaceParams::new(1.0, 2.0, 1.0).unwrap();
        match space_arithmetic(&params, &SpaceRequest::Dual).unwrap() {
            SpaceAnswer::Params(d) => {
                assert_abs_diff_eq!(d.p, 2.0);
                assert_abs_diff_eq!(d.gamma, 1.0);
                assert_abs_diff_eq!(d.alpha, 1.0);
            }
            _ => panic!("expected params"),
        }
        // duality is an involution
        let params = MultiplierSpaceParams::new(0.5, 3.0, 0.25).unwrap();
        let SpaceAnswer::Params(d) = space_arithmetic(&params, &SpaceRequest::Dual).unwrap()
        else {
            panic!()
        };
        let SpaceAnswer::Params(dd) = space_arithmetic(&d, &SpaceRequest::Dual).unwrap() else {
            panic!()
        };
        assert_abs_diff_eq!(dd.p, params.p, epsilon = 1e-14);
        assert_abs_diff_eq!(dd.gamma, params.gamma, epsilon = 1e-14);
    }

    #[test]
    fn space_arithmetic_shifts_and_ranges() {
        let params = MultiplierSpaceParams::new(2.0, 2.0, 0.0).unwrap();
        let SpaceAnswer::Params(s) =
            space_arithmetic(&params, &SpaceRequest::ScriptShift).unwrap()
        else {
            panic!()
        };
        assert_abs_diff_eq!(s.gamma, 2.0, epsilon = 1e-15);

        // Theorem 1.1 window at alpha = 0, p = 2 is -1 < gamma < 1.
        let params = MultiplierSpaceParams::new(0.0, 2.0, 0.0).unwrap();
        assert_eq!(
            space_arithmetic(&params, &SpaceRequest::Thm11Range).unwrap(),
            SpaceAnswer::Membership(true)
        );
        let params = MultiplierSpaceParams::new(0.0, 4.0, 1.5).unwrap();
        // gamma - alpha = 1.5 above (alpha+1) min(p/2, p-1) = 2? no: min(2,3)=2 -> inside
        assert_eq!(
            space_arithmetic(&params, &SpaceRequest::Thm11Range).unwrap(),
            SpaceAnswer::Membership(true)
        );

        let params = MultiplierSpaceParams::new(0.0, 2.0, 0.5).unwrap();
        let SpaceAnswer::Membership(inside) = space_arithmetic(
            &params,
            &SpaceRequest::Thm41Range {
                beta: -0.5,
                delta: 0.4,
            },
        )
        .unwrap() else {
            panic!()
        };
        // epsilon = -0.5: window is (-0.5, 0.5)
        assert!(inside);
        let SpaceAnswer::Membership(inside) = space_arithmetic(
            &params,
            &SpaceRequest::Thm41Range {
                beta: -0.5,
                delta: 0.6,
            },
        )
        .unwrap() else {
            panic!()
        };
        assert!(!inside);

        // lep window: alpha = 0 gives (1, inf); alpha = 2 gives (1.5, 3)
        let p0 = MultiplierSpaceParams::new(0.0, 7.0, 0.5).unwrap();
        assert_eq!(
            space_arithmetic(&p0, &SpaceRequest::LepRange).unwrap(),
            SpaceAnswer::Membership(true)
        );
        let p2 = MultiplierSpaceParams::new(2.0, 2.0, 1.0).unwrap();
        assert_eq!(
            space_arithmetic(&p2, &SpaceRequest::LepRange).unwrap(),
            SpaceAnswer::Membership(true)
        );
        let p2 = MultiplierSpaceParams::new(2.0, 4.0, 1.0).unwrap();
        assert_eq!(
            space_arithmetic(&p2, &SpaceRequest::LepRange).unwrap(),
            SpaceAnswer::Membership(false)
        );
    }

    #[test]
    fn phi_shift_matches_script_shift_plus_quarter() {
        let params = MultiplierSpaceParams::new(1.0, 2.0, 0.5).unwrap();
        let SpaceAnswer::Params(a) = space_arithmetic(&params, &SpaceRequest::ScriptShift).unwrap()
        else {
            panic!()
        };
        let SpaceAnswer::Params(b) = space_arithmetic(&params, &SpaceRequest::PhiShift).unwrap()
        else {
            panic!()
        };
        assert_abs_diff_eq!(b.gamma - a.gamma, params.p / 4.0 - 0.5, epsilon = 1e-15);
    }

    #[test]
    fn standing_assumption_enforced() {
        assert!(MultiplierSpaceParams::new(0.0, 2.0, 1.5).is_err());
        assert!(MultiplierSpaceParams::new(0.0, 2.0, -1.0).is_err());
        assert!(MultiplierSpaceParams::new(0.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn projection_formula_simple_cases() {
        // k=1, mu=0, nu=1, x=1: both sides are 1
        let c = projection_formula_check(1, 0.0, 1.0, 1.0).unwrap();
        assert_abs_diff_eq!(c.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rhs, 1.0, epsilon = 1e-10);

        // k=0: beta integral identity, both sides 1
        let c = projection_formula_check(0, 0.7, 2.3, 3.0).unwrap();
        assert_abs_diff_eq!(c.lhs, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(c.rhs, 1.0, epsilon = 1e-9);
    }

    #[test]
    fn projection_formula_at_origin() {
        // x = 0: lhs = A_k^{mu+nu}
        for &(mu, nu) in &[(0.0, 1.0), (1.0, 0.5), (-0.3, 2.0)] {
            for k in [1usize, 4, 9] {
                let c = projection_formula_check(k, mu, nu, 0.0).unwrap();
                assert_relative_eq!(c.lhs, binom_a(k, mu + nu), max_relative = 1e-12);
                assert_relative_eq!(c.rhs, c.lhs, max_relative = 1e-8);
            }
        }
    }

    #[test]
    fn expansion_json_round_trip() {
        let e = Expansion::new(
            tag(Family::Psi, 1.5),
            vec![Complex64::new(1.0, -2.0), Complex64::new(0.0, 0.25)],
        )
        .unwrap();
        let j = e.to_json();
        let back = Expansion::from_json(&j).unwrap();
        assert_eq!(back, e);

        let mut csv = Vec::new();
        e.write_coeffs_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("k,re,im\n"));
        assert_eq!(text.lines().count(), 3);
    }
}
