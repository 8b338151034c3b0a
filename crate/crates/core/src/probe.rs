//! Operator-norm lower-bound probes and the experiment harness.
//!
//! Estimates are honest lower bounds: each trial function f gives
//! ||T_m f|| / ||f|| <= ||T_m||, and the harness reports the max over a
//! seeded, reproducible trial stream. Search strategies are registered by
//! name and selected through the probe configuration.
//!
//! The trial stream is counter-based so every implementation of the
//! documented algorithm reproduces it exactly:
//!
//! ```text
//! raw(seed, counter) = finalize(seed + counter * 0x9E3779B97F4A7C15)   (wrapping)
//! finalize(z): z ^= z >> 30; z *= 0xBF58476D1CE4E5B9;
//!              z ^= z >> 27; z *= 0x94D049BB133111EB; z ^= z >> 31
//! uniform = (raw >> 11) * 2^-53                      in [0, 1)
//! coefficient draw = tan(pi (uniform - 1/2))         (symmetric Cauchy)
//! counter = level * 2^40 + trial * 2^20 + coefficient index
//! ```

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::error::{Error, Result};
use crate::expansion::MultiplierSpaceParams;
use crate::expansion::oscillation_hint;
use crate::quadrature::{build_panel_grid_with, Decay};
use crate::report::{ExperimentReport, ReportMeta};
use crate::sequences::{cesaro_seq, critical_index, wbv_norm, MultiplierSeq, SeqSpec, WbvSpec};
use crate::systems::{eigenvalue, system, Family, SystemTag};

// ---------------------------------------------------------------------------
// Counter-based generator
// ---------------------------------------------------------------------------

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// The documented counter-based mixing function.
pub fn mix64(seed: u64, counter: u64) -> u64 {
    let mut z = seed.wrapping_add(counter.wrapping_mul(GOLDEN));
    z ^= z >> 30;
    z = z.wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z ^= z >> 27;
    z = z.wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    z
}

/// Uniform in [0, 1) from the top 53 bits.
pub fn unit_uniform(bits: u64) -> f64 {
    (bits >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Symmetric heavy-tailed coefficient draw (Cauchy), clamped away from the
/// poles of the tangent.
fn cauchy_draw(u: f64) -> f64 {
    (std::f64::consts::PI * (u - 0.5)).tan().clamp(-1e12, 1e12)
}

fn trial_counter(level: usize, trial: usize, index: usize) -> u64 {
    (level as u64) << 40 | (trial as u64) << 20 | index as u64
}

// ---------------------------------------------------------------------------
// Probe configuration and strategy registry
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SearchKind {
    Random,
    CoordinateAscent,
    PowerIteration,
}

impl SearchKind {
    pub fn name(&self) -> &'static str {
        match self {
            SearchKind::Random => "random",
            SearchKind::CoordinateAscent => "coordinate-ascent",
            SearchKind::PowerIteration => "power-iteration",
        }
    }

    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "random" => Ok(SearchKind::Random),
            "coordinate-ascent" => Ok(SearchKind::CoordinateAscent),
            "power-iteration" => Ok(SearchKind::PowerIteration),
            other => Err(Error::InvalidParams(format!(
                "unknown search strategy '{other}'; expected random, coordinate-ascent or power-iteration"
            ))),
        }
    }
}

/// Deterministic probe configuration; the seed fully determines the trial
/// stream, including under parallel execution.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ProbeConfig {
    pub params: MultiplierSpaceParams,
    /// Truncation K of the test family f = sum_{k<=K} c_k l_k^alpha.
    pub trunc_k: usize,
    pub trials: usize,
    pub seed: u64,
    pub search: SearchKind,
    /// Quadrature tolerance of the norm grid.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Trials may run concurrently; the max-reduction is order-free.
    #[serde(default = "default_parallel")]
    pub parallel: bool,
}

fn default_tol() -> f64 {
    1e-9
}

fn default_parallel() -> bool {
    true
}

impl ProbeConfig {
    pub fn new(params: MultiplierSpaceParams, trunc_k: usize, trials: usize, seed: u64) -> Result<Self> {
        let cfg = ProbeConfig {
            params,
            trunc_k,
            trials,
            seed,
            search: SearchKind::CoordinateAscent,
            tol: default_tol(),
            parallel: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_search(mut self, search: SearchKind) -> Self {
        self.search = search;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.trunc_k < 4 {
            return Err(Error::InvalidParams(format!(
                "probe needs K >= 4, got {}",
                self.trunc_k
            )));
        }
        if self.trials == 0 {
            return Err(Error::InvalidParams("probe needs at least one trial".into()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Norm grid: quadrature nodes with cached basis values
// ---------------------------------------------------------------------------

/// Fixed quadrature nodes with the weight x^w folded in and all basis values
/// cached, so a norm evaluation is one pass over the nodes.
pub(crate) struct NormGrid {
    weights: Vec<f64>,
    /// basis[i * (k_max+1) + k] = basis_k(node_i)
    basis: Vec<f64>,
    k_max: usize,
    p: f64,
}

impl NormGrid {
    pub(crate) fn build(
        family: Family,
        alpha: f64,
        weight_exponent: f64,
        p: f64,
        k_max: usize,
        tol: f64,
    ) -> Result<Self> {
        let sys = system(SystemTag::new(family, alpha)?);
        let worst = (0..=k_max)
            .map(|k| sys.basis_decay(k).bound)
            .fold(0.0f64, f64::max);
        let template = sys.basis_decay(k_max);
        let cert = Decay::new(worst * (k_max + 1) as f64, template.rate, template.power)
            .with_offset(template.offset)
            .pow(p);
        let osc = oscillation_hint(SystemTag::new(family, alpha)?, k_max);
        let grid = build_panel_grid_with(&cert, weight_exponent, tol, Some(osc))?;
        let mut basis = Vec::with_capacity(grid.nodes.len() * (k_max + 1));
        let mut weights = Vec::with_capacity(grid.nodes.len());
        let mut buf = Vec::new();
        for (&x, &w) in grid.nodes.iter().zip(grid.weights.iter()) {
            if sys.check_point(x).is_err() {
                continue;
            }
            sys.eval_into(k_max, x, &mut buf);
            basis.extend_from_slice(&buf);
            weights.push(w);
        }
        Ok(NormGrid {
            weights,
            basis,
            k_max,
            p,
        })
    }

    fn n_nodes(&self) -> usize {
        self.weights.len()
    }

    /// Synthesized values at all nodes for the leading `len` coefficients.
    fn values_into(&self, coeffs: &[Complex64], len: usize, out: &mut Vec<Complex64>) {
        let stride = self.k_max + 1;
        out.clear();
        out.resize(self.n_nodes(), Complex64::new(0.0, 0.0));
        for (i, slot) in out.iter_mut().enumerate() {
            let row = &self.basis[i * stride..i * stride + len];
            let mut acc = Complex64::new(0.0, 0.0);
            for (c, &b) in coeffs[..len].iter().zip(row.iter()) {
                acc += c * b;
            }
            *slot = acc;
        }
    }

    fn norm_of_values(&self, values: &[Complex64]) -> f64 {
        let mut acc = 0.0;
        for (&w, v) in self.weights.iter().zip(values.iter()) {
            acc += w * v.norm_sqr().powf(0.5 * self.p);
        }
        acc.max(0.0).powf(1.0 / self.p)
    }

    pub(crate) fn norm(&self, coeffs: &[Complex64]) -> f64 {
        let mut values = Vec::new();
        self.values_into(coeffs, coeffs.len().min(self.k_max + 1), &mut values);
        self.norm_of_values(&values)
    }

    fn column(&self, k: usize, i: usize) -> f64 {
        self.basis[i * (self.k_max + 1) + k]
    }
}

// ---------------------------------------------------------------------------
// The probe proper
// ---------------------------------------------------------------------------

struct ProbeContext {
    grid: NormGrid,
    multiplier: Vec<Complex64>,
    alpha: f64,
}

impl ProbeContext {
    fn build(m: &dyn MultiplierSeq, cfg: &ProbeConfig) -> Result<Self> {
        let p = cfg.params.p;
        let grid = NormGrid::build(
            Family::L,
            cfg.params.alpha,
            cfg.params.gamma,
            p,
            cfg.trunc_k,
            cfg.tol,
        )?;
        let multiplier = (0..=cfg.trunc_k).map(|k| m.value(k)).collect();
        Ok(ProbeContext {
            grid,
            multiplier,
            alpha: cfg.params.alpha,
        })
    }

    /// ||T_m f|| / ||f|| for f with the given (real) coefficients.
    fn ratio(&self, coeffs: &[f64]) -> f64 {
        let len = coeffs.len();
        let cf: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let ct: Vec<Complex64> = coeffs
            .iter()
            .zip(self.multiplier.iter())
            .map(|(&c, m)| m * c)
            .collect();
        let mut vf = Vec::new();
        let mut vt = Vec::new();
        self.grid.values_into(&cf, len, &mut vf);
        self.grid.values_into(&ct, len, &mut vt);
        let nf = self.grid.norm_of_values(&vf);
        if nf <= 0.0 || !nf.is_finite() {
            return 0.0;
        }
        self.grid.norm_of_values(&vt) / nf
    }

    /// Coordinate-ascent refinement: two sweeps of axis perturbations with
    /// incremental value updates; returns the best ratio found.
    fn ascend(&self, coeffs: &mut Vec<f64>, start_ratio: f64) -> f64 {
        let len = coeffs.len();
        let mut vf = Vec::new();
        let mut vt = Vec::new();
        let cf: Vec<Complex64> = coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect();
        let ct: Vec<Complex64> = coeffs
            .iter()
            .zip(self.multiplier.iter())
            .map(|(&c, m)| m * c)
            .collect();
        self.grid.values_into(&cf, len, &mut vf);
        self.grid.values_into(&ct, len, &mut vt);
        let mut best = start_ratio;
        let rms = (coeffs.iter().map(|c| c * c).sum::<f64>() / len as f64).sqrt();
        let mut trial_f = vf.clone();
        let mut trial_t = vt.clone();
        for _sweep in 0..2 {
            for k in 0..len {
                let step = 0.5 * (coeffs[k].abs() + 0.1 * rms + 1e-12);
                for dir in [1.0f64, -1.0] {
                    let delta = dir * step;
                    for i in 0..trial_f.len() {
                        let b = self.grid.column(k, i);
                        trial_f[i] = vf[i] + delta * b;
                        trial_t[i] = vt[i] + self.multiplier[k] * delta * b;
                    }
                    let nf = self.grid.norm_of_values(&trial_f);
                    if nf > 0.0 && nf.is_finite() {
                        let r = self.grid.norm_of_values(&trial_t) / nf;
                        if r > best {
                            best = r;
                            coeffs[k] += delta;
                            vf.copy_from_slice(&trial_f);
                            vt.copy_from_slice(&trial_t);
                            break;
                        }
                    }
                }
            }
        }
        best
    }

    /// Structured starts: unit vectors, an alternating vector, and
    /// concentration vectors c_k = l_k^alpha(x0) that imitate the
    /// reproducing kernel at x0. The x0 grid reaches down to the 1/lambda
    /// scale near the origin, where the coefficient functionals of the
    /// truncated expansions are extremal for p far from 2. All deterministic.
    fn structured_candidates(&self, len: usize) -> Vec<Vec<f64>> {
        let mut out = Vec::new();
        for k in 0..len {
            let mut e = vec![0.0; len];
            e[k] = 1.0;
            out.push(e);
        }
        out.push((0..len).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect());
        let sys = system(SystemTag::new(Family::L, self.alpha).expect("valid alpha"));
        let lam = eigenvalue(self.alpha, len - 1);
        let mut buf = Vec::new();
        for x0 in [
            0.25 / lam,
            0.5 / lam,
            1.0 / lam,
            2.0 / lam,
            4.0 / lam,
            8.0 / lam,
            16.0 / lam,
            32.0 / lam,
            0.02 * lam,
            0.25 * lam,
            0.5 * lam,
            0.85 * lam,
        ] {
            sys.eval_into(len - 1, x0, &mut buf);
            out.push(buf.clone());
        }
        out
    }
}

/// Lower bound for the multiplier norm ||T_m||_{M^p_{alpha,gamma}} over the
/// truncated test family, by the configured search strategy.
///
/// The search runs at every dyadic truncation level up to K and at K itself,
/// each level with its own counter namespace, and takes the overall max, so
/// estimates are non-decreasing in K along dyadic truncations.
pub fn operator_norm_lower_bound(m: &dyn MultiplierSeq, cfg: &ProbeConfig) -> Result<f64> {
    cfg.validate()?;
    if cfg.search == SearchKind::PowerIteration {
        // Diagonal short-circuit: at p = 2, gamma = alpha, Parseval makes the
        // operator diagonal and the norm is sup_k |m_k| over the window.
        if (cfg.params.p - 2.0).abs() > 1e-12 || (cfg.params.gamma - cfg.params.alpha).abs() > 1e-12
        {
            return Err(Error::InvalidParams(
                "power-iteration search applies only to p = 2, gamma = alpha".into(),
            ));
        }
        let sup = (0..=cfg.trunc_k)
            .map(|k| m.value(k).norm())
            .fold(0.0f64, f64::max);
        return Ok(sup);
    }

    let ctx = ProbeContext::build(m, cfg)?;
    let mut levels: Vec<usize> = Vec::new();
    let mut l = 4usize;
    while l < cfg.trunc_k {
        levels.push(l);
        l *= 2;
    }
    levels.push(cfg.trunc_k);

    let mut best: f64 = 0.0;
    for &level in &levels {
        let len = level + 1;
        // structured candidates first (trial indices below cfg.trials are
        // random; the structured battery is seed-independent)
        let structured = ctx.structured_candidates(len);
        let struct_best = structured
            .iter()
            .map(|c| ctx.ratio(c))
            .fold(0.0f64, f64::max);
        best = best.max(struct_best);
        if cfg.search == SearchKind::CoordinateAscent {
            // ascend from the three best structured starts
            let mut ranked: Vec<(f64, Vec<f64>)> = structured
                .into_iter()
                .map(|c| (ctx.ratio(&c), c))
                .collect();
            ranked.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
            for (r0, mut c) in ranked.into_iter().take(3) {
                best = best.max(ctx.ascend(&mut c, r0));
            }
        }

        let run_trial = |trial: usize| -> f64 {
            let mut coeffs: Vec<f64> = (0..len)
                .map(|k| {
                    let u = unit_uniform(mix64(cfg.seed, trial_counter(level, trial, k)));
                    cauchy_draw(u)
                })
                .collect();
            let r = ctx.ratio(&coeffs);
            match cfg.search {
                SearchKind::Random => r,
                SearchKind::CoordinateAscent => ctx.ascend(&mut coeffs, r),
                SearchKind::PowerIteration => unreachable!(),
            }
        };
        let level_best = if cfg.parallel {
            (0..cfg.trials)
                .into_par_iter()
                .map(run_trial)
                .reduce(|| 0.0, f64::max)
        } else {
            (0..cfg.trials).map(run_trial).fold(0.0, f64::max)
        };
        best = best.max(level_best);
    }
    Ok(best)
}

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

/// Least-squares slope of ln(y) against ln(x); returns (slope, residual rms).
fn loglog_slope(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    if points.len() < 2 {
        return (0.0, 0.0);
    }
    let xs: Vec<f64> = points.iter().map(|(x, _)| x.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|(_, y)| y.max(1e-300).ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let res = (xs
        .iter()
        .zip(ys.iter())
        .map(|(x, y)| {
            let e = y - (intercept + slope * x);
            e * e
        })
        .sum::<f64>()
        / n)
        .sqrt();
    (slope, res)
}

/// Fitted slope below this counts as a plateau (bounded trend).
pub const PLATEAU_SLOPE_TOL: f64 = 0.05;
/// Transplantation ratios whose log-log slope across K stays below this are
/// flagged as bounded.
pub const BOUNDED_TREND_SLOPE_TOL: f64 = 0.1;

/// Growth of the Cesaro multiplier norm lower bound across n, fitted on a
/// log-log scale against the predicted exponent s_c(p) - nu - 1/2.
pub fn cesaro_growth_experiment(
    alpha: f64,
    p: f64,
    nu: f64,
    n_list: &[usize],
    cfg: &ProbeConfig,
) -> Result<ExperimentReport> {
    if n_list.is_empty() {
        return Err(Error::InvalidParams("cesaro-growth needs a nonempty n list".into()));
    }
    let params = MultiplierSpaceParams::new(alpha, p, alpha)?;
    let sc = critical_index(alpha, p)?;
    let mut report = ExperimentReport::new(
        "cesaro-growth",
        &["n", "estimate"],
        ReportMeta::new(cfg.seed, cfg.trunc_k, cfg.trials, cfg.tol),
    );
    report.set_param("alpha", alpha);
    report.set_param("p", p);
    report.set_param("nu", nu);
    report.set_param("search", cfg.search.name());
    report.set_param("predicted_exponent", sc - nu - 0.5);
    report.set_param("growth_branch", nu + 0.5 < sc);

    let mut points = Vec::new();
    for &n in n_list {
        let m = cesaro_seq(n, nu)?;
        let row_cfg = ProbeConfig {
            params,
            trunc_k: cfg.trunc_k.max(4 * n + 8),
            ..*cfg
        };
        let est = operator_norm_lower_bound(&m, &row_cfg)?;
        points.push((n as f64 + 1.0, est));
        report.push_row(vec![json!(n), json!(est)]);
    }
    if points.len() > 1 {
        let (slope, residual) = loglog_slope(&points);
        report.set_diag("slope", slope);
        report.set_diag("fit_residual", residual);
        report.set_diag("plateau", slope < PLATEAU_SLOPE_TOL);
    }
    Ok(report)
}

/// Max transplantation ratios ||sum b_k L_k^alpha|| / ||sum b_k L_k^beta||
/// over seeded heavy-tailed trials, across truncations K.
pub fn transplantation_experiment(
    alpha: f64,
    beta: f64,
    p: f64,
    delta: f64,
    k_list: &[usize],
    cfg: &ProbeConfig,
) -> Result<ExperimentReport> {
    if k_list.is_empty() {
        return Err(Error::InvalidParams("transplant needs a nonempty K list".into()));
    }
    if !(delta > -1.0) {
        return Err(Error::InvalidParams(format!(
            "transplant needs delta > -1, got {delta}"
        )));
    }
    let eps = alpha.min(beta);
    let in_window = if eps >= 0.0 {
        -1.0 < delta && delta < p - 1.0
    } else {
        -1.0 - eps * p / 2.0 < delta && delta < p - 1.0 + eps * p / 2.0
    };

    let mut report = ExperimentReport::new(
        "transplant",
        &["K", "max_ratio"],
        ReportMeta::new(cfg.seed, cfg.trunc_k, cfg.trials, cfg.tol),
    );
    report.set_param("alpha", alpha);
    report.set_param("beta", beta);
    report.set_param("p", p);
    report.set_param("delta", delta);
    report.set_param("in_admissible_window", in_window);

    let k_max = *k_list.iter().max().unwrap();
    let grid_a = NormGrid::build(Family::ScriptL, alpha, delta, p, k_max, cfg.tol)?;
    let grid_b = NormGrid::build(Family::ScriptL, beta, delta, p, k_max, cfg.tol)?;

    let mut points = Vec::new();
    for &k in k_list {
        let len = k + 1;
        let run_trial = |trial: usize| -> f64 {
            let coeffs: Vec<Complex64> = (0..len)
                .map(|j| {
                    let u = unit_uniform(mix64(cfg.seed, trial_counter(k, trial, j)));
                    Complex64::new(cauchy_draw(u), 0.0)
                })
                .collect();
            let nb = grid_b.norm(&coeffs);
            if nb <= 0.0 || !nb.is_finite() {
                return 0.0;
            }
            grid_a.norm(&coeffs) / nb
        };
        let max_ratio = if cfg.parallel {
            (0..cfg.trials)
                .into_par_iter()
                .map(run_trial)
                .reduce(|| 0.0, f64::max)
        } else {
            (0..cfg.trials).map(run_trial).fold(0.0, f64::max)
        };
        points.push((k as f64, max_ratio));
        report.push_row(vec![json!(k), json!(max_ratio)]);
    }
    if points.len() > 1 {
        let (slope, residual) = loglog_slope(&points);
        report.set_diag("slope", slope);
        report.set_diag("fit_residual", residual);
        report.set_diag("bounded_trend", slope <= BOUNDED_TREND_SLOPE_TOL);
    }
    Ok(report)
}

/// Ratio of the operator-norm lower bound to the wbv_{2,s} norm over a
/// battery of sequences; the embedding theorem predicts a uniform constant.
pub fn embedding_experiment(
    battery: &[(String, SeqSpec)],
    alpha: f64,
    p: f64,
    gamma: f64,
    s: f64,
    cfg: &ProbeConfig,
) -> Result<ExperimentReport> {
    let params = MultiplierSpaceParams::new(alpha, p, gamma)?;
    let mut report = ExperimentReport::new(
        "embedding",
        &["label", "op_norm_lb", "wbv_norm", "ratio"],
        ReportMeta::new(cfg.seed, cfg.trunc_k, cfg.trials, cfg.tol),
    );
    report.set_param("alpha", alpha);
    report.set_param("p", p);
    report.set_param("gamma", gamma);
    report.set_param("s", s);
    let wspec = WbvSpec::new(2.0, s)?.with_n_max(512);
    let mut max_ratio: f64 = 0.0;
    for (label, spec) in battery {
        let m = spec.build()?;
        let run_cfg = ProbeConfig { params, ..*cfg };
        let lb = operator_norm_lower_bound(m.as_ref(), &run_cfg)?;
        let wb = wbv_norm(m.as_ref(), &wspec)?.norm;
        let ratio = if wb > 0.0 { lb / wb } else { f64::INFINITY };
        max_ratio = max_ratio.max(ratio);
        report.push_row(vec![json!(label), json!(lb), json!(wb), json!(ratio)]);
    }
    report.set_diag("max_ratio", max_ratio);
    Ok(report)
}

/// CSV-ready sweep of the kernel-estimate ratios of the multiplier kernel
/// d_sM over an r-grid (sup ratio and the weighted-L^2 companion).
pub fn kernel_ratio_experiment(
    seq: &SeqSpec,
    alpha: f64,
    s: f64,
    r_list: &[f64],
    tol: f64,
) -> Result<ExperimentReport> {
    let m = seq.build()?;
    let wspec = WbvSpec::new(2.0, s)?.with_n_max(512);
    let wb = wbv_norm(m.as_ref(), &wspec)?.norm;
    let mut report = ExperimentReport::new(
        "kernel-ratios",
        &["r", "sup_ratio", "weighted_ratio"],
        ReportMeta::new(0, 0, 0, tol),
    );
    report.set_param("alpha", alpha);
    report.set_param("s", s);
    report.set_param("seq", serde_json::to_value(seq).unwrap());
    report.set_param("wbv_norm", wb);
    let mut sup_max: f64 = 0.0;
    let mut weighted_max: f64 = 0.0;
    for &r in r_list {
        let sup = crate::semigroup::prop31_sup_ratio(m.as_ref(), s, r, alpha, 8.0, 512, tol)?;
        let weighted = crate::semigroup::prop31_weighted_ratio(m.as_ref(), wb, s, r, alpha, tol)?;
        sup_max = sup_max.max(sup);
        weighted_max = weighted_max.max(weighted);
        report.push_row(vec![json!(r), json!(sup), json!(weighted)]);
    }
    report.set_diag("sup_ratio_max", sup_max);
    report.set_diag("weighted_ratio_max", weighted_max);
    Ok(report)
}
