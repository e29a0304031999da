//! The spectral family
//!
//! ```text
//! φ_δ(ξ) = (P(ξ) + f_δ(ξ)) e^{−|ξ|^{2m}},   f_δ(ξ) = |ξ|^{m+2} sin(|ξ|^{−m}) e^{−δ/|ξ|²},
//! P(ξ)   = Σ_{|γ| ≤ m} M_γ (−iξ)^γ / γ!
//! ```
//!
//! For `δ > 0` each `φ_δ` is a Schwartz function whose inverse transform is a
//! measure with moments `M` up to order `m`, and
//! `d_m(μ_{δ₁}, μ_{δ₂}) ≤ |δ₁ − δ₂|`. The members `μ_j = μ_{δ = 1/j}` are
//! therefore Cauchy, but their pointwise limit `φ_0` is not twice
//! differentiable at the origin, so no measure with finite `m`-th moments has
//! it as its transform.
//!
//! Only `δ > 0` members can become measures: [`PhiDeltaFamily::make_measure`]
//! refuses `δ = 0`, and the spectral source it builds is not constructible any
//! other way.

use std::sync::Arc;

use crate::fourier::{
    default_step, derivative_at_zero_refined, inverse_ft_grid, neg_i_pow, taylor_polynomial,
    InverseFtOptions,
};
use crate::measure::{ComplexMeasure, GridDensity, GridSpec, MomentSpec, SpectralMeasure, SpectralSource};
use crate::metric::{directions, dm, DmOptions, MetricEstimate};
use crate::multiindex::{check_dim, MultiIndex};
use crate::{Error, Result, C64};

fn norm(xi: &[f64]) -> f64 {
    xi.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// `P(ξ) = Σ_{|γ| ≤ order(M)} M_γ (−iξ)^γ / γ!`.
pub fn p_eval(moments: &MomentSpec, xi: &[f64]) -> Result<C64> {
    taylor_polynomial(moments, xi, moments.order())
}

/// `f_δ(ξ) = |ξ|^{m+2} sin(|ξ|^{−m}) e^{−δ/|ξ|²}`, `f_δ(0) = 0`.
///
/// The damping factor is evaluated first; once the amplitude underflows to 0
/// the oscillating factor is never touched.
pub fn f_delta_eval(delta: f64, m: u32, xi: &[f64]) -> f64 {
    let r = norm(xi);
    if r == 0.0 {
        return 0.0;
    }
    let damping = (-delta / (r * r)).exp();
    if damping == 0.0 {
        return 0.0;
    }
    let amplitude = r.powi(m as i32 + 2) * damping;
    if amplitude == 0.0 {
        return 0.0;
    }
    amplitude * (1.0 / r.powi(m as i32)).sin()
}

/// One member `φ_δ` of the family, `δ ≥ 0`. The order `m` is the order of
/// the moment spec.
#[derive(Clone, Debug, PartialEq)]
pub struct PhiDeltaFamily {
    moments: MomentSpec,
    delta: f64,
}

impl PhiDeltaFamily {
    pub fn new(moments: MomentSpec, delta: f64) -> Result<Self> {
        if moments.order() < 2 {
            return Err(Error::InvalidParameter(format!(
                "m must be ≥ 2, got {}",
                moments.order()
            )));
        }
        if !(delta >= 0.0 && delta.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "delta must be finite and ≥ 0, got {delta}"
            )));
        }
        Ok(Self { moments, delta })
    }

    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.moments.clone(), delta)
    }

    pub fn dim(&self) -> usize {
        self.moments.dim()
    }

    pub fn m(&self) -> u32 {
        self.moments.order()
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn moments(&self) -> &MomentSpec {
        &self.moments
    }

    pub fn eval(&self, xi: &[f64]) -> C64 {
        let r = norm(xi);
        let p = p_eval(&self.moments, xi).expect("dimension checked by caller");
        if r == 0.0 {
            return p;
        }
        let envelope = (-r.powi(2 * self.m() as i32)).exp();
        (p + f_delta_eval(self.delta, self.m(), xi)) * envelope
    }

    /// `φ_δ(ξ) − P_{≤ order}(ξ)` written as
    /// `P·expm1(−|ξ|^{2m}) + (P − P_{≤ order}) + f_δ e^{−|ξ|^{2m}}`, which
    /// avoids subtracting two nearly equal numbers near the origin.
    fn remainder(&self, xi: &[f64], order: u32) -> C64 {
        let r = norm(xi);
        if r == 0.0 {
            return C64::new(0.0, 0.0);
        }
        let r2m = r.powi(2 * self.m() as i32);
        let mut p = C64::new(0.0, 0.0);
        let mut high = C64::new(0.0, 0.0);
        for (beta, mb) in self.moments.iter() {
            let term = neg_i_pow(beta.order()) * mb * beta.monomial_unchecked(xi)
                / beta.factorial().expect("orders are small") as f64;
            p += term;
            if beta.order() > order {
                high += term;
            }
        }
        p * (-r2m).exp_m1() + high + f_delta_eval(self.delta, self.m(), xi) * (-r2m).exp()
    }

    /// Frequency radius beyond which the envelope
    /// `(|P|_max(R) + R^{m+2}) e^{−R^{2m}}` stays below `1e−16` of its peak.
    pub fn truncation_radius(&self) -> f64 {
        let m = self.m() as i32;
        let coeffs: Vec<(u32, f64)> = self
            .moments
            .iter()
            .map(|(b, v)| (b.order(), v.norm() / b.factorial().unwrap_or(1) as f64))
            .collect();
        let envelope = |r: f64| -> f64 {
            let pb: f64 = coeffs.iter().map(|&(k, c)| c * r.powi(k as i32)).sum();
            (pb + r.powi(m + 2)) * (-r.powi(2 * m)).exp()
        };
        let step = 1e-3;
        let mut peak: f64 = 0.0;
        let mut r = 0.0;
        while r <= 4.0 {
            peak = peak.max(envelope(r));
            r += step;
        }
        let mut r = step;
        let mut last_above = 0.0;
        while r <= 8.0 {
            if envelope(r) > 1e-16 * peak {
                last_above = r;
            }
            r += step;
        }
        last_above + step
    }

    /// Spatial window for the inverse transform: oversampled Nyquist spacing
    /// for the truncation radius, half-width covering where the oscillation of
    /// `f_δ` still carries amplitude above `1e−10`, capped per dimension.
    pub fn default_window(&self) -> Result<GridSpec> {
        let cutoff = self.truncation_radius();
        let m = self.m() as i32;
        // Smallest radius where |ξ|^{m+2} e^{−δ/|ξ|²} reaches 1e−10.
        let mut rc = 1.0;
        let mut r: f64 = 1.0;
        while r > 1e-3 {
            if r.powi(m + 2) * (-self.delta / (r * r)).exp() < 1e-10 {
                break;
            }
            rc = r;
            r *= 0.98;
        }
        let content = self.m() as f64 / rc.powi(m + 1);
        let cap = match self.dim() {
            1 => 1024.0,
            2 => 64.0,
            _ => 16.0,
        };
        let half_width = (1.25 * content).clamp(32.0, cap);
        GridSpec::symmetric(self.dim(), half_width, std::f64::consts::PI / (2.0 * cutoff))
    }

    /// `φ̌_δ` sampled on `grid`.
    pub fn realize(&self, grid: &GridSpec) -> Result<GridDensity> {
        check_dim(self.dim(), grid.dim())?;
        if self.delta == 0.0 {
            return Err(Error::SingularFamily);
        }
        inverse_ft_grid(|xi| self.eval(xi), grid, InverseFtOptions::new(self.truncation_radius()))
    }

    /// The measure `μ_{1/δ}` with transform `φ_δ`, declared moments `M` and a
    /// total-variation bound `max(‖φ̌_δ‖₁ by quadrature, max |φ_δ| sampled)`.
    /// The second term is a rigorous lower bound on `|μ|(ℝ^d)` and keeps the
    /// far-field tail bound sound whatever the quadrature misses.
    pub fn make_measure(&self) -> Result<ComplexMeasure> {
        if self.delta == 0.0 {
            return Err(Error::SingularFamily);
        }
        let window = self.default_window()?;
        let quadrature = self.realize(&window)?.total_variation();
        let cutoff = self.truncation_radius();
        let mut peak: f64 = self.moments.get(&MultiIndex::zero(self.dim())).unwrap().norm();
        for u in directions(self.dim(), 16) {
            for k in 1..=2048 {
                let r = cutoff * k as f64 / 2048.0;
                let xi: Vec<f64> = u.iter().map(|c| c * r).collect();
                peak = peak.max(self.eval(&xi).norm());
            }
        }
        let source = PhiDeltaSource { fam: self.clone() };
        Ok(SpectralMeasure::new(Arc::new(source), quadrature.max(peak))?.into())
    }
}

#[derive(Debug)]
struct PhiDeltaSource {
    fam: PhiDeltaFamily,
}

impl SpectralSource for PhiDeltaSource {
    fn dim(&self) -> usize {
        self.fam.dim()
    }

    fn eval(&self, xi: &[f64]) -> C64 {
        self.fam.eval(xi)
    }

    fn moment_order(&self) -> Option<u32> {
        Some(self.fam.m())
    }

    fn moment(&self, beta: &MultiIndex) -> Option<C64> {
        self.fam.moments.get(beta)
    }

    fn taylor_remainder(&self, xi: &[f64], order: u32) -> Option<C64> {
        (order <= self.fam.m()).then(|| self.fam.remainder(xi, order))
    }

    fn kind(&self) -> &'static str {
        "phi_delta"
    }
}

/// `φ_δ(ξ)` for a family member.
pub fn phi_delta_eval(fam: &PhiDeltaFamily, xi: &[f64]) -> Result<C64> {
    check_dim(fam.dim(), xi.len())?;
    Ok(fam.eval(xi))
}

/// `μ_j`, the member with `δ = 1/j`.
pub fn cauchy_sequence(moments: &MomentSpec, j: u32) -> Result<ComplexMeasure> {
    if j == 0 {
        return Err(Error::InvalidParameter("j must be ≥ 1".into()));
    }
    PhiDeltaFamily::new(moments.clone(), 1.0 / j as f64)?.make_measure()
}

#[derive(Clone, Debug)]
pub struct LipschitzReport {
    pub estimate: f64,
    pub bound: f64,
    pub pass: bool,
    pub metric: MetricEstimate,
}

/// Estimates `d_m(μ_{δ₁}, μ_{δ₂})` and compares it with `|δ₁ − δ₂|`.
pub fn verify_lipschitz(
    moments: &MomentSpec,
    delta1: f64,
    delta2: f64,
    opts: &DmOptions,
) -> Result<LipschitzReport> {
    if !(delta1 > 0.0 && delta2 > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "deltas must be positive, got {delta1} and {delta2}"
        )));
    }
    let a = PhiDeltaFamily::new(moments.clone(), delta1)?.make_measure()?;
    let b = PhiDeltaFamily::new(moments.clone(), delta2)?.make_measure()?;
    let metric = dm(&a, &b, moments.order(), opts)?;
    let bound = (delta1 - delta2).abs();
    Ok(LipschitzReport {
        estimate: metric.value,
        bound,
        pass: metric.value <= bound + opts.tol,
        metric,
    })
}

/// `g(θ) = θ (1 − e^{−ρ/θ})`.
pub fn g_lipschitz(theta: f64, rho: f64) -> f64 {
    -theta * (-rho / theta).exp_m1()
}

/// `g(θ) ≤ ρ` at `samples` log-spaced points of `[1e−8, 1e8]`.
pub fn g_bound_check(rho: f64, samples: usize) -> Result<bool> {
    if !(rho > 0.0) || samples == 0 {
        return Err(Error::InvalidParameter("rho and samples must be positive".into()));
    }
    let (lo, hi) = (1e-8f64.ln(), 1e8f64.ln());
    Ok((0..samples).all(|k| {
        let t = if samples == 1 {
            0.0
        } else {
            k as f64 / (samples - 1) as f64
        };
        g_lipschitz((lo + t * (hi - lo)).exp(), rho) <= rho
    }))
}

/// The pointwise chain
/// `|φ_{δ₁}(ξ) − φ_{δ₂}(ξ)| / |ξ|^m ≤ |ξ|² (1 − e^{−ρ/|ξ|²}) ≤ ρ`, `ρ = |δ₁ − δ₂|`,
/// evaluated at one frequency: returns `(ratio, middle, ρ)`.
pub fn lipschitz_chain_at(a: &PhiDeltaFamily, b: &PhiDeltaFamily, xi: &[f64]) -> Result<(f64, f64, f64)> {
    check_dim(a.dim(), xi.len())?;
    let r = norm(xi);
    if r == 0.0 {
        return Err(Error::ZeroFrequency);
    }
    let ratio = (a.remainder(xi, a.m()) - b.remainder(xi, b.m())).norm() / r.powi(a.m() as i32);
    let rho = (a.delta - b.delta).abs();
    Ok((ratio, g_lipschitz(r * r, rho), rho))
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentCheck {
    pub beta: MultiIndex,
    /// Richardson-refined central difference for `(D^β φ_δ)(0)`.
    pub fd_value: C64,
    /// `(−i)^{|β|} M_β`.
    pub expected: C64,
    pub abs_error: f64,
}

/// Compares a finite-difference `(D^β φ_δ)(0)` with `(−i)^{|β|} M_β`.
/// `h = None` uses [`default_step`].
pub fn verify_moments_at_zero(fam: &PhiDeltaFamily, beta: &MultiIndex, h: Option<f64>) -> Result<MomentCheck> {
    check_dim(fam.dim(), beta.dim())?;
    if beta.order() > fam.m() {
        return Err(Error::MomentOrderExceeded {
            requested: beta.order(),
            declared: fam.m(),
        });
    }
    let expected = neg_i_pow(beta.order()) * fam.moments.get(beta).expect("complete spec");
    let h = h.unwrap_or_else(|| default_step(beta, 1.0));
    let fd_value = if beta.order() == 0 {
        fam.eval(&vec![0.0; fam.dim()])
    } else {
        derivative_at_zero_refined(|xi| fam.eval(xi), beta, h)
    };
    Ok(MomentCheck {
        beta: beta.clone(),
        fd_value,
        expected,
        abs_error: (fd_value - expected).norm(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    /// `h_n = (2πn + π/2)^{−1/m}`: `sin = 1`, `cos = 0`.
    A,
    /// `h′_n = (2πn)^{−1/m}`: `sin = 0`, `cos = 1`.
    B,
}

impl Branch {
    pub fn label(self) -> &'static str {
        match self {
            Self::A => "A",
            Self::B => "B",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub n: u32,
    pub h: f64,
    pub quotient: f64,
    pub branch: Branch,
}

#[derive(Clone, Debug)]
pub struct SmoothnessTrace {
    pub m: u32,
    pub rows: Vec<ProbeRow>,
    /// Extrapolated `h → 0` limit along each branch.
    pub limit_a: f64,
    pub limit_b: f64,
}

impl SmoothnessTrace {
    pub fn gap(&self) -> f64 {
        self.limit_a - self.limit_b
    }

    pub fn branch(&self, b: Branch) -> impl Iterator<Item = &ProbeRow> {
        self.rows.iter().filter(move |r| r.branch == b)
    }

    /// Per-`n` difference between the two branches.
    pub fn gaps(&self) -> Vec<(u32, f64)> {
        self.branch(Branch::A)
            .zip(self.branch(Branch::B))
            .map(|(a, b)| (a.n, a.quotient - b.quotient))
            .collect()
    }
}

/// `f′(x)` for `f(x) = |x|^{m+2} sin(|x|^{−m})`:
/// `x ((m+2)|x|^m sin(|x|^{−m}) − m cos(|x|^{−m}))`, `f′(0) = 0`.
pub fn phi0_profile_derivative(m: u32, x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    let xm = x.abs().powi(m as i32);
    let (s, c) = (1.0 / xm).sin_cos();
    x * ((m as f64 + 2.0) * xm * s - m as f64 * c)
}

/// Difference quotients `(f′(h) − f′(0)) / h` of the axis profile of `φ_0`
/// along two interleaved scale sequences. Branch A tends to 0 and branch B to
/// `−m`, so `f′` has no derivative at 0 and `φ_0 ∉ C²`.
pub fn phi0_smoothness_probe(m: u32, n_max: u32) -> Result<SmoothnessTrace> {
    if m < 2 || n_max < 1 {
        return Err(Error::InvalidParameter(format!(
            "need m ≥ 2 and n_max ≥ 1, got m={m}, n_max={n_max}"
        )));
    }
    let two_pi = 2.0 * std::f64::consts::PI;
    let inv_m = -1.0 / m as f64;
    let mut rows = Vec::with_capacity(2 * n_max as usize);
    for n in 1..=n_max {
        for (branch, phase) in [(Branch::A, std::f64::consts::FRAC_PI_2), (Branch::B, 0.0)] {
            let h = (two_pi * n as f64 + phase).powf(inv_m);
            let quotient = (phi0_profile_derivative(m, h) - phi0_profile_derivative(m, 0.0)) / h;
            rows.push(ProbeRow {
                n,
                h,
                quotient,
                branch,
            });
        }
    }
    let limit = |b: Branch| -> f64 {
        let pts: Vec<(f64, f64)> = rows
            .iter()
            .filter(|r| r.branch == b && r.n > n_max / 2)
            .map(|r| (r.h.powi(m as i32), r.quotient))
            .collect();
        extrapolate_to_zero(&pts)
    };
    Ok(SmoothnessTrace {
        m,
        limit_a: limit(Branch::A),
        limit_b: limit(Branch::B),
        rows,
    })
}

/// Intercept at `s = 0` of the least-squares line through `(s, q)`.
fn extrapolate_to_zero(pts: &[(f64, f64)]) -> f64 {
    match pts.len() {
        0 => f64::NAN,
        1 => pts[0].1,
        _ => {
            let n = pts.len() as f64;
            let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), &(x, y)| (a + x, b + y));
            let (mx, my) = (sx / n, sy / n);
            let (mut sxx, mut sxy) = (0.0, 0.0);
            for &(x, y) in pts {
                sxx += (x - mx) * (x - mx);
                sxy += (x - mx) * (y - my);
            }
            if sxx == 0.0 {
                my
            } else {
                my - sxy / sxx * mx
            }
        }
    }
}
