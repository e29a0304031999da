//! Fourier transforms of measures, `μ̂(ξ) = ∫ e^{−i x·ξ} dμ(x)`, and the
//! moment/derivative duality `(D^β μ̂)(ξ) = (−i)^{|β|} ∫ x^β e^{−i x·ξ} dμ(x)`.

use rayon::prelude::*;

use crate::measure::{trapezoid_weight, ComplexMeasure, GridDensity, GridSpec, MomentSpec};
use crate::multiindex::{check_dim, factorial_u64, MultiIndex};
use crate::{Error, Result, C64};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// `(−i)^n`.
pub fn neg_i_pow(n: u32) -> C64 {
    match n % 4 {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// `i^n`.
pub fn i_pow(n: u32) -> C64 {
    neg_i_pow(n).conj()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn cis_neg(t: f64) -> C64 {
    let (s, c) = t.sin_cos();
    C64::new(c, -s)
}

pub fn ft_eval(mu: &ComplexMeasure, xi: &[f64]) -> Result<C64> {
    check_dim(mu.dim(), xi.len())?;
    Ok(match mu {
        ComplexMeasure::Discrete(m) => m.atoms().iter().map(|a| a.w * cis_neg(dot(&a.x, xi))).sum(),
        ComplexMeasure::Grid(g) => g.weighted_nodes().map(|(x, wr)| wr * cis_neg(dot(x, xi))).sum(),
        ComplexMeasure::Spectral(s) => s.eval(xi),
    })
}

/// `(D^β μ̂)(ξ)` from the moment integral; spectral measures are rejected.
pub fn ft_derivative(mu: &ComplexMeasure, beta: &MultiIndex, xi: &[f64]) -> Result<C64> {
    check_dim(mu.dim(), xi.len())?;
    check_dim(mu.dim(), beta.dim())?;
    let sum: C64 = match mu {
        ComplexMeasure::Discrete(m) => m
            .atoms()
            .iter()
            .map(|a| a.w * beta.monomial_unchecked(&a.x) * cis_neg(dot(&a.x, xi)))
            .sum(),
        ComplexMeasure::Grid(g) => g
            .weighted_nodes()
            .map(|(x, wr)| wr * beta.monomial_unchecked(x) * cis_neg(dot(x, xi)))
            .sum(),
        ComplexMeasure::Spectral(_) => {
            return Err(Error::Unsupported("ft_derivative on a spectral measure"))
        }
    };
    Ok(neg_i_pow(beta.order()) * sum)
}

/// `e^{−it} − Σ_{n ≤ order} (−it)ⁿ/n!`, summed as a series for small `|t|` so
/// the result keeps full relative accuracy as `t → 0`.
pub fn exp_remainder(t: f64, order: u32) -> C64 {
    if t.abs() < 1.5 {
        // First dropped term, then the recurrence term_{n+1} = term_n·(−it)/(n+1).
        let n0 = order + 1;
        let mut term = neg_i_pow(n0) * t.powi(n0 as i32) / inv_factorial_denominator(n0);
        let mut sum = ZERO;
        let step = C64::new(0.0, -t);
        let mut n = n0;
        loop {
            sum += term;
            if term.norm() <= 1e-17 * sum.norm() || n > n0 + 60 {
                break;
            }
            n += 1;
            term = term * step / n as f64;
        }
        sum
    } else {
        let mut poly = ZERO;
        let mut term = C64::new(1.0, 0.0);
        let step = C64::new(0.0, -t);
        for n in 0..=order {
            poly += term;
            term = term * step / (n + 1) as f64;
        }
        cis_neg(t) - poly
    }
}

fn inv_factorial_denominator(n: u32) -> f64 {
    factorial_u64(n).map(|v| v as f64).unwrap_or_else(|_| {
        (1..=n).map(|k| k as f64).product()
    })
}

/// `Σ_{|β| ≤ order} (−i)^{|β|} M_β ξ^β / β!`, the order-`order` Taylor
/// polynomial of any transform whose moments are `M`.
pub fn taylor_polynomial(moments: &MomentSpec, xi: &[f64], order: u32) -> Result<C64> {
    check_dim(moments.dim(), xi.len())?;
    if order > moments.order() {
        return Err(Error::MomentOrderExceeded {
            requested: order,
            declared: moments.order(),
        });
    }
    let mut acc = ZERO;
    for (beta, m) in moments.iter() {
        if beta.order() > order {
            break;
        }
        acc += neg_i_pow(beta.order()) * m * beta.monomial_unchecked(xi)
            / beta.factorial()? as f64;
    }
    Ok(acc)
}

/// `μ̂(ξ)` minus its Taylor polynomial of degree `≤ order` at the origin.
///
/// Discrete and grid measures sum per-node [`exp_remainder`]s, which is exact
/// up to rounding even where `μ̂` and its polynomial agree to many digits.
/// Spectral measures use their own remainder evaluator when they provide one
/// and fall back to `φ(ξ) − T(ξ)` from the declared moments otherwise.
pub fn taylor_remainder(mu: &ComplexMeasure, xi: &[f64], order: u32) -> Result<C64> {
    check_dim(mu.dim(), xi.len())?;
    Ok(match mu {
        ComplexMeasure::Discrete(m) => m
            .atoms()
            .iter()
            .map(|a| a.w * exp_remainder(dot(&a.x, xi), order))
            .sum(),
        ComplexMeasure::Grid(g) => g
            .weighted_nodes()
            .map(|(x, wr)| wr * exp_remainder(dot(x, xi), order))
            .sum(),
        ComplexMeasure::Spectral(s) => match s.source().taylor_remainder(xi, order) {
            Some(v) => v,
            None => s.eval(xi) - taylor_polynomial(&mu.moments(order)?, xi, order)?,
        },
    })
}

/// Finite-difference weights for the `k`-th derivative at 0 on `nodes`.
pub fn fd_weights(nodes: &[f64], k: usize) -> Vec<f64> {
    let n = nodes.len();
    assert!(n > k, "need more than k nodes for a k-th derivative");
    let mut c = vec![vec![0.0; k + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = nodes[0];
    for i in 1..n {
        let mn = i.min(k);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i];
        for j in 0..i {
            let c3 = nodes[i] - nodes[j];
            c2 *= c3;
            if j == i - 1 {
                for s in (1..=mn).rev() {
                    c[i][s] = c1 * (s as f64 * c[i - 1][s - 1] - c5 * c[i - 1][s]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for s in (1..=mn).rev() {
                c[j][s] = (c4 * c[j][s] - s as f64 * c[j][s - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[k]).collect()
}

/// Second-order central stencil for the `k`-th derivative: integer offsets
/// `−p..=p` with `p = ⌊(k+1)/2⌋` (at least 1 when `k ≥ 1`), and weights.
pub fn central_stencil(k: u32) -> (Vec<i32>, Vec<f64>) {
    if k == 0 {
        return (vec![0], vec![1.0]);
    }
    let p = k.div_ceil(2) as i32;
    let offsets: Vec<i32> = (-p..=p).collect();
    let nodes: Vec<f64> = offsets.iter().map(|&o| o as f64).collect();
    let weights = fd_weights(&nodes, k as usize);
    (offsets, weights)
}

/// Default step `ε^{1/(|β|+2)} · scale`.
pub fn default_step(beta: &MultiIndex, scale: f64) -> f64 {
    f64::EPSILON.powf(1.0 / (beta.order() as f64 + 2.0)) * scale
}

/// Tensor-product central difference for `(D^β φ)(0)` with step `h`.
pub fn derivative_at_zero<F>(phi: F, beta: &MultiIndex, h: f64) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    let d = beta.dim();
    let stencils: Vec<(Vec<i32>, Vec<f64>)> =
        beta.entries().iter().map(|&k| central_stencil(k)).collect();
    let mut idx = vec![0usize; d];
    let mut point = vec![0.0; d];
    let mut acc = ZERO;
    loop {
        let mut w = 1.0;
        for j in 0..d {
            let (offs, ws) = &stencils[j];
            point[j] = offs[idx[j]] as f64 * h;
            w *= ws[idx[j]];
        }
        if w != 0.0 {
            acc += phi(&point) * w;
        }
        // odometer over stencil nodes
        let mut j = d;
        loop {
            if j == 0 {
                return acc / h.powi(beta.order() as i32);
            }
            j -= 1;
            idx[j] += 1;
            if idx[j] < stencils[j].0.len() {
                break;
            }
            idx[j] = 0;
        }
    }
}

/// Richardson-refined `(D^β φ)(0)`: `(4 D(h) − D(2h)) / 3`, fourth order.
pub fn derivative_at_zero_refined<F>(phi: F, beta: &MultiIndex, h: f64) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    let fine = derivative_at_zero(&phi, beta, h);
    let coarse = derivative_at_zero(&phi, beta, 2.0 * h);
    (4.0 * fine - coarse) / 3.0
}

/// `∫ x^β dμ = i^{|β|} (D^β φ)(0)` with the derivative taken by central
/// differences of step `h`.
pub fn moment_from_ft<F>(phi: F, beta: &MultiIndex, h: f64) -> C64
where
    F: Fn(&[f64]) -> C64,
{
    i_pow(beta.order()) * derivative_at_zero(phi, beta, h)
}

/// Options for [`inverse_ft_grid`].
#[derive(Clone, Copy, Debug)]
pub struct InverseFtOptions {
    /// Frequencies are truncated to the box `[−cutoff, cutoff]^d`.
    pub cutoff: f64,
    /// Largest allowed `max |φ|` on the box boundary relative to its peak.
    pub edge_tolerance: f64,
    /// Frequency spacing is `π / (oversample · x_max)` per axis.
    pub oversample: f64,
}

impl InverseFtOptions {
    pub fn new(cutoff: f64) -> Self {
        Self {
            cutoff,
            edge_tolerance: 1e-12,
            oversample: 2.0,
        }
    }
}

/// Samples `(2π)^{−d} ∫ φ(ξ) e^{iξ·x} dξ` on `grid` by the trapezoidal rule
/// over the truncation box, contracted one axis at a time.
pub fn inverse_ft_grid<F>(phi: F, grid: &GridSpec, opts: InverseFtOptions) -> Result<GridDensity>
where
    F: Fn(&[f64]) -> C64 + Sync,
{
    let d = grid.dim();
    if !(opts.cutoff > 0.0 && opts.cutoff.is_finite()) {
        return Err(Error::InvalidParameter("cutoff must be positive".into()));
    }
    let freq = frequency_axes(grid, &opts);
    let fshape: Vec<usize> = freq.iter().map(|(nodes, _)| nodes.len()).collect();
    let total: usize = fshape.iter().product();

    let samples: Vec<C64> = (0..total)
        .into_par_iter()
        .map(|flat| {
            let mut xi = [0.0; 3];
            let mut rem = flat;
            for j in (0..d).rev() {
                xi[j] = freq[j].0[rem % fshape[j]];
                rem /= fshape[j];
            }
            phi(&xi[..d])
        })
        .collect();

    let peak = samples.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let edge = samples
        .iter()
        .enumerate()
        .filter(|(flat, _)| on_box_boundary(*flat, &fshape))
        .map(|(_, v)| v.norm())
        .fold(0.0, f64::max);
    if peak > 0.0 && edge > opts.edge_tolerance * peak {
        return Err(Error::Truncation {
            radius: opts.cutoff,
            edge: edge / peak,
            tolerance: opts.edge_tolerance,
        });
    }

    let mut shape = fshape.clone();
    let mut data = samples;
    for axis in 0..d {
        let (nodes, dxi) = &freq[axis];
        let xs = grid.axis_nodes(axis);
        let kernel: Vec<C64> = xs
            .iter()
            .flat_map(|&x| {
                nodes.iter().enumerate().map(move |(k, &xi)| {
                    let (s, c) = (xi * x).sin_cos();
                    C64::new(c, s) * (trapezoid_weight(k, nodes.len()) * dxi)
                })
            })
            .collect();
        data = contract_axis(&data, &shape, axis, &kernel, xs.len());
        shape[axis] = xs.len();
    }
    let norm = (2.0 * std::f64::consts::PI).powi(d as i32);
    for v in &mut data {
        *v /= norm;
    }
    GridDensity::new(grid.clone(), data)
}

fn frequency_axes(grid: &GridSpec, opts: &InverseFtOptions) -> Vec<(Vec<f64>, f64)> {
    (0..grid.dim())
        .map(|j| {
            let x_max = grid.axis_extent(j);
            let mut dxi = if x_max > 0.0 {
                std::f64::consts::PI / (opts.oversample * x_max)
            } else {
                opts.cutoff / 64.0
            };
            let half = (opts.cutoff / dxi).ceil() as usize;
            dxi = opts.cutoff / half as f64;
            let nodes = (0..=2 * half).map(|k| -opts.cutoff + k as f64 * dxi).collect();
            (nodes, dxi)
        })
        .collect()
}

fn on_box_boundary(mut flat: usize, shape: &[usize]) -> bool {
    for j in (0..shape.len()).rev() {
        let i = flat % shape[j];
        flat /= shape[j];
        if i == 0 || i + 1 == shape[j] {
            return true;
        }
    }
    false
}

/// `out[o, n, i] = Σ_k kernel[n, k] · data[o, k, i]` along `axis`.
fn contract_axis(data: &[C64], shape: &[usize], axis: usize, kernel: &[C64], n_out: usize) -> Vec<C64> {
    let outer: usize = shape[..axis].iter().product();
    let inner: usize = shape[axis + 1..].iter().product();
    let k_len = shape[axis];
    let mut out = vec![ZERO; outer * n_out * inner];
    out.par_chunks_mut(n_out * inner)
        .enumerate()
        .for_each(|(o, block)| {
            let src = &data[o * k_len * inner..(o + 1) * k_len * inner];
            for n in 0..n_out {
                let row = &kernel[n * k_len..(n + 1) * k_len];
                let dst = &mut block[n * inner..(n + 1) * inner];
                for (k, &kv) in row.iter().enumerate() {
                    let s = &src[k * inner..(k + 1) * inner];
                    for (dv, sv) in dst.iter_mut().zip(s) {
                        *dv += kv * sv;
                    }
                }
            }
        });
    out
}
