//! Complex-valued finite Borel measures on `ℝ^d`, `d ∈ {1, 2, 3}`.
//!
//! Three representations live side by side. Discrete measures and grid
//! densities are given on the space side and every quantity is computed from
//! them. Spectral measures are given on the frequency side by a closed-form
//! evaluator `ξ ↦ φ(ξ)` that *declares* its moments and a total-variation
//! bound; the declared data is checked by the verification routines in
//! [`crate::counterexample`], not recomputed here.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Arc;

use crate::multiindex::{check_dim, enumerate_upto, MultiIndex};
use crate::{Error, Result, C64};

pub const MAX_DIM: usize = 3;

/// Default absolute tolerance for moment comparisons.
pub const DEFAULT_MOMENT_TOL: f64 = 1e-9;

fn check_supported_dim(dim: usize) -> Result<()> {
    if (1..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "dimension {dim} outside supported range 1..={MAX_DIM}"
        )))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub x: Vec<f64>,
    pub w: C64,
}

/// Finite sum of weighted Dirac masses `Σ w_k δ_{x_k}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

impl DiscreteMeasure {
    pub fn new(dim: usize, atoms: Vec<Atom>) -> Result<Self> {
        check_supported_dim(dim)?;
        for a in &atoms {
            check_dim(dim, a.x.len())?;
            if !a.x.iter().all(|v| v.is_finite()) || !a.w.is_finite() {
                return Err(Error::InvalidParameter("non-finite atom".into()));
            }
        }
        Ok(Self { dim, atoms })
    }

    /// `w · δ_x`.
    pub fn dirac(x: Vec<f64>, w: C64) -> Result<Self> {
        Self::new(x.len(), vec![Atom { x, w }])
    }

    /// Build from `(position, weight)` pairs in one dimension.
    pub fn from_1d(pairs: &[(f64, C64)]) -> Self {
        Self {
            dim: 1,
            atoms: pairs
                .iter()
                .map(|&(x, w)| Atom { x: vec![x], w })
                .collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn total_variation(&self) -> f64 {
        self.atoms.iter().map(|a| a.w.norm()).sum()
    }

    pub fn scale(&self, a: C64) -> Self {
        Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|at| Atom {
                    x: at.x.clone(),
                    w: at.w * a,
                })
                .collect(),
        }
    }

    /// Atom-wise sum; coinciding atoms are not merged (see [`Self::canonical`]).
    pub fn add(&self, other: &Self) -> Result<Self> {
        check_dim(self.dim, other.dim)?;
        let mut atoms = self.atoms.clone();
        atoms.extend(other.atoms.iter().cloned());
        Ok(Self {
            dim: self.dim,
            atoms,
        })
    }

    pub fn translate(&self, shift: &[f64]) -> Result<Self> {
        check_dim(self.dim, shift.len())?;
        Ok(Self {
            dim: self.dim,
            atoms: self
                .atoms
                .iter()
                .map(|at| Atom {
                    x: at.x.iter().zip(shift).map(|(x, s)| x + s).collect(),
                    w: at.w,
                })
                .collect(),
        })
    }

    /// Atoms sorted by position, coinciding positions merged, zero weights dropped.
    pub fn canonical(&self) -> Self {
        let mut atoms = self.atoms.clone();
        atoms.sort_by(|a, b| {
            a.x.iter()
                .zip(&b.x)
                .map(|(p, q)| p.total_cmp(q))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut merged: Vec<Atom> = Vec::with_capacity(atoms.len());
        for a in atoms {
            match merged.last_mut() {
                Some(last) if last.x == a.x => last.w += a.w,
                _ => merged.push(a),
            }
        }
        merged.retain(|a| a.w != C64::new(0.0, 0.0));
        Self {
            dim: self.dim,
            atoms: merged,
        }
    }

    pub fn support_radius(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.x.iter().map(|v| v * v).sum::<f64>().sqrt())
            .fold(0.0, f64::max)
    }

    pub fn moment(&self, beta: &MultiIndex) -> Result<C64> {
        check_dim(self.dim, beta.dim())?;
        Ok(self
            .atoms
            .iter()
            .map(|a| a.w * beta.monomial_unchecked(&a.x))
            .sum())
    }
}

/// Rectangular grid: `origin + i·spacing` per axis, `shape[j]` nodes on axis `j`.
/// Flat indices are row-major (last axis fastest).
#[derive(Clone, Debug, PartialEq)]
pub struct GridSpec {
    pub origin: Vec<f64>,
    pub spacing: Vec<f64>,
    pub shape: Vec<usize>,
}

impl GridSpec {
    pub fn new(origin: Vec<f64>, spacing: Vec<f64>, shape: Vec<usize>) -> Result<Self> {
        check_supported_dim(origin.len())?;
        check_dim(origin.len(), spacing.len())?;
        check_dim(origin.len(), shape.len())?;
        if spacing.iter().any(|&h| !(h > 0.0 && h.is_finite())) {
            return Err(Error::InvalidParameter("grid spacing must be positive".into()));
        }
        if shape.contains(&0) {
            return Err(Error::InvalidParameter("grid shape entries must be ≥ 1".into()));
        }
        Ok(Self {
            origin,
            spacing,
            shape,
        })
    }

    /// Symmetric grid covering `[-half_width, half_width]` on every axis with
    /// spacing at most `max_spacing`; endpoints are grid nodes.
    pub fn symmetric(dim: usize, half_width: f64, max_spacing: f64) -> Result<Self> {
        if !(half_width > 0.0 && max_spacing > 0.0) {
            return Err(Error::InvalidParameter(
                "half width and spacing must be positive".into(),
            ));
        }
        let intervals = (2.0 * half_width / max_spacing).ceil() as usize;
        let h = 2.0 * half_width / intervals as f64;
        Self::new(vec![-half_width; dim], vec![h; dim], vec![intervals + 1; dim])
    }

    pub fn dim(&self) -> usize {
        self.origin.len()
    }

    pub fn len(&self) -> usize {
        self.shape.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn axis_nodes(&self, axis: usize) -> Vec<f64> {
        (0..self.shape[axis])
            .map(|i| self.origin[axis] + i as f64 * self.spacing[axis])
            .collect()
    }

    /// Largest `|x_j|` reached on axis `j`.
    pub fn axis_extent(&self, axis: usize) -> f64 {
        let lo = self.origin[axis];
        let hi = lo + (self.shape[axis] - 1) as f64 * self.spacing[axis];
        lo.abs().max(hi.abs())
    }

    fn unravel(&self, mut flat: usize, out: &mut [usize]) {
        for j in (0..self.dim()).rev() {
            out[j] = flat % self.shape[j];
            flat /= self.shape[j];
        }
    }

    /// Node coordinates and trapezoidal weights for every node, row-major.
    pub fn nodes(&self) -> Vec<(Vec<f64>, f64)> {
        let d = self.dim();
        let mut idx = vec![0usize; d];
        (0..self.len())
            .map(|flat| {
                self.unravel(flat, &mut idx);
                let mut w = 1.0;
                let x = (0..d)
                    .map(|j| {
                        w *= trapezoid_weight(idx[j], self.shape[j]) * self.spacing[j];
                        self.origin[j] + idx[j] as f64 * self.spacing[j]
                    })
                    .collect();
                (x, w)
            })
            .collect()
    }
}

pub(crate) fn trapezoid_weight(i: usize, n: usize) -> f64 {
    if n > 1 && (i == 0 || i + 1 == n) {
        0.5
    } else {
        1.0
    }
}

/// Measure `ρ(x) dx` with `ρ` sampled on a [`GridSpec`]; integrals use the
/// trapezoidal rule.
#[derive(Clone, Debug)]
pub struct GridDensity {
    grid: GridSpec,
    density: Vec<C64>,
    nodes: Vec<(Vec<f64>, f64)>,
}

impl PartialEq for GridDensity {
    fn eq(&self, other: &Self) -> bool {
        self.grid == other.grid && self.density == other.density
    }
}

impl GridDensity {
    pub fn new(grid: GridSpec, density: Vec<C64>) -> Result<Self> {
        if density.len() != grid.len() {
            return Err(Error::InvalidParameter(format!(
                "density has {} samples, grid has {}",
                density.len(),
                grid.len()
            )));
        }
        if density.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidParameter("non-finite density sample".into()));
        }
        let nodes = grid.nodes();
        Ok(Self {
            grid,
            density,
            nodes,
        })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(&[f64]) -> C64) -> Result<Self> {
        let density = grid.nodes().iter().map(|(x, _)| f(x)).collect();
        Self::new(grid, density)
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn density(&self) -> &[C64] {
        &self.density
    }

    /// `(x_j, quadrature weight · ρ(x_j))` for every node.
    pub fn weighted_nodes(&self) -> impl Iterator<Item = (&[f64], C64)> {
        self.nodes
            .iter()
            .zip(&self.density)
            .map(|((x, w), rho)| (x.as_slice(), rho * *w))
    }

    pub fn total_variation(&self) -> f64 {
        self.nodes
            .iter()
            .zip(&self.density)
            .map(|((_, w), rho)| w * rho.norm())
            .sum()
    }

    pub fn moment(&self, beta: &MultiIndex) -> Result<C64> {
        check_dim(self.dim(), beta.dim())?;
        Ok(self
            .weighted_nodes()
            .map(|(x, wr)| wr * beta.monomial_unchecked(x))
            .sum())
    }
}

/// Frequency-side description of a measure.
pub trait SpectralSource: Send + Sync + fmt::Debug {
    fn dim(&self) -> usize;

    /// `φ(ξ)`, the Fourier transform of the represented measure.
    fn eval(&self, xi: &[f64]) -> C64;

    /// Highest declared moment order; `None` when every order is available.
    fn moment_order(&self) -> Option<u32>;

    /// Declared moment `∫ x^β dμ`, or `None` beyond [`Self::moment_order`].
    fn moment(&self, beta: &MultiIndex) -> Option<C64>;

    /// `φ(ξ)` minus its Taylor polynomial of total degree `≤ order` at the
    /// origin, when the source can evaluate it without cancellation.
    fn taylor_remainder(&self, _xi: &[f64], _order: u32) -> Option<C64> {
        None
    }

    fn kind(&self) -> &'static str;
}

/// A measure known through its transform, declared moments and a declared
/// total-variation bound.
#[derive(Clone, Debug)]
pub struct SpectralMeasure {
    source: Arc<dyn SpectralSource>,
    tv_bound: f64,
}

impl SpectralMeasure {
    pub fn new(source: Arc<dyn SpectralSource>, tv_bound: f64) -> Result<Self> {
        check_supported_dim(source.dim())?;
        if !(tv_bound.is_finite() && tv_bound >= 0.0) {
            return Err(Error::InvalidParameter(
                "declared total-variation bound must be finite and non-negative".into(),
            ));
        }
        let zero = MultiIndex::zero(source.dim());
        let m0 = source
            .moment(&zero)
            .ok_or_else(|| Error::IncompleteMoments(zero.clone()))?;
        let phi0 = source.eval(&vec![0.0; source.dim()]);
        if (phi0 - m0).norm() > 1e-12 * m0.norm().max(1.0) {
            return Err(Error::InvalidParameter(format!(
                "phi(0) = {phi0} differs from declared M_0 = {m0}"
            )));
        }
        Ok(Self { source, tv_bound })
    }

    pub fn source(&self) -> &Arc<dyn SpectralSource> {
        &self.source
    }

    pub fn dim(&self) -> usize {
        self.source.dim()
    }

    pub fn tv_bound(&self) -> f64 {
        self.tv_bound
    }

    pub fn eval(&self, xi: &[f64]) -> C64 {
        self.source.eval(xi)
    }

    pub fn moment(&self, beta: &MultiIndex) -> Result<C64> {
        check_dim(self.dim(), beta.dim())?;
        self.source
            .moment(beta)
            .ok_or(Error::MomentOrderExceeded {
                requested: beta.order(),
                declared: self.source.moment_order().unwrap_or(u32::MAX),
            })
    }
}

#[derive(Clone, Debug)]
pub enum ComplexMeasure {
    Discrete(DiscreteMeasure),
    Grid(GridDensity),
    Spectral(SpectralMeasure),
}

impl From<DiscreteMeasure> for ComplexMeasure {
    fn from(m: DiscreteMeasure) -> Self {
        Self::Discrete(m)
    }
}

impl From<GridDensity> for ComplexMeasure {
    fn from(m: GridDensity) -> Self {
        Self::Grid(m)
    }
}

impl From<SpectralMeasure> for ComplexMeasure {
    fn from(m: SpectralMeasure) -> Self {
        Self::Spectral(m)
    }
}

impl ComplexMeasure {
    pub fn dim(&self) -> usize {
        match self {
            Self::Discrete(m) => m.dim(),
            Self::Grid(m) => m.dim(),
            Self::Spectral(m) => m.dim(),
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Self::Discrete(_) => "discrete",
            Self::Grid(_) => "grid",
            Self::Spectral(m) => m.source.kind(),
        }
    }

    /// Upper bound on `|μ|(ℝ^d)`: exact for discrete measures, trapezoidal
    /// quadrature of `|ρ|` for grids, the declared value for spectral ones.
    pub fn total_variation_bound(&self) -> f64 {
        match self {
            Self::Discrete(m) => m.total_variation(),
            Self::Grid(m) => m.total_variation(),
            Self::Spectral(m) => m.tv_bound(),
        }
    }

    pub fn moment(&self, beta: &MultiIndex) -> Result<C64> {
        match self {
            Self::Discrete(m) => m.moment(beta),
            Self::Grid(m) => m.moment(beta),
            Self::Spectral(m) => m.moment(beta),
        }
    }

    /// Highest moment order available; `None` when unbounded.
    pub fn moment_order(&self) -> Option<u32> {
        match self {
            Self::Spectral(m) => m.source.moment_order(),
            _ => None,
        }
    }

    /// Moment table up to `order`.
    pub fn moments(&self, order: u32) -> Result<MomentSpec> {
        let values = enumerate_upto(self.dim(), order)
            .into_iter()
            .map(|b| self.moment(&b).map(|v| (b, v)))
            .collect::<Result<BTreeMap<_, _>>>()?;
        MomentSpec::new(self.dim(), order, values)
    }

    /// Equality of representations; discrete measures are compared after
    /// [`DiscreteMeasure::canonical`]. Spectral measures compare by identity.
    pub fn same_representation(&self, other: &Self) -> bool {
        match (self, other) {
            (Self::Discrete(a), Self::Discrete(b)) => a.canonical() == b.canonical(),
            (Self::Grid(a), Self::Grid(b)) => a == b,
            (Self::Spectral(a), Self::Spectral(b)) => Arc::ptr_eq(&a.source, &b.source),
            _ => false,
        }
    }
}

/// Prescribed moments `{M_β}_{|β| ≤ m}`; complete by construction.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentSpec {
    dim: usize,
    order: u32,
    values: BTreeMap<MultiIndex, C64>,
}

impl MomentSpec {
    pub fn new(dim: usize, order: u32, values: BTreeMap<MultiIndex, C64>) -> Result<Self> {
        check_supported_dim(dim)?;
        for beta in values.keys() {
            check_dim(dim, beta.dim())?;
            if beta.order() > order {
                return Err(Error::InvalidParameter(format!(
                    "beta={beta} exceeds moment order {order}"
                )));
            }
        }
        if let Some(missing) = enumerate_upto(dim, order)
            .into_iter()
            .find(|b| !values.contains_key(b))
        {
            return Err(Error::IncompleteMoments(missing));
        }
        Ok(Self { dim, order, values })
    }

    /// Values listed in graded-lexicographic order.
    pub fn from_values(dim: usize, order: u32, values: &[C64]) -> Result<Self> {
        let betas = enumerate_upto(dim, order);
        if betas.len() != values.len() {
            return Err(Error::InvalidParameter(format!(
                "expected {} moment values for dim={dim}, order={order}, got {}",
                betas.len(),
                values.len()
            )));
        }
        Self::new(dim, order, betas.into_iter().zip(values.iter().copied()).collect())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn get(&self, beta: &MultiIndex) -> Option<C64> {
        self.values.get(beta).copied()
    }

    /// `(β, M_β)` pairs in graded-lexicographic order.
    pub fn iter(&self) -> impl Iterator<Item = (MultiIndex, C64)> + '_ {
        enumerate_upto(self.dim, self.order)
            .into_iter()
            .map(move |b| {
                let v = self.values[&b];
                (b, v)
            })
    }

    pub fn truncate(&self, order: u32) -> Result<Self> {
        if order > self.order {
            return Err(Error::MomentOrderExceeded {
                requested: order,
                declared: self.order,
            });
        }
        let values = self
            .values
            .iter()
            .filter(|(b, _)| b.order() <= order)
            .map(|(b, v)| (b.clone(), *v))
            .collect();
        Ok(Self {
            dim: self.dim,
            order,
            values,
        })
    }

    pub fn max_abs(&self) -> f64 {
        self.values.values().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct MomentReport {
    pub matches: bool,
    pub max_discrepancy: f64,
    /// First multi-index (graded-lex) attaining the maximum discrepancy.
    pub worst: Option<MultiIndex>,
}

/// Membership test for the moment class: every `|moment(μ,β) − M_β| ≤ tol`.
pub fn moments_match(mu: &ComplexMeasure, spec: &MomentSpec, tol: f64) -> Result<MomentReport> {
    check_dim(spec.dim(), mu.dim())?;
    let mut max_discrepancy = 0.0;
    let mut worst = None;
    for (beta, target) in spec.iter() {
        let diff = (mu.moment(&beta)? - target).norm();
        if diff > max_discrepancy || (worst.is_none() && diff.is_nan()) {
            max_discrepancy = diff;
            worst = Some(beta);
        }
    }
    Ok(MomentReport {
        matches: max_discrepancy <= tol,
        max_discrepancy,
        worst,
    })
}

/// `w · N(mean, cov)`, given through its transform
/// `w · exp(−i mean·ξ − ½ ξᵀ cov ξ)`.
#[derive(Clone, Debug)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: Vec<Vec<f64>>,
    weight: C64,
    moment_cache: Arc<std::sync::Mutex<HashMap<MultiIndex, f64>>>,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: Vec<Vec<f64>>, weight: C64) -> Result<Self> {
        let d = mean.len();
        check_supported_dim(d)?;
        check_dim(d, cov.len())?;
        for row in &cov {
            check_dim(d, row.len())?;
        }
        for i in 0..d {
            for j in 0..d {
                if (cov[i][j] - cov[j][i]).abs() > 1e-12 * (cov[i][j].abs() + 1.0) {
                    return Err(Error::InvalidParameter("covariance must be symmetric".into()));
                }
            }
        }
        if !is_positive_semidefinite(&cov) {
            return Err(Error::InvalidParameter(
                "covariance must be positive semidefinite".into(),
            ));
        }
        Ok(Self {
            mean,
            cov,
            weight,
            moment_cache: Default::default(),
        })
    }

    pub fn standard(dim: usize) -> Result<Self> {
        let cov = (0..dim)
            .map(|i| (0..dim).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Self::new(vec![0.0; dim], cov, C64::new(1.0, 0.0))
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &[Vec<f64>] {
        &self.cov
    }

    pub fn weight(&self) -> C64 {
        self.weight
    }

    pub fn into_measure(self) -> Result<ComplexMeasure> {
        let tv = self.weight.norm();
        Ok(SpectralMeasure::new(Arc::new(self), tv)?.into())
    }

    fn quad(&self, u: &[f64]) -> f64 {
        let d = self.mean.len();
        let mut s = 0.0;
        for i in 0..d {
            for j in 0..d {
                s += u[i] * self.cov[i][j] * u[j];
            }
        }
        s
    }

    /// `E[x^β]` for the unit-mass Gaussian, via
    /// `E[x^{α+e_j}] = mean_j E[x^α] + Σ_k cov_jk α_k E[x^{α−e_k}]`.
    fn raw_moment(&self, beta: &MultiIndex) -> f64 {
        if let Some(v) = self.moment_cache.lock().unwrap().get(beta) {
            return *v;
        }
        let value = match beta.entries().iter().position(|&b| b > 0) {
            None => 1.0,
            Some(j) => {
                let mut alpha = beta.entries().to_vec();
                alpha[j] -= 1;
                let alpha_mi = MultiIndex::from(alpha.as_slice());
                let mut v = self.mean[j] * self.raw_moment(&alpha_mi);
                for k in 0..alpha.len() {
                    if alpha[k] > 0 && self.cov[j][k] != 0.0 {
                        let mut lower = alpha.clone();
                        lower[k] -= 1;
                        v += self.cov[j][k]
                            * alpha[k] as f64
                            * self.raw_moment(&MultiIndex::from(lower.as_slice()));
                    }
                }
                v
            }
        };
        self.moment_cache
            .lock()
            .unwrap()
            .insert(beta.clone(), value);
        value
    }
}

fn is_positive_semidefinite(cov: &[Vec<f64>]) -> bool {
    // Sylvester on every principal minor (d ≤ 3).
    let d = cov.len();
    let det2 = |i: usize, j: usize| cov[i][i] * cov[j][j] - cov[i][j] * cov[j][i];
    let eps = 1e-12;
    let diag_ok = (0..d).all(|i| cov[i][i] >= -eps);
    let minors2_ok = (0..d).all(|i| (i + 1..d).all(|j| det2(i, j) >= -eps));
    let det3_ok = d < 3 || {
        let c = cov;
        let det = c[0][0] * (c[1][1] * c[2][2] - c[1][2] * c[2][1])
            - c[0][1] * (c[1][0] * c[2][2] - c[1][2] * c[2][0])
            + c[0][2] * (c[1][0] * c[2][1] - c[1][1] * c[2][0]);
        det >= -eps
    };
    diag_ok && minors2_ok && det3_ok
}

impl SpectralSource for Gaussian {
    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn eval(&self, xi: &[f64]) -> C64 {
        let a: f64 = self.mean.iter().zip(xi).map(|(m, x)| m * x).sum();
        self.weight * C64::new(-0.5 * self.quad(xi), -a).exp()
    }

    fn moment_order(&self) -> Option<u32> {
        None
    }

    fn moment(&self, beta: &MultiIndex) -> Option<C64> {
        (beta.dim() == self.mean.len()).then(|| self.weight * self.raw_moment(beta))
    }

    /// Along the ray `ξ = r u`, `g(r) = w exp(c₁ r + c₂ r²)` with
    /// `c₁ = −i mean·u`, `c₂ = −½ uᵀ cov u`; its Taylor coefficients satisfy
    /// `(n+1) g_{n+1} = c₁ g_n + 2 c₂ g_{n−1}`, and the degree-`≤ order` part of
    /// the multivariate Taylor polynomial restricted to the ray is exactly
    /// `Σ_{n ≤ order} g_n rⁿ`.
    fn taylor_remainder(&self, xi: &[f64], order: u32) -> Option<C64> {
        let r = xi.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r == 0.0 {
            return Some(C64::new(0.0, 0.0));
        }
        let u: Vec<f64> = xi.iter().map(|v| v / r).collect();
        let a: f64 = self.mean.iter().zip(&u).map(|(m, x)| m * x).sum();
        let c1 = C64::new(0.0, -a);
        let c2 = -0.5 * self.quad(&u);
        let scale = a.abs() * r + c2.abs() * r * r;

        let mut prev = C64::new(0.0, 0.0);
        let mut cur = self.weight;
        let mut rn = 1.0;
        let mut poly = C64::new(0.0, 0.0);
        let mut tail = C64::new(0.0, 0.0);
        let mut last_term = 0.0;
        let max_terms = if scale < 2.0 { 200 } else { order as usize + 1 };
        for n in 0..max_terms {
            let term = cur * rn;
            if n as u32 <= order {
                poly += term;
            } else {
                tail += term;
                // Odd or even coefficients can vanish identically, so look at
                // two consecutive terms.
                let small = term.norm().max(last_term) <= 1e-18 * tail.norm();
                if small && n > order as usize + 4 {
                    break;
                }
            }
            last_term = term.norm();
            let next = (c1 * cur + 2.0 * c2 * prev) / (n as f64 + 1.0);
            prev = cur;
            cur = next;
            rn *= r;
        }
        if scale < 2.0 {
            Some(tail)
        } else {
            Some(self.eval(xi) - poly)
        }
    }

    fn kind(&self) -> &'static str {
        "gaussian"
    }
}
