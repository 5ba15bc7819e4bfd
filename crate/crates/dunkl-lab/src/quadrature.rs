//! Weighted tensor-product quadrature for the measure `dw`, sampled-function
//! representation, norms, and the normalization constant `c_k`.
//!
//! Grids are tensor products of per-axis composite rules. Each axis splits
//! `[lo, hi]` into cells graded toward the reflection hyperplane at the
//! origin; the cells adjacent to `0` carry Gauss-Jacobi nodes that absorb the
//! `|x|^{2k}` factor of the weight exactly, all other cells carry
//! Gauss-Legendre nodes with the weight evaluated pointwise. For root systems
//! that are products of rank-1 factors the full `dw`-weight of a node is the
//! product of its per-axis weights; otherwise the axis rules are Lebesgue and
//! the density is multiplied in pointwise.

use std::io::{self, Read, Write};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use gauss_quad::{GaussJacobi, GaussLegendre};
use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::RootSystem;

/// Gauss points per cell; combined with cell grading this fixes the accuracy
/// of every integral in the crate. Eight points make the oscillatory
/// transform quadratures 16th order, which keeps the default grids exact to
/// ~1e-10 for band-limited inputs.
pub const POINTS_PER_CELL: usize = 8;

static GRID_ID: AtomicU64 = AtomicU64::new(1);

#[derive(Debug, Error)]
pub enum QuadratureError {
    #[error("box is degenerate on axis {axis} ({lo}..{hi})")]
    BoxDegenerate { axis: usize, lo: f64, hi: f64 },
    #[error("at least 8 points per axis are required, got {0}")]
    PointsTooFew(usize),
    #[error("functions live on different grids")]
    GridMismatch,
    #[error("Gaussian tail outside the box exceeds 1e-10 of the estimate")]
    TailTooLarge,
    #[error("quadrature failed to converge under refinement (rel. change {0:.3e})")]
    QuadratureFailure(f64),
    #[error("box does not match the grid dimension")]
    DimensionMismatch,
    #[error("import: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// One axis of a tensor grid: nodes, `dw`-quadrature weights (for product
/// systems the per-axis factor `2^k |x|^{2k}` is already included), and the
/// cell boundaries that produced them.
#[derive(Clone, Debug)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    /// Per-axis multiplicity used to absorb the weight (0 for non-product systems).
    pub k: f64,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub boundaries: Vec<f64>,
}

impl Axis {
    /// Composite rule on `[lo, hi]`. When the origin lies inside, each side
    /// gets cells with boundaries `r_i = L (i/m)^q` graded toward `0`, and
    /// the innermost cell on each side carries Gauss-Jacobi nodes absorbing
    /// the `2^k |x|^{2k}` weight exactly; all other cells carry
    /// Gauss-Legendre nodes with the weight evaluated pointwise.
    pub fn build(lo: f64, hi: f64, cells: usize, k: f64, q: f64) -> Result<Axis, QuadratureError> {
        if !(hi > lo) || !lo.is_finite() || !hi.is_finite() {
            return Err(QuadratureError::BoxDegenerate { axis: 0, lo, hi });
        }
        let total = cells.max(2);
        let mut boundaries: Vec<f64> = Vec::new();
        if lo < 0.0 && hi > 0.0 {
            let m_neg = ((total as f64 * (-lo) / (hi - lo)).round() as usize).clamp(1, total - 1);
            let m_pos = total - m_neg;
            for i in (1..=m_neg).rev() {
                boundaries.push(lo * (i as f64 / m_neg as f64).powf(q));
            }
            boundaries.push(0.0);
            for i in 1..=m_pos {
                boundaries.push(hi * (i as f64 / m_pos as f64).powf(q));
            }
            boundaries[0] = lo;
            let last = boundaries.len() - 1;
            boundaries[last] = hi;
        } else if lo >= 0.0 {
            // Grade toward lo when it is the endpoint nearest the hyperplane.
            for i in 0..=total {
                boundaries.push(lo + (hi - lo) * (i as f64 / total as f64).powf(if lo == 0.0 { q } else { 1.0 }));
            }
        } else {
            for i in (0..=total).rev() {
                boundaries.push(hi + (lo - hi) * (i as f64 / total as f64).powf(if hi == 0.0 { q } else { 1.0 }));
            }
        }

        let gl = GaussLegendre::new(POINTS_PER_CELL.try_into().expect("nonzero"));
        let gj = if k > 0.0 {
            Some(GaussJacobi::new(
                POINTS_PER_CELL.try_into().expect("nonzero"),
                0.0.try_into().expect("alpha > -1"),
                (2.0 * k).try_into().expect("beta > -1"),
            ))
        } else {
            None
        };
        let two_k = 2.0_f64.powf(k);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for w in boundaries.windows(2) {
            let (a, b) = (w[0], w[1]);
            let h = b - a;
            let jacobi_cell = k > 0.0 && (a == 0.0 || b == 0.0);
            if jacobi_cell {
                let rule = gj.as_ref().unwrap();
                let jac = two_k * (0.5 * h).powf(2.0 * k + 1.0);
                for (&t, &wt) in rule.nodes().zip(rule.weights()) {
                    // (1+t) = 0 sits at the zero endpoint of the cell.
                    let x = if a == 0.0 {
                        0.5 * h * (1.0 + t)
                    } else {
                        -0.5 * h * (1.0 + t)
                    };
                    nodes.push(x);
                    weights.push(wt * jac);
                }
            } else {
                for (&t, &wt) in gl.nodes().zip(gl.weights()) {
                    let x = 0.5 * (a + b) + 0.5 * h * t;
                    let dens = if k > 0.0 {
                        two_k * x.abs().powf(2.0 * k)
                    } else {
                        1.0
                    };
                    nodes.push(x);
                    weights.push(wt * 0.5 * h * dens);
                }
            }
        }
        let mut order: Vec<usize> = (0..nodes.len()).collect();
        order.sort_by(|&i, &j| nodes[i].partial_cmp(&nodes[j]).unwrap());
        let nodes: Vec<f64> = order.iter().map(|&i| nodes[i]).collect();
        let weights: Vec<f64> = order.iter().map(|&i| weights[i]).collect();

        Ok(Axis {
            lo,
            hi,
            k,
            nodes,
            weights,
            boundaries,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Mass `int_lo^hi 2^k |x|^{2k} dx` carried by the axis weights.
    pub fn mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    /// Index of the mirror node `-x` on a symmetric axis.
    pub fn mirror_index(&self, i: usize) -> usize {
        self.nodes.len() - 1 - i
    }

    pub fn is_symmetric(&self) -> bool {
        if (self.lo + self.hi).abs() > 1e-12 {
            return false;
        }
        let n = self.nodes.len();
        (0..n).all(|i| (self.nodes[i] + self.nodes[n - 1 - i]).abs() < 1e-9)
    }
}

/// Default grading exponent for an axis of multiplicity `k`. Uniform for the
/// Lebesgue case; mild power grading otherwise (the Jacobi cells at the
/// hyperplane absorb the cusp, so stronger grading only starves the outer
/// cells needed by the oscillatory transform quadratures).
pub fn default_grading(k: f64) -> f64 {
    if k <= 0.0 {
        1.0
    } else {
        (1.0 + 2.0 * k).min(2.0)
    }
}

/// Tensor-product quadrature grid for `dw`.
#[derive(Debug)]
pub struct WeightedGrid {
    id: u64,
    root_system: Arc<RootSystem>,
    axes: Vec<Axis>,
    node_weights: Vec<f64>,
    product_weighted: bool,
    grading: Option<f64>,
    pub refinement_level: u32,
}

impl WeightedGrid {
    pub fn id(&self) -> u64 {
        self.id
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.root_system
    }

    pub fn axes(&self) -> &[Axis] {
        &self.axes
    }

    pub fn dimension(&self) -> usize {
        self.axes.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.axes.iter().map(|a| a.len()).product()
    }

    pub fn weight(&self, flat: usize) -> f64 {
        self.node_weights[flat]
    }

    pub fn weights(&self) -> &[f64] {
        &self.node_weights
    }

    pub fn is_product_weighted(&self) -> bool {
        self.product_weighted
    }

    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0usize; self.axes.len()];
        for ax in (0..self.axes.len()).rev() {
            let n = self.axes[ax].len();
            idx[ax] = flat % n;
            flat /= n;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        let mut flat = 0usize;
        for (ax, &i) in idx.iter().enumerate() {
            flat = flat * self.axes[ax].len() + i;
        }
        flat
    }

    pub fn node(&self, flat: usize) -> Vec<f64> {
        let idx = self.unflatten(flat);
        idx.iter()
            .enumerate()
            .map(|(ax, &i)| self.axes[ax].nodes[i])
            .collect()
    }

    pub fn total_mass(&self) -> f64 {
        self.node_weights.iter().sum()
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.axes.iter().map(|a| (a.lo, a.hi)).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        self.axes.iter().all(|a| a.is_symmetric())
    }

    /// Flat index of the node obtained by flipping the signs given per axis.
    pub fn flip_node(&self, flat: usize, signs: &[bool]) -> usize {
        let mut idx = self.unflatten(flat);
        for (ax, &flip) in signs.iter().enumerate() {
            if flip {
                idx[ax] = self.axes[ax].mirror_index(idx[ax]);
            }
        }
        self.flatten(&idx)
    }

    /// Same grid rebuilt with twice the points per axis.
    pub fn refine(&self) -> Result<WeightedGrid, QuadratureError> {
        let bounds = self.bounds();
        let points = 2 * self.axes[0].len();
        let mut g = build_grid_with(&self.root_system, &bounds, points, self.grading)?;
        g.refinement_level = self.refinement_level + 1;
        Ok(g)
    }
}

/// Builds the default grid for a root system on the given box.
pub fn build_grid(
    rs: &Arc<RootSystem>,
    bounds: &[(f64, f64)],
    points_per_axis: usize,
) -> Result<WeightedGrid, QuadratureError> {
    build_grid_with(rs, bounds, points_per_axis, None)
}

/// As `build_grid` with an explicit grading exponent (`None` = per-axis default).
pub fn build_grid_with(
    rs: &Arc<RootSystem>,
    bounds: &[(f64, f64)],
    points_per_axis: usize,
    grading: Option<f64>,
) -> Result<WeightedGrid, QuadratureError> {
    if bounds.len() != rs.dimension() {
        return Err(QuadratureError::DimensionMismatch);
    }
    if points_per_axis < 8 {
        return Err(QuadratureError::PointsTooFew(points_per_axis));
    }
    for (axis, &(lo, hi)) in bounds.iter().enumerate() {
        if !(hi > lo) {
            return Err(QuadratureError::BoxDegenerate { axis, lo, hi });
        }
    }
    let axis_k = rs.axis_multiplicities();
    let product_weighted = axis_k.is_some();
    let cells = (points_per_axis / POINTS_PER_CELL).max(2);
    let mut axes = Vec::new();
    for (j, &(lo, hi)) in bounds.iter().enumerate() {
        let k = axis_k.as_ref().map(|k| k[j]).unwrap_or(0.0);
        let q = grading.unwrap_or_else(|| default_grading(k));
        let mut ax = Axis::build(lo, hi, cells, k, q)?;
        ax.k = k;
        axes.push(ax);
    }
    let n: usize = axes.iter().map(|a| a.len()).product();
    let mut node_weights = vec![0.0; n];
    let mut grid = WeightedGrid {
        id: GRID_ID.fetch_add(1, Ordering::Relaxed),
        root_system: rs.clone(),
        axes,
        node_weights: Vec::new(),
        product_weighted,
        grading,
        refinement_level: 0,
    };
    for (flat, w) in node_weights.iter_mut().enumerate() {
        let idx = grid.unflatten(flat);
        let mut prod = 1.0;
        for (ax, &i) in idx.iter().enumerate() {
            prod *= grid.axes[ax].weights[i];
        }
        if !product_weighted {
            let x = grid.node(flat);
            prod *= rs.weight_density(&x);
        }
        *w = prod;
    }
    grid.node_weights = node_weights;
    Ok(grid)
}

/// `c_k = int exp(-||x||^2/2) dw(x)` by quadrature on `[-half_width, half_width]^N`.
pub fn normalization_constant(
    rs: &Arc<RootSystem>,
    half_width: f64,
    points_per_axis: usize,
) -> Result<f64, QuadratureError> {
    let bounds = vec![(-half_width, half_width); rs.dimension()];
    let grid = Arc::new(build_grid(rs, &bounds, points_per_axis)?);
    let f = GridFunction::from_real_fn(&grid, |x| (-0.5 * x.iter().map(|v| v * v).sum::<f64>()).exp());
    let value = f.integrate().re;
    // Crude per-axis Gaussian tail bound relative to the estimate.
    let kmax = rs
        .axis_multiplicities()
        .map(|k| k.iter().fold(0.0, |a: f64, &b| a.max(b)))
        .unwrap_or_else(|| rs.multiplicities().iter().sum());
    let l = half_width;
    let tail = (rs.dimension() as f64)
        * 4.0
        * 2.0f64.powf(kmax)
        * l.powf(2.0 * kmax)
        * (-0.5 * l * l).exp()
        * value.max(1.0);
    if tail > 1e-10 * value {
        return Err(QuadratureError::TailTooLarge);
    }
    Ok(value)
}

/// Exact `c_k` for a product system: `prod_j 2^{2 k_j + 1/2} Gamma(k_j + 1/2)`.
pub fn normalization_constant_closed(rs: &RootSystem) -> Option<f64> {
    let ks = rs.axis_multiplicities()?;
    Some(
        ks.iter()
            .map(|&k| 2.0_f64.powf(2.0 * k + 0.5) * crate::special::gamma(k + 0.5))
            .product(),
    )
}

/// `w(B(center, r))`. Centered balls use the exact polar factorization
/// `S_w r^N / N`. Off-center balls of product systems are reduced axis by
/// axis: the innermost interval mass has a closed antiderivative and the
/// outer integrals use the substitution `x = c + r sin(theta)` which removes
/// the square-root endpoint singularity. Non-product systems fall back to
/// tensor quadrature with indicator clipping and a refinement check.
pub fn ball_volume(rs: &Arc<RootSystem>, center: &[f64], r: f64) -> Result<f64, QuadratureError> {
    assert!(r > 0.0, "ball radius must be positive");
    if center.iter().all(|&c| c == 0.0) {
        let nn = rs.homogeneous_dimension();
        return Ok(sphere_mass(rs)? * r.powf(nn) / nn);
    }
    if let Some(ks) = rs.axis_multiplicities() {
        return Ok(ball_mass_product(&ks, center, r));
    }
    let value = ball_cartesian(rs, center, r, 64)?;
    let fine = ball_cartesian(rs, center, r, 128)?;
    let rel = ((fine - value) / fine.max(1e-300)).abs();
    if rel > 5e-2 {
        return Err(QuadratureError::QuadratureFailure(rel));
    }
    Ok(fine)
}

/// `int_a^b 2^k |x|^{2k} dx`.
pub fn weight_mass_interval(k: f64, a: f64, b: f64) -> f64 {
    let anti = |x: f64| {
        2.0_f64.powf(k) * x.signum() * x.abs().powf(2.0 * k + 1.0) / (2.0 * k + 1.0)
    };
    anti(b) - anti(a)
}

fn ball_mass_product(ks: &[f64], center: &[f64], r: f64) -> f64 {
    if ks.len() == 1 {
        return weight_mass_interval(ks[0], center[0] - r, center[0] + r);
    }
    let (k1, rest_k) = ks.split_first().unwrap();
    let (c1, rest_c) = center.split_first().unwrap();
    let two_k = 2.0_f64.powf(*k1);
    let f = |theta: f64| {
        let x = c1 + r * theta.sin();
        let s = r * theta.cos();
        if s <= 0.0 {
            return 0.0;
        }
        two_k * x.abs().powf(2.0 * k1) * ball_mass_product(rest_k, rest_c, s) * r * theta.cos()
    };
    // Split at the angle where x crosses the reflection hyperplane.
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut splits = vec![-half_pi, half_pi];
    if c1.abs() < r {
        splits.insert(1, (-c1 / r).asin());
    }
    let gl = GaussLegendre::new(8.try_into().expect("nonzero"));
    let mut total = 0.0;
    for w in splits.windows(2) {
        let (a, b) = (w[0], w[1]);
        let m = 24;
        for i in 0..m {
            // Cells graded toward both piece endpoints (cusp and sqrt edges).
            let t0 = graded_unit(i as f64 / m as f64);
            let t1 = graded_unit((i + 1) as f64 / m as f64);
            let (ca, cb) = (a + (b - a) * t0, a + (b - a) * t1);
            for (&t, &wt) in gl.nodes().zip(gl.weights()) {
                let th = 0.5 * (ca + cb) + 0.5 * (cb - ca) * t;
                total += wt * 0.5 * (cb - ca) * f(th);
            }
        }
    }
    total
}

/// Smooth map of `[0,1]` onto itself with vanishing derivative at both ends.
fn graded_unit(t: f64) -> f64 {
    t * t * (3.0 - 2.0 * t)
}

fn ball_cartesian(
    rs: &Arc<RootSystem>,
    center: &[f64],
    r: f64,
    points: usize,
) -> Result<f64, QuadratureError> {
    let bounds: Vec<(f64, f64)> = center.iter().map(|&c| (c - r, c + r)).collect();
    let grid = build_grid(rs, &bounds, points)?;
    let mut sum = 0.0;
    for flat in 0..grid.n_nodes() {
        let x = grid.node(flat);
        let d2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 <= r * r {
            sum += grid.weight(flat);
        }
    }
    Ok(sum)
}

/// Weighted unit-sphere mass `S_w`, so that `w(B(0,r)) = S_w r^N / N`.
pub fn sphere_mass(rs: &Arc<RootSystem>) -> Result<f64, QuadratureError> {
    if let Some(ck) = normalization_constant_closed(rs) {
        let nn = rs.homogeneous_dimension();
        return Ok(ck / (2.0_f64.powf(0.5 * nn - 1.0) * crate::special::gamma(0.5 * nn)));
    }
    if rs.dimension() == 2 {
        // Angular quadrature between consecutive root directions.
        let mut angles: Vec<f64> = Vec::new();
        for root in rs.roots() {
            let theta = root[1].atan2(root[0]) + std::f64::consts::FRAC_PI_2;
            let mut t = theta.rem_euclid(2.0 * std::f64::consts::PI);
            if t >= 2.0 * std::f64::consts::PI - 1e-12 {
                t = 0.0;
            }
            if !angles.iter().any(|a| (a - t).abs() < 1e-9) {
                angles.push(t);
            }
        }
        angles.sort_by(|a, b| a.partial_cmp(b).unwrap());
        if angles.is_empty() {
            return Ok(2.0 * std::f64::consts::PI);
        }
        let gl = GaussLegendre::new(48.try_into().expect("nonzero"));
        let mut total = 0.0;
        for i in 0..angles.len() {
            let a = angles[i];
            let b = if i + 1 < angles.len() {
                angles[i + 1]
            } else {
                angles[0] + 2.0 * std::f64::consts::PI
            };
            for (&t, &w) in gl.nodes().zip(gl.weights()) {
                let th = 0.5 * (a + b) + 0.5 * (b - a) * t;
                let x = [th.cos(), th.sin()];
                total += w * 0.5 * (b - a) * rs.weight_density(&x);
            }
        }
        Ok(total)
    } else {
        Err(QuadratureError::QuadratureFailure(f64::NAN))
    }
}

/// A complex-valued function sampled on a `WeightedGrid`.
#[derive(Clone, Debug)]
pub struct GridFunction {
    grid: Arc<WeightedGrid>,
    values: Vec<Complex64>,
}

impl GridFunction {
    pub fn new(grid: &Arc<WeightedGrid>, values: Vec<Complex64>) -> Self {
        assert_eq!(values.len(), grid.n_nodes());
        assert!(
            values.iter().all(|v| v.re.is_finite() && v.im.is_finite()),
            "grid function values must be finite"
        );
        GridFunction {
            grid: grid.clone(),
            values,
        }
    }

    pub fn from_fn(grid: &Arc<WeightedGrid>, f: impl Fn(&[f64]) -> Complex64) -> Self {
        let values = (0..grid.n_nodes()).map(|i| f(&grid.node(i))).collect();
        Self::new(grid, values)
    }

    pub fn from_real_fn(grid: &Arc<WeightedGrid>, f: impl Fn(&[f64]) -> f64) -> Self {
        Self::from_fn(grid, |x| Complex64::new(f(x), 0.0))
    }

    pub fn zeros(grid: &Arc<WeightedGrid>) -> Self {
        Self::new(grid, vec![Complex64::new(0.0, 0.0); grid.n_nodes()])
    }

    pub fn grid(&self) -> &Arc<WeightedGrid> {
        &self.grid
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [Complex64] {
        &mut self.values
    }

    pub fn same_grid(&self, other: &GridFunction) -> bool {
        self.grid.id() == other.grid.id()
    }

    /// `sum values * weights`, approximating `int f dw`.
    pub fn integrate(&self) -> Complex64 {
        self.values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, &w)| v * w)
            .sum()
    }

    /// `(int |f|^p dw)^{1/p}`; `p = inf` gives `max |values|`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        assert!(p >= 1.0, "lp_norm requires p >= 1");
        if p.is_infinite() {
            return self.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        }
        let s: f64 = self
            .values
            .iter()
            .zip(self.grid.weights())
            .map(|(v, &w)| v.norm().powf(p) * w)
            .sum();
        s.powf(1.0 / p)
    }

    pub fn l2_distance(&self, other: &GridFunction) -> Result<f64, QuadratureError> {
        if !self.same_grid(other) {
            return Err(QuadratureError::GridMismatch);
        }
        let s: f64 = self
            .values
            .iter()
            .zip(other.values.iter())
            .zip(self.grid.weights())
            .map(|((a, b), &w)| (a - b).norm_sqr() * w)
            .sum();
        Ok(s.sqrt())
    }

    pub fn scale(&self, c: Complex64) -> GridFunction {
        GridFunction {
            grid: self.grid.clone(),
            values: self.values.iter().map(|v| v * c).collect(),
        }
    }

    pub fn add(&self, other: &GridFunction) -> Result<GridFunction, QuadratureError> {
        if !self.same_grid(other) {
            return Err(QuadratureError::GridMismatch);
        }
        Ok(GridFunction {
            grid: self.grid.clone(),
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    pub fn sub(&self, other: &GridFunction) -> Result<GridFunction, QuadratureError> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// CSV export: `x1,..,xN,weight,re,im`, one row per node in flat order.
    pub fn export_csv(&self, out: &mut impl Write) -> Result<(), QuadratureError> {
        let n = self.grid.dimension();
        let mut header: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
        header.extend(["weight".into(), "re".into(), "im".into()]);
        writeln!(out, "{}", header.join(","))?;
        for (i, v) in self.values.iter().enumerate() {
            let x = self.grid.node(i);
            let coords: Vec<String> = x.iter().map(|c| format!("{c:.17e}")).collect();
            writeln!(
                out,
                "{},{:.17e},{:.17e},{:.17e}",
                coords.join(","),
                self.grid.weight(i),
                v.re,
                v.im
            )?;
        }
        Ok(())
    }

    /// CSV import onto an existing grid; node coordinates must match.
    pub fn import_csv(grid: &Arc<WeightedGrid>, input: &mut impl Read) -> Result<Self, QuadratureError> {
        let mut text = String::new();
        input.read_to_string(&mut text)?;
        let mut lines = text.lines();
        let _header = lines
            .next()
            .ok_or_else(|| QuadratureError::Format("empty csv".into()))?;
        let n = grid.dimension();
        let mut values = Vec::with_capacity(grid.n_nodes());
        for (row, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != n + 3 {
                return Err(QuadratureError::Format(format!(
                    "row {row}: expected {} fields, got {}",
                    n + 3,
                    fields.len()
                )));
            }
            let parse = |s: &str| -> Result<f64, QuadratureError> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|e| QuadratureError::Format(format!("row {row}: {e}")))
            };
            let x = grid.node(values.len());
            for (j, c) in x.iter().enumerate() {
                let got = parse(fields[j])?;
                if (got - c).abs() > 1e-9 * (1.0 + c.abs()) {
                    return Err(QuadratureError::Format(format!(
                        "row {row}: node coordinate {got} does not match grid node {c}"
                    )));
                }
            }
            let re = parse(fields[n + 1])?;
            let im = parse(fields[n + 2])?;
            values.push(Complex64::new(re, im));
        }
        if values.len() != grid.n_nodes() {
            return Err(QuadratureError::Format(format!(
                "expected {} rows, got {}",
                grid.n_nodes(),
                values.len()
            )));
        }
        Ok(Self::new(grid, values))
    }

    /// Compact binary layout: magic `DLGF`, version, dimension, node count,
    /// then little-endian f64 blocks: coordinates, weights, re, im.
    pub fn export_binary(&self, out: &mut impl Write) -> Result<(), QuadratureError> {
        out.write_all(b"DLGF")?;
        out.write_all(&1u32.to_le_bytes())?;
        out.write_all(&(self.grid.dimension() as u32).to_le_bytes())?;
        out.write_all(&(self.grid.n_nodes() as u64).to_le_bytes())?;
        for i in 0..self.grid.n_nodes() {
            for c in self.grid.node(i) {
                out.write_all(&c.to_le_bytes())?;
            }
        }
        for &w in self.grid.weights() {
            out.write_all(&w.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.re.to_le_bytes())?;
        }
        for v in &self.values {
            out.write_all(&v.im.to_le_bytes())?;
        }
        Ok(())
    }

    pub fn import_binary(grid: &Arc<WeightedGrid>, input: &mut impl Read) -> Result<Self, QuadratureError> {
        let mut magic = [0u8; 4];
        input.read_exact(&mut magic)?;
        if &magic != b"DLGF" {
            return Err(QuadratureError::Format("bad magic".into()));
        }
        let mut u32b = [0u8; 4];
        input.read_exact(&mut u32b)?;
        if u32::from_le_bytes(u32b) != 1 {
            return Err(QuadratureError::Format("unsupported version".into()));
        }
        input.read_exact(&mut u32b)?;
        let dim = u32::from_le_bytes(u32b) as usize;
        if dim != grid.dimension() {
            return Err(QuadratureError::Format("dimension mismatch".into()));
        }
        let mut u64b = [0u8; 8];
        input.read_exact(&mut u64b)?;
        let count = u64::from_le_bytes(u64b) as usize;
        if count != grid.n_nodes() {
            return Err(QuadratureError::Format("node count mismatch".into()));
        }
        let mut f64b = [0u8; 8];
        let mut read_f64 = |input: &mut dyn Read| -> Result<f64, QuadratureError> {
            input.read_exact(&mut f64b)?;
            Ok(f64::from_le_bytes(f64b))
        };
        for i in 0..count {
            let x = grid.node(i);
            for c in x {
                let got = read_f64(input)?;
                if (got - c).abs() > 1e-12 * (1.0 + c.abs()) {
                    return Err(QuadratureError::Format("node coordinates do not match".into()));
                }
            }
        }
        for i in 0..count {
            let _w = read_f64(input)?;
            let _ = i;
        }
        let mut re = Vec::with_capacity(count);
        for _ in 0..count {
            re.push(read_f64(input)?);
        }
        let mut values = Vec::with_capacity(count);
        for r in re {
            values.push(Complex64::new(r, 0.0));
        }
        for v in values.iter_mut() {
            v.im = read_f64(input)?;
        }
        Ok(Self::new(grid, values))
    }
}
