//! The Dunkl kernel, Dunkl operators, and the Dunkl transform.
//!
//! Supported root systems are products of rank-1 `Z_2` factors, where the
//! kernel factorizes axis by axis and the rank-1 factor has the
//! normalized-Bessel closed form
//!
//! ```text
//! E_k(x, y) = in(k - 1/2, xy) + xy/(2k+1) in(k + 1/2, xy)
//! ```
//!
//! (`in` as in [`crate::special`]). The transform
//! `F f(xi) = c_k^{-1} int E(-i xi, x) f(x) dw(x)` is evaluated as a dense
//! quadrature sum, factorized into per-axis matrix applications on the
//! tensor grid, with `c_k = prod_j 2^{2 k_j + 1/2} Gamma(k_j + 1/2)`.

use std::sync::Arc;

use num_complex::Complex64;
use thiserror::Error;

use crate::geometry::RootSystem;
use crate::quadrature::{GridFunction, QuadratureError, WeightedGrid};
use crate::special::{normalized_bessel_i, normalized_bessel_j, IN_MAX_ARG};

/// Relative boundary level at which transforms refuse the input. The
/// documented contract asks callers for decay below 1e-10; the error only
/// fires well above the quadrature noise floor of the default grids.
const BOUNDARY_TRIGGER: f64 = 1e-5;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("root system is not a product of rank-1 factors")]
    UnsupportedRootSystem,
    #[error("kernel argument {arg} exceeds the series domain (|x y| <= {IN_MAX_ARG})")]
    SeriesDivergence { arg: f64 },
    #[error("function carries mass {ratio:.3e} (relative) at the box boundary")]
    BoundaryMass { ratio: f64 },
    #[error("grid is not symmetric under the reflection group")]
    GridNotGSymmetric,
    #[error(transparent)]
    Quadrature(#[from] QuadratureError),
}

/// Rank-1 Dunkl kernel `E_k(u)` with `u = x y`, real arguments.
pub fn rank1_kernel(k: f64, u: f64) -> Result<f64, SpectralError> {
    if k == 0.0 {
        return Ok(u.exp());
    }
    let even = normalized_bessel_i(k - 0.5, u).ok_or(SpectralError::SeriesDivergence { arg: u })?;
    let odd = normalized_bessel_i(k + 0.5, u).ok_or(SpectralError::SeriesDivergence { arg: u })?;
    Ok(even + u / (2.0 * k + 1.0) * odd)
}

/// Rank-1 kernel with purely imaginary first argument: `E_k(i u)`.
pub fn rank1_kernel_imag(k: f64, u: f64) -> Complex64 {
    if k == 0.0 {
        return Complex64::new(u.cos(), u.sin());
    }
    Complex64::new(
        normalized_bessel_j(k - 0.5, u),
        u / (2.0 * k + 1.0) * normalized_bessel_j(k + 0.5, u),
    )
}

fn axis_multiplicities(rs: &RootSystem) -> Result<Vec<f64>, SpectralError> {
    rs.axis_multiplicities()
        .ok_or(SpectralError::UnsupportedRootSystem)
}

/// Dunkl kernel `E(x, z)` for real `x`, `z`, as the product of rank-1 factors.
pub fn dunkl_kernel(rs: &RootSystem, x: &[f64], z: &[f64]) -> Result<f64, SpectralError> {
    let ks = axis_multiplicities(rs)?;
    let mut prod = 1.0;
    for ((&k, &xj), &zj) in ks.iter().zip(x).zip(z) {
        prod *= rank1_kernel(k, xj * zj)?;
    }
    Ok(prod)
}

/// Dunkl kernel `E(i xi, x)` with purely imaginary first argument.
pub fn dunkl_kernel_imag(rs: &RootSystem, xi: &[f64], x: &[f64]) -> Result<Complex64, SpectralError> {
    let ks = axis_multiplicities(rs)?;
    let mut prod = Complex64::new(1.0, 0.0);
    for ((&k, &xij), &xj) in ks.iter().zip(xi).zip(x) {
        prod *= rank1_kernel_imag(k, xij * xj);
    }
    Ok(prod)
}

/// A space grid / frequency grid pair carrying the dense per-axis transform
/// matrices and the normalization constant.
pub struct SpectralPair {
    rs: Arc<RootSystem>,
    space: Arc<WeightedGrid>,
    freq: Arc<WeightedGrid>,
    ck: f64,
    axis_k: Vec<f64>,
    /// Forward matrices per axis: `E(-i xi x) w_x`, row-major `(n_freq, n_space)`.
    fwd: Vec<Vec<Complex64>>,
    /// Inverse matrices per axis: `E(i xi x) w_xi`, row-major `(n_space, n_freq)`.
    inv: Vec<Vec<Complex64>>,
}

impl SpectralPair {
    pub fn new(
        rs: &Arc<RootSystem>,
        space: Arc<WeightedGrid>,
        freq: Arc<WeightedGrid>,
    ) -> Result<Self, SpectralError> {
        let axis_k = axis_multiplicities(rs)?;
        let ck: f64 = axis_k
            .iter()
            .map(|&k| 2.0_f64.powf(2.0 * k + 0.5) * crate::special::gamma(k + 0.5))
            .product();
        let mut fwd = Vec::new();
        let mut inv = Vec::new();
        for (ax, &k) in axis_k.iter().enumerate() {
            let xs = &space.axes()[ax];
            let qs = &freq.axes()[ax];
            let mut m = vec![Complex64::default(); qs.len() * xs.len()];
            let mut mi = vec![Complex64::default(); xs.len() * qs.len()];
            for (r, &xi) in qs.nodes.iter().enumerate() {
                for (c, &x) in xs.nodes.iter().enumerate() {
                    m[r * xs.len() + c] = rank1_kernel_imag(k, xi * x).conj() * xs.weights[c];
                }
            }
            for (r, &x) in xs.nodes.iter().enumerate() {
                for (c, &xi) in qs.nodes.iter().enumerate() {
                    mi[r * qs.len() + c] = rank1_kernel_imag(k, xi * x) * qs.weights[c];
                }
            }
            fwd.push(m);
            inv.push(mi);
        }
        Ok(SpectralPair {
            rs: rs.clone(),
            space,
            freq,
            ck,
            axis_k,
            fwd,
            inv,
        })
    }

    pub fn root_system(&self) -> &Arc<RootSystem> {
        &self.rs
    }

    pub fn space_grid(&self) -> &Arc<WeightedGrid> {
        &self.space
    }

    pub fn freq_grid(&self) -> &Arc<WeightedGrid> {
        &self.freq
    }

    pub fn normalization(&self) -> f64 {
        self.ck
    }

    pub fn axis_multiplicities(&self) -> &[f64] {
        &self.axis_k
    }

    fn boundary_ratio(f: &GridFunction) -> f64 {
        let grid = f.grid();
        let dims: Vec<usize> = grid.axes().iter().map(|a| a.len()).collect();
        let sup = f.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        if sup == 0.0 {
            return 0.0;
        }
        let mut worst = 0.0_f64;
        for (flat, v) in f.values().iter().enumerate() {
            let idx = grid.unflatten(flat);
            if idx
                .iter()
                .zip(&dims)
                .any(|(&i, &n)| i == 0 || i + 1 == n)
            {
                worst = worst.max(v.norm());
            }
        }
        worst / sup
    }

    fn check_boundary(f: &GridFunction) -> Result<(), SpectralError> {
        let ratio = Self::boundary_ratio(f);
        if ratio > BOUNDARY_TRIGGER {
            return Err(SpectralError::BoundaryMass { ratio });
        }
        Ok(())
    }

    /// `F f(xi) = c_k^{-1} int E(-i xi, x) f(x) dw(x)`.
    pub fn forward(&self, f: &GridFunction) -> Result<GridFunction, SpectralError> {
        if f.grid().id() != self.space.id() {
            return Err(QuadratureError::GridMismatch.into());
        }
        Self::check_boundary(f)?;
        let out = self.apply_axes(&self.fwd, f.values(), true);
        let scale = Complex64::new(1.0 / self.ck, 0.0);
        Ok(GridFunction::new(
            &self.freq,
            out.into_iter().map(|v| v * scale).collect(),
        ))
    }

    /// `F^{-1} g(x) = c_k^{-1} int E(i xi, x) g(xi) dw(xi)`.
    pub fn inverse(&self, g: &GridFunction) -> Result<GridFunction, SpectralError> {
        if g.grid().id() != self.freq.id() {
            return Err(QuadratureError::GridMismatch.into());
        }
        Self::check_boundary(g)?;
        let out = self.apply_axes(&self.inv, g.values(), false);
        let scale = Complex64::new(1.0 / self.ck, 0.0);
        Ok(GridFunction::new(
            &self.space,
            out.into_iter().map(|v| v * scale).collect(),
        ))
    }

    /// Applies the per-axis matrices as mode products over the tensor grid.
    fn apply_axes(&self, mats: &[Vec<Complex64>], values: &[Complex64], forward: bool) -> Vec<Complex64> {
        let in_dims: Vec<usize> = if forward {
            self.space.axes().iter().map(|a| a.len()).collect()
        } else {
            self.freq.axes().iter().map(|a| a.len()).collect()
        };
        let out_dims: Vec<usize> = if forward {
            self.freq.axes().iter().map(|a| a.len()).collect()
        } else {
            self.space.axes().iter().map(|a| a.len()).collect()
        };
        let n_axes = in_dims.len();
        let mut data = values.to_vec();
        let mut dims = in_dims.clone();
        for ax in 0..n_axes {
            let m_in = dims[ax];
            let m_out = out_dims[ax];
            let pre: usize = dims[..ax].iter().product();
            let post: usize = dims[ax + 1..].iter().product();
            let mat = &mats[ax];
            let mut out = vec![Complex64::default(); pre * m_out * post];
            for p in 0..pre {
                for o in 0..m_out {
                    let row = &mat[o * m_in..(o + 1) * m_in];
                    let out_base = (p * m_out + o) * post;
                    for (i, &m) in row.iter().enumerate() {
                        let in_base = (p * m_in + i) * post;
                        for q in 0..post {
                            out[out_base + q] += m * data[in_base + q];
                        }
                    }
                }
            }
            data = out;
            dims[ax] = m_out;
        }
        data
    }

    /// `F^{-1}(-||xi||^2 F f)`, the Dunkl Laplacian through its multiplier.
    pub fn laplacian(&self, f: &GridFunction) -> Result<GridFunction, SpectralError> {
        let g = self.forward(f)?;
        let mut vals = g.values().to_vec();
        for (flat, v) in vals.iter_mut().enumerate() {
            let xi = self.freq.node(flat);
            let n2: f64 = xi.iter().map(|a| a * a).sum();
            *v *= Complex64::new(-n2, 0.0);
        }
        self.inverse(&GridFunction::new(&self.freq, vals))
    }

    /// Pointwise multiplication on the frequency side: `F^{-1}(m . F f)`.
    pub fn apply_multiplier(
        &self,
        f: &GridFunction,
        multiplier: impl Fn(&[f64]) -> Complex64,
    ) -> Result<GridFunction, SpectralError> {
        let g = self.forward(f)?;
        let mut vals = g.values().to_vec();
        for (flat, v) in vals.iter_mut().enumerate() {
            *v *= multiplier(&self.freq.node(flat));
        }
        self.inverse(&GridFunction::new(&self.freq, vals))
    }
}

/// Finite-difference weights on arbitrary nodes (Fornberg's algorithm):
/// weights for the `m`-th derivative at `x0` from samples at `nodes`.
pub fn fd_weights(nodes: &[f64], x0: f64, m: usize) -> Vec<f64> {
    let n = nodes.len();
    let mut c = vec![vec![0.0; m + 1]; n];
    let mut c1 = 1.0;
    let mut c4 = nodes[0] - x0;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = nodes[i] - x0;
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
    c.iter().map(|row| row[m]).collect()
}

/// Directional derivative along axis `ax` by 7-point nonuniform stencils.
fn partial_axis(f: &GridFunction, ax: usize) -> Vec<Complex64> {
    let grid = f.grid();
    let nodes = &grid.axes()[ax].nodes;
    let n = nodes.len();
    let mut out = vec![Complex64::default(); f.values().len()];
    let width = 7.min(n);
    for flat in 0..f.values().len() {
        let idx = grid.unflatten(flat);
        let i = idx[ax];
        let start = i.saturating_sub(width / 2).min(n - width);
        let stencil = &nodes[start..start + width];
        let w = fd_weights(stencil, nodes[i], 1);
        let mut acc = Complex64::default();
        let mut id2 = idx.clone();
        for (s, &ws) in w.iter().enumerate() {
            id2[ax] = start + s;
            acc += f.values()[grid.flatten(&id2)] * ws;
        }
        out[flat] = acc;
    }
    out
}

/// The Dunkl operator `T_xi f` on a `G`-symmetric product grid:
/// directional derivative plus the reflection-difference terms, with the
/// removable singularity near each hyperplane replaced by the differenced
/// limit `2 d_j f`.
pub fn dunkl_operator(
    rs: &RootSystem,
    xi: &[f64],
    f: &GridFunction,
) -> Result<GridFunction, SpectralError> {
    let ks = axis_multiplicities(rs)?;
    let grid = f.grid();
    if !grid.is_symmetric() {
        return Err(SpectralError::GridNotGSymmetric);
    }
    let n_axes = grid.dimension();
    let partials: Vec<Vec<Complex64>> = (0..n_axes)
        .map(|ax| {
            if xi[ax] != 0.0 || ks[ax] > 0.0 {
                partial_axis(f, ax)
            } else {
                Vec::new()
            }
        })
        .collect();
    let mut out = vec![Complex64::default(); f.values().len()];
    for (flat, o) in out.iter_mut().enumerate() {
        let idx = grid.unflatten(flat);
        let mut acc = Complex64::default();
        for ax in 0..n_axes {
            if xi[ax] != 0.0 {
                acc += partials[ax][flat] * xi[ax];
            }
            if ks[ax] > 0.0 && xi[ax] != 0.0 {
                let x = grid.axes()[ax].nodes[idx[ax]];
                let mut mid = idx.clone();
                mid[ax] = grid.axes()[ax].mirror_index(idx[ax]);
                let mirrored = f.values()[grid.flatten(&mid)];
                // local spacing at this node
                let i = idx[ax];
                let nodes = &grid.axes()[ax].nodes;
                let spacing = if i + 1 < nodes.len() {
                    nodes[i + 1] - nodes[i]
                } else {
                    nodes[i] - nodes[i - 1]
                };
                let diff_term = if x.abs() < 0.5 * spacing.abs() {
                    partials[ax][flat] * 2.0
                } else {
                    (f.values()[flat] - mirrored) / x
                };
                acc += diff_term * (ks[ax] * xi[ax]);
            }
        }
        *o = acc;
    }
    Ok(GridFunction::new(grid, out))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::build_grid;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z2(k: f64) -> Arc<RootSystem> {
        Arc::new(RootSystem::preset("z2", &[k]).unwrap())
    }

    fn pair1d(k: f64, half: f64, pts: usize) -> SpectralPair {
        let rs = z2(k);
        let g = Arc::new(build_grid(&rs, &[(-half, half)], pts).unwrap());
        let q = Arc::new(build_grid(&rs, &[(-half, half)], pts).unwrap());
        SpectralPair::new(&rs, g, q).unwrap()
    }

    #[test]
    fn kernel_at_zero_is_one() {
        let rs = Arc::new(RootSystem::preset("z2^2", &[0.5, 1.5]).unwrap());
        for y in [[0.3, -2.0], [5.0, 0.0]] {
            assert_relative_eq!(
                dunkl_kernel(&rs, &[0.0, 0.0], &y).unwrap(),
                1.0,
                epsilon = 1e-15
            );
        }
    }

    #[test]
    fn kernel_reduces_to_exponential_at_k_zero() {
        let rs = Arc::new(RootSystem::preset("z2^2", &[0.0, 0.0]).unwrap());
        let got = dunkl_kernel(&rs, &[1.0, 1.0], &[2.0, 0.0]).unwrap();
        assert_relative_eq!(got, std::f64::consts::E.powi(2), max_relative = 1e-14);
    }

    #[test]
    fn kernel_matches_reference_values() {
        // mpmath: E_k(z) = in(k-1/2, z) + z/(2k+1) in(k+1/2, z)
        let cases = [
            (0.5, 0.91, 1.721_741_123_863_186_2),
            (1.0, 0.91, 1.473_051_987_325_918_1),
            (1.0, -6.0, 5.602_730_134_922_756_4),
            (2.5, -6.0, 3.697_012_092_844_6),
            (2.5, 20.0, 1_478_104.031_239_207_5),
        ];
        for (k, z, want) in cases {
            assert_relative_eq!(rank1_kernel(k, z).unwrap(), want, max_relative = 1e-12);
        }
        let imag_cases = [
            (0.5, 0.99, 0.769_581_880_965_168_5, 0.436_782_895_794_824_8),
            (1.0, 0.99, 0.844_470_685_455_071_2, 0.298_768_509_973_215_8),
            (1.0, 15.0, 0.043_352_522_677_141_124, 0.053_536_029_035_730_83),
            (2.5, 200.0, 2.978_878_909_748_262e-6, 1.092_048_521_467_061e-5),
        ];
        for (k, u, re, im) in imag_cases {
            let got = rank1_kernel_imag(k, u);
            assert_relative_eq!(got.re, re, max_relative = 1e-10, epsilon = 1e-13);
            assert_relative_eq!(got.im, im, max_relative = 1e-10, epsilon = 1e-13);
        }
    }

    #[test]
    fn kernel_imag_is_bounded_by_one() {
        let rs = Arc::new(RootSystem::preset("z2^2", &[0.5, 2.5]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..500 {
            let xi = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
            let x = [rng.gen_range(-20.0..20.0), rng.gen_range(-20.0..20.0)];
            let v = dunkl_kernel_imag(&rs, &xi, &x).unwrap();
            assert!(v.norm() <= 1.0 + 1e-9, "|E(i xi, x)| = {}", v.norm());
        }
    }

    #[test]
    fn kernel_symmetry_and_derivative_at_zero() {
        let rs = z2(1.3);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let x = [rng.gen_range(-3.0..3.0)];
            let y = [rng.gen_range(-3.0..3.0)];
            let a = dunkl_kernel(&rs, &x, &y).unwrap();
            let b = dunkl_kernel(&rs, &y, &x).unwrap();
            assert_relative_eq!(a, b, max_relative = 1e-10);
        }
        // d/dx E(x, y) at x = 0 equals y/(2k+1)
        let y = 1.7;
        let h = 1e-5;
        let k = 1.3;
        let d = (rank1_kernel(k, h * y).unwrap() - rank1_kernel(k, -h * y).unwrap()) / (2.0 * h);
        assert_relative_eq!(d, y / (2.0 * k + 1.0), max_relative = 1e-8);
    }

    #[test]
    fn gaussian_is_self_dual() {
        for k in [0.0, 1.0] {
            let sp = pair1d(k, 16.0, 512);
            let g = GridFunction::from_real_fn(sp.space_grid(), |x| (-0.5 * x[0] * x[0]).exp());
            let fg = sp.forward(&g).unwrap();
            let want = GridFunction::from_real_fn(sp.freq_grid(), |x| (-0.5 * x[0] * x[0]).exp());
            let err = fg.sub(&want).unwrap().lp_norm(2.0) / want.lp_norm(2.0);
            assert!(err < 1e-8, "k={k}: rel err {err}");
        }
    }

    #[test]
    fn hermite_eigenfunction() {
        // F(x e^{-x^2/2}) = -i xi e^{-xi^2/2} for every multiplicity.
        for k in [0.0, 0.5, 1.0, 2.5] {
            let sp = pair1d(k, 16.0, 512);
            let f = GridFunction::from_real_fn(sp.space_grid(), |x| x[0] * (-0.5 * x[0] * x[0]).exp());
            let ff = sp.forward(&f).unwrap();
            let want = GridFunction::from_fn(sp.freq_grid(), |x| {
                Complex64::new(0.0, -x[0] * (-0.5 * x[0] * x[0]).exp())
            });
            let err = ff.sub(&want).unwrap().lp_norm(2.0) / want.lp_norm(2.0);
            assert!(err < 1e-7, "k={k}: rel err {err}");
        }
    }

    #[test]
    fn classical_transform_pairs_at_k_zero() {
        let sp = pair1d(0.0, 16.0, 512);
        // modulated Gaussian
        let b = 2.5;
        let f = GridFunction::from_real_fn(sp.space_grid(), |x| {
            (-0.5 * x[0] * x[0]).exp() * (b * x[0]).cos()
        });
        let ff = sp.forward(&f).unwrap();
        let want = GridFunction::from_real_fn(sp.freq_grid(), |x| {
            0.5 * ((-0.5 * (x[0] - b) * (x[0] - b)).exp() + (-0.5 * (x[0] + b) * (x[0] + b)).exp())
        });
        let err = ff.sub(&want).unwrap().lp_norm(2.0) / want.lp_norm(2.0);
        assert!(err < 1e-8, "rel err {err}");
        // shifted Gaussian picks up a phase
        let a = 1.25;
        let f = GridFunction::from_real_fn(sp.space_grid(), |x| {
            (-0.5 * (x[0] - a) * (x[0] - a)).exp()
        });
        let ff = sp.forward(&f).unwrap();
        let want = GridFunction::from_fn(sp.freq_grid(), |x| {
            Complex64::from_polar(1.0, -a * x[0]) * (-0.5 * x[0] * x[0]).exp()
        });
        let err = ff.sub(&want).unwrap().lp_norm(2.0) / want.lp_norm(2.0);
        assert!(err < 1e-8, "rel err {err}");
    }

    #[test]
    fn plancherel_and_round_trip() {
        for k in [0.0, 0.5, 1.0, 2.5] {
            let sp = pair1d(k, 16.0, 512);
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            for _ in 0..3 {
                let (c1, c2, s, a): (f64, f64, f64, f64) = (
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(-1.0..1.0),
                    rng.gen_range(0.8..1.5),
                    rng.gen_range(-2.0..2.0),
                );
                let f = GridFunction::from_fn(sp.space_grid(), |x| {
                    let e = (-0.5 * (x[0] - a) * (x[0] - a) / (s * s)).exp();
                    Complex64::new(c1 * e, c2 * e * x[0].tanh())
                });
                let ff = sp.forward(&f).unwrap();
                assert_relative_eq!(ff.lp_norm(2.0), f.lp_norm(2.0), max_relative = 1e-6);
                let back = sp.inverse(&ff).unwrap();
                let err = back.sub(&f).unwrap().lp_norm(2.0) / f.lp_norm(2.0);
                assert!(err < 1e-6, "k={k}: roundtrip err {err}");
            }
        }
    }

    #[test]
    fn plancherel_in_two_dimensions() {
        let rs = Arc::new(RootSystem::preset("z2^2", &[1.0, 1.0]).unwrap());
        let mk = |pts: usize| {
            let g = Arc::new(build_grid(&rs, &[(-8.0, 8.0), (-8.0, 8.0)], pts).unwrap());
            let q = Arc::new(build_grid(&rs, &[(-8.0, 8.0), (-8.0, 8.0)], pts).unwrap());
            SpectralPair::new(&rs, g, q).unwrap()
        };
        let test_fn = |x: &[f64]| {
            (-0.5 * (x[0] * x[0] + x[1] * x[1])).exp() * (1.0 + 0.3 * x[0] * x[1])
        };
        // isometry at the desk-scale default resolution
        let sp = mk(96);
        let f = GridFunction::from_real_fn(sp.space_grid(), test_fn);
        let ff = sp.forward(&f).unwrap();
        assert_relative_eq!(ff.lp_norm(2.0), f.lp_norm(2.0), max_relative = 1e-6);
        // round trip needs one refinement to clear the 1e-6 noise floor
        let sp = mk(128);
        let f = GridFunction::from_real_fn(sp.space_grid(), test_fn);
        let ff = sp.forward(&f).unwrap();
        let back = sp.inverse(&ff).unwrap();
        assert!(back.sub(&f).unwrap().lp_norm(2.0) / f.lp_norm(2.0) < 1e-6);
    }

    #[test]
    fn boundary_mass_is_rejected() {
        let sp = pair1d(1.0, 16.0, 128);
        let f = GridFunction::from_real_fn(sp.space_grid(), |_| 1.0);
        assert!(matches!(
            sp.forward(&f),
            Err(SpectralError::BoundaryMass { .. })
        ));
    }

    #[test]
    fn dunkl_operator_examples() {
        // k = 0: plain derivative of x^2 (compactly supported version)
        let rs = z2(0.0);
        let g = Arc::new(build_grid(&rs, &[(-8.0, 8.0)], 256).unwrap());
        let f = GridFunction::from_real_fn(&g, |x| x[0] * x[0] * (-0.05 * x[0] * x[0]).exp());
        let tf = dunkl_operator(&rs, &[1.0], &f).unwrap();
        // compare on the inner half
        for flat in 0..g.n_nodes() {
            let x = g.node(flat)[0];
            if x.abs() < 3.0 {
                let want = (2.0 * x - 0.1 * x * x * x) * (-0.05 * x * x).exp();
                assert_relative_eq!(tf.values()[flat].re, want, epsilon = 1e-5, max_relative = 1e-4);
            }
        }

        // rank-1, f(x) = x: T f = 1 + 2k
        let rs = z2(1.0);
        let g = Arc::new(build_grid(&rs, &[(-2.0, 2.0)], 128).unwrap());
        let f = GridFunction::from_real_fn(&g, |x| x[0]);
        let tf = dunkl_operator(&rs, &[1.0], &f).unwrap();
        for flat in 0..g.n_nodes() {
            assert_relative_eq!(tf.values()[flat].re, 3.0, epsilon = 1e-8, max_relative = 1e-7);
        }

        // even f: difference term vanishes, T f = f'
        let f = GridFunction::from_real_fn(&g, |x| (x[0] * x[0]).cos());
        let tf = dunkl_operator(&rs, &[1.0], &f).unwrap();
        for flat in 0..g.n_nodes() {
            let x = g.node(flat)[0];
            if x.abs() < 1.5 {
                let want = -2.0 * x * (x * x).sin();
                assert_relative_eq!(tf.values()[flat].re, want, epsilon = 1e-6, max_relative = 1e-4);
            }
        }
    }

    #[test]
    fn dunkl_kernel_solves_defining_system() {
        // T_xi E(., y) = <xi, y> E(., y), sup over the inner half <= 1e-5
        let k = 1.0;
        let rs = z2(k);
        let g = Arc::new(build_grid(&rs, &[(-8.0, 8.0)], 512).unwrap());
        let y = 0.9;
        let e = GridFunction::from_real_fn(&g, |x| rank1_kernel(k, x[0] * y).unwrap());
        let te = dunkl_operator(&rs, &[1.0], &e).unwrap();
        let mut sup = 0.0_f64;
        for flat in 0..g.n_nodes() {
            let x = g.node(flat)[0];
            if x.abs() <= 4.0 {
                let resid = (te.values()[flat] - e.values()[flat] * y).norm();
                sup = sup.max(resid);
            }
        }
        assert!(sup <= 1e-5, "defining-system residual {sup}");
    }

    #[test]
    fn leibniz_rule_for_radial_second_factor() {
        let k = 0.7;
        let rs = z2(k);
        let g = Arc::new(build_grid(&rs, &[(-8.0, 8.0)], 512).unwrap());
        let f = GridFunction::from_real_fn(&g, |x| x[0] * (-0.3 * x[0] * x[0]).exp());
        let radial = |x: &[f64]| (-0.5 * x[0] * x[0]).exp();
        let gfun = GridFunction::from_real_fn(&g, radial);
        let prod = GridFunction::from_real_fn(&g, |x| {
            x[0] * (-0.3 * x[0] * x[0]).exp() * radial(x)
        });
        let lhs = dunkl_operator(&rs, &[1.0], &prod).unwrap();
        let tf = dunkl_operator(&rs, &[1.0], &f).unwrap();
        let tg = dunkl_operator(&rs, &[1.0], &gfun).unwrap();
        let mut sup = 0.0_f64;
        for flat in 0..g.n_nodes() {
            let x = g.node(flat)[0];
            if x.abs() < 4.0 {
                let rhs = f.values()[flat] * tg.values()[flat] + gfun.values()[flat] * tf.values()[flat];
                sup = sup.max((lhs.values()[flat] - rhs).norm());
            }
        }
        assert!(sup <= 1e-5, "Leibniz residual {sup}");
    }

    #[test]
    fn skew_symmetry_of_dunkl_operator() {
        let k = 1.0;
        let rs = z2(k);
        let g = Arc::new(build_grid(&rs, &[(-12.0, 12.0)], 512).unwrap());
        let f = GridFunction::from_real_fn(&g, |x| (-x[0] * x[0]).exp());
        let h = GridFunction::from_real_fn(&g, |x| x[0] * (-0.7 * x[0] * x[0]).exp());
        let tf = dunkl_operator(&rs, &[1.0], &f).unwrap();
        let th = dunkl_operator(&rs, &[1.0], &h).unwrap();
        let lhs: Complex64 = tf
            .values()
            .iter()
            .zip(h.values())
            .zip(g.weights())
            .map(|((a, b), &w)| a * b * w)
            .sum();
        let rhs: Complex64 = f
            .values()
            .iter()
            .zip(th.values())
            .zip(g.weights())
            .map(|((a, b), &w)| a * b * w)
            .sum();
        assert_relative_eq!(lhs.re, -rhs.re, max_relative = 1e-5);
    }

    #[test]
    fn laplacian_matches_classical_and_squared_operators() {
        // k = 0: second derivative of a Gaussian
        let sp = pair1d(0.0, 16.0, 512);
        let f = GridFunction::from_real_fn(sp.space_grid(), |x| (-0.5 * x[0] * x[0]).exp());
        let lf = sp.laplacian(&f).unwrap();
        let mut worst = 0.0_f64;
        for flat in 0..sp.space_grid().n_nodes() {
            let x = sp.space_grid().node(flat)[0];
            if x.abs() < 6.0 {
                let want = (x * x - 1.0) * (-0.5 * x * x).exp();
                worst = worst.max((lf.values()[flat].re - want).abs());
            }
        }
        assert!(worst < 1e-4, "classical Laplacian residual {worst}");

        // k = 1: against T^2 computed by differencing
        let k = 1.0;
        let sp = pair1d(k, 16.0, 512);
        let rs = z2(k);
        let f = GridFunction::from_real_fn(sp.space_grid(), |x| (-0.6 * x[0] * x[0]).exp());
        let lf = sp.laplacian(&f).unwrap();
        let t1 = dunkl_operator(&rs, &[1.0], &f).unwrap();
        let t2 = dunkl_operator(&rs, &[1.0], &t1).unwrap();
        let num = lf.sub(&t2).unwrap();
        let mut err2 = 0.0;
        let mut norm2 = 0.0;
        for flat in 0..sp.space_grid().n_nodes() {
            let x = sp.space_grid().node(flat)[0];
            if x.abs() < 6.0 {
                let w = sp.space_grid().weight(flat);
                err2 += num.values()[flat].norm_sqr() * w;
                norm2 += lf.values()[flat].norm_sqr() * w;
            }
        }
        let rel = (err2 / norm2).sqrt();
        assert!(rel < 1e-3, "laplacian vs T^2 rel err {rel}");
    }

    #[test]
    fn narrow_band_is_near_eigenfunction() {
        let sp = pair1d(1.0, 16.0, 512);
        let rho = 4.0;
        // bump at ||xi|| = rho on the frequency side; the width trades
        // eigenvalue spread against spatial decay
        let sigma = 0.45;
        let bump = GridFunction::from_real_fn(sp.freq_grid(), |xi| {
            let d = (xi[0].abs() - rho) / sigma;
            (-0.5 * d * d).exp()
        });
        let f = sp.inverse(&bump).unwrap();
        let lf = sp.laplacian(&f).unwrap();
        let want = f.scale(Complex64::new(-rho * rho, 0.0));
        let err = lf.sub(&want).unwrap().lp_norm(2.0) / want.lp_norm(2.0);
        assert!(err < 2.0 * sigma / rho, "narrow-band eigenfunction err {err}");
    }

    #[test]
    fn corollary_lipschitz_bound_of_kernel() {
        // |E(i xi, x) - 1| <= C ||x|| ||xi|| with a fitted C stable under
        // sample refinement
        let rs = Arc::new(RootSystem::preset("z2^2", &[0.5, 1.5]).unwrap());
        let fit = |n: usize| -> f64 {
            let mut rng = ChaCha8Rng::seed_from_u64(5);
            let mut c: f64 = 0.0;
            for _ in 0..n {
                let xi = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
                let x = [rng.gen_range(-4.0..4.0), rng.gen_range(-4.0..4.0)];
                let e = dunkl_kernel_imag(&rs, &xi, &x).unwrap();
                let nx = (x[0] * x[0] + x[1] * x[1]).sqrt();
                let nxi = (xi[0] * xi[0] + xi[1] * xi[1]).sqrt();
                if nx * nxi > 1e-9 {
                    c = c.max((e - Complex64::new(1.0, 0.0)).norm() / (nx * nxi));
                }
            }
            c
        };
        let c1 = fit(2000);
        let c2 = fit(4000);
        assert!(c1.is_finite() && c1 > 0.0);
        assert!((c2 - c1).abs() / c1 <= 0.10, "drift {} vs {}", c1, c2);
    }
}
