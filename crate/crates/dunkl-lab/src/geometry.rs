//! Root systems, reflection groups, and the geometry of the weighted measure.
//!
//! A normalized root system is a finite set `R` of vectors of norm `sqrt(2)`
//! closed under its own reflections, together with a `G`-invariant
//! multiplicity `k >= 0` per root. It determines the measure
//! `dw(x) = prod_{alpha in R} |<x, alpha>|^{k(alpha)} dx`, the homogeneous
//! dimension `N + sum k(alpha)`, and the orbit distance
//! `d(x, y) = min_{sigma in G} ||sigma(x) - y||`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Hard cap on the enumerated reflection group; desk-scale groups are tiny,
/// so hitting the cap means the input was not a root system.
pub const GROUP_CAP: usize = 1024;

/// Per-coordinate tolerance when identifying vectors under reflections.
const VEC_EQ_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum GeometryError {
    #[error("root {index} has squared norm {norm_sq}, expected 2")]
    NotNormalized { index: usize, norm_sq: f64 },
    #[error("reflection of root {root} by root {mirror} leaves the root set")]
    NotClosed { root: usize, mirror: usize },
    #[error("root {index} carries negative multiplicity {value}")]
    NegativeMultiplicity { index: usize, value: f64 },
    #[error("multiplicity is not invariant under the reflection group (roots {a} and {b})")]
    NotGInvariant { a: usize, b: usize },
    #[error("zero vector cannot define a reflection")]
    ZeroRoot,
    #[error("reflection group exceeded {GROUP_CAP} elements; input is not a root system")]
    GroupTooLarge,
    #[error("roots and multiplicities have mismatched lengths ({roots} vs {mults})")]
    LengthMismatch { roots: usize, mults: usize },
    #[error("root {index} has dimension {got}, expected {expected}")]
    DimensionMismatch { index: usize, got: usize, expected: usize },
    #[error("unknown preset `{0}`; available: z2, z2^2, z2^3")]
    UnknownPreset(String),
    #[error("preset `{name}` takes {expected} multiplicity value(s), got {got}")]
    PresetArity { name: String, expected: usize, got: usize },
}

/// Reflection in the hyperplane orthogonal to `alpha`:
/// `x - 2 <x,alpha>/||alpha||^2 alpha`.
pub fn reflect(alpha: &[f64], x: &[f64]) -> Result<Vec<f64>, GeometryError> {
    let norm_sq: f64 = alpha.iter().map(|a| a * a).sum();
    if norm_sq == 0.0 {
        return Err(GeometryError::ZeroRoot);
    }
    let dot: f64 = alpha.iter().zip(x).map(|(a, v)| a * v).sum();
    let c = 2.0 * dot / norm_sq;
    Ok(x.iter().zip(alpha).map(|(v, a)| v - c * a).collect())
}

/// A validated normalized root system with its enumerated reflection group.
#[derive(Clone, Debug)]
pub struct RootSystem {
    dimension: usize,
    roots: Vec<Vec<f64>>,
    multiplicities: Vec<f64>,
    /// Row-major `N x N` orthogonal matrices; `group[0]` is the identity.
    group: Vec<Vec<f64>>,
}

/// Plain serializable form of a root system (the on-disk document).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RootSystemDoc {
    pub dimension: usize,
    pub roots: Vec<Vec<f64>>,
    pub multiplicity: Vec<f64>,
}

impl RootSystem {
    /// Validates the input and enumerates the generated reflection group.
    pub fn new(roots: Vec<Vec<f64>>, multiplicities: Vec<f64>) -> Result<Self, GeometryError> {
        if roots.len() != multiplicities.len() {
            return Err(GeometryError::LengthMismatch {
                roots: roots.len(),
                mults: multiplicities.len(),
            });
        }
        if roots.is_empty() {
            return Err(GeometryError::ZeroRoot);
        }
        let dimension = roots[0].len();
        for (i, r) in roots.iter().enumerate() {
            if r.len() != dimension {
                return Err(GeometryError::DimensionMismatch {
                    index: i,
                    got: r.len(),
                    expected: dimension,
                });
            }
            let norm_sq: f64 = r.iter().map(|a| a * a).sum();
            if norm_sq == 0.0 {
                return Err(GeometryError::ZeroRoot);
            }
            if (norm_sq - 2.0).abs() > 1e-12 {
                return Err(GeometryError::NotNormalized { index: i, norm_sq });
            }
        }
        for (i, m) in multiplicities.iter().enumerate() {
            if *m < 0.0 || !m.is_finite() {
                return Err(GeometryError::NegativeMultiplicity { index: i, value: *m });
            }
        }
        // Closure of the root set under its own reflections.
        for (j, mirror) in roots.iter().enumerate() {
            for (i, r) in roots.iter().enumerate() {
                let image = reflect(mirror, r)?;
                let found = roots.iter().position(|s| vec_close(s, &image));
                match found {
                    None => return Err(GeometryError::NotClosed { root: i, mirror: j }),
                    Some(t) => {
                        if (multiplicities[t] - multiplicities[i]).abs() > 1e-12 {
                            return Err(GeometryError::NotGInvariant { a: i, b: t });
                        }
                    }
                }
            }
        }
        let group = enumerate_group(&roots, dimension)?;
        Ok(RootSystem {
            dimension,
            roots,
            multiplicities,
            group,
        })
    }

    /// Built-in presets: `z2` (rank 1), `z2^2`, `z2^3`, each a product of
    /// rank-1 factors with one multiplicity value per axis.
    pub fn preset(name: &str, k: &[f64]) -> Result<Self, GeometryError> {
        let n = match name {
            "z2" => 1,
            "z2^2" => 2,
            "z2^3" => 3,
            other => return Err(GeometryError::UnknownPreset(other.to_string())),
        };
        if k.len() != n {
            return Err(GeometryError::PresetArity {
                name: name.to_string(),
                expected: n,
                got: k.len(),
            });
        }
        let mut roots = Vec::new();
        let mut mults = Vec::new();
        for (j, &kj) in k.iter().enumerate() {
            for sign in [1.0, -1.0] {
                let mut r = vec![0.0; n];
                r[j] = sign * std::f64::consts::SQRT_2;
                roots.push(r);
                mults.push(kj);
            }
        }
        Self::new(roots, mults)
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn roots(&self) -> &[Vec<f64>] {
        &self.roots
    }

    pub fn multiplicities(&self) -> &[f64] {
        &self.multiplicities
    }

    pub fn group(&self) -> &[Vec<f64>] {
        &self.group
    }

    pub fn group_order(&self) -> usize {
        self.group.len()
    }

    /// `N + sum_{alpha in R} k(alpha)`.
    pub fn homogeneous_dimension(&self) -> f64 {
        self.dimension as f64 + self.multiplicities.iter().sum::<f64>()
    }

    /// Density of `dw` with respect to Lebesgue measure.
    pub fn weight_density(&self, x: &[f64]) -> f64 {
        let mut prod = 1.0;
        for (r, &k) in self.roots.iter().zip(&self.multiplicities) {
            if k == 0.0 {
                continue;
            }
            let dot: f64 = r.iter().zip(x).map(|(a, v)| a * v).sum();
            prod *= dot.abs().powf(k);
        }
        prod
    }

    pub fn apply_group_element(&self, sigma: usize, x: &[f64]) -> Vec<f64> {
        mat_apply(&self.group[sigma], x, self.dimension)
    }

    /// Distinct images of `x` under the group.
    pub fn orbit(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let mut out: Vec<Vec<f64>> = Vec::new();
        for g in &self.group {
            let y = mat_apply(g, x, self.dimension);
            if !out.iter().any(|z| vec_close(z, &y)) {
                out.push(y);
            }
        }
        out
    }

    /// `d(x, y) = min_{sigma in G} ||sigma(x) - y||`.
    pub fn orbit_distance(&self, x: &[f64], y: &[f64]) -> f64 {
        self.group
            .iter()
            .map(|g| {
                let gx = mat_apply(g, x, self.dimension);
                gx.iter()
                    .zip(y)
                    .map(|(a, b)| (a - b) * (a - b))
                    .sum::<f64>()
                    .sqrt()
            })
            .fold(f64::INFINITY, f64::min)
    }

    /// Per-axis multiplicities when the system is a product of rank-1
    /// factors (every root along a coordinate axis); axes without roots get
    /// multiplicity zero. Returns `None` for non-product systems.
    pub fn axis_multiplicities(&self) -> Option<Vec<f64>> {
        let mut k = vec![0.0_f64; self.dimension];
        let mut seen = vec![false; self.dimension];
        for (r, &m) in self.roots.iter().zip(&self.multiplicities) {
            let mut axis = None;
            for (j, &c) in r.iter().enumerate() {
                if c.abs() > 1e-12 {
                    if axis.is_some() {
                        return None;
                    }
                    axis = Some(j);
                }
            }
            let j = axis?;
            if seen[j] && (k[j] - m).abs() > 1e-12 {
                return None;
            }
            k[j] = m;
            seen[j] = true;
        }
        Some(k)
    }

    pub fn is_product(&self) -> bool {
        self.axis_multiplicities().is_some()
    }

    pub fn to_document(&self) -> RootSystemDoc {
        RootSystemDoc {
            dimension: self.dimension,
            roots: self.roots.clone(),
            multiplicity: self.multiplicities.clone(),
        }
    }

    pub fn from_document(doc: RootSystemDoc) -> Result<Self, GeometryError> {
        Self::new(doc.roots, doc.multiplicity)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("document is serializable")
    }

    pub fn from_json(text: &str) -> Result<Self, GeometryError> {
        let doc: RootSystemDoc =
            serde_json::from_str(text).map_err(|_| GeometryError::UnknownPreset("<json>".into()))?;
        Self::from_document(doc)
    }
}

fn vec_close(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= VEC_EQ_TOL)
}

fn mat_apply(m: &[f64], x: &[f64], n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (0..n).map(|j| m[i * n + j] * x[j]).sum())
        .collect()
}

fn mat_mul(a: &[f64], b: &[f64], n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    for i in 0..n {
        for l in 0..n {
            let v = a[i * n + l];
            if v != 0.0 {
                for j in 0..n {
                    out[i * n + j] += v * b[l * n + j];
                }
            }
        }
    }
    out
}

fn reflection_matrix(alpha: &[f64], n: usize) -> Vec<f64> {
    let norm_sq: f64 = alpha.iter().map(|a| a * a).sum();
    let mut m = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            m[i * n + j] = if i == j { 1.0 } else { 0.0 };
            m[i * n + j] -= 2.0 * alpha[i] * alpha[j] / norm_sq;
        }
    }
    m
}

/// Fixed-point-free closure of the generating reflections under composition.
fn enumerate_group(roots: &[Vec<f64>], n: usize) -> Result<Vec<Vec<f64>>, GeometryError> {
    let mut identity = vec![0.0; n * n];
    for i in 0..n {
        identity[i * n + i] = 1.0;
    }
    let generators: Vec<Vec<f64>> = roots.iter().map(|r| reflection_matrix(r, n)).collect();
    let mut group = vec![identity];
    let mut frontier = 0;
    while frontier < group.len() {
        let current = group[frontier].clone();
        frontier += 1;
        for g in &generators {
            let prod = mat_mul(g, &current, n);
            if !group.iter().any(|m| vec_close(m, &prod)) {
                group.push(prod);
                if group.len() > GROUP_CAP {
                    return Err(GeometryError::GroupTooLarge);
                }
            }
        }
    }
    Ok(group)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const SQRT2: f64 = std::f64::consts::SQRT_2;

    #[test]
    fn rank_one_preset_has_sign_group() {
        let rs = RootSystem::preset("z2", &[0.5]).unwrap();
        assert_eq!(rs.group_order(), 2);
        assert_eq!(rs.dimension(), 1);
        assert_relative_eq!(rs.homogeneous_dimension(), 2.0);
    }

    #[test]
    fn z2_squared_preset_is_sign_flip_group() {
        let rs = RootSystem::preset("z2^2", &[1.0, 1.0]).unwrap();
        assert_eq!(rs.group_order(), 4);
        assert_relative_eq!(rs.homogeneous_dimension(), 6.0);
    }

    #[test]
    fn non_closed_root_set_is_rejected() {
        // sigma_{(1,1)}(sqrt2 e1) = (0, -sqrt2) which is missing.
        let roots = vec![
            vec![SQRT2, 0.0],
            vec![-SQRT2, 0.0],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
        ];
        let err = RootSystem::new(roots, vec![1.0; 4]).unwrap_err();
        assert!(matches!(err, GeometryError::NotClosed { .. }));
    }

    #[test]
    fn b2_style_system_closes_with_order_eight() {
        let roots = vec![
            vec![SQRT2, 0.0],
            vec![-SQRT2, 0.0],
            vec![0.0, SQRT2],
            vec![0.0, -SQRT2],
            vec![1.0, 1.0],
            vec![-1.0, -1.0],
            vec![1.0, -1.0],
            vec![-1.0, 1.0],
        ];
        let mults = vec![0.5, 0.5, 0.5, 0.5, 1.5, 1.5, 1.5, 1.5];
        let rs = RootSystem::new(roots, mults).unwrap();
        assert_eq!(rs.group_order(), 8);
        assert!(!rs.is_product());
    }

    #[test]
    fn unnormalized_and_negative_inputs_are_rejected() {
        let err = RootSystem::new(vec![vec![1.0], vec![-1.0]], vec![1.0, 1.0]).unwrap_err();
        assert!(matches!(err, GeometryError::NotNormalized { .. }));
        let err =
            RootSystem::new(vec![vec![SQRT2], vec![-SQRT2]], vec![-0.5, -0.5]).unwrap_err();
        assert!(matches!(err, GeometryError::NegativeMultiplicity { .. }));
        let err = RootSystem::new(
            vec![vec![SQRT2], vec![-SQRT2]],
            vec![1.0, 2.0],
        )
        .unwrap_err();
        assert!(matches!(err, GeometryError::NotGInvariant { .. }));
    }

    #[test]
    fn reflect_flips_coordinate_and_is_an_involution() {
        let got = reflect(&[SQRT2, 0.0], &[1.0, 2.0]).unwrap();
        assert_relative_eq!(got[0], -1.0, epsilon = 1e-14);
        assert_relative_eq!(got[1], 2.0, epsilon = 1e-14);

        let got = reflect(&[1.0, 1.0], &[1.0, 0.0]).unwrap();
        assert_relative_eq!(got[0], 0.0, epsilon = 1e-14);
        assert_relative_eq!(got[1], -1.0, epsilon = 1e-14);

        assert!(matches!(
            reflect(&[0.0, 0.0], &[1.0, 0.0]),
            Err(GeometryError::ZeroRoot)
        ));
    }

    #[test]
    fn orbit_distance_examples() {
        let rs = RootSystem::preset("z2", &[1.0]).unwrap();
        assert_relative_eq!(rs.orbit_distance(&[1.0], &[-1.0]), 0.0, epsilon = 1e-14);

        let rs2 = RootSystem::preset("z2^2", &[1.0, 1.0]).unwrap();
        assert_relative_eq!(
            rs2.orbit_distance(&[1.0, 0.0], &[0.0, 1.0]),
            SQRT2,
            epsilon = 1e-12
        );
    }

    #[test]
    fn weight_density_examples() {
        let rs0 = RootSystem::preset("z2", &[0.0]).unwrap();
        assert_eq!(rs0.weight_density(&[3.7]), 1.0);

        let rs = RootSystem::preset("z2", &[1.0]).unwrap();
        assert_relative_eq!(rs.weight_density(&[2.0]), 8.0, epsilon = 1e-12);

        let rs2 = RootSystem::preset("z2^2", &[1.0, 1.0]).unwrap();
        assert_relative_eq!(rs2.weight_density(&[1.0, 2.0]), 16.0, epsilon = 1e-12);
    }

    #[test]
    fn homogeneous_dimension_examples() {
        assert_relative_eq!(
            RootSystem::preset("z2^2", &[0.0, 0.0])
                .unwrap()
                .homogeneous_dimension(),
            2.0
        );
        assert_relative_eq!(
            RootSystem::preset("z2", &[1.0])
                .unwrap()
                .homogeneous_dimension(),
            3.0
        );
        assert_relative_eq!(
            RootSystem::preset("z2^2", &[0.5, 1.5])
                .unwrap()
                .homogeneous_dimension(),
            6.0
        );
    }

    #[test]
    fn weight_is_group_invariant_and_distance_symmetric() {
        let rs = RootSystem::preset("z2^2", &[0.5, 1.5]).unwrap();
        let xs = [[0.3, -1.2], [2.0, 0.7], [-0.4, 0.01]];
        for x in &xs {
            let w = rs.weight_density(x);
            for s in 0..rs.group_order() {
                let sx = rs.apply_group_element(s, x);
                assert_relative_eq!(rs.weight_density(&sx), w, max_relative = 1e-12);
            }
            for y in &xs {
                assert_relative_eq!(
                    rs.orbit_distance(x, y),
                    rs.orbit_distance(y, x),
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn document_round_trip() {
        let rs = RootSystem::preset("z2^2", &[0.5, 1.5]).unwrap();
        let back = RootSystem::from_json(&rs.to_json()).unwrap();
        assert_eq!(back.dimension(), 2);
        assert_eq!(back.group_order(), 4);
        assert_eq!(back.axis_multiplicities().unwrap(), vec![0.5, 1.5]);
    }
}
