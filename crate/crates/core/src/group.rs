//! Carnot groups of step at most two, in exponential coordinates.
//!
//! A point is stored as `(x, z)` with `x ∈ R^m` horizontal and `z ∈ R^k`
//! central. Every supported group is reduced to a family of antisymmetric
//! bracket matrices `b^l` (one per central direction) and
//!
//! ```text
//! g * h = (x + x', z + z' + ½ B(x, x')),   B^l(x, x') = Σ_ij b^l_ij x_i x'_j
//! X_i   = ∂x_i + ½ Σ_l Σ_j b^l_ji x_j ∂z_l
//! ```
//!
//! The Heisenberg groups use the frame `X_j = ∂x_j + 2x_{n+j}∂t`,
//! `X_{n+j} = ∂x_{n+j} − 2x_j∂t`, whose commutator is `[X_j, X_{n+j}] = −4T`.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::jet::{Dual, Scalar};

/// A group element in ambient exponential coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct Point(pub Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Self {
        Point(coords)
    }

    pub fn identity(dim: usize) -> Self {
        Point(vec![0.0; dim])
    }

    /// Euclidean distance between ambient coordinate vectors.
    pub fn distance(&self, other: &Point) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
    }
}

impl Deref for Point {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl From<Vec<f64>> for Point {
    fn from(v: Vec<f64>) -> Self {
        Point(v)
    }
}

/// Coefficients `a_1..a_m` of a horizontal vector in the frame `X_1..X_m`.
#[derive(Clone, Debug, PartialEq)]
pub struct HorizontalVector(pub Vec<f64>);

impl HorizontalVector {
    pub fn dot(&self, other: &HorizontalVector) -> f64 {
        self.0.iter().zip(&other.0).map(|(a, b)| a * b).sum()
    }

    pub fn norm(&self) -> f64 {
        self.dot(self).sqrt()
    }
}

impl Deref for HorizontalVector {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

/// How a group was specified.
#[derive(Clone, Debug, PartialEq)]
pub enum Structure {
    Heisenberg { n: usize },
    /// J-maps, each `m×m` row-major and skew-symmetric, with `J_z² = −κ²|z|²`.
    HType { j_maps: Vec<Vec<f64>>, kappa: f64 },
    Euclidean { n: usize },
    /// Structure constants `b^l_ij`, each `m×m` row-major and antisymmetric.
    StepTwoGeneric { constants: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct GroupSpec {
    name: String,
    layer_dims: Vec<usize>,
    hom_dimension: usize,
    structure: Structure,
    brackets: Vec<Vec<f64>>,
}

const SKEW_TOL: f64 = 1e-12;

impl GroupSpec {
    /// The Heisenberg group `H^n` with the frame described in the module docs.
    pub fn heisenberg(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("Heisenberg group needs n >= 1".into()));
        }
        let m = 2 * n;
        let mut b = vec![0.0; m * m];
        for j in 0..n {
            b[(n + j) * m + j] = 4.0;
            b[j * m + (n + j)] = -4.0;
        }
        Ok(GroupSpec {
            name: format!("heis{n}"),
            layer_dims: vec![m, 1],
            hom_dimension: m + 2,
            structure: Structure::Heisenberg { n },
            brackets: vec![b],
        })
    }

    pub fn euclidean(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidSpec("Euclidean space needs n >= 1".into()));
        }
        Ok(GroupSpec {
            name: format!("euclid{n}"),
            layer_dims: vec![n],
            hom_dimension: n,
            structure: Structure::Euclidean { n },
            brackets: Vec::new(),
        })
    }

    /// An H-type group from its J-maps (`m×m`, row-major).
    pub fn htype(name: &str, m: usize, j_maps: Vec<Vec<f64>>) -> Result<Self> {
        if j_maps.is_empty() {
            return Err(Error::InvalidSpec("H-type group needs at least one J-map".into()));
        }
        for (l, j) in j_maps.iter().enumerate() {
            check_square_skew(j, m).map_err(|e| Error::InvalidSpec(format!("J_{}: {e}", l + 1)))?;
        }
        let kappa = htype_kappa(&j_maps, m)?;
        // b^l_ji = (J_l)_ij, i.e. b^l = J_l^T
        let brackets = j_maps.iter().map(|j| transpose(j, m)).collect();
        let k = j_maps.len();
        Ok(GroupSpec {
            name: name.to_string(),
            layer_dims: vec![m, k],
            hom_dimension: m + 2 * k,
            structure: Structure::HType { j_maps, kappa },
            brackets,
        })
    }

    /// A step-two group from structure constants `b^l_ij`.
    pub fn step_two(name: &str, m: usize, constants: Vec<Vec<f64>>) -> Result<Self> {
        if constants.is_empty() {
            return Err(Error::InvalidSpec("step-two group needs at least one structure matrix".into()));
        }
        for (l, b) in constants.iter().enumerate() {
            check_square_skew(b, m).map_err(|e| Error::InvalidSpec(format!("b^{}: {e}", l + 1)))?;
        }
        let k = constants.len();
        Ok(GroupSpec {
            name: name.to_string(),
            layer_dims: vec![m, k],
            hom_dimension: m + 2 * k,
            structure: Structure::StepTwoGeneric { constants: constants.clone() },
            brackets: constants,
        })
    }

    /// The quaternionic H-type group: `m = 4`, center spanned by left
    /// multiplication with `i`, `j`, `k`.
    pub fn quaternionic() -> Self {
        let ji = vec![
            0.0, -1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, 1.0, 0.0,
        ];
        let jj = vec![
            0.0, 0.0, -1.0, 0.0, //
            0.0, 0.0, 0.0, 1.0, //
            1.0, 0.0, 0.0, 0.0, //
            0.0, -1.0, 0.0, 0.0,
        ];
        let jk = vec![
            0.0, 0.0, 0.0, -1.0, //
            0.0, 0.0, -1.0, 0.0, //
            0.0, 1.0, 0.0, 0.0, //
            1.0, 0.0, 0.0, 0.0,
        ];
        GroupSpec::htype("quaternionic", 4, vec![ji, jj, jk]).expect("quaternionic J-maps are H-type")
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn with_name(mut self, name: &str) -> Self {
        self.name = name.to_string();
        self
    }

    pub fn step(&self) -> usize {
        self.layer_dims.len()
    }

    pub fn layer_dims(&self) -> &[usize] {
        &self.layer_dims
    }

    /// `m`, the rank of the horizontal layer.
    pub fn horizontal_dim(&self) -> usize {
        self.layer_dims[0]
    }

    /// `k`, the dimension of the second layer (zero for Euclidean space).
    pub fn center_dim(&self) -> usize {
        self.layer_dims.get(1).copied().unwrap_or(0)
    }

    /// `N`, the topological dimension.
    pub fn dim(&self) -> usize {
        self.layer_dims.iter().sum()
    }

    /// `Q = Σ j · dim v_j`.
    pub fn hom_dimension(&self) -> usize {
        self.hom_dimension
    }

    pub fn structure(&self) -> &Structure {
        &self.structure
    }

    /// Bracket matrix `b^l` (row-major, `m×m`).
    pub fn bracket(&self, l: usize) -> &[f64] {
        &self.brackets[l]
    }

    pub fn is_euclidean(&self) -> bool {
        matches!(self.structure, Structure::Euclidean { .. })
    }

    /// Recomputes `Q` from the layer dimensions.
    pub fn recomputed_hom_dimension(&self) -> usize {
        self.layer_dims.iter().enumerate().map(|(j, d)| (j + 1) * d).sum()
    }

    pub fn check_point(&self, g: &[f64]) -> Result<()> {
        check_dim(self.dim(), g.len())
    }

    pub fn require_q_above_two(&self) -> Result<()> {
        if self.hom_dimension > 2 {
            Ok(())
        } else {
            Err(Error::Unsupported(format!("homogeneous dimension Q = {} must exceed 2", self.hom_dimension)))
        }
    }

    /// Largest deviation from the H-type identity `J_z² = −κ²|z|²` over
    /// `samples` random unit vectors `z` (seeded). `None` unless H-type.
    pub fn htype_residual(&self, samples: usize, seed: u64) -> Option<f64> {
        match &self.structure {
            Structure::HType { j_maps, kappa } => {
                let m = self.horizontal_dim();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let mut worst: f64 = 0.0;
                for _ in 0..samples {
                    let mut z: Vec<f64> = (0..j_maps.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
                    let n = z.iter().map(|v| v * v).sum::<f64>().sqrt();
                    z.iter_mut().for_each(|v| *v /= n);
                    let jz = combine(j_maps, &z, m);
                    let sq = matmul(&jz, &jz, m);
                    for i in 0..m {
                        for j in 0..m {
                            let target = if i == j { -kappa * kappa } else { 0.0 };
                            worst = worst.max((sq[i * m + j] - target).abs() / (kappa * kappa));
                        }
                    }
                }
                Some(worst)
            }
            _ => None,
        }
    }
}

fn transpose(a: &[f64], m: usize) -> Vec<f64> {
    let mut t = vec![0.0; m * m];
    for i in 0..m {
        for j in 0..m {
            t[j * m + i] = a[i * m + j];
        }
    }
    t
}

fn matmul(a: &[f64], b: &[f64], m: usize) -> Vec<f64> {
    let mut c = vec![0.0; m * m];
    for i in 0..m {
        for k in 0..m {
            let aik = a[i * m + k];
            for j in 0..m {
                c[i * m + j] += aik * b[k * m + j];
            }
        }
    }
    c
}

fn combine(maps: &[Vec<f64>], z: &[f64], m: usize) -> Vec<f64> {
    let mut out = vec![0.0; m * m];
    for (j, zl) in maps.iter().zip(z) {
        for (o, v) in out.iter_mut().zip(j) {
            *o += zl * v;
        }
    }
    out
}

fn check_square_skew(a: &[f64], m: usize) -> std::result::Result<(), String> {
    if a.len() != m * m {
        return Err(format!("expected {m}x{m} entries, got {}", a.len()));
    }
    for i in 0..m {
        for j in 0..m {
            if (a[i * m + j] + a[j * m + i]).abs() > SKEW_TOL {
                return Err(format!("not skew-symmetric at ({i},{j})"));
            }
        }
    }
    Ok(())
}

// Polarized H-type condition J_l J_k + J_k J_l = −2κ²δ_lk I for a single κ.
fn htype_kappa(j_maps: &[Vec<f64>], m: usize) -> Result<f64> {
    let sq = matmul(&j_maps[0], &j_maps[0], m);
    let kappa2 = -(0..m).map(|i| sq[i * m + i]).sum::<f64>() / m as f64;
    if kappa2 <= 0.0 {
        return Err(Error::InvalidSpec("J_1 is zero".into()));
    }
    for (l, jl) in j_maps.iter().enumerate() {
        for (k, jk) in j_maps.iter().enumerate().skip(l) {
            let a = matmul(jl, jk, m);
            let b = matmul(jk, jl, m);
            for i in 0..m {
                for j in 0..m {
                    let target = if l == k && i == j { -2.0 * kappa2 } else { 0.0 };
                    if (a[i * m + j] + b[i * m + j] - target).abs() > SKEW_TOL * kappa2.max(1.0) {
                        return Err(Error::InvalidSpec(format!(
                            "H-type condition fails for J_{}, J_{} at ({i},{j})",
                            l + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
    }
    Ok(kappa2.sqrt())
}

/// Group product, generic over the scalar carrier.
pub fn multiply_generic<S: Scalar>(spec: &GroupSpec, g: &[S], h: &[S]) -> Vec<S> {
    let m = spec.horizontal_dim();
    let mut out: Vec<S> = g.iter().zip(h).map(|(a, b)| a.clone() + b.clone()).collect();
    for (l, b) in spec.brackets.iter().enumerate() {
        let mut acc = S::from(0.0);
        for i in 0..m {
            for j in 0..m {
                let bij = b[i * m + j];
                if bij != 0.0 {
                    acc = acc + g[i].clone() * h[j].clone() * bij;
                }
            }
        }
        out[m + l] = out[m + l].clone() + acc * 0.5;
    }
    out
}

pub fn multiply(spec: &GroupSpec, g: &Point, h: &Point) -> Result<Point> {
    spec.check_point(g)?;
    spec.check_point(h)?;
    Ok(Point(multiply_generic(spec, g, h)))
}

/// Inverse; coordinate negation in step at most two.
pub fn inverse(spec: &GroupSpec, g: &Point) -> Result<Point> {
    spec.check_point(g)?;
    Ok(Point(g.iter().map(|v| -v).collect()))
}

pub fn dilate_generic<S: Scalar>(spec: &GroupSpec, lambda: S, g: &[S]) -> Vec<S> {
    let m = spec.horizontal_dim();
    let l2 = lambda.clone() * lambda.clone();
    g.iter()
        .enumerate()
        .map(|(i, v)| if i < m { v.clone() * lambda.clone() } else { v.clone() * l2.clone() })
        .collect()
}

/// The dilation `δ_λ`: layer `j` is scaled by `λ^j`.
pub fn dilate(spec: &GroupSpec, lambda: f64, g: &Point) -> Result<Point> {
    spec.check_point(g)?;
    if !(lambda > 0.0) {
        return Err(Error::InvalidDilation(lambda));
    }
    Ok(Point(dilate_generic(spec, lambda, g)))
}

/// Ambient coefficient vectors of `X_1..X_m` at `x`, generic.
pub fn frame_generic<S: Scalar>(spec: &GroupSpec, x: &[S]) -> Vec<Vec<S>> {
    let m = spec.horizontal_dim();
    let n = spec.dim();
    (0..m)
        .map(|i| {
            let mut c: Vec<S> = (0..n).map(|k| S::from(if k == i { 1.0 } else { 0.0 })).collect();
            for (l, b) in spec.brackets.iter().enumerate() {
                let mut acc = S::from(0.0);
                for j in 0..m {
                    let bji = b[j * m + i];
                    if bji != 0.0 {
                        acc = acc + x[j].clone() * bji;
                    }
                }
                c[m + l] = acc * 0.5;
            }
            c
        })
        .collect()
}

/// Frame coefficients at `g`: entry `i` is the ambient vector of `X_i`.
pub fn frame_coefficients(spec: &GroupSpec, g: &Point) -> Result<Vec<Vec<f64>>> {
    spec.check_point(g)?;
    Ok(frame_generic(spec, g))
}

/// Ambient coefficients of `[X_i, X_j]` at `g`, by differentiating the frame.
pub fn commutator(spec: &GroupSpec, i: usize, j: usize, g: &Point) -> Result<Vec<f64>> {
    spec.check_point(g)?;
    let frame = frame_generic(spec, &Dual::seed(g));
    let n = spec.dim();
    let ci: Vec<f64> = frame[i].iter().map(|d| d.value).collect();
    let cj: Vec<f64> = frame[j].iter().map(|d| d.value).collect();
    Ok((0..n)
        .map(|r| {
            (0..n).map(|k| ci[k] * frame[j][r].partial(k) - cj[k] * frame[i][r].partial(k)).sum()
        })
        .collect())
}

/// Built-in group names accepted by [`builtin`].
pub const CATALOG: &[&str] = &[
    "heis1",
    "heis2",
    "heis3",
    "quaternionic",
    "euclid3",
    "euclid5",
    "htype-heis1",
    "htype-heis1-j2",
    "htype-heis1-j1",
];

/// Looks up a built-in group.
///
/// `htype-heis1*` recast `H^1` as an H-type group with `J = κ[[0,1],[−1,0]]`
/// for `κ = 4` (the Heisenberg frame itself), `2` and `1`.
pub fn builtin(name: &str) -> Option<GroupSpec> {
    let heis_j = |kappa: f64| vec![vec![0.0, kappa, -kappa, 0.0]];
    match name {
        "heis1" => GroupSpec::heisenberg(1).ok(),
        "heis2" => GroupSpec::heisenberg(2).ok(),
        "heis3" => GroupSpec::heisenberg(3).ok(),
        "quaternionic" => Some(GroupSpec::quaternionic()),
        "euclid3" => GroupSpec::euclidean(3).ok(),
        "euclid5" => GroupSpec::euclidean(5).ok(),
        "htype-heis1" => GroupSpec::htype(name, 2, heis_j(4.0)).ok(),
        "htype-heis1-j2" => GroupSpec::htype(name, 2, heis_j(2.0)).ok(),
        "htype-heis1-j1" => GroupSpec::htype(name, 2, heis_j(1.0)).ok(),
        _ => None,
    }
}

/// On-disk group description (TOML).
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct GroupFile {
    pub name: String,
    #[serde(rename = "type")]
    pub kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub horizontal_dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub j_maps: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub structure_constants: Option<Vec<Vec<Vec<f64>>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hom_dimension: Option<usize>,
}

fn flatten(rows: &[Vec<f64>], m: usize, what: &str) -> Result<Vec<f64>> {
    if rows.len() != m || rows.iter().any(|r| r.len() != m) {
        return Err(Error::InvalidSpec(format!("{what} must be {m}x{m}")));
    }
    Ok(rows.concat())
}

fn unflatten(a: &[f64], m: usize) -> Vec<Vec<f64>> {
    a.chunks(m).map(|r| r.to_vec()).collect()
}

impl GroupFile {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("group file serializes")
    }

    pub fn into_spec(self) -> Result<GroupSpec> {
        let spec = match self.kind.as_str() {
            "heisenberg" => {
                let n = self.n.ok_or_else(|| Error::InvalidSpec("heisenberg needs n".into()))?;
                GroupSpec::heisenberg(n)?
            }
            "euclidean" => {
                let n = self.n.ok_or_else(|| Error::InvalidSpec("euclidean needs n".into()))?;
                GroupSpec::euclidean(n)?
            }
            "htype" => {
                let maps = self.j_maps.as_ref().ok_or_else(|| Error::InvalidSpec("htype needs j_maps".into()))?;
                let m = maps.first().map(|r| r.len()).unwrap_or(0);
                let flat = maps.iter().map(|j| flatten(j, m, "J-map")).collect::<Result<Vec<_>>>()?;
                GroupSpec::htype(&self.name, m, flat)?
            }
            "step-two" => {
                let b = self
                    .structure_constants
                    .as_ref()
                    .ok_or_else(|| Error::InvalidSpec("step-two needs structure_constants".into()))?;
                let m = self.horizontal_dim.or_else(|| b.first().map(|r| r.len())).unwrap_or(0);
                let flat = b.iter().map(|j| flatten(j, m, "structure matrix")).collect::<Result<Vec<_>>>()?;
                GroupSpec::step_two(&self.name, m, flat)?
            }
            other => return Err(Error::InvalidSpec(format!("unknown group type `{other}`"))),
        };
        if let Some(q) = self.hom_dimension {
            if q != spec.recomputed_hom_dimension() {
                return Err(Error::InvalidSpec(format!(
                    "hom_dimension {q} does not match layers (Q = {})",
                    spec.recomputed_hom_dimension()
                )));
            }
        }
        Ok(spec.with_name(&self.name))
    }

    pub fn from_spec(spec: &GroupSpec) -> Self {
        let m = spec.horizontal_dim();
        let mut file = GroupFile {
            name: spec.name().to_string(),
            hom_dimension: Some(spec.hom_dimension()),
            ..Default::default()
        };
        match spec.structure() {
            Structure::Heisenberg { n } => {
                file.kind = "heisenberg".into();
                file.n = Some(*n);
            }
            Structure::Euclidean { n } => {
                file.kind = "euclidean".into();
                file.n = Some(*n);
            }
            Structure::HType { j_maps, .. } => {
                file.kind = "htype".into();
                file.j_maps = Some(j_maps.iter().map(|j| unflatten(j, m)).collect());
            }
            Structure::StepTwoGeneric { constants } => {
                file.kind = "step-two".into();
                file.horizontal_dim = Some(m);
                file.structure_constants = Some(constants.iter().map(|b| unflatten(b, m)).collect());
            }
        }
        file
    }
}

/// Resolves a built-in name or a path to a group file.
pub fn resolve(selector: &str) -> Result<GroupSpec> {
    if let Some(spec) = builtin(selector) {
        return Ok(spec);
    }
    let text = std::fs::read_to_string(selector)
        .map_err(|e| Error::InvalidSpec(format!("`{selector}` is neither a built-in group nor a readable file: {e}")))?;
    GroupFile::parse(&text)?.into_spec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heis1() -> GroupSpec {
        GroupSpec::heisenberg(1).unwrap()
    }

    #[test]
    fn heisenberg_product_examples() {
        let g = heis1();
        let p = multiply(&g, &Point(vec![1.0, 0.0, 0.0]), &Point(vec![0.0, 1.0, 0.0])).unwrap();
        // quadratic term 2(x_2 x'_1 − x_1 x'_2), the law for which the frame is left-invariant
        assert_eq!(p.0, vec![1.0, 1.0, -2.0]);
        let q = multiply(&g, &Point(vec![1.0, 0.0, 0.0]), &Point(vec![-1.0, 0.0, 0.0])).unwrap();
        assert_eq!(q.0, vec![0.0, 0.0, 0.0]);
        let e = Point::identity(3);
        let a = Point(vec![0.3, -1.2, 2.5]);
        assert_eq!(multiply(&g, &a, &e).unwrap(), a);
        assert_eq!(multiply(&g, &e, &a).unwrap(), a);
    }

    #[test]
    fn inverse_examples() {
        let g = heis1();
        assert_eq!(inverse(&g, &Point(vec![1.0, 2.0, 3.0])).unwrap().0, vec![-1.0, -2.0, -3.0]);
        assert_eq!(inverse(&g, &Point::identity(3)).unwrap(), Point::identity(3));
    }

    #[test]
    fn dilation_examples() {
        let g = heis1();
        assert_eq!(dilate(&g, 2.0, &Point(vec![1.0, 0.0, 1.0])).unwrap().0, vec![2.0, 0.0, 4.0]);
        let a = Point(vec![0.4, 0.1, -0.7]);
        assert_eq!(dilate(&g, 1.0, &a).unwrap(), a);
        assert_eq!(dilate(&g, 0.0, &a), Err(Error::InvalidDilation(0.0)));
        assert_eq!(dilate(&g, -1.0, &a), Err(Error::InvalidDilation(-1.0)));
    }

    #[test]
    fn dimension_mismatch() {
        let g = heis1();
        let err = multiply(&g, &Point(vec![1.0, 0.0]), &Point::identity(3)).unwrap_err();
        assert_eq!(err, Error::DimensionMismatch { expected: 3, actual: 2 });
    }

    #[test]
    fn heisenberg_frame_and_commutator() {
        let g = heis1();
        let f = frame_coefficients(&g, &Point(vec![1.0, 1.0, 0.0])).unwrap();
        assert_eq!(f[0], vec![1.0, 0.0, 2.0]);
        assert_eq!(f[1], vec![0.0, 1.0, -2.0]);
        let c = commutator(&g, 0, 1, &Point(vec![0.3, -0.2, 1.0])).unwrap();
        assert_eq!(c, vec![0.0, 0.0, -4.0]);
    }

    #[test]
    fn frame_at_identity_is_standard_basis() {
        for name in CATALOG {
            let g = builtin(name).unwrap();
            let f = frame_coefficients(&g, &Point::identity(g.dim())).unwrap();
            for (i, c) in f.iter().enumerate() {
                for (k, v) in c.iter().enumerate() {
                    assert_eq!(*v, if i == k { 1.0 } else { 0.0 });
                }
            }
        }
    }

    #[test]
    fn homogeneous_dimensions() {
        assert_eq!(builtin("heis1").unwrap().hom_dimension(), 4);
        assert_eq!(builtin("heis2").unwrap().layer_dims(), &[4, 1]);
        assert_eq!(builtin("heis2").unwrap().hom_dimension(), 6);
        assert_eq!(builtin("quaternionic").unwrap().hom_dimension(), 10);
        assert_eq!(builtin("euclid3").unwrap().hom_dimension(), 3);
        for name in CATALOG {
            let g = builtin(name).unwrap();
            assert_eq!(g.hom_dimension(), g.recomputed_hom_dimension());
        }
    }

    #[test]
    fn htype_condition_on_catalog() {
        for name in ["quaternionic", "htype-heis1", "htype-heis1-j2", "htype-heis1-j1"] {
            let g = builtin(name).unwrap();
            assert!(g.htype_residual(64, 7).unwrap() <= 1e-12, "{name}");
        }
        match builtin("htype-heis1").unwrap().structure() {
            Structure::HType { kappa, .. } => assert_eq!(*kappa, 4.0),
            _ => unreachable!(),
        }
    }

    #[test]
    fn htype_recast_matches_heisenberg_frame() {
        let h = builtin("heis1").unwrap();
        let t = builtin("htype-heis1").unwrap();
        let p = Point(vec![0.7, -1.3, 0.4]);
        assert_eq!(frame_coefficients(&h, &p).unwrap(), frame_coefficients(&t, &p).unwrap());
    }

    #[test]
    fn rejects_bad_j_maps() {
        let not_skew = vec![vec![0.0, 1.0, 1.0, 0.0]];
        assert!(matches!(GroupSpec::htype("bad", 2, not_skew), Err(Error::InvalidSpec(_))));
        // two commuting J's violate the anticommutation condition
        let j = vec![0.0, 1.0, -1.0, 0.0];
        assert!(matches!(GroupSpec::htype("bad", 2, vec![j.clone(), j]), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn group_file_round_trip_and_validation() {
        for name in CATALOG {
            let g = builtin(name).unwrap();
            let text = GroupFile::from_spec(&g).to_toml();
            let back = GroupFile::parse(&text).unwrap().into_spec().unwrap();
            assert_eq!(back, g, "{name}");
        }
        let bad = "name = \"x\"\ntype = \"htype\"\nj_maps = [[[0.0, 1.0], [1.0, 0.0]]]\n";
        assert!(matches!(GroupFile::parse(bad).unwrap().into_spec(), Err(Error::InvalidSpec(_))));
        let unknown = "name = \"x\"\ntype = \"heisenberg\"\nn = 1\ncolour = 3\n";
        assert!(matches!(GroupFile::parse(unknown), Err(Error::Parse(_))));
        let wrong_q = "name = \"x\"\ntype = \"heisenberg\"\nn = 1\nhom_dimension = 5\n";
        assert!(matches!(GroupFile::parse(wrong_q).unwrap().into_spec(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn step_two_generic_from_constants() {
        let text = "name = \"h1-consts\"\ntype = \"step-two\"\nhorizontal_dim = 2\nstructure_constants = [[[0.0, -4.0], [4.0, 0.0]]]\n";
        let g = GroupFile::parse(text).unwrap().into_spec().unwrap();
        let h = builtin("heis1").unwrap();
        let p = Point(vec![0.2, 0.9, -0.3]);
        let q = Point(vec![-1.1, 0.5, 0.8]);
        assert_eq!(multiply(&g, &p, &q).unwrap(), multiply(&h, &p, &q).unwrap());
    }
}
