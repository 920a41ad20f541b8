//! Test submanifolds of spheres and the finite-difference second fundamental form.
//!
//! Coefficients follow `B^l_{jk} = ⟨∂_{e_j}∂_{e_k} x, ν_l⟩`; the mean curvature
//! is `H^l = Σ_j B^l_{jj}`. [`SecondFundamentalForm::shape`] returns the
//! shape-operator convention `A^ν(u, v) = ⟨∇̄_u ν, v⟩ = −B`, which is the one
//! the frame formulas of the bundle constructions are written in.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bs_g2::superminimal_test;
use crate::error::{Error, Result};
use crate::exterior::{fd_hessian, fd_pushforward, gram_schmidt, FdConfig, InnerProductSpace};
use crate::stenzel::{austere_test, AusterityVerdict};

/// Step of the Richardson-extrapolated chart derivatives.
pub const FRAME_STEP: f64 = 1e-3;
/// Step of the Richardson-extrapolated chart Hessian.
pub const HESSIAN_STEP: f64 = 2e-3;
/// Distance kept from polar chart singularities.
pub const POLAR_MARGIN: f64 = 0.25;

pub type Chart = Arc<dyn Fn(&[f64]) -> DVector<f64> + Send + Sync>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case")]
pub enum CatalogEntry {
    Equator { p: usize, n: usize },
    LatitudeSphere { p: usize, n: usize, radius: f64 },
    CliffordTorus { n: usize },
    Veronese,
    GraphPerturbation { base: Box<CatalogEntry>, amplitude: f64 },
}

/// Loose parameters as they arrive from the command line.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CatalogParams {
    pub p: Option<usize>,
    pub n: Option<usize>,
    pub radius: Option<f64>,
    pub amplitude: Option<f64>,
}

pub const CATALOG_NAMES: [&str; 5] = [
    "equator",
    "latitude_sphere",
    "clifford_torus",
    "veronese",
    "graph_perturbation",
];

pub const DEFAULT_RADIUS: f64 = 0.6;
pub const DEFAULT_AMPLITUDE: f64 = 0.2;

impl CatalogEntry {
    pub fn from_name(name: &str, params: &CatalogParams) -> Result<Self> {
        let p = params.p.unwrap_or(2);
        let n = params.n.unwrap_or(p + 1);
        let entry = match name {
            "equator" => Self::Equator { p, n },
            "latitude_sphere" => Self::LatitudeSphere {
                p,
                n,
                radius: params.radius.unwrap_or(DEFAULT_RADIUS),
            },
            "clifford_torus" => Self::CliffordTorus {
                n: params.n.unwrap_or(3),
            },
            "veronese" => Self::Veronese,
            "graph_perturbation" => Self::GraphPerturbation {
                base: Box::new(Self::Equator { p, n }),
                amplitude: params.amplitude.unwrap_or(DEFAULT_AMPLITUDE),
            },
            other => return Err(Error::UnknownImmersion(other.to_string())),
        };
        entry.validate()?;
        Ok(entry)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Equator { .. } => "equator",
            Self::LatitudeSphere { .. } => "latitude_sphere",
            Self::CliffordTorus { .. } => "clifford_torus",
            Self::Veronese => "veronese",
            Self::GraphPerturbation { .. } => "graph_perturbation",
        }
    }

    pub fn dims(&self) -> (usize, usize) {
        match self {
            Self::Equator { p, n } | Self::LatitudeSphere { p, n, .. } => (*p, *n),
            Self::CliffordTorus { n } => (2, *n),
            Self::Veronese => (2, 4),
            Self::GraphPerturbation { base, .. } => base.dims(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let invalid = |name, reason: String| Err(Error::InvalidParameter { name, reason });
        match self {
            Self::Equator { p, n } => {
                if *p == 0 || p >= n {
                    return invalid("p", format!("need 1 <= p < n, got p={p}, n={n}"));
                }
            }
            Self::LatitudeSphere { p, n, radius } => {
                if *p == 0 || p >= n {
                    return invalid("p", format!("need 1 <= p < n, got p={p}, n={n}"));
                }
                if !(*radius > 0.0 && *radius < 1.0) {
                    return invalid("radius", format!("must lie in (0, 1), got {radius}"));
                }
            }
            Self::CliffordTorus { n } => {
                if *n < 3 {
                    return invalid("n", format!("clifford torus needs n >= 3, got {n}"));
                }
            }
            Self::Veronese => {}
            Self::GraphPerturbation { base, amplitude } => {
                base.validate()?;
                if !amplitude.is_finite() {
                    return invalid("amplitude", format!("must be finite, got {amplitude}"));
                }
                let (p, n) = base.dims();
                let uses_last = match base.as_ref() {
                    Self::Equator { .. } => false,
                    Self::LatitudeSphere { p, n, .. } => p + 1 == *n,
                    Self::CliffordTorus { n } => *n == 3,
                    Self::Veronese | Self::GraphPerturbation { .. } => true,
                };
                if uses_last || p >= n {
                    return invalid("base", "base must avoid the last ambient coordinate".into());
                }
            }
        }
        if self.dims().1 + 1 > crate::exterior::MAX_DIM {
            return invalid("n", format!("ambient dimension {} too large", self.dims().1));
        }
        Ok(())
    }

    pub fn build(&self) -> Result<Immersion> {
        self.validate()?;
        let (p, n) = self.dims();
        let (domain, chart): (Vec<(f64, f64)>, Chart) = match self.clone() {
            Self::Equator { p, n } => (
                sphere_domain(p),
                Arc::new(move |s: &[f64]| pad(sphere_chart(s), n + 1)),
            ),
            Self::LatitudeSphere { p, n, radius } => {
                let h = (1.0 - radius * radius).sqrt();
                (
                    sphere_domain(p),
                    Arc::new(move |s: &[f64]| {
                        let mut x: Vec<f64> = sphere_chart(s).iter().map(|y| radius * y).collect();
                        x.push(h);
                        pad(x, n + 1)
                    }),
                )
            }
            Self::CliffordTorus { n } => (
                vec![(0.0, 2.0 * PI), (0.0, 2.0 * PI)],
                Arc::new(move |s: &[f64]| {
                    let x = [s[0].cos(), s[0].sin(), s[1].cos(), s[1].sin()].map(|c| c / SQRT_2);
                    pad(x.to_vec(), n + 1)
                }),
            ),
            Self::Veronese => (
                vec![(POLAR_MARGIN, PI - POLAR_MARGIN), (0.0, 2.0 * PI)],
                Arc::new(|s: &[f64]| {
                    let (x, y, z) = (s[0].sin() * s[1].cos(), s[0].sin() * s[1].sin(), s[0].cos());
                    let r3 = 3f64.sqrt();
                    DVector::from_vec(vec![
                        r3 * x * y,
                        r3 * x * z,
                        r3 * y * z,
                        0.5 * r3 * (x * x - y * y),
                        0.5 * (x * x + y * y - 2.0 * z * z),
                    ])
                }),
            ),
            Self::GraphPerturbation { base, amplitude } => {
                let inner = base.build()?;
                let centre: Vec<f64> = inner.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect();
                let base_chart = Arc::clone(&inner.chart);
                (
                    inner.domain.clone(),
                    Arc::new(move |s: &[f64]| {
                        let d2: f64 = s.iter().zip(&centre).map(|(a, c)| (a - c) * (a - c)).sum();
                        let mut x = base_chart(s);
                        x[n] += amplitude * (-d2).exp();
                        let norm = x.norm();
                        x / norm
                    }),
                )
            }
        };
        Ok(Immersion {
            name: self.name().to_string(),
            entry: Some(self.clone()),
            p,
            n,
            domain,
            chart,
        })
    }
}

/// `catalog(name, params)`: build a named catalog immersion.
pub fn catalog(name: &str, params: &CatalogParams) -> Result<Immersion> {
    CatalogEntry::from_name(name, params)?.build()
}

/// One-line descriptions for `catalog list`.
pub fn catalog_descriptions() -> Vec<(&'static str, &'static str)> {
    vec![
        ("equator", "great S^p in S^n; params p, n (1 <= p < n)"),
        ("latitude_sphere", "distance sphere of radius r at height sqrt(1-r^2); params p, n, radius in (0,1)"),
        ("clifford_torus", "(cos s1, sin s1, cos s2, sin s2)/sqrt(2) in S^3, padded into S^n; param n >= 3"),
        ("veronese", "degree-2 minimal immersion of S^2 into S^4"),
        ("graph_perturbation", "equator(p, n) bumped along the last axis near the box centre; params p, n, amplitude"),
    ]
}

fn sphere_domain(p: usize) -> Vec<(f64, f64)> {
    let mut d = vec![(POLAR_MARGIN, PI - POLAR_MARGIN); p.saturating_sub(1)];
    d.push((0.0, 2.0 * PI));
    d
}

/// Hyperspherical chart of `S^p ⊂ ℝ^{p+1}`.
fn sphere_chart(s: &[f64]) -> Vec<f64> {
    let p = s.len();
    let mut out = Vec::with_capacity(p + 1);
    let mut prod = 1.0;
    for (i, angle) in s.iter().enumerate() {
        out.push(prod * angle.cos());
        prod *= angle.sin();
        if i == p - 1 {
            out.push(prod);
        }
    }
    out
}

fn pad(mut x: Vec<f64>, len: usize) -> DVector<f64> {
    x.resize(len, 0.0);
    DVector::from_vec(x)
}

/// A parametric chart into `Sⁿ ⊂ ℝⁿ⁺¹` over a box in `ℝᵖ`.
#[derive(Clone)]
pub struct Immersion {
    pub name: String,
    pub entry: Option<CatalogEntry>,
    pub p: usize,
    pub n: usize,
    pub domain: Vec<(f64, f64)>,
    pub chart: Chart,
}

impl fmt::Debug for Immersion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Immersion")
            .field("name", &self.name)
            .field("p", &self.p)
            .field("n", &self.n)
            .field("domain", &self.domain)
            .finish()
    }
}

impl Immersion {
    pub fn new(name: &str, p: usize, n: usize, domain: Vec<(f64, f64)>, chart: Chart) -> Result<Self> {
        if domain.len() != p {
            return Err(Error::DimensionMismatch {
                expected: p,
                found: domain.len(),
            });
        }
        if p == 0 || p >= n || n + 1 > crate::exterior::MAX_DIM {
            return Err(Error::InvalidInput(format!("unsupported dimensions p={p}, n={n}")));
        }
        Ok(Self {
            name: name.to_string(),
            entry: None,
            p,
            n,
            domain,
            chart,
        })
    }

    pub fn eval(&self, s: &[f64]) -> Result<DVector<f64>> {
        if s.len() != self.p {
            return Err(Error::DimensionMismatch {
                expected: self.p,
                found: s.len(),
            });
        }
        let x = (self.chart)(s);
        if x.len() != self.n + 1 || x.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidInput(format!("chart `{}` failed at {s:?}", self.name)));
        }
        Ok(x)
    }

    pub fn jacobian(&self, s: &[f64]) -> Result<Vec<DVector<f64>>> {
        fd_pushforward(|q: &[f64]| self.eval(q), s, FdConfig::richardson(FRAME_STEP))
    }

    /// Centres of a uniform grid with `per_axis` cells per coordinate.
    pub fn sample_grid(&self, per_axis: usize) -> Vec<Vec<f64>> {
        let per_axis = per_axis.max(1);
        let total = per_axis.pow(self.p as u32);
        (0..total)
            .map(|mut idx| {
                self.domain
                    .iter()
                    .map(|(a, b)| {
                        let i = idx % per_axis;
                        idx /= per_axis;
                        a + (b - a) * (i as f64 + 0.5) / per_axis as f64
                    })
                    .collect()
            })
            .collect()
    }

    /// Uniform random points of the domain box.
    pub fn sample_random<R: Rng>(&self, count: usize, rng: &mut R) -> Vec<Vec<f64>> {
        (0..count)
            .map(|_| self.domain.iter().map(|(a, b)| rng.gen_range(*a..*b)).collect())
            .collect()
    }

    pub fn centre(&self) -> Vec<f64> {
        self.domain.iter().map(|(a, b)| 0.5 * (a + b)).collect()
    }
}

/// Ambient axes completing `(x, e₁..e_p)` to a basis; fixed near a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalGauge {
    pub seeds: Vec<usize>,
}

/// Orthonormal adapted frame `(x, e₁..e_p, ν₁..ν_q)` of `ℝⁿ⁺¹` along the immersion.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrame {
    pub position: DVector<f64>,
    pub tangent: Vec<DVector<f64>>,
    pub normal: Vec<DVector<f64>>,
    /// Chart partials `∂_a x`.
    pub jacobian: Vec<DVector<f64>>,
}

impl AdaptedFrame {
    /// Columns `(x, e₁..e_p, ν₁..ν_q)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = std::iter::once(self.position.clone())
            .chain(self.tangent.iter().cloned())
            .chain(self.normal.iter().cloned())
            .collect();
        DMatrix::from_columns(&cols)
    }

    /// Coefficients `M` with `e_j = Σ_a M_{aj} ∂_a x`.
    pub fn tangent_in_chart(&self) -> DMatrix<f64> {
        let j = DMatrix::from_columns(&self.jacobian);
        let e = DMatrix::from_columns(&self.tangent);
        let jtj = j.transpose() * &j;
        jtj.try_inverse().expect("full-rank chart") * j.transpose() * e
    }
}

pub fn normal_gauge(imm: &Immersion, s: &[f64]) -> Result<NormalGauge> {
    let x = imm.eval(s)?;
    let jac = imm.jacobian(s)?;
    let space = InnerProductSpace::euclidean(imm.n + 1);
    let mut basis = gram_schmidt(&std::iter::once(x).chain(jac).collect::<Vec<_>>(), &space)
        .map_err(|e| match e {
            Error::DegenerateInput { index } => Error::DegenerateInput { index: index.saturating_sub(1) },
            other => other,
        })?
        .vectors;
    let mut seeds = Vec::new();
    for _ in 0..(imm.n - imm.p) {
        let mut best = (0, -1.0);
        for axis in 0..=imm.n {
            if seeds.contains(&axis) {
                continue;
            }
            let mut r = space.basis_vector(axis);
            for b in &basis {
                r -= b * b[axis];
            }
            let norm = r.norm();
            if norm > best.1 {
                best = (axis, norm);
            }
        }
        seeds.push(best.0);
        let mut r = space.basis_vector(best.0);
        for b in &basis {
            r -= b * b[best.0];
        }
        let norm = r.norm();
        basis.push(r / norm);
    }
    Ok(NormalGauge { seeds })
}

/// Adapted frame at `s` with the normal frame built from `gauge`; the last
/// normal is flipped so that `det(x, e, ν) > 0`.
pub fn adapted_frame(imm: &Immersion, s: &[f64], gauge: &NormalGauge) -> Result<AdaptedFrame> {
    let x = imm.eval(s)?;
    let jacobian = imm.jacobian(s)?;
    let space = InnerProductSpace::euclidean(imm.n + 1);
    let mut input = vec![x.clone()];
    input.extend(jacobian.iter().cloned());
    input.extend(gauge.seeds.iter().map(|&a| space.basis_vector(a)));
    let frame = gram_schmidt(&input, &space).map_err(|e| match e {
        Error::DegenerateInput { index } => Error::DegenerateInput { index: index.saturating_sub(1) },
        other => other,
    })?;
    let mut v = frame.vectors;
    let p = imm.p;
    let tangent = v[1..=p].to_vec();
    if DMatrix::from_columns(&v).determinant() < 0.0 {
        let last = v.len() - 1;
        v[last] = -&v[last];
    }
    let normal = v[p + 1..].to_vec();
    Ok(AdaptedFrame {
        position: x,
        tangent,
        normal,
        jacobian,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecondFundamentalForm {
    pub frame: AdaptedFrame,
    /// `coeffs[l][(j, k)] = ⟨∂_{e_j}∂_{e_k} x, ν_l⟩`.
    pub coeffs: Vec<DMatrix<f64>>,
}

impl SecondFundamentalForm {
    pub fn p(&self) -> usize {
        self.frame.tangent.len()
    }

    pub fn codim(&self) -> usize {
        self.frame.normal.len()
    }

    pub fn mean_curvature(&self) -> Vec<f64> {
        self.coeffs.iter().map(|b| b.trace()).collect()
    }

    /// Shape-operator coefficients `A^l = −B^l`.
    pub fn shape(&self) -> Vec<DMatrix<f64>> {
        self.coeffs.iter().map(|b| -b).collect()
    }

    /// `B^ν = Σ_l w_l B^l` for `ν = Σ_l w_l ν_l`.
    pub fn in_direction(&self, w: &[f64]) -> DMatrix<f64> {
        let p = self.p();
        self.coeffs
            .iter()
            .zip(w)
            .fold(DMatrix::zeros(p, p), |acc, (b, c)| acc + b * *c)
    }

    pub fn max_asymmetry(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|b| (b - b.transpose()).amax())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|b| b.amax()).fold(0.0, f64::max)
    }
}

pub fn second_fundamental_form(imm: &Immersion, s: &[f64]) -> Result<SecondFundamentalForm> {
    let gauge = normal_gauge(imm, s)?;
    second_fundamental_form_with_gauge(imm, s, &gauge)
}

pub fn second_fundamental_form_with_gauge(imm: &Immersion, s: &[f64], gauge: &NormalGauge) -> Result<SecondFundamentalForm> {
    let frame = adapted_frame(imm, s, gauge)?;
    let hess = fd_hessian(|q: &[f64]| imm.eval(q), s, HESSIAN_STEP)?;
    let m = frame.tangent_in_chart();
    let p = imm.p;
    let coeffs = frame
        .normal
        .iter()
        .map(|nu| {
            let h = DMatrix::from_fn(p, p, |a, b| hess[a][b].dot(nu));
            m.transpose() * h * &m
        })
        .collect();
    Ok(SecondFundamentalForm { frame, coeffs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub totally_geodesic: bool,
    pub austere: bool,
    pub minimal: bool,
    /// Superminimal for the frame orientation; `false` when not a surface in S⁴.
    pub superminimal_positive: bool,
    /// Superminimal with the last normal reversed.
    pub superminimal_negative: bool,
}

impl Classification {
    pub fn none(&self) -> bool {
        !(self.totally_geodesic
            || self.austere
            || self.minimal
            || self.superminimal_positive
            || self.superminimal_negative)
    }
}

/// Default classification tolerance (finite-difference data).
pub const CLASSIFY_TOL: f64 = 1e-6;

pub fn classify(imm: &Immersion, samples: &[Vec<f64>]) -> Result<Classification> {
    classify_with_tol(imm, samples, CLASSIFY_TOL)
}

pub fn classify_with_tol(imm: &Immersion, samples: &[Vec<f64>], tol: f64) -> Result<Classification> {
    if samples.len() < 20 {
        return Err(Error::InvalidInput(format!("classify needs at least 20 samples, got {}", samples.len())));
    }
    let sffs: Vec<SecondFundamentalForm> = samples
        .iter()
        .map(|s| second_fundamental_form(imm, s))
        .collect::<Result<_>>()?;
    let totally_geodesic = sffs.iter().all(|b| b.max_abs() <= tol);
    let minimal = sffs
        .iter()
        .all(|b| b.mean_curvature().iter().all(|h| h.abs() <= tol));
    let austere = austere_test(&sffs, 16, tol)?.verdict == AusterityVerdict::Austere;
    let (mut plus, mut minus) = (false, false);
    if imm.p == 2 && imm.n == 4 {
        plus = true;
        minus = true;
        for b in &sffs {
            let shape = b.shape();
            let v = superminimal_test(&[shape[0].clone(), shape[1].clone()], tol)?;
            plus &= v.positive;
            minus &= v.negative;
        }
    }
    let c = Classification {
        totally_geodesic,
        austere,
        minimal,
        superminimal_positive: plus,
        superminimal_negative: minus,
    };
    let surface_in_s4 = imm.p == 2 && imm.n == 4;
    let violated = (c.totally_geodesic && surface_in_s4 && !(plus && minus))
        || ((plus || minus) && !c.minimal)
        || (c.austere && !c.minimal)
        || (c.totally_geodesic && !c.minimal);
    if violated {
        return Err(Error::InternalConsistency {
            check: "classification implication chain",
            residual: f64::NAN,
            tolerance: tol,
        });
    }
    Ok(c)
}
