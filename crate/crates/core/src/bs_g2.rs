//! The G₂ structure on `Λ²₋(S⁴)` at a point over a surface `Σ ⊂ S⁴`: the rank-3
//! subbundle `L` spanned by the canonical lift and its complement `L⊥`, with the
//! associative and coassociative verifiers.
//!
//! Horizontal lifts `ē₀, ē₁, ē₂, ē₃` correspond to `e₁, e₂, ν₁, ν₂`; vertical
//! vectors `f̌₁, f̌₂, f̌₃` to the anti-self-dual forms `f¹, f², f³` below.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix2, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{consistency, Error, Result};
use crate::exterior::{fd_pushforward, FdConfig, InnerProductSpace, KForm};
use crate::immersions::{adapted_frame, AdaptedFrame, Immersion, NormalGauge, SecondFundamentalForm, FRAME_STEP};
use crate::octonion::{g2, G2FlatStructure};
use crate::tolerances;

/// Radial profiles `(u(r), v(r))` of the Bryant–Salamon metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BsProfile {
    /// `u = v = 1`.
    Unit,
    /// `u = 1 + r²`, `v = √(1 + r²)`.
    Growing,
}

impl BsProfile {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "unit" => Ok(Self::Unit),
            "growing" => Ok(Self::Growing),
            other => Err(Error::InvalidParameter {
                name: "profile",
                reason: format!("unknown profile `{other}` (expected unit or growing)"),
            }),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::Unit => "unit",
            Self::Growing => "growing",
        }
    }

    pub fn uv(&self, r: f64) -> (f64, f64) {
        match self {
            Self::Unit => (1.0, 1.0),
            Self::Growing => (1.0 + r * r, (1.0 + r * r).sqrt()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsG2Structure {
    pub profile: BsProfile,
}

impl BsG2Structure {
    pub fn new(profile: BsProfile) -> Self {
        Self { profile }
    }

    /// Flat model of the tangent space at fibre radius `r`.
    pub fn at(&self, r: f64) -> Result<G2FlatStructure> {
        let (u, v) = self.profile.uv(r);
        G2FlatStructure::new(u, v)
    }
}

/// Adapted frame data of a surface in `S⁴` at one point, with shape
/// coefficients `A^l_{jk} = ⟨∇̄_{e_j} ν_l, e_k⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceFramePoint {
    pub frame: Option<AdaptedFrame>,
    pub shape: [Matrix2<f64>; 2],
}

fn to_matrix2(m: &DMatrix<f64>) -> Matrix2<f64> {
    Matrix2::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

impl SurfaceFramePoint {
    pub fn from_sff(sff: &SecondFundamentalForm) -> Result<Self> {
        if sff.p() != 2 || sff.codim() != 2 {
            return Err(Error::InvalidInput(format!(
                "need a surface in S^4, got p={} codim={}",
                sff.p(),
                sff.codim()
            )));
        }
        if sff.max_asymmetry() > tolerances::SYMMETRY {
            return Err(Error::InvalidInput("second fundamental form is not symmetric".into()));
        }
        let shape = sff.shape();
        Ok(Self {
            frame: Some(sff.frame.clone()),
            shape: [to_matrix2(&shape[0]), to_matrix2(&shape[1])],
        })
    }

    pub fn synthetic(shape: [Matrix2<f64>; 2]) -> Self {
        Self { frame: None, shape }
    }

    /// The same point with `ν₂ ↦ −ν₂`.
    pub fn reversed(&self) -> Self {
        let frame = self.frame.clone().map(|mut f| {
            f.normal[1] = -&f.normal[1];
            f
        });
        Self {
            frame,
            shape: [self.shape[0], -self.shape[1]],
        }
    }

    /// `H^l = Σ_j ⟨∂_{e_j}∂_{e_j} x, ν_l⟩ = −tr A^l`.
    pub fn mean_curvature(&self) -> [f64; 2] {
        [-self.shape[0].trace(), -self.shape[1].trace()]
    }
}

/// `f¹ = e¹e² − ν¹ν²`, `f² = e¹ν¹ − ν²e²`, `f³ = e¹ν² − e²ν¹` on the coframe
/// `(e¹, e², ν¹, ν²)`. Anti-self-dual with `⟨fᵃ, fᵇ⟩ = 2δ_{ab}`.
pub fn asd_basis(space: &Arc<InnerProductSpace>) -> Result<[KForm; 3]> {
    if space.dim() != 4 {
        return Err(Error::DimensionMismatch {
            expected: 4,
            found: space.dim(),
        });
    }
    Ok([
        KForm::from_terms(space, 2, &[(1.0, &[0, 1]), (-1.0, &[2, 3])])?,
        KForm::from_terms(space, 2, &[(1.0, &[0, 2]), (-1.0, &[3, 1])])?,
        KForm::from_terms(space, 2, &[(1.0, &[0, 3]), (-1.0, &[1, 2])])?,
    ])
}

/// Normalization constant `c` in `⟨fᵃ, fᵇ⟩ = c δ_{ab}`.
pub const ASD_NORM: f64 = 2.0;

fn wedge_matrix(a: &DVector<f64>, b: &DVector<f64>) -> DMatrix<f64> {
    a * b.transpose() - b * a.transpose()
}

/// `f¹, f², f³` as antisymmetric ambient matrices built from an adapted frame.
pub fn asd_basis_ambient(frame: &AdaptedFrame) -> [DMatrix<f64>; 3] {
    let (e1, e2) = (&frame.tangent[0], &frame.tangent[1]);
    let (n1, n2) = (&frame.normal[0], &frame.normal[1]);
    [
        wedge_matrix(e1, e2) - wedge_matrix(n1, n2),
        wedge_matrix(e1, n1) - wedge_matrix(n2, e2),
        wedge_matrix(e1, n2) - wedge_matrix(e2, n1),
    ]
}

/// Form inner product of antisymmetric matrices.
fn form_inner(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    0.5 * a.dot(b)
}

/// Vertical correction `α(e_i, fᵃ)` on `(f̌₁, f̌₂, f̌₃)`; `i ∈ {0, 1}`, `a ∈ {0, 1, 2}`.
pub fn alpha_correction(shape: &[Matrix2<f64>; 2], i: usize, a: usize) -> Vector3<f64> {
    let (a1, a2) = (&shape[0], &shape[1]);
    match a {
        0 => Vector3::new(0.0, -a1[(i, 1)] + a2[(i, 0)], -a1[(i, 0)] - a2[(i, 1)]),
        1 => Vector3::new(a1[(i, 1)] - a2[(i, 0)], 0.0, 0.0),
        2 => Vector3::new(a2[(i, 1)] + a1[(i, 0)], 0.0, 0.0),
        _ => panic!("asd index {a} out of range"),
    }
}

/// Connection coefficients `[ρ_i, τ_i]` with `ρ_i = ⟨∇_{e_i} e₁, e₂⟩` and
/// `τ_i = ⟨∇^⊥_{e_i} ν₁, ν₂⟩` of the gauge-fixed frame.
pub fn frame_connection(imm: &Immersion, s: &[f64], gauge: &NormalGauge) -> Result<[[f64; 2]; 2]> {
    let frame = adapted_frame(imm, s, gauge)?;
    let dim = imm.n + 1;
    let stacked = |q: &[f64]| -> Result<DVector<f64>> {
        let f = adapted_frame(imm, q, gauge)?;
        Ok(DVector::from_iterator(4 * dim, f.tangent.iter().chain(&f.normal).flat_map(|v| v.iter().copied())))
    };
    let partials = fd_pushforward(stacked, s, FdConfig::richardson(FRAME_STEP))?;
    let m = frame.tangent_in_chart();
    Ok([0, 1].map(|i| {
        let d = &partials[0] * m[(0, i)] + &partials[1] * m[(1, i)];
        let block = |k: usize| d.rows(k * dim, dim).into_owned();
        [block(0).dot(&frame.tangent[1]), block(2).dot(&frame.normal[1])]
    }))
}

/// `α(e_i, fᵃ)_b = ⟨∇_{e_i} fᵃ, fᵇ⟩ / 2` by differentiating the ambient
/// sections `fᵃ(s)` along the surface, transformed to a frame that is parallel
/// at the point: the gauge term `∇f² = (τ − ρ) f³ + …`, `∇f³ = (ρ − τ) f² + …`
/// is removed. Indexed `[i][a]`.
pub fn alpha_correction_numeric(imm: &Immersion, s: &[f64], gauge: &NormalGauge) -> Result<[[Vector3<f64>; 3]; 2]> {
    if imm.p != 2 || imm.n != 4 {
        return Err(Error::InvalidInput("alpha corrections need a surface in S^4".into()));
    }
    let frame = adapted_frame(imm, s, gauge)?;
    let dim = imm.n + 1;
    let section = |q: &[f64]| -> Result<DVector<f64>> {
        let f = asd_basis_ambient(&adapted_frame(imm, q, gauge)?);
        Ok(DVector::from_iterator(3 * dim * dim, f.iter().flat_map(|m| m.iter().copied())))
    };
    let partials = fd_pushforward(section, s, FdConfig::richardson(FRAME_STEP))?;
    let connection = frame_connection(imm, s, gauge)?;
    let m = frame.tangent_in_chart();
    let base = asd_basis_ambient(&frame);
    let mut out = [[Vector3::zeros(); 3]; 2];
    for (i, row) in out.iter_mut().enumerate() {
        let d = &partials[0] * m[(0, i)] + &partials[1] * m[(1, i)];
        for (a, slot) in row.iter_mut().enumerate() {
            let da = DMatrix::from_column_slice(dim, dim, &d.as_slice()[a * dim * dim..(a + 1) * dim * dim]);
            *slot = Vector3::from_fn(|b, _| form_inner(&da, &base[b]) / ASD_NORM);
        }
        let [rho, tau] = connection[i];
        row[1][2] -= tau - rho;
        row[2][1] -= rho - tau;
    }
    Ok(out)
}

fn vertical(c: &Vector3<f64>) -> DVector<f64> {
    let mut v = DVector::zeros(7);
    v[g2::F1] = c[0];
    v[g2::F2] = c[1];
    v[g2::F3] = c[2];
    v
}

fn horizontal(i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(7);
    v[g2::E0 + i] = 1.0;
    v
}

fn unit(i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(7);
    v[i] = 1.0;
    v
}

/// Tangent frame `(E₁, E₂, F₁)` of `L` at fibre coordinate `t₁`:
/// `E_i = ē_i + t₁ α(e_i, f¹)`, `F₁ = f̌₁`.
pub fn associative_frame(point: &SurfaceFramePoint, t1: f64) -> [DVector<f64>; 3] {
    let e = |i| horizontal(i) + vertical(&alpha_correction(&point.shape, i, 0)) * t1;
    [e(0), e(1), unit(g2::F1)]
}

/// `E₁ ⌟ E₂ ⌟ F₁ ⌟ *φ` at fibre radius `|t₁|`.
pub fn associative_defect(point: &SurfaceFramePoint, t1: f64, structure: &BsG2Structure) -> Result<KForm> {
    let g = structure.at(t1.abs())?;
    let [e1, e2, f1] = associative_frame(point, t1);
    g.assoc_defect(&e1, &e2, &f1)
}

/// `−t₁ u²v² [(A²₁₁ + A²₂₂) ν̄¹ − (A¹₁₁ + A¹₂₂) ν̄²]`.
pub fn associative_closed_form(point: &SurfaceFramePoint, t1: f64, structure: &BsG2Structure) -> Result<KForm> {
    let g = structure.at(t1.abs())?;
    let c = -t1 * g.u * g.u * g.v * g.v;
    KForm::from_terms(
        &g.space,
        1,
        &[
            (c * point.shape[1].trace(), &[g2::E2]),
            (-c * point.shape[0].trace(), &[g2::E3]),
        ],
    )
}

/// Frame `(E₁, E₂, F₂, F₃)` of `L⊥` at `(t₂, t₃)`:
/// `E_i = ē_i + t₂ α(e_i, f²) + t₃ α(e_i, f³)`.
pub fn coassociative_frame(point: &SurfaceFramePoint, t2: f64, t3: f64) -> [DVector<f64>; 4] {
    let e = |i| {
        horizontal(i)
            + vertical(&alpha_correction(&point.shape, i, 1)) * t2
            + vertical(&alpha_correction(&point.shape, i, 2)) * t3
    };
    [e(0), e(1), unit(g2::F2), unit(g2::F3)]
}

/// `[φ(E₁,E₂,F₂), φ(E₁,E₂,F₃), φ(F₂,F₃,E₁), φ(F₂,F₃,E₂)]`; the first two vanish
/// identically and are checked to do so.
pub fn coassociative_defect(point: &SurfaceFramePoint, t2: f64, t3: f64, structure: &BsG2Structure) -> Result<[f64; 4]> {
    let g = structure.at(t2.hypot(t3))?;
    let [e1, e2, f2, f3] = coassociative_frame(point, t2, t3);
    let out = [
        g.phi.at(&[&e1, &e2, &f2]),
        g.phi.at(&[&e1, &e2, &f3]),
        g.phi.at(&[&f2, &f3, &e1]),
        g.phi.at(&[&f2, &f3, &e2]),
    ];
    let scale = (1.0 + t2.hypot(t3) * point.shape.iter().map(|a| a.amax()).fold(0.0, f64::max)).powi(2) * g.u * g.u * g.v;
    consistency("automatic coassociative components", out[0].abs().max(out[1].abs()), tolerances::AUTOMATIC * scale)?;
    Ok(out)
}

/// `[0, 0, v³(A^ν₁₂ − A^{ν⊥}₁₁), v³(A^ν₂₂ − A^{ν⊥}₁₂)]` with `ν = t₂ν₁ + t₃ν₂`,
/// `ν⊥ = −t₃ν₁ + t₂ν₂`.
pub fn coassociative_closed_form(point: &SurfaceFramePoint, t2: f64, t3: f64, structure: &BsG2Structure) -> [f64; 4] {
    let (_, v) = structure.profile.uv(t2.hypot(t3));
    let [a1, a2] = &point.shape;
    let nu = a1 * t2 + a2 * t3;
    let perp = a1 * -t3 + a2 * t2;
    let v3 = v * v * v;
    [0.0, 0.0, v3 * (nu[(0, 1)] - perp[(0, 0)]), v3 * (nu[(1, 1)] - perp[(0, 1)])]
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperminimalVerdict {
    pub positive: bool,
    pub negative: bool,
    pub residual_positive: f64,
    pub residual_negative: f64,
}

fn isotropy_residual(point: &SurfaceFramePoint) -> Result<f64> {
    let flat = BsG2Structure::new(BsProfile::Unit);
    let mut worst: f64 = 0.0;
    for (t2, t3) in [(1.0, 0.0), (0.0, 1.0)] {
        for d in coassociative_defect(point, t2, t3, &flat)? {
            worst = worst.max(d.abs());
        }
    }
    Ok(worst)
}

/// Coassociativity of `L⊥` at `(t₂, t₃) = (1, 0)` and `(0, 1)` for the given
/// orientation and with `ν₂` reversed.
pub fn superminimal_test(shape: &[DMatrix<f64>], tol: f64) -> Result<SuperminimalVerdict> {
    if shape.len() != 2 || shape.iter().any(|a| a.shape() != (2, 2)) {
        return Err(Error::InvalidInput("superminimal test needs two 2x2 shape matrices".into()));
    }
    if shape.iter().any(|a| (a - a.transpose()).amax() > tolerances::SYMMETRY) {
        return Err(Error::InvalidInput("shape matrices must be symmetric".into()));
    }
    let point = SurfaceFramePoint::synthetic([to_matrix2(&shape[0]), to_matrix2(&shape[1])]);
    let residual_positive = isotropy_residual(&point)?;
    let residual_negative = isotropy_residual(&point.reversed())?;
    let verdict = SuperminimalVerdict {
        positive: residual_positive <= tol,
        negative: residual_negative <= tol,
        residual_positive,
        residual_negative,
    };
    if verdict.positive || verdict.negative {
        let trace = shape[0].trace().abs().max(shape[1].trace().abs());
        consistency("superminimal implies minimal", trace, 2.0 * tol + tolerances::EXACT)?;
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{normal_gauge, second_fundamental_form_with_gauge, CatalogEntry};
    use crate::sampling::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn diag(l: f64) -> Matrix2<f64> {
        Matrix2::new(l, 0.0, 0.0, -l)
    }

    fn sym(a: f64, b: f64, c: f64) -> Matrix2<f64> {
        Matrix2::new(a, b, b, c)
    }

    fn as_dm(m: &Matrix2<f64>) -> DMatrix<f64> {
        DMatrix::from_column_slice(2, 2, m.as_slice())
    }

    #[test]
    fn asd_forms() {
        let space = Arc::new(InnerProductSpace::euclidean(4));
        let f = asd_basis(&space).unwrap();
        for a in 0..3 {
            assert!((&f[a].hodge_star() + &f[a]).max_abs() < 1e-15);
            for b in 0..3 {
                let expect = if a == b { ASD_NORM } else { 0.0 };
                assert_abs_diff_eq!(f[a].inner(&f[b]).unwrap(), expect, epsilon = 1e-15);
            }
        }
        // Rotating (e₁, e₂) within the tangent plane fixes f¹.
        for psi in [0.3, 1.2, -2.0] {
            let (c, s) = (f64::cos(psi), f64::sin(psi));
            let mut r = DMatrix::identity(4, 4);
            r[(0, 0)] = c;
            r[(0, 1)] = -s;
            r[(1, 0)] = s;
            r[(1, 1)] = c;
            assert!((&f[0].pullback(&r).unwrap() - &f[0]).max_abs() < 1e-15);
        }
    }

    #[test]
    fn alpha_examples() {
        let zero = [Matrix2::zeros(); 2];
        for i in 0..2 {
            for a in 0..3 {
                assert_eq!(alpha_correction(&zero, i, a), Vector3::zeros());
            }
        }
        let l = 0.7;
        let c = alpha_correction(&[diag(l), Matrix2::zeros()], 0, 0);
        assert_eq!(c, Vector3::new(0.0, 0.0, -l));
    }

    #[test]
    fn alpha_matches_fd_on_catalog_surfaces() {
        let mut r = rng(21);
        for entry in [CatalogEntry::Veronese, CatalogEntry::CliffordTorus { n: 4 }, CatalogEntry::LatitudeSphere { p: 2, n: 4, radius: 0.6 }] {
            let imm = entry.build().unwrap();
            for s in imm.sample_random(5, &mut r) {
                let gauge = normal_gauge(&imm, &s).unwrap();
                let sff = second_fundamental_form_with_gauge(&imm, &s, &gauge).unwrap();
                let point = SurfaceFramePoint::from_sff(&sff).unwrap();
                let numeric = alpha_correction_numeric(&imm, &s, &gauge).unwrap();
                for i in 0..2 {
                    for a in 0..3 {
                        let printed = alpha_correction(&point.shape, i, a);
                        assert!((printed - numeric[i][a]).amax() < 1e-6, "{entry:?} i={i} a={a}: {printed} vs {}", numeric[i][a]);
                    }
                }
            }
        }
    }

    #[test]
    fn associative_examples() {
        let s = BsG2Structure::new(BsProfile::Unit);
        let zero = SurfaceFramePoint::synthetic([Matrix2::zeros(); 2]);
        for t in [-2.0, 0.0, 0.5, 3.0] {
            assert_eq!(associative_defect(&zero, t, &s).unwrap().max_abs(), 0.0);
        }
        let torus = SurfaceFramePoint::synthetic([diag(1.0), diag(0.3)]);
        assert!(associative_defect(&torus, 1.7, &s).unwrap().max_abs() < 1e-15);
        let lat = SurfaceFramePoint::synthetic([Matrix2::identity() * 1.3, Matrix2::zeros()]);
        let d = associative_defect(&lat, 1.0, &s).unwrap();
        assert_abs_diff_eq!(d.coeff_norm(), 2.6, epsilon = 1e-12);
    }

    #[test]
    fn fibre_origin_is_exact() {
        let p = SurfaceFramePoint::synthetic([sym(0.3, -1.0, 2.0), sym(1.5, 0.2, 0.1)]);
        for profile in [BsProfile::Unit, BsProfile::Growing] {
            let s = BsG2Structure::new(profile);
            assert_eq!(associative_defect(&p, 0.0, &s).unwrap().max_abs(), 0.0);
            assert_eq!(coassociative_defect(&p, 0.0, 0.0, &s).unwrap(), [0.0; 4]);
        }
    }

    #[test]
    fn coassociative_examples() {
        let s = BsG2Structure::new(BsProfile::Unit);
        let zero = SurfaceFramePoint::synthetic([Matrix2::zeros(); 2]);
        assert!(coassociative_defect(&zero, 0.4, -1.1, &s).unwrap().iter().all(|d| d.abs() <= 1e-10));
        let l = 0.8;
        let torus = SurfaceFramePoint::synthetic([diag(l), Matrix2::zeros()]);
        let d = coassociative_defect(&torus, 1.0, 0.0, &s).unwrap();
        assert_abs_diff_eq!(d[3], -l, epsilon = 1e-12);
    }

    #[test]
    fn superminimal_examples() {
        let z = [DMatrix::zeros(2, 2), DMatrix::zeros(2, 2)];
        let v = superminimal_test(&z, 1e-10).unwrap();
        assert!(v.positive && v.negative);
        let v = superminimal_test(&[as_dm(&diag(0.9)), DMatrix::zeros(2, 2)], 1e-10).unwrap();
        assert!(!v.positive && !v.negative);
        // Isotropic shapes: A² is A¹ rotated by a quarter turn, one sign per orientation.
        let a1 = diag(0.6) + sym(0.0, 0.4, 0.0);
        let j = Matrix2::new(0.0, -1.0, 1.0, 0.0);
        let a2 = j * a1;
        for sign in [1.0, -1.0] {
            let v = superminimal_test(&[as_dm(&a1), as_dm(&(a2 * sign))], 1e-10).unwrap();
            assert!(v.positive != v.negative, "{v:?}");
        }
        assert!(superminimal_test(&[as_dm(&Matrix2::new(0.0, 1.0, 0.0, 0.0)), DMatrix::zeros(2, 2)], 1e-10).is_err());
    }

    #[test]
    fn veronese_is_superminimal_in_one_orientation() {
        let imm = CatalogEntry::Veronese.build().unwrap();
        let mut r = rng(22);
        for s in imm.sample_random(10, &mut r) {
            let gauge = normal_gauge(&imm, &s).unwrap();
            let sff = second_fundamental_form_with_gauge(&imm, &s, &gauge).unwrap();
            let v = superminimal_test(&sff.shape(), 1e-6).unwrap();
            assert!(v.positive != v.negative, "{v:?}");
        }
    }

    fn shape_strategy() -> impl Strategy<Value = [Matrix2<f64>; 2]> {
        prop::array::uniform6(-2.0..2.0f64).prop_map(|c| [sym(c[0], c[1], c[2]), sym(c[3], c[4], c[5])])
    }

    proptest! {
        #[test]
        fn associative_matches_closed_form(shape in shape_strategy(), t1 in -3.0..3.0f64, growing in any::<bool>()) {
            let s = BsG2Structure::new(if growing { BsProfile::Growing } else { BsProfile::Unit });
            let p = SurfaceFramePoint::synthetic(shape);
            let d = associative_defect(&p, t1, &s).unwrap();
            let c = associative_closed_form(&p, t1, &s).unwrap();
            let scale = 1.0 + c.max_abs();
            prop_assert!((&d - &c).max_abs() <= 1e-10 * scale);
        }

        #[test]
        fn coassociative_matches_closed_form(shape in shape_strategy(), t2 in -3.0..3.0f64, t3 in -3.0..3.0f64, growing in any::<bool>()) {
            let s = BsG2Structure::new(if growing { BsProfile::Growing } else { BsProfile::Unit });
            let p = SurfaceFramePoint::synthetic(shape);
            let d = coassociative_defect(&p, t2, t3, &s).unwrap();
            let c = coassociative_closed_form(&p, t2, t3, &s);
            for k in 0..4 {
                prop_assert!((d[k] - c[k]).abs() <= 1e-10 * (1.0 + c[k].abs()));
            }
        }

        #[test]
        fn rotated_fibre_pair_detects_all_conditions(shape in shape_strategy(), t2 in -2.0..2.0f64, t3 in -2.0..2.0f64) {
            prop_assume!(t2.hypot(t3) > 0.1);
            let s = BsG2Structure::new(BsProfile::Unit);
            let p = SurfaceFramePoint::synthetic(shape);
            let a = coassociative_defect(&p, t2, t3, &s).unwrap();
            let b = coassociative_defect(&p, -t3, t2, &s).unwrap();
            let joint = a.iter().chain(&b).fold(0.0f64, |m, d| m.max(d.abs()));
            let [a1, a2] = shape;
            let conditions = [a1[(0, 1)] - a2[(0, 0)], a1[(1, 1)] - a2[(0, 1)], a2[(0, 1)] + a1[(0, 0)], a2[(1, 1)] + a1[(0, 1)]];
            let cmax = conditions.iter().fold(0.0f64, |m, c| m.max(c.abs()));
            // Both sides vanish together and are comparable in size.
            let r = t2.hypot(t3);
            prop_assert!(joint <= 2.0 * r * cmax + 1e-12);
            prop_assert!(cmax <= 2.0 * joint / r + 1e-12);
        }

        #[test]
        fn profile_independent_superminimal(shape in shape_strategy()) {
            let p = SurfaceFramePoint::synthetic(shape);
            for (t2, t3) in [(1.0, 0.0), (0.0, 1.0), (0.6, -0.8)] {
                let a = coassociative_defect(&p, t2, t3, &BsG2Structure::new(BsProfile::Unit)).unwrap();
                let b = coassociative_defect(&p, t2, t3, &BsG2Structure::new(BsProfile::Growing)).unwrap();
                for k in 0..4 {
                    prop_assert_eq!(a[k].abs() <= 1e-9, b[k].abs() <= 1e-9);
                }
            }
        }
    }
}
