//! The Spin(7) structure on the negative spinor bundle `S⁻(S⁴)` at a point over a
//! surface `Σ ⊂ S⁴`: Clifford data, the `+i` eigenline subbundle of
//! `Γ = γ(e¹)γ(e²)`, and the two Cayley verifiers.
//!
//! Horizontal lifts `ē₁..ē₄` correspond to `e₁, e₂, ν₁, ν₂`; vertical vectors
//! `f̌₁..f̌₄` to the real basis `s₁..s₄` of `S⁻`.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SMatrix, Vector2, Vector4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bs_g2::BsProfile;
use crate::error::{consistency, Error, Result};
use crate::exterior::{fd_pushforward, FdConfig, KForm};
use crate::immersions::{adapted_frame, AdaptedFrame, Immersion, NormalGauge, FRAME_STEP};
use crate::octonion::{spin7, Spin7FlatStructure};
use crate::tolerances;

type C = Complex64;
type Spinor = Vector2<C>;

const ZERO: C = C::new(0.0, 0.0);
const ONE: C = C::new(1.0, 0.0);
const I: C = C::new(0.0, 1.0);

fn kron(a: &Matrix2<C>, b: &Matrix2<C>) -> Matrix4<C> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}

/// `Re⟨a, b⟩`.
fn real_inner(a: &Spinor, b: &Spinor) -> f64 {
    a.dotc(b).re
}

/// A representation of `Cl(4)` on `ℂ⁴` with `γ_a² = −1`, and the negative
/// chirality half `S⁻ = {vol = +1}`, `vol = γ₁γ₂γ₃γ₄`.
#[derive(Debug, Clone, PartialEq)]
pub struct CliffordRep {
    pub gamma: [Matrix4<C>; 4],
    pub chirality: Matrix4<C>,
    /// Orthonormal basis of `S⁻` as columns.
    pub minus_basis: SMatrix<C, 4, 2>,
}

impl Default for CliffordRep {
    fn default() -> Self {
        Self::standard()
    }
}

impl CliffordRep {
    /// `γ = (iσ_x⊗1, iσ_y⊗1, iσ_z⊗σ_x, iσ_z⊗σ_y)`.
    pub fn standard() -> Self {
        let id = Matrix2::identity();
        let sx = Matrix2::new(ZERO, ONE, ONE, ZERO);
        let sy = Matrix2::new(ZERO, -I, I, ZERO);
        let sz = Matrix2::new(ONE, ZERO, ZERO, -ONE);
        let gamma = [kron(&sx, &id) * I, kron(&sy, &id) * I, kron(&sz, &sx) * I, kron(&sz, &sy) * I];
        Self::from_gammas(gamma)
    }

    pub fn from_gammas(gamma: [Matrix4<C>; 4]) -> Self {
        let chirality = gamma[0] * gamma[1] * gamma[2] * gamma[3];
        let projector = (Matrix4::identity() + chirality) * C::new(0.5, 0.0);
        let mut cols: Vec<Vector4<C>> = Vec::new();
        for c in 0..4 {
            let mut v: Vector4<C> = projector.column(c).into_owned();
            for b in &cols {
                v -= b * b.dotc(&v);
            }
            let norm = v.norm();
            if norm > 0.5 && cols.len() < 2 {
                cols.push(v / C::new(norm, 0.0));
            }
        }
        let minus_basis = if cols.len() == 2 {
            SMatrix::<C, 4, 2>::from_columns(&cols)
        } else {
            SMatrix::zeros()
        };
        Self {
            gamma,
            chirality,
            minus_basis,
        }
    }

    /// Clifford action of `Σ_a v_a e^a`.
    pub fn gamma_of(&self, v: &[f64; 4]) -> Matrix4<C> {
        (0..4).fold(Matrix4::zeros(), |acc, a| acc + self.gamma[a] * C::new(v[a], 0.0))
    }

    /// Compression `Q† M Q` to `S⁻`.
    pub fn restrict(&self, m: &Matrix4<C>) -> Matrix2<C> {
        self.minus_basis.adjoint() * m * self.minus_basis
    }

    /// Generator relations, chirality, and a rank-2 `S⁻`.
    pub fn validate(&self) -> Result<()> {
        let mut worst: f64 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { -2.0 } else { 0.0 };
                let r = self.gamma[a] * self.gamma[b] + self.gamma[b] * self.gamma[a] - Matrix4::identity() * C::new(delta, 0.0);
                worst = worst.max(r.norm());
            }
            worst = worst.max((self.chirality * self.gamma[a] + self.gamma[a] * self.chirality).norm());
        }
        worst = worst.max((self.chirality * self.chirality - Matrix4::identity()).norm());
        let q = &self.minus_basis;
        worst = worst.max((q.adjoint() * q - Matrix2::identity()).norm());
        worst = worst.max((self.chirality * q - q).norm());
        if worst > tolerances::EXACT {
            return Err(Error::Structural(format!("Clifford relations fail by {worst:e}")));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CliffordReport {
    /// `‖γ(e¹)γ(ν¹) − γ(e²)γ(ν²)‖` on `S⁻`.
    pub e1nu1_vs_e2nu2: f64,
    /// `‖γ(e¹)γ(ν²) + γ(e²)γ(ν¹)‖` on `S⁻`.
    pub e1nu2_vs_e2nu1: f64,
    /// `‖−γ(e¹e²ν¹ν²) + 1‖` on `S⁻`.
    pub volume: f64,
    /// Largest `‖Γγ(eʲν^l) + γ(eʲν^l)Γ‖` on `S⁻`.
    pub gamma_anticommutator: f64,
    pub identities_checked: usize,
}

impl CliffordReport {
    pub fn max_residual(&self) -> f64 {
        [self.e1nu1_vs_e2nu2, self.e1nu2_vs_e2nu1, self.volume, self.gamma_anticommutator]
            .into_iter()
            .fold(0.0, f64::max)
    }
}

/// The identities used for the Cayley computation, for an oriented orthonormal
/// frame `(e₁, e₂, ν₁, ν₂)` given as the columns of `frame`.
pub fn verify_clifford_identities(rep: &CliffordRep, frame: &Matrix4<f64>) -> Result<CliffordReport> {
    rep.validate()?;
    if (frame.transpose() * frame - Matrix4::identity()).amax() > tolerances::FRAME || frame.determinant() < 0.0 {
        return Err(Error::InvalidInput("frame must be oriented orthonormal".into()));
    }
    let g: Vec<Matrix4<C>> = (0..4)
        .map(|k| rep.gamma_of(&[frame[(0, k)], frame[(1, k)], frame[(2, k)], frame[(3, k)]]))
        .collect();
    let s = |m: Matrix4<C>| rep.restrict(&m);
    let gamma_op = s(g[0] * g[1]);
    let mut anti: f64 = 0.0;
    for j in 0..2 {
        for l in 2..4 {
            let m = s(g[j] * g[l]);
            anti = anti.max((gamma_op * m + m * gamma_op).norm());
        }
    }
    let report = CliffordReport {
        e1nu1_vs_e2nu2: (s(g[0] * g[2]) - s(g[1] * g[3])).norm(),
        e1nu2_vs_e2nu1: (s(g[0] * g[3]) + s(g[1] * g[2])).norm(),
        volume: (-s(g[0] * g[1] * g[2] * g[3]) + Matrix2::identity()).norm(),
        gamma_anticommutator: anti,
        identities_checked: 7,
    };
    if report.max_residual() > tolerances::EXACT {
        return Err(Error::Structural(format!(
            "Clifford identities fail on S- by {:e} (chirality convention)",
            report.max_residual()
        )));
    }
    Ok(report)
}

/// Spinor data at a point of `Σ` in the standard frame `(e₁, e₂, ν₁, ν₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinorFramePoint {
    pub rep: CliffordRep,
    pub shape: [Matrix2<f64>; 2],
    /// `Γ` on `S⁻`.
    pub gamma_op: Matrix2<C>,
    /// `s₁` with `Γs₁ = is₁`, `s₂ = Γs₁`, `s₃ = ω₂s₁/2`, `s₄ = ω₃s₁/2`.
    pub spinors: [Spinor; 4],
}

impl SpinorFramePoint {
    pub fn new(rep: CliffordRep, shape: [Matrix2<f64>; 2]) -> Result<Self> {
        Self::with_sign(rep, shape, 1.0)
    }

    /// As [`SpinorFramePoint::new`] with `s₁` replaced by `sign · s₁`.
    pub fn with_sign(rep: CliffordRep, shape: [Matrix2<f64>; 2], sign: f64) -> Result<Self> {
        rep.validate()?;
        let g = &rep.gamma;
        let gamma_op = rep.restrict(&(g[0] * g[1]));
        let m = gamma_op - Matrix2::identity() * I;
        let a = Spinor::new(-m[(0, 1)], m[(0, 0)]);
        let b = Spinor::new(m[(1, 1)], -m[(1, 0)]);
        let v = if a.norm() >= b.norm() { a } else { b };
        let lead = if v[0].norm() >= v[1].norm() { v[0] } else { v[1] };
        let s1 = v * (lead.conj() / lead.norm() / v.norm()) * C::new(sign, 0.0);
        let omegas = [
            g[0] * g[1] - g[2] * g[3],
            g[0] * g[2] - g[3] * g[1],
            g[0] * g[3] - g[1] * g[2],
        ];
        let lifted = omegas.map(|w| rep.restrict(&w) * s1 * C::new(0.5, 0.0));
        let point = Self {
            rep,
            shape,
            gamma_op,
            spinors: [s1, lifted[0], lifted[1], lifted[2]],
        };
        point.validate()?;
        Ok(point)
    }

    fn validate(&self) -> Result<()> {
        let mut worst = (self.gamma_op * self.gamma_op + Matrix2::identity()).norm();
        worst = worst.max((self.gamma_op * self.spinors[0] - self.spinors[0] * I).norm());
        worst = worst.max((self.gamma_op * self.spinors[0] - self.spinors[1]).norm());
        for a in 0..4 {
            for b in 0..4 {
                let delta = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((real_inner(&self.spinors[a], &self.spinors[b]) - delta).abs());
            }
        }
        consistency("spinor frame", worst, tolerances::EXACT)
    }

    /// Coordinates of a spinor on the real basis `s₁..s₄`.
    pub fn vertical_coordinates(&self, s: &Spinor) -> [f64; 4] {
        self.spinors.map(|b| real_inner(&b, s))
    }
}

/// The printed combination
/// `∇_{e_k}Γ = −A¹_{k1}γ(ν¹)γ(e²) − A²_{k1}γ(ν²)γ(e²) − A¹_{k2}γ(e¹)γ(ν¹) − A²_{k2}γ(e¹)γ(ν²)`
/// in the representation, before restriction; `k ∈ {0, 1}`.
pub fn nabla_gamma_full(rep: &CliffordRep, shape: &[Matrix2<f64>; 2], k: usize) -> Matrix4<C> {
    let g = &rep.gamma;
    combine_nabla(shape, k, [g[0], g[1], g[2], g[3]])
}

fn combine_nabla(shape: &[Matrix2<f64>; 2], k: usize, g: [Matrix4<C>; 4]) -> Matrix4<C> {
    let (a1, a2) = (&shape[0], &shape[1]);
    let c = |x: f64| C::new(x, 0.0);
    -(g[2] * g[1] * c(a1[(k, 0)]) + g[3] * g[1] * c(a2[(k, 0)]) + g[0] * g[2] * c(a1[(k, 1)]) + g[0] * g[3] * c(a2[(k, 1)]))
}

/// `∇_{e_k}Γ` on `S⁻`.
pub fn nabla_gamma(rep: &CliffordRep, shape: &[Matrix2<f64>; 2], k: usize) -> Matrix2<C> {
    rep.restrict(&nabla_gamma_full(rep, shape, k))
}

fn spin7_unit(i: usize) -> DVector<f64> {
    let mut v = DVector::zeros(8);
    v[i] = 1.0;
    v
}

/// The printed Cayley frame `(E₁, E₂, F₁, F₂)` at `(t₁, t₂)`.
pub fn cayley_frame(shape: &[Matrix2<f64>; 2], t1: f64, t2: f64) -> [DVector<f64>; 4] {
    let e = |k: usize| {
        let (a, b) = (shape[0][(k, 0)], shape[0][(k, 1)]);
        let (c, d) = (shape[1][(k, 0)], shape[1][(k, 1)]);
        let mut v = spin7_unit(spin7::E1 + k);
        v[spin7::F3] = 0.5 * t1 * (-a - d) + 0.5 * t2 * (c - b);
        v[spin7::F4] = 0.5 * t1 * (-c + b) + 0.5 * t2 * (-a - d);
        v
    };
    [e(0), e(1), spin7_unit(spin7::F1), spin7_unit(spin7::F2)]
}

/// Cayley frame from the spinor equation `ṡ = −½ i ∇_{e_k}Γ s` with
/// `s = t₁s₁ + t₂s₂`, given the two operators `∇_{e_k}Γ` on `S⁻`.
pub fn cayley_frame_from_nabla(point: &SpinorFramePoint, nabla: &[Matrix2<C>; 2], t1: f64, t2: f64) -> [DVector<f64>; 4] {
    let s = point.spinors[0] * C::new(t1, 0.0) + point.spinors[1] * C::new(t2, 0.0);
    let e = |k: usize| {
        let sdot = nabla[k] * s * C::new(0.0, -0.5);
        let coords = point.vertical_coordinates(&sdot);
        let mut v = spin7_unit(spin7::E1 + k);
        for (m, c) in coords.iter().enumerate() {
            v[spin7::F1 + m] = *c;
        }
        v
    };
    [e(0), e(1), spin7_unit(spin7::F1), spin7_unit(spin7::F2)]
}

/// Cayley frame through the spinor route with the printed `∇Γ`.
pub fn cayley_frame_spinor(point: &SpinorFramePoint, t1: f64, t2: f64) -> [DVector<f64>; 4] {
    let nabla = [0, 1].map(|k| nabla_gamma(&point.rep, &point.shape, k));
    cayley_frame_from_nabla(point, &nabla, t1, t2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BsSpin7Structure {
    pub profile: BsProfile,
}

impl BsSpin7Structure {
    pub fn new(profile: BsProfile) -> Self {
        Self { profile }
    }

    pub fn at(&self, r: f64) -> Result<Spin7FlatStructure> {
        let (u, v) = self.profile.uv(r);
        Spin7FlatStructure::new(u, v)
    }
}

/// `P₁ = ē¹f̌³ − ē²f̌⁴ − ē³f̌¹ + ē⁴f̌²` and `P₂ = ē¹f̌⁴ + ē²f̌³ − ē³f̌² − ē⁴f̌¹`.
pub fn eta_basis(structure: &Spin7FlatStructure) -> Result<[KForm; 2]> {
    use spin7::*;
    Ok([
        KForm::from_terms(&structure.space, 2, &[(1.0, &[E1, F3]), (-1.0, &[E2, F4]), (-1.0, &[E3, F1]), (1.0, &[E4, F2])])?,
        KForm::from_terms(&structure.space, 2, &[(1.0, &[E1, F4]), (1.0, &[E2, F3]), (-1.0, &[E3, F2]), (-1.0, &[E4, F1])])?,
    ])
}

#[derive(Debug, Clone)]
pub struct CayleyDefect {
    pub eta: KForm,
    /// Least-squares coefficients of `η` on `(P₁, P₂)`.
    pub coefficients: [f64; 2],
    pub residual: f64,
    /// `2u²v⁴ (t₁H¹ − t₂H², t₂H¹ + t₁H²)` with `H^l = −tr A^l`.
    pub closed_form: [f64; 2],
}

/// `η` on the printed Cayley frame, decomposed on `(P₁, P₂)`.
pub fn cayley_defect(shape: &[Matrix2<f64>; 2], t1: f64, t2: f64, structure: &BsSpin7Structure) -> Result<CayleyDefect> {
    let g = structure.at(t1.hypot(t2))?;
    let [e1, e2, f1, f2] = cayley_frame(shape, t1, t2);
    let eta = g.cayley_eta(&e1, &e2, &f1, &f2)?;
    let basis = eta_basis(&g)?;
    let dot = |a: &KForm, b: &KForm| a.coeffs().iter().zip(b.coeffs()).map(|(x, y)| x * y).sum::<f64>();
    let coefficients = [0, 1].map(|i| dot(&eta, &basis[i]) / dot(&basis[i], &basis[i]));
    let fitted = &basis[0].scale(coefficients[0]) + &basis[1].scale(coefficients[1]);
    let residual = (&eta - &fitted).max_abs();
    consistency("eta decomposition", residual, tolerances::ETA_DECOMPOSITION * (1.0 + eta.max_abs()))?;
    let h = [-shape[0].trace(), -shape[1].trace()];
    let k = 2.0 * g.u * g.u * g.v.powi(4);
    Ok(CayleyDefect {
        eta,
        coefficients,
        residual,
        closed_form: [k * (t1 * h[0] - t2 * h[1]), k * (t2 * h[0] + t1 * h[1])],
    })
}

/// Component of `X(·,·,·)` orthogonal to the span of four vectors.
pub fn x_closure_check(frame: &[DVector<f64>; 4], structure: &Spin7FlatStructure) -> Result<f64> {
    structure.closure_residual(frame)
}

/// Representation of `Cl(5)` on `ℂ⁴`: the four standard generators and `γ₅ = i·vol`.
#[derive(Debug, Clone, PartialEq)]
pub struct AmbientClifford {
    pub gamma: [Matrix4<C>; 5],
}

impl AmbientClifford {
    pub fn from_rep(rep: &CliffordRep) -> Self {
        let g = rep.gamma;
        Self {
            gamma: [g[0], g[1], g[2], g[3], rep.chirality * I],
        }
    }

    pub fn gamma_of(&self, v: &DVector<f64>) -> Matrix4<C> {
        (0..5).fold(Matrix4::zeros(), |acc, a| acc + self.gamma[a] * C::new(v[a], 0.0))
    }

    fn gamma_op(&self, frame: &AdaptedFrame) -> Matrix4<C> {
        self.gamma_of(&frame.tangent[0]) * self.gamma_of(&frame.tangent[1])
    }
}

/// `∇_{e_k}Γ` along a surface in `S⁴ ⊂ ℝ⁵` from the ambient derivative of
/// `Γ = γ(e₁)γ(e₂)` plus the sphere's correction
/// `⟨e₁,X⟩γ(x)γ(e₂) + ⟨e₂,X⟩γ(e₁)γ(x)`.
pub fn nabla_gamma_numeric(cl: &AmbientClifford, imm: &Immersion, s: &[f64], gauge: &NormalGauge) -> Result<[Matrix4<C>; 2]> {
    if imm.p != 2 || imm.n != 4 {
        return Err(Error::InvalidInput("spinor frames need a surface in S^4".into()));
    }
    let frame = adapted_frame(imm, s, gauge)?;
    let section = |q: &[f64]| -> Result<DVector<C>> {
        let g = cl.gamma_op(&adapted_frame(imm, q, gauge)?);
        Ok(DVector::from_column_slice(g.as_slice()))
    };
    let partials = fd_pushforward(section, s, FdConfig::richardson(FRAME_STEP))?;
    let m = frame.tangent_in_chart();
    let gx = cl.gamma_of(&frame.position);
    let ge = [cl.gamma_of(&frame.tangent[0]), cl.gamma_of(&frame.tangent[1])];
    Ok([0, 1].map(|k| {
        let d = &partials[0] * C::new(m[(0, k)], 0.0) + &partials[1] * C::new(m[(1, k)], 0.0);
        let d = Matrix4::from_column_slice(d.as_slice());
        if k == 0 {
            d + gx * ge[1]
        } else {
            d + ge[0] * gx
        }
    }))
}

/// The printed `∇_{e_k}Γ` in the ambient representation of the frame at `s`.
pub fn nabla_gamma_printed_ambient(cl: &AmbientClifford, frame: &AdaptedFrame, shape: &[Matrix2<f64>; 2], k: usize) -> Matrix4<C> {
    let g = [
        cl.gamma_of(&frame.tangent[0]),
        cl.gamma_of(&frame.tangent[1]),
        cl.gamma_of(&frame.normal[0]),
        cl.gamma_of(&frame.normal[1]),
    ];
    combine_nabla(shape, k, g)
}

/// Transfers an element of `span{γ(f_a)γ(f_b)}` over the frame `(e₁, e₂, ν₁, ν₂)`
/// into the standard representation, by trace pairing.
pub fn transfer_bivector(cl: &AmbientClifford, frame: &AdaptedFrame, m: &Matrix4<C>, rep: &CliffordRep) -> Matrix4<C> {
    let vectors = [&frame.tangent[0], &frame.tangent[1], &frame.normal[0], &frame.normal[1]];
    let mut out = Matrix4::zeros();
    for a in 0..4 {
        for b in a + 1..4 {
            let basis = cl.gamma_of(vectors[a]) * cl.gamma_of(vectors[b]);
            let coeff = -(basis * m).trace() / C::new(4.0, 0.0);
            out += rep.gamma[a] * rep.gamma[b] * coeff;
        }
    }
    out
}

/// Cayley frame built from the finite-difference `∇Γ` along the surface.
pub fn cayley_frame_numeric(point: &SpinorFramePoint, imm: &Immersion, s: &[f64], gauge: &NormalGauge, t1: f64, t2: f64) -> Result<[DVector<f64>; 4]> {
    let cl = AmbientClifford::from_rep(&point.rep);
    let frame = adapted_frame(imm, s, gauge)?;
    let numeric = nabla_gamma_numeric(&cl, imm, s, gauge)?;
    let nabla = numeric.map(|m| point.rep.restrict(&transfer_bivector(&cl, &frame, &m, &point.rep)));
    Ok(cayley_frame_from_nabla(point, &nabla, t1, t2))
}

/// Largest entry of a difference of frames.
pub fn frame_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).amax()).fold(0.0, f64::max)
}

/// Random symmetric shape pair for tests and benches.
pub fn shape_from(c: [f64; 6]) -> [Matrix2<f64>; 2] {
    [Matrix2::new(c[0], c[1], c[1], c[2]), Matrix2::new(c[3], c[4], c[4], c[5])]
}

/// Shape pair of a dynamic second fundamental form.
pub fn shape_pair(shape: &[DMatrix<f64>]) -> Result<[Matrix2<f64>; 2]> {
    if shape.len() != 2 || shape.iter().any(|a| a.shape() != (2, 2)) {
        return Err(Error::InvalidInput("need two 2x2 shape matrices".into()));
    }
    Ok([0, 1].map(|l| Matrix2::new(shape[l][(0, 0)], shape[l][(0, 1)], shape[l][(1, 0)], shape[l][(1, 1)])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{normal_gauge, second_fundamental_form_with_gauge, CatalogEntry};
    use crate::sampling::rng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::Rng;

    fn coeff_strategy() -> impl Strategy<Value = [f64; 6]> {
        prop::array::uniform6(-2.0..2.0f64)
    }

    fn trace_free(c: [f64; 6]) -> [Matrix2<f64>; 2] {
        shape_from([c[0], c[1], -c[0], c[3], c[4], -c[3]])
    }

    #[test]
    fn representation_is_valid() {
        let rep = CliffordRep::standard();
        rep.validate().unwrap();
        let r = verify_clifford_identities(&rep, &Matrix4::identity()).unwrap();
        assert!(r.max_residual() <= 1e-12);
        let mut odd = Matrix4::identity();
        odd[(3, 3)] = -1.0;
        assert!(verify_clifford_identities(&rep, &odd).is_err());
    }

    #[test]
    fn identities_on_rotated_frames() {
        let rep = CliffordRep::standard();
        let mut r = rng(31);
        let space = crate::exterior::InnerProductSpace::euclidean(4);
        for _ in 0..50 {
            let vs = crate::octonion::random_orthonormal_frame(&space, 4, &mut r);
            let mut m = DMatrix::from_columns(&vs);
            if m.determinant() < 0.0 {
                m.column_mut(3).neg_mut();
            }
            let frame = Matrix4::from_fn(|i, j| m[(i, j)]);
            assert!(verify_clifford_identities(&rep, &frame).unwrap().max_residual() <= 1e-12);
        }
    }

    #[test]
    fn wrong_chirality_is_detected() {
        let rep = CliffordRep::standard();
        let g = rep.gamma;
        // Reversing one generator exchanges the two halves; pairing those with the
        // original generators puts S⁻ on the wrong side.
        let flipped = CliffordRep::from_gammas([g[0], g[1], g[2], -g[3]]);
        let wrong = CliffordRep {
            minus_basis: flipped.minus_basis,
            ..rep
        };
        assert!(matches!(verify_clifford_identities(&wrong, &Matrix4::identity()), Err(Error::Structural(_))));
    }

    #[test]
    fn gamma_eigenvalues() {
        let p = SpinorFramePoint::new(CliffordRep::standard(), [Matrix2::zeros(); 2]).unwrap();
        let tr = p.gamma_op.trace();
        let det = p.gamma_op.determinant();
        assert!(tr.norm() < 1e-15);
        assert!((det - ONE).norm() < 1e-15);
    }

    #[test]
    fn zero_shape_frames() {
        let z = [Matrix2::zeros(); 2];
        let rep = CliffordRep::standard();
        for k in 0..2 {
            assert_eq!(nabla_gamma(&rep, &z, k), Matrix2::zeros());
        }
        let f = cayley_frame(&z, 0.7, -1.2);
        for (k, v) in f.iter().enumerate() {
            let expect = [spin7::E1, spin7::E2, spin7::F1, spin7::F2][k];
            assert_eq!(*v, spin7_unit(expect));
        }
        let f = cayley_frame(&shape_from([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), 0.0, 0.0);
        assert_eq!(f[0], spin7_unit(spin7::E1));
        assert_eq!(f[1], spin7_unit(spin7::E2));
    }

    #[test]
    fn vertical_fibre_is_cayley() {
        for (u, v) in [(1.0, 1.0), (1.7, 0.6)] {
            let g = Spin7FlatStructure::new(u, v).unwrap();
            let f = [spin7::F1, spin7::F2, spin7::F3, spin7::F4].map(spin7_unit);
            assert!(x_closure_check(&f, &g).unwrap() < 1e-14);
            let refs: Vec<&DVector<f64>> = f.iter().collect();
            assert_abs_diff_eq!(g.phi.at(&refs), v.powi(4), epsilon = 1e-14);
        }
        let g = Spin7FlatStructure::flat();
        let frame = cayley_frame(&[Matrix2::zeros(); 2], 0.4, 1.1);
        assert!(x_closure_check(&frame, &g).unwrap() <= 1e-9);
        let mut r = rng(32);
        let mut generic = 0;
        for _ in 0..20 {
            let f = std::array::from_fn(|_| DVector::from_fn(8, |_, _| r.gen_range(-1.0..1.0)));
            if x_closure_check(&f, &g).unwrap() > 1e-3 {
                generic += 1;
            }
        }
        assert!(generic >= 18);
    }

    #[test]
    fn cayley_examples() {
        let s = BsSpin7Structure::new(BsProfile::Unit);
        let d = cayley_defect(&[Matrix2::zeros(); 2], 1.3, -0.4, &s).unwrap();
        assert_eq!(d.eta.max_abs(), 0.0);
        let d = cayley_defect(&trace_free([0.5, 0.9, 0.0, -1.1, 0.3, 0.0]), 1.3, -0.4, &s).unwrap();
        assert!(d.eta.max_abs() < 1e-14);
        let lat = [Matrix2::identity() * -0.8, Matrix2::identity() * 0.2];
        let d = cayley_defect(&lat, 1.0, 0.0, &s).unwrap();
        assert_abs_diff_eq!(d.coefficients[0], 2.0 * 1.6, epsilon = 1e-12);
        assert_abs_diff_eq!(d.coefficients[1], 2.0 * -0.4, epsilon = 1e-12);
    }

    #[test]
    fn spinor_sign_cancels() {
        let shape = shape_from([0.3, -0.7, 1.1, 0.4, 0.9, -0.2]);
        let a = SpinorFramePoint::new(CliffordRep::standard(), shape).unwrap();
        let b = SpinorFramePoint::with_sign(CliffordRep::standard(), shape, -1.0).unwrap();
        let fa = cayley_frame_spinor(&a, 0.8, -1.5);
        let fb = cayley_frame_spinor(&b, 0.8, -1.5);
        assert!(frame_distance(&fa, &fb) < 1e-14);
    }

    #[test]
    fn nabla_gamma_matches_fd_along_surfaces() {
        let rep = CliffordRep::standard();
        let cl = AmbientClifford::from_rep(&rep);
        let mut r = rng(33);
        for entry in [CatalogEntry::Veronese, CatalogEntry::CliffordTorus { n: 4 }, CatalogEntry::LatitudeSphere { p: 2, n: 4, radius: 0.6 }] {
            let imm = entry.build().unwrap();
            for s in imm.sample_random(4, &mut r) {
                let gauge = normal_gauge(&imm, &s).unwrap();
                let sff = second_fundamental_form_with_gauge(&imm, &s, &gauge).unwrap();
                let shape = shape_pair(&sff.shape()).unwrap();
                let numeric = nabla_gamma_numeric(&cl, &imm, &s, &gauge).unwrap();
                let gamma = cl.gamma_op(&sff.frame);
                for k in 0..2 {
                    let printed = nabla_gamma_printed_ambient(&cl, &sff.frame, &shape, k);
                    assert!((printed - numeric[k]).norm() < 1e-6, "{entry:?}");
                    assert!((gamma * numeric[k] + numeric[k] * gamma).norm() < 1e-6);
                }
                let point = SpinorFramePoint::new(rep.clone(), shape).unwrap();
                let (t1, t2) = (r.gen_range(-2.0..2.0), r.gen_range(-2.0..2.0));
                let fd = cayley_frame_numeric(&point, &imm, &s, &gauge, t1, t2).unwrap();
                assert!(frame_distance(&fd, &cayley_frame(&shape, t1, t2)) < 1e-6);
            }
        }
    }

    proptest! {
        #[test]
        fn nabla_anticommutes_with_gamma(c in coeff_strategy()) {
            let rep = CliffordRep::standard();
            let p = SpinorFramePoint::new(rep.clone(), shape_from(c)).unwrap();
            for k in 0..2 {
                let n = nabla_gamma(&rep, &p.shape, k);
                prop_assert!((p.gamma_op * n + n * p.gamma_op).norm() <= 1e-12);
            }
        }

        #[test]
        fn spinor_route_reproduces_printed_frame(c in coeff_strategy(), t1 in -3.0..3.0f64, t2 in -3.0..3.0f64) {
            let shape = shape_from(c);
            let p = SpinorFramePoint::new(CliffordRep::standard(), shape).unwrap();
            prop_assert!(frame_distance(&cayley_frame_spinor(&p, t1, t2), &cayley_frame(&shape, t1, t2)) <= 1e-12);
        }

        #[test]
        fn frame_is_linear(c in coeff_strategy(), d in coeff_strategy(), t1 in -2.0..2.0f64, t2 in -2.0..2.0f64) {
            let sum: [f64; 6] = std::array::from_fn(|i| c[i] + 2.0 * d[i]);
            let base = cayley_frame(&shape_from([0.0; 6]), t1, t2);
            let a = cayley_frame(&shape_from(c), t1, t2);
            let b = cayley_frame(&shape_from(d), t1, t2);
            let s = cayley_frame(&shape_from(sum), t1, t2);
            for k in 0..4 {
                prop_assert!((&s[k] - (&a[k] + (&b[k] - &base[k]) * 2.0)).amax() <= 1e-12);
            }
            let a2 = cayley_frame(&shape_from(c), 2.0 * t1, 2.0 * t2);
            for k in 0..4 {
                prop_assert!((&a2[k] - &base[k] - (&a[k] - &base[k]) * 2.0).amax() <= 1e-12);
            }
        }

        #[test]
        fn eta_matches_closed_form(c in coeff_strategy(), t1 in -2.0..2.0f64, t2 in -2.0..2.0f64, growing in any::<bool>()) {
            let s = BsSpin7Structure::new(if growing { BsProfile::Growing } else { BsProfile::Unit });
            let d = cayley_defect(&shape_from(c), t1, t2, &s).unwrap();
            for i in 0..2 {
                prop_assert!((d.coefficients[i] - d.closed_form[i]).abs() <= 1e-9 * (1.0 + d.closed_form[i].abs()));
            }
        }

        #[test]
        fn dual_verifiers_agree(c in coeff_strategy(), t1 in 0.5..2.0f64, t2 in -2.0..2.0f64, growing in any::<bool>(), minimal in any::<bool>()) {
            let s = BsSpin7Structure::new(if growing { BsProfile::Growing } else { BsProfile::Unit });
            let shape = if minimal { trace_free(c) } else { shape_from(c) };
            let h = shape[0].trace().hypot(shape[1].trace());
            prop_assume!(minimal || h > 0.1);
            let d = cayley_defect(&shape, t1, t2, &s).unwrap();
            let g = s.at(t1.hypot(t2)).unwrap();
            let closure = x_closure_check(&cayley_frame(&shape, t1, t2), &g).unwrap();
            prop_assert_eq!(d.eta.max_abs() <= 1e-8, closure <= 1e-8);
            prop_assert_eq!(closure <= 1e-8, minimal);
        }
    }
}
