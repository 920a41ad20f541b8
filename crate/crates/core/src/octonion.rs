//! Octonions, the G₂ and Spin(7) flat models, cross products, π₇ and η.
//!
//! Octonions are built by Cayley–Dickson doubling of the quaternions,
//! `(a,b)(c,d) = (ac − d̄b, da + bc̄)` on the basis `(1, i, j, k, ℓ, iℓ, jℓ, kℓ)`.
//! The imaginary units are identified, in order, with
//! `(f̌₁, f̌₂, f̌₃, ē₀, ē₁, ē₂, ē₃)`; with this choice the structure form
//! `⟨xy, z⟩` on imaginary octonions is exactly the G₂ form `φ` at `u = v = 1`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;

use crate::error::{consistency, Result};
use crate::exterior::{gram_schmidt, index_tuples, sharp, InnerProductSpace, KForm};
use crate::tolerances::EXACT;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Octonion(pub [f64; 8]);

type Quat = [f64; 4];

fn qmul(a: Quat, b: Quat) -> Quat {
    [
        a[0] * b[0] - a[1] * b[1] - a[2] * b[2] - a[3] * b[3],
        a[0] * b[1] + a[1] * b[0] + a[2] * b[3] - a[3] * b[2],
        a[0] * b[2] - a[1] * b[3] + a[2] * b[0] + a[3] * b[1],
        a[0] * b[3] + a[1] * b[2] - a[2] * b[1] + a[3] * b[0],
    ]
}

fn qconj(a: Quat) -> Quat {
    [a[0], -a[1], -a[2], -a[3]]
}

fn qsub(a: Quat, b: Quat) -> Quat {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]]
}

fn qadd(a: Quat, b: Quat) -> Quat {
    [a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]]
}

impl Octonion {
    pub fn unit(i: usize) -> Self {
        let mut o = [0.0; 8];
        o[i] = 1.0;
        Self(o)
    }

    /// Purely imaginary octonion with components on `e₁..e₇`.
    pub fn imaginary(v: &[f64]) -> Self {
        let mut o = [0.0; 8];
        o[1..].copy_from_slice(&v[..7]);
        Self(o)
    }

    pub fn im(&self) -> DVector<f64> {
        DVector::from_column_slice(&self.0[1..])
    }

    fn halves(&self) -> (Quat, Quat) {
        let o = self.0;
        ([o[0], o[1], o[2], o[3]], [o[4], o[5], o[6], o[7]])
    }

    /// Cayley–Dickson product.
    pub fn cd_mul(&self, other: &Self) -> Self {
        let (a, b) = self.halves();
        let (c, d) = other.halves();
        let lo = qsub(qmul(a, c), qmul(qconj(d), b));
        let hi = qadd(qmul(d, a), qmul(b, qconj(c)));
        Self([lo[0], lo[1], lo[2], lo[3], hi[0], hi[1], hi[2], hi[3]])
    }

    pub fn conj(&self) -> Self {
        let mut o = self.0.map(|x| -x);
        o[0] = self.0[0];
        Self(o)
    }

    pub fn norm(&self) -> f64 {
        self.0.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    pub fn add(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] + other.0[i]))
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self(std::array::from_fn(|i| self.0[i] - other.0[i]))
    }
}

/// Structure constants `e_i e_j = Σ_k c[i][j][k] e_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct OctonionTable {
    pub c: [[[f64; 8]; 8]; 8],
}

impl Default for OctonionTable {
    fn default() -> Self {
        Self::cayley_dickson()
    }
}

impl OctonionTable {
    pub fn cayley_dickson() -> Self {
        let mut c = [[[0.0; 8]; 8]; 8];
        for (i, row) in c.iter_mut().enumerate() {
            for (j, out) in row.iter_mut().enumerate() {
                *out = Octonion::unit(i).cd_mul(&Octonion::unit(j)).0;
            }
        }
        Self { c }
    }

    pub fn mul(&self, a: &Octonion, b: &Octonion) -> Octonion {
        let mut out = [0.0; 8];
        for i in 0..8 {
            if a.0[i] == 0.0 {
                continue;
            }
            for j in 0..8 {
                let ab = a.0[i] * b.0[j];
                if ab == 0.0 {
                    continue;
                }
                for (k, o) in out.iter_mut().enumerate() {
                    *o += ab * self.c[i][j][k];
                }
            }
        }
        Octonion(out)
    }

    /// `a(bc) − (ab)c`.
    pub fn associator(&self, a: &Octonion, b: &Octonion, c: &Octonion) -> Octonion {
        self.mul(a, &self.mul(b, c)).sub(&self.mul(&self.mul(a, b), c))
    }
}

pub mod g2 {
    pub const F1: usize = 0;
    pub const F2: usize = 1;
    pub const F3: usize = 2;
    pub const E0: usize = 3;
    pub const E1: usize = 4;
    pub const E2: usize = 5;
    pub const E3: usize = 6;
    pub const LABELS: [&str; 7] = ["f1", "f2", "f3", "e0", "e1", "e2", "e3"];
}

pub mod spin7 {
    pub const E1: usize = 0;
    pub const E2: usize = 1;
    pub const E3: usize = 2;
    pub const E4: usize = 3;
    pub const F1: usize = 4;
    pub const F2: usize = 5;
    pub const F3: usize = 6;
    pub const F4: usize = 7;
    pub const LABELS: [&str; 8] = ["e1", "e2", "e3", "e4", "f1", "f2", "f3", "f4"];
}

/// `(c, [i, j])` pairs for `a·(e^{ij} − e^{kl})`.
fn asd_pair(c: f64, ij: [usize; 2], kl: [usize; 2]) -> [(f64, [usize; 2]); 2] {
    [(c, ij), (-c, kl)]
}

fn terms_times(prefix: &[usize], c: f64, pairs: &[(f64, [usize; 2]); 2]) -> Vec<(f64, Vec<usize>)> {
    pairs
        .iter()
        .map(|(s, idx)| {
            let mut v = prefix.to_vec();
            v.extend_from_slice(idx);
            (c * s, v)
        })
        .collect()
}

fn build(space: &Arc<InnerProductSpace>, degree: usize, terms: &[(f64, Vec<usize>)]) -> KForm {
    let refs: Vec<(f64, &[usize])> = terms.iter().map(|(c, v)| (*c, v.as_slice())).collect();
    KForm::from_terms(space, degree, &refs).expect("static form definition")
}

/// Flat G₂ model on `(f̌₁, f̌₂, f̌₃, ē₀, ē₁, ē₂, ē₃)` with metric `diag(v²·3, u²·4)`.
#[derive(Debug, Clone)]
pub struct G2FlatStructure {
    pub space: Arc<InnerProductSpace>,
    pub phi: KForm,
    pub star_phi: KForm,
    pub u: f64,
    pub v: f64,
}

impl G2FlatStructure {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        use g2::*;
        if !(u > 0.0 && v > 0.0) {
            return Err(crate::Error::InvalidInput(format!("scales must be positive, got u={u}, v={v}")));
        }
        let (u2, v2) = (u * u, v * v);
        let space = Arc::new(InnerProductSpace::diagonal(
            &[v2, v2, v2, u2, u2, u2, u2],
            &LABELS,
        )?);
        let pairs = [
            asd_pair(1.0, [E0, E1], [E2, E3]),
            asd_pair(1.0, [E0, E2], [E3, E1]),
            asd_pair(1.0, [E0, E3], [E1, E2]),
        ];
        let mut phi_terms = vec![(v2 * v, vec![F1, F2, F3])];
        let mut star_terms = vec![(u2 * u2, vec![E0, E1, E2, E3])];
        let verticals = [[F1], [F2], [F3]];
        let vertical_pairs = [[F2, F3], [F3, F1], [F1, F2]];
        for a in 0..3 {
            phi_terms.extend(terms_times(&verticals[a], u2 * v, &pairs[a]));
            star_terms.extend(terms_times(&vertical_pairs[a], -u2 * v2, &pairs[a]));
        }
        let phi = build(&space, 3, &phi_terms);
        let star_phi = build(&space, 4, &star_terms);
        Ok(Self {
            space,
            phi,
            star_phi,
            u,
            v,
        })
    }

    pub fn flat() -> Self {
        Self::new(1.0, 1.0).expect("unit scales")
    }

    pub fn basis(&self, i: usize) -> DVector<f64> {
        self.space.basis_vector(i)
    }

    /// Orthonormal-frame coordinates `(v·x_f, u·x_e)`.
    fn to_orthonormal(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(7, |i, _| if i < 3 { self.v * x[i] } else { self.u * x[i] })
    }

    fn from_orthonormal(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_fn(7, |i, _| if i < 3 { x[i] / self.v } else { x[i] / self.u })
    }

    /// `u × v = (v ⌟ u ⌟ φ)♯`.
    pub fn cross7(&self, a: &DVector<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
        sharp(&self.phi.contract(&[b.clone(), a.clone()])?)
    }

    /// `u ⌟ v ⌟ w ⌟ *φ`, the 1-form `y ↦ *φ(w, v, u, y)`.
    pub fn assoc_defect(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<KForm> {
        self.star_phi.contract(&[a.clone(), b.clone(), c.clone()])
    }

    /// `u(vw) − (uv)w` through the octonion table.
    pub fn associator_octonion(&self, table: &OctonionTable, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> DVector<f64> {
        let [oa, ob, oc] = [a, b, c].map(|x| Octonion::imaginary(self.to_orthonormal(x).as_slice()));
        self.from_orthonormal(&table.associator(&oa, &ob, &oc).im())
    }

    /// `−2 (u ⌟ v ⌟ w ⌟ *φ)♯`.
    pub fn associator_form(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        Ok(sharp(&self.assoc_defect(a, b, c)?)? * -2.0)
    }

    /// Both routes, checked against each other; returns the octonion route.
    pub fn associator(&self, table: &OctonionTable, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        let oct = self.associator_octonion(table, a, b, c);
        let form = self.associator_form(a, b, c)?;
        let scale = [a, b, c].iter().map(|x| self.space.norm(x)).product::<f64>().max(1.0);
        consistency("associator routes", (&oct - &form).amax(), EXACT * scale)?;
        Ok(oct)
    }
}

/// Flat Spin(7) model on `(ē₁..ē₄, f̌₁..f̌₄)` with metric `diag(u²·4, v²·4)`.
#[derive(Debug, Clone)]
pub struct Spin7FlatStructure {
    pub space: Arc<InnerProductSpace>,
    pub phi: KForm,
    pub u: f64,
    pub v: f64,
}

impl Spin7FlatStructure {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        use spin7::*;
        if !(u > 0.0 && v > 0.0) {
            return Err(crate::Error::InvalidInput(format!("scales must be positive, got u={u}, v={v}")));
        }
        let (u2, v2) = (u * u, v * v);
        let space = Arc::new(InnerProductSpace::diagonal(
            &[u2, u2, u2, u2, v2, v2, v2, v2],
            &LABELS,
        )?);
        let mut terms = vec![(u2 * u2, vec![E1, E2, E3, E4]), (v2 * v2, vec![F1, F2, F3, F4])];
        let e = [E1, E2, E3, E4];
        let f = [F1, F2, F3, F4];
        for (a, b, c, d) in [(0, 1, 2, 3), (0, 2, 3, 1), (0, 3, 1, 2)] {
            for (sh, h) in [(1.0, [e[a], e[b]]), (-1.0, [e[c], e[d]])] {
                for (sv, w) in [(1.0, [f[a], f[b]]), (-1.0, [f[c], f[d]])] {
                    terms.push((u2 * v2 * sh * sv, vec![h[0], h[1], w[0], w[1]]));
                }
            }
        }
        let phi = build(&space, 4, &terms);
        Ok(Self { space, phi, u, v })
    }

    pub fn flat() -> Self {
        Self::new(1.0, 1.0).expect("unit scales")
    }

    pub fn basis(&self, i: usize) -> DVector<f64> {
        self.space.basis_vector(i)
    }

    /// `X(u,v,w) = (w ⌟ v ⌟ u ⌟ Φ)♯`, i.e. `⟨X, y⟩ = Φ(u, v, w, y)`.
    pub fn triple_cross(&self, a: &DVector<f64>, b: &DVector<f64>, c: &DVector<f64>) -> Result<DVector<f64>> {
        sharp(&self.phi.contract(&[c.clone(), b.clone(), a.clone()])?)
    }

    /// Linear extension of `u♭∧v♭ ↦ u ⌟ v ⌟ Φ = Φ(v, u, ·, ·)`.
    pub fn contraction_operator(&self, alpha: &KForm) -> Result<KForm> {
        if alpha.degree() != 2 {
            return Err(crate::Error::Structural(format!("expected a 2-form, got degree {}", alpha.degree())));
        }
        let g_inv = self.space.metric().clone().try_inverse().expect("positive definite");
        let m = alpha.to_matrix();
        let raised = &g_inv * m * &g_inv;
        let mut out = DMatrix::<f64>::zeros(8, 8);
        for c in 0..8 {
            for d in 0..8 {
                let mut acc = 0.0;
                for a in 0..8 {
                    for b in 0..8 {
                        if raised[(a, b)] != 0.0 {
                            acc += raised[(a, b)] * self.phi.coeff(&[b, a, c, d]);
                        }
                    }
                }
                out[(c, d)] = 0.5 * acc;
            }
        }
        Ok(KForm::from_matrix(&self.space, &out))
    }

    /// `π₇(α) = ¼ (α + T α)`.
    pub fn pi7(&self, alpha: &KForm) -> Result<KForm> {
        Ok((alpha + &self.contraction_operator(alpha)?).scale(0.25))
    }

    /// `π₇` as a 28×28 matrix on coefficient vectors.
    pub fn pi7_matrix(&self) -> DMatrix<f64> {
        let tuples = index_tuples(8, 2);
        let mut m = DMatrix::zeros(tuples.len(), tuples.len());
        for (col, idx) in tuples.iter().enumerate() {
            let e = KForm::basis(&self.space, idx).expect("valid index");
            let p = self.pi7(&e).expect("degree 2");
            for (row, c) in p.coeffs().iter().enumerate() {
                m[(row, col)] = *c;
            }
        }
        m
    }

    /// `η = Σ (a♭ ∧ X(b,c,d)♭ + a ⌟ X(b,c,d) ⌟ Φ)` over the four cyclic terms.
    pub fn cayley_eta(&self, x: &DVector<f64>, y: &DVector<f64>, z: &DVector<f64>, w: &DVector<f64>) -> Result<KForm> {
        let terms = [(x, [y, z, w]), (y, [z, x, w]), (z, [x, y, w]), (w, [y, x, z])];
        let mut eta = KForm::zero(&self.space, 2);
        for (a, [b, c, d]) in terms {
            let cross = self.triple_cross(b, c, d)?;
            let wedge = crate::exterior::flat(&self.space, a)?.wedge(&crate::exterior::flat(&self.space, &cross)?)?;
            let contracted = self.phi.contract(&[a.clone(), cross])?;
            eta = &(&eta + &wedge) + &contracted;
        }
        Ok(eta)
    }

    /// Largest component of `X(·,·,·)` orthogonal to the span, over basis triples
    /// of a metric-orthonormalized copy of `vectors`.
    pub fn closure_residual(&self, vectors: &[DVector<f64>; 4]) -> Result<f64> {
        let frame = gram_schmidt(vectors, &self.space)?;
        let q = &frame.vectors;
        let mut worst: f64 = 0.0;
        for (i, j, k) in [(0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)] {
            let mut x = self.triple_cross(&q[i], &q[j], &q[k])?;
            for b in q {
                let c = self.space.inner(b, &x);
                x -= b * c;
            }
            worst = worst.max(self.space.norm(&x));
        }
        Ok(worst)
    }
}

/// Eigenvalue count of a symmetric matrix above `threshold`.
pub fn rank_by_eigencount(m: &DMatrix<f64>, threshold: f64) -> usize {
    let sym = (m + m.transpose()) * 0.5;
    SymmetricEigen::new(sym)
        .eigenvalues
        .iter()
        .filter(|e| e.abs() > threshold)
        .count()
}

/// Random orthonormal `k`-frame in the metric of `space`.
pub fn random_orthonormal_frame<R: Rng>(space: &InnerProductSpace, k: usize, rng: &mut R) -> Vec<DVector<f64>> {
    loop {
        let vs: Vec<DVector<f64>> = (0..k)
            .map(|_| DVector::from_fn(space.dim(), |_, _| crate::sampling::standard_normal(rng)))
            .collect();
        if let Ok(f) = gram_schmidt(&vs, space) {
            return f.vectors;
        }
    }
}

/// Empirical comass: max of `form` over `trials` random orthonormal frames.
pub fn comass_check<R: Rng>(form: &KForm, trials: usize, rng: &mut R) -> f64 {
    let k = form.degree();
    (0..trials)
        .map(|_| {
            let frame = random_orthonormal_frame(form.space(), k, rng);
            let refs: Vec<&DVector<f64>> = frame.iter().collect();
            form.at(&refs).abs()
        })
        .fold(0.0, f64::max)
}
