//! The Stenzel Kähler structure on the quadric `Q = {Σ z_k² = 1} ⊂ ℂⁿ⁺¹ ≅ T*Sⁿ`,
//! conormal-bundle frames and the special Lagrangian verifier.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{consistency, Error, Result};
use crate::exterior::{fd_pushforward, FdConfig, RANK_TOLERANCE};
use crate::immersions::{adapted_frame, normal_gauge, second_fundamental_form_with_gauge, Immersion, NormalGauge, FRAME_STEP};
use crate::sampling::{uniform_ball, unit_sphere};
use crate::tolerances;

/// Largest fibre radius `|t|` used by the samplers.
pub const T_MAX: f64 = 5.0;

type C = Complex64;

/// `sinh(t)/t`, smooth at zero.
pub fn sinhc(t: f64) -> f64 {
    if t.abs() < 1e-3 {
        let t2 = t * t;
        1.0 + t2 / 6.0 * (1.0 + t2 / 20.0 * (1.0 + t2 / 42.0))
    } else {
        t.sinh() / t
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    pub x: DVector<f64>,
    pub xi: DVector<f64>,
}

impl CotangentPoint {
    pub fn new(x: DVector<f64>, xi: DVector<f64>) -> Result<Self> {
        if x.len() != xi.len() {
            return Err(Error::DimensionMismatch {
                expected: x.len(),
                found: xi.len(),
            });
        }
        if (x.norm() - 1.0).abs() > tolerances::EXACT || x.dot(&xi).abs() > tolerances::EXACT * (1.0 + xi.norm()) {
            return Err(Error::InvalidInput("cotangent point needs |x| = 1 and <x, xi> = 0".into()));
        }
        Ok(Self { x, xi })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuadricPoint {
    pub z: DVector<C>,
    pub r: f64,
}

impl QuadricPoint {
    pub fn new(z: DVector<C>) -> Result<Self> {
        let residual = (z.iter().map(|c| c * c).sum::<C>() - C::new(1.0, 0.0)).norm();
        let r = z.norm();
        if residual > 1e-10 * r * r {
            return Err(Error::InvalidInput(format!("point is off the quadric by {residual:e}")));
        }
        Ok(Self { z, r })
    }

    pub fn dim(&self) -> usize {
        self.z.len() - 1
    }
}

/// `Ψ(x, ξ) = x cosh|ξ| + i ξ sinh|ξ|/|ξ|`.
pub fn szoke(x: &DVector<f64>, xi: &DVector<f64>) -> DVector<C> {
    let t = xi.norm();
    let (c, s) = (t.cosh(), sinhc(t));
    DVector::from_fn(x.len(), |k, _| C::new(x[k] * c, xi[k] * s))
}

pub fn szoke_map(p: &CotangentPoint) -> QuadricPoint {
    let z = szoke(&p.x, &p.xi);
    let r = z.norm();
    QuadricPoint { z, r }
}

/// Radial potential `u(ρ)` with `ρ = |z|²`; derivatives are taken in `ρ`.
#[derive(Clone)]
pub enum StenzelProfile {
    /// `u = ρ`.
    Flat,
    /// `u = ρ + ρ²/4`.
    Quadratic,
    Custom {
        name: String,
        derivatives: Arc<dyn Fn(f64) -> (f64, f64, f64) + Send + Sync>,
    },
}

impl fmt::Debug for StenzelProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl StenzelProfile {
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "flat" => Ok(Self::Flat),
            "quadratic" => Ok(Self::Quadratic),
            other => Err(Error::InvalidParameter {
                name: "profile",
                reason: format!("unknown profile `{other}` (expected flat or quadratic)"),
            }),
        }
    }

    pub fn name(&self) -> String {
        match self {
            Self::Flat => "flat".into(),
            Self::Quadratic => "quadratic".into(),
            Self::Custom { name, .. } => name.clone(),
        }
    }

    /// `(u, u', u'')` at `ρ`.
    pub fn derivatives(&self, rho: f64) -> (f64, f64, f64) {
        match self {
            Self::Flat => (rho, 1.0, 0.0),
            Self::Quadratic => (rho + 0.25 * rho * rho, 1.0 + 0.5 * rho, 0.5),
            Self::Custom { derivatives, .. } => derivatives(rho),
        }
    }
}

/// Signed permutation in `SO(n+1)` moving the largest coordinate into slot 0:
/// `z'₀ = z_m`, `z'_m = −z₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ChartRotation {
    pub pivot: usize,
}

impl ChartRotation {
    pub fn best(z: &DVector<C>) -> Self {
        let pivot = (0..z.len()).fold(0, |best, k| if z[k].norm() > z[best].norm() { k } else { best });
        Self { pivot }
    }

    pub fn apply(&self, v: &DVector<C>) -> DVector<C> {
        let mut out = v.clone();
        if self.pivot != 0 {
            out[0] = v[self.pivot];
            out[self.pivot] = -v[0];
        }
        out
    }
}

/// Minimum `|z₀|` accepted in a chart.
pub const CHART_THRESHOLD: f64 = 1e-6;

fn chart(z: &QuadricPoint) -> Result<(ChartRotation, DVector<C>)> {
    let rot = ChartRotation::best(&z.z);
    let w = rot.apply(&z.z);
    if w[0].norm() < CHART_THRESHOLD {
        return Err(Error::Chart { modulus: w[0].norm() });
    }
    Ok((rot, w))
}

/// Hermitian matrix `a_{jk}`, `j, k = 1..n`, in chart coordinates `w`.
fn stenzel_matrix(w: &DVector<C>, profile: &StenzelProfile) -> DMatrix<C> {
    let n = w.len() - 1;
    let rho = w.norm_squared();
    let (_, du, ddu) = profile.derivatives(rho);
    let z0 = w[0];
    let ratio = z0.conj() / z0;
    DMatrix::from_fn(n, n, |j, k| {
        let (zj, zk) = (w[j + 1], w[k + 1]);
        let delta = if j == k { 1.0 } else { 0.0 };
        let first = (C::new(delta, 0.0) + zj * zk.conj() / z0.norm_sqr()) * du;
        let second = 2.0 * (zj.conj() * zk - ratio * zj * zk).re * ddu;
        first + second
    })
}

fn check_tangent(z: &QuadricPoint, v: &DVector<C>) -> Result<()> {
    if v.len() != z.z.len() {
        return Err(Error::DimensionMismatch {
            expected: z.z.len(),
            found: v.len(),
        });
    }
    let pairing: C = z.z.iter().zip(v.iter()).map(|(a, b)| a * b).sum();
    if pairing.norm() > tolerances::STENZEL * z.r * (1.0 + v.norm()) {
        return Err(Error::InvalidInput(format!("vector is not tangent to Q (residual {:e})", pairing.norm())));
    }
    Ok(())
}

/// `Σ a_{jk} U_j V̄_k` in the rotated chart.
fn hermitian_pairing(z: &QuadricPoint, profile: &StenzelProfile, u: &DVector<C>, v: &DVector<C>) -> Result<C> {
    check_tangent(z, u)?;
    check_tangent(z, v)?;
    let (rot, w) = chart(z)?;
    let a = stenzel_matrix(&w, profile);
    let (u, v) = (rot.apply(u), rot.apply(v));
    let n = w.len() - 1;
    let mut s = C::new(0.0, 0.0);
    for j in 0..n {
        for k in 0..n {
            s += a[(j, k)] * u[j + 1] * v[k + 1].conj();
        }
    }
    Ok(s)
}

/// `ω_St(U, V) = (i/2) Σ a_{jk} dz_j ∧ dz̄_k (U, V) = −Im Σ a_{jk} U_j V̄_k`.
pub fn omega_st(z: &QuadricPoint, profile: &StenzelProfile, u: &DVector<C>, v: &DVector<C>) -> Result<f64> {
    Ok(-hermitian_pairing(z, profile, u, v)?.im)
}

/// Kähler metric `g(U, V) = ω_St(U, iV)`.
pub fn stenzel_metric(z: &QuadricPoint, profile: &StenzelProfile, u: &DVector<C>, v: &DVector<C>) -> Result<f64> {
    Ok(hermitian_pairing(z, profile, u, v)?.re)
}

/// `a_{jk}` at `z` in the chart chosen by [`ChartRotation::best`].
pub fn stenzel_coefficients(z: &QuadricPoint, profile: &StenzelProfile) -> Result<DMatrix<C>> {
    let (_, w) = chart(z)?;
    Ok(stenzel_matrix(&w, profile))
}

/// `Ω(V₁..V_n)` as `det[z, V₁..V_n]`, cross-checked against `(1/z₀) dz₁ ∧ … ∧ dz_n`.
pub fn holomorphic_volume(z: &QuadricPoint, vs: &[DVector<C>]) -> Result<C> {
    let n = z.dim();
    if vs.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: vs.len(),
        });
    }
    for v in vs {
        check_tangent(z, v)?;
    }
    let cols: Vec<DVector<C>> = std::iter::once(z.z.clone()).chain(vs.iter().cloned()).collect();
    let route_i = DMatrix::from_columns(&cols).determinant();
    let (rot, w) = chart(z)?;
    let minor = DMatrix::from_fn(n, n, |row, col| rot.apply(&vs[col])[row + 1]);
    let route_ii = minor.determinant() / w[0];
    let scale = z.r * vs.iter().map(|v| v.norm()).product::<f64>();
    consistency("holomorphic volume routes", (route_i - route_ii).norm(), tolerances::VOLUME_ROUTES * scale.max(1e-300))?;
    Ok(route_i)
}

/// `i^k` for any integer `k`.
pub fn i_pow(k: i32) -> C {
    match k.rem_euclid(4) {
        0 => C::new(1.0, 0.0),
        1 => C::new(0.0, 1.0),
        2 => C::new(-1.0, 0.0),
        _ => C::new(0.0, -1.0),
    }
}

/// Exponent of the calibrating phase `i^{p−n}` for a conormal bundle of `X^p ⊂ Sⁿ`.
pub fn default_phase_power(p: usize, n: usize) -> i32 {
    p as i32 - n as i32
}

/// A point of the conormal bundle: base parameter `s` and fibre coordinates `t`
/// against the gauge-fixed normal frame.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConormalSample {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
}

pub fn conormal_samples<R: Rng>(imm: &Immersion, count: usize, t_max: f64, rng: &mut R) -> Vec<ConormalSample> {
    let q = imm.n - imm.p;
    imm.sample_random(count, rng)
        .into_iter()
        .map(|s| ConormalSample {
            s,
            t: uniform_ball(q, t_max, rng),
        })
        .collect()
}

fn conormal_point(imm: &Immersion, gauge: &NormalGauge, st: &[f64]) -> Result<DVector<C>> {
    let (s, t) = st.split_at(imm.p);
    let frame = adapted_frame(imm, s, gauge)?;
    let xi = frame
        .normal
        .iter()
        .zip(t)
        .fold(DVector::zeros(imm.n + 1), |acc, (nu, c)| acc + nu * *c);
    Ok(szoke(&frame.position, &xi))
}

/// Tangent frame of the conormal bundle by differentiating
/// `(s, t) ↦ Ψ(x(s), Σ t_k ν^k(s))`.
pub fn conormal_frame_numeric(imm: &Immersion, sample: &ConormalSample, gauge: &NormalGauge) -> Result<(QuadricPoint, Vec<DVector<C>>)> {
    let st: Vec<f64> = sample.s.iter().chain(&sample.t).copied().collect();
    let z = conormal_point(imm, gauge, &st)?;
    let frame = fd_pushforward(|q: &[f64]| conormal_point(imm, gauge, q), &st, FdConfig::richardson(FRAME_STEP))?;
    Ok((QuadricPoint::new(z)?, frame))
}

/// Closed-form adapted frame `(E₁..E_p, F_{p+1}..F_n)` at the point of the sample:
/// `E_j = cosh|t| e_j + i sinh|t| A^ν̂(e_j)`, `F_{p+1} = sinh|t| x + i cosh|t| ν̂`,
/// `F_k = i sinh|t|/|t| ν^k` for the remaining normals.
pub fn conormal_frame_adapted(imm: &Immersion, sample: &ConormalSample, gauge: &NormalGauge) -> Result<(QuadricPoint, Vec<DVector<C>>)> {
    let sff = second_fundamental_form_with_gauge(imm, &sample.s, gauge)?;
    let frame = &sff.frame;
    let tn = sample.t.iter().map(|c| c * c).sum::<f64>().sqrt();
    let q = imm.n - imm.p;
    let w: Vec<f64> = if tn > 0.0 {
        sample.t.iter().map(|c| c / tn).collect()
    } else {
        (0..q).map(|l| if l == 0 { 1.0 } else { 0.0 }).collect()
    };
    let combine = |coeffs: &[f64]| {
        frame
            .normal
            .iter()
            .zip(coeffs)
            .fold(DVector::zeros(imm.n + 1), |acc, (nu, c)| acc + nu * *c)
    };
    let nu_hat = combine(&w);
    let shape = -sff.in_direction(&w);
    let (ch, sh) = (tn.cosh(), tn.sinh());
    let complexify = |re: &DVector<f64>, im: &DVector<f64>| DVector::from_fn(re.len(), |k, _| C::new(re[k], im[k]));
    let mut out = Vec::with_capacity(imm.n);
    for j in 0..imm.p {
        let bent = (0..imm.p).fold(DVector::zeros(imm.n + 1), |acc, k| acc + &frame.tangent[k] * shape[(j, k)]);
        out.push(complexify(&(&frame.tangent[j] * ch), &(bent * sh)));
    }
    out.push(complexify(&(&frame.position * sh), &(&nu_hat * ch)));
    // Orthonormal complement of ν̂ inside the normal space.
    let mut rest: Vec<Vec<f64>> = vec![w.clone()];
    for l in 0..q {
        let mut v: Vec<f64> = (0..q).map(|m| if m == l { 1.0 } else { 0.0 }).collect();
        for b in &rest {
            let d: f64 = v.iter().zip(b).map(|(a, c)| a * c).sum();
            v.iter_mut().zip(b).for_each(|(a, c)| *a -= d * c);
        }
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-6 {
            rest.push(v.iter().map(|a| a / norm).collect());
        }
    }
    let sc = sinhc(tn);
    for coeffs in rest.iter().skip(1) {
        out.push(complexify(&DVector::zeros(imm.n + 1), &(combine(coeffs) * sc)));
    }
    let xi = &nu_hat * tn;
    Ok((QuadricPoint::new(szoke(&frame.position, &xi))?, out))
}

fn realify(vs: &[DVector<C>]) -> DMatrix<f64> {
    let m = vs[0].len();
    DMatrix::from_fn(2 * m, vs.len(), |r, c| if r < m { vs[c][r].re } else { vs[c][r - m].im })
}

fn orthonormal_columns(a: &DMatrix<f64>) -> DMatrix<f64> {
    let svd = a.clone().svd(true, false);
    let u = svd.u.expect("left singular vectors");
    u.columns(0, a.ncols()).into_owned()
}

/// Sine of the largest principal angle between the real spans of two frames.
pub fn subspace_distance(a: &[DVector<C>], b: &[DVector<C>]) -> f64 {
    let qa = orthonormal_columns(&realify(a));
    let qb = orthonormal_columns(&realify(b));
    let residual = &qb - &qa * (qa.transpose() * &qb);
    residual.svd(false, false).singular_values.max()
}

/// Gram–Schmidt in the Stenzel metric (two passes).
pub fn stenzel_orthonormalize(z: &QuadricPoint, profile: &StenzelProfile, vs: &[DVector<C>]) -> Result<Vec<DVector<C>>> {
    let mut out: Vec<DVector<C>> = Vec::with_capacity(vs.len());
    for (index, v) in vs.iter().enumerate() {
        let scale = stenzel_metric(z, profile, v, v)?.max(0.0).sqrt();
        let mut w = v.clone();
        for _ in 0..2 {
            for e in &out {
                let c = stenzel_metric(z, profile, &w, e)?;
                w -= e * C::new(c, 0.0);
            }
        }
        let norm = stenzel_metric(z, profile, &w, &w)?.max(0.0).sqrt();
        if norm <= RANK_TOLERANCE * scale.max(1.0) {
            return Err(Error::DegenerateInput { index });
        }
        out.push(w / C::new(norm, 0.0));
    }
    Ok(out)
}

/// `max |ω_St(ê_i, ê_j)|` over a Stenzel-orthonormalized frame.
pub fn lagrangian_defect(z: &QuadricPoint, profile: &StenzelProfile, frame: &[DVector<C>]) -> Result<f64> {
    let e = stenzel_orthonormalize(z, profile, frame)?;
    let mut worst: f64 = 0.0;
    for i in 0..e.len() {
        for j in i + 1..e.len() {
            worst = worst.max(omega_st(z, profile, &e[i], &e[j])?.abs());
        }
    }
    Ok(worst)
}

/// `|Im(i^k Ω)| / |Ω|` on a frame.
pub fn special_defect(z: &QuadricPoint, frame: &[DVector<C>], phase_power: i32) -> Result<f64> {
    let omega = holomorphic_volume(z, frame)?;
    let norm = omega.norm();
    if norm == 0.0 {
        return Err(Error::DegenerateInput { index: 0 });
    }
    Ok((i_pow(phase_power) * omega).im.abs() / norm)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleDefect {
    pub lagrangian: f64,
    pub special: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlagReport {
    pub lagrangian_defect: f64,
    pub special_defect: f64,
    pub phase_power: i32,
    pub per_sample: Vec<SampleDefect>,
}

/// Lagrangian and special defects of the conormal bundle over `imm`,
/// evaluated on numeric conormal frames.
pub fn slag_defect(imm: &Immersion, samples: &[ConormalSample], profile: &StenzelProfile, phase_power: i32) -> Result<SlagReport> {
    let per_sample = samples
        .iter()
        .map(|sample| {
            if sample.t.len() != imm.n - imm.p {
                return Err(Error::DimensionMismatch {
                    expected: imm.n - imm.p,
                    found: sample.t.len(),
                });
            }
            let gauge = normal_gauge(imm, &sample.s)?;
            let (z, frame) = conormal_frame_numeric(imm, sample, &gauge)?;
            Ok(SampleDefect {
                lagrangian: lagrangian_defect(&z, profile, &frame)?,
                special: special_defect(&z, &frame, phase_power)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SlagReport {
        lagrangian_defect: per_sample.iter().map(|d| d.lagrangian).fold(0.0, f64::max),
        special_defect: per_sample.iter().map(|d| d.special).fold(0.0, f64::max),
        phase_power,
        per_sample,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AusterityVerdict {
    Austere,
    MinimalOnly,
    Neither,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalDirectionSample {
    /// Coefficients of the unit normal in the adapted normal frame.
    pub direction: Vec<f64>,
    pub eigenvalues: Vec<f64>,
    /// Power sums `p₁, p₃, p₅, …` up to degree `p`.
    pub odd_power_sums: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AusterityReport {
    pub directions: Vec<NormalDirectionSample>,
    pub max_trace: f64,
    pub max_odd_power_sum: f64,
    pub verdict: AusterityVerdict,
}

/// Odd power sums of the principal curvatures over normal directions: the frame
/// normals plus `extra_directions` fixed pseudo-random unit normals per point.
pub fn austere_test(sffs: &[crate::immersions::SecondFundamentalForm], extra_directions: usize, tol: f64) -> Result<AusterityReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut directions = Vec::new();
    for sff in sffs {
        if sff.max_asymmetry() > tolerances::SYMMETRY {
            return Err(Error::InvalidInput(format!("second fundamental form asymmetric by {:e}", sff.max_asymmetry())));
        }
        let q = sff.codim();
        let mut dirs: Vec<Vec<f64>> = (0..q).map(|l| (0..q).map(|m| if m == l { 1.0 } else { 0.0 }).collect()).collect();
        if q > 1 {
            dirs.extend((0..extra_directions).map(|_| unit_sphere(q, &mut rng)));
        }
        for w in dirs {
            let b = sff.in_direction(&w);
            let eigenvalues: Vec<f64> = SymmetricEigen::new(b).eigenvalues.iter().copied().collect();
            let odd_power_sums = (1..=sff.p())
                .step_by(2)
                .map(|k| eigenvalues.iter().map(|l| l.powi(k as i32)).sum())
                .collect();
            directions.push(NormalDirectionSample {
                direction: w,
                eigenvalues,
                odd_power_sums,
            });
        }
    }
    let max_trace = directions.iter().map(|d| d.odd_power_sums[0].abs()).fold(0.0, f64::max);
    let max_odd_power_sum = directions
        .iter()
        .flat_map(|d| d.odd_power_sums.iter().map(|x| x.abs()))
        .fold(0.0, f64::max);
    let verdict = if max_odd_power_sum <= tol {
        AusterityVerdict::Austere
    } else if max_trace <= tol {
        AusterityVerdict::MinimalOnly
    } else {
        AusterityVerdict::Neither
    };
    Ok(AusterityReport {
        directions,
        max_trace,
        max_odd_power_sum,
        verdict,
    })
}
