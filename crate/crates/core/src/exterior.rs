//! Dense exterior algebra over small real inner-product spaces.
//!
//! Forms are stored over strictly increasing index tuples in lexicographic
//! order. The wedge product uses the determinant convention:
//! `(e^1 ∧ … ∧ e^k)(e_1, …, e_k) = 1`, so `(α∧β)(v…) = Σ sgn(σ)/(p!q!) α(…)β(…)`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, OnceLock};

use nalgebra::{ComplexField, DMatrix, DVector};

use crate::error::{Error, Result};

pub const MAX_DIM: usize = 9;

/// Scalars a form may take values in: `f64` or `Complex64`.
pub trait Coefficient: ComplexField<RealField = f64> + Copy {}
impl<T: ComplexField<RealField = f64> + Copy> Coefficient for T {}

type Table = Vec<Vec<Vec<Vec<usize>>>>;

fn tables() -> &'static Table {
    static TABLES: OnceLock<Table> = OnceLock::new();
    TABLES.get_or_init(|| {
        (0..=MAX_DIM)
            .map(|dim| (0..=dim).map(|k| combinations(dim, k)).collect())
            .collect()
    })
}

fn combinations(dim: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, dim: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..dim {
            cur.push(i);
            rec(i + 1, dim, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, dim, k, &mut Vec::with_capacity(k), &mut out);
    out
}

/// Increasing `k`-tuples of `0..dim` in storage order.
pub fn index_tuples(dim: usize, k: usize) -> &'static [Vec<usize>] {
    &tables()[dim][k]
}

fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn rank(dim: usize, tuple: &[usize]) -> usize {
    let k = tuple.len();
    let mut r = 0;
    let mut prev = 0;
    for (i, &t) in tuple.iter().enumerate() {
        for j in prev..t {
            r += binomial(dim - 1 - j, k - 1 - i);
        }
        prev = t + 1;
    }
    r
}

/// Sorts `idx` in place and returns the permutation sign, or 0 on a repeat.
fn sort_sign(idx: &mut [usize]) -> i32 {
    let mut sign = 1;
    for i in 1..idx.len() {
        let mut j = i;
        while j > 0 && idx[j - 1] > idx[j] {
            idx.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if idx.windows(2).any(|w| w[0] == w[1]) {
        0
    } else {
        sign
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerProductSpace {
    metric: DMatrix<f64>,
    inverse: DMatrix<f64>,
    labels: Vec<String>,
}

impl InnerProductSpace {
    pub fn new(metric: DMatrix<f64>, labels: Vec<String>) -> Result<Self> {
        let dim = metric.nrows();
        if metric.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: metric.ncols(),
            });
        }
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("dimension {dim} outside 1..={MAX_DIM}")));
        }
        if labels.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: labels.len(),
            });
        }
        let asym = (&metric - metric.transpose()).amax();
        if asym > 1e-12 * metric.amax().max(1.0) {
            return Err(Error::InvalidInput(format!("metric not symmetric (residual {asym:e})")));
        }
        let chol = metric
            .clone()
            .cholesky()
            .ok_or_else(|| Error::InvalidInput("metric not positive definite".into()))?;
        let inverse = chol.inverse();
        Ok(Self {
            metric,
            inverse,
            labels,
        })
    }

    pub fn euclidean(dim: usize) -> Self {
        let labels = (1..=dim).map(|i| format!("e{i}")).collect();
        Self::new(DMatrix::identity(dim, dim), labels).expect("identity metric is valid")
    }

    pub fn diagonal(entries: &[f64], labels: &[&str]) -> Result<Self> {
        let metric = DMatrix::from_diagonal(&DVector::from_column_slice(entries));
        Self::new(metric, labels.iter().map(|s| s.to_string()).collect())
    }

    pub fn dim(&self) -> usize {
        self.metric.nrows()
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn inner(&self, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
        a.dot(&(&self.metric * b))
    }

    pub fn norm(&self, a: &DVector<f64>) -> f64 {
        self.inner(a, a).max(0.0).sqrt()
    }

    /// Covector components `g v`.
    pub fn lower(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.metric * v
    }

    /// Vector components `g⁻¹ α`.
    pub fn raise(&self, alpha: &DVector<f64>) -> DVector<f64> {
        &self.inverse * alpha
    }

    pub fn basis_vector(&self, i: usize) -> DVector<f64> {
        let mut v = DVector::zeros(self.dim());
        v[i] = 1.0;
        v
    }
}

/// Dense alternating `k`-form on a shared [`InnerProductSpace`].
#[derive(Clone)]
pub struct KForm<T: Coefficient = f64> {
    space: Arc<InnerProductSpace>,
    degree: usize,
    coeffs: Vec<T>,
}

impl<T: Coefficient> fmt::Debug for KForm<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut list = f.debug_map();
        for (c, idx) in self.coeffs.iter().zip(index_tuples(self.dim(), self.degree)) {
            if c.modulus() > 0.0 {
                let name: Vec<&str> = idx.iter().map(|&i| self.space.labels[i].as_str()).collect();
                list.entry(&name.join("^"), c);
            }
        }
        list.finish()
    }
}

impl<T: Coefficient> KForm<T> {
    pub fn zero(space: &Arc<InnerProductSpace>, degree: usize) -> Self {
        let n = binomial(space.dim(), degree);
        Self {
            space: Arc::clone(space),
            degree,
            coeffs: vec![T::zero(); n],
        }
    }

    /// Sum of `c · e^{i₁} ∧ … ∧ e^{i_k}` over the given terms; indices need not be sorted.
    pub fn from_terms(space: &Arc<InnerProductSpace>, degree: usize, terms: &[(T, &[usize])]) -> Result<Self> {
        let mut form = Self::zero(space, degree);
        for (c, idx) in terms {
            if idx.len() != degree {
                return Err(Error::DimensionMismatch {
                    expected: degree,
                    found: idx.len(),
                });
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= space.dim()) {
                return Err(Error::InvalidInput(format!("index {bad} out of range")));
            }
            let mut sorted = idx.to_vec();
            let s = sort_sign(&mut sorted);
            if s != 0 {
                let r = rank(space.dim(), &sorted);
                form.coeffs[r] += *c * T::from_real(s as f64);
            }
        }
        Ok(form)
    }

    pub fn basis(space: &Arc<InnerProductSpace>, idx: &[usize]) -> Result<Self> {
        Self::from_terms(space, idx.len(), &[(T::one(), idx)])
    }

    pub fn space(&self) -> &Arc<InnerProductSpace> {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Component on `e^{idx}`; any index order, sign included.
    pub fn coeff(&self, idx: &[usize]) -> T {
        assert_eq!(idx.len(), self.degree, "index length must equal degree");
        let mut sorted = idx.to_vec();
        match sort_sign(&mut sorted) {
            0 => T::zero(),
            s => self.coeffs[rank(self.dim(), &sorted)] * T::from_real(s as f64),
        }
    }

    fn same_space(&self, other: &Self) -> Result<()> {
        if Arc::ptr_eq(&self.space, &other.space) || self.space == other.space {
            Ok(())
        } else {
            Err(Error::Structural("forms live on different spaces".into()))
        }
    }

    /// Evaluates on `degree` vectors given in basis components.
    pub fn eval(&self, vectors: &[DVector<T>]) -> Result<T> {
        if vectors.len() != self.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                found: vectors.len(),
            });
        }
        if let Some(v) = vectors.iter().find(|v| v.len() != self.dim()) {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let k = self.degree;
        if k == 0 {
            return Ok(self.coeffs[0]);
        }
        let mut total = T::zero();
        let mut minor = DMatrix::<T>::zeros(k, k);
        for (c, idx) in self.coeffs.iter().zip(index_tuples(self.dim(), k)) {
            if c.modulus() == 0.0 {
                continue;
            }
            for (r, &i) in idx.iter().enumerate() {
                for (col, v) in vectors.iter().enumerate() {
                    minor[(r, col)] = v[i];
                }
            }
            total += *c * minor.clone().determinant();
        }
        Ok(total)
    }

    pub fn wedge(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        let k = self.degree + other.degree;
        if k > self.dim() {
            return Err(Error::Structural(format!(
                "degree {k} exceeds dimension {}",
                self.dim()
            )));
        }
        let mut out = Self::zero(&self.space, k);
        let dim = self.dim();
        for (a, ia) in self.coeffs.iter().zip(index_tuples(dim, self.degree)) {
            if a.modulus() == 0.0 {
                continue;
            }
            for (b, ib) in other.coeffs.iter().zip(index_tuples(dim, other.degree)) {
                if b.modulus() == 0.0 {
                    continue;
                }
                let mut idx: Vec<usize> = ia.iter().chain(ib.iter()).copied().collect();
                let s = sort_sign(&mut idx);
                if s != 0 {
                    out.coeffs[rank(dim, &idx)] += *a * *b * T::from_real(s as f64);
                }
            }
        }
        Ok(out)
    }

    /// `v ⌟ α`, i.e. `(v⌟α)(w₂, …) = α(v, w₂, …)`.
    pub fn interior(&self, v: &DVector<T>) -> Result<Self> {
        if self.degree == 0 {
            return Err(Error::Structural("interior product of a 0-form".into()));
        }
        if v.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: v.len(),
            });
        }
        let dim = self.dim();
        let mut out = Self::zero(&self.space, self.degree - 1);
        for (slot, idx) in index_tuples(dim, self.degree - 1).iter().enumerate() {
            let mut acc = T::zero();
            for i in 0..dim {
                if v[i].modulus() == 0.0 || idx.contains(&i) {
                    continue;
                }
                let pos = idx.iter().filter(|&&j| j < i).count();
                let mut full = idx.clone();
                full.insert(pos, i);
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                acc += v[i] * self.coeffs[rank(dim, &full)] * T::from_real(sign);
            }
            out.coeffs[slot] = acc;
        }
        Ok(out)
    }

    /// Nested contraction `vs[0] ⌟ vs[1] ⌟ … ⌟ α`, innermost vector last.
    pub fn contract(&self, vs: &[DVector<T>]) -> Result<Self> {
        let mut out = self.clone();
        for v in vs.iter().rev() {
            out = out.interior(v)?;
        }
        Ok(out)
    }

    /// `L*α`, i.e. `(L*α)(v, …) = α(Lv, …)`.
    pub fn pullback(&self, l: &DMatrix<f64>) -> Result<Self> {
        let dim = self.dim();
        if l.nrows() != dim || l.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: l.nrows(),
            });
        }
        let k = self.degree;
        let tuples = index_tuples(dim, k);
        let mut out = Self::zero(&self.space, k);
        let mut minor = DMatrix::<f64>::zeros(k, k);
        for (slot, ii) in tuples.iter().enumerate() {
            let mut acc = T::zero();
            for (c, jj) in self.coeffs.iter().zip(tuples) {
                if c.modulus() == 0.0 {
                    continue;
                }
                for (r, &j) in jj.iter().enumerate() {
                    for (col, &i) in ii.iter().enumerate() {
                        minor[(r, col)] = l[(j, i)];
                    }
                }
                acc += *c * T::from_real(if k == 0 { 1.0 } else { minor.clone().determinant() });
            }
            out.coeffs[slot] = acc;
        }
        Ok(out)
    }

    /// Hodge star for the space metric, oriented by the basis order.
    pub fn hodge_star(&self) -> Self {
        let dim = self.dim();
        let k = self.degree;
        let raised = self
            .pullback(&self.space.inverse)
            .expect("inverse metric has matching dimension");
        let vol = self.space.metric.determinant().sqrt();
        let mut out = Self::zero(&self.space, dim - k);
        for (c, idx) in raised.coeffs.iter().zip(index_tuples(dim, k)) {
            let mut full = idx.clone();
            full.extend((0..dim).filter(|i| !idx.contains(i)));
            let comp: Vec<usize> = full[k..].to_vec();
            let s = sort_sign(&mut full) as f64;
            out.coeffs[rank(dim, &comp)] += *c * T::from_real(s * vol);
        }
        out
    }

    /// Induced inner product `⟨α, β⟩ = Σ_I α_I β^I` (no conjugation).
    pub fn inner(&self, other: &Self) -> Result<T> {
        self.same_space(other)?;
        if self.degree != other.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        let raised = other.pullback(&self.space.inverse)?;
        Ok(self
            .coeffs
            .iter()
            .zip(&raised.coeffs)
            .fold(T::zero(), |acc, (a, b)| acc + *a * *b))
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus()).fold(0.0, f64::max)
    }

    /// Euclidean norm of the coefficient vector.
    pub fn coeff_norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c.modulus_squared()).sum::<f64>().sqrt()
    }

    pub fn scale(&self, c: T) -> Self {
        Self {
            space: Arc::clone(&self.space),
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|x| *x * c).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.same_space(other)?;
        if self.degree != other.degree {
            return Err(Error::DimensionMismatch {
                expected: self.degree,
                found: other.degree,
            });
        }
        Ok(Self {
            space: Arc::clone(&self.space),
            degree: self.degree,
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| *a + *b).collect(),
        })
    }

    /// Skew matrix `M_ab = α(e_a, e_b)` of a 2-form.
    pub fn to_matrix(&self) -> DMatrix<T> {
        assert_eq!(self.degree, 2, "to_matrix needs a 2-form");
        let dim = self.dim();
        let mut m = DMatrix::<T>::zeros(dim, dim);
        for (c, idx) in self.coeffs.iter().zip(index_tuples(dim, 2)) {
            m[(idx[0], idx[1])] = *c;
            m[(idx[1], idx[0])] = -*c;
        }
        m
    }

    pub fn from_matrix(space: &Arc<InnerProductSpace>, m: &DMatrix<T>) -> Self {
        let mut out = Self::zero(space, 2);
        for (slot, idx) in index_tuples(space.dim(), 2).iter().enumerate() {
            out.coeffs[slot] = (m[(idx[0], idx[1])] - m[(idx[1], idx[0])]) * T::from_real(0.5);
        }
        out
    }

    pub fn from_coeffs(space: &Arc<InnerProductSpace>, degree: usize, coeffs: Vec<T>) -> Result<Self> {
        let n = binomial(space.dim(), degree);
        if coeffs.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: coeffs.len(),
            });
        }
        Ok(Self {
            space: Arc::clone(space),
            degree,
            coeffs,
        })
    }
}

impl KForm<f64> {
    /// Evaluation on real vectors; the common case.
    pub fn at(&self, vectors: &[&DVector<f64>]) -> f64 {
        let owned: Vec<DVector<f64>> = vectors.iter().map(|v| (*v).clone()).collect();
        self.eval(&owned).expect("argument count and dimension checked by caller")
    }
}

impl<T: Coefficient> Add for &KForm<T> {
    type Output = KForm<T>;

    /// # Panics
    /// If the forms live on different spaces or have different degrees.
    fn add(self, rhs: Self) -> KForm<T> {
        self.try_add(rhs).expect("incompatible forms")
    }
}

impl<T: Coefficient> Sub for &KForm<T> {
    type Output = KForm<T>;

    fn sub(self, rhs: Self) -> KForm<T> {
        self.try_add(&rhs.scale(-T::one())).expect("incompatible forms")
    }
}

impl<T: Coefficient> Neg for &KForm<T> {
    type Output = KForm<T>;

    fn neg(self) -> KForm<T> {
        self.scale(-T::one())
    }
}

impl<T: Coefficient> Mul<T> for &KForm<T> {
    type Output = KForm<T>;

    fn mul(self, rhs: T) -> KForm<T> {
        self.scale(rhs)
    }
}

/// `v♭`, the 1-form `w ↦ ⟨v, w⟩`.
pub fn flat(space: &Arc<InnerProductSpace>, v: &DVector<f64>) -> Result<KForm> {
    if v.len() != space.dim() {
        return Err(Error::DimensionMismatch {
            expected: space.dim(),
            found: v.len(),
        });
    }
    KForm::from_coeffs(space, 1, space.lower(v).iter().copied().collect())
}

/// `α♯`, inverse of [`flat`].
pub fn sharp(alpha: &KForm) -> Result<DVector<f64>> {
    if alpha.degree() != 1 {
        return Err(Error::Structural(format!("sharp of a {}-form", alpha.degree())));
    }
    Ok(alpha.space().raise(&DVector::from_column_slice(alpha.coeffs())))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Frame {
    pub vectors: Vec<DVector<f64>>,
    pub orthonormal: bool,
}

impl Frame {
    pub fn gram(&self, space: &InnerProductSpace) -> DMatrix<f64> {
        let n = self.vectors.len();
        DMatrix::from_fn(n, n, |i, j| space.inner(&self.vectors[i], &self.vectors[j]))
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }
}

/// Relative size below which a Gram–Schmidt residual counts as rank deficiency.
pub const RANK_TOLERANCE: f64 = 1e-10;

/// Gram–Schmidt with one reorthogonalization pass.
pub fn gram_schmidt(vs: &[DVector<f64>], space: &InnerProductSpace) -> Result<Frame> {
    let mut out: Vec<DVector<f64>> = Vec::with_capacity(vs.len());
    for (index, v) in vs.iter().enumerate() {
        if v.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: v.len(),
            });
        }
        let scale = space.norm(v);
        let mut w = v.clone();
        for _ in 0..2 {
            for q in &out {
                let c = space.inner(q, &w);
                w -= q * c;
            }
        }
        let n = space.norm(&w);
        if !(n > RANK_TOLERANCE * scale) || scale == 0.0 {
            return Err(Error::DegenerateInput { index });
        }
        out.push(w / n);
    }
    Ok(Frame {
        vectors: out,
        orthonormal: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    /// Two-point central difference, error `O(h²)`.
    #[default]
    Central,
    /// Central differences at `h` and `h/2` combined, error `O(h⁴)`.
    Richardson,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdConfig {
    pub step: f64,
    pub scheme: FdScheme,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self {
            step: 1e-5,
            scheme: FdScheme::Central,
        }
    }
}

impl FdConfig {
    pub fn richardson(step: f64) -> Self {
        Self {
            step,
            scheme: FdScheme::Richardson,
        }
    }

    fn validate(&self) -> Result<()> {
        if (1e-7..=1e-2).contains(&self.step) {
            Ok(())
        } else {
            Err(Error::InvalidInput(format!("step {:e} outside [1e-7, 1e-2]", self.step)))
        }
    }
}

fn eval_offset<T, F>(map: &F, point: &[f64], coord: usize, offset: f64) -> Result<DVector<T>>
where
    T: Coefficient,
    F: Fn(&[f64]) -> Result<DVector<T>>,
{
    let mut p = point.to_vec();
    p[coord] += offset;
    map(&p).map_err(|e| Error::Stencil {
        coordinate: coord,
        offset,
        source: Box::new(e),
    })
}

fn central<T, F>(map: &F, point: &[f64], coord: usize, h: f64) -> Result<DVector<T>>
where
    T: Coefficient,
    F: Fn(&[f64]) -> Result<DVector<T>>,
{
    let plus = eval_offset(map, point, coord, h)?;
    let minus = eval_offset(map, point, coord, -h)?;
    Ok((plus - minus) * T::from_real(0.5 / h))
}

/// Partial derivatives of `map` at `point`, one vector per coordinate.
pub fn fd_pushforward<T, F>(map: F, point: &[f64], cfg: FdConfig) -> Result<Vec<DVector<T>>>
where
    T: Coefficient,
    F: Fn(&[f64]) -> Result<DVector<T>>,
{
    cfg.validate()?;
    (0..point.len())
        .map(|c| match cfg.scheme {
            FdScheme::Central => central(&map, point, c, cfg.step),
            FdScheme::Richardson => {
                let coarse = central(&map, point, c, cfg.step)?;
                let fine = central(&map, point, c, 0.5 * cfg.step)?;
                Ok((fine * T::from_real(4.0) - coarse) * T::from_real(1.0 / 3.0))
            }
        })
        .collect()
}

/// Second partials `∂_j∂_k map`, Richardson-extrapolated to `O(h⁴)`.
pub fn fd_hessian<T, F>(map: F, point: &[f64], step: f64) -> Result<Vec<Vec<DVector<T>>>>
where
    T: Coefficient,
    F: Fn(&[f64]) -> Result<DVector<T>>,
{
    FdConfig::richardson(step).validate()?;
    let p = point.len();
    let eval2 = |j: usize, hj: f64, k: usize, hk: f64| -> Result<DVector<T>> {
        let mut q = point.to_vec();
        q[j] += hj;
        q[k] += hk;
        map(&q).map_err(|e| Error::Stencil {
            coordinate: j,
            offset: hj,
            source: Box::new(e),
        })
    };
    let center = map(point)?;
    let second = |j: usize, k: usize, h: f64| -> Result<DVector<T>> {
        if j == k {
            let plus = eval2(j, h, j, 0.0)?;
            let minus = eval2(j, -h, j, 0.0)?;
            Ok((plus + minus - &center * T::from_real(2.0)) * T::from_real(1.0 / (h * h)))
        } else {
            let pp = eval2(j, h, k, h)?;
            let pm = eval2(j, h, k, -h)?;
            let mp = eval2(j, -h, k, h)?;
            let mm = eval2(j, -h, k, -h)?;
            Ok((pp - pm - mp + mm) * T::from_real(0.25 / (h * h)))
        }
    };
    let mut out: Vec<Vec<DVector<T>>> = vec![Vec::with_capacity(p); p];
    for j in 0..p {
        for k in 0..p {
            if k < j {
                let sym = out[k][j].clone();
                out[j].push(sym);
                continue;
            }
            let coarse = second(j, k, step)?;
            let fine = second(j, k, 0.5 * step)?;
            out[j].push((fine * T::from_real(4.0) - coarse) * T::from_real(1.0 / 3.0));
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn euclid(dim: usize) -> Arc<InnerProductSpace> {
        Arc::new(InnerProductSpace::euclidean(dim))
    }

    fn random_form(space: &Arc<InnerProductSpace>, k: usize, rng: &mut ChaCha8Rng) -> KForm {
        let n = binomial(space.dim(), k);
        KForm::from_coeffs(space, k, (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
    }

    fn random_vec(dim: usize, rng: &mut ChaCha8Rng) -> DVector<f64> {
        DVector::from_fn(dim, |_, _| rng.gen_range(-1.0..1.0))
    }

    #[test]
    fn rank_matches_table_order() {
        for dim in 0..=MAX_DIM {
            for k in 0..=dim {
                for (i, t) in index_tuples(dim, k).iter().enumerate() {
                    assert_eq!(rank(dim, t), i);
                }
            }
        }
    }

    #[test]
    fn wedge_basics() {
        let s = euclid(3);
        let e1 = KForm::<f64>::basis(&s, &[0]).unwrap();
        let e2 = KForm::<f64>::basis(&s, &[1]).unwrap();
        assert_eq!(e1.wedge(&e1).unwrap().max_abs(), 0.0);
        let w = e1.wedge(&e2).unwrap();
        assert_eq!(w.at(&[&s.basis_vector(0), &s.basis_vector(1)]), 1.0);
        assert_eq!(w.at(&[&s.basis_vector(1), &s.basis_vector(0)]), -1.0);
    }

    #[test]
    fn interior_basics() {
        let s = euclid(3);
        let e12 = KForm::<f64>::basis(&s, &[0, 1]).unwrap();
        let c = e12.interior(&s.basis_vector(0)).unwrap();
        assert_eq!(c.coeff(&[1]), 1.0);
        assert_eq!(c.coeff(&[0]), 0.0);
        assert!(KForm::<f64>::zero(&s, 0).interior(&s.basis_vector(0)).is_err());
    }

    #[test]
    fn wedge_dimension_errors() {
        let s = euclid(3);
        let t = euclid(4);
        let a = KForm::<f64>::basis(&s, &[0, 1]).unwrap();
        let b = KForm::<f64>::basis(&t, &[0]).unwrap();
        assert!(matches!(a.wedge(&b), Err(Error::Structural(_))));
        let c = KForm::<f64>::basis(&s, &[2]).unwrap();
        let top = a.wedge(&c).unwrap();
        assert!(top.wedge(&c).is_err());
    }

    #[test]
    fn musical_maps() {
        let s = Arc::new(InnerProductSpace::diagonal(&[4.0, 4.0, 1.0], &["a", "b", "c"]).unwrap());
        let v = s.basis_vector(0);
        let f = flat(&s, &v).unwrap();
        assert_eq!(f.coeff(&[0]), 4.0);
        assert_abs_diff_eq!(sharp(&f).unwrap(), v, epsilon = 1e-15);
        let e = euclid(2);
        let f = flat(&e, &DVector::from_vec(vec![1.0, 1.0])).unwrap();
        assert_eq!(f.coeffs(), &[1.0, 1.0]);
    }

    #[test]
    fn gram_schmidt_examples() {
        let s = InnerProductSpace::euclidean(2);
        let f = gram_schmidt(
            &[DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![1.0, 1.0])],
            &s,
        )
        .unwrap();
        assert_abs_diff_eq!(f.vectors[1], DVector::from_vec(vec![0.0, 1.0]), epsilon = 1e-15);
        let again = gram_schmidt(&f.vectors, &s).unwrap();
        assert_abs_diff_eq!(again.vectors[0], f.vectors[0], epsilon = 1e-12);
        assert_abs_diff_eq!(again.vectors[1], f.vectors[1], epsilon = 1e-12);
        let err = gram_schmidt(
            &[DVector::from_vec(vec![1.0, 0.0]), DVector::from_vec(vec![2.0, 0.0])],
            &s,
        );
        assert!(matches!(err, Err(Error::DegenerateInput { index: 1 })));
    }

    #[test]
    fn gram_schmidt_random_r5() {
        let s = InnerProductSpace::euclidean(5);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let vs: Vec<_> = (0..4).map(|_| random_vec(5, &mut rng)).collect();
            let f = gram_schmidt(&vs, &s).unwrap();
            let g = f.gram(&s);
            assert!((g - DMatrix::identity(4, 4)).amax() < 1e-10);
            assert!(vs[0].normalize().dot(&f.vectors[0]) > 1.0 - 1e-14);
        }
    }

    #[test]
    fn fd_linear_exact() {
        let m = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, -3.0, 0.5, 4.0, 7.0]);
        let map = |p: &[f64]| Ok(&m * DVector::from_column_slice(p));
        let d = fd_pushforward(map, &[0.3, -0.8], FdConfig::default()).unwrap();
        for j in 0..2 {
            assert_abs_diff_eq!(d[j], m.column(j).into_owned(), epsilon = 1e-10);
        }
    }

    #[test]
    fn fd_sphere_pole_tangent() {
        let chart = |s: &[f64]| {
            Ok(DVector::from_vec(vec![
                s[0].cos(),
                s[0].sin() * s[1].cos(),
                s[0].sin() * s[1].sin(),
            ]))
        };
        let p = [1e-3, 0.4];
        let x = chart(&p).unwrap();
        for d in fd_pushforward(chart, &p, FdConfig::default()).unwrap() {
            assert!(x.dot(&d).abs() < 1e-8);
        }
    }

    #[test]
    fn fd_order_two_and_errors() {
        let f = |s: &[f64]| Ok(DVector::from_vec(vec![(2.0 * s[0]).sin() * s[0].exp()]));
        let exact = |x: f64| 2.0 * (2.0 * x).cos() * x.exp() + (2.0 * x).sin() * x.exp();
        let err = |h: f64| (fd_pushforward(f, &[0.7], FdConfig { step: h, scheme: FdScheme::Central }).unwrap()[0][0] - exact(0.7)).abs();
        assert!(err(1e-3) / err(5e-4) >= 3.0);
        assert!(fd_pushforward(f, &[0.7], FdConfig { step: 1.0, scheme: FdScheme::Central }).is_err());
        let fails = |s: &[f64]| {
            if s[0] > 0.0 {
                Err(Error::InvalidInput("outside".into()))
            } else {
                Ok(DVector::from_vec(vec![s[0]]))
            }
        };
        let e = fd_pushforward(fails, &[0.0], FdConfig::default()).unwrap_err();
        assert!(matches!(e, Error::Stencil { coordinate: 0, .. }));
    }

    #[test]
    fn hessian_matches_analytic() {
        let f = |s: &[f64]| Ok(DVector::from_vec(vec![s[0].sin() * s[1].cos(), s[0] * s[0] * s[1]]));
        let h = fd_hessian(f, &[0.3, 1.1], 1e-3).unwrap();
        let (a, b) = (0.3f64, 1.1f64);
        assert_abs_diff_eq!(h[0][0][0], -a.sin() * b.cos(), epsilon = 1e-9);
        assert_abs_diff_eq!(h[0][1][0], -a.cos() * b.sin(), epsilon = 1e-9);
        assert_abs_diff_eq!(h[1][0][1], 2.0 * a, epsilon = 1e-9);
        assert_abs_diff_eq!(h[1][1][1], 0.0, epsilon = 1e-9);
    }

    #[test]
    fn hodge_star_flat_r4() {
        let s = euclid(4);
        let f1 = KForm::<f64>::from_terms(&s, 2, &[(1.0, &[0, 1]), (-1.0, &[2, 3])]).unwrap();
        let star = f1.hodge_star();
        assert!((&star + &f1).max_abs() < 1e-15);
        let vol = KForm::<f64>::basis(&s, &[0, 1, 2, 3]).unwrap();
        assert_eq!(vol.hodge_star().coeffs(), &[1.0]);
    }

    #[test]
    fn hodge_star_involution_scaled() {
        let s = Arc::new(InnerProductSpace::diagonal(&[4.0, 1.0, 9.0, 0.25, 2.0], &["a", "b", "c", "d", "e"]).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for k in 0..=5 {
            let a = random_form(&s, k, &mut rng);
            let back = a.hodge_star().hodge_star();
            let sign = if (k * (5 - k)) % 2 == 0 { 1.0 } else { -1.0 };
            assert!((&back - &a.scale(sign)).max_abs() < 1e-12);
        }
    }

    #[test]
    fn complex_forms_evaluate_complex_linearly() {
        use num_complex::Complex64;
        let s = euclid(2);
        let w = KForm::<Complex64>::basis(&s, &[0, 1]).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let u = DVector::from_vec(vec![i, Complex64::new(0.0, 0.0)]);
        let v = DVector::from_vec(vec![Complex64::new(0.0, 0.0), Complex64::new(2.0, 0.0)]);
        assert_eq!(w.eval(&[u, v]).unwrap(), 2.0 * i);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn wedge_graded_commutative(seed in any::<u64>(), dim in 2usize..=7, p in 0usize..4, q in 0usize..4) {
            prop_assume!(p + q <= dim);
            let s = euclid(dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, p, &mut rng);
            let b = random_form(&s, q, &mut rng);
            let sign = if (p * q) % 2 == 0 { 1.0 } else { -1.0 };
            let lhs = a.wedge(&b).unwrap();
            let rhs = b.wedge(&a).unwrap().scale(sign);
            prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
        }

        #[test]
        fn interior_antiderivation(seed in any::<u64>(), dim in 2usize..=7, p in 1usize..4, q in 1usize..4) {
            prop_assume!(p + q <= dim);
            let s = euclid(dim);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, p, &mut rng);
            let b = random_form(&s, q, &mut rng);
            let v = random_vec(dim, &mut rng);
            let lhs = a.wedge(&b).unwrap().interior(&v).unwrap();
            let sign = if p % 2 == 0 { 1.0 } else { -1.0 };
            let rhs = &a.interior(&v).unwrap().wedge(&b).unwrap() + &a.wedge(&b.interior(&v).unwrap()).unwrap().scale(sign);
            prop_assert!((&lhs - &rhs).max_abs() < 1e-12);
            prop_assert!(a.interior(&v).unwrap().interior(&v).map(|f| f.max_abs() < 1e-12).unwrap_or(true));
        }

        #[test]
        fn evaluation_alternating_and_multilinear(seed in any::<u64>(), k in 2usize..5) {
            let s = euclid(6);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, k, &mut rng);
            let mut vs: Vec<_> = (0..k).map(|_| random_vec(6, &mut rng)).collect();
            vs[1] = vs[0].clone();
            prop_assert!(a.eval(&vs).unwrap().abs() < 1e-12);
            let w = random_vec(6, &mut rng);
            let base = a.eval(&vs).unwrap();
            let mut shifted = vs.clone();
            shifted[0] = &vs[0] * 2.5 + &w;
            let mut only_w = vs.clone();
            only_w[0] = w;
            let lin = 2.5 * base + a.eval(&only_w).unwrap();
            prop_assert!((a.eval(&shifted).unwrap() - lin).abs() < 1e-12);
        }

        #[test]
        fn interior_matches_evaluation(seed in any::<u64>()) {
            let s = euclid(5);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = random_form(&s, 3, &mut rng);
            let vs: Vec<_> = (0..3).map(|_| random_vec(5, &mut rng)).collect();
            let c = a.interior(&vs[0]).unwrap();
            let lhs = c.eval(&vs[1..]).unwrap();
            prop_assert!((lhs - a.eval(&vs).unwrap()).abs() < 1e-12);
        }
    }
}
