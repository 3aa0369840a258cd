//! Dense complex linear algebra for the small dimensions used throughout the
//! crate (a few dozen at most).
//!
//! Matrices are stored row-major and treated as immutable values: every
//! operation returns a new matrix. The Hermitian eigensolver is a cyclic
//! complex Jacobi iteration, which is slow for large inputs but extremely
//! robust at these sizes, including for highly degenerate spectra.

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::{Error, Result};

pub type C64 = Complex64;

/// Default absolute tolerance for matrix comparisons.
pub const TOL: f64 = 1e-10;

const JACOBI_MAX_SWEEPS: usize = 100;
const JACOBI_OFF_TOL: f64 = 1e-12;

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:+.4}{:+.4}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![C64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = re(1.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows. Panics on ragged input.
    pub fn from_rows<R: AsRef<[C64]>>(rows: &[R]) -> Self {
        let r = rows.len();
        let cols = rows.first().map_or(0, |row| row.as_ref().len());
        let mut data = Vec::with_capacity(r * cols);
        for row in rows {
            let row = row.as_ref();
            assert_eq!(row.len(), cols, "ragged rows");
            data.extend_from_slice(row);
        }
        Self {
            rows: r,
            cols,
            data,
        }
    }

    pub fn from_real_rows<R: AsRef<[f64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| re(x)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let n = values.len();
        Self::from_fn(n, n, |i, j| if i == j { re(values[i]) } else { re(0.0) })
    }

    /// Rank-one operator |u⟩⟨v|.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        Self::from_fn(u.len(), v.len(), |i, j| u[i] * v[j].conj())
    }

    /// Matrix whose columns are the given vectors.
    pub fn from_columns(cols: &[Vec<C64>]) -> Result<Self> {
        let ncols = cols.len();
        let nrows = cols.first().map_or(0, Vec::len);
        if cols.iter().any(|c| c.len() != nrows) {
            return Err(Error::DimMismatch("columns of unequal length".into()));
        }
        Ok(Self::from_fn(nrows, ncols, |i, j| cols[j][i]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn dagger(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// Entrywise complex conjugate in the computational basis.
    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn scale(&self, k: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * k).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entrywise distance to `other`; infinite on shape mismatch.
    pub fn max_diff(&self, other: &CMatrix) -> f64 {
        if self.rows != other.rows || self.cols != other.cols {
            return f64::INFINITY;
        }
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, other: &CMatrix, tol: f64) -> bool {
        self.max_diff(other) <= tol
    }

    /// max |M − M†|, or infinity for non-square input.
    pub fn hermitian_deviation(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let mut dev: f64 = 0.0;
        for i in 0..self.rows {
            for j in i..self.cols {
                dev = dev.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        dev
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_deviation() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.is_square() && (&self.dagger() * self).approx_eq(&Self::identity(self.rows), tol)
    }

    pub fn matmul(&self, other: &CMatrix) -> Result<CMatrix> {
        if self.cols != other.rows {
            return Err(Error::DimMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = CMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = &other.data[k * other.cols..(k + 1) * other.cols];
                let out_row = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, b) in out_row.iter_mut().zip(orow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, v: &[C64]) -> Result<Vec<C64>> {
        if self.cols != v.len() {
            return Err(Error::DimMismatch(format!(
                "{}x{} matrix applied to length-{} vector",
                self.rows,
                self.cols,
                v.len()
            )));
        }
        Ok((0..self.rows)
            .map(|i| {
                self.data[i * self.cols..(i + 1) * self.cols]
                    .iter()
                    .zip(v)
                    .map(|(a, b)| a * b)
                    .sum()
            })
            .collect())
    }

    fn zip_with(&self, other: &CMatrix, f: impl Fn(C64, C64) -> C64) -> Result<CMatrix> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimMismatch(format!(
                "{}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn try_add(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn try_sub(&self, other: &CMatrix) -> Result<CMatrix> {
        self.zip_with(other, |a, b| a - b)
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

// The operator impls panic on shape mismatch; use the `try_*`/`matmul`
// methods where shapes come from user input.
impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs).expect("matrix product shape mismatch")
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        self.try_add(rhs).expect("matrix sum shape mismatch")
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        self.try_sub(rhs).expect("matrix difference shape mismatch")
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(re(-1.0))
    }
}

/// Kronecker product: `(a⊗b)[(i·rb+k),(j·cb+l)] = a[i,j]·b[k,l]`.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let (rb, cb) = (b.rows, b.cols);
    CMatrix::from_fn(a.rows * rb, a.cols * cb, |r, s| {
        a[(r / rb, s / cb)] * b[(r % rb, s % cb)]
    })
}

/// Kronecker product of a list of factors, left to right.
pub fn tensor_all(factors: &[&CMatrix]) -> CMatrix {
    factors
        .iter()
        .fold(CMatrix::identity(1), |acc, f| tensor(&acc, f))
}

fn check_square_pair(a: &CMatrix, b: &CMatrix) -> Result<()> {
    if !a.is_square() || !b.is_square() || a.rows != b.rows {
        return Err(Error::DimMismatch(format!(
            "commutator of {}x{} and {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    Ok(())
}

/// `ab − ba`
pub fn commutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square_pair(a, b)?;
    Ok(&(a * b) - &(b * a))
}

/// `ab + ba`
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    check_square_pair(a, b)?;
    Ok(&(a * b) + &(b * a))
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct Eigen {
    /// Ascending.
    pub values: Vec<f64>,
    /// Column `k` is the eigenvector for `values[k]`.
    pub vectors: CMatrix,
}

impl Eigen {
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.vectors.column(k)
    }
}

/// Hermitian eigendecomposition by cyclic complex Jacobi rotations.
///
/// Sweeps over all off-diagonal pairs until the off-diagonal Frobenius norm
/// falls below `1e-12 · max(1, ‖m‖_F)` or 100 sweeps have run. Eigenvalues
/// come back ascending; nearly-equal eigenvalues are never merged here.
pub fn hermitian_eig(m: &CMatrix) -> Result<Eigen> {
    if !m.is_square() {
        return Err(Error::DimMismatch(format!(
            "eigendecomposition of non-square {}x{} matrix",
            m.rows, m.cols
        )));
    }
    let dev = m.hermitian_deviation();
    if dev > TOL {
        return Err(Error::NotHermitian(dev));
    }
    let n = m.rows;
    // Symmetrize so rounding noise in the input cannot break the iteration.
    let mut a = (m + &m.dagger()).scale(re(0.5));
    let mut v = CMatrix::identity(n);
    let threshold = JACOBI_OFF_TOL * a.frobenius_norm().max(1.0);

    for _ in 0..JACOBI_MAX_SWEEPS {
        if off_diagonal_norm(&a) < threshold {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                jacobi_rotate(&mut a, &mut v, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag: Vec<f64> = (0..n).map(|i| a[(i, i)].re).collect();
    order.sort_by(|&i, &j| diag[i].total_cmp(&diag[j]));
    let values = order.iter().map(|&i| diag[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, k| v[(r, order[k])]);
    Ok(Eigen { values, vectors })
}

fn off_diagonal_norm(a: &CMatrix) -> f64 {
    let n = a.rows;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// One rotation annihilating `a[p,q]`: `a ← G†aG`, `v ← vG` where
/// `G = diag(1, e^{-iα})·R(c, s)` on the (p,q) plane and `a[p,q] = |h|e^{iα}`.
fn jacobi_rotate(a: &mut CMatrix, v: &mut CMatrix, p: usize, q: usize) {
    let h = a[(p, q)];
    let habs = h.norm();
    if habs == 0.0 {
        return;
    }
    let n = a.rows;
    let phase = h / habs;
    let (app, aqq) = (a[(p, p)].re, a[(q, q)].re);
    let theta = (aqq - app) / (2.0 * habs);
    let t = if theta == 0.0 {
        1.0
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let cs = 1.0 / (1.0 + t * t).sqrt();
    let sn = t * cs;

    let gpp = re(cs);
    let gpq = re(sn);
    let gqp = phase.conj() * (-sn);
    let gqq = phase.conj() * cs;

    for k in 0..n {
        let (akp, akq) = (a[(k, p)], a[(k, q)]);
        a[(k, p)] = akp * gpp + akq * gqp;
        a[(k, q)] = akp * gpq + akq * gqq;
    }
    for k in 0..n {
        let (apk, aqk) = (a[(p, k)], a[(q, k)]);
        a[(p, k)] = gpp.conj() * apk + gqp.conj() * aqk;
        a[(q, k)] = gpq.conj() * apk + gqq.conj() * aqk;
    }
    a[(p, q)] = re(0.0);
    a[(q, p)] = re(0.0);
    a[(p, p)] = re(a[(p, p)].re);
    a[(q, q)] = re(a[(q, q)].re);

    for k in 0..n {
        let (vkp, vkq) = (v[(k, p)], v[(k, q)]);
        v[(k, p)] = vkp * gpp + vkq * gqp;
        v[(k, q)] = vkp * gpq + vkq * gqq;
    }
}

/// ⟨u|v⟩ (conjugate-linear in the first argument).
pub fn inner(u: &[C64], v: &[C64]) -> C64 {
    u.iter().zip(v).map(|(a, b)| a.conj() * b).sum()
}

pub fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// A normalized state with tensor-factor structure.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Normalizes `amps`; fails on length mismatch or a zero vector.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        let total: usize = dims.iter().product();
        if dims.is_empty() || total != amps.len() {
            return Err(Error::DimMismatch(format!(
                "{} amplitudes for subsystem dims {:?}",
                amps.len(),
                dims
            )));
        }
        let nrm = norm(&amps);
        if nrm < 1e-300 || !nrm.is_finite() {
            return Err(Error::ZeroState);
        }
        let amps = amps.into_iter().map(|z| z / nrm).collect();
        Ok(Self { dims, amps })
    }

    pub fn from_real(dims: Vec<usize>, amps: &[f64]) -> Result<Self> {
        Self::new(dims, amps.iter().map(|&x| re(x)).collect())
    }

    pub fn basis(dims: Vec<usize>, index: usize) -> Result<Self> {
        let total: usize = dims.iter().product();
        if index >= total {
            return Err(Error::BadIndices(format!("basis index {index} >= {total}")));
        }
        let mut amps = vec![re(0.0); total];
        amps[index] = re(1.0);
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn inner(&self, other: &StateVector) -> C64 {
        inner(&self.amps, &other.amps)
    }

    /// |⟨self|other⟩|, equal to 1 iff the states agree up to global phase.
    pub fn overlap_modulus(&self, other: &StateVector) -> f64 {
        self.inner(other).norm()
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        let amps = self
            .amps
            .iter()
            .flat_map(|a| other.amps.iter().map(move |b| a * b))
            .collect();
        StateVector { dims, amps }
    }

    /// ⟨ψ|O|ψ⟩
    pub fn expectation(&self, op: &CMatrix) -> Result<C64> {
        let ov = op.mul_vec(&self.amps)?;
        Ok(inner(&self.amps, &ov))
    }

    /// `O|ψ⟩` without renormalization.
    pub fn apply(&self, op: &CMatrix) -> Result<Vec<C64>> {
        op.mul_vec(&self.amps)
    }

    /// Largest entrywise distance between amplitude vectors.
    pub fn max_diff(&self, other: &StateVector) -> f64 {
        if self.amps.len() != other.amps.len() {
            return f64::INFINITY;
        }
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Random matrices and states for property checks and demos.
pub mod random {
    use super::*;

    fn gaussian_c64<R: Rng + ?Sized>(rng: &mut R) -> C64 {
        let a: f64 = rng.sample(StandardNormal);
        let b: f64 = rng.sample(StandardNormal);
        c(a, b)
    }

    pub fn complex_vector<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Vec<C64> {
        (0..n).map(|_| gaussian_c64(rng)).collect()
    }

    /// `(G + G†)/2` with a complex Gaussian `G`.
    pub fn hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let g = CMatrix::from_fn(n, n, |_, _| gaussian_c64(rng));
        (&g + &g.dagger()).scale(re(0.5))
    }

    /// Haar-distributed unitary via Gram–Schmidt on Gaussian columns.
    pub fn unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let mut cols: Vec<Vec<C64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v = complex_vector(n, rng);
            for u in &cols {
                let proj = inner(u, &v);
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
            let nrm = norm(&v);
            if nrm < 1e-8 {
                continue;
            }
            cols.push(v.into_iter().map(|z| z / nrm).collect());
        }
        CMatrix::from_columns(&cols).expect("square by construction")
    }

    /// Real orthogonal matrix (Gram–Schmidt on real Gaussian columns).
    pub fn orthogonal<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMatrix {
        let mut cols: Vec<Vec<f64>> = Vec::with_capacity(n);
        while cols.len() < n {
            let mut v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            for u in &cols {
                let proj: f64 = u.iter().zip(&v).map(|(a, b)| a * b).sum();
                for (vi, ui) in v.iter_mut().zip(u) {
                    *vi -= proj * ui;
                }
            }
            let nrm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if nrm < 1e-8 {
                continue;
            }
            cols.push(v.into_iter().map(|x| x / nrm).collect());
        }
        CMatrix::from_fn(n, n, |i, j| re(cols[j][i]))
    }

    pub fn state<R: Rng + ?Sized>(dims: Vec<usize>, rng: &mut R) -> StateVector {
        let n = dims.iter().product();
        StateVector::new(dims, complex_vector(n, rng)).expect("nonzero with probability one")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sx() -> CMatrix {
        CMatrix::from_real_rows(&[[0.0, 1.0], [1.0, 0.0]])
    }

    fn sy() -> CMatrix {
        CMatrix::from_rows(&[[re(0.0), c(0.0, -1.0)], [c(0.0, 1.0), re(0.0)]])
    }

    #[test]
    fn identity_tensor_identity() {
        assert_eq!(
            tensor(&CMatrix::identity(2), &CMatrix::identity(2)),
            CMatrix::identity(4)
        );
    }

    #[test]
    fn basis_bookkeeping() {
        let e1 = CMatrix::from_real_rows(&[[1.0], [0.0]]);
        let e2 = CMatrix::from_real_rows(&[[0.0], [1.0]]);
        let t = tensor(&e1, &e2);
        assert_eq!(t.rows(), 4);
        assert_eq!(t.column(0), vec![re(0.0), re(1.0), re(0.0), re(0.0)]);
    }

    #[test]
    fn tensor_entry_index_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = CMatrix::from_fn(2, 2, |_, _| c(rng.random(), rng.random()));
        let b = CMatrix::from_fn(3, 3, |_, _| c(rng.random(), rng.random()));
        let t = tensor(&a, &b);
        // row (i=1,k=2) -> 1*3+2 = 5, col (j=0,l=1) -> 0*3+1 = 1
        assert_eq!(t[(5, 1)], a[(1, 0)] * b[(2, 1)]);
        assert_eq!((t.rows(), t.cols()), (6, 6));
    }

    #[test]
    fn diagonal_eigen() {
        let e = hermitian_eig(&CMatrix::diag_real(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(e.values, vec![1.0, 2.0, 3.0]);
        // columns are a permutation of identity columns
        for k in 0..3 {
            let col = e.vector(k);
            let ones = col.iter().filter(|z| (z.norm() - 1.0).abs() < 1e-15).count();
            assert_eq!(ones, 1);
        }
        assert_eq!(e.vectors[(1, 0)], re(1.0));
        assert_eq!(e.vectors[(2, 1)], re(1.0));
        assert_eq!(e.vectors[(0, 2)], re(1.0));
    }

    #[test]
    fn eigen_matches_quadratic_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let m = random::hermitian(2, &mut rng);
            let (a, d) = (m[(0, 0)].re, m[(1, 1)].re);
            let b2 = m[(0, 1)].norm_sqr();
            let mean = 0.5 * (a + d);
            let disc = (0.25 * (a - d).powi(2) + b2).sqrt();
            let e = hermitian_eig(&m).unwrap();
            assert!((e.values[0] - (mean - disc)).abs() < 1e-10);
            assert!((e.values[1] - (mean + disc)).abs() < 1e-10);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let m = CMatrix::from_real_rows(&[[0.0, 1.0], [0.0, 0.0]]);
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian(_))));
    }

    #[test]
    fn eigen_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for n in 2..=12 {
            let m = random::hermitian(n, &mut rng);
            let e = hermitian_eig(&m).unwrap();
            assert!(e.vectors.is_unitary(1e-10));
            let back = &(&e.vectors * &CMatrix::diag_real(&e.values)) * &e.vectors.dagger();
            assert!(back.approx_eq(&m, 1e-10), "n={n}");
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn degenerate_spectrum() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let u = random::unitary(6, &mut rng);
        let d = CMatrix::diag_real(&[1.0, 1.0, 1.0, -2.0, -2.0, 5.0]);
        let m = &(&u * &d) * &u.dagger();
        let e = hermitian_eig(&m).unwrap();
        let expected = [-2.0, -2.0, 1.0, 1.0, 1.0, 5.0];
        for (x, y) in e.values.iter().zip(expected) {
            assert!((x - y).abs() < 1e-10);
        }
    }

    #[test]
    fn pauli_commutators() {
        let z = CMatrix::zeros(2, 2);
        assert_eq!(commutator(&sx(), &sx()).unwrap(), z);
        assert!(anticommutator(&sx(), &sy()).unwrap().approx_eq(&z, 0.0));
        let i2 = CMatrix::identity(2);
        let a = tensor(&sx(), &i2);
        let b = tensor(&i2, &sy());
        assert!(commutator(&a, &b).unwrap().approx_eq(&CMatrix::zeros(4, 4), 0.0));
    }

    #[test]
    fn commutator_dim_mismatch() {
        assert!(matches!(
            commutator(&sx(), &CMatrix::identity(3)),
            Err(Error::DimMismatch(_))
        ));
    }

    #[test]
    fn state_normalization() {
        let s = StateVector::from_real(vec![2], &[3.0, 4.0]).unwrap();
        assert!((norm(s.amps()) - 1.0).abs() < 1e-12);
        assert!(matches!(
            StateVector::from_real(vec![2], &[0.0, 0.0]),
            Err(Error::ZeroState)
        ));
        assert!(matches!(
            StateVector::from_real(vec![2, 2], &[1.0, 0.0]),
            Err(Error::DimMismatch(_))
        ));
    }
}
