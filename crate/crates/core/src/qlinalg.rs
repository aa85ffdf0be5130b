//! Dense complex linear algebra for small multi-qubit Hilbert spaces.
//!
//! Everything here is sized for at most a few hundred dimensions: vectors
//! and matrices are plain row-major `Vec<Complex64>` buffers. Tensor factors
//! are always ordered copy A, copy B, ..., then ancilla, with the first
//! factor most significant in the flattened index.

use std::ops::{Index, IndexMut};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for treating a vector as a unit state.
pub const STATE_TOL: f64 = 1e-12;

/// Largest number of qubits handled by [`sym_basis`].
pub const MAX_SYM_QUBITS: usize = 10;

const DEGENERACY_TOL: f64 = 1e-10;

#[inline]
pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn real(re: f64) -> C64 {
    C64::new(re, 0.0)
}

/// `⟨x|y⟩` over raw slices.
#[inline]
pub fn inner_slices(x: &[C64], y: &[C64]) -> C64 {
    x.iter().zip(y).map(|(a, b)| a.conj() * b).sum()
}

#[inline]
fn norm_sqr_slice(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Self {
        Self(entries)
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self(entries.iter().map(|&x| real(x)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        Self(vec![C64::new(0.0, 0.0); dim])
    }

    /// Computational basis ket `|k⟩` in dimension `dim`.
    pub fn basis(dim: usize, k: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[k] = real(1.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        norm_sqr_slice(&self.0)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// `⟨self|other⟩`, conjugating `self`.
    pub fn inner(&self, other: &Self) -> C64 {
        inner_slices(&self.0, &other.0)
    }

    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm_sqr() - 1.0).abs() <= tol
    }

    /// Returns `Ok(())` when `Σ|v_k|² = 1` within [`STATE_TOL`].
    pub fn check_unit(&self) -> Result<()> {
        let n = self.norm_sqr();
        if (n - 1.0).abs() <= STATE_TOL {
            Ok(())
        } else {
            Err(Error::NotNormalized(n))
        }
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n <= DEGENERACY_TOL {
            return Err(Error::Degenerate(n));
        }
        Ok(self.scale(real(1.0 / n)))
    }

    pub fn scale(&self, s: C64) -> Self {
        Self(self.0.iter().map(|z| z * s).collect())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

impl IndexMut<usize> for ComplexVector {
    fn index_mut(&mut self, i: usize) -> &mut C64 {
        &mut self.0[i]
    }
}

impl From<Vec<C64>> for ComplexVector {
    fn from(v: Vec<C64>) -> Self {
        Self(v)
    }
}

/// Row-major dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
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
            m[(i, i)] = real(1.0);
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::Shape("ragged rows".into()));
        }
        Self::from_row_major(rows.len(), cols, rows.concat())
    }

    pub fn from_columns(columns: &[ComplexVector]) -> Result<Self> {
        let rows = columns.first().map_or(0, ComplexVector::dim);
        if columns.iter().any(|c| c.dim() != rows) {
            return Err(Error::Shape("columns of unequal length".into()));
        }
        let mut m = Self::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            for i in 0..rows {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        ComplexVector((0..self.rows).map(|i| self[(i, j)]).collect())
    }

    pub fn columns(&self) -> Vec<ComplexVector> {
        (0..self.cols).map(|j| self.column(j)).collect()
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn mul_vec(&self, v: &ComplexVector) -> Result<ComplexVector> {
        if v.dim() != self.cols {
            return Err(Error::Shape(format!(
                "{}x{} matrix times {}-vector",
                self.rows,
                self.cols,
                v.dim()
            )));
        }
        Ok(ComplexVector(
            self.data
                .chunks_exact(self.cols)
                .map(|row| row.iter().zip(v.entries()).map(|(a, b)| a * b).sum())
                .collect(),
        ))
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "{}x{} times {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        Ok(out)
    }

    /// Largest `|M_ij − conj(M_ji)|`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..self.rows {
            for j in 0..self.cols {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `⟨ψ|M|ψ⟩` for a square matrix.
    pub fn expectation(&self, psi: &ComplexVector) -> Result<C64> {
        Ok(psi.inner(&self.mul_vec(psi)?))
    }

    /// Worst deviation of `M†M` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let cols = self.columns();
        let mut worst = 0.0f64;
        for (i, ci) in cols.iter().enumerate() {
            for (j, cj) in cols.iter().enumerate() {
                let target = if i == j { real(1.0) } else { real(0.0) };
                worst = worst.max((ci.inner(cj) - target).norm());
            }
        }
        worst
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Kronecker product `u ⊗ v`.
pub fn tensor(u: &ComplexVector, v: &ComplexVector) -> ComplexVector {
    let mut out = Vec::with_capacity(u.dim() * v.dim());
    for a in u.entries() {
        out.extend(v.entries().iter().map(|b| a * b));
    }
    ComplexVector(out)
}

/// `|s⟩⟨s|` for a unit vector.
pub fn outer(s: &ComplexVector) -> Result<ComplexMatrix> {
    s.check_unit()?;
    let n = s.dim();
    let mut m = ComplexMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            m[(i, j)] = s[i] * s[j].conj();
        }
    }
    Ok(m)
}

fn check_dims(total: usize, dims: &[usize], keep: &[usize]) -> Result<Vec<usize>> {
    if dims.contains(&0) {
        return Err(Error::Shape("zero-dimensional factor".into()));
    }
    let product: usize = dims.iter().product();
    if product != total {
        return Err(Error::Shape(format!(
            "factor dims {dims:?} multiply to {product}, matrix has dimension {total}"
        )));
    }
    let mut kept = keep.to_vec();
    kept.sort_unstable();
    kept.dedup();
    if kept.is_empty() {
        return Err(Error::Shape("no factors kept".into()));
    }
    if let Some(&bad) = kept.iter().find(|&&k| k >= dims.len()) {
        return Err(Error::Index {
            index: bad,
            limit: dims.len(),
        });
    }
    Ok(kept)
}

/// `(dimension, stride)` of each factor in a flattened index.
type Strides = Vec<(usize, usize)>;

/// Splits the factors into (kept, traced) lists of flattened-index strides.
fn factor_strides(dims: &[usize], kept: &[usize]) -> (Strides, Strides) {
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut keep_list = Vec::new();
    let mut trace_list = Vec::new();
    for (k, (&d, &s)) in dims.iter().zip(&strides).enumerate() {
        if kept.contains(&k) {
            keep_list.push((d, s));
        } else {
            trace_list.push((d, s));
        }
    }
    (keep_list, trace_list)
}

/// Offsets into the full index for every multi-index over the given factors,
/// enumerated with the first factor most significant.
fn offsets(factors: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &(d, s) in factors {
        out = out
            .iter()
            .flat_map(|&base| (0..d).map(move |x| base + x * s))
            .collect();
    }
    out
}

/// Reduced density matrix on the factors listed in `keep`.
pub fn partial_trace(rho: &ComplexMatrix, dims: &[usize], keep: &[usize]) -> Result<ComplexMatrix> {
    if rho.rows() != rho.cols() {
        return Err(Error::Shape(format!(
            "{}x{} is not square",
            rho.rows(),
            rho.cols()
        )));
    }
    let kept = check_dims(rho.rows(), dims, keep)?;
    let (keep_f, trace_f) = factor_strides(dims, &kept);
    let ko = offsets(&keep_f);
    let to = offsets(&trace_f);
    let m = ko.len();
    let mut out = ComplexMatrix::zeros(m, m);
    for (i, &ki) in ko.iter().enumerate() {
        for (j, &kj) in ko.iter().enumerate() {
            out[(i, j)] = to.iter().map(|&t| rho[(ki + t, kj + t)]).sum();
        }
    }
    Ok(out)
}

/// Reduced density matrix of a pure state on a single factor, computed
/// without forming `|s⟩⟨s|`.
pub fn pure_marginal(state: &[C64], dims: &[usize], factor: usize) -> Result<ComplexMatrix> {
    let kept = check_dims(state.len(), dims, &[factor])?;
    let (keep_f, trace_f) = factor_strides(dims, &kept);
    let (d, stride) = keep_f[0];
    let to = offsets(&trace_f);
    let mut out = ComplexMatrix::zeros(d, d);
    for i in 0..d {
        for j in i..d {
            let v: C64 = to
                .iter()
                .map(|&t| state[i * stride + t] * state[j * stride + t].conj())
                .sum();
            out[(i, j)] = v;
            out[(j, i)] = v.conj();
        }
    }
    Ok(out)
}

/// Exact binomial coefficient `C(n, k)`.
pub fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        // exact at every step: acc * (n - i) is divisible by (i + 1)
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

/// Normalized Dicke states `|i⟩⟩`, `i = 0..=n`, in dimension `2ⁿ`.
///
/// `|i⟩⟩` puts amplitude `1/√C(n,i)` on every computational ket with exactly
/// `i` ones.
pub fn sym_basis(n: usize) -> Result<Vec<ComplexVector>> {
    if n == 0 || n > MAX_SYM_QUBITS {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            allowed: "1..=10",
        });
    }
    let dim = 1usize << n;
    Ok((0..=n)
        .map(|i| {
            let amp = real(1.0 / (binomial(n as u64, i as u64) as f64).sqrt());
            let mut v = ComplexVector::zeros(dim);
            for k in (0..dim).filter(|k| k.count_ones() as usize == i) {
                v[k] = amp;
            }
            v
        })
        .collect())
}

/// Orthonormalizes two columns in place (Gram–Schmidt, two projection passes).
pub fn orthonormalize_pair(c0: &mut [C64], c1: &mut [C64]) -> Result<()> {
    let n0 = norm_sqr_slice(c0).sqrt();
    if n0 <= DEGENERACY_TOL {
        return Err(Error::Degenerate(n0));
    }
    let inv = 1.0 / n0;
    c0.iter_mut().for_each(|z| *z *= inv);
    for _ in 0..2 {
        let p = inner_slices(c0, c1);
        c1.iter_mut().zip(c0.iter()).for_each(|(y, x)| *y -= p * x);
    }
    let n1 = norm_sqr_slice(c1).sqrt();
    if n1 <= DEGENERACY_TOL {
        return Err(Error::Degenerate(n1));
    }
    let inv = 1.0 / n1;
    c1.iter_mut().for_each(|z| *z *= inv);
    Ok(())
}

/// Orthonormal columns spanning the same nested subspaces as the input's.
pub fn orthonormalize(m: &ComplexMatrix) -> Result<ComplexMatrix> {
    if m.rows() < m.cols() {
        return Err(Error::Shape(format!(
            "{}x{} has more columns than rows",
            m.rows(),
            m.cols()
        )));
    }
    let mut done: Vec<ComplexVector> = Vec::with_capacity(m.cols());
    for j in 0..m.cols() {
        let mut v = m.column(j).into_entries();
        for _ in 0..2 {
            for q in &done {
                let p = inner_slices(q.entries(), &v);
                v.iter_mut().zip(q.entries()).for_each(|(y, x)| *y -= p * x);
            }
        }
        let n = norm_sqr_slice(&v).sqrt();
        if n <= DEGENERACY_TOL {
            return Err(Error::Degenerate(n));
        }
        v.iter_mut().for_each(|z| *z /= n);
        done.push(ComplexVector(v));
    }
    ComplexMatrix::from_columns(&done)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn close(a: C64, b: C64) -> bool {
        (a - b).norm() < 1e-14
    }

    #[test]
    fn tensor_basis_kets() {
        let k0 = ComplexVector::basis(2, 0);
        let k1 = ComplexVector::basis(2, 1);
        assert_eq!(
            tensor(&k0, &k0),
            ComplexVector::from_real(&[1.0, 0.0, 0.0, 0.0])
        );
        assert_eq!(
            tensor(&k0, &k1),
            ComplexVector::from_real(&[0.0, 1.0, 0.0, 0.0])
        );
        let plus = ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        assert_eq!(
            tensor(&plus, &k0),
            ComplexVector::from_real(&[FRAC_1_SQRT_2, 0.0, FRAC_1_SQRT_2, 0.0])
        );
    }

    #[test]
    fn outer_examples() {
        let m = outer(&ComplexVector::basis(2, 0)).unwrap();
        assert_eq!(
            m,
            ComplexMatrix::from_rows(&[vec![real(1.0), real(0.0)], vec![real(0.0), real(0.0)]])
                .unwrap()
        );

        let plus = ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let m = outer(&plus).unwrap();
        assert!(m.as_slice().iter().all(|&z| close(z, real(0.5))));

        let plus_i = ComplexVector::new(vec![real(FRAC_1_SQRT_2), c64(0.0, FRAC_1_SQRT_2)]);
        let m = outer(&plus_i).unwrap();
        assert!(close(m[(0, 0)], real(0.5)));
        assert!(close(m[(0, 1)], c64(0.0, -0.5)));
        assert!(close(m[(1, 0)], c64(0.0, 0.5)));
        assert!(close(m[(1, 1)], real(0.5)));
    }

    #[test]
    fn outer_rejects_unnormalized() {
        let v = ComplexVector::from_real(&[1.0, 1.0]);
        assert!(matches!(outer(&v), Err(Error::NotNormalized(_))));
    }

    #[test]
    fn partial_trace_examples() {
        let bell = ComplexVector::from_real(&[FRAC_1_SQRT_2, 0.0, 0.0, FRAC_1_SQRT_2]);
        let r = partial_trace(&outer(&bell).unwrap(), &[2, 2], &[0]).unwrap();
        assert!(close(r[(0, 0)], real(0.5)) && close(r[(1, 1)], real(0.5)));
        assert!(close(r[(0, 1)], real(0.0)) && close(r[(1, 0)], real(0.0)));

        let prod = tensor(&ComplexVector::basis(2, 0), &ComplexVector::basis(2, 1));
        let r = partial_trace(&outer(&prod).unwrap(), &[2, 2], &[1]).unwrap();
        assert!(close(r[(1, 1)], real(1.0)) && close(r[(0, 0)], real(0.0)));

        // economic phase-covariant cloner applied to |+⟩
        let out = ComplexVector::from_real(&[FRAC_1_SQRT_2, 0.5, 0.5, 0.0]);
        let r = partial_trace(&outer(&out).unwrap(), &[2, 2], &[0]).unwrap();
        let s2 = 2f64.sqrt() / 4.0;
        assert!(close(r[(0, 0)], real(0.75)));
        assert!(close(r[(0, 1)], real(s2)));
        assert!(close(r[(1, 0)], real(s2)));
        assert!(close(r[(1, 1)], real(0.25)));
    }

    #[test]
    fn partial_trace_shape_errors() {
        let rho = ComplexMatrix::identity(4);
        assert!(matches!(
            partial_trace(&rho, &[2, 3], &[0]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &[2, 2], &[]),
            Err(Error::Shape(_))
        ));
        assert!(matches!(
            partial_trace(&rho, &[2, 2], &[2]),
            Err(Error::Index { .. })
        ));
    }

    #[test]
    fn partial_trace_over_everything_kept_is_identity_map() {
        let s = ComplexVector::new(vec![c64(0.6, 0.0), c64(0.0, 0.8)]);
        let rho = outer(&s).unwrap();
        assert!(partial_trace(&rho, &[2], &[0]).unwrap().max_abs_diff(&rho) < 1e-15);
    }

    #[test]
    fn sym_basis_examples() {
        let b1 = sym_basis(1).unwrap();
        assert_eq!(
            b1,
            vec![ComplexVector::basis(2, 0), ComplexVector::basis(2, 1)]
        );

        let b3 = sym_basis(3).unwrap();
        let r = 1.0 / 3f64.sqrt();
        let expected = ComplexVector::from_real(&[0.0, r, r, 0.0, r, 0.0, 0.0, 0.0]);
        assert!(b3[1].max_abs_diff(&expected) < 1e-15);

        let b2 = sym_basis(2).unwrap();
        let expected = ComplexVector::from_real(&[0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2, 0.0]);
        assert!(b2[1].max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn sym_basis_range() {
        assert!(sym_basis(0).is_err());
        assert!(sym_basis(11).is_err());
    }

    #[test]
    fn sym_basis_orthonormal_up_to_ten() {
        for n in 1..=MAX_SYM_QUBITS {
            let b = sym_basis(n).unwrap();
            assert_eq!(b.len(), n + 1);
            for (i, u) in b.iter().enumerate() {
                for (j, v) in b.iter().enumerate() {
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (u.inner(v) - real(target)).norm() < 1e-12,
                        "n={n} i={i} j={j}"
                    );
                }
            }
        }
    }

    #[test]
    fn binomial_pascal_rule_exact() {
        for n in 1..=60u64 {
            for i in 0..n {
                assert_eq!(
                    binomial(n - 1, i) + binomial(n - 1, i + 1),
                    binomial(n, i + 1)
                );
            }
        }
        assert_eq!(binomial(10, 5), 252);
        assert_eq!(binomial(3, 4), 0);
    }

    #[test]
    fn orthonormalize_examples() {
        let id = ComplexMatrix::identity(2);
        assert!(orthonormalize(&id).unwrap().max_abs_diff(&id) < 1e-15);

        let m = ComplexMatrix::from_rows(&[vec![real(2.0), real(0.0)], vec![real(0.0), real(3.0)]])
            .unwrap();
        assert!(orthonormalize(&m).unwrap().max_abs_diff(&id) < 1e-15);
    }

    #[test]
    fn orthonormalize_rank_deficient() {
        let m = ComplexMatrix::from_rows(&[vec![real(1.0), real(2.0)], vec![real(1.0), real(2.0)]])
            .unwrap();
        assert!(matches!(orthonormalize(&m), Err(Error::Degenerate(_))));
        let wide = ComplexMatrix::zeros(1, 2);
        assert!(matches!(orthonormalize(&wide), Err(Error::Shape(_))));
    }

    #[test]
    fn pure_marginal_matches_partial_trace() {
        let s = ComplexVector::new(vec![
            c64(0.1, 0.2),
            c64(-0.3, 0.1),
            c64(0.4, -0.2),
            c64(0.05, 0.3),
            c64(-0.2, -0.1),
            c64(0.3, 0.3),
        ])
        .normalized()
        .unwrap();
        let rho = outer(&s).unwrap();
        for f in 0..2 {
            let dims = [2, 3];
            let a = pure_marginal(s.entries(), &dims, f).unwrap();
            let b = partial_trace(&rho, &dims, &[f]).unwrap();
            assert!(a.max_abs_diff(&b) < 1e-15);
        }
    }
}
