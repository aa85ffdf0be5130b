//! Structured cloning machines and their common isometry form.
//!
//! A machine is stored as its action on the two input kets only (input
//! qubit `|x⟩` with the blank copy and, when present, the initial ancilla
//! state). The two images are the columns of a `D×2` isometry whose rows are
//! indexed by copy A, copy B, ..., then the ancilla.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qlinalg::{outer, real, sym_basis, ComplexMatrix, ComplexVector, C64, MAX_SYM_QUBITS};

/// Pass threshold for the normalization and orthogonality residuals.
pub const CONSTRAINT_TOL: f64 = 1e-8;

/// Largest ancilla dimension for the structured two-copy machines.
pub const MAX_STRUCTURED_ANCILLA: usize = 4;

/// Residuals of the isometry conditions on the two image columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstraintReport {
    /// `‖U|0⟩‖² − 1`
    pub norm0: f64,
    /// `‖U|1⟩‖² − 1`
    pub norm1: f64,
    /// `|⟨U0|U1⟩|`
    pub overlap: f64,
    pub pass: bool,
}

impl ConstraintReport {
    fn from_parts(norm0: f64, norm1: f64, overlap: f64) -> Self {
        let worst = norm0.abs().max(norm1.abs()).max(overlap);
        Self {
            norm0,
            norm1,
            overlap,
            pass: worst.is_finite() && worst <= CONSTRAINT_TOL,
        }
    }

    fn from_columns(c0: &ComplexVector, c1: &ComplexVector) -> Self {
        Self::from_parts(
            c0.norm_sqr() - 1.0,
            c1.norm_sqr() - 1.0,
            c0.inner(c1).norm(),
        )
    }

    pub fn max_residual(&self) -> f64 {
        self.norm0.abs().max(self.norm1.abs()).max(self.overlap)
    }

    fn require(&self) -> Result<()> {
        if self.pass {
            Ok(())
        } else {
            Err(Error::InvalidMachine(format!(
                "constraint residuals norm0={:e} norm1={:e} overlap={:e}",
                self.norm0, self.norm1, self.overlap
            )))
        }
    }
}

/// Common interface of every machine representation.
pub trait Cloner {
    fn constraint_check(&self) -> ConstraintReport;
    fn to_isometry(&self) -> Result<CloneIsometry>;
}

pub fn constraint_check(c: &impl Cloner) -> ConstraintReport {
    c.constraint_check()
}

pub fn to_isometry(c: &impl Cloner) -> Result<CloneIsometry> {
    c.to_isometry()
}

/// The machine restricted to the input subspace: a `D×2` matrix with
/// orthonormal columns.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "IsometryRecord", into = "IsometryRecord")]
pub struct CloneIsometry {
    matrix: ComplexMatrix,
    copies: usize,
    ancilla_dim: usize,
}

#[derive(Clone, Serialize, Deserialize)]
struct IsometryRecord {
    copies: usize,
    ancilla_dim: usize,
    columns: [ComplexVector; 2],
}

impl From<CloneIsometry> for IsometryRecord {
    fn from(v: CloneIsometry) -> Self {
        Self {
            copies: v.copies,
            ancilla_dim: v.ancilla_dim,
            columns: [v.matrix.column(0), v.matrix.column(1)],
        }
    }
}

impl TryFrom<IsometryRecord> for CloneIsometry {
    type Error = Error;
    fn try_from(r: IsometryRecord) -> Result<Self> {
        CloneIsometry::new(
            ComplexMatrix::from_columns(&r.columns)?,
            r.copies,
            r.ancilla_dim,
        )
    }
}

impl CloneIsometry {
    pub fn new(matrix: ComplexMatrix, copies: usize, ancilla_dim: usize) -> Result<Self> {
        if copies == 0 || copies > MAX_SYM_QUBITS || ancilla_dim == 0 {
            return Err(Error::Shape(format!(
                "{copies} copies with ancilla dimension {ancilla_dim}"
            )));
        }
        let rows = (1usize << copies) * ancilla_dim;
        if matrix.rows() != rows || matrix.cols() != 2 {
            return Err(Error::Shape(format!(
                "expected a {rows}x2 matrix, got {}x{}",
                matrix.rows(),
                matrix.cols()
            )));
        }
        let v = Self {
            matrix,
            copies,
            ancilla_dim,
        };
        v.constraint_check().require()?;
        Ok(v)
    }

    pub fn from_columns(
        c0: &ComplexVector,
        c1: &ComplexVector,
        copies: usize,
        ancilla_dim: usize,
    ) -> Result<Self> {
        Self::new(
            ComplexMatrix::from_columns(&[c0.clone(), c1.clone()])?,
            copies,
            ancilla_dim,
        )
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn copies(&self) -> usize {
        self.copies
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    /// Tensor factor dimensions: one qubit per copy, then the ancilla.
    pub fn factor_dims(&self) -> Vec<usize> {
        let mut dims = vec![2; self.copies];
        dims.push(self.ancilla_dim);
        dims
    }

    pub fn column(&self, j: usize) -> ComplexVector {
        self.matrix.column(j)
    }

    /// `V|ψ⟩` for a qubit input.
    pub fn output_state(&self, input: &ComplexVector) -> Result<ComplexVector> {
        self.matrix.mul_vec(input)
    }

    /// Joint output density matrix `V|ψ⟩⟨ψ|V†`.
    pub fn apply(&self, input: &ComplexVector) -> Result<ComplexMatrix> {
        if input.dim() != 2 {
            return Err(Error::Shape(format!("input has dimension {}", input.dim())));
        }
        input.check_unit()?;
        let out = self.output_state(input)?;
        // renormalize away the last-ulp drift so outer() accepts it
        outer(&out.scale(real(1.0 / out.norm())))
    }

    pub fn constraint_check(&self) -> ConstraintReport {
        ConstraintReport::from_columns(&self.matrix.column(0), &self.matrix.column(1))
    }

    /// Global phase fixed so that the first entry of column 0 with modulus
    /// above 1e-9 is real and positive.
    pub fn canonical_gauge(&self) -> Self {
        let phase = self
            .matrix
            .column(0)
            .entries()
            .iter()
            .find(|z| z.norm() > 1e-9)
            .map(|z| z.conj() / z.norm())
            .unwrap_or(real(1.0));
        let data = self.matrix.as_slice().iter().map(|z| z * phase).collect();
        Self {
            matrix: ComplexMatrix::from_row_major(self.dim(), 2, data).expect("same shape"),
            copies: self.copies,
            ancilla_dim: self.ancilla_dim,
        }
    }

    /// Moduli of all entries, row-major.
    pub fn modulus_vector(&self) -> Vec<f64> {
        self.matrix.as_slice().iter().map(|z| z.norm()).collect()
    }

    /// Reads a symmetric-subspace economic machine back as coefficients on
    /// the Dicke basis.
    pub fn to_symmetric_n(&self) -> Result<SymmetricNCloner> {
        if self.ancilla_dim != 1 {
            return Err(Error::InvalidMachine("machine carries an ancilla".into()));
        }
        let basis = sym_basis(self.copies)?;
        let c0 = self.column(0);
        let c1 = self.column(1);
        let a: Vec<C64> = basis.iter().map(|e| e.inner(&c0)).collect();
        let b: Vec<C64> = basis.iter().map(|e| e.inner(&c1)).collect();
        let sym = SymmetricNCloner::new(a, b)?;
        let back = sym.to_isometry()?;
        let leak = back.matrix.max_abs_diff(&self.matrix);
        if leak > 1e-9 {
            return Err(Error::InvalidMachine(format!(
                "machine leaves the symmetric subspace (residual {leak:e})"
            )));
        }
        Ok(sym)
    }
}

impl Cloner for CloneIsometry {
    fn constraint_check(&self) -> ConstraintReport {
        CloneIsometry::constraint_check(self)
    }

    fn to_isometry(&self) -> Result<CloneIsometry> {
        Ok(self.clone())
    }
}

/// `V ρ V†` for the qubit input `input`.
pub fn apply(v: &CloneIsometry, input: &ComplexVector) -> Result<ComplexMatrix> {
    v.apply(input)
}

/// Economic 1→2 machine
/// `U|00⟩ = a|00⟩ + b|01⟩ + c|10⟩ + d|11⟩`,
/// `U|10⟩ = e|00⟩ + f|01⟩ + g|10⟩ + h|11⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EconomicCloner {
    /// `[a, b, c, d, e, f, g, h]`
    pub coefficients: [C64; 8],
}

impl EconomicCloner {
    pub fn new(coefficients: [C64; 8]) -> Self {
        Self { coefficients }
    }

    fn columns(&self) -> (ComplexVector, ComplexVector) {
        let [a, b, c, d, e, f, g, h] = self.coefficients;
        (
            ComplexVector::new(vec![a, b, c, d]),
            ComplexVector::new(vec![e, f, g, h]),
        )
    }
}

impl Cloner for EconomicCloner {
    fn constraint_check(&self) -> ConstraintReport {
        let [a, b, c, d, e, f, g, h] = self.coefficients;
        let n0 = a.norm_sqr() + b.norm_sqr() + c.norm_sqr() + d.norm_sqr();
        let n1 = e.norm_sqr() + f.norm_sqr() + g.norm_sqr() + h.norm_sqr();
        let ov = a.conj() * e + b.conj() * f + c.conj() * g + d.conj() * h;
        ConstraintReport::from_parts(n0 - 1.0, n1 - 1.0, ov.norm())
    }

    fn to_isometry(&self) -> Result<CloneIsometry> {
        self.constraint_check().require()?;
        let (c0, c1) = self.columns();
        CloneIsometry::from_columns(&c0, &c1, 2, 1)
    }
}

/// `U|00⟩ = |00⟩`, `U|10⟩ = (|01⟩ + |10⟩)/√2`.
pub fn economic_pqcm() -> EconomicCloner {
    let z = real(0.0);
    let s = real(FRAC_1_SQRT_2);
    EconomicCloner::new([real(1.0), z, z, z, z, s, s, z])
}

/// 1→2 machine with an ancilla:
/// `U|00R⟩ = a|00⟩|A⟩ + b|01⟩|B⟩ + c|10⟩|C⟩ + d|11⟩|D⟩`,
/// `U|10R⟩ = e|00⟩|E⟩ + f|01⟩|F⟩ + g|10⟩|G⟩ + h|11⟩|H⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawAncilla")]
pub struct AncillaCloner {
    /// `[a, b, c, d, e, f, g, h]`
    pub coefficients: [C64; 8],
    /// `[|A⟩, |B⟩, ..., |H⟩]`, unit vectors of length `ancilla_dim`.
    kets: Vec<ComplexVector>,
    ancilla_dim: usize,
}

#[derive(Deserialize)]
struct RawAncilla {
    coefficients: [C64; 8],
    kets: Vec<ComplexVector>,
    #[allow(dead_code)]
    ancilla_dim: usize,
}

impl TryFrom<RawAncilla> for AncillaCloner {
    type Error = Error;
    fn try_from(r: RawAncilla) -> Result<Self> {
        AncillaCloner::new(r.coefficients, r.kets)
    }
}

impl AncillaCloner {
    pub fn new(coefficients: [C64; 8], kets: Vec<ComplexVector>) -> Result<Self> {
        if kets.len() != 8 {
            return Err(Error::InvalidMachine(format!(
                "{} ancilla kets, need 8",
                kets.len()
            )));
        }
        let ancilla_dim = kets[0].dim();
        if ancilla_dim == 0 || ancilla_dim > MAX_STRUCTURED_ANCILLA {
            return Err(Error::OutOfRange {
                name: "ancilla_dim",
                value: ancilla_dim as f64,
                allowed: "1..=4",
            });
        }
        for k in &kets {
            if k.dim() != ancilla_dim {
                return Err(Error::InvalidMachine(
                    "ancilla kets of unequal dimension".into(),
                ));
            }
            if !k.is_unit(1e-10) {
                return Err(Error::NotNormalized(k.norm_sqr()));
            }
        }
        Ok(Self {
            coefficients,
            kets,
            ancilla_dim,
        })
    }

    /// The economic machine with a one-dimensional ancilla.
    pub fn from_economic(c: &EconomicCloner) -> Self {
        Self {
            coefficients: c.coefficients,
            kets: vec![ComplexVector::basis(1, 0); 8],
            ancilla_dim: 1,
        }
    }

    /// Reads a two-copy isometry as coefficients times unit ancilla kets.
    /// Blocks with zero weight get coefficient 0 and ket `|0⟩`.
    pub fn from_isometry(v: &CloneIsometry) -> Result<Self> {
        if v.copies() != 2 {
            return Err(Error::Shape(format!("{} copies, need 2", v.copies())));
        }
        let n = v.ancilla_dim();
        let mut coefficients = [real(0.0); 8];
        let mut kets = Vec::with_capacity(8);
        for col in 0..2 {
            let c = v.column(col);
            for slot in 0..4 {
                let block = ComplexVector::new(c.entries()[slot * n..(slot + 1) * n].to_vec());
                let norm = block.norm();
                if norm < 1e-15 {
                    kets.push(ComplexVector::basis(n, 0));
                } else {
                    coefficients[4 * col + slot] = real(norm);
                    kets.push(block.scale(real(1.0 / norm)));
                }
            }
        }
        Self::new(coefficients, kets)
    }

    pub fn ancilla_dim(&self) -> usize {
        self.ancilla_dim
    }

    pub fn kets(&self) -> &[ComplexVector] {
        &self.kets
    }

    /// `⟨K_i|K_j⟩` with `K_0..K_7 = A..H`.
    pub fn overlap(&self, i: usize, j: usize) -> C64 {
        self.kets[i].inner(&self.kets[j])
    }

    /// The machine with copies A and B exchanged (b↔c, f↔g and their kets).
    pub fn swap_copies(&self) -> Self {
        let mut out = self.clone();
        for (x, y) in [(1, 2), (5, 6)] {
            out.coefficients.swap(x, y);
            out.kets.swap(x, y);
        }
        out
    }

    fn columns(&self) -> (ComplexVector, ComplexVector) {
        let n = self.ancilla_dim;
        let mut c0 = ComplexVector::zeros(4 * n);
        let mut c1 = ComplexVector::zeros(4 * n);
        for slot in 0..4 {
            for k in 0..n {
                c0[slot * n + k] = self.coefficients[slot] * self.kets[slot][k];
                c1[slot * n + k] = self.coefficients[4 + slot] * self.kets[4 + slot][k];
            }
        }
        (c0, c1)
    }
}

impl Cloner for AncillaCloner {
    fn constraint_check(&self) -> ConstraintReport {
        let (c0, c1) = self.columns();
        ConstraintReport::from_columns(&c0, &c1)
    }

    fn to_isometry(&self) -> Result<CloneIsometry> {
        self.constraint_check().require()?;
        let (c0, c1) = self.columns();
        CloneIsometry::from_columns(&c0, &c1, 2, self.ancilla_dim)
    }
}

fn qubit_ancilla_kets() -> Vec<ComplexVector> {
    let k0 = ComplexVector::basis(2, 0);
    let k1 = ComplexVector::basis(2, 1);
    // A, B, C, D, E, F, G, H
    vec![
        k0.clone(),
        k1.clone(),
        k1.clone(),
        k0.clone(),
        k0.clone(),
        k0.clone(),
        k0,
        k1,
    ]
}

/// Phase-covariant machine with a qubit ancilla,
/// `U|00R⟩ = a|00⟩|0⟩ + b(|01⟩+|10⟩)|1⟩`, `U|10R⟩ = f(|01⟩+|10⟩)|0⟩ + h|11⟩|1⟩`,
/// with `|a| = a_mod`, `|a| = √2|f|`, `|h| = √2|b|` and `2|b|² + 2|f|² = 1`.
pub fn ancilla_pqcm(a_mod: f64) -> Result<AncillaCloner> {
    if !(0.0..=1.0).contains(&a_mod) {
        return Err(Error::OutOfRange {
            name: "a_mod",
            value: a_mod,
            allowed: "[0, 1]",
        });
    }
    let a = a_mod;
    let f = a_mod * FRAC_1_SQRT_2;
    let h = (1.0 - a_mod * a_mod).max(0.0).sqrt();
    let b = h * FRAC_1_SQRT_2;
    let z = 0.0;
    let coefficients = [a, b, b, z, z, f, f, h].map(real);
    AncillaCloner::new(coefficients, qubit_ancilla_kets())
}

/// Universal 1→2 machine: `|a| = |h| = √(2/3)`, `|b| = |f| = √(1/6)`.
pub fn uqcm() -> AncillaCloner {
    let big = (2.0f64 / 3.0).sqrt();
    let small = (1.0f64 / 6.0).sqrt();
    let coefficients = [big, small, small, 0.0, 0.0, small, small, big].map(real);
    AncillaCloner::new(coefficients, qubit_ancilla_kets()).expect("unit kets")
}

/// Economic 1→n machine on the symmetric subspace,
/// `|0⟩ → Σ a_i|i⟩⟩`, `|1⟩ → Σ b_i|i⟩⟩`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSymmetric")]
pub struct SymmetricNCloner {
    n: usize,
    a: Vec<C64>,
    b: Vec<C64>,
}

#[derive(Deserialize)]
struct RawSymmetric {
    n: usize,
    a: Vec<C64>,
    b: Vec<C64>,
}

impl TryFrom<RawSymmetric> for SymmetricNCloner {
    type Error = Error;
    fn try_from(r: RawSymmetric) -> Result<Self> {
        let c = SymmetricNCloner::new(r.a, r.b)?;
        if c.n != r.n {
            return Err(Error::Shape(format!(
                "n = {} but {} coefficients",
                r.n,
                c.n + 1
            )));
        }
        Ok(c)
    }
}

impl SymmetricNCloner {
    pub fn new(a: Vec<C64>, b: Vec<C64>) -> Result<Self> {
        if a.len() != b.len() {
            return Err(Error::Shape(format!(
                "{} a-coefficients vs {} b-coefficients",
                a.len(),
                b.len()
            )));
        }
        let n = a.len().saturating_sub(1);
        if n == 0 || n > MAX_SYM_QUBITS {
            return Err(Error::OutOfRange {
                name: "n",
                value: n as f64,
                allowed: "1..=10",
            });
        }
        Ok(Self { n, a, b })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn a(&self) -> &[C64] {
        &self.a
    }

    pub fn b(&self) -> &[C64] {
        &self.b
    }
}

impl Cloner for SymmetricNCloner {
    fn constraint_check(&self) -> ConstraintReport {
        let na: f64 = self.a.iter().map(|z| z.norm_sqr()).sum();
        let nb: f64 = self.b.iter().map(|z| z.norm_sqr()).sum();
        let ov: C64 = self.a.iter().zip(&self.b).map(|(x, y)| x * y.conj()).sum();
        ConstraintReport::from_parts(na - 1.0, nb - 1.0, ov.norm())
    }

    fn to_isometry(&self) -> Result<CloneIsometry> {
        self.constraint_check().require()?;
        let basis = sym_basis(self.n)?;
        let dim = 1usize << self.n;
        let mut c0 = ComplexVector::zeros(dim);
        let mut c1 = ComplexVector::zeros(dim);
        for (i, e) in basis.iter().enumerate() {
            for k in 0..dim {
                c0[k] += self.a[i] * e[k];
                c1[k] += self.b[i] * e[k];
            }
        }
        CloneIsometry::from_columns(&c0, &c1, self.n, 1)
    }
}

/// Optimal symmetric 1→n phase-covariant machine: `a_{⌊n/2⌋} = 1` (n even)
/// or `a_{(n−1)/2} = 1` (n odd), with `b` one step higher.
pub fn optimal_n_cloner(n: usize) -> Result<SymmetricNCloner> {
    if n == 0 || n > MAX_SYM_QUBITS {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            allowed: "1..=10",
        });
    }
    let low = if n.is_multiple_of(2) {
        n / 2
    } else {
        (n - 1) / 2
    };
    let mut a = vec![real(0.0); n + 1];
    let mut b = vec![real(0.0); n + 1];
    a[low] = real(1.0);
    b[low + 1] = real(1.0);
    SymmetricNCloner::new(a, b)
}

/// Any machine representation, tagged by `kind` in JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Machine {
    Economic(EconomicCloner),
    Ancilla(AncillaCloner),
    SymmetricN(SymmetricNCloner),
    Isometry(CloneIsometry),
}

impl Machine {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("machines always serialize")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidMachine(e.to_string()))
    }
}

impl Cloner for Machine {
    fn constraint_check(&self) -> ConstraintReport {
        match self {
            Machine::Economic(c) => c.constraint_check(),
            Machine::Ancilla(c) => c.constraint_check(),
            Machine::SymmetricN(c) => c.constraint_check(),
            Machine::Isometry(c) => Cloner::constraint_check(c),
        }
    }

    fn to_isometry(&self) -> Result<CloneIsometry> {
        match self {
            Machine::Economic(c) => c.to_isometry(),
            Machine::Ancilla(c) => c.to_isometry(),
            Machine::SymmetricN(c) => c.to_isometry(),
            Machine::Isometry(c) => Ok(c.clone()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlinalg::{c64, partial_trace};

    fn permute_qubits(v: &ComplexVector, n: usize, i: usize, j: usize) -> ComplexVector {
        let mut out = ComplexVector::zeros(v.dim());
        let (bi, bj) = (n - 1 - i, n - 1 - j);
        for k in 0..v.dim() {
            let xi = (k >> bi) & 1;
            let xj = (k >> bj) & 1;
            let mut m = k & !(1 << bi) & !(1 << bj);
            m |= xj << bi;
            m |= xi << bj;
            out[m] = v[k];
        }
        out
    }

    #[test]
    fn pqcm_constraints_and_columns() {
        let r = economic_pqcm().constraint_check();
        assert!(r.pass && r.max_residual() < 1e-15);
        let v = economic_pqcm().to_isometry().unwrap();
        assert_eq!(v.column(0), ComplexVector::from_real(&[1.0, 0.0, 0.0, 0.0]));
        let s = FRAC_1_SQRT_2;
        assert!(
            v.column(1)
                .max_abs_diff(&ComplexVector::from_real(&[0.0, s, s, 0.0]))
                < 1e-16
        );
    }

    #[test]
    fn parallel_columns_fail() {
        let mut coeffs = [real(0.0); 8];
        coeffs[0] = real(1.0);
        coeffs[4] = real(1.0);
        let c = EconomicCloner::new(coeffs);
        let r = c.constraint_check();
        assert!(!r.pass);
        assert!((r.overlap - 1.0).abs() < 1e-15);
        assert!(matches!(c.to_isometry(), Err(Error::InvalidMachine(_))));
    }

    #[test]
    fn apply_examples() {
        let v = economic_pqcm().to_isometry().unwrap();
        let rho = v.apply(&ComplexVector::basis(2, 0)).unwrap();
        let mut expected = ComplexMatrix::zeros(4, 4);
        expected[(0, 0)] = real(1.0);
        assert!(rho.max_abs_diff(&expected) < 1e-15);

        let plus = ComplexVector::from_real(&[FRAC_1_SQRT_2, FRAC_1_SQRT_2]);
        let out = v.output_state(&plus).unwrap();
        let expected = ComplexVector::from_real(&[FRAC_1_SQRT_2, 0.5, 0.5, 0.0]);
        assert!(out.max_abs_diff(&expected) < 1e-15);

        assert!(v.apply(&ComplexVector::basis(4, 0)).is_err());
        assert!(v.apply(&ComplexVector::from_real(&[1.0, 1.0])).is_err());
    }

    #[test]
    fn ancilla_pqcm_family() {
        let m = ancilla_pqcm(FRAC_1_SQRT_2).unwrap();
        let [a, b, c, d, e, f, g, h] = m.coefficients;
        assert!((a.re - FRAC_1_SQRT_2).abs() < 1e-15 && (h.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert!((b.re - 0.5).abs() < 1e-15 && (f.re - 0.5).abs() < 1e-15);
        assert_eq!((b, f), (c, g));
        assert_eq!((d, e), (real(0.0), real(0.0)));

        for k in 0..=20 {
            let amod = k as f64 / 20.0;
            let m = ancilla_pqcm(amod).unwrap();
            let [a, b, _, _, _, f, _, h] = m.coefficients;
            assert!((a.norm() - 2f64.sqrt() * f.norm()).abs() < 1e-15);
            assert!((h.norm() - 2f64.sqrt() * b.norm()).abs() < 1e-15);
            assert!(m.constraint_check().pass, "a_mod={amod}");
            assert!(m.to_isometry().is_ok());
        }
        assert!(ancilla_pqcm(-0.01).is_err());
        assert!(ancilla_pqcm(1.01).is_err());
    }

    #[test]
    fn ancilla_pqcm_at_one_is_economic_times_ancilla() {
        let v = ancilla_pqcm(1.0).unwrap().to_isometry().unwrap();
        let e = economic_pqcm().to_isometry().unwrap();
        let k0 = ComplexVector::basis(2, 0);
        for j in 0..2 {
            let expected = crate::qlinalg::tensor(&e.column(j), &k0);
            assert!(v.column(j).max_abs_diff(&expected) < 1e-15);
        }
    }

    #[test]
    fn uqcm_shape() {
        let v = uqcm().to_isometry().unwrap();
        assert_eq!((v.dim(), v.copies(), v.ancilla_dim()), (8, 2, 2));
        assert!((v.column(0).norm() - 1.0).abs() < 1e-12);
        assert!((v.column(1).norm() - 1.0).abs() < 1e-12);
        let [_, b, c, _, _, f, g, _] = uqcm().coefficients;
        assert_eq!((b, f), (c, g));
    }

    #[test]
    fn optimal_n_patterns() {
        let m2 = optimal_n_cloner(2).unwrap();
        assert_eq!((m2.a()[1], m2.b()[2]), (real(1.0), real(1.0)));
        let m3 = optimal_n_cloner(3).unwrap();
        assert_eq!((m3.a()[1], m3.b()[2]), (real(1.0), real(1.0)));
        let m4 = optimal_n_cloner(4).unwrap();
        assert_eq!((m4.a()[2], m4.b()[3]), (real(1.0), real(1.0)));
        assert_eq!(m4.a().iter().filter(|z| z.norm() > 0.0).count(), 1);
        assert!(optimal_n_cloner(0).is_err());
        assert!(optimal_n_cloner(11).is_err());
        assert!(optimal_n_cloner(5).unwrap().constraint_check().pass);
    }

    #[test]
    fn optimal_two_copy_isometry_is_dicke_pair() {
        let v = optimal_n_cloner(2).unwrap().to_isometry().unwrap();
        let basis = sym_basis(2).unwrap();
        assert!(v.column(0).max_abs_diff(&basis[1]) < 1e-15);
        assert!(v.column(1).max_abs_diff(&basis[2]) < 1e-15);
    }

    #[test]
    fn symmetric_images_are_permutation_invariant() {
        let a: Vec<C64> = (0..=5)
            .map(|i| c64(0.3 + 0.1 * i as f64, 0.05 * i as f64))
            .collect();
        let b: Vec<C64> = (0..=5).map(|i| c64(0.2 - 0.03 * i as f64, 0.1)).collect();
        // Gram-Schmidt the coefficient pair so the machine is valid
        let basis =
            ComplexMatrix::from_columns(&[ComplexVector::new(a), ComplexVector::new(b)]).unwrap();
        let q = crate::qlinalg::orthonormalize(&basis).unwrap();
        let sym =
            SymmetricNCloner::new(q.column(0).into_entries(), q.column(1).into_entries()).unwrap();
        let v = sym.to_isometry().unwrap();
        for col in [v.column(0), v.column(1)] {
            for i in 0..5 {
                for j in (i + 1)..5 {
                    assert!(permute_qubits(&col, 5, i, j).max_abs_diff(&col) < 1e-12);
                }
            }
        }
    }

    #[test]
    fn symmetric_round_trip_through_isometry() {
        let m = optimal_n_cloner(4).unwrap();
        let back = m.to_isometry().unwrap().to_symmetric_n().unwrap();
        for (x, y) in m.a().iter().zip(back.a()) {
            assert!((x - y).norm() < 1e-15);
        }
        assert!(uqcm().to_isometry().unwrap().to_symmetric_n().is_err());
    }

    #[test]
    fn ancilla_isometry_round_trip() {
        for c in [uqcm(), ancilla_pqcm(0.6).unwrap()] {
            let v = c.to_isometry().unwrap();
            let back = AncillaCloner::from_isometry(&v)
                .unwrap()
                .to_isometry()
                .unwrap();
            assert!(back.matrix().max_abs_diff(v.matrix()) < 1e-15);
        }
        let v = optimal_n_cloner(3).unwrap().to_isometry().unwrap();
        assert!(AncillaCloner::from_isometry(&v).is_err());
    }

    #[test]
    fn swap_copies_exchanges_marginals() {
        let m = AncillaCloner::new(
            [0.6, 0.0, 0.8, 0.0, 0.0, 1.0, 0.0, 0.0].map(real),
            vec![ComplexVector::basis(1, 0); 8],
        )
        .unwrap();
        let psi = ComplexVector::from_real(&[0.6, 0.8]);
        let v = m.to_isometry().unwrap();
        let w = m.swap_copies().to_isometry().unwrap();
        let ra = partial_trace(&v.apply(&psi).unwrap(), &v.factor_dims(), &[0]).unwrap();
        let rb = partial_trace(&w.apply(&psi).unwrap(), &w.factor_dims(), &[1]).unwrap();
        assert!(ra.max_abs_diff(&rb) < 1e-15);
    }

    #[test]
    fn isometry_validation() {
        let bad = ComplexMatrix::zeros(4, 2);
        assert!(CloneIsometry::new(bad, 2, 1).is_err());
        assert!(CloneIsometry::new(ComplexMatrix::identity(2), 2, 1).is_err());
    }

    #[test]
    fn machine_json_round_trip() {
        let machines = vec![
            Machine::Economic(economic_pqcm()),
            Machine::Ancilla(uqcm()),
            Machine::SymmetricN(optimal_n_cloner(3).unwrap()),
            Machine::Isometry(uqcm().to_isometry().unwrap()),
        ];
        for m in machines {
            let text = m.to_json();
            let back = Machine::from_json(&text).unwrap();
            assert_eq!(back, m);
            let v: serde_json::Value = serde_json::from_str(&text).unwrap();
            assert!(v["kind"].is_string());
        }
        assert!(Machine::from_json(r#"{"kind":"warp"}"#).is_err());
    }
}
