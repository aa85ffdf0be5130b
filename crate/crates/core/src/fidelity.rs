//! Single-copy fidelities and their Fourier decomposition in the input phase.
//!
//! For a fixed-latitude input `cos(θ/2)|0⟩ + sin(θ/2)e^{iφ}|1⟩`, the copy
//! fidelity of any 1→2 machine is a trigonometric polynomial in φ of degree
//! two:
//!
//! ```text
//! F(φ) = λ₁ cos(2φ + ψ₁) + λ₂ cos(φ + ψ₂) + λ₃
//! ```
//!
//! [`decompose_equatorial`] and [`decompose_cone`] compute `(λ, ψ)` directly
//! from the machine coefficients; [`copy_fidelity`] evaluates the reduced
//! density matrix and is the reference both are tested against.

use std::borrow::Cow;
use std::f64::consts::TAU;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::cloners::{AncillaCloner, CloneIsometry, Cloner, EconomicCloner, SymmetricNCloner};
use crate::error::{Error, Result};
use crate::qlinalg::{
    binomial, outer, partial_trace, pure_marginal, sym_basis, ComplexVector, C64,
};
use crate::states::BlochPoint;

/// Below this modulus a λ's phase is treated as undefined.
pub const PHASE_FLOOR: f64 = 1e-12;

/// Largest `n` for the brute-force 1→n oracle.
pub const MAX_BRUTEFORCE_COPIES: usize = 6;

/// `F = ⟨ψ|ρ_copy|ψ⟩` for the input `p`.
pub fn copy_fidelity(v: &CloneIsometry, p: &BlochPoint, copy: usize) -> Result<f64> {
    copy_fidelity_state(v, &p.to_state(), copy)
}

pub fn copy_fidelity_state(v: &CloneIsometry, psi: &ComplexVector, copy: usize) -> Result<f64> {
    if copy >= v.copies() {
        return Err(Error::Index {
            index: copy,
            limit: v.copies(),
        });
    }
    let out = v.output_state(psi)?;
    let rho = pure_marginal(out.entries(), &v.factor_dims(), copy)?;
    Ok(rho.expectation(psi)?.re)
}

/// All copy fidelities for one input, copy-major.
pub fn all_copy_fidelities(v: &CloneIsometry, p: &BlochPoint) -> Vec<f64> {
    (0..v.copies())
        .map(|k| copy_fidelity(v, p, k).expect("copy index in range"))
        .collect()
}

/// `F(φ) = λ₁cos(2φ+ψ₁) + λ₂cos(φ+ψ₂) + λ₃`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityDecomposition {
    pub lambda1: f64,
    pub lambda2: f64,
    pub lambda3: f64,
    pub psi1: f64,
    pub psi2: f64,
    pub psi1_defined: bool,
    pub psi2_defined: bool,
}

fn phase_of(z: C64) -> (f64, bool) {
    if z.norm() < PHASE_FLOOR {
        (0.0, false)
    } else {
        let mut a = z.arg().rem_euclid(TAU);
        if a >= TAU {
            a = 0.0;
        }
        (a, true)
    }
}

impl FidelityDecomposition {
    /// Builds the record from the complex amplitudes of the `e^{2iφ}` and
    /// `e^{iφ}` harmonics, `F = Re(z₁e^{2iφ}) + Re(z₂e^{iφ}) + λ₃`.
    pub fn from_harmonics(z1: C64, z2: C64, lambda3: f64) -> Self {
        let (psi1, psi1_defined) = phase_of(z1);
        let (psi2, psi2_defined) = phase_of(z2);
        Self {
            lambda1: z1.norm(),
            lambda2: z2.norm(),
            lambda3,
            psi1,
            psi2,
            psi1_defined,
            psi2_defined,
        }
    }

    pub fn evaluate(&self, phi: f64) -> f64 {
        self.lambda1 * (2.0 * phi + self.psi1).cos()
            + self.lambda2 * (phi + self.psi2).cos()
            + self.lambda3
    }

    fn z1(&self) -> C64 {
        C64::from_polar(self.lambda1, self.psi1)
    }

    fn z2(&self) -> C64 {
        C64::from_polar(self.lambda2, self.psi2)
    }
}

/// Two-copy machines that can be read as the general ancilla form.
pub trait TwoCopyMachine {
    fn as_ancilla(&self) -> Cow<'_, AncillaCloner>;
}

impl TwoCopyMachine for AncillaCloner {
    fn as_ancilla(&self) -> Cow<'_, AncillaCloner> {
        Cow::Borrowed(self)
    }
}

impl TwoCopyMachine for EconomicCloner {
    fn as_ancilla(&self) -> Cow<'_, AncillaCloner> {
        Cow::Owned(AncillaCloner::from_economic(self))
    }
}

const A: usize = 0;
const B: usize = 1;
const C: usize = 2;
const D: usize = 3;
const E: usize = 4;
const F: usize = 5;
const G: usize = 6;
const H: usize = 7;

/// Coefficient accessor that folds in the ancilla overlaps:
/// `t(x, y)` is `x·y*·⟨Y|X⟩`.
struct Terms<'a> {
    m: &'a AncillaCloner,
}

impl Terms<'_> {
    fn t(&self, x: usize, y: usize) -> C64 {
        let k = &self.m.coefficients;
        k[x] * k[y].conj() * self.m.overlap(y, x)
    }

    fn sq(&self, x: usize) -> f64 {
        self.m.coefficients[x].norm_sqr()
    }
}

fn prepare(c: &impl TwoCopyMachine, copy: usize) -> Result<AncillaCloner> {
    let m = c.as_ancilla().into_owned();
    let report = m.constraint_check();
    if !report.pass {
        return Err(Error::InvalidMachine(format!(
            "constraint residual {:e}",
            report.max_residual()
        )));
    }
    match copy {
        0 => Ok(m),
        // copy B: exchange the two copy registers (b↔c, f↔g with their kets)
        1 => Ok(m.swap_copies()),
        _ => Err(Error::Index {
            index: copy,
            limit: 2,
        }),
    }
}

/// λ/ψ record for equatorial inputs `(|0⟩ + e^{iφ}|1⟩)/√2`.
pub fn decompose_equatorial(c: &impl TwoCopyMachine, copy: usize) -> Result<FidelityDecomposition> {
    let m = prepare(c, copy)?;
    let t = Terms { m: &m };
    let z1 = 0.5 * (t.t(E, C) + t.t(F, D));
    let z2 = 0.5 * (t.t(A, C) + t.t(E, G) + t.t(B, D) + t.t(F, H));
    let lambda3 = 0.5 + 0.5 * (t.t(A, G) + t.t(B, H)).re;
    Ok(FidelityDecomposition::from_harmonics(z1, z2, lambda3))
}

/// λ/ψ record for inputs on the circle of polar angle `theta`.
pub fn decompose_cone(
    c: &impl TwoCopyMachine,
    theta: f64,
    copy: usize,
) -> Result<FidelityDecomposition> {
    if !(theta > 0.0 && theta < std::f64::consts::PI) {
        return Err(Error::OutOfRange {
            name: "theta",
            value: theta,
            allowed: "(0, pi)",
        });
    }
    let m = prepare(c, copy)?;
    let t = Terms { m: &m };
    let (s, co) = (theta / 2.0).sin_cos();
    let (s2, c2) = (s * s, co * co);

    let z1 = 2.0 * c2 * s2 * (t.t(E, C) + t.t(F, D));
    let z2 = 2.0 * c2 * co * s * (t.t(E, A) + t.t(F, B) + t.t(A, C) + t.t(B, D))
        + 2.0 * co * s2 * s * (t.t(G, C) + t.t(H, D) + t.t(E, G) + t.t(F, H));
    let lambda3 = c2 * c2 * (t.sq(A) + t.sq(B))
        + s2 * s2 * (t.sq(G) + t.sq(H))
        + c2 * s2 * (t.sq(E) + t.sq(F) + t.sq(C) + t.sq(D))
        + 2.0 * c2 * s2 * (t.t(A, G) + t.t(B, H)).re;
    Ok(FidelityDecomposition::from_harmonics(z1, z2, lambda3))
}

/// Fidelity of a copy-symmetric machine (`b = c`, `f = g`, `|B⟩ = |C⟩`,
/// `|F⟩ = |G⟩`) at the tetrahedron latitude `cos²(θ/2) = 1/3`, with the
/// cross term taken at its most favourable phase:
///
/// `4/9 − (|a|²+|b|²)/9 + 2(|f|²+|h|²)/9 + 4|af*⟨F|A⟩ + bh*⟨H|B⟩|/9`.
///
/// It equals `decompose_cone(..).lambda3` whenever that cross term is real
/// and nonnegative, and bounds it from above otherwise.
pub fn tetrahedron_symmetric_fidelity(c: &AncillaCloner) -> f64 {
    let t = Terms { m: c };
    4.0 / 9.0 - (t.sq(A) + t.sq(B)) / 9.0
        + 2.0 * (t.sq(F) + t.sq(H)) / 9.0
        + 4.0 * (t.t(A, F) + t.t(B, H)).norm() / 9.0
}

/// Residuals of the equal-fidelity conditions.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovarianceReport {
    /// `max |F(φ_i) − F(φ_j)|`
    pub pairwise: f64,
    /// `(λ₁sinψ₁ − λ₂sinψ₂, λ₁cosψ₁ + λ₂cosψ₂)`, only for φ = {0, 2π/3, 4π/3}.
    pub trio: Option<[f64; 2]>,
}

fn is_exact_trio(phis: &[f64]) -> bool {
    if phis.len() != 3 {
        return false;
    }
    let mut r: Vec<f64> = phis.iter().map(|p| p.rem_euclid(TAU)).collect();
    r.sort_by(f64::total_cmp);
    let near = |x: f64, y: f64| {
        let d = (x - y).rem_euclid(TAU);
        d.min(TAU - d) < 1e-12
    };
    // 0 may have wrapped to just below 2π
    let mut hits = [false; 3];
    for &x in &r {
        for (k, hit) in hits.iter_mut().enumerate() {
            if near(x, k as f64 * TAU / 3.0) {
                *hit = true;
            }
        }
    }
    hits.iter().all(|&h| h)
}

pub fn covariance_residual(d: &FidelityDecomposition, phis: &[f64]) -> Result<CovarianceReport> {
    if phis.is_empty() {
        return Err(Error::InvalidSet("no phases".into()));
    }
    let values: Vec<f64> = phis.iter().map(|&p| d.evaluate(p)).collect();
    let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let trio = is_exact_trio(phis).then(|| {
        let (z1, z2) = (d.z1(), d.z2());
        [z1.im - z2.im, z1.re + z2.re]
    });
    Ok(CovarianceReport {
        pairwise: hi - lo,
        trio,
    })
}

/// `C(n−1,i)/√(C(n,i)·C(n,i+1))`, the overlap weight between neighbouring
/// Dicke states after tracing out all but one qubit.
pub fn dicke_neighbour_weight(n: usize, i: usize) -> f64 {
    let (n, i) = (n as u64, i as u64);
    binomial(n - 1, i) as f64 / ((binomial(n, i) as f64) * (binomial(n, i + 1) as f64)).sqrt()
}

/// Closed form of the same weight, `√((n−i)(i+1))/n`.
pub fn dicke_neighbour_weight_closed(n: usize, i: usize) -> f64 {
    (((n - i) * (i + 1)) as f64).sqrt() / n as f64
}

/// Single-copy fidelity of a symmetric 1→n machine on the equatorial input
/// at phase `phi`, from the coefficients alone.
pub fn n_clone_fidelity(c: &SymmetricNCloner, phi: f64) -> f64 {
    let (a, b, n) = (c.a(), c.b(), c.n());
    let w1 = C64::from_polar(1.0, phi);
    let w2 = C64::from_polar(1.0, 2.0 * phi);
    let sum: C64 = (0..n)
        .map(|i| {
            let term = a[i] * a[i + 1].conj() * w1
                + b[i] * b[i + 1].conj() * w1
                + a[i] * b[i + 1].conj()
                + a[i + 1].conj() * b[i] * w2;
            term * dicke_neighbour_weight_closed(n, i)
        })
        .sum();
    0.5 + 0.5 * sum.re
}

/// Reference for [`n_clone_fidelity`]: expands the output over the full
/// `2ⁿ`-dimensional space, traces out all qubits but the first and takes
/// the overlap with the input.
pub fn n_clone_fidelity_bruteforce(c: &SymmetricNCloner, phi: f64) -> Result<f64> {
    let n = c.n();
    if n > MAX_BRUTEFORCE_COPIES {
        return Err(Error::OutOfRange {
            name: "n",
            value: n as f64,
            allowed: "1..=6 for the brute-force oracle",
        });
    }
    let basis = sym_basis(n)?;
    let eip = C64::from_polar(1.0, phi);
    let mut out = ComplexVector::zeros(1 << n);
    for (i, e) in basis.iter().enumerate() {
        let amp = (c.a()[i] + eip * c.b()[i]) * std::f64::consts::FRAC_1_SQRT_2;
        for k in 0..out.dim() {
            out[k] += amp * e[k];
        }
    }
    let out = out.normalized()?;
    let rho = outer(&out)?;
    let rho1 = partial_trace(&rho, &vec![2; n], &[0])?;
    let psi = BlochPoint::equatorial(phi).to_state();
    Ok(rho1.expectation(&psi)?.re)
}

/// Which known optimal fidelity to report.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    /// Phase-covariant 1→2: `1/2 + √2/4`.
    Phase1To2,
    /// Universal 1→2: `5/6`.
    Universal1To2,
    /// Phase-covariant economic 1→n.
    Phase1ToN,
}

impl FromStr for BoundKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "phase_1to2" => Ok(Self::Phase1To2),
            "universal_1to2" => Ok(Self::Universal1To2),
            "phase_1ton" => Ok(Self::Phase1ToN),
            other => Err(Error::Unknown {
                what: "bound kind",
                name: other.to_string(),
            }),
        }
    }
}

pub fn phase_covariant_fidelity() -> f64 {
    0.5 + 2f64.sqrt() / 4.0
}

pub fn universal_fidelity() -> f64 {
    5.0 / 6.0
}

/// Known optimal fidelity. `n` is only read for [`BoundKind::Phase1ToN`].
pub fn closed_form_bound(kind: BoundKind, n: usize) -> Result<f64> {
    match kind {
        BoundKind::Phase1To2 => Ok(phase_covariant_fidelity()),
        BoundKind::Universal1To2 => Ok(universal_fidelity()),
        BoundKind::Phase1ToN => {
            if n == 0 {
                return Err(Error::OutOfRange {
                    name: "n",
                    value: 0.0,
                    allowed: ">= 1",
                });
            }
            let nf = n as f64;
            Ok(if n.is_multiple_of(2) {
                0.5 + (nf * (nf + 2.0)).sqrt() / (4.0 * nf)
            } else {
                0.5 + (nf + 1.0) / (4.0 * nf)
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cloners::{ancilla_pqcm, economic_pqcm, optimal_n_cloner, uqcm};
    use crate::qlinalg::{c64, real};
    use crate::states::tetrahedron_theta;
    use std::f64::consts::{FRAC_PI_2, PI};

    const FP: f64 = 0.853_553_390_593_273_8;

    #[test]
    fn known_machine_fidelities() {
        let v = economic_pqcm().to_isometry().unwrap();
        for copy in 0..2 {
            let f = copy_fidelity(&v, &BlochPoint::equatorial(1.234), copy).unwrap();
            assert!((f - 0.853_553_390_6).abs() < 1e-10);
        }
        assert!((copy_fidelity(&v, &BlochPoint::north(), 0).unwrap() - 1.0).abs() < 1e-15);
        assert!(copy_fidelity(&v, &BlochPoint::north(), 2).is_err());

        let u = uqcm().to_isometry().unwrap();
        let p = BlochPoint::new(0.7, 2.1).unwrap();
        for copy in 0..2 {
            assert!((copy_fidelity(&u, &p, copy).unwrap() - 5.0 / 6.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_like_machine() {
        // V|x⟩ = |x⟩ ⊗ |0⟩
        let v = CloneIsometry::from_columns(
            &ComplexVector::basis(4, 0),
            &ComplexVector::basis(4, 2),
            2,
            1,
        )
        .unwrap();
        assert!((copy_fidelity(&v, &BlochPoint::north(), 0).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn pqcm_decomposition_is_flat() {
        let d = decompose_equatorial(&economic_pqcm(), 0).unwrap();
        assert!(d.lambda1 < 1e-15 && d.lambda2 < 1e-15);
        assert!((d.lambda3 - FP).abs() < 1e-15);
        assert!(!d.psi1_defined && !d.psi2_defined);
        assert_eq!((d.psi1, d.psi2), (0.0, 0.0));
    }

    #[test]
    fn non_covariant_machine_has_second_harmonic() {
        // U|00⟩ = (|01⟩ + |10⟩)/√2, U|10⟩ = (|00⟩ + |11⟩)/√2: e = c = 1/√2
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let m = EconomicCloner::new([0.0, s, s, 0.0, s, 0.0, 0.0, s].map(real));
        assert!(m.constraint_check().pass);
        let d = decompose_equatorial(&m, 0).unwrap();
        assert!((d.lambda1 - 0.25).abs() < 1e-15);
    }

    #[test]
    fn uqcm_equator_and_cone_are_flat() {
        let d = decompose_equatorial(&uqcm(), 0).unwrap();
        assert!(d.lambda1 < 1e-15 && d.lambda2 < 1e-15);
        assert!((d.lambda3 - 5.0 / 6.0).abs() < 1e-15);

        let d = decompose_cone(&uqcm(), tetrahedron_theta(), 0).unwrap();
        assert!(d.lambda1 < 1e-15 && d.lambda2 < 1e-15);
        assert!((d.lambda3 - 5.0 / 6.0).abs() < 1e-15);
        assert!((tetrahedron_symmetric_fidelity(&uqcm()) - d.lambda3).abs() < 1e-15);
    }

    #[test]
    fn cone_at_equator_matches_equatorial_formulas() {
        for m in [
            ancilla_pqcm(0.3).unwrap(),
            uqcm(),
            AncillaCloner::from_economic(&economic_pqcm()),
        ] {
            for copy in 0..2 {
                let a = decompose_equatorial(&m, copy).unwrap();
                let b = decompose_cone(&m, FRAC_PI_2, copy).unwrap();
                assert!((a.lambda1 - b.lambda1).abs() < 1e-12);
                assert!((a.lambda2 - b.lambda2).abs() < 1e-12);
                assert!((a.lambda3 - b.lambda3).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn cone_rejects_poles_and_invalid_machines() {
        assert!(decompose_cone(&uqcm(), 0.0, 0).is_err());
        assert!(decompose_cone(&uqcm(), PI, 0).is_err());
        assert!(decompose_cone(&uqcm(), 1.0, 2).is_err());
        let bad = EconomicCloner::new([real(1.0); 8]);
        assert!(matches!(
            decompose_equatorial(&bad, 0),
            Err(Error::InvalidMachine(_))
        ));
    }

    #[test]
    fn covariance_examples() {
        let trio = [0.0, TAU / 3.0, 2.0 * TAU / 3.0];
        let d = decompose_equatorial(&economic_pqcm(), 0).unwrap();
        let r = covariance_residual(&d, &trio).unwrap();
        assert!(r.pairwise < 1e-15);
        let [s, c] = r.trio.unwrap();
        assert!(s.abs() < 1e-15 && c.abs() < 1e-15);

        let d = FidelityDecomposition::from_harmonics(
            C64::from_polar(0.1, 0.0),
            C64::from_polar(0.1, PI),
            0.8,
        );
        let r = covariance_residual(&d, &trio).unwrap();
        assert!(r.pairwise < 1e-15);
        let [s, c] = r.trio.unwrap();
        assert!(s.abs() < 1e-15 && c.abs() < 1e-15);
        // equal on the trio yet φ-dependent in between
        assert!((d.evaluate(PI / 6.0) - d.evaluate(0.0)).abs() > 0.03);

        let d = FidelityDecomposition::from_harmonics(c64(0.03, -0.07), c64(0.11, 0.02), 0.7);
        let r = covariance_residual(&d, &trio).unwrap();
        assert!(r.pairwise > 1e-3);

        assert!(covariance_residual(&d, &[0.0, 1.0, 2.0])
            .unwrap()
            .trio
            .is_none());
        assert!(covariance_residual(&d, &[]).is_err());
    }

    #[test]
    fn n_clone_examples() {
        let m2 = optimal_n_cloner(2).unwrap();
        for phi in [0.0, 0.4, 2.9] {
            assert!((n_clone_fidelity(&m2, phi) - FP).abs() < 1e-15);
        }
        let m6 = optimal_n_cloner(6).unwrap();
        assert!((n_clone_fidelity(&m6, 1.1) - (0.5 + 3f64.sqrt() / 6.0)).abs() < 1e-15);

        let id = optimal_n_cloner(1).unwrap();
        for phi in [0.0, 1.0, 4.0] {
            assert!((n_clone_fidelity_bruteforce(&id, phi).unwrap() - 1.0).abs() < 1e-15);
        }
        assert!((n_clone_fidelity_bruteforce(&m2, 0.0).unwrap() - FP).abs() < 1e-15);
        let m3 = optimal_n_cloner(3).unwrap();
        assert!((n_clone_fidelity_bruteforce(&m3, 0.7).unwrap() - 5.0 / 6.0).abs() < 1e-15);
        assert!(n_clone_fidelity_bruteforce(&optimal_n_cloner(7).unwrap(), 0.0).is_err());
    }

    #[test]
    fn bounds() {
        let b = |k, n| closed_form_bound(k, n).unwrap();
        assert!((b(BoundKind::Phase1To2, 0) - 0.853_553_390_593).abs() < 1e-12);
        assert!((b(BoundKind::Universal1To2, 0) - 0.833_333_333_333).abs() < 1e-12);
        assert!((b(BoundKind::Phase1ToN, 2) - FP).abs() < 1e-15);
        assert!((b(BoundKind::Phase1ToN, 3) - 5.0 / 6.0).abs() < 1e-15);
        assert!((b(BoundKind::Phase1ToN, 4) - (0.5 + 24f64.sqrt() / 16.0)).abs() < 1e-15);
        assert!((b(BoundKind::Phase1ToN, 5) - 0.8).abs() < 1e-15);
        assert!((b(BoundKind::Phase1ToN, 10_000) - 0.75).abs() < 1e-4);
        assert!((b(BoundKind::Phase1ToN, 10_001) - 0.75).abs() < 1e-4);
        assert!(closed_form_bound(BoundKind::Phase1ToN, 0).is_err());
        for n in 2..10 {
            assert!(b(BoundKind::Phase1ToN, n + 1) < b(BoundKind::Phase1ToN, n));
            assert!(b(BoundKind::Phase1ToN, n) > 0.75);
        }
        assert_eq!(
            "phase_1ton".parse::<BoundKind>().unwrap(),
            BoundKind::Phase1ToN
        );
        assert!("qudit".parse::<BoundKind>().is_err());
    }

    #[test]
    fn dicke_weight_identity() {
        for n in 1..=60 {
            for i in 0..n {
                let a = dicke_neighbour_weight(n, i);
                let b = dicke_neighbour_weight_closed(n, i);
                assert!((a - b).abs() < 1e-14, "n={n} i={i}");
            }
        }
    }
}
