//! Channel representations — operator-sum (Kraus) and affine Bloch form —
//! with validity checks and constructors for the named damping channels:
//! standard amplitude damping, generalized amplitude damping (GAD), and
//! phase damping.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qmath::{
    density_to_bloch, hermitian_eigenvalues, paulis, BlochVector, ComplexMatrix, RealMatrix3,
};
use crate::tolerances;

/// A qubit channel as a list of 2×2 operation elements: `ρ → Σᵢ Eᵢ ρ Eᵢ†`.
#[derive(Clone, Debug, PartialEq)]
pub struct KrausChannel {
    elements: Vec<ComplexMatrix>,
}

impl KrausChannel {
    /// Wrap operation elements; all must be 2×2 and there must be at least
    /// one. Trace preservation is NOT enforced here — query it with
    /// [`KrausChannel::is_trace_preserving`].
    pub fn new(elements: Vec<ComplexMatrix>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::Shape(
                "channel needs at least one operation element".into(),
            ));
        }
        if elements.iter().any(|e| e.rows() != 2 || e.cols() != 2) {
            return Err(Error::Shape("operation elements must be 2x2".into()));
        }
        Ok(Self { elements })
    }

    /// The identity channel `{𝟙}`.
    pub fn identity() -> Self {
        Self {
            elements: vec![ComplexMatrix::identity(2)],
        }
    }

    pub fn elements(&self) -> &[ComplexMatrix] {
        &self.elements
    }

    /// `Σᵢ Eᵢ ρ Eᵢ†` for a valid density matrix `ρ`.
    pub fn apply(&self, rho: &ComplexMatrix) -> Result<ComplexMatrix> {
        if !rho.is_density() {
            return Err(Error::Validation(
                "apply: input is not a density matrix".into(),
            ));
        }
        let mut out = ComplexMatrix::zeros(2, 2);
        for e in &self.elements {
            out = out.add(&e.mul(rho)?.mul(&e.adjoint())?)?;
        }
        Ok(out)
    }

    /// Convenience: apply to a Bloch vector, returning a Bloch vector.
    pub fn apply_bloch(&self, r: &BlochVector) -> Result<BlochVector> {
        if !r.is_physical() {
            return Err(Error::Validation(format!(
                "apply: Bloch vector norm {:.6} outside the unit ball",
                r.norm()
            )));
        }
        let rho = crate::qmath::bloch_to_density(r);
        density_to_bloch(&self.apply(&rho)?)
    }

    /// `‖Σᵢ Eᵢ†Eᵢ − 𝟙‖_max`.
    pub fn trace_defect(&self) -> f64 {
        let mut acc = ComplexMatrix::zeros(2, 2);
        for e in &self.elements {
            acc = acc.add(&e.adjoint().mul(e).unwrap()).unwrap();
        }
        acc.max_abs_diff(&ComplexMatrix::identity(2))
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_defect() < tolerances::TRACE_PRESERVING
    }

    /// The 4×4 Choi matrix `Σₖ (Eₖ ⊗ 𝟙)|Ω⟩⟨Ω|(Eₖ ⊗ 𝟙)†` with `|Ω⟩` the
    /// unnormalized maximally entangled vector. Since
    /// `(E ⊗ 𝟙)|Ω⟩ = Σⱼₖ E[j,k] |j⟩|k⟩`, each term is the outer product of
    /// the row-major flattening of `E`.
    pub fn choi(&self) -> ComplexMatrix {
        let mut out = ComplexMatrix::zeros(4, 4);
        for e in &self.elements {
            let w = [e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]];
            out = out.add(&ComplexMatrix::outer(&w)).unwrap();
        }
        out
    }

    /// Minimum eigenvalue of the Choi matrix; nonnegative up to numerical
    /// noise exactly when the channel is completely positive.
    pub fn choi_min_eigenvalue(&self) -> Result<f64> {
        let evs = hermitian_eigenvalues(&self.choi())?;
        Ok(evs[0])
    }

    pub fn is_completely_positive(&self) -> bool {
        matches!(self.choi_min_eigenvalue(), Ok(e) if e >= tolerances::PSD_FLOOR)
    }
}

/// A qubit channel in affine Bloch form: `r → m·r + c`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AffineChannel {
    pub m: RealMatrix3,
    pub c: BlochVector,
}

impl AffineChannel {
    pub fn new(m: RealMatrix3, c: BlochVector) -> Self {
        Self { m, c }
    }

    pub fn identity() -> Self {
        Self::new(RealMatrix3::identity(), BlochVector::zero())
    }

    /// `m·r + c` for a Bloch vector inside the unit ball.
    pub fn apply(&self, r: &BlochVector) -> Result<BlochVector> {
        if !r.is_physical() {
            return Err(Error::Validation(format!(
                "apply: Bloch vector norm {:.6} outside the unit ball",
                r.norm()
            )));
        }
        let v = self.m.mul_vec(r.as_array());
        Ok(BlochVector::new(
            v[0] + self.c.r1,
            v[1] + self.c.r2,
            v[2] + self.c.r3,
        ))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .max_abs_diff(&other.m)
            .max(self.c.max_abs_diff(&other.c))
    }
}

/// Convert an operator-sum channel to its affine Bloch form by the transfer
/// construction `m[i][j] = ½Tr(σᵢ Σₖ Eₖ σⱼ Eₖ†)`, `c[i] = ½Tr(σᵢ Σₖ Eₖ Eₖ†)`.
/// Requires the input to be trace-preserving within tolerance.
pub fn kraus_to_affine(k: &KrausChannel) -> Result<AffineChannel> {
    let defect = k.trace_defect();
    if defect >= tolerances::TRACE_PRESERVING {
        return Err(Error::Validation(format!(
            "kraus_to_affine: trace-preservation defect {defect:.3e}"
        )));
    }
    let sigma = paulis();
    // Σₖ Eₖ σⱼ Eₖ† for each σⱼ, and Σₖ Eₖ Eₖ† for the translation.
    let mut m = RealMatrix3::zeros();
    let mut c = [0.0; 3];
    let pushforward = |a: &ComplexMatrix| -> Result<[f64; 3]> {
        let mut acc = ComplexMatrix::zeros(2, 2);
        for e in k.elements() {
            acc = acc.add(&e.mul(a)?.mul(&e.adjoint())?)?;
        }
        let mut out = [0.0; 3];
        for (i, s) in sigma.iter().enumerate() {
            out[i] = 0.5 * s.mul(&acc)?.trace().re;
        }
        Ok(out)
    };
    for j in 0..3 {
        let col = pushforward(&sigma[j])?;
        for i in 0..3 {
            m.0[i][j] = col[i];
        }
    }
    let t = pushforward(&ComplexMatrix::identity(2))?;
    c.copy_from_slice(&t);
    Ok(AffineChannel::new(m, BlochVector::from_array(c)))
}

/// Standard amplitude damping with loss probability `γ`:
/// elements `[[1, 0], [0, √(1−γ)]]` and `[[0, √γ], [0, 0]]`.
pub fn standard_ad(gamma: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&gamma) {
        return Err(Error::Domain(format!("gamma = {gamma} outside [0, 1]")));
    }
    let e0 = ComplexMatrix::mat2_real([1.0, 0.0, 0.0, (1.0 - gamma).sqrt()]);
    let e1 = ComplexMatrix::mat2_real([0.0, gamma.sqrt(), 0.0, 0.0]);
    KrausChannel::new(vec![e0, e1])
}

/// Parameters of the four-element generalized amplitude damping family.
///
/// The family has nominal weights ε₀…ε₃ and dampings γ₀…γ₃ tied by the
/// trace-preservation constraint ε₀ + γ₂ε₂ + γ₃ε₃ = γ₀ε₀ + γ₁ε₁ + ε₂ = 1.
/// The channel map depends only on (ε₀, ε₂, γ₀, γ₂), so only those four are
/// stored; the remaining weights enter through the constrained products
/// ε₁γ₁ = 1 − γ₀ε₀ − ε₂ and ε₃γ₃ = 1 − ε₀ − γ₂ε₂, which must be nonnegative.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GadParams {
    pub eps0: f64,
    pub eps2: f64,
    pub gamma0: f64,
    pub gamma2: f64,
}

impl GadParams {
    pub fn new(eps0: f64, eps2: f64, gamma0: f64, gamma2: f64) -> Result<Self> {
        for (name, v) in [
            ("eps0", eps0),
            ("eps2", eps2),
            ("gamma0", gamma0),
            ("gamma2", gamma2),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Domain(format!("{name} = {v} outside [0, 1]")));
            }
        }
        let p = Self {
            eps0,
            eps2,
            gamma0,
            gamma2,
        };
        if p.eps1() < 0.0 {
            return Err(Error::Domain(format!(
                "gamma0*eps0 + eps2 = {} exceeds 1",
                gamma0 * eps0 + eps2
            )));
        }
        if p.eps3() < 0.0 {
            return Err(Error::Domain(format!(
                "eps0 + gamma2*eps2 = {} exceeds 1",
                eps0 + gamma2 * eps2
            )));
        }
        Ok(p)
    }

    /// ε₁ under the materialization γ₁ = 1.
    pub fn eps1(&self) -> f64 {
        1.0 - self.gamma0 * self.eps0 - self.eps2
    }

    /// ε₃ under the materialization γ₃ = 1.
    pub fn eps3(&self) -> f64 {
        1.0 - self.eps0 - self.gamma2 * self.eps2
    }
}

/// Generalized amplitude damping as four operation elements
/// √ε₀·[[1,0],[0,√γ₀]], √ε₁·[[0,√γ₁],[0,0]], √ε₂·[[√γ₂,0],[0,1]],
/// √ε₃·[[0,0],[√γ₃,0]], materialized with γ₁ = γ₃ = 1 (any compliant choice
/// of the eliminated weights yields the same channel map).
pub fn gad(p: &GadParams) -> Result<KrausChannel> {
    let s0 = p.eps0.sqrt();
    let s1 = p.eps1().max(0.0).sqrt();
    let s2 = p.eps2.sqrt();
    let s3 = p.eps3().max(0.0).sqrt();
    let e0 = ComplexMatrix::mat2_real([s0, 0.0, 0.0, s0 * p.gamma0.sqrt()]);
    let e1 = ComplexMatrix::mat2_real([0.0, s1, 0.0, 0.0]);
    let e2 = ComplexMatrix::mat2_real([s2 * p.gamma2.sqrt(), 0.0, 0.0, s2]);
    let e3 = ComplexMatrix::mat2_real([0.0, 0.0, s3, 0.0]);
    KrausChannel::new(vec![e0, e1, e2, e3])
}

/// Closed-form affine map of [`gad`]:
/// `m = diag(x, x, −1 + ε₀(1+γ₀) + ε₂(1+γ₂))` with `x = ε₀√γ₀ + ε₂√γ₂`
/// (two-fold degenerate), `c = (0, 0, ε₀(1−γ₀) − ε₂(1−γ₂))`.
pub fn gad_affine_closed(p: &GadParams) -> AffineChannel {
    let x = p.eps0 * p.gamma0.sqrt() + p.eps2 * p.gamma2.sqrt();
    let m33 = -1.0 + p.eps0 * (1.0 + p.gamma0) + p.eps2 * (1.0 + p.gamma2);
    let c3 = p.eps0 * (1.0 - p.gamma0) - p.eps2 * (1.0 - p.gamma2);
    AffineChannel::new(
        RealMatrix3::diag([x, x, m33]),
        BlochVector::new(0.0, 0.0, c3),
    )
}

/// Phase damping with strength `λ`: elements `[[1, 0], [0, √(1−λ)]]` and
/// `[[0, 0], [0, √λ]]`; its affine map shrinks the equatorial plane by
/// `√(1−λ)` and leaves the poles fixed.
pub fn phase_damping(lam: f64) -> Result<KrausChannel> {
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Domain(format!("lambda = {lam} outside [0, 1]")));
    }
    let e0 = ComplexMatrix::mat2_real([1.0, 0.0, 0.0, (1.0 - lam).sqrt()]);
    let e1 = ComplexMatrix::mat2_real([0.0, 0.0, 0.0, lam.sqrt()]);
    KrausChannel::new(vec![e0, e1])
}

/// JSON-facing record pairing a channel's operation elements with its affine
/// form: `{ "kraus": [[[re,im],…4 entries row-major],…], "affine": {"m": …, "c": …} }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelRecord {
    pub kraus: Vec<Vec<[f64; 2]>>,
    pub affine: AffineChannel,
}

impl ChannelRecord {
    pub fn from_kraus(k: &KrausChannel) -> Result<Self> {
        let affine = kraus_to_affine(k)?;
        let kraus = k
            .elements()
            .iter()
            .map(|e| {
                (0..2)
                    .flat_map(|i| (0..2).map(move |j| (i, j)))
                    .map(|(i, j)| [e[(i, j)].re, e[(i, j)].im])
                    .collect()
            })
            .collect();
        Ok(Self { kraus, affine })
    }

    /// Rebuild the operator-sum form from the serialized entries.
    pub fn to_kraus(&self) -> Result<KrausChannel> {
        let elements = self
            .kraus
            .iter()
            .map(|flat| {
                if flat.len() != 4 {
                    return Err(Error::Shape(format!(
                        "operation element has {} entries, expected 4",
                        flat.len()
                    )));
                }
                Ok(ComplexMatrix::mat2([
                    Complex64::new(flat[0][0], flat[0][1]),
                    Complex64::new(flat[1][0], flat[1][1]),
                    Complex64::new(flat[2][0], flat[2][1]),
                    Complex64::new(flat[3][0], flat[3][1]),
                ]))
            })
            .collect::<Result<Vec<_>>>()?;
        KrausChannel::new(elements)
    }
}
