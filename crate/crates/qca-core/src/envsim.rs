//! Circuit model of a single-qubit channel: a pure system qubit coupled to a
//! one-qubit environment of tunable mixedness through a three-angle diagonal
//! unitary. Provides both the explicit 4×4 evolution and the closed-form
//! affine map it induces, the characteristic-polynomial coefficients of MᵀM,
//! special-case eigenvalue formulas, degeneracy classification, and canonical
//! (SVD) forms with their translation vectors.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channels::AffineChannel;
use crate::error::{Error, Result};
use crate::qmath::{
    partial_trace_env, svd3, tensor_product, BlochVector, ComplexMatrix, RealMatrix3,
};
use crate::tolerances;

/// Interaction and environment parameters: `alpha`, `beta`, `gamma` are the
/// angles of the diagonal-unitary coupling, `lambda ∈ [0,1]` the environment
/// mixedness (0 = maximally mixed, 1 = pure), and `xi`, `eta` the polar and
/// azimuthal angles of the environment's pure component.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvParams {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub lambda: f64,
    pub xi: f64,
    pub eta: f64,
}

impl EnvParams {
    pub fn new(alpha: f64, beta: f64, gamma: f64, lambda: f64, xi: f64, eta: f64) -> Result<Self> {
        for (name, v) in [
            ("alpha", alpha),
            ("beta", beta),
            ("gamma", gamma),
            ("lambda", lambda),
            ("xi", xi),
            ("eta", eta),
        ] {
            if !v.is_finite() {
                return Err(Error::Domain(format!("{name} = {v} is not finite")));
            }
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::Domain(format!("lambda = {lambda} outside [0, 1]")));
        }
        Ok(Self {
            alpha,
            beta,
            gamma,
            lambda,
            xi,
            eta,
        })
    }
}

/// A pure system qubit `cos(θ/2)|0⟩ + e^{−iφ} sin(θ/2)|1⟩`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PureQubit {
    pub theta: f64,
    pub phi: f64,
}

impl PureQubit {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !theta.is_finite() || !phi.is_finite() {
            return Err(Error::Domain("angles must be finite".into()));
        }
        Ok(Self { theta, phi })
    }

    pub fn state_vector(&self) -> [Complex64; 2] {
        let (sh, ch) = (self.theta / 2.0).sin_cos();
        [
            Complex64::new(ch, 0.0),
            Complex64::from_polar(sh, -self.phi),
        ]
    }

    pub fn density(&self) -> ComplexMatrix {
        ComplexMatrix::outer(&self.state_vector())
    }

    /// Bloch vector `(sinθ cosφ, −sinθ sinφ, cosθ)`; the sign of the second
    /// component follows from the `e^{−iφ}` phase convention.
    pub fn bloch(&self) -> BlochVector {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        BlochVector::new(st * cp, -st * sp, ct)
    }
}

/// The 4×4 coupling unitary in the computational basis: the outer |00⟩/|11⟩
/// block mixes with phase-free `i·sin((α+γ)/2)` entries, the inner |01⟩/|10⟩
/// block mixes through `(α−γ)/2` and carries a global `e^{−iβ}` phase.
pub fn build_ud(p: &EnvParams) -> ComplexMatrix {
    let (sp, cp) = ((p.alpha + p.gamma) / 2.0).sin_cos();
    let (sm, cm) = ((p.alpha - p.gamma) / 2.0).sin_cos();
    let phase = Complex64::from_polar(1.0, -p.beta);
    let mut u = ComplexMatrix::zeros(4, 4);
    u[(0, 0)] = Complex64::new(cp, 0.0);
    u[(0, 3)] = Complex64::new(0.0, sp);
    u[(1, 1)] = phase * cm;
    u[(1, 2)] = phase * Complex64::new(0.0, sm);
    u[(2, 1)] = phase * Complex64::new(0.0, sm);
    u[(2, 2)] = phase * cm;
    u[(3, 0)] = Complex64::new(0.0, sp);
    u[(3, 3)] = Complex64::new(cp, 0.0);
    u
}

/// Environment state `(1−λ)·𝟙/2 + λ|φ⟩⟨φ|` with
/// `|φ⟩ = cos(ξ/2)|0⟩ + e^{−iη} sin(ξ/2)|1⟩`; eigenvalues `(1±λ)/2`.
pub fn env_state(p: &EnvParams) -> Result<ComplexMatrix> {
    if !(0.0..=1.0).contains(&p.lambda) {
        return Err(Error::Domain(format!(
            "lambda = {} outside [0, 1]",
            p.lambda
        )));
    }
    let (sh, ch) = (p.xi / 2.0).sin_cos();
    let phi_vec = [Complex64::new(ch, 0.0), Complex64::from_polar(sh, -p.eta)];
    let pure = ComplexMatrix::outer(&phi_vec);
    ComplexMatrix::identity(2)
        .scale_re((1.0 - p.lambda) / 2.0)
        .add(&pure.scale_re(p.lambda))
}

/// `Tr_env[U (ρ_in ⊗ ρ_e) U†]` for an arbitrary system density matrix.
pub fn evolve_density(rho_in: &ComplexMatrix, p: &EnvParams) -> Result<ComplexMatrix> {
    if !rho_in.is_density() {
        return Err(Error::Validation(
            "evolve: input is not a density matrix".into(),
        ));
    }
    let u = build_ud(p);
    let joint = tensor_product(rho_in, &env_state(p)?)?;
    partial_trace_env(&u.mul(&joint)?.mul(&u.adjoint())?)
}

/// Output state of the circuit for a pure system input.
pub fn evolve(s: &PureQubit, p: &EnvParams) -> Result<ComplexMatrix> {
    evolve_density(&s.density(), p)
}

/// The closed-form affine map `r → M·r + C` induced by the circuit.
pub fn affine_closed_form(p: &EnvParams) -> AffineChannel {
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let (sg, cg) = p.gamma.sin_cos();
    let (sx, cx) = p.xi.sin_cos();
    let (se, ce) = p.eta.sin_cos();
    let l = p.lambda;
    let m = RealMatrix3([
        [cb * cg, l * cx * sb * cg, -l * sx * se * cb * sg],
        [-l * cx * ca * sb, ca * cb, l * sx * ce * sa * cb],
        [l * sx * se * ca * sg, -l * sx * ce * sa * cg, ca * cg],
    ]);
    let c = BlochVector::new(
        -l * sx * ce * sb * sg,
        -l * sx * se * sa * sb,
        -l * cx * sa * sg,
    );
    AffineChannel::new(m, c)
}

/// Coefficients of the characteristic cubic `−Λ³ + f1·Λ² + f2·Λ + f3 = 0`
/// of `MᵀM`: `f1 = Tr(MᵀM)`, `−f2` the sum of principal 2×2 minors,
/// `f3 = det(MᵀM)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CubicCoeffs {
    pub f1: f64,
    pub f2: f64,
    pub f3: f64,
}

impl CubicCoeffs {
    /// Evaluate `−Λ³ + f1·Λ² + f2·Λ + f3`.
    pub fn eval(&self, lam: f64) -> f64 {
        -lam * lam * lam + self.f1 * lam * lam + self.f2 * lam + self.f3
    }
}

/// Closed-form characteristic-cubic coefficients of `MᵀM` in terms of the
/// circuit parameters.
pub fn charpoly_coeffs(p: &EnvParams) -> CubicCoeffs {
    let ca2 = p.alpha.cos().powi(2);
    let sa2 = 1.0 - ca2;
    let cb2 = p.beta.cos().powi(2);
    let sb2 = 1.0 - cb2;
    let cg2 = p.gamma.cos().powi(2);
    let sg2 = 1.0 - cg2;
    let cx2 = p.xi.cos().powi(2);
    let sx2 = 1.0 - cx2;
    let ce2 = p.eta.cos().powi(2);
    let se2 = 1.0 - ce2;
    let l2 = p.lambda * p.lambda;

    let f1 = ca2 * cb2
        + cb2 * cg2
        + cg2 * ca2
        + l2 * (cx2 * sb2 * (ca2 + cg2)
            + sx2 * se2 * sg2 * (ca2 + cb2)
            + sx2 * ce2 * sa2 * (cb2 + cg2));

    // f2 and f3 share the same degree-six bracket up to the placement of the
    // cos²ξ term; both are products as printed.
    let bracket_f2 = ca2 * cb2 * cg2
        + l2 * (sx2 * se2 * ca2 * cb2 * sg2 + sx2 * ce2 * sa2 * cb2 * cg2 + cx2 * ca2 * sb2 * cg2);
    let bracket_lin = (ca2 + cb2 + cg2) + l2 * (sx2 * se2 * sg2 + sx2 * ce2 * sa2 + cx2 * sb2);
    let f2 = -bracket_f2 * bracket_lin;

    let bracket_f3 = ca2 * cb2 * cg2
        + l2 * (cx2 * ca2 * sb2 * cg2 + sx2 * se2 * ca2 * cb2 * sg2 + sx2 * ce2 * sa2 * cb2 * cg2);
    let f3 = bracket_f3 * bracket_f3;

    CubicCoeffs { f1, f2, f3 }
}

/// Eigenvalues `(Λ1, Λ+, Λ−)` of `MᵀM` in the symmetric-coupling case
/// `α = γ`. The discriminant under the square root is clamped to zero when
/// it dips negative by less than the clamp window (exact degeneracies land
/// there in floating point); a larger violation is a numerical fault.
pub fn eigen_alpha_eq_gamma(p: &EnvParams) -> Result<(f64, f64, f64)> {
    if (p.alpha - p.gamma).abs() > tolerances::PARAM_PATTERN {
        return Err(Error::Domain(format!(
            "alpha must equal gamma; |alpha - gamma| = {:.3e}",
            (p.alpha - p.gamma).abs()
        )));
    }
    let ca2 = p.alpha.cos().powi(2);
    let sa2 = 1.0 - ca2;
    let cb2 = p.beta.cos().powi(2);
    let sb2 = 1.0 - cb2;
    let cx2 = p.xi.cos().powi(2);
    let sx2 = 1.0 - cx2;
    let l2 = p.lambda * p.lambda;

    let lam1 = ca2 * cb2 + l2 * (cx2 * ca2 * sb2 + sx2 * sa2 * cb2);

    let shifted = (ca2 - cb2) + l2 * (cx2 * sb2 + sx2 * sa2);
    let radicand = shifted * shifted - 4.0 * l2 * cx2 * sb2 * (ca2 - cb2);
    let radicand = if radicand < 0.0 {
        if radicand < -tolerances::RADICAND_CLAMP {
            return Err(Error::Numerical(format!(
                "eigenvalue discriminant {radicand:.3e} below clamp window"
            )));
        }
        0.0
    } else {
        radicand
    };
    let tilde = radicand.sqrt();
    let common = (ca2 + cb2) + l2 * (cx2 * sb2 + sx2 * sa2);
    let lam_plus = ca2 / 2.0 * (common + tilde);
    let lam_minus = ca2 / 2.0 * (common - tilde);
    Ok((lam1, lam_plus, lam_minus))
}

/// Eigenvalues `(Λ1, Λ2, Λ3)` of `MᵀM` in the aligned-environment case
/// `ξ = 0` (no `α = γ` requirement).
pub fn eigen_xi_zero(p: &EnvParams) -> Result<(f64, f64, f64)> {
    if p.xi.abs() > tolerances::PARAM_PATTERN {
        return Err(Error::Domain(format!(
            "xi must be zero; |xi| = {:.3e}",
            p.xi.abs()
        )));
    }
    let ca2 = p.alpha.cos().powi(2);
    let cb2 = p.beta.cos().powi(2);
    let sb2 = 1.0 - cb2;
    let cg2 = p.gamma.cos().powi(2);
    let shrink = cb2 + p.lambda * p.lambda * sb2;
    Ok((ca2 * shrink, cg2 * shrink, ca2 * cg2))
}

/// Parameter-pattern classification of the degeneracy structure under the
/// standing assumption `α = γ`. `XiZero` and `AlphaEqBeta` are the admissible
/// (doubly degenerate) cases; `XiHalfPi` and `BetaZero` have generically
/// distinct singular values.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseLabel {
    XiZero,
    XiHalfPi,
    BetaZero,
    AlphaEqBeta,
    Generic,
}

impl CaseLabel {
    pub fn is_admissible(&self) -> bool {
        matches!(self, CaseLabel::XiZero | CaseLabel::AlphaEqBeta)
    }
}

impl std::fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            CaseLabel::XiZero => "xi_zero",
            CaseLabel::XiHalfPi => "xi_half_pi",
            CaseLabel::BetaZero => "beta_zero",
            CaseLabel::AlphaEqBeta => "alpha_eq_beta",
            CaseLabel::Generic => "generic",
        };
        f.write_str(s)
    }
}

/// Classify parameters by pattern, first match wins in the order XiZero,
/// AlphaEqBeta, XiHalfPi, BetaZero. Requires `α = γ` within `tol`.
pub fn classify_case(p: &EnvParams, tol: f64) -> Result<CaseLabel> {
    if (p.alpha - p.gamma).abs() > tol {
        return Err(Error::Domain(format!(
            "alpha must equal gamma for case analysis; |alpha - gamma| = {:.3e}",
            (p.alpha - p.gamma).abs()
        )));
    }
    Ok(if p.xi.abs() <= tol {
        CaseLabel::XiZero
    } else if (p.alpha - p.beta).abs() <= tol {
        CaseLabel::AlphaEqBeta
    } else if (p.xi - std::f64::consts::FRAC_PI_2).abs() <= tol {
        CaseLabel::XiHalfPi
    } else if p.beta.abs() <= tol {
        CaseLabel::BetaZero
    } else {
        CaseLabel::Generic
    })
}

/// Canonical decomposition `M = U·D·V` (right factor not transposed) with the
/// translation seen from the rotated frame, `t = Uᵀ·C`. Axis ordering follows
/// the degenerate-pair-first convention rather than magnitude sorting.
#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct CanonicalForm {
    pub u: RealMatrix3,
    pub d: RealMatrix3,
    pub v: RealMatrix3,
    pub t: BlochVector,
    pub case_label: CaseLabel,
}

impl CanonicalForm {
    pub fn d_diag(&self) -> [f64; 3] {
        self.d.diagonal()
    }
}

/// Compute the canonical form of the circuit's affine map. Admissible cases
/// use the exact closed-form factors; the non-degenerate cases fall back to a
/// numeric decomposition re-permuted to the conventional axis order.
pub fn canonical_form(p: &EnvParams) -> Result<CanonicalForm> {
    let case = classify_case(p, tolerances::PARAM_PATTERN)?;
    let affine = affine_closed_form(p);
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = p.beta.sin_cos();
    let l = p.lambda;

    let (mut u, mut d, v) = match case {
        CaseLabel::XiZero => {
            let s = (cb * cb + l * l * sb * sb).sqrt();
            let u = RealMatrix3([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, 1.0]]);
            let d = [ca * s, ca * s, ca * ca];
            let v = if s < 1e-300 {
                RealMatrix3::identity()
            } else {
                RealMatrix3([
                    [l * sb / s, -cb / s, 0.0],
                    [cb / s, l * sb / s, 0.0],
                    [0.0, 0.0, 1.0],
                ])
            };
            (u, d, v)
        }
        CaseLabel::AlphaEqBeta => {
            let (se, ce) = p.eta.sin_cos();
            let (sx, cx) = p.xi.sin_cos();
            let sq = (ca * ca + l * l * sa * sa).sqrt();
            let u = if sq < 1e-300 {
                RealMatrix3::identity()
            } else {
                RealMatrix3([
                    [
                        (se * ca - l * cx * ce * sa) / sq,
                        (cx * ce * ca + l * se * sa) / sq,
                        sx * ce,
                    ],
                    [
                        -(ce * ca + l * cx * se * sa) / sq,
                        (cx * se * ca - l * ce * sa) / sq,
                        sx * se,
                    ],
                    [l * sx * sa / sq, -sx * ca / sq, cx],
                ])
            };
            let d = [ca * sq, ca * sq, ca * ca];
            let v = RealMatrix3([
                [se, -ce, 0.0],
                [cx * ce, cx * se, -sx],
                [sx * ce, sx * se, cx],
            ]);
            (u, d, v)
        }
        CaseLabel::XiHalfPi | CaseLabel::BetaZero => {
            let targets = match case {
                CaseLabel::XiHalfPi => {
                    let w = (ca * ca + l * l * sa * sa).sqrt();
                    [ca * w, cb * w, ca * cb]
                }
                _ => {
                    let sx = p.xi.sin();
                    let w = (ca * ca + l * l * sx * sx * sa * sa).sqrt();
                    [w, ca * w, ca]
                }
            };
            let svd = svd3(&affine.m);
            let perm = match_permutation(&svd.d, &targets);
            let mut u = RealMatrix3::zeros();
            let mut v = RealMatrix3::zeros();
            let mut d = [0.0; 3];
            for i in 0..3 {
                let j = perm[i];
                d[i] = svd.d[j];
                for k in 0..3 {
                    u.0[k][i] = svd.u.0[k][j];
                    v.0[i][k] = svd.v.0[j][k];
                }
            }
            (u, d, v)
        }
        CaseLabel::Generic => {
            let svd = svd3(&affine.m);
            (svd.u, svd.d, svd.v)
        }
    };

    // Orient so every reported singular value is nonnegative: flipping a U
    // column together with its diagonal entry leaves U·D·V unchanged.
    for i in 0..3 {
        if d[i] < 0.0 {
            d[i] = -d[i];
            for k in 0..3 {
                u.0[k][i] = -u.0[k][i];
            }
        }
    }

    let dm = RealMatrix3::diag(d);
    let ut_c = u.transpose().mul_vec(affine.c.as_array());
    let form = CanonicalForm {
        u,
        d: dm,
        v,
        t: BlochVector::from_array(ut_c),
        case_label: case,
    };

    // Structural assertions on the finished decomposition.
    let recon_defect = u.mul(&dm).mul(&v).max_abs_diff(&affine.m);
    if recon_defect > tolerances::EIGEN_RESIDUAL {
        return Err(Error::Numerical(format!(
            "canonical form reconstruction defect {recon_defect:.3e}"
        )));
    }
    let ortho = u.orthogonality_defect().max(v.orthogonality_defect());
    if ortho > tolerances::TRACE_PRESERVING {
        return Err(Error::Numerical(format!(
            "canonical form orthogonality defect {ortho:.3e}"
        )));
    }
    if case.is_admissible() {
        let gap = (d[0] - d[1]).abs();
        if gap > tolerances::DEGENERACY {
            return Err(Error::Numerical(format!(
                "expected degenerate pair, |d11 - d22| = {gap:.3e}"
            )));
        }
        if form.t.r1.abs() > tolerances::TRACE_PRESERVING
            || form.t.r2.abs() > tolerances::TRACE_PRESERVING
        {
            return Err(Error::Numerical(format!(
                "expected planar translation to vanish, got ({:.3e}, {:.3e})",
                form.t.r1, form.t.r2
            )));
        }
    }
    Ok(form)
}

/// Permutation `perm` such that `d[perm[i]]` best matches `targets[i]` in
/// absolute value, greedily from the largest target down.
fn match_permutation(d: &[f64; 3], targets: &[f64; 3]) -> [usize; 3] {
    let mut order: Vec<usize> = (0..3).collect();
    order.sort_by(|&a, &b| {
        targets[b]
            .abs()
            .partial_cmp(&targets[a].abs())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    let mut used = [false; 3];
    let mut perm = [0usize; 3];
    for &ti in &order {
        let mut best = usize::MAX;
        let mut best_err = f64::INFINITY;
        for j in 0..3 {
            if used[j] {
                continue;
            }
            let err = (d[j] - targets[ti].abs()).abs();
            if err < best_err {
                best_err = err;
                best = j;
            }
        }
        used[best] = true;
        perm[ti] = best;
    }
    perm
}

/// A point of the damping-channel family in `(x, y, z) = (D11, D33, (UᵀC)3)`
/// coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdPoint {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl AdPoint {
    pub fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// The `(X1, Y1, Z1)` coordinates of an admissible parameter point:
/// `(cos α·√(cos²β + λ²sin²β), cos²α, −λ sin²α)`; in the `AlphaEqBeta` case
/// the β slot is read as α.
pub fn ad_point(p: &EnvParams) -> Result<AdPoint> {
    let case = classify_case(p, tolerances::PARAM_PATTERN)?;
    let beta_eff = match case {
        CaseLabel::XiZero => p.beta,
        CaseLabel::AlphaEqBeta => p.alpha,
        other => {
            return Err(Error::Domain(format!(
                "damping point requires a degenerate case (xi = 0 or alpha = beta); got {other}"
            )))
        }
    };
    let (sa, ca) = p.alpha.sin_cos();
    let (sb, cb) = beta_eff.sin_cos();
    let shrink = (cb * cb + p.lambda * p.lambda * sb * sb).sqrt();
    Ok(AdPoint::new(ca * shrink, ca * ca, -p.lambda * sa * sa))
}

/// Full per-parameter-point report: the affine map, characteristic-cubic
/// coefficients, numeric eigenvalues of `MᵀM` (descending), and — when the
/// symmetric-coupling assumption holds — the case label, canonical diagonal,
/// rotated translation, and (for admissible cases) the damping-point
/// coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EnvReport {
    pub params: EnvParams,
    pub m: RealMatrix3,
    pub c: BlochVector,
    pub f: CubicCoeffs,
    pub eigenvalues: [f64; 3],
    #[serde(skip_serializing_if = "Option::is_none")]
    pub case: Option<CaseLabel>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub t: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ad_point: Option<AdPoint>,
}

impl EnvReport {
    pub fn for_params(p: &EnvParams) -> Result<Self> {
        let affine = affine_closed_form(p);
        let f = charpoly_coeffs(p);
        let eigenvalues = crate::qmath::symmetric_eigen3(&affine.m.gram())?;
        let symmetric_coupling = (p.alpha - p.gamma).abs() <= tolerances::PARAM_PATTERN;
        let (case, d, t, point) = if symmetric_coupling {
            let form = canonical_form(p)?;
            let point = if form.case_label.is_admissible() {
                Some(ad_point(p)?)
            } else {
                None
            };
            (
                Some(form.case_label),
                Some(form.d_diag()),
                Some(form.t.as_array()),
                point,
            )
        } else {
            (None, None, None, None)
        };
        Ok(Self {
            params: *p,
            m: affine.m,
            c: affine.c,
            f,
            eigenvalues,
            case,
            d,
            t,
            ad_point: point,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::density_to_bloch;
    use crate::rng::CounterRng;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, PI};

    fn params(alpha: f64, beta: f64, gamma: f64, lambda: f64, xi: f64, eta: f64) -> EnvParams {
        EnvParams::new(alpha, beta, gamma, lambda, xi, eta).unwrap()
    }

    fn random_params(rng: &CounterRng, base: u64) -> EnvParams {
        params(
            rng.uniform_in(base, -PI, PI),
            rng.uniform_in(base + 1, -PI, PI),
            rng.uniform_in(base + 2, -PI, PI),
            rng.uniform(base + 3),
            rng.uniform_in(base + 4, -PI, PI),
            rng.uniform_in(base + 5, -2.0 * PI, 2.0 * PI),
        )
    }

    /// Random parameters restricted to the sweep domain used by the channel
    /// geometry: α, β ∈ [0, π/2], ξ ∈ [0, π], η ∈ [0, 2π), α = γ.
    fn random_sweep_params(rng: &CounterRng, base: u64) -> EnvParams {
        let alpha = rng.uniform_in(base, 0.0, FRAC_PI_2);
        params(
            alpha,
            rng.uniform_in(base + 1, 0.0, FRAC_PI_2),
            alpha,
            rng.uniform(base + 2),
            rng.uniform_in(base + 3, 0.0, PI),
            rng.uniform_in(base + 4, 0.0, 2.0 * PI),
        )
    }

    fn random_qubit(rng: &CounterRng, base: u64) -> PureQubit {
        PureQubit::new(
            rng.uniform_in(base, 0.0, PI),
            rng.uniform_in(base + 1, 0.0, 2.0 * PI),
        )
        .unwrap()
    }

    #[test]
    fn coupling_is_identity_at_zero_angles() {
        let u = build_ud(&params(0.0, 0.0, 0.0, 0.5, 0.3, 0.1));
        assert!(u.max_abs_diff(&ComplexMatrix::identity(4)) < 1e-15);
    }

    #[test]
    fn coupling_outer_block_swaps_at_half_turn() {
        // α + γ = π makes the outer block purely off-diagonal (i·swap).
        let u = build_ud(&params(PI / 2.0, 0.7, PI / 2.0, 0.5, 0.3, 0.1));
        assert!(u[(0, 0)].norm() < 1e-15);
        assert!((u[(0, 3)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((u[(3, 0)] - Complex64::new(0.0, 1.0)).norm() < 1e-15);
        assert!(u[(3, 3)].norm() < 1e-15);
    }

    #[test]
    fn coupling_is_unitary() {
        let rng = CounterRng::new(40);
        for trial in 0..200 {
            let u = build_ud(&random_params(&rng, trial * 8));
            assert!(u.unitarity_defect() < 1e-12);
        }
    }

    #[test]
    fn env_state_known_points() {
        let mixed = env_state(&params(0.0, 0.0, 0.0, 0.0, 1.2, 0.4)).unwrap();
        assert!(mixed.max_abs_diff(&ComplexMatrix::identity(2).scale_re(0.5)) < 1e-15);

        let pure0 = env_state(&params(0.0, 0.0, 0.0, 1.0, 0.0, 0.0)).unwrap();
        assert!(pure0.max_abs_diff(&ComplexMatrix::mat2_real([1.0, 0.0, 0.0, 0.0])) < 1e-15);

        let x_axis = env_state(&params(0.0, 0.0, 0.0, 0.5, FRAC_PI_2, 0.0)).unwrap();
        let r = density_to_bloch(&x_axis).unwrap();
        assert!(r.max_abs_diff(&BlochVector::new(0.5, 0.0, 0.0)) < 1e-15);
    }

    #[test]
    fn env_state_eigenvalues_are_half_one_plus_minus_lambda() {
        let rng = CounterRng::new(41);
        for trial in 0..100 {
            let p = random_params(&rng, trial * 8);
            let rho = env_state(&p).unwrap();
            assert!(rho.is_density());
            let evs = crate::qmath::hermitian_eigenvalues(&rho).unwrap();
            assert!((evs[0] - (1.0 - p.lambda) / 2.0).abs() < 1e-12);
            assert!((evs[1] - (1.0 + p.lambda) / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pure_qubit_bloch_matches_density() {
        let rng = CounterRng::new(42);
        for trial in 0..200 {
            let s = random_qubit(&rng, trial * 4);
            let from_density = density_to_bloch(&s.density()).unwrap();
            assert!(from_density.max_abs_diff(&s.bloch()) < 1e-14);
            assert!((s.bloch().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn identity_coupling_returns_input() {
        let rng = CounterRng::new(43);
        for trial in 0..50 {
            let s = random_qubit(&rng, trial * 4);
            let p = params(0.0, 0.0, 0.0, 0.61, 0.9, 2.2);
            let out = evolve(&s, &p).unwrap();
            assert!(out.max_abs_diff(&s.density()) < 1e-14);
        }
    }

    #[test]
    fn mixed_environment_gives_diagonal_contraction() {
        let rng = CounterRng::new(44);
        for trial in 0..100 {
            let mut p = random_params(&rng, trial * 8);
            p.lambda = 0.0;
            let affine = affine_closed_form(&p);
            let expected = RealMatrix3::diag([
                p.beta.cos() * p.gamma.cos(),
                p.alpha.cos() * p.beta.cos(),
                p.alpha.cos() * p.gamma.cos(),
            ]);
            assert!(affine.m.max_abs_diff(&expected) < 1e-15);
            assert!(affine.c.norm() == 0.0);

            let s = random_qubit(&rng, 100_000 + trial * 4);
            let out = density_to_bloch(&evolve(&s, &p).unwrap()).unwrap();
            let r = s.bloch();
            let pred = expected.mul_vec(r.as_array());
            assert!(out.max_abs_diff(&BlochVector::from_array(pred)) < 1e-10);
        }
    }

    #[test]
    fn closed_form_matches_numeric_evolution() {
        let rng = CounterRng::new(45);
        for trial in 0..1000u64 {
            let p = random_params(&rng, trial * 16);
            let affine = affine_closed_form(&p);
            let s = random_qubit(&rng, 1_000_000 + trial * 16);
            let numeric = density_to_bloch(&evolve(&s, &p).unwrap()).unwrap();
            let closed = affine.apply(&s.bloch()).unwrap();
            assert!(
                numeric.max_abs_diff(&closed) < 1e-10,
                "mismatch {:.3e} at {:?}",
                numeric.max_abs_diff(&closed),
                p
            );
        }
    }

    #[test]
    fn closed_form_matches_evolution_on_axis_states() {
        // The six axis states probe every column of M and the translation.
        let rng = CounterRng::new(46);
        let axes = [
            (FRAC_PI_2, 0.0),        // +x
            (FRAC_PI_2, PI),         // -x
            (FRAC_PI_2, -FRAC_PI_2), // +y (phase convention flips the sign)
            (FRAC_PI_2, FRAC_PI_2),  // -y
            (0.0, 0.0),              // +z
            (PI, 0.0),               // -z
        ];
        for trial in 0..200u64 {
            let p = random_params(&rng, trial * 8);
            let affine = affine_closed_form(&p);
            for (k, &(theta, phi)) in axes.iter().enumerate() {
                let s = PureQubit::new(theta, phi).unwrap();
                let numeric = density_to_bloch(&evolve(&s, &p).unwrap()).unwrap();
                let closed = affine.apply(&s.bloch()).unwrap();
                assert!(
                    numeric.max_abs_diff(&closed) < 1e-10,
                    "axis {k} mismatch at {p:?}"
                );
            }
        }
    }

    #[test]
    fn charpoly_matches_invariants_of_gram_matrix() {
        let rng = CounterRng::new(47);
        for trial in 0..1000u64 {
            let p = random_params(&rng, trial * 8);
            let g = affine_closed_form(&p).m.gram();
            let f = charpoly_coeffs(&p);
            // f1 = trace, −f2 = minor sum, f3 = determinant.
            assert!((f.f1 - g.trace()).abs() < 1e-12);
            let minors = (g.0[1][1] * g.0[2][2] - g.0[1][2] * g.0[2][1])
                + (g.0[0][0] * g.0[2][2] - g.0[0][2] * g.0[2][0])
                + (g.0[0][0] * g.0[1][1] - g.0[0][1] * g.0[1][0]);
            assert!((f.f2 + minors).abs() < 1e-12);
            assert!((f.f3 - g.det()).abs() < 1e-12);
            // The cubic annihilates every numeric eigenvalue.
            let evs = crate::qmath::symmetric_eigen3(&g).unwrap();
            for &e in &evs {
                assert!(
                    f.eval(e).abs() < 1e-9 * (1.0 + f.f1.abs()),
                    "residual {:.3e} at {:?}",
                    f.eval(e),
                    p
                );
                assert!((-1e-9..=1.0 + 1e-9).contains(&e));
            }
        }
    }

    #[test]
    fn charpoly_known_values() {
        let p = params(FRAC_PI_4, FRAC_PI_4, FRAC_PI_4, 0.0, 0.7, 0.2);
        let f = charpoly_coeffs(&p);
        assert!((f.f1 - 0.75).abs() < 1e-15);
        let evs = crate::qmath::symmetric_eigen3(&affine_closed_form(&p).m.gram()).unwrap();
        for &e in &evs {
            assert!((e - 0.25).abs() < 1e-12);
        }
    }

    #[test]
    fn symmetric_coupling_eigenvalues_match_numeric() {
        let rng = CounterRng::new(48);
        for trial in 0..1000u64 {
            let mut p = random_params(&rng, trial * 8);
            p.gamma = p.alpha;
            let (l1, lp, lm) = eigen_alpha_eq_gamma(&p).unwrap();
            let mut closed = [l1, lp, lm];
            closed.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let numeric = crate::qmath::symmetric_eigen3(&affine_closed_form(&p).m.gram()).unwrap();
            for k in 0..3 {
                assert!(
                    (closed[k] - numeric[k]).abs() < 1e-9,
                    "eigenvalue {k}: closed {} vs numeric {} at {:?}",
                    closed[k],
                    numeric[k],
                    p
                );
            }
        }
    }

    #[test]
    fn symmetric_coupling_eigenvalues_at_unmixed_environment() {
        let rng = CounterRng::new(49);
        for trial in 0..100 {
            let alpha = rng.uniform_in(trial * 4, -PI, PI);
            let beta = rng.uniform_in(trial * 4 + 1, -PI, PI);
            let p = params(alpha, beta, alpha, 0.0, 0.9, 0.3);
            let (l1, lp, lm) = eigen_alpha_eq_gamma(&p).unwrap();
            let ca2 = alpha.cos().powi(2);
            let cb2 = beta.cos().powi(2);
            let mut got = [l1, lp, lm];
            let mut want = [ca2 * cb2, ca2 * ca2, ca2 * cb2];
            got.sort_by(|a, b| a.partial_cmp(b).unwrap());
            want.sort_by(|a, b| a.partial_cmp(b).unwrap());
            for k in 0..3 {
                assert!((got[k] - want[k]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn symmetric_coupling_pure_aligned_environment_collapses_beta() {
        let p = params(0.8, 1.1, 0.8, 1.0, 0.0, 0.0);
        let (l1, _, _) = eigen_alpha_eq_gamma(&p).unwrap();
        assert!((l1 - 0.8f64.cos().powi(2)).abs() < 1e-12);
    }

    #[test]
    fn eigen_preconditions_are_enforced() {
        let p = params(0.5, 0.2, 0.9, 0.5, 0.0, 0.0);
        assert!(eigen_alpha_eq_gamma(&p).is_err());
        let p = params(0.5, 0.2, 0.5, 0.5, 0.4, 0.0);
        assert!(eigen_xi_zero(&p).is_err());
    }

    #[test]
    fn aligned_environment_eigenvalues_match_numeric() {
        let rng = CounterRng::new(50);
        for trial in 0..500u64 {
            let mut p = random_params(&rng, trial * 8);
            p.xi = 0.0;
            let (l1, l2, l3) = eigen_xi_zero(&p).unwrap();
            let mut closed = [l1, l2, l3];
            closed.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let numeric = crate::qmath::symmetric_eigen3(&affine_closed_form(&p).m.gram()).unwrap();
            for k in 0..3 {
                assert!((closed[k] - numeric[k]).abs() < 1e-9);
            }
            // Pure environment: the shrink bracket collapses to 1.
            if p.lambda == 1.0 {
                assert!((l1 - p.alpha.cos().powi(2)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn aligned_environment_degenerates_when_couplings_match() {
        let p = params(0.7, 0.4, 0.7, 0.35, 0.0, 0.0);
        let (l1, l2, _) = eigen_xi_zero(&p).unwrap();
        assert!((l1 - l2).abs() < 1e-15);
    }

    #[test]
    fn classification_order_and_admissibility() {
        let tol = tolerances::PARAM_PATTERN;
        let c = classify_case(&params(0.7, 0.3, 0.7, 0.5, 0.0, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::XiZero);
        assert!(c.is_admissible());

        let c = classify_case(&params(0.5, 0.5, 0.5, 0.5, 1.0, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::AlphaEqBeta);
        assert!(c.is_admissible());

        let c = classify_case(&params(0.4, 0.9, 0.4, 0.5, FRAC_PI_2, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::XiHalfPi);
        assert!(!c.is_admissible());

        let c = classify_case(&params(0.4, 0.0, 0.4, 0.5, 0.3, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::BetaZero);
        assert!(!c.is_admissible());

        let c = classify_case(&params(0.4, 0.9, 0.4, 0.5, 0.6, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::Generic);

        // First match wins: ξ=0 beats both α=β and β=0.
        let c = classify_case(&params(0.5, 0.5, 0.5, 0.5, 0.0, 0.0), tol).unwrap();
        assert_eq!(c, CaseLabel::XiZero);

        assert!(classify_case(&params(0.5, 0.3, 0.6, 0.5, 0.0, 0.0), tol).is_err());
    }

    #[test]
    fn canonical_form_aligned_case_closed_factors() {
        let p = params(0.8, 0.5, 0.8, 1.0, 0.0, 0.0);
        let form = canonical_form(&p).unwrap();
        assert_eq!(form.case_label, CaseLabel::XiZero);
        let ca = 0.8f64.cos();
        // Pure environment: the shrink factor is 1.
        let d = form.d_diag();
        assert!((d[0] - ca).abs() < 1e-12);
        assert!((d[1] - ca).abs() < 1e-12);
        assert!((d[2] - ca * ca).abs() < 1e-12);
        let sa2 = 0.8f64.sin().powi(2);
        assert!(form.t.max_abs_diff(&BlochVector::new(0.0, 0.0, -sa2)) < 1e-12);
    }

    #[test]
    fn canonical_form_symmetric_triple_case_translation() {
        let rng = CounterRng::new(51);
        for trial in 0..200u64 {
            let a = rng.uniform_in(trial * 8, 0.0, FRAC_PI_2);
            let p = params(
                a,
                a,
                a,
                rng.uniform(trial * 8 + 1),
                rng.uniform_in(trial * 8 + 2, 0.05, PI),
                rng.uniform_in(trial * 8 + 3, 0.0, 2.0 * PI),
            );
            let form = canonical_form(&p).unwrap();
            assert_eq!(form.case_label, CaseLabel::AlphaEqBeta);
            // Third column of U is the environment axis, so t = (0,0,−λ sin²α).
            let expected = -p.lambda * p.alpha.sin().powi(2);
            assert!((form.t.r3 - expected).abs() < 1e-12);
            assert!(form.t.r1.abs() < 1e-12 && form.t.r2.abs() < 1e-12);
        }
    }

    #[test]
    fn canonical_form_reconstructs_and_is_orthogonal_every_case() {
        let rng = CounterRng::new(52);
        for trial in 0..500u64 {
            let mut p = random_sweep_params(&rng, trial * 8);
            // Rotate through the cases: leave some draws generic, force others.
            match trial % 5 {
                0 => p.xi = 0.0,
                1 => p.beta = p.alpha,
                2 => p.xi = FRAC_PI_2,
                3 => p.beta = 0.0,
                _ => {}
            }
            let form = canonical_form(&p).unwrap();
            let m = affine_closed_form(&p).m;
            assert!(form.u.mul(&form.d).mul(&form.v).max_abs_diff(&m) < 1e-9);
            assert!(form.u.orthogonality_defect() < 1e-10);
            assert!(form.v.orthogonality_defect() < 1e-10);
            let d = form.d_diag();
            assert!(d.iter().all(|&x| x >= 0.0));
            if form.case_label.is_admissible() {
                assert!((d[0] - d[1]).abs() < 1e-10);
                assert!(form.t.r1.abs() < 1e-10 && form.t.r2.abs() < 1e-10);
            }
        }
    }

    #[test]
    fn canonical_form_matches_tabulated_diagonals() {
        let rng = CounterRng::new(53);
        for trial in 0..200u64 {
            let base = trial * 8;
            let a = rng.uniform_in(base, 0.0, FRAC_PI_2);
            let b = rng.uniform_in(base + 1, 0.0, FRAC_PI_2);
            let l = rng.uniform(base + 2);
            let (ca, sa) = (a.cos(), a.sin());
            let cb = b.cos();

            // Distinct-pair case ξ = π/2: (cosα·w, cosβ·w, cosα·cosβ).
            let p = params(
                a,
                b,
                a,
                l,
                FRAC_PI_2,
                rng.uniform_in(base + 3, 0.0, 2.0 * PI),
            );
            let w = (ca * ca + l * l * sa * sa).sqrt();
            let form = canonical_form(&p).unwrap();
            let d = form.d_diag();
            assert!((d[0] - ca * w).abs() < 1e-9, "{:?} d={:?}", p, d);
            assert!((d[1] - cb * w).abs() < 1e-9);
            assert!((d[2] - ca * cb).abs() < 1e-9);

            // Distinct-pair case β = 0: (w2, cosα·w2, cosα).
            let xi = rng.uniform_in(base + 4, 0.05, PI);
            let p = params(a, 0.0, a, l, xi, rng.uniform_in(base + 5, 0.0, 2.0 * PI));
            if classify_case(&p, tolerances::PARAM_PATTERN).unwrap() == CaseLabel::BetaZero {
                let sx = xi.sin();
                let w2 = (ca * ca + l * l * sx * sx * sa * sa).sqrt();
                let form = canonical_form(&p).unwrap();
                let d = form.d_diag();
                assert!((d[0] - w2).abs() < 1e-9, "{:?} d={:?}", p, d);
                assert!((d[1] - ca * w2).abs() < 1e-9);
                assert!((d[2] - ca).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn canonical_form_requires_symmetric_coupling() {
        assert!(canonical_form(&params(0.5, 0.3, 0.7, 0.5, 0.0, 0.0)).is_err());
    }

    #[test]
    fn damping_point_known_values() {
        // λ=0: (cosα·cosβ, cos²α, 0).
        let p = params(0.6, 0.9, 0.6, 0.0, 0.0, 0.0);
        let pt = ad_point(&p).unwrap();
        assert!((pt.x - 0.6f64.cos() * 0.9f64.cos()).abs() < 1e-15);
        assert!((pt.y - 0.6f64.cos().powi(2)).abs() < 1e-15);
        assert!(pt.z == 0.0);

        // Zero coupling on the system axis: the y-coordinate pins to 1.
        let p = params(0.0, 0.9, 0.0, 0.7, 0.0, 0.0);
        let pt = ad_point(&p).unwrap();
        let expected_x = (0.9f64.cos().powi(2) + 0.49 * 0.9f64.sin().powi(2)).sqrt();
        assert!((pt.x - expected_x).abs() < 1e-15);
        assert!((pt.y - 1.0).abs() < 1e-15);
        assert!(pt.z == 0.0);

        // Worked point: (π/3, 0, λ=1/2) → (1/2, 1/4, −3/8).
        let p = params(FRAC_PI_3, 0.0, FRAC_PI_3, 0.5, 0.0, 0.0);
        let pt = ad_point(&p).unwrap();
        assert!((pt.x - 0.5).abs() < 1e-15);
        assert!((pt.y - 0.25).abs() < 1e-15);
        assert!((pt.z + 0.375).abs() < 1e-15);
    }

    #[test]
    fn damping_point_rejects_nondegenerate_cases() {
        assert!(ad_point(&params(0.4, 0.9, 0.4, 0.5, FRAC_PI_2, 0.0)).is_err());
        assert!(ad_point(&params(0.4, 0.9, 0.4, 0.5, 0.6, 0.0)).is_err());
    }

    #[test]
    fn damping_point_agrees_with_canonical_form() {
        let rng = CounterRng::new(54);
        for trial in 0..300u64 {
            let mut p = random_sweep_params(&rng, trial * 8);
            if trial % 2 == 0 {
                p.xi = 0.0;
            } else {
                p.beta = p.alpha;
            }
            let pt = ad_point(&p).unwrap();
            let form = canonical_form(&p).unwrap();
            let d = form.d_diag();
            assert!((pt.x - d[0]).abs() < 1e-10);
            assert!((pt.y - d[2]).abs() < 1e-10);
            assert!((pt.z - form.t.r3).abs() < 1e-10);
        }
    }

    #[test]
    fn report_is_complete_for_symmetric_coupling() {
        let p = params(0.7, 0.3, 0.7, 0.5, 0.0, 0.0);
        let rep = EnvReport::for_params(&p).unwrap();
        assert_eq!(rep.case, Some(CaseLabel::XiZero));
        assert!(rep.d.is_some() && rep.t.is_some() && rep.ad_point.is_some());
        let text = serde_json::to_string(&rep).unwrap();
        for key in [
            "params",
            "\"m\"",
            "\"c\"",
            "\"f\"",
            "eigenvalues",
            "case",
            "\"d\"",
            "\"t\"",
            "ad_point",
        ] {
            assert!(text.contains(key), "missing {key} in {text}");
        }
        let back: EnvReport = serde_json::from_str(&text).unwrap();
        assert_eq!(back.case, rep.case);

        // Non-degenerate case: canonical data present, damping point absent.
        let p = params(0.7, 0.3, 0.7, 0.5, FRAC_PI_2, 0.2);
        let rep = EnvReport::for_params(&p).unwrap();
        assert_eq!(rep.case, Some(CaseLabel::XiHalfPi));
        assert!(rep.d.is_some() && rep.ad_point.is_none());
        let text = serde_json::to_string(&rep).unwrap();
        assert!(!text.contains("ad_point"));

        // Asymmetric coupling: only the universal fields.
        let p = params(0.7, 0.3, 0.9, 0.5, 0.0, 0.0);
        let rep = EnvReport::for_params(&p).unwrap();
        assert!(rep.case.is_none() && rep.d.is_none() && rep.t.is_none());
    }

    #[test]
    fn evolve_rejects_non_density_input() {
        let p = params(0.5, 0.5, 0.5, 0.5, 0.5, 0.5);
        assert!(evolve_density(&crate::qmath::pauli_x(), &p).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(EnvParams::new(0.0, 0.0, 0.0, -0.1, 0.0, 0.0).is_err());
        assert!(EnvParams::new(0.0, 0.0, 0.0, 1.1, 0.0, 0.0).is_err());
        assert!(EnvParams::new(f64::NAN, 0.0, 0.0, 0.5, 0.0, 0.0).is_err());
        assert!(EnvParams::new(0.0, 0.0, 0.0, 0.5, f64::INFINITY, 0.0).is_err());
    }
}
