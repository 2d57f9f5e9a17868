//! Self-check battery: re-runs a condensed version of every property the
//! library is built on — closed forms against the simulator, eigenvalue and
//! factorization formulas against numeric linear algebra, the damping-family
//! consistency checks, region membership, and stream reproducibility — and
//! reports residuals per check.

use std::f64::consts::{FRAC_PI_2, PI};

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::channels::{gad, gad_affine_closed, kraus_to_affine};
use crate::envsim::{
    affine_closed_form, canonical_form, charpoly_coeffs, eigen_alpha_eq_gamma, eigen_xi_zero,
    evolve, EnvParams, PureQubit,
};
use crate::geometry::{
    gad_point, membership_volume, single_env_cloud, single_env_contains,
    single_env_volume_analytic, GadSampler,
};
use crate::qmath::{density_to_bloch, symmetric_eigen3};
use crate::rng::CounterRng;
use crate::Result;

/// Outcome of one named property check.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CheckReport {
    pub name: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CheckReport {
    fn bounded(name: &str, samples: u64, residual: f64, tolerance: f64) -> Self {
        Self {
            name: name.into(),
            passed: residual <= tolerance,
            samples: Some(samples),
            residual: Some(residual),
            tolerance: Some(tolerance),
            detail: None,
        }
    }

    fn flag(name: &str, passed: bool, detail: Option<String>) -> Self {
        Self {
            name: name.into(),
            passed,
            samples: None,
            residual: None,
            tolerance: None,
            detail,
        }
    }
}

/// Aggregate result of the battery.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ValidationReport {
    pub seed: u64,
    pub quick: bool,
    pub passed: bool,
    pub checks: Vec<CheckReport>,
}

const AXIS_STATES: [(f64, f64); 6] = [
    (FRAC_PI_2, 0.0),
    (FRAC_PI_2, PI),
    (FRAC_PI_2, -FRAC_PI_2),
    (FRAC_PI_2, FRAC_PI_2),
    (0.0, 0.0),
    (PI, 0.0),
];

fn generic_params(rng: &CounterRng, base: u64) -> EnvParams {
    EnvParams::new(
        rng.uniform_in(base, -PI, PI),
        rng.uniform_in(base + 1, -PI, PI),
        rng.uniform_in(base + 2, -PI, PI),
        rng.uniform(base + 3),
        rng.uniform_in(base + 4, -PI, PI),
        rng.uniform_in(base + 5, -2.0 * PI, 2.0 * PI),
    )
    .expect("draws are in range")
}

fn symmetric_params(rng: &CounterRng, base: u64) -> EnvParams {
    let alpha = rng.uniform_in(base, 0.0, FRAC_PI_2);
    EnvParams::new(
        alpha,
        rng.uniform_in(base + 1, 0.0, FRAC_PI_2),
        alpha,
        rng.uniform(base + 2),
        rng.uniform_in(base + 3, 0.0, PI),
        rng.uniform_in(base + 4, 0.0, 2.0 * PI),
    )
    .expect("draws are in range")
}

fn xi_zero_params(rng: &CounterRng, base: u64) -> EnvParams {
    let alpha = rng.uniform_in(base, 0.0, FRAC_PI_2);
    EnvParams::new(
        alpha,
        rng.uniform_in(base + 1, 0.0, FRAC_PI_2),
        alpha,
        rng.uniform(base + 2),
        0.0,
        rng.uniform_in(base + 3, 0.0, 2.0 * PI),
    )
    .expect("draws are in range")
}

fn alpha_eq_beta_params(rng: &CounterRng, base: u64) -> EnvParams {
    let alpha = rng.uniform_in(base, 0.0, FRAC_PI_2);
    EnvParams::new(
        alpha,
        alpha,
        alpha,
        rng.uniform(base + 1),
        rng.uniform_in(base + 2, 0.0, PI),
        rng.uniform_in(base + 3, 0.0, 2.0 * PI),
    )
    .expect("draws are in range")
}

fn sorted_desc(mut v: [f64; 3]) -> [f64; 3] {
    v.sort_by(|a, b| b.partial_cmp(a).unwrap());
    v
}

fn closed_form_check(seed: u64, n: u64) -> Result<CheckReport> {
    let rng = CounterRng::substream(seed, 101);
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = generic_params(&rng, 8 * i);
        let closed = affine_closed_form(&p);
        for (theta, phi) in AXIS_STATES {
            let s = PureQubit::new(theta, phi)?;
            let simulated = density_to_bloch(&evolve(&s, &p)?)?;
            let predicted = closed.apply(&s.bloch())?;
            worst = worst.max(predicted.max_abs_diff(&simulated));
        }
    }
    Ok(CheckReport::bounded(
        "closed_form_matches_simulation",
        n,
        worst,
        1e-10,
    ))
}

fn charpoly_check(seed: u64, n: u64) -> Result<CheckReport> {
    let rng = CounterRng::substream(seed, 102);
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = generic_params(&rng, 8 * i);
        let f = charpoly_coeffs(&p);
        let evs = symmetric_eigen3(&affine_closed_form(&p).m.gram())?;
        for ev in evs {
            worst = worst.max(f.eval(ev).abs());
        }
    }
    Ok(CheckReport::bounded(
        "characteristic_cubic_vanishes_at_numeric_eigenvalues",
        n,
        worst,
        1e-9,
    ))
}

fn eigen_formula_check<G>(name: &str, seed: u64, tag: u64, n: u64, draw: G) -> Result<CheckReport>
where
    G: Fn(&CounterRng, u64) -> EnvParams,
{
    let rng = CounterRng::substream(seed, tag);
    let mut worst = 0.0f64;
    for i in 0..n {
        let p = draw(&rng, 8 * i);
        let closed = if name.contains("decoupled") {
            eigen_xi_zero(&p)?
        } else {
            eigen_alpha_eq_gamma(&p)?
        };
        let closed = sorted_desc([closed.0, closed.1, closed.2]);
        let numeric = symmetric_eigen3(&affine_closed_form(&p).m.gram())?;
        for k in 0..3 {
            worst = worst.max((closed[k] - numeric[k]).abs());
        }
    }
    Ok(CheckReport::bounded(name, n, worst, 1e-9))
}

fn factorization_checks<G>(
    prefix: &str,
    seed: u64,
    tag: u64,
    n: u64,
    draw: G,
) -> Result<[CheckReport; 2]>
where
    G: Fn(&CounterRng, u64) -> EnvParams,
{
    let rng = CounterRng::substream(seed, tag);
    let mut worst_reconstruction = 0.0f64;
    let mut worst_structure = 0.0f64;
    for i in 0..n {
        let p = draw(&rng, 8 * i);
        let affine = affine_closed_form(&p);
        let form = canonical_form(&p)?;
        let d = form.d_diag();
        let residual = form
            .u
            .mul(&crate::qmath::RealMatrix3::diag(d))
            .mul(&form.v)
            .max_abs_diff(&affine.m);
        worst_reconstruction = worst_reconstruction.max(residual);
        // Orthogonality of the factors plus the admissibility structure: a
        // degenerate leading pair and a translation along the third axis only.
        let ortho = form
            .u
            .orthogonality_defect()
            .max(form.v.orthogonality_defect());
        let degenerate_pair = (d[0] - d[1]).abs();
        let translation = form.t.r1.abs().max(form.t.r2.abs());
        worst_structure = worst_structure
            .max(ortho)
            .max(degenerate_pair)
            .max(translation);
    }
    Ok([
        CheckReport::bounded(
            &format!("{prefix}_reconstruction"),
            n,
            worst_reconstruction,
            1e-9,
        ),
        CheckReport::bounded(&format!("{prefix}_structure"), n, worst_structure, 1e-10),
    ])
}

fn damping_consistency_checks(seed: u64, n: u64) -> Result<[CheckReport; 2]> {
    let mut sampler = GadSampler::new(seed.wrapping_add(105));
    let mut worst_affine = 0.0f64;
    let mut worst_physical = 0.0f64;
    for _ in 0..n {
        let p = sampler.next_params();
        let channel = gad(&p)?;
        let from_kraus = kraus_to_affine(&channel)?;
        let closed = gad_affine_closed(&p);
        worst_affine = worst_affine.max(closed.max_abs_diff(&from_kraus));
        // Image identities: the point coordinates are the affine invariants.
        let pt = gad_point(&p);
        worst_affine = worst_affine.max((closed.m.0[0][0] - pt.x).abs());
        worst_affine = worst_affine.max((closed.m.0[1][1] - pt.x).abs());
        worst_affine = worst_affine.max((closed.m.0[2][2] - pt.y).abs());
        worst_affine = worst_affine.max((closed.c.r3 - pt.z).abs());
        worst_physical = worst_physical.max(channel.trace_defect());
        worst_physical = worst_physical.max((-channel.choi_min_eigenvalue()?).max(0.0));
    }
    Ok([
        CheckReport::bounded("damping_family_affine_agreement", n, worst_affine, 1e-12),
        CheckReport::bounded("damping_family_physicality", n, worst_physical, 1e-10),
    ])
}

fn membership_check(seed: u64, n: u64) -> CheckReport {
    let cloud = single_env_cloud(n, seed.wrapping_add(106));
    let escaped = cloud
        .points
        .iter()
        .filter(|p| !single_env_contains(p))
        .count();
    CheckReport {
        name: "surface_points_inside_region".into(),
        passed: escaped == 0,
        samples: Some(n),
        residual: Some(escaped as f64),
        tolerance: Some(0.0),
        detail: None,
    }
}

fn analytic_volume_check() -> CheckReport {
    let v = single_env_volume_analytic();
    CheckReport::flag(
        "analytic_volume_is_exactly_2_over_15",
        v == Ratio::new(2, 15),
        Some(format!("{}/{}", v.numer(), v.denom())),
    )
}

fn unit_cube_check() -> Result<CheckReport> {
    let cube = [[0.0, 1.0], [0.0, 1.0], [0.0, 1.0]];
    let (center, _, _) = membership_volume(cube, 21, false, u64::MAX, |_| true)?;
    let (sub, _, _) = membership_volume(cube, 21, true, u64::MAX, |_| true)?;
    let worst = (center - 1.0).abs().max((sub - 1.0).abs());
    Ok(CheckReport::bounded(
        "unit_cube_membership_volume",
        2,
        worst,
        1e-12,
    ))
}

fn reproducibility_check(seed: u64) -> CheckReport {
    let a = CounterRng::substream(seed, 42);
    let b = CounterRng::substream(seed, 42);
    let c = CounterRng::substream(seed, 43);
    let same = (0..64).all(|k| a.raw(k) == b.raw(k));
    let distinct = (0..64).any(|k| a.raw(k) != c.raw(k));
    let mut s1 = GadSampler::new(seed);
    let mut s2 = GadSampler::new(seed);
    let sampler_same = (0..16).all(|_| s1.next_params() == s2.next_params());
    CheckReport::flag(
        "streams_are_reproducible_and_tagged",
        same && distinct && sampler_same,
        None,
    )
}

/// Run the full battery (or the reduced `quick` version) with draws derived
/// from `seed`. The report's `passed` is the conjunction of every check.
pub fn run_all(seed: u64, quick: bool) -> Result<ValidationReport> {
    let n: u64 = if quick { 100 } else { 1000 };
    let mut checks = vec![
        closed_form_check(seed, n)?,
        charpoly_check(seed, n)?,
        eigen_formula_check(
            "symmetric_coupling_eigenvalues_match_numeric",
            seed,
            103,
            n,
            symmetric_params,
        )?,
        eigen_formula_check(
            "decoupled_phase_eigenvalues_match_numeric",
            seed,
            104,
            n,
            xi_zero_params,
        )?,
    ];
    checks.extend(factorization_checks(
        "factorization_xi_zero",
        seed,
        107,
        n,
        xi_zero_params,
    )?);
    checks.extend(factorization_checks(
        "factorization_alpha_eq_beta",
        seed,
        108,
        n,
        alpha_eq_beta_params,
    )?);
    checks.extend(damping_consistency_checks(seed, n)?);
    checks.extend([
        membership_check(seed, n),
        analytic_volume_check(),
        unit_cube_check()?,
        reproducibility_check(seed),
    ]);
    let passed = checks.iter().all(|c| c.passed);
    Ok(ValidationReport {
        seed,
        quick,
        passed,
        checks,
    })
}
