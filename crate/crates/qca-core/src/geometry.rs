//! Channel-geometry engine: forward-samples the image of the four-parameter
//! damping family in `(x, y, z)` channel coordinates, integrates the
//! single-environment region by exact membership, estimates volumes by voxel
//! occupancy, derives the exact single-environment volume symbolically, and
//! exports point clouds for plotting.

use std::path::Path;

use base64::Engine as _;
use num_rational::Ratio;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::GadParams;
use crate::envsim::AdPoint;
use crate::error::{Error, Result};
use crate::rng::CounterRng;

/// Bounding box of the four-parameter damping image: `x ∈ [0,1]`,
/// `y ∈ [−1,1]`, `z ∈ [−1,1]`.
pub const GAD_BOUNDS: [[f64; 2]; 3] = [[0.0, 1.0], [-1.0, 1.0], [-1.0, 1.0]];

/// Bounding box of the single-environment region: `x ∈ [0,1]`, `y ∈ [0,1]`,
/// `z ∈ [−1,0]`.
pub const SINGLE_ENV_BOUNDS: [[f64; 2]; 3] = [[0.0, 1.0], [0.0, 1.0], [-1.0, 0.0]];

/// Default memory cap for voxel bitsets: 2 GiB.
pub const DEFAULT_MEM_CAP: u64 = 2 * 1024 * 1024 * 1024;

/// Substream tag for the damping-family sampler. Every command that draws
/// the family shares this stream, so a fixed seed yields the same parameter
/// sequence everywhere.
pub const STREAM_GAD: u64 = 1;

/// Substream tag for the single-environment surface sampler.
pub const STREAM_SINGLE_ENV: u64 = 2;

/// Attempts are generated in blocks of this size; each block is mapped in
/// parallel and consumed in attempt order, so the accepted prefix — and every
/// result derived from it — is independent of the worker count.
const SAMPLE_BLOCK: u64 = 1 << 16;

/// The `(x, y, z)` image point of one damping-family parameter set:
/// `x = ε₀√γ₀ + ε₂√γ₂`, `y = −1 + ε₀(1+γ₀) + ε₂(1+γ₂)`,
/// `z = ε₀(1−γ₀) − ε₂(1−γ₂)`.
pub fn gad_point(p: &GadParams) -> AdPoint {
    AdPoint::new(
        p.eps0 * p.gamma0.sqrt() + p.eps2 * p.gamma2.sqrt(),
        -1.0 + p.eps0 * (1.0 + p.gamma0) + p.eps2 * (1.0 + p.gamma2),
        p.eps0 * (1.0 - p.gamma0) - p.eps2 * (1.0 - p.gamma2),
    )
}

/// The parameter draw for attempt `i` of the seeded stream: four uniforms
/// from `[0,1]⁴` at counter slots `4i..4i+4`, accepted iff both feasibility
/// inequalities hold.
fn gad_params_at(rng: &CounterRng, attempt: u64) -> Option<GadParams> {
    let base = attempt.wrapping_mul(4);
    let eps0 = rng.uniform(base);
    let eps2 = rng.uniform(base + 1);
    let gamma0 = rng.uniform(base + 2);
    let gamma2 = rng.uniform(base + 3);
    if gamma0 * eps0 + eps2 <= 1.0 && eps0 + gamma2 * eps2 <= 1.0 {
        Some(GadParams {
            eps0,
            eps2,
            gamma0,
            gamma2,
        })
    } else {
        None
    }
}

/// Rejection sampler over the damping-family parameter set, tracking the
/// acceptance rate.
pub struct GadSampler {
    rng: CounterRng,
    next_attempt: u64,
    accepted: u64,
}

impl GadSampler {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: CounterRng::substream(seed, STREAM_GAD),
            next_attempt: 0,
            accepted: 0,
        }
    }

    /// Next accepted parameter set.
    pub fn next_params(&mut self) -> GadParams {
        loop {
            let attempt = self.next_attempt;
            self.next_attempt += 1;
            if let Some(p) = gad_params_at(&self.rng, attempt) {
                self.accepted += 1;
                return p;
            }
        }
    }

    pub fn attempts(&self) -> u64 {
        self.next_attempt
    }

    pub fn accepted(&self) -> u64 {
        self.accepted
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.next_attempt == 0 {
            0.0
        } else {
            self.accepted as f64 / self.next_attempt as f64
        }
    }
}

/// The `(x, y, z)` point of one single-environment parameter set,
/// `(c·√(cos²β + λ²sin²β), c², −λ(1−c²))` with `c = cos α`.
pub fn single_env_point(c: f64, beta: f64, lam: f64) -> Result<AdPoint> {
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!("c = {c} outside [0, 1]")));
    }
    if !(0.0..=std::f64::consts::FRAC_PI_2).contains(&beta) {
        return Err(Error::Domain(format!("beta = {beta} outside [0, pi/2]")));
    }
    if !(0.0..=1.0).contains(&lam) {
        return Err(Error::Domain(format!("lambda = {lam} outside [0, 1]")));
    }
    let (sb, cb) = beta.sin_cos();
    let shrink = (cb * cb + lam * lam * sb * sb).sqrt();
    Ok(AdPoint::new(c * shrink, c * c, -lam * (1.0 - c * c)))
}

/// Point `j` of the seeded single-environment stream: uniform draws of
/// `(c², β, λ)` at counter slots `3j..3j+3`, so the `(y, z)` footprint is
/// covered evenly.
fn single_env_point_at(rng: &CounterRng, j: u64) -> AdPoint {
    let base = j.wrapping_mul(3);
    let c = rng.uniform(base).sqrt();
    let beta = rng.uniform_in(base + 1, 0.0, std::f64::consts::FRAC_PI_2);
    let lam = rng.uniform(base + 2);
    single_env_point(c, beta, lam).expect("stream draws are in range by construction")
}

/// Exact membership test for the single-environment region. For `y ∈ (0,1)`
/// the slice at `(y, z)` is the interval `x ∈ [cλ, c]` with `c = √y` and
/// `λ = −z/(1−y)`; the `y ∈ {0, 1}` faces are the measure-zero limits
/// (`y = 0`: the segment `x = 0, z ∈ [−1,0]`; `y = 1`: the segment
/// `z = 0, x ∈ [0,1]`).
pub fn single_env_contains(q: &AdPoint) -> bool {
    let (x, y, z) = (q.x, q.y, q.z);
    if !(0.0..=1.0).contains(&y) || !(0.0..=1.0).contains(&x) {
        return false;
    }
    if y == 1.0 {
        return z == 0.0;
    }
    if z > 0.0 || z < -(1.0 - y) {
        return false;
    }
    let c = y.sqrt();
    let lam = -z / (1.0 - y);
    (c * lam..=c).contains(&x)
}

/// Occupancy grid over an axis-aligned box: a cube of `resolution³` cells
/// stored as a bitset, with rows padded to whole 64-bit words so dilation can
/// run word-parallel. Marking is idempotent; the estimate is
/// `occupied cells × cell volume`.
pub struct VoxelGrid {
    bounds: [[f64; 2]; 3],
    resolution: usize,
    words_per_row: usize,
    words: Vec<u64>,
    out_of_bounds: u64,
}

impl std::fmt::Debug for VoxelGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("VoxelGrid")
            .field("bounds", &self.bounds)
            .field("resolution", &self.resolution)
            .field("occupied_cells", &self.occupied_cells())
            .field("out_of_bounds", &self.out_of_bounds)
            .finish()
    }
}

impl VoxelGrid {
    pub fn new(bounds: [[f64; 2]; 3], resolution: usize, mem_cap: u64) -> Result<Self> {
        if resolution == 0 {
            return Err(Error::Domain("resolution must be positive".into()));
        }
        for [lo, hi] in bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::Domain(format!(
                    "invalid bounds interval [{lo}, {hi}]"
                )));
            }
        }
        let words_per_row = resolution.div_ceil(64);
        let words = resolution
            .checked_mul(resolution)
            .and_then(|a| a.checked_mul(words_per_row))
            .ok_or_else(|| Error::Resource("voxel grid size overflows".into()))?;
        let bytes = words as u64 * 8;
        if bytes > mem_cap {
            return Err(Error::Resource(format!(
                "voxel grid at resolution {resolution} needs {bytes} bytes, cap is {mem_cap}"
            )));
        }
        Ok(Self {
            bounds,
            resolution,
            words_per_row,
            words: vec![0u64; words],
            out_of_bounds: 0,
        })
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn bounds(&self) -> [[f64; 2]; 3] {
        self.bounds
    }

    pub fn cell_volume(&self) -> f64 {
        self.bounds
            .iter()
            .map(|[lo, hi]| (hi - lo) / self.resolution as f64)
            .product()
    }

    fn cell_of(&self, p: [f64; 3]) -> Option<[usize; 3]> {
        let mut idx = [0usize; 3];
        for a in 0..3 {
            let [lo, hi] = self.bounds[a];
            let x = p[a];
            if !x.is_finite() || x < lo || x > hi {
                return None;
            }
            // The upper face belongs to the last cell.
            let i = (((x - lo) / (hi - lo)) * self.resolution as f64).floor() as usize;
            idx[a] = i.min(self.resolution - 1);
        }
        Some(idx)
    }

    fn word_and_bit(&self, [ix, iy, iz]: [usize; 3]) -> (usize, u64) {
        let word = (iz * self.resolution + iy) * self.words_per_row + ix / 64;
        (word, 1u64 << (ix % 64))
    }

    /// Mark the cell containing `p`; out-of-bounds points are counted, not
    /// dropped silently. Returns whether the point was in bounds.
    pub fn mark(&mut self, p: [f64; 3]) -> bool {
        match self.cell_of(p) {
            Some(idx) => {
                let (w, b) = self.word_and_bit(idx);
                self.words[w] |= b;
                true
            }
            None => {
                self.out_of_bounds += 1;
                false
            }
        }
    }

    /// Whether the cell containing `p` is occupied (false out of bounds).
    pub fn contains(&self, p: [f64; 3]) -> bool {
        match self.cell_of(p) {
            Some(idx) => {
                let (w, b) = self.word_and_bit(idx);
                self.words[w] & b != 0
            }
            None => false,
        }
    }

    pub fn occupied_cells(&self) -> u64 {
        self.words.iter().map(|w| w.count_ones() as u64).sum()
    }

    pub fn out_of_bounds(&self) -> u64 {
        self.out_of_bounds
    }

    pub fn volume(&self) -> f64 {
        self.occupied_cells() as f64 * self.cell_volume()
    }

    /// Bitwise union with a grid of identical shape (worker merge).
    pub fn union(&mut self, other: &Self) -> Result<()> {
        if self.resolution != other.resolution || self.bounds != other.bounds {
            return Err(Error::Shape("union: grids have different shapes".into()));
        }
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a |= b;
        }
        self.out_of_bounds += other.out_of_bounds;
        Ok(())
    }

    fn tail_mask(resolution: usize) -> u64 {
        match resolution % 64 {
            0 => !0u64,
            r => (1u64 << r) - 1,
        }
    }

    /// Grow the occupied set by one cell in every direction (3×3×3
    /// neighborhood), as three separable in-place passes.
    pub fn dilate_one(&mut self) {
        self.dilate_x();
        self.dilate_y();
        self.dilate_z();
    }

    fn dilate_x(&mut self) {
        let wpr = self.words_per_row;
        let tail = Self::tail_mask(self.resolution);
        let mut orig = vec![0u64; wpr];
        for row_start in (0..self.words.len()).step_by(wpr) {
            orig.copy_from_slice(&self.words[row_start..row_start + wpr]);
            for w in 0..wpr {
                let cur = orig[w];
                let from_left = cur << 1 | if w > 0 { orig[w - 1] >> 63 } else { 0 };
                let from_right = cur >> 1 | if w + 1 < wpr { orig[w + 1] << 63 } else { 0 };
                let mut v = cur | from_left | from_right;
                if w == wpr - 1 {
                    v &= tail;
                }
                self.words[row_start + w] = v;
            }
        }
    }

    fn dilate_y(&mut self) {
        let r = self.resolution;
        let wpr = self.words_per_row;
        let slab = r * wpr;
        let mut prev = vec![0u64; wpr];
        let mut cur = vec![0u64; wpr];
        for z in 0..r {
            let base = z * slab;
            prev.fill(0);
            for y in 0..r {
                let rs = base + y * wpr;
                cur.copy_from_slice(&self.words[rs..rs + wpr]);
                for w in 0..wpr {
                    let next = if y + 1 < r {
                        self.words[rs + wpr + w]
                    } else {
                        0
                    };
                    self.words[rs + w] = cur[w] | prev[w] | next;
                }
                std::mem::swap(&mut prev, &mut cur);
            }
        }
    }

    fn dilate_z(&mut self) {
        let r = self.resolution;
        let slab = r * self.words_per_row;
        let mut prev = vec![0u64; slab];
        let mut cur = vec![0u64; slab];
        for z in 0..r {
            let base = z * slab;
            cur.copy_from_slice(&self.words[base..base + slab]);
            for w in 0..slab {
                let next = if z + 1 < r {
                    self.words[base + slab + w]
                } else {
                    0
                };
                self.words[base + w] = cur[w] | prev[w] | next;
            }
            std::mem::swap(&mut prev, &mut cur);
        }
    }

    /// Serializable snapshot with the bitset base64-encoded (little-endian
    /// word bytes).
    pub fn to_record(&self) -> GridRecord {
        let mut bytes = Vec::with_capacity(self.words.len() * 8);
        for w in &self.words {
            bytes.extend_from_slice(&w.to_le_bytes());
        }
        GridRecord {
            bounds: self.bounds,
            resolution: self.resolution,
            bitset: base64::engine::general_purpose::STANDARD.encode(bytes),
        }
    }

    pub fn from_record(rec: &GridRecord) -> Result<Self> {
        let mut grid = Self::new(rec.bounds, rec.resolution, u64::MAX)?;
        let bytes = base64::engine::general_purpose::STANDARD
            .decode(&rec.bitset)
            .map_err(|e| Error::Validation(format!("bitset decode failed: {e}")))?;
        if bytes.len() != grid.words.len() * 8 {
            return Err(Error::Shape(format!(
                "bitset has {} bytes, expected {}",
                bytes.len(),
                grid.words.len() * 8
            )));
        }
        for (i, chunk) in bytes.chunks_exact(8).enumerate() {
            grid.words[i] = u64::from_le_bytes(chunk.try_into().unwrap());
        }
        Ok(grid)
    }
}

/// JSON form of an occupancy grid: `{ bounds, resolution, bitset }`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GridRecord {
    pub bounds: [[f64; 2]; 3],
    pub resolution: usize,
    pub bitset: String,
}

/// An exact rational value with its float rendering.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactFraction {
    pub numerator: i64,
    pub denominator: i64,
    pub value: f64,
}

impl From<Ratio<i64>> for ExactFraction {
    fn from(r: Ratio<i64>) -> Self {
        Self {
            numerator: *r.numer(),
            denominator: *r.denom(),
            value: *r.numer() as f64 / *r.denom() as f64,
        }
    }
}

/// One volume estimate in a uniform JSON shape shared by all estimators.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VolumeEstimate {
    pub region: String,
    pub mode: String,
    pub estimate: f64,
    pub resolution: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub acceptance_rate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub occupied_cells: Option<u64>,
    pub out_of_bounds: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub inflated_estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subsample: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub exact: Option<ExactFraction>,
}

struct ForwardFill {
    attempts: u64,
}

/// Mark the first `samples` accepted points of the seeded damping stream
/// into `grid` (and optionally a second, finer grid). Attempts are consumed
/// in order, so the marked set depends only on `(seed, samples)`.
fn fill_gad_forward(
    grid: &mut VoxelGrid,
    mut fine: Option<&mut VoxelGrid>,
    samples: u64,
    seed: u64,
) -> ForwardFill {
    let rng = CounterRng::substream(seed, STREAM_GAD);
    let mut accepted = 0u64;
    let mut attempts = 0u64;
    let mut base = 0u64;
    while accepted < samples {
        let points: Vec<Option<AdPoint>> = (base..base + SAMPLE_BLOCK)
            .into_par_iter()
            .map(|i| gad_params_at(&rng, i).map(|p| gad_point(&p)))
            .collect();
        for (k, opt) in points.iter().enumerate() {
            if let Some(pt) = opt {
                let arr = pt.as_array();
                grid.mark(arr);
                if let Some(f) = fine.as_deref_mut() {
                    f.mark(arr);
                }
                accepted += 1;
                if accepted == samples {
                    attempts = base + k as u64 + 1;
                    break;
                }
            }
        }
        base += SAMPLE_BLOCK;
    }
    ForwardFill { attempts }
}

/// Forward-sampled voxel estimate of the damping-family image volume.
/// Returns the report and the occupancy grid (for export or containment).
/// The report also carries a half-cell-inflated bound from a doubled grid
/// dilated by one fine cell, bracketing the voxelization bias from above.
pub fn gad_volume(
    samples: u64,
    resolution: usize,
    seed: u64,
    mem_cap: u64,
) -> Result<(VolumeEstimate, VoxelGrid)> {
    let mut grid = VoxelGrid::new(GAD_BOUNDS, resolution, mem_cap)?;
    let mut fine = VoxelGrid::new(GAD_BOUNDS, resolution * 2, mem_cap)?;
    let fill = fill_gad_forward(&mut grid, Some(&mut fine), samples, seed);
    fine.dilate_one();
    let report = VolumeEstimate {
        region: "gad".into(),
        mode: "forward".into(),
        estimate: grid.volume(),
        resolution,
        samples: Some(samples),
        attempts: Some(fill.attempts),
        acceptance_rate: Some(if fill.attempts == 0 {
            0.0
        } else {
            samples as f64 / fill.attempts as f64
        }),
        seed: Some(seed),
        occupied_cells: Some(grid.occupied_cells()),
        out_of_bounds: grid.out_of_bounds(),
        inflated_estimate: Some(fine.volume()),
        subsample: None,
        exact: None,
    };
    Ok((report, grid))
}

/// Integrate a membership predicate over a box by cell-center evaluation,
/// optionally refined with 2×2×2 subsampling (each cell then contributes the
/// satisfied fraction of its eight subcenters). Returns the volume, the
/// occupied-cell count (center mode only), and the grid (center mode only).
pub fn membership_volume<F>(
    bounds: [[f64; 2]; 3],
    resolution: usize,
    subsample: bool,
    mem_cap: u64,
    pred: F,
) -> Result<(f64, Option<u64>, Option<VoxelGrid>)>
where
    F: Fn(&AdPoint) -> bool + Sync,
{
    let mut grid = VoxelGrid::new(bounds, resolution, mem_cap)?;
    let r = resolution;
    let widths = [
        (bounds[0][1] - bounds[0][0]) / r as f64,
        (bounds[1][1] - bounds[1][0]) / r as f64,
        (bounds[2][1] - bounds[2][0]) / r as f64,
    ];
    let coord =
        |axis: usize, i: usize, frac: f64| bounds[axis][0] + (i as f64 + frac) * widths[axis];
    if subsample {
        // Fractional occupancy per slab, summed in slab order for
        // worker-count independence.
        let slab_sums: Vec<f64> = (0..r)
            .into_par_iter()
            .map(|iz| {
                let mut hits = 0u64;
                for iy in 0..r {
                    for ix in 0..r {
                        for dz in [0.25, 0.75] {
                            for dy in [0.25, 0.75] {
                                for dx in [0.25, 0.75] {
                                    let q = AdPoint::new(
                                        coord(0, ix, dx),
                                        coord(1, iy, dy),
                                        coord(2, iz, dz),
                                    );
                                    if pred(&q) {
                                        hits += 1;
                                    }
                                }
                            }
                        }
                    }
                }
                hits as f64 / 8.0
            })
            .collect();
        let cells: f64 = slab_sums.iter().sum();
        Ok((cells * grid.cell_volume(), None, None))
    } else {
        let wpr = grid.words_per_row;
        let slab_words = r * wpr;
        grid.words
            .par_chunks_mut(slab_words)
            .enumerate()
            .for_each(|(iz, slab)| {
                for iy in 0..r {
                    for ix in 0..r {
                        let q =
                            AdPoint::new(coord(0, ix, 0.5), coord(1, iy, 0.5), coord(2, iz, 0.5));
                        if pred(&q) {
                            slab[iy * wpr + ix / 64] |= 1u64 << (ix % 64);
                        }
                    }
                }
            });
        let occupied = grid.occupied_cells();
        Ok((
            occupied as f64 * grid.cell_volume(),
            Some(occupied),
            Some(grid),
        ))
    }
}

/// Membership-mode voxel estimate of the single-environment region volume.
pub fn single_env_volume_membership(
    resolution: usize,
    subsample: bool,
    mem_cap: u64,
) -> Result<(VolumeEstimate, Option<VoxelGrid>)> {
    let (volume, occupied, grid) = membership_volume(
        SINGLE_ENV_BOUNDS,
        resolution,
        subsample,
        mem_cap,
        single_env_contains,
    )?;
    let report = VolumeEstimate {
        region: "single_env".into(),
        mode: "membership".into(),
        estimate: volume,
        resolution,
        samples: None,
        attempts: None,
        acceptance_rate: None,
        seed: None,
        occupied_cells: occupied,
        out_of_bounds: 0,
        inflated_estimate: None,
        subsample: Some(subsample),
        exact: Some(single_env_volume_analytic().into()),
    };
    Ok((report, grid))
}

/// Minimal univariate polynomial over exact rationals, enough to integrate
/// the region parametrization symbolically.
#[derive(Clone, Debug)]
struct RatPoly(Vec<Ratio<i64>>);

impl RatPoly {
    fn new(coeffs: &[(i64, i64)]) -> Self {
        Self(coeffs.iter().map(|&(n, d)| Ratio::new(n, d)).collect())
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = vec![Ratio::new(0, 1); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    fn integral_01(&self) -> Ratio<i64> {
        self.0
            .iter()
            .enumerate()
            .map(|(i, c)| c / Ratio::new(i as i64 + 1, 1))
            .sum()
    }
}

/// Exact volume of the single-environment region, derived from its
/// parametrization rather than hard-coded. The slice at fixed `(c, λ)` has
/// width `c(1−λ)` in `x`, and the `(c, λ) → (y, z)` change of variables has
/// Jacobian `|det| = 2c(1−c²)`, so the volume is the product of
/// `∫₀¹ c·2c(1−c²) dc` and `∫₀¹ (1−λ) dλ`, integrated symbolically.
pub fn single_env_volume_analytic() -> Ratio<i64> {
    let width_c = RatPoly::new(&[(0, 1), (1, 1)]); // c
    let jac_c = RatPoly::new(&[(0, 1), (2, 1), (0, 1), (-2, 1)]); // 2c − 2c³
    let width_lam = RatPoly::new(&[(1, 1), (-1, 1)]); // 1 − λ
    width_c.mul(&jac_c).integral_01() * width_lam.integral_01()
}

/// Ratio of the exact single-environment volume to the forward-sampled
/// damping-family volume estimate.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RatioReport {
    pub ratio: f64,
    pub single_env_exact: ExactFraction,
    pub documented_bound: f64,
    pub below_documented_bound: bool,
    pub gad: VolumeEstimate,
}

pub fn volume_ratio(
    samples: u64,
    resolution: usize,
    seed: u64,
    mem_cap: u64,
) -> Result<RatioReport> {
    let (gad, _) = gad_volume(samples, resolution, seed, mem_cap)?;
    let exact: ExactFraction = single_env_volume_analytic().into();
    let ratio = exact.value / gad.estimate;
    Ok(RatioReport {
        ratio,
        single_env_exact: exact,
        documented_bound: 0.375,
        below_documented_bound: ratio < 0.375,
        gad,
    })
}

/// Containment of the single-environment region in the sampled
/// damping-family image.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContainmentReport {
    pub fraction: f64,
    pub contained: u64,
    pub samples: u64,
    pub gad_samples: u64,
    pub gad_attempts: u64,
    pub resolution: usize,
    pub seed: u64,
    pub dilation: u32,
}

/// Build the forward-sampled occupancy grid of the damping image, dilate it
/// by one voxel (absorbing voxel-boundary false negatives), then report the
/// fraction of seeded single-environment samples landing in occupied cells.
/// Requires enough forward samples and a coarse enough grid for occupancy to
/// be meaningful.
pub fn containment_check(
    n_samples: u64,
    resolution: usize,
    gad_samples: u64,
    seed: u64,
    mem_cap: u64,
) -> Result<ContainmentReport> {
    if gad_samples < 10_000_000 {
        return Err(Error::Validation(format!(
            "containment needs at least 10000000 forward samples to fill the grid; got {gad_samples}"
        )));
    }
    if resolution > 200 {
        return Err(Error::Validation(format!(
            "containment resolution is capped at 200 so cells stay fillable; got {resolution}"
        )));
    }
    let mut grid = VoxelGrid::new(GAD_BOUNDS, resolution, mem_cap)?;
    let fill = fill_gad_forward(&mut grid, None, gad_samples, seed);
    grid.dilate_one();
    Ok(containment_against(
        &grid,
        n_samples,
        seed,
        gad_samples,
        fill.attempts,
    ))
}

/// Containment fraction of seeded single-environment samples against an
/// already-built (and already-dilated) occupancy grid.
pub(crate) fn containment_against(
    grid: &VoxelGrid,
    n_samples: u64,
    seed: u64,
    gad_samples: u64,
    gad_attempts: u64,
) -> ContainmentReport {
    let rng = CounterRng::substream(seed, STREAM_SINGLE_ENV);
    let contained: u64 = (0..n_samples)
        .into_par_iter()
        .map(|j| grid.contains(single_env_point_at(&rng, j).as_array()) as u64)
        .sum();
    ContainmentReport {
        fraction: if n_samples == 0 {
            0.0
        } else {
            contained as f64 / n_samples as f64
        },
        contained,
        samples: n_samples,
        gad_samples,
        gad_attempts,
        resolution: grid.resolution(),
        seed,
        dilation: 1,
    }
}

/// Generation metadata carried with every exported point cloud.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub region: String,
    pub samples: u64,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    pub ranges: String,
    pub version: String,
}

/// A sampled set of image points plus how it was produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointCloud {
    pub provenance: Provenance,
    pub points: Vec<AdPoint>,
}

/// The first `samples` accepted image points of the seeded damping stream,
/// in attempt order.
pub fn gad_cloud(samples: u64, seed: u64) -> PointCloud {
    let rng = CounterRng::substream(seed, STREAM_GAD);
    let mut points = Vec::with_capacity(samples as usize);
    let mut attempts = 0u64;
    let mut base = 0u64;
    while (points.len() as u64) < samples {
        let block: Vec<Option<AdPoint>> = (base..base + SAMPLE_BLOCK)
            .into_par_iter()
            .map(|i| gad_params_at(&rng, i).map(|p| gad_point(&p)))
            .collect();
        for (k, opt) in block.iter().enumerate() {
            if let Some(pt) = opt {
                points.push(*pt);
                if points.len() as u64 == samples {
                    attempts = base + k as u64 + 1;
                    break;
                }
            }
        }
        base += SAMPLE_BLOCK;
    }
    PointCloud {
        provenance: Provenance {
            region: "gad".into(),
            samples,
            seed,
            attempts: Some(attempts),
            ranges: "eps0,eps2,gamma0,gamma2 ~ U[0,1]^4 rejected to feasibility".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        points,
    }
}

/// `samples` seeded single-environment surface points, in stream order.
pub fn single_env_cloud(samples: u64, seed: u64) -> PointCloud {
    let rng = CounterRng::substream(seed, STREAM_SINGLE_ENV);
    let points: Vec<AdPoint> = (0..samples)
        .into_par_iter()
        .map(|j| single_env_point_at(&rng, j))
        .collect();
    PointCloud {
        provenance: Provenance {
            region: "single_env".into(),
            samples,
            seed,
            attempts: None,
            ranges: "c^2 ~ U[0,1], beta ~ U[0,pi/2], lambda ~ U[0,1]".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        },
        points,
    }
}

/// Cloud file format.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CloudFormat {
    Csv,
    Json,
}

/// Write a point cloud: CSV with an `x,y,z` header and 17-significant-digit
/// floats, or JSON including the provenance manifest.
pub fn export_cloud(cloud: &PointCloud, path: &Path, format: CloudFormat) -> Result<()> {
    let body = match format {
        CloudFormat::Csv => {
            let mut s = String::with_capacity(cloud.points.len() * 64 + 8);
            s.push_str("x,y,z\n");
            for p in &cloud.points {
                s.push_str(&format!("{:.16e},{:.16e},{:.16e}\n", p.x, p.y, p.z));
            }
            s
        }
        CloudFormat::Json => {
            let mut s = serde_json::to_string(cloud)?;
            s.push('\n');
            s
        }
    };
    std::fs::write(path, body).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })
}

/// Read back a JSON cloud written by [`export_cloud`].
pub fn import_cloud(path: &Path) -> Result<PointCloud> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        source: e,
    })?;
    Ok(serde_json::from_str(&text)?)
}
