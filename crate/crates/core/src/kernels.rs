//! Construction and verification of partitions of unity, local-means kernels,
//! and analyzing vectors: moment / decay / smoothness-weight checkers and the
//! admissibility constant of the continuous wavelet transform.
//!
//! Kernel metadata (vanishing-moment count, smoothness proxy, decay order,
//! band) is always measured by the checkers here, never taken on trust.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::fourier;
use crate::grid::{GridSpec, SampledSignal};

/// Numerical zero threshold for moment/derivative vanishing, relative to the
/// kernel's weighted L1 mass.
pub const MOMENT_ZERO_TOL: f64 = 1e-8;

const FREQ_BAND_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum KernelRole {
    /// Low-pass / Phi0-type kernel with nonvanishing transform at the origin.
    LowPass,
    /// Band-pass / Phi-type kernel with vanishing moments.
    BandPass,
    /// Wavelet analyzing vector.
    Wavelet,
}

/// Verified kernel metadata; fields are outputs of the checkers below.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct KernelMeta {
    /// Count of verified vanishing moments (largest vanishing order + 1).
    pub moment_order: usize,
    /// Smoothness-weight proxy: largest K on the test lattice for which the
    /// weighted transform integral stabilizes.
    pub smoothness: f64,
    /// Largest N <= 8 with a moderate decay constant.
    pub decay_order: u32,
    /// Measured band parameter (0 when the condphi-style band is empty).
    pub band: f64,
    pub role: KernelRole,
}

/// A local-means / analyzing kernel held in both representations.
#[derive(Debug, Clone)]
pub struct Kernel {
    grid: GridSpec,
    space: Vec<Complex64>,
    freq: Vec<Complex64>,
    meta: KernelMeta,
    consistency: f64,
}

impl Kernel {
    /// Build from space samples; frequency samples are the discrete transform
    /// (consistent by construction).
    pub fn from_space(grid: GridSpec, space: Vec<Complex64>, role: KernelRole) -> Result<Self> {
        check_finite(&space)?;
        let freq = fourier::space_to_freq(&grid, &space);
        Ok(Self::assemble(grid, space, freq, role, 0.0))
    }

    /// Build from frequency samples; space samples via the inverse transform.
    pub fn from_freq(grid: GridSpec, freq: Vec<Complex64>, role: KernelRole) -> Result<Self> {
        check_finite(&freq)?;
        let space = fourier::freq_to_space(&grid, &freq);
        Ok(Self::assemble(grid, space, freq, role, 0.0))
    }

    /// Sample both closed forms and verify they are mutually consistent under
    /// the discrete transform within 1e-8.
    pub fn from_closed_forms(
        grid: GridSpec,
        space_fn: impl Fn([f64; 2]) -> Complex64,
        freq_fn: impl Fn([f64; 2]) -> Complex64,
        role: KernelRole,
    ) -> Result<Self> {
        let space: Vec<Complex64> = (0..grid.len()).map(|i| space_fn(grid.point(i))).collect();
        let freq: Vec<Complex64> = (0..grid.len()).map(|i| freq_fn(grid.freq_point(i))).collect();
        check_finite(&space)?;
        check_finite(&freq)?;
        let dft = fourier::space_to_freq(&grid, &space);
        let peak = freq.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(1e-300);
        let residual = dft
            .iter()
            .zip(&freq)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0f64, f64::max)
            / peak;
        if residual > 1e-8 {
            return Err(LabError::InvalidKernel(format!(
                "space and frequency closed forms disagree under the DFT: residual {residual:.3e}"
            )));
        }
        Ok(Self::assemble(grid, space, freq, role, residual))
    }

    fn assemble(
        grid: GridSpec,
        space: Vec<Complex64>,
        freq: Vec<Complex64>,
        role: KernelRole,
        consistency: f64,
    ) -> Self {
        let mut k = Self {
            grid,
            space,
            freq,
            meta: KernelMeta {
                moment_order: 0,
                smoothness: 0.0,
                decay_order: 0,
                band: 0.0,
                role,
            },
            consistency,
        };
        k.meta = measure_meta(&k, role);
        k
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn space(&self) -> &[Complex64] {
        &self.space
    }

    pub fn freq(&self) -> &[Complex64] {
        &self.freq
    }

    pub fn meta(&self) -> &KernelMeta {
        &self.meta
    }

    pub fn consistency(&self) -> f64 {
        self.consistency
    }

    pub fn as_signal(&self) -> SampledSignal {
        SampledSignal::new(self.grid, self.space.clone()).expect("kernel samples are finite")
    }

    /// Frequency value at the origin sample.
    pub fn freq_at_origin(&self) -> Complex64 {
        let n = self.grid.n();
        let mid = self.grid.flat_index(n / 2, if self.grid.dim() == 2 { n / 2 } else { 0 });
        self.freq[mid]
    }

    pub fn l1_mass(&self) -> f64 {
        self.grid.cell_volume() * self.space.iter().map(|z| z.norm()).sum::<f64>()
    }

    pub fn l2_norm(&self) -> f64 {
        (self.grid.cell_volume() * self.space.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
    }
}

fn check_finite(data: &[Complex64]) -> Result<()> {
    if data.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(LabError::InvalidKernel("non-finite kernel sample".into()));
    }
    Ok(())
}

fn measure_meta(k: &Kernel, role: KernelRole) -> KernelMeta {
    KernelMeta {
        moment_order: vanishing_moment_count(k, 6),
        smoothness: smoothness_proxy(k),
        decay_order: measured_decay_order(k),
        band: measured_band(k, role),
        role,
    }
}

/// Multi-index list for |alpha|_1 <= lmax in the grid dimension.
pub fn moment_orders(dim: usize, lmax: usize) -> Vec<[usize; 2]> {
    let mut out = Vec::new();
    for total in 0..=lmax {
        if dim == 1 {
            out.push([total, 0]);
        } else {
            for a in (0..=total).rev() {
                out.push([a, total - a]);
            }
        }
    }
    out
}

/// Moments `int x^alpha g(x) dx` for all |alpha|_1 <= lmax, by quadrature.
pub fn moments(g: &Kernel, lmax: usize) -> Result<Vec<f64>> {
    if lmax > 10 {
        return Err(LabError::InvalidInput("moment order cap is 10".into()));
    }
    let grid = g.grid();
    let orders = moment_orders(grid.dim(), lmax);
    let mut values = vec![0.0f64; orders.len()];
    for i in 0..grid.len() {
        let p = grid.point(i);
        let v = g.space()[i].re;
        if v == 0.0 {
            continue;
        }
        for (oi, ord) in orders.iter().enumerate() {
            values[oi] += p[0].powi(ord[0] as i32) * p[1].powi(ord[1] as i32) * v;
        }
    }
    let w = grid.cell_volume();
    for v in &mut values {
        *v *= w;
    }
    Ok(values)
}

/// Count of verified vanishing moments: largest L such that every moment of
/// order < L is below the relative zero threshold.
pub fn vanishing_moment_count(g: &Kernel, cap: usize) -> usize {
    let grid = g.grid();
    let orders = moment_orders(grid.dim(), cap);
    let values = match moments(g, cap) {
        Ok(v) => v,
        Err(_) => return 0,
    };
    // Weighted mass scale per total order, so the threshold tracks the x^l growth.
    let mut mass = vec![0.0f64; cap + 1];
    for i in 0..grid.len() {
        let p = grid.point(i);
        let r = (1.0 + p[0].abs()).max(1.0 + p[1].abs());
        let v = g.space()[i].norm();
        let mut w = 1.0;
        for m in mass.iter_mut() {
            *m += v * w;
            w *= r;
        }
    }
    let cell = grid.cell_volume();
    for m in &mut mass {
        *m *= cell;
    }
    if mass[0] == 0.0 {
        return cap; // zero kernel: everything vanishes
    }
    let mut level_ok = vec![true; cap + 1];
    for (ord, val) in orders.iter().zip(&values) {
        let total = ord[0] + ord[1];
        if val.abs() > MOMENT_ZERO_TOL * mass[total] {
            level_ok[total] = false;
        }
    }
    let mut count = 0;
    for ok in level_ok {
        if ok {
            count += 1;
        } else {
            break;
        }
    }
    count
}

/// Decay check result for one exponent N.
#[derive(Debug, Clone, Copy)]
pub struct DecayCheck {
    /// Least constant with |g(x)| <= c/(1+|x|)^N at every sample.
    pub constant: f64,
    /// Whether the constant is finite and moderate (< 1e6).
    pub moderate: bool,
}

/// Least c_N with `|g(x)| <= c_N (1+|x|)^-N` over the grid.
pub fn check_decay(g: &Kernel, n_exp: u32) -> Result<DecayCheck> {
    if n_exp == 0 || n_exp > 8 {
        return Err(LabError::InvalidInput("decay exponent must be in 1..=8".into()));
    }
    let grid = g.grid();
    let mut c = 0.0f64;
    for i in 0..grid.len() {
        let p = grid.point(i);
        let r = p[0].hypot(p[1]);
        c = c.max(g.space()[i].norm() * (1.0 + r).powi(n_exp as i32));
    }
    Ok(DecayCheck { constant: c, moderate: c.is_finite() && c < 1e6 })
}

fn measured_decay_order(g: &Kernel) -> u32 {
    let mut best = 0;
    for n in 1..=8 {
        match check_decay(g, n) {
            Ok(c) if c.moderate => best = n,
            _ => break,
        }
    }
    best
}

/// Smoothness-weight check result.
#[derive(Debug, Clone)]
pub struct SmoothnessCheck {
    pub ok: bool,
    /// One integral per multi-index |alpha|_1 <= cap.
    pub integrals: Vec<f64>,
    /// Worst outer-shell share of the integral (large share = divergence trend).
    pub shell_share: f64,
}

/// Numerically integrate `(1+|xi|)^K |D^alpha F g|` for all |alpha|_1 <= cap
/// (spectral differentiation). True iff every integral stabilizes: the outer
/// half-band of the frequency box contributes a small share.
pub fn check_smoothness_weight(g: &Kernel, k_weight: f64, cap: usize) -> Result<SmoothnessCheck> {
    if cap > 4 {
        return Err(LabError::InvalidInput("derivative-order cap is 4".into()));
    }
    let grid = g.grid();
    let orders = moment_orders(grid.dim(), cap);
    let half = grid.freq_extent() / 2.0;
    let mut integrals = Vec::with_capacity(orders.len());
    let mut worst_share = 0.0f64;
    for ord in &orders {
        // D^alpha F g = F[(-i x)^alpha g]
        let weighted: Vec<Complex64> = (0..grid.len())
            .map(|i| {
                let p = grid.point(i);
                let factor = Complex64::new(0.0, -1.0).powi((ord[0] + ord[1]) as i32)
                    * p[0].powi(ord[0] as i32)
                    * p[1].powi(ord[1] as i32);
                g.space()[i] * factor
            })
            .collect();
        let deriv = fourier::space_to_freq(grid, &weighted);
        // Quadrature noise floor: the DFT carries ~1e-16 relative noise which
        // the (1+|xi|)^K weight would otherwise amplify into a fake tail.
        let floor = 1e-13 * deriv.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        let mut total = 0.0;
        let mut outer = 0.0;
        for (i, v) in deriv.iter().enumerate() {
            let m = v.norm();
            if m < floor {
                continue;
            }
            let r = grid.freq_radius(i);
            let term = (1.0 + r).powf(k_weight) * m;
            total += term;
            if r > half {
                outer += term;
            }
        }
        total *= grid.freq_spacing().powi(grid.dim() as i32);
        outer *= grid.freq_spacing().powi(grid.dim() as i32);
        let share = if total > 0.0 { outer / total } else { 0.0 };
        worst_share = worst_share.max(share);
        integrals.push(total);
    }
    Ok(SmoothnessCheck { ok: worst_share < 0.2, integrals, shell_share: worst_share })
}

fn smoothness_proxy(g: &Kernel) -> f64 {
    let mut best = 0.0;
    let mut k = 0.5f64;
    while k <= 8.0 {
        match check_smoothness_weight(g, k, 0) {
            Ok(c) if c.ok => best = k,
            _ => break,
        }
        k += 0.5;
    }
    best
}

fn measured_band(g: &Kernel, role: KernelRole) -> f64 {
    let grid = g.grid();
    let peak = g.freq().iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return 0.0;
    }
    let thresh = FREQ_BAND_TOL * peak;
    // Radial envelope: min |Fg| per radius bin of width dxi.
    let dxi = grid.freq_spacing();
    let bins = (grid.freq_extent() / dxi).round() as usize + 2;
    let mut min_per_bin = vec![f64::INFINITY; bins];
    for i in 0..grid.len() {
        let r = grid.freq_radius(i);
        let b = (r / dxi).round() as usize;
        if b < bins {
            min_per_bin[b] = min_per_bin[b].min(g.freq()[i].norm());
        }
    }
    let occupied: Vec<(usize, f64)> = min_per_bin
        .iter()
        .enumerate()
        .filter(|(_, v)| v.is_finite())
        .map(|(b, &v)| (b, v))
        .collect();
    match role {
        KernelRole::LowPass => {
            // Largest radius up to which the envelope stays above threshold.
            let mut r_max = 0.0;
            for &(b, v) in &occupied {
                if v > thresh {
                    r_max = b as f64 * dxi;
                } else {
                    break;
                }
            }
            r_max / 2.0
        }
        _ => {
            // Annulus [r_lo, r_hi] above threshold; the band is feasible when
            // eps/2 >= r_lo and 2 eps <= r_hi admits a solution.
            let mut r_lo = f64::INFINITY;
            let mut r_hi: f64 = 0.0;
            let mut started = false;
            for &(b, v) in &occupied {
                if v > thresh {
                    if !started {
                        r_lo = (b as f64 * dxi).max(dxi);
                        started = true;
                    }
                    r_hi = b as f64 * dxi;
                } else if started {
                    break;
                }
            }
            if !started || r_hi / 2.0 < 2.0 * r_lo {
                0.0
            } else {
                r_hi / 2.0
            }
        }
    }
}

/// Admissibility verdict for an analyzing vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Admissibility {
    /// Frame constant making the tight-frame identity hold with constant 1:
    /// `(2 pi)^d / omega_{d-1} * int |Fg|^2 / |xi|^d dxi`.
    Finite(f64),
    /// The origin contribution does not settle (nonvanishing transform at 0).
    Divergent,
}

/// Area of the unit sphere S^{d-1}.
fn sphere_area(dim: usize) -> f64 {
    match dim {
        1 => 2.0,
        _ => 2.0 * std::f64::consts::PI,
    }
}

/// Admissibility constant of `g`: quadrature away from a symmetric origin
/// cell plus a polar local-model estimate `|Fg|^2 ~ c |xi|^(2L)` inside it.
pub fn admissibility(g: &Kernel) -> Admissibility {
    let grid = g.grid();
    let d = grid.dim();
    let peak = g.freq().iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    if peak == 0.0 {
        return Admissibility::Finite(0.0);
    }
    let origin = g.freq_at_origin().norm();
    let l = g.meta().moment_order;
    if l == 0 || origin > FREQ_BAND_TOL * peak {
        return Admissibility::Divergent;
    }
    let dxi = grid.freq_spacing();
    let half_cell = dxi / 2.0;
    let mut acc = 0.0;
    let mut model_num = 0.0;
    let mut model_den = 0.0;
    for i in 0..grid.len() {
        let r = grid.freq_radius(i);
        let v2 = g.freq()[i].norm_sqr();
        if r > half_cell {
            acc += v2 / r.powi(d as i32);
            if r <= 4.0 * dxi {
                model_num += v2;
                model_den += r.powf(2.0 * l as f64);
            }
        }
    }
    acc *= dxi.powi(d as i32);
    // Origin cell: int_{|xi| < dxi/2} c |xi|^(2L - d) dxi with fitted c.
    let c_fit = if model_den > 0.0 { model_num / model_den } else { 0.0 };
    let p = 2.0 * l as f64;
    let origin_cell = c_fit * sphere_area(d) * half_cell.powf(p) / p;
    let raw = acc + origin_cell;
    let norm = (2.0 * std::f64::consts::PI).powi(d as i32) / sphere_area(d);
    Admissibility::Finite(norm * raw)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PartitionKind {
    Inhomogeneous,
    Homogeneous,
}

/// One frequency-domain partition member `phi_j(xi) = phi(2^-j xi)`.
#[derive(Debug, Clone)]
pub struct PartitionMember {
    pub j: i32,
    pub freq: Vec<f64>,
}

/// Dyadic partition of unity on the sampled frequency box.
#[derive(Debug, Clone)]
pub struct PartitionSystem {
    kind: PartitionKind,
    grid: GridSpec,
    members: Vec<PartitionMember>,
}

/// Standard C-infinity transition built from e^(-1/u): 0 for u <= 0, 1 for
/// u >= 1, strictly increasing between.
pub fn smooth_step(u: f64) -> f64 {
    let s = |v: f64| if v <= 0.0 { 0.0 } else { (-1.0 / v).exp() };
    let a = s(u);
    let b = s(1.0 - u);
    if a == 0.0 {
        0.0
    } else {
        a / (a + b)
    }
}

/// Radial bump: 1 on |xi| <= 1, 0 on |xi| >= 2, smooth in between.
pub fn bump_profile(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        smooth_step(2.0 - r)
    }
}

fn generator_profile(r: f64) -> f64 {
    // phi(xi) = phi0(xi) - phi0(2 xi), supported on 1/2 <= |xi| <= 2.
    bump_profile(r) - bump_profile(2.0 * r)
}

impl PartitionSystem {
    pub fn kind(&self) -> PartitionKind {
        self.kind
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn members(&self) -> &[PartitionMember] {
        &self.members
    }

    pub fn member(&self, j: i32) -> Option<&PartitionMember> {
        self.members.iter().find(|m| m.j == j)
    }

    /// Sum of all members at one frequency sample.
    pub fn sum_at(&self, idx: usize) -> f64 {
        self.members.iter().map(|m| m.freq[idx]).sum()
    }

    /// Radius up to which the members provably sum to one.
    pub fn covered_radius(&self) -> f64 {
        let j_max = self.members.iter().map(|m| m.j).max().unwrap_or(0);
        2.0f64.powi(j_max)
    }

    /// The local-means pair (Phi0, Phi) realizing Definition-style discrete
    /// norms on the same code path: Phi0 from the level-0 bump, Phi from the
    /// generator.
    pub fn kernel_pair(&self) -> Result<(Kernel, Kernel)> {
        let grid = self.grid;
        let phi0: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new(bump_profile(grid.freq_radius(i)), 0.0))
            .collect();
        let phi: Vec<Complex64> = (0..grid.len())
            .map(|i| Complex64::new(generator_profile(grid.freq_radius(i)), 0.0))
            .collect();
        Ok((
            Kernel::from_freq(grid, phi0, KernelRole::LowPass)?,
            Kernel::from_freq(grid, phi, KernelRole::BandPass)?,
        ))
    }
}

/// Inhomogeneous partition: phi_0 plus generator dilates phi(2^-j xi), j >= 1,
/// covering |xi| <= freq_extent/2 with an exact sum of one.
pub fn build_inhomogeneous_partition(grid: GridSpec) -> Result<PartitionSystem> {
    let coverage = grid.freq_extent() / 2.0;
    let j_max = coverage.log2().ceil() as i32;
    let mut members = Vec::new();
    let phi0: Vec<f64> = (0..grid.len()).map(|i| bump_profile(grid.freq_radius(i))).collect();
    members.push(PartitionMember { j: 0, freq: phi0 });
    for j in 1..=j_max {
        let s = 2.0f64.powi(-j);
        let freq: Vec<f64> = (0..grid.len())
            .map(|i| generator_profile(s * grid.freq_radius(i)))
            .collect();
        members.push(PartitionMember { j, freq });
    }
    let system = PartitionSystem { kind: PartitionKind::Inhomogeneous, grid, members };
    verify_partition(&system, 0.0, coverage)?;
    Ok(system)
}

/// Homogeneous partition over a finite j-range; sums to one on the annulus
/// `2^j_min <= |xi| <= 2^j_max`.
pub fn build_homogeneous_partition(grid: GridSpec, j_min: i32, j_max: i32) -> Result<PartitionSystem> {
    if j_min > j_max {
        return Err(LabError::InvalidInput("empty homogeneous j-range".into()));
    }
    if 2.0f64.powi(j_max) > grid.freq_extent() {
        return Err(LabError::RangeTruncation(format!(
            "frequency extent {:.2} cannot hold level {j_max}",
            grid.freq_extent()
        )));
    }
    let mut members = Vec::new();
    for j in j_min..=j_max {
        let s = 2.0f64.powi(-j);
        let freq: Vec<f64> = (0..grid.len())
            .map(|i| generator_profile(s * grid.freq_radius(i)))
            .collect();
        members.push(PartitionMember { j, freq });
    }
    let system = PartitionSystem { kind: PartitionKind::Homogeneous, grid, members };
    let lo = 2.0f64.powi(j_min);
    let hi = 2.0f64.powi(j_max).min(grid.freq_extent());
    verify_partition(&system, lo, hi)?;
    Ok(system)
}

fn verify_partition(system: &PartitionSystem, r_lo: f64, r_hi: f64) -> Result<()> {
    let grid = system.grid;
    let mut worst = 0.0f64;
    for i in 0..grid.len() {
        let r = grid.freq_radius(i);
        if r >= r_lo && r <= r_hi {
            worst = worst.max((system.sum_at(i) - 1.0).abs());
        }
    }
    if worst > 1e-9 {
        return Err(LabError::InvalidKernel(format!(
            "partition of unity violated: max |sum - 1| = {worst:.3e} on [{r_lo:.3}, {r_hi:.3}]"
        )));
    }
    Ok(())
}

/// Local means via iterated Laplacians: Phi0 = k0, Phi = Delta^N k_upper
/// (frequency-side multiplication by (-|xi|^2)^N). The moment order of the
/// band-pass kernel is 2N.
pub fn build_local_means(k0: &Kernel, k_upper: &Kernel, n_lap: u32) -> Result<(Kernel, Kernel)> {
    if n_lap == 0 {
        return Err(LabError::InvalidInput("Laplacian power must be positive".into()));
    }
    for (name, k) in [("k0", k0), ("k_upper", k_upper)] {
        if k.freq_at_origin().norm() <= 1e-6 {
            return Err(LabError::InvalidKernel(format!(
                "{name} has (numerically) vanishing transform at the origin"
            )));
        }
    }
    if k0.grid() != k_upper.grid() {
        return Err(LabError::InvalidInput("kernels live on different grids".into()));
    }
    let grid = *k_upper.grid();
    let freq: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            let r2 = {
                let p = grid.freq_point(i);
                p[0] * p[0] + p[1] * p[1]
            };
            k_upper.freq()[i] * (-r2).powi(n_lap as i32)
        })
        .collect();
    let phi0 = Kernel::from_space(grid, k0.space().to_vec(), KernelRole::LowPass)?;
    let phi = Kernel::from_freq(grid, freq, KernelRole::BandPass)?;
    let expected = 2 * n_lap as usize;
    if phi.meta().moment_order < expected {
        return Err(LabError::InvalidKernel(format!(
            "Laplacian construction should give {expected} vanishing moments, measured {}",
            phi.meta().moment_order
        )));
    }
    Ok((phi0, phi))
}

/// Radial-difference kernels: Phi0 = F^-1 phi0, Phi = F^-1(phi0(.) - phi0(2.)),
/// with phi0 a non-increasing radial profile whose derivatives at the origin
/// vanish up to order R. The moment order of Phi is R + 1.
pub fn build_radial_kernel(phi0_freq: &Kernel, r_order: usize) -> Result<(Kernel, Kernel)> {
    let grid = *phi0_freq.grid();
    let n = grid.n();
    let samples = phi0_freq.freq();
    let origin = phi0_freq.freq_at_origin();
    if origin.norm() <= 1e-6 {
        return Err(LabError::InvalidKernel("phi0(0) vanishes".into()));
    }
    verify_radial_profile(&grid, samples, r_order)?;
    // phi(xi) = phi0(xi) - phi0(2 xi): index doubling per axis, zero outside.
    let doubled = |axis_k: usize| -> Option<usize> {
        let m = 2 * axis_k as i64 - n as i64 / 2;
        (0..n as i64).contains(&m).then_some(m as usize)
    };
    let mut phi = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let [kx, ky] = grid.split_index(i);
        let at2 = match (doubled(kx), if grid.dim() == 2 { doubled(ky) } else { Some(0) }) {
            (Some(mx), Some(my)) => samples[grid.flat_index(mx, my)],
            _ => Complex64::new(0.0, 0.0),
        };
        phi[i] = samples[i] - at2;
    }
    let phi0 = Kernel::from_freq(grid, samples.to_vec(), KernelRole::LowPass)?;
    let phi = Kernel::from_freq(grid, phi, KernelRole::BandPass)?;
    if phi.meta().moment_order < r_order + 1 {
        return Err(LabError::InvalidKernel(format!(
            "radial construction should give {} vanishing moments, measured {}",
            r_order + 1,
            phi.meta().moment_order
        )));
    }
    Ok((phi0, phi))
}

/// Radiality, monotone-profile and origin-derivative preconditions of the
/// radial-difference construction, checked on the sampled profile.
fn verify_radial_profile(grid: &GridSpec, freq: &[Complex64], r_order: usize) -> Result<()> {
    let dxi = grid.freq_spacing();
    let n = grid.n();
    let mid = n / 2;
    // Profile along the positive first axis.
    let axis_val = |k: usize| -> f64 {
        let idx = grid.flat_index(k, if grid.dim() == 2 { mid } else { 0 });
        freq[idx].re
    };
    if freq.iter().any(|z| z.im.abs() > 1e-10) {
        return Err(LabError::InvalidKernel("radial profile must be real".into()));
    }
    // Radial: values at +/- xi and (for d=2) along the second axis agree.
    for off in [1usize, 3, 7, 15] {
        let plus = axis_val(mid + off);
        let minus = axis_val(mid - off);
        if (plus - minus).abs() > 1e-8 * (1.0 + plus.abs()) {
            return Err(LabError::InvalidKernel("profile is not even/radial".into()));
        }
        if grid.dim() == 2 {
            let other = freq[grid.flat_index(mid, mid + off)].re;
            if (plus - other).abs() > 1e-8 * (1.0 + plus.abs()) {
                return Err(LabError::InvalidKernel("profile is not radial".into()));
            }
        }
    }
    // Non-increasing along the sampled radii.
    let mut prev = axis_val(mid);
    for k in mid + 1..n {
        let v = axis_val(k);
        if v > prev + 1e-10 {
            return Err(LabError::InvalidKernel("radial profile is not non-increasing".into()));
        }
        prev = v;
    }
    // Derivatives at the origin up to order R vanish (central differences).
    let center = axis_val(mid);
    for order in 1..=r_order {
        let d = central_difference(&axis_val, mid, order, dxi);
        let tol = MOMENT_ZERO_TOL * center.abs().max(1e-12) / dxi.powi(order as i32 - 1);
        if d.abs() > tol.max(1e-4) {
            return Err(LabError::InvalidKernel(format!(
                "derivative of order {order} at the origin does not vanish: {d:.3e}"
            )));
        }
    }
    Ok(())
}

fn central_difference(f: &dyn Fn(usize) -> f64, mid: usize, order: usize, h: f64) -> f64 {
    match order {
        1 => (f(mid + 1) - f(mid - 1)) / (2.0 * h),
        2 => (f(mid + 1) - 2.0 * f(mid) + f(mid - 1)) / (h * h),
        3 => (f(mid + 2) - 2.0 * f(mid + 1) + 2.0 * f(mid - 1) - f(mid - 2)) / (2.0 * h.powi(3)),
        _ => {
            (f(mid + 2) - 4.0 * f(mid + 1) + 6.0 * f(mid) - 4.0 * f(mid - 1) + f(mid - 2))
                / h.powi(4)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn grid1d() -> GridSpec {
        GridSpec::new(1, 32.0, 4096).unwrap()
    }

    fn gaussian_kernel(role: KernelRole) -> Kernel {
        // e^(-x^2/2) <-> e^(-xi^2/2)
        Kernel::from_closed_forms(
            grid1d(),
            |p| Complex64::new((-p[0] * p[0] / 2.0).exp(), 0.0),
            |x| Complex64::new((-x[0] * x[0] / 2.0).exp(), 0.0),
            role,
        )
        .unwrap()
    }

    fn mexican_hat() -> Kernel {
        // (1 - x^2) e^(-x^2/2) <-> xi^2 e^(-xi^2/2)
        Kernel::from_closed_forms(
            grid1d(),
            |p| Complex64::new((1.0 - p[0] * p[0]) * (-p[0] * p[0] / 2.0).exp(), 0.0),
            |x| Complex64::new(x[0] * x[0] * (-x[0] * x[0] / 2.0).exp(), 0.0),
            KernelRole::Wavelet,
        )
        .unwrap()
    }

    #[test]
    fn inhomogeneous_partition_examples() {
        let grid = grid1d();
        let sys = build_inhomogeneous_partition(grid).unwrap();
        let n = grid.n();
        let mid = n / 2;
        // xi = 0: phi0 = 1, higher members 0.
        assert_eq!(sys.members()[0].freq[mid], 1.0);
        for m in &sys.members()[1..] {
            assert_eq!(m.freq[mid], 0.0);
        }
        // Sum = 1 on |xi| <= extent/2.
        let coverage = grid.freq_extent() / 2.0;
        for i in 0..n {
            if grid.freq_radius(i) <= coverage {
                assert!((sys.sum_at(i) - 1.0).abs() < 1e-9);
            }
        }
        // phi_3(xi) = phi(xi / 8).
        let phi3 = sys.member(3).unwrap();
        for i in (0..n).step_by(17) {
            let expect = generator_profile(grid.freq_radius(i) / 8.0);
            assert_relative_eq!(phi3.freq[i], expect, max_relative = 1e-12, epsilon = 1e-12);
        }
    }

    #[test]
    fn homogeneous_partition_examples() {
        let grid = grid1d();
        let sys = build_homogeneous_partition(grid, -3, 5).unwrap();
        let n = grid.n();
        // Every member vanishes at the origin.
        for m in sys.members() {
            assert_eq!(m.freq[n / 2], 0.0);
        }
        // Sum = 1 on the covered annulus, supports in dyadic annuli.
        for i in 0..n {
            let r = grid.freq_radius(i);
            if (2.0f64.powi(-3)..=2.0f64.powi(5)).contains(&r) {
                assert!((sys.sum_at(i) - 1.0).abs() < 1e-9, "r = {r}");
            }
            for m in sys.members() {
                if m.freq[i] != 0.0 {
                    let lo = 2.0f64.powi(m.j - 1);
                    let hi = 2.0f64.powi(m.j + 1);
                    assert!(r >= lo && r <= hi, "support violation at r = {r}, j = {}", m.j);
                }
            }
        }
        // Requesting a level beyond the box must refuse.
        assert!(build_homogeneous_partition(grid, 0, 9).is_err());
    }

    #[test]
    fn local_means_laplacian_of_gaussian() {
        let g = gaussian_kernel(KernelRole::LowPass);
        let (phi0, phi) = build_local_means(&g, &g, 1).unwrap();
        assert_eq!(phi.meta().moment_order, 2);
        assert_eq!(phi0.meta().moment_order, 0);
        // Moments 0 and 1 vanish.
        let m = moments(&phi, 1).unwrap();
        for v in m {
            assert!(v.abs() < 1e-8 * phi.l1_mass());
        }
        // Frequency values match -xi^2 e^(-xi^2/2) against the direct DFT.
        let mut err = 0.0f64;
        for (i, v) in phi.freq().iter().enumerate() {
            let xi = phi.grid().freq_point(i)[0];
            err = err.max((v.re - (-xi * xi) * (-xi * xi / 2.0).exp()).abs());
        }
        assert!(err < 1e-8, "frequency deviation {err}");
    }

    #[test]
    fn local_means_rejects_vanishing_origin() {
        let hat = mexican_hat();
        let g = gaussian_kernel(KernelRole::LowPass);
        assert!(build_local_means(&hat, &g, 1).is_err());
        assert!(build_local_means(&g, &hat, 1).is_err());
    }

    #[test]
    fn radial_kernel_from_gaussian_bump() {
        let grid = grid1d();
        let phi0 = Kernel::from_freq(
            grid,
            (0..grid.len())
                .map(|i| {
                    let r = grid.freq_radius(i);
                    Complex64::new((-r * r).exp(), 0.0)
                })
                .collect(),
            KernelRole::LowPass,
        )
        .unwrap();
        // Odd derivatives vanish by symmetry: R = 1 accepted.
        let (k0, k) = build_radial_kernel(&phi0, 1).unwrap();
        assert!(k0.meta().moment_order == 0);
        assert!(k.meta().moment_order >= 2);
        // Phi frequency value at 0 is phi0(0) - phi0(0) = 0.
        assert_eq!(k.freq_at_origin(), Complex64::new(0.0, 0.0));
        // R = 2 must be rejected: the second derivative of e^(-r^2) at 0 is -2.
        assert!(build_radial_kernel(&phi0, 2).is_err());
        // Moments up to R vanish.
        let m = moments(&k, 1).unwrap();
        for v in m {
            assert!(v.abs() < 1e-8 * k.l1_mass());
        }
    }

    #[test]
    fn moment_examples() {
        let grid = grid1d();
        // Odd kernel: zeroth moment vanishes.
        let odd = Kernel::from_space(
            grid,
            (0..grid.len())
                .map(|i| {
                    let x = grid.point(i)[0];
                    Complex64::new(x * (-x * x).exp(), 0.0)
                })
                .collect(),
            KernelRole::BandPass,
        )
        .unwrap();
        assert!(moments(&odd, 0).unwrap()[0].abs() < 1e-14);

        // Gaussian e^(-x^2): zeroth moment sqrt(pi).
        let g = Kernel::from_space(
            grid,
            (0..grid.len())
                .map(|i| {
                    let x = grid.point(i)[0];
                    Complex64::new((-x * x).exp(), 0.0)
                })
                .collect(),
            KernelRole::LowPass,
        )
        .unwrap();
        assert_relative_eq!(
            moments(&g, 0).unwrap()[0],
            std::f64::consts::PI.sqrt(),
            max_relative = 1e-12
        );

        // Mexican hat: moments 0 and 1 vanish.
        let hat = mexican_hat();
        let m = moments(&hat, 1).unwrap();
        assert!(m[0].abs() < 1e-10);
        assert!(m[1].abs() < 1e-10);
        assert_eq!(hat.meta().moment_order, 2);
        assert!(moments(&hat, 11).is_err());
    }

    #[test]
    fn decay_checks() {
        let g = gaussian_kernel(KernelRole::LowPass);
        let c6 = check_decay(&g, 6).unwrap();
        assert!(c6.moderate);
        // Direct grid sweep oracle.
        let grid = g.grid();
        let mut oracle = 0.0f64;
        for i in 0..grid.len() {
            let x = grid.point(i)[0];
            oracle = oracle.max(g.space()[i].norm() * (1.0 + x.abs()).powi(6));
        }
        assert_relative_eq!(c6.constant, oracle, max_relative = 1e-12);
        // Monotone: smaller N gives smaller-or-equal constant.
        let c5 = check_decay(&g, 5).unwrap();
        assert!(c5.constant <= c6.constant);

        // Slowly decaying kernel: the constant grows with the extent.
        let slow = |extent: f64, n: usize| {
            let grid = GridSpec::new(1, extent, n).unwrap();
            let k = Kernel::from_space(
                grid,
                (0..grid.len())
                    .map(|i| Complex64::new(1.0 / (1.0 + grid.point(i)[0].abs()), 0.0))
                    .collect(),
                KernelRole::LowPass,
            )
            .unwrap();
            check_decay(&k, 3).unwrap().constant
        };
        let c_small = slow(32.0, 1024);
        let c_big = slow(64.0, 2048);
        assert!(c_big > 3.0 * c_small, "sweep must expose growth: {c_small} vs {c_big}");
    }

    #[test]
    fn smoothness_weight_examples() {
        let g = gaussian_kernel(KernelRole::LowPass);
        for k in [1.0, 4.0, 8.0] {
            assert!(check_smoothness_weight(&g, k, 1).unwrap().ok, "gaussian at K = {k}");
        }
        // Box function: F N_1 decays like 1/|xi|, so K = 2 diverges.
        let grid = grid1d();
        let boxk = Kernel::from_space(
            grid,
            (0..grid.len())
                .map(|i| {
                    let x = grid.point(i)[0];
                    Complex64::new(if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }, 0.0)
                })
                .collect(),
            KernelRole::LowPass,
        )
        .unwrap();
        assert!(!check_smoothness_weight(&boxk, 2.0, 0).unwrap().ok);
        assert!(check_smoothness_weight(&g, 1.0, 5).is_err());
    }

    #[test]
    fn admissibility_examples() {
        // Plain Gaussian: nonvanishing transform at 0 -> divergent.
        let g = gaussian_kernel(KernelRole::LowPass);
        assert_eq!(admissibility(&g), Admissibility::Divergent);

        // Zero kernel -> 0.
        let zero = Kernel::from_space(
            grid1d(),
            vec![Complex64::new(0.0, 0.0); grid1d().len()],
            KernelRole::Wavelet,
        )
        .unwrap();
        assert_eq!(admissibility(&zero), Admissibility::Finite(0.0));

        // Mexican hat: frame constant pi * int |xi|^3 e^(-xi^2) dxi = pi.
        let hat = mexican_hat();
        match admissibility(&hat) {
            Admissibility::Finite(c) => {
                assert_relative_eq!(c, std::f64::consts::PI, max_relative = 0.01);
            }
            Admissibility::Divergent => panic!("mexican hat must be admissible"),
        }
    }

    #[test]
    fn admissibility_invariances() {
        let hat = mexican_hat();
        let c0 = match admissibility(&hat) {
            Admissibility::Finite(c) => c,
            _ => unreachable!(),
        };
        // Translation invariance: shift the space samples.
        let shifted = crate::grid::resample(&hat.as_signal(), [3.0, 0.0], 1.0).unwrap();
        let hk = Kernel::from_space(*hat.grid(), shifted.into_samples(), KernelRole::Wavelet).unwrap();
        let c1 = match admissibility(&hk) {
            Admissibility::Finite(c) => c,
            _ => panic!("translation broke admissibility"),
        };
        assert_relative_eq!(c0, c1, max_relative = 1e-6);

        // Mass-normalized (L1) dilation leaves the constant invariant; the
        // L2-normalized dilate scales it by lambda^d. Both checked within 1%.
        let grid = *hat.grid();
        let lam = 2.0;
        let build_dilate = |power: f64| {
            Kernel::from_space(
                grid,
                (0..grid.len())
                    .map(|i| {
                        let x = grid.point(i)[0] / lam;
                        Complex64::new(lam.powf(-power) * (1.0 - x * x) * (-x * x / 2.0).exp(), 0.0)
                    })
                    .collect(),
                KernelRole::Wavelet,
            )
            .unwrap()
        };
        let c_l1 = match admissibility(&build_dilate(1.0)) {
            Admissibility::Finite(c) => c,
            _ => panic!("dilation broke admissibility"),
        };
        assert_relative_eq!(c0, c_l1, max_relative = 0.01);
        let c_l2 = match admissibility(&build_dilate(0.5)) {
            Admissibility::Finite(c) => c,
            _ => panic!("dilation broke admissibility"),
        };
        assert_relative_eq!(lam * c0, c_l2, max_relative = 0.01);
    }

    #[test]
    fn closed_form_consistency_is_enforced() {
        // Deliberately wrong frequency law must be rejected.
        let bad = Kernel::from_closed_forms(
            grid1d(),
            |p| Complex64::new((-p[0] * p[0] / 2.0).exp(), 0.0),
            |x| Complex64::new((-x[0] * x[0]).exp(), 0.0),
            KernelRole::LowPass,
        );
        assert!(bad.is_err());
    }

    #[test]
    fn measured_band_of_standard_kernels() {
        let g = gaussian_kernel(KernelRole::LowPass);
        // |Fg| = e^(-xi^2/2) > 1e-6 up to |xi| ~ 5.26, so eps ~ 2.6.
        assert!((g.meta().band - 2.63).abs() < 0.2, "band {}", g.meta().band);
        let hat = mexican_hat();
        assert!(hat.meta().band > 1.0, "band {}", hat.meta().band);
    }
}
