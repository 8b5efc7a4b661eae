//! Fourier-side convolution with dilated kernels, the continuous wavelet
//! transform, Peetre and Hardy-Littlewood maximal functions, CWT decay
//! profiling, and the weighted-chain smoothing utility.
//!
//! Scales outside the resolvable window `[2h, X/2]` are refused rather than
//! silently degraded; circular convolution is accepted behind a wrap guard on
//! the signal tail.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::fourier;
use crate::grid::{resolvable_window, GridSpec, SampledSignal, ScaleLadder};
use crate::kernels::{Kernel, KernelRole};

const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Normalization of the dilation operator `D_t^{L_p} g = t^(-d/p) g(./t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DilationTag {
    /// Mass-preserving dilate (the default `Psi_t` of the norm machinery).
    L1,
    /// Unitary dilate used by the wavelet transform.
    L2,
    Lp(f64),
}

impl DilationTag {
    pub fn exponent(&self) -> Result<f64> {
        let p = match self {
            DilationTag::L1 => 1.0,
            DilationTag::L2 => 2.0,
            DilationTag::Lp(p) => *p,
        };
        if !(p.is_finite() && p > 0.0) {
            return Err(LabError::InvalidInput(format!("dilation exponent must be positive, got {p}")));
        }
        Ok(p)
    }
}

/// Samples of a function `F(x, t)` on (spatial grid) x (scale ladder).
#[derive(Debug, Clone)]
pub struct GroupFunction {
    grid: GridSpec,
    ladder: ScaleLadder,
    columns: Vec<Vec<Complex64>>,
}

impl GroupFunction {
    pub fn new(grid: GridSpec, ladder: ScaleLadder, columns: Vec<Vec<Complex64>>) -> Result<Self> {
        if columns.len() != ladder.len() {
            return Err(LabError::InvalidInput(format!(
                "expected {} scale columns, got {}",
                ladder.len(),
                columns.len()
            )));
        }
        for col in &columns {
            if col.len() != grid.len() {
                return Err(LabError::InvalidInput("column length does not match grid".into()));
            }
            if col.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(LabError::InvalidInput("non-finite group-function value".into()));
            }
        }
        Ok(Self { grid, ladder, columns })
    }

    pub fn zero(grid: GridSpec, ladder: ScaleLadder) -> Self {
        let columns = vec![vec![Complex64::new(0.0, 0.0); grid.len()]; ladder.len()];
        Self { grid, ladder, columns }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn ladder(&self) -> &ScaleLadder {
        &self.ladder
    }

    pub fn columns(&self) -> &[Vec<Complex64>] {
        &self.columns
    }

    pub fn columns_mut(&mut self) -> &mut [Vec<Complex64>] {
        &mut self.columns
    }

    pub fn column(&self, m: usize) -> &[Complex64] {
        &self.columns[m]
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            ladder: self.ladder,
            columns: self
                .columns
                .iter()
                .map(|col| col.iter().map(|z| z * c).collect())
                .collect(),
        }
    }

    /// Map every column through a signal-level transform.
    pub fn map_columns(&self, mut f: impl FnMut(usize, &[Complex64]) -> Vec<Complex64>) -> Result<Self> {
        let columns = self
            .columns
            .iter()
            .enumerate()
            .map(|(m, col)| f(m, col))
            .collect();
        Self::new(self.grid, self.ladder, columns)
    }
}

fn check_scale(grid: &GridSpec, t: f64) -> Result<()> {
    let (lo, hi) = resolvable_window(grid);
    if !(t.is_finite() && t >= lo * (1.0 - 1e-12) && t <= hi * (1.0 + 1e-12)) {
        return Err(LabError::UnresolvableScale { scale: t, min: lo, max: hi });
    }
    Ok(())
}

fn check_ladder(grid: &GridSpec, ladder: &ScaleLadder) -> Result<()> {
    let offending: Vec<f64> = ladder
        .scales()
        .into_iter()
        .filter(|&t| check_scale(grid, t).is_err())
        .collect();
    if !offending.is_empty() {
        let (lo, hi) = resolvable_window(grid);
        return Err(LabError::InvalidInput(format!(
            "ladder scales outside the resolvable window [{lo:.4}, {hi:.4}]: {offending:?}"
        )));
    }
    Ok(())
}

/// Frequency samples of the `L_p`-normalized dilate of `g` at scale `t`:
/// `F(D_t^{Lp} g)(xi) = t^(d(1-1/p)) Fg(t xi)`, with samples beyond the
/// stored frequency box masked to zero.
pub(crate) fn dilated_freq(g: &Kernel, t: f64, p: f64) -> Vec<Complex64> {
    dilated_freq_of_samples(g.grid(), g.space(), t, p)
}

pub(crate) fn dilated_freq_of_samples(
    grid: &GridSpec,
    space: &[Complex64],
    t: f64,
    p: f64,
) -> Vec<Complex64> {
    let d = grid.dim() as f64;
    let factor = t.powf(d * (1.0 - 1.0 / p));
    let mut vals = fourier::freq_at_scale(grid, space, t);
    let cap = grid.freq_extent();
    for (i, v) in vals.iter_mut().enumerate() {
        let [kx, ky] = grid.split_index(i);
        let out_of_box = (t * grid.axis_freq(kx)).abs() > cap
            || (grid.dim() == 2 && (t * grid.axis_freq(ky)).abs() > cap);
        *v = if out_of_box { Complex64::new(0.0, 0.0) } else { *v * factor };
    }
    vals
}

/// Dilate a kernel: frequency-side implementation of `D_t^{Lp}`.
pub fn dilate(g: &Kernel, t: f64, tag: DilationTag) -> Result<Kernel> {
    let p = tag.exponent()?;
    check_scale(g.grid(), t)?;
    if t == 1.0 {
        return Ok(g.clone());
    }
    let freq = dilated_freq(g, t, p);
    Kernel::from_freq(*g.grid(), freq, g.meta().role)
}

/// Fourier convolution with the `(2 pi)^(d/2)` factor of the stated
/// convention: `F(f * g) = (2 pi)^(d/2) Ff . Fg`.
pub fn convolve(f: &SampledSignal, g: &Kernel) -> Result<SampledSignal> {
    if f.grid() != g.grid() {
        return Err(LabError::InvalidInput("signal and kernel grids differ".into()));
    }
    let tail = f.edge_tail();
    if tail > 1e-7 {
        return Err(LabError::WrapGuard(format!(
            "signal tail at box edge is {tail:.3e} (must be below 1e-7)"
        )));
    }
    let grid = *f.grid();
    let mut fh = fourier::space_to_freq(&grid, f.samples());
    let factor = TWO_PI.sqrt().powi(grid.dim() as i32);
    for (a, b) in fh.iter_mut().zip(g.freq()) {
        *a *= b * factor;
    }
    SampledSignal::new(grid, fourier::freq_to_space(&grid, &fh))
}

pub(crate) fn convolve_with_freq(f_hat: &[Complex64], grid: &GridSpec, kernel_freq: &[Complex64]) -> Vec<Complex64> {
    let factor = TWO_PI.sqrt().powi(grid.dim() as i32);
    let prod: Vec<Complex64> = f_hat
        .iter()
        .zip(kernel_freq)
        .map(|(a, b)| a * b * factor)
        .collect();
    fourier::freq_to_space(grid, &prod)
}

/// Continuous wavelet transform `W_g f(x, t) = t^(d/2) [(D_t g(-.)) * conj(f)](x)`
/// evaluated at every ladder node.
pub fn cwt(f: &SampledSignal, g: &Kernel, ladder: &ScaleLadder) -> Result<GroupFunction> {
    if f.grid() != g.grid() {
        return Err(LabError::InvalidInput("signal and analyzer grids differ".into()));
    }
    let grid = *f.grid();
    check_ladder(&grid, ladder)?;
    let fbar_hat = fourier::space_to_freq(&grid, &f.conj().into_samples());
    let d = grid.dim() as f64;
    let mut columns = Vec::with_capacity(ladder.len());
    for t in ladder.scales() {
        // F[D_t g(-.)](xi) = Fg(-t xi): evaluate the scaled transform at -t.
        let mut gh = dilated_freq_of_samples(&grid, g.space(), -t, 1.0);
        let factor = t.powf(d / 2.0);
        for v in gh.iter_mut() {
            *v *= factor;
        }
        columns.push(convolve_with_freq(&fbar_hat, &grid, &gh));
    }
    GroupFunction::new(grid, *ladder, columns)
}

/// Radial profile of `|Fg|^2` with cumulative `int_0^v G^2(u) du/u`,
/// used for the exact small/large-scale corrections of the tight-frame
/// identity (substituting `u = t |xi|` collapses the scale integral onto the
/// radial profile, which lives on the original frequency grid).
#[derive(Debug, Clone)]
pub struct RadialMassProfile {
    du: f64,
    /// Bin-averaged `|Fg|^2` at radii `k du`.
    g2: Vec<f64>,
    /// Cumulative `int_0^(k du) G^2 du/u` (origin cell via a `u^(2L)` model).
    cum: Vec<f64>,
}

impl RadialMassProfile {
    pub fn new(g: &Kernel) -> Self {
        let grid = g.grid();
        let du = grid.freq_spacing();
        let bins = (grid.freq_extent() / du).round() as usize + 2;
        let mut sums = vec![0.0f64; bins];
        let mut counts = vec![0usize; bins];
        for i in 0..grid.len() {
            let b = (grid.freq_radius(i) / du).round() as usize;
            if b < bins {
                sums[b] += g.freq()[i].norm_sqr();
                counts[b] += 1;
            }
        }
        let g2: Vec<f64> = sums
            .iter()
            .zip(&counts)
            .map(|(&s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
            .collect();
        let mut cum = vec![0.0f64; bins];
        // Origin cell [0, du]: local model G^2(u) ~ G^2(du) (u/du)^(2L).
        let l = g.meta().moment_order.max(1) as f64;
        cum[1] = g2[1] / (2.0 * l);
        for k in 2..bins {
            let u_prev = (k - 1) as f64 * du;
            let u = k as f64 * du;
            cum[k] = cum[k - 1] + 0.5 * (g2[k - 1] / u_prev + g2[k] / u) * du;
        }
        Self { du, g2, cum }
    }

    /// `int_0^v G^2(u) du/u` by linear interpolation of the cumulative table.
    pub fn head(&self, v: f64) -> f64 {
        if v <= 0.0 {
            return 0.0;
        }
        let pos = v / self.du;
        let k = pos.floor() as usize;
        if k + 1 >= self.cum.len() {
            return self.total();
        }
        let frac = pos - k as f64;
        self.cum[k] + frac * (self.cum[k + 1] - self.cum[k])
    }

    pub fn tail(&self, v: f64) -> f64 {
        (self.total() - self.head(v)).max(0.0)
    }

    pub fn total(&self) -> f64 {
        *self.cum.last().unwrap()
    }

    pub fn g2_at(&self, u: f64) -> f64 {
        let pos = u / self.du;
        let k = pos.floor() as usize;
        if k + 1 >= self.g2.len() {
            return 0.0;
        }
        let frac = pos - k as f64;
        self.g2[k] + frac * (self.g2[k + 1] - self.g2[k])
    }
}

/// Exact scale-tail corrections of the CWT Plancherel mass: returns the
/// contributions of `t < t_lo` and `t > t_hi` to
/// `int int |W_g f|^2 dx dt/t^(d+1)` via the radial profile substitution.
pub fn cwt_mass_corrections(f: &SampledSignal, g: &Kernel, t_lo: f64, t_hi: f64) -> (f64, f64) {
    let grid = *f.grid();
    let profile = RadialMassProfile::new(g);
    let fbar_hat = fourier::space_to_freq(&grid, &f.conj().into_samples());
    let d = grid.dim() as i32;
    let weight = TWO_PI.powi(d) * grid.freq_spacing().powi(d);
    let mut head = 0.0;
    let mut tail = 0.0;
    for (i, v) in fbar_hat.iter().enumerate() {
        let r = grid.freq_radius(i);
        let e = v.norm_sqr();
        head += e * profile.head(t_lo * r);
        tail += e * profile.tail(t_hi * r);
    }
    (weight * head, weight * tail)
}

/// Per-scale `L_2` mass of the wavelet transform computed on the frequency
/// side (Plancherel); valid for any positive scale, including scales beyond
/// the space-resolvable window.
pub fn cwt_scale_mass(f: &SampledSignal, g: &Kernel, t: f64) -> f64 {
    let grid = *f.grid();
    let fbar_hat = fourier::space_to_freq(&grid, &f.conj().into_samples());
    let gh = dilated_freq_of_samples(&grid, g.space(), -t, 1.0);
    let d = grid.dim() as i32;
    let factor = t.powi(d) * TWO_PI.powi(d);
    let dxi = grid.freq_spacing().powi(d);
    let sum: f64 = fbar_hat
        .iter()
        .zip(&gh)
        .map(|(a, b)| (a * b).norm_sqr())
        .sum();
    factor * dxi * sum
}

/// Block-max pyramid over one group-function column, supporting exact
/// weighted suprema with distance pruning.
struct MaxPyramid<'a> {
    grid: &'a GridSpec,
    values: Vec<f64>,
    levels: Vec<Vec<f64>>, // levels[k]: max over 2^k-sized blocks per axis
}

impl<'a> MaxPyramid<'a> {
    fn new(grid: &'a GridSpec, column: &[Complex64]) -> Self {
        let values: Vec<f64> = column.iter().map(|z| z.norm()).collect();
        let n = grid.n();
        let mut levels = Vec::new();
        match grid.dim() {
            1 => {
                let mut prev = values.clone();
                while prev.len() > 1 {
                    let next: Vec<f64> = prev
                        .chunks(2)
                        .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
                        .collect();
                    levels.push(next.clone());
                    prev = next;
                }
            }
            _ => {
                let mut prev = values.clone();
                let mut m = n;
                while m > 1 {
                    let half = m / 2;
                    let mut next = vec![f64::NEG_INFINITY; half * half];
                    for bx in 0..half {
                        for by in 0..half {
                            let mut v = f64::NEG_INFINITY;
                            for ox in 0..2 {
                                for oy in 0..2 {
                                    v = v.max(prev[(2 * bx + ox) * m + 2 * by + oy]);
                                }
                            }
                            next[bx * half + by] = v;
                        }
                    }
                    levels.push(next.clone());
                    prev = next;
                    m = half;
                }
            }
        }
        Self { grid, values, levels }
    }

    /// Exact `sup_u |F(u)| w(|u - x|)` for a weight that is non-increasing in
    /// the distance; `w` receives the Euclidean distance.
    fn weighted_sup(&self, at: usize, w: &dyn Fn(f64) -> f64) -> f64 {
        let h = self.grid.spacing();
        let n = self.grid.n();
        let [ix, iy] = self.grid.split_index(at);
        let mut best = self.values[at] * w(0.0);
        // Stack of (level, block index) candidates; level usize::MAX = leaf.
        let top = self.levels.len();
        let mut stack: Vec<(usize, usize)> = vec![(top, 0)];
        while let Some((level, block)) = stack.pop() {
            if level == 0 {
                let dist = self.block_distance(ix, iy, 0, block, h, n);
                let v = self.values[block] * w(dist);
                if v > best {
                    best = v;
                }
                continue;
            }
            let node_max = if level == top && top == 0 {
                // Degenerate: no levels built (n == 1), handled by leaf path.
                continue;
            } else {
                self.levels[level - 1][block]
            };
            let dist = self.block_distance(ix, iy, level, block, h, n);
            if node_max * w(dist) <= best {
                continue;
            }
            // Descend into children, nearest last so it pops first.
            match self.grid.dim() {
                1 => {
                    let c0 = 2 * block;
                    let len = if level >= 2 { self.levels[level - 2].len() } else { self.values.len() };
                    let mut kids: Vec<usize> = [c0, c0 + 1].into_iter().filter(|&c| c < len).collect();
                    kids.sort_by(|&a, &b| {
                        let da = self.block_distance(ix, iy, level - 1, a, h, n);
                        let db = self.block_distance(ix, iy, level - 1, b, h, n);
                        db.partial_cmp(&da).unwrap()
                    });
                    for c in kids {
                        stack.push((level - 1, c));
                    }
                }
                _ => {
                    let side = n >> level;
                    let (bx, by) = (block / side, block % side);
                    let child_side = n >> (level - 1);
                    let mut kids = Vec::with_capacity(4);
                    for ox in 0..2 {
                        for oy in 0..2 {
                            let cx = 2 * bx + ox;
                            let cy = 2 * by + oy;
                            if cx < child_side && cy < child_side {
                                kids.push(cx * child_side + cy);
                            }
                        }
                    }
                    kids.sort_by(|&a, &b| {
                        let da = self.block_distance(ix, iy, level - 1, a, h, n);
                        let db = self.block_distance(ix, iy, level - 1, b, h, n);
                        db.partial_cmp(&da).unwrap()
                    });
                    for c in kids {
                        stack.push((level - 1, c));
                    }
                }
            }
        }
        best
    }

    /// Minimal Euclidean distance from grid point (ix, iy) to the block at
    /// the given level (0 = single sample).
    fn block_distance(&self, ix: usize, iy: usize, level: usize, block: usize, h: f64, n: usize) -> f64 {
        let size = 1usize << level;
        match self.grid.dim() {
            1 => {
                let lo = block * size;
                let hi = ((block + 1) * size - 1).min(n - 1);
                let dx = if ix < lo {
                    (lo - ix) as f64
                } else if ix > hi {
                    (ix - hi) as f64
                } else {
                    0.0
                };
                dx * h
            }
            _ => {
                let side = (n >> level).max(1);
                let (bx, by) = (block / side, block % side);
                let (lox, hix) = (bx * size, ((bx + 1) * size - 1).min(n - 1));
                let (loy, hiy) = (by * size, ((by + 1) * size - 1).min(n - 1));
                let dx = if ix < lox {
                    (lox - ix) as f64
                } else if ix > hix {
                    (ix - hix) as f64
                } else {
                    0.0
                };
                let dy = if iy < loy {
                    (loy - iy) as f64
                } else if iy > hiy {
                    (iy - hiy) as f64
                } else {
                    0.0
                };
                (dx * dx + dy * dy).sqrt() * h
            }
        }
    }
}

/// Exact discrete Peetre supremum of one column at scale `t`:
/// `sup_u |F(u)| / (1 + |u - x| / t)^a` with off-box values treated as zero.
pub(crate) fn peetre_column(grid: &GridSpec, column: &[Complex64], t: f64, a: f64) -> Vec<f64> {
    if a == 0.0 {
        let m = column.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        return vec![m; column.len()];
    }
    let pyramid = MaxPyramid::new(grid, column);
    let w = move |dist: f64| (1.0 + dist / t).powf(-a);
    (0..column.len()).map(|i| pyramid.weighted_sup(i, &w)).collect()
}

/// Peetre maximal function of a group function: at each `(x, t)` the weighted
/// supremum over all grid offsets with weight `(1 + |y|/t)^-a`.
pub fn peetre_maximal(f: &GroupFunction, a: f64) -> Result<GroupFunction> {
    if !(a.is_finite() && a >= 0.0) {
        return Err(LabError::InvalidInput(format!("Peetre exponent must be >= 0, got {a}")));
    }
    let scales = f.ladder().scales();
    let grid = *f.grid();
    f.map_columns(|m, col| {
        peetre_column(&grid, col, scales[m], a)
            .into_iter()
            .map(|v| Complex64::new(v, 0.0))
            .collect()
    })
}

/// Discrete Peetre maximal function `(Phi_k^* f)_a` for a precomputed dilate
/// `Phi_k = 2^(kd) Phi(2^k .)`; shares the supremum code path with
/// [`peetre_maximal`] at `t = 2^-k`.
pub fn discrete_peetre(f: &SampledSignal, phi_k: &Kernel, a: f64, k: i32) -> Result<SampledSignal> {
    let conv = convolve(f, phi_k)?;
    let t = 2.0f64.powi(-k);
    let sup = peetre_column(f.grid(), conv.samples(), t, a);
    SampledSignal::new(
        *f.grid(),
        sup.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// Hardy-Littlewood maximal function over centered cubes with grid-aligned
/// half-widths; averages by the rectangle rule, cubes clipped to the box.
pub fn hl_maximal(f: &SampledSignal) -> Result<SampledSignal> {
    let grid = *f.grid();
    let n = grid.n();
    let out = match grid.dim() {
        1 => {
            let mut prefix = vec![0.0f64; n + 1];
            for i in 0..n {
                prefix[i + 1] = prefix[i] + f.samples()[i].norm();
            }
            let mut out = Vec::with_capacity(n);
            for i in 0..n {
                let mut best = 0.0f64;
                for k in 0..n {
                    let lo = i.saturating_sub(k);
                    let hi = (i + k).min(n - 1);
                    let mean = (prefix[hi + 1] - prefix[lo]) / (hi - lo + 1) as f64;
                    if mean > best {
                        best = mean;
                    }
                    if lo == 0 && hi == n - 1 {
                        break;
                    }
                }
                out.push(Complex64::new(best, 0.0));
            }
            out
        }
        _ => {
            // Summed-area table.
            let mut sat = vec![0.0f64; (n + 1) * (n + 1)];
            for ix in 0..n {
                for iy in 0..n {
                    sat[(ix + 1) * (n + 1) + iy + 1] = f.samples()[ix * n + iy].norm()
                        + sat[ix * (n + 1) + iy + 1]
                        + sat[(ix + 1) * (n + 1) + iy]
                        - sat[ix * (n + 1) + iy];
                }
            }
            let boxsum = |lox: usize, hix: usize, loy: usize, hiy: usize| -> f64 {
                sat[(hix + 1) * (n + 1) + hiy + 1] - sat[lox * (n + 1) + hiy + 1]
                    - sat[(hix + 1) * (n + 1) + loy]
                    + sat[lox * (n + 1) + loy]
            };
            let mut out = Vec::with_capacity(n * n);
            for ix in 0..n {
                for iy in 0..n {
                    let mut best = 0.0f64;
                    for k in 0..n {
                        let lox = ix.saturating_sub(k);
                        let hix = (ix + k).min(n - 1);
                        let loy = iy.saturating_sub(k);
                        let hiy = (iy + k).min(n - 1);
                        let count = ((hix - lox + 1) * (hiy - loy + 1)) as f64;
                        let mean = boxsum(lox, hix, loy, hiy) / count;
                        if mean > best {
                            best = mean;
                        }
                        if lox == 0 && hix == n - 1 && loy == 0 && hiy == n - 1 {
                            break;
                        }
                    }
                    out.push(Complex64::new(best, 0.0));
                }
            }
            out
        }
    };
    SampledSignal::new(grid, out)
}

/// Fitted decay profile of `W_Phi Phi0`.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct DecayProfile {
    /// Least-squares slope of `log sup_x |W(., t)|` against `log t` over the
    /// smallest resolvable decade.
    pub scale_slope: f64,
    /// Fitted polynomial decay order in space at fixed small scale.
    pub spatial_order: f64,
    /// The scale window used for the fit.
    pub window: (f64, f64),
    /// Max absolute residual of the log-log fit.
    pub residual: f64,
}

/// Fit the small-scale decay profile of the wavelet transform of `Phi0`
/// against analyzer `Phi` (ladder restricted to `t < 1`).
pub fn cwt_decay_profile(phi: &Kernel, phi0: &Kernel, ladder: &ScaleLadder) -> Result<DecayProfile> {
    let scales_all = ladder.scales();
    let small: Vec<(usize, f64)> = scales_all
        .iter()
        .copied()
        .enumerate()
        .filter(|&(_, t)| t < 1.0)
        .collect();
    if small.len() < 4 {
        return Err(LabError::DegenerateFit("need at least 4 ladder nodes below t = 1".into()));
    }
    let t_min = small.iter().map(|&(_, t)| t).fold(f64::INFINITY, f64::min);
    let decade: Vec<(usize, f64)> = small
        .iter()
        .copied()
        .filter(|&(_, t)| t <= 10.0 * t_min)
        .collect();
    if decade.len() < 4 {
        return Err(LabError::DegenerateFit("fewer than 4 nodes in the smallest decade".into()));
    }
    let w = cwt(&phi0.as_signal(), phi, ladder)?;
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for &(m, t) in &decade {
        let sup = w.column(m).iter().map(|z| z.norm()).fold(0.0f64, f64::max);
        if sup > 0.0 {
            xs.push(t.ln());
            ys.push(sup.ln());
        }
    }
    if xs.len() < 4 {
        return Err(LabError::DegenerateFit("transform vanishes on the fit window".into()));
    }
    let (slope, _, residual) = least_squares(&xs, &ys);

    // Spatial order at the smallest node of the decade.
    let (m0, t0) = decade[0];
    let grid = w.grid();
    let col = w.column(m0);
    let peak = col.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let mut sx = Vec::new();
    let mut sy = Vec::new();
    let n = grid.n();
    let mid = n / 2;
    for ix in mid..n {
        let idx = grid.flat_index(ix, if grid.dim() == 2 { mid } else { 0 });
        let r = grid.point(idx)[0].abs();
        let v = col[idx].norm();
        if r > 3.0 * t0 && v > 1e-12 * peak && v < 0.5 * peak {
            sx.push((1.0 + r).ln());
            sy.push(v.ln());
        }
    }
    let spatial_order = if sx.len() >= 4 {
        let (s, _, _) = least_squares(&sx, &sy);
        -s
    } else {
        f64::INFINITY // decays below the floor immediately: super-polynomial
    };
    Ok(DecayProfile {
        scale_slope: slope,
        spatial_order,
        window: (decade[0].1.min(t_min), 10.0 * t_min),
        residual,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        num += (x - mx) * (y - my);
        den += (x - mx) * (x - mx);
    }
    let slope = num / den;
    let intercept = my - slope * mx;
    let residual = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - slope * x - intercept).abs())
        .fold(0.0f64, f64::max);
    (slope, intercept, residual)
}

/// Weighted chain sum `G_l = sum_k 2^(-|k - l| delta) g_k` over the window.
pub fn weighted_chain_smoother(g: &[f64], delta: f64) -> Result<Vec<f64>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(LabError::InvalidInput("delta must be positive".into()));
    }
    let n = g.len();
    let mut out = vec![0.0f64; n];
    for (l, o) in out.iter_mut().enumerate() {
        for (k, &v) in g.iter().enumerate() {
            *o += 2.0f64.powf(-((k as f64 - l as f64).abs()) * delta) * v;
        }
    }
    Ok(out)
}

/// Signal-valued variant of the chain smoother: maps over samples.
pub fn weighted_chain_smoother_signals(g: &[SampledSignal], delta: f64) -> Result<Vec<SampledSignal>> {
    if !(delta.is_finite() && delta > 0.0) {
        return Err(LabError::InvalidInput("delta must be positive".into()));
    }
    let first = g
        .first()
        .ok_or_else(|| LabError::InvalidInput("empty sequence".into()))?;
    let grid = *first.grid();
    let mut out = Vec::with_capacity(g.len());
    for l in 0..g.len() {
        let mut acc = vec![Complex64::new(0.0, 0.0); grid.len()];
        for (k, member) in g.iter().enumerate() {
            if member.grid() != &grid {
                return Err(LabError::InvalidInput("mismatched grids".into()));
            }
            let w = 2.0f64.powf(-((k as f64 - l as f64).abs()) * delta);
            for (a, b) in acc.iter_mut().zip(member.samples()) {
                *a += b * w;
            }
        }
        out.push(SampledSignal::new(grid, acc)?);
    }
    Ok(out)
}

/// Dyadic level window `k` such that `2^-k` stays resolvable on the grid.
pub fn resolvable_dyadic_levels(grid: &GridSpec) -> (i32, i32) {
    let (lo, hi) = resolvable_window(grid);
    // t = 2^-k in [lo, hi]
    let k_min = (-hi.log2()).ceil() as i32;
    let k_max = (-lo.log2()).floor() as i32;
    (k_min, k_max)
}

/// The `2^(kd) Phi(2^k .)` dilate used by discrete characterizations.
pub fn dyadic_dilate(phi: &Kernel, k: i32) -> Result<Kernel> {
    dilate(phi, 2.0f64.powi(-k), DilationTag::L1)
}
