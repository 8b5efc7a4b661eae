//! Sampled signals on uniform grids over a truncated box, geometric scale
//! ladders, and the scalar / mixed Lebesgue norms every other module consumes.
//!
//! Quadrature is the rectangle rule on the uniform grid (consistent with FFT
//! sampling); scale integrals use trapezoid weights on the logarithmic grid.
//! Signals are assumed negligible outside `[-X, X]^d`; nothing renormalizes.

use num_complex::Complex64;

use crate::error::{LabError, Result};
use crate::fourier;

/// Uniform grid over the box `[-X, X]^d`, `n` samples per axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    extent: f64,
    n: usize,
}

impl GridSpec {
    pub fn new(dim: usize, extent: f64, n: usize) -> Result<Self> {
        if dim != 1 && dim != 2 {
            return Err(LabError::InvalidInput(format!("dimension must be 1 or 2, got {dim}")));
        }
        if !(extent.is_finite() && extent > 0.0) {
            return Err(LabError::InvalidInput(format!("extent must be positive, got {extent}")));
        }
        if n < 16 || !n.is_power_of_two() {
            return Err(LabError::InvalidInput(format!(
                "per-axis count must be a power of two >= 16, got {n}"
            )));
        }
        Ok(Self { dim, extent, n })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    /// Samples per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Grid spacing `h = 2X/n`.
    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.n as f64
    }

    /// Total number of samples `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Frequency spacing of the dual grid.
    pub fn freq_spacing(&self) -> f64 {
        std::f64::consts::PI / self.extent
    }

    /// Half-width of the dual frequency box (the Nyquist frequency).
    pub fn freq_extent(&self) -> f64 {
        std::f64::consts::PI / self.spacing()
    }

    /// Quadrature weight `h^d` of one cell.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// Spatial coordinate along one axis.
    pub fn axis_coord(&self, j: usize) -> f64 {
        -self.extent + j as f64 * self.spacing()
    }

    /// Frequency coordinate along one axis (centered layout).
    pub fn axis_freq(&self, k: usize) -> f64 {
        (k as f64 - self.n as f64 / 2.0) * self.freq_spacing()
    }

    /// Per-axis indices of a flat index (row-major, x outer).
    pub fn split_index(&self, i: usize) -> [usize; 2] {
        if self.dim == 1 {
            [i, 0]
        } else {
            [i / self.n, i % self.n]
        }
    }

    pub fn flat_index(&self, ix: usize, iy: usize) -> usize {
        if self.dim == 1 {
            ix
        } else {
            ix * self.n + iy
        }
    }

    /// Spatial point of a flat index; the second coordinate is 0 when d = 1.
    pub fn point(&self, i: usize) -> [f64; 2] {
        let [ix, iy] = self.split_index(i);
        if self.dim == 1 {
            [self.axis_coord(ix), 0.0]
        } else {
            [self.axis_coord(ix), self.axis_coord(iy)]
        }
    }

    /// Frequency point of a flat index in the centered layout.
    pub fn freq_point(&self, i: usize) -> [f64; 2] {
        let [kx, ky] = self.split_index(i);
        if self.dim == 1 {
            [self.axis_freq(kx), 0.0]
        } else {
            [self.axis_freq(kx), self.axis_freq(ky)]
        }
    }

    /// Euclidean norm of the frequency point at flat index `i`.
    pub fn freq_radius(&self, i: usize) -> f64 {
        let p = self.freq_point(i);
        p[0].hypot(p[1])
    }
}

/// Complex samples of a function on a [`GridSpec`].
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

impl SampledSignal {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.len() {
            return Err(LabError::InvalidInput(format!(
                "sample count {} does not match grid size {}",
                samples.len(),
                grid.len()
            )));
        }
        if samples.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(LabError::InvalidInput("non-finite sample".into()));
        }
        Ok(Self { grid, samples })
    }

    pub fn zero(grid: GridSpec) -> Self {
        Self { grid, samples: vec![Complex64::new(0.0, 0.0); grid.len()] }
    }

    /// Sample a real-valued function of the spatial point.
    pub fn from_real_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> f64) -> Result<Self> {
        let samples = (0..grid.len())
            .map(|i| Complex64::new(f(grid.point(i)), 0.0))
            .collect();
        Self::new(grid, samples)
    }

    pub fn from_complex_fn(grid: GridSpec, f: impl Fn([f64; 2]) -> Complex64) -> Result<Self> {
        let samples = (0..grid.len()).map(|i| f(grid.point(i))).collect();
        Self::new(grid, samples)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z * c).collect(),
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            grid: self.grid,
            samples: self.samples.iter().map(|z| z.conj()).collect(),
        }
    }

    /// Pointwise sum; grids must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.grid != other.grid {
            return Err(LabError::InvalidInput("mismatched grids".into()));
        }
        let samples = self
            .samples
            .iter()
            .zip(&other.samples)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self { grid: self.grid, samples })
    }

    /// Largest |sample| on the outer band of the box, relative to the peak.
    /// Used by convolution wrap guards and corpus tail checks.
    pub fn edge_tail(&self) -> f64 {
        let n = self.grid.n();
        let band = 2;
        let mut peak = 0.0f64;
        let mut edge = 0.0f64;
        for i in 0..self.samples.len() {
            let [ix, iy] = self.grid.split_index(i);
            let v = self.samples[i].norm();
            peak = peak.max(v);
            let on_edge = ix < band
                || ix >= n - band
                || (self.grid.dim() == 2 && (iy < band || iy >= n - band));
            if on_edge {
                edge = edge.max(v);
            }
        }
        if peak == 0.0 {
            0.0
        } else {
            edge / peak
        }
    }
}

/// Geometric scale ladder `t_j = beta^(-j/nu)`, `j` in `[j_min, j_max]`.
///
/// `nu` is the number of sub-steps per octave used by continuous scale
/// integrals; scales are strictly decreasing in `j`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaleLadder {
    beta: f64,
    nu: u32,
    j_min: i64,
    j_max: i64,
}

impl ScaleLadder {
    pub fn new(beta: f64, nu: u32, j_min: i64, j_max: i64) -> Result<Self> {
        if !(beta.is_finite() && beta > 1.0) {
            return Err(LabError::InvalidInput(format!("ladder base must exceed 1, got {beta}")));
        }
        if nu < 1 {
            return Err(LabError::InvalidInput("oversampling factor must be >= 1".into()));
        }
        if j_min > j_max {
            return Err(LabError::InvalidInput(format!(
                "ladder range empty: j_min {j_min} > j_max {j_max}"
            )));
        }
        Ok(Self { beta, nu, j_min, j_max })
    }

    /// Largest ladder inside the resolvable scale window `[2h, X/2]` of `grid`.
    pub fn resolvable(grid: &GridSpec, beta: f64, nu: u32) -> Result<Self> {
        let (lo, hi) = resolvable_window(grid);
        let lb = beta.ln();
        // t = beta^(-j/nu) in [lo, hi]  <=>  j in [-nu ln(hi)/ln(beta), -nu ln(lo)/ln(beta)]
        let j_min = (-(nu as f64) * hi.ln() / lb).ceil() as i64;
        let j_max = (-(nu as f64) * lo.ln() / lb).floor() as i64;
        Self::new(beta, nu, j_min, j_max)
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn nu(&self) -> u32 {
        self.nu
    }

    pub fn j_min(&self) -> i64 {
        self.j_min
    }

    pub fn j_max(&self) -> i64 {
        self.j_max
    }

    pub fn len(&self) -> usize {
        (self.j_max - self.j_min + 1) as usize
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn scale(&self, j: i64) -> f64 {
        self.beta.powf(-(j as f64) / self.nu as f64)
    }

    /// Scale list, strictly decreasing.
    pub fn scales(&self) -> Vec<f64> {
        (self.j_min..=self.j_max).map(|j| self.scale(j)).collect()
    }

    /// Logarithmic step `ln(beta)/nu` between adjacent nodes.
    pub fn log_step(&self) -> f64 {
        self.beta.ln() / self.nu as f64
    }

    /// Sub-ladder restricted to scales `<= cap` (inhomogeneous truncation).
    pub fn clipped_above(&self, cap: f64) -> Result<Self> {
        let lb = self.beta.ln();
        let j_lo = (-(self.nu as f64) * cap.ln() / lb).ceil() as i64;
        Self::new(self.beta, self.nu, j_lo.max(self.j_min), self.j_max)
    }
}

/// Resolvable scale window `[2h, X/2]` of a grid.
pub fn resolvable_window(grid: &GridSpec) -> (f64, f64) {
    (2.0 * grid.spacing(), grid.extent() / 2.0)
}

/// Mixed Lebesgue exponents `p, q` in `(0, inf]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixedNormParams {
    pub p: f64,
    pub q: f64,
}

impl MixedNormParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        validate_exponent(p, "p")?;
        validate_exponent(q, "q")?;
        Ok(Self { p, q })
    }
}

pub(crate) fn validate_exponent(p: f64, name: &str) -> Result<()> {
    if p.is_nan() || p <= 0.0 {
        return Err(LabError::InvalidInput(format!(
            "exponent {name} must be positive or infinite, got {p}"
        )));
    }
    Ok(())
}

/// `L_p` quasi-norm by rectangle-rule quadrature; `p = inf` is the sample sup.
pub fn lp_norm(f: &SampledSignal, p: f64) -> Result<f64> {
    validate_exponent(p, "p")?;
    let moduli = f.samples().iter().map(|z| z.norm());
    if p.is_infinite() {
        return Ok(moduli.fold(0.0f64, f64::max));
    }
    let sum: f64 = moduli.map(|v| v.powf(p)).sum();
    Ok((f.grid().cell_volume() * sum).powf(1.0 / p))
}

/// `L_p` norm of a plain nonnegative field sharing a grid (helper for norm
/// machinery that aggregates pointwise before the outer norm).
pub(crate) fn lp_norm_field(grid: &GridSpec, field: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return field.iter().fold(0.0f64, |m, &v| m.max(v));
    }
    let sum: f64 = field.iter().map(|&v| v.powf(p)).sum();
    (grid.cell_volume() * sum).powf(1.0 / p)
}

/// Outer `l_q` of inner `L_p` norms: `(sum_k ||f_k||_p^q)^(1/q)`.
pub fn lq_of_lp(members: &[SampledSignal], mn: MixedNormParams) -> Result<f64> {
    let grid = shared_grid(members)?;
    let _ = grid;
    let norms: Vec<f64> = members
        .iter()
        .map(|f| lp_norm(f, mn.p))
        .collect::<Result<_>>()?;
    Ok(aggregate_lq(&norms, mn.q))
}

/// Inner pointwise `l_q` aggregation followed by `L_p`.
pub fn lp_of_lq(members: &[SampledSignal], mn: MixedNormParams) -> Result<f64> {
    let grid = *shared_grid(members)?;
    let mut field = vec![0.0f64; grid.len()];
    if mn.q.is_infinite() {
        for f in members {
            for (acc, z) in field.iter_mut().zip(f.samples()) {
                *acc = acc.max(z.norm());
            }
        }
    } else {
        for f in members {
            for (acc, z) in field.iter_mut().zip(f.samples()) {
                *acc += z.norm().powf(mn.q);
            }
        }
        let inv = 1.0 / mn.q;
        for v in &mut field {
            *v = v.powf(inv);
        }
    }
    Ok(lp_norm_field(&grid, &field, mn.p))
}

pub(crate) fn aggregate_lq(values: &[f64], q: f64) -> f64 {
    if q.is_infinite() {
        values.iter().fold(0.0f64, |m, &v| m.max(v))
    } else {
        values.iter().map(|&v| v.powf(q)).sum::<f64>().powf(1.0 / q)
    }
}

fn shared_grid(members: &[SampledSignal]) -> Result<&GridSpec> {
    let first = members
        .first()
        .ok_or_else(|| LabError::InvalidInput("empty member list".into()))?;
    for m in members {
        if m.grid() != first.grid() {
            return Err(LabError::InvalidInput("mismatched grids in member list".into()));
        }
    }
    Ok(first.grid())
}

/// Samples of `x -> f(lambda (x - shift))` by band-limited interpolation.
///
/// Exact when `shift` is a grid multiple and `lambda = 1` (circular index
/// shift); dyadic `lambda` uses exact band-limited decimation/refinement.
pub fn resample(f: &SampledSignal, shift: [f64; 2], lambda: f64) -> Result<SampledSignal> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(LabError::InvalidInput(format!("dilation must be positive, got {lambda}")));
    }
    // f(lambda(x - shift)) = (T_s f)(lambda x) with s = lambda * shift.
    let s = [lambda * shift[0], lambda * shift[1]];
    let shifted = translate(f, s)?;
    dilate_samples(&shifted, lambda)
}

/// Samples of `x -> f(x - s)`; circular shift, exact on grid multiples.
fn translate(f: &SampledSignal, s: [f64; 2]) -> Result<SampledSignal> {
    if s[0] == 0.0 && (f.grid().dim() == 1 || s[1] == 0.0) {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let h = grid.spacing();
    let steps: Vec<f64> = (0..grid.dim()).map(|ax| s[ax] / h).collect();
    let all_integer = steps.iter().all(|v| (v - v.round()).abs() < 1e-9);
    if all_integer {
        let n = grid.n() as i64;
        let kx = steps[0].round() as i64;
        let ky = if grid.dim() == 2 { steps[1].round() as i64 } else { 0 };
        let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
        for i in 0..grid.len() {
            let [ix, iy] = grid.split_index(i);
            let sx = (ix as i64 - kx).rem_euclid(n) as usize;
            let sy = (iy as i64 - ky).rem_euclid(n) as usize;
            out[i] = f.samples()[grid.flat_index(sx, sy)];
        }
        return SampledSignal::new(grid, out);
    }
    // Fractional shift through a frequency-side phase.
    let mut freq = fourier::space_to_freq(&grid, f.samples());
    for (i, v) in freq.iter_mut().enumerate() {
        let xi = grid.freq_point(i);
        let phase = -(xi[0] * s[0] + xi[1] * s[1]);
        *v *= Complex64::from_polar(1.0, phase);
    }
    SampledSignal::new(grid, fourier::freq_to_space(&grid, &freq))
}

/// Samples of `x -> f(lambda x)`.
fn dilate_samples(f: &SampledSignal, lambda: f64) -> Result<SampledSignal> {
    if lambda == 1.0 {
        return Ok(f.clone());
    }
    let grid = *f.grid();
    let log2 = lambda.log2();
    if (log2 - log2.round()).abs() < 1e-12 {
        let m = log2.round() as i32;
        let mut cur = f.clone();
        for _ in 0..m.abs() {
            cur = if m > 0 { decimate2(&cur)? } else { refine2(&cur)? };
        }
        return Ok(cur);
    }
    trig_dilate(f, lambda)
}

/// `g(x_j) = f(2 x_j)`: exact sample picks from the middle half, zero outside.
fn decimate2(f: &SampledSignal) -> Result<SampledSignal> {
    let grid = *f.grid();
    let n = grid.n() as i64;
    let pick = |j: i64| -> Option<i64> {
        let m = 2 * j - n / 2;
        (0..n).contains(&m).then_some(m)
    };
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let [ix, iy] = grid.split_index(i);
        let px = pick(ix as i64);
        let py = if grid.dim() == 2 { pick(iy as i64) } else { Some(0) };
        if let (Some(mx), Some(my)) = (px, py) {
            out[i] = f.samples()[grid.flat_index(mx as usize, my as usize)];
        }
    }
    SampledSignal::new(grid, out)
}

/// `g(x_j) = f(x_j / 2)` by zero-padded Fourier refinement.
fn refine2(f: &SampledSignal) -> Result<SampledSignal> {
    let grid = *f.grid();
    let n = grid.n();
    let freq = fourier::space_to_freq(&grid, f.samples());
    // Refined grid: same box, doubled per-axis count, doubled frequency band.
    let fine = GridSpec::new(grid.dim(), grid.extent(), 2 * n)?;
    let mut padded = vec![Complex64::new(0.0, 0.0); fine.len()];
    for i in 0..grid.len() {
        let [kx, ky] = grid.split_index(i);
        let fx = kx + n / 2;
        let fy = if grid.dim() == 2 { ky + n / 2 } else { 0 };
        padded[fine.flat_index(fx, fy)] = freq[i];
    }
    let up = fourier::freq_to_space(&fine, &padded);
    // f(x_j / 2) = up[j + n/2] per axis.
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    for i in 0..grid.len() {
        let [ix, iy] = grid.split_index(i);
        let ux = ix + n / 2;
        let uy = if grid.dim() == 2 { iy + n / 2 } else { 0 };
        out[i] = up[fine.flat_index(ux, uy)];
    }
    SampledSignal::new(grid, out)
}

/// Generic dilation by direct evaluation of the trigonometric interpolant
/// `f(y) = (2 pi)^(-d/2) dxi^d sum_k Ff(xi_k) e^(i y . xi_k)`.
fn trig_dilate(f: &SampledSignal, lambda: f64) -> Result<SampledSignal> {
    let grid = *f.grid();
    let freq = fourier::space_to_freq(&grid, f.samples());
    let n = grid.n();
    let scale = (grid.freq_spacing() / (2.0 * std::f64::consts::PI).sqrt())
        .powi(grid.dim() as i32);
    let axis_eval = |data: &[Complex64], stride: usize, coord: f64| -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in 0..n {
            let xi = grid.axis_freq(k);
            acc += data[k * stride] * Complex64::from_polar(1.0, coord * xi);
        }
        acc
    };
    let mut out = vec![Complex64::new(0.0, 0.0); grid.len()];
    match grid.dim() {
        1 => {
            for (j, o) in out.iter_mut().enumerate() {
                let y = lambda * grid.axis_coord(j);
                *o = axis_eval(&freq, 1, y) * scale;
            }
        }
        _ => {
            // Separable passes: interpolate along y for every kx, then along x.
            let mut half = vec![Complex64::new(0.0, 0.0); grid.len()];
            for kx in 0..n {
                let row = &freq[kx * n..(kx + 1) * n];
                for jy in 0..n {
                    let y = lambda * grid.axis_coord(jy);
                    half[kx * n + jy] = axis_eval(row, 1, y);
                }
            }
            for jy in 0..n {
                for jx in 0..n {
                    let x = lambda * grid.axis_coord(jx);
                    out[jx * n + jy] = axis_eval(&half[jy..], n, x) * scale;
                }
            }
        }
    }
    SampledSignal::new(grid, out)
}

/// Geometric-grid quadrature of `int v(t) t^(-sq) dt/t` over the ladder.
///
/// Trapezoid weights in the log domain; the caller folds any extra `t`
/// powers (e.g. the group measure `t^-d`) into `values`.
pub fn scale_integral(values: &[f64], ladder: &ScaleLadder, sq: f64) -> Result<f64> {
    if values.len() != ladder.len() {
        return Err(LabError::InvalidInput(format!(
            "expected one value per ladder node ({}), got {}",
            ladder.len(),
            values.len()
        )));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(LabError::InvalidInput("non-finite ladder value".into()));
    }
    let scales = ladder.scales();
    let step = ladder.log_step();
    let mut acc = 0.0;
    for (m, (&v, &t)) in values.iter().zip(&scales).enumerate() {
        let w = if values.len() > 1 && (m == 0 || m == values.len() - 1) {
            0.5
        } else {
            1.0
        };
        acc += w * v * t.powf(-sq);
    }
    Ok(acc * step)
}
