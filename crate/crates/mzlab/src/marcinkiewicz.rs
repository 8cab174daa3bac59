//! The surface measures sigma_t, their Fourier symbols and maximal
//! function, the Marcinkiewicz operators (ball kernel via telescoped
//! annular shells, the single-annulus variant, and the frequency/scale
//! off-diagonal pieces mu_j), and the oscillatory bound B(t, xi).

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::{MzError, Result};
use crate::grid::{
    forward_transform, inverse_transform, l2_norm, mean_coefficient, sample_bilinear, DomainTag,
    Grid, GridField,
};
use crate::kernels::{
    circle_oscillatory, circle_oscillatory_abs, delta_gamma_norm, default_delta_probes,
    NormValue, RadialWeight, RoughKernel, SurfaceProfile,
};
use crate::littlewood_paley::LPFrame;
use crate::quad::gl8_rule;

/// Per-call angular panel budget (slow-path oscillatory circle integrals).
const ANGULAR_BUDGET: usize = 1 << 17;
/// Per-call radial panel budget.
const RADIAL_BUDGET: usize = 1 << 21;

/// The full parameter bundle identifying one operator.
#[derive(Debug, Clone)]
pub struct OperatorSpec {
    pub omega: RoughKernel,
    pub b: RadialWeight,
    pub profile: SurfaceProfile,
    pub rho: f64,
    pub alpha: f64,
    pub q: f64,
}

impl OperatorSpec {
    pub fn new(
        omega: RoughKernel,
        b: RadialWeight,
        profile: SurfaceProfile,
        rho: f64,
        alpha: f64,
        q: f64,
    ) -> Result<Self> {
        if !(rho > 0.0) || !rho.is_finite() {
            return Err(MzError::InvalidDomain(format!("rho must be > 0, got {rho}")));
        }
        if !(q > 1.0) || !q.is_finite() {
            return Err(MzError::BadExponent(q));
        }
        if !alpha.is_finite() {
            return Err(MzError::InvalidDomain("alpha must be finite".into()));
        }
        Ok(Self {
            omega,
            b,
            profile,
            rho,
            alpha,
            q,
        })
    }

    /// Delta_gamma norm of the radial factor on the default probe range.
    pub fn delta_norm(&self, gamma: f64) -> Result<NormValue> {
        delta_gamma_norm(&self.b, gamma, &default_delta_probes())
    }
}

/// Log-spaced t nodes with trapezoid weights in ln t and dyadic block
/// bookkeeping (2^k <= t < 2^{k+1}).
#[derive(Debug, Clone)]
pub struct TGrid {
    t_min: f64,
    t_max: f64,
    per_octave: usize,
    nodes: Vec<f64>,
}

impl TGrid {
    pub fn new(t_min: f64, t_max: f64, per_octave: usize) -> Result<Self> {
        if !(t_min > 0.0 && t_max > t_min) || per_octave < 4 {
            return Err(MzError::BadTGrid);
        }
        let count = ((t_max / t_min).log2() * per_octave as f64).round() as usize;
        let nodes: Vec<f64> = (0..=count)
            .map(|i| t_min * 2f64.powf(i as f64 / per_octave as f64))
            .collect();
        Ok(Self {
            t_min,
            t_max,
            per_octave,
            nodes,
        })
    }

    /// Same node layout shifted up by one octave (for matched-grid
    /// dilation tests).
    pub fn doubled(&self) -> TGrid {
        TGrid {
            t_min: self.t_min * 2.0,
            t_max: self.t_max * 2.0,
            per_octave: self.per_octave,
            nodes: self.nodes.iter().map(|t| t * 2.0).collect(),
        }
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }
    pub fn t_max(&self) -> f64 {
        self.t_max
    }
    pub fn per_octave(&self) -> usize {
        self.per_octave
    }
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Trapezoid weights for int . dt/t on the node set.
    pub fn weights(&self) -> Vec<f64> {
        let h = std::f64::consts::LN_2 / self.per_octave as f64;
        let n = self.nodes.len();
        (0..n)
            .map(|i| if i == 0 || i == n - 1 { 0.5 * h } else { h })
            .collect()
    }

    /// Dyadic block index: k with 2^k <= t < 2^{k+1}.
    pub fn block_of(t: f64) -> i64 {
        (t.log2() + 1e-12).floor() as i64
    }
}

/// Default quadrature grid used by the experiments.
pub fn default_tgrid() -> TGrid {
    TGrid::new(2f64.powi(-6), 2f64.powi(6), 8).unwrap()
}

// ---------------------------------------------------------------------------
// sigma_t symbols
// ---------------------------------------------------------------------------

fn radial_segments(spec: &OperatorSpec, t: f64) -> Vec<(f64, f64)> {
    let lo = 0.5 * t;
    let mut cuts = vec![lo, t];
    for &bp in spec.b.breakpoints() {
        if bp > lo && bp < t {
            cuts.push(bp);
        }
    }
    cuts.sort_by(f64::total_cmp);
    cuts.windows(2).map(|w| (w[0], w[1])).collect()
}

fn sigma_hat_impl(spec: &OperatorSpec, t: f64, xi: (f64, f64), abs: bool) -> Result<Complex64> {
    sigma_hat_quad(spec, t, xi, abs, 8)
}

/// Batched-path variant: same rule with a leaner panel floor (GL8 on a
/// smooth annulus is already ~1e-13 at two panels). Held to 1e-9
/// agreement with the pointwise path.
fn sigma_hat_fast(spec: &OperatorSpec, t: f64, xi: (f64, f64)) -> Result<Complex64> {
    sigma_hat_quad(spec, t, xi, false, 2)
}

fn sigma_hat_quad(
    spec: &OperatorSpec,
    t: f64,
    xi: (f64, f64),
    abs: bool,
    panel_floor: usize,
) -> Result<Complex64> {
    let r_norm = (xi.0 * xi.0 + xi.1 * xi.1).sqrt();
    let psi = xi.1.atan2(xi.0);
    let (gl_nodes, gl_weights) = gl8_rule();
    let rho_m1 = spec.rho - 1.0;
    let rho_is_one = rho_m1.abs() < 1e-15;
    let mut acc = Complex64::new(0.0, 0.0);
    for (lo, hi) in radial_segments(spec, t) {
        let phase = r_norm * (spec.profile.phi(hi) - spec.profile.phi(lo));
        let panels = ((phase / PI).ceil() as usize).max(panel_floor);
        if panels > RADIAL_BUDGET {
            return Err(MzError::QuadratureBudget {
                needed: panels,
                cap: RADIAL_BUDGET,
            });
        }
        let h = (hi - lo) / panels as f64;
        for i in 0..panels {
            let a = lo + i as f64 * h;
            let mid = a + 0.5 * h;
            for (x, w) in gl_nodes.iter().zip(gl_weights) {
                let r = mid + 0.5 * h * x;
                let z = spec.profile.phi(r) * r_norm;
                let ang = if abs {
                    circle_oscillatory_abs(&spec.omega, z, psi, ANGULAR_BUDGET)?
                } else {
                    circle_oscillatory(&spec.omega, z, psi, ANGULAR_BUDGET)?
                };
                let b_val = if abs {
                    spec.b.at(r).abs()
                } else {
                    spec.b.at(r)
                };
                if !b_val.is_finite() {
                    return Err(MzError::NonFiniteWeight(r));
                }
                let r_pow = if rho_is_one { 1.0 } else { r.powf(rho_m1) };
                acc += ang * (w * 0.5 * h * b_val * r_pow);
            }
        }
    }
    Ok(acc * t.powf(-spec.rho))
}

/// Fourier symbol of the annular surface measure at (t, xi):
/// t^{-rho} int_{t/2 <= |y| <= t} b(|y|) Omega(y') |y|^{rho-n}
/// e^{-i phi(|y|) y'. xi} dy, n = 2.
pub fn sigma_hat(t: f64, xi: (f64, f64), spec: &OperatorSpec) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(MzError::InvalidDomain(format!("t must be positive, got {t}")));
    }
    sigma_hat_impl(spec, t, xi, false)
}

/// Symbol of the total-variation measure |sigma_t| (|b Omega| in place of
/// b Omega).
pub fn sigma_hat_abs(t: f64, xi: (f64, f64), spec: &OperatorSpec) -> Result<Complex64> {
    if !(t > 0.0) {
        return Err(MzError::InvalidDomain(format!("t must be positive, got {t}")));
    }
    sigma_hat_impl(spec, t, xi, true)
}

/// Total mass of |sigma_t|; separates into radial and angular factors.
pub fn sigma_total_mass(t: f64, spec: &OperatorSpec) -> Result<f64> {
    if !(t > 0.0) {
        return Err(MzError::InvalidDomain(format!("t must be positive, got {t}")));
    }
    let mut radial = 0.0;
    for (lo, hi) in radial_segments(spec, t) {
        radial += crate::quad::gl8_real(&|r: f64| spec.b.at(r).abs() * r.powf(spec.rho - 1.0), lo, hi);
    }
    Ok(radial * t.powf(-spec.rho) * spec.omega.l1_cached())
}

/// Dense symbol table of sigma_t on a grid, restricted to a band when one
/// is given. Batched path: hermitian mirroring for the real measure and a
/// shared radial panel count across the band.
#[derive(Debug, Clone)]
pub struct SymbolTable {
    pub t: f64,
    pub grid: Grid,
    pub values: Vec<Complex64>,
}

pub fn sigma_symbol_grid(
    t: f64,
    spec: &OperatorSpec,
    grid: Grid,
    band: Option<(f64, f64)>,
) -> Result<SymbolTable> {
    let n = grid.size();
    let half = n / 2;
    let mut values = vec![Complex64::new(0.0, 0.0); grid.len()];
    // Rows ky in 0..=N/2 are computed directly; rows above are conjugate
    // mirrors. The Nyquist column kx = -N/2 has no lattice partner (its
    // negation aliases onto itself), so mirrored rows recompute it.
    let rows: Vec<usize> = (0..=half).collect();
    let computed: Result<Vec<(usize, Vec<Complex64>)>> = rows
        .par_iter()
        .map(|&iy| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for ix in 0..n {
                let (kx, ky) = grid.frequency(iy * n + ix);
                let r = (kx * kx + ky * ky).sqrt();
                if let Some((lo, hi)) = band {
                    if r < lo || r > hi {
                        continue;
                    }
                }
                row[ix] = sigma_hat_impl(spec, t, (kx, ky), false)?;
            }
            Ok((iy, row))
        })
        .collect();
    for (iy, row) in computed? {
        values[iy * n..(iy + 1) * n].copy_from_slice(&row);
    }
    let mirrored: Result<Vec<(usize, Vec<Complex64>)>> = (half + 1..n)
        .collect::<Vec<_>>()
        .par_iter()
        .map(|&iy| {
            let mut row = vec![Complex64::new(0.0, 0.0); n];
            for ix in 0..n {
                if ix == half {
                    let (kx, ky) = grid.frequency(iy * n + ix);
                    let r = (kx * kx + ky * ky).sqrt();
                    if let Some((lo, hi)) = band {
                        if r < lo || r > hi {
                            continue;
                        }
                    }
                    row[ix] = sigma_hat_impl(spec, t, (kx, ky), false)?;
                } else {
                    let sx = (n - ix) % n;
                    let sy = n - iy;
                    row[ix] = values[sy * n + sx].conj();
                }
            }
            Ok((iy, row))
        })
        .collect();
    for (iy, row) in mirrored? {
        values[iy * n..(iy + 1) * n].copy_from_slice(&row);
    }
    Ok(SymbolTable { t, grid, values })
}

// ---------------------------------------------------------------------------
// maximal operators (space-side realizations of the measures)
// ---------------------------------------------------------------------------

/// |sigma_t| * f via direct sampling of the pushforward measure: the
/// absolute-variation measure is discretized on its (r, theta) chart and f
/// is read off with periodic bilinear interpolation.
pub fn sigma_abs_convolve(f: &GridField, t: f64, spec: &OperatorSpec) -> Result<GridField> {
    if f.tag() != DomainTag::Spatial {
        return Err(MzError::DomainTagMismatch {
            expected: "spatial",
            got: "frequency",
        });
    }
    let grid = f.grid();
    let q_ang = spec.omega.sample_count();
    let (gl_nodes, gl_weights) = gl8_rule();
    // radial nodes shared by every x
    let mut radial: Vec<(f64, f64)> = Vec::new(); // (r, weight incl b r^{rho-1})
    for (lo, hi) in radial_segments(spec, t) {
        let panels = 2usize;
        let h = (hi - lo) / panels as f64;
        for i in 0..panels {
            let mid = lo + (i as f64 + 0.5) * h;
            for (x, w) in gl_nodes.iter().zip(gl_weights) {
                let r = mid + 0.5 * h * x;
                radial.push((r, w * 0.5 * h * spec.b.at(r).abs() * r.powf(spec.rho - 1.0)));
            }
        }
    }
    let scale = t.powf(-spec.rho) * 2.0 * PI / q_ang as f64;
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.point(idx);
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..q_ang {
                let theta = 2.0 * PI * j as f64 / q_ang as f64;
                let om = spec.omega.samples()[j].abs();
                if om == 0.0 {
                    continue;
                }
                let (ct, st) = (theta.cos(), theta.sin());
                for &(r, w) in &radial {
                    let s = spec.profile.phi(r);
                    acc += sample_bilinear(f, x - s * ct, y - s * st) * (w * om);
                }
            }
            acc * scale
        })
        .collect();
    GridField::from_values(grid, DomainTag::Spatial, values)
}

/// sigma* f: pointwise sup over the t nodes of ||sigma_t| * f|.
pub fn sigma_star(f: &GridField, spec: &OperatorSpec, tg: &TGrid) -> Result<GridField> {
    let grid = f.grid();
    let mut best = vec![0.0f64; grid.len()];
    for &t in tg.nodes() {
        let conv = sigma_abs_convolve(f, t, spec)?;
        for (b, v) in best.iter_mut().zip(conv.values()) {
            *b = b.max(v.norm());
        }
    }
    GridField::from_values(
        grid,
        DomainTag::Spatial,
        best.into_iter().map(|v| Complex64::new(v, 0.0)).collect(),
    )
}

/// Directional Hardy-Littlewood maximal function along the unit vector
/// y': max over probe radii of the centered line averages (periodic
/// sampling, bilinear interpolation).
pub fn directional_maximal(f: &GridField, y_dir: (f64, f64), radii: &[f64]) -> Result<GridField> {
    if f.tag() != DomainTag::Spatial {
        return Err(MzError::DomainTagMismatch {
            expected: "spatial",
            got: "frequency",
        });
    }
    let grid = f.grid();
    let h = grid.spatial_step();
    let norm = (y_dir.0 * y_dir.0 + y_dir.1 * y_dir.1).sqrt();
    let dir = (y_dir.0 / norm, y_dir.1 / norm);
    let values: Vec<Complex64> = (0..grid.len())
        .into_par_iter()
        .map(|idx| {
            let (x, y) = grid.point(idx);
            let mut best = f.values()[idx].norm();
            for &r in radii {
                let steps = ((2.0 * r / (0.5 * h)).ceil() as usize).clamp(2, 512);
                let dt = 2.0 * r / steps as f64;
                let mut acc = 0.0;
                for s in 0..=steps {
                    let u = -r + s as f64 * dt;
                    let w = if s == 0 || s == steps { 0.5 } else { 1.0 };
                    acc += w * sample_bilinear(f, x - u * dir.0, y - u * dir.1).norm();
                }
                best = best.max(acc * dt / (2.0 * r));
            }
            Complex64::new(best, 0.0)
        })
        .collect();
    GridField::from_values(grid, DomainTag::Spatial, values)
}

// ---------------------------------------------------------------------------
// the operators
// ---------------------------------------------------------------------------

/// Telescoping depth for the ball kernel (residual ratio 2^-rho per shell).
pub const DEFAULT_SHELL_DEPTH: usize = 32;
const TELESCOPE_TOL: f64 = 1e-7;

/// Values of the annular symbol at each extended node x band point.
/// Extended nodes run `depth` octaves below the grid's own bottom so the
/// ball telescoping has its shells.
struct BandSymbols {
    /// lattice flat indices of the band points
    indices: Vec<usize>,
    /// annular symbol values: ann[node][point]
    ann: Vec<Vec<Complex64>>,
    /// ball (telescoped) symbol values per requested node
    ball: Vec<Vec<Complex64>>,
    /// number of extended (below-grid) nodes
    ext: usize,
}

fn band_indices(hat: &GridField) -> Vec<usize> {
    let peak = hat.values().iter().map(|v| v.norm()).fold(0.0f64, f64::max);
    let floor = peak * 1e-14;
    (0..hat.grid().len())
        .filter(|&i| hat.values()[i].norm() > floor && i != 0)
        .collect()
}

fn compute_band_symbols(
    spec: &OperatorSpec,
    tg: &TGrid,
    grid: Grid,
    indices: Vec<usize>,
    depth: usize,
    with_ball: bool,
) -> Result<BandSymbols> {
    let ppo = tg.per_octave();
    let ext = if with_ball { depth * ppo } else { 0 };
    let mut all_nodes: Vec<f64> = Vec::with_capacity(ext + tg.nodes().len());
    for i in 0..ext {
        let e = (ext - i) as f64 / ppo as f64;
        all_nodes.push(tg.t_min() * 2f64.powf(-e));
    }
    all_nodes.extend_from_slice(tg.nodes());
    let freqs: Vec<(f64, f64)> = indices.iter().map(|&i| grid.frequency(i)).collect();
    let ann: Result<Vec<Vec<Complex64>>> = all_nodes
        .par_iter()
        .map(|&t| {
            freqs
                .iter()
                .map(|&xi| sigma_hat_fast(spec, t, xi))
                .collect()
        })
        .collect();
    let ann = ann?;
    let mut ball = Vec::new();
    if with_ball {
        // ball(i) = ann(i) + 2^-rho ball(i - ppo); truncated at the bottom
        let shrink = 2f64.powf(-spec.rho);
        let mut full: Vec<Vec<Complex64>> = Vec::with_capacity(all_nodes.len());
        for i in 0..all_nodes.len() {
            let mut row = ann[i].clone();
            if i >= ppo {
                let prev = &full[i - ppo];
                for (r, p) in row.iter_mut().zip(prev) {
                    *r += shrink * p;
                }
            }
            full.push(row);
        }
        // truncation residual at the requested nodes: the missing shells
        // sit at least `depth` recurrence octaves below every requested
        // node, so their geometric mass bound arrives attenuated by
        // 2^(-rho depth)
        let tail_mass =
            2f64.powf(-spec.rho * depth as f64) * shell_tail_bound(spec, tg.t_min())?;
        let top_mass = sigma_total_mass(tg.t_max(), spec)?;
        if tail_mass > TELESCOPE_TOL * top_mass.max(1e-12) {
            return Err(MzError::TelescopingNotConverged {
                residual: tail_mass,
                tol: TELESCOPE_TOL * top_mass.max(1e-12),
                depth,
            });
        }
        ball = full.split_off(ext);
    }
    Ok(BandSymbols {
        indices,
        ann: ann[ext..].to_vec(),
        ball,
        ext,
    })
}

/// Geometric bound on the mass of the shells below t (the truncated part
/// of the telescoping).
fn shell_tail_bound(spec: &OperatorSpec, t: f64) -> Result<f64> {
    let mut total = 0.0;
    let mut ratio_guard = 0.0f64;
    let mut prev = f64::INFINITY;
    for s in 1..=12 {
        let shell_t = t * 2f64.powi(-(s as i32));
        let m = sigma_total_mass(shell_t, spec)? * 2f64.powf(-spec.rho * s as f64);
        total += m;
        if prev.is_finite() && prev > 0.0 {
            ratio_guard = ratio_guard.max(m / prev);
        }
        prev = m;
    }
    if ratio_guard >= 1.0 {
        // shell masses not shrinking: no geometric tail
        return Ok(f64::INFINITY);
    }
    Ok(total + prev * ratio_guard / (1.0 - ratio_guard))
}

fn mu_accumulate(
    f: &GridField,
    spec: &OperatorSpec,
    tg: &TGrid,
    symbols: &[Vec<Complex64>],
    indices: &[usize],
) -> Result<GridField> {
    let grid = f.grid();
    let hat = forward_transform(f)?;
    let weights = tg.weights();
    let mut acc = vec![0.0f64; grid.len()];
    for (node, t) in tg.nodes().iter().enumerate() {
        let mut g_hat = GridField::zeros(grid, DomainTag::Frequency);
        for (slot, &idx) in indices.iter().enumerate() {
            g_hat.values_mut()[idx] = hat.values()[idx] * symbols[node][slot];
        }
        let g = inverse_transform(&g_hat)?;
        let w = weights[node] / spec.profile.phi(*t).powf(spec.q * spec.alpha);
        for (a, v) in acc.iter_mut().zip(g.values()) {
            *a += w * v.norm().powf(spec.q);
        }
    }
    GridField::from_values(
        grid,
        DomainTag::Spatial,
        acc.into_iter()
            .map(|v| Complex64::new(v.powf(1.0 / spec.q), 0.0))
            .collect(),
    )
}

fn check_input(f: &GridField) -> Result<()> {
    if f.tag() != DomainTag::Spatial {
        return Err(MzError::DomainTagMismatch {
            expected: "spatial",
            got: "frequency",
        });
    }
    let scale = l2_norm(f);
    if scale > 0.0 {
        let mean = mean_coefficient(f)?;
        if mean > 1e-10 * scale {
            return Err(MzError::NotZeroMean(mean));
        }
    }
    Ok(())
}

/// The full operator (ball kernel B(t), realized as the telescoping sum of
/// annular shells):
/// x -> ( sum_nodes |S_t f(x)|^q w(t) / (t phi(t)^{q alpha}) )^{1/q}.
pub fn mu_apply(f: &GridField, spec: &OperatorSpec, tg: &TGrid) -> Result<GridField> {
    check_input(f)?;
    if l2_norm(f) == 0.0 {
        return Ok(GridField::zeros(f.grid(), DomainTag::Spatial));
    }
    let hat = forward_transform(f)?;
    let indices = band_indices(&hat);
    let syms = compute_band_symbols(spec, tg, f.grid(), indices, DEFAULT_SHELL_DEPTH, true)?;
    mu_accumulate(f, spec, tg, &syms.ball, &syms.indices)
}

/// The single-annulus (modified) operator.
pub fn mu_tilde_apply(f: &GridField, spec: &OperatorSpec, tg: &TGrid) -> Result<GridField> {
    check_input(f)?;
    if l2_norm(f) == 0.0 {
        return Ok(GridField::zeros(f.grid(), DomainTag::Spatial));
    }
    let hat = forward_transform(f)?;
    let indices = band_indices(&hat);
    let syms = compute_band_symbols(spec, tg, f.grid(), indices, 0, false)?;
    mu_accumulate(f, spec, tg, &syms.ann, &syms.indices)
}

/// The j-th frequency/scale piece: for t in the dyadic block [2^k, 2^{k+1})
/// only the frame piece at index j - k acts.
pub fn mu_j_apply(
    f: &GridField,
    spec: &OperatorSpec,
    tg: &TGrid,
    j: i64,
    frame: &LPFrame,
) -> Result<GridField> {
    check_input(f)?;
    let grid = f.grid();
    if l2_norm(f) == 0.0 {
        return Ok(GridField::zeros(grid, DomainTag::Spatial));
    }
    let hat = forward_transform(f)?;
    let indices = band_indices(&hat);
    let weights = tg.weights();
    let (p0, p1) = frame.piece_range();
    let mut acc = vec![0.0f64; grid.len()];
    for (node, &t) in tg.nodes().iter().enumerate() {
        let k = TGrid::block_of(t);
        let ell = j - k;
        if ell < p0 || ell > p1 {
            continue;
        }
        let (slo, shi) = frame.piece_support(ell)?;
        // indices inside the piece support
        let mut touched = false;
        let mut g_hat = GridField::zeros(grid, DomainTag::Frequency);
        for &idx in &indices {
            let (kx, ky) = grid.frequency(idx);
            let r = (kx * kx + ky * ky).sqrt();
            if r <= slo || r >= shi {
                continue;
            }
            let psi = frame.piece(ell, r)?;
            if psi == 0.0 {
                continue;
            }
            let sym = sigma_hat_fast(spec, t, (kx, ky))?;
            g_hat.values_mut()[idx] = hat.values()[idx] * sym * psi;
            touched = true;
        }
        if !touched {
            continue;
        }
        let g = inverse_transform(&g_hat)?;
        let w = weights[node] / spec.profile.phi(t).powf(spec.q * spec.alpha);
        for (a, v) in acc.iter_mut().zip(g.values()) {
            *a += w * v.norm().powf(spec.q);
        }
    }
    GridField::from_values(
        grid,
        DomainTag::Spatial,
        acc.into_iter()
            .map(|v| Complex64::new(v.powf(1.0 / spec.q), 0.0))
            .collect(),
    )
}

/// L^2 norms of every piece mu_j f for j in [j_lo, j_hi], computed on the
/// frequency side (q = 2 Plancherel): each (t-block, frame-piece) pair is
/// visited once and contributes to j = block + piece.
pub fn mu_j_norm_l2_table(
    f: &GridField,
    spec: &OperatorSpec,
    tg: &TGrid,
    frame: &LPFrame,
    j_range: (i64, i64),
) -> Result<Vec<(i64, f64)>> {
    let hat = match f.tag() {
        DomainTag::Frequency => f.clone(),
        DomainTag::Spatial => forward_transform(f)?,
    };
    let grid = hat.grid();
    let indices = band_indices(&hat);
    let weights = tg.weights();
    let (p0, p1) = frame.piece_range();
    let (j_lo, j_hi) = j_range;
    let span = (j_hi - j_lo + 1) as usize;
    // group nodes by dyadic block
    let mut blocks: Vec<(i64, Vec<usize>)> = Vec::new();
    for (node, &t) in tg.nodes().iter().enumerate() {
        let k = TGrid::block_of(t);
        match blocks.last_mut() {
            Some((kk, v)) if *kk == k => v.push(node),
            _ => blocks.push((k, vec![node])),
        }
    }
    let two_l = 2.0 * grid.half_width();
    let qalpha = 2.0 * spec.alpha;
    // (block k, piece ell) pairs that can land in the j window
    let mut pairs: Vec<(usize, i64)> = Vec::new();
    for (bi, (k, _)) in blocks.iter().enumerate() {
        for ell in p0..=p1 {
            let j = k + ell;
            if j >= j_lo && j <= j_hi {
                pairs.push((bi, ell));
            }
        }
    }
    let contribs: Result<Vec<(i64, f64)>> = pairs
        .par_iter()
        .map(|&(bi, ell)| {
            let (k, ref nodes) = blocks[bi];
            let j = k + ell;
            let (slo, shi) = frame.piece_support(ell)?;
            let mut pts: Vec<(usize, f64, (f64, f64))> = Vec::new(); // (slot->lattice idx, psi^2 |c|^2, freq)
            for &idx in &indices {
                let (kx, ky) = grid.frequency(idx);
                let r = (kx * kx + ky * ky).sqrt();
                if r <= slo || r >= shi {
                    continue;
                }
                let psi = frame.piece(ell, r)?;
                if psi == 0.0 {
                    continue;
                }
                let c2 = hat.values()[idx].norm_sqr();
                pts.push((idx, psi * psi * c2, (kx, ky)));
            }
            if pts.is_empty() {
                return Ok((j, 0.0));
            }
            let mut total = 0.0;
            for &node in nodes.iter() {
                let t = tg.nodes()[node];
                let wphi = weights[node] / spec.profile.phi(t).powf(qalpha);
                let mut node_sum = 0.0;
                for &(_, amp, xi) in &pts {
                    let sym = sigma_hat_fast(spec, t, xi)?;
                    node_sum += amp * sym.norm_sqr();
                }
                total += wphi * node_sum;
            }
            Ok((j, total * two_l * two_l))
        })
        .collect();
    let mut norms2 = vec![0.0f64; span];
    for (j, v) in contribs? {
        norms2[(j - j_lo) as usize] += v;
    }
    Ok((j_lo..=j_hi)
        .zip(norms2.into_iter().map(f64::sqrt))
        .collect())
}

/// || mu f ||_{L^2} through the frequency side with the ball symbol
/// (q = 2 fast path shared by the ratio experiments).
pub fn mu_norm_l2(f: &GridField, spec: &OperatorSpec, tg: &TGrid) -> Result<f64> {
    Ok(mu_norm_l2_family(&[f], spec, tg)?[0])
}

/// Family variant: one symbol build over the union of the fields' bands,
/// then a cheap spectral sum per field. Only |sigma| enters the L^2 sums,
/// so conjugate lattice pairs share one quadrature (the measure is real).
pub fn mu_norm_l2_family(
    fields: &[&GridField],
    spec: &OperatorSpec,
    tg: &TGrid,
) -> Result<Vec<f64>> {
    if fields.is_empty() {
        return Ok(vec![]);
    }
    let grid = fields[0].grid();
    let hats: Result<Vec<GridField>> = fields
        .iter()
        .map(|f| match f.tag() {
            DomainTag::Frequency => Ok((*f).clone()),
            DomainTag::Spatial => forward_transform(f),
        })
        .collect();
    let hats = hats?;
    let n = grid.size();
    let mirror = |idx: usize| -> usize {
        let ix = idx % n;
        let iy = idx / n;
        ((n - iy) % n) * n + ((n - ix) % n)
    };
    // canonical representative of each conjugate pair present in any band
    let mut slot_of = std::collections::HashMap::new();
    let mut reps: Vec<usize> = Vec::new();
    for hat in &hats {
        if hat.grid() != grid {
            return Err(MzError::BadFieldLength {
                got: hat.grid().len(),
                want: grid.len(),
            });
        }
        for idx in band_indices(hat) {
            let rep = idx.min(mirror(idx));
            slot_of.entry(rep).or_insert_with(|| {
                reps.push(rep);
                reps.len() - 1
            });
        }
    }
    let syms = compute_band_symbols(spec, tg, grid, reps, DEFAULT_SHELL_DEPTH, true)?;
    let weights = tg.weights();
    let two_l = 2.0 * grid.half_width();
    // per-node |ball|^2 against each field's |c|^2 folded onto the reps
    let mut out = Vec::with_capacity(fields.len());
    for hat in &hats {
        let mut amp = vec![0.0f64; syms.indices.len()];
        for idx in band_indices(hat) {
            let rep = idx.min(mirror(idx));
            if let Some(&slot) = slot_of.get(&rep) {
                amp[slot] += hat.values()[idx].norm_sqr();
            }
        }
        let mut total = 0.0;
        for (node, &t) in tg.nodes().iter().enumerate() {
            let w = weights[node] / spec.profile.phi(t).powf(2.0 * spec.alpha);
            let mut s = 0.0;
            for (slot, a) in amp.iter().enumerate() {
                if *a > 0.0 {
                    s += a * syms.ball[node][slot].norm_sqr();
                }
            }
            total += w * s;
        }
        out.push(two_l * total.sqrt());
    }
    let _ = syms.ext;
    Ok(out)
}

// ---------------------------------------------------------------------------
// oscillatory bound B(t, xi) and dyadic block bounds
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct OscillatoryBound {
    pub value: Complex64,
    /// exact no-oscillation value bound (1 - 2^-rho)/rho <= 1/rho
    pub trivial_bound: f64,
    /// C_B c0 ||varphi||_inf / (phi(t) |y'.xi|)
    pub decay_bound: f64,
    pub bound_ok: bool,
    /// the decay bound is only asserted under the monotonicity condition
    pub monotone_ok: bool,
}

/// B(t, xi) = t^-rho int_{t/2}^t e^{-i phi(r) y'.xi} r^{rho-1} dr together
/// with its trivial and second-mean-value decay bounds.
pub fn oscillatory_b(
    t: f64,
    xi: (f64, f64),
    y_dir: (f64, f64),
    spec: &OperatorSpec,
    c_b: f64,
) -> Result<OscillatoryBound> {
    let norm = (y_dir.0 * y_dir.0 + y_dir.1 * y_dir.1).sqrt();
    let s = (y_dir.0 * xi.0 + y_dir.1 * xi.1) / norm;
    let phase = s.abs() * (spec.profile.phi(t) - spec.profile.phi(0.5 * t));
    let f = |r: f64| {
        Complex64::from_polar(1.0, -spec.profile.phi(r) * s) * r.powf(spec.rho - 1.0)
    };
    let value = crate::quad::oscillatory_complex(&f, 0.5 * t, t, phase, RADIAL_BUDGET)?
        * t.powf(-spec.rho);
    let trivial = (1.0 - 2f64.powf(-spec.rho)) / spec.rho;
    let decay = if s == 0.0 {
        f64::INFINITY
    } else {
        c_b * spec.profile.doubling_c0() * spec.profile.varphi_sup()
            / (spec.profile.phi(t) * s.abs())
    };
    let cap = trivial.min(decay);
    Ok(OscillatoryBound {
        value,
        trivial_bound: trivial,
        decay_bound: decay,
        bound_ok: value.norm() <= cap * (1.0 + 1e-9),
        monotone_ok: spec.profile.is_monotone_condition(),
    })
}

/// Which right-hand side the dyadic block bound is checked against.
#[derive(Debug, Clone, Copy)]
pub enum BlockBoundForm {
    /// 2 ||Omega||_1 ||b||_Delta1 |xi| phi(2^k)^{1-alpha} (needs cancellation)
    Cancellation,
    /// C W_Omega ||b||_Delta2 / (|xi|^{beta/2} phi(2^k)^{beta/2} phi(2^k)^alpha)
    WOmega { beta: f64, w_value: f64, c: f64 },
}

#[derive(Debug, Clone)]
pub struct BlockBound {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

/// ( int_{2^k}^{2^{k+1}} |sigma_hat_t(xi)|^2 dt/(t phi(t)^{2 alpha}) )^{1/2}
/// against the selected closed-form right-hand side.
pub fn dyadic_block_bound(
    k: i64,
    xi: (f64, f64),
    spec: &OperatorSpec,
    form: BlockBoundForm,
) -> Result<BlockBound> {
    let t_lo = 2f64.powi(k as i32);
    let nodes = 33usize;
    let h = std::f64::consts::LN_2 / (nodes - 1) as f64;
    let mut acc = 0.0;
    for i in 0..nodes {
        let t = t_lo * ((i as f64) * h).exp();
        let w = if i == 0 || i == nodes - 1 { 0.5 * h } else { h };
        let sym = sigma_hat_impl(spec, t, xi, false)?;
        acc += w * sym.norm_sqr() / spec.profile.phi(t).powf(2.0 * spec.alpha);
    }
    let lhs = acc.sqrt();
    let r = (xi.0 * xi.0 + xi.1 * xi.1).sqrt();
    let phik = spec.profile.phi(t_lo);
    let (rhs, ok) = match form {
        BlockBoundForm::Cancellation => {
            let d1 = spec.delta_norm(1.0)?;
            if d1.is_divergent() {
                return Err(MzError::InvalidDomain(
                    "Delta_1 norm of b is not finite; the cancellation block bound needs it"
                        .into(),
                ));
            }
            let rhs = 2.0
                * spec.omega.l1_cached()
                * d1.value()
                * r
                * phik.powf(1.0 - spec.alpha);
            (rhs, lhs <= rhs * (1.0 + 1e-6))
        }
        BlockBoundForm::WOmega { beta, w_value, c } => {
            let d2 = spec.delta_norm(2.0)?;
            if d2.is_divergent() {
                return Err(MzError::InvalidDomain(
                    "Delta_2 norm of b is not finite; the W block bound needs it".into(),
                ));
            }
            let rhs = w_value * d2.value()
                / (r.powf(0.5 * beta) * phik.powf(0.5 * beta) * phik.powf(spec.alpha));
            (rhs, lhs <= c * rhs)
        }
    };
    Ok(BlockBound { lhs, rhs, ok })
}
