//! Lacunary sequences, adapted partitions of unity, adapted and classical
//! homogeneous Triebel-Lizorkin norms, modulated-bump test fields, and the
//! two-frame equivalence experiment.

use num_complex::Complex64;

use crate::error::{MzError, Result};
use crate::grid::{
    apply_multiplier, field_band, forward_transform, inverse_transform, l2_norm, lp_norm,
    mean_coefficient, DomainTag, Grid, GridField,
};
use crate::kernels::SurfaceProfile;

/// Lacunary sequence a_k, k in [k_min, k_max], with a_{k+1}/a_k >= a > 1.
#[derive(Debug, Clone)]
pub struct LacunarySequence {
    name: String,
    values: Vec<f64>,
    k_min: i64,
    lower_ratio: f64,
    /// uniform upper ratio bound C0, when one exists
    upper_ratio: Option<f64>,
}

impl LacunarySequence {
    pub fn from_values(
        name: &str,
        values: Vec<f64>,
        k_min: i64,
        lower_ratio: f64,
        upper_ratio: Option<f64>,
    ) -> Result<Self> {
        if !(lower_ratio > 1.0) {
            return Err(MzError::BadLacunarity(lower_ratio));
        }
        if values.len() < 2 {
            return Err(MzError::InvalidDomain("sequence needs >= 2 entries".into()));
        }
        for w in values.windows(2) {
            if !(w[0] > 0.0) || w[1] / w[0] < lower_ratio * (1.0 - 1e-12) {
                return Err(MzError::BadLacunarity(w[1] / w[0]));
            }
        }
        Ok(Self {
            name: name.into(),
            values,
            k_min,
            lower_ratio,
            upper_ratio,
        })
    }

    /// a_k = 2^k.
    pub fn dyadic(k_min: i64, k_max: i64) -> Result<Self> {
        Self::geometric(2.0, k_min, k_max)
    }

    /// a_k = base^k.
    pub fn geometric(base: f64, k_min: i64, k_max: i64) -> Result<Self> {
        if !(base > 1.0) {
            return Err(MzError::BadLacunarity(base));
        }
        let values = (k_min..=k_max).map(|k| base.powi(k as i32)).collect();
        Self::from_values(
            &format!("geometric({base})"),
            values,
            k_min,
            base,
            Some(base),
        )
    }

    /// a_k = 2^(k^2), k >= 0: lacunary with unbounded consecutive ratios.
    pub fn power2_square(k_max: i64) -> Result<Self> {
        if k_max < 1 {
            return Err(MzError::InvalidDomain("power2_square needs k_max >= 1".into()));
        }
        let values = (0..=k_max).map(|k| 2f64.powi((k * k) as i32)).collect();
        Self::from_values("power2_square", values, 0, 2.0, None)
    }

    /// a_j = 1 / phi(2^-j): the sequence the surface profile induces.
    pub fn profile_induced(profile: &SurfaceProfile, j_min: i64, j_max: i64) -> Result<Self> {
        let values = (j_min..=j_max)
            .map(|j| 1.0 / profile.phi(2f64.powi(-j as i32)))
            .collect();
        Self::from_values(
            &format!("profile({})", profile.name()),
            values,
            j_min,
            profile.lacunarity(),
            Some(profile.doubling_c0()),
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn k_min(&self) -> i64 {
        self.k_min
    }
    pub fn k_max(&self) -> i64 {
        self.k_min + self.values.len() as i64 - 1
    }
    pub fn lower_ratio(&self) -> f64 {
        self.lower_ratio
    }
    pub fn upper_ratio(&self) -> Option<f64> {
        self.upper_ratio
    }

    pub fn value(&self, k: i64) -> Result<f64> {
        if k < self.k_min || k > self.k_max() {
            return Err(MzError::InvalidDomain(format!(
                "sequence index {k} outside [{}, {}]",
                self.k_min,
                self.k_max()
            )));
        }
        Ok(self.values[(k - self.k_min) as usize])
    }

    /// Largest observed consecutive ratio on the represented range.
    pub fn max_ratio(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] / w[0])
            .fold(0.0, f64::max)
    }

    /// Index map m_k with a^{m_k} <= a_k < a^{m_k+1}.
    pub fn index_map(&self) -> Vec<i64> {
        let la = self.lower_ratio.ln();
        self.values
            .iter()
            .map(|&ak| {
                let m = (ak.ln() / la).floor();
                // guard against x.ln()/la landing epsilon under an integer
                let cand = m as i64;
                if self.lower_ratio.powi(cand as i32 + 1) <= ak * (1.0 + 1e-12) {
                    cand + 1
                } else {
                    cand
                }
            })
            .collect()
    }
}

/// Smooth cut function: 1 on [-1/a, 1/a], 0 outside (-1, 1), nonincreasing
/// in |u|, C-infinity. `order` picks the step profile exp(-1/w^order).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EtaProfile {
    a: f64,
    order: u32,
}

impl EtaProfile {
    pub fn new(a: f64, order: u32) -> Result<Self> {
        if !(a > 1.0) {
            return Err(MzError::BadLacunarity(a));
        }
        if order == 0 {
            return Err(MzError::InvalidDomain("eta order must be >= 1".into()));
        }
        Ok(Self { a, order })
    }

    pub fn a(&self) -> f64 {
        self.a
    }
    pub fn order(&self) -> u32 {
        self.order
    }

    /// Evaluate the cut function; exactly 1 and exactly 0 on the plateaus.
    pub fn eta(&self, u: f64) -> f64 {
        let u = u.abs();
        if u <= 1.0 / self.a {
            return 1.0;
        }
        if u >= 1.0 {
            return 0.0;
        }
        let w = (1.0 - u) / (1.0 - 1.0 / self.a);
        smooth_step(w, self.order)
    }
}

/// C-infinity monotone step: 0 at w<=0, 1 at w>=1.
pub fn smooth_step(w: f64, order: u32) -> f64 {
    if w <= 0.0 {
        return 0.0;
    }
    if w >= 1.0 {
        return 1.0;
    }
    let g = |u: f64| (-1.0 / u.powi(order as i32)).exp();
    let a = g(w);
    let b = g(1.0 - w);
    a / (a + b)
}

/// Build a cut function for a lacunarity parameter (the `build_eta` entry
/// point of the partition machinery).
pub fn build_eta(a: f64, order: u32) -> Result<EtaProfile> {
    EtaProfile::new(a, order)
}

/// Which partition construction a frame uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FrameFlavor {
    /// psi_j = eta(|xi|/a_{j+1}) - eta(|xi|/a_j)
    Adapted,
    /// step between 1 and a^(1/3); piece k peaks just above a_{k-1}
    LowerBump,
    /// step between a^(-1/3) and 1; piece k peaks at [a_k, a_{k+1}]
    UpperBump,
    /// base-a geometric pieces, step between a^(2/3) and a
    Classical,
}

/// A lacunary partition of unity as radial symbol profiles.
#[derive(Debug, Clone)]
pub struct LPFrame {
    seq: LacunarySequence,
    eta: EtaProfile,
    flavor: FrameFlavor,
}

impl LPFrame {
    pub fn sequence(&self) -> &LacunarySequence {
        &self.seq
    }
    pub fn eta_profile(&self) -> &EtaProfile {
        &self.eta
    }
    pub fn flavor(&self) -> FrameFlavor {
        self.flavor
    }

    /// Piece indices materialized by this frame.
    pub fn piece_range(&self) -> (i64, i64) {
        match self.flavor {
            FrameFlavor::Adapted | FrameFlavor::UpperBump => {
                (self.seq.k_min(), self.seq.k_max() - 1)
            }
            FrameFlavor::LowerBump => (self.seq.k_min() + 1, self.seq.k_max()),
            FrameFlavor::Classical => (self.seq.k_min() + 1, self.seq.k_max()),
        }
    }

    /// Norm weight a_k attached to piece k.
    pub fn weight(&self, k: i64) -> Result<f64> {
        self.seq.value(k)
    }

    /// The radial profile psi_k(r).
    pub fn piece(&self, k: i64, r: f64) -> Result<f64> {
        let a = self.seq.lower_ratio();
        let third = a.powf(1.0 / 3.0);
        Ok(match self.flavor {
            FrameFlavor::Adapted => {
                let lo = self.seq.value(k)?;
                let hi = self.seq.value(k + 1)?;
                self.eta.eta(r / hi) - self.eta.eta(r / lo)
            }
            FrameFlavor::LowerBump => {
                let lo = self.seq.value(k - 1)?;
                let hi = self.seq.value(k)?;
                // chi_{B(1)} <= psi <= chi_{B(a^{1/3})}
                lower_step(r / hi, third, self.eta.order())
                    - lower_step(r / lo, third, self.eta.order())
            }
            FrameFlavor::UpperBump => {
                let lo = self.seq.value(k)?;
                let hi = self.seq.value(k + 1)?;
                // chi_{B(a^{-1/3})} <= psi <= chi_{B(1)}
                upper_step(r / hi, third, self.eta.order())
                    - upper_step(r / lo, third, self.eta.order())
            }
            FrameFlavor::Classical => {
                let ak = self.seq.value(k)?;
                let akm1 = self.seq.value(k - 1)?;
                // chi_{B(a^{2/3})} <= psi <= chi_{B(a)}
                classical_step(r / ak, a, self.eta.order())
                    - classical_step(r / akm1, a, self.eta.order())
            }
        })
    }

    /// Open support annulus of piece k.
    pub fn piece_support(&self, k: i64) -> Result<(f64, f64)> {
        let a = self.seq.lower_ratio();
        let third = a.powf(1.0 / 3.0);
        Ok(match self.flavor {
            FrameFlavor::Adapted => (self.seq.value(k)? / a, self.seq.value(k + 1)?),
            FrameFlavor::LowerBump => (self.seq.value(k - 1)?, third * self.seq.value(k)?),
            FrameFlavor::UpperBump => (self.seq.value(k)? / third, self.seq.value(k + 1)?),
            FrameFlavor::Classical => (self.seq.value(k - 1)? * a / third, self.seq.value(k)? * a),
        })
    }

    /// Closed band on which the pieces sum to exactly 1.
    pub fn covered_band(&self) -> (f64, f64) {
        let a = self.seq.lower_ratio();
        let third = a.powf(1.0 / 3.0);
        let lo_val = self.seq.value(self.seq.k_min()).unwrap();
        let hi_val = self.seq.value(self.seq.k_max()).unwrap();
        match self.flavor {
            FrameFlavor::Adapted => (lo_val, hi_val / a),
            FrameFlavor::LowerBump => (third * lo_val, hi_val),
            FrameFlavor::UpperBump => (lo_val, hi_val / third),
            FrameFlavor::Classical => (lo_val * a / third / third, hi_val * a.powf(2.0 / 3.0)),
        }
    }

    pub fn covers(&self, lo: f64, hi: f64) -> bool {
        let (clo, chi) = self.covered_band();
        clo <= lo * (1.0 + 1e-12) && hi <= chi * (1.0 + 1e-12)
    }
}

// step helpers: transition profiles for the section-5 frame families,
// exact 0/1 on the plateaus so the delta identities hold on the lattice
fn lower_step(v: f64, third: f64, order: u32) -> f64 {
    let v = v.abs();
    if v <= 1.0 {
        return 1.0;
    }
    if v >= third {
        return 0.0;
    }
    smooth_step((third - v) / (third - 1.0), order)
}

fn upper_step(v: f64, third: f64, order: u32) -> f64 {
    let v = v.abs();
    let inv = 1.0 / third;
    if v <= inv {
        return 1.0;
    }
    if v >= 1.0 {
        return 0.0;
    }
    smooth_step((1.0 - v) / (1.0 - inv), order)
}

fn classical_step(v: f64, a: f64, order: u32) -> f64 {
    let v = v.abs();
    let lo = a.powf(2.0 / 3.0);
    if v <= lo {
        return 1.0;
    }
    if v >= a {
        return 0.0;
    }
    smooth_step((a - v) / (a - lo), order)
}

/// Assemble a frame; the covered band is validated lazily at use sites.
pub fn build_partition(
    seq: LacunarySequence,
    eta: EtaProfile,
    flavor: FrameFlavor,
) -> Result<LPFrame> {
    if flavor == FrameFlavor::Adapted && (eta.a() / seq.lower_ratio() - 1.0).abs() > 1e-9 {
        return Err(MzError::InvalidDomain(format!(
            "eta cut parameter {} does not match the sequence lacunarity {}",
            eta.a(),
            seq.lower_ratio()
        )));
    }
    Ok(LPFrame { seq, eta, flavor })
}

/// Triebel-Lizorkin parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TLParams {
    pub alpha: f64,
    pub p: f64,
    pub q: f64,
}

impl TLParams {
    pub fn new(alpha: f64, p: f64, q: f64) -> Result<Self> {
        if !(p > 1.0 && p.is_finite()) {
            return Err(MzError::BadExponent(p));
        }
        if !(q > 1.0 && q.is_finite()) {
            return Err(MzError::BadExponent(q));
        }
        Ok(Self { alpha, p, q })
    }

    pub fn p_tilde(&self) -> f64 {
        tilde(self.p)
    }
    pub fn q_tilde(&self) -> f64 {
        tilde(self.q)
    }
}

/// max(u, u') with u' the conjugate exponent.
pub fn tilde(u: f64) -> f64 {
    u.max(u / (u - 1.0))
}

/// Pieces of the frame whose support meets [lo, hi].
fn active_pieces(frame: &LPFrame, lo: f64, hi: f64) -> Vec<i64> {
    let (k0, k1) = frame.piece_range();
    (k0..=k1)
        .filter(|&k| {
            let (slo, shi) = frame.piece_support(k).unwrap();
            shi > lo * (1.0 - 1e-12) && slo < hi * (1.0 + 1e-12)
        })
        .collect()
}

/// Adapted Triebel-Lizorkin norm || ( sum_k a_k^{alpha q} |piece_k f|^q )^{1/q} ||_p
/// for a zero-mean band-limited field whose band the frame covers.
/// Pieces not meeting the band are skipped (their contribution is zero).
pub fn tl_norm(f: &GridField, params: &TLParams, frame: &LPFrame) -> Result<f64> {
    let mean = mean_coefficient(f)?;
    let scale = l2_norm(f);
    if scale == 0.0 {
        return Ok(0.0);
    }
    if mean > 1e-10 * scale {
        return Err(MzError::NotZeroMean(mean));
    }
    let (lo, hi) = field_band(f, 1e-12)?;
    if !frame.covers(lo, hi) {
        let (clo, chi) = frame.covered_band();
        return Err(MzError::BandNotCovered {
            lo,
            hi,
            cov_lo: clo,
            cov_hi: chi,
        });
    }
    let grid = f.grid();
    let mut acc = vec![0.0f64; grid.len()];
    for k in active_pieces(frame, lo, hi) {
        let weight = frame.weight(k)?.powf(params.alpha * params.q);
        let g = apply_multiplier(f, |kx, ky| {
            let r = (kx * kx + ky * ky).sqrt();
            Complex64::new(frame.piece(k, r).unwrap(), 0.0)
        })?;
        for (a, v) in acc.iter_mut().zip(g.values()) {
            *a += weight * v.norm().powf(params.q);
        }
    }
    let agg = GridField::from_values(
        grid,
        DomainTag::Spatial,
        acc.into_iter()
            .map(|v| Complex64::new(v.powf(1.0 / params.q), 0.0))
            .collect(),
    )?;
    lp_norm(&agg, params.p)
}

/// p = q = 2 norm through the frequency side (Plancherel), no transforms.
/// Used both as the fast path for L^2 experiments and as the independent
/// route the multiplier path is checked against.
pub fn tl_norm_l2_spectral(f: &GridField, alpha: f64, frame: &LPFrame) -> Result<f64> {
    let hat = match f.tag() {
        DomainTag::Frequency => f.clone(),
        DomainTag::Spatial => forward_transform(f)?,
    };
    let (lo, hi) = field_band(&hat, 1e-12)?;
    if !frame.covers(lo, hi) {
        let (clo, chi) = frame.covered_band();
        return Err(MzError::BandNotCovered {
            lo,
            hi,
            cov_lo: clo,
            cov_hi: chi,
        });
    }
    let grid = hat.grid();
    let pieces = active_pieces(frame, lo, hi);
    let weights: Vec<f64> = pieces
        .iter()
        .map(|&k| frame.weight(k).unwrap().powf(2.0 * alpha))
        .collect();
    let mut total = 0.0f64;
    for idx in 0..grid.len() {
        let c2 = hat.values()[idx].norm_sqr();
        if c2 == 0.0 {
            continue;
        }
        let (kx, ky) = grid.frequency(idx);
        let r = (kx * kx + ky * ky).sqrt();
        let mut s = 0.0;
        for (k, w) in pieces.iter().zip(&weights) {
            let psi = frame.piece(*k, r)?;
            s += w * psi * psi;
        }
        total += c2 * s;
    }
    Ok(2.0 * grid.half_width() * total.sqrt())
}

/// Classical homogeneous TL norm: geometric base-a pieces sized to the
/// field's band.
pub fn classical_tl_norm(f: &GridField, params: &TLParams, base: f64) -> Result<f64> {
    let frame = classical_frame_for(f, base)?;
    tl_norm(f, params, &frame)
}

/// Geometric classical frame whose covered band contains the field's band.
pub fn classical_frame_for(f: &GridField, base: f64) -> Result<LPFrame> {
    let (lo, hi) = field_band(f, 1e-12)?;
    let k_lo = (lo.ln() / base.ln()).floor() as i64 - 2;
    let k_hi = (hi.ln() / base.ln()).ceil() as i64 + 2;
    let seq = LacunarySequence::geometric(base, k_lo, k_hi)?;
    let eta = EtaProfile::new(base, 1)?;
    build_partition(seq, eta, FrameFlavor::Classical)
}

/// The modulated bump f_k: frequency support in the gap
/// [a^{1/3} a_k, a^{2/3} a_k] between consecutive scales, where the lower
/// frame reproduces it at piece k+1 and the upper frame at piece k.
#[derive(Debug, Clone, Copy)]
pub struct BumpSpec {
    /// fraction of the maximal legal support radius (safety against
    /// lattice rounding); the construction uses 0.9 by default
    pub radius_factor: f64,
}

impl Default for BumpSpec {
    fn default() -> Self {
        Self { radius_factor: 0.9 }
    }
}

pub fn modulated_bump(
    k: i64,
    seq: &LacunarySequence,
    spec: BumpSpec,
    grid: Grid,
) -> Result<GridField> {
    let a = seq.lower_ratio();
    let third = a.powf(1.0 / 3.0);
    let two_thirds = a.powf(2.0 / 3.0);
    let ak = seq.value(k)?;
    let center = 0.5 * (third + two_thirds) * ak;
    let radius = spec.radius_factor * 0.5 * (third - 1.0) * ak;
    if center + radius >= grid.nyquist() {
        return Err(MzError::BandExceedsNyquist {
            outer: center + radius,
            nyquist: grid.nyquist(),
        });
    }
    let mut hat = GridField::zeros(grid, DomainTag::Frequency);
    let mut populated = false;
    for idx in 0..grid.len() {
        let (kx, ky) = grid.frequency(idx);
        let d = ((kx - center).powi(2) + ky * ky).sqrt();
        if d < radius {
            let u = d / radius;
            let v = (1.0 - 1.0 / (1.0 - u * u)).exp();
            hat.values_mut()[idx] = Complex64::new(v, 0.0);
            populated = true;
        }
    }
    if !populated {
        return Err(MzError::InvalidDomain(format!(
            "bump at scale index {k} captures no lattice point (center {center:.3}, radius {radius:.3})"
        )));
    }
    inverse_transform(&hat)
}

/// Verdict of the two-frame equivalence experiment.
#[derive(Debug, Clone, PartialEq)]
pub enum EquivalenceVerdict {
    BoundedRatio,
    UnboundedGrowth,
}

#[derive(Debug, Clone)]
pub struct EquivalenceReport {
    pub ratios: Vec<f64>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    pub verdict: EquivalenceVerdict,
}

/// Per-field ratio tl_norm(f, frame_a) / tl_norm(f, frame_b) with a
/// bounded-ratio verdict when max/min stays under `threshold`.
pub fn equivalence_experiment(
    frame_a: &LPFrame,
    frame_b: &LPFrame,
    params: &TLParams,
    fields: &[GridField],
    threshold: f64,
) -> Result<EquivalenceReport> {
    let mut ratios = Vec::with_capacity(fields.len());
    for f in fields {
        let na = tl_norm(f, params, frame_a)?;
        let nb = tl_norm(f, params, frame_b)?;
        if nb == 0.0 {
            return Err(MzError::ZeroField);
        }
        ratios.push(na / nb);
    }
    let min = ratios.iter().copied().fold(f64::INFINITY, f64::min);
    let max = ratios.iter().copied().fold(0.0f64, f64::max);
    let spread = max / min;
    let verdict = if spread < threshold {
        EquivalenceVerdict::BoundedRatio
    } else {
        EquivalenceVerdict::UnboundedGrowth
    };
    Ok(EquivalenceReport {
        ratios,
        min,
        max,
        spread,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{synthesize_bandlimited, RadialAnnulus};
    use std::f64::consts::PI;

    fn grid() -> Grid {
        Grid::new(256, PI).unwrap()
    }

    fn dyadic_frame(order: u32) -> LPFrame {
        let seq = LacunarySequence::dyadic(-2, 8).unwrap();
        let eta = EtaProfile::new(2.0, order).unwrap();
        build_partition(seq, eta, FrameFlavor::Adapted).unwrap()
    }

    #[test]
    fn eta_sandwich() {
        let eta = EtaProfile::new(2.0, 1).unwrap();
        assert_eq!(eta.eta(0.0), 1.0);
        assert_eq!(eta.eta(0.5), 1.0);
        assert_eq!(eta.eta(1.0), 0.0);
        assert_eq!(eta.eta(-0.3), 1.0);
        let v = eta.eta(0.75);
        assert!(v > 0.0 && v < 1.0);
        // nonincreasing on [0, 1]
        let mut prev = 1.0;
        for i in 0..=100 {
            let u = i as f64 / 100.0;
            let v = eta.eta(u);
            assert!(v <= prev + 1e-15);
            prev = v;
        }
        assert!(EtaProfile::new(1.0, 1).is_err());
    }

    #[test]
    fn partition_telescopes_to_one() {
        let frame = dyadic_frame(1);
        let (lo, hi) = frame.covered_band();
        assert!((lo - 0.25).abs() < 1e-12);
        assert!((hi - 128.0).abs() < 1e-12);
        // sum of pieces is 1 across the covered band, exact disjointness
        let (k0, k1) = frame.piece_range();
        for i in 0..200 {
            let r = 0.26 * (128.0f64 / 0.26).powf(i as f64 / 199.0);
            let mut sum = 0.0;
            for k in k0..=k1 {
                sum += frame.piece(k, r).unwrap();
            }
            assert!((sum - 1.0).abs() < 1e-10, "r = {r}: sum = {sum}");
        }
        for k in k0..=(k1 - 2) {
            for i in 0..50 {
                let r = 0.26 * (120.0f64 / 0.26).powf(i as f64 / 49.0);
                let prod = frame.piece(k, r).unwrap() * frame.piece(k + 2, r).unwrap();
                assert_eq!(prod, 0.0, "pieces {k} and {} overlap at {r}", k + 2);
            }
        }
    }

    #[test]
    fn partition_flat_region() {
        // eta is pinned to 1 only on [-1/a, 1/a], so the region where
        // psi_j is identically 1 is [a a_j, a_{j+1}/a]: a single point for
        // a strictly dyadic sequence, a full interval once the consecutive
        // ratio exceeds a^2.
        let frame = dyadic_frame(1);
        assert_eq!(frame.piece(3, 8.0).unwrap(), 1.0); // r = a_3 exactly
        assert!(frame.piece(3, 9.0).unwrap() < 1.0);
        assert_eq!(frame.piece(2, 8.0).unwrap(), 0.0);

        let seq =
            LacunarySequence::from_values("wide", vec![1.0, 4.0, 64.0, 1024.0], 0, 2.0, None)
                .unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let wide = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        // piece 1 spans [a a_1, a_2/a] = [8, 32] identically
        for &r in &[8.0, 12.0, 20.0, 32.0] {
            assert_eq!(wide.piece(1, r).unwrap(), 1.0, "r={r}");
        }
        assert!(wide.piece(1, 40.0).unwrap() < 1.0);
    }

    #[test]
    fn frame_reproduces_bandlimited_fields() {
        let g = grid();
        let ann = RadialAnnulus::new(4.0, 32.0).unwrap();
        let f = synthesize_bandlimited(5, &ann, g).unwrap();
        let frame = dyadic_frame(1);
        let (k0, k1) = frame.piece_range();
        let mut acc = GridField::zeros(g, DomainTag::Spatial);
        for k in k0..=k1 {
            let piece = apply_multiplier(&f, |kx, ky| {
                let r = (kx * kx + ky * ky).sqrt();
                Complex64::new(frame.piece(k, r).unwrap(), 0.0)
            })
            .unwrap();
            acc = crate::grid::axpy(
                Complex64::new(1.0, 0.0),
                &acc,
                Complex64::new(1.0, 0.0),
                &piece,
            )
            .unwrap();
        }
        let diff: f64 = acc
            .values()
            .iter()
            .zip(f.values())
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        assert!(diff < 1e-10);
    }

    #[test]
    fn tl_norm_single_piece_field() {
        // field banded inside the flat zone of exactly one piece
        let g = grid();
        let seq =
            LacunarySequence::from_values("wide", vec![1.0, 4.0, 64.0, 1024.0], 0, 2.0, None)
                .unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let frame = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        // piece 1 is identically 1 on [8, 32]
        let ann = RadialAnnulus::new(10.0, 28.0).unwrap();
        let f = synthesize_bandlimited(2, &ann, g).unwrap();
        let params = TLParams::new(0.7, 2.5, 3.0).unwrap();
        let got = tl_norm(&f, &params, &frame).unwrap();
        let want = 4f64.powf(0.7) * lp_norm(&f, 2.5).unwrap();
        assert!(
            (got - want).abs() / want < 1e-10,
            "got {got}, want {want}"
        );
        // zero field
        let z = GridField::zeros(g, DomainTag::Spatial);
        assert_eq!(tl_norm(&z, &params, &frame).unwrap(), 0.0);
    }

    #[test]
    fn tl_norm_scalar_homogeneity() {
        let g = grid();
        let ann = RadialAnnulus::new(4.0, 32.0).unwrap();
        let f = synthesize_bandlimited(8, &ann, g).unwrap();
        let cf = GridField::from_values(
            g,
            DomainTag::Spatial,
            f.values().iter().map(|v| v * 3.5).collect(),
        )
        .unwrap();
        let params = TLParams::new(0.3, 2.0, 2.5).unwrap();
        let frame = dyadic_frame(1);
        let a = tl_norm(&f, &params, &frame).unwrap();
        let b = tl_norm(&cf, &params, &frame).unwrap();
        assert!((b - 3.5 * a).abs() / b < 1e-12);
    }

    #[test]
    fn tl_norm_l2_routes_agree() {
        // multiplier path vs direct Plancherel sum over the pieces
        let g = grid();
        let ann = RadialAnnulus::new(4.0, 32.0).unwrap();
        let frame = dyadic_frame(1);
        for seed in [1, 2, 3] {
            let f = synthesize_bandlimited(seed, &ann, g).unwrap();
            let params = TLParams::new(0.0, 2.0, 2.0).unwrap();
            let fft_path = tl_norm(&f, &params, &frame).unwrap();
            let spectral = tl_norm_l2_spectral(&f, 0.0, &frame).unwrap();
            assert!(
                (fft_path - spectral).abs() / spectral < 1e-6,
                "routes differ: {fft_path} vs {spectral}"
            );
            // frame-dependent bracket around the L2 norm:
            // sum_j psi_j^2 in [1/2, 1]
            let l2 = l2_norm(&f);
            let ratio = spectral / l2;
            assert!(
                ratio <= 1.0 + 1e-9 && ratio >= 1.0 / 2f64.sqrt() - 1e-9,
                "ratio {ratio}"
            );
        }
    }

    #[test]
    fn tl_norm_band_not_covered() {
        let g = grid();
        let seq = LacunarySequence::dyadic(2, 4).unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let frame = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        let ann = RadialAnnulus::new(30.0, 60.0).unwrap();
        let f = synthesize_bandlimited(1, &ann, g).unwrap();
        let params = TLParams::new(0.0, 2.0, 2.0).unwrap();
        assert!(matches!(
            tl_norm(&f, &params, &frame),
            Err(MzError::BandNotCovered { .. })
        ));
    }

    #[test]
    fn classical_scaling_under_dilation() {
        // torus dilation shifts every piece by one index: the norm scales
        // by exactly 2^alpha (the grid change-of-variables oracle)
        let g = grid();
        let ann = RadialAnnulus::new(6.0, 20.0).unwrap();
        let f = synthesize_bandlimited(4, &ann, g).unwrap();
        let d = crate::grid::dilate_by_two(&f).unwrap();
        for &alpha in &[-0.5, 0.0, 0.8] {
            let params = TLParams::new(alpha, 2.0, 2.0).unwrap();
            let nf = classical_tl_norm(&f, &params, 2.0).unwrap();
            let nd = classical_tl_norm(&d, &params, 2.0).unwrap();
            let got = nd / nf;
            let want = 2f64.powf(alpha);
            assert!(
                (got - want).abs() / want < 1e-9,
                "alpha={alpha}: got {got}, want {want}"
            );
        }
    }

    #[test]
    fn modulated_bump_delta_identities() {
        let g = Grid::new(512, PI).unwrap();
        let seq = LacunarySequence::dyadic(0, 8).unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let lower = build_partition(seq.clone(), eta, FrameFlavor::LowerBump).unwrap();
        let upper = build_partition(seq.clone(), eta, FrameFlavor::UpperBump).unwrap();
        let k = 5i64;
        let f = modulated_bump(k, &seq, BumpSpec::default(), g).unwrap();
        let hat = forward_transform(&f).unwrap();
        let a = 2f64;
        let (blo, bhi) = (a.powf(1.0 / 3.0) * 32.0, a.powf(2.0 / 3.0) * 32.0);
        let (flo, fhi) = field_band(&f, 1e-12).unwrap();
        assert!(flo >= blo - 1e-9 && fhi <= bhi + 1e-9, "band [{flo}, {fhi}]");
        // lower frame: piece k+1 is identically 1 on the band, others vanish
        for j in lower.piece_range().0..=lower.piece_range().1 {
            for idx in 0..g.len() {
                if hat.values()[idx].norm() > 1e-13 {
                    let (kx, ky) = g.frequency(idx);
                    let r = (kx * kx + ky * ky).sqrt();
                    let v = lower.piece(j, r).unwrap();
                    let want = if j == k + 1 { 1.0 } else { 0.0 };
                    assert_eq!(v, want, "lower piece {j} at r={r}");
                }
            }
        }
        for j in upper.piece_range().0..=upper.piece_range().1 {
            for idx in 0..g.len() {
                if hat.values()[idx].norm() > 1e-13 {
                    let (kx, ky) = g.frequency(idx);
                    let r = (kx * kx + ky * ky).sqrt();
                    let v = upper.piece(j, r).unwrap();
                    let want = if j == k { 1.0 } else { 0.0 };
                    assert_eq!(v, want, "upper piece {j} at r={r}");
                }
            }
        }
    }

    #[test]
    fn bump_norm_ratio_is_consecutive_ratio_power_alpha() {
        // dyadic: ratio 2^alpha; super-lacunary 2^{k^2}: ratio 2^{2k+1} at
        // alpha = 1 (the no-equivalence direction)
        let g = Grid::new(256, PI).unwrap();
        let seq = LacunarySequence::dyadic(0, 7).unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let lower = build_partition(seq.clone(), eta, FrameFlavor::LowerBump).unwrap();
        let upper = build_partition(seq.clone(), eta, FrameFlavor::UpperBump).unwrap();
        let params = TLParams::new(1.0, 2.0, 2.0).unwrap();
        let f = modulated_bump(4, &seq, BumpSpec::default(), g).unwrap();
        let ratio = tl_norm(&f, &params, &lower).unwrap() / tl_norm(&f, &params, &upper).unwrap();
        assert!((ratio - 2.0).abs() < 1e-9, "ratio {ratio}");
    }

    #[test]
    fn equivalence_identical_frames_unit_ratio() {
        let g = grid();
        let frame = dyadic_frame(1);
        let ann = RadialAnnulus::new(4.0, 32.0).unwrap();
        let fields: Vec<GridField> = (0..5)
            .map(|s| synthesize_bandlimited(s + 100, &ann, g).unwrap())
            .collect();
        let params = TLParams::new(0.3, 2.0, 2.0).unwrap();
        let rep = equivalence_experiment(&frame, &frame, &params, &fields, 10.0).unwrap();
        for r in &rep.ratios {
            assert_eq!(*r, 1.0);
        }
        assert_eq!(rep.verdict, EquivalenceVerdict::BoundedRatio);
    }

    #[test]
    fn index_map_properties() {
        // m_{k+1} >= m_k + 1 and m_{k+1} - m_k <= 1 + log_a C0
        let prof = crate::kernels::power_profile(2.0).unwrap();
        for seq in [
            LacunarySequence::dyadic(-4, 10).unwrap(),
            LacunarySequence::geometric(3.0, 0, 8).unwrap(),
            LacunarySequence::profile_induced(&prof, -3, 6).unwrap(),
        ] {
            let m = seq.index_map();
            let a = seq.lower_ratio();
            for w in m.windows(2) {
                assert!(w[1] >= w[0] + 1, "{:?}", m);
                if let Some(c0) = seq.upper_ratio() {
                    let bound = 1.0 + c0.ln() / a.ln();
                    assert!((w[1] - w[0]) as f64 <= bound + 1e-9);
                }
            }
        }
    }

    #[test]
    fn power2_square_ratios() {
        let seq = LacunarySequence::power2_square(4).unwrap();
        assert_eq!(seq.value(0).unwrap(), 1.0);
        assert_eq!(seq.value(1).unwrap(), 2.0);
        assert_eq!(seq.value(2).unwrap(), 16.0);
        assert_eq!(seq.value(3).unwrap(), 512.0);
        assert!(seq.upper_ratio().is_none());
        assert_eq!(seq.max_ratio(), 65536.0 / 512.0);
    }
}
