//! Exponent arithmetic for the four boundedness theorems, interpolation
//! bookkeeping, decay-slope estimation, and the end-to-end experiment
//! drivers (boundedness ratios, mu_j decay tables, the L log L pipeline).

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{MzError, Result};
use crate::grid::{synthesize_bandlimited, GridField, RadialAnnulus};
use crate::kernels::{llogl_decompose, omega_norms, RoughKernel};
use crate::littlewood_paley::{tilde, tl_norm_l2_spectral, LPFrame, TLParams};
use crate::marcinkiewicz::{mu_j_norm_l2_table, sigma_hat, OperatorSpec, TGrid};
#[cfg(test)]
use crate::marcinkiewicz::mu_norm_l2;

/// Which theorem a parameter bundle belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremId {
    /// straight operator, b = 1 (phi = id implicit)
    T11,
    /// radial factor b in Delta_gamma
    T12,
    /// surface profile phi, b = 1
    T13,
    /// surface profile and radial factor
    T14,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Clause {
    I,
    II,
    III,
}

/// Parameters feeding the admissible-alpha arithmetic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TheoremParams {
    pub theorem: TheoremId,
    pub clause: Clause,
    pub p: f64,
    pub q: f64,
    pub gamma: Option<f64>,
    pub beta: Option<f64>,
    pub rho: f64,
    /// derivative constant of the profile (1 for phi = id)
    pub c1: f64,
    /// log2 of the doubling constant (1 for phi = id)
    pub log2_c0: f64,
}

/// Open interval of admissible alpha; clause III degenerates to {0}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AlphaRange {
    pub lo: f64,
    pub hi: f64,
}

impl AlphaRange {
    pub fn contains(&self, alpha: f64) -> bool {
        if self.lo == 0.0 && self.hi == 0.0 {
            return alpha == 0.0;
        }
        self.lo < alpha && alpha < self.hi
    }
}

fn gamma_factor(gamma: f64, u_tilde: f64) -> f64 {
    (1.0 / u_tilde - 1.0 / (2.0 * gamma)) / (1.0 - 1.0 / gamma)
}

/// The admissible alpha interval for each theorem clause.
pub fn alpha_range(params: &TheoremParams) -> Result<AlphaRange> {
    if !(params.p > 1.0 && params.q > 1.0) {
        return Err(MzError::InvalidDomain("p, q must lie in (1, inf)".into()));
    }
    if !(params.rho > 0.0) {
        return Err(MzError::InvalidDomain("rho must be positive".into()));
    }
    let pt = tilde(params.p);
    let qt = tilde(params.q);
    let needs_gamma = matches!(params.theorem, TheoremId::T12 | TheoremId::T14);
    let gamma = params.gamma.unwrap_or(f64::INFINITY);
    if needs_gamma {
        let g = params
            .gamma
            .ok_or_else(|| MzError::InvalidDomain("theorem needs gamma".into()))?;
        if g <= 0.5 * pt.max(qt) {
            return Err(MzError::InvalidDomain(format!(
                "gamma = {g} violates gamma > max(p~, q~)/2 = {}",
                0.5 * pt.max(qt)
            )));
        }
    }
    let surface = matches!(params.theorem, TheoremId::T13 | TheoremId::T14);
    let (c1, l2c0) = if surface {
        if !(params.c1 > 0.0 && params.log2_c0 > 0.0) {
            return Err(MzError::InvalidDomain(
                "surface theorems need c1 > 0 and log2 c0 > 0".into(),
            ));
        }
        (params.c1, params.log2_c0)
    } else {
        (1.0, 1.0)
    };
    let beta = params.beta;
    let need_beta = || -> Result<f64> {
        let b = beta.ok_or_else(|| MzError::InvalidDomain("clause ii needs beta".into()))?;
        if !(0.0 < b && b <= 1.0) {
            return Err(MzError::BadBeta(b));
        }
        Ok(b)
    };
    let range = match (params.theorem, params.clause) {
        (_, Clause::III) => AlphaRange { lo: 0.0, hi: 0.0 },
        (TheoremId::T11, Clause::I) => AlphaRange {
            lo: 0.0,
            hi: 4.0 / (pt * qt),
        },
        (TheoremId::T11, Clause::II) => {
            let b = need_beta()?;
            AlphaRange {
                lo: -(4.0 * b / (pt * qt)).min(params.rho),
                hi: 0.0,
            }
        }
        (TheoremId::T12, Clause::I) => AlphaRange {
            lo: 0.0,
            hi: 4.0 * gamma_factor(gamma, pt) * gamma_factor(gamma, qt),
        },
        (TheoremId::T12, Clause::II) => {
            let b = need_beta()?;
            AlphaRange {
                lo: -(2.0 * b * gamma_factor(gamma, pt) * gamma_factor(gamma, qt))
                    .min(params.rho),
                hi: 0.0,
            }
        }
        (TheoremId::T13, Clause::I) => AlphaRange {
            lo: 0.0,
            hi: 4.0 / (pt * qt * c1 * l2c0),
        },
        (TheoremId::T13, Clause::II) => {
            let b = need_beta()?;
            AlphaRange {
                lo: -(4.0 * b / (c1 * l2c0 * pt * qt)).min(params.rho / l2c0),
                hi: 0.0,
            }
        }
        (TheoremId::T14, Clause::I) => AlphaRange {
            lo: 0.0,
            hi: 4.0 / (c1 * l2c0) * gamma_factor(gamma, pt) * gamma_factor(gamma, qt),
        },
        (TheoremId::T14, Clause::II) => {
            let b = need_beta()?;
            AlphaRange {
                lo: -(2.0 * b / (c1 * l2c0)
                    * gamma_factor(gamma, pt)
                    * gamma_factor(gamma, qt))
                .min(params.rho / l2c0),
                hi: 0.0,
            }
        }
    };
    Ok(range)
}

/// Interpolation exponents theta_1, theta_2 and the decay rate delta.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterpolationExponents {
    pub theta1: f64,
    pub theta2: f64,
    pub delta: f64,
}

/// theta = (1/p - 1/r)/(1/2 - 1/r) for the (p, r1) and (q, r2) pairs and
/// delta = min(alpha/c1, theta1 theta2 / c1 - alpha log2 c0).
/// The r's must be admissible: p~ < r1~ < 2 gamma, q~ < r2~ < 2 gamma.
#[allow(clippy::too_many_arguments)]
pub fn interpolation_exponents(
    p: f64,
    q: f64,
    gamma: f64,
    alpha: f64,
    c1: f64,
    log2_c0: f64,
    r1: f64,
    r2: f64,
) -> Result<InterpolationExponents> {
    for (u, r) in [(p, r1), (q, r2)] {
        if !(u > 1.0 && r > 1.0) {
            return Err(MzError::InvalidDomain("exponents must lie in (1, inf)".into()));
        }
        let (ut, rt) = (tilde(u), tilde(r));
        if !(ut < rt && rt < 2.0 * gamma) {
            return Err(MzError::InvalidDomain(format!(
                "inadmissible interpolation choice: need u~ < r~ < 2 gamma, got {ut} vs {rt} vs {}",
                2.0 * gamma
            )));
        }
    }
    let theta = |u: f64, r: f64| (1.0 / u - 1.0 / r) / (0.5 - 1.0 / r);
    let theta1 = theta(p, r1);
    let theta2 = theta(q, r2);
    let delta = (alpha / c1).min(theta1 * theta2 / c1 - alpha * log2_c0);
    Ok(InterpolationExponents {
        theta1,
        theta2,
        delta,
    })
}

/// Rows (j, norm) plus the fitted per-side decay rates.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayTable {
    pub rows: Vec<(i64, f64)>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct DecayFit {
    /// slope of log2(norm) against -j on the j >= 0 side
    pub delta_plus: f64,
    /// slope of log2(norm) against -|j| on the j <= 0 side
    pub delta_minus: f64,
    /// min of the two sides
    pub delta_hat: f64,
}

/// Least-squares slope of log2(norm) against -|j| per side; rows with
/// vanishing norms are dropped, degenerate tables are rejected.
pub fn decay_fit(table: &DecayTable) -> Result<DecayFit> {
    let side = |keep: &dyn Fn(i64) -> bool| -> Result<f64> {
        let pts: Vec<(f64, f64)> = table
            .rows
            .iter()
            .filter(|(j, v)| keep(*j) && *v > 0.0)
            .map(|&(j, v)| (-(j.abs() as f64), v.log2()))
            .collect();
        if pts.len() < 5 {
            return Err(MzError::DegenerateTable(format!(
                "need at least 5 usable rows per side, got {}",
                pts.len()
            )));
        }
        let n = pts.len() as f64;
        let sx: f64 = pts.iter().map(|p| p.0).sum();
        let sy: f64 = pts.iter().map(|p| p.1).sum();
        let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
        let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
        let denom = n * sxx - sx * sx;
        if denom.abs() < 1e-14 {
            return Err(MzError::DegenerateTable("constant |j| column".into()));
        }
        Ok((n * sxy - sx * sy) / denom)
    };
    let plus = side(&|j| j >= 0)?;
    let minus = side(&|j| j <= 0)?;
    Ok(DecayFit {
        delta_plus: plus,
        delta_minus: minus,
        delta_hat: plus.min(minus),
    })
}

/// Least-squares slope of log|sigma_t(xi)| against log(phi(t)|xi|) over
/// `decades` decades starting at u ~ 2, on the envelope over two |xi|
/// rays so that zeros of the oscillatory integral do not pollute the fit.
pub fn sigma_decay_slope(spec: &OperatorSpec, decades: f64, samples: usize) -> Result<f64> {
    let mut pts = Vec::new();
    for i in 0..samples {
        let u = 10f64.powf(0.3 + decades * i as f64 / (samples - 1) as f64);
        let mut best = 0.0f64;
        for &r in &[8.0, 16.0] {
            // invert phi(t) |xi| = u for t by bisection in log t
            let mut lo = 1e-9f64;
            let mut hi = 1e9f64;
            for _ in 0..200 {
                let mid = (lo * hi).sqrt();
                if spec.profile.phi(mid) * r < u {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let t = (lo * hi).sqrt();
            let s = sigma_hat(t, (r, 0.0), spec)?.norm();
            best = best.max(s);
        }
        if best > 1e-300 {
            pts.push((u.ln(), best.ln()));
        }
    }
    if pts.len() < 8 {
        return Err(MzError::DegenerateTable("too few decay samples".into()));
    }
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    Ok((n * sxy - sx * sy) / (n * sxx - sx * sx))
}

/// One field of the experiment family, with its scale label.
#[derive(Debug, Clone)]
pub struct FamilyField {
    pub field: GridField,
    pub seed: u64,
    pub octave: i64,
}

/// Deterministic band-limited family: `per_scale` fields in each annulus
/// [base_lo 2^s, base_hi 2^s], s = 0..octaves.
pub fn field_family(
    grid: crate::grid::Grid,
    seed0: u64,
    per_scale: usize,
    octaves: usize,
    base_lo: f64,
    base_hi: f64,
) -> Result<Vec<FamilyField>> {
    let mut out = Vec::new();
    for s in 0..octaves {
        let factor = 2f64.powi(s as i32);
        let ann = RadialAnnulus::new(base_lo * factor, base_hi * factor)?;
        for i in 0..per_scale {
            let seed = seed0 + (s * per_scale + i) as u64;
            out.push(FamilyField {
                field: synthesize_bandlimited(seed, &ann, grid)?,
                seed,
                octave: s as i64,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RatioRow {
    pub seed: u64,
    pub octave: i64,
    pub mu_norm: f64,
    pub tl_norm: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BoundednessReport {
    pub rows: Vec<RatioRow>,
    pub min: f64,
    pub max: f64,
    pub spread: f64,
    /// mean ratio per octave, ascending
    pub octave_means: Vec<f64>,
    /// false when the per-octave means increase strictly across all scales
    pub monotone_growth: bool,
}

/// R(f) = ||mu f||_{L^2} / ||f||_{F} for every field of the family
/// (p = q = 2 spectral route). Fields sharing an octave share one symbol
/// build over their common band.
pub fn boundedness_experiment(
    spec: &OperatorSpec,
    tl: &TLParams,
    family: &[FamilyField],
    tg: &TGrid,
    frame: &LPFrame,
) -> Result<BoundednessReport> {
    let mut octaves: Vec<i64> = family.iter().map(|f| f.octave).collect();
    octaves.sort_unstable();
    octaves.dedup();
    let groups: Result<Vec<Vec<RatioRow>>> = octaves
        .par_iter()
        .map(|&s| {
            let members: Vec<&FamilyField> =
                family.iter().filter(|f| f.octave == s).collect();
            let fields: Vec<&crate::grid::GridField> =
                members.iter().map(|m| &m.field).collect();
            let mus = crate::marcinkiewicz::mu_norm_l2_family(&fields, spec, tg)?;
            members
                .iter()
                .zip(mus)
                .map(|(m, mu)| {
                    let tln = tl_norm_l2_spectral(&m.field, tl.alpha, frame)?;
                    if tln == 0.0 {
                        return Err(MzError::ZeroField);
                    }
                    Ok(RatioRow {
                        seed: m.seed,
                        octave: m.octave,
                        mu_norm: mu,
                        tl_norm: tln,
                        ratio: mu / tln,
                    })
                })
                .collect()
        })
        .collect();
    let rows: Vec<RatioRow> = groups?.into_iter().flatten().collect();
    let min = rows.iter().map(|r| r.ratio).fold(f64::INFINITY, f64::min);
    let max = rows.iter().map(|r| r.ratio).fold(0.0f64, f64::max);
    let max_octave = rows.iter().map(|r| r.octave).max().unwrap_or(0);
    let mut octave_means = Vec::new();
    for s in 0..=max_octave {
        let vals: Vec<f64> = rows
            .iter()
            .filter(|r| r.octave == s)
            .map(|r| r.ratio)
            .collect();
        if !vals.is_empty() {
            octave_means.push(vals.iter().sum::<f64>() / vals.len() as f64);
        }
    }
    let monotone_growth = octave_means.windows(2).all(|w| w[1] > w[0]) && octave_means.len() > 1;
    Ok(BoundednessReport {
        rows,
        min,
        max,
        spread: max / min,
        octave_means,
        monotone_growth,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayVerdict {
    pub fit: DecayFit,
    pub positive_decay: bool,
}

/// Per-j norms of the pieces mu_j, aggregated over the family as the max
/// of the TL-normalized norms, then slope-fitted.
pub fn decay_experiment(
    spec: &OperatorSpec,
    tl: &TLParams,
    family: &[FamilyField],
    tg: &TGrid,
    frame: &LPFrame,
    j_range: (i64, i64),
    delta_min: f64,
) -> Result<(DecayTable, DecayVerdict)> {
    if family.is_empty() {
        return Err(MzError::DegenerateTable("empty field family".into()));
    }
    let per_field: Result<Vec<Vec<(i64, f64)>>> = family
        .par_iter()
        .map(|ff| {
            let tln = tl_norm_l2_spectral(&ff.field, tl.alpha, frame)?;
            if tln == 0.0 {
                return Err(MzError::ZeroField);
            }
            let t = mu_j_norm_l2_table(&ff.field, spec, tg, frame, j_range)?;
            Ok(t.into_iter().map(|(j, v)| (j, v / tln)).collect())
        })
        .collect();
    let per_field = per_field?;
    let span = (j_range.1 - j_range.0 + 1) as usize;
    let mut rows = vec![0.0f64; span];
    for table in &per_field {
        for &(j, v) in table {
            let slot = (j - j_range.0) as usize;
            rows[slot] = rows[slot].max(v);
        }
    }
    let table = DecayTable {
        rows: (j_range.0..=j_range.1).zip(rows).collect(),
    };
    if table.rows.iter().all(|(_, v)| *v == 0.0) {
        return Err(MzError::DegenerateTable("all mu_j norms vanish".into()));
    }
    let fit = decay_fit(&table)?;
    Ok((
        table,
        DecayVerdict {
            fit,
            positive_decay: fit.delta_hat > delta_min,
        },
    ))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LLogLPieceReport {
    pub m: usize,
    pub l1: f64,
    pub delta_hat: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LLogLReport {
    pub lambda: Vec<usize>,
    /// sum over pieces of m ||Omega_m||_1 plus ||Omega_0||_2
    pub bound_report: f64,
    pub llogl_norm: f64,
    /// calibrated ratio bound_report / ||Omega||_LlogL
    pub calibrated_c: f64,
    pub reconstruction_residual: f64,
    pub pieces: Vec<LLogLPieceReport>,
}

/// Clause-(iii) pipeline: decompose Omega by levels, run the decay
/// experiment per piece at alpha = 0, and report the summability
/// functional against the Zygmund norm.
#[allow(clippy::too_many_arguments)]
pub fn llogl_pipeline(
    omega: &RoughKernel,
    make_spec: impl Fn(RoughKernel) -> Result<OperatorSpec> + Sync,
    tl: &TLParams,
    family: &[FamilyField],
    tg: &TGrid,
    frame: &LPFrame,
    j_range: (i64, i64),
    delta_min: f64,
) -> Result<LLogLReport> {
    let norms = omega_norms(omega);
    let decomp = llogl_decompose(omega)?;
    let mut recon = decomp.omega0.samples().to_vec();
    for (_, piece) in &decomp.pieces {
        for (r, p) in recon.iter_mut().zip(piece.samples()) {
            *r += p;
        }
    }
    let residual: f64 = recon
        .iter()
        .zip(omega.samples())
        .map(|(a, b)| (a - b).abs())
        .sum::<f64>()
        * 2.0
        * std::f64::consts::PI
        / omega.sample_count() as f64;
    let mut pieces = Vec::new();
    // omega_0 runs as the m = 0 piece
    let mut work: Vec<(usize, RoughKernel)> = vec![(0, decomp.omega0.clone())];
    work.extend(decomp.pieces.iter().cloned());
    for (m, piece) in work {
        let l1 = piece.sample_sum(f64::abs);
        if l1 < 1e-14 {
            pieces.push(LLogLPieceReport {
                m,
                l1,
                delta_hat: 0.0,
            });
            continue;
        }
        let spec = make_spec(piece)?;
        let (_, verdict) = decay_experiment(&spec, tl, family, tg, frame, j_range, delta_min)?;
        pieces.push(LLogLPieceReport {
            m,
            l1,
            delta_hat: verdict.fit.delta_hat,
        });
    }
    Ok(LLogLReport {
        lambda: decomp.lambda.clone(),
        bound_report: decomp.bound_report,
        llogl_norm: norms.llogl,
        calibrated_c: decomp.bound_report / norms.llogl.max(1e-300),
        reconstruction_residual: residual,
        pieces,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn t11(clause: Clause, p: f64, q: f64, beta: Option<f64>) -> TheoremParams {
        TheoremParams {
            theorem: TheoremId::T11,
            clause,
            p,
            q,
            gamma: None,
            beta,
            rho: 1.0,
            c1: 1.0,
            log2_c0: 1.0,
        }
    }

    #[test]
    fn alpha_range_hand_values() {
        // Thm 1.1(i), p = q = 2: (0, 1)
        let r = alpha_range(&t11(Clause::I, 2.0, 2.0, None)).unwrap();
        assert_eq!(r.lo, 0.0);
        assert!((r.hi - 1.0).abs() < 1e-15);

        // Thm 1.3(i), p = q = 2, phi = id: (0, 1)
        let mut p13 = t11(Clause::I, 2.0, 2.0, None);
        p13.theorem = TheoremId::T13;
        let r = alpha_range(&p13).unwrap();
        assert!((r.hi - 1.0).abs() < 1e-15);

        // Thm 1.4(i), p = q = 2, gamma = 2, phi = id: factors (1/4)/(1/2)
        // squared times 4 = 1
        let mut p14 = t11(Clause::I, 2.0, 2.0, None);
        p14.theorem = TheoremId::T14;
        p14.gamma = Some(2.0);
        let r = alpha_range(&p14).unwrap();
        assert!((r.hi - 1.0).abs() < 1e-14, "hi = {}", r.hi);

        // clause iii degenerates
        let r = alpha_range(&t11(Clause::III, 3.0, 2.0, None)).unwrap();
        assert!(r.contains(0.0) && !r.contains(0.1));

        // clause ii needs beta and caps at rho
        let r = alpha_range(&t11(Clause::II, 2.0, 2.0, Some(1.0))).unwrap();
        assert!((r.lo + 1.0).abs() < 1e-15);
        assert!(alpha_range(&t11(Clause::II, 2.0, 2.0, None)).is_err());
    }

    #[test]
    fn alpha_range_gamma_guard() {
        let mut p = t11(Clause::I, 8.0, 2.0, None);
        p.theorem = TheoremId::T14;
        p.gamma = Some(2.0); // max(p~, q~)/2 = 4
        assert!(alpha_range(&p).is_err());
    }

    #[test]
    fn alpha_range_antitone() {
        // widening p~, q~, c1 or log2 c0 shrinks the interval
        let base = alpha_range(&t11(Clause::I, 2.0, 2.0, None)).unwrap().hi;
        let wider_p = alpha_range(&t11(Clause::I, 4.0, 2.0, None)).unwrap().hi;
        assert!(wider_p < base);
        let mut surf = t11(Clause::I, 2.0, 2.0, None);
        surf.theorem = TheoremId::T13;
        surf.c1 = 2.0;
        let c1_up = alpha_range(&surf).unwrap().hi;
        assert!(c1_up < base);
        surf.c1 = 1.0;
        surf.log2_c0 = 3.0;
        let c0_up = alpha_range(&surf).unwrap().hi;
        assert!(c0_up < base);
    }

    #[test]
    fn t14_limits_to_t13_at_large_gamma() {
        let mut p14 = t11(Clause::I, 2.5, 3.0, None);
        p14.theorem = TheoremId::T14;
        p14.gamma = Some(1e3);
        p14.c1 = 0.5;
        p14.log2_c0 = 2.0;
        let mut p13 = p14.clone();
        p13.theorem = TheoremId::T13;
        p13.gamma = None;
        let hi14 = alpha_range(&p14).unwrap().hi;
        let hi13 = alpha_range(&p13).unwrap().hi;
        assert!(
            (hi14 - hi13).abs() < 1e-3,
            "gamma -> inf limit: {hi14} vs {hi13}"
        );
    }

    #[test]
    fn interpolation_hand_values() {
        // p = 4, r1 = 8: theta1 = 1/3
        let e = interpolation_exponents(4.0, 4.0, 8.0, 0.05, 1.0, 1.0, 8.0, 8.0).unwrap();
        assert!((e.theta1 - 1.0 / 3.0).abs() < 1e-14);
        // theta1 theta2 / c1 - alpha log2 c0 = 1/9 - 0.05 > 0.05 = alpha/c1
        assert!((e.delta - 0.05).abs() < 1e-14);
        // inadmissible r rejected
        assert!(interpolation_exponents(4.0, 4.0, 3.0, 0.05, 1.0, 1.0, 8.0, 8.0).is_err());
    }

    #[test]
    fn interpolation_tilde_identity() {
        // the three displayed forms of theta agree
        for (p, r) in [(4.0, 8.0), (1.5, 1.2), (3.0, 10.0)] {
            let direct = (1.0 / p - 1.0 / r) / (0.5 - 1.0 / r);
            let pp = p / (p - 1.0);
            let rp = r / (r - 1.0);
            let conj = (1.0 / pp - 1.0 / rp) / (0.5 - 1.0 / rp);
            let tld = (1.0 / tilde(p) - 1.0 / tilde(r)) / (0.5 - 1.0 / tilde(r));
            assert!((direct - conj).abs() < 1e-12);
            assert!((direct - tld).abs() < 1e-12);
        }
    }

    #[test]
    fn interpolation_delta_shrinks_toward_range_top() {
        // delta = min(alpha/c1, theta1 theta2/c1 - alpha log2 c0): on the
        // upper half of the admissible range the second branch is active,
        // so delta decreases monotonically to 0+ at the top
        let e0 = interpolation_exponents(4.0, 4.0, 1e4, 0.0, 1.0, 1.0, 1.9e4, 1.9e4).unwrap();
        let top = e0.theta1 * e0.theta2; // where the second branch hits 0
        let mut prev = f64::INFINITY;
        for i in 5..10 {
            let alpha = top * i as f64 / 10.0;
            let e =
                interpolation_exponents(4.0, 4.0, 1e4, alpha, 1.0, 1.0, 1.9e4, 1.9e4).unwrap();
            assert!(e.delta <= prev + 1e-12, "alpha = {alpha}");
            assert!(e.delta > 0.0, "alpha = {alpha} inside the range");
            prev = e.delta;
        }
        assert!(prev < 0.2 * top);
    }

    #[test]
    fn decay_fit_exact_and_noisy() {
        let rows: Vec<(i64, f64)> = (-8i64..=8).map(|j| (j, 2f64.powf(-0.3 * j.abs() as f64))).collect();
        let fit = decay_fit(&DecayTable { rows }).unwrap();
        assert!((fit.delta_hat - 0.3).abs() < 1e-10);

        // 5% multiplicative noise keeps the estimate near 0.3
        let mut state = crate::rng::SplitMix64::new(9);
        let rows: Vec<(i64, f64)> = (-8i64..=8)
            .map(|j| {
                let noise = 1.0 + 0.05 * state.next_symmetric();
                (j, 2f64.powf(-0.3 * j.abs() as f64) * noise)
            })
            .collect();
        let fit = decay_fit(&DecayTable { rows }).unwrap();
        assert!(fit.delta_hat > 0.25 && fit.delta_hat < 0.35, "{:?}", fit);

        // constant rows fit to slope zero
        let rows: Vec<(i64, f64)> = (-8..=8).map(|j| (j, 1.0)).collect();
        let fit = decay_fit(&DecayTable { rows }).unwrap();
        assert!(fit.delta_hat.abs() < 1e-12);

        // degenerate: all zeros
        let rows: Vec<(i64, f64)> = (-8..=8).map(|j| (j, 0.0)).collect();
        assert!(decay_fit(&DecayTable { rows }).is_err());
    }

    #[test]
    fn llogl_pipeline_bounded_kernel_single_piece() {
        use crate::grid::Grid;
        use crate::kernels::{identity_profile, RadialWeight};
        use crate::littlewood_paley::{build_partition, EtaProfile, FrameFlavor, LacunarySequence};
        use std::f64::consts::PI;

        let grid = Grid::new(64, PI).unwrap();
        let omega = RoughKernel::cosine(128).unwrap();
        let profile = identity_profile().unwrap();
        let seq = LacunarySequence::profile_induced(&profile, -10, 8).unwrap();
        let eta = EtaProfile::new(profile.lacunarity(), 1).unwrap();
        let frame = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        let tl = TLParams::new(0.0, 2.0, 2.0).unwrap();
        let ann = RadialAnnulus::new(4.0, 8.0).unwrap();
        let fields: Vec<FamilyField> = (0..2)
            .map(|i| FamilyField {
                field: synthesize_bandlimited(50 + i, &ann, grid).unwrap(),
                seed: 50 + i,
                octave: 0,
            })
            .collect();
        let tg = TGrid::new(2f64.powi(-8), 2f64.powi(6), 4).unwrap();
        let report = llogl_pipeline(
            &omega,
            |piece| {
                OperatorSpec::new(
                    piece,
                    RadialWeight::one(),
                    identity_profile().unwrap(),
                    1.0,
                    0.0,
                    2.0,
                )
            },
            &tl,
            &fields,
            &tg,
            &frame,
            (-4, 4),
            0.02,
        )
        .unwrap();
        // |cos| <= 1: the index set is {0} and the whole kernel is the
        // zeroth piece, so the pipeline reduces to one decay experiment
        assert_eq!(report.lambda, vec![0]);
        assert_eq!(report.pieces.len(), 1);
        assert!(report.reconstruction_residual < 1e-14);
        assert!(report.pieces[0].delta_hat > 0.02);
        assert!(report.calibrated_c.is_finite());
    }

    #[test]
    fn ratio_scaling_invariance() {
        // R(cf) = R(f) exactly: both norms are homogeneous
        use crate::grid::{l2_norm, Grid};
        use crate::kernels::{identity_profile, RadialWeight};
        use crate::littlewood_paley::{build_partition, EtaProfile, FrameFlavor, LacunarySequence};
        use num_complex::Complex64;
        use std::f64::consts::PI;

        let grid = Grid::new(64, PI).unwrap();
        let spec = OperatorSpec::new(
            RoughKernel::cosine(128).unwrap(),
            RadialWeight::one(),
            identity_profile().unwrap(),
            1.0,
            0.3,
            2.0,
        )
        .unwrap();
        let seq = LacunarySequence::dyadic(-2, 6).unwrap();
        let eta = EtaProfile::new(2.0, 1).unwrap();
        let frame = build_partition(seq, eta, FrameFlavor::Adapted).unwrap();
        let tg = TGrid::new(0.125, 8.0, 4).unwrap();
        let ann = RadialAnnulus::new(4.0, 8.0).unwrap();
        let f = synthesize_bandlimited(3, &ann, grid).unwrap();
        let cf = GridField::from_values(
            grid,
            crate::grid::DomainTag::Spatial,
            f.values().iter().map(|v| v * Complex64::new(0.0, 2.5)).collect(),
        )
        .unwrap();
        assert!(l2_norm(&cf) > 0.0);
        let r1 = mu_norm_l2(&f, &spec, &tg).unwrap() / tl_norm_l2_spectral(&f, 0.3, &frame).unwrap();
        let r2 =
            mu_norm_l2(&cf, &spec, &tg).unwrap() / tl_norm_l2_spectral(&cf, 0.3, &frame).unwrap();
        assert!((r1 - r2).abs() < 1e-12 * r1);
    }
}
