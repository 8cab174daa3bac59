//! Rough kernels on the circle, radial factors, surface profiles, and the
//! norm functionals attached to them: L^p/Zygmund norms, the direction
//! singular integrals Z and W, the Delta_gamma class, certified profile
//! constants, and the L log L level-set decomposition.

use num_complex::Complex64;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{MzError, Result};
use crate::quad::{
    gl8_real, graded_segment, graded_segment_complex, refine_to_convergence, Endpoint, QuadOutcome,
};
use crate::special::bessel_jn_all;

const TWO_PI: f64 = 2.0 * PI;
/// Directions sampled when taking a sup over the unit circle. Both Z and W
/// integrands see xi' only through |. . xi'|, so directions live in [0, pi).
pub const DIRECTION_SAMPLES: usize = 128;
/// Cauchy tolerance used by refinement-based convergence checks.
pub const REFINE_TOL: f64 = 0.005;
/// Phase above which band-limited kernels switch to the Bessel-series
/// angular path (exact for trig polynomials; the panel path stays the
/// default at low phase where it is cheap).
const JACOBI_ANGER_SWITCH: f64 = 12.0;

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A value that may fail to exist: refinement either Cauchy-converged or
/// kept drifting (non-integrable singularity).
pub use crate::quad::QuadOutcome as NormValue;

/// Kernel on S^1: dense equispaced samples, optionally a closed form for
/// refinement, the angles where it is singular or merely non-smooth, and
/// its Fourier coefficients when it is a trigonometric polynomial.
#[derive(Clone)]
pub struct RoughKernel {
    name: String,
    samples: Vec<f64>,
    eval: Option<RealFn>,
    /// (angle, exponent): |Omega| ~ |theta - angle|^(-exponent)
    singularities: Vec<(f64, f64)>,
    /// angles where the kernel jumps or loses smoothness (panel splits)
    breakpoints: Vec<f64>,
    /// zero crossings of a smooth kernel: |Omega| kinks there, so the
    /// total-variation path splits panels, the signed path does not
    kinks: Vec<f64>,
    /// coefficients m = 0..=M of a real trig polynomial, when exact
    fourier: Option<Vec<Complex64>>,
    rotation_invariant: bool,
    cached_l1: f64,
}

impl std::fmt::Debug for RoughKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RoughKernel")
            .field("name", &self.name)
            .field("q", &self.samples.len())
            .field("singularities", &self.singularities)
            .field("l1", &self.cached_l1)
            .finish()
    }
}

impl RoughKernel {
    #[allow(clippy::too_many_arguments)]
    fn build(
        name: String,
        q: usize,
        eval: Option<RealFn>,
        singularities: Vec<(f64, f64)>,
        breakpoints: Vec<f64>,
        kinks: Vec<f64>,
        fourier: Option<Vec<Complex64>>,
        rotation_invariant: bool,
    ) -> Result<Self> {
        if q < 64 {
            return Err(MzError::TooFewSamples(q));
        }
        let samples: Vec<f64> = match &eval {
            Some(f) => (0..q).map(|i| f(TWO_PI * i as f64 / q as f64)).collect(),
            None => return Err(MzError::TooFewSamples(q)),
        };
        for (i, v) in samples.iter().enumerate() {
            if !v.is_finite() {
                return Err(MzError::NonFiniteKernel(TWO_PI * i as f64 / q as f64));
            }
        }
        let mut k = Self {
            name,
            samples,
            eval,
            singularities,
            breakpoints,
            kinks,
            fourier,
            rotation_invariant,
            cached_l1: 0.0,
        };
        k.cached_l1 = k.integrate_abs_power(1.0).value();
        Ok(k)
    }

    pub fn constant(q: usize) -> Result<Self> {
        Self::build(
            "constant".into(),
            q,
            Some(Arc::new(|_| 1.0)),
            vec![],
            vec![],
            vec![],
            Some(vec![Complex64::new(1.0, 0.0)]),
            true,
        )
    }

    pub fn cosine(q: usize) -> Result<Self> {
        Self::build(
            "cosine".into(),
            q,
            Some(Arc::new(f64::cos)),
            vec![],
            vec![],
            vec![PI / 2.0, 3.0 * PI / 2.0],
            Some(vec![Complex64::new(0.0, 0.0), Complex64::new(0.5, 0.0)]),
            false,
        )
    }

    /// sgn(cos t) |cos t|^(-1/r): mean zero, in L^1 but not L^r.
    pub fn sgn_power(r: f64, q: usize) -> Result<Self> {
        if !(r > 1.0) {
            return Err(MzError::InvalidDomain(format!(
                "sgn_power needs r > 1 for integrability, got {r}"
            )));
        }
        let p = 1.0 / r;
        let eval = move |t: f64| {
            let c = t.cos();
            if c == 0.0 {
                0.0
            } else {
                c.signum() * c.abs().powf(-p)
            }
        };
        Self::build(
            format!("sgn_power({r})"),
            q,
            Some(Arc::new(eval)),
            vec![(PI / 2.0, p), (3.0 * PI / 2.0, p)],
            vec![PI / 2.0, 3.0 * PI / 2.0],
            vec![],
            None,
            false,
        )
    }

    /// +1 on the upper half circle, -1 on the lower: bounded, mean zero,
    /// genuinely rough (jump discontinuities).
    pub fn bounded_step(q: usize) -> Result<Self> {
        let eval = |t: f64| {
            let t = t.rem_euclid(TWO_PI);
            if t < PI {
                1.0
            } else {
                -1.0
            }
        };
        Self::build(
            "bounded_step".into(),
            q,
            Some(Arc::new(eval)),
            vec![],
            vec![0.0, PI],
            vec![],
            None,
            false,
        )
    }

    /// Tabulated kernel: linear interpolation between equispaced samples.
    pub fn from_samples(values: Vec<f64>) -> Result<Self> {
        let q = values.len();
        if q < 64 {
            return Err(MzError::TooFewSamples(q));
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(MzError::NonFiniteKernel(TWO_PI * i as f64 / q as f64));
            }
        }
        let table = values.clone();
        let eval = move |t: f64| {
            let pos = t.rem_euclid(TWO_PI) / TWO_PI * q as f64;
            let i = pos.floor() as usize % q;
            let frac = pos - pos.floor();
            table[i] * (1.0 - frac) + table[(i + 1) % q] * frac
        };
        let mut k = Self {
            name: "samples".into(),
            samples: values,
            eval: Some(Arc::new(eval)),
            singularities: vec![],
            breakpoints: vec![],
            kinks: vec![],
            fourier: None,
            rotation_invariant: false,
            cached_l1: 0.0,
        };
        k.cached_l1 = k.integrate_abs_power(1.0).value();
        Ok(k)
    }

    /// Kernel built from an arbitrary closed form.
    pub fn from_closure(
        name: &str,
        q: usize,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        singularities: Vec<(f64, f64)>,
    ) -> Result<Self> {
        let breakpoints = singularities.iter().map(|s| s.0).collect();
        Self::build(
            name.into(),
            q,
            Some(Arc::new(eval)),
            singularities,
            breakpoints,
            vec![],
            None,
            false,
        )
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn sample_count(&self) -> usize {
        self.samples.len()
    }
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }
    pub fn singularities(&self) -> &[(f64, f64)] {
        &self.singularities
    }
    pub fn l1_cached(&self) -> f64 {
        self.cached_l1
    }
    pub fn is_rotation_invariant(&self) -> bool {
        self.rotation_invariant
    }
    pub fn fourier_coefficients(&self) -> Option<&[Complex64]> {
        self.fourier.as_deref()
    }

    /// Evaluate at any angle (closed form if present, else interpolation).
    pub fn at(&self, theta: f64) -> f64 {
        match &self.eval {
            Some(f) => f(theta),
            None => {
                let q = self.samples.len();
                let pos = theta.rem_euclid(TWO_PI) / TWO_PI * q as f64;
                let i = pos.floor() as usize % q;
                let frac = pos - pos.floor();
                self.samples[i] * (1.0 - frac) + self.samples[(i + 1) % q] * frac
            }
        }
    }

    /// Trapezoid sum over the stored samples: (2 pi / Q) sum g(Omega_i).
    pub fn sample_sum(&self, g: impl Fn(f64) -> f64) -> f64 {
        let q = self.samples.len() as f64;
        self.samples.iter().map(|&v| g(v)).sum::<f64>() * TWO_PI / q
    }

    /// Graded integral of g(Omega(theta)): `power` is the exponent of
    /// |Omega| inside g, scaling the endpoint singularity exponents.
    fn integrate_with(&self, power: f64, g: impl Fn(f64) -> f64 + Sync) -> NormValue {
        let f = |theta: f64| g(self.at(theta));
        let marks: Vec<(f64, f64)> = self
            .panel_marks(&[])
            .into_iter()
            .map(|(a, p)| (a, p * power))
            .collect();
        let abs_floor = 1e-10 * (1.0 + self.sample_sum(f64::abs));
        refine_to_convergence(
            |panels, levels| integrate_marked(&f, &marks, panels, levels),
            REFINE_TOL,
            abs_floor,
            5,
        )
    }

    fn integrate_abs_power(&self, power: f64) -> NormValue {
        self.integrate_with(power, move |v| v.abs().powf(power))
    }

    /// Sorted panel marks on [0, 2pi): kernel singularities/breakpoints
    /// merged with caller-supplied extra singular points; `with_kinks`
    /// additionally splits at the |Omega| kink angles.
    fn panel_marks_full(&self, extra: &[(f64, f64)], with_kinks: bool) -> Vec<(f64, f64)> {
        let mut marks: Vec<(f64, f64)> = Vec::new();
        for &(a, p) in &self.singularities {
            push_mark(&mut marks, a.rem_euclid(TWO_PI), p);
        }
        for &a in &self.breakpoints {
            push_mark(&mut marks, a.rem_euclid(TWO_PI), 0.0);
        }
        if with_kinks {
            for &a in &self.kinks {
                push_mark(&mut marks, a.rem_euclid(TWO_PI), 0.0);
            }
        }
        for &(a, p) in extra {
            push_mark(&mut marks, a.rem_euclid(TWO_PI), p);
        }
        marks.sort_by(|x, y| x.0.total_cmp(&y.0));
        marks
    }

    fn panel_marks(&self, extra: &[(f64, f64)]) -> Vec<(f64, f64)> {
        self.panel_marks_full(extra, true)
    }
}

fn push_mark(marks: &mut Vec<(f64, f64)>, angle: f64, exponent: f64) {
    for m in marks.iter_mut() {
        if (m.0 - angle).abs() < 1e-9 || (m.0 - angle).abs() > TWO_PI - 1e-9 {
            // coinciding singular points: exponents add
            m.1 += exponent;
            return;
        }
    }
    marks.push((angle, exponent));
}

/// Integrate f over the circle, splitting at the marked angles and grading
/// into each one; the marks carry the combined exponent of the integrand.
fn integrate_marked(
    f: &(impl Fn(f64) -> f64 + ?Sized),
    marks: &[(f64, f64)],
    panels: usize,
    levels: usize,
) -> f64 {
    if marks.is_empty() {
        let h = TWO_PI / panels as f64;
        return (0..panels)
            .map(|i| gl8_real(&|t| f(t), i as f64 * h, (i as f64 + 1.0) * h))
            .sum();
    }
    let mut total = 0.0;
    let count = marks.len();
    for i in 0..count {
        let (a0, p0) = marks[i];
        let (a1, p1) = if i + 1 < count {
            marks[i + 1]
        } else {
            (marks[0].0 + TWO_PI, marks[0].1)
        };
        if a1 - a0 < 1e-12 {
            continue;
        }
        let at_a = if p0 > 0.0 {
            Endpoint::Singular { exponent: p0 }
        } else {
            Endpoint::Regular
        };
        let at_b = if p1 > 0.0 {
            Endpoint::Singular { exponent: p1 }
        } else {
            Endpoint::Regular
        };
        total += graded_segment(&|t| f(t), a0, a1, at_a, at_b, panels, levels);
    }
    total
}

/// Norm functionals of a rough kernel.
#[derive(Debug, Clone)]
pub struct OmegaNorms {
    pub l1: f64,
    pub l2: NormValue,
    pub llogl: f64,
    pub cancellation_defect: f64,
}

/// L^1, L^2, Zygmund L log L and the cancellation defect |int Omega|.
pub fn omega_norms(omega: &RoughKernel) -> OmegaNorms {
    let l1 = omega.integrate_abs_power(1.0).value();
    let l2 = match omega.integrate_abs_power(2.0) {
        QuadOutcome::Converged(v) => QuadOutcome::Converged(v.sqrt()),
        d => d,
    };
    let llogl = omega
        .integrate_with(1.0, |v| v.abs() * (2.0 + v.abs()).ln())
        .value();
    let cancellation = omega.integrate_with(1.0, |v| v).value().abs();
    OmegaNorms {
        l1,
        l2,
        llogl,
        cancellation_defect: cancellation,
    }
}

/// L^r norm with divergence detection under refinement.
pub fn lr_norm(omega: &RoughKernel, r: f64) -> Result<NormValue> {
    if !(r >= 1.0) {
        return Err(MzError::BadExponent(r));
    }
    Ok(match omega.integrate_abs_power(r) {
        QuadOutcome::Converged(v) => QuadOutcome::Converged(v.powf(1.0 / r)),
        d => d,
    })
}

/// Z_Omega(beta): sup over directions of int |Omega(y')| / |y'.xi'|^beta.
pub fn z_omega(omega: &RoughKernel, beta: f64) -> Result<NormValue> {
    if !(0.0 < beta && beta <= 1.0) {
        return Err(MzError::BadBeta(beta));
    }
    let directions = if omega.is_rotation_invariant() {
        1
    } else {
        DIRECTION_SAMPLES
    };
    let outcomes: Vec<NormValue> = (0..directions)
        .into_par_iter()
        .map(|d| {
            let psi = PI * d as f64 / directions as f64;
            z_one_direction(omega, beta, psi)
        })
        .collect();
    Ok(sup_outcomes(&outcomes))
}

fn z_one_direction(omega: &RoughKernel, beta: f64, psi: f64) -> NormValue {
    let extra = [(psi + PI / 2.0, beta), (psi - PI / 2.0, beta)];
    let marks = omega.panel_marks(&extra);
    let f = move |theta: f64| {
        let d = (theta - psi).cos().abs();
        if d == 0.0 {
            0.0
        } else {
            omega.at(theta).abs() * d.powf(-beta)
        }
    };
    refine_to_convergence(
        |panels, levels| integrate_marked(&f, &marks, panels, levels),
        REFINE_TOL,
        1e-10,
        5,
    )
}

/// W_Omega(beta): sup over directions of the square root of the double
/// integral of |Omega(y')Omega(z')| / |(y'-z').xi'|^beta.
pub fn w_omega(omega: &RoughKernel, beta: f64) -> Result<NormValue> {
    if !(0.0 < beta && beta <= 1.0) {
        return Err(MzError::BadBeta(beta));
    }
    let directions = if omega.is_rotation_invariant() {
        1
    } else {
        // the double integral is ~4x the cost of Z per direction
        DIRECTION_SAMPLES / 2
    };
    let outcomes: Vec<NormValue> = (0..directions)
        .into_par_iter()
        .map(|d| {
            let psi = PI * d as f64 / directions as f64;
            w_one_direction(omega, beta, psi)
        })
        .collect();
    Ok(match sup_outcomes(&outcomes) {
        QuadOutcome::Converged(v) => QuadOutcome::Converged(v.max(0.0).sqrt()),
        QuadOutcome::Divergent { last } => QuadOutcome::Divergent {
            last: last.max(0.0).sqrt(),
        },
    })
}

fn w_one_direction(omega: &RoughKernel, beta: f64, psi: f64) -> NormValue {
    // outer integrand is singular where sin(theta_y - psi) = 0
    let outer_extra = [(psi, beta), (psi + PI, beta)];
    let outer_marks = omega.panel_marks(&outer_extra);
    let eval = |outer_panels: usize, outer_levels: usize| {
        let inner_panels = outer_panels;
        let inner_levels = outer_levels;
        let f_outer = |ty: f64| {
            let inner_extra = [(ty, beta), (2.0 * psi - ty, beta)];
            let inner_marks = omega.panel_marks(&inner_extra);
            let f_inner = |tz: f64| {
                let d = ((ty - psi).cos() - (tz - psi).cos()).abs();
                if d == 0.0 {
                    0.0
                } else {
                    (omega.at(ty) * omega.at(tz)).abs() * d.powf(-beta)
                }
            };
            integrate_marked(&f_inner, &inner_marks, inner_panels, inner_levels)
        };
        integrate_marked(&f_outer, &outer_marks, outer_panels, outer_levels)
    };
    // coarser base than the 1-D functionals: the oracle tolerance is 1%
    let mut panels = 6usize;
    let mut levels = 18usize;
    let mut prev = eval(panels, levels);
    for _ in 0..2 {
        panels *= 2;
        levels += 4;
        let next = eval(panels, levels);
        if ((next - prev) / next.abs().max(1e-300)).abs() < 2.0 * REFINE_TOL {
            return QuadOutcome::Converged(next);
        }
        prev = next;
    }
    QuadOutcome::Divergent { last: prev }
}

fn sup_outcomes(outcomes: &[NormValue]) -> NormValue {
    let mut best = f64::NEG_INFINITY;
    let mut divergent = false;
    for o in outcomes {
        match o {
            QuadOutcome::Converged(v) => best = best.max(*v),
            QuadOutcome::Divergent { last } => {
                divergent = true;
                best = best.max(*last);
            }
        }
    }
    if divergent {
        QuadOutcome::Divergent { last: best }
    } else {
        QuadOutcome::Converged(best)
    }
}

/// Oscillatory circle integral int Omega(theta) e^{-i z cos(theta - psi)} dtheta.
///
/// Band-limited kernels at large phase go through the Jacobi-Anger series
/// (exact for trig polynomials); everything else uses graded, oscillation-
/// resolving panels. `budget` caps the panel count of the slow path.
pub fn circle_oscillatory(
    omega: &RoughKernel,
    z: f64,
    psi: f64,
    budget: usize,
) -> Result<Complex64> {
    if let Some(coeffs) = &omega.fourier {
        if z > JACOBI_ANGER_SWITCH {
            return Ok(jacobi_anger(coeffs, z, psi));
        }
    }
    circle_oscillatory_panels(omega, z, psi, budget)
}

/// Slow-path tensor quadrature of the circle integral (reference path).
pub fn circle_oscillatory_panels(
    omega: &RoughKernel,
    z: f64,
    psi: f64,
    budget: usize,
) -> Result<Complex64> {
    let max_width = 4.0 / z.abs().max(1.0);
    let needed = (TWO_PI / max_width).ceil() as usize + 8;
    if needed > budget {
        return Err(MzError::QuadratureBudget {
            needed,
            cap: budget,
        });
    }
    let marks = omega.panel_marks_full(&[], false);
    let f = |theta: f64| {
        Complex64::from_polar(1.0, -z * (theta - psi).cos()) * omega.at(theta)
    };
    if marks.is_empty() {
        let panels = ((TWO_PI / max_width).ceil() as usize).max(8);
        let h = TWO_PI / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..panels {
            acc += crate::quad::gl8_complex(&f, i as f64 * h, (i as f64 + 1.0) * h);
        }
        return Ok(acc);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let count = marks.len();
    for i in 0..count {
        let (a0, p0) = marks[i];
        let (a1, p1) = if i + 1 < count {
            marks[i + 1]
        } else {
            (marks[0].0 + TWO_PI, marks[0].1)
        };
        if a1 - a0 < 1e-12 {
            continue;
        }
        let at_a = if p0 > 0.0 {
            Endpoint::Singular { exponent: p0 }
        } else {
            Endpoint::Regular
        };
        let at_b = if p1 > 0.0 {
            Endpoint::Singular { exponent: p1 }
        } else {
            Endpoint::Regular
        };
        acc += graded_segment_complex(&f, a0, a1, at_a, at_b, 6, 44, max_width);
    }
    Ok(acc)
}

/// Same integral against |Omega|: the total-variation measure's angular
/// factor. |Omega| is not a trig polynomial even when Omega is, so this
/// always takes the panel path; kernel zero crossings should be listed as
/// breakpoints for full panel accuracy.
pub fn circle_oscillatory_abs(
    omega: &RoughKernel,
    z: f64,
    psi: f64,
    budget: usize,
) -> Result<Complex64> {
    let max_width = 4.0 / z.abs().max(1.0);
    let needed = (TWO_PI / max_width).ceil() as usize + 8;
    if needed > budget {
        return Err(MzError::QuadratureBudget {
            needed,
            cap: budget,
        });
    }
    let marks = omega.panel_marks(&[]);
    let f = |theta: f64| {
        Complex64::from_polar(1.0, -z * (theta - psi).cos()) * omega.at(theta).abs()
    };
    if marks.is_empty() {
        let panels = ((TWO_PI / max_width).ceil() as usize).max(16);
        let h = TWO_PI / panels as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..panels {
            acc += crate::quad::gl8_complex(&f, i as f64 * h, (i as f64 + 1.0) * h);
        }
        return Ok(acc);
    }
    let mut acc = Complex64::new(0.0, 0.0);
    let count = marks.len();
    for i in 0..count {
        let (a0, p0) = marks[i];
        let (a1, p1) = if i + 1 < count {
            marks[i + 1]
        } else {
            (marks[0].0 + TWO_PI, marks[0].1)
        };
        if a1 - a0 < 1e-12 {
            continue;
        }
        let at_a = if p0 > 0.0 {
            Endpoint::Singular { exponent: p0 }
        } else {
            Endpoint::Regular
        };
        let at_b = if p1 > 0.0 {
            Endpoint::Singular { exponent: p1 }
        } else {
            Endpoint::Regular
        };
        acc += graded_segment_complex(&f, a0, a1, at_a, at_b, 6, 44, max_width);
    }
    Ok(acc)
}

/// Jacobi-Anger evaluation for a real trig polynomial with coefficients
/// c_m, m = 0..=M: 2 pi [ J_0 c_0 + sum_m (-i)^m J_m(z) 2 Re(c_m e^{i m psi}) ].
fn jacobi_anger(coeffs: &[Complex64], z: f64, psi: f64) -> Complex64 {
    let m_max = coeffs.len() - 1;
    if m_max == 0 {
        return coeffs[0] * (TWO_PI * crate::special::bessel_j0(z));
    }
    if m_max == 1 {
        let j0 = crate::special::bessel_j0(z);
        let j1 = crate::special::bessel_j1(z);
        let rot = Complex64::from_polar(1.0, psi);
        let sym = coeffs[1] * rot;
        let acc = Complex64::new(j0 * coeffs[0].re, j0 * coeffs[0].im)
            + Complex64::new(0.0, -1.0) * (2.0 * sym.re) * j1;
        return acc * TWO_PI;
    }
    let j = bessel_jn_all(m_max, z);
    let mut acc = Complex64::new(j[0] * coeffs[0].re, j[0] * coeffs[0].im);
    let minus_i = Complex64::new(0.0, -1.0);
    let mut phase = Complex64::new(1.0, 0.0);
    for m in 1..=m_max {
        phase *= minus_i;
        let rot = Complex64::from_polar(1.0, m as f64 * psi);
        let sym = coeffs[m] * rot;
        acc += phase * (2.0 * sym.re) * j[m];
    }
    acc * TWO_PI
}

// ---------------------------------------------------------------------------
// radial weights
// ---------------------------------------------------------------------------

/// Radial factor b on (0, infinity).
#[derive(Clone)]
pub struct RadialWeight {
    name: String,
    eval: RealFn,
    /// points where b jumps (panel splits for quadrature)
    breakpoints: Vec<f64>,
    /// b ~ t^e as t -> 0+
    zero_exponent: f64,
}

impl std::fmt::Debug for RadialWeight {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("RadialWeight")
            .field("name", &self.name)
            .field("zero_exponent", &self.zero_exponent)
            .finish()
    }
}

impl RadialWeight {
    pub fn constant(c: f64) -> Self {
        Self {
            name: format!("constant({c})"),
            eval: Arc::new(move |_| c),
            breakpoints: vec![],
            zero_exponent: 0.0,
        }
    }

    pub fn one() -> Self {
        Self::constant(1.0)
    }

    /// Indicator of (0, cutoff].
    pub fn step(cutoff: f64) -> Self {
        Self {
            name: format!("step({cutoff})"),
            eval: Arc::new(move |t| if t <= cutoff { 1.0 } else { 0.0 }),
            breakpoints: vec![cutoff],
            zero_exponent: 0.0,
        }
    }

    /// t^exponent (exponent may be negative; integrability is probed by
    /// delta_gamma_norm, not assumed).
    pub fn power(exponent: f64) -> Self {
        Self {
            name: format!("power({exponent})"),
            eval: Arc::new(move |t| t.powf(exponent)),
            breakpoints: vec![],
            zero_exponent: exponent,
        }
    }

    pub fn from_closure(
        name: &str,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        breakpoints: Vec<f64>,
        zero_exponent: f64,
    ) -> Self {
        Self {
            name: name.into(),
            eval: Arc::new(eval),
            breakpoints,
            zero_exponent,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn at(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }
    pub fn zero_exponent(&self) -> f64 {
        self.zero_exponent
    }
}

/// Log-spaced probe radii for Delta_gamma certification.
pub fn default_delta_probes() -> Vec<f64> {
    log_spaced(2f64.powi(-12), 2f64.powi(12), 4)
}

pub fn log_spaced(lo: f64, hi: f64, per_octave: usize) -> Vec<f64> {
    let octaves = (hi / lo).log2();
    let count = (octaves * per_octave as f64).round() as usize;
    (0..=count)
        .map(|i| lo * 2f64.powf(i as f64 / per_octave as f64))
        .collect()
}

/// Delta_gamma norm certified on the probe range: max over probed R of
/// (R^{-1} int_0^R |b|^gamma)^{1/gamma}. Flags divergence when the
/// integral blows up at zero or the running max keeps growing as the
/// probe range is extended.
pub fn delta_gamma_norm(b: &RadialWeight, gamma: f64, probes: &[f64]) -> Result<NormValue> {
    if !(gamma >= 1.0) {
        return Err(MzError::BadGamma(gamma));
    }
    let p0 = -b.zero_exponent() * gamma;
    if p0 >= 1.0 - 1e-12 {
        // |b|^gamma ~ t^{-p0} is not integrable at zero
        return Ok(QuadOutcome::Divergent { last: f64::INFINITY });
    }
    let base_max = delta_running_max(b, gamma, probes)?;
    // extend the probe range two octaves twice; the sup is over all R > 0,
    // so a max that keeps moving means the norm is not certified finite
    let hi = probes.last().copied().unwrap_or(1.0);
    let ext1 = delta_running_max(b, gamma, &log_spaced(hi, hi * 4.0, 4))?;
    let m1 = base_max.max(ext1);
    let ext2 = delta_running_max(b, gamma, &log_spaced(hi * 4.0, hi * 16.0, 4))?;
    let m2 = m1.max(ext2);
    if m2 > m1 * (1.0 + REFINE_TOL) || m1 > base_max * (1.0 + REFINE_TOL) {
        return Ok(QuadOutcome::Divergent { last: m2 });
    }
    Ok(QuadOutcome::Converged(base_max))
}

fn delta_running_max(b: &RadialWeight, gamma: f64, probes: &[f64]) -> Result<f64> {
    let mut sorted = probes.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut max_val = 0.0f64;
    let mut integral = 0.0f64;
    let mut prev = 0.0f64;
    for &r in &sorted {
        integral += radial_integral(b, gamma, prev, r)?;
        prev = r;
        let avg = (integral / r).powf(1.0 / gamma);
        if !avg.is_finite() {
            return Err(MzError::NonFiniteWeight(r));
        }
        max_val = max_val.max(avg);
    }
    Ok(max_val)
}

/// int_lo^hi |b|^gamma with grading toward zero and splits at breakpoints.
fn radial_integral(b: &RadialWeight, gamma: f64, lo: f64, hi: f64) -> Result<f64> {
    if hi <= lo {
        return Ok(0.0);
    }
    let mut cuts: Vec<f64> = vec![lo, hi];
    for &bp in b.breakpoints() {
        if bp > lo && bp < hi {
            cuts.push(bp);
        }
    }
    cuts.sort_by(f64::total_cmp);
    let f = |t: f64| b.at(t).abs().powf(gamma);
    let mut acc = 0.0;
    for w in cuts.windows(2) {
        let (a, c) = (w[0], w[1]);
        if a == 0.0 {
            let p0 = (-b.zero_exponent() * gamma).max(0.0);
            let at_a = if p0 > 0.0 {
                Endpoint::Singular { exponent: p0 }
            } else {
                Endpoint::Regular
            };
            acc += graded_segment(&f, a, c, at_a, Endpoint::Regular, 16, 48);
        } else {
            acc += graded_segment(&f, a, c, Endpoint::Regular, Endpoint::Regular, 16, 0);
        }
    }
    Ok(acc)
}

// ---------------------------------------------------------------------------
// surface profiles
// ---------------------------------------------------------------------------

/// Curve profile phi with certified structural constants.
#[derive(Clone)]
pub struct SurfaceProfile {
    name: String,
    eval: RealFn,
    deriv: RealFn,
    /// doubling constant: sup phi(2t)/phi(t)
    c0: f64,
    /// derivative constant: sup phi/(t phi') = the sup norm of phi-tilde
    c1: f64,
    /// reverse doubling: inf phi(2t)/phi(t)
    big_c1: f64,
    /// induced lacunarity 2^{1/c1}
    lacunarity: f64,
    monotone: bool,
    probe_range: (f64, f64),
}

impl std::fmt::Debug for SurfaceProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SurfaceProfile")
            .field("name", &self.name)
            .field("c0", &self.c0)
            .field("c1", &self.c1)
            .field("big_c1", &self.big_c1)
            .field("lacunarity", &self.lacunarity)
            .field("monotone", &self.monotone)
            .finish()
    }
}

impl SurfaceProfile {
    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn phi(&self, t: f64) -> f64 {
        (self.eval)(t)
    }
    pub fn phi_prime(&self, t: f64) -> f64 {
        (self.deriv)(t)
    }
    /// phi-tilde(t) = phi(t) / (t phi'(t)).
    pub fn varphi(&self, t: f64) -> f64 {
        self.phi(t) / (t * self.phi_prime(t))
    }
    pub fn doubling_c0(&self) -> f64 {
        self.c0
    }
    pub fn derivative_c1(&self) -> f64 {
        self.c1
    }
    pub fn varphi_sup(&self) -> f64 {
        self.c1
    }
    pub fn reverse_doubling(&self) -> f64 {
        self.big_c1
    }
    pub fn lacunarity(&self) -> f64 {
        self.lacunarity
    }
    pub fn is_monotone_condition(&self) -> bool {
        self.monotone
    }
    pub fn probe_range(&self) -> (f64, f64) {
        self.probe_range
    }
    pub fn log2_c0(&self) -> f64 {
        self.c0.log2()
    }
}

/// Certify a profile on a probe range (64 points per octave): doubling,
/// derivative bound, reverse doubling, induced lacunarity, monotonicity
/// of phi-tilde or t phi'. Rejects profiles that are not positive and
/// increasing or whose phi-tilde is still rising at the top of the range
/// (the derivative condition cannot be certified by any finite constant).
pub fn profile_constants(
    name: &str,
    eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
    deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
    probe_range: (f64, f64),
) -> Result<SurfaceProfile> {
    let (t_min, t_max) = probe_range;
    if !(t_min > 0.0 && t_max > t_min) {
        return Err(MzError::ProfileRejected("bad probe range".into()));
    }
    let probes = log_spaced(t_min, t_max, 64);
    let mut c0 = f64::NEG_INFINITY;
    let mut big_c1 = f64::INFINITY;
    let mut c1 = f64::NEG_INFINITY;
    let mut varphis = Vec::with_capacity(probes.len());
    let mut tphips = Vec::with_capacity(probes.len());
    for &t in &probes {
        let p = eval(t);
        let dp = deriv(t);
        if !(p > 0.0) || !p.is_finite() {
            return Err(MzError::ProfileRejected(format!(
                "phi({t}) = {p} is not positive"
            )));
        }
        if !(dp > 0.0) || !dp.is_finite() {
            return Err(MzError::ProfileRejected(format!(
                "phi'({t}) = {dp} is not positive"
            )));
        }
        let p2 = eval(2.0 * t);
        let ratio = p2 / p;
        if !(ratio > 1.0) {
            return Err(MzError::ProfileRejected(format!(
                "phi not increasing at t = {t}: phi(2t)/phi(t) = {ratio}"
            )));
        }
        c0 = c0.max(ratio);
        big_c1 = big_c1.min(ratio);
        let v = p / (t * dp);
        c1 = c1.max(v);
        varphis.push(v);
        tphips.push(t * dp);
    }
    // phi-tilde still rising at the top edge: no finite c1 certifiable
    let tail = probes.len() - 128;
    let edge_rise = varphis[tail..]
        .windows(64)
        .all(|w| w[63] > w[0] * 1.0001);
    if edge_rise && varphis[probes.len() - 1] > varphis[tail] * 1.02 {
        return Err(MzError::ProfileRejected(format!(
            "phi/(t phi') is still rising at the probe edge (reaches {:.3}); \
             the derivative condition cannot be certified",
            varphis[probes.len() - 1]
        )));
    }
    if c1 > 1e3 {
        return Err(MzError::ProfileRejected(format!(
            "phi/(t phi') reaches {c1:.3e}; rejected as unbounded"
        )));
    }
    let monotone = is_monotone(&varphis) || is_monotone(&tphips);
    Ok(SurfaceProfile {
        name: name.into(),
        eval: Arc::new(eval),
        deriv: Arc::new(deriv),
        c0,
        c1,
        big_c1,
        lacunarity: 2f64.powf(1.0 / c1),
        monotone,
        probe_range,
    })
}

fn is_monotone(values: &[f64]) -> bool {
    let tol = 1e-10;
    let nondecreasing = values.windows(2).all(|w| w[1] >= w[0] * (1.0 - tol) - tol);
    let nonincreasing = values.windows(2).all(|w| w[1] <= w[0] * (1.0 + tol) + tol);
    nondecreasing || nonincreasing
}

/// Default certification range used by the experiments.
pub const DEFAULT_PROBE_RANGE: (f64, f64) = (2.44140625e-4, 4096.0); // [2^-12, 2^12]

/// phi(t) = t^p. Small integer exponents avoid powf on the hot paths.
pub fn power_profile(p: f64) -> Result<SurfaceProfile> {
    if !(p > 0.0) {
        return Err(MzError::ProfileRejected(format!(
            "power profile needs p > 0, got {p}"
        )));
    }
    let name = format!("power({p})");
    if p == 1.0 {
        return profile_constants(&name, |t| t, |_| 1.0, DEFAULT_PROBE_RANGE);
    }
    if p == 2.0 {
        return profile_constants(&name, |t| t * t, |t| 2.0 * t, DEFAULT_PROBE_RANGE);
    }
    if p == 3.0 {
        return profile_constants(&name, |t| t * t * t, |t| 3.0 * t * t, DEFAULT_PROBE_RANGE);
    }
    profile_constants(
        &name,
        move |t| t.powf(p),
        move |t| p * t.powf(p - 1.0),
        DEFAULT_PROBE_RANGE,
    )
}

pub fn identity_profile() -> Result<SurfaceProfile> {
    profile_constants("identity", |t| t, |_| 1.0, DEFAULT_PROBE_RANGE)
}

// ---------------------------------------------------------------------------
// L log L decomposition
// ---------------------------------------------------------------------------

/// Level-set decomposition of a kernel with finite L log L norm.
#[derive(Debug, Clone)]
pub struct LLogLDecomposition {
    /// indices m with sigma{2^(m-1) < |Omega| <= 2^m} > 2^(-4m), plus 0
    pub lambda: Vec<usize>,
    /// the mean-corrected pieces Omega_m for m in lambda, m >= 1
    pub pieces: Vec<(usize, RoughKernel)>,
    /// Omega_0 = Omega - sum of pieces
    pub omega0: RoughKernel,
    /// ||Omega_0||_2 + sum_m m ||Omega_m||_1
    pub bound_report: f64,
}

/// Decompose on the sample grid. All identities (reconstruction, per-piece
/// mean zero) are exact at sample resolution.
pub fn llogl_decompose(omega: &RoughKernel) -> Result<LLogLDecomposition> {
    let q = omega.sample_count();
    let weight = TWO_PI / q as f64;
    let samples = omega.samples();
    for &v in samples {
        if !v.is_finite() {
            return Err(MzError::NonFiniteKernel(0.0));
        }
    }
    let max_abs = samples.iter().fold(0.0f64, |m, &v| m.max(v.abs()));
    let m_top = if max_abs <= 1.0 {
        0
    } else {
        max_abs.log2().ceil() as usize
    };
    let mut lambda = vec![0usize];
    let mut pieces: Vec<(usize, RoughKernel)> = Vec::new();
    let mut remainder: Vec<f64> = samples.to_vec();
    for m in 1..=m_top {
        let lo = 2f64.powi(m as i32 - 1);
        let hi = 2f64.powi(m as i32);
        let mask: Vec<bool> = samples.iter().map(|&v| v.abs() > lo && v.abs() <= hi).collect();
        let measure = weight * mask.iter().filter(|&&b| b).count() as f64;
        if measure > 2f64.powi(-(4 * m as i32)) {
            lambda.push(m);
            let set_integral: f64 = samples
                .iter()
                .zip(&mask)
                .filter(|(_, &b)| b)
                .map(|(&v, _)| v)
                .sum::<f64>()
                * weight;
            let mean = set_integral / TWO_PI;
            let piece: Vec<f64> = samples
                .iter()
                .zip(&mask)
                .map(|(&v, &b)| if b { v - mean } else { -mean })
                .collect();
            for (r, p) in remainder.iter_mut().zip(&piece) {
                *r -= p;
            }
            pieces.push((m, RoughKernel::from_samples(piece)?));
        }
    }
    let omega0 = RoughKernel::from_samples(remainder)?;
    let l2_omega0 = (omega0.sample_sum(|v| v * v)).sqrt();
    let mut bound = l2_omega0;
    for (m, piece) in &pieces {
        bound += *m as f64 * piece.sample_sum(f64::abs);
    }
    Ok(LLogLDecomposition {
        lambda,
        pieces,
        omega0,
        bound_report: bound,
    })
}
