//! Quadrature building blocks: Gauss-Legendre rules (nodes computed by
//! Newton iteration, cached per order), oscillation-resolving panel
//! integration, and geometrically graded meshes for power-law endpoint
//! singularities with an analytic innermost sliver.

use num_complex::Complex64;
use std::sync::OnceLock;

use crate::error::{MzError, Result};

/// Nodes and weights of the n-point Gauss-Legendre rule on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n {
        // Chebyshev initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre_pair(n, x);
            let dx = p / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (_, dp) = legendre_pair(n, x);
        nodes[n - 1 - i] = x;
        weights[n - 1 - i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    (nodes, weights)
}

/// (P_n(x), P_n'(x)) by the three-term recurrence.
fn legendre_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0f64;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, dp)
}

/// Cached 8-point rule (the workhorse panel rule).
pub fn gl8_rule() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| gauss_legendre(8))
}

fn gl8() -> &'static (Vec<f64>, Vec<f64>) {
    gl8_rule()
}

/// 8-point Gauss-Legendre on [a, b] of a complex integrand.
pub fn gl8_complex<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> Complex64 {
    let (nodes, weights) = gl8();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = Complex64::new(0.0, 0.0);
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// 8-point Gauss-Legendre on [a, b] of a real integrand.
pub fn gl8_real<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gl8();
    let mid = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut acc = 0.0;
    for (x, w) in nodes.iter().zip(weights) {
        acc += f(mid + half * x) * *w;
    }
    acc * half
}

/// Integrate a complex integrand over [a, b], resolving oscillation of
/// total phase `phase` (radians across the interval): panels are sized so
/// each carries at most ~4 radians. `budget` caps the panel count.
pub fn oscillatory_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    phase: f64,
    budget: usize,
) -> Result<Complex64> {
    if b <= a {
        return Ok(Complex64::new(0.0, 0.0));
    }
    let needed = (phase.abs() / 4.0).ceil() as usize + 2;
    if needed > budget {
        return Err(MzError::QuadratureBudget {
            needed,
            cap: budget,
        });
    }
    let h = (b - a) / needed as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..needed {
        let lo = a + i as f64 * h;
        acc += gl8_complex(f, lo, lo + h);
    }
    Ok(acc)
}

/// One endpoint of a graded segment: either regular or carrying a
/// power-law singularity |u|^(-exponent) at distance u from the endpoint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Endpoint {
    Regular,
    /// integrand ~ C * u^(-exponent) as u -> 0+ from this endpoint
    Singular { exponent: f64 },
}

/// Result of a graded integration with refinement-based convergence check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum QuadOutcome {
    Converged(f64),
    /// refinement failed to Cauchy-converge; `last` is the final estimate
    Divergent { last: f64 },
}

impl QuadOutcome {
    pub fn value(&self) -> f64 {
        match self {
            QuadOutcome::Converged(v) => *v,
            QuadOutcome::Divergent { last } => *last,
        }
    }
    pub fn is_divergent(&self) -> bool {
        matches!(self, QuadOutcome::Divergent { .. })
    }
}

/// Graded-mesh integral of `f` over [a, b] with the stated endpoint
/// behavior. Geometric panels (ratio 1/2) march into each singular
/// endpoint for `levels` halvings; the innermost sliver [0, eps] is
/// integrated in closed form against the pure power u^(-p) with the
/// local coefficient estimated at the sliver edge. Exponents >= 1 get no
/// sliver (the integral diverges there), so successive refinements keep
/// growing and the caller's Cauchy check fails, which is the detection
/// mechanism for divergence.
pub fn graded_segment<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    at_a: Endpoint,
    at_b: Endpoint,
    base_panels: usize,
    levels: usize,
) -> f64 {
    let len = b - a;
    if len <= 0.0 {
        return 0.0;
    }
    // Margins consumed by grading near each endpoint (quarter of segment each).
    let margin = 0.25 * len;
    let (core_a, sum_a) = match at_a {
        Endpoint::Regular => (a, 0.0),
        Endpoint::Singular { exponent } => {
            let s = graded_edge(f, a, margin, exponent, levels, false);
            (a + margin, s)
        }
    };
    let (core_b, sum_b) = match at_b {
        Endpoint::Regular => (b, 0.0),
        Endpoint::Singular { exponent } => {
            let s = graded_edge(f, b, margin, exponent, levels, true);
            (b - margin, s)
        }
    };
    let mut acc = sum_a + sum_b;
    if core_b > core_a {
        let h = (core_b - core_a) / base_panels as f64;
        for i in 0..base_panels {
            let lo = core_a + i as f64 * h;
            acc += gl8_real(f, lo, lo + h);
        }
    }
    acc
}

/// Geometric panels from distance `margin` down to margin/2^levels away
/// from the singular endpoint at `edge`, plus the analytic sliver.
/// `from_right`: the singularity sits at the right end (integration runs
/// toward decreasing u).
fn graded_edge<F: Fn(f64) -> f64>(
    f: &F,
    edge: f64,
    margin: f64,
    exponent: f64,
    levels: usize,
    from_right: bool,
) -> f64 {
    let mut acc = 0.0;
    let mut outer = margin;
    for _ in 0..levels {
        let inner = 0.5 * outer;
        let (lo, hi) = if from_right {
            (edge - outer, edge - inner)
        } else {
            (edge + inner, edge + outer)
        };
        acc += gl8_real(f, lo, hi);
        outer = inner;
    }
    // sliver [0, outer] in distance-from-edge coordinates
    if exponent < 0.999 {
        let u = outer;
        let probe = if from_right { edge - u } else { edge + u };
        let coeff = f(probe) * u.powf(exponent);
        acc += coeff * u.powf(1.0 - exponent) / (1.0 - exponent);
    }
    acc
}

/// Complex variant of [`graded_segment`] with an oscillation cap: panels
/// wider than `max_width` are subdivided uniformly so the integrand's
/// phase stays resolved even inside the graded margins.
pub fn graded_segment_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    a: f64,
    b: f64,
    at_a: Endpoint,
    at_b: Endpoint,
    base_panels: usize,
    levels: usize,
    max_width: f64,
) -> Complex64 {
    let len = b - a;
    if len <= 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let margin = 0.25 * len;
    let (core_a, sum_a) = match at_a {
        Endpoint::Regular => (a, Complex64::new(0.0, 0.0)),
        Endpoint::Singular { exponent } => (
            a + margin,
            graded_edge_complex(f, a, margin, exponent, levels, false, max_width),
        ),
    };
    let (core_b, sum_b) = match at_b {
        Endpoint::Regular => (b, Complex64::new(0.0, 0.0)),
        Endpoint::Singular { exponent } => (
            b - margin,
            graded_edge_complex(f, b, margin, exponent, levels, true, max_width),
        ),
    };
    let mut acc = sum_a + sum_b;
    if core_b > core_a {
        let span = core_b - core_a;
        let count = base_panels.max((span / max_width).ceil() as usize);
        let h = span / count as f64;
        for i in 0..count {
            let lo = core_a + i as f64 * h;
            acc += gl8_complex(f, lo, lo + h);
        }
    }
    acc
}

fn graded_edge_complex<F: Fn(f64) -> Complex64>(
    f: &F,
    edge: f64,
    margin: f64,
    exponent: f64,
    levels: usize,
    from_right: bool,
    max_width: f64,
) -> Complex64 {
    let mut acc = Complex64::new(0.0, 0.0);
    let mut outer = margin;
    for _ in 0..levels {
        let inner = 0.5 * outer;
        let (lo, hi) = if from_right {
            (edge - outer, edge - inner)
        } else {
            (edge + inner, edge + outer)
        };
        let count = (((hi - lo) / max_width).ceil() as usize).max(1);
        let h = (hi - lo) / count as f64;
        for i in 0..count {
            let s = lo + i as f64 * h;
            acc += gl8_complex(f, s, s + h);
        }
        outer = inner;
    }
    if exponent < 0.999 {
        let u = outer;
        let probe = if from_right { edge - u } else { edge + u };
        let coeff = f(probe) * u.powf(exponent);
        acc += coeff * (u.powf(1.0 - exponent) / (1.0 - exponent));
    }
    acc
}

/// Refinement loop: evaluate at increasing mesh density until two
/// successive results differ by < rel_tol * |value| + abs_tol, or flag
/// divergence. Levels stay low enough that the geometric grading never
/// reaches the f64 resolution floor, where a log divergence would stall
/// and masquerade as convergence.
pub fn refine_to_convergence<G: Fn(usize, usize) -> f64>(
    eval: G,
    rel_tol: f64,
    abs_tol: f64,
    max_rounds: usize,
) -> QuadOutcome {
    let mut panels = 16usize;
    let mut levels = 24usize;
    let mut prev = eval(panels, levels);
    for _ in 0..max_rounds {
        panels *= 2;
        levels += 4;
        let next = eval(panels, levels);
        if (next - prev).abs() < rel_tol * next.abs() + abs_tol {
            return QuadOutcome::Converged(next);
        }
        prev = next;
    }
    QuadOutcome::Divergent { last: prev }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_exactness() {
        // n-point rule integrates polynomials up to degree 2n-1 exactly
        let (nodes, weights) = gauss_legendre(8);
        for deg in 0..16 {
            let got: f64 = nodes
                .iter()
                .zip(&weights)
                .map(|(x, w)| w * x.powi(deg))
                .sum();
            let want = if deg % 2 == 0 {
                2.0 / (deg as f64 + 1.0)
            } else {
                0.0
            };
            assert!((got - want).abs() < 1e-13, "degree {deg}");
        }
    }

    #[test]
    fn oscillatory_resolves_pure_wave() {
        // int_0^1 e^{i s x} dx = (e^{is} - 1)/(is)
        for &s in &[3.0, 50.0, 400.0] {
            let f = |x: f64| Complex64::new(0.0, s * x).exp();
            let got = oscillatory_complex(&f, 0.0, 1.0, s, 1_000_000).unwrap();
            let want = (Complex64::new(0.0, s).exp() - 1.0) / Complex64::new(0.0, s);
            assert!((got - want).norm() < 1e-12, "s={s}");
        }
    }

    #[test]
    fn budget_is_enforced() {
        let f = |x: f64| Complex64::new(0.0, 1e9 * x).exp();
        let err = oscillatory_complex(&f, 0.0, 1.0, 1e9, 1000).unwrap_err();
        assert!(matches!(err, MzError::QuadratureBudget { .. }));
    }

    #[test]
    fn graded_handles_integrable_power() {
        // int_0^1 x^{-1/2} dx = 2
        let f = |x: f64| x.powf(-0.5);
        let got = graded_segment(
            &f,
            0.0,
            1.0,
            Endpoint::Singular { exponent: 0.5 },
            Endpoint::Regular,
            32,
            40,
        );
        assert!((got - 2.0).abs() < 1e-9, "got {got}");
    }

    #[test]
    fn refinement_flags_log_divergence() {
        // int_0^1 dx/x diverges; exponent 1 disables the sliver so the
        // estimates keep growing by ln 2 per extra level.
        let f = |x: f64| 1.0 / x;
        let outcome = refine_to_convergence(
            |panels, levels| {
                graded_segment(
                    &f,
                    0.0,
                    1.0,
                    Endpoint::Singular { exponent: 1.0 },
                    Endpoint::Regular,
                    panels,
                    levels,
                )
            },
            0.005,
            1e-12,
            6,
        );
        assert!(outcome.is_divergent());
    }

    #[test]
    fn refinement_converges_for_smooth() {
        let f = |x: f64| (3.0 * x).sin() + 1.0;
        let outcome = refine_to_convergence(
            |panels, levels| {
                graded_segment(&f, 0.0, 2.0, Endpoint::Regular, Endpoint::Regular, panels, levels)
            },
            0.005,
            1e-12,
            6,
        );
        match outcome {
            QuadOutcome::Converged(v) => {
                let want = 2.0 + (1.0 - (6.0f64).cos()) / 3.0;
                assert!((v - want).abs() < 1e-10);
            }
            QuadOutcome::Divergent { .. } => panic!("should converge"),
        }
    }
}
