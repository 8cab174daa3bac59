//! mzlab: a numerical workbench for fractional-type Marcinkiewicz
//! integral operators associated to surfaces.
//!
//! The crate provides the periodic-grid Fourier substrate, rough kernels
//! on the circle with their norm functionals (Z, W, Delta_gamma, L log L
//! decomposition), lacunary Littlewood-Paley frames and adapted
//! Triebel-Lizorkin norms, the surface measures sigma_t and the operators
//! built from them, and the experiment harness that sweeps all of it and
//! writes CSV/JSON reports.

pub mod config;
pub mod error;
pub mod grid;
pub mod harness;
pub mod kernels;
pub mod littlewood_paley;
pub mod marcinkiewicz;
pub mod quad;
pub mod report;
pub mod rng;
pub mod special;
pub mod symtab;

pub use error::{MzError, Result};

/// Build the global worker pool from the MZLAB_THREADS environment
/// variable (0 or unset: one worker per core). Call once at startup;
/// later calls are no-ops.
pub fn init_threads_from_env() {
    if let Ok(v) = std::env::var("MZLAB_THREADS") {
        if let Ok(n) = v.trim().parse::<usize>() {
            if n > 0 {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
        }
    }
}
