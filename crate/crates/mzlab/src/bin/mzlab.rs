//! mzlab command-line front end.
//!
//! Usage: mzlab <command> --config <path> [--set key=value]... [--out <dir>]
//!
//! Commands: partition, norms, sigma, mu, decay, bound, llogl, exponents,
//! report, validate. Each experiment writes <out>/<command>.csv and merges
//! its verdicts into <out>/summary.json. Deterministic given config + seed
//! (byte-identical CSV with MZLAB_THREADS=1).

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use num_complex::Complex64;
use serde_json::json;

use mzlab::config::{parse_set_argument, ExperimentConfig};
use mzlab::error::MzError;
use mzlab::grid::{compose_double, dilate_by_two, l2_norm, synthesize_bandlimited, RadialAnnulus};
use mzlab::harness::{
    alpha_range, boundedness_experiment, decay_experiment, field_family, interpolation_exponents,
    llogl_pipeline, sigma_decay_slope, AlphaRange, Clause, FamilyField, TheoremId, TheoremParams,
};
use mzlab::kernels::omega_norms;
use mzlab::littlewood_paley::{equivalence_experiment, tl_norm, EquivalenceVerdict};
use mzlab::littlewood_paley::LPFrame;
use mzlab::marcinkiewicz::{
    dyadic_block_bound, mu_apply, oscillatory_b, sigma_hat, BlockBoundForm, OperatorSpec, TGrid,
};
use mzlab::report::{fmt_f64, merge_summary, render_summary, CsvTable};

struct Cli {
    command: String,
    config: Option<PathBuf>,
    out: PathBuf,
    overrides: Vec<(String, String)>,
}

fn parse_args() -> Result<Cli, String> {
    let mut args = std::env::args().skip(1);
    let command = match args.next() {
        Some(c) => c,
        None => return Err(usage()),
    };
    let mut config = None;
    let mut out = PathBuf::from("out");
    let mut overrides = Vec::new();
    while let Some(arg) = args.next() {
        match arg.as_str() {
            "--config" => {
                config = Some(PathBuf::from(
                    args.next().ok_or("--config needs a path")?,
                ));
            }
            "--out" => {
                out = PathBuf::from(args.next().ok_or("--out needs a directory")?);
            }
            "--set" => {
                let kv = args.next().ok_or("--set needs key=value")?;
                overrides.push(parse_set_argument(&kv).map_err(|e| e.to_string())?);
            }
            "--help" | "-h" => return Err(usage()),
            other => return Err(format!("unknown argument '{other}'\n{}", usage())),
        }
    }
    Ok(Cli {
        command,
        config,
        out,
        overrides,
    })
}

fn usage() -> String {
    "usage: mzlab <command> --config <path> [--set key=value]... [--out <dir>]\n\
     commands: partition | norms | sigma | mu | decay | bound | llogl | exponents | report | validate\n\
     env: MZLAB_THREADS=<n> (0 or unset: auto)"
        .into()
}

fn main() -> ExitCode {
    mzlab::init_threads_from_env();
    let cli = match parse_args() {
        Ok(c) => c,
        Err(msg) => {
            eprintln!("{msg}");
            return ExitCode::from(2);
        }
    };
    if cli.command == "report" {
        return match run_report(&cli.out) {
            Ok(()) => ExitCode::SUCCESS,
            Err(e) => {
                emit_error("report", &e);
                ExitCode::FAILURE
            }
        };
    }
    let cfg = match load_config(&cli) {
        Ok(c) => c,
        Err(e) => {
            emit_error("config", &e);
            return ExitCode::from(2);
        }
    };
    if cli.command == "validate" {
        let diags = cfg.validate();
        if diags.is_empty() {
            println!("ok");
        } else {
            for d in &diags {
                println!("consistency: {d}");
            }
        }
        return ExitCode::SUCCESS;
    }
    let diags = cfg.validate();
    if !diags.is_empty() {
        for d in &diags {
            eprintln!("config error: {d}");
        }
        emit_error(
            &cli.command,
            &MzError::Config(format!("{} consistency error(s)", diags.len())),
        );
        return ExitCode::from(2);
    }
    let run = match cli.command.as_str() {
        "partition" => run_partition(&cfg, &cli.out),
        "norms" => run_norms(&cfg, &cli.out),
        "sigma" => run_sigma(&cfg, &cli.out),
        "mu" => run_mu(&cfg, &cli.out),
        "decay" => run_decay(&cfg, &cli.out),
        "bound" => run_bound(&cfg, &cli.out),
        "llogl" => run_llogl(&cfg, &cli.out),
        "exponents" => run_exponents(&cfg, &cli.out),
        other => {
            eprintln!("unknown command '{other}'\n{}", usage());
            return ExitCode::from(2);
        }
    };
    match run {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            emit_error(&cli.command, &e);
            ExitCode::FAILURE
        }
    }
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, MzError> {
    let text = match &cli.config {
        Some(path) => std::fs::read_to_string(path)
            .map_err(|e| MzError::Config(format!("cannot read {}: {e}", path.display())))?,
        None => "{}".into(),
    };
    ExperimentConfig::from_json_with_overrides(&text, &cli.overrides)
}

/// Machine-readable error record on stderr.
fn emit_error(command: &str, err: &MzError) {
    let record = json!({
        "error": {
            "command": command,
            "message": err.to_string(),
        }
    });
    eprintln!("{record}");
}

fn pass(b: bool) -> &'static str {
    if b {
        "pass"
    } else {
        "fail"
    }
}

// ---------------------------------------------------------------------------
// partition: frame checks
// ---------------------------------------------------------------------------

fn run_partition(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let profile = cfg.build_profile()?;
    let frame = cfg.build_frame(&profile)?;
    let mut table = CsvTable::new(&["frame", "check", "value", "status"]);
    let (clo, chi) = frame.covered_band();
    let (k0, k1) = frame.piece_range();
    let mut max_defect = 0.0f64;
    let mut max_overlap_product = 0.0f64;
    for idx in 0..grid.len() {
        let (kx, ky) = grid.frequency(idx);
        let r = (kx * kx + ky * ky).sqrt();
        if r < clo || r > chi {
            continue;
        }
        let mut sum = 0.0;
        for k in k0..=k1 {
            sum += frame.piece(k, r)?;
        }
        max_defect = max_defect.max((sum - 1.0).abs());
        for k in k0..=(k1 - 2) {
            max_overlap_product =
                max_overlap_product.max(frame.piece(k, r)? * frame.piece(k + 2, r)?);
        }
    }
    let name = frame.sequence().name().to_string();
    let sum_ok = max_defect < 1e-10;
    let disjoint_ok = max_overlap_product == 0.0;
    table.push(vec![
        name.clone(),
        "partition_sum_defect".into(),
        fmt_f64(max_defect),
        pass(sum_ok).into(),
    ]);
    table.push(vec![
        name.clone(),
        "disjointness_psi_j_psi_j2".into(),
        fmt_f64(max_overlap_product),
        pass(disjoint_ok).into(),
    ]);
    table.write_to(&out.join("partition.csv"))?;
    merge_summary(
        out,
        "partition",
        json!({
            "frame": name,
            "covered_band": [clo, chi],
            "max_partition_defect": max_defect,
            "max_disjointness_product": max_overlap_product,
            "pass": sum_ok && disjoint_ok,
        }),
    )?;
    println!(
        "partition: defect {max_defect:.3e}, disjointness {max_overlap_product:.1e} [{}]",
        pass(sum_ok && disjoint_ok)
    );
    if sum_ok && disjoint_ok {
        Ok(())
    } else {
        Err(MzError::InvalidDomain("partition checks failed".into()))
    }
}

// ---------------------------------------------------------------------------
// norms: TL norm tables + equivalence experiment between two eta orders
// ---------------------------------------------------------------------------

fn run_norms(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let profile = cfg.build_profile()?;
    let frame_a = cfg.build_frame_with_order(&profile, cfg.frame.eta_order)?;
    let frame_b = cfg.build_frame_with_order(&profile, cfg.frame.eta_order + 1)?;
    let params = cfg.build_tl_params()?;
    let ann = RadialAnnulus::new(cfg.experiment.band_lo * 4.0, cfg.experiment.band_hi * 16.0)?;
    let fields: Vec<_> = (0..cfg.experiment.per_scale)
        .map(|i| synthesize_bandlimited(cfg.seed + i as u64, &ann, grid))
        .collect::<Result<_, _>>()?;
    let report = equivalence_experiment(
        &frame_a,
        &frame_b,
        &params,
        &fields,
        cfg.experiment.thresholds.ratio_spread_max,
    )?;
    let mut table = CsvTable::new(&["seed", "norm_a", "norm_b", "ratio"]);
    for (i, f) in fields.iter().enumerate() {
        let na = tl_norm(f, &params, &frame_a)?;
        let nb = tl_norm(f, &params, &frame_b)?;
        table.push(vec![
            (cfg.seed + i as u64).to_string(),
            fmt_f64(na),
            fmt_f64(nb),
            fmt_f64(na / nb),
        ]);
    }
    table.write_to(&out.join("norms.csv"))?;
    let verdict = match report.verdict {
        EquivalenceVerdict::BoundedRatio => "bounded-ratio",
        EquivalenceVerdict::UnboundedGrowth => "unbounded-growth",
    };
    merge_summary(
        out,
        "norms",
        json!({
            "ratio_min": report.min,
            "ratio_max": report.max,
            "spread": report.spread,
            "verdict": verdict,
            "threshold": cfg.experiment.thresholds.ratio_spread_max,
        }),
    )?;
    println!(
        "norms: ratio spread {:.4} over {} fields [{verdict}]",
        report.spread,
        fields.len()
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// sigma: Fourier-bound suite
// ---------------------------------------------------------------------------

fn run_sigma(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let spec = cfg.build_operator_spec()?;
    let mut table = CsvTable::new(&["check", "param", "lhs", "rhs", "status"]);
    let mut all_ok = true;

    // Bessel spot check (cosine kernel, phi = id, b = 1, rho = 1)
    let mut bessel_json = json!(null);
    if spec.omega.name() == "cosine"
        && spec.profile.name() == "identity"
        && (spec.rho - 1.0).abs() < 1e-12
    {
        let got = sigma_hat(1.0, (2.0, 0.0), &spec)?;
        const J0_1: f64 = 0.7651976865579666;
        const J0_2: f64 = 0.22389077914123567;
        let want = Complex64::new(0.0, -std::f64::consts::PI * (J0_1 - J0_2));
        let rel = (got - want).norm() / want.norm();
        let ok = rel < 1e-6;
        all_ok &= ok;
        bessel_json = json!({ "relative_error": rel, "pass": ok });
        table.push(vec![
            "bessel_spot".into(),
            "t=1;xi=(2;0)".into(),
            fmt_f64(got.im),
            fmt_f64(want.im),
            pass(ok).into(),
        ]);
    }

    // uniform and cancellation bounds over t x xi samples
    let l1 = spec.omega.l1_cached();
    let d1 = spec.delta_norm(1.0)?;
    if d1.is_divergent() {
        return Err(MzError::InvalidDomain(
            "Delta_1 norm of b diverges; the sigma bound suite needs it finite".into(),
        ));
    }
    let uniform_cap = 2f64.powf(2.0 - spec.rho) * l1 * d1.value();
    let tg = cfg.build_tgrid()?;
    let norms = omega_norms(&spec.omega);
    let cancellative = norms.cancellation_defect < 1e-8 * l1.max(1.0);
    let mut worst_uniform = f64::NEG_INFINITY;
    let mut worst_cancel = f64::NEG_INFINITY;
    let dirs = 8usize;
    let mags = 25usize;
    for d in 0..dirs {
        let phi_dir = 2.0 * std::f64::consts::PI * d as f64 / dirs as f64 + 0.05;
        for m in 0..mags {
            let r = 2f64.powf(-8.0 + 9.0 * m as f64 / (mags - 1) as f64);
            let xi = (r * phi_dir.cos(), r * phi_dir.sin());
            for &t in tg.nodes().iter().step_by(4) {
                let s = sigma_hat(t, xi, &spec)?.norm();
                worst_uniform = worst_uniform.max(s - uniform_cap);
                if cancellative {
                    let cancel = 2.0 * l1 * d1.value() * spec.profile.phi(t) * r;
                    worst_cancel = worst_cancel.max(s - cancel);
                }
            }
        }
    }
    let uniform_ok = worst_uniform <= 1e-8;
    let cancel_ok = !cancellative || worst_cancel <= 1e-8;
    all_ok &= uniform_ok && cancel_ok;
    table.push(vec![
        "uniform_bound_slack".into(),
        "eq_2.6".into(),
        fmt_f64(worst_uniform),
        fmt_f64(0.0),
        pass(uniform_ok).into(),
    ]);
    if cancellative {
        table.push(vec![
            "cancellation_bound_slack".into(),
            "lemma_2.1".into(),
            fmt_f64(worst_cancel),
            fmt_f64(0.0),
            pass(cancel_ok).into(),
        ]);
    }

    // decay slope of log|sigma_t| against log(|xi| phi(t))
    let slope = sigma_decay_slope(&spec, 4.0, 48)?;
    let mut slopes = Vec::new();
    for &beta in &cfg.experiment.betas {
        let cap = -beta / 2.0 + 0.05;
        let ok = slope <= cap;
        all_ok &= ok;
        slopes.push(json!({ "beta": beta, "slope": slope, "cap": cap, "pass": ok }));
        table.push(vec![
            "decay_slope".into(),
            format!("beta={beta}"),
            fmt_f64(slope),
            fmt_f64(cap),
            pass(ok).into(),
        ]);
    }

    // dyadic block bound (cancellation form) at a few k
    if cancellative {
        for k in [-2i64, 0, 2] {
            let bb = dyadic_block_bound(k, (1.0, 0.5), &spec, BlockBoundForm::Cancellation)?;
            all_ok &= bb.ok;
            table.push(vec![
                "block_bound".into(),
                format!("k={k}"),
                fmt_f64(bb.lhs),
                fmt_f64(bb.rhs),
                pass(bb.ok).into(),
            ]);
        }
    }

    // oscillatory B bound samples (decay form needs the monotone condition)
    if spec.profile.is_monotone_condition() {
        let mut b_ok = true;
        for &t in &[0.5, 1.0, 4.0] {
            for &s in &[0.0, 2.0, 40.0] {
                let b = oscillatory_b(
                    t,
                    (s, 0.0),
                    (1.0, 0.0),
                    &spec,
                    cfg.experiment.thresholds.osc_cb,
                )?;
                b_ok &= b.bound_ok;
                table.push(vec![
                    "oscillatory_b".into(),
                    format!("t={t};s={s}"),
                    fmt_f64(b.value.norm()),
                    fmt_f64(b.trivial_bound.min(b.decay_bound)),
                    pass(b.bound_ok).into(),
                ]);
            }
        }
        all_ok &= b_ok;
    }

    table.write_to(&out.join("sigma.csv"))?;
    // symbol table export for cross-run caching (band-limited so rough
    // kernels stay within the quadrature budget)
    let grid = cfg.build_grid()?;
    let cap = 48.0f64.min(0.5 * grid.nyquist());
    let table_bin = mzlab::marcinkiewicz::sigma_symbol_grid(
        1.0,
        &spec,
        grid,
        Some((grid.freq_step(), cap)),
    )?;
    std::fs::write(out.join("sigma_symbol.bin"), mzlab::symtab::encode(&table_bin))?;
    merge_summary(
        out,
        "sigma",
        json!({
            "symbol_table": "sigma_symbol.bin",
            "bessel_spot": bessel_json,
            "uniform_bound_slack": worst_uniform,
            "cancellation_bound_slack": if cancellative { json!(worst_cancel) } else { json!(null) },
            "decay_slopes": slopes,
            "pass": all_ok,
        }),
    )?;
    println!("sigma: decay slope {slope:.4} [{}]", pass(all_ok));
    if all_ok {
        Ok(())
    } else {
        Err(MzError::InvalidDomain("sigma suite found violations".into()))
    }
}

// ---------------------------------------------------------------------------
// mu: operator evaluation + dilation covariance
// ---------------------------------------------------------------------------

fn run_mu(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let spec = cfg.build_operator_spec()?;
    let tg = cfg.build_tgrid()?;
    let ann = RadialAnnulus::new(cfg.experiment.band_lo * 4.0, cfg.experiment.band_hi * 8.0)?;
    let mut table = CsvTable::new(&["seed", "mu_l2", "covariance_rel_err"]);
    let mut worst_cov = 0.0f64;
    let covariance_applicable =
        spec.profile.name() == "identity" && spec.b.name().starts_with("constant");
    let count = cfg.experiment.per_scale.clamp(1, 6);
    for i in 0..count {
        let seed = cfg.seed + i as u64;
        let f = synthesize_bandlimited(seed, &ann, grid)?;
        let mu_f = mu_apply(&f, &spec, &tg)?;
        let cov = if covariance_applicable {
            let g = dilate_by_two(&f)?;
            let mu_g = mu_apply(&g, &spec, &tg)?;
            let mu_f2 = mu_apply(&f, &spec, &tg.doubled())?;
            let composed = compose_double(&mu_f2)?;
            let scale = 2f64.powf(spec.alpha);
            let mut num = 0.0;
            let mut den = 0.0;
            for (a, b) in mu_g.values().iter().zip(composed.values()) {
                num += (a - scale * b).norm_sqr();
                den += (scale * b).norm_sqr();
            }
            let rel = (num / den).sqrt();
            worst_cov = worst_cov.max(rel);
            rel
        } else {
            f64::NAN
        };
        table.push(vec![
            seed.to_string(),
            fmt_f64(l2_norm(&mu_f)),
            if cov.is_nan() {
                "n/a".into()
            } else {
                fmt_f64(cov)
            },
        ]);
    }
    table.write_to(&out.join("mu.csv"))?;
    let cov_ok = !covariance_applicable || worst_cov < 1e-3;
    merge_summary(
        out,
        "mu",
        json!({
            "fields": count,
            "covariance_applicable": covariance_applicable,
            "worst_covariance_rel_err": if covariance_applicable { json!(worst_cov) } else { json!(null) },
            "pass": cov_ok,
        }),
    )?;
    println!(
        "mu: {count} fields, covariance rel err {worst_cov:.3e} [{}]",
        pass(cov_ok)
    );
    if cov_ok {
        Ok(())
    } else {
        Err(MzError::InvalidDomain("dilation covariance violated".into()))
    }
}

/// The decay-style commands pair t-blocks [2^k, 2^{k+1}) with frame pieces
/// at index j - k, so the t-range must reach every block the j window can
/// touch for the family band; the configured range is widened as needed
/// (per-octave resolution comes from the config).
fn tgrid_covering_j(
    cfg: &ExperimentConfig,
    frame: &LPFrame,
    band: (f64, f64),
    j_span: i64,
) -> Result<TGrid, MzError> {
    let (p0, p1) = frame.piece_range();
    let mut ell_lo = i64::MAX;
    let mut ell_hi = i64::MIN;
    for ell in p0..=p1 {
        let (slo, shi) = frame.piece_support(ell)?;
        if shi > band.0 && slo < band.1 {
            ell_lo = ell_lo.min(ell);
            ell_hi = ell_hi.max(ell);
        }
    }
    if ell_lo > ell_hi {
        return Err(MzError::BandNotCovered {
            lo: band.0,
            hi: band.1,
            cov_lo: 0.0,
            cov_hi: 0.0,
        });
    }
    let k_lo = -j_span - ell_hi;
    let k_hi = j_span - ell_lo + 1;
    let t_min = cfg.tgrid.t_min.min(2f64.powi(k_lo as i32));
    let t_max = cfg.tgrid.t_max.max(2f64.powi(k_hi as i32));
    TGrid::new(t_min, t_max, cfg.tgrid.per_octave)
}

// ---------------------------------------------------------------------------
// decay: mu_j tables + fits
// ---------------------------------------------------------------------------

fn run_decay(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let spec = cfg.build_operator_spec()?;
    let profile = cfg.build_profile()?;
    let frame = cfg.build_frame(&profile)?;
    let params = cfg.build_tl_params()?;
    let ann = RadialAnnulus::new(cfg.experiment.band_lo * 8.0, cfg.experiment.band_hi * 16.0)?;
    let tg = tgrid_covering_j(
        cfg,
        &frame,
        (ann.inner(), ann.outer()),
        cfg.experiment.j_span,
    )?;
    let fields: Vec<FamilyField> = (0..cfg.experiment.per_scale.clamp(2, 6))
        .map(|i| {
            Ok(FamilyField {
                field: synthesize_bandlimited(cfg.seed + i as u64, &ann, grid)?,
                seed: cfg.seed + i as u64,
                octave: 0,
            })
        })
        .collect::<Result<_, MzError>>()?;
    let j_range = (-cfg.experiment.j_span, cfg.experiment.j_span);
    let (table_rows, verdict) = decay_experiment(
        &spec,
        &params,
        &fields,
        &tg,
        &frame,
        j_range,
        cfg.experiment.thresholds.decay_delta_min,
    )?;
    let mut table = CsvTable::new(&["j", "norm"]);
    for &(j, v) in &table_rows.rows {
        table.push(vec![j.to_string(), fmt_f64(v)]);
    }
    table.write_to(&out.join("decay.csv"))?;
    merge_summary(
        out,
        "decay",
        json!({
            "delta_plus": verdict.fit.delta_plus,
            "delta_minus": verdict.fit.delta_minus,
            "delta_hat": verdict.fit.delta_hat,
            "positive_decay": verdict.positive_decay,
            "threshold": cfg.experiment.thresholds.decay_delta_min,
        }),
    )?;
    println!(
        "decay: delta+ {:.4}, delta- {:.4} [{}]",
        verdict.fit.delta_plus,
        verdict.fit.delta_minus,
        pass(verdict.positive_decay)
    );
    if verdict.positive_decay {
        Ok(())
    } else {
        Err(MzError::InvalidDomain("no positive geometric decay".into()))
    }
}

// ---------------------------------------------------------------------------
// bound: boundedness ratio experiment
// ---------------------------------------------------------------------------

fn run_bound(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let spec = cfg.build_operator_spec()?;
    let profile = cfg.build_profile()?;
    let frame = cfg.build_frame(&profile)?;
    let params = cfg.build_tl_params()?;
    let tg = cfg.build_tgrid()?;
    let family = field_family(
        grid,
        cfg.seed,
        cfg.experiment.per_scale,
        cfg.experiment.octaves,
        cfg.experiment.band_lo,
        cfg.experiment.band_hi,
    )?;
    let report = boundedness_experiment(&spec, &params, &family, &tg, &frame)?;
    let mut table = CsvTable::new(&["seed", "octave", "mu_norm", "tl_norm", "ratio"]);
    for row in &report.rows {
        table.push(vec![
            row.seed.to_string(),
            row.octave.to_string(),
            fmt_f64(row.mu_norm),
            fmt_f64(row.tl_norm),
            fmt_f64(row.ratio),
        ]);
    }
    table.write_to(&out.join("bound.csv"))?;
    let ok = report.spread < cfg.experiment.thresholds.bound_spread_max && !report.monotone_growth;
    merge_summary(
        out,
        "bound",
        json!({
            "spread": report.spread,
            "min": report.min,
            "max": report.max,
            "octave_means": report.octave_means,
            "monotone_growth": report.monotone_growth,
            "threshold": cfg.experiment.thresholds.bound_spread_max,
            "pass": ok,
        }),
    )?;
    println!(
        "bound: spread {:.4} over {} fields, monotone growth: {} [{}]",
        report.spread,
        report.rows.len(),
        report.monotone_growth,
        pass(ok)
    );
    if ok {
        Ok(())
    } else {
        Err(MzError::InvalidDomain(
            "boundedness ratios unstable across scales".into(),
        ))
    }
}

// ---------------------------------------------------------------------------
// llogl: clause-(iii) pipeline
// ---------------------------------------------------------------------------

fn run_llogl(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let grid = cfg.build_grid()?;
    let omega = cfg.build_kernel()?;
    let profile = cfg.build_profile()?;
    let frame = cfg.build_frame(&profile)?;
    let params = cfg.build_tl_params()?;
    let ann = RadialAnnulus::new(cfg.experiment.band_lo * 8.0, cfg.experiment.band_hi * 16.0)?;
    let tg = tgrid_covering_j(cfg, &frame, (ann.inner(), ann.outer()), 4)?;
    let fields: Vec<FamilyField> = (0..3)
        .map(|i| {
            Ok(FamilyField {
                field: synthesize_bandlimited(cfg.seed + i as u64, &ann, grid)?,
                seed: cfg.seed + i as u64,
                octave: 0,
            })
        })
        .collect::<Result<_, MzError>>()?;
    let weight = cfg.build_weight();
    let rho = cfg.operator.rho;
    let q = cfg.operator.q;
    let profile_for_spec = cfg.build_profile()?;
    let report = llogl_pipeline(
        &omega,
        |piece| OperatorSpec::new(piece, weight.clone(), profile_for_spec.clone(), rho, 0.0, q),
        &params,
        &fields,
        &tg,
        &frame,
        (-4, 4),
        cfg.experiment.thresholds.decay_delta_min,
    )?;
    let mut table = CsvTable::new(&["m", "l1", "delta_hat"]);
    for p in &report.pieces {
        table.push(vec![p.m.to_string(), fmt_f64(p.l1), fmt_f64(p.delta_hat)]);
    }
    table.write_to(&out.join("llogl.csv"))?;
    merge_summary(
        out,
        "llogl",
        json!({
            "lambda": report.lambda,
            "bound_report": report.bound_report,
            "llogl_norm": report.llogl_norm,
            "calibrated_c": report.calibrated_c,
            "reconstruction_residual": report.reconstruction_residual,
        }),
    )?;
    println!(
        "llogl: {} pieces, summability functional {:.4} (C = {:.3})",
        report.pieces.len(),
        report.bound_report,
        report.calibrated_c
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// exponents: theorem range and interpolation tables
// ---------------------------------------------------------------------------

fn run_exponents(cfg: &ExperimentConfig, out: &Path) -> Result<(), MzError> {
    let profile = cfg.build_profile()?;
    let c1 = profile.derivative_c1();
    let l2c0 = profile.log2_c0();
    let mut table = CsvTable::new(&["theorem", "clause", "p", "q", "alpha_lo", "alpha_hi"]);
    let mut count = 0usize;
    for theorem in [TheoremId::T11, TheoremId::T12, TheoremId::T13, TheoremId::T14] {
        for clause in [Clause::I, Clause::II, Clause::III] {
            for &p in &cfg.exponents.p_values {
                for &q in &cfg.exponents.q_values {
                    let params = TheoremParams {
                        theorem,
                        clause,
                        p,
                        q,
                        gamma: Some(cfg.exponents.gamma),
                        beta: Some(cfg.exponents.beta),
                        rho: cfg.operator.rho,
                        c1,
                        log2_c0: l2c0,
                    };
                    let range: AlphaRange = alpha_range(&params).map_err(|e| {
                        MzError::InvalidDomain(format!(
                            "{theorem:?} {clause:?} p={p} q={q}: {e}"
                        ))
                    })?;
                    table.push(vec![
                        format!("{theorem:?}"),
                        format!("{clause:?}"),
                        fmt_f64(p),
                        fmt_f64(q),
                        fmt_f64(range.lo),
                        fmt_f64(range.hi),
                    ]);
                    count += 1;
                }
            }
        }
    }
    table.write_to(&out.join("exponents.csv"))?;
    // gamma -> infinity limit: the full-generality clause (i) range
    // approaches the surface-theorem range
    let p = cfg.exponents.p_values[0];
    let q = cfg.exponents.q_values[0];
    let mk = |theorem, gamma| TheoremParams {
        theorem,
        clause: Clause::I,
        p,
        q,
        gamma,
        beta: None,
        rho: cfg.operator.rho,
        c1,
        log2_c0: l2c0,
    };
    let hi14 = alpha_range(&mk(TheoremId::T14, Some(1e3)))?.hi;
    let hi13 = alpha_range(&mk(TheoremId::T13, None))?.hi;
    let limit_gap = (hi14 - hi13).abs();
    let interp = interpolation_exponents(
        4.0,
        4.0,
        cfg.exponents.gamma.max(5.0),
        0.05,
        c1,
        l2c0,
        8.0,
        8.0,
    )?;
    merge_summary(
        out,
        "exponents",
        json!({
            "rows": count,
            "gamma_limit_gap": limit_gap,
            "interpolation_example": {
                "theta1": interp.theta1,
                "theta2": interp.theta2,
                "delta": interp.delta,
            },
        }),
    )?;
    println!(
        "exponents: {count} rows, gamma-limit gap {limit_gap:.2e}, theta1 {:.4}",
        interp.theta1
    );
    Ok(())
}

// ---------------------------------------------------------------------------
// report: aggregate summary.json into a readable digest
// ---------------------------------------------------------------------------

fn run_report(out: &Path) -> Result<(), MzError> {
    let path = out.join("summary.json");
    let text = std::fs::read_to_string(&path)
        .map_err(|e| MzError::Config(format!("cannot read {}: {e}", path.display())))?;
    let root: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| MzError::Config(e.to_string()))?;
    let rendered = render_summary(&root);
    print!("{rendered}");
    std::fs::write(out.join("report.txt"), rendered)?;
    Ok(())
}
