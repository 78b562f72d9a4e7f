//! `pcm`: config-driven front end for metasurface modeling.
//!
//! Subcommands: `unitcell` (reflection spectrum + conversion ratio),
//! `array` (bistatic pattern at one frequency), `reduce` (monostatic
//! reduction sweep), `lobes` (predicted vs. detected lobe table),
//! `optimize` (bandwidth search), `validate` (built-in oracle suite).
//! Exit codes: 0 success, 1 computation error, 2 usage/config error.

mod cache;
mod config;
mod output;
mod plot;
mod validate;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand};

use pcm_core::{
    far_field, find_peaks, mirror_spectrum, monostatic_reduction, optimize_design, paint_aperture,
    pcr, predict_lobes, scatter, Engine, Polarization, ReflectionSpectrum, UnitCellSolve,
};

use config::RunConfig;
use output::{config_hash, g9, CsvWriter, Manifest};

#[derive(Parser)]
#[command(
    name = "pcm",
    version,
    about = "Polarization-conversion metasurface modeling"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Run configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory (overrides the config's output_dir).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Spectrum cache directory.
    #[arg(long)]
    cache: Option<PathBuf>,
    /// Worker threads for independent frequency/direction evaluations.
    #[arg(long)]
    threads: Option<usize>,
    /// Seed for randomized components.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct FreqArgs {
    #[command(flatten)]
    common: CommonArgs,
    /// Evaluation frequency in GHz.
    #[arg(long)]
    freq: f64,
}

#[derive(Args)]
struct ValidateArgs {
    /// Output directory for the report.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one unit cell: spectrum CSV + conversion-ratio CSV.
    Unitcell(CommonArgs),
    /// Bistatic far-field pattern of the tiled aperture at --freq.
    Array(FreqArgs),
    /// Monostatic broadside reduction over the sweep band.
    Reduce(CommonArgs),
    /// Predicted vs. detected lobe table at --freq.
    Lobes(FreqArgs),
    /// Search the bounded design space for maximum conversion bandwidth.
    Optimize(CommonArgs),
    /// Run the built-in oracle/property suite.
    Validate(ValidateArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let run = || -> Result<()> {
        match &cli.command {
            Command::Unitcell(args) => cmd_unitcell(args),
            Command::Array(args) => cmd_array(args),
            Command::Reduce(args) => cmd_reduce(args),
            Command::Lobes(args) => cmd_lobes(args),
            Command::Optimize(args) => cmd_optimize(args),
            Command::Validate(args) => cmd_validate(args),
        }
    };
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if is_usage_error(&e) {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}

/// Usage/config problems exit 2; computation failures exit 1.
fn is_usage_error(e: &anyhow::Error) -> bool {
    let text = format!("{e:#}");
    text.contains("cannot read config")
        || text.contains("invalid config")
        || text.contains("missing the")
        || text.contains("unknown handedness")
}

fn setup(common: &CommonArgs) -> Result<(RunConfig, PathBuf, String)> {
    if let Some(n) = common.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .context("thread pool already configured")?;
    }
    let config = RunConfig::load(&common.config)?;
    let out_dir = common
        .out
        .clone()
        .or_else(|| config.output_dir.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("out"));
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;
    let hash = config_hash(&common.config)?;
    Ok((config, out_dir, hash))
}

fn solve_with_cache(
    config: &RunConfig,
    common: &CommonArgs,
) -> Result<(pcm_core::UnitCellGeometry, UnitCellSolve, String)> {
    let cell = config.cell()?;
    let solver = config.solver()?;
    let key = cache::solve_key(&cell, &solver)?;
    let (solve, hit) = cache::solve_cached(&cell, &solver, common.cache.as_deref())?;
    if hit {
        eprintln!("cache: hit for the current geometry + solver configuration");
    }
    for w in &solve.stats.warnings {
        eprintln!("warning: {w}");
    }
    Ok((cell, solve, key))
}

fn spectra_pair(solve: &UnitCellSolve) -> Result<(ReflectionSpectrum, ReflectionSpectrum)> {
    // The mirrored cell's spectrum is the exact mirror transform of the
    // unit cell's; deriving it avoids a second field solve.
    let unit = solve.spectrum.clone();
    let mirror = mirror_spectrum(&unit)?;
    Ok((unit, mirror))
}

fn cmd_unitcell(args: &CommonArgs) -> Result<()> {
    let (config, out_dir, hash) = setup(args)?;
    let (_, solve, solve_key) = solve_with_cache(&config, args)?;
    let mut manifest = Manifest::new("unitcell", "fdtd", hash, args.seed, args.threads);
    manifest.solve_key = Some(solve_key);
    manifest.warnings = solve.stats.warnings.clone();
    manifest.solver_stats = Some(solve.stats.clone());

    let mut spectrum_csv = CsvWriter::new(
        out_dir.join("spectrum.csv"),
        "freq_GHz,re_rxx,im_rxx,re_rxy,im_rxy,re_ryx,im_ryx,re_ryy,im_ryy,pcr_y",
    );
    let mut pcr_csv = CsvWriter::new(out_dir.join("pcr.csv"), "freq_GHz,pcr_x,pcr_y");
    let mut freqs = Vec::new();
    let (mut mag_xy, mut mag_yy, mut pcr_ys) = (Vec::new(), Vec::new(), Vec::new());
    for (f, j) in solve.spectrum.samples() {
        let pcr_y = pcr(j, Polarization::Y).unwrap_or(f64::NAN);
        let pcr_x = pcr(j, Polarization::X).unwrap_or(f64::NAN);
        spectrum_csv.row(&[
            g9(*f),
            g9(j.r_xx().re),
            g9(j.r_xx().im),
            g9(j.r_xy().re),
            g9(j.r_xy().im),
            g9(j.r_yx().re),
            g9(j.r_yx().im),
            g9(j.r_yy().re),
            g9(j.r_yy().im),
            g9(pcr_y),
        ]);
        pcr_csv.row(&[g9(*f), g9(pcr_x), g9(pcr_y)]);
        freqs.push(*f);
        mag_xy.push(j.r_xy().norm());
        mag_yy.push(j.r_yy().norm());
        pcr_ys.push(pcr_y);
    }
    manifest.record_output(&spectrum_csv.finish()?);
    manifest.record_output(&pcr_csv.finish()?);
    manifest.record_output(&plot::spectrum_plot(
        &out_dir, &freqs, &mag_xy, &mag_yy, &pcr_ys,
    )?);
    manifest.write(&out_dir)?;
    Ok(())
}

fn cmd_array(args: &FreqArgs) -> Result<()> {
    let (config, out_dir, hash) = setup(&args.common)?;
    let (cell, solve, solve_key) = solve_with_cache(&config, &args.common)?;
    let layout = config.layout(&cell)?;
    let (unit, mirror) = spectra_pair(&solve)?;
    let ap = paint_aperture(&layout, &unit, &mirror, args.freq, Polarization::Y)?;

    let thetas = scatter::default_theta_grid();
    let phis = scatter::default_phi_grid();
    // Rows are independent; split them across the pool and reassemble in
    // order so the output is identical at any thread count.
    use rayon::prelude::*;
    let rows: Vec<_> = thetas
        .par_iter()
        .map(|&theta| far_field(&ap, &[theta], &phis))
        .collect::<Result<Vec<_>, _>>()?;

    let mut manifest = Manifest::new("array", "fdtd", hash, args.common.seed, args.common.threads);
    manifest.solve_key = Some(solve_key);
    manifest.warnings = solve.stats.warnings.clone();
    manifest.solver_stats = Some(solve.stats.clone());
    let mut csv = CsvWriter::new(
        out_dir.join("pattern.csv"),
        "theta_deg,phi_deg,sigma_dbsm,re_co,im_co,re_cross,im_cross",
    );
    for (it, row) in rows.iter().enumerate() {
        for (ip, &phi) in phis.iter().enumerate() {
            let (co, cross) = row.amplitudes(0, ip);
            csv.row(&[
                g9(thetas[it]),
                g9(phi),
                g9(row.sigma(0, ip)),
                g9(co.re),
                g9(co.im),
                g9(cross.re),
                g9(cross.im),
            ]);
        }
    }
    manifest.record_output(&csv.finish()?);
    manifest.write(&out_dir)?;
    Ok(())
}

fn cmd_reduce(args: &CommonArgs) -> Result<()> {
    let (config, out_dir, hash) = setup(args)?;
    let (cell, solve, solve_key) = solve_with_cache(&config, args)?;
    let layout = config.layout(&cell)?;
    let sweep = config.sweep()?.clone();
    let (unit, mirror) = spectra_pair(&solve)?;

    // Frequency points are independent; evaluate them in parallel and keep
    // the natural order.
    use rayon::prelude::*;
    let freqs: Vec<f64> = if sweep.n_freq <= 1 {
        vec![sweep.band_ghz.0]
    } else {
        let step = (sweep.band_ghz.1 - sweep.band_ghz.0) / (sweep.n_freq - 1) as f64;
        (0..sweep.n_freq)
            .map(|i| sweep.band_ghz.0 + i as f64 * step)
            .collect()
    };
    let samples: Vec<_> = freqs
        .par_iter()
        .map(|&f| monostatic_reduction(&layout, &unit, &mirror, (f, f), 1).map(|v| v[0]))
        .collect::<Result<Vec<_>, _>>()?;

    let mut manifest = Manifest::new("reduce", "fdtd", hash, args.seed, args.threads);
    manifest.solve_key = Some(solve_key);
    manifest.warnings = solve.stats.warnings.clone();
    manifest.solver_stats = Some(solve.stats.clone());
    let mut csv = CsvWriter::new(
        out_dir.join("reduction.csv"),
        "freq_GHz,sigma_layout_dbsm,sigma_pec_dbsm,delta_db",
    );
    let mut deltas = Vec::new();
    for s in &samples {
        csv.row(&[
            g9(s.freq_ghz),
            g9(s.sigma_layout_dbsm),
            g9(s.sigma_pec_dbsm),
            g9(s.delta_db),
        ]);
        deltas.push(s.delta_db);
    }
    manifest.record_output(&csv.finish()?);
    manifest.record_output(&plot::reduction_plot(&out_dir, &freqs, &deltas)?);
    manifest.write(&out_dir)?;
    Ok(())
}

fn cmd_lobes(args: &FreqArgs) -> Result<()> {
    let (config, out_dir, hash) = setup(&args.common)?;
    let (cell, solve, solve_key) = solve_with_cache(&config, &args.common)?;
    let layout = config.layout(&cell)?;
    let (unit, mirror) = spectra_pair(&solve)?;
    let ap = paint_aperture(&layout, &unit, &mirror, args.freq, Polarization::Y)?;
    let pattern = far_field(
        &ap,
        &scatter::default_theta_grid(),
        &scatter::default_phi_grid(),
    )?;
    let peaks = find_peaks(&pattern, 3.0);
    let predicted = predict_lobes(layout.tile_pitch_mm, args.freq);

    let mut manifest = Manifest::new("lobes", "fdtd", hash, args.common.seed, args.common.threads);
    manifest.solve_key = Some(solve_key);
    manifest.warnings = solve.stats.warnings.clone();
    let mut csv = CsvWriter::new(
        out_dir.join("lobes.csv"),
        "kind,theta_deg,phi_deg,sigma_dbsm",
    );
    for (theta, phi) in &predicted {
        csv.row(&["predicted".into(), g9(*theta), g9(*phi), String::new()]);
    }
    for p in peaks.iter().take(8) {
        csv.row(&[
            "found".into(),
            g9(p.theta_deg),
            g9(p.phi_deg),
            g9(p.sigma_dbsm),
        ]);
    }
    manifest.record_output(&csv.finish()?);
    manifest.write(&out_dir)?;
    Ok(())
}

fn cmd_optimize(args: &CommonArgs) -> Result<()> {
    let (config, out_dir, hash) = setup(args)?;
    let block = config.optimize_block()?.clone();
    let stack = config.stack()?;
    let engine = match block.engine.as_str() {
        "sheet_model" | "tl_model" => Engine::TlModel,
        "solver" => Engine::Solver(config.solver()?),
        other => {
            return Err(anyhow!(
                "config is missing the engine: unknown engine {other:?}"
            ))
        }
    };
    let start = block.start_vector();
    let result = optimize_design(
        &block.bounds(),
        &stack.substrate,
        block.band_ghz,
        block.n_freq,
        block.threshold,
        block.budget,
        &engine,
        args.seed,
        start.as_ref(),
    )?;

    let mode = match engine {
        Engine::TlModel => "sheet_model",
        Engine::Solver(_) => "fdtd",
    };
    let mut manifest = Manifest::new("optimize", mode, hash, args.seed, args.threads);
    let mut csv = CsvWriter::new(
        out_dir.join("trace.csv"),
        "iteration,major_axis_mm,minor_axis_mm,period_mm,h_mm,bandwidth",
    );
    for entry in &result.trace {
        csv.row(&[
            entry.eval.to_string(),
            g9(entry.x[0]),
            g9(entry.x[1]),
            g9(entry.x[2]),
            g9(entry.x[3]),
            entry.value.map(g9).unwrap_or_else(|| "nan".into()),
        ]);
    }
    manifest.record_output(&csv.finish()?);
    let best_path = out_dir.join("best.json");
    let best = serde_json::json!({
        "design": result.best,
        "bandwidth": result.bandwidth,
        "evaluations": result.evaluations,
        "threshold": block.threshold,
        "band_ghz": block.band_ghz,
    });
    std::fs::write(
        &best_path,
        format!("{}\n", serde_json::to_string_pretty(&best)?),
    )?;
    manifest.record_output(&best_path);
    manifest.write(&out_dir)?;
    println!(
        "best design: major {:.4} mm, minor {:.4} mm, period {:.4} mm, h {:.4} mm -> bandwidth {:.4}",
        result.best.major_axis_mm,
        result.best.minor_axis_mm,
        result.best.period_mm,
        result.best.h_mm,
        result.bandwidth
    );
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<()> {
    std::fs::create_dir_all(&args.out)?;
    let results = validate::run_all();
    let mut csv = CsvWriter::new(args.out.join("validate_report.csv"), "check,status,detail");
    let mut failures = 0usize;
    for r in &results {
        let status = if r.passed { "ok" } else { "FAIL" };
        println!(
            "{status:4} {name}: {detail}",
            name = r.name,
            detail = r.detail
        );
        csv.row(&[r.name.into(), status.into(), r.detail.replace(',', ";")]);
        if !r.passed {
            failures += 1;
        }
    }
    let mut manifest = Manifest::new("validate", "builtin", "none".into(), 0, None);
    manifest.record_output(&csv.finish()?);
    manifest.write(&args.out)?;
    println!("{} checks, {} failed", results.len(), failures);
    if failures > 0 {
        return Err(anyhow!("{failures} validation checks failed"));
    }
    Ok(())
}
