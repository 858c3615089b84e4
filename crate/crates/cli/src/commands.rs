//! The four batch commands. Each one computes a report from a validated
//! [`RunConfig`] and a writer serialises it; nothing here touches the
//! filesystem.

use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;
use wavescat::dispersion::exceptional_wavenumbers;
use wavescat::scattering::{
    amplitudes, classify_regime, field_map, mode_injection, transmission_grid, Amplitudes, FieldOptions, FieldSource,
    Regime,
};
use wavescat::Error;

use crate::config::{FieldConfig, RunConfig, Wavenumbers};
use crate::output::{
    fmt_f64, write_comment, write_header, write_record, DeltaRow, EpReport, EpRow, FieldReport, FieldRow, KeyedDelta,
    RegimeRow, RegimeTable, ResultRow, RunMetadata, RunStatus, ScatterReport, ScatterRun,
};

fn refs_for(regime: Regime) -> Vec<&'static str> {
    let mut refs = vec![
        "amplitude-assembly",
        "kernel-mode-sum",
        "per-mode-fabry-perot",
        "wall-mirror-term",
    ];
    match regime {
        Regime::Empty => refs.push("empty-guide-cancellation"),
        Regime::Exceptional => refs.push("exceptional-limit"),
        _ => {}
    }
    refs
}

fn deltas_of(a: &Amplitudes) -> Vec<DeltaRow> {
    [("R", &a.r), ("T", &a.t)]
        .into_iter()
        .map(|(name, amp)| DeltaRow {
            amplitude: name,
            angle_deg: amp.theta_sing.to_degrees(),
            coeff_re: amp.delta_coeff.re,
            coeff_im: amp.delta_coeff.im,
        })
        .collect()
}

fn rows_of(a: &Amplitudes) -> Vec<ResultRow> {
    a.t.theta
        .iter()
        .zip(a.r.smooth.iter().zip(&a.t.smooth))
        .map(|(&th, (&r, &t))| ResultRow::new(th.to_degrees(), r, t))
        .collect()
}

/// Amplitudes at one wavenumber. A truncation failure on the whole grid
/// falls back to angle-by-angle evaluation so converged angles survive.
fn scatter_at(cfg: &RunConfig, k: f64) -> ScatterRun {
    let report = classify_regime(k, &cfg.spec);
    let mut run = ScatterRun {
        metadata: RunMetadata {
            k,
            regime: report.regime.as_str(),
            n_star: report.n_star,
            exceptional: report.exceptional_mode.is_some(),
            truncation_used: 0,
            paper_refs: refs_for(report.regime),
        },
        status: RunStatus::Ok,
        failures: 0,
        message: None,
        rows: Vec::new(),
        deltas: Vec::new(),
    };
    let setup = cfg.incidence(k).and_then(|inc| {
        Ok((
            inc,
            transmission_grid(cfg.side, cfg.theta_points, cfg.exclusion_band_deg)?,
        ))
    });
    let (inc, grid) = match setup {
        Ok(s) => s,
        Err(e) => {
            run.status = RunStatus::Failed;
            run.message = Some(e.to_string());
            return run;
        }
    };
    match amplitudes(&inc, &cfg.spec, &grid, &cfg.kernel) {
        Ok(a) => {
            run.metadata.truncation_used = a.modes_used;
            run.rows = rows_of(&a);
            run.deltas = deltas_of(&a);
        }
        Err(first @ Error::Truncation { .. }) => {
            let nan = Complex64::new(f64::NAN, f64::NAN);
            for &th in &grid {
                match amplitudes(&inc, &cfg.spec, &[th], &cfg.kernel) {
                    Ok(a) => {
                        run.metadata.truncation_used = run.metadata.truncation_used.max(a.modes_used);
                        if run.deltas.is_empty() {
                            run.deltas = deltas_of(&a);
                        }
                        run.rows.extend(rows_of(&a));
                    }
                    Err(_) => {
                        run.failures += 1;
                        run.rows.push(ResultRow::new(th.to_degrees(), nan, nan));
                    }
                }
            }
            if run.failures > 0 {
                run.status = RunStatus::Partial;
                run.message = Some(first.to_string());
            }
            if run.failures == grid.len() {
                run.status = RunStatus::Failed;
            }
        }
        Err(e) => {
            run.status = RunStatus::Failed;
            run.message = Some(e.to_string());
        }
    }
    run
}

/// Scattering amplitudes for every wavenumber of the run, in sweep order.
pub fn run_scatter(cfg: &RunConfig) -> ScatterReport {
    let runs = cfg
        .wavenumbers
        .values()
        .par_iter()
        .map(|&k| scatter_at(cfg, k))
        .collect();
    ScatterReport {
        command: "scatter",
        config_sha256: cfg.hash.clone(),
        runs,
    }
}

/// Exceptional wavenumbers in `(k_min, k_max]` with their injection
/// multipliers. Complex potentials have none.
pub fn run_ep_report(cfg: &RunConfig) -> Result<EpReport, String> {
    let Wavenumbers::Sweep { min, max, .. } = cfg.wavenumbers else {
        return Err("ep-report needs a k sweep (incidence.k_min, incidence.k_max, incidence.k_steps)".into());
    };
    let spec = &cfg.spec;
    let eps = if spec.v0().im == 0.0 {
        exceptional_wavenumbers(min, max, spec.b(), spec.v0().re)
    } else {
        Vec::new()
    };
    let rows = eps
        .par_iter()
        .map(|&(k, n)| {
            let inj = mode_injection(n, k, spec).map_err(|e| format!("k = {k}, n = {n}: {e}"))?;
            let varpi = spec.mode(n, k).varpi();
            Ok(EpRow {
                k,
                n,
                varpi_re: varpi.re,
                varpi_im: varpi.im,
                multiplier_re: inj.transmission.re,
                multiplier_im: inj.transmission.im,
                reflection_re: inj.reflection.re,
                reflection_im: inj.reflection.im,
                regime: classify_regime(k, spec).regime.as_str(),
            })
        })
        .collect::<Result<Vec<_>, String>>()?;
    Ok(EpReport {
        command: "ep-report",
        config_sha256: cfg.hash.clone(),
        k_min: min,
        k_max: max,
        rows,
    })
}

/// Regime classification for every wavenumber of the run.
pub fn run_regimes(cfg: &RunConfig) -> RegimeTable {
    let rows = cfg
        .wavenumbers
        .values()
        .into_iter()
        .map(|k| {
            let r = classify_regime(k, &cfg.spec);
            RegimeRow {
                k,
                regime: r.regime.as_str(),
                n_star: r.n_star,
                eta: r.eta,
                min_evanescent_decay: r.min_evanescent_decay,
                exceptional_mode: r.exceptional_mode,
                filter_margin: r.filter_margin,
                length_ratio: r.length_ratio,
            }
        })
        .collect();
    RegimeTable {
        command: "regimes",
        config_sha256: cfg.hash.clone(),
        rows,
    }
}

/// Field map of the plane-wave problem at wavenumber `k`.
pub fn run_field(cfg: &RunConfig, field: &FieldConfig, k: f64) -> Result<FieldReport, Error> {
    let inc = cfg.incidence(k)?;
    let opts = FieldOptions {
        modes: field.modes,
        ..FieldOptions::default()
    };
    let map = field_map(
        FieldSource::Plane(inc),
        &cfg.spec,
        &field.region,
        field.nx,
        field.ny,
        &opts,
    )?;
    let rows = (0..field.nx)
        .flat_map(|ix| (0..field.ny).map(move |iy| (ix, iy)))
        .map(|(ix, iy)| FieldRow::new(map.x[ix], map.y[iy], map.get(ix, iy)))
        .collect();
    Ok(FieldReport {
        command: "field",
        config_sha256: cfg.hash.clone(),
        k,
        theta0_deg: cfg.theta0_deg,
        modes: field.modes,
        nx: field.nx,
        ny: field.ny,
        failures: map.failures,
        truncation_bound: map.truncation_bound,
        rows,
    })
}

fn invalid(msg: String) -> io::Error {
    io::Error::new(io::ErrorKind::InvalidData, msg)
}

/// Scatter report as CSV. Deltas go to `deltas` when given, otherwise they
/// are written inline as `# delta ...` comments after each run.
pub fn write_scatter_csv<W: Write + ?Sized>(
    out: &mut W,
    report: &ScatterReport,
    deltas: Option<&mut dyn Write>,
) -> io::Result<()> {
    write_comment(out, "command", report.command)?;
    write_comment(out, "config_sha256", &report.config_sha256)?;
    write_header::<_, ResultRow>(out)?;
    for run in &report.runs {
        let m = &run.metadata;
        write_comment(out, "k", fmt_f64(m.k))?;
        write_comment(out, "regime", m.regime)?;
        write_comment(out, "n_star", m.n_star)?;
        write_comment(out, "exceptional", m.exceptional)?;
        write_comment(out, "truncation_used", m.truncation_used)?;
        write_comment(out, "paper_refs", m.paper_refs.join(";"))?;
        write_comment(out, "status", run.status.as_str())?;
        write_comment(out, "failures", run.failures)?;
        if let Some(msg) = &run.message {
            write_comment(out, "message", msg)?;
        }
        for row in &run.rows {
            if !row.is_consistent() {
                return Err(invalid(format!("inconsistent |·|² at theta_deg = {}", row.theta_deg)));
            }
            write_record(out, row)?;
        }
        if deltas.is_none() {
            for d in &run.deltas {
                writeln!(
                    out,
                    "# delta amplitude={} angle_deg={} coeff_re={} coeff_im={}",
                    d.amplitude,
                    fmt_f64(d.angle_deg),
                    fmt_f64(d.coeff_re),
                    fmt_f64(d.coeff_im)
                )?;
            }
        }
    }
    if let Some(side) = deltas {
        write_header::<_, KeyedDelta>(side)?;
        for run in &report.runs {
            for d in &run.deltas {
                write_record(
                    side,
                    &KeyedDelta {
                        k: run.metadata.k,
                        delta: d,
                    },
                )?;
            }
        }
    }
    Ok(())
}

pub fn write_ep_csv<W: Write + ?Sized>(out: &mut W, report: &EpReport) -> io::Result<()> {
    write_comment(out, "command", report.command)?;
    write_comment(out, "config_sha256", &report.config_sha256)?;
    write_comment(
        out,
        "k_range",
        format!("({}, {}]", fmt_f64(report.k_min), fmt_f64(report.k_max)),
    )?;
    write_header::<_, EpRow>(out)?;
    report.rows.iter().try_for_each(|r| write_record(out, r))
}

pub fn write_regimes_csv<W: Write + ?Sized>(out: &mut W, table: &RegimeTable) -> io::Result<()> {
    write_comment(out, "command", table.command)?;
    write_comment(out, "config_sha256", &table.config_sha256)?;
    write_header::<_, RegimeRow>(out)?;
    table.rows.iter().try_for_each(|r| write_record(out, r))
}

pub fn write_field_csv<W: Write + ?Sized>(out: &mut W, report: &FieldReport) -> io::Result<()> {
    write_comment(out, "command", report.command)?;
    write_comment(out, "config_sha256", &report.config_sha256)?;
    write_comment(out, "k", fmt_f64(report.k))?;
    write_comment(out, "theta0_deg", fmt_f64(report.theta0_deg))?;
    write_comment(out, "modes", report.modes)?;
    write_comment(out, "grid", format!("{}x{}", report.nx, report.ny))?;
    write_comment(out, "failures", report.failures)?;
    write_comment(out, "truncation_bound", fmt_f64(report.truncation_bound))?;
    write_header::<_, FieldRow>(out)?;
    report.rows.iter().try_for_each(|r| write_record(out, r))
}
