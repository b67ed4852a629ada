use std::io::Write;
use std::path::Path;

use piterbarg::gp_sim::{sample_fbm, sample_vector_paths, CorrelationModel, SimulationMesh, VectorProcessSpec};
use piterbarg::harness::{
    convergence_sweep, export_report, import_report, run_experiment_with, ReportFormat,
};
use piterbarg::pickands::{
    default_mesh, write_constants_csv, ConstantEstimate, FieldBatch, FieldParams, Support,
};
use piterbarg::Error;

use crate::config::RunConfigFile;
use crate::plot::{cdf_plot, distance_plot};
use crate::{ConstantsArgs, Failure, KindArg, PlotArgs, ReportArgs, SimulateArgs, VerifyArgs};

fn write_out(out: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    match out {
        Some(p) => std::fs::write(p, bytes)?,
        None => {
            let mut so = std::io::stdout().lock();
            so.write_all(bytes)?;
            so.flush()?;
        }
    }
    Ok(())
}

fn parse_lattice(spec: &str) -> Result<Vec<f64>, Failure> {
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Failure::Usage(format!("bad --offsets-lattice {spec:?}, expected lo:hi:step")))?;
    let [lo, hi, step] = parts[..] else {
        return Err(Failure::Usage(format!("bad --offsets-lattice {spec:?}, expected lo:hi:step")));
    };
    if !(step > 0.0) || hi < lo {
        return Err(Failure::Usage("offsets lattice needs step > 0 and hi >= lo".into()));
    }
    let n = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..n).map(|i| lo + i as f64 * step).collect())
}

pub fn constants(a: &ConstantsArgs) -> Result<(), Failure> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Failure::Usage(format!("--{name} is required for --kind {:?}", a.kind)))
    };
    let (mut lambda, mut mesh, mut reps, mut seed) = (a.lambda, a.mesh, a.reps, a.seed);
    if let Some(path) = &a.config {
        let est = RunConfigFile::load(path)?.estimation;
        lambda = est.lambda;
        reps = est.reps;
        seed = est.seed;
        mesh = est.mesh.or(mesh);
    }
    let spacings: Vec<f64> = match a.kind {
        KindArg::H => vec![],
        KindArg::HD | KindArg::HXy => vec![need(a.d1, "d1")?],
        KindArg::HD1D2 | KindArg::HXZ1Z2 => vec![need(a.d1, "d1")?, need(a.d2, "d2")?],
    };
    if a.offsets_lattice.is_some() && matches!(a.kind, KindArg::H | KindArg::HD) {
        return Err(Failure::Usage("--offsets-lattice needs a kind with offsets".into()));
    }
    let firsts = match &a.offsets_lattice {
        Some(s) => parse_lattice(s)?,
        None => vec![if a.kind == KindArg::HD1D2 { a.z1 } else { a.x }],
    };
    let params = FieldParams::new(
        a.alpha,
        lambda,
        mesh.unwrap_or_else(|| default_mesh(&spacings)),
        reps,
        seed,
    );
    let supports: Vec<Support> = spacings.iter().map(|&d| Support::Grid(d)).collect();
    let batch = FieldBatch::sample(params, &supports)?;
    let rows = firsts
        .iter()
        .map(|&w| -> Result<ConstantEstimate, Error> {
            match a.kind {
                KindArg::H => batch.h_alpha(),
                KindArg::HD => batch.h_d(spacings[0]),
                KindArg::HXy => batch.h_xy(spacings[0], w, a.z1),
                KindArg::HD1D2 => batch.h_d1d2(spacings[0], spacings[1], w, a.z2),
                KindArg::HXZ1Z2 => batch.h_x_z1z2(spacings[0], spacings[1], w, a.z1, a.z2),
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut buf = Vec::new();
    write_constants_csv(&mut buf, &rows)?;
    write_out(a.out.as_deref(), &buf)
}

pub fn simulate(a: &SimulateArgs) -> Result<(), Failure> {
    let mesh = SimulationMesh::covering(a.horizon, a.mesh)?;
    let batch = if a.fbm {
        sample_fbm(a.alpha / 2.0, &mesh, a.reps, a.seed)?
    } else {
        let model = CorrelationModel::new(a.alpha, a.c, 0.0)?;
        let spec = VectorProcessSpec::independent(model, a.p.max(1), a.horizon)?;
        sample_vector_paths(&spec, &mesh, a.reps, a.seed)?
    };
    let mut buf = Vec::new();
    batch.write_csv(&mut buf)?;
    write_out(a.out.as_deref(), &buf)
}

pub fn verify(a: &VerifyArgs, sweep: bool) -> Result<(), Failure> {
    let file = RunConfigFile::load(&a.config)?;
    let cfg = file.experiment_config()?;
    if sweep && cfg.t_values.len() < 3 {
        return Err(Error::Precondition(format!(
            "a sweep needs at least 3 horizons, got {}",
            cfg.t_values.len()
        ))
        .into());
    }
    if a.dry_run {
        println!("config ok: hash={} horizons={} reps={}", cfg.hash(), cfg.t_values.len(), cfg.reps);
        return Ok(());
    }
    let progress = |t: f64, secs: f64| eprintln!("T={t} done in {secs:.1}s");
    let (report, sweep_verdict) = if sweep {
        let r = convergence_sweep(&cfg)?;
        let verdict = (!r.accepted).then(|| {
            format!("sweep rejected: distances {:?}, threshold {}", r.distances, r.threshold)
        });
        (r.report, verdict)
    } else {
        (run_experiment_with(&cfg, progress)?, None)
    };
    for h in &report.horizons {
        println!("T={} sup_dist={} reps={}", h.t, h.sup_distance, h.reps);
    }
    let dir = a.out_dir.clone().unwrap_or_else(|| file.output.dir.clone());
    std::fs::create_dir_all(&dir)?;
    for fmt in &file.output.formats {
        let name = match fmt {
            ReportFormat::Csv => "report.csv",
            ReportFormat::Json => "report.json",
        };
        export_report(&report, *fmt, &dir.join(name))?;
    }
    if file.output.plots {
        write_plots(&report, &dir)?;
    }
    let mut failures = report.acceptance_failures();
    failures.extend(sweep_verdict);
    if failures.is_empty() {
        Ok(())
    } else {
        Err(Failure::Acceptance(failures))
    }
}

fn load_any(path: &Path) -> Result<piterbarg::harness::ComparisonReport, Failure> {
    let fmt = ReportFormat::from_path(path)
        .ok_or_else(|| Failure::Usage(format!("{}: expected .csv or .json", path.display())))?;
    import_report(path, fmt).map_err(|e| match e {
        Error::Io(io) => Failure::Lib(Error::Io(io)),
        Error::MalformedReport(m) => Failure::Lib(Error::MalformedReport(m)),
        other => Failure::Lib(Error::MalformedReport(other.to_string())),
    })
}

fn write_plots(report: &piterbarg::harness::ComparisonReport, dir: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join("cdf_slices.svg"), cdf_plot(report))?;
    std::fs::write(dir.join("distance_vs_lnT.svg"), distance_plot(report))?;
    Ok(())
}

pub fn plot(a: &PlotArgs) -> Result<(), Failure> {
    let report = load_any(&a.report)?;
    if report.horizons.is_empty() {
        return Err(Error::MalformedReport("report has no horizons".into()).into());
    }
    write_plots(&report, &a.out)
}

pub fn report(a: &ReportArgs) -> Result<(), Failure> {
    let report = load_any(&a.report)?;
    let fmt = match a.format.as_deref() {
        Some("csv") => ReportFormat::Csv,
        Some(_) => ReportFormat::Json,
        None => ReportFormat::from_path(&a.report).unwrap_or(ReportFormat::Json),
    };
    let text = piterbarg::harness::render_report(&report, fmt)?;
    write_out(a.out.as_deref(), text.as_bytes())
}
