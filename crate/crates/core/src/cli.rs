//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 for invalid input (bad flags, configuration or
//! parameters), 2 when a computation fails on valid input (non-finite values,
//! too few resolved points, I/O). Diagnostics go to standard error.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::apriori::{apriori_probe_with, line_ids, AprioriReport, ProbeConfig};
use crate::certificate::{certified_blowup_time, compute_constants, CertificateBundle};
use crate::data::Family;
use crate::error::Error;
use crate::grid::CharacteristicGrid;
use crate::io::{
    json_summary, parse_list, parse_number, parse_overrides, plot_csv, read_records,
    records_to_csv, ConfigOverrides, RunConfig,
};
use crate::lifespan::{compare, fit_power_law, sweep, Comparison, FitResult, MeanClass};
use crate::norms::{level_norms, NormKind};
use crate::params::{Form, Params};
use crate::solver::{
    march_with, picard_solve, BlowupEvent, LifespanOptions, MarchOptions, PicardMode, RunStatus,
    DEFAULT_CAP,
};

#[derive(Debug, Parser)]
#[command(
    name = "wavelab",
    version,
    about = "Lifespan experiments for u_tt - u_xx = A|u_t|^p + B|u|^q"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Command,
}

fn number(s: &str) -> Result<f64, String> {
    parse_number(s)
}

fn family(s: &str) -> Result<Family, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn form(s: &str) -> Result<Form, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn mean(s: &str) -> Result<MeanClass, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flags mirroring the configuration keys; they override `--config`.
#[derive(Debug, Clone, Default, Args)]
struct ConfigArgs {
    /// configuration file with `key = value` lines
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    p: Option<f64>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    q: Option<f64>,
    #[arg(long = "A", value_parser = number, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long = "B", value_parser = number, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    eps: Option<f64>,
    /// comma-separated, strictly decreasing
    #[arg(long = "eps-ladder", allow_hyphen_values = true)]
    eps_ladder: Option<String>,
    #[arg(long = "R", value_parser = number, allow_hyphen_values = true)]
    r: Option<f64>,
    /// bumpf_zerog | zerof_bumpg | bumpf_dipoleg
    #[arg(long, value_parser = family)]
    family: Option<Family>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    amplitude: Option<f64>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    h: Option<f64>,
    #[arg(long, value_parser = number, allow_hyphen_values = true)]
    threshold: Option<f64>,
    /// absolute | signed
    #[arg(long, value_parser = form)]
    form: Option<Form>,
    /// zero | nonzero
    #[arg(long = "mean", alias = "mean-class", value_parser = mean)]
    mean: Option<MeanClass>,
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SolveMode {
    March,
    Picard,
    PicardZero,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lifespan exponents: predicted, naive minimum and general theory.
    Predict {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// also show the uncorrected general-theory comparison
        #[arg(long)]
        superseded: bool,
        #[arg(long)]
        json: bool,
    },
    /// One run of the marcher or of the Picard iteration.
    Solve {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long = "t-max", value_parser = number, default_value = "10")]
        t_max: f64,
        #[arg(long, value_enum, default_value = "march")]
        mode: SolveMode,
        #[arg(long = "j-max", default_value_t = 60)]
        j_max: usize,
        #[arg(long, value_parser = number, default_value = "1e-10")]
        tol: f64,
    },
    /// Blow-up times over a ladder of amplitudes, as CSV.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// largest horizon searched
        #[arg(long, value_parser = number, default_value_t = DEFAULT_CAP)]
        cap: f64,
        #[arg(long = "rel-tol", value_parser = number, default_value = "0.05")]
        rel_tol: f64,
        /// CSV destination (default: sweep.csv in --out-dir, else stdout)
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Power-law fit of a sweep CSV.
    Fit {
        /// sweep CSV, `-` for standard input
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        /// relative tolerance on the exponent for the verdict
        #[arg(long, value_parser = number, default_value = "0.15")]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Certified blow-up bounds as JSON.
    Certify {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Empirical check of the weighted a-priori estimates.
    VerifyApriori {
        /// line or inequality id, or `all`
        #[arg(long, default_value = "all")]
        id: String,
        #[arg(long, default_value_t = 20)]
        trials: usize,
        #[arg(long = "t-ladder", default_value = "4,8,16")]
        t_ladder: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_parser = number, default_value = "3")]
        p: f64,
        #[arg(long, value_parser = number, default_value = "4")]
        q: f64,
        #[arg(long, default_value_t = 64)]
        levels: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verdict table for a sweep CSV against the predicted exponents.
    Report {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, value_parser = number, default_value = "0.15")]
        tol: f64,
        /// destination of the (log eps, log T) columns
        #[arg(long = "plot-out")]
        plot_out: Option<PathBuf>,
    },
}

/// Error with the exit code it maps to.
#[derive(Debug)]
enum Failure {
    Invalid(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_runtime() {
            Failure::Runtime(e.to_string())
        } else {
            Failure::Invalid(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

impl ConfigArgs {
    fn overrides(&self) -> CliResult<ConfigOverrides> {
        let file = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))?;
                parse_overrides(&text)?
            }
            None => ConfigOverrides::default(),
        };
        let eps_ladder = match &self.eps_ladder {
            Some(s) => {
                Some(parse_list(s).map_err(|m| Failure::Invalid(format!("--eps-ladder: {m}")))?)
            }
            None => None,
        };
        let flags = ConfigOverrides {
            p: self.p,
            q: self.q,
            a: self.a,
            b: self.b,
            eps: self.eps,
            eps_ladder,
            r: self.r,
            family: self.family,
            amplitude: self.amplitude,
            h: self.h,
            threshold: self.threshold,
            form: self.form,
            mean_class: self.mean,
            out_dir: self.out_dir.clone(),
            seed: self.seed,
        };
        Ok(file.merge(flags))
    }

    fn resolve(&self) -> CliResult<RunConfig> {
        Ok(RunConfig::from_overrides(self.overrides()?)?)
    }
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(cli.cmd, out, err) {
        Ok(code) => code,
        Err(Failure::Invalid(m)) => {
            let _ = writeln!(err, "error: {m}");
            1
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(err, "error: {m}");
            2
        }
    }
}

fn write_file(path: &Path, contents: &str) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(path, contents)?;
    Ok(())
}

fn read_input(path: &Path) -> CliResult<String> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s)?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
    }
}

/// Writes to `path`, or to `dir/name`, or else to `out`.
fn emit(
    text: &str,
    path: Option<&Path>,
    dir: Option<&Path>,
    name: &str,
    out: &mut dyn Write,
) -> CliResult<Option<PathBuf>> {
    let target = path
        .map(Path::to_path_buf)
        .or_else(|| dir.map(|d| d.join(name)));
    match target {
        Some(p) => {
            write_file(&p, text)?;
            Ok(Some(p))
        }
        None => {
            out.write_all(text.as_bytes())?;
            Ok(None)
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult<i32> {
    match cmd {
        Command::Predict {
            cfg,
            superseded,
            json,
        } => predict(&cfg, superseded, json, out),
        Command::Solve {
            cfg,
            t_max,
            mode,
            j_max,
            tol,
        } => solve(&cfg, t_max, mode, j_max, tol, out, err),
        Command::Sweep {
            cfg,
            cap,
            rel_tol,
            out: path,
        } => run_sweep(&cfg, cap, rel_tol, path.as_deref(), out, err),
        Command::Fit {
            input,
            cfg,
            tol,
            out: path,
        } => fit(&input, &cfg, tol, path.as_deref(), out),
        Command::Certify { cfg } => certify(&cfg, out),
        Command::VerifyApriori {
            id,
            trials,
            t_ladder,
            seed,
            p,
            q,
            levels,
            out: path,
        } => {
            let ladder =
                parse_list(&t_ladder).map_err(|m| Failure::Invalid(format!("--t-ladder: {m}")))?;
            let probe = ProbeConfig {
                p,
                q,
                levels,
                ..ProbeConfig::default()
            };
            verify_apriori(&id, trials, &ladder, seed, &probe, path.as_deref(), out)
        }
        Command::Report {
            input,
            cfg,
            tol,
            plot_out,
        } => report(&input, &cfg, tol, plot_out.as_deref(), out),
    }
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn mean_for(o: &ConfigOverrides) -> CliResult<MeanClass> {
    if let Some(m) = o.mean_class {
        return Ok(m);
    }
    let family = o.family.unwrap_or(Family::BumpFZeroG);
    let data = crate::data::make_data(family, o.r.unwrap_or(1.0), o.amplitude.unwrap_or(1.0))?;
    Ok(data.mean_class())
}

fn predict(cfg: &ConfigArgs, superseded: bool, json: bool, out: &mut dyn Write) -> CliResult<i32> {
    let o = cfg.overrides()?;
    let p =
        o.p.ok_or_else(|| Failure::Invalid("--p is required".into()))?;
    let q =
        o.q.ok_or_else(|| Failure::Invalid("--q is required".into()))?;
    let m = mean_for(&o)?;
    let c = compare(p, q, m)?;
    if json {
        out.write_all(json_summary(&c).as_bytes())?;
        return Ok(0);
    }
    let mut s = String::new();
    let _ = writeln!(s, "p = {p}, q = {q}, mean = {}", mean_label(m));
    let _ = writeln!(s, "regime = {}", regime_label(&c));
    let _ = writeln!(s, "gamma_paper = {}", c.predicted.gamma);
    let _ = writeln!(s, "gamma_naive = {}", c.naive.gamma);
    match c.general {
        Some(g) => {
            let _ = writeln!(s, "gamma_general = {}", g.gamma);
        }
        None => {
            let _ = writeln!(s, "gamma_general = n/a (needs integers p, q >= 2)");
        }
    }
    if superseded {
        if let Some(g) = c.general_superseded {
            let _ = writeln!(s, "gamma_general_superseded = {}", g.gamma);
        }
    }
    let _ = writeln!(s, "improvement = {}", yes_no(c.improvement));
    out.write_all(s.as_bytes())?;
    Ok(0)
}

fn mean_label(m: MeanClass) -> &'static str {
    match m {
        MeanClass::ZeroMean => "zero",
        MeanClass::NonzeroMean => "nonzero",
    }
}

fn regime_label(c: &Comparison) -> &'static str {
    use crate::lifespan::Regime;
    match c.predicted.regime {
        Regime::PBelowHalf => "p_below_half",
        Regime::CombinedEffect => "combined_effect",
        Regime::PAboveQ => "p_above_q",
    }
}

#[derive(Serialize)]
struct SolveSummary<'a> {
    mode: &'a str,
    params: Params,
    family: Family,
    amplitude: f64,
    h: f64,
    t_max: f64,
    threshold: f64,
    status: &'a str,
    blowup: Option<BlowupEvent>,
    time: f64,
    sup_u: f64,
    sup_w: f64,
    picard_iterations: Option<usize>,
    picard_diffs: Option<Vec<f64>>,
    converged: Option<bool>,
    note: Option<&'a str>,
}

fn solve(
    cfg: &ConfigArgs,
    t_max: f64,
    mode: SolveMode,
    j_max: usize,
    tol: f64,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    let rc = cfg.resolve()?;
    let data = rc.data()?;
    let grid = CharacteristicGrid::new(rc.h, t_max, rc.params.r)?;
    let note = (rc.params.form == Form::Signed).then_some("theory applies to absolute form");
    let header = "t,sup_u,sup_w,u_n1,w_n2,u_n3,w_n4\n";
    let mut trace = String::from(header);
    let (summary, code) = match mode {
        SolveMode::March => {
            let opts = MarchOptions {
                norm_trace: true,
                ..MarchOptions::default()
            };
            let traj = march_with(&rc.params, &data, &grid, rc.threshold, &opts)?;
            for (s, n) in traj.trace.iter().zip(&traj.norms) {
                let _ = writeln!(
                    trace,
                    "{},{},{},{},{},{},{}",
                    s.t, s.sup_u, s.sup_w, n[0], n[1], n[2], n[3]
                );
            }
            let code = if traj.status == RunStatus::Diverged {
                let _ = writeln!(err, "non-finite values after t = {}", traj.last_finite_time);
                2
            } else {
                0
            };
            (
                SolveSummary {
                    mode: "march",
                    params: rc.params,
                    family: rc.family,
                    amplitude: rc.amplitude,
                    h: rc.h,
                    t_max,
                    threshold: rc.threshold,
                    status: traj.status.label(),
                    blowup: traj.event,
                    time: traj.time,
                    sup_u: traj.sup_u(),
                    sup_w: traj.sup_w(),
                    picard_iterations: None,
                    picard_diffs: None,
                    converged: None,
                    note,
                },
                code,
            )
        }
        SolveMode::Picard | SolveMode::PicardZero => {
            let pm = if mode == SolveMode::Picard {
                PicardMode::Direct
            } else {
                PicardMode::ZeroMeanShifted
            };
            let st = picard_solve(&rc.params, &data, &grid, pm, j_max, tol)?;
            let (u, w) = st.solution();
            let norms: Vec<Vec<f64>> = [
                (NormKind::N1, &u),
                (NormKind::N2, &w),
                (NormKind::N3, &u),
                (NormKind::N4, &w),
            ]
            .iter()
            .map(|(k, f)| level_norms(*k, f))
            .collect();
            let sup_u = level_norms(NormKind::N1, &u);
            let sup_w = level_norms(NormKind::N1, &w);
            for n in 0..=grid.nt {
                let _ = writeln!(
                    trace,
                    "{},{},{},{},{},{},{}",
                    grid.t(n),
                    sup_u[n],
                    sup_w[n],
                    norms[0][n],
                    norms[1][n],
                    norms[2][n],
                    norms[3][n]
                );
            }
            (
                SolveSummary {
                    mode: if pm == PicardMode::Direct {
                        "picard"
                    } else {
                        "picard-zero"
                    },
                    params: rc.params,
                    family: rc.family,
                    amplitude: rc.amplitude,
                    h: rc.h,
                    t_max,
                    threshold: rc.threshold,
                    status: if st.converged {
                        "converged"
                    } else {
                        "not_converged"
                    },
                    blowup: None,
                    time: grid.t_max(),
                    sup_u: u.sup_abs(),
                    sup_w: w.sup_abs(),
                    picard_iterations: Some(st.j),
                    picard_diffs: Some(st.diffs.clone()),
                    converged: Some(st.converged),
                    note,
                },
                0,
            )
        }
    };
    let json = json_summary(&summary);
    if let Some(dir) = &rc.out_dir {
        write_file(&dir.join("trace.csv"), &trace)?;
        write_file(&dir.join("summary.json"), &json)?;
    }
    out.write_all(json.as_bytes())?;
    Ok(code)
}

fn run_sweep(
    cfg: &ConfigArgs,
    cap: f64,
    rel_tol: f64,
    path: Option<&Path>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult<i32> {
    let rc = cfg.resolve()?;
    let ladder = rc
        .eps_ladder
        .clone()
        .ok_or_else(|| Failure::Invalid("an eps ladder is required".into()))?;
    let data = rc.data()?;
    let opts = LifespanOptions {
        cap,
        rel_tol,
        ..LifespanOptions::default()
    };
    let records = sweep(&rc.params, &data, &ladder, rc.h, rc.threshold, &opts)?;
    let csv = records_to_csv(&records);
    if let Some(dir) = &rc.out_dir {
        if let Ok(bundle) = compute_constants(&rc.params, &data) {
            write_file(&dir.join("certificate.json"), &json_summary(&bundle))?;
        }
    }
    if let Some(written) = emit(&csv, path, rc.out_dir.as_deref(), "sweep.csv", out)? {
        let _ = writeln!(err, "wrote {}", written.display());
    }
    let unresolved = records.iter().filter(|r| !r.resolved).count();
    if unresolved > 0 {
        let _ = writeln!(err, "{unresolved} of {} runs unresolved", records.len());
    }
    if records.iter().any(|r| r.status == RunStatus::Diverged) {
        let _ = writeln!(err, "some runs produced non-finite values");
        return Ok(2);
    }
    Ok(0)
}

#[derive(Serialize)]
struct FitSummary {
    #[serde(flatten)]
    fit: FitResult,
    stderr: f64,
    gamma_paper: Option<f64>,
    gamma_general: Option<f64>,
    verdict: &'static str,
}

fn fit_summary(
    records: &[crate::lifespan::LifespanRecord],
    o: &ConfigOverrides,
    tol: f64,
) -> CliResult<(FitSummary, Option<Comparison>)> {
    let fit = fit_power_law(records)?;
    let comparison = match (o.p, o.q) {
        (Some(p), Some(q)) => Some(compare(p, q, mean_for(o)?)?),
        _ => None,
    };
    let verdict = match &comparison {
        Some(c) => {
            let to_predicted = (fit.slope + c.predicted.gamma).abs();
            let to_naive = (fit.slope + c.naive.gamma).abs();
            if to_predicted > tol * c.predicted.gamma {
                "inconsistent"
            } else if to_naive < to_predicted {
                // within tolerance but the naive exponent fits better
                "closer_to_naive"
            } else {
                "consistent"
            }
        }
        None => "no_prediction",
    };
    Ok((
        FitSummary {
            fit,
            stderr: fit.stderr_slope,
            gamma_paper: comparison.map(|c| c.predicted.gamma),
            gamma_general: comparison.and_then(|c| c.general.map(|g| g.gamma)),
            verdict,
        },
        comparison,
    ))
}

fn fit(
    input: &Path,
    cfg: &ConfigArgs,
    tol: f64,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let records = read_records(&read_input(input)?)?;
    let o = cfg.overrides()?;
    let (summary, _) = fit_summary(&records, &o, tol)?;
    emit(
        &json_summary(&summary),
        path,
        o.out_dir.as_deref(),
        "fit.json",
        out,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct CertifySummary {
    params: Params,
    family: Family,
    bundle: CertificateBundle,
    ode_blowup_time: f64,
    certified_blowup_time: f64,
    upper_bound: f64,
}

fn certify(cfg: &ConfigArgs, out: &mut dyn Write) -> CliResult<i32> {
    let rc = cfg.resolve()?;
    let data = rc.data()?;
    let bundle = compute_constants(&rc.params, &data)?;
    let summary = CertifySummary {
        params: rc.params,
        family: rc.family,
        bundle,
        ode_blowup_time: bundle.ode_t,
        certified_blowup_time: certified_blowup_time(&bundle, &rc.params),
        upper_bound: bundle.upper_bound(),
    };
    emit(
        &json_summary(&summary),
        None,
        rc.out_dir.as_deref(),
        "certificate.json",
        out,
    )?;
    Ok(0)
}

#[derive(Serialize)]
struct AprioriSummary {
    all_bounded: bool,
    reports: Vec<AprioriReport>,
}

fn verify_apriori(
    id: &str,
    trials: usize,
    ladder: &[f64],
    seed: u64,
    probe: &ProbeConfig,
    path: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let ids = if id == "all" {
        line_ids()
    } else {
        vec![id.to_string()]
    };
    let reports = ids
        .iter()
        .map(|i| apriori_probe_with(i, trials, ladder, seed, probe))
        .collect::<Result<Vec<_>, _>>()?;
    let summary = AprioriSummary {
        all_bounded: reports.iter().all(|r| r.bounded),
        reports,
    };
    emit(&json_summary(&summary), path, None, "apriori.json", out)?;
    Ok(0)
}

fn report(
    input: &Path,
    cfg: &ConfigArgs,
    tol: f64,
    plot_out: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult<i32> {
    let records = read_records(&read_input(input)?)?;
    let o = cfg.overrides()?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>12} {:>14} {:>12} {:>9}",
        "eps", "T_blow", "status", "resolved"
    );
    for r in &records {
        let t = r
            .t_blow
            .map(|t| format!("{t:.4}"))
            .unwrap_or_else(|| "-".into());
        let _ = writeln!(
            s,
            "{:>12.6} {:>14} {:>12} {:>9}",
            r.eps,
            t,
            r.status.label(),
            yes_no(r.resolved)
        );
    }
    match fit_summary(&records, &o, tol) {
        Ok((fs, comparison)) => {
            let f = fs.fit;
            let _ = writeln!(
                s,
                "\nfitted slope {:.4} ± {:.4} (r2 = {:.6}, {} points)",
                f.slope, f.stderr_slope, f.r2, f.n_points
            );
            if let Some(c) = comparison {
                let _ = writeln!(
                    s,
                    "gamma_paper   {:.4}  |slope + gamma| = {:.4}",
                    c.predicted.gamma,
                    (f.slope + c.predicted.gamma).abs()
                );
                let _ = writeln!(
                    s,
                    "gamma_naive   {:.4}  |slope + gamma| = {:.4}",
                    c.naive.gamma,
                    (f.slope + c.naive.gamma).abs()
                );
                if let Some(g) = c.general {
                    let _ = writeln!(
                        s,
                        "gamma_general {:.4}  |slope + gamma| = {:.4}",
                        g.gamma,
                        (f.slope + g.gamma).abs()
                    );
                }
            }
            let _ = writeln!(s, "verdict: {}", fs.verdict);
        }
        Err(Failure::Runtime(m)) => {
            let _ = writeln!(s, "\nno fit: {m}");
        }
        Err(e) => return Err(e),
    }
    out.write_all(s.as_bytes())?;
    let plot = plot_csv(&records);
    match plot_out
        .map(Path::to_path_buf)
        .or_else(|| o.out_dir.as_ref().map(|d| d.join("plot.csv")))
    {
        Some(p) => write_file(&p, &plot)?,
        None => {
            out.write_all(b"\n")?;
            out.write_all(plot.as_bytes())?;
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut argv = vec!["wavelab"];
        argv.extend_from_slice(args);
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn predict_combined_case() {
        let (code, out, _) = run_capture(&["predict", "--p", "3", "--q", "4", "--mean", "zero"]);
        assert_eq!(code, 0);
        assert!(out.contains("gamma_paper = 1.8\n"), "{out}");
        assert!(out.contains("gamma_general = 1.5\n"), "{out}");
        assert!(out.contains("improvement = yes"), "{out}");
    }

    #[test]
    fn bad_flags_exit_one() {
        assert_eq!(run_capture(&["predict", "--p", "0.5", "--q", "4"]).0, 1);
        assert_eq!(run_capture(&["predict", "--bogus"]).0, 1);
        assert_eq!(run_capture(&["nope"]).0, 1);
        let (code, _, err) = run_capture(&[
            "sweep",
            "--p",
            "3",
            "--q",
            "4",
            "--eps-ladder",
            "0.1,0.2,0.4,0.8",
        ]);
        assert_eq!(code, 1);
        assert!(err.contains("decreasing"), "{err}");
    }

    #[test]
    fn certify_rejects_wrong_class() {
        let (code, _, err) =
            run_capture(&["certify", "--p", "3", "--q", "4", "--family", "zerof_bumpg"]);
        assert_eq!(code, 1);
        assert!(err.contains("certificate class"), "{err}");
        let (code, out, _) = run_capture(&["certify", "--p", "2", "--q", "3", "--eps", "0.1"]);
        assert_eq!(code, 0);
        assert!(out.contains("\"schema_version\": 1"));
    }
}
