//! Command-line driver: runs the simulation experiments and statistical
//! verifications, writing CSV/JSON/SVG artifacts plus a JSON manifest per
//! run. Exit codes: 0 on success, 1 when a verification fails, 2 on usage
//! errors.

mod opts;
mod plot;

use lgle::checks::{self, ScanRow};
use lgle::gibbs::{BoundaryData, GibbsSampler};
use lgle::kpz;
use lgle::polymer::{log_partition_final_row, rescaled_free_energy};
use lgle::rsk;
use lgle::stats::{Direction, StatReport};
use lgle::RngStream;
use opts::{Opts, Parsed};
use serde::Serialize;
use std::io::Write;
use std::path::{Path, PathBuf};

const USAGE: &str = "\
lgle <subcommand> [--flag value ...] [--config FILE]

subcommands:
  kpz-constants   --theta T --r R                       scaling constants as JSON
  sample-polymer  --theta T --r R --N n --replicas k    free-energy replicas as CSV
  sample-chain    --theta T --N n --M m --steps s       triangle chain trace (json|csv)
  gibbs-resample  --boundary FILE --samples k           conditional curve draws
  bridge-check    --theta T --r R --T len --draws k     bridge midpoint vs Gaussian
  verify-monotone --theta T --tmax t --trials k         coupling order preservation
  verify-gibbs    --theta T --N n --replicas k          resampling invariance
  tw-scan         --theta T --r R --N list --replicas k one-point law vs Tracy-Widom
  exponent-scan   --theta T --r R --N list --replicas k fluctuation exponent fit
  verify-all      [--quick]                             the full verification suite

common flags: --seed S, --out DIR (or LGLE_OUT_DIR), --jobs K, --format csv|json
";

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    std::process::exit(run(&args));
}

fn run(args: &[String]) -> i32 {
    let parsed = match Opts::parse(args) {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: {e}\n\n{USAGE}");
            return 2;
        }
    };
    if let Some(jobs) = parsed.opts.entries().get("jobs") {
        let k: usize = match jobs.parse() {
            Ok(k) if k >= 1 => k,
            _ => {
                eprintln!("error: --jobs must be a positive integer\n\n{USAGE}");
                return 2;
            }
        };
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .ok();
    }
    match dispatch(&parsed) {
        Ok(all_passed) => {
            if all_passed {
                0
            } else {
                1
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}\n\n{USAGE}");
            2
        }
        Err(CliError::Run(msg)) => {
            eprintln!("error: {msg}");
            1
        }
    }
}

enum CliError {
    Usage(String),
    Run(String),
}

impl From<lgle::Error> for CliError {
    fn from(e: lgle::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Run(e.to_string())
    }
}

impl From<String> for CliError {
    fn from(e: String) -> Self {
        CliError::Usage(e)
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    command: &'a str,
    version: &'a str,
    seed: u64,
    config: &'a std::collections::BTreeMap<String, String>,
    reports: &'a [StatReport],
}

fn write_manifest(
    dir: &Path,
    parsed: &Parsed,
    seed: u64,
    reports: &[StatReport],
) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)?;
    let manifest = Manifest {
        command: &parsed.command,
        version: env!("CARGO_PKG_VERSION"),
        seed,
        config: parsed.opts.entries(),
        reports,
    };
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Run(e.to_string()))?;
    std::fs::write(path, json)?;
    if !reports.is_empty() {
        let mut lines = String::new();
        for r in reports {
            lines.push_str(&serde_json::to_string(r).map_err(|e| CliError::Run(e.to_string()))?);
            lines.push('\n');
        }
        std::fs::write(dir.join("reports.jsonl"), lines)?;
    }
    Ok(())
}

fn print_reports(reports: &[StatReport]) -> bool {
    for r in reports {
        println!("{}", r.summary_line());
    }
    reports.iter().all(|r| r.pass)
}

fn scan_csv(dir: &Path, name: &str, rows: &[ScanRow]) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "N,ks,mean,var,replicas,seed")?;
    for r in rows {
        writeln!(
            f,
            "{},{:.10},{:.10},{:.10},{},{}",
            r.n, r.ks, r.mean, r.var, r.replicas, r.seed
        )?;
    }
    Ok(path)
}

fn dispatch(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    match parsed.command.as_str() {
        "kpz-constants" => cmd_kpz_constants(parsed),
        "sample-polymer" => cmd_sample_polymer(parsed),
        "sample-chain" => cmd_sample_chain(parsed),
        "gibbs-resample" => cmd_gibbs_resample(parsed),
        "bridge-check" => cmd_bridge_check(parsed),
        "verify-monotone" => cmd_verify_monotone(parsed),
        "verify-gibbs" => cmd_verify_gibbs(parsed),
        "tw-scan" => cmd_tw_scan(parsed),
        "exponent-scan" => cmd_exponent_scan(parsed),
        "verify-all" => cmd_verify_all(parsed),
        "help" | "--help" | "-h" => {
            println!("{USAGE}");
            let _ = o;
            Ok(true)
        }
        other => Err(CliError::Usage(format!("unknown subcommand {other}"))),
    }
}

fn cmd_kpz_constants(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 2.0)?;
    let r = o.f64_or("r", 1.0)?;
    let report = kpz::kpz_report(theta, r)?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| CliError::Run(e.to_string()))?;
    println!("{json}");
    let dir = o.out_dir();
    std::fs::create_dir_all(&dir)?;
    std::fs::write(dir.join("kpz-constants.json"), &json)?;
    let residual = report.residuals.max_abs();
    let stat = StatReport::new("kpz_identity_residuals", residual, 1e-9, Direction::AtMost, 1);
    write_manifest(&dir, parsed, 0, std::slice::from_ref(&stat))?;
    Ok(stat.pass)
}

fn cmd_sample_polymer(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 2.0)?;
    let r = o.f64_or("r", 1.0)?;
    let big_n = o.usize_or("N", 128)?;
    let replicas = o.usize_or("replicas", 100)?;
    let seed = o.u64_or("seed", 1)?;
    let n_cols = ((r * big_n as f64).floor() as usize).max(1);
    let dir = o.out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("polymer.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "seed,theta,N,n,logZ,F")?;
    use rayon::prelude::*;
    let rows: Vec<(f64, f64)> = (0..replicas)
        .into_par_iter()
        .map(|rep| -> lgle::Result<(f64, f64)> {
            let mut rng = RngStream::new(seed, rep as u64);
            let row = log_partition_final_row(n_cols, big_n, theta, &mut rng)?;
            let log_z = row[n_cols - 1];
            Ok((log_z, rescaled_free_energy(log_z, n_cols, big_n, theta)?))
        })
        .collect::<lgle::Result<Vec<_>>>()?;
    for (rep, (log_z, fe)) in rows.iter().enumerate() {
        writeln!(
            f,
            "{seed},{theta},{big_n},{n_cols},{log_z:.10},{fe:.10}",
        )
        .map_err(CliError::from)?;
        let _ = rep;
    }
    println!("wrote {} replicas to {}", replicas, path.display());
    write_manifest(&dir, parsed, seed, &[])?;
    Ok(true)
}

fn cmd_sample_chain(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 1.0)?;
    let big_n = o.usize_or("N", 3)?;
    let m_param = o.f64_or("M", 30.0)?;
    let steps = o.usize_or("steps", 8)?;
    let seed = o.u64_or("seed", 1)?;
    let top_k = o.usize_or("top-k", 2.min(big_n))?;
    let format = o.str_or("format", "json");
    let mut rng = RngStream::new(seed, 0);
    let trace = rsk::run_chain(big_n, theta, m_param, steps, &mut rng)?;
    let dir = o.out_dir();
    std::fs::create_dir_all(&dir)?;
    match format {
        "json" => {
            #[derive(Serialize)]
            struct TraceOut {
                theta: f64,
                m_param: f64,
                n_steps: usize,
                /// log-scale triangle per time step
                states: Vec<Vec<Vec<f64>>>,
            }
            let out = TraceOut {
                theta,
                m_param,
                n_steps: steps,
                states: trace.states.iter().map(|z| z.rows().to_vec()).collect(),
            };
            let path = dir.join("chain.json");
            let json =
                serde_json::to_string_pretty(&out).map_err(|e| CliError::Run(e.to_string()))?;
            std::fs::write(&path, json)?;
            println!("wrote trace to {}", path.display());
        }
        "csv" => {
            if top_k < 2 || big_n < 2 {
                return Err(CliError::Usage(
                    "csv export needs N >= 2 and top-k >= 2".into(),
                ));
            }
            let ens = rsk::extract_top_curves(&trace, top_k, top_k, steps)?;
            let path = dir.join("chain.csv");
            let mut f = std::fs::File::create(&path)?;
            let header: Vec<String> = (1..=top_k).map(|i| format!("L{i}")).collect();
            writeln!(f, "time,{}", header.join(","))?;
            let (lo, hi) = ens.window();
            for j in lo..=hi {
                let vals: Vec<String> = (1..=top_k)
                    .map(|i| format!("{:.10}", ens.at(i, j)))
                    .collect();
                writeln!(f, "{j},{}", vals.join(","))?;
            }
            println!("wrote top-{top_k} curves to {}", path.display());
        }
        other => return Err(CliError::Usage(format!("unknown format {other}"))),
    }
    write_manifest(&dir, parsed, seed, &[])?;
    Ok(true)
}

#[derive(serde::Deserialize)]
struct BoundaryFile {
    x: f64,
    y: f64,
    /// bottom curve; null entries mean minus infinity
    z: Vec<Option<f64>>,
}

fn cmd_gibbs_resample(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 1.0)?;
    let samples = o.usize_or("samples", 1)?;
    let seed = o.u64_or("seed", 1)?;
    let format = o.str_or("format", "csv");
    let boundary_path = o
        .entries()
        .get("boundary")
        .ok_or_else(|| CliError::Usage("gibbs-resample needs --boundary FILE".into()))?;
    let text = std::fs::read_to_string(boundary_path)?;
    let bf: BoundaryFile =
        serde_json::from_str(&text).map_err(|e| CliError::Run(format!("boundary json: {e}")))?;
    let boundary = BoundaryData::new(bf.x, bf.y, bf.z)?;
    let sampler = GibbsSampler::new(theta)?;
    let window = sampler.default_window(&boundary);
    let ctx = sampler.coupling_context(&boundary, window)?;
    let t_len = boundary.t_len();
    let dir = o.out_dir();
    std::fs::create_dir_all(&dir)?;
    let mut curves = Vec::with_capacity(samples);
    for rep in 0..samples {
        let mut rng = RngStream::new(seed, rep as u64);
        let uniforms: Vec<f64> = (0..t_len - 2).map(|_| rng.uniform()).collect();
        curves.push(ctx.sample(&uniforms)?);
    }
    match format {
        "csv" => {
            let path = dir.join("curves.csv");
            let mut f = std::fs::File::create(&path)?;
            writeln!(f, "sample,site,value")?;
            for (rep, curve) in curves.iter().enumerate() {
                for (site, v) in curve.iter().enumerate() {
                    writeln!(f, "{rep},{site},{v:.10}")?;
                }
            }
            println!("wrote {} draws to {}", samples, path.display());
        }
        "json" => {
            let path = dir.join("curves.json");
            let json =
                serde_json::to_string_pretty(&curves).map_err(|e| CliError::Run(e.to_string()))?;
            std::fs::write(&path, json)?;
            println!("wrote {} draws to {}", samples, path.display());
        }
        other => return Err(CliError::Usage(format!("unknown format {other}"))),
    }
    write_manifest(&dir, parsed, seed, &[])?;
    Ok(true)
}

fn cmd_bridge_check(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 2.0)?;
    let r = o.f64_or("r", 1.0)?;
    let t_len = o.usize_or("T", 512)?;
    let draws = o.usize_or("draws", 10_000)?;
    let threshold = o.f64_or("threshold", 0.03)?;
    let seed = o.u64_or("seed", 1)?;
    let report = checks::bridge_midpoint_check(theta, r, t_len, draws, threshold, seed)?;
    let ok = print_reports(std::slice::from_ref(&report));
    write_manifest(&o.out_dir(), parsed, seed, std::slice::from_ref(&report))?;
    Ok(ok)
}

fn cmd_verify_monotone(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 1.0)?;
    let t_max = o.usize_or("tmax", 8)?;
    let trials = o.usize_or("trials", 10_000)?;
    let seed = o.u64_or("seed", 1)?;
    let reports = vec![
        checks::monotone_check(theta, t_max, trials, false, seed)?,
        checks::monotone_check(theta, t_max, (trials / 20).max(100), true, seed)?,
    ];
    let ok = print_reports(&reports);
    write_manifest(&o.out_dir(), parsed, seed, &reports)?;
    Ok(ok)
}

fn cmd_verify_gibbs(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 1.0)?;
    let big_n = o.usize_or("N", 4)?;
    let replicas = o.usize_or("replicas", 10_000)?;
    let threshold = o.f64_or("threshold", 0.02)?;
    let seed = o.u64_or("seed", 1)?;
    let reports = vec![
        checks::gibbs_invariance_check(big_n, theta, (2, 6), replicas, threshold, false, seed)?,
        checks::gibbs_invariance_check(big_n, theta, (2, 6), replicas, threshold, true, seed)?,
    ];
    let ok = print_reports(&reports);
    write_manifest(&o.out_dir(), parsed, seed, &reports)?;
    Ok(ok)
}

fn cmd_tw_scan(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 2.0)?;
    let r = o.f64_or("r", 1.0)?;
    let n_list = o.usize_list_or("N", &[64, 128, 256, 512])?;
    let replicas = o.usize_or("replicas", 2_000)?;
    let seed = o.u64_or("seed", 7)?;
    let table = lgle::tw::build_tw_table()?;
    let rows = checks::tw_convergence_scan(theta, r, &n_list, replicas, seed, &table)?;
    let dir = o.out_dir();
    let csv = scan_csv(&dir, "tw-scan.csv", &rows)?;
    println!("wrote {}", csv.display());
    let series = vec![
        plot::Series {
            name: "ks",
            points: rows.iter().map(|r| (r.n as f64, r.ks)).collect(),
        },
        plot::Series {
            name: "var",
            points: rows.iter().map(|r| (r.n as f64, r.var)).collect(),
        },
    ];
    plot::emit_plot("one-point law vs reference", &series, &dir.join("tw-scan.svg"))?;
    let last = rows.last().ok_or_else(|| CliError::Usage("empty --N list".into()))?;
    let reports = vec![
        StatReport::new(
            "tw_ks_nonincreasing(inversions)",
            checks::count_ks_inversions(&rows) as f64,
            1.0,
            Direction::AtMost,
            rows.len() as u64,
        ),
        StatReport::new("tw_ks_final", last.ks, 0.12, Direction::AtMost, replicas as u64),
        StatReport::new(
            "tw_mean_final",
            (last.mean + 1.771).abs(),
            0.25,
            Direction::AtMost,
            replicas as u64,
        ),
    ];
    let ok = print_reports(&reports);
    write_manifest(&dir, parsed, seed, &reports)?;
    Ok(ok)
}

fn cmd_exponent_scan(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let theta = o.f64_or("theta", 2.0)?;
    let r = o.f64_or("r", 1.0)?;
    let n_list = o.usize_list_or("N", &[64, 128, 256, 512, 1024])?;
    let replicas = o.usize_or("replicas", 2_000)?;
    let seed = o.u64_or("seed", 7)?;
    let tol = o.f64_or("tolerance", 0.08)?;
    let (pairs, slope) = checks::exponent_scan(theta, r, &n_list, replicas, seed)?;
    let dir = o.out_dir();
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("exponent-scan.csv");
    let mut f = std::fs::File::create(&path)?;
    writeln!(f, "N,var,replicas,seed")?;
    for (n, var) in &pairs {
        writeln!(f, "{},{:.10},{},{}", *n as usize, var, replicas, seed)?;
    }
    println!("wrote {}", path.display());
    let series = vec![plot::Series {
        name: "log var",
        points: pairs.iter().map(|&(n, v)| (n.ln(), v.ln())).collect(),
    }];
    plot::emit_plot("variance growth", &series, &dir.join("exponent-scan.svg"))?;
    let report = StatReport::new(
        "fluctuation_exponent",
        (slope - 2.0 / 3.0).abs(),
        tol,
        Direction::AtMost,
        (replicas * pairs.len()) as u64,
    )
    .with_meta("slope", slope);
    let ok = print_reports(std::slice::from_ref(&report));
    write_manifest(&dir, parsed, seed, std::slice::from_ref(&report))?;
    Ok(ok)
}

fn cmd_verify_all(parsed: &Parsed) -> Result<bool, CliError> {
    let o = &parsed.opts;
    let quick = o.flag("quick");
    let seed = o.u64_or("seed", 0x5EC0)?;
    let mut reports: Vec<StatReport> = Vec::new();

    // 1: constant identities
    let grid = [0.5, 1.0, 2.0];
    reports.extend(checks::constant_identities_check(&grid, &grid)?);
    // 2: recursion vs enumeration
    reports.push(checks::dp_enumeration_check(
        if quick { 5 } else { 6 },
        if quick { 20 } else { 100 },
        1.0,
        seed + 2,
    )?);
    // 3: chain vs brute force
    let (c_reps, c_thresh) = if quick { (3_000, 0.06) } else { (20_000, 0.03) };
    reports.extend(checks::chain_vs_brute_force(
        1.0, 3, 6, 30.0, c_reps, c_thresh, seed + 3,
    )?);
    // 4: resampling invariance and its negative control
    let (g_reps, g_thresh) = if quick { (1_500, 0.05) } else { (10_000, 0.02) };
    reports.push(checks::gibbs_invariance_check(
        4, 1.0, (2, 6), g_reps, g_thresh, false, seed + 4,
    )?);
    reports.push(checks::gibbs_invariance_check(
        4, 1.0, (2, 6), g_reps, g_thresh, true, seed + 4,
    )?);
    // 5: monotone coupling and control
    reports.push(checks::monotone_check(
        1.0,
        8,
        if quick { 1_000 } else { 10_000 },
        false,
        seed + 5,
    )?);
    reports.push(checks::monotone_check(1.0, 8, 500, true, seed + 5)?);
    // 6: coupling vs heat bath
    let (x_reps, burn, x_thresh) = if quick { (2_000, 300, 0.05) } else { (10_000, 1_000, 0.02) };
    reports.push(checks::cross_sampler_check(1.0, 6, x_reps, burn, x_thresh, seed + 6)?);
    // 7: one-point law
    let table = lgle::tw::build_tw_table()?;
    let (n_list, s_reps, ks_fin, mean_tol): (&[usize], usize, f64, f64) = if quick {
        (&[64, 128, 256], 500, 0.2, 0.4)
    } else {
        (&[64, 128, 256, 512], 2_000, 0.12, 0.25)
    };
    let rows = checks::tw_convergence_scan(2.0, 1.0, n_list, s_reps, seed + 7, &table)?;
    let last = rows.last().unwrap();
    reports.push(StatReport::new(
        "tw_ks_nonincreasing(inversions)",
        checks::count_ks_inversions(&rows) as f64,
        1.0,
        Direction::AtMost,
        rows.len() as u64,
    ));
    reports.push(StatReport::new(
        "tw_ks_final",
        last.ks,
        ks_fin,
        Direction::AtMost,
        s_reps as u64,
    ));
    reports.push(StatReport::new(
        "tw_mean_final",
        (last.mean + 1.771).abs(),
        mean_tol,
        Direction::AtMost,
        s_reps as u64,
    ));
    // 8: fluctuation exponent
    let (e_list, e_reps, e_tol): (&[usize], usize, f64) = if quick {
        (&[64, 128, 256, 512], 500, 0.12)
    } else {
        (&[64, 128, 256, 512, 1024], 2_000, 0.08)
    };
    let (_, slope) = checks::exponent_scan(2.0, 1.0, e_list, e_reps, seed + 8)?;
    reports.push(
        StatReport::new(
            "fluctuation_exponent",
            (slope - 2.0 / 3.0).abs(),
            e_tol,
            Direction::AtMost,
            (e_reps * e_list.len()) as u64,
        )
        .with_meta("slope", slope),
    );
    // 9: bridge midpoint
    let (b_len, b_draws, b_thresh) = if quick { (256, 2_000, 0.06) } else { (512, 10_000, 0.03) };
    reports.push(checks::bridge_midpoint_check(2.0, 1.0, b_len, b_draws, b_thresh, seed + 9)?);
    // 10: normalizer quadrature
    reports.push(checks::normalizer_quadrature_check(
        1.0,
        if quick { 100_000 } else { 1_000_000 },
        seed + 10,
    )?);
    // 11: reference-distribution self-check
    reports.extend(checks::tw_table_self_check()?);
    // 12: tightness proxy
    let (t_list, t_reps): (&[usize], usize) = if quick {
        (&[128, 256], 150)
    } else {
        (&[128, 256, 512], 500)
    };
    reports.extend(checks::tightness_proxy_check(
        2.0,
        1.0,
        t_list,
        t_reps,
        &[0.1, 0.2, 0.4],
        seed + 12,
    )?);

    let ok = print_reports(&reports);
    let dir = o.out_dir();
    write_manifest(&dir, parsed, seed, &reports)?;
    println!(
        "verify-all: {}/{} checks passed{}",
        reports.iter().filter(|r| r.pass).count(),
        reports.len(),
        if quick { " (quick mode)" } else { "" }
    );
    Ok(ok)
}
