//! Thin command-line front end over the library runners: each subcommand
//! parses a TOML config, runs the matching experiment, and writes CSV/JSON/SVG
//! artifacts plus a run manifest into the output directory.

use clap::{Parser, Subcommand};
use geodesic_amp_lab::experiments::{self, ExperimentError};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(name = "geodesic-amp-lab", version, about = "restriction-bound laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// output directory for artifacts
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// seed for any randomized sweep
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// worker threads for parallel scans
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Radial kernel profile k_t and the normalized flat trace
    KernelProfile {
        #[arg(long)]
        config: PathBuf,
    },
    /// Critical points of the restriction phase for one (g, rho)
    CriticalPoints {
        #[arg(long)]
        config: PathBuf,
    },
    /// Decay series |I(s, lambda, g)| with a log-log fit and SVG plot
    DecayFit {
        #[arg(long)]
        config: PathBuf,
    },
    /// Counting function M(l, n, kappa) against its bound
    HeckeCount {
        #[arg(long)]
        config: PathBuf,
        /// order config; the shipped discriminant-6 order when omitted
        #[arg(long)]
        order: Option<PathBuf>,
    },
    /// Exact exponent ledger for a named model preset
    ExponentOpt {
        /// period-a | period-b | onspec | offspec | main | conditional
        preset: String,
        /// Ramanujan parameter as "p/q" for the conditional preset
        #[arg(long)]
        theta: Option<String>,
    },
    /// Quick end-to-end self check of every subsystem
    Selftest,
}

fn main() {
    let cli = Cli::parse();
    if let Some(k) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(k).build_global();
    }
    let started = Instant::now();
    match run(&cli, started) {
        Ok(summary) => {
            println!("{summary}");
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn read_config(path: &PathBuf) -> Result<String, ExperimentError> {
    std::fs::read_to_string(path)
        .map_err(|e| ExperimentError::ConfigInvalid(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(text: &str) -> Result<T, ExperimentError> {
    toml::from_str(text).map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))
}

fn run(cli: &Cli, started: Instant) -> Result<String, ExperimentError> {
    std::fs::create_dir_all(&cli.out)?;
    match &cli.command {
        Command::KernelProfile { config } => {
            let text = read_config(config)?;
            let cfg: experiments::KernelProfileConfig = parse(&text)?;
            let profiles = experiments::run_kernel_profile(&cfg)?;
            let (header, rows) = experiments::kernel_profile_rows(&profiles);
            experiments::write_csv(&cli.out.join("kernel_profile.csv"), &header, &rows)?;
            experiments::write_manifest(
                &cli.out,
                "kernel-profile",
                &text,
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            let sup: Vec<f64> = profiles
                .iter()
                .map(|p| p.normalized.iter().fold(0.0f64, |a, &v| a.max(v)))
                .collect();
            Ok(format!(
                "kernel-profile: {} t-values, sup normalized trace per t = {sup:?}",
                profiles.len()
            ))
        }
        Command::CriticalPoints { config } => {
            let text = read_config(config)?;
            let cfg: experiments::CriticalPointsConfig = parse(&text)?;
            let rows = experiments::run_critical_points(&cfg)?;
            let (header, data) = experiments::critical_rows(&rows);
            experiments::write_csv(&cli.out.join("critical_points.csv"), &header, &data)?;
            experiments::write_manifest(
                &cli.out,
                "critical-points",
                &text,
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            Ok(format!("critical-points: {} points", rows.len()))
        }
        Command::DecayFit { config } => {
            let text = read_config(config)?;
            let cfg: experiments::DecayFitConfig = parse(&text)?;
            let art = experiments::run_decay_fit(&cfg)?;
            let (header, rows) = experiments::decay_rows(&art);
            experiments::write_csv(&cli.out.join("decay.csv"), &header, &rows)?;
            std::fs::write(cli.out.join("decay_fit.json"), experiments::decay_fit_json(&art))?;
            std::fs::write(cli.out.join("decay.svg"), experiments::decay_svg(&art))?;
            experiments::write_manifest(
                &cli.out,
                "decay-fit",
                &text,
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            Ok(format!(
                "decay-fit {}: slope {:.4} +/- {:.4} over {} samples",
                art.name,
                art.fit.slope,
                art.fit.stderr,
                art.series.samples.len()
            ))
        }
        Command::HeckeCount { config, order } => {
            let text = read_config(config)?;
            let cfg: experiments::HeckeCountConfig = parse(&text)?;
            let order_text = match order {
                Some(path) => read_config(path)?,
                None => experiments::DISC6_ORDER_TOML.to_string(),
            };
            let (order_basis, ccfg) = experiments::load_order(&order_text)?;
            let rows = experiments::run_hecke_count(&cfg, &order_basis, &ccfg)?;
            let (header, data) = experiments::count_rows(&rows);
            experiments::write_csv(&cli.out.join("hecke_count.csv"), &header, &data)?;
            experiments::write_manifest(
                &cli.out,
                "hecke-count",
                &text,
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            let max_ratio = rows.iter().fold(0.0f64, |a, r| a.max(r.ratio));
            Ok(format!(
                "hecke-count: {} rows, max M/bound = {max_ratio:.4}",
                rows.len()
            ))
        }
        Command::ExponentOpt { preset, theta } => {
            let theta_pair = match theta {
                None => None,
                Some(s) => {
                    let parts: Vec<&str> = s.split('/').collect();
                    let parse_i = |x: &str| {
                        x.trim().parse::<i64>().map_err(|e| {
                            ExperimentError::ConfigInvalid(format!("bad theta {s:?}: {e}"))
                        })
                    };
                    match parts.as_slice() {
                        [n] => Some((parse_i(n)?, 1)),
                        [n, d] => Some((parse_i(n)?, parse_i(d)?)),
                        _ => {
                            return Err(ExperimentError::ConfigInvalid(format!("bad theta {s:?}")))
                        }
                    }
                }
            };
            let table = experiments::run_exponent_opt(preset, theta_pair)?;
            experiments::write_manifest(
                &cli.out,
                "exponent-opt",
                preset,
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            Ok(table.trim_end().to_string())
        }
        Command::Selftest => {
            let report = selftest(cli.seed)?;
            experiments::write_manifest(
                &cli.out,
                "selftest",
                "selftest",
                cli.seed,
                started.elapsed().as_millis(),
            )?;
            Ok(report)
        }
    }
}

fn selftest(seed: u64) -> Result<String, ExperimentError> {
    use geodesic_amp_lab::*;
    use rand::{Rng, SeedableRng};
    let mut out = String::new();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    // hecke degrees for a few m
    let (order, _) = experiments::load_order(experiments::DISC6_ORDER_TOML)?;
    for m in [1u64, 5, 7, 25] {
        let set = coset_reps(&order, m, 1e9)?;
        let expect = quaternion::sigma1(m);
        out.push_str(&format!(
            "hecke degree m={m}: {} (sigma1 = {expect})\n",
            set.degree()
        ));
        if set.degree() as u64 != expect {
            return Err(ExperimentError::AccuracyNotReached(
                "hecke degree mismatch".into(),
            ));
        }
    }

    // spherical function vs oracle at a random point
    let s = 20.0 + rng.gen::<f64>() * 30.0;
    let r = 0.2 + rng.gen::<f64>() * 1.5;
    let phi =
        spherical_phi(s, r).map_err(|e| ExperimentError::AccuracyNotReached(e.to_string()))?;
    let oracle = mehler_conical(s, r);
    out.push_str(&format!(
        "phi_s({s:.2}, {r:.2}) = {phi:.10e}, oracle diff {:.2e}\n",
        (phi - oracle).abs()
    ));
    if (phi - oracle).abs() > 1e-8 {
        return Err(ExperimentError::AccuracyNotReached("spherical oracle".into()));
    }

    // a critical point with Hessian fidelity
    let rho = 0.4 + 0.2 * rng.gen::<f64>();
    let g = oscillatory::transverse_geometry(rho, 0.04 + 0.04 * rng.gen::<f64>());
    let ctx = PhaseContext::new(g, rho, 0.05)
        .map_err(|e| ExperimentError::ConfigInvalid(e.to_string()))?;
    let cps = find_critical_points(&ctx, 1024);
    out.push_str(&format!("critical points: {}\n", cps.len()));
    for cp in &cps {
        let (_, det_a) = phase::hessian_analytic(cp, &ctx);
        let m = phase::hessian_numeric(cp, &ctx);
        let det_n = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
        if (det_a - det_n).abs() > 1e-6 * (1.0 + det_a.abs()) {
            return Err(ExperimentError::AccuracyNotReached(
                "hessian determinant".into(),
            ));
        }
    }

    // exponent ledger spot value
    let main_table = experiments::run_exponent_opt("main", None)?;
    if !main_table.contains("3/14") {
        return Err(ExperimentError::AccuracyNotReached("exponent ledger".into()));
    }
    out.push_str("exponent ledger: main = 3/14\n");

    // small counting scan with prefilter validation
    let cfg = experiments::HeckeCountConfig {
        n_min: 1,
        n_max: 40,
        kappas: vec![0.05, 1.0],
        frame: None,
        length: 1.0,
        validate_prefilter: true,
        stride: 1,
    };
    let (order2, ccfg) = experiments::load_order(experiments::DISC6_ORDER_TOML)?;
    let rows = experiments::run_hecke_count(&cfg, &order2, &ccfg)?;
    let viol: usize = rows.iter().map(|r| r.prefilter_violations).sum();
    out.push_str(&format!(
        "counting scan rows: {}, prefilter violations: {viol}\n",
        rows.len()
    ));
    if viol > 0 {
        return Err(ExperimentError::AccuracyNotReached(
            "prefilter soundness".into(),
        ));
    }
    out.push_str("selftest: ok");
    Ok(out)
}
