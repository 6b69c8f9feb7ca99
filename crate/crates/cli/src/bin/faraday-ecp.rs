use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use faraday_ecp::formats::{self, CavityRow, LedgerRow, OutputFormat};
use faraday_ecp::{config, parallel, transcript};
use faraday_ecp_core::analytics::{self, DetectionEfficiency, GridAxis, GridSpec};
use faraday_ecp_core::cavity::{self, CavityParams, PhasePair};
use faraday_ecp_core::ecp::{self, CoefficientPair};
use faraday_ecp_core::montecarlo::{self, LossModel, SimulationConfig, Verdict};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

const SEED_ENV: &str = "FARADAY_ECP_SEED";

/// Photonic Faraday-rotation entanglement concentration for GHZ-class atom
/// states.
///
/// Any subcommand accepts `--config FILE` with `flag = value` lines; flags
/// on the command line override the file.
#[derive(Parser)]
#[command(version, args_override_self = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cavity reflection coefficients, phases and Faraday angles.
    Cavity(CavityArgs),
    /// One concentration round on a fresh state.
    Round(RoundArgs),
    /// Sampled success probabilities against the closed forms.
    Protocol(ProtocolArgs),
    /// Data behind the total-probability figures.
    Figure(FigureArgs),
}

#[derive(Args)]
#[command(args_override_self = true)]
struct OutputArgs {
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    format: OutputFormat,
}

impl OutputArgs {
    fn writer(&self) -> Result<Box<dyn Write>> {
        Ok(match &self.out {
            Some(p) => Box::new(BufWriter::new(
                File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
            )),
            None => Box::new(BufWriter::new(io::stdout().lock())),
        })
    }
}

/// Frequencies are given relative to the probe: `--detuning-c` is
/// `omega_c - omega_p` and `--detuning-0` is `omega_0 - omega_p`.
#[derive(Args)]
#[command(args_override_self = true)]
struct CavityArgs {
    #[arg(long, default_value_t = 1.0)]
    kappa: f64,
    /// Atomic decay rate. Defaults to 0.
    #[arg(long)]
    gamma: Option<f64>,
    /// Atom-cavity coupling. Defaults to kappa/2.
    #[arg(long)]
    g: Option<f64>,
    /// Defaults to kappa/2.
    #[arg(long, allow_hyphen_values = true)]
    detuning_c: Option<f64>,
    /// Defaults to kappa/2.
    #[arg(long, allow_hyphen_values = true)]
    detuning_0: Option<f64>,
    /// Use the ideal operating point, ignoring the other parameters.
    #[arg(long)]
    ideal: bool,
    /// Sweep the probe frequency: `wp:MIN:MAX:POINTS`, with `omega_p = 0`
    /// at the detunings given above.
    #[arg(long, allow_hyphen_values = true)]
    sweep: Option<String>,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct RoundArgs {
    /// Weight `|alpha|^2` in (0, 1); alpha is its nonnegative root.
    #[arg(long)]
    alpha2: f64,
    /// Number of atoms in the GHZ-class state.
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum LossArg {
    None,
    Paper,
    Cascaded,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct ProtocolArgs {
    #[arg(long)]
    alpha2: f64,
    #[arg(long, default_value_t = 2)]
    n: usize,
    #[arg(long, default_value_t = 5)]
    max_rounds: usize,
    #[arg(long, default_value_t = 100_000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    eta_p: Option<f64>,
    #[arg(long)]
    eta_a: Option<f64>,
    #[arg(long, value_enum, default_value_t = LossArg::None)]
    loss_model: LossArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Which {
    #[value(name = "4")]
    Four,
    #[value(name = "5")]
    Five,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AxisArg {
    /// Uniform in |alpha|^2.
    Weight,
    /// Uniform in alpha.
    Alpha,
}

#[derive(Args)]
#[command(args_override_self = true)]
struct FigureArgs {
    #[arg(long, value_enum)]
    which: Which,
    /// Rounds summed into the total.
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long, default_value_t = 199)]
    grid: usize,
    #[arg(long, value_enum, default_value_t = AxisArg::Weight)]
    axis: AxisArg,
    #[arg(long, default_value_t = 0.9)]
    eta_p: f64,
    #[arg(long, default_value_t = 0.9)]
    eta_a: f64,
    #[command(flatten)]
    output: OutputArgs,
}

fn coefficients(alpha2: f64) -> Result<CoefficientPair> {
    if !(alpha2 > 0.0 && alpha2 < 1.0) {
        bail!("--alpha2 must lie strictly between 0 and 1");
    }
    Ok(CoefficientPair::from_alpha2(alpha2)?)
}

fn cavity_row(p: &CavityParams, omega_p: f64) -> Result<CavityRow> {
    let r = cavity::reflection_coefficient(p)?;
    let r0 = cavity::empty_cavity_reflection(p);
    let phases = PhasePair::from_params(p)?;
    let (theta_minus, theta_plus) = cavity::faraday_angles(&phases);
    Ok(CavityRow {
        omega_p,
        r_re: r.re,
        r_im: r.im,
        r0_re: r0.re,
        r0_im: r0.im,
        phi: phases.phi,
        phi_0: phases.phi_0,
        theta_minus,
        theta_plus,
        gate_phase_error: cavity::gate_phase_error(p)?,
    })
}

fn parse_sweep(text: &str) -> Result<(f64, f64, usize)> {
    let parts: Vec<&str> = text.split(':').collect();
    let [var, lo, hi, n] = parts[..] else {
        bail!("--sweep expects wp:MIN:MAX:POINTS");
    };
    if var != "wp" {
        bail!("only the probe frequency `wp` can be swept");
    }
    let (lo, hi): (f64, f64) = (lo.parse()?, hi.parse()?);
    let n: usize = n.parse()?;
    if n < 2 || lo.is_nan() || hi.is_nan() || lo >= hi {
        bail!("a sweep needs MIN < MAX and at least two points");
    }
    Ok((lo, hi, n))
}

fn cmd_cavity(a: &CavityArgs) -> Result<()> {
    let half = a.kappa / 2.0;
    let (dc, d0, gamma, g) = if a.ideal {
        (half, half, 0.0, half)
    } else {
        (
            a.detuning_c.unwrap_or(half),
            a.detuning_0.unwrap_or(half),
            a.gamma.unwrap_or(0.0),
            a.g.unwrap_or(half),
        )
    };
    let at = |omega_p: f64| CavityParams::new(dc, d0, omega_p, a.kappa, gamma, g);
    let mut out = a.output.writer()?;

    if let Some(sweep) = &a.sweep {
        let (lo, hi, n) = parse_sweep(sweep)?;
        let last = (n - 1) as f64;
        let rows = (0..n)
            .map(|i| {
                let wp = (lo * (last - i as f64) + hi * i as f64) / last;
                cavity_row(&at(wp)?, wp)
            })
            .collect::<Result<Vec<_>>>()?;
        formats::write_table(&mut out, &rows, a.output.format)?;
    } else {
        let row = cavity_row(&at(0.0)?, 0.0)?;
        match a.output.format {
            OutputFormat::Json => formats::write_json(&mut out, &formats::json_records(&[row]))?,
            OutputFormat::Csv => {
                writeln!(
                    out,
                    "r={} r0={}",
                    formats::fixed_complex(row.r_re, row.r_im),
                    formats::fixed_complex(row.r0_re, row.r0_im)
                )?;
                writeln!(out, "phi={} phi0={}", formats::fixed(row.phi), formats::fixed(row.phi_0))?;
                writeln!(
                    out,
                    "theta_minus={} theta_plus={}",
                    formats::fixed(row.theta_minus),
                    formats::fixed(row.theta_plus)
                )?;
                writeln!(out, "gate_phase_error={:.3e}", row.gate_phase_error)?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_round(a: &RoundArgs) -> Result<()> {
    let c = coefficients(a.alpha2)?;
    let state = ecp::prepare_initial(&c, a.n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let r = ecp::run_round(&state, &c, &mut rng)?;
    let fidelity = r.corrected_state.fidelity(&ecp::maximally_entangled(a.n)?)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", transcript::HEADER)?;
    writeln!(out, "{}", transcript::TranscriptLine::from_round(1, &r))?;
    writeln!(out, "fidelity={fidelity:.12}")?;
    Ok(())
}

fn efficiency(a: &ProtocolArgs) -> Result<Option<(LossModel, DetectionEfficiency)>> {
    let model = match a.loss_model {
        LossArg::None => {
            if a.eta_p.is_some() || a.eta_a.is_some() {
                bail!("--eta-p/--eta-a need --loss-model paper or cascaded");
            }
            return Ok(None);
        }
        LossArg::Paper => LossModel::PaperGlobal,
        LossArg::Cascaded => LossModel::CascadedPerRound,
    };
    let (Some(p), Some(at)) = (a.eta_p, a.eta_a) else {
        bail!("a loss model needs both --eta-p and --eta-a");
    };
    Ok(Some((model, DetectionEfficiency::new(p, at)?)))
}

fn verdict(v: Verdict) -> &'static str {
    match v {
        Verdict::Pass => "pass",
        Verdict::Flagged => "flagged",
        Verdict::Fail => "fail",
    }
}

fn cmd_protocol(a: &ProtocolArgs) -> Result<()> {
    let c = coefficients(a.alpha2)?;
    let mut config = SimulationConfig::ideal(c, a.n, a.max_rounds, a.trials, a.seed);
    if let Some((model, eff)) = efficiency(a)? {
        config = config.with_loss(model, eff);
    }
    let ledger = parallel::estimate_parallel(&config)?;
    let mut rows: Vec<LedgerRow> = montecarlo::agreement(&config, &ledger)?
        .into_iter()
        .map(|ag| LedgerRow {
            round: Some(ag.round),
            successes: ledger.success_count_by_round[ag.round - 1],
            trials: ledger.trials,
            empirical_p: ag.empirical,
            stderr: ledger.stderr[ag.round - 1],
            analytic_p: ag.expected,
            z: ag.z,
            verdict: verdict(ag.verdict).into(),
        })
        .collect();
    let analytic_total: f64 = rows.iter().map(|r| r.analytic_p).sum();
    let total = ledger.empirical_total();
    let sigma = ledger
        .total_stderr()
        .max((analytic_total * (1.0 - analytic_total) / a.trials as f64).sqrt());
    let z = if sigma > 0.0 { (total - analytic_total).abs() / sigma } else { 0.0 };
    let total_verdict = if z > montecarlo::HARD_SIGMA {
        Verdict::Fail
    } else if z >= montecarlo::SOFT_SIGMA {
        Verdict::Flagged
    } else {
        Verdict::Pass
    };
    rows.push(LedgerRow {
        round: None,
        successes: ledger.total_successes(),
        trials: ledger.trials,
        empirical_p: total,
        stderr: ledger.total_stderr(),
        analytic_p: analytic_total,
        z,
        verdict: verdict(total_verdict).into(),
    });

    let mut out = a.output.writer()?;
    match a.output.format {
        OutputFormat::Csv => formats::write_csv(&mut out, &rows)?,
        OutputFormat::Json => {
            let (per_round, total_row) = rows.split_at(rows.len() - 1);
            let report = json!({
                "alpha2": a.alpha2,
                "n": a.n,
                "max_rounds": a.max_rounds,
                "trials": a.trials,
                "seed": a.seed,
                "loss_model": format!("{:?}", config.loss_model),
                "eta_p": config.efficiency.map(|e| e.eta_p),
                "eta_a": config.efficiency.map(|e| e.eta_a),
                "rounds": formats::json_records(per_round),
                "total": formats::json_records(total_row)[0],
            });
            formats::write_json(&mut out, &report)?;
        }
    }
    out.flush()?;
    Ok(())
}

fn cmd_figure(a: &FigureArgs) -> Result<()> {
    let grid = GridSpec {
        points: a.grid,
        axis: match a.axis {
            AxisArg::Weight => GridAxis::Weight,
            AxisArg::Alpha => GridAxis::Amplitude,
        },
        ..GridSpec::default()
    };
    let grid = match grid.axis {
        GridAxis::Amplitude => GridSpec {
            lo: grid.lo.sqrt(),
            hi: grid.hi.sqrt(),
            ..grid
        },
        GridAxis::Weight => grid,
    };
    let values = grid.alpha2_values()?;
    let mut out = a.output.writer()?;
    match a.which {
        Which::Four => formats::write_table(&mut out, &analytics::figure4_table(&values, a.k)?, a.output.format)?,
        Which::Five => {
            let eff = DetectionEfficiency::new(a.eta_p, a.eta_a)?;
            formats::write_table(&mut out, &analytics::figure5_table(&values, &eff, a.k)?, a.output.format)?
        }
    }
    out.flush()?;
    Ok(())
}

fn run() -> Result<()> {
    let args = config::expand_args(std::env::args_os().collect())?;
    let cli = Cli::parse_from(args);
    match &cli.command {
        Command::Cavity(a) => cmd_cavity(a),
        Command::Round(a) => cmd_round(a),
        Command::Protocol(a) => cmd_protocol(a),
        Command::Figure(a) => cmd_figure(a),
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
