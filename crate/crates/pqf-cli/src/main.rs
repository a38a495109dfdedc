//! `pqf`: synthesize, benchmark and simulate PQF protocols.

mod selftest;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use pqf_core::angle::{Angle, Eps};
use pqf_core::bench::{self, BenchRow};
use pqf_core::exactsynth::Basis;
use pqf_core::fallback::FallbackConfig;
use pqf_core::modifier::ModifierConfig;
use pqf_core::normeq::FactorConfig;
use pqf_core::protocol::{build_pqf, simulate, PqfProtocol, ProtocolConfig};
use pqf_core::PqfError;

#[derive(Parser)]
#[command(name = "pqf", version, about = "Probabilistic circuits with fallback for Z-rotations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Synthesize one protocol and print it.
    Synth(SynthArgs),
    /// Benchmark random angles and fit the mean cost.
    Bench(BenchArgs),
    /// Monte-Carlo walk over a protocol file.
    Simulate(SimArgs),
    /// Run the built-in oracle checks.
    Selftest,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone)]
struct Common {
    #[arg(long, default_value = "t", value_parser = parse_basis)]
    basis: Basis,
    #[arg(long, default_value_t = 1)]
    rounds: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Stage-1 working precision in bits.
    #[arg(long)]
    precision_bits: Option<u32>,
    /// Modifier candidate budget per round.
    #[arg(long)]
    candidate_budget: Option<u32>,
    /// Pollard-rho step budget for norm equations.
    #[arg(long)]
    factor_budget: Option<u64>,
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    common: Common,
    /// Radians, or a rational multiple of pi such as 3*pi/8.
    #[arg(long, allow_hyphen_values = true)]
    theta: String,
    #[arg(long, default_value = "1e-10")]
    eps: String,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value_t = 100)]
    angles: usize,
    #[arg(long, default_value = "1e-10,1e-15,1e-20,1e-25")]
    eps_list: String,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Args)]
struct SimArgs {
    /// Protocol JSON as written by `synth`.
    #[arg(long)]
    protocol: String,
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<String>,
}

fn parse_basis(s: &str) -> Result<Basis, String> {
    s.parse::<Basis>().map_err(|e| e.to_string())
}

enum Failure {
    Core(PqfError),
    Io(String),
}

impl From<PqfError> for Failure {
    fn from(e: PqfError) -> Self {
        Failure::Core(e)
    }
}

fn exit_code(e: &PqfError) -> u8 {
    match e {
        PqfError::InvalidInput(_) | PqfError::MixedRing(..) | PqfError::PreconditionViolated(_) => 2,
        PqfError::AssumptionFailure { .. } | PqfError::IterationCap { .. } | PqfError::NotAdjustable | PqfError::GridFailure(_) => 3,
        PqfError::PrecisionExhausted { .. } => 4,
        PqfError::Verification(_) => 5,
        PqfError::InternalReductionFailure(_) => 1,
    }
}

fn config(c: &Common) -> ProtocolConfig {
    let factor = c.factor_budget.map_or_else(FactorConfig::default, |b| FactorConfig { rho_budget: b });
    ProtocolConfig {
        modifier: ModifierConfig { factor, budget: c.candidate_budget },
        fallback: FallbackConfig { factor, seed: c.seed, ..FallbackConfig::default() },
        prec: c.precision_bits,
    }
}

fn emit(out: &Option<String>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::Io(format!("{path}: {e}"))),
        None => {
            let mut s = std::io::stdout().lock();
            s.write_all(text.as_bytes()).map_err(|e| Failure::Io(e.to_string()))
        }
    }
}

fn synth_cmd(a: &SynthArgs) -> Result<(), Failure> {
    let theta = Angle::parse(&a.theta)?;
    let eps = Eps::parse(&a.eps)?;
    let t0 = std::time::Instant::now();
    let p = build_pqf(&theta, &eps, a.common.rounds, a.common.basis, &config(&a.common))?;
    info!("synthesized in {:.3}s", t0.elapsed().as_secs_f64());
    for (j, r) in p.rounds.iter().enumerate() {
        if let Some(s) = &r.stats {
            info!("round {}: L = {}, p = {:.6}, pslq {} its, {} modifier candidates", j + 1, r.unitary.l(), r.p_success, s.pslq_iterations, s.modifier_candidates);
        }
    }
    let text = match a.format {
        Format::Json => p.to_json_string() + "\n",
        Format::Csv => {
            let ds = p.verify()?;
            let r0 = p.rounds.first();
            format!(
                "basis,theta,eps,rounds,expected_cost,cost_variance,p_success,L_r,fallback_cost,max_distance\n{},{},{},{},{:.6},{:.6},{:.9},{},{},{:.3e}\n",
                p.basis.name(),
                a.theta,
                eps.exact_repr(),
                p.rounds.len(),
                p.expected_cost,
                p.cost_variance,
                r0.map_or(1.0, |r| r.p_success),
                r0.map_or(0, |r| r.unitary.l()),
                p.fallback.as_ref().map_or(0, |f| f.cost()),
                ds.iter().cloned().fold(0.0, f64::max)
            )
        }
    };
    emit(&a.common.out, &text)
}

fn bench_cmd(a: &BenchArgs) -> Result<(), Failure> {
    let eps: Vec<Eps> = a.eps_list.split(',').map(|s| Eps::parse(s.trim())).collect::<Result<_, _>>()?;
    if a.angles == 0 {
        return Err(PqfError::InvalidInput("--angles must be positive".into()).into());
    }
    let basis = a.common.basis;
    let angles = bench::random_angles(a.angles, a.common.seed);
    let rows = bench::run(basis, &angles, &eps, a.common.rounds, &config(&a.common));
    let b = bench::log_base(basis);
    let pts: Vec<(f64, f64)> = rows.iter().filter(|r| r.ok()).map(|r| (r.log_inv_eps, r.expected_cost)).collect();
    let free = bench::fit(&pts, b);
    let reference = bench::reference_fit(basis);
    let fixed = bench::fit_fixed_c(&pts, b, reference.c);
    let failed = rows.iter().filter(|r| !r.ok()).count();
    let text = match a.format {
        Format::Csv => {
            let mut s = format!(
                "# pqf {} bench basis={} angles={} eps={} rounds={} seed={}\n{}\n",
                env!("CARGO_PKG_VERSION"),
                basis.name(),
                a.angles,
                a.eps_list,
                a.common.rounds,
                a.common.seed,
                BenchRow::HEADER
            );
            for r in &rows {
                s += &r.csv();
                s.push('\n');
            }
            for (e, x, m, n) in bench::means_by_eps(&rows) {
                s += &format!("# mean eps={e} n={n} cost={m:.4} reference={:.4}\n", reference.eval(x, b));
            }
            if let Some(f) = free {
                s += &format!("# fit a={:.4} c={:.4} d={:.4}\n", f.a, f.c, f.d);
            }
            if let Some(f) = fixed {
                s += &format!("# fit_fixed_c a={:.4} c={:.4} d={:.4}\n", f.a, f.c, f.d);
            }
            s += &format!("# failed={failed}\n");
            s
        }
        Format::Json => {
            let v = serde_json::json!({
                "version": env!("CARGO_PKG_VERSION"),
                "basis": basis,
                "angles": a.angles,
                "eps_list": a.eps_list,
                "rounds": a.common.rounds,
                "seed": a.common.seed,
                "rows": rows,
                "means": bench::means_by_eps(&rows),
                "fit": free,
                "fit_fixed_c": fixed,
                "failed": failed,
            });
            serde_json::to_string_pretty(&v).expect("plain data") + "\n"
        }
    };
    emit(&a.common.out, &text)
}

fn simulate_cmd(a: &SimArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&a.protocol).map_err(|e| Failure::Io(format!("{}: {e}", a.protocol)))?;
    let p = PqfProtocol::from_json_str(&text)?;
    let r = simulate(&p, a.trials, a.seed)?;
    emit(&a.out, &(serde_json::to_string_pretty(&r).expect("plain data") + "\n"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter("PQF_LOG")).init();
    let cli = Cli::parse();
    let res = match &cli.cmd {
        Cmd::Synth(a) => synth_cmd(a),
        Cmd::Bench(a) => bench_cmd(a),
        Cmd::Simulate(a) => simulate_cmd(a),
        Cmd::Selftest => {
            return if selftest::run() { ExitCode::SUCCESS } else { ExitCode::from(1) };
        }
    };
    match res {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
        Err(Failure::Io(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
    }
}
