use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use twinsqueeze::config::{parse_config, OutputFormat, RunConfig};
use twinsqueeze::pipeline::{run_pipeline, run_sweep, RunReport};
use twinsqueeze::Error;

#[derive(Parser)]
#[command(name = "twinsqueeze", version, about = "Squeezing eigenmodes of PDC twin beams")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the pipeline selected in the config.
    Run {
        config: PathBuf,
        #[command(flatten)]
        opts: RunOpts,
    },
    /// Parse and validate a config, then print it with defaults filled in.
    Validate { config: PathBuf },
    /// Repeat a run for each value of one parameter.
    Sweep {
        config: PathBuf,
        /// Dotted parameter path, e.g. crystal.length_mm.
        #[arg(long)]
        param: String,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        #[command(flatten)]
        opts: RunOpts,
    },
}

#[derive(Args)]
struct RunOpts {
    /// Output directory (overrides the config).
    #[arg(long, env = "TWINSQUEEZE_OUT")]
    out: Option<PathBuf>,
    #[arg(long, value_parser = ["csv", "json", "both"])]
    format: Option<String>,
    /// Relative gap below which consecutive values form a pair.
    #[arg(long)]
    pairs_tol: Option<f64>,
    /// Mehler series terms.
    #[arg(long)]
    terms: Option<usize>,
}

impl RunOpts {
    fn apply(&self, cfg: &mut RunConfig) -> Result<(), Error> {
        if let Some(out) = &self.out {
            cfg.output.dir = out.clone();
        }
        if let Some(f) = &self.format {
            cfg.output.format = f.parse::<OutputFormat>()?;
        }
        if let Some(t) = self.pairs_tol {
            cfg.pairing_tol = t;
        }
        if let Some(k) = self.terms {
            cfg.mehler_terms = k;
        }
        cfg.validate()
    }
}

fn print_report(r: &RunReport) {
    if let Some(n) = &r.numerical {
        let fit = n.fit.map(|f| format!("{:.5}", f.q)).unwrap_or_else(|| "-".into());
        let ks = n.k_s_geometric.map(|k| format!("{k:.2}")).unwrap_or_else(|| "-".into());
        println!("numerical: r1={:.6e} q_fit={fit} K_S={ks} leakage={:.3e}", n.r1, n.leakage);
        match n.pairing.first_failure {
            Some(i) => println!("pairing: {} values paired, fails at index {i}", n.pairing.accepted_values()),
            None => println!("pairing: all {} values paired", n.pairing.accepted_values()),
        }
    }
    if let Some(a) = &r.analytic {
        let f = &a.factors;
        println!(
            "analytic: q={:.4} tau1={:.2} fs tau2={:.2} fs zeta1={:.5} zeta2={:.5}",
            f.q, f.tau1, f.tau2, f.zeta1, f.zeta2
        );
    }
    if let Some(c) = &r.comparison {
        if let Some(o) = c.overlaps.get(1) {
            println!("overlap k=1: signal={:.5} idler={:.5}", o.signal, o.idler);
        }
    }
    for note in &r.notes {
        println!("note: {note}");
    }
    for f in &r.threshold_failures {
        eprintln!("threshold: {f}");
    }
    if let Some(last) = r.manifest.last() {
        println!("report: {}", last.path.display());
    }
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Validate { config } => {
            let cfg = parse_config(&config)?;
            print!("{}", cfg.to_toml()?);
            Ok(0)
        }
        Command::Run { config, opts } => {
            let mut cfg = parse_config(&config)?;
            opts.apply(&mut cfg)?;
            let report = run_pipeline(&cfg)?;
            print_report(&report);
            Ok(if report.passed() { 0 } else { 3 })
        }
        Command::Sweep { config, param, values, opts } => {
            let mut cfg = parse_config(&config)?;
            opts.apply(&mut cfg)?;
            let rep = run_sweep(&cfg, &param, &values)?;
            let mut code = 0;
            for row in &rep.rows {
                let fmt = |x: Option<f64>| x.map(|v| format!("{v:.5}")).unwrap_or_else(|| "-".into());
                println!(
                    "{param}={}: exit={} q_fit={} q_analytic={} zeta1={} zeta2={}",
                    row.value,
                    row.exit_code,
                    fmt(row.q_fit),
                    fmt(row.q_analytic),
                    fmt(row.zeta1),
                    fmt(row.zeta2)
                );
                if let Some(e) = &row.error {
                    eprintln!("{param}={}: {e}", row.value);
                }
                if code == 0 {
                    code = row.exit_code;
                }
            }
            println!("summary: {}", rep.manifest[0].path.display());
            Ok(code as u8)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
