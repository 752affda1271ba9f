use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};
use codedshard::sim::{
    export_metrics, gamma_min, latency_table, parse_log2, run_simulation, security_bounds, write_fixtures, SimConfig,
};

#[derive(Parser)]
#[command(name = "codedshard", version, about = "Coded sharding simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a multi-epoch simulation and compare against the uncoded chain.
    Simulate {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Directory for metrics.csv and summary.json.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Print the JSON summary instead of the text report.
        #[arg(long)]
        json: bool,
    },
    /// Adversary and straggler tolerance for N nodes, K shards, shard size M.
    Bounds {
        nodes: u64,
        shards: u64,
        /// Shard size, e.g. 1073741824 or 2^30.
        size: String,
        /// Fraction of responses awaited (default 1 - 1/N).
        #[arg(long)]
        gamma: Option<f64>,
        /// Adversary fraction for the inverse query.
        #[arg(long, default_value_t = 0.3)]
        beta: f64,
        #[arg(long)]
        json: bool,
    },
    /// Measured propagation rounds against the closed forms.
    Latency {
        #[arg(long = "K", value_delimiter = ',', default_values_t = [4, 9, 16])]
        shards: Vec<usize>,
        /// Node counts; default {K, (D+1)K, (D+1)^2 K} per (K, D).
        #[arg(long = "N", value_delimiter = ',')]
        nodes: Option<Vec<usize>>,
        #[arg(long = "D", value_delimiter = ',', default_values_t = [1, 2])]
        capacity: Vec<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Write genesis shards and one block as binary fixtures.
    Fixtures {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value = "fixtures")]
        out: PathBuf,
    },
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON file with SimConfig fields; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    q: Option<u64>,
    #[arg(long = "K")]
    shards: Option<usize>,
    #[arg(long = "N")]
    nodes: Option<usize>,
    #[arg(long = "Q")]
    slots: Option<usize>,
    #[arg(long = "D")]
    capacity: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long = "Tmax")]
    t_max: Option<usize>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long)]
    invalid_rate: Option<f64>,
    /// Exact number of invalid transactions per epoch.
    #[arg(long)]
    invalid_count: Option<usize>,
    /// Adversary count, overriding beta.
    #[arg(long)]
    adversaries: Option<usize>,
    /// Straggler count, overriding gamma.
    #[arg(long)]
    stragglers: Option<usize>,
    /// Errors the decoder corrects, default the adversary count.
    #[arg(long)]
    decoder_radius: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Run even if the configuration is outside the guaranteed region.
    #[arg(long)]
    force: bool,
}

impl ConfigArgs {
    fn load(&self) -> anyhow::Result<SimConfig> {
        let mut c = match &self.config {
            Some(path) => {
                let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
            }
            None => SimConfig::default(),
        };
        macro_rules! set {
            ($($flag:ident => $field:ident),*) => {$(
                if let Some(v) = self.$flag { c.$field = v; }
            )*};
        }
        set!(q => q, shards => shards, nodes => nodes, slots => slots, capacity => capacity,
             epochs => epochs, t_max => t_max, d => d, beta => beta, gamma => gamma,
             invalid_rate => invalid_rate, seed => seed);
        if self.invalid_count.is_some() {
            c.invalid_count = self.invalid_count;
        }
        if self.adversaries.is_some() {
            c.adversaries = self.adversaries;
        }
        if self.stragglers.is_some() {
            c.stragglers = self.stragglers;
        }
        if self.decoder_radius.is_some() {
            c.decoder_radius = self.decoder_radius;
        }
        Ok(c)
    }
}

// Up to `places` decimals without trailing zeros.
fn num(x: f64, places: usize) -> String {
    let s = format!("{x:.places$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

fn simulate(cfg: ConfigArgs, out: Option<PathBuf>, json: bool) -> anyhow::Result<ExitCode> {
    let c = cfg.load()?;
    let outcome = run_simulation(&c, cfg.force)?;
    if let Some(dir) = &out {
        export_metrics(&c, &outcome, dir).with_context(|| format!("writing to {}", dir.display()))?;
    }
    if json {
        print!("{}", codedshard::sim::summary_json(&c, &outcome)?);
    } else {
        println!(
            "K={} N={} Q={} D={} Tmax={} d={} adversaries={} stragglers={} threshold={}",
            c.shards,
            c.nodes,
            c.slots,
            c.capacity,
            c.t_max,
            c.d,
            c.adversary_count(),
            c.straggler_count(),
            c.recovery_threshold()
        );
        for r in &outcome.reports {
            println!(
                "epoch {}: rounds {:?} (total {}), invalid {}, abandoned {}, ci_rate {}, agree {}, decode {}",
                r.epoch,
                r.stage_rounds,
                r.total_rounds(),
                r.invalid_count,
                r.abandoned_count,
                r.ci_rate,
                r.indicators_agree,
                match &r.decode_error {
                    None => "ok".to_string(),
                    Some(e) => format!("FAILED ({e})"),
                }
            );
        }
        println!(
            "verdict: {} ({})",
            if outcome.verdict.consistent { "consistent" } else { "INCONSISTENT" },
            outcome.verdict.detail
        );
    }
    let ok = outcome.completed && outcome.verdict.consistent;
    Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(2) })
}

fn bounds(nodes: u64, shards: u64, size: &str, gamma: Option<f64>, beta: f64, json: bool) -> anyhow::Result<()> {
    if nodes == 0 || shards == 0 {
        bail!("N and K must be positive");
    }
    let Some(log2_m) = parse_log2(size) else {
        bail!("cannot read shard size {size:?}; use an integer or 2^e");
    };
    let gamma = gamma.unwrap_or(1.0 - 1.0 / nodes as f64);
    if !(gamma > 0.0 && gamma <= 1.0) {
        bail!("gamma must lie in (0, 1]");
    }
    let at = security_bounds(nodes, shards, log2_m, gamma);
    let limit = security_bounds(nodes, shards, log2_m, 1.0);
    let inv = gamma_min(nodes, shards, log2_m, beta);
    if json {
        let v = serde_json::json!({ "at_gamma": at, "gamma_one": limit, "gamma_min": inv });
        println!("{}", serde_json::to_string_pretty(&v)?);
        return Ok(());
    }
    println!("N = {nodes}, K = {shards}, log2 M = {}", num(log2_m, 6));
    println!(
        "gamma - 2 beta >= {} (approx)  {} (exact)",
        num(at.threshold_approx, 6),
        num(at.threshold_exact, 6)
    );
    for b in [at, limit] {
        println!(
            "gamma = {}: beta_max {} -> {} malicious (approx)  {} -> {} (exact)",
            num(b.gamma, 6),
            num(b.beta_max_approx, 6),
            b.malicious_approx,
            num(b.beta_max_exact, 6),
            b.malicious_exact
        );
    }
    println!(
        "beta = {}: gamma_min {} -> {} results (approx)  {} -> {} (exact)",
        num(beta, 6),
        num(inv.gamma_min_approx, 6),
        inv.awaited_approx,
        num(inv.gamma_min_exact, 6),
        inv.awaited_exact
    );
    Ok(())
}

fn latency(shards: &[usize], nodes: Option<&[usize]>, capacity: &[usize], json: bool) -> anyhow::Result<()> {
    let rows = latency_table(shards, nodes, capacity)?;
    if json {
        println!("{}", serde_json::to_string_pretty(&rows)?);
        return Ok(());
    }
    println!("{:>4} {:>6} {:>3} {:>12} {:>8} {:>9} {:>8}  note", "K", "N", "D", "stages", "measured", "stagewise", "headline");
    for r in &rows {
        let mut note = Vec::new();
        if !r.matches_stagewise() {
            note.push("stage-wise MISMATCH");
        }
        if r.headline_differs() {
            note.push(if r.nodes > r.shards {
                "headline differs: log term counted once"
            } else {
                "headline differs: stage one not rounded up"
            });
        }
        println!(
            "{:>4} {:>6} {:>3} {:>12} {:>8} {:>9} {:>8}  {}",
            r.shards,
            r.nodes,
            r.capacity,
            format!("{:?}", r.measured),
            r.measured_total,
            r.stagewise_total,
            num(r.headline, 3),
            note.join("; ")
        );
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate { cfg, out, json } => simulate(cfg, out, json),
        Command::Bounds {
            nodes,
            shards,
            size,
            gamma,
            beta,
            json,
        } => bounds(nodes, shards, &size, gamma, beta, json).map(|_| ExitCode::SUCCESS),
        Command::Latency {
            shards,
            nodes,
            capacity,
            json,
        } => latency(&shards, nodes.as_deref(), &capacity, json).map(|_| ExitCode::SUCCESS),
        Command::Fixtures { cfg, out } => cfg.load().and_then(|c| {
            for path in write_fixtures(&c, cfg.force, &out)? {
                println!("{}", path.display());
            }
            Ok(ExitCode::SUCCESS)
        }),
    };
    result.unwrap_or_else(|e| {
        eprintln!("error: {e:#}");
        ExitCode::FAILURE
    })
}
