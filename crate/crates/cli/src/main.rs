use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use entroclust::clustering::InitStrategy;
use entroclust::commands::{
    cmd_cluster, cmd_elbow, cmd_export_dfg, cmd_rank, CommandError, ElbowConfig, ExportConfig, InputFormat,
    InputSpec, KRange, MethodKind, RankConfig, RunConfig,
};
use entroclust::evaluation::Direction;
use entroclust::event_log::{CsvConfig, OrderKind};

#[derive(Parser)]
#[command(name = "entroclust", version, about = "Trace clustering by entropic relevance")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Cluster a log and write the clustering, assignments, DOT graphs and metrics.
    Cluster {
        #[command(flatten)]
        run: RunArgs,
        #[arg(short = 'k', long)]
        k: usize,
    },
    /// Sweep the number of clusters and write elbow.csv.
    Elbow {
        #[command(flatten)]
        run: RunArgs,
        /// Inclusive range such as `2..10`.
        #[arg(long = "k-range")]
        k_range: String,
        /// Further full method tags to sweep, e.g. `random` or `ec-split-ppnorm`.
        #[arg(long = "also")]
        also: Vec<String>,
    },
    /// Rank methods from a methods x logs metric matrix and write ranks.json.
    Rank {
        /// CSV: first column method, one column per log.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value = "er")]
        metric: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Lower)]
        direction: DirectionArg,
        /// Comma-separated subset of log columns.
        #[arg(long, value_delimiter = ',')]
        logs: Option<Vec<String>>,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Export the directly-follows graph of the log or of selected clusters as DOT.
    ExportDfg {
        #[command(flatten)]
        input: InputArgs,
        /// clustering.json produced by `cluster`.
        #[arg(long)]
        clustering: Option<PathBuf>,
        /// Cluster index to export (repeatable); all clusters when omitted.
        #[arg(long = "cluster")]
        clusters: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct InputArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
    format: FormatArg,
    #[arg(long, default_value = "case")]
    case_col: String,
    #[arg(long, default_value = "activity")]
    activity_col: String,
    #[arg(long, default_value = "timestamp")]
    order_col: String,
    #[arg(long, value_enum, default_value_t = OrderArg::Timestamp)]
    order_kind: OrderArg,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    input: InputArgs,
    #[arg(long, value_enum)]
    method: MethodArg,
    #[arg(long, value_enum)]
    init: Option<InitArg>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    /// Count BOS/EOS nodes in graph density and entropy.
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    include_sentinels: bool,
    /// Disable internal parallelism (results are identical).
    #[arg(long)]
    serial: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Xes,
    VariantsJson,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Timestamp,
    Index,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Ec,
    EcSplit,
    Random,
    FreqKmeans,
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Random,
    Pp,
    Ppnorm,
}

#[derive(Clone, Copy, ValueEnum)]
enum DirectionArg {
    Lower,
    Higher,
}

impl InputArgs {
    fn spec(self) -> Result<InputSpec, CommandError> {
        if !self.delimiter.is_ascii() {
            return Err(CommandError::Config("the CSV delimiter must be a single ASCII character".into()));
        }
        Ok(InputSpec {
            path: self.input,
            format: match self.format {
                FormatArg::Csv => InputFormat::Csv,
                FormatArg::Xes => InputFormat::Xes,
                FormatArg::VariantsJson => InputFormat::VariantsJson,
            },
            csv: CsvConfig {
                delimiter: self.delimiter as u8,
                case_col: self.case_col,
                activity_col: self.activity_col,
                order_col: self.order_col,
                order_kind: match self.order_kind {
                    OrderArg::Timestamp => OrderKind::Timestamp,
                    OrderArg::Index => OrderKind::Index,
                },
            },
        })
    }
}

impl RunArgs {
    fn config(self, k: usize) -> Result<RunConfig, CommandError> {
        let method = match self.method {
            MethodArg::Ec => MethodKind::Ec,
            MethodArg::EcSplit => MethodKind::EcSplit,
            MethodArg::Random => MethodKind::Random,
            MethodArg::FreqKmeans => MethodKind::FreqKmeans,
        };
        let mut config = RunConfig::new(self.input.spec()?, method, k, self.seed, self.out);
        config.init = self.init.map(|i| match i {
            InitArg::Random => InitStrategy::Random,
            InitArg::Pp => InitStrategy::PlusPlus,
            InitArg::Ppnorm => InitStrategy::PlusPlusNorm,
        });
        config.include_sentinels = self.include_sentinels;
        config.parallel = !self.serial;
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Cluster { run, k } => {
            let outcome = cmd_cluster(&run.config(k)?)?;
            for line in outcome.summary_lines() {
                println!("{line}");
            }
            let v = outcome.metrics.values;
            println!(
                "weighted: ER {:.4} bits, density {:.4}, entropy {:.4}",
                v.er_avg, v.graph_density, v.graph_entropy
            );
        }
        Command::Elbow { run, k_range, also } => {
            let k_range: KRange = k_range.parse()?;
            let config = ElbowConfig {
                run: run.config(k_range.start)?,
                k_range,
                extra_methods: also,
            };
            let path = cmd_elbow(&config)?;
            println!("wrote {}", path.display());
        }
        Command::Rank {
            input,
            metric,
            direction,
            logs,
            alpha,
            out,
        } => {
            let config = RankConfig {
                matrix: input,
                metric,
                direction: match direction {
                    DirectionArg::Lower => Direction::LowerIsBetter,
                    DirectionArg::Higher => Direction::HigherIsBetter,
                },
                logs,
                alpha,
                out,
            };
            let (report, path) = cmd_rank(&config)?;
            for (method, rank) in &report.avg_ranks {
                println!("{method}: {rank:.3}");
            }
            if let (Some(chi2), Some(p)) = (report.friedman_chi2, report.p_value) {
                println!("Friedman chi2 = {chi2:.3}, p = {p:.3e}");
            }
            for note in &report.notes {
                println!("note: {note}");
            }
            println!("wrote {}", path.display());
        }
        Command::ExportDfg {
            input,
            clustering,
            clusters,
            out,
        } => {
            let config = ExportConfig {
                input: input.spec()?,
                clustering,
                clusters,
                out,
            };
            for path in cmd_export_dfg(&config)? {
                println!("wrote {}", path.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
