//! `qsr` — qualitative spatial reasoning over oriented points.
//!
//! Point specs on the command line are `"x y heading_deg elevation"`:
//! whitespace-separated decimals with the heading in degrees (converted to
//! radians internally).

use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use qsr_core::compose::{CompositionTable, SamplingPlan};
use qsr_core::csp::{algebraic_closure, parse_network, ClosureStatus};
use qsr_core::geometry::{EOPoint, TolerancePolicy};
use qsr_core::opra::Granularity;
use qsr_core::relations::{
    enumerate, parse_relation, parse_relation_infer, relate, CalculusId,
};
use qsr_core::QsrError;

#[derive(Parser)]
#[command(
    name = "qsr",
    version,
    about = "Qualitative spatial reasoning: oriented-point direction and distance calculi",
    long_about = "Qualitative spatial reasoning: oriented-point direction and distance \
calculi (opra, eopra, star, estar).\n\nPoint specs are \"x y heading_deg elevation\": \
whitespace-separated decimals, heading in degrees (internally radians), elevation a \
strictly positive apex height (use 1 for the pure direction calculi)."
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Granularity (sectors per quarter-turn scale parameter)
    #[arg(long, global = true, default_value_t = 2)]
    m: u32,

    /// Calculus: opra | eopra | star | estar
    #[arg(long, global = true, default_value = "opra")]
    calculus: String,

    /// Samples per open qualitative dimension during table generation
    #[arg(long, global = true, default_value_t = 3)]
    density: u32,

    /// Seed for table generation and verification sampling
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Absolute tolerance for angle comparisons, radians
    #[arg(long, global = true, default_value_t = 1e-9)]
    angle_eps: f64,

    /// Relative tolerance for length comparisons
    #[arg(long, global = true, default_value_t = 1e-9)]
    len_eps: f64,

    /// Machine mode: exactly one stable record per result line
    #[arg(long, global = true)]
    machine: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the base relation between two points
    Relate {
        /// opra | eopra | star | estar
        calculus: String,
        /// granularity
        m: u32,
        /// first point: "x y heading_deg elevation"
        a: String,
        /// second point: "x y heading_deg elevation"
        b: String,
    },
    /// Print the converse of a relation
    Converse {
        /// relation text, e.g. 2:7-1, 2:s0, 2:7.0-7.2, star-2:1, estar-2:1.0.2
        relation: String,
    },
    /// List every base relation of the selected calculus (see --calculus, --m)
    Enumerate,
    /// Composition-table operations
    #[command(subcommand)]
    Table(TableCmd),
    /// Algebraic closure (path consistency) over a constraint network file
    Solve {
        /// network file in the #qsr-net v1 format
        network: PathBuf,
        /// table file; defaults to <QSR_TABLE_DIR|tables>/<calculus>-<m>.tbl
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum TableCmd {
    /// Generate a composition table and write it as a table file
    Gen {
        /// output path; defaults to <QSR_TABLE_DIR|tables>/<calculus>-<m>.tbl
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the composition entry for an ordered relation pair
    Query {
        r: String,
        s: String,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Monte-Carlo soundness check; exits 1 on any violation
    Verify {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long)]
        table: Option<PathBuf>,
    },
    /// Report composition triples whose converse-dual triple is missing
    CheckDuality {
        #[arg(long)]
        table: Option<PathBuf>,
    },
}

/// Process failure with its exit code: 1 negative result, 2 invalid
/// input, 3 missing file.
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Failure {
        Failure {
            code,
            msg: msg.into(),
        }
    }
}

impl From<QsrError> for Failure {
    fn from(e: QsrError) -> Failure {
        let code = match &e {
            QsrError::Io(io) if io.kind() == ErrorKind::NotFound => 3,
            _ => 2,
        };
        Failure::new(code, e.to_string())
    }
}

fn parse_point(spec: &str) -> Result<EOPoint, Failure> {
    let fields: Vec<&str> = spec.split_whitespace().collect();
    if fields.len() != 4 {
        return Err(Failure::new(
            2,
            format!(
                "point spec `{spec}`: expected 4 fields `x y heading_deg elevation`, got {}",
                fields.len()
            ),
        ));
    }
    let mut vals = [0.0f64; 4];
    for (idx, f) in fields.iter().enumerate() {
        vals[idx] = f.parse().map_err(|_| {
            Failure::new(
                2,
                format!("point spec `{spec}`: field {} (`{f}`) is not a number", idx + 1),
            )
        })?;
    }
    let heading = vals[2].to_radians().rem_euclid(std::f64::consts::TAU);
    EOPoint::from_coords(vals[0], vals[1], heading, vals[3])
        .map_err(|e| Failure::new(2, format!("point spec `{spec}`: {e}")))
}

fn parse_calculus(text: &str) -> Result<CalculusId, Failure> {
    CalculusId::from_str(text).map_err(Failure::from)
}

fn parse_m(v: u32) -> Result<Granularity, Failure> {
    Granularity::new(v).map_err(Failure::from)
}

fn default_table_path(calculus: CalculusId, m: Granularity) -> PathBuf {
    let dir = std::env::var_os("QSR_TABLE_DIR")
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("tables"));
    dir.join(format!("{}-{}.tbl", calculus.as_str(), m.get()))
}

fn load_table(path: &Path) -> Result<CompositionTable, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        let code = if e.kind() == ErrorKind::NotFound { 3 } else { 2 };
        Failure::new(code, format!("table file {}: {e}", path.display()))
    })?;
    CompositionTable::from_text(&text)
        .map_err(|e| Failure::new(2, format!("table file {}: {e}", path.display())))
}

fn run(cli: Cli) -> Result<(), Failure> {
    let tol = TolerancePolicy::new(cli.angle_eps, cli.len_eps)?;
    match cli.command {
        Command::Relate { calculus, m, a, b } => {
            let calc = parse_calculus(&calculus)?;
            let m = parse_m(m)?;
            let a = parse_point(&a)?;
            let b = parse_point(&b)?;
            println!("{}", relate(calc, &a, &b, m, &tol));
        }
        Command::Converse { relation } => {
            let r = parse_relation_infer(&relation)?;
            println!("{}", r.converse());
        }
        Command::Enumerate => {
            let calc = parse_calculus(&cli.calculus)?;
            let m = parse_m(cli.m)?;
            for r in enumerate(calc, m) {
                println!("{r}");
            }
        }
        Command::Table(cmd) => {
            let globals = Globals {
                calculus: cli.calculus.clone(),
                m: cli.m,
                density: cli.density,
                seed: cli.seed,
                machine: cli.machine,
            };
            run_table(cmd, &globals, &tol)?
        }
        Command::Solve { network, table } => {
            let text = std::fs::read_to_string(&network).map_err(|e| {
                let code = if e.kind() == ErrorKind::NotFound { 3 } else { 2 };
                Failure::new(code, format!("network file {}: {e}", network.display()))
            })?;
            let net = parse_network(&text)
                .map_err(|e| Failure::new(2, format!("network file {}: {e}", network.display())))?;
            let path = table
                .unwrap_or_else(|| default_table_path(net.calculus(), net.granularity()));
            let tbl = load_table(&path)?;
            let result = algebraic_closure(&net, &tbl)?;
            if !cli.machine {
                for step in &result.trace {
                    println!(
                        "; refined {} {} via {}: {} -> {}",
                        net.nodes()[step.a],
                        net.nodes()[step.b],
                        net.nodes()[step.via],
                        step.before,
                        step.after
                    );
                }
            }
            let nn = net.nodes().len();
            for i in 0..nn {
                for j in (i + 1)..nn {
                    let set = result.network.constraint(i, j);
                    println!(
                        "constraint {} {} {{ {} }}",
                        net.nodes()[i],
                        net.nodes()[j],
                        set.to_text()
                    );
                }
            }
            match result.status {
                ClosureStatus::ConsistentSoFar => println!("STATUS consistent-so-far"),
                ClosureStatus::Inconsistent => {
                    println!("STATUS inconsistent");
                    return Err(Failure::new(1, "network is inconsistent".to_string()));
                }
            }
        }
    }
    Ok(())
}

struct Globals {
    calculus: String,
    m: u32,
    density: u32,
    seed: u64,
    machine: bool,
}

fn run_table(cmd: TableCmd, cli: &Globals, tol: &TolerancePolicy) -> Result<(), Failure> {
    let calc = parse_calculus(&cli.calculus)?;
    let m = parse_m(cli.m)?;
    match cmd {
        TableCmd::Gen { out } => {
            let plan = SamplingPlan::new(cli.density, cli.seed, 8.0)?;
            let table = CompositionTable::generate(calc, m, &plan, tol)?;
            let path = out.unwrap_or_else(|| default_table_path(calc, m));
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)
                        .map_err(|e| Failure::new(2, format!("{}: {e}", dir.display())))?;
                }
            }
            std::fs::write(&path, table.to_text())
                .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?;
            if cli.machine {
                println!("ok {}", path.display());
            } else {
                println!(
                    "wrote {} ({} {} relations, density {}, seed {})",
                    path.display(),
                    table.universe_len(),
                    calc,
                    cli.density,
                    cli.seed
                );
            }
        }
        TableCmd::Query { r, s, table } => {
            let path = table.unwrap_or_else(|| default_table_path(calc, m));
            let tbl = load_table(&path)?;
            let r = parse_relation(tbl.calculus(), &r)?;
            let s = parse_relation(tbl.calculus(), &s)?;
            println!("{}", tbl.entry(&r, &s)?.to_text());
        }
        TableCmd::Verify { trials, table } => {
            let path = table.unwrap_or_else(|| default_table_path(calc, m));
            let tbl = load_table(&path)?;
            let report = tbl.verify(trials, cli.seed, tol)?;
            println!("violations {} {}", report.violations.len(), report.trials);
            if !cli.machine {
                for v in report.violations.iter().take(10) {
                    println!(
                        "; {} o {} observed {}",
                        v.rel_ab, v.rel_bc, v.rel_ac
                    );
                }
            }
            if !report.is_sound() {
                return Err(Failure::new(1, "table verification failed".to_string()));
            }
        }
        TableCmd::CheckDuality { table } => {
            let path = table.unwrap_or_else(|| default_table_path(calc, m));
            let tbl = load_table(&path)?;
            let violations = tbl.duality_violations();
            println!("duality-violations {}", violations.len());
            if !cli.machine {
                for (r, s, t) in violations.iter().take(10) {
                    println!("; {r} o {s} -> {t} lacks its dual");
                }
            }
            if !violations.is_empty() {
                return Err(Failure::new(1, "table is not duality-closed".to_string()));
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            ExitCode::from(f.code)
        }
    }
}
