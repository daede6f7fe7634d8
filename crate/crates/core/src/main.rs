use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use vpart::eval::{verify_grid, Evaluator, OracleCounter};
use vpart::io::{parse_point, render, FormulaDocument, MatrixDocument, Style};
use vpart::model::validate_problem;
use vpart::{reduce, AugmentedMatrix, Error, FormulaNode, IntColumn, ReductionConfig};

/// Reduce, evaluate and verify vector partition functions.
#[derive(Parser, Debug)]
#[command(name = "vpart", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Latex,
    Text,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Reduce a matrix to a formula.
    Reduce {
        /// Matrix document (JSON).
        matrix: PathBuf,
        /// Elimination order, e.g. `1,0,2`; overrides the document.
        #[arg(long, value_delimiter = ',')]
        row_order: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Evaluate a reduced matrix or a saved formula at a point.
    Eval {
        /// Matrix document; omit when `--formula` is given.
        matrix: Option<PathBuf>,
        /// Formula document produced by `reduce --format json`.
        #[arg(long, conflicts_with = "matrix")]
        formula: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        row_order: Option<Vec<usize>>,
        /// Point, e.g. `1,2,3`.
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Count solutions by brute force.
    Oracle {
        matrix: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        s: String,
    },
    /// Compare a formula with the brute-force count on a grid.
    Verify {
        matrix: PathBuf,
        /// Formula to check instead of reducing the matrix.
        #[arg(long)]
        formula: Option<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        row_order: Option<Vec<usize>>,
        /// Grid is `[0, max]` in every coordinate.
        #[arg(long)]
        max: u32,
        #[arg(long, env = "VPART_WORKERS", default_value_t = 1)]
        workers: usize,
    },
}

/// Failure classes mapped to exit codes.
enum Failure {
    Mismatch(String),
    Input(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Input(e.to_string())
    }
}

fn read(path: &PathBuf) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn load_matrix(path: &PathBuf, row_order: Option<Vec<usize>>) -> Result<(MatrixDocument, AugmentedMatrix), Failure> {
    let doc = MatrixDocument::parse(&read(path)?)?;
    let matrix = doc.to_matrix()?;
    validate_problem(&matrix)?;
    let order = row_order.or_else(|| doc.row_order.clone());
    let matrix = match &order {
        Some(o) => AugmentedMatrix::with_row_order(
            doc.columns.iter().map(|c| IntColumn::from_i64(c)).collect(),
            o,
        )?,
        None => matrix,
    };
    Ok((doc, matrix))
}

fn reduce_document(path: &PathBuf, row_order: Option<Vec<usize>>) -> Result<(MatrixDocument, FormulaDocument), Failure> {
    let (doc, matrix) = load_matrix(path, row_order)?;
    let (root, trace) = reduce(&matrix, &ReductionConfig::default())?;
    Ok((doc.clone(), FormulaDocument::new(doc.l, root, trace)))
}

fn point(text: &str, l: usize) -> Result<Vec<i64>, Failure> {
    let s = parse_point(text)?;
    if s.len() != l {
        return Err(Failure::Input(format!("point has {} coordinates, expected {l}", s.len())));
    }
    Ok(s)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Reduce { matrix, row_order, format } => {
            let (_, doc) = reduce_document(&matrix, row_order)?;
            match format {
                Format::Json => println!("{}", doc.to_json()?),
                Format::Text => print!("{}", render(&doc.root, doc.symbol_count, Style::Text)),
                Format::Latex => print!("{}", render(&doc.root, doc.symbol_count, Style::Latex)),
            }
        }
        Command::Eval { matrix, formula, row_order, s } => {
            let (root, l): (FormulaNode, usize) = match (matrix, formula) {
                (_, Some(f)) => {
                    let doc = FormulaDocument::parse(&read(&f)?)?;
                    (doc.root, doc.symbol_count)
                }
                (Some(m), None) => {
                    let (_, doc) = reduce_document(&m, row_order)?;
                    (doc.root, doc.symbol_count)
                }
                (None, None) => return Err(Failure::Input("a matrix or --formula is required".into())),
            };
            let s = point(&s, l)?;
            println!("{}", Evaluator::new().evaluate(&root, &s)?);
        }
        Command::Oracle { matrix, s } => {
            let doc = MatrixDocument::parse(&read(&matrix)?)?;
            let s = point(&s, doc.l)?;
            let s: Vec<_> = s.into_iter().map(Into::into).collect();
            println!("{}", OracleCounter::new(&doc.big_columns())?.count(&s)?);
        }
        Command::Verify { matrix, formula, row_order, max, workers } => {
            let (doc, root) = match formula {
                Some(f) => {
                    let (doc, _) = load_matrix(&matrix, None)?;
                    (doc, FormulaDocument::parse(&read(&f)?)?.root)
                }
                None => {
                    let (doc, f) = reduce_document(&matrix, row_order)?;
                    (doc, f.root)
                }
            };
            let bounds = vec![(0, i64::from(max)); doc.l];
            let report = verify_grid(&doc.big_columns(), &root, &bounds, workers.max(1))?;
            println!("{} points checked in {:.3}s", report.points, report.elapsed.as_secs_f64());
            if let Some(m) = report.mismatch {
                let at: Vec<String> = m.point.iter().map(i64::to_string).collect();
                let mut msg = format!("mismatch at s=({}): expected {}, got {}", at.join(","), m.expected, m.got);
                for (path, v) in &m.contributions {
                    msg.push_str(&format!("\n  leaf {path:?}: {v}"));
                }
                return Err(Failure::Mismatch(msg));
            }
            println!("{} points verified", report.points);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Mismatch(msg)) => {
            println!("{msg}");
            ExitCode::from(1)
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
