use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use compat_poisson::catalog::{parse_specs, Catalog, LieAlgebra};
use compat_poisson::report::{
    self, analyze_pair, analyze_row, catalog_section, report_all, solve, solve_row, validation_section, vielbein_section,
    Metadata, PairFile, ReportDocument, ReportError, Section,
};
use compat_poisson::solver::{self, AnsatzPattern, PatternFile};
use compat_poisson::tables::{self, TableRow};

const EXIT_FAILURE: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_SPECTRUM: u8 = 3;

#[derive(Parser, Debug)]
#[command(name = "compat-poisson", version, about = "Compatible Poisson structures and bi-Hamiltonian systems on Lie groups")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Seed for every random point and parameter value.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Structured)]
    format: Format,
    /// Write the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Extra algebra specs (JSON list) added to the built-in catalog.
    #[arg(long, global = true)]
    catalog: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Structured,
    Human,
}

#[derive(Args, Debug)]
struct AlgebraArgs {
    /// Catalog algebra or table row name, e.g. `A_{4,1}` or `abelian4`.
    #[arg(long)]
    algebra: String,
    /// Parameter value, e.g. `--param a=2`.
    #[arg(long = "param", value_name = "K=V")]
    params: Vec<String>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Catalog algebras and published table rows.
    List,
    /// Structure constants and the left-invariant frame.
    ShowVielbein(AlgebraArgs),
    /// Linear family of affine P' compatible with a constant P, plus quadratic residuals.
    Solve {
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Pattern file: `{"p": ["1,2"], "pprime": [...], "naming": "row_letter", "p_values": {"1,2": "p12"}}`.
        #[arg(long)]
        pattern: Option<PathBuf>,
    },
    /// Schouten brackets of a published pair with symbolic parameters.
    VerifyTable {
        /// Table row name.
        #[arg(long)]
        algebra: String,
    },
    /// Recursion operator, trace integrals, torsion, Lenard chain and involution.
    Analyze {
        #[command(flatten)]
        algebra: AlgebraArgs,
        /// Pair file: `{"p": {"1,2": "1"}, "pprime": {...}, "integrals": [...]}`.
        #[arg(long)]
        pair: Option<PathBuf>,
        /// Number of trace integrals (default: half the dimension).
        #[arg(long)]
        kmax: Option<usize>,
    },
    /// Every published row end to end.
    ReportAll,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Report(ReportError),
}

impl From<ReportError> for CliError {
    fn from(e: ReportError) -> Self {
        CliError::Report(e)
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path, what: &str) -> Result<T, CliError> {
    let text = fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read {what} `{}`: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("invalid {what} `{}`: {e}", path.display())))
}

fn load_catalog(path: Option<&Path>) -> Result<Catalog, CliError> {
    let mut catalog = Catalog::builtin();
    if let Some(path) = path {
        let text =
            fs::read_to_string(path).map_err(|e| CliError::Usage(format!("cannot read catalog `{}`: {e}", path.display())))?;
        for spec in parse_specs(&text).map_err(|e| CliError::Usage(e.to_string()))? {
            catalog.register(spec);
        }
    }
    Ok(catalog)
}

fn lookup(catalog: &Catalog, args: &AlgebraArgs) -> Result<LieAlgebra, CliError> {
    let values = report::parse_params(&args.params)?;
    Ok(catalog.lookup(&args.algebra, &values).map_err(ReportError::from)?)
}

fn find_row(name: &str) -> Result<TableRow, CliError> {
    tables::find(name).ok_or_else(|| CliError::Usage(format!("`{name}` is not a table row; run `list` for the names")))
}

fn metadata(command: &str, seed: u64, args: Option<&AlgebraArgs>) -> Metadata {
    let mut m = Metadata::new(command, seed);
    if let Some(a) = args {
        m.algebra = Some(a.algebra.clone());
        m.params = a
            .params
            .iter()
            .map(|kv| match kv.split_once('=') {
                Some((k, v)) => (k.trim().to_string(), v.trim().to_string()),
                None => (kv.clone(), String::new()),
            })
            .collect::<BTreeMap<_, _>>();
    }
    m
}

fn run(cli: &Cli) -> Result<ReportDocument, CliError> {
    let catalog = load_catalog(cli.catalog.as_deref())?;
    let seed = cli.seed;
    match &cli.command {
        Command::List => {
            Ok(ReportDocument::new(Metadata::new("list", seed), vec![Section::Catalog(catalog_section(&catalog))]))
        }
        Command::ShowVielbein(args) => {
            let alg = lookup(&catalog, args)?;
            let sections = vec![Section::Validation(validation_section(&alg)), Section::Vielbein(vielbein_section(&alg)?)];
            Ok(ReportDocument::new(metadata("show-vielbein", seed, Some(args)), sections))
        }
        Command::Solve { algebra, pattern } => {
            let file: Option<PatternFile> = pattern.as_deref().map(|p| read_json(p, "pattern")).transpose()?;
            let row = tables::find(&algebra.algebra).filter(|_| algebra.params.is_empty());
            let (validation, family) = match row {
                Some(row) => {
                    let alg = row.lie_algebra(&catalog).map_err(ReportError::from)?;
                    (validation_section(&alg), solve_row(&row, &catalog, file.as_ref(), seed)?)
                }
                None => {
                    let alg = lookup(&catalog, algebra)?;
                    let file = file.ok_or_else(|| {
                        CliError::Usage(format!("`{}` is not a table row; pass --pattern with p_values", algebra.algebra))
                    })?;
                    let values = file
                        .p_values
                        .as_ref()
                        .ok_or_else(|| CliError::Usage("pattern file needs p_values for this algebra".into()))?;
                    let pat = AnsatzPattern::from_file(alg.dim(), &file).map_err(ReportError::from)?;
                    let p = report::matrix_from_entries(alg.dim(), values)?;
                    (validation_section(&alg), solve(&alg, &pat, &p, None, seed)?)
                }
            };
            let sections = vec![Section::Validation(validation), Section::SolverFamily(family)];
            Ok(ReportDocument::new(metadata("solve", seed, Some(algebra)), sections))
        }
        Command::VerifyTable { algebra } => {
            let row = find_row(algebra)?;
            let v = solver::verify_table(&row.row, &catalog).map_err(ReportError::from)?;
            let mut m = Metadata::new("verify-table", seed);
            m.algebra = Some(row.row.clone());
            Ok(ReportDocument::new(m, vec![Section::Compatibility(v)]))
        }
        Command::Analyze { algebra, pair, kmax } => {
            let mut m = metadata("analyze", seed, Some(algebra));
            let sections = match pair {
                Some(path) => {
                    let pair: PairFile = read_json(path, "pair")?;
                    let alg = lookup(&catalog, algebra)?;
                    let k = kmax.unwrap_or(alg.dim() / 2);
                    m.k_max = Some(k);
                    let label = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
                    let (compat, biham) = analyze_pair(&alg, &pair, &label, k, seed)?;
                    vec![Section::Compatibility(compat), Section::BiHamiltonian(biham)]
                }
                None => {
                    let row = find_row(&algebra.algebra)?;
                    let k = kmax.unwrap_or(row.dim() / 2);
                    m.k_max = Some(k);
                    let compat = solver::verify_table(&row.row, &catalog).map_err(ReportError::from)?;
                    vec![Section::Compatibility(compat), Section::BiHamiltonian(analyze_row(&row, &catalog, k, seed)?)]
                }
            };
            Ok(ReportDocument::new(m, sections))
        }
        Command::ReportAll => {
            let rows = report_all(&catalog, seed).into_iter().map(|r| Section::Row(Box::new(r))).collect();
            Ok(ReportDocument::new(Metadata::new("report-all", seed), rows))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let doc = match run(&cli) {
        Ok(doc) => doc,
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_USAGE);
        }
        Err(CliError::Report(e)) => {
            eprintln!("error: {e}");
            return ExitCode::from(if e.is_unsupported_spectrum() { EXIT_SPECTRUM } else { EXIT_USAGE });
        }
    };
    let text = match cli.format {
        Format::Structured => doc.to_json(),
        Format::Human => doc.to_human(),
    };
    match &cli.out {
        Some(path) => {
            if let Err(e) = fs::write(path, &text) {
                eprintln!("error: cannot write `{}`: {e}", path.display());
                return ExitCode::from(EXIT_USAGE);
            }
        }
        None => print!("{text}"),
    }
    if doc.status.passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    }
}
