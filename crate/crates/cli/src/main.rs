//! `dast`: derive semantic lattices, score complexity, and evaluate judgments and corpora.
//!
//! Exit codes: 0 success, 1 I/O, 2 validation or parse error, 3 derivation limit
//! exceeded, 4 data-schema error.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use dast_core::complexity::{ComplexityReport, DimensionPolicy, Measure, Schema, ValueConfig};
use dast_core::corpus::{ingest_corpus, CorpusReport, ReportOptions};
use dast_core::derive::{derive_text, DerivationLimits, DeriveError, Lattice};
use dast_core::judgment::{dast_judge, score, HumanJudgmentSet, JudgmentVector};
use dast_core::logic::{parse_logic_with, LogicError, ParseOptions, SemanticLogic};
use dast_core::markov::{
    deviation_pmf, fit_alpha, fit_alphas_per_step, model_json, simulate, MarkovParams,
};
use dast_core::report::{number, numbers, render};

#[derive(Debug, Parser)]
#[command(name = "dast", version, about = "Semantic complexity from rule-based derivations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Check a rule file and print its statistics.
    Validate {
        #[arg(long)]
        logic: PathBuf,
        /// Require every symbol to be declared as an intuition or operator.
        #[arg(long)]
        strict: bool,
    },
    /// Derive the lattice of a text.
    Derive {
        #[command(flatten)]
        input: TextInput,
        #[command(flatten)]
        limits: LimitArgs,
        /// Print only the derived terms, one per line.
        #[arg(long)]
        terms_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Node values, semantic point, DASTEX, and overall complexity of a text.
    Complexity {
        #[command(flatten)]
        input: TextInput,
        /// Read a lattice written by `derive` instead of deriving one.
        #[arg(long, conflicts_with_all = ["text", "binding"])]
        lattice: Option<PathBuf>,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        values: ValueArgs,
        /// Also report log-normalized node values.
        #[arg(long)]
        log_normalize: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Judge five sentences with the comparison bracket.
    Compare {
        #[command(flatten)]
        input: TextInput,
        #[command(flatten)]
        limits: LimitArgs,
        #[command(flatten)]
        values: ValueArgs,
        /// Which complexity decides each comparison.
        #[arg(long, value_enum, default_value = "overall")]
        complexity: MeasureArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score human judgments against an automatic judgment.
    Score {
        /// Automatic judgment JSON (`{"a":[..],"b":[..],"c":[..],"d":[..]}`).
        #[arg(long)]
        dj: PathBuf,
        /// Human judgments CSV (`participant_id,a,b,c,d,agreement`).
        #[arg(long)]
        hj: PathBuf,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Difficulty-ratio report for a paragraph-pair corpus.
    Corpus {
        #[arg(long)]
        corpus: PathBuf,
        /// Round overall ratios to this many decimals before computing errors.
        #[arg(long)]
        dr_decimals: Option<u32>,
        /// Reference metric for error percentages (repeatable).
        #[arg(long = "reference")]
        references: Vec<String>,
        /// Topic to leave out of the per-genre regressions (repeatable).
        #[arg(long)]
        exclude: Vec<String>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Deviation-count model of four-step judgments.
    Markov {
        /// One alpha shared by all four steps.
        #[arg(long, conflicts_with = "alphas")]
        alpha: Option<f64>,
        /// Four comma-separated per-step alphas.
        #[arg(long, value_delimiter = ',')]
        alphas: Option<Vec<f64>>,
        /// Fit a shared alpha to five comma-separated observed shares.
        #[arg(long, value_delimiter = ',', conflicts_with_all = ["alpha", "alphas"])]
        fit: Option<Vec<f64>>,
        /// Also fit per-step alphas (not identifiable; reported with a flag).
        #[arg(long, requires = "fit")]
        per_step: bool,
        /// Simulate this many participants.
        #[arg(long, requires = "seed")]
        simulate: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct TextInput {
    #[arg(long)]
    logic: PathBuf,
    /// Text to quantize; a bound text symbol such as `#S` selects its binding.
    #[arg(long)]
    text: Vec<String>,
    /// Bind a text symbol, `#SYM=TERM`, and derive from it.
    #[arg(long)]
    binding: Vec<String>,
}

#[derive(Debug, Args)]
struct LimitArgs {
    #[arg(long, default_value_t = DerivationLimits::default().max_iterations)]
    max_iter: usize,
    #[arg(long, default_value_t = DerivationLimits::default().max_term_depth)]
    max_depth: usize,
}

impl LimitArgs {
    fn limits(&self) -> DerivationLimits {
        DerivationLimits {
            max_iterations: self.max_iter,
            max_term_depth: self.max_depth,
        }
    }
}

#[derive(Debug, Args)]
struct ValueArgs {
    #[arg(long, value_enum, default_value = "product")]
    schema: SchemaArg,
    /// Weight for a rule tag under the tagged schema, `TAG=W` (repeatable).
    #[arg(long = "tag-weight")]
    tag_weights: Vec<String>,
    #[arg(long, default_value_t = 2.0)]
    log_base: f64,
    /// Dimensions of the semantic point: maximal, all, or top:K.
    #[arg(long, default_value = "maximal")]
    dims: DimensionPolicy,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemaArg {
    Product,
    Tagged,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum MeasureArg {
    Overall,
    Dastex,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

enum Failure {
    Io(String),
    Invalid(String),
    Limit { message: String, partial: String },
    Data(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Io(_) => 1,
            Failure::Invalid(_) => 2,
            Failure::Limit { .. } => 3,
            Failure::Data(_) => 4,
        }
    }
}

type Outcome = Result<String, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn logic_diagnostic(path: &Path, err: &LogicError) -> String {
    let p = path.display();
    match err {
        LogicError::Syntax { line, column, message } => format!("{p}:{line}:{column}: syntax error: {message}"),
        LogicError::Invalid { line, message } => format!("{p}:{line}: {message}"),
        LogicError::UndeclaredSymbol { line, symbol, theory } => {
            format!("{p}:{line}: undeclared symbol `{symbol}` in theory `{theory}`")
        }
        LogicError::CyclicBinding { symbol } => format!("{p}: cyclic binding through {symbol}"),
    }
}

fn load_logic(path: &Path, strict: bool) -> Result<SemanticLogic, Failure> {
    let src = read(path)?;
    parse_logic_with(&src, ParseOptions { strict }).map_err(|e| Failure::Invalid(logic_diagnostic(path, &e)))
}

/// The logic (possibly extended with bindings) and the texts to derive from it.
fn sentences(input: &TextInput) -> Result<(SemanticLogic, Vec<String>), Failure> {
    let mut logic = load_logic(&input.logic, false)?;
    let mut texts = input.text.clone();
    for b in &input.binding {
        let (sym, term) = b
            .split_once('=')
            .ok_or_else(|| Failure::Invalid(format!("binding `{b}` must look like #SYM=TERM")))?;
        let sym = sym.trim();
        let term = logic
            .parse_term(term.trim())
            .map_err(|e| Failure::Invalid(format!("binding `{b}`: {e}")))?;
        logic = logic
            .with_binding(sym, term)
            .map_err(|e| Failure::Invalid(format!("binding `{b}`: {e}")))?;
        texts.push(sym.to_string());
    }
    Ok((logic, texts))
}

fn single_text(input: &TextInput) -> Result<(SemanticLogic, String), Failure> {
    let (logic, mut texts) = sentences(input)?;
    match texts.len() {
        1 => Ok((logic, texts.remove(0))),
        0 => Err(Failure::Invalid("one --text or --binding is required".into())),
        n => Err(Failure::Invalid(format!("expected one --text or --binding, got {n}"))),
    }
}

fn run_derive(text: &str, logic: &SemanticLogic, limits: DerivationLimits) -> Result<Lattice, Failure> {
    derive_text(text, logic, limits).map_err(|e| match e {
        DeriveError::LimitExceeded { limit, partial } => Failure::Limit {
            message: format!("derivation stopped: limit {limit} exceeded"),
            partial: render(&partial.to_json()),
        },
        DeriveError::BadLimits | DeriveError::Quantize(_) => Failure::Invalid(e.to_string()),
        other => Failure::Data(other.to_string()),
    })
}

fn value_config(args: &ValueArgs) -> Result<ValueConfig, Failure> {
    let mut tag_weights = BTreeMap::new();
    for tw in &args.tag_weights {
        let parsed = tw
            .split_once('=')
            .and_then(|(t, w)| w.trim().parse::<f64>().ok().map(|w| (t.trim().to_string(), w)));
        let (tag, w) = parsed.ok_or_else(|| Failure::Invalid(format!("tag weight `{tw}` must look like TAG=W")))?;
        tag_weights.insert(tag, w);
    }
    let config = ValueConfig {
        schema: match args.schema {
            SchemaArg::Product => Schema::Product,
            SchemaArg::Tagged => Schema::Tagged,
        },
        tag_weights,
        log_base: args.log_base,
    };
    config.validate().map_err(|e| Failure::Invalid(e.to_string()))?;
    Ok(config)
}

fn cmd_validate(logic: &Path, strict: bool) -> Outcome {
    let parsed = load_logic(logic, strict)?;
    Ok(render(&json!({
        "logic_id": parsed.id(),
        "stats": serde_json::to_value(parsed.stats()).expect("stats serialize"),
    })))
}

fn cmd_derive(input: &TextInput, limits: &LimitArgs, terms_only: bool) -> Outcome {
    let (logic, text) = single_text(input)?;
    let lattice = run_derive(&text, &logic, limits.limits())?;
    if terms_only {
        Ok(lattice.terms().iter().map(|t| format!("{t}\n")).collect())
    } else {
        Ok(render(&lattice.to_json()))
    }
}

fn cmd_complexity(
    input: &TextInput,
    lattice_path: Option<&Path>,
    limits: &LimitArgs,
    values: &ValueArgs,
    log_normalize: bool,
) -> Outcome {
    let config = value_config(values)?;
    let (logic, lattice) = match lattice_path {
        Some(path) => {
            let logic = load_logic(&input.logic, false)?;
            let raw: Value = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            let lattice =
                Lattice::from_json(&raw, &logic).map_err(|e| Failure::Data(format!("{}: {e}", path.display())))?;
            (logic, lattice)
        }
        None => {
            let (logic, text) = single_text(input)?;
            let lattice = run_derive(&text, &logic, limits.limits())?;
            (logic, lattice)
        }
    };
    let report = ComplexityReport::compute(&lattice, &logic, &config, values.dims, log_normalize)
        .map_err(|e| Failure::Data(e.to_string()))?;
    Ok(render(&report.to_json()))
}

fn cmd_compare(input: &TextInput, limits: &LimitArgs, values: &ValueArgs, measure: MeasureArg) -> Outcome {
    let config = value_config(values)?;
    let (logic, texts) = sentences(input)?;
    if texts.len() != 5 {
        return Err(Failure::Invalid(format!(
            "compare needs exactly five sentences, got {}",
            texts.len()
        )));
    }
    let measure = match measure {
        MeasureArg::Overall => Measure::Overall,
        MeasureArg::Dastex => Measure::Dastex,
    };
    let mut scores = Vec::with_capacity(5);
    for text in &texts {
        let lattice = run_derive(text, &logic, limits.limits())?;
        let report = ComplexityReport::compute(&lattice, &logic, &config, values.dims, false)
            .map_err(|e| Failure::Data(e.to_string()))?;
        scores.push(report.measure(measure));
    }
    let dj = dast_judge(&scores).map_err(|e| Failure::Data(e.to_string()))?;
    let mut out = dj.to_json();
    out["values"] = numbers(&scores);
    Ok(render(&out))
}

fn cmd_score(dj: &Path, hj: &Path, format: Format) -> Outcome {
    let raw: Value =
        serde_json::from_str(&read(dj)?).map_err(|e| Failure::Data(format!("{}: {e}", dj.display())))?;
    let dj_vec = JudgmentVector::from_json(&raw).map_err(|e| Failure::Data(format!("{}: {e}", dj.display())))?;
    let file = fs::File::open(hj).map_err(|e| Failure::Io(format!("{}: {e}", hj.display())))?;
    let humans = HumanJudgmentSet::from_csv(file).map_err(|e| Failure::Data(format!("{}: {e}", hj.display())))?;
    let report = score(&dj_vec, &humans);
    match format {
        Format::Json => Ok(render(&report.to_json())),
        Format::Csv => {
            let p = &report.precision;
            let mut out = String::from("metric,value\n");
            for (name, v) in [
                ("overall", p.overall),
                ("no_deviation", p.no_deviation),
                ("comp_steps", p.comp_steps),
            ] {
                out.push_str(&format!("{name},{}\n", number(v)));
            }
            for (k, v) in p.deviation_shares.iter().enumerate() {
                out.push_str(&format!("deviation_{k},{}\n", number(*v)));
            }
            for (k, v) in report.vote_values.iter().enumerate() {
                out.push_str(&format!("vote_s{},{}\n", k + 1, number(*v)));
            }
            Ok(out)
        }
    }
}

fn cmd_corpus(
    corpus: &Path,
    dr_decimals: Option<u32>,
    references: &[String],
    exclude: &[String],
    format: Format,
) -> Outcome {
    let file = fs::File::open(corpus).map_err(|e| Failure::Io(format!("{}: {e}", corpus.display())))?;
    let pairs = ingest_corpus(file).map_err(|e| Failure::Data(format!("{}: {e}", corpus.display())))?;
    let mut options = ReportOptions {
        dr_decimals,
        exclude: exclude.to_vec(),
        ..ReportOptions::default()
    };
    if !references.is_empty() {
        options.references = references.to_vec();
    }
    let report = CorpusReport::build(&pairs, &options);
    match format {
        Format::Json => Ok(render(&report.to_json(exclude))),
        Format::Csv => Ok(report.to_csv()),
    }
}

fn cmd_markov(
    alpha: Option<f64>,
    alphas: Option<&[f64]>,
    fit: Option<&[f64]>,
    per_step: bool,
    sim: Option<(usize, u64)>,
) -> Outcome {
    let invalid = |e: dast_core::markov::MarkovError| Failure::Invalid(e.to_string());
    let (params, fitted) = match (alpha, alphas, fit) {
        (_, _, Some(observed)) => {
            let observed: [f64; 5] = observed
                .try_into()
                .map_err(|_| Failure::Invalid(format!("--fit takes 5 shares, got {}", observed.len())))?;
            let f = fit_alpha(&observed).map_err(invalid)?;
            (MarkovParams::shared(f.alpha).map_err(invalid)?, Some((f, observed)))
        }
        (Some(a), None, None) => (MarkovParams::shared(a).map_err(invalid)?, None),
        (None, Some(list), None) => {
            let list: [f64; 4] = list
                .try_into()
                .map_err(|_| Failure::Invalid(format!("--alphas takes 4 values, got {}", list.len())))?;
            (MarkovParams::new(list).map_err(invalid)?, None)
        }
        _ => return Err(Failure::Invalid("one of --alpha, --alphas, or --fit is required".into())),
    };
    let pmf = deviation_pmf(&params);
    let mut out = model_json(&params, &pmf, fitted.as_ref().map(|(f, _)| f));
    if let (true, Some((_, observed))) = (per_step, &fitted) {
        let steps = fit_alphas_per_step(observed).map_err(invalid)?;
        out["per_step_fit"] = json!({
            "alphas": numbers(&steps.alphas),
            "residual": number(steps.residual),
            "underdetermined": steps.underdetermined,
        });
    }
    if let Some((n, seed)) = sim {
        let shares = simulate(&params, n, seed).map_err(invalid)?;
        out["simulation"] = json!({ "n": n, "seed": seed, "pmf": numbers(&shares) });
    }
    Ok(render(&out))
}

fn emit(out: Option<&Path>, body: &str) -> Result<(), Failure> {
    match out {
        Some(path) => fs::write(path, body).map_err(|e| Failure::Io(format!("{}: {e}", path.display()))),
        None => {
            print!("{body}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (result, out) = match &cli.command {
        Command::Validate { logic, strict } => (cmd_validate(logic, *strict), None),
        Command::Derive {
            input,
            limits,
            terms_only,
            out,
        } => (cmd_derive(input, limits, *terms_only), out.as_deref()),
        Command::Complexity {
            input,
            lattice,
            limits,
            values,
            log_normalize,
            out,
        } => (
            cmd_complexity(input, lattice.as_deref(), limits, values, *log_normalize),
            out.as_deref(),
        ),
        Command::Compare {
            input,
            limits,
            values,
            complexity,
            out,
        } => (cmd_compare(input, limits, values, *complexity), out.as_deref()),
        Command::Score { dj, hj, format, out } => (cmd_score(dj, hj, *format), out.as_deref()),
        Command::Corpus {
            corpus,
            dr_decimals,
            references,
            exclude,
            format,
            out,
        } => (
            cmd_corpus(corpus, *dr_decimals, references, exclude, *format),
            out.as_deref(),
        ),
        Command::Markov {
            alpha,
            alphas,
            fit,
            per_step,
            simulate,
            seed,
            out,
        } => (
            cmd_markov(
                *alpha,
                alphas.as_deref(),
                fit.as_deref(),
                *per_step,
                simulate.zip(*seed),
            ),
            out.as_deref(),
        ),
    };
    match result {
        Ok(body) => emit(out, &body),
        Err(Failure::Limit { message, partial }) => {
            emit(out, &partial)?;
            Err(Failure::Limit {
                message,
                partial: String::new(),
            })
        }
        Err(e) => Err(e),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(failure) => {
            let message = match &failure {
                Failure::Io(m) | Failure::Invalid(m) | Failure::Data(m) => m,
                Failure::Limit { message, .. } => message,
            };
            eprintln!("dast: {message}");
            ExitCode::from(failure.code())
        }
    }
}
