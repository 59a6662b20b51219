//! Command-line front end. [`run`] parses arguments, executes one
//! subcommand and returns the process exit status.

use std::ffi::OsString;
use std::fmt::Display;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::format;
use crate::fstruct::{Corpus, FeatureStructure};
use crate::pcfg::{self, Pcfg, Tree};
use crate::pth::{self, PthParams};
use crate::reentrancy;
use crate::signature::Signature;
use crate::train::{self, FitOptions};

pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "probtfs",
    version,
    about = "Probabilistic type hierarchies over typed feature structures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Inspect a signature.
    #[command(subcommand)]
    Sig(SigCommand),
    /// Estimate parameters from a corpus of structures.
    Train(TrainArgs),
    /// Print the probability of each structure in a file.
    Score(ScoreArgs),
    /// Print structures sorted by probability, highest first.
    Rank(ScoreArgs),
    /// List every structure up to a node bound with its probability.
    Enumerate(EnumerateArgs),
    /// Leaked mass for each node bound from 1 up to --max-nodes.
    Leak(LeakArgs),
    /// Draw seeded samples.
    Sample(SampleArgs),
    /// Context-free baseline.
    #[command(subcommand)]
    Pcfg(PcfgCommand),
}

#[derive(Subcommand, Debug)]
enum SigCommand {
    /// Validate a signature file.
    Check { sig: PathBuf },
    /// Print the introduction relations, one per line.
    Relations { sig: PathBuf },
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum EstimatorKind {
    Count,
    Conditional,
}

#[derive(Args, Debug)]
struct FitArgs {
    /// Convergence tolerance of the conditional estimator.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Iteration limit of the conditional estimator.
    #[arg(long, default_value_t = 10_000)]
    max_iters: usize,
}

impl FitArgs {
    fn options(&self) -> FitOptions {
        FitOptions {
            tol: self.tol,
            max_iters: self.max_iters,
        }
    }
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    sig: PathBuf,
    #[arg(long)]
    corpus: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Count)]
    estimator: EstimatorKind,
    /// Admissible structures for the conditional estimator.
    #[arg(long, conflicts_with = "support_max_nodes")]
    support: Option<PathBuf>,
    /// Use every structure up to this many nodes as the support.
    #[arg(long)]
    support_max_nodes: Option<usize>,
    /// Restrict an enumerated support to the structures listed here.
    #[arg(long, requires = "support_max_nodes")]
    admissible: Option<PathBuf>,
    /// Initial parameters; uniform when absent.
    #[arg(long)]
    init: Option<PathBuf>,
    /// Parameter file to write; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the transition counts.
    #[arg(long)]
    counts_out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct ModelArgs {
    #[arg(long)]
    sig: PathBuf,
    #[arg(long)]
    params: PathBuf,
}

#[derive(Args, Debug)]
struct ScoreArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Score with pairwise equate factors; tagged structures allowed.
    #[arg(long)]
    reentrant: bool,
    /// Natural-log probabilities.
    #[arg(long)]
    log: bool,
    structures: PathBuf,
}

#[derive(Args, Debug)]
struct EnumerateArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    max_nodes: usize,
    #[arg(long)]
    reentrant: bool,
    #[arg(long)]
    log: bool,
}

#[derive(Args, Debug)]
struct LeakArgs {
    #[command(flatten)]
    model: ModelArgs,
    #[arg(long)]
    max_nodes: usize,
}

#[derive(Args, Debug)]
struct SampleArgs {
    #[command(flatten)]
    model: ModelArgs,
    /// Sample i uses seed + i.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    count: u64,
    #[arg(long)]
    reentrant: bool,
    /// Rejected runs tolerated per re-entrant sample.
    #[arg(long, default_value_t = 1000, requires = "reentrant")]
    max_retries: usize,
    /// Refinements allowed per run.
    #[arg(long, default_value_t = 10_000)]
    max_steps: usize,
}

#[derive(Subcommand, Debug)]
enum PcfgCommand {
    /// Re-estimate rule probabilities from a treebank.
    Train(PcfgTrainArgs),
    /// Print the probability of each tree.
    Score(PcfgScoreArgs),
    /// Print trees sorted by probability, highest first.
    Rank(PcfgScoreArgs),
}

#[derive(Args, Debug)]
struct PcfgTrainArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    treebank: PathBuf,
    #[arg(long, value_enum, default_value_t = EstimatorKind::Count)]
    estimator: EstimatorKind,
    /// Admissible trees for the conditional estimator.
    #[arg(long)]
    support: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    fit: FitArgs,
}

#[derive(Args, Debug)]
struct PcfgScoreArgs {
    #[arg(long)]
    grammar: PathBuf,
    #[arg(long)]
    log: bool,
    treebank: PathBuf,
}

/// A failure with its exit status; the message already carries file and
/// line context.
#[derive(Debug)]
struct Failure {
    code: i32,
    msg: String,
}

type Outcome = Result<(), Failure>;

fn input(path: &Path, e: impl Display) -> Failure {
    Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", path.display()),
    }
}

fn invariant(path: &Path, e: impl Display) -> Failure {
    Failure {
        code: EXIT_INVARIANT,
        msg: format!("{}: {e}", path.display()),
    }
}

fn io_failure(e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_INPUT,
        msg: format!("write failed: {e}"),
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| input(path, e))
}

fn write_file(path: &Path, text: &str) -> Outcome {
    fs::write(path, text).map_err(|e| input(path, e))
}

fn load_sig(path: &Path) -> Result<Signature, Failure> {
    Signature::parse(&read(path)?).map_err(|e| input(path, e))
}

fn load_params(path: &Path, sig: &Signature) -> Result<PthParams, Failure> {
    PthParams::parse(&read(path)?, sig).map_err(|e| {
        if e.is_invariant() {
            invariant(path, e)
        } else {
            input(path, e)
        }
    })
}

fn load_corpus(path: &Path, sig: &Signature) -> Result<Corpus, Failure> {
    Corpus::parse(&read(path)?, sig).map_err(|e| input(path, e))
}

fn load_grammar(path: &Path) -> Result<Pcfg, Failure> {
    Pcfg::parse(&read(path)?).map_err(|e| {
        if e.is_invariant() {
            invariant(path, e)
        } else {
            input(path, e)
        }
    })
}

fn load_trees(path: &Path) -> Result<Vec<Tree>, Failure> {
    pcfg::parse_treebank(&read(path)?).map_err(|e| input(path, e))
}

fn show(p: f64, log: bool) -> String {
    format::prob(if log { p.ln() } else { p })
}

/// Run with the given arguments (program name first), writing results to
/// `out` and diagnostics to `err`.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(text.as_bytes())
            } else {
                err.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.msg);
            f.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    match cmd {
        Command::Sig(SigCommand::Check { sig }) => {
            let s = load_sig(&sig)?;
            writeln!(
                out,
                "{}: ok, {} types, {} maximal",
                sig.display(),
                s.len(),
                s.maximal_types().len()
            )
            .map_err(io_failure)
        }
        Command::Sig(SigCommand::Relations { sig }) => {
            let s = load_sig(&sig)?;
            for rel in s.introduction_relations() {
                writeln!(out, "{}", s.relation_to_string(&rel)).map_err(io_failure)?;
            }
            Ok(())
        }
        Command::Train(a) => cmd_train(a, out, err),
        Command::Score(a) => cmd_score(a, false, out),
        Command::Rank(a) => cmd_score(a, true, out),
        Command::Enumerate(a) => cmd_enumerate(a, out),
        Command::Leak(a) => cmd_leak(a, out),
        Command::Sample(a) => cmd_sample(a, out),
        Command::Pcfg(PcfgCommand::Train(a)) => cmd_pcfg_train(a, out, err),
        Command::Pcfg(PcfgCommand::Score(a)) => cmd_pcfg_score(a, false, out),
        Command::Pcfg(PcfgCommand::Rank(a)) => cmd_pcfg_score(a, true, out),
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        msg: msg.into(),
    }
}

fn cmd_train(a: TrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let sig = load_sig(&a.sig)?;
    let corpus = load_corpus(&a.corpus, &sig)?;
    let init = match &a.init {
        Some(p) => load_params(p, &sig)?,
        None => PthParams::uniform(&sig),
    };
    let counts = train::count_transitions(&corpus, &sig).map_err(|e| input(&a.corpus, e))?;
    if let Some(path) = &a.counts_out {
        write_file(path, &counts.to_text(&sig))?;
    }
    let params = match a.estimator {
        EstimatorKind::Count => {
            if corpus.is_empty() {
                return Err(input(&a.corpus, train::TrainError::EmptyCorpus));
            }
            train::estimate(&counts, &sig, &init)
        }
        EstimatorKind::Conditional => {
            let support = conditional_support(&a, &sig)?;
            let r = train::conditional_mle(&corpus, &support, &sig, &init, a.fit.options())
                .map_err(|e| input(&a.corpus, e))?;
            if !r.converged {
                let _ = writeln!(
                    err,
                    "warning: conditional estimator did not converge after {} iterations",
                    r.iterations
                );
            }
            r.params
        }
    };
    let params =
        reentrancy::estimate_equate(&corpus, &sig, &params).map_err(|e| input(&a.corpus, e))?;
    let text = params.to_file_text(&sig);
    match &a.out {
        Some(path) => write_file(path, &text),
        None => out.write_all(text.as_bytes()).map_err(io_failure),
    }
}

fn conditional_support(a: &TrainArgs, sig: &Signature) -> Result<Vec<FeatureStructure>, Failure> {
    if let Some(path) = &a.support {
        let c = load_corpus(path, sig)?;
        return Ok(c.entries.into_iter().map(|(fs, _)| fs).collect());
    }
    let Some(bound) = a.support_max_nodes else {
        return Err(usage(
            "--estimator conditional needs --support or --support-max-nodes",
        ));
    };
    let e = pth::enumerate_structures(&PthParams::uniform(sig), sig, bound);
    let mut support: Vec<FeatureStructure> = e.items.into_iter().map(|i| i.structure).collect();
    if let Some(path) = &a.admissible {
        let allowed = load_corpus(path, sig)?;
        support.retain(|fs| allowed.entries.iter().any(|(a, _)| a == fs));
    }
    Ok(support)
}

fn cmd_score(a: ScoreArgs, rank: bool, out: &mut dyn Write) -> Outcome {
    let sig = load_sig(&a.model.sig)?;
    let params = load_params(&a.model.params, &sig)?;
    let corpus = load_corpus(&a.structures, &sig)?;
    let mut scored = Vec::new();
    for (i, (fs, _)) in corpus.entries.iter().enumerate() {
        let p = if a.reentrant {
            reentrancy::score_reentrant(&params, &sig, fs)
        } else {
            pth::structure_probability(&params, &sig, fs)
        }
        .map_err(|e| input(&a.structures, format!("structure {}: {e}", i + 1)))?;
        scored.push((fs.to_text(), p));
    }
    if rank {
        sort_ranked(&mut scored);
        for (text, p) in &scored {
            writeln!(out, "{text}\t{}", show(*p, a.log)).map_err(io_failure)?;
        }
    } else {
        for (_, p) in &scored {
            writeln!(out, "{}", show(*p, a.log)).map_err(io_failure)?;
        }
    }
    Ok(())
}

fn sort_ranked(items: &mut [(String, f64)]) {
    items.sort_by(|x, y| y.1.total_cmp(&x.1).then_with(|| x.0.cmp(&y.0)));
}

fn cmd_enumerate(a: EnumerateArgs, out: &mut dyn Write) -> Outcome {
    let sig = load_sig(&a.model.sig)?;
    let params = load_params(&a.model.params, &sig)?;
    let e = if a.reentrant {
        reentrancy::enumerate_reentrant(&params, &sig, a.max_nodes)
    } else {
        pth::enumerate_structures(&params, &sig, a.max_nodes)
    };
    for item in &e.items {
        let p = if a.log {
            format::prob(item.log_prob)
        } else {
            format::prob(item.prob)
        };
        writeln!(out, "{}\t{p}", item.text).map_err(io_failure)?;
    }
    writeln!(out, "residual\t{}", show(e.residual_mass, a.log)).map_err(io_failure)?;
    if a.reentrant {
        writeln!(out, "leaked\t{}", show(e.leaked_mass, a.log)).map_err(io_failure)?;
    }
    Ok(())
}

fn cmd_leak(a: LeakArgs, out: &mut dyn Write) -> Outcome {
    let sig = load_sig(&a.model.sig)?;
    let params = load_params(&a.model.params, &sig)?;
    writeln!(out, "bound\tmass").map_err(io_failure)?;
    for bound in 1..=a.max_nodes {
        let m = reentrancy::leaked_mass(&params, &sig, bound);
        writeln!(out, "{bound}\t{}", format::prob(m)).map_err(io_failure)?;
    }
    Ok(())
}

fn cmd_sample(a: SampleArgs, out: &mut dyn Write) -> Outcome {
    let sig = load_sig(&a.model.sig)?;
    let params = load_params(&a.model.params, &sig)?;
    for i in 0..a.count {
        let seed = a.seed.wrapping_add(i);
        let drawn = if a.reentrant {
            reentrancy::sample_reentrant(&params, &sig, seed, a.max_steps, a.max_retries)
        } else {
            pth::sample_structure(&params, &sig, seed, a.max_steps)
        };
        match drawn {
            Ok(fs) => writeln!(out, "{fs}"),
            Err(_) => writeln!(out, "budget-exceeded"),
        }
        .map_err(io_failure)?;
    }
    Ok(())
}

fn cmd_pcfg_train(a: PcfgTrainArgs, out: &mut dyn Write, err: &mut dyn Write) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let bank = load_trees(&a.treebank)?;
    let support;
    let estimator = match a.estimator {
        EstimatorKind::Count => pcfg::Estimator::Count,
        EstimatorKind::Conditional => {
            let Some(path) = &a.support else {
                return Err(usage("--estimator conditional needs --support"));
            };
            support = load_trees(path)?;
            pcfg::Estimator::Conditional {
                support: &support,
                opts: a.fit.options(),
            }
        }
    };
    let fit = pcfg::train_pcfg(&g, &bank, estimator).map_err(|e| input(&a.treebank, e))?;
    if !fit.converged {
        let _ = writeln!(
            err,
            "warning: conditional estimator did not converge after {} iterations",
            fit.iterations
        );
    }
    let text = fit.grammar.to_text();
    match &a.out {
        Some(path) => write_file(path, &text),
        None => out.write_all(text.as_bytes()).map_err(io_failure),
    }
}

fn cmd_pcfg_score(a: PcfgScoreArgs, rank: bool, out: &mut dyn Write) -> Outcome {
    let g = load_grammar(&a.grammar)?;
    let bank = load_trees(&a.treebank)?;
    let mut scored = Vec::new();
    for (i, t) in bank.iter().enumerate() {
        let p = g
            .tree_probability(t)
            .map_err(|e| input(&a.treebank, format!("tree {}: {e}", i + 1)))?;
        scored.push((t.to_string(), p));
    }
    if rank {
        sort_ranked(&mut scored);
        for (text, p) in &scored {
            writeln!(out, "{text}\t{}", show(*p, a.log)).map_err(io_failure)?;
        }
    } else {
        for (_, p) in &scored {
            writeln!(out, "{}", show(*p, a.log)).map_err(io_failure)?;
        }
    }
    Ok(())
}
