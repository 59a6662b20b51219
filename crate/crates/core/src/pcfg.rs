//! Probabilistic context-free grammars, used as the baseline the type
//! hierarchy model is compared against.
//!
//! Grammar files hold one rule per line, `lhs -> rhs1 rhs2 ... [: p]`.
//! The start symbol is the left-hand side of the first rule, and any
//! symbol that never appears on a left-hand side is a terminal. A
//! non-terminal whose rules carry no probabilities gets a uniform row.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use thiserror::Error;

use crate::fstruct::strip_comment;
use crate::train::conditional::{self, Counts, FitOptions};

pub const FILE_SUM_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PcfgError {
    #[error("line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("rules for `{lhs}` sum to {sum}, not 1")]
    RowSum { lhs: String, sum: f64 },
    #[error("grammar has no rules")]
    Empty,
    #[error("no rule {lhs} -> {rhs}")]
    Unmatched { lhs: String, rhs: String },
    #[error("tree is rooted at `{found}`, not the start symbol `{start}`")]
    WrongRoot { found: String, start: String },
    #[error("treebank is empty")]
    EmptyTreebank,
    #[error("support is empty")]
    EmptySupport,
    #[error("tree {index} is not in the support")]
    OutsideSupport { index: usize },
}

impl PcfgError {
    pub fn is_invariant(&self) -> bool {
        matches!(self, PcfgError::RowSum { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: String,
    pub rhs: Vec<String>,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", self.lhs, self.rhs.join(" "))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Pcfg {
    rules: Vec<Rule>,
    probs: Vec<f64>,
    /// Non-terminals in order of first appearance as a left-hand side.
    nonterminals: Vec<String>,
    by_lhs: HashMap<String, Vec<usize>>,
    index: HashMap<Rule, usize>,
}

impl Pcfg {
    pub fn parse(text: &str) -> Result<Pcfg, PcfgError> {
        let mut rules = Vec::new();
        let mut given: Vec<Option<f64>> = Vec::new();
        let mut index = HashMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = strip_comment(raw).trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: String| PcfgError::Format { line: i + 1, msg };
            let (lhs, rest) = line
                .split_once("->")
                .ok_or_else(|| err("expected `->`".into()))?;
            let (rhs, prob) = match rest.rsplit_once(':') {
                Some((rhs, p)) => {
                    let p: f64 = p
                        .trim()
                        .parse()
                        .map_err(|_| err(format!("`{}` is not a number", p.trim())))?;
                    if !(0.0..=1.0).contains(&p) {
                        return Err(err(format!("probability {p} outside [0, 1]")));
                    }
                    (rhs, Some(p))
                }
                None => (rest, None),
            };
            let lhs: Vec<&str> = lhs.split_whitespace().collect();
            if lhs.len() != 1 {
                return Err(err("left-hand side must be a single symbol".into()));
            }
            let rhs: Vec<String> = rhs.split_whitespace().map(String::from).collect();
            if rhs.is_empty() {
                return Err(err("empty right-hand side".into()));
            }
            let rule = Rule {
                lhs: lhs[0].to_string(),
                rhs,
            };
            if index.insert(rule.clone(), rules.len()).is_some() {
                return Err(err(format!("duplicate rule {rule}")));
            }
            rules.push(rule);
            given.push(prob);
        }
        if rules.is_empty() {
            return Err(PcfgError::Empty);
        }
        let mut nonterminals: Vec<String> = Vec::new();
        let mut by_lhs: HashMap<String, Vec<usize>> = HashMap::new();
        for (i, r) in rules.iter().enumerate() {
            if !by_lhs.contains_key(&r.lhs) {
                nonterminals.push(r.lhs.clone());
            }
            by_lhs.entry(r.lhs.clone()).or_default().push(i);
        }
        let mut probs = vec![0.0; rules.len()];
        for nt in &nonterminals {
            let row = &by_lhs[nt];
            let specified = row.iter().filter(|&&i| given[i].is_some()).count();
            if specified == 0 {
                for &i in row {
                    probs[i] = 1.0 / row.len() as f64;
                }
            } else if specified < row.len() {
                return Err(PcfgError::Format {
                    line: 0,
                    msg: format!("some but not all rules for `{nt}` carry probabilities"),
                });
            } else {
                for &i in row {
                    probs[i] = given[i].unwrap();
                }
            }
        }
        let g = Pcfg {
            rules,
            probs,
            nonterminals,
            by_lhs,
            index,
        };
        g.validate(FILE_SUM_TOLERANCE)?;
        Ok(g)
    }

    pub fn validate(&self, tol: f64) -> Result<(), PcfgError> {
        for nt in &self.nonterminals {
            let sum: f64 = self.by_lhs[nt].iter().map(|&i| self.probs[i]).sum();
            if (sum - 1.0).abs() > tol {
                return Err(PcfgError::RowSum {
                    lhs: nt.clone(),
                    sum,
                });
            }
        }
        Ok(())
    }

    pub fn start(&self) -> &str {
        &self.rules[0].lhs
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn is_nonterminal(&self, sym: &str) -> bool {
        self.by_lhs.contains_key(sym)
    }

    pub fn rule_index(&self, lhs: &str, rhs: &[String]) -> Option<usize> {
        self.index
            .get(&Rule {
                lhs: lhs.to_string(),
                rhs: rhs.to_vec(),
            })
            .copied()
    }

    pub fn prob(&self, lhs: &str, rhs: &[&str]) -> Option<f64> {
        let rhs: Vec<String> = rhs.iter().map(|s| s.to_string()).collect();
        self.rule_index(lhs, &rhs).map(|i| self.probs[i])
    }

    pub fn with_probs(&self, probs: Vec<f64>) -> Pcfg {
        assert_eq!(probs.len(), self.rules.len());
        Pcfg {
            probs,
            ..self.clone()
        }
    }

    fn rows(&self) -> Vec<Vec<usize>> {
        self.nonterminals
            .iter()
            .map(|nt| self.by_lhs[nt].clone())
            .collect()
    }

    pub fn to_text(&self) -> String {
        self.rules
            .iter()
            .zip(&self.probs)
            .map(|(r, p)| format!("{r} : {p}\n"))
            .collect()
    }

    /// How often each rule expands a node of `tree`.
    pub fn rule_counts(&self, tree: &Tree) -> Result<BTreeMap<usize, u64>, PcfgError> {
        if tree.label != self.start() {
            return Err(PcfgError::WrongRoot {
                found: tree.label.clone(),
                start: self.start().to_string(),
            });
        }
        let mut counts = BTreeMap::new();
        let mut stack = vec![tree];
        while let Some(t) = stack.pop() {
            if t.children.is_empty() {
                continue;
            }
            let rhs: Vec<String> = t.children.iter().map(|c| c.label.clone()).collect();
            let i = self
                .rule_index(&t.label, &rhs)
                .ok_or_else(|| PcfgError::Unmatched {
                    lhs: t.label.clone(),
                    rhs: rhs.join(" "),
                })?;
            *counts.entry(i).or_default() += 1;
            stack.extend(t.children.iter());
        }
        Ok(counts)
    }

    pub fn tree_log_probability(&self, tree: &Tree) -> Result<f64, PcfgError> {
        let counts = self.rule_counts(tree)?;
        Ok(log_of_counts(&self.probs, &counts))
    }

    /// Product of the probabilities of the rules used; partial trees with
    /// non-terminal leaves are allowed.
    pub fn tree_probability(&self, tree: &Tree) -> Result<f64, PcfgError> {
        self.tree_log_probability(tree).map(f64::exp)
    }
}

/// Σ count × log p, visiting rules in index order.
pub fn log_of_counts(probs: &[f64], counts: &BTreeMap<usize, u64>) -> f64 {
    let mut acc = 0.0;
    for (&i, &n) in counts {
        if n > 0 {
            acc += n as f64 * probs[i].ln();
        }
    }
    acc
}

/// Ordered labelled tree; leaves have no children.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Tree {
    pub label: String,
    pub children: Vec<Tree>,
}

impl Tree {
    pub fn leaf(label: impl Into<String>) -> Tree {
        Tree {
            label: label.into(),
            children: Vec::new(),
        }
    }

    pub fn node(label: impl Into<String>, children: Vec<Tree>) -> Tree {
        Tree {
            label: label.into(),
            children,
        }
    }

    /// Bracketed form: `(s (np (np-sing car)) (vp (vp-sing stops)))`.
    pub fn parse(text: &str) -> Result<Tree, PcfgError> {
        let tokens = tokenize(text);
        let mut pos = 0;
        let tree = parse_tree(&tokens, &mut pos)?;
        if pos != tokens.len() {
            return Err(PcfgError::Format {
                line: 0,
                msg: "trailing input after tree".into(),
            });
        }
        Ok(tree)
    }

    pub fn yield_words(&self) -> Vec<&str> {
        if self.children.is_empty() {
            return vec![&self.label];
        }
        self.children.iter().flat_map(|c| c.yield_words()).collect()
    }
}

impl fmt::Display for Tree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.children.is_empty() {
            return write!(f, "{}", self.label);
        }
        write!(f, "({}", self.label)?;
        for c in &self.children {
            write!(f, " {c}")?;
        }
        write!(f, ")")
    }
}

fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    for c in text.chars() {
        match c {
            '(' | ')' => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
                out.push(c.to_string());
            }
            c if c.is_whitespace() => {
                if !cur.is_empty() {
                    out.push(std::mem::take(&mut cur));
                }
            }
            c => cur.push(c),
        }
    }
    if !cur.is_empty() {
        out.push(cur);
    }
    out
}

fn parse_tree(tokens: &[String], pos: &mut usize) -> Result<Tree, PcfgError> {
    let err = |msg: &str| PcfgError::Format {
        line: 0,
        msg: msg.to_string(),
    };
    match tokens.get(*pos).map(String::as_str) {
        Some("(") => {
            *pos += 1;
            let label = match tokens.get(*pos).map(String::as_str) {
                Some("(") | Some(")") | None => return Err(err("expected a label after `(`")),
                Some(l) => l.to_string(),
            };
            *pos += 1;
            let mut children = Vec::new();
            loop {
                match tokens.get(*pos).map(String::as_str) {
                    Some(")") => {
                        *pos += 1;
                        return Ok(Tree { label, children });
                    }
                    None => return Err(err("unbalanced parentheses")),
                    _ => children.push(parse_tree(tokens, pos)?),
                }
            }
        }
        Some(")") => Err(err("unexpected `)`")),
        Some(l) => {
            *pos += 1;
            Ok(Tree::leaf(l))
        }
        None => Err(err("empty tree")),
    }
}

/// One tree per line; blank lines and `%` comments are skipped.
pub fn parse_treebank(text: &str) -> Result<Vec<Tree>, PcfgError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = strip_comment(line).trim();
        if line.is_empty() {
            continue;
        }
        out.push(Tree::parse(line).map_err(|e| match e {
            PcfgError::Format { msg, .. } => PcfgError::Format { line: i + 1, msg },
            other => other,
        })?);
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub enum Estimator<'a> {
    Count,
    Conditional {
        support: &'a [Tree],
        opts: FitOptions,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct PcfgFit {
    pub grammar: Pcfg,
    pub converged: bool,
    pub iterations: usize,
    pub trace: Vec<f64>,
}

/// Re-estimate rule probabilities from a fully bracketed treebank. The
/// grammar's current probabilities serve as the initial estimates.
pub fn train_pcfg(g: &Pcfg, treebank: &[Tree], estimator: Estimator) -> Result<PcfgFit, PcfgError> {
    if treebank.is_empty() {
        return Err(PcfgError::EmptyTreebank);
    }
    let tree_counts: Vec<BTreeMap<usize, u64>> = treebank
        .iter()
        .map(|t| g.rule_counts(t))
        .collect::<Result<_, _>>()?;
    let mut totals = vec![0u64; g.rules.len()];
    for c in &tree_counts {
        for (&i, &n) in c {
            totals[i] += n;
        }
    }
    let mut probs = g.probs.clone();
    for row in g.rows() {
        let sum: u64 = row.iter().map(|&i| totals[i]).sum();
        if sum > 0 {
            for &i in &row {
                probs[i] = totals[i] as f64 / sum as f64;
            }
        }
    }
    match estimator {
        Estimator::Count => Ok(PcfgFit {
            grammar: g.with_probs(probs),
            converged: true,
            iterations: 0,
            trace: Vec::new(),
        }),
        Estimator::Conditional { support, opts } => {
            if support.is_empty() {
                return Err(PcfgError::EmptySupport);
            }
            for (index, t) in treebank.iter().enumerate() {
                if !support.contains(t) {
                    return Err(PcfgError::OutsideSupport { index });
                }
            }
            let to_sparse =
                |c: &BTreeMap<usize, u64>| -> Counts { c.iter().map(|(&i, &n)| (i, n)).collect() };
            let observed: Vec<(Counts, f64)> =
                tree_counts.iter().map(|c| (to_sparse(c), 1.0)).collect();
            let support_counts: Vec<Counts> = support
                .iter()
                .map(|t| g.rule_counts(t).map(|c| to_sparse(&c)))
                .collect::<Result<_, _>>()?;
            let rows = g.rows();
            let touched = conditional::touched_rows(&rows, &support_counts);
            for (row, hit) in rows.iter().zip(touched) {
                if !hit {
                    for &i in row {
                        probs[i] = g.probs[i];
                    }
                }
            }
            let fit = conditional::fit(&rows, &probs, &observed, &support_counts, opts);
            Ok(PcfgFit {
                grammar: g.with_probs(fit.theta),
                converged: fit.converged,
                iterations: fit.iterations,
                trace: fit.trace,
            })
        }
    }
}
