//! Feature structures: a typed node tree together with an equivalence
//! relation over its maximal-type nodes.
//!
//! Structures are kept in a canonical form. Nodes are numbered in
//! pre-order (children visited in feature-name order), every class is
//! represented by its first member in that order, and only the
//! representative carries children. Two structures describing the same
//! graph therefore compare equal with `==`.
//!
//! Text format:
//!
//! ```text
//! (sentence (left (np (num #1=(sing)))) (right (vp (num #1))))
//! ```

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::signature::{Signature, TypeId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Node {
    pub ty: String,
    /// Sorted by feature name. Empty for non-representatives.
    pub children: Vec<(String, usize)>,
    /// Index of this node's class representative (itself for singletons).
    pub rep: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FeatureStructure {
    nodes: Vec<Node>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FsError {
    #[error("column {col}: syntax error: {msg}")]
    Syntax { col: usize, msg: String },
    #[error("tag #{0} referenced before its definition")]
    UndefinedTag(u32),
    #[error("tag #{0} defined twice")]
    DuplicateTag(u32),
    #[error("class members {0} and {1} both carry children")]
    MultipleExpanded(usize, usize),
    #[error("equations are not transitive: {0} ~ {1} is implied but not given")]
    NotTransitive(usize, usize),
    #[error("node index {0} out of range")]
    BadNode(usize),
    #[error("{}", join_diagnostics(.0))]
    IllTyped(Vec<Diagnostic>),
}

fn join_diagnostics(d: &[Diagnostic]) -> String {
    d.iter()
        .map(|d| d.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Structure under construction: an arbitrary arena plus pending
/// equations. [`RawStructure::finish`] puts it into canonical form.
#[derive(Clone, Debug, Default)]
pub struct RawStructure {
    types: Vec<String>,
    children: Vec<Vec<(String, usize)>>,
    link: Vec<usize>,
}

impl RawStructure {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_node(&mut self, ty: impl Into<String>) -> usize {
        let id = self.types.len();
        self.types.push(ty.into());
        self.children.push(Vec::new());
        self.link.push(id);
        id
    }

    pub fn add_child(&mut self, parent: usize, feature: impl Into<String>, child: usize) {
        self.children[parent].push((feature.into(), child));
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.link[x] != x {
            self.link[x] = self.link[self.link[x]];
            x = self.link[x];
        }
        x
    }

    pub fn equate(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.link[ra.max(rb)] = ra.min(rb);
        }
    }

    /// Canonical form rooted at `root`. Nodes unreachable from the root
    /// are dropped.
    pub fn finish(mut self, root: usize) -> Result<FeatureStructure, FsError> {
        let n = self.types.len();
        if root >= n {
            return Err(FsError::BadNode(root));
        }
        let class: Vec<usize> = (0..n).map(|i| self.find(i)).collect();
        let mut content: HashMap<usize, usize> = HashMap::new();
        for (i, &c) in class.iter().enumerate() {
            if !self.children[i].is_empty() {
                if let Some(&other) = content.get(&c) {
                    return Err(FsError::MultipleExpanded(other, i));
                }
                content.insert(c, i);
            }
        }
        for c in &mut self.children {
            c.sort_by(|a, b| a.0.cmp(&b.0));
        }

        let mut nodes: Vec<Node> = Vec::new();
        let mut rep_of_class: HashMap<usize, usize> = HashMap::new();
        let mut placed = vec![false; n];
        // (raw node, parent index in output, feature)
        let mut stack: Vec<(usize, Option<(usize, String)>)> = vec![(root, None)];
        while let Some((raw, parent)) = stack.pop() {
            if placed[raw] {
                return Err(FsError::BadNode(raw));
            }
            placed[raw] = true;
            let idx = nodes.len();
            if let Some((p, feat)) = parent {
                nodes[p].children.push((feat, idx));
            }
            let c = class[raw];
            match rep_of_class.get(&c) {
                Some(&rep) => nodes.push(Node {
                    ty: self.types[raw].clone(),
                    children: Vec::new(),
                    rep,
                }),
                None => {
                    rep_of_class.insert(c, idx);
                    nodes.push(Node {
                        ty: self.types[raw].clone(),
                        children: Vec::new(),
                        rep: idx,
                    });
                    if let Some(&holder) = content.get(&c) {
                        for (feat, child) in self.children[holder].iter().rev() {
                            stack.push((*child, Some((idx, feat.clone()))));
                        }
                    }
                }
            }
        }
        Ok(FeatureStructure { nodes })
    }
}

impl FeatureStructure {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &Node {
        &self.nodes[i]
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_representative(&self, i: usize) -> bool {
        self.nodes[i].rep == i
    }

    pub fn is_all_singleton(&self) -> bool {
        self.nodes.iter().enumerate().all(|(i, n)| n.rep == i)
    }

    pub fn is_maximally_specified(&self, sig: &Signature) -> bool {
        self.nodes
            .iter()
            .all(|n| sig.lookup(&n.ty).is_some_and(|t| sig.is_maximal(t)))
    }

    /// Class members keyed by representative, in pre-order.
    pub fn classes(&self) -> BTreeMap<usize, Vec<usize>> {
        let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, n) in self.nodes.iter().enumerate() {
            out.entry(n.rep).or_default().push(i);
        }
        out
    }

    /// For every node, the feature leading to it from its parent
    /// (`None` for the root).
    pub fn incoming(&self) -> Vec<Option<(usize, &str)>> {
        let mut out = vec![None; self.nodes.len()];
        for (i, n) in self.nodes.iter().enumerate() {
            for (f, c) in &n.children {
                out[*c] = Some((i, f.as_str()));
            }
        }
        out
    }

    /// Feature path of every node; the root is `.`.
    pub fn paths(&self) -> Vec<String> {
        let mut out = vec![String::new(); self.nodes.len()];
        out[0] = ".".to_string();
        for (i, n) in self.nodes.iter().enumerate() {
            for (f, c) in &n.children {
                out[*c] = if i == 0 {
                    f.clone()
                } else {
                    format!("{}.{}", out[i], f)
                };
            }
        }
        out
    }

    fn to_raw(&self) -> RawStructure {
        let mut raw = RawStructure::new();
        for n in &self.nodes {
            raw.add_node(n.ty.clone());
        }
        for (i, n) in self.nodes.iter().enumerate() {
            for (f, c) in &n.children {
                raw.add_child(i, f.clone(), *c);
            }
            raw.equate(i, n.rep);
        }
        raw
    }

    /// Re-partition an all-singleton structure by pairwise equations.
    /// Accepted iff the given pairs are already closed under transitivity.
    pub fn with_equations(&self, pairs: &[(usize, usize)]) -> Result<FeatureStructure, FsError> {
        let n = self.nodes.len();
        let mut given = BTreeSet::new();
        for &(a, b) in pairs {
            if a >= n || b >= n {
                return Err(FsError::BadNode(a.max(b)));
            }
            if a != b {
                given.insert((a.min(b), a.max(b)));
            }
        }
        let mut raw = self.to_raw();
        for &(a, b) in &given {
            raw.equate(a, b);
        }
        let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..n {
            let r = raw.find(i);
            members.entry(r).or_default().push(i);
        }
        for m in members.values() {
            for (k, &a) in m.iter().enumerate() {
                for &b in &m[k + 1..] {
                    if !given.contains(&(a, b)) && (self.nodes[a].rep != self.nodes[b].rep) {
                        return Err(FsError::NotTransitive(a, b));
                    }
                }
            }
        }
        raw.finish(0)
    }

    /// One diagnostic per violation of the well-typedness conditions.
    pub fn well_typed(&self, sig: &Signature) -> Vec<Diagnostic> {
        let mut out = Vec::new();
        let paths = self.paths();
        let diag = |out: &mut Vec<Diagnostic>, i: usize, message: String| {
            out.push(Diagnostic {
                path: paths[i].clone(),
                message,
            })
        };
        let ids: Vec<Option<TypeId>> = self.nodes.iter().map(|n| sig.lookup(&n.ty)).collect();
        for (i, n) in self.nodes.iter().enumerate() {
            let Some(ty) = ids[i] else {
                diag(&mut out, i, format!("unknown type {}", n.ty));
                continue;
            };
            if n.rep != i {
                continue;
            }
            let appropriate = sig.appropriate(ty);
            for (f, c) in &n.children {
                match sig.feature_value(ty, f) {
                    None => diag(
                        &mut out,
                        i,
                        format!("feature {} not appropriate for {}", f, n.ty),
                    ),
                    Some(value) => {
                        if let Some(cty) = ids[*c] {
                            if !sig.subsumed_by(cty, value) {
                                diag(
                                    &mut out,
                                    *c,
                                    format!(
                                        "value of {} must be subsumed by {}, found {}",
                                        f,
                                        sig.name(value),
                                        sig.name(cty)
                                    ),
                                );
                            }
                        }
                    }
                }
            }
            for feat in appropriate {
                if !n.children.iter().any(|(f, _)| *f == feat.name) {
                    diag(
                        &mut out,
                        i,
                        format!("feature {} appropriate to {} is missing", feat.name, n.ty),
                    );
                }
            }
        }
        for (rep, members) in self.classes() {
            if members.len() < 2 {
                continue;
            }
            if members
                .iter()
                .any(|&m| self.nodes[m].ty != self.nodes[rep].ty)
            {
                diag(&mut out, rep, "class mixes maximal types".to_string());
            } else if let Some(t) = ids[rep] {
                if !sig.is_maximal(t) {
                    diag(
                        &mut out,
                        rep,
                        format!("re-entrant node has non-maximal type {}", sig.name(t)),
                    );
                }
            }
        }
        out
    }

    pub fn to_text(&self) -> String {
        let mut sizes: HashMap<usize, usize> = HashMap::new();
        for n in &self.nodes {
            *sizes.entry(n.rep).or_default() += 1;
        }
        let mut tags: HashMap<usize, usize> = HashMap::new();
        let mut out = String::new();
        self.write_node(0, true, &sizes, &mut tags, &mut out);
        out
    }

    fn write_node(
        &self,
        i: usize,
        is_root: bool,
        sizes: &HashMap<usize, usize>,
        tags: &mut HashMap<usize, usize>,
        out: &mut String,
    ) {
        let n = &self.nodes[i];
        if sizes[&n.rep] > 1 {
            if n.rep != i {
                out.push_str(&format!("#{}", tags[&n.rep]));
                return;
            }
            let tag = tags.len() + 1;
            tags.insert(i, tag);
            out.push_str(&format!("#{tag}="));
        } else if !is_root && n.children.is_empty() {
            out.push_str(&n.ty);
            return;
        }
        out.push('(');
        out.push_str(&n.ty);
        for (f, c) in &n.children {
            out.push_str(" (");
            out.push_str(f);
            out.push(' ');
            self.write_node(*c, false, sizes, tags, out);
            out.push(')');
        }
        out.push(')');
    }

    /// Parse without consulting a signature.
    pub fn parse_untyped(text: &str) -> Result<FeatureStructure, FsError> {
        let mut p = FsParser::new(text);
        let root = p.fs()?;
        p.skip_ws();
        if p.pos < p.bytes.len() {
            return Err(p.err("trailing input"));
        }
        p.raw.finish(root)
    }

    /// Parse and check against `sig`.
    pub fn parse(text: &str, sig: &Signature) -> Result<FeatureStructure, FsError> {
        let fs = Self::parse_untyped(text)?;
        let diags = fs.well_typed(sig);
        if diags.is_empty() {
            Ok(fs)
        } else {
            Err(FsError::IllTyped(diags))
        }
    }
}

impl fmt::Display for FeatureStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_text())
    }
}

struct FsParser<'a> {
    bytes: &'a [u8],
    pos: usize,
    raw: RawStructure,
    tags: HashMap<u32, usize>,
}

impl<'a> FsParser<'a> {
    fn new(text: &'a str) -> Self {
        FsParser {
            bytes: text.as_bytes(),
            pos: 0,
            raw: RawStructure::new(),
            tags: HashMap::new(),
        }
    }

    fn err(&self, msg: impl Into<String>) -> FsError {
        FsError::Syntax {
            col: self.pos + 1,
            msg: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> Result<(), FsError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(format!("expected `{}`", c as char)))
        }
    }

    fn ident(&mut self) -> Result<String, FsError> {
        self.skip_ws();
        let start = self.pos;
        match self.bytes.get(self.pos) {
            Some(b'a'..=b'z') => {}
            _ => return Err(self.err("expected a name")),
        }
        while self.pos < self.bytes.len()
            && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
        {
            self.pos += 1;
        }
        Ok(String::from_utf8_lossy(&self.bytes[start..self.pos]).into_owned())
    }

    fn tag_number(&mut self) -> Result<u32, FsError> {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .unwrap_or("")
            .parse()
            .map_err(|_| self.err("expected a tag number"))
    }

    fn fs(&mut self) -> Result<usize, FsError> {
        match self.peek() {
            Some(b'#') => {
                self.pos += 1;
                let tag = self.tag_number()?;
                if self.peek() == Some(b'=') {
                    self.pos += 1;
                    if self.tags.contains_key(&tag) {
                        return Err(FsError::DuplicateTag(tag));
                    }
                    self.node(Some(tag))
                } else {
                    let &def = self.tags.get(&tag).ok_or(FsError::UndefinedTag(tag))?;
                    let ty = self.raw.types[def].clone();
                    let id = self.raw.add_node(ty);
                    self.raw.equate(def, id);
                    Ok(id)
                }
            }
            _ => self.node(None),
        }
    }

    fn node(&mut self, tag: Option<u32>) -> Result<usize, FsError> {
        let bracketed = match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                true
            }
            _ => false,
        };
        let ty = self.ident()?;
        let id = self.raw.add_node(ty);
        if let Some(tag) = tag {
            self.tags.insert(tag, id);
        }
        if !bracketed {
            return Ok(id);
        }
        while self.peek() == Some(b'(') {
            self.pos += 1;
            let feat = self.ident()?;
            let child = self.fs()?;
            self.eat(b')')?;
            if self.raw.children[id].iter().any(|(f, _)| *f == feat) {
                return Err(self.err(format!("feature `{feat}` given twice")));
            }
            self.raw.add_child(id, feat, child);
        }
        self.eat(b')')?;
        Ok(id)
    }
}

/// Structures with multiplicities, sharing one signature.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct Corpus {
    pub entries: Vec<(FeatureStructure, u64)>,
}

#[derive(Debug, Error, Clone, PartialEq)]
#[error("line {line}: {source}")]
pub struct CorpusError {
    pub line: usize,
    pub source: FsError,
}

impl Corpus {
    /// One structure per line, optionally prefixed `N x `. Blank lines and
    /// `%` comments are skipped.
    pub fn parse(text: &str, sig: &Signature) -> Result<Corpus, CorpusError> {
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = strip_comment(line).trim();
            if line.is_empty() {
                continue;
            }
            let wrap = |source| CorpusError {
                line: lineno + 1,
                source,
            };
            let (count, body) = split_multiplicity(line).map_err(wrap)?;
            entries.push((FeatureStructure::parse(body, sig).map_err(wrap)?, count));
        }
        Ok(Corpus { entries })
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_weight(&self) -> u64 {
        self.entries.iter().map(|(_, w)| w).sum()
    }
}

pub(crate) fn strip_comment(line: &str) -> &str {
    match line.find('%') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn split_multiplicity(line: &str) -> Result<(u64, &str), FsError> {
    let digits = line.bytes().take_while(|b| b.is_ascii_digit()).count();
    if digits == 0 {
        return Ok((1, line));
    }
    let rest = line[digits..].trim_start();
    let Some(rest) = rest.strip_prefix('x') else {
        return Err(FsError::Syntax {
            col: digits + 1,
            msg: "expected `x` after multiplicity".into(),
        });
    };
    let n: u64 = line[..digits].parse().map_err(|_| FsError::Syntax {
        col: 1,
        msg: "multiplicity out of range".into(),
    })?;
    if n == 0 {
        return Err(FsError::Syntax {
            col: 1,
            msg: "multiplicity must be positive".into(),
        });
    }
    Ok((n, rest.trim_start()))
}

#[cfg(test)]
mod tests {
    use super::*;

    const SIGN_NUM: &str = "bot sub [sign,num]. sign sub [sentence,phrase].
        sentence sub [] intro [left:np,right:vp]. phrase sub [np,vp] intro [num:num].
        np sub []. vp sub []. num sub [sing,pl]. sing sub []. pl sub [].";

    fn sig() -> Signature {
        Signature::parse(SIGN_NUM).unwrap()
    }

    const SING: &str = "(sentence (left (np (num sing))) (right (vp (num sing))))";
    const PLURAL: &str = "(sentence (left (np (num pl))) (right (vp (num pl))))";
    const TAGGED: &str = "(sentence (left (np (num #1=(sing)))) (right (vp (num #1))))";

    #[test]
    fn parses_singular_analysis() {
        let fs = FeatureStructure::parse(SING, &sig()).unwrap();
        assert_eq!(fs.node_count(), 5);
        assert!(fs.is_all_singleton());
        assert!(fs.is_maximally_specified(&sig()));
        assert_eq!(fs.node(0).ty, "sentence");
        assert!(fs.well_typed(&sig()).is_empty());
    }

    #[test]
    fn tags_form_one_class() {
        let fs = FeatureStructure::parse(TAGGED, &sig()).unwrap();
        let plain = FeatureStructure::parse(SING, &sig()).unwrap();
        assert_eq!(fs.node_count(), plain.node_count());
        let classes = fs.classes();
        let sing: Vec<&Vec<usize>> = classes.values().filter(|m| m.len() > 1).collect();
        assert_eq!(sing.len(), 1);
        assert!(sing[0].iter().all(|&m| fs.node(m).ty == "sing"));
        assert_eq!(fs.to_text(), TAGGED);
    }

    #[test]
    fn missing_feature_is_rejected() {
        match FeatureStructure::parse("(sentence (left (np (num sing))))", &sig()) {
            Err(FsError::IllTyped(d)) => {
                assert_eq!(d.len(), 1);
                assert!(d[0].message.contains("feature right"), "{}", d[0]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn serialization() {
        let fs = FeatureStructure::parse(PLURAL, &sig()).unwrap();
        assert_eq!(fs.to_text(), PLURAL);
        let one = FeatureStructure::parse("(sing)", &sig()).unwrap();
        assert_eq!(one.to_text(), "(sing)");
        // children come out in feature order whatever the input order
        let shuffled = FeatureStructure::parse(
            "(sentence (right (vp (num (pl)))) (left (np (num pl))))",
            &sig(),
        )
        .unwrap();
        assert_eq!(shuffled, fs);
    }

    #[test]
    fn diagnostics() {
        let bad = FeatureStructure::parse_untyped(
            "(sentence (left (np (num sing))) (num sing) (right (vp (num sing))))",
        )
        .unwrap();
        let d = bad.well_typed(&sig());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "feature num not appropriate for sentence");

        let mut raw = RawStructure::new();
        let root = raw.add_node("sentence");
        let l = raw.add_node("np");
        let r = raw.add_node("vp");
        let a = raw.add_node("sing");
        let b = raw.add_node("pl");
        raw.add_child(root, "left", l);
        raw.add_child(root, "right", r);
        raw.add_child(l, "num", a);
        raw.add_child(r, "num", b);
        raw.equate(a, b);
        let mixed = raw.finish(root).unwrap();
        let d = mixed.well_typed(&sig());
        assert_eq!(d.len(), 1);
        assert_eq!(d[0].message, "class mixes maximal types");
        assert_eq!(d[0].path, "left.num");

        let wrong_value = FeatureStructure::parse_untyped(
            "(sentence (left (vp (num sing))) (right (vp (num sing))))",
        )
        .unwrap();
        assert!(wrong_value.well_typed(&sig())[0]
            .message
            .contains("subsumed by np"));
    }

    #[test]
    fn tag_errors() {
        assert_eq!(
            FeatureStructure::parse_untyped("(sentence (left #1) (right #1=vp))"),
            Err(FsError::UndefinedTag(1))
        );
        assert_eq!(
            FeatureStructure::parse_untyped("(s (a #1=(x)) (b #1=(x)))"),
            Err(FsError::DuplicateTag(1))
        );
        assert!(matches!(
            FeatureStructure::parse_untyped("(s (a x)"),
            Err(FsError::Syntax { .. })
        ));
    }

    #[test]
    fn cyclic_structure_round_trips() {
        let text = "#1=(a (f #1))";
        let fs = FeatureStructure::parse_untyped(text).unwrap();
        assert_eq!(fs.node_count(), 2);
        assert_eq!(fs.to_text(), text);
    }

    #[test]
    fn representative_moves_to_first_member() {
        // Expanded member comes second in pre-order; canonical form moves
        // its children onto the first member.
        let mut raw = RawStructure::new();
        let root = raw.add_node("r");
        let a = raw.add_node("t");
        let b = raw.add_node("t");
        let leaf = raw.add_node("u");
        raw.add_child(root, "a", a);
        raw.add_child(root, "b", b);
        raw.add_child(b, "g", leaf);
        raw.equate(a, b);
        let fs = raw.finish(root).unwrap();
        assert_eq!(fs.to_text(), "(r (a #1=(t (g u))) (b #1))");
    }

    #[test]
    fn equations_must_be_transitive() {
        let fs = FeatureStructure::parse_untyped("(r (a x) (b x) (c x))").unwrap();
        assert!(matches!(
            fs.with_equations(&[(1, 2), (2, 3)]),
            Err(FsError::NotTransitive(1, 3))
        ));
        let ok = fs.with_equations(&[(1, 2), (2, 3), (1, 3)]).unwrap();
        assert_eq!(ok.to_text(), "(r (a #1=(x)) (b #1) (c #1))");
        let pair = fs.with_equations(&[(3, 1)]).unwrap();
        assert_eq!(pair.to_text(), "(r (a #1=(x)) (b x) (c #1))");
    }

    #[test]
    fn corpus_file() {
        let text = format!("% toy\n2 x {SING}\n\n3 x {PLURAL} % plural\n{SING}\n");
        let c = Corpus::parse(&text, &sig()).unwrap();
        assert_eq!(c.entries.len(), 3);
        assert_eq!(c.total_weight(), 6);
        let err = Corpus::parse("0 x (sing)", &sig()).unwrap_err();
        assert_eq!(err.line, 1);
        let err = Corpus::parse("(sing)\n(zzz)", &sig()).unwrap_err();
        assert_eq!(err.line, 2);
    }
}
