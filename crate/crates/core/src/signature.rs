//! ALE-style signatures: a single-inheritance type hierarchy plus
//! appropriateness declarations (`intro`), and the introduction
//! relationships derived from them.
//!
//! ```text
//! bot sub [sign,num].
//!     sign sub [sentence,phrase].
//!      sentence sub []
//!               intro [left:np,right:vp].
//! ```

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

/// Name of the required root type.
pub const ROOT_NAME: &str = "bot";

/// Index of a type within its [`Signature`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TypeId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SignatureError {
    #[error("{pos}: syntax error: {msg}")]
    Syntax { pos: Pos, msg: String },
    #[error("{pos}: duplicate declaration of type `{name}`")]
    DuplicateType { pos: Pos, name: String },
    #[error("{pos}: unknown type `{name}`")]
    UnknownType { pos: Pos, name: String },
    #[error("{pos}: type `{name}` declared as a subtype of both `{first}` and `{second}`")]
    MultipleParents {
        pos: Pos,
        name: String,
        first: String,
        second: String,
    },
    #[error("missing root type `bot`")]
    MissingRoot,
    #[error("root type `bot` cannot be declared as a subtype of `{parent}`")]
    RootHasParent { parent: String },
    #[error("type `{name}` is not reachable from `bot`")]
    Unreachable { name: String },
    #[error("feature `{feature}` introduced on `{ty}` is already introduced on its supertype `{ancestor}`")]
    DuplicateFeature {
        feature: String,
        ty: String,
        ancestor: String,
    },
}

impl SignatureError {
    pub fn pos(&self) -> Option<Pos> {
        match self {
            SignatureError::Syntax { pos, .. }
            | SignatureError::DuplicateType { pos, .. }
            | SignatureError::UnknownType { pos, .. }
            | SignatureError::MultipleParents { pos, .. } => Some(*pos),
            _ => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FeatureDecl {
    pub name: String,
    pub value: TypeId,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDecl {
    pub name: String,
    pub parent: Option<TypeId>,
    /// Direct subtypes, in declaration order.
    pub subtypes: Vec<TypeId>,
    /// Features introduced on this type, in declaration order.
    pub intro: Vec<FeatureDecl>,
}

/// A validated signature. Immutable once built.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Signature {
    types: Vec<TypeDecl>,
    index: HashMap<String, TypeId>,
    root: TypeId,
    /// Every feature appropriate to a type (its own plus inherited),
    /// sorted by feature name.
    appropriate: Vec<Vec<FeatureDecl>>,
}

/// One `(from ⇒ to) → introduced` entry.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntroductionRelation {
    pub from: TypeId,
    pub to: TypeId,
    /// Value types of the features introduced at `to`, sorted by id.
    pub introduced: Vec<TypeId>,
}

impl Signature {
    pub fn parse(text: &str) -> Result<Signature, SignatureError> {
        let decls = Parser::new(text).decls()?;
        build(decls)
    }

    pub fn root(&self) -> TypeId {
        self.root
    }

    pub fn len(&self) -> usize {
        self.types.len()
    }

    pub fn is_empty(&self) -> bool {
        self.types.is_empty()
    }

    pub fn type_ids(&self) -> impl Iterator<Item = TypeId> + '_ {
        (0..self.types.len()).map(TypeId)
    }

    pub fn decl(&self, ty: TypeId) -> &TypeDecl {
        &self.types[ty.0]
    }

    pub fn name(&self, ty: TypeId) -> &str {
        &self.types[ty.0].name
    }

    pub fn lookup(&self, name: &str) -> Option<TypeId> {
        self.index.get(name).copied()
    }

    pub fn parent(&self, ty: TypeId) -> Option<TypeId> {
        self.types[ty.0].parent
    }

    pub fn subtypes(&self, ty: TypeId) -> &[TypeId] {
        &self.types[ty.0].subtypes
    }

    pub fn is_maximal(&self, ty: TypeId) -> bool {
        self.types[ty.0].subtypes.is_empty()
    }

    /// MT, in declaration order.
    pub fn maximal_types(&self) -> Vec<TypeId> {
        self.type_ids().filter(|&t| self.is_maximal(t)).collect()
    }

    /// NT, in declaration order.
    pub fn non_maximal_types(&self) -> Vec<TypeId> {
        self.type_ids().filter(|&t| !self.is_maximal(t)).collect()
    }

    /// Features appropriate to `ty`, sorted by name.
    pub fn appropriate(&self, ty: TypeId) -> &[FeatureDecl] {
        &self.appropriate[ty.0]
    }

    pub fn feature_value(&self, ty: TypeId, feature: &str) -> Option<TypeId> {
        self.appropriate[ty.0]
            .binary_search_by(|f| f.name.as_str().cmp(feature))
            .ok()
            .map(|i| self.appropriate[ty.0][i].value)
    }

    /// True when `sub` equals `sup` or lies below it.
    pub fn subsumed_by(&self, sub: TypeId, sup: TypeId) -> bool {
        let mut cur = Some(sub);
        while let Some(t) = cur {
            if t == sup {
                return true;
            }
            cur = self.parent(t);
        }
        false
    }

    /// The refinement edges leading from `from` down to `to`, top first.
    /// `None` if `to` is not subsumed by `from`.
    pub fn chain(&self, from: TypeId, to: TypeId) -> Option<Vec<(TypeId, TypeId)>> {
        let mut edges = Vec::new();
        let mut cur = to;
        while cur != from {
            let p = self.parent(cur)?;
            edges.push((p, cur));
            cur = p;
        }
        edges.reverse();
        Some(edges)
    }

    /// One relation per (non-maximal type, direct subtype) pair, in
    /// declaration order.
    pub fn introduction_relations(&self) -> Vec<IntroductionRelation> {
        let mut out = Vec::new();
        for from in self.type_ids() {
            for &to in self.subtypes(from) {
                let mut introduced: Vec<TypeId> =
                    self.decl(to).intro.iter().map(|f| f.value).collect();
                introduced.sort();
                out.push(IntroductionRelation {
                    from,
                    to,
                    introduced,
                });
            }
        }
        out
    }

    /// Chains of introduction relationships from `from` down to each
    /// reachable maximal type. Each entry pairs the maximal type with the
    /// multiset (sorted by id) of value types appropriate to it.
    pub fn iterated_introductions(&self, from: TypeId) -> Vec<(TypeId, Vec<TypeId>)> {
        let mut out = Vec::new();
        let mut stack = vec![from];
        while let Some(t) = stack.pop() {
            if self.is_maximal(t) {
                let mut ms: Vec<TypeId> = self.appropriate(t).iter().map(|f| f.value).collect();
                ms.sort();
                out.push((t, ms));
            } else {
                stack.extend(self.subtypes(t).iter().rev());
            }
        }
        out
    }

    /// Canonical source text; parses back to an identical signature.
    pub fn to_source(&self) -> String {
        let mut out = String::new();
        for decl in &self.types {
            let subs: Vec<&str> = decl.subtypes.iter().map(|&s| self.name(s)).collect();
            out.push_str(&format!("{} sub [{}]", decl.name, subs.join(",")));
            if !decl.intro.is_empty() {
                let feats: Vec<String> = decl
                    .intro
                    .iter()
                    .map(|f| format!("{}:{}", f.name, self.name(f.value)))
                    .collect();
                out.push_str(&format!(" intro [{}]", feats.join(",")));
            }
            out.push_str(".\n");
        }
        out
    }

    pub fn relation_to_string(&self, rel: &IntroductionRelation) -> String {
        let mut names: Vec<&str> = rel.introduced.iter().map(|&t| self.name(t)).collect();
        names.sort();
        format!(
            "({} => {}) -> [{}]",
            self.name(rel.from),
            self.name(rel.to),
            names.join(",")
        )
    }
}

struct RawFeature {
    name: String,
    value: String,
    pos: Pos,
}

struct RawDecl {
    name: String,
    pos: Pos,
    subtypes: Vec<(String, Pos)>,
    intro: Vec<RawFeature>,
}

fn build(decls: Vec<RawDecl>) -> Result<Signature, SignatureError> {
    let mut index = HashMap::new();
    for (i, d) in decls.iter().enumerate() {
        if index.insert(d.name.clone(), TypeId(i)).is_some() {
            return Err(SignatureError::DuplicateType {
                pos: d.pos,
                name: d.name.clone(),
            });
        }
    }
    let resolve = |name: &str, pos: Pos| {
        index
            .get(name)
            .copied()
            .ok_or_else(|| SignatureError::UnknownType {
                pos,
                name: name.to_string(),
            })
    };

    let mut types: Vec<TypeDecl> = decls
        .iter()
        .map(|d| TypeDecl {
            name: d.name.clone(),
            parent: None,
            subtypes: Vec::new(),
            intro: Vec::new(),
        })
        .collect();
    for (i, d) in decls.iter().enumerate() {
        for (sub, pos) in &d.subtypes {
            let s = resolve(sub, *pos)?;
            if let Some(prev) = types[s.0].parent {
                return Err(SignatureError::MultipleParents {
                    pos: *pos,
                    name: sub.clone(),
                    first: decls[prev.0].name.clone(),
                    second: d.name.clone(),
                });
            }
            types[s.0].parent = Some(TypeId(i));
            types[i].subtypes.push(s);
        }
        for f in &d.intro {
            let value = resolve(&f.value, f.pos)?;
            types[i].intro.push(FeatureDecl {
                name: f.name.clone(),
                value,
            });
        }
    }

    let root = *index.get(ROOT_NAME).ok_or(SignatureError::MissingRoot)?;
    if let Some(p) = types[root.0].parent {
        return Err(SignatureError::RootHasParent {
            parent: types[p.0].name.clone(),
        });
    }

    // Reachability from the root, top-down; parents precede children in `order`.
    let mut seen = vec![false; types.len()];
    let mut order = Vec::with_capacity(types.len());
    let mut stack = vec![root];
    while let Some(t) = stack.pop() {
        if seen[t.0] {
            continue;
        }
        seen[t.0] = true;
        order.push(t);
        stack.extend(types[t.0].subtypes.iter().copied());
    }
    if let Some(i) = seen.iter().position(|s| !s) {
        return Err(SignatureError::Unreachable {
            name: types[i].name.clone(),
        });
    }

    let mut appropriate: Vec<Vec<FeatureDecl>> = vec![Vec::new(); types.len()];
    // owner[t] maps each appropriate feature to the type that introduced it
    let mut owner: Vec<HashMap<String, TypeId>> = vec![HashMap::new(); types.len()];
    for &t in &order {
        let (mut feats, mut owners) = match types[t.0].parent {
            Some(p) => (appropriate[p.0].clone(), owner[p.0].clone()),
            None => (Vec::new(), HashMap::new()),
        };
        for f in &types[t.0].intro {
            if let Some(&anc) = owners.get(&f.name) {
                return Err(SignatureError::DuplicateFeature {
                    feature: f.name.clone(),
                    ty: types[t.0].name.clone(),
                    ancestor: types[anc.0].name.clone(),
                });
            }
            owners.insert(f.name.clone(), t);
            feats.push(f.clone());
        }
        feats.sort_by(|a, b| a.name.cmp(&b.name));
        appropriate[t.0] = feats;
        owner[t.0] = owners;
    }

    Ok(Signature {
        types,
        index,
        root,
        appropriate,
    })
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    LBracket,
    RBracket,
    Comma,
    Colon,
    Dot,
}

struct Parser<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    col: usize,
    peeked: Option<(Tok, Pos)>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        Parser {
            chars: text.chars().peekable(),
            line: 1,
            col: 1,
            peeked: None,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn pos(&self) -> Pos {
        Pos {
            line: self.line,
            col: self.col,
        }
    }

    fn lex(&mut self) -> Result<Option<(Tok, Pos)>, SignatureError> {
        loop {
            match self.chars.peek() {
                Some(' ' | '\t' | '\n' | '\r') => {
                    self.bump();
                }
                Some('%') => {
                    while let Some(&c) = self.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        self.bump();
                    }
                }
                _ => break,
            }
        }
        let pos = self.pos();
        let Some(&c) = self.chars.peek() else {
            return Ok(None);
        };
        let tok = match c {
            '[' => Tok::LBracket,
            ']' => Tok::RBracket,
            ',' => Tok::Comma,
            ':' => Tok::Colon,
            '.' => Tok::Dot,
            'a'..='z' => {
                let mut s = String::new();
                while let Some(&c) = self.chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        self.bump();
                    } else {
                        break;
                    }
                }
                return Ok(Some((Tok::Ident(s), pos)));
            }
            other => {
                return Err(SignatureError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        self.bump();
        Ok(Some((tok, pos)))
    }

    fn next(&mut self) -> Result<Option<(Tok, Pos)>, SignatureError> {
        match self.peeked.take() {
            Some(t) => Ok(Some(t)),
            None => self.lex(),
        }
    }

    fn peek(&mut self) -> Result<Option<&(Tok, Pos)>, SignatureError> {
        if self.peeked.is_none() {
            self.peeked = self.lex()?;
        }
        Ok(self.peeked.as_ref())
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Pos, SignatureError> {
        match self.next()? {
            Some((t, pos)) if t == want => Ok(pos),
            Some((t, pos)) => Err(SignatureError::Syntax {
                pos,
                msg: format!("expected {what}, found {}", describe(&t)),
            }),
            None => Err(SignatureError::Syntax {
                pos: self.pos(),
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn ident(&mut self, what: &str) -> Result<(String, Pos), SignatureError> {
        match self.next()? {
            Some((Tok::Ident(s), pos)) => Ok((s, pos)),
            Some((t, pos)) => Err(SignatureError::Syntax {
                pos,
                msg: format!("expected {what}, found {}", describe(&t)),
            }),
            None => Err(SignatureError::Syntax {
                pos: self.pos(),
                msg: format!("expected {what}, found end of input"),
            }),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), SignatureError> {
        let (s, pos) = self.ident(&format!("`{kw}`"))?;
        if s != kw {
            return Err(SignatureError::Syntax {
                pos,
                msg: format!("expected `{kw}`, found `{s}`"),
            });
        }
        Ok(())
    }

    fn decls(&mut self) -> Result<Vec<RawDecl>, SignatureError> {
        let mut out = Vec::new();
        while self.peek()?.is_some() {
            out.push(self.decl()?);
        }
        Ok(out)
    }

    fn decl(&mut self) -> Result<RawDecl, SignatureError> {
        let (name, pos) = self.ident("type name")?;
        self.keyword("sub")?;
        self.expect(Tok::LBracket, "`[`")?;
        let mut subtypes = Vec::new();
        if !matches!(self.peek()?, Some((Tok::RBracket, _))) {
            loop {
                subtypes.push(self.ident("type name")?);
                if matches!(self.peek()?, Some((Tok::Comma, _))) {
                    self.next()?;
                } else {
                    break;
                }
            }
        }
        self.expect(Tok::RBracket, "`]`")?;
        let mut intro = Vec::new();
        if matches!(self.peek()?, Some((Tok::Ident(s), _)) if s == "intro") {
            self.next()?;
            self.expect(Tok::LBracket, "`[`")?;
            loop {
                let (fname, _) = self.ident("feature name")?;
                self.expect(Tok::Colon, "`:`")?;
                let (value, vpos) = self.ident("type name")?;
                intro.push(RawFeature {
                    name: fname,
                    value,
                    pos: vpos,
                });
                if matches!(self.peek()?, Some((Tok::Comma, _))) {
                    self.next()?;
                } else {
                    break;
                }
            }
            self.expect(Tok::RBracket, "`]`")?;
        }
        self.expect(Tok::Dot, "`.`")?;
        Ok(RawDecl {
            name,
            pos,
            subtypes,
            intro,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::LBracket => "`[`".into(),
        Tok::RBracket => "`]`".into(),
        Tok::Comma => "`,`".into(),
        Tok::Colon => "`:`".into(),
        Tok::Dot => "`.`".into(),
    }
}
