use std::collections::{BTreeSet, HashMap};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::canonical::{ReducedCode, Token, Triplet};
use crate::error::{Error, Result};

/// Bijection between token ids and label triples, plus the timestamp
/// alphabet size. Each of the three alphabets carries two extra slots:
/// EOS right after the regular symbols, SOS right after EOS.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenVocabulary {
    max_nodes: usize,
    tokens: Vec<Token>,
    index: HashMap<Token, usize>,
}

impl TokenVocabulary {
    pub fn new(max_nodes: usize, tokens: Vec<Token>) -> Result<Self> {
        let mut index = HashMap::with_capacity(tokens.len());
        for (i, t) in tokens.iter().enumerate() {
            if index.insert(t.clone(), i).is_some() {
                return Err(Error::Vocabulary(format!("token {t} listed twice")));
            }
        }
        Ok(TokenVocabulary {
            max_nodes,
            tokens,
            index,
        })
    }

    /// Number of distinct timestamps, i.e. the largest node count.
    pub fn max_nodes(&self) -> usize {
        self.max_nodes
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn token_eos(&self) -> usize {
        self.tokens.len()
    }

    pub fn token_sos(&self) -> usize {
        self.tokens.len() + 1
    }

    /// Token alphabet width including EOS and SOS.
    pub fn token_width(&self) -> usize {
        self.tokens.len() + 2
    }

    pub fn timestamp_eos(&self) -> usize {
        self.max_nodes
    }

    pub fn timestamp_sos(&self) -> usize {
        self.max_nodes + 1
    }

    /// Timestamp alphabet width including EOS and SOS.
    pub fn timestamp_width(&self) -> usize {
        self.max_nodes + 2
    }

    pub fn id_of(&self, token: &Token) -> Option<usize> {
        self.index.get(token).copied()
    }

    pub fn token(&self, id: usize) -> Option<&Token> {
        self.tokens.get(id)
    }

    pub fn encode(&self, token: &Token) -> Result<usize> {
        self.id_of(token)
            .ok_or_else(|| Error::Vocabulary(format!("token {token} is not in the vocabulary")))
    }

    /// Checks timestamps and tokens of a code against the vocabulary.
    pub fn check_code(&self, code: &ReducedCode) -> Result<()> {
        for t in code.entries() {
            if t.from >= self.max_nodes || t.to >= self.max_nodes {
                return Err(Error::Vocabulary(format!(
                    "timestamp in {t} exceeds max_nodes {}",
                    self.max_nodes
                )));
            }
            self.encode(&t.token)?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("T {}\n", self.max_nodes);
        for (i, t) in self.tokens.iter().enumerate() {
            writeln!(out, "{i} {} {} {}", t.from_label, t.edge_label, t.to_label).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
        let (_, header) = lines
            .next()
            .ok_or_else(|| Error::parse(1, "missing `T <max_nodes>` header"))?;
        let max_nodes = match header.split_ascii_whitespace().collect::<Vec<_>>()[..] {
            ["T", n] => n
                .parse()
                .map_err(|_| Error::parse(1, format!("bad max_nodes `{n}`")))?,
            _ => return Err(Error::parse(1, "expected `T <max_nodes>`")),
        };
        let mut tokens = Vec::new();
        for (lineno, line) in lines {
            let lineno = lineno + 1;
            match line.split_ascii_whitespace().collect::<Vec<_>>()[..] {
                [id, a, b, c] => {
                    let id: usize = id
                        .parse()
                        .map_err(|_| Error::parse(lineno, format!("bad token id `{id}`")))?;
                    if id != tokens.len() {
                        return Err(Error::parse(
                            lineno,
                            format!("expected token id {}, found {id}", tokens.len()),
                        ));
                    }
                    tokens.push(Token::new(a, b, c));
                }
                _ => return Err(Error::parse(lineno, "expected `<id> <l_u> <l_e> <l_v>`")),
            }
        }
        TokenVocabulary::new(max_nodes, tokens)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        TokenVocabulary::parse(&fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_text())?;
        Ok(())
    }

    /// SHA-256 of the text serialization; stored in checkpoints.
    pub fn digest(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(self.to_text().as_bytes());
        h.finalize().into()
    }

    /// Upper bound |V|^2 * |E| on the number of tokens given the label sets
    /// that occur in the vocabulary itself.
    pub fn combination_bound(&self) -> usize {
        let nodes: BTreeSet<&str> = self
            .tokens
            .iter()
            .flat_map(|t| [t.from_label.as_str(), t.to_label.as_str()])
            .collect();
        let edges: BTreeSet<&str> = self.tokens.iter().map(|t| t.edge_label.as_str()).collect();
        nodes.len() * nodes.len() * edges.len()
    }
}

/// Distinct tokens of a corpus in byte order; timestamps must stay below
/// `max_nodes`.
pub fn build_vocabulary(codes: &[ReducedCode], max_nodes: usize) -> Result<TokenVocabulary> {
    if codes.is_empty() {
        return Err(Error::Vocabulary("no codes to build a vocabulary from".into()));
    }
    let per_code: Vec<Result<BTreeSet<Token>>> = codes
        .par_iter()
        .map(|code| {
            let mut set = BTreeSet::new();
            for t in code.entries() {
                if t.from >= max_nodes || t.to >= max_nodes {
                    return Err(Error::Vocabulary(format!(
                        "timestamp in {t} exceeds max_nodes {max_nodes}"
                    )));
                }
                set.insert(t.token.clone());
            }
            Ok(set)
        })
        .collect();
    let mut all = BTreeSet::new();
    for set in per_code {
        all.extend(set?);
    }
    TokenVocabulary::new(max_nodes, all.into_iter().collect())
}

/// Reduced codes with their graph ids, as stored on disk.
pub type NamedCode = (String, ReducedCode);

/// `# <graph_id>` header per code, then one `<t_u> <t_v> <token_id>` line
/// per triplet.
pub fn format_reduced_codes(codes: &[NamedCode], vocab: &TokenVocabulary) -> Result<String> {
    let mut out = String::new();
    for (id, code) in codes {
        writeln!(out, "# {id}").unwrap();
        for t in code.entries() {
            writeln!(out, "{} {} {}", t.from, t.to, vocab.encode(&t.token)?).unwrap();
        }
    }
    Ok(out)
}

pub fn parse_reduced_codes(text: &str, vocab: &TokenVocabulary) -> Result<Vec<NamedCode>> {
    let mut out: Vec<NamedCode> = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
        match tokens[..] {
            [] => continue,
            ["#", id] => out.push((id.to_string(), ReducedCode::default())),
            [a, b, c] => {
                let (_, code) = out
                    .last_mut()
                    .ok_or_else(|| Error::parse(lineno, "triplet before any `#` header"))?;
                let num = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| Error::parse(lineno, format!("bad number `{s}`")))
                };
                let (from, to, id) = (num(a)?, num(b)?, num(c)?);
                let token = vocab
                    .token(id)
                    .ok_or_else(|| Error::parse(lineno, format!("unknown token id {id}")))?
                    .clone();
                code.0.push(Triplet::new(from, to, token));
            }
            _ => return Err(Error::parse(lineno, "expected `# <id>` or `<t_u> <t_v> <token_id>`")),
        }
    }
    Ok(out)
}
