//! Text formats: varieties, finite algebras, equation systems, word systems,
//! and query pairs. Line-oriented, `#` comments, UTF-8; `;` separates
//! logical lines. Parse errors carry line and column.
//!
//! Variety files:
//!
//! ```text
//! sort 1
//! sort 2
//! op mul : 1 1 -> 1
//! op act : 1 2 -> 2
//! identity [x1:1 x2:1 x3:1] mul(mul(x1,x2),x3) = mul(x1,mul(x2,x3))
//! ```
//!
//! Algebra files:
//!
//! ```text
//! carrier 1: a b
//! carrier 2: p q
//! table mul
//!   a a -> a
//!   a b -> a
//!   b a -> b
//!   b b -> b
//! ```
//!
//! Equation systems use `X:` for the alphabet and `eq` lines for the pairs;
//! word systems give one `op := term` line per operation.

use std::collections::BTreeMap;
use std::fmt;

use crate::geometry::EquationSystem;
use crate::model::{FiniteAlgebra, OpTable};
use crate::signature::{Identity, Signature, SortedAlphabet, VarietySpec};
use crate::term::Term;
use crate::verbal::{designated_vars, Word, WordSystem};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Colon,
    Arrow,
    Assign,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::LBracket => "`[`".to_string(),
            Tok::RBracket => "`]`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Colon => "`:`".to_string(),
            Tok::Arrow => "`->`".to_string(),
            Tok::Assign => "`:=`".to_string(),
            Tok::Eq => "`=`".to_string(),
        }
    }
}

#[derive(Debug, Clone)]
struct Line {
    number: usize,
    toks: Vec<(Tok, usize)>,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

/// Splits the input into logical lines of tokens. `;` acts as a line break;
/// `#` starts a comment.
fn lex(text: &str) -> Result<Vec<Line>, ParseError> {
    let mut lines = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let mut toks: Vec<(Tok, usize)> = Vec::new();
        let mut chars = raw.char_indices().peekable();
        while let Some(&(at, c)) = chars.peek() {
            let col = at + 1;
            match c {
                '#' => break,
                ';' => {
                    chars.next();
                    if !toks.is_empty() {
                        lines.push(Line {
                            number: lineno,
                            toks: std::mem::take(&mut toks),
                        });
                    }
                }
                c if c.is_whitespace() => {
                    chars.next();
                }
                '(' => {
                    chars.next();
                    toks.push((Tok::LParen, col));
                }
                ')' => {
                    chars.next();
                    toks.push((Tok::RParen, col));
                }
                '[' => {
                    chars.next();
                    toks.push((Tok::LBracket, col));
                }
                ']' => {
                    chars.next();
                    toks.push((Tok::RBracket, col));
                }
                ',' => {
                    chars.next();
                    toks.push((Tok::Comma, col));
                }
                '=' => {
                    chars.next();
                    toks.push((Tok::Eq, col));
                }
                ':' => {
                    chars.next();
                    if let Some(&(_, '=')) = chars.peek() {
                        chars.next();
                        toks.push((Tok::Assign, col));
                    } else {
                        toks.push((Tok::Colon, col));
                    }
                }
                '-' => {
                    chars.next();
                    match chars.peek() {
                        Some(&(_, '>')) => {
                            chars.next();
                            toks.push((Tok::Arrow, col));
                        }
                        _ => {
                            return Err(ParseError {
                                line: lineno,
                                col,
                                message: "stray `-` (expected `->`)".to_string(),
                            })
                        }
                    }
                }
                c if is_ident_char(c) => {
                    let mut ident = String::new();
                    while let Some(&(_, c2)) = chars.peek() {
                        if is_ident_char(c2) {
                            ident.push(c2);
                            chars.next();
                        } else {
                            break;
                        }
                    }
                    toks.push((Tok::Ident(ident), col));
                }
                other => {
                    return Err(ParseError {
                        line: lineno,
                        col,
                        message: format!("unexpected character `{other}`"),
                    })
                }
            }
        }
        if !toks.is_empty() {
            lines.push(Line {
                number: lineno,
                toks,
            });
        }
    }
    Ok(lines)
}

/// Cursor over one logical line.
struct Cursor<'a> {
    line: &'a Line,
    at: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: &'a Line) -> Self {
        Cursor { line, at: 0 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.line.toks.get(self.at).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.line
            .toks
            .get(self.at)
            .map(|(_, c)| *c)
            .unwrap_or_else(|| self.line.toks.last().map(|(_, c)| c + 1).unwrap_or(1))
    }

    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            line: self.line.number,
            col: self.col(),
            message: message.into(),
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), ParseError> {
        match self.peek() {
            Some(t) if t == tok => {
                self.at += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!(
                "expected {}, found {}",
                tok.describe(),
                t.describe()
            ))),
            None => Err(self.error(format!("expected {}, found end of line", tok.describe()))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.at += 1;
                Ok(s)
            }
            Some(t) => Err(self.error(format!("expected {what}, found {}", t.describe()))),
            None => Err(self.error(format!("expected {what}, found end of line"))),
        }
    }

    fn done(&self) -> bool {
        self.at >= self.line.toks.len()
    }

    fn expect_done(&self) -> Result<(), ParseError> {
        if self.done() {
            Ok(())
        } else {
            Err(self.error("unexpected trailing tokens"))
        }
    }
}

/// Parses a term: `name` (variable) or `name(args...)` (operation). Sorts
/// come from the alphabet for variables and the signature for operations;
/// applications are checked against the operation types as they are built.
fn parse_term(
    cursor: &mut Cursor,
    sig: &Signature,
    alphabet: &SortedAlphabet,
) -> Result<Term, ParseError> {
    let start_col = cursor.col();
    let name = cursor.ident("a term")?;
    if let Some(Tok::LParen) = cursor.peek() {
        cursor.expect(&Tok::LParen)?;
        let mut args = Vec::new();
        if cursor.peek() != Some(&Tok::RParen) {
            loop {
                args.push(parse_term(cursor, sig, alphabet)?);
                match cursor.peek() {
                    Some(Tok::Comma) => {
                        cursor.expect(&Tok::Comma)?;
                    }
                    _ => break,
                }
            }
        }
        cursor.expect(&Tok::RParen)?;
        Term::app(sig, &name, args).map_err(|e| ParseError {
            line: cursor.line.number,
            col: start_col,
            message: e.to_string(),
        })
    } else {
        match alphabet.sort_of(&name) {
            Some(sort) => Ok(Term::var(name, sort)),
            None => Err(ParseError {
                line: cursor.line.number,
                col: start_col,
                message: format!("variable `{name}` not declared in the alphabet"),
            }),
        }
    }
}

/// Parses `x:sort` pairs until the stop token (exclusive) or end of line.
fn parse_var_decls(cursor: &mut Cursor, stop: Option<&Tok>) -> Result<SortedAlphabet, ParseError> {
    let mut alphabet = SortedAlphabet::new();
    loop {
        match (cursor.peek(), stop) {
            (None, None) => break,
            (Some(t), Some(s)) if t == s => break,
            (None, Some(s)) => {
                return Err(cursor.error(format!("expected {}, found end of line", s.describe())))
            }
            _ => {}
        }
        let var_col = cursor.col();
        let var = cursor.ident("a variable name")?;
        cursor.expect(&Tok::Colon)?;
        let sort = cursor.ident("a sort name")?;
        if alphabet.vars.insert(var.clone(), sort).is_some() {
            return Err(ParseError {
                line: cursor.line.number,
                col: var_col,
                message: format!("variable `{var}` declared twice"),
            });
        }
    }
    Ok(alphabet)
}

/// Parses a variety file into a validated specification.
pub fn parse_variety(text: &str) -> Result<VarietySpec, ParseError> {
    let lines = lex(text)?;
    let mut sig = Signature::new();
    let mut pending: Vec<(Line, SortedAlphabet)> = Vec::new();

    for line in &lines {
        let mut cursor = Cursor::new(line);
        let keyword = cursor.ident("a declaration keyword")?;
        match keyword.as_str() {
            "sort" => {
                let name = cursor.ident("a sort name")?;
                cursor.expect_done()?;
                if !sig.sorts.insert(name.clone()) {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("sort `{name}` declared twice"),
                    });
                }
            }
            "op" => {
                let name = cursor.ident("an operation name")?;
                cursor.expect(&Tok::Colon)?;
                let mut args = Vec::new();
                while cursor.peek() != Some(&Tok::Arrow) {
                    args.push(cursor.ident("an argument sort or `->`")?);
                }
                cursor.expect(&Tok::Arrow)?;
                let result = cursor.ident("a result sort")?;
                cursor.expect_done()?;
                if sig.ops.contains_key(&name) {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("op `{name}` declared twice"),
                    });
                }
                sig.ops
                    .insert(name, crate::signature::OpType::new(args, result));
            }
            "identity" => {
                cursor.expect(&Tok::LBracket)?;
                let alphabet = parse_var_decls(&mut cursor, Some(&Tok::RBracket))?;
                cursor.expect(&Tok::RBracket)?;
                // term parsing waits until the signature is complete
                let rest = Line {
                    number: line.number,
                    toks: line.toks[cursor.at..].to_vec(),
                };
                pending.push((rest, alphabet));
            }
            other => {
                return Err(ParseError {
                    line: line.number,
                    col: 1,
                    message: format!(
                        "unknown declaration `{other}` (expected sort, op, or identity)"
                    ),
                })
            }
        }
    }

    if sig.sorts.is_empty() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: "no sorts declared".to_string(),
        });
    }

    let mut identities = Vec::new();
    for (rest, alphabet) in pending {
        let mut cursor = Cursor::new(&rest);
        let lhs = parse_term(&mut cursor, &sig, &alphabet)?;
        cursor.expect(&Tok::Eq)?;
        let rhs = parse_term(&mut cursor, &sig, &alphabet)?;
        cursor.expect_done()?;
        if lhs.sort() != rhs.sort() {
            return Err(ParseError {
                line: rest.number,
                col: 1,
                message: format!(
                    "identity sides have different sorts `{}` and `{}`",
                    lhs.sort(),
                    rhs.sort()
                ),
            });
        }
        identities.push(Identity { alphabet, lhs, rhs });
    }

    let spec = VarietySpec {
        signature: sig,
        identities,
    };
    let report = crate::signature::validate_variety(&spec);
    if !report.is_ok() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: report.to_string(),
        });
    }
    Ok(spec)
}

/// Parses an algebra file against a signature. Tables must be total; a
/// missing row is an error naming the tuple.
pub fn parse_algebra(text: &str, sig: &Signature) -> Result<FiniteAlgebra, ParseError> {
    let lines = lex(text)?;
    let mut carriers: BTreeMap<String, Vec<String>> = BTreeMap::new();
    // op -> (declaration line, rows)
    let mut raw_tables: BTreeMap<String, (usize, Vec<(Vec<String>, String, usize)>)> =
        BTreeMap::new();
    let mut current_table: Option<String> = None;

    for line in &lines {
        let mut cursor = Cursor::new(line);
        let first = match cursor.peek() {
            Some(Tok::Ident(s)) => s.clone(),
            _ => return Err(cursor.error("expected a declaration or table row")),
        };
        match first.as_str() {
            "carrier" => {
                cursor.ident("keyword")?;
                let sort = cursor.ident("a sort name")?;
                cursor.expect(&Tok::Colon)?;
                let mut elems = Vec::new();
                while !cursor.done() {
                    elems.push(cursor.ident("an element name")?);
                }
                if !sig.has_sort(&sort) {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("carrier for undeclared sort `{sort}`"),
                    });
                }
                if carriers.insert(sort.clone(), elems).is_some() {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("carrier for sort `{sort}` declared twice"),
                    });
                }
                current_table = None;
            }
            "table" => {
                cursor.ident("keyword")?;
                let op = cursor.ident("an operation name")?;
                cursor.expect_done()?;
                if sig.op(&op).is_none() {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("table for undeclared op `{op}`"),
                    });
                }
                if raw_tables.contains_key(&op) {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!("table for op `{op}` declared twice"),
                    });
                }
                raw_tables.insert(op.clone(), (line.number, Vec::new()));
                current_table = Some(op);
            }
            _ => {
                let op = current_table.clone().ok_or_else(|| ParseError {
                    line: line.number,
                    col: 1,
                    message: "table row outside a table block".to_string(),
                })?;
                let mut args = Vec::new();
                while cursor.peek() != Some(&Tok::Arrow) {
                    args.push(cursor.ident("an element name or `->`")?);
                }
                cursor.expect(&Tok::Arrow)?;
                let result = cursor.ident("a result element")?;
                cursor.expect_done()?;
                raw_tables
                    .get_mut(&op)
                    .expect("current table recorded")
                    .1
                    .push((args, result, line.number));
            }
        }
    }

    for sort in &sig.sorts {
        carriers.entry(sort.clone()).or_default();
    }
    let elem_index = |sort: &str, name: &str, lineno: usize| -> Result<usize, ParseError> {
        carriers[sort]
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| ParseError {
                line: lineno,
                col: 1,
                message: format!("element `{name}` is not in the carrier of sort `{sort}`"),
            })
    };

    let mut tables = BTreeMap::new();
    for (op, ty) in &sig.ops {
        let sizes: Vec<usize> = ty.args.iter().map(|s| carriers[s].len()).collect();
        let domain: usize = sizes.iter().product();
        let (decl_line, rows) = match raw_tables.get(op) {
            Some(t) => (t.0, &t.1),
            None if domain == 0 => {
                tables.insert(op.clone(), OpTable { data: vec![] });
                continue;
            }
            None => {
                return Err(ParseError {
                    line: 1,
                    col: 1,
                    message: format!("missing table for op `{op}`"),
                })
            }
        };
        let mut data: Vec<Option<usize>> = vec![None; domain];
        for (args, result, lineno) in rows {
            if args.len() != ty.args.len() {
                return Err(ParseError {
                    line: *lineno,
                    col: 1,
                    message: format!(
                        "table `{op}`: row has {} arguments, expected {}",
                        args.len(),
                        ty.args.len()
                    ),
                });
            }
            let mut flat = 0usize;
            for ((name, sort), size) in args.iter().zip(&ty.args).zip(&sizes) {
                let idx = elem_index(sort, name, *lineno)?;
                flat = flat * size + idx;
            }
            let out = elem_index(&ty.result, result, *lineno)?;
            if data[flat].is_some() {
                return Err(ParseError {
                    line: *lineno,
                    col: 1,
                    message: format!("table `{op}`: duplicate row for ({})", args.join(", ")),
                });
            }
            data[flat] = Some(out);
        }
        if let Some(missing) = data.iter().position(Option::is_none) {
            let mut tuple = Vec::new();
            let mut rest = missing;
            for (sort, size) in ty.args.iter().zip(&sizes).rev() {
                tuple.push(carriers[sort][rest % size].clone());
                rest /= size;
            }
            tuple.reverse();
            return Err(ParseError {
                line: decl_line,
                col: 1,
                message: format!("table `{op}`: missing row for tuple ({})", tuple.join(", ")),
            });
        }
        tables.insert(
            op.clone(),
            OpTable {
                data: data.into_iter().map(Option::unwrap).collect(),
            },
        );
    }

    let alg = FiniteAlgebra {
        signature: sig.clone(),
        carriers,
        tables,
    };
    alg.validate().map_err(|e| ParseError {
        line: 1,
        col: 1,
        message: e.to_string(),
    })?;
    Ok(alg)
}

/// Parses an equation system: an `X:` alphabet line followed by `eq` lines.
pub fn parse_equation_system(text: &str, sig: &Signature) -> Result<EquationSystem, ParseError> {
    let lines = lex(text)?;
    let mut alphabet: Option<SortedAlphabet> = None;
    let mut pairs = Vec::new();
    for line in &lines {
        let mut cursor = Cursor::new(line);
        let keyword = cursor.ident("`X` or `eq`")?;
        match keyword.as_str() {
            "X" => {
                cursor.expect(&Tok::Colon)?;
                let decls = parse_var_decls(&mut cursor, None)?;
                if alphabet.replace(decls).is_some() {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: "alphabet declared twice".to_string(),
                    });
                }
            }
            "eq" => {
                let alphabet = alphabet.as_ref().ok_or_else(|| ParseError {
                    line: line.number,
                    col: 1,
                    message: "equation before the alphabet declaration".to_string(),
                })?;
                let lhs = parse_term(&mut cursor, sig, alphabet)?;
                cursor.expect(&Tok::Eq)?;
                let rhs = parse_term(&mut cursor, sig, alphabet)?;
                cursor.expect_done()?;
                if lhs.sort() != rhs.sort() {
                    return Err(ParseError {
                        line: line.number,
                        col: 1,
                        message: format!(
                            "equation sides have different sorts `{}` and `{}`",
                            lhs.sort(),
                            rhs.sort()
                        ),
                    });
                }
                pairs.push((lhs, rhs));
            }
            other => {
                return Err(ParseError {
                    line: line.number,
                    col: 1,
                    message: format!("unknown keyword `{other}` (expected `X` or `eq`)"),
                })
            }
        }
    }
    let alphabet = alphabet.ok_or_else(|| ParseError {
        line: 1,
        col: 1,
        message: "missing alphabet line (`X: x1:sort ...`)".to_string(),
    })?;
    EquationSystem::new(alphabet, pairs).map_err(|e| ParseError {
        line: 1,
        col: 1,
        message: e.to_string(),
    })
}

/// Parses a word system: one `op := term` line per operation, variables
/// `x1..xn` typed by the operation's argument sorts.
pub fn parse_word_system(text: &str, sig: &Signature) -> Result<WordSystem, ParseError> {
    let lines = lex(text)?;
    let mut words = BTreeMap::new();
    for line in &lines {
        let mut cursor = Cursor::new(line);
        let op = cursor.ident("an operation name")?;
        let ty = sig.op(&op).ok_or_else(|| ParseError {
            line: line.number,
            col: 1,
            message: format!("unknown operation `{op}`"),
        })?;
        cursor.expect(&Tok::Assign)?;
        let alphabet = designated_vars(ty);
        let body = parse_term(&mut cursor, sig, &alphabet)?;
        cursor.expect_done()?;
        let word = Word::new(ty.clone(), body).map_err(|e| ParseError {
            line: line.number,
            col: 1,
            message: e.to_string(),
        })?;
        if words.insert(op.clone(), word).is_some() {
            return Err(ParseError {
                line: line.number,
                col: 1,
                message: format!("word for `{op}` given twice"),
            });
        }
    }
    WordSystem::new(sig, words).map_err(|e| ParseError {
        line: 1,
        col: 1,
        message: e.to_string(),
    })
}

/// Parses a one-line query pair `t1 = t2` over the given alphabet.
pub fn parse_query(
    text: &str,
    sig: &Signature,
    alphabet: &SortedAlphabet,
) -> Result<(Term, Term), ParseError> {
    let lines = lex(text)?;
    if lines.len() != 1 {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: format!("expected exactly one query line, found {}", lines.len()),
        });
    }
    let mut cursor = Cursor::new(&lines[0]);
    let lhs = parse_term(&mut cursor, sig, alphabet)?;
    cursor.expect(&Tok::Eq)?;
    let rhs = parse_term(&mut cursor, sig, alphabet)?;
    cursor.expect_done()?;
    if lhs.sort() != rhs.sort() {
        return Err(ParseError {
            line: 1,
            col: 1,
            message: format!(
                "query sides have different sorts `{}` and `{}`",
                lhs.sort(),
                rhs.sort()
            ),
        });
    }
    Ok((lhs, rhs))
}

fn alphabet_decl(alphabet: &SortedAlphabet) -> String {
    alphabet
        .vars
        .iter()
        .map(|(v, s)| format!("{v}:{s}"))
        .collect::<Vec<_>>()
        .join(" ")
}

/// Renders a variety spec in the file format.
pub fn print_variety(spec: &VarietySpec) -> String {
    let mut out = String::new();
    for sort in &spec.signature.sorts {
        out.push_str(&format!("sort {sort}\n"));
    }
    for (op, ty) in &spec.signature.ops {
        out.push_str(&format!(
            "op {op} : {}-> {}\n",
            ty.args.iter().map(|s| format!("{s} ")).collect::<String>(),
            ty.result
        ));
    }
    for identity in &spec.identities {
        out.push_str(&format!(
            "identity [{}] {} = {}\n",
            alphabet_decl(&identity.alphabet),
            identity.lhs,
            identity.rhs
        ));
    }
    out
}

/// Renders a finite algebra in the file format.
pub fn print_algebra(alg: &FiniteAlgebra) -> String {
    let mut out = String::new();
    for (sort, elems) in &alg.carriers {
        out.push_str(&format!("carrier {sort}:"));
        for e in elems {
            out.push_str(&format!(" {e}"));
        }
        out.push('\n');
    }
    for (op, ty) in &alg.signature.ops {
        let sizes: Vec<usize> = ty.args.iter().map(|s| alg.carrier_size(s)).collect();
        let domain: usize = sizes.iter().product();
        if domain == 0 || alg.carrier_size(&ty.result) == 0 {
            continue;
        }
        out.push_str(&format!("table {op}\n"));
        let mut args = vec![0usize; sizes.len()];
        for _ in 0..domain {
            out.push(' ');
            for (&a, sort) in args.iter().zip(&ty.args) {
                out.push_str(&format!(" {}", alg.element_name(sort, a)));
            }
            let result = alg.apply(op, &args);
            out.push_str(&format!(" -> {}\n", alg.element_name(&ty.result, result)));
            for pos in (0..args.len()).rev() {
                args[pos] += 1;
                if args[pos] < sizes[pos] {
                    break;
                }
                args[pos] = 0;
            }
        }
    }
    out
}

/// Renders an equation system in the file format.
pub fn print_equation_system(system: &EquationSystem) -> String {
    let mut out = format!("X: {}\n", alphabet_decl(&system.alphabet));
    for (lhs, rhs) in &system.pairs {
        out.push_str(&format!("eq {lhs} = {rhs}\n"));
    }
    out
}

/// Renders a word system in the file format.
pub fn print_word_system(system: &WordSystem) -> String {
    let mut out = String::new();
    for (op, word) in &system.words {
        out.push_str(&format!("{op} := {}\n", word.body));
    }
    out
}
