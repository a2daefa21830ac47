//! Observables written as real combinations of Pauli strings, and 3-vectors.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := [sign] [number '*'] word
//! number := digits ['.' digits] [('e' | 'E') [sign] digits]
//! word   := [IXYZ]+
//! ```
//!
//! Whitespace is ignored between tokens. An omitted coefficient means 1, and repeated
//! words are merged by adding coefficients. Character `k` of a word acts on tensor
//! factor `k` (leftmost is most significant), so `"XZ"` is `sigma_x ⊗ sigma_z`.
//! Error positions are 1-based character columns.

use std::fmt;

use thiserror::Error;

use crate::operator::HermitianOperator;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    pub position: usize,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseErrorKind {
    #[error("empty input")]
    EmptyInput,
    #[error("invalid character '{0}'")]
    InvalidCharacter(char),
    #[error("malformed number '{0}'")]
    MalformedNumber(String),
    #[error("mixed word lengths ({expected} vs {found})")]
    MixedWordLength { expected: usize, found: usize },
    #[error("expected a Pauli word over I, X, Y, Z")]
    ExpectedWord,
    #[error("expected '+' or '-' between terms")]
    ExpectedOperator,
    #[error("expected '*' after coefficient")]
    ExpectedMultiply,
    #[error("expected 3 comma-separated components, found {0}")]
    WrongArity(usize),
}

/// A canonical real combination of Pauli strings: words sorted, no duplicates.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliExpression {
    n_qubits: usize,
    terms: Vec<(f64, String)>,
}

impl PauliExpression {
    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn terms(&self) -> &[(f64, String)] {
        &self.terms
    }

    pub fn to_operator(&self) -> HermitianOperator {
        to_operator(self)
    }
}

impl fmt::Display for PauliExpression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (coef, word)) in self.terms.iter().enumerate() {
            let sign = if coef.is_sign_negative() { "-" } else { "+" };
            match (i, sign) {
                (0, "+") => write!(f, "{:?}*{word}", coef.abs())?,
                (0, _) => write!(f, "-{:?}*{word}", coef.abs())?,
                _ => write!(f, " {sign} {:?}*{word}", coef.abs())?,
            }
        }
        Ok(())
    }
}

struct Cursor {
    chars: Vec<char>,
    pos: usize,
}

impl Cursor {
    fn new(src: &str) -> Self {
        Self { chars: src.chars().collect(), pos: 0 }
    }

    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn peek_at(&self, offset: usize) -> Option<char> {
        self.chars.get(self.pos + offset).copied()
    }

    fn skip_ws(&mut self) {
        while self.peek().is_some_and(char::is_whitespace) {
            self.pos += 1;
        }
    }

    /// 1-based column of the current character.
    fn column(&self) -> usize {
        self.pos + 1
    }

    fn error(&self, kind: ParseErrorKind) -> ParseError {
        ParseError { kind, position: self.column() }
    }

    fn at_number_start(&self) -> bool {
        match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => true,
            Some('+' | '-') => self.peek_at(1).is_some_and(|c| c.is_ascii_digit() || c == '.'),
            _ => false,
        }
    }

    /// Lexes `[sign] digits ['.' digits] [exponent]`.
    fn number(&mut self) -> Result<f64, ParseError> {
        let start = self.pos;
        if matches!(self.peek(), Some('+' | '-')) {
            self.pos += 1;
        }
        let mut mantissa_digits = 0;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
            mantissa_digits += 1;
        }
        if self.peek() == Some('.') {
            self.pos += 1;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
                mantissa_digits += 1;
            }
        }
        let mut ok = mantissa_digits > 0;
        if ok && matches!(self.peek(), Some('e' | 'E')) {
            self.pos += 1;
            if matches!(self.peek(), Some('+' | '-')) {
                self.pos += 1;
            }
            let mut exp_digits = 0;
            while self.peek().is_some_and(|c| c.is_ascii_digit()) {
                self.pos += 1;
                exp_digits += 1;
            }
            ok = exp_digits > 0;
        }
        // absorb trailing junk glued to the literal so the message shows it
        while self.peek().is_some_and(|c| c.is_ascii_digit() || c == '.') {
            self.pos += 1;
            ok = false;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        let value = if ok { text.parse::<f64>().ok().filter(|v| v.is_finite()) } else { None };
        value.ok_or(ParseError {
            kind: ParseErrorKind::MalformedNumber(text),
            position: start + 1,
        })
    }

    fn word(&mut self) -> Result<(String, usize), ParseError> {
        let start = self.pos;
        while self.peek().is_some_and(|c| matches!(c, 'I' | 'X' | 'Y' | 'Z')) {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(match self.peek() {
                Some(c) if !c.is_ascii_alphanumeric() && !matches!(c, '+' | '-' | '*' | '.') => {
                    self.error(ParseErrorKind::InvalidCharacter(c))
                }
                Some(c) if c.is_ascii_alphabetic() => self.error(ParseErrorKind::InvalidCharacter(c)),
                _ => self.error(ParseErrorKind::ExpectedWord),
            });
        }
        Ok((self.chars[start..self.pos].iter().collect(), start + 1))
    }
}

pub fn parse_observable(text: &str) -> Result<PauliExpression, ParseError> {
    let mut cur = Cursor::new(text);
    cur.skip_ws();
    if cur.peek().is_none() {
        return Err(cur.error(ParseErrorKind::EmptyInput));
    }
    let mut raw: Vec<(f64, String)> = Vec::new();
    let mut width: Option<usize> = None;
    let mut sign = 1.0;
    loop {
        cur.skip_ws();
        let coef = if cur.at_number_start() {
            let v = cur.number()?;
            cur.skip_ws();
            if cur.peek() != Some('*') {
                return Err(cur.error(ParseErrorKind::ExpectedMultiply));
            }
            cur.pos += 1;
            cur.skip_ws();
            v
        } else if raw.is_empty() && matches!(cur.peek(), Some('+' | '-')) {
            let s = if cur.peek() == Some('-') { -1.0 } else { 1.0 };
            cur.pos += 1;
            cur.skip_ws();
            s
        } else {
            1.0
        };
        let (word, at) = cur.word()?;
        match width {
            None => width = Some(word.len()),
            Some(w) if w != word.len() => {
                return Err(ParseError {
                    kind: ParseErrorKind::MixedWordLength { expected: w, found: word.len() },
                    position: at,
                })
            }
            _ => {}
        }
        raw.push((sign * coef, word));

        cur.skip_ws();
        match cur.peek() {
            None => break,
            Some('+') => sign = 1.0,
            Some('-') => sign = -1.0,
            Some(c) if c.is_ascii_alphanumeric() || c == '.' || c == '*' => {
                return Err(cur.error(ParseErrorKind::ExpectedOperator))
            }
            Some(c) => return Err(cur.error(ParseErrorKind::InvalidCharacter(c))),
        }
        cur.pos += 1;
        cur.skip_ws();
        if cur.peek().is_none() {
            return Err(cur.error(ParseErrorKind::ExpectedWord));
        }
    }

    raw.sort_by(|a, b| a.1.cmp(&b.1));
    let mut terms: Vec<(f64, String)> = Vec::with_capacity(raw.len());
    for (c, w) in raw {
        match terms.last_mut() {
            Some(last) if last.1 == w => last.0 += c,
            _ => terms.push((c, w)),
        }
    }
    Ok(PauliExpression { n_qubits: width.unwrap_or(0), terms })
}

fn single_qubit(c: char) -> HermitianOperator {
    match c {
        'X' => HermitianOperator::pauli_x(),
        'Y' => HermitianOperator::pauli_y(),
        'Z' => HermitianOperator::pauli_z(),
        _ => HermitianOperator::identity(2),
    }
}

/// Tensor product of the single-qubit factors of one word.
pub fn word_operator(word: &str) -> HermitianOperator {
    word.chars()
        .map(single_qubit)
        .reduce(|acc, op| acc.kron(&op))
        .unwrap_or_else(|| HermitianOperator::identity(1))
}

/// `sum_k coef_k * word_k` as a `2^n x 2^n` matrix.
pub fn to_operator(e: &PauliExpression) -> HermitianOperator {
    let dim = 1usize << e.n_qubits;
    e.terms
        .iter()
        .map(|(c, w)| word_operator(w).scale(*c))
        .fold(HermitianOperator::zero(dim), |acc, t| acc.add(&t).expect("terms share a dimension"))
}

/// Parses `"x,y,z"`.
pub fn parse_vector3(text: &str) -> Result<[f64; 3], ParseError> {
    let mut parts: Vec<(usize, &str)> = Vec::new();
    let mut start = 0;
    for (i, ch) in text.char_indices() {
        if ch == ',' {
            parts.push((start, &text[start..i]));
            start = i + 1;
        }
    }
    parts.push((start, &text[start..]));
    if parts.len() != 3 {
        let position = if parts.len() > 3 {
            text[..parts[3].0].chars().count()
        } else {
            text.chars().count() + 1
        };
        return Err(ParseError { kind: ParseErrorKind::WrongArity(parts.len()), position });
    }
    let mut out = [0.0; 3];
    for (k, (offset, part)) in parts.into_iter().enumerate() {
        let base = text[..offset].chars().count();
        let mut cur = Cursor::new(part);
        cur.skip_ws();
        if cur.peek().is_none() || !cur.at_number_start() {
            let pos = cur.column();
            let shown: String = part.trim().to_string();
            return Err(ParseError { kind: ParseErrorKind::MalformedNumber(shown), position: base + pos });
        }
        let v = cur.number().map_err(|e| ParseError { position: base + e.position, ..e })?;
        cur.skip_ws();
        if let Some(c) = cur.peek() {
            return Err(ParseError {
                kind: ParseErrorKind::InvalidCharacter(c),
                position: base + cur.column(),
            });
        }
        out[k] = v;
    }
    Ok(out)
}
