// Copyright 2026 The qpoisson Developers
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except
// in compliance with the License. You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under
// the License.

//! Parser and serializer for the quantum-assembly dialect used by the solver
//! circuit listings.
//!
//! The dialect is a small subset of OpenQASM 2: one `qreg` and one `creg`
//! declaration, gate applications from the fixed gate table (`h`, `x`, `rx`,
//! `ry`, `rz`, `p`, `swap`, `cx`, `ch`, `cry`, `crz`, `cp`/`cu1`, `ccx`),
//! `barrier`, and `measure q[i] -> c[j]`. Statements end at `;` and may span
//! lines; whitespace is insignificant. Comments start with `#` or `//` and run
//! to the end of the line. Angles are `[-] (pi | literal) [/ int | * number]`.
//!
//! There are no `include`s, gate definitions, or conditionals.

use std::fmt;

use crate::gates::{Circuit, GateKind, GateOp};

/// Classification of a parse failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownGate,
    BadArity,
    BadExpression,
    BadRegister,
    Syntax,
}

/// A parse failure with its source position (1-based line and column).
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
    pub kind: ParseErrorKind,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}:{}: {:?}: {}",
            self.line, self.column, self.kind, self.message
        )
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Integer(u64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Semi,
    Arrow,
    Minus,
    Slash,
    Star,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    column: usize,
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(source: &'a str) -> Self {
        Self {
            chars: source.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let ch = self.chars.next()?;
        if ch == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(ch)
    }

    fn skip_line(&mut self) {
        while let Some(&ch) = self.chars.peek() {
            if ch == '\n' {
                break;
            }
            self.bump();
        }
    }

    fn tokenize(mut self) -> Result<Vec<Token>, ParseError> {
        let mut out = Vec::new();
        while let Some(&ch) = self.chars.peek() {
            let (line, column) = (self.line, self.column);
            match ch {
                c if c.is_whitespace() => {
                    self.bump();
                }
                '#' => self.skip_line(),
                '/' => {
                    self.bump();
                    if self.chars.peek() == Some(&'/') {
                        self.skip_line();
                    } else {
                        out.push(Token {
                            tok: Tok::Slash,
                            line,
                            column,
                        });
                    }
                }
                '(' | ')' | '[' | ']' | ',' | ';' | '*' => {
                    self.bump();
                    let tok = match ch {
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBracket,
                        ']' => Tok::RBracket,
                        ',' => Tok::Comma,
                        ';' => Tok::Semi,
                        _ => Tok::Star,
                    };
                    out.push(Token { tok, line, column });
                }
                '-' => {
                    self.bump();
                    if self.chars.peek() == Some(&'>') {
                        self.bump();
                        out.push(Token {
                            tok: Tok::Arrow,
                            line,
                            column,
                        });
                    } else {
                        out.push(Token {
                            tok: Tok::Minus,
                            line,
                            column,
                        });
                    }
                }
                c if c.is_ascii_digit() || c == '.' => {
                    let mut text = String::new();
                    let mut is_integer = true;
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_digit() {
                            text.push(d);
                            self.bump();
                        } else if d == '.' {
                            is_integer = false;
                            text.push(d);
                            self.bump();
                        } else if d == 'e' || d == 'E' {
                            // Exponent, optionally signed.
                            is_integer = false;
                            text.push(d);
                            self.bump();
                            if let Some(&s) = self.chars.peek() {
                                if s == '+' || s == '-' {
                                    text.push(s);
                                    self.bump();
                                }
                            }
                        } else {
                            break;
                        }
                    }
                    if is_integer {
                        match text.parse::<u64>() {
                            Ok(v) => out.push(Token {
                                tok: Tok::Integer(v),
                                line,
                                column,
                            }),
                            Err(_) => {
                                return Err(ParseError {
                                    line,
                                    column,
                                    message: format!("bad integer literal `{text}`"),
                                    kind: ParseErrorKind::BadExpression,
                                })
                            }
                        }
                    } else {
                        match text.parse::<f64>() {
                            Ok(v) if v.is_finite() => out.push(Token {
                                tok: Tok::Number(v),
                                line,
                                column,
                            }),
                            _ => {
                                return Err(ParseError {
                                    line,
                                    column,
                                    message: format!("bad numeric literal `{text}`"),
                                    kind: ParseErrorKind::BadExpression,
                                })
                            }
                        }
                    }
                }
                c if c.is_ascii_alphabetic() || c == '_' => {
                    let mut text = String::new();
                    while let Some(&d) = self.chars.peek() {
                        if d.is_ascii_alphanumeric() || d == '_' {
                            text.push(d);
                            self.bump();
                        } else {
                            break;
                        }
                    }
                    out.push(Token {
                        tok: Tok::Ident(text),
                        line,
                        column,
                    });
                }
                other => {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("unexpected character `{other}`"),
                        kind: ParseErrorKind::Syntax,
                    })
                }
            }
        }
        Ok(out)
    }
}

fn gate_table(name: &str) -> Option<(GateKind, bool)> {
    let kind = match name {
        "h" => GateKind::H,
        "x" => GateKind::X,
        "rx" => GateKind::Rx,
        "ry" => GateKind::Ry,
        "rz" => GateKind::Rz,
        "p" => GateKind::P,
        "swap" => GateKind::Swap,
        "cx" => GateKind::Cx,
        "ch" => GateKind::Ch,
        "cry" => GateKind::Cry,
        "crz" => GateKind::Crz,
        "cp" | "cu1" => GateKind::Cp,
        "ccx" => GateKind::Ccx,
        _ => return None,
    };
    Some((kind, kind.is_parameterized()))
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    qreg: Option<(String, usize)>,
    creg: Option<(String, usize)>,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn next(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos).or_else(|| self.tokens.last()) {
            Some(t) => (t.line, t.column),
            None => (1, 1),
        }
    }

    fn err(&self, kind: ParseErrorKind, message: impl Into<String>) -> ParseError {
        let (line, column) = self.here();
        ParseError {
            line,
            column,
            message: message.into(),
            kind,
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        match self.next() {
            Some(t) if t.tok == want => Ok(()),
            Some(t) => Err(ParseError {
                line: t.line,
                column: t.column,
                message: format!("expected {what}"),
                kind: ParseErrorKind::Syntax,
            }),
            None => {
                let (line, column) = self.here();
                Err(ParseError {
                    line,
                    column,
                    message: format!("expected {what}, found end of input"),
                    kind: ParseErrorKind::Syntax,
                })
            }
        }
    }

    fn expect_integer(&mut self, what: &str) -> Result<u64, ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Integer(v),
                ..
            }) => Ok(v),
            Some(t) => Err(ParseError {
                line: t.line,
                column: t.column,
                message: format!("expected {what}"),
                kind: ParseErrorKind::Syntax,
            }),
            None => Err(self.err(ParseErrorKind::Syntax, format!("expected {what}"))),
        }
    }

    fn expect_ident(&mut self, what: &str) -> Result<(String, usize, usize), ParseError> {
        match self.next() {
            Some(Token {
                tok: Tok::Ident(name),
                line,
                column,
            }) => Ok((name, line, column)),
            Some(t) => Err(ParseError {
                line: t.line,
                column: t.column,
                message: format!("expected {what}"),
                kind: ParseErrorKind::Syntax,
            }),
            None => Err(self.err(ParseErrorKind::Syntax, format!("expected {what}"))),
        }
    }

    /// `name[index]` referencing the declared quantum or classical register.
    fn operand(&mut self, classical: bool) -> Result<usize, ParseError> {
        let (name, line, column) = self.expect_ident("a register operand")?;
        let reg = if classical { &self.creg } else { &self.qreg };
        let (reg_name, size) = match reg {
            Some(r) => r.clone(),
            None => {
                return Err(ParseError {
                    line,
                    column,
                    message: format!(
                        "{} register referenced before declaration",
                        if classical { "classical" } else { "quantum" }
                    ),
                    kind: ParseErrorKind::BadRegister,
                })
            }
        };
        if name != reg_name {
            return Err(ParseError {
                line,
                column,
                message: format!("unknown register `{name}`"),
                kind: ParseErrorKind::BadRegister,
            });
        }
        self.expect(Tok::LBracket, "`[`")?;
        let (iline, icolumn) = self.here();
        let index = self.expect_integer("a register index")? as usize;
        self.expect(Tok::RBracket, "`]`")?;
        if index >= size {
            return Err(ParseError {
                line: iline,
                column: icolumn,
                message: format!("index {index} out of range for `{reg_name}[{size}]`"),
                kind: ParseErrorKind::BadRegister,
            });
        }
        Ok(index)
    }

    /// `[-] (pi | literal) [/ integer | * number]`
    fn angle(&mut self) -> Result<f64, ParseError> {
        let mut negate = false;
        if matches!(self.peek().map(|t| &t.tok), Some(Tok::Minus)) {
            self.next();
            negate = true;
        }
        let base = match self.next() {
            Some(Token {
                tok: Tok::Ident(name),
                line,
                column,
            }) => {
                if name == "pi" {
                    std::f64::consts::PI
                } else {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("expected `pi` or a number, found `{name}`"),
                        kind: ParseErrorKind::BadExpression,
                    });
                }
            }
            Some(Token {
                tok: Tok::Number(v),
                ..
            }) => v,
            Some(Token {
                tok: Tok::Integer(v),
                ..
            }) => v as f64,
            other => {
                let (line, column) = other
                    .map(|t| (t.line, t.column))
                    .unwrap_or_else(|| self.here());
                return Err(ParseError {
                    line,
                    column,
                    message: "expected an angle expression".into(),
                    kind: ParseErrorKind::BadExpression,
                });
            }
        };
        let mut value = base;
        match self.peek().map(|t| t.tok.clone()) {
            Some(Tok::Slash) => {
                self.next();
                let (line, column) = self.here();
                let denom = self.expect_integer("an integer divisor")?;
                if denom == 0 {
                    return Err(ParseError {
                        line,
                        column,
                        message: "division by zero in angle".into(),
                        kind: ParseErrorKind::BadExpression,
                    });
                }
                value /= denom as f64;
            }
            Some(Tok::Star) => {
                self.next();
                let factor = match self.next() {
                    Some(Token {
                        tok: Tok::Number(v),
                        ..
                    }) => v,
                    Some(Token {
                        tok: Tok::Integer(v),
                        ..
                    }) => v as f64,
                    _ => {
                        return Err(self
                            .err(ParseErrorKind::BadExpression, "expected a numeric factor"))
                    }
                };
                value *= factor;
            }
            _ => {}
        }
        Ok(if negate { -value } else { value })
    }

    fn register_decl(&mut self, classical: bool) -> Result<(), ParseError> {
        let (name, line, column) = self.expect_ident("a register name")?;
        self.expect(Tok::LBracket, "`[`")?;
        let size = self.expect_integer("a register size")? as usize;
        self.expect(Tok::RBracket, "`]`")?;
        self.expect(Tok::Semi, "`;`")?;
        let slot = if classical {
            &mut self.creg
        } else {
            &mut self.qreg
        };
        if slot.is_some() {
            return Err(ParseError {
                line,
                column,
                message: format!(
                    "duplicate {} register declaration",
                    if classical { "creg" } else { "qreg" }
                ),
                kind: ParseErrorKind::BadRegister,
            });
        }
        if !classical && size == 0 {
            return Err(ParseError {
                line,
                column,
                message: "quantum register must have at least one qubit".into(),
                kind: ParseErrorKind::BadRegister,
            });
        }
        *slot = Some((name, size));
        Ok(())
    }

    fn qubit_list(&mut self) -> Result<Vec<usize>, ParseError> {
        let mut qubits = vec![self.operand(false)?];
        while matches!(self.peek().map(|t| &t.tok), Some(Tok::Comma)) {
            self.next();
            qubits.push(self.operand(false)?);
        }
        Ok(qubits)
    }
}

/// Parse dialect source into a [`Circuit`]. Never panics on malformed input.
pub fn parse(source: &str) -> Result<Circuit, ParseError> {
    let tokens = Lexer::new(source).tokenize()?;
    let mut p = Parser {
        tokens,
        pos: 0,
        qreg: None,
        creg: None,
    };
    let mut ops: Vec<(GateOp, usize, usize)> = Vec::new();

    while let Some(token) = p.peek().cloned() {
        let (line, column) = (token.line, token.column);
        let name = match token.tok {
            Tok::Ident(name) => {
                p.next();
                name
            }
            Tok::Semi => {
                // Stray semicolons are tolerated as empty statements.
                p.next();
                continue;
            }
            _ => {
                return Err(ParseError {
                    line,
                    column,
                    message: "expected a statement".into(),
                    kind: ParseErrorKind::Syntax,
                })
            }
        };
        match name.as_str() {
            "qreg" => p.register_decl(false)?,
            "creg" => p.register_decl(true)?,
            "barrier" => {
                let qubits = p.qubit_list()?;
                p.expect(Tok::Semi, "`;`")?;
                ops.push((GateOp::barrier(qubits), line, column));
            }
            "measure" => {
                let qubit = p.operand(false)?;
                p.expect(Tok::Arrow, "`->`")?;
                let clbit = p.operand(true)?;
                p.expect(Tok::Semi, "`;`")?;
                ops.push((GateOp::measure(qubit, clbit), line, column));
            }
            gate => {
                let (kind, parameterized) = match gate_table(gate) {
                    Some(entry) => entry,
                    None => {
                        return Err(ParseError {
                            line,
                            column,
                            message: format!("unknown gate `{gate}`"),
                            kind: ParseErrorKind::UnknownGate,
                        })
                    }
                };
                let angle = if matches!(p.peek().map(|t| &t.tok), Some(Tok::LParen)) {
                    if !parameterized {
                        return Err(ParseError {
                            line,
                            column,
                            message: format!("gate `{gate}` takes no angle"),
                            kind: ParseErrorKind::BadArity,
                        });
                    }
                    p.next();
                    let value = p.angle()?;
                    p.expect(Tok::RParen, "`)`")?;
                    Some(value)
                } else if parameterized {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!("gate `{gate}` requires an angle"),
                        kind: ParseErrorKind::BadArity,
                    });
                } else {
                    None
                };
                let qubits = p.qubit_list()?;
                p.expect(Tok::Semi, "`;`")?;
                let expected = kind.arity().unwrap_or(qubits.len());
                if qubits.len() != expected {
                    return Err(ParseError {
                        line,
                        column,
                        message: format!(
                            "gate `{gate}` expects {expected} qubit(s), got {}",
                            qubits.len()
                        ),
                        kind: ParseErrorKind::BadArity,
                    });
                }
                ops.push((GateOp::gate(kind, qubits, angle), line, column));
            }
        }
    }

    let (_, num_qubits) = p.qreg.clone().ok_or_else(|| ParseError {
        line: 1,
        column: 1,
        message: "no quantum register declared".into(),
        kind: ParseErrorKind::BadRegister,
    })?;
    let num_clbits = p.creg.as_ref().map(|(_, n)| *n).unwrap_or(0);

    let mut circuit = Circuit::new(num_qubits, num_clbits);
    for (op, line, column) in ops {
        circuit.append(op).map_err(|e| ParseError {
            line,
            column,
            message: e.to_string(),
            kind: ParseErrorKind::BadArity,
        })?;
    }
    Ok(circuit)
}

/// Format an angle, preferring exact `pi` fractions and multiples where they
/// hold to 1e-15, otherwise a shortest-round-trip decimal.
fn format_angle(theta: f64) -> String {
    use std::f64::consts::PI;
    if theta == 0.0 {
        return "0".into();
    }
    let (sign, mag) = if theta < 0.0 {
        ("-", -theta)
    } else {
        ("", theta)
    };
    if (mag - PI).abs() < 1e-15 {
        return format!("{sign}pi");
    }
    for k in 2..=96u32 {
        if (mag - PI / k as f64).abs() < 1e-15 {
            return format!("{sign}pi/{k}");
        }
    }
    let ratio = mag / PI;
    if ratio > 1.0 && (ratio - ratio.round()).abs() < 1e-15 && ratio.round() <= 64.0 {
        return format!("{sign}pi*{}", ratio.round());
    }
    format!("{theta}")
}

/// Emit dialect source that reparses to a structurally equal circuit.
pub fn serialize(circuit: &Circuit) -> String {
    let mut out = String::new();
    out.push_str(&format!("qreg q[{}];\n", circuit.num_qubits));
    out.push_str(&format!("creg c[{}];\n", circuit.num_clbits));
    for op in circuit.ops() {
        let stmt = match op.kind {
            GateKind::Measure => format!(
                "measure q[{}] -> c[{}];",
                op.qubits[0],
                op.clbit.expect("measure carries a classical bit")
            ),
            GateKind::Barrier => {
                let args: Vec<String> =
                    op.qubits.iter().map(|q| format!("q[{q}]")).collect();
                format!("barrier {};", args.join(","))
            }
            kind => {
                let args: Vec<String> =
                    op.qubits.iter().map(|q| format!("q[{q}]")).collect();
                match op.angle {
                    Some(theta) => {
                        format!("{}({}) {};", kind.name(), format_angle(theta), args.join(","))
                    }
                    None => format!("{} {};", kind.name(), args.join(",")),
                }
            }
        };
        out.push_str(&stmt);
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn parses_declarations_and_a_gate() {
        let c = parse("qreg q[5]; creg c[4]; h q[3];").unwrap();
        assert_eq!(c.num_qubits, 5);
        assert_eq!(c.num_clbits, 4);
        assert_eq!(c.len(), 1);
        assert_eq!(c.ops()[0].kind, GateKind::H);
        assert_eq!(c.ops()[0].qubits, vec![3]);
    }

    #[test]
    fn parses_controlled_rotation_angles() {
        let c = parse("qreg q[3]; creg c[0]; cry(pi/8) q[1],q[2];").unwrap();
        let op = &c.ops()[0];
        assert_eq!(op.kind, GateKind::Cry);
        assert_eq!(op.qubits, vec![1, 2]);
        assert!((op.angle.unwrap() - PI / 8.0).abs() < 1e-15);

        let c = parse("qreg q[3]; cry(-pi/6) q[1],q[0];").unwrap();
        assert!((c.ops()[0].angle.unwrap() + PI / 6.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_index_is_a_register_error() {
        let err = parse("qreg q[5]; creg c[4]; h q[9];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadRegister);
        assert_eq!(err.line, 1);
    }

    #[test]
    fn unknown_gate_reports_position() {
        let err = parse("qreg q[2];\nfoo q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::UnknownGate);
        assert_eq!(err.line, 2);
        assert_eq!(err.column, 1);
    }

    #[test]
    fn arity_and_expression_errors() {
        let err = parse("qreg q[3]; cx q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadArity);

        let err = parse("qreg q[3]; h(pi) q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadArity);

        let err = parse("qreg q[3]; ry q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadArity);

        let err = parse("qreg q[3]; ry(pie) q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadExpression);

        let err = parse("qreg q[3]; cx q[0],q[0];").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadArity);
    }

    #[test]
    fn comments_and_line_wrapped_statements() {
        let src = "# a hash comment\nqreg q[2]; // trailing\ncry(pi/4)\n  q[0],\n  q[1];";
        let c = parse(src).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.ops()[0].qubits, vec![0, 1]);
    }

    #[test]
    fn cu1_aliases_cp() {
        let c = parse("qreg q[2]; cu1(pi/2) q[0],q[1]; cp(pi/2) q[0],q[1];").unwrap();
        assert_eq!(c.ops()[0].kind, GateKind::Cp);
        assert_eq!(c.ops()[0], c.ops()[1]);
    }

    #[test]
    fn serialize_single_h() {
        let mut c = Circuit::new(1, 0);
        c.h(0).unwrap();
        assert_eq!(serialize(&c), "qreg q[1];\ncreg c[0];\nh q[0];\n");
    }

    #[test]
    fn serialize_negative_phase_fraction() {
        let mut c = Circuit::new(2, 0);
        c.cp(-PI / 4.0, 0, 1).unwrap();
        assert!(serialize(&c).contains("cp(-pi/4) q[0],q[1];"));
    }

    #[test]
    fn roundtrip_preserves_structure() {
        let mut c = Circuit::new(4, 2);
        c.h(0).unwrap();
        c.append(GateOp::gate(GateKind::Cry, vec![1, 3], Some(0.123456789012345)))
            .unwrap();
        c.append(GateOp::gate(GateKind::Rz, vec![2], Some(-2.5e-7)))
            .unwrap();
        c.append(GateOp::gate(GateKind::Rx, vec![0], Some(PI)))
            .unwrap();
        c.swap(1, 2).unwrap();
        c.append(GateOp::barrier(vec![0, 3])).unwrap();
        c.measure(3, 1).unwrap();
        let text = serialize(&c);
        let back = parse(&text).unwrap();
        assert!(back.approx_eq(&c, 1e-12), "{text}");
    }

    #[test]
    fn empty_source_has_no_register() {
        let err = parse("").unwrap_err();
        assert_eq!(err.kind, ParseErrorKind::BadRegister);
    }
}
