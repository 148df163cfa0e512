//! Lexer and parser for the scenario language, a strict subset of the
//! GridLAB-D `.glm` surface syntax.
//!
//! The parser is structural only: it checks syntax, class names, units and
//! duplicate keys, and leaves cross-references and topology to
//! [`validate`](super::validate).

use std::collections::HashSet;
use std::fmt;

use super::model::{
    ClockConfig, GridObject, ObjectClass, Position, Property, ScenarioModel, Value,
};
use crate::attack::{AttackConfig, AttackKind};
use crate::kernel::{Schedule, ScheduleEntry};
use crate::powerflow::LineStatus;
use crate::recorder::{PlayerConfig, RecorderConfig};
use crate::time::Timestamp;
use crate::units::{Unit, UnitClass};

const MAX_EXACT_SEED: f64 = 9_007_199_254_740_992.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{position}: {kind}")]
pub struct ParseError {
    pub position: Position,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseErrorKind {
    #[error("unexpected character '{0}'")]
    UnexpectedChar(char),
    #[error("unterminated string")]
    UnterminatedString,
    #[error("malformed number '{0}'")]
    MalformedNumber(String),
    #[error("expected {expected}, found {found}")]
    Unexpected { expected: String, found: String },
    #[error("unknown object class '{0}'")]
    UnknownClass(String),
    #[error("unknown unit '{0}'")]
    UnknownUnit(String),
    #[error("duplicate property '{0}'")]
    DuplicateProperty(String),
    #[error("{block} block is missing '{field}'")]
    MissingField {
        block: &'static str,
        field: &'static str,
    },
    #[error("invalid value for '{key}': {reason}")]
    InvalidValue { key: String, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Number(f64),
    Complex(f64, f64),
    Str(String),
    Unit(String),
    LBrace,
    RBrace,
    Semi,
    Comma,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Ident(s) => write!(f, "'{s}'"),
            Tok::Number(n) => write!(f, "number {n}"),
            Tok::Complex(..) => f.write_str("complex number"),
            Tok::Str(s) => write!(f, "string \"{s}\""),
            Tok::Unit(u) => write!(f, "unit '{u}'"),
            Tok::LBrace => f.write_str("'{'"),
            Tok::RBrace => f.write_str("'}'"),
            Tok::Semi => f.write_str("';'"),
            Tok::Comma => f.write_str("','"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

struct Lexer<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: usize,
    column: usize,
}

impl<'a> Lexer<'a> {
    fn new(text: &'a str) -> Self {
        Lexer {
            chars: text.chars().peekable(),
            line: 1,
            column: 1,
        }
    }

    fn pos(&self) -> Position {
        Position {
            line: self.line,
            column: self.column,
        }
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn skip_trivia(&mut self) {
        loop {
            match self.peek() {
                Some(c) if c.is_whitespace() => {
                    self.bump();
                }
                Some('/') => {
                    let mut probe = self.chars.clone();
                    probe.next();
                    if probe.next() == Some('/') {
                        while let Some(c) = self.peek() {
                            if c == '\n' {
                                break;
                            }
                            self.bump();
                        }
                    } else {
                        return;
                    }
                }
                _ => return,
            }
        }
    }

    fn err(&self, position: Position, kind: ParseErrorKind) -> ParseError {
        ParseError { position, kind }
    }

    fn take_while(&mut self, mut pred: impl FnMut(char) -> bool) -> String {
        let mut out = String::new();
        while let Some(c) = self.peek() {
            if !pred(c) {
                break;
            }
            out.push(c);
            self.bump();
        }
        out
    }

    fn number_text(&mut self) -> String {
        let mut text = String::new();
        if let Some(c @ ('+' | '-')) = self.peek() {
            text.push(c);
            self.bump();
        }
        text.push_str(&self.take_while(|c| c.is_ascii_digit() || c == '.'));
        if let Some(c @ ('e' | 'E')) = self.peek() {
            // Only an exponent if digits follow.
            let mut probe = self.chars.clone();
            probe.next();
            let next = probe.next();
            let next2 = probe.next();
            let is_exp = match next {
                Some(d) if d.is_ascii_digit() => true,
                Some('+' | '-') => matches!(next2, Some(d) if d.is_ascii_digit()),
                _ => false,
            };
            if is_exp {
                text.push(c);
                self.bump();
                if let Some(s @ ('+' | '-')) = self.peek() {
                    text.push(s);
                    self.bump();
                }
                text.push_str(&self.take_while(|c| c.is_ascii_digit()));
            }
        }
        text
    }

    fn parse_f64(&self, text: &str, at: Position) -> Result<f64, ParseError> {
        let v: f64 = text
            .parse()
            .map_err(|_| self.err(at, ParseErrorKind::MalformedNumber(text.to_string())))?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.err(at, ParseErrorKind::MalformedNumber(text.to_string())))
        }
    }

    fn next_token(&mut self) -> Result<(Tok, Position), ParseError> {
        self.skip_trivia();
        let at = self.pos();
        let Some(c) = self.peek() else {
            return Ok((Tok::Eof, at));
        };
        let tok = match c {
            '{' => {
                self.bump();
                Tok::LBrace
            }
            '}' => {
                self.bump();
                Tok::RBrace
            }
            ';' => {
                self.bump();
                Tok::Semi
            }
            ',' => {
                self.bump();
                Tok::Comma
            }
            '"' | '\'' => {
                self.bump();
                let mut s = String::new();
                loop {
                    match self.bump() {
                        Some(q) if q == c => break,
                        Some('\n') | None => {
                            return Err(self.err(at, ParseErrorKind::UnterminatedString))
                        }
                        Some(other) => s.push(other),
                    }
                }
                Tok::Str(s)
            }
            '$' => {
                Tok::Unit(self.take_while(|c| c.is_ascii_alphanumeric() || c == '$' || c == '/'))
            }
            c if c.is_ascii_digit() || c == '.' || c == '-' || c == '+' => {
                let text = self.number_text();
                let re = self.parse_f64(&text, at)?;
                if let Some('+' | '-') = self.peek() {
                    let im_text = self.number_text();
                    if self.peek() != Some('j') {
                        return Err(self.err(
                            at,
                            ParseErrorKind::MalformedNumber(format!("{text}{im_text}")),
                        ));
                    }
                    self.bump();
                    let im = self.parse_f64(&im_text, at)?;
                    Tok::Complex(re, im)
                } else {
                    Tok::Number(re)
                }
            }
            c if c.is_alphabetic() || c == '_' => {
                let word = self.take_while(|c| c.is_alphanumeric() || c == '_');
                if self.peek() == Some('/') {
                    // Compound units such as "$/kWh" are lexed from '$'; other
                    // slashes are not part of the language.
                    return Err(self.err(self.pos(), ParseErrorKind::UnexpectedChar('/')));
                }
                Tok::Ident(word)
            }
            other => return Err(self.err(at, ParseErrorKind::UnexpectedChar(other))),
        };
        Ok((tok, at))
    }
}

struct Parser<'a> {
    lexer: Lexer<'a>,
    tok: Tok,
    at: Position,
}

/// Raw `key value;` entries of a block, with duplicate detection.
struct Fields {
    block: &'static str,
    entries: Vec<(String, Value, Position)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<(Value, Position)> {
        let idx = self.entries.iter().position(|(k, _, _)| k == key)?;
        let (_, v, p) = self.entries.remove(idx);
        Some((v, p))
    }

    fn require(
        &mut self,
        key: &'static str,
        block_at: Position,
    ) -> Result<(Value, Position), ParseError> {
        self.take(key).ok_or(ParseError {
            position: block_at,
            kind: ParseErrorKind::MissingField {
                block: self.block,
                field: key,
            },
        })
    }

    fn reject_leftovers(&self) -> Result<(), ParseError> {
        match self.entries.first() {
            Some((k, _, p)) => Err(ParseError {
                position: *p,
                kind: ParseErrorKind::Unexpected {
                    expected: format!("a {} field", self.block),
                    found: format!("'{k}'"),
                },
            }),
            None => Ok(()),
        }
    }
}

fn invalid(key: &str, at: Position, reason: impl fmt::Display) -> ParseError {
    ParseError {
        position: at,
        kind: ParseErrorKind::InvalidValue {
            key: key.to_string(),
            reason: reason.to_string(),
        },
    }
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Result<Self, ParseError> {
        let mut lexer = Lexer::new(text);
        let (tok, at) = lexer.next_token()?;
        Ok(Parser { lexer, tok, at })
    }

    fn advance(&mut self) -> Result<Tok, ParseError> {
        let (next, at) = self.lexer.next_token()?;
        self.at = at;
        Ok(std::mem::replace(&mut self.tok, next))
    }

    fn unexpected(&self, expected: &str) -> ParseError {
        ParseError {
            position: self.at,
            kind: ParseErrorKind::Unexpected {
                expected: expected.to_string(),
                found: self.tok.to_string(),
            },
        }
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<(), ParseError> {
        if self.tok == want {
            self.advance()?;
            Ok(())
        } else {
            Err(self.unexpected(what))
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, ParseError> {
        match &self.tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.advance()?;
                Ok(s)
            }
            _ => Err(self.unexpected(what)),
        }
    }

    fn optional_name(&mut self) -> Result<Option<String>, ParseError> {
        match &self.tok {
            Tok::Ident(_) => self.ident("block name").map(Some),
            _ => Ok(None),
        }
    }

    fn unit_after_number(&mut self) -> Result<Option<Unit>, ParseError> {
        let sym = match &self.tok {
            Tok::Ident(s) | Tok::Unit(s) => s.clone(),
            _ => return Ok(None),
        };
        let at = self.at;
        match Unit::parse(&sym) {
            Some(u) => {
                self.advance()?;
                Ok(Some(u))
            }
            None => Err(ParseError {
                position: at,
                kind: ParseErrorKind::UnknownUnit(sym),
            }),
        }
    }

    fn value(&mut self) -> Result<Value, ParseError> {
        match self.tok.clone() {
            Tok::Number(n) => {
                self.advance()?;
                let unit = self.unit_after_number()?;
                Ok(Value::Number { value: n, unit })
            }
            Tok::Complex(re, im) => {
                self.advance()?;
                let unit = self.unit_after_number()?;
                Ok(Value::Complex { re, im, unit })
            }
            Tok::Str(s) => {
                self.advance()?;
                Ok(Value::Text(s))
            }
            Tok::Ident(first) => {
                self.advance()?;
                if self.tok != Tok::Comma {
                    return Ok(Value::Word(first));
                }
                let mut items = vec![first];
                while self.tok == Tok::Comma {
                    self.advance()?;
                    items.push(self.ident("a name after ','")?);
                }
                Ok(Value::List(items))
            }
            _ => Err(self.unexpected("a value")),
        }
    }

    /// Parses `{ (IDENT value ;)* }` into raw fields.
    fn fields(&mut self, block: &'static str) -> Result<Fields, ParseError> {
        self.expect(Tok::LBrace, "'{'")?;
        let mut seen = HashSet::new();
        let mut entries = Vec::new();
        while self.tok != Tok::RBrace {
            let at = self.at;
            let key = self.ident("a property name or '}'")?;
            let value = self.value()?;
            self.expect(Tok::Semi, "';'")?;
            if !seen.insert(key.clone()) {
                return Err(ParseError {
                    position: at,
                    kind: ParseErrorKind::DuplicateProperty(key),
                });
            }
            entries.push((key, value, at));
        }
        self.advance()?;
        Ok(Fields { block, entries })
    }

    fn object(&mut self) -> Result<GridObject, ParseError> {
        let at = self.at;
        let class_at = self.at;
        let class_word = self.ident("an object class")?;
        let class = ObjectClass::parse(&class_word).ok_or(ParseError {
            position: class_at,
            kind: ParseErrorKind::UnknownClass(class_word),
        })?;
        let mut fields = self.fields("object")?;
        let (name, name_at) = fields.require("name", at)?;
        let name = match name {
            Value::Word(w) | Value::Text(w) => w,
            other => {
                return Err(invalid(
                    "name",
                    name_at,
                    format!("expected an identifier, found {other}"),
                ))
            }
        };
        let properties = fields
            .entries
            .into_iter()
            .map(|(key, value, _)| Property { key, value })
            .collect();
        Ok(GridObject {
            class,
            name,
            properties,
            position: at,
        })
    }

    fn clock(&mut self, at: Position) -> Result<ClockConfig, ParseError> {
        let mut f = self.fields("clock")?;
        let ts = |f: &mut Fields, key: &'static str| -> Result<Timestamp, ParseError> {
            let (v, p) = f.require(key, at)?;
            v.as_timestamp().map_err(|e| invalid(key, p, e))
        };
        let start = ts(&mut f, "start")?;
        let stop = ts(&mut f, "stop")?;
        let (v, p) = f.require("timestep", at)?;
        let secs = v
            .as_quantity(UnitClass::Time)
            .map_err(|e| invalid("timestep", p, e))?;
        if secs.fract() != 0.0 || secs < i64::MIN as f64 || secs > i64::MAX as f64 {
            return Err(invalid("timestep", p, "must be a whole number of seconds"));
        }
        f.reject_leftovers()?;
        Ok(ClockConfig {
            start,
            stop,
            timestep: secs as i64,
        })
    }

    fn schedule(&mut self, default_name: String) -> Result<Schedule, ParseError> {
        let name = self.optional_name()?.unwrap_or(default_name);
        self.expect(Tok::LBrace, "'{'")?;
        let mut repeat = None;
        let mut entries = Vec::new();
        while self.tok != Tok::RBrace {
            let at = self.at;
            match self.ident("'at', 'repeat' or '}'")?.as_str() {
                "repeat" => {
                    if repeat.is_some() {
                        return Err(ParseError {
                            position: at,
                            kind: ParseErrorKind::DuplicateProperty("repeat".into()),
                        });
                    }
                    let v = self.value()?;
                    let secs = v
                        .as_quantity(UnitClass::Time)
                        .map_err(|e| invalid("repeat", at, e))?;
                    if secs.fract() != 0.0 || secs.abs() > 1e15 {
                        return Err(invalid("repeat", at, "must be a whole number of seconds"));
                    }
                    repeat = Some(secs as i64);
                }
                "at" => {
                    let time = match self.value()? {
                        v @ Value::Text(_) => v.as_timestamp().map_err(|e| invalid("at", at, e))?,
                        other => {
                            return Err(invalid(
                                "at",
                                at,
                                format!("expected a quoted timestamp, found {other}"),
                            ))
                        }
                    };
                    let target = self.ident("a target object name")?;
                    let property = self.ident("a property name")?;
                    let value = self.value()?;
                    entries.push(ScheduleEntry {
                        time,
                        target,
                        property,
                        value,
                    });
                }
                other => {
                    return Err(ParseError {
                        position: at,
                        kind: ParseErrorKind::Unexpected {
                            expected: "'at' or 'repeat'".into(),
                            found: format!("'{other}'"),
                        },
                    })
                }
            }
            self.expect(Tok::Semi, "';'")?;
        }
        self.advance()?;
        Ok(Schedule {
            name,
            entries,
            repeat,
        })
    }

    fn attack(&mut self, default_name: String, at: Position) -> Result<AttackConfig, ParseError> {
        let name = self.optional_name()?.unwrap_or(default_name);
        let mut f = self.fields("attack")?;
        let (kind_v, kp) = f.require("kind", at)?;
        let kind = kind_v
            .as_word()
            .ok()
            .and_then(AttackKind::parse)
            .ok_or_else(|| invalid("kind", kp, format!("unknown attack kind {kind_v}")))?;
        let ts = |f: &mut Fields, key: &'static str| -> Result<Timestamp, ParseError> {
            let (v, p) = f.require(key, at)?;
            v.as_timestamp().map_err(|e| invalid(key, p, e))
        };
        let start = ts(&mut f, "start")?;
        let end = ts(&mut f, "end")?;
        let scalar = |f: &mut Fields, key: &'static str| -> Result<Option<f64>, ParseError> {
            match f.take(key) {
                Some((v, p)) => v.as_scalar().map(Some).map_err(|e| invalid(key, p, e)),
                None => Ok(None),
            }
        };
        let fraction = scalar(&mut f, "fraction")?.unwrap_or(1.0);
        let lambda = scalar(&mut f, "lambda")?;
        let price = match f.take("price") {
            Some((v, p)) => Some(
                v.as_quantity(UnitClass::Price)
                    .map_err(|e| invalid("price", p, e))?,
            ),
            None => None,
        };
        let seed = match scalar(&mut f, "seed")? {
            // Seeds travel through f64, so keep them exactly representable.
            Some(s) if (0.0..=MAX_EXACT_SEED).contains(&s) && s.fract() == 0.0 => Some(s as u64),
            Some(_) => return Err(invalid("seed", at, "must be an integer in [0, 2^53]")),
            None => None,
        };
        let lines = match f.take("lines") {
            Some((v, p)) => v.as_list().map_err(|e| invalid("lines", p, e))?,
            None => Vec::new(),
        };
        let status = match f.take("status") {
            Some((v, p)) => Some(
                v.as_word()
                    .ok()
                    .and_then(LineStatus::parse)
                    .ok_or_else(|| invalid("status", p, "expected OPEN or CLOSED"))?,
            ),
            None => None,
        };
        let market = match f.take("market") {
            Some((v, p)) => Some(
                v.as_word()
                    .map_err(|e| invalid("market", p, e))?
                    .to_string(),
            ),
            None => None,
        };
        f.reject_leftovers()?;
        Ok(AttackConfig {
            name,
            kind,
            start,
            end,
            fraction,
            price,
            lambda,
            lines,
            status,
            seed,
            market,
        })
    }

    fn recorder(
        &mut self,
        default_name: String,
        at: Position,
    ) -> Result<RecorderConfig, ParseError> {
        let name = self.optional_name()?.unwrap_or(default_name);
        let mut f = self.fields("recorder")?;
        let (t, tp) = f.require("target", at)?;
        let target = t
            .as_word()
            .map_err(|e| invalid("target", tp, e))?
            .to_string();
        let (p, pp) = f.require("property", at)?;
        let properties = p.as_list().map_err(|e| invalid("property", pp, e))?;
        let (iv, ip) = f.require("interval", at)?;
        let interval = iv
            .as_quantity(UnitClass::Time)
            .map_err(|e| invalid("interval", ip, e))?;
        if interval.fract() != 0.0 || interval.abs() > 1e15 {
            return Err(invalid("interval", ip, "must be a whole number of seconds"));
        }
        let file = match f.take("file") {
            Some((v, fp)) => v.as_text().map_err(|e| invalid("file", fp, e))?.to_string(),
            None => format!("{name}.csv"),
        };
        f.reject_leftovers()?;
        Ok(RecorderConfig {
            name,
            target,
            properties,
            interval: interval as i64,
            file,
        })
    }

    fn player(&mut self, default_name: String, at: Position) -> Result<PlayerConfig, ParseError> {
        let name = self.optional_name()?.unwrap_or(default_name);
        let mut f = self.fields("player")?;
        let word = |f: &mut Fields, key: &'static str| -> Result<String, ParseError> {
            let (v, p) = f.require(key, at)?;
            v.as_text()
                .map(str::to_string)
                .map_err(|e| invalid(key, p, e))
        };
        let target = word(&mut f, "target")?;
        let property = word(&mut f, "property")?;
        let file = word(&mut f, "file")?;
        f.reject_leftovers()?;
        Ok(PlayerConfig {
            name,
            target,
            property,
            file,
        })
    }

    fn weather(&mut self, at: Position) -> Result<String, ParseError> {
        let mut f = self.fields("weather")?;
        let (v, p) = f.require("file", at)?;
        let file = v.as_text().map_err(|e| invalid("file", p, e))?.to_string();
        f.reject_leftovers()?;
        Ok(file)
    }

    fn document(&mut self) -> Result<ScenarioModel, ParseError> {
        let mut model = ScenarioModel::default();
        loop {
            let at = self.at;
            let keyword = match &self.tok {
                Tok::Eof => break,
                Tok::Ident(k) => k.clone(),
                _ => return Err(self.unexpected("a top-level block")),
            };
            self.advance()?;
            match keyword.as_str() {
                "object" => model.objects.push(self.object()?),
                "clock" => {
                    if model.clock.is_some() {
                        return Err(ParseError {
                            position: at,
                            kind: ParseErrorKind::DuplicateProperty("clock".into()),
                        });
                    }
                    model.clock = Some(self.clock(at)?);
                }
                "schedule" => {
                    let default = format!("schedule_{}", model.schedules.len());
                    model.schedules.push(self.schedule(default)?);
                }
                "attack" => {
                    let default = format!("attack_{}", model.attacks.len());
                    model.attacks.push(self.attack(default, at)?);
                }
                "recorder" => {
                    let default = format!("recorder_{}", model.recorders.len());
                    model.recorders.push(self.recorder(default, at)?);
                }
                "player" => {
                    let default = format!("player_{}", model.players.len());
                    model.players.push(self.player(default, at)?);
                }
                "weather" => {
                    if model.weather_source.is_some() {
                        return Err(ParseError {
                            position: at,
                            kind: ParseErrorKind::DuplicateProperty("weather".into()),
                        });
                    }
                    model.weather_source = Some(self.weather(at)?);
                }
                other => {
                    return Err(ParseError {
                        position: at,
                        kind: ParseErrorKind::Unexpected {
                            expected:
                                "object, clock, schedule, attack, recorder, player or weather"
                                    .into(),
                            found: format!("'{other}'"),
                        },
                    })
                }
            }
        }
        Ok(model)
    }
}

/// Parses a scenario document into an unvalidated model.
pub fn parse_scenario(text: &str) -> Result<ScenarioModel, ParseError> {
    Parser::new(text)?.document()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_document() {
        let m = parse_scenario("").unwrap();
        assert!(m.objects.is_empty());
        assert!(m.clock.is_none());
        let m = parse_scenario("  // only a comment\n\n").unwrap();
        assert!(m.objects.is_empty());
    }

    #[test]
    fn single_node() {
        let m = parse_scenario("object node { name n1; bustype SWING; nominal_voltage 7200 V; }")
            .unwrap();
        assert_eq!(m.objects.len(), 1);
        let o = &m.objects[0];
        assert_eq!(o.class, ObjectClass::Node);
        assert_eq!(o.name, "n1");
        assert_eq!(o.get("bustype"), Some(&Value::word("SWING")));
        assert_eq!(
            o.get("nominal_voltage"),
            Some(&Value::quantity(7200.0, Unit::Volt))
        );
    }

    #[test]
    fn complex_and_units() {
        let m = parse_scenario(
            "object underground_line { name l1; from a; to b; impedance 0.5-1.25j Ohm; }\n\
             object generator_seller { name g; market m; price 0.63 $/kWh; capacity 2 MW; }",
        )
        .unwrap();
        assert_eq!(
            m.objects[0].get("impedance"),
            Some(&Value::Complex {
                re: 0.5,
                im: -1.25,
                unit: Some(Unit::Ohm)
            })
        );
        let cap = m.objects[1].get("capacity").unwrap();
        assert_eq!(cap.as_quantity(UnitClass::Power).unwrap(), 2000.0);
    }

    #[test]
    fn clock_block() {
        let m = parse_scenario(
            "clock { start '2019-07-01 00:00:00'; stop '2019-07-02 00:00:00'; timestep 60 s; }",
        )
        .unwrap();
        let c = m.clock.unwrap();
        assert_eq!(c.timestep, 60);
        assert_eq!(c.stop - c.start, 86_400);
    }

    #[test]
    fn attack_block_from_docs() {
        let m = parse_scenario(
            r#"attack { kind SELLER_PRICE_OVERRIDE; start "2019-07-01 10:00:00"; end "2019-07-01 12:00:00"; fraction 0.2; price 0.63 $/kWh; seed 42; }
               attack cut { kind LINE_STATUS; start "2019-07-01 11:00:00"; end "2019-07-01 11:30:00"; lines L1,L2; status OPEN; }"#,
        )
        .unwrap();
        assert_eq!(m.attacks.len(), 2);
        let a = &m.attacks[0];
        assert_eq!(a.name, "attack_0");
        assert_eq!(a.kind, AttackKind::SellerPriceOverride);
        assert_eq!(a.fraction, 0.2);
        assert_eq!(a.price, Some(0.63));
        assert_eq!(a.seed, Some(42));
        let b = &m.attacks[1];
        assert_eq!(b.name, "cut");
        assert_eq!(b.lines, vec!["L1".to_string(), "L2".to_string()]);
        assert_eq!(b.status, Some(LineStatus::Open));
    }

    #[test]
    fn schedule_block() {
        let m = parse_scenario(
            "schedule s { repeat 1 h; at '2019-07-01 10:00:00' H3 cooling_setpoint 78 degF; }",
        )
        .unwrap();
        let s = &m.schedules[0];
        assert_eq!(s.repeat, Some(3600));
        assert_eq!(s.entries[0].target, "H3");
        assert_eq!(s.entries[0].value, Value::quantity(78.0, Unit::DegF));
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse_scenario("object node {\n  name n1\n}").unwrap_err();
        assert_eq!(e.position.line, 3);
        assert!(matches!(e.kind, ParseErrorKind::Unexpected { .. }));

        let e = parse_scenario("object blob { name x; }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownClass("blob".into()));
        assert_eq!(e.position, Position { line: 1, column: 8 });

        let e = parse_scenario("object node { name x; name y; }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::DuplicateProperty("name".into()));

        let e = parse_scenario("object node { name x; nominal_voltage 5 furlongs; }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnknownUnit("furlongs".into()));

        let e = parse_scenario("object node { name 'x; }").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnterminatedString);

        let e = parse_scenario("object node { name x; } @").unwrap_err();
        assert_eq!(e.kind, ParseErrorKind::UnexpectedChar('@'));
    }

    #[test]
    fn object_without_name_is_rejected() {
        let e = parse_scenario("object node { bustype SWING; }").unwrap_err();
        assert!(matches!(
            e.kind,
            ParseErrorKind::MissingField { field: "name", .. }
        ));
    }
}
