//! LaTeX math subset to presentation MathML.
//!
//! Supported input: single-letter identifiers, `\mathrm{..}` names, decimal
//! numbers, the operators `+ - * / = < > ( ) [ ] | , .`, scripts, braces,
//! `\frac`, `\sqrt` (with optional index), `\left..\right`, a fixed table of
//! symbol commands and the Greek alphabet. Anything else is a [`LatexError`]
//! pointing at the offending character.

use thiserror::Error;

use crate::mathml::{Element, Formula, MathNode, Source};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid TeX at character {position}: {message}")]
pub struct LatexError {
    /// 0-based character offset into the input.
    pub position: usize,
    pub message: String,
}

/// What a command expands to.
#[derive(Debug, Clone, Copy)]
enum Symbol {
    Identifier(&'static str),
    Operator(&'static str),
    /// Big operator taking under/over scripts (`\sum`, `\prod`, `\lim`).
    Limits(Element, &'static str),
}

const COMMANDS: &[(&str, Symbol)] = &[
    ("cdot", Symbol::Operator("\u{22C5}")),
    ("times", Symbol::Operator("\u{00D7}")),
    ("pm", Symbol::Operator("\u{00B1}")),
    ("leq", Symbol::Operator("\u{2264}")),
    ("le", Symbol::Operator("\u{2264}")),
    ("geq", Symbol::Operator("\u{2265}")),
    ("ge", Symbol::Operator("\u{2265}")),
    ("neq", Symbol::Operator("\u{2260}")),
    ("ne", Symbol::Operator("\u{2260}")),
    ("infty", Symbol::Identifier("\u{221E}")),
    ("sum", Symbol::Limits(Element::Mo, "\u{2211}")),
    ("prod", Symbol::Limits(Element::Mo, "\u{220F}")),
    ("int", Symbol::Operator("\u{222B}")),
    ("lim", Symbol::Limits(Element::Mi, "lim")),
    ("sin", Symbol::Identifier("sin")),
    ("cos", Symbol::Identifier("cos")),
    ("tan", Symbol::Identifier("tan")),
    ("log", Symbol::Identifier("log")),
    ("ln", Symbol::Identifier("ln")),
    ("exp", Symbol::Identifier("exp")),
    ("alpha", Symbol::Identifier("α")),
    ("beta", Symbol::Identifier("β")),
    ("gamma", Symbol::Identifier("γ")),
    ("delta", Symbol::Identifier("δ")),
    ("epsilon", Symbol::Identifier("ϵ")),
    ("varepsilon", Symbol::Identifier("ε")),
    ("zeta", Symbol::Identifier("ζ")),
    ("eta", Symbol::Identifier("η")),
    ("theta", Symbol::Identifier("θ")),
    ("vartheta", Symbol::Identifier("ϑ")),
    ("iota", Symbol::Identifier("ι")),
    ("kappa", Symbol::Identifier("κ")),
    ("lambda", Symbol::Identifier("λ")),
    ("mu", Symbol::Identifier("μ")),
    ("nu", Symbol::Identifier("ν")),
    ("xi", Symbol::Identifier("ξ")),
    ("omicron", Symbol::Identifier("ο")),
    ("pi", Symbol::Identifier("π")),
    ("varpi", Symbol::Identifier("ϖ")),
    ("rho", Symbol::Identifier("ρ")),
    ("varrho", Symbol::Identifier("ϱ")),
    ("sigma", Symbol::Identifier("σ")),
    ("varsigma", Symbol::Identifier("ς")),
    ("tau", Symbol::Identifier("τ")),
    ("upsilon", Symbol::Identifier("υ")),
    ("phi", Symbol::Identifier("ϕ")),
    ("varphi", Symbol::Identifier("φ")),
    ("chi", Symbol::Identifier("χ")),
    ("psi", Symbol::Identifier("ψ")),
    ("omega", Symbol::Identifier("ω")),
    ("Gamma", Symbol::Identifier("Γ")),
    ("Delta", Symbol::Identifier("Δ")),
    ("Theta", Symbol::Identifier("Θ")),
    ("Lambda", Symbol::Identifier("Λ")),
    ("Xi", Symbol::Identifier("Ξ")),
    ("Pi", Symbol::Identifier("Π")),
    ("Sigma", Symbol::Identifier("Σ")),
    ("Upsilon", Symbol::Identifier("Υ")),
    ("Phi", Symbol::Identifier("Φ")),
    ("Psi", Symbol::Identifier("Ψ")),
    ("Omega", Symbol::Identifier("Ω")),
];

/// Multi-letter identifiers that name functions rather than variables.
pub(crate) const FUNCTION_NAMES: &[&str] = &["sin", "cos", "tan", "log", "ln", "exp", "lim"];

fn lookup(command: &str) -> Option<Symbol> {
    COMMANDS
        .iter()
        .find(|(name, _)| *name == command)
        .map(|(_, symbol)| *symbol)
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Letter(char),
    Digit(char),
    Operator(char),
    Command(String),
    Open,
    Close,
    Superscript,
    Subscript,
}

const OPERATORS: &str = "+-*/=<>()[]|,.";

fn tokenize(src: &str) -> Result<Vec<(Token, usize)>, LatexError> {
    let chars: Vec<char> = src.chars().collect();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        i += 1;
        let token = match c {
            c if c.is_whitespace() => continue,
            '{' => Token::Open,
            '}' => Token::Close,
            '^' => Token::Superscript,
            '_' => Token::Subscript,
            '\\' => {
                let mut name = String::new();
                while i < chars.len() && chars[i].is_ascii_alphabetic() {
                    name.push(chars[i]);
                    i += 1;
                }
                if name.is_empty() && i < chars.len() {
                    name.push(chars[i]);
                    i += 1;
                }
                Token::Command(name)
            }
            c if c.is_ascii_digit() => Token::Digit(c),
            c if OPERATORS.contains(c) => Token::Operator(c),
            c if c.is_alphabetic() => Token::Letter(c),
            c => {
                return Err(LatexError {
                    position: start,
                    message: format!("unsupported character '{c}'"),
                })
            }
        };
        tokens.push((token, start));
    }
    Ok(tokens)
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Stop {
    End,
    Brace(usize),
    Right(usize),
    Bracket(usize),
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    len: usize,
}

/// A parsed atom plus whether its scripts go under/over.
struct Atom {
    node: MathNode,
    limits: bool,
}

impl Parser {
    fn error(&self, position: usize, message: impl Into<String>) -> LatexError {
        LatexError {
            position: position.min(self.len.saturating_sub(1)),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.cursor)
    }

    fn next(&mut self) -> Option<(Token, usize)> {
        let token = self.tokens.get(self.cursor).cloned();
        self.cursor += 1;
        token
    }

    /// Position for errors raised at the end of input.
    fn end_position(&self) -> usize {
        self.len.saturating_sub(1)
    }

    fn sequence(&mut self, stop: Stop) -> Result<Vec<MathNode>, LatexError> {
        let mut items = Vec::new();
        loop {
            let Some((token, position)) = self.peek().cloned() else {
                return match stop {
                    Stop::End => Ok(group_parentheses(items)),
                    Stop::Brace(open) => Err(self.error(
                        self.end_position(),
                        format!("unbalanced group: '{{' at {open} is never closed"),
                    )),
                    Stop::Right(open) => Err(self.error(
                        self.end_position(),
                        format!("unbalanced \\left at {open}: missing \\right"),
                    )),
                    Stop::Bracket(open) => Err(self.error(
                        self.end_position(),
                        format!("missing ']' for optional argument opened at {open}"),
                    )),
                };
            };
            match (&token, stop) {
                (Token::Close, Stop::Brace(_)) => {
                    self.cursor += 1;
                    return Ok(group_parentheses(items));
                }
                (Token::Close, _) => return Err(self.error(position, "unbalanced group: unexpected '}'")),
                (Token::Command(name), Stop::Right(_)) if name == "right" => return Ok(group_parentheses(items)),
                (Token::Command(name), _) if name == "right" => {
                    return Err(self.error(position, "unbalanced \\right without \\left"))
                }
                (Token::Operator(']'), Stop::Bracket(_)) => {
                    self.cursor += 1;
                    return Ok(group_parentheses(items));
                }
                _ => {}
            }
            if let Token::Digit(_) = token {
                items.push(self.number());
                continue;
            }
            let atom = self.primary()?;
            items.push(self.scripts(atom)?);
        }
    }

    fn number(&mut self) -> MathNode {
        let mut text = String::new();
        while let Some((token, _)) = self.peek() {
            match token {
                Token::Digit(d) => text.push(*d),
                Token::Operator('.')
                    if !text.contains('.')
                        && matches!(self.tokens.get(self.cursor + 1), Some((Token::Digit(_), _))) =>
                {
                    text.push('.')
                }
                _ => break,
            }
            self.cursor += 1;
        }
        MathNode::mn(text)
    }

    fn primary(&mut self) -> Result<Atom, LatexError> {
        let (token, position) = self.next().expect("primary called at end of input");
        let plain = |node| Ok(Atom { node, limits: false });
        match token {
            Token::Letter(c) => plain(MathNode::mi(c.to_string())),
            Token::Digit(d) => plain(MathNode::mn(d.to_string())),
            Token::Operator('-') => plain(MathNode::mo("\u{2212}")),
            Token::Operator(c) => plain(MathNode::mo(c.to_string())),
            Token::Open => {
                let items = self.sequence(Stop::Brace(position))?;
                plain(wrap(items))
            }
            Token::Close => Err(self.error(position, "unbalanced group: unexpected '}'")),
            Token::Superscript | Token::Subscript => Err(self.error(position, "missing base before script")),
            Token::Command(name) => self.command(&name, position),
        }
    }

    fn command(&mut self, name: &str, position: usize) -> Result<Atom, LatexError> {
        let plain = |node| Ok(Atom { node, limits: false });
        match name {
            "frac" => {
                let numerator = self.argument(position, "\\frac")?;
                let denominator = self.argument(position, "\\frac")?;
                plain(MathNode::node(Element::Mfrac, vec![numerator, denominator]))
            }
            "sqrt" => {
                if let Some((Token::Operator('['), open)) = self.peek().cloned() {
                    self.cursor += 1;
                    let index = wrap(self.sequence(Stop::Bracket(open))?);
                    let radicand = self.argument(position, "\\sqrt")?;
                    plain(MathNode::node(Element::Mroot, vec![radicand, index]))
                } else {
                    let radicand = self.argument(position, "\\sqrt")?;
                    plain(MathNode::node(Element::Msqrt, vec![radicand]))
                }
            }
            "left" => {
                let open = self.delimiter(position, "\\left")?;
                let mut items = self.sequence(Stop::Right(position))?;
                let (_, right_position) = self.next().expect("sequence stops at \\right");
                let close = self.delimiter(right_position, "\\right")?;
                if let Some(open) = open {
                    items.insert(0, MathNode::mo(open));
                }
                if let Some(close) = close {
                    items.push(MathNode::mo(close));
                }
                plain(MathNode::mrow(items))
            }
            "mathrm" => {
                let Some((Token::Open, open)) = self.next() else {
                    return Err(self.error(position, "missing argument for \\mathrm"));
                };
                let mut text = String::new();
                loop {
                    match self.next() {
                        Some((Token::Letter(c) | Token::Digit(c), _)) => text.push(c),
                        Some((Token::Close, _)) => break,
                        Some((_, at)) => return Err(self.error(at, "only letters and digits allowed in \\mathrm")),
                        None => {
                            return Err(self.error(
                                self.end_position(),
                                format!("unbalanced group: '{{' at {open} is never closed"),
                            ))
                        }
                    }
                }
                if text.is_empty() {
                    return Err(self.error(position, "empty \\mathrm"));
                }
                plain(MathNode::mi(text))
            }
            _ => match lookup(name) {
                Some(Symbol::Identifier(text)) => plain(MathNode::mi(text)),
                Some(Symbol::Operator(text)) => plain(MathNode::mo(text)),
                Some(Symbol::Limits(element, text)) => Ok(Atom {
                    node: MathNode::leaf(element, text),
                    limits: true,
                }),
                None => Err(self.error(position, format!("unknown command \\{name}"))),
            },
        }
    }

    /// Delimiter after `\left`/`\right`; `.` is the invisible delimiter.
    fn delimiter(&mut self, position: usize, what: &str) -> Result<Option<String>, LatexError> {
        match self.next() {
            Some((Token::Operator('.'), _)) => Ok(None),
            Some((Token::Operator(c @ ('(' | ')' | '[' | ']' | '|')), _)) => Ok(Some(c.to_string())),
            Some((_, at)) => Err(self.error(at, format!("invalid delimiter after {what}"))),
            None => Err(self.error(position, format!("missing delimiter after {what}"))),
        }
    }

    /// A single-token or braced argument.
    fn argument(&mut self, position: usize, what: &str) -> Result<MathNode, LatexError> {
        match self.peek() {
            None | Some((Token::Close, _)) => Err(self.error(position, format!("missing argument for {what}"))),
            Some((Token::Command(name), at)) if name == "right" => {
                let at = *at;
                Err(self.error(at, format!("missing argument for {what}")))
            }
            Some((Token::Superscript | Token::Subscript, at)) => {
                let at = *at;
                Err(self.error(at, format!("missing argument for {what}")))
            }
            _ => Ok(self.primary()?.node),
        }
    }

    fn scripts(&mut self, atom: Atom) -> Result<MathNode, LatexError> {
        let mut sub = None;
        let mut sup = None;
        while let Some((token, position)) = self.peek().cloned() {
            let slot = match token {
                Token::Superscript => &mut sup,
                Token::Subscript => &mut sub,
                _ => break,
            };
            if slot.is_some() {
                let which = if token == Token::Superscript {
                    "superscript"
                } else {
                    "subscript"
                };
                return Err(self.error(position, format!("double {which}")));
            }
            self.cursor += 1;
            let script = match self.peek() {
                None | Some((Token::Close | Token::Superscript | Token::Subscript, _)) => {
                    return Err(self.error(position, "dangling script: missing argument"))
                }
                _ => self.primary()?.node,
            };
            *slot = Some(script);
        }
        let base = atom.node;
        let (under, over, both) = if atom.limits {
            (Element::Munder, Element::Mover, Element::Munderover)
        } else {
            (Element::Msub, Element::Msup, Element::Msubsup)
        };
        Ok(match (sub, sup) {
            (None, None) => base,
            (Some(sub), None) => MathNode::node(under, vec![base, sub]),
            (None, Some(sup)) => MathNode::node(over, vec![base, sup]),
            (Some(sub), Some(sup)) => MathNode::node(both, vec![base, sub, sup]),
        })
    }
}

fn wrap(mut items: Vec<MathNode>) -> MathNode {
    if items.len() == 1 {
        items.pop().unwrap()
    } else {
        MathNode::mrow(items)
    }
}

/// Groups balanced bare `(..)` and `[..]` runs into fenced mrows.
fn group_parentheses(items: Vec<MathNode>) -> Vec<MathNode> {
    let mut stack: Vec<(Vec<MathNode>, String)> = Vec::new();
    let mut current = Vec::new();
    for item in items {
        let text = if item.is(Element::Mo) { item.text() } else { "" };
        match text {
            "(" | "[" => {
                let closer = if text == "(" { ")" } else { "]" };
                stack.push((std::mem::take(&mut current), closer.to_string()));
                current.push(item);
            }
            ")" | "]" if stack.last().is_some_and(|(_, closer)| closer == text) => {
                current.push(item);
                let (outer, _) = stack.pop().unwrap();
                let group = MathNode::mrow(std::mem::replace(&mut current, outer));
                current.push(group);
            }
            _ => current.push(item),
        }
    }
    // unmatched openers stay as loose operators
    while let Some((mut outer, _)) = stack.pop() {
        outer.append(&mut current);
        current = outer;
    }
    current
}

/// Parses a LaTeX math string into a presentation formula.
pub fn parse_latex(src: &str) -> Result<Formula, LatexError> {
    let tokens = tokenize(src)?;
    if tokens.is_empty() {
        return Err(LatexError {
            position: 0,
            message: "empty formula".to_string(),
        });
    }
    let mut parser = Parser {
        tokens,
        cursor: 0,
        len: src.chars().count(),
    };
    let items = parser.sequence(Stop::End)?;
    let root = wrap(items);
    Formula::new(root, Source::Latex).map_err(|message| LatexError { position: 0, message })
}
