//! Weighted math index terms.
//!
//! Every subformula of a canonical formula becomes a term, once verbatim and
//! once per distinct unified variant (identifiers and/or numbers replaced by
//! placeholders). Weights decay with depth and with unification, so a
//! verbatim whole-formula hit outweighs a renamed or partial one.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::mathml::{
    parse_mathml_with, serialize_node, Element, Encoding, Formula, MathNode, ParseError, ParseOptions, Source,
};

pub const VARIABLE_PLACEHOLDER: &str = "§id";
pub const CONSTANT_PLACEHOLDER: &str = "§const";
pub const PRESENTATION_PREFIX: &str = "P:";
pub const CONTENT_PREFIX: &str = "C:";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightConfig {
    /// Per-level decay `l` in (0, 1].
    pub level_factor: f64,
    /// Penalty `u_v` in (0, 1) for unified identifiers.
    pub var_unification_factor: f64,
    /// Penalty `u_c` in (0, 1) for unified constants.
    pub const_unification_factor: f64,
}

impl Default for WeightConfig {
    fn default() -> Self {
        WeightConfig {
            level_factor: 0.7,
            var_unification_factor: 0.8,
            const_unification_factor: 0.8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
#[error("invalid weight configuration: {0}")]
pub struct WeightConfigError(pub String);

impl WeightConfig {
    pub fn validate(&self) -> Result<(), WeightConfigError> {
        let l = self.level_factor;
        if !(l > 0.0 && l <= 1.0) {
            return Err(WeightConfigError(format!("level_factor {l} not in (0, 1]")));
        }
        for (name, value) in [
            ("var_unification_factor", self.var_unification_factor),
            ("const_unification_factor", self.const_unification_factor),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(WeightConfigError(format!("{name} {value} not in (0, 1)")));
            }
        }
        Ok(())
    }

    pub fn weight(&self, depth: usize, variant: Variant) -> f64 {
        let mut w = self.level_factor.powi(depth as i32);
        if matches!(variant, Variant::VarUnified | Variant::BothUnified) {
            w *= self.var_unification_factor;
        }
        if matches!(variant, Variant::ConstUnified | Variant::BothUnified) {
            w *= self.const_unification_factor;
        }
        w
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    Exact,
    VarUnified,
    ConstUnified,
    BothUnified,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MathTerm {
    /// `P:` or `C:` followed by the serialized subtree.
    pub token: String,
    pub depth: usize,
    pub variant: Variant,
    /// Sum over merged duplicates; a single occurrence stays in (0, 1].
    pub weight: f64,
}

impl MathTerm {
    pub fn is_presentation(&self) -> bool {
        self.token.starts_with(PRESENTATION_PREFIX)
    }

    pub fn is_content(&self) -> bool {
        self.token.starts_with(CONTENT_PREFIX)
    }

    /// Reads the token back into a formula.
    pub fn formula(&self) -> Result<Formula, ParseError> {
        let xml = self
            .token
            .strip_prefix(PRESENTATION_PREFIX)
            .or_else(|| self.token.strip_prefix(CONTENT_PREFIX))
            .unwrap_or(&self.token);
        parse_mathml_with(
            xml,
            ParseOptions {
                source: Source::MathmlDocument,
                allow_placeholders: true,
            },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Subformula<'a> {
    pub node: &'a MathNode,
    pub depth: usize,
}

fn is_transparent_wrapper(node: &MathNode) -> bool {
    matches!(node.element, Element::Math | Element::Mrow) && node.children.len() == 1
}

fn is_excluded(node: &MathNode) -> bool {
    matches!(node.element, Element::Mo | Element::Mtext | Element::Mspace) || node.element.is_content_operator()
}

/// All indexable subtrees in pre-order, with depth counted from the first
/// non-wrapper node.
///
/// Lone operators and text, content operator heads and single-child
/// `math`/`mrow` wrappers are not listed; wrappers pass their depth through.
pub fn extract_subformulae(formula: &Formula) -> Vec<Subformula<'_>> {
    let mut out = Vec::new();
    collect(&formula.root, 0, &mut out);
    out
}

fn collect<'a>(node: &'a MathNode, depth: usize, out: &mut Vec<Subformula<'a>>) {
    if is_transparent_wrapper(node) {
        collect(&node.children[0], depth, out);
        return;
    }
    if is_excluded(node) {
        return;
    }
    out.push(Subformula { node, depth });
    for child in &node.children {
        collect(child, depth + 1, out);
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnifyMode {
    Variables,
    Constants,
    Both,
}

/// Replaces identifier and/or number text with placeholders.
pub fn unify(node: &MathNode, mode: UnifyMode) -> MathNode {
    let variables = matches!(mode, UnifyMode::Variables | UnifyMode::Both);
    let constants = matches!(mode, UnifyMode::Constants | UnifyMode::Both);
    let mut out = node.clone();
    replace_leaves(&mut out, variables, constants);
    out
}

fn replace_leaves(node: &mut MathNode, variables: bool, constants: bool) {
    match node.element {
        Element::Mi | Element::Ci if variables => {
            node.text = Some(VARIABLE_PLACEHOLDER.to_string());
        }
        Element::Mn | Element::Cn if constants => {
            node.text = Some(CONSTANT_PLACEHOLDER.to_string());
        }
        _ => {
            for child in &mut node.children {
                replace_leaves(child, variables, constants);
            }
        }
    }
}

/// Weighted terms for a canonical formula. Mixed formulae contribute both
/// their presentation and content halves.
pub fn tokenize_formula(formula: &Formula, cfg: &WeightConfig) -> Vec<MathTerm> {
    let mut merger = Merger::default();
    match formula.encoding {
        Encoding::Mixed => {
            let (presentation, content) = formula.split_encodings();
            for part in presentation.iter().chain(content.iter()) {
                push_terms(part, cfg, &mut merger);
            }
        }
        _ => push_terms(formula, cfg, &mut merger),
    }
    merger.terms
}

fn push_terms(formula: &Formula, cfg: &WeightConfig, merger: &mut Merger) {
    let prefix = match formula.encoding {
        Encoding::Content => CONTENT_PREFIX,
        _ => PRESENTATION_PREFIX,
    };
    for sub in extract_subformulae(formula) {
        let exact = serialize_node(sub.node);
        let variables = serialize_node(&unify(sub.node, UnifyMode::Variables));
        let constants = serialize_node(&unify(sub.node, UnifyMode::Constants));
        let both = serialize_node(&unify(sub.node, UnifyMode::Both));
        let mut emitted: Vec<&str> = vec![&exact];
        merger.push(prefix, &exact, sub.depth, Variant::Exact, cfg);
        for (serialized, variant) in [
            (&variables, Variant::VarUnified),
            (&constants, Variant::ConstUnified),
            (&both, Variant::BothUnified),
        ] {
            if !emitted.contains(&serialized.as_str()) {
                merger.push(prefix, serialized, sub.depth, variant, cfg);
                emitted.push(serialized);
            }
        }
    }
}

#[derive(Default)]
struct Merger {
    terms: Vec<MathTerm>,
    index: HashMap<String, usize>,
}

impl Merger {
    fn push(&mut self, prefix: &str, body: &str, depth: usize, variant: Variant, cfg: &WeightConfig) {
        let token = format!("{prefix}{body}");
        let weight = cfg.weight(depth, variant);
        match self.index.get(&token) {
            Some(&i) => self.terms[i].weight += weight,
            None => {
                self.index.insert(token.clone(), self.terms.len());
                self.terms.push(MathTerm {
                    token,
                    depth,
                    variant,
                    weight,
                });
            }
        }
    }
}
