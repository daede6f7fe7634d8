//! File formats and human-readable renderings.

use crate::error::{Error, Result};
use crate::model::{
    AugmentedMatrix, BoundKind, Congruence, FormulaNode, GuardSet, IntColumn, LinearForm, LoopVar,
    ReductionTrace,
};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

/// Current version of [`FormulaDocument`].
pub const SCHEMA_VERSION: u32 = 1;

/// A partition problem as read from disk: `l` rows, generator columns
/// listed one per entry, and an optional elimination order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatrixDocument {
    #[serde(alias = "symbol_count")]
    pub l: usize,
    pub columns: Vec<Vec<i64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub row_order: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
}

impl MatrixDocument {
    pub fn parse(text: &str) -> Result<Self> {
        let doc: MatrixDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(format!("matrix document: {e}")))?;
        doc.check_shape()?;
        Ok(doc)
    }

    fn check_shape(&self) -> Result<()> {
        if let Some((i, c)) = self.columns.iter().enumerate().find(|(_, c)| c.len() != self.l) {
            return Err(Error::DimensionMismatch(format!(
                "column {} has {} entries, expected l = {}",
                i + 1,
                c.len(),
                self.l
            )));
        }
        Ok(())
    }

    /// Generator columns as big integers, in argument row order.
    pub fn big_columns(&self) -> Vec<Vec<BigInt>> {
        self.columns.iter().map(|c| c.iter().map(|&v| v.into()).collect()).collect()
    }

    /// The matrix `{s, D}` with identity row order.
    pub fn to_matrix(&self) -> Result<AugmentedMatrix> {
        self.check_shape()?;
        AugmentedMatrix::from_columns(self.columns.iter().map(|c| IntColumn::from_i64(c)).collect())
    }
}

/// Serialized result of a reduction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FormulaDocument {
    pub schema_version: u32,
    pub symbol_count: usize,
    pub root: FormulaNode,
    #[serde(default)]
    pub trace: ReductionTrace,
}

impl FormulaDocument {
    pub fn new(symbol_count: usize, root: FormulaNode, trace: ReductionTrace) -> Self {
        FormulaDocument { schema_version: SCHEMA_VERSION, symbol_count, root, trace }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Document(e.to_string()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let doc: FormulaDocument =
            serde_json::from_str(text).map_err(|e| Error::Document(format!("formula document: {e}")))?;
        if doc.schema_version != SCHEMA_VERSION {
            return Err(Error::Document(format!("unsupported schema version {}", doc.schema_version)));
        }
        Ok(doc)
    }
}

/// Output style for [`render`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Style {
    Text,
    Latex,
}

/// Renders a formula as an indented tree, one leaf or guard per line.
///
/// Symbols below `symbol_count` print as `s1, s2, …`; loop variables
/// introduced by convolutions print as `k1, k2, …`.
pub fn render(node: &FormulaNode, symbol_count: usize, style: Style) -> String {
    let r = Renderer { l: symbol_count, latex: style == Style::Latex };
    let mut out = String::new();
    r.node(node, 0, "", &mut out);
    out
}

struct Renderer {
    l: usize,
    latex: bool,
}

impl Renderer {
    fn name(&self, i: usize) -> String {
        match (i < self.l, self.latex) {
            (true, false) => format!("s{}", i + 1),
            (true, true) => format!("s_{{{}}}", i + 1),
            (false, false) => format!("k{}", i - self.l + 1),
            (false, true) => format!("k_{{{}}}", i - self.l + 1),
        }
    }

    fn form(&self, f: &LinearForm) -> String {
        f.render(&|i| self.name(i), self.latex)
    }

    fn heaviside(&self, f: &LinearForm) -> String {
        if self.latex {
            format!("H\\left({}\\right)", self.form(f))
        } else {
            format!("H({})", self.form(f))
        }
    }

    fn congruence(&self, c: &Congruence) -> String {
        if self.latex {
            format!("[{} \\equiv {} \\pmod{{{}}}]", self.form(&c.form), c.residue, c.modulus)
        } else {
            format!("[{} = {} mod {}]", self.form(&c.form), c.residue, c.modulus)
        }
    }

    fn prefix(&self, coeff: &BigInt, guards: &GuardSet) -> String {
        let neg = guards.sign < 0;
        let mut parts = Vec::new();
        let mag = coeff.abs();
        if !mag.is_one() {
            parts.push(mag.to_string());
        }
        parts.extend(guards.congruences.iter().map(|c| self.congruence(c)));
        parts.extend(guards.heavisides.iter().map(|h| self.heaviside(h)));
        let neg = neg ^ coeff.is_negative();
        let sep = if self.latex { " \\cdot " } else { " * " };
        let sign = if neg { "-" } else { "+" };
        if parts.is_empty() {
            sign.to_string()
        } else {
            format!("{sign} {}", parts.join(sep))
        }
    }

    fn leaf(&self, node: &FormulaNode) -> Option<String> {
        Some(match node {
            FormulaNode::ScalarPartition { argument, generators } => {
                let gens: Vec<String> = generators.sorted().iter().map(BigInt::to_string).collect();
                if self.latex {
                    format!("W\\left({}, \\{{{}\\}}\\right)", self.form(argument), gens.join(", "))
                } else {
                    format!("W({}, {{{}}})", self.form(argument), gens.join(", "))
                }
            }
            FormulaNode::Binomial { top, bottom } => {
                if self.latex {
                    format!("\\binom{{{}}}{{{bottom}}}", self.form(top))
                } else {
                    format!("C({}, {bottom})", self.form(top))
                }
            }
            FormulaNode::PointDelta { pairs } => {
                let eqs: Vec<String> = pairs
                    .iter()
                    .map(|(a, b)| {
                        if self.latex {
                            format!("\\delta_{{{}, {}}}", self.form(a), self.form(b))
                        } else {
                            format!("delta({}, {})", self.form(a), self.form(b))
                        }
                    })
                    .collect();
                eqs.join(if self.latex { " " } else { " * " })
            }
            FormulaNode::Constant { value } => value.to_string(),
            _ => return None,
        })
    }

    fn bound(&self, lv: &LoopVar) -> String {
        let forms: Vec<String> = lv.bounds.iter().map(|b| self.form(b)).collect();
        let inner = if forms.len() == 1 {
            forms[0].clone()
        } else {
            let op = match lv.kind {
                BoundKind::Min => "min",
                BoundKind::Max => "max",
            };
            if self.latex {
                format!("\\{op}\\left({}\\right)", forms.join(", "))
            } else {
                format!("{op}({})", forms.join(", "))
            }
        };
        if self.latex {
            format!("\\left\\lfloor {inner} \\right\\rfloor")
        } else {
            format!("floor({inner})")
        }
    }

    fn node(&self, node: &FormulaNode, depth: usize, lead: &str, out: &mut String) {
        let pad = "  ".repeat(depth);
        if let Some(leaf) = self.leaf(node) {
            let _ = writeln!(out, "{pad}{lead}{leaf}");
            return;
        }
        match node {
            FormulaNode::Sum { children } => {
                let _ = writeln!(out, "{pad}{lead}{}", if self.latex { "\\sum" } else { "sum" });
                for c in children {
                    self.node(c, depth + 1, "", out);
                }
            }
            FormulaNode::Product { factors } => {
                let _ = writeln!(out, "{pad}{lead}{}", if self.latex { "\\prod" } else { "product" });
                for f in factors {
                    self.node(f, depth + 1, "", out);
                }
            }
            FormulaNode::Term { coeff, guards, payload } => {
                let head = self.prefix(coeff, guards);
                if self.leaf(payload).is_some() {
                    let lead = format!("{lead}{head} ");
                    self.node(payload, depth, lead.trim_start(), out);
                } else {
                    let _ = writeln!(out, "{pad}{lead}{}", head.trim_end());
                    self.node(payload, depth + 1, "", out);
                }
            }
            FormulaNode::Convolution { loops, body } => {
                let ranges: Vec<String> = loops
                    .iter()
                    .map(|lv| {
                        if self.latex {
                            format!("\\sum_{{{}=0}}^{{{}}}", self.name(lv.symbol), self.bound(lv))
                        } else {
                            format!("{} in 0..={}", self.name(lv.symbol), self.bound(lv))
                        }
                    })
                    .collect();
                let head = if self.latex { ranges.join(" ") } else { format!("for {}", ranges.join(", ")) };
                let _ = writeln!(out, "{pad}{lead}{head}");
                self.node(body, depth + 1, "", out);
            }
            _ => unreachable!("leaves are handled above"),
        }
    }
}

/// Parses a comma-separated integer point such as `1,2,3`.
pub fn parse_point(text: &str) -> Result<Vec<i64>> {
    text.split(',')
        .map(|t| {
            t.trim()
                .parse::<i64>()
                .map_err(|e| Error::Document(format!("malformed coordinate {t:?}: {e}")))
        })
        .collect()
}
