//! Manifold descriptions: JSON or TOML documents, or a builtin shorthand
//! such as `coffman(4,5)`.

use crsing::embedding::EmbeddingMap;
use crsing::fixtures;
use crsing::linalg::c;
use crsing::poly::Polynomial;
use crsing::Complex64;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SpecError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("{path}: {message}")]
    Field { path: String, message: String },
}

fn field(path: impl Into<String>, message: impl Into<String>) -> SpecError {
    SpecError::Field {
        path: path.into(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub powers: Vec<u32>,
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifoldSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    /// Shorthand; expanded (and cleared) by `parse_spec`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default)]
    pub m: usize,
    #[serde(default)]
    pub n: usize,
    #[serde(default)]
    pub variables: Vec<String>,
    /// Components are written in (z1, zbar1, x2, ..., x_{m-1}).
    #[serde(default)]
    pub zbar_form: bool,
    #[serde(default)]
    pub components: Vec<Vec<Term>>,
}

pub fn default_variables(m: usize, zbar: bool) -> Vec<String> {
    let mut v = if zbar {
        vec!["z1".to_string(), "zbar1".to_string()]
    } else {
        vec!["x1".to_string(), "y1".to_string()]
    };
    v.extend((2..m).map(|k| format!("x{k}")));
    v.truncate(m);
    v
}

/// Parse a builtin shorthand `name(a,b,...)` into its embedding.
pub fn builtin(text: &str) -> Result<EmbeddingMap, SpecError> {
    let t = text.trim();
    let bad = |msg: &str| field("builtin", format!("{msg} in `{t}`"));
    let (name, rest) = t.split_once('(').ok_or_else(|| bad("expected name(args)"))?;
    let args = rest.strip_suffix(')').ok_or_else(|| bad("missing ')'"))?;
    let args: Vec<&str> = args.split(',').map(str::trim).filter(|a| !a.is_empty()).collect();
    let int = |i: usize| -> Result<usize, SpecError> {
        args.get(i)
            .and_then(|a| a.parse().ok())
            .ok_or_else(|| bad(&format!("argument {} must be a nonnegative integer", i + 1)))
    };
    let real = |i: usize| -> Result<f64, SpecError> {
        args.get(i)
            .and_then(|a| a.parse::<f64>().ok())
            .filter(|v| v.is_finite())
            .ok_or_else(|| bad(&format!("argument {} must be a finite number", i + 1)))
    };
    let arity = |k: usize| if args.len() == k { Ok(()) } else { Err(bad(&format!("expected {k} arguments"))) };
    let core = |e: crsing::Error| field("builtin", e.to_string());
    match name.trim() {
        "coffman" => {
            arity(2)?;
            fixtures::coffman(int(0)?, int(1)?).map_err(core)
        }
        "bishop" => {
            arity(1)?;
            fixtures::bishop(real(0)?).map_err(core)
        }
        "random" => {
            arity(4)?;
            fixtures::random(int(0)?, int(1)?, int(2)? as u64, real(3)?).map_err(core)
        }
        "degenerate" => {
            arity(3)?;
            fixtures::degenerate(int(0)?, int(1)?, int(2)? as u64).map_err(core)
        }
        other => Err(field("builtin", format!("unknown builtin `{other}`"))),
    }
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let col = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
    (line, col)
}

/// Parse a builtin shorthand, a JSON document or a TOML document into a
/// canonical spec: builtins and zbar form expanded, terms merged and sorted.
pub fn parse_spec(text: &str) -> Result<ManifoldSpec, SpecError> {
    let t = text.trim();
    if !t.starts_with('{') && !t.contains('=') && t.contains('(') {
        let f = builtin(t)?;
        return Ok(spec_from_embedding(&f));
    }
    let doc: ManifoldSpec = if t.starts_with('{') {
        serde_json::from_str(text).map_err(|e| SpecError::Syntax {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?
    } else {
        toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((0, 0), |s| line_col(text, s.start));
            SpecError::Syntax {
                line,
                column,
                message: e.message().to_string(),
            }
        })?
    };
    canonicalize(doc)
}

fn canonicalize(doc: ManifoldSpec) -> Result<ManifoldSpec, SpecError> {
    if let Some(b) = &doc.builtin {
        if !doc.components.is_empty() || doc.m != 0 || doc.n != 0 {
            return Err(field("builtin", "a builtin cannot be combined with m, n or components"));
        }
        let mut s = spec_from_embedding(&builtin(b)?);
        if doc.label.is_some() {
            s.label = doc.label;
        }
        return Ok(s);
    }
    let f = to_embedding(&doc)?;
    let mut s = spec_from_embedding(&f);
    s.label = doc.label;
    if !doc.zbar_form && !doc.variables.is_empty() {
        s.variables = doc.variables;
    }
    Ok(s)
}

fn validate(doc: &ManifoldSpec) -> Result<(), SpecError> {
    if doc.m < 2 {
        return Err(field("m", format!("must be at least 2, got {}", doc.m)));
    }
    if doc.n < doc.m {
        return Err(field("n", format!("must be at least m = {}, got {}", doc.m, doc.n)));
    }
    if !doc.variables.is_empty() && doc.variables.len() != doc.m {
        return Err(field("variables", format!("expected {} names, got {}", doc.m, doc.variables.len())));
    }
    if doc.components.len() != doc.n {
        return Err(field("components", format!("expected {} components, got {}", doc.n, doc.components.len())));
    }
    for (i, comp) in doc.components.iter().enumerate() {
        for (j, t) in comp.iter().enumerate() {
            if t.powers.len() != doc.m {
                return Err(field(
                    format!("components[{i}][{j}].powers"),
                    format!("expected {} entries, got {}", doc.m, t.powers.len()),
                ));
            }
            if !t.re.is_finite() || !t.im.is_finite() {
                return Err(field(format!("components[{i}][{j}]"), "coefficient is not finite"));
            }
        }
    }
    Ok(())
}

/// Polynomial map described by `doc` (zbar form expanded).
pub fn to_embedding(doc: &ManifoldSpec) -> Result<EmbeddingMap, SpecError> {
    if let Some(b) = &doc.builtin {
        return builtin(b);
    }
    validate(doc)?;
    let comps = doc
        .components
        .iter()
        .enumerate()
        .map(|(i, comp)| {
            let mut p = Polynomial::zero(doc.m);
            for t in comp {
                p.add_term(t.powers.clone(), c(t.re, t.im));
            }
            if doc.zbar_form {
                p.expand_zbar().map_err(|e| field(format!("components[{i}]"), e.to_string()))
            } else {
                Ok(p)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let f = EmbeddingMap::new(doc.m, comps).map_err(|e| field("components", e.to_string()))?;
    Ok(match &doc.label {
        Some(l) => f.with_label(l.clone()),
        None => f,
    })
}

fn terms_of(p: &Polynomial) -> Vec<Term> {
    p.terms()
        .filter(|(_, v)| **v != Complex64::new(0.0, 0.0))
        .map(|(e, v)| Term {
            powers: e.clone(),
            re: v.re,
            im: v.im,
        })
        .collect()
}

/// Canonical spec of an embedding (terms in lexicographic power order).
pub fn spec_from_embedding(f: &EmbeddingMap) -> ManifoldSpec {
    ManifoldSpec {
        label: f.label().map(str::to_string),
        builtin: None,
        m: f.m(),
        n: f.n(),
        variables: default_variables(f.m(), false),
        zbar_form: false,
        components: f.components().iter().map(terms_of).collect(),
    }
}

/// Pretty JSON; `parse_spec(emit_spec(s))` returns `s` for canonical `s`.
pub fn emit_spec(s: &ManifoldSpec) -> String {
    serde_json::to_string_pretty(s).expect("spec serializes") + "\n"
}
