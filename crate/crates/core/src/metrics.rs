//! Per-entity metrics behind each smell.

use serde::{Deserialize, Serialize};
use thiserror::Error;
use tree_sitter::Node;

use crate::smell::MetricId;
use crate::syntax::{CodeEntity, EntityKind, SourceUnit, COMPREHENSION_KINDS, CONTAINER_KINDS};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("{metric} is not defined for a {kind}")]
    WrongEntityKind { metric: MetricId, kind: EntityKind },
    #[error("entity no longer matches the syntax tree")]
    DetachedEntity,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LengthUnit {
    /// Unicode scalar values, line terminators excluded.
    #[default]
    Chars,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(default)]
pub struct MetricOptions {
    /// Count a leading `self`/`cls` of methods in PAR.
    pub count_receiver: bool,
    /// Lambdas get a scope-chain depth and count as one closure level.
    pub lambdas_in_scope_chain: bool,
    pub length_unit: LengthUnit,
}

impl Default for MetricOptions {
    fn default() -> Self {
        Self {
            count_receiver: false,
            lambdas_in_scope_chain: true,
            length_unit: LengthUnit::Chars,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricVector {
    /// Index into the entity list the vector was computed from.
    pub entity: usize,
    pub metric_id: MetricId,
    pub value: u32,
}

/// Computes metrics for the entities of one unit.
pub struct Measurer<'a> {
    unit: &'a SourceUnit,
    entities: &'a [CodeEntity],
    opts: MetricOptions,
}

impl<'a> Measurer<'a> {
    pub fn new(unit: &'a SourceUnit, entities: &'a [CodeEntity], opts: MetricOptions) -> Self {
        Self {
            unit,
            entities,
            opts,
        }
    }

    fn entity(&self, idx: usize, metric: MetricId, kinds: &[EntityKind]) -> Result<&'a CodeEntity, MetricError> {
        let e = &self.entities[idx];
        if kinds.contains(&e.kind) {
            Ok(e)
        } else {
            Err(MetricError::WrongEntityKind { metric, kind: e.kind })
        }
    }

    fn node(&self, e: &CodeEntity) -> Result<Node<'a>, MetricError> {
        self.unit.node_for(e).ok_or(MetricError::DetachedEntity)
    }

    pub fn par(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::Par, &[EntityKind::Function])?;
        let node = self.node(e)?;
        let Some(params) = node.child_by_field_name("parameters") else {
            return Ok(0);
        };
        let mut cursor = params.walk();
        let formal: Vec<Node<'_>> = params
            .named_children(&mut cursor)
            .filter(|p| {
                !matches!(
                    p.kind(),
                    "keyword_separator" | "positional_separator" | "comment"
                )
            })
            .collect();
        let mut count = formal.len() as u32;
        if !self.opts.count_receiver && e.in_class_body {
            if let Some(first) = formal.first() {
                if matches!(param_name(*first, &self.unit.text), Some("self" | "cls")) {
                    count -= 1;
                }
            }
        }
        Ok(count)
    }

    pub fn mloc(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::Mloc, &[EntityKind::Function])?;
        Ok(e.span.line_count() as u32)
    }

    pub fn scope_chain(&self, idx: usize) -> Result<u32, MetricError> {
        let kinds: &[EntityKind] = if self.opts.lambdas_in_scope_chain {
            &[EntityKind::Function, EntityKind::Lambda]
        } else {
            &[EntityKind::Function]
        };
        let e = self.entity(idx, MetricId::ScopeChain, kinds)?;
        let mut depth = 1;
        let mut parent = e.nesting_parent;
        while let Some(p) = parent {
            let pe = &self.entities[p];
            if kinds.contains(&pe.kind) {
                depth += 1;
            }
            parent = pe.nesting_parent;
        }
        Ok(depth)
    }

    pub fn cloc(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::Cloc, &[EntityKind::Class])?;
        Ok(e.span.line_count() as u32)
    }

    pub fn chain(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::ChainLen, &[EntityKind::AttributeChainExpression])?;
        Ok(crate::syntax::chain_length(self.node(e)?))
    }

    pub fn nbc(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::Nbc, &[EntityKind::Class])?;
        let node = self.node(e)?;
        let Some(bases) = node.child_by_field_name("superclasses") else {
            return Ok(0);
        };
        let mut cursor = bases.walk();
        let n = bases
            .named_children(&mut cursor)
            .filter(|b| !matches!(b.kind(), "keyword_argument" | "dictionary_splat" | "comment"))
            .count();
        Ok(n as u32)
    }

    pub fn llf(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::LambdaLen, &[EntityKind::Lambda])?;
        Ok(self.extent_len(e))
    }

    pub fn ltce(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::TernaryLen, &[EntityKind::TernaryExpression])?;
        Ok(self.extent_len(e))
    }

    pub fn cnc(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::ClauseCount, &[EntityKind::Comprehension])?;
        let node = self.node(e)?;
        let mut cursor = node.walk();
        let n = node
            .named_children(&mut cursor)
            .filter(|c| matches!(c.kind(), "for_in_clause" | "if_clause"))
            .count();
        Ok(n as u32)
    }

    pub fn doc(&self, idx: usize) -> Result<u32, MetricError> {
        let e = self.entity(idx, MetricId::ContainerDepth, &[EntityKind::ContainerLiteral])?;
        Ok(nesting_depth(self.node(e)?))
    }

    fn extent_len(&self, e: &CodeEntity) -> u32 {
        match self.opts.length_unit {
            LengthUnit::Chars => self.unit.text[e.bytes.0..e.bytes.1]
                .chars()
                .filter(|c| !matches!(c, '\n' | '\r'))
                .count() as u32,
        }
    }

    /// A container literal is measured only when no other container literal
    /// encloses it.
    pub fn is_outermost_container(&self, idx: usize) -> bool {
        let mut parent = self.entities[idx].nesting_parent;
        while let Some(p) = parent {
            if self.entities[p].kind == EntityKind::ContainerLiteral {
                return false;
            }
            parent = self.entities[p].nesting_parent;
        }
        true
    }

    pub fn measure(&self, idx: usize) -> Result<Vec<MetricVector>, MetricError> {
        let e = &self.entities[idx];
        let mut out = Vec::new();
        let mut push = |metric_id, value| {
            out.push(MetricVector {
                entity: idx,
                metric_id,
                value,
            })
        };
        match e.kind {
            EntityKind::Function => {
                push(MetricId::Par, self.par(idx)?);
                push(MetricId::Mloc, self.mloc(idx)?);
                push(MetricId::ScopeChain, self.scope_chain(idx)?);
            }
            EntityKind::Lambda => {
                if self.opts.lambdas_in_scope_chain {
                    push(MetricId::ScopeChain, self.scope_chain(idx)?);
                }
                push(MetricId::LambdaLen, self.llf(idx)?);
            }
            EntityKind::Class => {
                push(MetricId::Cloc, self.cloc(idx)?);
                push(MetricId::Nbc, self.nbc(idx)?);
            }
            EntityKind::AttributeChainExpression => push(MetricId::ChainLen, self.chain(idx)?),
            EntityKind::TernaryExpression => push(MetricId::TernaryLen, self.ltce(idx)?),
            EntityKind::Comprehension => push(MetricId::ClauseCount, self.cnc(idx)?),
            EntityKind::ContainerLiteral => {
                if self.is_outermost_container(idx) {
                    push(MetricId::ContainerDepth, self.doc(idx)?);
                }
            }
        }
        Ok(out)
    }

    pub fn measure_all(&self) -> Result<Vec<MetricVector>, MetricError> {
        let mut out = Vec::new();
        for idx in 0..self.entities.len() {
            out.extend(self.measure(idx)?);
        }
        Ok(out)
    }
}

fn param_name<'t>(param: Node<'_>, text: &'t str) -> Option<&'t str> {
    match param.kind() {
        "identifier" => Some(&text[param.byte_range()]),
        "typed_parameter" | "default_parameter" | "typed_default_parameter" => {
            let name = param
                .child_by_field_name("name")
                .or_else(|| param.named_child(0))?;
            (name.kind() == "identifier").then(|| &text[name.byte_range()])
        }
        _ => None,
    }
}

/// Container/comprehension levels on the deepest path below `node`,
/// counting `node` itself.
fn nesting_depth(node: Node<'_>) -> u32 {
    let own = u32::from(CONTAINER_KINDS.contains(&node.kind()) || COMPREHENSION_KINDS.contains(&node.kind()));
    let mut cursor = node.walk();
    let deepest = node
        .named_children(&mut cursor)
        .filter(|c| !matches!(c.kind(), "string" | "concatenated_string" | "comment"))
        .map(nesting_depth)
        .max()
        .unwrap_or(0);
    own + deepest
}
