//! Walk strings: `A->B[->C->D]->E:1`. The top-level chain is the main chain,
//! bracketed excursions are side chains, and `:k` selects duplicate `k`.

use super::{WalkDag, WalkNode};
use crate::error::WalkError;
use crate::motifgraph::{MotifGraph, MotifRef};

/// One step of a parsed walk string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WalkStep {
    pub name: String,
    pub copy: usize,
    /// Byte offset of the name.
    pub offset: usize,
    /// Side chains leaving this step, in order.
    pub excursions: Vec<Vec<WalkStep>>,
}

struct Parser<'a> {
    text: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn error(&self, message: impl Into<String>) -> WalkError {
        WalkError::Syntax { offset: self.pos, message: message.into() }
    }

    fn skip_ws(&mut self) {
        let rest = &self.text[self.pos..];
        self.pos += rest.len() - rest.trim_start().len();
    }

    fn eat(&mut self, token: &str) -> bool {
        self.skip_ws();
        if self.text[self.pos..].starts_with(token) {
            self.pos += token.len();
            true
        } else {
            false
        }
    }

    fn arrow(&mut self) -> bool {
        self.eat("->") || self.eat("\u{2192}")
    }

    fn chain(&mut self) -> Result<Vec<WalkStep>, WalkError> {
        let mut steps = vec![self.step()?];
        while self.arrow() {
            steps.push(self.step()?);
        }
        Ok(steps)
    }

    fn step(&mut self) -> Result<WalkStep, WalkError> {
        self.skip_ws();
        let offset = self.pos;
        let len = self.text[offset..]
            .find(|c: char| !(c.is_ascii_alphanumeric() || c == '_'))
            .unwrap_or(self.text.len() - offset);
        if len == 0 {
            return Err(self.error("expected motif name"));
        }
        let name = self.text[offset..offset + len].to_string();
        self.pos += len;
        let mut copy = 0;
        if self.text[self.pos..].starts_with(':') {
            self.pos += 1;
            let digits =
                self.text[self.pos..].find(|c: char| !c.is_ascii_digit()).unwrap_or(self.text.len() - self.pos);
            copy = self.text[self.pos..self.pos + digits]
                .parse()
                .map_err(|_| self.error("expected duplicate index after `:`"))?;
            self.pos += digits;
        }
        let mut excursions = Vec::new();
        while self.eat("[") {
            if !self.arrow() {
                return Err(self.error("expected `->` after `[`"));
            }
            excursions.push(self.chain()?);
            if !self.eat("]") {
                return Err(self.error("expected `]`"));
            }
        }
        Ok(WalkStep { name, copy, offset, excursions })
    }
}

/// Parses the syntax of a walk string without resolving names.
pub fn parse_walk_syntax(text: &str) -> Result<Vec<WalkStep>, WalkError> {
    let mut p = Parser { text, pos: 0 };
    let chain = p.chain()?;
    p.skip_ws();
    if p.pos != text.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(chain)
}

fn add_chain(
    g: &MotifGraph,
    steps: &[WalkStep],
    parent: Option<usize>,
    main: bool,
    nodes: &mut Vec<WalkNode>,
) -> Result<(), WalkError> {
    let mut parent = parent;
    for s in steps {
        let base =
            g.motif_index(&s.name).ok_or_else(|| WalkError::UnknownMotif { name: s.name.clone(), offset: s.offset })?;
        if s.copy > g.duplicates[base] {
            return Err(WalkError::CopyOutOfRange {
                name: s.name.clone(),
                copy: s.copy,
                available: g.duplicates[base],
            });
        }
        let me = nodes.len();
        nodes.push(WalkNode {
            motif: MotifRef { base, copy: s.copy },
            main,
            parent,
            edge: None,
            back_edge: None,
            children: Vec::new(),
            fragment: None,
        });
        if let Some(p) = parent {
            nodes[p].children.push(me);
        }
        for ex in &s.excursions {
            add_chain(g, ex, Some(me), false, nodes)?;
        }
        parent = Some(me);
    }
    Ok(())
}

/// Parses a walk string into a DAG over the nodes of `g`. Edges are left
/// unresolved; duplicate indices are kept as written.
pub fn parse_walk(g: &MotifGraph, text: &str) -> Result<WalkDag, WalkError> {
    let steps = parse_walk_syntax(text)?;
    let mut nodes = Vec::new();
    add_chain(g, &steps, None, true, &mut nodes)?;
    // Steps are pushed in pre-order already.
    let dag = WalkDag { nodes };
    Ok(dag)
}

fn write_node(g: &MotifGraph, dag: &WalkDag, x: usize, out: &mut String) {
    let node = &dag.nodes[x];
    out.push_str(&g.node_name(node.motif));
    let kids = &node.children;
    let cont = if node.main { kids.iter().copied().find(|&k| dag.nodes[k].main) } else { kids.last().copied() };
    for &k in kids.iter().filter(|&&k| Some(k) != cont) {
        out.push_str("[->");
        write_node(g, dag, k, out);
        out.push(']');
    }
    if let Some(c) = cont {
        out.push_str("->");
        write_node(g, dag, c, out);
    }
}

/// Prints a DAG as a walk string.
pub fn print_walk(g: &MotifGraph, dag: &WalkDag) -> String {
    let mut out = String::new();
    if !dag.is_empty() {
        write_node(g, dag, 0, &mut out);
    }
    out
}
