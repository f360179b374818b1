use std::fmt::{self, Write as _};

use crate::grammar::{Category, NonTerminal};

/// Node of the source tree. Non-terminal nodes carry an alignment id shared
/// with their counterpart in the target tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SourceTree {
    pub id: usize,
    pub label: NonTerminal,
    pub children: Vec<SourceNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SourceNode {
    /// An input token: its index in the token sequence and its text.
    Token(usize, String),
    Tree(SourceTree),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TargetTree {
    pub id: usize,
    pub label: NonTerminal,
    pub children: Vec<TargetNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TargetNode {
    Operator(String),
    Int(i64),
    Tree(TargetTree),
}

/// A complete synchronous derivation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SyncParse {
    pub source: SourceTree,
    pub target: TargetTree,
    /// Rule indices used, in source pre-order; `None` marks a bare number
    /// completing an `[Int:lo-hi]` label.
    pub rules: Vec<Option<usize>>,
}

impl SyncParse {
    pub fn root(&self) -> &NonTerminal {
        &self.source.label
    }

    /// Tokens below `[Nil]` nodes.
    pub fn nil_tokens(&self) -> usize {
        fn walk(t: &SourceTree, under_nil: bool) -> usize {
            let nil = under_nil || t.label.category == Category::Nil;
            t.children
                .iter()
                .map(|c| match c {
                    SourceNode::Token(..) => usize::from(nil),
                    SourceNode::Tree(sub) => walk(sub, nil),
                })
                .sum()
        }
        walk(&self.source, false)
    }

    /// Leaf token texts, left to right.
    pub fn leaves(&self) -> Vec<&str> {
        fn walk<'a>(t: &'a SourceTree, out: &mut Vec<&'a str>) {
            for c in &t.children {
                match c {
                    SourceNode::Token(_, s) => out.push(s),
                    SourceNode::Tree(sub) => walk(sub, out),
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.source, &mut out);
        out
    }

    /// One-line key identifying the tree pair.
    pub fn key(&self) -> String {
        format!("{} => {}", self.source.bracketed(), self.target.bracketed())
    }

    /// Indented dump of both trees.
    pub fn dump(&self) -> String {
        let mut out = String::from("source:\n");
        self.source.dump_into(&mut out, 1);
        out.push_str("target:\n");
        self.target.dump_into(&mut out, 1);
        out
    }

    /// Graphviz description with one cluster per tree; aligned non-terminals
    /// share their subscript.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph parse {\n  node [shape=plaintext];\n");
        let mut counter = 0usize;
        out.push_str("  subgraph cluster_source {\n    label=\"source\";\n");
        dot_source(&self.source, &mut out, &mut counter);
        out.push_str("  }\n  subgraph cluster_target {\n    label=\"target\";\n");
        dot_target(&self.target, &mut out, &mut counter);
        out.push_str("  }\n}\n");
        out
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn dot_source(t: &SourceTree, out: &mut String, counter: &mut usize) -> usize {
    let me = *counter;
    *counter += 1;
    let _ = writeln!(out, "    n{me} [label=<{}<sub>{}</sub>>];", html(&t.label.to_string()), t.id);
    for c in &t.children {
        let child = match c {
            SourceNode::Token(_, s) => {
                let id = *counter;
                *counter += 1;
                let _ = writeln!(out, "    n{id} [label=\"{}\"];", escape(s));
                id
            }
            SourceNode::Tree(sub) => dot_source(sub, out, counter),
        };
        let _ = writeln!(out, "    n{me} -> n{child};");
    }
    me
}

fn dot_target(t: &TargetTree, out: &mut String, counter: &mut usize) -> usize {
    let me = *counter;
    *counter += 1;
    let _ = writeln!(out, "    n{me} [label=<{}<sub>{}</sub>>];", html(&t.label.to_string()), t.id);
    if t.children.is_empty() {
        let id = *counter;
        *counter += 1;
        let _ = writeln!(out, "    n{id} [label=\"∅\"];\n    n{me} -> n{id};");
    }
    for c in &t.children {
        let child = match c {
            TargetNode::Operator(s) => {
                let id = *counter;
                *counter += 1;
                let _ = writeln!(out, "    n{id} [label=\"{}\"];", escape(s));
                id
            }
            TargetNode::Int(n) => {
                let id = *counter;
                *counter += 1;
                let _ = writeln!(out, "    n{id} [label=\"{n}\"];");
                id
            }
            TargetNode::Tree(sub) => dot_target(sub, out, counter),
        };
        let _ = writeln!(out, "    n{me} -> n{child};");
    }
    me
}

fn html(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

impl SourceTree {
    pub fn bracketed(&self) -> String {
        let mut out = format!("({}", self.label);
        for c in &self.children {
            match c {
                SourceNode::Token(_, s) => {
                    out.push_str(" \"");
                    out.push_str(s);
                    out.push('"');
                }
                SourceNode::Tree(t) => {
                    out.push(' ');
                    out.push_str(&t.bracketed());
                }
            }
        }
        out.push(')');
        out
    }

    fn dump_into(&self, out: &mut String, depth: usize) {
        let _ = writeln!(out, "{}{}_{}", "  ".repeat(depth), self.label, self.id);
        for c in &self.children {
            match c {
                SourceNode::Token(_, s) => {
                    let _ = writeln!(out, "{}\"{s}\"", "  ".repeat(depth + 1));
                }
                SourceNode::Tree(t) => t.dump_into(out, depth + 1),
            }
        }
    }
}

impl TargetTree {
    pub fn bracketed(&self) -> String {
        let mut out = format!("({}", self.label);
        for c in &self.children {
            out.push(' ');
            match c {
                TargetNode::Operator(s) => out.push_str(s),
                TargetNode::Int(n) => out.push_str(&n.to_string()),
                TargetNode::Tree(t) => out.push_str(&t.bracketed()),
            }
        }
        out.push(')');
        out
    }

    fn dump_into(&self, out: &mut String, depth: usize) {
        let _ = writeln!(out, "{}{}_{}", "  ".repeat(depth), self.label, self.id);
        if self.children.is_empty() {
            let _ = writeln!(out, "{}∅", "  ".repeat(depth + 1));
        }
        for c in &self.children {
            match c {
                TargetNode::Operator(s) => {
                    let _ = writeln!(out, "{}{s}", "  ".repeat(depth + 1));
                }
                TargetNode::Int(n) => {
                    let _ = writeln!(out, "{}{n}", "  ".repeat(depth + 1));
                }
                TargetNode::Tree(t) => t.dump_into(out, depth + 1),
            }
        }
    }
}

impl fmt::Display for SyncParse {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}
