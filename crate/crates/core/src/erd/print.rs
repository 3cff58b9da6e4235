//! Canonical printing of ERD terms.

use super::{Attribute, Cardinality, Domain, Entity, Erd, KeyKind, REnd, Relationship};
use crate::calendar;

/// Width up to which an ERD is printed on a single line.
const LINE_WIDTH: usize = 80;

/// Prints `erd` in canonical term notation; `parse_erd` reads it back to an
/// equal value.
///
/// Short ERDs come out on one line, everything else in the indented layout
/// used for hand-written descriptions.
pub fn print_erd(erd: &Erd) -> String {
    let flat = flat(erd);
    if flat.len() <= LINE_WIDTH && !flat.contains('\n') {
        return flat;
    }
    let mut out = format!("ERD {}\n", quote(&erd.name));
    let entities: Vec<String> = erd.entities.iter().map(entity_block).collect();
    out.push_str(&block_list(&entities, "  "));
    out.push('\n');
    let rels: Vec<String> = erd.relationships.iter().map(relationship_block).collect();
    out.push_str(&block_list(&rels, "  "));
    out.push('\n');
    out
}

fn flat(erd: &Erd) -> String {
    let entities: Vec<String> = erd
        .entities
        .iter()
        .map(|e| {
            let attrs: Vec<String> = e.attributes.iter().map(attribute).collect();
            format!("Entity {} [{}]", quote(&e.name), attrs.join(", "))
        })
        .collect();
    let rels: Vec<String> = erd
        .relationships
        .iter()
        .map(|r| {
            format!(
                "Relationship {} [{}, {}]",
                quote(&r.name),
                rend(&r.end_a),
                rend(&r.end_b)
            )
        })
        .collect();
    format!(
        "ERD {} [{}] [{}]",
        quote(&erd.name),
        entities.join(", "),
        rels.join(", ")
    )
}

/// Lays out `[a,\n b,\n c]` with every line of every block indented.
fn block_list(blocks: &[String], indent: &str) -> String {
    if blocks.is_empty() {
        return format!("{indent}[]");
    }
    let mut out = String::new();
    for (i, block) in blocks.iter().enumerate() {
        let opener = if i == 0 { "[" } else { " " };
        for (j, line) in block.lines().enumerate() {
            if j == 0 {
                out.push_str(&format!("{indent}{opener}{line}"));
            } else {
                out.push_str(&format!("\n{indent} {line}"));
            }
        }
        out.push_str(if i + 1 == blocks.len() { "]" } else { ",\n" });
    }
    out
}

fn entity_block(e: &Entity) -> String {
    let attrs: Vec<String> = e.attributes.iter().map(attribute).collect();
    format!("Entity {}\n{}", quote(&e.name), block_list(&attrs, "  "))
}

fn relationship_block(r: &Relationship) -> String {
    let ends = [rend(&r.end_a), rend(&r.end_b)];
    format!("Relationship {}\n{}", quote(&r.name), block_list(&ends, "  "))
}

fn attribute(a: &Attribute) -> String {
    format!(
        "Attribute {} ({}) {} {}",
        quote(&a.name),
        domain(&a.domain),
        match a.key {
            KeyKind::NoKey => "NoKey",
            KeyKind::Unique => "Unique",
        },
        if a.null_allowed { "True" } else { "False" }
    )
}

fn domain(d: &Domain) -> String {
    let default = match d {
        Domain::Int(v) => v.map(|n| signed(n.to_string())),
        Domain::Float(v) => v.map(|x| signed(format!("{x:?}"))),
        Domain::Bool(v) => v.map(|b| if b { "True" } else { "False" }.to_string()),
        Domain::String(v) => v.as_deref().map(quote),
        Domain::Date(v) => v.as_ref().map(|t| quote(&calendar::format_iso(t))),
    };
    match default {
        None => format!("{} Nothing", d.kind()),
        Some(lit) => format!("{} (Just {lit})", d.kind()),
    }
}

fn signed(lit: String) -> String {
    if lit.starts_with('-') {
        format!("({lit})")
    } else {
        lit
    }
}

fn rend(e: &REnd) -> String {
    format!(
        "REnd {} {} ({})",
        quote(&e.entity),
        quote(&e.role),
        cardinality(&e.cardinality)
    )
}

fn cardinality(c: &Cardinality) -> String {
    c.to_string()
}

fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            // numeric escapes are terminated by the next non-digit, so a
            // following digit would be swallowed; emit those as escapes too
            c if c.is_control() => out.push_str(&format!("\\{}\\&", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}
