//! Identifier mangling for generated Rust code.

use std::collections::HashSet;

const KEYWORDS: &[&str] = &[
    "as", "async", "await", "break", "const", "continue", "crate", "dyn", "else", "enum", "extern", "false", "fn",
    "for", "if", "impl", "in", "let", "loop", "match", "mod", "move", "mut", "pub", "ref", "return", "self", "Self",
    "static", "struct", "super", "trait", "true", "type", "unsafe", "use", "where", "while", "abstract", "become",
    "box", "do", "final", "macro", "override", "priv", "try", "typeof", "unsized", "virtual", "yield", "gen",
];

/// Type names that generated code must not shadow: the prelude, std items
/// used by generated code, runtime-library items and app-level generated
/// types.
const RESERVED_TYPES: &[&str] = &[
    // prelude and std
    "Box",
    "Clone",
    "Copy",
    "Debug",
    "Default",
    "Drop",
    "Eq",
    "Err",
    "ExitCode",
    "Fn",
    "FnMut",
    "FnOnce",
    "From",
    "Hash",
    "Into",
    "Iterator",
    "None",
    "Ok",
    "Option",
    "Ord",
    "Ordering",
    "PartialEq",
    "PartialOrd",
    "Result",
    "Send",
    "Sized",
    "Some",
    "String",
    "Sync",
    "ToOwned",
    "ToString",
    "Vec",
    // runtime library
    "AccessResult",
    "AccessType",
    "App",
    "Attribute",
    "CalendarTime",
    "CliArgs",
    "Column",
    "Controller",
    "ControllerResult",
    "CredentialStore",
    "Database",
    "Decoded",
    "Domain",
    "EntityValue",
    "Erd",
    "Entity",
    "ForeignKey",
    "FormEnv",
    "HandlerRef",
    "HtmlExp",
    "HttpRequest",
    "HttpResponse",
    "JoinTable",
    "PageLayout",
    "ProcessEngine",
    "Processes",
    "Query",
    "Reader",
    "Relationship",
    "Rendering",
    "RequestContext",
    "Route",
    "RouteMatcher",
    "Schema",
    "Services",
    "SessionId",
    "SessionSlot",
    "SessionStore",
    "Snapshot",
    "State",
    "Table",
    "Transaction",
    "Tx",
    "TxError",
    "Value",
    "WuiError",
    "WuiSpec",
    // generated app-level types
    "ControllerReference",
];

pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

pub fn is_reserved_type(s: &str) -> bool {
    RESERVED_TYPES.contains(&s) || is_keyword(s)
}

/// `EntryKey` → `entry_key`, `isCommentedBy` → `is_commented_by`,
/// `HTTPServer` → `http_server`.
pub fn snake(s: &str) -> String {
    let chars: Vec<char> = s.chars().collect();
    let mut out = String::new();
    for (i, &c) in chars.iter().enumerate() {
        if c.is_ascii_uppercase() {
            let prev = i.checked_sub(1).map(|j| chars[j]);
            let next = chars.get(i + 1);
            let boundary = match prev {
                None | Some('_') => false,
                Some(p) => {
                    p.is_ascii_lowercase()
                        || p.is_ascii_digit()
                        || (p.is_ascii_uppercase() && next.is_some_and(|n| n.is_ascii_lowercase()))
                }
            };
            if boundary {
                out.push('_');
            }
            out.push(c.to_ascii_lowercase());
        } else {
            out.push(c);
        }
    }
    out
}

/// Snake-case value identifier, escaped when it is a keyword.
pub fn field(s: &str) -> String {
    let f = snake(s);
    if is_keyword(&f) || f == "key" {
        format!("{f}_")
    } else {
        f
    }
}

/// Returns `name`, or `name` with the smallest numeric suffix not yet in
/// `taken`, and records the result.
pub fn fresh(name: String, taken: &mut HashSet<String>) -> String {
    if taken.insert(name.clone()) {
        return name;
    }
    let mut i = 2;
    loop {
        let candidate = format!("{name}_{i}");
        if taken.insert(candidate.clone()) {
            return candidate;
        }
        i += 1;
    }
}

/// Type names for an entity: the entity name, prefixed with `Ent` when it
/// or one of its derived names would clash with a reserved name.
pub fn entity_type(entity: &str) -> String {
    let clashes = [entity.to_string(), format!("{entity}Key"), format!("{entity}Form")]
        .iter()
        .any(|n| is_reserved_type(n));
    if clashes {
        format!("Ent{entity}")
    } else {
        entity.to_string()
    }
}

/// Rust string literal for `s`.
pub fn lit(s: &str) -> String {
    format!("{s:?}")
}
