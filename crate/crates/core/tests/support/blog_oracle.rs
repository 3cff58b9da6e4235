//! Brute-force reference model of the blog store, used to check the engine
//! on random operation sequences.
//!
//! The model keeps plain vectors and recomputes every constraint by full
//! scans. It shares nothing with the engine but the public API.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::rngs::StdRng;
use rand::Rng;
use spicey::erd::parse_erd;
use spicey::persistence::{Database, EntityValue, Reader, Schema, TxError, Value};

/// Blog ERD, optionally with finite maxima on the many ends.
pub fn blog_source(bounds: Bounds) -> String {
    let max = |m: Option<u64>| m.map_or("Infinite".to_string(), |m| m.to_string());
    format!(
        r#"ERD "Blog"
  [Entity "Entry" [Attribute "Title" (StringDom Nothing) Unique False,
                   Attribute "Text" (StringDom Nothing) NoKey False,
                   Attribute "Author" (StringDom Nothing) NoKey False,
                   Attribute "Date" (DateDom Nothing) NoKey False],
   Entity "Comment" [Attribute "Text" (StringDom Nothing) NoKey False,
                     Attribute "Author" (StringDom Nothing) NoKey False,
                     Attribute "Date" (DateDom Nothing) NoKey False],
   Entity "Tag" [Attribute "Name" (StringDom Nothing) Unique False]]
  [Relationship "Commenting" [REnd "Entry" "commentsOn" (Exactly 1),
                              REnd "Comment" "isCommentedBy" (Between 0 {})],
   Relationship "Tagging" [REnd "Entry" "tags" (Between 0 {}),
                           REnd "Tag" "tagged" (Between 0 {})]]"#,
        max(bounds.comments_per_entry),
        max(bounds.entries_per_tag),
        max(bounds.tags_per_entry)
    )
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Bounds {
    pub comments_per_entry: Option<u64>,
    pub entries_per_tag: Option<u64>,
    pub tags_per_entry: Option<u64>,
}

impl Bounds {
    pub const UNBOUNDED: Bounds = Bounds {
        comments_per_entry: None,
        entries_per_tag: None,
        tags_per_entry: None,
    };
    pub const TIGHT: Bounds = Bounds {
        comments_per_entry: Some(3),
        entries_per_tag: Some(2),
        tags_per_entry: Some(3),
    };
}

pub fn open_blog(bounds: Bounds) -> Database {
    let erd = parse_erd(&blog_source(bounds)).expect("blog source parses");
    Database::in_memory(Schema::derive(&erd).expect("blog source is valid"))
}

#[derive(Clone, Debug)]
pub enum Op {
    NewEntry {
        title: u8,
        tags: Vec<u64>,
    },
    NewComment {
        entry: u64,
    },
    NewTag {
        name: u8,
    },
    UpdateEntry {
        key: u64,
        title: u8,
    },
    UpdateComment {
        key: u64,
        entry: u64,
    },
    SetTags {
        entry: u64,
        tags: Vec<u64>,
    },
    DeleteEntry(u64),
    DeleteComment(u64),
    DeleteTag(u64),
    /// Both operations in one transaction.
    Pair(Box<Op>, Box<Op>),
}

/// Failure categories; the engine's error must fall in the same one.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fail {
    Unique,
    Dangling,
    Cardinality,
    UnknownKey,
    StillReferenced,
}

fn category(e: &TxError) -> Option<Fail> {
    Some(match e {
        TxError::UniqueViolation { .. } => Fail::Unique,
        TxError::DanglingKey { .. } => Fail::Dangling,
        TxError::CardinalityExceeded { .. } => Fail::Cardinality,
        TxError::UnknownKey { .. } => Fail::UnknownKey,
        TxError::StillReferenced { .. } => Fail::StillReferenced,
        _ => return None,
    })
}

pub fn random_op(rng: &mut StdRng, depth: u8) -> Op {
    let key = |rng: &mut StdRng| rng.gen_range(1..=12u64);
    let keys = |rng: &mut StdRng| {
        let n = rng.gen_range(0..=4);
        (0..n).map(|_| rng.gen_range(1..=8u64)).collect::<Vec<_>>()
    };
    let pick = if depth == 0 {
        rng.gen_range(0..10)
    } else {
        rng.gen_range(0..9)
    };
    match pick {
        0 => Op::NewEntry {
            title: rng.gen_range(0..10),
            tags: keys(rng),
        },
        1 | 2 => Op::NewComment { entry: key(rng) },
        3 => Op::NewTag {
            name: rng.gen_range(0..8),
        },
        4 => Op::UpdateEntry {
            key: key(rng),
            title: rng.gen_range(0..10),
        },
        5 => Op::UpdateComment {
            key: key(rng),
            entry: key(rng),
        },
        6 => Op::SetTags {
            entry: key(rng),
            tags: keys(rng),
        },
        7 => match rng.gen_range(0..3) {
            0 => Op::DeleteEntry(key(rng)),
            1 => Op::DeleteComment(key(rng)),
            _ => Op::DeleteTag(key(rng)),
        },
        8 => Op::NewEntry {
            title: rng.gen_range(0..10),
            tags: vec![],
        },
        _ => Op::Pair(Box::new(random_op(rng, 1)), Box::new(random_op(rng, 1))),
    }
}

pub fn random_ops(rng: &mut StdRng, max_len: usize) -> Vec<Op> {
    let n = rng.gen_range(0..=max_len);
    (0..n).map(|_| random_op(rng, 0)).collect()
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Model {
    /// `(key, title)`; the other entry attributes are constant.
    pub entries: Vec<(u64, String)>,
    /// `(key, entry key)`.
    pub comments: Vec<(u64, u64)>,
    pub tags: Vec<(u64, String)>,
    /// `(entry key, tag key)`.
    pub tagging: BTreeSet<(u64, u64)>,
    pub last: [u64; 3],
    pub bounds: Bounds,
}

fn title(t: u8) -> String {
    format!("title {t}")
}

fn tag_name(n: u8) -> String {
    format!("tag {n}")
}

fn over(count: usize, max: Option<u64>) -> bool {
    max.is_some_and(|m| count as u64 > m)
}

impl Model {
    pub fn new(bounds: Bounds) -> Self {
        Model {
            bounds,
            ..Default::default()
        }
    }

    fn has_entry(&self, k: u64) -> bool {
        self.entries.iter().any(|e| e.0 == k)
    }

    fn has_tag(&self, k: u64) -> bool {
        self.tags.iter().any(|t| t.0 == k)
    }

    /// Checks replacing the tags of `entry` by `tags`.
    fn check_tags(&self, entry: u64, tags: &BTreeSet<u64>) -> Result<(), Fail> {
        if tags.iter().any(|t| !self.has_tag(*t)) {
            return Err(Fail::Dangling);
        }
        if over(tags.len(), self.bounds.tags_per_entry) {
            return Err(Fail::Cardinality);
        }
        for t in tags {
            let others = self.tagging.iter().filter(|(e, x)| x == t && *e != entry).count();
            if over(others + 1, self.bounds.entries_per_tag) {
                return Err(Fail::Cardinality);
            }
        }
        Ok(())
    }

    fn set_tags(&mut self, entry: u64, tags: &BTreeSet<u64>) {
        self.tagging.retain(|(e, _)| *e != entry);
        self.tagging.extend(tags.iter().map(|t| (entry, *t)));
    }

    fn comments_of(&self, entry: u64, except: Option<u64>) -> usize {
        self.comments
            .iter()
            .filter(|c| c.1 == entry && Some(c.0) != except)
            .count()
    }

    pub fn step(&mut self, op: &Op) -> Result<(), Fail> {
        match op {
            Op::NewEntry { title: t, tags } => {
                let set: BTreeSet<u64> = tags.iter().copied().collect();
                let key = self.last[0] + 1;
                if self.entries.iter().any(|e| e.1 == title(*t)) {
                    return Err(Fail::Unique);
                }
                self.check_tags(key, &set)?;
                self.last[0] = key;
                self.entries.push((key, title(*t)));
                self.set_tags(key, &set);
            }
            Op::NewComment { entry } => {
                if !self.has_entry(*entry) {
                    return Err(Fail::Dangling);
                }
                if over(self.comments_of(*entry, None) + 1, self.bounds.comments_per_entry) {
                    return Err(Fail::Cardinality);
                }
                self.last[1] += 1;
                self.comments.push((self.last[1], *entry));
            }
            Op::NewTag { name } => {
                if self.tags.iter().any(|t| t.1 == tag_name(*name)) {
                    return Err(Fail::Unique);
                }
                self.last[2] += 1;
                self.tags.push((self.last[2], tag_name(*name)));
            }
            Op::UpdateEntry { key, title: t } => {
                if !self.has_entry(*key) {
                    return Err(Fail::UnknownKey);
                }
                if self.entries.iter().any(|e| e.0 != *key && e.1 == title(*t)) {
                    return Err(Fail::Unique);
                }
                let e = self.entries.iter_mut().find(|e| e.0 == *key).unwrap();
                e.1 = title(*t);
            }
            Op::UpdateComment { key, entry } => {
                if !self.comments.iter().any(|c| c.0 == *key) {
                    return Err(Fail::UnknownKey);
                }
                if !self.has_entry(*entry) {
                    return Err(Fail::Dangling);
                }
                if over(self.comments_of(*entry, Some(*key)) + 1, self.bounds.comments_per_entry) {
                    return Err(Fail::Cardinality);
                }
                let c = self.comments.iter_mut().find(|c| c.0 == *key).unwrap();
                c.1 = *entry;
            }
            Op::SetTags { entry, tags } => {
                if !self.has_entry(*entry) {
                    return Err(Fail::Dangling);
                }
                let set: BTreeSet<u64> = tags.iter().copied().collect();
                self.check_tags(*entry, &set)?;
                self.set_tags(*entry, &set);
            }
            Op::DeleteEntry(k) => {
                if !self.has_entry(*k) {
                    return Err(Fail::UnknownKey);
                }
                if self.comments_of(*k, None) > 0 {
                    return Err(Fail::StillReferenced);
                }
                self.entries.retain(|e| e.0 != *k);
                self.tagging.retain(|(e, _)| e != k);
            }
            Op::DeleteComment(k) => {
                if !self.comments.iter().any(|c| c.0 == *k) {
                    return Err(Fail::UnknownKey);
                }
                self.comments.retain(|c| c.0 != *k);
            }
            Op::DeleteTag(k) => {
                if !self.has_tag(*k) {
                    return Err(Fail::UnknownKey);
                }
                self.tags.retain(|t| t.0 != *k);
                self.tagging.retain(|(_, t)| t != k);
            }
            Op::Pair(a, b) => {
                let saved = self.clone();
                let r = self.step(a).and_then(|_| self.step(b));
                if r.is_err() {
                    *self = saved;
                }
                return r;
            }
        }
        Ok(())
    }
}

fn entry_attrs(t: u8) -> Vec<Value> {
    vec![
        Value::Str(title(t)),
        Value::Str("text".into()),
        Value::Str("author".into()),
        Value::Date(1_700_000_000),
    ]
}

fn comment_attrs() -> Vec<Value> {
    vec![
        Value::Str("nice".into()),
        Value::Str("reader".into()),
        Value::Date(1_700_000_000),
    ]
}

fn apply(tx: &mut spicey::persistence::Tx<'_>, op: &Op) -> Result<(), TxError> {
    match op {
        Op::NewEntry { title: t, tags } => {
            tx.new_entity("Entry", entry_attrs(*t), vec![], vec![tags.clone()])?;
        }
        Op::NewComment { entry } => {
            tx.new_entity("Comment", comment_attrs(), vec![Some(*entry)], vec![])?;
        }
        Op::NewTag { name } => {
            tx.new_entity("Tag", vec![Value::Str(tag_name(*name))], vec![], vec![])?;
        }
        Op::UpdateEntry { key, title: t } => {
            tx.update_entity(&EntityValue {
                entity: "Entry".into(),
                key: *key,
                attrs: entry_attrs(*t),
                refs: vec![],
            })?;
        }
        Op::UpdateComment { key, entry } => {
            tx.update_entity(&EntityValue {
                entity: "Comment".into(),
                key: *key,
                attrs: comment_attrs(),
                refs: vec![Some(*entry)],
            })?;
        }
        Op::SetTags { entry, tags } => tx.set_links("Tagging", *entry, tags)?,
        Op::DeleteEntry(k) => tx.delete_entity("Entry", *k)?,
        Op::DeleteComment(k) => tx.delete_entity("Comment", *k)?,
        Op::DeleteTag(k) => tx.delete_entity("Tag", *k)?,
        Op::Pair(a, b) => {
            apply(tx, a)?;
            apply(tx, b)?;
        }
    }
    Ok(())
}

/// Engine contents in the model's representation.
pub fn observe(db: &Database, bounds: Bounds) -> Model {
    let s = db.snapshot();
    let text = |v: &Value| v.as_str().unwrap_or_default().to_string();
    Model {
        entries: s.all("Entry").iter().map(|e| (e.key, text(&e.attrs[0]))).collect(),
        comments: s
            .all("Comment")
            .iter()
            .map(|c| (c.key, c.refs[0].expect("required reference")))
            .collect(),
        tags: s.all("Tag").iter().map(|t| (t.key, text(&t.attrs[0]))).collect(),
        tagging: s.links("Tagging").into_iter().collect(),
        last: [0; 3],
        bounds,
    }
}

/// The four store invariants, checked directly on the engine's contents.
pub fn check_invariants(db: &Database, bounds: Bounds) -> Result<(), String> {
    let s = db.snapshot();
    let entries = s.all("Entry");
    let comments = s.all("Comment");
    let tags = s.all("Tag");
    let titles: BTreeSet<String> = entries.iter().map(|e| e.attrs[0].to_string()).collect();
    if titles.len() != entries.len() {
        return Err("duplicate Entry.Title".into());
    }
    let names: BTreeSet<String> = tags.iter().map(|t| t.attrs[0].to_string()).collect();
    if names.len() != tags.len() {
        return Err("duplicate Tag.Name".into());
    }
    let entry_keys: BTreeSet<u64> = entries.iter().map(|e| e.key).collect();
    let tag_keys: BTreeSet<u64> = tags.iter().map(|t| t.key).collect();
    for c in &comments {
        match c.refs[0] {
            Some(k) if entry_keys.contains(&k) => {}
            other => return Err(format!("comment {} references {other:?}", c.key)),
        }
    }
    let links = s.links("Tagging");
    for (e, t) in &links {
        if !entry_keys.contains(e) || !tag_keys.contains(t) {
            return Err(format!("dangling Tagging row ({e}, {t})"));
        }
    }
    for e in &entry_keys {
        let n = comments.iter().filter(|c| c.refs[0] == Some(*e)).count();
        if over(n, bounds.comments_per_entry) {
            return Err(format!("entry {e} has {n} comments"));
        }
        let n = links.iter().filter(|l| l.0 == *e).count();
        if over(n, bounds.tags_per_entry) {
            return Err(format!("entry {e} has {n} tags"));
        }
    }
    for t in &tag_keys {
        let n = links.iter().filter(|l| l.1 == *t).count();
        if over(n, bounds.entries_per_tag) {
            return Err(format!("tag {t} has {n} entries"));
        }
    }
    Ok(())
}

/// Runs `ops` against a fresh engine and the model, comparing outcome and
/// contents after every step. Also checks that failed steps leave the
/// serialized store unchanged and that no key is handed out twice.
pub fn run_sequence(ops: &[Op], bounds: Bounds) -> Result<(), String> {
    let db = open_blog(bounds);
    let mut model = Model::new(bounds);
    let mut seen: [BTreeSet<u64>; 3] = Default::default();
    for (i, op) in ops.iter().enumerate() {
        let before = db.dump();
        let got = db.transact(|tx| apply(tx, op));
        let want = model.step(op);
        match (&got, want) {
            (Ok(()), Ok(())) => {}
            (Err(e), Err(f)) if category(e) == Some(f) => {
                if db.dump() != before {
                    return Err(format!("step {i}: failed {op:?} changed the store"));
                }
            }
            _ => return Err(format!("step {i}: {op:?}: engine {got:?}, model {want:?}")),
        }
        let mut observed = observe(&db, bounds);
        observed.last = model.last;
        if observed != model {
            return Err(format!(
                "step {i}: {op:?}: contents differ\nengine {observed:?}\nmodel  {model:?}"
            ));
        }
        check_invariants(&db, bounds).map_err(|e| format!("step {i}: {op:?}: {e}"))?;
        let snap = db.snapshot();
        for (slot, entity) in ["Entry", "Comment", "Tag"].iter().enumerate() {
            for e in snap.all(entity) {
                seen[slot].insert(e.key);
            }
        }
        for (slot, keys) in seen.iter().enumerate() {
            if keys.iter().any(|k| *k > model.last[slot]) {
                return Err(format!("step {i}: key beyond last issued"));
            }
        }
    }
    Ok(())
}
