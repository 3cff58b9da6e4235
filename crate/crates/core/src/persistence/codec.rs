//! Binary encoding of snapshots and journal records.
//!
//! Files start with the magic `SPCY1` followed by records. A record is a
//! little-endian `u32` payload length, the payload's CRC-32 and the payload.

use std::collections::{BTreeMap, BTreeSet};

use super::schema::Schema;
use super::state::{Mutation, Row, State, TableState};
use super::value::Value;

pub(crate) const MAGIC: &[u8; 5] = b"SPCY1";

#[derive(Debug, PartialEq, Eq)]
pub(crate) struct Corrupt(pub &'static str);

#[derive(Default)]
pub(crate) struct Writer(pub Vec<u8>);

impl Writer {
    fn u8(&mut self, v: u8) {
        self.0.push(v);
    }

    fn u32(&mut self, v: u32) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn u64(&mut self, v: u64) {
        self.0.extend_from_slice(&v.to_le_bytes());
    }

    fn str(&mut self, s: &str) {
        self.u32(s.len() as u32);
        self.0.extend_from_slice(s.as_bytes());
    }

    fn value(&mut self, v: &Value) {
        match v {
            Value::Null => self.u8(0),
            Value::Int(i) => {
                self.u8(1);
                self.u64(*i as u64);
            }
            Value::Float(x) => {
                self.u8(2);
                self.u64(x.to_bits());
            }
            Value::Bool(b) => {
                self.u8(3);
                self.u8(*b as u8);
            }
            Value::Str(s) => {
                self.u8(4);
                self.str(s);
            }
            Value::Date(d) => {
                self.u8(5);
                self.u64(*d as u64);
            }
        }
    }

    fn opt_key(&mut self, k: Option<u64>) {
        match k {
            None => self.u8(0),
            Some(k) => {
                self.u8(1);
                self.u64(k);
            }
        }
    }

    fn row(&mut self, row: &Row) {
        self.u32(row.attrs.len() as u32);
        for v in &row.attrs {
            self.value(v);
        }
        self.u32(row.refs.len() as u32);
        for r in &row.refs {
            self.opt_key(*r);
        }
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
}

impl<'a> Reader<'a> {
    pub fn new(buf: &'a [u8]) -> Self {
        Reader { buf }
    }

    pub fn is_empty(&self) -> bool {
        self.buf.is_empty()
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], Corrupt> {
        if self.buf.len() < n {
            return Err(Corrupt("truncated"));
        }
        let (head, tail) = self.buf.split_at(n);
        self.buf = tail;
        Ok(head)
    }

    fn u8(&mut self) -> Result<u8, Corrupt> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32, Corrupt> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().expect("4 bytes")))
    }

    fn u64(&mut self) -> Result<u64, Corrupt> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().expect("8 bytes")))
    }

    fn len(&mut self) -> Result<usize, Corrupt> {
        let n = self.u32()? as usize;
        if n > self.buf.len() {
            return Err(Corrupt("length exceeds data"));
        }
        Ok(n)
    }

    fn str(&mut self) -> Result<String, Corrupt> {
        let n = self.len()?;
        String::from_utf8(self.take(n)?.to_vec()).map_err(|_| Corrupt("invalid utf-8"))
    }

    fn value(&mut self) -> Result<Value, Corrupt> {
        Ok(match self.u8()? {
            0 => Value::Null,
            1 => Value::Int(self.u64()? as i64),
            2 => Value::Float(f64::from_bits(self.u64()?)),
            3 => Value::Bool(self.u8()? != 0),
            4 => Value::Str(self.str()?),
            5 => Value::Date(self.u64()? as i64),
            _ => return Err(Corrupt("unknown value tag")),
        })
    }

    fn opt_key(&mut self) -> Result<Option<u64>, Corrupt> {
        Ok(match self.u8()? {
            0 => None,
            1 => Some(self.u64()?),
            _ => return Err(Corrupt("bad key tag")),
        })
    }

    fn row(&mut self) -> Result<Row, Corrupt> {
        let n = self.len()?;
        let attrs = (0..n).map(|_| self.value()).collect::<Result<_, _>>()?;
        let m = self.len()?;
        let refs = (0..m).map(|_| self.opt_key()).collect::<Result<_, _>>()?;
        Ok(Row { attrs, refs })
    }

    /// Next framed record, or `None` at a clean end of input.
    pub fn record(&mut self) -> Result<Option<&'a [u8]>, Corrupt> {
        if self.buf.is_empty() {
            return Ok(None);
        }
        let len = self.u32()? as usize;
        let crc = self.u32()?;
        let payload = self.take(len)?;
        if crc32fast::hash(payload) != crc {
            return Err(Corrupt("checksum mismatch"));
        }
        Ok(Some(payload))
    }
}

pub(crate) fn frame(payload: &[u8]) -> Vec<u8> {
    let mut out = Vec::with_capacity(payload.len() + 8);
    out.extend_from_slice(&(payload.len() as u32).to_le_bytes());
    out.extend_from_slice(&crc32fast::hash(payload).to_le_bytes());
    out.extend_from_slice(payload);
    out
}

/// Text identifying the table layout; a file written for a different layout
/// is refused.
pub(crate) fn fingerprint(schema: &Schema) -> String {
    let mut s = schema.name.clone();
    for t in &schema.tables {
        s.push_str(&format!("|{}", t.entity));
        for c in &t.columns {
            s.push_str(&format!(",{}:{}:{}", c.name, c.kind, c.nullable));
        }
        for f in &t.foreign_keys {
            s.push_str(&format!(",{}->{}", f.column, f.target));
        }
    }
    for j in &schema.join_tables {
        s.push_str(&format!("|{}:{}:{}", j.name, j.entity_a, j.entity_b));
    }
    s
}

/// Complete snapshot file contents; deterministic for equal states.
pub(crate) fn encode_snapshot(schema: &Schema, state: &State) -> Vec<u8> {
    let mut w = Writer::default();
    w.str(&fingerprint(schema));
    w.u32(state.tables.len() as u32);
    for t in &state.tables {
        w.u64(t.last_key);
        w.u32(t.rows.len() as u32);
        for (k, row) in &t.rows {
            w.u64(*k);
            w.row(row);
        }
    }
    w.u32(state.joins.len() as u32);
    for j in &state.joins {
        w.u32(j.len() as u32);
        for (a, b) in j {
            w.u64(*a);
            w.u64(*b);
        }
    }
    let mut out = MAGIC.to_vec();
    out.extend(frame(&w.0));
    out
}

pub(crate) fn decode_snapshot(schema: &Schema, bytes: &[u8]) -> Result<State, Corrupt> {
    let body = bytes.strip_prefix(MAGIC).ok_or(Corrupt("bad magic"))?;
    let mut outer = Reader::new(body);
    let payload = outer.record()?.ok_or(Corrupt("missing snapshot record"))?;
    let mut r = Reader::new(payload);
    if r.str()? != fingerprint(schema) {
        return Err(Corrupt("schema mismatch"));
    }
    let n = r.len()?;
    if n != schema.tables.len() {
        return Err(Corrupt("table count mismatch"));
    }
    let mut tables = Vec::with_capacity(n);
    for _ in 0..n {
        let last_key = r.u64()?;
        let count = r.len()?;
        let mut rows = BTreeMap::new();
        for _ in 0..count {
            let k = r.u64()?;
            let row = r.row()?;
            check_shape(schema, tables.len(), &row)?;
            rows.insert(k, row);
        }
        tables.push(TableState { last_key, rows });
    }
    let m = r.len()?;
    if m != schema.join_tables.len() {
        return Err(Corrupt("join table count mismatch"));
    }
    let mut joins = Vec::with_capacity(m);
    for _ in 0..m {
        let count = r.len()?;
        let mut set = BTreeSet::new();
        for _ in 0..count {
            set.insert((r.u64()?, r.u64()?));
        }
        joins.push(set);
    }
    Ok(State { tables, joins })
}

fn check_shape(schema: &Schema, t: usize, row: &Row) -> Result<(), Corrupt> {
    let table = &schema.tables[t];
    if row.attrs.len() == table.columns.len() && row.refs.len() == table.foreign_keys.len() {
        Ok(())
    } else {
        Err(Corrupt("row shape mismatch"))
    }
}

pub(crate) fn encode_commit(log: &[Mutation]) -> Vec<u8> {
    let mut w = Writer::default();
    w.u32(log.len() as u32);
    for m in log {
        match m {
            Mutation::Put { table, key, row } => {
                w.u8(0);
                w.u32(*table as u32);
                w.u64(*key);
                w.row(row);
            }
            Mutation::Delete { table, key } => {
                w.u8(1);
                w.u32(*table as u32);
                w.u64(*key);
            }
            Mutation::Link { join, a, b } => {
                w.u8(2);
                w.u32(*join as u32);
                w.u64(*a);
                w.u64(*b);
            }
            Mutation::Unlink { join, a, b } => {
                w.u8(3);
                w.u32(*join as u32);
                w.u64(*a);
                w.u64(*b);
            }
        }
    }
    frame(&w.0)
}

/// Decodes one commit payload, checking indices against the schema.
pub(crate) fn decode_commit(schema: &Schema, payload: &[u8]) -> Result<Vec<Mutation>, Corrupt> {
    let mut r = Reader::new(payload);
    let n = r.len()?;
    let table = |i: u32| {
        let i = i as usize;
        if i < schema.tables.len() {
            Ok(i)
        } else {
            Err(Corrupt("table index out of range"))
        }
    };
    let join = |i: u32| {
        let i = i as usize;
        if i < schema.join_tables.len() {
            Ok(i)
        } else {
            Err(Corrupt("join index out of range"))
        }
    };
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        out.push(match r.u8()? {
            0 => {
                let t = table(r.u32()?)?;
                let key = r.u64()?;
                let row = r.row()?;
                check_shape(schema, t, &row)?;
                Mutation::Put { table: t, key, row }
            }
            1 => Mutation::Delete {
                table: table(r.u32()?)?,
                key: r.u64()?,
            },
            2 => Mutation::Link {
                join: join(r.u32()?)?,
                a: r.u64()?,
                b: r.u64()?,
            },
            3 => Mutation::Unlink {
                join: join(r.u32()?)?,
                a: r.u64()?,
                b: r.u64()?,
            },
            _ => return Err(Corrupt("unknown mutation tag")),
        });
    }
    if !r.is_empty() {
        return Err(Corrupt("trailing bytes"));
    }
    Ok(out)
}
