//! Embedded store for ERD-shaped data.
//!
//! The schema is derived from a validated ERD: one table per entity, foreign
//! keys for one-to-many and one-to-one relationships, join tables for
//! many-to-many relationships. All writes go through transactions that either
//! commit with every constraint intact or fail without any visible effect.
//!
//! On disk a database is a snapshot file plus a journal of committed
//! transactions next to it. Opening replays the journal and writes a fresh
//! snapshot.

mod codec;
mod query;
mod schema;
mod state;
mod value;

use std::fs::{self, File, OpenOptions};
use std::io::{self, Read as _, Seek as _, SeekFrom, Write as _};
use std::path::{Path, PathBuf};
use std::sync::{Arc, Mutex, MutexGuard, RwLock};

use thiserror::Error;

pub use query::Query;
pub use schema::{Column, ForeignKey, JoinTable, Schema, Table};
pub use state::{Reader, State, Tx};
pub use value::{EntityValue, Value};

use crate::erd::DomainKind;

/// Why a transaction failed. The message names the entity, attribute or
/// relationship involved.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum TxError {
    #[error("unique violation on {entity}.{attribute}")]
    UniqueViolation { entity: String, attribute: String },
    #[error("missing required {entity} reference ({relationship})")]
    MissingReference { entity: String, relationship: String },
    #[error("dangling key: no {entity} with key {key}")]
    DanglingKey { entity: String, key: u64 },
    #[error(
        "cardinality bound exceeded: {entity} {key} may be related to at most {max} instance(s) via {relationship}"
    )]
    CardinalityExceeded {
        relationship: String,
        entity: String,
        key: u64,
        max: u64,
    },
    #[error("unknown key: no {entity} with key {key}")]
    UnknownKey { entity: String, key: u64 },
    #[error("entity still referenced by {count} {entity} instance(s)")]
    StillReferenced { count: usize, entity: String },
    #[error("missing value for {entity}.{attribute}")]
    MissingValue { entity: String, attribute: String },
    #[error("type mismatch on {entity}.{attribute}: expected {expected}")]
    TypeMismatch {
        entity: String,
        attribute: String,
        expected: DomainKind,
    },
    #[error("wrong number of values for {entity}: expected {expected}, found {found}")]
    Arity {
        entity: String,
        expected: usize,
        found: usize,
    },
    #[error("unknown entity {0}")]
    UnknownEntity(String),
    #[error("unknown relationship {0}")]
    UnknownRelationship(String),
    /// Failure raised by application code inside a transaction.
    #[error("{0}")]
    Aborted(String),
    #[error("storage error: {0}")]
    Storage(String),
}

#[derive(Debug, Error)]
pub enum OpenError {
    #[error("cannot access {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("{path} is not a valid database file: {reason}")]
    Corrupt { path: PathBuf, reason: &'static str },
}

type TxFn<T> = Box<dyn FnOnce(&mut Tx<'_>) -> Result<T, TxError> + Send>;

/// A composable transaction, run atomically by [`Database::run`].
pub struct Transaction<T>(TxFn<T>);

impl<T: Send + 'static> Transaction<T> {
    pub fn new(f: impl FnOnce(&mut Tx<'_>) -> Result<T, TxError> + Send + 'static) -> Self {
        Transaction(Box::new(f))
    }

    pub fn pure(v: T) -> Self {
        Transaction::new(move |_| Ok(v))
    }

    pub fn fail(msg: &str) -> Self {
        let msg = msg.to_string();
        Transaction::new(move |_| Err(TxError::Aborted(msg)))
    }

    pub fn and_then<U: Send + 'static>(self, f: impl FnOnce(T) -> Transaction<U> + Send + 'static) -> Transaction<U> {
        Transaction::new(move |tx| {
            let v = (self.0)(tx)?;
            (f(v).0)(tx)
        })
    }

    pub fn map<U: Send + 'static>(self, f: impl FnOnce(T) -> U + Send + 'static) -> Transaction<U> {
        Transaction::new(move |tx| (self.0)(tx).map(f))
    }

    /// Runs `self`, then `next`, keeping the result of `next`.
    pub fn then<U: Send + 'static>(self, next: Transaction<U>) -> Transaction<U> {
        self.and_then(move |_| next)
    }

    pub fn run_in(self, tx: &mut Tx<'_>) -> Result<T, TxError> {
        (self.0)(tx)
    }
}

impl Transaction<()> {
    /// Runs all transactions in order.
    pub fn sequence(ts: Vec<Transaction<()>>) -> Self {
        Transaction::new(move |tx| ts.into_iter().try_for_each(|t| t.run_in(tx)))
    }
}

/// Consistent read-only view of the database.
#[derive(Clone)]
pub struct Snapshot {
    schema: Arc<Schema>,
    state: Arc<State>,
}

impl Reader for Snapshot {
    fn parts(&self) -> (&Schema, &State) {
        (&self.schema, &self.state)
    }
}

struct Files {
    snapshot: PathBuf,
    journal_path: PathBuf,
    journal: File,
    commits: usize,
}

/// Journal commits after which the snapshot is rewritten.
const CHECKPOINT_EVERY: usize = 1000;

pub struct Database {
    schema: Arc<Schema>,
    state: RwLock<Arc<State>>,
    /// Held for the whole of each write transaction.
    writer: Mutex<Option<Files>>,
}

impl Database {
    /// Database kept only in memory.
    pub fn in_memory(schema: Schema) -> Database {
        let state = State::empty(&schema);
        Database {
            schema: Arc::new(schema),
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(None),
        }
    }

    /// Opens or creates the database stored at `path`; the journal lives at
    /// `path` with `.journal` appended.
    pub fn open(schema: Schema, path: &Path) -> Result<Database, OpenError> {
        let io_err = |p: &Path| {
            let p = p.to_path_buf();
            move |source| OpenError::Io { path: p, source }
        };
        let corrupt = |p: &Path| {
            let p = p.to_path_buf();
            move |c: codec::Corrupt| OpenError::Corrupt { path: p, reason: c.0 }
        };
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            fs::create_dir_all(dir).map_err(io_err(dir))?;
        }
        let mut state = match fs::read(path) {
            Ok(bytes) => codec::decode_snapshot(&schema, &bytes).map_err(corrupt(path))?,
            Err(e) if e.kind() == io::ErrorKind::NotFound => State::empty(&schema),
            Err(e) => return Err(io_err(path)(e)),
        };
        let journal_path = journal_path(path);
        match File::open(&journal_path) {
            Ok(mut f) => {
                let mut bytes = vec![];
                f.read_to_end(&mut bytes).map_err(io_err(&journal_path))?;
                replay(&schema, &mut state, &bytes);
            }
            Err(e) if e.kind() == io::ErrorKind::NotFound => {}
            Err(e) => return Err(io_err(&journal_path)(e)),
        }
        write_snapshot(&schema, &state, path).map_err(io_err(path))?;
        let journal = new_journal(&journal_path).map_err(io_err(&journal_path))?;
        Ok(Database {
            schema: Arc::new(schema),
            state: RwLock::new(Arc::new(state)),
            writer: Mutex::new(Some(Files {
                snapshot: path.to_path_buf(),
                journal_path,
                journal,
                commits: 0,
            })),
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn snapshot(&self) -> Snapshot {
        let state = self.state.read().unwrap_or_else(|e| e.into_inner()).clone();
        Snapshot {
            schema: self.schema.clone(),
            state,
        }
    }

    fn lock_writer(&self) -> MutexGuard<'_, Option<Files>> {
        self.writer.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Runs `f` on a private working copy; commits its changes only if it
    /// returns `Ok`.
    pub fn transact<T>(&self, f: impl FnOnce(&mut Tx<'_>) -> Result<T, TxError>) -> Result<T, TxError> {
        let mut files = self.lock_writer();
        let base = self.state.read().unwrap_or_else(|e| e.into_inner()).clone();
        let mut tx = Tx::new(&self.schema, (*base).clone());
        let result = f(&mut tx)?;
        if tx.log.is_empty() {
            return Ok(result);
        }
        if let Some(files) = files.as_mut() {
            append_commit(files, &tx.log).map_err(|e| TxError::Storage(e.to_string()))?;
        }
        let new_state = Arc::new(tx.state);
        *self.state.write().unwrap_or_else(|e| e.into_inner()) = new_state.clone();
        if let Some(files) = files.as_mut() {
            files.commits += 1;
            if files.commits >= CHECKPOINT_EVERY {
                // a failed checkpoint leaves the journal in place, so nothing is lost
                if checkpoint(&self.schema, &new_state, files).is_ok() {
                    files.commits = 0;
                }
            }
        }
        Ok(result)
    }

    pub fn run<T: Send + 'static>(&self, t: Transaction<T>) -> Result<T, TxError> {
        self.transact(|tx| t.run_in(tx))
    }

    /// Writes a fresh snapshot and empties the journal.
    pub fn checkpoint(&self) -> io::Result<()> {
        let mut files = self.lock_writer();
        let state = self.snapshot().state;
        match files.as_mut() {
            Some(f) => {
                checkpoint(&self.schema, &state, f)?;
                f.commits = 0;
                Ok(())
            }
            None => Ok(()),
        }
    }

    /// Deterministic serialization of the current contents.
    pub fn dump(&self) -> Vec<u8> {
        let snap = self.snapshot();
        codec::encode_snapshot(&snap.schema, &snap.state)
    }
}

/// Reads the contents of a database file without opening it for writing.
pub fn load_snapshot(schema: Schema, path: &Path) -> Result<Snapshot, OpenError> {
    let bytes = fs::read(path).map_err(|source| OpenError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let mut state = codec::decode_snapshot(&schema, &bytes).map_err(|c| OpenError::Corrupt {
        path: path.to_path_buf(),
        reason: c.0,
    })?;
    if let Ok(journal) = fs::read(journal_path(path)) {
        replay(&schema, &mut state, &journal);
    }
    Ok(Snapshot {
        schema: Arc::new(schema),
        state: Arc::new(state),
    })
}

fn journal_path(path: &Path) -> PathBuf {
    let mut p = path.as_os_str().to_owned();
    p.push(".journal");
    PathBuf::from(p)
}

/// Applies journal records up to the first damaged one; a torn tail from an
/// interrupted append is expected and ignored.
fn replay(schema: &Schema, state: &mut State, bytes: &[u8]) {
    let Some(body) = bytes.strip_prefix(codec::MAGIC) else {
        return;
    };
    let mut r = codec::Reader::new(body);
    while let Ok(Some(payload)) = r.record() {
        match codec::decode_commit(schema, payload) {
            Ok(log) => log.iter().for_each(|m| state.apply(m)),
            Err(_) => break,
        }
    }
}

fn write_snapshot(schema: &Schema, state: &State, path: &Path) -> io::Result<()> {
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(".tmp");
    let tmp = PathBuf::from(tmp);
    {
        let mut f = File::create(&tmp)?;
        f.write_all(&codec::encode_snapshot(schema, state))?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

fn new_journal(path: &Path) -> io::Result<File> {
    let mut f = OpenOptions::new().create(true).write(true).truncate(true).open(path)?;
    f.write_all(codec::MAGIC)?;
    f.sync_data()?;
    Ok(f)
}

fn append_commit(files: &mut Files, log: &[state::Mutation]) -> io::Result<()> {
    let len = files.journal.metadata()?.len();
    let record = codec::encode_commit(log);
    let written = files.journal.write_all(&record).and_then(|_| files.journal.sync_data());
    if written.is_err() {
        // drop any partial record so later commits stay replayable
        let _ = files.journal.set_len(len);
        let _ = files.journal.seek(SeekFrom::Start(len));
    }
    written
}

fn checkpoint(schema: &Schema, state: &State, files: &mut Files) -> io::Result<()> {
    write_snapshot(schema, state, &files.snapshot)?;
    files.journal = new_journal(&files.journal_path)?;
    Ok(())
}
