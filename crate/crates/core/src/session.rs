//! Session identity and session-scoped data.
//!
//! Every browser gets a random [`SessionId`] carried in the `spicey_session`
//! cookie. Data is kept per named [`SessionSlot`] and session, stamped with
//! the time of last use, and forgotten after a period of inactivity.

use std::any::Any;
use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::marker::PhantomData;
use std::sync::atomic::{AtomicI64, Ordering};
use std::sync::{Arc, Mutex, MutexGuard};
use std::time::{Duration, SystemTime, UNIX_EPOCH};

use rand::RngCore;

pub const SESSION_COOKIE: &str = "spicey_session";
pub const DEFAULT_HORIZON: Duration = Duration::from_secs(60 * 60);

/// 128 random bits, hex encoded.
pub fn random_token() -> String {
    let mut bytes = [0u8; 16];
    rand::thread_rng().fill_bytes(&mut bytes);
    hex::encode(bytes)
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SessionId(String);

impl SessionId {
    pub fn fresh() -> Self {
        SessionId(random_token())
    }

    /// Accepts exactly 32 lowercase hex digits.
    pub fn parse(s: &str) -> Option<Self> {
        let ok = s.len() == 32 && s.bytes().all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        ok.then(|| SessionId(s.to_string()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn set_cookie_header(&self) -> String {
        format!("{SESSION_COOKIE}={}; Path=/; HttpOnly", self.0)
    }
}

impl fmt::Display for SessionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Source of the current time in whole seconds since the epoch.
pub trait Clock: Send + Sync {
    fn now(&self) -> i64;
}

pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> i64 {
        SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_secs() as i64)
            .unwrap_or(0)
    }
}

/// Manually advanced clock for tests.
#[derive(Default)]
pub struct ManualClock(AtomicI64);

impl ManualClock {
    pub fn new(start: i64) -> Self {
        ManualClock(AtomicI64::new(start))
    }

    pub fn advance(&self, secs: i64) {
        self.0.fetch_add(secs, Ordering::SeqCst);
    }

    pub fn set(&self, secs: i64) {
        self.0.store(secs, Ordering::SeqCst);
    }
}

impl Clock for ManualClock {
    fn now(&self) -> i64 {
        self.0.load(Ordering::SeqCst)
    }
}

impl<C: Clock + ?Sized> Clock for Arc<C> {
    fn now(&self) -> i64 {
        (**self).now()
    }
}

/// Typed name of a session-data slot.
pub struct SessionSlot<T> {
    name: &'static str,
    _value: PhantomData<fn() -> T>,
}

impl<T> SessionSlot<T> {
    pub const fn new(name: &'static str) -> Self {
        SessionSlot {
            name,
            _value: PhantomData,
        }
    }

    pub fn name(&self) -> &'static str {
        self.name
    }
}

impl<T> Clone for SessionSlot<T> {
    fn clone(&self) -> Self {
        *self
    }
}

impl<T> Copy for SessionSlot<T> {}

/// Read-once status message shown on the next page.
pub const PAGE_MESSAGE: SessionSlot<String> = SessionSlot::new("pageMessage");

struct Entry {
    last_touch: i64,
    value: Box<dyn Any + Send>,
}

type Slots = HashMap<&'static str, HashMap<SessionId, Entry>>;

/// In-memory store of all session data, shared by request threads.
pub struct SessionStore {
    clock: Arc<dyn Clock>,
    horizon: i64,
    slots: Mutex<Slots>,
}

impl Default for SessionStore {
    fn default() -> Self {
        Self::new(Arc::new(SystemClock), DEFAULT_HORIZON)
    }
}

impl SessionStore {
    pub fn new(clock: Arc<dyn Clock>, horizon: Duration) -> Self {
        SessionStore {
            clock,
            horizon: horizon.as_secs() as i64,
            slots: Mutex::new(HashMap::new()),
        }
    }

    pub fn now(&self) -> i64 {
        self.clock.now()
    }

    fn lock(&self) -> MutexGuard<'_, Slots> {
        self.slots.lock().unwrap_or_else(|e| e.into_inner())
    }

    fn live(&self, entry: &Entry, now: i64) -> bool {
        now - entry.last_touch <= self.horizon
    }

    pub fn get<T: Clone + 'static>(&self, slot: SessionSlot<T>, sid: &SessionId) -> Option<T> {
        let now = self.now();
        let slots = self.lock();
        let entry = slots.get(slot.name)?.get(sid)?;
        if !self.live(entry, now) {
            return None;
        }
        entry.value.downcast_ref::<T>().cloned()
    }

    pub fn put<T: Send + 'static>(&self, slot: SessionSlot<T>, sid: &SessionId, value: T) {
        let now = self.now();
        self.lock().entry(slot.name).or_default().insert(
            sid.clone(),
            Entry {
                last_touch: now,
                value: Box::new(value),
            },
        );
    }

    pub fn remove<T>(&self, slot: SessionSlot<T>, sid: &SessionId) {
        if let Some(m) = self.lock().get_mut(slot.name) {
            m.remove(sid);
        }
    }

    /// Removes and returns the value of `slot`.
    pub fn take<T: 'static>(&self, slot: SessionSlot<T>, sid: &SessionId) -> Option<T> {
        let now = self.now();
        let entry = self.lock().get_mut(slot.name)?.remove(sid)?;
        if !self.live(&entry, now) {
            return None;
        }
        entry.value.downcast::<T>().ok().map(|b| *b)
    }

    /// Applies `f` to the slot value, creating it with `init` if absent or
    /// expired, atomically with respect to other store operations.
    pub fn update<T: Send + 'static, R>(
        &self,
        slot: SessionSlot<T>,
        sid: &SessionId,
        init: impl FnOnce() -> T,
        f: impl FnOnce(&mut T) -> R,
    ) -> R {
        let now = self.now();
        let mut slots = self.lock();
        let map = slots.entry(slot.name).or_default();
        let fresh = match map.get(sid) {
            Some(e) => !self.live(e, now) || !e.value.is::<T>(),
            None => true,
        };
        if fresh {
            map.insert(
                sid.clone(),
                Entry {
                    last_touch: now,
                    value: Box::new(init()),
                },
            );
        }
        let entry = map.get_mut(sid).expect("entry inserted above");
        entry.last_touch = now;
        f(entry.value.downcast_mut::<T>().expect("type checked above"))
    }

    /// Marks all live entries of `sid` as used now.
    pub fn touch(&self, sid: &SessionId) {
        let now = self.now();
        let horizon = self.horizon;
        for map in self.lock().values_mut() {
            if let Some(e) = map.get_mut(sid) {
                if now - e.last_touch <= horizon {
                    e.last_touch = now;
                }
            }
        }
    }

    /// Drops every entry idle for longer than the horizon at `now`; returns
    /// how many entries were removed.
    pub fn purge_expired(&self, now: i64) -> usize {
        let mut removed = 0;
        for map in self.lock().values_mut() {
            let before = map.len();
            map.retain(|_, e| now - e.last_touch <= self.horizon);
            removed += before - map.len();
        }
        removed
    }

    pub fn set_page_message(&self, sid: &SessionId, msg: &str) {
        self.put(PAGE_MESSAGE, sid, msg.to_string());
    }

    /// Returns the stored message and clears it; `""` when none is set.
    pub fn get_page_message(&self, sid: &SessionId) -> String {
        self.take(PAGE_MESSAGE, sid).unwrap_or_default()
    }
}

/// Bounded first-in-first-out table of handlers keyed by random tokens.
pub struct HandlerRegistry<H> {
    capacity: usize,
    order: VecDeque<String>,
    handlers: HashMap<String, H>,
}

pub const HANDLER_CAPACITY: usize = 100;

impl<H: Clone> Default for HandlerRegistry<H> {
    fn default() -> Self {
        Self::with_capacity(HANDLER_CAPACITY)
    }
}

impl<H: Clone> HandlerRegistry<H> {
    pub fn with_capacity(capacity: usize) -> Self {
        HandlerRegistry {
            capacity: capacity.max(1),
            order: VecDeque::new(),
            handlers: HashMap::new(),
        }
    }

    /// Stores `h` under a fresh token, evicting the oldest entry when full.
    pub fn register(&mut self, h: H) -> String {
        let token = random_token();
        while self.order.len() >= self.capacity {
            if let Some(old) = self.order.pop_front() {
                self.handlers.remove(&old);
            }
        }
        self.order.push_back(token.clone());
        self.handlers.insert(token.clone(), h);
        token
    }

    /// Looks up a handler; tokens stay valid until evicted.
    pub fn resolve(&self, token: &str) -> Option<H> {
        self.handlers.get(token).cloned()
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }
}
