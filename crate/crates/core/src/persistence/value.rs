use std::cmp::Ordering;
use std::fmt;

use crate::calendar::{self, CalendarTime};
use crate::erd::DomainKind;

/// Attribute value as stored.
#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Null,
    Int(i64),
    Float(f64),
    Bool(bool),
    Str(String),
    /// Seconds since the epoch, UTC.
    Date(i64),
}

impl Value {
    pub fn kind(&self) -> Option<DomainKind> {
        match self {
            Value::Null => None,
            Value::Int(_) => Some(DomainKind::Int),
            Value::Float(_) => Some(DomainKind::Float),
            Value::Bool(_) => Some(DomainKind::Bool),
            Value::Str(_) => Some(DomainKind::String),
            Value::Date(_) => Some(DomainKind::Date),
        }
    }

    pub fn date(t: &CalendarTime) -> Value {
        Value::Date(calendar::to_epoch_seconds(t))
    }

    pub fn is_null(&self) -> bool {
        matches!(self, Value::Null)
    }

    pub fn as_int(&self) -> Option<i64> {
        match self {
            Value::Int(i) => Some(*i),
            _ => None,
        }
    }

    pub fn as_float(&self) -> Option<f64> {
        match self {
            Value::Float(x) => Some(*x),
            _ => None,
        }
    }

    pub fn as_bool(&self) -> Option<bool> {
        match self {
            Value::Bool(b) => Some(*b),
            _ => None,
        }
    }

    pub fn as_str(&self) -> Option<&str> {
        match self {
            Value::Str(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_date(&self) -> Option<CalendarTime> {
        match self {
            Value::Date(d) => calendar::from_epoch_seconds(*d),
            _ => None,
        }
    }

    /// Total order: `Null` first, then by kind, then by value (floats by
    /// IEEE total order).
    pub fn total_cmp(&self, other: &Value) -> Ordering {
        fn rank(v: &Value) -> u8 {
            match v {
                Value::Null => 0,
                Value::Int(_) => 1,
                Value::Float(_) => 2,
                Value::Bool(_) => 3,
                Value::Str(_) => 4,
                Value::Date(_) => 5,
            }
        }
        match (self, other) {
            (Value::Int(a), Value::Int(b)) => a.cmp(b),
            (Value::Float(a), Value::Float(b)) => a.total_cmp(b),
            (Value::Bool(a), Value::Bool(b)) => a.cmp(b),
            (Value::Str(a), Value::Str(b)) => a.cmp(b),
            (Value::Date(a), Value::Date(b)) => a.cmp(b),
            _ => rank(self).cmp(&rank(other)),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Null => Ok(()),
            Value::Int(i) => write!(f, "{i}"),
            Value::Float(x) => write!(f, "{x}"),
            Value::Bool(b) => write!(f, "{b}"),
            Value::Str(s) => f.write_str(s),
            Value::Date(d) => match calendar::from_epoch_seconds(*d) {
                Some(t) => f.write_str(&calendar::format_iso(&t)),
                None => write!(f, "{d}"),
            },
        }
    }
}

impl From<i64> for Value {
    fn from(v: i64) -> Self {
        Value::Int(v)
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Float(v)
    }
}

impl From<bool> for Value {
    fn from(v: bool) -> Self {
        Value::Bool(v)
    }
}

impl From<String> for Value {
    fn from(v: String) -> Self {
        Value::Str(v)
    }
}

impl From<&str> for Value {
    fn from(v: &str) -> Self {
        Value::Str(v.to_string())
    }
}

impl From<CalendarTime> for Value {
    fn from(v: CalendarTime) -> Self {
        Value::date(&v)
    }
}

impl<T: Into<Value>> From<Option<T>> for Value {
    fn from(v: Option<T>) -> Self {
        v.map_or(Value::Null, Into::into)
    }
}

/// A stored entity instance.
#[derive(Clone, Debug, PartialEq)]
pub struct EntityValue {
    pub entity: String,
    pub key: u64,
    /// One value per attribute, in declaration order.
    pub attrs: Vec<Value>,
    /// One entry per foreign key of the entity's table.
    pub refs: Vec<Option<u64>>,
}

impl EntityValue {
    /// Lexicographic comparison over attributes, then key.
    pub fn cmp_attrs(&self, other: &EntityValue) -> Ordering {
        for (a, b) in self.attrs.iter().zip(&other.attrs) {
            match a.total_cmp(b) {
                Ordering::Equal => {}
                o => return o,
            }
        }
        self.key.cmp(&other.key)
    }
}
