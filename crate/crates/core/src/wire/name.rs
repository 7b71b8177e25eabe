use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

pub const MAX_LABEL_LEN: usize = 63;
pub const MAX_NAME_LEN: usize = 255;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NameError {
    #[error("empty label")]
    EmptyLabel,
    #[error("label exceeds 63 bytes")]
    LabelTooLong,
    #[error("name exceeds 255 bytes on the wire")]
    NameTooLong,
    #[error("bad escape sequence in {0:?}")]
    BadEscape(String),
}

/// A domain name as a sequence of labels, most specific first.
///
/// Case is preserved exactly as constructed or decoded. Equality, hashing and
/// ordering all ignore ASCII case; ordering is the DNSSEC canonical order
/// (label-wise from the root, bytes compared after lowercasing).
#[derive(Clone, Default)]
pub struct DnsName {
    labels: Vec<Vec<u8>>,
}

impl DnsName {
    pub fn root() -> Self {
        DnsName { labels: Vec::new() }
    }

    pub fn from_labels<I, L>(labels: I) -> Result<Self, NameError>
    where
        I: IntoIterator<Item = L>,
        L: Into<Vec<u8>>,
    {
        let labels: Vec<Vec<u8>> = labels.into_iter().map(Into::into).collect();
        let mut wire_len = 1;
        for label in &labels {
            if label.is_empty() {
                return Err(NameError::EmptyLabel);
            }
            if label.len() > MAX_LABEL_LEN {
                return Err(NameError::LabelTooLong);
            }
            wire_len += label.len() + 1;
        }
        if wire_len > MAX_NAME_LEN {
            return Err(NameError::NameTooLong);
        }
        Ok(DnsName { labels })
    }

    pub fn labels(&self) -> &[Vec<u8>] {
        &self.labels
    }

    pub fn is_root(&self) -> bool {
        self.labels.is_empty()
    }

    /// Number of labels, not counting the root. This is the value an RRSIG
    /// labels field carries for a non-wildcard owner.
    pub fn label_count(&self) -> u8 {
        self.labels.len() as u8
    }

    pub fn wire_len(&self) -> usize {
        1 + self.labels.iter().map(|l| l.len() + 1).sum::<usize>()
    }

    pub fn parent(&self) -> Option<DnsName> {
        if self.labels.is_empty() {
            None
        } else {
            Some(DnsName { labels: self.labels[1..].to_vec() })
        }
    }

    /// True if `self` equals `ancestor` or lies below it.
    pub fn is_subdomain_of(&self, ancestor: &DnsName) -> bool {
        if ancestor.labels.len() > self.labels.len() {
            return false;
        }
        let skip = self.labels.len() - ancestor.labels.len();
        self.labels[skip..].iter().zip(&ancestor.labels).all(|(a, b)| a.eq_ignore_ascii_case(b))
    }

    /// Prepends a label, e.g. `"www"` onto `victim.test.`.
    pub fn prepend(&self, label: &str) -> Result<DnsName, NameError> {
        let mut labels = vec![label.as_bytes().to_vec()];
        labels.extend(self.labels.iter().cloned());
        DnsName::from_labels(labels)
    }

    /// The names strictly below `ancestor` down to and including `self`,
    /// shallowest first. Empty when `self` is not below `ancestor`.
    pub fn descendants_from(&self, ancestor: &DnsName) -> Vec<DnsName> {
        if !self.is_subdomain_of(ancestor) {
            return Vec::new();
        }
        let depth = self.labels.len() - ancestor.labels.len();
        (0..depth).rev().map(|skip| DnsName { labels: self.labels[skip..].to_vec() }).collect()
    }

    pub fn to_lowercase(&self) -> DnsName {
        DnsName { labels: self.labels.iter().map(|l| l.to_ascii_lowercase()).collect() }
    }

    /// Uncompressed wire form, case preserved.
    pub fn write_wire(&self, out: &mut Vec<u8>) {
        for label in &self.labels {
            out.push(label.len() as u8);
            out.extend_from_slice(label);
        }
        out.push(0);
    }

    /// Uncompressed wire form with ASCII letters lowercased.
    pub fn canonical_wire(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(self.wire_len());
        self.to_lowercase().write_wire(&mut out);
        out
    }
}

impl PartialEq for DnsName {
    fn eq(&self, other: &Self) -> bool {
        self.labels.len() == other.labels.len()
            && self.labels.iter().zip(&other.labels).all(|(a, b)| a.eq_ignore_ascii_case(b))
    }
}

impl Eq for DnsName {}

impl Hash for DnsName {
    fn hash<H: Hasher>(&self, state: &mut H) {
        for label in &self.labels {
            state.write_u8(label.len() as u8);
            for b in label {
                state.write_u8(b.to_ascii_lowercase());
            }
        }
        state.write_u8(0);
    }
}

impl Ord for DnsName {
    fn cmp(&self, other: &Self) -> Ordering {
        let a = self.labels.iter().rev();
        let b = other.labels.iter().rev();
        for (x, y) in a.zip(b) {
            let x = x.iter().map(u8::to_ascii_lowercase);
            let y = y.iter().map(u8::to_ascii_lowercase);
            match x.cmp(y) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
        self.labels.len().cmp(&other.labels.len())
    }
}

impl PartialOrd for DnsName {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.labels.is_empty() {
            return f.write_str(".");
        }
        for label in &self.labels {
            for &b in label {
                match b {
                    b'.' | b'\\' => write!(f, "\\{}", b as char)?,
                    0x21..=0x7e => write!(f, "{}", b as char)?,
                    _ => write!(f, "\\{:03}", b)?,
                }
            }
            f.write_str(".")?;
        }
        Ok(())
    }
}

impl fmt::Debug for DnsName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DnsName({})", self)
    }
}

impl FromStr for DnsName {
    type Err = NameError;

    /// Parses presentation form. A trailing dot is optional; every name is
    /// treated as absolute.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "." || s.is_empty() {
            return Ok(DnsName::root());
        }
        let mut labels = Vec::new();
        let mut current = Vec::new();
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            match bytes[i] {
                b'.' => {
                    labels.push(std::mem::take(&mut current));
                    i += 1;
                }
                b'\\' => {
                    let rest = &bytes[i + 1..];
                    if rest.len() >= 3 && rest[..3].iter().all(u8::is_ascii_digit) {
                        let v: u16 = std::str::from_utf8(&rest[..3])
                            .ok()
                            .and_then(|d| d.parse().ok())
                            .ok_or_else(|| NameError::BadEscape(s.to_string()))?;
                        if v > 255 {
                            return Err(NameError::BadEscape(s.to_string()));
                        }
                        current.push(v as u8);
                        i += 4;
                    } else if let Some(&c) = rest.first() {
                        current.push(c);
                        i += 2;
                    } else {
                        return Err(NameError::BadEscape(s.to_string()));
                    }
                }
                b => {
                    current.push(b);
                    i += 1;
                }
            }
        }
        // an empty `current` here means the input ended with an unescaped dot
        if !current.is_empty() {
            labels.push(current);
        }
        DnsName::from_labels(labels)
    }
}

impl Serialize for DnsName {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for DnsName {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}
