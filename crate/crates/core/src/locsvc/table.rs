use super::LocationRecord;
use crate::grid::RegionId;
use crate::NodeId;
use std::collections::BTreeMap;

/// A record held by a server, with the region the server is responsible for.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub record: LocationRecord,
    /// PHLS: the subject's region at this level. HLS: the responsible cell.
    pub held_for: RegionId,
}

/// Records held by one node, keyed by (subject, level).
#[derive(Debug, Clone, Default)]
pub struct ServerTable {
    entries: BTreeMap<(NodeId, u32), Entry>,
}

impl ServerTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Stores `entry` unless a record at least as recent is already held.
    /// Returns whether the table changed.
    pub fn insert(&mut self, level: u32, entry: Entry) -> bool {
        let key = (entry.record.subject, level);
        match self.entries.get(&key) {
            Some(old) if old.record.timestamp >= entry.record.timestamp => false,
            _ => {
                self.entries.insert(key, entry);
                true
            }
        }
    }

    pub fn get(&self, subject: NodeId, level: u32) -> Option<&Entry> {
        self.entries.get(&(subject, level))
    }

    pub fn remove(&mut self, subject: NodeId, level: u32) -> Option<Entry> {
        self.entries.remove(&(subject, level))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (u32, &Entry)> {
        self.entries.iter().map(|(&(_, level), e)| (level, e))
    }

    /// Removes and returns every entry matching `pred`, in key order.
    pub fn drain_where(&mut self, mut pred: impl FnMut(u32, &Entry) -> bool) -> Vec<(u32, Entry)> {
        let keys: Vec<_> = self
            .entries
            .iter()
            .filter(|(&(_, level), e)| pred(level, e))
            .map(|(k, _)| *k)
            .collect();
        keys.into_iter()
            .map(|k| (k.1, self.entries.remove(&k).expect("key collected above")))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::Vec2;

    fn entry(subject: u32, t: f64) -> Entry {
        Entry {
            record: LocationRecord {
                subject: NodeId(subject),
                position: Vec2::new(t, t),
                velocity: Vec2::ZERO,
                timestamp: t,
                region: RegionId::new(0, 0, 0),
            },
            held_for: RegionId::new(0, 0, 0),
        }
    }

    #[test]
    fn newer_replaces_older_only() {
        let mut t = ServerTable::new();
        assert!(t.insert(0, entry(3, 5.0)));
        assert!(!t.insert(0, entry(3, 4.0)));
        assert!(!t.insert(0, entry(3, 5.0)));
        assert_eq!(t.get(NodeId(3), 0).unwrap().record.timestamp, 5.0);
        assert!(t.insert(0, entry(3, 6.0)));
        assert!(t.insert(1, entry(3, 1.0)));
        assert_eq!(t.len(), 2);
        let drained = t.drain_where(|level, _| level == 0);
        assert_eq!(drained.len(), 1);
        assert_eq!(t.len(), 1);
    }
}
