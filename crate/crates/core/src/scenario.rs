//! The scenario set ("scenario dictionary") and its algebra.
//!
//! A scenario set maps a referred track id to the timestamps at which it is
//! referred, plus, per related track id, the timestamps at which the
//! relationship holds. Relationship timestamps are always a subset of the
//! owning entry's timestamps, and no entry or relationship is ever empty.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::track::Timestamp;

pub type TimeSet = BTreeSet<Timestamp>;

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioEntry {
    pub timestamps: TimeSet,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub related: BTreeMap<String, TimeSet>,
}

impl ScenarioEntry {
    fn restrict_related(&mut self) {
        let own = &self.timestamps;
        self.related.retain(|_, ts| {
            ts.retain(|t| own.contains(t));
            !ts.is_empty()
        });
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ScenarioSet {
    entries: BTreeMap<String, ScenarioEntry>,
}

impl ScenarioSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &BTreeMap<String, ScenarioEntry> {
        &self.entries
    }

    pub fn get(&self, id: &str) -> Option<&ScenarioEntry> {
        self.entries.get(id)
    }

    pub fn contains(&self, id: &str, t: Timestamp) -> bool {
        self.entries.get(id).is_some_and(|e| e.timestamps.contains(&t))
    }

    pub fn ids(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn insert(&mut self, id: &str, t: Timestamp) {
        match self.entries.get_mut(id) {
            Some(e) => {
                e.timestamps.insert(t);
            }
            None => {
                let mut e = ScenarioEntry::default();
                e.timestamps.insert(t);
                self.entries.insert(id.to_owned(), e);
            }
        }
    }

    pub fn insert_all(&mut self, id: &str, ts: impl IntoIterator<Item = Timestamp>) {
        for t in ts {
            self.insert(id, t);
        }
    }

    /// Records `related` at `t` for `id`, inserting `t` into `id`'s own set.
    pub fn insert_related(&mut self, id: &str, related: &str, t: Timestamp) {
        self.insert(id, t);
        let e = self.entries.get_mut(id).expect("just inserted");
        match e.related.get_mut(related) {
            Some(ts) => {
                ts.insert(t);
            }
            None => {
                e.related.insert(related.to_owned(), TimeSet::from([t]));
            }
        }
    }

    /// Every `(id, t)` pair.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, Timestamp)> {
        self.entries
            .iter()
            .flat_map(|(id, e)| e.timestamps.iter().map(move |t| (id.as_str(), *t)))
    }

    /// Every `(id, related, t)` triple.
    pub fn triples(&self) -> impl Iterator<Item = (&str, &str, Timestamp)> {
        self.entries.iter().flat_map(|(id, e)| {
            e.related
                .iter()
                .flat_map(move |(r, ts)| ts.iter().map(move |t| (id.as_str(), r.as_str(), *t)))
        })
    }

    pub fn pair_count(&self) -> usize {
        self.entries.values().map(|e| e.timestamps.len()).sum()
    }

    pub fn relationship_count(&self) -> usize {
        self.entries
            .values()
            .flat_map(|e| e.related.values())
            .map(BTreeSet::len)
            .sum()
    }

    /// Copy with every relationship removed.
    pub fn without_relationships(&self) -> ScenarioSet {
        ScenarioSet {
            entries: self
                .entries
                .iter()
                .map(|(id, e)| {
                    (id.clone(), ScenarioEntry { timestamps: e.timestamps.clone(), related: BTreeMap::new() })
                })
                .collect(),
        }
    }

    /// Keeps only the `(id, t)` pairs accepted by `keep`, dropping relationships at
    /// removed timestamps and any entry left empty.
    pub fn retain_pairs(&mut self, mut keep: impl FnMut(&str, Timestamp) -> bool) {
        self.entries.retain(|id, e| {
            e.timestamps.retain(|t| keep(id, *t));
            e.restrict_related();
            !e.timestamps.is_empty()
        });
    }

    /// Removes relationship triples rejected by `keep`; referred timestamps are untouched.
    pub fn retain_relationships(&mut self, mut keep: impl FnMut(&str, &str, Timestamp) -> bool) {
        for (id, e) in self.entries.iter_mut() {
            e.related.retain(|r, ts| {
                ts.retain(|t| keep(id, r, *t));
                !ts.is_empty()
            });
        }
    }

    pub fn entry_mut(&mut self, id: &str) -> Option<&mut ScenarioEntry> {
        self.entries.get_mut(id)
    }

    /// Replaces the whole entry for `id`, normalizing it.
    pub fn set_entry(&mut self, id: &str, mut entry: ScenarioEntry) {
        entry.restrict_related();
        if entry.timestamps.is_empty() {
            self.entries.remove(id);
        } else {
            self.entries.insert(id.to_owned(), entry);
        }
    }

    /// Checks the structural invariants: no empty sets and relationships inside
    /// their entry's timestamps.
    pub fn check_invariants(&self) -> Result<()> {
        for (id, e) in &self.entries {
            if e.timestamps.is_empty() {
                return Err(Error::Malformed(format!("entry {id} has no timestamps")));
            }
            for (r, ts) in &e.related {
                if ts.is_empty() {
                    return Err(Error::Malformed(format!("relationship {id}->{r} is empty")));
                }
                if !ts.is_subset(&e.timestamps) {
                    return Err(Error::Malformed(format!(
                        "relationship {id}->{r} has timestamps outside its entry"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Intersection of keys and per-key timestamps; relationships are the union of all
/// inputs' relationships restricted to the surviving pairs.
pub fn scenario_and(inputs: &[&ScenarioSet]) -> Result<ScenarioSet> {
    let (first, rest) = inputs
        .split_first()
        .ok_or_else(|| Error::InvalidArgument("scenario_and needs at least one input".into()))?;
    let mut out = ScenarioSet::new();
    'keys: for (id, e) in &first.entries {
        let mut ts = e.timestamps.clone();
        for other in rest {
            match other.entries.get(id) {
                Some(o) => ts.retain(|t| o.timestamps.contains(t)),
                None => continue 'keys,
            }
            if ts.is_empty() {
                continue 'keys;
            }
        }
        let mut related: BTreeMap<String, TimeSet> = BTreeMap::new();
        for input in inputs {
            let src = &input.entries[id];
            for (r, rts) in &src.related {
                related.entry(r.clone()).or_default().extend(rts.iter().copied());
            }
        }
        out.set_entry(id, ScenarioEntry { timestamps: ts, related });
    }
    Ok(out)
}

/// Union of keys, timestamps and relationships.
pub fn scenario_or(inputs: &[&ScenarioSet]) -> Result<ScenarioSet> {
    if inputs.is_empty() {
        return Err(Error::InvalidArgument("scenario_or needs at least one input".into()));
    }
    let mut out = ScenarioSet::new();
    for input in inputs {
        for (id, e) in &input.entries {
            let dst = out.entries.entry(id.clone()).or_default();
            dst.timestamps.extend(e.timestamps.iter().copied());
            for (r, ts) in &e.related {
                dst.related.entry(r.clone()).or_default().extend(ts.iter().copied());
            }
        }
    }
    Ok(out)
}

/// `candidates` minus the pairs in `filtered`. Relationships are not carried over.
pub fn scenario_not(candidates: &ScenarioSet, filtered: &ScenarioSet) -> ScenarioSet {
    let mut out = candidates.without_relationships();
    out.retain_pairs(|id, t| !filtered.contains(id, t));
    out
}

/// Swaps referred and related tracks: every `(k, r, t)` triple becomes `(r, k, t)`.
pub fn reverse_relationship(input: &ScenarioSet) -> ScenarioSet {
    let mut out = ScenarioSet::new();
    for (k, r, t) in input.triples() {
        out.insert_related(r, k, t);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn ts(v: &[i64]) -> TimeSet {
        v.iter().map(|t| Timestamp(*t)).collect()
    }

    fn simple(entries: &[(&str, &[i64])]) -> ScenarioSet {
        let mut s = ScenarioSet::new();
        for (id, t) in entries {
            s.insert_all(id, t.iter().map(|t| Timestamp(*t)));
        }
        s
    }

    #[test]
    fn and_single_is_identity_and_empty_absorbs() {
        let mut x = simple(&[("a", &[1, 2, 3])]);
        x.insert_related("a", "b", Timestamp(2));
        assert_eq!(scenario_and(&[&x]).unwrap(), x);
        assert!(scenario_and(&[&x, &ScenarioSet::new()]).unwrap().is_empty());
        assert!(scenario_and(&[]).is_err());
    }

    #[test]
    fn or_unions() {
        let a = simple(&[("a", &[1, 2])]);
        let b = simple(&[("a", &[2, 3]), ("b", &[5])]);
        let got = scenario_or(&[&a, &b]).unwrap();
        assert_eq!(got, simple(&[("a", &[1, 2, 3]), ("b", &[5])]));
        assert_eq!(scenario_or(&[&a, &a]).unwrap(), a);
        assert_eq!(scenario_or(&[&a, &ScenarioSet::new()]).unwrap(), a);
        assert!(scenario_or(&[]).is_err());
    }

    #[test]
    fn and_merges_relationships_on_surviving_pairs() {
        let mut a = simple(&[("a", &[1, 2, 3])]);
        a.insert_related("a", "x", Timestamp(1));
        a.insert_related("a", "x", Timestamp(3));
        let mut b = simple(&[("a", &[2, 3])]);
        b.insert_related("a", "y", Timestamp(2));
        let got = scenario_and(&[&a, &b]).unwrap();
        let e = got.get("a").unwrap();
        assert_eq!(e.timestamps, ts(&[2, 3]));
        assert_eq!(e.related["x"], ts(&[3]));
        assert_eq!(e.related["y"], ts(&[2]));
        got.check_invariants().unwrap();
    }

    #[test]
    fn not_strips_relationships() {
        let mut x = simple(&[("a", &[1, 2])]);
        x.insert_related("a", "b", Timestamp(1));
        assert!(scenario_not(&x, &x).is_empty());
        let got = scenario_not(&x, &ScenarioSet::new());
        assert_eq!(got, simple(&[("a", &[1, 2])]));
        assert_eq!(got.relationship_count(), 0);
    }

    #[test]
    fn reverse_single_pair() {
        let mut x = simple(&[("v1", &[1, 2, 3, 4, 5])]);
        x.insert_related("v1", "p1", Timestamp(2));
        x.insert_related("v1", "p1", Timestamp(3));
        let r = reverse_relationship(&x);
        let e = r.get("p1").unwrap();
        assert_eq!(e.timestamps, ts(&[2, 3]));
        assert_eq!(e.related["v1"], ts(&[2, 3]));
        assert_eq!(r.len(), 1);
    }

    fn arb_set() -> impl Strategy<Value = ScenarioSet> {
        let id = prop::sample::select(vec!["a", "b", "c", "d"]);
        prop::collection::vec((id.clone(), 1i64..8, prop::option::of(id)), 0..24).prop_map(|rows| {
            let mut s = ScenarioSet::new();
            for (k, t, r) in rows {
                match r {
                    Some(r) => s.insert_related(k, r, Timestamp(t)),
                    None => s.insert(k, Timestamp(t)),
                }
            }
            s
        })
    }

    fn pair_set(s: &ScenarioSet) -> BTreeSet<(String, Timestamp)> {
        s.pairs().map(|(k, t)| (k.to_owned(), t)).collect()
    }

    proptest! {
        #[test]
        fn and_or_pair_semantics(a in arb_set(), b in arb_set()) {
            let and = scenario_and(&[&a, &b]).unwrap();
            let or = scenario_or(&[&a, &b]).unwrap();
            let pa = pair_set(&a);
            let pb = pair_set(&b);
            prop_assert_eq!(pair_set(&and), pa.intersection(&pb).cloned().collect::<BTreeSet<_>>());
            prop_assert_eq!(pair_set(&or), pa.union(&pb).cloned().collect::<BTreeSet<_>>());
            and.check_invariants().unwrap();
            or.check_invariants().unwrap();
        }

        #[test]
        fn not_partitions_candidates(c in arb_set(), mask in prop::collection::vec(any::<bool>(), 64)) {
            let mut i = 0;
            let mut f = c.clone();
            f.retain_pairs(|_, _| { i += 1; mask[i % 64] });
            let n = scenario_not(&c, &f);
            let pn = pair_set(&n);
            let pf = pair_set(&f);
            prop_assert!(pn.is_disjoint(&pf));
            prop_assert_eq!(pn.union(&pf).cloned().collect::<BTreeSet<_>>(), pair_set(&c));
            n.check_invariants().unwrap();
        }

        #[test]
        fn reverse_transposes_triples(x in arb_set()) {
            let r = reverse_relationship(&x);
            let fwd: BTreeSet<_> = x.triples().map(|(k, r, t)| (r.to_owned(), k.to_owned(), t)).collect();
            let rev: BTreeSet<_> = r.triples().map(|(k, r, t)| (k.to_owned(), r.to_owned(), t)).collect();
            prop_assert_eq!(fwd, rev);
            r.check_invariants().unwrap();
        }
    }

    #[test]
    fn reverse_is_involution_when_every_stamp_is_related() {
        let mut x = ScenarioSet::new();
        x.insert_related("a", "p", Timestamp(1));
        x.insert_related("a", "q", Timestamp(2));
        x.insert_related("b", "p", Timestamp(2));
        assert_eq!(reverse_relationship(&reverse_relationship(&x)), x);
    }
}
