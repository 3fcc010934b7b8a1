use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::NearDupError;

/// A connected component of near-duplicate images.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct VisualAssertion {
    pub assertion_id: u64,
    pub image_ids: BTreeSet<String>,
}

struct UnionFind {
    parent: Vec<usize>,
    rank: Vec<u8>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
            rank: vec![0; n],
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return;
        }
        match self.rank[ra].cmp(&self.rank[rb]) {
            std::cmp::Ordering::Less => self.parent[ra] = rb,
            std::cmp::Ordering::Greater => self.parent[rb] = ra,
            std::cmp::Ordering::Equal => {
                self.parent[rb] = ra;
                self.rank[ra] += 1;
            }
        }
    }
}

/// Connected components of the verified-pair graph over `all_ids`.
///
/// Assertions are numbered from 0 in order of their smallest member id, so
/// the numbering depends only on the partition.
pub fn cluster_assertions<S: AsRef<str>>(
    verified_pairs: &[(S, S)],
    all_ids: &[S],
) -> Result<Vec<VisualAssertion>, NearDupError> {
    let ids: BTreeSet<&str> = all_ids.iter().map(AsRef::as_ref).collect();
    let index: HashMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (*s, i)).collect();
    let names: Vec<&str> = ids.iter().copied().collect();
    let mut uf = UnionFind::new(names.len());
    for (a, b) in verified_pairs {
        let lookup = |s: &str| {
            index
                .get(s)
                .copied()
                .ok_or_else(|| NearDupError::UnknownImage(s.to_string()))
        };
        let (ia, ib) = (lookup(a.as_ref())?, lookup(b.as_ref())?);
        uf.union(ia, ib);
    }
    // names are sorted, so the first member seen per root is its smallest id
    let mut groups: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    let mut first_seen: Vec<usize> = Vec::new();
    let mut root_order: HashMap<usize, usize> = HashMap::new();
    for (i, name) in names.iter().enumerate() {
        let root = uf.find(i);
        let slot = *root_order.entry(root).or_insert_with(|| {
            first_seen.push(root);
            first_seen.len() - 1
        });
        groups.entry(slot).or_default().insert((*name).to_string());
    }
    Ok(groups
        .into_iter()
        .map(|(slot, image_ids)| VisualAssertion {
            assertion_id: slot as u64,
            image_ids,
        })
        .collect())
}

pub fn write_assertions(path: &Path, assertions: &[VisualAssertion]) -> Result<(), NearDupError> {
    let mut out = Vec::new();
    for a in assertions {
        serde_json::to_writer(&mut out, a).expect("assertion serializes");
        out.push(b'\n');
    }
    let mut f = fs::File::create(path).map_err(|e| NearDupError::io(path, e))?;
    f.write_all(&out).map_err(|e| NearDupError::io(path, e))
}

pub fn read_assertions(path: &Path) -> Result<Vec<VisualAssertion>, NearDupError> {
    let f = fs::File::open(path).map_err(|e| NearDupError::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| NearDupError::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let a: VisualAssertion = serde_json::from_str(&line).map_err(|e| NearDupError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            msg: e.to_string(),
        })?;
        out.push(a);
    }
    Ok(out)
}
