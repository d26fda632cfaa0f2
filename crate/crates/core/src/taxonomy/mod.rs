//! Product taxonomy and catalog, and matching of one invoice line item
//! against one or many purchase-order items.
//!
//! The taxonomy is an is-a DAG. An invoice item whose product generalizes
//! the products of several PO items is compared against their merge, and
//! the comparison score is a taxonomy-aware Jaccard similarity over tokens
//! (see [`TaxonomyMatcher::jsim`]).

mod catalog;
mod matcher;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use catalog::{Catalog, CatalogEntry, CatalogFile};
pub use matcher::{token_similarity, JsimReport, LineItem, MatchOutcome, TaxonomyMatcher, DEFAULT_THRESHOLD};

use crate::{Error, Result};

/// Index of a node in its [`Taxonomy`].
pub type NodeId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub name: String,
    #[serde(default)]
    pub parents: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaxonomyFile {
    pub nodes: Vec<NodeSpec>,
}

#[derive(Debug, Clone)]
pub struct Taxonomy {
    names: Vec<String>,
    lookup: HashMap<String, NodeId>,
    parents: Vec<Vec<NodeId>>,
    /// Reflexive-transitive ancestors of each node.
    ancestors: Vec<BTreeSet<NodeId>>,
}

fn key(name: &str) -> String {
    name.split_whitespace().collect::<Vec<_>>().join(" ").to_lowercase()
}

impl Taxonomy {
    pub fn from_nodes(nodes: Vec<NodeSpec>) -> Result<Self> {
        let mut names = Vec::with_capacity(nodes.len());
        let mut lookup = HashMap::new();
        for node in &nodes {
            let k = key(&node.name);
            if k.is_empty() {
                return Err(Error::Taxonomy("empty node name".into()));
            }
            if lookup.insert(k, names.len()).is_some() {
                return Err(Error::Taxonomy(format!("duplicate node {:?}", node.name)));
            }
            names.push(node.name.trim().to_string());
        }
        let mut parents = Vec::with_capacity(nodes.len());
        for node in &nodes {
            let mut ps = Vec::new();
            for p in &node.parents {
                let id = *lookup.get(&key(p)).ok_or_else(|| {
                    Error::Taxonomy(format!("{:?} has unknown parent {p:?}", node.name))
                })?;
                if !ps.contains(&id) {
                    ps.push(id);
                }
            }
            parents.push(ps);
        }
        let ancestors = closure(&names, &parents)?;
        Ok(Taxonomy {
            names,
            lookup,
            parents,
            ancestors,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: TaxonomyFile = serde_json::from_str(text)?;
        Self::from_nodes(file.nodes)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text)
    }

    pub fn to_file(&self) -> TaxonomyFile {
        TaxonomyFile {
            nodes: (0..self.len())
                .map(|id| NodeSpec {
                    name: self.names[id].clone(),
                    parents: self.parents[id].iter().map(|&p| self.names[p].clone()).collect(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Case-insensitive lookup.
    pub fn node(&self, name: &str) -> Option<NodeId> {
        self.lookup.get(&key(name)).copied()
    }

    fn require(&self, name: &str) -> Result<NodeId> {
        self.node(name).ok_or_else(|| Error::UnknownNode(name.to_string()))
    }

    pub fn name(&self, id: NodeId) -> &str {
        &self.names[id]
    }

    pub fn parents(&self, id: NodeId) -> &[NodeId] {
        &self.parents[id]
    }

    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).filter(|&id| self.parents[id].is_empty())
    }

    /// True iff `general` is reachable from `specific` along parent edges,
    /// or is `specific` itself.
    pub fn generalizes(&self, general: NodeId, specific: NodeId) -> bool {
        self.ancestors[specific].contains(&general)
    }

    pub fn is_generalization(&self, general: &str, specific: &str) -> Result<bool> {
        Ok(self.generalizes(self.require(general)?, self.require(specific)?))
    }

    /// Either node generalizes the other.
    pub fn related(&self, a: NodeId, b: NodeId) -> bool {
        self.generalizes(a, b) || self.generalizes(b, a)
    }
}

/// Topological order by Kahn's algorithm, then ancestor sets in that order.
fn closure(names: &[String], parents: &[Vec<NodeId>]) -> Result<Vec<BTreeSet<NodeId>>> {
    let n = names.len();
    let mut children = vec![Vec::new(); n];
    let mut pending: Vec<usize> = parents.iter().map(Vec::len).collect();
    for (c, ps) in parents.iter().enumerate() {
        for &p in ps {
            children[p].push(c);
        }
    }
    let mut order: Vec<NodeId> = (0..n).filter(|&i| pending[i] == 0).collect();
    let mut head = 0;
    while head < order.len() {
        let id = order[head];
        head += 1;
        for &c in &children[id] {
            pending[c] -= 1;
            if pending[c] == 0 {
                order.push(c);
            }
        }
    }
    if order.len() != n {
        let stuck = (0..n).find(|&i| pending[i] > 0).expect("some node is on a cycle");
        return Err(Error::Taxonomy(format!("cycle through {:?}", names[stuck])));
    }
    let mut ancestors = vec![BTreeSet::new(); n];
    for &id in &order {
        let mut set = BTreeSet::from([id]);
        for &p in &parents[id] {
            set.extend(ancestors[p].iter().copied());
        }
        ancestors[id] = set;
    }
    Ok(ancestors)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn oils() -> Taxonomy {
        Taxonomy::from_json(
            r#"{"nodes": [
                {"name": "oil"},
                {"name": "edible oil", "parents": ["oil"]},
                {"name": "fuel oil", "parents": ["oil"]},
                {"name": "coconut oil", "parents": ["edible oil"]},
                {"name": "sunflower oil", "parents": ["edible oil"]},
                {"name": "mustard oil", "parents": ["edible oil"]},
                {"name": "diesel oil", "parents": ["fuel oil"]}
            ]}"#,
        )
        .unwrap()
    }

    #[test]
    fn generalization() {
        let t = oils();
        assert!(t.is_generalization("edible oil", "coconut oil").unwrap());
        assert!(t.is_generalization("Oil", "coconut oil").unwrap());
        assert!(t.is_generalization("coconut oil", "coconut oil").unwrap());
        assert!(!t.is_generalization("coconut oil", "edible oil").unwrap());
        assert!(!t.is_generalization("edible oil", "diesel oil").unwrap());
        assert!(matches!(t.is_generalization("ghee", "oil"), Err(Error::UnknownNode(_))));
        assert_eq!(t.roots().collect::<Vec<_>>(), [0]);
    }

    #[test]
    fn rejects_bad_graphs() {
        let cycle = r#"{"nodes": [{"name": "a", "parents": ["b"]}, {"name": "b", "parents": ["a"]}]}"#;
        assert!(matches!(Taxonomy::from_json(cycle), Err(Error::Taxonomy(_))));
        let selfloop = r#"{"nodes": [{"name": "a", "parents": ["a"]}]}"#;
        assert!(Taxonomy::from_json(selfloop).is_err());
        let dup = r#"{"nodes": [{"name": "Oil"}, {"name": "oil"}]}"#;
        assert!(Taxonomy::from_json(dup).is_err());
        let unknown = r#"{"nodes": [{"name": "a", "parents": ["z"]}]}"#;
        assert!(Taxonomy::from_json(unknown).is_err());
        assert!(Taxonomy::from_json("{").is_err());
    }

    #[test]
    fn diamond_is_fine() {
        let t = Taxonomy::from_json(
            r#"{"nodes": [{"name": "a"}, {"name": "b", "parents": ["a"]},
                {"name": "c", "parents": ["a"]}, {"name": "d", "parents": ["b", "c"]}]}"#,
        )
        .unwrap();
        assert!(t.is_generalization("a", "d").unwrap());
        assert!(!t.is_generalization("b", "c").unwrap());
    }

    #[test]
    fn file_roundtrip() {
        let t = oils();
        let back = Taxonomy::from_nodes(t.to_file().nodes).unwrap();
        assert_eq!(back.to_file(), t.to_file());
    }
}
