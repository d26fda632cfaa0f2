use std::collections::{BTreeMap, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NodeId, Taxonomy};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub product: String,
    #[serde(default)]
    pub attributes: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CatalogFile {
    pub entries: Vec<CatalogEntry>,
}

/// Catalog entries resolved against a taxonomy.
#[derive(Debug, Clone, Default)]
pub struct Catalog {
    entries: Vec<CatalogEntry>,
    by_node: HashMap<NodeId, Vec<usize>>,
}

impl Catalog {
    pub fn new(entries: Vec<CatalogEntry>, taxonomy: &Taxonomy) -> Result<Self> {
        let mut by_node: HashMap<NodeId, Vec<usize>> = HashMap::new();
        for (i, e) in entries.iter().enumerate() {
            let id = taxonomy
                .node(&e.product)
                .ok_or_else(|| Error::Catalog(format!("product {:?} is not in the taxonomy", e.product)))?;
            by_node.entry(id).or_default().push(i);
        }
        Ok(Catalog { entries, by_node })
    }

    pub fn from_json(text: &str, taxonomy: &Taxonomy) -> Result<Self> {
        let file: CatalogFile = serde_json::from_str(text)?;
        Self::new(file.entries, taxonomy)
    }

    pub fn load(path: impl AsRef<Path>, taxonomy: &Taxonomy) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text, taxonomy)
    }

    pub fn entries(&self) -> &[CatalogEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries_for(&self, node: NodeId) -> impl Iterator<Item = &CatalogEntry> {
        self.by_node
            .get(&node)
            .into_iter()
            .flatten()
            .map(|&i| &self.entries[i])
    }
}

#[cfg(test)]
mod tests {
    use super::super::tests::oils;
    use super::*;

    #[test]
    fn resolves_products() {
        let t = oils();
        let c = Catalog::from_json(
            r#"{"entries": [{"product": "Coconut Oil", "attributes": {"brand": "Parachute"}}]}"#,
            &t,
        )
        .unwrap();
        let id = t.node("coconut oil").unwrap();
        assert_eq!(c.entries_for(id).count(), 1);
        assert_eq!(c.entries_for(0).count(), 0);
        let bad = r#"{"entries": [{"product": "ghee"}]}"#;
        assert!(matches!(Catalog::from_json(bad, &t), Err(Error::Catalog(_))));
    }
}
