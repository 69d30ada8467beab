//! Module names and constructors.

use std::collections::BTreeMap;

use crate::engine::Module;
use crate::error::{PipelineError, Result};
use crate::modules;

pub type Factory = Box<dyn Fn() -> Box<dyn Module>>;

/// Rendering modules of the original 3D-engine backend and their native
/// replacements.
pub const UNSUPPORTED: [(&str, &str); 10] = [
    ("Render", "use Hillshade for a shaded top-down image"),
    ("RenderSegmentation", "use PlotObstacles with exportmode:True for a label raster"),
    ("Depth", "use Save or ExportCsv for raw heights"),
    ("Ground", "use ExportObj to export the surface mesh"),
    ("Camera", "Hillshade always renders top-down; drop this module"),
    ("ImageTexture", "pass cmap=<name> to Plot or Hillshade"),
    ("ColorMap", "pass cmap=<name> to Plot or Hillshade"),
    ("AddMeshObjects", "use ExportObj per terrain"),
    ("ClearScene", "no scene state exists; drop this module"),
    ("Holdout", "no scene state exists; drop this module"),
];

pub fn replacement_for(name: &str) -> Option<&'static str> {
    UNSUPPORTED.iter().find(|(n, _)| *n == name).map(|(_, r)| *r)
}

pub struct Registry {
    factories: BTreeMap<String, Factory>,
}

fn edit_distance(a: &str, b: &str) -> usize {
    let a: Vec<char> = a.to_lowercase().chars().collect();
    let b: Vec<char> = b.to_lowercase().chars().collect();
    let mut row: Vec<usize> = (0..=b.len()).collect();
    for i in 1..=a.len() {
        let mut prev = row[0];
        row[0] = i;
        for j in 1..=b.len() {
            let cur = row[j];
            row[j] = (row[j] + 1).min(row[j - 1] + 1).min(prev + usize::from(a[i - 1] != b[j - 1]));
            prev = cur;
        }
    }
    row[b.len()]
}

impl Registry {
    pub fn empty() -> Self {
        Registry {
            factories: BTreeMap::new(),
        }
    }

    pub fn standard() -> Self {
        let mut r = Registry::empty();
        modules::register_all(&mut r);
        r
    }

    pub fn register(&mut self, name: &str, factory: impl Fn() -> Box<dyn Module> + 'static) {
        self.factories.insert(name.to_string(), Box::new(factory));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.factories
            .keys()
            .map(String::as_str)
            .chain(["Loop", "EndLoop"])
    }

    pub fn contains(&self, name: &str) -> bool {
        name == "Loop" || name == "EndLoop" || self.factories.contains_key(name)
    }

    /// Fails for unknown and unsupported names.
    pub fn check(&self, name: &str) -> Result<()> {
        if self.contains(name) {
            return Ok(());
        }
        if let Some(r) = replacement_for(name) {
            return Err(PipelineError::Unsupported {
                name: name.to_string(),
                replacement: r.to_string(),
            });
        }
        let best = self
            .names()
            .map(|n| (edit_distance(n, name), n))
            .min()
            .filter(|(d, _)| *d <= 2);
        Err(PipelineError::UnknownModule {
            name: name.to_string(),
            hint: best.map(|(_, n)| format!(" (did you mean `{n}`?)")).unwrap_or_default(),
        })
    }

    pub fn create(&self, name: &str) -> Result<Box<dyn Module>> {
        self.check(name)?;
        let f = self.factories.get(name).ok_or_else(|| PipelineError::UnknownModule {
            name: name.to_string(),
            hint: String::new(),
        })?;
        Ok(f())
    }
}
