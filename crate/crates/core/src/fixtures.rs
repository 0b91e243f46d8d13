//! The bundled Ethnic Cooking collection and geographical scale, plus a
//! loader that assembles records, scales and a view into a built workspace.

use crate::classify::{ScaleRegistry, View};
use crate::error::Result;
use crate::ingest::{parse_records, Dataset, HostTable};
use crate::scales::{parse_tbl, HierarchyLevel, Scale};

pub const ETHNIC_COOKING: &str = include_str!("../fixtures/ethnic-cooking.tsv");
pub const SCORE_SCALE: &str = include_str!("../fixtures/score.scale");
pub const SIZE_SCALE: &str = include_str!("../fixtures/size.scale");
pub const ETHNIC_VIEW: &str = include_str!("../fixtures/ethnic.view");
pub const GEOGRAPHICAL_TBL: &str = include_str!("../fixtures/geographical.scale.tbl");
pub const HOSTS: &str = include_str!("../fixtures/hosts.tsv");
pub const TOY_CTX: &str = include_str!("../fixtures/toy.ctx");

pub const LOCATION_SCALE: &str = "location";

/// The geographical hierarchy as a `location` scale over the standard levels.
pub fn geographical_scale(tbl: &str) -> Result<Scale> {
    Scale::hierarchical(LOCATION_SCALE, &parse_tbl(tbl)?, &HierarchyLevel::geographical())
}

/// Records, every registered scale, and the active view (built).
#[derive(Clone, Debug)]
pub struct Workspace {
    pub dataset: Dataset,
    pub registry: ScaleRegistry,
    pub view: View,
}

impl Workspace {
    /// `scales` are `wave-scale 1` texts; `location` is a `.tbl` text and a
    /// host table text.
    pub fn load(records: &str, scales: &[&str], location: Option<(&str, &str)>, view: &str) -> Result<Self> {
        let dataset = parse_records(records)?;
        let mut registry = ScaleRegistry::new().with_standard_scales(&dataset.records)?;
        if let Some((tbl, hosts)) = location {
            registry = registry.with_location(geographical_scale(tbl)?, HostTable::parse(hosts)?);
        }
        for text in scales {
            registry.insert(Scale::parse_file(text)?);
        }
        let view = View::parse("view", view)?.rebuild(&registry, &dataset.records)?;
        Ok(Workspace {
            dataset,
            registry,
            view,
        })
    }

    pub fn ethnic_cooking() -> Result<Self> {
        Self::load(
            ETHNIC_COOKING,
            &[SCORE_SCALE, SIZE_SCALE],
            Some((GEOGRAPHICAL_TBL, HOSTS)),
            ETHNIC_VIEW,
        )
    }

    /// Rebuilds the view over a different scale list.
    pub fn with_view<S: Into<String>>(&self, scales: impl IntoIterator<Item = S>) -> Result<Self> {
        let view = View::new("view", scales)?.rebuild(&self.registry, &self.dataset.records)?;
        Ok(Workspace {
            view,
            ..self.clone()
        })
    }
}
