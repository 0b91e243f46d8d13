//! Analysis of documents into facet values, referential views over a
//! chosen list of scales, and classification of a document as the meet of
//! its attribute concepts.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::composition::apposition;
use crate::context::FormalContext;
use crate::error::{Error, Result};
use crate::ingest::{parse_url, DocumentRecord, HostTable};
use crate::lattice::ConceptLattice;
use crate::scales::{Hierarchy, RawValue, Scale};

pub const DEFAULT_PATH_DEPTH: usize = 3;

/// Age thresholds in seconds: one year, one month, one week, one day.
pub const AGE_THRESHOLDS: [f64; 4] = [31_536_000.0, 2_592_000.0, 604_800.0, 86_400.0];

pub const URL_SCHEMES: [&str; 8] = ["http", "ftp", "gopher", "mailto", "news", "telnet", "file", "wais"];

const VIEW_MAGIC: &str = "wave-view 1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetValue {
    pub facet: String,
    pub value: RawValue,
}

impl FacetValue {
    fn new(facet: &str, value: RawValue) -> Self {
        Self {
            facet: facet.to_owned(),
            value,
        }
    }
}

/// Breaks a record into atomic facet values: `scheme`, `host`, `path`,
/// `score`, `size`, `modified` and one `keywords` value per keyword.
/// Absent fields produce nothing.
pub fn analyze(doc: &DocumentRecord) -> Vec<FacetValue> {
    let mut out = Vec::new();
    if let Some(url) = doc.url.as_deref().and_then(|u| parse_url(u).ok()) {
        out.push(FacetValue::new("scheme", RawValue::Text(url.scheme.clone())));
        if !url.host.is_empty() {
            out.push(FacetValue::new("host", RawValue::Text(url.host.clone())));
        }
        if !url.path_segments.is_empty() {
            out.push(FacetValue::new(
                "path",
                RawValue::Text(format!("/{}", url.path_segments.join("/"))),
            ));
        }
    }
    if let Some(x) = doc.score {
        out.push(FacetValue::new("score", RawValue::Number(x)));
    }
    if let Some(x) = doc.size {
        out.push(FacetValue::new("size", RawValue::Number(x)));
    }
    if let Some(t) = doc.modified {
        out.push(FacetValue::new("modified", RawValue::Number(t as f64)));
    }
    for k in &doc.keywords {
        out.push(FacetValue::new("keywords", RawValue::Text(k.clone())));
    }
    out
}

/// Where a registered scale takes its raw values from.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum FacetSource {
    /// The facet of the given name.
    Facet { facet: String },
    /// The `host` facet mapped to a city token.
    HostCity { hosts: HostTable },
    /// The `path` facet expanded to `path{d}:/prefix` tokens, deepest kept.
    PathPrefix { depth: usize },
    /// Seconds between `modified` and a reference time.
    Age { reference: i64 },
}

impl FacetSource {
    fn values(&self, facets: &[FacetValue]) -> Option<Vec<RawValue>> {
        let of = |name: &str| -> Vec<&RawValue> {
            facets.iter().filter(|f| f.facet == name).map(|f| &f.value).collect()
        };
        let vals: Vec<RawValue> = match self {
            FacetSource::Facet { facet } => of(facet).into_iter().cloned().collect(),
            FacetSource::HostCity { hosts } => {
                let hs = of("host");
                if hs.is_empty() {
                    return None;
                }
                hs.into_iter()
                    .map(|h| match h {
                        RawValue::Text(h) => hosts
                            .host_to_city(h)
                            .map_or(RawValue::Missing, |c| RawValue::Text(c.to_owned())),
                        _ => RawValue::Missing,
                    })
                    .collect()
            }
            FacetSource::PathPrefix { depth } => of("path")
                .into_iter()
                .map(|p| match p {
                    RawValue::Text(p) => path_token(p, *depth).map_or(RawValue::Missing, RawValue::Text),
                    _ => RawValue::Missing,
                })
                .collect(),
            FacetSource::Age { reference } => of("modified")
                .into_iter()
                .map(|t| match t {
                    RawValue::Number(t) => RawValue::Number((*reference as f64 - t).max(0.0)),
                    _ => RawValue::Missing,
                })
                .collect(),
        };
        (!vals.is_empty()).then_some(vals)
    }
}

fn path_segments(path: &str) -> Vec<&str> {
    path.split('/').filter(|s| !s.is_empty()).collect()
}

/// The deepest prefix token of `path` within `depth` segments.
fn path_token(path: &str, depth: usize) -> Option<String> {
    let segs = path_segments(path);
    let d = segs.len().min(depth);
    (d > 0).then(|| format!("path{d}:/{}", segs[..d].join("/")))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RegisteredScale {
    pub scale: Scale,
    #[serde(flatten)]
    pub source: FacetSource,
}

/// The scales available to views, keyed by name.
#[derive(Clone, Debug, Default)]
pub struct ScaleRegistry {
    scales: BTreeMap<String, RegisteredScale>,
}

impl ScaleRegistry {
    pub fn new() -> Self {
        Self::default()
    }

    /// Registers a scale reading the facet of the same name.
    pub fn insert(&mut self, scale: Scale) {
        let facet = scale.name.clone();
        self.insert_with_source(scale, FacetSource::Facet { facet });
    }

    pub fn insert_with_source(&mut self, scale: Scale, source: FacetSource) {
        self.scales.insert(scale.name.clone(), RegisteredScale { scale, source });
    }

    pub fn get(&self, name: &str) -> Result<&RegisteredScale> {
        self.scales.get(name).ok_or_else(|| Error::UnknownScale(name.to_owned()))
    }

    pub fn contains(&self, name: &str) -> bool {
        self.scales.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = &RegisteredScale> {
        self.scales.values()
    }

    /// Data-driven scales: URL scheme, host, path prefixes, keyword
    /// vocabulary and document age.
    pub fn with_standard_scales(mut self, docs: &[DocumentRecord]) -> Result<Self> {
        let facets: Vec<Vec<FacetValue>> = docs.iter().map(analyze).collect();
        let observed = |name: &str| -> BTreeSet<String> {
            facets
                .iter()
                .flatten()
                .filter(|f| f.facet == name)
                .filter_map(|f| match &f.value {
                    RawValue::Text(s) => Some(s.clone()),
                    _ => None,
                })
                .collect()
        };

        let mut schemes: Vec<String> = URL_SCHEMES.iter().map(|s| s.to_string()).collect();
        schemes.extend(observed("scheme").into_iter().filter(|s| !URL_SCHEMES.contains(&s.as_str())));
        self.insert(Scale::nominal("scheme", schemes)?);
        self.insert(Scale::nominal("host", observed("host"))?);
        self.insert(Scale::nominal("keywords", observed("keywords"))?);
        self.insert_with_source(
            path_scale("path", &observed("path"), DEFAULT_PATH_DEPTH)?,
            FacetSource::PathPrefix {
                depth: DEFAULT_PATH_DEPTH,
            },
        );
        if let Some(reference) = docs.iter().filter_map(|d| d.modified).max() {
            self.insert_with_source(Scale::ordinal("age", &AGE_THRESHOLDS)?, FacetSource::Age { reference });
        }
        Ok(self)
    }

    /// Registers a hierarchical location scale fed by host-to-city lookup.
    pub fn with_location(mut self, geography: Scale, hosts: HostTable) -> Self {
        self.insert_with_source(geography, FacetSource::HostCity { hosts });
        self
    }

    /// Scale attributes of `doc` for the named scale, or `None` when the
    /// document has no value for the scale's facet.
    pub fn scale_document(&self, name: &str, doc: &DocumentRecord) -> Result<Option<Vec<String>>> {
        let reg = self.get(name)?;
        let Some(values) = reg.source.values(&analyze(doc)) else {
            return Ok(None);
        };
        let mut attrs = BTreeSet::new();
        for v in &values {
            for i in reg.scale.assign(v)?.iter() {
                attrs.insert(i);
            }
        }
        Ok(Some(attrs.into_iter().map(|i| reg.scale.attributes[i].clone()).collect()))
    }

    /// Instantiates one scale over a document set.
    pub fn apply(&self, name: &str, docs: &[DocumentRecord]) -> Result<FormalContext> {
        let reg = self.get(name)?;
        let values: Vec<(String, Vec<RawValue>)> = docs
            .iter()
            .map(|d| (d.id.clone(), reg.source.values(&analyze(d)).unwrap_or_default()))
            .collect();
        reg.scale.apply_multi(&values)
    }
}

/// A hierarchical scale over URL path prefixes `path1:/a`, `path2:/a/b`, ...
pub fn path_scale(name: &str, paths: &BTreeSet<String>, depth: usize) -> Result<Scale> {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    for p in paths {
        let segs = path_segments(p);
        for d in 1..=segs.len().min(depth) {
            let token = format!("path{d}:/{}", segs[..d].join("/"));
            if d == 1 {
                nodes.push(token);
            } else {
                edges.push((token, format!("path{}:/{}", d - 1, segs[..d - 1].join("/"))));
            }
        }
    }
    Scale::from_hierarchy(name, Hierarchy::with_nodes(&nodes, &edges, &[])?)
}

/// The apposed context and lattice of a view over a document set.
#[derive(Clone, Debug)]
pub struct BuiltView {
    pub lattice: Arc<ConceptLattice>,
    /// Attribute index ranges per scale, in view order.
    pub blocks: Vec<(String, std::ops::Range<usize>)>,
}

impl BuiltView {
    pub fn context(&self) -> &FormalContext {
        self.lattice.context()
    }

    pub fn fingerprint(&self) -> u64 {
        self.context().fingerprint()
    }
}

/// A referential view: an ordered list of scale names.
#[derive(Clone, Debug)]
pub struct View {
    pub name: String,
    pub scales: Vec<String>,
    built: Option<BuiltView>,
}

impl View {
    pub fn new<S: Into<String>>(name: &str, scales: impl IntoIterator<Item = S>) -> Result<Self> {
        let scales: Vec<String> = scales.into_iter().map(Into::into).collect();
        let mut seen = BTreeSet::new();
        if let Some(dup) = scales.iter().find(|s| !seen.insert(s.as_str())) {
            return Err(Error::BadScaleSpec(format!("scale `{dup}` listed twice in view")));
        }
        Ok(Self {
            name: name.to_owned(),
            scales,
            built: None,
        })
    }

    /// Parses a `wave-view 1` file: one scale name per line.
    pub fn parse(name: &str, text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(str::trim)
            .enumerate()
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        match lines.next() {
            Some((_, l)) if l == VIEW_MAGIC => {}
            other => {
                return Err(Error::Parse {
                    line: other.map_or(1, |(n, _)| n + 1),
                    message: format!("expected `{VIEW_MAGIC}`"),
                })
            }
        }
        View::new(name, lines.map(|(_, l)| l.to_owned()))
    }

    pub fn to_file_string(&self) -> String {
        let mut out = format!("{VIEW_MAGIC}\n");
        for s in &self.scales {
            out.push_str(s);
            out.push('\n');
        }
        out
    }

    pub fn built(&self) -> Result<&BuiltView> {
        self.built.as_ref().ok_or(Error::ViewNotBuilt)
    }

    pub fn is_built(&self) -> bool {
        self.built.is_some()
    }

    /// Applies every scale to `docs`, apposes the results and builds the
    /// lattice. Any earlier build is discarded.
    pub fn rebuild(&self, registry: &ScaleRegistry, docs: &[DocumentRecord]) -> Result<View> {
        let contexts = self
            .scales
            .iter()
            .map(|s| registry.apply(s, docs))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&FormalContext> = contexts.iter().collect();
        let ctx = if refs.is_empty() {
            FormalContext::from_rows(
                docs.iter().map(|d| d.id.clone()).collect(),
                vec![],
                vec![crate::BitSet::empty(0); docs.len()],
            )?
        } else {
            apposition(&refs)?
        };
        let mut blocks = Vec::new();
        let mut offset = 0;
        for (name, c) in self.scales.iter().zip(&contexts) {
            blocks.push((name.clone(), offset..offset + c.num_attributes()));
            offset += c.num_attributes();
        }
        log::debug!(
            "view `{}`: {} objects, {} attributes",
            self.name,
            ctx.num_objects(),
            ctx.num_attributes()
        );
        Ok(View {
            name: self.name.clone(),
            scales: self.scales.clone(),
            built: Some(BuiltView {
                lattice: Arc::new(ConceptLattice::build(&ctx)),
                blocks,
            }),
        })
    }

    /// The view's scale attributes carried by `doc`; `None` when the document
    /// has no value for any of the view's facets.
    pub fn document_attributes(&self, registry: &ScaleRegistry, doc: &DocumentRecord) -> Result<Option<Vec<String>>> {
        let mut any = false;
        let mut attrs = Vec::new();
        for s in &self.scales {
            if let Some(a) = registry.scale_document(s, doc)? {
                any = true;
                attrs.extend(a);
            }
        }
        Ok(any.then_some(attrs))
    }

    /// The conceptual class of `doc`: the meet of the attribute concepts of
    /// its scaled facet values.
    pub fn classify_document(&self, registry: &ScaleRegistry, doc: &DocumentRecord) -> Result<usize> {
        let built = self.built()?;
        let attrs = self
            .document_attributes(registry, doc)?
            .ok_or_else(|| Error::Unclassifiable(doc.id.clone()))?;
        let lat = &built.lattice;
        let concepts = attrs
            .iter()
            .map(|m| lat.attribute_concept(m))
            .collect::<Result<Vec<_>>>()?;
        lat.meet(&concepts)
    }
}
