//! Formal contexts and the two derivation operators.

use std::collections::hash_map::DefaultHasher;
use std::collections::HashMap;
use std::hash::{Hash, Hasher};

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::bitset::BitSet;
use crate::error::{Error, Result};

const CTX_MAGIC: &str = "wave-ctx 1";

/// A formal context: objects, attributes and the incidence between them.
///
/// Incidence is stored twice, as object rows over the attributes and as
/// attribute columns over the objects, so both derivations are word-wise
/// intersections.
#[derive(Clone, PartialEq, Eq)]
pub struct FormalContext {
    objects: Vec<String>,
    attributes: Vec<String>,
    rows: Vec<BitSet>,
    cols: Vec<BitSet>,
    object_index: HashMap<String, usize>,
    attribute_index: HashMap<String, usize>,
}

fn index_of(ids: &[String], dup: fn(String) -> Error) -> Result<HashMap<String, usize>> {
    let mut index = HashMap::with_capacity(ids.len());
    for (i, id) in ids.iter().enumerate() {
        if index.insert(id.clone(), i).is_some() {
            return Err(dup(id.clone()));
        }
    }
    Ok(index)
}

impl FormalContext {
    /// Builds a context from one attribute bit row per object.
    pub fn from_rows(objects: Vec<String>, attributes: Vec<String>, rows: Vec<BitSet>) -> Result<Self> {
        let object_index = index_of(&objects, Error::DuplicateObject)?;
        let attribute_index = index_of(&attributes, Error::DuplicateAttribute)?;
        if rows.len() != objects.len() {
            return Err(Error::DimensionMismatch {
                expected: objects.len(),
                got: rows.len(),
            });
        }
        if let Some(bad) = rows.iter().find(|r| r.capacity() != attributes.len()) {
            return Err(Error::DimensionMismatch {
                expected: attributes.len(),
                got: bad.capacity(),
            });
        }
        let mut cols = vec![BitSet::empty(objects.len()); attributes.len()];
        for (g, row) in rows.iter().enumerate() {
            for m in row.iter() {
                cols[m].insert(g);
            }
        }
        Ok(Self {
            objects,
            attributes,
            rows,
            cols,
            object_index,
            attribute_index,
        })
    }

    pub fn from_matrix(objects: Vec<String>, attributes: Vec<String>, incidence: &[Vec<bool>]) -> Result<Self> {
        let width = attributes.len();
        let rows = incidence
            .iter()
            .map(|r| {
                if r.len() != width {
                    return Err(Error::DimensionMismatch {
                        expected: width,
                        got: r.len(),
                    });
                }
                Ok(BitSet::from_indices(
                    width,
                    r.iter().enumerate().filter(|(_, &x)| x).map(|(i, _)| i),
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(objects, attributes, rows)
    }

    /// Builds a context from `(object, attribute)` pairs. Ids are ordered by
    /// first appearance.
    pub fn from_pairs<I, S, T>(pairs: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        let mut objects: Vec<String> = Vec::new();
        let mut attributes: Vec<String> = Vec::new();
        let mut oi: HashMap<String, usize> = HashMap::new();
        let mut ai: HashMap<String, usize> = HashMap::new();
        let mut incidences = Vec::new();
        for (g, m) in pairs {
            let (g, m) = (g.into(), m.into());
            let gi = *oi.entry(g.clone()).or_insert_with(|| {
                objects.push(g);
                objects.len() - 1
            });
            let mi = *ai.entry(m.clone()).or_insert_with(|| {
                attributes.push(m);
                attributes.len() - 1
            });
            incidences.push((gi, mi));
        }
        let mut rows = vec![BitSet::empty(attributes.len()); objects.len()];
        for (g, m) in incidences {
            rows[g].insert(m);
        }
        Self::from_rows(objects, attributes, rows)
    }

    pub fn objects(&self) -> &[String] {
        &self.objects
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn num_objects(&self) -> usize {
        self.objects.len()
    }

    pub fn num_attributes(&self) -> usize {
        self.attributes.len()
    }

    pub fn object_id(&self, g: &str) -> Result<usize> {
        self.object_index
            .get(g)
            .copied()
            .ok_or_else(|| Error::UnknownObject(g.to_owned()))
    }

    pub fn attribute_id(&self, m: &str) -> Result<usize> {
        self.attribute_index
            .get(m)
            .copied()
            .ok_or_else(|| Error::UnknownAttribute(m.to_owned()))
    }

    pub fn has_object(&self, g: &str) -> bool {
        self.object_index.contains_key(g)
    }

    pub fn has_attribute(&self, m: &str) -> bool {
        self.attribute_index.contains_key(m)
    }

    pub fn incident(&self, g: usize, m: usize) -> bool {
        self.rows[g].contains(m)
    }

    /// Attributes of object `g`.
    pub fn row(&self, g: usize) -> &BitSet {
        &self.rows[g]
    }

    /// Objects having attribute `m`.
    pub fn column(&self, m: usize) -> &BitSet {
        &self.cols[m]
    }

    pub fn all_objects(&self) -> BitSet {
        BitSet::full(self.objects.len())
    }

    pub fn all_attributes(&self) -> BitSet {
        BitSet::full(self.attributes.len())
    }

    /// Attributes shared by every object in `objs`.
    pub fn intent_of(&self, objs: &BitSet) -> BitSet {
        let mut out = self.all_attributes();
        for g in objs.iter() {
            out.intersect_with(&self.rows[g]);
        }
        out
    }

    /// Objects having every attribute in `attrs`.
    pub fn extent_of(&self, attrs: &BitSet) -> BitSet {
        let mut out = self.all_objects();
        for m in attrs.iter() {
            out.intersect_with(&self.cols[m]);
        }
        out
    }

    /// Attribute closure `attrs''`.
    pub fn closure_of(&self, attrs: &BitSet) -> BitSet {
        self.intent_of(&self.extent_of(attrs))
    }

    /// Object closure `objs''`.
    pub fn object_closure_of(&self, objs: &BitSet) -> BitSet {
        self.extent_of(&self.intent_of(objs))
    }

    pub fn object_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<BitSet> {
        let mut set = BitSet::empty(self.objects.len());
        for id in ids {
            set.insert(self.object_id(id.as_ref())?);
        }
        Ok(set)
    }

    pub fn attribute_set<S: AsRef<str>>(&self, ids: &[S]) -> Result<BitSet> {
        let mut set = BitSet::empty(self.attributes.len());
        for id in ids {
            set.insert(self.attribute_id(id.as_ref())?);
        }
        Ok(set)
    }

    pub fn object_names(&self, set: &BitSet) -> Vec<String> {
        set.iter().map(|g| self.objects[g].clone()).collect()
    }

    pub fn attribute_names(&self, set: &BitSet) -> Vec<String> {
        set.iter().map(|m| self.attributes[m].clone()).collect()
    }

    /// Name-level intent derivation. Result follows attribute order.
    pub fn derive_intent<S: AsRef<str>>(&self, objs: &[S]) -> Result<Vec<String>> {
        Ok(self.attribute_names(&self.intent_of(&self.object_set(objs)?)))
    }

    /// Name-level extent derivation. Result follows object order.
    pub fn derive_extent<S: AsRef<str>>(&self, attrs: &[S]) -> Result<Vec<String>> {
        Ok(self.object_names(&self.extent_of(&self.attribute_set(attrs)?)))
    }

    pub fn closure<S: AsRef<str>>(&self, attrs: &[S]) -> Result<Vec<String>> {
        Ok(self.attribute_names(&self.closure_of(&self.attribute_set(attrs)?)))
    }

    /// Stable content hash, used to tell views apart.
    pub fn fingerprint(&self) -> u64 {
        let mut h = DefaultHasher::new();
        self.objects.hash(&mut h);
        self.attributes.hash(&mut h);
        self.rows.hash(&mut h);
        h.finish()
    }

    /// Parses either the `wave-ctx 1` cross-table format or tab-separated
    /// `object<TAB>attribute` pair lines.
    pub fn parse(text: &str) -> Result<Self> {
        let first = text.lines().find(|l| !l.trim().is_empty());
        if first.map(str::trim) == Some(CTX_MAGIC) {
            parse_cross_table(text)
        } else {
            parse_pairs(text)
        }
    }

    /// Serializes to the `wave-ctx 1` cross-table format.
    pub fn to_ctx_string(&self) -> String {
        let mut out = format!("{CTX_MAGIC}\n{} {}\n", self.objects.len(), self.attributes.len());
        for g in &self.objects {
            out.push_str(g);
            out.push('\n');
        }
        for m in &self.attributes {
            out.push_str(m);
            out.push('\n');
        }
        for row in &self.rows {
            out.extend((0..self.attributes.len()).map(|m| if row.contains(m) { 'X' } else { '.' }));
            out.push('\n');
        }
        out
    }

    /// Cross-table rows as `X`/`.` strings.
    pub fn incidence_strings(&self) -> Vec<String> {
        self.rows
            .iter()
            .map(|row| {
                (0..self.attributes.len())
                    .map(|m| if row.contains(m) { 'X' } else { '.' })
                    .collect()
            })
            .collect()
    }
}

impl std::fmt::Debug for FormalContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FormalContext")
            .field("objects", &self.objects)
            .field("attributes", &self.attributes)
            .field("incidence", &self.incidence_strings())
            .finish()
    }
}

fn parse_cross_table(text: &str) -> Result<FormalContext> {
    let mut lines = text
        .lines()
        .map(|l| l.trim_end_matches('\r'))
        .enumerate()
        .skip_while(|(_, l)| l.trim().is_empty())
        .skip(1);
    let mut next = |what: &str| {
        lines.next().ok_or_else(|| Error::Parse {
            line: 0,
            message: format!("unexpected end of file, expected {what}"),
        })
    };
    let (n, dims) = next("dimensions")?;
    let bad_dims = || Error::Parse {
        line: n + 1,
        message: format!("expected `|G| |M|`, got `{dims}`"),
    };
    let mut parts = dims.split_whitespace().map(str::parse::<usize>);
    let (g, m) = match (parts.next(), parts.next(), parts.next()) {
        (Some(Ok(g)), Some(Ok(m)), None) => (g, m),
        _ => return Err(bad_dims()),
    };
    let objects = (0..g)
        .map(|_| next("object id").map(|(_, l)| l.to_owned()))
        .collect::<Result<Vec<_>>>()?;
    let attributes = (0..m)
        .map(|_| next("attribute id").map(|(_, l)| l.to_owned()))
        .collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::with_capacity(g);
    for _ in 0..g {
        let (n, line) = next("incidence row")?;
        let line = line.trim();
        if line.chars().count() != m {
            return Err(Error::Parse {
                line: n + 1,
                message: format!("row has {} cells, expected {m}", line.chars().count()),
            });
        }
        let mut row = BitSet::empty(m);
        for (i, c) in line.chars().enumerate() {
            match c {
                'X' | 'x' => row.insert(i),
                '.' => {}
                other => {
                    return Err(Error::Parse {
                        line: n + 1,
                        message: format!("unexpected cell `{other}`"),
                    })
                }
            }
        }
        rows.push(row);
    }
    FormalContext::from_rows(objects, attributes, rows)
}

fn parse_pairs(text: &str) -> Result<FormalContext> {
    let mut objects: Vec<String> = Vec::new();
    let mut pairs = Vec::new();
    for (n, line) in text.lines().map(|l| l.trim_end_matches('\r')).enumerate() {
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        match line.split('\t').collect::<Vec<_>>().as_slice() {
            [g, m] => pairs.push((g.to_string(), m.to_string())),
            [g] => objects.push(g.to_string()),
            _ => {
                return Err(Error::Parse {
                    line: n + 1,
                    message: "expected `object<TAB>attribute`".into(),
                })
            }
        }
    }
    // Objects listed without attributes still belong to G.
    let ctx = FormalContext::from_pairs(pairs)?;
    if objects.iter().all(|g| ctx.has_object(g)) {
        return Ok(ctx);
    }
    let mut all = ctx.objects().to_vec();
    let mut rows: Vec<BitSet> = (0..ctx.num_objects()).map(|g| ctx.row(g).clone()).collect();
    for g in objects {
        if !all.contains(&g) {
            all.push(g);
            rows.push(BitSet::empty(ctx.num_attributes()));
        }
    }
    FormalContext::from_rows(all, ctx.attributes().to_vec(), rows)
}

#[derive(Serialize, Deserialize)]
struct ContextJson {
    objects: Vec<String>,
    attributes: Vec<String>,
    incidence: Vec<String>,
}

impl Serialize for FormalContext {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        ContextJson {
            objects: self.objects.clone(),
            attributes: self.attributes.clone(),
            incidence: self.incidence_strings(),
        }
        .serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for FormalContext {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let raw = ContextJson::deserialize(deserializer)?;
        let matrix: Vec<Vec<bool>> = raw
            .incidence
            .iter()
            .map(|r| r.chars().map(|c| c == 'X').collect())
            .collect();
        FormalContext::from_matrix(raw.objects, raw.attributes, &matrix).map_err(serde::de::Error::custom)
    }
}
