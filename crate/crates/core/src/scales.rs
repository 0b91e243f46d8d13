//! Conceptual scales: rules that turn one raw facet value into a set of
//! binary scale attributes.
//!
//! Four kinds are supported. Nominal scales partition values, ordinal scales
//! rank them against descending thresholds, interordinal scales place them
//! between ascending cut points, and hierarchical scales map a node of a
//! level-structured hierarchy to itself plus all of its ancestors.

use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bitset::BitSet;
use crate::context::FormalContext;
use crate::error::{Error, Result};

const SCALE_MAGIC: &str = "wave-scale 1";

/// A raw facet value before scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RawValue {
    Number(f64),
    Text(String),
    Missing,
}

impl fmt::Display for RawValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RawValue::Number(x) => f.write_str(&format_number(*x)),
            RawValue::Text(s) => write!(f, "{s:?}"),
            RawValue::Missing => f.write_str("<missing>"),
        }
    }
}

impl From<f64> for RawValue {
    fn from(x: f64) -> Self {
        RawValue::Number(x)
    }
}

impl From<&str> for RawValue {
    fn from(s: &str) -> Self {
        RawValue::Text(s.to_owned())
    }
}

/// Formats integral values without a fractional part (`900`, not `900.0`).
pub fn format_number(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{}", x as i64)
    } else {
        format!("{x}")
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HierarchyLevel {
    pub level_name: String,
    /// 0 is the largest area.
    pub rank: usize,
}

impl HierarchyLevel {
    pub fn new(level_name: impl Into<String>, rank: usize) -> Self {
        Self {
            level_name: level_name.into(),
            rank,
        }
    }

    /// Hemisphere, continent, country, state/province/land, city.
    pub fn geographical() -> Vec<HierarchyLevel> {
        [
            ("hemisphere", 0),
            ("continent", 1),
            ("country", 2),
            ("state", 3),
            ("province", 3),
            ("land", 3),
            ("city", 4),
        ]
        .into_iter()
        .map(|(n, r)| HierarchyLevel::new(n, r))
        .collect()
    }
}

/// The level prefix of a `level:value` token.
pub fn token_level(token: &str) -> &str {
    token.split_once(':').map_or(token, |(level, _)| level)
}

/// A level-structured hierarchy over `level:value` tokens.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Hierarchy {
    levels: Vec<HierarchyLevel>,
    /// Nodes sorted by rank, then first appearance.
    nodes: Vec<String>,
    ranks: Vec<usize>,
    /// child -> parents
    parents: BTreeMap<String, Vec<String>>,
}

impl Hierarchy {
    /// Builds a hierarchy from `(child, parent)` edges. When `levels` is
    /// empty, ranks are inferred as the longest distance to a root.
    pub fn new(edges: &[(String, String)], levels: &[HierarchyLevel]) -> Result<Self> {
        Self::with_nodes(&[], edges, levels)
    }

    /// Like [`Hierarchy::new`], additionally declaring nodes that may have no
    /// edges at all.
    pub fn with_nodes(nodes: &[String], edges: &[(String, String)], levels: &[HierarchyLevel]) -> Result<Self> {
        let mut order: Vec<String> = Vec::new();
        let mut seen = HashSet::new();
        let mut parents: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for t in nodes {
            if seen.insert(t.clone()) {
                order.push(t.clone());
            }
        }
        for (child, parent) in edges {
            for t in [child, parent] {
                if seen.insert(t.clone()) {
                    order.push(t.clone());
                }
            }
            let ps = parents.entry(child.clone()).or_default();
            if !ps.contains(parent) {
                ps.push(parent.clone());
            }
        }

        check_acyclic(&order, &parents)?;

        let rank_of: HashMap<String, usize> = if levels.is_empty() {
            infer_ranks(&order, &parents)
        } else {
            check_levels(levels)?;
            let by_name: HashMap<&str, usize> = levels.iter().map(|l| (l.level_name.as_str(), l.rank)).collect();
            let mut ranks = HashMap::new();
            for t in &order {
                let rank = by_name
                    .get(token_level(t))
                    .ok_or_else(|| Error::BadScaleSpec(format!("token `{t}` has no declared level")))?;
                ranks.insert(t.clone(), *rank);
            }
            for (child, ps) in &parents {
                for p in ps {
                    if ranks[child] != ranks[p] + 1 {
                        return Err(Error::BadScaleSpec(format!(
                            "edge `{child}` -> `{p}` does not connect adjacent levels"
                        )));
                    }
                    if ranks[p] > 0 && !parents.contains_key(p) {
                        return Err(Error::DanglingEdge {
                            child: child.clone(),
                            parent: p.clone(),
                        });
                    }
                }
            }
            ranks
        };

        let mut nodes = order.clone();
        nodes.sort_by_key(|t| rank_of[t]);
        let ranks = nodes.iter().map(|t| rank_of[t]).collect();
        Ok(Self {
            levels: levels.to_vec(),
            nodes,
            ranks,
            parents,
        })
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn levels(&self) -> &[HierarchyLevel] {
        &self.levels
    }

    pub fn rank(&self, token: &str) -> Option<usize> {
        self.nodes.iter().position(|n| n == token).map(|i| self.ranks[i])
    }

    pub fn parents(&self, token: &str) -> &[String] {
        self.parents.get(token).map_or(&[], Vec::as_slice)
    }

    pub fn edges(&self) -> Vec<(String, String)> {
        self.parents
            .iter()
            .flat_map(|(c, ps)| ps.iter().map(move |p| (c.clone(), p.clone())))
            .collect()
    }

    /// `token` followed by all of its ancestors, or `None` for an unknown token.
    pub fn up_set(&self, token: &str) -> Option<Vec<String>> {
        if !self.nodes.iter().any(|n| n == token) {
            return None;
        }
        let mut out = vec![token.to_owned()];
        let mut i = 0;
        while i < out.len() {
            for p in self.parents(&out[i].clone()) {
                if !out.contains(p) {
                    out.push(p.clone());
                }
            }
            i += 1;
        }
        Some(out)
    }
}

fn check_levels(levels: &[HierarchyLevel]) -> Result<()> {
    let mut names = HashSet::new();
    for l in levels {
        if !names.insert(l.level_name.as_str()) {
            return Err(Error::BadScaleSpec(format!("level `{}` declared twice", l.level_name)));
        }
    }
    let ranks: HashSet<usize> = levels.iter().map(|l| l.rank).collect();
    if (0..ranks.len()).any(|r| !ranks.contains(&r)) {
        return Err(Error::BadScaleSpec("level ranks must be consecutive from 0".into()));
    }
    Ok(())
}

fn check_acyclic(order: &[String], parents: &BTreeMap<String, Vec<String>>) -> Result<()> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        Fresh,
        Active,
        Done,
    }
    fn visit(
        t: &str,
        parents: &BTreeMap<String, Vec<String>>,
        marks: &mut HashMap<String, Mark>,
    ) -> Result<()> {
        match marks.get(t).copied().unwrap_or(Mark::Fresh) {
            Mark::Done => return Ok(()),
            Mark::Active => return Err(Error::CyclicHierarchy(t.to_owned())),
            Mark::Fresh => {}
        }
        marks.insert(t.to_owned(), Mark::Active);
        for p in parents.get(t).into_iter().flatten() {
            visit(p, parents, marks)?;
        }
        marks.insert(t.to_owned(), Mark::Done);
        Ok(())
    }
    let mut marks = HashMap::new();
    for t in order {
        visit(t, parents, &mut marks)?;
    }
    Ok(())
}

fn infer_ranks(order: &[String], parents: &BTreeMap<String, Vec<String>>) -> HashMap<String, usize> {
    fn depth(t: &str, parents: &BTreeMap<String, Vec<String>>, memo: &mut HashMap<String, usize>) -> usize {
        if let Some(&d) = memo.get(t) {
            return d;
        }
        let d = parents
            .get(t)
            .into_iter()
            .flatten()
            .map(|p| depth(p, parents, memo) + 1)
            .max()
            .unwrap_or(0);
        memo.insert(t.to_owned(), d);
        d
    }
    let mut memo = HashMap::new();
    for t in order {
        depth(t, parents, &mut memo);
    }
    memo
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ScaleKind {
    Nominal { domain: Vec<String> },
    Ordinal { thresholds: Vec<f64> },
    Interordinal { cuts: Vec<f64> },
    Hierarchical { hierarchy: Hierarchy },
}

impl ScaleKind {
    pub fn label(&self) -> &'static str {
        match self {
            ScaleKind::Nominal { .. } => "nominal",
            ScaleKind::Ordinal { .. } => "ordinal",
            ScaleKind::Interordinal { .. } => "interordinal",
            ScaleKind::Hierarchical { .. } => "hierarchical",
        }
    }
}

/// A named facet with its scale attributes and assignment rule.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scale {
    pub name: String,
    pub kind: ScaleKind,
    pub attributes: Vec<String>,
}

impl Scale {
    pub fn nominal<S: Into<String>>(name: &str, domain: impl IntoIterator<Item = S>) -> Result<Self> {
        let domain: Vec<String> = domain.into_iter().map(Into::into).collect();
        let mut seen = HashSet::new();
        if let Some(dup) = domain.iter().find(|v| !seen.insert(v.as_str())) {
            return Err(Error::BadScaleSpec(format!("duplicate nominal value `{dup}`")));
        }
        Ok(Self {
            name: name.to_owned(),
            attributes: domain.iter().map(|v| format!("{name}:{v}")).collect(),
            kind: ScaleKind::Nominal { domain },
        })
    }

    pub fn ordinal(name: &str, thresholds: &[f64]) -> Result<Self> {
        check_numbers(thresholds, "threshold")?;
        if !thresholds.windows(2).all(|w| w[0] > w[1]) {
            return Err(Error::BadScaleSpec(format!(
                "ordinal thresholds must be strictly descending: {thresholds:?}"
            )));
        }
        Ok(Self {
            name: name.to_owned(),
            attributes: thresholds.iter().map(|&t| format!("{name}≥{}", format_number(t))).collect(),
            kind: ScaleKind::Ordinal {
                thresholds: thresholds.to_vec(),
            },
        })
    }

    pub fn interordinal(name: &str, cuts: &[f64]) -> Result<Self> {
        check_numbers(cuts, "cut")?;
        if !cuts.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::BadScaleSpec(format!(
                "interordinal cuts must be strictly ascending: {cuts:?}"
            )));
        }
        let attributes = cuts
            .iter()
            .flat_map(|&c| {
                let c = format_number(c);
                [format!("{name}≤{c}"), format!("{name}>{c}")]
            })
            .collect();
        Ok(Self {
            name: name.to_owned(),
            attributes,
            kind: ScaleKind::Interordinal { cuts: cuts.to_vec() },
        })
    }

    pub fn hierarchical(name: &str, edges: &[(String, String)], levels: &[HierarchyLevel]) -> Result<Self> {
        Self::from_hierarchy(name, Hierarchy::new(edges, levels)?)
    }

    pub fn from_hierarchy(name: &str, hierarchy: Hierarchy) -> Result<Self> {
        Ok(Self {
            name: name.to_owned(),
            attributes: hierarchy.nodes().to_vec(),
            kind: ScaleKind::Hierarchical { hierarchy },
        })
    }

    /// Same kind, new thresholds or cut points.
    pub fn with_values(&self, values: &[f64]) -> Result<Self> {
        match self.kind {
            ScaleKind::Ordinal { .. } => Scale::ordinal(&self.name, values),
            ScaleKind::Interordinal { .. } => Scale::interordinal(&self.name, values),
            _ => Err(Error::BadScaleSpec(format!(
                "scale `{}` is {} and takes no numeric parameters",
                self.name,
                self.kind.label()
            ))),
        }
    }

    fn type_error(&self, v: &RawValue) -> Error {
        Error::ScaleTypeError {
            scale: self.name.clone(),
            value: v.to_string(),
        }
    }

    /// Scale attributes (as a set over `self.attributes`) for one value.
    pub fn assign(&self, v: &RawValue) -> Result<BitSet> {
        let n = self.attributes.len();
        if *v == RawValue::Missing {
            return Ok(BitSet::empty(n));
        }
        match (&self.kind, v) {
            (ScaleKind::Nominal { domain }, RawValue::Text(s)) => {
                Ok(BitSet::from_indices(n, domain.iter().position(|d| d == s)))
            }
            (ScaleKind::Ordinal { thresholds }, RawValue::Number(x)) if !x.is_nan() => Ok(BitSet::from_indices(
                n,
                thresholds.iter().enumerate().filter(|(_, &t)| t <= *x).map(|(i, _)| i),
            )),
            (ScaleKind::Interordinal { cuts }, RawValue::Number(x)) if !x.is_nan() => Ok(BitSet::from_indices(
                n,
                cuts.iter()
                    .enumerate()
                    .map(|(j, &c)| if *x <= c { 2 * j } else { 2 * j + 1 }),
            )),
            (ScaleKind::Hierarchical { hierarchy }, RawValue::Text(s)) => Ok(match hierarchy.up_set(s) {
                Some(up) => BitSet::from_indices(
                    n,
                    up.iter().map(|t| self.attributes.iter().position(|a| a == t).unwrap()),
                ),
                None => BitSet::empty(n),
            }),
            _ => Err(self.type_error(v)),
        }
    }

    pub fn assign_names(&self, v: &RawValue) -> Result<Vec<String>> {
        Ok(self.assign(v)?.iter().map(|i| self.attributes[i].clone()).collect())
    }

    /// Instantiates the scale over single-valued data.
    pub fn apply(&self, values: &[(String, RawValue)]) -> Result<FormalContext> {
        let rows = values.iter().map(|(_, v)| self.assign(v)).collect::<Result<Vec<_>>>()?;
        FormalContext::from_rows(
            values.iter().map(|(g, _)| g.clone()).collect(),
            self.attributes.clone(),
            rows,
        )
    }

    /// Instantiates the scale over multi-valued data; an object's row is the
    /// union of the assignments of its values.
    pub fn apply_multi(&self, values: &[(String, Vec<RawValue>)]) -> Result<FormalContext> {
        let rows = values
            .iter()
            .map(|(_, vs)| {
                let mut row = BitSet::empty(self.attributes.len());
                for v in vs {
                    row.union_with(&self.assign(v)?);
                }
                Ok(row)
            })
            .collect::<Result<Vec<_>>>()?;
        FormalContext::from_rows(
            values.iter().map(|(g, _)| g.clone()).collect(),
            self.attributes.clone(),
            rows,
        )
    }

    /// The scale's own context: one object per distinguishable region (or
    /// hierarchy node), incident with the attributes that region receives.
    pub fn scale_context(&self) -> FormalContext {
        let n = self.attributes.len();
        let (objects, rows): (Vec<String>, Vec<BitSet>) = match &self.kind {
            ScaleKind::Nominal { domain } => domain
                .iter()
                .enumerate()
                .map(|(i, v)| (v.clone(), BitSet::from_indices(n, [i])))
                .unzip(),
            ScaleKind::Ordinal { thresholds } => {
                let k = thresholds.len();
                (0..=k)
                    .map(|band| {
                        let label = if band < k {
                            format!("≥{}", format_number(thresholds[band]))
                        } else {
                            format!("<{}", format_number(thresholds[k - 1]))
                        };
                        (label, BitSet::from_indices(n, band..k))
                    })
                    .unzip()
            }
            ScaleKind::Interordinal { cuts } => {
                let k = cuts.len();
                (0..=k)
                    .map(|bin| {
                        let label = match bin {
                            0 => format!("≤{}", format_number(cuts[0])),
                            b if b == k => format!(">{}", format_number(cuts[k - 1])),
                            b => format!("({},{}]", format_number(cuts[b - 1]), format_number(cuts[b])),
                        };
                        let row = (0..k).map(|j| if bin <= j { 2 * j } else { 2 * j + 1 });
                        (label, BitSet::from_indices(n, row))
                    })
                    .unzip()
            }
            ScaleKind::Hierarchical { .. } => {
                return self.sort_by_level().expect("hierarchical");
            }
        };
        FormalContext::from_rows(objects, self.attributes.clone(), rows).expect("scale ids are unique")
    }

    /// Objects = attributes = hierarchy nodes, ordered from the largest area
    /// to the smallest, incident with each node's reflexive ancestors. The
    /// resulting cross table is block lower triangular.
    pub fn sort_by_level(&self) -> Result<FormalContext> {
        let ScaleKind::Hierarchical { hierarchy } = &self.kind else {
            return Err(Error::BadScaleSpec(format!("scale `{}` is not hierarchical", self.name)));
        };
        let nodes = hierarchy.nodes().to_vec();
        let rows = nodes
            .iter()
            .map(|t| {
                let up = hierarchy.up_set(t).unwrap();
                BitSet::from_indices(
                    nodes.len(),
                    up.iter().map(|u| nodes.iter().position(|n| n == u).unwrap()),
                )
            })
            .collect();
        FormalContext::from_rows(nodes.clone(), nodes, rows)
    }

    /// Parses a `wave-scale 1` file (nominal, ordinal, interordinal).
    pub fn parse_file(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .map(|l| l.trim_end_matches('\r'))
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'));
        let parse_err = |line: usize, message: String| Error::Parse { line: line + 1, message };
        match lines.next() {
            Some((_, l)) if l.trim() == SCALE_MAGIC => {}
            Some((n, l)) => return Err(parse_err(n, format!("expected `{SCALE_MAGIC}`, got `{l}`"))),
            None => return Err(parse_err(0, "empty scale file".into())),
        }
        let (n, header) = lines.next().ok_or_else(|| parse_err(1, "missing `kind name` line".into()))?;
        let (kind, name) = header
            .trim()
            .split_once(char::is_whitespace)
            .map(|(k, n)| (k, n.trim()))
            .ok_or_else(|| parse_err(n, format!("expected `kind name`, got `{header}`")))?;
        let (n, values) = lines.next().unwrap_or((n + 1, ""));
        let tokens: Vec<&str> = values.split_whitespace().collect();
        let numbers = || {
            tokens
                .iter()
                .map(|t| t.parse::<f64>().map_err(|_| parse_err(n, format!("bad number `{t}`"))))
                .collect::<Result<Vec<_>>>()
        };
        match kind {
            "nominal" => Scale::nominal(name, tokens),
            "ordinal" => Scale::ordinal(name, &numbers()?),
            "interordinal" => Scale::interordinal(name, &numbers()?),
            other => Err(parse_err(n - 1, format!("unknown scale kind `{other}`"))),
        }
    }

    /// Serializes nominal and numeric scales to the `wave-scale 1` format.
    pub fn to_file_string(&self) -> Result<String> {
        let values = match &self.kind {
            ScaleKind::Nominal { domain } => domain.join(" "),
            ScaleKind::Ordinal { thresholds: v } | ScaleKind::Interordinal { cuts: v } => {
                v.iter().map(|x| format_number(*x)).collect::<Vec<_>>().join(" ")
            }
            ScaleKind::Hierarchical { .. } => {
                return Err(Error::BadScaleSpec("hierarchical scales are stored as .tbl files".into()))
            }
        };
        Ok(format!("{SCALE_MAGIC}\n{} {}\n{values}\n", self.kind.label(), self.name))
    }
}

fn check_numbers(values: &[f64], what: &str) -> Result<()> {
    if values.is_empty() {
        return Err(Error::BadScaleSpec(format!("at least one {what} required")));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::BadScaleSpec(format!("non-finite {what}")));
    }
    Ok(())
}

/// Parses a `.tbl` hierarchy: `child<TAB>parent` rows; blank lines, `...`
/// and `#` comments are skipped.
pub fn parse_tbl(text: &str) -> Result<Vec<(String, String)>> {
    let mut edges = Vec::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.chars().all(|c| c == '.') {
            continue;
        }
        let tokens: Vec<&str> = line.split_whitespace().filter(|t| !t.chars().all(|c| c == '.')).collect();
        match tokens.as_slice() {
            [child, parent] => edges.push((child.to_string(), parent.to_string())),
            _ => {
                return Err(Error::Parse {
                    line: n + 1,
                    message: format!("expected `child<TAB>parent`, got `{line}`"),
                })
            }
        }
    }
    Ok(edges)
}

pub fn to_tbl_string(edges: &[(String, String)]) -> String {
    edges.iter().map(|(c, p)| format!("{c}\t{p}\n")).collect()
}

/// Ranks attributes for "most important first": larger extent first, ties
/// broken by name.
pub fn rank_attributes(ctx: &FormalContext) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..ctx.num_attributes()).collect();
    idx.sort_by(|&a, &b| {
        ctx.column(b)
            .count()
            .cmp(&ctx.column(a).count())
            .then_with(|| ctx.attributes()[a].cmp(&ctx.attributes()[b]))
    });
    idx
}
