//! Document records, URL decomposition and the host-to-city mapping.
//!
//! Records arrive as a tab-separated file with the header
//! `id url score size modified keywords`; keywords are comma-separated and
//! `modified` is either unix seconds, `YYYY-MM-DD` or RFC 3339. A comment
//! line `# size-unit: <unit>` records what `size` counts.

use std::collections::HashSet;

use chrono::{DateTime, NaiveDate};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scales::format_number;

pub const RECORD_COLUMNS: [&str; 6] = ["id", "url", "score", "size", "modified", "keywords"];

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DocumentRecord {
    pub id: String,
    pub url: Option<String>,
    /// Relative retrieval score.
    pub score: Option<f64>,
    /// Lines or bytes, see [`Dataset::size_unit`].
    pub size: Option<f64>,
    /// Unix seconds.
    pub modified: Option<i64>,
    pub keywords: Vec<String>,
}

impl DocumentRecord {
    pub fn new(id: impl Into<String>) -> Self {
        Self {
            id: id.into(),
            ..Default::default()
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Dataset {
    pub records: Vec<DocumentRecord>,
    pub size_unit: Option<String>,
    /// Header columns that were not recognised and skipped.
    pub ignored_columns: Vec<String>,
}

impl Dataset {
    pub fn get(&self, id: &str) -> Option<&DocumentRecord> {
        self.records.iter().find(|r| r.id == id)
    }
}

#[derive(Clone, Copy, PartialEq)]
enum Column {
    Id,
    Url,
    Score,
    Size,
    Modified,
    Keywords,
    Ignored,
}

fn parse_timestamp(s: &str) -> Option<i64> {
    if let Ok(secs) = s.parse::<i64>() {
        return Some(secs);
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp());
    }
    NaiveDate::parse_from_str(s, "%Y-%m-%d")
        .ok()
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .map(|dt| dt.and_utc().timestamp())
}

pub fn parse_records(text: &str) -> Result<Dataset> {
    let mut dataset = Dataset::default();
    let mut columns: Option<Vec<Column>> = None;
    let mut ids = HashSet::new();

    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = raw.trim_end_matches('\r');
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(unit) = comment.trim().strip_prefix("size-unit:") {
                dataset.size_unit = Some(unit.trim().to_owned());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let Some(cols) = &columns else {
            let cols: Vec<Column> = fields
                .iter()
                .map(|f| match f.trim() {
                    "id" => Column::Id,
                    "url" => Column::Url,
                    "score" => Column::Score,
                    "size" => Column::Size,
                    "modified" => Column::Modified,
                    "keywords" => Column::Keywords,
                    other => {
                        dataset.ignored_columns.push(other.to_owned());
                        Column::Ignored
                    }
                })
                .collect();
            if !cols.contains(&Column::Id) {
                return Err(Error::Parse {
                    line: line_no,
                    message: "header has no `id` column".into(),
                });
            }
            if !dataset.ignored_columns.is_empty() {
                log::warn!("ignoring {} unknown column(s): {:?}", dataset.ignored_columns.len(), dataset.ignored_columns);
            }
            columns = Some(cols);
            continue;
        };

        let mut rec = DocumentRecord::default();
        let bad = |field: &str| Error::BadField {
            line: line_no,
            field: field.to_owned(),
        };
        let number = |field: &str, s: &str| -> Result<f64> {
            match s.parse::<f64>() {
                Ok(x) if x.is_finite() && x >= 0.0 => Ok(x),
                _ => Err(bad(field)),
            }
        };
        for (col, value) in cols.iter().zip(fields.iter().map(|f| f.trim())) {
            if value.is_empty() {
                continue;
            }
            match col {
                Column::Id => rec.id = value.to_owned(),
                Column::Url => rec.url = Some(value.to_owned()),
                Column::Score => rec.score = Some(number("score", value)?),
                Column::Size => rec.size = Some(number("size", value)?),
                Column::Modified => rec.modified = Some(parse_timestamp(value).ok_or_else(|| bad("modified"))?),
                Column::Keywords => {
                    rec.keywords = value
                        .split(',')
                        .map(str::trim)
                        .filter(|k| !k.is_empty())
                        .map(str::to_owned)
                        .collect()
                }
                Column::Ignored => {}
            }
        }
        if rec.id.is_empty() {
            return Err(bad("id"));
        }
        if !ids.insert(rec.id.clone()) {
            return Err(Error::DuplicateDocument(rec.id));
        }
        dataset.records.push(rec);
    }
    Ok(dataset)
}

pub fn serialize_records(dataset: &Dataset) -> String {
    let mut out = String::new();
    if let Some(unit) = &dataset.size_unit {
        out.push_str(&format!("# size-unit: {unit}\n"));
    }
    out.push_str(&RECORD_COLUMNS.join("\t"));
    out.push('\n');
    for r in &dataset.records {
        let fields = [
            r.id.clone(),
            r.url.clone().unwrap_or_default(),
            r.score.map(format_number).unwrap_or_default(),
            r.size.map(format_number).unwrap_or_default(),
            r.modified.map(|m| m.to_string()).unwrap_or_default(),
            r.keywords.join(","),
        ];
        out.push_str(&fields.join("\t"));
        out.push('\n');
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UrlParts {
    pub scheme: String,
    pub host: String,
    pub path_segments: Vec<String>,
}

impl UrlParts {
    /// Path prefixes `/a`, `/a/b`, ... up to `depth` segments.
    pub fn path_prefixes(&self, depth: usize) -> Vec<String> {
        (1..=self.path_segments.len().min(depth))
            .map(|d| format!("/{}", self.path_segments[..d].join("/")))
            .collect()
    }
}

/// Splits a URL into scheme, host and path segments. Scheme and host are
/// lowercased; userinfo, port, query and fragment are dropped. For
/// authority-less schemes (`mailto:`, `news:`) the host is the mail domain
/// and anything else becomes a path segment.
pub fn parse_url(url: &str) -> Result<UrlParts> {
    let url = url.trim();
    let bad = || Error::BadUrl(url.to_owned());
    let (scheme, rest, has_authority) = match url.find("://") {
        Some(i) => (&url[..i], &url[i + 3..], true),
        None => match url.split_once(':') {
            Some((s, r)) => (s, r, false),
            None => return Err(bad()),
        },
    };
    let valid_scheme = scheme.chars().next().is_some_and(|c| c.is_ascii_alphabetic())
        && scheme.chars().all(|c| c.is_ascii_alphanumeric() || "+-.".contains(c));
    if !valid_scheme {
        return Err(bad());
    }
    let rest = rest.split(['?', '#']).next().unwrap_or("");
    let (host, path) = if has_authority {
        let (authority, path) = rest.split_once('/').unwrap_or((rest, ""));
        let host = authority.rsplit_once('@').map_or(authority, |(_, h)| h);
        let host = match host.rfind(':') {
            Some(i) if !host.ends_with(']') => &host[..i],
            _ => host,
        };
        (host, path)
    } else {
        match rest.rsplit_once('@') {
            Some((_, domain)) => (domain, ""),
            None => ("", rest),
        }
    };
    Ok(UrlParts {
        scheme: scheme.to_ascii_lowercase(),
        host: host.to_ascii_lowercase(),
        path_segments: path.split('/').filter(|s| !s.is_empty()).map(str::to_owned).collect(),
    })
}

/// `host-suffix -> city token` entries.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct HostTable {
    entries: Vec<(String, String)>,
}

impl HostTable {
    pub fn new<S: Into<String>, T: Into<String>>(entries: impl IntoIterator<Item = (S, T)>) -> Self {
        Self {
            entries: entries
                .into_iter()
                .map(|(s, c)| (s.into().to_ascii_lowercase(), c.into()))
                .collect(),
        }
    }

    /// Parses `suffix<TAB>city-token` lines; `#` comments and blanks skipped.
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = Vec::new();
        for (n, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match line.split_whitespace().collect::<Vec<_>>().as_slice() {
                [suffix, city] => entries.push((suffix.to_string(), city.to_string())),
                _ => {
                    return Err(Error::Parse {
                        line: n + 1,
                        message: format!("expected `suffix<TAB>city`, got `{line}`"),
                    })
                }
            }
        }
        Ok(Self::new(entries))
    }

    pub fn entries(&self) -> &[(String, String)] {
        &self.entries
    }

    /// City token of the longest suffix matching `host` on a label boundary.
    pub fn host_to_city(&self, host: &str) -> Option<&str> {
        let host = host.to_ascii_lowercase();
        self.entries
            .iter()
            .filter(|(suffix, _)| {
                host == *suffix || (host.len() > suffix.len() && host.ends_with(suffix.as_str()) && host.as_bytes()[host.len() - suffix.len() - 1] == b'.')
            })
            .max_by_key(|(suffix, _)| suffix.len())
            .map(|(_, city)| city.as_str())
    }
}
