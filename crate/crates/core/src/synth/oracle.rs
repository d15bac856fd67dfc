//! A deliberately naive recomputation of the indicator table. It parses
//! canonical JSONL into plain JSON values, keeps its own fraction type, and
//! rescans the whole record list for every cell. Slow on purpose; it exists
//! to be compared against the indexed implementation.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_integer::Integer;
use serde_json::Value;

use crate::error::{Error, Result};

/// Detector settings mirrored from the indicator table options.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleParams {
    pub hyper_threshold: u64,
    pub hyper_inclusive: bool,
    pub external_min: u64,
    pub cross_min: u64,
    pub surge_ratio: f64,
    pub surge_min_recent: f64,
    pub groups: Vec<(String, Vec<String>)>,
}

impl Default for OracleParams {
    fn default() -> Self {
        Self {
            hyper_threshold: 36,
            hyper_inclusive: true,
            external_min: 2,
            cross_min: 10,
            surge_ratio: 10.0,
            surge_min_recent: 36.0,
            groups: Vec::new(),
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Frac {
    n: i128,
    d: i128,
}

impl Frac {
    fn new(n: i128, d: i128) -> Frac {
        assert!(d != 0);
        let (n, d) = if d < 0 { (-n, -d) } else { (n, d) };
        let g = n.gcd(&d).max(1);
        Frac { n: n / g, d: d / g }
    }

    fn int(n: i128) -> Frac {
        Frac { n, d: 1 }
    }

    fn cmp(self, o: Frac) -> Ordering {
        (self.n * o.d).cmp(&(o.n * self.d))
    }

    fn mul(self, o: Frac) -> Frac {
        Frac::new(self.n * o.n, self.d * o.d)
    }

    fn text(self) -> String {
        if self.d == 1 {
            self.n.to_string()
        } else {
            format!("{}/{}", self.n, self.d)
        }
    }

    /// floor(x + 1/2)
    fn nearest(self) -> i128 {
        Integer::div_floor(&(2 * self.n + self.d), &(2 * self.d))
    }

    fn tenths(self) -> String {
        let t = Frac::new(self.n * 10, self.d).nearest();
        let sign = if t < 0 { "-" } else { "" };
        format!("{sign}{}.{}", t.abs() / 10, t.abs() % 10)
    }

    fn decimal(v: f64) -> Frac {
        let text = format!("{v}");
        let (neg, body) = match text.strip_prefix('-') {
            Some(b) => (true, b),
            None => (false, text.as_str()),
        };
        let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
        let digits: i128 = format!("{whole}{frac}").parse().expect("plain decimal");
        let f = Frac::new(digits, 10i128.pow(frac.len() as u32));
        if neg {
            Frac::new(-f.n, f.d)
        } else {
            f
        }
    }
}

fn pct(num: u64, den: u64) -> Frac {
    Frac::new(100 * num as i128, den as i128)
}

struct Entry {
    author: String,
    /// `None` for unresolved affiliations.
    insts: Vec<Option<String>>,
    countries: Vec<String>,
}

impl Entry {
    fn names(&self, inst: &str) -> bool {
        self.insts.iter().any(|i| i.as_deref() == Some(inst))
    }

    fn position(&self, inst: &str) -> Option<usize> {
        self.insts.iter().position(|i| i.as_deref() == Some(inst))
    }
}

struct Rec {
    year: i64,
    entries: Vec<Entry>,
}

impl Rec {
    fn names(&self, inst: &str) -> bool {
        self.entries.iter().any(|e| e.names(inst))
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

fn parse(text: &str) -> Result<Vec<Rec>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let ln = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let v: Value = serde_json::from_str(line).map_err(|e| bad(ln, e.to_string()))?;
        let year = v.get("year").and_then(Value::as_i64).ok_or_else(|| bad(ln, "missing year"))?;
        let authors = v.get("authors").and_then(Value::as_array).ok_or_else(|| bad(ln, "missing authors"))?;
        let mut entries = Vec::new();
        for a in authors {
            let author = a
                .get("author_id")
                .and_then(Value::as_str)
                .ok_or_else(|| bad(ln, "author without author_id"))?
                .to_string();
            let affs = a.get("affiliations").and_then(Value::as_array).ok_or_else(|| bad(ln, "author without affiliations"))?;
            let mut insts = Vec::new();
            let mut countries = Vec::new();
            for af in affs {
                insts.push(af.get("institution_id").and_then(Value::as_str).map(str::to_string));
                countries.push(
                    af.get("country")
                        .and_then(Value::as_str)
                        .ok_or_else(|| bad(ln, "affiliation without country"))?
                        .to_string(),
                );
            }
            entries.push(Entry { author, insts, countries });
        }
        out.push(Rec { year, entries });
    }
    Ok(out)
}

type Row = (String, String, Option<i64>, String, String, Option<usize>);

fn row(inst: &str, metric: &str, year: Option<i64>, value: Option<Frac>, tenths: bool) -> Row {
    let (raw, shown) = match value {
        None => ("n/a".to_string(), "n/a".to_string()),
        Some(v) => (v.text(), if tenths { v.tenths() } else { v.nearest().to_string() }),
    };
    (inst.to_string(), metric.to_string(), year, raw, shown, None)
}

/// 1 + number of strictly better values.
fn rank_of(v: Frac, all: &[Frac]) -> usize {
    1 + all.iter().filter(|o| o.cmp(v) == Ordering::Greater).count()
}

fn records_of<'a>(recs: &'a [Rec], inst: &'a str, year: i64) -> impl Iterator<Item = &'a Rec> + 'a {
    recs.iter().filter(move |r| r.year == year && r.names(inst))
}

/// Records per (author, year), one full scan.
fn author_year_totals(recs: &[Rec]) -> BTreeMap<(&str, i64), u64> {
    let mut totals = BTreeMap::new();
    for r in recs {
        let on: BTreeSet<&str> = r.entries.iter().map(|e| e.author.as_str()).collect();
        for a in on {
            *totals.entry((a, r.year)).or_default() += 1;
        }
    }
    totals
}

/// Recomputes the indicator table from canonical JSONL text and renders it
/// in the exported CSV layout.
pub fn oracle_metrics(jsonl: &str, params: &OracleParams) -> Result<String> {
    let recs = parse(jsonl)?;
    let mut rows: Vec<Row> = Vec::new();
    let mut csv = String::from("institution_id,metric,year,value_raw,value_reported,rank\n");
    if recs.is_empty() {
        return Ok(csv);
    }
    let lo = recs.iter().map(|r| r.year).min().unwrap();
    let hi = recs.iter().map(|r| r.year).max().unwrap();
    let years: Vec<i64> = (lo..=hi).collect();
    let insts: BTreeSet<String> = recs
        .iter()
        .flat_map(|r| r.entries.iter())
        .flat_map(|e| e.insts.iter().flatten().cloned())
        .collect();

    for &y in &years {
        let mut outputs = Vec::new();
        let mut firsts = Vec::new();
        let mut intls = Vec::new();
        for inst in &insts {
            let mine: Vec<&Rec> = records_of(&recs, inst, y).collect();
            let n = mine.len() as u64;
            let first = mine.iter().filter(|r| r.entries.first().is_some_and(|e| e.names(inst))).count() as u64;
            let intl = mine
                .iter()
                .filter(|r| {
                    let cs: BTreeSet<&String> = r.entries.iter().flat_map(|e| e.countries.iter()).collect();
                    cs.len() >= 2
                })
                .count() as u64;
            let slots: u64 = mine.iter().map(|r| r.entries.len() as u64).sum();
            let den = mine
                .iter()
                .filter(|r| {
                    !r.entries
                        .iter()
                        .all(|e| e.insts.len() == 1 && e.insts[0].as_deref() == Some(inst.as_str()))
                })
                .count() as u64;
            let num = mine
                .iter()
                .filter(|r| {
                    !r.entries
                        .iter()
                        .all(|e| e.insts.len() == 1 && e.insts[0].as_deref() == Some(inst.as_str()))
                })
                .filter(|r| r.entries.iter().any(|e| e.insts.len() >= 2 && e.names(inst)))
                .count() as u64;

            outputs.push((inst.clone(), Frac::int(n as i128)));
            rows.push(row(inst, "output_count", Some(y), Some(Frac::int(n as i128)), false));
            let fa = (n > 0).then(|| pct(first, n));
            if let Some(v) = fa {
                firsts.push((inst.clone(), v));
            }
            rows.push(row(inst, "first_author_pct", Some(y), fa, false));
            let ic = (n > 0).then(|| pct(intl, n));
            if let Some(v) = ic {
                intls.push((inst.clone(), v));
            }
            rows.push(row(inst, "intl_collab_pct", Some(y), ic, false));
            rows.push(row(inst, "authors_per_article", Some(y), (n > 0).then(|| Frac::new(slots as i128, n as i128)), true));
            rows.push(row(inst, "multi_affiliation_pct", Some(y), (den > 0).then(|| pct(num, den)), false));
            if y > lo {
                let start = records_of(&recs, inst, lo).count() as i128;
                let g = (start > 0).then(|| Frac::new(100 * (n as i128 - start), start));
                rows.push(row(inst, "growth_pct", Some(y), g, false));
            }
        }
        for (metric, values) in [("output_count", &outputs), ("first_author_pct", &firsts), ("intl_collab_pct", &intls)] {
            let all: Vec<Frac> = values.iter().map(|(_, v)| *v).collect();
            for (inst, v) in values.iter() {
                let r = rows
                    .iter_mut()
                    .find(|r| &r.0 == inst && r.1 == metric && r.2 == Some(y))
                    .expect("row exists");
                r.5 = Some(rank_of(*v, &all));
            }
        }
    }

    let totals = author_year_totals(&recs);
    let author_year_total = |a: &str, y: i64| totals.get(&(a, y)).copied().unwrap_or(0);
    let ratio = Frac::decimal(params.surge_ratio);
    let min_recent = Frac::decimal(params.surge_min_recent);
    for inst in &insts {
        for &y in &years {
            let mut authors = BTreeSet::new();
            for r in records_of(&recs, inst, y) {
                for e in &r.entries {
                    if e.names(inst) {
                        authors.insert(e.author.as_str());
                    }
                }
            }
            let n = authors
                .iter()
                .filter(|a| {
                    let c = author_year_total(a, y);
                    if params.hyper_inclusive {
                        c >= params.hyper_threshold
                    } else {
                        c > params.hyper_threshold
                    }
                })
                .count();
            rows.push(row(inst, "hyperprolific_count", Some(y), Some(Frac::int(n as i128)), false));
        }

        let mut usage: BTreeMap<&str, (u64, u64)> = BTreeMap::new();
        for r in &recs {
            for e in &r.entries {
                if let Some(pos) = e.position(inst) {
                    let u = usage.entry(e.author.as_str()).or_default();
                    u.0 += 1;
                    if pos > 0 {
                        u.1 += 1;
                    }
                }
            }
        }
        let ext = usage.values().filter(|(t, s)| *t >= params.external_min && 2 * s > *t).count();
        rows.push(row(inst, "external_author_count", None, Some(Frac::int(ext as i128)), false));

        let mut recent_authors = BTreeSet::new();
        for r in recs.iter().filter(|r| r.year >= hi - 1 && r.year <= hi) {
            for e in &r.entries {
                if e.names(inst) {
                    recent_authors.insert(e.author.as_str());
                }
            }
        }
        let surging = recent_authors
            .iter()
            .filter(|a| {
                let base: u64 = (hi - 6..=hi - 2).map(|y| author_year_total(a, y)).sum();
                let recent: u64 = (hi - 1..=hi).map(|y| author_year_total(a, y)).sum();
                let base_mean = Frac::new(base as i128, 5);
                let recent_mean = Frac::new(recent as i128, 2);
                let floor = if base_mean.cmp(Frac::int(1)) == Ordering::Greater { base_mean } else { Frac::int(1) };
                recent_mean.cmp(ratio.mul(floor)) != Ordering::Less && recent_mean.cmp(min_recent) != Ordering::Less
            })
            .count();
        rows.push(row(inst, "surge_author_count", Some(hi), Some(Frac::int(surging as i128)), false));
    }

    let mut groups = params.groups.clone();
    groups.sort();
    for (name, members) in &groups {
        let gid = format!("group:{name}");
        let set: BTreeSet<&str> = members.iter().map(String::as_str).collect();
        for &y in &years {
            let in_group: Vec<&Rec> = recs.iter().filter(|r| r.year == y && set.iter().any(|m| r.names(m))).collect();
            let overlap = if set.len() < 2 || in_group.is_empty() {
                None
            } else {
                let shared = in_group.iter().filter(|r| set.iter().filter(|m| r.names(m)).count() >= 2).count();
                Some(pct(shared as u64, in_group.len() as u64))
            };
            rows.push(row(&gid, "overlap_pct", Some(y), overlap, false));
            let slots: usize = in_group.iter().map(|r| r.entries.len()).sum();
            let apa = (!in_group.is_empty()).then(|| Frac::new(slots as i128, in_group.len() as i128));
            rows.push(row(&gid, "authors_per_article", Some(y), apa, true));
        }
        let mut per_author: BTreeMap<&str, (u64, BTreeSet<&str>)> = BTreeMap::new();
        for r in &recs {
            let mut counted = BTreeSet::new();
            for e in &r.entries {
                let hits: Vec<&str> = e.insts.iter().flatten().map(String::as_str).filter(|i| set.contains(i)).collect();
                if hits.is_empty() {
                    continue;
                }
                let slot = per_author.entry(e.author.as_str()).or_default();
                if counted.insert(e.author.as_str()) {
                    slot.0 += 1;
                }
                slot.1.extend(hits);
            }
        }
        let n = per_author.values().filter(|(k, s)| *k > params.cross_min && s.len() >= 2).count();
        rows.push(row(&gid, "cross_group_author_count", None, Some(Frac::int(n as i128)), false));
    }

    rows.sort();
    for (inst, metric, year, raw, shown, rank) in rows {
        let inst = if inst.contains([',', '"', '\n']) {
            format!("\"{}\"", inst.replace('"', "\"\""))
        } else {
            inst
        };
        let year = year.map(|y| y.to_string()).unwrap_or_default();
        let rank = rank.map(|k| k.to_string()).unwrap_or_default();
        csv.push_str(&format!("{inst},{metric},{year},{raw},{shown},{rank}\n"));
    }
    Ok(csv)
}
