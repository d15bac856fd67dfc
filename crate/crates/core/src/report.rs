//! Plain tables rendered as markdown and CSV: the published fixture tables
//! with recomputed change columns, and the same shapes built from a corpus.

use std::fmt::Write as _;

use crate::indicators::growth_pct;
use crate::network::GraphStats;
use crate::scalar::{display_tenths, round_half_up, Scalar};
use crate::screening::{ComparisonReport, GroupPanel, ScreeningResult};
use crate::synth::{FixtureBundle, FixtureGroup};
use crate::Exact;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    /// File stem for the CSV export.
    pub slug: String,
    pub title: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub footer: Vec<String>,
}

impl Table {
    fn new(slug: &str, title: &str, header: &[&str]) -> Self {
        Self {
            slug: slug.to_string(),
            title: title.to_string(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
            footer: Vec::new(),
        }
    }

    pub fn cell(&self, row_key: &str, column: &str) -> Option<&str> {
        let col = self.header.iter().position(|h| h == column)?;
        self.rows.iter().find(|r| r[0] == row_key).map(|r| r[col].as_str())
    }

    pub fn to_markdown(&self) -> String {
        let mut out = format!("## {}\n\n", self.title);
        let esc = |s: &str| s.replace('|', "\\|");
        let line = |cells: &[String]| format!("| {} |\n", cells.iter().map(|c| esc(c)).collect::<Vec<_>>().join(" | "));
        out.push_str(&line(&self.header));
        out.push_str(&format!("|{}\n", "---|".repeat(self.header.len())));
        for r in &self.rows {
            out.push_str(&line(r));
        }
        if !self.footer.is_empty() {
            out.push('\n');
            for f in &self.footer {
                let _ = writeln!(out, "{f}  ");
            }
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut w = csv::WriterBuilder::new().from_writer(Vec::new());
        w.write_record(&self.header).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8 cells")
    }
}

pub fn render_markdown(title: &str, tables: &[Table]) -> String {
    let mut out = format!("# {title}\n");
    for t in tables {
        out.push('\n');
        out.push_str(&t.to_markdown());
    }
    out
}

/// Integer when whole, one decimal otherwise.
pub fn compact<S: Scalar>(v: S) -> String {
    if S::from_int(v.floor_int()) == v {
        v.floor_int().to_string()
    } else {
        display_tenths(v)
    }
}

fn opt<S: Scalar>(v: Option<S>, f: fn(S) -> String) -> String {
    v.map(f).unwrap_or_else(|| "n/a".to_string())
}

fn pct<S: Scalar>(v: S) -> String {
    round_half_up(v).to_string()
}

pub fn growth_cell(start: u64, end: u64) -> String {
    opt(growth_pct::<Exact>(start, end), pct)
}

fn rank_cell(rank: Option<u32>, beyond: &str) -> String {
    rank.map(|r| r.to_string()).unwrap_or_else(|| beyond.to_string())
}

/// The published tables with change columns recomputed from their cells.
pub fn fixture_tables(f: &FixtureBundle) -> Vec<Table> {
    let name = |id: &str| f.institution(id).map(|i| i.name.clone()).unwrap_or_else(|| id.to_string());
    let group = |id: &str| f.group_of(id).map(|g| g.as_str().to_string()).unwrap_or_default();
    let beyond = f
        .output_counts
        .extra
        .get("rank_beyond")
        .and_then(|v| v.as_u64())
        .map(|r| format!(">{r}"))
        .unwrap_or_else(|| "n/a".into());

    let mut output = Table::new(
        "output",
        "Article output",
        &["Institution", "Group", "2019", "2023", "Change", "Change (recomputed)", "World rank 2019", "World rank 2023"],
    );
    for r in &f.output_counts.rows {
        let (a, b) = (r.articles[&2019], r.articles[&2023]);
        output.rows.push(vec![
            name(r.institution_id.as_str()),
            group(r.institution_id.as_str()),
            a.to_string(),
            b.to_string(),
            r.change_pct.to_string(),
            growth_cell(a, b),
            rank_cell(r.world_rank.get(&2019).copied().flatten(), &beyond),
            rank_cell(r.world_rank.get(&2023).copied().flatten(), &beyond),
        ]);
    }
    for g in [FixtureGroup::Study, FixtureGroup::Control] {
        let (a, b) = f.group_article_totals(g);
        let (sa, sb) = (f.summed_articles(g, 2019), f.summed_articles(g, 2023));
        output.footer.push(format!(
            "{} group: {a} -> {b} articles, growth {}% (summed member counts {sa} -> {sb}, {}%)",
            g.as_str(),
            growth_cell(a, b),
            growth_cell(sa, sb)
        ));
    }
    output.footer.push(format!("World growth: {}%", f.aggregates.output_growth_pct.world));

    let rate_table = |slug: &str, title: &str, rows: &[crate::synth::fixture::RateRankRow]| {
        let mut t = Table::new(
            slug,
            title,
            &["Institution", "Group", "2019 %", "2023 %", "Change (points)", "World rank 2019", "World rank 2023"],
        );
        for r in rows {
            t.rows.push(vec![
                name(r.institution_id.as_str()),
                group(r.institution_id.as_str()),
                r.pct[&2019].to_string(),
                r.pct[&2023].to_string(),
                (r.pct[&2023] - r.pct[&2019]).to_string(),
                r.world_rank[&2019].to_string(),
                r.world_rank[&2023].to_string(),
            ]);
        }
        t
    };
    let mut first = rate_table("first_authorship", "First authorship", &f.first_authorship.rows);
    let world = &f.aggregates.first_author_pct.world;
    first.footer.push(format!("World: {}% -> {}%", world[&2019], world[&2023]));
    let intl = rate_table("intl_collaboration", "International collaboration", &f.intl_collaboration.rows);

    let years: Vec<i32> = (2019..=2023).collect();
    let mut head = vec!["Institution".to_string(), "Group".to_string()];
    head.extend(years.iter().map(|y| y.to_string()));
    let mut hyper = Table::new("hyperprolific", "Hyperprolific authors (36+ articles a year)", &[]);
    hyper.header = head;
    for r in &f.hyperprolific_counts.rows {
        let mut row = vec![name(r.institution_id.as_str()), group(r.institution_id.as_str())];
        row.extend(years.iter().map(|y| r.counts.get(y).map(|c| c.to_string()).unwrap_or_default()));
        hyper.rows.push(row);
    }
    for g in [FixtureGroup::Study, FixtureGroup::Control] {
        let mut row = vec![format!("{} total", g.as_str()), g.as_str().to_string()];
        row.extend(years.iter().map(|&y| f.hyperprolific_total(g, y).to_string()));
        hyper.rows.push(row);
    }

    let mut multi = Table::new(
        "multi_affiliation",
        "Multi-affiliated publications",
        &["Institution", "Group", "2019 %", "2023 %", "Change (points)", "Change (recomputed)"],
    );
    for r in &f.multi_affiliation.rows {
        multi.rows.push(vec![
            name(r.institution_id.as_str()),
            group(r.institution_id.as_str()),
            r.pct[&2019].to_string(),
            r.pct[&2023].to_string(),
            r.change_points.to_string(),
            (r.pct[&2023] - r.pct[&2019]).to_string(),
        ]);
    }

    let mut net = Table::new("network", "Co-authorship network footers", &["Group", "Year", "Footer"]);
    for ft in &f.network.footers {
        net.rows.push(vec![
            ft.group.as_str().to_string(),
            ft.year.to_string(),
            format!(
                "Articles per institution: {} | External institutions: {} | Links: {} | Total link strength: {} | Clusters: {}",
                ft.min_articles, ft.external_institutions, ft.links, ft.total_link_strength, ft.clusters
            ),
        ]);
    }
    for (g, counts) in &f.network.external_institutions {
        let (a, b) = (counts[&2019], counts[&2023]);
        net.footer.push(format!(
            "{} external institutions {a} -> {b}: {}% (published {}%)",
            g.as_str(),
            growth_cell(a, b),
            f.network.external_growth_pct.get(g).map(|v| v.to_string()).unwrap_or_else(|| "n/a".into())
        ));
    }

    vec![output, first, hyper, multi, intl, net]
}

fn panel_rows<S: Scalar>(t: &mut Table, label: &str, panel: &GroupPanel<S>, years: &[i32]) {
    let cells = |f: &dyn Fn(&crate::indicators::GroupYear<S>) -> String| -> Vec<String> {
        years
            .iter()
            .map(|&y| panel.summary.year(y).map(f).unwrap_or_else(|| "n/a".into()))
            .collect()
    };
    let mut push = |metric: &str, values: Vec<String>| {
        let mut row = vec![format!("{label}: {metric}")];
        row.extend(values);
        t.rows.push(row);
    };
    push("articles (distinct)", cells(&|g| g.distinct_output.to_string()));
    push("articles (summed)", cells(&|g| g.summed_output.to_string()));
    push("first author %", cells(&|g| opt(g.first_author_pct, pct)));
    push("international collaboration %", cells(&|g| opt(g.intl_collab_pct, pct)));
    push("multi-affiliation %", cells(&|g| opt(g.multi_affiliation_pct, pct)));
    push("authors per article", cells(&|g| opt(g.authors_per_article, display_tenths)));
    push("overlap %", cells(&|g| opt(g.overlap_pct, pct)));
    push("median output rank", cells(&|g| opt(g.median_output_rank, compact)));
    push("median first author rank", cells(&|g| opt(g.median_first_author_rank, compact)));
    push("median international collaboration rank", cells(&|g| opt(g.median_intl_collab_rank, compact)));
    push(
        "hyperprolific authors",
        years.iter().map(|y| panel.hyperprolific_totals.get(y).copied().unwrap_or(0).to_string()).collect(),
    );
}

/// Group aggregates and hyperprolific counts computed from a corpus.
pub fn comparison_tables<S: Scalar>(report: &ComparisonReport<S>) -> Vec<Table> {
    let mut head = vec!["Metric".to_string()];
    head.extend(report.years.iter().map(|y| y.to_string()));
    let mut groups = Table::new("groups", "Study and control groups", &[]);
    groups.header = head.clone();
    panel_rows(&mut groups, "study", &report.study, &report.years);
    panel_rows(&mut groups, "control", &report.control, &report.years);
    for (label, panel) in [("study", &report.study), ("control", &report.control)] {
        groups.footer.push(format!(
            "{label} growth: {}% distinct, {}% summed",
            opt(panel.summary.growth_pct, pct),
            opt(panel.summary.summed_growth_pct, pct)
        ));
    }

    let rule = report.hyperprolific_rule;
    let op = if rule.inclusive { ">=" } else { ">" };
    let mut hyper = Table::new("hyperprolific", &format!("Hyperprolific authors ({op} {} articles a year)", rule.threshold), &[]);
    let mut h = vec!["Institution".to_string(), "Group".to_string()];
    h.extend(report.years.iter().map(|y| y.to_string()));
    hyper.header = h;
    for (label, panel) in [("study", &report.study), ("control", &report.control)] {
        for row in &panel.hyperprolific {
            let mut cells = vec![row.institution_id.to_string(), label.to_string()];
            cells.extend(report.years.iter().map(|y| row.counts.get(y).copied().unwrap_or(0).to_string()));
            hyper.rows.push(cells);
        }
        let mut total = vec![format!("{label} total"), label.to_string()];
        total.extend(report.years.iter().map(|y| panel.hyperprolific_totals.get(y).copied().unwrap_or(0).to_string()));
        hyper.rows.push(total);
    }
    vec![groups, hyper]
}

pub fn funnel_table<S: Scalar>(result: &ScreeningResult<S>) -> Table {
    let mut t = Table::new("funnel", "Screening funnel", &["Stage", "Surviving", "Excluded"]);
    for s in &result.stages {
        t.rows.push(vec![s.stage_name.clone(), s.surviving_ids.len().to_string(), s.excluded.len().to_string()]);
    }
    t.footer.push(format!(
        "Flagged: {}",
        result.final_flagged.iter().map(|i| i.as_str()).collect::<Vec<_>>().join(", ")
    ));
    t.footer.extend(result.warnings.iter().map(|w| format!("Warning: {w}")));
    t
}

pub fn network_table(stats: &[(String, GraphStats)]) -> Table {
    let mut t = Table::new("network", "Co-authorship network footers", &["Network", "Footer"]);
    for (label, s) in stats {
        t.rows.push(vec![label.clone(), s.footer()]);
    }
    t
}
