use std::collections::{BTreeMap, HashSet};
use std::fs::File;
use std::io::BufReader;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use authsignal_core::authorship::{
    build_profile, cross_group_authors, external_authors, hyperprolific_authors, surge_detect, FlagRecord, SurgeConfig,
};
use authsignal_core::corpus::{ingest, ingest_path, Corpus, IngestOptions, InputFormat, InstitutionId, InstitutionRegistry};
use authsignal_core::export::{indicator_table, rows_to_csv, rows_to_jsonl};
use authsignal_core::network::{build_graph, cluster_graph, export_graph, graph_stats, GraphParams, GraphStats};
use authsignal_core::report::{comparison_tables, fixture_tables, funnel_table, network_table, render_markdown, Table};
use authsignal_core::screening::{compare_groups, flag_report, run_funnel, ScreeningResult};
use authsignal_core::synth::{generate, published_fixture, universe, GeneratorSpec, UniverseParams};
use authsignal_core::{Error as CoreError, Exact, Scalar};

use crate::config::RunConfig;
use crate::output::Staged;
use crate::{Cli, Command, IngestArgs, NetworkArgs, ReportArgs, ScreenArgs, SynthArgs};

pub enum Failure {
    /// Usage or configuration problem; exit code 1.
    Config(anyhow::Error),
    /// Missing or malformed data; exit code 2.
    Data(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast_ref::<CoreError>() {
            Some(
                CoreError::InvalidConfig(_)
                | CoreError::InvalidSpec(_)
                | CoreError::UnsupportedFormat { .. }
                | CoreError::Precondition(_)
                | CoreError::OverlappingGroups(_),
            ) => Failure::Config(e),
            _ => Failure::Data(e),
        }
    }
}

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        anyhow::Error::from(e).into()
    }
}

type Outcome<T = ()> = Result<T, Failure>;

fn config_error(msg: impl Into<String>) -> Failure {
    Failure::Config(anyhow!(msg.into()))
}

pub fn run(cli: Cli) -> Outcome {
    let mut cfg = RunConfig::load(cli.config.as_deref(), std::env::vars()).map_err(Failure::Config)?;
    if let Some(dir) = cli.out_dir {
        cfg.out_dir = dir;
    }
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    match cli.command {
        Command::Ingest(args) => cmd_ingest(cfg, args),
        Command::Metrics => cmd_metrics(&cfg),
        Command::Flags => cmd_flags(&cfg),
        Command::Network(args) => cmd_network(cfg, args),
        Command::Screen(args) => cmd_screen(cfg, args),
        Command::Synth(args) => cmd_synth(&cfg, args, cli.seed),
        Command::Report(args) => cmd_report(&cfg, args),
    }
}

fn report_written(paths: &[PathBuf]) {
    for p in paths {
        println!("wrote {}", p.display());
    }
}

fn load_registry(path: &Path) -> Outcome<InstitutionRegistry> {
    let file = File::open(path).with_context(|| format!("opening registry {}", path.display()))?;
    Ok(InstitutionRegistry::from_reader(BufReader::new(file)).with_context(|| format!("reading registry {}", path.display()))?)
}

fn load_corpus(cfg: &RunConfig) -> Outcome<Corpus> {
    let (corpus_path, registry_path) = (cfg.corpus_path(), cfg.registry_copy());
    if !corpus_path.exists() || !registry_path.exists() {
        return Err(Failure::Data(anyhow!(
            "no corpus artifact in {}; run `authsignal ingest` or `authsignal synth` first",
            cfg.out_dir.display()
        )));
    }
    let registry = load_registry(&registry_path)?;
    let (corpus, report) = ingest_path(&corpus_path, &registry, &IngestOptions::default())
        .with_context(|| format!("reading {}", corpus_path.display()))?;
    if report.rejected > 0 {
        return Err(Failure::Data(anyhow!(
            "{} has {} malformed lines; re-run ingest",
            corpus_path.display(),
            report.rejected
        )));
    }
    Ok(corpus)
}

fn cmd_ingest(mut cfg: RunConfig, args: IngestArgs) -> Outcome {
    if !args.inputs.is_empty() {
        cfg.inputs = args.inputs;
    }
    if args.registry.is_some() {
        cfg.registry = args.registry;
    }
    let forced = args.format.as_deref().map(str::parse::<InputFormat>).transpose()?;
    if cfg.inputs.is_empty() {
        return Err(config_error("no inputs: pass --input or set `inputs` in the config"));
    }
    let registry_path = cfg.registry.clone().ok_or_else(|| config_error("no registry: pass --registry or set `registry`"))?;
    let registry = load_registry(&registry_path)?;

    let options = IngestOptions::default();
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    let mut rejects = String::new();
    let mut summaries = Vec::new();
    for input in &cfg.inputs {
        let (corpus, report) = match forced {
            Some(fmt) => {
                let file = File::open(input).with_context(|| format!("opening {}", input.display()))?;
                ingest(BufReader::new(file), fmt, &registry, &options)
            }
            None => ingest_path(input, &registry, &options),
        }
        .with_context(|| format!("ingesting {}", input.display()))?;
        let mut duplicates = 0;
        for r in corpus.records() {
            if seen.insert(r.record_id.clone()) {
                records.push(r.clone());
            } else {
                duplicates += 1;
            }
        }
        for reject in &report.rejects {
            let line = serde_json::json!({
                "input": input.display().to_string(),
                "line_number": reject.line_number,
                "reason": reject.reason,
                "raw": reject.raw,
            });
            rejects.push_str(&line.to_string());
            rejects.push('\n');
        }
        summaries.push(serde_json::json!({
            "input": input.display().to_string(),
            "report": report,
            "duplicates_across_inputs": duplicates,
        }));
    }
    let corpus = Corpus::from_records(records, registry);
    let total_rejected: usize = summaries.iter().map(|s| s["report"]["rejected"].as_u64().unwrap_or(0) as usize).sum();

    let mut staged = Staged::default();
    staged.add(cfg.corpus_path(), corpus.to_jsonl());
    staged.add(cfg.registry_copy(), corpus.registry().to_json()?);
    staged.add(
        cfg.out_dir.join("ingest_report.json"),
        serde_json::to_string_pretty(&serde_json::json!({ "records": corpus.len(), "inputs": summaries })).map_err(anyhow::Error::from)?,
    );
    staged.add(cfg.out_dir.join("rejects.jsonl"), rejects);
    let written = staged.commit()?;
    println!("accepted {} records, rejected {} lines", corpus.len(), total_rejected);
    report_written(&written);
    Ok(())
}

fn cmd_metrics(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg)?;
    let rows = indicator_table(&corpus, &cfg.table_options())?;
    let mut staged = Staged::default();
    staged.add(cfg.out_dir.join("metrics.csv"), rows_to_csv(&rows));
    staged.add(cfg.out_dir.join("metrics.jsonl"), rows_to_jsonl(&rows));
    let written = staged.commit()?;
    println!("{} indicator rows", rows.len());
    report_written(&written);
    Ok(())
}

fn all_flags(corpus: &Corpus, cfg: &RunConfig) -> Outcome<Vec<FlagRecord>> {
    let t = &cfg.thresholds;
    let mut flags = Vec::new();
    let years = corpus.years();
    for inst in corpus.institutions() {
        for &year in &years {
            flags.extend(hyperprolific_authors(corpus, inst.as_str(), year, t.hyperprolific_rule())?);
        }
        flags.extend(external_authors(corpus, inst.as_str(), t.external_min_pubs)?);
    }
    if let Some(&last) = years.last() {
        let surge = SurgeConfig {
            ratio_threshold: t.surge_ratio,
            min_recent: t.surge_min_recent,
            ..SurgeConfig::trailing(last)
        };
        for author in corpus.authors() {
            let profile = build_profile::<Exact>(corpus, author.as_str())?;
            flags.extend(surge_detect(&profile, &surge)?);
        }
    }
    for members in cfg.table_options().groups.values() {
        if members.len() >= 2 {
            flags.extend(cross_group_authors(corpus, members, t.cross_group_min_pubs)?);
        }
    }
    Ok(flags)
}

fn cmd_flags(cfg: &RunConfig) -> Outcome {
    let corpus = load_corpus(cfg)?;
    let flags = all_flags(&corpus, cfg)?;
    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    let mut text = String::new();
    for f in &flags {
        *counts.entry(f.flag.as_str()).or_default() += 1;
        text.push_str(&f.to_json_line());
        text.push('\n');
    }
    let mut staged = Staged::default();
    staged.add(cfg.out_dir.join("flags.jsonl"), text);
    let written = staged.commit()?;
    for (kind, n) in counts {
        println!("{kind}: {n}");
    }
    report_written(&written);
    Ok(())
}

fn screen(corpus: &Corpus, cfg: &RunConfig) -> Outcome<ScreeningResult<Exact>> {
    Ok(run_funnel::<Exact>(corpus, &cfg.funnel)?)
}

/// Configured study group, or the funnel's flagged set.
fn study_group(corpus: &Corpus, cfg: &RunConfig) -> Outcome<Vec<InstitutionId>> {
    match &cfg.groups.study {
        Some(members) => Ok(members.clone()),
        None => Ok(screen(corpus, cfg)?.final_flagged),
    }
}

fn network_stats(corpus: &Corpus, cfg: &RunConfig, seed_group: &[InstitutionId], year: i32) -> Outcome<(Vec<u8>, GraphStats)> {
    let params = GraphParams {
        year,
        seed_group: seed_group.to_vec(),
        min_articles: cfg.network.min_articles,
        qualification: cfg.network.qualification,
    };
    let graph = build_graph(corpus, params)?;
    let graph = if graph.is_empty() { graph } else { cluster_graph(&graph, cfg.seed)? };
    Ok((export_graph(&graph, cfg.graph_format())?, graph_stats(&graph)))
}

fn cmd_network(mut cfg: RunConfig, args: NetworkArgs) -> Outcome {
    if let Some(f) = args.format {
        cfg.network.format = f;
    }
    if let Some(m) = args.min_articles {
        cfg.network.min_articles = m;
    }
    if args.year.is_some() {
        cfg.network.year = args.year;
    }
    cfg.validate().map_err(Failure::Config)?;
    let corpus = load_corpus(&cfg)?;
    let year = cfg.network.year.unwrap_or(cfg.funnel.end_year);
    let seed_group = study_group(&corpus, &cfg)?;
    if seed_group.is_empty() {
        return Err(config_error("no seed group: set groups.study or let the funnel flag institutions"));
    }
    let (bytes, stats) = network_stats(&corpus, &cfg, &seed_group, year)?;
    let ext = cfg.graph_format().extension();
    let mut staged = Staged::default();
    staged.add(cfg.out_dir.join(format!("network_{year}.{ext}")), bytes);
    staged.add(
        cfg.out_dir.join(format!("network_{year}_stats.json")),
        serde_json::to_string_pretty(&stats).map_err(anyhow::Error::from)?,
    );
    let written = staged.commit()?;
    println!("{}", stats.footer());
    report_written(&written);
    Ok(())
}

fn cmd_screen(mut cfg: RunConfig, args: ScreenArgs) -> Outcome {
    if let Some(n) = args.top_n {
        cfg.funnel.top_n_by_output = n;
    }
    if let Some(k) = args.top_k {
        cfg.funnel.top_k_rank = k;
    }
    cfg.validate().map_err(Failure::Config)?;
    let corpus = load_corpus(&cfg)?;
    let result = screen(&corpus, &cfg)?;
    let flags = all_flags(&corpus, &cfg)?;
    let dossiers = flag_report(&corpus, &result, &flags, None, &cfg.dossier)?;
    let summary = result.summary();
    let mut staged = Staged::default();
    staged.add(
        cfg.out_dir.join("funnel.json"),
        serde_json::to_string_pretty(&result.map_values(|v| v.raw_string())).map_err(anyhow::Error::from)?,
    );
    staged.add(cfg.out_dir.join("funnel.txt"), summary.clone());
    staged.add(
        cfg.out_dir.join("dossiers.json"),
        serde_json::to_string_pretty(&dossiers).map_err(anyhow::Error::from)?,
    );
    staged.commit()?;
    print!("{summary}");
    Ok(())
}

fn read_spec(path: &Path) -> Outcome<GeneratorSpec> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading spec {}", path.display()))?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json"));
    let parsed = if is_json {
        serde_json::from_str(&text).map_err(anyhow::Error::from)
    } else {
        toml::from_str(&text).map_err(anyhow::Error::from)
    };
    parsed.with_context(|| format!("parsing spec {}", path.display())).map_err(Failure::Config)
}

fn cmd_synth(cfg: &RunConfig, args: SynthArgs, seed: Option<u64>) -> Outcome {
    let spec = match &args.spec {
        Some(path) => {
            let mut spec = read_spec(path)?;
            if let Some(s) = seed {
                spec.seed = s;
            }
            spec
        }
        None => universe(UniverseParams {
            seed: cfg.seed,
            institutions: args.institutions,
            base_output: args.base_output,
            planted_surges: args.planted,
            author_plants: !args.no_author_plants,
        }),
    };
    let generated = generate(&spec)?;
    let mut staged = Staged::default();
    staged.add(cfg.corpus_path(), generated.corpus.to_jsonl());
    staged.add(cfg.registry_copy(), generated.corpus.registry().to_json()?);
    staged.add(cfg.out_dir.join("ground_truth.jsonl"), generated.truth_jsonl());
    staged.add(
        cfg.out_dir.join("spec.json"),
        serde_json::to_string_pretty(&spec).map_err(anyhow::Error::from)?,
    );
    let written = staged.commit()?;
    println!("{} records, {} plants", generated.corpus.len(), generated.truth.len());
    report_written(&written);
    Ok(())
}

fn world_table(cfg: &RunConfig) -> Table {
    let mut t = Table {
        slug: "world".into(),
        title: "World reference values".into(),
        header: vec!["Measure".into(), "Year".into(), "Value".into()],
        rows: vec![vec!["output growth %".into(), String::new(), cfg.world.growth_pct.to_string()]],
        footer: Vec::new(),
    };
    for (year, v) in &cfg.world.first_author {
        t.rows.push(vec!["first author %".into(), year.clone(), v.to_string()]);
    }
    for (year, v) in &cfg.world.authors_per_article {
        t.rows.push(vec!["authors per article".into(), year.clone(), v.to_string()]);
    }
    t
}

fn cmd_report(cfg: &RunConfig, args: ReportArgs) -> Outcome {
    let (title, tables) = if args.fixtures {
        ("Published tables", fixture_tables(&published_fixture()?))
    } else {
        let corpus = load_corpus(cfg)?;
        let result = screen(&corpus, cfg)?;
        let mut tables = vec![funnel_table(&result)];
        let study = cfg.groups.study.clone().unwrap_or_else(|| result.final_flagged.clone());
        let years = [cfg.funnel.start_year, cfg.funnel.end_year];
        if !study.is_empty() && !cfg.groups.control.is_empty() {
            let report = compare_groups::<Exact>(&corpus, &study, &cfg.groups.control, &years, cfg.thresholds.hyperprolific_rule())?;
            tables.extend(comparison_tables(&report));
        }
        if !study.is_empty() {
            let mut stats = Vec::new();
            for year in years {
                stats.push((format!("study {year}"), network_stats(&corpus, cfg, &study, year)?.1));
            }
            if !cfg.groups.control.is_empty() {
                for year in years {
                    stats.push((format!("control {year}"), network_stats(&corpus, cfg, &cfg.groups.control, year)?.1));
                }
            }
            tables.push(network_table(&stats));
        }
        tables.push(world_table(cfg));
        ("Screening report", tables)
    };
    let mut staged = Staged::default();
    staged.add(cfg.out_dir.join("report.md"), render_markdown(title, &tables));
    for t in &tables {
        staged.add(cfg.out_dir.join("tables").join(format!("{}.csv", t.slug)), t.to_csv());
    }
    let written = staged.commit()?;
    report_written(&written);
    Ok(())
}
