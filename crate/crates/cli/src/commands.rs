use std::collections::BTreeMap;
use std::io::BufReader;

use anyhow::{bail, Context, Result};
use cubekit_core::clients::{transport_from_spec, JsonClient};
use cubekit_core::extraction::{
    extract_all, parse_kb_dump, rank_by_popularity, refine_with_llm, render_prompts,
    ArtifactRecord, ParseMode, RootSet,
};
use cubekit_core::pipeline::{
    aggregate, build_eval_plan, content_digest, map_images, read_mapped_csv, read_mapped_jsonl,
    score_batches, write_mapped_csv, EvalPlan, FileQuality, PlanOverrides, QualityProvider,
    UniformQuality,
};
use cubekit_core::stats::{
    correlate_all, read_ratings, read_series, summarize_ratings, StatsReport,
};
use cubekit_core::tablecheck::{check_table, parse_table, shipped_table};
use cubekit_core::{KernelConfig, KernelPreset};
use serde_json::json;

use crate::output::{fixed, read_input, write_atomic, write_csv, write_json, write_jsonl};
use crate::{
    ExtractArgs, MapArgs, PlanArgs, PlanOpts, PromptsArgs, ScoreArgs, StatsArgs, Status,
    TablecheckArgs,
};

fn client(spec: &str) -> Result<JsonClient<Box<dyn cubekit_core::clients::Transport>>> {
    Ok(JsonClient::new(transport_from_spec(spec)?))
}

pub fn extract(args: &ExtractArgs, parallel: usize) -> Result<Status> {
    let roots: Vec<RootSet> = match &args.roots {
        Some(path) => serde_json::from_slice(&read_input(path)?)
            .with_context(|| format!("parsing roots file {}", path.display()))?,
        None => RootSet::defaults(),
    };
    let mode = if args.lenient {
        ParseMode::Lenient
    } else {
        ParseMode::Strict
    };
    let file =
        std::fs::File::open(&args.kb).with_context(|| format!("reading {}", args.kb.display()))?;
    let (graph, report) = parse_kb_dump(BufReader::new(file), mode)
        .with_context(|| format!("parsing {}", args.kb.display()))?;
    for warning in &report.warnings {
        eprintln!("warning: {warning}");
    }
    let mut records = extract_all(&graph, &roots, args.hops)?;

    if let Some(spec) = &args.refine {
        let refiner = client(spec)?;
        let mut refined = Vec::new();
        let mut concepts: Vec<_> = records.iter().map(|r| r.concept).collect();
        concepts.dedup();
        concepts.sort();
        concepts.dedup();
        for concept in concepts {
            let subset: Vec<ArtifactRecord> = records
                .iter()
                .filter(|r| r.concept == concept)
                .cloned()
                .collect();
            refined.extend(refine_with_llm(&subset, concept, &refiner, parallel)?);
        }
        records = refined;
    }

    write_jsonl(&args.out.join("artifacts.jsonl"), &records)?;
    write_csv(&args.out.join("artifacts.csv"), |w| {
        w.write_record([
            "node_id",
            "label",
            "concept",
            "art_subkind",
            "country",
            "continent",
            "hop",
            "provenance",
        ])?;
        for r in &records {
            w.write_record([
                r.node_id.as_str(),
                &r.label,
                &r.concept.to_string(),
                &r.art_subkind.map(|s| s.to_string()).unwrap_or_default(),
                &r.country,
                r.continent.as_str(),
                &r.hop.map(|h| h.to_string()).unwrap_or_default(),
                serde_json::to_value(r.provenance)?
                    .as_str()
                    .unwrap_or_default(),
            ])?;
        }
        Ok(())
    })?;

    if let Some(spec) = &args.popularity {
        let ranking = rank_by_popularity(&records, &client(spec)?, parallel);
        if ranking.failures > 0 {
            eprintln!("warning: {} popularity lookups failed", ranking.failures);
        }
        write_csv(&args.out.join("popularity.csv"), |w| {
            w.write_record(["rank", "node_id", "label", "country", "score"])?;
            for (i, (r, score)) in ranking.entries.iter().enumerate() {
                w.write_record([
                    &(i + 1).to_string(),
                    &r.node_id,
                    &r.label,
                    &r.country,
                    &score.to_string(),
                ])?;
            }
            Ok(())
        })?;
    }

    let mut per_hop: BTreeMap<String, usize> = BTreeMap::new();
    let mut per_country: BTreeMap<&str, usize> = BTreeMap::new();
    for r in &records {
        let hop = r.hop.map_or_else(|| "llm".to_string(), |h| h.to_string());
        *per_hop.entry(hop).or_default() += 1;
        *per_country.entry(&r.country).or_default() += 1;
    }
    let join = |m: Vec<(String, usize)>| {
        m.into_iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    println!(
        "nodes {} edges {} lines {} skipped {}",
        graph.len(),
        graph.reverse_edge_count(),
        report.lines,
        report.skipped
    );
    println!("artifacts {}", records.len());
    println!("per hop: {}", join(per_hop.into_iter().collect()));
    println!(
        "per country: {}",
        join(
            per_country
                .into_iter()
                .map(|(k, v)| (k.to_string(), v))
                .collect()
        )
    );
    Ok(Status::Ok)
}

pub fn prompts(args: &PromptsArgs) -> Result<Status> {
    let text =
        String::from_utf8(read_input(&args.artifacts)?).context("artifacts file is not UTF-8")?;
    let mut out = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record: ArtifactRecord = serde_json::from_str(line)
            .with_context(|| format!("line {}: bad artifact record", idx + 1))?;
        if args.concept.is_some_and(|c| c != record.concept) {
            continue;
        }
        out.extend(render_prompts(
            std::slice::from_ref(&record),
            record.concept,
        )?);
    }
    write_jsonl(&args.out, &out)?;
    println!("prompts {}", out.len());
    Ok(Status::Ok)
}

fn build_plan(opts: &PlanOpts) -> Result<EvalPlan> {
    let overrides = PlanOverrides {
        template_count: opts.templates,
        templates: None,
        seed_batches: opts.seed_batches,
        batch_size: opts.batch_size,
        start_seed: opts.start_seed,
    };
    Ok(build_eval_plan(
        opts.concept,
        opts.culture.as_deref(),
        &overrides,
    )?)
}

pub fn plan(args: &PlanArgs) -> Result<Status> {
    let plan = build_plan(&args.plan)?;
    let images: Vec<_> = plan
        .images()
        .into_iter()
        .map(|img| {
            json!({
                "image_id": img.image_id,
                "template_index": img.template_index,
                "seed": img.seed,
                "batch": plan.batch_of(img.seed),
                "prompt": plan.templates[img.template_index],
            })
        })
        .collect();
    write_json(
        &args.out,
        &json!({
            "plan": plan,
            "total_images": plan.total_images(),
            "repetitions": plan.repetitions(),
            "images": images,
        }),
    )?;
    println!(
        "images {} repetitions {}",
        plan.total_images(),
        plan.repetitions()
    );
    Ok(Status::Ok)
}

pub fn map(args: &MapArgs, parallel: usize) -> Result<Status> {
    let plan = build_plan(&args.plan)?;
    let mapper = client(&args.mapper)?;
    let retriever = client(args.retriever.as_deref().unwrap_or(&args.mapper))?;
    let run = map_images(
        &plan.images(),
        plan.concept,
        plan.culture.as_deref(),
        &mapper,
        &retriever,
        parallel,
    )?;
    let mut buf = Vec::new();
    write_mapped_csv(&mut buf, &run.mapped)?;
    write_atomic(&args.out.join("mapped.csv"), &buf)?;
    let unmappable: Vec<_> = run
        .unmappable
        .iter()
        .map(|(id, stage)| json!({"image_id": id, "stage": stage}))
        .collect();
    write_json(
        &args.out.join("mapping.json"),
        &json!({
            "plan": plan,
            "mapper": mapper.describe(),
            "retriever": retriever.describe(),
            "mapped": run.mapped.len(),
            "unmappable": unmappable,
            "filtered": run.filtered,
        }),
    )?;
    println!(
        "mapped {} unmappable {} filtered {}",
        run.mapped.len(),
        run.unmappable.len(),
        run.filtered.len()
    );
    Ok(Status::Ok)
}

fn resolve_presets(names: &[String], q: f64) -> Result<Vec<KernelConfig>> {
    let mut presets: Vec<KernelPreset> = Vec::new();
    for name in names {
        let name = name.trim();
        if name.eq_ignore_ascii_case("all") {
            presets.extend(KernelPreset::ALL);
        } else {
            presets.push(name.parse()?);
        }
    }
    let mut seen = Vec::new();
    presets.retain(|p| {
        let fresh = !seen.contains(p);
        seen.push(*p);
        fresh
    });
    if presets.is_empty() {
        bail!("no kernel preset selected");
    }
    presets.into_iter().map(|p| Ok(p.config(q)?)).collect()
}

pub fn score(args: &ScoreArgs) -> Result<Status> {
    let plan = build_plan(&args.plan)?;
    let cfgs = resolve_presets(&args.presets, args.q)?;
    let mapped_bytes = read_input(&args.mapped)?;
    let is_jsonl = args.mapped.extension().is_some_and(|e| e == "jsonl");
    let mapped = if is_jsonl {
        read_mapped_jsonl(mapped_bytes.as_slice())
    } else {
        read_mapped_csv(mapped_bytes.as_slice())
    }
    .with_context(|| format!("reading {}", args.mapped.display()))?;

    let mut digests = BTreeMap::new();
    digests.insert("mapped".to_string(), content_digest(&mapped_bytes));
    let file_quality;
    let quality: &dyn QualityProvider = match &args.quality {
        Some(path) if !args.uniform_quality => {
            let bytes = read_input(path)?;
            digests.insert("quality".to_string(), content_digest(&bytes));
            file_quality = FileQuality::from_reader(bytes.as_slice())
                .with_context(|| format!("reading {}", path.display()))?;
            &file_quality
        }
        _ => &UniformQuality,
    };

    let run = score_batches(&plan, &mapped, &cfgs, quality)?;
    let mut report = aggregate(&run, &cfgs, &mapped)?;
    report.provenance.plan = Some(plan);
    report.provenance.client_digests = digests;
    report.provenance.uniform_quality = args.uniform_quality;

    write_atomic(&args.out.join("report.json"), report.to_json().as_bytes())?;
    let mut table = Vec::new();
    report.write_table_csv(&mut table)?;
    write_atomic(&args.out.join("table.csv"), &table)?;
    let mut countries = Vec::new();
    report.write_country_csv(&mut countries)?;
    write_atomic(&args.out.join("countries.csv"), &countries)?;
    write_csv(&args.out.join("batches.csv"), |w| {
        w.write_record([
            "template_index",
            "batch_index",
            "kernel",
            "n",
            "excluded",
            "vs",
            "vs_bar",
            "mean_quality",
            "cd",
        ])?;
        for s in &run.scores {
            w.write_record([
                s.template_index.to_string(),
                s.batch_index.to_string(),
                s.config.label(),
                s.result.n.to_string(),
                s.excluded_count.to_string(),
                format!("{:.6}", s.result.vs),
                format!("{:.6}", s.result.vs_bar()),
                format!("{:.6}", s.result.mean_quality),
                format!("{:.6}", s.result.cd),
            ])?;
        }
        Ok(())
    })?;

    for c in &report.configs {
        println!(
            "{:<17} q {}  VS_bar {}  CD {} (std {})  reps {}",
            c.label,
            fixed(c.mean_quality, 2),
            fixed(c.mean_vs_bar, 2),
            fixed(c.mean_cd, 2),
            fixed(c.std_cd, 2),
            c.repetitions
        );
    }
    if !run.excluded.is_empty() {
        println!("excluded batches {}", run.excluded.len());
    }
    Ok(Status::Ok)
}

pub fn stats(args: &StatsArgs) -> Result<Status> {
    if args.ratings.is_none() && args.series.is_none() {
        bail!("pass --ratings, --series or both");
    }
    let mut report = StatsReport::default();
    if let Some(path) = &args.ratings {
        let triples = read_ratings(read_input(path)?.as_slice())
            .with_context(|| format!("reading {}", path.display()))?;
        report.questions = summarize_ratings(&triples);
    }
    if let Some(path) = &args.series {
        let series = read_series(read_input(path)?.as_slice())
            .with_context(|| format!("reading {}", path.display()))?;
        report.correlations = correlate_all(&series);
    }
    write_json(&args.out.join("stats.json"), &report)?;
    let opt = |v: Option<f64>, d: usize| v.map(|v| fixed(v, d)).unwrap_or_default();
    write_csv(&args.out.join("agreement.csv"), |w| {
        w.write_record([
            "question",
            "items",
            "consensus_mean",
            "consensus_std",
            "majority_agreement",
            "krippendorff_alpha",
        ])?;
        for q in &report.questions {
            let consensus = q.consensus.as_ref().and_then(|c| c.value);
            w.write_record([
                q.question.to_string(),
                q.items.to_string(),
                opt(consensus.map(|c| c.mean), 1),
                opt(consensus.map(|c| c.std), 1),
                opt(q.majority_agreement.value, 1),
                opt(q.krippendorff_alpha.value, 3),
            ])?;
        }
        Ok(())
    })?;
    write_csv(&args.out.join("correlations.csv"), |w| {
        w.write_record(["x", "y", "pearson"])?;
        for c in &report.correlations {
            w.write_record([c.x.clone(), c.y.clone(), opt(c.pearson.value, 2)])?;
        }
        Ok(())
    })?;
    for q in &report.questions {
        let alpha = match (&q.krippendorff_alpha.value, &q.krippendorff_alpha.reason) {
            (Some(a), _) => fixed(*a, 3),
            (None, Some(reason)) => format!("null ({reason})"),
            (None, None) => "null".into(),
        };
        println!(
            "{}: items {} majority {}% alpha {}",
            q.question,
            q.items,
            opt(q.majority_agreement.value, 1),
            alpha
        );
    }
    for c in &report.correlations {
        let rho = c.pearson.value.map_or_else(
            || {
                format!(
                    "null ({})",
                    c.pearson.reason.as_deref().unwrap_or("undefined")
                )
            },
            |v| fixed(v, 2),
        );
        println!("pearson({}, {}) = {rho}", c.x, c.y);
    }
    Ok(Status::Ok)
}

pub fn tablecheck(args: &TablecheckArgs) -> Result<Status> {
    let cells = match &args.table {
        Some(path) => {
            let text = String::from_utf8(read_input(path)?).context("table is not UTF-8")?;
            parse_table(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => shipped_table(),
    };
    let report = check_table(&cells, args.tolerance);
    if let Some(out) = &args.out {
        write_json(out, &report)?;
    }
    for f in report.failures() {
        println!(
            "FAIL {} {} {}: {} x {} = {} vs {} (residual {})",
            f.cell.model,
            f.cell.concept,
            f.cell.kernel.as_str(),
            f.cell.q,
            f.cell.vs_bar,
            fixed(f.product, 4),
            f.cell.cd,
            fixed(f.residual, 4)
        );
    }
    let failed = report.failures().count();
    println!(
        "cells {} failed {} max residual {} tolerance {}",
        report.cells.len(),
        failed,
        fixed(report.max_residual, 4),
        report.tolerance
    );
    Ok(if failed == 0 {
        Status::Ok
    } else {
        Status::CheckFailed
    })
}
