//! Flat-file formats shared between the library and the CLI: co-action
//! pair CSV, edge-list CSV, HCC and forensics CSVs, GraphML, and the
//! wire-format JSONL writers.
//!
//! Every writer emits collections in canonical sort order, so identical
//! inputs always produce byte-identical files.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use crate::coaction::CoActionPair;
use crate::forensics::{AccountProfile, ActivityTimeline, CheerleaderReport, FirstPosterGrid};
use crate::hcc::Hcc;
use crate::network::{CoordinationNetwork, EdgeEvidence};
use crate::post::{ActionType, Post};
use crate::synth::GroundTruth;
use crate::{Error, Result};

fn csv_error(context: &str, err: csv::Error) -> Error {
    Error::Parse(format!("{context}: {err}"))
}

/// Write the canonical co-action pair CSV:
/// `account_a,account_b,action_type,reason,t_a,t_b,window_index`.
pub fn write_pairs_csv<W: Write>(writer: W, pairs: &[CoActionPair]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        "account_a",
        "account_b",
        "action_type",
        "reason",
        "t_a",
        "t_b",
        "window_index",
    ])
    .map_err(|e| csv_error("pairs csv", e))?;
    for pair in pairs {
        csv.write_record([
            pair.account_a.as_str(),
            pair.account_b.as_str(),
            pair.action_type.as_str(),
            pair.reason.as_str(),
            &pair.t_a.to_string(),
            &pair.t_b.to_string(),
            &pair.window_index.to_string(),
        ])
        .map_err(|e| csv_error("pairs csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Read a co-action pair CSV back into memory.
pub fn read_pairs_csv<R: Read>(reader: R) -> Result<Vec<CoActionPair>> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut pairs = Vec::new();
    for (lineno, record) in csv.records().enumerate() {
        let record = record.map_err(|e| csv_error("pairs csv", e))?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::Parse(format!("pairs csv record {}: missing field {i}", lineno + 1)))
        };
        let parse_i64 = |i: usize| -> Result<i64> {
            field(i)?
                .parse()
                .map_err(|_| Error::Parse(format!("pairs csv record {}: bad integer", lineno + 1)))
        };
        pairs.push(CoActionPair {
            account_a: field(0)?.to_string(),
            account_b: field(1)?.to_string(),
            action_type: ActionType::from_str(field(2)?)
                .map_err(|e| Error::Parse(format!("pairs csv record {}: {e}", lineno + 1)))?,
            reason: field(3)?.to_string(),
            t_a: parse_i64(4)?,
            t_b: parse_i64(5)?,
            window_index: field(6)?.parse().map_err(|_| {
                Error::Parse(format!("pairs csv record {}: bad window index", lineno + 1))
            })?,
        });
    }
    Ok(pairs)
}

fn render_reasons(reasons: &BTreeMap<(ActionType, String), u64>) -> String {
    // Distinct (type, reason) items; multiplicity lives in pair_count.
    reasons
        .keys()
        .map(|(ty, reason)| format!("{}:{}", ty.as_str(), reason))
        .collect::<Vec<_>>()
        .join("|")
}

fn parse_reasons(text: &str) -> Result<BTreeMap<(ActionType, String), u64>> {
    let mut reasons = BTreeMap::new();
    if text.is_empty() {
        return Ok(reasons);
    }
    for item in text.split('|') {
        let (ty, value) = item
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("bad reason item {item:?}")))?;
        reasons.insert((ActionType::from_str(ty).map_err(|e| Error::Parse(e.to_string()))?, value.to_string()), 1);
    }
    Ok(reasons)
}

/// Write the edge-list CSV:
/// `source,target,weight,pair_count,inferred,reasons` with reasons encoded
/// as `type:value` items joined by `|`.
pub fn write_edges_csv<W: Write>(writer: W, cn: &CoordinationNetwork) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["source", "target", "weight", "pair_count", "inferred", "reasons"])
        .map_err(|e| csv_error("edges csv", e))?;
    for ((a, b), evidence) in cn.edges() {
        csv.write_record([
            a.as_str(),
            b.as_str(),
            &evidence.weight.to_string(),
            &evidence.pair_count.to_string(),
            if evidence.inferred { "true" } else { "false" },
            &render_reasons(&evidence.reasons),
        ])
        .map_err(|e| csv_error("edges csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Read an edge-list CSV back into a network. Reason multiplicities are
/// not encoded in the file, so each listed reason comes back with count 1;
/// `pair_count` carries the totals.
pub fn read_edges_csv<R: Read>(reader: R) -> Result<CoordinationNetwork> {
    let mut csv = csv::Reader::from_reader(reader);
    let mut cn = CoordinationNetwork::new();
    for (lineno, record) in csv.records().enumerate() {
        let record = record.map_err(|e| csv_error("edges csv", e))?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::Parse(format!("edges csv record {}: missing field {i}", lineno + 1)))
        };
        let weight: f64 = field(2)?
            .parse()
            .map_err(|_| Error::Parse(format!("edges csv record {}: bad weight", lineno + 1)))?;
        let pair_count: u64 = field(3)?
            .parse()
            .map_err(|_| Error::Parse(format!("edges csv record {}: bad pair count", lineno + 1)))?;
        let inferred = match field(4)? {
            "true" => true,
            "false" => false,
            other => {
                return Err(Error::Parse(format!(
                    "edges csv record {}: bad inferred flag {other:?}",
                    lineno + 1
                )))
            }
        };
        cn.insert_edge(
            field(0)?,
            field(1)?,
            EdgeEvidence {
                weight,
                pair_count,
                reasons: parse_reasons(field(5)?)?,
                inferred,
            },
        )?;
    }
    Ok(cn)
}

fn xml_escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
        .replace('\'', "&apos;")
}

/// Emit the network as GraphML with `weight` and `inferred` edge
/// attributes.
pub fn write_graphml<W: Write>(mut writer: W, cn: &CoordinationNetwork) -> Result<()> {
    writeln!(writer, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(
        writer,
        r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#
    )?;
    writeln!(
        writer,
        r#"  <key id="weight" for="edge" attr.name="weight" attr.type="double"/>"#
    )?;
    writeln!(
        writer,
        r#"  <key id="inferred" for="edge" attr.name="inferred" attr.type="boolean"/>"#
    )?;
    writeln!(writer, r#"  <graph id="coordination" edgedefault="undirected">"#)?;
    for node in &cn.nodes {
        writeln!(writer, r#"    <node id="{}"/>"#, xml_escape(node))?;
    }
    for ((a, b), evidence) in cn.edges() {
        writeln!(
            writer,
            r#"    <edge source="{}" target="{}"><data key="weight">{}</data><data key="inferred">{}</data></edge>"#,
            xml_escape(a),
            xml_escape(b),
            evidence.weight,
            evidence.inferred
        )?;
    }
    writeln!(writer, "  </graph>")?;
    writeln!(writer, "</graphml>")?;
    Ok(())
}

/// Write the community summary CSV:
/// `hcc_id,size,total_weight,star_hub,star_coefficient`.
pub fn write_hccs_csv<W: Write>(writer: W, hccs: &[Hcc]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["hcc_id", "size", "total_weight", "star_hub", "star_coefficient"])
        .map_err(|e| csv_error("hccs csv", e))?;
    for hcc in hccs {
        csv.write_record([
            &hcc.id.to_string(),
            &hcc.accounts.len().to_string(),
            &hcc.total_weight.to_string(),
            hcc.star_hub.as_deref().unwrap_or(""),
            &hcc.star_coefficient.to_string(),
        ])
        .map_err(|e| csv_error("hccs csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Write one community's induced edges, same columns as the edge CSV.
pub fn write_hcc_edges_csv<W: Write>(writer: W, hcc: &Hcc) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["source", "target", "weight", "pair_count", "inferred", "reasons"])
        .map_err(|e| csv_error("hcc edges csv", e))?;
    for ((a, b), evidence) in &hcc.edges {
        csv.write_record([
            a.as_str(),
            b.as_str(),
            &evidence.weight.to_string(),
            &evidence.pair_count.to_string(),
            if evidence.inferred { "true" } else { "false" },
            &render_reasons(&evidence.reasons),
        ])
        .map_err(|e| csv_error("hcc edges csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Write a first-poster grid: `row,column,total,row_first,ties`. Only
/// cells with co-actions appear; the diagonal never does.
pub fn write_grid_csv<W: Write>(writer: W, grid: &FirstPosterGrid) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["row", "column", "total", "row_first", "ties"])
        .map_err(|e| csv_error("grid csv", e))?;
    for ((row, column), stats) in &grid.cells {
        csv.write_record([
            row.as_str(),
            column.as_str(),
            &stats.total.to_string(),
            &stats.row_first.to_string(),
            &grid.ties(row, column).to_string(),
        ])
        .map_err(|e| csv_error("grid csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Write cheerleader reports:
/// `account,partner,total,follower_fraction,flagged`.
pub fn write_cheerleaders_csv<W: Write>(writer: W, reports: &[CheerleaderReport]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["account", "partner", "total", "follower_fraction", "flagged"])
        .map_err(|e| csv_error("cheerleaders csv", e))?;
    for report in reports {
        csv.write_record([
            report.account.as_str(),
            report.partner.as_str(),
            &report.total.to_string(),
            &report.follower_fraction.to_string(),
            if report.flagged { "true" } else { "false" },
        ])
        .map_err(|e| csv_error("cheerleaders csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Write account profiles:
/// `account,tweets,age_days,tweets_per_day,bot_rating,friends,followers,reputation`.
/// Unknown ages and ratings leave their fields empty.
pub fn write_profiles_csv<W: Write>(writer: W, profiles: &[AccountProfile]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record([
        "account",
        "tweets",
        "age_days",
        "tweets_per_day",
        "bot_rating",
        "friends",
        "followers",
        "reputation",
    ])
    .map_err(|e| csv_error("profiles csv", e))?;
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for profile in profiles {
        csv.write_record([
            profile.account.as_str(),
            &profile.tweets.to_string(),
            &opt(profile.age_days),
            &opt(profile.tweets_per_day),
            &opt(profile.bot_rating),
            &profile.friends.to_string(),
            &profile.followers.to_string(),
            &profile.reputation.to_string(),
        ])
        .map_err(|e| csv_error("profiles csv", e))?;
    }
    csv.flush()?;
    Ok(())
}

/// Write activity timelines: `account,bucket_start,count`, one block per
/// account in the given order.
pub fn write_timelines_csv<W: Write>(writer: W, timelines: &[ActivityTimeline]) -> Result<()> {
    let mut csv = csv::Writer::from_writer(writer);
    csv.write_record(["account", "bucket_start", "count"])
        .map_err(|e| csv_error("timeline csv", e))?;
    for timeline in timelines {
        for &(bucket_start, count) in &timeline.counts {
            csv.write_record([
                timeline.account.as_str(),
                &bucket_start.to_string(),
                &count.to_string(),
            ])
            .map_err(|e| csv_error("timeline csv", e))?;
        }
    }
    csv.flush()?;
    Ok(())
}

/// Write posts in the wire JSONL format.
pub fn write_posts_jsonl<W: Write>(mut writer: W, posts: &[Post]) -> Result<()> {
    for post in posts {
        writeln!(writer, "{}", post.to_json_line())?;
    }
    Ok(())
}

/// Write a ground-truth file.
pub fn write_truth_jsonl<W: Write>(mut writer: W, truth: &GroundTruth) -> Result<()> {
    writer.write_all(truth.to_jsonl().as_bytes())?;
    Ok(())
}

/// Write a file atomically: the content lands under a temporary name in
/// the target directory and is renamed into place.
pub fn atomic_write(path: &Path, contents: &[u8]) -> Result<()> {
    let directory = path.parent().unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(directory)?;
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::Config(format!("not a writable path: {}", path.display())))?;
    let mut tmp = directory.join(file_name);
    tmp.set_extension(format!(
        "{}.tmp{}",
        path.extension().and_then(|e| e.to_str()).unwrap_or(""),
        std::process::id()
    ));
    std::fs::write(&tmp, contents)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}
