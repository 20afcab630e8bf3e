//! Ranking files, cluster-profile tables, model export and label files.
//!
//! Ranking CSV files carry scores with 6 decimals for reading; the JSON form
//! keeps full precision so that it parses back to the identical ranking.

use std::collections::BTreeMap;
use std::io::{Read, Write};

use edgeattr_core::eval::Label;
use edgeattr_core::model::ClusterModel;
use edgeattr_core::rank::{AbnormalityRanking, RankedNode};
use edgeattr_core::score::{Contribution, ScoreBreakdown};
use serde::{Deserialize, Serialize};

use crate::error::LineError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

fn line_err(line: u64, message: impl Into<String>) -> LineError {
    LineError { line, message: message.into() }
}

fn entries(ranking: &AbnormalityRanking, top_k: Option<usize>) -> &[RankedNode] {
    let n = top_k.map_or(ranking.len(), |k| k.min(ranking.len()));
    &ranking.entries[..n]
}

/// Contribution column names (`relation.attribute`) of the ranking.
///
/// Every breakdown of a ranking lists the same pairs in the same order; the
/// model supplies them when the ranking is empty.
fn contribution_columns(ranking: &AbnormalityRanking, model: &ClusterModel) -> Vec<String> {
    match ranking.entries.first() {
        Some(e) => e.breakdown.contributions.iter().map(|c| format!("{}.{}", c.relation, c.attribute)).collect(),
        None => model
            .for_object_type(&ranking.object_type)
            .map(|m| format!("{}.{}", m.relation, m.attribute))
            .collect(),
    }
}

/// Writes `rank,node,score,<relation.attribute>...`, scores with 6 decimals.
pub fn write_ranking_csv<W: Write>(
    ranking: &AbnormalityRanking,
    model: &ClusterModel,
    top_k: Option<usize>,
    writer: W,
) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    let mut header = vec!["rank".to_string(), "node".to_string(), "score".to_string()];
    header.extend(contribution_columns(ranking, model));
    w.write_record(&header)?;
    for e in entries(ranking, top_k) {
        let mut row = vec![e.rank.to_string(), e.node().to_string(), format!("{:.6}", e.score())];
        row.extend(e.breakdown.contributions.iter().map(|c| format!("{:.6}", c.bits)));
        w.write_record(&row)?;
    }
    w.flush()
}

#[derive(Serialize, Deserialize)]
struct RankingDoc {
    object_type: String,
    entries: Vec<EntryDoc>,
}

#[derive(Serialize, Deserialize)]
struct EntryDoc {
    rank: usize,
    node: String,
    score: f64,
    contributions: Vec<Contribution>,
    cardinalities: Vec<CardinalityDoc>,
}

#[derive(Serialize, Deserialize)]
struct CardinalityDoc {
    relation: String,
    edges: usize,
}

/// Writes the ranking as JSON with full-precision scores.
pub fn write_ranking_json<W: Write>(ranking: &AbnormalityRanking, top_k: Option<usize>, mut writer: W) -> std::io::Result<()> {
    let doc = RankingDoc {
        object_type: ranking.object_type.clone(),
        entries: entries(ranking, top_k)
            .iter()
            .map(|e| EntryDoc {
                rank: e.rank,
                node: e.breakdown.node.clone(),
                score: e.breakdown.total,
                contributions: e.breakdown.contributions.clone(),
                cardinalities: e
                    .breakdown
                    .cardinalities
                    .iter()
                    .map(|(relation, edges)| CardinalityDoc { relation: relation.clone(), edges: *edges })
                    .collect(),
            })
            .collect(),
    };
    serde_json::to_writer_pretty(&mut writer, &doc)?;
    writer.write_all(b"\n")
}

/// Reads a ranking written by [`write_ranking_json`].
pub fn read_ranking_json<R: Read>(reader: R) -> serde_json::Result<AbnormalityRanking> {
    let doc: RankingDoc = serde_json::from_reader(reader)?;
    Ok(AbnormalityRanking {
        object_type: doc.object_type,
        entries: doc
            .entries
            .into_iter()
            .map(|e| RankedNode {
                rank: e.rank,
                breakdown: ScoreBreakdown {
                    node: e.node,
                    total: e.score,
                    contributions: e.contributions,
                    cardinalities: e.cardinalities.into_iter().map(|c| (c.relation, c.edges)).collect(),
                },
            })
            .collect(),
    })
}

/// Reads a ranking CSV in file order. Scores carry the file's 6-decimal
/// precision and edge counts are not recorded, so cardinalities are empty.
pub fn read_ranking_csv<R: Read>(reader: R, object_type: &str) -> Result<AbnormalityRanking, LineError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let header = rdr.headers().map_err(|e| line_err(1, e.to_string()))?.clone();
    if header.len() < 3 || &header[0] != "rank" || &header[1] != "node" || &header[2] != "score" {
        return Err(line_err(1, "header must start with rank,node,score"));
    }
    let columns: Vec<(String, String)> = header
        .iter()
        .skip(3)
        .map(|c| match c.split_once('.') {
            Some((r, a)) => Ok((r.to_string(), a.to_string())),
            None => Err(line_err(1, format!("contribution column \"{c}\" is not relation.attribute"))),
        })
        .collect::<Result<_, _>>()?;
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| line_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        let num = |i: usize| -> Result<f64, LineError> {
            rec[i].trim().parse().map_err(|_| line_err(line, format!("invalid number \"{}\"", &rec[i])))
        };
        let rank = rec[0].trim().parse().map_err(|_| line_err(line, format!("invalid rank \"{}\"", &rec[0])))?;
        let contributions = columns
            .iter()
            .enumerate()
            .map(|(i, (r, a))| Ok(Contribution { relation: r.clone(), attribute: a.clone(), bits: num(3 + i)? }))
            .collect::<Result<_, LineError>>()?;
        out.push(RankedNode {
            rank,
            breakdown: ScoreBreakdown { node: rec[1].to_string(), total: num(2)?, contributions, cardinalities: Vec::new() },
        });
    }
    Ok(AbnormalityRanking { object_type: object_type.to_string(), entries: out })
}

/// Writes one row per (model, cluster, bin):
/// `object_type,relation,attribute,cluster,rho,bin,bin_label,mass`.
pub fn write_cluster_profiles<W: Write>(model: &ClusterModel, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["object_type", "relation", "attribute", "cluster", "rho", "bin", "bin_label", "mass"])?;
    for m in &model.entries {
        for (g, (center, rho)) in m.clusters.centers.iter().zip(&m.clusters.proportions).enumerate() {
            let rho = rho.to_string();
            for (b, mass) in center.iter().enumerate() {
                w.write_record([
                    m.object_type.as_str(),
                    &m.relation,
                    &m.attribute,
                    &g.to_string(),
                    &rho,
                    &b.to_string(),
                    &m.bins.label(b),
                    &mass.to_string(),
                ])?;
            }
        }
    }
    w.flush()
}

pub fn write_model<W: Write>(model: &ClusterModel, mut writer: W) -> std::io::Result<()> {
    serde_json::to_writer_pretty(&mut writer, model)?;
    writer.write_all(b"\n")
}

pub fn read_model<R: Read>(reader: R) -> serde_json::Result<ClusterModel> {
    serde_json::from_reader(reader)
}

fn label_text(label: &Label) -> String {
    match label {
        Label::Honest => "honest".into(),
        Label::Fraud(pattern) => format!("fraud:{pattern}"),
    }
}

/// Writes `node,label` rows (`honest` or `fraud:<pattern>`) in id order.
pub fn write_labels<W: Write>(labels: &BTreeMap<String, Label>, writer: W) -> std::io::Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["node", "label"])?;
    for (node, label) in labels {
        w.write_record([node.as_str(), &label_text(label)])?;
    }
    w.flush()
}

/// Reads a `node,label` file; a bare `fraud` means fraud with no pattern name.
pub fn read_labels<R: Read>(reader: R) -> Result<BTreeMap<String, Label>, LineError> {
    let mut rdr = csv::ReaderBuilder::new().from_reader(reader);
    let mut out = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| line_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
        let line = rec.position().map_or(0, |p| p.line());
        if rec.len() != 2 {
            return Err(line_err(line, format!("expected 2 columns, found {}", rec.len())));
        }
        let label = match rec[1].trim() {
            "honest" => Label::Honest,
            "fraud" => Label::Fraud(String::new()),
            other => match other.strip_prefix("fraud:") {
                Some(p) => Label::Fraud(p.to_string()),
                None => return Err(line_err(line, format!("unknown label \"{other}\""))),
            },
        };
        if out.insert(rec[0].trim().to_string(), label).is_some() {
            return Err(line_err(line, format!("node \"{}\" labeled twice", rec[0].trim())));
        }
    }
    Ok(out)
}

/// Writes a `k,precision` table with 3 decimals.
pub fn write_precision_table<W: Write>(rows: &[(usize, f64)], mut writer: W) -> std::io::Result<()> {
    writeln!(writer, "k,precision")?;
    for (k, p) in rows {
        writeln!(writer, "{k},{p:.3}")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use edgeattr_core::cluster::ClusterSet;
    use edgeattr_core::discretize::BinSpec;
    use edgeattr_core::graph::AttributeKind;
    use edgeattr_core::model::AttributeModel;
    use edgeattr_core::rank::rank;

    fn breakdown(node: &str, a: f64, b: f64) -> ScoreBreakdown {
        ScoreBreakdown {
            node: node.into(),
            total: a + b,
            contributions: vec![
                Contribution { relation: "rates".into(), attribute: "stars".into(), bits: a },
                Contribution { relation: "rates".into(), attribute: "ts".into(), bits: b },
            ],
            cardinalities: vec![("rates".into(), 3)],
        }
    }

    fn ranking() -> AbnormalityRanking {
        rank(vec![breakdown("u1", 1.0 / 3.0, 2.5), breakdown("u2", 10.125, 0.1), breakdown("u3", 0.0, 0.0)], "user")
    }

    fn model() -> ClusterModel {
        ClusterModel {
            entries: vec![AttributeModel {
                object_type: "user".into(),
                relation: "rates".into(),
                attribute: "ts".into(),
                kind: AttributeKind::Temporal,
                bins: BinSpec::logarithmic(1.0, 1e4, 4),
                clusters: ClusterSet {
                    centers: vec![vec![0.1, 0.2, 0.3, 0.4], vec![1.0, 0.0, 0.0, 0.0]],
                    proportions: vec![0.75, 0.25],
                    assignment: vec![],
                },
            }],
        }
    }

    #[test]
    fn csv_layout_and_top_k() {
        let mut out = Vec::new();
        write_ranking_csv(&ranking(), &ClusterModel::default(), Some(2), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "rank,node,score,rates.stars,rates.ts\n1,u2,10.225000,10.125000,0.100000\n2,u1,2.833333,0.333333,2.500000\n"
        );
    }

    #[test]
    fn csv_contributions_sum_to_score() {
        let mut out = Vec::new();
        write_ranking_csv(&ranking(), &ClusterModel::default(), None, &mut out).unwrap();
        let back = read_ranking_csv(out.as_slice(), "user").unwrap();
        assert_eq!(back.len(), 3);
        for e in &back.entries {
            let sum: f64 = e.breakdown.contributions.iter().map(|c| c.bits).sum();
            assert!((sum - e.score()).abs() <= 1e-6);
        }
        assert_eq!(back.node_ids().collect::<Vec<_>>(), vec!["u2", "u1", "u3"]);
    }

    #[test]
    fn empty_ranking_csv_uses_model_columns() {
        let mut out = Vec::new();
        let empty = AbnormalityRanking { object_type: "user".into(), entries: vec![] };
        write_ranking_csv(&empty, &model(), None, &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "rank,node,score,rates.ts\n");
    }

    #[test]
    fn json_round_trip_is_exact() {
        let r = ranking();
        let mut out = Vec::new();
        write_ranking_json(&r, None, &mut out).unwrap();
        let back = read_ranking_json(out.as_slice()).unwrap();
        assert_eq!(back, r);
        assert_eq!(rank(back.breakdowns(), "user"), r);
    }

    #[test]
    fn profiles() {
        let mut out = Vec::new();
        write_cluster_profiles(&model(), &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let rows: Vec<&str> = text.lines().collect();
        assert_eq!(rows.len(), 1 + 8);
        assert_eq!(rows[1], "user,rates,ts,0,0.75,0,\"[1, 10)\",0.1");
        assert_eq!(rows[4], "user,rates,ts,0,0.75,3,\"[1000, 10000]\",0.4");
        assert!(rows[5..].iter().all(|r| r.contains(",1,0.25,")));
    }

    #[test]
    fn model_round_trip() {
        let m = model();
        let mut out = Vec::new();
        write_model(&m, &mut out).unwrap();
        let mut back = read_model(out.as_slice()).unwrap();
        back.entries[0].clusters.assignment.clear();
        assert_eq!(back, m);
    }

    #[test]
    fn labels_round_trip() {
        let mut labels = BTreeMap::new();
        labels.insert("u2".to_string(), Label::Fraud("rapid_fire".into()));
        labels.insert("u1".to_string(), Label::Honest);
        let mut out = Vec::new();
        write_labels(&labels, &mut out).unwrap();
        assert_eq!(String::from_utf8(out.clone()).unwrap(), "node,label\nu1,honest\nu2,fraud:rapid_fire\n");
        assert_eq!(read_labels(out.as_slice()).unwrap(), labels);
        let e = read_labels("node,label\nu1,honest\nu2,maybe\n".as_bytes()).unwrap_err();
        assert_eq!(e.line, 3);
    }

    #[test]
    fn precision_table() {
        let mut out = Vec::new();
        write_precision_table(&[(1, 1.0), (10, 0.7)], &mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "k,precision\n1,1.000\n10,0.700\n");
    }
}
