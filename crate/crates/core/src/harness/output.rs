//! Report artifacts: CSV score matrices, the ranking JSON, and per-category
//! sums. No timestamps anywhere, so reruns are byte-identical.

use super::evaluate::EvalReport;
use std::io;
use std::path::Path;

/// Writes `raw_scores.csv`, `normalized.csv`, `ranking.json`, and
/// `per_category.csv` under `dir`.
pub fn write_report(dir: &Path, report: &EvalReport) -> io::Result<()> {
    std::fs::create_dir_all(dir)?;
    write_matrix(&dir.join("raw_scores.csv"), report, |c| &c.raw)?;
    write_matrix(&dir.join("normalized.csv"), report, |c| &c.normalized)?;

    let mut ranking = serde_json::to_string_pretty(&report.ranking)?;
    ranking.push('\n');
    std::fs::write(dir.join("ranking.json"), ranking)?;

    let mut per_category = csv::Writer::from_path(dir.join("per_category.csv"))?;
    per_category.write_record(["algorithm", "low", "medium", "high", "total"])?;
    for entry in &report.ranking.entries {
        per_category.write_record([
            entry.algorithm.as_str(),
            &entry.per_category.low.to_string(),
            &entry.per_category.medium.to_string(),
            &entry.per_category.high.to_string(),
            &entry.total.to_string(),
        ])?;
    }
    per_category.flush()?;
    Ok(())
}

fn write_matrix(
    path: &Path,
    report: &EvalReport,
    values: impl Fn(&super::ConditionResult) -> &[f64],
) -> io::Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    let mut header = vec![
        "network".to_string(),
        "sequence".to_string(),
        "sample".to_string(),
        "category".to_string(),
    ];
    header.extend(report.algorithms.iter().cloned());
    writer.write_record(&header)?;
    for condition in &report.conditions {
        let mut row = vec![
            condition.condition.network.clone(),
            condition.condition.sequence.clone(),
            condition.condition.sample.to_string(),
            condition.category.to_string(),
        ];
        row.extend(values(condition).iter().map(f64::to_string));
        writer.write_record(&row)?;
    }
    writer.flush()
}
