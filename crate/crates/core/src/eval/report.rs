use std::fmt;

use super::silhouette::SilhouetteReport;
use super::transfer::{IdmOutcome, IdmReport, TransferCell, TransferReport};

/// One metric as a tab-separated line: experiment, category, run, metric, value.
#[derive(Debug, Clone, PartialEq)]
pub struct Record {
    pub experiment: String,
    pub category: String,
    /// `None` for values aggregated over runs.
    pub run: Option<usize>,
    pub metric: String,
    pub value: f64,
}

impl Record {
    pub fn new(experiment: &str, category: &str, run: Option<usize>, metric: &str, value: f64) -> Self {
        Self {
            experiment: experiment.into(),
            category: category.into(),
            run,
            metric: metric.into(),
            value,
        }
    }
}

impl fmt::Display for Record {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let run = self.run.map_or_else(|| "-".to_string(), |r| r.to_string());
        write!(
            f,
            "{}\t{}\t{}\t{}\t{:.6}",
            self.experiment, self.category, run, self.metric, self.value
        )
    }
}

pub fn silhouette_records(experiment: &str, reports: &[SilhouetteReport]) -> Vec<Record> {
    reports
        .iter()
        .flat_map(|r| {
            let cat = r.label_kind.name();
            [
                Record::new(experiment, &cat, None, "silhouette", r.score),
                Record::new(experiment, &cat, None, "n_points", r.n_points as f64),
            ]
        })
        .collect()
}

fn cell_records(experiment: &str, category: &str, cell: &TransferCell, out: &mut Vec<Record>) {
    for (r, run) in cell.runs.iter().enumerate() {
        for (metric, value) in [
            ("source_unaligned", run.source_unaligned),
            ("source_aligned", run.source_aligned),
            ("target_unaligned", run.target_unaligned),
            ("target_aligned", run.target_aligned),
            ("transferability", run.transferability),
        ] {
            out.push(Record::new(experiment, category, Some(r), metric, value));
        }
    }
    for (metric, value) in [
        ("source_unaligned", cell.source_unaligned()),
        ("source_aligned", cell.source_aligned()),
        ("target_unaligned", cell.target_unaligned()),
        ("target_aligned", cell.target_aligned()),
        ("transferability", cell.transferability()),
    ] {
        out.push(Record::new(experiment, category, None, metric, value));
    }
    if let Ok(v) = cell.aggregate_transferability() {
        out.push(Record::new(experiment, category, None, "aggregate_transferability", v));
    }
}

pub fn transfer_records(experiment: &str, report: &TransferReport) -> Vec<Record> {
    let mut out = Vec::new();
    for (category, cell) in &report.cells {
        cell_records(experiment, category.name(), cell, &mut out);
    }
    out
}

pub fn idm_records(experiment: &str, report: &IdmReport) -> Vec<Record> {
    let mut out = Vec::new();
    for row in &report.rows {
        out.push(Record::new(experiment, &row.action_id, None, "frequency", row.frequency));
        match &row.outcome {
            IdmOutcome::Trained(cell) => cell_records(experiment, &row.action_id, cell, &mut out),
            IdmOutcome::Skipped => out.push(Record::new(experiment, &row.action_id, None, "skipped", 1.0)),
        }
    }
    out
}
