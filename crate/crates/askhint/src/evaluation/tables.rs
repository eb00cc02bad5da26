//! Plain-text and CSV emitters for reports and harness tables.
//!
//! CSV percentages are printed with two decimals so artifact tables diff
//! cleanly against published-style numbers.

use super::harness::{AblationRow, CrossClassReport, GranularityRow, TransferReport};
use super::EvalReport;

fn pct(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{:.2}", 100.0 * x),
        None => "n/a".to_string(),
    }
}

pub(crate) fn report_text_table(report: &EvalReport) -> String {
    let rows = [
        ("AUC", pct(report.auc)),
        ("Crime Acc", pct(report.crime_acc)),
        ("Normal Acc", pct(report.normal_acc)),
        ("Videos (normal)", report.n_videos.normal.to_string()),
        ("Videos (abnormal)", report.n_videos.abnormal.to_string()),
        ("Failed parses", report.failed_parses.to_string()),
        ("Fingerprint", report.config_fingerprint[..16].to_string()),
    ];
    let width = rows.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (key, value) in rows {
        out.push_str(&format!("{key:<width$}  {value}\n"));
    }
    out
}

/// Question-count ablation table: one row per budget, summarized and random
/// selections side by side.
pub fn ablation_csv(askhint: &[AblationRow], random: &[AblationRow]) -> String {
    let mut out = String::from("questions,askhint_auc,askhint_crime_acc,random_auc,random_crime_acc\n");
    for row in askhint {
        let partner = random.iter().find(|r| r.questions == row.questions);
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            row.questions,
            pct(row.auc),
            pct(row.crime_acc),
            pct(partner.and_then(|r| r.auc)),
            pct(partner.and_then(|r| r.crime_acc)),
        ));
    }
    out
}

/// Cross-dataset transfer table: one row per (target, source) evaluation.
pub fn transfer_csv(reports: &[TransferReport]) -> String {
    let mut out = String::from("eval_target,prompt_source,auc,crime_acc,normal_acc\n");
    for t in reports {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            t.eval_target,
            t.prompt_source,
            pct(t.report.auc),
            pct(t.report.crime_acc),
            pct(t.report.normal_acc),
        ));
    }
    out
}

/// Cross-class transfer table: overall AUC plus seen/unseen accuracies, one
/// column per prompting setting.
pub fn cross_class_csv(settings: &[(&str, &CrossClassReport)]) -> String {
    let mut out = String::from("setting");
    for (name, _) in settings {
        out.push(',');
        out.push_str(name);
    }
    out.push('\n');
    type Getter = fn(&CrossClassReport) -> Option<f64>;
    let rows: [(&str, Getter); 3] = [
        ("all_test_auc", |r| r.all_auc),
        ("seen_classes_acc", |r| r.seen_acc),
        ("unseen_classes_acc", |r| r.unseen_acc),
    ];
    for (label, getter) in rows {
        out.push_str(label);
        for (_, report) in settings {
            out.push(',');
            out.push_str(&pct(getter(report)));
        }
        out.push('\n');
    }
    out
}

/// Granularity study table: one row per (class, mode).
pub fn granularity_csv(rows: &[GranularityRow]) -> String {
    let mut out = String::from("class,mode,auc,crime_acc\n");
    for row in rows {
        let class = if row.class.contains(',') {
            format!("\"{}\"", row.class)
        } else {
            row.class.clone()
        };
        out.push_str(&format!(
            "{},{},{},{}\n",
            class,
            row.mode,
            pct(row.auc),
            pct(row.crime_acc)
        ));
    }
    out
}
