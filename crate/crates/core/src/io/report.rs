use crate::recognizer::PosteriorReport;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// JSON: `{"config": {beta, gamma, rho, k, estimator, seed}, "hypotheses":
/// [{name, status, log_numerator, log_denominator, posterior}]}` with
/// natural-log values and `null` for zero probability. CSV: one row per
/// hypothesis with the hypothesis fields as columns; zero probabilities are
/// empty cells.
pub fn write_report(report: &PosteriorReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::Json => {
            let mut text = serde_json::to_string_pretty(report).expect("reports serialize");
            text.push('\n');
            text
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(["name", "status", "log_numerator", "log_denominator", "posterior"]).expect("in-memory write");
            for h in &report.hypotheses {
                w.serialize((&h.name, h.status, h.log_numerator, h.log_denominator, h.posterior))
                    .expect("in-memory write");
            }
            String::from_utf8(w.into_inner().expect("in-memory write")).expect("utf-8")
        }
    }
}

pub fn report_from_json(text: &str) -> Result<PosteriorReport, serde_json::Error> {
    serde_json::from_str(text)
}
