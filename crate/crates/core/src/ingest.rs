//! Frequency-log preprocessing.
//!
//! Raw query and answer logs arrive as labeled counts. Ingestion
//! canonicalizes labels (trim and case-fold, merging duplicates), aligns
//! the two sides to a common strategy count by bucketing each side's tail
//! into a reserved label, and smooths the counts into strictly positive
//! probability vectors that the inverse model can consume.

use std::collections::HashMap;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::game::MixedStrategy;

/// Reserved label for the merged tail bucket.
pub const OTHER_LABEL: &str = "\u{27e8}other\u{27e9}"; // ⟨other⟩

/// Canonical form of a label: surrounding whitespace removed, case
/// folded.
pub fn canonicalize(label: &str) -> String {
    label.trim().to_lowercase()
}

/// Wire format of a frequency table.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    /// Header `label,count`, one comma-separated row per line, no quoting.
    Csv,
    /// Array of objects with a string `label` and an integer `count`.
    Json,
}

/// Labeled counts with canonical, distinct labels; at least one count is
/// positive. Row order is first appearance until [`align`] re-sorts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    rows: Vec<(String, u64)>,
}

impl FrequencyTable {
    /// Build a table from raw rows: labels are canonicalized and
    /// duplicates merged by summing their counts.
    pub fn from_rows<I>(rows: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, u64)>,
    {
        let mut merged: Vec<(String, u64)> = Vec::new();
        let mut index: HashMap<String, usize> = HashMap::new();
        for (raw, count) in rows {
            let label = canonicalize(&raw);
            if label.is_empty() {
                return Err(Error::Domain(format!(
                    "label {raw:?} is empty after trimming"
                )));
            }
            match index.get(&label) {
                Some(&i) => {
                    merged[i].1 = merged[i].1.checked_add(count).ok_or_else(|| {
                        Error::Domain(format!("count overflow for label {label:?}"))
                    })?;
                }
                None => {
                    index.insert(label.clone(), merged.len());
                    merged.push((label, count));
                }
            }
        }
        if merged.is_empty() {
            return Err(Error::Domain("frequency table has no rows".into()));
        }
        if merged.iter().all(|(_, c)| *c == 0) {
            return Err(Error::Domain(
                "frequency table has no positive counts".into(),
            ));
        }
        merged.iter().try_fold(0u64, |total, (label, count)| {
            total
                .checked_add(*count)
                .ok_or_else(|| Error::Domain(format!("total count overflows at label {label:?}")))
        })?;
        Ok(Self { rows: merged })
    }

    /// Parse a table from text in the given wire format.
    pub fn parse(text: &str, format: TableFormat) -> Result<Self> {
        let rows = match format {
            TableFormat::Csv => parse_csv(text)?,
            TableFormat::Json => parse_json(text)?,
        };
        Self::from_rows(rows)
    }

    pub fn rows(&self) -> &[(String, u64)] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.rows.iter().map(|(_, c)| c).sum()
    }

    pub fn labels(&self) -> Vec<&str> {
        self.rows.iter().map(|(l, _)| l.as_str()).collect()
    }

    pub fn counts(&self) -> Vec<u64> {
        self.rows.iter().map(|(_, c)| *c).collect()
    }

    /// Additively smoothed probabilities, in row order:
    /// `(count_i + alpha) / (total + n * alpha)`.
    ///
    /// With `alpha = 0` any zero count is an error
    /// ([`Error::ZeroFrequency`]) because downstream inversion needs
    /// strictly positive frequencies; any positive `alpha` makes every
    /// entry positive. Smoothing preserves strict count order either way.
    pub fn to_distribution(&self, smoothing_alpha: f64) -> Result<MixedStrategy> {
        if !smoothing_alpha.is_finite() || smoothing_alpha < 0.0 {
            return Err(Error::Parameter(format!(
                "smoothing alpha must be finite and non-negative, got {smoothing_alpha}"
            )));
        }
        if smoothing_alpha == 0.0
            && let Some((label, _)) = self.rows.iter().find(|(_, c)| *c == 0)
        {
            return Err(Error::ZeroFrequency(label.clone()));
        }
        let denominator = self.total() as f64 + self.rows.len() as f64 * smoothing_alpha;
        MixedStrategy::new(
            self.rows
                .iter()
                .map(|(_, c)| (*c as f64 + smoothing_alpha) / denominator)
                .collect(),
        )
    }
}

fn parse_csv(text: &str) -> Result<Vec<(String, u64)>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = if idx == 0 {
            raw.trim_start_matches('\u{feff}')
        } else {
            raw
        };
        if !saw_header {
            if !line.trim().eq_ignore_ascii_case("label,count") {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("expected header \"label,count\", got {:?}", line.trim()),
                });
            }
            saw_header = true;
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let label = fields.next().unwrap_or_default();
        let count_text = fields.next().ok_or_else(|| Error::Parse {
            line: line_no,
            message: "expected two comma-separated fields".into(),
        })?;
        if fields.next().is_some() {
            return Err(Error::Parse {
                line: line_no,
                message: "too many fields; labels containing commas need the JSON format".into(),
            });
        }
        if label.trim().is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty label".into(),
            });
        }
        let count: i64 = count_text.trim().parse().map_err(|e| Error::Parse {
            line: line_no,
            message: format!("bad count {:?}: {e}", count_text.trim()),
        })?;
        if count < 0 {
            return Err(Error::Domain(format!(
                "count for label {:?} on line {line_no} is negative",
                label.trim()
            )));
        }
        rows.push((label.to_string(), count as u64));
    }
    if !saw_header {
        return Err(Error::Parse {
            line: 1,
            message: "empty input: expected header \"label,count\"".into(),
        });
    }
    Ok(rows)
}

fn parse_json(text: &str) -> Result<Vec<(String, u64)>> {
    #[derive(Deserialize)]
    struct RawRow {
        label: String,
        count: i64,
    }

    let raw: Vec<RawRow> = serde_json::from_str(text).map_err(|e| Error::Parse {
        line: e.line(),
        message: e.to_string(),
    })?;
    raw.into_iter()
        .map(|row| {
            if row.count < 0 {
                Err(Error::Domain(format!(
                    "count for label {:?} is negative",
                    row.label
                )))
            } else {
                Ok((row.label, row.count as u64))
            }
        })
        .collect()
}

/// Query and answer sides aligned to a common strategy count, with their
/// smoothed distributions. `p` follows the query side, `q` the answer
/// side; both are in the tables' row order (descending count, ties by
/// label).
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedLog {
    queries: FrequencyTable,
    answers: FrequencyTable,
    p: MixedStrategy,
    q: MixedStrategy,
    smoothing_alpha: f64,
}

impl AlignedLog {
    pub fn n(&self) -> usize {
        self.queries.len()
    }

    pub fn queries(&self) -> &FrequencyTable {
        &self.queries
    }

    pub fn answers(&self) -> &FrequencyTable {
        &self.answers
    }

    /// Query-side labels, the ones a reconstructed model inherits.
    pub fn labels(&self) -> Vec<&str> {
        self.queries.labels()
    }

    pub fn answer_labels(&self) -> Vec<&str> {
        self.answers.labels()
    }

    pub fn p(&self) -> &MixedStrategy {
        &self.p
    }

    pub fn q(&self) -> &MixedStrategy {
        &self.q
    }

    pub fn smoothing_alpha(&self) -> f64 {
        self.smoothing_alpha
    }
}

/// Align both log sides to `target_n` strategies (default: the smaller
/// side's distinct count) and smooth them with `smoothing_alpha`.
///
/// A side with more than `target_n` distinct labels keeps its heaviest
/// `target_n - 1` ones and buckets the rest under [`OTHER_LABEL`]; a side
/// with exactly `target_n` is kept as is. Either way rows are ordered by
/// descending count, ties broken by label, so re-aligning an already
/// aligned table is the identity. `target_n` may not exceed either
/// side's distinct count.
pub fn align(
    queries: &FrequencyTable,
    answers: &FrequencyTable,
    target_n: Option<usize>,
    smoothing_alpha: f64,
) -> Result<AlignedLog> {
    let limit = queries.len().min(answers.len());
    let n = target_n.unwrap_or(limit);
    if n == 0 || n > limit {
        return Err(Error::Parameter(format!(
            "target_n must be between 1 and {limit} (the smaller side's distinct count), got {n}"
        )));
    }
    let queries = merge_tail(queries, n)?;
    let answers = merge_tail(answers, n)?;
    let p = queries.to_distribution(smoothing_alpha)?;
    let q = answers.to_distribution(smoothing_alpha)?;
    Ok(AlignedLog {
        queries,
        answers,
        p,
        q,
        smoothing_alpha,
    })
}

fn sort_rows(rows: &mut [(String, u64)]) {
    rows.sort_by(|(la, ca), (lb, cb)| cb.cmp(ca).then_with(|| la.cmp(lb)));
}

fn merge_tail(table: &FrequencyTable, n: usize) -> Result<FrequencyTable> {
    let mut rows = table.rows().to_vec();
    sort_rows(&mut rows);
    if rows.len() > n {
        // A tail row already named like the bucket simply dissolves into
        // it, but a kept one would collide and shrink the table below n.
        if rows[..n - 1].iter().any(|(l, _)| l == OTHER_LABEL) {
            return Err(Error::Parameter(format!(
                "label {OTHER_LABEL:?} is reserved for the merged tail; it cannot be a kept label"
            )));
        }
        let tail: u64 = rows[n - 1..].iter().map(|(_, c)| *c).sum();
        rows.truncate(n - 1);
        rows.push((OTHER_LABEL.to_string(), tail));
        // The bucket can outweigh kept rows, so restore the order.
        sort_rows(&mut rows);
    }
    FrequencyTable::from_rows(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn table(rows: &[(&str, u64)]) -> FrequencyTable {
        FrequencyTable::from_rows(rows.iter().map(|(l, c)| (l.to_string(), *c))).unwrap()
    }

    #[test]
    fn canonicalize_trims_and_folds() {
        assert_eq!(canonicalize("  Weather "), "weather");
        assert_eq!(canonicalize("ACCOMMODATION"), "accommodation");
        assert_eq!(canonicalize("schlo\u{df}"), "schlo\u{df}");
    }

    #[test]
    fn from_rows_merges_duplicates() {
        let t = table(&[("Weather", 5), (" weather ", 3), ("news", 2)]);
        assert_eq!(
            t.rows(),
            &[("weather".to_string(), 8), ("news".to_string(), 2)]
        );
        assert_eq!(t.total(), 10);
        assert_eq!(t.labels(), vec!["weather", "news"]);
    }

    #[test]
    fn from_rows_validation() {
        assert!(matches!(
            FrequencyTable::from_rows(std::iter::empty()),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FrequencyTable::from_rows([("  ".to_string(), 5)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FrequencyTable::from_rows([("a".to_string(), 0), ("b".to_string(), 0)]),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            FrequencyTable::from_rows([("a".to_string(), u64::MAX), ("A".to_string(), 1)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn parse_csv_basic() {
        let t = FrequencyTable::parse(
            "label,count\naccommodation,75\nweather,25\n",
            TableFormat::Csv,
        )
        .unwrap();
        assert_eq!(
            t.rows(),
            &[
                ("accommodation".to_string(), 75),
                ("weather".to_string(), 25)
            ]
        );
    }

    #[test]
    fn parse_csv_handles_crlf_and_case() {
        let t = FrequencyTable::parse(
            "Label,Count\r\nWeather,5\r\n weather ,3\r\n",
            TableFormat::Csv,
        )
        .unwrap();
        assert_eq!(t.rows(), &[("weather".to_string(), 8)]);
    }

    #[test]
    fn parse_csv_skips_blank_lines() {
        let t = FrequencyTable::parse("label,count\na,1\n\nb,2\n", TableFormat::Csv).unwrap();
        assert_eq!(t.len(), 2);
    }

    #[test]
    fn parse_csv_errors_carry_line_numbers() {
        let err = FrequencyTable::parse("label,count\nweather\n", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = FrequencyTable::parse("label,count\na,1\nweather,many\n", TableFormat::Csv)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { line: 3, .. }), "{err}");

        let err = FrequencyTable::parse("label,count\na,1,2\n", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = FrequencyTable::parse("label,count\n,5\n", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");

        let err = FrequencyTable::parse("count,label\na,1\n", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");

        let err = FrequencyTable::parse("", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }), "{err}");
    }

    #[test]
    fn parse_csv_negative_count_is_domain_error() {
        let err = FrequencyTable::parse("label,count\nweather,-1\n", TableFormat::Csv).unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn parse_json_basic() {
        let text =
            r#"[{"label": "Accommodation", "count": 75}, {"label": "weather", "count": 25}]"#;
        let t = FrequencyTable::parse(text, TableFormat::Json).unwrap();
        assert_eq!(
            t.rows(),
            &[
                ("accommodation".to_string(), 75),
                ("weather".to_string(), 25)
            ]
        );
    }

    #[test]
    fn parse_json_errors() {
        let err = FrequencyTable::parse("[{\"label\": \"a\"}]", TableFormat::Json).unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");

        let err = FrequencyTable::parse("[{\"label\": \"a\", \"count\": 1.5}]", TableFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Parse { .. }), "{err}");

        let err = FrequencyTable::parse("[{\"label\": \"a\", \"count\": -3}]", TableFormat::Json)
            .unwrap_err();
        assert!(matches!(err, Error::Domain(_)), "{err}");
    }

    #[test]
    fn distribution_unsmoothed() {
        let p = table(&[("a", 75), ("b", 25)]).to_distribution(0.0).unwrap();
        assert_eq!(p.probs(), &[0.75, 0.25]);
    }

    #[test]
    fn distribution_laplace_half() {
        let p = table(&[("a", 1), ("b", 0)]).to_distribution(0.5).unwrap();
        assert_eq!(p.probs(), &[0.75, 0.25]);
        let p = table(&[("a", 75), ("b", 25)]).to_distribution(0.5).unwrap();
        assert!((p.probs()[0] - 75.5 / 101.0).abs() < 1e-15);
        assert!((p.probs()[1] - 25.5 / 101.0).abs() < 1e-15);
    }

    #[test]
    fn distribution_zero_count_needs_smoothing() {
        let t = table(&[("a", 1), ("b", 0)]);
        assert!(matches!(t.to_distribution(0.0), Err(Error::ZeroFrequency(l)) if l == "b"));
        assert!(
            t.to_distribution(1e-6)
                .unwrap()
                .probs()
                .iter()
                .all(|&x| x > 0.0)
        );
    }

    #[test]
    fn distribution_alpha_validation() {
        let t = table(&[("a", 1)]);
        assert!(matches!(t.to_distribution(-0.5), Err(Error::Parameter(_))));
        assert!(matches!(
            t.to_distribution(f64::NAN),
            Err(Error::Parameter(_))
        ));
    }

    #[test]
    fn distribution_scale_invariant_unsmoothed() {
        let small = table(&[("a", 1), ("b", 3)]).to_distribution(0.0).unwrap();
        let large = table(&[("a", 10), ("b", 30)]).to_distribution(0.0).unwrap();
        for (s, l) in small.probs().iter().zip(large.probs()) {
            assert!((s - l).abs() < 1e-15);
        }
    }

    #[test]
    fn distribution_preserves_count_order() {
        let t = table(&[("a", 5), ("b", 9), ("c", 2)]);
        for alpha in [0.0, 0.5, 10.0] {
            let p = t.to_distribution(alpha).unwrap();
            assert!(p.probs()[1] > p.probs()[0]);
            assert!(p.probs()[0] > p.probs()[2]);
        }
    }

    #[test]
    fn align_identity_when_counts_match() {
        let queries = table(&[("accommodation", 75), ("weather", 25)]);
        let answers = table(&[("hotels", 50), ("forecast", 50)]);
        let log = align(&queries, &answers, None, 0.0).unwrap();
        assert_eq!(log.n(), 2);
        assert_eq!(log.labels(), vec!["accommodation", "weather"]);
        // Answer-side tie of 50/50 orders by label.
        assert_eq!(log.answer_labels(), vec!["forecast", "hotels"]);
        assert_eq!(log.p().probs(), &[0.75, 0.25]);
        assert_eq!(log.q().probs(), &[0.5, 0.5]);
    }

    #[test]
    fn align_buckets_the_tail() {
        let queries = table(&[("alpha", 10), ("bravo", 5), ("charlie", 3), ("delta", 2)]);
        let answers = table(&[("x", 30), ("y", 20), ("z", 10)]);
        let log = align(&queries, &answers, None, 0.0).unwrap();
        assert_eq!(log.n(), 3);
        assert_eq!(
            log.queries().rows(),
            &[
                ("alpha".to_string(), 10),
                ("bravo".to_string(), 5),
                (OTHER_LABEL.to_string(), 5),
            ]
        );
        assert_eq!(
            log.answers().rows(),
            &[
                ("x".to_string(), 30),
                ("y".to_string(), 20),
                ("z".to_string(), 10),
            ]
        );
    }

    #[test]
    fn align_sorts_by_count_then_label() {
        let queries = table(&[("zeta", 5), ("eta", 9), ("ada", 5)]);
        let answers = table(&[("only", 1), ("more", 2), ("rows", 3)]);
        let log = align(&queries, &answers, None, 0.0).unwrap();
        assert_eq!(log.labels(), vec!["eta", "ada", "zeta"]);
    }

    #[test]
    fn align_to_single_bucket() {
        let queries = table(&[("a", 10), ("b", 5)]);
        let answers = table(&[("c", 1), ("d", 1)]);
        let log = align(&queries, &answers, Some(1), 0.0).unwrap();
        assert_eq!(log.queries().rows(), &[(OTHER_LABEL.to_string(), 15)]);
        assert_eq!(log.p().probs(), &[1.0]);
    }

    #[test]
    fn align_is_idempotent() {
        let queries = table(&[("alpha", 10), ("bravo", 5), ("charlie", 3), ("delta", 2)]);
        let answers = table(&[("x", 30), ("y", 20), ("z", 10)]);
        let once = align(&queries, &answers, Some(3), 0.5).unwrap();
        let twice = align(once.queries(), once.answers(), Some(3), 0.5).unwrap();
        assert_eq!(once.queries().rows(), twice.queries().rows());
        assert_eq!(once.answers().rows(), twice.answers().rows());
        assert_eq!(once.p().probs(), twice.p().probs());
    }

    #[test]
    fn align_dissolves_bucket_label_in_the_tail() {
        let queries = table(&[("a", 10), ("b", 6), (OTHER_LABEL, 4), ("c", 1)]);
        let answers = table(&[("x", 3), ("y", 2), ("z", 1)]);
        let log = align(&queries, &answers, Some(2), 0.0).unwrap();
        // Top 1 kept (a); b, c, and the pre-existing bucket land in one
        // merged bucket, which now outweighs the kept row.
        assert_eq!(
            log.queries().rows(),
            &[(OTHER_LABEL.to_string(), 11), ("a".to_string(), 10),]
        );
    }

    #[test]
    fn align_rejects_reserved_label_among_kept_rows() {
        let queries = table(&[(OTHER_LABEL, 10), ("a", 6), ("b", 1)]);
        let answers = table(&[("x", 3), ("y", 2)]);
        assert!(matches!(
            align(&queries, &answers, Some(2), 0.0),
            Err(Error::Parameter(_))
        ));
        // Without merging the reserved label is an ordinary one.
        assert!(align(&queries, &answers, Some(3), 0.0).is_err()); // answers too small
        let answers3 = table(&[("x", 3), ("y", 2), ("z", 1)]);
        assert!(align(&queries, &answers3, Some(3), 0.0).is_ok());
    }

    #[test]
    fn align_target_validation() {
        let queries = table(&[("a", 1), ("b", 1)]);
        let answers = table(&[("c", 1), ("d", 1), ("e", 1)]);
        assert!(align(&queries, &answers, Some(2), 0.0).is_ok());
        assert!(matches!(
            align(&queries, &answers, Some(3), 0.0),
            Err(Error::Parameter(_))
        ));
        assert!(matches!(
            align(&queries, &answers, Some(0), 0.0),
            Err(Error::Parameter(_))
        ));
    }
}
