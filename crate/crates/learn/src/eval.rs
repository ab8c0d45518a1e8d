use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use taxel_core::GestureClass;

use crate::data::LabeledFeatures;
use crate::error::{LearnError, Result};
use crate::model::TrainedModel;

const N: usize = GestureClass::COUNT;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub accuracy: f64,
    /// Rows are true classes, columns predicted classes.
    pub confusion: [[usize; N]; N],
    pub precision: [f64; N],
    pub recall: [f64; N],
    pub total: usize,
}

impl EvalReport {
    pub fn from_predictions(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        if truth.len() != predicted.len() {
            return Err(LearnError::Shape(format!("{} labels but {} predictions", truth.len(), predicted.len())));
        }
        let mut confusion = [[0usize; N]; N];
        for (&t, &p) in truth.iter().zip(predicted) {
            if t >= N || p >= N {
                return Err(LearnError::Shape(format!("class code out of range: true {t}, predicted {p}")));
            }
            confusion[t][p] += 1;
        }
        Ok(Self::from_confusion(confusion))
    }

    pub fn from_confusion(confusion: [[usize; N]; N]) -> Self {
        let total: usize = confusion.iter().flatten().sum();
        let trace: usize = (0..N).map(|i| confusion[i][i]).sum();
        let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
        let mut precision = [0.0; N];
        let mut recall = [0.0; N];
        for c in 0..N {
            let predicted: usize = (0..N).map(|t| confusion[t][c]).sum();
            let actual: usize = confusion[c].iter().sum();
            precision[c] = ratio(confusion[c][c], predicted);
            recall[c] = ratio(confusion[c][c], actual);
        }
        Self { accuracy: ratio(trace, total), confusion, precision, recall, total }
    }

    pub fn trace(&self) -> usize {
        (0..N).map(|i| self.confusion[i][i]).sum()
    }

    pub fn row_sums(&self) -> [usize; N] {
        self.confusion.map(|row| row.iter().sum())
    }

    pub fn render_table(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:>8}", "true\\pred");
        for c in GestureClass::ALL {
            let _ = write!(s, "{:>7}", c.name());
        }
        let _ = writeln!(s, "{:>8}", "recall");
        for (t, class) in GestureClass::ALL.iter().enumerate() {
            let _ = write!(s, "{:>9}", class.name());
            for p in 0..N {
                let _ = write!(s, "{:>7}", self.confusion[t][p]);
            }
            let _ = writeln!(s, "{:>8.3}", self.recall[t]);
        }
        let _ = write!(s, "{:>9}", "precision");
        for p in self.precision {
            let _ = write!(s, "{p:>7.3}");
        }
        let _ = writeln!(s);
        let _ = writeln!(s, "accuracy {:.4} ({}/{})", self.accuracy, self.trace(), self.total);
        s
    }

    /// Row-normalized confusion heat map as a standalone SVG.
    pub fn to_svg(&self) -> String {
        let cell = 60;
        let margin = 80;
        let size = margin + cell * N + 20;
        let mut s = format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{size}\" height=\"{size}\" font-family=\"sans-serif\" font-size=\"12\">\n"
        );
        let rows = self.row_sums();
        for t in 0..N {
            for p in 0..N {
                let frac = if rows[t] == 0 { 0.0 } else { self.confusion[t][p] as f64 / rows[t] as f64 };
                let shade = (255.0 * (1.0 - frac)).round() as u8;
                let (x, y) = (margin + p * cell, margin + t * cell);
                let _ = writeln!(
                    s,
                    "<rect x=\"{x}\" y=\"{y}\" width=\"{cell}\" height=\"{cell}\" fill=\"rgb({shade},{shade},255)\" stroke=\"#888\"/>"
                );
                let color = if frac > 0.5 { "white" } else { "black" };
                let _ = writeln!(
                    s,
                    "<text x=\"{}\" y=\"{}\" text-anchor=\"middle\" fill=\"{color}\">{}</text>",
                    x + cell / 2,
                    y + cell / 2 + 4,
                    self.confusion[t][p]
                );
            }
        }
        for (i, c) in GestureClass::ALL.iter().enumerate() {
            let mid = margin + i * cell + cell / 2;
            let _ = writeln!(s, "<text x=\"{mid}\" y=\"{}\" text-anchor=\"middle\">{}</text>", margin - 8, c.name());
            let _ = writeln!(s, "<text x=\"{}\" y=\"{}\" text-anchor=\"end\">{}</text>", margin - 6, mid + 4, c.name());
        }
        let _ = writeln!(s, "<text x=\"{}\" y=\"20\" text-anchor=\"middle\">predicted (accuracy {:.3})</text>", size / 2, self.accuracy);
        s.push_str("</svg>\n");
        s
    }
}

pub fn evaluate(model: &TrainedModel, data: &LabeledFeatures) -> Result<EvalReport> {
    model.check_kind(data.kind)?;
    let predicted = data.rows.iter().map(|r| model.predict(r)).collect::<Result<Vec<_>>>()?;
    EvalReport::from_predictions(&data.class_codes(), &predicted)
}

#[cfg(test)]
mod tests {
    use rand::Rng;
    use taxel_core::seed;

    use super::*;

    #[test]
    fn perfect_predictions_give_diagonal() {
        let truth: Vec<usize> = (0..60).map(|i| i % 6).collect();
        let r = EvalReport::from_predictions(&truth, &truth).unwrap();
        assert_eq!(r.accuracy, 1.0);
        for t in 0..N {
            for p in 0..N {
                assert_eq!(r.confusion[t][p], if t == p { 10 } else { 0 });
            }
        }
        assert_eq!(r.precision, [1.0; N]);
    }

    #[test]
    fn uniform_random_is_near_one_sixth() {
        let mut rng = seed::rng(11);
        let truth: Vec<usize> = (0..6000).map(|i| i % 6).collect();
        let pred: Vec<usize> = (0..6000).map(|_| rng.random_range(0..6)).collect();
        let r = EvalReport::from_predictions(&truth, &pred).unwrap();
        assert!((r.accuracy - 1.0 / 6.0).abs() < 0.02, "{}", r.accuracy);
        assert_eq!(r.total, 6000);
    }

    #[test]
    fn accuracy_is_trace_over_total() {
        let truth = [0, 0, 1, 2, 3, 5, 5];
        let pred = [0, 1, 1, 2, 4, 5, 0];
        let r = EvalReport::from_predictions(&truth, &pred).unwrap();
        assert_eq!(r.accuracy, r.trace() as f64 / r.total as f64);
        assert_eq!(r.row_sums(), [2, 1, 1, 1, 0, 2]);
        assert_eq!(r.recall[4], 0.0);
        assert!(r.render_table().contains("accuracy 0.5714 (4/7)"));
        assert!(r.to_svg().starts_with("<svg"));
    }

    #[test]
    fn mismatched_lengths_error() {
        assert!(EvalReport::from_predictions(&[0, 1], &[0]).is_err());
        assert!(EvalReport::from_predictions(&[7], &[0]).is_err());
    }
}
