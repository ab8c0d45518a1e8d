//! CSV export of feature matrices: one row per sample with
//! `participant,label,kind,v0,v1,...`.

use std::io::Write;

use crate::error::Result;
use crate::extract::ExtractedSet;

pub fn write_feature_csv<W: Write>(out: W, set: &ExtractedSet) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let width = set.vectors.first().map_or(0, |v| v.len());
    let mut header = vec!["participant".to_string(), "label".to_string(), "kind".to_string()];
    header.extend((0..width).map(|i| format!("v{i}")));
    w.write_record(&header)?;
    for ((v, label), participant) in set.vectors.iter().zip(&set.labels).zip(&set.participants) {
        let mut row = vec![
            participant.clone(),
            label.map(|l| l.name().to_string()).unwrap_or_default(),
            v.kind().name().to_string(),
        ];
        row.extend(v.values().iter().map(|x| x.to_string()));
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use taxel_core::GestureClass;

    use super::*;
    use crate::{FeatureKind, FeatureVector, PipelineConfig};

    #[test]
    fn csv_layout() {
        let cfg = PipelineConfig { target_frames: 3, ..Default::default() };
        let set = ExtractedSet {
            kind: FeatureKind::ActivatedCount,
            vectors: vec![FeatureVector::new(FeatureKind::ActivatedCount, vec![1.0, 2.0, 0.0], &cfg).unwrap()],
            labels: vec![Some(GestureClass::Tap)],
            participants: vec!["p07".into()],
            dropped: 0,
        };
        let mut buf = Vec::new();
        write_feature_csv(&mut buf, &set).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text, "participant,label,kind,v0,v1,v2\np07,tap,activated-count,1,2,0\n");
    }
}
