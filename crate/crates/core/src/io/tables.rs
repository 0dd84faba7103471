use std::io::Write;

use serde::{Deserialize, Serialize};

use super::FormatError;
use crate::experiments::{BenchRow, SweepResult, SweepSummary};
use crate::sit::ClassificationGraph;

/// Writes `rows` as CSV with a header taken from the field names.
pub fn write_csv<W: Write, T: Serialize>(
    writer: W,
    rows: impl IntoIterator<Item = T>,
) -> Result<(), FormatError> {
    let mut w = csv::Writer::from_writer(writer);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn to_csv_string<T: Serialize>(
    rows: impl IntoIterator<Item = T>,
) -> Result<String, FormatError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, rows)?;
    Ok(String::from_utf8(buf).expect("csv output is utf-8"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationRow {
    pub scene_id: String,
    pub category: u64,
    pub degree: f64,
    pub similarity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub fuzziness: f64,
    pub ix: usize,
    pub iy: usize,
    pub x: f64,
    pub y: f64,
    pub degree: f64,
    pub similarity: f64,
}

/// Columns: `scene_id, category, degree, similarity`.
/// An empty classification yields the header alone.
pub fn classification_csv(graph: &ClassificationGraph) -> Result<String, FormatError> {
    if graph.is_empty() {
        return Ok("scene_id,category,degree,similarity\n".into());
    }
    to_csv_string(graph.nodes().map(|n| ClassificationRow {
        scene_id: graph.scene_id.clone(),
        category: n.category.0,
        degree: n.degree,
        similarity: n.similarity,
    }))
}

/// Columns: `fuzziness, ix, iy, x, y, degree, similarity`, one row per cell
/// and fuzziness value.
pub fn sweep_csv(results: &[SweepResult]) -> Result<String, FormatError> {
    to_csv_string(results.iter().flat_map(|r| {
        r.cells.iter().map(move |c| SweepRow {
            fuzziness: r.summary.fuzziness,
            ix: c.ix,
            iy: c.iy,
            x: c.x,
            y: c.y,
            degree: c.degree,
            similarity: c.similarity,
        })
    }))
}

#[derive(Serialize)]
struct SummaryRow {
    fuzziness: f64,
    total: usize,
    classified: usize,
    mean_degree: f64,
    std_degree: f64,
    mean_similarity: f64,
    std_similarity: f64,
    max_similarity: f64,
    similarity_over_one: usize,
    peak_ix: Option<usize>,
    peak_iy: Option<usize>,
    peak_degree: Option<f64>,
}

impl From<&SweepSummary> for SummaryRow {
    fn from(s: &SweepSummary) -> Self {
        Self {
            fuzziness: s.fuzziness,
            total: s.total,
            classified: s.classified,
            mean_degree: s.mean_degree,
            std_degree: s.std_degree,
            mean_similarity: s.mean_similarity,
            std_similarity: s.std_similarity,
            max_similarity: s.max_similarity,
            similarity_over_one: s.similarity_over_one,
            peak_ix: s.peak.map(|p| p.ix),
            peak_iy: s.peak.map(|p| p.iy),
            peak_degree: s.peak.map(|p| p.degree),
        }
    }
}

/// One row per fuzziness value; population σ.
pub fn sweep_summary_csv(results: &[SweepResult]) -> Result<String, FormatError> {
    to_csv_string(results.iter().map(|r| SummaryRow::from(&r.summary)))
}

/// Columns: `v, w, step, memory_size, learned, phase, ms`.
pub fn bench_csv(rows: &[BenchRow]) -> Result<String, FormatError> {
    to_csv_string(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{BenchPhase, SweepCell};

    #[test]
    fn headers_are_fixed() {
        let row = BenchRow {
            v: 2,
            w: 4,
            step: 1,
            memory_size: 1,
            learned: true,
            phase: BenchPhase::LearnStructure,
            ms: 0.5,
        };
        let text = bench_csv(&[row]).unwrap();
        assert_eq!(
            text,
            "v,w,step,memory_size,learned,phase,ms\n2,4,1,1,true,learn_structure,0.5\n"
        );

        let cells = vec![SweepCell {
            ix: 1,
            iy: 2,
            x: 0.5,
            y: 0.25,
            degree: 1.0,
            similarity: 1.0,
        }];
        let result = SweepResult {
            summary: SweepSummary::from_cells(0.3, &cells),
            cells,
        };
        let text = sweep_csv(std::slice::from_ref(&result)).unwrap();
        assert!(text.starts_with("fuzziness,ix,iy,x,y,degree,similarity\n0.3,1,2,0.5,0.25,1.0,1.0"));
        let summary = sweep_summary_csv(&[result]).unwrap();
        assert!(summary.starts_with("fuzziness,total,classified,"));

        let empty = ClassificationGraph::empty("e");
        assert_eq!(
            classification_csv(&empty).unwrap(),
            "scene_id,category,degree,similarity\n"
        );
    }
}
