//! Small hand-checkable datasets used by tests, docs and the FFI smoke tests.

use crate::dataset::{EvalSet, SampleRecord};

/// Three ID samples (two correct) and two OOD samples on channels `s_id` and
/// `s_ood`:
///
/// | id | origin | correct | s_id | s_ood |
/// |----|--------|---------|------|-------|
/// | A  | id     | yes     | 0.90 | 0.90  |
/// | B  | id     | yes     | 0.80 | 0.80  |
/// | C  | id     | no      | 0.70 | 0.20  |
/// | X  | ood    |         | 0.60 | 0.10  |
/// | Y  | ood    |         | 0.95 | 0.05  |
pub fn five_sample() -> EvalSet {
    let rows = [
        ("A", Some(true), 0.9, 0.9),
        ("B", Some(true), 0.8, 0.8),
        ("C", Some(false), 0.7, 0.2),
        ("X", None, 0.6, 0.1),
        ("Y", None, 0.95, 0.05),
    ];
    let records = rows
        .into_iter()
        .map(|(id, correct, s_id, s_ood)| {
            let record = match correct {
                Some(c) => SampleRecord::id(id, c),
                None => SampleRecord::ood(id),
            };
            record.with_score("s_id", s_id).with_score("s_ood", s_ood)
        })
        .collect();
    EvalSet::from_records(records).expect("fixture is valid")
}

/// The fixture as a scores CSV.
pub const FIVE_SAMPLE_CSV: &str = "\
sample_id,domain,correct,s_id,s_ood
A,id,1,0.9,0.9
B,id,1,0.8,0.8
C,id,0,0.7,0.2
X,ood,,0.6,0.1
Y,ood,,0.95,0.05
";
