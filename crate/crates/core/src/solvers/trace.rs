/// One completed solver iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRecord {
    /// 1-based index within the current attempt.
    pub iteration: usize,
    /// PSNR of the current estimate against the ground truth, when known.
    pub psnr_db: Option<f64>,
    /// LHS/RHS of the δ-feasibility check; absent when `σₙ = 0`.
    pub condition_ratio: Option<f64>,
    /// Regularization weight of the pseudoinverse in effect.
    pub epsilon: Option<f64>,
    /// Number of restarts performed before this record's attempt.
    pub restarts: usize,
    /// Distance between consecutive iterates: `ỹ` for IDBP, `x̌` for P&P.
    pub step_norm: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationTrace {
    records: Vec<TraceRecord>,
}

impl IterationTrace {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_records(records: Vec<TraceRecord>) -> Self {
        Self { records }
    }

    pub fn push(&mut self, record: TraceRecord) {
        self.records.push(record);
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    /// Total restarts recorded.
    pub fn restarts(&self) -> usize {
        self.records.last().map_or(0, |r| r.restarts)
    }

    /// Records of the last (accepted) attempt.
    pub fn final_attempt(&self) -> &[TraceRecord] {
        let n = self.restarts();
        let start = self
            .records
            .iter()
            .position(|r| r.restarts == n)
            .unwrap_or(self.records.len());
        &self.records[start..]
    }
}
