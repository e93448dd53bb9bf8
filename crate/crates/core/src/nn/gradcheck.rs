use super::Parameters;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GradCheckReport {
    pub max_rel_error: f64,
    /// Flat parameter index of the worst disagreement.
    pub worst_index: usize,
    pub checked: usize,
}

impl GradCheckReport {
    pub fn passes(&self, tolerance: f64) -> bool {
        self.max_rel_error < tolerance
    }
}

/// Below this magnitude both gradients are treated as zero and the comparison is absolute.
const REL_FLOOR: f64 = 1e-6;

/// Compares `analytic` with central differences `(L(θ+h) − L(θ−h)) / 2h`, parameter by parameter.
///
/// Relative error is `|a − n| / max(|a|, |n|, 1e-6)`.
pub fn gradient_check<P, F>(model: &P, analytic: &P, step: f64, loss: F) -> GradCheckReport
where
    P: Parameters + Clone,
    F: Fn(&P) -> f64,
{
    let base = model.flatten();
    let grads = analytic.flatten();
    let mut probe = model.clone();
    let mut flat = base.clone();
    let mut report = GradCheckReport {
        max_rel_error: 0.0,
        worst_index: 0,
        checked: base.len(),
    };
    for k in 0..base.len() {
        flat[k] = base[k] + step;
        probe.assign_flat(&flat);
        let up = loss(&probe);
        flat[k] = base[k] - step;
        probe.assign_flat(&flat);
        let down = loss(&probe);
        flat[k] = base[k];
        let numeric = (up - down) / (2.0 * step);
        let a = grads[k];
        let rel = (a - numeric).abs() / a.abs().max(numeric.abs()).max(REL_FLOOR);
        if rel > report.max_rel_error || rel.is_nan() {
            report.max_rel_error = rel;
            report.worst_index = k;
        }
    }
    report
}
