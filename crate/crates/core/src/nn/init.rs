use rand::Rng;

/// Fills `values` uniformly in `±1/√fan_in`.
pub fn uniform_init<R: Rng + ?Sized>(values: &mut [f64], fan_in: usize, rng: &mut R) {
    let bound = 1.0 / libm::sqrt(fan_in.max(1) as f64);
    for v in values {
        *v = rng.gen_range(-bound..=bound);
    }
}
