use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{backward_from_logits, softmax_in_place};
use super::lstm::layer_forward_fast;
use super::{
    check_len, lstm_layer_backward, lstm_layer_forward_traced, Activation, DenseParams, LstmCellParams,
    NnError, Objective, Parameters, LOG_CLAMP_EPS,
};
use crate::tensor::Tensor2;

/// Stacked LSTM layers followed by a per-step softmax head.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SequenceClassifier {
    pub layers: Vec<LstmCellParams>,
    pub head: DenseParams,
}

/// One training sequence: `T×D` inputs, `T` one-based labels and an optional
/// fixed `T×C` offset added to the head logits.
#[derive(Clone, Debug, PartialEq)]
pub struct SequenceSample {
    pub input: Tensor2,
    pub labels: Vec<usize>,
    pub logit_bias: Option<Tensor2>,
}

impl SequenceClassifier {
    pub fn new<R: Rng + ?Sized>(input: usize, hidden: &[usize], classes: usize, rng: &mut R) -> Self {
        let mut layers = Vec::with_capacity(hidden.len());
        let mut d = input;
        for &h in hidden {
            layers.push(LstmCellParams::init(d, h, rng));
            d = h;
        }
        Self {
            layers,
            head: DenseParams::init(d, classes, Activation::Softmax, rng),
        }
    }

    pub fn input_size(&self) -> usize {
        self.layers.first().map_or(self.head.input_size(), |l| l.input_size())
    }

    pub fn classes(&self) -> usize {
        self.head.output_size()
    }

    fn check_input(&self, input: &Tensor2, bias: Option<&Tensor2>) -> Result<(), NnError> {
        if input.rows() == 0 {
            return Err(NnError::EmptyInput("sequence"));
        }
        check_len("sequence input width", self.input_size(), input.cols())?;
        if let Some(b) = bias {
            check_len("logit bias rows", input.rows(), b.rows())?;
            check_len("logit bias cols", self.classes(), b.cols())?;
        }
        Ok(())
    }

    /// Head logits (including any bias) per step.
    pub fn logits(&self, input: &Tensor2, bias: Option<&Tensor2>) -> Result<Tensor2, NnError> {
        self.check_input(input, bias)?;
        let mut h = input.clone();
        for layer in &self.layers {
            let zeros = vec![0.0; layer.hidden_size];
            h = layer_forward_fast(&h, layer, &zeros, &zeros);
        }
        let c = self.classes();
        let mut out = Tensor2::zeros(input.rows(), c);
        for t in 0..input.rows() {
            let row = out.row_mut(t);
            self.head.logits(h.row(t), row);
            if let Some(b) = bias {
                for (z, o) in row.iter_mut().zip(b.row(t)) {
                    *z += o;
                }
            }
        }
        Ok(out)
    }

    /// Per-step class distributions (`T×C`), starting from a zero state.
    pub fn forward(&self, input: &Tensor2, bias: Option<&Tensor2>) -> Result<Tensor2, NnError> {
        let mut out = self.logits(input, bias)?;
        for t in 0..out.rows() {
            softmax_in_place(out.row_mut(t));
        }
        Ok(out)
    }

    /// Cross-entropy summed over steps, divided by the batch size, with its gradient.
    pub fn loss_and_grad(&self, batch: &[&SequenceSample]) -> (f64, Self) {
        let mut grads = self.zeros_like();
        let n = batch.len().max(1) as f64;
        let mut loss = 0.0;
        for sample in batch {
            loss += self.accumulate_sample(sample, n, &mut grads);
        }
        (loss / n, grads)
    }

    fn accumulate_sample(&self, sample: &SequenceSample, n: f64, grads: &mut Self) -> f64 {
        let mut traces = Vec::with_capacity(self.layers.len());
        let mut h = sample.input.clone();
        for layer in &self.layers {
            let (out, trace) = lstm_layer_forward_traced(&h, layer);
            traces.push(trace);
            h = out;
        }
        let c = self.classes();
        let mut d_top = Tensor2::zeros(h.rows(), h.cols());
        let mut z = vec![0.0; c];
        let mut loss = 0.0;
        for t in 0..h.rows() {
            self.head.logits(h.row(t), &mut z);
            if let Some(b) = &sample.logit_bias {
                for (zi, o) in z.iter_mut().zip(b.row(t)) {
                    *zi += o;
                }
            }
            softmax_in_place(&mut z);
            let y = sample.labels[t] - 1;
            loss -= libm::log(z[y].max(LOG_CLAMP_EPS));
            z[y] -= 1.0;
            z.iter_mut().for_each(|v| *v /= n);
            let dh = backward_from_logits(&self.head, h.row(t), &z, &mut grads.head);
            d_top.row_mut(t).copy_from_slice(&dh);
        }
        let mut d = d_top;
        for (k, layer) in self.layers.iter().enumerate().rev() {
            d = lstm_layer_backward(layer, &traces[k], &d, &mut grads.layers[k]);
        }
        loss
    }
}

impl Parameters for SequenceClassifier {
    fn visit(&self, f: &mut dyn FnMut(&[f64])) {
        for l in &self.layers {
            l.visit(f);
        }
        self.head.visit(f);
    }

    fn visit_mut(&mut self, f: &mut dyn FnMut(&mut [f64])) {
        for l in &mut self.layers {
            l.visit_mut(f);
        }
        self.head.visit_mut(f);
    }

    fn zeros_like(&self) -> Self {
        Self {
            layers: self.layers.iter().map(|l| l.zeros_like()).collect(),
            head: self.head.zeros_like(),
        }
    }
}

/// Train/validation sequences for a [`SequenceClassifier`].
#[derive(Clone, Debug, Default)]
pub struct SequenceObjective {
    pub train: Vec<SequenceSample>,
    pub val: Vec<SequenceSample>,
}

impl Objective for SequenceObjective {
    type Model = SequenceClassifier;

    fn train_len(&self) -> usize {
        self.train.len()
    }

    fn val_len(&self) -> usize {
        self.val.len()
    }

    fn batch_loss_grad(&self, model: &SequenceClassifier, batch: &[usize]) -> (f64, SequenceClassifier) {
        let samples: Vec<&SequenceSample> = batch.iter().map(|&i| &self.train[i]).collect();
        model.loss_and_grad(&samples)
    }

    fn val_loss(&self, model: &SequenceClassifier) -> f64 {
        let mut total = 0.0;
        for s in &self.val {
            let p = model
                .forward(&s.input, s.logit_bias.as_ref())
                .expect("validation sample shape checked at construction");
            for (t, &y) in s.labels.iter().enumerate() {
                total -= libm::log(p.get(t, y - 1).max(LOG_CLAMP_EPS));
            }
        }
        total / self.val.len().max(1) as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{gradient_check, sequence_cross_entropy};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sample(rng: &mut ChaCha8Rng, t: usize, d: usize, c: usize, with_bias: bool) -> SequenceSample {
        let data = (0..t * d).map(|_| rng.gen_range(-1.5..1.5)).collect();
        SequenceSample {
            input: Tensor2::from_vec(t, d, data).unwrap(),
            labels: (0..t).map(|_| rng.gen_range(1..=c)).collect(),
            logit_bias: with_bias.then(|| {
                Tensor2::from_vec(t, c, (0..t * c).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
            }),
        }
    }

    #[test]
    fn training_loss_equals_direct_cross_entropy() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let net = SequenceClassifier::new(4, &[5, 3], 6, &mut rng);
        let samples: Vec<_> = (0..3).map(|_| sample(&mut rng, 7, 4, 6, true)).collect();
        let refs: Vec<&SequenceSample> = samples.iter().collect();
        let (loss, _) = net.loss_and_grad(&refs);
        let probs: Vec<_> = samples
            .iter()
            .map(|s| net.forward(&s.input, s.logit_bias.as_ref()).unwrap())
            .collect();
        let labels: Vec<_> = samples.iter().map(|s| s.labels.clone()).collect();
        let direct = sequence_cross_entropy(&probs, &labels).unwrap();
        assert!((loss - direct).abs() < 1e-12);
    }

    #[test]
    fn classifier_gradients_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let net = SequenceClassifier::new(3, &[4, 3], 5, &mut rng);
        let samples: Vec<_> = (0..2).map(|_| sample(&mut rng, 5, 3, 5, true)).collect();
        let refs: Vec<&SequenceSample> = samples.iter().collect();
        let (_, grads) = net.loss_and_grad(&refs);
        let report = gradient_check(&net, &grads, 1e-5, |m| m.loss_and_grad(&refs).0);
        assert!(report.max_rel_error < 1e-4, "{report:?}");
    }

    #[test]
    fn outputs_are_distributions() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let net = SequenceClassifier::new(3, &[4], 12, &mut rng);
        let s = sample(&mut rng, 6, 3, 12, false);
        let p = net.forward(&s.input, None).unwrap();
        for t in 0..6 {
            let sum: f64 = p.row(t).iter().sum();
            assert!((sum - 1.0).abs() < 1e-12);
        }
    }
}
