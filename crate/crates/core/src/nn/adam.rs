//! Adam optimizer with bias correction.

use super::net::{DenseNet, Gradients};

/// Adam state for one network: first/second moment accumulators shaped
/// like the parameters plus the step counter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Gradients,
    pub v: Gradients,
    pub step: u64,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl AdamState {
    /// Fresh state with the conventional beta1=0.9, beta2=0.999,
    /// epsilon=1e-8.
    pub fn new(net: &DenseNet, learning_rate: f64) -> Self {
        AdamState {
            m: Gradients::zeros_like(net),
            v: Gradients::zeros_like(net),
            step: 0,
            learning_rate,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }

    /// One bias-corrected Adam update applied in place to `net`.
    pub fn step(&mut self, net: &mut DenseNet, grads: &Gradients) {
        self.step += 1;
        let t = self.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        let lr = self.learning_rate;
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);

        let update = |param: &mut f64, g: f64, m: &mut f64, v: &mut f64| {
            *m = b1 * *m + (1.0 - b1) * g;
            *v = b2 * *v + (1.0 - b2) * g * g;
            let m_hat = *m / bc1;
            let v_hat = *v / bc2;
            *param -= lr * m_hat / (v_hat.sqrt() + eps);
        };

        for (i, layer) in net.layers.iter_mut().enumerate() {
            for ((p, &g), (m, v)) in layer
                .weights
                .iter_mut()
                .zip(grads.weights[i].iter())
                .zip(self.m.weights[i].iter_mut().zip(self.v.weights[i].iter_mut()))
            {
                update(p, g, m, v);
            }
            for ((p, &g), (m, v)) in layer
                .bias
                .iter_mut()
                .zip(grads.biases[i].iter())
                .zip(self.m.biases[i].iter_mut().zip(self.v.biases[i].iter_mut()))
            {
                update(p, g, m, v);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{mlp_init, Activation};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn tiny_net() -> DenseNet {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        mlp_init(&[2, 3, 1], Activation::Tanh, Activation::Identity, &mut rng).unwrap()
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut net = tiny_net();
        let before = net.clone();
        let grads = Gradients::zeros_like(&net);
        let mut adam = AdamState::new(&net, 1e-3);
        adam.step(&mut net, &grads);
        assert_eq!(net, before);
    }

    #[test]
    fn first_step_scalar_closed_form() {
        // After one step with gradient g, bias correction cancels the
        // moment decay exactly: delta = -lr * g / (|g| + eps).
        for &g in &[1.0, -2.5, 1e-4, 1e6] {
            let mut net = tiny_net();
            let p0 = net.layers[0].weights[[0, 0]];
            let mut grads = Gradients::zeros_like(&net);
            grads.weights[0][[0, 0]] = g;
            let mut adam = AdamState::new(&net, 1e-3);
            adam.step(&mut net, &grads);
            let delta = net.layers[0].weights[[0, 0]] - p0;
            let expect = -1e-3 * g / (g.abs() + 1e-8);
            assert!(
                (delta - expect).abs() <= 1e-9 * 1e-3,
                "delta {delta} vs closed form {expect}"
            );
            // Magnitude never exceeds the learning rate.
            assert!(delta.abs() <= 1e-3 * (1.0 + 1e-6));
        }
    }

    #[test]
    fn step_is_deterministic() {
        let run = || {
            let mut net = tiny_net();
            let mut grads = Gradients::zeros_like(&net);
            grads.weights[0][[1, 1]] = 0.3;
            grads.biases[1][0] = -0.7;
            let mut adam = AdamState::new(&net, 1e-2);
            for _ in 0..5 {
                adam.step(&mut net, &grads);
            }
            net
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn descends_a_quadratic() {
        // Minimize (w - 3)^2 over a single scalar parameter.
        let mut net = DenseNet::new(
            vec![crate::nn::Layer {
                weights: ndarray::array![[0.0]],
                bias: ndarray::Array1::zeros(1),
                activation: Activation::Identity,
            }],
            1.0,
        )
        .unwrap();
        let mut adam = AdamState::new(&net, 0.05);
        for _ in 0..2000 {
            let w = net.layers[0].weights[[0, 0]];
            let mut g = Gradients::zeros_like(&net);
            g.weights[0][[0, 0]] = 2.0 * (w - 3.0);
            adam.step(&mut net, &g);
        }
        assert!((net.layers[0].weights[[0, 0]] - 3.0).abs() < 1e-3);
    }
}
