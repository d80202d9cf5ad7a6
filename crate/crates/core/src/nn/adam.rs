use super::network::{Dense, QNetwork};
use crate::error::{Error, Result};

/// Bias-corrected Adam moments for every network parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub first_moment: Vec<Dense>,
    pub second_moment: Vec<Dense>,
    pub step_count: u64,
    pub lr: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub eps: f32,
}

impl AdamState {
    pub const BETA1: f32 = 0.9;
    pub const BETA2: f32 = 0.999;
    pub const EPS: f32 = 1e-8;

    pub fn new(net: &QNetwork, lr: f32) -> Self {
        let zeros: Vec<Dense> = net.layers().iter().map(Dense::zeros_like).collect();
        AdamState {
            first_moment: zeros.clone(),
            second_moment: zeros,
            step_count: 0,
            lr,
            beta1: Self::BETA1,
            beta2: Self::BETA2,
            eps: Self::EPS,
        }
    }

    pub fn matches(&self, net: &QNetwork) -> bool {
        let same = |moments: &[Dense]| {
            moments.len() == net.layers().len()
                && moments
                    .iter()
                    .zip(net.layers())
                    .all(|(m, l)| m.weights.shape() == l.weights.shape() && m.biases.shape() == l.biases.shape())
        };
        same(&self.first_moment) && same(&self.second_moment)
    }
}

/// One Adam update of `net` with `grads`.
pub fn adam_step(net: &mut QNetwork, grads: &[Dense], state: &mut AdamState) -> Result<()> {
    if !state.matches(net) || grads.len() != net.layers().len() {
        return Err(Error::shape(
            "gradients shaped like the network",
            "mismatched gradients",
        ));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let (b1, b2) = (state.beta1, state.beta2);
    let bias1 = 1.0 - f64::from(b1).powi(t);
    let bias2 = 1.0 - f64::from(b2).powi(t);
    // fold both corrections into the step size: lr * sqrt(1-b2^t) / (1-b1^t)
    let step = (f64::from(state.lr) * bias2.sqrt() / bias1) as f32;
    let eps_hat = (f64::from(state.eps) * bias2.sqrt()) as f32;

    for (li, layer) in net.layers_mut().iter_mut().enumerate() {
        let g = &grads[li];
        if g.weights.shape() != layer.weights.shape() || g.biases.shape() != layer.biases.shape() {
            return Err(Error::shape(
                format!("{:?}", layer.weights.shape()),
                format!("{:?}", g.weights.shape()),
            ));
        }
        let m = &mut state.first_moment[li];
        let v = &mut state.second_moment[li];
        let pairs = [
            (
                layer.weights.data_mut(),
                g.weights.data(),
                m.weights.data_mut(),
                v.weights.data_mut(),
            ),
            (
                layer.biases.data_mut(),
                g.biases.data(),
                m.biases.data_mut(),
                v.biases.data_mut(),
            ),
        ];
        for (p, g, m, v) in pairs {
            for i in 0..p.len() {
                m[i] = b1 * m[i] + (1.0 - b1) * g[i];
                v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
                p[i] -= step * m[i] / (v[i].sqrt() + eps_hat);
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{NetworkConfig, Tensor};
    use crate::rng::{stream, Stream};

    fn net() -> QNetwork {
        let cfg = NetworkConfig {
            hidden: vec![5],
            dropout: 0.0,
        };
        QNetwork::new(4, &cfg, 7, &mut stream(1, Stream::Init)).unwrap()
    }

    fn filled(net: &QNetwork, value: f32) -> Vec<Dense> {
        net.layers()
            .iter()
            .map(|l| {
                let mut d = l.zeros_like();
                d.weights.data_mut().fill(value);
                d.biases.data_mut().fill(value);
                d
            })
            .collect()
    }

    #[test]
    fn zero_gradient_leaves_parameters() {
        let mut n = net();
        let before = n.clone();
        let mut state = AdamState::new(&n, 0.00025);
        let g = filled(&n, 0.0);
        adam_step(&mut n, &g, &mut state).unwrap();
        assert_eq!(n, before);
        assert_eq!(state.step_count, 1);
    }

    #[test]
    fn first_step_moves_by_lr() {
        // closed form: m_hat = g, v_hat = g^2, so delta = lr * g / (|g| + eps)
        let mut n = net();
        let before = n.clone();
        let mut state = AdamState::new(&n, 0.00025);
        let g = filled(&n, 1.0);
        adam_step(&mut n, &g, &mut state).unwrap();
        let expected = 0.00025 / (1.0 + 1e-8);
        for (a, b) in n.layers().iter().zip(before.layers()) {
            for (x, y) in a.weights.data().iter().zip(b.weights.data()) {
                assert!(((y - x) - expected as f32).abs() < 1e-7, "{} vs {}", y - x, expected);
            }
        }
    }

    #[test]
    fn deterministic_updates() {
        let (mut a, mut b) = (net(), net());
        let (mut sa, mut sb) = (AdamState::new(&a, 1e-3), AdamState::new(&b, 1e-3));
        for k in 0..5 {
            let g = filled(&a, 0.1 * k as f32 - 0.2);
            adam_step(&mut a, &g, &mut sa).unwrap();
            adam_step(&mut b, &g, &mut sb).unwrap();
        }
        assert_eq!(a, b);
        assert_eq!(sa, sb);
    }

    #[test]
    fn zero_lr_freezes() {
        let mut n = net();
        let before = n.clone();
        let mut state = AdamState::new(&n, 0.0);
        for _ in 0..10 {
            let g = filled(&n, 3.0);
            adam_step(&mut n, &g, &mut state).unwrap();
        }
        assert_eq!(n, before);
    }

    #[test]
    fn rejects_mismatched_gradients() {
        let mut n = net();
        let mut state = AdamState::new(&n, 0.1);
        let bad = vec![Dense::new(Tensor::zeros(vec![5, 3]), Tensor::zeros(vec![5])).unwrap()];
        assert!(adam_step(&mut n, &bad, &mut state).is_err());
    }
}
