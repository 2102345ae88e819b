use crate::{Error, Result};

pub const DEFAULT_BETA1: f64 = 0.9;
pub const DEFAULT_BETA2: f64 = 0.999;
pub const DEFAULT_EPS: f64 = 1e-8;

/// Adam optimiser state: first/second moment accumulators plus the step count
/// used for bias correction.
#[derive(Debug, Clone)]
pub struct AdamState {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: u64,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl AdamState {
    pub fn new(dim: usize, lr: f64) -> Self {
        AdamState {
            lr,
            beta1: DEFAULT_BETA1,
            beta2: DEFAULT_BETA2,
            eps: DEFAULT_EPS,
            step: 0,
            m: vec![0.0; dim],
            v: vec![0.0; dim],
        }
    }

    pub fn learning_rate(&self) -> f64 {
        self.lr
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn moments(&self) -> (&[f64], &[f64]) {
        (&self.m, &self.v)
    }

    /// One bias-corrected update, in place:
    ///
    /// ```text
    /// m ← β₁·m + (1−β₁)·g        m̂ = m / (1 − β₁ᵗ)
    /// v ← β₂·v + (1−β₂)·g²       v̂ = v / (1 − β₂ᵗ)
    /// p ← p − lr · m̂ / (√v̂ + ε)
    /// ```
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != self.m.len() {
            return Err(Error::Dimension(format!(
                "adam state of size {} applied to {} params / {} grads",
                self.m.len(),
                params.len(),
                grads.len()
            )));
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for i in 0..params.len() {
            let g = grads[i];
            self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * g;
            self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * g * g;
            let m_hat = self.m[i] / bc1;
            let v_hat = self.v[i] / bc2;
            params[i] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn first_step_moves_by_learning_rate() {
        // With a unit gradient the bias-corrected ratio m̂/√v̂ is 1, so the
        // very first update is a plain -lr move.
        let mut state = AdamState::new(1, 0.01);
        let mut p = vec![0.0];
        state.step(&mut p, &[1.0]).unwrap();
        assert_relative_eq!(p[0], -0.01, max_relative = 1e-7);
    }

    #[test]
    fn zero_gradients_leave_parameters_unchanged() {
        let mut state = AdamState::new(3, 0.05);
        let mut p = vec![1.0, -2.0, 0.5];
        let before = p.clone();
        for _ in 0..50 {
            state.step(&mut p, &[0.0, 0.0, 0.0]).unwrap();
        }
        assert_eq!(p, before);
        let (m, v) = state.moments();
        assert!(m.iter().all(|&x| x == 0.0));
        assert!(v.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn moments_decay_once_gradients_vanish() {
        let mut state = AdamState::new(1, 0.01);
        let mut p = vec![0.0];
        state.step(&mut p, &[1.0]).unwrap();
        let m_after_grad = state.moments().0[0];
        let v_after_grad = state.moments().1[0];
        // The second moment halves only every ~693 steps (β₂ = 0.999), so
        // give both moments plenty of zero-gradient steps to die off.
        for _ in 0..15_000 {
            state.step(&mut p, &[0.0]).unwrap();
        }
        let (m_final, v_final) = (state.moments().0[0], state.moments().1[0]);
        assert!(m_after_grad > 0.0 && v_after_grad > 0.0);
        assert!(m_final.abs() < 1e-9, "first moment still {m_final}");
        assert!(v_final.abs() < 1e-9, "second moment still {v_final}");
    }

    #[test]
    fn minimises_a_quadratic_and_matches_reference_trace() {
        // Independent scalar reference, written straight from the update rule.
        let (lr, b1, b2, eps) = (0.01, DEFAULT_BETA1, DEFAULT_BETA2, DEFAULT_EPS);
        let (mut rp, mut rm, mut rv) = (1.0f64, 0.0f64, 0.0f64);
        for t in 1..=100u64 {
            let g = 2.0 * rp;
            rm = b1 * rm + (1.0 - b1) * g;
            rv = b2 * rv + (1.0 - b2) * g * g;
            let m_hat = rm / (1.0 - b1.powi(t as i32));
            let v_hat = rv / (1.0 - b2.powi(t as i32));
            rp -= lr * m_hat / (v_hat.sqrt() + eps);
        }

        let mut state = AdamState::new(1, 0.01);
        let mut p = vec![1.0];
        for _ in 0..100 {
            let g = vec![2.0 * p[0]];
            state.step(&mut p, &g).unwrap();
        }
        assert!(p[0].abs() < 0.5, "p = {} after 100 steps", p[0]);
        assert_relative_eq!(p[0], rp, max_relative = 1e-12);
    }

    #[test]
    fn mismatched_lengths_are_rejected() {
        let mut state = AdamState::new(2, 0.01);
        let mut p = vec![0.0, 0.0];
        assert!(state.step(&mut p, &[1.0]).is_err());
    }
}
