use super::tensor::{Real, Tensor};
use crate::error::{Error, Result};

/// Step decay: `base * decay^k` where `k` counts the milestones already
/// completed. Epochs are 1-based, so epoch 101 is the first one after
/// milestone 100.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub base: f64,
    pub decay: f64,
    pub milestones: Vec<usize>,
}

impl Default for LrSchedule {
    fn default() -> Self {
        LrSchedule {
            base: 0.003,
            decay: 0.3,
            milestones: vec![100, 200, 400, 800],
        }
    }
}

impl LrSchedule {
    pub fn lr(&self, epoch: usize) -> f64 {
        let passed = self.milestones.iter().filter(|&&m| epoch > m).count();
        self.base * self.decay.powi(passed as i32)
    }
}

#[derive(Debug, Clone)]
pub struct Adam<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    step: u64,
    m: Vec<Tensor<T>>,
    v: Vec<Tensor<T>>,
}

impl<T: Real> Adam<T> {
    pub fn new(params: &[Tensor<T>]) -> Self {
        let zeros = || params.iter().map(|p| Tensor::zeros(p.shape().to_vec())).collect();
        Adam {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            m: zeros(),
            v: zeros(),
        }
    }

    pub fn steps(&self) -> u64 {
        self.step
    }

    /// One bias-corrected Adam update with learning rate `lr`.
    pub fn step(&mut self, params: &mut [Tensor<T>], grads: &[Tensor<T>], lr: f64) -> Result<()> {
        if params.len() != self.m.len() || grads.len() != params.len() {
            return Err(Error::shape(
                "adam_step",
                format!("{} params, {} grads, {} moments", params.len(), grads.len(), self.m.len()),
            ));
        }
        for ((p, g), m) in params.iter().zip(grads).zip(&self.m) {
            if p.shape() != g.shape() || p.shape() != m.shape() {
                return Err(Error::shape(
                    "adam_step",
                    format!("param {:?} grad {:?}", p.shape(), g.shape()),
                ));
            }
        }
        self.step += 1;
        let t = self.step as i32;
        let b1 = T::from_f64_lossy(self.beta1);
        let b2 = T::from_f64_lossy(self.beta2);
        let c1 = T::from_f64_lossy(1.0 - self.beta1);
        let c2 = T::from_f64_lossy(1.0 - self.beta2);
        let lr_t = T::from_f64_lossy(lr);
        let bc1 = T::from_f64_lossy(1.0 - self.beta1.powi(t));
        let bc2 = T::from_f64_lossy(1.0 - self.beta2.powi(t));
        let eps = T::from_f64_lossy(self.eps);
        for ((p, g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.m.iter_mut().zip(self.v.iter_mut()))
        {
            for (((pv, &gv), mv), vv) in p
                .data_mut()
                .iter_mut()
                .zip(g.data())
                .zip(m.data_mut())
                .zip(v.data_mut())
            {
                *mv = b1 * *mv + c1 * gv;
                *vv = b2 * *vv + c2 * gv * gv;
                let m_hat = *mv / bc1;
                let v_hat = *vv / bc2;
                *pv = *pv - lr_t * m_hat / (v_hat.sqrt() + eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn schedule_values() {
        let s = LrSchedule::default();
        let expect = [(1, 0.003), (100, 0.003), (101, 9e-4), (150, 9e-4), (201, 2.7e-4), (401, 8.1e-5), (801, 2.43e-5)];
        for (epoch, lr) in expect {
            assert!((s.lr(epoch) - lr).abs() <= 1e-15 * lr, "epoch {epoch}: {}", s.lr(epoch));
        }
    }

    #[test]
    fn zero_gradient_leaves_params() {
        let mut p = vec![Tensor::<f64>::matrix(1, 3, vec![1.0, -2.0, 0.5]).unwrap()];
        let before = p.clone();
        let g = vec![Tensor::zeros(vec![1, 3])];
        let mut adam = Adam::new(&p);
        for _ in 0..10 {
            adam.step(&mut p, &g, 0.003).unwrap();
        }
        assert_eq!(p, before);
    }

    #[test]
    fn descends_on_square() {
        let mut p = vec![Tensor::<f64>::scalar(1.0)];
        let mut adam = Adam::new(&p);
        let g = vec![Tensor::scalar(2.0)];
        adam.step(&mut p, &g, 0.003).unwrap();
        assert!(p[0].item() < 1.0);
    }

    #[test]
    fn converges_on_quadratic() {
        // f(w) = sum_i a_i (w_i - c_i)^2, minimum 0
        let a = [1.0, 3.0, 0.5];
        let c = [2.0, -1.0, 0.25];
        let mut p = vec![Tensor::<f64>::zeros(vec![3])];
        let mut adam = Adam::new(&p);
        for _ in 0..1000 {
            let w = p[0].data().to_vec();
            let g: Vec<f64> = (0..3).map(|i| 2.0 * a[i] * (w[i] - c[i])).collect();
            adam.step(&mut p, &[Tensor::from_vec(vec![3], g).unwrap()], 0.1).unwrap();
        }
        let w = p[0].data();
        let f: f64 = (0..3).map(|i| a[i] * (w[i] - c[i]).powi(2)).sum();
        assert!(f < 1e-6, "f = {f}");
    }
}
