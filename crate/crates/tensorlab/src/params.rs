use rand::Rng;

use crate::error::{Result, TensorError};
use crate::tensor::Tensor;

/// Handle into a [`ParamStore`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct ParamId(pub(crate) usize);

impl ParamId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Clone, Debug)]
struct Param {
    name: String,
    value: Tensor,
    grad: Option<Tensor>,
    m: Tensor,
    v: Tensor,
}

/// Named trainable matrices together with their Adam moment buffers.
#[derive(Clone, Debug, Default)]
pub struct ParamStore {
    params: Vec<Param>,
    step: u64,
}

impl ParamStore {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: impl Into<String>, value: Tensor) -> Result<ParamId> {
        let name = name.into();
        if self.id(&name).is_some() {
            return Err(TensorError::Contract(format!("duplicate parameter name {name}")));
        }
        let (r, c) = value.shape();
        self.params.push(Param {
            name,
            value,
            grad: None,
            m: Tensor::zeros(r, c),
            v: Tensor::zeros(r, c),
        });
        Ok(ParamId(self.params.len() - 1))
    }

    /// Uniform(-sqrt(6/(fan_in+fan_out)), +sqrt(6/(fan_in+fan_out))) weights
    /// of shape `fan_in x fan_out`.
    pub fn add_glorot<R: Rng + ?Sized>(
        &mut self,
        name: impl Into<String>,
        fan_in: usize,
        fan_out: usize,
        rng: &mut R,
    ) -> Result<ParamId> {
        let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
        let t = Tensor::from_fn(fan_in, fan_out, |_, _| rng.gen_range(-bound..=bound));
        self.add(name, t)
    }

    pub fn add_zeros(&mut self, name: impl Into<String>, rows: usize, cols: usize) -> Result<ParamId> {
        self.add(name, Tensor::zeros(rows, cols))
    }

    pub fn id(&self, name: &str) -> Option<ParamId> {
        self.params.iter().position(|p| p.name == name).map(ParamId)
    }

    pub fn len(&self) -> usize {
        self.params.len()
    }

    pub fn is_empty(&self) -> bool {
        self.params.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = ParamId> {
        (0..self.params.len()).map(ParamId)
    }

    pub fn name(&self, id: ParamId) -> &str {
        &self.params[id.0].name
    }

    pub fn value(&self, id: ParamId) -> &Tensor {
        &self.params[id.0].value
    }

    pub fn value_mut(&mut self, id: ParamId) -> &mut Tensor {
        &mut self.params[id.0].value
    }

    pub fn grad(&self, id: ParamId) -> Option<&Tensor> {
        self.params[id.0].grad.as_ref()
    }

    pub fn step_count(&self) -> u64 {
        self.step
    }

    pub fn num_scalars(&self) -> usize {
        self.params.iter().map(|p| p.value.len()).sum()
    }

    pub fn accumulate_grad(&mut self, id: ParamId, g: &Tensor) -> Result<()> {
        let p = &mut self.params[id.0];
        p.value.same_shape(g, "accumulate_grad")?;
        match &mut p.grad {
            Some(acc) => acc.axpy(1.0, g)?,
            None => p.grad = Some(g.clone()),
        }
        Ok(())
    }

    pub fn zero_grad(&mut self) {
        for p in &mut self.params {
            p.grad = None;
        }
    }

    pub fn has_grads(&self) -> bool {
        self.params.iter().any(|p| p.grad.is_some())
    }

    /// Scales every populated gradient, e.g. to average accumulated batches.
    pub fn scale_grads(&mut self, s: f64) {
        for p in &mut self.params {
            if let Some(g) = &mut p.grad {
                for x in g.data_mut() {
                    *x *= s;
                }
            }
        }
    }

    /// Copies values from `other` for every parameter name present in both.
    /// Shapes must agree.
    pub fn load_values(&mut self, other: &ParamStore) -> Result<usize> {
        let mut n = 0;
        for p in &mut self.params {
            if let Some(q) = other.params.iter().find(|q| q.name == p.name) {
                p.value.same_shape(&q.value, "load_values")?;
                p.value = q.value.clone();
                n += 1;
            }
        }
        Ok(n)
    }

    pub(crate) fn entries(&self) -> impl Iterator<Item = (&str, &Tensor)> {
        self.params.iter().map(|p| (p.name.as_str(), &p.value))
    }
}

/// Adam with decoupled weight decay.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Adam {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
}

impl Adam {
    pub fn new(lr: f64) -> Self {
        Adam {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-6,
        }
    }

    pub fn with_weight_decay(mut self, wd: f64) -> Self {
        self.weight_decay = wd;
        self
    }

    /// One update using the populated gradients, which are then cleared.
    /// Parameters without a gradient only receive weight decay.
    pub fn step(&self, store: &mut ParamStore) -> Result<()> {
        if !store.has_grads() {
            return Err(TensorError::Contract("adam step without gradients".into()));
        }
        store.step += 1;
        let t = store.step as i32;
        let bc1 = 1.0 - self.beta1.powi(t);
        let bc2 = 1.0 - self.beta2.powi(t);
        for p in &mut store.params {
            let grad = p.grad.take();
            let w = p.value.data_mut();
            if let Some(g) = grad {
                let (m, v) = (p.m.data_mut(), p.v.data_mut());
                for i in 0..w.len() {
                    let gi = g.data()[i];
                    m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * gi;
                    v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * gi * gi;
                    let mhat = m[i] / bc1;
                    let vhat = v[i] / bc2;
                    w[i] -= self.lr * (mhat / (vhat.sqrt() + self.eps) + self.weight_decay * w[i]);
                }
            } else {
                for x in w.iter_mut() {
                    *x -= self.lr * self.weight_decay * *x;
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_store(w: f64) -> (ParamStore, ParamId) {
        let mut s = ParamStore::new();
        let id = s.add("w", Tensor::scalar(w)).unwrap();
        (s, id)
    }

    #[test]
    fn first_adam_step_moves_by_lr() {
        let (mut s, id) = scalar_store(1.0);
        s.accumulate_grad(id, &Tensor::scalar(1.0)).unwrap();
        Adam::new(0.1).step(&mut s).unwrap();
        assert!((s.value(id).get(0, 0) - 0.9).abs() < 1e-6);
        assert_eq!(s.step_count(), 1);
        assert!(s.grad(id).is_none());
    }

    #[test]
    fn zero_grad_without_decay_leaves_params() {
        let (mut s, id) = scalar_store(1.25);
        s.accumulate_grad(id, &Tensor::scalar(0.0)).unwrap();
        Adam::new(0.1).with_weight_decay(0.0).step(&mut s).unwrap();
        assert_eq!(s.value(id).get(0, 0), 1.25);
    }

    #[test]
    fn converges_on_quadratic() {
        let (mut s, id) = scalar_store(0.0);
        let opt = Adam::new(1e-2);
        for _ in 0..1000 {
            let w = s.value(id).get(0, 0);
            s.accumulate_grad(id, &Tensor::scalar(2.0 * (w - 3.0))).unwrap();
            opt.step(&mut s).unwrap();
        }
        assert!((s.value(id).get(0, 0) - 3.0).abs() < 1e-2);
    }

    #[test]
    fn step_without_grads_is_contract_error() {
        let (mut s, _) = scalar_store(0.0);
        assert!(matches!(Adam::new(0.1).step(&mut s), Err(TensorError::Contract(_))));
    }

    #[test]
    fn glorot_bounds_and_duplicate_names() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut s = ParamStore::new();
        let id = s.add_glorot("w", 10, 20, &mut rng).unwrap();
        let bound = (6.0f64 / 30.0).sqrt();
        assert!(s.value(id).data().iter().all(|x| x.abs() <= bound));
        assert!(s.add_zeros("w", 1, 1).is_err());
    }
}
