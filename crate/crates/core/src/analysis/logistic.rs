//! Binary and multinomial logistic regression trained by full-batch
//! gradient descent.
//!
//! Parameters are laid out row per class as `[bias, w_1, ..., w_d]`. The
//! binary model has a single row. L2 regularization skips the bias.

/// Dense row-major feature matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Design {
    pub fn new(cols: usize) -> Self {
        Design { rows: 0, cols, data: Vec::new() }
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let cols = rows.first().map_or(0, Vec::len);
        let mut d = Design::new(cols);
        for r in rows {
            d.push_row(r);
        }
        d
    }

    pub fn push_row(&mut self, row: &[f64]) {
        assert_eq!(row.len(), self.cols, "row arity");
        self.data.extend_from_slice(row);
        self.rows += 1;
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> impl Iterator<Item = f64> + '_ {
        self.data.iter().skip(j).step_by(self.cols.max(1)).copied()
    }
}

/// Per-column mean and (population) standard deviation.
#[derive(Debug, Clone, PartialEq)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Standardizer {
    pub fn fit(x: &Design) -> Self {
        let n = x.rows.max(1) as f64;
        let mut means = vec![0.0; x.cols];
        for i in 0..x.rows {
            for (m, v) in means.iter_mut().zip(x.row(i)) {
                *m += v;
            }
        }
        means.iter_mut().for_each(|m| *m /= n);
        let mut vars = vec![0.0; x.cols];
        for i in 0..x.rows {
            for ((s, v), m) in vars.iter_mut().zip(x.row(i)).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        let stds = vars.into_iter().map(|s| (s / n).sqrt()).collect();
        Standardizer { means, stds }
    }

    pub fn apply(&self, x: &mut Design) {
        for row in x.data.chunks_mut(x.cols.max(1)) {
            for ((v, m), s) in row.iter_mut().zip(&self.means).zip(&self.stds) {
                *v = (*v - m) / s;
            }
        }
    }
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + e^z)` without overflow.
fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

#[inline]
fn affine(row: &[f64], params: &[f64]) -> f64 {
    params[0] + row.iter().zip(&params[1..]).map(|(x, w)| x * w).sum::<f64>()
}

/// Mean logistic loss plus `l2/2 * |w|^2`, and its gradient.
/// `labels` are 0/1.
pub fn binary_loss_grad(x: &Design, labels: &[u8], params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    assert_eq!(params.len(), x.cols + 1);
    let m = x.rows as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    for (i, &y) in labels.iter().enumerate() {
        let row = x.row(i);
        let z = affine(row, params);
        loss += softplus(z) - f64::from(y) * z;
        let r = sigmoid(z) - f64::from(y);
        grad[0] += r;
        for (g, v) in grad[1..].iter_mut().zip(row) {
            *g += r * v;
        }
    }
    loss /= m;
    grad.iter_mut().for_each(|g| *g /= m);
    for (g, w) in grad[1..].iter_mut().zip(&params[1..]) {
        *g += l2 * w;
    }
    loss += 0.5 * l2 * params[1..].iter().map(|w| w * w).sum::<f64>();
    (loss, grad)
}

/// Mean softmax cross-entropy plus `l2/2 * |W|^2`, and its gradient.
/// `params` holds `classes` rows of `cols + 1` values.
pub fn softmax_loss_grad(x: &Design, labels: &[u8], classes: usize, params: &[f64], l2: f64) -> (f64, Vec<f64>) {
    let width = x.cols + 1;
    assert_eq!(params.len(), classes * width);
    let m = x.rows as f64;
    let mut loss = 0.0;
    let mut grad = vec![0.0; params.len()];
    let mut logits = vec![0.0; classes];
    for (i, &y) in labels.iter().enumerate() {
        let row = x.row(i);
        for (k, z) in logits.iter_mut().enumerate() {
            *z = affine(row, &params[k * width..(k + 1) * width]);
        }
        let top = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let norm: f64 = logits.iter().map(|z| (z - top).exp()).sum();
        let log_norm = top + norm.ln();
        loss += log_norm - logits[y as usize];
        for (k, z) in logits.iter().enumerate() {
            let r = (z - log_norm).exp() - f64::from(u8::from(k == y as usize));
            let g = &mut grad[k * width..(k + 1) * width];
            g[0] += r;
            for (gv, v) in g[1..].iter_mut().zip(row) {
                *gv += r * v;
            }
        }
    }
    loss /= m;
    grad.iter_mut().for_each(|g| *g /= m);
    for k in 0..classes {
        let row = k * width;
        for j in 1..width {
            grad[row + j] += l2 * params[row + j];
            loss += 0.5 * l2 * params[row + j] * params[row + j];
        }
    }
    (loss, grad)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams {
    pub learning_rate: f64,
    pub l2: f64,
    pub max_epochs: usize,
    pub grad_tol: f64,
    pub seed: u64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams { learning_rate: 0.1, l2: 1e-4, max_epochs: 500, grad_tol: 1e-6, seed: 42 }
    }
}

/// Loss after every accepted step, starting with the initial loss.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrainingTrace {
    pub losses: Vec<f64>,
    pub epochs: usize,
    pub final_grad_norm: f64,
    pub final_learning_rate: f64,
}

/// Full-batch gradient descent from `init`. A step that raises the loss is
/// rejected and retried with half the learning rate.
pub fn gradient_descent<F>(init: Vec<f64>, hp: &Hyperparams, mut objective: F) -> (Vec<f64>, TrainingTrace)
where
    F: FnMut(&[f64]) -> (f64, Vec<f64>),
{
    let mut params = init;
    let (mut loss, mut grad) = objective(&params);
    let mut lr = hp.learning_rate;
    let mut trace = TrainingTrace { losses: vec![loss], ..TrainingTrace::default() };
    let norm = |g: &[f64]| g.iter().map(|v| v * v).sum::<f64>().sqrt();

    'epochs: while trace.epochs < hp.max_epochs && norm(&grad) >= hp.grad_tol {
        trace.epochs += 1;
        loop {
            let candidate: Vec<f64> = params.iter().zip(&grad).map(|(p, g)| p - lr * g).collect();
            let (c_loss, c_grad) = objective(&candidate);
            if c_loss <= loss {
                params = candidate;
                loss = c_loss;
                grad = c_grad;
                trace.losses.push(loss);
                break;
            }
            lr *= 0.5;
            if lr < 1e-12 {
                break 'epochs;
            }
        }
    }
    trace.final_grad_norm = norm(&grad);
    trace.final_learning_rate = lr;
    (params, trace)
}
