use ndarray::{s, Array1, Array2, ArrayView1};
use rand::Rng;

pub type Matrix = Array2<f64>;
pub type Vector = Array1<f64>;

/// Glorot-uniform `rows × cols` matrix.
pub fn xavier(rows: usize, cols: usize, rng: &mut impl Rng) -> Matrix {
    let limit = (6.0 / (rows + cols) as f64).sqrt();
    Matrix::from_shape_fn((rows, cols), |_| rng.gen_range(-limit..limit))
}

/// Affine map `y = W x + b` with `W` stored `out × in`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Matrix,
    pub bias: Vector,
}

impl Dense {
    pub fn new(inputs: usize, outputs: usize, rng: &mut impl Rng) -> Self {
        Dense {
            weight: xavier(outputs, inputs, rng),
            bias: Vector::zeros(outputs),
        }
    }

    pub fn zeros(inputs: usize, outputs: usize) -> Self {
        Dense {
            weight: Matrix::zeros((outputs, inputs)),
            bias: Vector::zeros(outputs),
        }
    }

    pub fn inputs(&self) -> usize {
        self.weight.ncols()
    }

    pub fn outputs(&self) -> usize {
        self.weight.nrows()
    }

    pub fn forward(&self, x: ArrayView1<f64>) -> Vector {
        self.weight.dot(&x) + &self.bias
    }

    /// Accumulate parameter gradients into `grad`; returns `dL/dx`.
    pub fn backward(&self, x: ArrayView1<f64>, dy: ArrayView1<f64>, grad: &mut Dense) -> Vector {
        outer_add(&mut grad.weight, 1.0, dy, x);
        grad.bias += &dy;
        self.weight.t().dot(&dy)
    }

    pub fn parameter_count(&self) -> usize {
        self.weight.len() + self.bias.len()
    }
}

/// `m += scale * a ⊗ b`.
pub fn outer_add(m: &mut Matrix, scale: f64, a: ArrayView1<f64>, b: ArrayView1<f64>) {
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0.0 {
            continue;
        }
        let f = scale * ai;
        let mut row = m.row_mut(i);
        row.scaled_add(f, &b);
    }
}

/// Two affine layers with a tanh between them.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpHead {
    pub hidden: Dense,
    pub output: Dense,
}

pub struct HeadCache {
    input: Vector,
    activation: Vector,
}

impl MlpHead {
    pub fn new(inputs: usize, hidden: usize, classes: usize, rng: &mut impl Rng) -> Self {
        MlpHead {
            hidden: Dense::new(inputs, hidden, rng),
            output: Dense::new(hidden, classes, rng),
        }
    }

    pub fn zeros(inputs: usize, hidden: usize, classes: usize) -> Self {
        MlpHead {
            hidden: Dense::zeros(inputs, hidden),
            output: Dense::zeros(hidden, classes),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.output.outputs()
    }

    pub fn logits(&self, input: &Vector) -> (Vector, HeadCache) {
        let activation = self.hidden.forward(input.view()).mapv(f64::tanh);
        let logits = self.output.forward(activation.view());
        (
            logits,
            HeadCache {
                input: input.clone(),
                activation,
            },
        )
    }

    pub fn backward(&self, cache: &HeadCache, dlogits: &Vector, grad: &mut MlpHead) -> Vector {
        let da = self.output.backward(cache.activation.view(), dlogits.view(), &mut grad.output);
        let dpre = &da * &cache.activation.mapv(|a| 1.0 - a * a);
        self.hidden.backward(cache.input.view(), dpre.view(), &mut grad.hidden)
    }

    pub fn parameter_count(&self) -> usize {
        self.hidden.parameter_count() + self.output.parameter_count()
    }
}

pub fn softmax(logits: &Vector) -> Vector {
    let max = logits.fold(f64::NEG_INFINITY, |m, &x| m.max(x));
    let exp = logits.mapv(|x| (x - max).exp());
    let sum = exp.sum();
    exp / sum
}

/// Concatenate vectors end to end.
pub fn concat(parts: &[&Vector]) -> Vector {
    let n: usize = parts.iter().map(|p| p.len()).sum();
    let mut out = Vector::zeros(n);
    let mut at = 0;
    for p in parts {
        out.slice_mut(s![at..at + p.len()]).assign(p);
        at += p.len();
    }
    out
}
