use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::joint::{clamp_and_round, JointConfig};
use crate::oracle::StiffnessTriple;
use crate::space::Bounds;

use super::{BaselineError, Dataset};

/// Fewest records a net is trained on.
pub const MIN_TRAINING_SIZE: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NetHyper {
    /// Hidden layer widths; empty gives an affine model.
    pub hidden: Vec<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for NetHyper {
    fn default() -> Self {
        NetHyper { hidden: vec![32, 32], epochs: 1500, learning_rate: 0.01, seed: 0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Layer {
    w: DMatrix<f64>,
    b: DVector<f64>,
}

/// Adam moments for one layer.
#[derive(Debug, Clone)]
struct Moments {
    mw: DMatrix<f64>,
    vw: DMatrix<f64>,
    mb: DVector<f64>,
    vb: DVector<f64>,
}

/// Regressor from log-stiffness to a box-normalized joint config.
#[derive(Debug, Clone)]
pub struct InverseNet {
    layers: Vec<Layer>,
    moments: Vec<Moments>,
    step: i32,
    mean: [f64; 3],
    scale: [f64; 3],
    bounds: Bounds,
    pub hyper: NetHyper,
    /// Training MSE before the first and after the last epoch.
    pub initial_loss: f64,
    pub final_loss: f64,
}

/// A raw network output and its projection.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub raw: [f64; 5],
    pub config: JointConfig,
    /// Whether some raw coordinate lay outside its bounds.
    pub clamped: bool,
}

fn features(k: &StiffnessTriple) -> [f64; 3] {
    k.as_array().map(f64::ln)
}

impl InverseNet {
    fn new(bounds: &Bounds, hyper: &NetHyper, mean: [f64; 3], scale: [f64; 3]) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
        let mut sizes = vec![3];
        sizes.extend(&hyper.hidden);
        sizes.push(5);
        let layers: Vec<Layer> = sizes
            .windows(2)
            .map(|p| {
                // Glorot uniform
                let a = (6.0 / (p[0] + p[1]) as f64).sqrt();
                Layer { w: DMatrix::from_fn(p[1], p[0], |_, _| rng.gen_range(-a..a)), b: DVector::zeros(p[1]) }
            })
            .collect();
        let moments = layers
            .iter()
            .map(|l| Moments {
                mw: DMatrix::zeros(l.w.nrows(), l.w.ncols()),
                vw: DMatrix::zeros(l.w.nrows(), l.w.ncols()),
                mb: DVector::zeros(l.b.len()),
                vb: DVector::zeros(l.b.len()),
            })
            .collect();
        InverseNet {
            layers,
            moments,
            step: 0,
            mean,
            scale,
            bounds: bounds.clone(),
            hyper: hyper.clone(),
            initial_loss: f64::NAN,
            final_loss: f64::NAN,
        }
    }

    fn inputs(&self, ks: &[StiffnessTriple]) -> DMatrix<f64> {
        DMatrix::from_fn(3, ks.len(), |i, j| (features(&ks[j])[i] - self.mean[i]) / self.scale[i])
    }

    /// Activations of every layer; the last entry is the output.
    fn forward(&self, x: &DMatrix<f64>) -> Vec<DMatrix<f64>> {
        let mut acts = vec![x.clone()];
        for (i, l) in self.layers.iter().enumerate() {
            let mut z = &l.w * acts.last().unwrap();
            for mut c in z.column_iter_mut() {
                c += &l.b;
            }
            if i + 1 < self.layers.len() {
                z.apply(|v| *v = v.tanh());
            }
            acts.push(z);
        }
        acts
    }

    fn loss(out: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
        (out - y).norm_squared() / (y.len() as f64)
    }

    /// `epochs` full-batch Adam steps on `(x, y)`; returns the loss before
    /// the first step and after the last.
    fn train(&mut self, x: &DMatrix<f64>, y: &DMatrix<f64>, epochs: usize) -> (f64, f64) {
        let (b1, b2, eps) = (0.9f64, 0.999f64, 1e-8);
        let lr = self.hyper.learning_rate;
        let first = Self::loss(self.forward(x).last().unwrap(), y);
        for _ in 0..epochs {
            let acts = self.forward(x);
            let mut delta = (acts.last().unwrap() - y) * (2.0 / y.len() as f64);
            self.step += 1;
            let (c1, c2) = (1.0 - b1.powi(self.step), 1.0 - b2.powi(self.step));
            for i in (0..self.layers.len()).rev() {
                let gw = &delta * acts[i].transpose();
                let gb = delta.column_sum();
                if i > 0 {
                    let mut back = self.layers[i].w.transpose() * &delta;
                    back.zip_apply(&acts[i], |d, a| *d *= 1.0 - a * a);
                    delta = back;
                }
                let m = &mut self.moments[i];
                m.mw = &m.mw * b1 + &gw * (1.0 - b1);
                m.vw = &m.vw * b2 + gw.component_mul(&gw) * (1.0 - b2);
                m.mb = &m.mb * b1 + &gb * (1.0 - b1);
                m.vb = &m.vb * b2 + gb.component_mul(&gb) * (1.0 - b2);
                let l = &mut self.layers[i];
                l.w.zip_zip_apply(&m.mw, &m.vw, |w, mw, vw| *w -= lr * (mw / c1) / ((vw / c2).sqrt() + eps));
                l.b.zip_zip_apply(&m.mb, &m.vb, |b, mb, vb| *b -= lr * (mb / c1) / ((vb / c2).sqrt() + eps));
            }
        }
        (first, Self::loss(self.forward(x).last().unwrap(), y))
    }

    fn training_pairs(&self, d: &Dataset) -> (DMatrix<f64>, DMatrix<f64>) {
        let ks: Vec<StiffnessTriple> = d.records().iter().map(|r| r.stiffness).collect();
        let x = self.inputs(&ks);
        let y = DMatrix::from_fn(5, d.len(), |i, j| {
            let vb = self.bounds.var(i);
            (d.records()[j].config.to_array()[i] - vb.lower) / vb.width()
        });
        (x, y)
    }

    /// Continue training on `d` (for instance after it grew) without resetting
    /// weights or the input scaling.
    pub fn refine(&mut self, d: &Dataset, epochs: usize) {
        let (x, y) = self.training_pairs(d);
        let (_, last) = self.train(&x, &y, epochs);
        self.final_loss = last;
    }

    /// Raw output mapped back to physical units, before projection.
    pub fn predict_raw(&self, target: &StiffnessTriple) -> [f64; 5] {
        let out = self.forward(&self.inputs(&[*target])).pop().unwrap();
        std::array::from_fn(|i| {
            let vb = self.bounds.var(i);
            vb.lower + out[(i, 0)] * vb.width()
        })
    }

    pub fn bounds(&self) -> &Bounds {
        &self.bounds
    }
}

/// Fit an [`InverseNet`] on `d` by full-batch Adam on the mean squared error.
pub fn train_inverse_net(d: &Dataset, bounds: &Bounds, hyper: &NetHyper) -> Result<InverseNet, BaselineError> {
    assert_eq!(bounds.dim(), 5, "joint bounds have five variables");
    if d.len() < MIN_TRAINING_SIZE {
        return Err(BaselineError::InsufficientData { needed: MIN_TRAINING_SIZE, have: d.len() });
    }
    let n = d.len() as f64;
    let mut mean = [0.0; 3];
    let mut scale = [0.0; 3];
    for r in d.records() {
        for (m, f) in mean.iter_mut().zip(features(&r.stiffness)) {
            *m += f / n;
        }
    }
    for r in d.records() {
        for i in 0..3 {
            scale[i] += (features(&r.stiffness)[i] - mean[i]).powi(2) / n;
        }
    }
    let scale = scale.map(|v| if v > 1e-24 { v.sqrt() } else { 1.0 });
    let mut net = InverseNet::new(bounds, hyper, mean, scale);
    let (x, y) = net.training_pairs(d);
    let (first, last) = net.train(&x, &y, hyper.epochs);
    net.initial_loss = first;
    net.final_loss = last;
    Ok(net)
}

/// Predict a config for `target` and project it onto `b`.
pub fn zero_shot_net(net: &InverseNet, target: &StiffnessTriple, b: &Bounds) -> Prediction {
    let raw = net.predict_raw(target);
    let clamped = raw.iter().zip(b.vars()).any(|(x, vb)| !(*x >= vb.lower && *x <= vb.upper));
    if clamped {
        log::info!("network output {raw:?} left the bounds and was clamped");
    }
    Prediction { raw, config: clamp_and_round(&raw, b), clamped }
}
