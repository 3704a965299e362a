//! Fit radial basis surrogates to exact and noisy samples of a 1-D function
//! and print the interpolant, the noisy band and the merit function.
//!
//! ```bash
//! cargo run --release --example surrogate_fit
//! ```

use wavejoint::rbf::{fit, FitOptions, Kernel, Node};
use wavejoint::space::Bounds;

fn f(x: f64) -> f64 {
    (6.0 * x).sin() + 0.5 * x
}

fn main() {
    let b = Bounds::uniform(1, 0.0, 1.0).unwrap();
    let xs = [0.0, 0.15, 0.4, 0.55, 0.8, 1.0];

    for kernel in [Kernel::Cubic, Kernel::ThinPlate, Kernel::Gaussian { gamma: 20.0 }] {
        let nodes: Vec<Node> = xs.iter().map(|&x| Node::exact(vec![x], f(x))).collect();
        let s = fit(&nodes, &b, &FitOptions::with_kernel(kernel)).unwrap();
        let err = (0..=100).map(|i| i as f64 / 100.0).map(|x| (s.eval(&[x]) - f(x)).abs()).fold(0.0, f64::max);
        println!("{kernel:?}: max error on [0,1] {err:.3}");
    }

    // noisy nodes may move within ±30% of their value; exact ones may not
    let nodes: Vec<Node> = xs
        .iter()
        .enumerate()
        .map(|(i, &x)| if i % 2 == 0 { Node::exact(vec![x], f(x)) } else { Node::noisy(vec![x], f(x) + 0.2, 0.3) })
        .collect();
    let s = fit(&nodes, &b, &FitOptions::default()).unwrap();
    println!("\n  x      observed  fitted   fidelity");
    for n in &nodes {
        println!("  {:.2}   {:7.3}  {:7.3}   {}", n.point[0], n.value, s.eval(&n.point), n.fidelity);
    }

    println!("\n  x     s(x)     merit w=0.5");
    for i in 0..=10 {
        let x = i as f64 / 10.0;
        println!("  {x:.1}  {:7.3}  {:7.3}", s.eval(&[x]), s.merit(&[x], 0.5));
    }
}
