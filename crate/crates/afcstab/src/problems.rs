//! Continuous problem data for the scalar steady convection-diffusion-reaction
//! equation -eps Lap(u) + b.grad(u) + c u = g on the unit square with
//! Dirichlet data u_b, plus a catalog of five benchmark examples.

use std::sync::{Arc, OnceLock};

use thiserror::Error;

pub type ScalarField = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
pub type VectorField = Arc<dyn Fn(f64, f64) -> [f64; 2] + Send + Sync>;

#[derive(Debug, Error)]
pub enum ProblemError {
    #[error("unknown example id {0}, expected 1..=5")]
    UnknownExample(u32),
    #[error("epsilon must be positive, got {0}")]
    InvalidEpsilon(f64),
}

/// Known exact solution together with its gradient.
#[derive(Clone)]
pub struct ExactSolution {
    pub u: ScalarField,
    pub grad: VectorField,
}

/// Evaluable data of one problem instance. All fields are pure functions,
/// safe for concurrent evaluation.
#[derive(Clone)]
pub struct ProblemData {
    pub epsilon: f64,
    pub convection: VectorField,
    pub reaction: ScalarField,
    pub source: ScalarField,
    pub dirichlet: ScalarField,
    /// Lower bound constant for the reaction coefficient.
    pub sigma0: f64,
    pub exact: Option<ExactSolution>,
}

fn constant(v: f64) -> ScalarField {
    Arc::new(move |_, _| v)
}

fn constant_vec(v: [f64; 2]) -> VectorField {
    Arc::new(move |_, _| v)
}

// Factor form of the smooth benchmark solution:
//   u(x,y) = 100 X(x) Y(y),  X = x^2 (1-x)^2,  Y = y (1-y) (1-2y).
fn xf(x: f64) -> f64 {
    x * x * (1.0 - x) * (1.0 - x)
}
fn xf_d(x: f64) -> f64 {
    2.0 * x - 6.0 * x * x + 4.0 * x * x * x
}
fn xf_dd(x: f64) -> f64 {
    2.0 - 12.0 * x + 12.0 * x * x
}
fn yf(y: f64) -> f64 {
    y * (1.0 - y) * (1.0 - 2.0 * y)
}
fn yf_d(y: f64) -> f64 {
    1.0 - 6.0 * y + 6.0 * y * y
}
fn yf_dd(y: f64) -> f64 {
    -6.0 + 12.0 * y
}

fn example1(epsilon: f64) -> ProblemData {
    let u = move |x: f64, y: f64| 100.0 * xf(x) * yf(y);
    let grad = move |x: f64, y: f64| [100.0 * xf_d(x) * yf(y), 100.0 * xf(x) * yf_d(y)];
    // g = -eps Lap(u) + (3,2).grad(u) + u, assembled from the symbolic factors
    let source = move |x: f64, y: f64| {
        let lap = 100.0 * (xf_dd(x) * yf(y) + xf(x) * yf_dd(y));
        let g = grad(x, y);
        -epsilon * lap + 3.0 * g[0] + 2.0 * g[1] + u(x, y)
    };
    ProblemData {
        epsilon,
        convection: constant_vec([3.0, 2.0]),
        reaction: constant(1.0),
        source: Arc::new(source),
        dirichlet: constant(0.0),
        sigma0: 1.0,
        exact: Some(ExactSolution {
            u: Arc::new(u),
            grad: Arc::new(grad),
        }),
    }
}

fn example2(epsilon: f64) -> ProblemData {
    ProblemData {
        epsilon,
        convection: constant_vec([1.0, 0.0]),
        reaction: constant(0.0),
        source: constant(1.0),
        dirichlet: Arc::new(|x, _| x),
        sigma0: 0.0,
        exact: Some(ExactSolution {
            u: Arc::new(|x, _| x),
            grad: constant_vec([1.0, 0.0]),
        }),
    }
}

fn example3(epsilon: f64) -> ProblemData {
    let ub = move |x: f64, _: f64| eval_layer_boundary(x, epsilon);
    // d/dx of the layer solution in the same overflow-free form
    let du = move |x: f64, _: f64| {
        let denom = 1.0 - (-1.0 / epsilon).exp();
        [1.0 - ((x - 1.0) / epsilon).exp() / (epsilon * denom), 0.0]
    };
    ProblemData {
        epsilon,
        convection: constant_vec([1.0, 0.0]),
        reaction: constant(0.0),
        source: constant(1.0),
        dirichlet: Arc::new(ub),
        sigma0: 0.0,
        exact: Some(ExactSolution {
            u: Arc::new(ub),
            grad: Arc::new(du),
        }),
    }
}

fn example4(epsilon: f64) -> ProblemData {
    ProblemData {
        epsilon,
        convection: constant_vec([1.0, 0.0]),
        reaction: constant(0.0),
        source: constant(1.0),
        dirichlet: constant(0.0),
        sigma0: 0.0,
        exact: None,
    }
}

fn ex5_reaction(x: f64, y: f64) -> f64 {
    (3.0 * x + 2.0 * y + 7.0) / ((x + 1.0) * (y + 2.0))
}

/// Minimum of the Example-5 reaction coefficient over the closed unit square,
/// by dense sampling at resolution 1e-3 (computed once).
fn ex5_sigma0() -> f64 {
    static SIGMA0: OnceLock<f64> = OnceLock::new();
    *SIGMA0.get_or_init(|| {
        let n = 1000;
        let mut min = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let c = ex5_reaction(i as f64 / n as f64, j as f64 / n as f64);
                if c < min {
                    min = c;
                }
            }
        }
        min
    })
}

fn example5(epsilon: f64) -> ProblemData {
    let u = |x: f64, y: f64| (x + 1.0) * (y + 2.0);
    ProblemData {
        epsilon,
        convection: constant_vec([-2.0, -3.0]),
        reaction: Arc::new(ex5_reaction),
        source: constant(0.0),
        dirichlet: Arc::new(u),
        sigma0: ex5_sigma0(),
        exact: Some(ExactSolution {
            u: Arc::new(u),
            grad: Arc::new(|x, y| [y + 2.0, x + 1.0]),
        }),
    }
}

/// Benchmark catalog. The paper's runs fix eps = 1e-8 for examples 2-5;
/// the value passed here overrides that.
pub fn catalog(example: u32, epsilon: f64) -> Result<ProblemData, ProblemError> {
    if !(epsilon > 0.0) {
        return Err(ProblemError::InvalidEpsilon(epsilon));
    }
    match example {
        1 => Ok(example1(epsilon)),
        2 => Ok(example2(epsilon)),
        3 => Ok(example3(epsilon)),
        4 => Ok(example4(epsilon)),
        5 => Ok(example5(epsilon)),
        other => Err(ProblemError::UnknownExample(other)),
    }
}

/// Boundary data with an exponential outflow layer,
/// u_b(x) = x - (e^{x/eps} - 1) / (e^{1/eps} - 1),
/// evaluated in a form whose exponents are all nonpositive so that no
/// overflow occurs for any eps > 0.
pub fn eval_layer_boundary(x: f64, epsilon: f64) -> f64 {
    let num = ((x - 1.0) / epsilon).exp() * (1.0 - (-x / epsilon).exp());
    let den = 1.0 - (-1.0 / epsilon).exp();
    x - num / den
}
