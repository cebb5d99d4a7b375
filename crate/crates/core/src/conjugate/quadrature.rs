use std::sync::OnceLock;

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Roots of `P_n` by Newton iteration from the Chebyshev-like initial
    /// guesses, weights `2 / ((1 - x^2) P_n'(x)^2)`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        Self { nodes, weights }
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let p = if n == 0 { 1.0 } else { p1 };
    let dp = n as f64 * (x * p - p0) / (x * x - 1.0);
    (p, dp)
}

pub const MOLLIFIER_NODES: usize = 64;

/// Bump mollifier `c exp(-1/(1-t^2))` discretized on the 64-node rule, with
/// `c` chosen so the discrete mass is exactly one.
#[derive(Clone, Debug)]
pub struct Mollifier {
    /// Quadrature nodes in `(-1, 1)`.
    pub nodes: Vec<f64>,
    /// `w_i * phi(t_i)`, summing to one.
    pub masses: Vec<f64>,
    pub normalization: f64,
}

fn bump(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

impl Mollifier {
    pub fn standard() -> &'static Mollifier {
        static CELL: OnceLock<Mollifier> = OnceLock::new();
        CELL.get_or_init(|| {
            let rule = GaussLegendre::new(MOLLIFIER_NODES);
            let mass = rule.integrate(bump);
            let c = 1.0 / mass;
            let masses = rule
                .nodes
                .iter()
                .zip(&rule.weights)
                .map(|(&t, &w)| c * w * bump(t))
                .collect();
            Mollifier {
                nodes: rule.nodes,
                masses,
                normalization: c,
            }
        })
    }

    pub fn density(&self, t: f64) -> f64 {
        self.normalization * bump(t)
    }

    /// `int phi(t) g(t) dt`
    pub fn average(&self, g: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.masses)
            .map(|(&t, &m)| m * g(t))
            .sum()
    }
}
