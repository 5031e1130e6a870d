//! Multiprecision quadrature rules: Gauss–Legendre (cached per order and
//! precision) and tanh–sinh for integrands with endpoint singularities.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rug::Float;

use crate::mp::{Precision, Real};

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
#[derive(Debug)]
pub struct GaussLegendre {
    pub nodes: Vec<Real>,
    pub weights: Vec<Real>,
}

type RuleCache = Mutex<HashMap<(usize, u32), Arc<GaussLegendre>>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// `(P_n(x), P_n'(x))` by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: &Real) -> (Real, Real) {
    let bits = x.prec();
    let mut p0 = Float::with_val(bits, 1);
    let mut p1 = x.clone();
    for k in 2..=n {
        let kf = k as u32;
        let p2 = (Float::with_val(bits, x * &p1) * (2 * kf - 1) - Float::with_val(bits, &p0 * (kf - 1))) / kf;
        p0 = p1;
        p1 = p2;
    }
    // (1 - x^2) P_n' = n (P_{n-1} - x P_n)
    let num = (Float::with_val(bits, &p0 - x * &p1)) * n as u32;
    let den = Float::with_val(bits, 1) - Float::with_val(bits, x * x);
    (p1, num / den)
}

impl GaussLegendre {
    pub fn new(n: usize, prec: Precision) -> Arc<GaussLegendre> {
        let bits = prec.bits();
        let key = (n, bits);
        if let Some(rule) = rule_cache().lock().expect("rule cache poisoned").get(&key) {
            return rule.clone();
        }
        let rule = Arc::new(Self::compute(n, bits));
        rule_cache()
            .lock()
            .expect("rule cache poisoned")
            .insert(key, rule.clone());
        rule
    }

    fn compute(n: usize, bits: u32) -> GaussLegendre {
        assert!(n >= 1);
        let half = n.div_ceil(2);
        let mut nodes = vec![Float::new(bits); n];
        let mut weights = vec![Float::new(bits); n];
        let tol = Float::with_val(bits, Float::i_exp(1, -(bits as i32) + 8));
        for i in 0..half {
            // Tricomi initial guess, then Newton at full precision.
            let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
            let guess = theta.cos() * (1.0 - (1.0 - 1.0 / n as f64) / (8.0 * (n * n) as f64));
            let mut x = Float::with_val(bits, guess);
            let mut dp = Float::new(bits);
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, &x);
                let dx = Float::with_val(bits, &p / &d);
                x -= &dx;
                dp = d;
                if dx.clone().abs() < tol {
                    let (_, d) = legendre_with_derivative(n, &x);
                    dp = d;
                    break;
                }
            }
            let one_minus = Float::with_val(bits, 1) - Float::with_val(bits, &x * &x);
            let w = Float::with_val(bits, 2) / (one_minus * Float::with_val(bits, &dp * &dp));
            nodes[i] = -x.clone();
            weights[i] = w.clone();
            nodes[n - 1 - i] = x;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = Float::new(bits);
        }
        GaussLegendre { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: &Real, b: &Real) -> Vec<(Real, Real)> {
        let bits = a.prec().max(b.prec());
        let half = Float::with_val(bits, b - a) / 2u32;
        let mid = Float::with_val(bits, a + b) / 2u32;
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(x, w)| {
                (
                    Float::with_val(bits, &mid + Float::with_val(bits, &half * x)),
                    Float::with_val(bits, &half * w),
                )
            })
            .collect()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Result of an adaptive quadrature.
#[derive(Debug, Clone)]
pub struct QuadResult {
    pub value: Real,
    /// Difference between the last two refinement levels.
    pub error_estimate: f64,
    pub levels: usize,
}

/// Tanh–sinh quadrature of `f` over `[a, b]`.
///
/// `f` receives the abscissa and its distance to the nearer endpoint (computed
/// without cancellation), so integrands with endpoint singularities can be
/// evaluated accurately. Refinement halves the step until two levels agree to
/// `rel_tol` relatively.
pub fn tanh_sinh<F>(
    mut f: F,
    a: &Real,
    b: &Real,
    prec: Precision,
    rel_tol: f64,
    max_levels: usize,
) -> Result<QuadResult, QuadResult>
where
    F: FnMut(&Real, &Real) -> Real,
{
    let bits = prec.bits();
    let pi_half = prec.pi() / 2u32;
    let d = Float::with_val(bits, b - a) / 2u32;
    let c = Float::with_val(bits, a + b) / 2u32;
    // Beyond t_max the weights underflow the working precision.
    let t_max = ((4.0 * prec.decimal_digits() as f64 * std::f64::consts::LN_10 / std::f64::consts::PI).ln()).max(3.0);

    let mut eval_at = |t: f64| -> Real {
        let tt = Float::with_val(bits, t);
        let u = Float::with_val(bits, &pi_half * tt.clone().sinh());
        let cu = u.clone().cosh();
        let w = Float::with_val(bits, &pi_half * tt.cosh()) / Float::with_val(bits, &cu * &cu);
        if t == 0.0 {
            return f(&c, &d) * w;
        }
        // delta = 1 - tanh(|u|) = 2 / (exp(2|u|) + 1)
        let ua = u.clone().abs();
        let delta = Float::with_val(bits, 2) / (Float::with_val(bits, ua * 2u32).exp() + 1u32);
        let dist = Float::with_val(bits, &d * &delta);
        let right = Float::with_val(bits, b - &dist);
        let left = Float::with_val(bits, a + &dist);
        let fr = f(&right, &dist);
        let fl = f(&left, &dist);
        (fr + fl) * w
    };

    let mut h = 0.5f64;
    let mut sum = eval_at(0.0);
    let mut k = 1;
    while (k as f64) * h <= t_max {
        sum += eval_at(k as f64 * h);
        k += 1;
    }
    let mut estimate = Float::with_val(bits, &sum * &d) * h;
    let mut last_err = f64::INFINITY;
    for level in 1..=max_levels {
        h /= 2.0;
        let mut k = 1;
        while (k as f64) * h <= t_max {
            sum += eval_at(k as f64 * h);
            k += 2;
        }
        let next = Float::with_val(bits, &sum * &d) * h;
        let diff = Float::with_val(bits, &next - &estimate).abs().to_f64();
        let scale = next.clone().abs().to_f64();
        estimate = next;
        last_err = diff;
        if level >= 2 && diff <= rel_tol * scale {
            return Ok(QuadResult {
                value: estimate,
                error_estimate: diff,
                levels: level,
            });
        }
    }
    Err(QuadResult {
        value: estimate,
        error_estimate: last_err,
        levels: max_levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rug::ops::Pow;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let p = Precision::digits(60);
        let rule = GaussLegendre::new(10, p);
        // integral of x^18 over [-1,1] = 2/19
        let mut acc = p.zero();
        for (x, w) in rule.nodes.iter().zip(&rule.weights) {
            acc += Float::with_val(p.bits(), x.clone().pow(18u32) * w);
        }
        let exact = p.real(2.0) / 19u32;
        assert!((acc - exact).abs().to_f64() < 1e-55);
    }

    #[test]
    fn gauss_legendre_weights_sum_to_two() {
        let p = Precision::digits(100);
        for n in [1, 2, 7, 64] {
            let rule = GaussLegendre::new(n, p);
            let s: Real = rule.weights.iter().fold(p.zero(), |acc, w| acc + w);
            assert!((s - 2u32).abs().to_f64() < 1e-95, "n = {n}");
        }
    }

    #[test]
    fn tanh_sinh_handles_log_endpoint() {
        // integral_0^1 -ln(x) dx = 1
        let p = Precision::digits(40);
        let r = tanh_sinh(|x, _| -(x.clone().ln()), &p.zero(), &p.one(), p, 1e-30, 12).expect("converges");
        assert!((r.value - 1u32).abs().to_f64() < 1e-30);
    }

    #[test]
    fn tanh_sinh_inverse_sqrt_singularity() {
        // integral_0^1 x^{-1/2} dx = 2, using the endpoint distance
        let p = Precision::digits(40);
        let r = tanh_sinh(
            |x, dist| {
                let near_left = x.clone() < 0.5f64;
                let t = if near_left { dist.clone() } else { x.clone() };
                t.sqrt().recip()
            },
            &p.zero(),
            &p.one(),
            p,
            1e-30,
            12,
        )
        .expect("converges");
        assert!((r.value - 2u32).abs().to_f64() < 1e-28);
    }
}
