//! Small quadrature and interpolation helpers shared by the data and certificate code.

/// Composite Simpson rule with `panels` subintervals (rounded up to even).
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, panels: usize) -> f64 {
    let n = (panels.max(2) + 1) & !1;
    let h = (b - a) / n as f64;
    let mut odd = 0.0;
    let mut even = 0.0;
    for i in 1..n {
        let y = f(a + i as f64 * h);
        if i % 2 == 1 {
            odd += y;
        } else {
            even += y;
        }
    }
    h / 3.0 * (f(a) + f(b) + 4.0 * odd + 2.0 * even)
}

/// Natural cubic spline on a uniform grid, with exact derivatives and
/// antiderivative of the interpolant.
#[derive(Debug, Clone, PartialEq)]
pub struct UniformSpline {
    x0: f64,
    step: f64,
    y: Vec<f64>,
    // second derivatives at the nodes
    m: Vec<f64>,
    // running integral from x0 to each node
    cum: Vec<f64>,
}

impl UniformSpline {
    /// Needs at least 3 samples on `[x0, x0 + (n-1) step]`.
    pub fn new(x0: f64, step: f64, y: Vec<f64>) -> Option<Self> {
        let n = y.len();
        if n < 3 || !(step > 0.0) || y.iter().any(|v| !v.is_finite()) {
            return None;
        }
        // Thomas algorithm for M_{i-1} + 4 M_i + M_{i+1} = 6 (y_{i-1} - 2y_i + y_{i+1}) / h^2
        let mut m = vec![0.0; n];
        let inner = n - 2;
        let mut c = vec![0.0; inner];
        let mut d = vec![0.0; inner];
        for k in 0..inner {
            let i = k + 1;
            let rhs = 6.0 * (y[i - 1] - 2.0 * y[i] + y[i + 1]) / (step * step);
            let (cp, dp) = if k == 0 {
                (0.0, 0.0)
            } else {
                (c[k - 1], d[k - 1])
            };
            let denom = 4.0 - cp;
            c[k] = 1.0 / denom;
            d[k] = (rhs - dp) / denom;
        }
        for k in (0..inner).rev() {
            let next = if k + 1 < inner { m[k + 2] } else { 0.0 };
            m[k + 1] = d[k] - c[k] * next;
        }
        let mut cum = vec![0.0; n];
        for i in 1..n {
            let piece = step * (y[i - 1] + y[i]) / 2.0 - step.powi(3) * (m[i - 1] + m[i]) / 24.0;
            cum[i] = cum[i - 1] + piece;
        }
        Some(Self {
            x0,
            step,
            y,
            m,
            cum,
        })
    }

    pub fn x_end(&self) -> f64 {
        self.x0 + self.step * (self.y.len() - 1) as f64
    }

    fn locate(&self, x: f64) -> (usize, f64) {
        let s = ((x - self.x0) / self.step).clamp(0.0, (self.y.len() - 1) as f64);
        let i = (s.floor() as usize).min(self.y.len() - 2);
        (i, x - (self.x0 + i as f64 * self.step))
    }

    /// Value and first two derivatives. Arguments are clamped to the table.
    pub fn eval(&self, x: f64) -> (f64, f64, f64) {
        let (i, d) = self.locate(x);
        let h = self.step;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        let a = (h - d) / h;
        let b = d / h;
        let v = a * y0 + b * y1 + ((a * a * a - a) * m0 + (b * b * b - b) * m1) * h * h / 6.0;
        let dv =
            (y1 - y0) / h - (3.0 * a * a - 1.0) * h * m0 / 6.0 + (3.0 * b * b - 1.0) * h * m1 / 6.0;
        let d2v = a * m0 + b * m1;
        (v, dv, d2v)
    }

    /// Integral of the interpolant from `x0` to `x` (clamped).
    pub fn integral(&self, x: f64) -> f64 {
        let (i, d) = self.locate(x);
        let h = self.step;
        let (y0, y1, m0, m1) = (self.y[i], self.y[i + 1], self.m[i], self.m[i + 1]);
        // antiderivative of each basis term in d, evaluated from 0 to d
        let a_int = d - d * d / (2.0 * h);
        let b_int = d * d / (2.0 * h);
        let a_cubic = (h * h * h - (h - d).powi(4) / h) / (4.0 * h * h) - a_int;
        let b_cubic = d.powi(4) / (4.0 * h * h * h) - b_int;
        self.cum[i] + y0 * a_int + y1 * b_int + (m0 * a_cubic + m1 * b_cubic) * h * h / 6.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_exact_for_cubics() {
        let v = simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 2.0, 4);
        let exact = (16.0 / 4.0 - 4.0 + 2.0) - (0.25 - 1.0 - 1.0);
        assert!((v - exact).abs() < 1e-13, "{v} vs {exact}");
    }

    #[test]
    fn spline_reproduces_quadratic_interior_and_integral() {
        let xs: Vec<f64> = (0..=200).map(|i| -1.0 + i as f64 * 0.01).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (3.0 * x).sin()).collect();
        let s = UniformSpline::new(-1.0, 0.01, ys).unwrap();
        let (v, dv, _) = s.eval(0.123);
        assert!((v - (0.369f64).sin()).abs() < 1e-7);
        assert!((dv - 3.0 * (0.369f64).cos()).abs() < 1e-4);
        let exact = (-(3.0f64 * 0.5).cos() + (-3.0f64).cos()) / 3.0;
        assert!(
            (s.integral(0.5) - exact).abs() < 1e-6,
            "{}",
            s.integral(0.5)
        );
        assert!((s.integral(s.x_end()) - s.cum[200]).abs() < 1e-15);
    }

    #[test]
    fn spline_integral_is_continuous_at_nodes() {
        let s = UniformSpline::new(0.0, 0.5, vec![0.0, 1.0, 4.0, 2.0, 0.0]).unwrap();
        for i in 1..4 {
            let x = i as f64 * 0.5;
            assert!((s.integral(x - 1e-12) - s.integral(x + 1e-12)).abs() < 1e-9);
        }
    }
}
