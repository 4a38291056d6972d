//! Dense bivariate polynomials with exact integration over the reference
//! triangle and along straight segments.
//!
//! Coefficients multiply monomials of the centred coordinates
//! `X = x - 1/3`, `Y = y - 1/3`. Orthogonal polynomials on the triangle have
//! far smaller coefficients in this form than around the origin, which keeps
//! products and integrals free of cancellation.

/// Position of `x^a y^b` in the coefficient vector (graded by total degree).
#[inline]
pub fn tri_index(a: usize, b: usize) -> usize {
    let d = a + b;
    d * (d + 1) / 2 + b
}

fn factorial(n: usize) -> f64 {
    (1..=n).fold(1.0, |acc, k| acc * k as f64)
}

/// Reference-triangle centroid coordinate.
const CENTRE: f64 = 1.0 / 3.0;

fn binomial(n: usize, k: usize) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// `int X^a Y^b` over the reference triangle, exact up to the final rounding.
///
/// Expanding `X = x - 1/3` gives `sum C(a,i) C(b,j) (-1/3)^(a+b-i-j) i! j! / (i+j+2)!`.
/// The sum alternates and nearly cancels at high degree, so it is accumulated
/// over the common denominator `3^(a+b) (a+b+2)!` in integers.
fn centred_moment(a: usize, b: usize) -> f64 {
    let fact = |n: usize| (1..=n as i128).product::<i128>();
    let choose = |n: usize, k: usize| fact(n) / (fact(k) * fact(n - k));
    let n = a + b;
    let mut num: i128 = 0;
    for i in 0..=a {
        for j in 0..=b {
            let sign = if (n - i - j).is_multiple_of(2) { 1 } else { -1 };
            num += sign * choose(a, i) * choose(b, j) * 3i128.pow((i + j) as u32) * fact(i) * fact(j) * fact(n + 2)
                / fact(i + j + 2);
        }
    }
    num as f64 / (3i128.pow(n as u32) * fact(n + 2)) as f64
}

#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    degree: usize,
    coeffs: Vec<f64>,
}

impl Poly {
    pub fn zero(degree: usize) -> Self {
        Self {
            degree,
            coeffs: vec![0.0; tri_index(0, degree) + 1],
        }
    }

    pub fn monomial(a: usize, b: usize) -> Self {
        let mut p = Self::zero(a + b);
        p.coeffs[tri_index(a, b)] = 1.0;
        p
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn coeff(&self, a: usize, b: usize) -> f64 {
        if a + b > self.degree {
            0.0
        } else {
            self.coeffs[tri_index(a, b)]
        }
    }

    fn terms(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..=self.degree).flat_map(move |d| {
            (0..=d).map(move |b| {
                let a = d - b;
                (a, b, self.coeffs[tri_index(a, b)])
            })
        })
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (x, y) = (x - CENTRE, y - CENTRE);
        let mut xp = [1.0; 16];
        let mut yp = [1.0; 16];
        for k in 1..=self.degree {
            xp[k] = xp[k - 1] * x;
            yp[k] = yp[k - 1] * y;
        }
        self.terms().map(|(a, b, c)| c * xp[a] * yp[b]).sum()
    }

    /// `self += scale * other`, growing the degree if needed.
    pub fn add_scaled(&mut self, other: &Poly, scale: f64) {
        if other.degree > self.degree {
            let mut grown = Poly::zero(other.degree);
            for (a, b, c) in self.terms() {
                grown.coeffs[tri_index(a, b)] = c;
            }
            *self = grown;
        }
        for (a, b, c) in other.terms() {
            self.coeffs[tri_index(a, b)] += scale * c;
        }
    }

    pub fn scaled(&self, s: f64) -> Poly {
        Poly {
            degree: self.degree,
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero(self.degree + other.degree);
        for (a1, b1, c1) in self.terms() {
            if c1 == 0.0 {
                continue;
            }
            for (a2, b2, c2) in other.terms() {
                out.coeffs[tri_index(a1 + a2, b1 + b2)] += c1 * c2;
            }
        }
        out
    }

    pub fn dx(&self) -> Poly {
        let mut out = Poly::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if a > 0 {
                out.coeffs[tri_index(a - 1, b)] += a as f64 * c;
            }
        }
        out
    }

    pub fn dy(&self) -> Poly {
        let mut out = Poly::zero(self.degree.saturating_sub(1));
        for (a, b, c) in self.terms() {
            if b > 0 {
                out.coeffs[tri_index(a, b - 1)] += b as f64 * c;
            }
        }
        out
    }

    /// Exact integral over the reference triangle (0,0), (1,0), (0,1).
    pub fn integrate_reference(&self) -> f64 {
        self.terms().map(|(a, b, c)| c * centred_moment(a, b)).sum()
    }

    /// Restriction to the segment `start + t (end - start)`, t in [0, 1],
    /// as coefficients of a univariate polynomial in t.
    pub fn restrict(&self, start: [f64; 2], end: [f64; 2]) -> Line {
        let d = [end[0] - start[0], end[1] - start[1]];
        // expand about the segment midpoint in centred coordinates
        let start = [start[0] + 0.5 * d[0] - CENTRE, start[1] + 0.5 * d[1] - CENTRE];
        let mut out = vec![0.0; self.degree + 1];
        for (a, b, c) in self.terms() {
            if c == 0.0 {
                continue;
            }
            // (x0 + t dx)^a (y0 + t dy)^b expanded by the binomial theorem
            for k in 0..=a {
                let ca = binomial(a, k) * start[0].powi((a - k) as i32) * d[0].powi(k as i32);
                for l in 0..=b {
                    let cb = binomial(b, l) * start[1].powi((b - l) as i32) * d[1].powi(l as i32);
                    out[k + l] += c * ca * cb;
                }
            }
        }
        Line(out)
    }
}

/// Univariate polynomial along a segment, in powers of `s = t - 1/2` where
/// `t` in [0, 1] is the segment parameter.
#[derive(Debug, Clone, PartialEq)]
pub struct Line(pub Vec<f64>);

impl Line {
    pub fn mul(&self, other: &Line) -> Line {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Line(out)
    }

    pub fn eval(&self, t: f64) -> f64 {
        let s = t - 0.5;
        self.0.iter().rev().fold(0.0, |acc, c| acc * s + c)
    }

    /// Exact integral over t in [0, 1]; odd powers of `s` vanish.
    pub fn integrate_unit(&self) -> f64 {
        self.0
            .iter()
            .enumerate()
            .step_by(2)
            .map(|(k, c)| c * 0.5f64.powi(k as i32) / (k + 1) as f64)
            .sum()
    }
}
