/// Index of the elevation, x-momentum and y-momentum blocks in an element slice.
pub const XI: usize = 0;
pub const MOM_X: usize = 1;
pub const MOM_Y: usize = 2;

/// Modal coefficients for every element, allocated at `k = K(p_max)` modes.
///
/// `c` is laid out `[element][xi | U | V][mode]`, `u` as `[element][u | v][mode]`.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    k: usize,
    num_elements: usize,
    pub c: Vec<f64>,
    pub u: Vec<f64>,
    pub time: f64,
}

impl State {
    pub fn zeros(num_elements: usize, k: usize) -> Self {
        Self {
            k,
            num_elements,
            c: vec![0.0; 3 * k * num_elements],
            u: vec![0.0; 2 * k * num_elements],
            time: 0.0,
        }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    #[inline]
    pub fn c_elem(&self, e: usize) -> &[f64] {
        &self.c[3 * self.k * e..3 * self.k * (e + 1)]
    }

    #[inline]
    pub fn c_elem_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.c[3 * self.k * e..3 * self.k * (e + 1)]
    }

    #[inline]
    pub fn u_elem(&self, e: usize) -> &[f64] {
        &self.u[2 * self.k * e..2 * self.k * (e + 1)]
    }

    #[inline]
    pub fn u_elem_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.u[2 * self.k * e..2 * self.k * (e + 1)]
    }

    /// Coefficients of variable `var` (`XI`, `MOM_X`, `MOM_Y`) on element `e`.
    #[inline]
    pub fn var(&self, e: usize, var: usize) -> &[f64] {
        let base = 3 * self.k * e + var * self.k;
        &self.c[base..base + self.k]
    }

    /// First element holding a NaN or infinite coefficient.
    pub fn first_non_finite(&self) -> Option<usize> {
        let k = self.k;
        (0..self.num_elements).find(|&e| {
            self.c[3 * k * e..3 * k * (e + 1)].iter().any(|v| !v.is_finite())
                || self.u[2 * k * e..2 * k * (e + 1)].iter().any(|v| !v.is_finite())
        })
    }

    /// Largest absolute coefficient difference to another state.
    pub fn max_abs_diff(&self, other: &State) -> f64 {
        self.c
            .iter()
            .zip(&other.c)
            .chain(self.u.iter().zip(&other.u))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Residual buffer shaped like `State::c`.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    k: usize,
    pub data: Vec<f64>,
}

impl Residual {
    pub fn zeros(num_elements: usize, k: usize) -> Self {
        Self {
            k,
            data: vec![0.0; 3 * k * num_elements],
        }
    }

    pub fn clear(&mut self) {
        self.data.iter_mut().for_each(|v| *v = 0.0);
    }

    #[inline]
    pub fn elem_mut(&mut self, e: usize) -> &mut [f64] {
        &mut self.data[3 * self.k * e..3 * self.k * (e + 1)]
    }

    #[inline]
    pub fn elem(&self, e: usize) -> &[f64] {
        &self.data[3 * self.k * e..3 * self.k * (e + 1)]
    }

    /// Two disjoint element slices, for kernels writing both sides of an edge.
    pub fn pair_mut(&mut self, a: usize, b: usize) -> (&mut [f64], &mut [f64]) {
        assert_ne!(a, b);
        let n = 3 * self.k;
        if a < b {
            let (lo, hi) = self.data.split_at_mut(b * n);
            (&mut lo[a * n..(a + 1) * n], &mut hi[..n])
        } else {
            let (lo, hi) = self.data.split_at_mut(a * n);
            (&mut hi[..n], &mut lo[b * n..(b + 1) * n])
        }
    }
}
