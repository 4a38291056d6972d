//! Per-element order field, base/correction index ranges and the jump
//! indicator driving dynamic order changes.

use crate::basis::num_modes;
use crate::dg::{mean_depth, Discretization, IndexRange, KernelRanges, State, XI};
use crate::error::SolverError;

/// Test `[1, K(b)]`, trial `[1, K(b)]`.
pub fn base_ranges(base: usize) -> KernelRanges {
    KernelRanges::full(num_modes(base))
}

/// The two correction parts for orders `b` and `p = b + 1`:
/// test `[1, K(b)]` with trial `[K(b)+1, K(p)]`, then test `[K(b)+1, K(p)]`
/// with trial `[1, K(p)]`.
pub fn correction_ranges(base: usize, full: usize) -> [KernelRanges; 2] {
    let kb = num_modes(base);
    let kp = num_modes(full);
    let high = IndexRange::new(kb + 1, kp).expect("correction needs full > base");
    [
        KernelRanges {
            test: IndexRange::upto(kb),
            trial: high,
        },
        KernelRanges {
            test: high,
            trial: IndexRange::upto(kp),
        },
    ]
}

/// Active order of every element, restricted to `{b, b + 1}`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrderField {
    base: usize,
    orders: Vec<u8>,
    /// Elements raised by the most recent `apply_order_change`.
    pub raised: Vec<usize>,
    /// Elements lowered by the most recent `apply_order_change`.
    pub lowered: Vec<usize>,
}

impl OrderField {
    /// All elements at the base order.
    pub fn new(base: usize, num_elements: usize) -> Result<Self, SolverError> {
        if base > 2 {
            return Err(SolverError::Config(format!(
                "base order {base} leaves no room for a higher order (maximum 3)"
            )));
        }
        Ok(Self {
            base,
            orders: vec![base as u8; num_elements],
            raised: Vec::new(),
            lowered: Vec::new(),
        })
    }

    /// Elements with index divisible by `every` use the higher order.
    pub fn every_kth(base: usize, num_elements: usize, every: usize) -> Result<Self, SolverError> {
        if every == 0 {
            return Err(SolverError::Config("fraction must be at least 1".into()));
        }
        let mut f = Self::new(base, num_elements)?;
        for (e, o) in f.orders.iter_mut().enumerate() {
            if e % every == 0 {
                *o += 1;
            }
        }
        Ok(f)
    }

    pub fn base(&self) -> usize {
        self.base
    }

    pub fn full(&self) -> usize {
        self.base + 1
    }

    pub fn len(&self) -> usize {
        self.orders.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orders.is_empty()
    }

    #[inline]
    pub fn order(&self, e: usize) -> usize {
        self.orders[e] as usize
    }

    #[inline]
    pub fn is_high(&self, e: usize) -> bool {
        self.orders[e] as usize > self.base
    }

    pub fn high_elements(&self) -> Vec<usize> {
        (0..self.len()).filter(|&e| self.is_high(e)).collect()
    }

    pub fn num_high(&self) -> usize {
        self.orders.iter().filter(|&&o| o as usize > self.base).count()
    }

    pub fn high_fraction(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.num_high() as f64 / self.len() as f64
        }
    }

    pub fn set_high(&mut self, e: usize, high: bool) {
        self.orders[e] = (self.base + high as usize) as u8;
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    Raise,
    Keep,
    Lower,
}

/// Refinement thresholds with hysteresis, `coarsen < refine`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    pub refine: f64,
    pub coarsen: f64,
}

impl Thresholds {
    pub fn new(refine: f64, coarsen: f64) -> Result<Self, SolverError> {
        if !(coarsen < refine) || !(coarsen >= 0.0) || !refine.is_finite() {
            return Err(SolverError::Config(format!(
                "indicator thresholds need 0 <= theta_coarsen < theta_refine, got {coarsen} and {refine}"
            )));
        }
        Ok(Self { refine, coarsen })
    }
}

impl Default for Thresholds {
    fn default() -> Self {
        Self {
            refine: 1e-3,
            coarsen: 2e-4,
        }
    }
}

/// Edge mean of the absolute elevation jump, `(1/L) int |[xi]| ds`; zero on
/// boundary edges.
pub fn edge_jump(d: &Discretization, state: &State, edge: usize) -> f64 {
    let ed = d.mesh.edge(edge);
    let (Some((a, la)), Some((b, lb))) = (ed.sides[0], ed.sides[1]) else {
        return 0.0;
    };
    let t = &d.tables;
    let k = t.k();
    let sa = t.elements[a].scale;
    let sb = t.elements[b].scale;
    let xa = state.var(a, XI);
    let xb = state.var(b, XI);
    let g_last = t.edge_nodes.len() - 1;
    let mut v = 0.0;
    for (g, &(_, w)) in t.edge_nodes.iter().enumerate() {
        // the neighbour traverses the edge in reverse
        let fa = &t.edge_values[la][g * k..(g + 1) * k];
        let fb = &t.edge_values[lb][(g_last - g) * k..(g_last - g + 1) * k];
        let ua: f64 = xa.iter().zip(fa).map(|(c, f)| c * f).sum::<f64>() * sa;
        let ub: f64 = xb.iter().zip(fb).map(|(c, f)| c * f).sum::<f64>() * sb;
        v += w * (ua - ub).abs();
    }
    v
}

/// Per-element indicator value: the largest edge jump over the element's
/// interior edges divided by the element's mean depth.
pub fn indicator_values(d: &Discretization, state: &State) -> Vec<f64> {
    let jumps: Vec<f64> = (0..d.mesh.num_edges()).map(|i| edge_jump(d, state, i)).collect();
    (0..d.num_elements())
        .map(|e| {
            let worst = d.mesh.element_edges(e).iter().map(|&(i, _)| jumps[i]).fold(0.0, f64::max);
            worst / mean_depth(d, state, e).max(d.params.min_depth)
        })
        .collect()
}

/// Raise above `refine`, lower below `coarsen`, keep otherwise.
pub fn indicator_kernel(d: &Discretization, state: &State, thresholds: Thresholds) -> Vec<Decision> {
    indicator_values(d, state)
        .into_iter()
        .map(|v| {
            if v > thresholds.refine {
                Decision::Raise
            } else if v < thresholds.coarsen {
                Decision::Lower
            } else {
                Decision::Keep
            }
        })
        .collect()
}

/// Applies the decisions: raised elements get zero-initialised higher modes,
/// lowered elements have them cleared (both `c` and `u`). Returns the
/// changed elements; the change log on `orders` is replaced.
pub fn apply_order_change(state: &mut State, orders: &mut OrderField, decisions: &[Decision]) -> Vec<usize> {
    let k = state.k();
    let lo = num_modes(orders.base());
    let hi = num_modes(orders.full()).min(k);
    orders.raised.clear();
    orders.lowered.clear();
    for (e, &dec) in decisions.iter().enumerate() {
        let high = orders.is_high(e);
        let change = match dec {
            Decision::Raise if !high => true,
            Decision::Lower if high => true,
            _ => false,
        };
        if !change {
            continue;
        }
        let c = state.c_elem_mut(e);
        for var in 0..3 {
            c[var * k + lo..var * k + hi].iter_mut().for_each(|v| *v = 0.0);
        }
        let u = state.u_elem_mut(e);
        for var in 0..2 {
            u[var * k + lo..var * k + hi].iter_mut().for_each(|v| *v = 0.0);
        }
        orders.set_high(e, !high);
        if high {
            orders.lowered.push(e);
        } else {
            orders.raised.push(e);
        }
    }
    let mut changed: Vec<usize> = orders.raised.iter().chain(&orders.lowered).copied().collect();
    changed.sort_unstable();
    changed
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_values() {
        let b0 = base_ranges(0);
        assert_eq!((b0.test.to_string(), b0.trial.to_string()), ("[1,1]".into(), "[1,1]".into()));
        assert_eq!(base_ranges(1).test.last, 3);
        assert_eq!(base_ranges(2).trial.last, 6);
        let [c1, c2] = correction_ranges(0, 1);
        assert_eq!(format!("{}x{} {}x{}", c1.test, c1.trial, c2.test, c2.trial), "[1,1]x[2,3] [2,3]x[1,3]");
        let [c1, c2] = correction_ranges(1, 2);
        assert_eq!(format!("{}x{} {}x{}", c1.test, c1.trial, c2.test, c2.trial), "[1,3]x[4,6] [4,6]x[1,6]");
    }

    #[test]
    fn ranges_tile_the_square() {
        for b in 0..3 {
            let kp = num_modes(b + 1);
            let mut seen = vec![0u8; kp * kp];
            let [c1, c2] = correction_ranges(b, b + 1);
            for r in [base_ranges(b), c1, c2] {
                for q in r.test.span() {
                    for i in r.trial.span() {
                        seen[q * kp + i] += 1;
                    }
                }
            }
            assert!(seen.iter().all(|&n| n == 1), "b={b}");
        }
    }

    #[test]
    fn every_kth_marks_multiples() {
        let f = OrderField::every_kth(1, 70, 32).unwrap();
        assert_eq!(f.high_elements(), vec![0, 32, 64]);
        assert_eq!(f.order(32), 2);
        assert_eq!(f.order(33), 1);
        assert!(OrderField::new(3, 4).is_err());
    }

    #[test]
    fn thresholds_need_hysteresis() {
        assert!(Thresholds::new(1e-3, 1e-3).is_err());
        assert!(Thresholds::new(1e-3, 2e-3).is_err());
        assert!(Thresholds::new(1e-3, 2e-4).is_ok());
    }

    #[test]
    fn raise_then_lower_restores_state() {
        let mut s = State::zeros(3, 6);
        for (n, v) in s.c.iter_mut().enumerate() {
            *v = if n % 18 % 6 < 3 { n as f64 } else { 0.0 };
        }
        let original = s.clone();
        let mut f = OrderField::new(1, 3).unwrap();
        let changed = apply_order_change(&mut s, &mut f, &[Decision::Raise, Decision::Keep, Decision::Lower]);
        assert_eq!(changed, vec![0]);
        assert_eq!(f.raised, vec![0]);
        assert_eq!(s, original);
        apply_order_change(&mut s, &mut f, &[Decision::Lower, Decision::Keep, Decision::Keep]);
        assert_eq!(f.lowered, vec![0]);
        assert_eq!(s, original);
    }
}
