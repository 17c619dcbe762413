//! Compensated and pairwise summation.

/// Neumaier's variant of Kahan summation.
#[derive(Clone, Copy, Debug, Default)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_initial(value: f64) -> Self {
        CompensatedSum {
            sum: value,
            compensation: 0.0,
        }
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn value(&self) -> f64 {
        self.sum + self.compensation
    }
}

impl Extend<f64> for CompensatedSum {
    fn extend<T: IntoIterator<Item = f64>>(&mut self, iter: T) {
        for v in iter {
            self.add(v);
        }
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = f64>>(iter: T) -> Self {
        let mut s = CompensatedSum::new();
        s.extend(iter);
        s
    }
}

/// Compensated sum of an iterator.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    values.into_iter().collect::<CompensatedSum>().value()
}

/// Deterministic pairwise (tree) summation. The association order depends
/// only on the slice length, never on how the values were produced.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    const LEAF: usize = 32;
    if values.len() <= LEAF {
        return compensated_sum(values.iter().copied());
    }
    let mid = values.len() / 2;
    pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_beats_naive_on_many_small_terms() {
        let n = 10_000_000usize;
        let term = 0.1;
        let mut naive = 0.0;
        let mut comp = CompensatedSum::new();
        for _ in 0..n {
            naive += term;
            comp.add(term);
        }
        let exact = 1_000_000.0;
        assert!((comp.value() - exact).abs() < 1e-9);
        assert!((naive - exact).abs() > (comp.value() - exact).abs());
    }

    #[test]
    fn cancellation_is_recovered() {
        let s = compensated_sum([1e100, 1.0, -1e100]);
        assert_eq!(s, 1.0);
    }

    #[test]
    fn pairwise_matches_compensated() {
        let v: Vec<f64> = (0..1000).map(|i| ((i * 7919) % 1000) as f64 * 1e-3).collect();
        assert!((pairwise_sum(&v) - compensated_sum(v.iter().copied())).abs() < 1e-12);
    }
}
