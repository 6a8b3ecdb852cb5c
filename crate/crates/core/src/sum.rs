//! Neumaier-compensated summation.

/// Running compensated sum; `value()` is accurate to a few ulps regardless of
/// the number of terms.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct NeumaierSum {
    sum: f64,
    comp: f64,
}

impl NeumaierSum {
    pub fn add(&mut self, t: f64) {
        let s = self.sum + t;
        if self.sum.abs() >= t.abs() {
            self.comp += (self.sum - s) + t;
        } else {
            self.comp += (t - s) + self.sum;
        }
        self.sum = s;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl Extend<f64> for NeumaierSum {
    fn extend<I: IntoIterator<Item = f64>>(&mut self, iter: I) {
        for t in iter {
            self.add(t);
        }
    }
}

impl FromIterator<f64> for NeumaierSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut acc = NeumaierSum::default();
        acc.extend(iter);
        acc
    }
}

/// Compensated `Σ terms`.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(terms: I) -> f64 {
    terms.into_iter().collect::<NeumaierSum>().value()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_terms() {
        assert_eq!(compensated_sum([1.0, 1e100, 1.0, -1e100]), 2.0);
        assert_eq!(compensated_sum(std::iter::repeat_n(0.04, 25)), 1.0);
        assert_eq!(compensated_sum(std::iter::repeat_n(0.1, 10)), 1.0);
        assert_eq!(compensated_sum([]), 0.0);
    }
}
