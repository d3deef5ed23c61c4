use num_complex::Complex64;

/// Neumaier-compensated complex accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedSum {
    re: (f64, f64),
    im: (f64, f64),
}

fn add(acc: &mut (f64, f64), x: f64) {
    let (sum, comp) = *acc;
    let t = sum + x;
    let c = if sum.abs() >= x.abs() { (sum - t) + x } else { (x - t) + sum };
    *acc = (t, comp + c);
}

impl CompensatedSum {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    pub(crate) fn add(&mut self, x: Complex64) {
        add(&mut self.re, x.re);
        add(&mut self.im, x.im);
    }

    pub(crate) fn value(&self) -> Complex64 {
        Complex64::new(self.re.0 + self.re.1, self.im.0 + self.im.1)
    }
}

impl std::iter::FromIterator<Complex64> for CompensatedSum {
    fn from_iter<T: IntoIterator<Item = Complex64>>(iter: T) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// Compensated real sum.
pub(crate) fn sum_f64(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut acc = (0.0, 0.0);
    for x in xs {
        add(&mut acc, x);
    }
    acc.0 + acc.1
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_cancelled_low_bits() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let s: CompensatedSum = xs.iter().map(|&x| Complex64::new(x, -x)).collect();
        assert_eq!(s.value(), Complex64::new(2.0, -2.0));
        assert_eq!(sum_f64(xs), 2.0);
    }
}
