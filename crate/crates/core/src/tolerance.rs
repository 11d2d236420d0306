/// Mixed absolute/relative comparison shared by every module.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub atol: f64,
    pub rtol: f64,
}

impl Tolerance {
    pub const DEFAULT: Tolerance = Tolerance { atol: 1e-12, rtol: 1e-9 };

    pub const fn new(atol: f64, rtol: f64) -> Self {
        Tolerance { atol, rtol }
    }

    /// Allowed slack when comparing quantities of magnitude `scale`.
    pub fn slack(&self, scale: f64) -> f64 {
        self.atol + self.rtol * scale.abs()
    }

    pub fn eq(&self, a: f64, b: f64) -> bool {
        (a - b).abs() <= self.slack(a.abs().max(b.abs()))
    }

    pub fn is_zero(&self, a: f64) -> bool {
        a.abs() <= self.atol
    }

    /// `a <= b` up to tolerance.
    pub fn le(&self, a: f64, b: f64) -> bool {
        a <= b + self.slack(a.abs().max(b.abs()))
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance::DEFAULT
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mixed_comparison() {
        let tol = Tolerance::DEFAULT;
        assert!(tol.eq(1.0, 1.0 + 1e-10));
        assert!(!tol.eq(1.0, 1.0 + 1e-8));
        assert!(tol.eq(0.0, 1e-13));
        assert!(tol.le(1.0 + 1e-10, 1.0));
        assert!(!tol.le(1.1, 1.0));
    }
}
