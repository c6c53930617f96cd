//! Golden-section search for the maximum of a unimodal function on a
//! bracket. Multimodal objectives must be pre-bracketed by a grid scan.

const INV_PHI: f64 = 0.618_033_988_749_894_9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimumFlag {
    /// The maximum sits on an end of the bracket.
    Boundary,
    /// All evaluated values agree to within `1e-12` relative.
    Flat,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Maximum {
    pub x: f64,
    pub value: f64,
    pub flag: Option<OptimumFlag>,
}

/// Maximise `f` on `[lo, hi]` until the bracket is narrower than
/// `tol · (hi - lo)`.
pub fn golden_section_max<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Maximum {
    assert!(hi > lo, "golden-section bracket must be non-empty");
    let width0 = hi - lo;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - INV_PHI * (b - a);
    let mut d = a + INV_PHI * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut seen_min = fc.min(fd);
    let mut seen_max = fc.max(fd);

    while b - a > tol * width0 {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - INV_PHI * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + INV_PHI * (b - a);
            fd = f(d);
        }
        seen_min = seen_min.min(fc.min(fd));
        seen_max = seen_max.max(fc.max(fd));
    }

    let (mut x, mut value) = if fc >= fd { (c, fc) } else { (d, fd) };
    let mut flag = None;

    // Converged against an end of the bracket: the true maximum may be the
    // end point itself.
    let edge_gap = 2.0 * tol * width0;
    for end in [lo, hi] {
        if (x - end).abs() <= edge_gap {
            let fe = f(end);
            seen_min = seen_min.min(fe);
            seen_max = seen_max.max(fe);
            if fe >= value {
                x = end;
                value = fe;
            }
            flag = Some(OptimumFlag::Boundary);
        }
    }
    if (seen_max - seen_min).abs() <= 1e-12 * seen_max.abs().max(seen_min.abs()) {
        flag = Some(OptimumFlag::Flat);
    }
    Maximum { x, value, flag }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_interior_parabola_peak() {
        let m = golden_section_max(|x| -(x - 0.3) * (x - 0.3), 0.0, 1.0, 1e-3);
        assert!((m.x - 0.3).abs() < 1e-3);
        assert_eq!(m.flag, None);
    }

    #[test]
    fn monotone_function_returns_flagged_endpoint() {
        let m = golden_section_max(|x| x, 0.0, 2.0, 1e-4);
        assert_eq!(m.x, 2.0);
        assert_eq!(m.flag, Some(OptimumFlag::Boundary));
        let m = golden_section_max(|x| -x, 0.0, 2.0, 1e-4);
        assert_eq!(m.x, 0.0);
        assert_eq!(m.flag, Some(OptimumFlag::Boundary));
    }

    #[test]
    fn flat_function_is_diagnosed() {
        let m = golden_section_max(|_| 4.0, -1.0, 1.0, 1e-3);
        assert_eq!(m.flag, Some(OptimumFlag::Flat));
        assert_eq!(m.value, 4.0);
    }
}
