//! Peak location and width on sampled curves.

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Peak {
    pub index: usize,
    pub x: f64,
    pub y: f64,
}

/// Largest finite sample with `lo <= x <= hi`.
pub fn peak_in(xs: &[f64], ys: &[f64], lo: f64, hi: f64) -> Option<Peak> {
    xs.iter()
        .zip(ys)
        .enumerate()
        .filter(|(_, (x, y))| **x >= lo && **x <= hi && y.is_finite())
        .max_by(|a, b| a.1 .1.total_cmp(b.1 .1))
        .map(|(index, (&x, &y))| Peak { index, x, y })
}

/// Full width at half maximum: distance between the outermost samples at or
/// above `peak.y / 2`, with linear interpolation at the crossings. Dips
/// between them (interference fringes) do not split the resonance. `None`
/// when the half-maximum region reaches the end of the samples.
pub fn fwhm(xs: &[f64], ys: &[f64], peak: &Peak) -> Option<f64> {
    let half = peak.y / 2.0;
    let cross = |i: usize, j: usize| xs[i] + (half - ys[i]) * (xs[j] - xs[i]) / (ys[j] - ys[i]);
    let above = |y: &f64| *y >= half;
    let first = ys.iter().position(above)?;
    let last = ys.iter().rposition(above)?;
    if first == 0 || last + 1 == ys.len() {
        return None;
    }
    Some(cross(last, last + 1) - cross(first - 1, first))
}

/// Median of the finite values.
pub fn median(values: &[f64]) -> f64 {
    let mut v: Vec<f64> = values.iter().copied().filter(|v| v.is_finite()).collect();
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
