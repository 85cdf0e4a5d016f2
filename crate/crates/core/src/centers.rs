//! Candidate eddy centres: strict SSH extrema on the surface, each refined
//! to the slowest cell in a window around it.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{clipped_window, ScalarField2D, VelocityLayer};

/// Rotation sense, northern-hemisphere convention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    /// Counterclockwise, SSH minimum.
    Cyclonic,
    /// Clockwise, SSH maximum.
    Anticyclonic,
}

impl Polarity {
    /// +1 for counterclockwise rotation, −1 for clockwise.
    pub fn rotation_sign(self) -> f64 {
        match self {
            Polarity::Cyclonic => 1.0,
            Polarity::Anticyclonic => -1.0,
        }
    }

    /// Sign of the SSH anomaly at the core.
    pub fn ssh_sign(self) -> f64 {
        -self.rotation_sign()
    }

    pub fn flipped(self) -> Self {
        match self {
            Polarity::Cyclonic => Polarity::Anticyclonic,
            Polarity::Anticyclonic => Polarity::Cyclonic,
        }
    }
}

impl std::fmt::Display for Polarity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Polarity::Cyclonic => "cyclonic",
            Polarity::Anticyclonic => "anticyclonic",
        })
    }
}

fn default_re() -> usize {
    7
}
fn default_rv() -> usize {
    21
}
fn default_rc() -> usize {
    5
}
fn default_rs() -> usize {
    3
}

/// Window widths (full widths, in cells) and the initial test radius.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SearchParams {
    #[serde(default = "default_re")]
    pub re: usize,
    #[serde(default = "default_rv")]
    pub rv: usize,
    #[serde(default = "default_rc")]
    pub rc: usize,
    #[serde(default = "default_rs")]
    pub rs: usize,
}

impl Default for SearchParams {
    fn default() -> Self {
        SearchParams {
            re: default_re(),
            rv: default_rv(),
            rc: default_rc(),
            rs: default_rs(),
        }
    }
}

pub(crate) fn check_window(name: &str, w: usize) -> Result<()> {
    if w < 3 || w % 2 == 0 {
        return Err(Error::param(name, format!("{w} must be an odd integer >= 3")));
    }
    Ok(())
}

impl SearchParams {
    pub fn validate(&self) -> Result<()> {
        check_window("re", self.re)?;
        check_window("rv", self.rv)?;
        check_window("rc", self.rc)?;
        check_window("rs", self.rs)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SshExtremum {
    pub cell: (usize, usize),
    pub polarity: Polarity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenterCandidate {
    pub ssh_extremum: (usize, usize),
    pub polarity: Polarity,
    pub vel_minimum: (usize, usize),
    pub layer: usize,
}

fn classify(field: &ScalarField2D, i: usize, j: usize, width: usize) -> Option<Polarity> {
    let c = field.get(i, j)?;
    let (mut is_max, mut is_min, mut others) = (true, true, 0usize);
    for jj in clipped_window(j, width, field.ny()) {
        for ii in clipped_window(i, width, field.nx()) {
            if (ii, jj) == (i, j) {
                continue;
            }
            let Some(v) = field.get(ii, jj) else { continue };
            others += 1;
            is_max &= c > v;
            is_min &= c < v;
            if !is_max && !is_min {
                return None;
            }
        }
    }
    match (others > 0, is_max, is_min) {
        (true, true, _) => Some(Polarity::Anticyclonic),
        (true, _, true) => Some(Polarity::Cyclonic),
        _ => None,
    }
}

/// Cells strictly above (anticyclonic) or below (cyclonic) every other valid
/// cell of the `re`-wide window centred on them, in row-major order. Windows
/// are clipped at the domain edge; ties produce no extremum.
pub fn find_ssh_extrema(ssh: &ScalarField2D, re: usize) -> Result<Vec<SshExtremum>> {
    check_window("re", re)?;
    let mut out = Vec::new();
    for j in 0..ssh.ny() {
        for i in 0..ssh.nx() {
            if let Some(polarity) = classify(ssh, i, j, re) {
                out.push(SshExtremum {
                    cell: (i, j),
                    polarity,
                });
            }
        }
    }
    Ok(out)
}

/// Slowest valid cell in a `width`-wide window around `center`; ties go to
/// the first cell in row-major order.
pub fn window_minimum(
    speed: impl Fn(usize, usize) -> Option<f64>,
    nx: usize,
    ny: usize,
    center: (usize, usize),
    width: usize,
) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), f64)> = None;
    for j in clipped_window(center.1, width, ny) {
        for i in clipped_window(center.0, width, nx) {
            if let Some(s) = speed(i, j) {
                if best.map_or(true, |(_, b)| s < b) {
                    best = Some(((i, j), s));
                }
            }
        }
    }
    best.map(|(c, _)| c)
}

/// One candidate per SSH extremum: the minimum of net speed within the
/// `rv`-wide window around it. Extrema that land on an already claimed cell
/// are merged into the earlier candidate.
pub fn find_velocity_minima(
    speed: &ScalarField2D,
    extrema: &[SshExtremum],
    rv: usize,
) -> Result<Vec<CenterCandidate>> {
    check_window("rv", rv)?;
    let mut out: Vec<CenterCandidate> = Vec::new();
    let mut claimed = std::collections::HashSet::new();
    for ext in extrema {
        let Some(cell) = window_minimum(|i, j| speed.get(i, j), speed.nx(), speed.ny(), ext.cell, rv)
        else {
            continue;
        };
        if claimed.insert(cell) {
            out.push(CenterCandidate {
                ssh_extremum: ext.cell,
                polarity: ext.polarity,
                vel_minimum: cell,
                layer: 0,
            });
        }
    }
    Ok(out)
}

/// Both search stages on the surface layer of a frame.
pub fn locate_candidates(
    ssh: &ScalarField2D,
    surface: VelocityLayer<'_>,
    params: &SearchParams,
) -> Result<Vec<CenterCandidate>> {
    let extrema = find_ssh_extrema(ssh, params.re)?;
    find_velocity_minima(&surface.speed_field(), &extrema, params.rv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bump(nx: usize, ny: usize, peaks: &[(f64, f64)], sigma: f64) -> ScalarField2D {
        ScalarField2D::from_fn(nx, ny, |i, j| {
            peaks
                .iter()
                .map(|&(x, y)| {
                    let r2 = (i as f64 - x).powi(2) + (j as f64 - y).powi(2);
                    (-r2 / (2.0 * sigma * sigma)).exp()
                })
                .sum()
        })
    }

    /// Brute-force strict extremum test, independent of `classify`.
    fn brute_extrema(f: &ScalarField2D, re: usize) -> Vec<((usize, usize), Polarity)> {
        let h = (re / 2) as isize;
        let mut out = Vec::new();
        for j in 0..f.ny() as isize {
            for i in 0..f.nx() as isize {
                let Some(c) = f.get(i as usize, j as usize) else { continue };
                let mut vals = Vec::new();
                for dj in -h..=h {
                    for di in -h..=h {
                        let (a, b) = (i + di, j + dj);
                        if (di, dj) != (0, 0) && a >= 0 && b >= 0 && a < f.nx() as isize && b < f.ny() as isize {
                            if let Some(v) = f.get(a as usize, b as usize) {
                                vals.push(v);
                            }
                        }
                    }
                }
                if vals.is_empty() {
                    continue;
                }
                let cell = (i as usize, j as usize);
                if vals.iter().all(|&v| c > v) {
                    out.push((cell, Polarity::Anticyclonic));
                } else if vals.iter().all(|&v| c < v) {
                    out.push((cell, Polarity::Cyclonic));
                }
            }
        }
        out
    }

    #[test]
    fn single_bump_single_maximum() {
        let f = bump(31, 31, &[(14.0, 16.0)], 4.0);
        let maxima: Vec<_> = find_ssh_extrema(&f, 7)
            .unwrap()
            .into_iter()
            .filter(|e| e.polarity == Polarity::Anticyclonic)
            .collect();
        assert_eq!(
            maxima,
            vec![SshExtremum {
                cell: (14, 16),
                polarity: Polarity::Anticyclonic
            }]
        );
    }

    #[test]
    fn ramp_has_no_interior_extrema() {
        let f = ScalarField2D::from_fn(20, 20, |i, _| i as f64);
        let ext = find_ssh_extrema(&f, 7).unwrap();
        assert!(ext.is_empty(), "{ext:?}");
    }

    #[test]
    fn two_bumps_and_window_size() {
        let (a, b) = (bump(80, 40, &[(25.0, 20.0)], 4.0), bump(80, 40, &[(55.0, 20.0)], 4.0));
        let f = ScalarField2D::from_fn(80, 40, |i, j| a.get(i, j).unwrap() + 0.8 * b.get(i, j).unwrap());
        for re in [7, 61] {
            let all: Vec<_> = find_ssh_extrema(&f, re)
                .unwrap()
                .into_iter()
                .map(|e| (e.cell, e.polarity))
                .collect();
            assert_eq!(all, brute_extrema(&f, re));
            let maxima = all
                .iter()
                .filter(|e| e.1 == Polarity::Anticyclonic)
                .count();
            assert_eq!(maxima, if re == 7 { 2 } else { 1 }, "re={re}");
        }
    }

    #[test]
    fn plateaus_yield_nothing_and_masks_are_skipped() {
        let f = ScalarField2D::filled(10, 10, 1.0);
        assert!(find_ssh_extrema(&f, 3).unwrap().is_empty());
        let mut g = bump(15, 15, &[(7.0, 7.0)], 2.0);
        g.set_masked(7, 7, true);
        let ext = find_ssh_extrema(&g, 3).unwrap();
        assert!(ext.iter().all(|e| e.cell != (7, 7)));
        assert!(find_ssh_extrema(&g, 4).is_err());
    }

    #[test]
    fn velocity_minimum_tracks_slow_cell_and_merges() {
        let speed = ScalarField2D::from_fn(30, 30, |i, j| {
            ((i as f64 - 12.0).powi(2) + (j as f64 - 10.0).powi(2)).sqrt()
        });
        let extrema = [
            SshExtremum { cell: (10, 10), polarity: Polarity::Cyclonic },
            SshExtremum { cell: (14, 11), polarity: Polarity::Anticyclonic },
            SshExtremum { cell: (28, 28), polarity: Polarity::Cyclonic },
        ];
        let c = find_velocity_minima(&speed, &extrema, 7).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c[0].vel_minimum, (12, 10));
        assert_eq!(c[0].polarity, Polarity::Cyclonic);
        assert_eq!(c[1].vel_minimum, (25, 25));
    }

    #[test]
    fn fully_masked_window_gives_no_candidate() {
        let mut speed = ScalarField2D::filled(9, 9, 1.0);
        for j in 2..7 {
            for i in 2..7 {
                speed.set_masked(i, j, true);
            }
        }
        let ext = [SshExtremum { cell: (4, 4), polarity: Polarity::Cyclonic }];
        assert!(find_velocity_minima(&speed, &ext, 5).unwrap().is_empty());
        assert_eq!(find_velocity_minima(&speed, &ext, 7).unwrap().len(), 1);
    }

    #[test]
    fn search_params_validation() {
        assert!(SearchParams::default().validate().is_ok());
        let p = SearchParams { rv: 20, ..Default::default() };
        assert!(p.validate().is_err());
        let p = SearchParams { rs: 1, ..Default::default() };
        assert!(p.validate().is_err());
    }

    proptest! {
        #[test]
        fn extrema_agree_with_brute_force(seed in 0u64..500, re in prop::sample::select(vec![3usize, 5, 7, 9])) {
            let f = ScalarField2D::from_fn(17, 13, |i, j| {
                let h = (i as u64 * 7919 + j as u64 * 104729 + seed * 31).wrapping_mul(2654435761) % 1000;
                h as f64
            });
            let got: Vec<_> = find_ssh_extrema(&f, re).unwrap().into_iter().map(|e| (e.cell, e.polarity)).collect();
            prop_assert_eq!(got, brute_extrema(&f, re));
        }

        #[test]
        fn extrema_count_shrinks_with_window(seed in 0u64..200) {
            let f = ScalarField2D::from_fn(25, 25, |i, j| {
                ((i as u64 * 31 + j as u64 * 17 + seed).wrapping_mul(2654435761) % 97) as f64
            });
            let mut last = usize::MAX;
            for re in (3..=15).step_by(2) {
                let n = find_ssh_extrema(&f, re).unwrap().len();
                prop_assert!(n <= last);
                last = n;
            }
        }
    }
}
