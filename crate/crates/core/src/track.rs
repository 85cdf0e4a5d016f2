//! Frame-to-frame association of detected eddies into tracks.

use serde::{Deserialize, Serialize};

use crate::centers::Polarity;
use crate::error::{Error, Result};
use crate::extract::DetectionReport;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackParams {
    /// Cells per frame elapsed.
    pub max_displacement: f64,
    pub polarity_must_match: bool,
    pub max_missed_frames: usize,
}

impl Default for TrackParams {
    fn default() -> Self {
        TrackParams {
            max_displacement: 10.0,
            polarity_must_match: true,
            max_missed_frames: 0,
        }
    }
}

impl TrackParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.max_displacement > 0.0 && self.max_displacement.is_finite()) {
            return Err(Error::param("track.max_displacement", "must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub frame_index: usize,
    pub eddy_id: usize,
    pub center: (usize, usize),
    pub radius: usize,
    pub polarity: Polarity,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EddyTrack {
    pub track_id: usize,
    /// Strictly increasing in frame index.
    pub observations: Vec<Observation>,
}

impl EddyTrack {
    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    pub fn max_radius(&self) -> usize {
        self.observations.iter().map(|o| o.radius).max().unwrap_or(0)
    }

    /// Centre displacement between consecutive observations.
    pub fn displacements(&self) -> Vec<(f64, f64)> {
        self.observations
            .windows(2)
            .map(|w| {
                (
                    w[1].center.0 as f64 - w[0].center.0 as f64,
                    w[1].center.1 as f64 - w[0].center.1 as f64,
                )
            })
            .collect()
    }
}

/// Surface observations of every eddy in a report.
pub fn observations(report: &DetectionReport) -> Vec<Observation> {
    report
        .eddies
        .iter()
        .map(|e| Observation {
            frame_index: report.frame_index,
            eddy_id: e.id,
            center: e.surface().center,
            radius: e.surface().radius,
            polarity: e.polarity,
        })
        .collect()
}

fn distance(a: &Observation, b: &Observation) -> f64 {
    (a.center.0 as f64 - b.center.0 as f64).hypot(a.center.1 as f64 - b.center.1 as f64)
}

/// Greedy mutual-nearest matching of `from` onto `to`. Returns pairs of
/// indices. A pair is eligible when within `limit` and, if required, of equal
/// polarity; distance ties go to the lower index.
fn mutual_nearest(from: &[&Observation], to: &[Observation], limit: &[f64], params: &TrackParams) -> Vec<(usize, usize)> {
    let eligible = |a: usize, b: usize| {
        let (x, y) = (from[a], &to[b]);
        (!params.polarity_must_match || x.polarity == y.polarity) && distance(x, y) <= limit[a]
    };
    // distance ties go to the lower (eddy_id, frame_index), so the result does
    // not depend on track order
    let nearest = |d: &mut dyn Iterator<Item = (usize, f64, &Observation)>| -> Option<usize> {
        d.min_by(|a, b| {
            a.1.total_cmp(&b.1)
                .then((a.2.eddy_id, a.2.frame_index).cmp(&(b.2.eddy_id, b.2.frame_index)))
        })
        .map(|(i, _, _)| i)
    };
    let mut from_free = vec![true; from.len()];
    let mut to_free = vec![true; to.len()];
    let mut pairs = Vec::new();
    loop {
        let mut found = Vec::new();
        for a in (0..from.len()).filter(|&a| from_free[a]) {
            let Some(b) = nearest(
                &mut (0..to.len())
                    .filter(|&b| to_free[b] && eligible(a, b))
                    .map(|b| (b, distance(from[a], &to[b]), &to[b])),
            ) else {
                continue;
            };
            let back = nearest(
                &mut (0..from.len())
                    .filter(|&x| from_free[x] && eligible(x, b))
                    .map(|x| (x, distance(from[x], &to[b]), from[x])),
            );
            if back == Some(a) {
                found.push((a, b));
            }
        }
        if found.is_empty() {
            break;
        }
        for &(a, b) in &found {
            from_free[a] = false;
            to_free[b] = false;
        }
        pairs.extend(found);
    }
    pairs.sort_unstable();
    pairs
}

/// Links per-frame observations into tracks. Frames must be in increasing
/// frame-index order. A track stays open for `max_missed_frames` frames
/// without a match, with the allowed displacement scaled by the gap.
/// Unmatched observations open new tracks; track ids follow creation order.
pub fn link(frames: &[Vec<Observation>], params: &TrackParams) -> Result<Vec<EddyTrack>> {
    params.validate()?;
    let mut tracks: Vec<EddyTrack> = Vec::new();
    let mut last_frame: Option<usize> = None;
    for obs in frames {
        let Some(frame) = obs.first().map(|o| o.frame_index) else {
            continue;
        };
        if obs.iter().any(|o| o.frame_index != frame) {
            return Err(Error::param("frames", "observations of one frame carry different indices"));
        }
        if last_frame.is_some_and(|l| l >= frame) {
            return Err(Error::param("frames", "frame indices must strictly increase"));
        }
        last_frame = Some(frame);

        let open: Vec<usize> = (0..tracks.len())
            .filter(|&t| {
                let last = tracks[t].observations.last().unwrap().frame_index;
                frame - last <= params.max_missed_frames + 1
            })
            .collect();
        let ends: Vec<&Observation> = open.iter().map(|&t| tracks[t].observations.last().unwrap()).collect();
        let limits: Vec<f64> = ends
            .iter()
            .map(|o| params.max_displacement * (frame - o.frame_index) as f64)
            .collect();
        let pairs = mutual_nearest(&ends, obs, &limits, params);
        let mut claimed = vec![false; obs.len()];
        for (a, b) in pairs {
            tracks[open[a]].observations.push(obs[b]);
            claimed[b] = true;
        }
        for (b, o) in obs.iter().enumerate() {
            if !claimed[b] {
                tracks.push(EddyTrack {
                    track_id: tracks.len() + 1,
                    observations: vec![*o],
                });
            }
        }
    }
    Ok(tracks)
}

/// Tracks the eddies of a report sequence ordered by frame index.
pub fn associate(reports: &[DetectionReport], params: &TrackParams) -> Result<Vec<EddyTrack>> {
    if reports.windows(2).any(|w| w[0].frame_index >= w[1].frame_index) {
        return Err(Error::param("reports", "frame indices must strictly increase"));
    }
    let frames: Vec<Vec<Observation>> = reports.iter().map(observations).collect();
    link(&frames, params)
}

/// The `n` tracks with the largest surface radius, kept in track-id order.
pub fn top_by_radius(tracks: &[EddyTrack], n: usize) -> Vec<EddyTrack> {
    let mut order: Vec<usize> = (0..tracks.len()).collect();
    order.sort_by(|&a, &b| tracks[b].max_radius().cmp(&tracks[a].max_radius()).then(a.cmp(&b)));
    order.truncate(n);
    order.sort_unstable();
    order.into_iter().map(|i| tracks[i].clone()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::collections::{BTreeSet, HashSet};

    fn ob(frame: usize, id: usize, c: (usize, usize), pol: Polarity) -> Observation {
        Observation {
            frame_index: frame,
            eddy_id: id,
            center: c,
            radius: 3 + id,
            polarity: pol,
        }
    }

    #[test]
    fn advected_eddy_is_one_track() {
        let frames: Vec<_> = (0..5).map(|f| vec![ob(f, 1, (20 + 2 * f, 30), Polarity::Cyclonic)]).collect();
        let tracks = link(&frames, &TrackParams::default()).unwrap();
        assert_eq!(tracks.len(), 1);
        assert_eq!(tracks[0].len(), 5);
        assert!(tracks[0].displacements().iter().all(|&d| d == (2.0, 0.0)));
    }

    #[test]
    fn distant_eddies_never_merge() {
        let frames: Vec<_> = (0..4)
            .map(|f| {
                vec![
                    ob(f, 1, (20, 30), Polarity::Cyclonic),
                    ob(f, 2, (120, 30), Polarity::Cyclonic),
                ]
            })
            .collect();
        let tracks = link(&frames, &TrackParams::default()).unwrap();
        assert_eq!(tracks.len(), 2);
        assert!(tracks.iter().all(|t| t.len() == 4));
    }

    #[test]
    fn vanishing_and_new_eddy_are_separate() {
        let mut frames: Vec<_> = (0..3).map(|f| vec![ob(f, 1, (20, 30), Polarity::Cyclonic)]).collect();
        frames.push(vec![ob(3, 1, (70, 30), Polarity::Cyclonic)]);
        assert_eq!(link(&frames, &TrackParams::default()).unwrap().len(), 2);
    }

    #[test]
    fn polarity_gate() {
        let frames = vec![
            vec![ob(0, 1, (20, 30), Polarity::Cyclonic)],
            vec![ob(1, 1, (21, 30), Polarity::Anticyclonic)],
        ];
        assert_eq!(link(&frames, &TrackParams::default()).unwrap().len(), 2);
        let loose = TrackParams {
            polarity_must_match: false,
            ..Default::default()
        };
        assert_eq!(link(&frames, &loose).unwrap().len(), 1);
    }

    #[test]
    fn missed_frame_budget() {
        let frames = vec![
            vec![ob(0, 1, (20, 30), Polarity::Cyclonic)],
            vec![ob(2, 1, (24, 30), Polarity::Cyclonic)],
        ];
        assert_eq!(link(&frames, &TrackParams::default()).unwrap().len(), 2);
        let p = TrackParams {
            max_missed_frames: 1,
            ..Default::default()
        };
        assert_eq!(link(&frames, &p).unwrap().len(), 1);
    }

    #[test]
    fn mutual_nearest_resolves_competition() {
        // two ends both nearest to the middle detection; only the closer one gets it
        let frames = vec![
            vec![ob(0, 1, (10, 10), Polarity::Cyclonic), ob(0, 2, (16, 10), Polarity::Cyclonic)],
            vec![ob(1, 1, (15, 10), Polarity::Cyclonic), ob(1, 2, (5, 10), Polarity::Cyclonic)],
        ];
        let tracks = link(&frames, &TrackParams::default()).unwrap();
        assert_eq!(tracks.len(), 2);
        assert_eq!(tracks[1].observations[1].center, (15, 10));
        assert_eq!(tracks[0].observations[1].center, (5, 10));
    }

    #[test]
    fn unordered_frames_rejected() {
        let frames = vec![
            vec![ob(1, 1, (10, 10), Polarity::Cyclonic)],
            vec![ob(0, 1, (10, 10), Polarity::Cyclonic)],
        ];
        assert!(link(&frames, &TrackParams::default()).is_err());
    }

    #[test]
    fn top_n() {
        let frames = vec![vec![
            ob(0, 1, (10, 10), Polarity::Cyclonic),
            ob(0, 5, (50, 10), Polarity::Cyclonic),
            ob(0, 3, (90, 10), Polarity::Cyclonic),
        ]];
        let tracks = link(&frames, &TrackParams::default()).unwrap();
        let top = top_by_radius(&tracks, 2);
        assert_eq!(top.iter().map(|t| t.track_id).collect::<Vec<_>>(), vec![2, 3]);
    }

    fn scene() -> impl Strategy<Value = Vec<Vec<Observation>>> {
        proptest::collection::vec(
            proptest::collection::vec((0usize..40, 0usize..40, any::<bool>()), 0..6),
            2..6,
        )
        .prop_map(|frames| {
            frames
                .into_iter()
                .enumerate()
                .map(|(f, cells)| {
                    let mut seen = HashSet::new();
                    cells
                        .into_iter()
                        .filter(|&(i, j, _)| seen.insert((i, j)))
                        .enumerate()
                        .map(|(n, (i, j, c))| {
                            let pol = if c { Polarity::Cyclonic } else { Polarity::Anticyclonic };
                            ob(f, n + 1, (i, j), pol)
                        })
                        .collect()
                })
                .collect()
        })
    }

    fn links(tracks: &[EddyTrack]) -> BTreeSet<((usize, usize), (usize, usize))> {
        tracks
            .iter()
            .flat_map(|t| {
                t.observations.windows(2).map(|w| {
                    let (a, b) = ((w[0].frame_index, w[0].eddy_id), (w[1].frame_index, w[1].eddy_id));
                    (a.min(b), a.max(b))
                })
            })
            .collect()
    }

    #[test]
    fn equidistant_ends_tie_break_by_detection() {
        // both frame-1 detections sit 5 cells from the frame-2 one
        let frames = vec![
            vec![ob(0, 1, (0, 12), Polarity::Cyclonic)],
            vec![ob(1, 1, (4, 23), Polarity::Cyclonic), ob(1, 2, (5, 20), Polarity::Cyclonic)],
            vec![ob(2, 1, (9, 23), Polarity::Cyclonic)],
        ];
        let tracks = link(&frames, &TrackParams::default()).unwrap();
        let ids: Vec<Vec<(usize, usize)>> = tracks
            .iter()
            .map(|t| t.observations.iter().map(|o| (o.frame_index, o.eddy_id)).collect())
            .collect();
        assert_eq!(ids, vec![vec![(0, 1), (1, 2)], vec![(1, 1), (2, 1)]]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]

        #[test]
        fn partition_and_purity(frames in scene()) {
            let tracks = link(&frames, &TrackParams::default()).unwrap();
            let mut all: Vec<_> = tracks.iter().flat_map(|t| t.observations.iter().map(|o| (o.frame_index, o.eddy_id))).collect();
            let total: usize = frames.iter().map(Vec::len).sum();
            all.sort_unstable();
            all.dedup();
            prop_assert_eq!(all.len(), total);
            for t in &tracks {
                prop_assert!(t.observations.iter().all(|o| o.polarity == t.observations[0].polarity));
                prop_assert!(t.observations.windows(2).all(|w| w[0].frame_index < w[1].frame_index));
            }
        }

        #[test]
        fn reversal_gives_same_links(frames in scene()) {
            let forward = link(&frames, &TrackParams::default()).unwrap();
            let n = frames.len();
            let reversed: Vec<Vec<Observation>> = frames
                .iter()
                .rev()
                .enumerate()
                .map(|(f, obs)| obs.iter().map(|o| Observation { frame_index: f, ..*o }).collect())
                .collect();
            let backward = link(&reversed, &TrackParams::default()).unwrap();
            let remap: BTreeSet<_> = links(&backward)
                .into_iter()
                .map(|(a, b)| {
                    let (a, b) = ((n - 1 - a.0, a.1), (n - 1 - b.0, b.1));
                    (a.min(b), a.max(b))
                })
                .collect();
            prop_assert_eq!(links(&forward), remap);
        }
    }
}
