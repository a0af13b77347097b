//! Per-timestamp motion estimates from city-frame boxes.
//!
//! Positions are smoothed with a centered moving average (5 samples at 10 Hz,
//! at least 0.5 s at other rates; the window shrinks symmetrically near the
//! ends). Velocity and acceleration come from central differences, one-sided at
//! the ends. Accelerations are projected onto the box heading and its left
//! normal, so lateral acceleration is positive to the left.

use serde::{Deserialize, Serialize};

use crate::track::{Timestamp, Track};

/// Minimum smoothing window length.
pub const SMOOTHING_WINDOW_S: f64 = 0.5;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub timestamp: Timestamp,
    pub velocity: [f64; 2],
    pub speed: f64,
    pub accel_forward: f64,
    pub accel_lateral: f64,
    pub yaw_rate: f64,
}

/// Odd window size covering at least [`SMOOTHING_WINDOW_S`] at the median sample rate.
pub fn smoothing_window(times: &[f64]) -> usize {
    if times.len() < 2 {
        return 1;
    }
    let mut dts: Vec<f64> = times.windows(2).map(|w| w[1] - w[0]).collect();
    dts.sort_by(f64::total_cmp);
    let dt = dts[dts.len() / 2];
    if dt <= 0.0 {
        return 1;
    }
    let mut n = (SMOOTHING_WINDOW_S / dt - 1e-9).ceil().max(1.0) as usize;
    if n.is_multiple_of(2) {
        n += 1;
    }
    n
}

fn smooth(values: &[[f64; 2]], window: usize) -> Vec<[f64; 2]> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            let h = half.min(i).min(n - 1 - i);
            let slice = &values[i - h..=i + h];
            let k = slice.len() as f64;
            let sx: f64 = slice.iter().map(|p| p[0]).sum();
            let sy: f64 = slice.iter().map(|p| p[1]).sum();
            [sx / k, sy / k]
        })
        .collect()
}

fn differentiate(times: &[f64], values: &[[f64; 2]]) -> Vec<[f64; 2]> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            let dt = times[b] - times[a];
            [(values[b][0] - values[a][0]) / dt, (values[b][1] - values[a][1]) / dt]
        })
        .collect()
}

fn differentiate_scalar(times: &[f64], values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n)
        .map(|i| {
            let (a, b) = if i == 0 {
                (0, 1)
            } else if i == n - 1 {
                (n - 2, n - 1)
            } else {
                (i - 1, i + 1)
            };
            (values[b] - values[a]) / (times[b] - times[a])
        })
        .collect()
}

/// Removes 2*pi jumps so consecutive yaws differ by at most pi.
pub fn unwrap_angles(yaws: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut out: Vec<f64> = Vec::new();
    for y in yaws {
        match out.last() {
            None => out.push(y),
            Some(&prev) => {
                let d = crate::track::normalize_angle(y - prev);
                out.push(prev + d);
            }
        }
    }
    out
}

pub fn estimate_states(track: &Track) -> Vec<KinematicState> {
    let n = track.boxes.len();
    if n < 2 {
        return track
            .boxes
            .iter()
            .map(|b| KinematicState {
                timestamp: b.timestamp,
                velocity: [0.0, 0.0],
                speed: 0.0,
                accel_forward: 0.0,
                accel_lateral: 0.0,
                yaw_rate: 0.0,
            })
            .collect();
    }
    // Times relative to the first box keep the differences well-conditioned.
    let t0 = track.boxes[0].timestamp.0;
    let times: Vec<f64> = track.boxes.iter().map(|b| (b.timestamp.0 - t0) as f64 * 1e-9).collect();
    let raw: Vec<[f64; 2]> = track.boxes.iter().map(|b| b.xy()).collect();
    let pos = smooth(&raw, smoothing_window(&times));
    let vel = differentiate(&times, &pos);
    let acc = differentiate(&times, &vel);
    let yaw = unwrap_angles(track.boxes.iter().map(|b| b.yaw));
    let yaw_rate = differentiate_scalar(&times, &yaw);
    track
        .boxes
        .iter()
        .enumerate()
        .map(|(i, b)| {
            let (s, c) = b.yaw.sin_cos();
            let a = acc[i];
            let v = vel[i];
            KinematicState {
                timestamp: b.timestamp,
                velocity: v,
                speed: v[0].hypot(v[1]),
                accel_forward: a[0] * c + a[1] * s,
                accel_lateral: -a[0] * s + a[1] * c,
                yaw_rate: yaw_rate[i],
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::category::Category;
    use crate::track::TrackBox;

    fn track_from(points: impl IntoIterator<Item = (f64, f64, f64, f64)>) -> Track {
        let boxes = points
            .into_iter()
            .map(|(t, x, y, yaw)| TrackBox {
                timestamp: Timestamp(1_000_000_000 + (t * 1e9).round() as i64),
                translation: [x, y, 0.0],
                yaw,
                size: [4.0, 2.0, 1.5],
                confidence: 1.0,
            })
            .collect();
        Track::new("t", Category::RegularVehicle, boxes).unwrap()
    }

    #[test]
    fn window_sizes() {
        let ten_hz: Vec<f64> = (0..20).map(|i| i as f64 * 0.1).collect();
        let two_hz: Vec<f64> = (0..20).map(|i| i as f64 * 0.5).collect();
        assert_eq!(smoothing_window(&ten_hz), 5);
        assert_eq!(smoothing_window(&two_hz), 1);
    }

    #[test]
    fn stationary_is_all_zero() {
        let t = track_from((0..30).map(|i| (i as f64 * 0.1, 3.0, 4.0, 0.5)));
        for s in estimate_states(&t) {
            assert_eq!(s.speed, 0.0);
            assert_eq!(s.accel_forward, 0.0);
            assert_eq!(s.accel_lateral, 0.0);
            assert_eq!(s.yaw_rate, 0.0);
        }
    }

    #[test]
    fn single_box_is_zero() {
        let t = track_from([(0.0, 1.0, 1.0, 0.0)]);
        let s = estimate_states(&t);
        assert_eq!(s.len(), 1);
        assert_eq!(s[0].speed, 0.0);
    }

    #[test]
    fn uniform_motion() {
        let t = track_from((0..50).map(|i| {
            let ti = i as f64 * 0.1;
            (ti, 10.0 * ti, 0.0, 0.0)
        }));
        for s in estimate_states(&t) {
            assert!((s.speed - 10.0).abs() < 1e-6, "{}", s.speed);
            assert!(s.accel_forward.abs() < 1e-6);
        }
    }

    #[test]
    fn constant_acceleration_interior() {
        // x(t) = t^2, so a = 2.
        let t = track_from((0..60).map(|i| {
            let ti = i as f64 * 0.1;
            (ti, ti * ti, 0.0, 0.0)
        }));
        let states = estimate_states(&t);
        for s in &states[4..states.len() - 4] {
            assert!((s.accel_forward - 2.0).abs() < 0.05, "{}", s.accel_forward);
            assert!(s.accel_lateral.abs() < 1e-6);
        }
    }

    #[test]
    fn circular_left_turn_lateral_accel() {
        let (v, r) = (10.0, 20.0);
        let w = v / r;
        let t = track_from((0..60).map(|i| {
            let ti = i as f64 * 0.1;
            let th = w * ti;
            (ti, r * th.sin(), r - r * th.cos(), th)
        }));
        let states = estimate_states(&t);
        for s in &states[4..states.len() - 4] {
            assert!((s.accel_lateral - 5.0).abs() < 0.1, "{}", s.accel_lateral);
            assert!((s.yaw_rate - w).abs() < 1e-6);
        }
    }

    #[test]
    fn yaw_wrap_gives_bounded_rate() {
        let t = track_from((0..20).map(|i| {
            let ti = i as f64 * 0.1;
            let yaw = crate::track::normalize_angle(3.0 + 0.5 * ti);
            (ti, 0.0, 0.0, yaw)
        }));
        for s in estimate_states(&t) {
            assert!((s.yaw_rate - 0.5).abs() < 1e-9, "{}", s.yaw_rate);
        }
    }
}
