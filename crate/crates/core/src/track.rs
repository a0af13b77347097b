//! Tracks, boxes and timestamps.

use std::f64::consts::PI;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::category::Category;
use crate::error::{Error, Result};

/// Nanoseconds since epoch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Timestamp(pub i64);

impl Timestamp {
    pub const NANOS_PER_SEC: i64 = 1_000_000_000;

    pub fn nanos(self) -> i64 {
        self.0
    }

    pub fn seconds(self) -> f64 {
        self.0 as f64 * 1e-9
    }

    pub fn from_seconds(s: f64) -> Self {
        Timestamp((s * 1e9).round() as i64)
    }
}

impl fmt::Display for Timestamp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Wraps an angle into (-pi, pi].
pub fn normalize_angle(a: f64) -> f64 {
    let mut r = a.rem_euclid(2.0 * PI);
    if r > PI {
        r -= 2.0 * PI;
    }
    if r <= -PI {
        r += 2.0 * PI;
    }
    r
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackBox {
    pub timestamp: Timestamp,
    /// Box center, meters.
    pub translation: [f64; 3],
    /// Heading about +z, radians in (-pi, pi].
    pub yaw: f64,
    /// (length, width, height), meters.
    pub size: [f64; 3],
    pub confidence: f64,
}

impl TrackBox {
    pub fn xy(&self) -> [f64; 2] {
        [self.translation[0], self.translation[1]]
    }

    pub fn validate(&self) -> Result<()> {
        if self.size.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "box at {} has non-positive size {:?}",
                self.timestamp, self.size
            )));
        }
        if !(0.0..=1.0).contains(&self.confidence) {
            return Err(Error::InvalidArgument(format!(
                "box at {} has confidence {} outside [0, 1]",
                self.timestamp, self.confidence
            )));
        }
        if self.timestamp.0 <= 0 {
            return Err(Error::InvalidArgument(format!("non-positive timestamp {}", self.timestamp)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Track {
    pub id: String,
    pub category: Category,
    /// Strictly increasing in timestamp.
    pub boxes: Vec<TrackBox>,
}

impl Track {
    /// Builds a track, sorting boxes by time and rejecting duplicates or empty input.
    pub fn new(id: impl Into<String>, category: Category, mut boxes: Vec<TrackBox>) -> Result<Self> {
        let id = id.into();
        if boxes.is_empty() {
            return Err(Error::InvalidArgument(format!("track {id} has no boxes")));
        }
        boxes.sort_by_key(|b| b.timestamp);
        if boxes.windows(2).any(|w| w[0].timestamp == w[1].timestamp) {
            return Err(Error::InvalidArgument(format!("track {id} has duplicate timestamps")));
        }
        for b in &mut boxes {
            b.validate()?;
            b.yaw = normalize_angle(b.yaw);
        }
        Ok(Track { id, category, boxes })
    }

    pub fn first_timestamp(&self) -> Timestamp {
        self.boxes[0].timestamp
    }

    pub fn last_timestamp(&self) -> Timestamp {
        self.boxes[self.boxes.len() - 1].timestamp
    }

    pub fn timestamps(&self) -> impl Iterator<Item = Timestamp> + '_ {
        self.boxes.iter().map(|b| b.timestamp)
    }

    pub fn index_of(&self, t: Timestamp) -> Option<usize> {
        self.boxes.binary_search_by_key(&t, |b| b.timestamp).ok()
    }

    pub fn box_at(&self, t: Timestamp) -> Option<&TrackBox> {
        self.index_of(t).map(|i| &self.boxes[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn bx(t: i64) -> TrackBox {
        TrackBox {
            timestamp: Timestamp(t),
            translation: [0.0; 3],
            yaw: 0.0,
            size: [1.0; 3],
            confidence: 1.0,
        }
    }

    #[test]
    fn normalize_angle_range() {
        assert_eq!(normalize_angle(PI), PI);
        assert_eq!(normalize_angle(-PI), PI);
        assert!((normalize_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((normalize_angle(0.25)).abs() - 0.25 < 1e-15);
    }

    #[test]
    fn track_sorts_and_rejects_duplicates() {
        let t = Track::new("a", Category::Bus, vec![bx(3), bx(1), bx(2)]).unwrap();
        assert_eq!(t.timestamps().map(|t| t.0).collect::<Vec<_>>(), vec![1, 2, 3]);
        assert!(Track::new("a", Category::Bus, vec![bx(1), bx(1)]).is_err());
        assert!(Track::new("a", Category::Bus, vec![]).is_err());
    }

    #[test]
    fn zero_size_rejected() {
        let mut b = bx(1);
        b.size[1] = 0.0;
        assert!(Track::new("a", Category::Bus, vec![b]).is_err());
    }
}
