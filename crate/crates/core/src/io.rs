//! Log ingestion (tracks, ego poses, map, colors) and scenario output files.
//!
//! File layout of a log directory:
//!
//! ```text
//! <log_id>/tracks.csv   timestamp_ns,track_id,confidence,class_name,tx_m,ty_m,tz_m,length_m,width_m,height_m,yaw_rad   (ego frame)
//! <log_id>/poses.csv    timestamp_ns,tx_m,ty_m,tz_m,qw,qx,qy,qz                                                     (ego -> city)
//! <log_id>/map.json
//! <log_id>/colors.csv   track_id,color   (optional)
//! ```

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::{Path, PathBuf};

use log::warn;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::category::Category;
use crate::color::ColorTable;
use crate::error::{Error, Result};
use crate::map::HdMap;
use crate::scenario::ScenarioSet;
use crate::track::{normalize_angle, Timestamp, Track, TrackBox};

pub const EGO_TRACK_ID: &str = "ego";
/// Ego box (length, width, height) in meters.
pub const EGO_SIZE: [f64; 3] = [4.877, 2.0, 1.473];
/// Ego box center relative to the ego reference point near the rear axle.
pub const EGO_OFFSET: [f64; 3] = [1.422, 0.0, 0.25];

pub const TRACKS_FILE: &str = "tracks.csv";
pub const POSES_FILE: &str = "poses.csv";
pub const MAP_FILE: &str = "map.json";
pub const COLORS_FILE: &str = "colors.csv";

/// Ego-to-city transform at one timestamp.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EgoPose {
    pub timestamp: Timestamp,
    pub translation: [f64; 3],
    /// Unit quaternion (w, x, y, z).
    pub rotation: [f64; 4],
}

impl EgoPose {
    /// A planar pose with the given heading.
    pub fn planar(timestamp: Timestamp, x: f64, y: f64, z: f64, yaw: f64) -> Self {
        let (s, c) = (yaw / 2.0).sin_cos();
        EgoPose { timestamp, translation: [x, y, z], rotation: [c, 0.0, 0.0, s] }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.rotation.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (n - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidArgument(format!(
                "pose at {} has non-unit quaternion (norm {n})",
                self.timestamp
            )));
        }
        Ok(())
    }

    pub fn rotation_matrix(&self) -> [[f64; 3]; 3] {
        let [w, x, y, z] = self.rotation;
        [
            [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - w * z), 2.0 * (x * z + w * y)],
            [2.0 * (x * y + w * z), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - w * x)],
            [2.0 * (x * z - w * y), 2.0 * (y * z + w * x), 1.0 - 2.0 * (x * x + y * y)],
        ]
    }

    /// Heading of the ego x-axis in the city frame.
    pub fn yaw(&self) -> f64 {
        let r = self.rotation_matrix();
        r[1][0].atan2(r[0][0])
    }

    pub fn to_city(&self, p: [f64; 3]) -> [f64; 3] {
        let r = self.rotation_matrix();
        let t = self.translation;
        [
            r[0][0] * p[0] + r[0][1] * p[1] + r[0][2] * p[2] + t[0],
            r[1][0] * p[0] + r[1][1] * p[1] + r[1][2] * p[2] + t[1],
            r[2][0] * p[0] + r[2][1] * p[1] + r[2][2] * p[2] + t[2],
        ]
    }

    pub fn to_ego(&self, p: [f64; 3]) -> [f64; 3] {
        let r = self.rotation_matrix();
        let d = [p[0] - self.translation[0], p[1] - self.translation[1], p[2] - self.translation[2]];
        [
            r[0][0] * d[0] + r[1][0] * d[1] + r[2][0] * d[2],
            r[0][1] * d[0] + r[1][1] * d[1] + r[2][1] * d[2],
            r[0][2] * d[0] + r[1][2] * d[1] + r[2][2] * d[2],
        ]
    }
}

/// One log: city-frame tracks (ego track included), poses, map and colors.
#[derive(Debug, Clone)]
pub struct LogBundle {
    pub log_id: String,
    pub tracks: Vec<Track>,
    pub ego: Vec<EgoPose>,
    pub map: HdMap,
    pub colors: ColorTable,
}

impl LogBundle {
    pub fn track(&self, id: &str) -> Option<&Track> {
        self.tracks.iter().find(|t| t.id == id)
    }

    /// Every pose timestamp, in order.
    pub fn timestamps(&self) -> Vec<Timestamp> {
        self.ego.iter().map(|p| p.timestamp).collect()
    }

    pub fn check_invariants(&self) -> Result<()> {
        let poses: std::collections::HashSet<Timestamp> = self.ego.iter().map(|p| p.timestamp).collect();
        if self.ego.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
            return Err(Error::Malformed("ego pose timestamps are not strictly increasing".into()));
        }
        for t in &self.tracks {
            if let Some(b) = t.boxes.iter().find(|b| !poses.contains(&b.timestamp)) {
                return Err(Error::MissingPose(b.timestamp.0));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct TrackRow {
    timestamp_ns: i64,
    track_id: String,
    confidence: f64,
    class_name: String,
    tx_m: f64,
    ty_m: f64,
    tz_m: f64,
    length_m: f64,
    width_m: f64,
    height_m: f64,
    yaw_rad: f64,
}

#[derive(Debug, Deserialize, Serialize)]
struct PoseRow {
    timestamp_ns: i64,
    tx_m: f64,
    ty_m: f64,
    tz_m: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
}

/// Tracks plus the rows that could not be used.
#[derive(Debug, Default)]
pub struct TrackLoad {
    pub tracks: Vec<Track>,
    /// One diagnostic per rejected row.
    pub rejected: Vec<String>,
    pub warnings: Vec<String>,
}

/// Reads `tracks.csv`, grouping rows by track id. Tracks come back in ego frame,
/// sorted by id.
pub fn load_tracks(path: &Path) -> Result<TrackLoad> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = TrackLoad::default();
    let mut groups: BTreeMap<String, (Category, Vec<TrackBox>)> = BTreeMap::new();
    for (line, row) in rdr.deserialize::<TrackRow>().enumerate() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        let line = line + 2;
        let category: Category = match row.class_name.parse() {
            Ok(c) => c,
            Err(_) => {
                out.rejected.push(format!("line {line}: unknown class_name {:?}", row.class_name));
                continue;
            }
        };
        let b = TrackBox {
            timestamp: Timestamp(row.timestamp_ns),
            translation: [row.tx_m, row.ty_m, row.tz_m],
            yaw: normalize_angle(row.yaw_rad),
            size: [row.length_m, row.width_m, row.height_m],
            confidence: row.confidence,
        };
        if let Err(e) = b.validate() {
            out.rejected.push(format!("line {line}: {e}"));
            continue;
        }
        let entry = groups.entry(row.track_id.clone()).or_insert_with(|| (category, Vec::new()));
        if entry.0 != category {
            out.rejected.push(format!(
                "line {line}: track {} changes class from {} to {}",
                row.track_id, entry.0, category
            ));
            continue;
        }
        entry.1.push(b);
    }
    for (id, (category, mut boxes)) in groups {
        if boxes.windows(2).any(|w| w[0].timestamp > w[1].timestamp) {
            let msg = format!("track {id}: timestamps out of order, sorted");
            warn!("{msg}");
            out.warnings.push(msg);
        }
        boxes.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then(b.confidence.total_cmp(&a.confidence)));
        let before = boxes.len();
        boxes.dedup_by_key(|b| b.timestamp);
        if boxes.len() != before {
            out.warnings.push(format!("track {id}: {} duplicate timestamps dropped", before - boxes.len()));
        }
        out.tracks.push(Track::new(id, category, boxes)?);
    }
    Ok(out)
}

pub fn load_poses(path: &Path) -> Result<Vec<EgoPose>> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut poses = Vec::new();
    for row in rdr.deserialize::<PoseRow>() {
        let r = row.map_err(|e| Error::csv(path, e))?;
        let pose = EgoPose {
            timestamp: Timestamp(r.timestamp_ns),
            translation: [r.tx_m, r.ty_m, r.tz_m],
            rotation: [r.qw, r.qx, r.qy, r.qz],
        };
        pose.validate()?;
        poses.push(pose);
    }
    if poses.windows(2).any(|w| w[0].timestamp >= w[1].timestamp) {
        return Err(Error::Malformed(format!("{}: pose timestamps not strictly increasing", path.display())));
    }
    Ok(poses)
}

fn pose_index(ego: &[EgoPose]) -> HashMap<Timestamp, &EgoPose> {
    ego.iter().map(|p| (p.timestamp, p)).collect()
}

/// Moves ego-frame tracks into the city frame using the pose at each box timestamp.
pub fn to_city_frame(tracks: &[Track], ego: &[EgoPose]) -> Result<Vec<Track>> {
    let poses = pose_index(ego);
    tracks
        .iter()
        .map(|t| {
            let mut t = t.clone();
            for b in &mut t.boxes {
                let pose = poses.get(&b.timestamp).ok_or(Error::MissingPose(b.timestamp.0))?;
                b.translation = pose.to_city(b.translation);
                b.yaw = normalize_angle(b.yaw + pose.yaw());
            }
            Ok(t)
        })
        .collect()
}

/// Inverse of [`to_city_frame`].
pub fn to_ego_frame(tracks: &[Track], ego: &[EgoPose]) -> Result<Vec<Track>> {
    let poses = pose_index(ego);
    tracks
        .iter()
        .map(|t| {
            let mut t = t.clone();
            for b in &mut t.boxes {
                let pose = poses.get(&b.timestamp).ok_or(Error::MissingPose(b.timestamp.0))?;
                b.translation = pose.to_ego(b.translation);
                b.yaw = normalize_angle(b.yaw - pose.yaw());
            }
            Ok(t)
        })
        .collect()
}

/// Appends the ego vehicle as a city-frame track with one box per pose.
pub fn inject_ego_track(mut tracks: Vec<Track>, ego: &[EgoPose]) -> Result<Vec<Track>> {
    if tracks.iter().any(|t| t.category == Category::EgoVehicle || t.id == EGO_TRACK_ID) {
        return Err(Error::EgoAlreadyPresent);
    }
    if ego.is_empty() {
        return Err(Error::InvalidArgument("no ego poses to build the ego track from".into()));
    }
    let boxes = ego
        .iter()
        .map(|p| TrackBox {
            timestamp: p.timestamp,
            translation: EGO_OFFSET,
            yaw: 0.0,
            size: EGO_SIZE,
            confidence: 1.0,
        })
        .collect();
    let local = Track::new(EGO_TRACK_ID, Category::EgoVehicle, boxes)?;
    tracks.extend(to_city_frame(&[local], ego)?);
    Ok(tracks)
}

/// Loads one log directory into a city-frame bundle with the ego track injected.
pub fn load_log(dir: &Path) -> Result<LogBundle> {
    let log_id = dir
        .file_name()
        .map(|s| s.to_string_lossy().into_owned())
        .ok_or_else(|| Error::InvalidArgument(format!("{} has no directory name", dir.display())))?;
    let loaded = load_tracks(&dir.join(TRACKS_FILE))?;
    for r in &loaded.rejected {
        warn!("{log_id}: rejected {r}");
    }
    let ego = load_poses(&dir.join(POSES_FILE))?;
    let map = HdMap::load(&dir.join(MAP_FILE))?;
    let colors_path = dir.join(COLORS_FILE);
    let colors = if colors_path.exists() { ColorTable::load(&colors_path)? } else { ColorTable::new() };
    let tracks = to_city_frame(&loaded.tracks, &ego)?;
    let tracks = inject_ego_track(tracks, &ego)?;
    let bundle = LogBundle { log_id, tracks, ego, map, colors };
    bundle.check_invariants()?;
    Ok(bundle)
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes ego-frame tracks in the `tracks.csv` schema.
pub fn write_tracks(path: &Path, tracks: &[Track]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    w.write_record([
        "timestamp_ns", "track_id", "confidence", "class_name", "tx_m", "ty_m", "tz_m", "length_m", "width_m",
        "height_m", "yaw_rad",
    ])
    .map_err(|e| Error::csv(path, e))?;
    for t in tracks {
        for b in &t.boxes {
            w.write_record([
                b.timestamp.0.to_string(),
                t.id.clone(),
                b.confidence.to_string(),
                t.category.name().to_string(),
                b.translation[0].to_string(),
                b.translation[1].to_string(),
                b.translation[2].to_string(),
                b.size[0].to_string(),
                b.size[1].to_string(),
                b.size[2].to_string(),
                b.yaw.to_string(),
            ])
            .map_err(|e| Error::csv(path, e))?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn write_poses(path: &Path, ego: &[EgoPose]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| Error::csv(path, e))?;
    for p in ego {
        let row = PoseRow {
            timestamp_ns: p.timestamp.0,
            tx_m: p.translation[0],
            ty_m: p.translation[1],
            tz_m: p.translation[2],
            qw: p.rotation[0],
            qx: p.rotation[1],
            qy: p.rotation[2],
            qz: p.rotation[3],
        };
        w.serialize(row).map_err(|e| Error::csv(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Writes a bundle as a log directory `<root>/<log_id>/`. The ego track is not
/// written; loading re-injects it from the poses.
pub fn write_log(root: &Path, bundle: &LogBundle) -> Result<PathBuf> {
    let dir = root.join(&bundle.log_id);
    ensure_dir(&dir)?;
    let others: Vec<Track> = bundle.tracks.iter().filter(|t| t.category != Category::EgoVehicle).cloned().collect();
    write_tracks(&dir.join(TRACKS_FILE), &to_ego_frame(&others, &bundle.ego)?)?;
    write_poses(&dir.join(POSES_FILE), &bundle.ego)?;
    bundle.map.save(&dir.join(MAP_FILE))?;
    bundle.colors.save(&dir.join(COLORS_FILE))?;
    Ok(dir)
}

/// Stable file stem for a prompt: `scenario_<first 16 hex digits of sha256>`.
pub fn scenario_stem(description: &str) -> String {
    let digest = Sha256::digest(description.as_bytes());
    let hex: String = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
    format!("scenario_{hex}")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Role {
    Referred,
    Related,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
struct ScenarioRow {
    track_uuid: String,
    timestamp_ns: i64,
    role: Role,
    related_to: String,
}

/// JSON mirror of a scenario CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScenarioDocument {
    pub log_id: String,
    pub description: String,
    pub scenario: ScenarioSet,
}

#[derive(Debug, Clone)]
pub struct ScenarioFiles {
    pub csv: PathBuf,
    pub json: PathBuf,
}

fn scenario_rows(result: &ScenarioSet) -> Vec<ScenarioRow> {
    let mut rows: Vec<ScenarioRow> = result
        .pairs()
        .map(|(id, t)| ScenarioRow {
            track_uuid: id.to_owned(),
            timestamp_ns: t.0,
            role: Role::Referred,
            related_to: String::new(),
        })
        .chain(result.triples().map(|(k, r, t)| ScenarioRow {
            track_uuid: r.to_owned(),
            timestamp_ns: t.0,
            role: Role::Related,
            related_to: k.to_owned(),
        }))
        .collect();
    rows.sort();
    rows
}

/// Writes `<out_dir>/<stem>.csv` (one row per referred pair and per relationship
/// triple) and the `.json` mirror.
pub fn write_scenario_output(
    result: &ScenarioSet,
    description: &str,
    log_id: &str,
    out_dir: &Path,
) -> Result<ScenarioFiles> {
    ensure_dir(out_dir)?;
    let stem = scenario_stem(description);
    let csv_path = out_dir.join(format!("{stem}.csv"));
    let json_path = out_dir.join(format!("{stem}.json"));
    let mut w = csv::Writer::from_path(&csv_path).map_err(|e| Error::csv(&csv_path, e))?;
    w.write_record(["track_uuid", "timestamp_ns", "role", "related_to"])
        .map_err(|e| Error::csv(&csv_path, e))?;
    for row in scenario_rows(result) {
        w.write_record([
            row.track_uuid,
            row.timestamp_ns.to_string(),
            match row.role {
                Role::Referred => "REFERRED".to_string(),
                Role::Related => "RELATED".to_string(),
            },
            row.related_to,
        ])
        .map_err(|e| Error::csv(&csv_path, e))?;
    }
    w.flush().map_err(|e| Error::io(&csv_path, e))?;
    let doc = ScenarioDocument { log_id: log_id.to_owned(), description: description.to_owned(), scenario: result.clone() };
    let text = serde_json::to_string_pretty(&doc).map_err(|e| Error::json(&json_path, e))?;
    fs::write(&json_path, text + "\n").map_err(|e| Error::io(&json_path, e))?;
    Ok(ScenarioFiles { csv: csv_path, json: json_path })
}

/// Reads a scenario CSV back into a scenario set.
pub fn read_scenario_csv(path: &Path) -> Result<ScenarioSet> {
    let mut rdr = csv::Reader::from_path(path).map_err(|e| Error::csv(path, e))?;
    let mut out = ScenarioSet::new();
    let mut related = Vec::new();
    for row in rdr.deserialize::<ScenarioRow>() {
        let row = row.map_err(|e| Error::csv(path, e))?;
        match row.role {
            Role::Referred => out.insert(&row.track_uuid, Timestamp(row.timestamp_ns)),
            Role::Related => {
                if row.related_to.is_empty() {
                    return Err(Error::Malformed(format!("{}: RELATED row without related_to", path.display())));
                }
                related.push(row);
            }
        }
    }
    for row in related {
        let t = Timestamp(row.timestamp_ns);
        if !out.contains(&row.related_to, t) {
            return Err(Error::Malformed(format!(
                "{}: relationship {}->{} at {} has no REFERRED row",
                path.display(),
                row.related_to,
                row.track_uuid,
                t
            )));
        }
        out.insert_related(&row.related_to, &row.track_uuid, t);
    }
    Ok(out)
}

pub fn read_scenario_document(path: &Path) -> Result<ScenarioDocument> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    fn write(path: &Path, text: &str) {
        fs::write(path, text).unwrap();
    }

    const HEADER: &str = "timestamp_ns,track_id,confidence,class_name,tx_m,ty_m,tz_m,length_m,width_m,height_m,yaw_rad\n";

    #[test]
    fn groups_rows_into_tracks() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write(
            &p,
            &format!(
                "{HEADER}100,a,0.9,BUS,1,0,0,10,3,3,0\n200,a,0.9,BUS,2,0,0,10,3,3,0\n300,a,0.9,BUS,3,0,0,10,3,3,0\n"
            ),
        );
        let got = load_tracks(&p).unwrap();
        assert_eq!(got.tracks.len(), 1);
        assert_eq!(got.tracks[0].boxes.len(), 3);
        assert!(got.rejected.is_empty());
    }

    #[test]
    fn empty_file_and_unknown_class() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write(&p, HEADER);
        assert!(load_tracks(&p).unwrap().tracks.is_empty());
        write(&p, &format!("{HEADER}100,u,0.9,UNICORN,1,0,0,1,1,1,0\n100,a,0.9,BUS,1,0,0,10,3,3,0\n"));
        let got = load_tracks(&p).unwrap();
        assert_eq!(got.rejected.len(), 1);
        assert!(got.rejected[0].contains("UNICORN"));
        assert_eq!(got.tracks.len(), 1);
    }

    #[test]
    fn unsorted_rows_sorted_and_duplicates_keep_higher_confidence() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("t.csv");
        write(
            &p,
            &format!(
                "{HEADER}300,a,0.9,BUS,3,0,0,10,3,3,0\n100,a,0.2,BUS,1,0,0,10,3,3,0\n100,a,0.8,BUS,9,0,0,10,3,3,0\n"
            ),
        );
        let got = load_tracks(&p).unwrap();
        let t = &got.tracks[0];
        assert_eq!(t.boxes.len(), 2);
        assert_eq!(t.boxes[0].confidence, 0.8);
        assert_eq!(t.boxes[0].translation[0], 9.0);
        assert_eq!(got.warnings.len(), 2);
    }

    fn one_box_track(x: f64, y: f64, yaw: f64) -> Track {
        let b = TrackBox { timestamp: Timestamp(1), translation: [x, y, 0.0], yaw, size: [1.0; 3], confidence: 1.0 };
        Track::new("a", Category::Bus, vec![b]).unwrap()
    }

    #[test]
    fn city_frame_conversion() {
        let identity = [EgoPose::planar(Timestamp(1), 0.0, 0.0, 0.0, 0.0)];
        let t = one_box_track(1.0, 2.0, 0.3);
        assert_eq!(to_city_frame(std::slice::from_ref(&t), &identity).unwrap()[0], t);

        let shifted = [EgoPose::planar(Timestamp(1), 10.0, 0.0, 0.0, 0.0)];
        let got = to_city_frame(&[one_box_track(1.0, 0.0, 0.0)], &shifted).unwrap();
        assert_eq!(got[0].boxes[0].translation, [11.0, 0.0, 0.0]);

        let turned = [EgoPose::planar(Timestamp(1), 5.0, 5.0, 0.0, FRAC_PI_2)];
        let got = to_city_frame(&[one_box_track(1.0, 0.0, 0.0)], &turned).unwrap();
        let b = &got[0].boxes[0];
        // Rotation by +90deg maps (1, 0) to (0, 1).
        assert!((b.translation[0] - 5.0).abs() < 1e-12);
        assert!((b.translation[1] - 6.0).abs() < 1e-12);
        assert!((b.yaw - FRAC_PI_2).abs() < 1e-12);
    }

    #[test]
    fn missing_pose_names_timestamp() {
        let err = to_city_frame(&[one_box_track(0.0, 0.0, 0.0)], &[]).unwrap_err();
        assert!(err.to_string().contains('1'));
        assert!(matches!(err, Error::MissingPose(1)));
    }

    #[test]
    fn ego_injection_constants_and_idempotence() {
        let poses = vec![
            EgoPose::planar(Timestamp(1), 0.0, 0.0, 0.0, 0.0),
            EgoPose::planar(Timestamp(2), 1.0, 0.0, 0.0, 0.0),
        ];
        let tracks = inject_ego_track(vec![], &poses).unwrap();
        let ego = &tracks[0];
        assert_eq!(ego.category, Category::EgoVehicle);
        assert_eq!(ego.boxes.len(), 2);
        for b in &ego.boxes {
            assert_eq!(b.size, [4.877, 2.0, 1.473]);
            assert_eq!(b.confidence, 1.0);
        }
        assert_eq!(ego.boxes[0].translation, [1.422, 0.0, 0.25]);
        let t = ego.boxes[1].translation;
        assert!((t[0] - 2.422).abs() < 1e-12 && t[1] == 0.0 && t[2] == 0.25);
        assert!(matches!(inject_ego_track(tracks, &poses), Err(Error::EgoAlreadyPresent)));
    }

    #[test]
    fn log_round_trip() {
        let poses = vec![
            EgoPose::planar(Timestamp(10), 3.0, 1.0, 0.2, 0.4),
            EgoPose::planar(Timestamp(20), 4.0, 1.5, 0.2, 0.5),
        ];
        let mut a = one_box_track(7.0, -2.0, 1.0);
        a.boxes[0].timestamp = Timestamp(20);
        let tracks = inject_ego_track(vec![a], &poses).unwrap();
        let map = HdMap::from_file(crate::map::MapFile {
            lanes: vec![],
            crossings: vec![],
            stop_signs: vec![],
            drivable: vec![vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]],
        })
        .unwrap();
        let mut colors = ColorTable::new();
        colors.set("a", crate::Color::Red);
        let bundle = LogBundle { log_id: "rt".into(), tracks, ego: poses, map, colors };
        let root = tempfile::tempdir().unwrap();
        let dir = write_log(root.path(), &bundle).unwrap();
        let back = load_log(&dir).unwrap();
        assert_eq!(back.ego, bundle.ego);
        assert_eq!(back.colors, bundle.colors);
        assert_eq!(back.timestamps(), bundle.timestamps());
        let (x, y) = (back.track("a").unwrap(), bundle.track("a").unwrap());
        for (p, q) in x.boxes[0].translation.iter().zip(y.boxes[0].translation) {
            assert!((p - q).abs() < 1e-9);
        }
        assert!((x.boxes[0].yaw - 1.0).abs() < 1e-12);
    }

    #[test]
    fn scenario_output_rows() {
        let dir = tempfile::tempdir().unwrap();
        let files = write_scenario_output(&ScenarioSet::new(), "empty", "log", dir.path()).unwrap();
        assert_eq!(fs::read_to_string(&files.csv).unwrap(), "track_uuid,timestamp_ns,role,related_to\n");

        let mut s = ScenarioSet::new();
        s.insert("a", Timestamp(1));
        s.insert("a", Timestamp(2));
        let files = write_scenario_output(&s, "two", "log", dir.path()).unwrap();
        let text = fs::read_to_string(&files.csv).unwrap();
        assert_eq!(text.lines().filter(|l| l.contains("REFERRED")).count(), 2);

        s.insert_related("a", "b", Timestamp(2));
        let files = write_scenario_output(&s, "rel", "log", dir.path()).unwrap();
        let text = fs::read_to_string(&files.csv).unwrap();
        assert!(text.contains("b,2,RELATED,a"));
        assert_eq!(read_scenario_csv(&files.csv).unwrap(), s);
        let doc = read_scenario_document(&files.json).unwrap();
        assert_eq!(doc.scenario, s);
        assert_eq!(doc.description, "rel");
    }

    #[test]
    fn stem_is_stable() {
        assert_eq!(scenario_stem("x"), scenario_stem("x"));
        assert_ne!(scenario_stem("x"), scenario_stem("y"));
        assert_eq!(scenario_stem("x").len(), "scenario_".len() + 16);
    }
}
