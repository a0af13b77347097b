use scenemine_core::geometry::Rigid2;
use scenemine_core::track::normalize_angle;
use scenemine_core::{EgoPose, LogBundle, Result};

/// Moves a whole log (boxes, ego poses and map) by a planar rigid motion.
pub fn transform_bundle(bundle: &LogBundle, tf: &Rigid2) -> Result<LogBundle> {
    let mut out = bundle.clone();
    for track in &mut out.tracks {
        for b in &mut track.boxes {
            let [x, y] = tf.apply(b.xy());
            b.translation[0] = x;
            b.translation[1] = y;
            b.yaw = normalize_angle(b.yaw + tf.yaw);
        }
    }
    let (s, c) = (tf.yaw / 2.0).sin_cos();
    for pose in &mut out.ego {
        let [x, y] = tf.apply([pose.translation[0], pose.translation[1]]);
        // Left-multiply by a rotation about z.
        let [w, qx, qy, qz] = pose.rotation;
        *pose = EgoPose {
            timestamp: pose.timestamp,
            translation: [x, y, pose.translation[2]],
            rotation: [c * w - s * qz, c * qx - s * qy, c * qy + s * qx, c * qz + s * w],
        };
    }
    out.map = bundle.map.transformed(tf)?;
    Ok(out)
}
