//! Visual kinematics of the raw gaze in the window before the current one.

use crate::gaze::GazeSample;

use super::FeatureVector;

pub(crate) const NAMES: [&str; 18] = [
    "coordX", "coordY", "MeanX", "MeanY", "StdX", "StdY", "VelX", "VelY", "MeanVelX", "MeanVelY",
    "StdVelX", "StdVelY", "AclX", "AclY", "MeanAclX", "MeanAclY", "StdAclX", "StdAclY",
];

fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (0.0, 0.0);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

/// Backward differences in units per second; element `i` belongs to the
/// later sample of each pair.
fn backward_diff(values: &[f64], t_ms: &[f64]) -> Vec<f64> {
    values
        .windows(2)
        .zip(t_ms.windows(2))
        .map(|(v, t)| {
            let dt = (t[1] - t[0]) / 1000.0;
            if dt > 0.0 {
                (v[1] - v[0]) / dt
            } else {
                0.0
            }
        })
        .collect()
}

/// Position, velocity and acceleration statistics per axis (px, px/s,
/// px/s²) over the valid samples given. Empty input yields zeros.
pub fn kinematics_features(samples: &[GazeSample]) -> FeatureVector {
    let valid: Vec<&GazeSample> = samples.iter().filter(|s| s.valid).collect();
    let t: Vec<f64> = valid.iter().map(|s| s.t).collect();
    let mut fv = FeatureVector::new();
    for (axis, pos) in [
        ("X", valid.iter().map(|s| s.x).collect::<Vec<_>>()),
        ("Y", valid.iter().map(|s| s.y).collect::<Vec<_>>()),
    ] {
        let (m, sd) = mean_std(&pos);
        fv.push(format!("coord{axis}"), pos.last().copied().unwrap_or(0.0));
        fv.push(format!("Mean{axis}"), m);
        fv.push(format!("Std{axis}"), sd);

        let vel = backward_diff(&pos, &t);
        let (vm, vsd) = mean_std(&vel);
        fv.push(format!("Vel{axis}"), vel.last().copied().unwrap_or(0.0));
        fv.push(format!("MeanVel{axis}"), vm);
        fv.push(format!("StdVel{axis}"), vsd);

        let acl = if t.len() >= 3 {
            backward_diff(&vel, &t[1..])
        } else {
            Vec::new()
        };
        let (am, asd) = mean_std(&acl);
        fv.push(format!("Acl{axis}"), acl.last().copied().unwrap_or(0.0));
        fv.push(format!("MeanAcl{axis}"), am);
        fv.push(format!("StdAcl{axis}"), asd);
    }
    fv.sorted()
}
