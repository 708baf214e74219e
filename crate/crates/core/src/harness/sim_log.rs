use std::path::Path;

use nalgebra::{DVector, Vector3, Vector6};

use crate::error::{Error, Result};

/// One control tick.
#[derive(Debug, Clone, PartialEq)]
pub struct SimRow {
    pub t: f64,
    /// Streamed via point in the world frame, board motion included.
    pub reference: Vector3<f64>,
    pub planner_position: Vector3<f64>,
    pub planner_velocity: Vector3<f64>,
    /// Desired orientation as a rotation vector.
    pub desired_rotation: Vector3<f64>,
    pub q_des: DVector<f64>,
    pub q: DVector<f64>,
    pub qd: DVector<f64>,
    pub ee_position: Vector3<f64>,
    pub ee_rotation: Vector3<f64>,
    /// Applied torques, after actuator saturation.
    pub tau: DVector<f64>,
    /// External wrench, force then torque.
    pub external: Vector6<f64>,
    pub fic_wrench: Vector6<f64>,
    /// Inside a scheduled perturbation window.
    pub perturbed: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SimLog {
    pub dof: usize,
    pub rows: Vec<SimRow>,
}

fn vec3_cols(prefix: &str) -> [String; 3] {
    ["x", "y", "z"].map(|a| format!("{prefix}_{a}"))
}

fn wrench_cols(prefix: &str) -> [String; 6] {
    ["fx", "fy", "fz", "tx", "ty", "tz"].map(|a| format!("{prefix}_{a}"))
}

impl SimLog {
    /// Column order of the persisted log.
    pub fn columns(dof: usize) -> Vec<String> {
        let joints = |p: &'static str| (0..dof).map(move |i| format!("{p}{i}"));
        let mut c = vec!["t".to_string()];
        c.extend(vec3_cols("ref"));
        c.extend(vec3_cols("plan"));
        c.extend(vec3_cols("plan_v"));
        c.extend(vec3_cols("des_rot"));
        c.extend(joints("q_des"));
        c.extend(joints("q"));
        c.extend(joints("qd"));
        c.extend(vec3_cols("ee"));
        c.extend(vec3_cols("ee_rot"));
        c.extend(joints("tau"));
        c.extend(wrench_cols("ext"));
        c.extend(wrench_cols("fic"));
        c.push("fic_force_norm".into());
        c.push("perturbed".into());
        c
    }

    /// Merged `[start, end]` intervals where `perturbed` is set.
    pub fn perturbation_windows(&self) -> Vec<(f64, f64)> {
        let mut out: Vec<(f64, f64)> = Vec::new();
        let mut open: Option<f64> = None;
        let mut last_t = 0.0;
        for r in &self.rows {
            match (r.perturbed, open) {
                (true, None) => open = Some(r.t),
                (false, Some(a)) => {
                    out.push((a, last_t));
                    open = None;
                }
                _ => {}
            }
            last_t = r.t;
        }
        if let Some(a) = open {
            out.push((a, last_t));
        }
        out
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Io(std::io::Error::other(e));
        w.write_record(Self::columns(self.dof)).map_err(csv_err)?;
        for r in &self.rows {
            let mut v: Vec<f64> = vec![r.t];
            for x in [&r.reference, &r.planner_position, &r.planner_velocity, &r.desired_rotation] {
                v.extend(x.iter());
            }
            for x in [&r.q_des, &r.q, &r.qd] {
                v.extend(x.iter());
            }
            v.extend(r.ee_position.iter());
            v.extend(r.ee_rotation.iter());
            v.extend(r.tau.iter());
            v.extend(r.external.iter());
            v.extend(r.fic_wrench.iter());
            v.push(r.fic_wrench.fixed_rows::<3>(0).norm());
            v.push(if r.perturbed { 1.0 } else { 0.0 });
            w.write_record(v.iter().map(|x| x.to_string())).map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        String::from_utf8(bytes).map_err(|e| Error::Io(std::io::Error::other(e)))
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_csv_string()?)?;
        Ok(())
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        if !path.exists() {
            return Err(Error::MissingFile(path.to_path_buf()));
        }
        Self::from_csv_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
        let parse_err = |line: u64, message: String| Error::TrajectoryParse { line, message };
        let header: Vec<String> = reader
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect();
        // 33 fixed columns plus four per joint.
        let dof = header.len().checked_sub(33).filter(|n| n % 4 == 0).map(|n| n / 4);
        let dof = match dof {
            Some(n) if header == Self::columns(n) => n,
            _ => return Err(parse_err(1, "header does not match the simulation log layout".into())),
        };
        let mut rows = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| parse_err(e.position().map_or(0, |p| p.line()), e.to_string()))?;
            let line = record.position().map_or(0, |p| p.line());
            let v: Vec<f64> = record
                .iter()
                .map(|f| f.parse::<f64>().map_err(|_| parse_err(line, format!("'{f}' is not a number"))))
                .collect::<Result<_>>()?;
            if v.len() != header.len() {
                return Err(parse_err(line, format!("expected {} fields, got {}", header.len(), v.len())));
            }
            let mut at = 0;
            let mut take = |n: usize| {
                let s = &v[at..at + n];
                at += n;
                s
            };
            let t = take(1)[0];
            let v3 = |s: &[f64]| Vector3::from_column_slice(s);
            let reference = v3(take(3));
            let planner_position = v3(take(3));
            let planner_velocity = v3(take(3));
            let desired_rotation = v3(take(3));
            let q_des = DVector::from_column_slice(take(dof));
            let q = DVector::from_column_slice(take(dof));
            let qd = DVector::from_column_slice(take(dof));
            let ee_position = v3(take(3));
            let ee_rotation = v3(take(3));
            let tau = DVector::from_column_slice(take(dof));
            let external = Vector6::from_column_slice(take(6));
            let fic_wrench = Vector6::from_column_slice(take(6));
            let _norm = take(1);
            let perturbed = take(1)[0] != 0.0;
            rows.push(SimRow {
                t,
                reference,
                planner_position,
                planner_velocity,
                desired_rotation,
                q_des,
                q,
                qd,
                ee_position,
                ee_rotation,
                tau,
                external,
                fic_wrench,
                perturbed,
            });
        }
        Ok(Self { dof, rows })
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub(crate) fn row(t: f64, dof: usize, offset: f64, perturbed: bool) -> SimRow {
        let p = Vector3::new(0.4, 0.1 * t.sin(), 0.5);
        SimRow {
            t,
            reference: p,
            planner_position: p,
            planner_velocity: Vector3::new(0.0, 0.1 * t.cos(), 0.0),
            desired_rotation: Vector3::zeros(),
            q_des: DVector::from_element(dof, 0.1),
            q: DVector::from_element(dof, 0.1 + t),
            qd: DVector::zeros(dof),
            ee_position: p + Vector3::new(0.0, offset, 0.0),
            ee_rotation: Vector3::new(0.0, 0.0, 0.5),
            tau: DVector::from_element(dof, -1.5),
            external: if perturbed { Vector6::new(20.0, 0.0, 0.0, 0.0, 0.0, 0.0) } else { Vector6::zeros() },
            fic_wrench: Vector6::new(3.0, -4.0, 0.0, 0.1, 0.0, 0.0),
            perturbed,
        }
    }

    #[test]
    fn csv_round_trip() {
        let log = SimLog {
            dof: 3,
            rows: (0..20).map(|k| row(k as f64 * 0.001, 3, 1e-3, (5..8).contains(&k))).collect(),
        };
        let text = log.to_csv_string().unwrap();
        assert!(text.starts_with("t,ref_x,ref_y,ref_z,plan_x"));
        assert_eq!(SimLog::from_csv_str(&text).unwrap(), log);
        assert_eq!(log.perturbation_windows(), vec![(0.005, 0.007)]);
    }

    #[test]
    fn rejects_foreign_csv() {
        assert!(SimLog::from_csv_str("t,x,y,z\n0,0,0,0\n").is_err());
    }

    #[test]
    fn column_count() {
        assert_eq!(SimLog::columns(7).len(), 33 + 28);
    }
}
