//! Dataset plumbing: the survival metadata CSV, subject file discovery by
//! filename stem, and CSV readers/writers shared by the commands.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

use crate::survreg::FeatureMatrix;
use crate::volio::{read_nifti, Resection, SegLabelMap, SubjectRecord};

pub const METADATA_HEADER: [&str; 4] = ["BraTS19ID", "Age", "Survival_days", "ResectionStatus"];

/// Parses the BraTS-style survival metadata CSV
/// (`BraTS19ID,Age,Survival_days,ResectionStatus`).
pub fn read_metadata(path: &Path) -> Result<Vec<SubjectRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening metadata {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let col = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .with_context(|| format!("metadata {} lacks column {name:?}", path.display()))
    };
    let id_col = col(METADATA_HEADER[0])?;
    let age_col = col(METADATA_HEADER[1])?;
    let surv_col = col(METADATA_HEADER[2])?;
    let res_col = col(METADATA_HEADER[3])?;

    let mut subjects = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = line + 2; // header is line 1
        let id = record.get(id_col).unwrap_or("").to_string();
        let parse_opt = |field: usize, what: &str| -> Result<Option<f64>> {
            let raw = record.get(field).unwrap_or("");
            if raw.is_empty() || raw == "NA" {
                return Ok(None);
            }
            raw.parse::<f64>()
                .map(Some)
                .with_context(|| format!("metadata row {row}: {what} {raw:?} is not a number"))
        };
        let age = parse_opt(age_col, "Age")?;
        let survival = parse_opt(surv_col, "Survival_days")?;
        let res_raw = record.get(res_col).unwrap_or("");
        let resection = Resection::parse(res_raw)
            .with_context(|| format!("metadata row {row}: bad ResectionStatus {res_raw:?}"))?;
        subjects.push(
            SubjectRecord::new(id, age, resection, survival)
                .with_context(|| format!("metadata row {row}"))?,
        );
    }
    Ok(subjects)
}

/// Finds a subject's volume in `dir` by filename stem: `<id>`, `<id>_seg`,
/// `<id>_mask` or `<id>_t1ce`, as `.nii` or `.nii.gz`.
pub fn find_subject_file(dir: &Path, id: &str) -> Option<PathBuf> {
    for stem in [
        id.to_string(),
        format!("{id}_seg"),
        format!("{id}_mask"),
        format!("{id}_t1ce"),
    ] {
        for ext in ["nii", "nii.gz"] {
            let candidate = dir.join(format!("{stem}.{ext}"));
            if candidate.is_file() {
                return Some(candidate);
            }
        }
    }
    None
}

/// Strips `.nii` / `.nii.gz` and a trailing `_seg` to get the subject id of
/// a segmentation file; `None` for files that are not NIfTI volumes.
pub fn subject_stem(path: &Path) -> Option<String> {
    let name = path.file_name()?.to_str()?;
    let stem = name
        .strip_suffix(".nii.gz")
        .or_else(|| name.strip_suffix(".nii"))?;
    Some(stem.strip_suffix("_seg").unwrap_or(stem).to_string())
}

pub fn load_seg(path: &Path) -> Result<SegLabelMap> {
    let (grid, _) = read_nifti(path).with_context(|| format!("reading {}", path.display()))?;
    SegLabelMap::new(grid).with_context(|| format!("{} is not a label map", path.display()))
}

/// An id column plus a feature matrix, as stored in our feature CSVs.
pub struct IdMatrix {
    pub ids: Vec<String>,
    pub matrix: FeatureMatrix,
}

/// Reads a feature CSV (`id` column first, then named numeric columns).
pub fn read_feature_csv(path: &Path) -> Result<IdMatrix> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening features {}", path.display()))?;
    let headers = reader.headers()?.clone();
    if headers.is_empty() || headers.get(0) != Some("id") {
        bail!(
            "{}: first column must be \"id\", found {:?}",
            path.display(),
            headers.get(0).unwrap_or("")
        );
    }
    let names: Vec<String> = headers.iter().skip(1).map(|s| s.to_string()).collect();
    let mut ids = Vec::new();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let row = line + 2;
        ids.push(record.get(0).unwrap_or("").to_string());
        let mut values = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            let raw = record.get(i + 1).unwrap_or("");
            values.push(raw.parse::<f64>().with_context(|| {
                format!("{} row {row}: column {name:?} value {raw:?}", path.display())
            })?);
        }
        rows.push(values);
    }
    let matrix = FeatureMatrix::new(names, rows)
        .with_context(|| format!("assembling features from {}", path.display()))?;
    Ok(IdMatrix { ids, matrix })
}

pub fn write_feature_csv(
    path: &Path,
    names: &[String],
    rows: &[(String, Vec<f64>)],
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut header = Vec::with_capacity(names.len() + 1);
    header.push("id".to_string());
    header.extend(names.iter().cloned());
    w.write_record(&header)?;
    for (id, values) in rows {
        let mut record = Vec::with_capacity(values.len() + 1);
        record.push(id.clone());
        record.extend(values.iter().map(|v| v.to_string()));
        w.write_record(&record)?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a predictions CSV (`id,Survival_days`) or pulls `(id, survival)`
/// pairs out of a metadata-format CSV.
pub fn read_survival_csv(path: &Path) -> Result<BTreeMap<String, f64>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let headers = reader.headers()?.clone();
    let (id_col, surv_col) = if headers.iter().any(|h| h == "BraTS19ID") {
        (
            headers.iter().position(|h| h == "BraTS19ID").unwrap(),
            headers
                .iter()
                .position(|h| h == "Survival_days")
                .with_context(|| format!("{} lacks Survival_days", path.display()))?,
        )
    } else if headers.iter().any(|h| h == "id") {
        (
            headers.iter().position(|h| h == "id").unwrap(),
            headers
                .iter()
                .position(|h| h == "Survival_days")
                .with_context(|| format!("{} lacks Survival_days", path.display()))?,
        )
    } else {
        bail!(
            "{}: expected an id or BraTS19ID column in the header",
            path.display()
        );
    };
    let mut map = BTreeMap::new();
    for (line, record) in reader.records().enumerate() {
        let record = record?;
        let raw = record.get(surv_col).unwrap_or("");
        if raw.is_empty() || raw == "NA" {
            continue; // subjects without survival are simply absent
        }
        let days: f64 = raw.parse().with_context(|| {
            format!("{} row {}: Survival_days {raw:?}", path.display(), line + 2)
        })?;
        map.insert(record.get(id_col).unwrap_or("").to_string(), days);
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metadata_parses_and_flags_bad_rows() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("m.csv");
        std::fs::write(
            &p,
            "BraTS19ID,Age,Survival_days,ResectionStatus\n\
             s1,60.4,365,GTR\n\
             s2,,,\n\
             s3,55,120.5,STR\n",
        )
        .unwrap();
        let subjects = read_metadata(&p).unwrap();
        assert_eq!(subjects.len(), 3);
        assert_eq!(subjects[0].age, Some(60.4));
        assert_eq!(subjects[0].resection, Resection::Gtr);
        assert_eq!(subjects[1].age, None);
        assert_eq!(subjects[1].survival_days, None);
        assert_eq!(subjects[1].resection, Resection::Na);
        assert_eq!(subjects[2].survival_days, Some(120.5));

        std::fs::write(
            &p,
            "BraTS19ID,Age,Survival_days,ResectionStatus\ns1,sixty,365,GTR\n",
        )
        .unwrap();
        let err = read_metadata(&p).unwrap_err().to_string();
        assert!(err.contains("row 2"), "{err}");
    }

    #[test]
    fn feature_csv_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("f.csv");
        write_feature_csv(
            &p,
            &["a".into(), "b".into()],
            &[
                ("s1".into(), vec![1.5, -2.0]),
                ("s2".into(), vec![0.0, 1e-12]),
            ],
        )
        .unwrap();
        let m = read_feature_csv(&p).unwrap();
        assert_eq!(m.ids, vec!["s1", "s2"]);
        assert_eq!(m.matrix.get(0, 0), 1.5);
        assert_eq!(m.matrix.get(1, 1), 1e-12);
    }

    #[test]
    fn subject_stem_strips_extensions_and_seg_suffix() {
        assert_eq!(
            subject_stem(Path::new("/x/s1_seg.nii.gz")).unwrap(),
            "s1"
        );
        assert_eq!(subject_stem(Path::new("s2.nii")).unwrap(), "s2");
        assert!(subject_stem(Path::new("notes.txt")).is_none());
    }

    #[test]
    fn survival_csv_accepts_both_layouts() {
        let dir = tempfile::tempdir().unwrap();
        let pred = dir.path().join("p.csv");
        std::fs::write(&pred, "id,Survival_days\ns1,100\ns2,250.5\n").unwrap();
        let m = read_survival_csv(&pred).unwrap();
        assert_eq!(m["s2"], 250.5);

        let meta = dir.path().join("m.csv");
        std::fs::write(
            &meta,
            "BraTS19ID,Age,Survival_days,ResectionStatus\ns1,60,42,GTR\ns9,50,,NA\n",
        )
        .unwrap();
        let m = read_survival_csv(&meta).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m["s1"], 42.0);
    }
}
