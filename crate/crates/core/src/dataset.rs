//! Dataset manifests: a versioned CSV listing images, subjects, and
//! partition tags, with an `eyes.csv` sidecar of annotated eye centers.
//!
//! One loader covers generated datasets and hand-built ones alike. Entries
//! whose eye coordinates are missing — or degenerate (eyes closer than the
//! registration minimum) — are not dropped: they are flagged and assigned
//! the mean coordinates of the successfully annotated entries, and every
//! such fill is listed in the ingestion report.

use crate::error::{Error, Result};
use crate::face::{EyeCoordinates, MIN_EYE_DISTANCE};
use crate::raster::RasterImage;
use std::collections::{HashMap, HashSet};
use std::path::{Path, PathBuf};

/// First line of every manifest file.
pub const MANIFEST_VERSION_LINE: &str = "# fbface-manifest v1";
/// Expected manifest column header.
pub const MANIFEST_HEADER: [&str; 4] = ["image_id", "subject_id", "image_path", "partition"];
/// Expected eyes-sidecar column header.
pub const EYES_HEADER: [&str; 5] = ["image_id", "left_x", "left_y", "right_x", "right_y"];
/// Name of the eyes sidecar, resolved next to the manifest.
pub const EYES_SIDECAR: &str = "eyes.csv";

/// The closed set of partition tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Partition {
    Gallery,
    ProbeFb,
    ProbeDup1,
    ProbeDup2,
    ProbeFc,
    Custom,
}

impl Partition {
    pub fn parse(tag: &str) -> Option<Partition> {
        match tag {
            "gallery" => Some(Partition::Gallery),
            "probe_fb" => Some(Partition::ProbeFb),
            "probe_dup1" => Some(Partition::ProbeDup1),
            "probe_dup2" => Some(Partition::ProbeDup2),
            "probe_fc" => Some(Partition::ProbeFc),
            "custom" => Some(Partition::Custom),
            _ => None,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Partition::Gallery => "gallery",
            Partition::ProbeFb => "probe_fb",
            Partition::ProbeDup1 => "probe_dup1",
            Partition::ProbeDup2 => "probe_dup2",
            Partition::ProbeFc => "probe_fc",
            Partition::Custom => "custom",
        }
    }
}

/// One validated manifest row.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetEntry {
    pub image_id: String,
    pub subject_id: String,
    /// Absolute path (manifest-relative paths are resolved at load).
    pub image_path: PathBuf,
    pub partition: Partition,
    pub eyes: EyeCoordinates,
    /// True when `eyes` was filled with the located-set mean rather than
    /// read from the sidecar.
    pub eyes_filled: bool,
}

impl DatasetEntry {
    /// Load this entry's pixels.
    pub fn load_image(&self) -> Result<RasterImage> {
        RasterImage::read_pgm(&self.image_path)
    }
}

/// A validated dataset: every image file exists, ids are unique, partition
/// tags are from the closed set, and every entry has usable eye
/// coordinates (annotated or mean-filled).
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetManifest {
    root: PathBuf,
    entries: Vec<DatasetEntry>,
    /// One line per mean-filled entry explaining why.
    fill_report: Vec<String>,
}

impl DatasetManifest {
    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn entries(&self) -> &[DatasetEntry] {
        &self.entries
    }

    pub fn partition(&self, partition: Partition) -> Vec<&DatasetEntry> {
        self.entries
            .iter()
            .filter(|e| e.partition == partition)
            .collect()
    }

    /// Everything that is not gallery: the probe pool.
    pub fn probes(&self) -> Vec<&DatasetEntry> {
        self.entries
            .iter()
            .filter(|e| e.partition != Partition::Gallery)
            .collect()
    }

    pub fn get(&self, image_id: &str) -> Option<&DatasetEntry> {
        self.entries.iter().find(|e| e.image_id == image_id)
    }

    /// Descriptions of every eye-coordinate fill performed at ingestion.
    pub fn fill_report(&self) -> &[String] {
        &self.fill_report
    }
}

fn dataset_err(path: &Path, line: u64, msg: impl std::fmt::Display) -> Error {
    Error::Dataset(format!("{}, line {}: {}", path.display(), line, msg))
}

/// Parse and fully validate a manifest file and its eyes sidecar.
pub fn ingest(manifest_path: &Path) -> Result<DatasetManifest> {
    let text =
        std::fs::read_to_string(manifest_path).map_err(|e| Error::io(manifest_path, e))?;
    let mut first_line_end = text.find('\n').unwrap_or(text.len());
    let first_line = text[..first_line_end].trim_end_matches('\r');
    if first_line != MANIFEST_VERSION_LINE {
        return Err(dataset_err(
            manifest_path,
            1,
            format!("expected version line '{MANIFEST_VERSION_LINE}', found '{first_line}'"),
        ));
    }
    if first_line_end < text.len() {
        first_line_end += 1; // step past the newline
    }
    let root = manifest_path
        .parent()
        .unwrap_or_else(|| Path::new("."))
        .to_path_buf();

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text[first_line_end..].as_bytes());
    {
        let headers = reader
            .headers()
            .map_err(|e| dataset_err(manifest_path, 2, e))?;
        let fields: Vec<&str> = headers.iter().collect();
        if fields != MANIFEST_HEADER {
            return Err(dataset_err(
                manifest_path,
                2,
                format!("expected header {:?}, found {:?}", MANIFEST_HEADER, fields),
            ));
        }
    }

    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line() + 1).unwrap_or(0);
            dataset_err(manifest_path, line, e)
        })?;
        // +1 for the version line the CSV reader never saw.
        let line = record.position().map(|p| p.line() + 1).unwrap_or(0);
        if record.len() != 4 {
            return Err(dataset_err(
                manifest_path,
                line,
                format!("expected 4 fields, found {}", record.len()),
            ));
        }
        let image_id = record[0].to_string();
        let subject_id = record[1].to_string();
        if image_id.is_empty() || subject_id.is_empty() {
            return Err(dataset_err(manifest_path, line, "empty id field"));
        }
        if !seen.insert(image_id.clone()) {
            return Err(dataset_err(
                manifest_path,
                line,
                format!("duplicate image_id '{image_id}'"),
            ));
        }
        let partition = Partition::parse(&record[3]).ok_or_else(|| {
            dataset_err(
                manifest_path,
                line,
                format!("unknown partition tag '{}'", &record[3]),
            )
        })?;
        let image_path = root.join(&record[2]);
        if !image_path.is_file() {
            return Err(dataset_err(
                manifest_path,
                line,
                format!("image file '{}' does not exist", image_path.display()),
            ));
        }
        entries.push((image_id, subject_id, image_path, partition, line));
    }
    if entries.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no entries",
            manifest_path.display()
        )));
    }

    let eyes_path = root.join(EYES_SIDECAR);
    let eye_map = if eyes_path.is_file() {
        read_eyes_sidecar(&eyes_path)?
    } else {
        HashMap::new()
    };

    // Split annotations into usable and unusable; unusable (missing or
    // degenerate) entries get the mean of the usable ones.
    let mut located: Vec<(usize, EyeCoordinates)> = Vec::new();
    let mut unfilled: Vec<(usize, String)> = Vec::new();
    for (idx, (image_id, ..)) in entries.iter().enumerate() {
        match eye_map.get(image_id) {
            Some(eyes) => {
                let dist = ((eyes.left.0 - eyes.right.0).powi(2)
                    + (eyes.left.1 - eyes.right.1).powi(2))
                .sqrt();
                if dist < MIN_EYE_DISTANCE {
                    unfilled.push((
                        idx,
                        format!("degenerate eye annotation (distance {dist:.2} px)"),
                    ));
                } else {
                    located.push((idx, *eyes));
                }
            }
            None => unfilled.push((idx, "no eye annotation".to_string())),
        }
    }
    if located.is_empty() {
        return Err(Error::Dataset(format!(
            "{}: no usable eye coordinates in {}",
            manifest_path.display(),
            eyes_path.display()
        )));
    }
    let n = located.len() as f64;
    let mean_eyes = EyeCoordinates::new(
        (
            located.iter().map(|(_, e)| e.left.0).sum::<f64>() / n,
            located.iter().map(|(_, e)| e.left.1).sum::<f64>() / n,
        ),
        (
            located.iter().map(|(_, e)| e.right.0).sum::<f64>() / n,
            located.iter().map(|(_, e)| e.right.1).sum::<f64>() / n,
        ),
    );

    let mut eyes_by_idx: Vec<(EyeCoordinates, bool)> =
        vec![(mean_eyes, true); entries.len()];
    for (idx, eyes) in &located {
        eyes_by_idx[*idx] = (*eyes, false);
    }
    let fill_report: Vec<String> = unfilled
        .iter()
        .map(|(idx, reason)| {
            format!(
                "{}: {} — using mean of {} located entries",
                entries[*idx].0,
                reason,
                located.len()
            )
        })
        .collect();

    let entries = entries
        .into_iter()
        .zip(eyes_by_idx)
        .map(
            |((image_id, subject_id, image_path, partition, _), (eyes, eyes_filled))| {
                DatasetEntry {
                    image_id,
                    subject_id,
                    image_path,
                    partition,
                    eyes,
                    eyes_filled,
                }
            },
        )
        .collect();
    Ok(DatasetManifest {
        root,
        entries,
        fill_report,
    })
}

fn read_eyes_sidecar(path: &Path) -> Result<HashMap<String, EyeCoordinates>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(text.as_bytes());
    {
        let headers = reader.headers().map_err(|e| dataset_err(path, 1, e))?;
        let fields: Vec<&str> = headers.iter().collect();
        if fields != EYES_HEADER {
            return Err(dataset_err(
                path,
                1,
                format!("expected header {:?}, found {:?}", EYES_HEADER, fields),
            ));
        }
    }
    let mut map = HashMap::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map(|p| p.line()).unwrap_or(0);
            dataset_err(path, line, e)
        })?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 5 {
            return Err(dataset_err(
                path,
                line,
                format!("expected 5 fields, found {}", record.len()),
            ));
        }
        let mut nums = [0.0f64; 4];
        for (slot, field) in nums.iter_mut().zip(record.iter().skip(1)) {
            *slot = field.parse::<f64>().map_err(|_| {
                dataset_err(path, line, format!("non-numeric coordinate '{field}'"))
            })?;
            if !slot.is_finite() {
                return Err(dataset_err(path, line, "non-finite coordinate"));
            }
        }
        let image_id = record[0].to_string();
        if map
            .insert(
                image_id.clone(),
                EyeCoordinates::new((nums[0], nums[1]), (nums[2], nums[3])),
            )
            .is_some()
        {
            return Err(dataset_err(
                path,
                line,
                format!("duplicate eye annotation for '{image_id}'"),
            ));
        }
    }
    Ok(map)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synth::{write_dataset, SynthConfig};

    fn synth_dataset(dir: &Path) -> PathBuf {
        write_dataset(
            &SynthConfig {
                subjects: 3,
                images_per_subject: 2,
                noise_sd: 2.0,
                seed: 11,
            },
            dir,
        )
        .unwrap()
    }

    #[test]
    fn generated_datasets_ingest_cleanly() {
        let dir = tempfile::tempdir().unwrap();
        let manifest = ingest(&synth_dataset(dir.path())).unwrap();
        assert_eq!(manifest.entries().len(), 6);
        assert_eq!(manifest.partition(Partition::Gallery).len(), 3);
        assert_eq!(manifest.partition(Partition::ProbeFb).len(), 3);
        assert_eq!(manifest.probes().len(), 3);
        assert!(manifest.fill_report().is_empty());
        assert!(manifest.entries().iter().all(|e| !e.eyes_filled));
        let img = manifest.entries()[0].load_image().unwrap();
        assert_eq!(img.width(), crate::synth::IMAGE_WIDTH);
    }

    #[test]
    fn version_line_is_required() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        let text = std::fs::read_to_string(&path).unwrap();
        let without_version = text.splitn(2, '\n').nth(1).unwrap().to_string();
        std::fs::write(&path, without_version).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("version line"), "{err}");
    }

    #[test]
    fn duplicate_ids_name_the_offending_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        let mut text = std::fs::read_to_string(&path).unwrap();
        text.push_str("s00_i0,s00,s00_i0.pgm,gallery\n");
        std::fs::write(&path, text).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("duplicate image_id"), "{err}");
        assert!(err.contains("line 9"), "{err}"); // version + header + 6 rows + 1
    }

    #[test]
    fn missing_image_files_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        std::fs::remove_file(dir.path().join("s01_i1.pgm")).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("s01_i1.pgm"), "{err}");
        assert!(err.contains("does not exist"), "{err}");
    }

    #[test]
    fn unknown_partition_tags_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        let text = std::fs::read_to_string(&path)
            .unwrap()
            .replace("probe_fb", "probe_xx");
        std::fs::write(&path, text).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("unknown partition tag 'probe_xx'"), "{err}");
    }

    #[test]
    fn empty_manifests_are_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("manifest.csv");
        std::fs::write(
            &path,
            format!(
                "{MANIFEST_VERSION_LINE}\nimage_id,subject_id,image_path,partition\n"
            ),
        )
        .unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("no entries"), "{err}");
    }

    #[test]
    fn missing_eye_annotations_are_filled_with_the_located_mean() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        // Drop the annotation for one image.
        let eyes_path = dir.path().join(EYES_SIDECAR);
        let kept: Vec<String> = std::fs::read_to_string(&eyes_path)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with("s00_i0,"))
            .map(str::to_string)
            .collect();
        std::fs::write(&eyes_path, kept.join("\n") + "\n").unwrap();

        let manifest = ingest(&path).unwrap();
        assert_eq!(manifest.fill_report().len(), 1);
        assert!(manifest.fill_report()[0].contains("s00_i0"), "{:?}", manifest.fill_report());
        let filled = manifest.get("s00_i0").unwrap();
        assert!(filled.eyes_filled);
        let located: Vec<&DatasetEntry> = manifest
            .entries()
            .iter()
            .filter(|e| !e.eyes_filled)
            .collect();
        let mean_lx =
            located.iter().map(|e| e.eyes.left.0).sum::<f64>() / located.len() as f64;
        assert!((filled.eyes.left.0 - mean_lx).abs() <= 1e-12);
    }

    #[test]
    fn degenerate_annotations_fall_back_to_the_mean() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        let eyes_path = dir.path().join(EYES_SIDECAR);
        let text: Vec<String> = std::fs::read_to_string(&eyes_path)
            .unwrap()
            .lines()
            .map(|l| {
                if l.starts_with("s01_i0,") {
                    "s01_i0,50,50,49,50".to_string()
                } else {
                    l.to_string()
                }
            })
            .collect();
        std::fs::write(&eyes_path, text.join("\n") + "\n").unwrap();
        let manifest = ingest(&path).unwrap();
        let entry = manifest.get("s01_i0").unwrap();
        assert!(entry.eyes_filled);
        assert!(manifest.fill_report()[0].contains("degenerate"));
    }

    #[test]
    fn entirely_missing_sidecar_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        std::fs::remove_file(dir.path().join(EYES_SIDECAR)).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("no usable eye coordinates"), "{err}");
    }

    #[test]
    fn malformed_eye_rows_name_their_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = synth_dataset(dir.path());
        let eyes_path = dir.path().join(EYES_SIDECAR);
        let mut text = std::fs::read_to_string(&eyes_path).unwrap();
        text.push_str("extra,1,2,three,4\n");
        std::fs::write(&eyes_path, text).unwrap();
        let err = ingest(&path).unwrap_err().to_string();
        assert!(err.contains("non-numeric coordinate 'three'"), "{err}");
        assert!(err.contains("line 8"), "{err}"); // header + 6 rows + 1
    }
}
