//! Discovery of Middlebury-layout scene folders.
//!
//! A scene folder holds `im0` and `im1` (as `.pgm`, `.ppm` or `.pnm`),
//! `disp0GT.pfm` and `calib.txt`. PNG sources must be converted first.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

const IMAGE_EXTENSIONS: [&str; 3] = ["pgm", "ppm", "pnm"];

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SceneFiles {
    pub name: String,
    pub left: PathBuf,
    pub right: PathBuf,
    pub ground_truth: PathBuf,
    pub calib: PathBuf,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IncompleteScene {
    pub name: String,
    pub missing: Vec<&'static str>,
}

fn find_image(dir: &Path, stem: &str) -> Option<PathBuf> {
    IMAGE_EXTENSIONS
        .iter()
        .map(|ext| dir.join(format!("{stem}.{ext}")))
        .find(|p| p.is_file())
}

/// Inspects one folder and reports which required files are missing.
pub fn scene_in(dir: &Path) -> Result<SceneFiles, IncompleteScene> {
    let name = dir
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let left = find_image(dir, "im0");
    let right = find_image(dir, "im1");
    let gt = Some(dir.join("disp0GT.pfm")).filter(|p| p.is_file());
    let calib = Some(dir.join("calib.txt")).filter(|p| p.is_file());
    match (left, right, gt, calib) {
        (Some(left), Some(right), Some(ground_truth), Some(calib)) => Ok(SceneFiles {
            name,
            left,
            right,
            ground_truth,
            calib,
        }),
        (l, r, g, c) => {
            let missing = [
                (l.is_none(), "im0"),
                (r.is_none(), "im1"),
                (g.is_none(), "disp0GT.pfm"),
                (c.is_none(), "calib.txt"),
            ]
            .into_iter()
            .filter_map(|(gone, what)| gone.then_some(what))
            .collect();
            Err(IncompleteScene { name, missing })
        }
    }
}

/// Complete and incomplete scenes among the sub-folders of `root`, sorted by name.
pub fn discover_scenes(root: &Path) -> io::Result<(Vec<SceneFiles>, Vec<IncompleteScene>)> {
    let mut dirs: Vec<PathBuf> = fs::read_dir(root)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    dirs.sort();
    let mut complete = Vec::new();
    let mut incomplete = Vec::new();
    for dir in dirs {
        match scene_in(&dir) {
            Ok(s) => complete.push(s),
            Err(e) => incomplete.push(e),
        }
    }
    Ok((complete, incomplete))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_complete_and_incomplete() {
        let root = tempfile::tempdir().unwrap();
        let a = root.path().join("Adirondack");
        let b = root.path().join("Broken");
        fs::create_dir_all(&a).unwrap();
        fs::create_dir_all(&b).unwrap();
        for f in ["im0.ppm", "im1.pgm", "disp0GT.pfm", "calib.txt"] {
            fs::write(a.join(f), b"").unwrap();
        }
        fs::write(b.join("im0.pgm"), b"").unwrap();
        fs::write(root.path().join("stray.txt"), b"").unwrap();

        let (ok, bad) = discover_scenes(root.path()).unwrap();
        assert_eq!(ok.len(), 1);
        assert_eq!(ok[0].name, "Adirondack");
        assert!(ok[0].left.ends_with("im0.ppm"));
        assert_eq!(bad.len(), 1);
        assert_eq!(bad[0].missing, vec!["im1", "disp0GT.pfm", "calib.txt"]);
    }
}
