use std::fs;
use std::path::{Path, PathBuf};

use super::{LabelMap, SegmentedSample};
use crate::error::{Error, Result};
use crate::imaging::io;

fn png_names(dir: &Path) -> Result<Vec<String>> {
    let mut names = Vec::new();
    for entry in fs::read_dir(dir)? {
        let entry = entry?;
        let path = entry.path();
        if path.is_file() && path.extension().and_then(|e| e.to_str()).is_some_and(|e| e.eq_ignore_ascii_case("png")) {
            if let Some(name) = path.file_name().and_then(|n| n.to_str()) {
                names.push(name.to_owned());
            }
        }
    }
    names.sort();
    Ok(names)
}

/// Loads `(image, mask)` PNG pairs matched by file name, in lexicographic
/// order. Images are RGB; masks are 8-bit label maps.
pub fn load_segmented_samples(image_dir: impl AsRef<Path>, mask_dir: impl AsRef<Path>) -> Result<Vec<SegmentedSample>> {
    let (image_dir, mask_dir) = (image_dir.as_ref(), mask_dir.as_ref());
    let images = png_names(image_dir)?;
    let masks = png_names(mask_dir)?;
    if let Some(orphan) = masks.iter().find(|m| images.binary_search(m).is_err()) {
        return Err(Error::MissingCounterpart(mask_dir.join(orphan)));
    }
    let mut out = Vec::with_capacity(images.len());
    for name in images {
        let image_path: PathBuf = image_dir.join(&name);
        let mask_path: PathBuf = mask_dir.join(&name);
        if !mask_path.exists() {
            return Err(Error::MissingCounterpart(image_path));
        }
        out.push(load_pair(&image_path, &mask_path)?);
    }
    Ok(out)
}

pub(crate) fn load_pair(image_path: &Path, mask_path: &Path) -> Result<SegmentedSample> {
    let mut image = io::load_png(image_path)?;
    if image.channels() == 1 {
        image = crate::imaging::Image::from_fn(image.height(), image.width(), 3, |y, x, _| image.get(y, x, 0))?;
    }
    let (h, w, labels) = io::load_label_mask(mask_path)?;
    if (h, w) != image.dims() {
        return Err(Error::DimensionMismatch {
            image: image_path.to_path_buf(),
            mask: mask_path.to_path_buf(),
        });
    }
    SegmentedSample::new(image, LabelMap::new(h, w, labels)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::Image;

    fn write_pair(dir: &Path, name: &str, h: usize, w: usize, mh: usize, mw: usize, max_label: u8) {
        let img = Image::filled(h, w, 3, 0.5).unwrap();
        io::save_png(&img, dir.join("img").join(name)).unwrap();
        let mut labels = vec![0u8; mh * mw];
        labels[0] = max_label;
        io::save_label_mask(mh, mw, &labels, dir.join("mask").join(name)).unwrap();
    }

    fn dirs() -> tempfile::TempDir {
        let d = tempfile::tempdir().unwrap();
        fs::create_dir(d.path().join("img")).unwrap();
        fs::create_dir(d.path().join("mask")).unwrap();
        d
    }

    #[test]
    fn empty_dirs_give_empty_list() {
        let d = dirs();
        assert!(load_segmented_samples(d.path().join("img"), d.path().join("mask")).unwrap().is_empty());
    }

    #[test]
    fn pairs_in_lexicographic_order() {
        let d = dirs();
        write_pair(d.path(), "c.png", 3, 3, 3, 3, 1);
        write_pair(d.path(), "a.png", 4, 4, 4, 4, 2);
        write_pair(d.path(), "b.png", 5, 5, 5, 5, 4);
        let s = load_segmented_samples(d.path().join("img"), d.path().join("mask")).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s[0].image.dims(), (4, 4));
        assert_eq!(s[1].object_count(), 4);
        assert_eq!(s[2].image.dims(), (3, 3));
    }

    #[test]
    fn dimension_mismatch_names_the_file() {
        let d = dirs();
        write_pair(d.path(), "x.png", 4, 4, 4, 5, 1);
        let err = load_segmented_samples(d.path().join("img"), d.path().join("mask")).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { .. }));
        assert!(err.to_string().contains("x.png"));
    }

    #[test]
    fn missing_mask_is_reported() {
        let d = dirs();
        write_pair(d.path(), "x.png", 4, 4, 4, 4, 1);
        fs::remove_file(d.path().join("mask").join("x.png")).unwrap();
        assert!(matches!(
            load_segmented_samples(d.path().join("img"), d.path().join("mask")),
            Err(Error::MissingCounterpart(_))
        ));
    }

    #[test]
    fn unreadable_png_is_reported() {
        let d = dirs();
        fs::write(d.path().join("img").join("x.png"), b"not a png").unwrap();
        fs::write(d.path().join("mask").join("x.png"), b"not a png").unwrap();
        assert!(matches!(
            load_segmented_samples(d.path().join("img"), d.path().join("mask")),
            Err(Error::Decode { .. })
        ));
    }
}
