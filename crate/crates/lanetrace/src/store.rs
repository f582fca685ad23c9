//! On-disk formats: deterministic JSON and 16-bit grayscale PNG + sidecar.
//!
//! Every artifact this crate writes is byte-reproducible: re-running the same
//! pipeline with the same inputs must produce identical files. Two rules make
//! that hold:
//!
//! - JSON is emitted with sorted object keys and *fixed* float formatting —
//!   every finite `f64` is printed in scientific notation with 17 significant
//!   digits (`{:.16e}`), which round-trips exactly and never depends on a
//!   shortest-representation search. Negative zero is canonicalized to zero.
//! - Rasters and fields are stored as 16-bit grayscale PNG with pinned
//!   encoder settings, next to a JSON sidecar
//!   `{"height": H, "resolution_m_per_px": R, "width": W}`. Intensities map
//!   `[0, 1] → [0, 65535]`; field values are scaled by 1/10 first so the
//!   full `[0, 10]` range uses the same 16-bit span.
//!
//! Files are written atomically: content goes to a `.tmp` neighbor which is
//! then renamed over the destination.

use std::fs;
use std::io::Cursor;
use std::path::{Path, PathBuf};

use serde_json::Value;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::raster::{DistanceField, IntensityRaster, FIELD_MAX_VALUE};

// ───────────────────────── deterministic JSON ─────────────────────────

/// Serializes a JSON value with sorted keys and fixed float formatting.
///
/// The output ends with a newline. Errors on non-finite numbers — the
/// crate's data types never contain NaN or infinities, so encountering one
/// here is a contract breach by the caller.
pub fn deterministic_json(value: &Value) -> Result<String> {
    let mut out = String::new();
    write_value(&mut out, value)?;
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, value: &Value) -> Result<()> {
    match value {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(i) = n.as_i64() {
                out.push_str(&i.to_string());
            } else if let Some(u) = n.as_u64() {
                out.push_str(&u.to_string());
            } else {
                let f = n.as_f64().expect("serde_json number is i64, u64 or f64");
                out.push_str(&format_f64(f)?);
            }
        }
        Value::String(s) => {
            // serde_json's string escaping is deterministic.
            out.push_str(&serde_json::to_string(s).expect("string serialization is infallible"));
        }
        Value::Array(items) => {
            out.push('[');
            for (i, item) in items.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                write_value(out, item)?;
            }
            out.push(']');
        }
        Value::Object(map) => {
            // serde_json's default map is a BTreeMap: keys iterate sorted.
            out.push('{');
            for (i, (k, v)) in map.iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                out.push_str(&serde_json::to_string(k).expect("key serialization is infallible"));
                out.push(':');
                write_value(out, v)?;
            }
            out.push('}');
        }
    }
    Ok(())
}

/// Fixed-width float rendering: 17 significant digits, scientific notation.
pub fn format_f64(value: f64) -> Result<String> {
    if !value.is_finite() {
        return Err(Error::domain(format!("cannot serialize non-finite number {value}")));
    }
    // Canonicalize -0.0 so the sign of zero never leaks into artifacts.
    let v = if value == 0.0 { 0.0 } else { value };
    Ok(format!("{v:.16e}"))
}

/// Writes `bytes` to `path` atomically (tmp file + rename).
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let display = path.display().to_string();
    let tmp: PathBuf = {
        let mut name = path.file_name().map(|n| n.to_os_string()).ok_or_else(|| {
            Error::io(display.clone(), std::io::Error::other("path has no file name"))
        })?;
        name.push(".tmp");
        path.with_file_name(name)
    };
    fs::write(&tmp, bytes).map_err(|e| Error::io(tmp.display().to_string(), e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(display, e))?;
    Ok(())
}

/// Serializes `value` deterministically and writes it atomically.
pub fn write_json_atomic(path: &Path, value: &Value) -> Result<()> {
    let text = deterministic_json(value)?;
    write_atomic(path, text.as_bytes())
}

/// Reads and parses a JSON file.
pub fn read_json(path: &Path) -> Result<Value> {
    let text =
        fs::read_to_string(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    serde_json::from_str(&text).map_err(|e| Error::Format {
        what: "JSON",
        message: format!("{}: {e}", path.display()),
    })
}

// ───────────────────────── PNG + sidecar storage ─────────────────────────

/// Sidecar path for a PNG: same stem, `.json` extension.
pub fn sidecar_path(png_path: &Path) -> PathBuf {
    png_path.with_extension("json")
}

fn write_sidecar(png_path: &Path, width: usize, height: usize, resolution: f64) -> Result<()> {
    let sidecar = serde_json::json!({
        "height": height,
        "resolution_m_per_px": resolution,
        "width": width,
    });
    write_json_atomic(&sidecar_path(png_path), &sidecar)
}

/// Reads a sidecar, returning `(width, height, resolution_m_per_px)`.
fn read_sidecar(png_path: &Path) -> Result<(usize, usize, f64)> {
    let path = sidecar_path(png_path);
    let value = read_json(&path)?;
    let get = |key: &str| -> Result<&Value> {
        value.get(key).ok_or_else(|| Error::Format {
            what: "raster sidecar",
            message: format!("{}: missing key {key:?}", path.display()),
        })
    };
    let width = get("width")?.as_u64().unwrap_or(0) as usize;
    let height = get("height")?.as_u64().unwrap_or(0) as usize;
    let resolution = get("resolution_m_per_px")?.as_f64().unwrap_or(0.0);
    if width == 0 || height == 0 || !(resolution > 0.0) {
        return Err(Error::Format {
            what: "raster sidecar",
            message: format!("{}: non-positive dimensions or resolution", path.display()),
        });
    }
    Ok((width, height, resolution))
}

fn encode_png16(grid: &Grid<f64>, scale: f64) -> Result<Vec<u8>> {
    let (w, h) = (grid.width() as u32, grid.height() as u32);
    let mut img = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::new(w, h);
    for (x, y, v) in grid.iter_cells() {
        let q = (v * scale * 65535.0).round().clamp(0.0, 65535.0) as u16;
        img.put_pixel(x as u32, y as u32, image::Luma([q]));
    }
    let mut bytes = Vec::new();
    image::DynamicImage::ImageLuma16(img)
        .write_to(&mut Cursor::new(&mut bytes), image::ImageFormat::Png)
        .map_err(|e| Error::Format { what: "PNG", message: e.to_string() })?;
    Ok(bytes)
}

fn decode_png16(path: &Path, scale: f64) -> Result<Grid<f64>> {
    let bytes = fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))?;
    let img = image::load_from_memory(&bytes)
        .map_err(|e| Error::Format {
            what: "PNG",
            message: format!("{}: {e}", path.display()),
        })?
        .to_luma16();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let mut grid = Grid::filled(w, h, 0.0);
    for (x, y, px) in img.enumerate_pixels() {
        *grid.get_mut(x as usize, y as usize) = px.0[0] as f64 / 65535.0 / scale;
    }
    Ok(grid)
}

/// Writes an intensity raster as 16-bit gray PNG plus its sidecar.
pub fn write_intensity_raster(png_path: &Path, raster: &IntensityRaster) -> Result<()> {
    let bytes = encode_png16(raster.grid(), 1.0)?;
    write_atomic(png_path, &bytes)?;
    write_sidecar(png_path, raster.width(), raster.height(), raster.resolution_m_per_px())
}

/// Reads an intensity raster written by [`write_intensity_raster`].
pub fn read_intensity_raster(png_path: &Path) -> Result<IntensityRaster> {
    let (w, h, resolution) = read_sidecar(png_path)?;
    let grid = decode_png16(png_path, 1.0)?;
    if grid.width() != w || grid.height() != h {
        return Err(Error::Format {
            what: "raster sidecar",
            message: format!(
                "{}: sidecar says {w}x{h}, PNG is {}x{}",
                png_path.display(),
                grid.width(),
                grid.height()
            ),
        });
    }
    IntensityRaster::new(grid, resolution)
}

/// Writes a distance field as 16-bit gray PNG (values scaled by 1/10) plus
/// its sidecar.
pub fn write_distance_field(
    png_path: &Path,
    field: &DistanceField,
    resolution_m_per_px: f64,
) -> Result<()> {
    let bytes = encode_png16(field.grid(), 1.0 / FIELD_MAX_VALUE)?;
    write_atomic(png_path, &bytes)?;
    write_sidecar(png_path, field.width(), field.height(), resolution_m_per_px)
}

/// Reads a distance field written by [`write_distance_field`], returning the
/// field and the sidecar resolution.
pub fn read_distance_field(png_path: &Path) -> Result<(DistanceField, f64)> {
    let (w, h, resolution) = read_sidecar(png_path)?;
    let grid = decode_png16(png_path, 1.0 / FIELD_MAX_VALUE)?;
    if grid.width() != w || grid.height() != h {
        return Err(Error::Format {
            what: "raster sidecar",
            message: format!(
                "{}: sidecar says {w}x{h}, PNG is {}x{}",
                png_path.display(),
                grid.width(),
                grid.height()
            ),
        });
    }
    Ok((DistanceField::new(grid)?, resolution))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn json_output_is_sorted_and_fixed_width() {
        let value = json!({
            "zeta": 1,
            "alpha": {"b": 0.05, "a": [1.0, -0.0, 1500.0]},
            "name": "lane \"A\"",
        });
        let text = deterministic_json(&value).unwrap();
        assert_eq!(
            text,
            "{\"alpha\":{\"a\":[1.0000000000000000e0,0.0000000000000000e0,\
             1.5000000000000000e3],\"b\":5.0000000000000003e-2},\
             \"name\":\"lane \\\"A\\\"\",\"zeta\":1}\n"
        );
        // Integers stay integers; floats round-trip exactly.
        let back: Value = serde_json::from_str(&text).unwrap();
        assert_eq!(back["alpha"]["b"].as_f64().unwrap(), 0.05);
        assert_eq!(back["zeta"].as_i64().unwrap(), 1);
    }

    #[test]
    fn non_finite_numbers_are_rejected() {
        assert!(format_f64(f64::NAN).is_err());
        assert!(format_f64(f64::INFINITY).is_err());
    }

    #[test]
    fn seventeen_digits_round_trip_exactly() {
        for &v in &[0.1, 1.0 / 3.0, std::f64::consts::PI, 1e-300, 123456789.123456789] {
            let text = format_f64(v).unwrap();
            let back: f64 = text.parse().unwrap();
            assert_eq!(back, v, "{text}");
        }
    }

    #[test]
    fn intensity_raster_round_trips_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let png = dir.path().join("raster.png");
        let mut grid = Grid::filled(33, 17, 0.0);
        for (i, v) in grid.raw_mut().iter_mut().enumerate() {
            *v = (i as f64 * 0.137).fract();
        }
        let raster = IntensityRaster::new(grid, 0.05).unwrap();
        write_intensity_raster(&png, &raster).unwrap();
        assert!(sidecar_path(&png).exists());

        let back = read_intensity_raster(&png).unwrap();
        assert_eq!(back.width(), 33);
        assert_eq!(back.height(), 17);
        assert_eq!(back.resolution_m_per_px(), 0.05);
        for (a, b) in back.grid().raw().iter().zip(raster.grid().raw()) {
            assert!((a - b).abs() <= 0.5 / 65535.0 + 1e-12);
        }
    }

    #[test]
    fn distance_field_round_trips_within_quantization() {
        let dir = tempfile::tempdir().unwrap();
        let png = dir.path().join("field.png");
        let mut grid = Grid::filled(9, 9, 0.0);
        for (i, v) in grid.raw_mut().iter_mut().enumerate() {
            *v = (i % 11) as f64; // includes the full 0..10 value range
        }
        let field = DistanceField::new(grid).unwrap();
        write_distance_field(&png, &field, 0.05).unwrap();
        let (back, resolution) = read_distance_field(&png).unwrap();
        assert_eq!(resolution, 0.05);
        for (a, b) in back.grid().raw().iter().zip(field.grid().raw()) {
            assert!((a - b).abs() <= 0.5 * 10.0 / 65535.0 + 1e-12);
        }
    }

    #[test]
    fn sidecar_dimension_mismatch_is_an_error() {
        let dir = tempfile::tempdir().unwrap();
        let png = dir.path().join("raster.png");
        let raster = IntensityRaster::new(Grid::filled(4, 4, 0.5), 0.05).unwrap();
        write_intensity_raster(&png, &raster).unwrap();
        // Corrupt the sidecar's dimensions.
        let lying = serde_json::json!({"height": 9, "resolution_m_per_px": 0.05, "width": 9});
        write_json_atomic(&sidecar_path(&png), &lying).unwrap();
        assert!(read_intensity_raster(&png).is_err());
    }

    #[test]
    fn png_bytes_are_reproducible() {
        let mut grid = Grid::filled(21, 13, 0.0);
        for (i, v) in grid.raw_mut().iter_mut().enumerate() {
            *v = ((i * 7919) % 997) as f64 / 997.0;
        }
        let a = encode_png16(&grid, 1.0).unwrap();
        let b = encode_png16(&grid, 1.0).unwrap();
        assert_eq!(a, b);
    }
}
