//! ESRI shapefile output (`.shp`, `.shx`, `.dbf`, `.prj`) for polygon records,
//! plus a reader for the same subset.
//!
//! Layout notes: the main-file header stores the file code and length
//! big-endian and everything else little-endian; record headers are
//! big-endian; lengths count 16-bit words.

use std::ffi::OsString;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use byteorder::{BigEndian, LittleEndian, ReadBytesExt, WriteBytesExt};

use super::record::{Category, CrosswalkRecord};
use crate::error::{Error, Result};
use crate::obb::Point;

const FILE_CODE: i32 = 9994;
const VERSION: i32 = 1000;
const SHAPE_POLYGON: i32 = 5;
const HEADER_LEN: usize = 100;
/// shape type + bbox + numParts + numPoints + one part index + five points
const POLYGON_CONTENT_LEN: usize = 4 + 32 + 4 + 4 + 4 + 5 * 16;

struct DbfField {
    name: &'static str,
    kind: u8,
    width: usize,
    decimals: usize,
}

const DBF_FIELDS: [DbfField; 4] = [
    DbfField { name: "CATEGORY", kind: b'C', width: 12, decimals: 0 },
    DbfField { name: "CLASS", kind: b'N', width: 4, decimals: 0 },
    DbfField { name: "SCORE", kind: b'N', width: 8, decimals: 4 },
    DbfField { name: "AREA_M2", kind: b'N', width: 12, decimals: 3 },
];
/// Fixed last-update stamp (1970-01-01) so repeated exports are byte-identical.
const DBF_DATE: [u8; 3] = [70, 1, 1];

/// Attributes and ring of one polygon as read back from disk.
#[derive(Debug, Clone, PartialEq)]
pub struct ShapefileRecord {
    /// Closed ring in file order.
    pub ring: Vec<Point>,
    pub category: Category,
    pub class_id: u32,
    pub score: f64,
    pub area_m2: f64,
}

/// In-memory contents of the four sidecar files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShapefileBytes {
    pub shp: Vec<u8>,
    pub shx: Vec<u8>,
    pub dbf: Vec<u8>,
    pub prj: Vec<u8>,
}

/// `stem` with `ext` appended (keeps any dots already in the stem).
pub fn sidecar_path(stem: &Path, ext: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(".");
    s.push(ext);
    PathBuf::from(s)
}

fn bbox(points: impl IntoIterator<Item = Point>) -> [f64; 4] {
    points.into_iter().fold(
        [f64::INFINITY, f64::INFINITY, f64::NEG_INFINITY, f64::NEG_INFINITY],
        |b, p| [b[0].min(p.x), b[1].min(p.y), b[2].max(p.x), b[3].max(p.y)],
    )
}

fn write_header(out: &mut Vec<u8>, file_len_bytes: usize, extent: [f64; 4]) {
    out.write_i32::<BigEndian>(FILE_CODE).unwrap();
    for _ in 0..5 {
        out.write_i32::<BigEndian>(0).unwrap();
    }
    out.write_i32::<BigEndian>((file_len_bytes / 2) as i32).unwrap();
    out.write_i32::<LittleEndian>(VERSION).unwrap();
    out.write_i32::<LittleEndian>(SHAPE_POLYGON).unwrap();
    for v in extent {
        out.write_f64::<LittleEndian>(v).unwrap();
    }
    // z and m ranges are unused for 2-D polygons
    for _ in 0..4 {
        out.write_f64::<LittleEndian>(0.0).unwrap();
    }
}

fn format_numeric(value: f64, field: &DbfField) -> Result<String> {
    let text = format!("{:>width$.prec$}", value, width = field.width, prec = field.decimals);
    if text.len() > field.width || !value.is_finite() {
        return Err(Error::Validation(format!(
            "{} value {value} does not fit a {}.{} numeric field",
            field.name, field.width, field.decimals
        )));
    }
    Ok(text)
}

fn dbf_bytes(records: &[CrosswalkRecord]) -> Result<Vec<u8>> {
    let header_len = 32 + 32 * DBF_FIELDS.len() + 1;
    let record_len = 1 + DBF_FIELDS.iter().map(|f| f.width).sum::<usize>();
    let mut out = Vec::with_capacity(header_len + record_len * records.len() + 1);
    out.push(0x03);
    out.extend_from_slice(&DBF_DATE);
    out.write_u32::<LittleEndian>(records.len() as u32).unwrap();
    out.write_u16::<LittleEndian>(header_len as u16).unwrap();
    out.write_u16::<LittleEndian>(record_len as u16).unwrap();
    out.extend_from_slice(&[0u8; 20]);
    for f in &DBF_FIELDS {
        let mut name = [0u8; 11];
        name[..f.name.len()].copy_from_slice(f.name.as_bytes());
        out.extend_from_slice(&name);
        out.push(f.kind);
        out.extend_from_slice(&[0u8; 4]);
        out.push(f.width as u8);
        out.push(f.decimals as u8);
        out.extend_from_slice(&[0u8; 14]);
    }
    out.push(0x0D);
    for r in records {
        out.push(b' ');
        out.extend_from_slice(format!("{:<12}", r.category.as_str()).as_bytes());
        out.extend_from_slice(format_numeric(r.class.id() as f64, &DBF_FIELDS[1])?.as_bytes());
        out.extend_from_slice(format_numeric(r.score, &DBF_FIELDS[2])?.as_bytes());
        out.extend_from_slice(format_numeric(r.area_m2, &DBF_FIELDS[3])?.as_bytes());
    }
    out.push(0x1A);
    Ok(out)
}

/// Encodes the four sidecar files without touching the filesystem.
pub fn shapefile_bytes(records: &[CrosswalkRecord], crs_wkt: &str) -> Result<ShapefileBytes> {
    let rings: Vec<[Point; 5]> = records.iter().map(CrosswalkRecord::clockwise_ring).collect();
    if rings.iter().flatten().any(|p| !p.x.is_finite() || !p.y.is_finite()) {
        return Err(Error::Validation("record polygon has non-finite vertices".into()));
    }
    let extent = if rings.is_empty() {
        [0.0; 4]
    } else {
        bbox(rings.iter().flatten().copied())
    };

    let record_len = 8 + POLYGON_CONTENT_LEN;
    let shp_len = HEADER_LEN + record_len * records.len();
    let shx_len = HEADER_LEN + 8 * records.len();
    let mut shp = Vec::with_capacity(shp_len);
    let mut shx = Vec::with_capacity(shx_len);
    write_header(&mut shp, shp_len, extent);
    write_header(&mut shx, shx_len, extent);

    for (i, ring) in rings.iter().enumerate() {
        let offset_words = (shp.len() / 2) as i32;
        shx.write_i32::<BigEndian>(offset_words).unwrap();
        shx.write_i32::<BigEndian>((POLYGON_CONTENT_LEN / 2) as i32).unwrap();

        shp.write_i32::<BigEndian>(i as i32 + 1).unwrap();
        shp.write_i32::<BigEndian>((POLYGON_CONTENT_LEN / 2) as i32).unwrap();
        shp.write_i32::<LittleEndian>(SHAPE_POLYGON).unwrap();
        for v in bbox(ring.iter().copied()) {
            shp.write_f64::<LittleEndian>(v).unwrap();
        }
        shp.write_i32::<LittleEndian>(1).unwrap();
        shp.write_i32::<LittleEndian>(ring.len() as i32).unwrap();
        shp.write_i32::<LittleEndian>(0).unwrap();
        for p in ring {
            shp.write_f64::<LittleEndian>(p.x).unwrap();
            shp.write_f64::<LittleEndian>(p.y).unwrap();
        }
    }
    debug_assert_eq!(shp.len(), shp_len);

    Ok(ShapefileBytes {
        shp,
        shx,
        dbf: dbf_bytes(records)?,
        prj: crs_wkt.as_bytes().to_vec(),
    })
}

/// Writes `<stem>.shp`, `.shx`, `.dbf` and `.prj`.
pub fn write_shapefile(records: &[CrosswalkRecord], stem: impl AsRef<Path>, crs_wkt: &str) -> Result<()> {
    let stem = stem.as_ref();
    let bytes = shapefile_bytes(records, crs_wkt)?;
    for (ext, data) in [("shp", &bytes.shp), ("shx", &bytes.shx), ("dbf", &bytes.dbf), ("prj", &bytes.prj)] {
        let path = sidecar_path(stem, ext);
        std::fs::write(&path, data).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}

fn corrupt(what: impl Into<String>) -> Error {
    Error::Validation(format!("malformed shapefile: {}", what.into()))
}

fn read_shp(bytes: &[u8]) -> Result<Vec<Vec<Point>>> {
    let trunc = |_| corrupt("truncated");
    let mut cur = Cursor::new(bytes);
    if cur.read_i32::<BigEndian>().map_err(trunc)? != FILE_CODE {
        return Err(corrupt("bad file code"));
    }
    cur.set_position(24);
    let declared = cur.read_i32::<BigEndian>().map_err(trunc)? as usize * 2;
    if declared != bytes.len() {
        return Err(corrupt(format!("declared length {declared} but file has {} bytes", bytes.len())));
    }
    if cur.read_i32::<LittleEndian>().map_err(trunc)? != VERSION {
        return Err(corrupt("bad version"));
    }
    if cur.read_i32::<LittleEndian>().map_err(trunc)? != SHAPE_POLYGON {
        return Err(corrupt("not a polygon shapefile"));
    }
    cur.set_position(HEADER_LEN as u64);
    let mut rings = Vec::new();
    while (cur.position() as usize) < bytes.len() {
        let number = cur.read_i32::<BigEndian>().map_err(trunc)?;
        if number as usize != rings.len() + 1 {
            return Err(corrupt(format!("record number {number} out of sequence")));
        }
        let content_len = cur.read_i32::<BigEndian>().map_err(trunc)? as usize * 2;
        let start = cur.position() as usize;
        if cur.read_i32::<LittleEndian>().map_err(trunc)? != SHAPE_POLYGON {
            return Err(corrupt("record is not a polygon"));
        }
        cur.set_position(cur.position() + 32);
        let parts = cur.read_i32::<LittleEndian>().map_err(trunc)?;
        let npoints = cur.read_i32::<LittleEndian>().map_err(trunc)?;
        if parts != 1 || npoints < 4 {
            return Err(corrupt(format!("unsupported polygon with {parts} parts / {npoints} points")));
        }
        cur.set_position(cur.position() + 4 * parts as u64);
        let mut ring = Vec::with_capacity(npoints as usize);
        for _ in 0..npoints {
            let x = cur.read_f64::<LittleEndian>().map_err(trunc)?;
            let y = cur.read_f64::<LittleEndian>().map_err(trunc)?;
            ring.push(Point::new(x, y));
        }
        if cur.position() as usize - start != content_len {
            return Err(corrupt("record content length mismatch"));
        }
        rings.push(ring);
    }
    Ok(rings)
}

fn read_dbf(bytes: &[u8]) -> Result<Vec<(Category, u32, f64, f64)>> {
    let trunc = |_| corrupt("truncated dbf");
    let mut cur = Cursor::new(bytes);
    cur.set_position(4);
    let count = cur.read_u32::<LittleEndian>().map_err(trunc)? as usize;
    let header_len = cur.read_u16::<LittleEndian>().map_err(trunc)? as usize;
    let record_len = cur.read_u16::<LittleEndian>().map_err(trunc)? as usize;

    let mut fields = Vec::new();
    let mut pos = 32;
    while pos + 32 <= header_len && bytes[pos] != 0x0D {
        let raw = &bytes[pos..pos + 11];
        let name = String::from_utf8_lossy(&raw[..raw.iter().position(|&b| b == 0).unwrap_or(11)]).into_owned();
        fields.push((name, bytes[pos + 16] as usize));
        pos += 32;
    }
    let mut rows = Vec::with_capacity(count);
    for i in 0..count {
        let start = header_len + i * record_len;
        let mut rec = vec![0u8; record_len];
        cur.set_position(start as u64);
        cur.read_exact(&mut rec).map_err(trunc)?;
        let mut off = 1;
        let (mut cat, mut class, mut score, mut area) = (None, None, None, None);
        for (name, width) in &fields {
            let text = String::from_utf8_lossy(&rec[off..off + width]).trim().to_string();
            off += width;
            let num = || text.parse::<f64>().map_err(|_| corrupt(format!("{name}: bad number {text:?}")));
            match name.as_str() {
                "CATEGORY" => cat = Some(text.parse::<Category>()?),
                "CLASS" => class = Some(num()? as u32),
                "SCORE" => score = Some(num()?),
                "AREA_M2" => area = Some(num()?),
                _ => {}
            }
        }
        match (cat, class, score, area) {
            (Some(c), Some(k), Some(s), Some(a)) => rows.push((c, k, s, a)),
            _ => return Err(corrupt("dbf is missing expected fields")),
        }
    }
    Ok(rows)
}

/// Reads back a polygon shapefile written by [`write_shapefile`].
pub fn read_shapefile(stem: impl AsRef<Path>) -> Result<Vec<ShapefileRecord>> {
    let stem = stem.as_ref();
    let load = |ext: &str| {
        let path = sidecar_path(stem, ext);
        std::fs::read(&path).map_err(|e| Error::io(&path, e))
    };
    let rings = read_shp(&load("shp")?)?;
    let attrs = read_dbf(&load("dbf")?)?;
    if rings.len() != attrs.len() {
        return Err(corrupt(format!("{} shapes but {} attribute rows", rings.len(), attrs.len())));
    }
    Ok(rings
        .into_iter()
        .zip(attrs)
        .map(|(ring, (category, class_id, score, area_m2))| ShapefileRecord {
            ring,
            category,
            class_id,
            score,
            area_m2,
        })
        .collect())
}
