use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::obb::OrientedBox;

/// Retained crosswalk marking classes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum CrosswalkClass {
    /// Ladder, continental and zebra markings.
    Striped = 0,
    /// Two parallel transverse lines.
    ParallelLines = 1,
}

impl CrosswalkClass {
    pub const ALL: [CrosswalkClass; 2] = [CrosswalkClass::Striped, CrosswalkClass::ParallelLines];

    pub fn id(self) -> u32 {
        self as u32
    }

    pub fn from_id(id: u32) -> Result<Self> {
        match id {
            0 => Ok(CrosswalkClass::Striped),
            1 => Ok(CrosswalkClass::ParallelLines),
            other => Err(Error::Validation(format!("unknown class id {other}"))),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CrosswalkClass::Striped => "striped",
            CrosswalkClass::ParallelLines => "parallel_lines",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    pub bbox: OrientedBox,
    pub class: CrosswalkClass,
    pub score: f64,
}

impl Detection {
    pub fn new(bbox: OrientedBox, class: CrosswalkClass, score: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&score) {
            return Err(Error::Validation(format!("score {score} outside [0, 1]")));
        }
        Ok(Self { bbox, class, score })
    }

    pub fn translated(&self, dx: f64, dy: f64) -> Self {
        Self { bbox: self.bbox.translated(dx, dy), ..*self }
    }
}

/// One interchange row: `class_id score cx cy w h theta_radians`.
///
/// Values use the shortest representation that parses back to the same
/// `f64`, so rows round-trip losslessly.
impl fmt::Display for Detection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let b = &self.bbox;
        write!(
            f,
            "{} {} {} {} {} {} {}",
            self.class.id(),
            self.score,
            b.cx(),
            b.cy(),
            b.w(),
            b.h(),
            b.theta()
        )
    }
}

pub fn parse_detection_line(line: &str, line_no: usize) -> Result<Detection> {
    let tokens: Vec<&str> = line.split_whitespace().collect();
    if tokens.len() != 7 {
        return Err(Error::parse(line_no, format!("expected 7 fields, found {}", tokens.len())));
    }
    let class_id: u32 = tokens[0]
        .parse()
        .map_err(|_| Error::parse(line_no, format!("bad class id {:?}", tokens[0])))?;
    let mut nums = [0.0f64; 6];
    for (slot, tok) in nums.iter_mut().zip(&tokens[1..]) {
        *slot = tok
            .parse()
            .map_err(|_| Error::parse(line_no, format!("not a number: {tok:?}")))?;
    }
    let [score, cx, cy, w, h, theta] = nums;
    let wrap = |e: Error| Error::parse(line_no, e.to_string());
    let class = CrosswalkClass::from_id(class_id).map_err(wrap)?;
    let bbox = OrientedBox::new(cx, cy, w, h, theta).map_err(wrap)?;
    Detection::new(bbox, class, score).map_err(wrap)
}

/// Parses interchange text; blank lines and `#` comments are skipped.
pub fn parse_detections(text: &str) -> Result<Vec<Detection>> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| {
            let t = l.trim();
            !t.is_empty() && !t.starts_with('#')
        })
        .map(|(i, l)| parse_detection_line(l, i + 1))
        .collect()
}

pub fn format_detections(dets: &[Detection]) -> String {
    let mut out = String::with_capacity(dets.len() * 64);
    for d in dets {
        out.push_str(&d.to_string());
        out.push('\n');
    }
    out
}

pub fn read_detections(path: impl AsRef<Path>) -> Result<Vec<Detection>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_detections(&text)
}

pub fn write_detections(path: impl AsRef<Path>, dets: &[Detection]) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_detections(dets)).map_err(|e| Error::io(path, e))
}

/// Output order for files: score descending, then centre x, then centre y.
pub fn sort_for_output(dets: &mut [Detection]) {
    dets.sort_by(|a, b| {
        b.score
            .total_cmp(&a.score)
            .then(a.bbox.cx().total_cmp(&b.bbox.cx()))
            .then(a.bbox.cy().total_cmp(&b.bbox.cy()))
    });
}
