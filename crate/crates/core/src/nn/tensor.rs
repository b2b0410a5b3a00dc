use crate::error::{Error, Result};

/// Dense `n x c x h x w` tensor stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor4 {
    n: usize,
    c: usize,
    h: usize,
    w: usize,
    data: Vec<f64>,
}

impl Tensor4 {
    pub fn new(shape: [usize; 4], data: Vec<f64>) -> Result<Self> {
        let [n, c, h, w] = shape;
        if shape.iter().any(|&d| d == 0) {
            return Err(Error::Shape(format!("tensor dimensions must be >= 1, got {shape:?}")));
        }
        if data.len() != n * c * h * w {
            return Err(Error::Shape(format!(
                "{shape:?} needs {} values, got {}",
                n * c * h * w,
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("tensor values must be finite".into()));
        }
        Ok(Self { n, c, h, w, data })
    }

    pub fn zeros(shape: [usize; 4]) -> Self {
        Self::filled(shape, 0.0)
    }

    pub fn filled(shape: [usize; 4], value: f64) -> Self {
        let [n, c, h, w] = shape;
        assert!(shape.iter().all(|&d| d > 0), "tensor dimensions must be >= 1");
        Self { n, c, h, w, data: vec![value; n * c * h * w] }
    }

    /// Builds a tensor by evaluating `f(n, c, y, x)` at every position.
    pub fn from_fn(shape: [usize; 4], mut f: impl FnMut(usize, usize, usize, usize) -> f64) -> Self {
        let mut t = Self::zeros(shape);
        for n in 0..t.n {
            for c in 0..t.c {
                for y in 0..t.h {
                    for x in 0..t.w {
                        let i = t.offset(n, c, y, x);
                        t.data[i] = f(n, c, y, x);
                    }
                }
            }
        }
        t
    }

    pub fn shape(&self) -> [usize; 4] {
        [self.n, self.c, self.h, self.w]
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> usize {
        self.c
    }

    pub fn h(&self) -> usize {
        self.h
    }

    pub fn w(&self) -> usize {
        self.w
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    #[inline]
    pub fn offset(&self, n: usize, c: usize, y: usize, x: usize) -> usize {
        ((n * self.c + c) * self.h + y) * self.w + x
    }

    #[inline]
    pub fn get(&self, n: usize, c: usize, y: usize, x: usize) -> f64 {
        self.data[self.offset(n, c, y, x)]
    }

    #[inline]
    pub fn set(&mut self, n: usize, c: usize, y: usize, x: usize, v: f64) {
        let i = self.offset(n, c, y, x);
        self.data[i] = v;
    }

    /// The `h x w` plane for batch item `n`, channel `c`.
    pub fn plane(&self, n: usize, c: usize) -> &[f64] {
        let start = self.offset(n, c, 0, 0);
        &self.data[start..start + self.h * self.w]
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            data: self.data.iter().map(|&v| f(v)).collect(),
            ..*self
        }
    }

    /// Elementwise product where `gate` broadcasts over any of its size-1
    /// dimensions.
    pub fn mul_broadcast(&self, gate: &Tensor4) -> Result<Self> {
        let ok = |a: usize, b: usize| b == a || b == 1;
        if !(ok(self.n, gate.n) && ok(self.c, gate.c) && ok(self.h, gate.h) && ok(self.w, gate.w)) {
            return Err(Error::Shape(format!(
                "cannot broadcast {:?} onto {:?}",
                gate.shape(),
                self.shape()
            )));
        }
        let pick = |i: usize, d: usize| if d == 1 { 0 } else { i };
        Ok(Self::from_fn(self.shape(), |n, c, y, x| {
            self.get(n, c, y, x)
                * gate.get(pick(n, gate.n), pick(c, gate.c), pick(y, gate.h), pick(x, gate.w))
        }))
    }

    /// Channels `[start, end)` as a new tensor.
    pub fn slice_channels(&self, start: usize, end: usize) -> Result<Self> {
        if start >= end || end > self.c {
            return Err(Error::Shape(format!(
                "channel range {start}..{end} invalid for {} channels",
                self.c
            )));
        }
        Ok(Self::from_fn([self.n, end - start, self.h, self.w], |n, c, y, x| {
            self.get(n, c + start, y, x)
        }))
    }

    pub fn max_abs_diff(&self, other: &Tensor4) -> f64 {
        assert_eq!(self.shape(), other.shape());
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}
