/// Axis-aligned rectangle, half-open `[x0, x1) x [y0, y1)`, meters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub x0: f64,
    pub y0: f64,
    pub x1: f64,
    pub y1: f64,
}

impl Rect {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Rect {
            x0: x0.min(x1),
            y0: y0.min(y1),
            x1: x0.max(x1),
            y1: y0.max(y1),
        }
    }

    pub fn centered(cx: f64, cy: f64, w: f64, h: f64) -> Self {
        Rect::new(cx - w / 2.0, cy - h / 2.0, cx + w / 2.0, cy + h / 2.0)
    }

    pub fn width(&self) -> f64 {
        self.x1 - self.x0
    }

    pub fn height(&self) -> f64 {
        self.y1 - self.y0
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    pub fn center(&self) -> (f64, f64) {
        (0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x0 && x < self.x1 && y >= self.y0 && y < self.y1
    }

    pub fn encloses(&self, other: &Rect, tol: f64) -> bool {
        other.x0 >= self.x0 - tol
            && other.y0 >= self.y0 - tol
            && other.x1 <= self.x1 + tol
            && other.y1 <= self.y1 + tol
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Rect {
        Rect::new(self.x0 + dx, self.y0 + dy, self.x1 + dx, self.y1 + dy)
    }
}

/// Union of `add` rectangles minus the union of `sub` rectangles.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Shape {
    pub add: Vec<Rect>,
    pub sub: Vec<Rect>,
}

impl Shape {
    pub fn rect(r: Rect) -> Self {
        Shape {
            add: vec![r],
            sub: Vec::new(),
        }
    }

    pub fn union(mut self, r: Rect) -> Self {
        self.add.push(r);
        self
    }

    pub fn subtract(mut self, r: Rect) -> Self {
        self.sub.push(r);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty()
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        self.add.iter().any(|r| r.contains(x, y)) && !self.sub.iter().any(|r| r.contains(x, y))
    }

    pub fn bbox(&self) -> Option<Rect> {
        let mut it = self.add.iter();
        let first = *it.next()?;
        Some(it.fold(first, |b, r| {
            Rect::new(
                b.x0.min(r.x0),
                b.y0.min(r.y0),
                b.x1.max(r.x1),
                b.y1.max(r.y1),
            )
        }))
    }

    pub fn translate(&self, dx: f64, dy: f64) -> Shape {
        Shape {
            add: self.add.iter().map(|r| r.translate(dx, dy)).collect(),
            sub: self.sub.iter().map(|r| r.translate(dx, dy)).collect(),
        }
    }

    fn breakpoints(&self) -> (Vec<f64>, Vec<f64>) {
        let mut xs: Vec<f64> = Vec::new();
        let mut ys: Vec<f64> = Vec::new();
        for r in self.add.iter().chain(&self.sub) {
            xs.extend([r.x0, r.x1]);
            ys.extend([r.y0, r.y1]);
        }
        xs.sort_by(f64::total_cmp);
        ys.sort_by(f64::total_cmp);
        xs.dedup();
        ys.dedup();
        (xs, ys)
    }

    /// Exact area by coordinate compression.
    pub fn area(&self) -> f64 {
        self.disjoint_rects().iter().map(Rect::area).sum()
    }

    /// Decomposes the region into disjoint rectangles (deterministic order:
    /// bottom to top, left to right).
    pub fn disjoint_rects(&self) -> Vec<Rect> {
        let (xs, ys) = self.breakpoints();
        if xs.len() < 2 || ys.len() < 2 {
            return Vec::new();
        }
        // Row-wise horizontal runs over the compressed grid.
        let mut rows: Vec<Vec<(usize, usize)>> = Vec::with_capacity(ys.len() - 1);
        for j in 0..ys.len() - 1 {
            let yc = 0.5 * (ys[j] + ys[j + 1]);
            let mut runs = Vec::new();
            let mut i = 0;
            while i < xs.len() - 1 {
                if self.contains(0.5 * (xs[i] + xs[i + 1]), yc) {
                    let start = i;
                    while i < xs.len() - 1 && self.contains(0.5 * (xs[i] + xs[i + 1]), yc) {
                        i += 1;
                    }
                    runs.push((start, i));
                } else {
                    i += 1;
                }
            }
            rows.push(runs);
        }
        // Merge identical runs on consecutive rows.
        let mut out = Vec::new();
        let mut open: Vec<((usize, usize), usize)> = Vec::new();
        for (j, runs) in rows.iter().enumerate() {
            let mut next_open = Vec::new();
            for (run, start_row) in open.drain(..) {
                if runs.contains(&run) {
                    next_open.push((run, start_row));
                } else {
                    out.push(Rect::new(xs[run.0], ys[start_row], xs[run.1], ys[j]));
                }
            }
            for run in runs {
                if !next_open.iter().any(|(r, _)| r == run) {
                    next_open.push((*run, j));
                }
            }
            next_open.sort_by_key(|(r, _)| *r);
            open = next_open;
        }
        let top = ys.len() - 1;
        for (run, start_row) in open {
            out.push(Rect::new(xs[run.0], ys[start_row], xs[run.1], ys[top]));
        }
        out.sort_by(|a, b| a.y0.total_cmp(&b.y0).then(a.x0.total_cmp(&b.x0)));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn area_with_holes_and_overlap() {
        let s = Shape::rect(Rect::new(0.0, 0.0, 4.0, 3.0))
            .union(Rect::new(3.0, 1.0, 6.0, 2.0))
            .subtract(Rect::new(1.0, 1.0, 2.0, 2.0));
        assert!((s.area() - (12.0 + 2.0 - 1.0)).abs() < 1e-12);
        let total: f64 = s.disjoint_rects().iter().map(Rect::area).sum();
        assert!((total - 13.0).abs() < 1e-12);
    }

    #[test]
    fn disjoint_rects_do_not_overlap() {
        let s = Shape::rect(Rect::new(0.0, 0.0, 10.0, 10.0))
            .subtract(Rect::new(2.0, 0.0, 3.0, 4.0))
            .subtract(Rect::new(7.0, 0.0, 8.0, 4.0))
            .union(Rect::new(4.0, -5.0, 6.0, 0.0));
        let rects = s.disjoint_rects();
        for (a, ra) in rects.iter().enumerate() {
            for rb in &rects[a + 1..] {
                let ox = (ra.x1.min(rb.x1) - ra.x0.max(rb.x0)).max(0.0);
                let oy = (ra.y1.min(rb.y1) - ra.y0.max(rb.y0)).max(0.0);
                assert_eq!(ox * oy, 0.0);
            }
        }
        assert!((s.area() - (100.0 - 8.0 + 10.0)).abs() < 1e-12);
    }
}
