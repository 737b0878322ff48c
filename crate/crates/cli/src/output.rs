use std::fmt::Write as _;
use std::path::Path;

use qrlab::dynamics::JuliaGrid;

/// One CSV cell. Floats are written with 17 significant digits so that
/// they read back to the same double.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Float(f64),
    Int(i64),
    Text(String),
    Empty,
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Float(v) => format!("{v:.16e}"),
            Cell::Int(v) => v.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as i64)
    }
}

impl From<bool> for Cell {
    fn from(v: bool) -> Self {
        Cell::Text(if v { "true" } else { "false" }.into())
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.into())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(name: &str, headers: &[&str]) -> Self {
        Table {
            name: name.into(),
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    pub fn file_name(&self) -> String {
        format!("{}.csv", self.name)
    }

    pub fn to_bytes(&self) -> std::io::Result<Vec<u8>> {
        if self.rows.is_empty() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidInput,
                format!("table {} has no rows", self.name),
            ));
        }
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row.iter().map(Cell::render))?;
        }
        w.into_inner().map_err(|e| e.into_error())
    }
}

pub fn write_csv(table: &Table, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, table.to_bytes()?)
}

/// `255·min(1, log₁₀(1 + indicator)/log₁₀(1 + threshold))`, rounded half up.
pub fn gray_level(indicator: f64, threshold: f64) -> u8 {
    if indicator.is_nan() {
        return 255;
    }
    let t = ((1.0 + indicator.max(0.0)).log10() / (1.0 + threshold).log10()).min(1.0);
    (255.0 * t + 0.5).floor() as u8
}

pub fn pgm_bytes(grid: &JuliaGrid) -> Vec<u8> {
    let mut s = format!("P2\n{} {}\n255\n", grid.width, grid.height);
    for row in grid.indicators.chunks(grid.width) {
        let line: Vec<String> = row.iter().map(|v| gray_level(*v, grid.threshold).to_string()).collect();
        let _ = writeln!(s, "{}", line.join(" "));
    }
    s.into_bytes()
}

pub fn write_pgm(grid: &JuliaGrid, path: &Path) -> std::io::Result<()> {
    std::fs::write(path, pgm_bytes(grid))
}

#[cfg(test)]
mod tests {
    use super::*;
    use qrlab::dynamics::Window;

    fn grid(indicators: Vec<f64>, threshold: f64) -> JuliaGrid {
        let n = indicators.len();
        JuliaGrid {
            window: Window::planar((-1.0, 1.0), (-1.0, 1.0)),
            width: n,
            height: 1,
            overflow: vec![false; n],
            indicators,
            threshold,
            seed: 0,
        }
    }

    #[test]
    fn gray_mapping_endpoints() {
        assert_eq!(gray_level(0.0, 1e3), 0);
        assert_eq!(gray_level(1e3, 1e3), 255);
        assert_eq!(gray_level(1e9, 1e3), 255);
        assert_eq!(gray_level(f64::INFINITY, 1e3), 255);
        // log10(1 + 9)/log10(1 + 99) = 1/2, and 127.5 rounds up
        assert_eq!(gray_level(9.0, 99.0), 128);
    }

    #[test]
    fn pgm_layout() {
        let bytes = pgm_bytes(&grid(vec![0.0, 0.0, 1e3], 1e3));
        assert_eq!(String::from_utf8(bytes).unwrap(), "P2\n3 1\n255\n0 0 255\n");
    }

    #[test]
    fn csv_uses_seventeen_digits() {
        let mut t = Table::new("t", &["a", "b"]);
        t.push(vec![0.1.into(), 3usize.into()]);
        let text = String::from_utf8(t.to_bytes().unwrap()).unwrap();
        assert_eq!(text, "a,b\n1.0000000000000001e-1,3\n");
        let back: f64 = text.lines().nth(1).unwrap().split(',').next().unwrap().parse().unwrap();
        assert_eq!(back, 0.1);
    }

    #[test]
    fn empty_tables_are_refused() {
        assert!(Table::new("t", &["a"]).to_bytes().is_err());
    }
}
