//! CSV tables: header row, `\n` line endings, floats via [`float`].

use crate::format::float;

pub struct Table {
    writer: csv::Writer<Vec<u8>>,
}

pub enum Cell {
    F(f64),
    U(u64),
}

impl Table {
    pub fn new(header: &[&str]) -> Self {
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(header).expect("in-memory CSV");
        Table { writer }
    }

    pub fn row(&mut self, cells: &[Cell]) {
        let fields = cells.iter().map(|c| match c {
            Cell::F(x) => float(*x),
            Cell::U(n) => n.to_string(),
        });
        self.writer.write_record(fields).expect("in-memory CSV");
    }

    pub fn finish(self) -> String {
        let bytes = self.writer.into_inner().expect("in-memory CSV");
        String::from_utf8(bytes).expect("CSV is UTF-8")
    }
}
