//! CSV in the crate's one schema: header row, comma separated, `\n` line ends.

use crate::error::Result;

pub(crate) struct CsvTable {
    w: csv::Writer<Vec<u8>>,
}

impl CsvTable {
    pub fn new<I: IntoIterator<Item = S>, S: AsRef<[u8]>>(header: I) -> Result<Self> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
        w.write_record(header)?;
        Ok(CsvTable { w })
    }

    pub fn row<I: IntoIterator<Item = S>, S: AsRef<[u8]>>(&mut self, fields: I) -> Result<()> {
        Ok(self.w.write_record(fields)?)
    }

    pub fn finish(self) -> Result<String> {
        let bytes = self.w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("fields are UTF-8"))
    }
}
