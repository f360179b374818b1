//! Gold documents from TimeML markup and the tabulated exchange format.

mod tabulated;
mod timeml;

pub use tabulated::{read_tabulated, read_tabulated_lenient, write_document, write_tabulated, Entity, Row, TabulatedDocument, TabulatedError};
pub use timeml::{read_timeml, to_tabulated, GoldDocument, TimemlError, TimemlOptions};
