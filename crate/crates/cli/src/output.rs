use std::io::{self, Write};
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::CliError;

/// Pretty JSON whose floats carry 17 significant digits, so that every
/// printed value reads back bit-for-bit.
struct FloatFormatter<'a>(PrettyFormatter<'a>);

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            self.0.$name(w $(, $arg)*)
        })*
    };
}

impl Formatter for FloatFormatter<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{value:.16e}")
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        begin_object_value();
        end_object_value();
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, FloatFormatter(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("report serializes");
    String::from_utf8(buf).expect("JSON is UTF-8")
}

pub fn read_text(path: &str) -> Result<String, CliError> {
    if path == "-" {
        let mut s = String::new();
        io::Read::read_to_string(&mut io::stdin(), &mut s).map_err(|e| CliError::input(format!("stdin: {e}")))?;
        return Ok(s);
    }
    std::fs::read_to_string(Path::new(path)).map_err(|e| CliError::input(format!("{path}: {e}")))
}

pub fn read_json<T: DeserializeOwned>(path: &str) -> Result<(T, String), CliError> {
    let text = read_text(path)?;
    let value = serde_json::from_str(&text).map_err(|e| CliError::from(e).in_file(path))?;
    Ok((value, text))
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    let mut text = text.to_string();
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::input(format!("{p}: {e}"))),
        None => {
            let mut out = io::stdout().lock();
            out.write_all(text.as_bytes()).and_then(|_| out.flush()).map_err(|e| CliError::input(format!("stdout: {e}")))
        }
    }
}
