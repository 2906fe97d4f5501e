//! Number formatting shared by the CSV and JSON writers.

use std::io;

use serde_json::ser::{Formatter, PrettyFormatter};

/// `x` with 17 significant digits, `%.17g` style, but integral values keep a
/// trailing `.0` so they read back as floats. Non-finite values are spelled
/// `NaN`, `inf` and `-inf`.
pub fn float(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf" } else { "-inf" }.into();
    }
    if x == 0.0 {
        return if x.is_sign_negative() { "-0.0" } else { "0.0" }.into();
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..17).contains(&exp) {
        let decimals = (16 - exp).max(0) as usize;
        trim_zeros(format!("{x:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(mut s: String) -> String {
    if !s.contains('.') {
        s.push_str(".0");
        return s;
    }
    while s.ends_with('0') {
        s.pop();
    }
    if s.ends_with('.') {
        s.push('0');
    }
    s
}

/// Pretty JSON with floats written by [`float`].
pub struct JsonFormatter<'a>(PrettyFormatter<'a>);

impl JsonFormatter<'_> {
    pub fn new() -> Self {
        JsonFormatter(PrettyFormatter::with_indent(b"  "))
    }
}

impl Default for JsonFormatter<'_> {
    fn default() -> Self {
        Self::new()
    }
}

impl Formatter for JsonFormatter<'_> {
    fn write_f64<W: ?Sized + io::Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(float(value).as_bytes())
    }

    fn begin_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + io::Write>(
        &mut self,
        w: &mut W,
        first: bool,
    ) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + io::Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_significant_digits() {
        assert_eq!(float(0.1), "0.10000000000000001");
        assert_eq!(float(4.0), "4.0");
        assert_eq!(float(0.0), "0.0");
        assert_eq!(float(-2.5), "-2.5");
        assert_eq!(float(1e-300), "1.0e-300");
        assert_eq!(float(1.0 / 3.0), "0.33333333333333331");
        assert_eq!(float(1.5e20), "1.5e20");
        assert_eq!(float(123456.0), "123456.0");
        assert_eq!(float(f64::INFINITY), "inf");
    }

    #[test]
    fn parses_back_exactly() {
        let mut x = 1.234_567_890_123_456_7e-7;
        for _ in 0..2000 {
            let s = float(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
            x = x * 1.618_033_988_749_895 + 0.000_123;
            if x > 1e200 {
                x = x.sqrt().recip();
            }
        }
    }
}
