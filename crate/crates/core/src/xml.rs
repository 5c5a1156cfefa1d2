use quick_xml::escape::{escape, partial_escape};

/// Minimal indenting XML writer producing deterministic output.
pub(crate) struct XmlWriter {
    buf: String,
    depth: usize,
}

pub(crate) fn escape_text(text: &str) -> std::borrow::Cow<'_, str> {
    partial_escape(text)
}

pub(crate) fn escape_attr(text: &str) -> std::borrow::Cow<'_, str> {
    escape(text)
}

pub(crate) fn start_tag(buf: &mut String, name: &str, attrs: &[(&str, &str)], empty: bool) {
    buf.push('<');
    buf.push_str(name);
    for (k, v) in attrs {
        buf.push(' ');
        buf.push_str(k);
        buf.push_str("=\"");
        buf.push_str(&escape_attr(v));
        buf.push('"');
    }
    buf.push_str(if empty { "/>" } else { ">" });
}

impl XmlWriter {
    pub fn new() -> Self {
        XmlWriter {
            buf: String::new(),
            depth: 0,
        }
    }

    pub fn declaration(mut self) -> Self {
        self.buf.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
        self
    }

    fn pad(&mut self) {
        for _ in 0..self.depth {
            self.buf.push_str("  ");
        }
    }

    pub fn open(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.pad();
        start_tag(&mut self.buf, name, attrs, false);
        self.buf.push('\n');
        self.depth += 1;
    }

    pub fn close(&mut self, name: &str) {
        self.depth -= 1;
        self.pad();
        self.buf.push_str("</");
        self.buf.push_str(name);
        self.buf.push_str(">\n");
    }

    pub fn empty(&mut self, name: &str, attrs: &[(&str, &str)]) {
        self.pad();
        start_tag(&mut self.buf, name, attrs, true);
        self.buf.push('\n');
    }

    pub fn leaf(&mut self, name: &str, attrs: &[(&str, &str)], text: &str) {
        self.pad();
        start_tag(&mut self.buf, name, attrs, false);
        self.buf.push_str(&escape_text(text));
        self.buf.push_str("</");
        self.buf.push_str(name);
        self.buf.push_str(">\n");
    }

    /// Writes pre-rendered markup on its own indented line.
    pub fn raw_line(&mut self, markup: &str) {
        self.pad();
        self.buf.push_str(markup);
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
