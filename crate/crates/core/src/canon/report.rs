use std::fmt::Write;

use thiserror::Error;

use crate::mathml::{serialize_node, serialize_pretty, Element, Formula, MathNode};

#[derive(Debug, Clone)]
pub struct ReportEntry {
    pub label: String,
    pub before: Formula,
    pub after: Formula,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReportError {
    #[error("a normalization report needs at least one entry")]
    Empty,
}

const STYLE: &str = "body{font-family:sans-serif;margin:2em;}\
section{border-top:1px solid #ccc;padding:1em 0;}\
.pair{display:flex;gap:2em;}\
.pair>div{flex:1;min-width:0;}\
pre{background:#f6f6f6;padding:.5em;overflow-x:auto;}\
.render{font-size:1.4em;padding:.5em 0;}";

/// Self-contained HTML page showing each formula before and after
/// normalization, as escaped source and as inline MathML.
pub fn generate_report(entries: &[ReportEntry]) -> Result<String, ReportError> {
    if entries.is_empty() {
        return Err(ReportError::Empty);
    }
    let mut html = String::new();
    html.push_str("<!DOCTYPE html>\n<html>\n<head>\n<meta charset=\"utf-8\">\n");
    html.push_str("<title>MathML normalization report</title>\n");
    let _ = writeln!(html, "<style>{STYLE}</style>");
    html.push_str("</head>\n<body>\n<h1>MathML normalization report</h1>\n");
    for (i, entry) in entries.iter().enumerate() {
        let _ = writeln!(html, "<section class=\"entry\" id=\"entry-{i}\">");
        let _ = writeln!(html, "<h2>{}</h2>", escape_html(&entry.label));
        html.push_str("<div class=\"pair\">\n");
        for (class, title, formula) in [
            ("before", "Input", &entry.before),
            ("after", "Normalized", &entry.after),
        ] {
            let _ = writeln!(html, "<div class=\"{class}\">\n<h3>{title}</h3>");
            let _ = writeln!(
                html,
                "<pre><code>{}</code></pre>",
                escape_html(&serialize_pretty(&formula.root))
            );
            let _ = writeln!(html, "<div class=\"render\">{}</div>", inline_math(&formula.root));
            html.push_str("</div>\n");
        }
        html.push_str("</div>\n</section>\n");
    }
    html.push_str("</body>\n</html>\n");
    Ok(html)
}

fn inline_math(root: &MathNode) -> String {
    if root.is(Element::Math) {
        serialize_node(root)
    } else {
        format!("<math>{}</math>", serialize_node(root))
    }
}

fn escape_html(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(c),
        }
    }
    out
}
