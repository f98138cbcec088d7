use std::path::Path;

const EXTENSIONS: &[(&str, &str)] = &[
    ("py", "python"),
    ("go", "go"),
    ("rs", "rust"),
    ("ts", "typescript"),
    ("tsx", "typescript"),
    ("js", "javascript"),
    ("jsx", "javascript"),
    ("java", "java"),
    ("c", "c"),
    ("h", "c"),
    ("cpp", "cpp"),
    ("hpp", "cpp"),
    ("cc", "cpp"),
    ("rb", "ruby"),
    ("md", "markdown"),
    ("json", "json"),
    ("yaml", "yaml"),
    ("yml", "yaml"),
    ("tex", "tex"),
];

/// Extra names accepted for a language besides its canonical id.
const ALIASES: &[(&str, &str)] = &[
    ("golang", "go"),
    ("c++", "cpp"),
    ("cxx", "cpp"),
    ("ts", "typescript"),
    ("js", "javascript"),
    ("py", "python"),
    ("rb", "ruby"),
    ("yml", "yaml"),
    ("latex", "tex"),
];

pub const UNKNOWN_LANGUAGE: &str = "unknown";

/// Maps a file path to a canonical language id by extension.
pub fn detect_language(path: &str) -> &'static str {
    Path::new(path)
        .extension()
        .and_then(|e| e.to_str())
        .and_then(|ext| {
            EXTENSIONS
                .iter()
                .find(|(e, _)| e.eq_ignore_ascii_case(ext))
                .map(|&(_, lang)| lang)
        })
        .unwrap_or(UNKNOWN_LANGUAGE)
}

/// Resolves a language name or alias, case-insensitively.
pub fn resolve_language(name: &str) -> Option<&'static str> {
    let lower = name.to_ascii_lowercase();
    EXTENSIONS
        .iter()
        .map(|&(_, lang)| lang)
        .find(|lang| *lang == lower)
        .or_else(|| {
            ALIASES
                .iter()
                .find(|(alias, _)| *alias == lower)
                .map(|&(_, lang)| lang)
        })
}
