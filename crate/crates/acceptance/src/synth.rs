// SPDX-License-Identifier: Apache-2.0

//! Synthetic recent-change traffic.

use std::io::{self, Write};

use rand::seq::SliceRandom;
use rand::Rng;
use wikipulse_core::langs::DEFAULT_LANGUAGES;

const WORDS: &[&str] = &[
    "River", "Juniata", "Benoît", "Москва", "東京", "São", "Paulo", "C++", "Rock", "&", "roll", "AC/DC", "(planet)",
    "Don't", "1,000", "Zürich", "Ελλάδα", "der", "la", "of", "Pope", "XVI", "Ünïcödé", "2013", "St.", "O'Brien",
    "Ωmega", "Łódź", "naïve", "Kraków", "العربية", "हिन्दी", "x", "Q", "!", "?", "#1",
];
const EDITORS: &[&str] = &[
    "Johanna-Hypatia", "192.0.2.14", "2001:db8::1", "Ari ka", "Émile", "Quoth-the-raven", "Lamberhurst", "Z", "Ed_1",
    "ÅsaN", "Mr. Smith", "user (talk)",
];
const COMMENT_WORDS: &[&str] = &[
    "/* History */", "fix", "typo", "rv", "*", "(talk)", "[[Link]]", "copyedit", "ref", "→", "added", "see also", "+",
    "-", "1", "Category:Place names",
];
const FLAGS: &[&str] = &["", "", "", "M", "B", "N", "MB", "!", "!N"];

/// A generated payload and the field values it encodes.
#[derive(Clone, Debug)]
pub struct SynthLine {
    pub payload: String,
    pub title: String,
    pub url: String,
    pub diff_rev: Option<u64>,
    pub old_rev: Option<u64>,
    pub editor: String,
    pub delta: i64,
    pub comment: String,
}

fn words(rng: &mut impl Rng, pool: &[&str], min: usize, max: usize) -> Vec<String> {
    let n = rng.gen_range(min..=max);
    (0..n).map(|_| pool.choose(rng).unwrap().to_string()).collect()
}

/// One payload following `[[title]] flags url * editor * (delta) comment`,
/// with no control bytes.
pub fn synth_line(rng: &mut impl Rng, lang: &str) -> SynthLine {
    let title_words = words(rng, WORDS, 1, 4);
    let title = title_words.join(" ");
    let wire_title = if rng.gen_bool(0.3) { title_words.join("_") } else { title.clone() };

    let (url, diff_rev, old_rev) = match rng.gen_range(0..10) {
        0 => (format!("http://{lang}.wikipedia.org/w/index.php?oldid={}&rcid={}", rng.gen_range(1..u32::MAX), rng.gen_range(1..u32::MAX)), None, None),
        1 => (format!("http://{lang}.wikipedia.org/w/index.php?title=X&rcid={}", rng.gen_range(1..u32::MAX)), None, None),
        _ => {
            let old = rng.gen_range(1..1_000_000_000u64);
            let diff = old + rng.gen_range(1..100_000);
            (format!("http://{lang}.wikipedia.org/w/index.php?diff={diff}&oldid={old}"), Some(diff), Some(old))
        }
    };
    // `oldid` without `diff`: the revision is known but there is no diff.
    let old_rev = if url.contains("oldid=") && diff_rev.is_none() {
        url.split("oldid=").nth(1).and_then(|v| v.split('&').next()).and_then(|v| v.parse().ok())
    } else {
        old_rev
    };

    let editor = EDITORS.choose(rng).unwrap().to_string();
    let delta: i64 = if rng.gen_bool(0.1) { 0 } else { rng.gen_range(-50_000..=50_000) };
    let delta_token = match (delta, rng.gen_bool(0.2)) {
        (d, true) if d >= 0 => format!("({d})"),
        (d, _) if d < 0 => format!("({d})"),
        (d, _) => format!("(+{d})"),
    };
    let comment = if rng.gen_bool(0.15) { String::new() } else { words(rng, COMMENT_WORDS, 1, 6).join(" ") };
    let flags = FLAGS.choose(rng).unwrap();

    let mut payload = format!("[[{wire_title}]] ");
    if !flags.is_empty() {
        payload.push_str(flags);
        payload.push(' ');
    }
    payload.push_str(&format!("{url} * {editor} * {delta_token}"));
    if !comment.is_empty() {
        payload.push(' ');
        payload.push_str(&comment);
    }
    SynthLine {
        payload,
        title,
        url,
        diff_rev,
        old_rev,
        editor,
        delta,
        comment,
    }
}

/// Wraps fields in mIRC colour codes the way the live feed does.
pub fn colourize(line: &SynthLine) -> String {
    let c = '\x03';
    line.payload
        .replacen("[[", &format!("{c}14[[{c}07"), 1)
        .replacen("]]", &format!("{c}14]]{c}4"), 1)
        .replacen(" * ", &format!(" {c}5*{c} {c}03"), 1)
        .replacen(" * ", &format!("{c} {c}5*{c} \x02"), 1)
        + "\x0f"
}

/// Writes `count` replay records spread over `languages`, `articles`
/// distinct titles per language, one record every `spacing_ms`.
pub fn write_replay_file(
    out: &mut impl Write,
    rng: &mut impl Rng,
    count: usize,
    articles: usize,
    spacing_ms: u64,
) -> io::Result<()> {
    let mut offset = 0u64;
    for i in 0..count {
        let lang = DEFAULT_LANGUAGES[rng.gen_range(0..DEFAULT_LANGUAGES.len())];
        let article = rng.gen_range(0..articles);
        let old = 1_000_000 + i as u64;
        let delta: i64 = rng.gen_range(-2000..=2000);
        writeln!(
            out,
            "{offset}\t#{lang}.wikipedia\t[[Article {article}]] http://{lang}.wikipedia.org/w/index.php?diff={}&oldid={old} * Editor{} * ({delta:+}) synthetic edit {i}",
            old + 1,
            rng.gen_range(0..5000),
        )?;
        offset += rng.gen_range(0..=2 * spacing_ms);
    }
    Ok(())
}
