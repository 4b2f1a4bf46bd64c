// SPDX-License-Identifier: Apache-2.0

//! Wikipedia language editions to watch.

/// The default watch list: the five editions above a million articles
/// followed by the 37 above a hundred thousand.
pub const DEFAULT_LANGUAGES: [&str; 42] = [
    "en", "nl", "de", "fr", "it", "es", "pl", "ru", "ja", "pt", "zh", "sv", "vi", "uk", "ca", "no", "fi", "cs",
    "fa", "hu", "ko", "ro", "id", "ar", "tr", "sk", "kk", "eo", "da", "sr", "lt", "eu", "ms", "he", "bg", "sl",
    "vo", "hr", "war", "hi", "et", "nn",
];

/// Every edition with a recent-changes channel.
pub const ALL_LANGUAGES: [&str; 284] = [
    "en", "sv", "nl", "de", "fr", "it", "ru", "es", "pl", "war", "ceb", "ja",
    "vi", "pt", "zh", "uk", "ca", "no", "fi", "fa", "cs", "hu", "ko", "ro",
    "ar", "tr", "id", "sk", "kk", "eo", "da", "sr", "lt", "eu", "ms", "he",
    "bg", "sl", "vo", "hr", "min", "et", "hi", "gl", "nn", "az", "simple", "la",
    "el", "th", "sh", "oc", "new", "mk", "ka", "tl", "pms", "be", "ht", "te",
    "ta", "be-x-old", "uz", "lv", "br", "sq", "mg", "cy", "lb", "jv", "mr", "is",
    "bs", "yo", "an", "lmo", "fy", "bpy", "ml", "pnb", "sw", "ur", "bn", "io",
    "af", "gu", "ga", "zh-yue", "scn", "nds", "ne", "ku", "ast", "qu", "su", "cv",
    "sco", "diq", "ba", "tt", "ia", "nap", "bat-smg", "map-bms", "wa", "als", "am", "fo",
    "gd", "bug", "bar", "mn", "hif", "arz", "ckb", "nah", "zh-min-nan", "hy", "sa", "vec",
    "roa-tara", "pa", "os", "yi", "mzn", "hsb", "sah", "li", "se", "mi", "mrj", "pam",
    "bh", "vls", "co", "nds-nl", "frr", "rue", "fiu-vro", "gan", "ilo", "glk", "bo", "kv",
    "csb", "nrm", "zh-classical", "ps", "si", "bcl", "or", "crh", "ace", "myv", "dv", "km",
    "udm", "stq", "sc", "mhr", "ang", "wuu", "koi", "gag", "nv", "so", "lo", "rm",
    "zea", "ext", "frp", "kw", "lad", "mt", "pcd", "hak", "haw", "kl", "szl", "ug",
    "ie", "ky", "gn", "ln", "pag", "mwl", "eml", "lij", "cbk-zam", "tk", "krc", "pfl",
    "ksh", "gv", "vep", "rw", "pdc", "xal", "kbd", "ay", "mdf", "nov", "jbo", "arc",
    "lez", "sn", "to", "bjn", "ltg", "kaa", "ha", "tpi", "srn", "pap", "ig", "om",
    "lbe", "na", "zu", "xh", "za", "kg", "cdo", "pnt", "ty", "chy", "ab", "got",
    "ch", "av", "bxr", "kab", "bi", "st", "ts", "tw", "ss", "ny", "ee", "lg",
    "ve", "fj", "sm", "sd", "iu", "ik", "cu", "tum", "chr", "ak", "bm", "ff",
    "ks", "rmy", "pi", "cr", "dz", "ti", "rn", "sg", "as", "ki", "pih", "tet",
    "dsb", "tn", "wo", "tg", "kn", "my", "ce", "nso", "tyv", "xmf", "ho", "hz",
    "kj", "kr", "ng", "mh", "mus", "aa", "cho", "ii",
];

pub fn default_languages() -> Vec<String> {
    DEFAULT_LANGUAGES.iter().map(|s| s.to_string()).collect()
}

pub fn all_languages() -> Vec<String> {
    ALL_LANGUAGES.iter().map(|s| s.to_string()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn lists_are_distinct_and_nested() {
        let all: HashSet<_> = ALL_LANGUAGES.iter().collect();
        assert_eq!(all.len(), 284);
        let default: HashSet<_> = DEFAULT_LANGUAGES.iter().collect();
        assert_eq!(default.len(), 42);
        assert!(default.is_subset(&all));
        for lang in ALL_LANGUAGES {
            crate::ingest::channel_for_language(lang).unwrap();
        }
    }
}
