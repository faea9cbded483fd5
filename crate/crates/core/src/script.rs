//! Script classification of raw name strings.
//!
//! A name is routed by the mix of Han ideographs and Latin letters it
//! contains. Whitespace, punctuation, digits and symbols are ignored.

use std::fmt;
use std::str::FromStr;

/// Script verdict for one raw name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Script {
    Han,
    Latin,
    Mixed,
    Other,
    Empty,
}

impl Script {
    pub fn as_str(self) -> &'static str {
        match self {
            Script::Han => "Han",
            Script::Latin => "Latin",
            Script::Mixed => "Mixed",
            Script::Other => "Other",
            Script::Empty => "Empty",
        }
    }
}

impl fmt::Display for Script {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Script {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "Han" => Ok(Script::Han),
            "Latin" => Ok(Script::Latin),
            "Mixed" => Ok(Script::Mixed),
            "Other" => Ok(Script::Other),
            "Empty" => Ok(Script::Empty),
            _ => Err(format!("unknown script {s:?}")),
        }
    }
}

/// CJK Unified Ideographs: the base block plus extensions A through I.
const HAN_RANGES: &[(u32, u32)] = &[
    (0x3400, 0x4DBF),   // Extension A
    (0x4E00, 0x9FFF),   // base block
    (0x20000, 0x2A6DF), // Extension B
    (0x2A700, 0x2B73F), // Extension C
    (0x2B740, 0x2B81F), // Extension D
    (0x2B820, 0x2CEAF), // Extension E
    (0x2CEB0, 0x2EBEF), // Extension F
    (0x2EBF0, 0x2EE5F), // Extension I
    (0x30000, 0x3134F), // Extension G
    (0x31350, 0x323AF), // Extension H
];

/// Blocks whose letters belong to the Latin script.
const LATIN_RANGES: &[(u32, u32)] = &[
    (0x0041, 0x005A),
    (0x0061, 0x007A),
    (0x00AA, 0x00AA),
    (0x00BA, 0x00BA),
    (0x00C0, 0x00D6),
    (0x00D8, 0x00F6),
    (0x00F8, 0x024F), // Latin-1 tail, Extended-A, Extended-B
    (0x0250, 0x02AF), // IPA Extensions
    (0x1E00, 0x1EFF), // Latin Extended Additional
    (0x2C60, 0x2C7F), // Latin Extended-C
    (0xA720, 0xA7FF), // Latin Extended-D
    (0xAB30, 0xAB64), // Latin Extended-E letters
    (0xFB00, 0xFB06), // Latin ligatures
    (0xFF21, 0xFF3A), // fullwidth capitals
    (0xFF41, 0xFF5A), // fullwidth small
];

fn in_ranges(c: char, ranges: &[(u32, u32)]) -> bool {
    let cp = c as u32;
    ranges.iter().any(|&(lo, hi)| (lo..=hi).contains(&cp))
}

pub fn is_han(c: char) -> bool {
    in_ranges(c, HAN_RANGES)
}

pub fn is_latin_letter(c: char) -> bool {
    c.is_alphabetic() && in_ranges(c, LATIN_RANGES)
}

/// Classifies `raw_name` by the scripts of the letters it contains.
pub fn detect_script(raw_name: &str) -> Script {
    let mut han = false;
    let mut latin = false;
    let mut other = false;
    for c in raw_name.chars() {
        if is_han(c) {
            han = true;
        } else if is_latin_letter(c) {
            latin = true;
        } else if c.is_alphabetic() {
            other = true;
        }
        if han && latin {
            return Script::Mixed;
        }
    }
    match (han, latin, other) {
        (true, false, _) => Script::Han,
        (false, true, _) => Script::Latin,
        (false, false, true) => Script::Other,
        (false, false, false) => Script::Empty,
        (true, true, _) => Script::Mixed,
    }
}

/// The Han codepoints of `text`, in order, with everything else dropped.
pub fn han_substring(text: &str) -> String {
    text.chars().filter(|&c| is_han(c)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn table_names() {
        assert_eq!(detect_script("赵金标"), Script::Han);
        assert_eq!(detect_script("Alasdair J G Gray"), Script::Latin);
        assert_eq!(detect_script(""), Script::Empty);
        assert_eq!(detect_script("   \t"), Script::Empty);
    }

    #[test]
    fn mixed_by_codepoint_enumeration() {
        // 王 is U+738B (base CJK block); Q, i, n, g are ASCII letters.
        let cps: Vec<u32> = "王 Qing".chars().map(|c| c as u32).collect();
        assert_eq!(cps, vec![0x738B, 0x20, 0x51, 0x69, 0x6E, 0x67]);
        assert!((0x4E00..=0x9FFF).contains(&cps[0]));
        assert_eq!(detect_script("王 Qing"), Script::Mixed);
        assert_eq!(han_substring("王青 (Qing Wang)"), "王青");
    }

    #[test]
    fn punctuation_and_digits_are_ignored() {
        assert_eq!(detect_script("123 - 456."), Script::Empty);
        assert_eq!(detect_script("O'Brien, 3rd"), Script::Latin);
        assert_eq!(detect_script("（王青）"), Script::Han);
    }

    #[test]
    fn accented_and_other_scripts() {
        assert_eq!(detect_script("José Ñúñez"), Script::Latin);
        assert_eq!(detect_script("Đặng Thị"), Script::Latin);
        assert_eq!(detect_script("Jose\u{301}"), Script::Latin);
        assert_eq!(detect_script("Иван"), Script::Other);
        assert_eq!(detect_script("김민준"), Script::Other);
        assert_eq!(detect_script("Иван 李"), Script::Han);
        assert_eq!(detect_script("𠀀"), Script::Han);
    }

    #[test]
    fn pinyin_is_latin() {
        assert_eq!(detect_script("Wang Qing"), Script::Latin);
        assert_eq!(detect_script("Lǚ Bù"), Script::Latin);
    }

    #[test]
    fn display_round_trip() {
        for s in [Script::Han, Script::Latin, Script::Mixed, Script::Other, Script::Empty] {
            assert_eq!(s.as_str().parse::<Script>().unwrap(), s);
        }
    }

    fn han_char() -> impl Strategy<Value = char> {
        prop_oneof![0x4E00u32..=0x9FFF, 0x3400u32..=0x4DBF].prop_map(|c| char::from_u32(c).unwrap())
    }

    proptest! {
        #[test]
        fn han_plus_latin_is_mixed(han in proptest::collection::vec(han_char(), 1..4),
                                   latin in "[A-Za-z]{1,8}") {
            let han: String = han.into_iter().collect();
            prop_assert_eq!(detect_script(&format!("{han}{latin}")), Script::Mixed);
            prop_assert_eq!(detect_script(&format!("{latin} {han}")), Script::Mixed);
        }

        #[test]
        fn noise_never_changes_verdict(name in "\\PC{0,12}", noise in "[ 0-9.,;()\\-]{0,6}") {
            let verdict = detect_script(&name);
            prop_assert_eq!(detect_script(&format!("{noise}{name}{noise}")), verdict);
        }

        #[test]
        fn agrees_with_unicode_script_tables(c in any::<char>()) {
            use unicode_script::{Script as U, UnicodeScript};
            if c.script() == U::Unknown {
                return Ok(());
            }
            if is_han(c) {
                prop_assert_eq!(c.script(), U::Han);
            }
            if is_latin_letter(c) {
                prop_assert_eq!(c.script(), U::Latin);
            }
        }
    }
}
