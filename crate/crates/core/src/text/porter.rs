//! The Porter (1980) suffix-stripping stemmer.
//!
//! Operates on lowercase ASCII words. Tokens containing anything other than
//! `a-z` (digits, non-ASCII letters) are returned unchanged.

use alloc::string::String;
use alloc::vec::Vec;

pub fn stem(token: &str) -> String {
    if token.len() <= 2 || !token.bytes().all(|c| c.is_ascii_lowercase()) {
        return String::from(token);
    }
    let mut w = token.as_bytes().to_vec();
    step1a(&mut w);
    step1b(&mut w);
    step1c(&mut w);
    step2(&mut w);
    step3(&mut w);
    step4(&mut w);
    step5a(&mut w);
    step5b(&mut w);
    // only ASCII bytes were ever written
    String::from_utf8(w).expect("ascii")
}

fn is_consonant(w: &[u8], i: usize) -> bool {
    match w[i] {
        b'a' | b'e' | b'i' | b'o' | b'u' => false,
        b'y' => i == 0 || !is_consonant(w, i - 1),
        _ => true,
    }
}

/// Number of VC sequences in `[C](VC)^m[V]`.
fn measure(w: &[u8]) -> usize {
    let mut m = 0;
    let mut i = 0;
    let n = w.len();
    while i < n && is_consonant(w, i) {
        i += 1;
    }
    loop {
        while i < n && !is_consonant(w, i) {
            i += 1;
        }
        if i >= n {
            return m;
        }
        while i < n && is_consonant(w, i) {
            i += 1;
        }
        m += 1;
    }
}

fn has_vowel(w: &[u8]) -> bool {
    (0..w.len()).any(|i| !is_consonant(w, i))
}

fn ends_double_consonant(w: &[u8]) -> bool {
    let n = w.len();
    n >= 2 && w[n - 1] == w[n - 2] && is_consonant(w, n - 1)
}

/// `*o`: ends consonant-vowel-consonant, the last not `w`, `x` or `y`.
fn ends_cvc(w: &[u8]) -> bool {
    let n = w.len();
    n >= 3
        && is_consonant(w, n - 3)
        && !is_consonant(w, n - 2)
        && is_consonant(w, n - 1)
        && !matches!(w[n - 1], b'w' | b'x' | b'y')
}

fn stem_of<'a>(w: &'a [u8], suffix: &str) -> Option<&'a [u8]> {
    w.strip_suffix(suffix.as_bytes())
}

fn set_suffix(w: &mut Vec<u8>, old_len: usize, new: &str) {
    let keep = w.len() - old_len;
    w.truncate(keep);
    w.extend_from_slice(new.as_bytes());
}

/// Applies the first rule whose suffix matches, if its stem satisfies `cond`.
/// Rules are ordered so that the longest matching suffix comes first.
fn apply_rules(w: &mut Vec<u8>, rules: &[(&str, &str)], cond: impl Fn(&[u8], &str) -> bool) {
    for &(suffix, repl) in rules {
        if let Some(stem) = stem_of(w, suffix) {
            if cond(stem, suffix) {
                set_suffix(w, suffix.len(), repl);
            }
            return;
        }
    }
}

fn step1a(w: &mut Vec<u8>) {
    apply_rules(w, &[("sses", "ss"), ("ies", "i"), ("ss", "ss"), ("s", "")], |_, _| true);
}

fn step1b(w: &mut Vec<u8>) {
    if let Some(stem) = stem_of(w, "eed") {
        if measure(stem) > 0 {
            w.pop();
        }
        return;
    }
    let mut stripped = false;
    for suffix in ["ed", "ing"] {
        if let Some(stem) = stem_of(w, suffix) {
            if has_vowel(stem) {
                w.truncate(stem.len());
                stripped = true;
            }
            break;
        }
    }
    if !stripped {
        return;
    }
    if w.ends_with(b"at") || w.ends_with(b"bl") || w.ends_with(b"iz") {
        w.push(b'e');
    } else if ends_double_consonant(w) && !matches!(w[w.len() - 1], b'l' | b's' | b'z') {
        w.pop();
    } else if measure(w) == 1 && ends_cvc(w) {
        w.push(b'e');
    }
}

fn step1c(w: &mut [u8]) {
    if let Some(stem) = stem_of(w, "y") {
        if has_vowel(stem) {
            let n = w.len();
            w[n - 1] = b'i';
        }
    }
}

const STEP2: &[(&str, &str)] = &[
    ("ational", "ate"),
    ("tional", "tion"),
    ("enci", "ence"),
    ("anci", "ance"),
    ("izer", "ize"),
    ("abli", "able"),
    ("alli", "al"),
    ("entli", "ent"),
    ("eli", "e"),
    ("ousli", "ous"),
    ("ization", "ize"),
    ("ation", "ate"),
    ("ator", "ate"),
    ("alism", "al"),
    ("iveness", "ive"),
    ("fulness", "ful"),
    ("ousness", "ous"),
    ("aliti", "al"),
    ("iviti", "ive"),
    ("biliti", "ble"),
];

const STEP3: &[(&str, &str)] = &[
    ("icate", "ic"),
    ("ative", ""),
    ("alize", "al"),
    ("iciti", "ic"),
    ("ical", "ic"),
    ("ful", ""),
    ("ness", ""),
];

const STEP4: &[&str] = &[
    "al", "ance", "ence", "er", "ic", "able", "ible", "ant", "ement", "ment", "ent", "ion", "ou",
    "ism", "ate", "iti", "ous", "ive", "ize",
];

fn longest_first<'a>(rules: &'a [(&'a str, &'a str)], w: &[u8]) -> Option<(&'a str, &'a str)> {
    rules
        .iter()
        .filter(|(s, _)| w.ends_with(s.as_bytes()))
        .max_by_key(|(s, _)| s.len())
        .copied()
}

fn step2(w: &mut Vec<u8>) {
    if let Some(rule) = longest_first(STEP2, w) {
        apply_rules(w, &[rule], |stem, _| measure(stem) > 0);
    }
}

fn step3(w: &mut Vec<u8>) {
    if let Some(rule) = longest_first(STEP3, w) {
        apply_rules(w, &[rule], |stem, _| measure(stem) > 0);
    }
}

fn step4(w: &mut Vec<u8>) {
    let Some(suffix) = STEP4
        .iter()
        .filter(|s| w.ends_with(s.as_bytes()))
        .max_by_key(|s| s.len())
    else {
        return;
    };
    apply_rules(w, &[(suffix, "")], |stem, suffix| {
        measure(stem) > 1
            && (suffix != "ion" || matches!(stem.last(), Some(b's') | Some(b't')))
    });
}

fn step5a(w: &mut Vec<u8>) {
    if let Some(stem) = stem_of(w, "e") {
        let m = measure(stem);
        if m > 1 || (m == 1 && !ends_cvc(stem)) {
            w.pop();
        }
    }
}

fn step5b(w: &mut Vec<u8>) {
    if measure(w) > 1 && ends_double_consonant(w) && w.last() == Some(&b'l') {
        w.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check(cases: &[(&str, &str)]) {
        for &(input, want) in cases {
            assert_eq!(stem(input), want, "stem({input})");
        }
    }

    #[test]
    fn measure_examples() {
        for (w, m) in [
            ("tr", 0), ("ee", 0), ("tree", 0), ("y", 0), ("by", 0),
            ("trouble", 1), ("oats", 1), ("trees", 1), ("ivy", 1),
            ("troubles", 2), ("private", 2), ("oaten", 2), ("orrery", 2),
        ] {
            assert_eq!(measure(w.as_bytes()), m, "{w}");
        }
    }

    #[test]
    fn step1_examples() {
        check(&[
            ("caresses", "caress"), ("ponies", "poni"), ("ties", "ti"), ("caress", "caress"),
            ("cats", "cat"), ("feed", "feed"), ("agreed", "agre"), ("plastered", "plaster"),
            ("bled", "bled"), ("motoring", "motor"), ("sing", "sing"), ("conflated", "conflat"),
            ("troubled", "troubl"), ("sized", "size"), ("hopping", "hop"), ("tanned", "tan"),
            ("falling", "fall"), ("hissing", "hiss"), ("fizzed", "fizz"), ("failing", "fail"),
            ("filing", "file"), ("happy", "happi"), ("sky", "sky"), ("running", "run"),
        ]);
    }

    #[test]
    fn later_step_examples() {
        check(&[
            ("relational", "relat"), ("conditional", "condit"), ("rational", "ration"),
            ("generalizations", "gener"), ("oscillators", "oscil"), ("hopefulness", "hope"),
            ("goodness", "good"), ("revival", "reviv"), ("allowance", "allow"),
            ("inference", "infer"), ("airliner", "airlin"), ("adjustable", "adjust"),
            ("defensible", "defens"), ("replacement", "replac"), ("adoption", "adopt"),
            ("communism", "commun"), ("effective", "effect"), ("bowdlerize", "bowdler"),
            ("probate", "probat"), ("rate", "rate"), ("cease", "ceas"), ("controlling", "control"),
            ("roll", "roll"), ("electrical", "electr"), ("formative", "form"),
        ]);
    }

    #[test]
    fn passthrough() {
        check(&[("x", "x"), ("is", "is"), ("120", "120"), ("2nd", "2nd"), ("café", "café")]);
    }

    #[test]
    fn clinical_inflections_collapse() {
        assert_eq!(stem("patients"), stem("patient"));
        assert_eq!(stem("admitted"), "admit");
        assert_eq!(stem("admit"), "admit");
    }
}
