//! Rule-based English lemmatizer tuned for cooking vocabulary.
//!
//! Handles regular plurals and the `-s`/`-ed`/`-ing` verb inflections, with an
//! exception table for irregular forms and for words the suffix rules would
//! mangle. Tokens it does not recognise are returned unchanged.

use std::collections::HashMap;
use std::sync::OnceLock;

/// `(surface, lemma)` pairs consulted before any suffix rule.
const EXCEPTIONS: &[(&str, &str)] = &[
    // be / have / do / go
    ("am", "be"),
    ("is", "be"),
    ("are", "be"),
    ("was", "be"),
    ("were", "be"),
    ("been", "be"),
    ("being", "be"),
    ("has", "have"),
    ("had", "have"),
    ("having", "have"),
    ("does", "do"),
    ("did", "do"),
    ("done", "do"),
    ("goes", "go"),
    ("went", "go"),
    ("gone", "go"),
    // irregular verbs
    ("ate", "eat"),
    ("eaten", "eat"),
    ("made", "make"),
    ("took", "take"),
    ("taken", "take"),
    ("gave", "give"),
    ("given", "give"),
    ("came", "come"),
    ("saw", "see"),
    ("seen", "see"),
    ("fell", "fall"),
    ("fallen", "fall"),
    ("froze", "freeze"),
    ("frozen", "freeze"),
    ("kept", "keep"),
    ("held", "hold"),
    ("felt", "feel"),
    ("bought", "buy"),
    ("brought", "bring"),
    ("thought", "think"),
    ("sold", "sell"),
    ("told", "tell"),
    ("found", "find"),
    ("ran", "run"),
    ("began", "begin"),
    ("begun", "begin"),
    ("drank", "drink"),
    ("drunk", "drink"),
    ("shook", "shake"),
    ("shaken", "shake"),
    ("wrote", "write"),
    ("written", "write"),
    ("fed", "feed"),
    ("led", "lead"),
    ("paid", "pay"),
    ("laid", "lay"),
    ("said", "say"),
    ("heard", "hear"),
    ("caught", "catch"),
    ("taught", "teach"),
    ("dug", "dig"),
    ("hung", "hang"),
    ("stuck", "stick"),
    ("spun", "spin"),
    ("stood", "stand"),
    ("chose", "choose"),
    ("chosen", "choose"),
    ("broke", "break"),
    ("broken", "break"),
    ("beaten", "beat"),
    ("got", "get"),
    ("gotten", "get"),
    ("grew", "grow"),
    ("grown", "grow"),
    ("threw", "throw"),
    ("thrown", "throw"),
    ("knew", "know"),
    ("known", "know"),
    ("blew", "blow"),
    ("blown", "blow"),
    ("meant", "mean"),
    ("sent", "send"),
    ("spent", "spend"),
    ("built", "build"),
    ("bent", "bend"),
    ("lost", "lose"),
    ("slid", "slide"),
    ("bit", "bit"),
    ("burnt", "burn"),
    ("died", "die"),
    ("dying", "die"),
    ("tied", "tie"),
    ("tying", "tie"),
    ("lied", "lie"),
    ("lying", "lie"),
    ("dyed", "dye"),
    ("added", "add"),
    ("adding", "add"),
    ("focused", "focus"),
    ("focusing", "focus"),
    ("pureed", "puree"),
    ("sauteed", "saute"),
    ("agreed", "agree"),
    ("freed", "free"),
    ("tasted", "taste"),
    ("tasting", "taste"),
    ("pasted", "paste"),
    ("pasting", "paste"),
    ("wasted", "waste"),
    ("wasting", "waste"),
    ("basted", "baste"),
    ("basting", "baste"),
    ("changed", "change"),
    ("changing", "change"),
    ("arranged", "arrange"),
    ("arranging", "arrange"),
    ("ranged", "range"),
    ("plunged", "plunge"),
    ("plunging", "plunge"),
    ("singed", "singe"),
    ("guided", "guide"),
    ("guiding", "guide"),
    ("explored", "explore"),
    ("ignored", "ignore"),
    ("restored", "restore"),
    ("bathed", "bathe"),
    ("breathed", "breathe"),
    ("soothed", "soothe"),
    ("created", "create"),
    ("creating", "create"),
    ("required", "require"),
    ("requiring", "require"),
    ("deboned", "debone"),
    ("deboning", "debone"),
    // irregular and -ie nouns
    ("children", "child"),
    ("men", "man"),
    ("women", "woman"),
    ("mice", "mouse"),
    ("teeth", "tooth"),
    ("feet", "foot"),
    ("geese", "goose"),
    ("knives", "knife"),
    ("leaves", "leaf"),
    ("loaves", "loaf"),
    ("halves", "half"),
    ("calves", "calf"),
    ("shelves", "shelf"),
    ("wolves", "wolf"),
    ("lives", "life"),
    ("wives", "wife"),
    ("thieves", "thief"),
    ("scarves", "scarf"),
    ("selves", "self"),
    ("cookies", "cookie"),
    ("brownies", "brownie"),
    ("smoothies", "smoothie"),
    ("veggies", "veggie"),
    ("calories", "calorie"),
    ("movies", "movie"),
    ("hoagies", "hoagie"),
    ("shoes", "shoe"),
    ("toes", "toe"),
    ("canoes", "canoe"),
    ("quiches", "quiche"),
    ("brioches", "brioche"),
    ("niches", "niche"),
    ("cliches", "cliche"),
    // words that only look inflected
    ("always", "always"),
    ("perhaps", "perhaps"),
    ("sometimes", "sometimes"),
    ("towards", "towards"),
    ("afterwards", "afterwards"),
    ("besides", "besides"),
    ("nowadays", "nowadays"),
    ("whereas", "whereas"),
    ("unless", "unless"),
    ("various", "various"),
    ("series", "series"),
    ("species", "species"),
    ("news", "news"),
    ("lens", "lens"),
    ("molasses", "molasses"),
    ("christmas", "christmas"),
    ("during", "during"),
    ("morning", "morning"),
    ("evening", "evening"),
    ("nothing", "nothing"),
    ("something", "something"),
    ("anything", "anything"),
    ("everything", "everything"),
    ("ceiling", "ceiling"),
    ("wedding", "wedding"),
    ("pudding", "pudding"),
    ("dumpling", "dumpling"),
    ("icing", "icing"),
    ("filling", "filling"),
    ("dressing", "dressing"),
    ("hundred", "hundred"),
    ("naked", "naked"),
    ("wicked", "wicked"),
    ("sacred", "sacred"),
    ("beloved", "beloved"),
    ("crooked", "crooked"),
    ("jagged", "jagged"),
    ("ragged", "ragged"),
    ("rugged", "rugged"),
    ("kindred", "kindred"),
    ("hatred", "hatred"),
    ("ground", "ground"),
    ("left", "left"),
];

fn exceptions() -> &'static HashMap<&'static str, &'static str> {
    static TABLE: OnceLock<HashMap<&'static str, &'static str>> = OnceLock::new();
    TABLE.get_or_init(|| EXCEPTIONS.iter().copied().collect())
}

fn is_vowel(c: u8) -> bool {
    matches!(c, b'a' | b'e' | b'i' | b'o' | b'u')
}

fn is_vowel_y(c: u8) -> bool {
    is_vowel(c) || c == b'y'
}

fn vowel_groups(s: &[u8]) -> usize {
    let mut groups = 0;
    let mut prev = false;
    for &c in s {
        let v = is_vowel_y(c);
        if v && !prev {
            groups += 1;
        }
        prev = v;
    }
    groups
}

/// Lemmatizes one lowercase token.
pub fn lemmatize(token: &str) -> String {
    if let Some(lemma) = exceptions().get(token) {
        return (*lemma).to_owned();
    }
    if let Some((head, tail)) = token.rsplit_once('-') {
        if !head.is_empty() && !tail.is_empty() {
            return format!("{head}-{}", lemmatize(tail));
        }
    }
    if let Some(base) = token.strip_suffix("'s").or_else(|| token.strip_suffix('\'')) {
        if !base.is_empty() {
            return lemmatize(base);
        }
    }
    if !token.bytes().all(|b| b.is_ascii_lowercase()) {
        return token.to_owned();
    }
    inflection(token.as_bytes()).unwrap_or_else(|| token.to_owned())
}

fn inflection(w: &[u8]) -> Option<String> {
    let s = std::str::from_utf8(w).ok()?;
    if w.len() >= 5 && s.ends_with("ing") {
        let stem = &w[..w.len() - 3];
        if stem.iter().any(|&c| is_vowel_y(c)) {
            return Some(restore_verb_stem(stem));
        }
        return None;
    }
    if w.len() >= 4 && s.ends_with("ed") {
        if s.ends_with("eed") || s.ends_with("ead") {
            return None;
        }
        if w.len() > 4 && s.ends_with("ied") {
            return Some(format!("{}y", &s[..s.len() - 3]));
        }
        let stem = &w[..w.len() - 2];
        if stem.iter().any(|&c| is_vowel_y(c)) {
            return Some(restore_verb_stem(stem));
        }
        return None;
    }
    if w.len() >= 4 && s.ends_with('s') {
        return plural(s);
    }
    None
}

fn plural(s: &str) -> Option<String> {
    if s.ends_with("ss") || s.ends_with("us") || s.ends_with("is") {
        return None;
    }
    if s.len() > 4 && s.ends_with("ies") {
        return Some(format!("{}y", &s[..s.len() - 3]));
    }
    if s.ends_with("sses") || s.ends_with("shes") || s.ends_with("xes") || s.ends_with("zzes") {
        return Some(s[..s.len() - 2].to_owned());
    }
    if s.ends_with("ches") {
        let b = s.as_bytes();
        // headaches -> headache, but peaches -> peach
        if s.ends_with("aches") && (b.len() == 5 || !is_vowel(b[b.len() - 6])) {
            return Some(s[..s.len() - 1].to_owned());
        }
        return Some(s[..s.len() - 2].to_owned());
    }
    if s.ends_with("oes") {
        return Some(s[..s.len() - 2].to_owned());
    }
    Some(s[..s.len() - 1].to_owned())
}

/// Rebuilds a verb base from a stem left by stripping `-ed` or `-ing`.
fn restore_verb_stem(stem: &[u8]) -> String {
    let n = stem.len();
    let s = String::from_utf8_lossy(stem).into_owned();
    let last = stem[n - 1];
    let prev = if n >= 2 { Some(stem[n - 2]) } else { None };

    // chopped -> chop, stirred -> stir
    if let Some(p) = prev {
        if p == last && matches!(last, b'b' | b'd' | b'g' | b'm' | b'n' | b'p' | b'r' | b't') {
            return s[..n - 1].to_owned();
        }
    }
    let add_e = match last {
        b'v' | b'u' => true,
        b'c' => true,
        b'z' => prev != Some(b'z'),
        b's' => prev != Some(b's'),
        b'g' => match prev {
            Some(p) => is_vowel(p) || matches!(p, b'd' | b'r' | b'l'),
            None => false,
        },
        b'l' => matches!(prev, Some(p) if !is_vowel_y(p) && !matches!(p, b'l' | b'r' | b'w')),
        b't' if prev == Some(b'a') => n >= 3 && !is_vowel(stem[n - 3]),
        // combined, divided, measured, prepared, required
        b'n' | b'd' | b'r'
            if matches!((last, prev), (b'n' | b'd', Some(b'i')) | (b'r', Some(b'i' | b'u' | b'a'))) =>
        {
            if n >= 3 && !is_vowel_y(stem[n - 3]) {
                true
            } else {
                single_syllable_cvc(stem)
            }
        }
        _ => single_syllable_cvc(stem),
    };
    if add_e {
        format!("{s}e")
    } else {
        s
    }
}

/// baked -> bake: one-syllable stems ending consonant-vowel-consonant.
fn single_syllable_cvc(stem: &[u8]) -> bool {
    let n = stem.len();
    if n < 2 || vowel_groups(stem) != 1 {
        return false;
    }
    let last = stem[n - 1];
    let mid = stem[n - 2];
    if is_vowel_y(last) || matches!(last, b'w' | b'x' | b'y') || !is_vowel_y(mid) {
        return false;
    }
    n == 2 || !is_vowel_y(stem[n - 3])
}
