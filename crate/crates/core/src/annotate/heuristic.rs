//! Dependency-free tagger: a small closed-class lexicon plus suffix rules for POS, and
//! capitalized-run / number detection for named entities.

use super::tokenize::{is_year, tokenize, Segment, Token};
use super::{Annotation, NeSpan, StopList};

const ORG_SUFFIXES: &[&str] = &[
    "inc",
    "corp",
    "corporation",
    "company",
    "co",
    "university",
    "college",
    "school",
    "institute",
    "association",
    "party",
    "band",
    "records",
    "studios",
    "club",
    "fc",
    "united",
    "group",
    "ltd",
    "llc",
    "foundation",
    "agency",
    "council",
    "committee",
    "church",
    "bank",
];

const LOC_SUFFIXES: &[&str] = &[
    "river",
    "mountain",
    "mountains",
    "lake",
    "ocean",
    "sea",
    "city",
    "county",
    "state",
    "island",
    "islands",
    "valley",
    "park",
    "street",
    "bay",
    "desert",
    "province",
    "kingdom",
    "republic",
];

fn lexicon(word: &str) -> Option<&'static str> {
    Some(match word {
        "a" | "an" | "the" | "this" | "that" | "these" | "those" | "every" | "each" | "some"
        | "any" | "no" => "DT",
        "in" | "on" | "at" | "of" | "for" | "with" | "by" | "from" | "about" | "into" | "over"
        | "under" | "after" | "before" | "during" | "between" | "through" | "against"
        | "without" | "since" | "until" | "as" | "like" => "IN",
        "and" | "or" | "but" | "nor" | "yet" => "CC",
        "to" => "TO",
        "i" | "you" | "he" | "she" | "it" | "we" | "they" | "me" | "him" | "her" | "us"
        | "them" => "PRP",
        "my" | "your" | "his" | "its" | "our" | "their" => "PRP$",
        "who" | "whom" | "what" => "WP",
        "whose" => "WP$",
        "which" => "WDT",
        "where" | "when" | "why" | "how" => "WRB",
        "can" | "could" | "will" | "would" | "shall" | "should" | "may" | "might" | "must" => "MD",
        "is" | "am" | "are" | "has" | "does" => "VBZ",
        "was" | "were" | "had" | "did" => "VBD",
        "be" | "have" | "do" => "VB",
        "been" => "VBN",
        "being" => "VBG",
        "not" | "very" | "also" | "too" | "just" | "only" => "RB",
        _ => return None,
    })
}

fn is_number(t: &Token) -> bool {
    t.text.chars().next().is_some_and(|c| c.is_ascii_digit())
        && t.text
            .chars()
            .all(|c| c.is_ascii_digit() || c == ',' || c == '.')
}

fn sentence_initial(tokens: &[Token], i: usize) -> bool {
    i == 0 || matches!(tokens[i - 1].text.as_str(), "." | "!" | "?")
}

fn pos_tag(tokens: &[Token], i: usize) -> String {
    let t = &tokens[i];
    if t.punct {
        return "PUNCT".into();
    }
    if is_number(t) {
        return "CD".into();
    }
    if let Some(tag) = lexicon(&t.lower) {
        return tag.into();
    }
    if t.is_capitalized() && !sentence_initial(tokens, i) {
        return "NNP".into();
    }
    let w = t.lower.as_str();
    let tag = if w.ends_with("ly") && w.len() > 4 {
        "RB"
    } else if w.ends_with("ing") && w.len() > 5 {
        "VBG"
    } else if w.ends_with("ed") && w.len() > 4 {
        "VBD"
    } else if ["ous", "ful", "able", "ible", "ive", "ical", "less"]
        .iter()
        .any(|s| w.ends_with(s))
        && w.len() > 5
    {
        "JJ"
    } else if ["est"].iter().any(|s| w.ends_with(s)) && w.len() > 5 {
        "JJS"
    } else if w.ends_with('s') && !w.ends_with("ss") && w.len() > 3 {
        "NNS"
    } else {
        "NN"
    };
    tag.into()
}

fn run_label(run: &[Token]) -> &'static str {
    let last = run.last().map(|t| t.lower.as_str()).unwrap_or_default();
    if ORG_SUFFIXES.contains(&last) {
        "ORGANIZATION"
    } else if LOC_SUFFIXES.contains(&last) {
        "LOCATION"
    } else if (2..=3).contains(&run.len())
        && run.iter().all(|t| {
            t.text
                .chars()
                .all(|c| c.is_alphabetic() || c == '\'' || c == '-')
        })
    {
        "PERSON"
    } else {
        "MISC"
    }
}

fn ne_spans(tokens: &[Token], stop: &StopList) -> Vec<NeSpan> {
    let mut spans = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let t = &tokens[i];
        if t.punct {
            i += 1;
            continue;
        }
        if is_number(t) {
            let label = if is_year(&t.text) { "DATE" } else { "NUMBER" };
            spans.push(NeSpan::new(i, i + 1, label));
            i += 1;
            continue;
        }
        if !t.is_capitalized() {
            i += 1;
            continue;
        }
        let mut end = i;
        while end < tokens.len() && !tokens[end].punct && tokens[end].is_capitalized() {
            end += 1;
        }
        let mut start = i;
        if sentence_initial(tokens, i) {
            while start < end && stop.contains(&tokens[start].lower) {
                start += 1;
            }
        }
        let run = &tokens[start..end];
        let all_stop = run.iter().all(|t| stop.contains(&t.lower));
        let lone_initial = run.len() == 1
            && start == i
            && sentence_initial(tokens, i)
            && lexicon(&run[0].lower).is_some();
        if !run.is_empty() && !all_stop && !lone_initial {
            spans.push(NeSpan::new(start, end, run_label(run)));
        }
        i = end;
    }
    spans
}

/// Tags already-tokenized text.
pub fn annotate_tokens(tokens: Vec<Token>, stop: &StopList) -> Annotation {
    let pos = (0..tokens.len()).map(|i| pos_tag(&tokens, i)).collect();
    let ne = ne_spans(&tokens, stop);
    Annotation::new(tokens, pos, ne)
}

pub fn annotate_text(text: &str, segment: Segment, stop: &StopList) -> Annotation {
    annotate_tokens(tokenize(text, segment), stop)
}
