//! Acceptance suite: one pass/fail line per criterion, each under its time
//! budget. Runs as a plain binary so the report stays readable.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use newsreel::blobs::MemoryBlobs;
use newsreel::cli::{run_pipeline, ModeArg, ProviderArgs, RunArgs, SimilarityArg};
use newsreel::core::highlight::{assign_highlights, lexical_similarity, Lexical, Similarity, DEFAULT_THRESHOLD};
use newsreel::core::lint::{lint_script, spoken_word_count, LintCode, LintPolicy};
use newsreel::core::screenplay::{format_script, parse_script, to_raw};
use newsreel::core::stats::{cohens_kappa, wilcoxon_signed_rank, Pair, WilcoxonMethod};
use newsreel::core::{
    Condition, Framing, PremisePatch, Project, Provenance, Script, ScriptLine, Stage, StageAction, Timestamp,
};
use newsreel::providers::ProviderKind;
use newsreel::session::{HighlightOptions, Session};
use newsreel::Error;
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

type Check = fn();

const CRITERIA: [(&str, Duration, Check); 7] = [
    ("prompt fidelity", Duration::from_secs(1), prompt_fidelity),
    ("parser and formatter", Duration::from_secs(1), parser_formatter),
    ("linter bounds", Duration::from_secs(1), linter_bounds),
    ("highlighter", Duration::from_secs(5), highlighter),
    ("statistics oracles", Duration::from_secs(30), statistics),
    ("end-to-end replay", Duration::from_secs(10), end_to_end_replay),
    ("workflow guard", Duration::from_secs(5), workflow_guard),
];

fn main() -> ExitCode {
    let mut failed = 0;
    for (name, budget, check) in CRITERIA {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let verdict = match outcome {
            Err(_) => "FAIL",
            Ok(()) if elapsed > budget => "FAIL (over budget)",
            Ok(()) => "PASS",
        };
        if verdict != "PASS" {
            failed += 1;
        }
        println!("[{verdict}] {name}: {} ms (budget {} ms)", elapsed.as_millis(), budget.as_millis());
    }
    println!("{} of {} criteria passed", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

// ---- prompt fidelity ----

const STYLE: &str = "It should be entertaining. The dialogue should be colloquial and engaging. The dialogue should be 10 to 12 lines long. Each line of dialogue should be short—less than 20 words. End it with a punchline.";
const FORMAT: &str = "Put parenthetical between parentheses. Put non-dialog parts between square brackets. Capitalize the character names and put a colon after. Separate each dialog line with double new line characters.";
const FORMAT_CHARACTERS: &str = " Format should be Characters: [Character 1]; [Character 2].";
const FORMAT_ANALOGIES: &str = " Format should be a numbered list: 1. [Analogy] 2. [Analogy] 3. [Analogy].";
const FORMAT_SETTING: &str = " Format should be Setting: [Setting].";
const GENERIC_PLOTS: [&str; 3] = [
    "a person (expert) explaining the information to another (naive newcomer)",
    "key stakeholders acting out what happens in the news event",
    "a comedic analogy for the situation in the news event",
];

/// The expected text of each request, as literal segments with one filled
/// slot between consecutive segments. Alternatives are tried in order.
fn oracle(tag: &str) -> Vec<Vec<String>> {
    let s = |parts: &[&str]| parts.iter().map(|p| p.to_string()).collect::<Vec<_>>();
    match tag {
        "extract.setting" => vec![s(&["Where did this news event take place?"])],
        "extract.stakeholders" => {
            vec![s(&["List names of the five main stakeholders in this news event and what they mainly did."])]
        }
        "extract.plot_summary" => vec![s(&["What happened in the news event?"])],
        "extract.info_points" => vec![s(&["What are the three most important things in this news story?"])],
        "extract.plot_elements" => vec![s(&["What are the four main plot points of the news story?"])],
        "premise.characters" => vec![
            s(&[
                "The main characters of the news event are ",
                &format!(", which two are expert and naive newcomer?{FORMAT_CHARACTERS}"),
            ]),
            s(&[
                "The main characters of the news event are ",
                ", based on what happened—",
                &format!(", which two are the most dominant characters in the news event?{FORMAT_CHARACTERS}"),
            ]),
        ],
        "premise.plot" => vec![s(&[
            "List three unique comedic analogies for the situation in the following story: ",
            ". Incorporate the following characters only: ",
            FORMAT_ANALOGIES,
        ])],
        "premise.setting" => vec![
            s(&[&format!("To make a short video of this news event on social media, where might the location be?{FORMAT_SETTING}")]),
            s(&["To act out this analogous premise ", &format!(", where is the location?{FORMAT_SETTING}")]),
        ],
        "script.generate" => {
            let tail = format!("\n{STYLE}\n{FORMAT}");
            let mut alternatives = vec![s(&[
                "Write a script for a comedy skit about ",
                ". Cover the following information: ",
                ". The character should be exactly ",
                ". It should be set in ",
                &format!(".{tail}"),
            ])];
            for plot in GENERIC_PLOTS {
                alternatives.push(vec![format!(
                    "Write a script for a comedy skit about {plot}. Cover the following information: the most important information in the article. The characters should be taken from the article or derived from it. It should be set in a location relevant to the article.{tail}"
                )]);
            }
            alternatives
        }
        "board.descriptions" => vec![s(&[
            "You are a costume designer for a film. Considering this plot ",
            " and this screenplay ",
            ". Describe a single person who could represent each of the characters or groups and map them to one of the characters in this list ",
            " in a numbered list. [character] is a [man/woman/person] who wears [item].",
        ])],
        "board.props" => vec![s(&[
            "Considering these characters ",
            ". Write a list of two clothing items and two household props that an actor could wear to play each character.",
        ])],
        "board.visual_setting" => {
            vec![s(&["You are an art director for a film. Considering this screenplay ", ", choose a setting."])]
        }
        "board.background" => vec![s(&[
            "Considering this setting ",
            " and this premise ",
            ", for each of the following characters ",
            ", list where they would be in this setting, and what the area behind them would look like.",
        ])],
        "board.background_prompt" => vec![s(&[
            "Write a prompt for a generative art program to create an image of this background area based in ",
            ": ",
            ".",
        ])],
        "image.portrait" => {
            vec![s(&["A waist-up portrait of ", ", with ", ", in the style of black-and-white vector line art."])]
        }
        "image.background" => vec![s(&["", ", in the style of a digital painting background."])],
        "storyboard.shot" => {
            vec![s(&["", " To act out this script line: give one key phrase for expression, gesture, and action."])]
        }
        "image.storyboard" => {
            vec![s(&["", ", looking ", ", ", ", ", ", in the style of black-and-white vector line art"])]
        }
        other => panic!("no oracle for request tag `{other}`"),
    }
}

/// Whether `text` is `segments[0] slot segments[1] slot ...` with every
/// slot non-empty.
fn fits(text: &str, segments: &[String]) -> bool {
    let Some((first, rest)) = segments.split_first() else { return text.is_empty() };
    let Some(tail) = text.strip_prefix(first.as_str()) else { return false };
    if rest.is_empty() {
        return tail.is_empty();
    }
    tail.char_indices().skip(1).map(|(i, _)| i).chain([tail.len()]).any(|i| fits(&tail[i..], rest))
}

fn prompt_fidelity() {
    let article = common::credit_card_article();
    let prefix = format!("{}\n\n{}\n\n", article.headline.trim(), article.body.trim());
    let mut style_blocks = BTreeMap::new();
    for framing in ["expository_dialog", "reenactment", "comedic_analogy"] {
        for condition in ["with_premise", "without_premise"] {
            let providers = common::scripted_providers();
            let out = tempfile::tempdir().unwrap();
            run_pipeline(&run_args(out.path(), framing, condition, ModeArg::Live, None), &providers).unwrap();
            let mut log: Vec<(String, String)> = providers
                .prompt_log()
                .into_iter()
                .filter(|p| p.kind != ProviderKind::Embedding)
                .map(|p| (p.request_tag, p.prompt))
                .collect();
            log.sort();
            let tags: std::collections::BTreeSet<&str> = log.iter().map(|(t, _)| t.as_str()).collect();
            // Only the analogy framing asks for its plot.
            let expected = 17 + usize::from(framing == "comedic_analogy");
            assert_eq!(tags.len(), expected, "{framing}/{condition}: {tags:?}");
            for (tag, prompt) in &log {
                let body = if tag.starts_with("extract.") || tag.starts_with("premise.") || tag.starts_with("script.") {
                    prompt.strip_prefix(&prefix).unwrap_or_else(|| panic!("{tag}: article prefix missing"))
                } else {
                    assert!(!prompt.contains(article.headline.trim()), "{tag}: article leaked into the prompt");
                    prompt.as_str()
                };
                assert!(
                    oracle(tag).iter().any(|segments| fits(body, segments)),
                    "{framing}/{condition} {tag}: {body:?}"
                );
                if tag == "script.generate" {
                    let (directive, style) = body.split_once('\n').unwrap();
                    assert_eq!(style, format!("{STYLE}\n{FORMAT}"));
                    style_blocks.insert((framing, condition), style.to_string());
                    if framing == "comedic_analogy" && condition == "with_premise" {
                        assert!(directive.starts_with(&format!(
                            "Write a script for a comedy skit about {}",
                            common::REFERENCE_PLOT
                        )));
                        assert!(directive.ends_with(&format!("It should be set in {}.", common::REFERENCE_SETTING)));
                    }
                }
                if tag == "storyboard.shot" {
                    assert!(
                        body.starts_with("Ed Delaney: ")
                            || body.starts_with("Credit Union: ")
                            || body.starts_with("Patrick Penfield: "),
                        "{body}"
                    );
                }
            }
            golden(&format!("{framing}_{condition}.txt"), &log);
        }
    }
    let blocks: std::collections::BTreeSet<&String> = style_blocks.values().collect();
    assert_eq!(style_blocks.len(), 6);
    assert_eq!(blocks.len(), 1, "style blocks differ between conditions");
}

/// Compares the prompt log with its golden file. `NEWSREEL_BLESS=1`
/// rewrites the file instead.
fn golden(name: &str, log: &[(String, String)]) {
    let text: String = log.iter().map(|(tag, prompt)| format!("=== {tag}\n{prompt}\n")).collect();
    let path = common::fixture("golden").join(name);
    if std::env::var_os("NEWSREEL_BLESS").is_some() {
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(&path, &text).unwrap();
    }
    let expected = fs::read_to_string(&path).unwrap_or_else(|e| panic!("golden {name}: {e}"));
    assert!(expected == text, "golden {name} differs");
}

fn run_args(out: &Path, framing: &str, condition: &str, mode: ModeArg, cassette: Option<&Path>) -> RunArgs {
    RunArgs {
        article: common::fixture("credit_card.txt"),
        framing: framing.into(),
        out: out.to_path_buf(),
        condition: condition.into(),
        similarity: SimilarityArg::Auto,
        providers: ProviderArgs { mode, cassette: cassette.map(Path::to_path_buf), parallelism: 4 },
        dump_prompts: None,
        storage_dir: None,
    }
}

// ---- parser and formatter ----

fn script(lines: Vec<ScriptLine>) -> Script {
    Script {
        id: "script-001".into(),
        premise_id: None,
        framing: Framing::Reenactment,
        condition: Condition::WithoutPremise,
        lines,
        provenance: Provenance::Generated,
        starred: false,
        created_at: Timestamp(0),
    }
}

fn structure(lines: &[ScriptLine]) -> Vec<(String, Option<String>)> {
    lines
        .iter()
        .map(|l| match l {
            ScriptLine::Dialog { speaker, parenthetical, .. } => (speaker.clone(), parenthetical.clone()),
            other => panic!("expected only dialog, got {other:?}"),
        })
        .collect()
}

fn parser_formatter() {
    let (ed, cu, pp) = ("Ed Delaney", "Credit Union", "Patrick Penfield");
    type Shape<'a> = Vec<(&'a str, Option<&'a str>)>;
    let expected: [(&str, Shape, &str); 3] = [
        (
            "expository",
            vec![(pp, None), (ed, None), (pp, Some("Smiles")), (ed, None), (pp, None)],
            "Ed, you ever heard about the global chip shortage?",
        ),
        (
            "reenactment",
            vec![
                (ed, None),
                (cu, Some("scratches head")),
                (ed, Some("incredulous")),
                (cu, Some("laughs")),
                (ed, Some("sarcastic")),
                (cu, Some("smiling")),
            ],
            "Excuse me, where's my new card? It's been 6 weeks!",
        ),
        (
            "comedic_analogy",
            vec![
                (ed, None),
                (cu, None),
                (ed, Some("confused")),
                (cu, None),
                (ed, None),
                (cu, Some("nervously")),
                (ed, None),
                (cu, Some("apologetically")),
            ],
            "Excuse me, when can I expect my cookies?",
        ),
    ];
    for (framing, shape, first) in expected {
        let parsed = parse_script(&common::reference_script(framing)).unwrap();
        assert!(parsed.warnings.is_empty(), "{framing}: {:?}", parsed.warnings);
        let want: Vec<(String, Option<String>)> =
            shape.iter().map(|(s, p)| (s.to_string(), p.map(str::to_string))).collect();
        assert_eq!(structure(&parsed.lines), want, "{framing}");
        let ScriptLine::Dialog { text, .. } = &parsed.lines[0] else { unreachable!() };
        assert_eq!(text, first);
        for line in &parsed.lines {
            let ScriptLine::Dialog { text, .. } = line else { unreachable!() };
            assert!(!text.starts_with('(') && !text.contains(": "), "{framing}: {text}");
        }
    }
    let comedic = parse_script(&common::reference_script("comedic_analogy")).unwrap();
    assert_eq!(
        comedic.lines[2],
        ScriptLine::dialog(ed, Some("confused"), "Six weeks? But I'm hungry now! It used to be just five to ten days!")
    );

    let corpus = common::script_corpus();
    assert_eq!(corpus.len(), 10);
    for (name, raw) in corpus {
        let parsed = parse_script(&raw).unwrap_or_else(|e| panic!("{name}: {e}"));
        let s = script(parsed.lines.clone());
        let formatted = parse_script(&format_script(&s)).unwrap();
        assert!(formatted.warnings.is_empty(), "{name}: {:?}", formatted.warnings);
        assert_eq!(formatted.lines, parsed.lines, "{name}: formatted layout");
        assert_eq!(parse_script(&to_raw(&parsed.lines)).unwrap().lines, parsed.lines, "{name}: raw layout");
    }
}

// ---- linter ----

fn short_line(i: usize) -> ScriptLine {
    ScriptLine::dialog(
        if i.is_multiple_of(2) { "Ed Delaney" } else { "Credit Union" },
        None,
        format!("Line number {i} here!"),
    )
}

fn codes(s: &Script) -> Vec<LintCode> {
    lint_script(s, &LintPolicy::default()).into_iter().map(|f| f.code).collect()
}

fn linter_bounds() {
    for n in 1..=25 {
        let mut lines: Vec<ScriptLine> = (0..n).map(short_line).collect();
        // Directions never count toward the dialog total.
        lines.insert(0, ScriptLine::Direction { text: "A bakery counter".into() });
        let found = codes(&script(lines));
        assert_eq!(found.contains(&LintCode::LineCountLow), n < 10, "{n} lines");
        assert_eq!(found.contains(&LintCode::LineCountHigh), n > 12, "{n} lines");
        assert_eq!(found.is_empty(), (10..=12).contains(&n), "{n} lines: {found:?}");
    }
    for words in 1..=40 {
        let text = (0..words).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ") + "!";
        assert_eq!(spoken_word_count(&text), words);
        let mut lines: Vec<ScriptLine> = (0..11).map(short_line).collect();
        lines[4] = ScriptLine::dialog("Ed Delaney", Some("sighs"), text);
        let findings = lint_script(&script(lines), &LintPolicy::default());
        let long: Vec<_> = findings.iter().filter(|f| f.code == LintCode::LineTooLong).collect();
        assert_eq!(long.len(), usize::from(words >= 20), "{words} words");
        if words >= 20 {
            assert_eq!(long[0].line_index, Some(4));
        }
    }
    // Words inside an inline parenthetical are not spoken.
    let nineteen = (0..19).map(|i| format!("w{i}")).collect::<Vec<_>>().join(" ");
    assert_eq!(spoken_word_count(&format!("{nineteen} (laughs loudly)")), 19);
}

// ---- highlighter ----

struct Fixed(f64);

impl Similarity for Fixed {
    type Error = newsreel::core::Error;
    fn similarity(&mut self, _: &str, _: &str) -> Result<f64, Self::Error> {
        Ok(self.0)
    }
}

fn words(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn dialog_lines(count: usize) -> impl Strategy<Value = Vec<ScriptLine>> {
    let word = "[a-f]{1,2}";
    let text = prop::collection::vec(word, 1..10).prop_map(|w| w.join(" "));
    let line = prop_oneof![
        4 => text.clone().prop_map(|t| ScriptLine::dialog("Ed Delaney", None, t)),
        1 => text.prop_map(|t| ScriptLine::Direction { text: t }),
    ];
    prop::collection::vec(line, 1..count).prop_map(|mut lines| {
        lines.push(ScriptLine::dialog("Credit Union", None, "ab cd"));
        lines
    })
}

fn highlighter() {
    // Binary cosine by hand: one shared word out of 1 and 4 gives 1/2.
    let s = script(vec![ScriptLine::dialog("Ed Delaney", None, "chips wafers cookies ovens")]);
    assert_eq!(lexical_similarity("chips", "chips wafers cookies ovens").unwrap(), 0.5);
    let set = assign_highlights(&s, &["chips".to_string()], DEFAULT_THRESHOLD, &mut Lexical).unwrap();
    assert_eq!(set.entries.len(), 1);
    assert_eq!(set.entries[0].score, 0.5);
    // 50 shared words out of 73 and 137: 50/sqrt(10001), just under 1/2.
    let point = words("s", 50).into_iter().chain(words("p", 23)).collect::<Vec<_>>().join(" ");
    let line = words("s", 50).into_iter().chain(words("l", 87)).collect::<Vec<_>>().join(" ");
    let score = lexical_similarity(&point, &line).unwrap();
    assert!((score - 50.0 / 10001f64.sqrt()).abs() < 1e-15 && score > 0.4999 && score < 0.5, "{score}");
    let s = script(vec![ScriptLine::dialog("Ed Delaney", None, line)]);
    assert!(assign_highlights(&s, std::slice::from_ref(&point), DEFAULT_THRESHOLD, &mut Lexical)
        .unwrap()
        .entries
        .is_empty());
    assert!(assign_highlights(&s, &[point], 0.4999, &mut Lexical).unwrap().entries.len() == 1);
    assert!(assign_highlights(&s, &["x".into()], 0.5, &mut Fixed(0.4999)).unwrap().entries.is_empty());
    assert_eq!(assign_highlights(&s, &["x".into()], 0.5, &mut Fixed(0.5)).unwrap().entries.len(), 1);
    // The worked example: 4 shared content words out of 5 and 6.
    let worked =
        lexical_similarity("global chip shortage delays cards", "the global chip shortage is causing major delays")
            .unwrap();
    assert!((worked - 4.0 / 30f64.sqrt()).abs() < 1e-12);

    let points = prop::collection::vec(prop::collection::vec("[a-f]{1,2}", 1..6).prop_map(|w| w.join(" ")), 1..6);
    let mut runner = TestRunner::new(Config { cases: 1000, failure_persistence: None, ..Config::default() });
    runner
        .run(&(dialog_lines(14), points, 0.0f64..1.0, 0.0f64..0.5), |(lines, points, lo, bump)| {
            let s = script(lines);
            let hi = (lo + bump).min(1.0);
            let low = assign_highlights(&s, &points, lo, &mut Lexical).unwrap();
            let high = assign_highlights(&s, &points, hi, &mut Lexical).unwrap();
            for (threshold, set) in [(lo, &low), (hi, &high)] {
                for (i, point) in points.iter().enumerate() {
                    let hits: Vec<_> = set.entries.iter().filter(|e| e.info_point_index == i).collect();
                    prop_assert!(hits.len() <= 1);
                    let best = s
                        .lines
                        .iter()
                        .filter_map(|l| match l {
                            ScriptLine::Dialog { text, .. } => Some(lexical_similarity(point, text).unwrap()),
                            _ => None,
                        })
                        .fold(0.0f64, f64::max);
                    prop_assert_eq!(hits.len() == 1, best >= threshold);
                    if let Some(hit) = hits.first() {
                        prop_assert!(s.lines[hit.line_index].is_dialog());
                        prop_assert_eq!(hit.score, best);
                    }
                }
            }
            for e in &high.entries {
                prop_assert!(low.entries.contains(e));
            }
            Ok(())
        })
        .unwrap();
}

// ---- statistics ----

/// Two-sided exact p from all 2^n sign assignments of the given ranks.
fn enumerated_p(signed: &[f64]) -> f64 {
    let n = signed.len();
    let magnitudes: Vec<f64> = signed.iter().map(|d| d.abs()).collect();
    let ranks: Vec<f64> = magnitudes
        .iter()
        .map(|m| {
            let below = magnitudes.iter().filter(|x| *x < m).count() as f64;
            let tied = magnitudes.iter().filter(|x| *x == m).count() as f64;
            below + (tied + 1.0) / 2.0
        })
        .collect();
    let total: f64 = ranks.iter().sum();
    let plus: f64 = signed.iter().zip(&ranks).filter(|(d, _)| **d > 0.0).map(|(_, r)| r).sum();
    let observed = plus.min(total - plus);
    let extreme = (0u32..1 << n)
        .filter(|mask| {
            let w: f64 = (0..n).filter(|i| mask & (1 << i) != 0).map(|i| ranks[i]).sum();
            w.min(total - w) <= observed + 1e-9
        })
        .count();
    (extreme as f64 / (1u64 << n) as f64).min(1.0)
}

fn statistics() {
    let layouts: [fn(usize) -> f64; 3] = [|i| (i + 1) as f64, |i| (i / 2 + 1) as f64, |i| (i % 3 + 1) as f64 * 0.5];
    for n in 1..=10 {
        for layout in layouts {
            for mask in 0u32..1 << n {
                let diffs: Vec<f64> =
                    (0..n).map(|i| if mask & (1 << i) != 0 { layout(i) } else { -layout(i) }).collect();
                let pairs: Vec<Pair> = diffs.iter().map(|d| Pair { a: 4.0 + d, b: 4.0 }).collect();
                let r = wilcoxon_signed_rank(&pairs).unwrap();
                assert_eq!(r.method, WilcoxonMethod::Exact);
                assert_eq!(r.n_effective, n);
                let want = enumerated_p(&diffs);
                assert!((r.p_two_sided - want).abs() < 1e-12, "n={n} mask={mask:b}: {} vs {want}", r.p_two_sided);
            }
        }
    }
    let pairs: Vec<Pair> = [1.0, 2.0, 3.0, 4.0].iter().map(|d| Pair { a: 5.0 + d, b: 5.0 }).collect();
    let r = wilcoxon_signed_rank(&pairs).unwrap();
    assert!((r.p_two_sided - 0.125).abs() < 1e-12, "{}", r.p_two_sided);
    assert_eq!(r.w_statistic, 0.0);

    // 2x2 table: 20 yes/yes, 5 yes/no, 10 no/yes, 15 no/no.
    let mut a = Vec::new();
    let mut b = Vec::new();
    for (count, x, y) in [(20, 1, 1), (5, 1, 0), (10, 0, 1), (15, 0, 0)] {
        a.extend(std::iter::repeat_n(x, count));
        b.extend(std::iter::repeat_n(y, count));
    }
    let po = 35.0 / 50.0;
    let pe = (25.0 / 50.0) * (30.0 / 50.0) + (25.0 / 50.0) * (20.0 / 50.0);
    let k = cohens_kappa(&a, &b).unwrap();
    assert!((k.kappa - 0.4).abs() < 1e-12 && (k.kappa - (po - pe) / (1.0 - pe)).abs() < 1e-12, "{}", k.kappa);
    assert!((cohens_kappa(&a, &a).unwrap().kappa - 1.0).abs() < 1e-12);
    let ratings = [1, 3, 5, 7, 2, 2, 6];
    assert!((cohens_kappa(&ratings, &ratings).unwrap().kappa - 1.0).abs() < 1e-12);
}

// ---- end-to-end replay ----

fn end_to_end_replay() {
    let runs: Vec<_> = (0..2)
        .map(|_| {
            let out = tempfile::tempdir().unwrap();
            let status = Command::new(env!("CARGO_BIN_EXE_newsreel"))
                .args(["run", "--framing", "comedic_analogy", "--mode", "replay", "--article"])
                .arg(common::fixture("credit_card.txt"))
                .arg("--cassette")
                .arg(common::cassette_path())
                .arg("--out")
                .arg(out.path())
                .env("HTTPS_PROXY", "http://127.0.0.1:9")
                .env("HTTP_PROXY", "http://127.0.0.1:9")
                .output()
                .unwrap();
            assert!(status.status.success(), "{}", String::from_utf8_lossy(&status.stderr));
            let tree = common::tree(out.path());
            (out, tree)
        })
        .collect();
    assert_eq!(runs[0].1, runs[1].1, "the two bundles differ");
    let dir = runs[0].0.path();
    let json =
        |name: &str| -> serde_json::Value { serde_json::from_slice(&fs::read(dir.join(name)).unwrap()).unwrap() };

    let manifest = json("manifest.json");
    assert_eq!(manifest["omitted"], serde_json::json!([]));
    let project = json("project.json");
    let premise = &project["premises"][0];
    assert_eq!(premise["plot"], common::REFERENCE_PLOT);
    assert_eq!(premise["setting"], common::REFERENCE_SETTING);
    let names: Vec<&str> =
        premise["characters"].as_array().unwrap().iter().map(|c| c["name"].as_str().unwrap()).collect();
    assert_eq!(names, [common::ISSUERS, common::CONSUMERS]);
    assert_eq!(premise["info_points"], serde_json::json!(common::REFERENCE_PLOT_POINTS));

    let script: Script = serde_json::from_value(json("script.json")).unwrap();
    let dialog = script.lines.iter().filter(|l| l.is_dialog()).count();
    assert_eq!(dialog, 8);
    let highlights = json("highlights.json");
    assert_eq!(highlights["script_id"], script.id.as_str());
    assert!(highlights["set"]["entries"].is_array());
    assert_eq!(json("character_board/cards.json")["cards"].as_array().unwrap().len(), 2);
    assert_eq!(json("storyboard/manifest.json").as_array().unwrap().len(), dialog);
    let panels = runs[0].1.iter().filter(|(p, _)| p.starts_with("storyboard/") && p.ends_with(".png")).count();
    assert_eq!(panels, dialog);
}

// ---- workflow guard ----

fn stage_violation(e: Error) -> StageAction {
    match e {
        Error::Core(newsreel::core::Error::StageViolation { action, .. }) => action,
        other => panic!("expected a stage violation, got {other:?}"),
    }
}

fn workflow_guard() {
    let providers = common::scripted_providers();
    let blobs = MemoryBlobs::default();
    let session = Session::new(&providers, &blobs);

    let mut project = session.create_project(common::credit_card_article()).unwrap();
    session.extract(&mut project).unwrap();
    let err = session.generate_script(&mut project, Condition::WithPremise, None, None).unwrap_err();
    assert_eq!(stage_violation(err), StageAction::GenerateScript);
    session.generate_script(&mut project, Condition::WithoutPremise, None, Some(Framing::Reenactment)).unwrap();
    assert_eq!(stage_violation(session.build_storyboard(&mut project).unwrap_err()), StageAction::BuildStoryboard);

    // A scripted session of twenty actions. After each one the log must
    // only have grown and must replay to the live state.
    let mut project = session.create_project(common::credit_card_article()).unwrap();
    let mut actions = 1;
    let mut log_so_far = project.event_log.clone();
    let mut scripts_so_far: Vec<Script> = Vec::new();
    let mut step = |project: &mut Project, f: &dyn Fn(&mut Project)| {
        f(project);
        actions += 1;
        assert!(project.event_log.len() > log_so_far.len(), "action {actions} logged nothing");
        assert_eq!(project.event_log[..log_so_far.len()], log_so_far[..], "action {actions} rewrote history");
        assert_eq!(Project::replay(&project.event_log).unwrap(), *project, "action {actions}");
        for old in &scripts_so_far {
            let kept = project.script(&old.id).unwrap();
            assert_eq!((&kept.lines, kept.provenance), (&old.lines, old.provenance), "action {actions}");
        }
        log_so_far = project.event_log.clone();
        scripts_so_far = project.scripts.clone();
    };
    step(&mut project, &|p| session.extract(p).unwrap());
    step(&mut project, &|p| drop(session.generate_premise(p, Framing::ComedicAnalogy).unwrap()));
    step(&mut project, &|p| {
        let patch = PremisePatch { setting: Some("A crowded bakery".into()), ..PremisePatch::default() };
        session.edit_premise(p, "premise-001", &patch).unwrap();
    });
    step(&mut project, &|p| drop(session.generate_script(p, Condition::WithPremise, None, None).unwrap()));
    step(&mut project, &|p| {
        drop(session.generate_script(p, Condition::WithPremise, Some("premise-001"), None).unwrap())
    });
    step(&mut project, &|p| assert!(session.star_script(p, "script-001").unwrap()));
    step(&mut project, &|p| {
        let mut lines = p.script("script-001").unwrap().lines.clone();
        lines.truncate(6);
        session.edit_script(p, "script-001", lines).unwrap();
    });
    step(&mut project, &|p| session.select_script(p, "script-001").unwrap());
    step(&mut project, &|p| drop(session.assign_highlights(p, HighlightOptions::default()).unwrap()));
    step(&mut project, &|p| drop(session.build_character_board(p).unwrap()));
    step(&mut project, &|p| {
        session.build_storyboard(p).unwrap();
        assert_eq!(p.stage, Stage::StoryboardReady);
    });
    step(&mut project, &|p| {
        let options = HighlightOptions { threshold: Some(0.7), ..HighlightOptions::default() };
        drop(session.assign_highlights(p, options).unwrap())
    });
    step(&mut project, &|p| drop(session.generate_premise(p, Framing::ExpositoryDialog).unwrap()));
    step(&mut project, &|p| {
        drop(session.generate_script(p, Condition::WithoutPremise, None, Some(Framing::ExpositoryDialog)).unwrap())
    });
    step(&mut project, &|p| assert!(!session.star_script(p, "script-001").unwrap()));
    step(&mut project, &|p| session.select_script(p, "script-003").unwrap());
    step(&mut project, &|p| drop(session.build_character_board(p).unwrap()));
    step(&mut project, &|p| session.revert(p, Stage::ScriptActive).unwrap());
    step(&mut project, &|p| drop(session.build_character_board(p).unwrap()));
    assert_eq!(actions, 20);
    assert_eq!(project.history().len(), 4);
    assert_eq!(project.premises.len(), 3);
    assert!(project.staleness().storyboard);
}
