use std::collections::HashSet;

use crate::nbest::NBestList;

use super::{
    ChatTurn, Demonstration, HistoryMode, Placeholder, PromptError, PromptStrategy, TapMode, TaskKind, TemplateSet,
    Values, Variant,
};

const DEFAULT_TAP_DOMAIN: &str = "the target domain";

/// Numbered hypothesis list, `1. ...` through `N. ...`, in rank order.
pub fn nbest_block(list: &NBestList) -> String {
    list.hypotheses
        .iter()
        .map(|h| format!("{}. {}", h.rank, h.text()))
        .collect::<Vec<_>>()
        .join("\n")
}

/// Conversation prefix plus whatever history the strategy keeps.
#[derive(Debug, Clone, PartialEq)]
pub struct ConversationState {
    strategy: PromptStrategy,
    turns: Vec<ChatTurn>,
    base_len: usize,
}

impl ConversationState {
    pub fn new(strategy: &PromptStrategy) -> Result<Self, PromptError> {
        let t = TemplateSet::builtin();
        let mut turns = Vec::new();
        match &strategy.variant {
            Variant::Tap(None) => return Err(PromptError::TapWithoutDemonstration),
            Variant::FewShot(demos) if demos.is_empty() => return Err(PromptError::NoDemonstrations),
            Variant::Tap(Some(_)) => {
                let replies: Vec<String> = match &strategy.tap_mode {
                    TapMode::Replay => t
                        .tap_replies
                        .iter()
                        .map(|r| r.render(&Values::new()))
                        .collect::<Result<_, _>>()?,
                    TapMode::Live(replies) if replies.len() == 3 => replies.clone(),
                    TapMode::Live(replies) => {
                        return Err(PromptError::TapReplies { expected: 3, got: replies.len() })
                    }
                };
                for (query, reply) in tap_activation().into_iter().zip(replies) {
                    turns.push(ChatTurn::user(query));
                    turns.push(ChatTurn::assistant(reply));
                }
            }
            variant => {
                let mut system = t.system.render(&Values::new())?;
                if let Some(domain) = strategy.domain_hint() {
                    system.push('\n');
                    system.push_str(&t.domain_hint.render(&Values::new().set(Placeholder::Domain, domain))?);
                }
                turns.push(ChatTurn::system(system));
                for demo in variant.demonstrations() {
                    let block = nbest_block(&demo.nbest);
                    let n = demo.nbest.len().to_string();
                    let transcription = demo.transcription.join(" ");
                    let values = Values::new()
                        .set(Placeholder::DemoNbestBlock, &block)
                        .set(Placeholder::DemoN, &n)
                        .set(Placeholder::DemoTranscription, &transcription);
                    turns.push(ChatTurn::user(t.demo_query.render(&values)?));
                    turns.push(ChatTurn::assistant(t.demo_answer.render(&values)?));
                }
            }
        }
        let base_len = turns.len();
        Ok(ConversationState { strategy: strategy.clone(), turns, base_len })
    }

    pub fn strategy(&self) -> &PromptStrategy {
        &self.strategy
    }

    pub fn turns(&self) -> &[ChatTurn] {
        &self.turns
    }

    pub fn len(&self) -> usize {
        self.turns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.turns.is_empty()
    }

    /// Number of turns in the strategy prefix.
    pub fn base_len(&self) -> usize {
        self.base_len
    }
}

/// The three fixed activation queries that open a task-activating dialog.
pub fn tap_activation() -> [String; 3] {
    let t = TemplateSet::builtin();
    let q = |i: usize| t.tap_queries[i].render(&Values::new()).expect("activation queries have no placeholders");
    [q(0), q(1), q(2)]
}

fn final_query(strategy: &PromptStrategy, list: &NBestList) -> Result<ChatTurn, PromptError> {
    let t = TemplateSet::builtin();
    let block = nbest_block(list);
    let n = list.len().to_string();
    let mut text = match &strategy.variant {
        Variant::Tap(demo) => {
            let demo = demo.as_ref().ok_or(PromptError::TapWithoutDemonstration)?;
            let demo_block = nbest_block(&demo.nbest);
            let demo_n = demo.nbest.len().to_string();
            let transcription = demo.transcription.join(" ");
            let values = Values::new()
                .set(Placeholder::Domain, strategy.domain.as_deref().unwrap_or(DEFAULT_TAP_DOMAIN))
                .set(Placeholder::DemoNbestBlock, &demo_block)
                .set(Placeholder::DemoN, &demo_n)
                .set(Placeholder::DemoTranscription, &transcription)
                .set(Placeholder::NbestBlock, &block)
                .set(Placeholder::N, &n);
            t.tap_queries[3].render(&values)?
        }
        _ => {
            let values = Values::new().set(Placeholder::NbestBlock, &block).set(Placeholder::N, &n);
            let template = match strategy.task {
                TaskKind::Scores => &t.task_scores,
                TaskKind::Selection => &t.task_selection,
                TaskKind::Correction => &t.task_correction,
            };
            template.render(&values)?
        }
    };
    if strategy.uses_reasoning() {
        text.push('\n');
        text.push_str(&t.reasoning.render(&Values::new())?);
    }
    Ok(ChatTurn::user(text))
}

/// Full request for one utterance: the session's turns followed by the task query.
pub fn render(
    strategy: &PromptStrategy,
    list: &NBestList,
    session: &ConversationState,
) -> Result<Vec<ChatTurn>, PromptError> {
    if session.strategy != *strategy {
        return Err(PromptError::SessionMismatch);
    }
    let mut turns = session.turns.clone();
    turns.push(final_query(strategy, list)?);
    if let Some(cap) = strategy.max_turns {
        if turns.len() > cap {
            return Err(PromptError::TooManyTurns { turns: turns.len(), cap });
        }
    }
    Ok(turns)
}

/// Task-activating dialog for one utterance.
pub fn render_tap(
    demo: &Demonstration,
    list: &NBestList,
    domain: Option<&str>,
    mode: &TapMode,
) -> Result<Vec<ChatTurn>, PromptError> {
    let mut strategy = PromptStrategy::new(Variant::Tap(Some(demo.clone())), TaskKind::Correction);
    strategy.domain = domain.map(str::to_string);
    strategy.tap_mode = mode.clone();
    let session = ConversationState::new(&strategy)?;
    render(&strategy, list, &session)
}

/// Folds an answered utterance into the session according to its history mode.
pub fn advance_history(
    mut session: ConversationState,
    list: &NBestList,
    model_reply: &str,
) -> Result<ConversationState, PromptError> {
    match session.strategy.history {
        HistoryMode::OneByOne => session.turns.truncate(session.base_len),
        HistoryMode::Accumulating => {
            let query = final_query(&session.strategy, list)?;
            session.turns.push(query);
            session.turns.push(ChatTurn::assistant(model_reply));
        }
    }
    Ok(session)
}

/// The `k` training utterances with the longest references, longest first.
pub fn select_demonstrations(train: &[NBestList], k: usize) -> Vec<Demonstration> {
    let mut candidates: Vec<&NBestList> = train.iter().filter(|l| l.reference.is_some()).collect();
    candidates.sort_by_key(|l| std::cmp::Reverse(l.reference.as_ref().map_or(0, Vec::len)));
    candidates
        .into_iter()
        .take(k)
        .filter_map(|l| Demonstration::from_list(l.clone()))
        .collect()
}

/// Fails when a demonstration shares an utterance id with the test set.
pub fn check_disjoint(demos: &[Demonstration], tests: &[NBestList]) -> Result<(), PromptError> {
    let ids: HashSet<&str> = tests.iter().map(|l| l.utterance_id.as_str()).collect();
    match demos.iter().find(|d| ids.contains(d.nbest.utterance_id.as_str())) {
        Some(d) => Err(PromptError::DemoLeak(d.nbest.utterance_id.clone())),
        None => Ok(()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::Role;

    fn list(id: &str, hyps: &[&str]) -> NBestList {
        let pairs: Vec<(&str, f64)> = hyps.iter().enumerate().map(|(i, h)| (*h, -(i as f64))).collect();
        NBestList::from_texts(id, &pairs, Some(hyps[0])).unwrap()
    }

    fn demo(id: &str) -> Demonstration {
        Demonstration::from_list(list(id, &["show me flights to boston", "show me flight to boston"])).unwrap()
    }

    #[test]
    fn zero_shot_reasoning_ends_with_cue() {
        let s = PromptStrategy::new(Variant::ZeroShotReasoning, TaskKind::Scores);
        let session = ConversationState::new(&s).unwrap();
        let turns = render(&s, &list("u", &["a b", "a c"]), &session).unwrap();
        assert!(turns.last().unwrap().content.ends_with("Let's think step by step"));
        assert_eq!(turns.last().unwrap().role, Role::User);
    }

    #[test]
    fn domain_hint_in_system_turn() {
        let s = PromptStrategy::new(Variant::DomainHint("airline information".into()), TaskKind::Scores);
        let turns = render(&s, &list("u", &["a"]), &ConversationState::new(&s).unwrap()).unwrap();
        assert_eq!(turns[0].role, Role::System);
        assert!(turns[0].content.contains("airline information"));
    }

    #[test]
    fn zero_shot_numbered_list() {
        let s = PromptStrategy::new(Variant::ZeroShotScoring, TaskKind::Scores);
        let turns = render(&s, &list("u", &["hello world", "yellow world"]), &ConversationState::new(&s).unwrap()).unwrap();
        let users: Vec<&ChatTurn> = turns.iter().filter(|t| t.role == Role::User).collect();
        assert_eq!(users.len(), 1);
        let lines: Vec<&str> = users[0].content.lines().collect();
        assert!(lines.contains(&"1. hello world"));
        assert!(lines.contains(&"2. yellow world"));
    }

    #[test]
    fn tap_requires_demo() {
        let s = PromptStrategy::new(Variant::Tap(None), TaskKind::Correction);
        assert_eq!(ConversationState::new(&s).unwrap_err(), PromptError::TapWithoutDemonstration);
    }

    #[test]
    fn tap_turns() {
        let turns = render_tap(&demo("train1"), &list("u", &["a b"]), Some("airline information"), &TapMode::Replay).unwrap();
        assert_eq!(turns.len(), 7);
        assert_eq!(turns[0].content, "Do you know speech recognition?");
        assert_eq!(turns[6].role, Role::User);
        assert!(turns[6].content.contains("I would expect your output is: show me flights to boston"));
        assert!(turns[6].content.contains("a demonstration from airline information."));
    }

    #[test]
    fn tap_live_replies() {
        let replies = TapMode::Live(vec!["r1".into(), "r2".into(), "r3".into()]);
        let turns = render_tap(&demo("t"), &list("u", &["a"]), None, &replies).unwrap();
        assert_eq!(turns[1].content, "r1");
        assert_eq!(turns[5].content, "r3");
        let short = TapMode::Live(vec!["r1".into()]);
        assert!(matches!(
            render_tap(&demo("t"), &list("u", &["a"]), None, &short),
            Err(PromptError::TapReplies { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn history_modes() {
        let demos: Vec<Demonstration> = (0..3).map(|i| demo(&format!("d{i}"))).collect();
        for (mode, grows) in [(HistoryMode::OneByOne, false), (HistoryMode::Accumulating, true)] {
            let s = PromptStrategy::new(Variant::FewShot(demos.clone()), TaskKind::Scores).with_history(mode);
            let mut session = ConversationState::new(&s).unwrap();
            let base = session.len();
            assert_eq!(base, 1 + 2 * 3);
            for k in 1..=5 {
                session = advance_history(session, &list(&format!("u{k}"), &["x y"]), "1. -1").unwrap();
                let expected = if grows { base + 2 * k } else { base };
                assert_eq!(session.len(), expected);
            }
        }
    }

    #[test]
    fn session_must_match_strategy() {
        let a = PromptStrategy::new(Variant::ZeroShotScoring, TaskKind::Scores);
        let b = PromptStrategy::new(Variant::ZeroShotScoring, TaskKind::Selection);
        let session = ConversationState::new(&a).unwrap();
        assert_eq!(render(&b, &list("u", &["a"]), &session).unwrap_err(), PromptError::SessionMismatch);
    }

    #[test]
    fn turn_cap() {
        let mut s = PromptStrategy::new(Variant::FewShot(vec![demo("d")]), TaskKind::Scores);
        s.max_turns = Some(3);
        let session = ConversationState::new(&s).unwrap();
        assert_eq!(
            render(&s, &list("u", &["a"]), &session).unwrap_err(),
            PromptError::TooManyTurns { turns: 4, cap: 3 }
        );
    }

    #[test]
    fn demonstration_helpers() {
        let train = vec![list("t1", &["a b"]), list("t2", &["a b c d"]), list("t3", &["a b c"])];
        let picked = select_demonstrations(&train, 2);
        let ids: Vec<&str> = picked.iter().map(|d| d.nbest.utterance_id.as_str()).collect();
        assert_eq!(ids, ["t2", "t3"]);
        assert!(check_disjoint(&picked, &[list("u", &["a"])]).is_ok());
        assert_eq!(
            check_disjoint(&picked, &[list("t3", &["a"])]).unwrap_err(),
            PromptError::DemoLeak("t3".into())
        );
    }
}
