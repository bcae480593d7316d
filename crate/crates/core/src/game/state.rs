use serde::{Deserialize, Serialize};

use super::{Action, BettingStructure, GameError, Position, Variant, STARTING_STACK};
use crate::cards::{Card, DeckSpec};
use crate::eval::{showdown_unchecked, Outcome};
use crate::rng::SplitMix64;

/// Every card of a hand, fixed up front. Community cards are revealed from
/// `board` as rounds open.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Deal {
    pub hole: [Vec<Card>; 2],
    pub board: Vec<Card>,
    pub undealt: Vec<Card>,
}

impl Deal {
    /// Deal from an already-ordered deck: seat 0, seat 1, then the board.
    pub fn from_deck(variant: Variant, deck: &[Card]) -> Deal {
        let s = variant.structure();
        let h = s.hole_cards;
        let b = s.board_cards();
        Deal {
            hole: [deck[..h].to_vec(), deck[h..2 * h].to_vec()],
            board: deck[2 * h..2 * h + b].to_vec(),
            undealt: deck[2 * h + b..].to_vec(),
        }
    }

    /// Check card counts and deck membership, and fill `undealt` from the
    /// rest of the deck when it is empty.
    pub fn validated(mut self, variant: Variant) -> Result<Deal, GameError> {
        let s = variant.structure();
        let deck = DeckSpec::for_variant(variant);
        for hole in &self.hole {
            if hole.len() != s.hole_cards {
                return Err(crate::cards::CardError::WrongCardinality {
                    expected: s.hole_cards,
                    got: hole.len(),
                }
                .into());
            }
        }
        if self.board.len() != s.board_cards() {
            return Err(crate::cards::CardError::WrongCardinality {
                expected: s.board_cards(),
                got: self.board.len(),
            }
            .into());
        }
        let mut all: Vec<Card> = self.hole.iter().flatten().chain(&self.board).copied().collect();
        if self.undealt.is_empty() {
            self.undealt = deck.remaining(&all);
        }
        all.extend(&self.undealt);
        deck.check(&all)?;
        Ok(self)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "seat")]
pub enum TerminalKind {
    Fold(usize),
    Showdown,
    /// A seat was charged a fold without it being a legal move (agent failure).
    Forfeit(usize),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GameState {
    variant: Variant,
    deal: Deal,
    round: usize,
    contributions: [u32; 2],
    /// Bets and raises made by each seat, one entry per round reached.
    raises: Vec<[u32; 2]>,
    /// Actions per round reached.
    history: Vec<Vec<Action>>,
    to_act: usize,
    terminal: Option<TerminalKind>,
}

/// Deal a fresh hand from a deck shuffled by `SplitMix64(seed)`.
pub fn new_game(variant: Variant, seed: u64) -> GameState {
    let mut deck = DeckSpec::for_variant(variant).cards;
    SplitMix64::new(seed).shuffle(&mut deck);
    GameState::from_valid_deal(variant, Deal::from_deck(variant, &deck))
}

impl GameState {
    pub fn with_deal(variant: Variant, deal: Deal) -> Result<GameState, GameError> {
        Ok(Self::from_valid_deal(variant, deal.validated(variant)?))
    }

    pub(crate) fn from_valid_deal(variant: Variant, deal: Deal) -> GameState {
        let s = variant.structure();
        GameState {
            variant,
            deal,
            round: 0,
            contributions: s.blinds,
            raises: vec![[0, 0]],
            history: vec![Vec::new()],
            to_act: s.first_to_act[0],
            terminal: None,
        }
    }

    /// Rebuild a state by dealing `seed` and applying `actions` in order.
    pub fn replay(variant: Variant, seed: u64, actions: &[Action]) -> Result<GameState, GameError> {
        actions
            .iter()
            .try_fold(new_game(variant, seed), |s, &a| s.apply_action(a))
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn structure(&self) -> BettingStructure {
        self.variant.structure()
    }

    pub fn deal(&self) -> &Deal {
        &self.deal
    }

    pub fn round(&self) -> usize {
        self.round
    }

    pub fn contributions(&self) -> [u32; 2] {
        self.contributions
    }

    pub fn pot(&self) -> u32 {
        self.contributions[0] + self.contributions[1]
    }

    pub fn raises(&self) -> &[[u32; 2]] {
        &self.raises
    }

    pub fn history(&self) -> &[Vec<Action>] {
        &self.history
    }

    /// All actions in order, round boundaries dropped.
    pub fn actions(&self) -> Vec<Action> {
        self.history.iter().flatten().copied().collect()
    }

    pub fn to_act(&self) -> Option<usize> {
        self.terminal.is_none().then_some(self.to_act)
    }

    pub fn is_terminal(&self) -> bool {
        self.terminal.is_some()
    }

    pub fn terminal_kind(&self) -> Option<TerminalKind> {
        self.terminal
    }

    pub fn hole(&self, seat: usize) -> &[Card] {
        &self.deal.hole[seat]
    }

    /// Community cards revealed so far.
    pub fn community(&self) -> &[Card] {
        let n = self.structure().revealed_by(self.round);
        &self.deal.board[..n]
    }

    pub fn legal_actions(&self) -> Result<Vec<Action>, GameError> {
        if self.terminal.is_some() {
            return Err(GameError::TerminalState);
        }
        let s = self.structure();
        let facing = self.contributions[0] != self.contributions[1];
        let [a, b] = self.raises[self.round];
        let can_raise = a + b < s.raise_cap;
        let actions = match self.variant {
            Variant::Kuhn if facing => vec![Action::Fold, Action::Call],
            Variant::Kuhn => vec![Action::Check, Action::Bet],
            _ => {
                let mut v = vec![Action::Fold, if facing { Action::Call } else { Action::Check }];
                if can_raise {
                    v.push(Action::Raise);
                }
                v
            }
        };
        Ok(actions)
    }

    pub fn apply_action(&self, action: Action) -> Result<GameState, GameError> {
        let legal = self.legal_actions()?;
        if !legal.contains(&action) {
            return Err(GameError::IllegalAction { action, legal });
        }
        let s = self.structure();
        let mut next = self.clone();
        let p = self.to_act;
        let o = 1 - p;
        next.history[self.round].push(action);
        match action {
            Action::Fold => {
                next.terminal = Some(TerminalKind::Fold(p));
                return Ok(next);
            }
            Action::Check => {}
            Action::Call => next.contributions[p] = next.contributions[o],
            Action::Bet | Action::Raise => {
                next.contributions[p] = next.contributions[o] + s.bet_sizes[self.round];
                next.raises[self.round][p] += 1;
            }
        }
        let closed = next.contributions[0] == next.contributions[1]
            && next.history[self.round].len() >= 2;
        if !closed {
            next.to_act = o;
        } else if self.round + 1 == s.rounds() {
            next.terminal = Some(TerminalKind::Showdown);
        } else {
            next.round += 1;
            next.raises.push([0, 0]);
            next.history.push(Vec::new());
            next.to_act = s.first_to_act[next.round];
        }
        Ok(next)
    }

    /// End the hand with `seat` forfeiting as if it had folded.
    pub fn forfeit(&self, seat: usize) -> Result<GameState, GameError> {
        if self.terminal.is_some() {
            return Err(GameError::TerminalState);
        }
        let mut next = self.clone();
        next.terminal = Some(TerminalKind::Forfeit(seat));
        Ok(next)
    }

    /// Net chips per seat; sums to zero.
    pub fn payoffs(&self) -> Result<[i64; 2], GameError> {
        let c = [self.contributions[0] as i64, self.contributions[1] as i64];
        match self.terminal {
            None => Err(GameError::NonTerminal),
            Some(TerminalKind::Fold(loser)) | Some(TerminalKind::Forfeit(loser)) => {
                let mut p = [0; 2];
                p[loser] = -c[loser];
                p[1 - loser] = c[loser];
                Ok(p)
            }
            Some(TerminalKind::Showdown) => {
                let outcome = showdown_unchecked(
                    self.variant,
                    &self.deal.hole[0],
                    &self.deal.hole[1],
                    &self.deal.board,
                );
                Ok(match outcome {
                    Outcome::Win => [c[1], -c[1]],
                    Outcome::Lose => [-c[0], c[0]],
                    Outcome::Tie => [0, 0],
                })
            }
        }
    }

    /// What `seat` can see. Legal actions are listed only for the seat to act.
    pub fn observation(&self, seat: usize) -> Observation {
        let legal_actions = match self.to_act() {
            Some(p) if p == seat => self.legal_actions().unwrap_or_default(),
            _ => Vec::new(),
        };
        Observation {
            variant: self.variant,
            position: Position::from_seat(seat),
            private_cards: self.deal.hole[seat].clone(),
            community: self.community().to_vec(),
            round: self.round,
            pot: self.pot(),
            my_contribution: self.contributions[seat],
            opponent_contribution: self.contributions[1 - seat],
            my_raises: self.raises[self.round][seat],
            opponent_raises: self.raises[self.round][1 - seat],
            legal_actions,
            history: self.history.clone(),
        }
    }
}

/// One seat's view of a [`GameState`]: everything public plus its own cards.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Observation {
    pub variant: Variant,
    pub position: Position,
    pub private_cards: Vec<Card>,
    pub community: Vec<Card>,
    pub round: usize,
    pub pot: u32,
    pub my_contribution: u32,
    pub opponent_contribution: u32,
    /// Bets and raises in the current round.
    pub my_raises: u32,
    pub opponent_raises: u32,
    pub legal_actions: Vec<Action>,
    pub history: Vec<Vec<Action>>,
}

impl Observation {
    pub fn seat(&self) -> usize {
        self.position.seat()
    }

    pub fn round_name(&self) -> &'static str {
        self.variant.structure().round_name(self.round)
    }

    pub fn my_stack(&self) -> u32 {
        STARTING_STACK - self.my_contribution
    }

    pub fn opponent_stack(&self) -> u32 {
        STARTING_STACK - self.opponent_contribution
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cards::parse_cards;
    use Action::*;

    fn leduc(p0: &str, p1: &str, board: &str) -> GameState {
        let deal = Deal {
            hole: [parse_cards(p0).unwrap(), parse_cards(p1).unwrap()],
            board: parse_cards(board).unwrap(),
            undealt: vec![],
        };
        GameState::with_deal(Variant::Leduc, deal).unwrap()
    }

    #[test]
    fn seeded_deals_are_reproducible() {
        for v in Variant::ALL {
            assert_eq!(new_game(v, 42), new_game(v, 42));
        }
        assert_ne!(new_game(Variant::Limit, 1).deal(), new_game(Variant::Limit, 2).deal());
    }

    #[test]
    fn blinds_and_antes() {
        assert_eq!(new_game(Variant::Kuhn, 5).pot(), 2);
        assert_eq!(new_game(Variant::Leduc, 5).pot(), 3);
        assert_eq!(new_game(Variant::Limit, 5).pot(), 3);
    }

    #[test]
    fn leduc_flop_after_call_check() {
        let s = leduc("HQ", "SJ", "SK").apply_action(Call).unwrap().apply_action(Check).unwrap();
        assert_eq!(s.round(), 1);
        assert_eq!(s.pot(), 4);
        assert_eq!(s.to_act(), Some(0));
        assert_eq!(s.community().len(), 1);
        assert_eq!(s.legal_actions().unwrap(), vec![Fold, Check, Raise]);
    }

    #[test]
    fn leduc_opening_actions() {
        let s = leduc("HQ", "SJ", "SK");
        assert_eq!(s.legal_actions().unwrap(), vec![Fold, Call, Raise]);
        assert!(s.community().is_empty());
    }

    #[test]
    fn kuhn_facing_bet() {
        let s = new_game(Variant::Kuhn, 0).apply_action(Bet).unwrap();
        assert_eq!(s.legal_actions().unwrap(), vec![Fold, Call]);
        let s = new_game(Variant::Kuhn, 0).apply_action(Check).unwrap();
        assert_eq!(s.legal_actions().unwrap(), vec![Check, Bet]);
    }

    #[test]
    fn fold_ends_hand() {
        let s = leduc("HQ", "SJ", "SK").apply_action(Fold).unwrap();
        assert!(s.is_terminal());
        assert_eq!(s.payoffs().unwrap(), [-1, 1]);
        let s = leduc("HQ", "SJ", "SK").apply_action(Raise).unwrap().apply_action(Fold).unwrap();
        assert_eq!(s.payoffs().unwrap(), [2, -2]);
        assert_eq!(s.legal_actions(), Err(GameError::TerminalState));
    }

    #[test]
    fn showdown_tie_returns_contributions() {
        let s = leduc("HK", "SK", "SJ");
        let s = [Call, Check, Check, Check].iter().fold(s, |s, &a| s.apply_action(a).unwrap());
        assert!(s.is_terminal());
        assert_eq!(s.payoffs().unwrap(), [0, 0]);
    }

    #[test]
    fn illegal_actions_are_rejected() {
        let s = leduc("HQ", "SJ", "SK");
        assert!(matches!(s.apply_action(Check), Err(GameError::IllegalAction { .. })));
        assert!(matches!(s.apply_action(Bet), Err(GameError::IllegalAction { .. })));
        assert_eq!(s.payoffs(), Err(GameError::NonTerminal));
    }

    #[test]
    fn limit_preflop_cap_after_four_raises() {
        let mut s = new_game(Variant::Limit, 11);
        for _ in 0..4 {
            assert!(s.legal_actions().unwrap().contains(&Raise));
            s = s.apply_action(Raise).unwrap();
        }
        assert_eq!(s.legal_actions().unwrap(), vec![Fold, Call]);
        assert_eq!(s.contributions(), [8, 10]);
    }

    #[test]
    fn limit_postflop_big_blind_opens() {
        let s = new_game(Variant::Limit, 3).apply_action(Call).unwrap().apply_action(Check).unwrap();
        assert_eq!(s.round(), 1);
        assert_eq!(s.to_act(), Some(1));
        assert_eq!(s.community().len(), 3);
    }

    #[test]
    fn observation_masks_opponent_cards() {
        let s = leduc("HQ", "SJ", "SK");
        let o = s.observation(0);
        assert_eq!(o.private_cards, parse_cards("HQ").unwrap());
        assert_eq!(o.legal_actions, vec![Fold, Call, Raise]);
        assert!(s.observation(1).legal_actions.is_empty());
        assert_eq!(s.observation(1).private_cards, parse_cards("SJ").unwrap());
    }

    #[test]
    fn forfeit_charges_a_fold() {
        let s = new_game(Variant::Kuhn, 1).forfeit(0).unwrap();
        assert_eq!(s.payoffs().unwrap(), [-1, 1]);
    }

    #[test]
    fn bad_deals_are_rejected() {
        let deal = Deal {
            hole: [parse_cards("HK").unwrap(), parse_cards("HK").unwrap()],
            board: parse_cards("SJ").unwrap(),
            undealt: vec![],
        };
        assert!(GameState::with_deal(Variant::Leduc, deal).is_err());
    }
}
