pub mod cards;
pub mod cfr;
pub mod dataset;
pub mod equity;
pub mod eval;
pub mod game;
pub mod harness;
pub mod reward;
pub mod rng;
pub mod service;

#[cfg(doctest)]
pub mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    pub mod introduction {}
    #[doc = include_str!("../../../book/src/games.md")]
    pub mod games {}
    #[doc = include_str!("../../../book/src/solving.md")]
    pub mod solving {}
    #[doc = include_str!("../../../book/src/equity.md")]
    pub mod equity {}
    #[doc = include_str!("../../../book/src/rewards.md")]
    pub mod rewards {}
    #[doc = include_str!("../../../book/src/service.md")]
    pub mod service {}
    #[doc = include_str!("../../../book/src/matches.md")]
    pub mod matches {}
    #[doc = include_str!("../../../book/src/datasets.md")]
    pub mod datasets {}
    #[doc = include_str!("../../../book/src/cli.md")]
    pub mod cli {}
}
