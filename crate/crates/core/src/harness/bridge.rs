//! External agents over newline-delimited JSON.
//!
//! On each of the agent's turns the harness sends one line
//!
//! ```text
//! {"type":"observation","id":7,"game_seed":42,"observation":{...},"prompt":"...","legal_actions":["fold","call","raise"]}
//! ```
//!
//! and waits for one line back, `{"id":7,"action":"call"}` (`id` may be
//! omitted; a reply carrying a different id is stale and skipped). When a
//! game ends the harness sends
//!
//! ```text
//! {"type":"game_end","game_seed":42,"seat":1,"payoff":-2,"history":"rc;x","forfeit":null}
//! ```
//!
//! which expects no reply. Over HTTP each message is the body of a
//! `POST` to the agent's URL and the reply is the response body.
//!
//! A missing reply within the timeout, a dead process, an unparseable
//! reply or an illegal action forfeits the game for that agent.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::thread;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::render::{render_observation, DEFAULT_TEMPLATE};
use super::{Agent, AgentError, GameSummary, HarnessError};
use crate::game::{Action, Observation};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BridgeMessage {
    Observation {
        id: u64,
        game_seed: u64,
        observation: Observation,
        prompt: String,
        legal_actions: Vec<String>,
    },
    GameEnd {
        game_seed: u64,
        seat: usize,
        payoff: i64,
        history: String,
        forfeit: Option<String>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BridgeReply {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<u64>,
    pub action: String,
}

/// The observation message sent for `obs`.
pub fn observation_message(id: u64, game_seed: u64, obs: &Observation) -> BridgeMessage {
    BridgeMessage::Observation {
        id,
        game_seed,
        observation: obs.clone(),
        prompt: render_observation(obs, DEFAULT_TEMPLATE),
        legal_actions: obs.legal_actions.iter().map(|a| a.name().to_string()).collect(),
    }
}

pub fn end_message(summary: &GameSummary) -> BridgeMessage {
    BridgeMessage::GameEnd {
        game_seed: summary.game_seed,
        seat: summary.seat,
        payoff: summary.payoff,
        history: summary.history.clone(),
        forfeit: summary.forfeit.clone(),
    }
}

fn parse_reply(line: &str) -> Result<BridgeReply, AgentError> {
    serde_json::from_str(line).map_err(|e| AgentError::Protocol(format!("bad reply {line:?}: {e}")))
}

fn reply_action(reply: &BridgeReply) -> Result<Action, AgentError> {
    reply
        .action
        .parse()
        .map_err(|_| AgentError::Protocol(format!("unknown action {:?}", reply.action)))
}

pub struct CommandBridge {
    label: String,
    child: Child,
    stdin: Option<ChildStdin>,
    lines: Receiver<String>,
    timeout: Duration,
    next_id: u64,
    game_seed: u64,
}

impl CommandBridge {
    pub fn spawn(command: &[String], timeout: Duration) -> Result<Self, HarnessError> {
        let (program, args) = command
            .split_first()
            .ok_or_else(|| HarnessError::BadAgentSpec("empty command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::inherit())
            .spawn()
            .map_err(|e| HarnessError::Bridge(format!("cannot start {program}: {e}")))?;
        let stdout = child.stdout.take().expect("piped");
        let (tx, lines) = mpsc::channel();
        thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        Ok(Self {
            label: format!("external:cmd:{}", command.join(" ")),
            stdin: child.stdin.take(),
            child,
            lines,
            timeout,
            next_id: 0,
            game_seed: 0,
        })
    }

    fn send(&mut self, msg: &BridgeMessage) -> Result<(), AgentError> {
        let stdin = self
            .stdin
            .as_mut()
            .ok_or_else(|| AgentError::Crashed("stdin closed".into()))?;
        let mut line = serde_json::to_string(msg).expect("messages serialize");
        line.push('\n');
        stdin
            .write_all(line.as_bytes())
            .and_then(|_| stdin.flush())
            .map_err(|e| AgentError::Crashed(e.to_string()))
    }
}

impl Agent for CommandBridge {
    fn name(&self) -> String {
        self.label.clone()
    }

    fn begin_game(&mut self, game_seed: u64) {
        self.game_seed = game_seed;
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        self.next_id += 1;
        let id = self.next_id;
        self.send(&observation_message(id, self.game_seed, obs))?;
        let deadline = Instant::now() + self.timeout;
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) if line.trim().is_empty() => continue,
                Ok(line) => {
                    let reply = parse_reply(&line)?;
                    if reply.id.is_some_and(|r| r != id) {
                        continue;
                    }
                    return reply_action(&reply);
                }
                Err(RecvTimeoutError::Timeout) => return Err(AgentError::Timeout(self.timeout)),
                Err(RecvTimeoutError::Disconnected) => {
                    return Err(AgentError::Crashed("agent process closed its output".into()))
                }
            }
        }
    }

    fn end_game(&mut self, summary: &GameSummary) {
        let _ = self.send(&end_message(summary));
    }
}

impl Drop for CommandBridge {
    fn drop(&mut self) {
        self.stdin.take();
        if !matches!(self.child.try_wait(), Ok(Some(_))) {
            thread::sleep(Duration::from_millis(20));
            if !matches!(self.child.try_wait(), Ok(Some(_))) {
                let _ = self.child.kill();
            }
        }
        let _ = self.child.wait();
    }
}

pub struct HttpBridge {
    url: String,
    agent: ureq::Agent,
    next_id: u64,
    game_seed: u64,
}

impl HttpBridge {
    pub fn new(url: &str, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .build()
            .into();
        Self {
            url: url.to_string(),
            agent,
            next_id: 0,
            game_seed: 0,
        }
    }

    fn post(&self, msg: &BridgeMessage) -> Result<String, AgentError> {
        let body = serde_json::to_string(msg).expect("messages serialize");
        let mut resp = self
            .agent
            .post(&self.url)
            .header("content-type", "application/json")
            .send(body)
            .map_err(|e| match e {
                ureq::Error::Timeout(_) => AgentError::Timeout(Duration::ZERO),
                e => AgentError::Crashed(e.to_string()),
            })?;
        resp.body_mut()
            .read_to_string()
            .map_err(|e| AgentError::Protocol(e.to_string()))
    }
}

impl Agent for HttpBridge {
    fn name(&self) -> String {
        format!("external:{}", self.url)
    }

    fn begin_game(&mut self, game_seed: u64) {
        self.game_seed = game_seed;
    }

    fn act(&mut self, obs: &Observation) -> Result<Action, AgentError> {
        self.next_id += 1;
        let text = self.post(&observation_message(self.next_id, self.game_seed, obs))?;
        reply_action(&parse_reply(text.trim())?)
    }

    fn end_game(&mut self, summary: &GameSummary) {
        let _ = self.post(&end_message(summary));
    }
}
